//! Batch front door; see the subcommand table in the README.

/// Entry point for the `ceerlab` binary; returns the process exit code.
pub fn main() -> i32 {
    eprintln!("cli not wired yet");
    3
}
