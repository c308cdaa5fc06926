fn main() {
    std::process::exit(ceerlab::cli::main());
}
