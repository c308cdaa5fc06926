//! The kernel language: syntax, total Goedel numbering, fuel-bounded
//! oracle-tracing evaluation, program library, and bounded semantic equality.

pub mod code;
pub mod eval;
pub mod expr;
pub mod oracle;
pub mod progs;
pub mod semeq;

pub use code::{
    decode, encode, encode_checked, quote_numeral, try_quote_numeral, Code, EncodeOverflow,
    ENCODE_BIT_CAP,
};
pub use eval::{eval, oracle_answer, phi_apply, use_of, w_member, Fuel, Outcome, Verdict};
pub use expr::{
    app, apps, case, fix, lam, num, parse, print, query, run, succ, var, zero, Expr, ParseError,
};
pub use oracle::OracleSpec;
pub use progs::{catalog, pad, smn, CatalogEntry};
pub use semeq::{bounded_domain_eq, bounded_semantic_eq, EqVerdict};
