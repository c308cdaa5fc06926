//! Desk-scale computability workbench.
//!
//! A small reflective language with a total Goedel numbering is the effective
//! substrate; on top of it live numberings and ceers with testable
//! capabilities, divisibility witnesses and their Turing-reduction decoder,
//! totalizers and the recursion theorems, a Skolem-function pipeline with
//! staged halting stand-ins, oracle reconstruction, and a finite-injury
//! priority construction of a ceer on which every total injective catalog
//! function collides. Every verdict is budget-relative and every budget is an
//! explicit parameter.

pub mod nat;
pub mod numberings;
pub mod divisibility;
pub mod precomplete;
pub mod arslanov;
pub mod kernel;
pub mod cli;

pub use nat::{cantor_pair, cantor_unpair, d_elements, d_encode, d_member, Nat};
