//! Oracle answer sources: finite tables, 0/1-valued programs with their own
//! per-query fuel, and staged enumerations.

use serde::{Deserialize, Serialize};

use super::code::Code;
use crate::nat::Nat;

/// A total 0/1 answer source for `query` steps.
///
/// `Staged` answers limit membership ("ever enumerated"); the stage-bounded
/// view is exposed separately via [`OracleSpec::member_by_stage`] and is
/// monotone in the stage.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum OracleSpec {
    Table {
        bits: Vec<u8>,
        default: u8,
    },
    Program {
        #[serde(with = "crate::nat::serde_nat")]
        code: Nat,
        #[serde(rename = "fuelPerQuery")]
        fuel_per_query: u64,
    },
    Staged {
        entries: Vec<(u64, u64)>,
    },
}

impl OracleSpec {
    /// The empty oracle: answers 0 everywhere.
    pub fn empty() -> OracleSpec {
        OracleSpec::Table {
            bits: Vec::new(),
            default: 0,
        }
    }

    /// Finite table from a predicate on an initial segment.
    pub fn table_from(len: usize, f: impl Fn(u64) -> bool) -> OracleSpec {
        OracleSpec::Table {
            bits: (0..len).map(|i| f(i as u64) as u8).collect(),
            default: 0,
        }
    }

    pub fn program(code: Code, fuel_per_query: u64) -> OracleSpec {
        OracleSpec::Program {
            code: code.0,
            fuel_per_query,
        }
    }

    /// Stage-bounded membership for staged oracles: is `k` enumerated by
    /// stage `s`? Monotone in `s`. Non-staged oracles report their plain
    /// answer regardless of stage.
    pub fn member_by_stage(&self, k: &Nat, stage: u64) -> bool {
        match self {
            OracleSpec::Staged { entries } => entries
                .iter()
                .any(|(elem, s)| *s <= stage && Nat::from(*elem) == *k),
            _ => crate::kernel::eval::oracle_answer(self, k) == Ok(1),
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            OracleSpec::Table { .. } => "table",
            OracleSpec::Program { .. } => "program",
            OracleSpec::Staged { .. } => "staged",
        }
    }
}
