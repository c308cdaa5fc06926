//! Bounded semantic comparison of programs: refutation-complete,
//! verification-incomplete. `NoDifferenceFound` is evidence, not proof.

use super::code::Code;
use super::eval::{phi_apply, w_member, Fuel, Verdict};
use super::oracle::OracleSpec;
use crate::nat::Nat;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EqVerdict {
    /// Input below the bound on which the two programs demonstrably differ.
    Differ(Nat),
    NoDifferenceFound,
}

impl EqVerdict {
    pub fn is_refuted(&self) -> bool {
        matches!(self, EqVerdict::Differ(_))
    }
}

/// Compare two programs as partial functions on inputs below `n_max`.
/// A difference is one side converging to a numeral while the other converges
/// to a different numeral or is stuck; fuel exhaustion is never evidence.
pub fn bounded_semantic_eq(
    e1: &Code,
    e2: &Code,
    oracle: &OracleSpec,
    n_max: u64,
    fuel: Fuel,
) -> EqVerdict {
    use crate::kernel::eval::eval;
    use crate::kernel::expr::{app, Expr};
    // Decode once; codes produced by the constructions can be large.
    let p1 = e1.decode();
    let p2 = e2.decode();
    for x in 0..n_max {
        let xn = Nat::from(x);
        let a = eval(&app(p1.clone(), Expr::Num(xn.clone())), oracle, fuel);
        let b = eval(&app(p2.clone(), Expr::Num(xn.clone())), oracle, fuel);
        let differ = match (&a.verdict, &b.verdict) {
            (Verdict::Converged(u), Verdict::Converged(v)) => u != v,
            (Verdict::Converged(_), Verdict::Stuck) => true,
            (Verdict::Stuck, Verdict::Converged(_)) => true,
            _ => false,
        };
        if differ {
            return EqVerdict::Differ(xn);
        }
    }
    EqVerdict::NoDifferenceFound
}

/// Compare two programs as domains on inputs below `n_max`. Budget-relative:
/// converging on one side while the other fails to converge within the fuel
/// counts as a difference.
pub fn bounded_domain_eq(
    e1: &Code,
    e2: &Code,
    oracle: &OracleSpec,
    n_max: u64,
    fuel: Fuel,
) -> EqVerdict {
    use crate::kernel::eval::eval;
    use crate::kernel::expr::{app, Expr};
    let p1 = e1.decode();
    let p2 = e2.decode();
    for x in 0..n_max {
        let xn = Nat::from(x);
        let m1 = eval(&app(p1.clone(), Expr::Num(xn.clone())), oracle, fuel).is_converged();
        let m2 = eval(&app(p2.clone(), Expr::Num(xn.clone())), oracle, fuel).is_converged();
        if m1 != m2 {
            return EqVerdict::Differ(xn);
        }
    }
    EqVerdict::NoDifferenceFound
}
