//! Numberings as bundles of testable capabilities, ceers as staged
//! union-find closures, and lifts with their lowness checks.
//!
//! A numbering exposes up to three capabilities: a staged positive
//! semi-decider, a budgeted refuter, and an exact decider. Program
//! equivalence for the standard numberings is only refutable, while ceers are
//! positively semi-decidable, so every operation declares which capability it
//! needs and rejects handles that lack it.

use std::collections::HashMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kernel::{
    bounded_domain_eq, bounded_semantic_eq, encode_checked, lam, num, phi_apply, run, var, Code,
    EqVerdict, Fuel, OracleSpec, Verdict, ENCODE_BIT_CAP,
};
use crate::nat::Nat;

/// Explicit budgets; every verdict in this crate is relative to one of these.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget {
    pub n_max: u64,
    pub fuel: Fuel,
    pub stages: u64,
}

impl Budget {
    pub fn new(n_max: u64, fuel: Fuel, stages: u64) -> Budget {
        Budget {
            n_max,
            fuel,
            stages,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RefuteOutcome {
    /// Evidence of inequivalence; for program numberings the witness is the
    /// distinguishing input.
    Refuted(Nat),
    NoEvidence,
}

pub type StagedEquivFn = Arc<dyn Fn(&Nat, &Nat, u64) -> bool + Send + Sync>;
pub type RefuterFn = Arc<dyn Fn(&Nat, &Nat, &Budget) -> RefuteOutcome + Send + Sync>;
pub type DeciderFn = Arc<dyn Fn(&Nat, &Nat) -> bool + Send + Sync>;
pub type CanonFn = Arc<dyn Fn(&Nat) -> Nat + Send + Sync>;

#[derive(Clone)]
pub struct NumberingHandle {
    pub name: String,
    pub positive: Option<StagedEquivFn>,
    pub refuter: Option<RefuterFn>,
    pub decider: Option<DeciderFn>,
    /// Small class representative, available for decidable numberings.
    pub canon: Option<CanonFn>,
    pub oracle: OracleSpec,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NumberingError {
    #[error("numbering `{numbering}` lacks the {capability} capability required by {operation}")]
    CapabilityMismatch {
        numbering: String,
        capability: &'static str,
        operation: &'static str,
    },
}

/// Result of comparing two indices under whatever capability is available.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EquivVerdict {
    Equal,
    NotEqual,
    Refuted(Nat),
    Unrefuted,
}

impl EquivVerdict {
    pub fn is_negative(&self) -> bool {
        matches!(self, EquivVerdict::NotEqual | EquivVerdict::Refuted(_))
    }
}

impl NumberingHandle {
    /// Compare via the decider if present, else the refuter.
    pub fn compare(
        &self,
        x: &Nat,
        y: &Nat,
        budget: &Budget,
        operation: &'static str,
    ) -> Result<EquivVerdict, NumberingError> {
        if let Some(d) = &self.decider {
            return Ok(if d(x, y) {
                EquivVerdict::Equal
            } else {
                EquivVerdict::NotEqual
            });
        }
        if let Some(r) = &self.refuter {
            return Ok(match r(x, y, budget) {
                RefuteOutcome::Refuted(w) => EquivVerdict::Refuted(w),
                RefuteOutcome::NoEvidence => EquivVerdict::Unrefuted,
            });
        }
        Err(NumberingError::CapabilityMismatch {
            numbering: self.name.clone(),
            capability: "refuter-or-decider",
            operation,
        })
    }

    /// Positive confirmation that `x ~ y`, by decider or staged semi-decider.
    pub fn confirmed_equal(
        &self,
        x: &Nat,
        y: &Nat,
        stages: u64,
        operation: &'static str,
    ) -> Result<bool, NumberingError> {
        if let Some(d) = &self.decider {
            return Ok(d(x, y));
        }
        if let Some(p) = &self.positive {
            return Ok(p(x, y, stages));
        }
        Err(NumberingError::CapabilityMismatch {
            numbering: self.name.clone(),
            capability: "positive-or-decider",
            operation,
        })
    }
}

/// Numbering from a total classifier: full capabilities, all derived from
/// the decider.
pub fn make_decidable_numbering(
    name: &str,
    classifier: Arc<dyn Fn(&Nat) -> Nat + Send + Sync>,
) -> NumberingHandle {
    let c1 = classifier.clone();
    let decider: DeciderFn = Arc::new(move |x, y| c1(x) == c1(y));
    let c2 = classifier.clone();
    let positive: StagedEquivFn = Arc::new(move |x, y, _s| c2(x) == c2(y));
    let c3 = classifier.clone();
    let refuter: RefuterFn = Arc::new(move |x, y, _b| {
        if c3(x) == c3(y) {
            RefuteOutcome::NoEvidence
        } else {
            RefuteOutcome::Refuted(Nat::from(0u32))
        }
    });
    let c4 = classifier.clone();
    let canon: CanonFn = Arc::new(move |v| {
        let label = c4(v);
        let mut y = Nat::from(0u32);
        for _ in 0..256u32 {
            if y >= *v {
                break;
            }
            if c4(&y) == label {
                return y;
            }
            y += 1u32;
        }
        v.clone()
    });
    NumberingHandle {
        name: name.to_string(),
        positive: Some(positive),
        refuter: Some(refuter),
        decider: Some(decider),
        canon: Some(canon),
        oracle: OracleSpec::empty(),
    }
}

/// Residue-class numbering, the standing decidable example.
pub fn mod_numbering(m: u64) -> NumberingHandle {
    let m = Nat::from(m);
    make_decidable_numbering(&format!("mod-{m}"), Arc::new(move |v| v % &m))
}

/// The program numbering under an oracle: refuter only, via bounded
/// semantic comparison. Equality here is only refutable.
pub fn phi_numbering(oracle: &OracleSpec) -> NumberingHandle {
    let o = oracle.clone();
    let refuter: RefuterFn = Arc::new(move |x, y, b| {
        match bounded_semantic_eq(&Code(x.clone()), &Code(y.clone()), &o, b.n_max, b.fuel) {
            EqVerdict::Differ(w) => RefuteOutcome::Refuted(w),
            EqVerdict::NoDifferenceFound => RefuteOutcome::NoEvidence,
        }
    });
    NumberingHandle {
        name: "phi".to_string(),
        positive: None,
        refuter: Some(refuter),
        decider: None,
        canon: None,
        oracle: oracle.clone(),
    }
}

/// The domain numbering under an oracle: refuter only, via bounded domain
/// comparison.
pub fn w_numbering(oracle: &OracleSpec) -> NumberingHandle {
    let o = oracle.clone();
    let refuter: RefuterFn = Arc::new(move |x, y, b| {
        match bounded_domain_eq(&Code(x.clone()), &Code(y.clone()), &o, b.n_max, b.fuel) {
            EqVerdict::Differ(w) => RefuteOutcome::Refuted(w),
            EqVerdict::NoDifferenceFound => RefuteOutcome::NoEvidence,
        }
    });
    NumberingHandle {
        name: "w".to_string(),
        positive: None,
        refuter: Some(refuter),
        decider: None,
        canon: None,
        oracle: oracle.clone(),
    }
}

// ---------------------------------------------------------------------------
// Ceers: staged pair streams closed under reflexivity-symmetry-transitivity.
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CeerPair {
    pub x: u64,
    pub y: u64,
    pub stage: u64,
}

#[derive(Clone, Debug, Default)]
struct UnionFind {
    index: HashMap<u64, usize>,
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl UnionFind {
    fn slot(&mut self, el: u64) -> usize {
        if let Some(&i) = self.index.get(&el) {
            return i;
        }
        let i = self.parent.len();
        self.index.insert(el, i);
        self.parent.push(i);
        self.rank.push(0);
        i
    }

    fn find(&mut self, mut i: usize) -> usize {
        while self.parent[i] != i {
            self.parent[i] = self.parent[self.parent[i]];
            i = self.parent[i];
        }
        i
    }

    fn union(&mut self, a: u64, b: u64) {
        let (ia, ib) = (self.slot(a), self.slot(b));
        let (ra, rb) = (self.find(ia), self.find(ib));
        if ra == rb {
            return;
        }
        let (hi, lo) = if self.rank[ra] >= self.rank[rb] {
            (ra, rb)
        } else {
            (rb, ra)
        };
        self.parent[lo] = hi;
        if self.rank[hi] == self.rank[lo] {
            self.rank[hi] += 1;
        }
    }

    fn connected(&mut self, a: u64, b: u64) -> bool {
        match (self.index.get(&a).copied(), self.index.get(&b).copied()) {
            (Some(ia), Some(ib)) => self.find(ia) == self.find(ib),
            _ => false,
        }
    }
}

/// Partition of the mentioned elements at a given stage; unmentioned
/// elements are implicit singletons.
#[derive(Clone, Debug)]
pub struct CeerState {
    pub pairs: Vec<CeerPair>,
    pub stage: u64,
    uf: UnionFind,
}

impl CeerState {
    pub fn equivalent(&self, x: u64, y: u64) -> bool {
        if x == y {
            return true;
        }
        let mut uf = self.uf.clone();
        uf.connected(x, y)
    }

    /// The non-singleton classes, each sorted, sorted by minimum element.
    pub fn classes(&self) -> Vec<Vec<u64>> {
        let mut uf = self.uf.clone();
        let elements: Vec<u64> = {
            let mut v: Vec<u64> = uf.index.keys().copied().collect();
            v.sort_unstable();
            v
        };
        let mut by_root: HashMap<usize, Vec<u64>> = HashMap::new();
        for el in elements {
            let i = uf.index[&el];
            let r = uf.find(i);
            by_root.entry(r).or_default().push(el);
        }
        let mut classes: Vec<Vec<u64>> = by_root.into_values().filter(|c| c.len() > 1).collect();
        classes.sort_by_key(|c| c[0]);
        classes
    }
}

/// Union-find closure of the pairs enumerated at stages `<= s`.
pub fn ceer_close_at_stage(pairs: &[CeerPair], s: u64) -> CeerState {
    let mut uf = UnionFind::default();
    let mut kept = Vec::new();
    for p in pairs {
        if p.stage <= s {
            uf.union(p.x, p.y);
            kept.push(*p);
        }
    }
    CeerState {
        pairs: kept,
        stage: s,
        uf,
    }
}

/// Numbering handle for a ceer given by its pair stream: positive capability
/// only. `equivAtStage(x, y, s)` closes the pairs with stage at most `s`.
pub fn ceer_numbering(name: &str, pairs: Vec<CeerPair>, oracle: &OracleSpec) -> NumberingHandle {
    // Snapshot the closure at each distinct stage so queries are lookups.
    let mut stages: Vec<u64> = pairs.iter().map(|p| p.stage).collect();
    stages.sort_unstable();
    stages.dedup();
    let snapshots: Vec<(u64, CeerState)> = stages
        .iter()
        .map(|&s| (s, ceer_close_at_stage(&pairs, s)))
        .collect();
    let positive: StagedEquivFn = Arc::new(move |x, y, s| {
        if x == y {
            return true;
        }
        let (Some(xu), Some(yu)) = (nat_to_u64(x), nat_to_u64(y)) else {
            return false;
        };
        let at = snapshots.partition_point(|(stage, _)| *stage <= s);
        if at == 0 {
            return false;
        }
        snapshots[at - 1].1.equivalent(xu, yu)
    });
    NumberingHandle {
        name: name.to_string(),
        positive: Some(positive),
        refuter: None,
        decider: None,
        canon: None,
        oracle: oracle.clone(),
    }
}

fn nat_to_u64(n: &Nat) -> Option<u64> {
    use num_traits::ToPrimitive;
    n.to_u64()
}

/// Parse a JSON-lines ceer pair stream: one `{"x":n,"y":m,"stage":s}` per line.
pub fn parse_ceer_jsonl(text: &str) -> Result<Vec<CeerPair>, serde_json::Error> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(serde_json::from_str)
        .collect()
}

pub fn write_ceer_jsonl(pairs: &[CeerPair]) -> String {
    let mut out = String::new();
    for p in pairs {
        out.push_str(&serde_json::to_string(p).expect("ceer pair serializes"));
        out.push('\n');
    }
    out
}

// ---------------------------------------------------------------------------
// Quotients
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct QuotientReport {
    pub checked_pairs: u64,
    pub violations: Vec<(u64, u64)>,
}

impl QuotientReport {
    pub fn pass(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Check that `gamma2` is a quotient of `gamma1` on sampled pairs: every
/// confirmed `x ~_1 y` must not be refuted under `gamma2`.
pub fn quotient_check(
    gamma1: &NumberingHandle,
    gamma2: &NumberingHandle,
    sample_bound: u64,
    budget: &Budget,
) -> Result<QuotientReport, NumberingError> {
    let mut checked = 0;
    let mut violations = Vec::new();
    for x in 0..sample_bound {
        for y in (x + 1)..sample_bound {
            let xn = Nat::from(x);
            let yn = Nat::from(y);
            if !gamma1.confirmed_equal(&xn, &yn, budget.stages, "quotient_check")? {
                continue;
            }
            checked += 1;
            if gamma2.compare(&xn, &yn, budget, "quotient_check")?.is_negative() {
                violations.push((x, y));
            }
        }
    }
    Ok(QuotientReport {
        checked_pairs: checked,
        violations,
    })
}

// ---------------------------------------------------------------------------
// Lifts and lowness checks
// ---------------------------------------------------------------------------

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MapFailure {
    #[error("no convergence within fuel {fuel}")]
    NoConvergence { fuel: Fuel },
    #[error("value out of desk-scale range: {0}")]
    TooLarge(String),
}

/// A total function on naturals, represented by a meta-level evaluator plus
/// an optional kernel code computing the same map. Totality of code-backed
/// maps is asserted by the caller, not proven; evaluation failures surface as
/// values so callers can report `Inconclusive` instead of guessing.
#[derive(Clone)]
pub struct TotalMap {
    pub name: String,
    meta: Arc<dyn Fn(&Nat) -> Result<Nat, MapFailure> + Send + Sync>,
    pub code: Option<Code>,
    pub oracle: OracleSpec,
    pub query_free: bool,
}

impl TotalMap {
    /// From a genuinely total host function; oracle-free.
    pub fn from_fn(
        name: &str,
        f: impl Fn(&Nat) -> Nat + Send + Sync + 'static,
    ) -> TotalMap {
        TotalMap {
            name: name.to_string(),
            meta: Arc::new(move |n| Ok(f(n))),
            code: None,
            oracle: OracleSpec::empty(),
            query_free: true,
        }
    }

    /// From a fallible host function (size guards surface as failures).
    pub fn from_partial_fn(
        name: &str,
        f: impl Fn(&Nat) -> Result<Nat, MapFailure> + Send + Sync + 'static,
    ) -> TotalMap {
        TotalMap {
            name: name.to_string(),
            meta: Arc::new(f),
            code: None,
            oracle: OracleSpec::empty(),
            query_free: true,
        }
    }

    /// From a kernel code asserted total; evaluated under `oracle` at `fuel`.
    pub fn from_code(name: &str, code: Code, oracle: &OracleSpec, fuel: Fuel) -> TotalMap {
        let c = code.clone();
        let o = oracle.clone();
        TotalMap {
            name: name.to_string(),
            meta: Arc::new(move |n| match phi_apply(&c, n, &o, fuel).verdict {
                Verdict::Converged(v) => Ok(v),
                _ => Err(MapFailure::NoConvergence { fuel }),
            }),
            code: Some(code),
            oracle: oracle.clone(),
            query_free: false,
        }
    }

    pub fn apply(&self, n: &Nat) -> Result<Nat, MapFailure> {
        (self.meta)(n)
    }
}

/// A candidate lift: `g` should satisfy `f(n) ~ g(n)` under the numbering.
#[derive(Clone)]
pub struct LiftCandidate {
    pub f: TotalMap,
    pub g: TotalMap,
}

impl LiftCandidate {
    pub fn oracle_a(&self) -> &OracleSpec {
        &self.f.oracle
    }
    pub fn oracle_b(&self) -> &OracleSpec {
        &self.g.oracle
    }
}

/// When the oracles already coincide, `f` is its own lift.
pub fn trivial_lift(f: &TotalMap) -> LiftCandidate {
    LiftCandidate {
        f: f.clone(),
        g: f.clone(),
    }
}

/// The s-m-n lowness lift for the program numbering: from a code for a total
/// `f`, an oracle-free total `g` with `phi_{g(n)} = phi_{phi_cF(n)}` under
/// every oracle. The produced codes defer all work to run time, so `g`
/// itself is pure code arithmetic.
pub fn smn_low_lift(c_f: &Code) -> TotalMap {
    let cf = c_f.clone();
    TotalMap {
        name: format!("smn-low-lift({})", cf),
        meta: Arc::new(move |n| {
            let e = lam(run(
                crate::kernel::progs::apply_code_expr(&cf, num(n.clone())),
                var(0),
            ));
            encode_checked(&e, ENCODE_BIT_CAP)
                .map_err(|err| MapFailure::TooLarge(err.to_string()))
        }),
        code: None,
        oracle: OracleSpec::empty(),
        query_free: true,
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LiftVerdict {
    Refuted(Nat),
    NoDifferenceFound,
    /// `f` or `g` failed to produce a value at this index within budget.
    Inconclusive(Nat),
}

/// Check `f(n) ~ g(n)` for all `n < n_max` under the numbering's refuter or
/// decider; `f` and `g` run under their own oracles.
pub fn check_lift(
    cand: &LiftCandidate,
    gamma: &NumberingHandle,
    n_max: u64,
    budget: &Budget,
) -> Result<LiftVerdict, NumberingError> {
    for n in 0..n_max {
        let nn = Nat::from(n);
        let Ok(fv) = cand.f.apply(&nn) else {
            return Ok(LiftVerdict::Inconclusive(nn));
        };
        let Ok(gv) = cand.g.apply(&nn) else {
            return Ok(LiftVerdict::Inconclusive(nn));
        };
        if gamma.compare(&fv, &gv, budget, "check_lift")?.is_negative() {
            return Ok(LiftVerdict::Refuted(nn));
        }
    }
    Ok(LiftVerdict::NoDifferenceFound)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{encode, progs};
    use crate::nat::nat;

    fn parity() -> NumberingHandle {
        mod_numbering(2)
    }

    #[test]
    fn ceer_closure_examples() {
        let pairs = vec![
            CeerPair { x: 1, y: 2, stage: 0 },
            CeerPair { x: 2, y: 3, stage: 0 },
        ];
        let st = ceer_close_at_stage(&pairs, 0);
        assert!(st.equivalent(1, 3), "transitivity");
        assert!(!st.equivalent(1, 4));

        let st = ceer_close_at_stage(&[], 7);
        assert!(!st.equivalent(0, 1));
        assert!(st.equivalent(5, 5));

        let pairs = vec![CeerPair { x: 1, y: 2, stage: 5 }];
        let st = ceer_close_at_stage(&pairs, 4);
        assert!(!st.equivalent(1, 2), "stage gating");
        let st = ceer_close_at_stage(&pairs, 5);
        assert!(st.equivalent(1, 2));
    }

    #[test]
    fn ceer_positive_capability_is_staged() {
        let pairs = vec![
            CeerPair { x: 1, y: 2, stage: 1 },
            CeerPair { x: 2, y: 3, stage: 4 },
        ];
        let h = ceer_numbering("test", pairs, &OracleSpec::empty());
        let p = h.positive.as_ref().unwrap();
        assert!(!p(&nat(1), &nat(3), 3));
        assert!(p(&nat(1), &nat(3), 4));
        assert!(p(&nat(1), &nat(3), 9));
        assert!(p(&nat(9), &nat(9), 0), "reflexive at every stage");
    }

    #[test]
    fn decidable_numbering_examples() {
        let p = parity();
        let d = p.decider.as_ref().unwrap();
        assert!(d(&nat(2), &nat(4)));
        assert!(!d(&nat(2), &nat(5)));
        let one_class = make_decidable_numbering("one", Arc::new(|_| nat(0)));
        assert!(one_class.decider.as_ref().unwrap()(&nat(17), &nat(99)));
    }

    #[test]
    fn phi_numbering_refutes_and_stays_silent() {
        let gamma = phi_numbering(&OracleSpec::empty());
        let r = gamma.refuter.as_ref().unwrap();
        let b = Budget::new(8, 10_000, 0);
        let succ_code = encode(&progs::succ_map_prog());
        assert_eq!(
            r(&nat(1), &succ_code, &b),
            RefuteOutcome::Refuted(nat(0))
        );
        assert_eq!(r(&nat(1), &nat(1), &b), RefuteOutcome::NoEvidence);
    }

    #[test]
    fn w_numbering_refutes_by_domain() {
        let gamma = w_numbering(&OracleSpec::empty());
        let r = gamma.refuter.as_ref().unwrap();
        let b = Budget::new(8, 10_000, 0);
        let empty_dom = encode(&progs::diverge_prog());
        assert_eq!(r(&nat(1), &empty_dom, &b), RefuteOutcome::Refuted(nat(0)));
    }

    #[test]
    fn quotient_check_examples() {
        let b = Budget::new(8, 1_000, 4);
        let p = parity();
        let rep = quotient_check(&p, &p, 8, &b).unwrap();
        assert!(rep.pass());

        // identity relation is finer than parity: no violations
        let ident = make_decidable_numbering("discrete", Arc::new(|v: &Nat| v.clone()));
        let rep = quotient_check(&ident, &p, 8, &b).unwrap();
        assert!(rep.pass());

        // one-class into parity: (0,1) violates
        let one = make_decidable_numbering("one", Arc::new(|_| nat(0)));
        let rep = quotient_check(&one, &p, 8, &b).unwrap();
        assert!(!rep.pass());
        assert!(rep.violations.contains(&(0, 1)));
    }

    #[test]
    fn trivial_lift_is_unrefuted_everywhere() {
        let f = TotalMap::from_fn("id", |n| n.clone());
        let cand = trivial_lift(&f);
        for gamma in [parity(), phi_numbering(&OracleSpec::empty())] {
            let v = check_lift(&cand, &gamma, 8, &Budget::new(4, 2_000, 0)).unwrap();
            assert_eq!(v, LiftVerdict::NoDifferenceFound, "{}", gamma.name);
        }
        let c3 = TotalMap::from_fn("const3", |_| nat(3));
        let v = check_lift(&trivial_lift(&c3), &parity(), 8, &Budget::new(4, 1_000, 0)).unwrap();
        assert_eq!(v, LiftVerdict::NoDifferenceFound);
    }

    #[test]
    fn smn_low_lift_identity() {
        // cF = 1 (identity): phi_{g(n)} should behave as phi_n under the
        // empty oracle; the phi refuter finds no difference for n < 8.
        let g = smn_low_lift(&Code::from_u64(1));
        let gamma = phi_numbering(&OracleSpec::empty());
        let b = Budget::new(8, 10_000, 0);
        for n in 0u64..8 {
            let gn = g.apply(&nat(n)).unwrap();
            assert!(
                !gamma
                    .compare(&gn, &nat(n), &b, "test")
                    .unwrap()
                    .is_negative(),
                "n={n}"
            );
        }
        assert!(g.query_free);
    }

    #[test]
    fn smn_low_lift_constant_function() {
        // cF = const 1: phi_{g(n)} is the identity program for every n.
        let c_const1 = Code(encode(&progs::const_prog(&nat(1))));
        let g = smn_low_lift(&c_const1);
        let gamma = phi_numbering(&OracleSpec::empty());
        let b = Budget::new(8, 10_000, 0);
        for n in 0u64..8 {
            let gn = g.apply(&nat(n)).unwrap();
            assert!(
                !gamma
                    .compare(&gn, &nat(1), &b, "test")
                    .unwrap()
                    .is_negative(),
                "n={n}"
            );
        }
    }

    #[test]
    fn check_lift_refutes_parity_mismatch() {
        let f = TotalMap::from_fn("id", |n| n.clone());
        let g = TotalMap::from_fn("const0", |_| nat(0));
        let cand = LiftCandidate { f, g };
        let v = check_lift(&cand, &parity(), 8, &Budget::new(4, 1_000, 0)).unwrap();
        assert_eq!(v, LiftVerdict::Refuted(nat(1)));
    }

    #[test]
    fn check_lift_reports_inconclusive() {
        let f = TotalMap::from_code(
            "diverge",
            Code(encode(&progs::diverge_prog())),
            &OracleSpec::empty(),
            1_000,
        );
        let g = TotalMap::from_fn("zero", |_| nat(0));
        let v = check_lift(&LiftCandidate { f, g }, &parity(), 4, &Budget::new(4, 1_000, 0))
            .unwrap();
        assert_eq!(v, LiftVerdict::Inconclusive(nat(0)));
    }

    #[test]
    fn capability_mismatch_is_rejected() {
        let pairs = vec![CeerPair { x: 0, y: 1, stage: 0 }];
        let ceer = ceer_numbering("c", pairs, &OracleSpec::empty());
        let f = TotalMap::from_fn("id", |n| n.clone());
        let err = check_lift(&trivial_lift(&f), &ceer, 4, &Budget::new(4, 100, 4));
        assert!(matches!(err, Err(NumberingError::CapabilityMismatch { .. })));
    }

    #[test]
    fn jsonl_round_trip() {
        let pairs = vec![
            CeerPair { x: 1, y: 2, stage: 0 },
            CeerPair { x: 5, y: 9, stage: 3 },
        ];
        let text = write_ceer_jsonl(&pairs);
        assert_eq!(parse_ceer_jsonl(&text).unwrap(), pairs);
        assert!(text.starts_with("{\"x\":1,\"y\":2,\"stage\":0}"));
    }
}
