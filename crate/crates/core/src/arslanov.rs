//! The completeness-criterion pipeline with parameters: computable
//! approximations with an oracle-computable modulus, the staged halting-set
//! stand-in, the Skolem fixpoint selector, and the lowness lift through it.

use std::collections::HashMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kernel::{phi_apply, Code, Fuel, OracleSpec, Verdict};
use crate::nat::{cantor_pair, cantor_unpair, Nat};
use crate::numberings::{
    Budget, LiftCandidate, MapFailure, NumberingError, NumberingHandle, TotalMap,
};
use crate::precomplete::{
    empty_fn_code, self_apply, FixpointError, PartialMap, SelfApplication, Totalizer,
};

/// A total ternary map; used for stage-indexed approximations `h^(n, x, s)`.
#[derive(Clone)]
pub struct TotalMap3 {
    pub name: String,
    meta: Arc<dyn Fn(&Nat, &Nat, &Nat) -> Result<Nat, MapFailure> + Send + Sync>,
    /// Code taking the nested pair `<n, <x, s>>`, when available.
    pub code: Option<Code>,
    pub oracle: OracleSpec,
}

impl TotalMap3 {
    pub fn from_fn3(
        name: &str,
        f: impl Fn(&Nat, &Nat, &Nat) -> Nat + Send + Sync + 'static,
    ) -> TotalMap3 {
        TotalMap3 {
            name: name.to_string(),
            meta: Arc::new(move |a, b, c| Ok(f(a, b, c))),
            code: None,
            oracle: OracleSpec::empty(),
        }
    }

    pub fn from_code_tripled(
        name: &str,
        code: Code,
        oracle: &OracleSpec,
        fuel: Fuel,
    ) -> TotalMap3 {
        let c = code.clone();
        let o = oracle.clone();
        TotalMap3 {
            name: name.to_string(),
            meta: Arc::new(move |n, x, s| {
                let z = cantor_pair(n, &cantor_pair(x, s));
                match phi_apply(&c, &z, &o, fuel).verdict {
                    Verdict::Converged(v) => Ok(v),
                    _ => Err(MapFailure::NoConvergence { fuel }),
                }
            }),
            code: Some(code),
            oracle: oracle.clone(),
        }
    }

    pub fn apply3(&self, a: &Nat, b: &Nat, c: &Nat) -> Result<Nat, MapFailure> {
        (self.meta)(a, b, c)
    }
}

/// A computable approximation of a binary map together with its
/// oracle-computable modulus: for all `s >= m(n, x)` the approximation
/// `h^(n, x, s)` equals the limit value `h(n, x)`.
#[derive(Clone)]
pub struct ApproxWithModulus {
    pub h_hat: TotalMap3,
    pub modulus: crate::precomplete::TotalMap2,
    pub oracle_a: OracleSpec,
}

impl ApproxWithModulus {
    /// The limit value `h(n, x) = h^(n, x, m(n, x))`, forced by the modulus
    /// contract.
    pub fn limit(&self, n: &Nat, x: &Nat) -> Result<Nat, MapFailure> {
        let m = self.modulus.apply2(n, x)?;
        self.h_hat.apply3(n, x, &m)
    }
}

/// Staged enumeration standing in for the halting set: `s_k` is the stage at
/// which `k` appears. Entries are deduplicated to the minimal stage.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StagedSet {
    entries: Vec<(u64, u64)>,
}

impl StagedSet {
    pub fn new(entries: impl IntoIterator<Item = (u64, u64)>) -> StagedSet {
        let mut best: HashMap<u64, u64> = HashMap::new();
        for (k, s) in entries {
            best.entry(k)
                .and_modify(|cur| *cur = (*cur).min(s))
                .or_insert(s);
        }
        let mut entries: Vec<(u64, u64)> = best.into_iter().collect();
        entries.sort_unstable();
        StagedSet { entries }
    }

    pub fn entries(&self) -> &[(u64, u64)] {
        &self.entries
    }

    pub fn member(&self, k: &Nat) -> bool {
        self.entry_stage(k).is_some()
    }

    /// The minimal stage at which `k` is enumerated.
    pub fn entry_stage(&self, k: &Nat) -> Option<u64> {
        use num_traits::ToPrimitive;
        let k = k.to_u64()?;
        self.entries
            .iter()
            .find(|(el, _)| *el == k)
            .map(|(_, s)| *s)
    }

    /// Monotone in the stage.
    pub fn member_by_stage(&self, k: &Nat, stage: u64) -> bool {
        self.entry_stage(k).is_some_and(|s| s <= stage)
    }

    pub fn parse_json(text: &str) -> Result<StagedSet, serde_json::Error> {
        let raw: Vec<(u64, u64)> = serde_json::from_str(text)?;
        Ok(StagedSet::new(raw))
    }
}

#[derive(Debug, Error)]
pub enum SkolemError {
    #[error("mu-search budget exhausted at frontier {frontier} (n = {n})")]
    MuExhausted { n: Nat, frontier: u64 },
    #[error("evaluation failed: {0}")]
    Map(#[from] MapFailure),
    #[error(transparent)]
    Fixpoint(#[from] FixpointError),
    #[error(transparent)]
    Numbering(#[from] NumberingError),
}

#[derive(Clone, Debug, Serialize)]
pub struct ModulusReport {
    pub checked: u64,
    /// (n, x, s) with the approximation differing from its settled value at
    /// or beyond the modulus.
    pub violations: Vec<(u64, u64, u64)>,
    /// (n, x) where the approximation or modulus failed to produce a value.
    pub inconclusive: Vec<(u64, u64)>,
}

impl ModulusReport {
    pub fn pass(&self) -> bool {
        self.violations.is_empty() && self.inconclusive.is_empty()
    }
}

/// Verify stabilization at and beyond the modulus on a grid.
pub fn modulus_check(
    a: &ApproxWithModulus,
    n_max: u64,
    x_max: u64,
    extra_stages: u64,
) -> ModulusReport {
    use num_traits::ToPrimitive;
    let mut report = ModulusReport {
        checked: 0,
        violations: Vec::new(),
        inconclusive: Vec::new(),
    };
    for n in 0..n_max {
        for x in 0..x_max {
            let nn = Nat::from(n);
            let xn = Nat::from(x);
            report.checked += 1;
            let Ok(m) = a.modulus.apply2(&nn, &xn) else {
                report.inconclusive.push((n, x));
                continue;
            };
            let Some(m64) = m.to_u64() else {
                report.inconclusive.push((n, x));
                continue;
            };
            // Reference value: the deepest probed stage, the best available
            // estimate of the limit.
            let last = m64.saturating_add(extra_stages);
            let Ok(settled) = a.h_hat.apply3(&nn, &xn, &Nat::from(last)) else {
                report.inconclusive.push((n, x));
                continue;
            };
            for s in m64..last {
                match a.h_hat.apply3(&nn, &xn, &Nat::from(s)) {
                    Ok(v) if v == settled => {}
                    Ok(_) => report.violations.push((n, x, s)),
                    Err(_) => report.inconclusive.push((n, x)),
                }
            }
        }
    }
    report
}

#[derive(Clone, Debug, Serialize)]
pub struct SkolemOutcome {
    #[serde(with = "crate::nat::serde_nat")]
    pub value: Nat,
    /// The selector: `r(n) = k` from the least `<s, k>` satisfying the
    /// mu-condition.
    pub r: u64,
    pub r_stage: u64,
    pub mu_probes: u64,
    pub path: SelfApplication,
    pub certificate: String,
    pub certified: bool,
}

/// The Skolem fixpoint at one parameter: compiles
/// `psi(x, k) = h^(n, x, s_k)` for `k` in the staged set (divergent
/// otherwise), totalizes it per `k`, self-applies, and mu-searches the least
/// `<s, k>` with `m(n, f^(n, k)) <= s` and `k` enumerated by stage `s`. The
/// returned value is certified against the numbering by comparing the limit
/// `h(n, f(n))` with `f(n)`.
pub fn skolem_fixpoint(
    t: &Totalizer,
    gamma: &NumberingHandle,
    a: &ApproxWithModulus,
    k_set: &StagedSet,
    n: &Nat,
    budget: &Budget,
    mu_budget: u64,
) -> Result<SkolemOutcome, SkolemError> {
    use num_traits::ToPrimitive;

    let mut f_hat_cache: HashMap<u64, (Nat, SelfApplication)> = HashMap::new();
    let mut f_hat = |k: u64| -> Result<(Nat, SelfApplication), SkolemError> {
        if let Some(hit) = f_hat_cache.get(&k) {
            return Ok(hit.clone());
        }
        let kn = Nat::from(k);
        let out = match k_set.entry_stage(&kn) {
            Some(s_k) => {
                let hh = a.h_hat.clone();
                let nn = n.clone();
                let sk = Nat::from(s_k);
                let psi = PartialMap {
                    name: format!("psi[n={n},k={k}]"),
                    eval: Arc::new(move |x| hh.apply3(&nn, x, &sk).ok()),
                };
                let tp = t.totalize_meta(&psi);
                self_apply(&tp, &t.oracle, budget)?
            }
            // k outside the stand-in: psi_k is empty and any total value
            // works; take the canonical don't-care.
            None => (
                empty_fn_code().0,
                SelfApplication::Anchored {
                    anchor: Nat::from(0u32),
                },
            ),
        };
        f_hat_cache.insert(k, out.clone());
        Ok(out)
    };

    // mu <s, k> [ m(n, f^(n, k)) <= s  and  k in K_s ]
    let mut hit: Option<(u64, u64)> = None;
    let mut probes = 0u64;
    for z in 0..mu_budget {
        let (s, k) = cantor_unpair(&Nat::from(z));
        let (Some(s), Some(k)) = (s.to_u64(), k.to_u64()) else {
            continue;
        };
        if !k_set.member_by_stage(&Nat::from(k), s) {
            continue;
        }
        probes += 1;
        let (fk, _) = f_hat(k)?;
        let m = a.modulus.apply2(n, &fk)?;
        if m.to_u64().is_some_and(|m| m <= s) {
            hit = Some((s, k));
            break;
        }
    }
    let Some((s, k)) = hit else {
        return Err(SkolemError::MuExhausted {
            n: n.clone(),
            frontier: mu_budget,
        });
    };

    let (value, path) = f_hat(k)?;
    let limit = a.limit(n, &value)?;
    let verdict = gamma.compare(&limit, &value, budget, "skolem_fixpoint")?;
    let (certificate, certified) = match &verdict {
        crate::numberings::EquivVerdict::Equal => ("exact-equal".to_string(), true),
        crate::numberings::EquivVerdict::Unrefuted => ("unrefuted".to_string(), true),
        crate::numberings::EquivVerdict::NotEqual => ("exact-unequal".to_string(), false),
        crate::numberings::EquivVerdict::Refuted(w) => (format!("refuted at {w}"), false),
    };
    Ok(SkolemOutcome {
        value,
        r: k,
        r_stage: s,
        mu_probes: probes,
        path,
        certificate,
        certified,
    })
}

#[derive(Clone)]
pub struct SkolemLift {
    pub candidate: LiftCandidate,
    pub entries: Vec<(u64, SkolemOutcome)>,
}

impl SkolemLift {
    pub fn all_certified(&self) -> bool {
        self.entries.iter().all(|(_, o)| o.certified)
    }
}

/// The lowness lift through the Skolem machinery: for a total `g`, take
/// `h(n, x) = g(n)` (approximation constant in the stage, modulus zero) and
/// select `f` with `g(n) = h(n, f(n)) ~ f(n)`; then `f` is a lift of `g`.
pub fn lift_from_skolem(
    g: &TotalMap,
    t: &Totalizer,
    gamma: &NumberingHandle,
    k_set: &StagedSet,
    budget: &Budget,
    mu_budget: u64,
) -> Result<SkolemLift, SkolemError> {
    let gm = g.clone();
    let h_hat = TotalMap3 {
        name: format!("const-in-x({})", g.name),
        meta: Arc::new(move |n, _x, _s| gm.apply(n)),
        code: None,
        oracle: g.oracle.clone(),
    };
    let approx = ApproxWithModulus {
        h_hat,
        modulus: crate::precomplete::TotalMap2::from_fn2("zero-modulus", |_, _| Nat::from(0u32)),
        oracle_a: g.oracle.clone(),
    };

    let mut entries = Vec::new();
    let mut table = Vec::new();
    for n in 0..budget.n_max {
        let nn = Nat::from(n);
        let out = skolem_fixpoint(t, gamma, &approx, k_set, &nn, budget, mu_budget)?;
        table.push(out.value.clone());
        entries.push((n, out));
    }

    let t2 = t.clone();
    let gamma2 = gamma.clone();
    let k2 = k_set.clone();
    let budget2 = budget.clone();
    let f = TotalMap::from_partial_fn(&format!("skolem-lift({})", g.name), move |n| {
        use num_traits::ToPrimitive;
        if let Some(i) = n.to_usize() {
            if i < table.len() {
                return Ok(table[i].clone());
            }
        }
        skolem_fixpoint(&t2, &gamma2, &approx, &k2, n, &budget2, mu_budget)
            .map(|o| o.value)
            .map_err(|e| MapFailure::TooLarge(e.to_string()))
    });

    Ok(SkolemLift {
        candidate: LiftCandidate { f: g.clone(), g: f },
        entries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{encode, progs};
    use crate::nat::nat;
    use crate::numberings::{check_lift, mod_numbering, phi_numbering, LiftVerdict};
    use crate::precomplete::{make_numbering_totalizer, TotalMap2};

    fn probe_budget() -> Budget {
        Budget::new(16, 4_000, 8)
    }

    fn check_budget() -> Budget {
        Budget::new(8, 10_000, 8)
    }

    fn stand_in() -> StagedSet {
        StagedSet::new([(0, 0), (1, 1), (2, 1), (3, 4), (5, 2)])
    }

    #[test]
    fn staged_set_semantics() {
        let k = StagedSet::new([(3, 5), (3, 2), (7, 0)]);
        assert_eq!(k.entry_stage(&nat(3)), Some(2), "minimal stage wins");
        assert!(k.member(&nat(7)));
        assert!(!k.member(&nat(4)));
        assert!(!k.member_by_stage(&nat(3), 1));
        assert!(k.member_by_stage(&nat(3), 2));
        let text = serde_json::to_string(&k).unwrap();
        assert_eq!(StagedSet::parse_json(&text).unwrap(), k);
    }

    #[test]
    fn modulus_check_examples() {
        // h^(n,x,s) = x with modulus 0: stable everywhere.
        let a = ApproxWithModulus {
            h_hat: TotalMap3::from_fn3("proj-x", |_, x, _| x.clone()),
            modulus: TotalMap2::from_fn2("zero", |_, _| nat(0)),
            oracle_a: OracleSpec::empty(),
        };
        assert!(modulus_check(&a, 4, 4, 6).pass());

        // flip at s = 5 with modulus claiming 3: violations at s in {3, 4}.
        let a = ApproxWithModulus {
            h_hat: TotalMap3::from_fn3("flip-at-5", |_, _, s| {
                if *s < nat(5) {
                    nat(0)
                } else {
                    nat(1)
                }
            }),
            modulus: TotalMap2::from_fn2("three", |_, _| nat(3)),
            oracle_a: OracleSpec::empty(),
        };
        let report = modulus_check(&a, 1, 1, 6);
        assert!(!report.pass());
        let stages: Vec<u64> = report.violations.iter().map(|&(_, _, s)| s).collect();
        assert_eq!(stages, vec![3, 4]);

        // stabilizing exactly at the modulus: pass.
        let a = ApproxWithModulus {
            h_hat: TotalMap3::from_fn3("settle-at-m", |n, x, s| {
                if s < &(n + x) {
                    nat(99)
                } else {
                    n + x
                }
            }),
            modulus: TotalMap2::from_fn2("n-plus-x", |n, x| n + x),
            oracle_a: OracleSpec::empty(),
        };
        assert!(modulus_check(&a, 4, 4, 4).pass());
    }

    #[test]
    fn skolem_with_stage_constant_approximation() {
        // h(n, x) = x: everything is a fixpoint; any value certifies.
        let gamma = phi_numbering(&OracleSpec::empty());
        let t = make_numbering_totalizer(&gamma, &probe_budget());
        let a = ApproxWithModulus {
            h_hat: TotalMap3::from_fn3("proj-x", |_, x, _| x.clone()),
            modulus: TotalMap2::from_fn2("zero", |_, _| nat(0)),
            oracle_a: OracleSpec::empty(),
        };
        let out =
            skolem_fixpoint(&t, &gamma, &a, &stand_in(), &nat(0), &check_budget(), 4_096).unwrap();
        assert!(out.certified, "{}", out.certificate);
    }

    #[test]
    fn skolem_with_constant_code_approximation() {
        // h = const code c: phi_{f(n)} must be phi_c.
        let gamma = phi_numbering(&OracleSpec::empty());
        let t = make_numbering_totalizer(&gamma, &probe_budget());
        let c = encode(&progs::const_prog(&nat(7)));
        let cc = c.clone();
        let a = ApproxWithModulus {
            h_hat: TotalMap3::from_fn3("const-code", move |_, _, _| cc.clone()),
            modulus: TotalMap2::from_fn2("zero", |_, _| nat(0)),
            oracle_a: OracleSpec::empty(),
        };
        for n in 0u64..4 {
            let out = skolem_fixpoint(&t, &gamma, &a, &stand_in(), &nat(n), &check_budget(), 4_096)
                .unwrap();
            assert!(out.certified, "n={n}: {}", out.certificate);
            assert_eq!(out.value, c, "collapsed family returns the constant");
        }
    }

    #[test]
    fn mu_search_trace_with_singleton_stand_in() {
        // K = {(0, stage 0)}, h constant: the least <s, k> is <0, 0>.
        let gamma = phi_numbering(&OracleSpec::empty());
        let t = make_numbering_totalizer(&gamma, &probe_budget());
        let a = ApproxWithModulus {
            h_hat: TotalMap3::from_fn3("const-28", |_, _, _| nat(28)),
            modulus: TotalMap2::from_fn2("zero", |_, _| nat(0)),
            oracle_a: OracleSpec::empty(),
        };
        let k = StagedSet::new([(0, 0)]);
        let out = skolem_fixpoint(&t, &gamma, &a, &k, &nat(2), &check_budget(), 4_096).unwrap();
        assert_eq!(out.r, 0);
        assert_eq!(out.r_stage, 0);
        assert!(out.certified);
    }

    #[test]
    fn mu_search_exhaustion_is_reported() {
        let gamma = phi_numbering(&OracleSpec::empty());
        let t = make_numbering_totalizer(&gamma, &probe_budget());
        let a = ApproxWithModulus {
            h_hat: TotalMap3::from_fn3("proj-x", |_, x, _| x.clone()),
            // modulus larger than any probed stage: the search cannot close.
            modulus: TotalMap2::from_fn2("huge", |_, _| nat(1_000_000)),
            oracle_a: OracleSpec::empty(),
        };
        let err = skolem_fixpoint(&t, &gamma, &a, &stand_in(), &nat(0), &check_budget(), 256);
        assert!(matches!(err, Err(SkolemError::MuExhausted { .. })));
    }

    #[test]
    fn lift_from_skolem_identity() {
        let gamma = phi_numbering(&OracleSpec::empty());
        let t = make_numbering_totalizer(&gamma, &probe_budget());
        let g = TotalMap::from_fn("id", |n| n.clone());
        let lift = lift_from_skolem(&g, &t, &gamma, &stand_in(), &check_budget(), 4_096).unwrap();
        assert!(lift.all_certified());
        let v = check_lift(&lift.candidate, &gamma, 8, &check_budget()).unwrap();
        assert_eq!(v, LiftVerdict::NoDifferenceFound);
    }

    #[test]
    fn lift_from_skolem_constant() {
        let gamma = phi_numbering(&OracleSpec::empty());
        let t = make_numbering_totalizer(&gamma, &probe_budget());
        let g = TotalMap::from_fn("const1", |_| nat(1));
        let lift = lift_from_skolem(&g, &t, &gamma, &stand_in(), &check_budget(), 4_096).unwrap();
        assert!(lift.all_certified());
        let v = check_lift(&lift.candidate, &gamma, 8, &check_budget()).unwrap();
        assert_eq!(v, LiftVerdict::NoDifferenceFound);
    }

    #[test]
    fn lift_from_skolem_parity_exact() {
        let parity = mod_numbering(2);
        let t = make_numbering_totalizer(&parity, &probe_budget());
        // parity-respecting g
        let g = TotalMap::from_fn("times3", |n| n * 3u32);
        let lift = lift_from_skolem(&g, &t, &parity, &stand_in(), &check_budget(), 4_096).unwrap();
        assert!(lift.all_certified());
        for (_, o) in &lift.entries {
            assert_eq!(o.certificate, "exact-equal");
        }
        let v = check_lift(&lift.candidate, &parity, 8, &check_budget()).unwrap();
        assert_eq!(v, LiftVerdict::NoDifferenceFound);
    }
}
