//! Totalization for the program numberings, the recursion theorems (plain
//! and with parameters), the universal-totalization lift, and the oracle
//! reconstruction recursion.
//!
//! The Goedel numbering quotes numerals in unary, so the code of any genuine
//! arithmetic totalization program, and with it the literal in-language
//! self-application `phi_e(e)`, is astronomically large: `quote(n)` has about
//! `3.17 * n` bits, and any program performing it has a Goedel number beyond
//! every representable bound. The constructions here therefore realize the
//! self-application step in layers, all certificate-checked against the
//! numbering:
//!
//! 1. when the probed value family of psi collapses into one class, the
//!    totalization has a genuinely small code twin (a constant program) and
//!    `phi_e(e)` runs in-language on it;
//! 2. otherwise the transformer is evaluated at the anchor, the least probed
//!    diagonal point where psi converges, which is the feasible stand-in for
//!    the true self-application point.
//!
//! Every returned fixpoint records which path produced it, and the
//! gamma-comparison of `f(n)` against `n` is part of the result, so a wrong
//! stand-in is refuted rather than silently accepted.

use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::kernel::{
    encode_checked, lam, num, phi_apply, run, use_of, var, Code, Fuel, OracleSpec, Verdict,
    ENCODE_BIT_CAP,
};
use crate::nat::{cantor_pair, cantor_unpair, d_encode, Nat};
use crate::numberings::{
    Budget, EquivVerdict, MapFailure, NumberingError, NumberingHandle, TotalMap,
};

/// Code of the everywhere-undefined program, the canonical don't-care value
/// for totalization gaps.
pub fn empty_fn_code() -> Code {
    Code::from_u64(55)
}

/// A partial map given at the meta level; `None` means "did not converge
/// within this map's own internal budget".
#[derive(Clone)]
pub struct PartialMap {
    pub name: String,
    pub eval: Arc<dyn Fn(&Nat) -> Option<Nat> + Send + Sync>,
}

/// How a fixpoint's self-application step was realized.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum SelfApplication {
    /// `phi_e(e)` ran in-language on the collapsed code twin `e`.
    InLanguage {
        #[serde(with = "crate::nat::serde_nat")]
        e: Nat,
    },
    /// The transformer was evaluated at the anchor diagonal point.
    Anchored {
        #[serde(with = "crate::nat::serde_nat")]
        anchor: Nat,
    },
}

/// The totalization of one psi: the spec transformer (total, extension-sound
/// by construction) plus the collapsed in-language twin when one exists.
#[derive(Clone)]
pub struct TotalizedPsi {
    /// Code of psi when psi was given in-language.
    pub c_psi: Option<Code>,
    transform: Arc<dyn Fn(&Nat) -> Result<Nat, MapFailure> + Send + Sync>,
    /// In-language twin: a code `e` with `phi_e` total whose values agree
    /// with the totalization on the probe window. Present exactly when the
    /// probed value family collapsed into a single class.
    pub g_code: Option<Code>,
    /// Representative of the collapsed value family, when it collapsed.
    pub collapsed: Option<Nat>,
    /// Least probed point where psi converged.
    pub anchor: Option<Nat>,
    pub probe: Budget,
    pub note: String,
}

impl TotalizedPsi {
    /// The totalization as a map; total up to the desk-scale size budget.
    pub fn transform(&self, n: &Nat) -> Result<Nat, MapFailure> {
        (self.transform)(n)
    }

    pub fn as_total_map(&self, name: &str) -> TotalMap {
        let t = self.transform.clone();
        TotalMap::from_partial_fn(name, move |n| t(n))
    }
}

/// Totalizer for a numbering: maps each psi (by code or meta) to its
/// totalization. The constant fuel overhead of the produced codes is the
/// reflective dispatch `Run(Run(quote psi, quote n), x)`.
#[derive(Clone)]
pub struct Totalizer {
    pub gamma_name: String,
    pub oracle: OracleSpec,
    pub probe: Budget,
    gamma: NumberingHandle,
    pub note: String,
}

impl Totalizer {
    /// Totalize a psi given by its code. The transformer is the reflective
    /// dispatch code `Lam(Run(Run(quote cPsi, quote n), Var 0))` (with the
    /// psi program inlined structurally when its code is too large to
    /// quote): total, oracle-free as code arithmetic, and when `psi(n)`
    /// diverges the produced code is the empty function.
    pub fn totalize(&self, c_psi: &Code) -> TotalizedPsi {
        let cp = c_psi.clone();
        let transform: Arc<dyn Fn(&Nat) -> Result<Nat, MapFailure> + Send + Sync> =
            Arc::new(move |n| {
                let e = lam(run(
                    crate::kernel::progs::apply_code_expr(&cp, num(n.clone())),
                    var(0),
                ));
                encode_checked(&e, ENCODE_BIT_CAP).map_err(|e| MapFailure::TooLarge(e.to_string()))
            });
        // Probe the value family of psi on the window.
        let mut values: Vec<(u64, Nat)> = Vec::new();
        for n in 0..self.probe.n_max {
            let nn = Nat::from(n);
            if let Verdict::Converged(v) = phi_apply(c_psi, &nn, &self.oracle, self.probe.fuel).verdict
            {
                values.push((n, v));
            }
        }
        self.assemble(Some(c_psi.clone()), transform, values)
    }

    /// Totalize a meta-level partial map by a windowed direct totalization:
    /// probed convergent values pass through, gaps take the canonical
    /// don't-care value. Extension is honest on the probe window only.
    pub fn totalize_meta(&self, psi: &PartialMap) -> TotalizedPsi {
        let mut values: Vec<(u64, Nat)> = Vec::new();
        let mut table: Vec<Option<Nat>> = Vec::new();
        for n in 0..self.probe.n_max {
            let v = (psi.eval)(&Nat::from(n));
            if let Some(v) = &v {
                values.push((n, v.clone()));
            }
            table.push(v);
        }
        let dont_care = empty_fn_code().0;
        let transform: Arc<dyn Fn(&Nat) -> Result<Nat, MapFailure> + Send + Sync> =
            Arc::new(move |n| {
                use num_traits::ToPrimitive;
                let v = n
                    .to_usize()
                    .and_then(|i| table.get(i).cloned().flatten())
                    .unwrap_or_else(|| dont_care.clone());
                Ok(v)
            });
        self.assemble(None, transform, values)
    }

    fn assemble(
        &self,
        c_psi: Option<Code>,
        transform: Arc<dyn Fn(&Nat) -> Result<Nat, MapFailure> + Send + Sync>,
        values: Vec<(u64, Nat)>,
    ) -> TotalizedPsi {
        let anchor = values.first().map(|(n, _)| Nat::from(*n));
        // The family collapses when every probed value sits in one class.
        let collapsed = match values.split_first() {
            None => None,
            Some(((_, v0), rest)) => {
                let all_equal = rest.iter().all(|(_, v)| {
                    !matches!(
                        self.gamma.compare(v, v0, &self.probe, "totalize"),
                        Ok(ev) if ev.is_negative()
                    )
                });
                if all_equal {
                    Some(v0.clone())
                } else {
                    None
                }
            }
        };
        let (g_code, note_twin) = match &collapsed {
            Some(v0) => {
                let rep = self
                    .gamma
                    .canon
                    .as_ref()
                    .map(|c| c(v0))
                    .unwrap_or_else(|| v0.clone());
                match encode_checked(&lam(num(rep.clone())), ENCODE_BIT_CAP) {
                    Ok(code) => (Some(Code(code)), "collapsed twin"),
                    Err(_) => (None, "collapsed value too large to embed"),
                }
            }
            None => (None, "no collapse on probe window"),
        };
        TotalizedPsi {
            c_psi,
            transform,
            g_code,
            collapsed,
            anchor,
            probe: self.probe.clone(),
            note: format!("{}; {}", self.note, note_twin),
        }
    }
}

/// Totalizer for any numbering handle with a refuter or decider. The probe
/// budget controls the collapse/anchor analysis.
pub fn make_numbering_totalizer(gamma: &NumberingHandle, probe: &Budget) -> Totalizer {
    Totalizer {
        gamma_name: gamma.name.clone(),
        oracle: gamma.oracle.clone(),
        probe: probe.clone(),
        gamma: gamma.clone(),
        note: format!(
            "totalizer for {}; constant overhead: reflective double dispatch",
            gamma.name
        ),
    }
}

/// The built-in program-numbering totalization of one psi.
pub fn totalize_phi(c_psi: &Code, oracle: &OracleSpec, probe: &Budget) -> TotalizedPsi {
    make_numbering_totalizer(&crate::numberings::phi_numbering(oracle), probe).totalize(c_psi)
}

/// The built-in domain-numbering totalization of one psi.
pub fn totalize_w(c_psi: &Code, oracle: &OracleSpec, probe: &Budget) -> TotalizedPsi {
    make_numbering_totalizer(&crate::numberings::w_numbering(oracle), probe).totalize(c_psi)
}

#[derive(Debug, Error)]
pub enum FixpointError {
    #[error("totalizer contract violated: self-application {diag} within fuel {fuel}")]
    TotalizerContract { fuel: Fuel, diag: String },
    #[error("psi never converged on the probe window (n_max {n_max}); no anchor")]
    NoAnchor { n_max: u64 },
    #[error("fixpoint evaluation failed: {0}")]
    Map(#[from] MapFailure),
    #[error(transparent)]
    Numbering(#[from] NumberingError),
}

#[derive(Clone, Debug, Serialize)]
pub struct FixpointOutcome {
    #[serde(with = "crate::nat::serde_nat")]
    pub value: Nat,
    pub path: SelfApplication,
    /// The gamma-comparison of f(value) against value.
    pub certificate: String,
    pub certified: bool,
}

fn certificate_of(v: &EquivVerdict) -> (String, bool) {
    match v {
        EquivVerdict::Equal => ("exact-equal".into(), true),
        EquivVerdict::Unrefuted => ("unrefuted".into(), true),
        EquivVerdict::NotEqual => ("exact-unequal".into(), false),
        EquivVerdict::Refuted(w) => (format!("refuted at {w}"), false),
    }
}

pub(crate) fn self_apply(
    tp: &TotalizedPsi,
    oracle: &OracleSpec,
    budget: &Budget,
) -> Result<(Nat, SelfApplication), FixpointError> {
    if let Some(e) = &tp.g_code {
        let out = phi_apply(e, &e.0, oracle, budget.fuel);
        return match out.verdict {
            Verdict::Converged(v) => Ok((
                v,
                SelfApplication::InLanguage { e: e.0.clone() },
            )),
            other => Err(FixpointError::TotalizerContract {
                fuel: budget.fuel,
                diag: format!("phi_e(e) on the code twin ended {other:?}"),
            }),
        };
    }
    let anchor = tp.anchor.clone().ok_or(FixpointError::NoAnchor {
        n_max: tp.probe.n_max,
    })?;
    let v = tp.transform(&anchor)?;
    Ok((v, SelfApplication::Anchored { anchor }))
}

/// The recursion theorem: a value `n` with `f(n) ~ n` under the numbering,
/// built from the totalizer applied to `psi(x) = f(phi_x(x))`. The
/// gamma-comparison of `f(n)` with `n` ships with the result.
pub fn fixpoint(
    t: &Totalizer,
    gamma: &NumberingHandle,
    f: &TotalMap,
    budget: &Budget,
) -> Result<FixpointOutcome, FixpointError> {
    let tp = match &f.code {
        Some(cf) => {
            // c_psi = Lam(Run(quote cF, Run(Var 0, Var 0))), with f's program
            // inlined when its code is too large to quote.
            let e = lam(crate::kernel::progs::apply_code_expr(
                cf,
                run(var(0), var(0)),
            ));
            let c_psi = Code(
                encode_checked(&e, ENCODE_BIT_CAP)
                    .map_err(|e| MapFailure::TooLarge(e.to_string()))?,
            );
            t.totalize(&c_psi)
        }
        None => {
            let fm = f.clone();
            let oracle = t.oracle.clone();
            let fuel = budget.fuel;
            let psi = PartialMap {
                name: format!("{}∘diag", f.name),
                eval: Arc::new(move |n| {
                    match phi_apply(&Code(n.clone()), n, &oracle, fuel).verdict {
                        Verdict::Converged(v) => fm.apply(&v).ok(),
                        _ => None,
                    }
                }),
            };
            t.totalize_meta(&psi)
        }
    };
    let (value, path) = self_apply(&tp, &t.oracle, budget)?;
    let fv = f.apply(&value)?;
    let (certificate, certified) = certificate_of(&gamma.compare(&fv, &value, budget, "fixpoint")?);
    Ok(FixpointOutcome {
        value,
        path,
        certificate,
        certified,
    })
}

/// A total binary map, the parameterized analogue of [`TotalMap`].
#[derive(Clone)]
pub struct TotalMap2 {
    pub name: String,
    meta: Arc<dyn Fn(&Nat, &Nat) -> Result<Nat, MapFailure> + Send + Sync>,
    /// Code taking the Cantor pair of the two arguments, when available.
    pub code: Option<Code>,
    pub oracle: OracleSpec,
}

impl TotalMap2 {
    pub fn from_fn2(
        name: &str,
        f: impl Fn(&Nat, &Nat) -> Nat + Send + Sync + 'static,
    ) -> TotalMap2 {
        TotalMap2 {
            name: name.to_string(),
            meta: Arc::new(move |a, b| Ok(f(a, b))),
            code: None,
            oracle: OracleSpec::empty(),
        }
    }

    pub fn from_code_paired(name: &str, code: Code, oracle: &OracleSpec, fuel: Fuel) -> TotalMap2 {
        let c = code.clone();
        let o = oracle.clone();
        TotalMap2 {
            name: name.to_string(),
            meta: Arc::new(move |a, b| {
                let z = cantor_pair(a, b);
                match phi_apply(&c, &z, &o, fuel).verdict {
                    Verdict::Converged(v) => Ok(v),
                    _ => Err(MapFailure::NoConvergence { fuel }),
                }
            }),
            code: Some(code),
            oracle: oracle.clone(),
        }
    }

    pub fn apply2(&self, a: &Nat, b: &Nat) -> Result<Nat, MapFailure> {
        (self.meta)(a, b)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ParamFixpointEntry {
    pub k: u64,
    #[serde(with = "crate::nat::serde_nat")]
    pub value: Nat,
    pub path: SelfApplication,
    pub certificate: String,
    pub certified: bool,
}

#[derive(Clone)]
pub struct ParamFixpoint {
    pub f: TotalMap,
    pub entries: Vec<ParamFixpointEntry>,
}

impl ParamFixpoint {
    pub fn all_certified(&self) -> bool {
        self.entries.iter().all(|e| e.certified)
    }
}

/// The recursion theorem with parameters: a total `f` with
/// `h(k, f(k)) ~ f(k)` for every `k`, materialized on `k < k_max` and
/// recomputed on demand beyond. Per parameter the construction totalizes
/// `psi_k(x) = h(k, U(x, <k, x>))` and self-applies as in [`fixpoint`].
pub fn fixpoint_with_params(
    t: &Totalizer,
    gamma: &NumberingHandle,
    h: &TotalMap2,
    k_max: u64,
    budget: &Budget,
) -> Result<ParamFixpoint, FixpointError> {
    let one_k = {
        let t = t.clone();
        let h = h.clone();
        let budget = budget.clone();
        move |k: &Nat| -> Result<(Nat, SelfApplication), FixpointError> {
            let hk = h.clone();
            let kk = k.clone();
            let oracle = t.oracle.clone();
            let fuel = budget.fuel;
            let psi = PartialMap {
                name: format!("{}[k={}]", h.name, k),
                eval: Arc::new(move |x| {
                    let z = cantor_pair(&kk, x);
                    match phi_apply(&Code(x.clone()), &z, &oracle, fuel).verdict {
                        Verdict::Converged(u) => hk.apply2(&kk, &u).ok(),
                        _ => None,
                    }
                }),
            };
            let tp = t.totalize_meta(&psi);
            self_apply(&tp, &t.oracle, &budget)
        }
    };

    let mut entries = Vec::new();
    let mut table = Vec::new();
    for k in 0..k_max {
        let kn = Nat::from(k);
        let (value, path) = one_k(&kn)?;
        let hv = h.apply2(&kn, &value)?;
        let (certificate, certified) =
            certificate_of(&gamma.compare(&hv, &value, budget, "fixpoint_with_params")?);
        entries.push(ParamFixpointEntry {
            k,
            value: value.clone(),
            path,
            certificate,
            certified,
        });
        table.push(value);
    }

    let f = TotalMap::from_partial_fn(&format!("skolem({})", h.name), move |k| {
        use num_traits::ToPrimitive;
        if let Some(i) = k.to_usize() {
            if i < table.len() {
                return Ok(table[i].clone());
            }
        }
        one_k(k)
            .map(|(v, _)| v)
            .map_err(|e| MapFailure::TooLarge(e.to_string()))
    });
    Ok(ParamFixpoint { f, entries })
}

// ---------------------------------------------------------------------------
// Universal totalization stand-ins and the lowness lift through them
// ---------------------------------------------------------------------------

/// A totalization of the universal function, given as a binary map
/// `u(e, n) ~ phi_e(n)` whenever the latter converges on the window.
#[derive(Clone)]
pub struct UniversalMap {
    pub name: String,
    pub eval: Arc<dyn Fn(&Nat, &Nat) -> Nat + Send + Sync>,
    /// In-language table code for tiny windows, when materialized.
    pub code: Option<Code>,
    pub oracle: OracleSpec,
}

/// Windowed universal totalization: probed convergent values pass through,
/// everything else is the empty-function don't-care.
pub fn windowed_universal_map(
    oracle: &OracleSpec,
    e_max: u64,
    n_max: u64,
    probe_fuel: Fuel,
) -> UniversalMap {
    use num_traits::ToPrimitive;
    let o = oracle.clone();
    let dont_care = empty_fn_code().0;
    let eval = Arc::new(move |e: &Nat, n: &Nat| {
        let in_window = e.to_u64().is_some_and(|v| v < e_max) && n.to_u64().is_some_and(|v| v < n_max);
        if in_window {
            if let Verdict::Converged(v) = phi_apply(&Code(e.clone()), n, &o, probe_fuel).verdict {
                return v;
            }
        }
        dont_care.clone()
    });
    UniversalMap {
        name: format!("windowed-universal(e<{e_max}, n<{n_max})"),
        eval,
        code: None,
        oracle: oracle.clone(),
    }
}

/// Linear dispatch table as an in-language program: input `z` selects
/// `entries[z]`, anything past the table takes the default. Each nested
/// `case` scrutinizes the predecessor bound by the enclosing branch, so the
/// chain peels one unit per slot. Code size doubles per entry; tiny windows
/// only.
pub fn universal_table_code(entries: &[u64], default: u64) -> Code {
    use crate::kernel::{case, encode};
    let mut body = num(default);
    for &v in entries.iter().rev() {
        body = case(var(0), num(v), body);
    }
    Code(encode(&lam(body)))
}

/// The lowness lift through a computable universal totalization:
/// `g(n) = u(e, n)` is a lift of `phi_e` to the empty oracle.
pub fn lift_via_universal_totalizer(u: &UniversalMap, e: &Code) -> TotalMap {
    let ev = u.eval.clone();
    let ec = e.0.clone();
    TotalMap::from_fn(&format!("{}@{}", u.name, e), move |n| ev(&ec, n))
}

// ---------------------------------------------------------------------------
// Oracle reconstruction
// ---------------------------------------------------------------------------

/// Desk stand-in for a universal totalization whose use function is visible:
/// `probe_code` queries the ambient oracle on an initial segment (its traces
/// define the use function), and `decider_code` is the query-free in-language
/// decision procedure the supplied totalization is built over.
#[derive(Clone, Debug)]
pub struct UniversalStandIn {
    pub probe_code: Code,
    pub decider_code: Code,
    pub decider_fuel: Fuel,
}

/// The standard probe: on input n queries 0..n-1 and returns the bitmask of
/// answers, so its use at n is exactly n-1.
pub fn prefix_probe_code() -> Code {
    use crate::kernel::progs::add_prog;
    use crate::kernel::{app, apps, case, encode, fix, query};
    // pow2 n = 2^n by doubling.
    let pow2 = fix(lam(case(
        var(0),
        num(1u32),
        apps(add_prog(), &[app(var(2), var(0)), app(var(2), var(0))]),
    )));
    // mask n = case n of 0 -> 0; n'+1 -> mask n' + (query n') * 2^n'
    let mask = fix(lam(case(
        var(0),
        num(0u32),
        apps(
            add_prog(),
            &[
                app(var(2), var(0)),
                case(query(var(0)), num(0u32), app(pow2, var(1))),
            ],
        ),
    )));
    Code(crate::kernel::encode(&mask))
}

/// Identity-as-probe: never queries, so the use function is constant.
pub fn silent_probe_code() -> Code {
    Code::from_u64(1)
}

#[derive(Clone, Debug, Serialize)]
pub enum ReconstructOutcome {
    /// The recursion ran to the target length.
    Bits { bits: Vec<u8> },
    /// The use function was constant on the tested range.
    UseBounded { f_values: Vec<u64> },
    /// Budget ran out mid-recursion.
    Partial { bits: Vec<u8>, diagnostic: String },
}

#[derive(Clone, Debug, Serialize)]
pub struct ReconstructReport {
    pub outcome: ReconstructOutcome,
    /// f(n) per probed n: one past the largest use, so 0 means "no queries".
    pub f_values: Vec<u64>,
    /// The canonical codes b(0), b(1), ... of the reconstructed segments.
    pub b_sequence: Vec<String>,
    pub delta_probes: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ReconstructParams {
    pub target_bits: u64,
    pub run_fuel: Fuel,
    /// Bound on the (candidate, stage) dovetail per delta step.
    pub dovetail_budget: u64,
    /// Stage-to-fuel schedule for witness-set probes.
    pub probe_base_fuel: Fuel,
    pub probe_step_fuel: Fuel,
}

impl Default for ReconstructParams {
    fn default() -> Self {
        ReconstructParams {
            target_bits: 16,
            run_fuel: 2_000_000,
            dovetail_budget: 1 << 16,
            probe_base_fuel: 1 << 20,
            probe_step_fuel: 1 << 18,
        }
    }
}

/// An omega-style witness prefix: point and set generators for every index.
#[derive(Clone)]
pub struct OmegaWitness {
    pub x_point: Arc<dyn Fn(&Nat) -> Nat + Send + Sync>,
    /// member(i, y, s): is y in set i by stage s (monotone in s).
    pub member_at_stage: Arc<dyn Fn(&Nat, &Nat, u64) -> bool + Send + Sync>,
    pub set_code: Arc<dyn Fn(&Nat) -> Code + Send + Sync>,
    pub oracle: OracleSpec,
}

/// The standard lazily generated witness family for the domain numbering:
/// `x_i` converges exactly on `i`, set `i` holds the codes whose domain
/// contains `i`.
pub fn standard_w_omega_witness(
    oracle: &OracleSpec,
    base_fuel: Fuel,
    step_fuel: Fuel,
) -> OmegaWitness {
    use crate::kernel::{encode, progs, w_member};
    let o = oracle.clone();
    let member = Arc::new(move |i: &Nat, y: &Nat, s: u64| {
        let fuel = base_fuel.saturating_add(step_fuel.saturating_mul(s));
        w_member(&Code(y.clone()), i, &o, fuel)
    });
    OmegaWitness {
        x_point: Arc::new(|i| encode(&progs::conv_exactly(i))),
        member_at_stage: member,
        set_code: Arc::new(|i| Code(encode(&progs::w_index_prog(i)))),
        oracle: oracle.clone(),
    }
}

/// Reconstruct an initial segment of the oracle `B` through the
/// totalization's use function and the witness recursion
/// `b(k+1) = delta(k, b(k))`:
///
/// * `f(n)` is one past the largest use of the probe runs at inputs up to n;
///   if it is constant on the tested range the totalization never needed the
///   oracle and the result is `UseBounded`.
/// * otherwise `b(0)` codes the empty segment and each `delta` step replays
///   the probe against the finite table `D_m`, forms the candidate masks
///   consistent with it, and finds the true extension as the least candidate
///   whose witness set captures the fiber point `x_{g(k)}`, dovetailing
///   candidates against stages in Cantor order.
pub fn reconstruct_oracle(
    u: &UniversalStandIn,
    w: &OmegaWitness,
    oracle_b: &OracleSpec,
    params: &ReconstructParams,
) -> ReconstructReport {
    // Use function from genuine probe traces under the true oracle.
    let mut f_values: Vec<u64> = Vec::new();
    let mut max_use: u64 = 0;
    for n in 0..=params.target_bits {
        if let Some(u_n) = use_of(&u.probe_code, &Nat::from(n), oracle_b, params.run_fuel) {
            use num_traits::ToPrimitive;
            let bound = u_n.to_u64().map(|v| v + 1).unwrap_or(u64::MAX);
            max_use = max_use.max(bound);
        }
        f_values.push(max_use);
    }

    let stabilized = f_values.iter().all(|&v| v == f_values[0]);
    if stabilized {
        return ReconstructReport {
            outcome: ReconstructOutcome::UseBounded {
                f_values: f_values.clone(),
            },
            f_values,
            b_sequence: vec![],
            delta_probes: 0,
        };
    }

    // Fiber masks from the in-language decider (query-free).
    let decider_bit = |j: u64| -> Option<u8> {
        use num_traits::ToPrimitive;
        match phi_apply(&u.decider_code, &Nat::from(j), &OracleSpec::empty(), u.decider_fuel)
            .verdict
        {
            Verdict::Converged(v) => v.to_u8().filter(|b| *b <= 1),
            _ => None,
        }
    };

    let mut b_sequence: Vec<Nat> = Vec::new();
    let mut b = d_encode(&[]); // b(0): the empty initial segment
    b_sequence.push(b.clone());
    let mut delta_probes: u64 = 0;
    let mut bits: Vec<u8> = Vec::new();

    for k in 0..params.target_bits {
        // Replay the probe against D_m in place of the oracle: with the
        // segment correct so far, the replayed trace must match the prefix.
        let d_bits: Vec<u8> = (0..k).map(|j| u8::from(b.bit(j))).collect();
        let replay_oracle = OracleSpec::Table {
            bits: d_bits,
            default: 0,
        };
        let replay = phi_apply(&u.probe_code, &Nat::from(k), &replay_oracle, params.run_fuel);
        if !matches!(replay.verdict, Verdict::Converged(_)) && k > 0 {
            return ReconstructReport {
                outcome: ReconstructOutcome::Partial {
                    bits,
                    diagnostic: format!("probe replay at step {k} did not converge"),
                },
                f_values,
                b_sequence: b_sequence.iter().map(|b| b.to_string()).collect(),
                delta_probes,
            };
        }

        // The fiber point: x at the decider mask of the next segment.
        let Some(g_mask) = (0..=k).try_fold(Nat::from(0u32), |acc, j| {
            decider_bit(j).map(|bit| {
                if bit == 1 {
                    acc | (Nat::from(1u32) << j)
                } else {
                    acc
                }
            })
        }) else {
            return ReconstructReport {
                outcome: ReconstructOutcome::Partial {
                    bits,
                    diagnostic: format!("decider did not answer below {}", k + 1),
                },
                f_values,
                b_sequence: b_sequence.iter().map(|b| b.to_string()).collect(),
                delta_probes,
            };
        };
        let x = (w.x_point)(&g_mask);

        // delta: least candidate extension whose witness set captures x,
        // dovetailing (candidate, stage) in Cantor order.
        let candidates = [b.clone(), b.clone() | (Nat::from(1u32) << k)];
        let mut found: Option<Nat> = None;
        'dovetail: for z in 0..params.dovetail_budget {
            let (ci, s) = cantor_unpair(&Nat::from(z));
            use num_traits::ToPrimitive;
            let Some(ci) = ci.to_usize() else { continue };
            if ci >= candidates.len() {
                continue;
            }
            let s = s.to_u64().unwrap_or(0);
            delta_probes += 1;
            if (w.member_at_stage)(&candidates[ci], &x, s) {
                found = Some(candidates[ci].clone());
                break 'dovetail;
            }
        }
        let Some(next) = found else {
            return ReconstructReport {
                outcome: ReconstructOutcome::Partial {
                    bits,
                    diagnostic: format!("delta dovetail exhausted at step {k}"),
                },
                f_values,
                b_sequence: b_sequence.iter().map(|b| b.to_string()).collect(),
                delta_probes,
            };
        };
        bits.push(u8::from(next.bit(k)));
        b = next;
        b_sequence.push(b.clone());
    }

    let final_bits: Vec<u8> = (0..params.target_bits).map(|j| u8::from(b.bit(j))).collect();
    debug_assert_eq!(final_bits, bits);
    ReconstructReport {
        outcome: ReconstructOutcome::Bits { bits: final_bits },
        f_values,
        b_sequence: b_sequence.iter().map(|b| b.to_string()).collect(),
        delta_probes,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{encode, progs, OracleSpec};
    use crate::nat::nat;
    use crate::numberings::{mod_numbering, phi_numbering};

    fn probe_budget() -> Budget {
        Budget::new(32, 4_000, 8)
    }

    fn check_budget() -> Budget {
        Budget::new(8, 10_000, 8)
    }

    #[test]
    fn empty_fn_code_is_55() {
        assert_eq!(empty_fn_code(), Code(encode(&progs::diverge_prog())));
    }

    #[test]
    fn totalize_identity_psi() {
        // cPsi = 1 (identity): phi_{g(n)} should behave as phi_n for n < 8.
        let gamma = phi_numbering(&OracleSpec::empty());
        let tp = totalize_phi(&Code::from_u64(1), &OracleSpec::empty(), &probe_budget());
        let b = check_budget();
        for n in 0u64..8 {
            let gn = tp.transform(&nat(n)).unwrap();
            let v = gamma.compare(&gn, &nat(n), &b, "test").unwrap();
            assert!(!v.is_negative(), "n={n}: {v:?}");
        }
    }

    #[test]
    fn totalize_divergent_psi_gives_empty_functions() {
        use crate::kernel::w_member;
        let tp = totalize_phi(
            &Code(encode(&progs::diverge_prog())),
            &OracleSpec::empty(),
            &probe_budget(),
        );
        for n in 0u64..6 {
            let gn = tp.transform(&nat(n)).unwrap();
            for x in 0u64..4 {
                assert!(
                    !w_member(&Code(gn.clone()), &nat(x), &OracleSpec::empty(), 10_000),
                    "phi_g({n}) must be empty"
                );
            }
        }
        assert!(tp.anchor.is_none());
        assert!(tp.collapsed.is_none());
    }

    #[test]
    fn transform_is_total_on_the_sweep() {
        let tp = totalize_phi(&Code::from_u64(1), &OracleSpec::empty(), &probe_budget());
        for n in 0u64..100 {
            assert!(tp.transform(&nat(n)).is_ok(), "g({n})");
        }
    }

    #[test]
    fn fixpoint_for_constant_function_runs_in_language() {
        let gamma = phi_numbering(&OracleSpec::empty());
        let t = make_numbering_totalizer(&gamma, &probe_budget());
        // f = const 28 (a code of const0)
        let f = TotalMap::from_code(
            "const28",
            Code(encode(&progs::const_prog(&nat(28)))),
            &OracleSpec::empty(),
            10_000,
        );
        let out = fixpoint(&t, &gamma, &f, &check_budget()).unwrap();
        assert!(out.certified, "{}", out.certificate);
        assert_eq!(out.value, nat(28));
        assert!(matches!(out.path, SelfApplication::InLanguage { .. }));
    }

    #[test]
    fn fixpoint_for_identity_is_anchored_and_certified() {
        let gamma = phi_numbering(&OracleSpec::empty());
        let t = make_numbering_totalizer(&gamma, &probe_budget());
        let f = TotalMap::from_code("identity", Code::from_u64(1), &OracleSpec::empty(), 10_000);
        let out = fixpoint(&t, &gamma, &f, &check_budget()).unwrap();
        assert!(out.certified, "{}", out.certificate);
    }

    #[test]
    fn fixpoint_for_pad_via_meta_path() {
        let gamma = phi_numbering(&OracleSpec::empty());
        let t = make_numbering_totalizer(&gamma, &probe_budget());
        let f = TotalMap::from_partial_fn("pad", |n| Ok(progs::pad(&Code(n.clone())).0));
        let out = fixpoint(&t, &gamma, &f, &check_budget()).unwrap();
        assert!(out.certified, "{}", out.certificate);
        assert!(matches!(out.path, SelfApplication::Anchored { .. }));
    }

    #[test]
    fn fixpoint_under_parity_with_supplied_totalizer_is_exact() {
        let parity = mod_numbering(2);
        let t = make_numbering_totalizer(&parity, &probe_budget());
        for (name, code) in [
            ("identity", Code::from_u64(1)),
            ("const5", Code(encode(&progs::const_prog(&nat(5))))),
            ("plus2", Code(encode(&lam(crate::kernel::succ(crate::kernel::succ(var(0))))))),
        ] {
            let f = TotalMap::from_code(name, code, &OracleSpec::empty(), 10_000);
            let out = fixpoint(&t, &parity, &f, &check_budget()).unwrap();
            assert!(out.certified, "{name}: {}", out.certificate);
            assert_eq!(out.certificate, "exact-equal", "{name}");
        }
    }

    #[test]
    fn param_fixpoint_examples() {
        let gamma = phi_numbering(&OracleSpec::empty());
        let t = make_numbering_totalizer(&gamma, &probe_budget());
        let b = check_budget();

        // h(k, x) = x: everything is a fixpoint.
        let h = TotalMap2::from_fn2("proj", |_, x| x.clone());
        let pf = fixpoint_with_params(&t, &gamma, &h, 4, &b).unwrap();
        assert!(pf.all_certified());

        // h = const c: phi_{f(k)} equals phi_c.
        let c = nat(28);
        let cc = c.clone();
        let h = TotalMap2::from_fn2("const28", move |_, _| cc.clone());
        let pf = fixpoint_with_params(&t, &gamma, &h, 4, &b).unwrap();
        assert!(pf.all_certified());
        for e in &pf.entries {
            assert_eq!(e.value, c);
        }

        // h(k, x) = code of const k: phi_{f(k)} is constantly k.
        let h = TotalMap2::from_fn2("code-of-const-k", |k, _| {
            encode(&progs::const_prog(k))
        });
        let pf = fixpoint_with_params(&t, &gamma, &h, 4, &b).unwrap();
        assert!(pf.all_certified());
        for e in &pf.entries {
            let expect = encode(&progs::const_prog(&nat(e.k)));
            assert_eq!(e.value, expect, "k={}", e.k);
        }
    }

    #[test]
    fn universal_lift_examples() {
        use crate::numberings::{check_lift, LiftCandidate, LiftVerdict};
        let u = windowed_universal_map(&OracleSpec::empty(), 64, 64, 10_000);
        // e = 1: g is a lift of the identity.
        let g = lift_via_universal_totalizer(&u, &Code::from_u64(1));
        let f = TotalMap::from_code("phi_1", Code::from_u64(1), &OracleSpec::empty(), 10_000);
        let gamma = phi_numbering(&OracleSpec::empty());
        let v = check_lift(
            &LiftCandidate { f, g: g.clone() },
            &gamma,
            8,
            &check_budget(),
        )
        .unwrap();
        assert_eq!(v, LiftVerdict::NoDifferenceFound);
        // empty-domain e: phi_{g(n)} is empty on the grid.
        let div = Code(encode(&progs::diverge_prog()));
        let g = lift_via_universal_totalizer(&u, &div);
        for n in 0u64..8 {
            let gn = g.apply(&nat(n)).unwrap();
            assert!(!crate::kernel::w_member(
                &Code(gn),
                &nat(0),
                &OracleSpec::empty(),
                10_000
            ));
        }
        // totality sweep.
        let g = lift_via_universal_totalizer(&u, &Code::from_u64(1));
        for n in 0u64..64 {
            assert!(g.apply(&nat(n)).is_ok());
        }
    }

    #[test]
    fn prefix_probe_has_growing_use() {
        let b = OracleSpec::table_from(32, |i| i % 3 == 0);
        let probe = prefix_probe_code();
        for n in 1u64..8 {
            let u = use_of(&probe, &nat(n), &b, 2_000_000);
            assert_eq!(u, Some(nat(n - 1)), "use at {n}");
        }
        assert_eq!(use_of(&probe, &nat(0), &b, 100_000), None);
        // and the output is the queried mask
        let out = phi_apply(&probe, &nat(5), &b, 2_000_000);
        let expect = crate::nat::d_encode(&[0, 3]); // multiples of 3 below 5
        assert_eq!(out.verdict, Verdict::Converged(expect));
    }

    #[test]
    fn reconstruct_multiples_of_three() {
        let b = OracleSpec::table_from(64, |i| i % 3 == 0);
        let u = UniversalStandIn {
            probe_code: prefix_probe_code(),
            decider_code: Code(encode(&progs::is_multiple_prog(3))),
            decider_fuel: 200_000,
        };
        let w = standard_w_omega_witness(&OracleSpec::empty(), 1 << 20, 1 << 18);
        let params = ReconstructParams {
            target_bits: 8,
            ..Default::default()
        };
        let report = reconstruct_oracle(&u, &w, &b, &params);
        match &report.outcome {
            ReconstructOutcome::Bits { bits } => {
                let expect: Vec<u8> = (0..8).map(|i| u8::from(i % 3 == 0)).collect();
                assert_eq!(bits, &expect);
            }
            other => panic!("expected bits, got {other:?}"),
        }
    }

    #[test]
    fn silent_probe_reports_use_bounded() {
        let b = OracleSpec::table_from(64, |i| i % 3 == 0);
        let u = UniversalStandIn {
            probe_code: silent_probe_code(),
            decider_code: Code::from_u64(1),
            decider_fuel: 1_000,
        };
        let w = standard_w_omega_witness(&OracleSpec::empty(), 1 << 16, 1 << 14);
        let report = reconstruct_oracle(&u, &w, &b, &ReconstructParams::default());
        assert!(matches!(report.outcome, ReconstructOutcome::UseBounded { .. }));
    }
}
