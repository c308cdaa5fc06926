//! Divisibility witnesses: tuples of points whose classes are covered by
//! pairwise cross-disjoint enumerable sets, witness checking, and the
//! Turing-reduction decoder built on a two-point witness.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kernel::{encode, progs, w_member, Code, Fuel, OracleSpec};
use crate::nat::Nat;
use crate::numberings::{MapFailure, NumberingError, NumberingHandle, TotalMap};

/// Monotone fuel schedule indexed by stage: `fuel(s) = base + step * s`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FuelSchedule {
    pub base: Fuel,
    pub step: Fuel,
}

impl FuelSchedule {
    pub fn at(&self, stage: u64) -> Fuel {
        self.base.saturating_add(self.step.saturating_mul(stage))
    }
}

impl Default for FuelSchedule {
    fn default() -> Self {
        FuelSchedule {
            base: 256,
            step: 256,
        }
    }
}

/// Points `x_i` plus stage-monotone membership predicates for the covering
/// sets. The intended contract (tested, not provable) is that the class of
/// `x_i` is inside set `i` and disjoint from every other set.
#[derive(Clone)]
pub struct DivisibilityWitness {
    pub points: Vec<Nat>,
    sets: Arc<dyn Fn(usize, &Nat, u64) -> bool + Send + Sync>,
    pub set_codes: Option<Vec<Code>>,
    pub oracle: OracleSpec,
}

impl DivisibilityWitness {
    pub fn count(&self) -> usize {
        self.points.len()
    }

    /// Is `y` in set `i` by stage `s`? Monotone in `s`.
    pub fn member_at_stage(&self, i: usize, y: &Nat, s: u64) -> bool {
        (self.sets)(i, y, s)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DivisibilityError {
    #[error("operation requires a {expected}-point witness, got {got}")]
    WrongArity { expected: usize, got: usize },
    #[error(transparent)]
    Numbering(#[from] NumberingError),
}

/// The standard witness family for the domain numbering under an oracle:
/// `x_i` is a program converging exactly on input `i`, and set `i` holds the
/// codes whose domain contains `i`, probed at stage-scheduled fuel.
pub fn standard_w_witness(
    oracle: &OracleSpec,
    count: usize,
    schedule: FuelSchedule,
) -> DivisibilityWitness {
    let points: Vec<Nat> = (0..count)
        .map(|i| encode(&progs::conv_exactly(&Nat::from(i))))
        .collect();
    let set_codes: Vec<Code> = (0..count)
        .map(|i| Code(encode(&progs::w_index_prog(&Nat::from(i)))))
        .collect();
    let o = oracle.clone();
    let sets = Arc::new(move |i: usize, d: &Nat, s: u64| {
        w_member(&Code(d.clone()), &Nat::from(i), &o, schedule.at(s))
    });
    DivisibilityWitness {
        points,
        sets,
        set_codes: Some(set_codes),
        oracle: oracle.clone(),
    }
}

/// Witness whose sets are the classes of a total classifier; the toy
/// decidable case.
pub fn classifier_witness(
    classifier: Arc<dyn Fn(&Nat) -> Nat + Send + Sync>,
    points: Vec<Nat>,
    oracle: &OracleSpec,
) -> DivisibilityWitness {
    let labels: Vec<Nat> = points.iter().map(|p| classifier(p)).collect();
    let sets = Arc::new(move |i: usize, y: &Nat, _s: u64| classifier(y) == labels[i]);
    DivisibilityWitness {
        points,
        sets,
        set_codes: None,
        oracle: oracle.clone(),
    }
}

/// Witness built from pairwise-inequivalent representatives of a ceer: set
/// `i` is the staged positive cone of `x_i`.
pub fn ceer_witness_from_reps(
    gamma: &NumberingHandle,
    reps: &[u64],
) -> Result<DivisibilityWitness, DivisibilityError> {
    let positive = gamma
        .positive
        .clone()
        .ok_or(NumberingError::CapabilityMismatch {
            numbering: gamma.name.clone(),
            capability: "positive",
            operation: "ceer_witness_from_reps",
        })?;
    let points: Vec<Nat> = reps.iter().map(|&r| Nat::from(r)).collect();
    let pts = points.clone();
    let sets = Arc::new(move |i: usize, y: &Nat, s: u64| positive(&pts[i], y, s));
    Ok(DivisibilityWitness {
        points,
        sets,
        set_codes: None,
        oracle: gamma.oracle.clone(),
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WitnessReport {
    pub checked_samples: u64,
    /// Clause (i) failures: confirmed `y ~ x_i` missing from set `i`.
    pub coverage_failures: Vec<(usize, u64)>,
    /// Clause (ii) refutations: confirmed `y ~ x_i` found in set `j != i`.
    pub disjointness_refutations: Vec<(usize, usize, u64)>,
}

impl WitnessReport {
    pub fn pass(&self) -> bool {
        self.coverage_failures.is_empty() && self.disjointness_refutations.is_empty()
    }
}

/// Sample the two witness clauses: every `y` confirmed equivalent to `x_i`
/// must enter set `i` within the stage budget and must stay out of the other
/// sets. Needs the numbering's positive or decider capability.
pub fn check_witness(
    w: &DivisibilityWitness,
    gamma: &NumberingHandle,
    sample_bound: u64,
    stage_budget: u64,
) -> Result<WitnessReport, DivisibilityError> {
    let mut report = WitnessReport {
        checked_samples: 0,
        coverage_failures: Vec::new(),
        disjointness_refutations: Vec::new(),
    };
    for i in 0..w.count() {
        for y in 0..sample_bound {
            let yn = Nat::from(y);
            if !gamma.confirmed_equal(&w.points[i], &yn, stage_budget, "check_witness")? {
                continue;
            }
            report.checked_samples += 1;
            if !w.member_at_stage(i, &yn, stage_budget) {
                report.coverage_failures.push((i, y));
            }
            for j in 0..w.count() {
                if j != i && w.member_at_stage(j, &yn, stage_budget) {
                    report.disjointness_refutations.push((i, j, y));
                }
            }
        }
    }
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum DecodedBit {
    Bit(u8),
    /// No hit within the stage budget: the witness/lift contract was
    /// violated or the budget is too small.
    Inconclusive,
}

/// One step of the Turing reduction from a two-point witness: dovetail
/// membership of `g(n)` in the two sets by increasing stage; a hit in set 0
/// decodes to 0, in set 1 to 1.
pub fn decode_via_witness(
    g: &TotalMap,
    w: &DivisibilityWitness,
    n: &Nat,
    stage_budget: u64,
) -> Result<DecodedBit, DivisibilityError> {
    if w.count() != 2 {
        return Err(DivisibilityError::WrongArity {
            expected: 2,
            got: w.count(),
        });
    }
    let v = match g.apply(n) {
        Ok(v) => v,
        Err(MapFailure::NoConvergence { .. }) | Err(MapFailure::TooLarge(_)) => {
            return Ok(DecodedBit::Inconclusive)
        }
    };
    for s in 0..=stage_budget {
        if w.member_at_stage(0, &v, s) {
            return Ok(DecodedBit::Bit(0));
        }
        if w.member_at_stage(1, &v, s) {
            return Ok(DecodedBit::Bit(1));
        }
    }
    Ok(DecodedBit::Inconclusive)
}

/// Pointwise [`decode_via_witness`] over an initial segment.
pub fn decode_prefix(
    g: &TotalMap,
    w: &DivisibilityWitness,
    length: u64,
    stage_budget: u64,
) -> Result<Vec<DecodedBit>, DivisibilityError> {
    (0..length)
        .map(|n| decode_via_witness(g, w, &Nat::from(n), stage_budget))
        .collect()
}

/// The indicator-style map from the reduction theorem's proof: sends `n` to
/// the first point when `n` is outside the set and to the second otherwise.
pub fn indicator_map(
    name: &str,
    in_set: Arc<dyn Fn(&Nat) -> bool + Send + Sync>,
    x0: Nat,
    x1: Nat,
) -> TotalMap {
    TotalMap::from_fn(name, move |n| {
        if in_set(n) {
            x1.clone()
        } else {
            x0.clone()
        }
    })
}

// ---------------------------------------------------------------------------
// Witness description files
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WitnessFile {
    pub points: Vec<u64>,
    pub sets: WitnessSetsFile,
    pub oracle: OracleSpec,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum WitnessSetsFile {
    /// Residue classes (`modulus`) or a finite indicator (`members`).
    Classifier {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        modulus: Option<u64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        members: Option<Vec<u64>>,
    },
    /// Set `i` is the domain-membership probe of `codes[i]` at scheduled fuel.
    Program {
        codes: Vec<u64>,
        #[serde(default)]
        schedule: Option<FuelSchedule>,
    },
    /// Explicit staged enumeration: entries are (set index, element, stage).
    Staged { entries: Vec<(usize, u64, u64)> },
}

#[derive(Debug, Error)]
pub enum WitnessFileError {
    #[error("classifier witness needs `modulus` or `members`")]
    MissingClassifier,
}

pub fn witness_from_file(wf: &WitnessFile) -> Result<DivisibilityWitness, WitnessFileError> {
    let points: Vec<Nat> = wf.points.iter().map(|&p| Nat::from(p)).collect();
    match &wf.sets {
        WitnessSetsFile::Classifier { modulus, members } => {
            let classifier: Arc<dyn Fn(&Nat) -> Nat + Send + Sync> = match (modulus, members) {
                (Some(m), _) => {
                    let m = Nat::from(*m);
                    Arc::new(move |v: &Nat| v % &m)
                }
                (None, Some(ms)) => {
                    let set: Vec<Nat> = ms.iter().map(|&x| Nat::from(x)).collect();
                    Arc::new(move |v: &Nat| Nat::from(set.contains(v) as u32))
                }
                (None, None) => return Err(WitnessFileError::MissingClassifier),
            };
            Ok(classifier_witness(classifier, points, &wf.oracle))
        }
        WitnessSetsFile::Program { codes, schedule } => {
            let schedule = schedule.unwrap_or_default();
            let cs: Vec<Code> = codes.iter().map(|&c| Code::from_u64(c)).collect();
            let set_codes = cs.clone();
            let oracle = wf.oracle.clone();
            let o = oracle.clone();
            let sets = Arc::new(move |i: usize, y: &Nat, s: u64| {
                w_member(&cs[i], y, &o, schedule.at(s))
            });
            Ok(DivisibilityWitness {
                points,
                sets,
                set_codes: Some(set_codes),
                oracle,
            })
        }
        WitnessSetsFile::Staged { entries } => {
            let entries = entries.clone();
            let sets = Arc::new(move |i: usize, y: &Nat, s: u64| {
                entries
                    .iter()
                    .any(|&(si, el, st)| si == i && st <= s && Nat::from(el) == *y)
            });
            Ok(DivisibilityWitness {
                points,
                sets,
                set_codes: None,
                oracle: wf.oracle.clone(),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::phi_apply;
    use crate::nat::nat;
    use crate::numberings::{make_decidable_numbering, mod_numbering, ceer_numbering, CeerPair};

    fn parity_witness() -> DivisibilityWitness {
        classifier_witness(
            Arc::new(|v: &Nat| v % 2u32),
            vec![nat(0), nat(1)],
            &OracleSpec::empty(),
        )
    }

    #[test]
    fn standard_witness_points_converge_exactly_once() {
        let w = standard_w_witness(&OracleSpec::empty(), 4, FuelSchedule::default());
        let x2 = Code(w.points[2].clone());
        assert!(w_member(&x2, &nat(2), &OracleSpec::empty(), 20_000));
        for other in [0u64, 1, 3, 4, 5] {
            assert!(
                !w_member(&x2, &nat(other), &OracleSpec::empty(), 20_000),
                "x_2 must not converge on {other}"
            );
        }
    }

    #[test]
    fn standard_witness_membership_examples() {
        let w = standard_w_witness(&OracleSpec::empty(), 2, FuelSchedule::default());
        // 0 in W_1 since the identity is total.
        assert!(w.member_at_stage(0, &nat(1), 16));
        // the divergent program has empty domain.
        let div = encode(&progs::diverge_prog());
        assert!(!w.member_at_stage(0, &div, 16));
        // set codes realize the same sets reflectively: phi_{e_0}(1) converges.
        let e0 = &w.set_codes.as_ref().unwrap()[0];
        assert!(phi_apply(e0, &nat(1), &OracleSpec::empty(), 20_000).is_converged());
    }

    #[test]
    fn parity_witness_passes() {
        let report = check_witness(&parity_witness(), &mod_numbering(2), 12, 8).unwrap();
        assert!(report.pass(), "{report:?}");
        assert!(report.checked_samples > 0);
    }

    #[test]
    fn duplicate_sets_refute_disjointness() {
        // Corrupt the parity witness: both sets are the evens.
        let w = classifier_witness(
            Arc::new(|v: &Nat| v % 2u32),
            vec![nat(0), nat(2)], // both points even: set 1 duplicates set 0
            &OracleSpec::empty(),
        );
        let report = check_witness(&w, &mod_numbering(2), 8, 8).unwrap();
        assert!(!report.pass());
        assert!(report
            .disjointness_refutations
            .iter()
            .any(|&(_, _, y)| y == 0));
    }

    #[test]
    fn one_class_numbering_refutes_standard_witness() {
        let w = standard_w_witness(&OracleSpec::empty(), 2, FuelSchedule::default());
        let one = make_decidable_numbering("one", Arc::new(|_| nat(0)));
        let report = check_witness(&w, &one, 6, 8).unwrap();
        assert!(!report.pass(), "all points equivalent, sets disjoint");
    }

    #[test]
    fn ceer_witness_examples() {
        let pairs = vec![CeerPair { x: 1, y: 2, stage: 0 }];
        let gamma = ceer_numbering("c", pairs.clone(), &OracleSpec::empty());
        let w = ceer_witness_from_reps(&gamma, &[1, 3]).unwrap();
        let report = check_witness(&w, &gamma, 6, 8).unwrap();
        assert!(report.pass(), "{report:?}");

        // reps {1,2} are equivalent: clause (ii) refutation.
        let w_bad = ceer_witness_from_reps(&gamma, &[1, 2]).unwrap();
        let report = check_witness(&w_bad, &gamma, 6, 8).unwrap();
        assert!(!report.pass());

        // empty ceer, singleton reps: pass.
        let empty_gamma = ceer_numbering("e", vec![], &OracleSpec::empty());
        let w3 = ceer_witness_from_reps(&empty_gamma, &[0, 1, 2]).unwrap();
        assert!(check_witness(&w3, &empty_gamma, 6, 8).unwrap().pass());
    }

    #[test]
    fn decode_multiples_of_three() {
        let w = parity_witness();
        let in_a: Arc<dyn Fn(&Nat) -> bool + Send + Sync> = Arc::new(|n: &Nat| n % 3u32 == nat(0));
        let f = indicator_map("chi-mult3", in_a, nat(0), nat(1));
        assert_eq!(
            decode_via_witness(&f, &w, &nat(6), 8).unwrap(),
            DecodedBit::Bit(1)
        );
        assert_eq!(
            decode_via_witness(&f, &w, &nat(5), 8).unwrap(),
            DecodedBit::Bit(0)
        );
        let bits = decode_prefix(&f, &w, 8, 8).unwrap();
        let expected: Vec<DecodedBit> = [1u8, 0, 0, 1, 0, 0, 1, 0]
            .iter()
            .map(|&b| DecodedBit::Bit(b))
            .collect();
        assert_eq!(bits, expected);
        assert_eq!(decode_prefix(&f, &w, 0, 8).unwrap(), Vec::new());
    }

    #[test]
    fn mismatched_lift_decodes_against_brute_force() {
        // g constantly 4 (even) while intending odds-indicator: decode gives
        // a bit stream that must disagree with chi_A at odd points.
        let w = parity_witness();
        let g = TotalMap::from_fn("const4", |_| nat(4));
        let mut mismatch = false;
        for n in 0u64..8 {
            let got = decode_via_witness(&g, &w, &nat(n), 8).unwrap();
            let truth = u8::from(n % 2 == 1);
            match got {
                DecodedBit::Bit(b) if b != truth => mismatch = true,
                DecodedBit::Inconclusive => mismatch = true,
                _ => {}
            }
        }
        assert!(mismatch, "constant g cannot decode the odds");
    }

    #[test]
    fn wrong_arity_is_an_error() {
        let w = standard_w_witness(&OracleSpec::empty(), 3, FuelSchedule::default());
        let f = TotalMap::from_fn("id", |n| n.clone());
        assert!(matches!(
            decode_via_witness(&f, &w, &nat(0), 4),
            Err(DivisibilityError::WrongArity { expected: 2, got: 3 })
        ));
    }

    #[test]
    fn witness_file_round_trip() {
        let wf = WitnessFile {
            points: vec![0, 1],
            sets: WitnessSetsFile::Classifier {
                modulus: Some(2),
                members: None,
            },
            oracle: OracleSpec::empty(),
        };
        let text = serde_json::to_string(&wf).unwrap();
        let back: WitnessFile = serde_json::from_str(&text).unwrap();
        let w = witness_from_file(&back).unwrap();
        assert!(w.member_at_stage(0, &nat(4), 0));
        assert!(!w.member_at_stage(0, &nat(5), 0));
    }
}
