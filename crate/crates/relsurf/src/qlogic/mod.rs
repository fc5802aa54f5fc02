//! Quantum-logic layer: subspace-valued propositions over a causal
//! structure, a three-valued valuation against surface states, rule-checked
//! deductions, and soundness assessment.

pub mod deduction;
pub mod prop;
pub mod subspace;

pub use deduction::{check_deduction, Deduction, DeductionReport, Rule, Step, StepVerdict};
pub use prop::{wellformed, AtomDef, Prop, RawProp};
pub use subspace::Subspace;

use crate::assignment::{AssignmentError, CircuitAssignment};
use crate::causal::{EdgeId, Surface};
use std::collections::BTreeSet;
use std::fmt;
use thiserror::Error;

/// Valuation thresholds: projection norms below `1e-9` count as zero, above
/// `1 - 1e-9` as one; everything strictly between is merely possible.
pub const VALUATION_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LogicError {
    #[error("unknown atom {0}")]
    UnknownAtom(String),
    #[error("no spacelike surface contains the support of: {expr}")]
    NoCommonSurface { expr: String },
    #[error("atom {0} has an empty support")]
    EmptySupport(String),
    #[error("edge {0} appears twice in a support")]
    DuplicateSupportEdge(EdgeId),
    #[error("basis vector has wrong length: expected {expected}, got {got}")]
    BasisVectorLength { expected: usize, got: usize },
    #[error("denotation basis is not orthonormal (defect {defect:.3e})")]
    BasisNotOrthonormal { defect: f64 },
    #[error("support edge {0} is not contained in the joint support")]
    SupportNotContained(EdgeId),
    #[error("causal structure error: {0}")]
    Causal(String),
    #[error("assignment error: {0}")]
    Assignment(String),
}

impl From<AssignmentError> for LogicError {
    fn from(e: AssignmentError) -> Self {
        LogicError::Assignment(e.to_string())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Valuation {
    True,
    False,
    Possible,
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Valuation::True => "true",
            Valuation::False => "false",
            Valuation::Possible => "possible",
        })
    }
}

/// A valuation together with the projection norm it came from and the
/// surface it was evaluated on.
#[derive(Clone, Debug)]
pub struct ValuationOutcome {
    pub value: Valuation,
    pub norm: f64,
    pub surface: Surface,
}

impl ValuationOutcome {
    pub fn norm_squared(&self) -> f64 {
        self.norm * self.norm
    }
}

/// Valuates a proposition on an explicit surface containing its support:
/// the norm of the surface state's projection onto the denotation
/// (tensored with the identity elsewhere).
pub fn valuate_on(
    p: &Prop,
    circuit: &CircuitAssignment,
    surface: &Surface,
) -> Result<ValuationOutcome, LogicError> {
    let support = p.support();
    for edge in &support {
        if !surface.contains_edge(edge) {
            return Err(LogicError::SupportNotContained(edge.clone()));
        }
    }
    let denotation = p.denotation(circuit.dims())?;
    let psi = circuit.state_on_surface(surface)?;
    let labels: Vec<EdgeId> = denotation.factors().iter().map(|(l, _)| l.clone()).collect();
    let mut norm_sq = 0.0;
    for b in denotation.basis() {
        let (_, rest) = psi
            .contract_factors(&labels, b)
            .map_err(|e| LogicError::Assignment(e.to_string()))?;
        norm_sq += rest.iter().map(|z| z.norm_sqr()).sum::<f64>();
    }
    let norm = norm_sq.max(0.0).sqrt();
    let value = if norm < VALUATION_TOL {
        Valuation::False
    } else if norm > 1.0 - VALUATION_TOL {
        Valuation::True
    } else {
        Valuation::Possible
    };
    Ok(ValuationOutcome { value, norm, surface: surface.clone() })
}

/// Valuates on the first surface containing the proposition's support (the
/// choice does not matter: consistency of the assignment makes the result
/// surface-independent).
pub fn valuate(p: &Prop, circuit: &CircuitAssignment) -> Result<ValuationOutcome, LogicError> {
    let support = p.support();
    let surface = circuit
        .structure()
        .surface_containing(&support)
        .map_err(|e| LogicError::Causal(e.to_string()))?
        .ok_or_else(|| LogicError::NoCommonSurface { expr: p.to_string() })?;
    valuate_on(p, circuit, &surface)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    /// More than one merely-possible premise, or a false one: the soundness
    /// statement does not apply.
    PremisesIneligible,
    /// Eligible premises and a possible-or-true conclusion.
    Sound,
    /// Eligible premises but a false conclusion.
    Unsound,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::PremisesIneligible => "premises-ineligible",
            Verdict::Sound => "sound",
            Verdict::Unsound => "unsound",
        })
    }
}

#[derive(Clone, Debug)]
pub struct SoundnessAssessment {
    pub premise_valuations: Vec<ValuationOutcome>,
    pub conclusion_valuation: ValuationOutcome,
    pub verdict: Verdict,
    /// Whether one spacelike surface contains every premise support.
    pub single_surface: bool,
}

/// Valuates premises and conclusion of a (previously rule-checked) deduction
/// and classifies the outcome. With at most one merely-possible premise and
/// the rest true, a false conclusion means the deduction system itself is
/// unsound for this assignment.
pub fn assess_soundness(
    d: &Deduction,
    circuit: &CircuitAssignment,
) -> Result<SoundnessAssessment, LogicError> {
    let premise_valuations: Vec<ValuationOutcome> =
        d.premises.iter().map(|p| valuate(p, circuit)).collect::<Result<_, _>>()?;
    let conclusion_valuation = valuate(d.conclusion(), circuit)?;
    let possible =
        premise_valuations.iter().filter(|v| v.value == Valuation::Possible).count();
    let false_count = premise_valuations.iter().filter(|v| v.value == Valuation::False).count();
    let verdict = if false_count > 0 || possible > 1 {
        Verdict::PremisesIneligible
    } else if conclusion_valuation.value == Valuation::False {
        Verdict::Unsound
    } else {
        Verdict::Sound
    };
    let mut union: BTreeSet<EdgeId> = BTreeSet::new();
    for p in &d.premises {
        union.extend(p.support());
    }
    let single_surface = circuit
        .structure()
        .surface_containing(&union)
        .map_err(|e| LogicError::Causal(e.to_string()))?
        .is_some();
    Ok(SoundnessAssessment { premise_valuations, conclusion_valuation, verdict, single_surface })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qlogic::subspace::Subspace;
    use crate::random;
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::collections::BTreeMap;
    use std::sync::Arc;

    fn e(s: &str) -> EdgeId {
        EdgeId::new(s)
    }

    fn random_sub(dim: usize, rank: usize, rng: &mut ChaCha8Rng) -> Subspace {
        Subspace::new(vec![(e("q"), dim)], random::random_subspace(dim, rank, rng)).unwrap()
    }

    #[test]
    fn idempotence_and_double_negation_of_denotations() {
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        let dims: BTreeMap<EdgeId, usize> = [(e("q"), 6)].into();
        for _ in 0..20 {
            let rank = rng.gen_range(0..=6usize);
            let sub = random_sub(6, rank, &mut rng);
            let a = Prop::Atom(Arc::new(AtomDef::new("a", sub.clone())));
            let not_not = Prop::not(Prop::not(a.clone())).denotation(&dims).unwrap();
            assert!(not_not.approx_eq(&sub, 1e-9), "double negation at rank {rank}");
            let a_and_a = Prop::And(Box::new(a.clone()), Box::new(a.clone()))
                .denotation(&dims)
                .unwrap();
            assert!(a_and_a.approx_eq(&sub, 1e-9), "idempotence at rank {rank}");
        }
    }

    #[test]
    fn conjunction_with_implication_and_consequent_collapses() {
        // ⟦a & (a -> b) & b⟧ = ⟦a & b⟧ for arbitrary subspaces: the chain
        // behind the single-surface soundness proof.
        let mut rng = ChaCha8Rng::seed_from_u64(62);
        let dims: BTreeMap<EdgeId, usize> = [(e("q"), 6)].into();
        for trial in 0..20 {
            let da = random_sub(6, rng.gen_range(1..6), &mut rng);
            let db = random_sub(6, rng.gen_range(1..6), &mut rng);
            let a = Prop::Atom(Arc::new(AtomDef::new("a", da)));
            let b = Prop::Atom(Arc::new(AtomDef::new("b", db)));
            let lhs = Prop::And(
                Box::new(Prop::And(
                    Box::new(a.clone()),
                    Box::new(Prop::implication(a.clone(), b.clone())),
                )),
                Box::new(b.clone()),
            )
            .denotation(&dims)
            .unwrap();
            let rhs = Prop::And(Box::new(a), Box::new(b)).denotation(&dims).unwrap();
            assert!(lhs.approx_eq(&rhs, 1e-8), "trial {trial}");
        }
    }

    #[test]
    fn conjunction_with_implication_collapses_for_commuting_denotations() {
        // For denotations spanned by subsets of one orthonormal frame the
        // stronger identity ⟦a & (a -> b)⟧ = ⟦a & b⟧ holds as well.
        let mut rng = ChaCha8Rng::seed_from_u64(64);
        let dims: BTreeMap<EdgeId, usize> = [(e("q"), 6)].into();
        for trial in 0..20 {
            let frame = random::random_unitary(6, &mut rng);
            let pick = |rng: &mut ChaCha8Rng| -> Subspace {
                let cols: Vec<Vec<Complex64>> =
                    (0..6).filter(|_| rng.gen_bool(0.5)).map(|j| frame.column(j)).collect();
                Subspace::new(vec![(e("q"), 6)], cols).unwrap()
            };
            let a = Prop::Atom(Arc::new(AtomDef::new("a", pick(&mut rng))));
            let b = Prop::Atom(Arc::new(AtomDef::new("b", pick(&mut rng))));
            let lhs = Prop::And(
                Box::new(a.clone()),
                Box::new(Prop::implication(a.clone(), b.clone())),
            )
            .denotation(&dims)
            .unwrap();
            let rhs = Prop::And(Box::new(a), Box::new(b)).denotation(&dims).unwrap();
            assert!(lhs.approx_eq(&rhs, 1e-8), "trial {trial}");
        }
    }

    #[test]
    fn incompatible_possible_and_true_can_conjoin_to_false() {
        // With non-commuting denotations, a true premise and a possible one
        // can have a false conjunction even on a single surface: T = span
        // {e1,e2}, phi = span{(e2+e3)/√2}, state e2 in C³. This is exactly
        // the configuration the compatible generators below avoid.
        let g = crate::causal::CausalStructure::from_vertex_lists(
            vec![e("q")],
            vec![],
        );
        let dims: BTreeMap<EdgeId, usize> = [(e("q"), 3)].into();
        let gates = BTreeMap::new();
        let initial = crate::tensor::StateVector::basis(e("q"), 3, 1);
        let circuit =
            crate::assignment::CircuitAssignment::new(g, dims, gates, initial).unwrap();
        let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let one = Complex64::new(1.0, 0.0);
        let t = Subspace::new(
            vec![(e("q"), 3)],
            vec![vec![one, zero, zero], vec![zero, one, zero]],
        )
        .unwrap();
        let phi = Subspace::new(vec![(e("q"), 3)], vec![vec![zero, h, h]]).unwrap();
        let tp = Prop::Atom(Arc::new(AtomDef::new("t", t)));
        let pp = Prop::Atom(Arc::new(AtomDef::new("phi", phi)));
        assert_eq!(valuate(&tp, &circuit).unwrap().value, Valuation::True);
        assert_eq!(valuate(&pp, &circuit).unwrap().value, Valuation::Possible);
        let and = Prop::And(Box::new(tp), Box::new(pp));
        assert_eq!(valuate(&and, &circuit).unwrap().value, Valuation::False);
    }

    #[test]
    fn eligible_single_surface_deductions_are_sound() {
        let mut rng = ChaCha8Rng::seed_from_u64(random::seed_from_env() ^ 0x7E2);
        let mut with_possible = 0;
        for trial in 0..60 {
            let inst = random::random_single_surface_deduction(6, &mut rng);
            let report = check_deduction(&inst.deduction, inst.circuit.structure());
            assert!(report.valid, "trial {trial}: generator produced invalid steps");
            let assessment = assess_soundness(&inst.deduction, &inst.circuit).unwrap();
            assert!(assessment.single_surface, "trial {trial}");
            assert_ne!(
                assessment.conclusion_valuation.value,
                Valuation::False,
                "trial {trial}: conclusion false with eligible premises"
            );
            assert_eq!(assessment.verdict, Verdict::Sound, "trial {trial}");
            with_possible += inst.possible_premises;
        }
        assert!(with_possible > 0, "suite never produced a merely-possible premise");
    }

    #[test]
    fn conjunction_denotation_is_invariant_along_deductions() {
        // The running list's conjunction keeps the same denotation after
        // every rule application when everything shares one surface.
        let mut rng = ChaCha8Rng::seed_from_u64(random::seed_from_env() ^ 0x400);
        for _ in 0..15 {
            let inst = random::random_single_surface_deduction(4, &mut rng);
            let dims = inst.circuit.dims();
            let conj_of = |props: &[&Prop]| -> Option<Subspace> {
                let mut iter = props.iter();
                let first = (*iter.next().unwrap()).clone();
                let total = props
                    .iter()
                    .flat_map(|p| p.support())
                    .collect::<std::collections::BTreeSet<_>>()
                    .iter()
                    .map(|e| dims[e])
                    .product::<usize>();
                if total > 108 {
                    return None;
                }
                let combined = iter.fold(first, |acc, p| {
                    Prop::And(Box::new(acc), Box::new((*p).clone()))
                });
                combined.denotation(dims).ok()
            };
            let mut list: Vec<&Prop> = inst.deduction.premises.iter().collect();
            let mut previous = conj_of(&list);
            for step in &inst.deduction.steps {
                list.push(&step.derived);
                let next = conj_of(&list);
                if let (Some(a), Some(b)) = (&previous, &next) {
                    // Supports can differ; compare after embedding into the
                    // larger one.
                    let joint: Vec<(crate::causal::EdgeId, usize)> = {
                        let mut m = std::collections::BTreeMap::new();
                        for (l, d) in a.factors().iter().chain(b.factors()) {
                            m.insert(l.clone(), *d);
                        }
                        m.into_iter().collect()
                    };
                    let ea = a.embed(&joint).unwrap();
                    let eb = b.embed(&joint).unwrap();
                    assert!(
                        ea.approx_eq(&eb, 1e-8),
                        "conjunction denotation changed at a step"
                    );
                }
                previous = next;
            }
        }
    }

    #[test]
    fn valuation_is_surface_independent() {
        let mut rng = ChaCha8Rng::seed_from_u64(63);
        let mut checked = 0;
        while checked < 25 {
            let circuit = random::random_circuit(3, random::InitialKind::Generic, &mut rng);
            let surfaces = circuit.structure().enumerate_surfaces();
            // Pick a one-edge atom support and find all surfaces carrying it.
            let Some(edge) = circuit.structure().edges().first().map(|d| d.id.clone()) else {
                continue;
            };
            let hosts: Vec<_> =
                surfaces.iter().filter(|s| s.contains_edge(&edge)).cloned().collect();
            if hosts.len() < 2 {
                continue;
            }
            let dim = circuit.dim(&edge).unwrap();
            let rank = rng.gen_range(1..=dim);
            let sub =
                Subspace::new(vec![(edge.clone(), dim)], random::random_subspace(dim, rank, &mut rng))
                    .unwrap();
            let p = Prop::Atom(Arc::new(AtomDef::new("a", sub)));
            let norms: Vec<f64> = hosts
                .iter()
                .map(|s| valuate_on(&p, &circuit, s).unwrap().norm)
                .collect();
            for w in norms.windows(2) {
                assert!((w[0] - w[1]).abs() < 1e-9, "norms differ across surfaces: {norms:?}");
            }
            checked += 1;
        }
    }
}
