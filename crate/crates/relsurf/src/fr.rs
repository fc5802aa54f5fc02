//! The canonical nested-observer scenario: two qubits R and S, agents Alice,
//! Bob, Ursula, and Wigner modeled as three-level pointers, five unitary
//! events. Alice measures R and conditionally prepares S; Bob measures S;
//! Ursula measures (R, Alice) in a basis containing the joint ± states;
//! Wigner does the same for (S, Bob). The module builds the circuit, names
//! the five surfaces of interest, declares the atom table, and packages the
//! chained-inference argument, the direct argument, and the deduction whose
//! premises valuate [possible, true, true, true] while its conclusion is
//! false.

use crate::assignment::{
    make_controlled_gate, make_recording_gate, CircuitAssignment, Completion,
};
use crate::causal::{CausalStructure, EdgeId, Surface, VertexDecl, VertexId};
use crate::linalg::{CMat, ONE, ZERO};
use crate::qlogic::{AtomDef, Deduction, Prop, Rule, Step, Subspace};
use crate::relstate::{chain, relative_state, ChainResult, RelStateQuery, PURE_TOL};
use crate::tensor::{DensityOperator, StateVector};
use num_complex::Complex64;
use std::collections::BTreeMap;
use std::sync::Arc;

/// Basis index of the blank pointer state in every agent space.
pub const BLANK: usize = 2;
/// Basis indices of the ± outcomes in the U and W spaces.
pub const PLUS: usize = 0;
pub const MINUS: usize = 1;

pub struct FrScenario {
    pub circuit: CircuitAssignment,
    /// Named surfaces S0..S4.
    pub surfaces: BTreeMap<String, Surface>,
    pub atoms: BTreeMap<String, Arc<AtomDef>>,
    /// The four-premise deduction concluding W_plus & W_minus.
    pub deduction: Deduction,
}

fn e(s: &str) -> EdgeId {
    EdgeId::new(s)
}
fn v(s: &str) -> VertexId {
    VertexId::new(s)
}
fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

pub fn fr_structure() -> CausalStructure {
    let edges = [
        "U", "U'", "R", "R'", "R''", "A", "A'", "A''", "A'''", "S", "S'", "S''", "S'''", "B",
        "B'", "B''", "W", "W'",
    ];
    CausalStructure::from_vertex_lists(
        edges.iter().map(|s| e(s)).collect(),
        vec![
            VertexDecl { id: v("M_A"), inputs: vec![e("A"), e("R")], outputs: vec![e("A'"), e("R'")] },
            VertexDecl { id: v("P"), inputs: vec![e("A'"), e("S")], outputs: vec![e("A''"), e("S'")] },
            VertexDecl { id: v("M_B"), inputs: vec![e("B"), e("S'")], outputs: vec![e("B'"), e("S''")] },
            VertexDecl {
                id: v("M_U"),
                inputs: vec![e("U"), e("R'"), e("A''")],
                outputs: vec![e("U'"), e("R''"), e("A'''")],
            },
            VertexDecl {
                id: v("M_W"),
                inputs: vec![e("W"), e("S''"), e("B'")],
                outputs: vec![e("W'"), e("S'''"), e("B''")],
            },
        ],
    )
}

pub fn fr_dims() -> BTreeMap<EdgeId, usize> {
    let mut dims = BTreeMap::new();
    for name in ["R", "R'", "R''", "S", "S'", "S''", "S'''"] {
        dims.insert(e(name), 2);
    }
    for name in ["A", "A'", "A''", "A'''", "B", "B'", "B''", "U", "U'", "W", "W'"] {
        dims.insert(e(name), 3);
    }
    dims
}

/// The joint ± states (|00⟩ ± |11⟩)/√2 of a qubit and a pointer, laid out
/// row-major over (qubit, pointer).
fn joint_pm(pointer_dim: usize) -> (Vec<Complex64>, Vec<Complex64>) {
    let h = c(std::f64::consts::FRAC_1_SQRT_2);
    let dim = 2 * pointer_dim;
    let mut plus = vec![ZERO; dim];
    let mut minus = vec![ZERO; dim];
    plus[0] = h;
    minus[0] = h;
    plus[pointer_dim + 1] = h;
    minus[pointer_dim + 1] = -h;
    (plus, minus)
}

fn hadamard() -> CMat {
    let h = c(std::f64::consts::FRAC_1_SQRT_2);
    CMat::from_rows(vec![vec![h, h], vec![h, -h]])
}

fn computational_basis(dim: usize) -> Vec<Vec<Complex64>> {
    (0..dim)
        .map(|i| {
            let mut col = vec![ZERO; dim];
            col[i] = ONE;
            col
        })
        .collect()
}

/// Builds the five gates with the given completion strategy for the
/// unreached directions of the recording gates.
pub fn fr_gates(completion: Completion) -> BTreeMap<VertexId, CMat> {
    let record_qubit = |outcomes: &BTreeMap<usize, usize>| {
        make_recording_gate(3, 2, &computational_basis(2), outcomes, BLANK, completion)
            .expect("qubit recording gate")
    };
    let outcomes: BTreeMap<usize, usize> = [(0, 0), (1, 1)].into();
    let (plus, minus) = joint_pm(3);
    let record_joint = make_recording_gate(3, 6, &[plus, minus], &outcomes, BLANK, completion)
        .expect("joint recording gate");
    let prepare = make_controlled_gate(3, &[(1usize, hadamard())].into(), 2).expect("prepare gate");

    let mut gates = BTreeMap::new();
    gates.insert(v("M_A"), record_qubit(&outcomes));
    gates.insert(v("P"), prepare);
    gates.insert(v("M_B"), record_qubit(&outcomes));
    gates.insert(v("M_U"), record_joint.clone());
    gates.insert(v("M_W"), record_joint);
    gates
}

pub fn fr_initial_state() -> StateVector {
    let r = StateVector::single(e("R"), vec![c((1f64 / 3.0).sqrt()), c((2f64 / 3.0).sqrt())])
        .expect("qubit R state");
    let mut psi = r.tensor_product(&StateVector::basis(e("S"), 2, 0)).unwrap();
    for blank in ["U", "A", "B", "W"] {
        psi = psi.tensor_product(&StateVector::basis(e(blank), 3, BLANK)).unwrap();
    }
    psi
}

fn named_surfaces(g: &CausalStructure) -> BTreeMap<String, Surface> {
    let downsets: [(&str, &[&str]); 5] = [
        ("S0", &[]),
        ("S1", &["M_A", "P", "M_B", "M_U"]),
        ("S2", &["M_A", "P", "M_B"]),
        ("S3", &["M_A", "P", "M_B", "M_W"]),
        ("S4", &["M_A", "P", "M_B", "M_U", "M_W"]),
    ];
    downsets
        .into_iter()
        .map(|(name, fired)| {
            let set = fired.iter().map(|s| v(s)).collect();
            (name.to_string(), g.surface_for_downset(&set).expect("named downset"))
        })
        .collect()
}

pub fn fr_atoms() -> BTreeMap<String, Arc<AtomDef>> {
    let mk = |name: &str, edge: &str, index: usize| {
        (
            name.to_string(),
            Arc::new(AtomDef::new(name, Subspace::basis_state(e(edge), 3, index))),
        )
    };
    [
        mk("U_minus", "U'", MINUS),
        mk("B_1", "B'", 1),
        mk("A_1", "A''", 1),
        mk("W_minus", "W'", MINUS),
        mk("W_plus", "W'", PLUS),
    ]
    .into()
}

/// The deduction from the premises {U_minus & W_minus, U_minus -> B_1,
/// B_1 -> A_1, A_1 -> W_plus} to the conclusion W_plus & W_minus.
pub fn fr_deduction(atoms: &BTreeMap<String, Arc<AtomDef>>) -> Deduction {
    let a = |name: &str| Prop::Atom(Arc::clone(&atoms[name]));
    let and = |x: Prop, y: Prop| Prop::And(Box::new(x), Box::new(y));
    let premises = vec![
        and(a("U_minus"), a("W_minus")),
        Prop::implication(a("U_minus"), a("B_1")),
        Prop::implication(a("B_1"), a("A_1")),
        Prop::implication(a("A_1"), a("W_plus")),
    ];
    let steps = vec![
        Step { rule: Rule::ProjectLeft, from: vec![1], derived: a("U_minus") },
        Step { rule: Rule::ModusPonens, from: vec![5, 2], derived: a("B_1") },
        Step { rule: Rule::ModusPonens, from: vec![6, 3], derived: a("A_1") },
        Step { rule: Rule::ModusPonens, from: vec![7, 4], derived: a("W_plus") },
        Step { rule: Rule::ProjectRight, from: vec![1], derived: a("W_minus") },
        Step { rule: Rule::Conjoin, from: vec![8, 9], derived: and(a("W_plus"), a("W_minus")) },
    ];
    Deduction { premises, steps }
}

pub fn build_fr() -> FrScenario {
    build_fr_with(Completion::IndexOrder)
}

pub fn build_fr_with(completion: Completion) -> FrScenario {
    let structure = fr_structure();
    let circuit =
        CircuitAssignment::new(structure, fr_dims(), fr_gates(completion), fr_initial_state())
            .expect("the scenario circuit is valid");
    let surfaces = named_surfaces(circuit.structure());
    let atoms = fr_atoms();
    let deduction = fr_deduction(&atoms);
    FrScenario { circuit, surfaces, atoms, deduction }
}

/// The five reference surface states, constructed directly from their known
/// amplitudes (grouped ± bases expanded into the edge factors).
pub fn table1_expected() -> BTreeMap<String, StateVector> {
    let pair = |a: &str, da: usize, b: &str, db: usize, sign: f64| {
        let h = c(std::f64::consts::FRAC_1_SQRT_2);
        let mut amps = vec![ZERO; da * db];
        amps[0] = h;
        amps[db + 1] = h * c(sign);
        StateVector::new(vec![(e(a), da), (e(b), db)], amps).unwrap()
    };
    let basis = |name: &str, dim: usize, i: usize| StateVector::basis(e(name), dim, i);
    let prod = |parts: &[StateVector]| {
        parts[1..].iter().fold(parts[0].clone(), |acc, s| acc.tensor_product(s).unwrap())
    };
    let combo = |terms: &[(f64, StateVector)]| {
        let refs: Vec<(Complex64, &StateVector)> =
            terms.iter().map(|(w, s)| (c(*w), s)).collect();
        StateVector::linear_combination(&refs).unwrap()
    };

    let mut out = BTreeMap::new();
    out.insert("S0".to_string(), fr_initial_state());

    let s1_term = |u: usize, sign: f64, s: usize, b: usize| {
        prod(&[
            basis("U'", 3, u),
            pair("R''", 2, "A'''", 3, sign),
            basis("S''", 2, s),
            basis("B'", 3, b),
            basis("W", 3, BLANK),
        ])
    };
    out.insert(
        "S1".to_string(),
        combo(&[
            ((2f64 / 3.0).sqrt(), s1_term(PLUS, 1.0, 0, 0)),
            ((1f64 / 6.0).sqrt(), s1_term(PLUS, 1.0, 1, 1)),
            (-(1f64 / 6.0).sqrt(), s1_term(MINUS, -1.0, 1, 1)),
        ]),
    );

    let s2_term = |r: usize, a: usize, s: usize, b: usize| {
        prod(&[
            basis("U", 3, BLANK),
            basis("R'", 2, r),
            basis("A''", 3, a),
            basis("S''", 2, s),
            basis("B'", 3, b),
            basis("W", 3, BLANK),
        ])
    };
    let w3 = (1f64 / 3.0).sqrt();
    out.insert(
        "S2".to_string(),
        combo(&[(w3, s2_term(0, 0, 0, 0)), (w3, s2_term(1, 1, 0, 0)), (w3, s2_term(1, 1, 1, 1))]),
    );

    let s3_term = |r: usize, a: usize, sign: f64, w: usize| {
        prod(&[
            basis("U", 3, BLANK),
            basis("R'", 2, r),
            basis("A''", 3, a),
            pair("S'''", 2, "B''", 3, sign),
            basis("W'", 3, w),
        ])
    };
    out.insert(
        "S3".to_string(),
        combo(&[
            ((1f64 / 6.0).sqrt(), s3_term(0, 0, 1.0, PLUS)),
            ((1f64 / 6.0).sqrt(), s3_term(0, 0, -1.0, MINUS)),
            ((2f64 / 3.0).sqrt(), s3_term(1, 1, 1.0, PLUS)),
        ]),
    );

    let s4_term = |u: usize, ra: f64, sb: f64, w: usize| {
        prod(&[
            basis("U'", 3, u),
            pair("R''", 2, "A'''", 3, ra),
            pair("S'''", 2, "B''", 3, sb),
            basis("W'", 3, w),
        ])
    };
    out.insert(
        "S4".to_string(),
        combo(&[
            ((3f64 / 4.0).sqrt(), s4_term(PLUS, 1.0, 1.0, PLUS)),
            ((1f64 / 12.0).sqrt(), s4_term(PLUS, 1.0, -1.0, MINUS)),
            (-(1f64 / 12.0).sqrt(), s4_term(MINUS, -1.0, 1.0, PLUS)),
            ((1f64 / 12.0).sqrt(), s4_term(MINUS, -1.0, -1.0, MINUS)),
        ]),
    );
    out
}

/// The scenario as shippable files: the circuit with high-level gate
/// specifications (recording/controlled), the atom table, and the deduction
/// script. Loading these yields a workspace identical to the built-in one.
pub fn example_files() -> (String, String, String) {
    use crate::formats::atoms::atoms_to_file;
    use crate::formats::circuit::{
        cx, CircuitFile, EdgeEntry, GateSpec, InitialSpec, ProductFactor, VertexEntry,
    };
    use crate::formats::deduction_text::scripts_to_text;

    let structure = fr_structure();
    let dims = fr_dims();
    let edges = structure
        .edges()
        .iter()
        .map(|d| EdgeEntry { id: d.id.as_str().to_string(), dim: dims[&d.id] })
        .collect();

    let to_pairs = |vectors: &[Vec<Complex64>]| -> Vec<Vec<[f64; 2]>> {
        vectors.iter().map(|v| v.iter().map(|z| cx(*z)).collect()).collect()
    };
    let outcomes: BTreeMap<String, usize> = [("0".to_string(), 0), ("1".to_string(), 1)].into();
    let record_qubit = GateSpec::Recording {
        pointer_dim: 3,
        blank: BLANK,
        observed: to_pairs(&computational_basis(2)),
        outcomes: outcomes.clone(),
    };
    let (plus, minus) = joint_pm(3);
    let record_joint = GateSpec::Recording {
        pointer_dim: 3,
        blank: BLANK,
        observed: to_pairs(&[plus, minus]),
        outcomes,
    };
    let prepare = GateSpec::Controlled {
        cases: [("1".to_string(), GateSpec::Hadamard)].into(),
    };
    let gate_for = |id: &str| match id {
        "M_A" | "M_B" => record_qubit.clone(),
        "P" => prepare.clone(),
        _ => record_joint.clone(),
    };
    let vertices = structure
        .vertices()
        .iter()
        .map(|v| VertexEntry {
            id: v.id.as_str().to_string(),
            inputs: v.inputs.iter().map(|e| e.as_str().to_string()).collect(),
            outputs: v.outputs.iter().map(|e| e.as_str().to_string()).collect(),
            gate: gate_for(v.id.as_str()),
        })
        .collect();

    let initial = InitialSpec::Product {
        product: vec![
            ProductFactor {
                edge: "R".into(),
                amplitudes: vec![cx(c((1f64 / 3.0).sqrt())), cx(c((2f64 / 3.0).sqrt()))],
            },
            ProductFactor { edge: "S".into(), amplitudes: vec![[1.0, 0.0], [0.0, 0.0]] },
            ProductFactor {
                edge: "U".into(),
                amplitudes: vec![[0.0, 0.0], [0.0, 0.0], [1.0, 0.0]],
            },
            ProductFactor {
                edge: "A".into(),
                amplitudes: vec![[0.0, 0.0], [0.0, 0.0], [1.0, 0.0]],
            },
            ProductFactor {
                edge: "B".into(),
                amplitudes: vec![[0.0, 0.0], [0.0, 0.0], [1.0, 0.0]],
            },
            ProductFactor {
                edge: "W".into(),
                amplitudes: vec![[0.0, 0.0], [0.0, 0.0], [1.0, 0.0]],
            },
        ],
    };
    let surfaces = named_surfaces(&structure)
        .into_iter()
        .map(|(name, s)| (name, s.fired().iter().map(|v| v.as_str().to_string()).collect()))
        .collect();
    let circuit_file = CircuitFile { edges, vertices, initial, surfaces };

    let atoms_file = atoms_to_file(&fr_atoms());
    let atoms = fr_atoms();
    let deductions: BTreeMap<String, Deduction> =
        [("fr".to_string(), fr_deduction(&atoms))].into();
    (circuit_file.to_json(), atoms_file.to_json(), scripts_to_text(&deductions))
}

impl FrScenario {
    /// Fidelity of each computed surface state against its reference
    /// amplitudes.
    pub fn verify_table1(&self) -> Vec<(String, f64)> {
        let expected = table1_expected();
        expected
            .into_iter()
            .map(|(name, reference)| {
                let surface = &self.surfaces[&name];
                let computed = self.circuit.state_on_surface(surface).expect("named surface");
                let fidelity = computed.fidelity(&reference).expect("matching factors");
                (name, fidelity)
            })
            .collect()
    }

    /// Probabilities of the four (U', W') ± outcome pairs on the final
    /// surface.
    pub fn born_weights(&self) -> [f64; 4] {
        let psi = self.circuit.state_on_surface(&self.surfaces["S4"]).unwrap();
        let rho = psi.reduced_density(&[e("U'"), e("W'")]).unwrap();
        // (U', W') row-major with dims (3, 3).
        let p = |u: usize, w: usize| rho.matrix()[(u * 3 + w, u * 3 + w)].re;
        [p(PLUS, PLUS), p(PLUS, MINUS), p(MINUS, PLUS), p(MINUS, MINUS)]
    }

    /// The chained inference: condition Ursula on minus, walk the relative
    /// states through Bob and Alice to Wigner.
    pub fn run_argument1(&self) -> ChainResult {
        let input = StateVector::basis(e("U'"), 3, MINUS);
        chain(&self.circuit, &[e("U'"), e("B'"), e("A''"), e("W'")], &input, PURE_TOL)
            .expect("chain edges share surfaces pairwise")
    }

    /// The direct inference on the final surface.
    pub fn run_argument2(&self) -> DensityOperator {
        let q = RelStateQuery::new(e("U'"), e("W'"), StateVector::basis(e("U'"), 3, MINUS))
            .expect("input on U'");
        relative_state(&self.circuit, &q)
            .expect("U' and W' share the final surface")
            .expect("the minus branch has positive weight")
    }

    /// Rule-checks the deduction and valuates premises and conclusion.
    pub fn run_fr_deduction(
        &self,
    ) -> (crate::qlogic::DeductionReport, crate::qlogic::SoundnessAssessment) {
        let report = crate::qlogic::check_deduction(&self.deduction, self.circuit.structure());
        let assessment = crate::qlogic::assess_soundness(&self.deduction, &self.circuit)
            .expect("well-formed deduction");
        (report, assessment)
    }
}
