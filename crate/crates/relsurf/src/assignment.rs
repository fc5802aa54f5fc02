//! Binds Hilbert-space dimensions to edges and unitaries to vertices of a
//! causal structure, and produces the state on any spacelike surface by
//! evolving the initial state forward. Circuit-generated assignments are
//! consistent by construction: reduced density operators of any two surface
//! states agree on shared edges.

use crate::causal::{CausalStructure, EdgeId, Surface, ValidationReport, VertexId};
use crate::linalg::{self, CMat, ZERO};
use crate::tensor::{StateVector, TensorError, HERMITIAN_TOL};
use num_complex::Complex64;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::{Arc, Mutex};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AssignmentError {
    #[error("invalid causal structure:\n{0}")]
    InvalidStructure(ValidationReport),
    #[error("edge {0} has no dimension assigned")]
    MissingDim(EdgeId),
    #[error("vertex {0} has no gate assigned")]
    MissingGate(VertexId),
    #[error("vertex {vertex}: product of input dimensions ({inputs}) must equal product of output dimensions ({outputs})")]
    DimensionCondition { vertex: VertexId, inputs: usize, outputs: usize },
    #[error("vertex {vertex}: gate is {got}x{got}, expected {expected}x{expected}")]
    GateShape { vertex: VertexId, expected: usize, got: usize },
    #[error("vertex {vertex}: gate is not unitary (defect {defect:.3e})")]
    GateNotUnitary { vertex: VertexId, defect: f64 },
    #[error("initial state mismatch: {0}")]
    InitialState(String),
    #[error("unknown surface: {0}")]
    UnknownSurface(String),
    #[error(transparent)]
    Tensor(#[from] TensorError),
}

/// Deterministic strategy for filling in the unreached directions of a
/// partially specified gate. Both choices agree on every state the protocol
/// can actually reach.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Completion {
    #[default]
    IndexOrder,
    ReverseIndexOrder,
}

impl Completion {
    pub fn order(self, dim: usize) -> Vec<usize> {
        match self {
            Completion::IndexOrder => linalg::index_order(dim),
            Completion::ReverseIndexOrder => linalg::reverse_index_order(dim),
        }
    }
}

/// A measurement-style gate on pointer ⊗ observed system. Listed observed
/// basis states move the blank pointer to their outcome state; unlisted
/// directions leave the pointer blank; everything else is completed into a
/// unitary deterministically.
pub fn make_recording_gate(
    pointer_dim: usize,
    observed_dim: usize,
    observed_basis: &[Vec<Complex64>],
    outcome_index: &BTreeMap<usize, usize>,
    blank_index: usize,
    completion: Completion,
) -> Result<CMat, TensorError> {
    assert!(blank_index < pointer_dim, "blank index out of range");
    let mapped = outcome_index.len();
    if pointer_dim < mapped + 1 {
        return Err(TensorError::DimensionMismatch {
            context: "pointer dimension vs mapped outcomes".into(),
            expected: mapped + 1,
            got: pointer_dim,
        });
    }
    for (i, o) in outcome_index {
        if *i >= observed_basis.len() || *o >= pointer_dim {
            return Err(TensorError::DimensionMismatch {
                context: "outcome map index".into(),
                expected: observed_basis.len(),
                got: *i,
            });
        }
    }
    for chi in observed_basis {
        if chi.len() != observed_dim {
            return Err(TensorError::DimensionMismatch {
                context: "observed basis vector length".into(),
                expected: observed_dim,
                got: chi.len(),
            });
        }
    }

    let dim = pointer_dim * observed_dim;
    let embed = |pointer: usize, chi: &[Complex64]| -> Vec<Complex64> {
        let mut v = vec![ZERO; dim];
        for (i, z) in chi.iter().enumerate() {
            v[pointer * observed_dim + i] = *z;
        }
        v
    };

    let mut pairs: Vec<(Vec<Complex64>, Vec<Complex64>)> = Vec::new();
    for (i, chi) in observed_basis.iter().enumerate() {
        let out_pointer = outcome_index.get(&i).copied().unwrap_or(blank_index);
        pairs.push((embed(blank_index, chi), embed(out_pointer, chi)));
    }
    // Directions orthogonal to the listed states are unrecorded: the pointer
    // stays blank. This part of the action is specified, not a completion
    // choice, so it always uses the canonical index-order extension.
    let rest = linalg::extend_to_basis(observed_basis, observed_dim, &linalg::index_order(observed_dim));
    for chi in &rest {
        pairs.push((embed(blank_index, chi), embed(blank_index, chi)));
    }

    Ok(linalg::complete_unitary(&pairs, dim, &completion.order(dim))?)
}

/// A block-diagonal controlled gate on control ⊗ target: basis state |c⟩ of
/// the control applies `case_map[c]`, defaulting to the identity.
pub fn make_controlled_gate(
    control_dim: usize,
    case_map: &BTreeMap<usize, CMat>,
    target_dim: usize,
) -> Result<CMat, TensorError> {
    for (c, u) in case_map {
        if *c >= control_dim {
            return Err(TensorError::DimensionMismatch {
                context: "control case index".into(),
                expected: control_dim,
                got: *c,
            });
        }
        if !u.is_square() || u.rows() != target_dim {
            return Err(TensorError::DimensionMismatch {
                context: format!("case {c} unitary size"),
                expected: target_dim,
                got: u.rows(),
            });
        }
    }
    let dim = control_dim * target_dim;
    let mut out = CMat::zeros(dim, dim);
    let identity = CMat::identity(target_dim);
    for c in 0..control_dim {
        let block = case_map.get(&c).unwrap_or(&identity);
        for i in 0..target_dim {
            for j in 0..target_dim {
                out[(c * target_dim + i, c * target_dim + j)] = block[(i, j)];
            }
        }
    }
    Ok(out)
}

/// Outcome of a pairwise consistency check between two surface states.
#[derive(Clone, Debug)]
pub struct ConsistencyCheck {
    pub shared_edges: BTreeSet<EdgeId>,
    pub max_abs_diff: f64,
    pub consistent: bool,
}

/// A causal structure with dimensions, gates, and an initial state; induces
/// a state on every spacelike surface. Immutable after construction; the
/// per-surface state memo is lock-protected for concurrent readers.
pub struct CircuitAssignment {
    structure: CausalStructure,
    dims: BTreeMap<EdgeId, usize>,
    gates: BTreeMap<VertexId, CMat>,
    initial: StateVector,
    overrides: BTreeMap<BTreeSet<VertexId>, StateVector>,
    cache: Mutex<HashMap<BTreeSet<VertexId>, Arc<StateVector>>>,
}

impl Clone for CircuitAssignment {
    fn clone(&self) -> Self {
        CircuitAssignment {
            structure: self.structure.clone(),
            dims: self.dims.clone(),
            gates: self.gates.clone(),
            initial: self.initial.clone(),
            overrides: self.overrides.clone(),
            cache: Mutex::new(HashMap::new()),
        }
    }
}

impl std::fmt::Debug for CircuitAssignment {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CircuitAssignment")
            .field("edges", &self.structure.edges().len())
            .field("vertices", &self.structure.vertices().len())
            .finish()
    }
}

impl CircuitAssignment {
    pub fn new(
        structure: CausalStructure,
        dims: BTreeMap<EdgeId, usize>,
        gates: BTreeMap<VertexId, CMat>,
        initial: StateVector,
    ) -> Result<Self, AssignmentError> {
        let report = structure.validate();
        if !report.is_ok() {
            return Err(AssignmentError::InvalidStructure(report));
        }
        for e in structure.edges() {
            match dims.get(&e.id) {
                None | Some(0) => return Err(AssignmentError::MissingDim(e.id.clone())),
                Some(_) => {}
            }
        }
        for v in structure.vertices() {
            let gate = gates.get(&v.id).ok_or_else(|| AssignmentError::MissingGate(v.id.clone()))?;
            let inputs: usize = v.inputs.iter().map(|e| dims[e]).product();
            let outputs: usize = v.outputs.iter().map(|e| dims[e]).product();
            if inputs != outputs {
                return Err(AssignmentError::DimensionCondition {
                    vertex: v.id.clone(),
                    inputs,
                    outputs,
                });
            }
            if !gate.is_square() || gate.rows() != inputs {
                return Err(AssignmentError::GateShape {
                    vertex: v.id.clone(),
                    expected: inputs,
                    got: gate.rows(),
                });
            }
            let defect = gate.isometry_defect();
            if defect > HERMITIAN_TOL {
                return Err(AssignmentError::GateNotUnitary { vertex: v.id.clone(), defect });
            }
        }
        let s0 = structure.initial_surface();
        let expected: Vec<(EdgeId, usize)> =
            s0.edges().iter().map(|e| (e.clone(), dims[e])).collect();
        if initial.factors() != expected {
            return Err(AssignmentError::InitialState(format!(
                "initial state factors {:?} do not match the initial surface {:?}",
                initial.factors(),
                expected
            )));
        }
        Ok(CircuitAssignment {
            structure,
            dims,
            gates,
            initial,
            overrides: BTreeMap::new(),
            cache: Mutex::new(HashMap::new()),
        })
    }

    pub fn structure(&self) -> &CausalStructure {
        &self.structure
    }

    pub fn dim(&self, e: &EdgeId) -> Option<usize> {
        self.dims.get(e).copied()
    }

    pub fn dims(&self) -> &BTreeMap<EdgeId, usize> {
        &self.dims
    }

    pub fn gate(&self, v: &VertexId) -> Option<&CMat> {
        self.gates.get(v)
    }

    pub fn initial_state(&self) -> &StateVector {
        &self.initial
    }

    /// Hilbert-space dimension of a set of edges.
    pub fn space_dim(&self, edges: &BTreeSet<EdgeId>) -> usize {
        edges.iter().map(|e| self.dims.get(e).copied().unwrap_or(1)).product()
    }

    /// Hand-assigns a state to one surface, bypassing evolution. The result
    /// is generally *not* a consistent assignment; this exists so that
    /// consistency checking can be demonstrated to catch such mismatches.
    pub fn with_surface_override(
        mut self,
        surface: &Surface,
        state: StateVector,
    ) -> Result<Self, AssignmentError> {
        let expected: Vec<(EdgeId, usize)> =
            surface.edges().iter().map(|e| (e.clone(), self.dims[e])).collect();
        if state.factors() != expected {
            return Err(AssignmentError::InitialState(
                "override state factors do not match the surface".into(),
            ));
        }
        self.overrides.insert(surface.fired().clone(), state);
        self.cache.lock().unwrap().clear();
        Ok(self)
    }

    fn check_surface(&self, s: &Surface) -> Result<(), AssignmentError> {
        match self.structure.surface_for_downset(s.fired()) {
            Ok(expected) if &expected == s => Ok(()),
            _ => Err(AssignmentError::UnknownSurface(s.to_string())),
        }
    }

    /// The state on a surface: the initial state evolved through the
    /// canonical linearization of the surface's fired set (any linearization
    /// gives the same state). Memoized per downset.
    pub fn state_on_surface(&self, s: &Surface) -> Result<Arc<StateVector>, AssignmentError> {
        self.check_surface(s)?;
        if let Some(over) = self.overrides.get(s.fired()) {
            return Ok(Arc::new(over.clone()));
        }
        if let Some(hit) = self.cache.lock().unwrap().get(s.fired()) {
            return Ok(Arc::clone(hit));
        }
        let order = self
            .structure
            .canonical_linearization(s.fired())
            .map_err(|_| AssignmentError::UnknownSurface(s.to_string()))?;
        let state = self.evolve_through(&order)?;
        let state = Arc::new(state);
        self.cache.lock().unwrap().insert(s.fired().clone(), Arc::clone(&state));
        Ok(state)
    }

    /// Evolves the initial state through an explicit firing order.
    pub fn evolve_through(&self, order: &[VertexId]) -> Result<StateVector, AssignmentError> {
        let mut psi = self.initial.clone();
        for v in order {
            let decl = self
                .structure
                .vertex(v)
                .ok_or_else(|| AssignmentError::MissingGate(v.clone()))?;
            let gate = &self.gates[v];
            let out_factors: Vec<(EdgeId, usize)> =
                decl.outputs.iter().map(|e| (e.clone(), self.dims[e])).collect();
            psi = psi.apply_on_factors(gate, &decl.inputs, &out_factors)?;
        }
        Ok(psi)
    }

    /// Do two surface states have identical reduced density operators on
    /// their shared edges (entrywise within 1e-9)?
    pub fn check_consistency(&self, s1: &Surface, s2: &Surface) -> Result<ConsistencyCheck, AssignmentError> {
        let shared: BTreeSet<EdgeId> = s1.edges().intersection(s2.edges()).cloned().collect();
        if shared.is_empty() {
            return Ok(ConsistencyCheck { shared_edges: shared, max_abs_diff: 0.0, consistent: true });
        }
        let keep: Vec<EdgeId> = shared.iter().cloned().collect();
        let rho1 = self.state_on_surface(s1)?.reduced_density(&keep)?;
        let rho2 = self.state_on_surface(s2)?.reduced_density(&keep)?;
        let diff = rho1.max_abs_diff(&rho2)?;
        Ok(ConsistencyCheck { shared_edges: shared, max_abs_diff: diff, consistent: diff < 1e-9 })
    }
}
