//! The circuit file: edges with dimensions, vertices with ordered ports and
//! gate specifications, the initial state, and optional surface names.
//! Complex numbers are `[re, im]` pairs; matrices are row-major; amplitude
//! vectors are row-major over the factor order they are declared with.

use super::{from_serde_json, ParseError};
use crate::assignment::{
    make_controlled_gate, make_recording_gate, CircuitAssignment, Completion,
};
use crate::causal::{CausalStructure, EdgeId, Surface, VertexDecl, VertexId};
use crate::linalg::CMat;
use crate::tensor::StateVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

pub type Cx = [f64; 2];

pub fn cx(z: Complex64) -> Cx {
    [z.re, z.im]
}

pub fn un_cx(p: Cx) -> Complex64 {
    Complex64::new(p[0], p[1])
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct EdgeEntry {
    pub id: String,
    pub dim: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GateSpec {
    /// Explicit unitary, row-major over the vertex input order.
    Matrix { matrix: Vec<Vec<Cx>> },
    /// Measurement-style gate: the first input edge is the pointer, the rest
    /// form the observed system. `observed` lists (possibly partially) an
    /// orthonormal basis of the observed space; `outcomes` maps listed basis
    /// indices to pointer basis indices; unlisted directions leave the
    /// pointer at `blank`.
    Recording {
        pointer_dim: usize,
        blank: usize,
        observed: Vec<Vec<Cx>>,
        outcomes: BTreeMap<String, usize>,
    },
    /// Block-diagonal controlled gate: the first input edge is the control;
    /// `cases` maps control basis indices to gates on the remaining inputs.
    Controlled { cases: BTreeMap<String, GateSpec> },
    Hadamard,
    Identity,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct VertexEntry {
    pub id: String,
    #[serde(rename = "in")]
    pub inputs: Vec<String>,
    #[serde(rename = "out")]
    pub outputs: Vec<String>,
    pub gate: GateSpec,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ProductFactor {
    pub edge: String,
    pub amplitudes: Vec<Cx>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(untagged, deny_unknown_fields)]
pub enum InitialSpec {
    /// Product of single-edge states.
    Product { product: Vec<ProductFactor> },
    /// Joint amplitudes, row-major over the initial surface's edges in
    /// canonical (lexicographic) order.
    Joint { joint: Vec<Cx> },
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct CircuitFile {
    pub edges: Vec<EdgeEntry>,
    pub vertices: Vec<VertexEntry>,
    pub initial: InitialSpec,
    /// Optional user-assigned surface names, each a fired-vertex set.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub surfaces: BTreeMap<String, Vec<String>>,
}

impl CircuitFile {
    pub fn from_json(src: &str) -> Result<Self, ParseError> {
        serde_json::from_str(src).map_err(|e| from_serde_json(&e))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("circuit file serializes")
    }

    /// Builds the assignment and resolves surface names. Semantic failures
    /// (unknown edges, dimension conditions, non-unitary gates, bad initial
    /// state, bad surface names) come back as strings for the caller to wrap
    /// as validation errors.
    pub fn build(&self) -> Result<(CircuitAssignment, BTreeMap<String, Surface>), String> {
        let mut dims: BTreeMap<EdgeId, usize> = BTreeMap::new();
        for e in &self.edges {
            if dims.insert(EdgeId::new(&e.id), e.dim).is_some() {
                return Err(format!("duplicate edge id {}", e.id));
            }
        }
        let edge_ids: Vec<EdgeId> = self.edges.iter().map(|e| EdgeId::new(&e.id)).collect();
        let vertices: Vec<VertexDecl> = self
            .vertices
            .iter()
            .map(|v| VertexDecl {
                id: VertexId::new(&v.id),
                inputs: v.inputs.iter().map(EdgeId::new).collect(),
                outputs: v.outputs.iter().map(EdgeId::new).collect(),
            })
            .collect();
        let structure = CausalStructure::from_vertex_lists(edge_ids, vertices);
        let report = structure.validate();
        if !report.is_ok() {
            return Err(format!("invalid causal structure:\n{report}"));
        }

        let mut gates: BTreeMap<VertexId, CMat> = BTreeMap::new();
        for v in &self.vertices {
            let in_dims: Vec<usize> = v
                .inputs
                .iter()
                .map(|e| dims.get(&EdgeId::new(e)).copied().ok_or_else(|| format!("vertex {}: unknown input edge {e}", v.id)))
                .collect::<Result<_, _>>()?;
            let gate = build_gate(&v.gate, &in_dims)
                .map_err(|msg| format!("vertex {}: {msg}", v.id))?;
            gates.insert(VertexId::new(&v.id), gate);
        }

        let initial = self.build_initial(&structure, &dims)?;
        let circuit = CircuitAssignment::new(structure, dims, gates, initial)
            .map_err(|e| e.to_string())?;

        let mut named = BTreeMap::new();
        for (name, fired) in &self.surfaces {
            let set: BTreeSet<VertexId> = fired.iter().map(VertexId::new).collect();
            let surface = circuit
                .structure()
                .surface_for_downset(&set)
                .map_err(|e| format!("surface {name}: {e}"))?;
            named.insert(name.clone(), surface);
        }
        Ok((circuit, named))
    }

    fn build_initial(
        &self,
        structure: &CausalStructure,
        dims: &BTreeMap<EdgeId, usize>,
    ) -> Result<StateVector, String> {
        let s0 = structure.initial_surface();
        match &self.initial {
            InitialSpec::Product { product } => {
                let mut state: Option<StateVector> = None;
                for f in product {
                    let id = EdgeId::new(&f.edge);
                    if !s0.contains_edge(&id) {
                        return Err(format!(
                            "initial product factor {} is not on the initial surface",
                            f.edge
                        ));
                    }
                    let amps: Vec<Complex64> = f.amplitudes.iter().map(|p| un_cx(*p)).collect();
                    let single =
                        StateVector::single(id, amps).map_err(|e| format!("initial factor {}: {e}", f.edge))?;
                    state = Some(match state {
                        None => single,
                        Some(acc) => acc
                            .tensor_product(&single)
                            .map_err(|e| format!("initial factor {}: {e}", f.edge))?,
                    });
                }
                let state = state.ok_or("initial product state has no factors")?;
                if state.labels().len() != s0.edges().len() {
                    return Err("initial product state does not cover the initial surface".into());
                }
                Ok(state)
            }
            InitialSpec::Joint { joint } => {
                let factors: Vec<(EdgeId, usize)> =
                    s0.edges().iter().map(|e| (e.clone(), dims[e])).collect();
                let amps: Vec<Complex64> = joint.iter().map(|p| un_cx(*p)).collect();
                StateVector::new(factors, amps).map_err(|e| format!("initial joint state: {e}"))
            }
        }
    }
}

fn parse_index_key(key: &str, what: &str) -> Result<usize, String> {
    key.parse::<usize>().map_err(|_| format!("{what} key {key:?} is not an index"))
}

fn build_gate(spec: &GateSpec, in_dims: &[usize]) -> Result<CMat, String> {
    let total: usize = in_dims.iter().product();
    match spec {
        GateSpec::Matrix { matrix } => {
            let n = matrix.len();
            if n != total {
                return Err(format!("matrix is {n}x{n}, inputs have dimension {total}"));
            }
            let rows: Vec<Vec<Complex64>> = matrix
                .iter()
                .map(|row| {
                    if row.len() != n {
                        return Err("matrix is not square".to_string());
                    }
                    Ok(row.iter().map(|p| un_cx(*p)).collect())
                })
                .collect::<Result<_, _>>()?;
            Ok(CMat::from_rows(rows))
        }
        GateSpec::Recording { pointer_dim, blank, observed, outcomes } => {
            if in_dims.is_empty() || in_dims[0] != *pointer_dim {
                return Err(format!(
                    "first input edge must carry the pointer dimension {pointer_dim}"
                ));
            }
            let observed_dim: usize = in_dims[1..].iter().product();
            let basis: Vec<Vec<Complex64>> = observed
                .iter()
                .map(|v| v.iter().map(|p| un_cx(*p)).collect())
                .collect();
            let mut outcome_index = BTreeMap::new();
            for (k, v) in outcomes {
                outcome_index.insert(parse_index_key(k, "outcome")?, *v);
            }
            make_recording_gate(
                *pointer_dim,
                observed_dim,
                &basis,
                &outcome_index,
                *blank,
                Completion::IndexOrder,
            )
            .map_err(|e| e.to_string())
        }
        GateSpec::Controlled { cases } => {
            if in_dims.len() < 2 {
                return Err("controlled gate needs a control edge and a target".into());
            }
            let control_dim = in_dims[0];
            let target_dims = &in_dims[1..];
            let target_dim: usize = target_dims.iter().product();
            let mut case_map = BTreeMap::new();
            for (k, sub) in cases {
                let index = parse_index_key(k, "case")?;
                let gate = build_gate(sub, target_dims)?;
                case_map.insert(index, gate);
            }
            make_controlled_gate(control_dim, &case_map, target_dim).map_err(|e| e.to_string())
        }
        GateSpec::Hadamard => {
            if total != 2 {
                return Err(format!("hadamard acts on dimension 2, inputs have {total}"));
            }
            let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
            Ok(CMat::from_rows(vec![vec![h, h], vec![h, -h]]))
        }
        GateSpec::Identity => Ok(CMat::identity(total)),
    }
}

/// Serializes a built assignment back to a file: explicit matrix gates, a
/// joint initial state, and the given surface names.
pub fn circuit_to_file(
    circuit: &CircuitAssignment,
    names: &BTreeMap<String, Surface>,
) -> CircuitFile {
    let edges = circuit
        .structure()
        .edges()
        .iter()
        .map(|e| EdgeEntry { id: e.id.as_str().to_string(), dim: circuit.dim(&e.id).unwrap() })
        .collect();
    let vertices = circuit
        .structure()
        .vertices()
        .iter()
        .map(|v| {
            let gate = circuit.gate(&v.id).unwrap();
            let matrix: Vec<Vec<Cx>> = (0..gate.rows())
                .map(|i| (0..gate.cols()).map(|j| cx(gate[(i, j)])).collect())
                .collect();
            VertexEntry {
                id: v.id.as_str().to_string(),
                inputs: v.inputs.iter().map(|e| e.as_str().to_string()).collect(),
                outputs: v.outputs.iter().map(|e| e.as_str().to_string()).collect(),
                gate: GateSpec::Matrix { matrix },
            }
        })
        .collect();
    let initial = InitialSpec::Joint {
        joint: circuit.initial_state().amplitudes().iter().map(|z| cx(*z)).collect(),
    };
    let surfaces = names
        .iter()
        .map(|(name, s)| {
            (name.clone(), s.fired().iter().map(|v| v.as_str().to_string()).collect())
        })
        .collect();
    CircuitFile { edges, vertices, initial, surfaces }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_circuit_file_builds() {
        let src = r#"{
            "edges": [{"id": "q", "dim": 2}, {"id": "q'", "dim": 2}],
            "vertices": [{"id": "H", "in": ["q"], "out": ["q'"], "gate": {"kind": "hadamard"}}],
            "initial": {"product": [{"edge": "q", "amplitudes": [[1, 0], [0, 0]]}]},
            "surfaces": {"start": [], "end": ["H"]}
        }"#;
        let file = CircuitFile::from_json(src).unwrap();
        let (circuit, names) = file.build().unwrap();
        assert_eq!(circuit.structure().edges().len(), 2);
        assert_eq!(names.len(), 2);
        let psi = circuit.state_on_surface(&names["end"]).unwrap();
        assert!((psi.amplitudes()[0].re - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn json_syntax_error_carries_position() {
        let err = CircuitFile::from_json("{\n  \"edges\": [,]\n}").unwrap_err();
        assert_eq!(err.line, 2);
        assert!(err.col > 0);
    }

    #[test]
    fn dimension_condition_violation_is_a_build_error() {
        let src = r#"{
            "edges": [{"id": "q", "dim": 2}, {"id": "q'", "dim": 3}],
            "vertices": [{"id": "H", "in": ["q"], "out": ["q'"], "gate": {"kind": "identity"}}],
            "initial": {"product": [{"edge": "q", "amplitudes": [[1, 0], [0, 0]]}]}
        }"#;
        let err = CircuitFile::from_json(src).unwrap().build().unwrap_err();
        assert!(err.contains("product of input dimensions"), "{err}");
    }

    #[test]
    fn non_unit_initial_state_is_rejected() {
        let src = r#"{
            "edges": [{"id": "q", "dim": 2}],
            "vertices": [],
            "initial": {"joint": [[1, 0], [1, 0]]}
        }"#;
        let err = CircuitFile::from_json(src).unwrap().build().unwrap_err();
        assert!(err.contains("normalized"), "{err}");
    }

    #[test]
    fn roundtrip_through_matrix_serialization() {
        let sc = crate::fr::build_fr();
        let file = circuit_to_file(&sc.circuit, &sc.surfaces);
        let json = file.to_json();
        let reparsed = CircuitFile::from_json(&json).unwrap();
        assert_eq!(file, reparsed);
        let (rebuilt, names) = reparsed.build().unwrap();
        assert_eq!(names.len(), 5);
        // Gate matrices survive the decimal round trip bit-for-bit.
        for v in sc.circuit.structure().vertices() {
            let a = sc.circuit.gate(&v.id).unwrap();
            let b = rebuilt.gate(&v.id).unwrap();
            assert_eq!(a.data(), b.data(), "gate {} changed", v.id);
        }
        assert_eq!(
            sc.circuit.initial_state().amplitudes(),
            rebuilt.initial_state().amplitudes()
        );
    }
}
