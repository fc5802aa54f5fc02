//! The relative-state map between edges of a consistent assignment: condition
//! the state of a surface containing both edges on an input vector at the
//! source edge, trace down to the target edge, and normalize. Chains iterate
//! the map through intermediate edges, converting each link's output back to
//! a pure vector; the single-surface check compares a chain against the
//! direct map on one fixed surface.

use crate::assignment::{AssignmentError, CircuitAssignment};
use crate::causal::{EdgeId, Surface};
use crate::tensor::{DensityOperator, StateVector};
use thiserror::Error;

/// Conditioned branches with squared weight below this are undefined (the
/// relative-state map is partial).
pub const DEFINED_TOL: f64 = 1e-12;

/// Purity and agreement threshold for chain intermediates and theorem checks.
pub const PURE_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum RelStateError {
    #[error("no spacelike surface contains both {from} and {to} (link {link})")]
    NoCommonSurface { from: EdgeId, to: EdgeId, link: usize },
    #[error("input state must live on edge {expected}, found factors on {got:?}")]
    InputEdge { expected: EdgeId, got: Vec<EdgeId> },
    #[error("chain needs at least two edges")]
    TooShort,
    #[error(transparent)]
    Assignment(#[from] AssignmentError),
    #[error("tensor error: {0}")]
    Tensor(#[from] crate::tensor::TensorError),
}

/// A source edge, a target edge, and an input vector on the source.
#[derive(Clone, Debug)]
pub struct RelStateQuery {
    pub edge_from: EdgeId,
    pub edge_to: EdgeId,
    pub input: StateVector,
}

impl RelStateQuery {
    pub fn new(edge_from: EdgeId, edge_to: EdgeId, input: StateVector) -> Result<Self, RelStateError> {
        if input.labels() != std::slice::from_ref(&edge_from) {
            return Err(RelStateError::InputEdge {
                expected: edge_from,
                got: input.labels().to_vec(),
            });
        }
        Ok(RelStateQuery { edge_from, edge_to, input })
    }
}

/// The relative state computed on an explicit surface containing both edges:
/// normalize tr_{S∖{A,B}} [(⟨φ|_A ⊗ 1)|Ψ_S⟩⟨Ψ_S|(|φ⟩_A ⊗ 1)], or `None` when
/// the conditioned branch weight is below [`DEFINED_TOL`].
pub fn relative_state_on(
    c: &CircuitAssignment,
    surface: &Surface,
    q: &RelStateQuery,
) -> Result<Option<DensityOperator>, RelStateError> {
    let psi = c.state_on_surface(surface)?;
    let (rest, amps) = psi.contract_factor(&q.edge_from, q.input.amplitudes())?;
    let weight: f64 = amps.iter().map(|z| z.norm_sqr()).sum();
    if weight < DEFINED_TOL {
        return Ok(None);
    }
    let scale = num_complex::Complex64::new(1.0 / weight.sqrt(), 0.0);
    let normalized: Vec<num_complex::Complex64> = amps.iter().map(|z| z * scale).collect();
    let conditioned = StateVector::new(rest, normalized)?;
    Ok(Some(conditioned.reduced_density(std::slice::from_ref(&q.edge_to))?))
}

/// Picks the containing surface with the lexicographically least fired set
/// (the choice does not affect the result; see the surface-independence
/// property tests).
pub fn containing_surface(
    c: &CircuitAssignment,
    from: &EdgeId,
    to: &EdgeId,
    link: usize,
) -> Result<Surface, RelStateError> {
    let required = [from.clone(), to.clone()].into_iter().collect();
    c.structure()
        .surface_containing(&required)
        .map_err(|e| RelStateError::Assignment(AssignmentError::UnknownSurface(e.to_string())))?
        .ok_or_else(|| RelStateError::NoCommonSurface { from: from.clone(), to: to.clone(), link })
}

/// The relative-state map on some surface containing both query edges.
pub fn relative_state(
    c: &CircuitAssignment,
    q: &RelStateQuery,
) -> Result<Option<DensityOperator>, RelStateError> {
    let surface = containing_surface(c, &q.edge_from, &q.edge_to, 1)?;
    relative_state_on(c, &surface, q)
}

/// One link of an executed chain.
#[derive(Clone, Debug)]
pub struct ChainLink {
    pub from: EdgeId,
    pub to: EdgeId,
    pub surface: Surface,
    pub input: StateVector,
    pub density: Option<DensityOperator>,
    /// Largest eigenvalue of the link output (1 for pure), when defined.
    pub purity: Option<f64>,
    /// The output as a pure vector, when it is pure within [`PURE_TOL`].
    pub pure: Option<StateVector>,
}

/// How a chain ended.
#[derive(Clone, Debug)]
pub enum ChainOutcome {
    /// Every link defined and pure; the final pure state on the last edge.
    Pure(StateVector),
    /// Link `at` (1-based) produced a mixed state; chaining stopped there.
    MixedAt { at: usize, density: DensityOperator },
    /// Link `at` (1-based) conditioned on a zero-weight branch.
    UndefinedAt { at: usize },
}

#[derive(Clone, Debug)]
pub struct ChainResult {
    pub links: Vec<ChainLink>,
    pub outcome: ChainOutcome,
}

impl ChainResult {
    pub fn final_pure(&self) -> Option<&StateVector> {
        match &self.outcome {
            ChainOutcome::Pure(s) => Some(s),
            _ => None,
        }
    }
}

/// Iterates the relative-state map along `edges`, converting each link's
/// output back to a pure vector. Each consecutive pair is computed on its
/// own containing surface (erroring with the failing pair if none exists);
/// a mixed or undefined link stops the chain and is recorded in the outcome.
pub fn chain(
    c: &CircuitAssignment,
    edges: &[EdgeId],
    input: &StateVector,
    tol: f64,
) -> Result<ChainResult, RelStateError> {
    if edges.len() < 2 {
        return Err(RelStateError::TooShort);
    }
    let mut links = Vec::with_capacity(edges.len() - 1);
    let mut current = input.clone();
    for (i, pair) in edges.windows(2).enumerate() {
        let link_no = i + 1;
        let (from, to) = (&pair[0], &pair[1]);
        let surface = containing_surface(c, from, to, link_no)?;
        let q = RelStateQuery::new(from.clone(), to.clone(), current.clone())?;
        let density = relative_state_on(c, &surface, &q)?;
        match density {
            None => {
                links.push(ChainLink {
                    from: from.clone(),
                    to: to.clone(),
                    surface,
                    input: current,
                    density: None,
                    purity: None,
                    pure: None,
                });
                return Ok(ChainResult { links, outcome: ChainOutcome::UndefinedAt { at: link_no } });
            }
            Some(rho) => {
                let (top, _) = rho.top_eigenpair();
                let pure = rho.as_pure(tol);
                links.push(ChainLink {
                    from: from.clone(),
                    to: to.clone(),
                    surface,
                    input: current.clone(),
                    density: Some(rho.clone()),
                    purity: Some(top),
                    pure: pure.clone(),
                });
                match pure {
                    Some(next) => current = next,
                    None => {
                        return Ok(ChainResult {
                            links,
                            outcome: ChainOutcome::MixedAt { at: link_no, density: rho },
                        });
                    }
                }
            }
        }
    }
    Ok(ChainResult { links, outcome: ChainOutcome::Pure(current) })
}

/// Verdict of the single-surface chain-vs-direct comparison.
#[derive(Clone, Debug)]
pub enum TheoremCheck {
    /// Chain defined and pure, and it equals the direct relative state.
    Holds,
    /// Chain undefined or mixed somewhere; nothing to compare.
    NotApplicable { reason: String },
    /// Chain defined and pure but different from the direct map. Must never
    /// happen for a valid assignment.
    Violated { fidelity: f64 },
}

/// Computes the chained and the direct relative state entirely on one
/// surface containing every chain edge, and compares them.
pub fn verify_single_surface_theorem(
    c: &CircuitAssignment,
    surface: &Surface,
    edges: &[EdgeId],
    input: &StateVector,
) -> Result<TheoremCheck, RelStateError> {
    if edges.len() < 2 {
        return Err(RelStateError::TooShort);
    }
    for e in edges {
        if !surface.contains_edge(e) {
            return Err(RelStateError::NoCommonSurface {
                from: e.clone(),
                to: e.clone(),
                link: 0,
            });
        }
    }
    let mut current = input.clone();
    for (i, pair) in edges.windows(2).enumerate() {
        let q = RelStateQuery::new(pair[0].clone(), pair[1].clone(), current)?;
        match relative_state_on(c, surface, &q)? {
            None => {
                return Ok(TheoremCheck::NotApplicable {
                    reason: format!("link {} undefined", i + 1),
                })
            }
            Some(rho) => match rho.as_pure(PURE_TOL) {
                Some(next) => current = next,
                None => {
                    return Ok(TheoremCheck::NotApplicable {
                        reason: format!("link {} mixed", i + 1),
                    })
                }
            },
        }
    }
    let direct = RelStateQuery::new(edges[0].clone(), edges[edges.len() - 1].clone(), input.clone())?;
    let rho = relative_state_on(c, surface, &direct)?
        .expect("direct map defined whenever the first link is");
    let fidelity = rho.fidelity_with_pure(&current)?;
    if fidelity >= 1.0 - PURE_TOL {
        Ok(TheoremCheck::Holds)
    } else {
        Ok(TheoremCheck::Violated { fidelity })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::causal::CausalStructure;
    use crate::linalg;
    use crate::random;
    use crate::tensor::StateVector;
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::collections::BTreeMap;

    fn e(s: &str) -> EdgeId {
        EdgeId::new(s)
    }
    fn c64(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    /// A structure with no vertices: one surface holding all edges.
    fn bare_assignment(state: StateVector) -> CircuitAssignment {
        let edges: Vec<EdgeId> = state.labels().to_vec();
        let dims: BTreeMap<EdgeId, usize> =
            state.factors().into_iter().collect();
        let g = CausalStructure::from_vertex_lists(edges, vec![]);
        CircuitAssignment::new(g, dims, BTreeMap::new(), state).unwrap()
    }

    #[test]
    fn conditioning_a_product_state_gives_the_marginal() {
        let mut rng = ChaCha8Rng::seed_from_u64(71);
        let a = random::random_unit_vector(2, &mut rng);
        let b = random::random_unit_vector(3, &mut rng);
        let psi = StateVector::single(e("a"), a.clone())
            .unwrap()
            .tensor_product(&StateVector::single(e("b"), b.clone()).unwrap())
            .unwrap();
        let circuit = bare_assignment(psi);
        // Any input with nonzero overlap works; use a basis vector.
        let q = RelStateQuery::new(e("a"), e("b"), StateVector::basis(e("a"), 2, 0)).unwrap();
        let rho = relative_state(&circuit, &q).unwrap().unwrap();
        let marginal = StateVector::single(e("b"), b).unwrap();
        assert!((rho.fidelity_with_pure(&marginal).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn zero_overlap_branch_is_undefined() {
        let psi = StateVector::basis(e("a"), 2, 0)
            .tensor_product(&StateVector::basis(e("b"), 2, 0))
            .unwrap();
        let circuit = bare_assignment(psi);
        let q = RelStateQuery::new(e("a"), e("b"), StateVector::basis(e("a"), 2, 1)).unwrap();
        assert!(relative_state(&circuit, &q).unwrap().is_none());
    }

    #[test]
    fn chain_of_two_edges_matches_relative_state() {
        let mut rng = ChaCha8Rng::seed_from_u64(72);
        let psi = random::random_state(vec![(e("a"), 2), (e("b"), 3)], &mut rng);
        let circuit = bare_assignment(psi);
        let input = StateVector::basis(e("a"), 2, 0);
        let q = RelStateQuery::new(e("a"), e("b"), input.clone()).unwrap();
        let direct = relative_state(&circuit, &q).unwrap().unwrap();
        let res = chain(&circuit, &[e("a"), e("b")], &input, PURE_TOL).unwrap();
        let link_rho = res.links[0].density.as_ref().unwrap();
        assert!(direct.max_abs_diff(link_rho).unwrap() < 1e-12);
        match &res.outcome {
            ChainOutcome::Pure(_) | ChainOutcome::MixedAt { .. } => {}
            other => panic!("unexpected outcome {other:?}"),
        }
    }

    #[test]
    fn chain_reports_missing_common_surface_with_link_index() {
        // a -> (vertex) -> b: the two segments never share a surface.
        use crate::causal::{VertexDecl, VertexId};
        let g = CausalStructure::from_vertex_lists(
            vec![e("a"), e("b")],
            vec![VertexDecl {
                id: VertexId::new("v"),
                inputs: vec![e("a")],
                outputs: vec![e("b")],
            }],
        );
        let dims: BTreeMap<EdgeId, usize> = [(e("a"), 2), (e("b"), 2)].into();
        let gates: BTreeMap<VertexId, crate::linalg::CMat> =
            [(VertexId::new("v"), crate::linalg::CMat::identity(2))].into();
        let circuit =
            CircuitAssignment::new(g, dims, gates, StateVector::basis(e("a"), 2, 0)).unwrap();
        let input = StateVector::basis(e("a"), 2, 0);
        match chain(&circuit, &[e("a"), e("b")], &input, PURE_TOL) {
            Err(RelStateError::NoCommonSurface { link, .. }) => assert_eq!(link, 1),
            other => panic!("expected NoCommonSurface, got {other:?}"),
        }
    }

    #[test]
    fn surface_independence_of_relative_state() {
        let mut rng = ChaCha8Rng::seed_from_u64(73);
        let mut checked = 0;
        while checked < 20 {
            let circuit = random::random_circuit(3, random::InitialKind::Generic, &mut rng);
            let surfaces = circuit.structure().enumerate_surfaces();
            let edges: Vec<EdgeId> =
                circuit.structure().edges().iter().map(|d| d.id.clone()).collect();
            // Find a pair of edges contained in at least two surfaces.
            let mut found = None;
            'outer: for a in &edges {
                for b in &edges {
                    if a >= b {
                        continue;
                    }
                    let hosts: Vec<&Surface> = surfaces
                        .iter()
                        .filter(|s| s.contains_edge(a) && s.contains_edge(b))
                        .collect();
                    if hosts.len() >= 2 {
                        found = Some((a.clone(), b.clone()));
                        break 'outer;
                    }
                }
            }
            let Some((a, b)) = found else { continue };
            let dim_a = circuit.dim(&a).unwrap();
            let input =
                StateVector::single(a.clone(), random::random_unit_vector(dim_a, &mut rng))
                    .unwrap();
            let q = RelStateQuery::new(a.clone(), b.clone(), input).unwrap();
            let hosts: Vec<Surface> = surfaces
                .iter()
                .filter(|s| s.contains_edge(&a) && s.contains_edge(&b))
                .cloned()
                .collect();
            let results: Vec<Option<DensityOperator>> = hosts
                .iter()
                .map(|s| relative_state_on(&circuit, s, &q).unwrap())
                .collect();
            for pair in results.windows(2) {
                match (&pair[0], &pair[1]) {
                    (Some(x), Some(y)) => assert!(x.max_abs_diff(y).unwrap() < 1e-10),
                    (None, None) => {}
                    _ => panic!("definedness differs across surfaces"),
                }
            }
            checked += 1;
        }
    }

    #[test]
    fn classical_conditionals_match_probability_oracle() {
        // Purified joint distribution: Σ √p(x,y) |x⟩_a |y⟩_b |x,y⟩_env has
        // relative states that are exactly the classical conditionals.
        let mut rng = ChaCha8Rng::seed_from_u64(74);
        for _ in 0..10 {
            let (da, db) = (2usize, 3usize);
            let mut p = vec![0.0; da * db];
            let mut total = 0.0;
            for w in p.iter_mut() {
                *w = rng.gen::<f64>();
                total += *w;
            }
            for w in p.iter_mut() {
                *w /= total;
            }
            let mut amps = vec![Complex64::new(0.0, 0.0); da * db * da * db];
            for x in 0..da {
                for y in 0..db {
                    // env index mirrors (x, y)
                    let env = x * db + y;
                    amps[(x * db + y) * (da * db) + env] = c64(p[x * db + y].sqrt());
                }
            }
            let psi = StateVector::new(
                vec![(e("a"), da), (e("b"), db), (e("env"), da * db)],
                amps,
            )
            .unwrap();
            let circuit = bare_assignment(psi);
            for x in 0..da {
                let px: f64 = (0..db).map(|y| p[x * db + y]).sum();
                let q =
                    RelStateQuery::new(e("a"), e("b"), StateVector::basis(e("a"), da, x)).unwrap();
                let rho = relative_state(&circuit, &q).unwrap();
                if px < 1e-12 {
                    assert!(rho.is_none());
                    continue;
                }
                let rho = rho.unwrap();
                for y in 0..db {
                    let expect = p[x * db + y] / px;
                    assert!(
                        (rho.matrix()[(y, y)].re - expect).abs() < 1e-10,
                        "conditional mismatch"
                    );
                    for y2 in 0..db {
                        if y2 != y {
                            assert!(rho.matrix()[(y, y2)].norm() < 1e-10);
                        }
                    }
                }
            }
        }
    }

    /// Randomized single-surface instances: bare six-edge states. Product and
    /// branch-structured states exercise the defined-and-pure path; generic
    /// states mostly produce mixed links. No instance may ever be Violated.
    #[test]
    fn single_surface_chains_never_violate_direct_map() {
        let mut rng = ChaCha8Rng::seed_from_u64(random::seed_from_env());
        let mut holds = 0;
        let mut not_applicable = 0;
        for trial in 0..200 {
            let dims: Vec<usize> = (0..6).map(|_| if rng.gen_bool(0.5) { 2 } else { 3 }).collect();
            let factors: Vec<(EdgeId, usize)> =
                dims.iter().enumerate().map(|(i, d)| (e(&format!("e{i}")), *d)).collect();
            let style = trial % 3;
            let psi = match style {
                0 => random::random_state(factors.clone(), &mut rng),
                1 => random::random_product_state(&factors, &mut rng),
                _ => {
                    // Branch state: α|φ1..φ6⟩ + β|φ1⊥ χ2..χ6⟩.
                    let heads: Vec<Vec<Complex64>> =
                        factors.iter().map(|(_, d)| random::random_unit_vector(*d, &mut rng)).collect();
                    let mut prod1: Option<StateVector> = None;
                    let mut prod2: Option<StateVector> = None;
                    for (i, (l, d)) in factors.iter().enumerate() {
                        let s1 = StateVector::single(l.clone(), heads[i].clone()).unwrap();
                        let alt = if i == 0 {
                            // Orthogonal direction on the first edge.
                            let basis = linalg::extend_to_basis(
                                &[heads[0].clone()],
                                *d,
                                &linalg::index_order(*d),
                            );
                            basis[0].clone()
                        } else {
                            random::random_unit_vector(*d, &mut rng)
                        };
                        let s2 = StateVector::single(l.clone(), alt).unwrap();
                        prod1 = Some(match prod1 {
                            None => s1,
                            Some(p) => p.tensor_product(&s1).unwrap(),
                        });
                        prod2 = Some(match prod2 {
                            None => s2,
                            Some(p) => p.tensor_product(&s2).unwrap(),
                        });
                    }
                    let alpha = rng.gen_range(0.2..0.9f64);
                    let beta = (1.0 - alpha * alpha).sqrt();
                    StateVector::linear_combination(&[
                        (c64(alpha), &prod1.unwrap()),
                        (c64(beta), &prod2.unwrap()),
                    ])
                    .unwrap()
                }
            };
            let first_edge_state: Vec<Complex64> = match style {
                // For product/branch states, condition on the actual head so
                // the chain is defined and pure.
                0 => random::random_unit_vector(dims[0], &mut rng),
                _ => {
                    // Recover the head as the top eigenvector of the marginal.
                    let rho = psi.reduced_density(&[e("e0")]).unwrap();
                    rho.top_eigenpair().1
                }
            };
            let circuit = bare_assignment(psi);
            let surface = circuit.structure().initial_surface();
            let len = rng.gen_range(3..=5usize);
            let mut edges: Vec<EdgeId> = (0..6).map(|i| e(&format!("e{i}"))).collect();
            // Keep e0 first (the conditioned head), shuffle the rest.
            for i in (2..6).rev() {
                let j = rng.gen_range(1..=i);
                edges.swap(i, j);
            }
            edges.truncate(len);
            let input = StateVector::single(e("e0"), first_edge_state).unwrap();
            match verify_single_surface_theorem(&circuit, &surface, &edges, &input).unwrap() {
                TheoremCheck::Holds => holds += 1,
                TheoremCheck::NotApplicable { .. } => not_applicable += 1,
                TheoremCheck::Violated { fidelity } => {
                    panic!("violated at trial {trial} with fidelity {fidelity}")
                }
            }
        }
        assert!(holds > 0, "suite never exercised the defined-and-pure path");
        assert!(not_applicable > 0, "suite never exercised the mixed path");
    }
}
