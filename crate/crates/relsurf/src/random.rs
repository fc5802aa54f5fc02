//! Seeded random generators for the property suites: Haar-ish unitaries,
//! random states and subspaces, and random small circuits on random causal
//! structures. Everything is driven by `ChaCha8Rng`, so runs are reproducible;
//! the `RELSURF_SEED` environment variable overrides the default seed.

use crate::assignment::CircuitAssignment;
use crate::causal::{CausalStructure, EdgeId, VertexDecl, VertexId};
use crate::linalg::{self, CMat};
use crate::tensor::StateVector;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeMap, BTreeSet};

pub const DEFAULT_SEED: u64 = 0x5EED_0001;

/// Seed for property suites: `RELSURF_SEED` if set, a fixed default otherwise.
pub fn seed_from_env() -> u64 {
    std::env::var("RELSURF_SEED")
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or(DEFAULT_SEED)
}

pub fn rng_from_env() -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed_from_env())
}

pub fn gauss(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.gen::<f64>().max(1e-12);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

pub fn random_complex(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(gauss(rng), gauss(rng))
}

/// Unitary drawn by orthonormalizing a complex Gaussian matrix.
pub fn random_unitary(dim: usize, rng: &mut ChaCha8Rng) -> CMat {
    loop {
        let cols: Vec<Vec<Complex64>> =
            (0..dim).map(|_| (0..dim).map(|_| random_complex(rng)).collect()).collect();
        let basis = linalg::orthonormalize(&cols, 1e-8);
        if basis.len() == dim {
            return CMat::from_columns(&basis);
        }
    }
}

pub fn random_unit_vector(dim: usize, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
    loop {
        let v: Vec<Complex64> = (0..dim).map(|_| random_complex(rng)).collect();
        let n = linalg::norm(&v);
        if n > 1e-6 {
            return linalg::scale_vec(&v, Complex64::new(1.0 / n, 0.0));
        }
    }
}

/// Orthonormal basis of a random subspace of the given rank.
pub fn random_subspace(dim: usize, rank: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<Complex64>> {
    assert!(rank <= dim);
    let u = random_unitary(dim, rng);
    (0..rank).map(|j| u.column(j)).collect()
}

/// Haar-ish random joint state on the given factors.
pub fn random_state(factors: Vec<(EdgeId, usize)>, rng: &mut ChaCha8Rng) -> StateVector {
    let total: usize = factors.iter().map(|(_, d)| d).product();
    StateVector::new(factors, random_unit_vector(total, rng)).expect("normalized by construction")
}

/// Random product state on the given factors.
pub fn random_product_state(factors: &[(EdgeId, usize)], rng: &mut ChaCha8Rng) -> StateVector {
    let mut out: Option<StateVector> = None;
    for (label, dim) in factors {
        let s = StateVector::single(label.clone(), random_unit_vector(*dim, rng)).unwrap();
        out = Some(match out {
            None => s,
            Some(acc) => acc.tensor_product(&s).unwrap(),
        });
    }
    out.expect("at least one factor")
}

/// A random causal structure (≤ `max_vertices` vertices, edge dimensions in
/// {2, 3}) together with its dimension map. Vertices consume either fresh
/// sourceless edges or open outputs of earlier vertices, so the result is
/// acyclic by construction; some edges are left dangling.
pub fn random_structure(
    max_vertices: usize,
    rng: &mut ChaCha8Rng,
) -> (CausalStructure, BTreeMap<EdgeId, usize>) {
    let n_vertices = rng.gen_range(0..=max_vertices);
    let mut dims: BTreeMap<EdgeId, usize> = BTreeMap::new();
    let mut edge_ids: Vec<EdgeId> = Vec::new();
    let mut pool: Vec<EdgeId> = Vec::new();
    let mut sourceless = 0usize;
    let mut next_edge = 0usize;
    let mut fresh_edge = |dims: &mut BTreeMap<EdgeId, usize>,
                          edge_ids: &mut Vec<EdgeId>,
                          dim: usize| {
        let id = EdgeId::new(format!("e{next_edge:02}"));
        next_edge += 1;
        dims.insert(id.clone(), dim);
        edge_ids.push(id.clone());
        id
    };

    let mut vertices = Vec::new();
    for i in 0..n_vertices {
        let k_in = rng.gen_range(1..=2usize);
        let mut inputs = Vec::new();
        for _ in 0..k_in {
            let from_pool = !pool.is_empty() && (sourceless >= 4 || rng.gen_bool(0.6));
            if from_pool {
                let j = rng.gen_range(0..pool.len());
                inputs.push(pool.swap_remove(j));
            } else {
                let dim = if rng.gen_bool(0.5) { 2 } else { 3 };
                sourceless += 1;
                inputs.push(fresh_edge(&mut dims, &mut edge_ids, dim));
            }
        }
        // Output dimensions are a shuffle of the input ones (2 and 3 are
        // prime, so the multiset is forced by the product condition).
        let mut out_dims: Vec<usize> = inputs.iter().map(|e| dims[e]).collect();
        for j in (1..out_dims.len()).rev() {
            let k = rng.gen_range(0..=j);
            out_dims.swap(j, k);
        }
        let outputs: Vec<EdgeId> =
            out_dims.iter().map(|&d| fresh_edge(&mut dims, &mut edge_ids, d)).collect();
        pool.extend(outputs.iter().cloned());
        vertices.push(VertexDecl { id: VertexId::new(format!("v{i}")), inputs, outputs });
    }
    if rng.gen_bool(0.3) {
        let dim = if rng.gen_bool(0.5) { 2 } else { 3 };
        fresh_edge(&mut dims, &mut edge_ids, dim);
    }
    (CausalStructure::from_vertex_lists(edge_ids, vertices), dims)
}

/// How the initial state of a random circuit is drawn.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InitialKind {
    Generic,
    Product,
}

/// A random circuit assignment: random structure, Haar-ish gates, random
/// initial state on the initial surface.
pub fn random_circuit(
    max_vertices: usize,
    initial: InitialKind,
    rng: &mut ChaCha8Rng,
) -> CircuitAssignment {
    loop {
        let (structure, dims) = random_structure(max_vertices, rng);
        let s0 = structure.initial_surface();
        let factors: Vec<(EdgeId, usize)> =
            s0.edges().iter().map(|e| (e.clone(), dims[e])).collect();
        if factors.is_empty() {
            continue;
        }
        let total: usize = factors.iter().map(|(_, d)| d).product();
        if total > 729 {
            continue;
        }
        let initial_state = match initial {
            InitialKind::Generic => random_state(factors, rng),
            InitialKind::Product => random_product_state(&factors, rng),
        };
        let gates: BTreeMap<VertexId, CMat> = structure
            .vertices()
            .iter()
            .map(|v| {
                let dim: usize = v.inputs.iter().map(|e| dims[e]).product();
                (v.id.clone(), random_unitary(dim, rng))
            })
            .collect();
        return CircuitAssignment::new(structure, dims, gates, initial_state)
            .expect("random circuit construction is valid");
    }
}

/// A randomized single-surface deduction whose premises are all true except
/// at most one merely-possible one.
pub struct DeductionInstance {
    pub circuit: CircuitAssignment,
    pub surface: crate::causal::Surface,
    pub deduction: crate::qlogic::Deduction,
    pub possible_premises: usize,
}

/// Generates a random valid deduction supported on a single surface, with at
/// most one merely-possible premise and the rest true.
///
/// All atom denotations are spanned by vectors of one random product frame
/// per instance (per-edge orthonormal bases), so every denotation commutes
/// with every other after embedding. Within such a commuting family the
/// deduction rules are classically sound, which is what makes "conclusion is
/// never false" a theorem rather than a generic expectation; incompatible
/// denotations can defeat it (see the qlogic unit tests).
pub fn random_single_surface_deduction(
    max_steps: usize,
    rng: &mut ChaCha8Rng,
) -> DeductionInstance {
    use crate::qlogic::{valuate_on, Prop, Valuation};
    loop {
        let branch_family = rng.gen_bool(0.5);
        let Some((circuit, surface)) = deduction_stage(branch_family, rng) else {
            continue;
        };
        let edges: Vec<(EdgeId, usize)> = surface
            .edges()
            .iter()
            .map(|e| (e.clone(), circuit.dim(e).unwrap()))
            .collect();
        // One orthonormal frame per edge; every denotation draws from it.
        let frames: BTreeMap<EdgeId, CMat> =
            edges.iter().map(|(e, d)| (e.clone(), random_unitary(*d, rng))).collect();

        let mut atom_counter = 0usize;
        let mut frame_atom = |indices: &BTreeSet<usize>,
                              support: &[(EdgeId, usize)],
                              rng: &mut ChaCha8Rng|
         -> Prop {
            let _ = rng;
            let total: usize = support.iter().map(|(_, d)| d).product();
            debug_assert!(indices.iter().all(|i| *i < total));
            let vectors: Vec<Vec<num_complex::Complex64>> = indices
                .iter()
                .map(|&flat| {
                    // kron of frame columns selected by the mixed-radix digits
                    let mut digits = Vec::with_capacity(support.len());
                    let mut rest = flat;
                    for (_, d) in support.iter().rev() {
                        digits.push(rest % d);
                        rest /= d;
                    }
                    digits.reverse();
                    let mut vec = vec![crate::linalg::ONE];
                    for ((e, _), digit) in support.iter().zip(&digits) {
                        let col = frames[e].column(*digit);
                        let mut next =
                            Vec::with_capacity(vec.len() * col.len());
                        for a in &vec {
                            for b in &col {
                                next.push(a * b);
                            }
                        }
                        vec = next;
                    }
                    vec
                })
                .collect();
            atom_counter += 1;
            let sub = crate::qlogic::Subspace::new(support.to_vec(), vectors)
                .expect("frame vectors are orthonormal");
            Prop::Atom(std::sync::Arc::new(crate::qlogic::AtomDef::new(
                format!("a{atom_counter}"),
                sub,
            )))
        };

        let random_support = |rng: &mut ChaCha8Rng| -> Vec<(EdgeId, usize)> {
            let k = rng.gen_range(1..=2usize.min(edges.len()));
            let mut picked = BTreeSet::new();
            while picked.len() < k {
                picked.insert(rng.gen_range(0..edges.len()));
            }
            picked.iter().map(|&i| edges[i].clone()).collect()
        };

        // Premises: at most one merely-possible atom, the rest true
        // (implications with contained antecedent denotations, or atoms that
        // happen to valuate true).
        let mut premises: Vec<Prop> = Vec::new();
        let mut possible_premises = 0usize;
        if rng.gen_bool(0.8) {
            let mut found = false;
            for _ in 0..60 {
                let support = random_support(rng);
                let total: usize = support.iter().map(|(_, d)| d).product();
                let mut indices = BTreeSet::new();
                for i in 0..total {
                    if rng.gen_bool(0.5) {
                        indices.insert(i);
                    }
                }
                if indices.is_empty() || indices.len() == total {
                    continue;
                }
                let atom = frame_atom(&indices, &support, rng);
                if valuate_on(&atom, &circuit, &surface).unwrap().value == Valuation::Possible {
                    premises.push(atom);
                    possible_premises = 1;
                    found = true;
                    break;
                }
            }
            if !found {
                continue;
            }
        }
        let n_true = rng.gen_range(1..=3usize);
        for _ in 0..n_true {
            let support = random_support(rng);
            let total: usize = support.iter().map(|(_, d)| d).product();
            // subset_a ⊆ subset_b makes the implication denote the full
            // space, hence valuate true.
            let mut b_ix = BTreeSet::new();
            for i in 0..total {
                if rng.gen_bool(0.6) {
                    b_ix.insert(i);
                }
            }
            if b_ix.is_empty() {
                b_ix.insert(rng.gen_range(0..total));
            }
            let a_ix: BTreeSet<usize> =
                b_ix.iter().copied().filter(|_| rng.gen_bool(0.6)).collect();
            let a_ix = if a_ix.is_empty() {
                [*b_ix.iter().next().unwrap()].into()
            } else {
                a_ix
            };
            let pa = frame_atom(&a_ix, &support, rng);
            let pb = frame_atom(&b_ix, &support, rng);
            let imp = Prop::implication(pa, pb);
            debug_assert_eq!(
                valuate_on(&imp, &circuit, &surface).unwrap().value,
                Valuation::True
            );
            premises.push(imp);
        }
        for i in (1..premises.len()).rev() {
            let j = rng.gen_range(0..=i);
            premises.swap(i, j);
        }

        let deduction = random_walk_steps(&premises, max_steps, &circuit, rng);
        let report = crate::qlogic::check_deduction(&deduction, circuit.structure());
        debug_assert!(report.valid, "generator produced an invalid deduction");
        return DeductionInstance { circuit, surface, deduction, possible_premises };
    }
}

/// Picks the stage for a deduction instance: either a random circuit with a
/// random surface, or a bare structure carrying a two-branch state.
fn deduction_stage(
    branch_family: bool,
    rng: &mut ChaCha8Rng,
) -> Option<(CircuitAssignment, crate::causal::Surface)> {
    if branch_family {
        let n_edges = rng.gen_range(2..=4usize);
        let factors: Vec<(EdgeId, usize)> = (0..n_edges)
            .map(|i| (EdgeId::new(format!("e{i}")), if rng.gen_bool(0.5) { 2 } else { 3 }))
            .collect();
        let total: usize = factors.iter().map(|(_, d)| d).product();
        // Two distinct computational branches with weights α², 1-α².
        let b1 = rng.gen_range(0..total);
        let mut b2 = rng.gen_range(0..total);
        while b2 == b1 {
            b2 = rng.gen_range(0..total);
        }
        let alpha = rng.gen_range(0.35..0.93f64);
        let beta = (1.0 - alpha * alpha).sqrt();
        let mut amps = vec![crate::linalg::ZERO; total];
        amps[b1] = num_complex::Complex64::new(alpha, 0.0);
        amps[b2] = num_complex::Complex64::new(beta, 0.0);
        let state = StateVector::new(factors.clone(), amps).unwrap();
        let g = CausalStructure::from_vertex_lists(
            factors.iter().map(|(e, _)| e.clone()).collect(),
            vec![],
        );
        let dims: BTreeMap<EdgeId, usize> = factors.into_iter().collect();
        let circuit = CircuitAssignment::new(g, dims, BTreeMap::new(), state).unwrap();
        let surface = circuit.structure().initial_surface();
        Some((circuit, surface))
    } else {
        let circuit = random_circuit(3, InitialKind::Generic, rng);
        let surfaces = circuit.structure().enumerate_surfaces();
        let candidates: Vec<_> = surfaces
            .into_iter()
            .filter(|s| {
                let edges = s.edges();
                !edges.is_empty()
                    && edges.len() <= 4
                    && circuit.space_dim(edges) <= 108
            })
            .collect();
        if candidates.is_empty() {
            return None;
        }
        let surface = candidates[rng.gen_range(0..candidates.len())].clone();
        Some((circuit, surface))
    }
}

/// Extends premises by a random sequence of rule applications.
fn random_walk_steps(
    premises: &[crate::qlogic::Prop],
    max_steps: usize,
    circuit: &CircuitAssignment,
    rng: &mut ChaCha8Rng,
) -> crate::qlogic::Deduction {
    use crate::qlogic::{Deduction, Prop, Rule, Step};
    let mut list: Vec<Prop> = premises.to_vec();
    let mut steps: Vec<Step> = Vec::new();
    let n_steps = rng.gen_range(1..=max_steps);
    let dims = circuit.dims();
    let support_dim = |p: &Prop| -> usize { p.support().iter().map(|e| dims[e]).product() };
    for _ in 0..n_steps {
        // (rule, indices 1-based, derived)
        let mut candidates: Vec<(Rule, Vec<usize>, Prop)> = Vec::new();
        for (i, p) in list.iter().enumerate() {
            if let Prop::And(a, b) = p {
                candidates.push((Rule::ProjectLeft, vec![i + 1], (**a).clone()));
                candidates.push((Rule::ProjectRight, vec![i + 1], (**b).clone()));
            }
            if let Some((a, b)) = p.as_implication() {
                for (j, q) in list.iter().enumerate() {
                    if q == a {
                        candidates.push((Rule::ModusPonens, vec![j + 1, i + 1], b.clone()));
                    }
                }
            }
        }
        for (i, p) in list.iter().enumerate() {
            for (j, q) in list.iter().enumerate() {
                if i == j {
                    continue;
                }
                if support_dim(p).saturating_mul(support_dim(q)) <= 243 {
                    let and = Prop::And(Box::new(p.clone()), Box::new(q.clone()));
                    candidates.push((Rule::Conjoin, vec![i + 1, j + 1], and));
                }
            }
        }
        if candidates.is_empty() {
            break;
        }
        let (rule, from, derived) = candidates[rng.gen_range(0..candidates.len())].clone();
        list.push(derived.clone());
        steps.push(Step { rule, from, derived });
    }
    Deduction { premises: premises.to_vec(), steps }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_structures_validate() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..200 {
            let (g, dims) = random_structure(8, &mut rng);
            assert!(g.validate().is_ok(), "{}", g.validate());
            for e in g.edges() {
                assert!(matches!(dims[&e.id], 2 | 3));
            }
            for v in g.vertices() {
                let ins: usize = v.inputs.iter().map(|e| dims[e]).product();
                let outs: usize = v.outputs.iter().map(|e| dims[e]).product();
                assert_eq!(ins, outs);
            }
        }
    }

    #[test]
    fn random_circuits_produce_unit_surface_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        for _ in 0..20 {
            let c = random_circuit(3, InitialKind::Generic, &mut rng);
            for s in c.structure().enumerate_surfaces() {
                let psi = c.state_on_surface(&s).unwrap();
                let n = crate::linalg::norm(psi.amplitudes());
                assert!((n - 1.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn seed_env_override_is_parsed() {
        // Not set in the test environment: default applies.
        if std::env::var("RELSURF_SEED").is_err() {
            assert_eq!(seed_from_env(), DEFAULT_SEED);
        }
    }
}
