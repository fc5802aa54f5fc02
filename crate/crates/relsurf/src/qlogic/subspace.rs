//! Subspaces of the Hilbert space of a set of edges, represented by
//! orthonormal basis columns in canonical factor order. Negation is the
//! orthogonal complement; conjunction embeds both operands into the joint
//! support and intersects.

use super::LogicError;
use crate::causal::EdgeId;
use crate::linalg::{self, ZERO};
use crate::tensor;
use num_complex::Complex64;

/// Rank-revealing threshold for the orthogonalization steps behind
/// complement and intersection.
pub const RANK_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct Subspace {
    factors: Vec<(EdgeId, usize)>,
    basis: Vec<Vec<Complex64>>,
}

impl Subspace {
    /// Builds a subspace from basis vectors laid out row-major over `factors`
    /// in the order given; factors are re-sorted canonically. The vectors
    /// must be orthonormal within 1e-8 (they are re-orthogonalized
    /// internally) and independent.
    pub fn new(
        factors: Vec<(EdgeId, usize)>,
        vectors: Vec<Vec<Complex64>>,
    ) -> Result<Self, LogicError> {
        let labels: Vec<EdgeId> = factors.iter().map(|(l, _)| l.clone()).collect();
        let dims: Vec<usize> = factors.iter().map(|(_, d)| *d).collect();
        for (i, l) in labels.iter().enumerate() {
            if labels[i + 1..].contains(l) {
                return Err(LogicError::DuplicateSupportEdge(l.clone()));
            }
        }
        let total: usize = dims.iter().product::<usize>().max(1);
        let mut canonical_vectors = Vec::with_capacity(vectors.len());
        for v in vectors {
            if v.len() != total {
                return Err(LogicError::BasisVectorLength { expected: total, got: v.len() });
            }
            let (_, _, amps) = tensor::reorder_canonical(labels.clone(), dims.clone(), v);
            canonical_vectors.push(amps);
        }
        if !canonical_vectors.is_empty() {
            let defect =
                crate::linalg::CMat::from_columns(&canonical_vectors).isometry_defect();
            if defect > 1e-8 {
                return Err(LogicError::BasisNotOrthonormal { defect });
            }
        }
        let basis = linalg::orthonormalize(&canonical_vectors, RANK_TOL);
        if basis.len() != canonical_vectors.len() {
            return Err(LogicError::BasisNotOrthonormal { defect: 1.0 });
        }
        let mut factors = factors;
        factors.sort_by(|a, b| a.0.cmp(&b.0));
        Ok(Subspace { factors, basis })
    }

    /// The whole space of the given factors.
    pub fn full(mut factors: Vec<(EdgeId, usize)>) -> Self {
        factors.sort_by(|a, b| a.0.cmp(&b.0));
        let total: usize = factors.iter().map(|(_, d)| d).product::<usize>().max(1);
        let basis = (0..total)
            .map(|i| {
                let mut v = vec![ZERO; total];
                v[i] = linalg::ONE;
                v
            })
            .collect();
        Subspace { factors, basis }
    }

    /// The trivial subspace {0}.
    pub fn zero(mut factors: Vec<(EdgeId, usize)>) -> Self {
        factors.sort_by(|a, b| a.0.cmp(&b.0));
        Subspace { factors, basis: Vec::new() }
    }

    /// Span of a single basis state of a one-edge support.
    pub fn basis_state(label: EdgeId, dim: usize, index: usize) -> Self {
        let mut v = vec![ZERO; dim];
        v[index] = linalg::ONE;
        Subspace { factors: vec![(label, dim)], basis: vec![v] }
    }

    pub fn factors(&self) -> &[(EdgeId, usize)] {
        &self.factors
    }

    pub fn support(&self) -> impl Iterator<Item = &EdgeId> {
        self.factors.iter().map(|(l, _)| l)
    }

    pub fn basis(&self) -> &[Vec<Complex64>] {
        &self.basis
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    /// Dimension of the ambient space.
    pub fn space_dim(&self) -> usize {
        self.factors.iter().map(|(_, d)| d).product::<usize>().max(1)
    }

    /// Orthogonal complement within the same support.
    pub fn complement(&self) -> Subspace {
        let dim = self.space_dim();
        let basis = linalg::extend_to_basis(&self.basis, dim, &linalg::index_order(dim));
        Subspace { factors: self.factors.clone(), basis }
    }

    /// Embeds into a larger support by tensoring with the full space of the
    /// missing edges.
    pub fn embed(&self, joint: &[(EdgeId, usize)]) -> Result<Subspace, LogicError> {
        let mut joint = joint.to_vec();
        joint.sort_by(|a, b| a.0.cmp(&b.0));
        for (l, d) in &self.factors {
            match joint.iter().find(|(jl, _)| jl == l) {
                Some((_, jd)) if jd == d => {}
                Some((_, jd)) => {
                    return Err(LogicError::BasisVectorLength { expected: *d, got: *jd })
                }
                None => return Err(LogicError::SupportNotContained(l.clone())),
            }
        }
        if joint == self.factors {
            return Ok(self.clone());
        }
        let missing: Vec<(EdgeId, usize)> =
            joint.iter().filter(|(l, _)| !self.factors.iter().any(|(sl, _)| sl == l)).cloned().collect();
        let missing_total: usize = missing.iter().map(|(_, d)| d).product::<usize>().max(1);
        // Layout [self factors..., missing...] then canonical reorder.
        let mut layout: Vec<EdgeId> = self.factors.iter().map(|(l, _)| l.clone()).collect();
        layout.extend(missing.iter().map(|(l, _)| l.clone()));
        let mut layout_dims: Vec<usize> = self.factors.iter().map(|(_, d)| *d).collect();
        layout_dims.extend(missing.iter().map(|(_, d)| *d));
        let joint_total: usize = joint.iter().map(|(_, d)| d).product::<usize>().max(1);
        let mut basis = Vec::with_capacity(self.rank() * missing_total);
        for b in &self.basis {
            for j in 0..missing_total {
                let mut v = vec![ZERO; joint_total];
                for (i, z) in b.iter().enumerate() {
                    if *z != ZERO {
                        v[i * missing_total + j] = *z;
                    }
                }
                let (_, _, amps) =
                    tensor::reorder_canonical(layout.clone(), layout_dims.clone(), v);
                basis.push(amps);
            }
        }
        Ok(Subspace { factors: joint, basis })
    }

    /// Intersection after embedding both operands into the joint support:
    /// the null space of the stacked complement projectors, extracted by
    /// rank-revealing orthogonalization at threshold 1e-10.
    pub fn meet(&self, other: &Subspace, joint: &[(EdgeId, usize)]) -> Result<Subspace, LogicError> {
        let a = self.embed(joint)?;
        let b = other.embed(joint)?;
        let mut complement_span: Vec<Vec<Complex64>> = a.complement().basis;
        complement_span.extend(b.complement().basis);
        let range = linalg::orthonormalize(&complement_span, RANK_TOL);
        let dim = a.space_dim();
        let basis = linalg::extend_to_basis(&range, dim, &linalg::index_order(dim));
        Ok(Subspace { factors: a.factors, basis })
    }

    /// ‖P ψ‖ for a vector laid out over exactly this support.
    pub fn projection_norm(&self, amps: &[Complex64]) -> f64 {
        self.basis.iter().map(|b| linalg::inner(b, amps).norm_sqr()).sum::<f64>().sqrt()
    }

    /// Same span within `tol`?
    pub fn approx_eq(&self, other: &Subspace, tol: f64) -> bool {
        if self.factors != other.factors || self.rank() != other.rank() {
            return false;
        }
        let residual = |v: &[Complex64], basis: &[Vec<Complex64>]| -> f64 {
            let mut w = v.to_vec();
            for b in basis {
                let c = linalg::inner(b, &w);
                for (wi, bi) in w.iter_mut().zip(b) {
                    *wi -= c * bi;
                }
            }
            linalg::norm(&w)
        };
        self.basis.iter().all(|v| residual(v, &other.basis) < tol)
            && other.basis.iter().all(|v| residual(v, &self.basis) < tol)
    }

    /// Containment of spans: every basis vector of `self` lies in `other`
    /// within `tol`.
    pub fn contained_in(&self, other: &Subspace, tol: f64) -> bool {
        if self.factors != other.factors {
            return false;
        }
        self.basis.iter().all(|v| {
            let mut w = v.clone();
            for b in &other.basis {
                let c = linalg::inner(b, &w);
                for (wi, bi) in w.iter_mut().zip(b) {
                    *wi -= c * bi;
                }
            }
            linalg::norm(&w) < tol
        })
    }
}
