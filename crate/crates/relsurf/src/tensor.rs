//! Dense complex tensor algebra over labeled factors. States live on ordered
//! lists of edge labels; every public value keeps its factors sorted in
//! canonical (lexicographic) label order so that equality and golden-value
//! comparisons are unambiguous.

use crate::causal::EdgeId;
use crate::linalg::{self, CMat, ZERO};
use num_complex::Complex64;
use thiserror::Error;

/// Norm and trace checks.
pub const NORM_TOL: f64 = 1e-9;
/// Hermiticity and unitarity checks.
pub const HERMITIAN_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TensorError {
    #[error("label {0} appears on both operands")]
    LabelClash(EdgeId),
    #[error("unknown label {0}")]
    UnknownLabel(EdgeId),
    #[error("dimension mismatch: {context} (expected {expected}, got {got})")]
    DimensionMismatch { context: String, expected: usize, got: usize },
    #[error("state is not normalized: |norm - 1| = {defect:.3e}")]
    NotNormalized { defect: f64 },
    #[error("matrix is not Hermitian (defect {0:.3e})")]
    NotHermitian(f64),
    #[error("matrix is not a density operator: {0}")]
    NotDensity(String),
    #[error("specified map is not isometric (defect {defect:.3e})")]
    NotIsometric { defect: f64 },
}

impl From<linalg::LinalgError> for TensorError {
    fn from(e: linalg::LinalgError) -> Self {
        match e {
            linalg::LinalgError::DimensionMismatch { expected, got } => {
                TensorError::DimensionMismatch { context: "isometry completion".into(), expected, got }
            }
            linalg::LinalgError::NotIsometric { defect } => TensorError::NotIsometric { defect },
        }
    }
}

fn sort_permutation(labels: &[EdgeId]) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..labels.len()).collect();
    perm.sort_by(|&i, &j| labels[i].cmp(&labels[j]));
    perm
}

fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1usize; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * dims[i + 1];
    }
    s
}

fn decompose(mut flat: usize, dims: &[usize], out: &mut [usize]) {
    for i in (0..dims.len()).rev() {
        out[i] = flat % dims[i];
        flat /= dims[i];
    }
}

/// A unit vector over a sorted list of labeled factors, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    labels: Vec<EdgeId>,
    dims: Vec<usize>,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// Builds a state from factors given in any order; the amplitudes must be
    /// row-major over the order given, and are re-laid-out canonically.
    pub fn new(factors: Vec<(EdgeId, usize)>, amps: Vec<Complex64>) -> Result<Self, TensorError> {
        let labels: Vec<EdgeId> = factors.iter().map(|(l, _)| l.clone()).collect();
        let dims: Vec<usize> = factors.iter().map(|(_, d)| *d).collect();
        for (i, l) in labels.iter().enumerate() {
            if labels[i + 1..].contains(l) {
                return Err(TensorError::LabelClash(l.clone()));
            }
        }
        let total: usize = dims.iter().product();
        if amps.len() != total {
            return Err(TensorError::DimensionMismatch {
                context: "amplitude vector length".into(),
                expected: total,
                got: amps.len(),
            });
        }
        let n = linalg::norm(&amps);
        if (n - 1.0).abs() > NORM_TOL {
            return Err(TensorError::NotNormalized { defect: (n - 1.0).abs() });
        }
        let (labels, dims, amps) = reorder_canonical(labels, dims, amps);
        Ok(StateVector { labels, dims, amps })
    }

    /// A computational basis state on a single factor.
    pub fn basis(label: EdgeId, dim: usize, index: usize) -> Self {
        assert!(index < dim);
        let mut amps = vec![ZERO; dim];
        amps[index] = linalg::ONE;
        StateVector { labels: vec![label], dims: vec![dim], amps }
    }

    /// A single-factor state with the given amplitudes.
    pub fn single(label: EdgeId, amps: Vec<Complex64>) -> Result<Self, TensorError> {
        let dim = amps.len();
        StateVector::new(vec![(label, dim)], amps)
    }

    /// A normalized linear combination of states on identical factors.
    pub fn linear_combination(terms: &[(Complex64, &StateVector)]) -> Result<Self, TensorError> {
        let first = terms.first().expect("empty linear combination").1;
        let mut amps = vec![ZERO; first.amps.len()];
        for (coeff, s) in terms {
            if s.labels != first.labels {
                return Err(TensorError::UnknownLabel(s.labels[0].clone()));
            }
            for (a, b) in amps.iter_mut().zip(&s.amps) {
                *a += coeff * b;
            }
        }
        StateVector::new(first.factors(), amps)
    }

    pub fn labels(&self) -> &[EdgeId] {
        &self.labels
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn factors(&self) -> Vec<(EdgeId, usize)> {
        self.labels.iter().cloned().zip(self.dims.iter().copied()).collect()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn total_dim(&self) -> usize {
        self.amps.len()
    }

    pub fn dim_of(&self, label: &EdgeId) -> Option<usize> {
        self.labels.iter().position(|l| l == label).map(|i| self.dims[i])
    }

    /// ⟨self|other⟩ on identical factor lists.
    pub fn overlap(&self, other: &StateVector) -> Result<Complex64, TensorError> {
        if self.labels != other.labels || self.dims != other.dims {
            return Err(TensorError::DimensionMismatch {
                context: "overlap of states on different factors".into(),
                expected: self.total_dim(),
                got: other.total_dim(),
            });
        }
        Ok(linalg::inner(&self.amps, &other.amps))
    }

    /// |⟨self|other⟩|².
    pub fn fidelity(&self, other: &StateVector) -> Result<f64, TensorError> {
        Ok(self.overlap(other)?.norm_sqr())
    }

    /// Fixes the global phase: first amplitude of magnitude > 1e-12 becomes
    /// real positive.
    pub fn phase_normalized(&self) -> StateVector {
        let mut out = self.clone();
        if let Some(z) = out.amps.iter().find(|z| z.norm() > 1e-12) {
            let phase = z.conj() / z.norm();
            for a in &mut out.amps {
                *a *= phase;
            }
        }
        out
    }

    /// Kronecker product with disjoint labels, factors re-sorted canonically.
    pub fn tensor_product(&self, other: &StateVector) -> Result<StateVector, TensorError> {
        for l in &other.labels {
            if self.labels.contains(l) {
                return Err(TensorError::LabelClash(l.clone()));
            }
        }
        let mut labels = self.labels.clone();
        labels.extend(other.labels.iter().cloned());
        let mut dims = self.dims.clone();
        dims.extend(&other.dims);
        let mut amps = vec![ZERO; self.amps.len() * other.amps.len()];
        for (i, a) in self.amps.iter().enumerate() {
            if *a == ZERO {
                continue;
            }
            for (j, b) in other.amps.iter().enumerate() {
                amps[i * other.amps.len() + j] = a * b;
            }
        }
        let (labels, dims, amps) = reorder_canonical(labels, dims, amps);
        Ok(StateVector { labels, dims, amps })
    }

    /// Applies a unitary to the factors named by `in_labels` (in that order),
    /// which are replaced by `out_factors`. The product of the input and
    /// output dimensions must agree; the result is re-sorted canonically and
    /// stays normalized.
    pub fn apply_on_factors(
        &self,
        u: &CMat,
        in_labels: &[EdgeId],
        out_factors: &[(EdgeId, usize)],
    ) -> Result<StateVector, TensorError> {
        let in_pos: Vec<usize> = in_labels
            .iter()
            .map(|l| {
                self.labels
                    .iter()
                    .position(|x| x == l)
                    .ok_or_else(|| TensorError::UnknownLabel(l.clone()))
            })
            .collect::<Result<_, _>>()?;
        for (i, p) in in_pos.iter().enumerate() {
            if in_pos[i + 1..].contains(p) {
                return Err(TensorError::LabelClash(in_labels[i].clone()));
            }
        }
        let keep_pos: Vec<usize> = (0..self.labels.len()).filter(|p| !in_pos.contains(p)).collect();
        let in_dims: Vec<usize> = in_pos.iter().map(|&p| self.dims[p]).collect();
        let n_in: usize = in_dims.iter().product();
        let out_dims: Vec<usize> = out_factors.iter().map(|(_, d)| *d).collect();
        let n_out: usize = out_dims.iter().product();
        if !u.is_square() || u.rows() != n_in {
            return Err(TensorError::DimensionMismatch {
                context: "gate matrix vs input factors".into(),
                expected: n_in,
                got: u.rows(),
            });
        }
        if n_out != n_in {
            return Err(TensorError::DimensionMismatch {
                context: "output factor dimension product".into(),
                expected: n_in,
                got: n_out,
            });
        }
        for (l, _) in out_factors {
            if keep_pos.iter().any(|&p| &self.labels[p] == l) {
                return Err(TensorError::LabelClash(l.clone()));
            }
        }

        let keep_dims: Vec<usize> = keep_pos.iter().map(|&p| self.dims[p]).collect();
        let n_keep: usize = keep_dims.iter().product::<usize>().max(1);

        // Gather into (keep, in) layout.
        let mut gathered = vec![ZERO; n_keep * n_in];
        let mut idx = vec![0usize; self.dims.len()];
        for (flat, amp) in self.amps.iter().enumerate() {
            if *amp == ZERO {
                continue;
            }
            decompose(flat, &self.dims, &mut idx);
            let mut k = 0usize;
            for &p in &keep_pos {
                k = k * self.dims[p] + idx[p];
            }
            let mut a = 0usize;
            for &p in &in_pos {
                a = a * self.dims[p] + idx[p];
            }
            gathered[k * n_in + a] = *amp;
        }

        // Apply the gate blockwise.
        let mut applied = vec![ZERO; n_keep * n_out];
        for k in 0..n_keep {
            let block = &gathered[k * n_in..(k + 1) * n_in];
            for b in 0..n_out {
                let mut acc = ZERO;
                for (a, amp) in block.iter().enumerate() {
                    if *amp != ZERO {
                        acc += u[(b, a)] * amp;
                    }
                }
                applied[k * n_out + b] = acc;
            }
        }

        // Combined layout is keep-then-out; re-sort canonically.
        let mut labels: Vec<EdgeId> = keep_pos.iter().map(|&p| self.labels[p].clone()).collect();
        labels.extend(out_factors.iter().map(|(l, _)| l.clone()));
        let mut dims = keep_dims;
        dims.extend(&out_dims);
        let (labels, dims, amps) = reorder_canonical(labels, dims, applied);
        Ok(StateVector { labels, dims, amps })
    }

    /// Contracts one factor with ⟨bra|, returning the remaining factors and
    /// the unnormalized amplitudes. The squared norm of the result is the
    /// weight of the conditioned branch.
    pub fn contract_factor(
        &self,
        label: &EdgeId,
        bra: &[Complex64],
    ) -> Result<(Vec<(EdgeId, usize)>, Vec<Complex64>), TensorError> {
        self.contract_factors(std::slice::from_ref(label), bra)
    }

    /// Contracts a set of factors with a joint ⟨bra| laid out row-major over
    /// `labels` in the order given. Returns the remaining factors (canonical
    /// order) and the unnormalized amplitudes.
    pub fn contract_factors(
        &self,
        labels: &[EdgeId],
        bra: &[Complex64],
    ) -> Result<(Vec<(EdgeId, usize)>, Vec<Complex64>), TensorError> {
        let pos: Vec<usize> = labels
            .iter()
            .map(|l| {
                self.labels
                    .iter()
                    .position(|x| x == l)
                    .ok_or_else(|| TensorError::UnknownLabel(l.clone()))
            })
            .collect::<Result<_, _>>()?;
        for (i, p) in pos.iter().enumerate() {
            if pos[i + 1..].contains(p) {
                return Err(TensorError::LabelClash(labels[i].clone()));
            }
        }
        let con_total: usize = pos.iter().map(|&p| self.dims[p]).product::<usize>().max(1);
        if bra.len() != con_total {
            return Err(TensorError::DimensionMismatch {
                context: "bra vs contracted factor dimensions".into(),
                expected: con_total,
                got: bra.len(),
            });
        }
        let rest: Vec<(EdgeId, usize)> = self
            .labels
            .iter()
            .zip(&self.dims)
            .enumerate()
            .filter(|(i, _)| !pos.contains(i))
            .map(|(_, (l, d))| (l.clone(), *d))
            .collect();
        let rest_total: usize = rest.iter().map(|(_, d)| d).product::<usize>().max(1);
        let mut out = vec![ZERO; rest_total];
        let mut idx = vec![0usize; self.dims.len()];
        for (flat, amp) in self.amps.iter().enumerate() {
            if *amp == ZERO {
                continue;
            }
            decompose(flat, &self.dims, &mut idx);
            let mut b = 0usize;
            for &p in &pos {
                b = b * self.dims[p] + idx[p];
            }
            let mut r = 0usize;
            for (i, &x) in idx.iter().enumerate() {
                if !pos.contains(&i) {
                    r = r * self.dims[i] + x;
                }
            }
            out[r] += bra[b].conj() * amp;
        }
        Ok((rest, out))
    }

    /// Reduced density operator on `keep` (tracing out everything else).
    pub fn reduced_density(&self, keep: &[EdgeId]) -> Result<DensityOperator, TensorError> {
        let keep_pos: Vec<usize> = {
            let mut pos = Vec::new();
            for l in keep {
                let p = self
                    .labels
                    .iter()
                    .position(|x| x == l)
                    .ok_or_else(|| TensorError::UnknownLabel(l.clone()))?;
                if pos.contains(&p) {
                    return Err(TensorError::LabelClash(l.clone()));
                }
                pos.push(p);
            }
            pos.sort_unstable();
            pos
        };
        let keep_dims: Vec<usize> = keep_pos.iter().map(|&p| self.dims[p]).collect();
        let n_keep: usize = keep_dims.iter().product::<usize>().max(1);
        let n_env: usize = self.total_dim() / n_keep;

        // Gather into (keep, env) then form M M†.
        let mut m = vec![ZERO; n_keep * n_env];
        let mut idx = vec![0usize; self.dims.len()];
        for (flat, amp) in self.amps.iter().enumerate() {
            if *amp == ZERO {
                continue;
            }
            decompose(flat, &self.dims, &mut idx);
            let mut k = 0usize;
            for &p in &keep_pos {
                k = k * self.dims[p] + idx[p];
            }
            let mut e = 0usize;
            for (i, &x) in idx.iter().enumerate() {
                if !keep_pos.contains(&i) {
                    e = e * self.dims[i] + x;
                }
            }
            m[k * n_env + e] = *amp;
        }
        let mut rho = CMat::zeros(n_keep, n_keep);
        for i in 0..n_keep {
            for j in 0..n_keep {
                let mut acc = ZERO;
                for e in 0..n_env {
                    acc += m[i * n_env + e] * m[j * n_env + e].conj();
                }
                rho[(i, j)] = acc;
            }
        }
        let factors: Vec<(EdgeId, usize)> =
            keep_pos.iter().map(|&p| (self.labels[p].clone(), self.dims[p])).collect();
        DensityOperator::from_trusted(factors, rho)
    }
}

pub(crate) fn reorder_canonical(
    labels: Vec<EdgeId>,
    dims: Vec<usize>,
    amps: Vec<Complex64>,
) -> (Vec<EdgeId>, Vec<usize>, Vec<Complex64>) {
    let perm = sort_permutation(&labels);
    if perm.iter().enumerate().all(|(i, &p)| i == p) {
        return (labels, dims, amps);
    }
    let new_labels: Vec<EdgeId> = perm.iter().map(|&p| labels[p].clone()).collect();
    let new_dims: Vec<usize> = perm.iter().map(|&p| dims[p]).collect();
    let new_strides = strides(&new_dims);
    let mut out = vec![ZERO; amps.len()];
    let mut idx = vec![0usize; dims.len()];
    for (flat, amp) in amps.iter().enumerate() {
        if *amp == ZERO {
            continue;
        }
        decompose(flat, &dims, &mut idx);
        let mut nf = 0usize;
        for (new_i, &old_i) in perm.iter().enumerate() {
            nf += idx[old_i] * new_strides[new_i];
        }
        out[nf] = *amp;
    }
    (new_labels, new_dims, out)
}

/// A density operator over a sorted list of labeled factors.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityOperator {
    labels: Vec<EdgeId>,
    dims: Vec<usize>,
    mat: CMat,
}

impl DensityOperator {
    /// Validating constructor: Hermitian within 1e-10, unit trace within
    /// 1e-9, positive semidefinite within 1e-9.
    pub fn new(factors: Vec<(EdgeId, usize)>, mat: CMat) -> Result<Self, TensorError> {
        let op = Self::from_trusted(factors, mat)?;
        let (vals, _) = linalg::eigh(&op.mat);
        if let Some(min) = vals.last() {
            if *min < -NORM_TOL {
                return Err(TensorError::NotDensity(format!("negative eigenvalue {min:.3e}")));
            }
        }
        Ok(op)
    }

    /// Constructor for internally produced matrices; checks shape, hermiticity
    /// and trace but skips the eigenvalue scan.
    fn from_trusted(factors: Vec<(EdgeId, usize)>, mat: CMat) -> Result<Self, TensorError> {
        let labels: Vec<EdgeId> = factors.iter().map(|(l, _)| l.clone()).collect();
        let dims: Vec<usize> = factors.iter().map(|(_, d)| *d).collect();
        debug_assert!(labels.windows(2).all(|w| w[0] < w[1]), "factors must arrive sorted");
        let total: usize = dims.iter().product::<usize>().max(1);
        if mat.rows() != total || mat.cols() != total {
            return Err(TensorError::DimensionMismatch {
                context: "density matrix size".into(),
                expected: total,
                got: mat.rows(),
            });
        }
        let herm = mat.hermitian_defect();
        if herm > HERMITIAN_TOL {
            return Err(TensorError::NotHermitian(herm));
        }
        let tr = mat.trace();
        if (tr.re - 1.0).abs() > NORM_TOL || tr.im.abs() > NORM_TOL {
            return Err(TensorError::NotDensity(format!("trace {tr} != 1")));
        }
        Ok(DensityOperator { labels, dims, mat })
    }

    pub fn from_pure(psi: &StateVector) -> Self {
        psi.reduced_density(&psi.labels().to_vec()).expect("outer product of a valid state")
    }

    pub fn labels(&self) -> &[EdgeId] {
        &self.labels
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn factors(&self) -> Vec<(EdgeId, usize)> {
        self.labels.iter().cloned().zip(self.dims.iter().copied()).collect()
    }

    pub fn matrix(&self) -> &CMat {
        &self.mat
    }

    pub fn total_dim(&self) -> usize {
        self.mat.rows()
    }

    /// Eigenvalues in descending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::eigh(&self.mat).0
    }

    /// Largest eigenvalue and its eigenvector.
    pub fn top_eigenpair(&self) -> (f64, Vec<Complex64>) {
        let (vals, vecs) = linalg::eigh(&self.mat);
        (vals[0], vecs.column(0))
    }

    /// If the operator is pure up to `tol` (largest eigenvalue ≥ 1 − tol),
    /// returns the corresponding unit eigenvector with the global phase fixed
    /// so its first nonzero amplitude is real positive.
    pub fn as_pure(&self, tol: f64) -> Option<StateVector> {
        let (top, vec) = self.top_eigenpair();
        if top < 1.0 - tol {
            return None;
        }
        let psi = StateVector::new(self.factors(), vec).ok()?;
        Some(psi.phase_normalized())
    }

    /// Partial trace down to `keep`.
    pub fn partial_trace(&self, keep: &[EdgeId]) -> Result<DensityOperator, TensorError> {
        let mut keep_pos = Vec::new();
        for l in keep {
            let p = self
                .labels
                .iter()
                .position(|x| x == l)
                .ok_or_else(|| TensorError::UnknownLabel(l.clone()))?;
            if keep_pos.contains(&p) {
                return Err(TensorError::LabelClash(l.clone()));
            }
            keep_pos.push(p);
        }
        keep_pos.sort_unstable();
        let keep_dims: Vec<usize> = keep_pos.iter().map(|&p| self.dims[p]).collect();
        let n_keep: usize = keep_dims.iter().product::<usize>().max(1);
        let total = self.total_dim();

        // Map each full index to (keep, env) coordinates once.
        let mut keep_of = vec![0usize; total];
        let mut env_of = vec![0usize; total];
        let mut idx = vec![0usize; self.dims.len()];
        for flat in 0..total {
            decompose(flat, &self.dims, &mut idx);
            let mut k = 0usize;
            let mut e = 0usize;
            for (i, &x) in idx.iter().enumerate() {
                if keep_pos.contains(&i) {
                    k = k * self.dims[i] + x;
                } else {
                    e = e * self.dims[i] + x;
                }
            }
            keep_of[flat] = k;
            env_of[flat] = e;
        }
        let mut rho = CMat::zeros(n_keep, n_keep);
        for r in 0..total {
            for c in 0..total {
                if env_of[r] == env_of[c] {
                    rho[(keep_of[r], keep_of[c])] += self.mat[(r, c)];
                }
            }
        }
        let factors: Vec<(EdgeId, usize)> =
            keep_pos.iter().map(|&p| (self.labels[p].clone(), self.dims[p])).collect();
        Self::from_trusted(factors, rho)
    }

    /// Largest entrywise difference against another operator on the same
    /// factors.
    pub fn max_abs_diff(&self, other: &DensityOperator) -> Result<f64, TensorError> {
        if self.labels != other.labels || self.dims != other.dims {
            return Err(TensorError::DimensionMismatch {
                context: "density operators on different factors".into(),
                expected: self.total_dim(),
                got: other.total_dim(),
            });
        }
        Ok(self.mat.sub(&other.mat).max_abs())
    }

    /// ⟨psi|ρ|psi⟩, the fidelity against a pure state.
    pub fn fidelity_with_pure(&self, psi: &StateVector) -> Result<f64, TensorError> {
        if self.labels != psi.labels() || self.dims != psi.dims() {
            return Err(TensorError::DimensionMismatch {
                context: "density operator vs pure state factors".into(),
                expected: self.total_dim(),
                got: psi.total_dim(),
            });
        }
        let v = self.mat.matvec(psi.amplitudes());
        Ok(linalg::inner(psi.amplitudes(), &v).re)
    }
}
