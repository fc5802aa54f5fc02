//! Dense complex matrices and the few factorizations the rest of the crate
//! needs: modified Gram-Schmidt, a cyclic Jacobi eigensolver for Hermitian
//! matrices, and deterministic unitary completion of partial isometries.
//!
//! Everything here is desk scale (dimensions in the hundreds), so the
//! implementations favor simplicity and reproducibility over asymptotics.

use num_complex::Complex64;
use thiserror::Error;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Tolerance for unitarity / orthonormality checks.
pub const UNITARY_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("specified vectors are not orthonormal (defect {defect:.3e})")]
    NotIsometric { defect: f64 },
}

/// Row-major dense complex matrix.
#[derive(Clone, PartialEq)]
pub struct CMat {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl std::fmt::Debug for CMat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "CMat {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows.min(12) {
            write!(f, "  ")?;
            for c in 0..self.cols.min(12) {
                let z = self[(r, c)];
                write!(f, "{:+.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl std::ops::Index<(usize, usize)> for CMat {
    type Output = Complex64;
    fn index(&self, (r, c): (usize, usize)) -> &Complex64 {
        &self.data[r * self.cols + c]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMat {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex64 {
        &mut self.data[r * self.cols + c]
    }
}

impl CMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMat { rows, cols, data: vec![ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = CMat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Complex64>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        CMat { rows: r, cols: c, data: rows.into_iter().flatten().collect() }
    }

    /// Builds a matrix from orthonormal-ish column vectors.
    pub fn from_columns(cols: &[Vec<Complex64>]) -> Self {
        let c = cols.len();
        let r = cols.first().map_or(0, |v| v.len());
        let mut m = CMat::zeros(r, c);
        for (j, col) in cols.iter().enumerate() {
            assert_eq!(col.len(), r, "ragged columns");
            for i in 0..r {
                m[(i, j)] = col[i];
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn mul(&self, other: &CMat) -> CMat {
        assert_eq!(self.cols, other.rows, "matmul shape mismatch");
        let mut out = CMat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.cols, v.len(), "matvec shape mismatch");
        let mut out = vec![ZERO; self.rows];
        for i in 0..self.rows {
            let mut acc = ZERO;
            for j in 0..self.cols {
                acc += self[(i, j)] * v[j];
            }
            out[i] = acc;
        }
        out
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> CMat {
        let mut out = CMat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn kron(&self, other: &CMat) -> CMat {
        let mut out = CMat::zeros(self.rows * other.rows, self.cols * other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self[(i, j)];
                if a == ZERO {
                    continue;
                }
                for k in 0..other.rows {
                    for l in 0..other.cols {
                        out[(i * other.rows + k, j * other.cols + l)] = a * other[(k, l)];
                    }
                }
            }
        }
        out
    }

    pub fn scale(&self, s: Complex64) -> CMat {
        CMat { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z * s).collect() }
    }

    pub fn add(&self, other: &CMat) -> CMat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        CMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &CMat) -> CMat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        CMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn trace(&self) -> Complex64 {
        assert!(self.is_square());
        (0..self.rows).map(|i| self[(i, i)]).sum()
    }

    /// ‖U†U − I‖_max, the defect from being an isometry (columns orthonormal).
    pub fn isometry_defect(&self) -> f64 {
        let gram = self.adjoint().mul(self);
        gram.sub(&CMat::identity(self.cols)).max_abs()
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.is_square() && self.isometry_defect() < tol
    }

    pub fn hermitian_defect(&self) -> f64 {
        assert!(self.is_square());
        self.sub(&self.adjoint()).max_abs()
    }
}

pub fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn scale_vec(v: &[Complex64], s: Complex64) -> Vec<Complex64> {
    v.iter().map(|z| z * s).collect()
}

/// Subtracts from `v` its projection onto each (orthonormal) column of `basis`.
fn project_out(v: &mut [Complex64], basis: &[Vec<Complex64>]) {
    for b in basis {
        let c = inner(b, v);
        for (vi, bi) in v.iter_mut().zip(b) {
            *vi -= c * bi;
        }
    }
}

/// Modified Gram-Schmidt with re-orthogonalization. Returns an orthonormal
/// basis of the span of `vectors`; directions whose residual falls below
/// `tol` are dropped as dependent.
pub fn orthonormalize(vectors: &[Vec<Complex64>], tol: f64) -> Vec<Vec<Complex64>> {
    let mut basis: Vec<Vec<Complex64>> = Vec::new();
    for v in vectors {
        let mut w = v.clone();
        project_out(&mut w, &basis);
        project_out(&mut w, &basis);
        let n = norm(&w);
        if n > tol {
            basis.push(scale_vec(&w, Complex64::new(1.0 / n, 0.0)));
        }
    }
    basis
}

/// Extends an orthonormal set to a full orthonormal basis of C^dim by
/// Gram-Schmidt over the standard basis vectors, visited in `order`.
/// Returns only the appended vectors.
pub fn extend_to_basis(existing: &[Vec<Complex64>], dim: usize, order: &[usize]) -> Vec<Vec<Complex64>> {
    assert_eq!(order.len(), dim);
    let target = dim - existing.len();
    let mut all: Vec<Vec<Complex64>> = existing.to_vec();
    let mut appended = Vec::with_capacity(target);
    for &i in order {
        if appended.len() == target {
            break;
        }
        let mut w = vec![ZERO; dim];
        w[i] = ONE;
        project_out(&mut w, &all);
        project_out(&mut w, &all);
        let n = norm(&w);
        if n > 1e-7 {
            let u = scale_vec(&w, Complex64::new(1.0 / n, 0.0));
            all.push(u.clone());
            appended.push(u);
        }
    }
    assert_eq!(appended.len(), target, "basis extension failed; input not orthonormal?");
    appended
}

/// Visit order for the canonical completion: standard basis in index order.
pub fn index_order(dim: usize) -> Vec<usize> {
    (0..dim).collect()
}

/// Alternative deterministic order used to demonstrate that completion
/// choices are unobservable: standard basis in reverse index order.
pub fn reverse_index_order(dim: usize) -> Vec<usize> {
    (0..dim).rev().collect()
}

/// Completes a partial isometry given as (input, output) vector pairs into a
/// full unitary. Inputs and outputs must each be orthonormal. The unspecified
/// directions are filled deterministically: both the input and the output
/// side are extended by Gram-Schmidt over standard basis vectors visited in
/// `completion_order`, and paired up in that order.
pub fn complete_unitary(
    pairs: &[(Vec<Complex64>, Vec<Complex64>)],
    dim: usize,
    completion_order: &[usize],
) -> Result<CMat, LinalgError> {
    for (input, output) in pairs {
        if input.len() != dim {
            return Err(LinalgError::DimensionMismatch { expected: dim, got: input.len() });
        }
        if output.len() != dim {
            return Err(LinalgError::DimensionMismatch { expected: dim, got: output.len() });
        }
    }
    let ins: Vec<Vec<Complex64>> = pairs.iter().map(|(i, _)| i.clone()).collect();
    let outs: Vec<Vec<Complex64>> = pairs.iter().map(|(_, o)| o.clone()).collect();
    for set in [&ins, &outs] {
        let defect = if set.is_empty() { 0.0 } else { CMat::from_columns(set).isometry_defect() };
        if defect > UNITARY_TOL {
            return Err(LinalgError::NotIsometric { defect });
        }
    }
    let extra_in = extend_to_basis(&ins, dim, completion_order);
    let extra_out = extend_to_basis(&outs, dim, completion_order);
    debug_assert_eq!(extra_in.len(), extra_out.len());

    // U = Σ_k |out_k⟩⟨in_k| over specified and appended pairs.
    let mut u = CMat::zeros(dim, dim);
    let all_in = ins.iter().chain(&extra_in);
    let all_out = outs.iter().chain(&extra_out);
    for (vin, vout) in all_in.zip(all_out) {
        for i in 0..dim {
            for j in 0..dim {
                u[(i, j)] += vout[i] * vin[j].conj();
            }
        }
    }
    Ok(u)
}

/// Eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.
/// Returns eigenvalues in descending order with matching eigenvector columns.
pub fn eigh(a: &CMat) -> (Vec<f64>, CMat) {
    assert!(a.is_square(), "eigh needs a square matrix");
    let n = a.rows();
    let mut m = a.clone();
    let mut v = CMat::identity(n);
    let scale = m.max_abs().max(1e-300);

    for _sweep in 0..100 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off = off.max(m[(p, q)].norm());
            }
        }
        if off < 1e-14 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let g = m[(p, q)];
                let gn = g.norm();
                if gn < 1e-300 {
                    continue;
                }
                let phase = g / gn;
                let alpha = m[(p, p)].re;
                let beta = m[(q, q)].re;
                let tau = (beta - alpha) / (2.0 * gn);
                // Smaller-magnitude root of t^2 - 2·tau·t - 1 = 0.
                let t = if tau >= 0.0 {
                    -1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // 2x2 unitary G = [[c, -s·phase], [s·conj(phase)·? ...]] chosen so
                // G† M G zeroes the (p,q) entry; columns p,q of M and V mix.
                let gpp = Complex64::new(c, 0.0);
                let gpq = -phase * s;
                let gqp = phase.conj() * s;
                let gqq = Complex64::new(c, 0.0);
                // M ← G† M G: first columns, then rows.
                for i in 0..n {
                    let mip = m[(i, p)];
                    let miq = m[(i, q)];
                    m[(i, p)] = mip * gpp + miq * gqp;
                    m[(i, q)] = mip * gpq + miq * gqq;
                }
                for j in 0..n {
                    let mpj = m[(p, j)];
                    let mqj = m[(q, j)];
                    m[(p, j)] = gpp.conj() * mpj + gqp.conj() * mqj;
                    m[(q, j)] = gpq.conj() * mpj + gqq.conj() * mqj;
                }
                for i in 0..n {
                    let vip = v[(i, p)];
                    let viq = v[(i, q)];
                    v[(i, p)] = vip * gpp + viq * gqp;
                    v[(i, q)] = vip * gpq + viq * gqq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| m[(i, i)].re).collect();
    order.sort_by(|&i, &j| diag[j].partial_cmp(&diag[i]).unwrap().then(i.cmp(&j)));
    let values: Vec<f64> = order.iter().map(|&i| diag[i]).collect();
    let mut vectors = CMat::zeros(n, n);
    for (new_j, &old_j) in order.iter().enumerate() {
        for i in 0..n {
            vectors[(i, new_j)] = v[(i, old_j)];
        }
    }
    (values, vectors)
}
