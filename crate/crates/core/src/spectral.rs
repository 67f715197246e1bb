//! Dense symmetric eigenvalue machinery for small matrices.
//!
//! Everything downstream (operator evaluation, Loewner comparisons, the
//! Courant-Fischer sampler) is built on [`eigen_decompose`], a cyclic Jacobi
//! sweep that is deterministic and accurate well past the tolerances asked of
//! it at the dimensions we care about (N <= 10).

use serde::Serialize;

use crate::error::{Error, Result};
use crate::sampling;

const MAX_JACOBI_SWEEPS: usize = 64;
const OFF_NORM_FACTOR: f64 = 1e-12;

/// A real symmetric N x N matrix, stored dense row-major.
///
/// Construction symmetrizes the input so that `get(i, j) == get(j, i)` holds
/// bit for bit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SymmetricMatrix {
    dim: usize,
    entries: Vec<f64>,
}

impl SymmetricMatrix {
    /// Builds a matrix from `dim * dim` row-major entries, averaging the two
    /// off-diagonal mirror slots.
    pub fn new(dim: usize, entries: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInput("matrix dimension must be >= 1".into()));
        }
        if entries.len() != dim * dim {
            return Err(Error::InvalidInput(format!(
                "expected {} entries for dim {}, got {}",
                dim * dim,
                dim,
                entries.len()
            )));
        }
        if entries.iter().any(|e| !e.is_finite()) {
            return Err(Error::InvalidInput("non-finite matrix entry".into()));
        }
        let mut m = entries;
        for i in 0..dim {
            for j in (i + 1)..dim {
                let avg = 0.5 * (m[i * dim + j] + m[j * dim + i]);
                m[i * dim + j] = avg;
                m[j * dim + i] = avg;
            }
        }
        Ok(Self { dim, entries: m })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::InvalidInput("rows do not form a square matrix".into()));
        }
        Self::new(dim, rows.iter().flatten().copied().collect())
    }

    pub fn zeros(dim: usize) -> Self {
        Self::new(dim, vec![0.0; dim * dim]).expect("zero matrix is valid")
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.entries[i * dim + i] = 1.0;
        }
        m
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        let dim = diag.len();
        let mut entries = vec![0.0; dim * dim];
        for (i, d) in diag.iter().enumerate() {
            entries[i * dim + i] = *d;
        }
        Self::new(dim, entries)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.dim + j]
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0, |acc, e| acc.max(e.abs()))
    }

    pub fn scaled(&self, t: f64) -> Self {
        Self {
            dim: self.dim,
            entries: self.entries.iter().map(|e| t * e).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                left: self.dim,
                right: other.dim,
            });
        }
        Ok(Self {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| f(*a, *b))
                .collect(),
        })
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.dim);
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.get(i, j) * v[j]).sum())
            .collect()
    }

    /// The Rayleigh quotient numerator `v^T M v`.
    #[inline]
    pub fn quadratic_form(&self, v: &[f64]) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.dim {
            let mut row = 0.0;
            for j in 0..self.dim {
                row += self.get(i, j) * v[j];
            }
            acc += v[i] * row;
        }
        acc
    }

    /// Conjugation `Q M Q^T` for a square `q` given as row-major rows.
    pub fn conjugate(&self, q: &[Vec<f64>]) -> Result<Self> {
        let n = self.dim;
        if q.len() != n || q.iter().any(|r| r.len() != n) {
            return Err(Error::DimensionMismatch {
                left: q.len(),
                right: n,
            });
        }
        // tmp = Q M
        let mut tmp = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let mut s = 0.0;
                for k in 0..n {
                    s += q[i][k] * self.get(k, j);
                }
                tmp[i * n + j] = s;
            }
        }
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let mut s = 0.0;
                for k in 0..n {
                    s += tmp[i * n + k] * q[j][k];
                }
                out[i * n + j] = s;
            }
        }
        Self::new(n, out)
    }

    /// Gram matrix `P^T P` of a square matrix given as rows.
    pub fn gram(p: &[Vec<f64>]) -> Result<Self> {
        let n = p.len();
        if p.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidInput("gram factor must be square".into()));
        }
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let mut s = 0.0;
                for row in p {
                    s += row[i] * row[j];
                }
                out[i * n + j] = s;
            }
        }
        Self::new(n, out)
    }

    fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|e| e * e).sum::<f64>().sqrt()
    }
}

/// The ordered eigensystem of a [`SymmetricMatrix`].
///
/// `eigenvalues` is ascending; `frame[i]` is the unit eigenvector paired with
/// `eigenvalues[i]`.
#[derive(Debug, Clone, Serialize)]
pub struct Spectrum {
    eigenvalues: Vec<f64>,
    frame: Vec<Vec<f64>>,
}

impl Spectrum {
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn frame(&self) -> &[Vec<f64>] {
        &self.frame
    }

    pub fn lambda_min(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn lambda_max(&self) -> f64 {
        *self.eigenvalues.last().expect("nonempty spectrum")
    }

    /// Rebuilds `sum_i lambda_i v_i v_i^T`, mainly for residual checks.
    pub fn reconstruct(&self) -> SymmetricMatrix {
        let n = self.eigenvalues.len();
        let mut entries = vec![0.0; n * n];
        for (lambda, v) in self.eigenvalues.iter().zip(&self.frame) {
            for i in 0..n {
                for j in 0..n {
                    entries[i * n + j] += lambda * v[i] * v[j];
                }
            }
        }
        SymmetricMatrix::new(n, entries).expect("reconstruction is finite")
    }
}

/// Full eigendecomposition by cyclic Jacobi rotations.
///
/// Sweeps run until the off-diagonal Frobenius norm drops below
/// `1e-12 * ||M||_F`; the result is sorted ascending with a stable
/// permutation, so repeated eigenvalues keep the order Jacobi produced.
pub fn eigen_decompose(m: &SymmetricMatrix) -> Result<Spectrum> {
    let n = m.dim;
    let mut a = m.entries.clone();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }

    let scale = m.frobenius_norm();
    if scale > 0.0 && n > 1 {
        let target = OFF_NORM_FACTOR * scale;
        let mut converged = false;
        for _ in 0..MAX_JACOBI_SWEEPS {
            if off_norm(&a, n) <= target {
                converged = true;
                break;
            }
            for p in 0..n - 1 {
                for q in (p + 1)..n {
                    jacobi_rotate(&mut a, &mut v, n, p, q);
                }
            }
        }
        if !converged && off_norm(&a, n) > target {
            return Err(Error::Numerical("jacobi sweep did not converge".into()));
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        a[i * n + i]
            .partial_cmp(&a[j * n + j])
            .expect("finite eigenvalues")
    });

    let eigenvalues = order.iter().map(|&i| a[i * n + i]).collect();
    let frame = order
        .iter()
        .map(|&col| (0..n).map(|row| v[row * n + col]).collect())
        .collect();
    Ok(Spectrum { eigenvalues, frame })
}

fn off_norm(a: &[f64], n: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            s += 2.0 * a[i * n + j] * a[i * n + j];
        }
    }
    s.sqrt()
}

fn jacobi_rotate(a: &mut [f64], v: &mut [f64], n: usize, p: usize, q: usize) {
    let apq = a[p * n + q];
    if apq == 0.0 {
        return;
    }
    let app = a[p * n + p];
    let aqq = a[q * n + q];
    let theta = (aqq - app) / (2.0 * apq);
    // Smaller-angle root of t^2 + 2 t theta - 1 = 0.
    let t = if theta >= 0.0 {
        1.0 / (theta + (1.0 + theta * theta).sqrt())
    } else {
        -1.0 / (-theta + (1.0 + theta * theta).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;
    let tau = s / (1.0 + c);

    a[p * n + p] = app - t * apq;
    a[q * n + q] = aqq + t * apq;
    a[p * n + q] = 0.0;
    a[q * n + p] = 0.0;
    for k in 0..n {
        if k != p && k != q {
            let akp = a[k * n + p];
            let akq = a[k * n + q];
            let new_kp = akp - s * (akq + tau * akp);
            let new_kq = akq + s * (akp - tau * akq);
            a[k * n + p] = new_kp;
            a[p * n + k] = new_kp;
            a[k * n + q] = new_kq;
            a[q * n + k] = new_kq;
        }
    }
    for k in 0..n {
        let vkp = v[k * n + p];
        let vkq = v[k * n + q];
        v[k * n + p] = vkp - s * (vkq + tau * vkp);
        v[k * n + q] = vkq + s * (vkp - tau * vkq);
    }
}

/// Loewner order test: `X <= Y` up to `tol`, i.e. `lambda_1(Y - X) >= -tol`.
pub fn loewner_leq(x: &SymmetricMatrix, y: &SymmetricMatrix, tol: f64) -> Result<bool> {
    let diff = y.sub(x)?;
    Ok(eigen_decompose(&diff)?.lambda_min() >= -tol)
}

/// Sampled Courant-Fischer upper bound for the k-th ascending eigenvalue.
///
/// Draws `samples` random k-dimensional subspaces (orthonormalized Gaussian
/// frames) and returns the smallest observed maximal Rayleigh quotient. The
/// result is always an upper bound for `lambda_k(M)` and tightens as the
/// sample count grows. `k = N` short-circuits: the whole space is the only
/// N-dimensional subspace.
pub fn courant_fischer_upper(
    m: &SymmetricMatrix,
    k: usize,
    samples: usize,
    seed: u64,
) -> Result<f64> {
    let n = m.dim;
    if k == 0 || k > n {
        return Err(Error::InvalidInput(format!(
            "eigenvalue index k = {k} out of range 1..={n}"
        )));
    }
    if samples == 0 {
        return Err(Error::InvalidInput("samples must be >= 1".into()));
    }
    if k == n {
        return Ok(eigen_decompose(m)?.lambda_max());
    }

    let mut rng = sampling::rng_for(seed, 0);
    let mut best = f64::INFINITY;
    for _ in 0..samples {
        let basis = loop {
            let cand: Vec<Vec<f64>> = (0..k).map(|_| sampling::gaussian_vector(n, &mut rng)).collect();
            if let Some(b) = sampling::orthonormalize(&cand) {
                break b;
            }
        };
        // Projected matrix B = V^T M V in the sampled basis.
        let mut b = vec![0.0; k * k];
        for (i, vi) in basis.iter().enumerate() {
            let mvi = m.mul_vec(vi);
            for (j, vj) in basis.iter().enumerate().take(i + 1) {
                let dot: f64 = vj.iter().zip(&mvi).map(|(a, b)| a * b).sum();
                b[i * k + j] = dot;
                b[j * k + i] = dot;
            }
        }
        let projected = SymmetricMatrix::new(k, b)?;
        best = best.min(eigen_decompose(&projected)?.lambda_max());
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_finite_entries() {
        let err = SymmetricMatrix::new(2, vec![1.0, f64::NAN, 0.0, 1.0]).unwrap_err();
        assert!(matches!(err, Error::InvalidInput(_)));
    }

    #[test]
    fn construction_symmetrizes_exactly() {
        let m = SymmetricMatrix::new(2, vec![1.0, 0.3, 0.7, 2.0]).unwrap();
        assert_eq!(m.get(0, 1), m.get(1, 0));
        assert_eq!(m.get(0, 1), 0.5);
    }

    #[test]
    fn identity_eigenvalues() {
        let spectrum = eigen_decompose(&SymmetricMatrix::identity(3)).unwrap();
        assert_eq!(spectrum.eigenvalues(), &[1.0, 1.0, 1.0]);
    }

    #[test]
    fn diagonal_matrix_sorts_ascending() {
        let m = SymmetricMatrix::from_diagonal(&[3.0, -1.0, 2.0]).unwrap();
        let spectrum = eigen_decompose(&m).unwrap();
        assert_eq!(spectrum.eigenvalues(), &[-1.0, 2.0, 3.0]);
    }

    #[test]
    fn conjugated_diagonal_recovers_eigenvalues() {
        let mut rng = sampling::rng_for(7, 0);
        let q = sampling::random_orthogonal(3, &mut rng);
        let d = SymmetricMatrix::from_diagonal(&[-1.0, 0.0, 2.0]).unwrap();
        let m = d.conjugate(&q).unwrap();
        let eigs = eigen_decompose(&m).unwrap();
        for (got, want) in eigs.eigenvalues().iter().zip([-1.0, 0.0, 2.0]) {
            assert!((got - want).abs() <= 1e-10, "got {got}, want {want}");
        }
    }

    #[test]
    fn loewner_reflexive_and_psd() {
        let x = SymmetricMatrix::from_diagonal(&[1.0, -2.0]).unwrap();
        assert!(loewner_leq(&x, &x, 0.0).unwrap());
        let zero = SymmetricMatrix::zeros(3);
        let id = SymmetricMatrix::identity(3);
        assert!(loewner_leq(&zero, &id, 0.0).unwrap());
    }

    #[test]
    fn loewner_detects_negative_direction() {
        let x = SymmetricMatrix::zeros(2);
        let y = SymmetricMatrix::from_diagonal(&[1.0, -0.5]).unwrap();
        assert!(!loewner_leq(&x, &y, 0.0).unwrap());
    }

    #[test]
    fn loewner_dimension_mismatch() {
        let x = SymmetricMatrix::zeros(2);
        let y = SymmetricMatrix::zeros(3);
        assert!(matches!(
            loewner_leq(&x, &y, 0.0),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn courant_fischer_top_index_is_exact() {
        let m = SymmetricMatrix::from_diagonal(&[1.0, 2.0, 3.0]).unwrap();
        let value = courant_fischer_upper(&m, 3, 5, 0).unwrap();
        assert_eq!(value, 3.0);
    }

    #[test]
    fn courant_fischer_identity_k1() {
        let value = courant_fischer_upper(&SymmetricMatrix::identity(3), 1, 50, 1).unwrap();
        assert!((value - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn courant_fischer_middle_eigenvalue_bound() {
        let m = SymmetricMatrix::from_diagonal(&[1.0, 2.0, 3.0]).unwrap();
        let value = courant_fischer_upper(&m, 2, 10_000, 42).unwrap();
        assert!(value >= 2.0 - 1e-9, "below lambda_2: {value}");
        assert!(value <= 2.05, "too loose: {value}");
    }

    #[test]
    fn courant_fischer_rejects_bad_index() {
        let m = SymmetricMatrix::identity(3);
        assert!(courant_fischer_upper(&m, 0, 10, 0).is_err());
        assert!(courant_fischer_upper(&m, 4, 10, 0).is_err());
    }

    #[test]
    fn determinism_identical_input() {
        let m = SymmetricMatrix::new(
            3,
            vec![0.3, -0.2, 0.9, -0.2, 1.4, 0.05, 0.9, 0.05, -0.7],
        )
        .unwrap();
        let a = eigen_decompose(&m).unwrap();
        let b = eigen_decompose(&m).unwrap();
        assert_eq!(a.eigenvalues(), b.eigenvalues());
        assert_eq!(a.frame(), b.frame());
    }
}
