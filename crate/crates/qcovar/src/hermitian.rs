//! Hermitian matrix algebra over the real Hilbert space H_n of n×n complex
//! Hermitian matrices with inner product ⟨A, B⟩ = Tr AB.
//!
//! H_n has real dimension n². The module fixes one orthonormal basis of H_n
//! and uses it everywhere real coordinates are needed (rank decisions,
//! null-space searches, reproducible output). The canonical order is:
//!
//! 1. the normalized identity I/√n,
//! 2. symmetric pair elements (E_jk + E_kj)/√2 for j < k, row-major,
//! 3. antisymmetric pair elements (-i·E_jk + i·E_kj)/√2 for j < k, row-major,
//! 4. diagonal elements diag(1, …, 1, -l, 0, …, 0)/√(l(l+1)) for l = 1 … n-1
//!    (l leading ones).
//!
//! Entries 2–4 are the generalized Gell-Mann matrices up to the √2
//! normalization; together with the identity they make the coordinate map an
//! isometry: ⟨vec A, vec B⟩ = Tr AB.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Dense complex matrix used as the underlying storage and for non-Hermitian
/// intermediates (products of Hermitians are generally not Hermitian).
pub type ComplexMatrix = DMatrix<Complex64>;

/// An n×n complex matrix equal to its conjugate transpose.
///
/// The stored form is exactly Hermitian: construction symmetrizes
/// `(A + A†)/2`, which forces diagonal imaginary parts to exactly zero and
/// off-diagonal entries into exact conjugate pairs. Values are immutable
/// after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    data: ComplexMatrix,
}

impl HermitianMatrix {
    /// Validate and symmetrize a complex matrix.
    ///
    /// Fails if the matrix is not square or if any entry deviates from the
    /// conjugate of its transpose partner by more than `herm_tol`.
    pub fn new(data: ComplexMatrix, herm_tol: f64) -> Result<Self> {
        if data.nrows() != data.ncols() {
            return Err(Error::NotSquare {
                rows: data.nrows(),
                cols: data.ncols(),
            });
        }
        let n = data.nrows();
        let mut residual = 0.0_f64;
        for i in 0..n {
            for j in i..n {
                let d = data[(i, j)] - data[(j, i)].conj();
                residual = residual.max(d.norm());
            }
        }
        if residual > herm_tol {
            return Err(Error::NotHermitian {
                residual,
                tolerance: herm_tol,
            });
        }
        let sym = (&data + data.adjoint()).map(|z| z * 0.5);
        Ok(Self { data: sym })
    }

    /// Internal constructor for matrices that are Hermitian by construction
    /// (sums/scalings of Hermitians, basis elements). Symmetrizes anyway so
    /// the stored-form guarantee always holds.
    pub(crate) fn symmetrized(data: ComplexMatrix) -> Self {
        debug_assert_eq!(data.nrows(), data.ncols());
        let sym = (&data + data.adjoint()).map(|z| z * 0.5);
        Self { data: sym }
    }

    /// Build from a real symmetric matrix.
    pub fn from_real(data: DMatrix<f64>, herm_tol: f64) -> Result<Self> {
        Self::new(data.map(|x| Complex64::new(x, 0.0)), herm_tol)
    }

    /// Real diagonal matrix.
    pub fn from_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        Self {
            data: ComplexMatrix::from_fn(n, n, |i, j| {
                if i == j {
                    Complex64::new(diag[i], 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            }),
        }
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            data: ComplexMatrix::zeros(n, n),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            data: ComplexMatrix::identity(n, n),
        }
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn data(&self) -> &ComplexMatrix {
        &self.data
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        self.data[(i, j)]
    }

    /// Trace; exactly real because the stored diagonal is real.
    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.data[(i, i)].re).sum()
    }

    /// Tr(AB) for Hermitian A, B. Real by symmetry: the imaginary parts of
    /// A_ij·conj(B_ij) cancel pairwise, so only the real parts are summed.
    pub fn trace_product(&self, other: &HermitianMatrix) -> f64 {
        assert_eq!(self.dim(), other.dim(), "trace_product: dimension mismatch");
        let mut acc = 0.0;
        for j in 0..self.dim() {
            for i in 0..self.dim() {
                let a = self.data[(i, j)];
                let b = other.data[(i, j)];
                acc += a.re * b.re + a.im * b.im;
            }
        }
        acc
    }

    /// Matrix product; the result is generally not Hermitian.
    pub fn product(&self, other: &HermitianMatrix) -> ComplexMatrix {
        &self.data * &other.data
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.norm()
    }

    /// Frobenius distance to another Hermitian of the same dimension.
    pub fn distance(&self, other: &HermitianMatrix) -> f64 {
        (&self.data - &other.data).norm()
    }

    pub fn scale(&self, factor: f64) -> HermitianMatrix {
        HermitianMatrix {
            data: self.data.map(|z| z * factor),
        }
    }

    pub fn add(&self, other: &HermitianMatrix) -> HermitianMatrix {
        HermitianMatrix {
            data: &self.data + &other.data,
        }
    }

    pub fn sub(&self, other: &HermitianMatrix) -> HermitianMatrix {
        HermitianMatrix {
            data: &self.data - &other.data,
        }
    }

    /// A - t·I.
    pub fn shift_identity(&self, t: f64) -> HermitianMatrix {
        let mut data = self.data.clone();
        for i in 0..self.dim() {
            data[(i, i)] -= Complex64::new(t, 0.0);
        }
        HermitianMatrix { data }
    }

    /// Eigendecomposition with eigenvalues sorted in descending order and a
    /// deterministic eigenvector phase: the largest-modulus component of each
    /// column is made real and positive.
    pub fn eigh(&self) -> (DVector<f64>, ComplexMatrix) {
        let n = self.dim();
        let se = self.data.clone().symmetric_eigen();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| {
            se.eigenvalues[b]
                .partial_cmp(&se.eigenvalues[a])
                .expect("eigenvalues of a Hermitian matrix are finite")
        });
        let values = DVector::from_iterator(n, order.iter().map(|&i| se.eigenvalues[i]));
        let mut vectors = ComplexMatrix::zeros(n, n);
        for (dst, &src) in order.iter().enumerate() {
            let mut col = se.eigenvectors.column(src).clone_owned();
            let mut best = 0;
            for i in 1..n {
                if col[i].norm_sqr() > col[best].norm_sqr() {
                    best = i;
                }
            }
            let pivot = col[best];
            let modulus = pivot.norm();
            if modulus > 0.0 {
                let phase = pivot / modulus;
                col *= phase.conj();
            }
            vectors.set_column(dst, &col);
        }
        (values, vectors)
    }

    /// Smallest eigenvalue.
    pub fn min_eigenvalue(&self) -> f64 {
        self.data
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .fold(f64::INFINITY, |m, &v| m.min(v))
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.data
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .fold(f64::NEG_INFINITY, |m, &v| m.max(v))
    }
}

/// λ_min(A) ≥ -psd_tol.
pub fn is_psd(a: &HermitianMatrix, psd_tol: f64) -> bool {
    a.min_eigenvalue() >= -psd_tol
}

/// Real coordinates of a Hermitian matrix in the fixed orthonormal basis of
/// H_n. The map is an isometry: dot products of coordinates equal trace
/// inner products of the sources.
#[derive(Debug, Clone, PartialEq)]
pub struct RealCoordinates {
    dim: usize,
    coords: DVector<f64>,
}

impl RealCoordinates {
    /// Wrap a raw coordinate vector; the length must be dim².
    pub fn from_vector(dim: usize, coords: DVector<f64>) -> Result<Self> {
        if coords.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: coords.len(),
            });
        }
        Ok(Self { dim, coords })
    }

    pub(crate) fn from_parts(dim: usize, coords: DVector<f64>) -> Self {
        debug_assert_eq!(coords.len(), dim * dim);
        Self { dim, coords }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Length n² coordinate vector.
    pub fn coords(&self) -> &DVector<f64> {
        &self.coords
    }

    pub fn dot(&self, other: &RealCoordinates) -> f64 {
        assert_eq!(self.dim, other.dim, "coordinate dimension mismatch");
        self.coords.dot(&other.coords)
    }

    pub fn norm(&self) -> f64 {
        self.coords.norm()
    }
}

const SQRT_2: f64 = std::f64::consts::SQRT_2;

/// Index of the pair (j, k), j < k, in row-major pair order.
fn pair_index(n: usize, j: usize, k: usize) -> usize {
    j * n - j * (j + 1) / 2 + (k - j - 1)
}

/// Coordinates of `a` in the canonical orthonormal basis of H_n.
pub fn vectorize(a: &HermitianMatrix) -> RealCoordinates {
    let n = a.dim();
    let pairs = n * (n - 1) / 2;
    let mut coords = DVector::zeros(n * n);
    coords[0] = a.trace() / (n as f64).sqrt();
    for j in 0..n {
        for k in (j + 1)..n {
            let idx = pair_index(n, j, k);
            let e = a.entry(j, k);
            coords[1 + idx] = SQRT_2 * e.re;
            coords[1 + pairs + idx] = -SQRT_2 * e.im;
        }
    }
    for l in 1..n {
        let norm = (l as f64 * (l as f64 + 1.0)).sqrt();
        let mut v = 0.0;
        for m in 0..l {
            v += a.entry(m, m).re;
        }
        v -= l as f64 * a.entry(l, l).re;
        coords[1 + 2 * pairs + (l - 1)] = v / norm;
    }
    RealCoordinates {
        dim: n,
        coords,
    }
}

/// Inverse of [`vectorize`].
pub fn devectorize(c: &RealCoordinates) -> HermitianMatrix {
    let n = c.dim;
    let pairs = n * (n - 1) / 2;
    let coords = &c.coords;
    let mut data = ComplexMatrix::zeros(n, n);
    let id_coeff = coords[0] / (n as f64).sqrt();
    for m in 0..n {
        data[(m, m)] = Complex64::new(id_coeff, 0.0);
    }
    for j in 0..n {
        for k in (j + 1)..n {
            let idx = pair_index(n, j, k);
            let re = coords[1 + idx] / SQRT_2;
            let im = -coords[1 + pairs + idx] / SQRT_2;
            data[(j, k)] = Complex64::new(re, im);
            data[(k, j)] = Complex64::new(re, -im);
        }
    }
    for l in 1..n {
        let coeff = coords[1 + 2 * pairs + (l - 1)] / (l as f64 * (l as f64 + 1.0)).sqrt();
        for m in 0..l {
            data[(m, m)] += Complex64::new(coeff, 0.0);
        }
        data[(l, l)] -= Complex64::new(l as f64 * coeff, 0.0);
    }
    HermitianMatrix { data }
}

/// The canonical orthonormal basis of H_n, materialized in order.
pub fn orthonormal_basis(n: usize) -> Vec<HermitianMatrix> {
    let mut basis = Vec::with_capacity(n * n);
    let id_coeff = 1.0 / (n as f64).sqrt();
    basis.push(HermitianMatrix::from_diagonal(&vec![id_coeff; n]));
    for j in 0..n {
        for k in (j + 1)..n {
            let mut data = ComplexMatrix::zeros(n, n);
            data[(j, k)] = Complex64::new(1.0 / SQRT_2, 0.0);
            data[(k, j)] = Complex64::new(1.0 / SQRT_2, 0.0);
            basis.push(HermitianMatrix { data });
        }
    }
    for j in 0..n {
        for k in (j + 1)..n {
            let mut data = ComplexMatrix::zeros(n, n);
            data[(j, k)] = Complex64::new(0.0, -1.0 / SQRT_2);
            data[(k, j)] = Complex64::new(0.0, 1.0 / SQRT_2);
            basis.push(HermitianMatrix { data });
        }
    }
    for l in 1..n {
        let norm = (l as f64 * (l as f64 + 1.0)).sqrt();
        let mut diag = vec![0.0; n];
        diag[..l].fill(1.0 / norm);
        diag[l] = -(l as f64) / norm;
        basis.push(HermitianMatrix::from_diagonal(&diag));
    }
    basis
}

/// Stack the coordinate vectors of `mats` as rows of an m×n² real matrix.
pub(crate) fn stacked_coordinates(mats: &[HermitianMatrix]) -> Result<DMatrix<f64>> {
    let n = match mats.first() {
        Some(m) => m.dim(),
        None => return Err(Error::EmptyTuple),
    };
    for m in mats {
        if m.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: m.dim(),
            });
        }
    }
    let mut stacked = DMatrix::zeros(mats.len(), n * n);
    for (row, m) in mats.iter().enumerate() {
        stacked.set_row(row, &vectorize(m).coords.transpose());
    }
    Ok(stacked)
}

/// Rank of the real linear span of `mats` inside H_n: the number of singular
/// values of the stacked coordinate matrix above `rank_tol * sigma_max`.
pub fn real_span_rank(mats: &[HermitianMatrix], rank_tol: f64) -> Result<usize> {
    let stacked = stacked_coordinates(mats)?;
    Ok(matrix_rank(&stacked, rank_tol))
}

/// Numerical rank of a real matrix by singular values.
pub(crate) fn matrix_rank(m: &DMatrix<f64>, rank_tol: f64) -> usize {
    let sv = m.clone().singular_values();
    let sigma_max = sv.iter().fold(0.0_f64, |a, &b| a.max(b));
    if sigma_max <= 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rank_tol * sigma_max).count()
}

/// Rank and (when rank-deficient) a deterministic unit vector from the null
/// space of `m`: the right singular vector of the smallest singular value,
/// with its largest-magnitude coordinate made positive.
pub(crate) fn rank_and_null_vector(
    m: &DMatrix<f64>,
    rank_tol: f64,
) -> (usize, Option<DVector<f64>>) {
    let cols = m.ncols();
    // Zero-row padding to a square matrix makes the thin SVD return the full
    // right singular basis, null space included.
    let padded = if m.nrows() < cols {
        let mut p = DMatrix::zeros(cols, cols);
        p.view_mut((0, 0), (m.nrows(), cols)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = padded.svd(false, true);
    let v_t = svd
        .v_t
        .expect("SVD with compute_v = true always returns V^T");
    let sv = &svd.singular_values;
    let sigma_max = sv.iter().fold(0.0_f64, |a, &b| a.max(b));
    let rank = if sigma_max <= 0.0 {
        0
    } else {
        sv.iter().filter(|&&s| s > rank_tol * sigma_max).count()
    };
    if rank >= cols {
        return (rank, None);
    }
    // Singular values come back sorted in descending order, so the last row
    // of V^T belongs to the smallest one.
    let mut null = v_t.row(cols - 1).transpose();
    let mut best = 0;
    for i in 1..cols {
        if null[i].abs() > null[best].abs() {
            best = i;
        }
    }
    if null[best] < 0.0 {
        null.neg_mut();
    }
    let norm = null.norm();
    if norm > 0.0 {
        null /= norm;
    }
    (rank, Some(null))
}
