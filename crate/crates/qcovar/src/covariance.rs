//! The covariance matrix Var_D(X)_{ij} = Tr(D·X_i·X_j) − Tr(D·X_i)·Tr(D·X_j)
//! of an observable tuple in a state D, the centering transform that makes
//! every expectation Tr(D·X_i) vanish, the semi-inner product
//! ⟨A, B⟩_D = Tr(D·A·B) behind its positivity, and the rank-one defect that
//! measures how far Var fails to be affine along a segment of densities.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::density::{mix, Density, ObservableTuple};
use crate::error::{Error, Result};
use crate::hermitian::{ComplexMatrix, HermitianMatrix};

/// A k×k Hermitian, positive semidefinite matrix of covariances.
///
/// Off-diagonal entries are genuinely complex: Tr(D·X_i·X_j) need not be
/// real when X_i and X_j do not commute. `real_part` discards the imaginary
/// parts for callers that want a real symmetric summary.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    entries: ComplexMatrix,
}

impl CovarianceMatrix {
    pub(crate) fn from_entries(entries: ComplexMatrix) -> Self {
        debug_assert_eq!(entries.nrows(), entries.ncols());
        let sym = (&entries + entries.adjoint()).map(|z| z * 0.5);
        Self { entries: sym }
    }

    pub fn size(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &ComplexMatrix {
        &self.entries
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        self.entries[(i, j)]
    }

    /// Entrywise real parts. Imaginary parts are discarded; they carry the
    /// antisymmetric (commutator) half of the covariances.
    pub fn real_part(&self) -> DMatrix<f64> {
        self.entries.map(|z| z.re)
    }

    pub fn as_hermitian(&self) -> HermitianMatrix {
        HermitianMatrix::symmetrized(self.entries.clone())
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.as_hermitian().min_eigenvalue()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.norm()
    }

    /// Frobenius norm of the entrywise difference.
    pub fn distance(&self, other: &CovarianceMatrix) -> f64 {
        (&self.entries - &other.entries).norm()
    }

    /// Entrywise Σ wᵢ·Cᵢ, used for additivity residuals.
    pub fn weighted_sum(weights: &[f64], parts: &[CovarianceMatrix]) -> CovarianceMatrix {
        assert_eq!(weights.len(), parts.len());
        let k = parts[0].size();
        let mut acc = ComplexMatrix::zeros(k, k);
        for (w, p) in weights.iter().zip(parts) {
            acc += p.entries.map(|z| z * Complex64::new(*w, 0.0));
        }
        CovarianceMatrix::from_entries(acc)
    }
}

/// Expectation values Tr(D·X_i), one per observable.
pub fn expectation_values(d: &Density, x: &ObservableTuple) -> Result<Vec<f64>> {
    if d.dim() != x.dim() {
        return Err(Error::DimensionMismatch {
            expected: d.dim(),
            found: x.dim(),
        });
    }
    Ok(x.observables()
        .iter()
        .map(|xi| d.matrix().trace_product(xi))
        .collect())
}

/// Tr(D·A·B) as a complex number. Real and nonnegative when A = B.
pub fn semi_inner(d: &Density, a: &HermitianMatrix, b: &HermitianMatrix) -> Result<Complex64> {
    if d.dim() != a.dim() || d.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: d.dim(),
            found: if a.dim() != d.dim() { a.dim() } else { b.dim() },
        });
    }
    let ab = a.product(b);
    let n = d.dim();
    let mut acc = Complex64::new(0.0, 0.0);
    for r in 0..n {
        for s in 0..n {
            acc += d.data()[(r, s)] * ab[(s, r)];
        }
    }
    Ok(acc)
}

/// Var_D(X): entry (i, j) is Tr(D·X_i·X_j) − Tr(D·X_i)·Tr(D·X_j).
pub fn covariance(d: &Density, x: &ObservableTuple) -> Result<CovarianceMatrix> {
    if d.dim() != x.dim() {
        return Err(Error::DimensionMismatch {
            expected: d.dim(),
            found: x.dim(),
        });
    }
    let n = d.dim();
    let k = x.len();
    let means = expectation_values(d, x)?;
    // rows of D·X_i, reused across j
    let products: Vec<ComplexMatrix> = x
        .observables()
        .iter()
        .map(|xi| d.data() * xi.data())
        .collect();
    let mut entries = ComplexMatrix::zeros(k, k);
    for i in 0..k {
        for j in 0..k {
            let mut second = Complex64::new(0.0, 0.0);
            let xj = x.get(j).data();
            for r in 0..n {
                for s in 0..n {
                    second += products[i][(r, s)] * xj[(s, r)];
                }
            }
            entries[(i, j)] = second - Complex64::new(means[i] * means[j], 0.0);
        }
    }
    Ok(CovarianceMatrix::from_entries(entries))
}

/// Replace each X_i by X_i − Tr(D·X_i)·I, so every expectation in state D
/// vanishes; the covariance is unchanged. Returns the shifts applied.
///
/// Centering can introduce real-linear dependence even when the input tuple
/// is independent (two observables differing by a multiple of the identity
/// collapse onto each other), so the returned tuple is not re-validated;
/// consumers that require independence reduce it first.
pub fn center(d: &Density, x: &ObservableTuple) -> Result<(ObservableTuple, Vec<f64>)> {
    let shifts = expectation_values(d, x)?;
    let shifted: Vec<HermitianMatrix> = x
        .observables()
        .iter()
        .zip(&shifts)
        .map(|(xi, &s)| xi.shift_identity(s))
        .collect();
    Ok((ObservableTuple::from_observables_unchecked(shifted), shifts))
}

/// Var_{λD₁+(1−λ)D₂}(X) − λ·Var_{D₁}(X) − (1−λ)·Var_{D₂}(X).
///
/// Always PSD of rank ≤ 1: it equals λ(1−λ)·vvᵀ with v_i = Tr((D₁−D₂)·X_i),
/// and vanishes exactly when both densities give X identical expectations.
pub fn concavity_defect(
    d1: &Density,
    d2: &Density,
    lambda: f64,
    x: &ObservableTuple,
) -> Result<CovarianceMatrix> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::InvalidParameter(format!(
            "mixing weight must lie in [0, 1], got {lambda}"
        )));
    }
    if d1.dim() != d2.dim() {
        return Err(Error::DimensionMismatch {
            expected: d1.dim(),
            found: d2.dim(),
        });
    }
    let mixed = mix(d1, lambda, d2, 1.0 - lambda);
    let var_mixed = covariance(&mixed, x)?;
    let var_1 = covariance(d1, x)?;
    let var_2 = covariance(d2, x)?;
    let k = x.len();
    let mut entries = ComplexMatrix::zeros(k, k);
    for i in 0..k {
        for j in 0..k {
            entries[(i, j)] = var_mixed.entry(i, j)
                - var_1.entry(i, j) * lambda
                - var_2.entry(i, j) * (1.0 - lambda);
        }
    }
    Ok(CovarianceMatrix::from_entries(entries))
}

/// Whether every expectation |Tr(D·X_i)| is at most `membership_tol`.
pub fn in_feasible_set(d: &Density, x: &ObservableTuple, membership_tol: f64) -> bool {
    assert_eq!(
        d.dim(),
        x.dim(),
        "in_feasible_set: dimension mismatch between density and observables"
    );
    x.observables()
        .iter()
        .all(|xi| d.matrix().trace_product(xi).abs() <= membership_tol)
}

/// Largest |Tr(D·X_i)| over the tuple; 0 means exact membership.
pub fn membership_residual(d: &Density, x: &ObservableTuple) -> f64 {
    x.observables()
        .iter()
        .map(|xi| d.matrix().trace_product(xi).abs())
        .fold(0.0, f64::max)
}
