//! Density matrices (Hermitian, PSD, unit trace), their low-rank
//! factorizations D = YY*, and ordered tuples of independent observables.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hermitian::{
    real_span_rank, vectorize, ComplexMatrix, HermitianMatrix, RealCoordinates,
};
use crate::tolerance::Tolerances;

/// A validated density matrix: Hermitian, positive semidefinite, unit trace.
///
/// Construction projects inputs that are within tolerance onto the exact
/// shape (symmetrized, eigenvalues clamped to ≥ 0, trace renormalized), but
/// leaves inputs that already have the exact shape bit-for-bit untouched:
/// no eigendecomposition round-trip happens unless a negative eigenvalue
/// actually needs clamping, and no rescaling unless the trace differs
/// from 1.
#[derive(Debug, Clone, PartialEq)]
pub struct Density {
    matrix: HermitianMatrix,
}

impl Density {
    /// Validate and store a density matrix.
    pub fn new(data: ComplexMatrix, tol: &Tolerances) -> Result<Self> {
        let h = HermitianMatrix::new(data, tol.herm)?;
        let trace = h.trace();
        if (trace - 1.0).abs() > tol.trace {
            return Err(Error::TraceNotOne {
                trace,
                tolerance: tol.trace,
            });
        }
        let min_eig = h.min_eigenvalue();
        if min_eig < -tol.psd {
            return Err(Error::NotPositiveSemidefinite {
                min_eigenvalue: min_eig,
                tolerance: tol.psd,
            });
        }
        let mut matrix = if min_eig < 0.0 {
            let (vals, vecs) = h.eigh();
            reconstruct_clamped(&vals.iter().map(|&v| v.max(0.0)).collect::<Vec<_>>(), &vecs)
        } else {
            h
        };
        let trace = matrix.trace();
        if trace != 1.0 {
            matrix = matrix.scale(1.0 / trace);
        }
        Ok(Self { matrix })
    }

    /// Build from a Hermitian matrix that is PSD and unit-trace by
    /// construction (convex combinations of existing densities).
    pub(crate) fn from_hermitian_unchecked(matrix: HermitianMatrix) -> Self {
        Self { matrix }
    }

    /// Build a density whose small eigenvalues are forced to exact zero.
    ///
    /// Split endpoints are singular in exact arithmetic but carry O(τ)
    /// eigenvalue noise in floating point; zeroing |λ| < τ_rank · λ_max
    /// before renormalizing keeps ranks crisp across recursion levels.
    pub fn new_clamped(data: ComplexMatrix, tol: &Tolerances) -> Result<Self> {
        let h = HermitianMatrix::new(data, tol.herm)?;
        let trace = h.trace();
        if (trace - 1.0).abs() > tol.trace {
            return Err(Error::TraceNotOne {
                trace,
                tolerance: tol.trace,
            });
        }
        let (vals, vecs) = h.eigh();
        let lambda_max = vals[0];
        if lambda_max <= 0.0 {
            return Err(Error::ZeroMatrix);
        }
        let min_eig = vals[vals.len() - 1];
        if min_eig < -tol.psd {
            return Err(Error::NotPositiveSemidefinite {
                min_eigenvalue: min_eig,
                tolerance: tol.psd,
            });
        }
        let clamped: Vec<f64> = vals
            .iter()
            .map(|&v| if v.abs() < tol.rank * lambda_max { 0.0 } else { v.max(0.0) })
            .collect();
        let total: f64 = clamped.iter().sum();
        let normalized: Vec<f64> = clamped.iter().map(|&v| v / total).collect();
        Ok(Self {
            matrix: reconstruct_clamped(&normalized, &vecs),
        })
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn matrix(&self) -> &HermitianMatrix {
        &self.matrix
    }

    pub fn data(&self) -> &ComplexMatrix {
        self.matrix.data()
    }

    /// Numerical rank: eigenvalues above τ_rank · λ_max.
    pub fn rank(&self, rank_tol: f64) -> usize {
        let (vals, _) = self.matrix.eigh();
        let lambda_max = vals[0];
        if lambda_max <= 0.0 {
            return 0;
        }
        vals.iter().filter(|&&v| v > rank_tol * lambda_max).count()
    }

    /// Eigendecompose and keep the numerically nonzero part: D = YY* with
    /// Y = U_r · diag(√λ_i), columns ordered by descending eigenvalue.
    pub fn factor(&self, rank_tol: f64) -> Result<FactoredDensity> {
        let n = self.dim();
        let (vals, vecs) = self.matrix.eigh();
        let lambda_max = vals[0];
        if lambda_max <= 0.0 {
            return Err(Error::ZeroMatrix);
        }
        let r = vals.iter().filter(|&&v| v > rank_tol * lambda_max).count();
        let mut y = ComplexMatrix::zeros(n, r);
        for col in 0..r {
            let s = vals[col].sqrt();
            let src = vecs.column(col);
            for row in 0..n {
                y[(row, col)] = src[row] * s;
            }
        }
        Ok(FactoredDensity { y })
    }
}

fn reconstruct_clamped(vals: &[f64], vecs: &ComplexMatrix) -> HermitianMatrix {
    let n = vecs.nrows();
    let mut acc = ComplexMatrix::zeros(n, n);
    for (i, &v) in vals.iter().enumerate() {
        if v == 0.0 {
            continue;
        }
        let col = vecs.column(i);
        for a in 0..n {
            for b in 0..n {
                acc[(a, b)] += col[a] * col[b].conj() * v;
            }
        }
    }
    HermitianMatrix::symmetrized(acc)
}

/// A rank-revealing factorization D = YY* with Y of full column rank r.
#[derive(Debug, Clone, PartialEq)]
pub struct FactoredDensity {
    y: ComplexMatrix,
}

impl FactoredDensity {
    /// Validate an externally supplied factor: full column rank and unit
    /// trace of YY* (i.e. Tr Y*Y = 1).
    pub fn from_factor(y: ComplexMatrix, tol: &Tolerances) -> Result<Self> {
        if y.ncols() == 0 || y.nrows() == 0 {
            return Err(Error::ZeroMatrix);
        }
        if y.ncols() > y.nrows() {
            return Err(Error::InvalidParameter(format!(
                "factor is {}x{}: more columns than rows cannot have full column rank",
                y.nrows(),
                y.ncols()
            )));
        }
        let sv = y.clone().singular_values();
        let s_max = sv.iter().fold(0.0_f64, |a, &b| a.max(b));
        let s_min = sv.iter().fold(f64::INFINITY, |a, &b| a.min(b));
        if s_max <= 0.0 || s_min <= tol.rank * s_max {
            return Err(Error::InvalidParameter(format!(
                "factor is column-rank deficient: sigma_min/sigma_max = {:.3e}",
                if s_max > 0.0 { s_min / s_max } else { 0.0 }
            )));
        }
        let trace: f64 = sv.iter().map(|&s| s * s).sum();
        if (trace - 1.0).abs() > tol.trace {
            return Err(Error::TraceNotOne {
                trace,
                tolerance: tol.trace,
            });
        }
        Ok(Self { y })
    }

    pub(crate) fn from_columns_unchecked(y: ComplexMatrix) -> Self {
        Self { y }
    }

    pub fn dim(&self) -> usize {
        self.y.nrows()
    }

    pub fn rank(&self) -> usize {
        self.y.ncols()
    }

    pub fn factor_matrix(&self) -> &ComplexMatrix {
        &self.y
    }

    /// Reconstruct D = YY*.
    pub fn density(&self) -> Density {
        Density {
            matrix: HermitianMatrix::symmetrized(&self.y * self.y.adjoint()),
        }
    }

    /// The r×r Gram matrix Y*Y; positive definite for a full-rank factor.
    pub fn gram(&self) -> HermitianMatrix {
        HermitianMatrix::symmetrized(self.y.adjoint() * &self.y)
    }
}

/// An ordered tuple of k Hermitian observables of common dimension, linearly
/// independent over ℝ.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservableTuple {
    observables: Vec<HermitianMatrix>,
}

impl ObservableTuple {
    /// Validate dimensions and real-linear independence.
    pub fn new(observables: Vec<HermitianMatrix>, rank_tol: f64) -> Result<Self> {
        if observables.is_empty() {
            return Err(Error::EmptyTuple);
        }
        let span_rank = real_span_rank(&observables, rank_tol)?;
        if span_rank < observables.len() {
            return Err(Error::DependentObservables {
                span_rank,
                count: observables.len(),
            });
        }
        Ok(Self { observables })
    }

    /// Keep a maximal independent subset, in order, and report the dropped
    /// indices. Greedy Gram-Schmidt on vectorized coordinates: an observable
    /// is kept when its component orthogonal to the span of the kept ones
    /// exceeds τ_rank relative to its own norm.
    pub fn reduced(observables: Vec<HermitianMatrix>, rank_tol: f64) -> Result<(Self, Vec<usize>)> {
        if observables.is_empty() {
            return Err(Error::EmptyTuple);
        }
        let dim = observables[0].dim();
        for m in &observables {
            if m.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: m.dim(),
                });
            }
        }
        let mut kept = Vec::new();
        let mut kept_ortho: Vec<RealCoordinates> = Vec::new();
        let mut dropped = Vec::new();
        for (i, m) in observables.into_iter().enumerate() {
            let coords = vectorize(&m);
            let original = coords.norm();
            if original <= 0.0 {
                dropped.push(i);
                continue;
            }
            let mut v = coords.coords().clone();
            for q in &kept_ortho {
                let proj = q.coords().dot(&v);
                v -= q.coords() * proj;
            }
            // second orthogonalization pass for numerical stability
            for q in &kept_ortho {
                let proj = q.coords().dot(&v);
                v -= q.coords() * proj;
            }
            let residual = v.norm();
            if residual <= rank_tol * original {
                dropped.push(i);
                continue;
            }
            v /= residual;
            kept_ortho.push(RealCoordinates::from_parts(dim, v));
            kept.push(m);
        }
        if kept.is_empty() {
            return Err(Error::EmptyTuple);
        }
        Ok((Self { observables: kept }, dropped))
    }

    /// For tuples independent by construction (centering shifts of an
    /// already-validated tuple preserve cardinality only when they preserve
    /// independence; callers that cannot guarantee it must use `reduced`).
    pub(crate) fn from_observables_unchecked(observables: Vec<HermitianMatrix>) -> Self {
        Self { observables }
    }

    pub fn dim(&self) -> usize {
        self.observables[0].dim()
    }

    pub fn len(&self) -> usize {
        self.observables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observables.is_empty()
    }

    pub fn observables(&self) -> &[HermitianMatrix] {
        &self.observables
    }

    pub fn get(&self, i: usize) -> &HermitianMatrix {
        &self.observables[i]
    }
}

pub(crate) fn convex_combination(weights: &[f64], pieces: &[Density]) -> HermitianMatrix {
    let n = pieces[0].dim();
    let mut acc = ComplexMatrix::zeros(n, n);
    for (w, p) in weights.iter().zip(pieces) {
        acc += p.data().map(|z| z * Complex64::new(*w, 0.0));
    }
    HermitianMatrix::symmetrized(acc)
}

pub(crate) fn mix(a: &Density, wa: f64, b: &Density, wb: f64) -> Density {
    let data: DMatrix<Complex64> =
        a.data().map(|z| z * wa) + b.data().map(|z| z * wb);
    Density::from_hermitian_unchecked(HermitianMatrix::symmetrized(data))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::pauli_matrices;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn tols() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn accepts_maximally_mixed() {
        let d = Density::new(
            ComplexMatrix::identity(2, 2).map(|z| z * 0.5),
            &tols(),
        )
        .unwrap();
        assert_eq!(d.dim(), 2);
        assert_eq!(d.rank(1e-9), 2);
    }

    #[test]
    fn rejects_wrong_trace() {
        let err = Density::new(
            ComplexMatrix::identity(2, 2).map(|z| z * 0.6),
            &tols(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::TraceNotOne { .. }));
    }

    #[test]
    fn rejects_indefinite() {
        let data = ComplexMatrix::from_row_slice(
            2,
            2,
            &[c(1.5, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-0.5, 0.0)],
        );
        let err = Density::new(data, &tols()).unwrap_err();
        assert!(matches!(err, Error::NotPositiveSemidefinite { .. }));
    }

    #[test]
    fn exact_inputs_stored_bit_for_bit() {
        let data = ComplexMatrix::from_row_slice(
            2,
            2,
            &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)],
        );
        let d = Density::new(data, &tols()).unwrap();
        assert_eq!(d.data()[(0, 0)], c(1.0, 0.0));
        assert_eq!(d.data()[(0, 1)], c(0.0, 0.0));
        assert_eq!(d.data()[(1, 1)], c(0.0, 0.0));
        assert_eq!(d.rank(1e-9), 1);
    }

    #[test]
    fn clamps_tiny_negative_eigenvalue() {
        let eps = 1e-10;
        let data = ComplexMatrix::from_row_slice(
            2,
            2,
            &[c(1.0 + eps, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-eps, 0.0)],
        );
        let d = Density::new(data, &tols()).unwrap();
        assert!(d.matrix().min_eigenvalue() >= 0.0);
        assert!((d.matrix().trace() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rank_one_pure_state() {
        let data = ComplexMatrix::from_row_slice(
            2,
            2,
            &[c(0.5, 0.0), c(0.5, 0.0), c(0.5, 0.0), c(0.5, 0.0)],
        );
        let d = Density::new(data, &tols()).unwrap();
        assert_eq!(d.rank(1e-9), 1);
    }

    #[test]
    fn rank_of_diagonal() {
        let d = Density::new(
            ComplexMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
                c(0.5, 0.0),
                c(0.5, 0.0),
                c(0.0, 0.0),
            ])),
            &tols(),
        )
        .unwrap();
        assert_eq!(d.rank(1e-9), 2);
    }

    #[test]
    fn factor_projection() {
        let d = Density::new(
            ComplexMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
                c(1.0, 0.0),
                c(0.0, 0.0),
            ])),
            &tols(),
        )
        .unwrap();
        let f = d.factor(1e-9).unwrap();
        assert_eq!(f.rank(), 1);
        assert_eq!(f.factor_matrix()[(0, 0)], c(1.0, 0.0));
        assert_eq!(f.factor_matrix()[(1, 0)], c(0.0, 0.0));
        assert!(f.density().matrix().distance(d.matrix()) < 1e-12);
    }

    #[test]
    fn factor_maximally_mixed() {
        let d = Density::new(ComplexMatrix::identity(2, 2).map(|z| z * 0.5), &tols()).unwrap();
        let f = d.factor(1e-9).unwrap();
        assert_eq!(f.rank(), 2);
        assert!(f.density().matrix().distance(d.matrix()) < 1e-12);
    }

    #[test]
    fn factor_gram_spectrum_matches_positive_spectrum() {
        // Oracle: sorted positive eigenvalues of D vs eigenvalues of Y*Y.
        let d = Density::new(
            ComplexMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
                c(0.7, 0.0),
                c(0.3, 0.0),
                c(0.0, 0.0),
            ])),
            &tols(),
        )
        .unwrap();
        let f = d.factor(1e-9).unwrap();
        assert_eq!(f.rank(), 2);
        let (gram_vals, _) = f.gram().eigh();
        assert!((gram_vals[0] - 0.7).abs() < 1e-12);
        assert!((gram_vals[1] - 0.3).abs() < 1e-12);
    }

    #[test]
    fn from_factor_validates() {
        // unit-norm single column: fine
        let y = ComplexMatrix::from_row_slice(2, 1, &[c(1.0, 0.0), c(0.0, 0.0)]);
        assert!(FactoredDensity::from_factor(y, &tols()).is_ok());
        // rank-deficient pair of identical columns
        let y = ComplexMatrix::from_row_slice(
            2,
            2,
            &[c(0.5, 0.0), c(0.5, 0.0), c(0.5, 0.0), c(0.5, 0.0)],
        );
        assert!(FactoredDensity::from_factor(y, &tols()).is_err());
        // wrong trace
        let y = ComplexMatrix::from_row_slice(2, 1, &[c(2.0, 0.0), c(0.0, 0.0)]);
        assert!(matches!(
            FactoredDensity::from_factor(y, &tols()),
            Err(Error::TraceNotOne { .. })
        ));
    }

    #[test]
    fn tuple_rejects_dependent() {
        let [sx, _, _] = pauli_matrices();
        let err = ObservableTuple::new(vec![sx.clone(), sx.scale(2.0)], 1e-9).unwrap_err();
        assert!(matches!(
            err,
            Error::DependentObservables {
                span_rank: 1,
                count: 2
            }
        ));
    }

    #[test]
    fn tuple_accepts_pauli() {
        let [sx, sy, sz] = pauli_matrices();
        let t = ObservableTuple::new(vec![sx, sy, sz], 1e-9).unwrap();
        assert_eq!(t.len(), 3);
        assert_eq!(t.dim(), 2);
    }

    #[test]
    fn reduced_drops_dependent_and_zero() {
        let [sx, sy, _] = pauli_matrices();
        let combo = sx.scale(1.0).add(&sy.scale(-2.0));
        let mats = vec![
            sx.clone(),
            HermitianMatrix::zeros(2),
            sy.clone(),
            combo,
            sx.scale(3.0),
        ];
        let (t, dropped) = ObservableTuple::reduced(mats, 1e-9).unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(dropped, vec![1, 3, 4]);
    }

    #[test]
    fn new_clamped_zeroes_noise_eigenvalues() {
        let [sx, _, _] = pauli_matrices();
        // I/2 + sx/2 is the rank-1 projection onto (1,1)/sqrt(2), plus noise
        let noise = 1e-13;
        let data = HermitianMatrix::identity(2)
            .scale(0.5 + noise)
            .add(&sx.scale(0.5 - noise))
            .data()
            .clone();
        let d = Density::new_clamped(data, &tols()).unwrap();
        assert_eq!(d.rank(1e-9), 1);
        let p = d.data() * d.data();
        assert!((p - d.data()).norm() < 1e-12);
    }
}
