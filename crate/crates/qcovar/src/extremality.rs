//! Extreme-point tests for densities constrained to zero expectations.
//!
//! A density D of rank r, feasible for the tuple X (all Tr D·X_i = 0), is an
//! extreme point of the feasible set exactly when the compressed family
//! {Y*X₁Y, …, Y*X_kY, Y*Y} spans all of H_r, where D = YY*. Equivalently,
//! {DX₁D, …, DX_kD, D²} has real rank r². When the span falls short, any
//! Hermitian Q ≠ 0 annihilated by the maps Q ↦ Tr(Q·Y*X_iY) and
//! Q ↦ Tr(Q·Y*Y) yields a two-sided perturbation S = YQY* that keeps the
//! constraints and the unit trace, witnessing non-extremality.

use crate::density::{Density, FactoredDensity, ObservableTuple};
use crate::error::{Error, Result};
use crate::hermitian::{
    devectorize, rank_and_null_vector, stacked_coordinates, HermitianMatrix, RealCoordinates,
};
use crate::tolerance::Tolerances;

/// Which rank criterion produced a verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Criterion {
    /// Span of the compressed family {Y*X_iY, Y*Y} in H_r.
    Spanning,
    /// Span of the two-sided products {DX_iD, D²}; factorization-free.
    Sandwich,
    /// Feasible-set singleton test on the compressed tuple; only used as a
    /// small-rank cross-check.
    CompressedIdentity,
}

impl Criterion {
    pub fn as_str(&self) -> &'static str {
        match self {
            Criterion::Spanning => "spanning",
            Criterion::Sandwich => "sandwich",
            Criterion::CompressedIdentity => "compressed-identity",
        }
    }
}

/// A direction along which a non-extreme density can move both ways without
/// leaving the feasible set.
#[derive(Debug, Clone, PartialEq)]
pub struct Perturbation {
    /// S = YQY*, traceless and orthogonal to every observable.
    pub s: HermitianMatrix,
    /// The rank-space witness, unit Frobenius norm.
    pub q: HermitianMatrix,
    /// Frobenius norm of Q as computed (1 up to floating error).
    pub norm: f64,
}

/// Outcome of an extremality test.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtremalityReport {
    pub extreme: bool,
    /// Numerical rank r of the density.
    pub rank: usize,
    /// Real span rank of the criterion family.
    pub span_rank: usize,
    /// r², the span rank required for extremality.
    pub required: usize,
    pub criterion: Criterion,
    /// Present exactly when the verdict is negative and the criterion is
    /// rank-space based (the sandwich path never constructs one).
    pub perturbation: Option<Perturbation>,
}

/// [Y*X₁Y, …, Y*X_kY, Y*Y], each r×r Hermitian.
pub fn compress(y: &FactoredDensity, x: &ObservableTuple) -> Result<Vec<HermitianMatrix>> {
    if y.dim() != x.dim() {
        return Err(Error::DimensionMismatch {
            expected: y.dim(),
            found: x.dim(),
        });
    }
    let ym = y.factor_matrix();
    let mut out = Vec::with_capacity(x.len() + 1);
    for xi in x.observables() {
        out.push(HermitianMatrix::symmetrized(
            ym.adjoint() * xi.data() * ym,
        ));
    }
    out.push(y.gram());
    Ok(out)
}

/// floor(√(k+1)): the largest possible rank of an extreme density under k
/// independent constraints.
pub fn rank_bound(k: usize) -> usize {
    (k + 1).isqrt()
}

pub(crate) struct SpanningAnalysis {
    pub(crate) span_rank: usize,
    pub(crate) required: usize,
    pub(crate) perturbation: Option<Perturbation>,
}

pub(crate) fn spanning_analysis(
    y: &FactoredDensity,
    x: &ObservableTuple,
    tol: &Tolerances,
) -> Result<SpanningAnalysis> {
    let r = y.rank();
    let required = r * r;
    let compressed = compress(y, x)?;
    let stacked = stacked_coordinates(&compressed)?;
    let (span_rank, null) = rank_and_null_vector(&stacked, tol.rank);
    let perturbation = match null {
        None => None,
        Some(coords) => {
            let q = devectorize(&RealCoordinates::from_parts(r, coords));
            // the constraint-map residual the null vector is supposed to
            // achieve; failure here means the rank threshold misjudged a
            // borderline singular value
            let mut worst = 0.0_f64;
            for c in &compressed {
                worst = worst.max(q.trace_product(c).abs());
            }
            if worst > tol.membership {
                return Err(Error::Numerical(format!(
                    "null-space witness leaves residual {worst:.3e} above {:.3e}; \
                     the constraint matrix is too ill-conditioned for the rank tolerance",
                    tol.membership
                )));
            }
            let norm = q.frobenius_norm();
            let ym = y.factor_matrix();
            let s = HermitianMatrix::symmetrized(ym * q.data() * ym.adjoint());
            Some(Perturbation { s, q, norm })
        }
    };
    Ok(SpanningAnalysis {
        span_rank,
        required,
        perturbation,
    })
}

fn require_feasible(d: &Density, x: &ObservableTuple, tol: &Tolerances) -> Result<()> {
    let mut worst = (0usize, 0.0_f64);
    for (i, xi) in x.observables().iter().enumerate() {
        let v = d.matrix().trace_product(xi).abs();
        if v > worst.1 {
            worst = (i, v);
        }
    }
    if worst.1 > tol.membership {
        return Err(Error::NotInFeasibleSet {
            index: worst.0,
            value: worst.1,
            tolerance: tol.membership,
        });
    }
    Ok(())
}

/// Decide extremality through the compressed spanning criterion, attaching a
/// perturbation witness when the verdict is negative.
///
/// The density must already be feasible; shift the observables by their
/// expectations first when it is not.
pub fn is_extreme(d: &Density, x: &ObservableTuple, tol: &Tolerances) -> Result<ExtremalityReport> {
    require_feasible(d, x, tol)?;
    let y = d.factor(tol.rank)?;
    let analysis = spanning_analysis(&y, x, tol)?;
    let extreme = analysis.span_rank == analysis.required;
    debug_assert_eq!(extreme, analysis.perturbation.is_none());
    Ok(ExtremalityReport {
        extreme,
        rank: y.rank(),
        span_rank: analysis.span_rank,
        required: analysis.required,
        criterion: Criterion::Spanning,
        perturbation: analysis.perturbation,
    })
}

/// Decide extremality from the two-sided products {DX_iD, D²}, without
/// factoring D. Cross-validation path; produces no perturbation witness.
pub fn is_extreme_sandwich(
    d: &Density,
    x: &ObservableTuple,
    tol: &Tolerances,
) -> Result<ExtremalityReport> {
    require_feasible(d, x, tol)?;
    let r = d.rank(tol.rank);
    if r == 0 {
        return Err(Error::ZeroMatrix);
    }
    let dm = d.data();
    let mut family = Vec::with_capacity(x.len() + 1);
    for xi in x.observables() {
        family.push(HermitianMatrix::symmetrized(dm * xi.data() * dm));
    }
    family.push(HermitianMatrix::symmetrized(dm * dm));
    let stacked = stacked_coordinates(&family)?;
    let (span_rank, _) = rank_and_null_vector(&stacked, tol.rank);
    Ok(ExtremalityReport {
        extreme: span_rank == r * r,
        rank: r,
        span_rank,
        required: r * r,
        criterion: Criterion::Sandwich,
        perturbation: None,
    })
}

/// Search the null space of the compressed constraint map. `None` means the
/// map has full rank r² and the density is extreme.
///
/// The returned Q has unit Frobenius norm, the largest-magnitude coordinate
/// of its vectorization positive, and |Tr Q·Y*X_iY|, |Tr Q·Y*Y| all at most
/// the membership tolerance.
pub fn find_perturbation(
    y: &FactoredDensity,
    x: &ObservableTuple,
    tol: &Tolerances,
) -> Result<Option<Perturbation>> {
    Ok(spanning_analysis(y, x, tol)?.perturbation)
}

/// Worst membership violation of a perturbed density, for reporting.
pub fn perturbation_residual(s: &HermitianMatrix, x: &ObservableTuple) -> f64 {
    let mut worst = s.trace().abs();
    for xi in x.observables() {
        worst = worst.max(s.trace_product(xi).abs());
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{gell_mann, maximally_mixed, padded_gellmann, pauli, pauli_matrices};
    use crate::hermitian::ComplexMatrix;
    use num_complex::Complex64;

    fn tols() -> Tolerances {
        Tolerances::default()
    }

    fn single(x: HermitianMatrix) -> ObservableTuple {
        ObservableTuple::new(vec![x], 1e-9).unwrap()
    }

    #[test]
    fn compress_maximally_mixed_scales_by_half() {
        let d = maximally_mixed(2);
        let y = d.factor(1e-9).unwrap();
        let [sx, _, _] = pauli_matrices();
        let c = compress(&y, &single(sx.clone())).unwrap();
        assert_eq!(c.len(), 2);
        assert!(c[0].distance(&sx.scale(0.5)) < 1e-12);
        assert!(c[1].distance(&HermitianMatrix::identity(2).scale(0.5)) < 1e-12);
    }

    #[test]
    fn compress_rank_one_projection() {
        let d = Density::new(
            ComplexMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
                Complex64::new(1.0, 0.0),
                Complex64::new(0.0, 0.0),
            ])),
            &tols(),
        )
        .unwrap();
        let y = d.factor(1e-9).unwrap();
        let [sx, _, _] = pauli_matrices();
        let c = compress(&y, &single(sx)).unwrap();
        assert_eq!(c[0].dim(), 1);
        assert!(c[0].entry(0, 0).norm() < 1e-15);
        assert!((c[1].entry(0, 0) - Complex64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn compress_gell_mann_octet() {
        let d = maximally_mixed(3);
        let y = d.factor(1e-9).unwrap();
        let gm = gell_mann(3).unwrap();
        let c = compress(&y, &gm).unwrap();
        assert_eq!(c.len(), 9);
        for (ci, lam) in c.iter().zip(gm.observables()) {
            assert!(ci.distance(&lam.scale(1.0 / 3.0)) < 1e-12);
        }
        assert!(c[8].distance(&HermitianMatrix::identity(3).scale(1.0 / 3.0)) < 1e-12);
    }

    #[test]
    fn pauli_tuple_pins_the_mixed_state() {
        let report = is_extreme(&maximally_mixed(2), &pauli(), &tols()).unwrap();
        assert!(report.extreme);
        assert_eq!(report.rank, 2);
        assert_eq!(report.span_rank, 4);
        assert_eq!(report.required, 4);
        assert!(report.perturbation.is_none());
    }

    #[test]
    fn single_observable_leaves_room_to_move() {
        let [sx, _, _] = pauli_matrices();
        let d = maximally_mixed(2);
        let x = single(sx.clone());
        let report = is_extreme(&d, &x, &tols()).unwrap();
        assert!(!report.extreme);
        assert_eq!(report.rank, 2);
        assert_eq!(report.span_rank, 2);
        assert_eq!(report.required, 4);
        let p = report.perturbation.expect("non-extreme verdicts carry a witness");
        assert!((p.norm - 1.0).abs() < 1e-12);
        assert!(p.s.trace().abs() < 1e-12);
        assert!(p.s.trace_product(&sx).abs() < 1e-12);
        // S must reproduce YQY*
        let y = d.factor(1e-9).unwrap();
        let recon = HermitianMatrix::symmetrized(
            y.factor_matrix() * p.q.data() * y.factor_matrix().adjoint(),
        );
        assert!(p.s.distance(&recon) < 1e-10);
        // both one-sided moves stay PSD for a small step
        for eps in [1e-3, -1e-3] {
            let moved = d.matrix().add(&p.s.scale(eps));
            assert!(moved.min_eigenvalue() > -1e-12);
        }
    }

    #[test]
    fn rank_one_feasible_density_is_extreme() {
        let [sx, _, _] = pauli_matrices();
        let d = Density::new(
            ComplexMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
                Complex64::new(1.0, 0.0),
                Complex64::new(0.0, 0.0),
            ])),
            &tols(),
        )
        .unwrap();
        let report = is_extreme(&d, &single(sx), &tols()).unwrap();
        assert!(report.extreme);
        assert_eq!(report.rank, 1);
        assert_eq!(report.span_rank, 1);
    }

    #[test]
    fn infeasible_density_is_rejected_with_hint() {
        let [_, _, sz] = pauli_matrices();
        let d = Density::new(
            ComplexMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
                Complex64::new(1.0, 0.0),
                Complex64::new(0.0, 0.0),
            ])),
            &tols(),
        )
        .unwrap();
        let err = is_extreme(&d, &single(sz), &tols()).unwrap_err();
        match err {
            Error::NotInFeasibleSet { index, value, .. } => {
                assert_eq!(index, 0);
                assert!((value - 1.0).abs() < 1e-15);
            }
            other => panic!("wrong error: {other}"),
        }
    }

    #[test]
    fn sandwich_agrees_on_basic_cases() {
        let tol = tols();
        let d = maximally_mixed(2);
        let [sx, _, _] = pauli_matrices();
        for x in [pauli(), single(sx)] {
            let a = is_extreme(&d, &x, &tol).unwrap();
            let b = is_extreme_sandwich(&d, &x, &tol).unwrap();
            assert_eq!(a.extreme, b.extreme);
            assert_eq!(a.rank, b.rank);
            assert_eq!(b.criterion, Criterion::Sandwich);
            assert!(b.perturbation.is_none());
        }
    }

    #[test]
    fn gell_mann_octet_is_extreme_both_ways() {
        let tol = tols();
        let d = maximally_mixed(3);
        let gm = gell_mann(3).unwrap();
        let a = is_extreme(&d, &gm, &tol).unwrap();
        let b = is_extreme_sandwich(&d, &gm, &tol).unwrap();
        assert!(a.extreme);
        assert!(b.extreme);
        assert_eq!(a.span_rank, 9);
        assert_eq!(b.span_rank, 9);
    }

    #[test]
    fn padded_block_density_stays_extreme() {
        let tol = tols();
        let (d, x) = padded_gellmann(2, 3, 2, 7).unwrap();
        let a = is_extreme(&d, &x, &tol).unwrap();
        let b = is_extreme_sandwich(&d, &x, &tol).unwrap();
        assert!(a.extreme, "direct-sum padding must not break extremality");
        assert!(b.extreme);
        assert_eq!(a.rank, 2);

        // dropping one spanning observable opens a one-dimensional gap
        let partial =
            ObservableTuple::new(x.observables()[1..].to_vec(), 1e-9).unwrap();
        let c = is_extreme(&d, &partial, &tol).unwrap();
        assert!(!c.extreme);
        assert_eq!(c.required - c.span_rank, 1);
    }

    #[test]
    fn find_perturbation_absent_for_pinned_state() {
        let d = maximally_mixed(2);
        let y = d.factor(1e-9).unwrap();
        assert!(find_perturbation(&y, &pauli(), &tols())
            .unwrap()
            .is_none());
    }

    #[test]
    fn rank_bound_values() {
        assert_eq!(rank_bound(1), 1);
        assert_eq!(rank_bound(2), 1);
        assert_eq!(rank_bound(3), 2);
        assert_eq!(rank_bound(8), 3);
        assert_eq!(rank_bound(9), 3);
        assert_eq!(rank_bound(15), 4);
    }
}
