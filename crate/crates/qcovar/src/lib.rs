//! Covariance matrices of Hermitian observable tuples, extreme points of
//! expectation-constrained density sets, and constructive extremal
//! decompositions.
//!
//! For a density matrix D (Hermitian, PSD, unit trace) and observables
//! X₁, …, X_k, the covariance matrix
//!
//! ```text
//! Var_D(X)_ij = Tr(D·X_i·X_j) − Tr(D·X_i)·Tr(D·X_j)
//! ```
//!
//! is Hermitian and positive semidefinite, and is generally only concave in
//! D. Restricted to the densities with Tr(D·X_i) = 0 for every i it becomes
//! affine, so it decomposes over convex combinations of extreme points of
//! that feasible set. This crate decides extremality (rank-r densities are
//! extreme exactly when their compressed constraint family spans all r²
//! dimensions of the rank space), produces certified perturbation witnesses
//! for non-extreme states, and splits any density into extreme pieces whose
//! covariances add back up to Var_D(X).
//!
//! Entry points:
//! - [`covariance::covariance`] and [`covariance::center`]
//! - [`extremality::is_extreme`] / [`extremality::is_extreme_sandwich`]
//! - [`decomposition::decompose`] and [`decomposition::verify`]
//! - [`generators`] for named fixtures and seeded random instances
//! - [`io`] for the JSON interchange formats

pub mod covariance;
pub mod decomposition;
pub mod density;
pub mod error;
pub mod extremality;
pub mod generators;
pub mod hermitian;
pub mod io;
pub mod tolerance;

pub use covariance::{
    center, concavity_defect, covariance, expectation_values, in_feasible_set,
    membership_residual, semi_inner, CovarianceMatrix,
};
pub use decomposition::{
    decompose, max_steps, split_once, verify, DecomposeOptions, ExtremalDecomposition,
    NamedCheck, PieceCertificate, Residuals, SplitResult, VerificationReport,
};
pub use density::{Density, FactoredDensity, ObservableTuple};
pub use error::{Error, Result};
pub use extremality::{
    compress, find_perturbation, is_extreme, is_extreme_sandwich, rank_bound, Criterion,
    ExtremalityReport, Perturbation,
};
pub use hermitian::{
    devectorize, is_psd, orthonormal_basis, real_span_rank, vectorize, ComplexMatrix,
    HermitianMatrix, RealCoordinates,
};
pub use tolerance::Tolerances;
