//! The tolerance ladder shared across validation, rank decisions, and the
//! decomposition engine.

use serde::{Deserialize, Serialize};

/// Numerical tolerances used throughout the library.
///
/// The base family (`rank`, `psd`, `trace`, `herm`, `membership`) defaults to
/// 1e-9; the accumulated-error family (`recon`, `var`, `merge`) defaults to
/// 1e-8. `rank` is relative to the largest singular value (or eigenvalue) of
/// the matrix being ranked; the others are absolute.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Relative threshold for numerical rank: singular values above
    /// `rank * sigma_max` count.
    pub rank: f64,
    /// Smallest admissible eigenvalue for positive-semidefinite checks.
    pub psd: f64,
    /// Admissible deviation of a density trace from 1 at validation.
    pub trace: f64,
    /// Admissible Hermiticity defect `|A[i][j] - conj(A[j][i])|` at construction.
    pub herm: f64,
    /// Feasible-set membership threshold on `|Tr(D X_i)|`.
    pub membership: f64,
    /// Frobenius reconstruction error allowed for factorizations and
    /// decompositions.
    pub recon: f64,
    /// Covariance-additivity residual allowed for a decomposition.
    pub var: f64,
    /// Frobenius distance below which two decomposition leaves are merged.
    pub merge: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rank: 1e-9,
            psd: 1e-9,
            trace: 1e-9,
            herm: 1e-9,
            membership: 1e-9,
            recon: 1e-8,
            var: 1e-8,
            merge: 1e-8,
        }
    }
}

impl Tolerances {
    /// Build a ladder from a single base tolerance, preserving the default
    /// shape: the base family gets `base`, the accumulated-error family gets
    /// `10 * base`.
    pub fn from_base(base: f64) -> Self {
        Self {
            rank: base,
            psd: base,
            trace: base,
            herm: base,
            membership: base,
            recon: 10.0 * base,
            var: 10.0 * base,
            merge: 10.0 * base,
        }
    }
}
