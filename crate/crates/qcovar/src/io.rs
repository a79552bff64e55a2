//! JSON interchange: problem files (density + observables + tolerance
//! overrides), solution files (weights + pieces + certificates + residuals),
//! and report payloads for the command-line tools.
//!
//! Complex entries are two-element arrays [re, im]; matrices are row-major
//! arrays of rows. Floats are emitted in shortest round-trip form, so
//! serialize/deserialize is bit-exact for every f64 including -0.0.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::decomposition::{
    ExtremalDecomposition, NamedCheck, PieceCertificate, Residuals, VerificationReport,
};
use crate::density::{Density, ObservableTuple};
use crate::error::{Error, Result};
use crate::extremality::{ExtremalityReport, Perturbation};
use crate::hermitian::{ComplexMatrix, HermitianMatrix};
use crate::tolerance::Tolerances;

/// Row-major complex matrix with [re, im] entries.
pub type MatrixRows = Vec<Vec<[f64; 2]>>;

pub fn matrix_to_rows(m: &ComplexMatrix) -> MatrixRows {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

pub fn rows_to_matrix(rows: &MatrixRows) -> Result<ComplexMatrix> {
    if rows.is_empty() {
        return Err(Error::InvalidParameter("empty matrix".into()));
    }
    let ncols = rows[0].len();
    if ncols == 0 {
        return Err(Error::InvalidParameter("matrix with empty rows".into()));
    }
    for (i, row) in rows.iter().enumerate() {
        if row.len() != ncols {
            return Err(Error::InvalidParameter(format!(
                "ragged matrix: row {i} has {} entries, row 0 has {ncols}",
                row.len()
            )));
        }
    }
    Ok(ComplexMatrix::from_fn(rows.len(), ncols, |i, j| {
        Complex64::new(rows[i][j][0], rows[i][j][1])
    }))
}

/// Per-field tolerance overrides carried inside a problem file. Absent
/// fields keep their resolved defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceOverrides {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rank: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub psd: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub herm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub membership: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub recon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub var: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub merge: Option<f64>,
}

impl ToleranceOverrides {
    pub fn apply(&self, base: Tolerances) -> Tolerances {
        Tolerances {
            rank: self.rank.unwrap_or(base.rank),
            psd: self.psd.unwrap_or(base.psd),
            trace: self.trace.unwrap_or(base.trace),
            herm: self.herm.unwrap_or(base.herm),
            membership: self.membership.unwrap_or(base.membership),
            recon: self.recon.unwrap_or(base.recon),
            var: self.var.unwrap_or(base.var),
            merge: self.merge.unwrap_or(base.merge),
        }
    }

    pub fn is_empty(&self) -> bool {
        self == &ToleranceOverrides::default()
    }
}

/// A problem instance on disk: density, observables, optional tolerances.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub n: usize,
    pub k: usize,
    #[serde(rename = "D")]
    pub d: MatrixRows,
    #[serde(rename = "X")]
    pub x: Vec<MatrixRows>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<ToleranceOverrides>,
}

impl ProblemFile {
    pub fn from_instance(d: &Density, x: &ObservableTuple) -> Self {
        Self {
            n: d.dim(),
            k: x.len(),
            d: matrix_to_rows(d.data()),
            x: x.observables().iter().map(|m| matrix_to_rows(m.data())).collect(),
            tolerances: None,
        }
    }

    pub fn parse(text: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("problem files always serialize");
        s.push('\n');
        s
    }

    /// Validate shapes and domain invariants, producing the density and a
    /// maximal independent observable tuple. The second return lists input
    /// indices dropped for real-linear dependence; nonempty means the
    /// problem statement was redundant, not wrong.
    pub fn instantiate(
        &self,
        tol: &Tolerances,
    ) -> Result<(Density, ObservableTuple, Vec<usize>)> {
        let d_mat = rows_to_matrix(&self.d)?;
        if d_mat.nrows() != self.n || d_mat.ncols() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: d_mat.nrows().max(d_mat.ncols()),
            });
        }
        if self.x.len() != self.k {
            return Err(Error::InvalidParameter(format!(
                "header says k = {}, file contains {} observables",
                self.k,
                self.x.len()
            )));
        }
        let density = Density::new(d_mat, tol)?;
        let mut mats = Vec::with_capacity(self.x.len());
        for rows in &self.x {
            let m = rows_to_matrix(rows)?;
            if m.nrows() != self.n || m.ncols() != self.n {
                return Err(Error::DimensionMismatch {
                    expected: self.n,
                    found: m.nrows().max(m.ncols()),
                });
            }
            mats.push(HermitianMatrix::new(m, tol.herm)?);
        }
        let (tuple, dropped) = ObservableTuple::reduced(mats, tol.rank)?;
        Ok((density, tuple, dropped))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertificateRecord {
    pub rank: usize,
    pub span_rank: usize,
    pub required: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResidualsRecord {
    pub reconstruction: f64,
    pub covariance_additivity: f64,
    pub membership_max: f64,
}

/// Tolerances (and optional seed) a solution was produced under, plus the
/// producing version, so results can be reproduced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigEcho {
    pub tolerances: Tolerances,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub version: String,
}

/// A decomposition on disk.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolutionFile {
    pub weights: Vec<f64>,
    pub pieces: Vec<MatrixRows>,
    pub certificates: Vec<CertificateRecord>,
    pub residuals: ResidualsRecord,
    pub shifts: Vec<f64>,
    pub config: ConfigEcho,
}

impl SolutionFile {
    pub fn from_decomposition(
        dec: &ExtremalDecomposition,
        tolerances: &Tolerances,
        seed: Option<u64>,
    ) -> Self {
        Self {
            weights: dec.weights.clone(),
            pieces: dec.pieces.iter().map(|p| matrix_to_rows(p.data())).collect(),
            certificates: dec
                .certificates
                .iter()
                .map(|c| CertificateRecord {
                    rank: c.rank,
                    span_rank: c.span_rank,
                    required: c.required,
                })
                .collect(),
            residuals: ResidualsRecord {
                reconstruction: dec.residuals.reconstruction,
                covariance_additivity: dec.residuals.covariance_additivity,
                membership_max: dec.residuals.membership_max,
            },
            shifts: dec.shifts.clone(),
            config: ConfigEcho {
                tolerances: *tolerances,
                seed,
                version: env!("CARGO_PKG_VERSION").to_string(),
            },
        }
    }

    pub fn parse(text: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("solution files always serialize");
        s.push('\n');
        s
    }

    /// Rebuild the in-memory decomposition, validating every piece as a
    /// density.
    pub fn instantiate(&self, tol: &Tolerances) -> Result<ExtremalDecomposition> {
        if self.weights.len() != self.pieces.len() || self.weights.len() != self.certificates.len()
        {
            return Err(Error::InvalidParameter(format!(
                "inconsistent lengths: {} weights, {} pieces, {} certificates",
                self.weights.len(),
                self.pieces.len(),
                self.certificates.len()
            )));
        }
        let mut pieces = Vec::with_capacity(self.pieces.len());
        for rows in &self.pieces {
            pieces.push(Density::new(rows_to_matrix(rows)?, tol)?);
        }
        Ok(ExtremalDecomposition {
            weights: self.weights.clone(),
            pieces,
            certificates: self
                .certificates
                .iter()
                .map(|c| PieceCertificate {
                    rank: c.rank,
                    span_rank: c.span_rank,
                    required: c.required,
                })
                .collect(),
            residuals: Residuals {
                reconstruction: self.residuals.reconstruction,
                covariance_additivity: self.residuals.covariance_additivity,
                membership_max: self.residuals.membership_max,
            },
            shifts: self.shifts.clone(),
        })
    }
}

/// Covariance output payload. `real_entries` and `hermiticity_residual` are
/// present when the caller asked for the real-part view.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CovarianceFile {
    pub k: usize,
    pub entries: MatrixRows,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub real_entries: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hermiticity_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shifts: Option<Vec<f64>>,
}

impl CovarianceFile {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("covariance files always serialize");
        s.push('\n');
        s
    }

    pub fn parse(text: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

/// Extremality verdict payload.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckFile {
    pub extreme: bool,
    pub rank: usize,
    pub span_rank: usize,
    pub required: usize,
    pub criterion: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shifts: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dropped: Option<Vec<usize>>,
}

impl CheckFile {
    pub fn from_report(report: &ExtremalityReport) -> Self {
        Self {
            extreme: report.extreme,
            rank: report.rank,
            span_rank: report.span_rank,
            required: report.required,
            criterion: report.criterion.as_str().to_string(),
            shifts: None,
            dropped: None,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("check files always serialize");
        s.push('\n');
        s
    }
}

/// Serialized perturbation witness: S in problem coordinates, Q in the rank
/// space, and the worst constraint residual of S.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbationFile {
    #[serde(rename = "S")]
    pub s: MatrixRows,
    #[serde(rename = "Q")]
    pub q: MatrixRows,
    pub norm: f64,
    pub constraint_residual: f64,
}

impl PerturbationFile {
    pub fn from_perturbation(p: &Perturbation, residual: f64) -> Self {
        Self {
            s: matrix_to_rows(p.s.data()),
            q: matrix_to_rows(p.q.data()),
            norm: p.norm,
            constraint_residual: residual,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s =
            serde_json::to_string_pretty(self).expect("perturbation files always serialize");
        s.push('\n');
        s
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckRecord {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// Verification report payload: one record per recomputed invariant.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyFile {
    pub passed: bool,
    pub checks: Vec<CheckRecord>,
}

impl VerifyFile {
    pub fn from_report(report: &VerificationReport) -> Self {
        Self {
            passed: report.passed,
            checks: report
                .checks
                .iter()
                .map(|c: &NamedCheck| CheckRecord {
                    name: c.name.to_string(),
                    passed: c.passed,
                    detail: c.detail.clone(),
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("verify files always serialize");
        s.push('\n');
        s
    }
}
