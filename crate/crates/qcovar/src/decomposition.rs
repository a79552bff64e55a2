//! Constructive decomposition of a density into a convex combination of
//! extreme densities of the feasible set, with additive covariance.
//!
//! The engine centers the observables once, then recursively splits every
//! non-extreme node D along its perturbation S: both maximal moves
//! D + ε₊S and D − ε₋S hit the PSD boundary, so each branch loses at least
//! one unit of rank and the recursion bottoms out in at most rank−1 levels.
//! Because every node keeps the zero-expectation constraints, the mixing
//! defect between any two leaves vanishes and the covariance of the root is
//! the weighted sum of the leaf covariances.

use crate::covariance::{center, covariance, membership_residual, CovarianceMatrix};
use crate::density::{convex_combination, Density, FactoredDensity, ObservableTuple};
use crate::error::{Error, Result};
use crate::extremality::{is_extreme, rank_bound, spanning_analysis, Perturbation};
use crate::hermitian::HermitianMatrix;
use crate::tolerance::Tolerances;

/// One maximal two-sided split of a non-extreme density.
#[derive(Debug, Clone)]
pub struct SplitResult {
    /// Convex weight of `plus`: D = μ·plus + (1−μ)·minus.
    pub mu: f64,
    pub plus: Density,
    pub minus: Density,
    pub eps_plus: f64,
    pub eps_minus: f64,
}

/// Largest steps that keep D ± εS positive semidefinite, in terms of the
/// rank-space witness Q (S = YQY*): moving to the boundary means driving an
/// eigenvalue of I ± εQ to zero.
pub fn max_steps(y: &FactoredDensity, q: &HermitianMatrix, tol: &Tolerances) -> Result<(f64, f64)> {
    if q.dim() != y.rank() {
        return Err(Error::DimensionMismatch {
            expected: y.rank(),
            found: q.dim(),
        });
    }
    let norm = q.frobenius_norm();
    if norm <= tol.rank {
        return Err(Error::ZeroPerturbation { norm });
    }
    let gram_pairing = q.trace_product(&y.gram());
    if gram_pairing.abs() > tol.membership * 10.0 {
        return Err(Error::InvalidParameter(format!(
            "step direction changes the trace: Tr(Q·Y*Y) = {gram_pairing:.3e}"
        )));
    }
    let lambda_min = q.min_eigenvalue();
    let lambda_max = q.max_eigenvalue();
    // Tr(Q·Y*Y) = 0 with Y*Y positive definite forces Q indefinite; a
    // one-signed spectrum here means the witness was numerical noise.
    if lambda_min >= -tol.rank || lambda_max <= tol.rank {
        return Err(Error::Numerical(format!(
            "step direction is not indefinite: spectrum within [{lambda_min:.3e}, {lambda_max:.3e}]"
        )));
    }
    Ok((-1.0 / lambda_min, 1.0 / lambda_max))
}

fn split_with(
    d: &Density,
    y: &FactoredDensity,
    p: &Perturbation,
    tol: &Tolerances,
) -> Result<SplitResult> {
    let (eps_plus, eps_minus) = max_steps(y, &p.q, tol)?;
    let plus = Density::new_clamped(d.matrix().add(&p.s.scale(eps_plus)).data().clone(), tol)?;
    let minus = Density::new_clamped(d.matrix().sub(&p.s.scale(eps_minus)).data().clone(), tol)?;
    let mu = eps_minus / (eps_plus + eps_minus);
    Ok(SplitResult {
        mu,
        plus,
        minus,
        eps_plus,
        eps_minus,
    })
}

/// Split a feasible, non-extreme density along its perturbation witness.
/// Extreme inputs are an error; callers decide extremality first.
pub fn split_once(d: &Density, x: &ObservableTuple, tol: &Tolerances) -> Result<SplitResult> {
    let report = is_extreme(d, x, tol)?;
    match report.perturbation {
        None => Err(Error::ExtremeInput),
        Some(p) => {
            let y = d.factor(tol.rank)?;
            split_with(d, &y, &p, tol)
        }
    }
}

/// Per-piece extremality evidence: the piece has rank `rank` and its
/// compressed constraint family spans `span_rank` of the `required` = rank²
/// dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PieceCertificate {
    pub rank: usize,
    pub span_rank: usize,
    pub required: usize,
}

/// End-to-end error summary of a decomposition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Residuals {
    /// ‖Σ w_l·piece_l − D‖_F.
    pub reconstruction: f64,
    /// ‖Var_D(X) − Σ w_l·Var_{piece_l}(X)‖_F.
    pub covariance_additivity: f64,
    /// Largest |Tr(piece·X′_i)| over pieces and centered observables.
    pub membership_max: f64,
}

/// A convex decomposition D = Σ w_l·piece_l into extreme densities.
#[derive(Debug, Clone)]
pub struct ExtremalDecomposition {
    pub weights: Vec<f64>,
    pub pieces: Vec<Density>,
    pub certificates: Vec<PieceCertificate>,
    pub residuals: Residuals,
    /// Expectations Tr(D·X_i) subtracted from the observables up front.
    pub shifts: Vec<f64>,
}

/// Budget and tolerance knobs for [`decompose`].
#[derive(Debug, Clone)]
pub struct DecomposeOptions {
    pub tolerances: Tolerances,
    /// Recursion depth guard; theory needs at most rank(D) − 1.
    pub max_depth: usize,
    /// Total node guard; theory needs at most 2^rank(D) − 1.
    pub max_nodes: usize,
}

impl Default for DecomposeOptions {
    fn default() -> Self {
        Self {
            tolerances: Tolerances::default(),
            max_depth: 64,
            max_nodes: 1 << 16,
        }
    }
}

struct Walker<'a> {
    x: &'a ObservableTuple,
    tol: &'a Tolerances,
    max_depth: usize,
    max_nodes: usize,
    nodes: usize,
    leaves: Vec<(f64, Density, PieceCertificate)>,
}

impl Walker<'_> {
    fn walk(&mut self, weight: f64, d: Density, depth: usize) -> Result<()> {
        self.nodes += 1;
        if depth > self.max_depth || self.nodes > self.max_nodes {
            return Err(Error::BudgetExceeded {
                nodes: self.nodes,
                depth,
            });
        }
        let y = d.factor(self.tol.rank)?;
        let rank = y.rank();
        let analysis = spanning_analysis(&y, self.x, self.tol)?;
        match analysis.perturbation {
            None => {
                self.leaves.push((
                    weight,
                    d,
                    PieceCertificate {
                        rank,
                        span_rank: analysis.span_rank,
                        required: analysis.required,
                    },
                ));
                Ok(())
            }
            Some(p) => {
                let split = split_with(&d, &y, &p, self.tol)?;
                for child in [&split.plus, &split.minus] {
                    let child_rank = child.rank(self.tol.rank);
                    if child_rank >= rank {
                        return Err(Error::Numerical(format!(
                            "split failed to reduce rank at depth {depth}: {rank} -> {child_rank}"
                        )));
                    }
                }
                self.walk(weight * split.mu, split.plus, depth + 1)?;
                self.walk(weight * (1.0 - split.mu), split.minus, depth + 1)
            }
        }
    }
}

/// Decompose D into extreme pieces of the feasible set of the centered
/// tuple. Deterministic: identical inputs and options give identical output.
pub fn decompose(
    d: &Density,
    x: &ObservableTuple,
    opts: &DecomposeOptions,
) -> Result<ExtremalDecomposition> {
    let tol = &opts.tolerances;
    let (centered, shifts) = center(d, x)?;
    let mut walker = Walker {
        x: &centered,
        tol,
        max_depth: opts.max_depth,
        max_nodes: opts.max_nodes,
        nodes: 0,
        leaves: Vec::new(),
    };
    walker.walk(1.0, d.clone(), 0)?;

    // identical leaves appear whenever the spectrum has symmetries; merge in
    // first-seen order so output order stays deterministic
    let mut weights: Vec<f64> = Vec::new();
    let mut pieces: Vec<Density> = Vec::new();
    let mut certificates: Vec<PieceCertificate> = Vec::new();
    for (w, piece, cert) in walker.leaves {
        match pieces
            .iter()
            .position(|p| p.matrix().distance(piece.matrix()) < tol.merge)
        {
            Some(i) => weights[i] += w,
            None => {
                weights.push(w);
                pieces.push(piece);
                certificates.push(cert);
            }
        }
    }

    let reconstruction = convex_combination(&weights, &pieces)
        .distance(d.matrix());
    let var_d = covariance(d, x)?;
    let var_pieces: Vec<CovarianceMatrix> = pieces
        .iter()
        .map(|p| covariance(p, x))
        .collect::<Result<_>>()?;
    let covariance_additivity =
        CovarianceMatrix::weighted_sum(&weights, &var_pieces).distance(&var_d);
    let membership_max = pieces
        .iter()
        .map(|p| membership_residual(p, &centered))
        .fold(0.0, f64::max);

    Ok(ExtremalDecomposition {
        weights,
        pieces,
        certificates,
        residuals: Residuals {
            reconstruction,
            covariance_additivity,
            membership_max,
        },
        shifts,
    })
}

/// One named verification item.
#[derive(Debug, Clone)]
pub struct NamedCheck {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// Independent recheck of everything a decomposition claims.
#[derive(Debug, Clone)]
pub struct VerificationReport {
    pub checks: Vec<NamedCheck>,
    pub passed: bool,
}

impl VerificationReport {
    pub fn check(&self, name: &str) -> Option<&NamedCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Recompute all decomposition invariants from scratch: simplex weights,
/// reconstruction, membership in the centered feasible set, per-piece
/// extremality, the rank bound, and covariance additivity.
pub fn verify(
    d: &Density,
    x: &ObservableTuple,
    dec: &ExtremalDecomposition,
    tol: &Tolerances,
) -> Result<VerificationReport> {
    if dec.weights.len() != dec.pieces.len() {
        return Err(Error::InvalidParameter(format!(
            "{} weights against {} pieces",
            dec.weights.len(),
            dec.pieces.len()
        )));
    }
    if dec.pieces.is_empty() {
        return Err(Error::InvalidParameter("empty decomposition".into()));
    }
    for p in &dec.pieces {
        if p.dim() != d.dim() {
            return Err(Error::DimensionMismatch {
                expected: d.dim(),
                found: p.dim(),
            });
        }
    }
    let mut checks = Vec::new();

    let weight_sum: f64 = dec.weights.iter().sum();
    let min_weight = dec.weights.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    checks.push(NamedCheck {
        name: "weights-simplex",
        passed: (weight_sum - 1.0).abs() <= tol.membership && min_weight > 0.0,
        detail: format!("sum = {weight_sum:.12}, min = {min_weight:.3e}"),
    });

    let reconstruction = convex_combination(&dec.weights, &dec.pieces).distance(d.matrix());
    checks.push(NamedCheck {
        name: "reconstruction",
        passed: reconstruction <= tol.recon,
        detail: format!("Frobenius residual = {reconstruction:.3e}"),
    });

    let (centered, _) = center(d, x)?;
    let membership_max = dec
        .pieces
        .iter()
        .map(|p| membership_residual(p, &centered))
        .fold(0.0, f64::max);
    checks.push(NamedCheck {
        name: "membership",
        passed: membership_max <= tol.membership * 10.0,
        detail: format!("max |Tr(piece·X'_i)| = {membership_max:.3e}"),
    });

    let mut all_extreme = true;
    let mut extremality_detail = String::new();
    for (i, p) in dec.pieces.iter().enumerate() {
        let report = is_extreme(p, &centered, tol)?;
        if !report.extreme {
            all_extreme = false;
            extremality_detail = format!(
                "piece {i}: span_rank {} < required {}",
                report.span_rank, report.required
            );
            break;
        }
    }
    checks.push(NamedCheck {
        name: "extremality",
        passed: all_extreme,
        detail: if all_extreme {
            format!("{} pieces extreme", dec.pieces.len())
        } else {
            extremality_detail
        },
    });

    let bound = rank_bound(x.len());
    let max_rank = dec
        .pieces
        .iter()
        .map(|p| p.rank(tol.rank))
        .max()
        .unwrap_or(0);
    checks.push(NamedCheck {
        name: "rank-bound",
        passed: max_rank <= bound,
        detail: format!("max piece rank {max_rank}, bound {bound}"),
    });

    let var_d = covariance(d, x)?;
    let var_pieces: Vec<CovarianceMatrix> = dec
        .pieces
        .iter()
        .map(|p| covariance(p, x))
        .collect::<Result<_>>()?;
    let additivity = CovarianceMatrix::weighted_sum(&dec.weights, &var_pieces).distance(&var_d);
    checks.push(NamedCheck {
        name: "covariance-additivity",
        passed: additivity <= tol.var,
        detail: format!("Frobenius residual = {additivity:.3e}"),
    });

    let passed = checks.iter().all(|c| c.passed);
    Ok(VerificationReport { checks, passed })
}
