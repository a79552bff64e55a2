//! Named fixtures (Pauli triple, generalized Gell-Mann tuples, two exact
//! rank-structured instances, block-padded spanning tuples) and seeded random
//! instances for property testing.

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::density::{Density, FactoredDensity, ObservableTuple};
use crate::error::{Error, Result};
use crate::hermitian::{orthonormal_basis, real_span_rank, ComplexMatrix, HermitianMatrix};
use crate::tolerance::Tolerances;

const SQRT_2: f64 = std::f64::consts::SQRT_2;

/// The qubit observables σ_x, σ_y, σ_z with exact 0/±1/±i entries.
pub fn pauli_matrices() -> [HermitianMatrix; 3] {
    let z = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    let sx = ComplexMatrix::from_row_slice(2, 2, &[z, one, one, z]);
    let sy = ComplexMatrix::from_row_slice(2, 2, &[z, -i, i, z]);
    let sz = ComplexMatrix::from_row_slice(2, 2, &[one, z, z, -one]);
    [
        HermitianMatrix::new(sx, 0.0).expect("exact Pauli data"),
        HermitianMatrix::new(sy, 0.0).expect("exact Pauli data"),
        HermitianMatrix::new(sz, 0.0).expect("exact Pauli data"),
    ]
}

/// The tuple (σ_x, σ_y, σ_z).
pub fn pauli() -> ObservableTuple {
    let [sx, sy, sz] = pauli_matrices();
    ObservableTuple::new(vec![sx, sy, sz], 1e-12).expect("Pauli matrices are independent")
}

/// The n²−1 generalized Gell-Mann matrices, normalized to Tr λ_iλ_j = 2δ_ij,
/// ordered as: symmetric pair matrices (row-major), antisymmetric pair
/// matrices (row-major), then diagonal matrices. For n = 2 this is exactly
/// (σ_x, σ_y, σ_z).
pub fn gell_mann(n: usize) -> Result<ObservableTuple> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "generalized Gell-Mann matrices need dimension >= 2, got {n}"
        )));
    }
    let mats: Vec<HermitianMatrix> = orthonormal_basis(n)
        .into_iter()
        .skip(1)
        .map(|b| b.scale(SQRT_2))
        .collect();
    ObservableTuple::new(mats, 1e-12)
}

/// The uniform density I_n/n.
pub fn maximally_mixed(n: usize) -> Density {
    let coeff = 1.0 / n as f64;
    Density::new(
        ComplexMatrix::identity(n, n).map(|z| z * coeff),
        &Tolerances::default(),
    )
    .expect("I/n is a density")
}

/// Rank-one instance with identity covariance, exact in floating point:
/// D = diag(1, 0, …, 0) in dimension n+1 and X_i the symmetric 0/1 matrix
/// with ones at (0, i) and (i, 0).
pub fn example3(n: usize) -> (Density, ObservableTuple) {
    assert!(n >= 1, "tuple must be nonempty");
    let dim = n + 1;
    let mut d = ComplexMatrix::zeros(dim, dim);
    d[(0, 0)] = Complex64::new(1.0, 0.0);
    let density = Density::new(d, &Tolerances::default()).expect("exact projection");
    let mut obs = Vec::with_capacity(n);
    for i in 1..=n {
        let mut x = ComplexMatrix::zeros(dim, dim);
        x[(0, i)] = Complex64::new(1.0, 0.0);
        x[(i, 0)] = Complex64::new(1.0, 0.0);
        obs.push(HermitianMatrix::new(x, 0.0).expect("exact symmetric data"));
    }
    let tuple = ObservableTuple::new(obs, 1e-12).expect("disjoint supports are independent");
    (density, tuple)
}

/// Block instance with the all-ones covariance matrix:
/// D = (1/n)I_n ⊕ 0_n in dimension 2n, X_i = diag(x) ⊕ X̃_i.
///
/// Requires Σx_m = 0 and Σx_m² = n; together they make every covariance
/// entry exactly Tr(diag(x)²)/n = 1 with all means zero. D has rank n, which
/// for n > 2 exceeds the extremality rank bound floor(√(k+1)) whenever
/// k ≤ n²−1, so these instances always decompose nontrivially.
pub fn example4(
    n: usize,
    x: &[f64],
    xtilde: Vec<HermitianMatrix>,
) -> Result<(Density, ObservableTuple)> {
    if n <= 2 {
        return Err(Error::InvalidParameter(format!(
            "block instance needs n > 2, got {n}"
        )));
    }
    if x.len() != n {
        return Err(Error::InvalidParameter(format!(
            "diagonal vector has length {}, expected {n}",
            x.len()
        )));
    }
    let sum: f64 = x.iter().sum();
    if sum.abs() > 1e-9 {
        return Err(Error::InvalidParameter(format!(
            "diagonal vector must sum to 0, got {sum:.3e}"
        )));
    }
    let sum_sq: f64 = x.iter().map(|v| v * v).sum();
    if (sum_sq - n as f64).abs() > 1e-9 * n as f64 {
        return Err(Error::InvalidParameter(format!(
            "diagonal vector must have squared norm {n}, got {sum_sq:.12}"
        )));
    }
    if xtilde.is_empty() {
        return Err(Error::EmptyTuple);
    }
    for m in &xtilde {
        if m.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: m.dim(),
            });
        }
    }
    let dim = 2 * n;
    let mut d = ComplexMatrix::zeros(dim, dim);
    let coeff = Complex64::new(1.0 / n as f64, 0.0);
    for m in 0..n {
        d[(m, m)] = coeff;
    }
    let density = Density::new(d, &Tolerances::default())?;
    let mut obs = Vec::with_capacity(xtilde.len());
    for xt in &xtilde {
        let mut data = ComplexMatrix::zeros(dim, dim);
        for m in 0..n {
            data[(m, m)] = Complex64::new(x[m], 0.0);
        }
        for a in 0..n {
            for b in 0..n {
                data[(n + a, n + b)] = xt.entry(a, b);
            }
        }
        obs.push(HermitianMatrix::symmetrized(data));
    }
    let tuple = ObservableTuple::new(obs, 1e-9)?;
    Ok((density, tuple))
}

/// The closed-form zero-sum vector x_m = (2m − n − 1)·√(3/(n²−1)), m = 1…n,
/// satisfying Σx_m = 0 and Σx_m² = n exactly in real arithmetic.
pub fn example4_default_diagonal(n: usize) -> Vec<f64> {
    let scale = (3.0 / (n as f64 * n as f64 - 1.0)).sqrt();
    (1..=n)
        .map(|m| (2.0 * m as f64 - n as f64 - 1.0) * scale)
        .collect()
}

/// [`example4`] with the default diagonal and the first k Gell-Mann matrices
/// as the lower blocks.
pub fn example4_default(n: usize, k: usize) -> Result<(Density, ObservableTuple)> {
    if n <= 2 {
        return Err(Error::InvalidParameter(format!(
            "block instance needs n > 2, got {n}"
        )));
    }
    if k == 0 || k > n * n - 1 {
        return Err(Error::InvalidParameter(format!(
            "default lower blocks support 1 <= k <= {}, got {k}",
            n * n - 1
        )));
    }
    let gm = gell_mann(n)?;
    let xtilde: Vec<HermitianMatrix> = gm.observables()[..k].to_vec();
    example4(n, &example4_default_diagonal(n), xtilde)
}

/// Rank-n extreme density with k observables, n = floor(√(k+1)): the uniform
/// block (1/n)I_n ⊕ 0_m with the Gell-Mann tuple on the live block, padded to
/// size k with seeded random observables supported on the dead block (which
/// leave the compressed spanning property untouched).
pub fn padded_gellmann(
    n: usize,
    k: usize,
    m: usize,
    seed: u64,
) -> Result<(Density, ObservableTuple)> {
    if n < 2 || m < 1 {
        return Err(Error::InvalidParameter(format!(
            "padded instance needs n >= 2 and m >= 1, got n={n} m={m}"
        )));
    }
    if (k + 1).isqrt() != n {
        return Err(Error::InvalidParameter(format!(
            "rank-sharpness requires n = floor(sqrt(k+1)); n={n} k={k}"
        )));
    }
    let base = n * n - 1;
    if k < base {
        return Err(Error::InvalidParameter(format!(
            "need k >= n^2-1 = {base} to span the live block, got {k}"
        )));
    }
    let extra = k - base;
    if extra > m * m {
        return Err(Error::InvalidParameter(format!(
            "dead block of size {m} hosts at most {} independent observables, need {extra}",
            m * m
        )));
    }
    let dim = n + m;
    let mut d = ComplexMatrix::zeros(dim, dim);
    let coeff = Complex64::new(1.0 / n as f64, 0.0);
    for i in 0..n {
        d[(i, i)] = coeff;
    }
    let density = Density::new(d, &Tolerances::default())?;

    let mut obs = Vec::with_capacity(k);
    for lam in gell_mann(n)?.observables() {
        let mut data = ComplexMatrix::zeros(dim, dim);
        for a in 0..n {
            for b in 0..n {
                data[(a, b)] = lam.entry(a, b);
            }
        }
        obs.push(HermitianMatrix::symmetrized(data));
    }
    if extra > 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let lower = independent_hermitians(m, extra, &mut rng)?;
        for lo in lower {
            let mut data = ComplexMatrix::zeros(dim, dim);
            for a in 0..m {
                for b in 0..m {
                    data[(n + a, n + b)] = lo.entry(a, b);
                }
            }
            obs.push(HermitianMatrix::symmetrized(data));
        }
    }
    let tuple = ObservableTuple::new(obs, 1e-9)?;
    Ok((density, tuple))
}

/// Which fixture or random family an instance comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InstanceKind {
    Pauli,
    GellMann,
    Example3,
    Example4,
    Padded,
    Random,
}

/// Parameters for [`random_instance`]. `pad` is only read by the padded
/// kind; `rank` and `seed` only by the random (and padded) kinds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InstanceSpec {
    pub kind: InstanceKind,
    pub n: usize,
    pub k: usize,
    pub rank: usize,
    pub pad: usize,
    pub seed: u64,
}

/// Produce the named instance: deterministic for the fixture kinds, seeded
/// and reproducible for the random kind.
pub fn random_instance(spec: &InstanceSpec) -> Result<(Density, ObservableTuple)> {
    match spec.kind {
        InstanceKind::Pauli => {
            if spec.n != 2 || spec.k != 3 {
                return Err(Error::InvalidParameter(format!(
                    "pauli instance is fixed at n=2 k=3, got n={} k={}",
                    spec.n, spec.k
                )));
            }
            Ok((maximally_mixed(2), pauli()))
        }
        InstanceKind::GellMann => {
            if spec.k != spec.n * spec.n - 1 {
                return Err(Error::InvalidParameter(format!(
                    "gellmann instance requires k = n^2-1 = {}, got {}",
                    spec.n * spec.n - 1,
                    spec.k
                )));
            }
            Ok((maximally_mixed(spec.n), gell_mann(spec.n)?))
        }
        InstanceKind::Example3 => {
            if spec.n == 0 {
                return Err(Error::EmptyTuple);
            }
            if spec.k != spec.n {
                return Err(Error::InvalidParameter(format!(
                    "rank-one identity-covariance instance has k = n (dimension n+1), got n={} k={}",
                    spec.n, spec.k
                )));
            }
            Ok(example3(spec.n))
        }
        InstanceKind::Example4 => example4_default(spec.n, spec.k),
        InstanceKind::Padded => padded_gellmann(spec.n, spec.k, spec.pad, spec.seed),
        InstanceKind::Random => {
            let n = spec.n;
            if n == 0 {
                return Err(Error::InvalidParameter("dimension must be positive".into()));
            }
            if spec.k == 0 || spec.k > n * n {
                return Err(Error::InvalidParameter(format!(
                    "H_{n} hosts at most {} independent observables, got k={}",
                    n * n,
                    spec.k
                )));
            }
            if spec.rank == 0 || spec.rank > n {
                return Err(Error::InvalidParameter(format!(
                    "density rank must lie in 1..={n}, got {}",
                    spec.rank
                )));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            let density = random_density(n, spec.rank, &mut rng);
            let obs = independent_hermitians(n, spec.k, &mut rng)?;
            let tuple = ObservableTuple::new(obs, 1e-9)?;
            Ok((density, tuple))
        }
    }
}

/// Seeded density of exact rank r: a normalized exponential spectrum on r
/// eigenvalues conjugated by a Haar-distributed unitary.
pub fn random_density(n: usize, r: usize, rng: &mut ChaCha8Rng) -> Density {
    assert!(r >= 1 && r <= n);
    let mut spectrum = vec![0.0_f64; n];
    let mut total = 0.0;
    for s in spectrum.iter_mut().take(r) {
        // inverse-CDF exponential draws give a uniform simplex point after
        // normalization
        let u: f64 = rng.random();
        *s = -(1.0 - u).ln();
        total += *s;
    }
    for s in spectrum.iter_mut().take(r) {
        *s /= total;
    }
    let u = haar_unitary(n, rng);
    let mut y = ComplexMatrix::zeros(n, r);
    for col in 0..r {
        let s = spectrum[col].sqrt();
        for row in 0..n {
            y[(row, col)] = u[(row, col)] * s;
        }
    }
    FactoredDensity::from_columns_unchecked(y).density()
}

/// Haar-distributed unitary: QR of a complex Ginibre matrix with the phases
/// of R's diagonal pushed into Q (plain QR is not Haar without this step).
pub fn haar_unitary(n: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    let g = ComplexMatrix::from_fn(n, n, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for col in 0..n {
        let d = r[(col, col)];
        let modulus = d.norm();
        if modulus > 0.0 {
            let phase = d / modulus;
            for row in 0..n {
                q[(row, col)] *= phase;
            }
        }
    }
    q
}

/// Seeded Hermitian with independent Gaussian entries: N(0,1) diagonal,
/// (N(0,1) + i·N(0,1))/√2 above it.
pub fn gaussian_hermitian(n: usize, rng: &mut ChaCha8Rng) -> HermitianMatrix {
    let mut data = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        let d: f64 = rng.sample(StandardNormal);
        data[(i, i)] = Complex64::new(d, 0.0);
        for j in (i + 1)..n {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            let z = Complex64::new(re / SQRT_2, im / SQRT_2);
            data[(i, j)] = z;
            data[(j, i)] = z.conj();
        }
    }
    HermitianMatrix::symmetrized(data)
}

/// k seeded Gaussian Hermitians in H_n, redrawn until independent.
fn independent_hermitians(
    n: usize,
    k: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<HermitianMatrix>> {
    if k > n * n {
        return Err(Error::InvalidParameter(format!(
            "H_{n} hosts at most {} independent observables, got k={k}",
            n * n
        )));
    }
    // Gaussian tuples are independent with probability 1; the loop guards
    // against astronomically unlikely draws without risking nontermination.
    for _ in 0..16 {
        let mats: Vec<HermitianMatrix> = (0..k).map(|_| gaussian_hermitian(n, rng)).collect();
        if real_span_rank(&mats, 1e-9)? == k {
            return Ok(mats);
        }
    }
    Err(Error::Numerical(format!(
        "could not draw {k} independent observables in H_{n}"
    )))
}
