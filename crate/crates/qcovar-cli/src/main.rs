//! `qcovar`: covariance matrices of observable tuples, extreme-point checks
//! for zero-expectation density sets, constructive extremal decompositions,
//! fixture generation, and solution verification.
//!
//! All subcommands speak the JSON problem/solution formats from
//! [`qcovar::io`]. Exit codes: 0 success (or positive verdict), 1 negative
//! verdict, 2 I/O or parse failure, 3 validation failure, 4 budget
//! exhaustion.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::{env, fs};

use clap::{Args, Parser, Subcommand, ValueEnum};

use qcovar::extremality::perturbation_residual;
use qcovar::generators::{random_instance, InstanceKind, InstanceSpec};
use qcovar::io::{
    matrix_to_rows, CheckFile, CovarianceFile, PerturbationFile, ProblemFile, SolutionFile,
    ToleranceOverrides, VerifyFile,
};
use qcovar::{
    center, covariance, decompose, find_perturbation, in_feasible_set, is_extreme,
    is_extreme_sandwich, membership_residual, verify, DecomposeOptions, Density, Error,
    ExtremalityReport, ObservableTuple, Tolerances,
};

const EXIT_NEGATIVE: u8 = 1;
const EXIT_IO: u8 = 2;
const EXIT_VALIDATION: u8 = 3;
const EXIT_BUDGET: u8 = 4;

#[derive(Parser)]
#[command(
    name = "qcovar",
    version,
    about = "Covariance extremality and extremal decomposition toolkit",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the covariance matrix Var_D(X) of a problem file
    Covariance(CovarianceArgs),
    /// Decide whether D is extreme in the zero-expectation density set
    Check(CheckArgs),
    /// Split D into extreme pieces whose covariances sum back to Var_D(X)
    Decompose(DecomposeArgs),
    /// Write a named fixture or seeded random instance as a problem file
    Generate(GenerateArgs),
    /// Recheck every certificate of a solution file against its problem
    Verify(VerifyArgs),
}

#[derive(Args)]
struct CovarianceArgs {
    /// Problem file (JSON)
    #[arg(short, long, value_name = "FILE")]
    input: PathBuf,
    /// Destination path; stdout when omitted
    #[arg(short, long, value_name = "FILE")]
    output: Option<PathBuf>,
    /// Rebase the whole tolerance ladder on this value
    #[arg(long, value_name = "FLOAT")]
    tol: Option<f64>,
    /// Shift each observable by its expectation first and report the shifts
    #[arg(long)]
    center: bool,
    /// Also emit entrywise real parts plus the largest discarded imaginary magnitude
    #[arg(long)]
    real: bool,
}

#[derive(Args)]
struct CheckArgs {
    /// Problem file (JSON)
    #[arg(short, long, value_name = "FILE")]
    input: PathBuf,
    /// Write the verdict as JSON here in addition to the stdout report
    #[arg(short, long, value_name = "FILE")]
    output: Option<PathBuf>,
    /// Rebase the whole tolerance ladder on this value
    #[arg(long, value_name = "FLOAT")]
    tol: Option<f64>,
    /// Shift observables by their expectations instead of refusing
    /// non-centered input
    #[arg(long)]
    center: bool,
    /// Rank criterion to apply
    #[arg(long, value_enum, default_value_t = CriterionArg::Spanning)]
    criterion: CriterionArg,
    /// Serialize the perturbation witness here when the verdict is negative
    #[arg(long, value_name = "FILE")]
    emit_perturbation: Option<PathBuf>,
}

#[derive(Args)]
struct DecomposeArgs {
    /// Problem file (JSON)
    #[arg(short, long, value_name = "FILE")]
    input: PathBuf,
    /// Destination for the solution file; stdout when omitted
    #[arg(short, long, value_name = "FILE")]
    output: Option<PathBuf>,
    /// Rebase the whole tolerance ladder on this value
    #[arg(long, value_name = "FLOAT")]
    tol: Option<f64>,
    /// Shift observables by their expectations instead of refusing
    /// non-centered input
    #[arg(long)]
    center: bool,
}

#[derive(Args)]
struct GenerateArgs {
    /// Instance family to produce
    #[arg(value_enum)]
    kind: KindArg,
    /// Destination for the problem file; stdout when omitted
    #[arg(short, long, value_name = "FILE")]
    output: Option<PathBuf>,
    /// Matrix dimension parameter of the family
    #[arg(long, value_name = "N")]
    n: Option<usize>,
    /// Number of observables (family-specific default)
    #[arg(long, value_name = "K")]
    k: Option<usize>,
    /// Density rank for the random family
    #[arg(long, value_name = "R")]
    rank: Option<usize>,
    /// Zero-block padding size for the padded family
    #[arg(long, value_name = "M")]
    pad: Option<usize>,
    /// RNG seed for the seeded families
    #[arg(long, value_name = "U64", default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct VerifyArgs {
    /// Problem file the solution claims to decompose
    #[arg(value_name = "PROBLEM")]
    problem: PathBuf,
    /// Solution file to recheck
    #[arg(value_name = "SOLUTION")]
    solution: PathBuf,
    /// Write the per-check report as JSON here
    #[arg(short, long, value_name = "FILE")]
    output: Option<PathBuf>,
    /// Rebase the whole tolerance ladder on this value
    #[arg(long, value_name = "FLOAT")]
    tol: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum CriterionArg {
    /// Compressed family Y*X_iY, Y*Y must span all r² dimensions
    Spanning,
    /// Two-sided family DX_iD, D² must have real rank r²
    Sandwich,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    /// Pauli triple on the maximally mixed qubit (n = 2, k = 3)
    Pauli,
    /// Gell-Mann basis of H_n on the maximally mixed state (k = n² − 1)
    Gellmann,
    /// Rank-one density in dimension n + 1 with identity covariance (k = n)
    Example3,
    /// Rank-n block density with balanced diagonal observables (n > 2)
    Example4,
    /// Gell-Mann family zero-padded by m rows plus seeded lower-block extras
    Padded,
    /// Seeded Haar-random density of chosen rank with GUE observables
    Random,
}

/// A terminal failure: diagnostic for stderr plus the process exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn io(message: String) -> Self {
        Failure { code: EXIT_IO, message }
    }

    fn validation(message: String) -> Self {
        Failure { code: EXIT_VALIDATION, message }
    }

    fn from_error(e: Error) -> Self {
        let code = match e {
            Error::BudgetExceeded { .. } => EXIT_BUDGET,
            _ => EXIT_VALIDATION,
        };
        Failure { code, message: e.to_string() }
    }
}

type CmdResult = Result<u8, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Covariance(args) => cmd_covariance(args),
        Command::Check(args) => cmd_check(args),
        Command::Decompose(args) => cmd_decompose(args),
        Command::Generate(args) => cmd_generate(args),
        Command::Verify(args) => cmd_verify(args),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn read_problem(path: &Path) -> Result<ProblemFile, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::io(format!("{}: {e}", path.display())))?;
    ProblemFile::parse(&text).map_err(|e| Failure::io(format!("{}: {e}", path.display())))
}

/// Tolerance precedence, loosest binding first: built-in defaults, then the
/// QCOVAR_TOL environment base, then per-file overrides, then the --tol flag.
fn resolve_tolerances(
    file: Option<&ToleranceOverrides>,
    flag: Option<f64>,
) -> Result<Tolerances, Failure> {
    let mut tol = Tolerances::default();
    if let Ok(raw) = env::var("QCOVAR_TOL") {
        let base: f64 = raw.trim().parse().map_err(|_| {
            Failure::validation(format!("QCOVAR_TOL is not a number: {raw:?}"))
        })?;
        check_base(base)?;
        tol = Tolerances::from_base(base);
    }
    if let Some(overrides) = file {
        tol = overrides.apply(tol);
    }
    if let Some(base) = flag {
        check_base(base)?;
        tol = Tolerances::from_base(base);
    }
    Ok(tol)
}

fn check_base(base: f64) -> Result<(), Failure> {
    if base.is_finite() && base > 0.0 {
        Ok(())
    } else {
        Err(Failure::validation(format!(
            "tolerance base must be a positive finite number, got {base}"
        )))
    }
}

fn emit(output: Option<&Path>, text: &str) -> Result<(), Failure> {
    match output {
        Some(path) => {
            fs::write(path, text).map_err(|e| Failure::io(format!("{}: {e}", path.display())))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn warn_dropped(dropped: &[usize]) {
    if !dropped.is_empty() {
        eprintln!(
            "warning: dropped {} linearly dependent observable(s) at input position(s) {:?}",
            dropped.len(),
            dropped
        );
    }
}

/// Refusal policy shared by `check` and `decompose`: a non-centered problem
/// is an error unless --center was passed to make the shift explicit.
fn require_centered_or_flag(
    d: &Density,
    x: &ObservableTuple,
    center_requested: bool,
    tol: &Tolerances,
    command: &str,
) -> Result<(), Failure> {
    if center_requested || in_feasible_set(d, x, tol.membership) {
        return Ok(());
    }
    let worst = membership_residual(d, x);
    Err(Failure::validation(format!(
        "density has nonzero expectation values (max |Tr D·X_i| = {worst:.3e} > {:.3e}); \
         {command} requires a centered problem — rerun with --center to shift each \
         observable by its expectation",
        tol.membership
    )))
}

fn cmd_covariance(args: CovarianceArgs) -> CmdResult {
    let file = read_problem(&args.input)?;
    let tol = resolve_tolerances(file.tolerances.as_ref(), args.tol)?;
    let (d, x, dropped) = file.instantiate(&tol).map_err(Failure::from_error)?;
    warn_dropped(&dropped);

    let (x, shifts) = if args.center {
        let (shifted, shifts) = center(&d, &x).map_err(Failure::from_error)?;
        (shifted, Some(shifts))
    } else {
        (x, None)
    };
    let cov = covariance(&d, &x).map_err(Failure::from_error)?;

    let (real_entries, hermiticity_residual) = if args.real {
        let re = cov.real_part();
        let rows: Vec<Vec<f64>> =
            (0..re.nrows()).map(|i| (0..re.ncols()).map(|j| re[(i, j)]).collect()).collect();
        let worst_im = cov
            .entries()
            .iter()
            .map(|z| z.im.abs())
            .fold(0.0_f64, f64::max);
        (Some(rows), Some(worst_im))
    } else {
        (None, None)
    };

    let out = CovarianceFile {
        k: cov.size(),
        entries: matrix_to_rows(cov.entries()),
        real_entries,
        hermiticity_residual,
        shifts,
    };
    emit(args.output.as_deref(), &out.to_json())?;
    Ok(0)
}

fn cmd_check(args: CheckArgs) -> CmdResult {
    let file = read_problem(&args.input)?;
    let tol = resolve_tolerances(file.tolerances.as_ref(), args.tol)?;
    let (d, x, dropped) = file.instantiate(&tol).map_err(Failure::from_error)?;
    warn_dropped(&dropped);
    require_centered_or_flag(&d, &x, args.center, &tol, "check")?;
    let (x, shifts) = if args.center {
        let (shifted, shifts) = center(&d, &x).map_err(Failure::from_error)?;
        (shifted, shifts)
    } else {
        (x, Vec::new())
    };

    let report = match args.criterion {
        CriterionArg::Spanning => is_extreme(&d, &x, &tol),
        CriterionArg::Sandwich => is_extreme_sandwich(&d, &x, &tol),
    }
    .map_err(Failure::from_error)?;
    print_check_report(&report);

    if let Some(path) = args.output.as_deref() {
        let mut out = CheckFile::from_report(&report);
        if args.center {
            out.shifts = Some(shifts.clone());
        }
        if !dropped.is_empty() {
            out.dropped = Some(dropped.clone());
        }
        emit(Some(path), &out.to_json())?;
    }

    if let Some(path) = args.emit_perturbation.as_deref() {
        if report.extreme {
            eprintln!("note: no perturbation to emit, the density is extreme");
        } else {
            // The sandwich route proves non-extremality without a witness;
            // fall back to the spanning route to produce one.
            let perturbation = match report.perturbation {
                Some(ref p) => p.clone(),
                None => {
                    let y = d.factor(tol.rank).map_err(Failure::from_error)?;
                    find_perturbation(&y, &x, &tol)
                        .map_err(Failure::from_error)?
                        .ok_or_else(|| {
                            Failure::validation(
                                "criteria disagree: sandwich rank is deficient but the \
                                 compressed family spans; tighten tolerances"
                                    .into(),
                            )
                        })?
                }
            };
            let residual = perturbation_residual(&perturbation.s, &x);
            let out = PerturbationFile::from_perturbation(&perturbation, residual);
            emit(Some(path), &out.to_json())?;
        }
    }

    Ok(if report.extreme { 0 } else { EXIT_NEGATIVE })
}

fn print_check_report(report: &ExtremalityReport) {
    println!("extreme: {}", report.extreme);
    println!("rank: {}", report.rank);
    println!("span rank: {} / {}", report.span_rank, report.required);
    println!("criterion: {}", report.criterion.as_str());
}

fn cmd_decompose(args: DecomposeArgs) -> CmdResult {
    let file = read_problem(&args.input)?;
    let tol = resolve_tolerances(file.tolerances.as_ref(), args.tol)?;
    let (d, x, dropped) = file.instantiate(&tol).map_err(Failure::from_error)?;
    warn_dropped(&dropped);
    // decompose() centers internally and records the true shifts in the
    // solution; the gate only enforces that the shift was asked for.
    require_centered_or_flag(&d, &x, args.center, &tol, "decompose")?;

    let opts = DecomposeOptions { tolerances: tol, ..DecomposeOptions::default() };
    let dec = decompose(&d, &x, &opts).map_err(Failure::from_error)?;
    let out = SolutionFile::from_decomposition(&dec, &opts.tolerances, None);
    emit(args.output.as_deref(), &out.to_json())?;
    eprintln!(
        "decomposed into {} extreme piece(s); reconstruction residual {:.3e}",
        dec.pieces.len(),
        dec.residuals.reconstruction
    );
    Ok(0)
}

fn cmd_generate(args: GenerateArgs) -> CmdResult {
    let kind = match args.kind {
        KindArg::Pauli => InstanceKind::Pauli,
        KindArg::Gellmann => InstanceKind::GellMann,
        KindArg::Example3 => InstanceKind::Example3,
        KindArg::Example4 => InstanceKind::Example4,
        KindArg::Padded => InstanceKind::Padded,
        KindArg::Random => InstanceKind::Random,
    };
    let n = args.n.unwrap_or(match kind {
        InstanceKind::Example4 | InstanceKind::GellMann => 3,
        _ => 2,
    });
    let k = args.k.unwrap_or(match kind {
        InstanceKind::Pauli => 3,
        InstanceKind::GellMann | InstanceKind::Padded => n.saturating_mul(n).saturating_sub(1),
        InstanceKind::Example3 | InstanceKind::Example4 => n,
        InstanceKind::Random => n.saturating_mul(n).min(3),
    });
    let spec = InstanceSpec {
        kind,
        n,
        k,
        rank: args.rank.unwrap_or(n),
        pad: args.pad.unwrap_or(1),
        seed: args.seed,
    };
    // Parameter failures here are input errors, same class as a bad file.
    let (d, x) = random_instance(&spec)
        .map_err(|e| Failure::io(format!("cannot generate instance: {e}")))?;
    let file = ProblemFile::from_instance(&d, &x);
    emit(args.output.as_deref(), &file.to_json())?;
    Ok(0)
}

fn cmd_verify(args: VerifyArgs) -> CmdResult {
    let problem = read_problem(&args.problem)?;
    let sol_text = fs::read_to_string(&args.solution)
        .map_err(|e| Failure::io(format!("{}: {e}", args.solution.display())))?;
    let solution = SolutionFile::parse(&sol_text)
        .map_err(|e| Failure::io(format!("{}: {e}", args.solution.display())))?;

    // Solution files echo the tolerances they were produced under; those
    // take the file-override slot of the precedence ladder.
    let mut tol = resolve_tolerances(problem.tolerances.as_ref(), None)?;
    if problem.tolerances.is_none() {
        tol = solution.config.tolerances;
    }
    if let Some(base) = args.tol {
        check_base(base)?;
        tol = Tolerances::from_base(base);
    }

    let (d, x, dropped) = problem.instantiate(&tol).map_err(Failure::from_error)?;
    warn_dropped(&dropped);
    let dec = solution.instantiate(&tol).map_err(Failure::from_error)?;
    let report = verify(&d, &x, &dec, &tol).map_err(Failure::from_error)?;

    for check in &report.checks {
        let tag = if check.passed { "PASS" } else { "FAIL" };
        println!("{tag} {} ({})", check.name, check.detail);
    }
    println!("verified: {}", report.passed);

    if let Some(path) = args.output.as_deref() {
        emit(Some(path), &VerifyFile::from_report(&report).to_json())?;
    }
    Ok(if report.passed { 0 } else { EXIT_NEGATIVE })
}
