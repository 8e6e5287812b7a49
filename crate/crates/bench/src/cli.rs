//! The `run` command: load or generate matrices, solve with one or more
//! variants, report CSV/JSON and a summary table.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use clap::{Args, Parser, Subcommand};
use mplobpcg::analysis::BoundReport;
use mplobpcg::dense::small_herm_eig;
use mplobpcg::precond::Preconditioner;
use mplobpcg::solver::{IterationRecord, SolverEvent, Timings};
use mplobpcg::{solve, Matrix, PrecisionTag, RealScalar, SolverConfig, Variant, WorkingScalar};
use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::gen::{complex_kernel, kernel, laplace2d, KernelKind};
use crate::mm::{read_matrix_market, write_matrix_market, MmError, MmMatrix};

/// Largest order for which `--bounds` densifies the problem.
pub const BOUNDS_MAX_N: usize = 200;

pub const CSV_COLUMNS: [&str; 15] = [
    "matrix",
    "n",
    "nnz",
    "variant",
    "k",
    "m",
    "seed",
    "iters_lower",
    "iters_working",
    "converged",
    "idx",
    "theta",
    "resid",
    "t_factor",
    "t_total",
];

pub const BOUND_COLUMNS: [&str; 7] = ["eps_r", "eps_t", "gamma_precond", "norm_t_norm_a", "gamma_total", "rate", "floor"];

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Matrix(#[from] MmError),
    #[error("{matrix} / {variant}: {source}")]
    Solve {
        matrix: String,
        variant: Variant,
        source: mplobpcg::Error,
    },
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Parser)]
#[command(name = "mplobpcg-bench", version, about = "Mixed-precision LOBPCG benchmark harness")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve for the smallest eigenpairs and report.
    Run(RunArgs),
}

/// A generated test matrix.
#[derive(Debug, Clone, PartialEq)]
pub enum GenSpec {
    Laplace2d { nx: usize, ny: usize },
    Kernel { kind: KernelKind, complex: bool, n: usize, seed: u64 },
}

impl GenSpec {
    pub fn name(&self) -> String {
        match self {
            GenSpec::Laplace2d { nx, ny } => format!("laplace2d:{nx}x{ny}"),
            GenSpec::Kernel { kind, complex, n, seed } => {
                let base = match kind {
                    KernelKind::Gaussian => "gaussian",
                    KernelKind::Polynomial => "poly",
                };
                let c = if *complex { "c" } else { "" };
                format!("{c}{base}:{n}:{seed}")
            }
        }
    }
}

/// `laplace2d:NXxNY`, or `{gaussian,poly,cgaussian,cpoly}:N[:SEED]`.
pub fn parse_gen(s: &str) -> Result<GenSpec, String> {
    let mut parts = s.split(':');
    let kind = parts.next().unwrap_or_default();
    let size = parts.next().ok_or_else(|| format!("`{s}` lacks a size"))?;
    let seed = parts.next();
    if parts.next().is_some() {
        return Err(format!("`{s}` has too many fields"));
    }
    let count = |t: &str| t.parse::<usize>().ok().filter(|&v| v > 0).ok_or_else(|| format!("bad size `{t}`"));
    if kind == "laplace2d" {
        if seed.is_some() {
            return Err("laplace2d takes no seed".into());
        }
        let (nx, ny) = size.split_once('x').ok_or_else(|| format!("expected NXxNY, got `{size}`"))?;
        return Ok(GenSpec::Laplace2d {
            nx: count(nx)?,
            ny: count(ny)?,
        });
    }
    let (kind, complex) = match kind {
        "gaussian" => (KernelKind::Gaussian, false),
        "poly" => (KernelKind::Polynomial, false),
        "cgaussian" => (KernelKind::Gaussian, true),
        "cpoly" => (KernelKind::Polynomial, true),
        other => return Err(format!("unknown generator `{other}`")),
    };
    let seed = match seed {
        Some(t) => t.parse::<u64>().map_err(|_| format!("bad seed `{t}`"))?,
        None => 0,
    };
    Ok(GenSpec::Kernel {
        kind,
        complex,
        n: count(size)?,
        seed,
    })
}

/// Variants selected by `--variant`.
#[derive(Debug, Clone, PartialEq)]
pub struct VariantSet(pub Vec<Variant>);

fn parse_variants(s: &str) -> Result<VariantSet, String> {
    if s == "all" {
        return Ok(VariantSet(Variant::LOBPCG.to_vec()));
    }
    s.parse::<Variant>().map(|v| VariantSet(vec![v])).map_err(|e| e.to_string())
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Matrix Market file (repeatable).
    #[arg(long, required_unless_present = "gen")]
    pub matrix: Vec<PathBuf>,
    /// Generated matrix: laplace2d:NXxNY, gaussian:N[:SEED], poly:N[:SEED], cgaussian:N[:SEED], cpoly:N[:SEED] (repeatable).
    #[arg(long, value_parser = parse_gen)]
    pub gen: Vec<GenSpec>,
    /// Number of wanted eigenpairs.
    #[arg(long)]
    pub k: usize,
    /// Block size; defaults to ceil(1.5 k).
    #[arg(long)]
    pub block: Option<usize>,
    #[arg(long, default_value_t = SolverConfig::DEFAULT_TOL)]
    pub tol: f64,
    #[arg(long, default_value_t = SolverConfig::DEFAULT_LOWER_TOL)]
    pub lower_tol: f64,
    /// Iteration cap per stage.
    #[arg(long, default_value_t = SolverConfig::DEFAULT_MAXIT)]
    pub maxit: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// dlobpcg-dchol, dlobpcg-schol, mplobpcg-schol, pinvit, or all (the three LOBPCG variants).
    #[arg(long, default_value = "mplobpcg-schol", value_parser = parse_variants)]
    pub variant: VariantSet,
    #[arg(long, default_value_t = mplobpcg::dense::DEFAULT_SKETCH_ROWS)]
    pub sketch_rows: usize,
    /// Evaluate the rounding-error bounds (matrices with n <= 200).
    #[arg(long)]
    pub bounds: bool,
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// JSON file with per-iteration history.
    #[arg(long)]
    pub history: Option<PathBuf>,
    /// Independent (matrix, variant) solves to run concurrently.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    /// Write the (single) input matrix in Matrix Market format.
    #[arg(long)]
    pub dump_matrix: Option<PathBuf>,
}

impl RunArgs {
    fn config(&self, variant: Variant) -> SolverConfig {
        let mut cfg = SolverConfig::new(self.k, variant)
            .with_tol(self.tol)
            .with_maxit(self.maxit)
            .with_seed(self.seed);
        if let Some(m) = self.block {
            cfg = cfg.with_block(m);
        }
        cfg.lower_tol = self.lower_tol;
        cfg.sketch_rows = self.sketch_rows;
        cfg
    }
}

#[derive(Debug, Clone)]
pub enum Problem {
    Real(Matrix<f64>),
    Complex(Matrix<Complex64>),
}

impl Problem {
    pub fn n(&self) -> usize {
        match self {
            Problem::Real(a) => a.n(),
            Problem::Complex(a) => a.n(),
        }
    }

    pub fn nnz(&self) -> usize {
        match self {
            Problem::Real(a) => a.nnz(),
            Problem::Complex(a) => a.nnz(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct NamedProblem {
    pub name: String,
    pub problem: Problem,
    /// Diagonal shift added by the kernel generator.
    pub shift: f64,
}

pub fn generate(spec: &GenSpec) -> NamedProblem {
    let (problem, shift) = match *spec {
        GenSpec::Laplace2d { nx, ny } => (Problem::Real(Matrix::Sparse(laplace2d(nx, ny))), 0.0),
        GenSpec::Kernel {
            kind,
            complex: false,
            n,
            seed,
        } => {
            let g = kernel(kind, n, seed);
            (Problem::Real(Matrix::Dense(g.matrix)), g.shift)
        }
        GenSpec::Kernel {
            kind,
            complex: true,
            n,
            seed,
        } => {
            let g = complex_kernel(kind, n, seed);
            (Problem::Complex(Matrix::Dense(g.matrix)), g.shift)
        }
    };
    NamedProblem {
        name: spec.name(),
        problem,
        shift,
    }
}

pub fn load(path: &std::path::Path) -> Result<NamedProblem, CliError> {
    let name = path.file_stem().map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned());
    let problem = match read_matrix_market(path)? {
        MmMatrix::Real(a) => Problem::Real(Matrix::Sparse(a)),
        MmMatrix::Complex(a) => Problem::Complex(Matrix::Sparse(a)),
    };
    Ok(NamedProblem {
        name,
        problem,
        shift: 0.0,
    })
}

fn to_mm(p: &Problem) -> Result<MmMatrix, CliError> {
    let sparse = |e: mplobpcg::Error| CliError::Usage(format!("cannot store matrix: {e}"));
    Ok(match p {
        Problem::Real(Matrix::Sparse(a)) => MmMatrix::Real(a.clone()),
        Problem::Real(Matrix::Dense(a)) => MmMatrix::Real(mplobpcg::sparse::CsrMatrix::from_dense(a).map_err(sparse)?),
        Problem::Complex(Matrix::Sparse(a)) => MmMatrix::Complex(a.clone()),
        Problem::Complex(Matrix::Dense(a)) => {
            MmMatrix::Complex(mplobpcg::sparse::CsrMatrix::from_dense(a).map_err(sparse)?)
        }
    })
}

/// One solve of one matrix with one variant.
#[derive(Debug, Clone, Serialize)]
pub struct RunRecord {
    pub matrix: String,
    pub n: usize,
    pub nnz: usize,
    pub variant: Variant,
    pub k: usize,
    pub m: usize,
    pub seed: u64,
    pub iters_lower: usize,
    pub iters_working: usize,
    pub converged: bool,
    pub theta: Vec<f64>,
    pub resid: Vec<f64>,
    pub norm_estimate: f64,
    pub timings: Timings,
    /// Total time relative to `dlobpcg-dchol` on the same matrix, when it ran.
    pub relative_time: Option<f64>,
    pub matrix_shift: f64,
    pub bounds: Option<BoundReport>,
    pub events: Vec<SolverEvent>,
    pub history: Vec<IterationRecord>,
}

fn bound_report<W: WorkingScalar>(a: &Matrix<W>, variant: Variant) -> Result<BoundReport, mplobpcg::Error> {
    let dense = a.to_dense();
    let precision = match variant {
        Variant::DlobpcgDchol => PrecisionTag::Working,
        _ => PrecisionTag::Lower,
    };
    let p = Preconditioner::build(&Matrix::Dense(dense.clone()), precision)?;
    let spectrum = small_herm_eig(&dense)?.values;
    let rho = 0.5 * (spectrum[0].to_f64() + spectrum[1].to_f64());
    BoundReport::evaluate(&dense, &p, rho)
}

fn solve_one<W: WorkingScalar>(
    named: &NamedProblem,
    a: &Matrix<W>,
    cfg: &SolverConfig,
    bounds: bool,
    warn: &Mutex<Vec<String>>,
) -> Result<RunRecord, CliError> {
    let res = solve(a, cfg).map_err(|source| CliError::Solve {
        matrix: named.name.clone(),
        variant: cfg.variant,
        source,
    })?;
    let bounds = if bounds && a.n() <= BOUNDS_MAX_N {
        match bound_report(a, cfg.variant) {
            Ok(r) => Some(r),
            Err(e) => {
                warn.lock().unwrap().push(format!("{}: bounds unavailable: {e}", named.name));
                None
            }
        }
    } else {
        None
    };
    Ok(RunRecord {
        matrix: named.name.clone(),
        n: a.n(),
        nnz: a.nnz(),
        variant: cfg.variant,
        k: cfg.k,
        m: cfg.m,
        seed: cfg.seed,
        iters_lower: res.iterations_lower,
        iters_working: res.iterations_working,
        converged: res.converged,
        theta: res.theta,
        resid: res.residual_norms,
        norm_estimate: res.norm_estimate,
        timings: res.timings,
        relative_time: None,
        matrix_shift: named.shift,
        bounds,
        events: res.events,
        history: res.history,
    })
}

/// Runs every (matrix, variant) pair; results are in input order.
pub fn run(args: &RunArgs, warnings: &mut Vec<String>) -> Result<Vec<RunRecord>, CliError> {
    if args.jobs == 0 {
        return Err(CliError::Usage("--jobs must be positive".into()));
    }
    let mut problems = Vec::new();
    for path in &args.matrix {
        problems.push(load(path)?);
    }
    problems.extend(args.gen.iter().map(generate));
    if let Some(path) = &args.dump_matrix {
        if problems.len() != 1 {
            return Err(CliError::Usage("--dump-matrix needs exactly one input matrix".into()));
        }
        write_matrix_market(path, &to_mm(&problems[0].problem)?)?;
    }
    let variants = args.variant.0.clone();
    for p in &problems {
        for &v in &variants {
            args.config(v)
                .validate(p.problem.n())
                .map_err(|e| CliError::Usage(format!("{}: {e}", p.name)))?;
        }
        if args.bounds && p.problem.n() > BOUNDS_MAX_N {
            warnings.push(format!("{}: --bounds skipped, n = {} > {BOUNDS_MAX_N}", p.name, p.problem.n()));
        }
    }

    let tasks: Vec<(usize, Variant)> = (0..problems.len())
        .flat_map(|i| variants.iter().map(move |&v| (i, v)))
        .collect();
    let slots: Vec<Mutex<Option<Result<RunRecord, CliError>>>> = tasks.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    let warn = Mutex::new(Vec::new());
    let worker = || loop {
        let t = next.fetch_add(1, Ordering::Relaxed);
        let Some(&(pi, variant)) = tasks.get(t) else { break };
        let named = &problems[pi];
        let cfg = args.config(variant);
        let out = match &named.problem {
            Problem::Real(a) => solve_one(named, a, &cfg, args.bounds, &warn),
            Problem::Complex(a) => solve_one(named, a, &cfg, args.bounds, &warn),
        };
        *slots[t].lock().unwrap() = Some(out);
    };
    std::thread::scope(|s| {
        for _ in 1..args.jobs.min(tasks.len()) {
            s.spawn(worker);
        }
        worker();
    });
    warnings.extend(warn.into_inner().unwrap());

    let mut records = Vec::with_capacity(tasks.len());
    for slot in slots {
        records.push(slot.into_inner().unwrap().expect("every task ran")?);
    }
    for i in 0..records.len() {
        let baseline = records
            .iter()
            .find(|r| r.matrix == records[i].matrix && r.variant == Variant::DlobpcgDchol)
            .map(|r| r.timings.total);
        records[i].relative_time = baseline.filter(|&b| b > 0.0).map(|b| records[i].timings.total / b);
    }
    Ok(records)
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| format!("{x:e}"))
}

/// One row per eigenpair; bound columns are appended when `with_bounds`.
pub fn write_csv<W: Write>(out: W, records: &[RunRecord], with_bounds: bool) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<&str> = CSV_COLUMNS.to_vec();
    if with_bounds {
        header.extend(BOUND_COLUMNS);
    }
    w.write_record(&header)?;
    for r in records {
        for (idx, (theta, resid)) in r.theta.iter().zip(&r.resid).enumerate() {
            let mut row = vec![
                r.matrix.clone(),
                r.n.to_string(),
                r.nnz.to_string(),
                r.variant.to_string(),
                r.k.to_string(),
                r.m.to_string(),
                r.seed.to_string(),
                r.iters_lower.to_string(),
                r.iters_working.to_string(),
                r.converged.to_string(),
                idx.to_string(),
                format!("{theta:e}"),
                format!("{resid:e}"),
                format!("{:e}", r.timings.factor),
                format!("{:e}", r.timings.total),
            ];
            if with_bounds {
                match &r.bounds {
                    Some(b) => row.extend([
                        format!("{:e}", b.eps_r),
                        opt(b.eps_t),
                        format!("{:e}", b.gamma_precond),
                        format!("{:e}", b.norm_t_norm_a),
                        format!("{:e}", b.gamma_total),
                        opt(b.rate),
                        opt(b.floor),
                    ]),
                    None => row.extend(std::iter::repeat_n(String::new(), BOUND_COLUMNS.len())),
                }
            }
            w.write_record(&row)?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_summary<W: Write>(mut out: W, records: &[RunRecord]) -> io::Result<()> {
    writeln!(
        out,
        "{:<22} {:>7} {:<15} {:>6} {:>7} {:>5} {:>10} {:>8} {:>14}",
        "matrix", "n", "variant", "lower", "working", "conv", "total[s]", "rel", "theta_1"
    )?;
    for r in records {
        writeln!(
            out,
            "{:<22} {:>7} {:<15} {:>6} {:>7} {:>5} {:>10.3} {:>8} {:>14.8e}",
            r.matrix,
            r.n,
            r.variant.name(),
            r.iters_lower,
            r.iters_working,
            if r.converged { "yes" } else { "no" },
            r.timings.total,
            r.relative_time.map_or_else(|| "-".to_string(), |v| format!("{v:.3}")),
            r.theta.first().copied().unwrap_or(f64::NAN),
        )?;
    }
    Ok(())
}

/// Parses `args`, runs, writes artifacts; returns the process exit code:
/// 0 when every solve converged, 2 when one hit the iteration cap, 1 on
/// input or numerical errors.
pub fn main_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{text}");
                    0
                }
                _ => {
                    let _ = write!(err, "{text}");
                    1
                }
            };
        }
    };
    let Command::Run(args) = cli.command;
    let mut warnings = Vec::new();
    let result = run(&args, &mut warnings).and_then(|records| {
        if let Some(path) = &args.csv {
            write_csv(File::create(path)?, &records, args.bounds)?;
        }
        if let Some(path) = &args.history {
            serde_json::to_writer_pretty(File::create(path)?, &records)?;
        }
        Ok(records)
    });
    for w in &warnings {
        let _ = writeln!(err, "warning: {w}");
    }
    match result {
        Ok(records) => {
            let _ = write_summary(&mut *out, &records);
            if records.iter().all(|r| r.converged) {
                0
            } else {
                let _ = writeln!(err, "error: iteration cap reached before convergence");
                2
            }
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            1
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gen_specs() {
        assert_eq!(parse_gen("laplace2d:50x40").unwrap(), GenSpec::Laplace2d { nx: 50, ny: 40 });
        assert_eq!(
            parse_gen("cpoly:64:3").unwrap(),
            GenSpec::Kernel {
                kind: KernelKind::Polynomial,
                complex: true,
                n: 64,
                seed: 3
            }
        );
        assert_eq!(parse_gen("gaussian:8").unwrap().name(), "gaussian:8:0");
        for bad in ["laplace2d:5", "laplace2d:0x3", "wave:10", "gaussian", "gaussian:1:2:3", "poly:x"] {
            assert!(parse_gen(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn variant_lists() {
        assert_eq!(parse_variants("all").unwrap().0, Variant::LOBPCG.to_vec());
        assert_eq!(parse_variants("pinvit").unwrap().0, vec![Variant::Pinvit]);
        assert!(parse_variants("lobpcg").is_err());
    }
}
