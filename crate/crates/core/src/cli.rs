//! Batch command-line front end: identity checks, condition reports,
//! kernel-norm profiles, decomposition runs, and convergence experiments,
//! emitting CSV or JSON.
//!
//! Output is deterministic: identical invocations produce byte-identical
//! files (random sparse families are seeded, floats print in shortest
//! round-trip scientific notation, and run metadata is embedded as `#`
//! comment lines in CSV or a `meta` object in JSON).
//!
//! Exit codes: 0 on success, 1 on operational errors, 2 when `--check`
//! finds a residual or tolerance violation.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::analysis::{convergence_run, decomposition_norm_run, decomposition_norm_run_on_grid};
use crate::conditions::{
    cond31_profile, cond32_profile, cond33_report, cond34_report, decay_diagnostic,
    ConditionParams, ConditionReport, Verdict,
};
use crate::error::{Error, Result};
use crate::families::FamilySpec;
use crate::grid::CoefficientGrid;
use crate::identities::{
    alias_free_resolution, corner_residual, k_strip_residual, partial_minus_cesaro_residual,
    vp_minus_partial_residual, IdentityResidual,
};
use crate::kernels::{e_norm_profile, log_weight, VPParams};

/// Default window scales reported in metadata and used when no list is
/// given.
pub const DEFAULT_LAMBDAS: [f64; 3] = [2.0, 1.5, 1.25];

#[derive(Parser, Debug)]
#[command(
    name = "fourier-l1",
    version,
    about = "Double Fourier series summability toolkit",
    disable_help_subcommand = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check the four representation identities on one grid
    Identities(IdentityArgs),
    /// Profile the coefficient conditions and the decay diagnostic
    Conditions(ConditionArgs),
    /// L1-norm profile of the kernels E_k
    #[command(name = "ek-norms")]
    EkNorms(EkNormArgs),
    /// Decompose V - S into its six components and report their norms
    Decompose(DecomposeArgs),
    /// L1-convergence experiment against a certified reference
    Converge(ConvergeArgs),
}

#[derive(Args, Debug, Clone)]
struct SourceArgs {
    /// Coefficient family: inline shorthand (geometric:RX,RY or
    /// randomSparse:SEED,BJ,BK,DENSITY,DECAY) or a path to a JSON spec file
    #[arg(long, value_name = "SPEC")]
    family: Option<String>,
    /// Coefficient text file (one `j k re im` per line)
    #[arg(long, value_name = "PATH", conflicts_with = "family")]
    grid_file: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
struct OutputArgs {
    /// Output path; stdout when omitted
    #[arg(long, value_name = "PATH")]
    output: Option<PathBuf>,
    /// Output format
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
    /// Gate the run: exit 2 on residual or tolerance failure
    #[arg(long)]
    check: bool,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Args, Debug)]
struct IdentityArgs {
    #[command(flatten)]
    source: SourceArgs,
    #[arg(long)]
    m: u32,
    #[arg(long)]
    n: u32,
    /// Window scale (must exceed 1)
    #[arg(long)]
    lambda: f64,
    /// Sample resolutions; alias-free defaults when omitted
    #[arg(long)]
    nx: Option<usize>,
    #[arg(long)]
    ny: Option<usize>,
    /// Relative residual gate for --check
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// Bounds used when materializing a family (windows may enlarge them)
    #[arg(long, default_value_t = 64)]
    bound: u32,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct ConditionArgs {
    #[command(flatten)]
    source: SourceArgs,
    /// Comma-separated window scales, each above 1
    #[arg(long, value_name = "L1,L2,...")]
    lambda_list: Option<String>,
    /// Comma-separated probe indices
    #[arg(long, value_name = "N1,N2,...")]
    n_range: Option<String>,
    /// Cap for sums written as infinite; grid bound when omitted
    #[arg(long)]
    truncation: Option<u32>,
    /// Bounds used when materializing a family
    #[arg(long, default_value_t = 64)]
    bound: u32,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct EkNormArgs {
    /// Largest kernel index profiled
    #[arg(long, default_value_t = 512)]
    max_k: u32,
    /// Quadrature points (at least 16 * max_k); 16 * max_k when omitted
    #[arg(long)]
    points: Option<usize>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct DecomposeArgs {
    #[command(flatten)]
    source: SourceArgs,
    /// Semicolon-separated (m,n) pairs, e.g. 8,8;16,16
    #[arg(long, value_name = "M,N;M,N;...")]
    mn_list: Option<String>,
    #[arg(long)]
    m: Option<u32>,
    #[arg(long)]
    n: Option<u32>,
    /// Window scale (must exceed 1)
    #[arg(long)]
    lambda: f64,
    /// Reconstruction residual gate for --check
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct ConvergeArgs {
    #[command(flatten)]
    source: SourceArgs,
    /// Semicolon-separated (m,n) pairs, e.g. 4,4;8,8;16,16
    #[arg(long, value_name = "M,N;M,N;...")]
    mn_list: String,
    /// Window scale (must exceed 1)
    #[arg(long)]
    lambda: f64,
    /// Quadrature refinement tolerance
    #[arg(long, default_value_t = 1e-7)]
    tol: f64,
    #[command(flatten)]
    output: OutputArgs,
}

/// A validated command, ready to run.
#[derive(Debug)]
pub struct CommandSpec {
    action: Action,
    output: Option<PathBuf>,
    format: OutputFormat,
    check: bool,
}

#[derive(Debug)]
enum Action {
    Identities {
        source: Source,
        m: u32,
        n: u32,
        lambda: f64,
        nx: Option<usize>,
        ny: Option<usize>,
        tol: f64,
        bound: u32,
    },
    Conditions {
        source: Source,
        lambdas: Vec<f64>,
        n_range: Option<Vec<u32>>,
        truncation: Option<u32>,
        bound: u32,
    },
    EkNorms {
        max_k: u32,
        points: usize,
    },
    Decompose {
        source: Source,
        mn_list: Vec<(u32, u32)>,
        lambda: f64,
        tol: f64,
    },
    Converge {
        source: Source,
        mn_list: Vec<(u32, u32)>,
        lambda: f64,
        tol: f64,
    },
}

/// Where the coefficients come from. Exactly one source per invocation.
#[derive(Debug, Clone)]
enum Source {
    Inline(FamilySpec),
    SpecFile(PathBuf),
    GridFile(PathBuf),
}

impl Source {
    fn describe(&self) -> String {
        match self {
            Source::Inline(spec) => serde_json::to_string(spec).unwrap_or_default(),
            Source::SpecFile(p) => format!("spec-file:{}", p.display()),
            Source::GridFile(p) => format!("grid-file:{}", p.display()),
        }
    }

    fn load_family(&self) -> Result<FamilySpec> {
        match self {
            Source::Inline(spec) => Ok(spec.clone()),
            Source::SpecFile(path) => {
                let text = fs::read_to_string(path)?;
                let spec: FamilySpec = serde_json::from_str(&text)?;
                spec.validate()?;
                Ok(spec)
            }
            Source::GridFile(_) => Err(Error::InvalidParameter(
                "this subcommand needs a family (closed-form or certified reference), \
                 not a raw grid file"
                    .to_string(),
            )),
        }
    }

    /// Materialize coefficients, enlarging family bounds to at least
    /// `(need_j, need_k)`.
    fn load_grid(&self, need_j: u32, need_k: u32) -> Result<CoefficientGrid> {
        match self {
            Source::GridFile(path) => {
                let text = fs::read_to_string(path)?;
                CoefficientGrid::parse(&text)
            }
            _ => {
                let family = self.load_family()?;
                family.build(need_j.max(1), need_k.max(1))
            }
        }
    }
}

fn resolve_source(args: &SourceArgs) -> Result<Source> {
    match (&args.family, &args.grid_file) {
        (Some(_), Some(_)) => Err(Error::InvalidParameter(
            "--family and --grid-file are mutually exclusive; give exactly one".to_string(),
        )),
        (None, None) => Err(Error::InvalidParameter(
            "missing coefficient source: give --family or --grid-file".to_string(),
        )),
        (Some(text), None) => {
            if text.contains(':') {
                Ok(Source::Inline(FamilySpec::parse_shorthand(text)?))
            } else {
                Ok(Source::SpecFile(PathBuf::from(text)))
            }
        }
        (None, Some(path)) => Ok(Source::GridFile(path.clone())),
    }
}

fn require_lambda(lambda: f64) -> Result<f64> {
    if !lambda.is_finite() || lambda <= 1.0 {
        return Err(Error::InvalidParameter(format!(
            "--lambda must exceed 1, got {lambda}"
        )));
    }
    Ok(lambda)
}

fn parse_mn_list(text: &str) -> Result<Vec<(u32, u32)>> {
    let mut out = Vec::new();
    for piece in text.split(';') {
        let piece = piece.trim();
        if piece.is_empty() {
            continue;
        }
        let (m, n) = piece.split_once(',').ok_or_else(|| {
            Error::InvalidParameter(format!("--mn-list entries look like M,N; got `{piece}`"))
        })?;
        let m: u32 = m
            .trim()
            .parse()
            .map_err(|_| Error::InvalidParameter(format!("--mn-list: invalid integer `{m}`")))?;
        let n: u32 = n
            .trim()
            .parse()
            .map_err(|_| Error::InvalidParameter(format!("--mn-list: invalid integer `{n}`")))?;
        out.push((m, n));
    }
    if out.is_empty() {
        return Err(Error::InvalidParameter("--mn-list is empty".to_string()));
    }
    Ok(out)
}

fn parse_f64_list(text: &str, flag: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|s| {
            s.trim().parse().map_err(|_| {
                Error::InvalidParameter(format!("{flag}: invalid number `{}`", s.trim()))
            })
        })
        .collect()
}

fn parse_u32_list(text: &str, flag: &str) -> Result<Vec<u32>> {
    text.split(',')
        .map(|s| {
            s.trim().parse().map_err(|_| {
                Error::InvalidParameter(format!("{flag}: invalid integer `{}`", s.trim()))
            })
        })
        .collect()
}

/// Parse and validate an argument vector into a runnable [`CommandSpec`].
pub fn parse<I, T>(argv: I) -> Result<CommandSpec>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    build_spec(cli)
}

fn build_spec(cli: Cli) -> Result<CommandSpec> {
    let (action, output) = match cli.command {
        Command::Identities(args) => {
            let source = resolve_source(&args.source)?;
            let lambda = require_lambda(args.lambda)?;
            if args.tol.is_nan() || args.tol <= 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "--tol must be positive, got {}",
                    args.tol
                )));
            }
            (
                Action::Identities {
                    source,
                    m: args.m,
                    n: args.n,
                    lambda,
                    nx: args.nx,
                    ny: args.ny,
                    tol: args.tol,
                    bound: args.bound,
                },
                args.output,
            )
        }
        Command::Conditions(args) => {
            let source = resolve_source(&args.source)?;
            let lambdas = match &args.lambda_list {
                Some(text) => parse_f64_list(text, "--lambda-list")?,
                None => DEFAULT_LAMBDAS.to_vec(),
            };
            for l in &lambdas {
                if l.is_nan() || *l <= 1.0 {
                    return Err(Error::InvalidParameter(format!(
                        "--lambda-list entries must exceed 1, got {l}"
                    )));
                }
            }
            let n_range = match &args.n_range {
                Some(text) => Some(parse_u32_list(text, "--n-range")?),
                None => None,
            };
            (
                Action::Conditions {
                    source,
                    lambdas,
                    n_range,
                    truncation: args.truncation,
                    bound: args.bound,
                },
                args.output,
            )
        }
        Command::EkNorms(args) => {
            let points = args.points.unwrap_or(16 * args.max_k as usize);
            (
                Action::EkNorms {
                    max_k: args.max_k,
                    points,
                },
                args.output,
            )
        }
        Command::Decompose(args) => {
            let source = resolve_source(&args.source)?;
            let lambda = require_lambda(args.lambda)?;
            let mn_list = match (&args.mn_list, args.m, args.n) {
                (Some(text), None, None) => parse_mn_list(text)?,
                (None, Some(m), Some(n)) => vec![(m, n)],
                _ => {
                    return Err(Error::InvalidParameter(
                        "give either --mn-list or both --m and --n".to_string(),
                    ));
                }
            };
            (
                Action::Decompose {
                    source,
                    mn_list,
                    lambda,
                    tol: args.tol,
                },
                args.output,
            )
        }
        Command::Converge(args) => {
            let source = resolve_source(&args.source)?;
            let lambda = require_lambda(args.lambda)?;
            if args.tol.is_nan() || args.tol <= 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "--tol must be positive, got {}",
                    args.tol
                )));
            }
            let mn_list = parse_mn_list(&args.mn_list)?;
            (
                Action::Converge {
                    source,
                    mn_list,
                    lambda,
                    tol: args.tol,
                },
                args.output,
            )
        }
    };

    let (out_args, default_format) = match &action {
        Action::Identities { .. } => (output, OutputFormat::Json),
        Action::Conditions { .. } => (output, OutputFormat::Csv),
        Action::EkNorms { .. } => (output, OutputFormat::Json),
        Action::Decompose { .. } => (output, OutputFormat::Json),
        Action::Converge { .. } => (output, OutputFormat::Csv),
    };
    Ok(CommandSpec {
        action,
        output: out_args.output,
        format: out_args.format.unwrap_or(default_format),
        check: out_args.check,
    })
}

/// Shortest round-trip scientific notation, the number format of every
/// output file.
fn fmt_float(v: f64) -> String {
    format!("{v:e}")
}

struct RunOutput {
    text: String,
    check_failures: Vec<String>,
}

/// Execute a validated command. Returns the process exit code: 0, or 2 when
/// `--check` found a violation.
pub fn run(spec: &CommandSpec) -> Result<i32> {
    let out = match &spec.action {
        Action::Identities {
            source,
            m,
            n,
            lambda,
            nx,
            ny,
            tol,
            bound,
        } => run_identities(spec, source, *m, *n, *lambda, *nx, *ny, *tol, *bound)?,
        Action::Conditions {
            source,
            lambdas,
            n_range,
            truncation,
            bound,
        } => run_conditions(
            spec,
            source,
            lambdas,
            n_range.as_deref(),
            *truncation,
            *bound,
        )?,
        Action::EkNorms { max_k, points } => run_ek_norms(spec, *max_k, *points)?,
        Action::Decompose {
            source,
            mn_list,
            lambda,
            tol,
        } => run_decompose(spec, source, mn_list, *lambda, *tol)?,
        Action::Converge {
            source,
            mn_list,
            lambda,
            tol,
        } => run_converge(spec, source, mn_list, *lambda, *tol)?,
    };

    match &spec.output {
        Some(path) => fs::write(path, out.text.as_bytes())?,
        None => print!("{}", out.text),
    }

    if spec.check && !out.check_failures.is_empty() {
        for failure in &out.check_failures {
            eprintln!("check failed: {failure}");
        }
        return Ok(2);
    }
    Ok(0)
}

#[allow(clippy::too_many_arguments)]
fn run_identities(
    spec: &CommandSpec,
    source: &Source,
    m: u32,
    n: u32,
    lambda: f64,
    nx: Option<usize>,
    ny: Option<usize>,
    tol: f64,
    bound: u32,
) -> Result<RunOutput> {
    let params = VPParams::new(lambda, m, n)?;
    let grid = source.load_grid(params.lambda_m().max(bound), params.lambda_n().max(bound))?;
    let (def_nx, def_ny) = alias_free_resolution(&params);
    let (nx, ny) = (nx.unwrap_or(def_nx), ny.unwrap_or(def_ny));

    let results = vec![
        partial_minus_cesaro_residual(&grid, &params, nx, ny)?,
        vp_minus_partial_residual(&grid, &params, nx, ny)?,
        k_strip_residual(&grid, &params, nx, ny)?,
        corner_residual(&grid, &params, nx, ny)?,
    ];

    let mut check_failures = Vec::new();
    for r in &results {
        if r.relative() > tol {
            check_failures.push(format!(
                "identity {} relative residual {:e} exceeds tol {:e}",
                r.lemma,
                r.relative(),
                tol
            ));
        }
    }

    let meta = [
        ("source", source.describe()),
        ("m", m.to_string()),
        ("n", n.to_string()),
        ("lambda", fmt_float(lambda)),
        ("nx", nx.to_string()),
        ("ny", ny.to_string()),
        ("tol", fmt_float(tol)),
        ("default_lambda_list", lambda_list_meta()),
    ];

    let row = |r: &IdentityResidual| {
        json!({
            "lemma": r.lemma,
            "m": m,
            "n": n,
            "lambda": lambda,
            "nx": nx,
            "ny": ny,
            "maxAbsResidual": r.max_abs_residual,
            "lhsScale": r.lhs_scale,
            "relativeResidual": r.relative(),
        })
    };

    let text = match spec.format {
        OutputFormat::Json => {
            let doc = json!({
                "meta": meta_json(&meta),
                "results": results.iter().map(row).collect::<Vec<_>>(),
            });
            pretty_json(&doc)
        }
        OutputFormat::Csv => {
            let mut text = meta_comments(&meta);
            text.push_str("lemma,m,n,lambda,nx,ny,maxAbsResidual,lhsScale,relativeResidual\n");
            for r in &results {
                let _ = writeln!(
                    text,
                    "{},{},{},{},{},{},{},{},{}",
                    r.lemma,
                    m,
                    n,
                    fmt_float(lambda),
                    nx,
                    ny,
                    fmt_float(r.max_abs_residual),
                    fmt_float(r.lhs_scale),
                    fmt_float(r.relative()),
                );
            }
            text
        }
    };
    Ok(RunOutput {
        text,
        check_failures,
    })
}

fn run_conditions(
    spec: &CommandSpec,
    source: &Source,
    lambdas: &[f64],
    n_range: Option<&[u32]>,
    truncation: Option<u32>,
    bound: u32,
) -> Result<RunOutput> {
    let grid = source.load_grid(bound, bound)?;
    let min_bound = grid.bound_j().min(grid.bound_k());
    let truncation = truncation.unwrap_or(min_bound);
    let max_lambda = lambdas.iter().copied().fold(1.0f64, f64::max);

    let n_range: Vec<u32> = match n_range {
        Some(range) => range.to_vec(),
        None => {
            // powers of two: start where the tightest window scale still
            // opens a window, stop where the widest one leaves the grid
            let min_lambda = lambdas.iter().copied().fold(f64::INFINITY, f64::min);
            let mut n = 2u32;
            while crate::kernels::lambda_index(min_lambda, n) <= i64::from(n) {
                n *= 2;
            }
            let mut range = Vec::new();
            while f64::from(n) * max_lambda <= f64::from(min_bound) && range.len() < 16 {
                range.push(n);
                n *= 2;
            }
            if range.is_empty() {
                range.push(n);
            }
            range
        }
    };

    let params = ConditionParams::new(None, lambdas.to_vec(), n_range.clone(), truncation)?;
    let reports = vec![
        cond31_profile(&grid, &params)?,
        cond32_profile(&grid, &params)?,
        cond33_report(&grid, &params)?,
        cond34_report(&grid, &params)?,
        decay_diagnostic(&grid),
    ];

    let mut check_failures = Vec::new();
    for r in &reports {
        if r.verdict != Verdict::VanishingTrend {
            check_failures.push(format!(
                "condition {} verdict is {}",
                r.condition.as_str(),
                r.verdict.as_str()
            ));
        }
    }

    let meta = [
        ("source", source.describe()),
        (
            "lambda_list",
            lambdas
                .iter()
                .map(|l| fmt_float(*l))
                .collect::<Vec<_>>()
                .join(";"),
        ),
        (
            "n_range",
            n_range
                .iter()
                .map(u32::to_string)
                .collect::<Vec<_>>()
                .join(";"),
        ),
        ("truncation", truncation.to_string()),
        ("default_lambda_list", lambda_list_meta()),
    ];

    let text = match spec.format {
        OutputFormat::Csv => {
            let mut text = meta_comments(&meta);
            text.push_str("conditionId,lambda,n,truncation,value\n");
            for r in &reports {
                for p in &r.profile {
                    let lambda = p.key.lambda().map(fmt_float).unwrap_or_default();
                    let _ = writeln!(
                        text,
                        "{},{},{},{},{}",
                        r.condition.as_str(),
                        lambda,
                        p.key.index(),
                        r.truncation,
                        fmt_float(p.value),
                    );
                }
            }
            for r in &reports {
                let _ = writeln!(
                    text,
                    "# verdict {} {}",
                    r.condition.as_str(),
                    r.verdict.as_str()
                );
            }
            text
        }
        OutputFormat::Json => {
            let report_json = |r: &ConditionReport| {
                json!({
                    "conditionId": r.condition.as_str(),
                    "truncation": r.truncation,
                    "verdict": r.verdict.as_str(),
                    "profile": r.profile.iter().map(|p| {
                        json!({
                            "lambda": p.key.lambda(),
                            "n": p.key.index(),
                            "value": p.value,
                        })
                    }).collect::<Vec<_>>(),
                })
            };
            let doc = json!({
                "meta": meta_json(&meta),
                "reports": reports.iter().map(report_json).collect::<Vec<_>>(),
            });
            pretty_json(&doc)
        }
    };
    Ok(RunOutput {
        text,
        check_failures,
    })
}

fn run_ek_norms(spec: &CommandSpec, max_k: u32, points: usize) -> Result<RunOutput> {
    let report = e_norm_profile(max_k, points)?;

    let mut check_failures = Vec::new();
    if let Some(r1) = report.ratio(1) {
        let norm_e1 = r1 * log_weight(1);
        if (norm_e1 - 8.0).abs() > 1e-6 {
            check_failures.push(format!(
                "||E_1||_1 = {norm_e1:e} deviates from 8 by more than 1e-6"
            ));
        }
    }
    if max_k >= 512 {
        let (a, b) = (report.ratio(256).unwrap(), report.ratio(512).unwrap());
        if (a / b - 1.0).abs() >= 0.05 {
            check_failures.push(format!(
                "ratios at k=256 and k=512 differ by {:.2}% (>= 5%)",
                (a / b - 1.0).abs() * 100.0
            ));
        }
    }

    let meta = [
        ("max_k", max_k.to_string()),
        ("points", points.to_string()),
        ("resolution", report.resolution.to_string()),
        ("estimated_c", fmt_float(report.estimated_c)),
        ("default_lambda_list", lambda_list_meta()),
    ];

    let text = match spec.format {
        OutputFormat::Csv => {
            let mut text = meta_comments(&meta);
            text.push_str("k,norm,ratio\n");
            for (k, ratio) in &report.ratios {
                let _ = writeln!(
                    text,
                    "{},{},{}",
                    k,
                    fmt_float(ratio * log_weight(*k)),
                    fmt_float(*ratio),
                );
            }
            text
        }
        OutputFormat::Json => {
            let doc = json!({
                "meta": meta_json(&meta),
                "estimatedC": report.estimated_c,
                "resolution": report.resolution,
                "ratios": report.ratios.iter().map(|(k, r)| {
                    json!({ "k": k, "norm": r * log_weight(*k), "ratio": r })
                }).collect::<Vec<_>>(),
            });
            pretty_json(&doc)
        }
    };
    Ok(RunOutput {
        text,
        check_failures,
    })
}

fn run_decompose(
    spec: &CommandSpec,
    source: &Source,
    mn_list: &[(u32, u32)],
    lambda: f64,
    tol: f64,
) -> Result<RunOutput> {
    // raw grid files are decomposable too; families are materialized to the
    // largest window
    let mut windows = Vec::new();
    for &(m, n) in mn_list {
        windows.push(VPParams::new(lambda, m, n)?);
    }
    let need_j = windows.iter().map(VPParams::lambda_m).max().unwrap();
    let need_k = windows.iter().map(VPParams::lambda_n).max().unwrap();

    let records = match source {
        Source::GridFile(_) => {
            let grid = source.load_grid(need_j, need_k)?;
            if grid.bound_j() < need_j || grid.bound_k() < need_k {
                return Err(Error::GridTooSmall {
                    bound_j: grid.bound_j(),
                    bound_k: grid.bound_k(),
                    need_j,
                    need_k,
                });
            }
            decomposition_norm_run_on_grid(&grid, mn_list, lambda)?
        }
        _ => {
            let family = source.load_family()?;
            decomposition_norm_run(&family, mn_list, lambda)?
        }
    };

    let mut check_failures = Vec::new();
    for r in &records {
        if r.reconstruction_residual > tol {
            check_failures.push(format!(
                "decomposition at (m,n)=({},{}) reconstruction residual {:e} exceeds tol {:e}",
                r.m, r.n, r.reconstruction_residual, tol
            ));
        }
        let total: f64 = r.component_norms.iter().sum();
        if r.norm_v_s > total + 1e-9 * total.max(1.0) {
            check_failures.push(format!(
                "decomposition at (m,n)=({},{}) violates the triangle inequality",
                r.m, r.n
            ));
        }
    }

    let meta = [
        ("source", source.describe()),
        ("lambda", fmt_float(lambda)),
        ("tol", fmt_float(tol)),
        ("default_lambda_list", lambda_list_meta()),
    ];

    let text = match spec.format {
        OutputFormat::Csv => {
            let mut text = meta_comments(&meta);
            text.push_str(
                "m,n,lambda,r0,r1,r2,r3,r4,r5,norm_V_S,reconstruction_residual,quad_n,refine_delta\n",
            );
            for r in &records {
                let comps: Vec<String> = r.component_norms.iter().map(|v| fmt_float(*v)).collect();
                let _ = writeln!(
                    text,
                    "{},{},{},{},{},{},{}",
                    r.m,
                    r.n,
                    fmt_float(r.lambda),
                    comps.join(","),
                    fmt_float(r.norm_v_s),
                    format_args!("{},{}", fmt_float(r.reconstruction_residual), r.quad_n),
                    fmt_float(r.refine_delta),
                );
            }
            text
        }
        OutputFormat::Json => {
            let doc = json!({
                "meta": meta_json(&meta),
                "records": records.iter().map(|r| json!({
                    "m": r.m,
                    "n": r.n,
                    "lambda": r.lambda,
                    "componentNorms": r.component_norms,
                    "normVS": r.norm_v_s,
                    "reconstructionRelativeResidual": r.reconstruction_residual,
                    "quadN": r.quad_n,
                    "refineDelta": r.refine_delta,
                })).collect::<Vec<_>>(),
            });
            pretty_json(&doc)
        }
    };
    Ok(RunOutput {
        text,
        check_failures,
    })
}

fn run_converge(
    spec: &CommandSpec,
    source: &Source,
    mn_list: &[(u32, u32)],
    lambda: f64,
    tol: f64,
) -> Result<RunOutput> {
    let family = source.load_family()?;
    let records = convergence_run(&family, mn_list, lambda, tol)?;

    let mut check_failures = Vec::new();
    for r in &records {
        if r.norm_v_f > r.norm_v_s + r.norm_s_f + 1e-9 {
            check_failures.push(format!(
                "record (m,n)=({},{}) violates the triangle inequality",
                r.m, r.n
            ));
        }
        // stabilization gate: the doubling delta must reach tol or be
        // negligible relative to the measured norm
        let stable = r.refine_delta < tol || r.refine_delta <= 1e-3 * r.norm_s_f.max(1.0);
        if !stable {
            check_failures.push(format!(
                "record (m,n)=({},{}) quadrature delta {:e} is neither below tol {tol:e} \
                 nor small relative to the norm",
                r.m, r.n, r.refine_delta
            ));
        }
    }

    let meta = [
        ("source", source.describe()),
        ("lambda", fmt_float(lambda)),
        ("tol", fmt_float(tol)),
        ("default_lambda_list", lambda_list_meta()),
    ];

    let text = match spec.format {
        OutputFormat::Csv => {
            let mut text = meta_comments(&meta);
            text.push_str(
                "m,n,lambda,norm_S_f,norm_sigma_f,norm_V_f,norm_V_S,quad_n,refine_delta\n",
            );
            for r in &records {
                let _ = writeln!(
                    text,
                    "{},{},{},{},{},{},{},{},{}",
                    r.m,
                    r.n,
                    fmt_float(r.lambda),
                    fmt_float(r.norm_s_f),
                    fmt_float(r.norm_sigma_f),
                    fmt_float(r.norm_v_f),
                    fmt_float(r.norm_v_s),
                    r.quad_n,
                    fmt_float(r.refine_delta),
                );
            }
            text
        }
        OutputFormat::Json => {
            let doc = json!({
                "meta": meta_json(&meta),
                "records": records.iter().map(|r| json!({
                    "m": r.m,
                    "n": r.n,
                    "lambda": r.lambda,
                    "norm_S_f": r.norm_s_f,
                    "norm_sigma_f": r.norm_sigma_f,
                    "norm_V_f": r.norm_v_f,
                    "norm_V_S": r.norm_v_s,
                    "quad_n": r.quad_n,
                    "refine_delta": r.refine_delta,
                })).collect::<Vec<_>>(),
            });
            pretty_json(&doc)
        }
    };
    Ok(RunOutput {
        text,
        check_failures,
    })
}

fn lambda_list_meta() -> String {
    DEFAULT_LAMBDAS
        .iter()
        .map(|l| fmt_float(*l))
        .collect::<Vec<_>>()
        .join(";")
}

fn meta_comments(meta: &[(&str, String)]) -> String {
    let mut text = String::new();
    for (key, value) in meta {
        let _ = writeln!(text, "# {key}={value}");
    }
    text
}

fn meta_json(meta: &[(&str, String)]) -> serde_json::Value {
    let mut map = serde_json::Map::new();
    for (key, value) in meta {
        map.insert((*key).to_string(), json!(value));
    }
    serde_json::Value::Object(map)
}

fn pretty_json(doc: &serde_json::Value) -> String {
    let mut text = serde_json::to_string_pretty(doc).expect("serializable");
    text.push('\n');
    text
}
