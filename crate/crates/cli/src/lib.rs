//! `fhl` command line: argument parsing, dispatch to the experiment
//! library, and CSV/JSON emission.
//!
//! Exit statuses: 0 success, 1 a checked bound or report invariant failed,
//! 2 bad configuration or input, 3 numerical failure.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use fhl_core::experiments::disk::XpModel;
use fhl_core::experiments::{self as exp};
use fhl_core::hilbert_ops::{self, OperatorKind, OperatorSpec};
use fhl_core::io::{load_measure, read_coeff_file};
use fhl_core::radial_measure;
use fhl_core::report::{fmt_g17, ScanReport, Table};
use fhl_core::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

/// Environment variable giving the worker count when `--jobs` is absent.
pub const JOBS_ENV: &str = "FHL_DEFAULT_JOBS";

#[derive(Debug, Clone, Parser, Serialize)]
#[command(
    name = "fhl",
    version,
    about = "Hilbert-type operators on weighted Fock spaces"
)]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Output {
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    /// Relative tolerance for operator norms.
    #[arg(long, default_value_t = hilbert_ops::DEFAULT_NORM_TOL)]
    pub tol: f64,
    /// Worker threads; 0 picks one per core.
    #[arg(long)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Weights {
    #[arg(long, default_value_t = 1.0)]
    pub theta: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub beta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OpName {
    Hlambda,
    Hcheck,
    Hmu,
    Hlambdamu,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct OperatorArgs {
    #[arg(long, value_enum)]
    pub op: OpName,
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Inline JSON or path to a JSON file.
    #[arg(long)]
    pub measure: Option<String>,
    #[command(flatten)]
    pub weights: Weights,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelName {
    Hardy,
    Dirichlet,
    Bergman,
    Custom,
}

#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(tag = "subcommand", rename_all = "kebab-case")]
pub enum Command {
    /// Moment table μ[0..=n].
    Moments {
        #[arg(long)]
        measure: String,
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        output: Output,
    },
    /// Carleson constant and vanishing profile at exponent s.
    Carleson {
        #[arg(long)]
        measure: String,
        #[arg(long)]
        s: f64,
        /// Increasing points in [0,1); defaults to t_j = 1 − 2^{−j}.
        #[arg(long = "grid-t")]
        grid_t: Option<String>,
        #[command(flatten)]
        output: Output,
    },
    /// Norm of the N×N truncation.
    Opnorm {
        #[command(flatten)]
        operator: OperatorArgs,
        #[arg(long = "N")]
        n: usize,
        #[command(flatten)]
        output: Output,
    },
    /// Image of a coefficient file (`re im` per line).
    Apply {
        #[command(flatten)]
        operator: OperatorArgs,
        #[arg(long)]
        coeffs: PathBuf,
        /// Output length; defaults to the input length.
        #[arg(long)]
        n: Option<usize>,
        #[command(flatten)]
        output: Output,
    },
    /// Truncated norms of H_λ across λ and N.
    ScanThreshold {
        #[command(flatten)]
        weights: Weights,
        #[arg(long = "grid-lambda", default_value = "1,1.25,1.5")]
        grid_lambda: String,
        #[arg(long = "grid-N", default_value = "64,128,256")]
        grid_n: String,
        #[command(flatten)]
        output: Output,
    },
    /// Carleson constant against truncated norms of H_μ.
    ScanCarleson {
        #[arg(long)]
        measure: String,
        #[command(flatten)]
        weights: Weights,
        #[arg(long = "grid-N", default_value = "64,128,256")]
        grid_n: String,
        #[command(flatten)]
        output: Output,
    },
    /// Tail norms, images of the f̃_w family and the vanishing profile.
    Compactness {
        #[arg(long)]
        measure: String,
        #[command(flatten)]
        weights: Weights,
        #[arg(long = "grid-keep", default_value = "16,64,256")]
        grid_keep: String,
        #[arg(long = "N", default_value_t = 1024)]
        n_big: usize,
        #[arg(long = "grid-w", default_value = "0.9,0.99,0.999")]
        grid_w: String,
        #[command(flatten)]
        output: Output,
    },
    /// Weight-sum bounds, Stirling sandwich and the power-series estimate.
    VerifyLemmas {
        #[command(flatten)]
        weights: Weights,
        #[arg(long = "grid-n", default_value = "0..64")]
        grid_n: String,
        #[arg(long = "grid-k", default_value = "0..64")]
        grid_k: String,
        #[arg(long = "grid-c", default_value = "0.5,1,1.5,2")]
        grid_c: String,
        #[arg(long = "grid-w", default_value = "0.5,0.6,0.7,0.8,0.9,0.95,0.99,0.995")]
        grid_w: String,
        #[arg(long = "grid-x", default_value = "1,2,5,10,100")]
        grid_x: String,
        /// Multiplies the weight-sum bounds; values below 1 tighten them.
        #[arg(long = "bound-scale", default_value_t = 1.0)]
        bound_scale: f64,
        #[command(flatten)]
        output: Output,
    },
    /// Witness scan for Ĥ_λ on a disk space with decreasing coefficients.
    HardyScan {
        #[arg(long, value_enum, default_value = "hardy")]
        model: ModelName,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        /// α for the Dirichlet and Bergman models.
        #[arg(long = "model-alpha", allow_hyphen_values = true)]
        model_alpha: Option<f64>,
        /// Exponent G for the custom model.
        #[arg(long, allow_hyphen_values = true)]
        gx: Option<f64>,
        #[arg(long = "grid-lambda", default_value = "0.75,1")]
        grid_lambda: String,
        #[arg(long = "grid-N", default_value = "1024,4096,16384")]
        grid_n: String,
        #[command(flatten)]
        output: Output,
    },
}

impl Command {
    pub fn output(&self) -> &Output {
        match self {
            Command::Moments { output, .. }
            | Command::Carleson { output, .. }
            | Command::Opnorm { output, .. }
            | Command::Apply { output, .. }
            | Command::ScanThreshold { output, .. }
            | Command::ScanCarleson { output, .. }
            | Command::Compactness { output, .. }
            | Command::VerifyLemmas { output, .. }
            | Command::HardyScan { output, .. } => output,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Command::Moments { .. } => "moments",
            Command::Carleson { .. } => "carleson",
            Command::Opnorm { .. } => "opnorm",
            Command::Apply { .. } => "apply",
            Command::ScanThreshold { .. } => "scan-threshold",
            Command::ScanCarleson { .. } => "scan-carleson",
            Command::Compactness { .. } => "compactness",
            Command::VerifyLemmas { .. } => "verify-lemmas",
            Command::HardyScan { .. } => "hardy-scan",
        }
    }
}

/// Failure with its exit status.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = if e.is_numerical() {
            EXIT_NUMERICAL
        } else if matches!(e, Error::Invariant { .. }) {
            EXIT_VIOLATION
        } else {
            EXIT_CONFIG
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

fn config_error(op: &str, msg: impl std::fmt::Display) -> CliError {
    CliError {
        code: EXIT_CONFIG,
        message: format!("{op}: {msg}"),
    }
}

/// Parse a comma list of reals.
pub fn parse_real_grid(name: &str, text: &str) -> Result<Vec<f64>, CliError> {
    let vals = text
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| config_error(name, format!("bad number {:?}", s.trim())))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(vals)
}

/// Parse a comma list of nonnegative integers; `a..b` is an inclusive range.
pub fn parse_index_grid(name: &str, text: &str) -> Result<Vec<usize>, CliError> {
    let mut out = Vec::new();
    for part in text.split(',') {
        let part = part.trim();
        let num = |s: &str| {
            s.trim()
                .parse::<usize>()
                .map_err(|_| config_error(name, format!("bad index {s:?}")))
        };
        if let Some((lo, hi)) = part.split_once("..") {
            let (lo, hi) = (num(lo)?, num(hi)?);
            if lo > hi || hi - lo > 1 << 24 {
                return Err(config_error(name, format!("bad range {part:?}")));
            }
            out.extend(lo..=hi);
        } else {
            out.push(num(part)?);
        }
    }
    Ok(out)
}

/// Parse argv (including the program name) into a validated configuration.
pub fn parse_config<I, T>(argv: I) -> Result<RunConfig, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    RunConfig::try_parse_from(argv)
}

/// Build the operator described by `args`, checking every precondition.
pub fn operator_spec(args: &OperatorArgs) -> Result<OperatorSpec, CliError> {
    let w = &args.weights;
    let measure = args.measure.as_deref().map(load_measure).transpose()?;
    let need_lambda = || {
        args.lambda
            .ok_or_else(|| config_error("operator", "--lambda is required for this operator"))
    };
    let need_measure = || {
        measure
            .clone()
            .ok_or_else(|| config_error("operator", "--measure is required for this operator"))
    };
    let kind = match args.op {
        OpName::Hlambda => OperatorKind::HLambda {
            lambda: need_lambda()?,
        },
        OpName::Hcheck => OperatorKind::HCheck,
        OpName::Hmu => OperatorKind::HMu {
            measure: need_measure()?,
        },
        OpName::Hlambdamu => OperatorKind::HLambdaMu {
            lambda: need_lambda()?,
            measure: need_measure()?,
        },
    };
    Ok(OperatorSpec::with_params(kind, w.theta, w.alpha, w.beta)?)
}

fn xp_model(
    model: ModelName,
    p: f64,
    alpha: Option<f64>,
    gx: Option<f64>,
) -> Result<XpModel, CliError> {
    let need = |v: Option<f64>, flag: &str| {
        v.ok_or_else(|| config_error("XpModel", format!("{flag} is required for this model")))
    };
    Ok(match model {
        ModelName::Hardy => XpModel::hardy(p)?,
        ModelName::Dirichlet => XpModel::dirichlet(p, need(alpha, "--model-alpha")?)?,
        ModelName::Bergman => XpModel::bergman(p, need(alpha, "--model-alpha")?)?,
        ModelName::Custom => XpModel::custom(need(gx, "--gx")?, p)?,
    })
}

/// What a subcommand produced.
struct Outcome {
    table: Table,
    json: Value,
    summary: String,
    /// Non-empty when a checked bound failed.
    failures: Vec<String>,
}

impl Outcome {
    fn from_report(report: ScanReport) -> Self {
        let failures = report.nesting_violations();
        Outcome {
            table: report.to_table(),
            summary: report.summary_line(),
            json: report.to_json(),
            failures,
        }
    }
}

fn execute(cmd: &Command) -> Result<Outcome, CliError> {
    match cmd {
        Command::Moments { measure, n, .. } => {
            let m = load_measure(measure)?;
            let t = radial_measure::moment_table(&m, *n)?;
            let mut table = Table::new(["n", "moment"]);
            for (i, v) in t.values.iter().enumerate() {
                table.push(vec![i.to_string(), fmt_g17(*v)]);
            }
            let failures = t.invariant_violations();
            Ok(Outcome {
                summary: format!("moments: {} values of {}", t.values.len(), m.id()),
                json: json!({ "measure": m.id(), "moments": t.values }),
                table,
                failures,
            })
        }
        Command::Carleson {
            measure, s, grid_t, ..
        } => {
            let m = load_measure(measure)?;
            let grid = match grid_t {
                Some(g) => parse_real_grid("--grid-t", g)?,
                None => radial_measure::default_grid(),
            };
            let constant = radial_measure::carleson_constant(&m, *s, &grid)?;
            let profile = radial_measure::vanishing_profile(&m, *s, &grid)?;
            let mut table = Table::new(["t", "quotient"]);
            for (t, q) in &profile {
                table.push(vec![fmt_g17(*t), fmt_g17(*q)]);
            }
            Ok(Outcome {
                summary: format!(
                    "carleson: constant={} at s={}",
                    fmt_g17(constant),
                    fmt_g17(*s)
                ),
                json: json!({ "measure": m.id(), "s": s, "constant": constant, "profile": profile }),
                table,
                failures: vec![],
            })
        }
        Command::Opnorm {
            operator,
            n,
            output,
            ..
        } => {
            let spec = operator_spec(operator)?;
            let t = hilbert_ops::build_truncated(&spec, *n)?;
            let v = hilbert_ops::op_norm(&t, output.tol)?;
            let mut table = Table::new(["op", "N", "value"]);
            table.push(vec![spec.kind().name().into(), n.to_string(), fmt_g17(v)]);
            Ok(Outcome {
                summary: format!("opnorm: {} N={n} value={}", spec.kind().name(), fmt_g17(v)),
                json: json!({ "operator": t.summary(), "value": v }),
                table,
                failures: vec![],
            })
        }
        Command::Apply {
            operator,
            coeffs,
            n,
            ..
        } => {
            let spec = operator_spec(operator)?;
            let f = read_coeff_file(coeffs)?;
            let out_len = n.unwrap_or(f.trunc());
            let b = hilbert_ops::apply(&spec, &f, out_len)?;
            let mut table = Table::new(["n", "re", "im"]);
            let vals = b.to_vec();
            for (i, z) in vals.iter().enumerate() {
                table.push(vec![i.to_string(), fmt_g17(z.re), fmt_g17(z.im)]);
            }
            let pairs: Vec<[f64; 2]> = vals.iter().map(|z| [z.re, z.im]).collect();
            Ok(Outcome {
                summary: format!("apply: {} coefficients in, {out_len} out", f.trunc()),
                json: json!({ "coefficients": pairs }),
                table,
                failures: vec![],
            })
        }
        Command::ScanThreshold {
            weights,
            grid_lambda,
            grid_n,
            output,
        } => {
            let lambdas = parse_real_grid("--grid-lambda", grid_lambda)?;
            let sizes = parse_index_grid("--grid-N", grid_n)?;
            let r = exp::threshold_scan(
                weights.theta,
                weights.alpha,
                weights.beta,
                &lambdas,
                &sizes,
                output.tol,
            )?;
            Ok(Outcome::from_report(r))
        }
        Command::ScanCarleson {
            measure,
            weights,
            grid_n,
            output,
        } => {
            let m = load_measure(measure)?;
            let sizes = parse_index_grid("--grid-N", grid_n)?;
            let r = exp::carleson_boundedness_experiment(
                &m,
                weights.theta,
                weights.alpha,
                weights.beta,
                &sizes,
                output.tol,
            )?;
            Ok(Outcome::from_report(r))
        }
        Command::Compactness {
            measure,
            weights,
            grid_keep,
            n_big,
            grid_w,
            output,
        } => {
            let m = load_measure(measure)?;
            let keep = parse_index_grid("--grid-keep", grid_keep)?;
            let ws = parse_real_grid("--grid-w", grid_w)?;
            let r = exp::compactness_experiment(
                &m,
                weights.theta,
                weights.alpha,
                weights.beta,
                &keep,
                *n_big,
                &ws,
                output.tol,
            )?;
            Ok(Outcome::from_report(r))
        }
        Command::VerifyLemmas {
            weights,
            grid_n,
            grid_k,
            grid_c,
            grid_w,
            grid_x,
            bound_scale,
            ..
        } => verify_lemmas(
            weights,
            &parse_index_grid("--grid-n", grid_n)?,
            &parse_index_grid("--grid-k", grid_k)?,
            &parse_real_grid("--grid-c", grid_c)?,
            &parse_real_grid("--grid-w", grid_w)?,
            &parse_real_grid("--grid-x", grid_x)?,
            *bound_scale,
        ),
        Command::HardyScan {
            model,
            p,
            model_alpha,
            gx,
            grid_lambda,
            grid_n,
            ..
        } => {
            let model = xp_model(*model, *p, *model_alpha, *gx)?;
            let lambdas = parse_real_grid("--grid-lambda", grid_lambda)?;
            let sizes = parse_index_grid("--grid-N", grid_n)?;
            Ok(Outcome::from_report(exp::proposition_scan(
                &model, &lambdas, &sizes,
            )?))
        }
    }
}

fn verify_lemmas(
    w: &Weights,
    ns: &[usize],
    ks: &[usize],
    cs: &[f64],
    ws: &[f64],
    xs: &[f64],
    bound_scale: f64,
) -> Result<Outcome, CliError> {
    let bounds = exp::check_lemma_w_bounds(w.theta, w.alpha, w.beta, ns, ks, bound_scale)?;
    let stirling = exp::check_stirling(xs)?;
    let ests = cs
        .iter()
        .map(|&c| exp::check_est(c, ws))
        .collect::<Result<Vec<_>, _>>()?;

    let mut table = Table::new(["check", "key", "arg", "value", "bound", "ok"]);
    let mut failures = Vec::new();
    for e in &bounds.entries {
        let name = match e.side {
            exp::lemmas::WSide::Row => "w1",
            exp::lemmas::WSide::Col => "w2",
        };
        table.push(vec![
            name.into(),
            String::new(),
            e.index.to_string(),
            fmt_g17(e.upper),
            fmt_g17(e.bound),
            e.ok.to_string(),
        ]);
        if !e.ok {
            failures.push(format!(
                "{name}({}) = {} exceeds {}",
                e.index, e.upper, e.bound
            ));
        }
    }
    for s in &stirling {
        table.push(vec![
            "stirling".into(),
            String::new(),
            fmt_g17(s.x),
            fmt_g17(s.remainder.abs()),
            fmt_g17(s.bound),
            s.ok.to_string(),
        ]);
        if !s.ok {
            failures.push(format!("stirling remainder at x={} exceeds its bound", s.x));
        }
    }
    for r in &ests {
        for (wv, v) in &r.values {
            table.push(vec![
                "est".into(),
                fmt_g17(r.c),
                fmt_g17(*wv),
                fmt_g17(*v),
                String::new(),
                (v.is_finite() && *v > 0.0).to_string(),
            ]);
        }
        if !r.ok {
            failures.push(format!(
                "estimate ratio for c={} not finite and positive",
                r.c
            ));
        }
    }
    let summary = format!(
        "verify-lemmas: {} weight sums (B={}), {} stirling points, {} estimate runs, {} failures",
        bounds.entries.len(),
        fmt_g17(bounds.beta_constant),
        stirling.len(),
        ests.len(),
        failures.len()
    );
    Ok(Outcome {
        table,
        json: json!({ "weight_bounds": bounds, "stirling": stirling, "estimates": ests }),
        summary,
        failures,
    })
}

fn unix_time() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

fn resolve_jobs(flag: Option<usize>) -> Result<usize, CliError> {
    if let Some(j) = flag {
        return Ok(j);
    }
    match std::env::var(JOBS_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| config_error(JOBS_ENV, format!("not a worker count: {v:?}"))),
        Err(_) => Ok(0),
    }
}

fn run_config(cfg: &RunConfig, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    let output = cfg.command.output();
    if output.tol.is_nan() || output.tol <= 0.0 {
        return Err(config_error("--tol", "tolerance must be positive"));
    }
    let jobs = resolve_jobs(output.jobs)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| config_error("--jobs", e))?;
    let outcome = pool.install(|| execute(&cfg.command))?;

    let text = match output.format {
        Format::Csv => outcome.table.to_csv(),
        Format::Json => {
            let doc = json!({
                "config": cfg,
                "created_unix": unix_time(),
                "result": outcome.json,
                "failures": outcome.failures,
            });
            serde_json::to_string_pretty(&doc).expect("json") + "\n"
        }
    };
    let io_err = |e: std::io::Error| config_error("output", e);
    match &output.out {
        Some(path) => fs::write(path, text).map_err(io_err)?,
        None => out.write_all(text.as_bytes()).map_err(io_err)?,
    }
    writeln!(err, "{}", outcome.summary).map_err(io_err)?;
    const SHOWN: usize = 5;
    for f in outcome.failures.iter().take(SHOWN) {
        writeln!(err, "{}: bound violated: {f}", cfg.command.name()).map_err(io_err)?;
    }
    if outcome.failures.len() > SHOWN {
        writeln!(
            err,
            "{}: ... and {} more",
            cfg.command.name(),
            outcome.failures.len() - SHOWN
        )
        .map_err(io_err)?;
    }
    Ok(if outcome.failures.is_empty() {
        EXIT_OK
    } else {
        EXIT_VIOLATION
    })
}

/// Run with explicit streams; returns the exit status.
pub fn run_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cfg = match parse_config(argv) {
        Ok(c) => c,
        Err(e) => {
            let rendered = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{rendered}");
                EXIT_CONFIG
            } else {
                // --help and --version
                let _ = write!(out, "{rendered}");
                EXIT_OK
            };
        }
    };
    match run_config(&cfg, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {}", e.message);
            e.code
        }
    }
}

pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with(
        argv,
        &mut std::io::stdout().lock(),
        &mut std::io::stderr().lock(),
    )
}
