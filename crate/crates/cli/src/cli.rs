//! Argument parsing and subcommand dispatch.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use splinetaylor_core::construct::{construct_1d, construct_1d_lifted, plan_segments, verify_construction};
use splinetaylor_core::degree::{finite_difference_degree, loglog_degree, projection_1d};
use splinetaylor_core::mlp::train;
use splinetaylor_core::taylor::{build_chain, extract_from_chain};
use splinetaylor_core::{Bounds, Dataset, DegreeEstimate, ExtractConfig, LogLogMode, PiecewiseLinear, Polynomial, TrainConfig};

use crate::compare::{compare, parse_slice, plot_header, plot_rows, PlotSources, DEFAULT_GRID};
use crate::error::{CliError, Result};
use crate::expr::{lookup, Expression};
use crate::formats::{self, format_f64, Model};
use crate::report::{extract_report_doc, write_report};
use crate::synth::{parse_domain, synth, Spacing, SynthSpec};

#[derive(Debug, Parser)]
#[command(name = "splinetaylor", version, about = "Extract polynomials from trained ReLU networks and build ReLU networks from functions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample a built-in expression into a dataset CSV.
    Synth(SynthArgs),
    /// Train a one-hidden-layer network on a dataset.
    Train(TrainCmd),
    /// Train a derivative chain and extract a polynomial.
    Extract(ExtractCmd),
    /// Estimate polynomial degree from a dataset, model or expression.
    Degree(DegreeCmd),
    /// Build a two-hidden-layer network for a 1D expression.
    Construct(ConstructCmd),
    /// Compare a model and a polynomial against an expression on a grid.
    Compare(CompareCmd),
    /// Write curve data for plotting.
    Plotdata(PlotCmd),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SpacingArg {
    Uniform,
    Nonuniform,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Expression id, e.g. quad_0.5_-2_1 or newton_ma.
    #[arg(long)]
    pub expr: String,
    #[arg(long)]
    pub samples: usize,
    /// lo:hi per axis, comma separated.
    #[arg(long)]
    pub domain: String,
    #[arg(long, value_enum, default_value = "uniform")]
    pub spacing: SpacingArg,
    /// Multiplicative noise in percent.
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub hidden: Option<usize>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub batch: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
}

impl TrainArgs {
    pub fn config(&self) -> TrainConfig {
        let d = TrainConfig::default();
        TrainConfig {
            epochs: self.epochs.unwrap_or(d.epochs),
            batch_size: self.batch.unwrap_or(d.batch_size),
            learning_rate: self.lr.unwrap_or(d.learning_rate),
            seed: self.seed.unwrap_or(d.seed),
            hidden_width: self.hidden.unwrap_or(d.hidden_width),
        }
    }
}

#[derive(Debug, Args)]
pub struct TrainCmd {
    pub data: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub train: TrainArgs,
}

#[derive(Debug, Args)]
pub struct ExtractCmd {
    pub data: PathBuf,
    /// Polynomial file to write.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub order: Option<u32>,
    #[arg(long)]
    pub centers: Option<usize>,
    #[arg(long)]
    pub shrink: Option<f64>,
    /// Gradient samples per derivative network.
    #[arg(long)]
    pub deriv_samples: Option<usize>,
    #[arg(long)]
    pub zero_factor: Option<f64>,
    #[command(flatten)]
    pub train: TrainArgs,
    /// Drop terms with |c| <= eps; `threshold` uses the zero-test threshold.
    #[arg(long)]
    pub prune: Option<String>,
    /// Variable names, comma separated.
    #[arg(long)]
    pub vars: Option<String>,
    #[arg(long, default_value_t = 2)]
    pub decimals: usize,
    /// Report file (default: <out>.report.json).
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Also save the chain networks and manifest here.
    #[arg(long)]
    pub chain_dir: Option<PathBuf>,
    /// Write the root network as a model file.
    #[arg(long)]
    pub model_out: Option<PathBuf>,
    #[arg(long)]
    pub canonical: bool,
}

impl ExtractCmd {
    pub fn config(&self) -> ExtractConfig {
        let d = ExtractConfig::default();
        ExtractConfig {
            order: self.order.unwrap_or(d.order),
            derivative_sample_count: self.deriv_samples.unwrap_or(d.derivative_sample_count),
            shrink_fraction: self.shrink.unwrap_or(d.shrink_fraction),
            centers: self.centers.unwrap_or(d.centers),
            zero_threshold_factor: self.zero_factor.unwrap_or(d.zero_threshold_factor),
            train: self.train.config(),
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MethodArg {
    Fd,
    Loglog,
}

#[derive(Debug, Args)]
pub struct DegreeCmd {
    /// Dataset CSV or model file.
    pub input: Option<PathBuf>,
    /// Probe a built-in expression instead of a file.
    #[arg(long)]
    pub expr: Option<String>,
    #[arg(long, value_enum, default_value = "fd")]
    pub method: MethodArg,
    /// Relative tolerance for finite differences.
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    #[arg(long, default_value_t = 0)]
    pub axis: usize,
    /// Pins for the other axes, axis=value,... (default: domain midpoint).
    #[arg(long)]
    pub fix: Option<String>,
    /// Probe domain lo:hi,... (default: model bounds).
    #[arg(long)]
    pub domain: Option<String>,
    /// Evenly spaced samples along the free axis.
    #[arg(long, default_value_t = 101)]
    pub samples: usize,
    /// Log-log probe points, comma separated.
    #[arg(long, default_value = "10,100,1000,10000")]
    pub probes: String,
    /// direct, negated or lifted:<k>.
    #[arg(long, default_value = "direct")]
    pub mode: String,
}

#[derive(Debug, Args)]
pub struct ConstructCmd {
    #[arg(long)]
    pub expr: String,
    /// a:b
    #[arg(long)]
    pub interval: String,
    #[arg(long)]
    pub segments: usize,
    #[arg(long)]
    pub out: PathBuf,
    /// Gate magnitude M (default scales with the data).
    #[arg(long)]
    pub gate: Option<f64>,
    /// Constant added before construction and removed at the output.
    #[arg(long)]
    pub lift: Option<f64>,
    #[arg(long, default_value_t = 1000)]
    pub grid: usize,
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[arg(long)]
    pub canonical: bool,
}

#[derive(Debug, Args)]
pub struct CompareCmd {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub poly: PathBuf,
    #[arg(long)]
    pub expr: String,
    #[arg(long)]
    pub domain: Option<String>,
    #[arg(long, default_value_t = DEFAULT_GRID)]
    pub grid: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub canonical: bool,
}

#[derive(Debug, Args)]
pub struct PlotCmd {
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long)]
    pub poly: Option<PathBuf>,
    #[arg(long)]
    pub expr: String,
    #[arg(long)]
    pub domain: Option<String>,
    /// Pins axis=value,... leaving one axis free.
    #[arg(long)]
    pub slice: Option<String>,
    #[arg(long, default_value_t = 201)]
    pub points: usize,
    /// Add truth and network slope columns.
    #[arg(long)]
    pub slopes: bool,
    #[arg(long)]
    pub out: PathBuf,
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit status.
pub fn main_with_args<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
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
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => {
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
    match run(&cli.command, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code() as i32
        }
    }
}

pub fn run(cmd: &Command, out: &mut dyn Write) -> Result<()> {
    match cmd {
        Command::Synth(a) => cmd_synth(a, out),
        Command::Train(a) => cmd_train(a, out),
        Command::Extract(a) => cmd_extract(a, out),
        Command::Degree(a) => cmd_degree(a, out),
        Command::Construct(a) => cmd_construct(a, out),
        Command::Compare(a) => cmd_compare(a, out),
        Command::Plotdata(a) => cmd_plotdata(a, out),
    }
}

fn say(out: &mut dyn Write, msg: impl std::fmt::Display) -> Result<()> {
    writeln!(out, "{msg}")?;
    Ok(())
}

fn cmd_synth(a: &SynthArgs, out: &mut dyn Write) -> Result<()> {
    let expr = lookup(&a.expr)?;
    let spec = SynthSpec {
        samples: a.samples,
        bounds: parse_domain(&a.domain)?,
        spacing: match a.spacing {
            SpacingArg::Uniform => Spacing::Uniform,
            SpacingArg::Nonuniform => Spacing::Nonuniform,
        },
        noise_pct: a.noise,
        seed: a.seed,
    };
    let data = synth(&expr, &spec)?;
    formats::write_dataset(&a.out, &data)?;
    say(out, format_args!("wrote {} samples to {}", data.len(), a.out.display()))
}

fn cmd_train(a: &TrainCmd, out: &mut dyn Write) -> Result<()> {
    let data = formats::read_dataset(&a.data)?;
    let cfg = a.train.config();
    let (net, rmse) = train(&data, &cfg)?;
    formats::save_network(&a.out, &net, Some(&cfg), Some(rmse), Some(data.bounds()))?;
    say(out, format_args!("training RMSE: {rmse}"))?;
    say(out, format_args!("wrote {}", a.out.display()))
}

fn var_names(spec: Option<&str>, dim: usize) -> Result<Vec<String>> {
    match spec {
        Some(s) => {
            let names: Vec<String> = s.split(',').map(|v| v.trim().to_owned()).collect();
            if names.len() != dim || names.iter().any(String::is_empty) {
                return Err(CliError::usage(format!("--vars needs {dim} non-empty names")));
            }
            Ok(names)
        }
        None => Ok(splinetaylor_core::poly::default_var_names(dim)),
    }
}

fn default_report_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".report.json");
    PathBuf::from(s)
}

fn cmd_extract(a: &ExtractCmd, out: &mut dyn Write) -> Result<()> {
    let start = Instant::now();
    let data = formats::read_dataset(&a.data)?;
    let names = var_names(a.vars.as_deref(), data.dim())?;
    let cfg = a.config();
    cfg.validate()?;
    let chain = build_chain(&data, &cfg)?;
    let (mut poly, mut report) = extract_from_chain(&chain, &data, &cfg)?;
    if let Some(p) = &a.prune {
        let eps = if p == "threshold" {
            report.zero_test.threshold
        } else {
            p.parse::<f64>().map_err(|_| CliError::usage(format!("--prune takes a number or 'threshold', got '{p}'")))?
        };
        poly = poly.prune(eps);
        let (mean, max) = data_errors(&poly, &data)?;
        report.mean_abs_error = mean;
        report.max_abs_error = max;
    }
    if let Some(dir) = &a.chain_dir {
        formats::save_chain(dir, &chain, Some(&cfg))?;
    }
    if let Some(path) = &a.model_out {
        let root = chain.net(&splinetaylor_core::MultiIndex::zero(data.dim())).expect("chain has a root");
        let rmse = chain.root_rmse();
        formats::save_network(path, root, Some(&cfg.train), Some(rmse), Some(chain.bounds(0)))?;
    }
    formats::save_polynomial(&a.out, &poly, &names)?;
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let shown = poly.format(&refs, a.decimals);
    let doc = extract_report_doc(shown.clone(), &cfg, &report);
    let report_path = a.report.clone().unwrap_or_else(|| default_report_path(&a.out));
    write_report(&report_path, &doc, start.elapsed(), a.canonical)?;
    say(out, &shown)?;
    say(
        out,
        format_args!(
            "zero test: {} (max {:.3e}, threshold {:.3e}); mean abs error on data {:.4}",
            if report.zero_test.is_zero { "zero" } else { "nonzero" },
            report.zero_test.max_abs,
            report.zero_test.threshold,
            report.mean_abs_error
        ),
    )?;
    if report.extrapolated {
        say(out, "warning: a center lies outside the innermost sampling box")?;
    }
    say(out, format_args!("wrote {} and {}", a.out.display(), report_path.display()))
}

fn data_errors(poly: &Polynomial, data: &Dataset) -> Result<(f64, f64)> {
    let mut sum = 0.0;
    let mut max = 0.0f64;
    for (x, y) in data.inputs().zip(data.targets()) {
        let e = (poly.eval(x)? - y).abs();
        sum += e;
        max = max.max(e);
    }
    Ok((sum / data.len() as f64, max))
}

fn parse_mode(s: &str) -> Result<LogLogMode> {
    match s {
        "direct" => Ok(LogLogMode::Direct),
        "negated" => Ok(LogLogMode::Negated),
        _ => match s.strip_prefix("lifted:").map(str::parse::<f64>) {
            Some(Ok(k)) if k.is_finite() => Ok(LogLogMode::Lifted(k)),
            _ => Err(CliError::usage(format!("--mode must be direct, negated or lifted:<k>, got '{s}'"))),
        },
    }
}

fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',').map(|v| v.trim().parse::<f64>().map_err(|_| CliError::usage(format!("bad number '{v}'")))).collect()
}

fn print_estimate(out: &mut dyn Write, e: &DegreeEstimate) -> Result<()> {
    say(out, format_args!("degree {} ({})", e.degree, e.method.name()))?;
    match e.raw {
        Some(raw) => say(out, format_args!("raw {raw:.6}, confidence {:.3}, residual {:.3e}", e.confidence, e.residual)),
        None => say(out, format_args!("confidence {:.3}, residual {:.3e}", e.confidence, e.residual)),
    }
}

fn is_csv(path: &Path) -> bool {
    path.extension().map(|e| e.eq_ignore_ascii_case("csv")).unwrap_or(false)
}

fn cmd_degree(a: &DegreeCmd, out: &mut dyn Write) -> Result<()> {
    let method = a.method;
    match (&a.input, &a.expr) {
        (Some(_), Some(_)) | (None, None) => Err(CliError::usage("give either an input file or --expr")),
        (Some(path), None) if is_csv(path) => {
            if matches!(method, MethodArg::Loglog) {
                return Err(CliError::usage("log-log estimation needs a model or --expr to probe"));
            }
            let data = formats::read_dataset(path)?;
            let ys = evenly_spaced_targets(&data)?;
            print_estimate(out, &finite_difference_degree(&ys, a.tol)?)
        }
        (Some(path), None) => {
            let model = formats::load_model(path)?;
            let domain = match &a.domain {
                Some(d) => parse_domain(d)?,
                None => model.domain().ok_or_else(|| CliError::usage("model has no stored bounds; pass --domain"))?,
            };
            degree_of(model.as_piecewise(), &domain, a, out)
        }
        (None, Some(id)) => {
            let expr = lookup(id)?;
            let domain = match &a.domain {
                Some(d) => parse_domain(d)?,
                None => Bounds::new(vec![1.0; expr.dim], vec![2.0; expr.dim])?,
            };
            degree_of(&ExprModel(&expr), &domain, a, out)
        }
    }
}

/// Adapts an expression to the probing interface; `slope` is its gradient.
struct ExprModel<'a>(&'a Expression);

impl PiecewiseLinear for ExprModel<'_> {
    fn input_dim(&self) -> usize {
        self.0.dim
    }

    fn output(&self, x: &[f64]) -> splinetaylor_core::Result<f64> {
        Ok(self.0.eval(x))
    }

    fn slope(&self, x: &[f64]) -> splinetaylor_core::Result<Vec<f64>> {
        Ok(self.0.gradient(x))
    }
}

fn degree_of(model: &dyn PiecewiseLinear, domain: &Bounds, a: &DegreeCmd, out: &mut dyn Write) -> Result<()> {
    let n = model.input_dim();
    if domain.dim() != n {
        return Err(CliError::usage(format!("domain has {} axes, model takes {n}", domain.dim())));
    }
    let mut fixed: BTreeMap<usize, f64> = BTreeMap::new();
    let mid = domain.midpoint();
    for axis in (0..n).filter(|x| *x != a.axis) {
        fixed.insert(axis, mid[axis]);
    }
    if let Some(spec) = &a.fix {
        for part in spec.split(',').filter(|p| !p.is_empty()) {
            let (k, v) = part.split_once('=').ok_or_else(|| CliError::usage(format!("--fix entry '{part}' must be axis=value")))?;
            let k: usize = k.trim().parse().map_err(|_| CliError::usage(format!("bad axis '{k}'")))?;
            let v: f64 = v.trim().parse().map_err(|_| CliError::usage(format!("bad value '{v}'")))?;
            if k == a.axis || k >= n {
                return Err(CliError::usage(format!("cannot pin axis {k}")));
            }
            fixed.insert(k, v);
        }
    }
    let wrapped = Dyn(model);
    let g = projection_1d(&wrapped, &fixed, a.axis)?;
    let estimate = match a.method {
        MethodArg::Fd => {
            if a.samples < 3 {
                return Err(CliError::usage("--samples must be at least 3"));
            }
            let lo = domain.lo()[a.axis];
            let w = domain.width(a.axis);
            let ys: Vec<f64> = (0..a.samples).map(|i| g(lo + w * i as f64 / (a.samples - 1) as f64)).collect();
            finite_difference_degree(&ys, a.tol)?
        }
        MethodArg::Loglog => loglog_degree(&g, &parse_list(&a.probes)?, parse_mode(&a.mode)?)?,
    };
    print_estimate(out, &estimate)
}

/// Sized wrapper so trait objects can go through generic core functions.
struct Dyn<'a>(&'a dyn PiecewiseLinear);

impl PiecewiseLinear for Dyn<'_> {
    fn input_dim(&self) -> usize {
        self.0.input_dim()
    }

    fn output(&self, x: &[f64]) -> splinetaylor_core::Result<f64> {
        self.0.output(x)
    }

    fn slope(&self, x: &[f64]) -> splinetaylor_core::Result<Vec<f64>> {
        self.0.slope(x)
    }
}

fn evenly_spaced_targets(data: &Dataset) -> Result<Vec<f64>> {
    if data.dim() != 1 {
        return Err(CliError::data("finite differences on a dataset need 1D evenly spaced samples"));
    }
    let mut rows: Vec<(f64, f64)> = data.inputs().map(|x| x[0]).zip(data.targets().iter().copied()).collect();
    rows.sort_by(|p, q| p.0.total_cmp(&q.0));
    if rows.len() >= 3 {
        let h = (rows[rows.len() - 1].0 - rows[0].0) / (rows.len() - 1) as f64;
        let uneven = rows.windows(2).any(|w| ((w[1].0 - w[0].0) - h).abs() > 1e-9 * h.abs().max(1.0));
        if uneven {
            return Err(CliError::data("finite differences need evenly spaced samples"));
        }
    }
    Ok(rows.into_iter().map(|r| r.1).collect())
}

#[derive(Serialize)]
struct ConstructReportDoc {
    format_version: u32,
    expression: String,
    interval: [f64; 2],
    segments: usize,
    gate_magnitude: f64,
    lift: f64,
    grid: usize,
    max_abs_error: f64,
    mean_abs_error: f64,
    slope_match: bool,
    points_used: usize,
}

fn cmd_construct(a: &ConstructCmd, out: &mut dyn Write) -> Result<()> {
    let start = Instant::now();
    let expr = lookup(&a.expr)?;
    expr.require_dim(1)?;
    let dom = parse_domain(&a.interval)?;
    if dom.dim() != 1 {
        return Err(CliError::usage("--interval must be a single a:b"));
    }
    let (lo, hi) = (dom.lo()[0], dom.hi()[0]);
    let plan = plan_segments(|x| expr.eval1(x), |x| expr.derivative1(x), lo, hi, a.segments)?;
    let lift = a.lift.unwrap_or(0.0);
    let gate = a.gate.unwrap_or_else(|| plan.lifted(lift).default_gate_magnitude());
    let net = if a.lift.is_some() { construct_1d_lifted(&plan, gate, lift) } else { construct_1d(&plan, gate) };
    let net = net.map_err(|e| match e {
        splinetaylor_core::Error::OffsetInfeasible { needed_lift, .. } => {
            CliError::Numeric(format!("{e}; rerun with --lift {needed_lift}"))
        }
        other => other.into(),
    })?;
    formats::save_constructed(&a.out, &net, Some(&expr.id))?;
    let r = verify_construction(&net, |x| expr.eval1(x), lo, hi, a.grid)?;
    say(
        out,
        format_args!(
            "max abs error {:.6e}, mean abs error {:.6e}, slopes match: {} ({} grid points)",
            r.max_abs_error, r.mean_abs_error, r.slope_match, r.points_used
        ),
    )?;
    if let Some(path) = &a.report {
        let doc = ConstructReportDoc {
            format_version: 1,
            expression: expr.id.clone(),
            interval: [lo, hi],
            segments: a.segments,
            gate_magnitude: gate,
            lift: net.lift(),
            grid: a.grid,
            max_abs_error: r.max_abs_error,
            mean_abs_error: r.mean_abs_error,
            slope_match: r.slope_match,
            points_used: r.points_used,
        };
        write_report(path, &doc, start.elapsed(), a.canonical)?;
    }
    say(out, format_args!("wrote {}", a.out.display()))
}

fn model_domain(model: &Model, flag: Option<&str>, dim: usize) -> Result<Bounds> {
    let b = match flag {
        Some(d) => parse_domain(d)?,
        None => model.domain().ok_or_else(|| CliError::usage("model has no stored bounds; pass --domain"))?,
    };
    if b.dim() != dim {
        return Err(CliError::usage(format!("domain has {} axes, expected {dim}", b.dim())));
    }
    Ok(b)
}

fn cmd_compare(a: &CompareCmd, out: &mut dyn Write) -> Result<()> {
    let start = Instant::now();
    let expr = lookup(&a.expr)?;
    let model = formats::load_model(&a.model)?;
    let (poly, _) = formats::load_polynomial(&a.poly)?;
    let domain = model_domain(&model, a.domain.as_deref(), model.input_dim())?;
    let r = compare(&expr, model.as_piecewise(), &poly, &domain, a.grid)?;
    say(
        out,
        format_args!(
            "polynomial: mean abs error {:.6}, upper bound {:.6}\nnetwork:    mean abs error {:.6}, max {:.6}",
            r.mean_abs_error_poly, r.abs_error_upper_bound, r.mean_abs_error_net, r.max_abs_error_net
        ),
    )?;
    if let Some(path) = &a.out {
        write_report(path, &r, start.elapsed(), a.canonical)?;
        say(out, format_args!("wrote {}", path.display()))?;
    }
    Ok(())
}

fn cmd_plotdata(a: &PlotCmd, out: &mut dyn Write) -> Result<()> {
    let expr = lookup(&a.expr)?;
    let model = a.model.as_deref().map(formats::load_model).transpose()?;
    let poly = a.poly.as_deref().map(formats::load_polynomial).transpose()?.map(|(p, _)| p);
    if model.is_none() && poly.is_none() {
        return Err(CliError::usage("plotdata needs --model, --poly or both"));
    }
    let n = expr.dim;
    if let Some(m) = &model {
        if m.input_dim() != n {
            return Err(CliError::data(format!("model takes {} inputs, expression {n}", m.input_dim())));
        }
    }
    if let Some(p) = &poly {
        if p.dim() != n {
            return Err(CliError::data(format!("polynomial has {} variables, expression {n}", p.dim())));
        }
    }
    let domain = match (&a.domain, &model) {
        (Some(d), _) => parse_domain(d)?,
        (None, Some(m)) => model_domain(m, None, n)?,
        (None, None) => return Err(CliError::usage("pass --domain when plotting without a model")),
    };
    if domain.dim() != n {
        return Err(CliError::usage(format!("domain has {} axes, expected {n}", domain.dim())));
    }
    let slice = parse_slice(a.slice.as_deref(), n)?;
    let axis = slice.free_axis;
    let src = PlotSources { net: model.as_ref().map(Model::as_piecewise), poly: poly.as_ref(), slopes: a.slopes };
    let rows = plot_rows(&expr, &src, &slice, (domain.lo()[axis], domain.hi()[axis]), a.points)?;
    let mut w = csv::Writer::from_path(&a.out).map_err(|e| CliError::data(format!("{}: {e}", a.out.display())))?;
    w.write_record(plot_header(n, &src)).map_err(CliError::data)?;
    for row in &rows {
        w.write_record(row.iter().map(|v| format_f64(*v))).map_err(CliError::data)?;
    }
    w.flush()?;
    say(out, format_args!("wrote {} rows to {}", rows.len(), a.out.display()))
}
