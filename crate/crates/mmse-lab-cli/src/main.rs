//! Command-line front end for the estimation library: error curves,
//! posterior summaries, derivatives, information quantities, crossing
//! scans, capacity figures, and a self-contained invariant suite.
//!
//! Grid-shaped results (`curve`, `post`) are emitted as CSV with pinned
//! headers; everything else is JSON carrying an explicit `schema` field.
//! CSV numbers carry 17 significant digits and JSON numbers use the
//! shortest round-trip form, so either representation parses back to the
//! exact computed value.
//!
//! Exit codes: 0 on success, 2 on input or usage errors, 3 when the
//! numerical machinery fails or a `--verify` cross-check disagrees.

mod checks;

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use mmse_lab::analysis::{single_crossing, CrossingReport, GridConfig};
use mmse_lab::calculus::{default_step_schedule, derivative_report, finite_difference_of, mmse_derivative};
use mmse_lab::capacity::{
    broadcast_region, epi_gaussian_check, secrecy_capacity, secrecy_gap, CapacityRegionSample,
    EpiReport,
};
use mmse_lab::channel::posterior_summary;
use mmse_lab::corpus;
use mmse_lab::infotheory::{
    differential_entropy, discrete_entropy, mi_derivative, mutual_information, InfoReport,
};
use mmse_lab::mmse::{mmse_at, mmse_curve};
use mmse_lab::oracle::{mc_mmse, mc_mutual_information, mc_posterior_slice};
use mmse_lab::quadrature::{lin_grid, log_grid};
use mmse_lab::{Error as LibError, InputDistribution};

const SCHEMA_DERIV: &str = "mmse-lab/deriv/v1";
const SCHEMA_INFO: &str = "mmse-lab/info/v1";
const SCHEMA_CROSS: &str = "mmse-lab/cross/v1";
const SCHEMA_WIRETAP: &str = "mmse-lab/capacity-wiretap/v1";
const SCHEMA_BROADCAST: &str = "mmse-lab/capacity-broadcast/v1";
const SCHEMA_EPI: &str = "mmse-lab/capacity-epi/v1";

/// Seed used when a stochastic step runs without an explicit seed.
const DEFAULT_SEED: u64 = 20260822;

/// Conditional-mean estimation in additive Gaussian noise: error curves,
/// their calculus, information integrals, and structural checks.
#[derive(Parser)]
#[command(name = "mmse-lab", version, about)]
struct Cli {
    /// Write results to this file instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,

    /// Pretty-print JSON output (CSV output is unaffected).
    #[arg(long, global = true)]
    pretty: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Error curve over a ratio grid (CSV: snr,mmse,quad_err,upper_bound).
    Curve(CurveArgs),
    /// Posterior mean and central moments along an output grid (CSV).
    Post(PostArgs),
    /// Derivatives of the error curve (JSON).
    Deriv(DerivArgs),
    /// Mutual information and entropy quantities (JSON).
    Info(InfoArgs),
    /// Single-crossing scan against a Gaussian reference curve (JSON).
    Cross(CrossArgs),
    /// Capacity figures for the degraded Gaussian settings (JSON).
    #[command(subcommand)]
    Capacity(CapacityCmd),
    /// Invariant suite over a built-in corpus (JSON summary).
    Check(CheckArgs),
}

#[derive(Args)]
struct CurveArgs {
    /// Input distribution: JSON file path or built-in corpus member name.
    #[arg(long, value_name = "PATH|NAME")]
    dist: String,

    /// Single evaluation ratio (alternative to --snr-grid).
    #[arg(long, conflicts_with = "snr_grid")]
    snr: Option<f64>,

    /// Evaluation grid, lin:LO:HI:N or log:LO:HI:N.
    #[arg(long, value_name = "SPEC", value_parser = parse_grid)]
    snr_grid: Option<GridSpec>,

    /// Cross-check each point against the seeded Monte Carlo oracle:
    /// mc or mc:seed=S,n=N.
    #[arg(long, value_name = "SPEC", value_parser = parse_verify)]
    verify: Option<VerifySpec>,

    /// Acceptance width for --verify, in oracle standard errors.
    #[arg(long, default_value_t = 4.0)]
    tol: f64,

    /// Seed used when the verifier does not carry its own.
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
}

#[derive(Args)]
struct PostArgs {
    /// Input distribution: JSON file path or built-in corpus member name.
    #[arg(long, value_name = "PATH|NAME")]
    dist: String,

    /// Channel signal-to-noise ratio.
    #[arg(long)]
    snr: f64,

    /// Observation grid, lin:LO:HI:N or log:LO:HI:N.
    #[arg(long, value_name = "SPEC", value_parser = parse_grid)]
    y_grid: GridSpec,

    /// Highest posterior central-moment order to report (2..=8).
    #[arg(long, default_value_t = 4)]
    kmax: usize,

    /// Cross-check mean and variance per observation against importance
    /// sampling: mc or mc:seed=S,n=N.
    #[arg(long, value_name = "SPEC", value_parser = parse_verify)]
    verify: Option<VerifySpec>,

    /// Acceptance width for --verify, in oracle standard errors.
    #[arg(long, default_value_t = 4.0)]
    tol: f64,

    /// Seed used when the verifier does not carry its own.
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
}

#[derive(Args)]
struct DerivArgs {
    /// Input distribution: JSON file path or built-in corpus member name.
    #[arg(long, value_name = "PATH|NAME")]
    dist: String,

    /// Single evaluation ratio (alternative to --snr-grid).
    #[arg(long, conflicts_with = "snr_grid")]
    snr: Option<f64>,

    /// Evaluation grid, lin:LO:HI:N or log:LO:HI:N.
    #[arg(long, value_name = "SPEC", value_parser = parse_grid)]
    snr_grid: Option<GridSpec>,

    /// Comma-separated derivative orders, each in 1..=3.
    #[arg(long, value_delimiter = ',', default_values_t = vec![1usize, 2, 3])]
    orders: Vec<usize>,

    /// Cross-check against Richardson finite differences: fd.
    #[arg(long, value_name = "SPEC", value_parser = parse_verify)]
    verify: Option<VerifySpec>,

    /// Largest accepted relative gap for --verify fd.
    #[arg(long, default_value_t = 1e-4)]
    tol: f64,
}

#[derive(Args)]
struct InfoArgs {
    /// Input distribution: JSON file path or built-in corpus member name.
    #[arg(long, value_name = "PATH|NAME")]
    dist: String,

    /// Single evaluation ratio (alternative to --snr-grid).
    #[arg(long, conflicts_with = "snr_grid")]
    snr: Option<f64>,

    /// Evaluation grid, lin:LO:HI:N or log:LO:HI:N.
    #[arg(long, value_name = "SPEC", value_parser = parse_grid)]
    snr_grid: Option<GridSpec>,

    /// Also report information derivatives of these orders, each in 1..=4.
    #[arg(long, value_delimiter = ',')]
    orders: Vec<usize>,

    /// Report in bits instead of nats.
    #[arg(long)]
    bits: bool,

    /// Cross-check: fd (information slope against half the error) or
    /// mc / mc:seed=S,n=N (Monte Carlo information estimate).
    #[arg(long, value_name = "SPEC", value_parser = parse_verify)]
    verify: Option<VerifySpec>,

    /// Acceptance for --verify: relative gap for fd (default 1e-5),
    /// standard errors for mc (default 4).
    #[arg(long)]
    tol: Option<f64>,

    /// Seed used when the verifier does not carry its own.
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
}

#[derive(Args)]
struct CrossArgs {
    /// Input distribution: JSON file path or built-in corpus member name.
    #[arg(long, value_name = "PATH|NAME")]
    dist: String,

    /// Variance of the Gaussian reference curve.
    #[arg(long)]
    sigma2: f64,

    /// Scan grid, log:LO:HI:N (crossing scans sample logarithmically).
    #[arg(long, value_name = "SPEC", value_parser = parse_grid)]
    snr_grid: Option<GridSpec>,

    /// Half-width of the band around zero treated as touching zero.
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
}

#[derive(Subcommand)]
enum CapacityCmd {
    /// Secrecy rate of the degraded eavesdropper pair.
    Wiretap(WiretapArgs),
    /// Boundary of the two-user degraded broadcast region.
    Broadcast(BroadcastArgs),
    /// Gaussian-perturbation entropy-power check for a continuous input.
    Epi(EpiArgs),
}

#[derive(Args)]
struct WiretapArgs {
    /// Intended receiver's ratio.
    #[arg(long)]
    snr1: f64,

    /// Eavesdropper's ratio (at most snr1).
    #[arg(long)]
    snr2: f64,

    /// Also report this input's information gap and check it stays under
    /// the Gaussian ceiling.
    #[arg(long, value_name = "PATH|NAME")]
    dist: Option<String>,

    /// Slack allowed when checking the ceiling.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
}

#[derive(Args)]
struct BroadcastArgs {
    /// Strong user's ratio.
    #[arg(long)]
    snr1: f64,

    /// Weak user's ratio (at most snr1).
    #[arg(long)]
    snr2: f64,

    /// Comma-separated power splits in [0, 1]; default is 21 even steps.
    #[arg(long, value_delimiter = ',')]
    alphas: Vec<f64>,
}

#[derive(Args)]
struct EpiArgs {
    /// Input distribution: JSON file path or built-in corpus member name
    /// (must be purely continuous).
    #[arg(long, value_name = "PATH|NAME")]
    dist: String,

    /// Variance of the added independent Gaussian.
    #[arg(long)]
    varz: f64,
}

#[derive(Args)]
struct CheckArgs {
    /// Check group: all, curve, calculus, info, structure, capacity, oracle.
    #[arg(value_name = "GROUP", default_value = "all")]
    group: String,

    /// Corpus to run over: default, unit-power, or continuous.
    #[arg(long, default_value = "default")]
    corpus: String,

    /// Seed for the randomized families and the Monte Carlo oracles.
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,

    /// Oracle acceptance width, in standard errors.
    #[arg(long, default_value_t = 4.0)]
    tol: f64,
}

/// A parsed --snr-grid / --y-grid specification.
#[derive(Clone, Copy, Debug)]
struct GridSpec {
    log: bool,
    lo: f64,
    hi: f64,
    n: usize,
}

impl GridSpec {
    fn points(&self) -> Vec<f64> {
        if self.log {
            log_grid(self.lo, self.hi, self.n)
        } else {
            lin_grid(self.lo, self.hi, self.n)
        }
    }
}

fn parse_grid(s: &str) -> Result<GridSpec, String> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 4 {
        return Err(format!("'{s}' is not lin:LO:HI:N or log:LO:HI:N"));
    }
    let log = match parts[0] {
        "lin" => false,
        "log" => true,
        other => return Err(format!("unknown grid kind '{other}' (expected lin or log)")),
    };
    let lo: f64 = parts[1]
        .parse()
        .map_err(|_| format!("bad grid endpoint '{}'", parts[1]))?;
    let hi: f64 = parts[2]
        .parse()
        .map_err(|_| format!("bad grid endpoint '{}'", parts[2]))?;
    let n: usize = parts[3]
        .parse()
        .map_err(|_| format!("bad grid size '{}'", parts[3]))?;
    if !lo.is_finite() || !hi.is_finite() || !(hi > lo) {
        return Err(format!("grid needs finite LO < HI, got {lo} and {hi}"));
    }
    if n < 2 {
        return Err("grid needs at least 2 points (use --snr for one)".into());
    }
    if log && !(lo > 0.0) {
        return Err("log grid needs LO > 0".into());
    }
    Ok(GridSpec { log, lo, hi, n })
}

/// A parsed --verify specification.
#[derive(Clone, Copy, Debug)]
enum VerifySpec {
    Mc { seed: Option<u64>, n: u64 },
    Fd,
}

fn parse_verify(s: &str) -> Result<VerifySpec, String> {
    if s == "fd" {
        return Ok(VerifySpec::Fd);
    }
    let rest = s
        .strip_prefix("mc")
        .ok_or_else(|| format!("unknown verifier '{s}' (expected fd, mc, or mc:seed=S,n=N)"))?;
    let mut seed = None;
    let mut n: u64 = 100_000;
    if let Some(kvs) = rest.strip_prefix(':') {
        for kv in kvs.split(',').filter(|p| !p.is_empty()) {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| format!("bad verifier option '{kv}' (expected key=value)"))?;
            match k {
                "seed" => seed = Some(v.parse().map_err(|_| format!("bad seed '{v}'"))?),
                "n" => n = v.parse().map_err(|_| format!("bad sample count '{v}'"))?,
                other => return Err(format!("unknown verifier option '{other}' (expected seed or n)")),
            }
        }
    } else if !rest.is_empty() {
        return Err(format!("unknown verifier '{s}' (expected fd, mc, or mc:seed=S,n=N)"));
    }
    Ok(VerifySpec::Mc { seed, n })
}

/// Everything that stops a subcommand, mapped onto the exit-code contract.
enum Failure {
    Lib(LibError),
    Usage(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Lib(e) if e.is_numerical() => 3,
            _ => 2,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Lib(e) => write!(f, "{e}"),
            Failure::Usage(m) | Failure::Io(m) => write!(f, "{m}"),
        }
    }
}

impl From<LibError> for Failure {
    fn from(e: LibError) -> Self {
        Failure::Lib(e)
    }
}

/// A finished subcommand: the document to emit plus any failed
/// verification gates (which turn a written result into exit code 3).
struct CmdOutput {
    text: String,
    gates: Vec<String>,
}

impl CmdOutput {
    fn clean(text: String) -> Self {
        CmdOutput {
            text,
            gates: Vec::new(),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    init_threads();
    match run(&cli) {
        Ok(out) => {
            if let Err(e) = write_output(cli.out.as_deref(), &out.text) {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
            if out.gates.is_empty() {
                ExitCode::SUCCESS
            } else {
                for g in &out.gates {
                    eprintln!("verification failed: {g}");
                }
                ExitCode::from(3)
            }
        }
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code())
        }
    }
}

/// Honor MMSE_LAB_THREADS as a cap on the global worker pool.
fn init_threads() {
    if let Ok(v) = std::env::var("MMSE_LAB_THREADS") {
        match v.parse::<usize>() {
            Ok(n) if n >= 1 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => eprintln!("warning: ignoring MMSE_LAB_THREADS={v} (expected a positive integer)"),
        }
    }
}

fn write_output(path: Option<&Path>, text: &str) -> Result<(), String> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| format!("cannot write '{}': {e}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: &Cli) -> Result<CmdOutput, Failure> {
    match &cli.command {
        Command::Curve(a) => run_curve(a),
        Command::Post(a) => run_post(a),
        Command::Deriv(a) => run_deriv(a, cli.pretty),
        Command::Info(a) => run_info(a, cli.pretty),
        Command::Cross(a) => run_cross(a, cli.pretty),
        Command::Capacity(c) => run_capacity(c, cli.pretty),
        Command::Check(a) => run_check(a, cli.pretty),
    }
}

/// Resolve --dist: an existing file wins, otherwise a corpus member name.
fn load_dist(spec: &str) -> Result<(InputDistribution, String), Failure> {
    match std::fs::read_to_string(spec) {
        Ok(text) => {
            let dist = InputDistribution::from_json_str(&text)?;
            let label = Path::new(spec)
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| spec.to_string());
            Ok((dist, label))
        }
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            for (name, dist) in corpus::default_corpus() {
                if name == spec {
                    return Ok((dist, name.to_string()));
                }
            }
            let members: Vec<&str> = corpus::default_corpus().iter().map(|(n, _)| *n).collect();
            Err(Failure::Usage(format!(
                "'{spec}' is neither a readable file nor a corpus member (members: {})",
                members.join(", ")
            )))
        }
        Err(e) => Err(Failure::Io(format!("cannot read '{spec}': {e}"))),
    }
}

fn grid_or_point(snr: Option<f64>, grid: Option<GridSpec>, cmd: &str) -> Result<Vec<f64>, Failure> {
    match (snr, grid) {
        (Some(s), _) => Ok(vec![s]),
        (None, Some(g)) => Ok(g.points()),
        (None, None) => Err(Failure::Usage(format!("{cmd} needs --snr or --snr-grid"))),
    }
}

/// 17 significant digits: enough to reproduce the exact double on parse.
fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

fn json_doc<T: Serialize>(doc: &T, pretty: bool) -> String {
    let body = if pretty {
        serde_json::to_string_pretty(doc).expect("report serialization cannot fail")
    } else {
        serde_json::to_string(doc).expect("report serialization cannot fail")
    };
    body + "\n"
}

fn run_curve(args: &CurveArgs) -> Result<CmdOutput, Failure> {
    let (dist, _) = load_dist(&args.dist)?;
    let grid = grid_or_point(args.snr, args.snr_grid, "curve")?;
    let curve = mmse_curve(&dist, &grid)?;
    let mut text = String::new();
    let mut gates = Vec::new();
    match args.verify {
        None => {
            text.push_str("snr,mmse,quad_err,upper_bound\n");
            for p in &curve.points {
                text.push_str(&format!(
                    "{},{},{},{}\n",
                    fmt17(p.snr),
                    fmt17(p.mmse),
                    fmt17(p.quad_err),
                    fmt17(p.upper_bound)
                ));
            }
        }
        Some(VerifySpec::Mc { seed, n }) => {
            let seed = seed.unwrap_or(args.seed);
            text.push_str("snr,mmse,quad_err,upper_bound,mc_value,mc_stderr\n");
            for p in &curve.points {
                let est = mc_mmse(&dist, p.snr, n, seed)?;
                if (p.mmse - est.value).abs() > args.tol * est.stderr + p.quad_err {
                    gates.push(format!(
                        "snr {}: quadrature {:.6e} vs oracle {:.6e} (stderr {:.2e}) beyond {} standard errors",
                        p.snr, p.mmse, est.value, est.stderr, args.tol
                    ));
                }
                text.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    fmt17(p.snr),
                    fmt17(p.mmse),
                    fmt17(p.quad_err),
                    fmt17(p.upper_bound),
                    fmt17(est.value),
                    fmt17(est.stderr)
                ));
            }
        }
        Some(VerifySpec::Fd) => {
            return Err(Failure::Usage(
                "curve verification is Monte Carlo only (use --verify mc)".into(),
            ))
        }
    }
    Ok(CmdOutput { text, gates })
}

fn run_post(args: &PostArgs) -> Result<CmdOutput, Failure> {
    let (dist, _) = load_dist(&args.dist)?;
    let ys = args.y_grid.points();
    let mut text = String::new();
    let mut gates = Vec::new();

    let mut header = String::from("y,density,mean");
    for k in 2..=args.kmax {
        header.push_str(&format!(",m{k}"));
    }
    let mc = match args.verify {
        None => None,
        Some(VerifySpec::Mc { seed, n }) => {
            header.push_str(",mc_mean,mc_mean_stderr,mc_m2,mc_m2_stderr,ess");
            Some((seed.unwrap_or(args.seed), n))
        }
        Some(VerifySpec::Fd) => {
            return Err(Failure::Usage(
                "post verification is Monte Carlo only (use --verify mc)".into(),
            ))
        }
    };
    header.push('\n');
    text.push_str(&header);

    for &y in &ys {
        let s = posterior_summary(&dist, y, args.snr, args.kmax)?;
        text.push_str(&format!("{},{},{}", fmt17(y), fmt17(s.density), fmt17(s.mean)));
        for k in 2..=args.kmax {
            text.push_str(&format!(",{}", fmt17(s.central_moment(k))));
        }
        if let Some((seed, n)) = mc {
            let est = mc_posterior_slice(&dist, y, args.snr, n, seed)?;
            if (s.mean - est.mean.value).abs() > args.tol * est.mean.stderr {
                gates.push(format!(
                    "y {y}: mean {:.6e} vs oracle {:.6e} (stderr {:.2e}) beyond {} standard errors",
                    s.mean, est.mean.value, est.mean.stderr, args.tol
                ));
            }
            if (s.central_moment(2) - est.m2.value).abs() > args.tol * est.m2.stderr {
                gates.push(format!(
                    "y {y}: variance {:.6e} vs oracle {:.6e} (stderr {:.2e}) beyond {} standard errors",
                    s.central_moment(2),
                    est.m2.value,
                    est.m2.stderr,
                    args.tol
                ));
            }
            text.push_str(&format!(
                ",{},{},{},{},{}",
                fmt17(est.mean.value),
                fmt17(est.mean.stderr),
                fmt17(est.m2.value),
                fmt17(est.m2.stderr),
                fmt17(est.ess)
            ));
        }
        text.push('\n');
    }
    Ok(CmdOutput { text, gates })
}

#[derive(Serialize)]
struct DerivPoint {
    snr: f64,
    order: usize,
    value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    finite_diff: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    rel_gap: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pass: Option<bool>,
}

#[derive(Serialize)]
struct DerivDoc {
    schema: &'static str,
    input: String,
    points: Vec<DerivPoint>,
}

fn run_deriv(args: &DerivArgs, pretty: bool) -> Result<CmdOutput, Failure> {
    let (dist, label) = load_dist(&args.dist)?;
    let grid = grid_or_point(args.snr, args.snr_grid, "deriv")?;
    if args.orders.is_empty() || args.orders.iter().any(|o| !(1..=3).contains(o)) {
        return Err(Failure::Usage(format!(
            "deriv orders must be a non-empty subset of 1..=3, got {:?}",
            args.orders
        )));
    }
    let verify = match args.verify {
        None => false,
        Some(VerifySpec::Fd) => true,
        Some(VerifySpec::Mc { .. }) => {
            return Err(Failure::Usage(
                "deriv verification is finite-difference only (use --verify fd)".into(),
            ))
        }
    };
    let mut points = Vec::new();
    let mut gates = Vec::new();
    for &snr in &grid {
        for &order in &args.orders {
            if verify {
                let r = derivative_report(&dist, snr, order, None)?;
                // Below the quadrature noise floor both routes measure
                // roundoff, so the gate falls back to absolute agreement.
                let resolvable = r.analytic.abs() > 1e-10 || r.finite_diff.abs() > 1e-10;
                let pass = if resolvable {
                    r.rel_gap < args.tol
                } else {
                    (r.analytic - r.finite_diff).abs() < 1e-12
                };
                if !pass {
                    gates.push(format!(
                        "snr {snr} order {order}: analytic {:.6e} vs differences {:.6e} (rel gap {:.2e})",
                        r.analytic, r.finite_diff, r.rel_gap
                    ));
                }
                points.push(DerivPoint {
                    snr,
                    order,
                    value: r.analytic,
                    finite_diff: Some(r.finite_diff),
                    rel_gap: Some(r.rel_gap),
                    pass: Some(pass),
                });
            } else {
                points.push(DerivPoint {
                    snr,
                    order,
                    value: mmse_derivative(&dist, snr, order)?,
                    finite_diff: None,
                    rel_gap: None,
                    pass: None,
                });
            }
        }
    }
    let doc = DerivDoc {
        schema: SCHEMA_DERIV,
        input: label,
        points,
    };
    Ok(CmdOutput {
        text: json_doc(&doc, pretty),
        gates,
    })
}

#[derive(Serialize)]
struct InfoPoint {
    #[serde(flatten)]
    base: InfoReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    derivatives: Option<BTreeMap<String, f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    mc_value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    mc_stderr: Option<f64>,
    /// Relative gap between the information slope and half the error.
    #[serde(skip_serializing_if = "Option::is_none")]
    slope_gap: Option<f64>,
}

#[derive(Serialize)]
struct InfoDoc {
    schema: &'static str,
    input: String,
    units: &'static str,
    points: Vec<InfoPoint>,
}

fn run_info(args: &InfoArgs, pretty: bool) -> Result<CmdOutput, Failure> {
    let (dist, label) = load_dist(&args.dist)?;
    let grid = grid_or_point(args.snr, args.snr_grid, "info")?;
    if args.orders.iter().any(|o| !(1..=4).contains(o)) {
        return Err(Failure::Usage(format!(
            "info derivative orders must lie in 1..=4, got {:?}",
            args.orders
        )));
    }
    let scale = if args.bits { std::f64::consts::LOG2_E } else { 1.0 };
    let units = if args.bits { "bits" } else { "nats" };

    // Entropies do not depend on the ratio; compute them once.
    let h_discrete = if dist.is_discrete() {
        Some(discrete_entropy(&dist)?)
    } else {
        None
    };
    let h_differential = if dist.is_continuous() {
        Some(differential_entropy(&dist)?)
    } else {
        None
    };

    let mut points = Vec::new();
    let mut gates = Vec::new();
    for &snr in &grid {
        let mi = mutual_information(&dist, snr)?;
        let derivatives = if args.orders.is_empty() {
            None
        } else {
            let mut m = BTreeMap::new();
            for &order in &args.orders {
                m.insert(format!("d{order}"), scale * mi_derivative(&dist, snr, order)?);
            }
            Some(m)
        };
        let mut point = InfoPoint {
            base: InfoReport {
                snr,
                mutual_information: scale * mi,
                discrete_entropy: h_discrete.map(|h| scale * h),
                differential_entropy: h_differential.map(|h| scale * h),
            },
            derivatives,
            mc_value: None,
            mc_stderr: None,
            slope_gap: None,
        };
        match args.verify {
            None => {}
            Some(VerifySpec::Mc { seed, n }) => {
                let tol = args.tol.unwrap_or(4.0);
                let est = mc_mutual_information(&dist, snr, n, seed.unwrap_or(args.seed))?;
                if (mi - est.value).abs() > tol * est.stderr {
                    gates.push(format!(
                        "snr {snr}: information {mi:.6e} vs oracle {:.6e} (stderr {:.2e}) beyond {tol} standard errors",
                        est.value, est.stderr
                    ));
                }
                point.mc_value = Some(scale * est.value);
                point.mc_stderr = Some(scale * est.stderr);
            }
            Some(VerifySpec::Fd) => {
                let tol = args.tol.unwrap_or(1e-5);
                let mut f = |s: f64| mutual_information(&dist, s);
                let slope = finite_difference_of(&mut f, snr, 1, &default_step_schedule(snr))?;
                let half = 0.5 * mmse_at(&dist, snr)?.0;
                let gap = (slope - half).abs() / half.abs().max(1e-12);
                if gap > tol {
                    gates.push(format!(
                        "snr {snr}: information slope {slope:.6e} vs half the error {half:.6e} (rel gap {gap:.2e})"
                    ));
                }
                point.slope_gap = Some(gap);
            }
        }
        points.push(point);
    }
    let doc = InfoDoc {
        schema: SCHEMA_INFO,
        input: label,
        units,
        points,
    };
    Ok(CmdOutput {
        text: json_doc(&doc, pretty),
        gates,
    })
}

#[derive(Serialize)]
struct CrossDoc {
    schema: &'static str,
    input: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    crossing_point: Option<f64>,
    report: CrossingReport,
}

fn run_cross(args: &CrossArgs, pretty: bool) -> Result<CmdOutput, Failure> {
    let (dist, label) = load_dist(&args.dist)?;
    let config = match args.snr_grid {
        None => GridConfig {
            zero_band: args.tol,
            ..GridConfig::default()
        },
        Some(g) if g.log => GridConfig {
            lo: g.lo,
            hi: g.hi,
            n: g.n,
            zero_band: args.tol,
        },
        Some(_) => {
            return Err(Failure::Usage(
                "crossing scans sample logarithmically; use --snr-grid log:LO:HI:N".into(),
            ))
        }
    };
    let report = single_crossing(&dist, args.sigma2, &config)?;
    let doc = CrossDoc {
        schema: SCHEMA_CROSS,
        input: label,
        crossing_point: report.crossing_point(),
        report,
    };
    Ok(CmdOutput::clean(json_doc(&doc, pretty)))
}

#[derive(Serialize)]
struct WiretapDoc {
    schema: &'static str,
    snr1: f64,
    snr2: f64,
    capacity: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    input: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    input_gap: Option<f64>,
    /// capacity - input_gap; nonnegative up to the slack for every input.
    #[serde(skip_serializing_if = "Option::is_none")]
    ceiling_slack: Option<f64>,
}

#[derive(Serialize)]
struct BroadcastDoc {
    schema: &'static str,
    snr1: f64,
    snr2: f64,
    samples: Vec<CapacityRegionSample>,
}

#[derive(Serialize)]
struct EpiDoc {
    schema: &'static str,
    input: String,
    report: EpiReport,
}

fn run_capacity(cmd: &CapacityCmd, pretty: bool) -> Result<CmdOutput, Failure> {
    match cmd {
        CapacityCmd::Wiretap(args) => {
            let capacity = secrecy_capacity(args.snr1, args.snr2)?;
            let mut doc = WiretapDoc {
                schema: SCHEMA_WIRETAP,
                snr1: args.snr1,
                snr2: args.snr2,
                capacity,
                input: None,
                input_gap: None,
                ceiling_slack: None,
            };
            let mut gates = Vec::new();
            if let Some(spec) = &args.dist {
                let (dist, label) = load_dist(spec)?;
                let gap = secrecy_gap(&dist, args.snr1, args.snr2)?;
                let slack = capacity - gap;
                if slack < -args.tol {
                    gates.push(format!(
                        "input gap {gap:.6e} exceeds the Gaussian ceiling {capacity:.6e} by {:.2e}",
                        -slack
                    ));
                }
                doc.input = Some(label);
                doc.input_gap = Some(gap);
                doc.ceiling_slack = Some(slack);
            }
            Ok(CmdOutput {
                text: json_doc(&doc, pretty),
                gates,
            })
        }
        CapacityCmd::Broadcast(args) => {
            let alphas = if args.alphas.is_empty() {
                lin_grid(0.0, 1.0, 21)
            } else {
                args.alphas.clone()
            };
            let samples = broadcast_region(args.snr1, args.snr2, &alphas)?;
            let doc = BroadcastDoc {
                schema: SCHEMA_BROADCAST,
                snr1: args.snr1,
                snr2: args.snr2,
                samples,
            };
            Ok(CmdOutput::clean(json_doc(&doc, pretty)))
        }
        CapacityCmd::Epi(args) => {
            let (dist, label) = load_dist(&args.dist)?;
            let report = epi_gaussian_check(&dist, args.varz)?;
            let doc = EpiDoc {
                schema: SCHEMA_EPI,
                input: label,
                report,
            };
            Ok(CmdOutput::clean(json_doc(&doc, pretty)))
        }
    }
}

fn run_check(args: &CheckArgs, pretty: bool) -> Result<CmdOutput, Failure> {
    let summary = checks::run(&args.group, &args.corpus, args.seed, args.tol)?;
    let gates = summary.failures();
    Ok(CmdOutput {
        text: json_doc(&summary, pretty),
        gates,
    })
}
