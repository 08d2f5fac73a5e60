//! `rgg`: command-line front end for torus random geometric graph experiments.

mod config;

use std::fmt;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use rgg_core::analytic::{
    area_bounds, chernoff_box_bound, ek_shape, expected_k1_exact, i_beta_asymptotic, i_beta_quadrature, k_prime_expectation_bracket,
    mu_of, r_of_mu, ClusterGeometry, IBetaParams,
};
use rgg_core::census::CensusConfig;
use rgg_core::harness::{hitting_sweep, run_census_trials, scaling_sweep, CensusCampaign, TrialPlan, DEFAULT_BUDGET};
use rgg_core::output::{estimate_table, hitting_table, points_table, scaling_table, Cell, Table};
use rgg_core::process::DEFAULT_KAPPA;
use rgg_core::rgg::sample_points;
use rgg_core::verify::{run_suite, VerifySettings};
use rgg_core::RandomSeed;

/// A problem with the invocation itself; exits with status 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage<T>(msg: impl Into<String>) -> anyhow::Result<T> {
    Err(UsageError(msg.into()).into())
}

/// Acceptance criteria failed; exits with status 1.
#[derive(Debug)]
struct VerifyFailed(String);

impl fmt::Display for VerifyFailed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "acceptance failed: {}", self.0)
    }
}

impl std::error::Error for VerifyFailed {}

#[derive(Parser)]
#[command(name = "rgg", version, about = "Random geometric graphs on the unit torus near the connectivity threshold")]
struct Cli {
    /// Worker threads for Monte Carlo trials (results do not depend on it).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// JSON file with default values for any flag, keyed by flag name.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample n uniform points on the torus.
    Gen(GenArgs),
    /// Component census over independent trials.
    Census(CensusArgs),
    /// Pr(K~_ell > 0) and its log^{ell-1} n scaling across sizes.
    Scaling(ScalingArgs),
    /// Hitting radii r_i, r_c and close isolated pairs across sizes.
    Hitting(HittingArgs),
    /// Evaluate one closed-form or quadrature quantity.
    Analytic(AnalyticArgs),
    /// Run the acceptance suite.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Args, Serialize, Deserialize, Default, Debug)]
#[serde(rename_all = "kebab-case")]
struct OutputArgs {
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Args, Serialize, Deserialize, Default, Debug)]
#[serde(rename_all = "kebab-case")]
struct GenArgs {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    #[serde(flatten)]
    output: OutputArgs,
}

#[derive(Args, Serialize, Deserialize, Default, Debug)]
#[serde(rename_all = "kebab-case")]
struct CensusArgs {
    #[arg(long)]
    n: Option<usize>,
    /// Expected isolated-vertex count; sets r = sqrt(log(n/mu) / (pi n)).
    #[arg(long)]
    mu: Option<f64>,
    /// Connection radius (exclusive with --mu).
    #[arg(long)]
    r: Option<f64>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    lmax: Option<usize>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Also write per-trial counters to this CSV file.
    #[arg(long)]
    trials_out: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    output: OutputArgs,
}

#[derive(Args, Serialize, Deserialize, Default, Debug)]
#[serde(rename_all = "kebab-case")]
struct ScalingArgs {
    /// Comma-separated sizes, strictly increasing, each at least 16.
    #[arg(long, value_delimiter = ',')]
    ns: Option<Vec<usize>>,
    #[arg(long)]
    ell: Option<usize>,
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    #[serde(flatten)]
    output: OutputArgs,
}

#[derive(Args, Serialize, Deserialize, Default, Debug)]
#[serde(rename_all = "kebab-case")]
struct HittingArgs {
    /// Comma-separated sizes, strictly increasing.
    #[arg(long, value_delimiter = ',')]
    ns: Option<Vec<usize>>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    kappa: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    #[serde(flatten)]
    output: OutputArgs,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum AnalyticOp {
    /// n e^{-pi r^2 n}
    Mu,
    /// Radius with a given mu.
    Radius,
    /// Exact expected number of isolated vertices.
    Ek1,
    /// I(beta) by adaptive quadrature.
    Ibeta,
    /// Large-n form of I(beta).
    IbetaAsym,
    /// Area bounds of the union of a cluster's disks.
    AreaBounds,
    /// Shape of the bound on size-k narrow clusters.
    EkShape,
    /// Chernoff bound on an over-full box.
    ChernoffBox,
    /// Shape bracket of E K'_{eps,ell}.
    KprimeBracket,
}

#[derive(Args, Serialize, Deserialize, Default, Debug)]
#[serde(rename_all = "kebab-case")]
struct AnalyticArgs {
    #[arg(long, value_enum)]
    op: Option<AnalyticOp>,
    #[arg(long)]
    n: Option<u64>,
    #[arg(long)]
    r: Option<f64>,
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    ell: Option<u32>,
    #[arg(long)]
    k: Option<u32>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    rho_over_r: Option<f64>,
    #[command(flatten)]
    #[serde(flatten)]
    output: OutputArgs,
}

#[derive(Args, Serialize, Deserialize, Default, Debug)]
#[serde(rename_all = "kebab-case")]
struct VerifyArgs {
    /// Reduced settings with every n <= 4096.
    #[arg(long)]
    #[serde(skip_serializing_if = "std::ops::Not::not", default)]
    quick: bool,
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    #[serde(flatten)]
    output: OutputArgs,
}

fn required<T>(v: Option<T>, flag: &str) -> anyhow::Result<T> {
    match v {
        Some(v) => Ok(v),
        None => usage(format!("missing required parameter --{flag}")),
    }
}

fn budget() -> anyhow::Result<u64> {
    match std::env::var("RGG_BUDGET") {
        Err(_) => Ok(DEFAULT_BUDGET),
        Ok(s) => match s.trim().parse::<u64>() {
            Ok(b) => Ok(b),
            Err(_) => match s.trim().parse::<f64>() {
                Ok(f) if f >= 0.0 && f.fract() == 0.0 && f < u64::MAX as f64 => Ok(f as u64),
                _ => usage(format!("RGG_BUDGET must be a non-negative integer, got {s:?}")),
            },
        },
    }
}

/// Radius from exactly one of `mu` and `r`.
fn radius(n: u64, mu: Option<f64>, r: Option<f64>) -> anyhow::Result<f64> {
    match (mu, r) {
        (Some(_), Some(_)) => usage("give either --mu or --r, not both"),
        (None, None) => usage("one of --mu or --r is required"),
        (Some(mu), None) => Ok(r_of_mu(n, mu)?),
        (None, Some(r)) if r >= 0.0 => Ok(r),
        (None, Some(r)) => usage(format!("--r must be non-negative, got {r}")),
    }
}

/// Write `table` (with run parameters in the JSON form) to `--out` or stdout.
fn emit(output: &OutputArgs, command: &str, params: Value, table: &Table) -> anyhow::Result<()> {
    let mut sink: Box<dyn Write> = match &output.out {
        Some(path) => Box::new(BufWriter::new(File::create(path).with_context(|| format!("cannot create {}", path.display()))?)),
        None => Box::new(io::stdout().lock()),
    };
    match output.format.unwrap_or_default() {
        Format::Csv => table.write_csv(&mut sink)?,
        Format::Json => {
            let doc = json!({ "command": command, "parameters": params, "rows": table.to_json() });
            serde_json::to_writer_pretty(&mut sink, &doc)?;
            writeln!(sink)?;
        }
    }
    sink.flush()?;
    Ok(())
}

fn check_n(n: usize) -> anyhow::Result<usize> {
    if n == 0 {
        usage("--n must be at least 1")
    } else {
        Ok(n)
    }
}

fn census_config(eps: Option<f64>, lmax: Option<usize>) -> anyhow::Result<CensusConfig> {
    let defaults = CensusConfig::default();
    Ok(CensusConfig::new(eps.unwrap_or(defaults.epsilon), lmax.unwrap_or(defaults.ell_max))?)
}

fn cmd_gen(a: GenArgs) -> anyhow::Result<()> {
    let n = check_n(required(a.n, "n")?)?;
    let seed = a.seed.unwrap_or(0);
    let ps = sample_points(n, RandomSeed::new(seed))?;
    emit(&a.output, "gen", json!({ "n": n, "seed": seed }), &points_table(&ps))
}

fn per_trial_table(c: &CensusCampaign) -> Table {
    let lmax = c.plan.census_cfg.ell_max;
    let mut cols = vec!["trial".to_string(), "k1".to_string()];
    for ell in 2..=lmax {
        cols.extend([format!("k_{ell}"), format!("kprime_{ell}"), format!("ktilde_{ell}")]);
    }
    cols.extend(["k_overflow".to_string(), "solitary".to_string()]);
    let names: Vec<&str> = cols.iter().map(String::as_str).collect();
    let mut t = Table::new(&names);
    for (k, census) in c.censuses.iter().enumerate() {
        let mut row: Vec<Cell> = vec![k.into(), census.k1.into()];
        for ell in 2..=lmax {
            row.extend([census.k_exact(ell).into(), census.k_prime(ell).into(), census.k_tilde(ell).into()]);
        }
        row.extend([census.k_overflow.into(), u64::from(census.solitary_count).into()]);
        t.push(row);
    }
    t
}

fn cmd_census(a: CensusArgs) -> anyhow::Result<()> {
    let n = check_n(required(a.n, "n")?)?;
    let r = radius(n as u64, a.mu, a.r)?;
    let cfg = census_config(a.eps, a.lmax)?;
    let trials = required(a.trials, "trials")?;
    let seed = a.seed.unwrap_or(0);
    let plan = TrialPlan::with_radius(n, r, trials, RandomSeed::new(seed), cfg)?.budget(budget()?);
    let campaign = run_census_trials(&plan)?;
    if let Some(path) = &a.trials_out {
        let file = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
        per_trial_table(&campaign).write_csv(BufWriter::new(file))?;
    }
    let params = json!({
        "n": n, "r": r, "mu": plan.mu, "eps": cfg.epsilon, "lmax": cfg.ell_max,
        "trials": trials, "seed": seed,
    });
    emit(&a.output, "census", params, &estimate_table(&campaign.rows))
}

fn cmd_scaling(a: ScalingArgs) -> anyhow::Result<()> {
    let ns = required(a.ns, "ns")?;
    let ell = a.ell.unwrap_or(2);
    let mu = a.mu.unwrap_or(1.0);
    let cfg = census_config(a.eps, Some(ell.max(2)))?;
    let trials = required(a.trials, "trials")?;
    let seed = a.seed.unwrap_or(0);
    let sweep = scaling_sweep(&ns, ell, mu, trials, RandomSeed::new(seed), cfg, budget()?)?;
    let params = json!({ "ns": ns, "ell": ell, "mu": mu, "eps": cfg.epsilon, "trials": trials, "seed": seed });
    emit(&a.output, "scaling", params, &scaling_table(&sweep.rows))
}

fn cmd_hitting(a: HittingArgs) -> anyhow::Result<()> {
    let ns = required(a.ns, "ns")?;
    let trials = required(a.trials, "trials")?;
    let kappa = a.kappa.unwrap_or(DEFAULT_KAPPA);
    let seed = a.seed.unwrap_or(0);
    let sweep = hitting_sweep(&ns, trials, kappa, RandomSeed::new(seed), budget()?)?;
    let params = json!({ "ns": ns, "trials": trials, "kappa": kappa, "seed": seed });
    emit(&a.output, "hitting", params, &hitting_table(&sweep.rows))
}

fn one_row(pairs: &[(&str, f64)]) -> Table {
    let names: Vec<&str> = pairs.iter().map(|p| p.0).collect();
    let mut t = Table::new(&names);
    t.push(pairs.iter().map(|p| Cell::Float(p.1)).collect());
    t
}

fn cmd_analytic(a: AnalyticArgs) -> anyhow::Result<()> {
    let op = required(a.op, "op")?;
    let n = || required(a.n, "n");
    let eps = || required(a.eps, "eps");
    // radius from --mu or --r; the threshold radius (mu = 1) when neither is given
    let r_or_threshold = |n: u64| match (a.mu, a.r) {
        (None, None) => Ok(r_of_mu(n, 1.0)?),
        (mu, r) => radius(n, mu, r),
    };
    let ibeta = |asym: bool| -> anyhow::Result<Table> {
        let n = n()?;
        let p = IBetaParams {
            beta: required(a.beta, "beta")?,
            ell: required(a.ell, "ell")?,
            epsilon: eps()?,
            n,
            r: r_or_threshold(n)?,
        };
        let v = if asym { i_beta_asymptotic(p)? } else { i_beta_quadrature(p)? };
        Ok(one_row(&[(if asym { "ibeta_asym" } else { "ibeta" }, v)]))
    };
    let table = match op {
        AnalyticOp::Mu => {
            let n = n()?;
            one_row(&[("mu", mu_of(n, required(a.r, "r")?))])
        }
        AnalyticOp::Radius => one_row(&[("r", r_of_mu(n()?, required(a.mu, "mu")?)?)]),
        AnalyticOp::Ek1 => {
            let n = n()?;
            one_row(&[("ek1", expected_k1_exact(n, radius(n, a.mu, a.r)?)?)])
        }
        AnalyticOp::Ibeta => ibeta(false)?,
        AnalyticOp::IbetaAsym => ibeta(true)?,
        AnalyticOp::AreaBounds => {
            let r = required(a.r, "r")?;
            let b = area_bounds(ClusterGeometry {
                rho: required(a.rho_over_r, "rho-over-r")? * r,
                r,
            })?;
            one_row(&[("lower", b.lower), ("upper", b.upper)])
        }
        AnalyticOp::EkShape => one_row(&[("ek_shape", ek_shape(required(a.k, "k")?, n()?, eps()?)?)]),
        AnalyticOp::ChernoffBox => {
            let n = n()?;
            let b = chernoff_box_bound(n, radius(n, a.mu, a.r)?, eps()?)?;
            one_row(&[
                ("y", b.y),
                ("ew", b.ew),
                ("delta", b.delta),
                ("bound", b.bound),
                ("bound_power_form", b.bound_power_form),
            ])
        }
        AnalyticOp::KprimeBracket => {
            let n = n()?;
            let b = k_prime_expectation_bracket(n, r_or_threshold(n)?, required(a.ell, "ell")?, eps()?)?;
            one_row(&[("lower_shape", b.lower_shape), ("upper_shape", b.upper_shape)])
        }
    };
    emit(&a.output, "analytic", serde_json::to_value(&a)?, &table)
}

fn cmd_verify(a: VerifyArgs) -> anyhow::Result<()> {
    let mut settings = if a.quick { VerifySettings::quick() } else { VerifySettings::full() };
    if let Some(seed) = a.seed {
        settings.seed = seed;
    }
    // validate the report destination before hours of computation
    let mut report_file = match &a.output.out {
        Some(p) => Some(File::create(p).with_context(|| format!("cannot create {}", p.display()))?),
        None => None,
    };
    let reports = run_suite(&settings, |r| println!("{}", r.line()));
    if let Some(file) = report_file.take() {
        let mut t = Table::new(&["id", "name", "passed", "seconds", "detail"]);
        for r in &reports {
            t.push(vec![u64::from(r.id).into(), r.name.into(), r.passed.into(), r.seconds.into(), r.detail.as_str().into()]);
        }
        let out = OutputArgs {
            out: None,
            format: a.output.format,
        };
        let mut w = BufWriter::new(file);
        match out.format.unwrap_or_default() {
            Format::Csv => t.write_csv(&mut w)?,
            Format::Json => {
                serde_json::to_writer_pretty(&mut w, &json!({ "command": "verify", "settings": settings, "rows": t.to_json() }))?;
                writeln!(w)?;
            }
        }
        w.flush()?;
    }
    let failed: Vec<String> = reports.iter().filter(|r| !r.passed).map(|r| format!("{} ({})", r.id, r.name)).collect();
    if failed.is_empty() {
        println!("all {} criteria passed", reports.len());
        Ok(())
    } else {
        Err(VerifyFailed(failed.join(", ")).into())
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let cfg = config::load(cli.config.as_deref())?;
    let threads = match (cli.threads, cfg.get("threads")) {
        (Some(t), _) => Some(t),
        (None, None) => None,
        (None, Some(v)) => match v.as_u64() {
            Some(t) => Some(t as usize),
            None => return usage("config key threads must be a positive integer"),
        },
    };
    if let Some(t) = threads {
        if t == 0 {
            return usage("--threads must be at least 1");
        }
        rayon::ThreadPoolBuilder::new().num_threads(t).build_global()?;
    }
    match cli.command {
        Command::Gen(a) => cmd_gen(config::merge(&a, &cfg)?),
        Command::Census(a) => cmd_census(config::merge(&a, &cfg)?),
        Command::Scaling(a) => cmd_scaling(config::merge(&a, &cfg)?),
        Command::Hitting(a) => cmd_hitting(config::merge(&a, &cfg)?),
        Command::Analytic(a) => cmd_analytic(config::merge(&a, &cfg)?),
        Command::Verify(a) => cmd_verify(config::merge(&a, &cfg)?),
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<UsageError>().is_some() {
        return 2;
    }
    match err.downcast_ref::<rgg_core::Error>() {
        Some(rgg_core::Error::BudgetExceeded { .. }) => 3,
        Some(rgg_core::Error::InvalidParameter { .. }) => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("rgg: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
