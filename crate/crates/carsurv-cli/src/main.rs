//! Command-line front end: experiment orchestration and report emission.
//!
//! Progress goes to standard error; results go to files or standard
//! output. Exit codes: 0 success, 2 configuration/validation error,
//! 3 replicate-failure threshold exceeded, 1 anything else.

mod reference;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use carsurv::asymptotics::{
    estimate_limit_components, pitman_are, predicted_type1, AsymptoticsError, TestMode,
};
use carsurv::config::RunConfig;
use carsurv::harness::{
    estimate_rejection, power_sweep, replicate_dataset, run_trial, SimConfig, SimError,
};
use carsurv::randomization::{
    imbalance, monte_carlo_imbalance, CovariateLaw, SchemeKind, SchemeSpec, SchemeState,
};
use carsurv::report;
use carsurv::rng::derive_rng;
use carsurv::test_stats::nu_d;
use carsurv::trial_data::{CaseSpec, ObservedTrial};

#[derive(Parser)]
#[command(name = "carsurv", version, about = "Covariate-adaptive randomization and survival test simulation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate rejection rates for one case/scheme configuration.
    Simulate(SimulateArgs),
    /// Rejection rates over a grid of treatment effects.
    Power(PowerArgs),
    /// Re-run a published experiment grid and flag deviating cells.
    Reproduce(ReproduceArgs),
    /// Large-sample variance components, predicted levels, efficacies.
    Asymptotics(AsymptoticsArgs),
    /// Monte Carlo moments of the within-stratum imbalance.
    Imbalance(ImbalanceArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SchemeArg {
    Simple,
    PermutedBlock,
    BiasedCoin,
    Urn,
    PocockSimon,
}

impl SchemeArg {
    fn kind(self) -> SchemeKind {
        match self {
            SchemeArg::Simple => SchemeKind::Simple,
            SchemeArg::PermutedBlock => SchemeKind::PermutedBlock,
            SchemeArg::BiasedCoin => SchemeKind::EfronBiasedCoin,
            SchemeArg::Urn => SchemeKind::WeiUrn,
            SchemeArg::PocockSimon => SchemeKind::PocockSimon,
        }
    }
}

#[derive(Args, Clone)]
struct SchemeFlags {
    /// Randomization scheme.
    #[arg(long, value_enum)]
    scheme: Option<SchemeArg>,
    /// Block size 2b for the permuted block design.
    #[arg(long)]
    block_size: Option<usize>,
    /// Bias probability for the biased coin / marginal method.
    #[arg(long)]
    coin_p: Option<f64>,
    #[arg(long)]
    urn_s: Option<f64>,
    #[arg(long)]
    urn_omega: Option<f64>,
    /// Margin weights for the marginal method (comma separated).
    #[arg(long, value_delimiter = ',')]
    ps_weights: Option<Vec<f64>>,
    /// Use squared instead of absolute marginal differences.
    #[arg(long)]
    ps_squared: bool,
}

impl SchemeFlags {
    fn apply(&self, base: Option<SchemeSpec>) -> Result<Option<SchemeSpec>, CliError> {
        let mut spec = match (self.scheme, base) {
            (Some(arg), _) => Some(default_spec(arg.kind())),
            (None, base) => base,
        };
        if let Some(spec) = spec.as_mut() {
            if let Some(b) = self.block_size {
                spec.block_size = b;
            }
            if let Some(p) = self.coin_p {
                spec.coin_p = p;
            }
            if let Some(s) = self.urn_s {
                spec.urn_s = s;
            }
            if let Some(o) = self.urn_omega {
                spec.urn_omega = o;
            }
            if let Some(w) = &self.ps_weights {
                spec.ps_weights = Some(w.clone());
            }
            if self.ps_squared {
                spec.ps_squared = true;
            }
            spec.validate().map_err(|e| CliError::Validation(e.to_string()))?;
        }
        Ok(spec)
    }
}

fn default_spec(kind: SchemeKind) -> SchemeSpec {
    match kind {
        SchemeKind::Simple => SchemeSpec::simple(),
        SchemeKind::PermutedBlock => SchemeSpec::permuted_block(4),
        SchemeKind::EfronBiasedCoin => SchemeSpec::efron_biased_coin(2.0 / 3.0),
        SchemeKind::WeiUrn => SchemeSpec::wei_urn(1.0, 1.0),
        SchemeKind::PocockSimon => SchemeSpec::pocock_simon(2.0 / 3.0),
    }
}

#[derive(Args, Clone)]
struct CaseFlags {
    /// Simulation case id (1..=6).
    #[arg(long)]
    case: Option<u8>,
    /// Sample size per trial.
    #[arg(long)]
    n: Option<usize>,
    /// Baseline hazard rate.
    #[arg(long)]
    lambda0: Option<f64>,
    /// Discretization levels for the continuous covariate of case 3.
    #[arg(long)]
    k_levels: Option<u8>,
    /// Scale on the covariate coefficients of the true model.
    #[arg(long)]
    effect_scale: Option<f64>,
}

#[derive(Args)]
struct SimCommonArgs {
    /// TOML run configuration; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    case: CaseFlags,
    #[command(flatten)]
    scheme: SchemeFlags,
    /// Number of replicates.
    #[arg(long)]
    reps: Option<usize>,
    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Two-sided significance level.
    #[arg(long)]
    alpha: Option<f64>,
    /// Bootstrap resample count; enables the bootstrap test families.
    #[arg(long)]
    bootstrap: Option<usize>,
    /// Worker threads (default: CARSURV_THREADS or all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Result CSV destination (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    common: SimCommonArgs,
    /// Treatment effect under which to simulate.
    #[arg(long)]
    theta: Option<f64>,
    /// Write per-replicate test reports of the first replicate here.
    #[arg(long)]
    emit_reports: Option<PathBuf>,
    /// Write the observed dataset of the first replicate here.
    #[arg(long)]
    dump_dataset: Option<PathBuf>,
}

#[derive(Args)]
struct PowerArgs {
    #[command(flatten)]
    common: SimCommonArgs,
    /// Treatment-effect grid, comma separated and sorted.
    #[arg(long, value_delimiter = ',')]
    theta_grid: Option<Vec<f64>>,
    /// Render power curves to this SVG file.
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ReproduceTarget {
    Table1,
    Table2,
    Imbalance,
}

#[derive(Args)]
struct ReproduceArgs {
    target: ReproduceTarget,
    /// Fraction of the published replicate count to run, in (0, 1].
    #[arg(long, default_value_t = 1.0)]
    scale: f64,
    #[arg(long, default_value_t = 20260810)]
    seed: u64,
    /// Include the bootstrap families (expensive).
    #[arg(long)]
    bootstrap: bool,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Score,
    Logrank,
}

#[derive(Args)]
struct AsymptoticsArgs {
    #[command(flatten)]
    case: CaseFlags,
    #[command(flatten)]
    scheme: SchemeFlags,
    /// Component to estimate.
    #[arg(long, value_enum, default_value_t = ModeArg::Logrank)]
    mode: ModeArg,
    /// Monte Carlo sample size.
    #[arg(long, default_value_t = 200_000)]
    mc_size: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ImbalanceArgs {
    #[command(flatten)]
    scheme: SchemeFlags,
    /// Bernoulli success probability per covariate margin (comma list).
    #[arg(long, value_delimiter = ',', default_value = "0.5")]
    margins: Vec<f64>,
    #[arg(long, default_value_t = 2000)]
    n: usize,
    #[arg(long, default_value_t = 5000)]
    reps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Emit one realized run (stratum,n_z,D_n,D_over_sqrt_nz) instead of
    /// replicated moments.
    #[arg(long)]
    single: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

enum CliError {
    Validation(String),
    FailureThreshold(String),
    Other(String),
}

impl CliError {
    fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Validation(_) => ExitCode::from(2),
            CliError::FailureThreshold(_) => ExitCode::from(3),
            CliError::Other(_) => ExitCode::from(1),
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Validation(m) | CliError::FailureThreshold(m) | CliError::Other(m) => m,
        }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Config(_) => CliError::Validation(e.to_string()),
            SimError::TooManyFailures { .. } => CliError::FailureThreshold(e.to_string()),
            SimError::Data(_) => CliError::Validation(e.to_string()),
        }
    }
}

impl From<AsymptoticsError> for CliError {
    fn from(e: AsymptoticsError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Other(e.to_string())
    }
}

fn env_threads() -> Option<usize> {
    std::env::var("CARSURV_THREADS")
        .ok()
        .and_then(|v| v.parse().ok())
        .filter(|&t| t > 0)
}

fn emit(out: &Option<PathBuf>, content: &str) -> Result<(), CliError> {
    match out {
        Some(path) => {
            fs::write(path, content)?;
            eprintln!("wrote {}", path.display());
            Ok(())
        }
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn build_sim_config(common: &SimCommonArgs) -> Result<SimConfig, CliError> {
    let file_config = match &common.config {
        Some(path) => {
            let text = fs::read_to_string(path)?;
            Some(RunConfig::from_toml_str(&text).map_err(|e| CliError::Validation(e.to_string()))?)
        }
        None => None,
    };
    let mut sim = match &file_config {
        Some(rc) => rc
            .to_sim_config()
            .map_err(|e| CliError::Validation(e.to_string()))?,
        None => {
            let case_id = common
                .case
                .case
                .ok_or_else(|| CliError::Validation("--case is required without --config".into()))?;
            let n = common
                .n_or_default()
                .ok_or_else(|| CliError::Validation("--n is required without --config".into()))?;
            let scheme = common
                .scheme
                .apply(None)?
                .ok_or_else(|| CliError::Validation("--scheme is required without --config".into()))?;
            SimConfig::new(CaseSpec::new(case_id, 0.0, n), scheme)
        }
    };
    if file_config.is_some() {
        if let Some(case_id) = common.case.case {
            sim.case.case_id = case_id;
        }
        if let Some(n) = common.case.n {
            sim.case.n = n;
        }
        if let Some(spec) = common.scheme.apply(Some(sim.scheme.clone()))? {
            sim.scheme = spec;
        }
    }
    if let Some(l) = common.case.lambda0 {
        sim.case.lambda0 = l;
    }
    if let Some(k) = common.case.k_levels {
        sim.case.k_levels = k;
    }
    if let Some(s) = common.case.effect_scale {
        sim.case.effect_scale = s;
    }
    if let Some(r) = common.reps {
        sim.replicates = r;
    }
    if let Some(s) = common.seed {
        sim.seed = s;
    }
    if let Some(a) = common.alpha {
        sim.alpha = a;
    }
    if let Some(b) = common.bootstrap {
        sim.bootstrap = Some(b);
    }
    sim.threads = common.threads.or(sim.threads).or_else(env_threads);
    sim.validate()?;
    Ok(sim)
}

impl SimCommonArgs {
    fn n_or_default(&self) -> Option<usize> {
        self.case.n
    }
}

fn cmd_simulate(args: &SimulateArgs) -> Result<(), CliError> {
    let mut sim = build_sim_config(&args.common)?;
    if let Some(theta) = args.theta {
        sim.theta_grid = vec![theta];
    }
    eprintln!(
        "simulate: case {} n {} scheme {} theta {} replicates {}",
        sim.case.case_id,
        sim.case.n,
        sim.scheme.name(),
        sim.theta_grid[0],
        sim.replicates
    );
    let report_data = estimate_rejection(&sim)?;
    if let Some(path) = &args.emit_reports {
        let reports = run_trial(&sim, sim.theta_grid[0], 0)
            .map_err(|f| CliError::Other(f.message))?;
        fs::write(path, report::test_reports_csv(&reports))?;
        eprintln!("wrote {}", path.display());
    }
    if let Some(path) = &args.dump_dataset {
        let trial = first_replicate_dataset(&sim)?;
        let mut buffer = Vec::new();
        trial
            .write_csv(&mut buffer)
            .map_err(|e| CliError::Other(e.to_string()))?;
        fs::write(path, buffer)?;
        eprintln!("wrote {}", path.display());
    }
    for row in &report_data.rows {
        eprintln!(
            "  {:<5} reject {:.2}% (se {:.2}pp, {} failures)",
            row.family.label(),
            100.0 * row.reject_rate,
            100.0 * row.mc_se,
            row.failures
        );
    }
    emit(&args.common.out, &report::sim_report_csv(&report_data))
}

fn first_replicate_dataset(sim: &SimConfig) -> Result<ObservedTrial, CliError> {
    replicate_dataset(sim, sim.theta_grid[0], 0).map_err(|f| CliError::Other(f.message))
}

fn cmd_power(args: &PowerArgs) -> Result<(), CliError> {
    let mut sim = build_sim_config(&args.common)?;
    if let Some(grid) = &args.theta_grid {
        sim.theta_grid = grid.clone();
    }
    eprintln!(
        "power: case {} n {} scheme {} grid {:?} replicates {}",
        sim.case.case_id,
        sim.case.n,
        sim.scheme.name(),
        sim.theta_grid,
        sim.replicates
    );
    let report_data = power_sweep(&sim)?;
    if let Some(path) = &args.svg {
        fs::write(path, report::power_curves_svg(&report_data))?;
        eprintln!("wrote {}", path.display());
    }
    emit(&args.common.out, &report::sim_report_csv(&report_data))
}

fn cmd_asymptotics(args: &AsymptoticsArgs) -> Result<(), CliError> {
    let case_id = args
        .case
        .case
        .ok_or_else(|| CliError::Validation("--case is required".into()))?;
    let mut case = CaseSpec::new(case_id, 0.0, args.mc_size.max(2));
    if let Some(l) = args.case.lambda0 {
        case.lambda0 = l;
    }
    if let Some(k) = args.case.k_levels {
        case.k_levels = k;
    }
    if let Some(s) = args.case.effect_scale {
        case.effect_scale = s;
    }
    let scheme = args
        .scheme
        .apply(None)?
        .ok_or_else(|| CliError::Validation("--scheme is required".into()))?;
    let mode = match args.mode {
        ModeArg::Score => TestMode::Score,
        ModeArg::Logrank => TestMode::LogRank,
    };
    eprintln!(
        "asymptotics: case {case_id} scheme {} mode {} mc size {}",
        scheme.name(),
        mode.name(),
        args.mc_size
    );
    let components = estimate_limit_components(&case, &scheme, args.mc_size, args.seed, mode)?;
    let predicted = predicted_type1(&components, args.alpha).ok();
    let efficacy = if case.true_beta().is_some() && nu_d(&scheme).is_some() {
        Some(pitman_are(&case, &scheme, args.mc_size, args.seed)?)
    } else {
        None
    };
    emit(
        &args.out,
        &report::asymptotics_csv(&components, predicted, efficacy.as_ref()),
    )
}

fn cmd_imbalance(args: &ImbalanceArgs) -> Result<(), CliError> {
    let scheme = args
        .scheme
        .apply(None)?
        .ok_or_else(|| CliError::Validation("--scheme is required".into()))?;
    if args
        .margins
        .iter()
        .any(|p| !(p.is_finite() && *p > 0.0 && *p < 1.0))
    {
        return Err(CliError::Validation(
            "margin probabilities must lie in (0,1)".into(),
        ));
    }
    let law = CovariateLaw::Bernoulli(args.margins.clone());
    if args.single {
        let mut data_rng = derive_rng(args.seed, &[1, carsurv::rng::STREAM_DATA]);
        let assign_rng = derive_rng(args.seed, &[1, carsurv::rng::STREAM_ASSIGN]);
        let mut state = SchemeState::new(scheme, assign_rng)
            .map_err(|e| CliError::Validation(e.to_string()))?;
        let mut pairs = Vec::with_capacity(args.n);
        for _ in 0..args.n {
            let label = law.sample(&mut data_rng);
            let arm = state
                .assign_next(&label)
                .map_err(|e| CliError::Other(e.to_string()))?;
            pairs.push((label, arm));
        }
        let rep = imbalance(pairs.iter().map(|(l, a)| (l.as_slice(), *a)));
        return emit(&args.out, &report::imbalance_report_csv(&rep));
    }
    eprintln!(
        "imbalance: scheme {} margins {:?} n {} replicates {}",
        scheme.name(),
        args.margins,
        args.n,
        args.reps
    );
    let moments = monte_carlo_imbalance(&scheme, &law, args.n, args.reps, args.seed)
        .map_err(|e| CliError::Other(e.to_string()))?;
    emit(&args.out, &report::imbalance_moments_csv(&moments))
}

fn cmd_reproduce(args: &ReproduceArgs) -> Result<(), CliError> {
    if !(args.scale > 0.0 && args.scale <= 1.0) {
        return Err(CliError::Validation(format!(
            "--scale must lie in (0,1], got {}",
            args.scale
        )));
    }
    let threads = args.threads.or_else(env_threads);
    let csv = match args.target {
        ReproduceTarget::Table1 => {
            reference::reproduce_type1_table(&reference::table1(), args, threads)?
        }
        ReproduceTarget::Table2 => {
            reference::reproduce_type1_table(&reference::table2(), args, threads)?
        }
        ReproduceTarget::Imbalance => reference::reproduce_imbalance(args, threads)?,
    };
    emit(&args.out, &csv)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Simulate(args) => cmd_simulate(args),
        Command::Power(args) => cmd_power(args),
        Command::Reproduce(args) => cmd_reproduce(args),
        Command::Asymptotics(args) => cmd_asymptotics(args),
        Command::Imbalance(args) => cmd_imbalance(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            e.exit_code()
        }
    }
}
