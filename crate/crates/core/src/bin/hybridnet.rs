//! Experiment runner: reads a JSON config, runs one estimator or figure sweep, and writes a
//! CSV plus a manifest that is enough to re-run it.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use hybridnet::analytic::mu_tilde;
use hybridnet::experiments::{
    db_to_linear, feasibility_rows, fig3_rows, fig4_rows, fig5_rows, fig6_rows, mpt_power_rows, outage_rows,
    plot_script, power_outage_rows, resolve_mu, to_csv, Grid, PlotKind,
};
use hybridnet::feasibility::{MuSource, Network, Noise, RegionConfig, Storage};
use hybridnet::montecarlo::{worker_count_from_env, OutageStatistic, TrialPlan, DEFAULT_MU_TRIALS, DEFAULT_TRIALS};
use hybridnet::propagation::{DeploymentParams, MptMode, SystemParams};
use hybridnet::spatial::DEFAULT_TRUNCATION_FACTOR;

const EXIT_USAGE: u8 = 2;
const EXIT_UNREADABLE: u8 = 3;
const EXIT_INVALID: u8 = 4;
const EXIT_UNWRITABLE: u8 = 5;
const EXIT_SIMULATION: u8 = 6;

#[derive(Parser, Debug)]
#[command(
    name = "hybridnet",
    version,
    about = "Simulate cellular uplinks powered by wireless power beacons"
)]
struct Cli {
    /// JSON experiment config; unknown keys are rejected.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed (overrides the config).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Monte Carlo trials per estimate (overrides the config).
    #[arg(long, global = true)]
    trials: Option<u64>,
    /// Output directory (overrides the config).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Also write a gnuplot script next to the CSV.
    #[arg(long, global = true)]
    emit_plot: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// SINR outage probability over a sweep of BS densities.
    Outage,
    /// Outage target versus threshold, epsilon(mu).
    MuCurve,
    /// Mean harvested power, closed form against simulation.
    MptPower,
    /// Probability that harvested power falls below a threshold.
    PowerOutage,
    /// Boundary of one feasibility region.
    Feasibility,
    /// Regenerate one of the evaluation figures.
    Reproduce {
        #[arg(value_enum)]
        figure: Figure,
    },
    /// Write a gnuplot script for an existing CSV.
    PlotScript {
        #[arg(value_enum)]
        kind: ScriptKind,
        csv: PathBuf,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Figure {
    Fig3,
    Fig4,
    Fig5,
    Fig6,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum ScriptKind {
    Fig3,
    Fig4,
    Fig5,
    Fig6,
    Outage,
}

impl From<ScriptKind> for PlotKind {
    fn from(k: ScriptKind) -> Self {
        match k {
            ScriptKind::Fig3 => PlotKind::Fig3,
            ScriptKind::Fig4 => PlotKind::Fig4,
            ScriptKind::Fig5 => PlotKind::Fig5,
            ScriptKind::Fig6 => PlotKind::Fig6,
            ScriptKind::Outage => PlotKind::Outage,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum Experiment {
    Outage,
    MuCurve,
    MptPower,
    PowerOutage,
    Feasibility,
    Fig3,
    Fig4,
    Fig5,
    Fig6,
}

impl Experiment {
    fn name(self) -> &'static str {
        match self {
            Experiment::Outage => "outage",
            Experiment::MuCurve => "mu-curve",
            Experiment::MptPower => "mpt-power",
            Experiment::PowerOutage => "power-outage",
            Experiment::Feasibility => "feasibility",
            Experiment::Fig3 => "fig3",
            Experiment::Fig4 => "fig4",
            Experiment::Fig5 => "fig5",
            Experiment::Fig6 => "fig6",
        }
    }

    fn default_trials(self) -> u64 {
        match self {
            Experiment::Fig3 | Experiment::MuCurve => DEFAULT_MU_TRIALS,
            Experiment::Fig6 | Experiment::Feasibility => 10_000,
            _ => DEFAULT_TRIALS,
        }
    }

    fn plot_kind(self) -> Option<PlotKind> {
        match self {
            Experiment::Fig3 | Experiment::MuCurve => Some(PlotKind::Fig3),
            Experiment::Fig4 => Some(PlotKind::Fig4),
            Experiment::Fig5 => Some(PlotKind::Fig5),
            Experiment::Fig6 => Some(PlotKind::Fig6),
            Experiment::Outage => Some(PlotKind::Outage),
            _ => None,
        }
    }
}

/// Model constants as written in a config. Powers are in dB.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct SystemConfig {
    alpha: f64,
    beta: f64,
    nu: f64,
    theta: f64,
    sigma2: f64,
    omega: f64,
    z_m: f64,
    z_s: f64,
    k: usize,
    epsilon: f64,
    eta: f64,
    delta: f64,
    p_b_db: f64,
    p_t_db: f64,
}

impl Default for SystemConfig {
    fn default() -> Self {
        let s = SystemParams::default();
        SystemConfig {
            alpha: s.alpha,
            beta: s.beta,
            nu: s.nu,
            theta: s.theta,
            sigma2: s.sigma2,
            omega: s.omega,
            z_m: s.z_m,
            z_s: s.z_s,
            k: s.k,
            epsilon: s.epsilon,
            eta: s.eta,
            delta: s.delta,
            p_b_db: 10.0 * s.p_b.log10(),
            p_t_db: 10.0 * s.p_t.log10(),
        }
    }
}

impl SystemConfig {
    fn resolve(&self) -> SystemParams {
        SystemParams {
            alpha: self.alpha,
            beta: self.beta,
            nu: self.nu,
            theta: self.theta,
            sigma2: self.sigma2,
            omega: self.omega,
            z_m: self.z_m,
            z_s: self.z_s,
            k: self.k,
            epsilon: self.epsilon,
            eta: self.eta,
            delta: self.delta,
            p_b: db_to_linear(self.p_b_db),
            p_t: db_to_linear(self.p_t_db),
        }
    }
}

/// Deployment point. Powers may be given in dB or, to allow zero, linearly.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct DeploymentConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    p_db: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    p: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    q_db: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    q: Option<f64>,
    lambda_b: f64,
    lambda_p: f64,
}

impl Default for DeploymentConfig {
    fn default() -> Self {
        DeploymentConfig {
            p_db: None,
            p: None,
            q_db: None,
            q: None,
            lambda_b: 1.0,
            lambda_p: 1.0,
        }
    }
}

fn pick_power(name: &str, db: Option<f64>, linear: Option<f64>, default_db: f64) -> Result<f64, Failure> {
    match (db, linear) {
        (Some(_), Some(_)) => Err(Failure::Invalid(format!("give either {name}_db or {name}, not both"))),
        (Some(db), None) => Ok(db_to_linear(db)),
        (None, Some(v)) => Ok(v),
        (None, None) => Ok(db_to_linear(default_db)),
    }
}

impl DeploymentConfig {
    fn resolve(&self) -> Result<DeploymentParams, Failure> {
        let d = DeploymentParams::new(
            pick_power("p", self.p_db, self.p, 0.0)?,
            pick_power("q", self.q_db, self.q, 17.0)?,
            self.lambda_b,
            self.lambda_p,
        );
        d.validate().map_err(|e| Failure::Invalid(e.to_string()))?;
        Ok(d)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RegionSpec {
    network: Network,
    #[serde(default = "nonzero")]
    noise: Noise,
    #[serde(default)]
    mpt: Option<MptMode>,
    #[serde(default)]
    storage: Option<Storage>,
}

fn nonzero() -> Noise {
    Noise::Nonzero
}

impl Default for RegionSpec {
    fn default() -> Self {
        RegionSpec {
            network: Network::Cellular,
            noise: Noise::Nonzero,
            mpt: None,
            storage: None,
        }
    }
}

impl RegionSpec {
    fn resolve(&self) -> Result<RegionConfig, Failure> {
        let config = match (self.network, self.mpt, self.storage) {
            (Network::Cellular, None, None) => RegionConfig::cellular(self.noise),
            (Network::Hybrid, Some(m), Some(s)) => RegionConfig::hybrid(self.noise, m, s),
            _ => {
                return Err(Failure::Invalid(
                    "cellular regions take no mpt/storage; hybrid regions need both".into(),
                ))
            }
        };
        config.validate().map_err(|e| Failure::Invalid(e.to_string()))?;
        Ok(config)
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    experiment: Option<Experiment>,
    #[serde(default)]
    seed: Option<u64>,
    #[serde(default)]
    trials: Option<u64>,
    /// Trials for estimating `mu` when `mu` is not fixed.
    #[serde(default)]
    mu_trials: Option<u64>,
    #[serde(default)]
    truncation_factor: Option<f64>,
    #[serde(default)]
    output: Option<PathBuf>,
    /// Fixed outage threshold; estimated at `system.epsilon` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    mu: Option<f64>,
    #[serde(default)]
    system: SystemConfig,
    #[serde(default)]
    deployment: DeploymentConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lambda_b: Option<Grid>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lambda_p: Option<Grid>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    mu_grid: Option<Grid>,
    /// Power-outage threshold; defaults to `system.p_t_db`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    threshold_db: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    region: Option<RegionSpec>,
    /// Add the simulated boundary to a hybrid feasibility run.
    #[serde(default)]
    simulate: bool,
}

#[derive(Debug)]
enum Failure {
    Unreadable(String),
    Invalid(String),
    Unwritable(String),
    Simulation(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Unreadable(_) => EXIT_UNREADABLE,
            Failure::Invalid(_) => EXIT_INVALID,
            Failure::Unwritable(_) => EXIT_UNWRITABLE,
            Failure::Simulation(_) => EXIT_SIMULATION,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Unreadable(m) | Failure::Invalid(m) | Failure::Unwritable(m) | Failure::Simulation(m) => m,
        }
    }
}

impl From<hybridnet::Error> for Failure {
    fn from(e: hybridnet::Error) -> Self {
        use hybridnet::Error as E;
        match e {
            E::InvalidParameter(_)
            | E::Domain(_)
            | E::BoundInapplicable(_)
            | E::InfeasibleEpsilon { .. }
            | E::DivergentIntegral(_) => Failure::Invalid(e.to_string()),
            _ => Failure::Simulation(e.to_string()),
        }
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    experiment: &'a str,
    csv: String,
    seed: u64,
    trials: u64,
    truncation_factor: f64,
    /// Resolved config; feeding it back through `--config` repeats the run.
    config: &'a ExperimentConfig,
    /// Linear model constants actually used.
    system: SystemParams,
    #[serde(skip_serializing_if = "Option::is_none")]
    mu: Option<f64>,
    threads: usize,
    version: &'static str,
    argv: Vec<String>,
    wall_time_s: f64,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("hybridnet: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

fn load_config(path: Option<&Path>) -> Result<ExperimentConfig, Failure> {
    let Some(path) = path else {
        return Ok(ExperimentConfig::default());
    };
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::Unreadable(format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Invalid(format!("config {}: {e}", path.display())))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    fs::write(path, bytes).map_err(|e| Failure::Unwritable(format!("cannot write {}: {e}", path.display())))
}

fn run(cli: Cli) -> Result<(), Failure> {
    if let Command::PlotScript { kind, csv } = &cli.command {
        if !csv.is_file() {
            return Err(Failure::Unreadable(format!("no CSV at {}", csv.display())));
        }
        let script = plot_script((*kind).into(), csv)?;
        let dest = csv.with_extension("gp");
        write_file(&dest, script.as_bytes())?;
        eprintln!("wrote {}", dest.display());
        return Ok(());
    }

    let experiment = match cli.command {
        Command::Outage => Experiment::Outage,
        Command::MuCurve => Experiment::MuCurve,
        Command::MptPower => Experiment::MptPower,
        Command::PowerOutage => Experiment::PowerOutage,
        Command::Feasibility => Experiment::Feasibility,
        Command::Reproduce { figure: Figure::Fig3 } => Experiment::Fig3,
        Command::Reproduce { figure: Figure::Fig4 } => Experiment::Fig4,
        Command::Reproduce { figure: Figure::Fig5 } => Experiment::Fig5,
        Command::Reproduce { figure: Figure::Fig6 } => Experiment::Fig6,
        Command::PlotScript { .. } => unreachable!("handled above"),
    };

    let mut config = load_config(cli.config.as_deref())?;
    if let Some(e) = config.experiment {
        if e != experiment {
            return Err(Failure::Invalid(format!(
                "config is for '{}' but the command runs '{}'",
                e.name(),
                experiment.name()
            )));
        }
    }
    config.experiment = Some(experiment);
    if let Some(seed) = cli.seed {
        config.seed = Some(seed);
    }
    if let Some(trials) = cli.trials {
        config.trials = Some(trials);
    }
    if let Some(out) = cli.out {
        config.output = Some(out);
    }
    let seed = config
        .seed
        .ok_or_else(|| Failure::Invalid("a seed is required (config 'seed' or --seed)".into()))?;
    let trials = *config.trials.get_or_insert(experiment.default_trials());
    let mu_trials = *config.mu_trials.get_or_insert(DEFAULT_MU_TRIALS);
    let tf = *config.truncation_factor.get_or_insert(DEFAULT_TRUNCATION_FACTOR);
    let out_dir = config.output.clone().unwrap_or_else(|| PathBuf::from("."));

    let system = config.system.resolve();
    system.validate()?;
    let deployment = config.deployment.resolve()?;

    let threads = match worker_count_from_env() {
        Some(n) => {
            // Fails only if a pool already exists, which cannot happen this early.
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            n
        }
        None => rayon::current_num_threads(),
    };

    let plan = TrialPlan::new(trials, seed).with_truncation_factor(tf);
    // The threshold estimate draws from its own seed so it is independent of the sweep.
    let mu_plan = TrialPlan::new(mu_trials, seed.wrapping_add(0x9E37_79B9_7F4A_7C15)).with_truncation_factor(tf);
    let grid =
        |g: &Option<Grid>, default: Grid| -> Result<Vec<f64>, Failure> { Ok(g.clone().unwrap_or(default).values()?) };

    let started = Instant::now();
    let mut mu_used = None;
    eprintln!(
        "running {} (seed {seed}, {trials} trials, {threads} threads)",
        experiment.name()
    );
    let csv = match experiment {
        Experiment::Fig3 | Experiment::MuCurve => {
            let mus = grid(&config.mu_grid, Grid::linear(0.0, 20.0, 81))?;
            let stat = OutageStatistic::sample(&system, &plan)?;
            match stat.mu_for(system.epsilon) {
                Ok(m) => {
                    eprintln!(
                        "mu at epsilon {}: {:.4} (95% CI {:.4}..{:.4})",
                        system.epsilon, m.mu, m.ci.0, m.ci.1
                    );
                    mu_used = Some(m.mu);
                }
                Err(e) => eprintln!("no mu at epsilon {}: {e}", system.epsilon),
            }
            eprintln!("interference-limited floor: {:.4}", stat.floor().value);
            to_csv(&fig3_rows(&stat, &mus))
        }
        Experiment::Fig4 => {
            let lbs = grid(&config.lambda_b, Grid::log(0.01, 10.0, 31))?;
            let mu = resolve_mu(&system, config.mu, &mu_plan)?;
            mu_used = Some(mu);
            to_csv(&fig4_rows(&system, mu, &lbs)?)
        }
        Experiment::Fig5 => {
            let lps = grid(
                &config.lambda_p,
                Grid::Values((0..11).map(|k| 0.01 * f64::from(1u32 << k)).collect()),
            )?;
            to_csv(&fig5_rows(&system, deployment.q, &lps, &plan)?)
        }
        Experiment::Fig6 => {
            let lbs = grid(&config.lambda_b, Grid::log(0.02, 2.0, 11))?;
            let mu = resolve_mu(&system, config.mu, &mu_plan)?;
            mu_used = Some(mu);
            to_csv(&fig6_rows(&system, mu, deployment.q, &lbs, &plan)?)
        }
        Experiment::Outage => {
            let lbs = grid(&config.lambda_b, Grid::Values(vec![deployment.lambda_b]))?;
            let points: Vec<DeploymentParams> = lbs
                .iter()
                .map(|&lambda_b| DeploymentParams { lambda_b, ..deployment })
                .collect();
            to_csv(&outage_rows(&system, &points, &plan)?)
        }
        Experiment::MptPower => {
            let lps = grid(&config.lambda_p, Grid::log(0.01, 10.0, 7))?;
            to_csv(&mpt_power_rows(&system, deployment.q, &lps, &plan)?)
        }
        Experiment::PowerOutage => {
            let lps = grid(&config.lambda_p, Grid::log(0.01, 10.0, 7))?;
            let threshold = config.threshold_db.map(db_to_linear).unwrap_or(system.p_t);
            to_csv(&power_outage_rows(&system, deployment.q, threshold, &lps, &plan)?)
        }
        Experiment::Feasibility => {
            let region = config.region.clone().unwrap_or_default().resolve()?;
            let lbs = grid(&config.lambda_b, Grid::log(0.01, 10.0, 13))?;
            let mu = match region.mu_source {
                MuSource::MuTilde => mu_tilde(system.p_b, system.eta, system.alpha)?,
                MuSource::MonteCarlo => resolve_mu(&system, config.mu, &mu_plan)?,
            };
            mu_used = Some(mu);
            let sim = config.simulate.then_some(&plan);
            to_csv(&feasibility_rows(&region, &system, mu, deployment.q, &lbs, sim)?)
        }
    }
    .map_err(|e| Failure::Simulation(format!("CSV encoding failed: {e}")))?;
    let wall = started.elapsed().as_secs_f64();

    fs::create_dir_all(&out_dir)
        .map_err(|e| Failure::Unwritable(format!("cannot create {}: {e}", out_dir.display())))?;
    let csv_path = out_dir.join(format!("{}.csv", experiment.name()));
    write_file(&csv_path, &csv)?;

    let manifest = Manifest {
        experiment: experiment.name(),
        csv: csv_path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default(),
        seed,
        trials,
        truncation_factor: tf,
        config: &config,
        system,
        mu: mu_used,
        threads,
        version: env!("CARGO_PKG_VERSION"),
        argv: std::env::args().collect(),
        wall_time_s: wall,
    };
    let manifest_path = out_dir.join(format!("{}.manifest.json", experiment.name()));
    let json = serde_json::to_vec_pretty(&manifest).map_err(|e| Failure::Simulation(e.to_string()))?;
    write_file(&manifest_path, &json)?;

    if cli.emit_plot {
        match experiment.plot_kind() {
            Some(kind) => {
                let script = plot_script(kind, &csv_path)?;
                write_file(&csv_path.with_extension("gp"), script.as_bytes())?;
            }
            None => eprintln!("no plot script is defined for {}", experiment.name()),
        }
    }
    eprintln!("wrote {} in {wall:.1} s", csv_path.display());
    Ok(())
}
