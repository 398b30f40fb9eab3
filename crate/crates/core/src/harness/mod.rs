//! Experiment orchestration: config in, snapshots, trajectory logs and
//! reports out.
//!
//! Reports are TOML with a fixed field order and contain no timestamps, so
//! identical inputs give byte-identical files.

pub mod checks;
pub mod config;
pub mod equivariance;

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dense::{assemble_dense, fock_dimension, DEFAULT_DIMENSION_CAP};
use crate::error::{Error, Result};
use crate::fock::FockState;
use crate::hamiltonian::Hamiltonian;
use crate::jump::{run_ensemble, write_log, JumpKind, Trajectory, RNG_NAME};
use crate::propagator::{energy_drift, evolve_with_snapshots, unitarity_audit, EvolutionTimeline};
use crate::snapshot::save_timeline;

use self::checks::{
    dense_timeline, flux_balance_check, generator_identity_check, hermiticity_defect, propagator_vs_dense,
    rate_identity_check, time_reversal_defect, FluxReport, GeneratorReport, PropagatorOracleReport,
    RateIdentityReport,
};
use self::config::ExperimentConfig;
use self::equivariance::{equivariance_report, EquivarianceReport, Thresholds};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_CONFIG_ERROR: i32 = 2;

/// Name of the resolved-config echo in the output directory.
pub const RESOLVED_CONFIG: &str = "config.resolved";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Evolve,
    Trajectories,
    Equivariance,
    Oracle,
    Sweep,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Self::Evolve => "evolve",
            Self::Trajectories => "trajectories",
            Self::Equivariance => "equivariance",
            Self::Oracle => "oracle",
            Self::Sweep => "sweep",
        }
    }
}

impl FromStr for Command {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "evolve" => Self::Evolve,
            "trajectories" => Self::Trajectories,
            "equivariance" => Self::Equivariance,
            "oracle" => Self::Oracle,
            "sweep" => Self::Sweep,
            other => return Err(Error::Config(format!("unknown subcommand {other:?}"))),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub pass: bool,
    pub files: Vec<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolveReport {
    pub snapshots: usize,
    pub final_time: f64,
    pub halvings: u32,
    pub max_step_drift: f64,
    pub cumulative_drift: f64,
    pub energy_drift: f64,
    pub initial_energy: f64,
    pub final_sector_probabilities: Vec<f64>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSummary {
    pub rng: String,
    pub master_seed: u64,
    pub trajectories: usize,
    pub substeps_per_trajectory: u64,
    pub creations: usize,
    pub annihilations: usize,
    pub node_fraction: f64,
    pub max_rate_dt: f64,
    pub final_mean_photons: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoriesReport {
    pub ensemble: EnsembleSummary,
    pub node_fraction_threshold: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivarianceRun {
    pub ensemble: EnsembleSummary,
    pub node_fraction_pass: bool,
    pub statistics: EquivarianceReport,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict<T> {
    pub result: T,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub hermiticity_defect: Verdict<f64>,
    pub rates: Verdict<RateIdentityReport>,
    pub generator: Verdict<GeneratorReport>,
    /// Absent when the dense matrix would exceed the dimension cap.
    pub propagator: Option<Verdict<PropagatorOracleReport>>,
    pub flux: Option<Verdict<FluxReport>>,
    /// Absent for complex form factors, which break time reversal.
    pub time_reversal_defect: Option<Verdict<f64>>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepEntry {
    pub width: f64,
    pub target_mean_photons: f64,
    pub ensemble_mean_photons: f64,
    pub events_per_trajectory: f64,
    /// Fraction of trajectories in which some photon was annihilated.
    pub absorbed_fraction: f64,
    /// Mean time of the first annihilation among those trajectories.
    pub mean_first_absorption: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub trajectories: usize,
    pub entries: Vec<SweepEntry>,
}

fn write_report<T: Serialize>(dir: &Path, name: &str, report: &T) -> Result<PathBuf> {
    let path = dir.join(name);
    let text = toml::to_string_pretty(report).map_err(|e| Error::Format(e.to_string()))?;
    fs::write(&path, text)?;
    Ok(path)
}

struct Prepared {
    hamiltonian: Hamiltonian,
    timeline: EvolutionTimeline,
}

fn prepare(cfg: &ExperimentConfig) -> Result<Prepared> {
    let hamiltonian = cfg.hamiltonian()?;
    let initial = cfg.initial_state(&hamiltonian)?;
    log::info!(
        "evolving {} amplitudes to t = {}",
        initial.dimension(),
        cfg.evolution.total_time
    );
    let timeline = evolve_with_snapshots(&hamiltonian, &initial, cfg.evolution.total_time, cfg.evolution.propagator())?;
    Ok(Prepared { hamiltonian, timeline })
}

fn ensemble(cfg: &ExperimentConfig, p: &Prepared, count: usize) -> Result<Vec<Trajectory>> {
    log::info!("running {count} trajectories");
    run_ensemble(
        &p.hamiltonian,
        &p.timeline,
        cfg.trajectories.seed,
        count,
        cfg.trajectories.settings(),
    )
}

fn mean_photons(state: &FockState) -> Result<f64> {
    Ok(state
        .sector_probabilities()?
        .iter()
        .enumerate()
        .map(|(m, p)| m as f64 * p)
        .sum())
}

pub fn summarize(seed: u64, trajectories: &[Trajectory]) -> EnsembleSummary {
    let mut creations = 0;
    let mut annihilations = 0;
    let mut node_events = 0u64;
    let mut substeps = 0u64;
    let mut max_rate_dt = 0.0f64;
    let mut photons = 0usize;
    for tr in trajectories {
        for e in &tr.events {
            match e.kind {
                JumpKind::Create { .. } => creations += 1,
                JumpKind::Annihilate { .. } => annihilations += 1,
            }
        }
        node_events += tr.metadata.node_events;
        substeps += tr.metadata.substeps;
        max_rate_dt = max_rate_dt.max(tr.metadata.max_rate_dt);
        photons += tr.samples.last().map_or(0, |s| s.config.sector);
    }
    let k = trajectories.len().max(1);
    EnsembleSummary {
        rng: RNG_NAME.to_string(),
        master_seed: seed,
        trajectories: trajectories.len(),
        substeps_per_trajectory: trajectories.first().map_or(0, |t| t.metadata.substeps),
        creations,
        annihilations,
        node_fraction: if substeps > 0 {
            node_events as f64 / substeps as f64
        } else {
            0.0
        },
        max_rate_dt,
        final_mean_photons: photons as f64 / k as f64,
    }
}

fn save_log(dir: &Path, trajectories: &[Trajectory], d: usize) -> Result<PathBuf> {
    let path = dir.join("trajectories.log");
    write_log(BufWriter::new(File::create(&path)?), trajectories, d)?;
    Ok(path)
}

fn evolve(cfg: &ExperimentConfig, out: &Path) -> Result<Outcome> {
    let p = prepare(cfg)?;
    let mut files = Vec::new();
    if cfg.evolution.save_every > 0 {
        let dir = out.join("snapshots");
        fs::create_dir_all(&dir)?;
        files.extend(save_timeline(&dir, &p.timeline, cfg.evolution.save_every)?);
    }
    let audit = unitarity_audit(&p.timeline);
    let last = p.timeline.states.last().unwrap();
    let report = EvolveReport {
        snapshots: p.timeline.len(),
        final_time: p.timeline.final_time(),
        halvings: p.timeline.halvings,
        max_step_drift: audit.max_step_drift,
        cumulative_drift: audit.cumulative_drift,
        energy_drift: energy_drift(&p.hamiltonian, &p.timeline)?,
        initial_energy: p.hamiltonian.energy(&p.timeline.states[0])?,
        final_sector_probabilities: last.sector_probabilities()?,
        pass: audit.cumulative_drift <= cfg.checks.norm_drift,
    };
    files.push(write_report(out, "evolve_report.toml", &report)?);
    Ok(Outcome {
        pass: report.pass,
        files,
    })
}

fn trajectories(cfg: &ExperimentConfig, out: &Path) -> Result<Outcome> {
    let p = prepare(cfg)?;
    let ens = ensemble(cfg, &p, cfg.trajectories.count)?;
    let mut files = Vec::new();
    if cfg.trajectories.write_log {
        files.push(save_log(out, &ens, cfg.grid.dimension)?);
    }
    let summary = summarize(cfg.trajectories.seed, &ens);
    let report = TrajectoriesReport {
        pass: summary.node_fraction <= cfg.checks.node_fraction,
        node_fraction_threshold: cfg.checks.node_fraction,
        ensemble: summary,
    };
    files.push(write_report(out, "trajectories_report.toml", &report)?);
    Ok(Outcome {
        pass: report.pass,
        files,
    })
}

fn equivariance(cfg: &ExperimentConfig, out: &Path) -> Result<Outcome> {
    let p = prepare(cfg)?;
    let ens = ensemble(cfg, &p, cfg.trajectories.count)?;
    let mut files = Vec::new();
    if cfg.trajectories.write_log {
        files.push(save_log(out, &ens, cfg.grid.dimension)?);
    }
    let thresholds = Thresholds {
        sector_tv: cfg.checks.sector_tv,
        marginal_tv: cfg.checks.marginal_tv,
        mean_photon_z: cfg.checks.mean_photon_z,
    };
    let statistics = equivariance_report(&ens, &p.timeline, &cfg.checks.checkpoints, thresholds)?;
    let summary = summarize(cfg.trajectories.seed, &ens);
    let node_fraction_pass = summary.node_fraction <= cfg.checks.node_fraction;
    let report = EquivarianceRun {
        pass: statistics.pass && node_fraction_pass,
        ensemble: summary,
        node_fraction_pass,
        statistics,
    };
    files.push(write_report(out, "equivariance_report.toml", &report)?);
    Ok(Outcome {
        pass: report.pass,
        files,
    })
}

fn verdict<T>(result: T, pass: bool) -> Verdict<T> {
    Verdict { result, pass }
}

/// Runs every oracle cross-check that the configured model admits.
pub fn oracle_report(cfg: &ExperimentConfig) -> Result<OracleReport> {
    let h = cfg.hamiltonian()?;
    let grid = *h.grid();
    let (ne, mp) = (h.electrons(), h.max_photons());
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.trajectories.seed);
    let samples = cfg.checks.oracle_samples;

    let defect = hermiticity_defect(&h, samples.min(20), &mut rng)?;
    let random = FockState::random(grid, ne, mp, &mut rng)?.normalized()?;
    let rates = rate_identity_check(&h, &random, samples, &mut rng)?;
    let rates_pass =
        rates.max_form_mismatch <= 1e-12 && rates.max_alternative_mismatch <= 1e-12 && rates.minimality_violations == 0 && rates.max_homogeneity_error <= 1e-12;

    let smooth = FockState::random_band_limited(grid, ne, mp, (grid.points() / 8).max(1) as i64, 8, &mut rng)?;
    let generator = generator_identity_check(&h, &smooth, samples, &mut rng);

    let horizon = cfg.checks.oracle_time.min(cfg.evolution.total_time.max(cfg.evolution.dt));
    let initial = cfg.initial_state(&h)?;
    let (propagator, flux) = if fock_dimension(&grid, ne, mp) <= 2000 {
        let dense = assemble_dense(&h, DEFAULT_DIMENSION_CAP)?;
        let pr = propagator_vs_dense(&h, &dense, &initial, horizon, cfg.evolution.propagator())?;
        let pr_pass = pr.state_error <= 1e-8 && pr.max_step_drift <= 1e-9 && pr.energy_drift <= 1e-8;
        let tl = dense_timeline(&dense, &initial, horizon, cfg.evolution.dt)?;
        let fl = flux_balance_check(&h, &tl)?;
        let fl_pass = fl.relative_residual() <= 1e-3 && fl.max_total_rate <= 1e-10;
        (Some(verdict(pr, pr_pass)), Some(verdict(fl, fl_pass)))
    } else {
        (None, None)
    };
    let time_reversal = if h.form_factor().is_real() {
        let d = time_reversal_defect(&h, &initial, horizon, cfg.evolution.propagator())?;
        Some(verdict(d, d <= 1e-6))
    } else {
        None
    };
    let mut report = OracleReport {
        hermiticity_defect: verdict(defect, defect <= 1e-12),
        rates: verdict(rates, rates_pass),
        generator: verdict(generator, generator.max_relative_residual <= 1e-6),
        propagator,
        flux,
        time_reversal_defect: time_reversal,
        pass: false,
    };
    report.pass = report.hermiticity_defect.pass
        && report.rates.pass
        && report.generator.pass
        && report.propagator.as_ref().map_or(true, |v| v.pass)
        && report.flux.as_ref().map_or(true, |v| v.pass)
        && report.time_reversal_defect.as_ref().map_or(true, |v| v.pass);
    Ok(report)
}

fn oracle(cfg: &ExperimentConfig, out: &Path) -> Result<Outcome> {
    let report = oracle_report(cfg)?;
    let file = write_report(out, "oracle_report.toml", &report)?;
    Ok(Outcome {
        pass: report.pass,
        files: vec![file],
    })
}

/// Scans the form-factor scale and records photon statistics. Asserts nothing.
fn sweep(cfg: &ExperimentConfig, out: &Path) -> Result<Outcome> {
    let mut entries = Vec::new();
    for &width in &cfg.sweep.widths {
        let mut c = cfg.clone();
        c.model.form_factor.width_or_radius = width;
        c.validate()?;
        let p = prepare(&c)?;
        let ens = ensemble(&c, &p, cfg.sweep.count)?;
        let mut absorbed = 0usize;
        let mut first_sum = 0.0;
        let mut events = 0usize;
        for tr in &ens {
            events += tr.events.len();
            if let Some(e) = tr.events.iter().find(|e| matches!(e.kind, JumpKind::Annihilate { .. })) {
                absorbed += 1;
                first_sum += e.time;
            }
        }
        let k = ens.len() as f64;
        entries.push(SweepEntry {
            width,
            target_mean_photons: mean_photons(p.timeline.states.last().unwrap())?,
            ensemble_mean_photons: summarize(c.trajectories.seed, &ens).final_mean_photons,
            events_per_trajectory: events as f64 / k,
            absorbed_fraction: absorbed as f64 / k,
            mean_first_absorption: (absorbed > 0).then(|| first_sum / absorbed as f64),
        });
    }
    let report = SweepReport {
        trajectories: cfg.sweep.count,
        entries,
    };
    let file = write_report(out, "sweep_report.toml", &report)?;
    Ok(Outcome {
        pass: true,
        files: vec![file],
    })
}

/// Runs one subcommand with an already loaded config. The output directory
/// is `cfg.output.directory`.
pub fn execute(command: Command, cfg: &ExperimentConfig) -> Result<Outcome> {
    let out = cfg.output.directory.clone();
    fs::create_dir_all(&out)?;
    fs::write(out.join(RESOLVED_CONFIG), cfg.to_toml())?;
    let mut outcome = match command {
        Command::Evolve => evolve(cfg, &out)?,
        Command::Trajectories => trajectories(cfg, &out)?,
        Command::Equivariance => equivariance(cfg, &out)?,
        Command::Oracle => oracle(cfg, &out)?,
        Command::Sweep => sweep(cfg, &out)?,
    };
    outcome.files.insert(0, out.join(RESOLVED_CONFIG));
    if !cfg.checks.enabled {
        outcome.pass = true;
    }
    Ok(outcome)
}

/// Loads the config, applies overrides, runs, and maps the result to an exit
/// code: 0 when every check passes, 1 on a failed check, 2 on a bad config.
pub fn run_experiment(command: Command, config_path: &Path, seed: Option<u64>, out: Option<&Path>) -> i32 {
    let mut cfg = match ExperimentConfig::load(config_path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG_ERROR;
        }
    };
    if let Some(s) = seed {
        cfg.trajectories.seed = s;
    }
    if let Some(o) = out {
        cfg.output.directory = o.to_path_buf();
    }
    match execute(command, &cfg) {
        Ok(outcome) => {
            for f in &outcome.files {
                log::info!("wrote {}", f.display());
            }
            if outcome.pass {
                EXIT_PASS
            } else {
                eprintln!("{}: checks failed", command.name());
                EXIT_CHECK_FAILED
            }
        }
        Err(e @ Error::Tolerance { .. }) => {
            eprintln!("error: {e}");
            EXIT_CHECK_FAILED
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_CONFIG_ERROR
        }
    }
}
