//! Piecewise-deterministic trajectories: Bohmian drift between random
//! creation and annihilation events.
//!
//! Each trajectory substep first decides on a jump (probability
//! `1 - exp(-lambda dt)` against the rates at the current configuration) and
//! then drifts with RK4. The wavefunction is frozen at the snapshot that opens
//! each wavefunction step.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fock::{Configuration, ConfigurationSampler};
use crate::grid::GridSpec;
use crate::guidance::{Guide, JumpRates};
use crate::hamiltonian::Hamiltonian;
use crate::propagator::EvolutionTimeline;

/// Generator used for every trajectory stream; recorded in logs.
pub const RNG_NAME: &str = "ChaCha8Rng/rand_chacha-0.3";

/// Above this jump probability per substep a warning is logged.
pub const JUMP_PROBABILITY_WARNING: f64 = 0.1;

/// Seed of trajectory `index` in an ensemble with `master` seed
/// (SplitMix64 finalizer over the pair).
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectorySettings {
    pub dt_traj: f64,
    /// Record a sample every this many substeps.
    pub record_every: usize,
}

impl TrajectorySettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt_traj > 0.0) || !self.dt_traj.is_finite() {
            return Err(Error::Config(format!("dt_traj must be positive, got {}", self.dt_traj)));
        }
        if self.record_every == 0 {
            return Err(Error::Config("record_every must be at least 1".into()));
        }
        Ok(())
    }

    /// Substeps per wavefunction step; `dt_traj` must divide `dt`.
    pub fn substeps(&self, dt: f64) -> Result<usize> {
        self.validate()?;
        let n = (dt / self.dt_traj).round();
        if n < 1.0 || (n * self.dt_traj - dt).abs() > 1e-9 * dt {
            return Err(Error::Config(format!(
                "dt_traj = {} does not divide the snapshot spacing {dt}",
                self.dt_traj
            )));
        }
        Ok(n as usize)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum JumpKind {
    Create { position: Vec<f64> },
    Annihilate { photon: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct JumpEvent {
    pub time: f64,
    pub kind: JumpKind,
    pub sector_before: usize,
    pub sector_after: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub time: f64,
    pub config: Configuration,
    /// The node guard fired during the substep ending here.
    pub node: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryMetadata {
    pub rng: &'static str,
    pub dt_traj: f64,
    pub record_every: usize,
    pub substeps: u64,
    pub node_events: u64,
    /// Largest `lambda * dt_traj` met along the way.
    pub max_rate_dt: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub index: u64,
    pub seed: u64,
    pub samples: Vec<Sample>,
    pub events: Vec<JumpEvent>,
    pub metadata: TrajectoryMetadata,
}

impl Trajectory {
    /// Sample recorded at time `t` (within half a substep).
    pub fn sample_at(&self, t: f64) -> Option<&Sample> {
        let tol = 0.5 * self.metadata.dt_traj;
        self.samples.iter().find(|s| (s.time - t).abs() <= tol)
    }
}

/// Live state of one trajectory.
#[derive(Debug, Clone)]
pub struct TrajectoryState {
    pub time: f64,
    pub config: Configuration,
    pub rng: ChaCha8Rng,
    pub node_events: u64,
}

impl TrajectoryState {
    pub fn new(config: Configuration, seed: u64) -> Self {
        Self {
            time: 0.0,
            config,
            rng: ChaCha8Rng::seed_from_u64(seed),
            node_events: 0,
        }
    }
}

fn flat_velocity(guide: &Guide<'_>, q: &Configuration, node: &mut bool) -> Vec<f64> {
    let v = guide.velocities(q);
    *node |= v.node;
    let mut out = v.electrons;
    out.extend(v.photons);
    out
}

fn shifted(grid: &GridSpec, q: &Configuration, v: &[f64], s: f64) -> Configuration {
    let mut p = q.clone();
    for (x, vk) in p.electrons.iter_mut().chain(p.photons.iter_mut()).zip(v) {
        *x = grid.wrap(*x + s * vk);
    }
    p
}

/// One classical RK4 step of the guidance flow; returns the new
/// configuration and whether the node guard fired.
pub fn drift_substep(guide: &Guide<'_>, q: &Configuration, dt: f64) -> (Configuration, bool) {
    let grid = *guide.evaluator().grid();
    let mut node = false;
    let k1 = flat_velocity(guide, q, &mut node);
    let k2 = flat_velocity(guide, &shifted(&grid, q, &k1, 0.5 * dt), &mut node);
    let k3 = flat_velocity(guide, &shifted(&grid, q, &k2, 0.5 * dt), &mut node);
    let k4 = flat_velocity(guide, &shifted(&grid, q, &k3, dt), &mut node);
    let v: Vec<f64> = (0..k1.len())
        .map(|k| (k1[k] + 2.0 * k2[k] + 2.0 * k3[k] + k4[k]) / 6.0)
        .collect();
    (shifted(&grid, q, &v, dt), node)
}

/// Draws the outcome of one thinning trial from precomputed rates.
pub fn choose_jump<R: Rng + ?Sized>(rates: &JumpRates, grid: &GridSpec, dt: f64, rng: &mut R) -> Option<JumpKind> {
    let lambda = rates.total();
    let u: f64 = rng.gen();
    if !(lambda > 0.0) || u >= -(-lambda * dt).exp_m1() {
        return None;
    }
    let pick = rng.gen::<f64>() * lambda;
    if pick < rates.total_annihilation {
        let mut acc = 0.0;
        for (j, s) in rates.annihilation.iter().enumerate() {
            acc += s;
            if pick < acc {
                return Some(JumpKind::Annihilate { photon: j });
            }
        }
        // rounding in the running sum: last photon with a nonzero rate
        let j = rates.annihilation.iter().rposition(|&s| s > 0.0).unwrap_or(0);
        return Some(JumpKind::Annihilate { photon: j });
    }
    let cdf = &rates.creation_cumulative;
    let target = (pick - rates.total_annihilation).min(rates.total_creation);
    let mut site = cdf.partition_point(|&c| c <= target).min(cdf.len() - 1);
    while rates.creation_density[site] == 0.0 && site > 0 {
        site -= 1;
    }
    let h = grid.spacing();
    let position = grid
        .site_position(site)
        .into_iter()
        .map(|x| grid.wrap(x + (rng.gen::<f64>() - 0.5) * h))
        .collect();
    Some(JumpKind::Create { position })
}

/// Jump trial at the current configuration; applies the event if one occurs.
pub fn jump_decision(state: &mut TrajectoryState, guide: &Guide<'_>, dt: f64) -> (Option<JumpEvent>, f64) {
    let rates = guide.rates(&state.config);
    if rates.node {
        state.node_events += 1;
    }
    let rate_dt = rates.total() * dt;
    let grid = guide.evaluator().grid();
    let d = grid.dimension();
    let kind = choose_jump(&rates, grid, dt, &mut state.rng);
    let event = kind.map(|kind| {
        let before = state.config.sector;
        state.config = match &kind {
            JumpKind::Annihilate { photon } => state.config.without_photon(*photon, d),
            JumpKind::Create { position } => state.config.with_photon(position),
        };
        JumpEvent {
            time: state.time,
            kind,
            sector_before: before,
            sector_after: state.config.sector,
        }
    });
    (event, rate_dt)
}

struct Runner {
    state: TrajectoryState,
    trajectory: Trajectory,
    step_count: u64,
}

impl Runner {
    fn substep(&mut self, guide: &Guide<'_>, dt: f64, record_every: usize) {
        let (event, rate_dt) = jump_decision(&mut self.state, guide, dt);
        let meta = &mut self.trajectory.metadata;
        meta.max_rate_dt = meta.max_rate_dt.max(rate_dt);
        if let Some(e) = event {
            self.trajectory.events.push(e);
        }
        let (q, node) = drift_substep(guide, &self.state.config, dt);
        if node {
            self.state.node_events += 1;
        }
        self.state.config = q;
        self.step_count += 1;
        self.state.time = self.step_count as f64 * dt;
        if self.step_count % record_every as u64 == 0 {
            self.trajectory.samples.push(Sample {
                time: self.state.time,
                config: self.state.config.clone(),
                node,
            });
        }
    }

    fn finish(mut self) -> Trajectory {
        let meta = &mut self.trajectory.metadata;
        meta.substeps = self.step_count;
        meta.node_events = self.state.node_events;
        if meta.max_rate_dt > JUMP_PROBABILITY_WARNING {
            log::warn!(
                "trajectory {}: lambda * dt_traj reached {:.3}; reduce dt_traj",
                self.trajectory.index,
                meta.max_rate_dt
            );
        }
        self.trajectory
    }
}

fn simulate(
    hamiltonian: &Hamiltonian,
    timeline: &EvolutionTimeline,
    streams: Vec<(u64, u64, Option<Configuration>)>,
    settings: TrajectorySettings,
) -> Result<Vec<Trajectory>> {
    let n = settings.substeps(timeline.dt)?;
    let first = timeline
        .states
        .first()
        .ok_or_else(|| Error::Config("empty timeline".into()))?;
    if first.electrons() != hamiltonian.electrons() || first.max_photons() != hamiltonian.max_photons() {
        return Err(Error::Shape("timeline does not match the Hamiltonian".into()));
    }
    let sampler = ConfigurationSampler::new(first)?;
    let mut runners: Vec<Runner> = streams
        .into_iter()
        .map(|(index, seed, initial)| {
            let mut state = TrajectoryState::new(Configuration::new(vec![], vec![], 1), seed);
            state.config = initial.unwrap_or_else(|| sampler.sample(&mut state.rng));
            let trajectory = Trajectory {
                index,
                seed,
                samples: vec![Sample {
                    time: 0.0,
                    config: state.config.clone(),
                    node: false,
                }],
                events: Vec::new(),
                metadata: TrajectoryMetadata {
                    rng: RNG_NAME,
                    dt_traj: settings.dt_traj,
                    record_every: settings.record_every,
                    substeps: 0,
                    node_events: 0,
                    max_rate_dt: 0.0,
                },
            };
            Runner {
                state,
                trajectory,
                step_count: 0,
            }
        })
        .collect();
    for psi in &timeline.states[..timeline.len() - 1] {
        let guide = Guide::new(psi, hamiltonian);
        runners.par_iter_mut().for_each(|r| {
            for _ in 0..n {
                r.substep(&guide, settings.dt_traj, settings.record_every);
            }
        });
    }
    Ok(runners.into_iter().map(Runner::finish).collect())
}

/// One trajectory through the whole timeline. The initial configuration is
/// drawn from `|Psi(0)|^2` with the trajectory's own stream unless given.
pub fn run_trajectory(
    hamiltonian: &Hamiltonian,
    timeline: &EvolutionTimeline,
    seed: u64,
    settings: TrajectorySettings,
    initial: Option<Configuration>,
) -> Result<Trajectory> {
    let mut out = simulate(hamiltonian, timeline, vec![(0, seed, initial)], settings)?;
    Ok(out.pop().expect("one trajectory"))
}

/// `count` independent trajectories; trajectory `i` uses `derive_seed(master_seed, i)`.
pub fn run_ensemble(
    hamiltonian: &Hamiltonian,
    timeline: &EvolutionTimeline,
    master_seed: u64,
    count: usize,
    settings: TrajectorySettings,
) -> Result<Vec<Trajectory>> {
    if count == 0 {
        return Err(Error::Config("ensemble size must be at least 1".into()));
    }
    let streams = (0..count as u64)
        .map(|i| (i, derive_seed(master_seed, i), None))
        .collect();
    simulate(hamiltonian, timeline, streams, settings)
}

fn write_coords<W: Write>(w: &mut W, xs: &[f64]) -> std::io::Result<()> {
    for x in xs {
        write!(w, " {x:.16e}")?;
    }
    Ok(())
}

/// Writes trajectories in the line-oriented log format:
///
/// ```text
/// T <index> <seed>
/// S <t> <m> <node 0|1> <electron coords...> <photon coords...>
/// E <t> create <y coords...>
/// E <t> annihilate <photon index>
/// ```
///
/// Floats carry 17 significant digits. Records of one trajectory are in time
/// order; an event shares its time with the sample that precedes it.
pub fn write_log<W: Write>(mut w: W, trajectories: &[Trajectory], dimension: usize) -> Result<()> {
    writeln!(w, "# bohmian-fock trajectory log v1")?;
    writeln!(w, "# rng {RNG_NAME}")?;
    writeln!(w, "# dimension {dimension}")?;
    for tr in trajectories {
        writeln!(
            w,
            "T {} {} dt_traj={:.16e} substeps={} node_events={}",
            tr.index, tr.seed, tr.metadata.dt_traj, tr.metadata.substeps, tr.metadata.node_events
        )?;
        let mut events = tr.events.iter().peekable();
        for s in &tr.samples {
            while let Some(e) = events.next_if(|e| e.time < s.time) {
                write_event(&mut w, e)?;
            }
            write!(w, "S {:.16e} {} {}", s.time, s.config.sector, s.node as u8)?;
            write_coords(&mut w, &s.config.electrons)?;
            write_coords(&mut w, &s.config.photons)?;
            writeln!(w)?;
        }
        for e in events {
            write_event(&mut w, e)?;
        }
    }
    Ok(())
}

fn write_event<W: Write>(w: &mut W, e: &JumpEvent) -> Result<()> {
    match &e.kind {
        JumpKind::Create { position } => {
            write!(w, "E {:.16e} create", e.time)?;
            write_coords(w, position)?;
            writeln!(w)?;
        }
        JumpKind::Annihilate { photon } => writeln!(w, "E {:.16e} annihilate {photon}", e.time)?,
    }
    Ok(())
}
