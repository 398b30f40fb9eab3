//! Experiment configuration files.
//!
//! Units: hbar = 1 by default, lengths in the box units, times in `hbar`
//! over energy units. Every field has a default, so a partial file is valid;
//! the fully resolved config is echoed next to the outputs.

use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dense::{assemble_dense, DEFAULT_DIMENSION_CAP};
use crate::error::{Error, Result};
use crate::fock::FockState;
use crate::form_factor::{FormFactor, FormFactorKind};
use crate::grid::GridSpec;
use crate::hamiltonian::{harmonic_potential, Hamiltonian, PhysicalParams};
use crate::jump::TrajectorySettings;
use crate::propagator::PropagatorConfig;
use crate::snapshot::load_snapshot;

const HEADER: &str = "# Resolved experiment configuration. Units: hbar = 1 unless `model.hbar` says\n\
# otherwise; lengths in box units, energies in hbar^2 / (m L0^2), times in hbar / energy.\n\n";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    pub dimension: usize,
    pub length: f64,
    pub points: usize,
}

impl Default for GridSection {
    fn default() -> Self {
        Self {
            dimension: 1,
            length: 10.0,
            points: 32,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FormFactorShape {
    Gaussian,
    Bump,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FormFactorSpec {
    pub kind: FormFactorShape,
    pub width_or_radius: f64,
}

impl FormFactorSpec {
    pub fn kind(&self) -> FormFactorKind {
        match self.kind {
            FormFactorShape::Gaussian => FormFactorKind::Gaussian {
                width: self.width_or_radius,
            },
            FormFactorShape::Bump => FormFactorKind::Bump {
                radius: self.width_or_radius,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialSpec {
    None,
    Harmonic { omega: f64 },
    /// Whitespace-separated values, one per lattice site in row-major order.
    Tabulated { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSection {
    pub electrons: usize,
    pub max_photons: usize,
    pub coupling: f64,
    pub hbar: f64,
    pub mass_electron: f64,
    pub mass_photon: f64,
    pub photon_rest_energy: f64,
    pub form_factor: FormFactorSpec,
    pub potential: PotentialSpec,
}

impl Default for ModelSection {
    fn default() -> Self {
        Self {
            electrons: 1,
            max_photons: 2,
            coupling: 2.0,
            hbar: 1.0,
            mass_electron: 1.0,
            mass_photon: 1.0,
            photon_rest_energy: 0.0,
            form_factor: FormFactorSpec {
                kind: FormFactorShape::Gaussian,
                width_or_radius: 0.5,
            },
            potential: PotentialSpec::None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialSpec {
    /// Gaussian packets, one per particle, symmetrized and normalized.
    /// `centers` lists electrons first, then photons, `d` numbers each.
    Packet {
        sector: usize,
        centers: Vec<f64>,
        width: f64,
        momentum: Vec<f64>,
    },
    /// Lowest eigenstate of the dense Hamiltonian.
    GroundState,
    Snapshot { path: PathBuf },
}

impl Default for InitialSpec {
    fn default() -> Self {
        Self::Packet {
            sector: 0,
            centers: vec![5.0],
            width: 0.7,
            momentum: vec![1.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvolutionSection {
    pub dt: f64,
    pub total_time: f64,
    pub krylov_dim: usize,
    pub norm_tolerance: f64,
    pub error_tolerance: f64,
    pub max_halvings: u32,
    /// Write every n-th snapshot; 0 writes none.
    pub save_every: usize,
}

impl Default for EvolutionSection {
    fn default() -> Self {
        let p = PropagatorConfig::default();
        Self {
            dt: 0.005,
            total_time: 2.0,
            krylov_dim: p.krylov_dim,
            norm_tolerance: p.norm_tolerance,
            error_tolerance: p.error_tolerance,
            max_halvings: p.max_halvings,
            save_every: 0,
        }
    }
}

impl EvolutionSection {
    pub fn propagator(&self) -> PropagatorConfig {
        PropagatorConfig {
            dt: self.dt,
            krylov_dim: self.krylov_dim,
            norm_tolerance: self.norm_tolerance,
            error_tolerance: self.error_tolerance,
            max_halvings: self.max_halvings,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrajectorySection {
    pub count: usize,
    pub dt_traj: f64,
    pub record_every: usize,
    pub seed: u64,
    /// Write the full trajectory log.
    pub write_log: bool,
}

impl Default for TrajectorySection {
    fn default() -> Self {
        Self {
            count: 10_000,
            dt_traj: 0.005,
            record_every: 20,
            seed: 1,
            write_log: true,
        }
    }
}

impl TrajectorySection {
    pub fn settings(&self) -> TrajectorySettings {
        TrajectorySettings {
            dt_traj: self.dt_traj,
            record_every: self.record_every,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChecksSection {
    /// When false, reports are still written but never fail the run.
    pub enabled: bool,
    pub checkpoints: Vec<f64>,
    pub sector_tv: f64,
    pub marginal_tv: f64,
    pub mean_photon_z: f64,
    pub node_fraction: f64,
    pub norm_drift: f64,
    /// Random states and configurations used by the oracle suite.
    pub oracle_samples: usize,
    /// Horizon of the oracle-suite propagations.
    pub oracle_time: f64,
}

impl Default for ChecksSection {
    fn default() -> Self {
        Self {
            enabled: true,
            checkpoints: vec![0.5, 1.0, 2.0],
            sector_tv: 0.03,
            marginal_tv: 0.05,
            mean_photon_z: 3.0,
            node_fraction: 1e-4,
            norm_drift: 1e-8,
            oracle_samples: 100,
            oracle_time: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    /// Form-factor widths (or bump radii) to scan.
    pub widths: Vec<f64>,
    pub count: usize,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            widths: vec![1.0, 0.7, 0.5, 0.35],
            count: 2000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub directory: PathBuf,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            directory: PathBuf::from("out"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub grid: GridSection,
    pub model: ModelSection,
    pub initial: InitialSpec,
    pub evolution: EvolutionSection,
    pub trajectories: TrajectorySection,
    pub checks: ChecksSection,
    pub sweep: SweepSection,
    pub output: OutputSection,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::from_toml(&text)?;
        cfg.resolve_paths(path.parent().unwrap_or(Path::new(".")));
        Ok(cfg)
    }

    /// Makes file references relative to the config file absolute.
    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let PotentialSpec::Tabulated { path } = &mut self.model.potential {
            fix(path);
        }
        if let InitialSpec::Snapshot { path } = &mut self.initial {
            fix(path);
        }
    }

    /// The resolved config with a units header; parses back to `self`.
    pub fn to_toml(&self) -> String {
        let body = toml::to_string_pretty(self).expect("config is always serializable");
        format!("{HEADER}{body}")
    }

    pub fn validate(&self) -> Result<()> {
        let grid = self.grid_spec()?;
        FormFactor::new(self.model.form_factor.kind(), &grid)?;
        self.evolution.propagator().validate()?;
        if !(self.evolution.total_time >= 0.0) {
            return Err(Error::Config("evolution.total_time must be non-negative".into()));
        }
        if self.model.electrons == 0 {
            return Err(Error::Config("model.electrons must be at least 1".into()));
        }
        self.trajectories.settings().substeps(self.evolution.dt)?;
        if self.trajectories.count == 0 {
            return Err(Error::Config("trajectories.count must be at least 1".into()));
        }
        if let InitialSpec::Packet {
            sector,
            centers,
            width,
            momentum,
        } = &self.initial
        {
            let d = grid.dimension();
            if *sector > self.model.max_photons {
                return Err(Error::Config(format!("initial sector {sector} exceeds max_photons")));
            }
            if centers.len() != (self.model.electrons + sector) * d {
                return Err(Error::Config(format!(
                    "initial.centers needs {} numbers",
                    (self.model.electrons + sector) * d
                )));
            }
            if momentum.len() != d || !(*width > 0.0) {
                return Err(Error::Config("initial packet needs a positive width and a d-vector momentum".into()));
            }
        }
        for t in &self.checks.checkpoints {
            if !(*t >= 0.0 && *t <= self.evolution.total_time + 1e-12) {
                return Err(Error::Config(format!("checkpoint {t} outside [0, total_time]")));
            }
        }
        Ok(())
    }

    pub fn grid_spec(&self) -> Result<GridSpec> {
        GridSpec::new(self.grid.dimension, self.grid.length, self.grid.points)
    }

    pub fn params(&self) -> Result<PhysicalParams> {
        let grid = self.grid_spec()?;
        let m = &self.model;
        let potential = match &m.potential {
            PotentialSpec::None => None,
            PotentialSpec::Harmonic { omega } => Some(harmonic_potential(&grid, m.mass_electron, *omega)),
            PotentialSpec::Tabulated { path } => {
                let text = fs::read_to_string(path)
                    .map_err(|e| Error::Config(format!("cannot read potential {}: {e}", path.display())))?;
                let values = text
                    .split_whitespace()
                    .map(|t| t.parse::<f64>().map_err(|e| Error::Config(format!("potential entry {t:?}: {e}"))))
                    .collect::<Result<Vec<_>>>()?;
                Some(values)
            }
        };
        Ok(PhysicalParams {
            hbar: m.hbar,
            mass_electron: m.mass_electron,
            mass_photon: m.mass_photon,
            coupling: m.coupling,
            potential,
            photon_rest_energy: m.photon_rest_energy,
        })
    }

    pub fn hamiltonian(&self) -> Result<Hamiltonian> {
        let grid = self.grid_spec()?;
        let ff = FormFactor::new(self.model.form_factor.kind(), &grid)?;
        Hamiltonian::new(grid, self.model.electrons, self.model.max_photons, self.params()?, ff)
    }

    pub fn initial_state(&self, hamiltonian: &Hamiltonian) -> Result<FockState> {
        let grid = *hamiltonian.grid();
        match &self.initial {
            InitialSpec::Packet {
                sector,
                centers,
                width,
                momentum,
            } => {
                let d = grid.dimension();
                let mut psi = FockState::from_fn(grid, self.model.electrons, self.model.max_photons, |m, x| {
                    if m != *sector {
                        return Complex64::default();
                    }
                    let mut r2 = 0.0;
                    let mut phase = 0.0;
                    for (p, xs) in x.chunks(d).enumerate() {
                        for a in 0..d {
                            let dx = grid.displacement(centers[p * d + a], xs[a]);
                            r2 += dx * dx;
                            phase += momentum[a] * dx;
                        }
                    }
                    Complex64::from_polar((-r2 / (4.0 * width * width)).exp(), phase / self.model.hbar)
                })?;
                psi.enforce_symmetry();
                psi.normalized()
                    .map_err(|_| Error::Config("initial packet vanishes after symmetrization".into()))
            }
            InitialSpec::GroundState => {
                let dense = assemble_dense(hamiltonian, DEFAULT_DIMENSION_CAP)?;
                Ok(dense.ground_state()?.state)
            }
            InitialSpec::Snapshot { path } => {
                let (psi, _) = load_snapshot(path)?;
                if psi.grid() != hamiltonian.grid()
                    || psi.electrons() != hamiltonian.electrons()
                    || psi.max_photons() != hamiltonian.max_photons()
                {
                    return Err(Error::Config(format!("snapshot {} does not match the model", path.display())));
                }
                psi.normalized()
            }
        }
    }
}
