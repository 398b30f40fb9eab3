//! Ensemble statistics against `|Psi(t)|^2`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{split_index, Configuration, FockState};
use crate::jump::Trajectory;
use crate::propagator::EvolutionTimeline;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub sector_tv: f64,
    pub marginal_tv: f64,
    pub mean_photon_z: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            sector_tv: 0.03,
            marginal_tv: 0.05,
            mean_photon_z: 3.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointReport {
    pub time: f64,
    pub target_sectors: Vec<f64>,
    pub ensemble_sectors: Vec<f64>,
    pub sector_tv: f64,
    /// Binomial z-score of each sector count.
    pub sector_z: Vec<f64>,
    pub electron_marginal_tv: f64,
    /// Zero when neither the state nor the ensemble holds photons.
    pub photon_marginal_tv: f64,
    pub target_mean_photons: f64,
    pub ensemble_mean_photons: f64,
    pub mean_photon_z: f64,
    pub pass: bool,
}

impl CheckpointReport {
    pub fn marginal_tv(&self) -> f64 {
        self.electron_marginal_tv.max(self.photon_marginal_tv)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivarianceReport {
    pub ensemble_size: usize,
    pub thresholds: Thresholds,
    pub checkpoints: Vec<CheckpointReport>,
    pub pass: bool,
}

/// Per-species position marginals of `|Psi|^2` on the lattice sites,
/// each normalized to unit mass (all particles of a species pooled).
pub fn position_marginals(state: &FockState) -> (Vec<f64>, Vec<f64>) {
    let grid = state.grid();
    let sites = grid.sites();
    let ne = state.electrons();
    let mut electrons = vec![0.0; sites];
    let mut photons = vec![0.0; sites];
    for m in 0..=state.max_photons() {
        let w = state.sector_weight(m);
        let mut digits = vec![0usize; ne + m];
        for (flat, z) in state.sector(m).iter().enumerate() {
            let p = z.norm_sqr() * w;
            if p == 0.0 {
                continue;
            }
            split_index(sites, flat, &mut digits);
            for &s in &digits[..ne] {
                electrons[s] += p;
            }
            for &s in &digits[ne..] {
                photons[s] += p;
            }
        }
    }
    (normalized(electrons), normalized(photons))
}

fn normalized(mut v: Vec<f64>) -> Vec<f64> {
    let total: f64 = v.iter().sum();
    if total > 0.0 {
        v.iter_mut().for_each(|x| *x /= total);
    }
    v
}

/// Total-variation distance between two distributions on the same support.
pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

/// Histograms of configurations: sector frequencies and pooled per-species
/// position histograms with nearest-node binning.
pub fn ensemble_histograms(configs: &[&Configuration], state: &FockState) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let grid = state.grid();
    let d = grid.dimension();
    let mut sectors = vec![0.0; state.max_photons() + 1];
    let mut electrons = vec![0.0; grid.sites()];
    let mut photons = vec![0.0; grid.sites()];
    for q in configs {
        sectors[q.sector.min(state.max_photons())] += 1.0;
        for x in q.electrons.chunks(d) {
            electrons[grid.site_of(x)] += 1.0;
        }
        for y in q.photons.chunks(d) {
            photons[grid.site_of(y)] += 1.0;
        }
    }
    (normalized(sectors), normalized(electrons), normalized(photons))
}

/// Compares configurations drawn by some process against the state they
/// should be distributed by.
pub fn compare_to_state(time: f64, configs: &[&Configuration], state: &FockState, thresholds: &Thresholds) -> Result<CheckpointReport> {
    let k = configs.len();
    if k == 0 {
        return Err(Error::Config("empty ensemble".into()));
    }
    let target_sectors = state.sector_probabilities()?;
    let (ensemble_sectors, e_hist, p_hist) = ensemble_histograms(configs, state);
    let (e_target, p_target) = position_marginals(state);
    let kf = k as f64;
    let sector_z = target_sectors
        .iter()
        .zip(&ensemble_sectors)
        .map(|(&p, &f)| {
            let sd = (p * (1.0 - p) / kf).sqrt();
            if sd > 0.0 {
                (f - p) / sd
            } else if f == p {
                0.0
            } else {
                f64::INFINITY
            }
        })
        .collect();
    let moment = |ps: &[f64], power: i32| -> f64 { ps.iter().enumerate().map(|(m, p)| (m as f64).powi(power) * p).sum() };
    let target_mean = moment(&target_sectors, 1);
    let variance = (moment(&target_sectors, 2) - target_mean * target_mean).max(0.0);
    let ensemble_mean = moment(&ensemble_sectors, 1);
    let se = (variance / kf).sqrt();
    let mean_photon_z = if se > 0.0 {
        (ensemble_mean - target_mean) / se
    } else if ensemble_mean == target_mean {
        0.0
    } else {
        f64::INFINITY
    };
    let sector_tv = total_variation(&target_sectors, &ensemble_sectors);
    let electron_marginal_tv = total_variation(&e_target, &e_hist);
    let photon_marginal_tv = total_variation(&p_target, &p_hist);
    let pass = sector_tv <= thresholds.sector_tv
        && electron_marginal_tv.max(photon_marginal_tv) <= thresholds.marginal_tv
        && mean_photon_z.abs() <= thresholds.mean_photon_z;
    Ok(CheckpointReport {
        time,
        target_sectors,
        ensemble_sectors,
        sector_tv,
        sector_z,
        electron_marginal_tv,
        photon_marginal_tv,
        target_mean_photons: target_mean,
        ensemble_mean_photons: ensemble_mean,
        mean_photon_z,
        pass,
    })
}

/// Ensemble statistics at each checkpoint against the evolved state there.
pub fn equivariance_report(
    ensemble: &[Trajectory],
    timeline: &EvolutionTimeline,
    checkpoints: &[f64],
    thresholds: Thresholds,
) -> Result<EquivarianceReport> {
    if ensemble.is_empty() {
        return Err(Error::Config("empty ensemble".into()));
    }
    let mut reports = Vec::with_capacity(checkpoints.len());
    for &t in checkpoints {
        let n = timeline.index_of(t);
        if (timeline.time(n) - t).abs() > 1e-9 * t.max(1.0) {
            return Err(Error::Config(format!("checkpoint {t} is not a snapshot time")));
        }
        let configs = ensemble
            .iter()
            .map(|tr| {
                tr.sample_at(t)
                    .map(|s| &s.config)
                    .ok_or_else(|| Error::Config(format!("checkpoint {t} was not recorded")))
            })
            .collect::<Result<Vec<_>>>()?;
        reports.push(compare_to_state(t, &configs, &timeline.states[n], &thresholds)?);
    }
    Ok(EquivarianceReport {
        ensemble_size: ensemble.len(),
        thresholds,
        pass: reports.iter().all(|r| r.pass),
        checkpoints: reports,
    })
}
