//! Deterministic cross-checks of the operator, the propagator and the rates.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dense::DenseOperator;
use crate::error::Result;
use crate::fock::{Configuration, ConfigurationSampler, FockState};
use crate::guidance::{Guide, MasterEquation};
use crate::hamiltonian::Hamiltonian;
use crate::propagator::{energy_drift, evolve_with_snapshots, unitarity_audit, EvolutionTimeline, PropagatorConfig};

/// Largest `|<a, H b> - <H a, b>| / (|a| |b|)` over random pairs.
pub fn hermiticity_defect<R: Rng + ?Sized>(h: &Hamiltonian, pairs: usize, rng: &mut R) -> Result<f64> {
    let mut worst = 0.0f64;
    for _ in 0..pairs {
        let a = FockState::random(*h.grid(), h.electrons(), h.max_photons(), rng)?;
        let b = FockState::random(*h.grid(), h.electrons(), h.max_photons(), rng)?;
        let lhs = a.inner(&h.apply(&b))?;
        let rhs = h.apply(&a).inner(&b)?;
        worst = worst.max((lhs - rhs).norm() / (a.norm() * b.norm()));
    }
    Ok(worst)
}

/// Exact propagation at the snapshot times of `dt`, from the dense spectrum.
pub fn dense_timeline(dense: &DenseOperator, initial: &FockState, total_time: f64, dt: f64) -> Result<EvolutionTimeline> {
    let spectrum = dense.spectrum();
    let count = crate::propagator::snapshot_count(total_time, dt);
    let states = (0..count)
        .map(|n| dense.evolve(&spectrum, initial, n as f64 * dt))
        .collect::<Result<Vec<_>>>()?;
    Ok(EvolutionTimeline { dt, states, halvings: 0 })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PropagatorOracleReport {
    /// `|Psi_krylov(T) - Psi_dense(T)|`.
    pub state_error: f64,
    pub max_step_drift: f64,
    pub energy_drift: f64,
}

pub fn propagator_vs_dense(
    h: &Hamiltonian,
    dense: &DenseOperator,
    initial: &FockState,
    total_time: f64,
    config: PropagatorConfig,
) -> Result<PropagatorOracleReport> {
    let timeline = evolve_with_snapshots(h, initial, total_time, config)?;
    let exact = dense.evolve(&dense.spectrum(), initial, timeline.final_time())?;
    let last = timeline.states.last().expect("timeline is never empty");
    Ok(PropagatorOracleReport {
        state_error: last.distance(&exact)?,
        max_step_drift: unitarity_audit(&timeline).max_step_drift,
        energy_drift: energy_drift(h, &timeline)?,
    })
}

/// `conj . U(T) . conj . U(T)` applied to `initial`; returns the distance
/// from `initial`. Vanishes for a real Hamiltonian.
pub fn time_reversal_defect(h: &Hamiltonian, initial: &FockState, total_time: f64, config: PropagatorConfig) -> Result<f64> {
    let forward = evolve_with_snapshots(h, initial, total_time, config)?;
    let back = evolve_with_snapshots(h, &forward.states.last().unwrap().conj(), total_time, config)?;
    back.states.last().unwrap().conj().distance(initial)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateIdentityReport {
    pub transitions: usize,
    /// Largest relative gap between the direct rates and the general form.
    pub max_form_mismatch: f64,
    /// Largest relative gap between the general form and the reversed-kernel form.
    pub max_alternative_mismatch: f64,
    /// Number of pairs where both directions had a positive rate.
    pub minimality_violations: usize,
    /// Largest relative change of velocities and rates under `Psi -> c Psi`.
    pub max_homogeneity_error: f64,
}

fn rel(a: f64, b: f64) -> f64 {
    let s = a.abs().max(b.abs());
    if s == 0.0 {
        0.0
    } else {
        (a - b).abs() / s
    }
}

fn random_configuration<R: Rng + ?Sized>(h: &Hamiltonian, sector: usize, rng: &mut R) -> Configuration {
    let l = h.grid().length();
    let d = h.grid().dimension();
    let mut draw = |n: usize| (0..n * d).map(|_| rng.gen::<f64>() * l).collect::<Vec<_>>();
    let electrons = draw(h.electrons());
    let photons = draw(sector);
    Configuration {
        sector,
        electrons,
        photons,
    }
}

/// Compares the closed-form annihilation and creation rates with the general
/// minimal-rate formula and its reversed-kernel rewriting at random
/// transitions `q' <-> q' + y`.
pub fn rate_identity_check<R: Rng + ?Sized>(h: &Hamiltonian, psi: &FockState, transitions: usize, rng: &mut R) -> Result<RateIdentityReport> {
    let guide = Guide::new(psi, h);
    let scale = Complex64::from_polar(2.7, 0.3);
    let scaled = psi.scaled(scale);
    let guide_scaled = Guide::new(&scaled, h);
    let d = h.grid().dimension();
    let mut report = RateIdentityReport {
        transitions,
        max_form_mismatch: 0.0,
        max_alternative_mismatch: 0.0,
        minimality_violations: 0,
        max_homogeneity_error: 0.0,
    };
    if h.max_photons() == 0 {
        return Ok(report);
    }
    for _ in 0..transitions {
        let m = rng.gen_range(1..=h.max_photons());
        let lower = random_configuration(h, m - 1, rng);
        let y: Vec<f64> = (0..d).map(|_| rng.gen::<f64>() * h.grid().length()).collect();
        let upper = lower.with_photon(&y);

        let annihilation = guide.annihilation_rates(&upper).0[m - 1];
        let creation = guide.creation_density_at(&lower, &y);
        let ann_general = guide.general_rate(&lower, &upper)?;
        let cre_general = guide.general_rate(&upper, &lower)?;
        let ann_alt = guide.alternative_rate(&lower, &upper)?;
        let cre_alt = guide.alternative_rate(&upper, &lower)?;
        report.max_form_mismatch = report
            .max_form_mismatch
            .max(rel(annihilation, ann_general))
            .max(rel(creation, cre_general));
        report.max_alternative_mismatch = report
            .max_alternative_mismatch
            .max(rel(ann_general, ann_alt))
            .max(rel(cre_general, cre_alt));
        if annihilation * creation != 0.0 || ann_general * cre_general != 0.0 {
            report.minimality_violations += 1;
        }

        let mut homogeneity = 0.0f64;
        for q in [&lower, &upper] {
            let (a, b) = (guide.velocities(q), guide_scaled.velocities(q));
            for (x, z) in a.electrons.iter().chain(&a.photons).zip(b.electrons.iter().chain(&b.photons)) {
                homogeneity = homogeneity.max(rel(*x, *z));
            }
            let (ra, rb) = (guide.annihilation_rates(q).0, guide_scaled.annihilation_rates(q).0);
            for (x, z) in ra.iter().zip(&rb) {
                homogeneity = homogeneity.max(rel(*x, *z));
            }
        }
        homogeneity = homogeneity.max(rel(creation, guide_scaled.creation_density_at(&lower, &y)));
        report.max_homogeneity_error = report.max_homogeneity_error.max(homogeneity);
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneratorReport {
    pub samples: usize,
    /// Residual relative to the largest term at the same configuration.
    pub max_relative_residual: f64,
    pub median_relative_residual: f64,
    pub max_abs_time_derivative: f64,
    pub max_abs_right_side: f64,
}

/// Evaluates both sides of the master equation at lattice configurations
/// drawn uniformly among those with `|Psi| >= 1e-3 max |Psi|`.
pub fn generator_identity_check<R: Rng + ?Sized>(h: &Hamiltonian, psi: &FockState, samples: usize, rng: &mut R) -> GeneratorReport {
    let me = MasterEquation::new(psi, h);
    let peak = psi
        .sectors()
        .iter()
        .flat_map(|s| s.iter().map(|z| z.norm()))
        .fold(0.0, f64::max);
    let eligible: Vec<(usize, usize)> = psi
        .sectors()
        .iter()
        .enumerate()
        .flat_map(|(m, s)| {
            s.iter()
                .enumerate()
                .filter(move |(_, z)| z.norm() >= 1e-3 * peak)
                .map(move |(f, _)| (m, f))
        })
        .collect();
    let mut residuals = Vec::with_capacity(samples);
    let mut report = GeneratorReport {
        samples: 0,
        max_relative_residual: 0.0,
        median_relative_residual: 0.0,
        max_abs_time_derivative: 0.0,
        max_abs_right_side: 0.0,
    };
    if eligible.is_empty() {
        return report;
    }
    for _ in 0..samples {
        let (m, f) = eligible[rng.gen_range(0..eligible.len())];
        let t = me.terms(m, f);
        let scale = t.scale();
        residuals.push(if scale > 0.0 { t.residual().abs() / scale } else { 0.0 });
        report.max_abs_time_derivative = report.max_abs_time_derivative.max(t.time_derivative.abs());
        report.max_abs_right_side = report.max_abs_right_side.max((t.drift + t.gain - t.loss).abs());
    }
    residuals.sort_by(f64::total_cmp);
    report.samples = residuals.len();
    report.max_relative_residual = *residuals.last().unwrap();
    report.median_relative_residual = residuals[residuals.len() / 2];
    report
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FluxReport {
    /// Largest `|sum_m dP(m)/dt|` over interior snapshots.
    pub max_total_rate: f64,
    /// Largest net flux between adjacent sectors.
    pub max_flux: f64,
    /// Largest `|dP(m)/dt - (net flux into m)|` over sectors and snapshots.
    pub max_balance_residual: f64,
    /// Largest `|dP(m)/dt|`.
    pub max_sector_rate: f64,
}

impl FluxReport {
    pub fn relative_residual(&self) -> f64 {
        if self.max_flux > 0.0 {
            self.max_balance_residual / self.max_flux
        } else {
            self.max_balance_residual
        }
    }
}

/// Net probability current from sector `m` to `m + 1`, for every `m`, by
/// lattice quadrature of the rate expressions.
pub fn sector_fluxes(h: &Hamiltonian, psi: &FockState) -> Vec<f64> {
    let me = MasterEquation::new(psi, h);
    let mp = psi.max_photons();
    let mut up = vec![0.0; mp + 1];
    let mut down = vec![0.0; mp + 1];
    for m in 0..=mp {
        let w = psi.sector_weight(m);
        for f in 0..psi.sector(m).len() {
            let x = me.exchange(m, f);
            up[m] += w * x.creation_loss;
            down[m] += w * x.annihilation_loss;
        }
    }
    (0..mp).map(|m| up[m] - down[m + 1]).collect()
}

/// Central differences of the sector probabilities along the timeline
/// against the jump fluxes at the same snapshot.
pub fn flux_balance_check(h: &Hamiltonian, timeline: &EvolutionTimeline) -> Result<FluxReport> {
    let probs = timeline
        .states
        .iter()
        .map(FockState::sector_norms_sqr)
        .collect::<Vec<_>>();
    let mut report = FluxReport {
        max_total_rate: 0.0,
        max_flux: 0.0,
        max_balance_residual: 0.0,
        max_sector_rate: 0.0,
    };
    let dt = timeline.dt;
    for n in 1..timeline.len().saturating_sub(1) {
        let flux = sector_fluxes(h, &timeline.states[n]);
        let mp = probs[n].len() - 1;
        let mut total = 0.0;
        for m in 0..=mp {
            let rate = (probs[n + 1][m] - probs[n - 1][m]) / (2.0 * dt);
            total += rate;
            let inflow = if m > 0 { flux[m - 1] } else { 0.0 } - if m < mp { flux[m] } else { 0.0 };
            report.max_balance_residual = report.max_balance_residual.max((rate - inflow).abs());
            report.max_sector_rate = report.max_sector_rate.max(rate.abs());
        }
        report.max_total_rate = report.max_total_rate.max(total.abs());
        report.max_flux = flux.iter().fold(report.max_flux, |a, f| a.max(f.abs()));
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StaticsReport {
    pub samples: usize,
    pub max_speed: f64,
    pub max_rate: f64,
}

/// Largest velocity component and jump rate at configurations drawn from
/// `|Psi|^2`.
pub fn statics_check<R: Rng + ?Sized>(h: &Hamiltonian, psi: &FockState, samples: usize, rng: &mut R) -> Result<StaticsReport> {
    let guide = Guide::new(psi, h);
    let sampler = ConfigurationSampler::new(psi)?;
    let mut report = StaticsReport {
        samples,
        max_speed: 0.0,
        max_rate: 0.0,
    };
    for _ in 0..samples {
        let q = sampler.sample(rng);
        report.max_speed = report.max_speed.max(guide.velocities(&q).max_speed_component());
        report.max_rate = report.max_rate.max(guide.rates(&q).max_rate());
    }
    Ok(report)
}

/// Largest creation density at lattice sites farther than the form-factor
/// support from every electron.
pub fn creation_outside_support(h: &Hamiltonian, psi: &FockState, q: &Configuration) -> f64 {
    let guide = Guide::new(psi, h);
    let grid = h.grid();
    let d = grid.dimension();
    let radius = h.form_factor().support_radius();
    let (density, _) = guide.creation_rate_field(q);
    density
        .iter()
        .enumerate()
        .filter(|(s, _)| {
            let y = grid.site_position(*s);
            (0..q.electron_count(d)).all(|i| grid.distance(q.electron(i, d), &y) > radius)
        })
        .fold(0.0, |a, (_, &c)| a.max(c))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::{assemble_dense, DEFAULT_DIMENSION_CAP};
    use crate::form_factor::{FormFactor, FormFactorKind};
    use crate::grid::GridSpec;
    use crate::hamiltonian::PhysicalParams;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn model(points: usize, mmax: usize, coupling: f64) -> Hamiltonian {
        let grid = GridSpec::new(1, 10.0, points).unwrap();
        let ff = FormFactor::new(FormFactorKind::Gaussian { width: 0.5 }, &grid).unwrap();
        let params = PhysicalParams {
            coupling,
            ..Default::default()
        };
        Hamiltonian::new(grid, 1, mmax, params, ff).unwrap()
    }

    #[test]
    fn fluxes_vanish_without_coupling() {
        let h = model(8, 1, 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let psi = FockState::random(*h.grid(), 1, 1, &mut rng).unwrap().normalized().unwrap();
        let cfg = PropagatorConfig {
            dt: 0.01,
            ..Default::default()
        };
        let tl = evolve_with_snapshots(&h, &psi, 0.1, cfg).unwrap();
        let r = flux_balance_check(&h, &tl).unwrap();
        assert!(r.max_sector_rate <= 1e-10 && r.max_flux == 0.0, "{r:?}");
    }

    #[test]
    fn flux_matches_probability_change() {
        let h = model(8, 2, 1.5);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let psi = FockState::random(*h.grid(), 1, 2, &mut rng).unwrap().normalized().unwrap();
        let dense = assemble_dense(&h, DEFAULT_DIMENSION_CAP).unwrap();
        let tl = dense_timeline(&dense, &psi, 0.05, 0.002).unwrap();
        let r = flux_balance_check(&h, &tl).unwrap();
        assert!(r.max_total_rate <= 1e-10, "{r:?}");
        assert!(r.relative_residual() <= 1e-3, "{r:?}");
    }

    #[test]
    fn rate_forms_agree() {
        let h = model(16, 2, 0.8);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let psi = FockState::random(*h.grid(), 1, 2, &mut rng).unwrap();
        let r = rate_identity_check(&h, &psi, 50, &mut rng).unwrap();
        assert!(r.max_form_mismatch <= 1e-12, "{r:?}");
        assert!(r.max_alternative_mismatch <= 1e-12, "{r:?}");
        assert_eq!(r.minimality_violations, 0);
        assert!(r.max_homogeneity_error <= 1e-12, "{r:?}");
    }

    #[test]
    fn hermitian_and_reversible() {
        let h = model(8, 1, 0.9);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        assert!(hermiticity_defect(&h, 10, &mut rng).unwrap() <= 1e-12);
        let psi = FockState::random(*h.grid(), 1, 1, &mut rng).unwrap().normalized().unwrap();
        let cfg = PropagatorConfig::default();
        assert!(time_reversal_defect(&h, &psi, 0.3, cfg).unwrap() <= 1e-6);
    }
}
