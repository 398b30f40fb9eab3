//! Krylov-subspace propagation of `i hbar dPsi/dt = H Psi`.
//!
//! Each step builds an orthonormal Krylov basis of `H` (Lanczos with full
//! reorthogonalization in the quadrature inner product) and exponentiates the
//! small projected matrix exactly.

use log::debug;
use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::FockState;
use crate::hamiltonian::Hamiltonian;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PropagatorConfig {
    pub dt: f64,
    pub krylov_dim: usize,
    /// Allowed `| ||Psi'|| - ||Psi|| |` per step.
    pub norm_tolerance: f64,
    /// Allowed a-posteriori Krylov truncation error per step.
    pub error_tolerance: f64,
    pub max_halvings: u32,
}

impl Default for PropagatorConfig {
    fn default() -> Self {
        Self {
            dt: 0.01,
            krylov_dim: 12,
            norm_tolerance: 1e-9,
            error_tolerance: 1e-11,
            max_halvings: 10,
        }
    }
}

impl PropagatorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) {
            return Err(Error::Config(format!("time step must be positive, got {}", self.dt)));
        }
        if self.krylov_dim < 2 {
            return Err(Error::Config("Krylov dimension must be at least 2".into()));
        }
        Ok(())
    }
}

struct KrylovResult {
    state: FockState,
    error_estimate: f64,
}

fn krylov_exponential(h: &Hamiltonian, psi: &FockState, tau: f64, dim: usize) -> KrylovResult {
    let beta = psi.norm();
    if beta == 0.0 {
        return KrylovResult {
            state: psi.clone(),
            error_estimate: 0.0,
        };
    }
    let mut basis = vec![psi.scaled(Complex64::new(1.0 / beta, 0.0))];
    let mut proj = DMatrix::<Complex64>::zeros(dim + 1, dim);
    let mut size = dim;
    let mut residual = 0.0;
    for j in 0..dim {
        let mut w = h.apply(&basis[j]);
        for _pass in 0..2 {
            for (i, v) in basis.iter().enumerate() {
                let c = v.inner_unchecked(&w);
                proj[(i, j)] += c;
                w.axpy(-c, v);
            }
        }
        let next = w.norm();
        proj[(j + 1, j)] = Complex64::new(next, 0.0);
        // happy breakdown: the Krylov space is invariant
        let scale = proj[(j, j)].norm().max(1.0);
        if next <= 1e-13 * scale {
            size = j + 1;
            residual = 0.0;
            break;
        }
        residual = next;
        if j + 1 < dim {
            basis.push(w.scaled(Complex64::new(1.0 / next, 0.0)));
        }
    }
    let small = proj.view((0, 0), (size, size)).into_owned();
    let herm = (&small + small.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(herm);
    let hbar = h.params().hbar;
    // y = U exp(-i Lambda tau / hbar) U^dagger e_1, and the last component
    // of phi_1(-i T tau / hbar) e_1 for the truncation estimate
    let mut y = vec![Complex64::default(); size];
    let mut phi1_last = Complex64::default();
    for k in 0..size {
        let z = Complex64::new(0.0, -eig.eigenvalues[k] * tau / hbar);
        let phase = z.exp();
        let phi1 = if z.norm() < 1e-8 { Complex64::new(1.0, 0.0) + z * 0.5 } else { (phase - 1.0) / z };
        let c = eig.eigenvectors[(0, k)].conj();
        for (i, yi) in y.iter_mut().enumerate() {
            *yi += eig.eigenvectors[(i, k)] * c * phase;
        }
        phi1_last += eig.eigenvectors[(size - 1, k)] * c * phi1;
    }
    let mut out = FockState::zeros(*psi.grid(), psi.electrons(), psi.max_photons()).expect("valid shape");
    for (v, c) in basis.iter().zip(&y) {
        out.axpy(c * beta, v);
    }
    KrylovResult {
        state: out,
        error_estimate: beta * residual * (tau / hbar) * phi1_last.norm(),
    }
}

#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub state: FockState,
    /// How many times the step was halved before all substeps passed.
    pub halvings: u32,
}

#[derive(Debug, Clone)]
pub struct Propagator<'a> {
    hamiltonian: &'a Hamiltonian,
    config: PropagatorConfig,
}

impl<'a> Propagator<'a> {
    pub fn new(hamiltonian: &'a Hamiltonian, config: PropagatorConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self { hamiltonian, config })
    }

    pub fn config(&self) -> &PropagatorConfig {
        &self.config
    }

    /// Advances `psi` by `dt`, halving the internal step until every substep
    /// meets the norm and truncation tolerances.
    pub fn step_by(&self, psi: &FockState, dt: f64) -> Result<StepOutcome> {
        let cfg = &self.config;
        let mut worst = (0.0, 0.0);
        for level in 0..=cfg.max_halvings {
            let n = 1usize << level;
            let sub = dt / n as f64;
            let mut state = psi.clone();
            let mut ok = true;
            for _ in 0..n {
                let before = state.norm();
                let r = krylov_exponential(self.hamiltonian, &state, sub, cfg.krylov_dim);
                let drift = (r.state.norm() - before).abs();
                if drift > cfg.norm_tolerance || r.error_estimate > cfg.error_tolerance {
                    worst = (drift, r.error_estimate);
                    ok = false;
                    break;
                }
                state = r.state;
            }
            if ok {
                if level > 0 {
                    debug!("Krylov step of {dt:e} split into {n} substeps");
                }
                return Ok(StepOutcome { state, halvings: level });
            }
        }
        Err(Error::Tolerance {
            halvings: cfg.max_halvings,
            dt: dt / (1u64 << cfg.max_halvings) as f64,
            drift: worst.0,
            estimate: worst.1,
        })
    }

    pub fn step(&self, psi: &FockState) -> Result<StepOutcome> {
        self.step_by(psi, self.config.dt)
    }
}

/// States at uniformly spaced times `t_n = n * dt`.
#[derive(Debug, Clone)]
pub struct EvolutionTimeline {
    pub dt: f64,
    pub states: Vec<FockState>,
    pub halvings: u32,
}

impl EvolutionTimeline {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn time(&self, n: usize) -> f64 {
        n as f64 * self.dt
    }

    pub fn final_time(&self) -> f64 {
        self.time(self.states.len().saturating_sub(1))
    }

    /// Index of the snapshot closest to `t`.
    pub fn index_of(&self, t: f64) -> usize {
        ((t / self.dt).round() as usize).min(self.states.len() - 1)
    }
}

/// Number of snapshots covering `[0, T]` with spacing `dt`.
pub fn snapshot_count(total_time: f64, dt: f64) -> usize {
    (total_time / dt + 1e-9).floor() as usize + 1
}

pub fn evolve_with_snapshots(
    hamiltonian: &Hamiltonian,
    initial: &FockState,
    total_time: f64,
    config: PropagatorConfig,
) -> Result<EvolutionTimeline> {
    if !(total_time >= 0.0) {
        return Err(Error::Config(format!("total time must be non-negative, got {total_time}")));
    }
    let prop = Propagator::new(hamiltonian, config)?;
    let count = snapshot_count(total_time, config.dt);
    let mut states = Vec::with_capacity(count);
    states.push(initial.clone());
    let mut halvings = 0;
    for _ in 1..count {
        let out = prop.step(states.last().unwrap())?;
        halvings += out.halvings;
        states.push(out.state);
    }
    Ok(EvolutionTimeline {
        dt: config.dt,
        states,
        halvings,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitarityReport {
    pub max_step_drift: f64,
    pub cumulative_drift: f64,
}

pub fn unitarity_audit(timeline: &EvolutionTimeline) -> UnitarityReport {
    let norms: Vec<f64> = timeline.states.iter().map(FockState::norm).collect();
    let max_step_drift = norms.windows(2).map(|w| (w[1] - w[0]).abs()).fold(0.0, f64::max);
    let cumulative_drift = norms.last().map_or(0.0, |n| (n - 1.0).abs());
    UnitarityReport {
        max_step_drift,
        cumulative_drift,
    }
}

/// Largest relative deviation of `<H>` from its initial value.
pub fn energy_drift(hamiltonian: &Hamiltonian, timeline: &EvolutionTimeline) -> Result<f64> {
    let energies = timeline
        .states
        .iter()
        .map(|s| hamiltonian.energy(s))
        .collect::<Result<Vec<_>>>()?;
    let e0 = energies[0];
    let scale = e0.abs().max(f64::MIN_POSITIVE);
    Ok(energies.iter().map(|e| (e - e0).abs() / scale).fold(0.0, f64::max))
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

    fn model() -> Hamiltonian {
        let grid = GridSpec::new(1, 10.0, 8).unwrap();
        let ff = FormFactor::new(FormFactorKind::Gaussian { width: 0.5 }, &grid).unwrap();
        let params = PhysicalParams {
            coupling: 0.7,
            ..Default::default()
        };
        Hamiltonian::new(grid, 1, 1, params, ff).unwrap()
    }

    #[test]
    fn single_step_preserves_norm() {
        let h = model();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let psi = FockState::random(*h.grid(), 1, 1, &mut rng).unwrap().normalized().unwrap();
        let prop = Propagator::new(&h, PropagatorConfig::default()).unwrap();
        let out = prop.step(&psi).unwrap();
        assert!((out.state.norm() - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn eigenstate_only_acquires_a_phase() {
        let h = model();
        let dense = assemble_dense(&h, DEFAULT_DIMENSION_CAP).unwrap();
        let spec = dense.spectrum();
        let k = 5;
        let eig = dense.unflatten(&spec.vectors.column(k).into_owned()).unwrap();
        let prop = Propagator::new(&h, PropagatorConfig::default()).unwrap();
        let out = prop.step(&eig).unwrap().state;
        let expect = eig.scaled(Complex64::from_polar(1.0, -spec.values[k] * 0.01));
        assert!(out.distance(&expect).unwrap() <= 1e-8);
    }

    #[test]
    fn timeline_lengths() {
        let h = model();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let psi = FockState::random(*h.grid(), 1, 1, &mut rng).unwrap().normalized().unwrap();
        let cfg = PropagatorConfig {
            dt: 0.25,
            ..Default::default()
        };
        let zero = evolve_with_snapshots(&h, &psi, 0.0, cfg).unwrap();
        assert_eq!(zero.len(), 1);
        assert_eq!(zero.states[0], psi);
        let one = evolve_with_snapshots(&h, &psi, 1.0, cfg).unwrap();
        assert_eq!(one.len(), 5);
        assert_eq!(one.final_time(), 1.0);
    }

    #[test]
    fn audit_of_constant_timeline_is_zero() {
        let h = model();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let psi = FockState::random(*h.grid(), 1, 1, &mut rng).unwrap().normalized().unwrap();
        let tl = EvolutionTimeline {
            dt: 0.1,
            states: vec![psi.clone(), psi.clone(), psi],
            halvings: 0,
        };
        let r = unitarity_audit(&tl);
        assert_eq!(r.max_step_drift, 0.0);
        assert!(r.cumulative_drift < 1e-15);
    }

    #[test]
    fn large_steps_are_subdivided() {
        let h = model();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let psi = FockState::random(*h.grid(), 1, 1, &mut rng).unwrap().normalized().unwrap();
        let cfg = PropagatorConfig {
            krylov_dim: 4,
            ..Default::default()
        };
        let prop = Propagator::new(&h, cfg).unwrap();
        let out = prop.step_by(&psi, 0.5).unwrap();
        assert!(out.halvings > 0);
        let dense = assemble_dense(&h, DEFAULT_DIMENSION_CAP).unwrap();
        let exact = dense.evolve(&dense.spectrum(), &psi, 0.5).unwrap();
        assert!(out.state.distance(&exact).unwrap() < 1e-8);
    }

    #[test]
    fn unreachable_tolerance_is_reported() {
        let h = model();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let psi = FockState::random(*h.grid(), 1, 1, &mut rng).unwrap().normalized().unwrap();
        let cfg = PropagatorConfig {
            error_tolerance: 0.0,
            krylov_dim: 2,
            max_halvings: 2,
            ..Default::default()
        };
        let prop = Propagator::new(&h, cfg).unwrap();
        assert!(matches!(prop.step(&psi), Err(Error::Tolerance { halvings: 2, .. })));
    }

    #[test]
    fn rejects_bad_config() {
        let h = model();
        let bad = PropagatorConfig {
            krylov_dim: 1,
            ..Default::default()
        };
        assert!(Propagator::new(&h, bad).is_err());
    }
}
