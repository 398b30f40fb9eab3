use bohmian_fock::fock::{Configuration, FockState};
use bohmian_fock::form_factor::{FormFactor, FormFactorKind};
use bohmian_fock::grid::GridSpec;
use bohmian_fock::guidance::{creation_density_value, Guide};
use bohmian_fock::hamiltonian::{Hamiltonian, PhysicalParams};
use bohmian_fock::jump::{derive_seed, drift_substep, run_ensemble, run_trajectory, TrajectorySettings};
use bohmian_fock::propagator::{evolve_with_snapshots, PropagatorConfig};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rustfft::FftPlanner;

fn model(points: usize, max_photons: usize, coupling: f64) -> Hamiltonian {
    let grid = GridSpec::new(1, 10.0, points).unwrap();
    let ff = FormFactor::new(FormFactorKind::Gaussian { width: 0.5 }, &grid).unwrap();
    let params = PhysicalParams {
        coupling,
        ..Default::default()
    };
    Hamiltonian::new(grid, 1, max_photons, params, ff).unwrap()
}

fn drift_to(guide: &Guide<'_>, q: &Configuration, t: f64, steps: usize) -> Configuration {
    let dt = t / steps as f64;
    (0..steps).fold(q.clone(), |q, _| drift_substep(guide, &q, dt).0)
}

#[test]
fn drift_converges_at_fourth_order() {
    let h = model(32, 1, 0.5);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let psi = FockState::random_band_limited(*h.grid(), 1, 1, 2, 6, &mut rng).unwrap();
    let guide = Guide::new(&psi, &h);
    let hx = h.grid().spacing();
    // start mid-cell and stay inside it, where the interpolated field is smooth
    let q = Configuration::new(vec![10.5 * hx], vec![20.5 * hx], 1);
    let v = guide.velocities(&q);
    let t = 0.3 * hx / v.max_speed_component().max(1.0);
    let a = drift_to(&guide, &q, t, 4);
    let b = drift_to(&guide, &q, t, 8);
    let c = drift_to(&guide, &q, t, 16);
    let gap = |p: &Configuration, r: &Configuration| -> f64 {
        p.coordinates().zip(r.coordinates()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    };
    let order = (gap(&a, &b) / gap(&b, &c)).log2();
    assert!(order >= 3.5, "observed order {order}");
    assert!((c.electrons[0] - q.electrons[0]).abs() < 0.5 * hx);
}

/// Trigonometric interpolation of one periodic row onto `factor` times as
/// many points, by zero-padding its spectrum.
fn refine(row: &[Complex64], factor: usize) -> Vec<Complex64> {
    let g = row.len();
    let mut planner = FftPlanner::new();
    let mut spec = row.to_vec();
    planner.plan_fft_forward(g).process(&mut spec);
    let fine_n = g * factor;
    let mut padded = vec![Complex64::default(); fine_n];
    for n in 0..g {
        let signed = if n < g / 2 { n as i64 } else if n > g / 2 { n as i64 - g as i64 } else { 0 };
        let slot = signed.rem_euclid(fine_n as i64) as usize;
        padded[slot] += spec[n];
    }
    // split the Nyquist coefficient evenly between +/-
    let nyq = spec[g / 2] * 0.5;
    padded[g / 2] += nyq;
    padded[fine_n - g / 2] += nyq;
    planner.plan_fft_inverse(fine_n).process(&mut padded);
    padded.iter().map(|z| z / g as f64).collect()
}

fn emitting_packet(h: &Hamiltonian, until: f64) -> FockState {
    let start = FockState::from_fn(*h.grid(), 1, h.max_photons(), |m, c| {
        let r = c[0] - 5.0;
        if m == 0 {
            Complex64::from_polar((-r * r / 0.98).exp(), c[0])
        } else {
            Complex64::default()
        }
    })
    .unwrap()
    .normalized()
    .unwrap();
    let cfg = PropagatorConfig {
        dt: 0.01,
        ..Default::default()
    };
    evolve_with_snapshots(h, &start, until, cfg).unwrap().states.pop().unwrap()
}

// Positive parts put kinks into the integrand wherever the bracket changes
// sign, which caps any equispaced rule at O(h^2); a packet that has emitted
// a photon cloud keeps a single sign over the form-factor support.
#[test]
fn creation_total_matches_refined_quadrature() {
    let h = model(64, 1, 0.9);
    let psi = emitting_packet(&h, 0.5);
    let guide = Guide::new(&psi, &h);
    let grid = *h.grid();
    let (g, factor) = (grid.points(), 4);
    let fine_h = grid.spacing() / factor as f64;
    let p = h.params();
    let mut worst = 0.0f64;
    for node in [26usize, 30, 32, 35] {
        let x = grid.node_coordinate(node);
        let q = Configuration::new(vec![x], vec![], 1);
        let coarse = guide.rates(&q).total_creation;
        let here = psi.sector(0)[node];
        let fine_row = refine(&psi.sector(1)[node * g..(node + 1) * g], factor);
        let phi = |j: usize| h.form_factor().between(&[x], &[j as f64 * fine_h]).conj();
        let fine: f64 = fine_row
            .iter()
            .enumerate()
            .map(|(j, &added)| creation_density_value(here, added, phi(j), p.coupling, p.hbar, 0))
            .sum::<f64>()
            * fine_h;
        assert!(coarse > 0.0);
        worst = worst.max((coarse - fine).abs() / coarse);

        // without the positive part both rules integrate a band-limited
        // periodic function and agree to rounding
        let bracket = |b: Complex64, f: Complex64| -(b * f / here).im;
        let coarse_signed: f64 = (0..g)
            .map(|j| bracket(psi.sector(1)[node * g + j], phi(j * factor)))
            .sum::<f64>()
            * grid.spacing();
        let fine_signed: f64 = fine_row.iter().enumerate().map(|(j, &b)| bracket(b, phi(j))).sum::<f64>() * fine_h;
        assert!((coarse_signed - fine_signed).abs() <= 1e-12 * coarse_signed.abs());
    }
    assert!(worst <= 1e-3, "{worst}");
}

#[test]
fn real_state_without_coupling_freezes_everything() {
    let h = model(16, 1, 0.0);
    let psi = FockState::from_fn(*h.grid(), 1, 1, |m, c| {
        let r = c[0] - 5.0;
        Complex64::new(if m == 0 { (-r * r).exp() } else { 0.0 }, 0.0)
    })
    .unwrap()
    .normalized()
    .unwrap();
    let cfg = PropagatorConfig {
        dt: 0.02,
        ..Default::default()
    };
    // a single snapshot step keeps the frozen state real
    let tl = evolve_with_snapshots(&h, &psi, 0.02, cfg).unwrap();
    let s = TrajectorySettings {
        dt_traj: 0.01,
        record_every: 1,
    };
    let q = Configuration::new(vec![4.9], vec![], 1);
    let a = run_trajectory(&h, &tl, 1, s, Some(q.clone())).unwrap();
    let b = run_trajectory(&h, &tl, 2, s, Some(q.clone())).unwrap();
    assert_eq!(a.samples, b.samples);
    assert!(a.events.is_empty());
    let drift = (a.samples.last().unwrap().config.electrons[0] - 4.9).abs();
    assert!(drift < 1e-12, "{drift}");
}

#[test]
fn ensemble_photon_number_tracks_the_state() {
    let h = model(16, 2, 2.0);
    let psi = emitting_packet(&h, 0.0);
    let cfg = PropagatorConfig {
        dt: 0.01,
        ..Default::default()
    };
    let tl = evolve_with_snapshots(&h, &psi, 1.0, cfg).unwrap();
    let s = TrajectorySettings {
        dt_traj: 0.005,
        record_every: 20,
    };
    let k = 3000;
    let ens = run_ensemble(&h, &tl, 99, k, s).unwrap();
    let p = tl.states.last().unwrap().sector_probabilities().unwrap();
    let mean: f64 = p.iter().enumerate().map(|(m, x)| m as f64 * x).sum();
    let second: f64 = p.iter().enumerate().map(|(m, x)| (m * m) as f64 * x).sum();
    let se = ((second - mean * mean) / k as f64).sqrt();
    let observed = ens.iter().map(|t| t.sample_at(1.0).unwrap().config.sector as f64).sum::<f64>() / k as f64;
    assert!((observed - mean).abs() <= 3.0 * se, "{observed} vs {mean} +- {se}");
    assert_ne!(derive_seed(99, 0), derive_seed(99, 1));
    assert_ne!(ens[0].samples, ens[1].samples);
}
