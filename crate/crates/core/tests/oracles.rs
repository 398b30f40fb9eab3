//! Values computed independently (dense numpy transcriptions of the lattice
//! model and of the rate formulas) and frozen here.

use bohmian_fock::dense::{assemble_dense, DEFAULT_DIMENSION_CAP};
use bohmian_fock::fock::{Configuration, FockState};
use bohmian_fock::form_factor::{FormFactor, FormFactorKind};
use bohmian_fock::grid::GridSpec;
use bohmian_fock::guidance::Guide;
use bohmian_fock::hamiltonian::{harmonic_potential, Hamiltonian, PhysicalParams};
use num_complex::Complex64;
use std::f64::consts::PI;

const HARMONIC_GROUND_UNCOUPLED: f64 = 0.49999999987052546;
const HARMONIC_GROUND_COUPLED: f64 = 0.38408271418941897;
const ANNIHILATION_RATE: f64 = 0.5295932885674518;
const CREATION_DENSITY: f64 = 0.64504867513134956;

fn harmonic(coupling: f64, max_photons: usize, rest_energy: f64) -> Hamiltonian {
    let grid = GridSpec::new(1, 10.0, 16).unwrap();
    let ff = FormFactor::new(FormFactorKind::Gaussian { width: 0.5 }, &grid).unwrap();
    let params = PhysicalParams {
        coupling,
        potential: Some(harmonic_potential(&grid, 1.0, 1.0)),
        photon_rest_energy: rest_energy,
        ..Default::default()
    };
    Hamiltonian::new(grid, 1, max_photons, params, ff).unwrap()
}

#[test]
fn uncoupled_ground_energy() {
    let dense = assemble_dense(&harmonic(0.0, 0, 0.0), DEFAULT_DIMENSION_CAP).unwrap();
    let e = dense.ground_state().unwrap().energy;
    assert!((e - HARMONIC_GROUND_UNCOUPLED).abs() <= 1e-10, "{e}");
}

#[test]
fn coupled_ground_energy() {
    let dense = assemble_dense(&harmonic(0.5, 1, 0.5), DEFAULT_DIMENSION_CAP).unwrap();
    let e = dense.ground_state().unwrap().energy;
    assert!((e - HARMONIC_GROUND_COUPLED).abs() <= 1e-10, "{e}");
}

fn constructed(sign: f64) -> (Hamiltonian, FockState) {
    let grid = GridSpec::new(1, 10.0, 16).unwrap();
    let ff = FormFactor::new(FormFactorKind::Gaussian { width: 0.5 }, &grid).unwrap();
    let params = PhysicalParams {
        coupling: 0.8,
        ..Default::default()
    };
    let h = Hamiltonian::new(grid, 1, 1, params, ff).unwrap();
    let w = 2.0 * PI / 10.0;
    let psi = FockState::from_fn(grid, 1, 1, |m, c| {
        if m == 0 {
            Complex64::new(1.0 + 0.5 * (w * c[0]).cos(), 0.0)
        } else {
            let a = 1.2 + 0.3 * (w * (c[0] + c[1])).sin() + 0.1 * (w * c[1]).cos();
            Complex64::new(0.0, sign * a)
        }
    })
    .unwrap();
    (h, psi)
}

#[test]
fn annihilation_rate_matches_transcription() {
    let (h, psi) = constructed(1.0);
    let guide = Guide::new(&psi, &h);
    let q = Configuration::new(vec![1.875], vec![2.5], 1);
    let (rates, node) = guide.annihilation_rates(&q);
    assert!(!node);
    assert!((rates[0] - ANNIHILATION_RATE).abs() <= 1e-12 * ANNIHILATION_RATE, "{}", rates[0]);
    // the reverse direction is closed
    let q0 = q.without_photon(0, 1);
    assert_eq!(guide.creation_density_at(&q0, &[2.5]), 0.0);
}

#[test]
fn creation_density_matches_transcription() {
    let (h, psi) = constructed(-1.0);
    let guide = Guide::new(&psi, &h);
    let q0 = Configuration::new(vec![1.875], vec![], 1);
    let (field, _) = guide.creation_rate_field(&q0);
    let c = field[4];
    assert!((c - CREATION_DENSITY).abs() <= 1e-12 * CREATION_DENSITY, "{c}");
    assert!((guide.creation_density_at(&q0, &[2.5]) - c).abs() <= 1e-12 * c);
}
