// With a real cutoff and potential, conjugate-evolve-conjugate undoes evolution.
use bohmian_fock::fock::FockState;
use bohmian_fock::form_factor::{FormFactor, FormFactorKind};
use bohmian_fock::grid::GridSpec;
use bohmian_fock::hamiltonian::{harmonic_potential, Hamiltonian, PhysicalParams};
use bohmian_fock::harness::checks::time_reversal_defect;
use bohmian_fock::propagator::PropagatorConfig;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let grid = GridSpec::new(1, 10.0, 16).unwrap();
    let ff = FormFactor::new(FormFactorKind::Bump { radius: 1.5 }, &grid).unwrap();
    let params = PhysicalParams {
        coupling: 1.0,
        potential: Some(harmonic_potential(&grid, 1.0, 0.6)),
        ..Default::default()
    };
    let h = Hamiltonian::new(grid, 1, 2, params, ff).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let psi = FockState::random_band_limited(grid, 1, 2, 2, 4, &mut rng).unwrap().normalized().unwrap();
    let defect = time_reversal_defect(&h, &psi, 1.0, PropagatorConfig::default()).unwrap();
    println!("round-trip distance {defect:.2e}");
}
