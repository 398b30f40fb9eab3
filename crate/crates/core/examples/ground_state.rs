// A real stationary state: nothing moves and nothing jumps.
use bohmian_fock::dense::{assemble_dense, DEFAULT_DIMENSION_CAP};
use bohmian_fock::form_factor::{FormFactor, FormFactorKind};
use bohmian_fock::grid::GridSpec;
use bohmian_fock::hamiltonian::{harmonic_potential, Hamiltonian, PhysicalParams};
use bohmian_fock::harness::checks::statics_check;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let grid = GridSpec::new(1, 10.0, 16).unwrap();
    let ff = FormFactor::new(FormFactorKind::Gaussian { width: 0.5 }, &grid).unwrap();
    let params = PhysicalParams {
        coupling: 0.5,
        potential: Some(harmonic_potential(&grid, 1.0, 1.0)),
        photon_rest_energy: 0.5,
        ..Default::default()
    };
    let h = Hamiltonian::new(grid, 1, 1, params, ff).unwrap();
    let ground = assemble_dense(&h, DEFAULT_DIMENSION_CAP).unwrap().ground_state().unwrap();
    println!("E0 = {:.12}, gap = {:.6}", ground.energy, ground.gap);
    println!("photon probability {:.6}", ground.state.sector_probabilities().unwrap()[1]);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let r = statics_check(&h, &ground.state, 100, &mut rng).unwrap();
    println!("max |v| = {:.2e}, max rate = {:.2e}", r.max_speed, r.max_rate);
}
