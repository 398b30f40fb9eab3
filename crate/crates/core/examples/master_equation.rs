// Both sides of the master equation for |Psi|^2 at lattice configurations.
use bohmian_fock::fock::FockState;
use bohmian_fock::form_factor::{FormFactor, FormFactorKind};
use bohmian_fock::grid::GridSpec;
use bohmian_fock::hamiltonian::{Hamiltonian, PhysicalParams};
use bohmian_fock::harness::checks::generator_identity_check;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let grid = GridSpec::new(1, 10.0, 32).unwrap();
    let ff = FormFactor::new(FormFactorKind::Gaussian { width: 0.5 }, &grid).unwrap();
    let params = PhysicalParams {
        coupling: 1.2,
        ..Default::default()
    };
    let h = Hamiltonian::new(grid, 1, 1, params, ff).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let psi = FockState::random_band_limited(grid, 1, 1, 4, 8, &mut rng).unwrap();
    let r = generator_identity_check(&h, &psi, 200, &mut rng);
    println!("{} configurations", r.samples);
    println!("max relative residual    {:.2e}", r.max_relative_residual);
    println!("median relative residual {:.2e}", r.median_relative_residual);
}
