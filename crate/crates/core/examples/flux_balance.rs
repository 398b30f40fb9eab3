// Sector probabilities change exactly as fast as the jump fluxes move
// probability between sectors.
use bohmian_fock::dense::{assemble_dense, DEFAULT_DIMENSION_CAP};
use bohmian_fock::fock::FockState;
use bohmian_fock::form_factor::{FormFactor, FormFactorKind};
use bohmian_fock::grid::GridSpec;
use bohmian_fock::hamiltonian::{Hamiltonian, PhysicalParams};
use bohmian_fock::harness::checks::{dense_timeline, flux_balance_check};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let grid = GridSpec::new(1, 10.0, 16).unwrap();
    let ff = FormFactor::new(FormFactorKind::Gaussian { width: 0.5 }, &grid).unwrap();
    let params = PhysicalParams {
        coupling: 1.0,
        ..Default::default()
    };
    let h = Hamiltonian::new(grid, 1, 1, params, ff).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let psi = FockState::random(grid, 1, 1, &mut rng).unwrap().normalized().unwrap();
    let dense = assemble_dense(&h, DEFAULT_DIMENSION_CAP).unwrap();
    let timeline = dense_timeline(&dense, &psi, 0.2, 0.005).unwrap();
    let r = flux_balance_check(&h, &timeline).unwrap();
    println!("max |sum_m dP(m)/dt|      {:.2e}", r.max_total_rate);
    println!("max |flux|                {:.4e}", r.max_flux);
    println!("relative balance residual {:.2e}", r.relative_residual());
}
