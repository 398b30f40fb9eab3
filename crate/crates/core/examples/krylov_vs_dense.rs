// Krylov propagation against the exact matrix exponential of the dense
// Hamiltonian on a small lattice.
use bohmian_fock::dense::{assemble_dense, DEFAULT_DIMENSION_CAP};
use bohmian_fock::fock::FockState;
use bohmian_fock::form_factor::{FormFactor, FormFactorKind};
use bohmian_fock::grid::GridSpec;
use bohmian_fock::hamiltonian::{Hamiltonian, PhysicalParams};
use bohmian_fock::harness::checks::propagator_vs_dense;
use bohmian_fock::propagator::PropagatorConfig;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let grid = GridSpec::new(1, 10.0, 8).unwrap();
    let ff = FormFactor::new(FormFactorKind::Gaussian { width: 0.5 }, &grid).unwrap();
    let params = PhysicalParams {
        coupling: 1.0,
        ..Default::default()
    };
    let h = Hamiltonian::new(grid, 1, 1, params, ff).unwrap();
    let dense = assemble_dense(&h, DEFAULT_DIMENSION_CAP).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let psi = FockState::random(grid, 1, 1, &mut rng).unwrap().normalized().unwrap();
    let cfg = PropagatorConfig {
        dt: 0.01,
        ..Default::default()
    };
    let r = propagator_vs_dense(&h, &dense, &psi, 1.0, cfg).unwrap();
    println!("dimension {}", dense.dimension());
    println!("|psi_krylov - psi_exact| = {:.2e}", r.state_error);
    println!("max norm drift per step  = {:.2e}", r.max_step_drift);
    println!("relative energy drift    = {:.2e}", r.energy_drift);
}
