// With a compactly supported cutoff, photons only appear near an electron.
use bohmian_fock::fock::{Configuration, FockState};
use bohmian_fock::form_factor::{FormFactor, FormFactorKind};
use bohmian_fock::grid::GridSpec;
use bohmian_fock::hamiltonian::{Hamiltonian, PhysicalParams};
use bohmian_fock::harness::checks::creation_outside_support;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() {
    let grid = GridSpec::new(1, 10.0, 32).unwrap();
    let ff = FormFactor::new(FormFactorKind::Bump { radius: 1.0 }, &grid).unwrap();
    let params = PhysicalParams {
        coupling: 1.0,
        ..Default::default()
    };
    let h = Hamiltonian::new(grid, 1, 1, params, ff).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let psi = FockState::random(grid, 1, 1, &mut rng).unwrap();
        let q = Configuration::new(vec![rng.gen::<f64>() * 10.0], vec![], 1);
        worst = worst.max(creation_outside_support(&h, &psi, &q));
    }
    println!("largest creation density beyond the cutoff radius: {worst:e}");
}
