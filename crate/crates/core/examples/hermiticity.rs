// Checks <a, H b> = <H a, b> on random Fock states for both cutoff shapes,
// with and without the trap and the photon rest energy.
use bohmian_fock::form_factor::{FormFactor, FormFactorKind};
use bohmian_fock::grid::GridSpec;
use bohmian_fock::hamiltonian::{harmonic_potential, Hamiltonian, PhysicalParams};
use bohmian_fock::harness::checks::hermiticity_defect;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let grid = GridSpec::new(1, 10.0, 8).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for kind in [FormFactorKind::Gaussian { width: 0.5 }, FormFactorKind::Bump { radius: 1.0 }] {
        for trapped in [false, true] {
            let params = PhysicalParams {
                coupling: 0.8,
                potential: trapped.then(|| harmonic_potential(&grid, 1.0, 1.0)),
                photon_rest_energy: if trapped { 0.5 } else { 0.0 },
                ..Default::default()
            };
            let ff = FormFactor::new(kind, &grid).unwrap();
            let h = Hamiltonian::new(grid, 1, 2, params, ff).unwrap();
            let defect = hermiticity_defect(&h, 20, &mut rng).unwrap();
            println!("{kind:?} trapped={trapped}: max defect {defect:.2e}");
        }
    }
}
