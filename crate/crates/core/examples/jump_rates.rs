// Velocities and jump rates at one configuration, plus the creation-rate
// density written as CSV.
use bohmian_fock::fock::{Configuration, FockState};
use bohmian_fock::form_factor::{FormFactor, FormFactorKind};
use bohmian_fock::grid::GridSpec;
use bohmian_fock::guidance::{write_rate_csv, Guide};
use bohmian_fock::hamiltonian::{Hamiltonian, PhysicalParams};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let grid = GridSpec::new(1, 10.0, 32).unwrap();
    let ff = FormFactor::new(FormFactorKind::Gaussian { width: 0.5 }, &grid).unwrap();
    let params = PhysicalParams {
        coupling: 1.0,
        ..Default::default()
    };
    let h = Hamiltonian::new(grid, 1, 2, params, ff).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let psi = FockState::random_band_limited(grid, 1, 2, 3, 6, &mut rng).unwrap();
    let guide = Guide::new(&psi, &h);

    let q = Configuration::new(vec![3.3], vec![4.1], 1);
    let v = guide.velocities(&q);
    let rates = guide.rates(&q);
    println!("electron velocity {:.6}, photon velocity {:.6}", v.electrons[0], v.photons[0]);
    println!("annihilation {:?}", rates.annihilation);
    println!("total creation {:.6}", rates.total_creation);
    let mut csv = Vec::new();
    write_rate_csv(&mut csv, &grid, &rates.creation_density).unwrap();
    print!("{}", String::from_utf8(csv).unwrap());
}
