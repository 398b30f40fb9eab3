// An ensemble started from |Psi(0)|^2 stays |Psi(t)|^2-distributed, sector
// populations included. Set EQUIVARIANCE_FULL=1 for 10^4 trajectories.
use bohmian_fock::harness::config::ExperimentConfig;
use bohmian_fock::harness::equivariance::{equivariance_report, Thresholds};
use bohmian_fock::jump::run_ensemble;
use bohmian_fock::propagator::evolve_with_snapshots;

fn main() {
    let full = std::env::var("EQUIVARIANCE_FULL").is_ok_and(|v| v == "1");
    let mut cfg = ExperimentConfig::default();
    if !full {
        cfg.grid.points = 16;
        cfg.evolution.total_time = 1.0;
        cfg.evolution.dt = 0.01;
        cfg.checks.checkpoints = vec![0.5, 1.0];
        cfg.trajectories.count = 1000;
    }
    let h = cfg.hamiltonian().unwrap();
    let psi = cfg.initial_state(&h).unwrap();
    let timeline = evolve_with_snapshots(&h, &psi, cfg.evolution.total_time, cfg.evolution.propagator()).unwrap();
    let k = cfg.trajectories.count;
    let ensemble = run_ensemble(&h, &timeline, cfg.trajectories.seed, k, cfg.trajectories.settings()).unwrap();
    // looser limits for the small default run
    let scale = (10_000.0 / k as f64).sqrt();
    let thresholds = Thresholds {
        sector_tv: 0.03 * scale,
        marginal_tv: 0.05 * scale,
        mean_photon_z: 3.0,
    };
    let report = equivariance_report(&ensemble, &timeline, &cfg.checks.checkpoints, thresholds).unwrap();
    println!("K = {k}");
    for c in &report.checkpoints {
        println!(
            "t = {:.2}  P = {:?}\n         f = {:?}\n  sector TV {:.4}  electron TV {:.4}  photon TV {:.4}  <m> z {:+.2}",
            c.time, c.target_sectors, c.ensemble_sectors, c.sector_tv, c.electron_marginal_tv, c.photon_marginal_tv, c.mean_photon_z
        );
    }
    println!("pass: {}", report.pass);
}
