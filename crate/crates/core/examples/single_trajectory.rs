// One trajectory of an electron packet that emits and reabsorbs photons,
// printed in the trajectory log format.
use bohmian_fock::harness::config::ExperimentConfig;
use bohmian_fock::jump::{run_trajectory, write_log};
use bohmian_fock::propagator::evolve_with_snapshots;

fn main() {
    let mut cfg = ExperimentConfig::default();
    cfg.grid.points = 16;
    cfg.evolution.total_time = 1.0;
    cfg.evolution.dt = 0.01;
    cfg.trajectories.dt_traj = 0.005;
    let h = cfg.hamiltonian().unwrap();
    let psi = cfg.initial_state(&h).unwrap();
    let timeline = evolve_with_snapshots(&h, &psi, cfg.evolution.total_time, cfg.evolution.propagator()).unwrap();
    let trajectory = run_trajectory(&h, &timeline, 2024, cfg.trajectories.settings(), None).unwrap();
    println!("{} jumps", trajectory.events.len());
    let mut log = Vec::new();
    write_log(&mut log, &[trajectory], 1).unwrap();
    print!("{}", String::from_utf8(log).unwrap());
}
