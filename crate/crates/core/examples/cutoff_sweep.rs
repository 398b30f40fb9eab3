// How photon statistics change as the cutoff width shrinks.
use bohmian_fock::harness::config::ExperimentConfig;
use bohmian_fock::harness::{execute, Command, SweepReport};

fn main() {
    let mut cfg = ExperimentConfig::default();
    cfg.grid.points = 16;
    cfg.evolution.total_time = 1.0;
    cfg.evolution.dt = 0.01;
    cfg.checks.checkpoints = vec![1.0];
    cfg.sweep.widths = vec![1.0, 0.7, 0.5];
    cfg.sweep.count = 300;
    cfg.output.directory = std::env::temp_dir().join(format!("bqf-sweep-{}", std::process::id()));
    execute(Command::Sweep, &cfg).unwrap();
    let text = std::fs::read_to_string(cfg.output.directory.join("sweep_report.toml")).unwrap();
    let report: SweepReport = toml::from_str(&text).unwrap();
    println!("width   <m>_psi  <m>_ens  jumps/traj  absorbed");
    for e in &report.entries {
        println!(
            "{:5.2}  {:7.4}  {:7.4}  {:10.3}  {:8.3}",
            e.width, e.target_mean_photons, e.ensemble_mean_photons, e.events_per_trajectory, e.absorbed_fraction
        );
    }
    std::fs::remove_dir_all(&cfg.output.directory).unwrap();
}
