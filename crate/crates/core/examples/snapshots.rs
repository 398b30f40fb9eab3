// Saves a short timeline as BQF1 files and reads one back bit for bit.
use bohmian_fock::harness::config::ExperimentConfig;
use bohmian_fock::propagator::evolve_with_snapshots;
use bohmian_fock::snapshot::{load_snapshot, save_timeline};

fn main() {
    let mut cfg = ExperimentConfig::default();
    cfg.grid.points = 16;
    let h = cfg.hamiltonian().unwrap();
    let psi = cfg.initial_state(&h).unwrap();
    let timeline = evolve_with_snapshots(&h, &psi, 0.1, cfg.evolution.propagator()).unwrap();
    let dir = std::env::temp_dir().join(format!("bqf-snapshots-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let files = save_timeline(&dir, &timeline, 5).unwrap();
    for f in &files {
        println!("{}", f.display());
    }
    let (back, t) = load_snapshot(files.last().unwrap()).unwrap();
    let same = back.sectors() == timeline.states.last().unwrap().sectors();
    println!("t = {t}, identical: {same}");
    std::fs::remove_dir_all(&dir).unwrap();
}
