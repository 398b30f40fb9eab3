// Runs the experiment pipeline from a config file, as the `bqft` binary does.
// CONFIG selects the file, default `examples/configs/quick.toml`.
use std::path::{Path, PathBuf};

use bohmian_fock::harness::{run_experiment, Command};

fn main() {
    let path = std::env::var("CONFIG")
        .map(PathBuf::from)
        .unwrap_or_else(|_| Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/configs/quick.toml"));
    let out = std::env::temp_dir().join(format!("bqf-run-{}", std::process::id()));
    for command in [Command::Evolve, Command::Trajectories, Command::Equivariance] {
        let code = run_experiment(command, &path, None, Some(&out));
        println!("{}: exit {code}", command.name());
    }
    for entry in std::fs::read_dir(&out).unwrap() {
        println!("  {}", entry.unwrap().path().display());
    }
    println!("{}", std::fs::read_to_string(out.join("equivariance_report.toml")).unwrap());
    std::fs::remove_dir_all(&out).unwrap();
}
