use std::path::PathBuf;
use std::process::ExitCode;

use bohmian_fock::harness::{run_experiment, Command};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "bqft", version, about = "Bohmian creation/annihilation experiments on a lattice Fock space")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(clap::Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Overrides `trajectories.seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides `output.directory`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Sub {
    /// Evolve the wavefunction and write snapshots.
    Evolve(Common),
    /// Evolve, then run the trajectory ensemble and write its log.
    Trajectories(Common),
    /// Compare the ensemble against |Psi(t)|^2 at the checkpoints.
    Equivariance(Common),
    /// Cross-check operator, propagator and rates against independent oracles.
    Oracle(Common),
    /// Scan the form-factor width and record photon statistics.
    Sweep(Common),
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let (command, args) = match cli.command {
        Sub::Evolve(a) => (Command::Evolve, a),
        Sub::Trajectories(a) => (Command::Trajectories, a),
        Sub::Equivariance(a) => (Command::Equivariance, a),
        Sub::Oracle(a) => (Command::Oracle, a),
        Sub::Sweep(a) => (Command::Sweep, a),
    };
    let code = run_experiment(command, &args.config, args.seed, args.out.as_deref());
    ExitCode::from(code as u8)
}
