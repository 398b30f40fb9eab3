//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails.

use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use bohmian_fock::dense::{assemble_dense, DEFAULT_DIMENSION_CAP};
use bohmian_fock::fock::{Configuration, FockState};
use bohmian_fock::form_factor::{FormFactor, FormFactorKind};
use bohmian_fock::grid::GridSpec;
use bohmian_fock::hamiltonian::{harmonic_potential, Hamiltonian, PhysicalParams};
use bohmian_fock::harness::checks::{
    creation_outside_support, dense_timeline, flux_balance_check, generator_identity_check, hermiticity_defect,
    propagator_vs_dense, rate_identity_check, statics_check, time_reversal_defect,
};
use bohmian_fock::harness::config::ExperimentConfig;
use bohmian_fock::harness::{execute, Command, EquivarianceRun};
use bohmian_fock::propagator::PropagatorConfig;
use bohmian_fock::Result;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<(bool, String)>;

const GAUSSIAN: FormFactorKind = FormFactorKind::Gaussian { width: 0.5 };
const BUMP: FormFactorKind = FormFactorKind::Bump { radius: 1.0 };

fn model(points: usize, max_photons: usize, kind: FormFactorKind, params: PhysicalParams) -> Result<Hamiltonian> {
    let grid = GridSpec::new(1, 10.0, points)?;
    let ff = FormFactor::new(kind, &grid)?;
    Hamiltonian::new(grid, 1, max_photons, params, ff)
}

fn coupled(g: f64) -> PhysicalParams {
    PhysicalParams {
        coupling: g,
        ..Default::default()
    }
}

fn hermiticity() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let grid = GridSpec::new(1, 10.0, 8)?;
    let mut worst = 0.0f64;
    for kind in [GAUSSIAN, BUMP] {
        for trapped in [false, true] {
            let params = PhysicalParams {
                coupling: 0.8,
                potential: trapped.then(|| harmonic_potential(&grid, 1.0, 1.0)),
                photon_rest_energy: if trapped { 0.5 } else { 0.0 },
                ..Default::default()
            };
            let h = model(8, 2, kind, params)?;
            worst = worst.max(hermiticity_defect(&h, 100, &mut rng)?);
        }
    }
    Ok((worst <= 1e-12, format!("max relative defect {worst:.2e} (limit 1e-12)")))
}

fn propagator() -> Check {
    let h = model(8, 1, GAUSSIAN, coupled(1.0))?;
    let dense = assemble_dense(&h, DEFAULT_DIMENSION_CAP)?;
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    let psi = FockState::random(*h.grid(), 1, 1, &mut rng)?.normalized()?;
    let cfg = PropagatorConfig {
        dt: 0.01,
        ..Default::default()
    };
    let r = propagator_vs_dense(&h, &dense, &psi, 1.0, cfg)?;
    let pass = r.state_error <= 1e-8 && r.max_step_drift <= 1e-9 && r.energy_drift <= 1e-8;
    Ok((
        pass,
        format!(
            "state error {:.2e}, step norm drift {:.2e}, energy drift {:.2e}",
            r.state_error, r.max_step_drift, r.energy_drift
        ),
    ))
}

fn rate_identities() -> Check {
    let h = model(16, 2, GAUSSIAN, coupled(0.9))?;
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    let psi = FockState::random(*h.grid(), 1, 2, &mut rng)?.normalized()?;
    let r = rate_identity_check(&h, &psi, 100, &mut rng)?;
    let pass = r.max_form_mismatch <= 1e-12
        && r.max_alternative_mismatch <= 1e-12
        && r.minimality_violations == 0
        && r.max_homogeneity_error <= 1e-12;
    Ok((
        pass,
        format!(
            "{} transitions, form mismatch {:.2e}, alternative {:.2e}, minimality violations {}, homogeneity {:.2e}",
            r.transitions, r.max_form_mismatch, r.max_alternative_mismatch, r.minimality_violations, r.max_homogeneity_error
        ),
    ))
}

fn statics() -> Check {
    let grid = GridSpec::new(1, 10.0, 16)?;
    let params = PhysicalParams {
        coupling: 0.5,
        potential: Some(harmonic_potential(&grid, 1.0, 1.0)),
        photon_rest_energy: 0.5,
        ..Default::default()
    };
    let h = model(16, 1, GAUSSIAN, params)?;
    let ground = assemble_dense(&h, DEFAULT_DIMENSION_CAP)?.ground_state()?;
    let mut rng = ChaCha8Rng::seed_from_u64(104);
    let r = statics_check(&h, &ground.state, 100, &mut rng)?;
    let pass = r.max_speed <= 1e-8 && r.max_rate <= 1e-8;
    Ok((pass, format!("max |v| {:.2e}, max rate {:.2e} over {} configurations", r.max_speed, r.max_rate, r.samples)))
}

fn locality() -> Check {
    let h = model(32, 1, BUMP, coupled(1.0))?;
    let mut rng = ChaCha8Rng::seed_from_u64(105);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let psi = FockState::random(*h.grid(), 1, 1, &mut rng)?;
        let q = Configuration::new(vec![rng.gen::<f64>() * 10.0], vec![], 1);
        worst = worst.max(creation_outside_support(&h, &psi, &q));
    }
    Ok((worst <= 1e-14, format!("max creation density beyond radius {worst:.2e}")))
}

fn generator() -> Check {
    let h = model(32, 1, GAUSSIAN, coupled(1.2))?;
    let mut rng = ChaCha8Rng::seed_from_u64(106);
    let psi = FockState::random_band_limited(*h.grid(), 1, 1, 4, 8, &mut rng)?;
    let r = generator_identity_check(&h, &psi, 100, &mut rng);
    Ok((
        r.max_relative_residual <= 1e-6,
        format!("max relative residual {:.2e} over {} configurations", r.max_relative_residual, r.samples),
    ))
}

fn flux_balance() -> Check {
    let h = model(16, 1, GAUSSIAN, coupled(1.0))?;
    let mut rng = ChaCha8Rng::seed_from_u64(107);
    let psi = FockState::random(*h.grid(), 1, 1, &mut rng)?.normalized()?;
    let dense = assemble_dense(&h, DEFAULT_DIMENSION_CAP)?;
    let timeline = dense_timeline(&dense, &psi, 0.5, 0.005)?;
    let r = flux_balance_check(&h, &timeline)?;
    let pass = r.relative_residual() <= 1e-3 && r.max_total_rate <= 1e-10;
    Ok((
        pass,
        format!(
            "balance residual {:.2e} of max flux {:.2e}, |sum dP/dt| {:.2e}",
            r.relative_residual(),
            r.max_flux,
            r.max_total_rate
        ),
    ))
}

fn load(name: &str) -> Result<ExperimentConfig> {
    ExperimentConfig::load(&Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/configs").join(name))
}

fn equivariance() -> Check {
    let dir = tempfile::tempdir()?;
    let mut cfg = load("acceptance.toml")?;
    cfg.trajectories.write_log = false;
    cfg.output.directory = dir.path().to_path_buf();
    let start = Instant::now();
    let outcome = execute(Command::Equivariance, &cfg)?;
    let elapsed = start.elapsed().as_secs_f64();
    let text = std::fs::read_to_string(dir.path().join("equivariance_report.toml"))?;
    let run: EquivarianceRun = toml::from_str(&text).map_err(|e| bohmian_fock::Error::Format(e.to_string()))?;
    let mut detail = format!(
        "K = {}, node fraction {:.1e}, {elapsed:.0} s",
        run.statistics.ensemble_size, run.ensemble.node_fraction
    );
    for c in &run.statistics.checkpoints {
        detail.push_str(&format!(
            "\n      t = {}: sector TV {:.4}, electron TV {:.4}, photon TV {:.4}, <m> z {:+.2}",
            c.time, c.sector_tv, c.electron_marginal_tv, c.photon_marginal_tv, c.mean_photon_z
        ));
    }
    Ok((outcome.pass && run.pass, detail))
}

fn time_reversal() -> Check {
    let grid = GridSpec::new(1, 10.0, 16)?;
    let params = PhysicalParams {
        coupling: 1.0,
        potential: Some(harmonic_potential(&grid, 1.0, 0.6)),
        ..Default::default()
    };
    let h = model(16, 2, BUMP, params)?;
    let mut rng = ChaCha8Rng::seed_from_u64(109);
    let psi = FockState::random_band_limited(grid, 1, 2, 2, 4, &mut rng)?.normalized()?;
    let d = time_reversal_defect(&h, &psi, 1.0, PropagatorConfig::default())?;
    Ok((d <= 1e-6, format!("round-trip distance {d:.2e}")))
}

fn run_files(cfg: &ExperimentConfig) -> Result<Vec<(String, Vec<u8>)>> {
    let mut files = Vec::new();
    for command in [Command::Trajectories, Command::Equivariance] {
        for path in execute(command, cfg)?.files {
            files.push((path.display().to_string(), std::fs::read(&path)?));
        }
    }
    Ok(files)
}

fn reproducibility() -> Check {
    let dir = tempfile::tempdir()?;
    let mut cfg = load("quick.toml")?;
    cfg.output.directory = dir.path().to_path_buf();
    let first = run_files(&cfg)?;
    let second = run_files(&cfg)?;
    cfg.trajectories.seed += 1;
    let reseeded = run_files(&cfg)?;
    let identical = first == second;
    let log = |files: &[(String, Vec<u8>)]| files.iter().find(|(p, _)| p.ends_with("trajectories.log")).map(|f| f.1.clone());
    let seed_matters = log(&first) != log(&reseeded);
    let bytes: usize = first.iter().map(|f| f.1.len()).sum();
    Ok((
        identical && seed_matters,
        format!("{} files, {bytes} bytes identical: {identical}; new seed changes the log: {seed_matters}", first.len()),
    ))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Check); 10] = [
        ("hermiticity", hermiticity),
        ("krylov propagator vs dense exponential", propagator),
        ("rate identities", rate_identities),
        ("statics of a real ground state", statics),
        ("locality of creation", locality),
        ("master equation", generator),
        ("sector flux balance", flux_balance),
        ("equivariance of the jump process", equivariance),
        ("time reversal", time_reversal),
        ("reproducibility", reproducibility),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let (pass, detail) = check().unwrap_or_else(|e| (false, format!("error: {e}")));
        failures += usize::from(!pass);
        println!("{} criterion {:>2} {name}: {detail}", if pass { "PASS" } else { "FAIL" }, i + 1);
    }
    println!("{} of {} criteria pass", criteria.len() - failures, criteria.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
