use std::fs;
use std::path::Path;
use std::process::Command;

fn bqft(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_bqft"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .unwrap()
}

const TINY: &str = r#"
[grid]
points = 8

[model]
max_photons = 1

[evolution]
dt = 0.01
total_time = 0.2
save_every = 10

[trajectories]
count = 50
dt_traj = 0.005

[checks]
checkpoints = [0.1, 0.2]
"#;

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("run.toml");
    fs::write(&path, text).unwrap();
    path.display().to_string()
}

#[test]
fn missing_config_exits_with_config_error() {
    let out = bqft(&["evolve", "--config", "/nonexistent/run.toml"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_key_and_bad_arguments_exit_with_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[grid]\npoint = 8\n");
    assert_eq!(bqft(&["evolve", "--config", &cfg]).status.code(), Some(2));
    assert_eq!(bqft(&["launch", "--config", &cfg]).status.code(), Some(2));
    assert_eq!(bqft(&["evolve"]).status.code(), Some(2));
}

#[test]
fn failed_check_exits_with_one_unless_checks_are_disabled() {
    let dir = tempfile::tempdir().unwrap();
    let strict = format!("{TINY}sector_tv = 0.0\nmarginal_tv = 0.0\n");
    let cfg = write_config(dir.path(), &strict);
    let out = dir.path().join("strict");
    let status = bqft(&["equivariance", "--config", &cfg, "--out", out.to_str().unwrap()]).status;
    assert_eq!(status.code(), Some(1));

    let cfg = write_config(dir.path(), &format!("{strict}enabled = false\n"));
    let status = bqft(&["equivariance", "--config", &cfg, "--out", out.to_str().unwrap()]).status;
    assert_eq!(status.code(), Some(0));
}

#[test]
fn subcommands_write_their_reports() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), TINY);
    let out = dir.path().join("out");
    let o = out.to_str().unwrap();
    for (sub, report) in [
        ("evolve", "evolve_report.toml"),
        ("trajectories", "trajectories_report.toml"),
        ("oracle", "oracle_report.toml"),
    ] {
        let run = bqft(&[sub, "--config", &cfg, "--out", o]);
        assert_eq!(run.status.code(), Some(0), "{sub}: {}", String::from_utf8_lossy(&run.stderr));
        assert!(out.join(report).is_file(), "{sub}");
    }
    assert!(out.join("trajectories.log").is_file());
    assert!(out.join("config.resolved").is_file());
    assert_eq!(fs::read_dir(out.join("snapshots")).unwrap().count(), 3);
}

#[test]
fn seed_override_reaches_the_log() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), TINY);
    let log = |seed: &str, sub: &str| {
        let out = dir.path().join(sub);
        let run = bqft(&["trajectories", "--config", &cfg, "--seed", seed, "--out", out.to_str().unwrap()]);
        assert_eq!(run.status.code(), Some(0));
        fs::read_to_string(out.join("trajectories.log")).unwrap()
    };
    let (a, b, c) = (log("5", "a"), log("5", "b"), log("6", "c"));
    assert_eq!(a, b);
    assert_ne!(a, c);
    assert!(a.lines().any(|l| l.starts_with("T 0 ")));
    let resolved = fs::read_to_string(dir.path().join("a").join("config.resolved")).unwrap();
    assert!(resolved.contains("seed = 5"), "{resolved}");
}
