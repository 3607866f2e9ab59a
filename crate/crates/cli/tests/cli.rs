//! End-to-end tests of the `horseshoe` binary: flag handling, config
//! ingestion, artifact layout, exit codes, and byte-level
//! reproducibility.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_horseshoe"))
}

fn temp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("horseshoe-cli-{tag}-{}", std::process::id()));
    if dir.exists() {
        fs::remove_dir_all(&dir).unwrap();
    }
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

/// A deconv1d configuration small enough to sample in milliseconds.
const TINY: &str = "\
problem = deconv1d
n = 32
ns = 20
nb = 10
nt = 1
seed = 5
";

const ARTIFACTS_1D: [&str; 11] = [
    "phantom.csv",
    "data.csv",
    "summary.json",
    "x_mean.csv",
    "x_median.csv",
    "x_std.csv",
    "w_mean.csv",
    "chain_sigma.csv",
    "chain_tau.csv",
    "cgls_iters.csv",
    "report.txt",
];

fn assert_artifacts(dir: &Path) {
    for name in ARTIFACTS_1D {
        assert!(dir.join(name).exists(), "missing artifact {name}");
    }
}

#[test]
fn help_lists_the_interface() {
    let out = run(&["--help"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for flag in [
        "--problem", "--config", "--seed", "--strategy", "--tol", "--nmax", "--ns", "--nb",
        "--nt", "--out", "--chains",
    ] {
        assert!(text.contains(flag), "--help does not mention {flag}");
    }
}

#[test]
fn tiny_run_writes_all_artifacts_and_exits_zero() {
    let dir = temp_dir("tiny");
    let cfg_path = dir.join("run.cfg");
    fs::write(&cfg_path, TINY).unwrap();
    let out_dir = dir.join("out");
    let out = run(&[
        "--config",
        cfg_path.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert_artifacts(&out_dir);
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("relerr(mean)"));
    fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn identical_invocations_reproduce_artifacts_byte_for_byte() {
    let dir = temp_dir("repro");
    let cfg_path = dir.join("run.cfg");
    fs::write(&cfg_path, TINY).unwrap();
    let out_a = dir.join("a");
    let out_b = dir.join("b");
    for out_dir in [&out_a, &out_b] {
        let out = run(&[
            "--config",
            cfg_path.to_str().unwrap(),
            "--out",
            out_dir.to_str().unwrap(),
        ]);
        assert!(out.status.success());
    }
    for name in ARTIFACTS_1D {
        let a = fs::read(out_a.join(name)).unwrap();
        let b = fs::read(out_b.join(name)).unwrap();
        assert_eq!(a, b, "artifact {name} differs between identical runs");
    }
    // A different seed must change the data-dependent artifacts.
    let out_c = dir.join("c");
    let out = run(&[
        "--config",
        cfg_path.to_str().unwrap(),
        "--seed",
        "6",
        "--out",
        out_c.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let a = fs::read(out_a.join("x_mean.csv")).unwrap();
    let c = fs::read(out_c.join("x_mean.csv")).unwrap();
    assert_ne!(a, c, "different seeds produced identical posterior means");
    fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn flags_override_config_values() {
    let dir = temp_dir("override");
    let cfg_path = dir.join("run.cfg");
    fs::write(&cfg_path, TINY).unwrap();
    let out_dir = dir.join("out");
    let out = run(&[
        "--config",
        cfg_path.to_str().unwrap(),
        "--seed",
        "99",
        "--ns",
        "15",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let summary = fs::read_to_string(out_dir.join("summary.json")).unwrap();
    let parsed: serde_json::Value = serde_json::from_str(&summary).unwrap();
    assert_eq!(parsed["seed"], 99);
    assert_eq!(parsed["n_samples"], 15);
    fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn config_errors_exit_two_with_a_message() {
    let dir = temp_dir("badcfg");
    let cfg_path = dir.join("bad.cfg");
    fs::write(&cfg_path, "problem = deconv1d\nwavelength = 3\n").unwrap();
    let out = run(&["--config", cfg_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("wavelength"), "stderr was: {stderr}");

    let out = run(&["--problem", "deconv1d", "--strategy", "banana"]);
    assert_eq!(out.status.code(), Some(2));

    let out = run(&["--config", dir.join("absent.cfg").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn independent_chains_write_separate_directories() {
    let dir = temp_dir("chains");
    let cfg_path = dir.join("run.cfg");
    fs::write(&cfg_path, TINY).unwrap();
    let out_dir = dir.join("out");
    let out = run(&[
        "--config",
        cfg_path.to_str().unwrap(),
        "--chains",
        "2",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert_artifacts(&out_dir.join("chain0"));
    assert_artifacts(&out_dir.join("chain1"));
    // Chains differ only in seed; their draws must not coincide.
    let a = fs::read(out_dir.join("chain0/x_mean.csv")).unwrap();
    let b = fs::read(out_dir.join("chain1/x_mean.csv")).unwrap();
    assert_ne!(a, b);
    // Chain 0 of a multi-chain run reproduces the single-chain run.
    let single = dir.join("single");
    let out = run(&[
        "--config",
        cfg_path.to_str().unwrap(),
        "--out",
        single.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let c = fs::read(single.join("x_mean.csv")).unwrap();
    assert_eq!(a, c);
    fs::remove_dir_all(&dir).unwrap();
}
