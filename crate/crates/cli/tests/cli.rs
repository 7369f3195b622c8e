//! End-to-end checks of the harness through the real binary: exit-status
//! contract, constraint naming, reproducibility, and artifact schemas.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fbm-lattice"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

const SMALL: &str = "[model]\nnodes = 6\n[noise]\ngrid_exp = 6\nt_max = 1.0\nseeds = 1,2\n";

#[test]
fn identical_configs_produce_byte_identical_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "run.conf", SMALL);
    for out in ["a", "b"] {
        let output = run(&["--config", &config, "--out", out, "fbm"], dir.path());
        assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));
    }
    for name in ["noise_1.csv", "noise_2.csv", "fbm_summary.txt", "run_config.txt"] {
        let a = fs::read(dir.path().join("a").join(name)).unwrap();
        let b = fs::read(dir.path().join("b").join(name)).unwrap();
        assert_eq!(a, b, "artifact {name} differs between identical runs");
    }
    let noise = fs::read_to_string(dir.path().join("a/noise_1.csv")).unwrap();
    assert!(noise.starts_with("# hurst=0.75 sigma_digest="));
    assert_eq!(noise.lines().nth(1).unwrap(), "t,node_0,node_1,node_2,node_3,node_4,node_5");
    // two-sided window at 2^-6: 2*64+1 samples plus two header lines
    assert_eq!(noise.lines().count(), 131);
}

#[test]
fn seed_flag_overrides_the_configured_list() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "run.conf", SMALL);
    let output = run(&["--config", &config, "--out", "o", "--seed", "9", "fbm"], dir.path());
    assert!(output.status.success());
    assert!(dir.path().join("o/noise_9.csv").exists());
    assert!(!dir.path().join("o/noise_1.csv").exists());
    let echo = fs::read_to_string(dir.path().join("o/run_config.txt")).unwrap();
    assert!(echo.contains("noise.seeds = 9 (--seed override)"), "{echo}");
    assert!(echo.contains("noise.hurst = 0.75 (default)"), "{echo}");
}

#[test]
fn grid_exponent_flag_rewrites_every_grid() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "run.conf", SMALL);
    let output =
        run(&["--config", &config, "--out", "o", "--seed", "1", "--grid-exp", "4", "fbm"], dir.path());
    assert!(output.status.success());
    let noise = fs::read_to_string(dir.path().join("o/noise_1.csv")).unwrap();
    assert_eq!(noise.lines().count(), 35); // 2*16+1 rows + two headers
    assert!(noise.lines().nth(3).unwrap().starts_with("-0.9375,"));
}

#[test]
fn constraint_violations_exit_one_and_name_the_constraint() {
    let dir = tempfile::tempdir().unwrap();
    let bad_hurst = write_config(dir.path(), "h.conf", "[noise]\nhurst = 0.4\n");
    let output = run(&["--config", &bad_hurst, "--out", "o", "fbm"], dir.path());
    assert_eq!(output.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("hurst index must lie in (0.5, 1)"), "{stderr}");

    let bad_eps = write_config(
        dir.path(),
        "e.conf",
        "[stability]\neps_hat = 0.9\nmu = 0.01\n[model]\nlambda = 0.5\n",
    );
    let output = run(&["--config", &bad_eps, "--out", "o", "stability"], dir.path());
    assert_eq!(output.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("eps_hat must lie in (0, 1 - e^(-lambda)) = (0, 0.393469)"), "{stderr}");

    let unknown = write_config(dir.path(), "u.conf", "[noise]\nwavelength = 3\n");
    let output = run(&["--config", &unknown, "--out", "o", "fbm"], dir.path());
    assert_eq!(output.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("line 2: unknown key 'wavelength' in section [noise]"), "{stderr}");
}

#[test]
fn stability_contract_grants_then_denies() {
    let dir = tempfile::tempdir().unwrap();
    let granting = write_config(
        dir.path(),
        "s.conf",
        "[model]\nnodes = 6\n[noise]\ngrid_exp = 6\nseeds = 7\n[stability]\nn_max = 3\n",
    );
    let output = run(&["--config", &granting, "--out", "g", "stability"], dir.path());
    assert_eq!(output.status.code(), Some(0), "{}", String::from_utf8_lossy(&output.stderr));
    let csv = fs::read_to_string(dir.path().join("g/stability_7.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "n,norm_beta,R,R_hat,gronwall_bound,cutoff_active");
    assert_eq!(csv.lines().count(), 4);
    let summary = fs::read_to_string(dir.path().join("g/stability_summary_7.txt")).unwrap();
    assert!(summary.contains("certificate             GRANTED"), "{summary}");

    // an initial norm far outside the admissible ball activates the cut-off
    let denying = write_config(
        dir.path(),
        "d.conf",
        "[model]\nnodes = 6\n[noise]\ngrid_exp = 6\nseeds = 7\n[stability]\nn_max = 3\nx_norm = 5.0\n",
    );
    let output = run(&["--config", &denying, "--out", "d", "stability"], dir.path());
    assert_eq!(output.status.code(), Some(2));
    let summary = fs::read_to_string(dir.path().join("d/stability_summary_7.txt")).unwrap();
    assert!(summary.contains("certificate             NOT GRANTED"), "{summary}");
}

#[test]
fn solve_and_cocycle_pass_their_gates() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "r.conf",
        "[model]\nnodes = 6\n[noise]\ngrid_exp = 6\nseeds = 3\n[solver]\nhorizon = 0.5\n\
         [cocycle]\nt = 0.25\ntau = 0.25\n",
    );
    let output = run(&["--config", &config, "--out", "s", "solve"], dir.path());
    assert_eq!(output.status.code(), Some(0), "{}", String::from_utf8_lossy(&output.stderr));
    let csv = fs::read_to_string(dir.path().join("s/solution_3.csv")).unwrap();
    assert_eq!(csv.lines().count(), 34); // 32 steps + initial row + header
    assert!(csv.lines().next().unwrap().starts_with("t,node_0"));

    let output = run(&["--config", &config, "--out", "c", "cocycle"], dir.path());
    assert_eq!(output.status.code(), Some(0), "{}", String::from_utf8_lossy(&output.stderr));
    let csv = fs::read_to_string(dir.path().join("c/cocycle.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "seed,t,tau,discrepancy,direct_norm");
}

#[test]
fn appendix_prints_full_pass_counts() {
    let dir = tempfile::tempdir().unwrap();
    let output = run(&["--out", "a", "appendix"], dir.path());
    assert_eq!(output.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.contains("gronwall product bound      1001/1001"), "{stdout}");
    assert!(stdout.contains("exponential domination      400/400"), "{stdout}");
    assert!(stdout.contains("preimage radius inequalities 9/9"), "{stdout}");
}

#[test]
fn integrate_gates_the_calculus_identities() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "i.conf",
        "[model]\nnodes = 6\n[noise]\ngrid_exp = 6\nt_max = 1.0\nseeds = 5\n",
    );
    let output = run(&["--config", &config, "--out", "i", "integrate"], dir.path());
    assert_eq!(output.status.code(), Some(0), "{}", String::from_utf8_lossy(&output.stderr));
    let csv = fs::read_to_string(dir.path().join("i/integrate.csv")).unwrap();
    assert_eq!(
        csv.lines().next().unwrap(),
        "seed,left_sum,fractional,backend_gap,residual_fractional,residual_sums"
    );
    assert_eq!(csv.lines().count(), 2);
}
