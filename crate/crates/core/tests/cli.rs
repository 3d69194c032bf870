use std::fs;
use std::process::Command;

fn airisk() -> Command {
    Command::new(env!("CARGO_BIN_EXE_airisk"))
}

#[test]
fn threshold_reproduces_the_four_cases() {
    let out = airisk().arg("threshold").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let minutes: Vec<f64> = text
        .lines()
        .skip(1)
        .map(|l| l.rsplit(',').next().unwrap().parse().unwrap())
        .collect();
    let expected = [5.68, 75.0, 2.53, 33.3];
    for (m, e) in minutes.iter().zip(expected) {
        assert!((m - e).abs() / e < 0.01, "{m} vs {e}");
    }
    let echo = String::from_utf8(out.stderr).unwrap();
    assert!(echo.contains("# nu = 10.0"));
}

#[test]
fn validate_passes_and_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("v.csv");
    let out = airisk()
        .args(["validate", "--grid-cells", "128", "-o"])
        .arg(&path)
        .output()
        .unwrap();
    let summary = String::from_utf8(out.stderr).unwrap();
    assert!(out.status.success(), "{summary}");
    assert!(summary.contains("PASS profile_l2"));
    assert!(summary.contains("PASS steady_mass"));
    assert!(summary.contains("PASS half_life"));
    assert!(fs::read_to_string(&path).unwrap().starts_with("r_m,c_numeric,c_analytic,rel_err\n"));
}

#[test]
fn validate_reports_failed_checks() {
    let out = airisk()
        .args(["validate", "--grid-cells", "128", "--boundary", "absorbing"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stderr).unwrap().contains("FAIL steady_mass"));
}

#[test]
fn validate_non_convergence_exit_code() {
    let out = airisk()
        .args(["validate", "--grid-cells", "128", "--t-end", "50"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn abm_writes_results_and_echo() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.toml");
    fs::write(&cfg, "[simulation]\nsteps = 60\n[sweep]\npopulation = [30, 70]\n").unwrap();
    let out_dir = dir.path().join("out");
    let run = |threads: &str| {
        let out = airisk()
            .args(["abm", "--replications", "20", "--seed", "3", "--event-log", "--threads", threads, "--config"])
            .arg(&cfg)
            .arg("--output-dir")
            .arg(&out_dir)
            .output()
            .unwrap();
        assert!(out.status.success());
        fs::read(out_dir.join("aggregate.csv")).unwrap()
    };
    let one = run("1");
    let two = run("2");
    assert_eq!(one, two);
    let text = String::from_utf8(one).unwrap();
    assert_eq!(text.lines().count(), 3);
    let echo = fs::read_to_string(out_dir.join("resolved.toml")).unwrap();
    assert!(echo.contains("base_seed = 3"));
    assert!(echo.contains("replications = 20"));
    assert!(out_dir.join("events_mu0.05_n30_alpha9_p0.5.csv").exists());
}

#[test]
fn config_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "[simulation]\npopulation = 5\ninitially_infected = 9\n").unwrap();
    let out = airisk().args(["abm", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr).unwrap().contains("simulation.initially_infected"));
}

#[test]
fn risk_immunity_sweep_orders_curves() {
    let out = airisk()
        .args(["risk", "--rate", "66", "--infectious-dose", "50,100,200", "--t-max", "30"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let last = |n_b: &str| -> f64 {
        text.lines()
            .rfind(|l| l.contains(&format!("N_b={n_b};")))
            .unwrap()
            .rsplit(',')
            .next()
            .unwrap()
            .parse()
            .unwrap()
    };
    assert!(last("50") > last("100") && last("100") > last("200"));
}
