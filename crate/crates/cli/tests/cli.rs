use std::fs;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_renewal-ldp"));
    c.env_remove("RENEWAL_LDP_THREADS");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// CSV body rows, skipping the provenance comment and the column header.
fn rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn exponential_rate_curve_is_strictly_convex() {
    let o = run(&["rate", "--law", "exp(1)", "--f", "one", "--grid", "0.2:3:50"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let r = rows(&text);
    assert_eq!(r.len(), 50);
    assert!(r.iter().all(|row| row[2] == "STRICT_CONVEX"));
    for row in &r {
        let m: f64 = row[0].parse().unwrap();
        let j: f64 = row[1].parse().unwrap();
        let want = 1.0 - m + m * m.ln();
        assert!((j - want).abs() <= 1e-9 * want.max(1e-3), "m={m}: {j} vs {want}");
    }
}

#[test]
fn pareto_rate_vanishes_up_to_the_kink() {
    let o = run(&["rate", "--law", "pareto(2,1)", "--f", "one", "--grid", "0.05:2:40"]);
    assert!(o.status.success());
    for row in rows(&stdout(&o)) {
        let m: f64 = row[0].parse().unwrap();
        if m <= 0.5 + 1e-12 {
            assert_eq!(row[2], "ZERO", "m={m}");
        } else {
            assert_ne!(row[2], "ZERO", "m={m}");
        }
    }
    let summary = String::from_utf8(o.stderr).unwrap();
    assert!(summary.contains("kink=0.5"), "{summary}");
}

#[test]
fn deterministic_law_single_point() {
    let o = run(&["rate", "--law", "det(1)", "--f", "one", "--grid", "1:1:1"]);
    assert!(o.status.success());
    assert_eq!(rows(&stdout(&o)), vec![vec!["1", "0", "ZERO"]]);
}

#[test]
fn scan_reports_the_kink_with_the_curve_in_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("scan.csv");
    let o = run(&["scan", "--law", "pareto(3,1)", "--grid", "0.1:1:10", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("kink=0.666666666667"), "{}", stdout(&o));
    let text = fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("# renewal-ldp scan config="));
    assert_eq!(rows(&text).len(), 10);
}

#[test]
fn simulate_deterministic_law() {
    let o = run(&["simulate", "--law", "det(1)", "--t", "2.5", "--seed", "7"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.lines().next().unwrap().ends_with("seed=7"));
    let r = rows(&text);
    assert_eq!(&r[0][..5], &["2.5", "3", "0.5", "0.5", "2"]);
}

#[test]
fn simulated_gaps_stay_on_the_atoms() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("path.csv");
    let o = run(&["simulate", "--law", "atoms(1:0.5,2:0.5)", "--t", "10", "--seed", "3", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let arrivals: Vec<f64> = rows(&fs::read_to_string(&out).unwrap()).iter().map(|r| r[1].parse().unwrap()).collect();
    assert!(!arrivals.is_empty());
    let mut prev = 0.0;
    for s in arrivals {
        let gap: f64 = s - prev;
        assert!((gap - 1.0).abs() < 1e-12 || (gap - 2.0).abs() < 1e-12, "gap {gap}");
        prev = s;
    }
}

#[test]
fn simulate_is_reproducible() {
    let args = ["simulate", "--law", "exp(1)", "--t", "100", "--seed", "1", "--f", "min1"];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let c = run(&["simulate", "--law", "exp(1)", "--t", "100", "--seed", "2", "--f", "min1"]);
    assert_ne!(rows(&stdout(&a)), rows(&stdout(&c)));
}

#[test]
fn impossible_band_is_censored() {
    let o = run(&["mc", "--law", "det(1)", "--event", "count:2:0.1", "--t", "10", "--n", "2000", "--seed", "1"]);
    assert!(o.status.success());
    let r = rows(&stdout(&o));
    assert_eq!(r.len(), 1);
    assert_eq!(r[0][6], "0");
    assert_eq!(r[0][9], "true");
}

#[test]
fn mc_output_does_not_depend_on_threads() {
    let base = ["mc", "--law", "exp(1)", "--event", "count:2:0.05", "--t", "50,100", "--n", "20000", "--sampler", "tilt", "--seed", "5"];
    let one = run(&[&base[..], &["--threads", "1"]].concat());
    let four = run(&[&base[..], &["--threads", "4"]].concat());
    let env = bin().args(base).env("RENEWAL_LDP_THREADS", "3").output().unwrap();
    assert!(one.status.success());
    assert_eq!(one.stdout, four.stdout);
    assert_eq!(one.stdout, env.stdout);
    assert_eq!(rows(&stdout(&one)).len(), 2);
}

#[test]
fn tilted_mc_matches_the_counting_rate() {
    let o = run(&["mc", "--law", "exp(1)", "--event", "count:2:0.05", "--t", "100", "--n", "100000", "--sampler", "tilt", "--seed", "5"]);
    assert!(o.status.success());
    let rate: f64 = rows(&stdout(&o))[0][8].parse().unwrap();
    let j = 2.0 * 2f64.ln() - 1.0;
    assert!((rate - j).abs() <= 0.1 * j, "{rate}");
}

#[test]
fn verify_suites_pass_on_exponential() {
    for (suite, extra) in [("crosscheck", vec![]), ("tightness", vec!["--seed", "1"]), ("lln", vec!["--seed", "1", "--t", "10000"])] {
        let o = run(&[&["verify", "--suite", suite, "--law", "exp(1)"][..], &extra[..]].concat());
        assert!(o.status.success(), "{suite}: {}", String::from_utf8_lossy(&o.stderr));
        let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
        assert_eq!(v["pass"], true);
        assert_eq!(v["command"], "verify");
        assert!(v["config"].as_str().unwrap().len() == 64);
    }
}

#[test]
fn exit_codes() {
    let code = |args: &[&str]| run(args).status.code().unwrap();
    assert_eq!(code(&["rate", "--law", "nonsense(1)", "--grid", "1:2:3"]), 2);
    assert_eq!(code(&["rate", "--law", "exp(1)", "--grid", "2:1:3"]), 2);
    assert_eq!(code(&["simulate", "--law", "exp(1)", "--t", "5"]), 2);
    assert_eq!(code(&["mc", "--law", "exp(1)", "--event", "count:2", "--t", "5", "--seed", "1"]), 2);
    assert_eq!(code(&["frobnicate"]), 2);
    assert_eq!(code(&["verify", "--suite", "lln", "--law", "gamma(2,1)", "--seed", "1"]), 2);
    assert_eq!(code(&["rate", "--law", "exp(1)", "--grid", "1:2:3"]), 0);
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, "law = \"det(1)\"\nt = 2.5\nseed = 7\n").unwrap();
    let from_file = run(&["--config", cfg.to_str().unwrap(), "simulate"]);
    assert!(from_file.status.success());
    assert_eq!(&rows(&stdout(&from_file))[0][..2], &["2.5", "3"]);
    let flagged = run(&["--config", cfg.to_str().unwrap(), "simulate", "--t", "4.5"]);
    assert_eq!(&rows(&stdout(&flagged))[0][..2], &["4.5", "5"]);
    // same effective config from flags alone hashes the same
    let flags = run(&["simulate", "--law", "det(1)", "--t", "2.5", "--seed", "7"]);
    assert_eq!(from_file.stdout, flags.stdout);

    fs::write(&cfg, "law = \"det(1)\"\nseeds = 7\n").unwrap();
    let bad = run(&["--config", cfg.to_str().unwrap(), "simulate", "--t", "1"]);
    assert_eq!(bad.status.code(), Some(2));
    let msg = String::from_utf8(bad.stderr).unwrap();
    assert!(msg.contains("line 2") && msg.contains("seeds"), "{msg}");
}

#[test]
fn artifacts_carry_config_hash_and_seed() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("mc.csv");
    let o = run(&["mc", "--law", "exp(1)", "--event", "count:1.5:0.1", "--t", "10", "--n", "5000", "--seed", "11", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let text = fs::read_to_string(&out).unwrap();
    let head = text.lines().next().unwrap();
    assert!(head.starts_with("# renewal-ldp mc config=") && head.ends_with("seed=11"), "{head}");
    let other = run(&["mc", "--law", "exp(1)", "--event", "count:1.5:0.1", "--t", "10", "--n", "5001", "--seed", "11"]);
    let other_head = stdout(&other).lines().next().unwrap().to_string();
    assert_ne!(head, other_head);
}
