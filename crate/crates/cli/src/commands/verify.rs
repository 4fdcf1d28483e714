use renewal_ldp::distributions::Family;
use renewal_ldp::mc::{
    free_energy_check, lln_check, lln_test_functions, standard_phi_specs, tightness_check, McConfig,
};
use renewal_ldp::ratefn::{rate_j1_closed, rate_jf, variational_crosscheck_j1};
use renewal_ldp::{BoundedFn, WaitingLaw};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{config_hash, parse_grid, parse_list, pick, require, threads, FileConfig};
use crate::error::CliError;
use crate::output::{emit, round_floats};
use crate::VerifyArgs;

const SUITES: [&str; 4] = ["crosscheck", "tightness", "lln", "freeenergy"];

#[derive(Serialize)]
struct Settings {
    law: String,
    suite: String,
    grid: Vec<f64>,
    t: f64,
    n: Option<u64>,
    tilts: Vec<f64>,
    seed: Option<u64>,
}

struct Run<'a> {
    law: &'a WaitingLaw,
    seed: u64,
    n: Option<u64>,
    threads: usize,
}

impl Run<'_> {
    fn cfg(&self, default_n: u64, offset: u64) -> McConfig {
        McConfig::new(self.n.unwrap_or(default_n), self.seed.wrapping_add(offset)).with_threads(self.threads)
    }
}

fn close(a: f64, b: f64) -> bool {
    if a.is_infinite() || b.is_infinite() {
        return a == b;
    }
    (a - b).abs() <= 1e-6 * a.abs().max(b.abs()) + 1e-9
}

fn crosscheck(law: &WaitingLaw, grid: &[f64]) -> Result<Value, CliError> {
    let mut rows = Vec::new();
    for &m in grid {
        let contracted = rate_jf(law, &BoundedFn::one(), m)?;
        let closed = rate_j1_closed(law, m)?;
        let v = variational_crosscheck_j1(law, m)?;
        let pass = close(contracted, closed) && close(contracted, v.value);
        rows.push(json!({
            "m": m, "rate_jf": contracted, "closed_form": closed,
            "variational": v.value, "alpha": v.alpha, "pass": pass,
        }));
    }
    let pass = rows.iter().all(|r| r["pass"] == true);
    Ok(json!({ "law": law.to_string(), "rows": rows, "pass": pass }))
}

fn lln(run: &Run, t: f64, tilts: &[f64]) -> Result<Value, CliError> {
    let rate = match run.law.family() {
        Family::Exponential { rate } => *rate,
        _ => return Err(CliError::Config("the lln suite has closed-form limits for exp(λ) laws only".into())),
    };
    let mut reports = Vec::new();
    for (i, &c) in tilts.iter().enumerate() {
        if !(c < rate) {
            return Err(CliError::Config(format!("tilt {c} is not below ξ = {rate}")));
        }
        let tilted = WaitingLaw::exponential(rate - c)?;
        let r = lln_check(&tilted, &lln_test_functions(rate - c), t, &run.cfg(500, 100 + i as u64))?;
        reports.push(json!({ "tilt": c, "report": r }));
    }
    let pass = reports.iter().all(|r| r["report"]["pass"] == true);
    Ok(json!({ "runs": reports, "pass": pass }))
}

fn freeenergy(run: &Run) -> Result<Value, CliError> {
    let mut reports = Vec::new();
    for (i, spec) in standard_phi_specs(run.law)?.iter().enumerate() {
        let r = free_energy_check(run.law, spec, &[5.0, 10.0, 20.0], &run.cfg(10_000, 200 + i as u64))?;
        reports.push(serde_json::to_value(r).expect("report serializes"));
    }
    let pass = reports.iter().all(|r| r["pass"] == true);
    Ok(json!({ "reports": reports, "pass": pass }))
}

pub fn run(args: &VerifyArgs, file: &FileConfig) -> Result<(), CliError> {
    let law = super::law(&args.common, file)?;
    let suite = require(pick(&args.suite, &file.suite), "suite")?;
    let suites: Vec<&str> = match suite.as_str() {
        "all" => SUITES.to_vec(),
        s if SUITES.contains(&s) => vec![s],
        other => return Err(CliError::Config(format!("unknown suite `{other}`; expected one of {SUITES:?} or all"))),
    };
    let grid = parse_grid(&pick(&args.grid, &file.grid).unwrap_or_else(|| "0.1:3:30".into()))?;
    let t = match parse_list(&pick(&args.t, &file.t).unwrap_or_else(|| "10000".into()))?.as_slice() {
        [t] if *t > 0.0 => *t,
        _ => return Err(CliError::Config("verify takes one positive horizon `t`".into())),
    };
    let tilts = parse_list(&pick(&args.tilts, &file.tilts).unwrap_or_else(|| "0,-0.5".into()))?;
    let n = pick(&args.n, &file.n);
    let random = suites.iter().any(|s| *s != "crosscheck");
    let seed = pick(&args.seed, &file.seed);
    let seed = if random { Some(require(seed, "seed")?) } else { seed };
    let workers = threads(pick(&args.threads, &file.threads))?;

    let settings = Settings { law: law.to_string(), suite: suite.clone(), grid: grid.clone(), t, n, tilts: tilts.clone(), seed };
    let hash = config_hash("verify", &settings);
    let run = Run { law: &law, seed: seed.unwrap_or(0), n, threads: workers };

    let mut results = serde_json::Map::new();
    for s in &suites {
        let v = match *s {
            "crosscheck" => crosscheck(&law, &grid)?,
            "tightness" => {
                let r = tightness_check(&law, &[0.01, 2.0, 3.0], &[10.0, 20.0], &run.cfg(100_000, 0))?;
                serde_json::to_value(r).expect("report serializes")
            }
            "lln" if suites.len() > 1 && !matches!(law.family(), Family::Exponential { .. }) => {
                json!({ "skipped": "closed-form limits exist for exp(λ) laws only", "pass": true })
            }
            "lln" => lln(&run, t, &tilts)?,
            _ => freeenergy(&run)?,
        };
        results.insert(s.to_string(), v);
    }
    let failed: Vec<String> = results.iter().filter(|(_, v)| v["pass"] != true).map(|(k, _)| k.clone()).collect();
    let report = json!({
        "command": "verify",
        "config": hash,
        "seed": seed,
        "suite": suite,
        "pass": failed.is_empty(),
        "failed": failed,
        "results": results,
    });
    let body = serde_json::to_string_pretty(&round_floats(report)).expect("json renders");
    let text = format!("{body}\n");
    emit(super::out(&args.common, file).as_deref(), &text)?;
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Check(failed.join(", ")))
    }
}
