use renewal_ldp::numeric::fmt_sig;
use renewal_ldp::ratefn::{affine_scan_f, RateCurve};
use renewal_ldp::BoundedFn;
use serde::Serialize;

use crate::config::{config_hash, header, parse_grid, pick, require, FileConfig};
use crate::error::CliError;
use crate::output::emit;
use crate::{Common, RateArgs, ScanArgs};

#[derive(Serialize)]
struct Settings {
    law: String,
    f: String,
    grid: Vec<f64>,
}

pub fn run(args: &RateArgs, file: &FileConfig) -> Result<(), CliError> {
    let f = super::reward(&args.f, file)?;
    curve("rate", &args.common, &args.grid, f, file)
}

pub fn run_scan(args: &ScanArgs, file: &FileConfig) -> Result<(), CliError> {
    if file.f.as_deref().is_some_and(|f| f != "one") {
        return Err(CliError::Config("scan fixes F ≡ 1; drop `f` from the config".into()));
    }
    curve("scan", &args.common, &args.grid, BoundedFn::one(), file)
}

fn curve(command: &str, common: &Common, grid: &Option<String>, f: BoundedFn, file: &FileConfig) -> Result<(), CliError> {
    let law = super::law(common, file)?;
    let grid = parse_grid(&require(pick(grid, &file.grid), "grid")?)?;
    if grid.windows(2).any(|w| w[1] < w[0]) || grid.iter().any(|m| *m < 0.0) {
        return Err(CliError::Config("grid must be sorted and nonnegative".into()));
    }
    let settings = Settings { law: law.to_string(), f: f.to_string(), grid: grid.clone() };
    let hash = config_hash(command, &settings);
    let curve = affine_scan_f(&law, &f, &grid)?;
    let text = format!("{}{}", header(command, &hash, None), curve.to_csv());
    let out = super::out(common, file);
    emit(out.as_deref(), &text)?;
    let summary = summary(&curve);
    if out.is_some() {
        print!("{summary}");
    } else {
        eprint!("{summary}");
    }
    Ok(())
}

fn summary(curve: &RateCurve) -> String {
    let kink = curve.kink.map_or_else(|| "none".to_string(), fmt_sig);
    format!("xi={} T={} kink={}\n", fmt_sig(curve.xi), fmt_sig(curve.t_limit), kink)
}
