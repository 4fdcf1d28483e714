use renewal_ldp::numeric::fmt_sig;
use renewal_ldp::renewal::simulate;
use renewal_ldp::rng::stream;
use serde::Serialize;

use crate::config::{config_hash, header, parse_list, pick, require, FileConfig};
use crate::error::CliError;
use crate::output::emit;
use crate::SimulateArgs;

#[derive(Serialize)]
struct Settings {
    law: String,
    t: f64,
    f: String,
    seed: u64,
}

/// Prints `t,N,A,B,C,f` for the path; the arrivals go to `--out` when given.
pub fn run(args: &SimulateArgs, file: &FileConfig) -> Result<(), CliError> {
    let law = super::law(&args.common, file)?;
    let t = match parse_list(&require(pick(&args.t, &file.t), "t")?)?.as_slice() {
        [t] if *t > 0.0 => *t,
        _ => return Err(CliError::Config("simulate takes one positive horizon `t`".into())),
    };
    let seed = require(pick(&args.seed, &file.seed), "seed")?;
    let f = super::reward(&args.f, file)?;
    let settings = Settings { law: law.to_string(), t, f: f.to_string(), seed };
    let hash = config_hash("simulate", &settings);
    let head = header("simulate", &hash, Some(seed));

    let path = simulate(&law, t, &mut stream(seed, 0))?;
    let arrivals = path.arrivals();
    let a = t - path.last_renewal();
    let b = arrivals[arrivals.len() - 1] - t;
    let summary = format!(
        "{head}t,N,A,B,C,f\n{},{},{},{},{},{}\n",
        fmt_sig(t),
        path.counting(),
        fmt_sig(a),
        fmt_sig(b),
        fmt_sig(path.cumulative(&f)),
        f
    );
    emit(None, &summary)?;
    if let Some(out) = super::out(&args.common, file) {
        emit(Some(&out), &format!("{head}{}", path.to_csv()))?;
    }
    Ok(())
}
