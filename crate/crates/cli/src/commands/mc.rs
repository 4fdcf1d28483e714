use renewal_ldp::mc::{estimate, estimates_csv, Event, McConfig, Sampler};
use serde::Serialize;

use crate::config::{config_hash, header, parse_list, pick, require, threads, FileConfig};
use crate::error::CliError;
use crate::output::emit;
use crate::McArgs;

#[derive(Serialize)]
struct Settings {
    law: String,
    event: String,
    t: Vec<f64>,
    n: u64,
    sampler: String,
    f: String,
    seed: u64,
}

pub fn run(args: &McArgs, file: &FileConfig) -> Result<(), CliError> {
    let law = super::law(&args.common, file)?;
    let event = Event::parse(&require(pick(&args.event, &file.event), "event")?)?;
    let ts = super::positive(parse_list(&require(pick(&args.t, &file.t), "t")?)?, "t")?;
    let n = pick(&args.n, &file.n).unwrap_or(100_000);
    let sampler = Sampler::parse(&pick(&args.sampler, &file.sampler).unwrap_or_else(|| "naive".into()))?;
    let seed = require(pick(&args.seed, &file.seed), "seed")?;
    let f = super::reward(&args.f, file)?;
    let workers = threads(pick(&args.threads, &file.threads))?;

    let settings = Settings {
        law: law.to_string(),
        event: event.to_string(),
        t: ts.clone(),
        n,
        sampler: sampler.to_string(),
        f: f.to_string(),
        seed,
    };
    let hash = config_hash("mc", &settings);
    // each horizon gets its own seed so rows are independent
    let mut rows = Vec::with_capacity(ts.len());
    for (i, &t) in ts.iter().enumerate() {
        let cfg = McConfig::new(n, seed.wrapping_add(i as u64)).with_threads(workers);
        rows.push(estimate(&law, &f, event, t, &cfg, sampler)?);
    }
    let text = format!("{}{}", header("mc", &hash, Some(seed)), estimates_csv(&rows));
    emit(super::out(&args.common, file).as_deref(), &text)
}
