//! Monte Carlo estimates of `−(1/t) log P(event)` for counting and
//! cumulative events, and checks of the exponential bounds behind the LDP.
//!
//! Every estimator splits its samples over [`SHARDS`] independent random
//! streams and reduces them in shard order, so results depend on the seed
//! only and not on the number of worker threads.

mod checks;
mod estimators;

use std::fmt;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::fmt_sig;
use crate::rng::{stream, Stream};

pub use checks::{
    admissible_threshold, free_energy_check, standard_phi_specs, lln_check, lln_test_functions, tightness_check, FreeEnergyReport, FreeEnergyRow, LlnReport,
    LlnRow, PhiSpec, TightnessReport, TightnessRow,
};
pub use estimators::{cumulative_ldp, estimate, is_ldp_heavy, is_ldp_light, naive_ldp, HEAD_PADDING};

/// Number of independent random streams an estimate is split over.
pub const SHARDS: u64 = 64;

/// Smallest sample size accepted by the estimators.
pub const MIN_SAMPLES: u64 = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum EventKind {
    /// `|(N_t − 1)/t − m| ≤ δ`.
    CountBand,
    /// `N_t − 1 ≥ ⌈mt⌉`, i.e. `S_⌈mt⌉ ≤ t`.
    CountUpper,
    /// `|C_t/t − m| ≤ δ`.
    CumulBand,
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EventKind::CountBand => "COUNT_BAND",
            EventKind::CountUpper => "COUNT_UPPER",
            EventKind::CumulBand => "CUMUL_BAND",
        })
    }
}

/// A scalar rare event on the renewal path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Event {
    pub kind: EventKind,
    pub m: f64,
    pub delta: f64,
}

impl Event {
    pub fn count_band(m: f64, delta: f64) -> Result<Self> {
        Self::checked(EventKind::CountBand, m, delta)
    }

    pub fn count_upper(m: f64) -> Result<Self> {
        Self::checked(EventKind::CountUpper, m, 0.0)
    }

    pub fn cumul_band(m: f64, delta: f64) -> Result<Self> {
        Self::checked(EventKind::CumulBand, m, delta)
    }

    fn checked(kind: EventKind, m: f64, delta: f64) -> Result<Self> {
        if !(m >= 0.0 && m.is_finite() && delta >= 0.0 && delta.is_finite()) {
            return Err(Error::InvalidArgument(format!("bad event parameters m = {m}, δ = {delta}")));
        }
        if kind == EventKind::CountUpper && !(m > 0.0) {
            return Err(Error::InvalidArgument("an upper count event needs m > 0".into()));
        }
        Ok(Self { kind, m, delta })
    }

    /// Parses `count:m:δ`, `upper:m` or `cumul:m:δ`.
    pub fn parse(spec: &str) -> Result<Self> {
        let bad = |reason: &str| Error::Parse { spec: spec.to_string(), reason: reason.to_string() };
        let parts: Vec<&str> = spec.trim().split(':').map(str::trim).collect();
        let num = |s: &str| s.parse::<f64>().map_err(|_| bad("expected a number"));
        match parts.as_slice() {
            ["count", m, d] => Self::count_band(num(m)?, num(d)?),
            ["cumul", m, d] => Self::cumul_band(num(m)?, num(d)?),
            ["upper", m] => Self::count_upper(num(m)?),
            _ => Err(bad("expected count:m:δ, upper:m or cumul:m:δ")),
        }
    }

    /// Whether a path with `completed = N_t − 1` renewals and reward `c_t`
    /// lies in the event.
    pub fn contains(&self, t: f64, completed: u64, c_t: f64) -> bool {
        match self.kind {
            EventKind::CountBand => self.in_band(t, completed as f64),
            EventKind::CountUpper => completed >= self.upper_index(t),
            EventKind::CumulBand => self.in_band(t, c_t),
        }
    }

    /// Closed band `|x − mt| ≤ δt`, compared on the count scale with a
    /// rounding allowance so that integer end points are included.
    fn in_band(&self, t: f64, x: f64) -> bool {
        let center = self.m * t;
        (x - center).abs() <= self.delta * t + 1e-9 * center.abs().max(1.0)
    }

    /// `⌈mt⌉`.
    pub fn upper_index(&self, t: f64) -> u64 {
        (self.m * t).ceil().max(1.0) as u64
    }
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            EventKind::CountBand => write!(f, "count:{}:{}", fmt_sig(self.m), fmt_sig(self.delta)),
            EventKind::CountUpper => write!(f, "upper:{}", fmt_sig(self.m)),
            EventKind::CumulBand => write!(f, "cumul:{}:{}", fmt_sig(self.m), fmt_sig(self.delta)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Sampler {
    Naive,
    Tilt,
    TiltBigJump,
}

impl Sampler {
    /// `naive`, `tilt` or `bigjump`.
    pub fn parse(name: &str) -> Result<Self> {
        match name.trim() {
            "naive" => Ok(Sampler::Naive),
            "tilt" => Ok(Sampler::Tilt),
            "bigjump" => Ok(Sampler::TiltBigJump),
            other => Err(Error::Parse { spec: other.to_string(), reason: "expected naive, tilt or bigjump".into() }),
        }
    }
}

impl fmt::Display for Sampler {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sampler::Naive => "NAIVE",
            Sampler::Tilt => "TILT",
            Sampler::TiltBigJump => "TILT_BIG_JUMP",
        })
    }
}

/// Sample size, seed and worker count of a Monte Carlo run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct McConfig {
    pub n: u64,
    pub seed: u64,
    pub threads: usize,
}

impl McConfig {
    pub fn new(n: u64, seed: u64) -> Self {
        Self { n, seed, threads: 1 }
    }

    pub fn with_threads(mut self, threads: usize) -> Self {
        self.threads = threads.max(1);
        self
    }
}

/// A probability estimate with its implied rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LdpEstimate {
    pub t: f64,
    pub event: Event,
    pub sampler: Sampler,
    pub n: u64,
    pub p_hat: f64,
    pub std_err: f64,
    /// `−log(p_hat)/t`, or the lower bound `log(n)/t` when censored.
    pub rate_hat: f64,
    /// No sample hit the event.
    pub censored: bool,
}

impl LdpEstimate {
    pub const CSV_HEADER: &'static str = "t,kind,m,delta,sampler,n,p_hat,std_err,rate_hat,censored";

    pub(crate) fn from_moments(t: f64, event: Event, sampler: Sampler, acc: &Moments) -> Self {
        let n = acc.n as f64;
        let p_hat = (acc.sum / n).clamp(0.0, 1.0);
        let var = (acc.sum_sq / n - (acc.sum / n).powi(2)).max(0.0);
        let std_err = (var / n).sqrt();
        let censored = acc.hits == 0;
        let rate_hat = if censored { n.ln() / t } else { (-p_hat.ln() / t).max(0.0) };
        Self { t, event, sampler, n: acc.n, p_hat, std_err, rate_hat, censored }
    }

    /// One CSV row in the order of [`Self::CSV_HEADER`].
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            fmt_sig(self.t),
            self.event.kind,
            fmt_sig(self.event.m),
            fmt_sig(self.event.delta),
            self.sampler,
            self.n,
            fmt_sig(self.p_hat),
            fmt_sig(self.std_err),
            fmt_sig(self.rate_hat),
            self.censored
        )
    }
}

/// Header plus one row per estimate.
pub fn estimates_csv(rows: &[LdpEstimate]) -> String {
    let mut out = String::from(LdpEstimate::CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(out, "{}", r.csv_row());
    }
    out
}

/// Running sums of sample weights.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub(crate) struct Moments {
    pub n: u64,
    pub hits: u64,
    pub sum: f64,
    pub sum_sq: f64,
}

impl Moments {
    pub fn push(&mut self, w: f64) {
        self.n += 1;
        if w > 0.0 {
            self.hits += 1;
            self.sum += w;
            self.sum_sq += w * w;
        }
    }

    pub fn merge(&mut self, o: &Moments) {
        self.n += o.n;
        self.hits += o.hits;
        self.sum += o.sum;
        self.sum_sq += o.sum_sq;
    }
}

/// Runs `job(shard, count, rng)` over all shards and returns the per-shard
/// results in shard order.
pub(crate) fn run_shards<T, F>(cfg: &McConfig, job: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64, u64, &mut Stream) -> Result<T> + Sync,
{
    if cfg.n < 1 {
        return Err(Error::InvalidArgument("sample size must be positive".into()));
    }
    let base = cfg.n / SHARDS;
    let extra = cfg.n % SHARDS;
    let work = |k: u64| {
        let count = base + u64::from(k < extra);
        let mut rng = stream(cfg.seed, k);
        job(k, count, &mut rng)
    };
    let results: Vec<Result<T>> = if cfg.threads <= 1 {
        (0..SHARDS).map(work).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.threads)
            .build()
            .map_err(|e| Error::InvalidArgument(format!("cannot start worker pool: {e}")))?;
        pool.install(|| (0..SHARDS).into_par_iter().map(work).collect())
    };
    results.into_iter().collect()
}

/// Sums weights produced by `sample` over `cfg.n` draws.
pub(crate) fn accumulate<F>(cfg: &McConfig, sample: F) -> Result<Moments>
where
    F: Fn(&mut Stream) -> Result<f64> + Sync,
{
    let parts = run_shards(cfg, |_, count, rng| {
        let mut m = Moments::default();
        for _ in 0..count {
            m.push(sample(rng)?);
        }
        Ok(m)
    })?;
    let mut total = Moments::default();
    for p in &parts {
        total.merge(p);
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn event_parsing() {
        let e = Event::parse("count:2:0.05").unwrap();
        assert_eq!((e.kind, e.m, e.delta), (EventKind::CountBand, 2.0, 0.05));
        assert_eq!(Event::parse("upper:1.5").unwrap().kind, EventKind::CountUpper);
        assert_eq!(Event::parse("cumul:0.6:0.1").unwrap().to_string(), "cumul:0.6:0.1");
        assert!(Event::parse("count:2").is_err());
        assert!(Event::parse("upper:0").is_err());
        assert!(Event::parse("band:1:1").is_err());
    }

    #[test]
    fn event_membership() {
        let band = Event::count_band(1.0, 0.1).unwrap();
        assert!(band.contains(10.0, 9, 0.0));
        assert!(!band.contains(10.0, 8, 0.0));
        let wide = Event::count_band(2.0, 0.1).unwrap();
        assert!(wide.contains(10.0, 19, 0.0) && wide.contains(10.0, 21, 0.0));
        let up = Event::count_upper(1.5).unwrap();
        assert_eq!(up.upper_index(20.0), 30);
        assert!(up.contains(20.0, 30, 0.0) && !up.contains(20.0, 29, 0.0));
    }

    #[test]
    fn thread_count_does_not_change_results() {
        let job = |rng: &mut Stream| Ok(rng.random::<f64>());
        let a = accumulate(&McConfig::new(10_000, 4), job).unwrap();
        let b = accumulate(&McConfig::new(10_000, 4).with_threads(4), job).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.n, 10_000);
    }

    #[test]
    fn csv_row_layout() {
        let acc = Moments { n: 4, hits: 0, sum: 0.0, sum_sq: 0.0 };
        let e = LdpEstimate::from_moments(2.0, Event::count_band(2.0, 0.1).unwrap(), Sampler::Naive, &acc);
        assert!(e.censored);
        assert_eq!(e.csv_row(), "2,COUNT_BAND,2,0.1,NAIVE,4,0,0,0.69314718056,true");
        assert!(estimates_csv(&[e]).starts_with(LdpEstimate::CSV_HEADER));
    }
}
