//! Renewal paths and their functionals.
//!
//! With `S_0 = 0` and `S_n = τ_1 + … + τ_n`, the counting index is
//! `N_t = inf{n : S_n > t}`, so `N_t − 1` renewals are completed by time
//! `t`. The empirical measure `μ_t` of the recurrence pair `(A_s, B_s)` is
//! evaluated segment by segment, never on a time mesh.

use std::fmt::Write as _;

use rand::Rng;

use crate::distributions::WaitingLaw;
use crate::error::{Error, Result};
use crate::functions::{BivariateTestFunction, BoundedFn};
use crate::numeric::fmt_sig;
use crate::ratefn::{DeltaMeasure, Pi};

/// Most arrivals a single path may need.
pub const ARRIVAL_BUDGET: u64 = 1_000_000_000;

/// Arrival times `S_1 < … < S_n` covering a horizon: `S_{n−1} ≤ t < S_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct RenewalPath {
    arrivals: Vec<f64>,
    horizon: f64,
}

/// Backward and forward recurrence times at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecurrencePair {
    pub backward: f64,
    pub forward: f64,
}

/// Simulates inter-arrivals from `law` until the horizon `t` is passed.
pub fn simulate<R: Rng + ?Sized>(law: &WaitingLaw, t: f64, rng: &mut R) -> Result<RenewalPath> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::InvalidArgument(format!("horizon must be positive, got {t}")));
    }
    let mut arrivals = Vec::new();
    let mut s = 0.0;
    while s <= t {
        if arrivals.len() as u64 >= ARRIVAL_BUDGET {
            return Err(Error::Budget(ARRIVAL_BUDGET));
        }
        s += law.sample(rng);
        arrivals.push(s);
    }
    Ok(RenewalPath { arrivals, horizon: t })
}

/// Completed renewals `N_t − 1` and their reward `C_t`, without storing the
/// path.
pub fn count_and_reward<R: Rng + ?Sized>(
    law: &WaitingLaw,
    t: f64,
    reward: &BoundedFn,
    rng: &mut R,
) -> Result<(u64, f64)> {
    let mut s = 0.0;
    let mut completed = 0u64;
    let mut c = 0.0;
    loop {
        let tau = law.sample(rng);
        s += tau;
        if s > t {
            return Ok((completed, c));
        }
        completed += 1;
        c += reward.eval(tau);
        if completed >= ARRIVAL_BUDGET {
            return Err(Error::Budget(ARRIVAL_BUDGET));
        }
    }
}

impl RenewalPath {
    /// Validates stored arrivals against the horizon.
    pub fn new(arrivals: Vec<f64>, horizon: f64) -> Result<Self> {
        if !(horizon > 0.0) {
            return Err(Error::InvalidArgument("horizon must be positive".into()));
        }
        let n = arrivals.len();
        if n == 0 || arrivals[0] <= 0.0 || arrivals.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument("arrivals must be positive and increasing".into()));
        }
        if arrivals[n - 1] <= horizon || (n >= 2 && arrivals[n - 2] > horizon) {
            return Err(Error::InvalidArgument(
                "exactly the last arrival must exceed the horizon".into(),
            ));
        }
        Ok(Self { arrivals, horizon })
    }

    pub fn arrivals(&self) -> &[f64] {
        &self.arrivals
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// Inter-arrival times `τ_1, …, τ_{N_t}`.
    pub fn inter_arrivals(&self) -> Vec<f64> {
        let mut prev = 0.0;
        self.arrivals
            .iter()
            .map(|&s| {
                let tau = s - prev;
                prev = s;
                tau
            })
            .collect()
    }

    /// `N_t`, the index of the first arrival beyond the horizon.
    pub fn counting(&self) -> u64 {
        self.arrivals.len() as u64
    }

    /// `S_{N_t − 1}`, the last renewal epoch not after the horizon.
    pub fn last_renewal(&self) -> f64 {
        let n = self.arrivals.len();
        if n >= 2 {
            self.arrivals[n - 2]
        } else {
            0.0
        }
    }

    /// `(A_s, B_s)` for `0 ≤ s < t`.
    pub fn recurrence(&self, s: f64) -> Result<RecurrencePair> {
        if !(s >= 0.0 && s < self.horizon) {
            return Err(Error::Range { s, horizon: self.horizon });
        }
        let k = self.arrivals.partition_point(|&a| a <= s);
        let prev = if k == 0 { 0.0 } else { self.arrivals[k - 1] };
        Ok(RecurrencePair { backward: s - prev, forward: self.arrivals[k] - s })
    }

    /// `μ_t(f) = (1/t)[Σ_{i<N} τ_i f̄(1, τ_i) + τ_N f̄(r, τ_N)]` with
    /// `r = (t − S_{N−1})/τ_N`.
    pub fn empirical_integral(&self, f: &BivariateTestFunction) -> Result<f64> {
        let taus = self.inter_arrivals();
        let n = taus.len();
        let mut total = 0.0;
        for &tau in &taus[..n - 1] {
            total += tau * f.segment_integral(1.0, tau)?;
        }
        let last = taus[n - 1];
        let r = (self.horizon - self.last_renewal()) / last;
        total += last * f.segment_integral(r, last)?;
        Ok(total / self.horizon)
    }

    /// `ν_t`: mass `S_{N−1}/t` on the length-biased completed inter-arrivals,
    /// the rest at `(∞, ∞)`.
    pub fn delta_projection(&self) -> DeltaMeasure {
        let last = self.last_renewal();
        if self.arrivals.len() < 2 {
            return DeltaMeasure { alpha: 0.0, pi: Pi::Empty };
        }
        let taus = self.inter_arrivals();
        let atoms = taus[..taus.len() - 1].iter().map(|&tau| (tau, tau / last)).collect();
        DeltaMeasure { alpha: last / self.horizon, pi: Pi::Atoms(atoms) }
    }

    /// `C_t = Σ_{i<N_t} F(τ_i)`.
    pub fn cumulative(&self, reward: &BoundedFn) -> f64 {
        let taus = self.inter_arrivals();
        taus[..taus.len() - 1].iter().map(|&tau| reward.eval(tau)).sum()
    }

    /// CSV dump: `index,arrival` rows and a `# horizon=<t>` trailer.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,arrival\n");
        for (i, a) in self.arrivals.iter().enumerate() {
            let _ = writeln!(out, "{},{}", i + 1, fmt_sig(*a));
        }
        let _ = writeln!(out, "# horizon={}", fmt_sig(self.horizon));
        out
    }
}
