//! Naive and importance-sampling estimators.
//!
//! The light-tailed sampler draws the first inter-arrivals from the tilt
//! `ζ_c ∝ e^{cτ}ψ` that makes the event typical. The heavy-tailed sampler
//! mixes, over the position `j` of a single long inter-arrival, proposals
//! whose head is near-critically tilted and whose `j`-th waiting time is
//! drawn from `ψ(· | τ > (1 − Tm)t)`; a small share of untilted paths keeps
//! the mixture dominating ψ. Weights are exact likelihood ratios against
//! the mixture, so every estimator is unbiased.

use crate::distributions::WaitingLaw;
use crate::error::{Error, Result};
use crate::functions::BoundedFn;
use crate::ratefn::{rate_jf_point, solve_tilt_for_mean};
use crate::renewal::{count_and_reward, ARRIVAL_BUDGET};
use crate::rng::Stream;

use super::{accumulate, Event, EventKind, LdpEstimate, McConfig, Sampler, MIN_SAMPLES};

/// Relative padding of the tilted head beyond the expected renewal count.
pub const HEAD_PADDING: f64 = 0.05;

/// Share of untilted paths in the big-jump mixture.
const DEFENSIVE_SHARE: f64 = 0.1;

const ACCEPT_ATTEMPTS: usize = 10_000_000;

fn check_inputs(t: f64, cfg: &McConfig) -> Result<()> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::InvalidArgument(format!("horizon must be positive, got {t}")));
    }
    if cfg.n < MIN_SAMPLES {
        return Err(Error::InvalidArgument(format!("need at least {MIN_SAMPLES} samples, got {}", cfg.n)));
    }
    Ok(())
}

/// The first `count` inter-arrivals come from `law` and carry a log
/// likelihood ratio `log_ratio(τ)` each.
struct Head<D, L> {
    count: u64,
    draw: D,
    log_ratio: L,
}

impl<D, L> Head<D, L>
where
    D: Fn(&mut Stream) -> Result<f64>,
    L: Fn(f64) -> f64,
{
    fn new(count: u64, draw: D, log_ratio: L) -> Self {
        Self { count, draw, log_ratio }
    }
}

/// One path under a tilted head: `(N_t − 1, C_t, log W)`.
fn headed_path<D, L>(
    law: &WaitingLaw,
    head: &Head<D, L>,
    t: f64,
    reward: &BoundedFn,
    rng: &mut Stream,
    mut trace: Option<&mut Vec<f64>>,
) -> Result<(u64, f64, f64)>
where
    D: Fn(&mut Stream) -> Result<f64>,
    L: Fn(f64) -> f64,
{
    let mut s = 0.0;
    let mut completed = 0u64;
    let mut c = 0.0;
    let mut log_w = 0.0;
    let mut i = 0u64;
    loop {
        let tau = if i < head.count {
            let tau = (head.draw)(rng)?;
            log_w += (head.log_ratio)(tau);
            tau
        } else {
            law.sample(rng)
        };
        if let Some(tr) = trace.as_deref_mut() {
            tr.push(tau);
        }
        i += 1;
        s += tau;
        if s > t {
            return Ok((completed, c, log_w));
        }
        completed += 1;
        c += reward.eval(tau);
        if completed >= ARRIVAL_BUDGET {
            return Err(Error::Budget(ARRIVAL_BUDGET));
        }
    }
}

/// `1{S_k ≤ t}` weighted by the head ratios of all `k` draws.
fn upper_sample<D, L>(head: &Head<D, L>, t: f64, rng: &mut Stream) -> Result<f64>
where
    D: Fn(&mut Stream) -> Result<f64>,
    L: Fn(f64) -> f64,
{
    let mut s = 0.0;
    let mut log_w = 0.0;
    for _ in 0..head.count {
        let tau = (head.draw)(rng)?;
        s += tau;
        if s > t {
            return Ok(0.0);
        }
        log_w += (head.log_ratio)(tau);
    }
    Ok(log_w.exp())
}

/// Direct frequency of the event.
pub fn naive_ldp(law: &WaitingLaw, event: Event, t: f64, cfg: &McConfig) -> Result<LdpEstimate> {
    check_inputs(t, cfg)?;
    let one = BoundedFn::one();
    naive_with(law, &one, event, t, cfg)
}

fn naive_with(law: &WaitingLaw, reward: &BoundedFn, event: Event, t: f64, cfg: &McConfig) -> Result<LdpEstimate> {
    let acc = match event.kind {
        EventKind::CountUpper => {
            let head = Head::new(event.upper_index(t), |rng: &mut Stream| Ok(law.sample(rng)), |_| 0.0);
            accumulate(cfg, |rng| upper_sample(&head, t, rng))?
        }
        _ => accumulate(cfg, |rng| {
            let (n, c) = count_and_reward(law, t, reward, rng)?;
            Ok(if event.contains(t, n, c) { 1.0 } else { 0.0 })
        })?,
    };
    Ok(LdpEstimate::from_moments(t, event, Sampler::Naive, &acc))
}

/// Exponentially tilted head with `ζ_c(τ) = 1/m`.
pub fn is_ldp_light(law: &WaitingLaw, event: Event, t: f64, cfg: &McConfig) -> Result<LdpEstimate> {
    check_inputs(t, cfg)?;
    if event.kind == EventKind::CumulBand {
        return Err(Error::InvalidArgument("cumulative events go through cumulative_ldp".into()));
    }
    if !(event.m > 0.0) {
        return Err(Error::Infeasible("a zero renewal rate has no tilt".into()));
    }
    let c = solve_tilt_for_mean(law, 1.0 / event.m)?;
    let zeta = law.tilt(c)?;
    let lmgf = law.log_mgf(c)?;
    let log_ratio = |tau: f64| lmgf - c * tau;
    let draw = |rng: &mut Stream| Ok(zeta.sample(rng));
    let one = BoundedFn::one();
    let acc = match event.kind {
        EventKind::CountUpper => {
            let head = Head::new(event.upper_index(t), draw, log_ratio);
            accumulate(cfg, |rng| upper_sample(&head, t, rng))?
        }
        _ => {
            let count = (event.m * (1.0 + HEAD_PADDING) * t).ceil() as u64;
            let head = Head::new(count, draw, log_ratio);
            accumulate(cfg, |rng| {
                let (n, c_t, lw) = headed_path(law, &head, t, &one, rng, None)?;
                Ok(if event.contains(t, n, c_t) { lw.exp() } else { 0.0 })
            })?
        }
    };
    Ok(LdpEstimate::from_moments(t, event, Sampler::Tilt, &acc))
}

/// Parameters of the big-jump mixture.
struct BigJump {
    c: f64,
    lmgf: f64,
    zeta: WaitingLaw,
    threshold: f64,
    log_tail: f64,
    /// Head length `H`; jump positions run over `1..=H+1`.
    head: u64,
}

impl BigJump {
    fn new(law: &WaitingLaw, m: f64, t: f64) -> Result<Self> {
        let xi = law.xi();
        let t_lim = law.t_limit();
        if !xi.is_finite() || !t_lim.is_finite() {
            return Err(Error::Infeasible(format!("the big-jump sampler needs ξ < ∞ and T < ∞ (ξ = {xi}, T = {t_lim})")));
        }
        if !(m * t_lim < 1.0) {
            return Err(Error::Infeasible(format!("m = {m} is not below 1/T = {}", 1.0 / t_lim)));
        }
        let c = if xi == 0.0 { 0.0 } else { law.near_critical_tilt() };
        let threshold = (1.0 - t_lim * m) * t;
        let log_tail = law.log_survival(threshold)?;
        if log_tail == f64::NEG_INFINITY {
            return Err(Error::TailSampling(threshold));
        }
        Ok(Self {
            c,
            lmgf: law.log_mgf(c)?,
            zeta: law.tilt(c)?,
            threshold,
            log_tail,
            head: (m * t).ceil().max(1.0) as u64,
        })
    }

    /// Draws one path from the mixture; returns `(N_t − 1, head draws)`.
    fn sample(&self, law: &WaitingLaw, t: f64, rng: &mut Stream, taus: &mut Vec<f64>) -> Result<u64> {
        use rand::Rng;
        taus.clear();
        let slots = self.head + 1;
        let j = if rng.random::<f64>() < DEFENSIVE_SHARE { 0 } else { rng.random_range(1..=slots) };
        let mut s = 0.0;
        let mut completed = 0u64;
        let mut i = 1u64;
        loop {
            let tau = if j > 0 && i == j {
                law.sample_tail(self.threshold, rng)?
            } else if j > 0 && i <= slots {
                self.zeta.sample(rng)
            } else {
                law.sample(rng)
            };
            if i <= slots {
                taus.push(tau);
            }
            i += 1;
            s += tau;
            if s > t {
                return Ok(completed);
            }
            completed += 1;
            if completed >= ARRIVAL_BUDGET {
                return Err(Error::Budget(ARRIVAL_BUDGET));
            }
        }
    }

    /// `log(dQ/dP)` of the mixture at a path whose first `min(H+1, N)`
    /// inter-arrivals are `taus`.
    fn log_mixture_ratio(&self, taus: &[f64]) -> f64 {
        let slots = self.head + 1;
        let log_r: Vec<f64> = taus.iter().map(|&tau| self.c * tau - self.lmgf).collect();
        let log_p: f64 = log_r.iter().sum();
        let mut terms: Vec<f64> = Vec::with_capacity(taus.len() + 2);
        terms.push(DEFENSIVE_SHARE.ln());
        let share = ((1.0 - DEFENSIVE_SHARE) / slots as f64).ln();
        for (k, &tau) in taus.iter().enumerate() {
            if tau > self.threshold {
                terms.push(share + log_p - log_r[k] - self.log_tail);
            }
        }
        let unused = slots - taus.len() as u64;
        if unused > 0 {
            terms.push(share + (unused as f64).ln() + log_p);
        }
        let top = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        top + terms.iter().map(|v| (v - top).exp()).sum::<f64>().ln()
    }
}

/// One big jump plus a near-critically tilted head, for `m < 1/T`.
pub fn is_ldp_heavy(law: &WaitingLaw, event: Event, t: f64, cfg: &McConfig) -> Result<LdpEstimate> {
    check_inputs(t, cfg)?;
    if event.kind != EventKind::CountBand {
        return Err(Error::InvalidArgument("the big-jump sampler estimates count bands".into()));
    }
    let bj = BigJump::new(law, event.m, t)?;
    let acc = accumulate(cfg, |rng| {
        let mut taus = Vec::with_capacity(bj.head as usize + 1);
        let n = bj.sample(law, t, rng, &mut taus)?;
        Ok(if event.contains(t, n, 0.0) { (-bj.log_mixture_ratio(&taus)).exp() } else { 0.0 })
    })?;
    Ok(LdpEstimate::from_moments(t, event, Sampler::TiltBigJump, &acc))
}

/// `P(|C_t/t − m| ≤ δ)` with `C_t = Σ_{i<N_t} F(τ_i)`.
///
/// The tilted sampler uses the two-parameter family `e^{xτ + yF}ψ` at the
/// optimum of `β Λ*(1/β, m/β)`. A constant `F ≡ k` reduces to the count
/// band `(m/k, δ/k)`.
pub fn cumulative_ldp(
    law: &WaitingLaw,
    f: &BoundedFn,
    event: Event,
    t: f64,
    cfg: &McConfig,
    sampler: Sampler,
) -> Result<LdpEstimate> {
    check_inputs(t, cfg)?;
    if event.kind != EventKind::CumulBand {
        return Err(Error::InvalidArgument("cumulative_ldp takes a cumulative band".into()));
    }
    if let Some(k) = f.constant() {
        if k > 0.0 {
            let count = Event::count_band(event.m / k, event.delta / k)?;
            let est = match sampler {
                Sampler::Naive => naive_ldp(law, count, t, cfg)?,
                Sampler::Tilt => is_ldp_light(law, count, t, cfg)?,
                Sampler::TiltBigJump => is_ldp_heavy(law, count, t, cfg)?,
            };
            return Ok(LdpEstimate { event, ..est });
        }
    }
    match sampler {
        Sampler::Naive => naive_with(law, f, event, t, cfg),
        Sampler::Tilt => {
            let p = rate_jf_point(law, f, event.m)?;
            if !p.value.is_finite() || p.on_boundary || !p.beta.is_finite() {
                return Err(Error::Infeasible(format!(
                    "no interior tilt attains C_t/t = {}; the big-jump regime is not covered here",
                    event.m
                )));
            }
            let (x, y) = (p.x, p.y);
            let (lo, hi) = f.range();
            let k = if y >= 0.0 { hi } else { lo };
            let w = law
                .weighted(x, 0.0, &|tau: f64| [(y * (f.eval(tau) - k)).exp()])?
                .ok_or_else(|| Error::Domain(format!("tilt {x} lies beyond ξ")))?;
            let lambda = w.log_scale + w.values[0].ln() + y * k;
            let base = if x == 0.0 { law.clone() } else { law.tilt(x)? };
            let draw = |rng: &mut Stream| {
                use rand::Rng;
                for _ in 0..ACCEPT_ATTEMPTS {
                    let tau = base.sample(rng);
                    if rng.random::<f64>() < (y * (f.eval(tau) - k)).exp() {
                        return Ok(tau);
                    }
                }
                Err(Error::Infeasible("reward tilt rejects every proposal".into()))
            };
            let log_ratio = |tau: f64| lambda - x * tau - y * f.eval(tau);
            let count = (p.beta * (1.0 + HEAD_PADDING) * t).ceil() as u64;
            let head = Head::new(count, draw, log_ratio);
            let acc = accumulate(cfg, |rng| {
                let (n, c_t, lw) = headed_path(law, &head, t, f, rng, None)?;
                Ok(if event.contains(t, n, c_t) { lw.exp() } else { 0.0 })
            })?;
            Ok(LdpEstimate::from_moments(t, event, Sampler::Tilt, &acc))
        }
        Sampler::TiltBigJump => Err(Error::InvalidArgument(
            "the big-jump sampler is available for constant rewards only".into(),
        )),
    }
}

/// Dispatches on the event kind and sampler.
pub fn estimate(
    law: &WaitingLaw,
    f: &BoundedFn,
    event: Event,
    t: f64,
    cfg: &McConfig,
    sampler: Sampler,
) -> Result<LdpEstimate> {
    match (event.kind, sampler) {
        (EventKind::CumulBand, _) => cumulative_ldp(law, f, event, t, cfg, sampler),
        (_, Sampler::Naive) => naive_ldp(law, event, t, cfg),
        (_, Sampler::Tilt) => is_ldp_light(law, event, t, cfg),
        (_, Sampler::TiltBigJump) => is_ldp_heavy(law, event, t, cfg),
    }
}
