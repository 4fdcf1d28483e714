//! Draws from waiting-time laws, their exponential tilts and their
//! conditional tails `ψ(· | τ > s)`.

use rand::distr::weighted::WeightedIndex;
use rand::Rng;
use rand_distr::{Distribution, Exp, Exp1, Gamma, Pareto, Weibull};

use super::{Family, WaitingLaw};
use crate::error::{Error, Result};
use crate::numeric::golden_max;

const TAIL_ATTEMPTS: usize = 10_000_000;

/// Log-concave tilted density prepared for Devroye's two-piece sampler.
#[derive(Debug, Clone)]
pub(super) struct LogConcave {
    mode: f64,
    log_peak: f64,
    w_left: f64,
}

#[derive(Debug, Clone)]
pub(super) enum Draw {
    Exp(Exp<f64>),
    Gamma(Gamma<f64>),
    Pareto(Pareto<f64>),
    Weibull(Weibull<f64>),
    Point(f64),
    Atoms { values: Vec<f64>, index: WeightedIndex<f64> },
    Mixture(WeightedIndex<f64>),
    /// Tilt with `c < 0` by rejection from the base law.
    BaseReject { c: f64, lower: f64 },
    /// Tilted Pareto from `xmin + Exp(|c|)`, accepting with `(xmin/τ)^{α+1}`.
    ShiftedExp { rate: f64, xmin: f64, alpha: f64 },
    LogConcave(LogConcave),
}

fn invalid<E: std::fmt::Display>(e: E) -> Error {
    Error::InvalidLaw(e.to_string())
}

fn exp1<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    Exp1.sample(rng)
}

fn uniform_open<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    // (0, 1]
    1.0 - rng.random::<f64>()
}

impl Draw {
    pub(super) fn build(family: &Family) -> Result<Draw> {
        Ok(match family {
            Family::Exponential { rate } => Draw::Exp(Exp::new(*rate).map_err(invalid)?),
            Family::Gamma { shape, scale } => {
                Draw::Gamma(Gamma::new(*shape, *scale).map_err(invalid)?)
            }
            Family::Pareto { alpha, xmin } => {
                Draw::Pareto(Pareto::new(*xmin, *alpha).map_err(invalid)?)
            }
            Family::Weibull { shape, scale } => {
                Draw::Weibull(Weibull::new(*scale, *shape).map_err(invalid)?)
            }
            Family::Deterministic { tau } => Draw::Point(*tau),
            Family::Atoms(a) | Family::Empirical { atoms: a, .. } => Draw::Atoms {
                values: a.iter().map(|x| x.0).collect(),
                index: WeightedIndex::new(a.iter().map(|x| x.1)).map_err(invalid)?,
            },
            Family::Mixture(cs) => {
                Draw::Mixture(WeightedIndex::new(cs.iter().map(|c| c.0)).map_err(invalid)?)
            }
            Family::Tilted { base, c, log_mgf } => Self::build_tilted(base, *c, *log_mgf)?,
        })
    }

    fn build_tilted(base: &WaitingLaw, c: f64, log_mgf: f64) -> Result<Draw> {
        match base.family() {
            Family::Pareto { alpha, xmin } if c < 0.0 => {
                if -c * xmin > *alpha {
                    Ok(Draw::ShiftedExp { rate: -c, xmin: *xmin, alpha: *alpha })
                } else {
                    Ok(Draw::BaseReject { c, lower: *xmin })
                }
            }
            Family::Weibull { shape, .. } if *shape > 1.0 => {
                let lp = |t: f64| base.log_density(t) + c * t - log_mgf;
                Ok(Draw::LogConcave(prepare_log_concave(base, c, log_mgf, &lp)?))
            }
            Family::Weibull { .. } if c < 0.0 => Ok(Draw::BaseReject { c, lower: 0.0 }),
            _ => Err(Error::InvalidLaw(format!("no sampler for tilt {c} of {base}"))),
        }
    }
}

fn prepare_log_concave<F: Fn(f64) -> f64>(
    base: &WaitingLaw,
    c: f64,
    log_mgf: f64,
    lp: &F,
) -> Result<LogConcave> {
    // bracket the mode on a log grid, then refine
    let (_, scale) = base.continuous_params().expect("continuous base");
    let mut best = (scale, lp(scale));
    for j in -120..=160 {
        let t = scale * (j as f64 / 4.0).exp2();
        let v = lp(t);
        if v > best.1 {
            best = (t, v);
        }
    }
    let m = golden_max(lp, best.0 * 0.5, best.0 * 2.0, 1e-14);
    let tail = base
        .weighted(c, m.x, &|_| [1.0])?
        .map(|w| (w.log_scale - log_mgf).exp() * w.values[0])
        .ok_or_else(|| Error::InvalidLaw("tilted law is not normalizable".into()))?;
    Ok(LogConcave {
        mode: m.x,
        log_peak: m.value,
        w_left: (1.0 - tail).clamp(0.0, 1.0),
    })
}

/// Devroye's sampler for a log-concave piece decreasing away from `start`:
/// `height` is the piece density at `start` divided by its mass and `extent`
/// bounds the distance from `start`.
fn devroye_piece<R: Rng + ?Sized, F: Fn(f64) -> f64>(
    rng: &mut R,
    lp: &F,
    start: f64,
    direction: f64,
    extent: f64,
    height: f64,
) -> f64 {
    let lp_start = lp(start);
    loop {
        let z = if rng.random::<f64>() < 0.5 {
            rng.random::<f64>()
        } else {
            1.0 + exp1(rng)
        };
        let y = z / height;
        if y >= extent {
            continue;
        }
        let tau = start + direction * y;
        let envelope = if z <= 1.0 { 1.0 } else { (1.0 - z).exp() };
        if rng.random::<f64>() * envelope <= (lp(tau) - lp_start).exp() {
            return tau;
        }
    }
}

impl WaitingLaw {
    /// One draw from the law.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match &self.0.draw {
            Draw::Exp(d) => d.sample(rng),
            Draw::Gamma(d) => d.sample(rng),
            Draw::Pareto(d) => d.sample(rng),
            Draw::Weibull(d) => d.sample(rng),
            Draw::Point(t) => *t,
            Draw::Atoms { values, index } => values[index.sample(rng)],
            Draw::Mixture(index) => match self.family() {
                Family::Mixture(cs) => cs[index.sample(rng)].1.sample(rng),
                _ => unreachable!(),
            },
            Draw::BaseReject { c, lower } => {
                let base = self.tilt_base();
                loop {
                    let t = base.sample(rng);
                    if rng.random::<f64>() < (c * (t - lower)).exp() {
                        return t;
                    }
                }
            }
            Draw::ShiftedExp { rate, xmin, alpha } => loop {
                let t = xmin + exp1(rng) / rate;
                if rng.random::<f64>() < (xmin / t).powf(alpha + 1.0) {
                    return t;
                }
            },
            Draw::LogConcave(lc) => {
                let lp = |t: f64| self.log_density(t);
                let peak = lc.log_peak.exp();
                if rng.random::<f64>() < lc.w_left {
                    devroye_piece(rng, &lp, lc.mode, -1.0, lc.mode, peak / lc.w_left)
                } else {
                    devroye_piece(rng, &lp, lc.mode, 1.0, f64::INFINITY, peak / (1.0 - lc.w_left))
                }
            }
        }
    }

    fn tilt_base(&self) -> &WaitingLaw {
        match self.family() {
            Family::Tilted { base, .. } => base,
            _ => unreachable!("tilt_base on an untilted law"),
        }
    }

    /// One draw from the conditional law `ψ(· | τ > s)`.
    pub fn sample_tail<R: Rng + ?Sized>(&self, s: f64, rng: &mut R) -> Result<f64> {
        if s <= 0.0 {
            return Ok(self.sample(rng));
        }
        match self.family() {
            Family::Exponential { rate } => Ok(s + exp1(rng) / rate),
            Family::Pareto { alpha, xmin } => {
                Ok(s.max(*xmin) * uniform_open(rng).powf(-1.0 / alpha))
            }
            Family::Weibull { shape, scale } => {
                let e: f64 = exp1(rng);
                Ok(scale * ((s / scale).powf(*shape) + e).powf(1.0 / shape))
            }
            Family::Gamma { shape, scale } => self.gamma_tail(*shape, *scale, s, rng),
            Family::Deterministic { .. } | Family::Atoms(_) | Family::Empirical { .. } => {
                let atoms = self.discrete_atoms().unwrap_or_default();
                let tail: Vec<&(f64, f64)> = atoms.iter().filter(|a| a.0 > s).collect();
                if tail.is_empty() {
                    return Err(Error::TailSampling(s));
                }
                let idx = WeightedIndex::new(tail.iter().map(|a| a.1)).map_err(invalid)?;
                Ok(tail[idx.sample(rng)].0)
            }
            Family::Mixture(cs) => {
                let mut logs = Vec::with_capacity(cs.len());
                for (w, l) in cs {
                    logs.push(w.ln() + l.log_survival(s)?);
                }
                let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                if top == f64::NEG_INFINITY {
                    return Err(Error::TailSampling(s));
                }
                let idx = WeightedIndex::new(logs.iter().map(|l| (l - top).exp()))
                    .map_err(invalid)?;
                cs[idx.sample(rng)].1.sample_tail(s, rng)
            }
            Family::Tilted { base, c, .. } => self.tilted_tail(base, *c, s, rng),
        }
    }

    fn gamma_tail<R: Rng + ?Sized>(&self, shape: f64, scale: f64, s: f64, rng: &mut R) -> Result<f64> {
        let mode = (shape - 1.0).max(0.0) * scale;
        if s <= mode || self.log_survival(s)? > (0.1f64).ln() {
            for _ in 0..TAIL_ATTEMPTS {
                let t = self.sample(rng);
                if t > s {
                    return Ok(t);
                }
            }
            return Err(Error::TailSampling(s));
        }
        // beyond the mode: shifted exponential envelope
        let rate = 1.0 / scale - (shape - 1.0).max(0.0) / s;
        for _ in 0..TAIL_ATTEMPTS {
            let t = s + exp1(rng) / rate;
            let log_accept = if shape <= 1.0 {
                (shape - 1.0) * (t / s).ln()
            } else {
                (shape - 1.0) * ((t / s).ln() - (t - s) / s)
            };
            if rng.random::<f64>().ln() < log_accept {
                return Ok(t);
            }
        }
        Err(Error::TailSampling(s))
    }

    fn tilted_tail<R: Rng + ?Sized>(&self, base: &WaitingLaw, c: f64, s: f64, rng: &mut R) -> Result<f64> {
        match (&self.0.draw, base.family()) {
            (Draw::LogConcave(lc), _) => {
                if s < lc.mode {
                    for _ in 0..TAIL_ATTEMPTS {
                        let t = self.sample(rng);
                        if t > s {
                            return Ok(t);
                        }
                    }
                    return Err(Error::TailSampling(s));
                }
                let lp = |t: f64| self.log_density(t);
                let log_tail = self.log_survival(s)?;
                if log_tail == f64::NEG_INFINITY {
                    return Err(Error::TailSampling(s));
                }
                let height = (lp(s) - log_tail).exp();
                Ok(devroye_piece(rng, &lp, s, 1.0, f64::INFINITY, height))
            }
            (_, Family::Pareto { alpha, xmin }) if -c * s.max(*xmin) > *alpha => {
                let lo = s.max(*xmin);
                for _ in 0..TAIL_ATTEMPTS {
                    let t = lo + exp1(rng) / (-c);
                    if rng.random::<f64>() < (lo / t).powf(alpha + 1.0) {
                        return Ok(t);
                    }
                }
                Err(Error::TailSampling(s))
            }
            _ => {
                for _ in 0..TAIL_ATTEMPTS {
                    let t = base.sample_tail(s, rng)?;
                    if rng.random::<f64>() < (c * (t - s)).exp() {
                        return Ok(t);
                    }
                }
                Err(Error::TailSampling(s))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn mean_and_se(xs: &[f64]) -> (f64, f64) {
        let n = xs.len() as f64;
        let m = xs.iter().sum::<f64>() / n;
        let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
        (m, (v / n).sqrt())
    }

    fn check_mean(law: &WaitingLaw, expected: f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let xs: Vec<f64> = (0..200_000).map(|_| law.sample(&mut rng)).collect();
        let (m, se) = mean_and_se(&xs);
        assert!((m - expected).abs() < 4.0 * se, "{law}: {m} vs {expected} (se {se})");
    }

    #[test]
    fn deterministic_and_empirical() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let d = WaitingLaw::deterministic(1.0).unwrap();
        assert_eq!(d.sample(&mut rng), 1.0);
        check_mean(&WaitingLaw::empirical(&[2.0, 3.0], "inline").unwrap(), 2.5);
    }

    #[test]
    fn reproducible_given_seed() {
        let law = WaitingLaw::exponential(1.0).unwrap();
        let a: Vec<f64> = {
            let mut r = ChaCha8Rng::seed_from_u64(42);
            (0..5).map(|_| law.sample(&mut r)).collect()
        };
        let b: Vec<f64> = {
            let mut r = ChaCha8Rng::seed_from_u64(42);
            (0..5).map(|_| law.sample(&mut r)).collect()
        };
        assert_eq!(a, b);
    }

    #[test]
    fn tilted_samplers_hit_tilted_means() {
        let p = WaitingLaw::pareto(2.0, 1.0).unwrap();
        for c in [-0.3, -5.0] {
            let t = p.tilt(c).unwrap();
            check_mean(&t, p.tilted_mean(c).unwrap());
        }
        let w = WaitingLaw::weibull(2.0, 1.0).unwrap();
        for c in [-2.0, 1.5] {
            let t = w.tilt(c).unwrap();
            check_mean(&t, w.tilted_mean(c).unwrap());
        }
        let w = WaitingLaw::weibull(0.5, 1.0).unwrap();
        let t = w.tilt(-1.0).unwrap();
        check_mean(&t, w.tilted_mean(-1.0).unwrap());
    }

    #[test]
    fn conditional_tails_match_quadrature() {
        let laws = [
            WaitingLaw::gamma(2.0, 1.0).unwrap(),
            WaitingLaw::gamma(0.5, 1.0).unwrap(),
            WaitingLaw::pareto(2.0, 1.0).unwrap().tilt(-0.5).unwrap(),
            WaitingLaw::weibull(2.0, 1.0).unwrap().tilt(0.5).unwrap(),
        ];
        for law in &laws {
            for s in [0.5, 4.0] {
                let w = law.weighted(0.0, s, &|t| [1.0, t]).unwrap().unwrap();
                let expected = w.values[1] / w.values[0];
                let mut rng = ChaCha8Rng::seed_from_u64(5);
                let xs: Vec<f64> = (0..100_000).map(|_| law.sample_tail(s, &mut rng).unwrap()).collect();
                assert!(xs.iter().all(|&x| x > s));
                let (m, se) = mean_and_se(&xs);
                assert!((m - expected).abs() < 4.0 * se, "{law} s={s}: {m} vs {expected}");
            }
        }
    }

    #[test]
    fn atoms_tail_beyond_support_errors() {
        let a = WaitingLaw::atoms(vec![(1.0, 0.5), (2.0, 0.5)]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(a.sample_tail(1.5, &mut rng).unwrap(), 2.0);
        assert!(matches!(a.sample_tail(2.0, &mut rng), Err(Error::TailSampling(_))));
    }
}
