//! Monte Carlo checks of the exponential moment bounds and of the law of
//! large numbers for `μ_t`.

use serde::Serialize;

use crate::distributions::WaitingLaw;
use crate::error::{Error, Result};
use crate::functions::{BivariateTestFunction, PiecewiseLinear};
use crate::numeric::golden_max;
use crate::renewal::simulate;

use super::{run_shards, McConfig};

/// `f(a, b) = φ(a + b)/(a + b) + c·1{a + b > M}`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhiSpec {
    pub phi: PiecewiseLinear,
    pub c: f64,
    pub big_m: f64,
}

impl PhiSpec {
    /// `τ f̄(1, τ) = φ(τ) + cτ·1{τ > M}`.
    fn log_weight(&self, tau: f64) -> f64 {
        self.phi.eval(tau) + if tau > self.big_m { self.c * tau } else { 0.0 }
    }

    fn test_function(&self) -> BivariateTestFunction {
        let s = self.clone();
        BivariateTestFunction::of_sum(move |tau| s.log_weight(tau) / tau, self.c, f64::INFINITY)
    }

    /// `C_f = ψ(e^{τ f̄(1, τ)})`, written as `1 + ψ(e^φ − 1)` plus the
    /// correction from the tilt above `M`, so that a vanishing `φ` with
    /// `c = 0` gives exactly 1.
    pub fn c_f(&self, law: &WaitingLaw) -> Result<f64> {
        let value = |w: Option<crate::distributions::Weighted<2>>| match w {
            Some(w) => {
                let s = w.log_scale.exp();
                Some((s * w.values[0], s * w.values[1]))
            }
            None => None,
        };
        let mut total = 1.0;
        for piece in self.phi.points().windows(2) {
            let ((x0, y0), (x1, y1)) = (piece[0], piece[1]);
            if y0 == 0.0 && y1 == 0.0 {
                continue;
            }
            let g = |tau: f64| if tau <= x1 { [self.phi.eval(tau).exp(), 1.0] } else { [0.0, 0.0] };
            let (with, without) = value(law.weighted(0.0, x0, &g)?).expect("bounded integrand");
            total += with - without;
        }
        if self.c != 0.0 {
            let g = |tau: f64| [self.phi.eval(tau).exp(), 0.0];
            let tilted = value(law.weighted(self.c, self.big_m, &g)?);
            let plain = value(law.weighted(0.0, self.big_m, &g)?).expect("bounded integrand");
            match tilted {
                Some(v) => total += v.0 - plain.0,
                None => return Ok(f64::INFINITY),
            }
        }
        Ok(total)
    }

    /// `G(s) = ∫_{(s,∞)} e^{τ f̄(s/τ, τ)} ψ(dτ)`.
    fn g(&self, law: &WaitingLaw, s: f64) -> Result<f64> {
        // beyond M every τ > s carries the tilt: keep e^{cs} out of the integrand
        let pulled = if s >= self.big_m { self.c * s } else { 0.0 };
        let h = |tau: f64| [(s * self.log_weight(tau) / tau - pulled).exp()];
        Ok(match law.weighted(0.0, s, &h)? {
            Some(w) if w.values[0] > 0.0 => (pulled + w.log_scale + w.values[0].ln()).exp(),
            Some(_) => 0.0,
            None => f64::INFINITY,
        })
    }

    /// `D_f = sup_s G(s)` over a log grid in `s`, refined around the best
    /// grid point.
    pub fn d_f(&self, law: &WaitingLaw) -> Result<f64> {
        let scale = law.mean().min(self.big_m).max(1e-6);
        let mut grid = vec![0.0];
        grid.extend((-40..=60).map(|j| scale * (j as f64 / 4.0).exp2()));
        let mut values = Vec::with_capacity(grid.len());
        for &s in &grid {
            values.push(self.g(law, s)?);
        }
        let (i, _) = values
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
        let mut best = values[i];
        if best.is_finite() && i > 0 {
            let lo = grid[i - 1];
            let hi = grid[(i + 1).min(grid.len() - 1)];
            let mut err = None;
            let r = golden_max(
                &mut |s: f64| match self.g(law, s) {
                    Ok(v) => v,
                    Err(e) => {
                        err.get_or_insert(e);
                        f64::NAN
                    }
                },
                lo,
                hi,
                1e-9 * hi,
            );
            if let Some(e) = err {
                return Err(e);
            }
            best = best.max(r.value);
        }
        Ok(best)
    }
}

/// Smallest `M ∈ {1, 2, …, 200}` for which `φ` with the tilt `c` above `M`
/// is admissible (`C_f < 1`).
pub fn admissible_threshold(law: &WaitingLaw, phi: &PiecewiseLinear, c: f64) -> Result<Option<f64>> {
    for k in 1..=200 {
        let spec = PhiSpec { phi: phi.clone(), c, big_m: k as f64 };
        if spec.c_f(law)? < 1.0 {
            return Ok(Some(k as f64));
        }
    }
    Ok(None)
}

/// The three profiles of the free-energy check: a negative bump, a bump
/// with a positive shoulder, and the negative bump with the tilt
/// `c = min(1/2, ξ/2)` switched on above `max(M₀, 10)`.
pub fn standard_phi_specs(law: &WaitingLaw) -> Result<Vec<PhiSpec>> {
    let dip = PiecewiseLinear::bump(0.5, 1.5, 0.1, -1.0)?;
    let shoulder = PiecewiseLinear::new(vec![
        (0.4, 0.0),
        (0.5, -1.0),
        (1.5, -1.0),
        (1.6, 0.0),
        (3.0, 0.0),
        (3.2, 0.3),
        (4.0, 0.3),
        (4.2, 0.0),
    ])?;
    let xi = law.xi();
    let c = if xi > 0.0 { 0.5f64.min(0.5 * xi) } else { 0.0 };
    let m0 = admissible_threshold(law, &dip, c)?
        .ok_or_else(|| Error::NotAdmissible(PhiSpec { phi: dip.clone(), c, big_m: 200.0 }.c_f(law).unwrap_or(f64::NAN)))?;
    Ok(vec![
        PhiSpec { phi: dip.clone(), c: 0.0, big_m: 10.0 },
        PhiSpec { phi: shoulder, c: 0.0, big_m: 10.0 },
        PhiSpec { phi: dip, c, big_m: m0.max(10.0) },
    ])
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FreeEnergyRow {
    pub t: f64,
    /// Sample mean of `e^{t μ_t(f)}`.
    pub mean: f64,
    pub std_err: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FreeEnergyReport {
    pub law: String,
    pub phi: String,
    pub c: f64,
    pub big_m: f64,
    pub c_f: f64,
    pub d_f: f64,
    /// `D_f / (1 − C_f)`.
    pub bound: f64,
    pub rows: Vec<FreeEnergyRow>,
    pub pass: bool,
}

/// Estimates `E e^{t μ_t(f)}` for each horizon and compares it with
/// `D_f / (1 − C_f)`.
pub fn free_energy_check(law: &WaitingLaw, spec: &PhiSpec, ts: &[f64], cfg: &McConfig) -> Result<FreeEnergyReport> {
    let xi = law.xi();
    if !(spec.c < xi || (spec.c == 0.0 && xi == 0.0)) {
        return Err(Error::Domain(format!("c = {} must lie below ξ = {xi}", spec.c)));
    }
    if !(spec.big_m > 0.0) {
        return Err(Error::InvalidArgument("M must be positive".into()));
    }
    let c_f = spec.c_f(law)?;
    if !(c_f < 1.0) {
        return Err(Error::NotAdmissible(c_f));
    }
    let d_f = spec.d_f(law)?;
    let bound = d_f / (1.0 - c_f);
    let f = spec.test_function();
    let mut rows = Vec::with_capacity(ts.len());
    for &t in ts {
        let parts = run_shards(cfg, |_, count, rng| {
            let (mut s1, mut s2) = (0.0, 0.0);
            for _ in 0..count {
                let path = simulate(law, t, rng)?;
                let x = (t * path.empirical_integral(&f)?).exp();
                s1 += x;
                s2 += x * x;
            }
            Ok((s1, s2))
        })?;
        let (s1, s2) = parts.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
        let n = cfg.n as f64;
        let mean = s1 / n;
        let std_err = ((s2 / n - mean * mean).max(0.0) / n).sqrt();
        rows.push(FreeEnergyRow { t, mean, std_err, pass: mean <= bound + 3.0 * std_err });
    }
    let pass = rows.iter().all(|r| r.pass);
    Ok(FreeEnergyReport {
        law: law.to_string(),
        phi: spec.phi.to_string(),
        c: spec.c,
        big_m: spec.big_m,
        c_f,
        d_f,
        bound,
        rows,
        pass,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TightnessRow {
    pub big_m: f64,
    pub t: f64,
    /// Frequency of `μ_t(1/(a + b)) > M`.
    pub freq: f64,
    pub std_err: f64,
    /// `e^{t + ⌊Mt⌋ log c₀}`.
    pub bound: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TightnessReport {
    pub law: String,
    /// `c₀ = ψ(e^{−τ})`.
    pub c0: f64,
    pub rows: Vec<TightnessRow>,
    pub pass: bool,
}

/// Frequencies of `μ_t(1/(a+b)) > M` against `e^{t + ⌊Mt⌋ log ψ(e^{−τ})}`.
pub fn tightness_check(law: &WaitingLaw, ms: &[f64], ts: &[f64], cfg: &McConfig) -> Result<TightnessReport> {
    let c0 = law.mgf(-1.0)?;
    let inv = BivariateTestFunction::inverse_length();
    let mut rows = Vec::new();
    for &big_m in ms {
        for &t in ts {
            let parts = run_shards(cfg, |_, count, rng| {
                let mut hits = 0u64;
                for _ in 0..count {
                    if simulate(law, t, rng)?.empirical_integral(&inv)? > big_m {
                        hits += 1;
                    }
                }
                Ok(hits)
            })?;
            let n = cfg.n as f64;
            let freq = parts.iter().sum::<u64>() as f64 / n;
            let std_err = (freq * (1.0 - freq) / n).sqrt();
            let bound = (t + (big_m * t).floor() * c0.ln()).exp();
            rows.push(TightnessRow { big_m, t, freq, std_err, bound, pass: freq <= bound + 3.0 * std_err });
        }
    }
    let pass = rows.iter().all(|r| r.pass);
    Ok(TightnessReport { law: law.to_string(), c0, rows, pass })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LlnRow {
    pub name: String,
    pub limit: f64,
    pub mean: f64,
    pub std_err: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LlnReport {
    pub law: String,
    pub t: f64,
    pub paths: u64,
    pub rows: Vec<LlnRow>,
    pub pass: bool,
}

/// Test functions with exact limits `μ̄(f)` under an exponential law of
/// rate `λ`: `e^{−a}`, `e^{−(a+b)}` and `sin(a) e^{−b}`.
pub fn lln_test_functions(rate: f64) -> Vec<(String, BivariateTestFunction, f64)> {
    let l = rate;
    vec![
        (
            "exp(-a)".to_string(),
            BivariateTestFunction::with_segment(
                |a, _| (-a).exp(),
                |r, tau| if tau == 0.0 { r } else { -(-r * tau).exp_m1() / tau },
                0.0,
                1.0,
            ),
            l / (l + 1.0),
        ),
        (
            "exp(-a-b)".to_string(),
            BivariateTestFunction::of_sum(|tau| (-tau).exp(), 0.0, 1.0),
            l * l / ((l + 1.0) * (l + 1.0)),
        ),
        (
            "sin(a)exp(-b)".to_string(),
            BivariateTestFunction::with_segment(
                |a, b| a.sin() * (-b).exp(),
                |r, tau| {
                    if tau == 0.0 {
                        return 0.0;
                    }
                    let v = r * tau;
                    ((v - tau).exp() * (v.sin() - v.cos()) + (-tau).exp()) / (2.0 * tau)
                },
                0.0,
                1.0,
            ),
            0.5 * l * (l / (l * l + 1.0) - l * l / (l * l + 1.0) + l / (l + 1.0)),
        ),
    ]
}

/// Replicated `μ_t(f)` at one horizon against the stationary limits.
pub fn lln_check(
    law: &WaitingLaw,
    tests: &[(String, BivariateTestFunction, f64)],
    t: f64,
    cfg: &McConfig,
) -> Result<LlnReport> {
    let k = tests.len();
    let parts = run_shards(cfg, |_, count, rng| {
        let mut sums = vec![(0.0, 0.0); k];
        for _ in 0..count {
            let path = simulate(law, t, rng)?;
            for (i, (_, f, _)) in tests.iter().enumerate() {
                let v = path.empirical_integral(f)?;
                sums[i].0 += v;
                sums[i].1 += v * v;
            }
        }
        Ok(sums)
    })?;
    let n = cfg.n as f64;
    let rows: Vec<LlnRow> = tests
        .iter()
        .enumerate()
        .map(|(i, (name, _, limit))| {
            let (s1, s2) = parts.iter().fold((0.0, 0.0), |a, p| (a.0 + p[i].0, a.1 + p[i].1));
            let mean = s1 / n;
            let std_err = ((s2 / n - mean * mean).max(0.0) / (n - 1.0).max(1.0)).sqrt();
            LlnRow { name: name.clone(), limit: *limit, mean, std_err, pass: (mean - limit).abs() <= 3.0 * std_err }
        })
        .collect();
    let pass = rows.iter().all(|r| r.pass);
    Ok(LlnReport { law: law.to_string(), t, paths: cfg.n, rows, pass })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bump() -> PiecewiseLinear {
        PiecewiseLinear::bump(0.5, 1.5, 0.1, -1.0).unwrap()
    }

    #[test]
    fn tilted_profile_needs_a_large_threshold() {
        let law = WaitingLaw::exponential(1.0).unwrap();
        // ∫_M^∞ (e^{τ/2} − 1) e^{−τ} dτ = 2e^{−M/2} − e^{−M} must fall below the dip's saving
        let m0 = admissible_threshold(&law, &bump(), 0.5).unwrap().unwrap();
        let saving = 1.0 - PhiSpec { phi: bump(), c: 0.0, big_m: 10.0 }.c_f(&law).unwrap();
        let excess = |m: f64| 2.0 * (-m / 2.0).exp() - (-m).exp();
        assert!(excess(m0) < saving && excess(m0 - 1.0) >= saving, "M₀ = {m0}");
        let specs = standard_phi_specs(&law).unwrap();
        assert_eq!(specs.len(), 3);
        assert_eq!(specs[2].c, 0.5);
        assert!(specs.iter().all(|s| s.c_f(&law).unwrap() < 1.0));
    }

    #[test]
    fn flat_phi_is_not_admissible() {
        let law = WaitingLaw::exponential(1.0).unwrap();
        let spec = PhiSpec { phi: PiecewiseLinear::zero(), c: 0.0, big_m: 10.0 };
        assert_eq!(spec.c_f(&law).unwrap(), 1.0);
        let r = free_energy_check(&law, &spec, &[5.0], &McConfig::new(1000, 1));
        assert!(matches!(r, Err(Error::NotAdmissible(_))));
    }

    #[test]
    fn constants_of_a_negative_bump() {
        let law = WaitingLaw::exponential(1.0).unwrap();
        let spec = PhiSpec { phi: bump(), c: 0.0, big_m: 10.0 };
        // 1 − ∫(1 − e^φ)e^{−τ}dτ, with φ = −1 on the plateau and linear ramps
        let ramp = |a: f64, b: f64, up: bool| {
            let n = 2000;
            let h = (b - a) / n as f64;
            (0..=n)
                .map(|i| {
                    let x = a + i as f64 * h;
                    let frac = (x - a) / (b - a);
                    let phi = if up { -frac } else { -(1.0 - frac) };
                    let w = if i == 0 || i == n { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
                    w * (1.0 - phi.exp()) * (-x).exp()
                })
                .sum::<f64>()
                * h
                / 3.0
        };
        let plateau = (1.0 - (-1f64).exp()) * ((-0.5f64).exp() - (-1.5f64).exp());
        let want = 1.0 - plateau - ramp(0.4, 0.5, true) - ramp(1.5, 1.6, false);
        let got = spec.c_f(&law).unwrap();
        assert!((got - want).abs() < 1e-9, "{got} vs {want}");
        // G(0) = 1 and G ≤ 1 for φ ≤ 0, c = 0
        assert!((spec.d_f(&law).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn bound_holds_for_a_negative_bump() {
        let law = WaitingLaw::exponential(1.0).unwrap();
        let spec = PhiSpec { phi: bump(), c: 0.0, big_m: 10.0 };
        let r = free_energy_check(&law, &spec, &[5.0, 10.0], &McConfig::new(2000, 3)).unwrap();
        assert!(r.pass && r.rows.iter().all(|row| row.mean <= 1.0));
    }

    #[test]
    fn tightness_on_simple_laws() {
        let e = WaitingLaw::exponential(1.0).unwrap();
        let r = tightness_check(&e, &[3.0, 0.01], &[10.0], &McConfig::new(2000, 1)).unwrap();
        assert!((r.c0 - 0.5).abs() < 1e-15);
        assert!(r.pass);
        assert_eq!(r.rows[0].freq, 0.0);
        assert!(r.rows[1].bound > 1.0);
        let d = WaitingLaw::deterministic(1.0).unwrap();
        let r = tightness_check(&d, &[2.0], &[1.0, 7.0], &McConfig::new(1000, 1)).unwrap();
        assert!(r.pass && r.rows.iter().all(|row| row.freq == 0.0));
    }

    fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for i in 1..n {
            s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        s * h / 3.0
    }

    #[test]
    fn stationary_limits_match_double_integrals() {
        // μ̄(f) = λ ∫ λe^{−λτ} ∫_0^τ f(a, τ − a) da dτ
        for l in [1.0, 1.5] {
            for (name, f, limit) in lln_test_functions(l) {
                let inner = |tau: f64| simpson(|a| f.eval(a, tau - a), 0.0, tau, 200);
                let v = l * simpson(|tau| l * (-l * tau).exp() * inner(tau), 0.0, 40.0, 4000);
                assert!((v - limit).abs() < 1e-8, "{name}: {v} vs {limit}");
                // the closed segment integrals agree with the definition
                let seg = f.segment_integral(0.7, 2.3).unwrap();
                let direct = simpson(|u| f.eval(u * 2.3, (1.0 - u) * 2.3), 0.0, 0.7, 2000);
                assert!((seg - direct).abs() < 1e-10, "{name}");
            }
        }
    }

    #[test]
    fn lln_at_moderate_horizon() {
        let law = WaitingLaw::exponential(1.0).unwrap();
        let r = lln_check(&law, &lln_test_functions(1.0), 2000.0, &McConfig::new(200, 5)).unwrap();
        assert!(r.pass, "{r:?}");
    }
}
