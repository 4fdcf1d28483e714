//! Contracted rates `J_F(m)` of `C_t / t`, the closed two-regime form for
//! `F ≡ 1`, the variational cross-check and the affine-stretch scan.

use std::fmt;
use std::fmt::Write as _;

use crate::distributions::WaitingLaw;
use crate::error::{Error, Result};
use crate::functions::BoundedFn;
use crate::numeric::{find_root, fmt_sig, golden_min};

use super::legendre::{legendre_1d, legendre_2d_from, x_cap, Conjugate2};

/// `c < ξ` with `ψ(τe^{cτ})/ψ(e^{cτ}) = target`.
///
/// The target must lie strictly between the bottom of the support and `T`.
pub fn solve_tilt_for_mean(law: &WaitingLaw, target: f64) -> Result<f64> {
    let (inf, _) = law.support();
    let t_lim = law.t_limit();
    if !(target > inf) {
        return Err(Error::Infeasible(format!(
            "target mean {target} is not above the support minimum {inf}"
        )));
    }
    if !(target < t_lim) {
        return Err(Error::Infeasible(format!(
            "target mean {target} is not below T = {t_lim}: no tilt attains it"
        )));
    }
    let mean = law.mean();
    if (target - mean).abs() <= 1e-15 * target {
        return Ok(0.0);
    }
    let xi = law.xi();
    let g = |c: f64| law.tilted_mean(c).map(|m| m - target);
    let (mut lo, mut hi);
    if target < mean {
        hi = 0.0;
        lo = -1.0 / target;
        while g(lo)? > 0.0 {
            hi = lo;
            lo *= 2.0;
            if lo < -1e300 {
                return Err(Error::Infeasible(format!("no tilt reaches mean {target}")));
            }
        }
    } else {
        lo = 0.0;
        hi = if xi.is_finite() { 0.5 * xi } else { 1.0 / target };
        let mut k = 1;
        while g(hi)? < 0.0 {
            lo = hi;
            if xi.is_finite() {
                k += 1;
                if k > 60 {
                    return Err(Error::Infeasible(format!("mean {target} needs a tilt at ξ")));
                }
                hi = xi - (-(k as f64)).exp2() * xi.max(1.0);
            } else {
                hi *= 2.0;
            }
        }
    }
    let mut err = None;
    let root = find_root(
        |c| match g(c) {
            Ok(v) => v,
            Err(e) => {
                err.get_or_insert(e);
                f64::NAN
            }
        },
        lo,
        hi,
        1e-13 * target,
    );
    match err {
        Some(e) => Err(e),
        None => root,
    }
}

/// `H(ζ | ψ)` for the tilt with mean `target`, including the limiting tilt
/// at `ξ` when `target = T`.
fn entropy_at_mean(law: &WaitingLaw, target: f64) -> Result<f64> {
    let t_lim = law.t_limit();
    if t_lim.is_finite() && (target - t_lim).abs() <= 1e-12 * t_lim {
        let xi = law.xi();
        if xi.is_finite() {
            return Ok((xi * t_lim - law.log_mgf(xi)?).max(0.0));
        }
    }
    let c = solve_tilt_for_mean(law, target)?;
    law.entropy_of_tilt(c)
}

/// Closed form for `F ≡ 1`:
/// `J₁(m) = m Λ*(1/m)` for `m ≥ 1/T`, `m Λ*(T) + (1 − mT) ξ` below.
pub fn rate_j1_closed(law: &WaitingLaw, m: f64) -> Result<f64> {
    if !(m >= 0.0) {
        return Err(Error::InvalidArgument(format!("m must be nonnegative, got {m}")));
    }
    let t_lim = law.t_limit();
    let xi = law.xi();
    if m == 0.0 {
        return Ok(xi);
    }
    if t_lim.is_finite() && m * t_lim < 1.0 {
        let base = m * legendre_1d(law, t_lim)?;
        return Ok(if xi.is_infinite() { f64::INFINITY } else { base + (1.0 - m * t_lim) * xi });
    }
    Ok(m * legendre_1d(law, 1.0 / m)?)
}

/// The minimizer of `β ↦ β Λ*(1/β, m/β)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatePoint {
    pub value: f64,
    /// Renewal rate `β` at the optimum (mean waiting time `1/β`).
    pub beta: f64,
    /// Tilt parameters `(x, y)` of the optimal exponential family member.
    pub x: f64,
    pub y: f64,
    pub on_boundary: bool,
}

const BETA_GRID: usize = 200;

/// `J_F(m) = inf_{β > 0} β Λ*(1/β, m/β)`.
pub fn rate_jf(law: &WaitingLaw, f: &BoundedFn, m: f64) -> Result<f64> {
    rate_jf_point(law, f, m).map(|p| p.value)
}

/// [`rate_jf`] together with the optimal `β` and tilt.
pub fn rate_jf_point(law: &WaitingLaw, f: &BoundedFn, m: f64) -> Result<RatePoint> {
    if !(m >= 0.0) {
        return Err(Error::InvalidArgument(format!("m must be nonnegative, got {m}")));
    }
    if let Some(k) = f.constant() {
        // C_t = k(N_t − 1): the β-line reduces to β = m/k
        if k == 0.0 {
            let value = if m == 0.0 { 0.0 } else { f64::INFINITY };
            return Ok(RatePoint { value, beta: f64::NAN, x: 0.0, y: 0.0, on_boundary: false });
        }
        if m == 0.0 {
            return Ok(RatePoint { value: law.xi(), beta: 0.0, x: law.xi(), y: 0.0, on_boundary: true });
        }
        let beta = m / k;
        let c = super::legendre::legendre_1d_point(law, 1.0 / beta)?;
        let on_boundary = c.x.is_finite() && c.x >= x_cap(law)?;
        return Ok(RatePoint { value: beta * c.value, beta, x: c.x, y: 0.0, on_boundary });
    }
    let ln_lo = 1e-4f64.ln();
    let ln_hi = 1e4f64.ln();
    let betas: Vec<f64> = (0..BETA_GRID)
        .map(|i| (ln_lo + (ln_hi - ln_lo) * i as f64 / (BETA_GRID - 1) as f64).exp())
        .collect();
    let mut warm: Option<(f64, f64)> = None;
    let mut evals: Vec<(f64, Conjugate2)> = Vec::with_capacity(BETA_GRID);
    for &beta in &betas {
        let c = legendre_2d_from(law, f, 1.0 / beta, m / beta, warm)?;
        if c.value.is_finite() {
            warm = Some((c.x, c.y));
        }
        evals.push((beta, c));
    }
    let g = |beta: f64, c: &Conjugate2| beta * c.value;
    let best = evals
        .iter()
        .enumerate()
        .filter(|(_, (b, c))| g(*b, c).is_finite())
        .min_by(|(_, (b1, c1)), (_, (b2, c2))| g(*b1, c1).total_cmp(&g(*b2, c2)));
    let Some((i, (beta0, c0))) = best else {
        return Ok(RatePoint { value: f64::INFINITY, beta: f64::NAN, x: f64::NAN, y: f64::NAN, on_boundary: false });
    };
    let mut point = RatePoint { value: g(*beta0, c0), beta: *beta0, x: c0.x, y: c0.y, on_boundary: c0.on_boundary };
    // refine on the neighbouring grid cells in log β
    let lo = betas[i.saturating_sub(1)].ln();
    let hi = betas[(i + 1).min(BETA_GRID - 1)].ln();
    let mut err = None;
    let mut warm = Some((c0.x, c0.y));
    let mut refine = |lb: f64| {
        let beta = lb.exp();
        match legendre_2d_from(law, f, 1.0 / beta, m / beta, warm) {
            Ok(c) => {
                let v = beta * c.value;
                if c.value.is_finite() {
                    warm = Some((c.x, c.y));
                }
                if v < point.value {
                    point = RatePoint { value: v, beta, x: c.x, y: c.y, on_boundary: c.on_boundary };
                }
                v
            }
            Err(e) => {
                err.get_or_insert(e);
                f64::INFINITY
            }
        }
    };
    golden_min(&mut refine, lo, hi, 1e-10);
    if let Some(e) = err {
        return Err(e);
    }
    point.value = point.value.max(0.0);
    Ok(point)
}

/// Result of the `(α, ζ)` minimization for `F ≡ 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Variational {
    pub value: f64,
    pub alpha: f64,
}

/// `inf_α { m H(ζ|ψ) + (1 − α) ξ : ζ(τ) = α/m }` over `α ∈ [0, 1]`.
pub fn variational_crosscheck_j1(law: &WaitingLaw, m: f64) -> Result<Variational> {
    if !(m > 0.0) {
        return Err(Error::InvalidArgument(format!("m must be positive, got {m}")));
    }
    let (inf, sup) = law.support();
    let xi = law.xi();
    let t_lim = law.t_limit();
    let mean = law.mean();
    // feasible α: α/m strictly inside the attainable tilted means, up to T
    let lo = (inf * m).max(0.0);
    let hi = (t_lim * m).min(1.0);
    let objective = |alpha: f64| -> Result<f64> {
        let target = alpha / m;
        let h = if (target - mean).abs() <= 1e-15 * target {
            0.0
        } else if target >= sup && sup.is_finite() {
            // a point mass at the top of the support
            match law.discrete_atoms() {
                Some(a) if (a[a.len() - 1].0 - target).abs() <= 1e-12 * target => -a[a.len() - 1].1.ln(),
                _ => f64::INFINITY,
            }
        } else if target <= inf {
            match law.discrete_atoms() {
                Some(a) if (a[0].0 - target).abs() <= 1e-12 * target => -a[0].1.ln(),
                _ => f64::INFINITY,
            }
        } else {
            entropy_at_mean(law, target)?
        };
        let jump = if alpha < 1.0 { (1.0 - alpha) * xi } else { 0.0 };
        Ok(m * h + jump)
    };
    if xi.is_infinite() || hi <= lo {
        // any macroscopic inter-arrival costs ∞: α = 1
        if lo > 1.0 {
            return Ok(Variational { value: f64::INFINITY, alpha: f64::NAN });
        }
        let v = objective(1.0)?;
        return Ok(Variational { value: v, alpha: 1.0 });
    }
    let mut err = None;
    let mut f = |alpha: f64| match objective(alpha) {
        Ok(v) => v,
        Err(e) => {
            err.get_or_insert(e);
            f64::INFINITY
        }
    };
    // the value is flat near an interior optimum; a boundary optimum is checked directly
    let r = golden_min(&mut f, lo, hi, 1e-9);
    let edge = f(hi);
    if let Some(e) = err {
        return Err(e);
    }
    let (value, alpha) = if edge <= r.value { (edge, hi) } else { (r.value, r.x) };
    Ok(Variational { value: value.max(0.0), alpha })
}

/// Regime label of a point on a rate curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    StrictConvex,
    Affine,
    Zero,
    Infeasible,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::StrictConvex => "STRICT_CONVEX",
            Regime::Affine => "AFFINE",
            Regime::Zero => "ZERO",
            Regime::Infeasible => "INFEASIBLE",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub m: f64,
    pub value: f64,
    pub regime: Regime,
}

/// Values of `J_F` on a grid with regime labels.
#[derive(Debug, Clone, PartialEq)]
pub struct RateCurve {
    pub points: Vec<CurvePoint>,
    /// `1/T` when `T < ∞`.
    pub kink: Option<f64>,
    pub xi: f64,
    pub t_limit: f64,
}

impl RateCurve {
    /// `m,J,regime` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("m,J,regime\n");
        for p in &self.points {
            let _ = writeln!(out, "{},{},{}", fmt_sig(p.m), fmt_sig(p.value), p.regime);
        }
        out
    }
}

/// Absolute threshold below which a rate counts as zero.
pub const ZERO_LEVEL: f64 = 1e-9;

/// Labels values on a sorted grid by their second differences.
pub fn label_curve(ms: &[f64], values: &[f64]) -> Vec<Regime> {
    let finite: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
    let span = if finite.is_empty() {
        0.0
    } else {
        finite.iter().copied().fold(f64::NEG_INFINITY, f64::max)
            - finite.iter().copied().fold(f64::INFINITY, f64::min)
    };
    let tol = 1e-6 * span;
    let n = ms.len();
    // second difference scaled to the mean spacing, at interior points
    let second = |i: usize| -> Option<f64> {
        if i == 0 || i + 1 >= n {
            return None;
        }
        let (v0, v1, v2) = (values[i - 1], values[i], values[i + 1]);
        if !(v0.is_finite() && v1.is_finite() && v2.is_finite()) {
            return None;
        }
        let (h0, h1) = (ms[i] - ms[i - 1], ms[i + 1] - ms[i]);
        if h0 <= 0.0 || h1 <= 0.0 {
            return None;
        }
        Some(((v2 - v1) / h1 - (v1 - v0) / h0) * 0.5 * (h0 + h1))
    };
    (0..n)
        .map(|i| {
            let v = values[i];
            if !v.is_finite() {
                return Regime::Infeasible;
            }
            // a lone zero is the minimum of a convex curve, not a flat stretch
            let flat = |j: usize| values.get(j).is_some_and(|w| *w < ZERO_LEVEL);
            if v < ZERO_LEVEL && (n == 1 || (i > 0 && flat(i - 1)) || flat(i + 1)) {
                return Regime::Zero;
            }
            let sd = second(i)
                .or_else(|| if i == 0 { second(1) } else { None })
                .or_else(|| if i + 1 == n && n >= 2 { second(n - 2) } else { None });
            match sd {
                Some(s) if s.abs() < tol => Regime::Affine,
                _ => Regime::StrictConvex,
            }
        })
        .collect()
}

/// Evaluates `J_F` on `grid`, labels regimes and reports the kink `1/T`.
pub fn affine_scan_f(law: &WaitingLaw, f: &BoundedFn, grid: &[f64]) -> Result<RateCurve> {
    if grid.windows(2).any(|w| w[1] < w[0]) || grid.iter().any(|m| !(*m >= 0.0)) {
        return Err(Error::InvalidArgument("grid must be sorted and nonnegative".into()));
    }
    let values = grid.iter().map(|&m| rate_jf(law, f, m)).collect::<Result<Vec<f64>>>()?;
    let t_limit = law.t_limit();
    let mut regimes = label_curve(grid, &values);
    for ((r, &m), &v) in regimes.iter_mut().zip(grid).zip(&values) {
        if v < ZERO_LEVEL && m * t_limit <= 1.0 {
            *r = Regime::Zero;
        }
    }
    Ok(RateCurve {
        points: grid
            .iter()
            .zip(values)
            .zip(regimes)
            .map(|((&m, value), regime)| CurvePoint { m, value, regime })
            .collect(),
        kink: if t_limit.is_finite() { Some(1.0 / t_limit) } else { None },
        xi: law.xi(),
        t_limit,
    })
}

/// [`affine_scan_f`] with `F ≡ 1`.
pub fn affine_scan(law: &WaitingLaw, grid: &[f64]) -> Result<RateCurve> {
    affine_scan_f(law, &BoundedFn::one(), grid)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn j1_exp(m: f64) -> f64 {
        1.0 - m + m * m.ln()
    }

    #[test]
    fn tilt_solver() {
        let e = WaitingLaw::exponential(1.0).unwrap();
        assert!((solve_tilt_for_mean(&e, 0.5).unwrap() + 1.0).abs() < 1e-12);
        assert_eq!(solve_tilt_for_mean(&e, 1.0).unwrap(), 0.0);
        assert!((solve_tilt_for_mean(&e, 4.0).unwrap() - 0.75).abs() < 1e-12);
        let p = WaitingLaw::pareto(2.0, 1.0).unwrap();
        assert!(matches!(solve_tilt_for_mean(&p, 2.5), Err(Error::Infeasible(_))));
        assert!(matches!(solve_tilt_for_mean(&p, 1.0), Err(Error::Infeasible(_))));
        let c = solve_tilt_for_mean(&p, 1.5).unwrap();
        assert!((p.tilted_mean(c).unwrap() - 1.5).abs() < 1e-11);
    }

    #[test]
    fn exponential_counting_rate() {
        let e = WaitingLaw::exponential(1.0).unwrap();
        let one = BoundedFn::one();
        assert_eq!(rate_jf(&e, &one, 1.0).unwrap(), 0.0);
        assert!((rate_jf(&e, &one, 2.0).unwrap() - j1_exp(2.0)).abs() < 1e-12);
        assert_eq!(rate_jf(&e, &one, 0.0).unwrap(), 1.0);
        assert!((rate_jf(&e, &one, 1e-6).unwrap() - 1.0).abs() < 1e-3);
        assert!((rate_j1_closed(&e, 2.0).unwrap() - j1_exp(2.0)).abs() < 1e-12);
    }

    #[test]
    fn pareto_affine_branch() {
        let p = WaitingLaw::pareto(2.0, 1.0).unwrap();
        assert_eq!(rate_j1_closed(&p, 0.25).unwrap(), 0.0);
        assert!(rate_j1_closed(&p, 0.75).unwrap() > 0.0);
        let v = variational_crosscheck_j1(&p, 0.25).unwrap();
        assert!(v.value < 1e-12 && (v.alpha - 0.5).abs() < 0.01, "{v:?}");
    }

    #[test]
    fn variational_matches_closed_form() {
        let e = WaitingLaw::exponential(1.0).unwrap();
        let v = variational_crosscheck_j1(&e, 2.0).unwrap();
        assert!((v.value - j1_exp(2.0)).abs() < 1e-10 && v.alpha == 1.0);
        let v = variational_crosscheck_j1(&e, 1.0).unwrap();
        assert!(v.value < 1e-14);
    }

    #[test]
    fn scan_labels() {
        let e = WaitingLaw::exponential(1.0).unwrap();
        let grid: Vec<f64> = (0..50).map(|i| 0.2 + 2.8 * i as f64 / 49.0).collect();
        let curve = affine_scan(&e, &grid).unwrap();
        assert!(curve.kink.is_none());
        assert!(curve
            .points
            .iter()
            .all(|p| p.regime == Regime::StrictConvex || (p.regime == Regime::Zero && (p.m - 1.0).abs() < 0.1)));
        let d = WaitingLaw::atoms(vec![(1.0, 1.0)]).unwrap();
        let c = affine_scan(&d, &[1.0]).unwrap();
        assert_eq!(c.points[0].regime, Regime::Zero);
        assert_eq!(c.to_csv(), "m,J,regime\n1,0,ZERO\n");
    }

    #[test]
    fn affine_labels_for_linear_values() {
        let ms = [0.1, 0.2, 0.3, 0.4];
        let vs = [1.0, 0.9, 0.8, 0.7];
        assert!(label_curve(&ms, &vs).iter().all(|r| *r == Regime::Affine));
    }

    #[test]
    fn zero_reward_rate() {
        let e = WaitingLaw::exponential(1.0).unwrap();
        let z = BoundedFn::Const(0.0);
        assert_eq!(rate_jf(&e, &z, 0.0).unwrap(), 0.0);
        assert_eq!(rate_jf(&e, &z, 0.5).unwrap(), f64::INFINITY);
        // C_t = 2(N_t − 1): J(m) = J₁(m/2)
        let two = BoundedFn::Const(2.0);
        assert!((rate_jf(&e, &two, 4.0).unwrap() - j1_exp(2.0)).abs() < 1e-12);
    }
}
