//! Adaptive Gauss–Kronrod quadrature on bounded intervals and a dyadic
//! block scheme for integrals over half-lines.
//!
//! Half-line integrals are split into blocks `[u·2^k, u·2^(k+1)]` around an
//! anchor `u`. The upward scan declares divergence when the block integrals
//! fail to decay for [`DIVERGENCE_RUN`] consecutive blocks; both scans stop
//! once a geometric estimate of the remaining tail is negligible.

use crate::error::{Error, Result};

/// Default relative tolerance of every quadrature in the crate.
pub const REL_TOL: f64 = 1e-10;

/// Consecutive non-decaying dyadic blocks that signal a divergent integral.
pub const DIVERGENCE_RUN: usize = 64;

const MAX_INTERVALS: usize = 4000;
const MAX_BLOCKS: usize = 1000;

// Kronrod 15-point nodes (positive half, descending) and weights; the Gauss
// 7-point rule uses every other node.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Clone, Copy)]
struct Panel<const N: usize> {
    a: f64,
    b: f64,
    value: [f64; N],
    error: [f64; N],
    abs: [f64; N],
}

fn gk15<const N: usize, F: Fn(f64) -> [f64; N]>(f: &F, a: f64, b: f64) -> Panel<N> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = [0.0; N];
    let mut gauss = [0.0; N];
    let mut abs = [0.0; N];
    for i in 0..N {
        kronrod[i] = fc[i] * WGK[7];
        gauss[i] = fc[i] * WG[3];
        abs[i] = fc[i].abs() * WGK[7];
    }
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        for i in 0..N {
            kronrod[i] += WGK[j] * (f1[i] + f2[i]);
            abs[i] += WGK[j] * (f1[i].abs() + f2[i].abs());
            if j % 2 == 1 {
                gauss[i] += WG[j / 2] * (f1[i] + f2[i]);
            }
        }
    }
    let mut value = [0.0; N];
    let mut error = [0.0; N];
    for i in 0..N {
        value[i] = kronrod[i] * half;
        error[i] = ((kronrod[i] - gauss[i]) * half).abs();
        abs[i] *= half.abs();
    }
    Panel { a, b, value, error, abs }
}

/// Adaptive Gauss–Kronrod (7/15) integration of a vector-valued integrand
/// over `[a, b]`.
///
/// Component `i` is accepted once its error estimate is below
/// `max(abs_tol, rel_tol·|I_i|)`, with a round-off floor proportional to the
/// integral of `|f_i|`.
pub fn integrate<const N: usize, F: Fn(f64) -> [f64; N]>(
    f: &F,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_tol: f64,
) -> Result<[f64; N]> {
    if a == b {
        return Ok([0.0; N]);
    }
    let mut panels = vec![gk15(f, a, b)];
    loop {
        let mut total = [0.0; N];
        let mut err = [0.0; N];
        let mut abs = [0.0; N];
        for p in &panels {
            for i in 0..N {
                total[i] += p.value[i];
                err[i] += p.error[i];
                abs[i] += p.abs[i];
            }
        }
        if total.iter().any(|v| !v.is_finite()) {
            return Err(Error::Quadrature(format!(
                "non-finite integrand on [{a}, {b}]"
            )));
        }
        let tol: [f64; N] = std::array::from_fn(|i| {
            abs_tol
                .max(rel_tol * total[i].abs())
                .max(1e-15 * abs[i])
        });
        if (0..N).all(|i| err[i] <= tol[i]) {
            return Ok(total);
        }
        if panels.len() >= MAX_INTERVALS {
            return Err(Error::Quadrature(format!(
                "no convergence on [{a}, {b}] after {MAX_INTERVALS} panels"
            )));
        }
        // split the panel with the largest normalized error
        let (worst, _) = panels
            .iter()
            .enumerate()
            .map(|(k, p)| {
                let score = (0..N)
                    .map(|i| p.error[i] / tol[i].max(f64::MIN_POSITIVE))
                    .fold(0.0, f64::max);
                (k, score)
            })
            .fold((0, f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc });
        let p = panels.swap_remove(worst);
        let mid = 0.5 * (p.a + p.b);
        if mid <= p.a || mid >= p.b {
            return Err(Error::Quadrature(format!(
                "panel [{}, {}] cannot be subdivided further",
                p.a, p.b
            )));
        }
        panels.push(gk15(f, p.a, mid));
        panels.push(gk15(f, mid, p.b));
    }
}

/// Scalar convenience wrapper around [`integrate`].
pub fn integrate_scalar<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_tol: f64,
) -> Result<f64> {
    let g = |x: f64| [f(x)];
    integrate(&g, a, b, rel_tol, abs_tol).map(|v| v[0])
}

/// Outcome of a half-line integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HalfLine<const N: usize> {
    Finite([f64; N]),
    Diverged,
}

struct BlockScan<const N: usize> {
    sum: [f64; N],
    prev: Option<[f64; N]>,
    rising: usize,
    quiet: usize,
}

impl<const N: usize> BlockScan<N> {
    fn new() -> Self {
        Self {
            sum: [0.0; N],
            prev: None,
            rising: 0,
            quiet: 0,
        }
    }

    /// Adds a block; returns true once the geometric tail estimate is
    /// negligible for two consecutive blocks.
    fn push(&mut self, block: [f64; N], rel_tol: f64) -> bool {
        for i in 0..N {
            self.sum[i] += block[i];
        }
        let mut rising = false;
        let mut settled = true;
        if let Some(prev) = self.prev {
            for i in 0..N {
                let (cur, old) = (block[i].abs(), prev[i].abs());
                if cur > 0.0 && cur >= old {
                    rising = true;
                }
                let tail = if cur == 0.0 {
                    0.0
                } else if cur < old {
                    let r = cur / old;
                    cur * r / (1.0 - r)
                } else {
                    f64::INFINITY
                };
                if tail > 0.1 * rel_tol * self.sum[i].abs() && tail > 0.0 {
                    settled = false;
                }
            }
        } else {
            settled = false;
        }
        self.rising = if rising { self.rising + 1 } else { 0 };
        self.quiet = if settled { self.quiet + 1 } else { 0 };
        self.prev = Some(block);
        self.quiet >= 2
    }
}

/// Integrates `f` over `[lower, ∞)` with dyadic blocks anchored at `anchor`.
///
/// `anchor` should sit near the bulk of the integrand (for densities, close
/// to the mode); the scan runs downward toward `lower` and upward to
/// infinity from there.
pub fn integrate_half_line<const N: usize, F: Fn(f64) -> [f64; N]>(
    f: &F,
    lower: f64,
    anchor: f64,
    rel_tol: f64,
) -> Result<HalfLine<N>> {
    if !(lower >= 0.0) || !(anchor > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "half-line integral needs lower >= 0 and anchor > 0 (got {lower}, {anchor})"
        )));
    }
    let start = if anchor > lower { anchor } else if lower > 0.0 { lower } else { anchor };
    let block_tol = 1e-2 * rel_tol;

    let mut total = [0.0; N];

    // Downward scan toward `lower`.
    if start > lower {
        let mut scan = BlockScan::<N>::new();
        let mut hi = start;
        for _ in 0..MAX_BLOCKS {
            let lo = (0.5 * hi).max(lower);
            let block = integrate(f, lo, hi, block_tol, 0.0)?;
            let done = scan.push(block, rel_tol);
            if lo <= lower || done {
                break;
            }
            hi = lo;
            if hi < f64::MIN_POSITIVE {
                break;
            }
        }
        if lower == 0.0 && scan.quiet < 2 && hi >= f64::MIN_POSITIVE {
            return Err(Error::Quadrature(
                "integrand near the origin does not settle".into(),
            ));
        }
        for i in 0..N {
            total[i] += scan.sum[i];
        }
    }

    // Upward scan.
    let mut scan = BlockScan::<N>::new();
    let mut lo = start;
    let mut converged = false;
    for _ in 0..MAX_BLOCKS {
        let hi = 2.0 * lo;
        if !hi.is_finite() {
            break;
        }
        let block = match integrate(f, lo, hi, block_tol, 0.0) {
            Ok(b) => b,
            // overflow of the integrand on its way to infinity
            Err(Error::Quadrature(_)) if f(hi).iter().any(|v| !v.is_finite()) => {
                return Ok(HalfLine::Diverged)
            }
            Err(e) => return Err(e),
        };
        if block.iter().any(|v| !v.is_finite()) {
            return Ok(HalfLine::Diverged);
        }
        if scan.push(block, rel_tol) {
            converged = true;
            break;
        }
        if scan.rising >= DIVERGENCE_RUN {
            return Ok(HalfLine::Diverged);
        }
        lo = hi;
    }
    if !converged {
        return Err(Error::Quadrature(
            "half-line integral decays too slowly to resolve".into(),
        ));
    }
    for i in 0..N {
        total[i] += scan.sum[i];
    }
    Ok(HalfLine::Finite(total))
}

/// Shape of a log-integrand `h` on `(0, ∞)` read off a log-spaced probe grid.
#[derive(Debug, Clone, Copy)]
pub struct Peak {
    /// The largest value of `h` seen.
    pub top: f64,
    /// Probe point maximizing `ln u + h(u)`, where most of the mass sits on a
    /// logarithmic scale.
    pub mass_at: f64,
}

/// Probes `h` at `scale·2^(j/4)` for `|j| ≤ 240`.
pub fn probe_log_peak<H: Fn(f64) -> f64>(h: &H, scale: f64) -> Peak {
    let mut top = f64::NEG_INFINITY;
    let mut best = (scale, f64::NEG_INFINITY);
    for j in -240..=240 {
        let u = scale * (j as f64 / 4.0).exp2();
        let v = h(u);
        if v > top || v.is_nan() {
            top = if v.is_nan() { f64::INFINITY } else { v };
        }
        let m = u.ln() + v;
        if m > best.1 {
            best = (u, m);
        }
    }
    Peak { top, mass_at: best.0 }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let v = integrate_scalar(&|x: f64| x * x * x - 2.0 * x, 0.0, 2.0, 1e-12, 0.0).unwrap();
        assert!((v - 0.0).abs() < 1e-13);
        let v = integrate_scalar(&|x: f64| x.powi(6), -1.0, 1.0, 1e-12, 0.0).unwrap();
        assert!((v - 2.0 / 7.0).abs() < 1e-14);
    }

    #[test]
    fn endpoint_singularity_resolved() {
        let v = integrate_scalar(&|x: f64| 1.0 / x.sqrt(), 0.0, 1.0, 1e-10, 0.0).unwrap();
        assert!((v - 2.0).abs() < 1e-9, "{v}");
    }

    #[test]
    fn half_line_exponential() {
        let f = |x: f64| [(-x).exp(), x * (-x).exp()];
        match integrate_half_line(&f, 0.0, 1.0, REL_TOL).unwrap() {
            HalfLine::Finite(v) => {
                assert!((v[0] - 1.0).abs() < 1e-10);
                assert!((v[1] - 1.0).abs() < 1e-10);
            }
            HalfLine::Diverged => panic!("diverged"),
        }
    }

    #[test]
    fn half_line_power_tail_and_divergence() {
        // ∫_1^∞ 2 τ^{-3} dτ = 1
        let f = |x: f64| [2.0 * x.powi(-3)];
        if let HalfLine::Finite(v) = integrate_half_line(&f, 1.0, 1.0, REL_TOL).unwrap() {
            assert!((v[0] - 1.0).abs() < 1e-10);
        } else {
            panic!("diverged");
        }
        // e^{0.1τ} 2τ^{-3} diverges
        let g = |x: f64| [2.0 * (0.1 * x).exp() * x.powi(-3)];
        assert_eq!(integrate_half_line(&g, 1.0, 1.0, REL_TOL).unwrap(), HalfLine::Diverged);
        // 1/τ diverges logarithmically: blocks are constant
        let h = |x: f64| [1.0 / x];
        assert_eq!(integrate_half_line(&h, 1.0, 1.0, REL_TOL).unwrap(), HalfLine::Diverged);
    }

    #[test]
    fn integrable_singularity_at_origin() {
        // ∫_0^∞ τ^{-1/2} e^{-τ} dτ = √π
        let f = |x: f64| [x.powf(-0.5) * (-x).exp()];
        if let HalfLine::Finite(v) = integrate_half_line(&f, 0.0, 1.0, REL_TOL).unwrap() {
            assert!((v[0] - std::f64::consts::PI.sqrt()).abs() < 1e-9, "{}", v[0]);
        } else {
            panic!("diverged");
        }
    }
}
