//! One-dimensional search routines: golden-section maximization and a
//! bracketing root finder.

use crate::error::{Error, Result};

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Result of a one-dimensional maximization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Maximum {
    pub x: f64,
    pub value: f64,
}

/// Golden-section search for the maximum of a unimodal `f` on `[a, b]`.
///
/// Stops once the bracket is narrower than `x_tol·max(1, |x|)`. The returned
/// point is the best of every evaluation, endpoints included, so a maximum
/// sitting on the boundary is found exactly.
pub fn golden_max<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, x_tol: f64) -> Maximum {
    let (mut lo, mut hi) = if a <= b { (a, b) } else { (b, a) };
    let mut best = Maximum { x: lo, value: f(lo) };
    let fb = f(hi);
    if fb > best.value || best.value.is_nan() {
        best = Maximum { x: hi, value: fb };
    }
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..400 {
        for (x, v) in [(x1, f1), (x2, f2)] {
            if v > best.value {
                best = Maximum { x, value: v };
            }
        }
        if hi - lo <= x_tol * best.x.abs().max(1.0) {
            break;
        }
        // NaN compares false, so it steers the bracket away from itself
        if f1 >= f2 || f2.is_nan() {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
    }
    best
}

/// Golden-section minimization; see [`golden_max`].
pub fn golden_min<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, x_tol: f64) -> Maximum {
    let m = golden_max(|x| -f(x), a, b, x_tol);
    Maximum { x: m.x, value: -m.value }
}

/// Root of a continuous `g` on a bracket `[a, b]` with `g(a)·g(b) ≤ 0`.
///
/// Illinois false position with a bisection step whenever the bracket fails
/// to halve; terminates when `|g| ≤ f_tol` or the bracket collapses.
pub fn find_root<G: FnMut(f64) -> f64>(mut g: G, a: f64, b: f64, f_tol: f64) -> Result<f64> {
    let (mut a, mut b) = (a, b);
    let (mut fa, mut fb) = (g(a), g(b));
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.is_nan() || fb.is_nan() || fa.signum() == fb.signum() {
        return Err(Error::Optimizer(format!(
            "root not bracketed on [{a}, {b}] (values {fa}, {fb})"
        )));
    }
    let mut side = 0i8;
    for _ in 0..400 {
        let width = (b - a).abs();
        let mut x = (a * fb - b * fa) / (fb - fa);
        if !x.is_finite() || x <= a.min(b) || x >= a.max(b) {
            x = 0.5 * (a + b);
        }
        let fx = g(x);
        if fx.abs() <= f_tol || fx == 0.0 {
            return Ok(x);
        }
        if fx.signum() == fb.signum() {
            b = x;
            fb = fx;
            if side == 1 {
                fa *= 0.5;
            }
            side = 1;
        } else {
            a = x;
            fa = fx;
            if side == -1 {
                fb *= 0.5;
            }
            side = -1;
        }
        if (b - a).abs() > 0.5 * width {
            // slow progress: force a bisection step
            let m = 0.5 * (a + b);
            let fm = g(m);
            if fm.abs() <= f_tol || fm == 0.0 {
                return Ok(m);
            }
            if fm.signum() == fb.signum() {
                b = m;
                fb = fm;
            } else {
                a = m;
                fa = fm;
            }
            side = 0;
        }
        if (b - a).abs() <= f64::EPSILON * a.abs().max(b.abs()).max(f64::MIN_POSITIVE) {
            return Ok(if fa.abs() < fb.abs() { a } else { b });
        }
    }
    Ok(if fa.abs() < fb.abs() { a } else { b })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_finds_interior_and_boundary() {
        let m = golden_max(|x| -(x - 0.3).powi(2), -2.0, 5.0, 1e-12);
        assert!((m.x - 0.3).abs() < 1e-6);
        let m = golden_max(|x| x, -2.0, 5.0, 1e-12);
        assert_eq!(m.x, 5.0);
    }

    #[test]
    fn root_of_cubic() {
        let r = find_root(|x| x * x * x - 2.0, 0.0, 3.0, 1e-14).unwrap();
        assert!((r - 2f64.cbrt()).abs() < 1e-12);
        assert!(find_root(|x| x * x + 1.0, -1.0, 1.0, 1e-12).is_err());
    }
}
