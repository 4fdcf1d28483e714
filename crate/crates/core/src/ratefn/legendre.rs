//! Convex conjugates of the log moment generating function, in one and two
//! variables, and the entropy projection onto two moment constraints.

use std::cell::RefCell;

use crate::distributions::WaitingLaw;
use crate::error::{Error, Result};
use crate::functions::BoundedFn;
use crate::numeric::{find_root, golden_max};

/// Objective level treated as `+∞`.
pub const INFINITE_LEVEL: f64 = 1e12;

const DOUBLINGS: usize = 200;

/// A conjugate value and its maximizer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Conjugate {
    pub value: f64,
    pub x: f64,
}

/// Right end of the x-domain: ξ itself when the boundary moment is finite.
pub(crate) fn x_cap(law: &WaitingLaw) -> Result<f64> {
    let xi = law.xi();
    if xi == f64::INFINITY {
        return Ok(xi);
    }
    if law.log_mgf(xi)?.is_finite() {
        Ok(xi)
    } else {
        Ok(xi - (-40f64).exp2() * xi.max(1.0))
    }
}

/// Runs `f` with fallible evaluation folded into NaN, returning the first
/// error afterwards.
struct Guard {
    err: RefCell<Option<Error>>,
}

impl Guard {
    fn new() -> Self {
        Self { err: RefCell::new(None) }
    }

    fn eval(&self, r: Result<f64>) -> f64 {
        match r {
            Ok(v) => v,
            Err(e) => {
                self.err.borrow_mut().get_or_insert(e);
                f64::NAN
            }
        }
    }

    fn finish<T>(self, value: T) -> Result<T> {
        match self.err.into_inner() {
            Some(e) => Err(e),
            None => Ok(value),
        }
    }
}

/// Outcome of a doubling search for the maximum of a concave function.
enum Bracket {
    /// The maximizer lies in `[lo, hi]`.
    Found(f64, f64),
    /// The objective exceeds [`INFINITE_LEVEL`].
    Unbounded,
    /// The objective increases to a finite limit along `x → ±∞`.
    Limit(Conjugate),
}

/// Doubles away from `x0` in the ascent direction of the concave `f`,
/// stopping at `cap` on the right.
fn bracket_max<F: FnMut(f64) -> f64>(f: &mut F, x0: f64, step: f64, cap: f64) -> Bracket {
    let f0 = f(x0);
    let right = (x0 + step).min(cap);
    let fr = if right > x0 { f(right) } else { f64::NEG_INFINITY };
    let left = x0 - step;
    let (dir, mut prev, mut cur, mut fcur) = if fr > f0 {
        (1.0, x0, right, fr)
    } else {
        let fl = f(left);
        if fl > f0 {
            (-1.0, x0, left, fl)
        } else {
            return Bracket::Found(left, if right > x0 { right } else { x0 });
        }
    };
    let mut h = step;
    let mut last_gain = f64::INFINITY;
    let mut stalls = 0;
    for _ in 0..DOUBLINGS {
        if fcur > INFINITE_LEVEL {
            return Bracket::Unbounded;
        }
        if dir > 0.0 && cur >= cap {
            return Bracket::Found(prev, cap);
        }
        h *= 2.0;
        let next = if dir > 0.0 { (cur + h).min(cap) } else { cur - h };
        let fnext = f(next);
        if !(fnext > fcur) {
            return Bracket::Found(prev.min(next), prev.max(next));
        }
        let gain = fnext - fcur;
        if gain <= 1e-15 * fnext.abs().max(1.0) {
            return Bracket::Limit(Conjugate { value: fnext, x: next });
        }
        // geometric decay of the gains signals a finite limit
        stalls = if gain < 0.25 * last_gain { stalls + 1 } else { 0 };
        if stalls >= 40 {
            return Bracket::Limit(Conjugate { value: fnext, x: next });
        }
        last_gain = gain;
        prev = cur;
        cur = next;
        fcur = fnext;
        if !cur.is_finite() || cur.abs() > 1e300 {
            break;
        }
    }
    Bracket::Unbounded
}

/// `Λ*(a) = sup_{x ≤ ξ} (ax − log ψ(e^{xτ}))` with its maximizer.
pub fn legendre_1d_point(law: &WaitingLaw, a: f64) -> Result<Conjugate> {
    if !(a > 0.0) {
        return Err(Error::InvalidArgument(format!("conjugate argument must be positive, got {a}")));
    }
    let (inf, sup) = law.support();
    if a < inf || a > sup {
        return Ok(Conjugate { value: f64::INFINITY, x: f64::NAN });
    }
    if a == inf || a == sup {
        // only an atom at the edge has a finite cost, −log of its mass
        let p = law.atom_mass(a);
        return Ok(if p >= 1.0 {
            Conjugate { value: 0.0, x: 0.0 }
        } else if p > 0.0 {
            Conjugate { value: -p.ln(), x: if a == inf { f64::NEG_INFINITY } else { f64::INFINITY } }
        } else {
            Conjugate { value: f64::INFINITY, x: f64::NAN }
        });
    }
    let cap = x_cap(law)?;
    if cap.is_finite() && cap == law.xi() {
        // concave objective still ascending at the boundary: the sup is there
        let m = law.tilted_mean(cap)?;
        if a >= m {
            return Ok(Conjugate { value: (a * cap - law.log_mgf(cap)?).max(0.0), x: cap });
        }
    }
    let guard = Guard::new();
    let mut obj = |x: f64| {
        let l = guard.eval(law.log_mgf(x));
        if l == f64::INFINITY {
            f64::NEG_INFINITY
        } else {
            a * x - l
        }
    };
    let step = 1.0 / a;
    let out = match bracket_max(&mut obj, 0.0, step, cap) {
        Bracket::Unbounded => Conjugate { value: f64::INFINITY, x: f64::NAN },
        Bracket::Limit(c) => c,
        Bracket::Found(lo, hi) => {
            let m = golden_max(&mut obj, lo, hi, 1e-12);
            // x = 0 always attains 0
            if m.value > 0.0 {
                Conjugate { value: m.value, x: m.x }
            } else {
                Conjugate { value: 0.0, x: 0.0 }
            }
        }
    };
    guard.finish(out)
}

/// `Λ*(a)`; `+∞` where the supremum is infinite.
pub fn legendre_1d(law: &WaitingLaw, a: f64) -> Result<f64> {
    legendre_1d_point(law, a).map(|c| c.value)
}

/// Moments of the two-parameter family `ζ ∝ e^{xτ + yF(τ)} ψ`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Moments {
    /// `Λ(x, y) = log ψ(e^{xτ + yF})`.
    pub lambda: f64,
    pub m_tau: f64,
    pub m_f: f64,
    pub v_tau: f64,
    pub c_tf: f64,
    pub v_f: f64,
}

fn shift(f: &BoundedFn, y: f64) -> f64 {
    let (lo, hi) = f.range();
    if y >= 0.0 {
        hi
    } else {
        lo
    }
}

/// `Λ`, the means and the variance of `F` under `ζ_{x,y}`; `None` if the
/// normalizer diverges.
pub(crate) fn moments_y(law: &WaitingLaw, f: &BoundedFn, x: f64, y: f64) -> Result<Option<Moments>> {
    let k = shift(f, y);
    let g = |t: f64| {
        let v = f.eval(t);
        let w = if v == k { 1.0 } else { (y * (v - k)).exp() };
        [w, w * t, w * v, w * v * v]
    };
    Ok(law.weighted(x, 0.0, &g)?.map(|w| {
        let z = w.values[0];
        let m_f = w.values[2] / z;
        Moments {
            lambda: w.log_scale + z.ln() + y * k,
            m_tau: w.values[1] / z,
            m_f,
            v_tau: f64::NAN,
            c_tf: f64::NAN,
            v_f: (w.values[3] / z - m_f * m_f).max(0.0),
        }
    }))
}

/// All first and second moments; `None` if any of them diverges.
pub(crate) fn moments_full(law: &WaitingLaw, f: &BoundedFn, x: f64, y: f64) -> Result<Option<Moments>> {
    let k = shift(f, y);
    let g = |t: f64| {
        let v = f.eval(t);
        let w = if v == k { 1.0 } else { (y * (v - k)).exp() };
        [w, w * t, w * v, w * t * t, w * t * v, w * v * v]
    };
    Ok(law.weighted(x, 0.0, &g)?.map(|w| {
        let z = w.values[0];
        let m_tau = w.values[1] / z;
        let m_f = w.values[2] / z;
        Moments {
            lambda: w.log_scale + z.ln() + y * k,
            m_tau,
            m_f,
            v_tau: (w.values[3] / z - m_tau * m_tau).max(0.0),
            c_tf: w.values[4] / z - m_tau * m_f,
            v_f: (w.values[5] / z - m_f * m_f).max(0.0),
        }
    }))
}

/// A two-dimensional conjugate value with its maximizer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Conjugate2 {
    pub value: f64,
    pub x: f64,
    pub y: f64,
    /// The maximizer sits on the boundary `x = ξ`.
    pub on_boundary: bool,
}

impl Conjugate2 {
    fn infinite() -> Self {
        Self { value: f64::INFINITY, x: f64::NAN, y: f64::NAN, on_boundary: false }
    }
}

/// `sup_y (by − Λ(x, y))` by damped Newton steps, starting from `y0`.
fn inner_y(law: &WaitingLaw, f: &BoundedFn, b: f64, x: f64, y0: f64) -> Result<Option<(f64, Moments)>> {
    let mut y = if y0.is_finite() { y0 } else { 0.0 };
    let mut m = match moments_y(law, f, x, y)? {
        Some(m) => m,
        None => return Ok(None),
    };
    let mut h = b * y - m.lambda;
    let scale = {
        let (lo, hi) = f.range();
        (hi - lo).abs().max(b.abs()).max(1e-300)
    };
    let mut small_gains = 0;
    for _ in 0..300 {
        let grad = b - m.m_f;
        if grad.abs() <= 1e-14 * scale {
            break;
        }
        let limit = 4.0 * y.abs().max(1.0);
        let mut step = if m.v_f > 0.0 { grad / m.v_f } else { grad.signum() * limit };
        step = step.clamp(-limit, limit);
        let mut accepted = false;
        for _ in 0..60 {
            let yn = y + step;
            if !yn.is_finite() {
                break;
            }
            if let Some(mn) = moments_y(law, f, x, yn)? {
                let hn = b * yn - mn.lambda;
                if hn >= h {
                    let gain = hn - h;
                    y = yn;
                    m = mn;
                    h = hn;
                    accepted = true;
                    small_gains = if gain <= 1e-15 * h.abs().max(1.0) { small_gains + 1 } else { 0 };
                    break;
                }
            }
            step *= 0.5;
        }
        if !accepted || small_gains >= 3 || b * y - m.lambda > INFINITE_LEVEL {
            break;
        }
    }
    Ok(Some((y, m)))
}

/// `Λ*(a, b) = sup_{x ≤ ξ, y} (ax + by − log ψ(e^{xτ + yF}))`.
///
/// The inner supremum over `y` is solved by Newton's method and the outer
/// one through the root in `x` of its derivative `a − ζ(τ)`.
pub fn legendre_2d_point(law: &WaitingLaw, f: &BoundedFn, a: f64, b: f64) -> Result<Conjugate2> {
    legendre_2d_from(law, f, a, b, None)
}

/// As [`legendre_2d_point`], warm-started from a nearby maximizer.
pub fn legendre_2d_from(
    law: &WaitingLaw,
    f: &BoundedFn,
    a: f64,
    b: f64,
    start: Option<(f64, f64)>,
) -> Result<Conjugate2> {
    if !(a > 0.0) || !(b >= 0.0 || f.range().0 < 0.0) {
        return Err(Error::InvalidArgument(format!("conjugate arguments out of range: ({a}, {b})")));
    }
    if let Some(k) = f.constant() {
        // Λ(x, y) = yk + log ψ(e^{xτ}): finite only on the line b = k
        if (b - k).abs() > 1e-12 * k.abs().max(1.0) {
            return Ok(Conjugate2::infinite());
        }
        let c = legendre_1d_point(law, a)?;
        let on_boundary = c.x.is_finite() && c.x >= x_cap(law)?;
        return Ok(Conjugate2 { value: c.value, x: c.x, y: 0.0, on_boundary });
    }
    let (flo, fhi) = f.range();
    if b > fhi || b < flo {
        return Ok(Conjugate2::infinite());
    }
    let cap = x_cap(law)?;
    let (x0, mut y_warm) = match start {
        Some((x, y)) if x.is_finite() && y.is_finite() && x <= cap => (x, y),
        _ => (0.0f64.min(cap), 0.0),
    };
    let guard = Guard::new();
    let best = RefCell::new(Conjugate2 { value: f64::NEG_INFINITY, x: x0, y: 0.0, on_boundary: false });
    // G*(x) = ax + sup_y(by − Λ(x, y)) and its derivative a − ζ(τ)
    let mut outer = |x: f64| -> (f64, f64) {
        match guard.eval_pair(inner_y(law, f, b, x, y_warm)) {
            Some((y, m)) => {
                y_warm = y;
                let g = a * x + b * y - m.lambda;
                let mut bst = best.borrow_mut();
                if g > bst.value {
                    *bst = Conjugate2 { value: g, x, y, on_boundary: false };
                }
                (g, a - m.m_tau)
            }
            None => (f64::NEG_INFINITY, f64::NAN),
        }
    };
    let step = 0.25 * (1.0 / a).max(x0.abs());
    let tol = 1e-13 * a.max(1.0);

    let (g0, d0) = outer(x0);
    if g0 > INFINITE_LEVEL {
        return guard.finish(Conjugate2::infinite());
    }
    let mut result = None;
    if d0.abs() <= tol {
        result = Some(x0);
    } else {
        let dir = d0.signum();
        let mut prev = x0;
        let mut h = step;
        // right end of the region where the normalizer was seen to be finite
        let mut limit = cap;
        for _ in 0..DOUBLINGS {
            let mut next = prev + dir * h;
            if dir > 0.0 && next >= limit {
                next = limit;
            }
            let (g, d) = outer(next);
            if g > INFINITE_LEVEL {
                return guard.finish(Conjugate2::infinite());
            }
            if d.is_nan() {
                if dir < 0.0 || next - prev <= 1e-15 * prev.abs().max(1.0) {
                    break;
                }
                limit = next;
                h = 0.5 * (next - prev);
                continue;
            }
            if d.abs() <= tol {
                result = Some(next);
                break;
            }
            if d.signum() != dir {
                let (lo, hi) = if prev < next { (prev, next) } else { (next, prev) };
                let root = find_root(|x| outer(x).1, lo, hi, tol);
                result = Some(root.unwrap_or(best.borrow().x));
                break;
            }
            if dir > 0.0 && next >= cap {
                result = Some(cap);
                break;
            }
            if next >= limit {
                // still ascending at the last finite point below a divergence
                h = 0.5 * (limit - next);
                prev = next;
                if h <= 1e-15 * next.abs().max(1.0) {
                    break;
                }
                continue;
            }
            prev = next;
            h *= 2.0;
        }
    }
    let x_star = match result {
        Some(x) => x,
        // the objective approaches a finite limit at infinity
        None => best.borrow().x,
    };
    let (g, _) = outer(x_star);
    let mut out = *best.borrow();
    if g >= out.value {
        out.value = g;
        out.x = x_star;
        out.y = y_warm;
    }
    out.on_boundary = cap.is_finite() && out.x >= cap;
    out.value = out.value.max(0.0);
    guard.finish(out)
}

impl Guard {
    fn eval_pair<T>(&self, r: Result<Option<T>>) -> Option<T> {
        match r {
            Ok(v) => v,
            Err(e) => {
                self.err.borrow_mut().get_or_insert(e);
                None
            }
        }
    }
}

/// `Λ*(a, b)`; `+∞` off the effective domain.
pub fn legendre_2d(law: &WaitingLaw, f: &BoundedFn, a: f64, b: f64) -> Result<f64> {
    legendre_2d_point(law, f, a, b).map(|c| c.value)
}

/// The I-projection `ζ ∝ e^{xτ + yF}ψ` with `ζ(τ) = a`, `ζ(F) = b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Projection {
    pub x: f64,
    pub y: f64,
    /// `H(ζ | ψ)`.
    pub entropy: f64,
}

/// Matches the moments `(a, b)` within the family `e^{xτ + yF}ψ` by
/// two-dimensional Newton iterations and returns `H(ζ | ψ)`.
pub fn entropy_projection(law: &WaitingLaw, a: f64, f: &BoundedFn, b: f64) -> Result<Projection> {
    if let Some(k) = f.constant() {
        if (b - k).abs() > 1e-12 * k.abs().max(1.0) {
            return Err(Error::Infeasible(format!("F ≡ {k} cannot have mean {b}")));
        }
        let c = super::contract::solve_tilt_for_mean(law, a)?;
        return Ok(Projection { x: c, y: 0.0, entropy: law.entropy_of_tilt(c)? });
    }
    let cap = x_cap(law)?;
    let sa = a.max(1e-300);
    let sb = {
        let (lo, hi) = f.range();
        (hi - lo).max(1e-300)
    };
    let merit = |m: &Moments, x: f64, y: f64| a * x + b * y - m.lambda;
    let (mut x, mut y) = (0.0f64.min(cap), 0.0);
    let mut newton_ok = false;
    if let Some(mut m) = moments_full(law, f, x, y)? {
        for _ in 0..200 {
            let (ra, rb) = (a - m.m_tau, b - m.m_f);
            if ra.abs() <= 1e-13 * sa && rb.abs() <= 1e-13 * sb {
                newton_ok = true;
                break;
            }
            // regularized solve of Cov·d = r
            let tr = m.v_tau + m.v_f;
            let mut lam = 0.0;
            let (mut dx, mut dy) = (0.0, 0.0);
            for _ in 0..8 {
                let (h11, h12, h22) = (m.v_tau + lam, m.c_tf, m.v_f + lam);
                let det = h11 * h22 - h12 * h12;
                if det > 1e-13 * (h11 * h22).max(f64::MIN_POSITIVE) {
                    dx = (h22 * ra - h12 * rb) / det;
                    dy = (h11 * rb - h12 * ra) / det;
                    break;
                }
                lam = if lam == 0.0 { 1e-12 * tr.max(1e-300) } else { lam * 100.0 };
            }
            let g0 = merit(&m, x, y);
            let mut s = 1.0;
            let mut moved = false;
            for _ in 0..60 {
                let xn = (x + s * dx).min(cap);
                let yn = y + s * dy;
                if let Some(mn) = moments_full(law, f, xn, yn)? {
                    if merit(&mn, xn, yn) >= g0 - 1e-15 * g0.abs().max(1.0) {
                        x = xn;
                        y = yn;
                        m = mn;
                        moved = true;
                        break;
                    }
                }
                s *= 0.5;
            }
            if !moved || merit(&m, x, y) > INFINITE_LEVEL {
                break;
            }
        }
        if newton_ok {
            if x >= cap && a - m.m_tau > 1e-9 * sa {
                return Err(Error::Infeasible("moment target needs a tilt beyond ξ".into()));
            }
            return Ok(Projection { x, y, entropy: (x * m.m_tau + y * m.m_f - m.lambda).max(0.0) });
        }
    }
    // nested fallback: outer root in x, inner Newton in y
    let c = legendre_2d_point(law, f, a, b)?;
    if !c.value.is_finite() || c.on_boundary {
        return Err(Error::Infeasible(format!("({a}, {b}) is not attainable by a tilt")));
    }
    let (_, m) = inner_y(law, f, b, c.x, c.y)?
        .ok_or_else(|| Error::Infeasible("tilt normalizer diverges".into()))?;
    if (a - m.m_tau).abs() > 1e-9 * sa || (b - m.m_f).abs() > 1e-9 * sb {
        return Err(Error::Infeasible(format!("moments ({a}, {b}) are on the boundary")));
    }
    Ok(Projection {
        x: c.x,
        y: c.y,
        entropy: (c.x * m.m_tau + c.y * m.m_f - m.lambda).max(0.0),
    })
}
