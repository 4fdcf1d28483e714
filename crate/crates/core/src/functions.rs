//! Test functions: bounded rewards `F(τ)`, bivariate functions `f(a, b)` of
//! the recurrence pair, and piecewise-linear profiles `φ`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::numeric::{integrate_scalar, REL_TOL};

/// A bounded reward `F : (0, ∞) → ℝ` from the named registry.
#[derive(Debug, Clone, PartialEq)]
pub enum BoundedFn {
    /// `F ≡ k`; `one` is `k = 1`.
    Const(f64),
    /// `min(τ, K)`; `min1` is `K = 1`.
    Sat(f64),
    /// `τ / (1 + τ)`.
    Sig,
    /// 1 on `[a, b]`, linear ramps of width `w` on both sides, 0 beyond.
    Ind { a: f64, b: f64, w: f64 },
}

impl BoundedFn {
    pub fn one() -> Self {
        BoundedFn::Const(1.0)
    }

    pub fn eval(&self, tau: f64) -> f64 {
        match *self {
            BoundedFn::Const(k) => k,
            BoundedFn::Sat(k) => tau.min(k),
            BoundedFn::Sig => tau / (1.0 + tau),
            BoundedFn::Ind { a, b, w } => {
                if tau >= a && tau <= b {
                    1.0
                } else if tau < a {
                    ((tau - (a - w)) / w).clamp(0.0, 1.0)
                } else {
                    ((b + w - tau) / w).clamp(0.0, 1.0)
                }
            }
        }
    }

    /// Bounds `(inf F, sup F)` over `(0, ∞)`.
    pub fn range(&self) -> (f64, f64) {
        match *self {
            BoundedFn::Const(k) => (k, k),
            BoundedFn::Sat(k) => (0.0, k),
            BoundedFn::Sig => (0.0, 1.0),
            BoundedFn::Ind { .. } => (0.0, 1.0),
        }
    }

    pub fn constant(&self) -> Option<f64> {
        match *self {
            BoundedFn::Const(k) => Some(k),
            _ => None,
        }
    }

    /// Parses a registry name: `one`, `min1`, `sat(K)`, `sig`, `ind(a,b,w)`,
    /// `const(k)`.
    pub fn parse(name: &str) -> Result<Self> {
        let s = name.trim();
        let bad = |reason: &str| Error::Parse { spec: s.to_string(), reason: reason.to_string() };
        let args = |inner: &str| -> Result<Vec<f64>> {
            inner
                .split(',')
                .map(|p| {
                    let p = p.trim();
                    if p == "inf" {
                        Ok(f64::INFINITY)
                    } else {
                        p.parse::<f64>().map_err(|_| bad("argument is not a number"))
                    }
                })
                .collect()
        };
        match s {
            "one" => return Ok(BoundedFn::Const(1.0)),
            "min1" => return Ok(BoundedFn::Sat(1.0)),
            "sig" => return Ok(BoundedFn::Sig),
            _ => {}
        }
        let (head, inner) = s
            .strip_suffix(')')
            .and_then(|t| t.split_once('('))
            .ok_or_else(|| bad("unknown function name"))?;
        let v = args(inner)?;
        match (head.trim(), v.as_slice()) {
            ("sat", [k]) if *k > 0.0 && k.is_finite() => Ok(BoundedFn::Sat(*k)),
            ("const", [k]) if k.is_finite() => Ok(BoundedFn::Const(*k)),
            ("ind", [a, b, w]) if *a >= 0.0 && b >= a && *w > 0.0 && a.is_finite() => {
                Ok(BoundedFn::Ind { a: *a, b: *b, w: *w })
            }
            _ => Err(bad("unknown function or invalid arguments")),
        }
    }
}

impl fmt::Display for BoundedFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            BoundedFn::Const(k) if k == 1.0 => write!(f, "one"),
            BoundedFn::Const(k) => write!(f, "const({k})"),
            BoundedFn::Sat(k) if k == 1.0 => write!(f, "min1"),
            BoundedFn::Sat(k) => write!(f, "sat({k})"),
            BoundedFn::Sig => write!(f, "sig"),
            BoundedFn::Ind { a, b, w } => write!(f, "ind({a},{b},{w})"),
        }
    }
}

type Eval2 = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
type Segment = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// A function `f(a, b)` of the backward and forward recurrence times with a
/// declared value `f(∞, ∞)`.
#[derive(Clone)]
pub struct BivariateTestFunction {
    eval: Eval2,
    segment: Option<Segment>,
    at_infinity: f64,
    bound: f64,
}

impl fmt::Debug for BivariateTestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BivariateTestFunction")
            .field("at_infinity", &self.at_infinity)
            .field("bound", &self.bound)
            .finish()
    }
}

impl BivariateTestFunction {
    /// Wraps `f` with its value at `(∞, ∞)` and a sup-norm bound.
    pub fn new<F>(f: F, at_infinity: f64, bound: f64) -> Self
    where
        F: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        Self { eval: Arc::new(f), segment: None, at_infinity, bound }
    }

    /// `f(a, b) = g(a + b)`; the segment integral is then `r·g(τ)` exactly.
    pub fn of_sum<G>(g: G, at_infinity: f64, bound: f64) -> Self
    where
        G: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let g = Arc::new(g);
        let g2 = Arc::clone(&g);
        Self {
            eval: Arc::new(move |a, b| g(a + b)),
            segment: Some(Arc::new(move |r, tau| r * g2(tau))),
            at_infinity,
            bound,
        }
    }

    /// `f` together with its exact segment integral `f̄(r, τ)`.
    pub fn with_segment<F, S>(f: F, segment: S, at_infinity: f64, bound: f64) -> Self
    where
        F: Fn(f64, f64) -> f64 + Send + Sync + 'static,
        S: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        Self { eval: Arc::new(f), segment: Some(Arc::new(segment)), at_infinity, bound }
    }

    pub fn constant(k: f64) -> Self {
        Self::of_sum(move |_| k, k, k.abs())
    }

    /// `1/(a + b)`, the inverse straddling length (unbounded near 0).
    pub fn inverse_length() -> Self {
        Self::of_sum(|tau| 1.0 / tau, 0.0, f64::INFINITY)
    }

    pub fn eval(&self, a: f64, b: f64) -> f64 {
        if a.is_infinite() && b.is_infinite() {
            self.at_infinity
        } else {
            (self.eval)(a, b)
        }
    }

    pub fn at_infinity(&self) -> f64 {
        self.at_infinity
    }

    pub fn bound(&self) -> f64 {
        self.bound
    }

    /// `f̄(r, τ) = ∫_0^r f(uτ, (1−u)τ) du`.
    pub fn segment_integral(&self, r: f64, tau: f64) -> Result<f64> {
        if let Some(seg) = &self.segment {
            return Ok(seg(r, tau));
        }
        if r <= 0.0 {
            return Ok(0.0);
        }
        let f = |u: f64| (self.eval)(u * tau, (1.0 - u) * tau);
        integrate_scalar(&f, 0.0, r, REL_TOL, 1e-300)
    }
}

/// A compactly supported piecewise-linear function given by breakpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinear {
    points: Vec<(f64, f64)>,
}

impl PiecewiseLinear {
    /// Breakpoints `(x_i, y_i)` with strictly increasing `x` and vanishing
    /// end values; the function is 0 outside `[x_0, x_n]`.
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidArgument("need at least two breakpoints".into()));
        }
        if points.windows(2).any(|w| !(w[1].0 > w[0].0)) {
            return Err(Error::InvalidArgument("breakpoints must increase strictly".into()));
        }
        if points[0].1 != 0.0 || points[points.len() - 1].1 != 0.0 {
            return Err(Error::InvalidArgument("end values must be 0 (compact support)".into()));
        }
        if points.iter().any(|p| !p.0.is_finite() || !p.1.is_finite() || p.0 < 0.0) {
            return Err(Error::InvalidArgument("breakpoints must be finite and nonnegative".into()));
        }
        Ok(Self { points })
    }

    /// Height `h` on `[a, b]` with linear ramps of width `w`.
    pub fn bump(a: f64, b: f64, w: f64, h: f64) -> Result<Self> {
        Self::new(vec![(a - w, 0.0), (a, h), (b, h), (b + w, 0.0)])
    }

    /// Zero function on `[1, 2]`.
    pub fn zero() -> Self {
        Self { points: vec![(1.0, 0.0), (2.0, 0.0)] }
    }

    /// Parses `x0:y0,x1:y1,...`.
    pub fn parse(s: &str) -> Result<Self> {
        let mut pts = Vec::new();
        for part in s.split(',') {
            let (x, y) = part.split_once(':').ok_or_else(|| Error::Parse {
                spec: s.to_string(),
                reason: format!("breakpoint `{}` lacks `x:y`", part.trim()),
            })?;
            let num = |t: &str| {
                t.trim().parse::<f64>().map_err(|_| Error::Parse {
                    spec: s.to_string(),
                    reason: format!("`{}` is not a number", t.trim()),
                })
            };
            pts.push((num(x)?, num(y)?));
        }
        Self::new(pts)
    }

    pub fn eval(&self, x: f64) -> f64 {
        let p = &self.points;
        if x <= p[0].0 || x >= p[p.len() - 1].0 {
            return 0.0;
        }
        let k = p.partition_point(|q| q.0 <= x);
        let (x0, y0) = p[k - 1];
        let (x1, y1) = p[k];
        y0 + (y1 - y0) * (x - x0) / (x1 - x0)
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn support(&self) -> (f64, f64) {
        (self.points[0].0, self.points[self.points.len() - 1].0)
    }

    pub fn sup_abs(&self) -> f64 {
        self.points.iter().map(|p| p.1.abs()).fold(0.0, f64::max)
    }
}

impl fmt::Display for PiecewiseLinear {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.points.iter().map(|(x, y)| format!("{x}:{y}")).collect();
        write!(f, "{}", parts.join(","))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_round_trip() {
        for name in ["one", "min1", "sat(2.5)", "sig", "ind(1.5,inf,0.1)", "const(0.5)"] {
            let f = BoundedFn::parse(name).unwrap();
            assert_eq!(BoundedFn::parse(&f.to_string()).unwrap(), f);
        }
        assert!(BoundedFn::parse("cos").is_err());
        let ind = BoundedFn::parse("ind(1.5,inf,0.1)").unwrap();
        assert_eq!(ind.eval(1.0), 0.0);
        assert_eq!(ind.eval(2.0), 1.0);
        assert!((ind.eval(1.45) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn segment_integral_by_quadrature_and_closed_form() {
        let f = BivariateTestFunction::new(|a, b| (-a).exp() * (-b).exp(), 0.0, 1.0);
        // f(uτ,(1−u)τ) = e^{−τ} for every u
        let v = f.segment_integral(0.4, 2.0).unwrap();
        assert!((v - 0.4 * (-2f64).exp()).abs() < 1e-15);
        let g = BivariateTestFunction::inverse_length();
        assert_eq!(g.segment_integral(0.5, 4.0).unwrap(), 0.125);
        assert_eq!(g.eval(f64::INFINITY, f64::INFINITY), 0.0);
    }

    #[test]
    fn piecewise_linear_bump() {
        let phi = PiecewiseLinear::bump(0.5, 1.5, 0.1, -1.0).unwrap();
        assert_eq!(phi.eval(1.0), -1.0);
        assert!((phi.eval(0.45) + 0.5).abs() < 1e-12);
        assert_eq!(phi.eval(3.0), 0.0);
        assert!(PiecewiseLinear::new(vec![(0.0, 1.0), (1.0, 0.0)]).is_err());
        assert_eq!(PiecewiseLinear::parse(&phi.to_string()).unwrap(), phi);
    }
}
