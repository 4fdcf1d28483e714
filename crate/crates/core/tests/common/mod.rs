//! Independent oracles shared by the integration tests. Nothing here calls
//! into the library's numerics.

#![allow(dead_code)]

/// Laws with an oracle log-mgf.
#[derive(Debug, Clone, Copy)]
pub enum Oracle {
    Exp(f64),
    /// shape, scale
    Gamma(f64, f64),
    /// alpha, xmin
    Pareto(f64, f64),
    /// atoms at 1 and 2 with equal mass
    TwoAtoms,
}

impl Oracle {
    pub fn spec(&self) -> String {
        match *self {
            Oracle::Exp(r) => format!("exp({r})"),
            Oracle::Gamma(k, s) => format!("gamma({k},{s})"),
            Oracle::Pareto(a, x) => format!("pareto({a},{x})"),
            Oracle::TwoAtoms => "atoms(1:0.5,2:0.5)".into(),
        }
    }

    pub fn law(&self) -> renewal_ldp::WaitingLaw {
        renewal_ldp::parse_law(&self.spec()).unwrap()
    }

    /// Abscissa of the exponential moments.
    pub fn xi(&self) -> f64 {
        match *self {
            Oracle::Exp(r) => r,
            Oracle::Gamma(_, s) => 1.0 / s,
            Oracle::Pareto(..) => 0.0,
            Oracle::TwoAtoms => f64::INFINITY,
        }
    }

    pub fn lmgf(&self, x: f64) -> f64 {
        match *self {
            Oracle::Exp(r) => {
                if x >= r {
                    f64::INFINITY
                } else {
                    (r / (r - x)).ln()
                }
            }
            Oracle::Gamma(k, s) => {
                if x * s >= 1.0 {
                    f64::INFINITY
                } else {
                    -k * (1.0 - x * s).ln()
                }
            }
            Oracle::Pareto(a, xm) => pareto_lmgf(a, xm, x),
            Oracle::TwoAtoms => {
                let m = x.max(2.0 * x);
                m + (0.5 * (x - m).exp() + 0.5 * (2.0 * x - m).exp()).ln()
            }
        }
    }

    /// Left end of the support.
    pub fn support_lo(&self) -> f64 {
        match *self {
            Oracle::Pareto(_, x) => x,
            Oracle::TwoAtoms => 1.0,
            _ => 0.0,
        }
    }

    /// Right end of the support.
    pub fn support_hi(&self) -> f64 {
        match *self {
            Oracle::TwoAtoms => 2.0,
            _ => f64::INFINITY,
        }
    }

    /// Tilted mean by a centered finite difference of the log-mgf.
    pub fn tilted_mean(&self, x: f64) -> f64 {
        let h = 1e-5 * x.abs().max(1.0);
        (self.lmgf(x + h) - self.lmgf(x - h)) / (2.0 * h)
    }
}

/// Pareto log-mgf for `x ≤ 0` through `τ = xmin·U^{−1/α}`, composite
/// Simpson in `U` on a grid refined towards `U = 0`.
pub fn pareto_lmgf(alpha: f64, xmin: f64, x: f64) -> f64 {
    if x > 0.0 {
        return f64::INFINITY;
    }
    if x == 0.0 {
        return 0.0;
    }
    // factor out the largest term e^{x·xmin} reached at U = 1
    let g = |u: f64| {
        if u <= 0.0 {
            0.0
        } else {
            (x * (xmin * u.powf(-1.0 / alpha) - xmin)).exp()
        }
    };
    // substitute U = v^4 to resolve the boundary layer at U = 0
    let n = 20_000;
    let h = 1.0 / n as f64;
    let f = |v: f64| 4.0 * v * v * v * g(v.powi(4));
    let mut s = f(0.0) + f(1.0);
    for i in 1..n {
        let v = i as f64 * h;
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(v);
    }
    x * xmin + (s * h / 3.0).ln()
}

/// Maximum of a concave function on `[lo, hi]` by a coarse grid followed by
/// ternary search.
pub fn concave_max<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64) -> (f64, f64) {
    let n = 400;
    let mut best = (lo, f(lo));
    for i in 1..=n {
        let x = lo + (hi - lo) * i as f64 / n as f64;
        let v = f(x);
        if v > best.1 {
            best = (x, v);
        }
    }
    let step = (hi - lo) / n as f64;
    let (mut a, mut b) = ((best.0 - step).max(lo), (best.0 + step).min(hi));
    for _ in 0..200 {
        let m1 = a + (b - a) / 3.0;
        let m2 = b - (b - a) / 3.0;
        if f(m1) < f(m2) {
            a = m1;
        } else {
            b = m2;
        }
    }
    let x = 0.5 * (a + b);
    let v = f(x);
    if v >= best.1 {
        (x, v)
    } else {
        best
    }
}

/// `sup_x (ax − log ψ(e^{xτ}))` over `[lo, min(hi, ξ)]`.
pub fn conjugate(o: &Oracle, a: f64, lo: f64, hi: f64) -> f64 {
    // the sup runs off to infinity outside the closed support
    if a < o.support_lo() || a > o.support_hi() || (a == o.support_lo() && !matches!(o, Oracle::TwoAtoms)) {
        return f64::INFINITY;
    }
    let hi = hi.min(o.xi());
    concave_max(|x| a * x - o.lmgf(x), lo, hi).1
}

/// Renewal counting rate `J₁(m)` from the two-regime formula, with `T` and
/// `Λ*` computed by the oracles above.
pub fn j1(o: &Oracle, m: f64, t_limit: f64) -> f64 {
    let xi = o.xi();
    if m * t_limit >= 1.0 || xi.is_infinite() {
        m * conjugate(o, 1.0 / m, -400.0, 400.0)
    } else {
        m * conjugate(o, t_limit, -400.0, 400.0) + (1.0 - m * t_limit) * xi
    }
}

pub fn close(a: f64, b: f64, rel: f64, abs: f64) -> bool {
    if a.is_infinite() || b.is_infinite() {
        return a == b;
    }
    (a - b).abs() <= rel * a.abs().max(b.abs()) + abs
}
