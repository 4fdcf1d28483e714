//! Measures on the recurrence plane split as `α μ₀ + (1 − α) δ_{(∞,∞)}`,
//! and the rate functional `I` on them.

use crate::distributions::WaitingLaw;
use crate::error::{Error, Result};
use crate::functions::BivariateTestFunction;

/// Length-biased law `π` of the finite part.
#[derive(Debug, Clone)]
pub enum Pi {
    /// `(τ_i, w_i)` with weights summing to one.
    Atoms(Vec<(f64, f64)>),
    /// Length-biased version of `tilt(base, c)`, so that `π̃ = tilt(base, c)`.
    Tilted { base: WaitingLaw, c: f64 },
    /// Only meaningful with `α = 0`.
    Empty,
}

/// `μ = α μ₀ + (1 − α) δ_{(∞,∞)}` with `μ₀(f) = π(f̄(1, ·))`.
#[derive(Debug, Clone)]
pub struct DeltaMeasure {
    pub alpha: f64,
    pub pi: Pi,
}

impl DeltaMeasure {
    /// Checks the mass split and the normalization of `π`.
    pub fn new(alpha: f64, pi: Pi) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::InvalidArgument(format!("alpha must lie in [0, 1], got {alpha}")));
        }
        match &pi {
            Pi::Atoms(atoms) => {
                if atoms.is_empty() || atoms.iter().any(|&(t, w)| !(t > 0.0 && t.is_finite() && w > 0.0)) {
                    return Err(Error::InvalidArgument("atoms need positive locations and weights".into()));
                }
                let total: f64 = atoms.iter().map(|a| a.1).sum();
                if (total - 1.0).abs() > 1e-12 {
                    return Err(Error::InvalidArgument(format!("atom weights sum to {total}, not 1")));
                }
            }
            Pi::Tilted { base, c } => {
                let m = base.tilted_mean(*c)?;
                if !m.is_finite() {
                    return Err(Error::InvalidArgument(format!("tilt {c} has an infinite mean")));
                }
            }
            Pi::Empty => {
                if alpha != 0.0 {
                    return Err(Error::InvalidArgument("an empty π needs alpha = 0".into()));
                }
            }
        }
        Ok(Self { alpha, pi })
    }

    /// `μ̄ = α μ₀` built from ψ itself (`c = 0`).
    pub fn stationary(law: &WaitingLaw, alpha: f64) -> Result<Self> {
        Self::new(alpha, Pi::Tilted { base: law.clone(), c: 0.0 })
    }

    /// `μ(f) = α π(f̄(1, ·)) + (1 − α) f(∞, ∞)`.
    pub fn integrate(&self, f: &BivariateTestFunction) -> Result<f64> {
        let finite = match &self.pi {
            Pi::Empty => 0.0,
            Pi::Atoms(atoms) => {
                let mut s = 0.0;
                for &(tau, w) in atoms {
                    s += w * f.segment_integral(1.0, tau)?;
                }
                s
            }
            Pi::Tilted { base, c } => {
                // π(g) = ψ(e^{cτ} τ g) / ψ(e^{cτ} τ)
                let mut err = None;
                let g = |tau: f64| {
                    let v = f.segment_integral(1.0, tau).unwrap_or_else(|e| {
                        err.get_or_insert(e);
                        f64::NAN
                    });
                    [tau, tau * v]
                };
                let cell = std::cell::RefCell::new(g);
                let w = base.weighted(*c, 0.0, &|tau: f64| (cell.borrow_mut())(tau))?;
                drop(cell);
                if let Some(e) = err {
                    return Err(e);
                }
                match w {
                    Some(w) => w.values[1] / w.values[0],
                    None => return Err(Error::Domain(format!("tilt {c} lies beyond ξ"))),
                }
            }
        };
        let rest = if self.alpha < 1.0 { (1.0 - self.alpha) * f.at_infinity() } else { 0.0 };
        Ok(self.alpha * finite + rest)
    }
}

/// `π(1/τ) H(π̃ | ψ)` for the finite part.
fn finite_part(law: &WaitingLaw, pi: &Pi) -> Result<f64> {
    match pi {
        Pi::Empty => Ok(0.0),
        Pi::Tilted { base, c } => {
            if base.to_string() != law.to_string() {
                return Err(Error::Mismatch);
            }
            if *c == 0.0 {
                return Ok(0.0);
            }
            let h = law.entropy_of_tilt(*c)?;
            let m = law.tilted_mean(*c)?;
            Ok(h / m)
        }
        Pi::Atoms(atoms) => {
            let Some(psi) = law.discrete_atoms() else {
                return Ok(f64::INFINITY);
            };
            let inv: f64 = atoms.iter().map(|&(t, w)| w / t).sum();
            let mut h = 0.0;
            for &(t, w) in atoms {
                let q = w / t / inv;
                let p = psi
                    .iter()
                    .find(|&&(v, _)| (v - t).abs() <= 1e-12 * t.max(1.0))
                    .map(|a| a.1);
                match p {
                    Some(p) => h += q * (q / p).ln(),
                    None => return Ok(f64::INFINITY),
                }
            }
            Ok(inv * h.max(0.0))
        }
    }
}

/// `I(μ) = α π(1/τ) H(π̃ | ψ) + (1 − α) ξ`.
pub fn rate_i(law: &WaitingLaw, mu: &DeltaMeasure) -> Result<f64> {
    let finite = if mu.alpha > 0.0 { mu.alpha * finite_part(law, &mu.pi)? } else { 0.0 };
    let jump = if mu.alpha < 1.0 { (1.0 - mu.alpha) * law.xi() } else { 0.0 };
    Ok(finite + jump)
}

/// `I₀(μ)`: [`rate_i`] on `α = 1`, `+∞` otherwise.
pub fn rate_i0(law: &WaitingLaw, mu: &DeltaMeasure) -> Result<f64> {
    if mu.alpha < 1.0 {
        // still report a mismatched base
        if let Pi::Tilted { .. } = mu.pi {
            finite_part(law, &mu.pi)?;
        }
        return Ok(f64::INFINITY);
    }
    rate_i(law, mu)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stationary_measure_costs_only_the_jump() {
        let e = WaitingLaw::exponential(1.0).unwrap();
        for alpha in [0.0, 0.25, 0.5, 1.0] {
            let mu = DeltaMeasure::stationary(&e, alpha).unwrap();
            assert_eq!(rate_i(&e, &mu).unwrap(), 1.0 - alpha);
        }
        let p = WaitingLaw::pareto(2.0, 1.0).unwrap();
        let mu = DeltaMeasure::stationary(&p, 0.3).unwrap();
        assert_eq!(rate_i(&p, &mu).unwrap(), 0.0);
    }

    #[test]
    fn tilted_measure() {
        let e = WaitingLaw::exponential(1.0).unwrap();
        let mu = DeltaMeasure::new(1.0, Pi::Tilted { base: e.clone(), c: -1.0 }).unwrap();
        let want = 2.0 * 2f64.ln() - 1.0;
        assert!((rate_i(&e, &mu).unwrap() - want).abs() < 1e-12);
        assert!((rate_i0(&e, &mu).unwrap() - want).abs() < 1e-12);
        let half = DeltaMeasure::new(0.5, Pi::Tilted { base: e.clone(), c: -1.0 }).unwrap();
        assert_eq!(rate_i0(&e, &half).unwrap(), f64::INFINITY);
        let other = WaitingLaw::exponential(2.0).unwrap();
        assert!(matches!(rate_i(&other, &mu), Err(Error::Mismatch)));
    }

    #[test]
    fn atom_measures() {
        let psi = WaitingLaw::atoms(vec![(1.0, 0.5), (2.0, 0.5)]).unwrap();
        // π̃ = ψ itself: π ∝ τψ = (1/3, 2/3)
        let mu = DeltaMeasure::new(1.0, Pi::Atoms(vec![(1.0, 1.0 / 3.0), (2.0, 2.0 / 3.0)])).unwrap();
        assert!(rate_i(&psi, &mu).unwrap().abs() < 1e-15);
        let off = DeltaMeasure::new(1.0, Pi::Atoms(vec![(3.0, 1.0)])).unwrap();
        assert_eq!(rate_i(&psi, &off).unwrap(), f64::INFINITY);
        let e = WaitingLaw::exponential(1.0).unwrap();
        assert_eq!(rate_i(&e, &mu).unwrap(), f64::INFINITY);
        let empty = DeltaMeasure::new(0.0, Pi::Empty).unwrap();
        assert_eq!(rate_i(&e, &empty).unwrap(), 1.0);
    }

    #[test]
    fn integrals() {
        let e = WaitingLaw::exponential(1.0).unwrap();
        let inv = BivariateTestFunction::inverse_length();
        let mu = DeltaMeasure::stationary(&e, 1.0).unwrap();
        // μ̄(1/(a+b)) = 1/ψ(τ)
        assert!((mu.integrate(&inv).unwrap() - 1.0).abs() < 1e-9);
        let one = BivariateTestFunction::constant(1.0);
        let mu = DeltaMeasure::new(0.4, Pi::Atoms(vec![(2.0, 1.0)])).unwrap();
        assert!((mu.integrate(&one).unwrap() - 1.0).abs() < 1e-14);
    }
}
