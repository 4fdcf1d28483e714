//! Waiting-time laws ψ on (0, ∞): moment generating functions, the
//! exponential-moment abscissa ξ, exponential tilts and the critical tilted
//! mean T.

mod parse;
mod sampling;

use std::fmt;
use std::sync::{Arc, OnceLock};

use statrs::distribution::ContinuousCDF;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::numeric::quadrature::{integrate_half_line, probe_log_peak, HalfLine};
use crate::numeric::REL_TOL;

pub use parse::parse_law;
use sampling::Draw;

/// Parametric family of a [`WaitingLaw`].
#[derive(Debug, Clone)]
pub enum Family {
    Exponential { rate: f64 },
    Gamma { shape: f64, scale: f64 },
    Pareto { alpha: f64, xmin: f64 },
    Weibull { shape: f64, scale: f64 },
    Deterministic { tau: f64 },
    /// Finite atoms `(value, probability)`, sorted by value.
    Atoms(Vec<(f64, f64)>),
    /// An empirical sample, held as merged uniform atoms.
    Empirical { label: String, atoms: Vec<(f64, f64)> },
    Mixture(Vec<(f64, WaitingLaw)>),
    /// `ζ(dτ) = e^{cτ - log_mgf} base(dτ)` for a base without a closed-form tilt.
    Tilted { base: WaitingLaw, c: f64, log_mgf: f64 },
}

/// A waiting-time distribution. Cheap to clone and safe to share.
#[derive(Clone)]
pub struct WaitingLaw(Arc<Inner>);

struct Inner {
    family: Family,
    draw: Draw,
    t_limit: OnceLock<f64>,
}

impl fmt::Debug for WaitingLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "WaitingLaw({self})")
    }
}

/// `E_ψ[e^{cτ} g(τ) 1{τ > s}] = e^{log_scale} · values`.
#[derive(Debug, Clone, Copy)]
pub struct Weighted<const N: usize> {
    pub log_scale: f64,
    pub values: [f64; N],
}

fn positive(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidLaw(format!("{name} must be positive and finite, got {x}")))
    }
}

fn log_sum_exp(xs: impl IntoIterator<Item = f64>) -> f64 {
    let v: Vec<f64> = xs.into_iter().collect();
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY || m == f64::INFINITY {
        return m;
    }
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

fn normalize_atoms(mut atoms: Vec<(f64, f64)>) -> Result<Vec<(f64, f64)>> {
    if atoms.is_empty() {
        return Err(Error::InvalidLaw("at least one atom is required".into()));
    }
    for &(v, p) in &atoms {
        positive("atom value", v)?;
        positive("atom probability", p)?;
    }
    let total: f64 = atoms.iter().map(|a| a.1).sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidLaw(format!(
            "atom probabilities sum to {total}, not 1"
        )));
    }
    atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut merged: Vec<(f64, f64)> = Vec::with_capacity(atoms.len());
    for (v, p) in atoms {
        match merged.last_mut() {
            Some(last) if last.0 == v => last.1 += p,
            _ => merged.push((v, p)),
        }
    }
    for a in &mut merged {
        a.1 /= total;
    }
    Ok(merged)
}

impl WaitingLaw {
    fn from_family(family: Family) -> Result<Self> {
        let draw = Draw::build(&family)?;
        Ok(WaitingLaw(Arc::new(Inner {
            family,
            draw,
            t_limit: OnceLock::new(),
        })))
    }

    pub fn exponential(rate: f64) -> Result<Self> {
        positive("rate", rate)?;
        Self::from_family(Family::Exponential { rate })
    }

    pub fn gamma(shape: f64, scale: f64) -> Result<Self> {
        positive("shape", shape)?;
        positive("scale", scale)?;
        Self::from_family(Family::Gamma { shape, scale })
    }

    pub fn pareto(alpha: f64, xmin: f64) -> Result<Self> {
        positive("alpha", alpha)?;
        positive("xmin", xmin)?;
        Self::from_family(Family::Pareto { alpha, xmin })
    }

    /// Weibull law; shape 1 is stored as the equivalent exponential.
    pub fn weibull(shape: f64, scale: f64) -> Result<Self> {
        positive("shape", shape)?;
        positive("scale", scale)?;
        if shape == 1.0 {
            return Self::exponential(1.0 / scale);
        }
        Self::from_family(Family::Weibull { shape, scale })
    }

    pub fn deterministic(tau: f64) -> Result<Self> {
        positive("tau", tau)?;
        Self::from_family(Family::Deterministic { tau })
    }

    pub fn atoms(atoms: Vec<(f64, f64)>) -> Result<Self> {
        let atoms = normalize_atoms(atoms)?;
        Self::from_family(Family::Atoms(atoms))
    }

    pub fn empirical(samples: &[f64], label: impl Into<String>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InvalidLaw("empirical law needs at least one sample".into()));
        }
        let w = 1.0 / samples.len() as f64;
        let mut atoms: Vec<(f64, f64)> = samples.iter().map(|&x| (x, w)).collect();
        // exact renormalization happens after merging
        let total: f64 = atoms.iter().map(|a| a.1).sum();
        for a in &mut atoms {
            a.1 /= total;
        }
        let atoms = normalize_atoms(atoms)?;
        Self::from_family(Family::Empirical {
            label: label.into(),
            atoms,
        })
    }

    /// Finite mixture `Σ w_i ψ_i`; weights must be positive and sum to 1.
    pub fn mixture(components: Vec<(f64, WaitingLaw)>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidLaw("mixture needs a component".into()));
        }
        let total: f64 = components.iter().map(|c| c.0).sum();
        for c in &components {
            positive("mixture weight", c.0)?;
        }
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidLaw(format!("mixture weights sum to {total}, not 1")));
        }
        let components = components.into_iter().map(|(w, l)| (w / total, l)).collect();
        Self::from_family(Family::Mixture(components))
    }

    pub fn family(&self) -> &Family {
        &self.0.family
    }

    /// Atoms of a finitely supported law (deterministic, atoms, empirical).
    pub fn discrete_atoms(&self) -> Option<Vec<(f64, f64)>> {
        match self.family() {
            Family::Deterministic { tau } => Some(vec![(*tau, 1.0)]),
            Family::Atoms(a) | Family::Empirical { atoms: a, .. } => Some(a.clone()),
            _ => None,
        }
    }

    /// `ψ({v})`.
    pub fn atom_mass(&self, v: f64) -> f64 {
        match self.family() {
            Family::Mixture(cs) => cs.iter().map(|(w, l)| w * l.atom_mass(v)).sum(),
            _ => self
                .discrete_atoms()
                .and_then(|a| a.into_iter().find(|&(x, _)| x == v))
                .map_or(0.0, |(_, p)| p),
        }
    }

    /// Essential infimum and supremum of the support.
    pub fn support(&self) -> (f64, f64) {
        match self.family() {
            Family::Exponential { .. } | Family::Gamma { .. } | Family::Weibull { .. } => {
                (0.0, f64::INFINITY)
            }
            Family::Pareto { xmin, .. } => (*xmin, f64::INFINITY),
            Family::Deterministic { tau } => (*tau, *tau),
            Family::Atoms(a) | Family::Empirical { atoms: a, .. } => {
                (a[0].0, a[a.len() - 1].0)
            }
            Family::Mixture(cs) => cs.iter().fold((f64::INFINITY, 0.0), |(lo, hi), (_, l)| {
                let (a, b) = l.support();
                (lo.min(a), hi.max(b))
            }),
            Family::Tilted { base, .. } => base.support(),
        }
    }

    /// The exponential-moment abscissa `ξ = sup{c : ψ(e^{cτ}) < ∞}`.
    pub fn xi(&self) -> f64 {
        match self.family() {
            Family::Exponential { rate } => *rate,
            Family::Gamma { scale, .. } => 1.0 / scale,
            Family::Pareto { .. } => 0.0,
            Family::Weibull { shape, .. } => {
                if *shape > 1.0 {
                    f64::INFINITY
                } else {
                    0.0
                }
            }
            Family::Deterministic { .. } | Family::Atoms(_) | Family::Empirical { .. } => {
                f64::INFINITY
            }
            Family::Mixture(cs) => cs.iter().map(|(_, l)| l.xi()).fold(f64::INFINITY, f64::min),
            Family::Tilted { base, c, .. } => base.xi() - c,
        }
    }

    /// Whether `ψ(e^{ξτ}) = ∞` is known analytically.
    fn diverges_at_xi(&self) -> bool {
        match self.family() {
            Family::Exponential { .. } | Family::Gamma { .. } => true,
            Family::Mixture(cs) => {
                let xi = self.xi();
                cs.iter().any(|(_, l)| l.xi() == xi && l.diverges_at_xi())
            }
            Family::Tilted { base, .. } => base.diverges_at_xi(),
            _ => false,
        }
    }

    fn continuous_params(&self) -> Option<(f64, f64)> {
        // (lower end of support, characteristic scale)
        match self.family() {
            Family::Exponential { rate } => Some((0.0, 1.0 / rate)),
            Family::Gamma { shape, scale } => Some((0.0, shape * scale)),
            Family::Pareto { xmin, .. } => Some((*xmin, *xmin)),
            Family::Weibull { scale, .. } => Some((0.0, *scale)),
            _ => None,
        }
    }

    /// Log density of a continuous base family.
    pub(crate) fn log_density(&self, tau: f64) -> f64 {
        if !(tau > 0.0) {
            return f64::NEG_INFINITY;
        }
        match self.family() {
            Family::Exponential { rate } => rate.ln() - rate * tau,
            Family::Gamma { shape, scale } => {
                -ln_gamma(*shape) - shape * scale.ln() + (shape - 1.0) * tau.ln() - tau / scale
            }
            Family::Pareto { alpha, xmin } => {
                if tau < *xmin {
                    f64::NEG_INFINITY
                } else {
                    alpha.ln() + alpha * xmin.ln() - (alpha + 1.0) * tau.ln()
                }
            }
            Family::Weibull { shape, scale } => {
                let z = tau / scale;
                shape.ln() - scale.ln() + (shape - 1.0) * z.ln() - z.powf(*shape)
            }
            Family::Tilted { base, c, log_mgf } => base.log_density(tau) + c * tau - log_mgf,
            _ => f64::NAN,
        }
    }

    /// `log(e^{cu} ψ(dτ)/dτ)` at `τ = lower + u`. Linear terms in `u` are
    /// combined before they meet so tilts close to ξ keep their precision.
    pub(crate) fn log_tilted_density(&self, lower: f64, u: f64, c: f64) -> f64 {
        let tau = lower + u;
        if !(tau > 0.0) {
            return f64::NEG_INFINITY;
        }
        match self.family() {
            Family::Exponential { rate } => rate.ln() - rate * lower + (c - rate) * u,
            Family::Gamma { shape, scale } => {
                -ln_gamma(*shape) - shape * scale.ln() + (shape - 1.0) * tau.ln() - lower / scale
                    + (c - 1.0 / scale) * u
            }
            Family::Tilted { base, c: c0, log_mgf } => {
                base.log_tilted_density(lower, u, c + c0) + c0 * lower - log_mgf
            }
            _ => self.log_density(tau) + c * u,
        }
    }

    /// `E_ψ[e^{cτ} g(τ) 1{τ > s}]` in scaled form, or `None` if it diverges.
    ///
    /// `g` must be nonnegative in its first component for the divergence
    /// test to be meaningful.
    pub fn weighted<const N: usize, G: Fn(f64) -> [f64; N]>(
        &self,
        c: f64,
        s: f64,
        g: &G,
    ) -> Result<Option<Weighted<N>>> {
        let xi = self.xi();
        if c > xi || (c == xi && self.diverges_at_xi()) {
            return Ok(None);
        }
        match self.family() {
            Family::Deterministic { tau } => Ok(discrete_weighted(&[(*tau, 1.0)], c, s, g)),
            Family::Atoms(a) | Family::Empirical { atoms: a, .. } => {
                Ok(discrete_weighted(a, c, s, g))
            }
            Family::Mixture(cs) => {
                let mut parts = Vec::with_capacity(cs.len());
                for (w, l) in cs {
                    match l.weighted(c, s, g)? {
                        Some(p) => parts.push((w.ln() + p.log_scale, p.values)),
                        None => return Ok(None),
                    }
                }
                let top = parts.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
                let mut values = [0.0; N];
                if top > f64::NEG_INFINITY {
                    for (ls, v) in &parts {
                        let k = (ls - top).exp();
                        for i in 0..N {
                            values[i] += k * v[i];
                        }
                    }
                }
                Ok(Some(Weighted { log_scale: top, values }))
            }
            Family::Tilted { base, c: c0, log_mgf } => Ok(base
                .weighted(c + c0, s, g)?
                .map(|w| Weighted { log_scale: w.log_scale - log_mgf, values: w.values })),
            _ => self.continuous_weighted(c, s, g),
        }
    }

    fn continuous_weighted<const N: usize, G: Fn(f64) -> [f64; N]>(
        &self,
        c: f64,
        s: f64,
        g: &G,
    ) -> Result<Option<Weighted<N>>> {
        let (support_lo, scale) = self.continuous_params().expect("continuous family");
        let lower = support_lo.max(s);
        // work in the offset u = τ − lower so that spikes at the left edge resolve
        let h = |u: f64| self.log_tilted_density(lower, u, c);
        let peak = probe_log_peak(&h, scale);
        let top = peak.top;
        // anchor the block scan where the weighted mass sits, not only the density
        let anchor = if N > 0 && top.is_finite() {
            let hg = |u: f64| {
                let v = h(u) + g(lower + u)[0].abs().ln();
                if v.is_nan() {
                    f64::NEG_INFINITY
                } else {
                    v
                }
            };
            let p = probe_log_peak(&hg, scale);
            if p.top > f64::NEG_INFINITY {
                p.mass_at
            } else {
                peak.mass_at
            }
        } else {
            peak.mass_at
        };
        if !top.is_finite() {
            return if top == f64::INFINITY {
                Ok(None)
            } else {
                Ok(Some(Weighted { log_scale: f64::NEG_INFINITY, values: [0.0; N] }))
            };
        }
        let integrand = |u: f64| {
            let w = (h(u) - top).exp();
            if w == 0.0 {
                return [0.0; N];
            }
            let v = g(lower + u);
            std::array::from_fn(|i| w * v[i])
        };
        match integrate_half_line(&integrand, 0.0, anchor, REL_TOL)? {
            HalfLine::Finite(values) => Ok(Some(Weighted { log_scale: top + c * lower, values })),
            HalfLine::Diverged => Ok(None),
        }
    }

    /// `log ψ(e^{cτ})`; `+∞` when the integral diverges.
    pub fn log_mgf(&self, c: f64) -> Result<f64> {
        if c == 0.0 {
            return Ok(0.0);
        }
        let xi = self.xi();
        if c > xi || (c == xi && self.diverges_at_xi()) {
            return Ok(f64::INFINITY);
        }
        match self.family() {
            Family::Exponential { rate } => Ok(-(-c / rate).ln_1p()),
            Family::Gamma { shape, scale } => Ok(-shape * (-c * scale).ln_1p()),
            Family::Deterministic { tau } => Ok(c * tau),
            Family::Atoms(a) | Family::Empirical { atoms: a, .. } => {
                Ok(log_sum_exp(a.iter().map(|(v, p)| p.ln() + c * v)))
            }
            Family::Mixture(cs) => {
                let mut terms = Vec::with_capacity(cs.len());
                for (w, l) in cs {
                    terms.push(w.ln() + l.log_mgf(c)?);
                }
                Ok(log_sum_exp(terms))
            }
            Family::Tilted { base, c: c0, log_mgf } => Ok(base.log_mgf(c + c0)? - log_mgf),
            _ => match self.weighted(c, 0.0, &|_| [1.0])? {
                Some(w) => Ok(w.log_scale + w.values[0].ln()),
                None => Ok(f64::INFINITY),
            },
        }
    }

    /// `ψ(e^{cτ}) ∈ (0, ∞]`.
    pub fn mgf(&self, c: f64) -> Result<f64> {
        self.log_mgf(c).map(f64::exp)
    }

    /// Tilted mean `ψ(τe^{cτ}) / ψ(e^{cτ})`, possibly `+∞`.
    pub fn tilted_mean(&self, c: f64) -> Result<f64> {
        if self.log_mgf(c)? == f64::INFINITY {
            return Err(Error::Domain(format!("mgf diverges at c = {c}")));
        }
        match self.family() {
            Family::Exponential { rate } => Ok(1.0 / (rate - c)),
            Family::Gamma { shape, scale } => Ok(shape * scale / (1.0 - c * scale)),
            Family::Deterministic { tau } => Ok(*tau),
            Family::Atoms(a) | Family::Empirical { atoms: a, .. } => {
                let lz = log_sum_exp(a.iter().map(|(v, p)| p.ln() + c * v));
                Ok(a.iter().map(|(v, p)| v * (p.ln() + c * v - lz).exp()).sum())
            }
            _ => match self.weighted(c, 0.0, &|t| [1.0, t])? {
                Some(w) => Ok(w.values[1] / w.values[0]),
                None => Ok(f64::INFINITY),
            },
        }
    }

    /// Mean of the law (`+∞` allowed).
    pub fn mean(&self) -> f64 {
        self.tilted_mean(0.0).unwrap_or(f64::INFINITY)
    }

    /// The critical tilted mean `T = sup_{c<ξ} M(c)`.
    ///
    /// With `ξ = ∞` this is the supremum of the support. Otherwise, by
    /// monotone convergence, `T = M(ξ)` when `ψ(e^{ξτ}) < ∞` and `T = ∞`
    /// when it diverges; the sequence `c_k = ξ − 2^{-k}max(1, ξ)` is used
    /// when the boundary cannot be evaluated.
    pub fn t_limit(&self) -> f64 {
        *self.0.t_limit.get_or_init(|| self.compute_t_limit())
    }

    fn compute_t_limit(&self) -> f64 {
        let xi = self.xi();
        if xi == f64::INFINITY {
            return self.support().1;
        }
        match self.log_mgf(xi) {
            Ok(l) if l == f64::INFINITY => return f64::INFINITY,
            Ok(_) => {
                if let Ok(m) = self.tilted_mean(xi) {
                    return m;
                }
            }
            Err(_) => {}
        }
        self.t_limit_by_sequence()
    }

    /// `M(c_k)` along `c_k = ξ − 2^{-k}max(1, ξ)`, `k = 0..=40`; the limit
    /// when the last step is below `1e-8`, else `+∞`.
    pub fn t_limit_by_sequence(&self) -> f64 {
        let xi = self.xi();
        if xi == f64::INFINITY {
            return self.support().1;
        }
        let mut prev = f64::NAN;
        let mut last = f64::NAN;
        for k in 0..=40 {
            let c = xi - (-(k as f64)).exp2() * xi.max(1.0);
            match self.tilted_mean(c) {
                Ok(m) => {
                    prev = last;
                    last = m;
                }
                Err(_) => return f64::INFINITY,
            }
        }
        if last.is_finite() && (last - prev).abs() < 1e-8 {
            last
        } else {
            f64::INFINITY
        }
    }

    /// Largest admissible tilt on the approach to ξ, `ξ − 2^{-40}max(1, ξ)`.
    pub fn near_critical_tilt(&self) -> f64 {
        let xi = self.xi();
        xi - (-40f64).exp2() * xi.max(1.0)
    }

    /// The exponentially tilted law `ζ_c ∝ e^{cτ}ψ`.
    pub fn tilt(&self, c: f64) -> Result<WaitingLaw> {
        if c == 0.0 {
            return Ok(self.clone());
        }
        let lm = self.log_mgf(c)?;
        if !lm.is_finite() {
            return Err(Error::Domain(format!("cannot tilt by c = {c}: mgf diverges")));
        }
        match self.family() {
            Family::Exponential { rate } => WaitingLaw::exponential(rate - c),
            Family::Gamma { shape, scale } => WaitingLaw::gamma(*shape, scale / (1.0 - c * scale)),
            Family::Deterministic { .. } => Ok(self.clone()),
            Family::Atoms(a) | Family::Empirical { atoms: a, .. } => {
                let w: Vec<(f64, f64)> =
                    a.iter().map(|(v, p)| (*v, (p.ln() + c * v - lm).exp())).collect();
                let total: f64 = w.iter().map(|x| x.1).sum();
                WaitingLaw::atoms(w.into_iter().map(|(v, p)| (v, p / total)).collect())
            }
            Family::Mixture(cs) => {
                let mut parts = Vec::with_capacity(cs.len());
                for (w, l) in cs {
                    let lw = w.ln() + l.log_mgf(c)? - lm;
                    parts.push((lw.exp(), l.tilt(c)?));
                }
                let total: f64 = parts.iter().map(|p| p.0).sum();
                WaitingLaw::mixture(parts.into_iter().map(|(w, l)| (w / total, l)).collect())
            }
            Family::Tilted { base, c: c0, .. } => base.tilt(c0 + c),
            _ => Self::from_family(Family::Tilted { base: self.clone(), c, log_mgf: lm }),
        }
    }

    /// Relative entropy `H(ζ_c | ψ) = c·M(c) − log ψ(e^{cτ})`.
    pub fn entropy_of_tilt(&self, c: f64) -> Result<f64> {
        if c == 0.0 {
            return Ok(0.0);
        }
        let lm = self.log_mgf(c)?;
        if !lm.is_finite() {
            return Err(Error::Domain(format!("mgf diverges at c = {c}")));
        }
        let m = self.tilted_mean(c)?;
        if !m.is_finite() {
            return Err(Error::Domain(format!("tilted mean diverges at c = {c}")));
        }
        Ok((c * m - lm).max(0.0))
    }

    /// `log P(τ > s)`.
    pub fn log_survival(&self, s: f64) -> Result<f64> {
        if s <= 0.0 {
            return Ok(0.0);
        }
        match self.family() {
            Family::Exponential { rate } => Ok(-rate * s),
            Family::Pareto { alpha, xmin } => Ok(if s <= *xmin { 0.0 } else { alpha * (xmin / s).ln() }),
            Family::Weibull { shape, scale } => Ok(-(s / scale).powf(*shape)),
            Family::Gamma { shape, scale } => {
                let d = statrs::distribution::Gamma::new(*shape, 1.0 / scale)
                    .map_err(|e| Error::InvalidLaw(e.to_string()))?;
                let sf = d.sf(s);
                if sf > 0.0 {
                    Ok(sf.ln())
                } else {
                    self.log_survival_by_quadrature(s)
                }
            }
            Family::Deterministic { .. } | Family::Atoms(_) | Family::Empirical { .. } => {
                let a = self.discrete_atoms().unwrap_or_default();
                let tail: f64 = a.iter().filter(|x| x.0 > s).map(|x| x.1).sum();
                Ok(tail.ln())
            }
            Family::Mixture(cs) => {
                let mut terms = Vec::with_capacity(cs.len());
                for (w, l) in cs {
                    terms.push(w.ln() + l.log_survival(s)?);
                }
                Ok(log_sum_exp(terms))
            }
            Family::Tilted { .. } => self.log_survival_by_quadrature(s),
        }
    }

    fn log_survival_by_quadrature(&self, s: f64) -> Result<f64> {
        match self.weighted(0.0, s, &|_| [1.0])? {
            Some(w) if w.values[0] > 0.0 => Ok(w.log_scale + w.values[0].ln()),
            Some(_) => Ok(f64::NEG_INFINITY),
            None => Err(Error::Quadrature("survival integral diverged".into())),
        }
    }
}

fn discrete_weighted<const N: usize, G: Fn(f64) -> [f64; N]>(
    atoms: &[(f64, f64)],
    c: f64,
    s: f64,
    g: &G,
) -> Option<Weighted<N>> {
    let logs: Vec<(f64, f64)> = atoms
        .iter()
        .filter(|a| a.0 > s)
        .map(|(v, p)| (*v, p.ln() + c * v))
        .collect();
    let top = logs.iter().map(|x| x.1).fold(f64::NEG_INFINITY, f64::max);
    let mut values = [0.0; N];
    for (v, l) in &logs {
        let k = (l - top).exp();
        let gv = g(*v);
        for i in 0..N {
            values[i] += k * gv[i];
        }
    }
    Some(Weighted { log_scale: top, values })
}

impl fmt::Display for WaitingLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.family() {
            Family::Exponential { rate } => write!(f, "exp({rate})"),
            Family::Gamma { shape, scale } => write!(f, "gamma({shape},{scale})"),
            Family::Pareto { alpha, xmin } => write!(f, "pareto({alpha},{xmin})"),
            Family::Weibull { shape, scale } => write!(f, "weibull({shape},{scale})"),
            Family::Deterministic { tau } => write!(f, "det({tau})"),
            Family::Atoms(a) => {
                let parts: Vec<String> = a.iter().map(|(v, p)| format!("{v}:{p}")).collect();
                write!(f, "atoms({})", parts.join(","))
            }
            Family::Empirical { label, .. } => write!(f, "empirical({label})"),
            Family::Mixture(cs) => {
                let parts: Vec<String> = cs.iter().map(|(w, l)| format!("{w}@{l}")).collect();
                write!(f, "mix({})", parts.join(";"))
            }
            Family::Tilted { base, c, .. } => write!(f, "tilt({base},{c})"),
        }
    }
}
