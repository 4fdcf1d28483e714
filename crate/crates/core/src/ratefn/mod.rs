//! Rate functionals: conjugates, contracted rates and `I` on measures.

mod contract;
mod delta;
mod legendre;

pub use contract::{
    affine_scan, affine_scan_f, label_curve, rate_j1_closed, rate_jf, rate_jf_point, solve_tilt_for_mean,
    variational_crosscheck_j1, CurvePoint, RateCurve, RatePoint, Regime, Variational, ZERO_LEVEL,
};
pub use delta::{rate_i, rate_i0, DeltaMeasure, Pi};
pub use legendre::{
    entropy_projection, legendre_1d, legendre_1d_point, legendre_2d, legendre_2d_from, legendre_2d_point,
    Conjugate, Conjugate2, Projection, INFINITE_LEVEL,
};
