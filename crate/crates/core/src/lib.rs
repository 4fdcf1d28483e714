//! Large-deviations rate functionals of renewal processes.
//!
//! The crate computes the conjugates, contracted rates and measure-level
//! rate functional of a classical renewal process with waiting-time law ψ,
//! and checks them against naive and importance-sampled Monte Carlo.
//!
//! - [`distributions`]: waiting-time laws, tilts, ξ and T.
//! - [`renewal`]: path simulation and the path functionals `N_t`, `A_t`,
//!   `B_t`, `μ_t`, `ν_t`, `C_t`.
//! - [`ratefn`]: `Λ*`, `J_F`, `I` and the variational cross-checks.
//! - [`mc`]: rare-event estimators and bound checks.

pub mod distributions;
pub mod error;
pub mod functions;
pub mod mc;
pub mod numeric;
pub mod ratefn;
pub mod renewal;
pub mod rng;

pub use distributions::{parse_law, WaitingLaw};
pub use error::{Error, Result};
pub use functions::{BivariateTestFunction, BoundedFn, PiecewiseLinear};
pub use renewal::RenewalPath;
