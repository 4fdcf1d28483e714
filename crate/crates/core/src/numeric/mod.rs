//! Numerical building blocks shared by the rate-function and simulation code.

pub mod format;
pub mod optimize;
pub mod quadrature;

pub use format::{fmt_sig, parse_sig};
pub use optimize::{find_root, golden_max, golden_min, Maximum};
pub use quadrature::{integrate, integrate_half_line, integrate_scalar, HalfLine, REL_TOL};
