//! Special functions used by the closed-form normalization cross-checks and
//! the shared adaptive quadrature kernel.

mod gamma;
mod parabolic;
mod quadrature;

pub use gamma::{gamma, ln_gamma};
pub use parabolic::{pcf_d, pcf_d_at_origin, pcf_d_integral, pcf_d_scaled};
pub use quadrature::{integrate, integrate_semi_infinite, Estimate, QuadratureSpec};
