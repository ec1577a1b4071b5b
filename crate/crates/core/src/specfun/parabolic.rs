//! Parabolic cylinder functions D_ν(z) for ν ≤ 0, z ≥ 0.
//!
//! For ν < 0 the integral representation
//!
//! ```text
//! D_ν(z) = e^(−z²/4) / Γ(−ν) ∫₀^∞ t^(−ν−1) e^(−t²/2 − z t) dt
//! ```
//!
//! is used. When 0 < −ν < 1 the substitution t = u^(1/s), s = −ν, removes
//! the endpoint singularity.

use super::gamma::gamma;
use super::quadrature::{integrate_semi_infinite, QuadratureSpec};
use crate::error::{Error, Result};
use crate::num::Real;

fn check_domain<T: Real>(nu: T, z: T) -> Result<()> {
    if !nu.is_finite() || !z.is_finite() {
        return Err(Error::Domain(format!(
            "D_ν(z) needs finite arguments, got ν = {nu}, z = {z}"
        )));
    }
    if nu > T::zero() {
        return Err(Error::Domain(format!(
            "D_ν(z) is only implemented for ν ≤ 0, got ν = {nu}"
        )));
    }
    if z < T::zero() {
        return Err(Error::Domain(format!(
            "D_ν(z) is only implemented for z ≥ 0, got z = {z}"
        )));
    }
    Ok(())
}

fn spec<T: Real>() -> QuadratureSpec<T> {
    QuadratureSpec {
        rel_tol: T::tol_floor(1e-13),
        abs_tol: T::zero(),
        max_subdivisions: 400,
    }
}

/// `∫₀^∞ t^(s−1) e^(−t²/2 − z t) dt / Γ(s)` for s > 0, z ≥ 0.
fn scaled_integral<T: Real>(s: T, z: T) -> Result<T> {
    let one = T::one();
    let half = T::lit(0.5);
    let peak = if s > one {
        half * (-z + (z * z + T::lit(4.0) * (s - one)).sqrt())
    } else {
        T::zero()
    };
    let width = peak.max(one / (one + z));
    let raw = if s < one {
        let inv = one / s;
        let f = move |u: T| {
            if u <= T::zero() {
                return inv;
            }
            let t = u.powf(inv);
            inv * (-half * t * t - z * t).exp()
        };
        integrate_semi_infinite(f, T::zero(), width.powf(s), &spec())?
    } else {
        let sm1 = s - one;
        let f = move |t: T| {
            if t <= T::zero() {
                return if sm1 == T::zero() { one } else { T::zero() };
            }
            (sm1 * t.ln() - half * t * t - z * t).exp()
        };
        integrate_semi_infinite(f, T::zero(), width, &spec())?
    };
    Ok(raw.value / gamma(s)?)
}

/// D_ν(0) = 2^(ν/2) √π / Γ((1 − ν)/2).
pub fn pcf_d_at_origin<T: Real>(nu: T) -> Result<T> {
    check_domain(nu, T::zero())?;
    let half = T::lit(0.5);
    Ok(T::lit(2.0).powf(half * nu) * T::PI().sqrt() / gamma(half * (T::one() - nu))?)
}

/// D_ν(z) through the integral representation only (ν < 0), including z = 0.
pub fn pcf_d_integral<T: Real>(nu: T, z: T) -> Result<T> {
    check_domain(nu, z)?;
    if nu == T::zero() {
        return Err(Error::Domain(
            "the integral representation needs ν < 0".into(),
        ));
    }
    Ok((-T::lit(0.25) * z * z).exp() * scaled_integral(-nu, z)?)
}

/// `e^(z²/4) D_ν(z)`, which stays representable for large z.
pub fn pcf_d_scaled<T: Real>(nu: T, z: T) -> Result<T> {
    check_domain(nu, z)?;
    if nu == T::zero() {
        return Ok(T::one());
    }
    if z == T::zero() {
        return pcf_d_at_origin(nu);
    }
    scaled_integral(-nu, z)
}

/// Parabolic cylinder function D_ν(z) for ν ≤ 0 and z ≥ 0.
pub fn pcf_d<T: Real>(nu: T, z: T) -> Result<T> {
    check_domain(nu, z)?;
    if nu == T::zero() {
        return Ok((-T::lit(0.25) * z * z).exp());
    }
    if z == T::zero() {
        return pcf_d_at_origin(nu);
    }
    Ok((-T::lit(0.25) * z * z).exp() * scaled_integral(-nu, z)?)
}
