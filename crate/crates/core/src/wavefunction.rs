//! Normalized radial wave functions built from an [`AnalyticSolution`].
//!
//! `ψ(r) = N · P(r) · r^((l′−1)/2) · exp(−αr²/2 − βr)` and `φ = rψ`. The
//! envelope is evaluated relative to its maximum so that `N` itself, which
//! can over- or underflow in physical units, is only formed on request.

use std::io::Write;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::aeim::AnalyticSolution;
use crate::error::{Error, Result};
use crate::num::{format_sig, log_space, poly_mul, Real};
use crate::specfun::{gamma, integrate, pcf_d, pcf_d_scaled, QuadratureSpec};

/// Points in the cached sampling grid.
pub const GRID_POINTS: usize = 4096;

const CROSS_CHECK_TOL: f64 = 1e-6;

/// Outcome of comparing a closed-form normalization with the quadrature one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckStatus {
    Confirmed,
    Mismatch,
    Unavailable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct NormalizationCheck<T: Real> {
    pub name: String,
    /// Closed-form `N`, when it evaluates to a finite positive number.
    pub value: Option<T>,
    /// `|N_closed/N_quadrature − 1|`.
    pub deviation: Option<T>,
    pub status: CheckStatus,
}

impl<T: Real> NormalizationCheck<T> {
    fn from_ln(name: &str, ln_closed: Option<T>, ln_quad: T) -> Self {
        match ln_closed.filter(|v| v.is_finite()) {
            Some(ln_n) => {
                let deviation = ((ln_n - ln_quad).exp() - T::one()).abs();
                let status = if deviation < T::lit(CROSS_CHECK_TOL) {
                    CheckStatus::Confirmed
                } else {
                    CheckStatus::Mismatch
                };
                Self {
                    name: name.into(),
                    value: Some(ln_n.exp()),
                    deviation: Some(deviation),
                    status,
                }
            }
            None => Self {
                name: name.into(),
                value: None,
                deviation: None,
                status: CheckStatus::Unavailable,
            },
        }
    }
}

/// Normalization by quadrature plus closed-form cross-checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct NormalizationReport<T: Real> {
    /// `ln N` from quadrature.
    pub ln_norm: T,
    /// Quadrature error estimate, relative to `∫φ²dr`.
    pub relative_error: T,
    /// `∫φ²dr` summed over powers with the Gaussian–exponential moment
    /// `∫ r^(ν−1) e^(−αr²−2βr) dr = (2α)^(−ν/2) Γ(ν) e^(z²/4) D_(−ν)(z)`.
    pub moment_identity: NormalizationCheck<T>,
    /// The printed ground-state or first-excited closed form, taken literally.
    pub printed: Option<NormalizationCheck<T>>,
}

/// A normalized radial wave function. Immutable once built.
#[derive(Debug, Clone)]
pub struct RadialFunction<T: Real> {
    sol: AnalyticSolution<T>,
    /// Multiplies the peak-relative envelope.
    scaled_norm: T,
    /// Log of the maximum of `r^δ exp(−αr²/2 − βr)`.
    log_peak: T,
    support: (T, T),
    report: NormalizationReport<T>,
    grid_cache: OnceLock<Vec<(T, T)>>,
}

fn quad_spec<T: Real>() -> QuadratureSpec<T> {
    QuadratureSpec {
        rel_tol: T::tol_floor(1e-11),
        abs_tol: T::zero(),
        max_subdivisions: 400,
    }
}

impl<T: Real> RadialFunction<T> {
    pub fn build(sol: AnalyticSolution<T>) -> Result<Self> {
        let e = sol.exponents;
        let two = T::lit(2.0);
        let half = T::lit(0.5);
        // maximum of δ ln r − αr²/2 − βr
        let r_star = (-e.beta + (e.beta * e.beta + T::lit(4.0) * e.alpha * e.delta).sqrt())
            / (two * e.alpha);
        let log_peak = e.delta * r_star.ln() - half * e.alpha * r_star * r_star - e.beta * r_star;

        // integrand envelope r^(2δ+2n) e^(−αr² − 2βr)
        let power = two * e.delta + T::from_usize_lossy(2 * sol.qn.n);
        let log_env = |r: T| power * r.ln() - e.alpha * r * r - two * e.beta * r;
        let r_m = (-e.beta + (e.beta * e.beta + two * e.alpha * power).sqrt()) / (two * e.alpha);
        let drop = T::lit(16.0) * T::LN_10() + T::lit(4.0);
        let mut upper = r_m * T::lit(1.5) + T::one() / e.alpha.sqrt();
        while log_env(upper) > log_env(r_m) - drop {
            upper = upper * T::lit(1.25);
        }
        let r_char = T::one() / e.alpha.sqrt();
        let mut lower = r_char * T::lit(1e-6);
        if let Some(&first) = sol.nodes.roots.iter().find(|&&x| x > T::zero()) {
            lower = lower.min(first * half);
        }

        let mut f = Self {
            sol,
            scaled_norm: T::one(),
            log_peak,
            support: (lower, upper),
            report: NormalizationReport {
                ln_norm: T::zero(),
                relative_error: T::zero(),
                moment_identity: NormalizationCheck::from_ln("moment identity", None, T::zero()),
                printed: None,
            },
            grid_cache: OnceLock::new(),
        };
        let (integral, error) = f.norm_integral_raw(r_m)?;
        f.scaled_norm = T::one() / integral.sqrt();
        let ln_norm = f.scaled_norm.ln() - log_peak;
        f.report = NormalizationReport {
            ln_norm,
            relative_error: error / integral,
            moment_identity: NormalizationCheck::from_ln(
                "moment identity",
                moment_identity_ln_norm(&f.sol),
                ln_norm,
            ),
            printed: printed_ln_norm(&f.sol)
                .map(|(name, v)| NormalizationCheck::from_ln(name, v, ln_norm)),
        };
        for check in std::iter::once(&f.report.moment_identity).chain(f.report.printed.iter()) {
            log::debug!(
                "normalization cross-check {}: {:?}",
                check.name,
                check.status
            );
        }
        Ok(f)
    }

    /// `∫ (current φ)² dr` and its error estimate.
    fn norm_integral_raw(&self, split: T) -> Result<(T, T)> {
        let spec = quad_spec();
        let g = |r: T| {
            let p = self.phi(r);
            p * p
        };
        let inner = integrate(g, T::zero(), split, &spec)?;
        let outer = integrate(g, split, self.support.1, &spec)?;
        let value = inner.value + outer.value;
        let error = inner.error + outer.error;
        if !(value > T::zero()) || error > T::tol_floor(1e-10) * value {
            return Err(Error::QuadratureFailure {
                estimate: value.to_f64_lossy(),
                error: error.to_f64_lossy(),
            });
        }
        Ok((value, error))
    }

    pub fn solution(&self) -> &AnalyticSolution<T> {
        &self.sol
    }

    pub fn report(&self) -> &NormalizationReport<T> {
        &self.report
    }

    /// The constant `N`; may be `0` or `inf` when it leaves the range of `T`.
    pub fn norm(&self) -> T {
        self.report.ln_norm.exp()
    }

    /// `(r_lo, r_hi)` outside which `ψ` is negligible or purely power-law.
    pub fn support(&self) -> (T, T) {
        self.support
    }

    /// `P(r) r^δ exp(−αr²/2 − βr)` divided by its envelope maximum.
    fn phi_unit(&self, r: T) -> T {
        let e = &self.sol.exponents;
        if r <= T::zero() {
            return T::zero();
        }
        let log = e.delta * r.ln() - T::lit(0.5) * e.alpha * r * r - e.beta * r - self.log_peak;
        self.sol.nodes.eval(r) * log.exp()
    }

    /// Reduced radial function `φ = rψ`.
    pub fn phi(&self, r: T) -> T {
        self.scaled_norm * self.phi_unit(r)
    }

    /// `ψ(r)`, including `r = 0` where it is finite, zero or infinite depending on `l′`.
    pub fn psi(&self, r: T) -> T {
        let e = &self.sol.exponents;
        if r > T::zero() {
            return self.phi(r) / r;
        }
        let p0 = self.sol.nodes.coefficients[0];
        self.scaled_norm * p0 * T::zero().powf(e.delta - T::one()) * (-self.log_peak).exp()
    }

    /// Log-spaced grid of [`GRID_POINTS`] points over the support.
    pub fn standard_grid(&self) -> Vec<T> {
        log_space(self.support.0, self.support.1, GRID_POINTS)
    }

    /// `(r, ψ)` on the standard grid, computed once.
    pub fn samples(&self) -> &[(T, T)] {
        self.grid_cache.get_or_init(|| {
            self.standard_grid()
                .into_iter()
                .map(|r| (r, self.psi(r)))
                .collect()
        })
    }

    /// Sign changes of `ψ` on the standard grid.
    pub fn nodes_observed(&self) -> usize {
        let mut count = 0;
        let mut last = T::zero();
        for &(_, v) in self.samples() {
            if v == T::zero() {
                continue;
            }
            if last != T::zero() && (v > T::zero()) != (last > T::zero()) {
                count += 1;
            }
            last = v;
        }
        count
    }

    /// `∫ψ²r²dr` recomputed by quadrature.
    pub fn norm_integral(&self) -> Result<T> {
        let split = self.support.1 * T::lit(0.25);
        Ok(self.norm_integral_raw(split)?.0)
    }

    /// Normalizes again; the constant changes only by rounding.
    pub fn renormalized(&self) -> Result<Self> {
        let integral = self.norm_integral()?;
        let mut out = self.clone();
        out.scaled_norm = self.scaled_norm / integral.sqrt();
        out.report.ln_norm = out.scaled_norm.ln() - out.log_peak;
        out.grid_cache = OnceLock::new();
        Ok(out)
    }

    /// Writes `r,psi,phi` rows.
    pub fn write_csv<W: Write>(&self, out: W, grid: &[T]) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["r", "psi", "phi"])?;
        for &r in grid {
            w.write_record([
                format_sig(r),
                format_sig(self.psi(r)),
                format_sig(self.phi(r)),
            ])?;
        }
        w.flush()
    }
}

/// `(ν, ∫ r^(ν−1) e^(−αr²−2βr) dr)` through the parabolic cylinder function.
fn gaussian_moment<T: Real>(nu: T, alpha: T, beta: T) -> Result<T> {
    let two_alpha = T::lit(2.0) * alpha;
    let z = T::lit(2.0) * beta / two_alpha.sqrt();
    Ok(two_alpha.powf(-T::lit(0.5) * nu) * gamma(nu)? * pcf_d_scaled(-nu, z)?)
}

fn moment_identity_ln_norm<T: Real>(sol: &AnalyticSolution<T>) -> Option<T> {
    let e = &sol.exponents;
    let p = &sol.nodes.coefficients;
    let sq = poly_mul(p, p);
    let base = T::lit(2.0) * e.delta + T::one();
    let mut total = T::zero();
    for (k, &q) in sq.iter().enumerate() {
        if q == T::zero() {
            continue;
        }
        total = total + q * gaussian_moment(base + T::from_usize_lossy(k), e.alpha, e.beta).ok()?;
    }
    (total > T::zero()).then(|| -T::lit(0.5) * total.ln())
}

/// The printed `N` for `n = 0` and `n = 1`, evaluated exactly as written.
fn printed_ln_norm<T: Real>(sol: &AnalyticSolution<T>) -> Option<(&'static str, Option<T>)> {
    let p = &sol.params;
    let hbar = p.units.hbar;
    let m = p.mass * hbar * hbar / (T::lit(2.0) * p.units.kinetic);
    let (a, b, c) = (p.a, p.b, p.c);
    let lp = sol.lprime;
    let two = T::lit(2.0);
    let w = two * (two * m * a / (hbar * hbar)).sqrt();
    match sol.qn.n {
        0 => {
            let z = T::lit(4.0) * m * c / (hbar * hbar * (T::one() + lp))
                * (hbar / (two * (two * m * a).sqrt())).sqrt();
            let inner = (|| -> Result<T> { Ok(gamma(lp)? * pcf_d(-lp, z)?) })();
            let value = inner.ok().map(|g| {
                let expo = -T::lit(0.5) * (two * m / (hbar * hbar * a)).sqrt() * m * c * c
                    / (hbar * hbar * (T::one() + lp) * (T::one() + lp));
                -T::lit(0.5) * g.ln() + lp / T::lit(4.0) * w.ln() + expo
            });
            Some(("printed ground state", value))
        }
        1 => {
            let z = (hbar / (two * a) * (two * m / a).sqrt()).sqrt() * b * hbar;
            let alpha1 = sol.nodes.roots.first().copied()?;
            let inner = (|| -> Result<T> {
                let s1 = pcf_d(-(lp + two), z)?;
                let s2 = pcf_d(-lp, z)?;
                let s3 = pcf_d(-(lp + T::one()), z)?;
                Ok(
                    gamma(lp + two)? * s1 / w + alpha1 * alpha1 * gamma(lp)? * s2
                        - two * alpha1 * gamma(lp + T::one())? * s3 / w.sqrt(),
                )
            })();
            let value = inner.ok().map(|den| {
                let expo =
                    -(two * m / (a * a * a)).sqrt() * hbar * hbar * hbar * b * b / T::lit(16.0);
                lp / T::lit(4.0) * w.ln() + expo - T::lit(0.5) * den.ln()
            });
            Some(("printed first excited state", value))
        }
        _ => None,
    }
}

/// Sup over `grid` of the relative residual of `φ'' + Q(r)φ = 0`, with
/// `Q = ε − a₁r² − b₁r + c₁/r + (d₁ − l(l+1))/r²`.
///
/// Second derivatives use a five-point stencil with `h` tied to the local
/// length scale `(Σ|Q terms|)^(−1/2)` and capped at `r/100`. Each point is
/// scaled by `|φ''| + Σ|Q terms| · max|φ|` over the stencil, which stays
/// meaningful at nodes. Points where `φ` has underflowed are skipped.
pub fn ode_residual<T: Real>(f: &RadialFunction<T>, grid: &[T]) -> T {
    let sol = &f.sol;
    let s = sol.params.scale(sol.energy);
    let l = T::from_usize_lossy(sol.qn.l);
    let centrifugal = s.d1 - l * (l + T::one());
    let floor = T::min_positive_value() / T::epsilon();
    let mut worst = T::zero();
    for &r in grid {
        if !(r > T::zero()) {
            continue;
        }
        let terms = [
            s.eps,
            -s.a1 * r * r,
            -s.b1 * r,
            s.c1 / r,
            centrifugal / (r * r),
        ];
        let magnitude: T = terms.iter().map(|t| t.abs()).sum();
        let q: T = terms.iter().copied().sum();
        let h = (T::lit(5e-3) / magnitude.sqrt()).min(r / T::lit(100.0));
        let v: Vec<T> = [-2.0, -1.0, 0.0, 1.0, 2.0]
            .iter()
            .map(|&k| f.phi_unit(r + T::lit(k) * h))
            .collect();
        let vmax = v.iter().fold(T::zero(), |m, &x| m.max(x.abs()));
        if vmax < floor {
            continue;
        }
        let d2 = (-v[0] + T::lit(16.0) * v[1] - T::lit(30.0) * v[2] + T::lit(16.0) * v[3] - v[4])
            / (T::lit(12.0) * h * h);
        let scale = d2.abs() + magnitude * vmax;
        let rel = (d2 + q * v[2]).abs() / scale;
        worst = worst.max(if rel.is_nan() { T::infinity() } else { rel });
    }
    worst
}

/// 257 log-spaced radii for residual checks, from 10⁻³ of the length scale to the support edge.
pub fn residual_grid<T: Real>(f: &RadialFunction<T>) -> Vec<T> {
    let r_char = T::one() / f.sol.exponents.alpha.sqrt();
    log_space(r_char * T::lit(1e-3), f.support.1, 257)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aeim::solve_level;
    use crate::units::{QuantumNumbers, UnitSystem};
    use approx::assert_relative_eq;

    fn level(n: usize, l: usize, a: f64, b: f64, d: f64) -> RadialFunction<f64> {
        let sol = solve_level(
            QuantumNumbers::new(n, l),
            a,
            b,
            d,
            1.0,
            UnitSystem::natural(),
        )
        .unwrap();
        RadialFunction::build(sol).unwrap()
    }

    #[test]
    fn harmonic_ground_state_norm() {
        // a = 1/2 ⇒ α = 1, ψ = N e^(−r²/2), N = 2π^(−1/4)
        let f = level(0, 0, 0.5, 0.0, 0.0);
        assert_relative_eq!(
            f.norm(),
            2.0 * std::f64::consts::PI.powf(-0.25),
            max_relative = 1e-11
        );
        assert_relative_eq!(f.psi(0.0), f.norm(), max_relative = 1e-12);
        assert_eq!(f.report().moment_identity.status, CheckStatus::Confirmed);
    }

    #[test]
    fn normalized_and_idempotent() {
        for (n, l) in [(0, 0), (1, 1), (2, 2), (3, 0)] {
            let f = level(n, l, 1.0 / 32.0, 1.0, 0.0);
            assert!((f.norm_integral().unwrap() - 1.0).abs() < 1e-10);
            let g = f.renormalized().unwrap();
            assert!(((g.norm() - f.norm()) / f.norm()).abs() < 1e-12);
        }
    }

    #[test]
    fn node_is_exact_zero_of_polynomial() {
        let f = level(1, 0, 1.0 / 32.0, 1.0, 0.0);
        let x = f.solution().nodes.roots[0];
        assert!(f.psi(x).abs() < 1e-14 * f.psi(x * 0.5).abs());
        assert_eq!(f.nodes_observed(), 1);
    }

    #[test]
    fn residual_small_and_detects_bad_c() {
        let f = level(1, 1, 1.0 / 32.0, 1.0, 0.0);
        assert!(ode_residual(&f, &residual_grid(&f)) < 1e-8);
        let bad = RadialFunction::build(f.solution().with_forced_c(f.solution().params.c * 1.01))
            .unwrap();
        assert!(ode_residual(&bad, &residual_grid(&bad)) > 1e-3);
    }

    #[test]
    fn boundary_exponent() {
        for (l, d) in [(0, 0.0), (1, 0.0), (1, 0.5), (2, 1.0)] {
            let f = level(0, l, 1.0 / 32.0, 1.0, d);
            let (r1, r2) = (1e-6, 1e-4);
            let slope = (f.psi(r2).abs().ln() - f.psi(r1).abs().ln()) / (r2 / r1).ln();
            let expected = (f.solution().lprime - 1.0) / 2.0;
            assert!(
                (slope - expected).abs() < 1e-3,
                "l = {l}, slope {slope} vs {expected}"
            );
        }
    }

    #[test]
    fn tail_decreases_beyond_turning_point() {
        let f = level(2, 1, 1.0 / 32.0, 1.0, 0.0);
        let e = f.solution().energy;
        let p = &f.solution().params;
        let mut r = 1.0;
        while p.potential(r) + 2.0 / (r * r) < e {
            r += 0.01;
        }
        let mut last = f.psi(r).abs();
        for i in 1..400 {
            let v = f.psi(r + 0.05 * i as f64).abs();
            assert!(v <= last);
            last = v;
        }
    }

    #[test]
    fn csv_has_header_and_rows() {
        let f = level(0, 0, 0.5, 0.0, 0.0);
        let mut buf = Vec::new();
        f.write_csv(&mut buf, &[0.5, 1.0]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("r,psi,phi"));
        assert!(lines.next().unwrap().starts_with("5.00000000000e-1,"));
        assert_eq!(lines.count(), 1);
    }

    #[test]
    fn single_precision_build() {
        let sol = solve_level(
            QuantumNumbers::new(0, 0),
            0.5f32,
            0.0,
            0.0,
            1.0,
            UnitSystem::natural(),
        )
        .unwrap();
        let f = RadialFunction::build(sol).unwrap();
        assert!((f.norm() - 2.0 * std::f32::consts::PI.powf(-0.25)).abs() < 1e-4);
    }
}
