//! Adaptive 21-point Gauss–Kronrod quadrature.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::Real;

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_208_703_219_464,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

// Gauss weights for the nodes XGK[1], XGK[3], ..., XGK[9]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// Tolerances for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct QuadratureSpec<T: Real> {
    pub rel_tol: T,
    pub abs_tol: T,
    pub max_subdivisions: usize,
}

impl<T: Real> Default for QuadratureSpec<T> {
    fn default() -> Self {
        Self {
            rel_tol: T::tol_floor(1e-10),
            abs_tol: T::lit(1e-14),
            max_subdivisions: 200,
        }
    }
}

impl<T: Real> QuadratureSpec<T> {
    pub fn new(rel_tol: T, abs_tol: T, max_subdivisions: usize) -> Result<Self> {
        if !(rel_tol > T::zero()) || abs_tol < T::zero() || max_subdivisions == 0 {
            return Err(Error::Domain(format!(
                "invalid quadrature tolerances (rel {rel_tol}, abs {abs_tol}, max {max_subdivisions})"
            )));
        }
        Ok(Self {
            rel_tol,
            abs_tol,
            max_subdivisions,
        })
    }
}

/// Integral estimate with its error bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate<T> {
    pub value: T,
    pub error: T,
    pub evaluations: usize,
}

#[derive(Clone, Copy)]
struct Segment<T> {
    a: T,
    b: T,
    value: T,
    error: T,
}

fn kronrod<T: Real, F: Fn(T) -> T>(f: &F, a: T, b: T) -> Segment<T> {
    let half = T::lit(0.5);
    let center = half * (a + b);
    let half_len = half * (b - a);
    let f_center = f(center);
    let mut res_k = f_center * T::lit(WGK[10]);
    let mut res_g = T::zero();
    let mut res_abs = res_k.abs();
    let mut fv1 = [T::zero(); 10];
    let mut fv2 = [T::zero(); 10];
    for j in 0..10 {
        let dx = half_len * T::lit(XGK[j]);
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        let w = T::lit(WGK[j]);
        res_k = res_k + w * (f1 + f2);
        res_abs = res_abs + w * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g = res_g + T::lit(WG[j / 2]) * (f1 + f2);
        }
    }
    let mean = res_k * half;
    let mut res_asc = T::lit(WGK[10]) * (f_center - mean).abs();
    for j in 0..10 {
        res_asc = res_asc + T::lit(WGK[j]) * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = res_k * half_len;
    let res_abs = res_abs * half_len.abs();
    let res_asc = res_asc * half_len.abs();
    let mut error = ((res_k - res_g) * half_len).abs();
    if res_asc != T::zero() && error != T::zero() {
        let scale = (T::lit(200.0) * error / res_asc).powf(T::lit(1.5));
        error = if scale < T::one() {
            res_asc * scale
        } else {
            res_asc
        };
    }
    let floor = T::lit(50.0) * T::epsilon() * res_abs;
    if res_abs > T::min_positive_value() / (T::lit(50.0) * T::epsilon()) && floor > error {
        error = floor;
    }
    Segment { a, b, value, error }
}

fn adaptive<T: Real, F: Fn(T) -> T>(
    f: &F,
    a: T,
    b: T,
    spec: &QuadratureSpec<T>,
) -> Result<Estimate<T>> {
    let mut segments = vec![kronrod(f, a, b)];
    let mut evaluations = 21;
    loop {
        let total: T = segments.iter().map(|s| s.value).sum();
        let err: T = segments.iter().map(|s| s.error).sum();
        if !total.is_finite() {
            return Err(Error::QuadratureFailure {
                estimate: total.to_f64_lossy(),
                error: f64::INFINITY,
            });
        }
        if err <= spec.abs_tol.max(spec.rel_tol * total.abs()) {
            return Ok(Estimate {
                value: total,
                error: err,
                evaluations,
            });
        }
        if segments.len() >= spec.max_subdivisions {
            return Err(Error::QuadratureFailure {
                estimate: total.to_f64_lossy(),
                error: err.to_f64_lossy(),
            });
        }
        let (worst, _) =
            segments
                .iter()
                .enumerate()
                .fold((0, T::neg_infinity()), |(bi, be), (i, s)| {
                    if s.error > be {
                        (i, s.error)
                    } else {
                        (bi, be)
                    }
                });
        let seg = segments.swap_remove(worst);
        let mid = T::lit(0.5) * (seg.a + seg.b);
        if !(mid > seg.a && mid < seg.b) {
            // interval cannot be split further in this precision
            return Err(Error::QuadratureFailure {
                estimate: total.to_f64_lossy(),
                error: err.to_f64_lossy(),
            });
        }
        segments.push(kronrod(f, seg.a, mid));
        segments.push(kronrod(f, mid, seg.b));
        evaluations += 42;
    }
}

/// ∫ₐᵇ f. An infinite `b` is handled by [`integrate_semi_infinite`] with a
/// unit length scale.
pub fn integrate<T: Real, F: Fn(T) -> T>(
    f: F,
    a: T,
    b: T,
    spec: &QuadratureSpec<T>,
) -> Result<Estimate<T>> {
    if b == T::infinity() {
        return integrate_semi_infinite(f, a, T::one(), spec);
    }
    if !a.is_finite() || !b.is_finite() {
        return Err(Error::Domain(format!(
            "unsupported integration limits [{a}, {b}]"
        )));
    }
    if a == b {
        return Ok(Estimate {
            value: T::zero(),
            error: T::zero(),
            evaluations: 0,
        });
    }
    if b < a {
        let e = adaptive(&f, b, a, spec)?;
        return Ok(Estimate {
            value: -e.value,
            ..e
        });
    }
    adaptive(&f, a, b, spec)
}

/// ∫ₐ^∞ f for integrands with an exponentially decaying tail.
///
/// Panels `[a, a + scale]`, `[a + scale, a + 3·scale]`, … of doubling width
/// are integrated adaptively until two consecutive panels each contribute
/// less than the requested tolerance and are shrinking. The returned error
/// adds the last panel's magnitude as the truncation bound.
pub fn integrate_semi_infinite<T: Real, F: Fn(T) -> T>(
    f: F,
    a: T,
    scale: T,
    spec: &QuadratureSpec<T>,
) -> Result<Estimate<T>> {
    if !a.is_finite() || !(scale > T::zero()) {
        return Err(Error::Domain(format!(
            "invalid semi-infinite integral from {a} with scale {scale}"
        )));
    }
    const MAX_PANELS: usize = 200;
    let mut total = T::zero();
    let mut error = T::zero();
    let mut evaluations = 0;
    let mut lo = a;
    let mut width = scale;
    let mut previous = T::infinity();
    let mut quiet = 0;
    let panel_spec = QuadratureSpec {
        rel_tol: spec.rel_tol,
        abs_tol: spec.abs_tol * T::lit(0.01),
        max_subdivisions: spec.max_subdivisions,
    };
    for _ in 0..MAX_PANELS {
        let hi = lo + width;
        let panel = adaptive(&f, lo, hi, &panel_spec)?;
        total = total + panel.value;
        error = error + panel.error;
        evaluations += panel.evaluations;
        let magnitude = panel.value.abs();
        let target = spec.abs_tol.max(spec.rel_tol * total.abs()) * T::lit(0.1);
        if magnitude <= target && magnitude <= previous {
            quiet += 1;
            if quiet >= 2 {
                return Ok(Estimate {
                    value: total,
                    error: error + magnitude,
                    evaluations,
                });
            }
        } else {
            quiet = 0;
        }
        previous = magnitude;
        lo = hi;
        width = width + width;
    }
    Err(Error::QuadratureFailure {
        estimate: total.to_f64_lossy(),
        error: f64::INFINITY,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn spec() -> QuadratureSpec<f64> {
        QuadratureSpec::new(1e-12, 1e-300, 400).unwrap()
    }

    #[test]
    fn gaussian_integrals() {
        let e = integrate(|r: f64| (-r * r).exp(), 0.0, f64::INFINITY, &spec()).unwrap();
        assert_relative_eq!(e.value, PI.sqrt() / 2.0, max_relative = 1e-12);
        let e = integrate(|r: f64| r * r * (-r * r).exp(), 0.0, f64::INFINITY, &spec()).unwrap();
        assert_relative_eq!(e.value, PI.sqrt() / 4.0, max_relative = 1e-12);
    }

    #[test]
    fn finite_interval_and_reversed_limits() {
        let e = integrate(|x: f64| x.sin(), 0.0, PI, &spec()).unwrap();
        assert_relative_eq!(e.value, 2.0, max_relative = 1e-13);
        let r = integrate(|x: f64| x.sin(), PI, 0.0, &spec()).unwrap();
        assert_relative_eq!(r.value, -2.0, max_relative = 1e-13);
        assert_eq!(integrate(|x: f64| x, 1.0, 1.0, &spec()).unwrap().value, 0.0);
    }

    #[test]
    fn integrable_endpoint_singularity() {
        let e = integrate(|x: f64| 1.0 / x.sqrt(), 0.0, 1.0, &spec()).unwrap();
        assert_relative_eq!(e.value, 2.0, max_relative = 1e-10);
    }

    #[test]
    fn wide_scale_tail() {
        // scale 1e4 away from the default unit panel
        let s = 1e4;
        let e =
            integrate_semi_infinite(|r: f64| (-(r / s).powi(2)).exp(), 0.0, 1.0, &spec()).unwrap();
        assert_relative_eq!(e.value, s * PI.sqrt() / 2.0, max_relative = 1e-11);
    }

    #[test]
    fn failure_reports_estimate() {
        let tight = QuadratureSpec::new(1e-15, 0.0, 3).unwrap();
        let err = integrate(|x: f64| (1.0 / x).sin(), 1e-6, 1.0, &tight).unwrap_err();
        assert!(matches!(err, Error::QuadratureFailure { .. }));
    }

    #[test]
    fn single_precision() {
        let s = QuadratureSpec::<f32>::default();
        let e = integrate(|r: f32| (-r * r).exp(), 0.0, f32::INFINITY, &s).unwrap();
        assert_relative_eq!(e.value, (PI as f32).sqrt() / 2.0, max_relative = 1e-5);
    }

    #[test]
    fn invalid_spec_rejected() {
        assert!(QuadratureSpec::new(0.0, 1e-14, 10).is_err());
        assert!(QuadratureSpec::new(1e-10, -1.0, 10).is_err());
    }
}
