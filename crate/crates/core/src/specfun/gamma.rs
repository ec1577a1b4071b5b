use crate::error::{Error, Result};
use crate::num::Real;

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

fn lanczos_sum<T: Real>(x: T) -> T {
    // x is the shifted argument (x − 1)
    let mut acc = T::lit(LANCZOS[0]);
    for (k, &c) in LANCZOS.iter().enumerate().skip(1) {
        acc = acc + T::lit(c) / (x + T::from_usize_lossy(k));
    }
    acc
}

/// Γ(x) for x > 0 (Lanczos, g = 7).
pub fn gamma<T: Real>(x: T) -> Result<T> {
    if !(x > T::zero()) || !x.is_finite() {
        return Err(Error::Domain(format!(
            "gamma is only implemented for x > 0, got {x}"
        )));
    }
    let half = T::lit(0.5);
    if x < half {
        // reflection keeps the Lanczos sum in its accurate range
        let pi = T::PI();
        return Ok(pi / ((pi * x).sin() * gamma(T::one() - x)?));
    }
    let xm = x - T::one();
    let t = xm + T::lit(LANCZOS_G) + half;
    Ok((T::TAU()).sqrt() * t.powf(xm + half) * (-t).exp() * lanczos_sum(xm))
}

/// ln Γ(x) for x > 0.
pub fn ln_gamma<T: Real>(x: T) -> Result<T> {
    if !(x > T::zero()) || !x.is_finite() {
        return Err(Error::Domain(format!(
            "ln_gamma is only implemented for x > 0, got {x}"
        )));
    }
    let half = T::lit(0.5);
    if x < half {
        let pi = T::PI();
        return Ok((pi / (pi * x).sin()).ln() - ln_gamma(T::one() - x)?);
    }
    let xm = x - T::one();
    let t = xm + T::lit(LANCZOS_G) + half;
    Ok(half * T::TAU().ln() + (xm + half) * t.ln() - t + lanczos_sum(xm).ln())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn known_values() {
        assert_relative_eq!(gamma(1.0).unwrap(), 1.0, max_relative = 1e-14);
        assert_relative_eq!(
            gamma(0.5).unwrap(),
            std::f64::consts::PI.sqrt(),
            max_relative = 1e-14
        );
        assert_relative_eq!(gamma(3.0).unwrap(), 2.0, max_relative = 1e-14);
        assert_relative_eq!(gamma(10.0).unwrap(), 362_880.0, max_relative = 1e-13);
        assert_relative_eq!(
            gamma(0.1).unwrap(),
            9.513_507_698_668_732,
            max_relative = 1e-13
        );
        assert_relative_eq!(gamma(2.5f32).unwrap(), 1.329_340_4, max_relative = 1e-6);
    }

    #[test]
    fn recursion_on_half_to_ten() {
        let mut x: f64 = 0.5;
        while x <= 10.0 {
            let lhs = gamma(x + 1.0).unwrap();
            let rhs = x * gamma(x).unwrap();
            assert!(((lhs - rhs) / rhs).abs() < 1e-13, "x = {x}");
            x += 0.0625;
        }
    }

    #[test]
    fn log_gamma_consistent() {
        for &x in &[0.3f64, 1.7, 5.5, 30.0] {
            assert_relative_eq!(
                ln_gamma(x).unwrap(),
                gamma(x).unwrap().ln(),
                max_relative = 1e-12
            );
        }
        assert_relative_eq!(
            ln_gamma(200.0).unwrap(),
            857.933_669_825_857_2,
            max_relative = 1e-13
        );
    }

    #[test]
    fn rejects_non_positive() {
        assert!(gamma(0.0).is_err());
        assert!(gamma(-1.5).is_err());
        assert!(ln_gamma(f64::NAN).is_err());
    }
}
