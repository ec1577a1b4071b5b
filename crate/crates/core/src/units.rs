//! Unit systems, potential parameters and the effective angular parameter `l′`.
//!
//! Masses are carried as multiples of the system's mass unit (the electron
//! mass for the eV-based systems) and the kinetic prefactor `ℏ²/(2·m_unit)`
//! is stored directly. This keeps every derived quantity representable in
//! single precision, where `m_e` in eV·s²/fm² (≈ 5.7·10⁻⁴²) is not.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::Real;

/// ℏ in eV·s, as used for the quantum-dot application.
pub const HBAR_EV_S: f64 = 6.5821e-16;
/// Electron rest energy mₑc² in eV (CODATA 2018).
pub const ELECTRON_REST_ENERGY_EV: f64 = 0.510_998_950e6;
/// Speed of light in m/s.
pub const SPEED_OF_LIGHT_M_S: f64 = 299_792_458.0;
/// Effective electron mass in InGaAs, in units of mₑ.
pub const INGAAS_EFFECTIVE_MASS: f64 = 0.05;

/// Which unit system a set of numbers is expressed in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum UnitLabel {
    /// ℏ = m_unit = 1.
    #[serde(rename = "natural")]
    Natural,
    /// Energies in eV, lengths in nm, masses in mₑ.
    #[serde(rename = "ev-nm")]
    EvNm,
    /// Energies in eV, lengths in fm, masses in mₑ.
    #[serde(rename = "ev-fm")]
    EvFm,
}

impl UnitLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            UnitLabel::Natural => "natural",
            UnitLabel::EvNm => "ev-nm",
            UnitLabel::EvFm => "ev-fm",
        }
    }

    /// Speed of light in length units per second.
    fn light_speed(self) -> Option<f64> {
        match self {
            UnitLabel::Natural => None,
            UnitLabel::EvNm => Some(SPEED_OF_LIGHT_M_S * 1e9),
            UnitLabel::EvFm => Some(SPEED_OF_LIGHT_M_S * 1e15),
        }
    }

    pub fn energy_unit(self) -> &'static str {
        match self {
            UnitLabel::Natural => "natural",
            _ => "eV",
        }
    }

    pub fn length_unit(self) -> &'static str {
        match self {
            UnitLabel::Natural => "natural",
            UnitLabel::EvNm => "nm",
            UnitLabel::EvFm => "fm",
        }
    }
}

impl fmt::Display for UnitLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for UnitLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "natural" => Ok(UnitLabel::Natural),
            "ev-nm" => Ok(UnitLabel::EvNm),
            "ev-fm" => Ok(UnitLabel::EvFm),
            other => Err(Error::Domain(format!(
                "unknown unit system `{other}` (expected natural, ev-nm or ev-fm)"
            ))),
        }
    }
}

/// A concrete unit system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct UnitSystem<T: Real> {
    pub label: UnitLabel,
    /// ℏ in energy·time (time in seconds for the eV systems).
    pub hbar: T,
    /// ℏ² / (2·m_unit) in energy·length².
    pub kinetic: T,
}

impl<T: Real> UnitSystem<T> {
    pub fn natural() -> Self {
        Self {
            label: UnitLabel::Natural,
            hbar: T::one(),
            kinetic: T::lit(0.5),
        }
    }

    pub fn ev_nm() -> Self {
        Self::ev(UnitLabel::EvNm)
    }

    pub fn ev_fm() -> Self {
        Self::ev(UnitLabel::EvFm)
    }

    fn ev(label: UnitLabel) -> Self {
        let c = label.light_speed().expect("eV system");
        let hbar_c = HBAR_EV_S * c;
        Self {
            label,
            hbar: T::lit(HBAR_EV_S),
            kinetic: T::lit(hbar_c * hbar_c / (2.0 * ELECTRON_REST_ENERGY_EV)),
        }
    }

    pub fn from_label(label: UnitLabel) -> Self {
        match label {
            UnitLabel::Natural => Self::natural(),
            UnitLabel::EvNm | UnitLabel::EvFm => Self::ev(label),
        }
    }

    /// Mass unit in energy·time²/length² (mₑ = mₑc²/c² for the eV systems).
    pub fn mass_unit(&self) -> f64 {
        match self.label.light_speed() {
            None => 1.0,
            Some(c) => ELECTRON_REST_ENERGY_EV / (c * c),
        }
    }

    /// `2m/ℏ²` for a particle of `mass` mass units.
    #[inline]
    pub fn scale_factor(&self, mass: T) -> T {
        mass / self.kinetic
    }

    pub fn ensure_same(&self, other: &Self) -> Result<()> {
        if self.label == other.label {
            Ok(())
        } else {
            Err(Error::UnitMismatch(self.label, other.label))
        }
    }
}

/// Radial node count `n` and orbital quantum number `l`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QuantumNumbers {
    pub n: usize,
    pub l: usize,
}

impl QuantumNumbers {
    pub fn new(n: usize, l: usize) -> Self {
        Self { n, l }
    }
}

/// Coefficients of `V(r) = a r² + b r − c/r − d/r²` together with the
/// particle mass (in mass units) and the unit system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct PotentialParams<T: Real> {
    pub a: T,
    pub b: T,
    pub c: T,
    pub d: T,
    pub mass: T,
    pub units: UnitSystem<T>,
}

impl<T: Real> PotentialParams<T> {
    pub fn new(a: T, b: T, c: T, d: T, mass: T, units: UnitSystem<T>) -> Result<Self> {
        for (name, v) in [("a", a), ("b", b), ("c", c), ("d", d), ("mass", mass)] {
            if !v.is_finite() {
                return Err(Error::Domain(format!("{name} must be finite, got {v}")));
            }
        }
        if a <= T::zero() {
            return Err(Error::Domain(format!(
                "harmonic coefficient a must be > 0, got {a}"
            )));
        }
        if b < T::zero() {
            return Err(Error::Domain(format!(
                "linear coefficient b must be ≥ 0, got {b}"
            )));
        }
        if mass <= T::zero() {
            return Err(Error::Domain(format!("mass must be > 0, got {mass}")));
        }
        Ok(Self {
            a,
            b,
            c,
            d,
            mass,
            units,
        })
    }

    /// ℏ = m = 1 parameters.
    pub fn natural(a: T, b: T, c: T, d: T) -> Result<Self> {
        Self::new(a, b, c, d, T::one(), UnitSystem::natural())
    }

    pub fn with_c(mut self, c: T) -> Self {
        self.c = c;
        self
    }

    /// `V(r)`; tends to −∞ as r → 0⁺ whenever `d > 0`.
    pub fn potential(&self, r: T) -> T {
        self.a * r * r + self.b * r - self.c / r - self.d / (r * r)
    }

    /// `2m/ℏ²`.
    #[inline]
    pub fn scale_factor(&self) -> T {
        self.units.scale_factor(self.mass)
    }

    /// `√(ℏ²a/2m)`, half the level spacing of the closed-form spectrum.
    pub fn half_quantum(&self) -> T {
        (self.a / self.scale_factor()).sqrt()
    }

    /// Largest admissible `d` for orbital number `l`: `(2l+1)²ℏ²/(8m)`.
    pub fn d_bound(&self, l: usize) -> T {
        let k = T::from_usize_lossy(2 * l + 1);
        k * k / (T::lit(4.0) * self.scale_factor())
    }

    pub fn lprime(&self, l: usize) -> Result<T> {
        lprime(l, self.d, self.mass, &self.units)
    }

    /// Multiplies `(E, a, b, c, d)` by `2m/ℏ²`.
    pub fn scale(&self, energy: T) -> ScaledParams<T> {
        let k = self.scale_factor();
        ScaledParams {
            eps: k * energy,
            a1: k * self.a,
            b1: k * self.b,
            c1: k * self.c,
            d1: k * self.d,
        }
    }

    /// Re-expresses the parameters with ℏ = m = 1, keeping the length unit.
    pub fn to_natural(&self) -> (PotentialParams<T>, NaturalScales<T>) {
        // energy unit ℏ²/(m L²) with L the system's length unit
        let e0 = T::lit(2.0) * self.units.kinetic / self.mass;
        let nat = PotentialParams {
            a: self.a / e0,
            b: self.b / e0,
            c: self.c / e0,
            d: self.d / e0,
            mass: T::one(),
            units: UnitSystem::natural(),
        };
        let scales = NaturalScales {
            energy: e0,
            mass: self.mass,
            source: self.units,
        };
        (nat, scales)
    }

    /// Inverse of [`to_natural`](Self::to_natural).
    pub fn from_natural(nat: &PotentialParams<T>, scales: &NaturalScales<T>) -> Result<Self> {
        if nat.units.label != UnitLabel::Natural {
            return Err(Error::UnitMismatch(nat.units.label, UnitLabel::Natural));
        }
        let e0 = scales.energy;
        Self::new(
            nat.a * e0,
            nat.b * e0,
            nat.c * e0,
            nat.d * e0,
            scales.mass,
            scales.source,
        )
    }
}

/// Scale factors produced by [`PotentialParams::to_natural`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NaturalScales<T: Real> {
    /// Natural energy unit expressed in the source system.
    pub energy: T,
    pub mass: T,
    pub source: UnitSystem<T>,
}

/// Potential and energy multiplied by `2m/ℏ²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct ScaledParams<T: Real> {
    pub eps: T,
    pub a1: T,
    pub b1: T,
    pub c1: T,
    pub d1: T,
}

impl<T: Real> ScaledParams<T> {
    /// Returns `(E, a, b, c, d)` given the `2m/ℏ²` factor used to scale.
    pub fn unscale(&self, factor: T) -> (T, T, T, T, T) {
        (
            self.eps / factor,
            self.a1 / factor,
            self.b1 / factor,
            self.c1 / factor,
            self.d1 / factor,
        )
    }
}

/// `l′ = √((2l+1)² − 8md/ℏ²)`.
///
/// A radicand within rounding of zero is clamped to zero (the bound itself is
/// admissible: ψ ~ r^(−1/2) is still square integrable against r²dr).
pub fn lprime<T: Real>(l: usize, d: T, mass: T, units: &UnitSystem<T>) -> Result<T> {
    let k = T::from_usize_lossy(2 * l + 1);
    let k2 = k * k;
    let radicand = k2 - T::lit(4.0) * units.scale_factor(mass) * d;
    if !radicand.is_finite() {
        return Err(Error::Domain(format!(
            "l′ radicand is not finite for d = {d}"
        )));
    }
    let slack = T::epsilon() * T::lit(64.0) * k2;
    if radicand < -slack {
        let bound = k2 / (T::lit(4.0) * units.scale_factor(mass));
        return Err(Error::Domain(format!(
            "d = {d} exceeds the bound (2l+1)²ℏ²/(8m) = {bound} for l = {l}"
        )));
    }
    if radicand <= slack {
        log::warn!("d sits on the bound for l = {l}: l′ = 0, ψ ~ r^(-1/2) near the origin");
        return Ok(T::zero());
    }
    Ok(radicand.sqrt())
}
