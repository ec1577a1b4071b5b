//! Spherical quantum-dot layer: energies parameterized by the oscillator
//! frequency `ω` (with `a = mω²/2`) and by the Coulomb strength `c`.
//!
//! Here `c` is a free knob. The formulas are exact for the potential that
//! carries the matching linear strength `b`, which is reported alongside
//! every value.

use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::aeim::{constrain_b_from_c, energy_closed_form, solve_level, Branch};
use crate::error::{Error, Result};
use crate::num::{format_sig, Real};
use crate::units::{PotentialParams, QuantumNumbers, UnitLabel, UnitSystem, INGAAS_EFFECTIVE_MASS};
use crate::wavefunction::RadialFunction;

/// Effective-mass particle in a harmonic dot of angular frequency `omega`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct QDotPreset<T: Real> {
    /// In electron masses for the eV systems.
    pub mass: T,
    pub units: UnitSystem<T>,
    /// Angular frequency in rad/s (natural units: inverse natural time).
    pub omega: T,
}

impl<T: Real> QDotPreset<T> {
    pub fn new(mass: T, units: UnitSystem<T>, omega: T) -> Result<Self> {
        if !(mass > T::zero() && mass.is_finite()) {
            return Err(Error::Domain(format!("mass must be positive, got {mass}")));
        }
        if !(omega > T::zero() && omega.is_finite()) {
            return Err(Error::Domain(format!("ω must be positive, got {omega}")));
        }
        Ok(Self { mass, units, omega })
    }

    /// InGaAs electron, `m = 0.05 mₑ`, energies in eV and lengths in nm.
    pub fn ingaas(omega: T) -> Result<Self> {
        Self::new(T::lit(INGAAS_EFFECTIVE_MASS), UnitSystem::ev_nm(), omega)
    }

    pub fn with_units(self, label: UnitLabel) -> Self {
        Self {
            units: UnitSystem::from_label(label),
            ..self
        }
    }

    pub fn with_omega(self, omega: T) -> Result<Self> {
        Self::new(self.mass, self.units, omega)
    }

    pub fn hbar_omega(&self) -> T {
        self.units.hbar * self.omega
    }

    /// `mω²/2`, written as `m_rel (ℏω)² / (4 ℏ²/2m_unit)` to stay in range.
    pub fn a(&self) -> T {
        let hw = self.hbar_omega();
        self.mass * hw * hw / (T::lit(4.0) * self.units.kinetic)
    }

    /// `2m/ℏ²`.
    pub fn scale_factor(&self) -> T {
        self.units.scale_factor(self.mass)
    }

    pub fn params(&self, b: T, c: T, d: T) -> Result<PotentialParams<T>> {
        PotentialParams::new(self.a(), b, c, d, self.mass, self.units)
    }

    /// Oscillator length `(ℏ/mω)^(1/2)`.
    pub fn oscillator_length(&self) -> T {
        (T::lit(2.0) * self.units.kinetic / (self.mass * self.hbar_omega())).sqrt()
    }

    fn lprime(&self, l: usize, d: T) -> Result<T> {
        crate::units::lprime(l, d, self.mass, &self.units)
    }
}

/// `b` that makes `c` the exact ground-state Coulomb strength: `b = 2mωc/(ℏ(1 + l′))`.
pub fn implied_b_ground<T: Real>(preset: &QDotPreset<T>, l: usize, c: T, d: T) -> Result<T> {
    let lp = preset.lprime(l, d)?;
    // α = mω/ℏ in scaled units, b = 2αβ/k with β = c₁/(1 + l′)
    let alpha = preset.scale_factor() * preset.hbar_omega() / T::lit(2.0);
    Ok(T::lit(2.0) * alpha * c / (T::one() + lp))
}

/// `E₀(ω) = (2 + l′)ℏω/2 − (2m/ℏ²) c² (1 + l′)⁻²`.
pub fn ground_energy_vs_omega<T: Real>(preset: &QDotPreset<T>, l: usize, c: T, d: T) -> Result<T> {
    let lp = preset.lprime(l, d)?;
    let one_lp = T::one() + lp;
    Ok((T::lit(2.0) + lp) * preset.hbar_omega() / T::lit(2.0)
        - preset.scale_factor() * c * c / (one_lp * one_lp))
}

/// First excited energy in closed form in `c`:
///
/// ```text
/// E₁ = (4 + l′)ℏω/2 − 2(2 + l′)² m c² / ((1 + l′)²(3 + l′)² ℏ²) · [1 ∓ √(1 + K(X − 1))]²
/// K = (1 + l′)(3 + l′)/(2 + l′)²,   X = ℏ³ω(1 + l′)/(2mc²)
/// ```
///
/// with `−` for [`Branch::PositiveNode`] and `+` for [`Branch::NegativeNode`].
pub fn excited_energy_vs_omega<T: Real>(
    preset: &QDotPreset<T>,
    l: usize,
    c: T,
    d: T,
    branch: Branch,
) -> Result<T> {
    if !(c > T::zero()) {
        return Err(Error::Domain(format!(
            "first excited energy needs c > 0, got {c}"
        )));
    }
    let lp = preset.lprime(l, d)?;
    let one = T::one();
    let two = T::lit(2.0);
    let (l1, l2, l3) = (one + lp, two + lp, T::lit(3.0) + lp);
    let k = preset.scale_factor();
    let hw = preset.hbar_omega();
    // X = 2α(1 + l′)/c₁² with α = k ℏω/2 and c₁ = k c
    let x = hw * l1 / (k * c * c);
    let kk = l1 * l3 / (l2 * l2);
    let inner = one + kk * (x - one);
    if inner < T::zero() {
        return Err(Error::Domain(format!(
            "negative radicand {inner} in the first excited energy"
        )));
    }
    let root = inner.sqrt();
    let bracket = match branch {
        Branch::PositiveNode => one - root,
        Branch::NegativeNode => one + root,
    };
    // 2m c²/ℏ² = k c²
    let shift = l2 * l2 / (l1 * l1 * l3 * l3) * k * c * c * bracket * bracket;
    Ok((T::lit(4.0) + lp) * hw / two - shift)
}

/// Same energy through `E₁ = (4 + l′)ℏω/2 − b²/(2mω²)` with `b` from the `b(c)` relation.
pub fn excited_energy_via_b<T: Real>(
    preset: &QDotPreset<T>,
    l: usize,
    c: T,
    d: T,
    branch: Branch,
) -> Result<T> {
    let b = constrain_b_from_c(l, preset.a(), c, d, preset.mass, preset.units, branch)?;
    let lp = preset.lprime(l, d)?;
    Ok((T::lit(4.0) + lp) * preset.hbar_omega() / T::lit(2.0) - b * b / (T::lit(4.0) * preset.a()))
}

/// `E₁ − E₀` of the pseudoharmonic dot (`b = c = 0`); equals `ℏω` for every `l` and valid `d`.
pub fn level_spacing_pho<T: Real>(preset: &QDotPreset<T>, l: usize, d: T) -> Result<T> {
    let p = preset.params(T::zero(), T::zero(), d)?;
    Ok(energy_closed_form(QuantumNumbers::new(1, l), &p)?
        - energy_closed_form(QuantumNumbers::new(0, l), &p)?)
}

/// Normalized ground-state `ψ₀(r)` for the potential with the implied `b`.
pub fn ground_psi<T: Real>(preset: &QDotPreset<T>, l: usize, c: T, d: T, r: T) -> Result<T> {
    let b = implied_b_ground(preset, l, c, d)?;
    let sol = solve_level(
        QuantumNumbers::new(0, l),
        preset.a(),
        b,
        d,
        preset.mass,
        preset.units,
    )?;
    Ok(RadialFunction::build(sol)?.psi(r))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepVariable {
    Omega,
    C,
}

impl SweepVariable {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Omega => "omega",
            Self::C => "c",
        }
    }
}

impl FromStr for SweepVariable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "omega" | "w" => Ok(Self::Omega),
            "c" => Ok(Self::C),
            _ => Err(Error::Domain(format!(
                "unknown sweep variable {s:?}, expected omega or c"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Quantity {
    #[serde(alias = "e0")]
    E0,
    #[serde(alias = "e1")]
    E1,
    #[serde(rename = "psi0")]
    Psi0,
}

impl Quantity {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::E0 => "E0",
            Self::E1 => "E1",
            Self::Psi0 => "psi0",
        }
    }
}

impl FromStr for Quantity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "e0" => Ok(Self::E0),
            "e1" => Ok(Self::E1),
            "psi0" => Ok(Self::Psi0),
            _ => Err(Error::Domain(format!(
                "unknown quantity {s:?}, expected E0, E1 or psi0"
            ))),
        }
    }
}

/// One sweep over `ω` or `c` with everything else fixed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct SweepSpec<T: Real> {
    pub variable: SweepVariable,
    pub lo: T,
    pub hi: T,
    pub points: usize,
    pub l: usize,
    /// Used when sweeping `ω`.
    pub c: T,
    /// Used when sweeping `c`.
    pub omega: T,
    pub d: T,
    pub quantity: Quantity,
    #[serde(default)]
    pub branch: Branch,
    /// Radius for `psi0`; defaults to the oscillator length at each point.
    #[serde(default)]
    pub probe_radius: Option<T>,
}

impl<T: Real> SweepSpec<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.lo < self.hi) || !self.lo.is_finite() || !self.hi.is_finite() {
            return Err(Error::Domain(format!(
                "sweep range needs lo < hi, got [{}, {}]",
                self.lo, self.hi
            )));
        }
        if self.points < 2 {
            return Err(Error::Domain(format!(
                "a sweep needs at least 2 points, got {}",
                self.points
            )));
        }
        if self.variable == SweepVariable::Omega && !(self.lo > T::zero()) {
            return Err(Error::Domain("ω must stay positive over the sweep".into()));
        }
        Ok(())
    }

    /// Sweep abscissae, evenly spaced and ending exactly at `hi`.
    pub fn abscissae(&self) -> Vec<T> {
        let last = T::from_usize_lossy(self.points - 1);
        (0..self.points)
            .map(|i| {
                if i + 1 == self.points {
                    self.hi
                } else {
                    self.lo + (self.hi - self.lo) * T::from_usize_lossy(i) / last
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow<T: Real> {
    pub x: T,
    pub value: Result<T>,
    /// Whether the analytic expression is exact for a valid potential (`b ≥ 0`).
    pub constraint_satisfied: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable<T: Real> {
    pub quantity: Quantity,
    pub units: &'static str,
    pub rows: Vec<SweepRow<T>>,
}

impl<T: Real> SweepTable<T> {
    pub fn values(&self) -> Vec<Option<T>> {
        self.rows
            .iter()
            .map(|r| r.value.as_ref().ok().copied())
            .collect()
    }

    /// Header `x,quantity,value,units,constraint_satisfied`; failed points
    /// carry `NaN` and the error message in the last column.
    pub fn write_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        write_curves_csv(&[(self.quantity.as_str().to_string(), self)], out)
    }

    fn write_rows<W: Write>(&self, w: &mut csv::Writer<W>, label: &str) -> std::io::Result<()> {
        for row in &self.rows {
            let (value, status) = match &row.value {
                Ok(v) => (
                    format_sig(*v),
                    if row.constraint_satisfied {
                        "yes".to_string()
                    } else {
                        "no".to_string()
                    },
                ),
                Err(e) => ("NaN".to_string(), format!("error: {e}")),
            };
            w.write_record([
                format_sig(row.x),
                label.to_string(),
                value,
                self.units.to_string(),
                status,
            ])?;
        }
        Ok(())
    }
}

/// Several sweeps in one CSV with the same header as [`SweepTable::write_csv`];
/// the quantity column carries each curve's label.
pub fn write_curves_csv<T: Real, W: Write>(
    curves: &[(String, &SweepTable<T>)],
    out: W,
) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["x", "quantity", "value", "units", "constraint_satisfied"])?;
    for (label, table) in curves {
        table.write_rows(&mut w, label)?;
    }
    w.flush()
}

fn sweep_point<T: Real>(spec: &SweepSpec<T>, preset: &QDotPreset<T>, x: T) -> (Result<T>, bool) {
    let (preset, c) = match spec.variable {
        SweepVariable::Omega => match preset.with_omega(x) {
            Ok(p) => (p, spec.c),
            Err(e) => return (Err(e), false),
        },
        SweepVariable::C => match preset.with_omega(spec.omega) {
            Ok(p) => (p, x),
            Err(e) => return (Err(e), false),
        },
    };
    let (l, d) = (spec.l, spec.d);
    match spec.quantity {
        Quantity::E0 => {
            let ok = implied_b_ground(&preset, l, c, d).is_ok_and(|b| b >= T::zero());
            (ground_energy_vs_omega(&preset, l, c, d), ok)
        }
        Quantity::E1 => {
            let ok =
                constrain_b_from_c(l, preset.a(), c, d, preset.mass, preset.units, spec.branch)
                    .is_ok_and(|b| b >= T::zero());
            (excited_energy_vs_omega(&preset, l, c, d, spec.branch), ok)
        }
        Quantity::Psi0 => {
            let ok = c >= T::zero();
            let r = spec
                .probe_radius
                .unwrap_or_else(|| preset.oscillator_length());
            (ground_psi(&preset, l, c, d, r), ok)
        }
    }
}

/// Evaluates every sweep point in parallel; rows come back in input order.
pub fn run_sweep<T: Real>(spec: &SweepSpec<T>, preset: &QDotPreset<T>) -> Result<SweepTable<T>> {
    spec.validate()?;
    let rows = spec
        .abscissae()
        .into_par_iter()
        .map(|x| {
            let (value, constraint_satisfied) = sweep_point(spec, preset, x);
            if let Err(e) = &value {
                log::warn!("sweep point {x}: {e}");
            }
            SweepRow {
                x,
                value,
                constraint_satisfied,
            }
        })
        .collect();
    let units = match spec.quantity {
        Quantity::E0 | Quantity::E1 => preset.units.label.energy_unit(),
        Quantity::Psi0 => psi_unit(preset.units.label),
    };
    Ok(SweepTable {
        quantity: spec.quantity,
        units,
        rows,
    })
}

fn psi_unit(label: UnitLabel) -> &'static str {
    match label {
        UnitLabel::Natural => "natural",
        UnitLabel::EvNm => "nm^-3/2",
        UnitLabel::EvFm => "fm^-3/2",
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aeim::ground_energy_from_c;
    use approx::assert_relative_eq;

    fn dot(omega: f64) -> QDotPreset<f64> {
        QDotPreset::ingaas(omega).unwrap()
    }

    #[test]
    fn pure_oscillator_ground_state() {
        let e = ground_energy_vs_omega(&dot(1e15), 0, 0.0, 0.0).unwrap();
        assert_relative_eq!(e, 1.5 * 6.5821e-16 * 1e15, max_relative = 1e-5);
        assert!((e - 0.98732).abs() < 1e-5);
    }

    #[test]
    fn oscillator_strength_matches_half_quantum() {
        let p = dot(8e14).params(0.0, 0.0, 0.0).unwrap();
        assert_relative_eq!(
            p.half_quantum(),
            dot(8e14).hbar_omega() / 2.0,
            max_relative = 1e-13
        );
    }

    #[test]
    fn ground_energy_agrees_with_constrained_solver() {
        for l in 0..3 {
            let pre = dot(8e14);
            let (c, d) = (0.08, 0.01);
            let b = implied_b_ground(&pre, l, c, d).unwrap();
            let p = pre.params(b, c, d).unwrap();
            let closed = energy_closed_form(QuantumNumbers::new(0, l), &p).unwrap();
            let via_c = ground_energy_from_c(l, &p).unwrap();
            let fig = ground_energy_vs_omega(&pre, l, c, d).unwrap();
            assert_relative_eq!(fig, closed, max_relative = 1e-12);
            assert_relative_eq!(fig, via_c, max_relative = 1e-12);
        }
    }

    #[test]
    fn excited_energy_two_ways() {
        for branch in [Branch::PositiveNode, Branch::NegativeNode] {
            let pre = dot(8e14);
            let direct = excited_energy_vs_omega(&pre, 0, 0.001, 0.0, branch).unwrap();
            let via_b = excited_energy_via_b(&pre, 0, 0.001, 0.0, branch).unwrap();
            assert_relative_eq!(direct, via_b, max_relative = 1e-10);
        }
    }

    #[test]
    fn excited_energy_small_c_limit() {
        // b(c) stays finite as c → 0⁺, so E₁ keeps a shift of ℏω/(3 + l′)
        let pre = dot(8e14);
        let hw = pre.hbar_omega();
        for branch in [Branch::PositiveNode, Branch::NegativeNode] {
            let e = excited_energy_vs_omega(&pre, 0, 1e-9, 0.0, branch).unwrap();
            assert_relative_eq!(e, 2.5 * hw - hw / 4.0, max_relative = 1e-6);
        }
    }

    #[test]
    fn excited_energy_orders_by_l() {
        let pre = dot(8e14);
        let e0 = excited_energy_vs_omega(&pre, 0, 0.001, 0.0, Branch::PositiveNode).unwrap();
        let e1 = excited_energy_vs_omega(&pre, 1, 0.001, 0.0, Branch::PositiveNode).unwrap();
        assert!(e1 > e0);
    }

    #[test]
    fn attractive_d_lowers_ground_energy() {
        let pre = dot(8e14);
        let free = ground_energy_vs_omega(&pre, 1, 0.001, 0.0).unwrap();
        let with_d = ground_energy_vs_omega(&pre, 1, 0.001, 0.1).unwrap();
        assert!(with_d < free);
    }

    #[test]
    fn spacing_is_hbar_omega() {
        let nat = QDotPreset::new(1.0, UnitSystem::natural(), 1.0).unwrap();
        assert_relative_eq!(
            level_spacing_pho(&nat, 0, 0.0).unwrap(),
            1.0,
            max_relative = 1e-14
        );
        let pre = dot(1e15);
        for l in 0..3 {
            for &frac in &[0.0, 0.3, 0.9] {
                let d = frac * pre.params(0.0, 0.0, 0.0).unwrap().d_bound(l);
                let de = level_spacing_pho(&pre, l, d).unwrap();
                assert_relative_eq!(de, 6.5821e-16 * 1e15, max_relative = 1e-12);
            }
        }
    }

    fn spec(variable: SweepVariable, lo: f64, hi: f64, quantity: Quantity) -> SweepSpec<f64> {
        SweepSpec {
            variable,
            lo,
            hi,
            points: 9,
            l: 0,
            c: 0.001,
            omega: 8e14,
            d: 0.01,
            quantity,
            branch: Branch::PositiveNode,
            probe_radius: None,
        }
    }

    #[test]
    fn sweeps_have_expected_trends() {
        let up = run_sweep(
            &spec(SweepVariable::Omega, 2e14, 1e15, Quantity::E0),
            &dot(1e15),
        )
        .unwrap();
        let v: Vec<f64> = up.values().into_iter().map(Option::unwrap).collect();
        assert!(v.windows(2).all(|w| w[1] > w[0]));
        let down = run_sweep(
            &spec(SweepVariable::C, 0.06, 0.10, Quantity::E0),
            &dot(1e15),
        )
        .unwrap();
        let v: Vec<f64> = down.values().into_iter().map(Option::unwrap).collect();
        assert!(v.windows(2).all(|w| w[1] < w[0]));
        assert!(down.rows.iter().all(|r| r.constraint_satisfied));
    }

    #[test]
    fn two_point_sweep_csv() {
        let mut s = spec(SweepVariable::Omega, 2e14, 1e15, Quantity::E0);
        s.points = 2;
        let table = run_sweep(&s, &dot(1e15)).unwrap();
        let mut buf = Vec::new();
        table.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "x,quantity,value,units,constraint_satisfied");
        assert_eq!(lines.len(), 3);
        assert!(lines[2].starts_with("1.00000000000e15,E0,"));
        assert!(lines[2].ends_with(",eV,yes"));
    }

    #[test]
    fn failed_points_keep_going() {
        let mut s = spec(SweepVariable::Omega, 2e14, 1e15, Quantity::E0);
        s.d = 10.0; // beyond the bound for l = 0
        let table = run_sweep(&s, &dot(1e15)).unwrap();
        assert_eq!(table.rows.len(), 9);
        let mut buf = Vec::new();
        table.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.lines().nth(1).unwrap().contains(",NaN,eV,error: "));
    }

    #[test]
    fn psi_at_origin_by_l() {
        let pre = dot(1e15);
        assert!(ground_psi(&pre, 0, 0.001, 0.0, 0.0).unwrap() > 0.0);
        assert_eq!(ground_psi(&pre, 1, 0.001, 0.0, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn sweep_rejects_bad_specs() {
        let mut s = spec(SweepVariable::C, 0.1, 0.06, Quantity::E0);
        assert!(run_sweep(&s, &dot(1e15)).is_err());
        s.lo = 0.01;
        s.points = 1;
        assert!(run_sweep(&s, &dot(1e15)).is_err());
    }
}
