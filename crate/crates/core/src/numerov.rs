//! Numerov shooting solver for the radial equation with any CMpH potential.
//!
//! The equation is integrated on a uniform grid in `x`, with
//! `r = r_s ln(1 + eˣ)` (logarithmic near the origin, linear far out) and
//! `φ = (dr/dx)^(1/2) u`. The Liouville transform gives
//!
//! ```text
//! u'' = [r'² (a₁r² + b₁r − c₁/r + (l′² − 1)/(4r²) − ε) + ¾(r''/r')² − ½ r'''/r'] u
//! ```
//!
//! which keeps the origin behaviour `u ~ r^(l′/2)` smooth. Levels are bracketed
//! by counting sign changes of the outward solution (the count equals the
//! number of Dirichlet levels on `[r_min, r_max]` below the trial energy) and
//! refined by Ridders' method on the outward/inward matching function.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::aeim::AnalyticSolution;
use crate::error::{Error, Result};
use crate::num::{format_sig, Real};
use crate::units::{PotentialParams, ScaledParams};
use crate::wavefunction::RadialFunction;

/// Fewest grid steps accepted.
pub const MIN_STEPS: usize = 200;

/// Grid and tolerance settings for [`numerov_solve`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct ShootingConfig<T: Real> {
    /// Inner radius; `None` means `10⁻⁶ (ℏ²/2ma)^(1/4)`.
    pub r_min: Option<T>,
    /// Outer radius; `None` places it where the WKB tail has decayed by `e⁻⁴⁰`.
    pub r_max: Option<T>,
    pub steps: usize,
    /// Relative energy tolerance of the root search.
    pub e_tol: T,
}

impl<T: Real> Default for ShootingConfig<T> {
    fn default() -> Self {
        Self {
            r_min: None,
            r_max: None,
            steps: 20_000,
            e_tol: T::tol_floor(1e-10),
        }
    }
}

impl<T: Real> ShootingConfig<T> {
    pub fn with_steps(steps: usize) -> Self {
        Self {
            steps,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if self.steps < MIN_STEPS {
            return Err(Error::Domain(format!(
                "need at least {MIN_STEPS} steps, got {}",
                self.steps
            )));
        }
        if let (Some(lo), Some(hi)) = (self.r_min, self.r_max) {
            if !(lo < hi) {
                return Err(Error::Domain(format!(
                    "r_min = {lo} must be below r_max = {hi}"
                )));
            }
        }
        if self.r_min.is_some_and(|r| !(r > T::zero())) {
            return Err(Error::Domain("r_min must be positive".into()));
        }
        if !(self.e_tol > T::zero()) {
            return Err(Error::Domain("e_tol must be positive".into()));
        }
        Ok(())
    }
}

/// One numerically converged level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct NumericLevel<T: Real> {
    /// Energy on the configured grid.
    pub energy: T,
    /// Same level on the grid with twice as many steps.
    pub energy_fine: T,
    /// Richardson estimate of the discretization error of `energy`.
    pub error_estimate: T,
    /// `error_estimate < 10⁻⁸ |energy|`.
    pub certified: bool,
    /// Sign changes of the converged wave function.
    pub nodes: usize,
    /// `(r, φ)` with `∫φ²dr = 1` and `φ > 0` near the origin.
    pub grid: Vec<(T, T)>,
    /// Energy brackets visited by the search on the configured grid.
    pub convergence: Vec<(T, T)>,
    pub r_min: T,
    pub r_max: T,
}

impl<T: Real> NumericLevel<T> {
    /// `(16 E_2N − E_N)/15`.
    pub fn extrapolated(&self) -> T {
        (T::lit(16.0) * self.energy_fine - self.energy) / T::lit(15.0)
    }

    /// Writes `r,phi` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["r", "phi"])?;
        for &(r, phi) in &self.grid {
            w.write_record([format_sig(r), format_sig(phi)])?;
        }
        w.flush()
    }
}

/// Analytic against numeric level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct CompareReport<T: Real> {
    pub analytic_energy: T,
    pub numeric_energy: T,
    /// `|E_numeric − E_analytic| / |E_analytic|`.
    pub relative_deviation: T,
    /// `(∫(φ_analytic − φ_numeric)² dr)^(1/2)` after normalization and sign alignment.
    pub l2_distance: T,
    pub analytic_nodes: usize,
    pub numeric_nodes: usize,
    pub certified: bool,
}

struct Grid<T> {
    h: T,
    steps: usize,
    r: Vec<T>,
    /// `dr/dx`.
    rp: Vec<T>,
    /// Energy-independent part of the coefficient of `u`.
    base: Vec<T>,
    /// `r'²`, the coefficient of `−ε`.
    rp2: Vec<T>,
    delta: T,
    start_slope: T,
}

/// Inverse of `y = ln(1 + eˣ)` for `y > 0`.
fn softplus_inverse<T: Real>(y: T) -> T {
    y + (-(-y).exp_m1()).ln()
}

impl<T: Real> Grid<T> {
    fn new(s: &ScaledParams<T>, lp: T, r_s: T, r_min: T, r_max: T, steps: usize) -> Self {
        let x0 = softplus_inverse(r_min / r_s);
        let h = (softplus_inverse(r_max / r_s) - x0) / T::from_usize_lossy(steps);
        let one = T::one();
        let centr = T::lit(0.25) * (lp * lp - one);
        let mut r = Vec::with_capacity(steps + 1);
        let mut rp = Vec::with_capacity(steps + 1);
        let mut base = Vec::with_capacity(steps + 1);
        let mut rp2 = Vec::with_capacity(steps + 1);
        for i in 0..=steps {
            let x = x0 + h * T::from_usize_lossy(i);
            let y = if x > T::zero() {
                x + (-x).exp().ln_1p()
            } else {
                x.exp().ln_1p()
            };
            let sigma = one / (one + (-x).exp());
            let ri = r_s * y;
            let d1 = r_s * sigma;
            // r''/r' = 1 − σ and r'''/r' = (1 − σ)(1 − 2σ)
            let q = one - sigma;
            let schwarz = T::lit(0.75) * q * q - T::lit(0.5) * q * (one - sigma - sigma);
            let w = s.a1 * ri * ri + s.b1 * ri - s.c1 / ri + centr / (ri * ri);
            r.push(ri);
            rp.push(d1);
            base.push(d1 * d1 * w + schwarz);
            rp2.push(d1 * d1);
        }
        Self {
            h,
            steps,
            r,
            rp,
            base,
            rp2,
            delta: T::lit(0.5) * (one + lp),
            start_slope: -s.c1 / (one + lp),
        }
    }

    fn g(&self, i: usize, eps: T) -> T {
        self.base[i] - eps * self.rp2[i]
    }

    /// `r^δ (1 − c₁r/(1 + l′))` over `(r')^(1/2)`, relative to the first point.
    fn start(&self, i: usize) -> T {
        let ratio = self.r[i] / self.r[0];
        ratio.powf(self.delta) * (T::one() + self.start_slope * self.r[i])
            / (self.rp[i] / self.rp[0]).sqrt()
    }

    /// Outermost index of the classically allowed region.
    fn turning_index(&self, eps: T) -> usize {
        let mut m = self.steps / 2;
        for i in (1..self.steps).rev() {
            if self.g(i, eps) < T::zero() {
                m = i;
                break;
            }
        }
        m.clamp(2, self.steps - 2)
    }

    fn limit() -> T {
        T::max_value().sqrt().sqrt()
    }

    /// Outward integration from `r_min`. Returns the number of sign changes
    /// and, when `keep` is set, every value up to `stop`.
    fn outward(&self, eps: T, stop: usize, keep: bool) -> (usize, Vec<T>) {
        let h2 = self.h * self.h / T::lit(12.0);
        let one = T::one();
        let mut store = Vec::with_capacity(if keep { stop + 1 } else { 0 });
        let mut prev = self.start(0);
        let mut cur = self.start(1);
        if keep {
            store.push(prev);
            store.push(cur);
        }
        let mut nodes = usize::from(prev * cur < T::zero());
        let mut f_prev = one - h2 * self.g(0, eps);
        let mut f_cur = one - h2 * self.g(1, eps);
        for i in 1..stop {
            let f_next = one - h2 * self.g(i + 1, eps);
            let next = ((T::lit(12.0) - T::lit(10.0) * f_cur) * cur - f_prev * prev) / f_next;
            if next * cur < T::zero() || (cur == T::zero() && next * prev < T::zero()) {
                nodes += 1;
            }
            prev = cur;
            cur = next;
            f_prev = f_cur;
            f_cur = f_next;
            if keep {
                store.push(cur);
            }
            if cur.abs() > Self::limit() {
                let scale = one / cur.abs();
                prev = prev * scale;
                cur = cur * scale;
                if keep {
                    store.iter_mut().for_each(|v| *v = *v * scale);
                }
            }
        }
        (nodes, store)
    }

    /// Inward integration from `u(r_max) = 0` down to index `stop`,
    /// returned in ascending index order.
    fn inward(&self, eps: T, stop: usize) -> Vec<T> {
        let h2 = self.h * self.h / T::lit(12.0);
        let one = T::one();
        let n = self.steps;
        let mut store = vec![T::zero(); n + 1 - stop];
        let off = |i: usize| i - stop;
        store[off(n - 1)] = T::min_positive_value().sqrt();
        let mut f_next = one - h2 * self.g(n, eps);
        let mut f_cur = one - h2 * self.g(n - 1, eps);
        for i in (stop + 1..n).rev() {
            let f_prev = one - h2 * self.g(i - 1, eps);
            let cur = store[off(i)];
            let next = store[off(i + 1)];
            let prev = ((T::lit(12.0) - T::lit(10.0) * f_cur) * cur - f_next * next) / f_prev;
            store[off(i - 1)] = prev;
            f_next = f_cur;
            f_cur = f_prev;
            if prev.abs() > Self::limit() {
                let scale = one / prev.abs();
                store.iter_mut().for_each(|v| *v = *v * scale);
            }
        }
        store
    }

    fn count(&self, eps: T) -> usize {
        self.outward(eps, self.steps, false).0
    }

    /// Mismatch of `(u(m+1) − u(m−1))/u(m)` between the two sides.
    fn matching(&self, eps: T, m: usize) -> T {
        let (_, out) = self.outward(eps, m + 1, true);
        let inn = self.inward(eps, m - 1);
        let d_out = (out[m + 1] - out[m - 1]) / out[m];
        let d_in = (inn[2] - inn[0]) / inn[1];
        d_out - d_in
    }

    /// Normalized `(r, φ)` at energy `eps`.
    fn wavefunction(&self, eps: T) -> Vec<(T, T)> {
        let m = self.turning_index(eps);
        let (_, mut u) = self.outward(eps, m, true);
        let inn = self.inward(eps, m);
        let scale = u[m] / inn[0];
        u.extend(inn[1..].iter().map(|&v| v * scale));
        // ∫φ² dr = ∫ r'² u² dx, trapezoid in x
        let w: Vec<T> = u.iter().zip(&self.rp2).map(|(&u, &d)| d * u * u).collect();
        let total = self.h * (w.iter().copied().sum::<T>() - T::lit(0.5) * (w[0] + w[self.steps]));
        let mut norm = T::one() / total.sqrt();
        if u.iter()
            .find(|v| **v != T::zero())
            .is_some_and(|v| *v < T::zero())
        {
            norm = -norm;
        }
        u.iter()
            .zip(self.r.iter().zip(&self.rp))
            .map(|(&u, (&r, &d))| (r, norm * d.sqrt() * u))
            .collect()
    }
}

/// Outer radius from the turning point at `eps_ref` plus a WKB decay of 40.
fn auto_r_max<T: Real>(s: &ScaledParams<T>, lp: T, eps_ref: T) -> T {
    let centr = T::lit(0.25) * (lp * lp - T::one());
    let w = |r: T| s.a1 * r * r + s.b1 * r - s.c1 / r + centr / (r * r) - eps_ref;
    let length = s.a1.powf(T::lit(-0.25));
    let mut r = length;
    while w(r) < T::zero() || w(r * T::lit(1.01)) < w(r) {
        r = r * T::lit(1.1);
    }
    let mut decay = T::zero();
    let dr = length * T::lit(0.01);
    let mut steps = 0usize;
    while decay < T::lit(40.0) && steps < 1_000_000 {
        decay = decay + w(r).max(T::zero()).sqrt() * dr;
        r = r + dr;
        steps += 1;
    }
    r
}

struct Search<T> {
    eps: T,
    brackets: Vec<(T, T)>,
}

fn find_level<T: Real>(grid: &Grid<T>, n: usize, lo: T, seed_hi: T, e_tol: T) -> Result<Search<T>> {
    let mut lo = lo;
    if grid.count(lo) > n {
        return Err(Error::BracketFailure(format!(
            "{} nodes already at the lower energy bound {lo}",
            grid.count(lo)
        )));
    }
    let mut hi = seed_hi.max(lo + T::one());
    let mut tries = 0;
    while grid.count(hi) <= n {
        hi = lo + (hi - lo) * T::lit(2.0);
        tries += 1;
        if tries > 60 || !hi.is_finite() {
            return Err(Error::BracketFailure(format!(
                "no level with {n} nodes below {hi}"
            )));
        }
    }
    let mut brackets = vec![(lo, hi)];
    let scale = |lo: T, hi: T| lo.abs().max(hi.abs()).max(T::min_positive_value());
    let coarse = T::lit(1e-6).max(e_tol);
    while hi - lo > coarse * scale(lo, hi) {
        let mid = T::lit(0.5) * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if grid.count(mid) <= n {
            lo = mid;
        } else {
            hi = mid;
        }
        brackets.push((lo, hi));
    }
    if let Some(eps) = ridders(grid, lo, hi, e_tol, &mut brackets) {
        return Ok(Search { eps, brackets });
    }
    log::debug!("matching function does not bracket; finishing by node bisection");
    for _ in 0..200 {
        if hi - lo <= e_tol * scale(lo, hi) {
            break;
        }
        let mid = T::lit(0.5) * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if grid.count(mid) <= n {
            lo = mid;
        } else {
            hi = mid;
        }
        brackets.push((lo, hi));
    }
    Ok(Search {
        eps: T::lit(0.5) * (lo + hi),
        brackets,
    })
}

fn ridders<T: Real>(
    grid: &Grid<T>,
    lo: T,
    hi: T,
    e_tol: T,
    brackets: &mut Vec<(T, T)>,
) -> Option<T> {
    let m = grid.turning_index(T::lit(0.5) * (lo + hi));
    let f = |e: T| grid.matching(e, m);
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (f(a), f(b));
    if !(fa.is_finite() && fb.is_finite()) || fa * fb > T::zero() {
        return None;
    }
    let mut last = a;
    for _ in 0..100 {
        let c = T::lit(0.5) * (a + b);
        let fc = f(c);
        let s = (fc * fc - fa * fb).sqrt();
        if !(s > T::zero()) {
            return Some(c);
        }
        let sign = if fa >= fb { T::one() } else { -T::one() };
        let x = c + (c - a) * sign * fc / s;
        let fx = f(x);
        if !fx.is_finite() {
            return None;
        }
        if fc * fx < T::zero() {
            (a, fa, b, fb) = (c, fc, x, fx);
        } else if fa * fx < T::zero() {
            (b, fb) = (x, fx);
        } else {
            (a, fa) = (x, fx);
        }
        if a > b {
            std::mem::swap(&mut a, &mut b);
            std::mem::swap(&mut fa, &mut fb);
        }
        brackets.push((a, b));
        let tol = e_tol * x.abs().max(T::min_positive_value());
        if fx == T::zero() || (x - last).abs() <= tol || b - a <= tol {
            return Some(x);
        }
        last = x;
    }
    None
}

/// The `(n+1)`-th lowest level of partial wave `l` for `params`, whose `c`
/// need not satisfy any constraint.
pub fn numerov_solve<T: Real>(
    params: &PotentialParams<T>,
    l: usize,
    n: usize,
    cfg: &ShootingConfig<T>,
) -> Result<NumericLevel<T>> {
    cfg.validate()?;
    let lp = params.lprime(l)?;
    if lp < T::lit(0.05) {
        log::warn!("l′ = {lp} is close to zero; the origin behaviour is marginal");
    }
    let s = params.scale(T::zero());
    let alpha = s.a1.sqrt();
    let delta = T::lit(0.5) * (T::one() + lp);
    let c_plus = s.c1.max(T::zero());
    // hydrogen-like bound for the Coulomb plus effective centrifugal part
    let eps_lo = -c_plus * c_plus / (T::lit(4.0) * delta * delta) - alpha;
    // dropping −c₁/r and completing the square on b₁r gives an upper estimate
    let level = T::lit(2.0) * T::from_usize_lossy(n) + T::one() + lp;
    let eps_hi = (T::lit(2.0) * s.a1).sqrt() * level
        + s.b1 * s.b1 / (T::lit(4.0) * s.a1)
        + s.c1.min(T::zero()).abs() * alpha.sqrt()
        + alpha;
    let length = s.a1.powf(T::lit(-0.25));
    let r_min = cfg.r_min.unwrap_or(length * T::lit(1e-6));
    let r_max = cfg.r_max.unwrap_or_else(|| auto_r_max(&s, lp, eps_hi));
    if !(r_min < r_max) {
        return Err(Error::Domain(format!(
            "r_min = {r_min} must be below r_max = {r_max}"
        )));
    }

    let coarse = Grid::new(&s, lp, length, r_min, r_max, cfg.steps);
    let found = find_level(&coarse, n, eps_lo, eps_hi, cfg.e_tol)?;
    let fine = Grid::new(&s, lp, length, r_min, r_max, cfg.steps * 2);
    let found_fine = find_level(&fine, n, eps_lo, eps_hi, cfg.e_tol)?;

    let k = params.scale_factor();
    let energy = found.eps / k;
    let energy_fine = found_fine.eps / k;
    let error_estimate = (energy - energy_fine).abs() * T::lit(16.0) / T::lit(15.0);
    let certified = error_estimate < T::lit(1e-8) * energy.abs().max(T::min_positive_value());
    if !certified {
        log::warn!("Numerov level n = {n}, l = {l}: discretization error {error_estimate:e} exceeds 1e-8 relative");
    }
    let grid = coarse.wavefunction(found.eps);
    let nodes = grid
        .windows(2)
        .filter(|w| {
            (w[0].1 > T::zero() && w[1].1 < T::zero()) || (w[0].1 < T::zero() && w[1].1 > T::zero())
        })
        .count();
    if nodes != n {
        return Err(Error::NoConvergence(format!(
            "converged wave function has {nodes} nodes, expected {n}"
        )));
    }
    let convergence = found
        .brackets
        .iter()
        .map(|&(a, b)| (a / k, b / k))
        .collect();
    Ok(NumericLevel {
        energy,
        energy_fine,
        error_estimate,
        certified,
        nodes,
        grid,
        convergence,
        r_min,
        r_max,
    })
}

/// Solves the constrained potential of `sol` numerically and compares.
///
/// The numeric level is selected by the number of positive nodes of the
/// analytic wave function, which equals `n` unless some nodes of the
/// polynomial lie on the negative axis.
pub fn compare<T: Real>(
    sol: &AnalyticSolution<T>,
    cfg: &ShootingConfig<T>,
) -> Result<CompareReport<T>> {
    let analytic_nodes = sol.nodes.positive_roots();
    let level = numerov_solve(&sol.params, sol.qn.l, analytic_nodes, cfg)?;
    let radial = RadialFunction::build(sol.clone())?;
    let mut sq = T::zero();
    for w in level.grid.windows(2) {
        let (r0, p0) = w[0];
        let (r1, p1) = w[1];
        let d0 = radial.phi(r0) - p0;
        let d1 = radial.phi(r1) - p1;
        sq = sq + T::lit(0.5) * (d0 * d0 + d1 * d1) * (r1 - r0);
    }
    Ok(CompareReport {
        analytic_energy: sol.energy,
        numeric_energy: level.energy,
        relative_deviation: (level.energy - sol.energy).abs()
            / sol.energy.abs().max(T::min_positive_value()),
        l2_distance: sq.sqrt(),
        analytic_nodes,
        numeric_nodes: level.nodes,
        certified: level.certified,
    })
}
