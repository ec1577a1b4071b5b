//! Exact polynomial-ansatz solutions of the reduced radial equation
//!
//! ```text
//! φ'' + [ε − a₁r² − b₁r + c₁/r + (d₁ − l(l+1))/r²] φ = 0
//! ```
//!
//! with `φ(r) = P(r) · r^δ · exp(−αr²/2 − βr)` and `P` monic of degree `n`.
//! Writing `P(r) = Σ p_j r^j` and collecting powers of `r` gives
//!
//! ```text
//! α = √a₁,  β = b₁/(2α),  δ = (1 + l′)/2,  ε = α(1 + 2δ + 2n) − β²
//! (j+1)(j+2δ) p_{j+1} + 2α(n−j+1) p_{j−1} + (c₁ − 2β(δ+j)) p_j = 0,  j = 0..n
//! ```
//!
//! The `n + 1` matching relations are linear in the coefficients, so
//! `C = c₁ − 2βδ` is an eigenvalue of a tridiagonal matrix whose off-diagonal
//! products are positive. All `n + 1` eigenvalues are real and distinct; the
//! k-th smallest gives a polynomial with k positive roots. The solver takes
//! the largest one (all `n` nodes on the positive axis), bracketed by Sturm
//! bisection and then polished by damped Newton on the full matching system.
//!
//! With `b = 0` and even `n` the middle eigenvalue `C = 0` is taken instead,
//! which is the pseudoharmonic solution with `c = 0`. For odd `n` no `c = 0`
//! solution exists and the general branch is used.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::{horner, poly_derivative, poly_from_roots, poly_mul, rel_diff, solve_dense, Real};
use crate::units::{PotentialParams, QuantumNumbers, UnitSystem};

const NEWTON_MAX_ITER: usize = 200;

/// Exponents of the ansatz factor `r^δ exp(−αr²/2 − βr)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct AnsatzExponents<T: Real> {
    /// √a₁, in 1/length².
    pub alpha: T,
    /// b₁/(2√a₁), in 1/length.
    pub beta: T,
    /// (1 + l′)/2, the regular root of the indicial equation.
    pub delta: T,
}

impl<T: Real> AnsatzExponents<T> {
    /// Exponents for orbital number `l`; also returns `l′`.
    pub fn from_params(params: &PotentialParams<T>, l: usize) -> Result<(Self, T)> {
        let lp = params.lprime(l)?;
        let s = params.scale(T::zero());
        let alpha = s.a1.sqrt();
        let exps = Self {
            alpha,
            beta: s.b1 / (T::lit(2.0) * alpha),
            delta: T::lit(0.5) * (T::one() + lp),
        };
        Ok((exps, lp))
    }
}

/// The node polynomial `f_n(r) = Π (r − α_i)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct NodeSet<T: Real> {
    pub n: usize,
    /// Ascending monic coefficients `p_0 … p_n`.
    pub coefficients: Vec<T>,
    /// Elementary symmetric functions `e_1 … e_n` of the roots.
    pub elementary: Vec<T>,
    /// Real roots, ascending.
    pub roots: Vec<T>,
    /// Complex roots as `(re, im)` with `im > 0`; each stands for a conjugate pair.
    pub complex_roots: Vec<(T, T)>,
}

impl<T: Real> NodeSet<T> {
    pub fn empty() -> Self {
        Self {
            n: 0,
            coefficients: vec![T::one()],
            elementary: Vec::new(),
            roots: Vec::new(),
            complex_roots: Vec::new(),
        }
    }

    /// Builds the node set of a monic polynomial given by ascending coefficients.
    pub fn from_coefficients(coefficients: Vec<T>) -> Self {
        let n = coefficients.len() - 1;
        let elementary = (1..=n)
            .map(|k| {
                let p = coefficients[n - k];
                if k % 2 == 0 {
                    p
                } else {
                    -p
                }
            })
            .collect();
        let (roots, complex_roots) = polynomial_roots(&coefficients);
        Self {
            n,
            coefficients,
            elementary,
            roots,
            complex_roots,
        }
    }

    pub fn has_complex_roots(&self) -> bool {
        !self.complex_roots.is_empty()
    }

    pub fn positive_roots(&self) -> usize {
        self.roots.iter().filter(|&&r| r > T::zero()).count()
    }

    /// `f_n(r)`, in product form when every root is known so that values
    /// next to a node keep full relative precision.
    pub fn eval(&self, r: T) -> T {
        if self.roots.len() + 2 * self.complex_roots.len() != self.n {
            return horner(&self.coefficients, r);
        }
        let real = self.roots.iter().fold(T::one(), |acc, &x| acc * (r - x));
        self.complex_roots
            .iter()
            .fold(real, |acc, &(re, im)| acc * ((r - re) * (r - re) + im * im))
    }

    /// Monic coefficients rebuilt from the stored roots.
    pub fn coefficients_from_roots(&self) -> Vec<T> {
        let mut p = poly_from_roots(&self.roots);
        for &(re, im) in &self.complex_roots {
            p = poly_mul(&p, &[re * re + im * im, -(re + re), T::one()]);
        }
        p
    }
}

/// Which root of the inverse `b(c)` relation for `n = 1` to take.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Branch {
    /// Inverse of the `n = 1` constraint used by [`constrain_c`]; the node is positive.
    #[default]
    PositiveNode,
    /// The other root; the ansatz node lies on the negative axis.
    NegativeNode,
}

/// Residuals of the coefficient-matching relations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct Diagnostics<T: Real> {
    /// Largest relative residual over every relation below.
    pub max_relative: T,
    /// Relative residual of the relation for each power `r^j`, `j = 0..n`.
    pub matching: Vec<T>,
    /// α² = a₁, 2αβ = b₁, δ(δ−1) = l(l+1) − d₁.
    pub exponents: [T; 3],
    /// ε = α(1 + 2δ + 2n) − β².
    pub energy: T,
    pub complex_roots: bool,
}

impl<T: Real> Diagnostics<T> {
    pub fn is_valid(&self, tol: T) -> bool {
        self.max_relative <= tol
    }
}

/// A fully populated exact level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct AnalyticSolution<T: Real> {
    pub qn: QuantumNumbers,
    /// Potential with the constrained `c`.
    pub params: PotentialParams<T>,
    pub lprime: T,
    pub exponents: AnsatzExponents<T>,
    pub nodes: NodeSet<T>,
    pub energy: T,
    pub diagnostics: Diagnostics<T>,
    pub newton_iterations: usize,
}

impl<T: Real> AnalyticSolution<T> {
    /// Same solution with `c` overridden; nodes and energy are kept, so the
    /// diagnostics expose the broken constraint.
    pub fn with_forced_c(&self, c: T) -> Self {
        let mut out = self.clone();
        out.params.c = c;
        out.diagnostics = validate_constraint(&out);
        out
    }
}

/// `E_nl = √(ℏ²a/2m)(2 + 2n + l′) − b²/(4a)`.
pub fn energy_closed_form<T: Real>(qn: QuantumNumbers, params: &PotentialParams<T>) -> Result<T> {
    let lp = params.lprime(qn.l)?;
    let level = T::lit(2.0) + T::from_usize_lossy(2 * qn.n) + lp;
    Ok(params.half_quantum() * level - params.b * params.b / (T::lit(4.0) * params.a))
}

/// Ground-state energy written through `c`: `√(ℏ²a/2m)(2 + l′) − 2mc²/(ℏ²(1 + l′)²)`.
/// Coincides with [`energy_closed_form`] at `n = 0` when `c` obeys the constraint.
pub fn ground_energy_from_c<T: Real>(l: usize, params: &PotentialParams<T>) -> Result<T> {
    let lp = params.lprime(l)?;
    let one_lp = T::one() + lp;
    Ok(params.half_quantum() * (T::lit(2.0) + lp)
        - params.scale_factor() * params.c * params.c / (one_lp * one_lp))
}

struct Matched<T> {
    c1: T,
    coefficients: Vec<T>,
    iterations: usize,
}

/// Residual of relation `j` and its normwise scale.
fn relation<T: Real>(j: usize, n: usize, e: &AnsatzExponents<T>, c1: T, p: &[T]) -> (T, T) {
    let two = T::lit(2.0);
    let jt = T::from_usize_lossy(j);
    let up = if j < n {
        (jt + T::one()) * (jt + two * e.delta) * p[j + 1]
    } else {
        T::zero()
    };
    let down = if j > 0 {
        two * e.alpha * T::from_usize_lossy(n + 1 - j) * p[j - 1]
    } else {
        T::zero()
    };
    let diag_b = two * e.beta * (e.delta + jt);
    let value = up + down + (c1 - diag_b) * p[j];
    // normwise: row magnitude times the largest coefficient
    let row = (jt + T::one()) * (jt + two * e.delta)
        + two * e.alpha * T::from_usize_lossy(n + 1 - j)
        + c1.abs()
        + diag_b.abs();
    let pmax = p.iter().fold(T::zero(), |m, &x| m.max(x.abs()));
    (value, row * pmax)
}

fn relative<T: Real>(value: T, scale: T) -> T {
    if scale > T::zero() {
        value.abs() / scale
    } else {
        value.abs()
    }
}

/// Number of eigenvalues of the symmetric tridiagonal (diag, off²) below `x`.
fn sturm_count<T: Real>(diag: &[T], off2: &[T], x: T) -> usize {
    let tiny = T::min_positive_value().sqrt();
    let mut count = 0;
    let mut q = T::one();
    for (j, &d) in diag.iter().enumerate() {
        q = if j == 0 {
            d - x
        } else {
            d - x - off2[j - 1] / q
        };
        if q == T::zero() {
            q = -tiny;
        }
        if q < T::zero() {
            count += 1;
        }
    }
    count
}

/// k-th smallest eigenvalue (0-based) by Sturm bisection.
fn tridiagonal_eigenvalue<T: Real>(diag: &[T], off2: &[T], k: usize) -> T {
    let m = diag.len();
    let off = |j: usize| if j < m - 1 { off2[j].sqrt() } else { T::zero() };
    let mut lo = T::infinity();
    let mut hi = T::neg_infinity();
    for j in 0..m {
        let radius = off(j) + if j > 0 { off(j - 1) } else { T::zero() };
        lo = lo.min(diag[j] - radius);
        hi = hi.max(diag[j] + radius);
    }
    let pad = (hi - lo).abs().max(T::one()) * T::lit(1e-3);
    lo = lo - pad;
    hi = hi + pad;
    for _ in 0..300 {
        let mid = T::lit(0.5) * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sturm_count(diag, off2, mid) > k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    T::lit(0.5) * (lo + hi)
}

/// Back-substitutes the monic coefficients from the top relation down,
/// leaving the `j = 0` relation as the consistency condition.
fn back_substitute<T: Real>(n: usize, e: &AnsatzExponents<T>, c1: T) -> Vec<T> {
    let two = T::lit(2.0);
    let mut p = vec![T::zero(); n + 1];
    p[n] = T::one();
    for j in (1..=n).rev() {
        let jt = T::from_usize_lossy(j);
        let up = if j < n {
            (jt + T::one()) * (jt + two * e.delta) * p[j + 1]
        } else {
            T::zero()
        };
        let diag = (c1 - two * e.beta * (e.delta + jt)) * p[j];
        p[j - 1] = -(up + diag) / (two * e.alpha * T::from_usize_lossy(n + 1 - j));
    }
    p
}

fn max_relative_residual<T: Real>(n: usize, e: &AnsatzExponents<T>, c1: T, p: &[T]) -> T {
    (0..=n)
        .map(|j| {
            let (v, s) = relation(j, n, e, c1, p);
            relative(v, s)
        })
        .fold(T::zero(), T::max)
}

/// Damped Newton on `(c₁, p_0 … p_{n−1})`.
fn newton_polish<T: Real>(
    n: usize,
    e: &AnsatzExponents<T>,
    c1: T,
    p: Vec<T>,
) -> Result<Matched<T>> {
    let tol = T::tol_floor(1e-12);
    let two = T::lit(2.0);
    let mut c1 = c1;
    let mut p = p;
    let mut res = max_relative_residual(n, e, c1, &p);
    let mut iterations = 0;
    while res > tol {
        if iterations >= NEWTON_MAX_ITER {
            return Err(Error::NoConvergence(format!(
                "coefficient matching for n = {n} stalled at relative residual {res:e}"
            )));
        }
        iterations += 1;
        // unknown 0 is c₁, unknown k+1 is p_k
        let mut jac = vec![vec![T::zero(); n + 1]; n + 1];
        let mut rhs = vec![T::zero(); n + 1];
        for j in 0..=n {
            let (v, _) = relation(j, n, e, c1, &p);
            rhs[j] = -v;
            jac[j][0] = p[j];
            let jt = T::from_usize_lossy(j);
            if j < n {
                jac[j][j + 1] = c1 - two * e.beta * (e.delta + jt);
            }
            if j + 1 < n {
                jac[j][j + 2] = (jt + T::one()) * (jt + two * e.delta);
            }
            if j > 0 {
                jac[j][j] = two * e.alpha * T::from_usize_lossy(n + 1 - j);
            }
        }
        let step = solve_dense(jac, rhs).ok_or_else(|| {
            Error::NoConvergence(format!("singular matching Jacobian for n = {n}"))
        })?;
        let mut lambda = T::one();
        loop {
            let trial_c1 = c1 + lambda * step[0];
            let trial: Vec<T> = (0..=n)
                .map(|k| {
                    if k < n {
                        p[k] + lambda * step[k + 1]
                    } else {
                        T::one()
                    }
                })
                .collect();
            let trial_res = max_relative_residual(n, e, trial_c1, &trial);
            if trial_res < res || lambda < T::lit(1e-6) {
                c1 = trial_c1;
                p = trial;
                res = trial_res;
                break;
            }
            lambda = lambda * T::lit(0.5);
        }
        if !res.is_finite() {
            return Err(Error::NoConvergence(format!(
                "matching residual diverged for n = {n}"
            )));
        }
    }
    Ok(Matched {
        c1,
        coefficients: p,
        iterations,
    })
}

fn match_coefficients<T: Real>(n: usize, e: &AnsatzExponents<T>) -> Result<Matched<T>> {
    let two = T::lit(2.0);
    let shift = two * e.beta * e.delta;
    if n == 0 {
        return Ok(Matched {
            c1: shift,
            coefficients: vec![T::one()],
            iterations: 0,
        });
    }
    if e.beta == T::zero() && n % 2 == 0 {
        let p = back_substitute(n, e, T::zero());
        return Ok(Matched {
            c1: T::zero(),
            coefficients: p,
            iterations: 0,
        });
    }
    if e.beta == T::zero() {
        log::info!("b = 0 with odd n = {n}: no c = 0 solution, using the c > 0 branch");
    }
    let diag: Vec<T> = (0..=n)
        .map(|j| two * e.beta * T::from_usize_lossy(j))
        .collect();
    let off2: Vec<T> = (0..n)
        .map(|j| {
            let jt = T::from_usize_lossy(j);
            (jt + T::one()) * (jt + two * e.delta) * two * e.alpha * T::from_usize_lossy(n - j)
        })
        .collect();
    let eig = tridiagonal_eigenvalue(&diag, &off2, n);
    let c1 = eig + shift;
    let p = back_substitute(n, e, c1);
    newton_polish(n, e, c1, p)
}

/// Coulomb strength `c` that makes the ansatz exact for level `(n, l)` with
/// all `n` nodes on the positive axis (`c = 0` when `b = 0` and `n` is even).
pub fn constrain_c<T: Real>(
    n: usize,
    l: usize,
    a: T,
    b: T,
    d: T,
    mass: T,
    units: UnitSystem<T>,
) -> Result<T> {
    let params = PotentialParams::new(a, b, T::zero(), d, mass, units)?;
    let (exps, _) = AnsatzExponents::from_params(&params, l)?;
    let matched = match_coefficients(n, &exps)?;
    Ok(matched.c1 / params.scale_factor())
}

/// Linear coefficient `b` giving the `n = 1` constraint for a prescribed `c > 0`.
///
/// [`Branch::PositiveNode`] inverts [`constrain_c`] at `n = 1`; the result may
/// be negative when `c` is smaller than its `b = 0` value.
pub fn constrain_b_from_c<T: Real>(
    l: usize,
    a: T,
    c: T,
    d: T,
    mass: T,
    units: UnitSystem<T>,
    branch: Branch,
) -> Result<T> {
    if !(c > T::zero()) {
        return Err(Error::Domain(format!("b(c) needs c > 0, got {c}")));
    }
    let params = PotentialParams::new(a, T::zero(), c, d, mass, units)?;
    let lp = params.lprime(l)?;
    let s = params.scale(T::zero());
    let alpha = s.a1.sqrt();
    let one = T::one();
    let (l1, l2, l3) = (one + lp, T::lit(2.0) + lp, T::lit(3.0) + lp);
    let x = T::lit(2.0) * alpha * l1 / (s.c1 * s.c1);
    let k = l1 * l3 / (l2 * l2);
    let inner = one + k * (x - one);
    if inner < T::zero() {
        return Err(Error::Domain(format!(
            "b(c) radicand is negative ({inner}) for c = {c}"
        )));
    }
    let root = inner.sqrt();
    let bracket = match branch {
        Branch::PositiveNode => one - root,
        Branch::NegativeNode => one + root,
    };
    let beta = s.c1 * l2 / (l1 * l3) * bracket;
    Ok(T::lit(2.0) * alpha * beta / params.scale_factor())
}

/// Node set for level `n` of a potential that already carries its constrained `c`.
pub fn solve_nodes<T: Real>(n: usize, l: usize, params: &PotentialParams<T>) -> Result<NodeSet<T>> {
    if n == 0 {
        return Ok(NodeSet::empty());
    }
    let (exps, _) = AnsatzExponents::from_params(params, l)?;
    let c1 = params.scale(T::zero()).c1;
    let nodes = NodeSet::from_coefficients(back_substitute(n, &exps, c1));
    if nodes.has_complex_roots() {
        log::warn!("node polynomial for n = {n}, l = {l} has complex roots");
    }
    Ok(nodes)
}

/// Every matching relation evaluated on the stored potential and node roots.
pub fn validate_constraint<T: Real>(sol: &AnalyticSolution<T>) -> Diagnostics<T> {
    let n = sol.qn.n;
    let l = sol.qn.l;
    let params = &sol.params;
    let s = params.scale(sol.energy);
    let lp = params.lprime(l).unwrap_or(sol.lprime);
    let two = T::lit(2.0);
    let alpha = sol.exponents.alpha;
    let beta = sol.exponents.beta;
    let delta = sol.exponents.delta;
    let lt = T::from_usize_lossy(l);
    let exponents = [
        rel_diff(alpha * alpha, s.a1),
        rel_diff(two * alpha * beta, s.b1),
        relative(
            delta * (delta - T::one()) - (lt * (lt + T::one()) - s.d1),
            (delta * (delta - T::one())).abs() + lt * (lt + T::one()) + s.d1.abs(),
        )
        .max(rel_diff(delta, T::lit(0.5) * (T::one() + lp))),
    ];
    let predicted = alpha * (T::one() + two * delta + T::from_usize_lossy(2 * n)) - beta * beta;
    let energy = relative(
        s.eps - predicted,
        s.eps.abs() + alpha * (two * delta + T::one()) + beta * beta,
    );
    let p = sol.nodes.coefficients_from_roots();
    let matching: Vec<T> = if p.len() == n + 1 {
        (0..=n)
            .map(|j| {
                let (v, sc) = relation(j, n, &sol.exponents, s.c1, &p);
                relative(v, sc)
            })
            .collect()
    } else {
        vec![T::infinity(); n + 1]
    };
    let max_relative = matching
        .iter()
        .chain(exponents.iter())
        .chain(std::iter::once(&energy))
        .fold(
            T::zero(),
            |m, &x| if x.is_nan() { T::infinity() } else { m.max(x) },
        );
    Diagnostics {
        max_relative,
        matching,
        exponents,
        energy,
        complex_roots: sol.nodes.has_complex_roots(),
    }
}

/// Solves level `(n, l)`: constrained `c`, nodes, energy and diagnostics.
pub fn solve_level<T: Real>(
    qn: QuantumNumbers,
    a: T,
    b: T,
    d: T,
    mass: T,
    units: UnitSystem<T>,
) -> Result<AnalyticSolution<T>> {
    let base = PotentialParams::new(a, b, T::zero(), d, mass, units)?;
    let (exponents, lprime) = AnsatzExponents::from_params(&base, qn.l)?;
    let matched = match_coefficients(qn.n, &exponents)?;
    let params = base.with_c(matched.c1 / base.scale_factor());
    let nodes = if qn.n == 0 {
        NodeSet::empty()
    } else {
        NodeSet::from_coefficients(matched.coefficients)
    };
    if nodes.has_complex_roots() {
        log::warn!("node polynomial for {qn:?} has complex roots");
    }
    let energy = energy_closed_form(qn, &params)?;
    let mut sol = AnalyticSolution {
        qn,
        params,
        lprime,
        exponents,
        nodes,
        energy,
        diagnostics: Diagnostics {
            max_relative: T::zero(),
            matching: Vec::new(),
            exponents: [T::zero(); 3],
            energy: T::zero(),
            complex_roots: false,
        },
        newton_iterations: matched.iterations,
    };
    sol.diagnostics = validate_constraint(&sol);
    Ok(sol)
}

/// Real and complex roots of a real polynomial (ascending coefficients,
/// non-zero leading term). Complex roots are returned once, with `im > 0`.
fn polynomial_roots<T: Real>(coeffs: &[T]) -> (Vec<T>, Vec<(T, T)>) {
    let n = coeffs.len() - 1;
    let lead = coeffs[n];
    let p: Vec<T> = coeffs.iter().map(|&c| c / lead).collect();
    match n {
        0 => return (Vec::new(), Vec::new()),
        1 => return (vec![-p[0]], Vec::new()),
        2 => {
            let (b, c) = (p[1], p[0]);
            let disc = b * b - T::lit(4.0) * c;
            if disc >= T::zero() {
                let q = -T::lit(0.5) * (b + b.signum() * disc.sqrt());
                let mut roots = if q == T::zero() {
                    vec![T::zero(), T::zero()]
                } else {
                    vec![q, c / q]
                };
                roots.sort_by(|x, y| x.partial_cmp(y).unwrap());
                return (roots, Vec::new());
            }
            return (
                Vec::new(),
                vec![(-T::lit(0.5) * b, T::lit(0.5) * (-disc).sqrt())],
            );
        }
        _ => {}
    }
    let roots = aberth(&p);
    let dp = poly_derivative(&p);
    let scale = p.iter().fold(T::one(), |m, &c| m.max(c.abs()));
    let mut real = Vec::new();
    let mut complex = Vec::new();
    for z in roots {
        if z.im.abs() <= T::tol_floor(1e-9) * (T::one() + z.re.abs()) * scale.sqrt() {
            let mut x = z.re;
            for _ in 0..4 {
                let d = horner(&dp, x);
                if d == T::zero() {
                    break;
                }
                x = x - horner(&p, x) / d;
            }
            real.push(x);
        } else if z.im > T::zero() {
            complex.push((z.re, z.im));
        }
    }
    real.sort_by(|x, y| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal));
    (real, complex)
}

/// Aberth–Ehrlich simultaneous iteration for a monic polynomial.
fn aberth<T: Real>(p: &[T]) -> Vec<Complex<T>> {
    let n = p.len() - 1;
    let eval = |z: Complex<T>| -> (Complex<T>, Complex<T>) {
        let mut val = Complex::new(p[n], T::zero());
        let mut der = Complex::new(T::zero(), T::zero());
        for k in (0..n).rev() {
            der = der * z + val;
            val = val * z + Complex::new(p[k], T::zero());
        }
        (val, der)
    };
    let radius = p[..n]
        .iter()
        .enumerate()
        .map(|(k, &c)| c.abs().powf(T::one() / T::from_usize_lossy(n - k)))
        .fold(T::zero(), T::max)
        .max(T::lit(1e-3));
    let mut z: Vec<Complex<T>> = (0..n)
        .map(|k| {
            let theta = T::TAU() * T::from_usize_lossy(k) / T::from_usize_lossy(n) + T::lit(0.4);
            Complex::from_polar(radius, theta)
        })
        .collect();
    for _ in 0..500 {
        let mut biggest = T::zero();
        for k in 0..n {
            let (val, der) = eval(z[k]);
            if val.norm() == T::zero() {
                continue;
            }
            let ratio = val / der;
            let repulsion: Complex<T> = (0..n)
                .filter(|&j| j != k)
                .map(|j| Complex::new(T::one(), T::zero()) / (z[k] - z[j]))
                .fold(Complex::new(T::zero(), T::zero()), |acc, x| acc + x);
            let step = ratio / (Complex::new(T::one(), T::zero()) - ratio * repulsion);
            z[k] = z[k] - step;
            biggest = biggest.max(step.norm() / (T::one() + z[k].norm()));
        }
        if biggest <= T::epsilon() * T::lit(4.0) {
            break;
        }
    }
    z
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn nat() -> UnitSystem<f64> {
        UnitSystem::natural()
    }

    fn table1(n: usize, l: usize) -> AnalyticSolution<f64> {
        solve_level(QuantumNumbers::new(n, l), 1.0 / 32.0, 1.0, 0.0, 1.0, nat()).unwrap()
    }

    #[test]
    fn table_one_energies() {
        for (l, c, e) in [
            (0usize, 4.0f64, -7.625f64),
            (1, 8.0, -7.375),
            (2, 12.0, -7.125),
        ] {
            let p = PotentialParams::natural(1.0 / 32.0, 1.0, c, 0.0).unwrap();
            assert!((energy_closed_form(QuantumNumbers::new(0, l), &p).unwrap() - e).abs() < 1e-12);
            let sol = table1(0, l);
            assert!((sol.params.c - c).abs() < 1e-12);
            assert!((sol.energy - e).abs() < 1e-12);
            assert!(sol.nodes.roots.is_empty());
            assert!(sol.diagnostics.max_relative < 1e-12);
        }
    }

    #[test]
    fn harmonic_ground_state() {
        // a = mω²/2 with ω = 2 ⇒ E = 3ω/2
        let p = PotentialParams::natural(2.0, 0.0, 0.0, 0.0).unwrap();
        assert_relative_eq!(
            energy_closed_form(QuantumNumbers::new(0, 0), &p).unwrap(),
            3.0,
            max_relative = 1e-15
        );
    }

    #[test]
    fn n1_closed_forms() {
        let sol = table1(1, 0);
        // c from the n = 1 constraint: β(2 + l′) + √(β² + 2α(1 + l′)) over 2m/ℏ², with α = 1/4, β = 4
        let expected_c = (4.0 * 3.0 + (16.0f64 + 1.0).sqrt()) / 2.0;
        assert_relative_eq!(sol.params.c, expected_c, max_relative = 1e-13);
        assert!((sol.params.c - 8.0616).abs() < 1e-4);
        assert_relative_eq!(
            sol.nodes.roots[0],
            -8.0 + 68f64.sqrt(),
            max_relative = 1e-12
        );
        let x = sol.nodes.roots[0];
        assert!((0.25 * x * x + 4.0 * x - 1.0).abs() < 1e-12);
        assert_relative_eq!(sol.energy, -7.375, max_relative = 1e-14);
        assert!(sol.diagnostics.max_relative < 1e-10);
    }

    #[test]
    fn n0_energy_identity() {
        for l in 0..4 {
            for &d in &[0.0, 0.03] {
                let sol = solve_level(QuantumNumbers::new(0, l), 0.2, 0.7, d, 1.0, nat()).unwrap();
                let via_c = ground_energy_from_c(l, &sol.params).unwrap();
                assert_relative_eq!(via_c, sol.energy, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn c_from_n0_constraint() {
        let c = constrain_c(0, 2, 1.0 / 32.0, 1.0, 0.0, 1.0, nat()).unwrap();
        assert!((c - 12.0).abs() < 1e-12);
        assert_eq!(constrain_c(0, 0, 1.0, 0.0, 0.0, 1.0, nat()).unwrap(), 0.0);
        assert_eq!(constrain_c(2, 1, 1.0, 0.0, 0.01, 1.0, nat()).unwrap(), 0.0);
    }

    #[test]
    fn b_zero_odd_n_uses_positive_c() {
        let c = constrain_c(1, 0, 0.5, 0.0, 0.0, 1.0, nat()).unwrap();
        // √(2α(1+l′))/(2m/ℏ²) with α = 1, l′ = 1
        assert_relative_eq!(c, 1.0, max_relative = 1e-13);
    }

    #[test]
    fn pho_even_level() {
        let sol = solve_level(QuantumNumbers::new(2, 1), 0.5, 0.0, 0.0, 1.0, nat()).unwrap();
        assert_eq!(sol.params.c, 0.0);
        assert_relative_eq!(sol.energy, 4.5, max_relative = 1e-15);
        assert_eq!(sol.exponents.beta, 0.0);
        // even polynomial r² − 5/2: one positive, one negative root
        assert_eq!(sol.nodes.positive_roots(), 1);
        assert_relative_eq!(sol.nodes.roots[1], 2.5f64.sqrt(), max_relative = 1e-13);
        assert!(sol.diagnostics.max_relative < 1e-12);
    }

    #[test]
    fn b_from_c_round_trip() {
        let c = constrain_c(1, 0, 1.0 / 32.0, 1.0, 0.0, 1.0, nat()).unwrap();
        let b =
            constrain_b_from_c(0, 1.0 / 32.0, c, 0.0, 1.0, nat(), Branch::PositiveNode).unwrap();
        assert_relative_eq!(b, 1.0, max_relative = 1e-12);
        let c1 = constrain_c(1, 1, 1.0 / 32.0, 1.0, 0.0, 1.0, nat()).unwrap();
        let b1 =
            constrain_b_from_c(1, 1.0 / 32.0, c1, 0.0, 1.0, nat(), Branch::PositiveNode).unwrap();
        assert_relative_eq!(b1, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn b_from_c_large_c_limit() {
        // K = 1 − 1/(2 + l′)² < 1, so the radicand stays above 1 − K; c → ∞ approaches it
        let (a, l) = (1.0 / 32.0, 0usize);
        let c = 1e6; // X → 0, radicand → 1 − K
        let b = constrain_b_from_c(l, a, c, 0.0, 1.0, nat(), Branch::NegativeNode).unwrap();
        let b2 = constrain_b_from_c(l, a, c, 0.0, 1.0, nat(), Branch::PositiveNode).unwrap();
        let alpha: f64 = 0.25;
        let base = 2.0 * alpha * 3.0 * c / (2.0 * 4.0);
        let root = (1.0f64 - 8.0 / 9.0).sqrt();
        assert_relative_eq!(b, base * (1.0 + root), max_relative = 1e-9);
        assert_relative_eq!(b2, base * (1.0 - root), max_relative = 1e-9);
    }

    #[test]
    fn negative_node_branch_inverts_other_root() {
        let (a, l, b) = (1.0 / 32.0, 0usize, 1.0);
        // c₁ = β(2 + l′) − √(β² + 2α(1 + l′)) in scaled units, α = 1/4, β = 4
        let c = (4.0 * 3.0 - 17f64.sqrt()) / 2.0;
        let back = constrain_b_from_c(l, a, c, 0.0, 1.0, nat(), Branch::NegativeNode).unwrap();
        assert_relative_eq!(back, b, max_relative = 1e-12);
    }

    #[test]
    fn b_from_c_rejects_non_positive_c() {
        assert!(constrain_b_from_c(0, 1.0, 0.0, 0.0, 1.0, nat(), Branch::PositiveNode).is_err());
    }

    #[test]
    fn perturbed_c_is_detected() {
        let sol = table1(1, 0);
        let bad = sol.with_forced_c(sol.params.c * 1.01);
        assert!(bad.diagnostics.max_relative > 1e-3);
        let sol0 = table1(0, 0).with_forced_c(4.04);
        assert!(sol0.diagnostics.max_relative > 1e-3);
    }

    #[test]
    fn solve_nodes_reproduces_level_nodes() {
        for n in 0..5 {
            let sol = table1(n, 1);
            let nodes = solve_nodes(n, 1, &sol.params).unwrap();
            assert_eq!(nodes.roots.len(), n);
            for (x, y) in nodes.roots.iter().zip(&sol.nodes.roots) {
                assert_relative_eq!(*x, *y, max_relative = 1e-9);
            }
        }
    }

    #[test]
    fn all_nodes_positive_and_real() {
        for n in 0..7 {
            for l in 0..3 {
                let sol = table1(n, l);
                assert_eq!(sol.nodes.positive_roots(), n, "n = {n}, l = {l}");
                assert!(!sol.diagnostics.complex_roots);
                assert!(
                    sol.diagnostics.max_relative < 1e-10,
                    "{:?}",
                    sol.diagnostics
                );
            }
        }
    }

    #[test]
    fn aberth_finds_mixed_roots() {
        // (x − 1)(x − 2)(x² + 1)
        let p: Vec<f64> = poly_mul(&poly_from_roots(&[1.0, 2.0]), &[1.0, 0.0, 1.0]);
        let (real, complex) = polynomial_roots(&p);
        assert_eq!(real.len(), 2);
        assert_relative_eq!(real[0], 1.0, max_relative = 1e-12);
        assert_relative_eq!(real[1], 2.0, max_relative = 1e-12);
        assert_eq!(complex.len(), 1);
        assert!(complex[0].0.abs() < 1e-12 && (complex[0].1 - 1.0).abs() < 1e-12);
        let set = NodeSet::from_coefficients(p.clone());
        assert!(set.has_complex_roots());
        for (x, y) in set.coefficients_from_roots().iter().zip(&p) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn over_bound_d_is_domain_error() {
        let err = solve_level(QuantumNumbers::new(0, 0), 1.0, 1.0, 0.2, 1.0, nat()).unwrap_err();
        assert!(matches!(err, Error::Domain(_)));
    }

    #[test]
    fn single_precision_solver() {
        let sol = solve_level(
            QuantumNumbers::new(1, 0),
            1.0f32 / 32.0,
            1.0,
            0.0,
            1.0,
            UnitSystem::natural(),
        )
        .unwrap();
        assert!((sol.energy + 7.375).abs() < 1e-5);
        assert!((sol.params.c - 8.061_553).abs() < 1e-4);
        assert!((sol.nodes.roots[0] - 0.246_211_24).abs() < 1e-5);
    }

    proptest! {
        #[test]
        fn level_spacing_is_two_half_quanta(a in 0.01f64..2.0, b in 0.0f64..3.0, l in 0usize..3, n in 0usize..4) {
            let p = PotentialParams::natural(a, b, 0.0, 0.0).unwrap();
            let lo = energy_closed_form(QuantumNumbers::new(n, l), &p).unwrap();
            let hi = energy_closed_form(QuantumNumbers::new(n + 1, l), &p).unwrap();
            prop_assert!((hi - lo - 2.0 * p.half_quantum()).abs() <= 1e-12 * (1.0 + lo.abs()));
        }

        #[test]
        fn n1_node_positive(a in 0.01f64..2.0, b in 0.0f64..3.0, l in 0usize..3, frac in 0.0f64..0.9) {
            let units = nat();
            let bound = PotentialParams::natural(a, b, 0.0, 0.0).unwrap().d_bound(l);
            let sol = solve_level(QuantumNumbers::new(1, l), a, b, frac * bound, 1.0, units).unwrap();
            prop_assert!(sol.nodes.roots[0] > 0.0);
            prop_assert!(sol.diagnostics.max_relative < 1e-10);
        }

        #[test]
        fn pho_reduction(a in 0.01f64..2.0, l in 0usize..3, n in 0usize..4, frac in 0.0f64..0.9) {
            let base = PotentialParams::natural(a, 0.0, 0.0, 0.0).unwrap();
            let p = PotentialParams { d: frac * base.d_bound(l), ..base };
            let lp = p.lprime(l).unwrap();
            let pho = (a / 2.0).sqrt() * (2.0 + 2.0 * n as f64 + lp);
            prop_assert_eq!(energy_closed_form(QuantumNumbers::new(n, l), &p).unwrap(), pho);
        }
    }
}
