//! Scalar abstraction shared by every numerical module.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating point scalar the solvers are generic over (`f32` or `f64`).
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Debug
    + Display
    + LowerExp
    + Default
    + Sum
    + Serialize
    + DeserializeOwned
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal; every literal used by the crate is finite.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("finite literal")
    }

    /// Converts an index or count.
    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("representable count")
    }

    /// Lossy conversion for diagnostics and error payloads.
    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// A convergence tolerance no tighter than a few hundred ulps.
    #[inline]
    fn tol_floor(target: f64) -> Self {
        Self::lit(target).max(Self::epsilon() * Self::lit(256.0))
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Twelve significant digits in scientific notation, as used in every CSV export.
pub fn format_sig<T: Real>(x: T) -> String {
    if x.is_finite() {
        format!("{:.11e}", x)
    } else {
        format!("{}", x)
    }
}

/// `count` points from `lo` to `hi` (both included) evenly spaced in `ln r`.
pub fn log_space<T: Real>(lo: T, hi: T, count: usize) -> Vec<T> {
    assert!(count >= 2 && lo > T::zero() && hi > lo);
    let (a, b) = (lo.ln(), hi.ln());
    let last = T::from_usize_lossy(count - 1);
    (0..count)
        .map(|i| {
            if i + 1 == count {
                hi
            } else {
                (a + (b - a) * T::from_usize_lossy(i) / last).exp()
            }
        })
        .collect()
}

/// Relative difference `|x − y| / max(|x|, |y|, floor)`.
pub fn rel_diff<T: Real>(x: T, y: T) -> T {
    let scale = x.abs().max(y.abs()).max(T::min_positive_value());
    (x - y).abs() / scale
}

/// Evaluates `Σ coeffs[k] x^k` by Horner's rule (ascending coefficients).
pub fn horner<T: Real>(coeffs: &[T], x: T) -> T {
    coeffs.iter().rev().fold(T::zero(), |acc, &c| acc * x + c)
}

/// Derivative coefficients of an ascending polynomial.
pub fn poly_derivative<T: Real>(coeffs: &[T]) -> Vec<T> {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, &c)| c * T::from_usize_lossy(k))
        .collect()
}

/// Product of two ascending polynomials.
pub fn poly_mul<T: Real>(p: &[T], q: &[T]) -> Vec<T> {
    if p.is_empty() || q.is_empty() {
        return Vec::new();
    }
    let mut out = vec![T::zero(); p.len() + q.len() - 1];
    for (i, &a) in p.iter().enumerate() {
        for (j, &b) in q.iter().enumerate() {
            out[i + j] = out[i + j] + a * b;
        }
    }
    out
}

/// Monic polynomial `Π (x − rᵢ)` in ascending order.
pub fn poly_from_roots<T: Real>(roots: &[T]) -> Vec<T> {
    roots
        .iter()
        .fold(vec![T::one()], |acc, &r| poly_mul(&acc, &[-r, T::one()]))
}

/// Solves `A x = rhs` in place by Gaussian elimination with partial pivoting.
/// Returns `None` when the matrix is numerically singular.
pub fn solve_dense<T: Real>(mut a: Vec<Vec<T>>, mut rhs: Vec<T>) -> Option<Vec<T>> {
    let n = rhs.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| {
            a[i][col]
                .abs()
                .partial_cmp(&a[j][col].abs())
                .unwrap_or(std::cmp::Ordering::Equal)
        })?;
        if a[pivot][col].abs() <= T::min_positive_value() {
            return None;
        }
        a.swap(col, pivot);
        rhs.swap(col, pivot);
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            if factor == T::zero() {
                continue;
            }
            for k in col..n {
                a[row][k] = a[row][k] - factor * a[col][k];
            }
            rhs[row] = rhs[row] - factor * rhs[col];
        }
    }
    let mut x = vec![T::zero(); n];
    for row in (0..n).rev() {
        let tail: T = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (rhs[row] - tail) / a[row][row];
    }
    Some(x)
}
