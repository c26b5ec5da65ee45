//! Adaptive composite Gauss–Legendre quadrature (5-point panels).

use num_traits::Float;
use thiserror::Error;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Default absolute tolerance for time integrals.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Maximum bisection depth of a panel.
pub const MAX_DEPTH: usize = 48;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuadratureError {
    #[error("invalid interval [{t0}, {t1}]")]
    InvalidInterval { t0: f64, t1: f64 },
    #[error("tolerance not reached on [{a}, {b}] at depth {depth} (error estimate {error:e})")]
    MaxDepth { a: f64, b: f64, depth: usize, error: f64 },
    #[error("non-finite integrand at t = {t}")]
    NonFinite { t: f64 },
}

struct Rule<T> {
    nodes: [T; 5],
    weights: [T; 5],
}

impl<T: Real> Rule<T> {
    fn new() -> Self {
        let s = |x: f64| T::lit(x);
        let r = Float::sqrt(s(10.0) / s(7.0));
        let x1 = Float::sqrt(s(5.0) - s(2.0) * r) / s(3.0);
        let x2 = Float::sqrt(s(5.0) + s(2.0) * r) / s(3.0);
        let q70 = s(13.0) * Float::sqrt(s(70.0));
        let w0 = s(128.0) / s(225.0);
        let w1 = (s(322.0) + q70) / s(900.0);
        let w2 = (s(322.0) - q70) / s(900.0);
        Rule { nodes: [-x2, -x1, T::zero(), x1, x2], weights: [w2, w1, w0, w1, w2] }
    }

    /// The panel integral and the integral of `|h|` under the same rule.
    fn panel<F: FnMut(T) -> Result<T>>(&self, h: &mut F, a: T, b: T) -> Result<(T, T)> {
        let half = (b - a) * T::lit(0.5);
        let mid = (a + b) * T::lit(0.5);
        let mut acc = T::zero();
        let mut mass = T::zero();
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            let t = mid + half * *x;
            let y = h(t)?;
            if !y.is_finite() {
                return Err(QuadratureError::NonFinite { t: t.to_f64().unwrap_or(f64::NAN) }.into());
            }
            acc += *w * y;
            mass += *w * y.abs();
        }
        Ok((acc * half, mass * half))
    }
}

/// `∫_{t0}^{t1} h` to absolute tolerance `tol` for a fallible integrand.
pub fn try_integrate_time<T: Real, F>(mut h: F, t0: T, t1: T, tol: T) -> Result<T>
where
    F: FnMut(T) -> Result<T>,
{
    if !(t0 <= t1) || !t0.is_finite() || !t1.is_finite() || !(tol > T::zero()) {
        return Err(QuadratureError::InvalidInterval {
            t0: t0.to_f64().unwrap_or(f64::NAN),
            t1: t1.to_f64().unwrap_or(f64::NAN),
        }
        .into());
    }
    if t0 == t1 {
        return Ok(T::zero());
    }
    let rule = Rule::new();
    let (whole, _) = rule.panel(&mut h, t0, t1)?;
    let mut stack = vec![(t0, t1, whole, 0usize, tol)];
    let mut total = T::zero();
    let roundoff = T::epsilon() * T::lit(64.0);
    while let Some((a, b, est, depth, local_tol)) = stack.pop() {
        let m = (a + b) * T::lit(0.5);
        let (left, left_mass) = rule.panel(&mut h, a, m)?;
        let (right, right_mass) = rule.panel(&mut h, m, b)?;
        let refined = left + right;
        let err = (refined - est).abs();
        // Below the rounding noise of the integrand itself no split helps.
        if err <= local_tol || err <= roundoff * (left_mass + right_mass) {
            total += refined;
            continue;
        }
        if depth + 1 >= MAX_DEPTH || m <= a || m >= b {
            return Err(QuadratureError::MaxDepth {
                a: a.to_f64().unwrap_or(f64::NAN),
                b: b.to_f64().unwrap_or(f64::NAN),
                depth,
                error: err.to_f64().unwrap_or(f64::NAN),
            }
            .into());
        }
        let half_tol = local_tol * T::lit(0.5);
        stack.push((m, b, right, depth + 1, half_tol));
        stack.push((a, m, left, depth + 1, half_tol));
    }
    Ok(total)
}

/// `∫_{t0}^{t1} h` to absolute tolerance `tol`.
pub fn integrate_time<T: Real, F>(mut h: F, t0: T, t1: T, tol: T) -> Result<T, QuadratureError>
where
    F: FnMut(T) -> T,
{
    try_integrate_time(|t| Ok(h(t)), t0, t1, tol).map_err(|e| match e {
        Error::Quadrature(q) => q,
        other => unreachable!("infallible integrand produced {other}"),
    })
}

/// Integrates piecewise over `breaks` (sorted, covering the range), splitting
/// the tolerance in proportion to piece length.
pub fn integrate_pieces<T: Real, F>(mut h: F, breaks: &[T], tol: T) -> Result<T>
where
    F: FnMut(T) -> Result<T>,
{
    if breaks.len() < 2 {
        return Ok(T::zero());
    }
    let span = breaks[breaks.len() - 1] - breaks[0];
    let mut total = T::zero();
    for w in breaks.windows(2) {
        let share = if span > T::zero() { (w[1] - w[0]) / span } else { T::one() };
        total += try_integrate_time(&mut h, w[0], w[1], tol * share)?;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn constant_sin_and_square() {
        assert!((integrate_time(|_| 2.0, 0.0, 1.0, 1e-10).unwrap() - 2.0).abs() < 1e-15);
        assert!((integrate_time(f64::sin, 0.0, PI, 1e-10).unwrap() - 2.0).abs() < 1e-10);
        assert!((integrate_time(|t| t * t, 0.0, 1.0, 1e-12).unwrap() - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn degree_nine_is_exact_on_one_panel() {
        let mut calls = 0;
        let v = integrate_time(
            |t: f64| {
                calls += 1;
                t.powi(9) - 3.0 * t.powi(4) + 1.0
            },
            -1.0,
            2.0,
            1e-13,
        )
        .unwrap();
        let exact = (2f64.powi(10) - 1.0) / 10.0 - 3.0 * (32.0 + 1.0) / 5.0 + 3.0;
        assert!((v - exact).abs() < 1e-12, "{v} vs {exact}");
        // one panel plus its two halves
        assert_eq!(calls, 15);
    }

    #[test]
    fn kink_needs_subdivision() {
        let v = integrate_time(|t: f64| (t - 0.3).abs(), 0.0, 1.0, 1e-10).unwrap();
        assert!((v - (0.045 + 0.245)).abs() < 1e-10);
    }

    #[test]
    fn invalid_and_failing_integrals() {
        assert!(matches!(integrate_time(|t| t, 1.0, 0.0, 1e-10), Err(QuadratureError::InvalidInterval { .. })));
        assert!(matches!(
            integrate_time(|t: f64| 1.0 / t.sqrt(), 0.0, 1.0, 1e-14),
            Err(QuadratureError::MaxDepth { .. })
        ));
        assert!(matches!(integrate_time(|_| f64::NAN, 0.0, 1.0, 1e-10), Err(QuadratureError::NonFinite { .. })));
        assert_eq!(integrate_time(|t| t, 1.0, 1.0, 1e-10).unwrap(), 0.0);
    }

    #[test]
    fn pieces_sum_up() {
        let v = integrate_pieces(|t: f64| Ok(t), &[0.0, 0.25, 1.0], 1e-12).unwrap();
        assert!((v - 0.5).abs() < 1e-15);
    }
}
