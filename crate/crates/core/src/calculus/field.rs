//! Scalar fields `κ: Q × V × ℝ → ℝ` and their partial derivatives.

use std::fmt::Debug;
use std::sync::Arc;

use num_traits::Float;
use thiserror::Error;

use crate::affine::{dot, Covector, Point, Vector};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::{lift, seed, Dual, Real, Scalar};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("non-finite result")]
    NonFinite,
}

/// A field written once against [`Scalar`], so it can be evaluated on reals
/// and on (nested) dual numbers alike.
pub trait Evaluate<T: Real>: Send + Sync + Debug {
    fn dim(&self) -> usize;

    fn uses_velocity(&self) -> bool {
        true
    }

    fn uses_time(&self) -> bool {
        false
    }

    fn eval<S: Scalar<T>>(&self, q: &[S], qdot: &[S], t: S) -> Result<S, EvalError>;

    /// Closed-form `(∂/∂q, ∂/∂q̇)`, when the field knows it.
    fn analytic_gradient(&self, _q: &[T], _qdot: &[T], _t: T) -> Option<(Vec<T>, Vec<T>)> {
        None
    }
}

trait FieldObject<T>: Send + Sync + Debug {
    fn dim(&self) -> usize;
    fn uses_velocity(&self) -> bool;
    fn uses_time(&self) -> bool;
    fn eval_real(&self, q: &[T], qdot: &[T], t: T) -> Result<T, EvalError>;
    fn eval_dual(&self, q: &[Dual<T>], qdot: &[Dual<T>], t: Dual<T>) -> Result<Dual<T>, EvalError>;
    fn eval_dual2(
        &self,
        q: &[Dual<Dual<T>>],
        qdot: &[Dual<Dual<T>>],
        t: Dual<Dual<T>>,
    ) -> Result<Dual<Dual<T>>, EvalError>;
    fn analytic_gradient(&self, q: &[T], qdot: &[T], t: T) -> Option<(Vec<T>, Vec<T>)>;
}

impl<T: Real, E: Evaluate<T>> FieldObject<T> for E {
    fn dim(&self) -> usize {
        Evaluate::dim(self)
    }
    fn uses_velocity(&self) -> bool {
        Evaluate::uses_velocity(self)
    }
    fn uses_time(&self) -> bool {
        Evaluate::uses_time(self)
    }
    fn eval_real(&self, q: &[T], qdot: &[T], t: T) -> Result<T, EvalError> {
        self.eval(q, qdot, t)
    }
    fn eval_dual(&self, q: &[Dual<T>], qdot: &[Dual<T>], t: Dual<T>) -> Result<Dual<T>, EvalError> {
        self.eval(q, qdot, t)
    }
    fn eval_dual2(
        &self,
        q: &[Dual<Dual<T>>],
        qdot: &[Dual<Dual<T>>],
        t: Dual<Dual<T>>,
    ) -> Result<Dual<Dual<T>>, EvalError> {
        self.eval(q, qdot, t)
    }
    fn analytic_gradient(&self, q: &[T], qdot: &[T], t: T) -> Option<(Vec<T>, Vec<T>)> {
        Evaluate::analytic_gradient(self, q, qdot, t)
    }
}

/// How first partial derivatives are computed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum GradientMode {
    /// Closed-form gradient supplied by the field.
    Analytic,
    /// Forward-mode dual numbers over the evaluator.
    #[default]
    Dual,
    /// Central differences with step `cbrt(ε)·max(1, |x|)`.
    FiniteDifference,
}

/// Argument slot of a field.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Slot {
    Position,
    Velocity,
}

#[derive(Clone, Debug)]
pub struct ScalarField<T> {
    inner: Arc<dyn FieldObject<T>>,
    mode: GradientMode,
}

impl<T: Real> ScalarField<T> {
    pub fn new<E: Evaluate<T> + 'static>(evaluator: E) -> Self {
        ScalarField { inner: Arc::new(evaluator), mode: GradientMode::Dual }
    }

    /// Switches the gradient channel. Analytic mode is only available for
    /// fields that provide a closed-form gradient.
    pub fn with_mode(mut self, mode: GradientMode) -> Result<Self> {
        if mode == GradientMode::Analytic {
            let n = self.dim();
            let z = vec![T::zero(); n];
            if self.inner.analytic_gradient(&z, &z, T::zero()).is_none() {
                return Err(Error::InvalidArgument("field has no analytic gradient".into()));
            }
        }
        self.mode = mode;
        Ok(self)
    }

    pub fn mode(&self) -> GradientMode {
        self.mode
    }

    pub fn dim(&self) -> usize {
        self.inner.dim()
    }

    /// Time-independent fields (Lagrangians) are autonomous.
    pub fn is_autonomous(&self) -> bool {
        !self.inner.uses_time()
    }

    pub fn uses_velocity(&self) -> bool {
        self.inner.uses_velocity()
    }

    fn check(&self, q: &[T], qdot: &[T]) -> Result<()> {
        Error::check_dim(self.dim(), q.len())?;
        Error::check_dim(self.dim(), qdot.len())
    }

    pub fn value(&self, q: &Point<T>, qdot: &Vector<T>, t: T) -> Result<T> {
        self.value_at(q.as_slice(), qdot.as_slice(), t)
    }

    pub(crate) fn value_at(&self, q: &[T], qdot: &[T], t: T) -> Result<T> {
        self.check(q, qdot)?;
        let v = self.inner.eval_real(q, qdot, t)?;
        if !v.is_finite() {
            return Err(EvalError::NonFinite.into());
        }
        Ok(v)
    }

    /// Both partial gradients `(∂κ/∂q, ∂κ/∂q̇)` in the configured mode.
    pub(crate) fn gradients_at(&self, q: &[T], qdot: &[T], t: T) -> Result<(Vec<T>, Vec<T>)> {
        self.check(q, qdot)?;
        match self.mode {
            GradientMode::Analytic => self
                .inner
                .analytic_gradient(q, qdot, t)
                .ok_or_else(|| Error::InvalidArgument("field has no analytic gradient".into())),
            GradientMode::Dual => {
                Ok((self.dual_partial(q, qdot, t, Slot::Position)?, self.dual_partial(q, qdot, t, Slot::Velocity)?))
            }
            GradientMode::FiniteDifference => {
                Ok((self.fd_partial(q, qdot, t, Slot::Position)?, self.fd_partial(q, qdot, t, Slot::Velocity)?))
            }
        }
    }

    pub(crate) fn partial_at(&self, q: &[T], qdot: &[T], t: T, slot: Slot) -> Result<Vec<T>> {
        self.check(q, qdot)?;
        match self.mode {
            GradientMode::Analytic => {
                let (gq, gv) = self.gradients_at(q, qdot, t)?;
                Ok(if slot == Slot::Position { gq } else { gv })
            }
            GradientMode::Dual => self.dual_partial(q, qdot, t, slot),
            GradientMode::FiniteDifference => self.fd_partial(q, qdot, t, slot),
        }
    }

    fn dual_partial(&self, q: &[T], qdot: &[T], t: T, slot: Slot) -> Result<Vec<T>> {
        let n = q.len();
        let tt = Dual::new(t, T::zero());
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let mut dir = vec![T::zero(); n];
            dir[i] = T::one();
            let (dq, dv) = match slot {
                Slot::Position => (seed(q, &dir), lift(qdot)),
                Slot::Velocity => (lift(q), seed(qdot, &dir)),
            };
            let y = self.inner.eval_dual(&dq, &dv, tt)?;
            if !y.eps.is_finite() {
                return Err(EvalError::NonFinite.into());
            }
            out.push(y.eps);
        }
        Ok(out)
    }

    /// Finite-difference channel, always available regardless of mode.
    pub(crate) fn fd_partial(&self, q: &[T], qdot: &[T], t: T, slot: Slot) -> Result<Vec<T>> {
        let n = q.len();
        let step0 = Float::cbrt(T::epsilon());
        let mut out = Vec::with_capacity(n);
        let (mut qa, mut va) = (q.to_vec(), qdot.to_vec());
        for i in 0..n {
            let base = match slot {
                Slot::Position => q[i],
                Slot::Velocity => qdot[i],
            };
            let h = step0 * base.abs().max(T::one());
            let set = |qa: &mut Vec<T>, va: &mut Vec<T>, x: T| match slot {
                Slot::Position => qa[i] = x,
                Slot::Velocity => va[i] = x,
            };
            set(&mut qa, &mut va, base + h);
            let fp = self.inner.eval_real(&qa, &va, t)?;
            set(&mut qa, &mut va, base - h);
            let fm = self.inner.eval_real(&qa, &va, t)?;
            set(&mut qa, &mut va, base);
            // (base + h) - (base - h) is the step actually taken.
            let span = (base + h) - (base - h);
            out.push((fp - fm) / span);
        }
        Ok(out)
    }

    /// Second partials `∂²κ/∂a_i∂b_j` by nested dual numbers.
    pub(crate) fn second_partials_at(&self, q: &[T], qdot: &[T], t: T, a: Slot, b: Slot) -> Result<Matrix<T>> {
        self.check(q, qdot)?;
        let n = q.len();
        let zero = T::zero();
        let mut m = Matrix::zeros(n);
        let tt = Dual::new(Dual::new(t, zero), Dual::new(zero, zero));
        for i in 0..n {
            for j in 0..n {
                let build = |vals: &[T], slot: Slot| -> Vec<Dual<Dual<T>>> {
                    vals.iter()
                        .enumerate()
                        .map(|(k, &x)| {
                            let inner = if b == slot && k == j { T::one() } else { zero };
                            let outer = if a == slot && k == i { T::one() } else { zero };
                            Dual::new(Dual::new(x, inner), Dual::new(outer, zero))
                        })
                        .collect()
                };
                let y = self.inner.eval_dual2(&build(q, Slot::Position), &build(qdot, Slot::Velocity), tt)?;
                if !y.eps.eps.is_finite() {
                    return Err(EvalError::NonFinite.into());
                }
                m[(i, j)] = y.eps.eps;
            }
        }
        Ok(m)
    }

    /// Jacobian of `∂κ/∂b` with respect to `a`: entry `(i, j)` is `∂²κ/∂b_i∂a_j`.
    pub(crate) fn jacobian_of_partial(&self, q: &[T], qdot: &[T], t: T, partial: Slot, wrt: Slot) -> Result<Matrix<T>> {
        self.second_partials_at(q, qdot, t, partial, wrt)
    }

    /// Directional derivative along `(dq, dqdot)` in a single dual sweep.
    pub(crate) fn directional_dual_at(&self, q: &[T], qdot: &[T], t: T, dq: &[T], dv: &[T]) -> Result<T> {
        self.check(q, qdot)?;
        let y = self.inner.eval_dual(&seed(q, dq), &seed(qdot, dv), Dual::new(t, T::zero()))?;
        Ok(y.eps)
    }
}

/// `∂κ/∂q` at `(q, q̇, t)`.
pub fn partial_q<T: Real>(fld: &ScalarField<T>, q: &Point<T>, qdot: &Vector<T>, t: T) -> Result<Covector<T>> {
    fld.partial_at(q.as_slice(), qdot.as_slice(), t, Slot::Position).map(Covector::from)
}

/// `∂κ/∂q̇` at `(q, q̇, t)`.
pub fn partial_qdot<T: Real>(fld: &ScalarField<T>, q: &Point<T>, qdot: &Vector<T>, t: T) -> Result<Covector<T>> {
    fld.partial_at(q.as_slice(), qdot.as_slice(), t, Slot::Velocity).map(Covector::from)
}

/// Total directional derivative `⟨∂κ/∂q, δq⟩ + ⟨∂κ/∂q̇, δq̇⟩`.
pub fn directional<T: Real>(
    fld: &ScalarField<T>,
    q: &Point<T>,
    qdot: &Vector<T>,
    t: T,
    dq: &Vector<T>,
    dqdot: &Vector<T>,
) -> Result<T> {
    Error::check_dim(fld.dim(), dq.dim())?;
    Error::check_dim(fld.dim(), dqdot.dim())?;
    let (gq, gv) = fld.gradients_at(q.as_slice(), qdot.as_slice(), t)?;
    Ok(dot(&gq, dq.as_slice()) + dot(&gv, dqdot.as_slice()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Debug)]
    struct Product;

    impl Evaluate<f64> for Product {
        fn dim(&self) -> usize {
            2
        }
        fn uses_velocity(&self) -> bool {
            false
        }
        fn eval<S: Scalar<f64>>(&self, q: &[S], _qdot: &[S], _t: S) -> Result<S, EvalError> {
            Ok(q[0] * q[1])
        }
    }

    #[test]
    fn product_gradient_all_channels() {
        let f = ScalarField::new(Product);
        let q = Point::from([2.0, 3.0]);
        let v = Vector::zeros(2);
        let g = partial_q(&f, &q, &v, 0.0).unwrap();
        assert_eq!(g, Covector::from([3.0, 2.0]));
        let fd = f.clone().with_mode(GradientMode::FiniteDifference).unwrap();
        let g2 = partial_q(&fd, &q, &v, 0.0).unwrap();
        assert!((&g2 - &g).norm_inf() < 1e-9);
        assert_eq!(partial_qdot(&f, &q, &v, 0.0).unwrap(), Covector::zeros(2));
        assert!(f.clone().with_mode(GradientMode::Analytic).is_err());
    }

    #[test]
    fn mixed_second_partials() {
        let f = ScalarField::new(Product);
        let h = f.second_partials_at(&[2.0, 3.0], &[0.0, 0.0], 0.0, Slot::Position, Slot::Position).unwrap();
        assert_eq!(h.as_slice(), &[0.0, 1.0, 1.0, 0.0]);
    }

    #[test]
    fn wrong_dimension_is_reported() {
        let f = ScalarField::new(Product);
        let err = f.value(&Point::from([1.0]), &Vector::from([1.0]), 0.0).unwrap_err();
        assert_eq!(err, Error::DimensionMismatch { expected: 2, found: 1 });
    }
}
