//! Virtual work: internal energy, the constitutive set and equilibria under
//! external control forces.
//!
//! A controlled state `(q, f)` belongs to the constitutive set when
//! `⟨f, δq⟩ = DU(q, δq)` for every `δq`, i.e. when `∂U/∂q(q) = f`.

use crate::affine::{dot, AffineSpace, Covector, Point, Vector};
use crate::calculus::{ScalarField, Slot};
use crate::error::{Error, Result};
use crate::linalg::norm_inf;
use crate::newton::Newton;
use crate::scalar::Real;

/// A system described by an internal energy `U: Q → ℝ`.
#[derive(Clone, Debug)]
pub struct StaticSystem<T> {
    energy: ScalarField<T>,
    space: AffineSpace,
}

/// A state together with the external force holding it.
#[derive(Clone, Debug, PartialEq)]
pub struct ControlledState<T> {
    pub q: Point<T>,
    pub f: Covector<T>,
}

impl<T: Real> StaticSystem<T> {
    /// The energy must ignore the velocity and time slots.
    pub fn new(energy: ScalarField<T>) -> Result<Self> {
        if energy.uses_velocity() || !energy.is_autonomous() {
            return Err(Error::InvalidArgument("internal energy must depend on the configuration only".into()));
        }
        let space = AffineSpace::new(energy.dim())?;
        Ok(StaticSystem { energy, space })
    }

    pub fn space(&self) -> AffineSpace {
        self.space
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn energy(&self) -> &ScalarField<T> {
        &self.energy
    }

    fn zeros(&self) -> Vec<T> {
        vec![T::zero(); self.dim()]
    }

    pub fn energy_at(&self, q: &Point<T>) -> Result<T> {
        self.energy.value_at(q.as_slice(), &self.zeros(), T::zero())
    }

    /// `∂U/∂q` as a covector.
    pub fn gradient(&self, q: &Point<T>) -> Result<Covector<T>> {
        self.gradient_at(q.as_slice()).map(Covector::from)
    }

    fn gradient_at(&self, q: &[T]) -> Result<Vec<T>> {
        self.energy.partial_at(q, &self.zeros(), T::zero(), Slot::Position)
    }
}

/// `DU(q, δq)`.
pub fn du<T: Real>(sys: &StaticSystem<T>, q: &Point<T>, dq: &Vector<T>) -> Result<T> {
    Error::check_dim(sys.dim(), dq.dim())?;
    Ok(dot(&sys.gradient_at(q.as_slice())?, dq.as_slice()))
}

/// `‖∂U/∂q(q) − f‖∞`; zero exactly on the constitutive set.
pub fn constitutive_residual<T: Real>(sys: &StaticSystem<T>, q: &Point<T>, f: &Covector<T>) -> Result<T> {
    Error::check_dim(sys.dim(), f.dim())?;
    let g = sys.gradient(q)?;
    Ok((&g - f).norm_inf())
}

pub fn constitutive_member<T: Real>(sys: &StaticSystem<T>, q: &Point<T>, f: &Covector<T>, tol: T) -> Result<bool> {
    Ok(constitutive_residual(sys, q, f)? <= tol)
}

/// Finds `q` with `(q, f)` in the constitutive set by residual Newton with
/// backtracking. Any stationary point of `U − ⟨f, ·⟩` qualifies, not only
/// minima.
pub fn solve_equilibrium<T: Real>(
    sys: &StaticSystem<T>,
    f: &Covector<T>,
    q_init: &Point<T>,
    tol: T,
    max_iter: usize,
) -> Result<Point<T>> {
    Error::check_dim(sys.dim(), f.dim())?;
    Error::check_dim(sys.dim(), q_init.dim())?;
    let zeros = sys.zeros();
    let residual = |q: &[T]| -> Result<Vec<T>> {
        let g = sys.gradient_at(q)?;
        let r: Vec<T> = g.iter().zip(f.iter()).map(|(&a, &b)| a - b).collect();
        if norm_inf(&r).is_finite() {
            Ok(r)
        } else {
            Err(Error::NonFinite("equilibrium residual"))
        }
    };
    let jacobian = |q: &[T]| sys.energy.jacobian_of_partial(q, &zeros, T::zero(), Slot::Position, Slot::Position);
    Newton { what: "equilibrium solve", tol, max_iter, residual: &residual, jacobian: &jacobian }
        .solve(q_init.as_slice().to_vec())
        .map(Point::from)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::affine::Metric;
    use crate::calculus::ExpressionField;
    use crate::systems::{make_static_oscillator, HarmonicParams};
    use std::collections::HashMap;

    fn example1(k: f64, g: Metric<f64>, q0: Point<f64>) -> StaticSystem<f64> {
        make_static_oscillator(&HarmonicParams::new(1.0, k, g, q0).unwrap())
    }

    #[test]
    fn du_examples() {
        let sys = example1(1.0, Metric::identity(3), Point::zeros(3));
        let q = Point::from([1.0, 0.0, 0.0]);
        assert_eq!(du(&sys, &q, &Vector::from([1.0, 0.0, 0.0])).unwrap(), 1.0);
        assert_eq!(du(&sys, &q, &Vector::zeros(3)).unwrap(), 0.0);
        let sys2 = example1(2.0, Metric::identity(3), Point::from([1.0, 0.0, 0.0]));
        let v = du(&sys2, &Point::from([2.0, 0.0, 0.0]), &Vector::from([0.0, 1.0, 0.0])).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn residual_and_membership_examples() {
        let sys = example1(1.0, Metric::identity(3), Point::zeros(3));
        let q = Point::from([1.0, 0.0, 0.0]);
        let f = Covector::from([1.0, 0.0, 0.0]);
        assert_eq!(constitutive_residual(&sys, &q, &f).unwrap(), 0.0);
        assert!(constitutive_member(&sys, &q, &f, 1e-9).unwrap());
        assert_eq!(constitutive_residual(&sys, &Point::zeros(3), &Covector::zeros(3)).unwrap(), 0.0);
        assert!(constitutive_member(&sys, &Point::zeros(3), &Covector::zeros(3), 1e-9).unwrap());
        let sys3 = example1(3.0, Metric::identity(3), Point::zeros(3));
        let r = constitutive_residual(&sys3, &Point::from([1.0, 1.0, 0.0]), &Covector::zeros(3)).unwrap();
        assert_eq!(r, 3.0);
        assert!(!constitutive_member(&sys3, &Point::from([1.0, 1.0, 0.0]), &Covector::zeros(3), 1e-9).unwrap());
    }

    #[test]
    fn equilibrium_examples() {
        let sys = example1(2.0, Metric::identity(3), Point::zeros(3));
        let q = solve_equilibrium(&sys, &Covector::from([2.0, 0.0, 0.0]), &Point::from([5.0, -1.0, 3.0]), 1e-12, 50)
            .unwrap();
        assert!((&q - &Point::from([1.0, 0.0, 0.0])).norm_inf() < 1e-12);

        let q = solve_equilibrium(&sys, &Covector::zeros(3), &Point::from([0.3, 0.2, 0.1]), 1e-12, 50).unwrap();
        assert!(q.norm_inf() < 1e-12);

        let sys = example1(1.0, Metric::diagonal(&[2.0, 1.0]).unwrap(), Point::from([1.0, 1.0]));
        let q = solve_equilibrium(&sys, &Covector::from([2.0, 1.0]), &Point::zeros(2), 1e-12, 50).unwrap();
        assert!((&q - &Point::from([2.0, 2.0])).norm_inf() < 1e-12);
    }

    #[test]
    fn nonquadratic_equilibrium_and_failures() {
        // U = q^4/4 - q: gradient q^3 - 1, equilibrium under f = 0 at q = 1.
        let e = ExpressionField::<f64>::parse("0.25*q[0]^4 - q[0]", 1, HashMap::new()).unwrap();
        let sys = StaticSystem::new(ScalarField::new(e)).unwrap();
        let q = solve_equilibrium(&sys, &Covector::zeros(1), &Point::from([3.0]), 1e-12, 100).unwrap();
        assert!((q[0] - 1.0).abs() < 1e-12);
        // zero Hessian at the start
        let err = solve_equilibrium(&sys, &Covector::zeros(1), &Point::from([0.0]), 1e-12, 100).unwrap_err();
        assert!(err.is_singular());
        let err = solve_equilibrium(&sys, &Covector::zeros(1), &Point::from([3.0]), 1e-12, 1).unwrap_err();
        assert!(err.is_nonconvergence());
    }

    #[test]
    fn velocity_dependent_energy_rejected() {
        let e = ExpressionField::<f64>::parse("qdot[0]^2", 1, HashMap::new()).unwrap();
        assert!(StaticSystem::new(ScalarField::new(e)).is_err());
    }
}
