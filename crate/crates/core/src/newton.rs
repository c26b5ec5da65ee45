//! Damped Newton iteration shared by the equilibrium and Legendre solvers.

use crate::error::{Error, Result};
use crate::linalg::{norm_inf, Matrix};
use crate::scalar::Real;

/// Step halvings tried before a Newton step is declared non-descending.
pub const MAX_HALVINGS: usize = 40;

pub(crate) struct Newton<'a, T> {
    pub what: &'static str,
    pub tol: T,
    pub max_iter: usize,
    pub residual: &'a dyn Fn(&[T]) -> Result<Vec<T>>,
    pub jacobian: &'a dyn Fn(&[T]) -> Result<Matrix<T>>,
}

impl<T: Real> Newton<'_, T> {
    /// Solves `residual(x) = 0` from `x0`, requiring the ∞-norm of the
    /// residual to decrease at every accepted step.
    pub fn solve(&self, x0: Vec<T>) -> Result<Vec<T>> {
        let mut x = x0;
        let mut r = (self.residual)(&x)?;
        let mut rn = norm_inf(&r);
        for _ in 0..self.max_iter {
            if rn <= self.tol {
                return Ok(x);
            }
            let lu = (self.jacobian)(&x)?
                .lu()
                .ok_or(Error::SingularJacobian { what: self.what, residual: rn.to_f64().unwrap_or(f64::NAN) })?;
            let step = lu.solve(&r);
            let mut alpha = T::one();
            let mut accepted = false;
            for _ in 0..=MAX_HALVINGS {
                let trial: Vec<T> = x.iter().zip(&step).map(|(&xi, &si)| xi - alpha * si).collect();
                if let Ok(rt) = (self.residual)(&trial) {
                    let tn = norm_inf(&rt);
                    if tn < rn {
                        x = trial;
                        r = rt;
                        rn = tn;
                        accepted = true;
                        break;
                    }
                }
                alpha *= T::lit(0.5);
            }
            if !accepted {
                break;
            }
        }
        if rn <= self.tol {
            return Ok(x);
        }
        Err(Error::NoConvergence {
            what: self.what,
            iterations: self.max_iter,
            residual: rn.to_f64().unwrap_or(f64::NAN),
        })
    }
}
