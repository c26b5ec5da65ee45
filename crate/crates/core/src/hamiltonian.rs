//! Energy function, Legendre map and its inverse, hyperregularity probes, the
//! Hamiltonian and the Hamiltonian form of the pointwise dynamics.

use num_traits::Float;

use crate::affine::{dot, Covector, Point, Vector};
use crate::calculus::ScalarField;
use crate::distributions::PhasePoint;
use crate::dynamics::{LagrangianSystem, PhaseTrajectory};
use crate::error::{Error, Result};
use crate::linalg::{condition_1, norm_inf};
use crate::newton::Newton;
use crate::scalar::Real;

/// Default ceiling on the condition number of `∂²L/∂q̇²`.
pub const DEFAULT_COND_MAX: f64 = 1e8;

/// Default iteration budget of the Legendre inversion.
pub const DEFAULT_MAX_ITER: usize = 50;

/// `E(q, p, q̇) = ⟨p, q̇⟩ − L(q, q̇)`.
pub fn energy<T: Real>(sys: &LagrangianSystem<T>, q: &Point<T>, p: &Covector<T>, qdot: &Vector<T>) -> Result<T> {
    Error::check_dim(sys.dim(), p.dim())?;
    Ok(dot(p.as_slice(), qdot.as_slice()) - sys.value(q, qdot)?)
}

/// The Legendre map `(q, q̇) ↦ ∂L/∂q̇(q, q̇)`.
pub fn legendre<T: Real>(sys: &LagrangianSystem<T>, q: &Point<T>, qdot: &Vector<T>) -> Result<Covector<T>> {
    Error::check_dim(sys.dim(), q.dim())?;
    Error::check_dim(sys.dim(), qdot.dim())?;
    sys.dl_dv(q.as_slice(), qdot.as_slice()).map(Covector::from)
}

/// `‖p − ∂L/∂q̇(q, q̇)‖∞`; zero exactly on the critical set.
pub fn critical_residual<T: Real>(
    sys: &LagrangianSystem<T>,
    q: &Point<T>,
    p: &Covector<T>,
    qdot: &Vector<T>,
) -> Result<T> {
    Error::check_dim(sys.dim(), p.dim())?;
    Ok((p - &legendre(sys, q, qdot)?).norm_inf())
}

/// Solves `∂L/∂q̇(q, v) = p` for `v` by damped Newton from `v_init`
/// (zero when `None`).
pub fn legendre_inverse<T: Real>(
    sys: &LagrangianSystem<T>,
    q: &Point<T>,
    p: &Covector<T>,
    v_init: Option<&Vector<T>>,
    tol: T,
    max_iter: usize,
) -> Result<Vector<T>> {
    let n = sys.dim();
    Error::check_dim(n, q.dim())?;
    Error::check_dim(n, p.dim())?;
    let start = match v_init {
        Some(v) => {
            Error::check_dim(n, v.dim())?;
            v.as_slice().to_vec()
        }
        None => vec![T::zero(); n],
    };
    legendre_inverse_at(sys, q.as_slice(), p.as_slice(), &start, tol, max_iter).map(Vector::from)
}

/// When the Jacobian is singular at the initial guess (as for `|q̇|⁴` at
/// `q̇ = 0`) the iteration starts from the guess shifted by one in every
/// component instead.
pub(crate) fn legendre_inverse_at<T: Real>(
    sys: &LagrangianSystem<T>,
    q: &[T],
    p: &[T],
    v_init: &[T],
    tol: T,
    max_iter: usize,
) -> Result<Vec<T>> {
    let residual = |v: &[T]| -> Result<Vec<T>> {
        let lam = sys.dl_dv(q, v)?;
        Ok(lam.iter().zip(p).map(|(&a, &b)| a - b).collect())
    };
    let jacobian = |v: &[T]| sys.hessian_vv(q, v);
    let mut start = v_init.to_vec();
    if norm_inf(&residual(&start)?) > tol && jacobian(&start)?.lu().is_none() {
        start.iter_mut().for_each(|x| *x += T::one());
    }
    Newton { what: "Legendre inversion", tol, max_iter, residual: &residual, jacobian: &jacobian }.solve(start)
}

/// Outcome of probing `∂²L/∂q̇²` on a sample set.
#[derive(Clone, Debug, PartialEq)]
pub struct HyperregularityReport<T> {
    pub hyperregular: bool,
    /// Largest 1-norm condition estimate seen (infinite when singular).
    pub worst_condition: T,
    /// Index of the first failing sample.
    pub witness: Option<usize>,
}

/// Factorizes `∂²L/∂q̇²` at each `(q, q̇)` sample and fails on the first that
/// is singular or has condition number above `cond_max`. A probe, not a proof
/// of global invertibility.
pub fn hyperregularity_probe<T: Real>(
    sys: &LagrangianSystem<T>,
    samples: &[(Point<T>, Vector<T>)],
    cond_max: T,
) -> Result<HyperregularityReport<T>> {
    let mut worst = T::zero();
    let mut witness = None;
    for (i, (q, v)) in samples.iter().enumerate() {
        Error::check_dim(sys.dim(), q.dim())?;
        Error::check_dim(sys.dim(), v.dim())?;
        let cond = condition_1(&sys.hessian_vv(q.as_slice(), v.as_slice())?);
        if !(cond <= worst) {
            worst = cond;
        }
        if !(cond <= cond_max) && witness.is_none() {
            witness = Some(i);
        }
    }
    Ok(HyperregularityReport { hyperregular: witness.is_none(), worst_condition: worst, witness })
}

/// `H(q, p) = E(q, p, ρ(q, p))`.
pub fn hamiltonian_value<T: Real>(sys: &LagrangianSystem<T>, q: &Point<T>, p: &Covector<T>, tol: T) -> Result<T> {
    let v = legendre_inverse(sys, q, p, None, tol, DEFAULT_MAX_ITER)?;
    energy(sys, q, p, &v)
}

#[derive(Clone, Debug)]
enum Source<T> {
    Derived {
        sys: LagrangianSystem<T>,
        tol: T,
    },
    /// The field's velocity slot carries the momentum.
    Supplied(ScalarField<T>),
}

/// A Hamiltonian `H: Q × V* → ℝ` with its partial derivatives.
#[derive(Clone, Debug)]
pub struct HamiltonianSystem<T> {
    source: Source<T>,
}

impl<T: Real> HamiltonianSystem<T> {
    /// `H = E ∘ σ`, with `ρ` solved to `tol`.
    pub fn derived(sys: LagrangianSystem<T>, tol: T) -> Self {
        HamiltonianSystem { source: Source::Derived { sys, tol } }
    }

    /// A user-supplied `H`; the field is read as `H(q, p)` with `p` in the
    /// velocity slot.
    pub fn supplied(field: ScalarField<T>) -> Result<Self> {
        if !field.is_autonomous() {
            return Err(Error::InvalidArgument("Hamiltonian must not depend on time".into()));
        }
        Ok(HamiltonianSystem { source: Source::Supplied(field) })
    }

    pub fn dim(&self) -> usize {
        match &self.source {
            Source::Derived { sys, .. } => sys.dim(),
            Source::Supplied(f) => f.dim(),
        }
    }

    pub fn is_derived(&self) -> bool {
        matches!(self.source, Source::Derived { .. })
    }

    fn check(&self, q: &Point<T>, p: &Covector<T>) -> Result<()> {
        Error::check_dim(self.dim(), q.dim())?;
        Error::check_dim(self.dim(), p.dim())
    }

    fn rho(sys: &LagrangianSystem<T>, tol: T, q: &Point<T>, p: &Covector<T>) -> Result<Vec<T>> {
        legendre_inverse_at(sys, q.as_slice(), p.as_slice(), &vec![T::zero(); sys.dim()], tol, DEFAULT_MAX_ITER)
    }

    pub fn value(&self, q: &Point<T>, p: &Covector<T>) -> Result<T> {
        self.check(q, p)?;
        match &self.source {
            Source::Derived { sys, tol } => hamiltonian_value(sys, q, p, *tol),
            Source::Supplied(f) => f.value_at(q.as_slice(), p.as_slice(), T::zero()),
        }
    }

    /// `(∂H/∂q, ∂H/∂p)`. For derived Hamiltonians these are
    /// `−∂L/∂q(q, ρ(q, p))` and `ρ(q, p)`.
    pub fn gradients(&self, q: &Point<T>, p: &Covector<T>) -> Result<(Covector<T>, Vector<T>)> {
        self.check(q, p)?;
        match &self.source {
            Source::Derived { sys, tol } => {
                let v = Self::rho(sys, *tol, q, p)?;
                let gq = sys.dl_dq(q.as_slice(), &v)?;
                Ok((Covector::from(gq.into_iter().map(|x| -x).collect::<Vec<_>>()), Vector::from(v)))
            }
            Source::Supplied(f) => {
                let (gq, gp) = f.gradients_at(q.as_slice(), p.as_slice(), T::zero())?;
                Ok((Covector::from(gq), Vector::from(gp)))
            }
        }
    }

    pub fn dh_dq(&self, q: &Point<T>, p: &Covector<T>) -> Result<Covector<T>> {
        Ok(self.gradients(q, p)?.0)
    }

    pub fn dh_dp(&self, q: &Point<T>, p: &Covector<T>) -> Result<Vector<T>> {
        Ok(self.gradients(q, p)?.1)
    }
}

/// `DH(q, p; δq, δp)` evaluated as `DE(q, p, ρ; δq, δp, Dρ(δq, δp))`, with
/// `Dρ = (∂²L/∂q̇²)⁻¹ (δp − ∂²L/∂q̇∂q δq)` and `DE` from one dual sweep of `L`.
/// Independent of the stationarity shortcut used by [`HamiltonianSystem`].
pub fn hamiltonian_directional_chain<T: Real>(
    sys: &LagrangianSystem<T>,
    q: &Point<T>,
    p: &Covector<T>,
    dq: &Vector<T>,
    dp: &Covector<T>,
    tol: T,
) -> Result<T> {
    Error::check_dim(sys.dim(), dq.dim())?;
    Error::check_dim(sys.dim(), dp.dim())?;
    let v = legendre_inverse(sys, q, p, None, tol, DEFAULT_MAX_ITER)?;
    let (qs, vs) = (q.as_slice(), v.as_slice());
    let jv = sys.hessian_vv(qs, vs)?;
    let jq = sys.hessian_vq(qs, vs)?;
    let rhs: Vec<T> = dp.iter().zip(jq.mul_vec(dq.as_slice())).map(|(&a, b)| a - b).collect();
    let lu = jv.lu().ok_or(Error::SingularJacobian { what: "Legendre derivative", residual: 0.0 })?;
    let dv = lu.solve(&rhs);
    let dl = sys.directional(qs, vs, dq.as_slice(), &dv)?;
    Ok(dot(dp.as_slice(), vs) + dot(p.as_slice(), &dv) - dl)
}

/// `(∂H/∂q + r, ∂H/∂p − q̇)`: the componentwise content of
/// `⟨r, δq⟩ − ⟨δp, q̇⟩ = −DH(q, p; δq, δp)`.
pub fn hamiltonian_residuals<T: Real>(h: &HamiltonianSystem<T>, x: &PhasePoint<T>) -> Result<(Covector<T>, Vector<T>)> {
    let (gq, gp) = h.gradients(&x.q, &x.p)?;
    Ok((&gq + &x.r, &gp - &x.qdot))
}

pub fn hamiltonian_membership<T: Real>(h: &HamiltonianSystem<T>, x: &PhasePoint<T>, tol: T) -> Result<bool> {
    let (a, b) = hamiltonian_residuals(h, x)?;
    Ok(a.norm_inf() <= tol && b.norm_inf() <= tol)
}

/// `(∂H/∂q(ξ, π) − (φ − π̇), ∂H/∂p(ξ, π) − ξ̇)` at `t`.
pub fn hamilton_residuals<T: Real>(
    h: &HamiltonianSystem<T>,
    traj: &PhaseTrajectory<T>,
    t: T,
) -> Result<(Covector<T>, Vector<T>)> {
    let (r, p) = crate::distributions::dirac_reduce(&traj.phi, &traj.pi, t)?;
    let (gq, gp) = h.gradients(&traj.xi.at(t)?, &p)?;
    Ok((&gq + &r, &gp - &traj.xi.velocity(t)?))
}

/// Largest defect of `⟨r, δq⟩ − ⟨δp, q̇⟩ + DE(q, p, v; δq, δp, δv) = 0` over
/// the `3n` basis directions, with `v = ρ(q, p)`.
pub fn generating_family_residual<T: Real>(sys: &LagrangianSystem<T>, x: &PhasePoint<T>, tol: T) -> Result<T> {
    let n = sys.dim();
    Error::check_dim(n, x.dim())?;
    let v = legendre_inverse(sys, &x.q, &x.p, None, tol, DEFAULT_MAX_ITER)?;
    let (qs, vs) = (x.q.as_slice(), v.as_slice());
    let zero = vec![T::zero(); n];
    let de = |dq: &[T], dp: &[T], dv: &[T]| -> Result<T> {
        Ok(dot(dp, vs) + dot(x.p.as_slice(), dv) - sys.directional(qs, vs, dq, dv)?)
    };
    let mut worst = T::zero();
    for i in 0..n {
        let mut e = zero.clone();
        e[i] = T::one();
        let defects = [x.r[i] + de(&e, &zero, &zero)?, -x.qdot[i] + de(&zero, &e, &zero)?, de(&zero, &zero, &e)?];
        for d in defects {
            let d = Float::abs(d);
            if !(d <= worst) {
                worst = d;
            }
        }
    }
    Ok(worst)
}

/// Membership in the set generated by the family `(E, η)`, resolving the
/// existential velocity by `v = ρ(q, p)`.
pub fn generating_family_membership<T: Real>(sys: &LagrangianSystem<T>, x: &PhasePoint<T>, tol: T) -> Result<bool> {
    Ok(generating_family_residual(sys, x, inner_tol(tol))? <= tol)
}

/// Solve tolerance used when a membership test only states the final one.
pub(crate) fn inner_tol<T: Real>(tol: T) -> T {
    (tol * T::lit(1e-3)).max(T::epsilon() * T::lit(64.0))
}
