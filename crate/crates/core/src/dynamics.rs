//! The action principle on finite intervals: action, its variation in direct
//! and integrated-by-parts form, Euler–Lagrange residuals, membership in the
//! interval dynamics, phase space trajectories and the forward solver.

use std::cell::RefCell;
use std::collections::HashMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::affine::{dot, AffineSpace, Covector, Point, Vector};
use crate::calculus::{integrate_pieces, ScalarField, Slot};
use crate::error::{Error, Result};
use crate::hamiltonian::legendre_inverse_at;
use crate::linalg::{norm_inf, Matrix};
use crate::scalar::{Real, Scalar};
use crate::trajectory::{
    fd_slopes, merged_breaks, triple_pairing, CovectorCurve, CovectorTriple, Curve, Displacement, Motion,
    PolynomialProbe,
};

/// Uniform samples used to check closed-form motions.
pub const CLOSED_FORM_SAMPLES: usize = 256;

/// Degree of the random polynomial displacements used as probes.
pub const PROBE_DEGREE: usize = 5;

/// An autonomous Lagrangian `L: Q × V → ℝ`.
#[derive(Clone, Debug)]
pub struct LagrangianSystem<T> {
    lagrangian: ScalarField<T>,
    space: AffineSpace,
}

impl<T: Real> LagrangianSystem<T> {
    pub fn new(lagrangian: ScalarField<T>) -> Result<Self> {
        if !lagrangian.is_autonomous() {
            return Err(Error::InvalidArgument("Lagrangian must not depend on time".into()));
        }
        let space = AffineSpace::new(lagrangian.dim())?;
        Ok(LagrangianSystem { lagrangian, space })
    }

    pub fn space(&self) -> AffineSpace {
        self.space
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn lagrangian(&self) -> &ScalarField<T> {
        &self.lagrangian
    }

    pub fn value(&self, q: &Point<T>, qdot: &Vector<T>) -> Result<T> {
        self.value_at(q.as_slice(), qdot.as_slice())
    }

    pub(crate) fn value_at(&self, q: &[T], v: &[T]) -> Result<T> {
        self.lagrangian.value_at(q, v, T::zero())
    }

    pub(crate) fn dl_dq(&self, q: &[T], v: &[T]) -> Result<Vec<T>> {
        self.lagrangian.partial_at(q, v, T::zero(), Slot::Position)
    }

    /// The Legendre map `∂L/∂q̇`.
    pub(crate) fn dl_dv(&self, q: &[T], v: &[T]) -> Result<Vec<T>> {
        self.lagrangian.partial_at(q, v, T::zero(), Slot::Velocity)
    }

    pub(crate) fn gradients(&self, q: &[T], v: &[T]) -> Result<(Vec<T>, Vec<T>)> {
        self.lagrangian.gradients_at(q, v, T::zero())
    }

    /// `∂²L/∂q̇²`.
    pub(crate) fn hessian_vv(&self, q: &[T], v: &[T]) -> Result<Matrix<T>> {
        self.lagrangian.jacobian_of_partial(q, v, T::zero(), Slot::Velocity, Slot::Velocity)
    }

    /// `∂²L/∂q̇∂q`: Jacobian of the Legendre map with respect to `q`.
    pub(crate) fn hessian_vq(&self, q: &[T], v: &[T]) -> Result<Matrix<T>> {
        self.lagrangian.jacobian_of_partial(q, v, T::zero(), Slot::Velocity, Slot::Position)
    }

    /// `DL(q, q̇; δq, δq̇)`.
    pub(crate) fn directional(&self, q: &[T], v: &[T], dq: &[T], dv: &[T]) -> Result<T> {
        self.lagrangian.directional_dual_at(q, v, T::zero(), dq, dv)
    }
}

/// `∂L/∂q̇` along a motion together with its time derivative.
///
/// Grid motions sample the momentum at their own nodes from the stored node
/// velocities and differentiate it with fourth-order differences and Hermite
/// interpolation. Closed-form motions use the chain rule
/// `d/dt ∂L/∂q̇ = ∂²L/∂q̇∂q·ξ̇ + ∂²L/∂q̇²·ξ̈` with `ξ̈` from a five-point
/// difference of the exact velocity.
pub struct MomentumProfile<'a, T> {
    sys: &'a LagrangianSystem<T>,
    motion: &'a Motion<T>,
    sampled: Option<Curve<T>>,
}

impl<'a, T: Real> MomentumProfile<'a, T> {
    pub fn new(sys: &'a LagrangianSystem<T>, motion: &'a Motion<T>) -> Result<Self> {
        Error::check_dim(sys.dim(), motion.dim())?;
        let sampled = match motion.curve().as_grid() {
            Some(grid) => {
                let values = grid
                    .values()
                    .iter()
                    .zip(grid.slopes())
                    .map(|(q, v)| sys.dl_dv(q, v))
                    .collect::<Result<Vec<_>>>()?;
                let slopes = fd_slopes(&values, grid.step());
                let (a, b) = motion.interval();
                let full = Curve::grid(grid.node(0), grid.node(grid.cells()), values, Some(slopes))?;
                Some(full.restrict(a, b)?)
            }
            None => None,
        };
        Ok(MomentumProfile { sys, motion, sampled })
    }

    pub fn value(&self, t: T) -> Result<Vec<T>> {
        match &self.sampled {
            Some(c) => c.value(t),
            None => {
                let c = self.motion.curve();
                self.sys.dl_dv(&c.value(t)?, &c.derivative(t)?)
            }
        }
    }

    pub fn rate(&self, t: T) -> Result<Vec<T>> {
        if let Some(c) = &self.sampled {
            return c.derivative(t);
        }
        let c = self.motion.curve();
        let (q, v) = (c.value(t)?, c.derivative(t)?);
        let acc = self.acceleration(t)?;
        let jq = self.sys.hessian_vq(&q, &v)?;
        let jv = self.sys.hessian_vv(&q, &v)?;
        Ok(jq.mul_vec(&v).iter().zip(jv.mul_vec(&acc)).map(|(&a, b)| a + b).collect())
    }

    /// Derivative at `t` of the quartic through five velocity samples
    /// spaced `h` apart. The stencil is centred on `t` in the interior and
    /// stops at the ends, so the estimate is continuous in `t` and every
    /// sample stays in range.
    fn acceleration(&self, t: T) -> Result<Vec<T>> {
        let c = self.motion.curve();
        let (t0, t1) = c.interval();
        let h = (t1 - t0) * T::lit(1e-3);
        let two = T::lit(2.0);
        let centre = t.max(t0 + two * h).min(t1 - two * h);
        let x = (t - centre) / h;
        let nodes = [-2.0, -1.0, 0.0, 1.0, 2.0].map(T::lit);
        let mut acc = vec![T::zero(); c.dim()];
        for (j, &xj) in nodes.iter().enumerate() {
            let mut denom = T::one();
            let mut slope = T::zero();
            for (l, &xl) in nodes.iter().enumerate() {
                if l == j {
                    continue;
                }
                denom *= xj - xl;
                let mut term = T::one();
                for (m, &xm) in nodes.iter().enumerate() {
                    if m != j && m != l {
                        term *= x - xm;
                    }
                }
                slope += term;
            }
            let w = slope / denom;
            let s = (centre + xj * h).max(t0).min(t1);
            for (a, v) in acc.iter_mut().zip(c.derivative(s)?) {
                *a += w * v;
            }
        }
        Ok(acc.into_iter().map(|a| a / h).collect())
    }
}

/// Times at which pointwise residuals of a motion are inspected: the motion's
/// own grid nodes, or uniform samples for closed forms.
fn inspection_times<T: Real>(m: &Motion<T>) -> Vec<T> {
    let (a, b) = m.interval();
    if m.curve().as_grid().is_some() {
        let mut ts = vec![a];
        ts.extend(m.curve().breakpoints(a, b));
        ts.push(b);
        ts
    } else {
        let n = CLOSED_FORM_SAMPLES;
        let h = (b - a) / T::count(n);
        (0..=n).map(|i| if i == n { b } else { a + h * T::count(i) }).collect()
    }
}

/// `∫ L(ξ, ξ̇)` over the motion's interval.
pub fn action<T: Real>(sys: &LagrangianSystem<T>, m: &Motion<T>, tol: T) -> Result<T> {
    Error::check_dim(sys.dim(), m.dim())?;
    let (a, b) = m.interval();
    let c = m.curve();
    integrate_pieces(|t| sys.value_at(&c.value(t)?, &c.derivative(t)?), &merged_breaks(a, b, &[c]), tol)
}

/// `DW(ξ, δξ) = ∫ ⟨∂L/∂q, δξ⟩ + ⟨∂L/∂q̇, δξ̇⟩`.
pub fn action_derivative_direct<T: Real>(
    sys: &LagrangianSystem<T>,
    m: &Motion<T>,
    d: &Displacement<T>,
    tol: T,
) -> Result<T> {
    Error::check_dim(sys.dim(), m.dim())?;
    Error::check_dim(sys.dim(), d.dim())?;
    let (a, b) = m.interval();
    d.curve().same_interval(a, b)?;
    let (mc, dc) = (m.curve(), d.curve());
    integrate_pieces(
        |t| {
            let (gq, gv) = sys.gradients(&mc.value(t)?, &mc.derivative(t)?)?;
            Ok(dot(&gq, &dc.value(t)?) + dot(&gv, &dc.derivative(t)?))
        },
        &merged_breaks(a, b, &[mc, dc]),
        tol,
    )
}

/// `DW` integrated by parts:
/// `∫ ⟨∂L/∂q − d/dt ∂L/∂q̇, δξ⟩ + ⟨∂L/∂q̇, δξ⟩(t1) − ⟨∂L/∂q̇, δξ⟩(t0)`.
pub fn action_derivative_by_parts<T: Real>(
    sys: &LagrangianSystem<T>,
    m: &Motion<T>,
    d: &Displacement<T>,
    tol: T,
) -> Result<T> {
    Error::check_dim(sys.dim(), d.dim())?;
    let (a, b) = m.interval();
    d.curve().same_interval(a, b)?;
    let profile = MomentumProfile::new(sys, m)?;
    let (mc, dc) = (m.curve(), d.curve());
    let integral = integrate_pieces(
        |t| {
            let gq = sys.dl_dq(&mc.value(t)?, &mc.derivative(t)?)?;
            let rate = profile.rate(t)?;
            let el: Vec<T> = gq.iter().zip(&rate).map(|(&x, &y)| x - y).collect();
            Ok(dot(&el, &dc.value(t)?))
        },
        &merged_breaks(a, b, &[mc, dc]),
        tol,
    )?;
    let end = dot(&profile.value(b)?, &dc.value(b)?);
    let start = dot(&profile.value(a)?, &dc.value(a)?);
    Ok(integral + end - start)
}

/// `d/dt ∂L/∂q̇ − ∂L/∂q − φ` at `t`; zero along solutions of the
/// Euler–Lagrange equations with force `φ`.
pub fn el_residual<T: Real>(
    sys: &LagrangianSystem<T>,
    m: &Motion<T>,
    phi: &CovectorCurve<T>,
    t: T,
) -> Result<Covector<T>> {
    let profile = MomentumProfile::new(sys, m)?;
    el_residual_with(sys, m, &profile, phi, t).map(Covector::from)
}

fn el_residual_with<T: Real>(
    sys: &LagrangianSystem<T>,
    m: &Motion<T>,
    profile: &MomentumProfile<'_, T>,
    phi: &CovectorCurve<T>,
    t: T,
) -> Result<Vec<T>> {
    Error::check_dim(sys.dim(), phi.dim())?;
    let c = m.curve();
    let gq = sys.dl_dq(&c.value(t)?, &c.derivative(t)?)?;
    let rate = profile.rate(t)?;
    let f = phi.curve().value(t)?;
    Ok((0..gq.len()).map(|i| rate[i] - gq[i] - f[i]).collect())
}

/// `∂L/∂q̇(ξ(t), ξ̇(t))`.
pub fn momentum<T: Real>(sys: &LagrangianSystem<T>, m: &Motion<T>, t: T) -> Result<Covector<T>> {
    Error::check_dim(sys.dim(), m.dim())?;
    let c = m.curve();
    sys.dl_dv(&c.value(t)?, &c.derivative(t)?).map(Covector::from)
}

/// The three residuals deciding membership in the interval dynamics.
#[derive(Clone, Debug, PartialEq)]
pub struct MembershipReport<T> {
    pub member: bool,
    /// Sup norm of the Euler–Lagrange residual over the inspected times.
    pub el_residual: T,
    /// Time at which the Euler–Lagrange residual peaks.
    pub el_worst_time: T,
    pub initial_momentum_residual: T,
    pub final_momentum_residual: T,
}

/// Decides whether `(ξ, (φ, p0, p1))` belongs to the interval dynamics by the
/// Euler–Lagrange equations plus the momentum-velocity relations at both ends.
pub fn dynamics_membership<T: Real>(
    sys: &LagrangianSystem<T>,
    m: &Motion<T>,
    c: &CovectorTriple<T>,
    tol: T,
) -> Result<MembershipReport<T>> {
    Error::check_dim(sys.dim(), c.dim())?;
    let (a, b) = c.interval();
    m.curve().same_interval(a, b)?;
    let profile = MomentumProfile::new(sys, m)?;
    let mut worst = T::zero();
    let mut worst_t = a;
    for t in inspection_times(m) {
        let r = norm_inf(&el_residual_with(sys, m, &profile, &c.phi, t)?);
        if !(r <= worst) {
            worst = r;
            worst_t = t;
        }
    }
    let diff = |x: Vec<T>, p: &Covector<T>| norm_inf(&x.iter().zip(p.iter()).map(|(&u, &w)| u - w).collect::<Vec<_>>());
    let r0 = diff(profile.value(a)?, &c.p0);
    let r1 = diff(profile.value(b)?, &c.p1);
    Ok(MembershipReport {
        member: worst <= tol && r0 <= tol && r1 <= tol,
        el_residual: worst,
        el_worst_time: worst_t,
        initial_momentum_residual: r0,
        final_momentum_residual: r1,
    })
}

/// Outcome of a randomized probe of the action principle.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbeReport<T> {
    pub member: bool,
    pub max_mismatch: T,
    /// The first probe whose mismatch exceeded the tolerance.
    pub witness: Option<PolynomialProbe<T>>,
}

/// Covectors multiplying a displacement and its rate in the probe integrand.
type Coefficients<T> = (Vec<T>, Vec<T>);

/// Quadrature tolerance used inside probe loops.
fn probe_quad_tol<T: Real>(tol: T) -> T {
    (tol * T::lit(1e-3)).max(T::epsilon() * T::lit(1e3))
}

/// Probes `⟨(φ, p0, p1), δξ⟩ = DW(ξ, δξ)` directly with `trials` random
/// polynomial displacements; no Euler–Lagrange residual is involved.
pub fn variational_membership<T: Real>(
    sys: &LagrangianSystem<T>,
    m: &Motion<T>,
    c: &CovectorTriple<T>,
    trials: usize,
    seed: u64,
    tol: T,
) -> Result<ProbeReport<T>> {
    Error::check_dim(sys.dim(), m.dim())?;
    Error::check_dim(sys.dim(), c.dim())?;
    let (a, b) = c.interval();
    m.curve().same_interval(a, b)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mc = m.curve();
    let phi = c.phi.curve();
    // Motion-dependent covectors are shared by every probe, so memoize them
    // per quadrature node: (−φ − ∂L/∂q, −∂L/∂q̇).
    let cache: RefCell<HashMap<u64, Coefficients<T>>> = RefCell::new(HashMap::new());
    let coefficients = |t: T| -> Result<Coefficients<T>> {
        let key = t.to_f64().unwrap_or(f64::NAN).to_bits();
        if let Some(hit) = cache.borrow().get(&key) {
            return Ok(hit.clone());
        }
        let (gq, gv) = sys.gradients(&mc.value(t)?, &mc.derivative(t)?)?;
        let f = phi.value(t)?;
        let u: Vec<T> = f.iter().zip(&gq).map(|(&x, &y)| -x - y).collect();
        let w: Vec<T> = gv.iter().map(|&x| -x).collect();
        cache.borrow_mut().insert(key, (u.clone(), w.clone()));
        Ok((u, w))
    };
    // The mismatch is linear in the probe coefficients, so integrate each
    // monomial against each component once and reuse the moments per probe.
    let n = sys.dim();
    let breaks = merged_breaks(a, b, &[mc, phi]);
    let scale = T::lit(2.0) / (b - a);
    let quad_tol = probe_quad_tol(tol) / T::count((PROBE_DEGREE + 1) * n);
    let mut moments = vec![vec![T::zero(); n]; PROBE_DEGREE + 1];
    for (k, row) in moments.iter_mut().enumerate() {
        for (i, slot) in row.iter_mut().enumerate() {
            *slot = integrate_pieces(
                |t| {
                    let (u, w) = coefficients(t)?;
                    let s = (T::lit(2.0) * t - a - b) / (b - a);
                    let rate = if k == 0 { T::zero() } else { T::count(k) * Scalar::powi(s, k as i32 - 1) * scale };
                    Ok(u[i] * Scalar::powi(s, k as i32) + w[i] * rate)
                },
                &breaks,
                quad_tol,
            )?;
        }
    }
    let mut max_mismatch = T::zero();
    let mut witness = None;
    for _ in 0..trials {
        let probe = PolynomialProbe::random(&mut rng, a, b, n, PROBE_DEGREE);
        let mut total = T::zero();
        for (k, ck) in probe.coeffs.iter().enumerate() {
            let sign = if k % 2 == 0 { T::one() } else { -T::one() };
            for i in 0..n {
                total += ck[i] * (moments[k][i] + c.p1[i] - sign * c.p0[i]);
            }
        }
        let mismatch = total.abs();
        if !(mismatch <= max_mismatch) {
            max_mismatch = mismatch;
        }
        if !(mismatch <= tol) && witness.is_none() {
            witness = Some(probe);
        }
    }
    Ok(ProbeReport { member: witness.is_none(), max_mismatch, witness })
}

/// `|⟨(φ, p0, p1), δξ⟩ − DW(ξ, δξ)|` for one displacement.
pub fn action_principle_mismatch<T: Real>(
    sys: &LagrangianSystem<T>,
    m: &Motion<T>,
    c: &CovectorTriple<T>,
    d: &Displacement<T>,
    tol: T,
) -> Result<T> {
    Ok((triple_pairing(c, d, tol)? - action_derivative_direct(sys, m, d, tol)?).abs())
}

/// A phase space trajectory `(ξ, φ, π)`.
#[derive(Clone, Debug)]
pub struct PhaseTrajectory<T> {
    pub xi: Motion<T>,
    pub phi: CovectorCurve<T>,
    pub pi: CovectorCurve<T>,
}

impl<T: Real> PhaseTrajectory<T> {
    /// Force and momentum curves are restricted to the interval of `xi`.
    pub fn new(xi: Motion<T>, phi: CovectorCurve<T>, pi: CovectorCurve<T>) -> Result<Self> {
        Error::check_dim(xi.dim(), phi.dim())?;
        Error::check_dim(xi.dim(), pi.dim())?;
        let (a, b) = xi.interval();
        let phi = phi.restrict(a, b)?;
        let pi = pi.restrict(a, b)?;
        Ok(PhaseTrajectory { xi, phi, pi })
    }

    pub fn interval(&self) -> (T, T) {
        self.xi.interval()
    }

    pub fn dim(&self) -> usize {
        self.xi.dim()
    }

    pub fn restrict(&self, a: T, b: T) -> Result<Self> {
        Ok(PhaseTrajectory { xi: self.xi.restrict(a, b)?, phi: self.phi.restrict(a, b)?, pi: self.pi.restrict(a, b)? })
    }

    /// Node times when `xi` is sampled on a grid.
    pub fn nodes(&self) -> Option<Vec<T>> {
        self.xi.curve().as_grid()?;
        Some(inspection_times(&self.xi))
    }
}

/// Integrates the first-order Lagrange equations
/// `ξ̇ = ρ(ξ, π)`, `π̇ = ∂L/∂q(ξ, ρ(ξ, π)) + φ` with classical RK4.
///
/// `ρ` is re-solved at every stage, warm-started from the previous velocity;
/// a singular Legendre map aborts the run.
pub fn solve_forward<T: Real>(
    sys: &LagrangianSystem<T>,
    q0: &Point<T>,
    p0: &Covector<T>,
    phi: &CovectorCurve<T>,
    t0: T,
    t1: T,
    steps: usize,
) -> Result<PhaseTrajectory<T>> {
    let n = sys.dim();
    Error::check_dim(n, q0.dim())?;
    Error::check_dim(n, p0.dim())?;
    Error::check_dim(n, phi.dim())?;
    if steps < crate::trajectory::MIN_GRID_CELLS {
        return Err(Error::InvalidArgument(format!(
            "at least {} steps required, got {steps}",
            crate::trajectory::MIN_GRID_CELLS
        )));
    }
    if !(t0 < t1) {
        return Err(Error::InvalidArgument("solver interval must satisfy t0 < t1".into()));
    }
    let force = phi.curve().restrict(t0, t1)?;
    let h = (t1 - t0) / T::count(steps);
    let mut guess = vec![T::zero(); n];
    let rhs = |t: T, x: &[T], p: &[T], guess: &mut Vec<T>| -> Result<(Vec<T>, Vec<T>)> {
        let tol = T::epsilon() * T::lit(64.0) * norm_inf(p).max(T::one());
        let v = legendre_inverse_at(sys, x, p, guess, tol, 50)?;
        *guess = v.clone();
        let gq = sys.dl_dq(x, &v)?;
        let f = force.value(t)?;
        Ok((v, gq.iter().zip(&f).map(|(&a, &b)| a + b).collect()))
    };
    let axpy = |x: &[T], s: T, y: &[T]| -> Vec<T> { x.iter().zip(y).map(|(&a, &b)| a + s * b).collect() };

    let mut xs = Vec::with_capacity(steps + 1);
    let mut ps = Vec::with_capacity(steps + 1);
    let mut vs = Vec::with_capacity(steps + 1);
    let mut dps = Vec::with_capacity(steps + 1);
    let mut x = q0.as_slice().to_vec();
    let mut p = p0.as_slice().to_vec();
    let half = T::lit(0.5);
    let sixth = T::one() / T::lit(6.0);
    for i in 0..=steps {
        let t = if i == steps { t1 } else { t0 + h * T::count(i) };
        let (k1x, k1p) = rhs(t, &x, &p, &mut guess)?;
        xs.push(x.clone());
        ps.push(p.clone());
        vs.push(k1x.clone());
        dps.push(k1p.clone());
        if i == steps {
            break;
        }
        let start = guess.clone();
        let (k2x, k2p) = rhs(t + half * h, &axpy(&x, half * h, &k1x), &axpy(&p, half * h, &k1p), &mut guess)?;
        let (k3x, k3p) = rhs(t + half * h, &axpy(&x, half * h, &k2x), &axpy(&p, half * h, &k2p), &mut guess)?;
        let (k4x, k4p) = rhs(t + h, &axpy(&x, h, &k3x), &axpy(&p, h, &k3p), &mut guess)?;
        for j in 0..n {
            x[j] += h * sixth * (k1x[j] + T::lit(2.0) * (k2x[j] + k3x[j]) + k4x[j]);
            p[j] += h * sixth * (k1p[j] + T::lit(2.0) * (k2p[j] + k3p[j]) + k4p[j]);
        }
        if !(norm_inf(&x).is_finite() && norm_inf(&p).is_finite()) {
            return Err(Error::NonFinite("solver state"));
        }
        guess = start;
    }
    let xi = Motion::new(Curve::grid(t0, t1, xs, Some(vs))?);
    let pi = CovectorCurve::new(Curve::grid(t0, t1, ps, Some(dps))?);
    PhaseTrajectory::new(xi, CovectorCurve::new(force), pi)
}

/// `(∂L/∂q(ξ, ξ̇) − (π̇ − φ), ∂L/∂q̇(ξ, ξ̇) − π)` at `t`.
pub fn lagrange_residuals<T: Real>(
    sys: &LagrangianSystem<T>,
    traj: &PhaseTrajectory<T>,
    t: T,
) -> Result<(Covector<T>, Covector<T>)> {
    Error::check_dim(sys.dim(), traj.dim())?;
    let c = traj.xi.curve();
    let (gq, gv) = sys.gradients(&c.value(t)?, &c.derivative(t)?)?;
    let (r, p) = crate::distributions::dirac_reduce(&traj.phi, &traj.pi, t)?;
    let first = gq.iter().zip(r.iter()).map(|(&a, &b)| a - b).collect::<Vec<_>>();
    let second = gv.iter().zip(p.iter()).map(|(&a, &b)| a - b).collect::<Vec<_>>();
    Ok((Covector::from(first), Covector::from(second)))
}

/// Both sides of the interval/pointwise equivalence on one trajectory.
#[derive(Clone, Debug, PartialEq)]
pub struct ConsistencyReport<T> {
    /// Every subinterval passes the interval membership test.
    pub interval_channel: bool,
    /// Every inspected instant passes the pointwise membership test.
    pub pointwise_channel: bool,
    pub worst_interval: Option<MembershipReport<T>>,
    pub worst_pointwise: T,
    pub worst_pointwise_time: T,
}

impl<T> ConsistencyReport<T> {
    /// Verdict of the check: both channels accept.
    pub fn holds(&self) -> bool {
        self.interval_channel && self.pointwise_channel
    }

    pub fn channels_agree(&self) -> bool {
        self.interval_channel == self.pointwise_channel
    }
}

/// Checks a phase trajectory against the interval dynamics on each listed
/// subinterval (momenta taken from `π` at the ends) and against the pointwise
/// dynamics at interior nodes and cell midpoints.
pub fn script_d_consistency<T: Real>(
    sys: &LagrangianSystem<T>,
    traj: &PhaseTrajectory<T>,
    subintervals: &[(T, T)],
    tol: T,
) -> Result<ConsistencyReport<T>> {
    let mut interval_ok = true;
    let mut worst: Option<MembershipReport<T>> = None;
    let score = |r: &MembershipReport<T>| r.el_residual.max(r.initial_momentum_residual).max(r.final_momentum_residual);
    for &(a, b) in subintervals {
        let piece = traj.restrict(a, b)?;
        let triple = CovectorTriple::new(piece.phi.clone(), piece.pi.at(a)?, piece.pi.at(b)?)?;
        let report = dynamics_membership(sys, &piece.xi, &triple, tol)?;
        interval_ok &= report.member;
        if worst.as_ref().is_none_or(|w| !(score(&report) <= score(w))) {
            worst = Some(report);
        }
    }

    let times = inspection_times(&traj.xi);
    let mut dense = Vec::with_capacity(2 * times.len());
    for w in times.windows(2) {
        dense.push(w[0]);
        dense.push((w[0] + w[1]) * T::lit(0.5));
    }
    let (t0, t1) = traj.interval();
    let mut pointwise_ok = true;
    let mut worst_pt = T::zero();
    let mut worst_pt_t = t0;
    for t in dense.into_iter().filter(|&t| t > t0 && t < t1) {
        let c = traj.xi.curve();
        let (r, p) = crate::distributions::dirac_reduce(&traj.phi, &traj.pi, t)?;
        let x = crate::distributions::PhasePoint::new(Point::from(c.value(t)?), p, Vector::from(c.derivative(t)?), r)?;
        let (e1, e2) = crate::distributions::infinitesimal_residuals(sys, &x)?;
        let r = e1.norm_inf().max(e2.norm_inf());
        if !(r <= worst_pt) {
            worst_pt = r;
            worst_pt_t = t;
        }
        pointwise_ok &= r <= tol;
    }
    Ok(ConsistencyReport {
        interval_channel: interval_ok,
        pointwise_channel: pointwise_ok,
        worst_interval: worst,
        worst_pointwise: worst_pt,
        worst_pointwise_time: worst_pt_t,
    })
}
