//! Time-domain distributions with compact support (interval indicators and
//! Dirac deltas), the pairing of force/momentum curves with displacements
//! over them, and the pointwise (infinitesimal) dynamics.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::affine::{dot, Covector, Point, Vector};
use crate::calculus::try_integrate_time;
use crate::dynamics::{LagrangianSystem, PROBE_DEGREE};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::trajectory::{merged_breaks, CovectorCurve, Displacement, PolynomialProbe};

/// A compactly supported distribution on the time line.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Distribution<T> {
    /// Indicator of `[t0, t1]`.
    Interval(T, T),
    /// Point evaluation at `t`.
    Dirac(T),
}

impl<T: Real> Distribution<T> {
    pub fn interval(t0: T, t1: T) -> Result<Self> {
        if !(t0 < t1) || !t0.is_finite() || !t1.is_finite() {
            return Err(Error::InvalidArgument("interval distribution needs t0 < t1".into()));
        }
        Ok(Distribution::Interval(t0, t1))
    }

    pub fn dirac(t: T) -> Result<Self> {
        if !t.is_finite() {
            return Err(Error::NonFinite("dirac location"));
        }
        Ok(Distribution::Dirac(t))
    }

    /// Smallest closed interval containing the support.
    pub fn support(&self) -> (T, T) {
        match *self {
            Distribution::Interval(a, b) => (a, b),
            Distribution::Dirac(t) => (t, t),
        }
    }

    /// Interval on which probe displacements are built.
    fn probe_window(&self) -> (T, T) {
        match *self {
            Distribution::Interval(a, b) => (a, b),
            Distribution::Dirac(t) => (t - T::one(), t + T::one()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("invalid distribution `{0}`: expected interval(a,b) or dirac(t)")]
pub struct DistributionParseError(pub String);

impl<T: Real> FromStr for Distribution<T> {
    type Err = DistributionParseError;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let err = || DistributionParseError(s.to_string());
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let open = compact.find('(').ok_or_else(err)?;
        let args = compact[open + 1..].strip_suffix(')').ok_or_else(err)?;
        let nums = args
            .split(',')
            .map(|x| x.parse::<f64>().map(T::lit))
            .collect::<std::result::Result<Vec<T>, _>>()
            .map_err(|_| err())?;
        match (&compact[..open], nums.as_slice()) {
            ("interval", &[a, b]) => Distribution::interval(a, b).map_err(|_| err()),
            ("dirac", &[t]) => Distribution::dirac(t).map_err(|_| err()),
            _ => Err(err()),
        }
    }
}

impl<T: Real> fmt::Display for Distribution<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Distribution::Interval(a, b) => write!(f, "interval({a},{b})"),
            Distribution::Dirac(t) => write!(f, "dirac({t})"),
        }
    }
}

/// A point `(q, p, q̇, r)` of `Q × V* × V × V*`, with `r = π̇ − φ`.
#[derive(Clone, Debug, PartialEq)]
pub struct PhasePoint<T> {
    pub q: Point<T>,
    pub p: Covector<T>,
    pub qdot: Vector<T>,
    pub r: Covector<T>,
}

impl<T: Real> PhasePoint<T> {
    pub fn new(q: Point<T>, p: Covector<T>, qdot: Vector<T>, r: Covector<T>) -> Result<Self> {
        let n = q.dim();
        Error::check_dim(n, p.dim())?;
        Error::check_dim(n, qdot.dim())?;
        Error::check_dim(n, r.dim())?;
        Ok(PhasePoint { q, p, qdot, r })
    }

    pub fn dim(&self) -> usize {
        self.q.dim()
    }
}

/// `∫_c h`: a time integral for intervals, `h(t)` for a delta at `t`.
pub fn integrate<T: Real, F>(c: &Distribution<T>, mut h: F, tol: T) -> Result<T>
where
    F: FnMut(T) -> Result<T>,
{
    match *c {
        Distribution::Interval(a, b) => try_integrate_time(h, a, b, tol),
        Distribution::Dirac(t) => h(t),
    }
}

/// `∫_c ⟨π̇ − φ, δξ⟩ + ⟨π, δξ̇⟩`.
pub fn unified_pairing<T: Real>(
    phi: &CovectorCurve<T>,
    pi: &CovectorCurve<T>,
    c: &Distribution<T>,
    d: &Displacement<T>,
    tol: T,
) -> Result<T> {
    Error::check_dim(phi.dim(), pi.dim())?;
    Error::check_dim(phi.dim(), d.dim())?;
    let (a, b) = c.support();
    for curve in [phi.curve(), pi.curve(), d.curve()] {
        if !curve.covers(a, b) {
            let (c0, c1) = curve.interval();
            return Err(Error::IntervalMismatch {
                a0: a.to_f64().unwrap_or(f64::NAN),
                a1: b.to_f64().unwrap_or(f64::NAN),
                b0: c0.to_f64().unwrap_or(f64::NAN),
                b1: c1.to_f64().unwrap_or(f64::NAN),
            });
        }
    }
    let density = |t: T| -> Result<T> {
        let (r, p) = dirac_reduce(phi, pi, t)?;
        Ok(dot(r.as_slice(), &d.curve().value(t)?) + dot(p.as_slice(), &d.curve().derivative(t)?))
    };
    match *c {
        Distribution::Dirac(t) => density(t),
        Distribution::Interval(..) => {
            crate::calculus::integrate_pieces(density, &merged_breaks(a, b, &[phi.curve(), pi.curve(), d.curve()]), tol)
        }
    }
}

/// `(r, p) = (π̇(t) − φ(t), π(t))`. This is the only place where the sign
/// convention for `r` is fixed.
pub fn dirac_reduce<T: Real>(
    phi: &CovectorCurve<T>,
    pi: &CovectorCurve<T>,
    t: T,
) -> Result<(Covector<T>, Covector<T>)> {
    Error::check_dim(phi.dim(), pi.dim())?;
    let rate = pi.rate(t)?;
    let force = phi.at(t)?;
    Ok((&rate - &force, pi.at(t)?))
}

/// Result of comparing two (force, momentum) pairs as functionals.
#[derive(Clone, Debug, PartialEq)]
pub struct EquivalenceReport<T> {
    pub equivalent: bool,
    pub max_difference: T,
    /// First probe on which the pairings differed by more than the tolerance.
    pub witness: Option<PolynomialProbe<T>>,
}

/// Probes whether `(φ, π)` and `(φ', π')` pair identically with every
/// displacement over `c`, using `trials` random polynomial displacements.
#[allow(clippy::too_many_arguments)]
pub fn covector_equivalent<T: Real>(
    phi: &CovectorCurve<T>,
    pi: &CovectorCurve<T>,
    phi2: &CovectorCurve<T>,
    pi2: &CovectorCurve<T>,
    c: &Distribution<T>,
    trials: usize,
    seed: u64,
    tol: T,
) -> Result<EquivalenceReport<T>> {
    let (a, b) = c.probe_window();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let quad_tol = (tol * T::lit(1e-3)).max(T::epsilon() * T::lit(1e3));
    let mut max_difference = T::zero();
    let mut witness = None;
    for _ in 0..trials {
        let probe = PolynomialProbe::random(&mut rng, a, b, phi.dim(), PROBE_DEGREE);
        let d = probe.displacement()?;
        let diff = (unified_pairing(phi2, pi2, c, &d, quad_tol)? - unified_pairing(phi, pi, c, &d, quad_tol)?).abs();
        if !(diff <= max_difference) {
            max_difference = diff;
        }
        if !(diff <= tol) && witness.is_none() {
            witness = Some(probe);
        }
    }
    Ok(EquivalenceReport { equivalent: witness.is_none(), max_difference, witness })
}

/// `(∂L/∂q(q, q̇) − r, ∂L/∂q̇(q, q̇) − p)`.
pub fn infinitesimal_residuals<T: Real>(
    sys: &LagrangianSystem<T>,
    x: &PhasePoint<T>,
) -> Result<(Covector<T>, Covector<T>)> {
    Error::check_dim(sys.dim(), x.dim())?;
    let (gq, gv) = sys.gradients(x.q.as_slice(), x.qdot.as_slice())?;
    Ok((&Covector::from(gq) - &x.r, &Covector::from(gv) - &x.p))
}

/// Membership in the pointwise dynamics `∂L/∂q = r`, `∂L/∂q̇ = p`.
pub fn infinitesimal_membership<T: Real>(sys: &LagrangianSystem<T>, x: &PhasePoint<T>, tol: T) -> Result<bool> {
    let (a, b) = infinitesimal_residuals(sys, x)?;
    Ok(a.norm_inf() <= tol && b.norm_inf() <= tol)
}

/// `DL(q, q̇; δq, δq̇) − (⟨r, δq⟩ + ⟨p, δq̇⟩)`: the defect of the Lagrangian
/// pairing identity along one direction.
pub fn lagrangian_pairing_defect<T: Real>(
    sys: &LagrangianSystem<T>,
    x: &PhasePoint<T>,
    dq: &Vector<T>,
    dqdot: &Vector<T>,
) -> Result<T> {
    Error::check_dim(sys.dim(), x.dim())?;
    Error::check_dim(sys.dim(), dq.dim())?;
    Error::check_dim(sys.dim(), dqdot.dim())?;
    let dl = sys.directional(x.q.as_slice(), x.qdot.as_slice(), dq.as_slice(), dqdot.as_slice())?;
    Ok(dl - dot(x.r.as_slice(), dq.as_slice()) - dot(x.p.as_slice(), dqdot.as_slice()))
}
