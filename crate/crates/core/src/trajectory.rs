//! Motions, displacements, covector curves and the finite-interval pairing
//! between covector triples `(φ, p0, p1)` and displacements.
//!
//! Every curve carries its closed interval. Curves are either closed-form
//! (value and derivative supplied as functions of time) or sampled on a
//! uniform grid and interpolated by C¹ cubic Hermite splines.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::affine::{dot, Covector, Point, Vector};
use crate::calculus::integrate_pieces;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Fewest cells a grid curve may have.
pub const MIN_GRID_CELLS: usize = 8;

type TimeFn<T> = Arc<dyn Fn(T) -> Vec<T> + Send + Sync>;

/// Uniform-grid samples with node slopes; the interpolant is C¹ cubic Hermite.
#[derive(Clone, Debug)]
pub struct HermiteGrid<T> {
    t0: T,
    t1: T,
    values: Vec<Vec<T>>,
    slopes: Vec<Vec<T>>,
}

impl<T: Real> HermiteGrid<T> {
    /// `values` holds `N + 1` node samples. Without `slopes`, node
    /// derivatives come from fourth-order finite differences (central in the
    /// interior, one-sided at the two nodes nearest each end).
    pub fn new(t0: T, t1: T, values: Vec<Vec<T>>, slopes: Option<Vec<Vec<T>>>) -> Result<Self> {
        if !(t0 < t1) || !t0.is_finite() || !t1.is_finite() {
            return Err(Error::InvalidArgument("grid interval must satisfy t0 < t1".into()));
        }
        if values.len() < MIN_GRID_CELLS + 1 {
            return Err(Error::InvalidArgument(format!(
                "grid needs at least {} cells, got {}",
                MIN_GRID_CELLS,
                values.len().saturating_sub(1)
            )));
        }
        let dim = values[0].len();
        if let Some(bad) = values.iter().find(|v| v.len() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, found: bad.len() });
        }
        let slopes = match slopes {
            Some(s) => {
                Error::check_dim(values.len(), s.len())?;
                if let Some(bad) = s.iter().find(|v| v.len() != dim) {
                    return Err(Error::DimensionMismatch { expected: dim, found: bad.len() });
                }
                s
            }
            None => fd_slopes(&values, (t1 - t0) / T::count(values.len() - 1)),
        };
        Ok(HermiteGrid { t0, t1, values, slopes })
    }

    pub fn cells(&self) -> usize {
        self.values.len() - 1
    }

    pub fn step(&self) -> T {
        (self.t1 - self.t0) / T::count(self.cells())
    }

    pub fn node(&self, i: usize) -> T {
        if i == self.cells() {
            self.t1
        } else {
            self.t0 + self.step() * T::count(i)
        }
    }

    pub fn values(&self) -> &[Vec<T>] {
        &self.values
    }

    pub fn slopes(&self) -> &[Vec<T>] {
        &self.slopes
    }

    fn locate(&self, t: T) -> (usize, T) {
        let h = self.step();
        let x = ((t - self.t0) / h).max(T::zero());
        let mut i = x.floor().to_usize().unwrap_or(0).min(self.cells() - 1);
        // Agree with `node` exactly so each cell matches one breakpoint piece.
        if i > 0 && t < self.node(i) {
            i -= 1;
        } else if i + 1 < self.cells() && t >= self.node(i + 1) {
            i += 1;
        }
        let s = ((t - self.node(i)) / h).max(T::zero()).min(T::one());
        (i, s)
    }

    fn eval(&self, t: T) -> Vec<T> {
        let (i, s) = self.locate(t);
        let h = self.step();
        let s2 = s * s;
        let s3 = s2 * s;
        let two = T::lit(2.0);
        let three = T::lit(3.0);
        let h00 = two * s3 - three * s2 + T::one();
        let h10 = s3 - two * s2 + s;
        let h01 = three * s2 - two * s3;
        let h11 = s3 - s2;
        (0..self.values[i].len())
            .map(|k| {
                h00 * self.values[i][k]
                    + h10 * h * self.slopes[i][k]
                    + h01 * self.values[i + 1][k]
                    + h11 * h * self.slopes[i + 1][k]
            })
            .collect()
    }

    fn eval_deriv(&self, t: T) -> Vec<T> {
        let (i, s) = self.locate(t);
        let h = self.step();
        let s2 = s * s;
        let six = T::lit(6.0);
        let d00 = six * s2 - six * s;
        let d10 = T::lit(3.0) * s2 - T::lit(4.0) * s + T::one();
        let d01 = six * s - six * s2;
        let d11 = T::lit(3.0) * s2 - T::lit(2.0) * s;
        (0..self.values[i].len())
            .map(|k| {
                (d00 * self.values[i][k] + d01 * self.values[i + 1][k]) / h
                    + d10 * self.slopes[i][k]
                    + d11 * self.slopes[i + 1][k]
            })
            .collect()
    }
}

/// Fourth-order node derivatives of uniformly spaced samples.
pub(crate) fn fd_slopes<T: Real>(values: &[Vec<T>], h: T) -> Vec<Vec<T>> {
    let n = values.len() - 1;
    let dim = values[0].len();
    let c = |x: f64| T::lit(x);
    let denom = c(12.0) * h;
    (0..=n)
        .map(|i| {
            (0..dim)
                .map(|k| {
                    let f = |j: usize| values[j][k];
                    let num = if i == 0 {
                        c(-25.0) * f(0) + c(48.0) * f(1) - c(36.0) * f(2) + c(16.0) * f(3) - c(3.0) * f(4)
                    } else if i == 1 {
                        c(-3.0) * f(0) - c(10.0) * f(1) + c(18.0) * f(2) - c(6.0) * f(3) + f(4)
                    } else if i == n - 1 {
                        c(3.0) * f(n) + c(10.0) * f(n - 1) - c(18.0) * f(n - 2) + c(6.0) * f(n - 3) - f(n - 4)
                    } else if i == n {
                        c(25.0) * f(n) - c(48.0) * f(n - 1) + c(36.0) * f(n - 2) - c(16.0) * f(n - 3)
                            + c(3.0) * f(n - 4)
                    } else {
                        f(i - 2) - c(8.0) * f(i - 1) + c(8.0) * f(i + 1) - f(i + 2)
                    };
                    num / denom
                })
                .collect()
        })
        .collect()
}

#[derive(Clone)]
enum Repr<T> {
    Closed { value: TimeFn<T>, deriv: TimeFn<T> },
    Grid(Arc<HermiteGrid<T>>),
}

/// A differentiable curve `[t0, t1] → ℝⁿ`.
#[derive(Clone)]
pub struct Curve<T> {
    t0: T,
    t1: T,
    dim: usize,
    repr: Repr<T>,
}

impl<T: fmt::Debug> fmt::Debug for Curve<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match &self.repr {
            Repr::Closed { .. } => "closed".to_string(),
            Repr::Grid(g) => format!("grid({} cells)", g.values.len() - 1),
        };
        f.debug_struct("Curve")
            .field("t0", &self.t0)
            .field("t1", &self.t1)
            .field("dim", &self.dim)
            .field("repr", &kind)
            .finish()
    }
}

impl<T: Real> Curve<T> {
    pub fn closed<F, D>(t0: T, t1: T, dim: usize, value: F, deriv: D) -> Result<Self>
    where
        F: Fn(T) -> Vec<T> + Send + Sync + 'static,
        D: Fn(T) -> Vec<T> + Send + Sync + 'static,
    {
        if !(t0 < t1) || !t0.is_finite() || !t1.is_finite() {
            return Err(Error::InvalidArgument("curve interval must satisfy t0 < t1".into()));
        }
        if dim == 0 {
            return Err(Error::InvalidArgument("curve dimension must be at least 1".into()));
        }
        Ok(Curve { t0, t1, dim, repr: Repr::Closed { value: Arc::new(value), deriv: Arc::new(deriv) } })
    }

    pub fn from_grid(grid: HermiteGrid<T>) -> Self {
        Curve { t0: grid.t0, t1: grid.t1, dim: grid.values[0].len(), repr: Repr::Grid(Arc::new(grid)) }
    }

    pub fn grid(t0: T, t1: T, values: Vec<Vec<T>>, slopes: Option<Vec<Vec<T>>>) -> Result<Self> {
        Ok(Self::from_grid(HermiteGrid::new(t0, t1, values, slopes)?))
    }

    pub fn constant(t0: T, t1: T, c: Vec<T>) -> Result<Self> {
        let dim = c.len();
        let zeros = vec![T::zero(); dim];
        Self::closed(t0, t1, dim, move |_| c.clone(), move |_| zeros.clone())
    }

    /// `a + t·b`.
    pub fn linear(t0: T, t1: T, a: Vec<T>, b: Vec<T>) -> Result<Self> {
        Error::check_dim(a.len(), b.len())?;
        let rate = b.clone();
        Self::closed(
            t0,
            t1,
            a.len(),
            move |t| a.iter().zip(&b).map(|(&x, &y)| x + t * y).collect(),
            move |_| rate.clone(),
        )
    }

    pub fn interval(&self) -> (T, T) {
        (self.t0, self.t1)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_grid(&self) -> Option<&HermiteGrid<T>> {
        match &self.repr {
            Repr::Grid(g) => Some(g),
            Repr::Closed { .. } => None,
        }
    }

    /// Slack allowed when a time lands a few ulps outside the interval.
    fn slack(&self) -> T {
        T::epsilon() * T::lit(16.0) * self.t0.abs().max(self.t1.abs()).max(T::one())
    }

    pub fn covers(&self, a: T, b: T) -> bool {
        a >= self.t0 - self.slack() && b <= self.t1 + self.slack()
    }

    fn clamp(&self, t: T) -> Result<T> {
        if !(t >= self.t0 - self.slack() && t <= self.t1 + self.slack()) {
            return Err(Error::TimeOutOfRange {
                t: t.to_f64().unwrap_or(f64::NAN),
                t0: self.t0.to_f64().unwrap_or(f64::NAN),
                t1: self.t1.to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(t.max(self.t0).min(self.t1))
    }

    pub fn value(&self, t: T) -> Result<Vec<T>> {
        let t = self.clamp(t)?;
        Ok(match &self.repr {
            Repr::Closed { value, .. } => value(t),
            Repr::Grid(g) => g.eval(t),
        })
    }

    pub fn derivative(&self, t: T) -> Result<Vec<T>> {
        let t = self.clamp(t)?;
        Ok(match &self.repr {
            Repr::Closed { deriv, .. } => deriv(t),
            Repr::Grid(g) => g.eval_deriv(t),
        })
    }

    /// The same curve viewed on a subinterval.
    pub fn restrict(&self, a: T, b: T) -> Result<Self> {
        if !(a < b) {
            return Err(Error::InvalidArgument("restriction needs a < b".into()));
        }
        if !self.covers(a, b) {
            return Err(self.mismatch(a, b));
        }
        let mut c = self.clone();
        c.t0 = a.max(self.t0);
        c.t1 = b.min(self.t1);
        Ok(c)
    }

    fn mismatch(&self, a: T, b: T) -> Error {
        Error::IntervalMismatch {
            a0: a.to_f64().unwrap_or(f64::NAN),
            a1: b.to_f64().unwrap_or(f64::NAN),
            b0: self.t0.to_f64().unwrap_or(f64::NAN),
            b1: self.t1.to_f64().unwrap_or(f64::NAN),
        }
    }

    pub(crate) fn same_interval(&self, other_t0: T, other_t1: T) -> Result<()> {
        let s = self.slack();
        if (self.t0 - other_t0).abs() <= s && (self.t1 - other_t1).abs() <= s {
            Ok(())
        } else {
            Err(self.mismatch(other_t0, other_t1))
        }
    }

    /// Grid nodes strictly inside `(a, b)`.
    pub fn breakpoints(&self, a: T, b: T) -> Vec<T> {
        match &self.repr {
            Repr::Closed { .. } => Vec::new(),
            Repr::Grid(g) => (0..=g.cells()).map(|i| g.node(i)).filter(|&t| t > a && t < b).collect(),
        }
    }

    /// `self + s·other` on the interval of `self`. A grid operand keeps the
    /// denser of the grids and Hermite-evaluates the other curve at its nodes.
    pub fn add_scaled(&self, other: &Curve<T>, s: T) -> Result<Self> {
        Error::check_dim(self.dim, other.dim)?;
        if !other.covers(self.t0, self.t1) {
            return Err(other.mismatch(self.t0, self.t1));
        }
        let cells = |c: &Curve<T>| -> Option<usize> {
            c.as_grid().map(|g| {
                let span = (c.t1 - c.t0) / g.step();
                span.round().to_usize().unwrap_or(MIN_GRID_CELLS).max(MIN_GRID_CELLS)
            })
        };
        match (cells(self), cells(other)) {
            (None, None) => {
                let (a, b) = (self.clone(), other.clone());
                let (da, db) = (self.clone(), other.clone());
                Self::closed(
                    self.t0,
                    self.t1,
                    self.dim,
                    move |t| combine(&a.value(t).unwrap(), &b.value(t).unwrap(), s),
                    move |t| combine(&da.derivative(t).unwrap(), &db.derivative(t).unwrap(), s),
                )
            }
            (na, nb) => {
                let n = na.unwrap_or(0).max(nb.unwrap_or(0));
                let h = (self.t1 - self.t0) / T::count(n);
                let mut values = Vec::with_capacity(n + 1);
                let mut slopes = Vec::with_capacity(n + 1);
                for i in 0..=n {
                    let t = if i == n { self.t1 } else { self.t0 + h * T::count(i) };
                    values.push(combine(&self.value(t)?, &other.value(t)?, s));
                    slopes.push(combine(&self.derivative(t)?, &other.derivative(t)?, s));
                }
                Self::grid(self.t0, self.t1, values, Some(slopes))
            }
        }
    }

    /// Uniform samples of value and derivative at `n + 1` nodes.
    pub fn sample(&self, n: usize) -> Result<Samples<T>> {
        let h = (self.t1 - self.t0) / T::count(n);
        let mut ts = Vec::with_capacity(n + 1);
        let mut vs = Vec::with_capacity(n + 1);
        let mut ds = Vec::with_capacity(n + 1);
        for i in 0..=n {
            let t = if i == n { self.t1 } else { self.t0 + h * T::count(i) };
            ts.push(t);
            vs.push(self.value(t)?);
            ds.push(self.derivative(t)?);
        }
        Ok((ts, vs, ds))
    }
}

/// Node times with the values and derivatives there.
pub type Samples<T> = (Vec<T>, Vec<Vec<T>>, Vec<Vec<T>>);

fn combine<T: Real>(a: &[T], b: &[T], s: T) -> Vec<T> {
    a.iter().zip(b).map(|(&x, &y)| x + s * y).collect()
}

/// Sorted union of the endpoints and every curve's interior grid nodes.
pub(crate) fn merged_breaks<T: Real>(a: T, b: T, curves: &[&Curve<T>]) -> Vec<T> {
    let mut pts = vec![a, b];
    for c in curves {
        pts.extend(c.breakpoints(a, b));
    }
    pts.sort_by(|x, y| x.partial_cmp(y).expect("finite breakpoints"));
    let tiny = T::epsilon() * T::lit(64.0) * a.abs().max(b.abs()).max(T::one());
    pts.dedup_by(|x, y| (*x - *y).abs() <= tiny);
    let last = pts.len() - 1;
    pts[last] = b;
    pts
}

macro_rules! typed_curve {
    ($(#[$meta:meta])* $name:ident, $value:ident, $rate:ident) => {
        $(#[$meta])*
        #[derive(Clone, Debug)]
        pub struct $name<T>(Curve<T>);

        impl<T: Real> $name<T> {
            pub fn new(curve: Curve<T>) -> Self {
                $name(curve)
            }

            pub fn curve(&self) -> &Curve<T> {
                &self.0
            }

            pub fn into_curve(self) -> Curve<T> {
                self.0
            }

            pub fn interval(&self) -> (T, T) {
                self.0.interval()
            }

            pub fn dim(&self) -> usize {
                self.0.dim()
            }

            pub fn at(&self, t: T) -> Result<$value<T>> {
                self.0.value(t).map($value::from)
            }

            pub fn rate(&self, t: T) -> Result<$rate<T>> {
                self.0.derivative(t).map($rate::from)
            }

            pub fn restrict(&self, a: T, b: T) -> Result<Self> {
                self.0.restrict(a, b).map($name)
            }
        }
    };
}

typed_curve!(
    /// A motion `ξ: [t0, t1] → Q`.
    Motion,
    Point,
    Vector
);
typed_curve!(
    /// A displacement (variation) `δξ: [t0, t1] → V`.
    Displacement,
    Vector,
    Vector
);
typed_curve!(
    /// A curve in `V*`: an external force `φ` or a momentum `π`.
    CovectorCurve,
    Covector,
    Covector
);

impl<T: Real> Motion<T> {
    pub fn velocity(&self, t: T) -> Result<Vector<T>> {
        self.rate(t)
    }

    /// `t ↦ q + t·v`.
    pub fn linear(t0: T, t1: T, q: &Point<T>, v: &Vector<T>) -> Result<Self> {
        Curve::linear(t0, t1, q.as_slice().to_vec(), v.as_slice().to_vec()).map(Motion)
    }

    pub fn constant(t0: T, t1: T, q: &Point<T>) -> Result<Self> {
        Curve::constant(t0, t1, q.as_slice().to_vec()).map(Motion)
    }
}

impl<T: Real> CovectorCurve<T> {
    pub fn constant(t0: T, t1: T, f: &Covector<T>) -> Result<Self> {
        Curve::constant(t0, t1, f.as_slice().to_vec()).map(CovectorCurve)
    }

    pub fn zero(t0: T, t1: T, dim: usize) -> Result<Self> {
        Curve::constant(t0, t1, vec![T::zero(); dim]).map(CovectorCurve)
    }

    /// `self + other`, resampled on the denser grid if either is sampled.
    pub fn plus(&self, other: &CovectorCurve<T>) -> Result<Self> {
        self.0.add_scaled(&other.0, T::one()).map(CovectorCurve)
    }
}

/// Polynomial displacement in the normalized time `s = (2t − t0 − t1)/(t1 − t0)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PolynomialProbe<T> {
    pub t0: T,
    pub t1: T,
    /// `coeffs[k][i]` multiplies `sᵏ` in component `i`.
    pub coeffs: Vec<Vec<T>>,
}

impl<T: Real> PolynomialProbe<T> {
    /// Coefficients uniform in `[−1, 1]`.
    pub fn random<R: Rng>(rng: &mut R, t0: T, t1: T, dim: usize, degree: usize) -> Self {
        let coeffs = (0..=degree).map(|_| (0..dim).map(|_| T::lit(rng.gen_range(-1.0..=1.0))).collect()).collect();
        PolynomialProbe { t0, t1, coeffs }
    }

    /// `count` probes drawn from one ChaCha8 stream seeded with `seed`.
    pub fn family(seed: u64, t0: T, t1: T, dim: usize, degree: usize, count: usize) -> Vec<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count).map(|_| Self::random(&mut rng, t0, t1, dim, degree)).collect()
    }

    pub fn displacement(&self) -> Result<Displacement<T>> {
        let dim = self.coeffs.first().map_or(0, Vec::len);
        let (a, b) = (self.t0, self.t1);
        let scale = T::lit(2.0) / (b - a);
        let (cv, cd) = (self.coeffs.clone(), self.coeffs.clone());
        let norm = move |t: T| (T::lit(2.0) * t - a - b) / (b - a);
        Curve::closed(
            a,
            b,
            dim,
            move |t| {
                let s = norm(t);
                let mut acc = vec![T::zero(); dim];
                for c in cv.iter().rev() {
                    for i in 0..dim {
                        acc[i] = acc[i] * s + c[i];
                    }
                }
                acc
            },
            move |t| {
                let s = norm(t);
                let mut acc = vec![T::zero(); dim];
                for (k, c) in cd.iter().enumerate().skip(1).rev() {
                    for i in 0..dim {
                        acc[i] = acc[i] * s + T::count(k) * c[i];
                    }
                }
                acc.iter().map(|&x| x * scale).collect()
            },
        )
        .map(Displacement)
    }
}

/// External force curve with initial and final momenta on `[t0, t1]`.
#[derive(Clone, Debug)]
pub struct CovectorTriple<T> {
    t0: T,
    t1: T,
    pub phi: CovectorCurve<T>,
    pub p0: Covector<T>,
    pub p1: Covector<T>,
}

impl<T: Real> CovectorTriple<T> {
    /// The interval is that of `phi`.
    pub fn new(phi: CovectorCurve<T>, p0: Covector<T>, p1: Covector<T>) -> Result<Self> {
        Error::check_dim(phi.dim(), p0.dim())?;
        Error::check_dim(phi.dim(), p1.dim())?;
        let (t0, t1) = phi.interval();
        Ok(CovectorTriple { t0, t1, phi, p0, p1 })
    }

    pub fn interval(&self) -> (T, T) {
        (self.t0, self.t1)
    }

    pub fn dim(&self) -> usize {
        self.p0.dim()
    }
}

/// `ξ̇(t)`.
pub fn velocity<T: Real>(m: &Motion<T>, t: T) -> Result<Vector<T>> {
    m.velocity(t)
}

/// `−∫⟨φ, δξ⟩ + ⟨p1, δξ(t1)⟩ − ⟨p0, δξ(t0)⟩`.
pub fn triple_pairing<T: Real>(c: &CovectorTriple<T>, d: &Displacement<T>, quad_tol: T) -> Result<T> {
    Error::check_dim(c.dim(), d.dim())?;
    let (t0, t1) = c.interval();
    d.curve().same_interval(t0, t1)?;
    let breaks = merged_breaks(t0, t1, &[c.phi.curve(), d.curve()]);
    let integral = integrate_pieces(|t| Ok(dot(&c.phi.curve().value(t)?, &d.curve().value(t)?)), &breaks, quad_tol)?;
    let end = dot(c.p1.as_slice(), &d.curve().value(t1)?);
    let start = dot(c.p0.as_slice(), &d.curve().value(t0)?);
    Ok(-integral + end - start)
}

/// `t ↦ ξ(t) + s·δξ(t)`.
pub fn perturb<T: Real>(m: &Motion<T>, d: &Displacement<T>, s: T) -> Result<Motion<T>> {
    m.curve().add_scaled(d.curve(), s).map(Motion)
}
