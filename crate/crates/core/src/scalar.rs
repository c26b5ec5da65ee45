//! Scalar types.
//!
//! Every numerical routine in this crate is generic over a [`Real`] floating
//! point type (`f32` or `f64`). Scalar fields are evaluated through the
//! narrower [`Scalar`] trait so the same evaluation code runs on plain reals,
//! on forward-mode [`Dual`] numbers, and on nested duals for second
//! derivatives.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Arithmetic needed to evaluate a scalar field.
///
/// `T` is the underlying real type; `re` projects any scalar back to it.
pub trait Scalar<T>:
    Copy + Debug + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Div<Output = Self> + Neg<Output = Self>
{
    fn constant(c: T) -> Self;
    fn re(&self) -> T;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sqrt(self) -> Self;
    fn powi(self, n: i32) -> Self;
    /// Power with a constant real exponent.
    fn powf(self, e: T) -> Self;

    /// Power with a variable exponent, `exp(e ln self)`.
    fn pow(self, e: Self) -> Self {
        (e * self.ln()).exp()
    }
}

/// Floating point types the crate is instantiated with.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Scalar<Self>
    + Default
    + Debug
    + Display
    + LowerExp
    + Sum
    + AddAssign
    + SubAssign
    + MulAssign
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion from an `f64` literal.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    /// Conversion from a count.
    fn count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable")
    }
}

macro_rules! impl_real {
    ($f:ty) => {
        impl Scalar<$f> for $f {
            #[inline]
            fn constant(c: $f) -> Self {
                c
            }
            #[inline]
            fn re(&self) -> $f {
                *self
            }
            #[inline]
            fn sin(self) -> Self {
                <$f>::sin(self)
            }
            #[inline]
            fn cos(self) -> Self {
                <$f>::cos(self)
            }
            #[inline]
            fn exp(self) -> Self {
                <$f>::exp(self)
            }
            #[inline]
            fn ln(self) -> Self {
                <$f>::ln(self)
            }
            #[inline]
            fn sqrt(self) -> Self {
                <$f>::sqrt(self)
            }
            #[inline]
            fn powi(self, n: i32) -> Self {
                <$f>::powi(self, n)
            }
            #[inline]
            fn powf(self, e: $f) -> Self {
                <$f>::powf(self, e)
            }
            #[inline]
            fn pow(self, e: Self) -> Self {
                <$f>::powf(self, e)
            }
        }

        impl Real for $f {}
    };
}

impl_real!(f32);
impl_real!(f64);

/// Forward-mode dual number `re + eps·ε` with `ε² = 0`.
///
/// The components are themselves scalars, so `Dual<Dual<T>>` carries mixed
/// second derivatives in `eps.eps`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dual<S> {
    pub re: S,
    pub eps: S,
}

impl<S> Dual<S> {
    pub const fn new(re: S, eps: S) -> Self {
        Dual { re, eps }
    }
}

impl<S: Copy + Add<Output = S>> Add for Dual<S> {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        Dual::new(self.re + o.re, self.eps + o.eps)
    }
}

impl<S: Copy + Sub<Output = S>> Sub for Dual<S> {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        Dual::new(self.re - o.re, self.eps - o.eps)
    }
}

impl<S: Copy + Add<Output = S> + Mul<Output = S>> Mul for Dual<S> {
    type Output = Self;
    #[inline]
    fn mul(self, o: Self) -> Self {
        Dual::new(self.re * o.re, self.re * o.eps + self.eps * o.re)
    }
}

impl<S: Copy + Sub<Output = S> + Mul<Output = S> + Div<Output = S>> Div for Dual<S> {
    type Output = Self;
    #[inline]
    fn div(self, o: Self) -> Self {
        let q = self.re / o.re;
        Dual::new(q, (self.eps - q * o.eps) / o.re)
    }
}

impl<S: Neg<Output = S>> Neg for Dual<S> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Dual::new(-self.re, -self.eps)
    }
}

impl<T: Real, S: Scalar<T>> Scalar<T> for Dual<S> {
    #[inline]
    fn constant(c: T) -> Self {
        Dual::new(S::constant(c), S::constant(T::zero()))
    }
    #[inline]
    fn re(&self) -> T {
        self.re.re()
    }
    fn sin(self) -> Self {
        Dual::new(self.re.sin(), self.eps * self.re.cos())
    }
    fn cos(self) -> Self {
        Dual::new(self.re.cos(), -(self.eps * self.re.sin()))
    }
    fn exp(self) -> Self {
        let e = self.re.exp();
        Dual::new(e, self.eps * e)
    }
    fn ln(self) -> Self {
        Dual::new(self.re.ln(), self.eps / self.re)
    }
    fn sqrt(self) -> Self {
        let s = self.re.sqrt();
        Dual::new(s, self.eps / (S::constant(T::lit(2.0)) * s))
    }
    fn powi(self, n: i32) -> Self {
        match n {
            0 => Self::constant(T::one()),
            1 => self,
            _ => {
                let lower = self.re.powi(n - 1);
                Dual::new(lower * self.re, S::constant(T::lit(n as f64)) * lower * self.eps)
            }
        }
    }
    fn powf(self, e: T) -> Self {
        if e == T::zero() {
            return Self::constant(T::one());
        }
        let lower = self.re.powf(e - T::one());
        Dual::new(lower * self.re, S::constant(e) * lower * self.eps)
    }
}

/// Seeds a coordinate slice for differentiation along `direction`.
pub(crate) fn seed<T: Real, S: Scalar<T>>(values: &[S], direction: &[S]) -> Vec<Dual<S>> {
    values.iter().zip(direction).map(|(&v, &d)| Dual::new(v, d)).collect()
}

/// Lifts a slice into a constant-derivative dual slice.
pub(crate) fn lift<T: Real, S: Scalar<T>>(values: &[S]) -> Vec<Dual<S>> {
    values.iter().map(|&v| Dual::new(v, S::constant(T::zero()))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cube<S: Scalar<f64>>(x: S) -> S {
        x * x * x
    }

    #[test]
    fn dual_derivative_of_cube() {
        let d = cube(Dual::new(2.0, 1.0));
        assert_eq!(d.re, 8.0);
        assert_eq!(d.eps, 12.0);
    }

    #[test]
    fn nested_dual_second_derivative() {
        // f(x) = x^3, f''(2) = 12
        let x = Dual::new(Dual::new(2.0, 1.0), Dual::new(1.0, 0.0));
        let y = cube(x);
        assert_eq!(y.eps.eps, 12.0);
        assert_eq!(y.re.eps, 12.0);
        assert_eq!(y.eps.re, 12.0);
    }

    #[test]
    fn elementary_functions() {
        let x = Dual::new(0.3_f64, 1.0);
        assert!((Scalar::<f64>::sin(x).eps - 0.3f64.cos()).abs() < 1e-15);
        assert!((Scalar::<f64>::cos(x).eps + 0.3f64.sin()).abs() < 1e-15);
        assert!((Scalar::<f64>::exp(x).eps - 0.3f64.exp()).abs() < 1e-15);
        assert!((Scalar::<f64>::sqrt(x).eps - 0.5 / 0.3f64.sqrt()).abs() < 1e-14);
        assert!((Scalar::<f64>::powf(x, 2.5).eps - 2.5 * 0.3f64.powf(1.5)).abs() < 1e-14);
        assert!((Scalar::<f64>::powi(x, 4).eps - 4.0 * 0.3f64.powi(3)).abs() < 1e-15);
        let p = Scalar::<f64>::pow(x, Dual::new(2.0, 0.0));
        assert!((p.eps - 0.6).abs() < 1e-14);
    }

    #[test]
    fn powi_negative_base() {
        let x = Dual::new(-1.5_f64, 1.0);
        let y = Scalar::<f64>::powi(x, 2);
        assert_eq!(y.re, 2.25);
        assert_eq!(y.eps, -3.0);
    }
}
