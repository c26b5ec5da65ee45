//! Configuration space `Q`, its model space `V` and the dual `V*`.
//!
//! Points, vectors and covectors are all coordinate tuples in one global
//! origin chart, but they are distinct types: points can only be displaced by
//! vectors and differenced into vectors, and only a covector can be paired
//! with a vector.

use std::ops::{Add, AddAssign, Index, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::linalg::{norm_inf, Cholesky, Matrix};
use crate::scalar::Real;

/// A finite-dimensional affine space, identified by the dimension of `V`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AffineSpace {
    dim: usize,
}

impl AffineSpace {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("dimension must be at least 1".into()));
        }
        Ok(AffineSpace { dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
}

macro_rules! coordinate_tuple {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Clone, Debug, PartialEq)]
        pub struct $name<T>(Vec<T>);

        impl<T: Real> $name<T> {
            /// Validating constructor: rejects empty or non-finite input.
            pub fn try_new(coords: Vec<T>) -> Result<Self> {
                if coords.is_empty() {
                    return Err(Error::InvalidArgument(
                        concat!(stringify!($name), " must have at least one coordinate").into(),
                    ));
                }
                if coords.iter().any(|c| !c.is_finite()) {
                    return Err(Error::NonFinite(stringify!($name)));
                }
                Ok($name(coords))
            }

            pub fn zeros(dim: usize) -> Self {
                $name(vec![T::zero(); dim])
            }

            /// The `i`-th basis element.
            pub fn basis(dim: usize, i: usize) -> Self {
                let mut c = vec![T::zero(); dim];
                c[i] = T::one();
                $name(c)
            }

            pub fn dim(&self) -> usize {
                self.0.len()
            }

            pub fn as_slice(&self) -> &[T] {
                &self.0
            }

            pub fn into_vec(self) -> Vec<T> {
                self.0
            }

            pub fn iter(&self) -> std::slice::Iter<'_, T> {
                self.0.iter()
            }

            pub fn norm_inf(&self) -> T {
                norm_inf(&self.0)
            }

            pub fn is_finite(&self) -> bool {
                self.0.iter().all(|c| c.is_finite())
            }
        }

        impl<T> From<Vec<T>> for $name<T> {
            fn from(v: Vec<T>) -> Self {
                $name(v)
            }
        }

        impl<T: Copy, const N: usize> From<[T; N]> for $name<T> {
            fn from(v: [T; N]) -> Self {
                $name(v.to_vec())
            }
        }

        impl<T> Index<usize> for $name<T> {
            type Output = T;
            fn index(&self, i: usize) -> &T {
                &self.0[i]
            }
        }
    };
}

macro_rules! linear_ops {
    ($name:ident) => {
        impl<T: Real> Add for &$name<T> {
            type Output = $name<T>;
            fn add(self, o: Self) -> $name<T> {
                assert_eq!(self.dim(), o.dim(), "dimension mismatch");
                $name(self.0.iter().zip(&o.0).map(|(&a, &b)| a + b).collect())
            }
        }

        impl<T: Real> Add for $name<T> {
            type Output = $name<T>;
            fn add(self, o: Self) -> $name<T> {
                &self + &o
            }
        }

        impl<T: Real> AddAssign<&$name<T>> for $name<T> {
            fn add_assign(&mut self, o: &$name<T>) {
                assert_eq!(self.dim(), o.dim(), "dimension mismatch");
                self.0.iter_mut().zip(&o.0).for_each(|(a, &b)| *a += b);
            }
        }

        impl<T: Real> Sub for &$name<T> {
            type Output = $name<T>;
            fn sub(self, o: Self) -> $name<T> {
                assert_eq!(self.dim(), o.dim(), "dimension mismatch");
                $name(self.0.iter().zip(&o.0).map(|(&a, &b)| a - b).collect())
            }
        }

        impl<T: Real> Sub for $name<T> {
            type Output = $name<T>;
            fn sub(self, o: Self) -> $name<T> {
                &self - &o
            }
        }

        impl<T: Real> Mul<T> for &$name<T> {
            type Output = $name<T>;
            fn mul(self, s: T) -> $name<T> {
                $name(self.0.iter().map(|&c| c * s).collect())
            }
        }

        impl<T: Real> Mul<T> for $name<T> {
            type Output = $name<T>;
            fn mul(self, s: T) -> $name<T> {
                &self * s
            }
        }

        impl<T: Real> Neg for $name<T> {
            type Output = $name<T>;
            fn neg(self) -> $name<T> {
                $name(self.0.iter().map(|&c| -c).collect())
            }
        }
    };
}

coordinate_tuple!(
    /// A point of `Q` in the origin chart.
    Point
);
coordinate_tuple!(
    /// An element of the model space `V` (displacements, velocities).
    Vector
);
coordinate_tuple!(
    /// An element of the dual `V*` (forces, momenta).
    Covector
);

linear_ops!(Vector);
linear_ops!(Covector);

impl<T: Real> Add<&Vector<T>> for &Point<T> {
    type Output = Point<T>;
    fn add(self, v: &Vector<T>) -> Point<T> {
        assert_eq!(self.dim(), v.dim(), "dimension mismatch");
        Point(self.0.iter().zip(&v.0).map(|(&a, &b)| a + b).collect())
    }
}

impl<T: Real> Sub for &Point<T> {
    type Output = Vector<T>;
    fn sub(self, o: Self) -> Vector<T> {
        assert_eq!(self.dim(), o.dim(), "dimension mismatch");
        Vector(self.0.iter().zip(&o.0).map(|(&a, &b)| a - b).collect())
    }
}

/// The dual pairing `⟨f, v⟩`.
pub fn pair<T: Real>(f: &Covector<T>, v: &Vector<T>) -> Result<T> {
    Error::check_dim(f.dim(), v.dim())?;
    Ok(f.iter().zip(v.iter()).map(|(&a, &b)| a * b).sum())
}

/// Unchecked pairing for internal use where dimensions are already validated.
pub(crate) fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

/// The affine action `q + v`.
pub fn displace<T: Real>(q: &Point<T>, v: &Vector<T>) -> Result<Point<T>> {
    Error::check_dim(q.dim(), v.dim())?;
    Ok(q + v)
}

/// The unique vector carrying `q0` to `q1`.
pub fn difference<T: Real>(q1: &Point<T>, q0: &Point<T>) -> Result<Vector<T>> {
    Error::check_dim(q1.dim(), q0.dim())?;
    Ok(q1 - q0)
}

/// A symmetric positive-definite map `g: V → V*`.
#[derive(Clone, Debug)]
pub struct Metric<T> {
    matrix: Matrix<T>,
    chol: Cholesky<T>,
}

impl<T: Real> Metric<T> {
    /// Symmetrizes `(G + Gᵀ)/2` and validates by Cholesky factorization.
    pub fn new(matrix: Matrix<T>) -> Result<Self> {
        if !matrix.is_finite() {
            return Err(Error::NonFinite("metric"));
        }
        if matrix.dim() == 0 {
            return Err(Error::InvalidArgument("metric must be at least 1x1".into()));
        }
        let half = T::lit(0.5);
        let t = matrix.transpose();
        let n = matrix.dim();
        let mut sym = Matrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                sym[(i, j)] = if i == j { matrix[(i, i)] } else { (matrix[(i, j)] + t[(i, j)]) * half };
            }
        }
        let chol = sym.cholesky().ok_or(Error::NotPositiveDefinite)?;
        Ok(Metric { matrix: sym, chol })
    }

    pub fn from_row_major(n: usize, data: Vec<T>) -> Result<Self> {
        let found = data.len();
        let m = Matrix::from_row_major(n, data).ok_or(Error::DimensionMismatch { expected: n * n, found })?;
        Self::new(m)
    }

    pub fn identity(n: usize) -> Self {
        Self::new(Matrix::identity(n)).expect("identity is SPD")
    }

    pub fn diagonal(diag: &[T]) -> Result<Self> {
        Self::new(Matrix::from_diagonal(diag))
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn matrix(&self) -> &Matrix<T> {
        &self.matrix
    }

    pub(crate) fn apply_slice(&self, v: &[T]) -> Vec<T> {
        self.matrix.mul_vec(v)
    }

    /// `g(v)`.
    pub fn apply(&self, v: &Vector<T>) -> Result<Covector<T>> {
        Error::check_dim(self.dim(), v.dim())?;
        Ok(Covector(self.apply_slice(v.as_slice())))
    }

    /// `g⁻¹(p)` via the stored Cholesky factors.
    pub fn inverse_apply(&self, p: &Covector<T>) -> Result<Vector<T>> {
        Error::check_dim(self.dim(), p.dim())?;
        Ok(Vector(self.chol.solve(p.as_slice())))
    }
}

pub fn metric_apply<T: Real>(g: &Metric<T>, v: &Vector<T>) -> Result<Covector<T>> {
    g.apply(v)
}

pub fn metric_inverse_apply<T: Real>(g: &Metric<T>, p: &Covector<T>) -> Result<Vector<T>> {
    g.inverse_apply(p)
}
