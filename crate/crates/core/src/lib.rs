//! Variational statics and dynamics in affine spaces.
//!
//! Configurations live in an affine space `Q` modelled on `V = ℝⁿ`; forces and
//! momenta are covectors in `V*`. The crate covers the constitutive set of a
//! static system, the action principle on finite intervals and against Dirac
//! deltas, and the passage to the Hamiltonian side through the Legendre map.
//!
//! Everything is generic over the scalar type (`f32` or `f64`); the aliases
//! at the crate root fix `f64`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod affine;
pub mod calculus;
pub mod distributions;
pub mod dynamics;
pub mod error;
pub mod hamiltonian;
pub mod io;
pub mod linalg;
mod newton;
pub mod scalar;
pub mod statics;
pub mod systems;
pub mod trajectory;

pub use affine::{AffineSpace, Covector, Metric, Point, Vector};
pub use calculus::{Evaluate, ExpressionField, GradientMode, ScalarField};
pub use distributions::{Distribution, PhasePoint};
pub use dynamics::{LagrangianSystem, PhaseTrajectory};
pub use error::{Error, Result};
pub use hamiltonian::HamiltonianSystem;
pub use scalar::{Dual, Real, Scalar};
pub use statics::StaticSystem;
pub use systems::{HarmonicParams, SystemConfig};
pub use trajectory::{CovectorCurve, CovectorTriple, Curve, Displacement, Motion};

pub type Point64 = Point<f64>;
pub type Vector64 = Vector<f64>;
pub type Covector64 = Covector<f64>;
pub type Metric64 = Metric<f64>;
pub type ScalarField64 = ScalarField<f64>;
pub type StaticSystem64 = StaticSystem<f64>;
pub type LagrangianSystem64 = LagrangianSystem<f64>;
pub type HamiltonianSystem64 = HamiltonianSystem<f64>;
pub type Motion64 = Motion<f64>;
pub type Displacement64 = Displacement<f64>;
pub type CovectorCurve64 = CovectorCurve<f64>;
pub type PhaseTrajectory64 = PhaseTrajectory<f64>;
