//! Reference systems: the harmonic oscillator in statics and dynamics, its
//! closed-form motion, and systems assembled from a JSON configuration.

use std::collections::{BTreeMap, HashMap};

use num_traits::Float;
use serde::Deserialize;
use thiserror::Error;

use crate::affine::{Covector, Metric, Point, Vector};
use crate::calculus::{EvalError, Evaluate, ExpressionField, ScalarField};
use crate::dynamics::LagrangianSystem;
use crate::error::{Error, Result};
use crate::scalar::{Real, Scalar};
use crate::statics::StaticSystem;

/// Parameters of a mass `m` on a spring of stiffness `k` anchored at `center`,
/// in a space with metric `g`.
#[derive(Clone, Debug)]
pub struct HarmonicParams<T> {
    m: T,
    k: T,
    metric: Metric<T>,
    center: Point<T>,
}

impl<T: Real> HarmonicParams<T> {
    /// Requires `m > 0` and `k ≥ 0`; `k = 0` gives the free particle.
    pub fn new(m: T, k: T, metric: Metric<T>, center: Point<T>) -> Result<Self> {
        if !(m > T::zero()) || !m.is_finite() {
            return Err(Error::InvalidArgument(format!("mass must be positive, got {m}")));
        }
        if !(k >= T::zero()) || !k.is_finite() {
            return Err(Error::InvalidArgument(format!("stiffness must be non-negative, got {k}")));
        }
        Error::check_dim(metric.dim(), center.dim())?;
        if !center.is_finite() {
            return Err(Error::NonFinite("oscillator center"));
        }
        Ok(HarmonicParams { m, k, metric, center })
    }

    /// Identity metric and center at the origin.
    pub fn standard(m: T, k: T, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("dimension must be at least 1".into()));
        }
        Self::new(m, k, Metric::identity(dim), Point::zeros(dim))
    }

    pub fn mass(&self) -> T {
        self.m
    }

    pub fn stiffness(&self) -> T {
        self.k
    }

    pub fn metric(&self) -> &Metric<T> {
        &self.metric
    }

    pub fn center(&self) -> &Point<T> {
        &self.center
    }

    pub fn dim(&self) -> usize {
        self.metric.dim()
    }

    /// `ω = √(k/m)`.
    pub fn frequency(&self) -> T {
        Float::sqrt(self.k / self.m)
    }

    /// `½⟨g(x), x⟩` evaluated on any scalar type.
    fn quadratic<S: Scalar<T>>(&self, x: &[S]) -> S {
        let g = self.metric.matrix();
        let n = x.len();
        let mut acc = S::constant(T::zero());
        for i in 0..n {
            let mut row = S::constant(T::zero());
            for (j, &xj) in x.iter().enumerate() {
                row = row + S::constant(g[(i, j)]) * xj;
            }
            acc = acc + row * x[i];
        }
        acc * S::constant(T::lit(0.5))
    }

    fn offset<S: Scalar<T>>(&self, q: &[S]) -> Vec<S> {
        q.iter().zip(self.center.iter()).map(|(&x, &c)| x - S::constant(c)).collect()
    }
}

/// `U(q) = (k/2)⟨g(q − q₀), q − q₀⟩`.
#[derive(Clone, Debug)]
struct OscillatorPotential<T>(HarmonicParams<T>);

impl<T: Real> Evaluate<T> for OscillatorPotential<T> {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn uses_velocity(&self) -> bool {
        false
    }
    fn eval<S: Scalar<T>>(&self, q: &[S], _qdot: &[S], _t: S) -> Result<S, EvalError> {
        Ok(S::constant(self.0.k) * self.0.quadratic(&self.0.offset(q)))
    }
    fn analytic_gradient(&self, q: &[T], _qdot: &[T], _t: T) -> Option<(Vec<T>, Vec<T>)> {
        let u = self.0.offset(q);
        let gq = self.0.metric.apply_slice(&u).into_iter().map(|x| self.0.k * x).collect();
        Some((gq, vec![T::zero(); q.len()]))
    }
}

/// `L(q, q̇) = (m/2)⟨g(q̇), q̇⟩ − (k/2)⟨g(q − q₀), q − q₀⟩`.
#[derive(Clone, Debug)]
struct OscillatorLagrangian<T>(HarmonicParams<T>);

impl<T: Real> Evaluate<T> for OscillatorLagrangian<T> {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn eval<S: Scalar<T>>(&self, q: &[S], qdot: &[S], _t: S) -> Result<S, EvalError> {
        let kinetic = S::constant(self.0.m) * self.0.quadratic(qdot);
        let potential = S::constant(self.0.k) * self.0.quadratic(&self.0.offset(q));
        Ok(kinetic - potential)
    }
    fn analytic_gradient(&self, q: &[T], qdot: &[T], _t: T) -> Option<(Vec<T>, Vec<T>)> {
        let u = self.0.offset(q);
        let gq = self.0.metric.apply_slice(&u).into_iter().map(|x| -self.0.k * x).collect();
        let gv = self.0.metric.apply_slice(qdot).into_iter().map(|x| self.0.m * x).collect();
        Some((gq, gv))
    }
}

pub fn make_static_oscillator<T: Real>(p: &HarmonicParams<T>) -> StaticSystem<T> {
    StaticSystem::new(ScalarField::new(OscillatorPotential(p.clone()))).expect("potential is static")
}

pub fn make_lagrangian_oscillator<T: Real>(p: &HarmonicParams<T>) -> LagrangianSystem<T> {
    LagrangianSystem::new(ScalarField::new(OscillatorLagrangian(p.clone()))).expect("Lagrangian is autonomous")
}

/// State at time `t` of the unforced oscillator started from `(q_a, p_a)` at
/// time zero: with `ω = √(k/m)` and `v_a = g⁻¹(p_a)/m`,
/// `u(t) = (q_a − q₀) cos ωt + (v_a/ω) sin ωt`, returning `(q₀ + u, m·g(u̇))`.
pub fn closed_form<T: Real>(
    p: &HarmonicParams<T>,
    q_a: &Point<T>,
    p_a: &Covector<T>,
    t: T,
) -> Result<(Point<T>, Covector<T>)> {
    let (u, udot) = closed_form_offset(p, q_a, p_a, t)?;
    let q = p.center() + &u;
    let mom = p.metric.apply(&udot)?;
    Ok((q, &mom * p.m))
}

/// Velocity `u̇(t)` of the closed-form motion.
pub fn closed_form_velocity<T: Real>(
    p: &HarmonicParams<T>,
    q_a: &Point<T>,
    p_a: &Covector<T>,
    t: T,
) -> Result<Vector<T>> {
    Ok(closed_form_offset(p, q_a, p_a, t)?.1)
}

fn closed_form_offset<T: Real>(
    p: &HarmonicParams<T>,
    q_a: &Point<T>,
    p_a: &Covector<T>,
    t: T,
) -> Result<(Vector<T>, Vector<T>)> {
    Error::check_dim(p.dim(), q_a.dim())?;
    Error::check_dim(p.dim(), p_a.dim())?;
    let u0 = q_a - p.center();
    let v_a = &p.metric.inverse_apply(p_a)? * (T::one() / p.m);
    let w = p.frequency();
    if w == T::zero() {
        return Ok((&u0 + &(&v_a * t), v_a));
    }
    let (s, c) = (Float::sin(w * t), Float::cos(w * t));
    let u = &(&u0 * c) + &(&v_a * (s / w));
    let udot = &(&u0 * (-w * s)) + &(&v_a * c);
    Ok((u, udot))
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("malformed config: {0}")]
    Json(String),
    #[error("missing field `{0}`")]
    MissingField(&'static str),
    #[error("invalid field `{field}`: {reason}")]
    InvalidField { field: &'static str, reason: String },
    #[error("unknown system kind `{0}`; expected `harmonic` or `expression`")]
    UnknownKind(String),
}

/// A validated system description.
#[derive(Clone, Debug, PartialEq)]
pub struct SystemConfig {
    pub dim: usize,
    pub kind: SystemKind,
}

#[derive(Clone, Debug, PartialEq)]
pub enum SystemKind {
    Harmonic {
        m: f64,
        k: f64,
        /// Row-major `dim × dim` entries; identity when absent.
        metric: Option<Vec<f64>>,
        /// Spring anchor; origin when absent.
        q0: Option<Vec<f64>>,
    },
    Expression {
        lagrangian: Option<String>,
        energy: Option<String>,
        params: BTreeMap<String, f64>,
    },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    kind: Option<String>,
    dim: Option<serde_json::Value>,
    m: Option<f64>,
    k: Option<f64>,
    metric: Option<serde_json::Value>,
    q0: Option<Vec<f64>>,
    lagrangian: Option<String>,
    energy: Option<String>,
    params: Option<BTreeMap<String, f64>>,
}

fn invalid(field: &'static str, reason: impl Into<String>) -> ConfigError {
    ConfigError::InvalidField { field, reason: reason.into() }
}

fn flatten_metric(v: &serde_json::Value, dim: usize) -> std::result::Result<Vec<f64>, ConfigError> {
    let rows = v.as_array().ok_or_else(|| invalid("metric", "expected an array"))?;
    let number = |x: &serde_json::Value| x.as_f64().ok_or_else(|| invalid("metric", "entries must be numbers"));
    let flat: Vec<f64> = if rows.iter().all(|r| r.is_array()) {
        if rows.len() != dim {
            return Err(invalid("metric", format!("expected {dim} rows, got {}", rows.len())));
        }
        let mut out = Vec::with_capacity(dim * dim);
        for row in rows {
            let row = row.as_array().expect("checked");
            if row.len() != dim {
                return Err(invalid("metric", format!("expected rows of length {dim}, got {}", row.len())));
            }
            for x in row {
                out.push(number(x)?);
            }
        }
        out
    } else {
        rows.iter().map(number).collect::<std::result::Result<_, _>>()?
    };
    if flat.len() != dim * dim {
        return Err(invalid("metric", format!("expected {} entries, got {}", dim * dim, flat.len())));
    }
    Ok(flat)
}

impl SystemConfig {
    pub fn from_json(text: &str) -> std::result::Result<Self, ConfigError> {
        let raw: RawConfig = serde_json::from_str(text).map_err(|e| ConfigError::Json(e.to_string()))?;
        let kind = raw.kind.ok_or(ConfigError::MissingField("kind"))?;
        let dim_value = raw.dim.ok_or(ConfigError::MissingField("dim"))?;
        let dim = dim_value
            .as_u64()
            .filter(|&d| d >= 1)
            .ok_or_else(|| invalid("dim", format!("expected an integer >= 1, got {dim_value}")))?
            as usize;
        let kind = match kind.as_str() {
            "harmonic" => {
                for (present, name) in [
                    (raw.lagrangian.is_some(), "lagrangian"),
                    (raw.energy.is_some(), "energy"),
                    (raw.params.is_some(), "params"),
                ] {
                    if present {
                        return Err(invalid(name, "not allowed for kind `harmonic`"));
                    }
                }
                let m = raw.m.ok_or(ConfigError::MissingField("m"))?;
                let k = raw.k.ok_or(ConfigError::MissingField("k"))?;
                if !(m > 0.0) || !m.is_finite() {
                    return Err(invalid("m", format!("must be positive, got {m}")));
                }
                if !(k >= 0.0) || !k.is_finite() {
                    return Err(invalid("k", format!("must be non-negative, got {k}")));
                }
                let metric = raw.metric.as_ref().map(|v| flatten_metric(v, dim)).transpose()?;
                if let Some(q0) = &raw.q0 {
                    if q0.len() != dim {
                        return Err(invalid("q0", format!("expected {dim} entries, got {}", q0.len())));
                    }
                }
                SystemKind::Harmonic { m, k, metric, q0: raw.q0 }
            }
            "expression" => {
                for (present, name) in [
                    (raw.m.is_some(), "m"),
                    (raw.k.is_some(), "k"),
                    (raw.metric.is_some(), "metric"),
                    (raw.q0.is_some(), "q0"),
                ] {
                    if present {
                        return Err(invalid(name, "not allowed for kind `expression`"));
                    }
                }
                if raw.lagrangian.is_none() && raw.energy.is_none() {
                    return Err(ConfigError::MissingField("lagrangian"));
                }
                SystemKind::Expression {
                    lagrangian: raw.lagrangian,
                    energy: raw.energy,
                    params: raw.params.unwrap_or_default(),
                }
            }
            other => return Err(ConfigError::UnknownKind(other.to_string())),
        };
        Ok(SystemConfig { dim, kind })
    }
}

/// Systems built from a configuration; either side may be absent for
/// expression configs.
#[derive(Clone, Debug)]
pub struct ConfiguredSystem<T> {
    pub statics: Option<StaticSystem<T>>,
    pub lagrangian: Option<LagrangianSystem<T>>,
    pub harmonic: Option<HarmonicParams<T>>,
}

impl<T: Real> ConfiguredSystem<T> {
    pub fn statics(&self) -> Result<&StaticSystem<T>> {
        self.statics.as_ref().ok_or(ConfigError::MissingField("energy").into())
    }

    pub fn lagrangian(&self) -> Result<&LagrangianSystem<T>> {
        self.lagrangian.as_ref().ok_or(ConfigError::MissingField("lagrangian").into())
    }
}

/// Builds the oscillator (both its static and Lagrangian forms) or the
/// expression-defined systems named by the config.
pub fn make_system_from_config<T: Real>(cfg: &SystemConfig) -> Result<ConfiguredSystem<T>> {
    let dim = cfg.dim;
    match &cfg.kind {
        SystemKind::Harmonic { m, k, metric, q0 } => {
            let metric = match metric {
                Some(entries) => Metric::from_row_major(dim, entries.iter().map(|&x| T::lit(x)).collect())
                    .map_err(|e| invalid("metric", e.to_string()))?,
                None => Metric::identity(dim),
            };
            let center = match q0 {
                Some(c) => Point::from(c.iter().map(|&x| T::lit(x)).collect::<Vec<_>>()),
                None => Point::zeros(dim),
            };
            let params = HarmonicParams::new(T::lit(*m), T::lit(*k), metric, center)?;
            Ok(ConfiguredSystem {
                statics: Some(make_static_oscillator(&params)),
                lagrangian: Some(make_lagrangian_oscillator(&params)),
                harmonic: Some(params),
            })
        }
        SystemKind::Expression { lagrangian, energy, params } => {
            let bound: HashMap<String, T> = params.iter().map(|(k, &v)| (k.clone(), T::lit(v))).collect();
            let lagrangian = lagrangian
                .as_deref()
                .map(|src| {
                    let f = ExpressionField::parse(src, dim, bound.clone())?;
                    LagrangianSystem::new(ScalarField::new(f))
                })
                .transpose()?;
            let statics = energy
                .as_deref()
                .map(|src| {
                    let f = ExpressionField::parse(src, dim, bound.clone())?;
                    StaticSystem::new(ScalarField::new(f))
                })
                .transpose()?;
            Ok(ConfiguredSystem { statics, lagrangian, harmonic: None })
        }
    }
}
