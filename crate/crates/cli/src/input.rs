//! Reading configs, trajectories and command-line vectors.

use std::collections::HashMap;
use std::fs;
use std::path::Path;
use std::sync::Arc;

use varmech::calculus::{parse_with, Expression, ParseContext};
use varmech::systems::{make_system_from_config, ConfiguredSystem, SystemKind};
use varmech::{Covector64, CovectorCurve64, Curve, Dual, PhaseTrajectory64, Point64, SystemConfig};

use crate::failure::Failure;

pub fn read_text(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::input(format!("cannot read {}: {e}", path.display())))
}

pub struct Loaded {
    pub config: SystemConfig,
    pub system: ConfiguredSystem<f64>,
}

pub fn load_config(path: &Path) -> Result<Loaded, Failure> {
    let config =
        SystemConfig::from_json(&read_text(path)?).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    let system = make_system_from_config(&config)?;
    Ok(Loaded { config, system })
}

pub fn load_trajectory(path: &Path, dim: usize) -> Result<PhaseTrajectory64, Failure> {
    let traj = varmech::io::read_phase::<f64>(&read_text(path)?)
        .map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    if traj.dim() != dim {
        return Err(Failure::input(format!(
            "{}: trajectory has dimension {} but the system has dimension {dim}",
            path.display(),
            traj.dim()
        )));
    }
    Ok(traj)
}

/// Comma-separated reals; `None` gives zeros.
pub fn parse_vector(flag: &str, s: Option<&str>, dim: usize) -> Result<Vec<f64>, Failure> {
    let Some(s) = s else { return Ok(vec![0.0; dim]) };
    let v = s
        .split(',')
        .map(|x| x.trim().parse::<f64>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| Failure::usage(format!("--{flag}: {e}")))?;
    if v.len() != dim {
        return Err(Failure::usage(format!("--{flag}: expected {dim} components, got {}", v.len())));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Failure::usage(format!("--{flag}: components must be finite")));
    }
    Ok(v)
}

pub fn point(flag: &str, s: Option<&str>, dim: usize) -> Result<Point64, Failure> {
    parse_vector(flag, s, dim).map(Point64::from)
}

pub fn covector(flag: &str, s: Option<&str>, dim: usize) -> Result<Covector64, Failure> {
    parse_vector(flag, s, dim).map(Covector64::from)
}

fn config_params(cfg: &SystemConfig) -> HashMap<String, f64> {
    match &cfg.kind {
        SystemKind::Expression { params, .. } => params.iter().map(|(k, &v)| (k.clone(), v)).collect(),
        SystemKind::Harmonic { .. } => HashMap::new(),
    }
}

/// A force curve on `[t0, t1]` from `zero` or one time expression per
/// component; config parameters are in scope. Expressions are evaluated on a
/// dense grid up front so that a domain error surfaces as input failure.
pub fn force_curve(spec: &str, cfg: &SystemConfig, t0: f64, t1: f64, steps: usize) -> Result<CovectorCurve64, Failure> {
    let dim = cfg.dim;
    if spec.trim() == "zero" {
        return Ok(CovectorCurve64::zero(t0, t1, dim)?);
    }
    let params = config_params(cfg);
    let ctx = ParseContext { dim: Some(dim), params: Some(params.keys().cloned().collect()), time_only: true };
    let exprs = spec
        .split(',')
        .map(|s| parse_with(s, &ctx))
        .collect::<Result<Vec<Expression>, _>>()
        .map_err(|e| Failure::usage(format!("--force: {e}")))?;
    if exprs.len() != dim {
        return Err(Failure::usage(format!("--force: expected {dim} expressions, got {}", exprs.len())));
    }
    let exprs = Arc::new(exprs);
    let params = Arc::new(params);
    let value = {
        let (exprs, params) = (exprs.clone(), params.clone());
        move |t: f64| -> Vec<f64> {
            exprs.iter().map(|e| e.eval::<f64, f64>(&[], &[], t, &params).unwrap_or(f64::NAN)).collect()
        }
    };
    let deriv = {
        let (exprs, params) = (exprs.clone(), params.clone());
        move |t: f64| -> Vec<f64> {
            exprs
                .iter()
                .map(|e| e.eval::<f64, Dual<f64>>(&[], &[], Dual::new(t, 1.0), &params).map_or(f64::NAN, |d| d.eps))
                .collect()
        }
    };
    let samples = 4 * steps;
    for i in 0..=samples {
        let t = t0 + (t1 - t0) * i as f64 / samples as f64;
        if value(t).iter().chain(deriv(t).iter()).any(|x| !x.is_finite()) {
            return Err(Failure::usage(format!("--force: not finite at t = {t}")));
        }
    }
    Ok(CovectorCurve64::new(Curve::closed(t0, t1, dim, value, deriv)?))
}

/// One coordinate axis of a Legendre grid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Axis {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

impl Axis {
    fn parse(s: &str) -> Result<Axis, Failure> {
        let bad = || Failure::usage(format!("--grid: expected LO:HI:N, got `{s}`"));
        let parts: Vec<&str> = s.split(':').collect();
        let [lo, hi, n] = parts.as_slice() else { return Err(bad()) };
        let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
        let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
        let count: usize = n.trim().parse().map_err(|_| bad())?;
        if count == 0 || !lo.is_finite() || !hi.is_finite() || hi < lo {
            return Err(bad());
        }
        Ok(Axis { lo, hi, count })
    }

    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.lo];
        }
        let h = (self.hi - self.lo) / (self.count - 1) as f64;
        (0..self.count).map(|i| if i + 1 == self.count { self.hi } else { self.lo + h * i as f64 }).collect()
    }
}

pub const MAX_GRID_POINTS: usize = 1_000_000;

/// A `(q, p)` pair.
pub type PhaseSample = (Vec<f64>, Vec<f64>);

/// Tensor grid of `(q, p)` pairs, first coordinate varying slowest.
pub fn grid_points(spec: &str, dim: usize) -> Result<Vec<PhaseSample>, Failure> {
    let (qa, pa) = match spec.split_once('/') {
        Some((q, p)) => (Axis::parse(q)?, Axis::parse(p)?),
        None => {
            let a = Axis::parse(spec)?;
            (a, a)
        }
    };
    let total = (qa.count as f64).powi(dim as i32) * (pa.count as f64).powi(dim as i32);
    if total > MAX_GRID_POINTS as f64 {
        return Err(Failure::usage(format!("--grid: {total} points exceed the limit of {MAX_GRID_POINTS}")));
    }
    let axes: Vec<Vec<f64>> = (0..2 * dim).map(|i| if i < dim { qa.values() } else { pa.values() }).collect();
    let mut out = vec![Vec::new()];
    for axis in &axes {
        out = out
            .into_iter()
            .flat_map(|prefix: Vec<f64>| {
                axis.iter().map(move |&x| {
                    let mut next = prefix.clone();
                    next.push(x);
                    next
                })
            })
            .collect();
    }
    Ok(out.into_iter().map(|mut row| (row.drain(..dim).collect(), row)).collect())
}

/// Rows of a `q0..,p0..` CSV.
pub fn points_file(path: &Path, dim: usize) -> Result<Vec<PhaseSample>, Failure> {
    let text = read_text(path)?;
    let fail = |msg: String| Failure::input(format!("{}: {msg}", path.display()));
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let expected: Vec<String> = (0..dim).map(|i| format!("q{i}")).chain((0..dim).map(|i| format!("p{i}"))).collect();
    let expected = expected.join(",");
    match lines.next() {
        Some((_, head)) if head.split(',').map(str::trim).collect::<Vec<_>>().join(",") == expected => {}
        _ => return Err(fail(format!("expected header `{expected}`"))),
    }
    let mut rows = Vec::new();
    for (idx, line) in lines {
        let vals = line
            .split(',')
            .map(|x| x.trim().parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| fail(format!("line {}: {e}", idx + 1)))?;
        if vals.len() != 2 * dim || vals.iter().any(|x| !x.is_finite()) {
            return Err(fail(format!("line {}: expected {} finite fields", idx + 1, 2 * dim)));
        }
        rows.push((vals[..dim].to_vec(), vals[dim..].to_vec()));
    }
    if rows.is_empty() {
        return Err(fail("no data rows".into()));
    }
    Ok(rows)
}
