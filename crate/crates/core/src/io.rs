//! CSV exchange of sampled trajectories.
//!
//! Motions are written as `t,q0..q{n-1},v0..v{n-1}`; phase trajectories add
//! `p0..p{n-1},f0..f{n-1}`. Rows are uniform grid nodes; values use 17
//! significant digits so a write/read cycle is exact.

use std::fmt::Write as _;

use thiserror::Error;

use crate::dynamics::PhaseTrajectory;
use crate::error::Result;
use crate::scalar::Real;
use crate::trajectory::{CovectorCurve, Curve, Motion, MIN_GRID_CELLS};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CsvError {
    #[error("trajectory has {rows} data rows; at least {min} are required")]
    TooFewRows { rows: usize, min: usize },
    #[error("bad header: {0}")]
    Header(String),
    #[error("line {line}: {reason}")]
    Row { line: usize, reason: String },
    #[error("line {line}: time {t} is off the uniform grid")]
    NonUniform { line: usize, t: f64 },
}

/// Whether a CSV carries only the motion or the full phase trajectory.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Layout {
    Motion,
    Phase,
}

pub fn header(dim: usize, layout: Layout) -> String {
    let mut cols = vec!["t".to_string()];
    let groups: &[&str] = match layout {
        Layout::Motion => &["q", "v"],
        Layout::Phase => &["q", "v", "p", "f"],
    };
    for g in groups {
        cols.extend((0..dim).map(|i| format!("{g}{i}")));
    }
    cols.join(",")
}

fn push_row<T: Real>(out: &mut String, t: T, groups: &[&[T]]) {
    write!(out, "{:.16e}", t).expect("write to string");
    for g in groups {
        for x in g.iter() {
            write!(out, ",{:.16e}", x).expect("write to string");
        }
    }
    out.push('\n');
}

/// Rows at the grid nodes of `xi`, or at `samples + 1` uniform times when the
/// motion is closed-form.
fn row_times<T: Real>(m: &Motion<T>, samples: usize) -> Vec<T> {
    let (a, b) = m.interval();
    let n = match m.curve().as_grid() {
        Some(g) if g.node(0) == a && g.node(g.cells()) == b => g.cells(),
        _ => samples,
    };
    let h = (b - a) / T::count(n);
    (0..=n).map(|i| if i == n { b } else { a + h * T::count(i) }).collect()
}

pub fn write_motion<T: Real>(m: &Motion<T>, samples: usize) -> Result<String> {
    let mut out = header(m.dim(), Layout::Motion);
    out.push('\n');
    for t in row_times(m, samples) {
        push_row(&mut out, t, &[&m.curve().value(t)?, &m.curve().derivative(t)?]);
    }
    Ok(out)
}

pub fn write_phase<T: Real>(traj: &PhaseTrajectory<T>, samples: usize) -> Result<String> {
    let mut out = header(traj.dim(), Layout::Phase);
    out.push('\n');
    for t in row_times(&traj.xi, samples) {
        let xi = traj.xi.curve();
        push_row(
            &mut out,
            t,
            &[&xi.value(t)?, &xi.derivative(t)?, &traj.pi.curve().value(t)?, &traj.phi.curve().value(t)?],
        );
    }
    Ok(out)
}

/// Parsed columns of a trajectory file.
#[derive(Clone, Debug)]
pub struct Table<T> {
    pub layout: Layout,
    pub dim: usize,
    pub times: Vec<T>,
    /// Per row, the groups `q, v[, p, f]` in column order.
    pub rows: Vec<Vec<Vec<T>>>,
}

pub fn parse_table<T: Real>(text: &str) -> std::result::Result<Table<T>, CsvError> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, head) = lines.next().ok_or(CsvError::TooFewRows { rows: 0, min: MIN_GRID_CELLS + 1 })?;
    let cols: Vec<&str> = head.split(',').map(str::trim).collect();
    if cols.first() != Some(&"t") {
        return Err(CsvError::Header("first column must be `t`".into()));
    }
    let rest = cols.len() - 1;
    let (layout, dim) = if rest > 0 && rest.is_multiple_of(4) && cols.get(1 + rest / 2) == Some(&"p0") {
        (Layout::Phase, rest / 4)
    } else if rest > 0 && rest.is_multiple_of(2) {
        (Layout::Motion, rest / 2)
    } else {
        return Err(CsvError::Header(format!("unexpected column count {}", cols.len())));
    };
    let expected = header(dim, layout);
    if cols.join(",") != expected {
        return Err(CsvError::Header(format!("expected `{expected}`")));
    }
    let groups = if layout == Layout::Phase { 4 } else { 2 };
    let mut times = Vec::new();
    let mut rows = Vec::new();
    for (idx, line) in lines {
        let lineno = idx + 1;
        let vals = line
            .split(',')
            .map(|x| x.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<f64>, _>>()
            .map_err(|e| CsvError::Row { line: lineno, reason: e.to_string() })?;
        if vals.len() != cols.len() {
            return Err(CsvError::Row {
                line: lineno,
                reason: format!("expected {} fields, got {}", cols.len(), vals.len()),
            });
        }
        if let Some(bad) = vals.iter().find(|x| !x.is_finite()) {
            return Err(CsvError::Row { line: lineno, reason: format!("non-finite value {bad}") });
        }
        times.push(T::lit(vals[0]));
        rows.push(
            (0..groups).map(|g| vals[1 + g * dim..1 + (g + 1) * dim].iter().map(|&x| T::lit(x)).collect()).collect(),
        );
        if times.len() >= 2 {
            let (a, b) = (times[times.len() - 2], times[times.len() - 1]);
            if !(b > a) {
                return Err(CsvError::NonUniform { line: lineno, t: vals[0] });
            }
        }
    }
    if rows.len() < MIN_GRID_CELLS + 1 {
        return Err(CsvError::TooFewRows { rows: rows.len(), min: MIN_GRID_CELLS + 1 });
    }
    let (a, b) = (times[0], times[times.len() - 1]);
    let n = times.len() - 1;
    let h = (b - a) / T::count(n);
    let slack = (b - a) * T::lit(1e-9);
    for (i, &t) in times.iter().enumerate() {
        if (t - (a + h * T::count(i))).abs() > slack {
            return Err(CsvError::NonUniform { line: i + 2, t: t.to_f64().unwrap_or(f64::NAN) });
        }
    }
    Ok(Table { layout, dim, times, rows })
}

fn column<T: Real>(table: &Table<T>, g: usize) -> Vec<Vec<T>> {
    table.rows.iter().map(|r| r[g].clone()).collect()
}

/// A grid motion whose node velocities are the `v` columns.
pub fn read_motion<T: Real>(text: &str) -> Result<Motion<T>> {
    let table = parse_table::<T>(text)?;
    let (a, b) = (table.times[0], table.times[table.times.len() - 1]);
    Ok(Motion::new(Curve::grid(a, b, column(&table, 0), Some(column(&table, 1)))?))
}

/// A grid phase trajectory; momentum and force slopes come from
/// fourth-order differences of their columns.
pub fn read_phase<T: Real>(text: &str) -> Result<PhaseTrajectory<T>> {
    let table = parse_table::<T>(text)?;
    if table.layout != Layout::Phase {
        return Err(CsvError::Header(format!("expected `{}`", header(table.dim, Layout::Phase))).into());
    }
    let (a, b) = (table.times[0], table.times[table.times.len() - 1]);
    let xi = Motion::new(Curve::grid(a, b, column(&table, 0), Some(column(&table, 1)))?);
    let pi = CovectorCurve::new(Curve::grid(a, b, column(&table, 2), None)?);
    let phi = CovectorCurve::new(Curve::grid(a, b, column(&table, 3), None)?);
    PhaseTrajectory::new(xi, phi, pi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::affine::{Covector, Point, Vector};
    use crate::dynamics::solve_forward;
    use crate::error::Error;
    use crate::systems::{make_lagrangian_oscillator, HarmonicParams};

    #[test]
    fn phase_round_trip_is_exact() {
        let sys = make_lagrangian_oscillator(&HarmonicParams::standard(1.0, 1.0, 2).unwrap());
        let traj = solve_forward(
            &sys,
            &Point::from([1.0, 0.5]),
            &Covector::from([0.0, -0.25]),
            &CovectorCurve::zero(0.0, 1.0, 2).unwrap(),
            0.0,
            1.0,
            16,
        )
        .unwrap();
        let text = write_phase(&traj, 64).unwrap();
        assert!(text.starts_with("t,q0,q1,v0,v1,p0,p1,f0,f1\n"));
        let back: PhaseTrajectory<f64> = read_phase(&text).unwrap();
        assert_eq!(write_phase(&back, 64).unwrap(), text);
        for t in [0.0, 0.3, 1.0] {
            assert_eq!(back.xi.at(t).unwrap(), traj.xi.at(t).unwrap());
        }
    }

    #[test]
    fn motion_csv_from_closed_form() {
        let m = Motion::linear(0.0, 2.0, &Point::from([1.0]), &Vector::from([0.5])).unwrap();
        let text = write_motion(&m, 8).unwrap();
        assert_eq!(text.lines().count(), 10);
        let back: Motion<f64> = read_motion(&text).unwrap();
        assert_eq!(back.at(2.0).unwrap(), Point::from([2.0]));
    }

    #[test]
    fn malformed_inputs() {
        let err = read_phase::<f64>("").unwrap_err();
        assert_eq!(err, Error::Csv(CsvError::TooFewRows { rows: 0, min: 9 }));
        let err = read_phase::<f64>("t,q0,v0,p0,f0\n0,0,0,0,0\n").unwrap_err();
        assert_eq!(err, Error::Csv(CsvError::TooFewRows { rows: 1, min: 9 }));
        assert!(matches!(read_phase::<f64>("x,q0\n"), Err(Error::Csv(CsvError::Header(_)))));
        let mut text = String::from("t,q0,v0,p0,f0\n");
        for i in 0..9 {
            let t = if i == 4 { 4.5 } else { i as f64 };
            text.push_str(&format!("{t},0,0,0,0\n"));
        }
        assert!(matches!(read_phase::<f64>(&text), Err(Error::Csv(CsvError::NonUniform { .. }))));
        let text = text.replace("4.5,0,0,0,0", "4,0,zero,0,0");
        assert!(matches!(read_phase::<f64>(&text), Err(Error::Csv(CsvError::Row { line: 6, .. }))));
        let motion_only = "t,q0,v0\n".to_string() + &(0..9).map(|i| format!("{i},0,0\n")).collect::<String>();
        assert!(read_motion::<f64>(&motion_only).is_ok());
        assert!(matches!(read_phase::<f64>(&motion_only), Err(Error::Csv(CsvError::Header(_)))));
    }
}
