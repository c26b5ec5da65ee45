//! Generators and independent oracles shared by the integration suites.
#![allow(dead_code)]

use std::collections::HashMap;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use varmech::calculus::ExpressionField;
use varmech::dynamics::solve_forward;
use varmech::systems::{closed_form, closed_form_velocity, HarmonicParams};
use varmech::{
    Covector64, CovectorCurve64, Curve, LagrangianSystem64, Metric64, Motion64, PhaseTrajectory64, Point64,
    ScalarField64,
};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    rng.gen_range(lo..=hi)
}

pub fn random_vec(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-scale..=scale)).collect()
}

pub fn mat_vec(g: &[f64], v: &[f64]) -> Vec<f64> {
    let n = v.len();
    (0..n).map(|i| (0..n).map(|j| g[i * n + j] * v[j]).sum()).collect()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Gaussian elimination with partial pivoting on a row-major `n × n` matrix.
#[allow(clippy::needless_range_loop)]
pub fn solve_dense(a: &[f64], b: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut m: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut row = a[i * n..(i + 1) * n].to_vec();
            row.push(b[i]);
            row
        })
        .collect();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| m[i][c].abs().total_cmp(&m[j][c].abs())).unwrap();
        m.swap(c, p);
        for r in c + 1..n {
            let f = m[r][c] / m[c][c];
            for k in c..=n {
                m[r][k] -= f * m[c][k];
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|k| m[r][k] * x[k]).sum();
        x[r] = (m[r][n] - s) / m[r][r];
    }
    x
}

/// `AᵀA + ½I` with the entries of `A` uniform in `[−1, 1]`, row-major.
pub fn random_spd(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let a = random_vec(rng, n * n, 1.0);
    let mut g = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            g[i * n + j] = (0..n).map(|k| a[k * n + i] * a[k * n + j]).sum::<f64>() + if i == j { 0.5 } else { 0.0 };
        }
    }
    g
}

/// A harmonic oscillator together with the raw numbers it was built from.
pub struct Sho {
    pub params: HarmonicParams<f64>,
    pub m: f64,
    pub k: f64,
    pub g: Vec<f64>,
    pub center: Vec<f64>,
}

impl Sho {
    pub fn build(m: f64, k: f64, g: Vec<f64>, center: Vec<f64>) -> Sho {
        let n = center.len();
        let metric = Metric64::from_row_major(n, g.clone()).unwrap();
        let params = HarmonicParams::new(m, k, metric, Point64::from(center.clone())).unwrap();
        Sho { params, m, k, g, center }
    }

    pub fn random(rng: &mut ChaCha8Rng, dim: usize) -> Sho {
        let m = uniform(rng, 0.5, 2.0);
        let k = uniform(rng, 0.5, 2.0);
        let g = random_spd(rng, dim);
        let center = random_vec(rng, dim, 1.0);
        Sho::build(m, k, g, center)
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    /// `⟨p, g⁻¹p⟩/(2m) + (k/2)⟨g(q − q₀), q − q₀⟩`.
    pub fn hamiltonian(&self, q: &[f64], p: &[f64]) -> f64 {
        let u = sub(q, &self.center);
        dot(p, &solve_dense(&self.g, p)) / (2.0 * self.m) + 0.5 * self.k * dot(&mat_vec(&self.g, &u), &u)
    }

    /// `m·g(v)`.
    pub fn momentum(&self, v: &[f64]) -> Vec<f64> {
        mat_vec(&self.g, v).iter().map(|x| self.m * x).collect()
    }

    /// `∂L/∂q = −k·g(q − q₀)`.
    pub fn force_gradient(&self, q: &[f64]) -> Vec<f64> {
        mat_vec(&self.g, &sub(q, &self.center)).iter().map(|x| -self.k * x).collect()
    }
}

pub const NONLINEAR_LAGRANGIAN: &str = "0.5*m1*(1 + e*q[1]^2)*qdot[0]^2 + 0.5*m2*qdot[1]^2 \
     + d*qdot[0]*sin(q[1]) - k1*(1 - cos(q[0])) - 0.5*k2*q[0]^2*q[1]^2";

/// A two-dimensional hyperregular Lagrangian with position-dependent mass,
/// a gyroscopic term and a pendulum potential; coefficients are random.
pub fn nonlinear_system(rng: &mut ChaCha8Rng) -> LagrangianSystem64 {
    let params: HashMap<String, f64> = [
        ("m1", uniform(rng, 0.5, 2.0)),
        ("m2", uniform(rng, 0.5, 2.0)),
        ("e", uniform(rng, 0.0, 0.5)),
        ("d", uniform(rng, -0.5, 0.5)),
        ("k1", uniform(rng, 0.5, 2.0)),
        ("k2", uniform(rng, 0.0, 0.5)),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect();
    let field = ExpressionField::parse(NONLINEAR_LAGRANGIAN, 2, params).unwrap();
    LagrangianSystem64::new(ScalarField64::new(field)).unwrap()
}

/// `γ + α·sin(βt)` per component.
pub fn sine_force(rng: &mut ChaCha8Rng, t0: f64, t1: f64, dim: usize, scale: f64) -> CovectorCurve64 {
    let a = random_vec(rng, dim, scale);
    let b: Vec<f64> = (0..dim).map(|_| uniform(rng, 0.5, 2.0)).collect();
    let c = random_vec(rng, dim, scale);
    let (a2, b2) = (a.clone(), b.clone());
    let curve = Curve::closed(
        t0,
        t1,
        dim,
        move |t| (0..dim).map(|i| c[i] + a[i] * (b[i] * t).sin()).collect(),
        move |t| (0..dim).map(|i| a2[i] * b2[i] * (b2[i] * t).cos()).collect(),
    )
    .unwrap();
    CovectorCurve64::new(curve)
}

/// `a + b·t + c·sin(ωt + φ)` per component, in closed form.
pub fn wavy_motion(rng: &mut ChaCha8Rng, t0: f64, t1: f64, dim: usize) -> Motion64 {
    let a = random_vec(rng, dim, 1.0);
    let b = random_vec(rng, dim, 1.0);
    let c = random_vec(rng, dim, 1.0);
    let w: Vec<f64> = (0..dim).map(|_| uniform(rng, 0.5, 2.0)).collect();
    let ph = random_vec(rng, dim, 3.0);
    let (b2, c2, w2, ph2) = (b.clone(), c.clone(), w.clone(), ph.clone());
    Motion64::new(
        Curve::closed(
            t0,
            t1,
            dim,
            move |t| (0..dim).map(|i| a[i] + b[i] * t + c[i] * (w[i] * t + ph[i]).sin()).collect(),
            move |t| (0..dim).map(|i| b2[i] + c2[i] * w2[i] * (w2[i] * t + ph2[i]).cos()).collect(),
        )
        .unwrap(),
    )
}

/// The same motion sampled on `cells` uniform cells with exact node slopes.
pub fn on_grid(m: &Motion64, cells: usize) -> Motion64 {
    let (t0, t1) = m.interval();
    let h = (t1 - t0) / cells as f64;
    let times: Vec<f64> = (0..=cells).map(|i| if i == cells { t1 } else { t0 + h * i as f64 }).collect();
    let values = times.iter().map(|&t| m.curve().value(t).unwrap()).collect();
    let slopes = times.iter().map(|&t| m.curve().derivative(t).unwrap()).collect();
    Motion64::new(Curve::grid(t0, t1, values, Some(slopes)).unwrap())
}

/// A forced solver trajectory of `sys` from random initial data.
pub fn random_solution(rng: &mut ChaCha8Rng, sys: &LagrangianSystem64, t1: f64, steps: usize) -> PhaseTrajectory64 {
    let n = sys.dim();
    let q0 = Point64::from(random_vec(rng, n, 1.0));
    let p0 = Covector64::from(random_vec(rng, n, 1.0));
    let phi = sine_force(rng, 0.0, t1, n, 0.5);
    solve_forward(sys, &q0, &p0, &phi, 0.0, t1, steps).unwrap()
}

/// Random expression over `q[0..dim]`, `qdot[0..dim]` and `t`, built so that
/// every subterm stays finite and smooth on bounded inputs.
pub fn random_expression(rng: &mut ChaCha8Rng, depth: usize, dim: usize) -> String {
    if depth == 0 || rng.gen_bool(0.25) {
        return match rng.gen_range(0..4) {
            0 => format!("q[{}]", rng.gen_range(0..dim)),
            1 => format!("qdot[{}]", rng.gen_range(0..dim)),
            2 => "t".to_string(),
            _ => format!("{:.3}", uniform(rng, 0.1, 2.0)),
        };
    }
    let sub = |rng: &mut ChaCha8Rng| random_expression(rng, depth - 1, dim);
    match rng.gen_range(0..9) {
        0 => format!("({} + {})", sub(rng), sub(rng)),
        1 => format!("({} - {})", sub(rng), sub(rng)),
        2 => format!("{} * {}", sub(rng), sub(rng)),
        3 => format!("{} / (2 + cos({}))", sub(rng), sub(rng)),
        4 => format!("sin({})", sub(rng)),
        5 => format!("cos({})", sub(rng)),
        6 => format!("exp(sin({}))", sub(rng)),
        7 => format!("sqrt(1 + ({})^2)", sub(rng)),
        _ => format!("-({})^{}", sub(rng), rng.gen_range(2..4)),
    }
}

/// An exact oscillator phase trajectory built from the closed form, with
/// `π̇ = −k·g(ξ − q₀)` supplied analytically.
pub fn closed_form_trajectory(sho: &Sho, qa: &[f64], pa: &[f64], t1: f64, force: &[f64]) -> PhaseTrajectory64 {
    let n = sho.dim();
    let data = Arc::new((sho.params.clone(), Point64::from(qa.to_vec()), Covector64::from(pa.to_vec())));
    let state =
        move |d: &Arc<(HarmonicParams<f64>, Point64, Covector64)>, t: f64| closed_form(&d.0, &d.1, &d.2, t).unwrap();
    let (d1, d2, d3, d4) = (data.clone(), data.clone(), data.clone(), data);
    let xi = Curve::closed(
        0.0,
        t1,
        n,
        move |t| state(&d1, t).0.into_vec(),
        move |t| closed_form_velocity(&d2.0, &d2.1, &d2.2, t).unwrap().into_vec(),
    )
    .unwrap();
    let (k, g, c) = (sho.k, sho.g.clone(), sho.center.clone());
    let pi = Curve::closed(
        0.0,
        t1,
        n,
        move |t| state(&d3, t).1.into_vec(),
        move |t| mat_vec(&g, &sub(state(&d4, t).0.as_slice(), &c)).iter().map(|x| -k * x).collect(),
    )
    .unwrap();
    let phi = Curve::constant(0.0, t1, force.to_vec()).unwrap();
    PhaseTrajectory64::new(Motion64::new(xi), CovectorCurve64::new(phi), CovectorCurve64::new(pi)).unwrap()
}
