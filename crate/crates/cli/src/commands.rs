use std::fmt::Write as _;
use std::path::PathBuf;

use varmech::calculus::{partial_q, partial_qdot};
use varmech::distributions::unified_pairing;
use varmech::dynamics::{
    action_derivative_direct, dynamics_membership, lagrange_residuals, script_d_consistency, solve_forward,
    variational_membership, PROBE_DEGREE,
};
use varmech::hamiltonian::{energy, hyperregularity_probe, legendre, legendre_inverse, DEFAULT_MAX_ITER};
use varmech::statics::{constitutive_residual, solve_equilibrium};
use varmech::trajectory::PolynomialProbe;
use varmech::{CovectorTriple, Curve, Displacement, Distribution, LagrangianSystem, Point64, Vector64};

use crate::args::{CheckArgs, LegendreArgs, Mode, PairingArgs, SimulateArgs, StaticsArgs};
use crate::failure::{Exit, Failure};
use crate::input::{covector, force_curve, grid_points, load_config, load_trajectory, point, points_file};
use crate::report::{Check, RunReport};

/// What a command produced: a report, optionally a CSV table, and the exit
/// status when it differs from the report's pass/fail verdict.
pub struct Outcome {
    pub report: RunReport,
    pub table: Option<(Option<PathBuf>, String)>,
    pub exit: Exit,
}

impl Outcome {
    fn new(report: RunReport) -> Self {
        let exit = if report.passed { Exit::Pass } else { Exit::CheckFailed };
        Outcome { report, table: None, exit }
    }
}

pub fn statics(args: &StaticsArgs, mut report: RunReport) -> Result<Outcome, Failure> {
    let loaded = load_config(&args.config)?;
    let sys = loaded.system.statics()?;
    let dim = sys.dim();
    let f = covector("force", args.force.as_deref(), dim)?;
    let q_init = point("init", args.init.as_deref(), dim)?;
    let q = solve_equilibrium(sys, &f, &q_init, args.tol, args.max_iter)?;
    let residual = constitutive_residual(sys, &q, &f)?;
    report.put("equilibrium", q.as_slice());
    report.put("energy", sys.energy_at(&q)?);
    report.check(Check::new("statics.constitutive", residual, args.tol));
    Ok(Outcome::new(report))
}

pub fn simulate(args: &SimulateArgs, mut report: RunReport) -> Result<Outcome, Failure> {
    let loaded = load_config(&args.config)?;
    let sys = loaded.system.lagrangian()?;
    let dim = sys.dim();
    if !(args.t1 > args.t0) || !args.t0.is_finite() || !args.t1.is_finite() {
        return Err(Failure::usage(format!("--t1 must exceed --t0 (got {} and {})", args.t0, args.t1)));
    }
    let q0 = point("q0", args.q0.as_deref(), dim)?;
    let p0 = covector("p0", args.p0.as_deref(), dim)?;
    let phi = force_curve(&args.force, &loaded.config, args.t0, args.t1, args.steps)?;
    let traj = solve_forward(sys, &q0, &p0, &phi, args.t0, args.t1, args.steps).map_err(Failure::from_legendre)?;
    let csv = varmech::io::write_phase(&traj, args.steps)?;

    let mut energies = Vec::with_capacity(args.steps + 1);
    for t in traj.nodes().unwrap_or_default() {
        energies.push(energy(sys, &traj.xi.at(t)?, &traj.pi.at(t)?, &traj.xi.velocity(t)?)?);
    }
    let lo = energies.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = energies.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    report.put("steps", args.steps);
    report.put("final_q", traj.xi.at(args.t1)?.as_slice());
    report.put("final_p", traj.pi.at(args.t1)?.as_slice());
    report.put("energy_spread", hi - lo);
    report.check(Check::flag("simulate.finite_output", energies.iter().all(|e| e.is_finite())));
    let mut out = Outcome::new(report);
    out.table = Some((args.out.clone(), csv));
    Ok(out)
}

pub fn check(args: &CheckArgs, mut report: RunReport) -> Result<Outcome, Failure> {
    let loaded = load_config(&args.config)?;
    let sys = loaded.system.lagrangian()?;
    let traj = load_trajectory(&args.trajectory, sys.dim())?;
    let (t0, t1) = traj.interval();
    let tol = args.tol;

    if args.mode != Mode::Dirac {
        let triple = CovectorTriple::new(traj.phi.clone(), traj.pi.at(t0)?, traj.pi.at(t1)?)?;
        let m = dynamics_membership(sys, &traj.xi, &triple, tol)?;
        report.check(Check::new("interval.euler_lagrange", m.el_residual, tol).at(m.el_worst_time));
        report.check(Check::new("interval.initial_momentum", m.initial_momentum_residual, tol).at(t0));
        report.check(Check::new("interval.final_momentum", m.final_momentum_residual, tol).at(t1));
        let probe = variational_membership(sys, &traj.xi, &triple, args.probes, args.seed, tol)?;
        report.check(Check::new("interval.action_principle", probe.max_mismatch, tol));
        report.put("probes", args.probes);
    }

    if args.mode != Mode::Interval {
        let nodes = traj.nodes().ok_or_else(|| Failure::input("trajectory is not sampled on a grid"))?;
        let mids: Vec<f64> = nodes.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        let interior = &nodes[1..nodes.len() - 1];
        let (mut first, mut second) = ((0.0, mids[0]), (0.0, mids[0]));
        for &t in interior.iter().chain(&mids) {
            let (a, b) = lagrange_residuals(sys, &traj, t)?;
            if !(a.norm_inf() <= first.0) {
                first = (a.norm_inf(), t);
            }
            if !(b.norm_inf() <= second.0) {
                second = (b.norm_inf(), t);
            }
        }
        report.check(Check::new("dirac.force_balance", first.0, tol).at(first.1));
        report.check(Check::new("dirac.momentum_velocity", second.0, tol).at(second.1));
    }

    if args.mode == Mode::Both {
        let quarter = (t1 - t0) / 4.0;
        let pieces: Vec<(f64, f64)> = (0..4)
            .map(|i| (t0 + quarter * i as f64, if i == 3 { t1 } else { t0 + quarter * (i + 1) as f64 }))
            .chain([(t0, t1)])
            .collect();
        let c = script_d_consistency(sys, &traj, &pieces, tol)?;
        report.put("interval_channel", c.interval_channel);
        report.put("pointwise_channel", c.pointwise_channel);
        report.check(Check::flag("consistency.channels_agree", c.channels_agree()));
    }
    Ok(Outcome::new(report))
}

fn csv_row(out: &mut String, groups: &[&[f64]]) {
    let mut first = true;
    for x in groups.iter().flat_map(|g| g.iter()) {
        if !first {
            out.push(',');
        }
        first = false;
        write!(out, "{x:.16e}").expect("write to string");
    }
    out.push('\n');
}

pub fn legendre_table(args: &LegendreArgs, mut report: RunReport) -> Result<Outcome, Failure> {
    let loaded = load_config(&args.config)?;
    let sys = loaded.system.lagrangian()?;
    let dim = sys.dim();
    let points = match (&args.grid, &args.points) {
        (Some(spec), None) => grid_points(spec, dim)?,
        (None, Some(path)) => points_file(path, dim)?,
        _ => return Err(Failure::usage("exactly one of --grid and --points is required")),
    };

    let cols: Vec<String> = ["q", "p", "rho"]
        .iter()
        .flat_map(|g| (0..dim).map(move |i| format!("{g}{i}")))
        .chain(["H".to_string()])
        .collect();
    let mut csv = cols.join(",");
    csv.push('\n');
    let mut samples = Vec::with_capacity(points.len());
    let mut round_trip: f64 = 0.0;
    for (i, (q, p)) in points.iter().enumerate() {
        let (q, p) = (Point64::from(q.clone()), varmech::Covector64::from(p.clone()));
        let rho = match legendre_inverse(sys, &q, &p, None, args.tol, DEFAULT_MAX_ITER) {
            Ok(v) => v,
            Err(e) if e.is_singular() => {
                report.put("witness", serde_json::json!({ "row": i, "q": q.as_slice(), "p": p.as_slice() }));
                report.put("reason", e.to_string());
                report.check(Check::flag("legendre.hyperregular", false));
                return Ok(Outcome { report, table: None, exit: Exit::NotHyperregular });
            }
            Err(e) => return Err(e.into()),
        };
        let h = energy(sys, &q, &p, &rho)?;
        round_trip = round_trip.max((&legendre(sys, &q, &rho)? - &p).norm_inf());
        csv_row(&mut csv, &[q.as_slice(), p.as_slice(), rho.as_slice(), &[h]]);
        samples.push((q, rho));
    }
    let probe = hyperregularity_probe(sys, &samples, args.cond_max)?;
    report.put("rows", points.len());
    report.put("worst_condition", probe.worst_condition);
    report.check(Check::new("legendre.round_trip", round_trip, (args.tol * 10.0).max(1e-9)));
    let ok = probe.hyperregular;
    if let Some(i) = probe.witness {
        report.put("witness", serde_json::json!({ "row": i, "q": samples[i].0.as_slice() }));
    }
    report.check(Check::flag("legendre.hyperregular", ok));
    let mut out = Outcome::new(report);
    if !ok {
        out.exit = Exit::NotHyperregular;
    }
    out.table = Some((args.out.clone(), csv));
    Ok(out)
}

/// `⟨∂L/∂q, δq⟩ + ⟨∂L/∂q̇, δv⟩` at `(ξ(t), ξ̇(t))`.
fn action_density(
    sys: &LagrangianSystem<f64>,
    traj: &varmech::PhaseTrajectory64,
    d: &Displacement<f64>,
    t: f64,
) -> Result<f64, Failure> {
    let (q, v) = (traj.xi.at(t)?, traj.xi.velocity(t)?);
    let gq = partial_q(sys.lagrangian(), &q, &v, 0.0)?;
    let gv = partial_qdot(sys.lagrangian(), &q, &v, 0.0)?;
    let (dq, dv) = (Vector64::from(d.curve().value(t)?), Vector64::from(d.curve().derivative(t)?));
    Ok(varmech::affine::pair(&gq, &dq)? + varmech::affine::pair(&gv, &dv)?)
}

pub fn pairing(args: &PairingArgs, mut report: RunReport) -> Result<Outcome, Failure> {
    let loaded = load_config(&args.config)?;
    let sys = loaded.system.lagrangian()?;
    let dim = sys.dim();
    let traj = load_trajectory(&args.trajectory, dim)?;
    let dist: Distribution<f64> = args.dist.parse().map_err(|e| Failure::usage(format!("--dist: {e}")))?;
    let (t0, t1) = traj.interval();
    let (a, b) = dist.support();
    if a < t0 || b > t1 {
        return Err(Failure::usage(format!("--dist: {dist} is not inside the trajectory interval [{t0}, {t1}]")));
    }
    let (wa, wb) = match dist {
        Distribution::Interval(..) => (a, b),
        Distribution::Dirac(_) => (t0, t1),
    };
    let quad_tol = (args.tol * 1e-3).max(1e-13);
    let restricted = match dist {
        Distribution::Interval(..) => Some(traj.xi.restrict(a, b)?),
        Distribution::Dirac(_) => None,
    };
    let mut worst: f64 = 0.0;
    for probe in PolynomialProbe::family(args.seed, wa, wb, dim, PROBE_DEGREE, args.probes) {
        let d = probe.displacement()?;
        let pairing = unified_pairing(&traj.phi, &traj.pi, &dist, &d, quad_tol)?;
        let oracle = match (&restricted, dist) {
            (Some(m), _) => action_derivative_direct(sys, m, &d, quad_tol)?,
            (None, Distribution::Dirac(t)) => action_density(sys, &traj, &d, t)?,
            (None, Distribution::Interval(..)) => unreachable!("interval motions are restricted above"),
        };
        worst = worst.max((pairing - oracle).abs());
    }
    let zero = Displacement::new(Curve::constant(wa, wb, vec![0.0; dim])?);
    let zero_pairing = unified_pairing(&traj.phi, &traj.pi, &dist, &zero, quad_tol)?;
    report.put("distribution", dist.to_string());
    report.put("probes", args.probes);
    report.put("zero_probe_pairing", zero_pairing);
    report.check(Check::new("pairing.action_principle", worst, args.tol));
    report.check(Check::new("pairing.zero_probe", zero_pairing.abs(), 0.0));
    if let Distribution::Dirac(t) = dist {
        let (first, second) = lagrange_residuals(sys, &traj, t)?;
        report.put("force_balance_residual", first.as_slice());
        report.put("momentum_velocity_residual", second.as_slice());
        report.check(Check::new("dirac.force_balance", first.norm_inf(), args.tol).at(t));
        report.check(Check::new("dirac.momentum_velocity", second.norm_inf(), args.tol).at(t));
    }
    Ok(Outcome::new(report))
}
