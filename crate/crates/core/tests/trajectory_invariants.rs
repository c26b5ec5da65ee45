mod common;

use common::{random_vec, rng, sine_force, uniform};
use proptest::prelude::*;
use varmech::trajectory::{triple_pairing, PolynomialProbe};
use varmech::{Covector64, CovectorCurve64, CovectorTriple, Curve, Displacement64, Motion64};

/// `a·(t − t0)(t1 − t)` per component: vanishes at both ends.
fn bubble(t0: f64, t1: f64, a: Vec<f64>) -> Displacement64 {
    let n = a.len();
    let b = a.clone();
    Displacement64::new(
        Curve::closed(
            t0,
            t1,
            n,
            move |t| a.iter().map(|x| x * (t - t0) * (t1 - t)).collect(),
            move |t| b.iter().map(|x| x * (t0 + t1 - 2.0 * t)).collect(),
        )
        .unwrap(),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn triple_pairing_is_linear_in_the_displacement(seed in any::<u64>(), n in 1usize..=3, a in -2.0..2.0f64, b in -2.0..2.0f64) {
        let mut r = rng(seed);
        let t1 = uniform(&mut r, 0.5, 3.0);
        let phi = sine_force(&mut r, 0.0, t1, n, 1.0);
        let c = CovectorTriple::new(phi, Covector64::from(random_vec(&mut r, n, 1.0)), Covector64::from(random_vec(&mut r, n, 1.0))).unwrap();
        let u = PolynomialProbe::random(&mut r, 0.0, t1, n, 5);
        let v = PolynomialProbe::random(&mut r, 0.0, t1, n, 5);
        let combo = PolynomialProbe {
            t0: 0.0,
            t1,
            coeffs: u.coeffs.iter().zip(&v.coeffs).map(|(x, y)| x.iter().zip(y).map(|(p, q)| a * p + b * q).collect()).collect(),
        };
        let pair = |p: &PolynomialProbe<f64>| triple_pairing(&c, &p.displacement().unwrap(), 1e-12).unwrap();
        let lhs = pair(&combo);
        let rhs = a * pair(&u) + b * pair(&v);
        prop_assert!((lhs - rhs).abs() <= 1e-9, "{lhs} vs {rhs}");
    }

    #[test]
    fn boundary_terms_drop_when_the_displacement_vanishes_at_the_ends(seed in any::<u64>(), n in 1usize..=3) {
        let mut r = rng(seed);
        let t0 = uniform(&mut r, -1.0, 1.0);
        let t1 = t0 + uniform(&mut r, 0.5, 2.0);
        let force = random_vec(&mut r, n, 1.0);
        let a = random_vec(&mut r, n, 1.0);
        let phi = CovectorCurve64::new(Curve::constant(t0, t1, force.clone()).unwrap());
        let d = bubble(t0, t1, a.clone());
        // −Σ fᵢ aᵢ (t1 − t0)³ / 6
        let want = -common::dot(&force, &a) * (t1 - t0).powi(3) / 6.0;
        for _ in 0..3 {
            let p0 = Covector64::from(random_vec(&mut r, n, 10.0));
            let p1 = Covector64::from(random_vec(&mut r, n, 10.0));
            let c = CovectorTriple::new(phi.clone(), p0, p1).unwrap();
            let got = triple_pairing(&c, &d, 1e-13).unwrap();
            prop_assert!((got - want).abs() <= 1e-12, "{got} vs {want}");
        }
    }

    #[test]
    fn restriction_is_evaluation_on_the_subinterval(seed in any::<u64>(), n in 1usize..=3) {
        let mut r = rng(seed);
        let m = common::wavy_motion(&mut r, 0.0, 2.0, n);
        let grid = common::on_grid(&m, 64);
        let a = uniform(&mut r, 0.0, 1.0);
        let b = uniform(&mut r, a + 0.1, 2.0);
        for motion in [&m, &grid] {
            let sub = motion.restrict(a, b).unwrap();
            prop_assert_eq!(sub.interval(), (a, b));
            for _ in 0..5 {
                let t = uniform(&mut r, a, b);
                prop_assert_eq!(sub.at(t).unwrap(), motion.at(t).unwrap());
                prop_assert_eq!(sub.velocity(t).unwrap(), motion.velocity(t).unwrap());
            }
            prop_assert!(sub.at(b + 0.05).is_err());
        }
    }
}

/// Sup-norm velocity error of a derivative-free grid sampling of `cos`.
fn cos_velocity_error(cells: usize) -> f64 {
    let t1 = 2.0;
    let h = t1 / cells as f64;
    let values = (0..=cells).map(|i| vec![(h * i as f64).cos()]).collect();
    let m = Motion64::new(Curve::grid(0.0, t1, values, None).unwrap());
    (0..=cells)
        .map(|i| {
            let t = h * i as f64;
            (m.velocity(t).unwrap()[0] + t.sin()).abs()
        })
        .fold(0.0, f64::max)
}

#[test]
fn grid_velocity_is_fourth_order() {
    let errors: Vec<f64> = [16, 32, 64, 128].iter().map(|&n| cos_velocity_error(n)).collect();
    for w in errors.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!(order >= 3.5, "observed order {order} from {errors:?}");
    }
}
