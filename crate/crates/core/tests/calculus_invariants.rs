mod common;

use std::collections::HashMap;

use common::{random_expression, random_vec, rng, uniform};
use proptest::prelude::*;
use varmech::calculus::{
    directional, integrate_time, parse_expression, partial_q, partial_qdot, ExpressionField, GradientMode,
};
use varmech::{Point64, ScalarField64, Vector64};

fn field(src: &str, dim: usize) -> ScalarField64 {
    ScalarField64::new(ExpressionField::parse(src, dim, HashMap::new()).unwrap())
}

/// Central difference of the field value along one coordinate, step chosen
/// independently of the library's own finite-difference channel.
fn fd_partial(f: &ScalarField64, q: &[f64], v: &[f64], t: f64, i: usize, velocity: bool) -> f64 {
    let h = 1e-5;
    let eval = |s: f64| {
        let (mut q, mut v) = (q.to_vec(), v.to_vec());
        if velocity {
            v[i] += s;
        } else {
            q[i] += s;
        }
        f.value(&Point64::from(q), &Vector64::from(v), t).unwrap()
    };
    (-eval(2.0 * h) + 8.0 * eval(h) - 8.0 * eval(-h) + eval(-2.0 * h)) / (12.0 * h)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dual_gradients_match_central_differences(seed in any::<u64>(), dim in 1usize..=3) {
        let mut r = rng(seed);
        let src = random_expression(&mut r, 4, dim);
        let f = field(&src, dim);
        let q = random_vec(&mut r, dim, 1.0);
        let v = random_vec(&mut r, dim, 1.0);
        let t = uniform(&mut r, -1.0, 1.0);
        let (qp, vp) = (Point64::from(q.clone()), Vector64::from(v.clone()));
        let gq = partial_q(&f, &qp, &vp, t).unwrap();
        let gv = partial_qdot(&f, &qp, &vp, t).unwrap();
        for i in 0..dim {
            for (got, velocity) in [(gq[i], false), (gv[i], true)] {
                let want = fd_partial(&f, &q, &v, t, i, velocity);
                prop_assert!(
                    (got - want).abs() <= 1e-6 * want.abs().max(1.0),
                    "{src}: slot {i} velocity={velocity}: dual {got} vs fd {want}"
                );
            }
        }
    }

    #[test]
    fn gradient_modes_agree(seed in any::<u64>(), dim in 1usize..=3) {
        let mut r = rng(seed);
        let src = random_expression(&mut r, 3, dim);
        let dual = field(&src, dim);
        let fd = field(&src, dim).with_mode(GradientMode::FiniteDifference).unwrap();
        let q = Point64::from(random_vec(&mut r, dim, 1.0));
        let v = Vector64::from(random_vec(&mut r, dim, 1.0));
        let a = partial_q(&dual, &q, &v, 0.3).unwrap();
        let b = partial_q(&fd, &q, &v, 0.3).unwrap();
        for i in 0..dim {
            prop_assert!((a[i] - b[i]).abs() <= 1e-6 * a[i].abs().max(1.0), "{src}");
        }
    }

    #[test]
    fn quadrature_is_exact_for_degree_nine(seed in any::<u64>(), deg in 0usize..=9) {
        let mut r = rng(seed);
        let c = random_vec(&mut r, deg + 1, 1.0);
        let t0 = uniform(&mut r, -2.0, 0.0);
        let t1 = t0 + uniform(&mut r, 0.1, 2.0);
        let poly = |t: f64| c.iter().rev().fold(0.0, |acc, &ck| acc * t + ck);
        let anti = |t: f64| c.iter().enumerate().map(|(k, &ck)| ck * t.powi(k as i32 + 1) / (k + 1) as f64).sum::<f64>();
        let got = integrate_time(poly, t0, t1, 1e-13).unwrap();
        prop_assert!((got - (anti(t1) - anti(t0))).abs() <= 1e-13);
    }

    #[test]
    fn directional_is_linear(seed in any::<u64>(), dim in 1usize..=3, a in -2.0..2.0f64, b in -2.0..2.0f64) {
        let mut r = rng(seed);
        let src = random_expression(&mut r, 3, dim);
        let f = field(&src, dim);
        let q = Point64::from(random_vec(&mut r, dim, 1.0));
        let v = Vector64::from(random_vec(&mut r, dim, 1.0));
        let dirs: Vec<Vector64> = (0..4).map(|_| Vector64::from(random_vec(&mut r, dim, 1.0))).collect();
        let d = |dq: &Vector64, dv: &Vector64| directional(&f, &q, &v, 0.7, dq, dv).unwrap();
        let dq = &(&dirs[0] * a) + &(&dirs[1] * b);
        let dv = &(&dirs[2] * a) + &(&dirs[3] * b);
        let lhs = d(&dq, &dv);
        let rhs = a * d(&dirs[0], &dirs[2]) + b * d(&dirs[1], &dirs[3]);
        prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + lhs.abs()), "{src}: {lhs} vs {rhs}");
    }

    #[test]
    fn printed_expressions_parse_back_identically(seed in any::<u64>(), depth in 0usize..=5) {
        let mut r = rng(seed);
        let src = random_expression(&mut r, depth, 3);
        let ast = parse_expression(&src).unwrap();
        let printed = ast.to_string();
        let again = parse_expression(&printed).unwrap();
        prop_assert_eq!(&ast, &again, "{} printed as {}", src, printed);
        prop_assert_eq!(again.to_string(), printed);
    }
}

#[test]
fn corpus_round_trips() {
    let corpus = include_str!("data/expressions.txt");
    let mut seen = 0;
    for line in corpus.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
        let ast = parse_expression(line).unwrap_or_else(|e| panic!("{line}: {e}"));
        assert_eq!(parse_expression(&ast.to_string()).unwrap(), ast, "{line}");
        seen += 1;
    }
    assert_eq!(seen, 42);
}
