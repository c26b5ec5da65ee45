mod common;

use common::{mat_vec, random_spd, rng};
use proptest::prelude::*;
use varmech::affine::{difference, displace, metric_apply, metric_inverse_apply, pair};
use varmech::{Covector64, Metric64, Point64, Vector64};

fn coords(dim: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0..10.0f64, dim)
}

fn integer_coords(dim: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec((-1000i32..1000).prop_map(f64::from), dim)
}

proptest! {
    #[test]
    fn pairing_is_bilinear(
        (f, h, v) in (1usize..=4).prop_flat_map(|n| (coords(n), coords(n), coords(n))),
        a in -5.0..5.0f64,
        b in -5.0..5.0f64,
    ) {
        let (f, h, v) = (Covector64::from(f), Covector64::from(h), Vector64::from(v));
        let combo = &(&f * a) + &(&h * b);
        let lhs = pair(&combo, &v).unwrap();
        let rhs = a * pair(&f, &v).unwrap() + b * pair(&h, &v).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs().max(rhs.abs())));
    }

    #[test]
    fn metric_is_symmetric(seed in any::<u64>(), n in 1usize..=4) {
        let mut r = rng(seed);
        let g = Metric64::from_row_major(n, random_spd(&mut r, n)).unwrap();
        let v = Vector64::from(common::random_vec(&mut r, n, 1.0));
        let w = Vector64::from(common::random_vec(&mut r, n, 1.0));
        let gv_w = pair(&metric_apply(&g, &v).unwrap(), &w).unwrap();
        let gw_v = pair(&metric_apply(&g, &w).unwrap(), &v).unwrap();
        prop_assert!((gv_w - gw_v).abs() <= 1e-12);
    }

    #[test]
    fn metric_matches_dense_product(seed in any::<u64>(), n in 1usize..=4) {
        let mut r = rng(seed);
        let raw = random_spd(&mut r, n);
        let g = Metric64::from_row_major(n, raw.clone()).unwrap();
        let v = common::random_vec(&mut r, n, 1.0);
        let got = metric_apply(&g, &Vector64::from(v.clone())).unwrap();
        let want = mat_vec(&raw, &v);
        prop_assert!(common::max_abs_diff(got.as_slice(), &want) <= 1e-12);
    }

    #[test]
    fn metric_inverse_round_trips(seed in any::<u64>(), n in 1usize..=4) {
        let mut r = rng(seed);
        let g = Metric64::from_row_major(n, random_spd(&mut r, n)).unwrap();
        let p = Covector64::from(common::random_vec(&mut r, n, 10.0));
        let back = metric_apply(&g, &metric_inverse_apply(&g, &p).unwrap()).unwrap();
        let scale = p.norm_inf().max(1.0);
        prop_assert!((&back - &p).norm_inf() <= 1e-10 * scale);
    }

    #[test]
    fn inverse_agrees_with_elimination(seed in any::<u64>(), n in 1usize..=4) {
        let mut r = rng(seed);
        let raw = random_spd(&mut r, n);
        let g = Metric64::from_row_major(n, raw.clone()).unwrap();
        let p = common::random_vec(&mut r, n, 1.0);
        let got = metric_inverse_apply(&g, &Covector64::from(p.clone())).unwrap();
        let want = common::solve_dense(&raw, &p);
        prop_assert!(common::max_abs_diff(got.as_slice(), &want) <= 1e-9);
    }

    #[test]
    fn torsor_laws_are_exact_on_integers(
        (q0, q1, v) in (1usize..=4).prop_flat_map(|n| (integer_coords(n), integer_coords(n), integer_coords(n))),
    ) {
        let (q0, q1, v) = (Point64::from(q0), Point64::from(q1), Vector64::from(v));
        prop_assert_eq!(displace(&q0, &difference(&q1, &q0).unwrap()).unwrap(), q1.clone());
        prop_assert_eq!(difference(&displace(&q0, &v).unwrap(), &q0).unwrap(), v.clone());
        let u = difference(&q1, &q0).unwrap();
        let chained = displace(&displace(&q0, &u).unwrap(), &v).unwrap();
        prop_assert_eq!(chained, displace(&q0, &(&u + &v)).unwrap());
    }

    #[test]
    fn difference_then_displace_round_trips(
        (q0, q1) in (1usize..=4).prop_flat_map(|n| (coords(n), coords(n))),
    ) {
        let (q0, q1) = (Point64::from(q0), Point64::from(q1));
        let back = displace(&q0, &difference(&q1, &q0).unwrap()).unwrap();
        prop_assert!(common::max_abs_diff(back.as_slice(), q1.as_slice()) <= 1e-14 * 20.0);
    }
}

#[test]
fn pairing_a_metric_image_gives_the_quadratic_form() {
    let g = Metric64::from_row_major(2, vec![2.0, 1.0, 1.0, 3.0]).unwrap();
    let v = Vector64::from([1.0, -1.0]);
    // 2 − 1 − 1 + 3
    assert_eq!(pair(&metric_apply(&g, &v).unwrap(), &v).unwrap(), 3.0);
}
