mod common;

use std::collections::HashMap;

use common::{mat_vec, random_spd, random_vec, rng, sub, uniform, Sho};
use proptest::prelude::*;
use rand_chacha::ChaCha8Rng;
use varmech::calculus::ExpressionField;
use varmech::statics::{constitutive_member, constitutive_residual, du, solve_equilibrium};
use varmech::systems::make_static_oscillator;
use varmech::{Covector64, Point64, ScalarField64, StaticSystem64, Vector64};

/// `½⟨q, Aq⟩ + ⟨b, q⟩` written out as an expression, with its matrix and
/// linear part kept for the oracle.
fn quadratic_energy(r: &mut ChaCha8Rng, n: usize) -> (StaticSystem64, Vec<f64>, Vec<f64>) {
    let a = random_spd(r, n);
    let b = random_vec(r, n, 1.0);
    let mut terms = Vec::new();
    for i in 0..n {
        for j in 0..n {
            terms.push(format!("0.5*({:e})*q[{i}]*q[{j}]", a[i * n + j]));
        }
        terms.push(format!("({:e})*q[{i}]", b[i]));
    }
    let field = ExpressionField::parse(&terms.join(" + "), n, HashMap::new()).unwrap();
    (StaticSystem64::new(ScalarField64::new(field)).unwrap(), a, b)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn du_is_linear_in_the_displacement(seed in any::<u64>(), n in 1usize..=3, a in -3.0..3.0f64, b in -3.0..3.0f64) {
        let mut r = rng(seed);
        let (sys, _, _) = quadratic_energy(&mut r, n);
        let q = Point64::from(random_vec(&mut r, n, 1.0));
        let u = Vector64::from(random_vec(&mut r, n, 1.0));
        let v = Vector64::from(random_vec(&mut r, n, 1.0));
        let combo = &(&u * a) + &(&v * b);
        let lhs = du(&sys, &q, &combo).unwrap();
        let rhs = a * du(&sys, &q, &u).unwrap() + b * du(&sys, &q, &v).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + lhs.abs()));
    }

    #[test]
    fn spring_force_lies_in_the_constitutive_set(seed in any::<u64>(), n in 1usize..=3) {
        let mut r = rng(seed);
        let sho = Sho::random(&mut r, n);
        let sys = make_static_oscillator(&sho.params);
        let q = random_vec(&mut r, n, 2.0);
        let f: Vec<f64> = mat_vec(&sho.g, &sub(&q, &sho.center)).iter().map(|x| sho.k * x).collect();
        let res = constitutive_residual(&sys, &Point64::from(q), &Covector64::from(f)).unwrap();
        prop_assert!(res <= 1e-12, "residual {res}");
    }

    #[test]
    fn solved_equilibria_are_members(seed in any::<u64>(), n in 1usize..=3) {
        let mut r = rng(seed);
        let (sys, a, b) = quadratic_energy(&mut r, n);
        let f = random_vec(&mut r, n, 2.0);
        let init = Point64::from(random_vec(&mut r, n, 1.0));
        let q = solve_equilibrium(&sys, &Covector64::from(f.clone()), &init, 1e-12, 50).unwrap();
        prop_assert!(constitutive_member(&sys, &q, &Covector64::from(f.clone()), 1e-10).unwrap());
        // Aq + b = f
        let rhs: Vec<f64> = f.iter().zip(&b).map(|(x, y)| x - y).collect();
        let want = common::solve_dense(&a, &rhs);
        prop_assert!(common::max_abs_diff(q.as_slice(), &want) <= 1e-8);
    }

    #[test]
    fn shifted_forces_are_rejected(seed in any::<u64>(), n in 1usize..=3) {
        let mut r = rng(seed);
        let sho = Sho::random(&mut r, n);
        let sys = make_static_oscillator(&sho.params);
        let q = random_vec(&mut r, n, 1.0);
        let mut f: Vec<f64> = mat_vec(&sho.g, &sub(&q, &sho.center)).iter().map(|x| sho.k * x).collect();
        let i = (seed % n as u64) as usize;
        f[i] += uniform(&mut r, 1e-6, 1e-3);
        prop_assert!(!constitutive_member(&sys, &Point64::from(q), &Covector64::from(f), 1e-9).unwrap());
    }
}
