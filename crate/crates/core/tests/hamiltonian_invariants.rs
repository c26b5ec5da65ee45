mod common;

use common::{nonlinear_system, random_vec, rng, uniform, Sho};
use proptest::prelude::*;
use rand::Rng;
use varmech::affine::pair;
use varmech::distributions::infinitesimal_membership;
use varmech::hamiltonian::{
    generating_family_membership, hamiltonian_directional_chain, hamiltonian_membership, hamiltonian_value, legendre,
    legendre_inverse,
};
use varmech::systems::make_lagrangian_oscillator;
use varmech::{Covector64, HamiltonianSystem64, PhasePoint, Point64, Vector64};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn legendre_round_trips(seed in any::<u64>()) {
        let mut r = rng(seed);
        let sys = nonlinear_system(&mut r);
        let q = Point64::from(random_vec(&mut r, 2, 1.0));
        let p = Covector64::from(random_vec(&mut r, 2, 2.0));
        let v = legendre_inverse(&sys, &q, &p, None, 1e-13, 50).unwrap();
        let back = legendre(&sys, &q, &v).unwrap();
        prop_assert!((&back - &p).norm_inf() <= 1e-9);
        // and the other way round
        let v0 = Vector64::from(random_vec(&mut r, 2, 2.0));
        let again = legendre_inverse(&sys, &q, &legendre(&sys, &q, &v0).unwrap(), None, 1e-13, 50).unwrap();
        prop_assert!((&again - &v0).norm_inf() <= 1e-9);
    }

    #[test]
    fn stationarity_gradients_match_differences_of_h(seed in any::<u64>()) {
        let mut r = rng(seed);
        let sys = nonlinear_system(&mut r);
        let ham = HamiltonianSystem64::derived(sys.clone(), 1e-14);
        let q = random_vec(&mut r, 2, 1.0);
        let p = random_vec(&mut r, 2, 1.0);
        let (gq, gp) = ham.gradients(&Point64::from(q.clone()), &Covector64::from(p.clone())).unwrap();
        let h = 1e-4;
        let value = |q: &[f64], p: &[f64]| {
            hamiltonian_value(&sys, &Point64::from(q.to_vec()), &Covector64::from(p.to_vec()), 1e-14).unwrap()
        };
        for i in 0..2 {
            let shifted = |v: &[f64], s: f64| {
                let mut v = v.to_vec();
                v[i] += s;
                v
            };
            let dq = (value(&shifted(&q, h), &p) - value(&shifted(&q, -h), &p)) / (2.0 * h);
            let dp = (value(&q, &shifted(&p, h)) - value(&q, &shifted(&p, -h))) / (2.0 * h);
            prop_assert!((gq[i] - dq).abs() <= 1e-6, "dH/dq {} vs {}", gq[i], dq);
            prop_assert!((gp[i] - dp).abs() <= 1e-6, "dH/dp {} vs {}", gp[i], dp);
        }
    }

    #[test]
    fn stationarity_shortcut_matches_the_chain_rule(seed in any::<u64>()) {
        let mut r = rng(seed);
        let sys = nonlinear_system(&mut r);
        let ham = HamiltonianSystem64::derived(sys.clone(), 1e-14);
        let q = Point64::from(random_vec(&mut r, 2, 1.0));
        let p = Covector64::from(random_vec(&mut r, 2, 1.0));
        let dq = Vector64::from(random_vec(&mut r, 2, 1.0));
        let dp = Covector64::from(random_vec(&mut r, 2, 1.0));
        let (gq, gp) = ham.gradients(&q, &p).unwrap();
        let shortcut = pair(&gq, &dq).unwrap() + pair(&dp, &gp).unwrap();
        let chain = hamiltonian_directional_chain(&sys, &q, &p, &dq, &dp, 1e-14).unwrap();
        prop_assert!((shortcut - chain).abs() <= 1e-8, "{shortcut} vs {chain}");
    }

    #[test]
    fn three_membership_tests_agree(seed in any::<u64>()) {
        let mut r = rng(seed);
        let sys = nonlinear_system(&mut r);
        let ham = HamiltonianSystem64::derived(sys.clone(), 1e-13);
        for _ in 0..10 {
            let q = Point64::from(random_vec(&mut r, 2, 1.0));
            let v = Vector64::from(random_vec(&mut r, 2, 1.0));
            let p = legendre(&sys, &q, &v).unwrap();
            let r_force = varmech::calculus::partial_q(sys.lagrangian(), &q, &v, 0.0).unwrap();
            let mut x = PhasePoint::new(q, p, v, r_force).unwrap();
            let member = r.gen_bool(0.5);
            if !member {
                let kick = uniform(&mut r, 1e-5, 1e-2) * if r.gen_bool(0.5) { 1.0 } else { -1.0 };
                let i = r.gen_range(0..2);
                match r.gen_range(0..3) {
                    0 => x.p = &x.p + &(&Covector64::basis(2, i) * kick),
                    1 => x.qdot = &x.qdot + &(&Vector64::basis(2, i) * kick),
                    _ => x.r = &x.r + &(&Covector64::basis(2, i) * kick),
                }
            }
            let a = infinitesimal_membership(&sys, &x, 1e-7).unwrap();
            let b = hamiltonian_membership(&ham, &x, 1e-7).unwrap();
            let c = generating_family_membership(&sys, &x, 1e-7).unwrap();
            prop_assert_eq!((a, b, c), (member, member, member));
        }
    }

    #[test]
    fn oscillator_hamiltonian_is_the_quadratic_form(seed in any::<u64>(), n in 1usize..=3) {
        let mut r = rng(seed);
        let sho = Sho::random(&mut r, n);
        let sys = make_lagrangian_oscillator(&sho.params);
        let q = random_vec(&mut r, n, 2.0);
        let p = random_vec(&mut r, n, 2.0);
        let got = hamiltonian_value(&sys, &Point64::from(q.clone()), &Covector64::from(p.clone()), 1e-14).unwrap();
        let want = sho.hamiltonian(&q, &p);
        prop_assert!((got - want).abs() <= 1e-10 * want.abs().max(1.0), "{got} vs {want}");
        let v = legendre_inverse(&sys, &Point64::from(q.clone()), &Covector64::from(p.clone()), None, 1e-14, 50).unwrap();
        let momentum = sho.momentum(v.as_slice());
        prop_assert!(common::max_abs_diff(&momentum, &p) <= 1e-10);
    }
}
