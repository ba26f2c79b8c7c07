use std::collections::BTreeMap;

use loopviro::factorization::pi_split_harmonic;
use loopviro::harmonic::{extended_residuals, uniton_solution, GridDomain, RationalFn, Uniton, UnitonVariant};
use loopviro::linalg::{self, max_norm};
use loopviro::random::{named_rng, normalized_group_loop};
use loopviro::virasoro::*;
use loopviro::{Annulus, AnnulusConfig, DoubleLoop, Error, GridParams, HmrcLevel, LaurentLoop, C64};
use num_rational::Rational64;
use proptest::prelude::*;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn cfg() -> AnnulusConfig {
    AnnulusConfig::default()
}

fn uniton() -> Uniton {
    Uniton::new(RationalFn::identity(), c(0.0, 0.0), UnitonVariant::Positive, 0.5).unwrap()
}

fn uniton_loop() -> LaurentLoop {
    uniton().frame(c(0.4, -0.3)).unwrap()
}

fn random_loop(seed: u64) -> LaurentLoop {
    let cfg = cfg();
    normalized_group_loop(&mut named_rng(seed, "virasoro"), 2, 3, 0.3, 0.5, cfg.samples, cfg.max_order()).unwrap()
}

fn test_loops() -> Vec<LaurentLoop> {
    vec![uniton_loop(), random_loop(1), random_loop(2)]
}

/// `(v w' - w v')` on dense maps `power -> coeff`, written independently of the library.
fn bracket_oracle(v: &BTreeMap<i32, C64>, w: &BTreeMap<i32, C64>) -> BTreeMap<i32, C64> {
    let mut out: BTreeMap<i32, C64> = BTreeMap::new();
    for (&p, &a) in v {
        for (&q, &b) in w {
            *out.entry(p + q - 1).or_insert(c(0.0, 0.0)) += a * b * (q - p) as f64;
        }
    }
    out.retain(|_, x| *x != c(0.0, 0.0));
    out
}

fn as_map(v: &VectorFieldLambda) -> BTreeMap<i32, C64> {
    v.terms().collect()
}

fn rel(a: &LaurentLoop, b: &LaurentLoop) -> f64 {
    a.coeff_distance(b) / b.coeff_norm().max(1e-300)
}

#[test]
fn generator_brackets() {
    let l = VectorFieldLambda::generator;
    assert_eq!(vira_bracket(&l(0), &l(1), DEFAULT_DEGREE_CAP).unwrap(), l(1));
    assert!(vira_bracket(&l(1), &l(1), DEFAULT_DEGREE_CAP).unwrap().is_zero());
    assert_eq!(vira_bracket(&l(1), &l(2), DEFAULT_DEGREE_CAP).unwrap(), l(3));
    for j in -1..4 {
        for k in -1..4 {
            let got = vira_bracket(&l(j), &l(k), DEFAULT_DEGREE_CAP).unwrap();
            assert_eq!(got, l(j + k).scale(c((k - j) as f64, 0.0)));
        }
    }
}

fn gaussian_field() -> impl Strategy<Value = VectorFieldLambda> {
    prop::collection::vec((-3i32..4, -4i32..5, -4i32..5), 1..5)
        .prop_map(|t| VectorFieldLambda::new(t.into_iter().map(|(p, re, im)| (p, c(re as f64, im as f64)))))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bracket_matches_oracle_and_satisfies_jacobi(u in gaussian_field(), v in gaussian_field(), w in gaussian_field()) {
        let b = |x: &VectorFieldLambda, y: &VectorFieldLambda| vira_bracket(x, y, DEFAULT_DEGREE_CAP).unwrap();
        prop_assert_eq!(as_map(&b(&u, &v)), bracket_oracle(&as_map(&u), &as_map(&v)));
        let jacobi = b(&u, &b(&v, &w)).add(&b(&v, &b(&w, &u))).add(&b(&w, &b(&u, &v)));
        prop_assert!(jacobi.is_zero());
        prop_assert_eq!(b(&u, &v), b(&v, &u).scale(c(-1.0, 0.0)));
    }
}

#[test]
fn reality_table() {
    assert_eq!(reality_extend(&VectorFieldLambda::generator(0)), VectorFieldLambda::new([(1, c(-1.0, 0.0))]));
    assert_eq!(reality_extend(&VectorFieldLambda::new([(1, c(0.0, 1.0))])), VectorFieldLambda::new([(1, c(0.0, 1.0))]));
    assert_eq!(reality_extend(&VectorFieldLambda::generator(2)), VectorFieldLambda::new([(-1, c(-1.0, 0.0))]));
}

#[test]
fn action_output_is_normalized_pure_and_real() {
    let cfg = cfg();
    let fields = [
        VectorFieldLambda::generator(0),
        VectorFieldLambda::generator(1),
        VectorFieldLambda::generator(2),
        VectorFieldLambda::from_half(&[c(0.5, 0.3), c(-0.2, 0.4), c(0.0, 0.1)]),
    ];
    for e in test_loops() {
        for v in &fields {
            let d = virasoro_action(v, &e, &cfg).unwrap();
            assert!(max_norm(&d.eval(c(1.0, 0.0)).unwrap()) <= 1e-12);
            let x = e.inverse(cfg.samples, cfg.max_order()).unwrap().mul(&d).unwrap();
            assert!(x.hmrc_residual(HmrcLevel::Algebra, 256).unwrap() <= 1e-10);
            let a = x.annulus();
            let pair = DoubleLoop::new(
                x.clone().with_annulus(Annulus::circle(a.r_in).unwrap()),
                x.clone().with_annulus(Annulus::circle(a.r_out).unwrap()),
            )
            .unwrap();
            let (plus, minus) = pi_split_harmonic(&pair, 256).unwrap();
            assert!(plus.with_annulus(a).sample_distance(&x, 256).unwrap() <= 1e-10);
            assert!(minus.near0.coeff_norm().max(minus.near_inf.coeff_norm()) <= 1e-10);
        }
    }
}

#[test]
fn identity_and_definitional_cases() {
    let cfg = cfg();
    let id = LaurentLoop::identity(2, Annulus::punctured(0.5).unwrap());
    for j in 0..4 {
        assert_eq!(generator_action(j, &id, &cfg).unwrap().coeff_norm(), 0.0);
    }
    let e = random_loop(3);
    let a = generator_action(0, &e, &cfg).unwrap();
    let b = virasoro_action(&VectorFieldLambda::from_half(&[c(1.0, 0.0)]), &e, &cfg).unwrap();
    assert_eq!(a, b);
}

#[test]
fn action_is_additive_and_real_homogeneous() {
    let cfg = cfg();
    let e = random_loop(4);
    let v = VectorFieldLambda::from_half(&[c(0.5, 0.3), c(-0.2, 0.4)]);
    let w = VectorFieldLambda::from_half(&[c(0.0, 0.0), c(0.1, -0.7), c(0.3, 0.0)]);
    let dv = virasoro_action(&v, &e, &cfg).unwrap();
    let dw = virasoro_action(&w, &e, &cfg).unwrap();
    for alpha in [2.0, -0.375, 1e-3] {
        let scaled = virasoro_action(&v.scale(c(alpha, 0.0)), &e, &cfg).unwrap();
        assert!(rel(&scaled, &dv.scale(c(alpha, 0.0))) <= 1e-13);
    }
    assert!(rel(&virasoro_action(&v.add(&w), &e, &cfg).unwrap(), &dv.add(&dw).unwrap()) <= 1e-13);
    // An imaginary multiple is not `i` times the output: the ∞ side sees the conjugate.
    let iv = virasoro_action(&v.scale(c(0.0, 1.0)), &e, &cfg).unwrap();
    assert!(rel(&iv, &dv.scale(c(0.0, 1.0))) > 1e-3);
}

#[test]
fn flipped_infinity_sign_breaks_reality() {
    let cfg = cfg();
    for e in test_loops() {
        for j in [0, 2] {
            let v = VectorFieldLambda::generator(j);
            let good = action_parts(&v, &reality_extend(&v), &e, &cfg).unwrap();
            let bad = action_parts(&v, &reality_extend(&v).scale(c(-1.0, 0.0)), &e, &cfg).unwrap();
            assert!(good.w_reality <= 1e-10);
            assert!(bad.w_reality >= 1e-3, "{}", bad.w_reality);
        }
    }
}

#[test]
fn membership_is_enforced() {
    let cfg = cfg();
    let e = uniton_loop();
    let v = VectorFieldLambda::generator(0);
    assert!(matches!(virasoro_action(&v, &e.scale(c(2.0, 0.0)), &cfg), Err(Error::NotNormalized(_))));
    let shifted = e.add(&LaurentLoop::monomial(linalg::identity(2).scale(0.05), 2, e.annulus())).unwrap();
    let shifted = shifted.sub(&LaurentLoop::constant(linalg::identity(2).scale(0.05), e.annulus())).unwrap();
    assert!(matches!(virasoro_action(&v, &shifted, &cfg), Err(Error::RealityViolation(_))));
}

#[test]
fn group_flow_matches_generator() {
    let cfg = cfg();
    let fields = [VectorFieldLambda::generator(0), VectorFieldLambda::from_half(&[c(0.5, 0.3), c(-0.2, 0.4)])];
    for e in [uniton_loop(), random_loop(5)] {
        for v in &fields {
            let d = virasoro_action(v, &e, &cfg).unwrap();
            let mut slopes = Vec::new();
            for t in [1e-3, 1e-4] {
                let plus = flow_loop(&HoloMap::from_field(v, t).unwrap(), &e, &cfg, 1e-13).unwrap();
                let minus = flow_loop(&HoloMap::from_field(v, -t).unwrap(), &e, &cfg, 1e-13).unwrap();
                let one = plus.sub(&e).unwrap().scale(c(1.0 / t, 0.0)).sample_distance(&d, 256).unwrap();
                slopes.push(one / t);
                if t == 1e-4 {
                    let central = plus.sub(&minus).unwrap().scale(c(0.5 / t, 0.0)).sample_distance(&d, 256).unwrap();
                    assert!(central <= 1e-6, "{central}");
                }
            }
            let stability = slopes[0] / slopes[1];
            assert!((0.8..1.25).contains(&stability), "{slopes:?}");
        }
    }
}

#[test]
fn group_action_is_a_right_action() {
    let cfg = cfg();
    let f = HoloMap::from_field(&VectorFieldLambda::from_half(&[c(0.02, 0.01), c(0.03, 0.0)]), 1.0).unwrap();
    let g = HoloMap::from_field(&VectorFieldLambda::from_half(&[c(-0.01, 0.02), c(0.0, 0.0), c(0.02, -0.01)]), 1.0).unwrap();
    for e in [uniton_loop(), random_loop(6)] {
        let twice = flow_loop(&f, &flow_loop(&g, &e, &cfg, 1e-13).unwrap(), &cfg, 1e-13).unwrap();
        let once = flow_loop(&g.compose(&f), &e, &cfg, 1e-13).unwrap();
        assert!(twice.sample_distance(&once, 256).unwrap() <= 1e-8);
    }
}

#[test]
fn group_action_on_solution() {
    let cfg = cfg();
    let g = GridDomain::new(&GridParams { x0: -0.3, x1: 0.3, y0: -0.3, y1: 0.3, h: 0.03, basepoint: None }).unwrap();
    let e = uniton_solution(&uniton(), g).unwrap();
    assert_eq!(group_action(&HoloMap::identity(), &e, &cfg, 1e-12).unwrap().loops, e.loops);
    let f = HoloMap::from_field(&VectorFieldLambda::from_half(&[c(0.1, 0.05), c(0.2, 0.0)]), 0.2).unwrap();
    let out = group_action(&f, &e, &cfg, 1e-12).unwrap();
    assert_eq!(out.excluded_count(), 0);
    let before = extended_residuals(&e, 64).unwrap();
    let after = extended_residuals(&out, 64).unwrap();
    assert!(after.lambda_constancy() <= 10.0 * before.lambda_constancy(), "{after:?} vs {before:?}");
    assert!(after.basepoint <= 1e-12 && after.e1 <= 1e-10 && after.hmrc <= 1e-10);
    assert!(out.loops.iter().zip(&e.loops).any(|(a, b)| a.sample_distance(b, 64).unwrap() > 1e-3));
    let big = HoloMap::from_field(&VectorFieldLambda::generator(0), 0.3).unwrap();
    assert!(matches!(group_action(&big, &e, &cfg, 1e-12), Err(Error::MapTooLarge(_))));
}

fn probes() -> Vec<C64> {
    (0..8).map(|k| C64::from_polar(0.5, 0.3 + k as f64 * 0.785)).collect()
}

#[test]
fn flows_are_tangent_and_control_is_not() {
    let cfg = cfg();
    let u = uniton();
    for j in 0..3 {
        let r = tangency_check(&u, &VectorFieldLambda::generator(j), &[1e-2, 1e-3], &probes(), 2e-3, &cfg, 1e-13).unwrap();
        assert!(r.tangent && r.control_fails_first_order, "{r:?}");
        for row in &r.rows {
            assert!(row.group <= 10.0 * r.floor.max(1e-12), "{row:?}");
        }
    }
    // L_0 moves unitons; its linearization leaves a genuine second-order residual.
    let r = tangency_check(&u, &VectorFieldLambda::generator(0), &[1e-2, 1e-3], &probes(), 2e-3, &cfg, 1e-13).unwrap();
    assert!(r.rows.iter().all(|row| row.residual > 100.0 * r.floor));
}

#[test]
fn unitons_are_fixed_by_higher_generators() {
    let cfg = cfg();
    let e = uniton_loop();
    for j in 1..5 {
        assert!(generator_action(j, &e, &cfg).unwrap().coeff_norm() <= 1e-13);
        let f = HoloMap::from_field(&VectorFieldLambda::generator(j as i32), 0.05).unwrap();
        assert!(flow_loop(&f, &e, &cfg, 1e-13).unwrap().sample_distance(&e, 256).unwrap() <= 1e-12);
    }
}

#[test]
fn bracket_representation() {
    let cfg = cfg();
    let l = VectorFieldLambda::generator;
    for e in [uniton_loop(), random_loop(7)] {
        for (j, k) in [(0, 1), (1, 2), (0, 2)] {
            let dev = bracket_representation_check(&l(j), &l(k), &e, DEFAULT_BRACKET_STEP, &cfg).unwrap();
            assert!(dev <= 1e-4, "({j},{k}) {dev}");
        }
        assert!(bracket_representation_check(&l(1), &l(1), &e, DEFAULT_BRACKET_STEP, &cfg).unwrap() <= 1e-8);
    }
    let id = LaurentLoop::identity(2, Annulus::punctured(0.5).unwrap());
    assert_eq!(bracket_representation_check(&l(0), &l(2), &id, DEFAULT_BRACKET_STEP, &cfg).unwrap(), 0.0);
    // The reversed antisymmetrization lands on the negative image.
    let e = random_loop(8);
    let fd = fd_commutator(&l(0), &l(1), &e, DEFAULT_BRACKET_STEP, &cfg).unwrap();
    let image = generator_action(1, &e, &cfg).unwrap();
    assert!(fd.scale(c(-1.0, 0.0)).sample_distance(&image, 256).unwrap() > 0.1);
}

fn r(n: i64, d: i64) -> Rational64 {
    Rational64::new(n, d)
}

/// `Σ c_k λ^k` evaluated exactly.
fn eval_exact(p: &[Rational64], x: Rational64) -> Rational64 {
    p.iter().rev().fold(r(0, 1), |acc, c| acc * x + c)
}

#[test]
fn mobius_closed_forms() {
    let one = r(1, 1);
    assert!(mobius_field(-1).unwrap().same_field(&RationalField::new(vec![r(1, 2), one, r(1, 2)], vec![one]).unwrap()));
    assert!(mobius_field(0).unwrap().same_field(&RationalField::new(vec![r(-1, 2), r(0, 1), r(1, 2)], vec![one]).unwrap()));
    assert!(mobius_field(1).unwrap().same_field(&RationalField::new(vec![r(1, 2), -one, r(1, 2)], vec![one]).unwrap()));
    // Chain rule: t^{j+1} d/dt with t = (λ-1)/(λ+1) and dλ/dt = (λ+1)^2 / 2.
    for j in -1..3i32 {
        let f = mobius_field(j).unwrap();
        for x in [r(1, 3), r(-5, 7), r(2, 1), r(9, 4)] {
            let t = (x - one) / (x + one);
            let expect = (0..j + 1).fold(one, |acc, _| acc * t) * (x + one) * (x + one) / r(2, 1);
            assert_eq!(eval_exact(f.num(), x) / eval_exact(f.den(), x), expect);
        }
    }
}

#[test]
fn mobius_embedding_is_a_lie_map() {
    for j in -1..3 {
        for k in -1..3 {
            let lhs = mobius_field(j).unwrap().bracket(&mobius_field(k).unwrap());
            if j == k {
                assert!(lhs.is_zero());
            } else {
                let rhs = mobius_field(j + k).unwrap().scale(r((k - j) as i64, 1));
                assert!(lhs.same_field(&rhs), "({j},{k})");
            }
        }
    }
}

#[test]
fn mobius_expansions_converge_on_both_circles() {
    for j in -1..3 {
        let m = mobius_pushforward(j, 40).unwrap();
        let near0 = to_vector_field(&m.near_zero);
        let near_inf = to_vector_field(&m.near_infinity);
        for (field, lambda) in [(&near0, C64::from_polar(0.5, 0.7)), (&near_inf, C64::from_polar(2.0, -1.1))] {
            let exact = (lambda - 1.0).powi(j + 1) * (lambda + 1.0).powi(1 - j) / 2.0;
            assert!((field.eval(lambda) - exact).norm() <= 1e-9 * exact.norm().max(1.0), "j={j}");
        }
    }
}

#[test]
fn schwarz_decoupling() {
    let cfg = cfg();
    let e = random_real_loop(&mut named_rng(9, "schwarz"), 2, 3, 0.3, 0.5, &cfg).unwrap();
    assert!(real_reality_residual(&e, 256).unwrap() <= 1e-12);
    let re = |xs: &[f64]| VectorFieldLambda::from_half(&xs.iter().map(|&x| c(x, 0.0)).collect::<Vec<_>>());
    let w = re(&[0.4, -0.3, 0.2]);
    let w2 = re(&[-0.1, 0.0, 0.5, 0.25]);
    let v = VectorFieldLambda::new([(1, c(0.3, 0.0)), (0, c(-0.6, 0.0)), (-1, c(0.15, 0.0))]);
    let v2 = VectorFieldLambda::new([(1, c(-0.2, 0.0)), (-2, c(0.45, 0.0))]);
    let zero = VectorFieldLambda::zero();
    let act = |w: &VectorFieldLambda, v: &VectorFieldLambda| {
        schwarz_action(&VirasoroPairR::new(w.clone(), v.clone()).unwrap(), &e, &cfg).unwrap()
    };
    let both = act(&w, &v);
    let sum = act(&w, &zero).add(&act(&zero, &v)).unwrap();
    assert_eq!(both, sum);
    assert!(both.coeff_norm() > 1e-2);
    let (a, b) = (1.75, -0.5);
    let lhs = act(&w.scale(c(a, 0.0)).add(&w2.scale(c(b, 0.0))), &v);
    let rhs = act(&w, &zero).scale(c(a, 0.0)).add(&act(&w2, &zero).scale(c(b, 0.0))).unwrap().add(&act(&zero, &v)).unwrap();
    assert!(rel(&lhs, &rhs) <= 1e-13);
    let lhs = act(&w, &v.scale(c(a, 0.0)).add(&v2.scale(c(b, 0.0))));
    let rhs = act(&w, &zero).add(&act(&zero, &v).scale(c(a, 0.0))).unwrap().add(&act(&zero, &v2).scale(c(b, 0.0))).unwrap();
    assert!(rel(&lhs, &rhs) <= 1e-13);
    assert_eq!(act(&zero, &zero).coeff_norm(), 0.0);
    let id = LaurentLoop::identity(2, Annulus::punctured(0.5).unwrap());
    let pair = VirasoroPairR::new(w, v).unwrap();
    assert_eq!(schwarz_action(&pair, &id, &cfg).unwrap().coeff_norm(), 0.0);
    assert!(matches!(schwarz_action(&pair, &uniton_loop().scale(c(1.5, 0.0)), &cfg), Err(Error::RealityViolation(_))));
}
