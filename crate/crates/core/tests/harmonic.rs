use loopviro::harmonic::{
    extended_from_connection, extended_from_connection_along, extended_residuals, frame_at_lambda, harmonic_residual,
    lambda_constancy, maurer_cartan, restrict_harmonic, uniton_extended, zero_curvature_residual, ExtendedSolution,
    GridDomain, HarmonicMapGrid, MaurerCartanPair, PathOrder, RationalFn, Uniton, UnitonVariant,
};
use loopviro::linalg::{self, max_dist};
use loopviro::{AnnulusConfig, CMatrix, Error, GridParams, C64};
use nalgebra::DVector;
use proptest::prelude::*;

fn grid(half: f64, h: f64) -> GridDomain {
    GridDomain::new(&GridParams { x0: -half, x1: half, y0: -half, y1: half, h, basepoint: None }).unwrap()
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn diag(a: C64, b: C64) -> CMatrix {
    CMatrix::from_diagonal(&DVector::from_vec(vec![a, b]))
}

/// Orthogonal projection onto `(1, w)^T`, written out entrywise.
fn proj(w: C64) -> CMatrix {
    let n = 1.0 + w.norm_sqr();
    CMatrix::from_row_slice(2, 2, &[c(1.0 / n, 0.0), w.conj() / n, w / n, c(w.norm_sqr() / n, 0.0)])
}

/// `(π_p + λ^{-1} π_p^⊥)(π + λ π^⊥)` for `f(z) = z`.
fn uniton_oracle(p: C64, z: C64, lambda: C64) -> CMatrix {
    let id = linalg::identity(2);
    let (pp, pz) = (proj(p), proj(z));
    (&pp + (&id - &pp) * lambda.inv()) * (&pz + (&id - &pz) * lambda)
}

fn uniton_fields(g: GridDomain) -> (Uniton, MaurerCartanPair) {
    let u = Uniton::new(RationalFn::identity(), g.basepoint_z(), UnitonVariant::Positive, 0.5).unwrap();
    let mc = MaurerCartanPair::from_fn(g, |z| u.maurer_cartan(z)).unwrap();
    (u, mc)
}

#[test]
fn geodesic_maurer_cartan_is_constant() {
    let a = 1.3;
    for h in [0.05, 0.025] {
        let g = grid(1.0, h);
        let s = HarmonicMapGrid::from_fn(g, |z| diag(C64::from_polar(1.0, a * z.re), C64::from_polar(1.0, -a * z.re)));
        let mc = maurer_cartan(&s).unwrap();
        let expect = diag(c(0.0, a / 2.0), c(0.0, -a / 2.0));
        for (ai, bi) in mc.a.values.iter().zip(&mc.b.values) {
            assert!(max_dist(ai, &expect) <= a.powi(3) * h * h);
            assert!(max_dist(bi, &expect) <= a.powi(3) * h * h);
        }
        assert!(harmonic_residual(&s).unwrap().max() <= 1e-10);
    }
}

#[test]
fn quadratic_phase_is_not_harmonic() {
    let g = GridDomain::new(&GridParams { x0: 0.0, x1: 1.0, y0: 0.0, y1: 1.0, h: 0.02, basepoint: None }).unwrap();
    let s = HarmonicMapGrid::from_fn(g, |z| {
        let t = z.re * z.re;
        diag(C64::from_polar(1.0, t), C64::from_polar(1.0, -t))
    });
    let r = harmonic_residual(&s).unwrap();
    let min = r.values().iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(min >= 0.1, "smallest residual {min}");
}

#[test]
fn uniton_fields_converge_at_second_order() {
    let mut curv = Vec::new();
    let mut harm = Vec::new();
    let mut reality = Vec::new();
    for h in [0.04, 0.02] {
        let g = grid(0.4, h);
        let e = uniton_extended(&RationalFn::identity(), g, &AnnulusConfig::default(), 1e-5).unwrap();
        let s = restrict_harmonic(&e).unwrap();
        let mc = maurer_cartan(&s).unwrap();
        let (zh, zf) = zero_curvature_residual(&mc).unwrap();
        curv.push(zh.max().max(zf.max()));
        harm.push(harmonic_residual(&s).unwrap().max());
        reality.push(mc.reality_defect());
    }
    for series in [&curv, &harm, &reality] {
        let ratio = series[0] / series[1];
        assert!((3.0..=5.0).contains(&ratio), "{series:?}");
    }
}

#[test]
fn constant_f_gives_identity_solution() {
    let g = grid(0.3, 0.05);
    let f = RationalFn::parse("0").unwrap();
    let e = uniton_extended(&f, g, &AnnulusConfig::default(), 1e-5).unwrap();
    let r = extended_residuals(&e, 64).unwrap();
    assert_eq!((r.lambda_constancy(), r.e1, r.basepoint), (0.0, 0.0, 0.0));
    let s = restrict_harmonic(&e).unwrap();
    assert!(s.values().iter().all(|m| linalg::dist_to_identity(m) == 0.0));
}

#[test]
fn uniton_matches_closed_form_and_is_normalized() {
    let g = grid(0.5, 0.05);
    let e = uniton_extended(&RationalFn::identity(), g, &AnnulusConfig::default(), 1e-5).unwrap();
    assert_eq!(e.variant, Some(UnitonVariant::Positive));
    let p = g.basepoint_z();
    for idx in (0..g.len()).step_by(7) {
        let (i, j) = g.coords(idx);
        let z = g.point(i, j);
        for lam in [c(-1.0, 0.0), c(0.0, 0.5), c(0.0, 2.0), C64::from_polar(0.5, 1.0)] {
            assert!(max_dist(&e.loops[idx].eval(lam).unwrap(), &uniton_oracle(p, z, lam)) < 1e-14);
        }
    }
    let r = extended_residuals(&e, 256).unwrap();
    assert_eq!((r.e1, r.basepoint, r.tail), (0.0, 0.0, 0.0));
    assert!(r.hmrc <= 1e-10 && r.unitarity <= 1e-8);
    let s = restrict_harmonic(&e).unwrap();
    let id = linalg::identity(2);
    for idx in 0..g.len() {
        let (i, j) = g.coords(idx);
        let expect = (proj(p) * c(2.0, 0.0) - &id) * (proj(g.point(i, j)) * c(2.0, 0.0) - &id);
        assert!(max_dist(&s.values()[idx], &expect) < 1e-14);
    }
    let d = s.defects();
    assert!(d.unitarity < 1e-12 && d.determinant < 1e-12 && d.basepoint < 1e-14);
}

#[test]
fn lambda_constancy_converges_at_second_order() {
    let mut res = Vec::new();
    for h in [0.04, 0.02] {
        let e = uniton_extended(&RationalFn::identity(), grid(0.4, h), &AnnulusConfig::default(), 1e-5).unwrap();
        let (a, b, _) = lambda_constancy(&e).unwrap();
        res.push(a.max(b));
    }
    let ratio = res[0] / res[1];
    assert!((3.0..=5.0).contains(&ratio), "{res:?}");
}

#[test]
fn perturbed_coefficient_breaks_constancy() {
    let g = grid(0.3, 0.05);
    let mut e = uniton_extended(&RationalFn::identity(), g, &AnnulusConfig::default(), 1e-5).unwrap();
    let clean = extended_residuals(&e, 64).unwrap().lambda_constancy();
    let (i, j) = (3, 4);
    e.at_mut(i, j).coeff_mut(2)[(0, 1)] += c(1e-3, 0.0);
    let (a, b, worst) = lambda_constancy(&e).unwrap();
    assert!(a.max(b) >= 1e-4 && a.max(b) > 10.0 * clean);
    let (wi, wj) = worst.unwrap();
    assert!(wi.abs_diff(i) + wj.abs_diff(j) <= 1);
}

#[test]
fn under_resolved_data_fails_both_orientations() {
    let f = RationalFn::parse("5z^6").unwrap();
    let err = uniton_extended(&f, grid(1.0, 0.1), &AnnulusConfig::default(), 1e-5).unwrap_err();
    assert!(matches!(err, Error::Construction(_)), "{err}");
    let on_grid = RationalFn::parse("1/(z - 0.1)").unwrap();
    assert!(matches!(uniton_extended(&on_grid, grid(0.3, 0.05), &AnnulusConfig::default(), 1e-5), Err(Error::Pole(_))));
}

#[test]
fn connection_round_trip_matches_closed_form() {
    let g = grid(0.5, 0.05);
    let (_, mc) = uniton_fields(g);
    let cfg = AnnulusConfig { samples: 64, order: 8, ..AnnulusConfig::default() };
    let out = extended_from_connection(&mc, &cfg).unwrap();
    assert!(out.assembly_error < 1e-6);
    let p = g.basepoint_z();
    for (idx, l) in out.solution.loops.iter().enumerate() {
        let (i, j) = g.coords(idx);
        for lam in [c(-1.0, 0.0), c(0.0, 0.5), c(0.0, 2.0)] {
            let err = max_dist(&l.eval(lam).unwrap(), &uniton_oracle(p, g.point(i, j), lam));
            assert!(err <= 1e-5, "node ({i},{j}) lambda {lam}: {err:e}");
        }
    }
    let ones = frame_at_lambda(&mc, c(1.0, 0.0), PathOrder::HorizontalFirst).unwrap();
    assert!(ones.iter().all(|m| linalg::dist_to_identity(m) == 0.0));
    let r = extended_residuals(&out.solution, 128).unwrap();
    assert!(r.e1 <= 1e-10 && r.basepoint <= 1e-10, "{r:?}");
    // Reality and unitarity hold up to the O(h^4) integration error.
    assert!(r.hmrc <= 1e-6 && r.unitarity <= 1e-6, "{r:?}");
}

#[test]
fn integration_is_path_independent_to_fourth_order() {
    let mut diffs = Vec::new();
    for h in [0.1, 0.05] {
        let (_, mc) = uniton_fields(grid(0.5, h));
        let lam = c(0.0, 2.0);
        let a = frame_at_lambda(&mc, lam, PathOrder::HorizontalFirst).unwrap();
        let b = frame_at_lambda(&mc, lam, PathOrder::VerticalFirst).unwrap();
        diffs.push(a.iter().zip(&b).map(|(x, y)| max_dist(x, y)).fold(0.0, f64::max));
    }
    assert!(diffs[1] <= 2.0 * 0.05f64.powi(4), "{diffs:?}");
    assert!(diffs[0] / diffs[1] >= 8.0, "{diffs:?}");
    let cfg = AnnulusConfig { samples: 32, order: 4, ..AnnulusConfig::default() };
    let (_, mc) = uniton_fields(grid(0.2, 0.1));
    let v = extended_from_connection_along(&mc, &cfg, PathOrder::VerticalFirst).unwrap();
    assert!(v.assembly_error < 1e-6);
}

#[test]
fn extended_solution_json_round_trip() {
    let e = uniton_extended(&RationalFn::identity(), grid(0.2, 0.1), &AnnulusConfig::default(), 1e-5).unwrap();
    let text = serde_json::to_string(&e).unwrap();
    let back: ExtendedSolution = serde_json::from_str(&text).unwrap();
    assert_eq!(back, e);
    let s = restrict_harmonic(&e).unwrap();
    let text = serde_json::to_string(&s).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    for key in ["x0", "x1", "y0", "y1", "h", "p", "values"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert_eq!(serde_json::from_str::<HarmonicMapGrid>(&text).unwrap(), s);
}

#[test]
fn restriction_rejects_broken_reality() {
    let mut e = ExtendedSolution::identity(grid(0.2, 0.1), 2, &AnnulusConfig::default()).unwrap();
    e.at_mut(1, 1).coeff_mut(1)[(0, 0)] += c(1e-3, 0.0);
    assert!(matches!(restrict_harmonic(&e), Err(Error::NonUnitary(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn normalization_holds_for_any_mobius_data(
        a in -2.0f64..2.0, b in -2.0f64..2.0, pr in 2.0f64..4.0, pi in -1.0f64..1.0
    ) {
        let f = RationalFn::new(vec![c(a, b), c(1.0, 0.0)], vec![c(-pr, -pi), c(1.0, 0.0)]).unwrap();
        let g = grid(0.3, 0.1);
        let u = Uniton::new(f, g.basepoint_z(), UnitonVariant::Positive, 0.5).unwrap();
        let e = loopviro::harmonic::uniton_solution(&u, g).unwrap();
        let r = extended_residuals(&e, 64).unwrap();
        prop_assert!(r.e1 <= 1e-14 && r.basepoint <= 1e-14);
        prop_assert!(r.hmrc <= 1e-12 && r.unitarity <= 1e-12);
    }
}
