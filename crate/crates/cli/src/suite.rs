use loopviro::factorization::{birkhoff_harmonic, iwasawa_gram_schmidt, pi_split_harmonic};
use loopviro::harmonic::{extended_residuals, probe_constancy, uniton_solution, GridDomain, RationalFn, Uniton, UnitonVariant};
use loopviro::linalg;
use loopviro::random::{hmrc_algebra_pair, hmrc_group_pair, named_rng, unimodular};
use loopviro::report::ResidualReport;
use loopviro::virasoro::{
    bracket_representation_check, flow_loop, tangency_check, virasoro_action_parts, HoloMap, VectorFieldLambda,
    VirasoroPairR, CONTROL_FIRST_ORDER, DEFAULT_BRACKET_STEP, TANGENCY_SPREAD,
};
use loopviro::{DoubleLoop, GridParams, HmrcLevel, Result, C64};

use crate::commands::{
    decoupling_defect, default_plus_loop, push_mobius_checks, split_sum_defect, Ctx, CHECK_SAMPLES, RANDOM_SCALE,
};

const TRIALS: usize = 10;

fn uniton(eps: f64) -> Result<Uniton> {
    Uniton::new(RationalFn::identity(), C64::new(0.0, 0.0), UnitonVariant::Positive, eps)
}

fn probes() -> Vec<C64> {
    (0..8).map(|k| C64::from_polar(0.5, 0.3 + k as f64 * 0.785)).collect()
}

pub fn run(ctx: &Ctx, report: &mut ResidualReport) -> Result<()> {
    let cfg = ctx.cfg;
    let a = &cfg.annulus;
    let tol = &cfg.tolerances;

    let mut rng = named_rng(cfg.seed, "suite/factorize");
    let (mut residual, mut membership) = (0.0f64, 0.0f64);
    for _ in 0..TRIALS {
        let q = hmrc_group_pair(&mut rng, 2, 6, RANDOM_SCALE, a.eps, a.samples, a.max_order())?;
        let pair = birkhoff_harmonic(&q, a, tol.factorization)?;
        residual = residual.max(pair.residual);
        membership = membership.max(pair.diagnostics.membership());
    }
    report.push("factorization_residual", residual, tol.factorization);
    report.push("factorization_membership", membership, tol.factorization);

    let mut rng = named_rng(cfg.seed, "suite/project");
    let (mut idem, mut sum, mut real) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..TRIALS {
        let w = hmrc_algebra_pair(&mut rng, 2, 6, 10.0 * RANDOM_SCALE, a.eps)?;
        let (plus, minus) = pi_split_harmonic(&w, a.samples)?;
        idem = idem.max(pi_split_harmonic(&DoubleLoop::lift(&plus)?, a.samples)?.0.coeff_distance(&plus));
        sum = sum.max(split_sum_defect(&w, &plus, &minus)?);
        real = real.max(plus.hmrc_residual(HmrcLevel::Algebra, a.samples)?);
    }
    report.push("projection_idempotence", idem, 0.0);
    report.push("projection_sum_defect", sum, tol.reality);
    report.push("projection_hmrc", real, tol.reality);

    let mut rng = named_rng(cfg.seed, "suite/iwasawa");
    let (mut unitary, mut product) = (0.0f64, 0.0f64);
    for _ in 0..TRIALS {
        let g = unimodular(&mut rng, 3);
        let (u, r) = iwasawa_gram_schmidt(&g)?;
        unitary = unitary.max(linalg::dist_to_identity(&(u.adjoint() * &u)));
        product = product.max(linalg::max_dist(&(&u * &r), &g));
    }
    report.push("iwasawa_unitarity", unitary, tol.reality);
    report.push("iwasawa_product", product, tol.reality);

    let u = uniton(a.eps)?;
    let mut constancy = 0.0f64;
    for z in probes() {
        constancy = constancy.max(probe_constancy(&u, z, 2e-3)?);
    }
    report.push("uniton_probe_constancy", constancy, tol.pde);
    let grid = GridDomain::new(&GridParams { x0: -0.3, x1: 0.3, y0: -0.3, y1: 0.3, h: 0.05, basepoint: None })?;
    let res = extended_residuals(&uniton_solution(&u, grid)?, CHECK_SAMPLES)?;
    report.push("uniton_e1_identity", res.e1, tol.reality);
    report.push("uniton_hmrc", res.hmrc, tol.reality);
    report.push("uniton_basepoint_identity", res.basepoint, tol.reality);

    let e = default_plus_loop(cfg, "suite/virasoro")?;
    let mut action_real = 0.0f64;
    for j in 0..3 {
        action_real = action_real.max(virasoro_action_parts(&VectorFieldLambda::generator(j), &e, a)?.w_reality);
    }
    report.push("action_hmrc", action_real, tol.reality);
    let v = VectorFieldLambda::generator(0);
    let t = 1e-4;
    let d = virasoro_action_parts(&v, &e, a)?.delta;
    let plus = flow_loop(&HoloMap::from_field(&v, t)?, &e, a, tol.factorization)?;
    let minus = flow_loop(&HoloMap::from_field(&v, -t)?, &e, a, tol.factorization)?;
    let central = plus.sub(&minus)?.scale(C64::new(0.5 / t, 0.0)).sample_distance(&d, a.samples)?;
    report.push("flow_vs_generator", central, tol.bracket);
    for (j, k) in [(0, 1), (1, 2), (0, 2)] {
        let dev = bracket_representation_check(
            &VectorFieldLambda::generator(j),
            &VectorFieldLambda::generator(k),
            &e,
            DEFAULT_BRACKET_STEP,
            a,
        )?;
        report.push(format!("bracket_{j}_{k}"), dev, tol.bracket);
    }

    let tan = tangency_check(&u, &v, &[1e-2, 1e-3], &probes(), 2e-3, a, tol.factorization)?;
    report.push("tangency_spread_L0", tan.spread, TANGENCY_SPREAD);
    let weakest = tan.rows.iter().map(|r| r.control_ratio).fold(f64::INFINITY, f64::min);
    report.push("control_first_order_inverse", CONTROL_FIRST_ORDER / weakest, 1.0);

    push_mobius_checks(report, &[-1, 0, 1, 2])?;

    let real_e = loopviro::virasoro::random_real_loop(
        &mut named_rng(cfg.seed, "suite/schwarz"),
        2,
        3,
        10.0 * RANDOM_SCALE,
        a.eps,
        a,
    )?;
    let pair = VirasoroPairR::new(
        VectorFieldLambda::new([(1, C64::new(0.4, 0.0)), (2, C64::new(-0.3, 0.0))]),
        VectorFieldLambda::new([(1, C64::new(0.3, 0.0)), (-1, C64::new(0.15, 0.0))]),
    )?;
    report.push("schwarz_decoupling", decoupling_defect(&pair, &real_e, cfg)?.1, 0.0);
    Ok(())
}
