use std::path::Path;

use loopviro::factorization::{birkhoff_harmonic, pi_split_harmonic};
use loopviro::harmonic::{
    extended_residuals, uniton_extended, uniton_solution, ExtendedResiduals, ExtendedSolution, GridDomain, RationalFn,
    Uniton, UnitonVariant,
};
use loopviro::io::{read_json, write_json};
use loopviro::random::{hmrc_algebra_pair, hmrc_group_pair, named_rng, normalized_group_loop};
use loopviro::report::ResidualReport;
use loopviro::virasoro::{
    bracket_representation_check, group_action, mobius_field, mobius_pushforward, random_real_loop,
    real_reality_residual, schwarz_action, HoloMap, VectorFieldLambda, VirasoroPairR,
};
use loopviro::{DoubleLoop, Error, HmrcLevel, LaurentLoop, Result, RunConfig};
use num_complex::Complex64;
use num_rational::Rational64;
use serde::Serialize;

use crate::{GridArgs, VariantArg};

/// Spectral samples per node for extended-solution checks.
pub const CHECK_SAMPLES: usize = 64;
/// Per-term size of random near-identity inputs.
pub const RANDOM_SCALE: f64 = 0.03;

pub struct Ctx<'a> {
    pub cfg: &'a RunConfig,
}

pub fn push_extended(report: &mut ResidualReport, r: &ExtendedResiduals, cfg: &RunConfig, prefix: &str) {
    let t = &cfg.tolerances;
    report.push(format!("{prefix}lambda_constancy_z"), r.constancy_z, t.pde);
    report.push(format!("{prefix}lambda_constancy_zbar"), r.constancy_zbar, t.pde);
    report.push(format!("{prefix}e1_identity"), r.e1, t.reality);
    report.push(format!("{prefix}basepoint_identity"), r.basepoint, t.reality);
    report.push(format!("{prefix}hmrc"), r.hmrc, t.reality);
    report.push(format!("{prefix}unitarity"), r.unitarity, t.reality);
    report.push(format!("{prefix}tail"), r.tail, cfg.annulus.trunc_tol);
}

fn summarize(r: &ExtendedResiduals) {
    if let Some((i, j)) = r.worst_node {
        eprintln!("worst λ-constancy at node ({i}, {j}); {} excluded node(s)", r.excluded);
    }
}

pub fn gen_uniton(
    ctx: &Ctx,
    f: &str,
    variant: Option<VariantArg>,
    grid: &GridArgs,
    out: &Path,
    report: &mut ResidualReport,
) -> Result<()> {
    let cfg = ctx.cfg;
    let g = GridDomain::new(&grid.apply(cfg.grid))?;
    let f = RationalFn::parse(f)?;
    let e = match variant {
        Some(v) => {
            let v = match v {
                VariantArg::Positive => UnitonVariant::Positive,
                VariantArg::Negative => UnitonVariant::Negative,
            };
            uniton_solution(&Uniton::new(f, g.basepoint_z(), v, cfg.annulus.eps)?, g)?
        }
        None => uniton_extended(&f, g, &cfg.annulus, cfg.tolerances.pde)?,
    };
    write_json(out, &e)?;
    let r = extended_residuals(&e, CHECK_SAMPLES)?;
    summarize(&r);
    push_extended(report, &r, cfg, "");
    Ok(())
}

pub fn check_extended(ctx: &Ctx, input: &Path, report: &mut ResidualReport) -> Result<()> {
    let e: ExtendedSolution = read_json(input)?;
    let r = extended_residuals(&e, CHECK_SAMPLES)?;
    summarize(&r);
    push_extended(report, &r, ctx.cfg, "");
    Ok(())
}

#[derive(Serialize)]
struct Factors<'a, M: Serialize> {
    plus: &'a LaurentLoop,
    minus: &'a M,
}

pub fn factorize(
    ctx: &Ctx,
    input: Option<&Path>,
    out: Option<&Path>,
    n: usize,
    modes: usize,
    report: &mut ResidualReport,
) -> Result<()> {
    let cfg = ctx.cfg;
    let a = &cfg.annulus;
    let q: DoubleLoop = match input {
        Some(p) => read_json(p)?,
        None => hmrc_group_pair(&mut named_rng(cfg.seed, "factorize"), n, modes, RANDOM_SCALE, a.eps, a.samples, a.max_order())?,
    };
    let pair = birkhoff_harmonic(&q, a, cfg.tolerances.factorization)?;
    let t = cfg.tolerances.factorization;
    report.push("factor_residual", pair.residual, t);
    report.push("plus_membership", pair.diagnostics.plus_membership, t);
    report.push("minus_membership", pair.diagnostics.minus_membership, t);
    if let Some(p) = out {
        write_json(p, &Factors { plus: &pair.plus, minus: &pair.minus })?;
    }
    Ok(())
}

/// Coefficient defect of `Π^+(w) + Π^-(w) - w` on both circles.
pub fn split_sum_defect(w: &DoubleLoop, plus: &LaurentLoop, minus: &DoubleLoop) -> Result<f64> {
    let lifted = DoubleLoop::lift(plus)?;
    let d0 = lifted.near0.add(&minus.near0)?.coeff_distance(&w.near0);
    let di = lifted.near_inf.add(&minus.near_inf)?.coeff_distance(&w.near_inf);
    Ok(d0.max(di))
}

pub fn project(
    ctx: &Ctx,
    input: Option<&Path>,
    out: Option<&Path>,
    n: usize,
    modes: usize,
    report: &mut ResidualReport,
) -> Result<()> {
    let cfg = ctx.cfg;
    let a = &cfg.annulus;
    let w: DoubleLoop = match input {
        Some(p) => read_json(p)?,
        None => hmrc_algebra_pair(&mut named_rng(cfg.seed, "project"), n, modes, 10.0 * RANDOM_SCALE, a.eps)?,
    };
    let (plus, minus) = pi_split_harmonic(&w, a.samples)?;
    let (again, _) = pi_split_harmonic(&DoubleLoop::lift(&plus)?, a.samples)?;
    report.push("idempotence", again.coeff_distance(&plus), 0.0);
    report.push("sum_defect", split_sum_defect(&w, &plus, &minus)?, cfg.tolerances.reality);
    report.push("plus_hmrc", plus.hmrc_residual(HmrcLevel::Algebra, a.samples)?, cfg.tolerances.reality);
    if let Some(p) = out {
        write_json(p, &Factors { plus: &plus, minus: &minus })?;
    }
    Ok(())
}

pub fn virasoro_flow(
    ctx: &Ctx,
    j: Option<i32>,
    field: Option<&Path>,
    t: f64,
    input: &Path,
    out: &Path,
    report: &mut ResidualReport,
) -> Result<()> {
    let cfg = ctx.cfg;
    let v: VectorFieldLambda = match (j, field) {
        (Some(j), _) => VectorFieldLambda::generator(j),
        (None, Some(p)) => read_json(p)?,
        (None, None) => return Err(Error::Config("virasoro-flow needs --j or --field".into())),
    };
    let e: ExtendedSolution = read_json(input)?;
    let before = extended_residuals(&e, CHECK_SAMPLES)?;
    let flowed = group_action(&HoloMap::from_field(&v, t)?, &e, &cfg.annulus, cfg.tolerances.factorization)?;
    write_json(out, &flowed)?;
    let after = extended_residuals(&flowed, CHECK_SAMPLES)?;
    summarize(&after);
    let tr = &cfg.tolerances;
    let bound = (10.0 * before.lambda_constancy()).max(tr.pde);
    report.push("lambda_constancy_z", after.constancy_z, bound);
    report.push("lambda_constancy_zbar", after.constancy_zbar, bound);
    report.push("e1_identity", after.e1, tr.reality);
    report.push("basepoint_identity", after.basepoint, tr.reality);
    report.push("hmrc", after.hmrc, tr.reality);
    report.push("unitarity", after.unitarity, tr.reality);
    report.push("tail", after.tail, cfg.annulus.trunc_tol);
    Ok(())
}

/// Random element of the normalized plus group used when no loop is given.
pub fn default_plus_loop(cfg: &RunConfig, name: &str) -> Result<LaurentLoop> {
    let a = &cfg.annulus;
    normalized_group_loop(&mut named_rng(cfg.seed, name), 2, 3, 10.0 * RANDOM_SCALE, a.eps, a.samples, a.max_order())
}

pub fn bracket_test(
    ctx: &Ctx,
    j: i32,
    k: i32,
    input: Option<&Path>,
    h: f64,
    report: &mut ResidualReport,
) -> Result<()> {
    let cfg = ctx.cfg;
    let e: LaurentLoop = match input {
        Some(p) => read_json(p)?,
        None => default_plus_loop(cfg, "bracket")?,
    };
    let dev = bracket_representation_check(
        &VectorFieldLambda::generator(j),
        &VectorFieldLambda::generator(k),
        &e,
        h,
        &cfg.annulus,
    )?;
    report.push(format!("bracket_{j}_{k}"), dev, cfg.tolerances.bracket);
    Ok(())
}

/// `"a"`, `"a..b"` or `"a..=b"`, both ends inclusive.
pub fn parse_range(s: &str) -> Result<Vec<i32>> {
    let bad = || Error::Parse(format!("expected an index or range like -1..2, got {s:?}"));
    let num = |t: &str| t.trim().parse::<i32>().map_err(|_| bad());
    match s.split_once("..") {
        None => Ok(vec![num(s)?]),
        Some((lo, hi)) => {
            let (lo, hi) = (num(lo)?, num(hi.trim_start_matches('='))?);
            if lo > hi {
                return Err(bad());
            }
            Ok((lo..=hi).collect())
        }
    }
}

pub fn push_mobius_checks(report: &mut ResidualReport, js: &[i32]) -> Result<()> {
    for &j in js {
        let f = mobius_field(j)?;
        let mut worst = 0.0f64;
        for x in [Rational64::new(1, 3), Rational64::new(-5, 7), Rational64::new(9, 4)] {
            let one = Rational64::from_integer(1);
            let t = (x - one) / (x + one);
            let expect = (0..=j).fold(one, |acc, _| acc * t) * (x + one) * (x + one) / Rational64::from_integer(2);
            let ev = |p: &[Rational64]| p.iter().rev().fold(Rational64::from_integer(0), |acc, c| acc * x + c);
            if ev(f.num()) / ev(f.den()) != expect {
                worst = 1.0;
            }
        }
        report.push(format!("mobius_closed_form_{j}"), worst, 0.0);
    }
    for &j in js {
        for &k in js {
            if j >= k {
                continue;
            }
            let lhs = mobius_field(j)?.bracket(&mobius_field(k)?);
            let rhs = mobius_field(j + k)?.scale(Rational64::from_integer((k - j) as i64));
            report.push(format!("mobius_bracket_{j}_{k}"), if lhs.same_field(&rhs) { 0.0 } else { 1.0 }, 0.0);
        }
    }
    Ok(())
}

pub fn mobius(_ctx: &Ctx, j: &str, terms: usize, out: Option<&Path>, report: &mut ResidualReport) -> Result<()> {
    let js = parse_range(j)?;
    let fields = js.iter().map(|&j| mobius_pushforward(j, terms)).collect::<Result<Vec<_>>>()?;
    push_mobius_checks(report, &js)?;
    if let Some(p) = out {
        write_json(p, &fields)?;
    }
    Ok(())
}

/// `"1:0.5,2:-0.25"` as a real-coefficient field.
pub fn parse_real_field(s: &str) -> Result<VectorFieldLambda> {
    let mut terms = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let bad = || Error::Parse(format!("expected power:coeff, got {part:?}"));
        let (p, c) = part.split_once(':').ok_or_else(bad)?;
        let p: i32 = p.trim().parse().map_err(|_| bad())?;
        let c: f64 = c.trim().parse().map_err(|_| bad())?;
        if !c.is_finite() {
            return Err(bad());
        }
        terms.push((p, Complex64::new(c, 0.0)));
    }
    Ok(VectorFieldLambda::new(terms))
}

/// Coefficient defect of `δ_{v,w} - δ_{0,w} - δ_{v,0}`.
pub fn decoupling_defect(pair: &VirasoroPairR, e: &LaurentLoop, cfg: &RunConfig) -> Result<(LaurentLoop, f64)> {
    let a = &cfg.annulus;
    let zero = VectorFieldLambda::zero();
    let both = schwarz_action(pair, e, a)?;
    let w_only = schwarz_action(&VirasoroPairR::new(pair.w.clone(), zero.clone())?, e, a)?;
    let v_only = schwarz_action(&VirasoroPairR::new(zero, pair.v.clone())?, e, a)?;
    let d = both.coeff_distance(&w_only.add(&v_only)?);
    Ok((both, d))
}

pub fn schwarz(
    ctx: &Ctx,
    w: &str,
    v: &str,
    input: Option<&Path>,
    out: Option<&Path>,
    report: &mut ResidualReport,
) -> Result<()> {
    let cfg = ctx.cfg;
    let pair = VirasoroPairR::new(parse_real_field(w)?, parse_real_field(v)?)?;
    let e: LaurentLoop = match input {
        Some(p) => read_json(p)?,
        None => random_real_loop(&mut named_rng(cfg.seed, "schwarz"), 2, 3, 10.0 * RANDOM_SCALE, cfg.annulus.eps, &cfg.annulus)?,
    };
    report.push("real_reality", real_reality_residual(&e, cfg.annulus.samples)?, cfg.tolerances.reality);
    let (delta, defect) = decoupling_defect(&pair, &e, cfg)?;
    report.push("decoupling_defect", defect, 0.0);
    if let Some(p) = out {
        write_json(p, &delta)?;
    }
    Ok(())
}
