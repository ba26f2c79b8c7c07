use std::f64::consts::PI;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::config::{AnnulusConfig, GridParams};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, C64};
use crate::loop_algebra::{Annulus, HmrcLevel, LaurentLoop};

use super::grid::{GridDomain, HarmonicMapGrid};
use super::rational::RationalFn;
use super::uniton::{FrameField, Uniton, UnitonVariant};

/// Spectral sample points per boundary circle used by the λ-constancy check.
pub const CONSTANCY_SAMPLES: usize = 16;
/// Unit-circle points used by the unitarity check.
pub const UNITARITY_SAMPLES: usize = 8;
/// Drift beyond which restriction to `λ = -1` refuses to project back onto U(n).
pub const UNITARY_DRIFT_LIMIT: f64 = 1e-6;

/// Extended solution `E_λ(z)`: one Laurent loop per grid node. Nodes marked as
/// excluded carry placeholder loops and are skipped by every check.
#[derive(Clone, Debug, PartialEq)]
pub struct ExtendedSolution {
    pub grid: GridDomain,
    pub loops: Vec<LaurentLoop>,
    pub variant: Option<UnitonVariant>,
    pub excluded: Vec<bool>,
}

impl ExtendedSolution {
    pub fn new(grid: GridDomain, loops: Vec<LaurentLoop>) -> Result<Self> {
        if loops.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "expected {} loops, got {}",
                grid.len(),
                loops.len()
            )));
        }
        let n = loops[0].n();
        if let Some(bad) = loops.iter().find(|l| l.n() != n) {
            return Err(Error::DimensionMismatch(n, bad.n()));
        }
        let excluded = vec![false; loops.len()];
        Ok(ExtendedSolution { grid, loops, variant: None, excluded })
    }

    /// `E ≡ I` on the punctured plane of `cfg`.
    pub fn identity(grid: GridDomain, n: usize, cfg: &AnnulusConfig) -> Result<Self> {
        let l = LaurentLoop::identity(n, Annulus::punctured(cfg.eps)?).with_order(cfg.order);
        ExtendedSolution::new(grid, vec![l; grid.len()])
    }

    pub fn n(&self) -> usize {
        self.loops[0].n()
    }

    pub fn at(&self, i: usize, j: usize) -> &LaurentLoop {
        &self.loops[self.grid.index(i, j)]
    }

    pub fn at_mut(&mut self, i: usize, j: usize) -> &mut LaurentLoop {
        let idx = self.grid.index(i, j);
        &mut self.loops[idx]
    }

    pub fn is_excluded(&self, i: usize, j: usize) -> bool {
        self.excluded[self.grid.index(i, j)]
    }

    pub fn excluded_count(&self) -> usize {
        self.excluded.iter().filter(|e| **e).count()
    }

    pub fn basepoint_loop(&self) -> &LaurentLoop {
        &self.loops[self.grid.basepoint_index()]
    }
}

#[derive(Serialize, Deserialize)]
struct ExtendedJson {
    #[serde(flatten)]
    grid: GridParams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    variant: Option<UnitonVariant>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    excluded: Vec<usize>,
    loops: Vec<LaurentLoop>,
}

impl Serialize for ExtendedSolution {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ExtendedJson {
            grid: self.grid.params(),
            variant: self.variant,
            excluded: self.excluded.iter().enumerate().filter(|(_, e)| **e).map(|(k, _)| k).collect(),
            loops: self.loops.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for ExtendedSolution {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let j = ExtendedJson::deserialize(d)?;
        let grid = GridDomain::new(&j.grid).map_err(D::Error::custom)?;
        let mut e = ExtendedSolution::new(grid, j.loops).map_err(D::Error::custom)?;
        e.variant = j.variant;
        for k in j.excluded {
            *e.excluded.get_mut(k).ok_or_else(|| D::Error::custom(format!("excluded node {k} out of range")))? = true;
        }
        Ok(e)
    }
}

/// Numerical checks of an extended solution.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExtendedResiduals {
    /// Largest deviation of `E^{-1}E_z / (1 - λ^{-1})` from its λ-mean.
    pub constancy_z: f64,
    /// Same for `E^{-1}E_z̄ / (1 - λ)`.
    pub constancy_zbar: f64,
    /// Node where the larger of the two constancy residuals peaks.
    pub worst_node: Option<(usize, usize)>,
    /// `max_z |E_1(z) - I|`.
    pub e1: f64,
    /// `max_λ |E_λ(p) - I|` over the check samples.
    pub basepoint: f64,
    pub hmrc: f64,
    /// Weighted tail plus recorded truncation mass, worst node.
    pub tail: f64,
    /// `max |E_λ^* E_λ - I|` at unit-circle samples.
    pub unitarity: f64,
    pub basepoint_z: [f64; 2],
    pub variant: Option<UnitonVariant>,
    pub excluded: usize,
}

impl ExtendedResiduals {
    pub fn lambda_constancy(&self) -> f64 {
        self.constancy_z.max(self.constancy_zbar)
    }
}

/// Spectral sample points for the λ-constancy check: `CONSTANCY_SAMPLES` per boundary
/// circle plus `λ = -1`.
pub fn constancy_lambdas(annulus: &Annulus) -> Vec<C64> {
    let mut out: Vec<C64> = annulus
        .boundary_radii()
        .into_iter()
        .flat_map(|r| {
            (0..CONSTANCY_SAMPLES).map(move |m| {
                C64::from_polar(r, 2.0 * PI * (m as f64 + 0.5) / CONSTANCY_SAMPLES as f64)
            })
        })
        .collect();
    out.push(C64::new(-1.0, 0.0));
    out
}

/// Deviation from the λ-mean of the normalized Maurer-Cartan forms at one point,
/// given `E`, `E_z` and `E_z̄` at each λ.
pub(crate) fn constancy_at(
    lambdas: &[C64],
    values: &[CMatrix],
    dz: &[CMatrix],
    dzb: &[CMatrix],
) -> Result<(f64, f64)> {
    let one = C64::new(1.0, 0.0);
    let mut xs = Vec::with_capacity(lambdas.len());
    let mut ys = Vec::with_capacity(lambdas.len());
    for (k, &l) in lambdas.iter().enumerate() {
        let inv = linalg::inverse(&values[k])?;
        xs.push(&inv * &dz[k] / (one - l.inv()));
        ys.push(inv * &dzb[k] / (one - l));
    }
    Ok((spread(&xs), spread(&ys)))
}

fn spread(ms: &[CMatrix]) -> f64 {
    let mut mean = ms[0].clone() * C64::new(0.0, 0.0);
    for m in ms {
        mean += m;
    }
    mean /= C64::new(ms.len() as f64, 0.0);
    ms.iter().map(|m| linalg::max_dist(m, &mean)).fold(0.0, f64::max)
}

/// λ-constancy residuals `(z part, z̄ part, worst node)` by central differences on
/// interior nodes whose stencil avoids excluded nodes.
pub fn lambda_constancy(e: &ExtendedSolution) -> Result<(f64, f64, Option<(usize, usize)>)> {
    let grid = e.grid;
    grid.require_size(3)?;
    let lambdas = constancy_lambdas(&e.basepoint_loop().annulus());
    let mut values: Vec<Option<Vec<CMatrix>>> = Vec::with_capacity(grid.len());
    for (l, &ex) in e.loops.iter().zip(&e.excluded) {
        values.push(if ex {
            None
        } else {
            Some(lambdas.iter().map(|&lam| l.eval(lam)).collect::<Result<Vec<_>>>()?)
        });
    }
    let h2 = C64::new(2.0 * grid.h(), 0.0);
    let (half, iu) = (C64::new(0.5, 0.0), C64::new(0.0, 1.0));
    let (mut rz, mut rzb, mut worst, mut worst_val) = (0.0f64, 0.0f64, None, -1.0);
    for (i, j) in grid.interior(1) {
        let ids = [(i, j), (i + 1, j), (i - 1, j), (i, j + 1), (i, j - 1)];
        let vals: Option<Vec<&Vec<CMatrix>>> = ids.iter().map(|&(a, b)| values[grid.index(a, b)].as_ref()).collect();
        let Some(v) = vals else { continue };
        let mut dz = Vec::with_capacity(lambdas.len());
        let mut dzb = Vec::with_capacity(lambdas.len());
        for k in 0..lambdas.len() {
            let ex = (&v[1][k] - &v[2][k]) / h2;
            let ey = (&v[3][k] - &v[4][k]) / h2 * iu;
            dz.push((&ex - &ey) * half);
            dzb.push((ex + ey) * half);
        }
        let (a, b) = constancy_at(&lambdas, v[0], &dz, &dzb)?;
        if a.is_nan() || b.is_nan() {
            return Ok((f64::NAN, f64::NAN, Some((i, j))));
        }
        rz = rz.max(a);
        rzb = rzb.max(b);
        if a.max(b) > worst_val {
            worst_val = a.max(b);
            worst = Some((i, j));
        }
    }
    Ok((rz, rzb, worst))
}

/// Runs every check on `e`; `samples` sets the resolution of the reality check.
pub fn extended_residuals(e: &ExtendedSolution, samples: usize) -> Result<ExtendedResiduals> {
    let (constancy_z, constancy_zbar, worst_node) = lambda_constancy(e)?;
    let one = C64::new(1.0, 0.0);
    let lambdas = constancy_lambdas(&e.basepoint_loop().annulus());
    let (mut e1, mut hmrc, mut tail, mut unitarity) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for (l, &ex) in e.loops.iter().zip(&e.excluded) {
        if ex {
            continue;
        }
        e1 = e1.max(linalg::dist_to_identity(&l.eval(one)?));
        hmrc = hmrc.max(l.hmrc_residual(HmrcLevel::Group, samples)?);
        tail = tail.max(l.tail_norm() + l.truncation());
        for m in 0..UNITARITY_SAMPLES {
            let u = l.eval(C64::from_polar(1.0, 2.0 * PI * (m as f64 + 0.25) / UNITARITY_SAMPLES as f64))?;
            unitarity = unitarity.max(linalg::unitarity_defect(&u));
        }
    }
    let p = e.basepoint_loop();
    let mut basepoint = linalg::dist_to_identity(&p.eval(one)?);
    for &lam in &lambdas {
        basepoint = basepoint.max(linalg::dist_to_identity(&p.eval(lam)?));
    }
    let pz = e.grid.basepoint_z();
    Ok(ExtendedResiduals {
        constancy_z,
        constancy_zbar,
        worst_node,
        e1,
        basepoint,
        hmrc,
        tail,
        unitarity,
        basepoint_z: [pz.re, pz.im],
        variant: e.variant,
        excluded: e.excluded_count(),
    })
}

/// λ-constancy residual of a frame field at a single point, with fourth-order
/// central differences of step `hp`.
pub fn probe_constancy<F: FrameField + ?Sized>(field: &F, z: C64, hp: f64) -> Result<f64> {
    let centre = field.frame_at(z)?;
    let lambdas = constancy_lambdas(&centre.annulus());
    let eval_all = |l: &LaurentLoop| lambdas.iter().map(|&lam| l.eval(lam)).collect::<Result<Vec<_>>>();
    let values = eval_all(&centre)?;
    let weights = [(-2.0, 1.0), (-1.0, -8.0), (1.0, 8.0), (2.0, -1.0)];
    let mut dx = vec![CMatrix::zeros(centre.n(), centre.n()); lambdas.len()];
    let mut dy = dx.clone();
    for &(offset, w) in &weights {
        let fx = eval_all(&field.frame_at(z + C64::new(offset * hp, 0.0))?)?;
        let fy = eval_all(&field.frame_at(z + C64::new(0.0, offset * hp))?)?;
        let c = C64::new(w / (12.0 * hp), 0.0);
        for k in 0..lambdas.len() {
            dx[k] += &fx[k] * c;
            dy[k] += &fy[k] * c;
        }
    }
    let (half, iu) = (C64::new(0.5, 0.0), C64::new(0.0, 1.0));
    let dz: Vec<CMatrix> = dx.iter().zip(&dy).map(|(a, b)| (a - b * iu) * half).collect();
    let dzb: Vec<CMatrix> = dx.iter().zip(&dy).map(|(a, b)| (a + b * iu) * half).collect();
    let (a, b) = constancy_at(&lambdas, &values, &dz, &dzb)?;
    Ok(a.max(b))
}

/// `s = E_{-1}`, projected back onto the unitary group when the drift is small.
pub fn restrict_harmonic(e: &ExtendedSolution) -> Result<HarmonicMapGrid> {
    if e.excluded_count() > 0 {
        return Err(Error::InvalidGrid(format!(
            "{} excluded nodes; a harmonic map needs every node",
            e.excluded_count()
        )));
    }
    let minus_one = C64::new(-1.0, 0.0);
    let mut values = Vec::with_capacity(e.loops.len());
    for l in &e.loops {
        let s = l.eval(minus_one)?;
        let drift = linalg::unitarity_defect(&s);
        if drift > UNITARY_DRIFT_LIMIT || drift.is_nan() {
            return Err(Error::NonUnitary(drift));
        }
        values.push(if drift > 1e-12 { linalg::polar_unitary(&s)? } else { s });
    }
    HarmonicMapGrid::new(e.grid, values)
}

/// Closed-form uniton solution with the orientation chosen by the λ-constancy test.
///
/// The winning variant must reach `max(pde_tol, 10 h^2)`, the discretization floor
/// of the central-difference check.
pub fn uniton_extended(f: &RationalFn, grid: GridDomain, cfg: &AnnulusConfig, pde_tol: f64) -> Result<ExtendedSolution> {
    cfg.validate()?;
    let mut best: Option<(f64, ExtendedSolution)> = None;
    for variant in [UnitonVariant::Positive, UnitonVariant::Negative] {
        let u = Uniton::new(f.clone(), grid.basepoint_z(), variant, cfg.eps)?;
        let sol = uniton_solution(&u, grid)?;
        let (rz, rzb, _) = lambda_constancy(&sol)?;
        let r = rz.max(rzb);
        if best.as_ref().is_none_or(|(b, _)| r < *b) {
            best = Some((r, sol));
        }
    }
    let (r, sol) = best.expect("two variants tried");
    let floor = pde_tol.max(10.0 * grid.h() * grid.h());
    if !(r <= floor) {
        return Err(Error::Construction(format!(
            "no uniton orientation is an extended solution: best lambda-constancy {r:.3e} > {floor:.3e}"
        )));
    }
    Ok(sol)
}

/// Evaluates a fixed-variant uniton frame on every node.
pub fn uniton_solution(u: &Uniton, grid: GridDomain) -> Result<ExtendedSolution> {
    let loops = (0..grid.len())
        .map(|idx| {
            let (i, j) = grid.coords(idx);
            u.frame(grid.point(i, j))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut sol = ExtendedSolution::new(grid, loops)?;
    sol.variant = Some(u.variant());
    Ok(sol)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(h: f64) -> GridDomain {
        GridDomain::new(&GridParams { x0: -0.2, x1: 0.2, y0: -0.2, y1: 0.2, h, basepoint: None }).unwrap()
    }

    #[test]
    fn identity_solution_has_zero_residuals() {
        let e = ExtendedSolution::identity(grid(0.05), 2, &AnnulusConfig::default()).unwrap();
        let r = extended_residuals(&e, 64).unwrap();
        assert_eq!(
            (r.lambda_constancy(), r.e1, r.basepoint, r.hmrc, r.tail, r.unitarity),
            (0.0, 0.0, 0.0, 0.0, 0.0, 0.0)
        );
        let s = restrict_harmonic(&e).unwrap();
        assert!(s.values().iter().all(|m| linalg::dist_to_identity(m) == 0.0));
    }

    #[test]
    fn holomorphic_data_picks_the_positive_orientation() {
        let cfg = AnnulusConfig::default();
        let e = uniton_extended(&RationalFn::identity(), grid(0.05), &cfg, 1e-5).unwrap();
        assert_eq!(e.variant, Some(UnitonVariant::Positive));
        let anti = Uniton::new(RationalFn::identity(), C64::new(0.0, 0.0), UnitonVariant::Negative, 0.5).unwrap();
        let bad = uniton_solution(&anti, grid(0.05)).unwrap();
        assert!(lambda_constancy(&bad).unwrap().0 > 1e-2);
    }

    #[test]
    fn json_round_trip_keeps_exclusions() {
        let mut e = ExtendedSolution::identity(grid(0.1), 2, &AnnulusConfig::default().with_order(2)).unwrap();
        e.excluded[3] = true;
        e.variant = Some(UnitonVariant::Negative);
        let text = serde_json::to_string(&e).unwrap();
        let back: ExtendedSolution = serde_json::from_str(&text).unwrap();
        assert_eq!(back, e);
    }

    #[test]
    fn probe_matches_closed_form_scale() {
        let u = Uniton::new(RationalFn::identity(), C64::new(0.0, 0.0), UnitonVariant::Positive, 0.5).unwrap();
        assert!(probe_constancy(&u, C64::new(0.1, 0.2), 1e-2).unwrap() < 1e-6);
    }
}
