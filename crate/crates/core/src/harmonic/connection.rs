//! Integration of the flat λ-connection `E^{-1}dE = A_λ dz + B_λ dz̄` over a grid.

use std::f64::consts::PI;

use crate::config::AnnulusConfig;
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, C64};
use crate::loop_algebra::{Annulus, LaurentLoop};

use super::extended::ExtendedSolution;
use super::fields::MaurerCartanPair;
use super::grid::GridDomain;

/// Largest frame entry tolerated during integration.
pub const BLOW_UP_LIMIT: f64 = 1e6;

/// Axis visited first on the way out of the basepoint.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PathOrder {
    /// `p -> (x, y_p) -> (x, y)`
    HorizontalFirst,
    /// `p -> (x_p, y) -> (x, y)`
    VerticalFirst,
}

/// Result of [`extended_from_connection`].
#[derive(Clone, Debug)]
pub struct IntegratedFrame {
    pub solution: ExtendedSolution,
    /// `max_z |E(z)(-1) - E_{-1}(z)|` between the assembled loop and a direct
    /// integration at `λ = -1`.
    pub assembly_error: f64,
}

/// Values at the half-steps of a line, by four-point interpolation (one-sided near the ends).
fn midpoints(line: &[&CMatrix]) -> Vec<CMatrix> {
    let len = line.len();
    let w = |c: [f64; 4], idx: [usize; 4]| {
        let mut acc = line[idx[0]] * C64::new(c[0] / 16.0, 0.0);
        for k in 1..4 {
            acc += line[idx[k]] * C64::new(c[k] / 16.0, 0.0);
        }
        acc
    };
    (0..len.saturating_sub(1))
        .map(|t| {
            if len < 4 {
                (line[t] + line[t + 1]) * C64::new(0.5, 0.0)
            } else if t == 0 {
                w([5.0, 15.0, -5.0, 1.0], [0, 1, 2, 3])
            } else if t + 2 == len {
                w([5.0, 15.0, -5.0, 1.0], [len - 1, len - 2, len - 3, len - 4])
            } else {
                w([-1.0, 9.0, 9.0, -1.0], [t - 1, t, t + 1, t + 2])
            }
        })
        .collect()
}

/// Connection coefficients along one axis: `M = αA + βB` evaluated on the fly.
struct AxisField<'a> {
    a: Vec<&'a CMatrix>,
    b: Vec<&'a CMatrix>,
    a_mid: Vec<CMatrix>,
    b_mid: Vec<CMatrix>,
}

impl<'a> AxisField<'a> {
    fn new(a: Vec<&'a CMatrix>, b: Vec<&'a CMatrix>) -> Self {
        let a_mid = midpoints(&a);
        let b_mid = midpoints(&b);
        AxisField { a, b, a_mid, b_mid }
    }
}

/// `α, β` with `M_x = αA + βB` or `M_y = αA + βB` at spectral parameter λ.
fn axis_weights(lambda: C64, vertical: bool) -> (C64, C64) {
    let one = C64::new(1.0, 0.0);
    let al = (one - lambda.inv()) * 0.5;
    let bl = (one - lambda) * 0.5;
    if vertical {
        let i = C64::new(0.0, 1.0);
        (i * al, -i * bl)
    } else {
        (al, bl)
    }
}

/// RK4 sweep of `E' = E M` along a line, starting from `start` at position `from`.
/// Writes the frame at every position of the line into `out`.
fn sweep(
    field: &AxisField<'_>,
    weights: (C64, C64),
    h: f64,
    from: usize,
    start: &CMatrix,
    out: &mut [CMatrix],
) -> Result<()> {
    let (al, be) = weights;
    let m_at = |k: usize| field.a[k] * al + field.b[k] * be;
    let m_mid = |k: usize| &field.a_mid[k] * al + &field.b_mid[k] * be;
    out[from] = start.clone();
    let len = out.len();
    for dir in [1i64, -1] {
        let dt = C64::new(h * dir as f64, 0.0);
        let mut e = start.clone();
        let mut k = from;
        let mut m0 = m_at(k);
        loop {
            let next = k as i64 + dir;
            if next < 0 || next as usize >= len {
                break;
            }
            let next = next as usize;
            let mm = m_mid(k.min(next));
            let m1 = m_at(next);
            let half = dt * 0.5;
            let k1 = &e * &m0;
            let k2 = (&e + &k1 * half) * &mm;
            let k3 = (&e + &k2 * half) * &mm;
            let k4 = (&e + &k3 * dt) * &m1;
            e += (k1 + (k2 + k3) * C64::new(2.0, 0.0) + k4) * (dt / 6.0);
            let size = linalg::max_norm(&e);
            if !(size <= BLOW_UP_LIMIT) {
                return Err(Error::BlowUp(size));
            }
            out[next] = e.clone();
            k = next;
            m0 = m1;
        }
    }
    Ok(())
}

/// Interpolated connection coefficients along every grid row and column.
struct Lines<'a> {
    rows: Vec<AxisField<'a>>,
    cols: Vec<AxisField<'a>>,
}

impl<'a> Lines<'a> {
    fn new(mc: &'a MaurerCartanPair) -> Self {
        let grid = *mc.grid();
        let (nx, ny) = (grid.nx(), grid.ny());
        let rows = (0..ny)
            .map(|j| AxisField::new((0..nx).map(|i| mc.a.at(i, j)).collect(), (0..nx).map(|i| mc.b.at(i, j)).collect()))
            .collect();
        let cols = (0..nx)
            .map(|i| AxisField::new((0..ny).map(|j| mc.a.at(i, j)).collect(), (0..ny).map(|j| mc.b.at(i, j)).collect()))
            .collect();
        Lines { rows, cols }
    }
}

/// Frame at every node for one spectral value, node order `j * nx + i`.
fn integrate(grid: &GridDomain, lines: &Lines<'_>, lambda: C64, order: PathOrder, out: &mut [CMatrix]) -> Result<()> {
    let (nx, ny) = (grid.nx(), grid.ny());
    let (pi, pj) = grid.basepoint();
    let h = grid.h();
    let id = linalg::identity(out[0].nrows());
    let wx = axis_weights(lambda, false);
    let wy = axis_weights(lambda, true);
    let zero = CMatrix::zeros(id.nrows(), id.ncols());
    match order {
        PathOrder::HorizontalFirst => {
            let mut spine = vec![zero.clone(); nx];
            sweep(&lines.rows[pj], wx, h, pi, &id, &mut spine)?;
            let mut line = vec![zero; ny];
            for (i, start) in spine.iter().enumerate() {
                sweep(&lines.cols[i], wy, h, pj, start, &mut line)?;
                for (j, e) in line.iter().enumerate() {
                    out[grid.index(i, j)] = e.clone();
                }
            }
        }
        PathOrder::VerticalFirst => {
            let mut spine = vec![zero.clone(); ny];
            sweep(&lines.cols[pi], wy, h, pj, &id, &mut spine)?;
            let mut line = vec![zero; nx];
            for (j, start) in spine.iter().enumerate() {
                sweep(&lines.rows[j], wx, h, pi, start, &mut line)?;
                for (i, e) in line.iter().enumerate() {
                    out[grid.index(i, j)] = e.clone();
                }
            }
        }
    }
    Ok(())
}

/// Frame `E_λ` at every node for a single λ, integrated along `order` paths.
pub fn frame_at_lambda(mc: &MaurerCartanPair, lambda: C64, order: PathOrder) -> Result<Vec<CMatrix>> {
    let grid = *mc.grid();
    grid.require_size(2)?;
    let n = mc.a.values[0].nrows();
    let mut out = vec![CMatrix::zeros(n, n); grid.len()];
    integrate(&grid, &Lines::new(mc), lambda, order, &mut out)?;
    Ok(out)
}

/// Integrates the flat connection from the basepoint for `cfg.samples` spectral values
/// on each boundary circle of the punctured plane and assembles order-`cfg.order`
/// loops: negative modes from the inner circle, the rest from the outer one.
pub fn extended_from_connection(mc: &MaurerCartanPair, cfg: &AnnulusConfig) -> Result<IntegratedFrame> {
    extended_from_connection_along(mc, cfg, PathOrder::HorizontalFirst)
}

pub fn extended_from_connection_along(
    mc: &MaurerCartanPair,
    cfg: &AnnulusConfig,
    order: PathOrder,
) -> Result<IntegratedFrame> {
    cfg.validate()?;
    let grid: GridDomain = *mc.grid();
    grid.require_size(2)?;
    let n = mc.a.values[0].nrows();
    let nn = n * n;
    let k_max = cfg.order;
    let samples = cfg.samples;
    if 2 * k_max + 2 > samples {
        return Err(Error::OrderTooLarge { order: k_max, samples, needed: 2 * k_max + 2 });
    }
    let annulus = Annulus::punctured(cfg.eps)?;
    let modes = 2 * k_max + 1;
    // Flat accumulator: node-major, then mode k + K, then entry (column-major).
    let mut acc = vec![C64::new(0.0, 0.0); grid.len() * modes * nn];
    let mut frames = vec![CMatrix::zeros(n, n); grid.len()];
    let lines = Lines::new(mc);
    for (radius, ks) in [(cfg.eps, -(k_max as i64)..=-1), (1.0 / cfg.eps, 0..=k_max as i64)] {
        for m in 0..samples {
            let theta = 2.0 * PI * m as f64 / samples as f64;
            let lambda = C64::from_polar(radius, theta);
            integrate(&grid, &lines, lambda, order, &mut frames)?;
            let factors: Vec<(usize, C64)> = ks
                .clone()
                .map(|k| {
                    let slot = (k + k_max as i64) as usize;
                    (slot, C64::from_polar(radius.powi(-k as i32) / samples as f64, -(k as f64) * theta))
                })
                .collect();
            for (node, e) in frames.iter().enumerate() {
                let base = node * modes * nn;
                let entries = e.as_slice();
                for &(slot, w) in &factors {
                    let dst = &mut acc[base + slot * nn..base + (slot + 1) * nn];
                    for (d, v) in dst.iter_mut().zip(entries) {
                        *d += v * w;
                    }
                }
            }
        }
    }
    let loops = (0..grid.len())
        .map(|node| {
            let coeffs = (0..modes)
                .map(|slot| {
                    let start = node * modes * nn + slot * nn;
                    CMatrix::from_column_slice(n, n, &acc[start..start + nn])
                })
                .collect();
            LaurentLoop::from_coeffs(coeffs, annulus)
        })
        .collect::<Result<Vec<_>>>()?;
    integrate(&grid, &lines, C64::new(-1.0, 0.0), order, &mut frames)?;
    let mut assembly_error = 0.0f64;
    for (l, direct) in loops.iter().zip(&frames) {
        assembly_error = assembly_error.max(linalg::max_dist(&l.eval(C64::new(-1.0, 0.0))?, direct));
    }
    Ok(IntegratedFrame { solution: ExtendedSolution::new(grid, loops)?, assembly_error })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::GridParams;
    use crate::harmonic::fields::MaurerCartanPair;

    fn small_grid() -> GridDomain {
        GridDomain::new(&GridParams { x0: -0.3, x1: 0.3, y0: -0.2, y1: 0.2, h: 0.1, basepoint: None }).unwrap()
    }

    #[test]
    fn zero_connection_gives_identity() {
        let g = small_grid();
        let mc = MaurerCartanPair::from_fn(g, |_| Ok((CMatrix::zeros(2, 2), CMatrix::zeros(2, 2)))).unwrap();
        let cfg = AnnulusConfig { samples: 32, order: 4, ..AnnulusConfig::default() };
        let out = extended_from_connection(&mc, &cfg).unwrap();
        for l in &out.solution.loops {
            assert!(l.coeff_distance(&LaurentLoop::identity(2, l.annulus()).with_order(4)) < 1e-15);
        }
        assert!(out.assembly_error < 1e-15);
    }

    #[test]
    fn lambda_one_is_stationary() {
        let g = small_grid();
        let a = CMatrix::from_fn(2, 2, |r, c| C64::new(0.3 * r as f64, 0.2 * c as f64));
        let mc = MaurerCartanPair::from_fn(g, |z| Ok((&a * z, -(&a * z).adjoint()))).unwrap();
        let frames = frame_at_lambda(&mc, C64::new(1.0, 0.0), PathOrder::HorizontalFirst).unwrap();
        assert!(frames.iter().all(|e| linalg::dist_to_identity(e) == 0.0));
    }

    #[test]
    fn midpoint_interpolation_is_exact_on_cubics() {
        let pts: Vec<CMatrix> = (0..6)
            .map(|k| {
                let t = k as f64;
                CMatrix::from_element(1, 1, C64::new(t * t * t - 2.0 * t, 0.0))
            })
            .collect();
        let refs: Vec<&CMatrix> = pts.iter().collect();
        for (k, m) in midpoints(&refs).iter().enumerate() {
            let t = k as f64 + 0.5;
            assert!((m[(0, 0)].re - (t * t * t - 2.0 * t)).abs() < 1e-12);
        }
    }
}
