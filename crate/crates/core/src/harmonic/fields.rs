use crate::error::Result;
use crate::linalg::{self, CMatrix, C64};

use super::grid::{GridDomain, HarmonicMapGrid, NodeMatrices, NodeScalars};

/// `A = s^{-1} s_z` and `B = s^{-1} s_z̄` sampled on a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct MaurerCartanPair {
    pub a: NodeMatrices,
    pub b: NodeMatrices,
}

impl MaurerCartanPair {
    pub fn new(a: NodeMatrices, b: NodeMatrices) -> Result<Self> {
        if a.grid != b.grid {
            return Err(crate::Error::InvalidGrid("A and B live on different grids".into()));
        }
        Ok(MaurerCartanPair { a, b })
    }

    /// Samples closed-form fields `z -> (A(z), B(z))` at every node.
    pub fn from_fn<F>(grid: GridDomain, f: F) -> Result<Self>
    where
        F: Fn(C64) -> Result<(CMatrix, CMatrix)>,
    {
        let (mut a, mut b) = (Vec::with_capacity(grid.len()), Vec::with_capacity(grid.len()));
        for idx in 0..grid.len() {
            let (i, j) = grid.coords(idx);
            let (ai, bi) = f(grid.point(i, j))?;
            a.push(ai);
            b.push(bi);
        }
        Ok(MaurerCartanPair { a: NodeMatrices::new(grid, a)?, b: NodeMatrices::new(grid, b)? })
    }

    pub fn grid(&self) -> &GridDomain {
        &self.a.grid
    }

    /// `max |B + A^*|` over all nodes.
    pub fn reality_defect(&self) -> f64 {
        self.a
            .values
            .iter()
            .zip(&self.b.values)
            .map(|(a, b)| linalg::max_norm(&(b + a.adjoint())))
            .fold(0.0, f64::max)
    }
}

/// Finite-difference Maurer-Cartan fields of a sampled map.
pub fn maurer_cartan(s: &HarmonicMapGrid) -> Result<MaurerCartanPair> {
    let grid = *s.grid();
    grid.require_size(3)?;
    let (mut a, mut b) = (Vec::with_capacity(grid.len()), Vec::with_capacity(grid.len()));
    for idx in 0..grid.len() {
        let (i, j) = grid.coords(idx);
        let inv = linalg::inverse(&s.field.values[idx])?;
        let (sz, szb) = s.field.d_z_pair(i, j);
        a.push(&inv * sz);
        b.push(inv * szb);
    }
    Ok(MaurerCartanPair { a: NodeMatrices::new(grid, a)?, b: NodeMatrices::new(grid, b)? })
}

/// `|∂x(s^{-1}s_x) + ∂y(s^{-1}s_y)|` on nodes two steps from the edge, so both
/// difference layers are central.
pub fn harmonic_residual(s: &HarmonicMapGrid) -> Result<NodeScalars> {
    let grid = *s.grid();
    grid.require_size(5)?;
    let mut ux = Vec::with_capacity(grid.len());
    let mut uy = Vec::with_capacity(grid.len());
    for idx in 0..grid.len() {
        let (i, j) = grid.coords(idx);
        let inv = linalg::inverse(&s.field.values[idx])?;
        ux.push(&inv * s.field.d_x(i, j));
        uy.push(inv * s.field.d_y(i, j));
    }
    let ux = NodeMatrices::new(grid, ux)?;
    let uy = NodeMatrices::new(grid, uy)?;
    Ok(NodeScalars::from_interior(grid, 2, |i, j| {
        linalg::max_norm(&(ux.d_x(i, j) + uy.d_y(i, j)))
    }))
}

/// Residuals of `A_z̄ + B_z = 0` and `A_z̄ - B_z = [A, B]` on nodes two steps from
/// the edge, where fields obtained by differencing are themselves central.
pub fn zero_curvature_residual(mc: &MaurerCartanPair) -> Result<(NodeScalars, NodeScalars)> {
    let grid = *mc.grid();
    grid.require_size(5)?;
    let mut harmonic = Vec::new();
    let mut flat = Vec::new();
    for (i, j) in grid.interior(2) {
        let (_, a_zb) = mc.a.d_z_pair(i, j);
        let (b_z, _) = mc.b.d_z_pair(i, j);
        harmonic.push(linalg::max_norm(&(&a_zb + &b_z)));
        let bracket = linalg::commutator(mc.a.at(i, j), mc.b.at(i, j));
        flat.push(linalg::max_norm(&(a_zb - b_z - bracket)));
    }
    let mut h = harmonic.into_iter();
    let mut f = flat.into_iter();
    Ok((
        NodeScalars::from_interior(grid, 2, |_, _| h.next().unwrap_or(f64::NAN)),
        NodeScalars::from_interior(grid, 2, |_, _| f.next().unwrap_or(f64::NAN)),
    ))
}
