use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::config::GridParams;
use crate::error::{Error, Result};
use crate::io::{matrix_from_json, matrix_to_json, MatrixJson};
use crate::linalg::{self, CMatrix, C64};

const LATTICE_SLACK: f64 = 1e-9;

/// Uniform lattice on `[x0,x1] x [y0,y1]` with spacing `h` and a basepoint node.
///
/// Nodes are indexed `j * nx + i` with `z = x0 + i h + i (y0 + j h)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridDomain {
    x0: f64,
    y0: f64,
    h: f64,
    nx: usize,
    ny: usize,
    basepoint: (usize, usize),
}

fn lattice_count(lo: f64, hi: f64, h: f64, axis: &str) -> Result<usize> {
    let steps = (hi - lo) / h;
    let rounded = steps.round();
    if !(steps.is_finite() && rounded >= 0.0) || (steps - rounded).abs() > LATTICE_SLACK * rounded.max(1.0) {
        return Err(Error::InvalidGrid(format!(
            "{axis}-range [{lo}, {hi}] is not a multiple of h = {h}"
        )));
    }
    Ok(rounded as usize + 1)
}

impl GridDomain {
    pub fn new(params: &GridParams) -> Result<Self> {
        let GridParams { x0, x1, y0, y1, h, basepoint } = *params;
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidGrid(format!("spacing must be positive, got {h}")));
        }
        let nx = lattice_count(x0, x1, h, "x")?;
        let ny = lattice_count(y0, y1, h, "y")?;
        let basepoint = match basepoint {
            None => ((nx - 1) / 2, (ny - 1) / 2),
            Some([px, py]) => {
                let i = (px - x0) / h;
                let j = (py - y0) / h;
                let (ri, rj) = (i.round(), j.round());
                if (i - ri).abs() > 1e-6 || (j - rj).abs() > 1e-6 || ri < 0.0 || rj < 0.0 || ri as usize >= nx || rj as usize >= ny {
                    return Err(Error::InvalidGrid(format!("basepoint ({px}, {py}) is not a grid node")));
                }
                (ri as usize, rj as usize)
            }
        };
        Ok(GridDomain { x0, y0, h, nx, ny, basepoint })
    }

    pub fn params(&self) -> GridParams {
        let (px, py) = self.basepoint;
        let p = self.point(px, py);
        GridParams {
            x0: self.x0,
            x1: self.x0 + (self.nx - 1) as f64 * self.h,
            y0: self.y0,
            y1: self.y0 + (self.ny - 1) as f64 * self.h,
            h: self.h,
            basepoint: Some([p.re, p.im]),
        }
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn coords(&self, idx: usize) -> (usize, usize) {
        (idx % self.nx, idx / self.nx)
    }

    pub fn point(&self, i: usize, j: usize) -> C64 {
        C64::new(self.x0 + i as f64 * self.h, self.y0 + j as f64 * self.h)
    }

    pub fn basepoint(&self) -> (usize, usize) {
        self.basepoint
    }

    pub fn basepoint_index(&self) -> usize {
        self.index(self.basepoint.0, self.basepoint.1)
    }

    pub fn basepoint_z(&self) -> C64 {
        self.point(self.basepoint.0, self.basepoint.1)
    }

    /// Fails unless the grid has at least `min` nodes along each axis.
    pub fn require_size(&self, min: usize) -> Result<()> {
        if self.nx < min || self.ny < min {
            return Err(Error::InvalidGrid(format!(
                "need at least {min}x{min} nodes, grid is {}x{}",
                self.nx, self.ny
            )));
        }
        Ok(())
    }

    /// Nodes at least `margin` steps away from every edge, in index order.
    pub fn interior(&self, margin: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        let (nx, ny) = (self.nx, self.ny);
        (margin..ny.saturating_sub(margin))
            .flat_map(move |j| (margin..nx.saturating_sub(margin)).map(move |i| (i, j)))
    }
}

impl Serialize for GridDomain {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.params().serialize(s)
    }
}

impl<'de> Deserialize<'de> for GridDomain {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let p = GridParams::deserialize(d)?;
        GridDomain::new(&p).map_err(serde::de::Error::custom)
    }
}

/// Offsets and weights (in units of `1/(2h)`) of the first-derivative stencil at
/// position `at` of a line of `len` points: central in the interior, second-order
/// one-sided at the ends.
pub(crate) fn derivative_stencil(len: usize, at: usize) -> [(usize, f64); 3] {
    if at == 0 {
        [(0, -3.0), (1, 4.0), (2, -1.0)]
    } else if at == len - 1 {
        [(len - 1, 3.0), (len - 2, -4.0), (len - 3, 1.0)]
    } else {
        [(at + 1, 1.0), (at - 1, -1.0), (at, 0.0)]
    }
}

pub(crate) fn apply_stencil<'a, F>(stencil: [(usize, f64); 3], h: f64, get: F) -> CMatrix
where
    F: Fn(usize) -> &'a CMatrix,
{
    let mut acc = get(stencil[0].0) * C64::new(stencil[0].1, 0.0);
    for &(k, w) in &stencil[1..] {
        if w != 0.0 {
            acc += get(k) * C64::new(w, 0.0);
        }
    }
    acc * C64::new(1.0 / (2.0 * h), 0.0)
}

/// A matrix per node.
#[derive(Clone, Debug, PartialEq)]
pub struct NodeMatrices {
    pub grid: GridDomain,
    pub values: Vec<CMatrix>,
}

impl NodeMatrices {
    pub fn new(grid: GridDomain, values: Vec<CMatrix>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "expected {} node values, got {}",
                grid.len(),
                values.len()
            )));
        }
        Ok(NodeMatrices { grid, values })
    }

    pub fn at(&self, i: usize, j: usize) -> &CMatrix {
        &self.values[self.grid.index(i, j)]
    }

    pub fn d_x(&self, i: usize, j: usize) -> CMatrix {
        apply_stencil(derivative_stencil(self.grid.nx, i), self.grid.h, |k| self.at(k, j))
    }

    pub fn d_y(&self, i: usize, j: usize) -> CMatrix {
        apply_stencil(derivative_stencil(self.grid.ny, j), self.grid.h, |k| self.at(i, k))
    }

    /// `∂_z = (∂_x - i ∂_y) / 2` and `∂_z̄ = (∂_x + i ∂_y) / 2`.
    pub fn d_z_pair(&self, i: usize, j: usize) -> (CMatrix, CMatrix) {
        let dx = self.d_x(i, j);
        let dy = self.d_y(i, j) * C64::new(0.0, 1.0);
        let half = C64::new(0.5, 0.0);
        ((&dx - &dy) * half, (dx + dy) * half)
    }
}

/// A nonnegative scalar per node on the interior at a fixed margin.
#[derive(Clone, Debug, PartialEq)]
pub struct NodeScalars {
    pub grid: GridDomain,
    pub margin: usize,
    values: Vec<f64>,
}

impl NodeScalars {
    pub(crate) fn from_interior<F: FnMut(usize, usize) -> f64>(grid: GridDomain, margin: usize, mut f: F) -> Self {
        let values = grid.interior(margin).map(|(i, j)| f(i, j)).collect();
        NodeScalars { grid, margin, values }
    }

    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        let m = self.margin;
        let w = self.grid.nx.checked_sub(2 * m)?;
        if i < m || j < m || i >= self.grid.nx - m || j >= self.grid.ny - m {
            return None;
        }
        self.values.get((j - m) * w + (i - m)).copied()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Largest value; NaN entries propagate.
    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .fold(0.0, |acc: f64, v| if v.is_nan() || acc.is_nan() { f64::NAN } else { acc.max(*v) })
    }
}

/// Sampled map `s: Ω -> SU(n)`.
#[derive(Clone, Debug, PartialEq)]
pub struct HarmonicMapGrid {
    pub field: NodeMatrices,
}

/// Pointwise defects of a sampled SU(n) map.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MapDefects {
    pub unitarity: f64,
    pub determinant: f64,
    pub basepoint: f64,
}

impl HarmonicMapGrid {
    pub fn new(grid: GridDomain, values: Vec<CMatrix>) -> Result<Self> {
        Ok(HarmonicMapGrid { field: NodeMatrices::new(grid, values)? })
    }

    pub fn from_fn<F: Fn(C64) -> CMatrix>(grid: GridDomain, f: F) -> Self {
        let values = (0..grid.len())
            .map(|idx| {
                let (i, j) = grid.coords(idx);
                f(grid.point(i, j))
            })
            .collect();
        HarmonicMapGrid { field: NodeMatrices { grid, values } }
    }

    pub fn grid(&self) -> &GridDomain {
        &self.field.grid
    }

    pub fn values(&self) -> &[CMatrix] {
        &self.field.values
    }

    pub fn defects(&self) -> MapDefects {
        let mut unitarity = 0.0f64;
        let mut determinant = 0.0f64;
        for s in &self.field.values {
            unitarity = unitarity.max(linalg::unitarity_defect(s));
            determinant = determinant.max((linalg::det(s) - 1.0).norm());
        }
        let basepoint = linalg::dist_to_identity(&self.field.values[self.grid().basepoint_index()]);
        MapDefects { unitarity, determinant, basepoint }
    }
}

#[derive(Serialize, Deserialize)]
struct MapJson {
    #[serde(flatten)]
    grid: GridParams,
    values: Vec<MatrixJson>,
}

impl Serialize for HarmonicMapGrid {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MapJson {
            grid: self.grid().params(),
            values: self.values().iter().map(matrix_to_json).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for HarmonicMapGrid {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let j = MapJson::deserialize(d)?;
        let grid = GridDomain::new(&j.grid).map_err(D::Error::custom)?;
        let n = j.values.first().map(|m| m.len()).unwrap_or(0);
        let values = j
            .values
            .iter()
            .map(|m| matrix_from_json(m, n))
            .collect::<Result<Vec<_>>>()
            .map_err(D::Error::custom)?;
        HarmonicMapGrid::new(grid, values).map_err(D::Error::custom)
    }
}
