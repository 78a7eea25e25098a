//! Uniform box grids, axis-aligned cubes and cube families.
//!
//! Every field in the crate is piecewise constant on the cells of a [`Grid`].
//! Cubes select cells by center inclusion with the half-open convention
//! `[lo, lo + side)` per axis, so a tiling of the box selects each cell once.

use crate::error::{Error, Result};

/// Largest supported domain dimension.
pub const MAX_DIM: usize = 3;

/// A point in the domain. Coordinates past `dim` are zero.
pub type Point = [f64; MAX_DIM];

// Tolerance (in units of a cell width) used when locating cube faces on the lattice.
const FACE_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    dim: usize,
    lower: Point,
    upper: Point,
    cells: usize,
    h: Point,
}

impl Grid {
    /// Uniform grid with `cells` cells per axis on the box `lower..upper`.
    pub fn new(lower: &[f64], upper: &[f64], cells: usize) -> Result<Self> {
        let dim = lower.len();
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::InvalidDomain(format!(
                "dimension must be 1, 2 or 3, got {dim}"
            )));
        }
        if upper.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: upper.len(),
            });
        }
        if cells < 2 {
            return Err(Error::InvalidDomain(format!(
                "need at least 2 cells per axis, got {cells}"
            )));
        }
        let mut lo = [0.0; MAX_DIM];
        let mut hi = [0.0; MAX_DIM];
        let mut h = [0.0; MAX_DIM];
        for a in 0..dim {
            if !(lower[a].is_finite() && upper[a].is_finite()) || upper[a] <= lower[a] {
                return Err(Error::InvalidDomain(format!(
                    "degenerate box along axis {a}: [{}, {}]",
                    lower[a], upper[a]
                )));
            }
            lo[a] = lower[a];
            hi[a] = upper[a];
            h[a] = (upper[a] - lower[a]) / cells as f64;
        }
        Ok(Self {
            dim,
            lower: lo,
            upper: hi,
            cells,
            h,
        })
    }

    /// The unit cube `[0,1]^n`.
    pub fn unit(dim: usize, cells: usize) -> Result<Self> {
        Self::new(&vec![0.0; dim], &vec![1.0; dim], cells)
    }

    /// `[δ, 1+δ]^n` with `δ = h/2`, keeping power weights away from the origin.
    pub fn offset_unit(dim: usize, cells: usize) -> Result<Self> {
        let delta = 0.5 / cells as f64;
        Self::new(&vec![delta; dim], &vec![1.0 + delta; dim], cells)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cells_per_axis(&self) -> usize {
        self.cells
    }

    pub fn cell_count(&self) -> usize {
        self.cells.pow(self.dim as u32)
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower[..self.dim]
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper[..self.dim]
    }

    /// Cell width along `axis`.
    pub fn h(&self, axis: usize) -> f64 {
        self.h[axis]
    }

    /// Largest cell width over all axes.
    pub fn h_max(&self) -> f64 {
        self.h[..self.dim].iter().copied().fold(0.0, f64::max)
    }

    pub fn cell_volume(&self) -> f64 {
        self.h[..self.dim].iter().product()
    }

    /// Lebesgue measure of the box.
    pub fn volume(&self) -> f64 {
        (0..self.dim).map(|a| self.upper[a] - self.lower[a]).product()
    }

    /// Whether all sides of the box have equal length.
    pub fn is_cubic(&self) -> bool {
        let s0 = self.upper[0] - self.lower[0];
        (1..self.dim).all(|a| ((self.upper[a] - self.lower[a]) - s0).abs() <= 1e-12 * s0.abs())
    }

    /// Per-axis lattice index of a linear cell index (axis 0 varies fastest).
    pub fn multi_index(&self, idx: usize) -> [usize; MAX_DIM] {
        let mut out = [0; MAX_DIM];
        let mut rest = idx;
        for slot in out.iter_mut().take(self.dim) {
            *slot = rest % self.cells;
            rest /= self.cells;
        }
        out
    }

    pub fn linear_index(&self, mi: &[usize; MAX_DIM]) -> usize {
        let mut idx = 0;
        for a in (0..self.dim).rev() {
            idx = idx * self.cells + mi[a];
        }
        idx
    }

    pub fn center(&self, idx: usize) -> Point {
        let mi = self.multi_index(idx);
        let mut p = [0.0; MAX_DIM];
        for a in 0..self.dim {
            p[a] = self.lower[a] + (mi[a] as f64 + 0.5) * self.h[a];
        }
        p
    }

    pub fn centers(&self) -> Vec<Point> {
        (0..self.cell_count()).map(|i| self.center(i)).collect()
    }

    /// Index range `[start, end)` of cells along `axis` whose centers lie in `[lo, hi)`.
    fn axis_range(&self, axis: usize, lo: f64, hi: f64) -> (usize, usize) {
        let to_cells = |x: f64| (x - self.lower[axis]) / self.h[axis] - 0.5 - FACE_EPS;
        let clamp = |v: f64| v.ceil().clamp(0.0, self.cells as f64) as usize;
        let start = clamp(to_cells(lo));
        let end = clamp(to_cells(hi));
        (start, end.max(start))
    }

    /// Euclidean norm of a point.
    pub fn norm(&self, p: &Point) -> f64 {
        p[..self.dim].iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Distance from a point inside the box to the box boundary.
    pub fn distance_to_boundary(&self, p: &Point) -> f64 {
        (0..self.dim)
            .map(|a| (p[a] - self.lower[a]).min(self.upper[a] - p[a]))
            .fold(f64::INFINITY, f64::min)
    }
}

/// `make_uniform_grid(n, box, m)`: a grid on `[lo, hi]^n` with `m` cells per axis.
pub fn make_uniform_grid(dim: usize, lo: f64, hi: f64, cells: usize) -> Result<Grid> {
    Grid::new(&vec![lo; dim], &vec![hi; dim], cells)
}

/// An axis-aligned cube `lower + [0, side)^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Cube {
    dim: usize,
    lower: Point,
    side: f64,
}

impl Cube {
    pub fn new(lower: &[f64], side: f64) -> Result<Self> {
        let dim = lower.len();
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::InvalidDomain(format!("cube dimension {dim}")));
        }
        if !(side.is_finite() && side > 0.0) {
            return Err(Error::InvalidDomain(format!("cube side must be positive, got {side}")));
        }
        let mut lo = [0.0; MAX_DIM];
        lo[..dim].copy_from_slice(lower);
        Ok(Self {
            dim,
            lower: lo,
            side,
        })
    }

    /// The cube of the given side centered at the origin.
    pub fn centered(dim: usize, side: f64) -> Result<Self> {
        Self::new(&vec![-0.5 * side; dim], side)
    }

    /// The whole box of a cubic grid.
    pub fn from_grid(grid: &Grid) -> Result<Self> {
        if !grid.is_cubic() {
            return Err(Error::InvalidDomain("grid box is not a cube".into()));
        }
        Self::new(grid.lower(), grid.upper[0] - grid.lower[0])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower[..self.dim]
    }

    pub fn side(&self) -> f64 {
        self.side
    }

    pub fn measure(&self) -> f64 {
        self.side.powi(self.dim as i32)
    }

    pub fn center(&self) -> Point {
        let mut c = [0.0; MAX_DIM];
        for a in 0..self.dim {
            c[a] = self.lower[a] + 0.5 * self.side;
        }
        c
    }

    pub fn is_origin_centered(&self) -> bool {
        let c = self.center();
        let tol = 1e-12 * self.side.max(1.0);
        c[..self.dim].iter().all(|x| x.abs() <= tol)
    }

    /// Half-open membership test.
    pub fn contains(&self, p: &Point) -> bool {
        (0..self.dim).all(|a| p[a] >= self.lower[a] && p[a] < self.lower[a] + self.side)
    }

    /// The cube translated by `offset`.
    pub fn translated(&self, offset: &[f64]) -> Self {
        let mut c = self.clone();
        for a in 0..self.dim {
            c.lower[a] += offset[a];
        }
        c
    }

    /// The concentric cube with side scaled by `factor`.
    pub fn dilated(&self, factor: f64) -> Self {
        let c = self.center();
        let side = self.side * factor;
        let mut lower = [0.0; MAX_DIM];
        for a in 0..self.dim {
            lower[a] = c[a] - 0.5 * side;
        }
        Self {
            dim: self.dim,
            lower,
            side,
        }
    }

    /// Whether the open interiors of two cubes intersect.
    pub fn interiors_overlap(&self, other: &Cube) -> bool {
        let tol = 1e-12 * self.side.max(other.side);
        (0..self.dim).all(|a| {
            self.lower[a] < other.lower[a] + other.side - tol
                && other.lower[a] < self.lower[a] + self.side - tol
        })
    }

    /// Linear indices (ascending) of the grid cells whose centers lie in the cube.
    pub fn cells(&self, grid: &Grid) -> Vec<usize> {
        if self.dim != grid.dim() {
            return Vec::new();
        }
        let mut ranges = [(0usize, 1usize); MAX_DIM];
        for (a, r) in ranges.iter_mut().enumerate().take(self.dim) {
            *r = grid.axis_range(a, self.lower[a], self.lower[a] + self.side);
            if r.0 == r.1 {
                return Vec::new();
            }
        }
        let count: usize = ranges.iter().map(|(s, e)| e - s).product();
        let mut out = Vec::with_capacity(count);
        for k in ranges[2].0..ranges[2].1 {
            for j in ranges[1].0..ranges[1].1 {
                for i in ranges[0].0..ranges[0].1 {
                    out.push(grid.linear_index(&[i, j, k]));
                }
            }
        }
        out
    }
}

/// An ordered list of cubes, optionally certified pairwise disjoint.
#[derive(Debug, Clone, PartialEq)]
pub struct CubeFamily {
    cubes: Vec<Cube>,
    disjoint: bool,
}

impl CubeFamily {
    /// A family without any disjointness claim.
    pub fn new(cubes: Vec<Cube>) -> Self {
        Self {
            cubes,
            disjoint: false,
        }
    }

    /// A family verified to have pairwise disjoint interiors.
    pub fn disjoint(cubes: Vec<Cube>) -> Result<Self> {
        if let Some((i, j)) = first_overlap(&cubes) {
            return Err(Error::Overlap(i, j));
        }
        Ok(Self {
            cubes,
            disjoint: true,
        })
    }

    pub fn cubes(&self) -> &[Cube] {
        &self.cubes
    }

    pub fn len(&self) -> usize {
        self.cubes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cubes.is_empty()
    }

    pub fn is_disjoint(&self) -> bool {
        self.disjoint
    }

    /// Re-runs the pairwise overlap test.
    pub fn check_disjoint(&self) -> Result<()> {
        match first_overlap(&self.cubes) {
            Some((i, j)) => Err(Error::Overlap(i, j)),
            None => Ok(()),
        }
    }

    /// Concatenation; the result carries no disjointness claim.
    pub fn concat(families: &[CubeFamily]) -> Self {
        Self::new(families.iter().flat_map(|f| f.cubes.iter().cloned()).collect())
    }
}

fn first_overlap(cubes: &[Cube]) -> Option<(usize, usize)> {
    for i in 0..cubes.len() {
        for j in (i + 1)..cubes.len() {
            if cubes[i].interiors_overlap(&cubes[j]) {
                return Some((i, j));
            }
        }
    }
    None
}

/// Integration region.
#[derive(Debug, Clone, Copy)]
pub enum Region<'a> {
    Whole,
    Cube(&'a Cube),
}

/// Result of [`integrate`]; `empty` flags a region that selected no cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub empty: bool,
}

/// Midpoint sum of `values` (one per cell) over the cells selected by `region`.
pub fn integrate(grid: &Grid, values: &[f64], region: Region<'_>) -> Integral {
    let vol = grid.cell_volume();
    match region {
        Region::Whole => Integral {
            value: values.iter().sum::<f64>() * vol,
            empty: values.is_empty(),
        },
        Region::Cube(q) => {
            let cells = q.cells(grid);
            Integral {
                value: cells.iter().map(|&i| values[i]).sum::<f64>() * vol,
                empty: cells.is_empty(),
            }
        }
    }
}

/// The `2^{kn}` grid-aligned dyadic cubes of level `k` tiling a cubic box.
pub fn dyadic_cubes(grid: &Grid, level: u32) -> Result<CubeFamily> {
    let parts = 1usize
        .checked_shl(level)
        .ok_or_else(|| Error::Alignment(format!("level {level} too deep")))?;
    if !grid.cells_per_axis().is_multiple_of(parts) {
        return Err(Error::Alignment(format!(
            "2^{level} = {parts} does not divide {} cells per axis",
            grid.cells_per_axis()
        )));
    }
    let root = Cube::from_grid(grid)?;
    let side = root.side() / parts as f64;
    let dim = grid.dim();
    let total = parts.pow(dim as u32);
    let mut cubes = Vec::with_capacity(total);
    for t in 0..total {
        let mut rest = t;
        let mut lower = [0.0; MAX_DIM];
        for (a, lo) in lower.iter_mut().enumerate().take(dim) {
            let k = rest % parts;
            rest /= parts;
            *lo = grid.lower()[a] + k as f64 * side;
        }
        cubes.push(Cube::new(&lower[..dim], side)?);
    }
    Ok(CubeFamily {
        cubes,
        disjoint: true,
    })
}

/// Dyadic cubes of level `k` translated by half a side, keeping those inside the box.
pub fn shifted_dyadic_cubes(grid: &Grid, level: u32) -> Result<CubeFamily> {
    let base = dyadic_cubes(grid, level)?;
    if !grid.cells_per_axis().is_multiple_of(1usize << (level + 1)) {
        return Err(Error::Alignment(format!(
            "half-shift of level {level} is not grid aligned"
        )));
    }
    let side = base.cubes[0].side();
    let shift = vec![0.5 * side; grid.dim()];
    let tol = 1e-12 * side;
    let cubes = base
        .cubes
        .iter()
        .map(|c| c.translated(&shift))
        .filter(|c| (0..grid.dim()).all(|a| c.lower[a] + c.side <= grid.upper()[a] + tol))
        .collect();
    Ok(CubeFamily {
        cubes,
        disjoint: true,
    })
}

/// Dyadic levels `lo..=hi` concatenated (not disjoint across levels).
pub fn dyadic_levels(grid: &Grid, lo: u32, hi: u32) -> Result<CubeFamily> {
    let fams = (lo..=hi)
        .map(|k| dyadic_cubes(grid, k))
        .collect::<Result<Vec<_>>>()?;
    Ok(CubeFamily::concat(&fams))
}

/// The translates `Q + side·k`, `k ∈ ℤ^n`, of an origin-centered cube that meet the box.
pub fn translate_tiling(q: &Cube, grid: &Grid) -> Result<CubeFamily> {
    if !q.is_origin_centered() {
        return Err(Error::Precondition(
            "tiling cube must be centered at the origin".into(),
        ));
    }
    if q.dim() != grid.dim() {
        return Err(Error::DimensionMismatch {
            expected: grid.dim(),
            found: q.dim(),
        });
    }
    let dim = grid.dim();
    let side = q.side();
    let mut ranges = [(0i64, 0i64); MAX_DIM];
    for (a, r) in ranges.iter_mut().enumerate().take(dim) {
        // tile k covers [side·(k - 1/2), side·(k + 1/2)); keep tiles meeting [lower, upper)
        let k_lo = (grid.lower()[a] / side - 0.5).floor() as i64;
        let k_hi = (grid.upper()[a] / side + 0.5).ceil() as i64;
        *r = (k_lo, k_hi);
    }
    let mut cubes = Vec::new();
    let mut ks = [0i64; MAX_DIM];
    fn walk(
        a: usize,
        dim: usize,
        ranges: &[(i64, i64); MAX_DIM],
        ks: &mut [i64; MAX_DIM],
        q: &Cube,
        grid: &Grid,
        out: &mut Vec<Cube>,
    ) {
        if a == dim {
            let offset: Vec<f64> = (0..dim).map(|b| ks[b] as f64 * q.side()).collect();
            let c = q.translated(&offset);
            let meets = (0..dim).all(|b| {
                c.lower[b] < grid.upper()[b] && c.lower[b] + c.side > grid.lower()[b]
            });
            if meets {
                out.push(c);
            }
            return;
        }
        for k in ranges[a].0..=ranges[a].1 {
            ks[a] = k;
            walk(a + 1, dim, ranges, ks, q, grid, out);
        }
    }
    walk(0, dim, &ranges, &mut ks, q, grid, &mut cubes);
    Ok(CubeFamily {
        cubes,
        disjoint: true,
    })
}
