//! Averaging operators, mollifiers and discrete convolution.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exponent::ExponentFunction;
use crate::field::{MatrixField, VectorField};
use crate::grid::{translate_tiling, Cube, CubeFamily, Grid, MAX_DIM};
use crate::varnorm::{matrix_weighted_norm, NormOptions};

/// A kernel on integer cell offsets; `(k, w)` contributes `w·f(x − k h)` at `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteKernel {
    dim: usize,
    h: [f64; MAX_DIM],
    offsets: Vec<[i64; MAX_DIM]>,
    weights: Vec<f64>,
}

impl DiscreteKernel {
    pub fn new(grid: &Grid, offsets: Vec<[i64; MAX_DIM]>, weights: Vec<f64>) -> Result<Self> {
        if offsets.len() != weights.len() || offsets.is_empty() {
            return Err(Error::InvalidInput("kernel needs matching, nonempty offsets and weights".into()));
        }
        let mut h = [0.0; MAX_DIM];
        for (a, slot) in h.iter_mut().enumerate().take(grid.dim()) {
            *slot = grid.h(a);
        }
        Ok(Self {
            dim: grid.dim(),
            h,
            offsets,
            weights,
        })
    }

    /// The normalized box kernel `|Q|⁻¹χ_Q` of an origin-centered cube.
    pub fn box_average(grid: &Grid, q: &Cube) -> Result<Self> {
        if !q.is_origin_centered() {
            return Err(Error::Precondition("box kernel cube must be centered at the origin".into()));
        }
        let half = 0.5 * q.side();
        let mut ranges = [(0i64, 0i64); MAX_DIM];
        for (a, r) in ranges.iter_mut().enumerate().take(grid.dim()) {
            let h = grid.h(a);
            // offsets k with k·h in [−ℓ/2, ℓ/2)
            let lo = (-half / h - 1e-9).ceil() as i64;
            let hi = (half / h - 1e-9).ceil() as i64 - 1;
            *r = (lo, hi);
        }
        let offsets = offset_box(grid.dim(), &ranges);
        if offsets.is_empty() {
            return Err(Error::UnderResolvedKernel {
                t: q.side(),
                h: grid.h_max(),
            });
        }
        let w = grid.cell_volume() / q.measure();
        let weights = vec![w; offsets.len()];
        Self::new(grid, offsets, weights)
    }

    /// The kernel of the averaging over a discrete ball given by offset indices.
    pub fn uniform(grid: &Grid, offsets: Vec<[i64; MAX_DIM]>) -> Result<Self> {
        let w = 1.0 / offsets.len().max(1) as f64;
        let n = offsets.len();
        Self::new(grid, offsets, vec![w; n])
    }

    pub fn offsets(&self) -> &[[i64; MAX_DIM]] {
        &self.offsets
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Euclidean length of an offset.
    pub fn radius(&self, k: &[i64; MAX_DIM]) -> f64 {
        (0..self.dim)
            .map(|a| (k[a] as f64 * self.h[a]).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// Largest offset length carrying weight.
    pub fn support_radius(&self) -> f64 {
        self.offsets
            .iter()
            .zip(&self.weights)
            .filter(|(_, &w)| w != 0.0)
            .map(|(k, _)| self.radius(k))
            .fold(0.0, f64::max)
    }
}

fn offset_box(dim: usize, ranges: &[(i64, i64); MAX_DIM]) -> Vec<[i64; MAX_DIM]> {
    let mut out = Vec::new();
    let r = |a: usize| if a < dim { ranges[a] } else { (0, 0) };
    for k2 in r(2).0..=r(2).1 {
        for k1 in r(1).0..=r(1).1 {
            for k0 in r(0).0..=r(0).1 {
                out.push([k0, k1, k2]);
            }
        }
    }
    out
}

/// The bump `exp(−1/(1−s²))` for `s < 1`, zero otherwise.
pub fn bump(s: f64) -> f64 {
    if s < 1.0 {
        (-1.0 / (1.0 - s * s)).exp()
    } else {
        0.0
    }
}

/// `φ_t` sampled at cell offsets and normalized to unit discrete mass.
#[derive(Debug, Clone, PartialEq)]
pub struct Mollifier {
    pub t: f64,
    kernel: DiscreteKernel,
}

impl Mollifier {
    pub fn new(grid: &Grid, t: f64) -> Result<Self> {
        let h = grid.h_max();
        if !(t.is_finite() && t >= h * (1.0 - 1e-12)) {
            return Err(Error::UnderResolvedKernel { t, h });
        }
        let mut ranges = [(0i64, 0i64); MAX_DIM];
        for (a, r) in ranges.iter_mut().enumerate().take(grid.dim()) {
            let k = (t / grid.h(a)).floor() as i64;
            *r = (-k, k);
        }
        let mut offsets = Vec::new();
        let mut weights = Vec::new();
        for k in offset_box(grid.dim(), &ranges) {
            let s = (0..grid.dim())
                .map(|a| (k[a] as f64 * grid.h(a)).powi(2))
                .sum::<f64>()
                .sqrt()
                / t;
            let v = bump(s);
            if v > 0.0 {
                offsets.push(k);
                weights.push(v);
            }
        }
        let total: f64 = weights.iter().sum();
        for w in weights.iter_mut() {
            *w /= total;
        }
        Ok(Self {
            t,
            kernel: DiscreteKernel::new(grid, offsets, weights)?,
        })
    }

    pub fn kernel(&self) -> &DiscreteKernel {
        &self.kernel
    }

    /// Nonnegative, and nonincreasing in the offset length.
    pub fn profile_is_radial_decreasing(&self) -> bool {
        let mut pairs: Vec<(f64, f64)> = self
            .kernel
            .offsets
            .iter()
            .zip(&self.kernel.weights)
            .map(|(k, &w)| (self.kernel.radius(k), w))
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        pairs.iter().all(|p| p.1 >= 0.0)
            && pairs.windows(2).all(|w| {
                let tol = 1e-14 * w[0].1.max(1e-300);
                if (w[1].0 - w[0].0).abs() <= 1e-12 * w[1].0 {
                    (w[1].1 - w[0].1).abs() <= tol.max(1e-15)
                } else {
                    w[1].1 <= w[0].1 + tol
                }
            })
    }
}

/// Discrete convolution with zero extension outside the box.
pub fn convolve(f: &VectorField, kernel: &DiscreteKernel) -> Result<VectorField> {
    let grid = f.grid();
    if kernel.dim != grid.dim() {
        return Err(Error::DimensionMismatch {
            expected: grid.dim(),
            found: kernel.dim,
        });
    }
    let d = f.dim();
    let m = grid.cells_per_axis() as i64;
    let dim = grid.dim();
    let rows: Vec<Vec<f64>> = (0..grid.cell_count())
        .into_par_iter()
        .map(|x| {
            let mi = grid.multi_index(x);
            let mut acc = vec![0.0; d];
            'offsets: for (k, &w) in kernel.offsets.iter().zip(&kernel.weights) {
                let mut src = [0usize; MAX_DIM];
                for a in 0..dim {
                    let s = mi[a] as i64 - k[a];
                    if s < 0 || s >= m {
                        continue 'offsets;
                    }
                    src[a] = s as usize;
                }
                let v = f.at(grid.linear_index(&src));
                for (o, vi) in acc.iter_mut().zip(v) {
                    *o += w * vi;
                }
            }
            acc
        })
        .collect();
    VectorField::new(grid, d, rows.concat())
}

/// `A_Q f`: the mean of `f` over `Q` on `Q`'s cells, zero elsewhere.
pub fn average_on_cube(f: &VectorField, q: &Cube) -> Result<VectorField> {
    let mut out = VectorField::zeros(f.grid(), f.dim());
    add_average(f, q, &mut out)?;
    Ok(out)
}

fn add_average(f: &VectorField, q: &Cube, out: &mut VectorField) -> Result<()> {
    let cells = q.cells(f.grid());
    if cells.is_empty() {
        return Err(Error::EmptyRegion);
    }
    let d = f.dim();
    let mut mean = vec![0.0; d];
    for &c in &cells {
        for (m, v) in mean.iter_mut().zip(f.at(c)) {
            *m += v;
        }
    }
    for m in mean.iter_mut() {
        *m /= cells.len() as f64;
    }
    for &c in &cells {
        out.at_mut(c).copy_from_slice(&mean);
    }
    Ok(())
}

/// `A_𝒬 f = Σ_Q (A_Q f)` over a disjoint family.
pub fn average_on_family(f: &VectorField, family: &CubeFamily) -> Result<VectorField> {
    family.check_disjoint()?;
    let mut out = VectorField::zeros(f.grid(), f.dim());
    for q in family.cubes() {
        add_average(f, q, &mut out)?;
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub norm_f: f64,
}

impl BoundCheck {
    pub fn holds(&self, rel_slack: f64) -> bool {
        self.lhs <= self.rhs * (1.0 + rel_slack)
    }
}

/// `‖A_Q f‖_{L^{p(·)}(W)}` against `4·[W]·‖f‖_{L^{p(·)}(W)}` for a given constant `[W]`.
pub fn averaging_bound_check(
    w: &MatrixField,
    p: &ExponentFunction,
    f: &VectorField,
    q: &Cube,
    w_constant: f64,
) -> Result<BoundCheck> {
    let avg = average_on_cube(f, q)?;
    let lhs = matrix_weighted_norm(w, &avg, p)?.value;
    let norm_f = matrix_weighted_norm(w, f, p)?.value;
    Ok(BoundCheck {
        lhs,
        rhs: 4.0 * w_constant * norm_f,
        norm_f,
    })
}

/// `‖A_𝒬 f‖` and `‖f‖` in `L^{p(·)}(W)` (the family constant is not explicit; `rhs` is `‖f‖`).
pub fn family_averaging_check(
    w: &MatrixField,
    p: &ExponentFunction,
    f: &VectorField,
    family: &CubeFamily,
) -> Result<BoundCheck> {
    let avg = average_on_family(f, family)?;
    let lhs = matrix_weighted_norm(w, &avg, p)?.value;
    let norm_f = matrix_weighted_norm(w, f, p)?.value;
    Ok(BoundCheck {
        lhs,
        rhs: norm_f,
        norm_f,
    })
}

#[derive(Debug, Clone)]
pub struct TiledBound {
    /// `‖ |Q|⁻¹χ_Q ∗ f ‖_{L^{p(·)}(W)}`.
    pub lhs: f64,
    pub norm_f: f64,
    /// The translates `Q_k` meeting the box.
    pub tiles: CubeFamily,
    /// The dilates `3Q_k`.
    pub covers: Vec<Cube>,
}

pub fn tiled_convolution_bound(
    w: &MatrixField,
    p: &ExponentFunction,
    f: &VectorField,
    q: &Cube,
) -> Result<TiledBound> {
    let tiles = translate_tiling(q, f.grid())?;
    let kernel = DiscreteKernel::box_average(f.grid(), q)?;
    let conv = convolve(f, &kernel)?;
    let lhs = matrix_weighted_norm(w, &conv, p)?.value;
    let norm_f = matrix_weighted_norm(w, f, p)?.value;
    let covers = tiles.cubes().iter().map(|c| c.dilated(3.0)).collect();
    Ok(TiledBound {
        lhs,
        norm_f,
        tiles,
        covers,
    })
}

/// `Σ_k a_k |B_k|⁻¹ χ_{B_k}` below a mollifier, with nested discrete balls `B_k`.
#[derive(Debug, Clone)]
pub struct LayerCakeMixture {
    pub levels: usize,
    /// Slab masses `a_k`.
    pub weights: Vec<f64>,
    /// Offset indices (into the mollifier kernel) of each ball.
    pub balls: Vec<Vec<usize>>,
    pub radii: Vec<f64>,
    kernel: DiscreteKernel,
    grid: Grid,
}

impl LayerCakeMixture {
    /// Mixture mass at kernel offset `j`.
    pub fn value_at(&self, j: usize) -> f64 {
        self.balls
            .iter()
            .zip(&self.weights)
            .filter(|(b, _)| b.binary_search(&j).is_ok())
            .map(|(b, a)| a / b.len() as f64)
            .sum()
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.kernel.weights.len()).map(|j| self.value_at(j)).collect()
    }

    /// `max_j (φ_j − Φ_j)`.
    pub fn sup_gap(&self) -> f64 {
        self.values()
            .iter()
            .zip(&self.kernel.weights)
            .map(|(m, k)| k - m)
            .fold(0.0, f64::max)
    }

    /// `1 − Σ a_k`.
    pub fn mass_gap(&self) -> f64 {
        1.0 - self.weights.iter().sum::<f64>()
    }

    /// Normalized averaging kernel of ball `k`.
    pub fn ball_kernel(&self, k: usize) -> Result<DiscreteKernel> {
        DiscreteKernel::uniform(
            &self.grid,
            self.balls[k].iter().map(|&j| self.kernel.offsets[j]).collect(),
        )
    }

    /// The whole mixture as a kernel.
    pub fn as_kernel(&self) -> Result<DiscreteKernel> {
        DiscreteKernel::new(&self.grid, self.kernel.offsets.clone(), self.values())
    }
}

/// Level slicing of a mollifier at `s_k = k·max φ/K`, `k = 1..K`.
pub fn layer_cake(grid: &Grid, mollifier: &Mollifier, levels: usize) -> Result<LayerCakeMixture> {
    if levels == 0 {
        return Err(Error::InvalidInput("layer cake needs K ≥ 1".into()));
    }
    let kernel = mollifier.kernel().clone();
    let kmax = kernel.weights.iter().copied().fold(0.0, f64::max);
    let ds = kmax / levels as f64;
    let mut weights = Vec::with_capacity(levels);
    let mut balls = Vec::with_capacity(levels);
    let mut radii = Vec::with_capacity(levels);
    for k in 1..=levels {
        let s = if k == levels { kmax } else { k as f64 * ds };
        let ball: Vec<usize> = (0..kernel.weights.len())
            .filter(|&j| kernel.weights[j] >= s)
            .collect();
        radii.push(ball.iter().map(|&j| kernel.radius(&kernel.offsets[j])).fold(0.0, f64::max));
        weights.push(ds * ball.len() as f64);
        balls.push(ball);
    }
    Ok(LayerCakeMixture {
        levels,
        weights,
        balls,
        radii,
        kernel,
        grid: grid.clone(),
    })
}

/// `t₀, t₀/2, …` down to the last value not below `t_min`.
pub fn geometric_schedule(t0: f64, t_min: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut t = t0;
    while t >= t_min * (1.0 - 1e-12) {
        out.push(t);
        t *= 0.5;
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StudyRow {
    pub t: f64,
    /// `‖φ_t∗f − f‖_{L^{p(·)}(W)}`.
    pub error: f64,
    /// `‖φ_t∗f‖_{L^{p(·)}(W)}`.
    pub norm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyTable {
    pub rows: Vec<StudyRow>,
    pub norm_f: f64,
    pub strictly_decreasing: bool,
    pub sup_norm: f64,
}

impl StudyTable {
    /// `sup_t ‖φ_t∗f‖ / (c·‖f‖)` for a weight constant `c`.
    pub fn envelope(&self, w_constant: f64) -> f64 {
        self.sup_norm / (w_constant * self.norm_f)
    }

    pub fn final_error(&self) -> f64 {
        self.rows.last().map_or(0.0, |r| r.error)
    }
}

pub fn approximate_identity_study(
    w: &MatrixField,
    p: &ExponentFunction,
    f: &VectorField,
    schedule: &[f64],
) -> Result<StudyTable> {
    let grid = f.grid();
    let h = grid.h_max();
    if schedule.is_empty() || schedule.windows(2).any(|s| s[1] >= s[0]) {
        return Err(Error::Precondition("t-schedule must be nonempty and strictly decreasing".into()));
    }
    let t_min = *schedule.last().unwrap();
    if t_min < 2.0 * h * (1.0 - 1e-12) {
        return Err(Error::Precondition(format!(
            "smallest t = {t_min} is below 2h = {}",
            2.0 * h
        )));
    }
    let norm_f = matrix_weighted_norm(w, f, p)?.value;
    let rows = schedule
        .par_iter()
        .map(|&t| {
            let phi = Mollifier::new(grid, t)?;
            let conv = convolve(f, phi.kernel())?;
            let diff = conv.sub(f)?;
            Ok(StudyRow {
                t,
                error: crate::varnorm::matrix_weighted_norm_with(w, &diff, p, &NormOptions::default())?.value,
                norm: matrix_weighted_norm(w, &conv, p)?.value,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let strictly_decreasing = rows.windows(2).all(|r| r[1].error < r[0].error);
    let sup_norm = rows.iter().map(|r| r.norm).fold(0.0, f64::max);
    Ok(StudyTable {
        rows,
        norm_f,
        strictly_decreasing,
        sup_norm,
    })
}
