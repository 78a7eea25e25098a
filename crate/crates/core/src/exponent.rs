//! Exponent functions `p(·)` with values in `[1, ∞]`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::grid::{Cube, Grid, Point};

/// Exhaustive pair scans above this many pairs switch to random sampling.
pub const MAX_PAIRS: usize = 1_000_000;
const PAIR_SEED: u64 = 0x10_6401;

/// Empirical (or asserted) log-Hölder data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogHolder {
    pub c0: f64,
    pub c_inf: f64,
    pub p_inf: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExponentFunction {
    grid: Grid,
    values: Vec<f64>,
    p_minus: f64,
    p_plus: f64,
    log_holder: Option<LogHolder>,
}

impl ExponentFunction {
    /// Per-cell exponents; `f64::INFINITY` encodes `p = ∞`.
    pub fn new(grid: &Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.cell_count() {
            return Err(Error::DimensionMismatch {
                expected: grid.cell_count(),
                found: values.len(),
            });
        }
        let mut p_minus = f64::INFINITY;
        let mut p_plus = 1.0f64;
        for (i, &p) in values.iter().enumerate() {
            if p.is_nan() || p < 1.0 {
                return Err(Error::InvalidInput(format!(
                    "exponent at cell {i} is {p}, outside [1, inf]"
                )));
            }
            p_minus = p_minus.min(p);
            p_plus = p_plus.max(p);
        }
        Ok(Self {
            grid: grid.clone(),
            values,
            p_minus,
            p_plus,
            log_holder: None,
        })
    }

    pub fn constant(grid: &Grid, p: f64) -> Result<Self> {
        Self::new(grid, vec![p; grid.cell_count()])
    }

    pub fn from_fn(grid: &Grid, f: impl Fn(&Point) -> f64) -> Result<Self> {
        Self::new(grid, grid.centers().iter().map(f).collect())
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, cell: usize) -> f64 {
        self.values[cell]
    }

    pub fn p_minus(&self) -> f64 {
        self.p_minus
    }

    pub fn p_plus(&self) -> f64 {
        self.p_plus
    }

    /// Mask of the cells where `p = ∞`.
    pub fn infinity_mask(&self) -> Vec<bool> {
        self.values.iter().map(|p| p.is_infinite()).collect()
    }

    /// `Some(p₀)` when the exponent is the same on every cell.
    pub fn as_constant(&self) -> Option<f64> {
        (self.p_minus == self.p_plus).then_some(self.p_plus)
    }

    pub fn log_holder(&self) -> Option<LogHolder> {
        self.log_holder
    }

    /// Attaches log-Hölder constants after checking both conditions on every sampled pair.
    pub fn with_log_holder(mut self, lh: LogHolder) -> Result<Self> {
        let est = log_holder_constants(&self);
        let slack = 1e-12;
        if est.c0 > lh.c0 * (1.0 + slack) + slack {
            return Err(Error::Precondition(format!(
                "local log-Hölder constant {} is below the sampled value {}",
                lh.c0, est.c0
            )));
        }
        let c_inf = decay_constant(&self, lh.p_inf);
        if c_inf > lh.c_inf * (1.0 + slack) + slack {
            return Err(Error::Precondition(format!(
                "decay constant {} is below the sampled value {c_inf}",
                lh.c_inf
            )));
        }
        self.log_holder = Some(lh);
        Ok(self)
    }

    /// Pointwise conjugate exponent with `1 ↔ ∞`.
    pub fn conjugate(&self) -> Self {
        let values: Vec<f64> = self.values.iter().map(|&p| conjugate_value(p)).collect();
        Self {
            grid: self.grid.clone(),
            p_minus: conjugate_value(self.p_plus),
            p_plus: conjugate_value(self.p_minus),
            values,
            log_holder: None,
        }
    }

    /// The exponent whose reciprocal is the mean of `1/p` over the cube's cells.
    pub fn harmonic_mean(&self, q: &Cube) -> Result<f64> {
        let cells = q.cells(&self.grid);
        self.harmonic_mean_cells(&cells)
    }

    pub fn harmonic_mean_cells(&self, cells: &[usize]) -> Result<f64> {
        if cells.is_empty() {
            return Err(Error::EmptyRegion);
        }
        let inv: f64 = cells.iter().map(|&i| 1.0 / self.values[i]).sum::<f64>() / cells.len() as f64;
        Ok(1.0 / inv)
    }
}

pub fn conjugate_value(p: f64) -> f64 {
    if p == 1.0 {
        f64::INFINITY
    } else if p.is_infinite() {
        1.0
    } else {
        p / (p - 1.0)
    }
}

pub fn conjugate(p: &ExponentFunction) -> ExponentFunction {
    p.conjugate()
}

pub fn harmonic_mean(p: &ExponentFunction, q: &Cube) -> Result<f64> {
    p.harmonic_mean(q)
}

fn distance(a: &Point, b: &Point, dim: usize) -> f64 {
    (0..dim).map(|k| (a[k] - b[k]).powi(2)).sum::<f64>().sqrt()
}

fn pair_term(pa: f64, pb: f64, r: f64) -> f64 {
    if r >= 0.5 || r == 0.0 {
        return 0.0;
    }
    let dp = (pa - pb).abs();
    if dp == 0.0 {
        0.0
    } else if dp.is_nan() {
        f64::INFINITY
    } else {
        dp * (-r.ln())
    }
}

/// Pairs `(i, j)`, `i < j`, scanned by [`log_holder_constants`].
fn sampled_pairs(n: usize) -> Box<dyn Iterator<Item = (usize, usize)>> {
    let total = n * n.saturating_sub(1) / 2;
    if total <= MAX_PAIRS {
        Box::new((0..n).flat_map(move |i| ((i + 1)..n).map(move |j| (i, j))))
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(PAIR_SEED);
        Box::new((0..MAX_PAIRS).map(move |_| {
            let i = rng.gen_range(0..n);
            let mut j = rng.gen_range(0..n - 1);
            if j >= i {
                j += 1;
            }
            (i.min(j), i.max(j))
        }))
    }
}

fn local_constant(p: &ExponentFunction) -> f64 {
    let g = p.grid();
    let centers = g.centers();
    let mut c0 = 0.0f64;
    for (i, j) in sampled_pairs(centers.len()) {
        let r = distance(&centers[i], &centers[j], g.dim());
        c0 = c0.max(pair_term(p.values[i], p.values[j], r));
    }
    c0
}

fn decay_constant(p: &ExponentFunction, p_inf: f64) -> f64 {
    let g = p.grid();
    p.values
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let x = g.center(i);
            let dev = if v == p_inf { 0.0 } else { (v - p_inf).abs() };
            dev * (std::f64::consts::E + g.norm(&x)).ln()
        })
        .fold(0.0, f64::max)
}

/// Empirical `C₀`, `C_∞` and `p_∞` over cell-center pairs.
///
/// `C₀` is the largest `|p(x)-p(y)|·(-log|x-y|)` over pairs closer than 1/2; with more
/// than [`MAX_PAIRS`] pairs a fixed-seed random subset is scanned. `p_∞` minimizes the
/// decay constant (a convex function of the candidate limit).
pub fn log_holder_constants(p: &ExponentFunction) -> LogHolder {
    let c0 = local_constant(p);
    if p.p_plus.is_infinite() {
        let all_inf = p.p_minus.is_infinite();
        return LogHolder {
            c0,
            c_inf: if all_inf { 0.0 } else { f64::INFINITY },
            p_inf: f64::INFINITY,
        };
    }
    if let Some(p0) = p.as_constant() {
        return LogHolder {
            c0,
            c_inf: 0.0,
            p_inf: p0,
        };
    }
    let (mut lo, mut hi) = (p.p_minus, p.p_plus);
    for _ in 0..200 {
        let a = lo + (hi - lo) / 3.0;
        let b = hi - (hi - lo) / 3.0;
        if decay_constant(p, a) <= decay_constant(p, b) {
            hi = b;
        } else {
            lo = a;
        }
        if hi - lo <= 1e-13 * hi {
            break;
        }
    }
    let p_inf = 0.5 * (lo + hi);
    LogHolder {
        c0,
        c_inf: decay_constant(p, p_inf),
        p_inf,
    }
}

/// One row of a refinement sweep of the local log-Hölder constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogHolderLevel {
    pub cells: usize,
    pub h: f64,
    pub c0: f64,
    pub max_adjacent_jump: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogHolderSweep {
    pub levels: Vec<LogHolderLevel>,
    /// False when `C₀` grows like `jump·log(1/h)` under refinement.
    pub log_holder: bool,
}

fn max_adjacent_jump(p: &ExponentFunction) -> f64 {
    let g = p.grid();
    let m = g.cells_per_axis();
    let mut jump = 0.0f64;
    for i in 0..g.cell_count() {
        let mi = g.multi_index(i);
        for a in 0..g.dim() {
            if mi[a] + 1 < m {
                let mut nb = mi;
                nb[a] += 1;
                let j = g.linear_index(&nb);
                let dp = (p.values[i] - p.values[j]).abs();
                jump = jump.max(if dp.is_nan() { f64::INFINITY } else { dp });
            }
        }
    }
    jump
}

/// Samples `p` on successively finer grids of the same box and flags `C₀` growth.
pub fn log_holder_sweep(
    lower: &[f64],
    upper: &[f64],
    cells: &[usize],
    p: impl Fn(&Point) -> f64,
) -> Result<LogHolderSweep> {
    if cells.len() < 2 {
        return Err(Error::InvalidInput("a sweep needs at least two resolutions".into()));
    }
    let mut levels = Vec::with_capacity(cells.len());
    for &m in cells {
        let g = Grid::new(lower, upper, m)?;
        let e = ExponentFunction::from_fn(&g, &p)?;
        levels.push(LogHolderLevel {
            cells: m,
            h: g.h_max(),
            c0: local_constant(&e),
            max_adjacent_jump: max_adjacent_jump(&e),
        });
    }
    let first = levels[0];
    let last = levels[levels.len() - 1];
    let growth = last.c0 - first.c0;
    let expected = 0.5 * last.max_adjacent_jump * (first.h / last.h).ln();
    let log_holder = !(growth > 0.0 && growth >= expected);
    Ok(LogHolderSweep { levels, log_holder })
}
