//! Discrete derivatives, weighted Sobolev norms, the smoothing pipeline and truncation.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exponent::ExponentFunction;
use crate::field::{MatrixField, ScalarField, VectorField};
use crate::grid::{dyadic_levels, Grid, Point, MAX_DIM};
use crate::linalg;
use crate::matweight::op_norm;
use crate::muckenhoupt::reducing_ap_constant;
use crate::operators::{convolve, Mollifier};
use crate::varnorm::{matrix_weighted_norm, norm_of_values, NormOptions};

/// Per-cell `d×n` Jacobian, row-major (`∂_j f_i` at `i·n + j`).
#[derive(Debug, Clone, PartialEq)]
pub struct JacobianField {
    grid: Grid,
    d: usize,
    n: usize,
    values: Vec<f64>,
}

impl JacobianField {
    pub fn at(&self, cell: usize) -> &[f64] {
        let k = self.d * self.n;
        &self.values[cell * k..(cell + 1) * k]
    }

    pub fn rows(&self) -> usize {
        self.d
    }

    pub fn cols(&self) -> usize {
        self.n
    }

    /// `∂_j f` as a vector field.
    pub fn column(&self, j: usize) -> VectorField {
        let mut out = VectorField::zeros(&self.grid, self.d);
        for c in 0..self.grid.cell_count() {
            let src = self.at(c);
            let dst = out.at_mut(c);
            for i in 0..self.d {
                dst[i] = src[i * self.n + j];
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Central differences inside, first-order one-sided differences on boundary cells.
pub fn jacobian(f: &VectorField) -> Result<JacobianField> {
    let grid = f.grid();
    let m = grid.cells_per_axis();
    if m < 3 {
        return Err(Error::InvalidDomain(format!(
            "differentiation needs at least 3 cells per axis, got {m}"
        )));
    }
    let (d, n) = (f.dim(), grid.dim());
    let mut values = vec![0.0; grid.cell_count() * d * n];
    for c in 0..grid.cell_count() {
        let mi = grid.multi_index(c);
        for j in 0..n {
            let h = grid.h(j);
            let (lo, hi, span) = if mi[j] == 0 {
                (mi[j], mi[j] + 1, h)
            } else if mi[j] == m - 1 {
                (mi[j] - 1, mi[j], h)
            } else {
                (mi[j] - 1, mi[j] + 1, 2.0 * h)
            };
            let mut a = mi;
            a[j] = lo;
            let mut b = mi;
            b[j] = hi;
            let (fa, fb) = (f.at(grid.linear_index(&a)), f.at(grid.linear_index(&b)));
            for i in 0..d {
                values[c * d * n + i * n + j] = (fb[i] - fa[i]) / span;
            }
        }
    }
    Ok(JacobianField {
        grid: grid.clone(),
        d,
        n,
        values,
    })
}

/// `|W(x) Df(x)|_op` per cell.
pub fn weighted_jacobian_opnorm(w: &MatrixField, jac: &JacobianField) -> Result<ScalarField> {
    if w.dim() != jac.d {
        return Err(Error::DimensionMismatch {
            expected: jac.d,
            found: w.dim(),
        });
    }
    let (d, n) = (jac.d, jac.n);
    let mut buf = vec![0.0; d * n];
    let values = (0..w.cell_count())
        .map(|c| {
            linalg::matmul(w.slice(c), jac.at(c), d, d, n, &mut buf);
            linalg::op_norm(&buf, d, n)
        })
        .collect();
    ScalarField::new(&jac.grid, values)
}

/// `‖f‖_{L^{p(·)}(W)} + ‖ |W Df|_op ‖_{L^{p(·)}}`.
pub fn sobolev_norm_matrix(f: &VectorField, w: &MatrixField, p: &ExponentFunction) -> Result<f64> {
    let jac = jacobian(f)?;
    Ok(matrix_weighted_norm(w, f, p)?.value + gradient_norm_matrix(w, &jac, p)?)
}

fn gradient_norm_matrix(w: &MatrixField, jac: &JacobianField, p: &ExponentFunction) -> Result<f64> {
    let g = weighted_jacobian_opnorm(w, jac)?;
    Ok(norm_of_values(g.values(), p, &NormOptions::default())?.value)
}

fn gradient_norm_sum(w: &MatrixField, jac: &JacobianField, p: &ExponentFunction) -> Result<f64> {
    let mut s = 0.0;
    for j in 0..jac.n {
        s += matrix_weighted_norm(w, &jac.column(j), p)?.value;
    }
    Ok(s)
}

/// `‖f‖_{L^{p(·)}(W)} + Σ_j ‖∂_j f‖_{L^{p(·)}(W)}`.
pub fn sobolev_norm_sum(f: &VectorField, w: &MatrixField, p: &ExponentFunction) -> Result<f64> {
    let jac = jacobian(f)?;
    Ok(matrix_weighted_norm(w, f, p)?.value + gradient_norm_sum(w, &jac, p)?)
}

/// `‖f‖_{L^{p(·)}(v)} + ‖∇f‖_{L^{p(·)}(W)}` with `v = |W|_op` and `W` of size `n×n`.
pub fn sobolev_norm_scalar(f: &ScalarField, w: &MatrixField, p: &ExponentFunction) -> Result<f64> {
    let n = f.grid().dim();
    if w.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: w.dim(),
        });
    }
    let v = op_norm(w);
    let fv = f.zip_with(&v, |a, b| a * b)?;
    let zero = norm_of_values(fv.values(), p, &NormOptions::default())?.value;
    let as_vec = VectorField::new(f.grid(), 1, f.values().to_vec())?;
    let jac = jacobian(&as_vec)?;
    // the 1×n Jacobian row is the gradient
    let grad = VectorField::new(f.grid(), n, jac.values.clone())?;
    Ok(zero + matrix_weighted_norm(w, &grad, p)?.value)
}

/// Domains for the smoothing pipeline.
#[derive(Debug, Clone, PartialEq)]
pub enum Domain {
    Box,
    /// The box with a closed ball removed.
    BoxMinusBall { center: Point, radius: f64 },
}

impl Domain {
    pub fn contains(&self, grid: &Grid, x: &Point) -> bool {
        match self {
            Domain::Box => true,
            Domain::BoxMinusBall { center, radius } => dist(grid, x, center) > *radius,
        }
    }

    /// Distance from a point of the domain to its boundary.
    pub fn distance(&self, grid: &Grid, x: &Point) -> f64 {
        let to_box = grid.distance_to_boundary(x);
        match self {
            Domain::Box => to_box,
            Domain::BoxMinusBall { center, radius } => to_box.min(dist(grid, x, center) - radius),
        }
    }

    pub fn mask(&self, grid: &Grid) -> Vec<bool> {
        grid.centers().iter().map(|x| self.contains(grid, x)).collect()
    }
}

fn dist(grid: &Grid, a: &Point, b: &Point) -> f64 {
    (0..grid.dim()).map(|k| (a[k] - b[k]).powi(2)).sum::<f64>().sqrt()
}

/// Smooth partition of unity subordinate to `K` distance shells.
///
/// Shell `k` (1-based, `k = 1` deepest) has core `{σ_k < dist ≤ σ_{k−1}}` with
/// `σ_k = (K − k − 1/2)·h_s` and `h_s = max dist / K`; `ψ_k` is the mollified core
/// indicator (radius `r < h_s/2`) renormalized to sum to one. Only `ψ_K` reaches the
/// boundary and supports overlap only for consecutive `k`.
#[derive(Debug, Clone)]
pub struct PartitionOfUnity {
    pub shells: usize,
    pub shell_width: f64,
    pub radius: f64,
    /// `ψ_k` at index `k − 1`.
    pub psi: Vec<ScalarField>,
    pub mask: Vec<bool>,
    /// Core shell of each cell of the domain.
    pub core: Vec<Option<usize>>,
    pub distance: Vec<f64>,
}

impl PartitionOfUnity {
    /// Largest `|Σψ_k − 1|` over the domain.
    pub fn sum_defect(&self) -> f64 {
        let n = self.mask.len();
        (0..n)
            .filter(|&c| self.mask[c])
            .map(|c| (self.psi.iter().map(|s| s.values()[c]).sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    pub fn support(&self, k: usize) -> Vec<bool> {
        self.psi[k - 1].values().iter().map(|&v| v > 0.0).collect()
    }

    /// Whether only consecutive `ψ_k` share a cell.
    pub fn consecutive_overlap_only(&self) -> bool {
        (0..self.mask.len()).all(|c| {
            let on: Vec<usize> = (0..self.shells).filter(|&k| self.psi[k].values()[c] > 0.0).collect();
            on.windows(2).all(|w| w[1] == w[0] + 1) && on.len() <= 3
        })
    }

    /// Lower distance bound `σ_k` of the core of shell `k`.
    pub fn core_floor(&self, k: usize) -> f64 {
        if k >= self.shells {
            0.0
        } else {
            (self.shells as f64 - k as f64 - 0.5) * self.shell_width
        }
    }
}

pub fn build_partition(grid: &Grid, domain: &Domain, shells: usize) -> Result<PartitionOfUnity> {
    if shells < 3 {
        return Err(Error::InvalidInput(format!("need K ≥ 3 shells, got {shells}")));
    }
    let h = grid.h_max();
    let mask = domain.mask(grid);
    let centers = grid.centers();
    let distance: Vec<f64> = centers
        .iter()
        .zip(&mask)
        .map(|(x, &inside)| if inside { domain.distance(grid, x) } else { 0.0 })
        .collect();
    let dmax = distance.iter().copied().fold(0.0, f64::max);
    let hs = dmax / shells as f64;
    if hs < 2.0 * h {
        return Err(Error::InvalidDomain(format!(
            "{shells} shells of width {hs:.3e} are thinner than 2h = {:.3e}",
            2.0 * h
        )));
    }
    let floor = |k: usize| {
        if k >= shells {
            f64::NEG_INFINITY
        } else {
            (shells as f64 - k as f64 - 0.5) * hs
        }
    };
    let core: Vec<Option<usize>> = (0..grid.cell_count())
        .map(|c| {
            if !mask[c] {
                return None;
            }
            (1..=shells).find(|&k| distance[c] > floor(k))
        })
        .collect();
    let radius = (0.25 * hs).max(h);
    let phi = Mollifier::new(grid, radius)?;
    let mut raw = Vec::with_capacity(shells);
    for k in 1..=shells {
        let ind: Vec<f64> = core.iter().map(|&s| if s == Some(k) { 1.0 } else { 0.0 }).collect();
        let smooth = convolve(&VectorField::new(grid, 1, ind)?, phi.kernel())?;
        raw.push(
            smooth
                .values()
                .iter()
                .zip(&mask)
                .map(|(&v, &inside)| if inside && v > 1e-300 { v } else { 0.0 })
                .collect::<Vec<f64>>(),
        );
    }
    let mut psi = Vec::with_capacity(shells);
    for k in 0..shells {
        let vals: Vec<f64> = (0..grid.cell_count())
            .map(|c| {
                if !mask[c] {
                    return 0.0;
                }
                let total: f64 = raw.iter().map(|r| r[c]).sum();
                raw[k][c] / total
            })
            .collect();
        psi.push(ScalarField::new(grid, vals)?);
    }
    Ok(PartitionOfUnity {
        shells,
        shell_width: hs,
        radius,
        psi,
        mask,
        core,
        distance,
    })
}

#[derive(Debug, Clone)]
pub struct SmoothingOptions {
    pub domain: Domain,
    pub shells: usize,
    /// First candidate scale; defaults to the largest admissible scale of each shell.
    pub t0: Option<f64>,
    pub max_halvings: usize,
}

impl Default for SmoothingOptions {
    fn default() -> Self {
        Self {
            domain: Domain::Box,
            shells: 3,
            t0: None,
            max_halvings: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShellReport {
    pub k: usize,
    pub s_k: f64,
    pub t_k: f64,
    /// `‖ψ_k f − φ_{t_k}∗(ψ_k f)‖_{L^{p(·)}(W)}`.
    pub zero_order_error: f64,
    /// `‖∂_j(ψ_k f) − φ_{t_k}∗∂_j(ψ_k f)‖_{L^{p(·)}(W)}` per `j`.
    pub gradient_errors: Vec<f64>,
    pub zero_order_budget: f64,
    pub gradient_budget: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmoothingReport {
    pub epsilon: f64,
    pub shells: Vec<ShellReport>,
    /// `‖f − g‖` with the operator-norm gradient term.
    pub total_matrix: f64,
    /// `‖f − g‖` with the column-sum gradient term.
    pub total_sum: f64,
    /// `[W]` by reducing operators on the dyadic levels used as the finiteness check.
    pub weight_constant: f64,
}

impl SmoothingReport {
    pub fn success(&self) -> bool {
        self.total_matrix < self.epsilon
    }

    pub fn budgets_met(&self) -> bool {
        self.shells.iter().all(|s| {
            s.zero_order_error < s.zero_order_budget
                && s.gradient_errors.iter().all(|&e| e < s.gradient_budget)
        })
    }
}

fn masked(f: &VectorField, mask: &[bool]) -> VectorField {
    let cells: Vec<usize> = (0..mask.len()).filter(|&c| mask[c]).collect();
    f.restrict(&cells)
}

/// Builds `g = Σ_k φ_{t_k} ∗ (ψ_k f)` with per-shell budgets `ε/2^{k+1}` and `ε/(n 2^{k+1})`.
///
/// Shells `k < K` search `t` by halving from the largest scale keeping the smoothed
/// piece one cell away from the boundary, so discrete derivatives commute with the
/// convolution. The boundary shell keeps the cell-width kernel. A shell whose budgets
/// are not met by any resolvable `t` yields [`Error::ResolutionLimit`].
pub fn smooth_approximate(
    f: &VectorField,
    w: &MatrixField,
    p: &ExponentFunction,
    epsilon: f64,
    opts: &SmoothingOptions,
) -> Result<(VectorField, SmoothingReport)> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidInput(format!("ε must be positive, got {epsilon}")));
    }
    let grid = f.grid();
    let n = grid.dim();
    let h = grid.h_max();
    let pou = build_partition(grid, &opts.domain, opts.shells)?;
    let f = masked(f, &pou.mask);
    let norm_f = sobolev_norm_matrix(&f, w, p)?;
    if !norm_f.is_finite() {
        return Err(Error::Precondition("f has infinite Sobolev norm".into()));
    }
    let weight_constant = weight_check(w, p)?;

    let shells: Vec<(ShellReport, VectorField)> = (1..=pou.shells)
        .into_par_iter()
        .map(|k| smooth_shell(&f, w, p, epsilon, &pou, k, h, n, opts))
        .collect::<Result<Vec<_>>>()?;

    let mut g = VectorField::zeros(grid, f.dim());
    let mut reports = Vec::with_capacity(shells.len());
    for (r, piece) in shells {
        g = g.add(&piece)?;
        reports.push(r);
    }
    let diff = f.sub(&g)?;
    let jac = jacobian(&diff)?;
    let zero = matrix_weighted_norm(w, &diff, p)?.value;
    let report = SmoothingReport {
        epsilon,
        shells: reports,
        total_matrix: zero + gradient_norm_matrix(w, &jac, p)?,
        total_sum: zero + gradient_norm_sum(w, &jac, p)?,
        weight_constant,
    };
    Ok((g, report))
}

fn weight_check(w: &MatrixField, p: &ExponentFunction) -> Result<f64> {
    let g = w.grid();
    let m = g.cells_per_axis();
    let top = m.trailing_zeros().min(3);
    let fam = if g.is_cubic() {
        dyadic_levels(g, 0, top)?
    } else {
        return Ok(f64::NAN);
    };
    let c = reducing_ap_constant(w, p, &fam)?.supremum;
    if !c.is_finite() {
        return Err(Error::Precondition("weight constant is not finite".into()));
    }
    Ok(c)
}

#[allow(clippy::too_many_arguments)]
fn smooth_shell(
    f: &VectorField,
    w: &MatrixField,
    p: &ExponentFunction,
    epsilon: f64,
    pou: &PartitionOfUnity,
    k: usize,
    h: f64,
    n: usize,
    opts: &SmoothingOptions,
) -> Result<(ShellReport, VectorField)> {
    let piece = f.mul_scalar_field(&pou.psi[k - 1])?;
    let dpiece = jacobian(&piece)?;
    let zero_budget = epsilon / 2f64.powi(k as i32 + 1);
    let grad_budget = zero_budget / n as f64;

    if k == pou.shells {
        let r = ShellReport {
            k,
            s_k: h,
            t_k: h,
            zero_order_error: 0.0,
            gradient_errors: vec![0.0; n],
            zero_order_budget: zero_budget,
            gradient_budget: grad_budget,
        };
        return Ok((r, piece));
    }

    let t_max = pou.core_floor(k) - pou.radius - h;
    if t_max < h {
        return Err(Error::ResolutionLimit {
            shell: k,
            smallest_t: t_max,
            budget: zero_budget,
            achieved: f64::INFINITY,
        });
    }
    let t0 = opts.t0.map_or(t_max, |t| t.min(t_max));
    let candidates: Vec<f64> = (0..=opts.max_halvings)
        .map(|i| t0 / 2f64.powi(i as i32))
        .filter(|&t| t >= h * (1.0 - 1e-12))
        .collect();
    if candidates.is_empty() {
        return Err(Error::ResolutionLimit {
            shell: k,
            smallest_t: t0,
            budget: zero_budget,
            achieved: f64::INFINITY,
        });
    }

    let zero_error = |t: f64| -> Result<(f64, VectorField)> {
        let phi = Mollifier::new(f.grid(), t)?;
        let sm = convolve(&piece, phi.kernel())?;
        Ok((matrix_weighted_norm(w, &piece.sub(&sm)?, p)?.value, sm))
    };
    let grad_errors = |t: f64| -> Result<Vec<f64>> {
        let phi = Mollifier::new(f.grid(), t)?;
        (0..n)
            .map(|j| {
                let col = dpiece.column(j);
                let sm = convolve(&col, phi.kernel())?;
                Ok(matrix_weighted_norm(w, &col.sub(&sm)?, p)?.value)
            })
            .collect()
    };

    let mut last = (f64::INFINITY, candidates[candidates.len() - 1]);
    let mut s_idx = None;
    for (i, &s) in candidates.iter().enumerate() {
        let (e, _) = zero_error(s)?;
        last = (e, s);
        if e < zero_budget {
            s_idx = Some(i);
            break;
        }
    }
    let s_idx = s_idx.ok_or(Error::ResolutionLimit {
        shell: k,
        smallest_t: last.1,
        budget: zero_budget,
        achieved: last.0,
    })?;
    let s_k = candidates[s_idx];

    let mut worst = (f64::INFINITY, s_k);
    for &t in &candidates[s_idx..] {
        let ge = grad_errors(t)?;
        let gmax = ge.iter().copied().fold(0.0, f64::max);
        if gmax >= grad_budget {
            worst = (gmax, t);
            continue;
        }
        let (e, smoothed) = zero_error(t)?;
        if e >= zero_budget {
            worst = (e, t);
            continue;
        }
        let r = ShellReport {
            k,
            s_k,
            t_k: t,
            zero_order_error: e,
            gradient_errors: ge,
            zero_order_budget: zero_budget,
            gradient_budget: grad_budget,
        };
        return Ok((r, smoothed));
    }
    Err(Error::ResolutionLimit {
        shell: k,
        smallest_t: worst.1,
        budget: grad_budget,
        achieved: worst.0,
    })
}

/// Smooth step: 1 on `[0, 1]`, 0 on `[2, ∞)`.
pub fn smooth_step(s: f64) -> f64 {
    let e = |u: f64| if u > 0.0 { (-1.0 / u).exp() } else { 0.0 };
    let (a, b) = (e(2.0 - s), e(s - 1.0));
    a / (a + b)
}

/// Derivative of [`smooth_step`].
pub fn smooth_step_derivative(s: f64) -> f64 {
    if s <= 1.0 || s >= 2.0 {
        return 0.0;
    }
    let (u, v) = (2.0 - s, s - 1.0);
    let (a, b) = ((-1.0 / u).exp(), (-1.0 / v).exp());
    let (da, db) = (-a / (u * u), b / (v * v));
    (da * (a + b) - a * (da + db)) / ((a + b) * (a + b))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationRow {
    pub k: f64,
    /// `‖g − ν_k g‖_{W^{1,p(·)}(W)}`.
    pub error: f64,
    /// `max |∇ν_k|` over cell centers.
    pub max_gradient: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TruncationReport {
    pub rows: Vec<TruncationRow>,
    pub epsilon: f64,
    /// The first `k` whose error is below `ε`.
    pub k_epsilon: f64,
    pub monotone: bool,
    /// `max_k k·max|∇ν_k|`.
    pub gradient_envelope: f64,
    pub truncated: VectorField,
}

/// Cutoff products `g_k = ν_k g`, `ν_k(x) = η(|x|/k)`, over increasing `k`.
///
/// The derivative of `g_k − g` is `g ∂_jν_k + (ν_k − 1)∂_j g` with `∂_jν_k` exact. Every `k`
/// must satisfy `2k ≤` the distance from the origin to the box boundary.
pub fn truncate_to_compact(
    g: &VectorField,
    w: &MatrixField,
    p: &ExponentFunction,
    epsilon: f64,
    ks: &[f64],
) -> Result<TruncationReport> {
    let grid = g.grid();
    let origin = [0.0; MAX_DIM];
    if !(0..grid.dim()).all(|a| grid.lower()[a] < 0.0 && grid.upper()[a] > 0.0) {
        return Err(Error::Precondition("box must contain the origin".into()));
    }
    let reach = grid.distance_to_boundary(&origin);
    if ks.is_empty() || ks.windows(2).any(|k| k[1] <= k[0]) {
        return Err(Error::InvalidInput("k values must be nonempty and increasing".into()));
    }
    if let Some(&k) = ks.iter().find(|&&k| !(k > 0.0) || 2.0 * k > reach) {
        return Err(Error::InvalidInput(format!(
            "cutoff k = {k} does not fit: 2k must not exceed {reach}"
        )));
    }
    let (d, n) = (g.dim(), grid.dim());
    let dg = jacobian(g)?;
    let centers = grid.centers();
    let mut rows = Vec::with_capacity(ks.len());
    let mut truncated = None;
    for &k in ks {
        let mut diff = VectorField::zeros(grid, d);
        let mut jac = vec![0.0; grid.cell_count() * d * n];
        let mut max_gradient = 0.0f64;
        for (c, x) in centers.iter().enumerate() {
            let r = grid.norm(x);
            let nu = smooth_step(r / k);
            let dnu = smooth_step_derivative(r / k) / k;
            let mut grad_nu = [0.0; MAX_DIM];
            if r > 0.0 {
                for a in 0..n {
                    grad_nu[a] = dnu * x[a] / r;
                }
            }
            max_gradient = max_gradient.max(dnu.abs());
            let gv = g.at(c);
            for i in 0..d {
                diff.at_mut(c)[i] = (nu - 1.0) * gv[i];
                for j in 0..n {
                    jac[c * d * n + i * n + j] = gv[i] * grad_nu[j] + (nu - 1.0) * dg.at(c)[i * n + j];
                }
            }
        }
        let jf = JacobianField {
            grid: grid.clone(),
            d,
            n,
            values: jac,
        };
        let error = matrix_weighted_norm(w, &diff, p)?.value + gradient_norm_matrix(w, &jf, p)?;
        if error < epsilon && truncated.is_none() {
            truncated = Some((k, g.add(&diff)?));
        }
        rows.push(TruncationRow {
            k,
            error,
            max_gradient,
        });
    }
    let monotone = rows.windows(2).all(|r| r[1].error <= r[0].error);
    let gradient_envelope = rows.iter().map(|r| r.k * r.max_gradient).fold(0.0, f64::max);
    let (k_epsilon, truncated) = truncated.ok_or_else(|| {
        let last = rows[rows.len() - 1];
        Error::ResolutionLimit {
            shell: rows.len(),
            smallest_t: last.k,
            budget: epsilon,
            achieved: last.error,
        }
    })?;
    Ok(TruncationReport {
        rows,
        epsilon,
        k_epsilon,
        monotone,
        gradient_envelope,
        truncated,
    })
}
