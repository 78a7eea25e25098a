//! Scalar and matrix `A_{p(·)}` constants over cube families, and test-weight generators.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exponent::ExponentFunction;
use crate::field::{MatrixField, ScalarField};
use crate::grid::{dyadic_levels, Cube, CubeFamily, Grid, Point};
use crate::linalg;
use crate::matweight::{inverse, op_norm, reducing_operator};
use crate::varnorm::{norm_on_cells, NormOptions, Terms};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Direct,
    Reducing,
}

#[derive(Debug, Clone)]
pub struct ApReport {
    /// One value per cube, in family order.
    pub values: Vec<f64>,
    pub supremum: f64,
    pub family: CubeFamily,
    pub method: Method,
}

impl ApReport {
    fn new(values: Vec<f64>, family: &CubeFamily, method: Method) -> Self {
        let supremum = values.iter().copied().fold(0.0, f64::max);
        Self {
            values,
            supremum,
            family: family.clone(),
            method,
        }
    }
}

fn cube_cells(grid: &Grid, q: &Cube) -> Result<Vec<usize>> {
    let cells = q.cells(grid);
    if cells.is_empty() {
        return Err(Error::EmptyRegion);
    }
    Ok(cells)
}

fn check_positive(w: &ScalarField) -> Result<()> {
    if let Some(c) = w.values().iter().position(|&v| !(v > 0.0 && v.is_finite())) {
        return Err(Error::SingularWeight {
            cell: c,
            detail: format!("weight value {}", w.values()[c]),
        });
    }
    Ok(())
}

/// `|Q|⁻¹ ‖wχ_Q‖_{p(·)} ‖w⁻¹χ_Q‖_{p'(·)}` per cube.
pub fn scalar_ap_constant(w: &ScalarField, p: &ExponentFunction, family: &CubeFamily) -> Result<ApReport> {
    check_positive(w)?;
    let grid = w.grid();
    let pc = p.conjugate();
    let winv: Vec<f64> = w.values().iter().map(|v| 1.0 / v).collect();
    let opts = NormOptions::precise();
    let values = family
        .cubes()
        .par_iter()
        .map(|q| {
            let cells = cube_cells(grid, q)?;
            let measure = cells.len() as f64 * grid.cell_volume();
            let a = norm_on_cells(w.values(), p, &cells, &opts)?.value;
            let b = norm_on_cells(&winv, &pc, &cells, &opts)?.value;
            Ok(a * b / measure)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ApReport::new(values, family, Method::Direct))
}

/// `|Q|⁻¹ ‖ ‖ |W(x)W⁻¹(y)|_op χ_Q(y) ‖_{p'(·),y} χ_Q(x) ‖_{p(·),x}` per cube.
pub fn matrix_ap_constant(w: &MatrixField, p: &ExponentFunction, family: &CubeFamily) -> Result<ApReport> {
    let winv = inverse(w)?;
    let grid = w.grid();
    let d = w.dim();
    let pc = p.conjugate();
    let opts = NormOptions::precise();
    let mut values = Vec::with_capacity(family.len());
    for q in family.cubes() {
        let cells = cube_cells(grid, q)?;
        let measure = cells.len() as f64 * grid.cell_volume();
        let inner: Vec<f64> = cells
            .par_iter()
            .map_init(
                || (Terms::with_capacity(cells.len()), vec![0.0; d * d]),
                |(terms, buf), &x| {
                    terms.clear();
                    let wx = w.slice(x);
                    for &y in &cells {
                        let k = if d == 1 {
                            (wx[0] * winv.slice(y)[0]).abs()
                        } else {
                            linalg::matmul(wx, winv.slice(y), d, d, d, buf);
                            linalg::op_norm(buf, d, d)
                        };
                        terms.push(k, pc.value(y));
                    }
                    terms.norm(grid.cell_volume(), grid.volume(), &opts).value
                },
            )
            .collect();
        let mut outer = Terms::with_capacity(cells.len());
        for (&x, &fx) in cells.iter().zip(&inner) {
            outer.push(fx, p.value(x));
        }
        values.push(outer.norm(grid.cell_volume(), grid.volume(), &opts).value / measure);
    }
    Ok(ApReport::new(values, family, Method::Direct))
}

/// `|𝒲_Q 𝒲̄_Q|_op` per cube from fitted reducing operators.
pub fn reducing_ap_constant(w: &MatrixField, p: &ExponentFunction, family: &CubeFamily) -> Result<ApReport> {
    let winv = inverse(w)?;
    let pc = p.conjugate();
    let d = w.dim();
    let values = family
        .cubes()
        .par_iter()
        .map(|q| {
            let m = reducing_operator(w, p, q)?.m;
            let mbar = reducing_operator(&winv, &pc, q)?.m;
            let prod = m * mbar;
            let flat: Vec<f64> = (0..d * d).map(|k| prod[(k / d, k % d)]).collect();
            Ok(linalg::op_norm(&flat, d, d))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ApReport::new(values, family, Method::Reducing))
}

/// Scalar constant of `v = |W|_op`.
pub fn opnorm_weight_constant(w: &MatrixField, p: &ExponentFunction, family: &CubeFamily) -> Result<ApReport> {
    inverse(w)?;
    scalar_ap_constant(&op_norm(w), p, family)
}

#[derive(Debug, Clone)]
pub struct WeightSumReport {
    pub sum: ApReport,
    pub parts: Vec<ApReport>,
    /// Cubes where `[Σw_j]_Q > Σ_j [w_j]_Q` beyond a relative slack of 1e-12.
    pub violations: Vec<usize>,
}

/// Constant of `Σ_j w_j` next to the constants of the summands.
pub fn weight_sum_constant(
    weights: &[ScalarField],
    p: &ExponentFunction,
    family: &CubeFamily,
) -> Result<WeightSumReport> {
    let first = weights
        .first()
        .ok_or_else(|| Error::InvalidInput("no weights to sum".into()))?;
    let mut total = first.clone();
    for w in &weights[1..] {
        total = total.zip_with(w, |a, b| a + b)?;
    }
    let sum = scalar_ap_constant(&total, p, family)?;
    let parts = weights
        .iter()
        .map(|w| scalar_ap_constant(w, p, family))
        .collect::<Result<Vec<_>>>()?;
    let violations = (0..family.len())
        .filter(|&i| {
            let bound: f64 = parts.iter().map(|r| r.values[i]).sum();
            sum.values[i] > bound * (1.0 + 1e-12)
        })
        .collect();
    Ok(WeightSumReport {
        sum,
        parts,
        violations,
    })
}

fn singular(cell: usize) -> Error {
    Error::SingularWeight {
        cell,
        detail: "weight is not finite and positive here; shift the box to [h/2, 1+h/2]".into(),
    }
}

/// `w(x) = |x|^a`.
pub fn make_power_weight(grid: &Grid, a: f64) -> Result<ScalarField> {
    let w = ScalarField::from_fn(grid, |x| grid.norm(x).powf(a));
    if let Some(c) = w.values().iter().position(|&v| !(v > 0.0 && v.is_finite())) {
        return Err(singular(c));
    }
    Ok(w)
}

/// `W(x) = diag(|x|^{a_1}, …, |x|^{a_d})`.
pub fn make_diagonal_weight(grid: &Grid, exponents: &[f64]) -> Result<MatrixField> {
    let d = exponents.len();
    let w = MatrixField::from_fn(grid, d, |x| {
        let r = grid.norm(x);
        DMatrix::from_fn(d, d, |i, j| if i == j { r.powf(exponents[i]) } else { 0.0 })
    })?;
    check_matrix_weight(&w)?;
    Ok(w)
}

/// `W(x) = R(θ(x)) diag(|x|^a, |x|^b) R(θ(x))ᵀ`.
pub fn make_rotating_weight(
    grid: &Grid,
    theta: impl Fn(&Point) -> f64,
    a: f64,
    b: f64,
) -> Result<MatrixField> {
    let w = MatrixField::from_fn(grid, 2, |x| {
        let r = grid.norm(x);
        let rot = linalg::rotation2(theta(x));
        let dg = DMatrix::from_row_slice(2, 2, &[r.powf(a), 0.0, 0.0, r.powf(b)]);
        &rot * dg * rot.transpose()
    })?;
    check_matrix_weight(&w)?;
    Ok(w)
}

fn check_matrix_weight(w: &MatrixField) -> Result<()> {
    for c in 0..w.cell_count() {
        if w.slice(c).iter().any(|v| !v.is_finite()) {
            return Err(singular(c));
        }
    }
    inverse(w).map(|_| ()).map_err(|e| match e {
        Error::SingularWeight { cell, .. } => singular(cell),
        other => other,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RefinementSweep {
    /// `(cells per axis, supremum)` per resolution.
    pub rows: Vec<(usize, f64)>,
    /// Least-squares slope of `log sup` against `log m`.
    pub growth_exponent: f64,
    pub divergent: bool,
}

/// Growth exponents above this are reported as divergent.
pub const DIVERGENCE_SLOPE: f64 = 0.25;

/// `[ |x|^a ]` over all dyadic levels on `[h/2, 1+h/2]^n` for each resolution.
pub fn power_weight_sweep(
    dim: usize,
    a: f64,
    p: impl Fn(&Point) -> f64,
    cells: &[usize],
) -> Result<RefinementSweep> {
    let mut rows = Vec::with_capacity(cells.len());
    for &m in cells {
        if !m.is_power_of_two() {
            return Err(Error::Alignment(format!("{m} cells per axis is not a power of two")));
        }
        let g = Grid::offset_unit(dim, m)?;
        let w = make_power_weight(&g, a)?;
        let e = ExponentFunction::from_fn(&g, &p)?;
        let fam = dyadic_levels(&g, 0, m.trailing_zeros())?;
        rows.push((m, scalar_ap_constant(&w, &e, &fam)?.supremum));
    }
    let growth_exponent = log_log_slope(&rows);
    Ok(RefinementSweep {
        divergent: growth_exponent > DIVERGENCE_SLOPE,
        rows,
        growth_exponent,
    })
}

/// Least-squares slope of `log y` against `log x`.
pub fn log_log_slope(rows: &[(usize, f64)]) -> f64 {
    let pts: Vec<(f64, f64)> = rows.iter().map(|&(m, s)| ((m as f64).ln(), s.ln())).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::dyadic_cubes;
    use approx::assert_abs_diff_eq;

    #[test]
    fn identity_weight_gives_one() {
        let g = Grid::unit(1, 32).unwrap();
        let p = ExponentFunction::constant(&g, 3.0).unwrap();
        let fam = dyadic_levels(&g, 0, 3).unwrap();
        let r = matrix_ap_constant(&MatrixField::identity(&g, 2), &p, &fam).unwrap();
        assert!(r.values.iter().all(|v| (v - 1.0).abs() < 1e-12));
        let s = scalar_ap_constant(&ScalarField::constant(&g, 7.5), &p, &fam).unwrap();
        assert!(s.values.iter().all(|v| (v - 1.0).abs() < 1e-12));
        assert_eq!(s.supremum, s.values.iter().copied().fold(0.0, f64::max));
    }

    #[test]
    fn nonpositive_weight_rejected() {
        let g = Grid::unit(1, 8).unwrap();
        let p = ExponentFunction::constant(&g, 2.0).unwrap();
        let fam = dyadic_cubes(&g, 0).unwrap();
        let w = ScalarField::from_fn(&g, |x| x[0] - 0.5);
        assert!(matches!(
            scalar_ap_constant(&w, &p, &fam),
            Err(Error::SingularWeight { cell: 0, .. })
        ));
    }

    #[test]
    fn generators() {
        let g = Grid::offset_unit(1, 16).unwrap();
        assert!(make_power_weight(&g, 0.0).unwrap().values().iter().all(|&v| v == 1.0));
        let rot = make_rotating_weight(&Grid::offset_unit(2, 4).unwrap(), |_| 0.0, 0.5, -0.5).unwrap();
        let dg = make_diagonal_weight(&Grid::offset_unit(2, 4).unwrap(), &[0.5, -0.5]).unwrap();
        for (a, b) in rot.values().iter().zip(dg.values()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-15);
        }
        let at_origin = Grid::new(&[-0.5], &[0.5], 3).unwrap();
        assert!(matches!(
            make_power_weight(&at_origin, -1.0),
            Err(Error::SingularWeight { cell: 1, .. })
        ));
    }

    #[test]
    fn sum_of_one_weight_is_equal() {
        let g = Grid::offset_unit(1, 16).unwrap();
        let p = ExponentFunction::constant(&g, 2.0).unwrap();
        let fam = dyadic_levels(&g, 0, 2).unwrap();
        let w = make_power_weight(&g, 0.5).unwrap();
        let r = weight_sum_constant(std::slice::from_ref(&w), &p, &fam).unwrap();
        assert_eq!(r.sum.values, r.parts[0].values);
        assert!(r.violations.is_empty());
    }
}
