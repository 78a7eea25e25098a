//! Modulars, Luxemburg norms, the Hölder pairing, dual witnesses and the property-G ratio.

use crate::error::{Error, Result};
use crate::exponent::ExponentFunction;
use crate::field::{MatrixField, ScalarField, VectorField};
use crate::grid::{CubeFamily, Grid};

/// Stopping rule for the Luxemburg bisection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormOptions {
    /// Stop once the bracket width is at most `rel_tol` times its upper end.
    pub rel_tol: f64,
    pub max_iter: usize,
    /// Use the closed form `(∫|f|^p)^{1/p}` when the exponent is constant on the support.
    pub closed_form: bool,
}

impl Default for NormOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            max_iter: 200,
            closed_form: true,
        }
    }
}

impl NormOptions {
    /// Bisects down to floating-point resolution.
    pub fn precise() -> Self {
        Self {
            rel_tol: 1e-15,
            ..Self::default()
        }
    }

    /// Always bisects, even for constant exponents.
    pub fn bisection_only(self) -> Self {
        Self {
            closed_form: false,
            ..self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormResult {
    pub value: f64,
    pub iterations: usize,
    pub bracket_width: f64,
    /// False when the iteration cap was hit before the tolerance was met.
    pub converged: bool,
}

impl NormResult {
    fn exact(value: f64) -> Self {
        Self {
            value,
            iterations: 0,
            bracket_width: 0.0,
            converged: true,
        }
    }
}

/// Nonzero `(|f|, p)` pairs of a function restricted to some cells.
#[derive(Debug, Default, Clone)]
pub struct Terms {
    ln_a: Vec<f64>,
    p: Vec<f64>,
    a_max: f64,
    inf_max: f64,
    has_finite: bool,
}

impl Terms {
    pub fn with_capacity(n: usize) -> Self {
        Self {
            ln_a: Vec::with_capacity(n),
            p: Vec::with_capacity(n),
            ..Self::default()
        }
    }

    pub fn clear(&mut self) {
        self.ln_a.clear();
        self.p.clear();
        self.a_max = 0.0;
        self.inf_max = 0.0;
        self.has_finite = false;
    }

    /// Adds one cell with value `a ≥ 0` and exponent `p`.
    pub fn push(&mut self, a: f64, p: f64) {
        if a == 0.0 {
            return;
        }
        self.a_max = self.a_max.max(a);
        if p.is_infinite() {
            self.inf_max = self.inf_max.max(a);
        } else {
            self.has_finite = true;
            self.ln_a.push(a.ln());
            self.p.push(p);
        }
    }

    fn modular_scaled(&self, vol: f64, ln_lambda: f64, lambda: f64) -> f64 {
        let s: f64 = self
            .ln_a
            .iter()
            .zip(&self.p)
            .map(|(&la, &p)| (p * (la - ln_lambda)).exp())
            .sum();
        s * vol + self.inf_max / lambda
    }

    fn constant_exponent(&self) -> Option<f64> {
        let p0 = *self.p.first()?;
        self.p.iter().all(|&p| p == p0).then_some(p0)
    }

    /// Luxemburg norm of the collected terms for a grid of the given cell and total volume.
    pub fn norm(&self, cell_volume: f64, total_volume: f64, opts: &NormOptions) -> NormResult {
        if self.a_max == 0.0 {
            return NormResult::exact(0.0);
        }
        if !self.has_finite {
            return NormResult::exact(self.inf_max);
        }
        if opts.closed_form && self.inf_max == 0.0 {
            if let Some(p0) = self.constant_exponent() {
                let ln_max = self.a_max.ln();
                let s: f64 = self.ln_a.iter().map(|&la| (p0 * (la - ln_max)).exp()).sum();
                return NormResult::exact(self.a_max * (s * cell_volume).powf(1.0 / p0));
            }
        }
        let rho = |l: f64| self.modular_scaled(cell_volume, l.ln(), l);

        let mut hi = f64::max(1.0, self.a_max * (1.0 + total_volume));
        while rho(hi) > 1.0 {
            hi *= 2.0;
        }
        let mut lo = 0.5 * hi;
        while rho(lo) <= 1.0 {
            hi = lo;
            lo *= 0.5;
            if lo == 0.0 {
                return NormResult::exact(0.0);
            }
        }
        let mut iterations = 0;
        let mut converged = false;
        while iterations < opts.max_iter {
            if hi - lo <= opts.rel_tol * hi {
                converged = true;
                break;
            }
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                converged = true;
                break;
            }
            iterations += 1;
            if rho(mid) > 1.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        if !converged && hi - lo <= opts.rel_tol * hi {
            converged = true;
        }
        NormResult {
            value: 0.5 * (lo + hi),
            iterations,
            bracket_width: hi - lo,
            converged,
        }
    }
}

fn check_finite(values: &[f64]) -> Result<()> {
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::InvalidInput(format!("non-finite value at cell {i}")));
    }
    Ok(())
}

fn check_grid(a: &Grid, b: &Grid) -> Result<()> {
    if a.cell_count() != b.cell_count() {
        return Err(Error::DimensionMismatch {
            expected: a.cell_count(),
            found: b.cell_count(),
        });
    }
    Ok(())
}

/// `∫_{Ω∖Ω_∞} |f|^p dx + max_{Ω_∞} |f|`; `+∞` when a term overflows.
pub fn modular(f: &ScalarField, p: &ExponentFunction) -> f64 {
    modular_values(f.values(), p, f.grid().cell_volume())
}

fn modular_values(values: &[f64], p: &ExponentFunction, vol: f64) -> f64 {
    let mut integral = 0.0;
    let mut sup = 0.0f64;
    for (&v, &e) in values.iter().zip(p.values()) {
        let a = v.abs();
        if e.is_infinite() {
            sup = sup.max(a);
        } else if a > 0.0 {
            integral += a.powf(e);
        }
    }
    integral * vol + sup
}

/// Luxemburg norm of per-cell values `values[i]` over all cells.
pub fn norm_of_values(values: &[f64], p: &ExponentFunction, opts: &NormOptions) -> Result<NormResult> {
    check_finite(values)?;
    if values.len() != p.values().len() {
        return Err(Error::DimensionMismatch {
            expected: p.values().len(),
            found: values.len(),
        });
    }
    let mut t = Terms::with_capacity(values.len());
    for (&v, &e) in values.iter().zip(p.values()) {
        t.push(v.abs(), e);
    }
    let g = p.grid();
    Ok(t.norm(g.cell_volume(), g.volume(), opts))
}

/// Luxemburg norm of `χ_S · values` for a cell subset `S`.
pub fn norm_on_cells(
    values: &[f64],
    p: &ExponentFunction,
    cells: &[usize],
    opts: &NormOptions,
) -> Result<NormResult> {
    let mut t = Terms::with_capacity(cells.len());
    for &i in cells {
        let v = values[i];
        if !v.is_finite() {
            return Err(Error::InvalidInput(format!("non-finite value at cell {i}")));
        }
        t.push(v.abs(), p.value(i));
    }
    let g = p.grid();
    Ok(t.norm(g.cell_volume(), g.volume(), opts))
}

pub fn luxemburg_norm(f: &ScalarField, p: &ExponentFunction) -> Result<NormResult> {
    luxemburg_norm_with(f, p, &NormOptions::default())
}

pub fn luxemburg_norm_with(
    f: &ScalarField,
    p: &ExponentFunction,
    opts: &NormOptions,
) -> Result<NormResult> {
    check_grid(f.grid(), p.grid())?;
    norm_of_values(f.values(), p, opts)
}

/// `‖ |f| ‖` with the Euclidean length of the vector field.
pub fn vector_norm(f: &VectorField, p: &ExponentFunction) -> Result<NormResult> {
    check_grid(f.grid(), p.grid())?;
    norm_of_values(f.pointwise_norm().values(), p, &NormOptions::default())
}

/// `‖ |W f| ‖`.
pub fn matrix_weighted_norm(
    w: &MatrixField,
    f: &VectorField,
    p: &ExponentFunction,
) -> Result<NormResult> {
    matrix_weighted_norm_with(w, f, p, &NormOptions::default())
}

pub fn matrix_weighted_norm_with(
    w: &MatrixField,
    f: &VectorField,
    p: &ExponentFunction,
    opts: &NormOptions,
) -> Result<NormResult> {
    check_grid(f.grid(), p.grid())?;
    check_finite(f.values())?;
    let len = w.weighted_length(f)?;
    norm_of_values(len.values(), p, opts)
}

/// `‖ f w ‖`.
pub fn scalar_weighted_norm(
    f: &ScalarField,
    w: &ScalarField,
    p: &ExponentFunction,
) -> Result<NormResult> {
    check_grid(f.grid(), p.grid())?;
    let fw = f.zip_with(w, |a, b| a * b)?;
    norm_of_values(fw.values(), p, &NormOptions::default())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HolderPairing {
    /// `∫|fg|`.
    pub lhs: f64,
    /// `4‖f‖_{p(·)}‖g‖_{p'(·)}`.
    pub rhs: f64,
    /// `‖f‖_{p(·)}‖g‖_{p'(·)}`, the classical bound for constant exponents.
    pub product: f64,
}

pub fn holder_pairing(f: &ScalarField, g: &ScalarField, p: &ExponentFunction) -> Result<HolderPairing> {
    holder_pairing_with(f, g, p, 4.0)
}

/// Same as [`holder_pairing`] with a caller-chosen constant in place of 4.
pub fn holder_pairing_with(
    f: &ScalarField,
    g: &ScalarField,
    p: &ExponentFunction,
    constant: f64,
) -> Result<HolderPairing> {
    check_grid(f.grid(), g.grid())?;
    let vol = f.grid().cell_volume();
    let lhs = f
        .values()
        .iter()
        .zip(g.values())
        .map(|(a, b)| (a * b).abs())
        .sum::<f64>()
        * vol;
    let nf = luxemburg_norm(f, p)?.value;
    let ng = luxemburg_norm(g, &p.conjugate())?.value;
    Ok(HolderPairing {
        lhs,
        rhs: constant * nf * ng,
        product: nf * ng,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DualWitness {
    pub g: VectorField,
    /// Set when the input vanishes identically (the witness is then zero).
    pub zero_input: bool,
    /// `‖ |g| ‖_{p'(·)}`.
    pub dual_norm: f64,
    /// `∫ f·g`.
    pub pairing: f64,
    /// `‖ |f|₁ ‖_{p(·)}`.
    pub primal_norm: f64,
    /// Whether `dual_norm ≤ d` and `primal_norm ≤ 4·pairing` both hold.
    pub contract_holds: bool,
}

/// A witness `g` with `‖g‖_{p'(·)} ≤ d` and `‖f‖ ≤ 4∫f·g`, built componentwise.
///
/// Each component uses the pointwise extremal `sign(f)|f/λ|^{p-1}`, with the mass on
/// `{p = ∞}` concentrated on a cell where `|f|` is largest there; components whose dual
/// norm exceeds 1 are rescaled. Both inequalities are rechecked on the result.
pub fn dual_witness(f: &VectorField, p: &ExponentFunction) -> Result<DualWitness> {
    check_grid(f.grid(), p.grid())?;
    check_finite(f.values())?;
    let grid = f.grid();
    let d = f.dim();
    let n = f.cell_count();
    let vol = grid.cell_volume();
    let pc = p.conjugate();
    let opts = NormOptions::default();
    let mut g = VectorField::zeros(grid, d);

    for i in 0..d {
        let fi = f.component(i);
        let lambda = luxemburg_norm(&fi, p)?.value;
        if lambda == 0.0 {
            continue;
        }
        let mut gi = vec![0.0; n];
        let mut best: Option<(usize, f64)> = None;
        for c in 0..n {
            let v = fi.values()[c];
            let e = p.value(c);
            if e.is_infinite() {
                if best.is_none_or(|(_, b)| v.abs() > b) {
                    best = Some((c, v.abs()));
                }
            } else if v != 0.0 {
                gi[c] = v.signum() * (v.abs() / lambda).powf(e - 1.0);
            }
        }
        if let Some((c, a)) = best {
            if a > 0.0 {
                gi[c] = fi.values()[c].signum() / vol;
            }
        }
        let ni = norm_of_values(&gi, &pc, &opts)?.value;
        let scale = if ni > 1.0 { 1.0 / ni } else { 1.0 };
        for c in 0..n {
            g.at_mut(c)[i] = gi[c] * scale;
        }
    }

    let zero_input = f.max_abs() == 0.0;
    let dual_norm = norm_of_values(g.pointwise_norm().values(), &pc, &opts)?.value;
    let pairing: f64 = f
        .values()
        .iter()
        .zip(g.values())
        .map(|(a, b)| a * b)
        .sum::<f64>()
        * vol;
    let primal_norm = norm_of_values(f.pointwise_l1().values(), p, &opts)?.value;
    let slack = 1e-9;
    let contract_holds = dual_norm <= d as f64 * (1.0 + slack)
        && primal_norm <= 4.0 * pairing * (1.0 + slack) + if zero_input { slack } else { 0.0 };
    Ok(DualWitness {
        g,
        zero_input,
        dual_norm,
        pairing,
        primal_norm,
        contract_holds,
    })
}

/// `Σ_Q ‖χ_Q f‖_{p(·)}‖χ_Q g‖_{p'(·)} / (‖f‖_{p(·)}‖g‖_{p'(·)})` over a disjoint family.
pub fn property_g_ratio(
    f: &ScalarField,
    g: &ScalarField,
    p: &ExponentFunction,
    family: &CubeFamily,
) -> Result<f64> {
    check_grid(f.grid(), g.grid())?;
    check_grid(f.grid(), p.grid())?;
    if !family.is_disjoint() {
        family.check_disjoint()?;
    }
    let pc = p.conjugate();
    let opts = NormOptions::default();
    let denom = norm_of_values(f.values(), p, &opts)?.value * norm_of_values(g.values(), &pc, &opts)?.value;
    if denom == 0.0 {
        return Err(Error::ZeroDenominator("‖f‖·‖g‖ vanishes".into()));
    }
    let mut num = 0.0;
    for q in family.cubes() {
        let cells = q.cells(f.grid());
        if cells.is_empty() {
            continue;
        }
        let a = norm_on_cells(f.values(), p, &cells, &opts)?.value;
        if a == 0.0 {
            continue;
        }
        num += a * norm_on_cells(g.values(), &pc, &cells, &opts)?.value;
    }
    Ok(num / denom)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{dyadic_cubes, Cube};
    use approx::assert_abs_diff_eq;

    fn unit(m: usize) -> Grid {
        Grid::unit(1, m).unwrap()
    }

    #[test]
    fn modular_examples() {
        let g = unit(16);
        let one = ScalarField::constant(&g, 1.0);
        let two = ScalarField::constant(&g, 2.0);
        let p2 = ExponentFunction::constant(&g, 2.0).unwrap();
        let pinf = ExponentFunction::constant(&g, f64::INFINITY).unwrap();
        assert_abs_diff_eq!(modular(&one, &p2), 1.0, epsilon = 1e-15);
        assert_eq!(modular(&two, &pinf), 2.0);
    }

    #[test]
    fn modular_variable_exponent_quadrature() {
        let g = unit(64);
        let f = ScalarField::from_fn(&g, |x| x[0]);
        let p = ExponentFunction::from_fn(&g, |x| 2.0 + x[0]).unwrap();
        // composite Simpson on a fine mesh
        let n = 200_000;
        let h = 1.0 / n as f64;
        let integrand = |x: f64| if x == 0.0 { 0.0 } else { x.powf(2.0 + x) };
        let mut s = integrand(0.0) + integrand(1.0);
        for k in 1..n {
            let w = if k % 2 == 1 { 4.0 } else { 2.0 };
            s += w * integrand(k as f64 * h);
        }
        let oracle = s * h / 3.0;
        assert!((modular(&f, &p) - oracle).abs() < 1e-3);
    }

    #[test]
    fn constant_exponent_closed_form() {
        let g = unit(64);
        let f = ScalarField::from_fn(&g, |x| (5.0 * x[0]).sin() + 0.2);
        for p0 in [1.0, 1.5, 2.0, 3.7] {
            let p = ExponentFunction::constant(&g, p0).unwrap();
            let closed = (f.values().iter().map(|v| v.abs().powf(p0)).sum::<f64>() / 64.0).powf(1.0 / p0);
            let opts = NormOptions::default().bisection_only();
            let r = luxemburg_norm_with(&f, &p, &opts).unwrap();
            assert!(r.converged);
            assert!((r.value - closed).abs() < 1e-9);
            assert!(r.bracket_width <= 1e-10 * r.value);
        }
    }

    #[test]
    fn constant_function_on_unit_box() {
        let g = unit(32);
        let f = ScalarField::constant(&g, 3.0);
        let p = ExponentFunction::from_fn(&g, |x| 1.5 + 2.0 * x[0]).unwrap();
        assert_abs_diff_eq!(luxemburg_norm(&f, &p).unwrap().value, 3.0, epsilon = 1e-9);
    }

    #[test]
    fn zero_and_infinite_inputs() {
        let g = unit(8);
        let p = ExponentFunction::constant(&g, 2.0).unwrap();
        assert_eq!(luxemburg_norm(&ScalarField::constant(&g, 0.0), &p).unwrap().value, 0.0);
        let mut v = vec![1.0; 8];
        v[3] = f64::NAN;
        let bad = ScalarField::new(&g, v).unwrap();
        assert!(matches!(luxemburg_norm(&bad, &p), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn mixed_infinite_region() {
        let g = unit(8);
        let p = ExponentFunction::from_fn(&g, |x| if x[0] < 0.5 { 2.0 } else { f64::INFINITY }).unwrap();
        let f = ScalarField::constant(&g, 1.0);
        // modular(1/λ) = 1/(2λ²) + 1/λ = 1
        let lambda = (1.0 + 3.0f64.sqrt()) / 2.0;
        assert_abs_diff_eq!(luxemburg_norm(&f, &p).unwrap().value, lambda, epsilon = 1e-9);
    }

    #[test]
    fn vector_and_weighted_examples() {
        let g = unit(8);
        let p = ExponentFunction::constant(&g, 2.0).unwrap();
        let w = MatrixField::constant(
            &g,
            &nalgebra::DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![2.0, 3.0])),
        );
        let f = VectorField::from_fn(&g, 2, |_| vec![1.0, 0.0]).unwrap();
        assert_abs_diff_eq!(matrix_weighted_norm(&w, &f, &p).unwrap().value, 2.0, epsilon = 1e-12);
        let id = MatrixField::identity(&g, 2);
        assert_eq!(
            matrix_weighted_norm(&id, &f, &p).unwrap().value,
            vector_norm(&f, &p).unwrap().value
        );
        let bad = VectorField::zeros(&g, 3);
        assert!(matrix_weighted_norm(&w, &bad, &p).is_err());
    }

    #[test]
    fn holder_unit_example() {
        let g = unit(8);
        let one = ScalarField::constant(&g, 1.0);
        let p = ExponentFunction::constant(&g, 2.0).unwrap();
        let h = holder_pairing(&one, &one, &p).unwrap();
        assert_abs_diff_eq!(h.lhs, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(h.rhs, 4.0, epsilon = 1e-12);
    }

    #[test]
    fn dual_witness_extremal_pair() {
        let g = unit(16);
        let p = ExponentFunction::constant(&g, 2.0).unwrap();
        let f = VectorField::from_fn(&g, 1, |_| vec![1.0]).unwrap();
        let w = dual_witness(&f, &p).unwrap();
        assert!(w.g.values().iter().all(|&v| (v - 1.0).abs() < 1e-12));
        assert_abs_diff_eq!(w.pairing, 1.0, epsilon = 1e-10);
        assert!(w.contract_holds);
    }

    #[test]
    fn dual_witness_component_reduction() {
        let g = unit(16);
        let p = ExponentFunction::from_fn(&g, |x| 2.0 + x[0]).unwrap();
        let f1 = VectorField::from_fn(&g, 1, |x| vec![x[0] - 0.3]).unwrap();
        let f2 = VectorField::from_fn(&g, 2, |x| vec![x[0] - 0.3, 0.0]).unwrap();
        let w1 = dual_witness(&f1, &p).unwrap();
        let w2 = dual_witness(&f2, &p).unwrap();
        assert_eq!(w2.g.component(0), w1.g.component(0));
        assert!(w2.g.component(1).values().iter().all(|&v| v == 0.0));
        assert!(w1.contract_holds && w2.contract_holds);
    }

    #[test]
    fn dual_witness_zero_input() {
        let g = unit(8);
        let p = ExponentFunction::constant(&g, 3.0).unwrap();
        let w = dual_witness(&VectorField::zeros(&g, 2), &p).unwrap();
        assert!(w.zero_input);
        assert_eq!(w.g.max_abs(), 0.0);
    }

    #[test]
    fn dual_witness_with_infinite_and_unit_exponents() {
        let g = unit(16);
        let p = ExponentFunction::from_fn(&g, |x| {
            if x[0] < 0.25 {
                1.0
            } else if x[0] < 0.75 {
                2.5
            } else {
                f64::INFINITY
            }
        })
        .unwrap();
        let f = VectorField::from_fn(&g, 2, |x| vec![(7.0 * x[0]).sin(), 1.0 + x[0]]).unwrap();
        assert!(dual_witness(&f, &p).unwrap().contract_holds);
    }

    #[test]
    fn property_g_single_cube_is_one() {
        let g = unit(16);
        let p = ExponentFunction::from_fn(&g, |x| 2.0 + x[0]).unwrap();
        let f = ScalarField::from_fn(&g, |x| 1.0 + x[0]);
        let h = ScalarField::from_fn(&g, |x| 2.0 - x[0]);
        let fam = CubeFamily::disjoint(vec![Cube::new(&[0.0], 1.0).unwrap()]).unwrap();
        assert_abs_diff_eq!(property_g_ratio(&f, &h, &p, &fam).unwrap(), 1.0, epsilon = 1e-12);
        let zero = ScalarField::constant(&g, 0.0);
        assert!(matches!(
            property_g_ratio(&zero, &h, &p, &fam),
            Err(Error::ZeroDenominator(_))
        ));
        let dy = dyadic_cubes(&g, 2).unwrap();
        assert!(property_g_ratio(&f, &h, &p, &dy).unwrap().is_finite());
    }
}
