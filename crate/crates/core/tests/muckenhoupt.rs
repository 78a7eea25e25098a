use matvar::exponent::ExponentFunction;
use matvar::field::{MatrixField, ScalarField};
use matvar::grid::{dyadic_levels, Grid, Point};
use matvar::muckenhoupt::{
    make_diagonal_weight, make_power_weight, make_rotating_weight, matrix_ap_constant, power_weight_sweep,
    reducing_ap_constant, scalar_ap_constant, weight_sum_constant,
};
use nalgebra::DMatrix;
use proptest::prelude::*;

/// Smallest multiple of 1e−7·scale whose modular is at most one.
fn scan_norm(f: &[f64], p: &[f64], vol: f64) -> f64 {
    let rho = |lam: f64| f.iter().zip(p).map(|(a, q)| (a.abs() / lam).powf(*q)).sum::<f64>() * vol;
    let mut step = f.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
    let mut lam = step;
    while rho(lam) > 1.0 {
        lam += step;
    }
    for _ in 0..7 {
        lam -= step;
        step /= 10.0;
        lam += step;
        while rho(lam) > 1.0 {
            lam += step;
        }
    }
    lam
}

fn exponent_values(p: &ExponentFunction, cells: &[usize]) -> Vec<f64> {
    cells.iter().map(|&c| p.value(c)).collect()
}

#[test]
fn scalar_constant_matches_scan_oracle() {
    let g = Grid::offset_unit(1, 32).unwrap();
    let w = make_power_weight(&g, 0.5).unwrap();
    let p = ExponentFunction::from_fn(&g, |x| 2.0 + 0.5 * x[0]).unwrap();
    let pc = p.conjugate();
    let fam = dyadic_levels(&g, 0, 4).unwrap();
    let rep = scalar_ap_constant(&w, &p, &fam).unwrap();
    for (q, got) in fam.cubes().iter().zip(&rep.values) {
        let cells = q.cells(&g);
        let wv: Vec<f64> = cells.iter().map(|&c| w.values()[c]).collect();
        let winv: Vec<f64> = wv.iter().map(|v| 1.0 / v).collect();
        let a = scan_norm(&wv, &exponent_values(&p, &cells), g.cell_volume());
        let b = scan_norm(&winv, &exponent_values(&pc, &cells), g.cell_volume());
        let want = a * b / (cells.len() as f64 * g.cell_volume());
        assert!((got - want).abs() <= 1e-5 * want, "{got} vs {want}");
    }
}

#[test]
fn matrix_constant_matches_double_loop_oracle() {
    let g = Grid::offset_unit(1, 32).unwrap();
    let w = make_diagonal_weight(&g, &[0.5, 0.0]).unwrap();
    let p = ExponentFunction::from_fn(&g, |x| 1.8 + x[0]).unwrap();
    let pc = p.conjugate();
    let fam = dyadic_levels(&g, 0, 2).unwrap();
    let rep = matrix_ap_constant(&w, &p, &fam).unwrap();
    let mat = |c: usize| DMatrix::from_row_slice(2, 2, w.slice(c));
    for (q, got) in fam.cubes().iter().zip(&rep.values) {
        let cells = q.cells(&g);
        let inner: Vec<f64> = cells
            .iter()
            .map(|&x| {
                let k: Vec<f64> = cells
                    .iter()
                    .map(|&y| (mat(x) * mat(y).try_inverse().unwrap()).singular_values().max())
                    .collect();
                scan_norm(&k, &exponent_values(&pc, &cells), g.cell_volume())
            })
            .collect();
        let want = scan_norm(&inner, &exponent_values(&p, &cells), g.cell_volume())
            / (cells.len() as f64 * g.cell_volume());
        assert!((got - want).abs() <= 1e-5 * want, "{got} vs {want}");
    }
}

#[test]
fn one_by_one_matrix_weight_is_scalar() {
    let g = Grid::offset_unit(1, 32).unwrap();
    let w = make_power_weight(&g, -0.3).unwrap();
    let p = ExponentFunction::from_fn(&g, |x| 1.5 + x[0]).unwrap();
    let fam = dyadic_levels(&g, 0, 3).unwrap();
    let s = scalar_ap_constant(&w, &p, &fam).unwrap();
    let m = matrix_ap_constant(&MatrixField::from_scalar(&w), &p, &fam).unwrap();
    for (a, b) in s.values.iter().zip(&m.values) {
        assert!((a - b).abs() <= 1e-10 * a);
    }
}

#[test]
fn constant_exponent_constants_are_at_least_one() {
    let g = Grid::offset_unit(1, 32).unwrap();
    let w = make_power_weight(&g, 0.7).unwrap();
    let p = ExponentFunction::constant(&g, 2.5).unwrap();
    let rep = scalar_ap_constant(&w, &p, &dyadic_levels(&g, 0, 5).unwrap()).unwrap();
    assert!(rep.values.iter().all(|&v| v >= 1.0 - 1e-12));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn invariant_under_scaling_and_rotation(c in 0.01f64..100.0, angle in 0.0f64..6.3) {
        let g = Grid::offset_unit(1, 16).unwrap();
        let w = make_rotating_weight(&g, |x| 3.0 * x[0], 0.5, -0.25).unwrap();
        let p = ExponentFunction::from_fn(&g, |x| 1.7 + x[0]).unwrap();
        let fam = dyadic_levels(&g, 0, 2).unwrap();
        let base = matrix_ap_constant(&w, &p, &fam).unwrap();
        let scaled = matrix_ap_constant(&w.scale(c), &p, &fam).unwrap();
        let u = DMatrix::from_row_slice(2, 2, &[angle.cos(), -angle.sin(), angle.sin(), angle.cos()]);
        let values: Vec<f64> = (0..g.cell_count())
            .flat_map(|c| {
                let r = &u * DMatrix::from_row_slice(2, 2, w.slice(c)) * u.transpose();
                r.transpose().iter().copied().collect::<Vec<_>>()
            })
            .collect();
        let rotated = MatrixField::new(&g, 2, values).unwrap();
        let rotated = matrix_ap_constant(&rotated, &p, &fam).unwrap();
        for i in 0..fam.len() {
            prop_assert!((scaled.values[i] - base.values[i]).abs() <= 1e-8 * base.values[i]);
            prop_assert!((rotated.values[i] - base.values[i]).abs() <= 1e-8 * base.values[i]);
        }
    }
}

#[test]
fn supremum_grows_with_the_family() {
    let g = Grid::offset_unit(1, 64).unwrap();
    let w = make_power_weight(&g, -0.6).unwrap();
    let p = ExponentFunction::from_fn(&g, |x| 2.0 + x[0]).unwrap();
    let mut last = 0.0;
    for top in 0..=6 {
        let s = scalar_ap_constant(&w, &p, &dyadic_levels(&g, 0, top).unwrap()).unwrap().supremum;
        assert!(s >= last);
        last = s;
    }
}

#[test]
fn reducing_and_direct_constants_are_comparable() {
    let g = Grid::offset_unit(1, 16).unwrap();
    let w = make_rotating_weight(&g, |x| 2.0 * x[0], 0.5, -0.25).unwrap();
    let p = ExponentFunction::from_fn(&g, |x| 1.7 + x[0]).unwrap();
    let fam = dyadic_levels(&g, 0, 2).unwrap();
    let direct = matrix_ap_constant(&w, &p, &fam).unwrap();
    let reducing = reducing_ap_constant(&w, &p, &fam).unwrap();
    for (a, b) in direct.values.iter().zip(&reducing.values) {
        let r = b / a;
        assert!(r.is_finite() && r > 0.1 && r < 10.0, "ratio {r}");
    }
}

fn diagonal_sweep(exponents: &[f64]) -> Vec<f64> {
    [16usize, 32, 64, 128]
        .iter()
        .map(|&m| {
            let g = Grid::offset_unit(1, m).unwrap();
            let w = make_diagonal_weight(&g, exponents).unwrap();
            let e = ExponentFunction::from_fn(&g, |x| 2.0 + 0.5 * x[0]).unwrap();
            matrix_ap_constant(&w, &e, &dyadic_levels(&g, 0, 3).unwrap()).unwrap().supremum
        })
        .collect()
}

#[test]
fn diagonal_power_weight_is_stable_under_refinement() {
    let sups = diagonal_sweep(&[0.25, -0.25]);
    let steps: Vec<f64> = sups.windows(2).map(|w| w[1] - w[0]).collect();
    assert!(steps.windows(2).all(|s| s[1] < 0.85 * s[0]), "{sups:?}");
    assert!(sups[3] / sups[0] < 1.1, "{sups:?}");
}

#[test]
fn mixed_term_outside_dual_space_keeps_growing() {
    // x^{-1/4} y^{-1/2} with p'(0) = 2 fails to be integrable in y
    let sups = diagonal_sweep(&[0.5, -0.25]);
    // logarithmic growth: equal steps per doubling
    let steps: Vec<f64> = sups.windows(2).map(|w| w[1] - w[0]).collect();
    assert!(steps.windows(2).all(|s| s[1] > 0.9 * s[0]), "{sups:?}");
}

#[test]
fn weight_sums_obey_the_subadditive_bound() {
    let g = Grid::offset_unit(1, 64).unwrap();
    let w1 = make_power_weight(&g, 0.5).unwrap();
    let w2 = ScalarField::from_fn(&g, |_| 1.0);
    let p = ExponentFunction::from_fn(&g, |x| 1.5 + x[0]).unwrap();
    let rep = weight_sum_constant(&[w1, w2], &p, &dyadic_levels(&g, 0, 6).unwrap()).unwrap();
    assert!(rep.violations.is_empty(), "{:?}", rep.violations);
}

#[test]
fn power_weight_sweeps() {
    let cells = [16usize, 32, 64, 128];
    let p = |_: &Point| 2.0;
    let bad = power_weight_sweep(1, -2.0, p, &cells).unwrap();
    assert!(bad.divergent, "{bad:?}");
    for a in [0.5, 0.25] {
        let good = power_weight_sweep(1, a, p, &cells).unwrap();
        assert!(!good.divergent, "{good:?}");
    }
}
