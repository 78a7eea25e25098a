use matvar::exponent::ExponentFunction;
use matvar::field::{MatrixField, VectorField};
use matvar::grid::{dyadic_cubes, dyadic_levels, Cube, Grid};
use matvar::muckenhoupt::{make_power_weight, scalar_ap_constant};
use matvar::operators::{
    approximate_identity_study, average_on_cube, averaging_bound_check, bump, convolve, geometric_schedule,
    layer_cake, tiled_convolution_bound, Mollifier,
};
use matvar::varnorm::matrix_weighted_norm;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn scalar(g: &Grid, f: impl Fn(f64) -> f64) -> VectorField {
    VectorField::from_fn(g, 1, |x| vec![f(x[0])]).unwrap()
}

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let (lx, ly): (Vec<f64>, Vec<f64>) = (xs.iter().map(|v| v.ln()).collect(), ys.iter().map(|v| v.ln()).collect());
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

#[test]
fn averages_of_linear_function_are_midpoints() {
    let g = Grid::unit(1, 64).unwrap();
    let f = scalar(&g, |x| 3.0 * x - 1.0);
    for q in dyadic_cubes(&g, 2).unwrap().cubes() {
        let avg = average_on_cube(&f, q).unwrap();
        let mid = q.lower()[0] + 0.5 * q.side();
        for c in 0..64 {
            let want = if q.cells(&g).contains(&c) { 3.0 * mid - 1.0 } else { 0.0 };
            assert!((avg.at(c)[0] - want).abs() < 1e-13);
        }
    }
}

#[test]
fn mollified_indicator_matches_direct_sum() {
    let m = 64;
    let g = Grid::unit(1, m).unwrap();
    let t = 0.125;
    let h = 1.0 / m as f64;
    let f = scalar(&g, |x| if x < 0.5 { 1.0 } else { 0.0 });
    let got = convolve(&f, Mollifier::new(&g, t).unwrap().kernel()).unwrap();
    let raw: Vec<f64> = (-(m as i64)..=m as i64).map(|k| bump((k as f64 * h).abs() / t)).collect();
    let total: f64 = raw.iter().sum();
    let xs: Vec<f64> = g.centers().iter().map(|x| x[0]).collect();
    for i in 0..m {
        let mut want = 0.0;
        for j in 0..m {
            let k = i as i64 - j as i64;
            want += raw[(k + m as i64) as usize] / total * if xs[j] < 0.5 { 1.0 } else { 0.0 };
        }
        assert!((got.at(i)[0] - want).abs() < 1e-14, "cell {i}");
        if xs[i] >= t && xs[i] <= 0.5 - t {
            assert!((want - 1.0).abs() < 1e-14);
        }
        if xs[i] >= 0.5 + t {
            assert_eq!(want, 0.0);
        }
    }
}

#[test]
fn constants_survive_away_from_the_boundary() {
    let g = Grid::unit(2, 32).unwrap();
    let t = 0.125;
    let f = VectorField::from_fn(&g, 2, |_| vec![2.0, -0.5]).unwrap();
    let out = convolve(&f, Mollifier::new(&g, t).unwrap().kernel()).unwrap();
    for (c, x) in g.centers().iter().enumerate() {
        if (0..2).all(|a| x[a] >= t && x[a] <= 1.0 - t) {
            assert!((out.at(c)[0] - 2.0).abs() < 1e-13 && (out.at(c)[1] + 0.5).abs() < 1e-13);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn convolution_is_linear(a in prop::collection::vec(-1.0f64..1.0, 32), b in prop::collection::vec(-1.0f64..1.0, 32), s in -3.0f64..3.0, t in 0.04f64..0.4) {
        let g = Grid::unit(1, 32).unwrap();
        let fa = VectorField::new(&g, 1, a).unwrap();
        let fb = VectorField::new(&g, 1, b).unwrap();
        let k = Mollifier::new(&g, t).unwrap();
        let lhs = convolve(&fa.scale(s).add(&fb).unwrap(), k.kernel()).unwrap();
        let rhs = convolve(&fa, k.kernel()).unwrap().scale(s).add(&convolve(&fb, k.kernel()).unwrap()).unwrap();
        prop_assert!(lhs.sub(&rhs).unwrap().max_abs() <= 1e-13);
    }
}

#[test]
fn averaging_bound_for_power_weight() {
    let g = Grid::offset_unit(1, 64).unwrap();
    let w = make_power_weight(&g, 0.5).unwrap();
    let p = ExponentFunction::constant(&g, 2.0).unwrap();
    let fam = dyadic_levels(&g, 0, 4).unwrap();
    let c = scalar_ap_constant(&w, &p, &fam).unwrap().supremum;
    let wm = MatrixField::from_scalar(&w);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..50 {
        let f = VectorField::new(&g, 1, (0..64).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap();
        for q in fam.cubes() {
            assert!(averaging_bound_check(&wm, &p, &f, q, c).unwrap().holds(1e-9));
        }
    }
}

#[test]
fn tiled_bound_is_finite() {
    let g = Grid::offset_unit(1, 64).unwrap();
    let w = MatrixField::from_scalar(&make_power_weight(&g, 0.5).unwrap());
    let p = ExponentFunction::from_fn(&g, |x| 1.6 + x[0]).unwrap();
    let f = scalar(&g, |x| (7.0 * x).sin());
    let q = Cube::centered(1, 0.125).unwrap();
    let b = tiled_convolution_bound(&w, &p, &f, &q).unwrap();
    eprintln!("tiled ratio {}", b.lhs / b.norm_f);
    assert!(b.lhs.is_finite() && b.lhs <= 4.0 * b.norm_f);
    assert_eq!(b.tiles.len(), b.covers.len());
}

#[test]
fn layer_cake_sits_under_the_mollifier() {
    let g = Grid::unit(1, 128).unwrap();
    let phi = Mollifier::new(&g, 0.25).unwrap();
    let cake = layer_cake(&g, &phi, 64).unwrap();
    let top = phi.kernel().weights().iter().copied().fold(0.0, f64::max);
    assert!(cake.sup_gap() < 0.02 * top);
    for (j, &v) in phi.kernel().weights().iter().enumerate() {
        assert!(cake.value_at(j) <= v * (1.0 + 1e-12));
    }
    let w = MatrixField::identity(&g, 1);
    let p = ExponentFunction::from_fn(&g, |x| 1.5 + x[0]).unwrap();
    let f = scalar(&g, |x| (9.0 * x).cos() + 0.3);
    let whole = matrix_weighted_norm(&w, &convolve(&f, &cake.as_kernel().unwrap()).unwrap(), &p).unwrap().value;
    let pieces: f64 = (0..cake.levels)
        .map(|k| {
            let avg = convolve(&f, &cake.ball_kernel(k).unwrap()).unwrap();
            cake.weights[k] * matrix_weighted_norm(&w, &avg, &p).unwrap().value
        })
        .sum();
    assert!(whole <= pieces * (1.0 + 1e-12));
}

#[test]
fn smooth_function_error_is_quadratic_in_t() {
    let g = Grid::unit(1, 512).unwrap();
    let w = MatrixField::identity(&g, 1);
    let p = ExponentFunction::constant(&g, 2.0).unwrap();
    let f = scalar(&g, |x| (std::f64::consts::PI * x).sin().powi(4));
    let ts = geometric_schedule(0.25, 1.0 / 32.0);
    let table = approximate_identity_study(&w, &p, &f, &ts).unwrap();
    assert!(table.strictly_decreasing);
    let errs: Vec<f64> = table.rows.iter().map(|r| r.error).collect();
    let s = slope(&ts[1..], &errs[1..]);
    assert!((1.8..=2.2).contains(&s), "slope {s}");
}

#[test]
fn jump_error_decays_like_root_t() {
    let g = Grid::unit(1, 512).unwrap();
    let w = MatrixField::identity(&g, 1);
    let p = ExponentFunction::constant(&g, 2.0).unwrap();
    let f = scalar(&g, |x| if (0.25..0.75).contains(&x) { 1.0 } else { 0.0 });
    let ts = geometric_schedule(0.125, 1.0 / 64.0);
    let table = approximate_identity_study(&w, &p, &f, &ts).unwrap();
    let errs: Vec<f64> = table.rows.iter().map(|r| r.error).collect();
    let s = slope(&ts, &errs);
    assert!((0.4..=0.6).contains(&s), "slope {s}");
}
