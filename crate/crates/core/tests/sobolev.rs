use matvar::error::Error;
use matvar::exponent::ExponentFunction;
use matvar::field::{MatrixField, ScalarField, VectorField};
use matvar::grid::Grid;
use matvar::muckenhoupt::make_rotating_weight;
use matvar::sobolev::{
    build_partition, jacobian, smooth_approximate, smooth_step, smooth_step_derivative, sobolev_norm_matrix,
    sobolev_norm_scalar, sobolev_norm_sum, truncate_to_compact, Domain, SmoothingOptions,
};
use matvar::varnorm::luxemburg_norm;
use proptest::prelude::*;

fn sup_eta_prime() -> f64 {
    (1..100_000).map(|i| smooth_step_derivative(1.0 + i as f64 * 1e-5).abs()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn gradient_conventions_sandwich(vals in prop::collection::vec(-1.0f64..1.0, 2 * 64), a in -0.4f64..0.4, b in -0.4f64..0.4, rate in 0.0f64..4.0) {
        let g = Grid::offset_unit(2, 8).unwrap();
        let f = VectorField::new(&g, 2, vals).unwrap();
        let w = make_rotating_weight(&g, |x| rate * x[1], a, b).unwrap();
        let p = ExponentFunction::from_fn(&g, |x| 1.5 + x[0] * x[1]).unwrap();
        let mat = sobolev_norm_matrix(&f, &w, &p).unwrap();
        let sum = sobolev_norm_sum(&f, &w, &p).unwrap();
        prop_assert!(mat <= sum * (1.0 + 1e-9));
        prop_assert!(sum <= 2.0 * mat * (1.0 + 1e-9));
    }
}

#[test]
fn affine_scalar_norm_closed_form() {
    let g = Grid::unit(2, 16).unwrap();
    let p = ExponentFunction::constant(&g, 2.0).unwrap();
    let f = ScalarField::from_fn(&g, |x| 3.0 * x[0] - 4.0 * x[1] + 1.0);
    let w = MatrixField::identity(&g, 2);
    let zero = luxemburg_norm(&f, &p).unwrap().value;
    // |∇f| = 5 everywhere on the unit square
    let want = zero + 5.0;
    assert!((sobolev_norm_scalar(&f, &w, &p).unwrap() - want).abs() < 1e-10);
}

#[test]
fn absolute_value_has_unit_slopes_off_the_kink() {
    let g = Grid::new(&[-1.0], &[1.0], 64).unwrap();
    let f = VectorField::from_fn(&g, 1, |x| vec![x[0].abs()]).unwrap();
    let jac = jacobian(&f).unwrap();
    for (c, x) in g.centers().iter().enumerate() {
        if x[0].abs() > 2.0 / 64.0 {
            assert!((jac.at(c)[0] - x[0].signum()).abs() < 1e-12, "cell {c}");
        }
    }
}

#[test]
fn partition_of_unity_on_box_and_punctured_box() {
    let g = Grid::unit(2, 64).unwrap();
    let holed = Domain::BoxMinusBall {
        center: [0.5, 0.5, 0.0],
        radius: 0.1,
    };
    for domain in [Domain::Box, holed] {
        let pou = build_partition(&g, &domain, 3).unwrap();
        assert!(pou.sum_defect() < 1e-12);
        assert!(pou.consecutive_overlap_only());
        for (c, x) in g.centers().iter().enumerate() {
            if !domain.contains(&g, x) {
                assert!(pou.psi.iter().all(|s| s.values()[c] == 0.0));
            }
        }
        for k in 1..pou.shells {
            for (c, on) in pou.support(k).iter().enumerate() {
                if *on {
                    assert!(pou.distance[c] > pou.core_floor(k) - pou.radius, "shell {k} cell {c}");
                }
            }
        }
        let boundary_cell = 0;
        assert!(pou.psi[pou.shells - 1].values()[boundary_cell] > 0.0);
    }
}

#[test]
fn generous_budget_takes_the_first_scale() {
    let g = Grid::unit(1, 256).unwrap();
    let f = VectorField::from_fn(&g, 1, |x| vec![x[0] * x[0] - x[0]]).unwrap();
    let w = MatrixField::identity(&g, 1);
    let p = ExponentFunction::from_fn(&g, |x| 2.0 + x[0]).unwrap();
    let opts = SmoothingOptions::default();
    let (_, rep) = smooth_approximate(&f, &w, &p, 100.0, &opts).unwrap();
    assert!(rep.success() && rep.budgets_met());
    let pou = build_partition(&g, &opts.domain, opts.shells).unwrap();
    let h = 1.0 / 256.0;
    for s in &rep.shells[..rep.shells.len() - 1] {
        let first = pou.core_floor(s.k) - pou.radius - h;
        assert!((s.s_k - first).abs() < 1e-15 && (s.t_k - first).abs() < 1e-15, "{s:?}");
    }
}

#[test]
fn smoothing_meets_a_moderate_budget() {
    let g = Grid::unit(1, 256).unwrap();
    let f = VectorField::from_fn(&g, 1, |x| vec![(3.0 * x[0]).sin()]).unwrap();
    let w = MatrixField::identity(&g, 1);
    let p = ExponentFunction::from_fn(&g, |x| 1.5 + x[0]).unwrap();
    let (smooth, rep) = smooth_approximate(&f, &w, &p, 0.5, &SmoothingOptions::default()).unwrap();
    assert!(rep.success() && rep.budgets_met(), "{rep:?}");
    assert!(rep.total_matrix <= rep.total_sum * (1.0 + 1e-12));
    assert!(smooth.sub(&f).unwrap().max_abs() < 0.5);
}

#[test]
fn tiny_budget_hits_the_resolution_limit() {
    let g = Grid::unit(1, 64).unwrap();
    let f = VectorField::from_fn(&g, 1, |x| vec![(x[0] - 0.5).abs()]).unwrap();
    let w = MatrixField::identity(&g, 1);
    let p = ExponentFunction::constant(&g, 2.0).unwrap();
    match smooth_approximate(&f, &w, &p, 1e-9, &SmoothingOptions::default()) {
        Err(Error::ResolutionLimit { shell, .. }) => assert!((1..3).contains(&shell)),
        other => panic!("expected a resolution limit, got {other:?}"),
    }
}

#[test]
fn smooth_step_shape() {
    for i in 0..=100 {
        let s = i as f64 / 100.0;
        assert_eq!(smooth_step(s), 1.0);
        assert_eq!(smooth_step(2.0 + s), 0.0);
    }
    let mut last = 1.0;
    for i in 1..1000 {
        let s = 1.0 + i as f64 / 1000.0;
        let v = smooth_step(s);
        assert!(v <= last);
        last = v;
        let fd = (smooth_step(s + 1e-6) - smooth_step(s - 1e-6)) / 2e-6;
        assert!((fd - smooth_step_derivative(s)).abs() < 1e-5, "s = {s}");
    }
}

#[test]
fn compact_support_truncates_exactly() {
    let g = Grid::new(&[-4.0, -4.0], &[4.0, 4.0], 64).unwrap();
    let f = VectorField::from_fn(&g, 1, |x| {
        let r2 = x[0] * x[0] + x[1] * x[1];
        vec![if r2 < 1.0 { (1.0 - r2).powi(2) } else { 0.0 }]
    })
    .unwrap();
    let w = MatrixField::identity(&g, 1);
    let p = ExponentFunction::constant(&g, 2.0).unwrap();
    let rep = truncate_to_compact(&f, &w, &p, 1e-12, &[1.5, 2.0]).unwrap();
    assert_eq!(rep.k_epsilon, 1.5);
    assert!(rep.rows.iter().all(|r| r.error == 0.0));
    assert_eq!(rep.truncated, f);
}

#[test]
fn gaussian_truncation_is_monotone_with_inverse_k_gradients() {
    let g = Grid::new(&[-8.0], &[8.0], 256).unwrap();
    let f = VectorField::from_fn(&g, 1, |x| vec![(-x[0] * x[0] / 2.0).exp()]).unwrap();
    let w = MatrixField::identity(&g, 1);
    let p = ExponentFunction::from_fn(&g, |x| 2.0 + 0.5 * (x[0] / 2.0).sin()).unwrap();
    let ks = [0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0];
    let rep = truncate_to_compact(&f, &w, &p, 1e-3, &ks).unwrap();
    assert!(rep.monotone);
    let c = sup_eta_prime();
    for r in &rep.rows {
        assert!(r.max_gradient <= c / r.k * (1.0 + 1e-9), "{r:?}");
    }
    assert!(rep.gradient_envelope <= c * (1.0 + 1e-9));
}
