//! The acceptance criteria as runnable checks.

use matvar::exponent::ExponentFunction;
use matvar::field::{MatrixField, ScalarField, VectorField};
use matvar::grid::{dyadic_cubes, dyadic_levels, Grid};
use matvar::matweight::{held_out_certificate, inverse, reducing_operator};
use matvar::muckenhoupt::{
    make_diagonal_weight, make_power_weight, make_rotating_weight, matrix_ap_constant, reducing_ap_constant,
    scalar_ap_constant, weight_sum_constant, ApReport,
};
use matvar::operators::{approximate_identity_study, averaging_bound_check, geometric_schedule};
use matvar::sobolev::{smooth_approximate, smooth_step_derivative, truncate_to_compact, SmoothingOptions};
use matvar::varnorm::{holder_pairing_with, luxemburg_norm, luxemburg_norm_with, property_g_ratio, NormOptions};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::random_field;
use crate::error::{num, CliError};
use crate::report::fmt_num;
use crate::run::SLACK;

pub const CRITERIA: [&str; 13] = [
    "luxemburg-oracle",
    "holder-constant",
    "identity-calibration",
    "scalar-reduction",
    "averaging-bound",
    "reducing-sandwich",
    "invariances",
    "weight-sum",
    "approximate-identity",
    "property-g",
    "h-equals-w",
    "truncation",
    "determinism",
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuiteOptions {
    pub holder_constant: f64,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self { holder_constant: 4.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Criterion {
    pub id: usize,
    pub name: &'static str,
    pub measured: f64,
    pub bound: f64,
    pub pass: bool,
    pub detail: String,
    /// Recorded values for the manifest.
    pub notes: Vec<(String, String)>,
}

impl Criterion {
    fn new(id: usize, measured: f64, bound: f64, pass: bool, detail: String) -> Self {
        Self {
            id,
            name: CRITERIA[id - 1],
            measured,
            bound,
            pass,
            detail,
            notes: Vec::new(),
        }
    }

    pub fn verdict(&self) -> &'static str {
        if self.pass {
            "PASS"
        } else {
            "FAIL"
        }
    }

    pub fn row(&self) -> Vec<String> {
        vec![
            self.id.to_string(),
            self.name.to_string(),
            fmt_num(self.measured),
            fmt_num(self.bound),
            self.verdict().to_string(),
            self.detail.clone(),
        ]
    }

    pub fn line(&self) -> String {
        format!(
            "[{}] {:>2} {:<22} measured={:<12.6e} bound={:<12.6e} {}",
            self.verdict(),
            self.id,
            self.name,
            self.measured,
            self.bound,
            self.detail
        )
    }
}

pub fn run_suite(opts: &SuiteOptions) -> Result<Vec<Criterion>, CliError> {
    (1..=CRITERIA.len()).map(|id| run_criterion(id, opts)).collect()
}

pub fn run_criterion(id: usize, opts: &SuiteOptions) -> Result<Criterion, CliError> {
    match id {
        1 => luxemburg_oracle(),
        2 => holder_constant(opts.holder_constant),
        3 => identity_calibration(),
        4 => scalar_reduction(),
        5 => averaging_bound(),
        6 => reducing_sandwich(),
        7 => invariances(),
        8 => weight_sum(),
        9 => approximate_identity(),
        10 => property_g(),
        11 => h_equals_w(),
        12 => truncation(),
        13 => determinism(opts),
        _ => Err(CliError::Usage(format!("no criterion {id}; valid ids are 1..={}", CRITERIA.len()))),
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn grid(g: matvar::Result<Grid>) -> Result<Grid, CliError> {
    g.map_err(num("grid", "make_uniform_grid"))
}

fn exponent(p: matvar::Result<ExponentFunction>) -> Result<ExponentFunction, CliError> {
    p.map_err(num("exponent", "from_fn"))
}

fn max_gap(a: &ApReport, b: &ApReport) -> f64 {
    a.values.iter().zip(&b.values).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Smallest multiple of 1e−6 with modular ≤ 1: coarse steps of 1e−3, then fine steps.
fn scan_norm(f: &[f64], p: &[f64], vol: f64) -> f64 {
    let rho = |lam: f64| f.iter().zip(p).map(|(a, q)| (a.abs() / lam).powf(*q)).sum::<f64>() * vol;
    let mut i = 1u64;
    while rho(i as f64 * 1e-3) > 1.0 {
        i += 1;
    }
    let mut j = (i - 1) * 1000 + 1;
    while rho(j as f64 * 1e-6) > 1.0 {
        j += 1;
    }
    j as f64 * 1e-6
}

fn luxemburg_oracle() -> Result<Criterion, CliError> {
    let g = grid(Grid::unit(1, 64))?;
    let mut scan_gap = 0.0f64;
    let mut closed_gap = 0.0f64;
    for seed in 0..20u64 {
        let mut r = rng(100 + seed);
        let f = ScalarField::new(&g, (0..64).map(|_| r.gen_range(-2.0..2.0)).collect())
            .map_err(num("grid", "ScalarField::new"))?;
        let p = if seed >= 15 {
            exponent(ExponentFunction::constant(&g, r.gen_range(1.1..4.0)))?
        } else {
            let (b, a, fr, ph) = (
                r.gen_range(1.1..3.0),
                r.gen_range(0.0..1.0),
                r.gen_range(1.0..8.0),
                r.gen_range(0.0..std::f64::consts::TAU),
            );
            exponent(ExponentFunction::from_fn(&g, |x| b + a * (1.0 + (fr * x[0] + ph).sin())))?
        };
        let norm = luxemburg_norm(&f, &p).map_err(num("varnorm", "luxemburg_norm"))?.value;
        scan_gap = scan_gap.max((norm - scan_norm(f.values(), p.values(), g.cell_volume())).abs());
        if let Some(q) = p.as_constant() {
            let closed = (f.values().iter().map(|a| a.abs().powf(q)).sum::<f64>() * g.cell_volume()).powf(1.0 / q);
            let bisected = luxemburg_norm_with(&f, &p, &NormOptions::default().bisection_only())
                .map_err(num("varnorm", "luxemburg_norm"))?
                .value;
            closed_gap = closed_gap.max((bisected - closed).abs());
        }
    }
    Ok(Criterion::new(
        1,
        scan_gap,
        1e-5,
        scan_gap <= 1e-5 && closed_gap <= 1e-9,
        format!("20 seeds; constant-p bisection vs closed form {closed_gap:.2e} (bound 1e-9)"),
    ))
}

fn holder_constant(constant: f64) -> Result<Criterion, CliError> {
    let g = grid(Grid::unit(1, 64))?;
    let mut violations = 0usize;
    let mut classical = 0usize;
    let mut worst = 0.0f64;
    for seed in 0..100u64 {
        let mut r = rng(200 + seed);
        let p = if seed >= 80 {
            exponent(ExponentFunction::constant(&g, r.gen_range(1.1..5.0)))?
        } else {
            let (b, a, fr) = (r.gen_range(1.05..2.5), r.gen_range(0.0..3.0), r.gen_range(1.0..10.0));
            exponent(ExponentFunction::from_fn(&g, |x| b + a * (fr * x[0]).sin().abs()))?
        };
        let f = ScalarField::new(&g, (0..64).map(|_| r.gen_range(-1.0..1.0)).collect())
            .map_err(num("grid", "ScalarField::new"))?;
        // every other pair is near-extremal: g ≈ |f|^{p−1}
        let g_vals: Vec<f64> = if seed % 2 == 0 {
            (0..64).map(|_| r.gen_range(-1.0..1.0)).collect()
        } else {
            f.values()
                .iter()
                .zip(p.values())
                .map(|(a, q)| a.abs().powf(q - 1.0) * (1.0 + 0.05 * r.gen_range(-1.0..1.0)))
                .collect()
        };
        let gf = ScalarField::new(&g, g_vals).map_err(num("grid", "ScalarField::new"))?;
        let h = holder_pairing_with(&f, &gf, &p, constant).map_err(num("varnorm", "holder_pairing"))?;
        worst = worst.max(h.lhs / h.product);
        violations += usize::from(h.lhs > h.rhs * (1.0 + 1e-12));
        if p.as_constant().is_some() {
            classical += usize::from(h.lhs > h.product * (1.0 + 1e-12));
        }
    }
    Ok(Criterion::new(
        2,
        worst,
        constant,
        violations == 0 && classical == 0,
        format!("max ∫|fg|/(‖f‖‖g‖) over 100 pairs; {violations} violations, {classical} classical (constant 1) violations"),
    ))
}

fn identity_calibration() -> Result<Criterion, CliError> {
    let mut worst = 0.0f64;
    let mut cubes = 0;
    for (n, m) in [(1, 64), (2, 32)] {
        let g = grid(Grid::unit(n, m))?;
        let fam = dyadic_levels(&g, 0, 3).map_err(num("grid", "dyadic_levels"))?;
        let w = MatrixField::identity(&g, 2);
        for q in [1.5, 2.0, 3.0] {
            let p = exponent(ExponentFunction::constant(&g, q))?;
            let ap = matrix_ap_constant(&w, &p, &fam).map_err(num("muckenhoupt", "matrix_ap_constant"))?;
            worst = ap.values.iter().map(|v| (v - 1.0).abs()).fold(worst, f64::max);
            cubes += ap.values.len();
        }
    }
    Ok(Criterion::new(
        3,
        worst,
        1e-8,
        worst <= 1e-8,
        format!("max |[I]_Q − 1| over {cubes} cube evaluations"),
    ))
}

/// `|x|^a·exp(Σ c_j sin(jπx + φ_j))` with random coefficients.
fn random_scalar_weight(g: &Grid, r: &mut ChaCha8Rng) -> Result<ScalarField, CliError> {
    let a = r.gen_range(-0.3..0.3);
    let coef: Vec<(f64, f64)> = (0..3).map(|_| (r.gen_range(-0.5..0.5), r.gen_range(0.0..std::f64::consts::TAU))).collect();
    let base = make_power_weight(g, a).map_err(num("muckenhoupt", "make_power_weight"))?;
    let smooth = ScalarField::from_fn(g, |x| {
        coef.iter()
            .enumerate()
            .map(|(j, (c, ph))| c * ((j + 1) as f64 * std::f64::consts::PI * x[0] + ph).sin())
            .sum::<f64>()
            .exp()
    });
    base.zip_with(&smooth, |u, v| u * v).map_err(num("grid", "zip_with"))
}

fn random_exponent(g: &Grid, r: &mut ChaCha8Rng) -> Result<ExponentFunction, CliError> {
    let (b, a, fr) = (r.gen_range(1.2..2.5), r.gen_range(0.0..1.5), r.gen_range(1.0..6.0));
    exponent(ExponentFunction::from_fn(g, |x| b + a * (0.5 + 0.5 * (fr * x[0]).sin())))
}

fn scalar_reduction() -> Result<Criterion, CliError> {
    let g = grid(Grid::offset_unit(1, 64))?;
    let fam = dyadic_levels(&g, 0, 4).map_err(num("grid", "dyadic_levels"))?;
    let mut direct = 0.0f64;
    let mut reduced = 0.0f64;
    for seed in 0..20u64 {
        let mut r = rng(400 + seed);
        let w = random_scalar_weight(&g, &mut r)?;
        let p = random_exponent(&g, &mut r)?;
        let s = scalar_ap_constant(&w, &p, &fam).map_err(num("muckenhoupt", "scalar_ap_constant"))?;
        let wm = MatrixField::from_scalar(&w);
        let m = matrix_ap_constant(&wm, &p, &fam).map_err(num("muckenhoupt", "matrix_ap_constant"))?;
        let red = reducing_ap_constant(&wm, &p, &fam).map_err(num("muckenhoupt", "reducing_ap_constant"))?;
        direct = direct.max(max_gap(&s, &m));
        reduced = reduced.max(max_gap(&red, &s)).max(max_gap(&red, &m));
    }
    Ok(Criterion::new(
        4,
        direct,
        1e-10,
        direct <= 1e-10 && reduced <= 1e-9,
        format!("matrix vs scalar per cube; reducing vs both {reduced:.2e} (bound 1e-9)"),
    ))
}

fn averaging_bound() -> Result<Criterion, CliError> {
    let mut worst = 0.0f64;
    let mut checks = 0usize;
    let mut violations = 0usize;
    for d in [1usize, 2] {
        let g = grid(if d == 1 { Grid::offset_unit(1, 64) } else { Grid::offset_unit(2, 16) })?;
        let fam = dyadic_levels(&g, 0, 3).map_err(num("grid", "dyadic_levels"))?;
        let p = exponent(ExponentFunction::from_fn(&g, |x| 2.0 + 0.5 * (3.0 * x[0]).sin()))?;
        let weights = if d == 1 {
            vec![
                MatrixField::from_scalar(&make_power_weight(&g, 0.5).map_err(num("muckenhoupt", "make_power_weight"))?),
                MatrixField::from_scalar(&make_power_weight(&g, -0.25).map_err(num("muckenhoupt", "make_power_weight"))?),
                make_diagonal_weight(&g, &[1.0 / 3.0]).map_err(num("muckenhoupt", "make_diagonal_weight"))?,
            ]
        } else {
            vec![
                make_diagonal_weight(&g, &[0.5, 0.5]).map_err(num("muckenhoupt", "make_diagonal_weight"))?,
                make_diagonal_weight(&g, &[0.5, -0.25]).map_err(num("muckenhoupt", "make_diagonal_weight"))?,
                make_rotating_weight(&g, |x| 3.0 * x[0], 1.0 / 3.0, -0.25)
                    .map_err(num("muckenhoupt", "make_rotating_weight"))?,
            ]
        };
        for (gi, w) in weights.iter().enumerate() {
            let wc = matrix_ap_constant(w, &p, &fam)
                .map_err(num("muckenhoupt", "matrix_ap_constant"))?
                .supremum;
            for trial in 0..50u64 {
                let seed = 500 + 1000 * d as u64 + 100 * gi as u64 + trial;
                let mut f = random_field(&g, d, seed);
                // a spike on one random cell
                let spike = rng(seed).gen_range(0..g.cell_count());
                for v in f.at_mut(spike) {
                    *v *= 10.0;
                }
                for q in fam.cubes() {
                    let b = averaging_bound_check(w, &p, &f, q, wc).map_err(num("operators", "averaging_bound_check"))?;
                    checks += 1;
                    worst = worst.max(b.lhs / b.rhs);
                    violations += usize::from(!b.holds(SLACK));
                }
            }
        }
    }
    Ok(Criterion::new(
        5,
        worst,
        1.0,
        violations == 0,
        format!("max ‖A_Q f‖/(4[W]‖f‖) over {checks} checks, {violations} violations"),
    ))
}

fn reducing_sandwich() -> Result<Criterion, CliError> {
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for seed in 0..10u64 {
        let mut r = rng(600 + seed);
        let n = 1 + (seed % 2) as usize;
        let g = grid(Grid::offset_unit(n, if n == 1 { 64 } else { 16 }))?;
        let (a, b, om, amp) = (
            r.gen_range(-0.45..0.45),
            r.gen_range(-0.45..0.45),
            r.gen_range(0.0..6.0),
            r.gen_range(0.0..1.5),
        );
        let w = make_rotating_weight(&g, |x| om * x[0], a, b).map_err(num("muckenhoupt", "make_rotating_weight"))?;
        let p = exponent(ExponentFunction::from_fn(&g, |x| 1.5 + amp * (1.0 + (5.0 * x[0]).sin())))?;
        let fam = dyadic_cubes(&g, r.gen_range(0..3u32)).map_err(num("grid", "dyadic_cubes"))?;
        let q = &fam.cubes()[r.gen_range(0..fam.len())];
        let op = reducing_operator(&w, &p, q).map_err(num("matweight", "reducing_operator"))?;
        let held = held_out_certificate(&w, &p, &op, 500, 6000 + seed).map_err(num("matweight", "held_out_certificate"))?;
        lo = lo.min(held.min);
        hi = hi.max(held.max);
    }
    let excess = (1.0 - lo).max(hi - 2f64.sqrt());
    Ok(Criterion::new(
        6,
        excess,
        1e-6,
        excess <= 1e-6,
        format!("held-out |Mv|/⟨r⟩(v) in [{lo:.6}, {hi:.6}] against [1, √2]; measured is the worst excess"),
    ))
}

fn invariances() -> Result<Criterion, CliError> {
    let g2 = grid(Grid::offset_unit(2, 16))?;
    let fam2 = dyadic_levels(&g2, 0, 3).map_err(num("grid", "dyadic_levels"))?;
    let w = make_rotating_weight(&g2, |x| 3.0 * x[0], 0.3, -0.2).map_err(num("muckenhoupt", "make_rotating_weight"))?;
    let p = exponent(ExponentFunction::from_fn(&g2, |x| 1.8 + 0.6 * x[0]))?;
    let ap = |w: &MatrixField, p: &ExponentFunction, fam| {
        matrix_ap_constant(w, p, fam).map_err(num("muckenhoupt", "matrix_ap_constant"))
    };
    let base = ap(&w, &p, &fam2)?;
    let mut invariance = 0.0f64;
    for c in [0.1, 2.5] {
        invariance = invariance.max(max_gap(&base, &ap(&w.scale(c), &p, &fam2)?));
    }
    let (s, co) = 0.7f64.sin_cos();
    let u = DMatrix::from_row_slice(2, 2, &[co, -s, s, co]);
    let rotated = w.conjugate_by(&u).map_err(num("grid", "conjugate_by"))?;
    invariance = invariance.max(max_gap(&base, &ap(&rotated, &p, &fam2)?));

    let winv = inverse(&w).map_err(num("matweight", "inverse"))?;
    // exact duality: p ≡ 2 at d = 2, and d = 1 with a variable exponent
    let p2 = exponent(ExponentFunction::constant(&g2, 2.0))?;
    let mut duality = max_gap(&ap(&w, &p2, &fam2)?, &ap(&winv, &p2.conjugate(), &fam2)?);
    let g1 = grid(Grid::offset_unit(1, 32))?;
    let fam1 = dyadic_levels(&g1, 0, 4).map_err(num("grid", "dyadic_levels"))?;
    let w1 = MatrixField::from_scalar(&make_power_weight(&g1, 0.3).map_err(num("muckenhoupt", "make_power_weight"))?);
    let p1 = exponent(ExponentFunction::from_fn(&g1, |x| 1.5 + x[0]))?;
    let w1inv = inverse(&w1).map_err(num("matweight", "inverse"))?;
    duality = duality.max(max_gap(&ap(&w1, &p1, &fam1)?, &ap(&w1inv, &p1.conjugate(), &fam1)?));
    // d = 2 with variable p: the two mixed norms are taken in opposite orders
    let general = max_gap(&base, &ap(&winv, &p.conjugate(), &fam2)?);
    let mut c = Criterion::new(
        7,
        invariance,
        1e-9,
        invariance <= 1e-9 && duality <= 1e-8,
        format!(
            "scale and rotation gap; duality gap {duality:.2e} (bound 1e-8); d=2 variable-p duality gap {general:.3e} (not asserted)"
        ),
    );
    c.notes.push(("duality_gap_d2_variable_p".into(), fmt_num(general)));
    Ok(c)
}

fn weight_sum() -> Result<Criterion, CliError> {
    let g = grid(Grid::offset_unit(1, 64))?;
    let fam = dyadic_levels(&g, 0, 4).map_err(num("grid", "dyadic_levels"))?;
    let mut violations = 0usize;
    let mut worst = 0.0f64;
    for seed in 0..20u64 {
        let mut r = rng(800 + seed);
        let w1 = random_scalar_weight(&g, &mut r)?;
        let w2 = random_scalar_weight(&g, &mut r)?;
        let p = random_exponent(&g, &mut r)?;
        let rep = weight_sum_constant(&[w1, w2], &p, &fam).map_err(num("muckenhoupt", "weight_sum_constant"))?;
        violations += rep.violations.len();
        for i in 0..fam.len() {
            let bound: f64 = rep.parts.iter().map(|a| a.values[i]).sum();
            worst = worst.max(rep.sum.values[i] / bound);
        }
    }
    Ok(Criterion::new(
        8,
        worst,
        1.0,
        violations == 0,
        format!("max [w₁+w₂]_Q/([w₁]_Q+[w₂]_Q) over 20 pairs, {violations} violations"),
    ))
}

/// Final error, strict decrease and `C_emp` of the mollifier study at `m` cells.
fn mollifier_study(m: usize) -> Result<(f64, bool, f64), CliError> {
    let g = grid(Grid::offset_unit(1, m))?;
    let w = MatrixField::from_scalar(&make_power_weight(&g, 0.25).map_err(num("muckenhoupt", "make_power_weight"))?);
    let p = exponent(ExponentFunction::from_fn(&g, |x| 2.0 + x[0] / 2.0))?;
    let f = VectorField::from_fn(&g, 1, |x| {
        let s = (std::f64::consts::PI * x[0]).sin();
        vec![s * s * if x[0] > 0.5 { 1.1 } else { 1.0 }]
    })
    .map_err(num("grid", "VectorField::from_fn"))?;
    let schedule = geometric_schedule(0.25, 2.0 * g.h_max());
    let study =
        approximate_identity_study(&w, &p, &f, &schedule).map_err(num("operators", "approximate_identity_study"))?;
    let fam = dyadic_levels(&g, 0, 4).map_err(num("grid", "dyadic_levels"))?;
    let wc = matrix_ap_constant(&w, &p, &fam)
        .map_err(num("muckenhoupt", "matrix_ap_constant"))?
        .supremum;
    Ok((study.final_error(), study.strictly_decreasing, study.envelope(wc)))
}

fn approximate_identity() -> Result<Criterion, CliError> {
    let (_, dec64, c64) = mollifier_study(64)?;
    let (err, dec128, c128) = mollifier_study(128)?;
    let drift = (c64 - c128).abs() / c128;
    let mut c = Criterion::new(
        9,
        err,
        1e-2,
        dec128 && err < 1e-2 && drift <= 0.1,
        format!(
            "final error at m=128; strictly decreasing {dec128} (m=64: {dec64}); C_emp {c64:.6} (m=64) vs {c128:.6} (m=128), drift {:.2}%",
            100.0 * drift
        ),
    );
    c.notes.push(("c_emp_m64".into(), fmt_num(c64)));
    c.notes.push(("c_emp_m128".into(), fmt_num(c128)));
    Ok(c)
}

fn property_g() -> Result<Criterion, CliError> {
    let g = grid(Grid::unit(1, 64))?;
    let mut worst = 0.0f64;
    for (i, q) in [1.5, 2.0, 3.0].into_iter().enumerate() {
        let p = exponent(ExponentFunction::constant(&g, q))?;
        for level in 0..=6u32 {
            let fam = dyadic_cubes(&g, level).map_err(num("grid", "dyadic_cubes"))?;
            for s in 0..3u64 {
                let seed = 1000 + 100 * i as u64 + 10 * level as u64 + s;
                let f = random_field(&g, 1, seed).component(0);
                let gg = random_field(&g, 1, seed + 50_000).component(0);
                let ratio = property_g_ratio(&f, &gg, &p, &fam).map_err(num("varnorm", "property_g_ratio"))?;
                worst = worst.max(ratio);
            }
        }
    }
    let p = exponent(ExponentFunction::from_fn(&g, |x| 2.0 + x[0]))?;
    let variable = || -> Result<f64, CliError> {
        let f = random_field(&g, 1, 1999).component(0);
        let gg = random_field(&g, 1, 2999).component(0);
        let mut best = 0.0f64;
        for level in 0..=4u32 {
            let fam = dyadic_cubes(&g, level).map_err(num("grid", "dyadic_cubes"))?;
            best = best.max(property_g_ratio(&f, &gg, &p, &fam).map_err(num("varnorm", "property_g_ratio"))?);
        }
        Ok(best)
    };
    let (first, second) = (variable()?, variable()?);
    let reproducible = first.to_bits() == second.to_bits() && first.is_finite();
    let mut c = Criterion::new(
        10,
        worst,
        1.0 + 1e-9,
        worst <= 1.0 + 1e-9 && reproducible,
        format!("constant p over levels 0..6; p=2+x max over levels 0..4 = {first:.12} (bit-identical rerun: {reproducible})"),
    );
    c.notes.push(("variable_p_max_ratio".into(), fmt_num(first)));
    Ok(c)
}

/// Cells per axis for the H=W run; the kink shell needs this resolution to meet its gradient budget.
pub const HW_CELLS: usize = 1024;

fn h_equals_w() -> Result<Criterion, CliError> {
    let g = grid(Grid::unit(1, HW_CELLS))?;
    let f = VectorField::from_fn(&g, 1, |x| vec![(x[0] - 0.5).abs()]).map_err(num("grid", "VectorField::from_fn"))?;
    let w = MatrixField::from_scalar(&make_power_weight(&g, 0.25).map_err(num("muckenhoupt", "make_power_weight"))?);
    let p = exponent(ExponentFunction::from_fn(&g, |x| 2.0 + x[0] / 2.0))?;
    let eps = 0.05;
    match smooth_approximate(&f, &w, &p, eps, &SmoothingOptions::default()) {
        Ok((_, rep)) => {
            let shells = rep
                .shells
                .iter()
                .map(|s| {
                    format!(
                        "k={} t={:.3e} zero {:.2e}/{:.2e} grad {:.2e}/{:.2e}",
                        s.k,
                        s.t_k,
                        s.zero_order_error,
                        s.zero_order_budget,
                        s.gradient_errors.iter().copied().fold(0.0, f64::max),
                        s.gradient_budget
                    )
                })
                .collect::<Vec<_>>()
                .join("; ");
            let mut c = Criterion::new(
                11,
                rep.total_matrix,
                eps,
                rep.success() && rep.budgets_met(),
                format!("m={HW_CELLS}; {shells}"),
            );
            c.notes.push(("total_sum".into(), fmt_num(rep.total_sum)));
            Ok(c)
        }
        Err(e @ matvar::Error::ResolutionLimit { achieved, .. }) => {
            Ok(Criterion::new(11, achieved, eps, false, format!("m={HW_CELLS}; {e}")))
        }
        Err(e) => Err(num("sobolev", "smooth_approximate")(e)),
    }
}

fn truncation() -> Result<Criterion, CliError> {
    let g = grid(Grid::new(&[-8.0, -8.0], &[8.0, 8.0], 128))?;
    let gg = VectorField::from_fn(&g, 2, |x| {
        let e = (-0.5 * (x[0] * x[0] + x[1] * x[1])).exp();
        vec![e, 0.5 * x[0] * e]
    })
    .map_err(num("grid", "VectorField::from_fn"))?;
    let w = make_rotating_weight(&g, |x| 0.3 * x[0], 0.2, -0.2).map_err(num("muckenhoupt", "make_rotating_weight"))?;
    let p = exponent(ExponentFunction::from_fn(&g, |x| 2.0 + 0.5 * (0.5 * x[0]).sin()))?;
    let ks: Vec<f64> = (1..=8).map(|i| 0.5 * i as f64).collect();
    let eps = 0.05;
    let rep = match truncate_to_compact(&gg, &w, &p, eps, &ks) {
        Ok(rep) => rep,
        Err(e @ matvar::Error::ResolutionLimit { achieved, .. }) => {
            return Ok(Criterion::new(12, achieved, eps, false, e.to_string()));
        }
        Err(e) => return Err(num("sobolev", "truncate_to_compact")(e)),
    };
    // sup |η′| on a fine mesh of (1, 2)
    let eta_sup = (1..1_000_000)
        .map(|i| smooth_step_derivative(1.0 + i as f64 * 1e-6).abs())
        .fold(0.0, f64::max);
    let envelope_ok = rep.gradient_envelope <= eta_sup * (1.0 + 1e-6);
    let last = rep.rows.last().map_or(f64::NAN, |r| r.error);
    let mut c = Criterion::new(
        12,
        last,
        eps,
        rep.monotone && last < eps && envelope_ok,
        format!(
            "error at k=4; monotone {}; below ε from k={}; max k·|∇ν_k| = {:.6} vs sup|η′| = {eta_sup:.6}",
            rep.monotone, rep.k_epsilon, rep.gradient_envelope
        ),
    );
    c.notes.push(("gradient_envelope".into(), fmt_num(rep.gradient_envelope)));
    Ok(c)
}

/// Criteria rerun inside one- and four-thread pools by the determinism check.
pub const DETERMINISM_SUBSET: [usize; 4] = [4, 7, 8, 10];

fn determinism(opts: &SuiteOptions) -> Result<Criterion, CliError> {
    let rows_in_pool = |threads: usize| -> Result<Vec<Vec<String>>, CliError> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| CliError::Usage(e.to_string()))?;
        pool.install(|| {
            DETERMINISM_SUBSET
                .iter()
                .map(|&id| run_criterion(id, opts).map(|c| c.row()))
                .collect()
        })
    };
    let (one, four) = (rows_in_pool(1)?, rows_in_pool(4)?);
    let differing = one.iter().zip(&four).filter(|(a, b)| a != b).count();
    Ok(Criterion::new(
        13,
        differing as f64,
        0.0,
        differing == 0,
        format!("rows of criteria {DETERMINISM_SUBSET:?} differing between 1 and 4 threads"),
    ))
}
