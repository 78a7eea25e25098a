//! Executes one configured operation and assembles its report.

use matvar::grid::{Cube, Grid};
use matvar::matweight::{held_out_certificate, reducing_operator};
use matvar::muckenhoupt::{matrix_ap_constant, reducing_ap_constant};
use matvar::operators::{approximate_identity_study, averaging_bound_check, geometric_schedule};
use matvar::sobolev::{smooth_approximate, truncate_to_compact, SmoothingOptions};
use matvar::varnorm::{matrix_weighted_norm, vector_norm};

use crate::config::{random_field, ExperimentConfig};
use crate::error::{num, CliError};
use crate::report::{fmt_num, Report};
use crate::suite::{run_suite, SuiteOptions};

/// Held-out directions drawn per cube by `reducing`.
pub const HELD_OUT_DIRECTIONS: usize = 200;
/// Relative slack on asserted inequalities.
pub const SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Operation {
    Norm,
    Apconst,
    Reducing,
    Avgbound,
    Mollify,
    Hw,
    Truncate,
    Suite,
}

impl Operation {
    pub fn name(self) -> &'static str {
        match self {
            Operation::Norm => "norm",
            Operation::Apconst => "apconst",
            Operation::Reducing => "reducing",
            Operation::Avgbound => "avgbound",
            Operation::Mollify => "mollify",
            Operation::Hw => "hw",
            Operation::Truncate => "truncate",
            Operation::Suite => "suite",
        }
    }
}

pub fn run(op: Operation, cfg: &ExperimentConfig) -> Result<Report, CliError> {
    cfg.validate()?;
    match op {
        Operation::Norm => norm(cfg),
        Operation::Apconst => apconst(cfg),
        Operation::Reducing => reducing(cfg),
        Operation::Avgbound => avgbound(cfg),
        Operation::Mollify => mollify(cfg),
        Operation::Hw => hw(cfg),
        Operation::Truncate => truncate(cfg),
        Operation::Suite => suite(cfg),
    }
}

fn need_seed(cfg: &ExperimentConfig, op: &str) -> Result<u64, CliError> {
    cfg.seed
        .ok_or_else(|| CliError::Config(format!("seed: `{op}` is randomized and needs a seed")))
}

fn cube_cells(grid: &Grid, q: &Cube) -> (String, String) {
    let lower = q.lower().iter().map(|&x| fmt_num(x)).collect::<Vec<_>>().join(";");
    (lower, q.cells(grid).len().to_string())
}

fn norm(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let grid = cfg.build_grid()?;
    let p = cfg.build_exponent(&grid)?;
    let w = cfg.build_weight(&grid)?;
    let f = cfg.build_function(&grid, w.dim(), cfg.seed)?;
    let weighted = matrix_weighted_norm(&w, &f, &p).map_err(num("varnorm", "matrix_weighted_norm"))?;
    let plain = vector_norm(&f, &p).map_err(num("varnorm", "vector_norm"))?;
    let mut r = Report::new("norm", cfg.seed, vec!["quantity", "value", "iterations", "converged"]);
    r.note("p_minus", fmt_num(p.p_minus()));
    r.note("p_plus", fmt_num(p.p_plus()));
    for (name, n) in [("weighted_norm", weighted), ("unweighted_norm", plain)] {
        r.rows.push(vec![
            name.into(),
            fmt_num(n.value),
            n.iterations.to_string(),
            n.converged.to_string(),
        ]);
    }
    r.summary.push(format!("‖f‖_(p(·),W) = {:.12}", weighted.value));
    r.summary.push(format!("‖f‖_p(·) = {:.12}", plain.value));
    Ok(r)
}

fn apconst(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let grid = cfg.build_grid()?;
    let p = cfg.build_exponent(&grid)?;
    let w = cfg.build_weight(&grid)?;
    let fam = cfg.build_family(&grid)?;
    let ap = matrix_ap_constant(&w, &p, &fam).map_err(num("muckenhoupt", "matrix_ap_constant"))?;
    let mut r = Report::new("apconst", cfg.seed, vec!["cube", "lower", "side", "cells", "constant"]);
    for (i, (q, v)) in fam.cubes().iter().zip(&ap.values).enumerate() {
        let (lower, cells) = cube_cells(&grid, q);
        r.rows.push(vec![i.to_string(), lower, fmt_num(q.side()), cells, fmt_num(*v)]);
    }
    r.note("supremum", fmt_num(ap.supremum));
    r.summary.push(format!("sup = {:.12}", ap.supremum));
    Ok(r)
}

fn reducing(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let seed = need_seed(cfg, "reducing")?;
    let grid = cfg.build_grid()?;
    let p = cfg.build_exponent(&grid)?;
    let w = cfg.build_weight(&grid)?;
    let fam = cfg.build_family(&grid)?;
    let ap = reducing_ap_constant(&w, &p, &fam).map_err(num("muckenhoupt", "reducing_ap_constant"))?;
    let mut r = Report::new(
        "reducing",
        Some(seed),
        vec!["cube", "lower", "side", "fit_min", "fit_max", "held_out_min", "held_out_max", "constant"],
    );
    let upper = (w.dim() as f64).sqrt();
    let mut bad = Vec::new();
    for (i, (q, v)) in fam.cubes().iter().zip(&ap.values).enumerate() {
        let op = reducing_operator(&w, &p, q).map_err(num("matweight", "reducing_operator"))?;
        let held = held_out_certificate(&w, &p, &op, HELD_OUT_DIRECTIONS, seed.wrapping_add(i as u64))
            .map_err(num("matweight", "held_out_certificate"))?;
        if held.min < 1.0 - 1e-6 || held.max > upper + 1e-6 {
            bad.push(i);
        }
        r.rows.push(vec![
            i.to_string(),
            cube_cells(&grid, q).0,
            fmt_num(q.side()),
            fmt_num(op.certificate.min),
            fmt_num(op.certificate.max),
            fmt_num(held.min),
            fmt_num(held.max),
            fmt_num(*v),
        ]);
    }
    r.note("supremum", fmt_num(ap.supremum));
    r.summary.push(format!("sup = {:.12}", ap.supremum));
    r.summary.push(format!("held-out sandwich [1, {upper:.6}] violated on {} cubes", bad.len()));
    if !bad.is_empty() {
        r.violation = Some(format!("held-out sandwich fails on cubes {bad:?}"));
    }
    Ok(r)
}

fn avgbound(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let seed = need_seed(cfg, "avgbound")?;
    let grid = cfg.build_grid()?;
    let p = cfg.build_exponent(&grid)?;
    let w = cfg.build_weight(&grid)?;
    let fam = cfg.build_family(&grid)?;
    let wc = matrix_ap_constant(&w, &p, &fam)
        .map_err(num("muckenhoupt", "matrix_ap_constant"))?
        .supremum;
    let mut r = Report::new("avgbound", Some(seed), vec!["trial", "cube", "lhs", "rhs", "ratio", "pass"]);
    r.note("w_constant", fmt_num(wc));
    let mut failures = 0usize;
    let mut worst = 0.0f64;
    for trial in 0..cfg.avgbound.trials {
        let f = random_field(&grid, w.dim(), seed.wrapping_add(trial as u64));
        for (i, q) in fam.cubes().iter().enumerate() {
            let b = averaging_bound_check(&w, &p, &f, q, wc).map_err(num("operators", "averaging_bound_check"))?;
            let pass = b.holds(SLACK);
            failures += usize::from(!pass);
            let ratio = b.lhs / b.rhs;
            worst = worst.max(ratio);
            r.rows.push(vec![
                trial.to_string(),
                i.to_string(),
                fmt_num(b.lhs),
                fmt_num(b.rhs),
                fmt_num(ratio),
                pass.to_string(),
            ]);
        }
    }
    r.summary.push(format!(
        "{} checks of ‖A_Q f‖ ≤ 4[W]‖f‖ with [W] = {wc:.9}: {failures} violations, max ratio {worst:.6}",
        r.rows.len()
    ));
    if failures > 0 {
        r.violation = Some(format!("{failures} averaging bound violations"));
    }
    Ok(r)
}

fn mollify(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let grid = cfg.build_grid()?;
    let p = cfg.build_exponent(&grid)?;
    let w = cfg.build_weight(&grid)?;
    let fam = cfg.build_family(&grid)?;
    let f = cfg.build_function(&grid, w.dim(), cfg.seed)?;
    let t_min = cfg.schedule.t_min.unwrap_or(2.0 * grid.h_max());
    let schedule = geometric_schedule(cfg.schedule.t0, t_min);
    let study =
        approximate_identity_study(&w, &p, &f, &schedule).map_err(num("operators", "approximate_identity_study"))?;
    let wc = matrix_ap_constant(&w, &p, &fam)
        .map_err(num("muckenhoupt", "matrix_ap_constant"))?
        .supremum;
    let mut r = Report::new("mollify", cfg.seed, vec!["t", "error", "norm", "norm_ratio"]);
    for row in &study.rows {
        r.rows.push(vec![
            fmt_num(row.t),
            fmt_num(row.error),
            fmt_num(row.norm),
            fmt_num(row.norm / (wc * study.norm_f)),
        ]);
    }
    let c_emp = study.envelope(wc);
    r.note("norm_f", fmt_num(study.norm_f));
    r.note("w_constant", fmt_num(wc));
    r.note("c_emp", fmt_num(c_emp));
    r.note("strictly_decreasing", study.strictly_decreasing);
    r.summary.push(format!(
        "final error {:.6e}, strictly decreasing: {}, C_emp = {c_emp:.6}",
        study.final_error(),
        study.strictly_decreasing
    ));
    Ok(r)
}

fn hw(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let grid = cfg.build_grid()?;
    let p = cfg.build_exponent(&grid)?;
    let w = cfg.build_weight(&grid)?;
    let f = cfg.build_function(&grid, w.dim(), cfg.seed)?;
    let opts = SmoothingOptions {
        shells: cfg.hw.shells,
        max_halvings: cfg.hw.max_halvings,
        ..SmoothingOptions::default()
    };
    let (_, rep) =
        smooth_approximate(&f, &w, &p, cfg.hw.epsilon, &opts).map_err(num("sobolev", "smooth_approximate"))?;
    let mut r = Report::new(
        "hw",
        cfg.seed,
        vec![
            "shell",
            "s_k",
            "t_k",
            "zero_order_error",
            "zero_order_budget",
            "gradient_errors",
            "gradient_budget",
        ],
    );
    for s in &rep.shells {
        r.rows.push(vec![
            s.k.to_string(),
            fmt_num(s.s_k),
            fmt_num(s.t_k),
            fmt_num(s.zero_order_error),
            fmt_num(s.zero_order_budget),
            s.gradient_errors.iter().map(|&e| fmt_num(e)).collect::<Vec<_>>().join(";"),
            fmt_num(s.gradient_budget),
        ]);
    }
    r.rows.push(vec![
        "total".into(),
        String::new(),
        String::new(),
        fmt_num(rep.total_matrix),
        fmt_num(rep.epsilon),
        fmt_num(rep.total_sum),
        String::new(),
    ]);
    r.note("total_matrix", fmt_num(rep.total_matrix));
    r.note("total_sum", fmt_num(rep.total_sum));
    r.note("w_constant", fmt_num(rep.weight_constant));
    r.summary.push(format!(
        "‖f − g‖ = {:.6e} against ε = {}, per-shell budgets met: {}",
        rep.total_matrix,
        rep.epsilon,
        rep.budgets_met()
    ));
    if !rep.success() {
        r.violation = Some(format!("‖f − g‖ = {} is not below ε = {}", rep.total_matrix, rep.epsilon));
    }
    Ok(r)
}

fn truncate(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let grid = cfg.build_grid()?;
    let p = cfg.build_exponent(&grid)?;
    let w = cfg.build_weight(&grid)?;
    let g = cfg.build_function(&grid, w.dim(), cfg.seed)?;
    let rep = truncate_to_compact(&g, &w, &p, cfg.truncate.epsilon, &cfg.truncate.ks)
        .map_err(num("sobolev", "truncate_to_compact"))?;
    let mut r = Report::new("truncate", cfg.seed, vec!["k", "error", "max_gradient", "k_times_max_gradient"]);
    for row in &rep.rows {
        r.rows.push(vec![
            fmt_num(row.k),
            fmt_num(row.error),
            fmt_num(row.max_gradient),
            fmt_num(row.k * row.max_gradient),
        ]);
    }
    r.note("k_epsilon", fmt_num(rep.k_epsilon));
    r.note("monotone", rep.monotone);
    r.note("gradient_envelope", fmt_num(rep.gradient_envelope));
    r.summary.push(format!(
        "error below ε = {} from k = {}, monotone: {}, max k·|∇ν_k| = {:.6}",
        rep.epsilon, rep.k_epsilon, rep.monotone, rep.gradient_envelope
    ));
    Ok(r)
}

fn suite(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let opts = SuiteOptions {
        holder_constant: cfg.suite.holder_constant,
    };
    let results = run_suite(&opts)?;
    let mut r = Report::new("suite", None, vec!["id", "criterion", "measured", "bound", "verdict", "detail"]);
    r.note("holder_constant", fmt_num(opts.holder_constant));
    let mut failed = Vec::new();
    for c in &results {
        for (k, v) in &c.notes {
            r.note(&format!("c{}.{k}", c.id), v);
        }
        r.rows.push(c.row());
        r.summary.push(c.line());
        if !c.pass {
            failed.push(c.id);
        }
    }
    if !failed.is_empty() {
        r.violation = Some(format!("criteria {failed:?} failed"));
    }
    Ok(r)
}
