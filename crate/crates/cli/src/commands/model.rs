//! `model-asymptotics`: residual tables for the line model of the series.

use anyhow::Result;
use horolab_core::repmodel::*;
use horolab_core::Complex64;

use crate::config::Config;
use crate::output::{fmt, Artifacts, Criterion};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn label(nu: Complex64) -> String {
    match (nu.re, nu.im) {
        (re, 0.0) => format!("{re}"),
        (0.0, im) => format!("{im}i"),
        (re, im) => format!("{re}{im:+}i"),
    }
}

pub fn run(cfg: &Config, out: &Artifacts) -> Result<Vec<Criterion>> {
    let nus = cfg.complex_list("model.nu", &[c(0.3, 0.0), c(0.5, 0.0), c(0.0, 1.0), c(0.0, 2.0)])?;
    let ts = cfg.f64_list("model.T", &[10.0, 100.0, 1000.0, 10000.0])?;
    let x_grid = cfg.f64_list("model.x_grid", &(0..9).map(|i| -1.0 + 0.25 * i as f64).collect::<Vec<_>>())?;
    let gate_t = cfg.f64("model.residual_T", 1000.0)?;
    let gate = cfg.f64("model.residual_tolerance", 0.05)?;
    let i0_tol = cfg.f64("model.i0_tolerance", 1e-10)?;
    let jt_nus = cfg.complex_list(
        "model.jt.nu",
        &[c(0.3, 0.0), c(0.5, 0.0), c(0.0, 1.0), c(0.0, 2.0), c(0.0, 3.0)],
    )?;
    let jt_ts = cfg.f64_list("model.jt.T", &[1.0, 10.0, 100.0])?;
    let jt_tol = cfg.f64("model.jt.tolerance", 1e-8)?;
    let bf_ts = cfg.f64_list("model.brute_force.T", &[1.0, 2.5, 5.0])?;
    let bf_xs = cfg.f64_list("model.brute_force.x", &[0.0, 0.6])?;
    let bf_tol = cfg.f64("model.brute_force.tolerance", 1e-6)?;
    let uf_nu = cfg.f64("model.uf.nu", 0.5)?;
    let uf_base = cfg.f64("model.uf.T", 1.0)?;
    let uf_ts = cfg.f64_list("model.uf.t", &[2.0, 4.0, 6.0])?;
    let uf_tol = cfg.f64("model.uf.tolerance", 0.02)?;
    let solver_tol = cfg.f64("model.solver.tolerance", 1e-6)?;
    let solver_width = cfg.f64("model.solver.width", 1.5)?;
    let solver_spacing = cfg.f64("model.solver.spacing", DEFAULT_SPACING)?;
    cfg.finish()?;

    // Asymptotic residual table.
    let mut rows = Vec::new();
    let mut criteria = Vec::new();
    for &nu in &nus {
        let p = CasimirParameter::from_nu(nu)?;
        let mut column = Vec::new();
        for &t in &ts {
            let r = asymptotic_residual(&p, t, &x_grid)?;
            rows.push(vec![fmt(nu.re), fmt(nu.im), fmt(t), fmt(r)]);
            column.push(r);
        }
        let decreasing = column.windows(2).all(|w| w[1] < w[0]);
        criteria.push(Criterion::holds(&format!("residual_decreasing[nu={}]", label(nu)), decreasing));
        let at_gate = match ts.iter().position(|&t| t == gate_t) {
            Some(k) => column[k],
            None => asymptotic_residual(&p, gate_t, &x_grid)?,
        };
        criteria.push(Criterion::at_most(
            &format!("residual_at_T={gate_t}[nu={}]", label(nu)),
            at_gate,
            gate,
        ));
    }
    out.csv("residuals.csv", &["nu_re", "nu_im", "T", "residual"], &rows)?;

    let i0 = i_nu(&CasimirParameter::from_real_nu(0.0)?)?;
    criteria.push(Criterion::at_most("i_nu_at_zero", (i0 - 2.0).norm(), i0_tol));

    let mut rows = Vec::new();
    let mut worst: f64 = 0.0;
    for &nu in &jt_nus {
        let p = CasimirParameter::from_nu(nu)?;
        for &t in &jt_ts {
            let r = j_t(&p, t)?;
            let res = r.residual.unwrap_or(0.0);
            worst = worst.max(res);
            rows.push(vec![fmt(nu.re), fmt(nu.im), fmt(t), fmt(r.direct.re), fmt(r.direct.im), fmt(res)]);
        }
    }
    out.csv("jt_identity.csv", &["nu_re", "nu_im", "T", "jt_re", "jt_im", "residual"], &rows)?;
    criteria.push(Criterion::at_most("jt_identity", worst, jt_tol));

    let mut rows = Vec::new();
    let mut worst: f64 = 0.0;
    for &nu in &nus {
        let p = CasimirParameter::from_nu(nu)?;
        for &t in &bf_ts {
            for &x in &bf_xs {
                let a = i_t(&p, t, x)?;
                let b = i_t_brute_force(&p, t, x)?;
                let d = (a - b).norm();
                worst = worst.max(d);
                rows.push(vec![fmt(nu.re), fmt(nu.im), fmt(t), fmt(x), fmt(a.re), fmt(a.im), fmt(d)]);
            }
        }
    }
    out.csv(
        "brute_force.csv",
        &["nu_re", "nu_im", "T", "x", "triangle_re", "triangle_im", "difference"],
        &rows,
    )?;
    criteria.push(Criterion::at_most("triangle_vs_brute_force", worst, bf_tol));

    // Correlation asymptotic against a unit bump.
    let p = CasimirParameter::from_real_nu(uf_nu)?;
    let g = SampledFunction::unit_bump(0.0, 1.0, DEFAULT_HALF_WIDTH, DEFAULT_SPACING)?;
    let mut rows = Vec::new();
    let mut rel = Vec::new();
    for &t in &uf_ts {
        let r = uf_residual(&p, &g, t, uf_base)?;
        rows.push(vec![fmt(t), fmt(r.correlation.re), fmt(r.leading.re), fmt(r.residual), fmt(r.relative)]);
        rel.push(r.relative);
    }
    out.csv("uf.csv", &["t", "correlation_re", "leading_re", "residual", "relative"], &rows)?;
    criteria.push(Criterion::holds("uf_decreasing", rel.windows(2).all(|w| w[1] < w[0])));
    criteria.push(Criterion::at_most("uf_final_relative", *rel.last().expect("nonempty grid"), uf_tol));

    // Cohomological equation on zero-average data.
    let a = SampledFunction::unit_bump(-1.5, solver_width, DEFAULT_HALF_WIDTH, solver_spacing)?;
    let b = SampledFunction::unit_bump(1.0, 0.75 * solver_width, DEFAULT_HALF_WIDTH, solver_spacing)?;
    let g = a.sub(&b)?;
    let f = solve_cohomological(&g)?;
    let err = f.derivative()?.sub(&g)?.l2_norm() / g.l2_norm();
    let obstruction = match solve_cohomological(&a) {
        Err(ModelError::Obstruction { average }) => (average - a.integral()).norm(),
        _ => f64::INFINITY,
    };
    out.csv(
        "solver.csv",
        &["relative_l2_error", "obstruction_average_error"],
        &[vec![fmt(err), fmt(obstruction)]],
    )?;
    criteria.push(Criterion::at_most("solver_relative_error", err, solver_tol));
    criteria.push(Criterion::at_most("obstruction_reported", obstruction, 1e-10));
    Ok(criteria)
}
