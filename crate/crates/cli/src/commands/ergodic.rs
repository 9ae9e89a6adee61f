//! `ergodic-scan`: variance growth and Birkhoff averages of a bump.

use anyhow::{bail, Result};
use horolab_core::ergodic::*;
use horolab_core::rng::derive_seed;
use horolab_core::sl2core::DiskPoint;
use horolab_core::surface::{surface_by_name, Observable};
use horolab_core::Complex64;

use crate::config::Config;
use crate::output::{fmt, Artifacts, Criterion};

/// `n` geometric points from `a` to `b`.
pub fn geometric(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    let r = (b / a).ln() / (n - 1) as f64;
    (0..n).map(|i| a * (r * i as f64).exp()).collect()
}

pub fn run(cfg: &Config, seed: u64, out: &Artifacts) -> Result<Vec<Criterion>> {
    let surface = cfg.string("surface.name", "bolza")?;
    let centre = cfg.f64_list("ergodic.observable.center", &[0.0, 0.0])?;
    let radius = cfg.f64("ergodic.observable.radius", 1.2)?;
    let mode = cfg.i32("ergodic.observable.mode", 0)?;
    let ts = cfg.f64_list("ergodic.T", &geometric(1e2, 1e4, 9))?;
    let samples = cfg.usize("ergodic.samples", 400)?;
    let batches = cfg.usize("ergodic.batches", 3)?;
    let step = cfg.f64("ergodic.step", DEFAULT_STEP)?;
    let birkhoff_ts = cfg.f64_list("ergodic.birkhoff.T", &[1e2, 1e3, 1e4])?;
    let starts = cfg.usize("ergodic.birkhoff.starts", 100)?;
    let lo = cfg.f64("ergodic.exponent_min", 0.4)?;
    let hi = cfg.f64("ergodic.exponent_max", 0.6)?;
    let max_se = cfg.f64("ergodic.max_stderr", 0.05)?;
    cfg.finish()?;
    if centre.len() != 2 {
        bail!("ergodic.observable.center must be [re, im]");
    }
    if batches == 0 || samples < 2 {
        bail!("need at least one batch of two samples");
    }

    let group = surface_by_name(&surface)?;
    let centre = DiskPoint::new(Complex64::new(centre[0], centre[1]))?;
    let obs = Observable::calibrated(&group, centre, radius, mode)?;

    let mut var_rows = Vec::new();
    let mut fit_rows = Vec::new();
    let mut fits = Vec::new();
    for b in 0..batches {
        let batch_seed = derive_seed(seed, 100 + b as u64);
        let curve = variance_curve(&group, &obs, &ts, samples, batch_seed, step)?;
        let fit = growth_exponent(&curve)?;
        eprintln!("[ergodic-scan] batch {b}: exponent {:.4} ± {:.4}", fit.exponent, fit.stderr);
        for p in &curve.points {
            var_rows.push(vec![b.to_string(), fmt(p.t), fmt(p.variance), fmt(p.stderr)]);
        }
        fit_rows.push(vec![b.to_string(), fmt(fit.exponent), fmt(fit.stderr), fmt(fit.intercept)]);
        fits.push(fit);
    }
    out.csv("variance.csv", &["batch", "T", "variance", "stderr"], &var_rows)?;
    out.csv("fits.csv", &["batch", "exponent", "stderr", "intercept"], &fit_rows)?;

    let medians = birkhoff_medians(&group, &obs, &birkhoff_ts, starts, derive_seed(seed, 7), step)?;
    out.csv(
        "birkhoff.csv",
        &["T", "median_abs_average"],
        &birkhoff_ts
            .iter()
            .zip(&medians)
            .map(|(t, m)| vec![fmt(*t), fmt(*m)])
            .collect::<Vec<_>>(),
    )?;
    let decreasing = medians.windows(2).all(|w| w[1] < w[0]);

    let min_exp = fits.iter().map(|f| f.exponent).fold(f64::INFINITY, f64::min);
    let max_exp = fits.iter().map(|f| f.exponent).fold(f64::NEG_INFINITY, f64::max);
    let worst_se = fits.iter().map(|f| f.stderr).fold(0.0, f64::max);
    Ok(vec![
        Criterion::at_least("growth_exponent_min", min_exp, lo),
        Criterion::at_most("growth_exponent_max", max_exp, hi),
        Criterion::at_most("bootstrap_stderr", worst_se, max_se),
        Criterion::holds("birkhoff_median_decreasing", decreasing),
    ])
}
