//! `surface-check`: the Fuchsian group of the octagon surface.

use anyhow::Result;
use horolab_core::rng::{derive_seed, stream_rng};
use horolab_core::sl2core::{Flow, GroupElement};
use horolab_core::surface::*;
use rand::Rng;
use rayon::prelude::*;

use crate::config::Config;
use crate::output::{fmt, Artifacts, Criterion};

pub fn run(cfg: &Config, seed: u64, out: &Artifacts) -> Result<Vec<Criterion>> {
    let name = cfg.string("surface.name", "bolza")?;
    let area_samples = cfg.usize("surface.area_samples", 100_000)?;
    let area_tol = cfg.f64("surface.area_tolerance", 0.01)?;
    let reductions = cfg.usize("surface.reductions", 1000)?;
    let max_distance = cfg.f64("surface.reduction_distance", 6.0)?;
    let relator_tol = cfg.f64("surface.relator_tolerance", RELATOR_TOLERANCE)?;
    cfg.finish()?;

    let group = surface_by_name(&name)?;
    out.csv(
        "generators.csv",
        &["index", "a", "b", "c", "d"],
        &(0..GENERATORS)
            .map(|k| {
                let e = group.generator(k).entries();
                std::iter::once(k.to_string()).chain(e.iter().map(|x| fmt(*x))).collect()
            })
            .collect::<Vec<_>>(),
    )?;

    let (area, se) = group.area_monte_carlo(area_samples, derive_seed(seed, 1));
    let rel = (area - OCTAGON_AREA).abs() / OCTAGON_AREA;
    out.csv(
        "area.csv",
        &["samples", "area", "stderr", "exact"],
        &[vec![area_samples.to_string(), fmt(area), fmt(se), fmt(OCTAGON_AREA)]],
    )?;

    // Elements whose base points lie up to `max_distance` from the centre.
    let red_seed = derive_seed(seed, 2);
    let rows: Vec<(usize, usize, f64, bool)> = (0..reductions as u64)
        .into_par_iter()
        .map(|i| -> Result<(usize, usize, f64, bool)> {
            let mut rng = stream_rng(red_seed, i);
            let x = GroupElement::rotation(rng.random_range(0.0..std::f64::consts::TAU))
                * Flow::Geodesic.exp(rng.random_range(0.0..max_distance))
                * GroupElement::rotation(rng.random_range(0.0..std::f64::consts::TAU));
            let first = group.reduce(&x)?;
            let back = group.word_element(&first.word) * first.element;
            let residual = back.distance(&x) / (1.0 + x.max_abs_entry());
            let second = group.reduce(&first.element)?;
            let idempotent = second.word.is_empty()
                && second.element == first.element
                && group.contains(first.element.base_point());
            Ok((i as usize, first.word.len(), residual, idempotent))
        })
        .collect::<Result<_>>()?;
    out.csv(
        "reduction.csv",
        &["index", "word_length", "reconstruction_residual", "idempotent"],
        &rows
            .iter()
            .map(|r| vec![r.0.to_string(), r.1.to_string(), fmt(r.2), r.3.to_string()])
            .collect::<Vec<_>>(),
    )?;
    let failures = rows.iter().filter(|r| !r.3).count();
    let worst = rows.iter().map(|r| r.2).fold(0.0, f64::max);

    Ok(vec![
        Criterion::at_most("relator_residual", group.relator_residual(), relator_tol),
        Criterion::at_most("area_relative_error", rel, area_tol),
        Criterion::at_most("reduction_non_idempotent", failures as f64, 0.0),
        Criterion::at_most("reduction_reconstruction", worst, 1e-8),
    ])
}
