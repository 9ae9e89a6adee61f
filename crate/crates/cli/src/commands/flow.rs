//! `flow-check`: algebraic identities of the three flows.

use anyhow::Result;
use horolab_core::rng::{derive_seed, stream_rng};
use horolab_core::sl2core::*;
use horolab_core::surface::bolza_group;
use rand::Rng;
use rayon::prelude::*;

use crate::config::Config;
use crate::output::{fmt, Artifacts, Criterion};

pub fn run(cfg: &Config, seed: u64, out: &Artifacts) -> Result<Vec<Criterion>> {
    let samples = cfg.usize("flow.samples", 1000)?;
    let range = cfg.f64("flow.range", 3.0)?;
    let tol = cfg.f64("flow.tolerance", 1e-10)?;
    let bracket_tol = cfg.f64("flow.bracket_tolerance", 1e-12)?;
    cfg.finish()?;

    let (x, u, v) = (Generator::X.matrix(), Generator::U.matrix(), Generator::V.matrix());
    let brackets = [
        ("[X,U]-U", mat_max_abs(&mat_sub(&commutator(&x, &u), &u))),
        ("[X,V]+V", mat_max_abs(&mat_sub(&commutator(&x, &v), &mat_scale(&v, -1.0)))),
        ("[U,V]-2X", mat_max_abs(&mat_sub(&commutator(&u, &v), &mat_scale(&x, 2.0)))),
    ];
    out.csv(
        "brackets.csv",
        &["identity", "residual"],
        &brackets.iter().map(|(n, r)| vec![n.to_string(), fmt(*r)]).collect::<Vec<_>>(),
    )?;

    // Random base points on the surface and times in [−range, range]².
    let group = bolza_group()?;
    let time_seed = derive_seed(seed, 1);
    let rows: Vec<[f64; 4]> = (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let g = group.sample_point(seed, i);
            let mut rng = stream_rng(time_seed, i);
            let t = rng.random_range(-range..=range);
            let s = rng.random_range(-range..=range);
            // g_t ∘ h_s = h_{e^{−t}s} ∘ g_t
            let lhs = flow(Flow::Geodesic, t, &flow(Flow::StableHorocycle, s, &g));
            let rhs = flow(Flow::StableHorocycle, (-t).exp() * s, &flow(Flow::Geodesic, t, &g));
            let stable = lhs.distance(&rhs);
            let lhs = flow(Flow::Geodesic, t, &flow(Flow::UnstableHorocycle, s, &g));
            let rhs = flow(Flow::UnstableHorocycle, t.exp() * s, &flow(Flow::Geodesic, t, &g));
            [t, s, stable, lhs.distance(&rhs)]
        })
        .collect();
    out.csv(
        "commutation.csv",
        &["t", "s", "stable_residual", "unstable_residual"],
        &rows.iter().map(|r| r.iter().map(|x| fmt(*x)).collect()).collect::<Vec<_>>(),
    )?;
    let worst_stable = rows.iter().map(|r| r[2]).fold(0.0, f64::max);
    let worst_unstable = rows.iter().map(|r| r[3]).fold(0.0, f64::max);

    let mut group_law: f64 = 0.0;
    for kind in Flow::ALL {
        for (a, b) in [(0.3, -1.1), (2.0, 0.5), (-2.5, -0.25)] {
            let lhs = kind.exp(a) * kind.exp(b);
            group_law = group_law.max(lhs.distance(&kind.exp(a + b)));
        }
    }

    Ok(vec![
        Criterion::at_most(
            "lie_brackets",
            brackets.iter().map(|b| b.1).fold(0.0, f64::max),
            bracket_tol,
        ),
        Criterion::at_most("stable_commutation", worst_stable, tol),
        Criterion::at_most("unstable_commutation", worst_unstable, tol),
        Criterion::at_most("one_parameter_groups", group_law, tol),
    ])
}
