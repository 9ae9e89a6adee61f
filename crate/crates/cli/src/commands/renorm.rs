//! `renorm`: limits, consistency, envelopes and the Hölder report.

use std::fs;

use anyhow::{Context, Result};
use horolab_core::renorm::*;
use horolab_core::repmodel::{CasimirParameter, Series};
use horolab_core::Complex64;

use crate::config::Config;
use crate::output::{fmt, Artifacts, Criterion};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Bounded oscillating forcing with an exponential tail.
fn oscillating() -> Result<Forcing> {
    Ok(Forcing::sampled(
        |t| {
            (
                c((2.0 * t).sin() * (-0.3 * t).exp(), 0.2),
                c(0.7 * (-t).exp(), (1.3 * t).cos()),
            )
        },
        8.0,
        161,
        Tail {
            c0: c(0.0, 0.0),
            c1: c(0.4, -0.1),
        },
        Tail {
            c0: c(0.1, 0.0),
            c1: c(0.0, 0.0),
        },
    )?)
}

/// Forcing that vanishes until `log(1/ℓ)` and equals `(a, b)` afterwards.
fn delayed(len_u: f64, a: Complex64, b: Complex64) -> Result<Forcing> {
    let tau = (1.0 / len_u).ln();
    let zero = c(0.0, 0.0);
    let (knots, n) = if tau > 0.0 { (vec![0.0, tau], 2) } else { (vec![0.0], 1) };
    let (plus, minus) = if n == 2 {
        (vec![zero, zero], vec![zero, zero])
    } else {
        (vec![a], vec![b])
    };
    Ok(Forcing::new(
        knots,
        plus,
        minus,
        Tail { c0: a, c1: zero },
        Tail { c0: b, c1: zero },
    )?)
}

fn label(nu: Complex64) -> String {
    if nu.im == 0.0 {
        format!("{}", nu.re)
    } else {
        format!("{}{:+}i", nu.re, nu.im)
    }
}

pub fn run(cfg: &Config, out: &Artifacts) -> Result<Vec<Criterion>> {
    let nus = cfg.complex_list(
        "renorm.nu",
        &[c(0.25, 0.0), c(0.5, 0.0), c(0.75, 0.0), c(0.0, 1.0), c(0.0, 2.0), c(0.0, 0.0)],
    )?;
    let t_max = cfg.f64("renorm.t_max", 5.0)?;
    let t_points = cfg.usize("renorm.t_points", 51)?;
    let tol = cfg.f64("renorm.tolerance", 1e-9)?;
    let forcing_path = cfg.string_opt("renorm.forcing")?;
    let observable_path = cfg.string_opt("renorm.observable")?;
    let lengths = cfg.usize("renorm.holder.lengths", 21)?;
    cfg.finish()?;
    anyhow::ensure!(t_points >= 2, "renorm.t_points must be at least 2");
    let grid: Vec<f64> = (0..t_points).map(|i| t_max * i as f64 / (t_points - 1) as f64).collect();

    let mut forcings = vec![
        ("exponential".to_string(), Forcing::exponential(c(1.0, 0.0), c(1.0, 0.0))),
        ("oscillating".to_string(), oscillating()?),
    ];
    if let Some(p) = &forcing_path {
        let text = fs::read_to_string(p).with_context(|| format!("reading forcing {p}"))?;
        let f: Forcing = serde_json::from_str(&text).with_context(|| format!("parsing forcing {p}"))?;
        forcings.push((p.clone(), f));
    }
    let mut criteria = Vec::new();

    // Closed-form limits.
    let a0 = [c(0.5, 0.0), c(-1.0, 0.3)];
    let mut rows = Vec::new();
    let mut worst: f64 = 0.0;
    for &nu in &nus {
        let p = CasimirParameter::from_nu(nu)?;
        let one = c(1.0, 0.0);
        let (state, forcing, expect) = if p.series() == Series::Special {
            let s = CocycleState::new(p, c(0.0, 0.0), c(0.0, 0.0));
            (s, Forcing::exponential(one, c(0.0, 0.0)), [c(2.0 / 3.0, 0.0), c(0.0, 0.0)])
        } else {
            let s = CocycleState::new(p, a0[0], a0[1]);
            let e = [a0[0] + 2.0 / (3.0 - nu), a0[1] + 2.0 / (3.0 + nu)];
            (s, Forcing::exponential(one, one), e)
        };
        let lim = renormalized_limit(&state, &forcing)?;
        let err = (lim.plus - expect[0]).norm().max((lim.minus - expect[1]).norm());
        worst = worst.max(err);
        rows.push(vec![
            fmt(nu.re),
            fmt(nu.im),
            fmt(lim.plus.re),
            fmt(lim.plus.im),
            fmt(lim.minus.re),
            fmt(lim.minus.im),
            fmt(err),
        ]);
    }
    out.csv(
        "limits.csv",
        &["nu_re", "nu_im", "plus_re", "plus_im", "minus_re", "minus_im", "error"],
        &rows,
    )?;
    criteria.push(Criterion::at_most("closed_form_limits", worst, tol));

    // Consistency under the geodesic flow.
    let mut rows = Vec::new();
    for &nu in &nus {
        let p = CasimirParameter::from_nu(nu)?;
        let state = CocycleState::new(p, a0[0], a0[1]);
        for (name, f) in &forcings {
            let mut worst: f64 = 0.0;
            for &t in &grid {
                let r = consistency_residual(&state, f, t)?;
                worst = worst.max(r);
                rows.push(vec![fmt(nu.re), fmt(nu.im), name.clone(), fmt(t), fmt(r)]);
            }
            criteria.push(Criterion::at_most(&format!("consistency[nu={},{name}]", label(nu)), worst, tol));
        }
    }
    out.csv("consistency.csv", &["nu_re", "nu_im", "forcing", "t", "residual"], &rows)?;

    // Convergence envelope for forcings inside a declared bound.
    let bounds = [
        ForcingBound {
            c: 1.0,
            arc: ArcStats::new(0.0, 1.0, 0.0)?,
        },
        ForcingBound {
            c: 1.0,
            arc: ArcStats::new(1.0, 1.0, 1.0)?,
        },
    ];
    for ((name, f), bound) in forcings.iter().zip(&bounds) {
        criteria.push(Criterion::holds(&format!("forcing_bound[{name}]"), bound.holds_for(f)));
    }
    let mut rows = Vec::new();
    for &nu in &nus {
        let p = CasimirParameter::from_nu(nu)?;
        let state = CocycleState::new(p, a0[0], a0[1]);
        let r = state.renormalization();
        for ((name, f), bound) in forcings.iter().zip(&bounds) {
            let mut excess: f64 = 0.0;
            for &t in &grid {
                let gap = convergence_gap(&state, f, t)?;
                let env = bound.envelope(&r, t);
                for k in 0..2 {
                    excess = excess.max(gap[k] / env[k]);
                }
                rows.push(vec![fmt(nu.re), fmt(nu.im), name.clone(), fmt(t), fmt(gap[0]), fmt(env[0]), fmt(gap[1]), fmt(env[1])]);
            }
            criteria.push(Criterion::at_most(&format!("envelope[nu={},{name}]", label(nu)), excess, 1.0 + 1e-12));
        }
    }
    out.csv(
        "envelope.csv",
        &["nu_re", "nu_im", "forcing", "t", "gap_plus", "envelope_plus", "gap_minus", "envelope_minus"],
        &rows,
    )?;

    // Hölder report on a family of short arcs.
    let mut rows = Vec::new();
    for &nu in &nus {
        let p = CasimirParameter::from_nu(nu)?;
        let r = Renormalization::for_parameter(&p);
        let jordan = p.series() == Series::Special;
        let one = c(1.0, 0.0);
        let (fp, fm) = if jordan { (one, c(0.0, 0.0)) } else { (one, one) };
        let mut plus = Vec::new();
        let mut minus = Vec::new();
        for k in 0..lengths {
            let ell = 0.5f64.powi(k as i32);
            let arc = ArcStats::new(0.0, ell, 1.0)?;
            let state = CocycleState::new(p, c(ell, 0.0), c(ell, 0.0));
            let lim = renormalized_limit(&state, &delayed(ell, fp, fm)?)?;
            plus.push((lim.plus, arc));
            minus.push((lim.minus, arc));
        }
        // |β̂| ≤ ℓ + ∫_{log 1/ℓ}^∞ |e^{−τΛ}ρ| gives these constants.
        let (cp, cm) = match r {
            Renormalization::Jordan => (3.0, 1.0),
            Renormalization::Diagonal { plus, minus } => (1.0 + 1.0 / plus.re, 1.0 + 1.0 / minus.re),
        };
        for (part, values, constant, sign) in [("plus", &plus, cp, true), ("minus", &minus, cm, false)] {
            let report = holder_check(values, HolderGauge::for_parameter(&p, sign), constant);
            rows.push(vec![
                fmt(nu.re),
                fmt(nu.im),
                part.to_string(),
                fmt(report.max_ratio),
                fmt(constant),
                report.violations.len().to_string(),
            ]);
            criteria.push(Criterion::at_most(
                &format!("holder[nu={},{part}]", label(nu)),
                report.max_ratio,
                constant,
            ));
        }
        let mut injected = plus.clone();
        let spot = injected.len() / 2;
        injected[spot].0 = c(1e6, 0.0);
        let report = holder_check(&injected, HolderGauge::for_parameter(&p, true), cp);
        criteria.push(Criterion::holds(
            &format!("holder_detects_violation[nu={}]", label(nu)),
            !report.pass && report.violations == vec![spot],
        ));
    }
    out.csv(
        "holder.csv",
        &["nu_re", "nu_im", "component", "max_ratio", "constant", "violations"],
        &rows,
    )?;

    // JSON interfaces.
    let (_, written) = &forcings[forcings.len() - 1];
    out.json("forcing.json", written)?;
    let back: Forcing = serde_json::from_str(&fs::read_to_string(out.path("forcing.json"))?)?;
    criteria.push(Criterion::holds("forcing_round_trip", &back == written));
    let observable = match &observable_path {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading observable {p}"))?;
            serde_json::from_str(&text).with_context(|| format!("parsing observable {p}"))?
        }
        None => SpectralObservable::conjugated(&[
            (CasimirParameter::from_nu(c(0.0, 1.0))?, c(1.0, 0.5)),
            (CasimirParameter::from_nu(c(0.0, 2.5))?, c(-0.25, 0.75)),
        ])?,
    };
    out.json("observable.json", &observable)?;
    let back: SpectralObservable = serde_json::from_str(&fs::read_to_string(out.path("observable.json"))?)?;
    criteria.push(Criterion::holds("observable_round_trip", back == observable));
    if observable.conjugate && observable.entries.iter().all(|e| e.parameter.series() == Series::Principal) {
        let fields: Vec<CocyclePair> = (0..observable.entries.len())
            .map(|k| CocyclePair::conjugate_of((0..16).map(|x| c((x + k) as f64 * 0.3, 1.0 - x as f64 * 0.1)).collect()))
            .collect();
        let mut imag: f64 = 0.0;
        for x in 0..16 {
            imag = imag.max(cocycle_expand(&observable, &fields, x)?.im.abs());
        }
        criteria.push(Criterion::at_most("conjugated_expansion_is_real", imag, 1e-12));
    }
    Ok(criteria)
}
