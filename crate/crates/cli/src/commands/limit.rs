//! `limit-lab`: moment tests, projected Lévy scans and torus distributions.

use anyhow::{Context, Result};
use horolab_core::distlab::*;
use horolab_core::renorm::SpectralObservable;
use horolab_core::repmodel::CasimirParameter;
use horolab_core::rng::derive_seed;
use horolab_core::Complex64;
use serde_json::json;

use crate::config::Config;
use crate::output::{fmt, Artifacts, Criterion};
use crate::Preset;

fn field(law: FieldLaw, a: f64, b: f64) -> FieldSpec {
    FieldSpec { law, a, b, theta: 0.0 }
}

fn moment_rows(v: &MomentVerdict) -> Vec<Vec<String>> {
    let idx = |k: &[u32]| k.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
    v.rows
        .iter()
        .map(|c| {
            vec![
                idx(&c.row.alpha),
                idx(&c.row.beta),
                fmt(c.row.estimate.re),
                fmt(c.row.estimate.im),
                fmt(c.row.stderr_re),
                fmt(c.row.stderr_im),
                c.pass.to_string(),
            ]
        })
        .collect()
}

const MOMENT_HEADER: [&str; 7] = ["alpha", "beta", "estimate_re", "estimate_im", "stderr_re", "stderr_im", "pass"];

pub fn run(cfg: &Config, seed: u64, out: &Artifacts) -> Result<Vec<Criterion>> {
    let preset = Preset::from_name(&cfg.string("limit.preset", "complex-gaussian")?)?;
    let n = cfg.usize("limit.samples", 100_000)?;
    let max_degree = cfg.usize("limit.max_degree", 4)? as u32;
    let significance = cfg.f64("limit.significance", 0.05)?;
    let thetas = cfg.usize("limit.thetas", 16)?;
    let radii = cfg.f64_list("limit.radii", &[1.0, 2.0])?;
    let dim = cfg.usize("limit.dimension", 1)?;
    let per_axis = cfg.usize("limit.torus.per_axis", 6)?;
    let ratio = match preset {
        Preset::TorusComplementary => cfg.f64("limit.torus.max_ratio", 2.0)?,
        Preset::TorusPrincipal => cfg.f64("limit.torus.min_ratio", 5.0)?,
        _ => 0.0,
    };
    cfg.finish()?;
    anyhow::ensure!(n >= 2, "limit.samples must be at least 2");
    anyhow::ensure!(dim >= 1, "limit.dimension must be positive");

    match preset {
        Preset::ComplexGaussian | Preset::StretchedGaussian | Preset::Ray => {
            let specs: Vec<FieldSpec> = match preset {
                Preset::ComplexGaussian => vec![field(FieldLaw::Gaussian, 1.0, 1.0); dim],
                Preset::StretchedGaussian => vec![field(FieldLaw::Gaussian, 2.0, 1.0); dim],
                _ => {
                    let mut v = vec![field(FieldLaw::Gaussian, 1.0, 0.0)];
                    v.extend(vec![field(FieldLaw::Gaussian, 1.0, 1.0); dim.max(2) - 1]);
                    v
                }
            };
            let columns: Vec<Vec<Complex64>> = specs
                .iter()
                .enumerate()
                .map(|(s, spec)| synthetic_field(spec, n, derive_seed(seed, 200 + s as u64)))
                .collect();
            let samples: Vec<Vec<Complex64>> = (0..n).map(|i| columns.iter().map(|c| c[i]).collect()).collect();
            let grid = ScanGrid {
                thetas_per_coordinate: thetas,
                radii,
            };
            let report = rot_invariance_test(&samples, max_degree, significance, &grid)?;
            for w in &report.warnings {
                eprintln!("[limit-lab] {w}");
            }
            out.csv("moments_raw.csv", &MOMENT_HEADER, &moment_rows(&report.raw))?;
            out.csv("moments_normalized.csv", &MOMENT_HEADER, &moment_rows(&report.normalized))?;
            out.csv(
                "distribution.csv",
                &["re", "im"],
                &columns[0].iter().map(|z| vec![fmt(z.re), fmt(z.im)]).collect::<Vec<_>>(),
            )?;
            out.json(
                "verdict.json",
                &json!({
                    "preset": preset.name(),
                    "samples": n,
                    "raw": {"pass": report.raw.pass, "max_z": report.raw.max_z, "z_critical": report.raw.z_critical, "tested": report.raw.tested},
                    "normalized": {"pass": report.normalized.pass, "max_z": report.normalized.max_z, "z_critical": report.normalized.z_critical, "tested": report.normalized.tested},
                    "scan": report.scan,
                    "normalizers": report.normalizers,
                    "excluded": report.excluded,
                    "warnings": report.warnings,
                }),
            )?;
            // Only the isotropic preset should survive the raw test.
            let raw_ok = matches!(preset, Preset::ComplexGaussian);
            let raw = Criterion {
                criterion: if raw_ok { "raw_moments_pass" } else { "raw_moments_rejected" }.into(),
                value: report.raw.max_z,
                threshold: report.raw.z_critical,
                pass: report.raw.pass == raw_ok,
            };
            let mut criteria = vec![
                raw,
                Criterion::at_most("normalized_moments_pass", report.normalized.max_z, report.normalized.z_critical),
                Criterion::at_most("projection_scan", report.scan.max_distance, report.scan.threshold),
            ];
            if matches!(preset, Preset::Ray) {
                criteria.push(Criterion::holds("degenerate_coordinate_excluded", report.excluded == vec![0]));
            }
            Ok(criteria)
        }
        Preset::TorusComplementary | Preset::TorusPrincipal => {
            let (observable, specs, points) = if matches!(preset, Preset::TorusComplementary) {
                (
                    SpectralObservable::single_real(0.5, Complex64::from_polar(1.0, std::f64::consts::PI / 32.0))?,
                    vec![field(FieldLaw::Arcsine, 1.0, 0.0)],
                    theta_grid(1, thetas),
                )
            } else {
                (
                    SpectralObservable::conjugated(&[
                        (CasimirParameter::from_mu(1.0)?, Complex64::new(1.0, 0.0)),
                        (CasimirParameter::from_mu(3.0)?, Complex64::new(1.0, 0.0)),
                    ])?,
                    vec![field(FieldLaw::Arcsine, 4.0, 1.0), field(FieldLaw::Arcsine, 1.0, 4.0)],
                    theta_grid(2, per_axis),
                )
            };
            let fields: Vec<Vec<Complex64>> = specs
                .iter()
                .enumerate()
                .map(|(s, spec)| synthetic_field(spec, n, derive_seed(seed, 300 + s as u64)))
                .collect();
            let scan = theta_scan(&observable, &fields, &points)?;
            let base: Vec<Vec<f64>> = points.iter().step_by((points.len() / 4).max(1)).cloned().collect();
            let lipschitz = lipschitz_estimate(&observable, &fields, &base, 1e-3)?;
            let first = torus_distribution(&observable, &fields, &TorusPoint::Angles(points[0].clone()))
                .context("torus distribution at the first grid point")?;
            out.csv(
                "distribution.csv",
                &["value"],
                &first.values().iter().map(|v| vec![fmt(*v)]).collect::<Vec<_>>(),
            )?;
            out.json(
                "verdict.json",
                &json!({
                    "preset": preset.name(),
                    "samples": n,
                    "points": scan.points.len(),
                    "max_pairwise": scan.max_pairwise,
                    "noise_floor": scan.noise_floor,
                    "ratio": scan.max_pairwise / scan.noise_floor,
                    "lipschitz_estimate": lipschitz,
                    "max_abs_sample": scan.max_abs_sample,
                }),
            )?;
            eprintln!(
                "[limit-lab] lipschitz estimate {lipschitz:.4}, max |sample| {:.4}",
                scan.max_abs_sample.iter().copied().fold(0.0, f64::max)
            );
            let r = scan.max_pairwise / scan.noise_floor;
            Ok(vec![if matches!(preset, Preset::TorusComplementary) {
                Criterion::at_most("theta_scan_flat", r, ratio)
            } else {
                Criterion::at_least("theta_scan_varies", r, ratio)
            }])
        }
    }
}
