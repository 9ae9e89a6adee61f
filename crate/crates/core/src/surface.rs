//! The Bolza surface: the genus-2 quotient of the disk by the group pairing
//! opposite sides of the regular octagon with interior angles π/4.
//!
//! Side `k` of the octagon is centred on the ray at angle `kπ/4`; vertex
//! `j` sits at angle `(2j+1)π/8`, on sides `j` and `j+1`. Generator `G_k`
//! is the hyperbolic translation of length `2·r_in` along the ray through
//! side `k`; it maps side `k+4` onto side `k`, hence the octagon onto its
//! neighbour across side `k`, and `G_{k+4} = G_k⁻¹`.

use std::f64::consts::{FRAC_PI_4, FRAC_PI_8, PI, SQRT_2, TAU};

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::quad::{integrate_real, QuadConfig};
use crate::rng::stream_rng;
use crate::sl2core::{cosh_distance, DiskPoint, Flow, GroupElement};
use crate::stats::mean_and_stderr;

/// Number of side-pairing generators.
pub const GENERATORS: usize = 8;

/// Step cap for [`FuchsianGroup::reduce`].
pub const REDUCTION_STEP_CAP: usize = 1_000_000;

/// Hard gate on the relator residual at construction time.
pub const RELATOR_TOLERANCE: f64 = 1e-9;

/// Hyperbolic area of the octagon, `6π - 2π`.
pub const OCTAGON_AREA: f64 = 4.0 * PI;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SurfaceError {
    #[error("relator {word:?} evaluates to ±I only up to {residual:e}")]
    RelatorCheck { word: Vec<usize>, residual: f64 },
    #[error("vertex-cycle tracking failed: {0}")]
    VertexCycle(String),
    #[error("reduction exceeded {cap} steps (|entries| ≈ {norm:e})")]
    ReductionFailure { cap: usize, norm: f64 },
    #[error("bump of radius {radius} around {center} leaves the fundamental domain (clearance {clearance})")]
    SupportOutsideDomain {
        center: Complex64,
        radius: f64,
        clearance: f64,
    },
    #[error("unknown surface '{0}'")]
    UnknownSurface(String),
}

/// Result of reducing a group element into the fundamental domain.
#[derive(Debug, Clone, PartialEq)]
pub struct Reduction {
    /// Representative whose base point lies in the closed octagon.
    pub element: GroupElement,
    /// Generators applied on the left, in order: `element = G_{w_m}···G_{w_1} g`.
    pub word: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct FuchsianGroup {
    generators: [GroupElement; GENERATORS],
    su11: [(Complex64, Complex64); GENERATORS],
    side_centers: [Complex64; GENERATORS],
    side_radius_sq: f64,
    vertices: [Complex64; GENERATORS],
    relator: Vec<usize>,
    relator_residual: f64,
    circumradius: f64,
    inradius: f64,
}

/// Circumradius `R` of the octagon: `cosh R = cot²(π/8) = 3 + 2√2`.
pub fn bolza_circumradius() -> f64 {
    (3.0 + 2.0 * SQRT_2).acosh()
}

/// Inradius: `cosh r_in = cot(π/8) = 1 + √2` (leg of the (π/8, π/8, π/2) triangle).
pub fn bolza_inradius() -> f64 {
    (1.0 + SQRT_2).acosh()
}

/// Selects a surface by its configuration name.
pub fn surface_by_name(name: &str) -> Result<FuchsianGroup, SurfaceError> {
    match name {
        "bolza" => bolza_group(),
        other => Err(SurfaceError::UnknownSurface(other.to_string())),
    }
}

pub fn bolza_group() -> Result<FuchsianGroup, SurfaceError> {
    let circumradius = bolza_circumradius();
    let inradius = bolza_inradius();
    let translation = Flow::Geodesic.exp(2.0 * inradius);
    let generators: [GroupElement; GENERATORS] = std::array::from_fn(|k| {
        let phi = k as f64 * FRAC_PI_4;
        (GroupElement::rotation(phi) * translation * GroupElement::rotation(-phi)).renormalized()
    });
    let su11 = std::array::from_fn(|k| generators[k].to_su11());

    let m = (0.5 * inradius).tanh();
    let center_dist = (1.0 + m * m) / (2.0 * m);
    let side_radius = (1.0 - m * m) / (2.0 * m);
    let side_centers =
        std::array::from_fn(|k| Complex64::from_polar(center_dist, k as f64 * FRAC_PI_4));
    let vr = (0.5 * circumradius).tanh();
    let vertices =
        std::array::from_fn(|j| Complex64::from_polar(vr, (2 * j + 1) as f64 * FRAC_PI_8));

    let mut group = FuchsianGroup {
        generators,
        su11,
        side_centers,
        side_radius_sq: side_radius * side_radius,
        vertices,
        relator: Vec::new(),
        relator_residual: f64::INFINITY,
        circumradius,
        inradius,
    };
    let relator = group.track_vertex_cycle()?;
    let product = group.word_product(&relator);
    let residual = product.distance(&GroupElement::IDENTITY);
    if residual > RELATOR_TOLERANCE {
        return Err(SurfaceError::RelatorCheck {
            word: relator,
            residual,
        });
    }
    group.relator = relator;
    group.relator_residual = residual;
    Ok(group)
}

impl FuchsianGroup {
    pub fn generator(&self, k: usize) -> &GroupElement {
        &self.generators[k % GENERATORS]
    }

    pub fn generators(&self) -> &[GroupElement; GENERATORS] {
        &self.generators
    }

    /// Relator determined by walking the tiles around vertex 0.
    pub fn relator(&self) -> &[usize] {
        &self.relator
    }

    /// `‖relator - (±I)‖_max` measured at construction.
    pub fn relator_residual(&self) -> f64 {
        self.relator_residual
    }

    pub fn circumradius(&self) -> f64 {
        self.circumradius
    }

    pub fn inradius(&self) -> f64 {
        self.inradius
    }

    /// Translation length of every generator.
    pub fn translation_length(&self) -> f64 {
        2.0 * self.inradius
    }

    pub fn vertices(&self) -> Vec<DiskPoint> {
        self.vertices
            .iter()
            .map(|&v| DiskPoint::new(v).expect("vertices lie inside the disk"))
            .collect()
    }

    /// Euclidean radius of the vertices in the disk model.
    pub fn vertex_radius(&self) -> f64 {
        (0.5 * self.circumradius).tanh()
    }

    /// Ordered product `G_{w_1} G_{w_2} ··· G_{w_m}`.
    pub fn word_product(&self, word: &[usize]) -> GroupElement {
        word.iter().fold(GroupElement::IDENTITY, |acc, &k| {
            acc * self.generators[k % GENERATORS]
        })
    }

    /// The element `γ` with `g = γ · reduce(g).element`.
    pub fn word_element(&self, word: &[usize]) -> GroupElement {
        word.iter().fold(GroupElement::IDENTITY, |acc, &k| {
            acc * self.generators[(k + 4) % GENERATORS]
        })
    }

    fn track_vertex_cycle(&self) -> Result<Vec<usize>, SurfaceError> {
        let v0 = self.vertices[0];
        let mut tile = GroupElement::IDENTITY;
        let mut side = 0usize;
        let mut word = Vec::new();
        for _ in 0..2 * GENERATORS {
            word.push(side);
            tile = tile * self.generators[side];
            if tile.distance(&GroupElement::IDENTITY) < 1e-6 {
                return Ok(word);
            }
            let (alpha, beta) = tile.inverse().to_su11();
            let w = (alpha * v0 + beta) / (beta.conj() * v0 + alpha.conj());
            let (j, err) = self
                .vertices
                .iter()
                .enumerate()
                .map(|(j, v)| (j, (v - w).norm()))
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .expect("eight vertices");
            if err > 1e-8 {
                return Err(SurfaceError::VertexCycle(format!(
                    "vertex image {w} matches no octagon vertex (nearest {j}, gap {err:e})"
                )));
            }
            let entered = (side + 4) % GENERATORS;
            let sides_at_vertex = [j, (j + 1) % GENERATORS];
            side = match sides_at_vertex.iter().find(|&&s| s != entered) {
                Some(&s) if sides_at_vertex.contains(&entered) => s,
                _ => {
                    return Err(SurfaceError::VertexCycle(format!(
                        "vertex {j} is not on the entered side {entered}"
                    )))
                }
            };
        }
        Err(SurfaceError::VertexCycle(
            "tile walk around vertex 0 did not close".into(),
        ))
    }

    /// Membership in the closed octagon (the Dirichlet domain at 0).
    pub fn contains(&self, z: DiskPoint) -> bool {
        self.contains_raw(z.z(), 1e-12)
    }

    #[inline]
    fn contains_raw(&self, z: Complex64, slack: f64) -> bool {
        self.side_centers
            .iter()
            .all(|c| (z - c).norm_sqr() >= self.side_radius_sq * (1.0 - slack))
    }

    /// Hyperbolic distance from `z` to side `k`, positive inside the octagon.
    ///
    /// Side `k` is the perpendicular bisector of 0 and `G_k(0)`, so
    /// `sinh(dist) = (cosh d(z, G_k 0) − cosh d(z, 0)) / (2 sinh r_in)`.
    pub fn signed_side_distance(&self, z: DiskPoint, k: usize) -> f64 {
        let p = self.generators[k % GENERATORS].base_point().z();
        let num = cosh_distance(z.z(), p) - cosh_distance(z.z(), Complex64::new(0.0, 0.0));
        (num / (2.0 * self.inradius.sinh())).asinh()
    }

    /// Smallest signed distance from `z` to the sides.
    pub fn clearance(&self, z: DiskPoint) -> f64 {
        (0..GENERATORS)
            .map(|k| self.signed_side_distance(z, k))
            .fold(f64::INFINITY, f64::min)
    }

    #[inline]
    fn best_generator(&self, z: Complex64) -> Option<(usize, f64)> {
        let current = z.norm_sqr();
        let mut best: Option<(usize, f64)> = None;
        for (k, (alpha, beta)) in self.su11.iter().enumerate() {
            let w = (alpha * z + beta) / (beta.conj() * z + alpha.conj());
            let r = w.norm_sqr();
            // Ties keep the lowest index.
            if r < current * (1.0 - 1e-14) && best.is_none_or(|(_, b)| r < b) {
                best = Some((k, r));
            }
        }
        best
    }

    /// Greedy reduction into the fundamental domain, recording the word.
    pub fn reduce(&self, g: &GroupElement) -> Result<Reduction, SurfaceError> {
        let mut cur = *g;
        let mut word = Vec::new();
        loop {
            let z = cur.base_point_raw();
            if self.contains_raw(z, 0.0) {
                break;
            }
            match self.best_generator(z) {
                Some((k, _)) => {
                    cur = self.generators[k] * cur;
                    word.push(k);
                    if word.len() % 64 == 0 {
                        cur = cur.renormalized();
                    }
                    if word.len() > REDUCTION_STEP_CAP {
                        return Err(SurfaceError::ReductionFailure {
                            cap: REDUCTION_STEP_CAP,
                            norm: cur.max_abs_entry(),
                        });
                    }
                }
                None => break,
            }
        }
        Ok(Reduction {
            element: cur,
            word,
        })
    }

    /// Reduction without word bookkeeping; returns the number of steps.
    #[inline]
    pub fn reduce_in_place(&self, g: &mut GroupElement) -> Result<usize, SurfaceError> {
        let mut steps = 0usize;
        loop {
            let z = g.base_point_raw();
            if self.contains_raw(z, 0.0) {
                return Ok(steps);
            }
            match self.best_generator(z) {
                Some((k, _)) => {
                    *g = self.generators[k] * *g;
                    steps += 1;
                    if steps.is_multiple_of(64) {
                        *g = g.renormalized();
                    }
                    if steps > REDUCTION_STEP_CAP {
                        return Err(SurfaceError::ReductionFailure {
                            cap: REDUCTION_STEP_CAP,
                            norm: g.max_abs_entry(),
                        });
                    }
                }
                None => return Ok(steps),
            }
        }
    }

    /// Haar-random point of Γ\PSL(2,ℝ) for sample `index` of run `seed`:
    /// base point uniform for hyperbolic area on the octagon, frame angle
    /// uniform on `[0, 2π)`.
    pub fn sample_point(&self, seed: u64, index: u64) -> GroupElement {
        let mut rng = stream_rng(seed, index);
        let rv = self.vertex_radius();
        let floor = 1.0 - rv * rv;
        loop {
            let z = Complex64::new(rng.random_range(-rv..rv), rng.random_range(-rv..rv));
            let r2 = z.norm_sqr();
            if r2 >= rv * rv || !self.contains_raw(z, 0.0) {
                continue;
            }
            let accept = floor / (1.0 - r2);
            if rng.random::<f64>() < accept * accept {
                let angle = rng.random_range(0.0..TAU);
                return GroupElement::from_disk_frame(
                    DiskPoint::new(z).expect("inside the disk"),
                    angle,
                );
            }
        }
    }

    /// Monte Carlo estimate of the octagon's hyperbolic area with its
    /// standard error, from `n` uniform draws in the circumscribed disk.
    pub fn area_monte_carlo(&self, n: usize, seed: u64) -> (f64, f64) {
        let rv = self.vertex_radius();
        let weights: Vec<f64> = (0..n as u64)
            .into_par_iter()
            .map(|i| {
                let mut rng = stream_rng(seed, i);
                let r = rv * rng.random::<f64>().sqrt();
                let z = Complex64::from_polar(r, rng.random_range(0.0..TAU));
                if self.contains_raw(z, 0.0) {
                    let s = 2.0 / (1.0 - r * r);
                    s * s
                } else {
                    0.0
                }
            })
            .collect();
        let (m, se) = mean_and_stderr(&weights);
        let disk = PI * rv * rv;
        (m * disk, se * disk)
    }
}

/// Observable profile `f(g) = amplitude · φ(d(g·0, c)/ρ) · cos(n θ(g)) − offset`,
/// with `φ(s) = exp(1 − 1/(1 − s²))` on `s < 1`, evaluated on the reduced
/// representative of `g`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Observable {
    center: DiskPoint,
    radius: f64,
    mode: i32,
    amplitude: f64,
    mean_offset: f64,
    #[serde(skip)]
    cosh_radius: f64,
}

impl Observable {
    /// Bump with an explicit mean offset; the support must stay inside the octagon.
    pub fn new(
        group: &FuchsianGroup,
        center: DiskPoint,
        radius: f64,
        mode: i32,
        mean_offset: f64,
    ) -> Result<Self, SurfaceError> {
        let clearance = group.clearance(center);
        if !(radius > 0.0) || clearance <= radius {
            return Err(SurfaceError::SupportOutsideDomain {
                center: center.z(),
                radius,
                clearance,
            });
        }
        Ok(Self {
            center,
            radius,
            mode,
            amplitude: 1.0,
            mean_offset,
            cosh_radius: radius.cosh(),
        })
    }

    /// Bump whose offset is the exact surface average, so the result has zero mean.
    pub fn calibrated(
        group: &FuchsianGroup,
        center: DiskPoint,
        radius: f64,
        mode: i32,
    ) -> Result<Self, SurfaceError> {
        let mut obs = Self::new(group, center, radius, mode, 0.0)?;
        obs.mean_offset = obs.exact_bump_mean();
        Ok(obs)
    }

    /// The identically zero observable (used to exercise degenerate fits).
    pub fn zero(group: &FuchsianGroup) -> Self {
        let mut obs = Self::new(group, DiskPoint::ORIGIN, 0.5, 0, 0.0)
            .expect("a radius-0.5 bump at the centre fits");
        obs.amplitude = 0.0;
        obs
    }

    pub fn center(&self) -> DiskPoint {
        self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn mode(&self) -> i32 {
        self.mode
    }

    pub fn mean_offset(&self) -> f64 {
        self.mean_offset
    }

    fn profile(s: f64) -> f64 {
        if s >= 1.0 {
            0.0
        } else {
            (1.0 - 1.0 / (1.0 - s * s)).exp()
        }
    }

    /// Surface average of the bump part, from the radial area element
    /// `2π sinh r dr` over the total area 4π (zero for angular modes).
    pub fn exact_bump_mean(&self) -> f64 {
        if self.mode != 0 || self.amplitude == 0.0 {
            return 0.0;
        }
        let rho = self.radius;
        let mass = integrate_real(
            |r| Self::profile(r / rho) * r.sinh(),
            0.0,
            rho,
            &[],
            &QuadConfig::with_rel_tol(1e-13),
        )
        .expect("smooth radial integrand");
        self.amplitude * 2.0 * PI * mass / OCTAGON_AREA
    }

    /// Evaluation on an element already reduced into the octagon.
    #[inline]
    pub fn eval_reduced(&self, r: &GroupElement) -> f64 {
        let z = r.base_point_raw();
        let ch = cosh_distance(z, self.center.z());
        if ch >= self.cosh_radius || self.amplitude == 0.0 {
            return -self.mean_offset;
        }
        let s = ch.acosh() / self.radius;
        let angular = if self.mode == 0 {
            1.0
        } else {
            (self.mode as f64 * r.frame_angle()).cos()
        };
        self.amplitude * Self::profile(s) * angular - self.mean_offset
    }

    /// Evaluation at an arbitrary element; Γ-invariant through reduction.
    pub fn eval(&self, group: &FuchsianGroup, g: &GroupElement) -> Result<f64, SurfaceError> {
        let mut r = *g;
        group.reduce_in_place(&mut r)?;
        Ok(self.eval_reduced(&r))
    }
}

/// Monte Carlo volume average with standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanEstimate {
    pub mean: f64,
    pub stderr: f64,
}

pub fn surface_mean(group: &FuchsianGroup, obs: &Observable, n: usize, seed: u64) -> MeanEstimate {
    let values: Vec<f64> = (0..n as u64)
        .into_par_iter()
        .map(|i| obs.eval_reduced(&group.sample_point(seed, i)))
        .collect();
    let (mean, stderr) = mean_and_stderr(&values);
    MeanEstimate { mean, stderr }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sl2core::{hyperbolic_distance, mobius};
    use rand::Rng;

    fn group() -> FuchsianGroup {
        bolza_group().expect("Bolza group builds")
    }

    /// Hyperbolic trigonometry of the right triangle with angles A, B:
    /// the hypotenuse satisfies cosh c = cot A cot B and the leg adjacent
    /// to A satisfies cosh b = cos B / sin A.
    fn right_triangle(a: f64, b: f64) -> (f64, f64) {
        let hyp = (1.0 / (a.tan() * b.tan())).acosh();
        let leg = (b.cos() / a.sin()).acosh();
        (hyp, leg)
    }

    /// Interior angle at `v` between the geodesics `v→p` and `v→q`.
    fn geodesic_angle(v: Complex64, p: Complex64, q: Complex64) -> f64 {
        let tangent = |from: Complex64, to: Complex64| {
            // Move `from` to the origin; geodesics through 0 are diameters.
            let w = (to - from) / (Complex64::new(1.0, 0.0) - from.conj() * to);
            w / w.norm()
        };
        let t1 = tangent(v, p);
        let t2 = tangent(v, q);
        (t1.conj() * t2).arg().abs()
    }

    #[test]
    fn radii_match_triangle_oracle() {
        let (hyp, leg) = right_triangle(FRAC_PI_8, FRAC_PI_8);
        assert!((bolza_circumradius() - hyp).abs() < 1e-14);
        assert!((bolza_inradius() - leg).abs() < 1e-14);
        assert!((bolza_circumradius() - (3.0 + 2.0 * SQRT_2).acosh()).abs() < 1e-15);
    }

    #[test]
    fn octagon_angles_are_quarter_turns() {
        let g = group();
        let v = g.vertices;
        for j in 0..8 {
            let angle = geodesic_angle(v[j], v[(j + 7) % 8], v[(j + 1) % 8]);
            assert!((angle - FRAC_PI_4).abs() < 1e-12, "vertex {j}: {angle}");
        }
    }

    #[test]
    fn side_midpoint_distance_by_metric_quadrature() {
        // r_in = ∫_0^m 2/(1-r²) dr with m the Euclidean radius of the side midpoint.
        let g = group();
        let side = g.side_centers[0].norm() - g.side_radius_sq.sqrt();
        let by_quadrature = integrate_real(
            |r| 2.0 / (1.0 - r * r),
            0.0,
            side,
            &[],
            &QuadConfig::with_rel_tol(1e-13),
        )
        .unwrap();
        assert!((by_quadrature - g.inradius()).abs() < 1e-12);
        // The side through the midpoint passes through the adjacent vertices.
        for j in [7usize, 0] {
            let d = (g.vertices[j] - g.side_centers[0]).norm_sqr();
            assert!((d - g.side_radius_sq).abs() < 1e-12);
        }
    }

    #[test]
    fn relator_is_identity() {
        let g = group();
        assert_eq!(g.relator().len(), 8);
        assert!(g.relator_residual() <= RELATOR_TOLERANCE);
        let p = g.word_product(g.relator());
        assert!(p.distance(&GroupElement::IDENTITY) < 1e-9);
    }

    #[test]
    fn inverse_pairing() {
        let g = group();
        for k in 0..4 {
            let p = *g.generator(k) * *g.generator(k + 4);
            assert!(p.distance(&GroupElement::IDENTITY) < 1e-13);
        }
    }

    #[test]
    fn generator_images_of_center_are_adjacent() {
        let g = group();
        let images: Vec<DiskPoint> = (0..8).map(|k| g.generator(k).base_point()).collect();
        for (k, p) in images.iter().enumerate() {
            let d = hyperbolic_distance(DiskPoint::ORIGIN, *p);
            assert!((d - 2.0 * g.inradius()).abs() < 1e-12, "generator {k}");
            assert!(!g.contains(*p));
            for q in &images[k + 1..] {
                assert!(hyperbolic_distance(*p, *q) > 0.0);
            }
        }
    }

    #[test]
    fn reduce_identity_and_generator() {
        let g = group();
        let r = g.reduce(&GroupElement::IDENTITY).unwrap();
        assert!(r.word.is_empty());
        assert_eq!(r.element, GroupElement::IDENTITY);
        let r = g.reduce(g.generator(0)).unwrap();
        assert_eq!(r.word, vec![4]);
        assert!(r.element.distance(&GroupElement::IDENTITY) < 1e-13);
    }

    #[test]
    fn reduce_recovers_decomposition_and_is_idempotent() {
        let grp = group();
        let mut rng = stream_rng(11, 0);
        for i in 0..200 {
            let x = grp.sample_point(3, i);
            let len = rng.random_range(1..12);
            let word: Vec<usize> = (0..len).map(|_| rng.random_range(0..8)).collect();
            let g = grp.word_product(&word) * x;
            let red = grp.reduce(&g).unwrap();
            assert!(grp.contains(red.element.base_point()));
            let rebuilt = grp.word_element(&red.word) * red.element;
            assert!(rebuilt.distance(&g) < 1e-9 * (1.0 + g.max_abs_entry()));
            let again = grp.reduce(&red.element).unwrap();
            assert!(again.word.is_empty());
            assert_eq!(again.element, red.element);
        }
    }

    #[test]
    fn area_by_monte_carlo() {
        let (area, se) = group().area_monte_carlo(100_000, 5);
        assert!((area - OCTAGON_AREA).abs() < 0.01 * OCTAGON_AREA, "{area} ± {se}");
        assert!((area - OCTAGON_AREA).abs() < 4.0 * se);
    }

    #[test]
    fn sampling_is_deterministic_and_inside() {
        let g = group();
        assert_eq!(g.sample_point(9, 17), g.sample_point(9, 17));
        assert_ne!(g.sample_point(9, 17), g.sample_point(9, 18));
        for i in 0..100 {
            assert!(g.contains(g.sample_point(1, i).base_point()));
        }
    }

    #[test]
    fn subdisk_mass_matches_area_fraction() {
        let grp = group();
        let center = DiskPoint::new(Complex64::new(0.2, -0.1)).unwrap();
        let rho = 0.7;
        // Area of a hyperbolic disk by quadrature of the area form.
        let sub_area = integrate_real(
            |r| 2.0 * PI * r.sinh(),
            0.0,
            rho,
            &[],
            &QuadConfig::with_rel_tol(1e-12),
        )
        .unwrap();
        let p = sub_area / OCTAGON_AREA;
        let n = 100_000u64;
        let hits = (0..n)
            .into_par_iter()
            .filter(|&i| hyperbolic_distance(grp.sample_point(21, i).base_point(), center) < rho)
            .count() as f64;
        let sigma = (p * (1.0 - p) / n as f64).sqrt();
        assert!((hits / n as f64 - p).abs() < 3.0 * sigma, "{} vs {p}", hits / n as f64);
    }

    #[test]
    fn sample_mean_position_is_central() {
        let grp = group();
        let n = 100_000u64;
        let pts: Vec<Complex64> = (0..n)
            .into_par_iter()
            .map(|i| grp.sample_point(4, i).base_point().z())
            .collect();
        let re: Vec<f64> = pts.iter().map(|z| z.re).collect();
        let im: Vec<f64> = pts.iter().map(|z| z.im).collect();
        let (mr, sr) = mean_and_stderr(&re);
        let (mi, si) = mean_and_stderr(&im);
        assert!(mr.abs() < 3.0 * sr && mi.abs() < 3.0 * si);
    }

    #[test]
    fn observable_support_check() {
        let g = group();
        let c = DiskPoint::new(Complex64::new(0.5, 0.0)).unwrap();
        assert!(matches!(
            Observable::new(&g, c, 1.0, 0, 0.0),
            Err(SurfaceError::SupportOutsideDomain { .. })
        ));
        assert!(Observable::new(&g, DiskPoint::ORIGIN, 1.4, 0, 0.0).is_ok());
    }

    #[test]
    fn observable_off_support_value() {
        let g = group();
        let obs = Observable::new(&g, DiskPoint::ORIGIN, 0.5, 0, 0.125).unwrap();
        let far = GroupElement::from_disk_frame(DiskPoint::new(Complex64::new(0.0, 0.6)).unwrap(), 1.0);
        assert_eq!(obs.eval(&g, &far).unwrap(), -0.125);
    }

    #[test]
    fn observable_is_gamma_invariant() {
        let grp = group();
        let obs = Observable::calibrated(
            &grp,
            DiskPoint::new(Complex64::new(0.25, 0.1)).unwrap(),
            0.6,
            2,
        )
        .unwrap();
        let mut rng = stream_rng(2, 0);
        for i in 0..1000 {
            let x = grp.sample_point(8, i);
            let len = rng.random_range(1..=5);
            let word: Vec<usize> = (0..len).map(|_| rng.random_range(0..8)).collect();
            let gx = grp.word_product(&word) * x;
            let diff = obs.eval(&grp, &gx).unwrap() - obs.eval(&grp, &x).unwrap();
            assert!(diff.abs() < 1e-9, "{diff}");
        }
    }

    #[test]
    fn calibrated_means_vanish() {
        let grp = group();
        for mode in [0, 1, 3] {
            let obs = Observable::calibrated(
                &grp,
                DiskPoint::new(Complex64::new(-0.1, 0.2)).unwrap(),
                0.8,
                mode,
            )
            .unwrap();
            let m = surface_mean(&grp, &obs, 100_000, 6);
            assert!(m.mean.abs() < 3.5 * m.stderr, "mode {mode}: {m:?}");
        }
    }

    #[test]
    fn reduction_steps_scale_with_distance() {
        let grp = group();
        let mut worst: f64 = 0.0;
        for i in 0..200u64 {
            let t = 1.0 + (i % 20) as f64;
            let g = grp.sample_point(12, i) * Flow::Geodesic.exp(t);
            let d = hyperbolic_distance(g.base_point(), DiskPoint::ORIGIN);
            let mut r = g;
            let steps = grp.reduce_in_place(&mut r).unwrap();
            worst = worst.max(steps as f64 / (1.0 + d));
        }
        eprintln!("reduction steps / (1 + d) <= {worst}");
        assert!(worst < 10.0);
    }

    #[test]
    fn mobius_images_of_generators_match_note() {
        // G_0 moves the origin along the positive real axis by 2 r_in.
        let g = group();
        let z = mobius(g.generator(0), DiskPoint::ORIGIN).z();
        assert!((z.re - g.inradius().tanh()).abs() < 1e-14 && z.im.abs() < 1e-14);
    }
}
