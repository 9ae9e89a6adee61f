//! Empirical distributions, the Lévy metric, torus distributions of
//! normalized cocycle sums and moment tests for rotational symmetry.

use std::f64::consts::{SQRT_2, TAU};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};
use thiserror::Error;

use crate::renorm::SpectralObservable;
use crate::rng::stream_rng;
use crate::stats::{mean, mean_and_stderr, pairwise_sum};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DistError {
    #[error("empirical distribution needs at least one sample")]
    Empty,
    #[error("sample {index} is not finite ({value})")]
    NonFinite { index: usize, value: f64 },
    #[error("weight {index} = {value} must be positive and finite")]
    BadWeight { index: usize, value: f64 },
    #[error("{samples} samples but {weights} weights")]
    LengthMismatch { samples: usize, weights: usize },
    #[error("normalizing constant {norm:e} is below the statistical floor")]
    DegenerateNorm { norm: f64 },
    #[error("spectrum has {entries} entries but {fields} fields were supplied")]
    MissingField { entries: usize, fields: usize },
    #[error("{0}")]
    Invalid(String),
}

/// Weighted point masses on ℝ with step CDF queries.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalDistribution {
    samples: Vec<f64>,
    weights: Option<Vec<f64>>,
    atoms: Vec<f64>,
    /// `cum[k] = P(X ≤ atoms[k])`; the last entry is exactly 1.
    cum: Vec<f64>,
}

impl EmpiricalDistribution {
    pub fn new(samples: Vec<f64>) -> Result<Self, DistError> {
        Self::build(samples, None)
    }

    /// Weights are renormalised to total mass one.
    pub fn with_weights(samples: Vec<f64>, weights: Vec<f64>) -> Result<Self, DistError> {
        if samples.len() != weights.len() {
            return Err(DistError::LengthMismatch {
                samples: samples.len(),
                weights: weights.len(),
            });
        }
        if let Some((index, &value)) = weights
            .iter()
            .enumerate()
            .find(|(_, w)| !(**w > 0.0) || !w.is_finite())
        {
            return Err(DistError::BadWeight { index, value });
        }
        let total = pairwise_sum(&weights);
        let weights = weights.iter().map(|w| w / total).collect();
        Self::build(samples, Some(weights))
    }

    fn build(samples: Vec<f64>, weights: Option<Vec<f64>>) -> Result<Self, DistError> {
        if samples.is_empty() {
            return Err(DistError::Empty);
        }
        if let Some((index, &value)) = samples.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(DistError::NonFinite { index, value });
        }
        let mut order: Vec<usize> = (0..samples.len()).collect();
        order.sort_unstable_by(|&i, &j| samples[i].total_cmp(&samples[j]));
        let n = samples.len();
        let mut atoms = Vec::new();
        let mut cum = Vec::new();
        let mut mass = 0.0;
        let mut count = 0usize;
        for (pos, &i) in order.iter().enumerate() {
            count += 1;
            if let Some(w) = &weights {
                mass += w[i];
            }
            let last_of_atom = pos + 1 == n || samples[order[pos + 1]] != samples[i];
            if last_of_atom {
                atoms.push(samples[i]);
                cum.push(if weights.is_some() {
                    mass
                } else {
                    count as f64 / n as f64
                });
            }
        }
        *cum.last_mut().expect("nonempty") = 1.0;
        Ok(Self {
            samples,
            weights,
            atoms,
            cum,
        })
    }

    /// Samples in their original order.
    pub fn values(&self) -> &[f64] {
        &self.samples
    }

    pub fn weights(&self) -> Option<&[f64]> {
        self.weights.as_deref()
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Distinct support points, increasing.
    pub fn atoms(&self) -> &[f64] {
        &self.atoms
    }

    /// `F(x) = P(X ≤ x)`.
    #[inline]
    pub fn cdf(&self, x: f64) -> f64 {
        let k = self.atoms.partition_point(|&a| a <= x);
        if k == 0 {
            0.0
        } else {
            self.cum[k - 1]
        }
    }

    fn weight(&self, i: usize) -> f64 {
        match &self.weights {
            Some(w) => w[i],
            None => 1.0 / self.samples.len() as f64,
        }
    }

    /// `E[g(X)]`.
    pub fn expectation<F: Fn(f64) -> f64>(&self, g: F) -> f64 {
        let terms: Vec<f64> = (0..self.samples.len())
            .map(|i| self.weight(i) * g(self.samples[i]))
            .collect();
        pairwise_sum(&terms)
    }

    pub fn mean(&self) -> f64 {
        self.expectation(|x| x)
    }

    pub fn second_moment(&self) -> f64 {
        self.expectation(|x| x * x)
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// The distribution of the even-indexed and odd-indexed samples.
    pub fn split_halves(&self) -> Result<(Self, Self), DistError> {
        if self.samples.len() < 2 {
            return Err(DistError::Invalid("need two samples to split".into()));
        }
        let pick = |parity: usize| -> Result<Self, DistError> {
            let idx: Vec<usize> = (parity..self.samples.len()).step_by(2).collect();
            let s = idx.iter().map(|&i| self.samples[i]).collect();
            match &self.weights {
                None => Self::new(s),
                Some(w) => Self::with_weights(s, idx.iter().map(|&i| w[i]).collect()),
            }
        };
        Ok((pick(0)?, pick(1)?))
    }
}

/// `max_i [F(a_i) − G(a_i + ε)]` over the atoms `a_i` of `F`, floored at 0.
fn one_sided_gap(f: &EmpiricalDistribution, g: &EmpiricalDistribution, eps: f64) -> f64 {
    let mut worst: f64 = 0.0;
    let mut k = 0usize;
    for (a, &fa) in f.atoms.iter().zip(&f.cum) {
        let x = a + eps;
        while k < g.atoms.len() && g.atoms[k] <= x {
            k += 1;
        }
        let gx = if k == 0 { 0.0 } else { g.cum[k - 1] };
        worst = worst.max(fa - gx);
    }
    worst
}

fn levy_gap(p: &EmpiricalDistribution, q: &EmpiricalDistribution, eps: f64) -> f64 {
    one_sided_gap(p, q, eps).max(one_sided_gap(q, p, eps))
}

/// One orientation of the gap, restricted to the atoms of `f` that can
/// still violate feasibility.
struct GapSide<'a> {
    f: &'a EmpiricalDistribution,
    g: &'a EmpiricalDistribution,
    active: Vec<usize>,
}

impl GapSide<'_> {
    fn term(&self, i: usize, eps: f64) -> f64 {
        self.f.cum[i] - self.g.cdf(self.f.atoms[i] + eps)
    }

    fn gap(&self, eps: f64) -> f64 {
        if self.active.len() == self.f.atoms.len() {
            return one_sided_gap(self.f, self.g, eps);
        }
        self.active.iter().map(|&i| self.term(i, eps)).fold(0.0, f64::max)
    }

    /// Drops atoms whose term at `lo` is already `≤ lo`; terms only fall
    /// as `ε` grows, so they stay harmless for every `ε ≥ lo`.
    fn prune(&mut self, lo: f64) {
        let kept: Vec<usize> = if self.active.len() == self.f.atoms.len() {
            let mut k = 0usize;
            let g = self.g;
            (0..self.f.atoms.len())
                .filter(|&i| {
                    let x = self.f.atoms[i] + lo;
                    while k < g.atoms.len() && g.atoms[k] <= x {
                        k += 1;
                    }
                    let gx = if k == 0 { 0.0 } else { g.cum[k - 1] };
                    self.f.cum[i] - gx > lo
                })
                .collect()
        } else {
            self.active.iter().copied().filter(|&i| self.term(i, lo) > lo).collect()
        };
        // a full sweep is cheaper than many binary searches
        if kept.len() * 16 < self.f.atoms.len() {
            self.active = kept;
        }
    }

    /// Jumps of the active terms in `(lo, hi]`: atom differences `b − a`.
    fn differences(&self, lo: f64, hi: f64, cap: usize, out: &mut Vec<f64>) -> bool {
        let ga = &self.g.atoms;
        let mut scan = |a: f64, start: usize| {
            for &b in &ga[start..] {
                let d = b - a;
                if d > hi {
                    break;
                }
                if d > lo {
                    out.push(d);
                }
            }
        };
        if self.active.len() == self.f.atoms.len() {
            let mut start = 0usize;
            for &a in &self.f.atoms {
                while start < ga.len() && ga[start] - a <= lo {
                    start += 1;
                }
                scan(a, start);
            }
        } else {
            for &i in &self.active {
                let a = self.f.atoms[i];
                let start = ga.partition_point(|&b| b - a <= lo);
                scan(a, start);
            }
        }
        out.len() <= cap
    }
}

/// Lévy distance `inf{ε > 0 : F(x−ε)−ε ≤ G(x) ≤ F(x+ε)+ε ∀x}`.
///
/// With `h(ε)` the largest CDF gap at horizontal shift `ε`, the feasible
/// set is `{ε : h(ε) ≤ ε}`, an up-set since `h` is nonincreasing and right
/// continuous. Its jumps sit at atom differences, so after bracketing the
/// infimum only the differences inside the bracket need inspecting.
pub fn levy_distance(p: &EmpiricalDistribution, q: &EmpiricalDistribution) -> f64 {
    let kolmogorov = levy_gap(p, q, 0.0);
    if kolmogorov <= 0.0 {
        return 0.0;
    }
    let mut sides = [
        GapSide { f: p, g: q, active: (0..p.atoms.len()).collect() },
        GapSide { f: q, g: p, active: (0..q.atoms.len()).collect() },
    ];
    let h = |sides: &[GapSide; 2], eps: f64| sides[0].gap(eps).max(sides[1].gap(eps));
    let (mut lo, mut hi) = (0.0f64, kolmogorov.min(1.0));
    let mut candidates = Vec::new();
    for round in 0.. {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if h(&sides, mid) <= mid {
            hi = mid;
        } else {
            lo = mid;
            sides.iter_mut().for_each(|s| s.prune(lo));
        }
        if round >= 8 && round % 2 == 0 {
            candidates.clear();
            if sides.iter().all(|s| s.differences(lo, hi, 4096, &mut candidates)) {
                break;
            }
        }
    }
    candidates.clear();
    for s in &sides {
        s.differences(lo, hi, usize::MAX, &mut candidates);
    }
    candidates.sort_unstable_by(f64::total_cmp);
    candidates.dedup();
    // first feasible candidate; everything before it is infeasible
    let k = candidates.partition_point(|&d| h(&sides, d) > d);
    let prev = if k == 0 { lo } else { candidates[k - 1] };
    let next = candidates.get(k).copied().unwrap_or(hi);
    // h is constant on [prev, next)
    let level = h(&sides, prev);
    if level > prev && level < next {
        level
    } else {
        next
    }
}

/// Lévy distance between the two halves of a sample (Monte Carlo noise scale).
pub fn split_noise_floor(p: &EmpiricalDistribution) -> Result<f64, DistError> {
    let (a, b) = p.split_halves()?;
    Ok(levy_distance(&a, &b))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormalizerKind {
    Regular,
    /// `∫β² ≈ 0`: `θ_β` undefined and `A = B`.
    Isotropic,
    /// `B² ≈ 0`: essentially real after rotation.
    DegenerateB,
}

/// Rotation `R_β` by `θ_β` followed by the axis rescaling `T_{A,B}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AffineNormalizer {
    pub theta: f64,
    pub a: f64,
    pub b: f64,
    pub kind: NormalizerKind,
    /// Sample estimate of `∫β²`.
    pub square_mean: Complex64,
    /// Sample estimate of `‖β‖²`.
    pub norm_sq: f64,
}

impl AffineNormalizer {
    /// `z ↦ Re(e^{iθ}z)/A + i·Im(e^{iθ}z)/B`; `None` when `B = 0`.
    pub fn apply(&self, z: Complex64) -> Option<Complex64> {
        if !(self.b > 0.0) || !(self.a > 0.0) {
            return None;
        }
        let w = Complex64::from_polar(1.0, self.theta) * z;
        Some(Complex64::new(w.re / self.a, w.im / self.b))
    }

    /// `e^{iθ}z` without the rescaling.
    pub fn rotate(&self, z: Complex64) -> Complex64 {
        Complex64::from_polar(1.0, self.theta) * z
    }
}

fn complex_mean_stderr(values: &[Complex64]) -> (Complex64, f64, f64) {
    let re: Vec<f64> = values.iter().map(|v| v.re).collect();
    let im: Vec<f64> = values.iter().map(|v| v.im).collect();
    let (mr, sr) = mean_and_stderr(&re);
    let (mi, si) = mean_and_stderr(&im);
    (Complex64::new(mr, mi), sr, si)
}

pub fn affine_normalizer(samples: &[Complex64]) -> Result<AffineNormalizer, DistError> {
    if samples.len() < 2 {
        return Err(DistError::Empty);
    }
    let squares: Vec<Complex64> = samples.iter().map(|z| z * z).collect();
    let (sq, se_re, se_im) = complex_mean_stderr(&squares);
    let norms: Vec<f64> = samples.iter().map(|z| z.norm_sqr()).collect();
    let (norm_sq, se_norm) = mean_and_stderr(&norms);
    let se_sq = se_re.hypot(se_im);
    let abs_sq = sq.norm();
    let a2 = 0.5 * (norm_sq + abs_sq);
    let b2 = (0.5 * (norm_sq - abs_sq)).max(0.0);
    let (theta, kind, a2, b2) = if abs_sq <= 3.0 * se_sq {
        let iso = 0.5 * norm_sq;
        (0.0, NormalizerKind::Isotropic, iso, iso)
    } else {
        let theta = (-0.5 * sq.arg()).rem_euclid(TAU);
        let kind = if b2 <= 3.0 * 0.5 * (se_norm + se_sq) {
            NormalizerKind::DegenerateB
        } else {
            NormalizerKind::Regular
        };
        (theta, kind, a2, b2)
    };
    Ok(AffineNormalizer {
        theta,
        a: a2.sqrt(),
        b: b2.sqrt(),
        kind,
        square_mean: sq,
        norm_sq,
    })
}

/// One entry of the table of `∫ z^α z̄^β`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentRow {
    pub alpha: Vec<u32>,
    pub beta: Vec<u32>,
    pub estimate: Complex64,
    pub stderr_re: f64,
    pub stderr_im: f64,
}

impl MomentRow {
    pub fn degree(&self) -> u32 {
        self.alpha.iter().chain(&self.beta).sum()
    }
}

fn multi_indices(dim: usize, max_degree: u32) -> Vec<Vec<u32>> {
    let mut out = vec![Vec::new()];
    for _ in 0..dim {
        let mut next = Vec::new();
        for idx in &out {
            let used: u32 = idx.iter().sum();
            for k in 0..=(max_degree - used) {
                let mut v = idx.clone();
                v.push(k);
                next.push(v);
            }
        }
        out = next;
    }
    out.sort_by_key(|v| (v.iter().sum::<u32>(), v.clone()));
    out
}

/// Plug-in estimates of all mixed moments `∫ z^α z̄^β` with `|α| + |β| ≤ max_degree`.
/// `samples[i]` is one point of ℂⁿ.
pub fn mixed_moments(samples: &[Vec<Complex64>], max_degree: u32) -> Result<Vec<MomentRow>, DistError> {
    let dim = match samples.first() {
        None => return Err(DistError::Empty),
        Some(s) => s.len(),
    };
    if samples.iter().any(|s| s.len() != dim) {
        return Err(DistError::Invalid("samples have differing dimensions".into()));
    }
    let indices = multi_indices(2 * dim, max_degree);
    let rows = indices
        .par_iter()
        .map(|ab| {
            let (alpha, beta) = ab.split_at(dim);
            let terms: Vec<Complex64> = samples
                .iter()
                .map(|z| {
                    let mut acc = Complex64::new(1.0, 0.0);
                    for s in 0..dim {
                        acc *= z[s].powu(alpha[s]) * z[s].conj().powu(beta[s]);
                    }
                    acc
                })
                .collect();
            let (estimate, stderr_re, stderr_im) = if samples.len() > 1 {
                complex_mean_stderr(&terms)
            } else {
                (terms[0], f64::INFINITY, f64::INFINITY)
            };
            MomentRow {
                alpha: alpha.to_vec(),
                beta: beta.to_vec(),
                estimate,
                stderr_re,
                stderr_im,
            }
        })
        .collect();
    Ok(rows)
}

/// Aggregate decision over the off-diagonal (`α ≠ β`) moments.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentVerdict {
    pub pass: bool,
    pub z_critical: f64,
    pub tested: usize,
    /// Largest `|estimate| / stderr` over tested components.
    pub max_z: f64,
    /// Lowest-degree violating moment, if any.
    pub first_violation: Option<MomentRow>,
    pub rows: Vec<MomentCheck>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentCheck {
    #[serde(flatten)]
    pub row: MomentRow,
    pub pass: bool,
}

/// Critical `z` for `components` simultaneous two-sided tests at `significance`:
/// the Bonferroni normal quantile, never below 3.
pub fn critical_z(components: usize, significance: f64) -> f64 {
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    let q = normal.inverse_cdf(1.0 - significance / (2.0 * components.max(1) as f64));
    q.max(3.0)
}

fn component_z(value: f64, se: f64) -> f64 {
    if se > 0.0 {
        value.abs() / se
    } else if value.abs() <= 1e-12 {
        0.0
    } else {
        f64::INFINITY
    }
}

pub fn moment_verdict(rows: &[MomentRow], significance: f64) -> MomentVerdict {
    let tested: Vec<&MomentRow> = rows.iter().filter(|r| r.alpha != r.beta).collect();
    let z_critical = critical_z(2 * tested.len(), significance);
    let mut max_z: f64 = 0.0;
    let mut first_violation = None;
    let mut checks = Vec::new();
    for r in rows {
        let pass = if r.alpha == r.beta {
            true
        } else {
            let z = component_z(r.estimate.re, r.stderr_re).max(component_z(r.estimate.im, r.stderr_im));
            max_z = max_z.max(z);
            z <= z_critical
        };
        if !pass && first_violation.is_none() {
            first_violation = Some(r.clone());
        }
        checks.push(MomentCheck { row: r.clone(), pass });
    }
    MomentVerdict {
        pass: first_violation.is_none(),
        z_critical,
        tested: tested.len(),
        max_z,
        first_violation,
        rows: checks,
    }
}

/// Grids for the projected-functional scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanGrid {
    pub thetas_per_coordinate: usize,
    pub radii: Vec<f64>,
}

impl Default for ScanGrid {
    fn default() -> Self {
        Self {
            thetas_per_coordinate: 16,
            radii: vec![1.0, 2.0],
        }
    }
}

impl ScanGrid {
    fn configurations(&self, dim: usize) -> Vec<(Vec<f64>, Vec<f64>)> {
        let m = self.thetas_per_coordinate.max(1);
        let k = self.radii.len().max(1);
        let total = (m * k).pow(dim as u32);
        (0..total)
            .map(|mut code| {
                let mut r = Vec::with_capacity(dim);
                let mut th = Vec::with_capacity(dim);
                for _ in 0..dim {
                    let c = code % (m * k);
                    code /= m * k;
                    th.push(TAU * (c % m) as f64 / m as f64);
                    r.push(self.radii.get(c / m).copied().unwrap_or(1.0));
                }
                (r, th)
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanVerdict {
    pub pass: bool,
    /// Largest Lévy distance from the reference configuration `r = 1, θ = 0`.
    pub max_distance: f64,
    /// Largest split-halves distance over the grid.
    pub noise_floor: f64,
    pub threshold: f64,
    pub configurations: usize,
}

/// Full output of [`rot_invariance_test`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RotInvarianceReport {
    pub raw: MomentVerdict,
    pub normalized: MomentVerdict,
    pub scan: ScanVerdict,
    pub normalizers: Vec<AffineNormalizer>,
    pub excluded: Vec<usize>,
    pub warnings: Vec<String>,
}

fn projected(
    samples: &[Vec<Complex64>],
    norms: &[AffineNormalizer],
    coords: &[usize],
    r: &[f64],
    th: &[f64],
) -> Result<EmpiricalDistribution, DistError> {
    let scale: f64 = coords
        .iter()
        .enumerate()
        .map(|(j, &s)| {
            let (c, sn) = (th[j].cos(), th[j].sin());
            r[j] * r[j] * (norms[s].a * norms[s].a * c * c + norms[s].b * norms[s].b * sn * sn)
        })
        .sum::<f64>()
        .sqrt();
    if !(scale > 0.0) {
        return Err(DistError::DegenerateNorm { norm: scale });
    }
    let phases: Vec<Complex64> = th.iter().map(|&t| Complex64::from_polar(1.0, t)).collect();
    let values = samples
        .iter()
        .map(|z| {
            let mut acc = 0.0;
            for (j, &s) in coords.iter().enumerate() {
                acc += r[j] * (phases[j] * norms[s].rotate(z[s])).re;
            }
            acc / scale
        })
        .collect();
    EmpiricalDistribution::new(values)
}

/// Tests whether the normalized law is rotationally invariant: raw and
/// normalized off-diagonal moments, plus a Lévy scan of the projected
/// functionals `Re(Σ r_s e^{iθ_s} z_s)` over the grid.
pub fn rot_invariance_test(
    samples: &[Vec<Complex64>],
    max_degree: u32,
    significance: f64,
    grid: &ScanGrid,
) -> Result<RotInvarianceReport, DistError> {
    let dim = samples.first().map(|s| s.len()).ok_or(DistError::Empty)?;
    let normalizers: Vec<AffineNormalizer> = (0..dim)
        .map(|s| {
            let col: Vec<Complex64> = samples.iter().map(|z| z[s]).collect();
            affine_normalizer(&col)
        })
        .collect::<Result<_, _>>()?;
    let mut warnings = Vec::new();
    let mut excluded = Vec::new();
    for (s, n) in normalizers.iter().enumerate() {
        if n.kind == NormalizerKind::DegenerateB {
            excluded.push(s);
            warnings.push(format!(
                "coordinate {s}: B² ≈ 0, the law is essentially real; excluded from the normalized tests"
            ));
        }
    }
    let kept: Vec<usize> = (0..dim).filter(|s| !excluded.contains(s)).collect();
    let raw = moment_verdict(&mixed_moments(samples, max_degree)?, significance);
    let normalized_samples: Vec<Vec<Complex64>> = samples
        .iter()
        .map(|z| {
            kept.iter()
                .map(|&s| normalizers[s].apply(z[s]).expect("nondegenerate coordinate"))
                .collect()
        })
        .collect();
    let normalized = if kept.is_empty() {
        return Err(DistError::Invalid("every coordinate is degenerate".into()));
    } else {
        moment_verdict(&mixed_moments(&normalized_samples, max_degree)?, significance)
    };

    let mut configs = grid.configurations(kept.len());
    // only the ratios of the radii matter after normalization
    let key = |(r, th): &(Vec<f64>, Vec<f64>)| {
        let top = r.iter().copied().fold(0.0, f64::max);
        let mut k: Vec<u64> = r.iter().map(|x| (x / top).to_bits()).collect();
        k.extend(th.iter().map(|t| t.to_bits()));
        k
    };
    let mut seen = std::collections::HashSet::new();
    configs.retain(|c| seen.insert(key(c)));
    let ones = vec![1.0; kept.len()];
    let zeros = vec![0.0; kept.len()];
    let reference = projected(samples, &normalizers, &kept, &ones, &zeros)?;
    let per_config: Vec<(f64, f64)> = configs
        .par_iter()
        .map(|(r, th)| {
            let d = projected(samples, &normalizers, &kept, r, th)?;
            Ok((levy_distance(&d, &reference), split_noise_floor(&d)?))
        })
        .collect::<Result<_, DistError>>()?;
    let max_distance = per_config.iter().map(|p| p.0).fold(0.0, f64::max);
    let noise_floor = per_config.iter().map(|p| p.1).fold(0.0, f64::max);
    let threshold = 2.0 * noise_floor;
    let scan = ScanVerdict {
        pass: max_distance <= threshold,
        max_distance,
        noise_floor,
        threshold,
        configurations: configs.len(),
    };
    Ok(RotInvarianceReport {
        raw,
        normalized,
        scan,
        normalizers,
        excluded,
        warnings,
    })
}

/// Law of the unit-variance components `ξ, η` of a synthetic field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FieldLaw {
    Gaussian,
    /// `√3(2U − 1)`.
    Uniform,
    /// `√2 cos 2πU`, bounded with the arcsine law.
    Arcsine,
    /// `ξ + iη = √2 e^{iφ}`; jointly rotation invariant and bounded.
    Circle,
}

/// Parameters of a synthetic cocycle field `e^{−iθ_β}(Aξ + iBη)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldSpec {
    pub law: FieldLaw,
    pub a: f64,
    pub b: f64,
    #[serde(default)]
    pub theta: f64,
}

/// `n` samples of the field; sample `i` uses stream `i` of `seed`.
pub fn synthetic_field(spec: &FieldSpec, n: usize, seed: u64) -> Vec<Complex64> {
    let rot = Complex64::from_polar(1.0, -spec.theta);
    (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(seed, i);
            let (xi, eta) = match spec.law {
                FieldLaw::Gaussian => (rng.sample(StandardNormal), rng.sample(StandardNormal)),
                FieldLaw::Uniform => {
                    let k = 3f64.sqrt();
                    (k * rng.random_range(-1.0..1.0), k * rng.random_range(-1.0..1.0))
                }
                FieldLaw::Arcsine => (
                    SQRT_2 * (TAU * rng.random::<f64>()).cos(),
                    SQRT_2 * (TAU * rng.random::<f64>()).cos(),
                ),
                FieldLaw::Circle => {
                    let phi = TAU * rng.random::<f64>();
                    (SQRT_2 * phi.cos(), SQRT_2 * phi.sin())
                }
            };
            rot * Complex64::new(spec.a * xi, spec.b * eta)
        })
        .collect()
}

/// Where on the torus the distribution is taken.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TorusPoint {
    /// Explicit phases `θ_n`, one per spectrum entry.
    Angles(Vec<f64>),
    /// `θ_n = υ_n t / 2` for principal entries, 0 for the others.
    Time(f64),
}

impl TorusPoint {
    pub fn angles(&self, f: &SpectralObservable) -> Result<Vec<f64>, DistError> {
        match self {
            TorusPoint::Angles(a) => {
                if a.len() != f.entries.len() {
                    return Err(DistError::Invalid(format!(
                        "{} angles for {} spectrum entries",
                        a.len(),
                        f.entries.len()
                    )));
                }
                Ok(a.clone())
            }
            TorusPoint::Time(t) => Ok(f
                .entries
                .iter()
                .map(|e| 0.5 * e.parameter.upsilon() * t)
                .collect()),
        }
    }
}

/// Raw values `Re[Σ_n D⁺_n e^{iθ_n} β⁺_n(x)]` over the sample index `x`.
pub fn torus_values(
    f: &SpectralObservable,
    fields: &[Vec<Complex64>],
    point: &TorusPoint,
) -> Result<Vec<f64>, DistError> {
    if fields.len() != f.entries.len() {
        return Err(DistError::MissingField {
            entries: f.entries.len(),
            fields: fields.len(),
        });
    }
    let n = fields.first().map(|v| v.len()).unwrap_or(0);
    if n == 0 || fields.iter().any(|v| v.len() != n) {
        return Err(DistError::Invalid("fields must be nonempty and of equal length".into()));
    }
    let angles = point.angles(f)?;
    let coeffs: Vec<Complex64> = f
        .entries
        .iter()
        .zip(&angles)
        .map(|(e, &th)| e.d_plus * Complex64::from_polar(1.0, th))
        .collect();
    Ok((0..n)
        .map(|x| {
            coeffs
                .iter()
                .zip(fields)
                .map(|(c, field)| (c * field[x]).re)
                .sum()
        })
        .collect())
}

/// The normalized torus distribution `β(f, θ, ·)/‖β(f, θ, ·)‖`.
pub fn torus_distribution(
    f: &SpectralObservable,
    fields: &[Vec<Complex64>],
    point: &TorusPoint,
) -> Result<EmpiricalDistribution, DistError> {
    let values = torus_values(f, fields, point)?;
    let sq: Vec<f64> = values.iter().map(|v| v * v).collect();
    let norm = mean(&sq).sqrt();
    // Below this the normalized samples are dominated by rounding.
    let floor = 1e-10 * fields.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max).max(1e-300);
    if !(norm > floor) {
        return Err(DistError::DegenerateNorm { norm });
    }
    EmpiricalDistribution::new(values.iter().map(|v| v / norm).collect())
}

/// Outcome of a θ scan of torus distributions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThetaScan {
    pub points: Vec<Vec<f64>>,
    /// Largest Lévy distance between any two grid points.
    pub max_pairwise: f64,
    /// Largest split-halves distance over the grid.
    pub noise_floor: f64,
    pub max_abs_sample: Vec<f64>,
}

/// Product grid of `per_axis` equally spaced phases on every torus axis.
pub fn theta_grid(dim: usize, per_axis: usize) -> Vec<Vec<f64>> {
    let total = per_axis.pow(dim as u32);
    (0..total)
        .map(|mut code| {
            (0..dim)
                .map(|_| {
                    let c = code % per_axis;
                    code /= per_axis;
                    TAU * c as f64 / per_axis as f64
                })
                .collect()
        })
        .collect()
}

pub fn theta_scan(
    f: &SpectralObservable,
    fields: &[Vec<Complex64>],
    points: &[Vec<f64>],
) -> Result<ThetaScan, DistError> {
    let dists: Vec<EmpiricalDistribution> = points
        .par_iter()
        .map(|p| torus_distribution(f, fields, &TorusPoint::Angles(p.clone())))
        .collect::<Result<_, _>>()?;
    let floors: Vec<f64> = dists
        .par_iter()
        .map(split_noise_floor)
        .collect::<Result<_, _>>()?;
    let pairs: Vec<(usize, usize)> = (0..dists.len())
        .flat_map(|i| (i + 1..dists.len()).map(move |j| (i, j)))
        .collect();
    let max_pairwise = pairs
        .par_iter()
        .map(|&(i, j)| levy_distance(&dists[i], &dists[j]))
        .reduce(|| 0.0, f64::max);
    Ok(ThetaScan {
        points: points.to_vec(),
        max_pairwise,
        noise_floor: floors.iter().copied().fold(0.0, f64::max),
        max_abs_sample: dists.iter().map(|d| d.max_abs()).collect(),
    })
}

/// Ratio of Lévy distance to sup-metric torus distance over pairs of
/// nearby points `(p, p + η·e)`; the largest observed ratio.
pub fn lipschitz_estimate(
    f: &SpectralObservable,
    fields: &[Vec<Complex64>],
    base_points: &[Vec<f64>],
    eta: f64,
) -> Result<f64, DistError> {
    let ratios: Vec<f64> = base_points
        .par_iter()
        .map(|p| {
            let q: Vec<f64> = p.iter().map(|t| t + eta).collect();
            let a = torus_distribution(f, fields, &TorusPoint::Angles(p.clone()))?;
            let b = torus_distribution(f, fields, &TorusPoint::Angles(q))?;
            Ok(levy_distance(&a, &b) / eta)
        })
        .collect::<Result<_, DistError>>()?;
    Ok(ratios.into_iter().fold(0.0, f64::max))
}

/// Quantiles of the standard normal at the `n` midpoints `(i + ½)/n`.
pub fn normal_quantile_sample(n: usize) -> Vec<f64> {
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    (0..n)
        .map(|i| normal.inverse_cdf((i as f64 + 0.5) / n as f64))
        .collect()
}
