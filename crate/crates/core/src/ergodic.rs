//! Horocycle ergodic integrals on the Bolza quotient and the statistics
//! built from them: Birkhoff averages, variance curves, growth exponents and
//! normalized ensembles.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::distlab::{DistError, EmpiricalDistribution};
use crate::rng::{derive_seed, stream_rng};
use crate::sl2core::GroupElement;
use crate::stats::{linear_fit, mean, mean_and_stderr, median, pairwise_sum};
use crate::surface::{FuchsianGroup, Observable, SurfaceError};

/// Default quadrature step along the orbit.
pub const DEFAULT_STEP: f64 = 1.0 / 64.0;

/// Steps between determinant renormalisations of the moving point.
const RENORMALIZE_EVERY: usize = 100;

/// Bootstrap resamples for [`growth_exponent`].
pub const BOOTSTRAP_RESAMPLES: usize = 400;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ErgodicError {
    #[error(transparent)]
    Surface(#[from] SurfaceError),
    #[error("invalid orbit parameters: {0}")]
    InvalidInput(String),
    #[error("degenerate variance curve: {0}")]
    DegenerateFit(String),
    #[error(transparent)]
    Distribution(#[from] DistError),
}

/// Simpson integral of `t ↦ f(x·h_t)` over `[0, T]`, reducing every step.
pub fn ergodic_integral(
    group: &FuchsianGroup,
    obs: &Observable,
    x: &GroupElement,
    t_end: f64,
    h: f64,
) -> Result<f64, ErgodicError> {
    ergodic_integral_with(group, obs, x, t_end, h, 1)
}

/// As [`ergodic_integral`], reducing the moving point only every
/// `reduce_every` steps. The step is shrunk so that `T` is an even number
/// of steps.
pub fn ergodic_integral_with(
    group: &FuchsianGroup,
    obs: &Observable,
    x: &GroupElement,
    t_end: f64,
    h: f64,
    reduce_every: usize,
) -> Result<f64, ErgodicError> {
    check_orbit(t_end, h)?;
    if t_end == 0.0 {
        return Ok(0.0);
    }
    let panels = 2 * ((t_end / (2.0 * h)).ceil() as usize).max(1);
    let step = t_end / panels as f64;
    let mut orbit = Orbit::new(group, obs, x, step, reduce_every.max(1))?;
    let mut odd = 0.0;
    let mut even = 0.0;
    let first = orbit.value;
    for i in 1..panels {
        orbit.advance()?;
        if i % 2 == 1 {
            odd += orbit.value;
        } else {
            even += orbit.value;
        }
    }
    orbit.advance()?;
    Ok(step / 3.0 * (first + orbit.value + 4.0 * odd + 2.0 * even))
}

/// Integrals over `[0, T_i]` for every `T_i` in the increasing list `ts`,
/// from a single orbit with step `h`. The final partial panel of each `T_i`
/// is closed with a local Simpson rule.
pub fn ergodic_prefix_integrals(
    group: &FuchsianGroup,
    obs: &Observable,
    x: &GroupElement,
    ts: &[f64],
    h: f64,
) -> Result<Vec<f64>, ErgodicError> {
    if ts.windows(2).any(|w| w[1] < w[0]) {
        return Err(ErgodicError::InvalidInput("times must be non-decreasing".into()));
    }
    let Some(&last) = ts.last() else {
        return Ok(Vec::new());
    };
    check_orbit(last, h)?;
    check_orbit(ts[0], h)?;
    let mut out = Vec::with_capacity(ts.len());
    let mut orbit = Orbit::new(group, obs, x, h, 1)?;
    let mut acc = 0.0;
    let mut pos = 0.0;
    let mut done = 0usize;
    for &t in ts {
        let whole = (t / (2.0 * h)).floor() as usize;
        while done < whole {
            let f0 = orbit.value;
            orbit.advance()?;
            let f1 = orbit.value;
            orbit.advance()?;
            acc += h / 3.0 * (f0 + 4.0 * f1 + orbit.value);
            done += 1;
            pos = 2.0 * h * done as f64;
        }
        let rest = t - pos;
        let tail = if rest > 0.0 {
            let base = orbit.point;
            let mid = obs.eval(group, &base.stable_step(0.5 * rest))?;
            let end = obs.eval(group, &base.stable_step(rest))?;
            rest / 6.0 * (orbit.value + 4.0 * mid + end)
        } else {
            0.0
        };
        out.push(acc + tail);
    }
    Ok(out)
}

/// Time average `(1/T)∫₀^T f(x·h_t) dt`.
pub fn birkhoff_average(
    group: &FuchsianGroup,
    obs: &Observable,
    x: &GroupElement,
    t_end: f64,
    h: f64,
) -> Result<f64, ErgodicError> {
    if !(t_end > 0.0) {
        return Err(ErgodicError::InvalidInput("Birkhoff average needs T > 0".into()));
    }
    Ok(ergodic_integral(group, obs, x, t_end, h)? / t_end)
}

/// Median over `n` Haar-random starts of `|Birkhoff average|` at each time.
pub fn birkhoff_medians(
    group: &FuchsianGroup,
    obs: &Observable,
    ts: &[f64],
    n: usize,
    seed: u64,
    h: f64,
) -> Result<Vec<f64>, ErgodicError> {
    let table = sample_integrals(group, obs, ts, n, seed, h)?;
    Ok(ts
        .iter()
        .enumerate()
        .map(|(j, &t)| {
            let col: Vec<f64> = table.iter().map(|row| (row[j] / t).abs()).collect();
            median(&col)
        })
        .collect())
}

fn check_orbit(t_end: f64, h: f64) -> Result<(), ErgodicError> {
    if !(t_end >= 0.0) || !t_end.is_finite() {
        return Err(ErgodicError::InvalidInput(format!("orbit time {t_end} must be finite and ≥ 0")));
    }
    if !(h > 0.0) || !h.is_finite() {
        return Err(ErgodicError::InvalidInput(format!("step {h} must be positive")));
    }
    Ok(())
}

struct Orbit<'a> {
    group: &'a FuchsianGroup,
    obs: &'a Observable,
    point: GroupElement,
    value: f64,
    step: f64,
    reduce_every: usize,
    count: usize,
}

impl<'a> Orbit<'a> {
    fn new(
        group: &'a FuchsianGroup,
        obs: &'a Observable,
        x: &GroupElement,
        step: f64,
        reduce_every: usize,
    ) -> Result<Self, ErgodicError> {
        let mut point = *x;
        group.reduce_in_place(&mut point)?;
        let value = obs.eval_reduced(&point);
        Ok(Self {
            group,
            obs,
            point,
            value,
            step,
            reduce_every,
            count: 0,
        })
    }

    #[inline]
    fn advance(&mut self) -> Result<(), ErgodicError> {
        self.point = self.point.stable_step(self.step);
        self.count += 1;
        if self.count.is_multiple_of(RENORMALIZE_EVERY) {
            self.point = self.point.renormalized();
        }
        if self.count.is_multiple_of(self.reduce_every) {
            self.group.reduce_in_place(&mut self.point)?;
            self.value = self.obs.eval_reduced(&self.point);
        } else {
            self.value = self.obs.eval(self.group, &self.point)?;
        }
        Ok(())
    }
}

fn sample_integrals(
    group: &FuchsianGroup,
    obs: &Observable,
    ts: &[f64],
    n: usize,
    seed: u64,
    h: f64,
) -> Result<Vec<Vec<f64>>, ErgodicError> {
    (0..n as u64)
        .into_par_iter()
        .map(|i| ergodic_prefix_integrals(group, obs, &group.sample_point(seed, i), ts, h))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VariancePoint {
    pub t: f64,
    pub variance: f64,
    pub stderr: f64,
}

/// Monte Carlo estimates of `‖∫₀^T f∘h_τ dτ‖²` over a grid of times.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct VarianceCurve {
    pub points: Vec<VariancePoint>,
    /// Per-sample integrals (`samples[i][j]` at time `points[j].t`) for the bootstrap.
    pub samples: Vec<Vec<f64>>,
    pub seed: u64,
}

impl VarianceCurve {
    /// A curve given only by its values, without per-sample data.
    pub fn from_values(ts: &[f64], variances: &[f64]) -> Result<Self, ErgodicError> {
        if ts.len() != variances.len() {
            return Err(ErgodicError::InvalidInput("length mismatch".into()));
        }
        let curve = Self {
            points: ts
                .iter()
                .zip(variances)
                .map(|(&t, &variance)| VariancePoint {
                    t,
                    variance,
                    stderr: 0.0,
                })
                .collect(),
            samples: Vec::new(),
            seed: 0,
        };
        curve.validate()?;
        Ok(curve)
    }

    fn validate(&self) -> Result<(), ErgodicError> {
        if self.points.windows(2).any(|w| w[1].t <= w[0].t) {
            return Err(ErgodicError::InvalidInput("T must be strictly increasing".into()));
        }
        if self.points.iter().any(|p| !(p.variance >= 0.0)) {
            return Err(ErgodicError::InvalidInput("variances must be ≥ 0".into()));
        }
        Ok(())
    }

    pub fn times(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.t).collect()
    }
}

/// Population variance and the standard error of that estimate.
fn variance_with_stderr(values: &[f64]) -> (f64, f64) {
    let m = mean(values);
    let sq: Vec<f64> = values.iter().map(|v| (v - m) * (v - m)).collect();
    mean_and_stderr(&sq)
}

pub fn variance_curve(
    group: &FuchsianGroup,
    obs: &Observable,
    ts: &[f64],
    n: usize,
    seed: u64,
    h: f64,
) -> Result<VarianceCurve, ErgodicError> {
    if n < 2 {
        return Err(ErgodicError::InvalidInput("need at least two samples".into()));
    }
    if ts.is_empty() || ts.windows(2).any(|w| w[1] <= w[0]) || ts[0] <= 0.0 {
        return Err(ErgodicError::InvalidInput(
            "T grid must be positive and strictly increasing".into(),
        ));
    }
    let samples = sample_integrals(group, obs, ts, n, seed, h)?;
    let points = ts
        .iter()
        .enumerate()
        .map(|(j, &t)| {
            let col: Vec<f64> = samples.iter().map(|row| row[j]).collect();
            let (variance, stderr) = variance_with_stderr(&col);
            VariancePoint { t, variance, stderr }
        })
        .collect();
    Ok(VarianceCurve {
        points,
        samples,
        seed,
    })
}

/// Fitted growth `‖∫₀^T‖ ∝ T^exponent`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GrowthFit {
    pub exponent: f64,
    pub stderr: f64,
    pub intercept: f64,
}

fn log_slope(ts: &[f64], variances: &[f64]) -> Option<(f64, f64, f64)> {
    if variances.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
        return None;
    }
    let x: Vec<f64> = ts.iter().map(|t| t.ln()).collect();
    let y: Vec<f64> = variances.iter().map(|v| 0.5 * v.ln()).collect();
    let fit = linear_fit(&x, &y);
    Some((fit.slope, fit.intercept, fit.slope_stderr))
}

/// Least-squares slope of `log ‖∫‖` against `log T`. The standard error is
/// a bootstrap over samples when the curve carries them, otherwise the
/// classical regression error.
pub fn growth_exponent(curve: &VarianceCurve) -> Result<GrowthFit, ErgodicError> {
    curve.validate()?;
    if curve.points.len() < 2 {
        return Err(ErgodicError::InvalidInput("need at least two times".into()));
    }
    let ts = curve.times();
    let vars: Vec<f64> = curve.points.iter().map(|p| p.variance).collect();
    let Some((slope, intercept, classical)) = log_slope(&ts, &vars) else {
        return Err(ErgodicError::DegenerateFit(format!(
            "variances {vars:?} are not all positive; the observable is numerically a coboundary at these scales"
        )));
    };
    if curve.samples.is_empty() {
        return Ok(GrowthFit {
            exponent: slope,
            stderr: classical,
            intercept,
        });
    }
    let n = curve.samples.len();
    let m = ts.len();
    let boot_seed = derive_seed(curve.seed, 0xB007);
    let slopes: Vec<f64> = (0..BOOTSTRAP_RESAMPLES as u64)
        .into_par_iter()
        .filter_map(|b| {
            let mut rng = stream_rng(boot_seed, b);
            let idx: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
            let v: Vec<f64> = (0..m)
                .map(|j| {
                    let col: Vec<f64> = idx.iter().map(|&i| curve.samples[i][j]).collect();
                    variance_with_stderr(&col).0
                })
                .collect();
            log_slope(&ts, &v).map(|s| s.0)
        })
        .collect();
    let mb = mean(&slopes);
    let dev: Vec<f64> = slopes.iter().map(|s| (s - mb) * (s - mb)).collect();
    let stderr = (pairwise_sum(&dev) / (slopes.len() as f64 - 1.0)).sqrt();
    Ok(GrowthFit {
        exponent: slope,
        stderr,
        intercept,
    })
}

/// Samples of `∫₀^{Te^t} f∘h_τ(x) dτ` over Haar-random `x`, divided by
/// their empirical L² norm.
pub fn empirical_normalized(
    group: &FuchsianGroup,
    obs: &Observable,
    t: f64,
    t_base: f64,
    n: usize,
    seed: u64,
    h: f64,
) -> Result<EmpiricalDistribution, ErgodicError> {
    let horizon = t_base * t.exp();
    let raw: Vec<f64> = (0..n as u64)
        .into_par_iter()
        .map(|i| ergodic_integral(group, obs, &group.sample_point(seed, i), horizon, h))
        .collect::<Result<_, _>>()?;
    let sq: Vec<f64> = raw.iter().map(|v| v * v).collect();
    let norm = mean(&sq).sqrt();
    if !(norm > 1e-12) {
        return Err(ErgodicError::DegenerateFit(format!(
            "L² norm {norm:e} of the ergodic integral at T = {horizon} is numerically zero"
        )));
    }
    Ok(EmpiricalDistribution::new(raw.iter().map(|v| v / norm).collect())?)
}
