//! Adaptive Gauss–Kronrod quadrature for complex-valued integrands.
//!
//! A 7-point Gauss / 15-point Kronrod pair is applied on each interval; the
//! interval with the largest error estimate is bisected until the summed
//! error estimate falls under `max(abs_tol, rel_tol * |I|)`.

use std::collections::BinaryHeap;

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadError {
    #[error("quadrature did not converge after {intervals} intervals (error estimate {error:e}, value {value})")]
    NotConverged {
        intervals: usize,
        error: f64,
        value: Complex64,
    },
    #[error("integrand returned a non-finite value at x = {x}")]
    NonFinite { x: f64 },
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Tolerances and interval budget for [`integrate`].
#[derive(Debug, Clone, Copy)]
pub struct QuadConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-9,
            abs_tol: 1e-13,
            max_intervals: 20_000,
        }
    }
}

impl QuadConfig {
    pub fn with_rel_tol(rel_tol: f64) -> Self {
        Self {
            rel_tol,
            ..Self::default()
        }
    }
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: Complex64,
    pub error: f64,
    pub intervals: usize,
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: Complex64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk15<F>(f: &mut F, a: f64, b: f64) -> Result<Panel, QuadError>
where
    F: FnMut(f64) -> Complex64,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    if !(fc.re.is_finite() && fc.im.is_finite()) {
        return Err(QuadError::NonFinite { x: center });
    }
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        if !(f1.re.is_finite() && f1.im.is_finite()) {
            return Err(QuadError::NonFinite { x: center - dx });
        }
        if !(f2.re.is_finite() && f2.im.is_finite()) {
            return Err(QuadError::NonFinite { x: center + dx });
        }
        let s = f1 + f2;
        kronrod += s * WGK[j];
        if j % 2 == 1 {
            gauss += s * WG[j / 2];
        }
    }
    let value = kronrod * half;
    let error = ((kronrod - gauss) * half).norm();
    Ok(Panel { a, b, value, error })
}

/// Integrates `f` over `[a, b]`, splitting first at every interior point of
/// `breaks` (kinks or peaks of the integrand).
pub fn integrate<F>(
    mut f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    cfg: &QuadConfig,
) -> Result<QuadResult, QuadError>
where
    F: FnMut(f64) -> Complex64,
{
    if a == b {
        return Ok(QuadResult {
            value: Complex64::new(0.0, 0.0),
            error: 0.0,
            intervals: 0,
        });
    }
    if a > b {
        let r = integrate(f, b, a, breaks, cfg)?;
        return Ok(QuadResult {
            value: -r.value,
            ..r
        });
    }
    let mut points: Vec<f64> = breaks
        .iter()
        .copied()
        .filter(|&p| p > a && p < b)
        .collect();
    points.sort_by(f64::total_cmp);
    points.dedup();
    let mut edges = Vec::with_capacity(points.len() + 2);
    edges.push(a);
    edges.extend(points);
    edges.push(b);

    let mut heap = BinaryHeap::new();
    for w in edges.windows(2) {
        heap.push(gk15(&mut f, w[0], w[1])?);
    }
    loop {
        // Summation in interval order so the result does not depend on heap layout.
        let mut panels: Vec<Panel> = heap.iter().copied().collect();
        panels.sort_by(|p, q| p.a.total_cmp(&q.a));
        let value: Complex64 = panels.iter().map(|p| p.value).sum();
        let error: f64 = panels.iter().map(|p| p.error).sum();
        let tol = cfg.abs_tol.max(cfg.rel_tol * value.norm());
        if error <= tol {
            return Ok(QuadResult {
                value,
                error,
                intervals: panels.len(),
            });
        }
        if heap.len() >= cfg.max_intervals {
            return Err(QuadError::NotConverged {
                intervals: heap.len(),
                error,
                value,
            });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Interval cannot be split further in f64; accept it as is.
            heap.push(Panel {
                error: 0.0,
                ..worst
            });
            continue;
        }
        heap.push(gk15(&mut f, worst.a, mid)?);
        heap.push(gk15(&mut f, mid, worst.b)?);
    }
}

/// Real-valued convenience wrapper around [`integrate`].
pub fn integrate_real<F>(
    mut f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    cfg: &QuadConfig,
) -> Result<f64, QuadError>
where
    F: FnMut(f64) -> f64,
{
    integrate(|x| Complex64::new(f(x), 0.0), a, b, breaks, cfg).map(|r| r.value.re)
}

/// Integral over `[a, ∞)` via the substitution `x = a + s/(1-s)`.
pub fn integrate_to_infinity<F>(
    mut f: F,
    a: f64,
    cfg: &QuadConfig,
) -> Result<QuadResult, QuadError>
where
    F: FnMut(f64) -> Complex64,
{
    integrate(
        |s| {
            if s >= 1.0 {
                return Complex64::new(0.0, 0.0);
            }
            let one_minus = 1.0 - s;
            let x = a + s / one_minus;
            f(x) / (one_minus * one_minus)
        },
        0.0,
        1.0,
        &[],
        cfg,
    )
}

/// Composite trapezoid sum of uniformly spaced samples.
pub fn trapezoid(values: &[Complex64], spacing: f64) -> Complex64 {
    match values.len() {
        0 | 1 => Complex64::new(0.0, 0.0),
        n => {
            let inner: Complex64 = values[1..n - 1].iter().sum();
            (inner + (values[0] + values[n - 1]) * 0.5) * spacing
        }
    }
}
