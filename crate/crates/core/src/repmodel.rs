//! The line model of the principal and complementary series: functions on
//! ℝ on which `U` acts by `d/dx`, the Θ-invariant vector `u₀`, the
//! correlation integrals of horocycle averages and the cohomological
//! equation `f′ = g`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::quad::{integrate, integrate_to_infinity, QuadConfig, QuadError};

/// Default half-width of the sampling window.
pub const DEFAULT_HALF_WIDTH: f64 = 32.0;
/// Default grid spacing, `2⁻⁷`.
pub const DEFAULT_SPACING: f64 = 1.0 / 128.0;
/// Largest `|∫g|` accepted by [`solve_cohomological`].
pub const OBSTRUCTION_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("invalid Casimir parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Quadrature(#[from] QuadError),
    #[error("support [{lo}, {hi}] leaves too little margin inside [{min}, {max}] for the stencil")]
    InsufficientMargin { lo: f64, hi: f64, min: f64, max: f64 },
    #[error("grids differ (spacing {0} vs {1})")]
    GridMismatch(f64, f64),
    #[error("∫g = {average} ≠ 0: g is not a derivative of a compactly supported function")]
    Obstruction { average: Complex64 },
    #[error("{0}")]
    Unsupported(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Series {
    Principal,
    Complementary,
    /// `μ = 1/4`, `ν = 0`.
    Special,
    /// `μ = 0`, `ν = 1`; only a test exponent for the kernels.
    Trivial,
}

/// Casimir eigenvalue `μ` with `ν = √(1 − 4μ)` on the principal branch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CasimirSpec", into = "CasimirSpec")]
pub struct CasimirParameter {
    mu: f64,
    nu: Complex64,
    series: Series,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
struct CasimirSpec {
    mu: f64,
}

impl TryFrom<CasimirSpec> for CasimirParameter {
    type Error = ModelError;

    fn try_from(s: CasimirSpec) -> Result<Self, ModelError> {
        CasimirParameter::from_mu(s.mu)
    }
}

impl From<CasimirParameter> for CasimirSpec {
    fn from(p: CasimirParameter) -> Self {
        CasimirSpec { mu: p.mu }
    }
}

impl CasimirParameter {
    pub fn from_mu(mu: f64) -> Result<Self, ModelError> {
        if !(mu >= 0.0) || !mu.is_finite() {
            return Err(ModelError::InvalidParameter(format!("μ = {mu} must be ≥ 0")));
        }
        let d = 1.0 - 4.0 * mu;
        let (nu, series) = if mu == 0.0 {
            (Complex64::new(1.0, 0.0), Series::Trivial)
        } else if mu == 0.25 {
            (Complex64::new(0.0, 0.0), Series::Special)
        } else if d > 0.0 {
            (Complex64::new(d.sqrt(), 0.0), Series::Complementary)
        } else {
            (Complex64::new(0.0, (-d).sqrt()), Series::Principal)
        };
        Ok(Self { mu, nu, series })
    }

    /// From `ν`, which must lie in `[0, 1]` or on the positive imaginary axis.
    pub fn from_nu(nu: Complex64) -> Result<Self, ModelError> {
        let real = nu.im == 0.0 && (0.0..=1.0).contains(&nu.re);
        let imaginary = nu.re == 0.0 && nu.im > 0.0;
        if !(real || imaginary) {
            return Err(ModelError::InvalidParameter(format!(
                "ν = {nu} is neither in [0, 1] nor on the positive imaginary axis"
            )));
        }
        let mu = (1.0 - (nu * nu).re) / 4.0;
        let series = if nu.im > 0.0 {
            Series::Principal
        } else if nu.re == 0.0 {
            Series::Special
        } else if nu.re == 1.0 {
            Series::Trivial
        } else {
            Series::Complementary
        };
        Ok(Self { mu, nu, series })
    }

    pub fn from_real_nu(nu: f64) -> Result<Self, ModelError> {
        Self::from_nu(Complex64::new(nu, 0.0))
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn nu(&self) -> Complex64 {
        self.nu
    }

    pub fn series(&self) -> Series {
        self.series
    }

    /// `υ = √(4μ − 1)` for principal-series parameters, otherwise 0.
    pub fn upsilon(&self) -> f64 {
        if self.series == Series::Principal {
            self.nu.im
        } else {
            0.0
        }
    }

    /// Kernel `(1 + w²)^{−(1+ν)/2}`.
    #[inline]
    pub fn kernel(&self, w: f64) -> Complex64 {
        power(1.0 + w * w, -(1.0 + self.nu) * 0.5)
    }
}

#[inline]
fn power(base: f64, exponent: Complex64) -> Complex64 {
    (exponent * base.ln()).exp()
}

pub fn u0(p: &CasimirParameter, x: f64) -> Complex64 {
    p.kernel(x)
}

/// Smooth bump `exp(1 − 1/(1 − s²))`, `s = (x − center)/half_width`.
pub fn bump(x: f64, center: f64, half_width: f64) -> f64 {
    let s = (x - center) / half_width;
    if s.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - s * s)).exp()
    }
}

/// Complex samples on the uniform grid `x_i = −L + iδ`, `i = 0..=2L/δ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledFunction {
    half_width: f64,
    spacing: f64,
    values: Vec<Complex64>,
    /// `None` for a window cut out of a function without compact support.
    support: Option<(f64, f64)>,
}

impl SampledFunction {
    fn grid_len(half_width: f64, spacing: f64) -> usize {
        (2.0 * half_width / spacing).round() as usize + 1
    }

    /// Samples `f` on `[−L, L]`, compactly supported on `support`.
    pub fn from_fn<F>(f: F, support: (f64, f64), half_width: f64, spacing: f64) -> Result<Self, ModelError>
    where
        F: Fn(f64) -> Complex64,
    {
        let (lo, hi) = support;
        if !(lo < hi) || lo - 3.0 * spacing < -half_width || hi + 3.0 * spacing > half_width {
            return Err(ModelError::InsufficientMargin {
                lo,
                hi,
                min: -half_width,
                max: half_width,
            });
        }
        let mut out = Self {
            half_width,
            spacing,
            values: Vec::new(),
            support: Some(support),
        };
        let n = Self::grid_len(half_width, spacing);
        out.values = (0..n)
            .map(|i| {
                let x = out.x(i);
                if x <= lo || x >= hi {
                    Complex64::new(0.0, 0.0)
                } else {
                    f(x)
                }
            })
            .collect();
        Ok(out)
    }

    /// Samples of a function on the whole window, without a support claim.
    pub fn window<F>(f: F, half_width: f64, spacing: f64) -> Self
    where
        F: Fn(f64) -> Complex64,
    {
        let n = Self::grid_len(half_width, spacing);
        Self {
            half_width,
            spacing,
            values: (0..n).map(|i| f(-half_width + i as f64 * spacing)).collect(),
            support: None,
        }
    }

    /// Bump of half-width `w` at `c`, scaled to unit mass.
    pub fn unit_bump(center: f64, w: f64, half_width: f64, spacing: f64) -> Result<Self, ModelError> {
        let f = Self::from_fn(
            |x| Complex64::new(bump(x, center, w), 0.0),
            (center - w, center + w),
            half_width,
            spacing,
        )?;
        let mass = f.integral();
        Ok(f.scale(Complex64::new(1.0 / mass.re, 0.0)))
    }

    pub fn zero(half_width: f64, spacing: f64) -> Self {
        Self::window(|_| Complex64::new(0.0, 0.0), half_width, spacing)
    }

    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        -self.half_width + i as f64 * self.spacing
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn support(&self) -> Option<(f64, f64)> {
        self.support
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Grid indices covering the support (the whole grid for windows).
    fn support_range(&self) -> std::ops::Range<usize> {
        match self.support {
            None => 0..self.values.len(),
            Some((lo, hi)) => {
                let a = ((lo + self.half_width) / self.spacing).floor().max(0.0) as usize;
                let b = (((hi + self.half_width) / self.spacing).ceil() as usize + 1).min(self.values.len());
                a..b
            }
        }
    }

    /// Trapezoid integral; spectrally accurate for smooth compact functions.
    pub fn integral(&self) -> Complex64 {
        crate::quad::trapezoid(&self.values, self.spacing)
    }

    pub fn l2_norm(&self) -> f64 {
        let sq: Vec<Complex64> = self.values.iter().map(|v| Complex64::new(v.norm_sqr(), 0.0)).collect();
        crate::quad::trapezoid(&sq, self.spacing).re.sqrt()
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            values: self.values.iter().map(|v| v * s).collect(),
            ..self.clone()
        }
    }

    fn check_grid(&self, other: &Self) -> Result<(), ModelError> {
        if self.spacing != other.spacing || self.values.len() != other.values.len() {
            return Err(ModelError::GridMismatch(self.spacing, other.spacing));
        }
        Ok(())
    }

    fn union_support(&self, other: &Self) -> Option<(f64, f64)> {
        match (self.support, other.support) {
            (Some(a), Some(b)) => Some((a.0.min(b.0), a.1.max(b.1))),
            _ => None,
        }
    }

    pub fn sub(&self, other: &Self) -> Result<Self, ModelError> {
        self.check_grid(other)?;
        Ok(Self {
            values: self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect(),
            support: self.union_support(other),
            ..self.clone()
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self, ModelError> {
        self.check_grid(other)?;
        Ok(Self {
            values: self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect(),
            support: self.union_support(other),
            ..self.clone()
        })
    }

    /// Fourth-order first derivative; one-sided stencils at the window edges.
    pub fn derivative(&self) -> Result<Self, ModelError> {
        let n = self.values.len();
        if n < 5 {
            return Err(ModelError::InsufficientMargin {
                lo: -self.half_width,
                hi: self.half_width,
                min: -self.half_width,
                max: self.half_width,
            });
        }
        let support = match self.support {
            Some((lo, hi)) => {
                let (lo, hi) = (lo - 2.0 * self.spacing, hi + 2.0 * self.spacing);
                if lo - 2.0 * self.spacing < -self.half_width || hi + 2.0 * self.spacing > self.half_width {
                    return Err(ModelError::InsufficientMargin {
                        lo,
                        hi,
                        min: -self.half_width,
                        max: self.half_width,
                    });
                }
                Some((lo, hi))
            }
            None => None,
        };
        let v = &self.values;
        let k = 1.0 / (12.0 * self.spacing);
        let mut d = vec![Complex64::new(0.0, 0.0); n];
        for i in 2..n - 2 {
            d[i] = (v[i - 2] - v[i - 1] * 8.0 + v[i + 1] * 8.0 - v[i + 2]) * k;
        }
        d[0] = (v[0] * -25.0 + v[1] * 48.0 - v[2] * 36.0 + v[3] * 16.0 - v[4] * 3.0) * k;
        d[1] = (v[0] * -3.0 - v[1] * 10.0 + v[2] * 18.0 - v[3] * 6.0 + v[4]) * k;
        d[n - 1] = -(v[n - 1] * -25.0 + v[n - 2] * 48.0 - v[n - 3] * 36.0 + v[n - 4] * 16.0
            - v[n - 5] * 3.0)
            * k;
        d[n - 2] = -(v[n - 1] * -3.0 - v[n - 2] * 10.0 + v[n - 3] * 18.0 - v[n - 4] * 6.0 + v[n - 5]) * k;
        Ok(Self {
            values: d,
            support,
            ..self.clone()
        })
    }

    /// Linear combination `a(x)·f′ + b(x)·f`.
    fn first_order<A, B>(&self, a: A, b: B) -> Result<Self, ModelError>
    where
        A: Fn(f64) -> Complex64,
        B: Fn(f64) -> Complex64,
    {
        let d = self.derivative()?;
        let values = (0..self.values.len())
            .map(|i| {
                let x = self.x(i);
                a(x) * d.values[i] + b(x) * self.values[i]
            })
            .collect();
        Ok(Self { values, ..d })
    }

    /// Linear interpolation between grid values; zero outside the window.
    pub fn eval(&self, x: f64) -> Complex64 {
        let s = (x + self.half_width) / self.spacing;
        if s < 0.0 || s > (self.values.len() - 1) as f64 {
            return Complex64::new(0.0, 0.0);
        }
        let i = (s.floor() as usize).min(self.values.len() - 2);
        let w = s - i as f64;
        self.values[i] * (1.0 - w) + self.values[i + 1] * w
    }
}

/// A vector of the model: the closed-form `u₀` or a sampled function.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelFunction {
    U0(CasimirParameter),
    Sampled(SampledFunction),
}

impl ModelFunction {
    pub fn is_compact(&self) -> bool {
        matches!(self, ModelFunction::Sampled(s) if s.support.is_some())
    }
}

/// Lie algebra elements acting in the model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModelOperator {
    U,
    V,
    X,
    Theta,
}

pub fn model_derivative(
    kind: ModelOperator,
    f: &SampledFunction,
    p: &CasimirParameter,
) -> Result<SampledFunction, ModelError> {
    let one = Complex64::new(1.0, 0.0);
    let s = one + p.nu();
    match kind {
        ModelOperator::U => f.derivative(),
        ModelOperator::V => f.first_order(|x| Complex64::new(-x * x, 0.0), |x| -s * x),
        ModelOperator::X => f.first_order(|x| Complex64::new(x, 0.0), |_| s * 0.5),
        ModelOperator::Theta => f.first_order(|x| Complex64::new(1.0 + x * x, 0.0), |x| s * x),
    }
}

fn tight() -> QuadConfig {
    QuadConfig {
        rel_tol: 1e-13,
        abs_tol: 1e-15,
        max_intervals: 50_000,
    }
}

fn check_time(t: f64) -> Result<(), ModelError> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(ModelError::InvalidParameter(format!("T = {t} must be positive")));
    }
    Ok(())
}

/// `I_T(x) = ∫₀^T∫₀^T k(x+σ−τ) dσ dτ = ∫_{−T}^{T} (T − |u|) k(x+u) du`.
pub fn i_t(p: &CasimirParameter, t: f64, x: f64) -> Result<Complex64, ModelError> {
    i_t_with(p, t, x, &QuadConfig::with_rel_tol(1e-11))
}

pub fn i_t_with(p: &CasimirParameter, t: f64, x: f64, cfg: &QuadConfig) -> Result<Complex64, ModelError> {
    check_time(t)?;
    let r = integrate(|u| p.kernel(x + u) * (t - u.abs()), -t, t, &[0.0, -x], cfg)?;
    Ok(r.value)
}

/// Nested adaptive evaluation of the double integral defining `I_T(x)`.
pub fn i_t_brute_force(p: &CasimirParameter, t: f64, x: f64) -> Result<Complex64, ModelError> {
    check_time(t)?;
    let inner_cfg = QuadConfig::with_rel_tol(1e-12);
    let mut failure = None;
    let outer = integrate(
        |tau| {
            match integrate(|sigma| p.kernel(x + sigma - tau), 0.0, t, &[tau - x], &inner_cfg) {
                Ok(r) => r.value,
                Err(e) => {
                    failure.get_or_insert(e);
                    Complex64::new(0.0, 0.0)
                }
            }
        },
        0.0,
        t,
        &[x, t + x],
        &QuadConfig::with_rel_tol(1e-11),
    )?;
    if let Some(e) = failure {
        return Err(e.into());
    }
    Ok(outer.value)
}

/// Both evaluations of `J_T = ∫_{−T}^{T} k(u) du`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JtResult {
    pub direct: Complex64,
    /// Through the integration-by-parts identity; absent for `ν = 0`.
    pub identity: Option<Complex64>,
    pub residual: Option<f64>,
}

pub fn j_t(p: &CasimirParameter, t: f64) -> Result<JtResult, ModelError> {
    check_time(t)?;
    let direct = integrate(|u| p.kernel(u), -t, t, &[0.0], &tight())?.value;
    let nu = p.nu();
    if nu.norm() == 0.0 {
        return Ok(JtResult {
            direct,
            identity: None,
            residual: None,
        });
    }
    let one = Complex64::new(1.0, 0.0);
    let e3 = -(3.0 + nu) * 0.5;
    let k3 = integrate(|u| power(1.0 + u * u, e3), -t, t, &[0.0], &tight())?.value;
    let boundary = power(1.0 + t * t, -(one + nu) * 0.5) * (2.0 * t);
    let identity = -boundary / nu + (one + nu) / nu * k3;
    Ok(JtResult {
        direct,
        identity: Some(identity),
        residual: Some((direct - identity).norm()),
    })
}

/// `I_ν = ∫_ℝ (1+u²)^{−(3+ν)/2} du`.
pub fn i_nu(p: &CasimirParameter) -> Result<Complex64, ModelError> {
    let e3 = -(3.0 + p.nu()) * 0.5;
    let half = integrate_to_infinity(|u| power(1.0 + u * u, e3), 0.0, &QuadConfig::with_rel_tol(1e-13))?;
    Ok(half.value * 2.0)
}

/// `sup_x |T^{−(1−ν)} I_T(x) − T^ν J_T + 2/(1−ν)|` over `x_grid`.
///
/// The constant enters with a plus sign: `(T − |u|) ≤ T` gives
/// `I_T ≤ T·J_T` for positive kernels, and the difference is
/// `2T^{1−ν}/(1−ν)` to leading order.
pub fn asymptotic_residual(p: &CasimirParameter, t: f64, x_grid: &[f64]) -> Result<f64, ModelError> {
    let one = Complex64::new(1.0, 0.0);
    if (p.nu() - one).norm() == 0.0 {
        return Err(ModelError::InvalidParameter("ν = 1 has no asymptotic constant".into()));
    }
    if !(t > 1.0) {
        return Err(ModelError::InvalidParameter(format!("T = {t} must exceed 1")));
    }
    let lt = t.ln();
    let nu = p.nu();
    let jt = j_t(p, t)?.direct;
    let shift = (nu * lt).exp() * jt - 2.0 / (one - nu);
    let scale = (-(one - nu) * lt).exp();
    let mut worst: f64 = 0.0;
    for &x in x_grid {
        let r = (scale * i_t(p, t, x)? - shift).norm();
        worst = worst.max(r);
    }
    Ok(worst)
}

/// `∫_{−S}^{S} (S − |w|) c(w) dw` for a grid function `c` on lags `kδ`, `k ∈ [−m, m]`.
fn triangle_weighted(c: &[Complex64], spacing: f64, s: f64) -> Result<Complex64, ModelError> {
    let m = (c.len() / 2) as f64;
    let reach = (m * spacing).min(s);
    let interp = |w: f64| {
        let pos = w / spacing + m;
        if pos <= 0.0 || pos >= (c.len() - 1) as f64 {
            return Complex64::new(0.0, 0.0);
        }
        let i = pos.floor() as usize;
        let f = pos - i as f64;
        // Catmull-Rom through four neighbours.
        let p = |j: isize| {
            let k = i as isize + j;
            if k < 0 || k as usize >= c.len() {
                Complex64::new(0.0, 0.0)
            } else {
                c[k as usize]
            }
        };
        let (p0, p1, p2, p3) = (p(-1), p(0), p(1), p(2));
        p1 + (p2 - p0) * (0.5 * f)
            + (p0 * 2.0 - p1 * 5.0 + p2 * 4.0 - p3) * (0.5 * f * f)
            + (p1 * 3.0 - p0 - p2 * 3.0 + p3) * (0.5 * f * f * f)
    };
    let r = integrate(
        |w| interp(w) * (s - w.abs()),
        -reach,
        reach,
        &[0.0],
        &QuadConfig::with_rel_tol(1e-10),
    )?;
    Ok(r.value)
}

/// `E_{T,t}(f, g) = e^{−(1−ν)t} ∫₀^S∫₀^S ⟨f∘h_σ, g∘h_τ⟩ dσ dτ` with `S = Te^t`.
pub fn correlation(
    f: &ModelFunction,
    g: &ModelFunction,
    p: &CasimirParameter,
    t: f64,
    t_base: f64,
) -> Result<Complex64, ModelError> {
    check_time(t_base)?;
    let s = t_base * t.exp();
    let damping = (-(1.0 - p.nu()) * t).exp();
    // ⟨f(·+σ), g(·+τ)⟩ = ∫ f(y+σ−τ) conj(g(y)) dy
    let value = match (f, g) {
        (ModelFunction::U0(q), ModelFunction::Sampled(gs)) if gs.support.is_some() => {
            correlation_with_u0(q, gs, s)?
        }
        (ModelFunction::Sampled(fs), ModelFunction::U0(q)) if fs.support.is_some() => {
            // ⟨u₀∘h_τ, f∘h_σ⟩ with roles swapped is the conjugate.
            correlation_with_u0(q, fs, s)?.conj()
        }
        (ModelFunction::Sampled(fs), ModelFunction::Sampled(gs))
            if fs.support.is_some() || gs.support.is_some() =>
        {
            fs.check_grid(gs)?;
            let lags = cross_correlation(fs, gs);
            triangle_weighted(&lags, fs.spacing, s)?
        }
        _ => {
            return Err(ModelError::Unsupported(
                "correlation needs at least one compactly supported function".into(),
            ))
        }
    };
    Ok(damping * value)
}

fn correlation_with_u0(q: &CasimirParameter, g: &SampledFunction, s: f64) -> Result<Complex64, ModelError> {
    let range = g.support_range();
    let mut vals = vec![Complex64::new(0.0, 0.0); g.values.len()];
    for i in range {
        if g.values[i] != Complex64::new(0.0, 0.0) {
            vals[i] = g.values[i].conj() * i_t(q, s, g.x(i))?;
        }
    }
    Ok(crate::quad::trapezoid(&vals, g.spacing))
}

/// `c(kδ) = δ Σ_i f_{i+k} conj(g_i)` on the lags where it can be nonzero.
fn cross_correlation(f: &SampledFunction, g: &SampledFunction) -> Vec<Complex64> {
    let rf = f.support_range();
    let rg = g.support_range();
    let reach = (rf.end.max(rg.end) - rf.start.min(rg.start)) as isize;
    let mut out = Vec::with_capacity(2 * reach as usize + 1);
    for k in -reach..=reach {
        let mut acc = Complex64::new(0.0, 0.0);
        for i in rg.clone() {
            let j = i as isize + k;
            if j >= rf.start as isize && (j as usize) < rf.end {
                acc += f.values[j as usize] * g.values[i].conj();
            }
        }
        out.push(acc * f.spacing);
    }
    out
}

/// Terms of the `E_{T,t}(u₀, g)` asymptotic for a compactly supported `g`
/// with plain average `A = ∫g`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UfResidual {
    pub correlation: Complex64,
    /// `((1+ν)/ν)·I_ν·T·A·e^{νt}`.
    pub leading: Complex64,
    /// `(2/(ν(1−ν)))·T^{1−ν}·A`.
    pub subleading: Complex64,
    /// `|E + subleading − leading|`.
    pub residual: f64,
    /// `residual / |leading|`.
    pub relative: f64,
}

pub fn uf_residual(
    p: &CasimirParameter,
    g: &SampledFunction,
    t: f64,
    t_base: f64,
) -> Result<UfResidual, ModelError> {
    let nu = p.nu();
    let one = Complex64::new(1.0, 0.0);
    if p.series() != Series::Complementary {
        return Err(ModelError::Unsupported(
            "the integrable-kernel asymptotic needs 0 < ν < 1".into(),
        ));
    }
    let corr = correlation(
        &ModelFunction::U0(*p),
        &ModelFunction::Sampled(g.clone()),
        p,
        t,
        t_base,
    )?;
    let avg = g.integral();
    let leading = (one + nu) / nu * i_nu(p)? * t_base * avg * (nu * t).exp();
    let subleading = 2.0 / (nu * (one - nu)) * ((one - nu) * t_base.ln()).exp() * avg;
    let residual = (corr + subleading - leading).norm();
    Ok(UfResidual {
        correlation: corr,
        leading,
        subleading,
        residual,
        relative: residual / leading.norm(),
    })
}

/// Primitive `f(x) = ∫_{−∞}^x g` of a compactly supported `g` with `∫g = 0`.
///
/// Cumulative trapezoid plus the Euler–Maclaurin end correction, which is
/// fourth-order accurate on smooth data.
pub fn solve_cohomological(g: &SampledFunction) -> Result<SampledFunction, ModelError> {
    let Some(support) = g.support else {
        return Err(ModelError::Unsupported(
            "the cohomological solver needs a compactly supported right-hand side".into(),
        ));
    };
    let average = g.integral();
    if average.norm() > OBSTRUCTION_TOLERANCE {
        return Err(ModelError::Obstruction { average });
    }
    let dg = g.derivative()?;
    let h = g.spacing;
    let v = &g.values;
    let mut f = vec![Complex64::new(0.0, 0.0); v.len()];
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 1..v.len() {
        acc += (v[i - 1] + v[i]) * (0.5 * h);
        f[i] = acc - (dg.values[i] - dg.values[0]) * (h * h / 12.0);
    }
    let (lo, hi) = support;
    for (i, val) in f.iter_mut().enumerate() {
        let x = g.x(i);
        if x <= lo || x >= hi {
            *val = Complex64::new(0.0, 0.0);
        }
    }
    Ok(SampledFunction {
        values: f,
        ..g.clone()
    })
}

/// `√π Γ((2+ν)/2) / Γ((3+ν)/2)` for real `ν`, the closed form of `I_ν`.
pub fn i_nu_closed_form_real(nu: f64) -> f64 {
    use statrs::function::gamma::ln_gamma;
    PI.sqrt() * (ln_gamma(1.0 + 0.5 * nu) - ln_gamma(1.5 + 0.5 * nu)).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn casimir_branches() {
        let p = CasimirParameter::from_mu(0.21).unwrap();
        assert_eq!(p.series(), Series::Complementary);
        assert!((p.nu() * p.nu() + 4.0 * p.mu() - 1.0).norm() < 1e-14);
        let q = CasimirParameter::from_mu(1.25).unwrap();
        assert_eq!(q.series(), Series::Principal);
        assert!((q.nu() - c(0.0, 2.0)).norm() < 1e-15);
        assert_eq!(q.upsilon(), 2.0);
        assert_eq!(CasimirParameter::from_mu(0.25).unwrap().series(), Series::Special);
        assert!(CasimirParameter::from_nu(c(0.3, 0.1)).is_err());
        assert!(CasimirParameter::from_mu(-1.0).is_err());
        let r = CasimirParameter::from_nu(c(0.0, 3.0)).unwrap();
        assert!((r.mu() - 2.5).abs() < 1e-15);
    }

    #[test]
    fn u0_values() {
        let p = CasimirParameter::from_real_nu(0.0).unwrap();
        assert_eq!(u0(&p, 0.0), c(1.0, 0.0));
        assert!((u0(&p, 1.0).re - 0.5f64.sqrt()).abs() < 1e-15);
        let q = CasimirParameter::from_nu(c(0.0, 1.7)).unwrap();
        for x in [0.3, 2.0, -5.0] {
            assert!((u0(&q, x).norm() - 1.0 / (1.0 + x * x).sqrt()).abs() < 1e-15);
        }
    }

    #[test]
    fn theta_annihilates_u0() {
        let p = CasimirParameter::from_real_nu(0.4).unwrap();
        let w = SampledFunction::window(|x| u0(&p, x), 4.0, 1.0 / 128.0);
        let t = model_derivative(ModelOperator::Theta, &w, &p).unwrap();
        let worst = t.values().iter().map(|v| v.norm()).fold(0.0, f64::max);
        assert!(worst < 1e-7, "{worst}");
    }

    #[test]
    fn model_bracket_of_x_and_u() {
        // The model operators satisfy [dπ(U), dπ(X)] = dπ(U), the image of [X, U] = U.
        let p = CasimirParameter::from_nu(c(0.0, 1.3)).unwrap();
        let err = |spacing: f64| {
            let f = SampledFunction::unit_bump(0.2, 1.5, 8.0, spacing).unwrap();
            let d = |k, g: &SampledFunction| model_derivative(k, g, &p).unwrap();
            let xu = d(ModelOperator::X, &d(ModelOperator::U, &f));
            let ux = d(ModelOperator::U, &d(ModelOperator::X, &f));
            let du = d(ModelOperator::U, &f);
            ux.sub(&xu).unwrap().sub(&du).unwrap().l2_norm() / du.l2_norm()
        };
        let (coarse, fine) = (err(1.0 / 128.0), err(1.0 / 256.0));
        assert!(fine < 1e-5, "{fine}");
        assert!(coarse / fine > 12.0, "order ratio {}", coarse / fine);
    }

    #[test]
    fn theta_is_u_minus_v() {
        let p = CasimirParameter::from_real_nu(0.7).unwrap();
        let f = SampledFunction::unit_bump(-0.5, 1.0, 6.0, 1.0 / 128.0).unwrap();
        let th = model_derivative(ModelOperator::Theta, &f, &p).unwrap();
        let u = model_derivative(ModelOperator::U, &f, &p).unwrap();
        let v = model_derivative(ModelOperator::V, &f, &p).unwrap();
        assert!(th.sub(&u.sub(&v).unwrap()).unwrap().l2_norm() < 1e-13);
    }

    #[test]
    fn derivative_of_zero_is_zero() {
        let z = SampledFunction::zero(4.0, 0.125);
        let p = CasimirParameter::from_real_nu(0.5).unwrap();
        let d = model_derivative(ModelOperator::U, &z, &p).unwrap();
        assert!(d.values().iter().all(|v| *v == c(0.0, 0.0)));
    }

    #[test]
    fn margin_is_enforced() {
        let f = SampledFunction::from_fn(|_| c(1.0, 0.0), (-1.0, 3.99), 4.0, 0.01);
        assert!(matches!(f, Err(ModelError::InsufficientMargin { .. })));
    }

    #[test]
    fn triangle_kernel_at_nu_one() {
        let p = CasimirParameter::from_real_nu(1.0).unwrap();
        let v = i_t(&p, 1.0, 0.0).unwrap();
        let exact = 2.0 * (1f64.atan() - 0.5 * 2f64.ln());
        assert!((v.re - exact).abs() < 1e-12);
        assert!((v.re - 0.877649).abs() < 1e-6);
    }

    #[test]
    fn i_t_symmetry_and_small_t() {
        let p = CasimirParameter::from_nu(c(0.0, 2.0)).unwrap();
        for x in [0.3, 1.7] {
            assert!((i_t(&p, 3.0, x).unwrap() - i_t(&p, 3.0, -x).unwrap()).norm() < 1e-12);
            let t = 1e-4;
            let ratio = i_t(&p, t, x).unwrap() / (t * t);
            assert!((ratio - u0(&p, x)).norm() < 1e-6);
        }
    }

    #[test]
    fn j_t_oracles() {
        let p = CasimirParameter::from_real_nu(1.0).unwrap();
        assert!((j_t(&p, 1.0).unwrap().direct.re - PI / 2.0).abs() < 1e-14);
        let q = CasimirParameter::from_real_nu(0.5).unwrap();
        assert!(j_t(&q, 50.0).unwrap().residual.unwrap() < 1e-8);
        let z = CasimirParameter::from_real_nu(0.0).unwrap();
        assert!(j_t(&z, 2.0).unwrap().identity.is_none());
    }

    #[test]
    fn i_nu_oracles() {
        let z = CasimirParameter::from_real_nu(0.0).unwrap();
        assert!((i_nu(&z).unwrap().re - 2.0).abs() < 1e-12);
        let h = CasimirParameter::from_real_nu(0.5).unwrap();
        let v = i_nu(&h).unwrap().re;
        assert!((v - 1.748_038_369_528_080_1).abs() < 1e-11, "{v}");
        assert!((v - i_nu_closed_form_real(0.5)).abs() < 1e-11);
    }

    #[test]
    fn solver_inverts_derivative() {
        let w = 1.2;
        let support = (0.5 - w, 0.5 + w);
        let phi = SampledFunction::from_fn(|x| c(bump(x, 0.5, w), 0.0), support, 8.0, 1.0 / 128.0).unwrap();
        let dphi = |x: f64| {
            let s = (x - 0.5) / w;
            bump(x, 0.5, w) * (-2.0 * s / (1.0 - s * s).powi(2)) / w
        };
        let g = SampledFunction::from_fn(|x| c(dphi(x), 0.0), support, 8.0, 1.0 / 128.0).unwrap();
        let f = solve_cohomological(&g).unwrap();
        let err = f.sub(&phi).unwrap().l2_norm() / phi.l2_norm();
        assert!(err < 1e-7, "{err}");
    }

    #[test]
    fn solver_reports_obstruction() {
        let g = SampledFunction::unit_bump(0.0, 1.0, 8.0, 1.0 / 128.0).unwrap();
        match solve_cohomological(&g) {
            Err(ModelError::Obstruction { average }) => assert!((average - 1.0).norm() < 1e-10),
            other => panic!("expected obstruction, got {other:?}"),
        }
    }

    #[test]
    fn solver_on_shifted_difference() {
        let a = SampledFunction::unit_bump(0.0, 1.0, 8.0, 1.0 / 128.0).unwrap();
        let b = SampledFunction::unit_bump(3.0, 1.0, 8.0, 1.0 / 128.0).unwrap();
        let g = a.sub(&b).unwrap();
        let f = solve_cohomological(&g).unwrap();
        let mass: f64 = a.integral().re;
        for i in 0..f.len() {
            let x = f.x(i);
            if !(-1.0..=4.0).contains(&x) {
                assert_eq!(f.values()[i], c(0.0, 0.0));
            }
            assert!(f.values()[i].norm() <= mass + 1e-12);
        }
    }

    #[test]
    fn compact_correlation_small_time() {
        let f = SampledFunction::unit_bump(0.0, 1.0, 6.0, 1.0 / 128.0).unwrap();
        let p = CasimirParameter::from_real_nu(0.5).unwrap();
        let t = 1e-3;
        let e = correlation(&ModelFunction::Sampled(f.clone()), &ModelFunction::Sampled(f.clone()), &p, 0.0, t).unwrap();
        let norm2 = f.l2_norm().powi(2);
        assert!((e.re / (t * t) - norm2).abs() < 1e-4 * norm2);
    }

    #[test]
    fn u0_correlation_matches_lag_route() {
        // Window u₀ wide enough that the compact route sees the same data.
        let p = CasimirParameter::from_real_nu(0.5).unwrap();
        let g = SampledFunction::unit_bump(0.3, 0.8, 16.0, 1.0 / 128.0).unwrap();
        let direct = correlation(&ModelFunction::U0(p), &ModelFunction::Sampled(g.clone()), &p, 0.0, 2.0).unwrap();
        let w = SampledFunction::from_fn(|x| u0(&p, x), (-15.0, 15.0), 16.0, 1.0 / 128.0).unwrap();
        let lagged = correlation(&ModelFunction::Sampled(w), &ModelFunction::Sampled(g), &p, 0.0, 2.0).unwrap();
        assert!((direct - lagged).norm() < 1e-5 * direct.norm(), "{direct} {lagged}");
    }
}
