//! Geodesic renormalization of the coefficient pair `(α⁺, α⁻)`.
//!
//! Under `g_t` the pair obeys `α̇ = Λα + ρ(t)` with `Λ = diag(λ⁺, λ⁻)`,
//! `λ± = (1 ∓ ν)/2`, or the Jordan block `J = ½[[1, −1], [0, 1]]` when
//! `ν = 0`. The forcing `ρ` is piecewise linear on a knot set followed by
//! the tail `c₀ + c₁e^{−τ}`, so every solve below is an exact
//! variation-of-constants formula evaluated in closed form.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::repmodel::{CasimirParameter, Series};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RenormError {
    #[error("invalid forcing: {0}")]
    InvalidForcing(String),
    #[error("time {0} must be finite and ≥ 0")]
    InvalidTime(f64),
    #[error("the {component} tail c₀ = {c0} does not decay against Re λ = {re_lambda}")]
    DivergentTail {
        component: &'static str,
        c0: Complex64,
        re_lambda: f64,
    },
    #[error("spectrum has {entries} entries but only {fields} cocycle fields were supplied")]
    MissingField { entries: usize, fields: usize },
    #[error("sample index {index} is outside the field of length {len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("invalid arc statistics: {0}")]
    InvalidArc(String),
    #[error("invalid spectral observable: {0}")]
    InvalidObservable(String),
}

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// `m_k(z) = ∫₀¹ v^k e^{zv} dv` for `k = 0, 1, 2`.
fn moments(z: Complex64) -> [Complex64; 3] {
    if z.norm() < 1.0 {
        let mut out = [ZERO; 3];
        let mut term = Complex64::new(1.0, 0.0);
        for j in 0..40 {
            for (k, o) in out.iter_mut().enumerate() {
                *o += term / (k + j + 1) as f64;
            }
            term = term * z / (j + 1) as f64;
            if term.norm() < 1e-18 {
                break;
            }
        }
        out
    } else {
        let ez = z.exp();
        let m0 = (ez - 1.0) / z;
        let m1 = (ez - m0) / z;
        let m2 = (ez - m1 * 2.0) / z;
        [m0, m1, m2]
    }
}

/// Forcing tail `c₀ + c₁e^{−τ}` beyond the last knot.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Tail {
    pub c0: Complex64,
    pub c1: Complex64,
}

impl Tail {
    pub fn eval(&self, tau: f64) -> Complex64 {
        self.c0 + self.c1 * (-tau).exp()
    }

    /// The tail seen from time `t` onwards.
    fn shifted(&self, t: f64) -> Self {
        Self {
            c0: self.c0,
            c1: self.c1 * (-t).exp(),
        }
    }
}

/// The pair `(ρ⁺, ρ⁻)` as functions of `τ ≥ 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ForcingData", into = "ForcingData")]
pub struct Forcing {
    knots: Vec<f64>,
    plus: Vec<Complex64>,
    minus: Vec<Complex64>,
    tail_plus: Tail,
    tail_minus: Tail,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ForcingData {
    knots: Vec<f64>,
    plus: Vec<Complex64>,
    minus: Vec<Complex64>,
    tail_plus: Tail,
    tail_minus: Tail,
}

impl TryFrom<ForcingData> for Forcing {
    type Error = RenormError;

    fn try_from(d: ForcingData) -> Result<Self, RenormError> {
        Forcing::new(d.knots, d.plus, d.minus, d.tail_plus, d.tail_minus)
    }
}

impl From<Forcing> for ForcingData {
    fn from(f: Forcing) -> Self {
        ForcingData {
            knots: f.knots,
            plus: f.plus,
            minus: f.minus,
            tail_plus: f.tail_plus,
            tail_minus: f.tail_minus,
        }
    }
}

impl Forcing {
    /// Piecewise-linear data on `knots` (starting at 0, increasing), then the tails.
    pub fn new(
        knots: Vec<f64>,
        plus: Vec<Complex64>,
        minus: Vec<Complex64>,
        tail_plus: Tail,
        tail_minus: Tail,
    ) -> Result<Self, RenormError> {
        if knots.is_empty() || knots[0] != 0.0 {
            return Err(RenormError::InvalidForcing("knots must start at 0".into()));
        }
        if knots.windows(2).any(|w| !(w[1] > w[0])) || knots.iter().any(|k| !k.is_finite()) {
            return Err(RenormError::InvalidForcing("knots must be finite and increasing".into()));
        }
        if plus.len() != knots.len() || minus.len() != knots.len() {
            return Err(RenormError::InvalidForcing(format!(
                "{} knots but {} / {} values",
                knots.len(),
                plus.len(),
                minus.len()
            )));
        }
        let finite = |z: &Complex64| z.re.is_finite() && z.im.is_finite();
        if !plus.iter().chain(&minus).all(finite)
            || ![tail_plus.c0, tail_plus.c1, tail_minus.c0, tail_minus.c1].iter().all(finite)
        {
            return Err(RenormError::InvalidForcing("non-finite forcing value".into()));
        }
        Ok(Self {
            knots,
            plus,
            minus,
            tail_plus,
            tail_minus,
        })
    }

    /// The tail model alone, from `τ = 0`.
    pub fn tail_only(tail_plus: Tail, tail_minus: Tail) -> Self {
        Self {
            knots: vec![0.0],
            plus: vec![tail_plus.eval(0.0)],
            minus: vec![tail_minus.eval(0.0)],
            tail_plus,
            tail_minus,
        }
    }

    pub fn zero() -> Self {
        Self::tail_only(Tail::default(), Tail::default())
    }

    /// `ρ±(τ) = c± e^{−τ}`.
    pub fn exponential(c_plus: Complex64, c_minus: Complex64) -> Self {
        Self::tail_only(
            Tail { c0: ZERO, c1: c_plus },
            Tail { c0: ZERO, c1: c_minus },
        )
    }

    /// Samples `f` at `n` uniform knots on `[0, t_max]` and attaches the tails.
    pub fn sampled<F>(f: F, t_max: f64, n: usize, tail_plus: Tail, tail_minus: Tail) -> Result<Self, RenormError>
    where
        F: Fn(f64) -> (Complex64, Complex64),
    {
        if n < 2 || !(t_max > 0.0) {
            return Err(RenormError::InvalidForcing("need n ≥ 2 knots and t_max > 0".into()));
        }
        let knots: Vec<f64> = (0..n).map(|i| t_max * i as f64 / (n - 1) as f64).collect();
        let (plus, minus) = knots.iter().map(|&t| f(t)).unzip();
        Self::new(knots, plus, minus, tail_plus, tail_minus)
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn t_max(&self) -> f64 {
        *self.knots.last().expect("nonempty knots")
    }

    pub fn tails(&self) -> (Tail, Tail) {
        (self.tail_plus, self.tail_minus)
    }

    pub fn eval(&self, tau: f64) -> (Complex64, Complex64) {
        if tau > self.t_max() {
            return (self.tail_plus.eval(tau), self.tail_minus.eval(tau));
        }
        let k = self.knots.partition_point(|&x| x <= tau).max(1);
        if k >= self.knots.len() {
            let last = self.knots.len() - 1;
            return (self.plus[last], self.minus[last]);
        }
        let (a, b) = (self.knots[k - 1], self.knots[k]);
        let w = (tau - a) / (b - a);
        (
            self.plus[k - 1] * (1.0 - w) + self.plus[k] * w,
            self.minus[k - 1] * (1.0 - w) + self.minus[k] * w,
        )
    }

    /// `τ ↦ ρ(t + τ)`.
    pub fn shifted(&self, t: f64) -> Result<Self, RenormError> {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(RenormError::InvalidTime(t));
        }
        if t == 0.0 {
            return Ok(self.clone());
        }
        let tail_plus = self.tail_plus.shifted(t);
        let tail_minus = self.tail_minus.shifted(t);
        if t >= self.t_max() {
            return Ok(Self::tail_only(tail_plus, tail_minus));
        }
        let (p0, m0) = self.eval(t);
        let mut knots = vec![0.0];
        let mut plus = vec![p0];
        let mut minus = vec![m0];
        for (i, &k) in self.knots.iter().enumerate() {
            if k > t {
                knots.push(k - t);
                plus.push(self.plus[i]);
                minus.push(self.minus[i]);
            }
        }
        Self::new(knots, plus, minus, tail_plus, tail_minus)
    }

    /// Linear segments inside `[0, min(t, t_max)]` as `(a, h, ρ(a), ρ(a+h))` per component.
    fn segments(&self, t: f64) -> Vec<(f64, f64, [Complex64; 2], [Complex64; 2])> {
        let mut out = Vec::new();
        for i in 1..self.knots.len() {
            let a = self.knots[i - 1];
            if a >= t {
                break;
            }
            let b = self.knots[i].min(t);
            let (pb, mb) = if b < self.knots[i] {
                self.eval(b)
            } else {
                (self.plus[i], self.minus[i])
            };
            out.push((a, b - a, [self.plus[i - 1], self.minus[i - 1]], [pb, mb]));
        }
        out
    }
}

/// `∫_a^{a+h} e^{−λτ}(ρ_a + (ρ_b − ρ_a)(τ − a)/h) dτ`.
fn linear_segment(lambda: Complex64, a: f64, h: f64, ra: Complex64, rb: Complex64) -> Complex64 {
    let m = moments(-lambda * h);
    (-lambda * a).exp() * h * (ra * m[0] + (rb - ra) * m[1])
}

/// `∫_a^{a+h} τ e^{−λτ}(ρ_a + (ρ_b − ρ_a)(τ − a)/h) dτ`.
fn linear_segment_tau(lambda: Complex64, a: f64, h: f64, ra: Complex64, rb: Complex64) -> Complex64 {
    let m = moments(-lambda * h);
    let d = rb - ra;
    (-lambda * a).exp() * h * (ra * a * m[0] + (d * a + ra * h) * m[1] + d * h * m[2])
}

/// `∫_a^b e^{−kτ} dτ` and `∫_a^b τ e^{−kτ} dτ`, with `b = ∞` allowed.
fn exp_integrals(k: Complex64, a: f64, b: f64) -> (Complex64, Complex64) {
    let ea = (-k * a).exp();
    if b.is_infinite() {
        return (ea / k, ea * (a / k + 1.0 / (k * k)));
    }
    let h = b - a;
    let m = moments(-k * h);
    (ea * h * m[0], ea * (a * h * m[0] + h * h * m[1]))
}

/// Tail integrals `∫_a^b e^{−λτ}(c₀ + c₁e^{−τ})` and the `τ`-weighted analogue.
fn tail_integrals(lambda: Complex64, tail: &Tail, a: f64, b: f64) -> (Complex64, Complex64) {
    let (i0, t0) = exp_integrals(lambda, a, b);
    let (i1, t1) = exp_integrals(lambda + 1.0, a, b);
    (tail.c0 * i0 + tail.c1 * i1, tail.c0 * t0 + tail.c1 * t1)
}

/// How the pair transforms under the geodesic flow.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Renormalization {
    Diagonal { plus: Complex64, minus: Complex64 },
    Jordan,
}

impl Renormalization {
    pub fn for_parameter(p: &CasimirParameter) -> Self {
        if p.series() == Series::Special {
            Renormalization::Jordan
        } else {
            let one = Complex64::new(1.0, 0.0);
            Renormalization::Diagonal {
                plus: (one - p.nu()) * 0.5,
                minus: (one + p.nu()) * 0.5,
            }
        }
    }

    /// `e^{tΛ}` applied to a pair.
    pub fn propagate(&self, t: f64, v: [Complex64; 2]) -> [Complex64; 2] {
        match *self {
            Renormalization::Diagonal { plus, minus } => [(plus * t).exp() * v[0], (minus * t).exp() * v[1]],
            Renormalization::Jordan => {
                let s = (0.5 * t).exp();
                [(v[0] - v[1] * (0.5 * t)) * s, v[1] * s]
            }
        }
    }

    /// `∫_a^b e^{−τΛ}ρ(τ) dτ` for the forcing restricted to `[a, b]`.
    fn integrate(&self, forcing: &Forcing, a: f64, b: f64) -> Result<[Complex64; 2], RenormError> {
        let mut acc = [ZERO; 2];
        // Linear part; callers only use a = 0.
        debug_assert_eq!(a, 0.0);
        let grid_end = forcing.t_max().min(b);
        for (s, h, ra, rb) in forcing.segments(grid_end) {
            match *self {
                Renormalization::Diagonal { plus, minus } => {
                    acc[0] += linear_segment(plus, s, h, ra[0], rb[0]);
                    acc[1] += linear_segment(minus, s, h, ra[1], rb[1]);
                }
                Renormalization::Jordan => {
                    let l = Complex64::new(0.5, 0.0);
                    acc[0] += linear_segment(l, s, h, ra[0], rb[0]) + linear_segment_tau(l, s, h, ra[1], rb[1]) * 0.5;
                    acc[1] += linear_segment(l, s, h, ra[1], rb[1]);
                }
            }
        }
        if b > forcing.t_max() {
            let start = forcing.t_max();
            self.check_tail(forcing, b)?;
            let (tp, tm) = (forcing.tail_plus, forcing.tail_minus);
            match *self {
                Renormalization::Diagonal { plus, minus } => {
                    acc[0] += tail_integrals(plus, &tp, start, b).0;
                    acc[1] += tail_integrals(minus, &tm, start, b).0;
                }
                Renormalization::Jordan => {
                    let l = Complex64::new(0.5, 0.0);
                    let (p0, _) = tail_integrals(l, &tp, start, b);
                    let (m0, m1) = tail_integrals(l, &tm, start, b);
                    acc[0] += p0 + m1 * 0.5;
                    acc[1] += m0;
                }
            }
        }
        Ok(acc)
    }

    fn check_tail(&self, forcing: &Forcing, b: f64) -> Result<(), RenormError> {
        if b.is_finite() {
            return Ok(());
        }
        let (lp, lm) = match *self {
            Renormalization::Diagonal { plus, minus } => (plus.re, minus.re),
            Renormalization::Jordan => (0.5, 0.5),
        };
        for (component, tail, re_lambda) in [("plus", forcing.tail_plus, lp), ("minus", forcing.tail_minus, lm)] {
            if re_lambda <= 0.0 && tail.c0 != ZERO {
                return Err(RenormError::DivergentTail {
                    component,
                    c0: tail.c0,
                    re_lambda,
                });
            }
            if re_lambda + 1.0 <= 0.0 && tail.c1 != ZERO {
                return Err(RenormError::DivergentTail {
                    component,
                    c0: tail.c1,
                    re_lambda,
                });
            }
        }
        Ok(())
    }

    /// Smallest real part among the eigenvalues.
    pub fn min_re(&self) -> f64 {
        match *self {
            Renormalization::Diagonal { plus, minus } => plus.re.min(minus.re),
            Renormalization::Jordan => 0.5,
        }
    }
}

/// Coefficients `(α⁺, α⁻)` attached to one Casimir parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CocycleState {
    pub alpha_plus: Complex64,
    pub alpha_minus: Complex64,
    pub parameter: CasimirParameter,
}

impl CocycleState {
    pub fn new(parameter: CasimirParameter, alpha_plus: Complex64, alpha_minus: Complex64) -> Self {
        Self {
            alpha_plus,
            alpha_minus,
            parameter,
        }
    }

    pub fn pair(&self) -> [Complex64; 2] {
        [self.alpha_plus, self.alpha_minus]
    }

    fn with_pair(&self, v: [Complex64; 2]) -> Self {
        Self {
            alpha_plus: v[0],
            alpha_minus: v[1],
            parameter: self.parameter,
        }
    }

    pub fn renormalization(&self) -> Renormalization {
        Renormalization::for_parameter(&self.parameter)
    }
}

/// `α(t) = e^{tΛ}[α(0) + ∫₀^t e^{−τΛ}ρ(τ) dτ]`.
pub fn evolve(state: &CocycleState, forcing: &Forcing, t: f64) -> Result<CocycleState, RenormError> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(RenormError::InvalidTime(t));
    }
    let r = state.renormalization();
    let i = r.integrate(forcing, 0.0, t)?;
    let v = state.pair();
    Ok(state.with_pair(r.propagate(t, [v[0] + i[0], v[1] + i[1]])))
}

/// Limit `β̂ = α(0) + ∫₀^∞ e^{−τΛ}ρ(τ) dτ` with a bound on the part of the
/// integral carried by the tail beyond the last knot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RenormLimit {
    pub plus: Complex64,
    pub minus: Complex64,
    pub tail_bound: f64,
}

pub fn renormalized_limit(state: &CocycleState, forcing: &Forcing) -> Result<RenormLimit, RenormError> {
    let r = state.renormalization();
    let i = r.integrate(forcing, 0.0, f64::INFINITY)?;
    let t = forcing.t_max();
    let k = r.min_re();
    let (tp, tm) = forcing.tails();
    let c0 = tp.c0.norm().max(tm.c0.norm());
    let c1 = tp.c1.norm().max(tm.c1.norm());
    let tail_bound = match r {
        Renormalization::Diagonal { .. } => c0 * (-k * t).exp() / k + c1 * (-(1.0 + k) * t).exp() / (1.0 + k),
        Renormalization::Jordan => c0 * jordan_tail(0.5, t) + c1 * jordan_tail(1.5, t),
    };
    Ok(RenormLimit {
        plus: state.alpha_plus + i[0],
        minus: state.alpha_minus + i[1],
        tail_bound,
    })
}

/// `∫_t^∞ (1 + τ/2) e^{−kτ} dτ`.
fn jordan_tail(k: f64, t: f64) -> f64 {
    (-k * t).exp() * (1.0 / k + t / (2.0 * k) + 1.0 / (2.0 * k * k))
}

/// Residual of `e^{−tΛ}·β̂(evolve(s, ρ, t), ρ(t + ·)) = β̂(s, ρ)`.
pub fn consistency_residual(state: &CocycleState, forcing: &Forcing, t: f64) -> Result<f64, RenormError> {
    let direct = renormalized_limit(state, forcing)?;
    let moved = evolve(state, forcing, t)?;
    let later = renormalized_limit(&moved, &forcing.shifted(t)?)?;
    let back = state.renormalization().propagate(-t, [later.plus, later.minus]);
    Ok((back[0] - direct.plus).norm().max((back[1] - direct.minus).norm()))
}

/// Transverse lengths `∫|X̂|, ∫|Û|, ∫|V̂|` of an arc.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArcStats {
    pub len_x: f64,
    pub len_u: f64,
    pub len_v: f64,
}

impl ArcStats {
    pub fn new(len_x: f64, len_u: f64, len_v: f64) -> Result<Self, RenormError> {
        if [len_x, len_u, len_v].iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(RenormError::InvalidArc(format!(
                "lengths ({len_x}, {len_u}, {len_v}) must be finite and ≥ 0"
            )));
        }
        Ok(Self { len_x, len_u, len_v })
    }

    /// Image of the arc under the geodesic flow for time `t`.
    pub fn geodesic_image(&self, t: f64) -> Self {
        Self {
            len_x: self.len_x,
            len_u: self.len_u * t.exp(),
            len_v: self.len_v * (-t).exp(),
        }
    }
}

/// Declared bound `|ρ±(τ)| ≤ C(1 + len_X + e^{−τ}len_V)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForcingBound {
    pub c: f64,
    pub arc: ArcStats,
}

impl ForcingBound {
    pub fn at(&self, tau: f64) -> f64 {
        self.c * (1.0 + self.arc.len_x + (-tau).exp() * self.arc.len_v)
    }

    /// Checks the bound at the knots, segment midpoints and along the tail.
    pub fn holds_for(&self, forcing: &Forcing) -> bool {
        let mut taus: Vec<f64> = forcing.knots().to_vec();
        taus.extend(forcing.knots().windows(2).map(|w| 0.5 * (w[0] + w[1])));
        let t = forcing.t_max();
        taus.extend((1..=200).map(|i| t + 0.1 * i as f64));
        taus.iter().all(|&tau| {
            let (p, m) = forcing.eval(tau);
            let b = self.at(tau) * (1.0 + 1e-12);
            p.norm() <= b && m.norm() <= b
        })
    }

    /// Closed-form bound on `|∫_t^∞ e^{−τΛ}ρ|`, per component.
    pub fn envelope(&self, r: &Renormalization, t: f64) -> [f64; 2] {
        let (a, b, c) = (self.arc.len_x, self.arc.len_v, self.c);
        let scalar = |k: f64| c * ((1.0 + a) * (-k * t).exp() / k + b * (-(1.0 + k) * t).exp() / (1.0 + k));
        match *r {
            Renormalization::Diagonal { plus, minus } => [scalar(plus.re), scalar(minus.re)],
            Renormalization::Jordan => [
                c * ((1.0 + a) * jordan_tail(0.5, t) + b * jordan_tail(1.5, t)),
                scalar(0.5),
            ],
        }
    }

    /// Bound on `|β̂±|` for zero initial data.
    pub fn limit_bound(&self, r: &Renormalization) -> [f64; 2] {
        self.envelope(r, 0.0)
    }
}

/// Convergence gap `|β̂ − e^{−tΛ}α(t)|` per component.
pub fn convergence_gap(state: &CocycleState, forcing: &Forcing, t: f64) -> Result<[f64; 2], RenormError> {
    let lim = renormalized_limit(state, forcing)?;
    let moved = evolve(state, forcing, t)?;
    let back = state.renormalization().propagate(-t, moved.pair());
    Ok([(lim.plus - back[0]).norm(), (lim.minus - back[1]).norm()])
}

/// Gauge in the Hölder bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HolderGauge {
    /// `(1 + X + U·V)·U^α`.
    Power(f64),
    /// `(1 + X + U·V)·U^{1/2}(1 + |log U|)`.
    LogCorrected,
}

impl HolderGauge {
    /// Gauge for the `+` or `−` component of a parameter.
    pub fn for_parameter(p: &CasimirParameter, plus: bool) -> Self {
        if p.series() == Series::Special {
            HolderGauge::LogCorrected
        } else {
            let re = p.nu().re;
            HolderGauge::Power(if plus { 0.5 * (1.0 - re) } else { 0.5 * (1.0 + re) })
        }
    }

    pub fn eval(&self, arc: &ArcStats) -> f64 {
        let base = 1.0 + arc.len_x + arc.len_u * arc.len_v;
        match *self {
            HolderGauge::Power(alpha) => base * arc.len_u.powf(alpha),
            HolderGauge::LogCorrected => base * arc.len_u.sqrt() * (1.0 + arc.len_u.ln().abs()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HolderReport {
    pub max_ratio: f64,
    pub worst_index: Option<usize>,
    pub violations: Vec<usize>,
    pub constant: f64,
    pub pass: bool,
}

/// Checks `|β̂| ≤ C · gauge(arc)` over all inputs.
pub fn holder_check(values: &[(Complex64, ArcStats)], gauge: HolderGauge, constant: f64) -> HolderReport {
    let mut max_ratio: f64 = 0.0;
    let mut worst_index = None;
    let mut violations = Vec::new();
    for (i, (v, arc)) in values.iter().enumerate() {
        let g = gauge.eval(arc);
        let ratio = if v.norm() == 0.0 {
            0.0
        } else if g > 0.0 {
            v.norm() / g
        } else {
            f64::INFINITY
        };
        if ratio > max_ratio {
            max_ratio = ratio;
            worst_index = Some(i);
        }
        if ratio > constant {
            violations.push(i);
        }
    }
    HolderReport {
        max_ratio,
        worst_index,
        pass: violations.is_empty(),
        violations,
        constant,
    }
}

/// One spectral component `(μ, D⁺(f), D⁻(f))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralEntry {
    pub parameter: CasimirParameter,
    pub d_plus: Complex64,
    pub d_minus: Complex64,
}

/// A test function through its invariant-distribution coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpectralData", into = "SpectralData")]
pub struct SpectralObservable {
    pub entries: Vec<SpectralEntry>,
    /// Principal entries satisfy `D⁻ = conj(D⁺)`.
    pub conjugate: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct SpectralData {
    entries: Vec<SpectralEntry>,
    #[serde(default)]
    conjugate: bool,
}

impl TryFrom<SpectralData> for SpectralObservable {
    type Error = RenormError;

    fn try_from(d: SpectralData) -> Result<Self, RenormError> {
        SpectralObservable::new(d.entries, d.conjugate)
    }
}

impl From<SpectralObservable> for SpectralData {
    fn from(s: SpectralObservable) -> Self {
        SpectralData {
            entries: s.entries,
            conjugate: s.conjugate,
        }
    }
}

impl SpectralObservable {
    pub fn new(entries: Vec<SpectralEntry>, conjugate: bool) -> Result<Self, RenormError> {
        for (i, e) in entries.iter().enumerate() {
            let finite = [e.d_plus, e.d_minus].iter().all(|z| z.re.is_finite() && z.im.is_finite());
            if !finite {
                return Err(RenormError::InvalidObservable(format!("entry {i} has a non-finite coefficient")));
            }
            if conjugate && e.parameter.series() == Series::Principal && e.d_minus != e.d_plus.conj() {
                return Err(RenormError::InvalidObservable(format!(
                    "entry {i}: D⁻ = {} is not conj(D⁺) = {}",
                    e.d_minus,
                    e.d_plus.conj()
                )));
            }
        }
        Ok(Self { entries, conjugate })
    }

    /// Principal-series spectrum with `D⁻ = conj(D⁺)` imposed.
    pub fn conjugated(params: &[(CasimirParameter, Complex64)]) -> Result<Self, RenormError> {
        let entries = params
            .iter()
            .map(|&(parameter, d_plus)| SpectralEntry {
                parameter,
                d_plus,
                d_minus: d_plus.conj(),
            })
            .collect();
        Self::new(entries, true)
    }

    /// One complementary entry with real `ν` and the given `D⁺`.
    pub fn single_real(nu: f64, d_plus: Complex64) -> Result<Self, RenormError> {
        let parameter = CasimirParameter::from_real_nu(nu)
            .map_err(|e| RenormError::InvalidObservable(e.to_string()))?;
        Self::new(
            vec![SpectralEntry {
                parameter,
                d_plus,
                d_minus: ZERO,
            }],
            false,
        )
    }

    /// `Σ(|D⁺| + |D⁻|)`.
    pub fn total_mass(&self) -> f64 {
        self.entries.iter().map(|e| e.d_plus.norm() + e.d_minus.norm()).sum()
    }
}

/// Values of `β±_μ(x, T)` over a sample index `x`, at one fixed `T`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CocyclePair {
    pub plus: Vec<Complex64>,
    pub minus: Vec<Complex64>,
}

impl CocyclePair {
    /// A field with `β⁻ = conj(β⁺)`.
    pub fn conjugate_of(plus: Vec<Complex64>) -> Self {
        let minus = plus.iter().map(|z| z.conj()).collect();
        Self { plus, minus }
    }
}

/// `β_f(x, T) = Σ D⁺_μ β⁺_μ(x, T) + D⁻_μ β⁻_μ(x, T)`.
pub fn cocycle_expand(f: &SpectralObservable, fields: &[CocyclePair], x: usize) -> Result<Complex64, RenormError> {
    if fields.len() < f.entries.len() {
        return Err(RenormError::MissingField {
            entries: f.entries.len(),
            fields: fields.len(),
        });
    }
    let mut acc = ZERO;
    for (e, field) in f.entries.iter().zip(fields) {
        let len = field.plus.len().min(field.minus.len());
        if x >= len {
            return Err(RenormError::IndexOutOfRange { index: x, len });
        }
        acc += e.d_plus * field.plus[x] + e.d_minus * field.minus[x];
    }
    Ok(acc)
}
