//! PSL(2,ℝ) arithmetic, the geodesic and horocycle flows, and the Möbius
//! action on the Poincaré disk.
//!
//! Group elements are real unimodular 2×2 matrices modulo sign. The disk
//! picture is reached through the Cayley map `z ↦ (z - i)/(z + i)`, which
//! conjugates `[[a, b], [c, d]]` to the SU(1,1) matrix `[[α, β], [β̄, ᾱ]]`
//! with `α = ((a+d) + i(b-c))/2` and `β = ((a-d) - i(b+c))/2`. The base
//! point of `g` in the disk is `g·0 = β/ᾱ` and its frame angle is the
//! argument of the derivative of `g` at 0, namely `2 arg α`.
//!
//! Flows act on the right: `flow(W, t, g) = g · exp(tW)`.

use std::fmt;
use std::ops::Mul;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Plain 2×2 real matrix, row major.
pub type Mat2 = [[f64; 2]; 2];

pub const ZERO_MAT: Mat2 = [[0.0, 0.0], [0.0, 0.0]];

/// Tolerance on `|det - 1|` accepted by the checked constructor.
pub const DET_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Sl2Error {
    #[error("matrix is not unimodular: det = {det}")]
    NotUnimodular { det: f64 },
    #[error("matrix has non-positive determinant {det}; cannot be renormalised into SL(2,R)")]
    NonPositiveDeterminant { det: f64 },
    #[error("point {re} + {im}i is not inside the open unit disk")]
    OutsideDisk { re: f64, im: f64 },
}

pub fn mat_mul(x: &Mat2, y: &Mat2) -> Mat2 {
    [
        [
            x[0][0] * y[0][0] + x[0][1] * y[1][0],
            x[0][0] * y[0][1] + x[0][1] * y[1][1],
        ],
        [
            x[1][0] * y[0][0] + x[1][1] * y[1][0],
            x[1][0] * y[0][1] + x[1][1] * y[1][1],
        ],
    ]
}

pub fn mat_sub(x: &Mat2, y: &Mat2) -> Mat2 {
    [
        [x[0][0] - y[0][0], x[0][1] - y[0][1]],
        [x[1][0] - y[1][0], x[1][1] - y[1][1]],
    ]
}

pub fn mat_scale(x: &Mat2, s: f64) -> Mat2 {
    [[x[0][0] * s, x[0][1] * s], [x[1][0] * s, x[1][1] * s]]
}

/// Largest absolute entry.
pub fn mat_max_abs(x: &Mat2) -> f64 {
    x.iter().flatten().fold(0.0_f64, |m, v| m.max(v.abs()))
}

/// Matrix commutator `[x, y] = xy - yx`.
pub fn commutator(x: &Mat2, y: &Mat2) -> Mat2 {
    mat_sub(&mat_mul(x, y), &mat_mul(y, x))
}

/// Lie algebra generators of the geodesic flow (X) and of the stable (U)
/// and unstable (V) horocycle flows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Generator {
    X,
    U,
    V,
}

impl Generator {
    pub fn matrix(self) -> Mat2 {
        match self {
            Generator::X => [[0.5, 0.0], [0.0, -0.5]],
            Generator::U => [[0.0, 1.0], [0.0, 0.0]],
            Generator::V => [[0.0, 0.0], [1.0, 0.0]],
        }
    }
}

pub fn generator_matrix(kind: Generator) -> Mat2 {
    kind.matrix()
}

/// An element of PSL(2,ℝ), stored as its canonical SL(2,ℝ) representative
/// (`a > 0`, or `a = 0` and `b > 0`).
#[derive(Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupElement {
    a: f64,
    b: f64,
    c: f64,
    d: f64,
}

impl fmt::Debug for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{}, {}], [{}, {}]]", self.a, self.b, self.c, self.d)
    }
}

impl GroupElement {
    pub const IDENTITY: GroupElement = GroupElement {
        a: 1.0,
        b: 0.0,
        c: 0.0,
        d: 1.0,
    };

    /// Checked constructor: the determinant must be 1 to [`DET_TOLERANCE`].
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self, Sl2Error> {
        let det = a * d - b * c;
        if (det - 1.0).abs() > DET_TOLERANCE {
            return Err(Sl2Error::NotUnimodular { det });
        }
        Ok(Self::from_raw(a, b, c, d))
    }

    /// Divides by `√det`; any matrix with positive determinant is accepted.
    pub fn normalized(a: f64, b: f64, c: f64, d: f64) -> Result<Self, Sl2Error> {
        let det = a * d - b * c;
        if !(det > 0.0) {
            return Err(Sl2Error::NonPositiveDeterminant { det });
        }
        let s = det.sqrt().recip();
        Ok(Self::from_raw(a * s, b * s, c * s, d * s))
    }

    pub fn from_matrix(m: &Mat2) -> Result<Self, Sl2Error> {
        Self::new(m[0][0], m[0][1], m[1][0], m[1][1])
    }

    /// Canonicalises the sign without any determinant check.
    pub(crate) fn from_raw(a: f64, b: f64, c: f64, d: f64) -> Self {
        if a < 0.0 || (a == 0.0 && b < 0.0) {
            Self {
                a: -a,
                b: -b,
                c: -c,
                d: -d,
            }
        } else {
            Self { a, b, c, d }
        }
    }

    pub fn entries(&self) -> [f64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    pub fn matrix(&self) -> Mat2 {
        [[self.a, self.b], [self.c, self.d]]
    }

    pub fn det(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    pub fn inverse(&self) -> Self {
        Self::from_raw(self.d, -self.b, -self.c, self.a)
    }

    /// Removes accumulated determinant drift.
    pub fn renormalized(&self) -> Self {
        let s = self.det().sqrt().recip();
        Self::from_raw(self.a * s, self.b * s, self.c * s, self.d * s)
    }

    /// Largest entrywise difference between the two ± representatives,
    /// minimised over the sign (a metric on PSL(2,ℝ) matrices).
    pub fn distance(&self, other: &Self) -> f64 {
        let p = [
            self.a - other.a,
            self.b - other.b,
            self.c - other.c,
            self.d - other.d,
        ];
        let m = [
            self.a + other.a,
            self.b + other.b,
            self.c + other.c,
            self.d + other.d,
        ];
        let dp = p.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
        let dm = m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
        dp.min(dm)
    }

    pub fn max_abs_entry(&self) -> f64 {
        mat_max_abs(&self.matrix())
    }

    /// Coefficients `(α, β)` of the SU(1,1) matrix acting on the disk.
    pub fn to_su11(&self) -> (Complex64, Complex64) {
        let alpha = Complex64::new(0.5 * (self.a + self.d), 0.5 * (self.b - self.c));
        let beta = Complex64::new(0.5 * (self.a - self.d), -0.5 * (self.b + self.c));
        (alpha, beta)
    }

    /// Inverse of [`to_su11`](Self::to_su11); `|α|² - |β|²` must be 1.
    pub fn from_su11(alpha: Complex64, beta: Complex64) -> Result<Self, Sl2Error> {
        let a = alpha.re + beta.re;
        let d = alpha.re - beta.re;
        let b = alpha.im - beta.im;
        let c = -alpha.im - beta.im;
        Self::new(a, b, c, d)
    }

    /// Disk rotation `z ↦ e^{iφ} z` about the origin.
    pub fn rotation(phi: f64) -> Self {
        let (s, c) = (0.5 * phi).sin_cos();
        Self::from_raw(c, s, -s, c)
    }

    /// The element whose base point is `z` and whose frame angle is `angle`.
    pub fn from_disk_frame(z: DiskPoint, angle: f64) -> Self {
        let w = z.0;
        let s = (1.0 - w.norm_sqr()).sqrt().recip();
        let half = Complex64::from_polar(1.0, 0.5 * angle);
        let alpha = half * s;
        let beta = w * half.conj() * s;
        let a = alpha.re + beta.re;
        let d = alpha.re - beta.re;
        let b = alpha.im - beta.im;
        let c = -alpha.im - beta.im;
        Self::from_raw(a, b, c, d).renormalized()
    }

    /// Base point `g · 0` in the Poincaré disk.
    pub fn base_point(&self) -> DiskPoint {
        DiskPoint(self.base_point_raw())
    }

    #[inline]
    pub(crate) fn base_point_raw(&self) -> Complex64 {
        let (alpha, beta) = self.to_su11();
        beta / alpha.conj()
    }

    /// Angle of the unit tangent vector at the base point, in `[0, 2π)`.
    pub fn frame_angle(&self) -> f64 {
        let (alpha, _) = self.to_su11();
        (2.0 * alpha.arg()).rem_euclid(std::f64::consts::TAU)
    }

    /// Right multiplication by the stable horocycle step `[[1, h], [0, 1]]`.
    #[inline]
    pub(crate) fn stable_step(&self, h: f64) -> Self {
        Self {
            a: self.a,
            b: self.b + self.a * h,
            c: self.c,
            d: self.d + self.c * h,
        }
    }
}

impl Mul for GroupElement {
    type Output = GroupElement;

    fn mul(self, rhs: GroupElement) -> GroupElement {
        GroupElement::from_raw(
            self.a * rhs.a + self.b * rhs.c,
            self.a * rhs.b + self.b * rhs.d,
            self.c * rhs.a + self.d * rhs.c,
            self.c * rhs.b + self.d * rhs.d,
        )
    }
}

impl Mul for &GroupElement {
    type Output = GroupElement;

    fn mul(self, rhs: &GroupElement) -> GroupElement {
        *self * *rhs
    }
}

/// The three one-parameter subgroups.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Flow {
    Geodesic,
    StableHorocycle,
    UnstableHorocycle,
}

impl Flow {
    pub const ALL: [Flow; 3] = [Flow::Geodesic, Flow::StableHorocycle, Flow::UnstableHorocycle];

    pub fn generator(self) -> Generator {
        match self {
            Flow::Geodesic => Generator::X,
            Flow::StableHorocycle => Generator::U,
            Flow::UnstableHorocycle => Generator::V,
        }
    }

    /// `exp(tW)` in closed form.
    pub fn exp(self, t: f64) -> GroupElement {
        match self {
            Flow::Geodesic => {
                let e = (0.5 * t).exp();
                GroupElement::from_raw(e, 0.0, 0.0, e.recip())
            }
            Flow::StableHorocycle => GroupElement::from_raw(1.0, t, 0.0, 1.0),
            Flow::UnstableHorocycle => GroupElement::from_raw(1.0, 0.0, t, 1.0),
        }
    }

    /// `exp(tW) - I`, evaluated without cancellation for small `t`.
    pub fn exp_minus_identity(self, t: f64) -> Mat2 {
        match self {
            Flow::Geodesic => [[(0.5 * t).exp_m1(), 0.0], [0.0, (-0.5 * t).exp_m1()]],
            Flow::StableHorocycle => [[0.0, t], [0.0, 0.0]],
            Flow::UnstableHorocycle => [[0.0, 0.0], [t, 0.0]],
        }
    }
}

/// `g · exp(t W)`.
pub fn flow(kind: Flow, t: f64, g: &GroupElement) -> GroupElement {
    *g * kind.exp(t)
}

/// Central difference `(exp(hW) - exp(-hW)) / 2h`, an O(h²) approximation
/// of the generator.
pub fn central_difference(kind: Flow, h: f64) -> Mat2 {
    let fwd = kind.exp_minus_identity(h);
    let bwd = kind.exp_minus_identity(-h);
    mat_scale(&mat_sub(&fwd, &bwd), 0.5 / h)
}

/// A point of the open Poincaré disk.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiskPoint(Complex64);

impl DiskPoint {
    pub const ORIGIN: DiskPoint = DiskPoint(Complex64 { re: 0.0, im: 0.0 });

    pub fn new(z: Complex64) -> Result<Self, Sl2Error> {
        if z.norm_sqr() < 1.0 && z.re.is_finite() && z.im.is_finite() {
            Ok(Self(z))
        } else {
            Err(Sl2Error::OutsideDisk { re: z.re, im: z.im })
        }
    }

    pub fn from_polar(r: f64, angle: f64) -> Result<Self, Sl2Error> {
        Self::new(Complex64::from_polar(r, angle))
    }

    pub fn z(&self) -> Complex64 {
        self.0
    }

    /// Euclidean radius of the disk point at hyperbolic distance `d` from 0.
    pub fn radius_for_distance(d: f64) -> f64 {
        (0.5 * d).tanh()
    }
}

/// Möbius action of `g` on the disk.
pub fn mobius(g: &GroupElement, z: DiskPoint) -> DiskPoint {
    let (alpha, beta) = g.to_su11();
    let w = (alpha * z.0 + beta) / (beta.conj() * z.0 + alpha.conj());
    if w.norm_sqr() < 1.0 {
        DiskPoint(w)
    } else {
        // Rounding at the ideal boundary; pull back inside.
        DiskPoint(w / w.norm() * (1.0 - f64::EPSILON))
    }
}

/// Hyperbolic distance for the curvature −1 metric `2|dz|/(1-|z|²)`.
pub fn hyperbolic_distance(z: DiskPoint, w: DiskPoint) -> f64 {
    let num = (z.0 - w.0).norm();
    let den = (Complex64::new(1.0, 0.0) - z.0.conj() * w.0).norm();
    2.0 * (num / den).min(1.0).atanh()
}

/// `cosh` of the hyperbolic distance, cheaper than [`hyperbolic_distance`].
#[inline]
pub fn cosh_distance(z: Complex64, w: Complex64) -> f64 {
    1.0 + 2.0 * (z - w).norm_sqr() / ((1.0 - z.norm_sqr()) * (1.0 - w.norm_sqr()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn random_element(a: f64, b: f64, c: f64) -> GroupElement {
        // K A N style parametrisation covers a neighbourhood of any scale.
        GroupElement::rotation(a) * Flow::Geodesic.exp(b) * Flow::StableHorocycle.exp(c)
    }

    #[test]
    fn lie_brackets() {
        let x = Generator::X.matrix();
        let u = Generator::U.matrix();
        let v = Generator::V.matrix();
        assert_eq!(commutator(&x, &u), u);
        assert_eq!(commutator(&x, &v), mat_scale(&v, -1.0));
        assert_eq!(commutator(&u, &v), mat_scale(&x, 2.0));
        assert_eq!(commutator(&x, &x), ZERO_MAT);
    }

    #[test]
    fn canonical_sign() {
        let g = GroupElement::new(-2.0, 1.0, -1.0, 0.0).unwrap();
        assert_eq!(g.entries(), [2.0, -1.0, 1.0, -0.0]);
        let h = GroupElement::new(0.0, -1.0, 1.0, 0.0).unwrap();
        assert_eq!(h.entries()[1], 1.0);
    }

    #[test]
    fn rejects_non_unimodular() {
        assert!(matches!(
            GroupElement::new(2.0, 0.0, 0.0, 1.0),
            Err(Sl2Error::NotUnimodular { .. })
        ));
        let g = GroupElement::normalized(2.0, 0.0, 0.0, 2.0).unwrap();
        assert_eq!(g, GroupElement::IDENTITY);
    }

    #[test]
    fn geodesic_commutes_with_horocycles_fixed_example() {
        // g_{ln 2} ∘ h_1 = h_{1/2} ∘ g_{ln 2} as maps on SM.
        let t = 2f64.ln();
        let lhs = flow(Flow::Geodesic, t, &flow(Flow::StableHorocycle, 1.0, &GroupElement::IDENTITY));
        let rhs = flow(Flow::StableHorocycle, 0.5, &flow(Flow::Geodesic, t, &GroupElement::IDENTITY));
        assert!(lhs.distance(&rhs) < 1e-15);
    }

    #[test]
    fn flow_identity_time() {
        let g = random_element(0.3, -1.2, 2.0);
        for kind in Flow::ALL {
            assert_eq!(flow(kind, 0.0, &g), g);
        }
    }

    #[test]
    fn geodesic_orbit_of_origin_is_real_axis() {
        for t in [-2.0, 0.5, 1.0, 3.0] {
            let z = Flow::Geodesic.exp(t).base_point().z();
            assert!((z.re - (0.5 * t).tanh()).abs() < 1e-15);
            assert_eq!(z.im, 0.0);
        }
    }

    #[test]
    fn distance_along_radius() {
        let o = DiskPoint::ORIGIN;
        assert_eq!(hyperbolic_distance(o, o), 0.0);
        let p = DiskPoint::new(Complex64::new(0.5f64.tanh(), 0.0)).unwrap();
        assert!((hyperbolic_distance(o, p) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn finite_difference_order() {
        for kind in Flow::ALL {
            let gen = kind.generator().matrix();
            let e1 = mat_max_abs(&mat_sub(&central_difference(kind, 1e-4), &gen));
            let e2 = mat_max_abs(&mat_sub(&central_difference(kind, 1e-5), &gen));
            if e1 < 1e-14 && e2 < 1e-14 {
                continue; // unipotent flows: the difference quotient is exact up to rounding
            }
            let order = (e1 / e2).log10();
            assert!(order >= 1.9, "{kind:?}: e1={e1:e} e2={e2:e} order={order}");
        }
    }

    #[test]
    fn su11_round_trip() {
        let g = random_element(1.1, 0.7, -0.4);
        let (alpha, beta) = g.to_su11();
        assert!((alpha.norm_sqr() - beta.norm_sqr() - 1.0).abs() < 1e-13);
        let h = GroupElement::from_su11(alpha, beta).unwrap();
        assert!(g.distance(&h) < 1e-14);
    }

    #[test]
    fn disk_frame_round_trip() {
        let z = DiskPoint::new(Complex64::new(0.3, -0.4)).unwrap();
        let g = GroupElement::from_disk_frame(z, 2.5);
        assert!((g.base_point().z() - z.z()).norm() < 1e-15);
        assert!((g.frame_angle() - 2.5).abs() < 1e-14);
        assert!((g.det() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rotation_acts_as_rotation() {
        let z = DiskPoint::new(Complex64::new(0.2, 0.1)).unwrap();
        let w = mobius(&GroupElement::rotation(0.7), z);
        assert!((w.z() - z.z() * Complex64::from_polar(1.0, 0.7)).norm() < 1e-15);
    }

    proptest! {
        #[test]
        fn commuting_flows(t in -3.0f64..3.0, s in -3.0f64..3.0, phi in 0.0f64..std::f64::consts::TAU) {
            let g = GroupElement::rotation(phi);
            let lhs = flow(Flow::Geodesic, t, &flow(Flow::StableHorocycle, s, &g));
            let rhs = flow(Flow::StableHorocycle, (-t).exp() * s, &flow(Flow::Geodesic, t, &g));
            prop_assert!(lhs.distance(&rhs) <= 1e-10);
            let lhs = flow(Flow::Geodesic, t, &flow(Flow::UnstableHorocycle, s, &g));
            let rhs = flow(Flow::UnstableHorocycle, t.exp() * s, &flow(Flow::Geodesic, t, &g));
            prop_assert!(lhs.distance(&rhs) <= 1e-10);
        }

        #[test]
        fn one_parameter_group(s in -5.0f64..5.0, t in -5.0f64..5.0) {
            let g = random_element(0.4, 0.3, -0.2);
            for kind in Flow::ALL {
                let lhs = flow(kind, s, &flow(kind, t, &g));
                let rhs = flow(kind, s + t, &g);
                prop_assert!(lhs.distance(&rhs) <= 1e-12 * (1.0 + rhs.max_abs_entry()));
            }
        }

        #[test]
        fn mobius_is_a_group_action(
            a1 in 0.0f64..6.3, b1 in -2.0f64..2.0, c1 in -2.0f64..2.0,
            a2 in 0.0f64..6.3, b2 in -2.0f64..2.0, c2 in -2.0f64..2.0,
            r in 0.0f64..0.9, th in 0.0f64..6.3,
        ) {
            let g = random_element(a1, b1, c1);
            let h = random_element(a2, b2, c2);
            let z = DiskPoint::from_polar(r, th).unwrap();
            let lhs = mobius(&(g * h), z);
            let rhs = mobius(&g, mobius(&h, z));
            prop_assert!((lhs.z() - rhs.z()).norm() <= 1e-11);
            let back = mobius(&g.inverse(), mobius(&g, z));
            prop_assert!((back.z() - z.z()).norm() <= 1e-12);
            prop_assert!(mobius(&g, z).z().norm() < 1.0);
        }

        #[test]
        fn distance_is_isometry_invariant(
            a in 0.0f64..6.3, b in -2.0f64..2.0, c in -2.0f64..2.0,
            r1 in 0.0f64..0.8, t1 in 0.0f64..6.3, r2 in 0.0f64..0.8, t2 in 0.0f64..6.3,
        ) {
            let g = random_element(a, b, c);
            let z = DiskPoint::from_polar(r1, t1).unwrap();
            let w = DiskPoint::from_polar(r2, t2).unwrap();
            let d = hyperbolic_distance(z, w);
            prop_assert!(d >= 0.0);
            prop_assert!((d - hyperbolic_distance(w, z)).abs() <= 1e-14);
            let dg = hyperbolic_distance(mobius(&g, z), mobius(&g, w));
            prop_assert!((d - dg).abs() <= 1e-10);
            prop_assert!((cosh_distance(z.z(), w.z()) - d.cosh()).abs() <= 1e-10 * d.cosh());
        }
    }
}
