//! Numerical laboratory for horocycle flows on compact hyperbolic surfaces.
//!
//! The crate is organised bottom-up:
//!
//! * [`sl2core`]: PSL(2,ℝ) arithmetic, the geodesic and horocycle flows and
//!   the Möbius action on the Poincaré disk.
//! * [`surface`]: the Bolza octagon group, fundamental-domain reduction,
//!   Haar sampling and bump observables on Γ\PSL(2,ℝ).
//! * [`ergodic`]: horocycle ergodic integrals, variance growth and the
//!   normalised ergodic-integral ensembles.
//! * [`repmodel`]: the L²(ℝ) line model of the principal and complementary
//!   series, correlation asymptotics and the cohomological equation.
//! * [`renorm`]: the renormalisation engine for the cocycle coefficients.
//! * [`distlab`]: empirical distributions, the Lévy metric, torus
//!   distributions and rotational-symmetry moment tests.
//!
//! [`quad`], [`stats`] and [`rng`] hold the shared numerical plumbing.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod distlab;
pub mod ergodic;
pub mod quad;
pub mod renorm;
pub mod repmodel;
pub mod rng;
pub mod sl2core;
pub mod stats;
pub mod surface;

pub use num_complex::Complex64;
