use horolab_core::quad::{integrate, QuadConfig};
use horolab_core::repmodel::*;
use horolab_core::Complex64;

fn real(nu: f64) -> CasimirParameter {
    CasimirParameter::from_real_nu(nu).unwrap()
}

#[test]
fn i_nu_matches_beta_function() {
    for nu in [0.0, 0.1, 0.3, 0.5, 0.9] {
        let q = i_nu(&real(nu)).unwrap();
        let exact = i_nu_closed_form_real(nu);
        assert!((q.re - exact).abs() < 1e-11, "ν={nu}: {q} vs {exact}");
        assert!(q.im.abs() < 1e-15);
    }
    assert!((i_nu_closed_form_real(0.0) - 2.0).abs() < 1e-14);
    // ν = 1: ∫(1+u²)^{-2} = π/2
    assert!((i_nu_closed_form_real(1.0) - std::f64::consts::FRAC_PI_2).abs() < 1e-13);
}

#[test]
fn principal_kernel_integral_against_independent_quadrature() {
    let p = CasimirParameter::from_nu(Complex64::new(0.0, 2.0)).unwrap();
    let direct = i_nu(&p).unwrap();
    // Substituting u = tan φ: ∫_{-π/2}^{π/2} cos^{1+ν} φ dφ.
    let nu = p.nu();
    let half = integrate(
        |phi| ((nu + 1.0) * phi.cos().ln()).exp(),
        0.0,
        std::f64::consts::FRAC_PI_2,
        &[],
        &QuadConfig::with_rel_tol(1e-13),
    )
    .unwrap()
    .value;
    assert!((direct - half * 2.0).norm() < 1e-10, "{direct} vs {}", half * 2.0);
}

#[test]
fn jt_identity_on_parameter_sweep() {
    let params = [
        real(0.3),
        real(0.5),
        CasimirParameter::from_nu(Complex64::new(0.0, 1.0)).unwrap(),
        CasimirParameter::from_nu(Complex64::new(0.0, 3.0)).unwrap(),
    ];
    for p in &params {
        for t in [0.5, 3.0, 40.0] {
            let r = j_t(p, t).unwrap();
            assert!(r.residual.unwrap() < 1e-9, "ν={} T={t}: {:?}", p.nu(), r);
        }
    }
}

#[test]
fn asymptotics_improve_with_time() {
    let grid = [-1.0, -0.5, 0.0, 0.5, 1.0];
    let p = real(0.3);
    let rs: Vec<f64> = [10.0, 100.0, 1000.0]
        .iter()
        .map(|&t| asymptotic_residual(&p, t, &grid).unwrap())
        .collect();
    assert!(rs[0] > rs[1] && rs[1] > rs[2], "{rs:?}");
    // the residual is carried by the next-order term 2T^{−(1−ν)}/(1−ν)
    let predicted = 2.0 * 1000f64.powf(-0.7) / 0.7;
    assert!((rs[2] / predicted - 1.0).abs() < 0.2, "{} vs {predicted}", rs[2]);
}

#[test]
fn triangle_kernel_versus_brute_force() {
    let p = real(0.5);
    for (t, x) in [(1.0, 0.0), (2.5, 0.7)] {
        let a = i_t(&p, t, x).unwrap();
        let b = i_t_brute_force(&p, t, x).unwrap();
        assert!((a - b).norm() < 1e-8, "T={t} x={x}: {a} vs {b}");
    }
}

#[test]
fn cohomological_equation_round_trip() {
    let l = DEFAULT_HALF_WIDTH;
    let d = DEFAULT_SPACING;
    let a = SampledFunction::unit_bump(-1.0, 0.8, l, d).unwrap();
    let b = SampledFunction::unit_bump(1.5, 0.6, l, d).unwrap();
    let g = a.sub(&b).unwrap();
    let f = solve_cohomological(&g).unwrap();
    let back = f.derivative().unwrap();
    let err = back.sub(&g).unwrap().l2_norm() / g.l2_norm();
    assert!(err < 1e-5, "{err}");
    assert!(matches!(solve_cohomological(&a), Err(ModelError::Obstruction { .. })));
}
