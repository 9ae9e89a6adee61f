use horolab_core::sl2core::*;
use horolab_core::surface::*;
use proptest::prelude::*;

fn group() -> FuchsianGroup {
    bolza_group().unwrap()
}

#[test]
fn octagon_geometry() {
    let g = group();
    // Regular octagon with interior angles π/4: cosh r_in = cot(π/8).
    let cot = 1.0 / (std::f64::consts::PI / 8.0).tan();
    assert!((g.inradius().cosh() - cot).abs() < 1e-12);
    assert!((g.circumradius().cosh() - cot * cot).abs() < 1e-12);
    assert!((g.translation_length() - 2.0 * g.inradius()).abs() < 1e-14);
    assert_eq!(g.vertices().len(), 8);
    for k in 0..GENERATORS {
        // each generator carries the side midpoint across to its opposite
        let dist = hyperbolic_distance(DiskPoint::ORIGIN, mobius(g.generator(k), DiskPoint::ORIGIN));
        assert!((dist - g.translation_length()).abs() < 1e-12);
    }
}

#[test]
fn area_estimate_brackets_four_pi() {
    let (area, se) = group().area_monte_carlo(20_000, 5);
    assert!((area - OCTAGON_AREA).abs() < 4.0 * se, "{area} ± {se}");
}

#[test]
fn names_resolve() {
    assert!(surface_by_name("bolza").is_ok());
    assert!(matches!(surface_by_name("klein"), Err(SurfaceError::UnknownSurface(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn reduction_lands_in_domain(a in 0.0f64..6.3, r in 0.0f64..6.0, th in 0.0f64..6.3) {
        let g = group();
        let x = GroupElement::rotation(th) * Flow::Geodesic.exp(r) * GroupElement::rotation(a);
        let red = g.reduce(&x).unwrap();
        prop_assert!(g.contains(red.element.base_point()));
        // x = γ · reduced with γ a word in the generators
        let back = g.word_element(&red.word) * red.element;
        prop_assert!(back.distance(&x) < 1e-8 * (1.0 + x.max_abs_entry()));
        let again = g.reduce(&red.element).unwrap();
        prop_assert!(again.word.is_empty());
    }

    #[test]
    fn observable_is_group_invariant(idx in 0u64..10_000, word in proptest::collection::vec(0usize..8, 1..6)) {
        let g = group();
        let obs = Observable::calibrated(&g, DiskPoint::ORIGIN, 1.2, 2).unwrap();
        let x = g.sample_point(3, idx);
        let moved = g.word_product(&word) * x;
        let a = obs.eval(&g, &x).unwrap();
        let b = obs.eval(&g, &moved).unwrap();
        prop_assert!((a - b).abs() < 1e-9);
    }
}
