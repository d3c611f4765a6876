//! Resonance search, counting and the resonance-built representations.

use num_complex::Complex64;
use stark_resonance::fredholm::Backend;
use stark_resonance::potential::Potential;
use stark_resonance::resonance::{
    count_half_disc, count_zeros_contour, counting_function, d_minus_upper, find_resonances, hadamard_eval,
    phase_moment, s1_product, Rect, ResonanceSet, SearchConfig,
};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn canonical(radius: f64) -> ResonanceSet {
    find_resonances(&Potential::canonical(), &SearchConfig::new(radius, Backend::default())).unwrap()
}

#[test]
fn search_is_certified_and_resonances_are_zeros() {
    let v = Potential::canonical();
    let rs = canonical(10.0);
    assert!(rs.certified);
    assert_eq!(rs.total() as i64, rs.contour_count);
    assert_eq!(rs.total(), 13);
    for z in &rs.items {
        assert!(z.lambda.im < 0.0 && z.lambda.norm() <= 10.0);
        assert!(z.newton_converged);
        // D₋(λ̄ₙ) = conj D₊(λₙ) = 0.
        let d = d_minus_upper(&v, z.lambda.conj(), &Backend::default()).unwrap();
        assert!(d.norm() < 1e-8, "{}: |D₋| = {}", z.lambda, d.norm());
    }
}

#[test]
fn smallest_resonances_match_frozen_values() {
    // Frozen from an independent search with the Nyström backend at N = 512
    // (whose O(N⁻²) discretisation error is about 1e-7 here).
    let rs = canonical(5.0);
    let expected = [c(-0.3812872054836295, -2.1510965130753954), c(2.4919630882527364, -0.34437714578115003)];
    for e in expected {
        let d = rs.items.iter().map(|z| (z.lambda - e).norm()).fold(f64::INFINITY, f64::min);
        assert!(d < 1e-6, "{e} not found ({d:e})");
    }
}

#[test]
fn backends_find_the_same_resonances() {
    let v = Potential::canonical();
    let jost = find_resonances(&v, &SearchConfig::new(3.0, Backend::default())).unwrap();
    let nys = find_resonances(&v, &SearchConfig::new(3.0, Backend::Nystrom { n: 64 })).unwrap();
    assert_eq!(jost.total(), nys.total());
    for z in &jost.items {
        let d = nys.items.iter().map(|w| (w.lambda - z.lambda).norm()).fold(f64::INFINITY, f64::min);
        assert!(d < 1e-3, "{}: {d:e}", z.lambda);
    }
}

#[test]
fn counts_agree_between_rectangles_and_the_search() {
    let v = Potential::canonical();
    let rs = canonical(10.0);
    let rect = Rect::new(-4.0, 4.0, 0.001, 4.0).unwrap();
    let inside = rs
        .items
        .iter()
        .filter(|z| {
            let w = z.lambda.conj();
            (-4.0..=4.0).contains(&w.re) && (0.001..=4.0).contains(&w.im)
        })
        .count() as i64;
    assert_eq!(count_zeros_contour(&v, rect, &Backend::default()).unwrap(), inside);
    assert_eq!(count_half_disc(&v, 10.0, 1e-3, &Backend::default()).unwrap(), 13);
    assert_eq!(counting_function(&rs, 5.0).unwrap(), 4);
    assert!(counting_function(&rs, 11.0).is_err());
}

#[test]
fn hadamard_product_and_s1_normalisation() {
    let rs = canonical(10.0);
    assert!((hadamard_eval(&rs, c(0.0, 0.0), 10.0) - rs.d_plus_at_zero).norm() < 1e-14);
    assert!((s1_product(&rs, c(0.0, 0.0), 10.0) - 1.0).norm() < 1e-15);
    assert!((s1_product(&rs, c(3.0, 0.0), 10.0).norm() - 1.0).abs() < 1e-12);
}

#[test]
fn moments_are_finite_and_real() {
    let rs = canonical(10.0);
    for m in 2..5 {
        assert!(phase_moment(&rs, m, 10.0).is_finite());
    }
}

#[test]
fn resonance_sets_round_trip_through_json() {
    let rs = canonical(5.0);
    let back: ResonanceSet = serde_json::from_str(&serde_json::to_string(&rs).unwrap()).unwrap();
    assert_eq!(back.total(), rs.total());
    assert_eq!(back.items[0].lambda, rs.items[0].lambda);
}

#[test]
fn free_case_has_no_resonances() {
    let v = Potential::zero(1.0).unwrap();
    let rs = find_resonances(&v, &SearchConfig::new(15.0, Backend::default())).unwrap();
    assert!(rs.items.is_empty() && rs.certified);
}
