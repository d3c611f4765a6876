//! S-matrix, scattering phase and trace integrals.

use num_complex::Complex64;
use stark_resonance::fredholm::{build_rule, Backend};
use stark_resonance::potential::Potential;
use stark_resonance::scattering::{
    born_a0, born_a0_adaptive, log_s, s_from_determinants, s_matrix, scattering_phase, trace_integrals,
    unwrap_from_right,
};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[test]
fn stationary_s_matches_the_jost_determinant_ratio() {
    let v = Potential::canonical();
    let rule = build_rule(256, 1.0).unwrap();
    for x in [-8.0, -1.0, 0.0, 2.0, 9.0] {
        let s = s_matrix(&v, c(x, 0.0), &rule).unwrap();
        let d = s_from_determinants(&v, c(x, 0.0), &Backend::default()).unwrap();
        assert!((s.s - d).norm() < 1e-4, "λ = {x}: {} vs {d}", s.s);
        assert!((s.s.norm() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn phase_is_consistent_with_s() {
    // S(λ) = e^{−2πiφ_sc(λ)} on the real axis.
    let v = Potential::canonical();
    let b = Backend::default();
    let grid: Vec<f64> = (0..=60).map(|k| -10.0 + 0.25 * k as f64).collect();
    let curve = scattering_phase(&v, &grid, &b).unwrap();
    for (x, phi) in grid.iter().zip(&curve.phase) {
        let s = s_from_determinants(&v, c(*x, 0.0), &b).unwrap();
        let from_phase = Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * phi);
        assert!((s - from_phase).norm() < 1e-10, "λ = {x}");
    }
}

#[test]
fn phase_decays_at_both_ends() {
    let v = Potential::canonical();
    let grid: Vec<f64> = (0..=2000).map(|k| -50.0 + 0.05 * k as f64).collect();
    let curve = scattering_phase(&v, &grid, &Backend::default()).unwrap();
    let bound = 2.0 * v.v0_integral() / (2.0 * std::f64::consts::PI * 50f64.sqrt());
    assert!(curve.phase[0].abs() <= bound);
    assert!(curve.phase[2000].abs() <= bound);
}

#[test]
fn log_s_is_a_logarithm_of_s() {
    let v = Potential::canonical();
    let b = Backend::default();
    let l = c(1.0, -0.5);
    assert!((log_s(&v, l, &b).unwrap().exp() - s_from_determinants(&v, l, &b).unwrap()).norm() < 1e-12);
}

#[test]
fn born_term_converges_under_refinement() {
    let v = Potential::canonical();
    let l = c(2.0, 0.0);
    let adaptive = born_a0_adaptive(&v, l, 1e-12).unwrap();
    let rule = born_a0(&v, l, &build_rule(64, 1.0).unwrap()).unwrap();
    assert!((adaptive - rule).norm() < 1e-12);
}

#[test]
fn unwrapping_removes_two_pi_jumps() {
    let pi = std::f64::consts::PI;
    let raw = [3.0, -3.1, 3.0 - 2.0 * pi + 0.1];
    let un = unwrap_from_right(&raw).unwrap();
    assert!((un[2] - raw[2]).abs() < 1e-15);
    assert!(un.windows(2).all(|w| (w[1] - w[0]).abs() < 0.5));
}

#[test]
fn trace_integrals_approach_v0() {
    let v = Potential::canonical();
    let t = trace_integrals(&v, 100.0, &Backend::default(), 1e-6).unwrap();
    assert!((t.re_integral - 1.25).abs() < 0.01, "{}", t.re_integral);
    assert!(t.im_integral.abs() < 0.01, "{}", t.im_integral);
}
