//! Perturbation determinants: Nyström convergence to the Jost evaluator,
//! backend agreement, Neumann series and tracked logarithms.

use num_complex::Complex64;
use stark_resonance::fredholm::{
    build_rule, build_y0, det_and_log, det_side, log_det_tracked, neumann_log_det, nuclear_norm, rule_for,
    straight_path, Backend, Side,
};
use stark_resonance::green::HalfPlane;
use stark_resonance::jost::JostSolver;
use stark_resonance::potential::Potential;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[test]
fn nystrom_converges_at_second_order_to_the_jost_value() {
    let v = Potential::canonical();
    let l = c(-1.5, 2.5);
    let exact = Backend::default().log_d(&v, l, Side::Plus).unwrap().exp();
    let err = |n| (det_side(&v, l, &build_rule(n, 1.0).unwrap(), Side::Plus).unwrap().d_value - exact).norm();
    let (e32, e64, e128) = (err(32), err(64), err(128));
    for ratio in [e32 / e64, e64 / e128] {
        assert!((3.3..4.7).contains(&ratio), "ratio {ratio} ({e32:e}, {e64:e}, {e128:e})");
    }
}

#[test]
fn jost_backend_is_stable_under_step_doubling() {
    let v = Potential::canonical();
    for l in [c(3.0, 0.0), c(-5.0, -4.0), c(20.0, 1.0)] {
        let a = JostSolver::with_steps(128).log_d(&v, l, Side::Plus).unwrap();
        let b = JostSolver::with_steps(256).log_d(&v, l, Side::Plus).unwrap();
        assert!((a - b).norm() < 1e-11, "{l}: {a} vs {b}");
    }
}

#[test]
fn composite_rule_handles_a_discontinuous_sampled_potential() {
    let v = Potential::piecewise(vec![0.0, 0.4, 1.0], vec![vec![2.0], vec![-1.0]]).unwrap();
    let l = c(1.0, 1.0);
    let exact = Backend::default().log_d(&v, l, Side::Plus).unwrap();
    let nys = Backend::Nystrom { n: 256 }.log_d(&v, l, Side::Plus).unwrap();
    assert!((exact - nys).norm() < 1e-4, "{exact} vs {nys}");
    assert!(rule_for(&v, 64).unwrap().len() >= 64);
}

#[test]
fn neumann_series_matches_lu_in_the_small_norm_regime() {
    let v = Potential::box_potential(1.0, 0.05).unwrap();
    let rule = build_rule(64, 1.0).unwrap();
    let y0 = build_y0(&v, c(30.0, 5.0), &rule, HalfPlane::Upper).unwrap();
    assert!(nuclear_norm(&y0.entries) < 0.5);
    let (_, log_lu) = det_and_log(&y0.entries);
    let log_neumann = neumann_log_det(&y0.entries).unwrap();
    assert!((log_lu - log_neumann).norm() < 1e-12);
}

#[test]
fn tracked_logarithm_is_continuous_along_a_path() {
    let v = Potential::canonical();
    let rule = build_rule(64, 1.0).unwrap();
    let path = straight_path(c(0.0, 40.0), c(10.0, 0.5), 64);
    let logs = log_det_tracked(&v, &path, &rule, Side::Plus).unwrap();
    for w in logs.windows(2) {
        assert!((w[1].log_d.im - w[0].log_d.im).abs() < std::f64::consts::FRAC_PI_2);
    }
}
