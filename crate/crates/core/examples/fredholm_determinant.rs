//! The perturbation determinant `D₊(λ) = det(I + Y₀(λ))`: Nyström convergence
//! under quadrature refinement against the Jost (ODE) evaluator, and the
//! conjugation symmetry `D₋(λ̄) = conj D₊(λ)`.
//!
//! Run with `cargo run --release --example fredholm_determinant`.

use num_complex::Complex64;
use stark_resonance::fredholm::{build_rule, det_side, Backend, Side};
use stark_resonance::potential::Potential;

fn main() -> stark_resonance::Result<()> {
    let v = Potential::canonical();
    let lambda = Complex64::new(2.0, 1.0);
    let reference = Backend::default().log_d(&v, lambda, Side::Plus)?.exp();
    println!("D₊({lambda}) by the Jost backend: {reference:.15e}\n");
    println!("{:>6} {:>44} {:>10} {:>8}", "N", "D₊ (Nyström)", "error", "ratio");
    let mut prev: Option<f64> = None;
    for n in [16, 32, 64, 128, 256] {
        let d = det_side(&v, lambda, &build_rule(n, v.gamma())?, Side::Plus)?.d_value;
        let err = (d - reference).norm();
        let ratio = prev.map(|p| format!("{:.2}", p / err)).unwrap_or_default();
        println!("{n:>6} {:>44} {err:>10.2e} {ratio:>8}", format!("{d:.15e}"));
        prev = Some(err);
    }

    let rule = build_rule(128, v.gamma())?;
    let plus = det_side(&v, lambda, &rule, Side::Plus)?.d_value;
    let minus = det_side(&v, lambda.conj(), &rule, Side::Minus)?.d_value;
    println!("\n|D₋(λ̄) − conj D₊(λ)| = {:.1e}", (minus - plus.conj()).norm());
    Ok(())
}
