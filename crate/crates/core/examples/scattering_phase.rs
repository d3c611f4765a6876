//! The scattering phase `φ_sc(λ) = (1/π) arg D₊(λ + i0)`, unwrapped from the
//! right, and the two trace integrals of `log D₊/√λ` whose real part tends to
//! `V₀ = ∫V`.
//!
//! Run with `cargo run --release --example scattering_phase`.

use stark_resonance::fredholm::Backend;
use stark_resonance::potential::Potential;
use stark_resonance::scattering::{scattering_phase, trace_integrals};

fn main() -> stark_resonance::Result<()> {
    let v = Potential::canonical();
    let backend = Backend::default();
    let grid: Vec<f64> = (0..=400).map(|k| -50.0 + 0.25 * k as f64).collect();
    let curve = scattering_phase(&v, &grid, &backend)?;
    println!("{:>8} {:>14}", "λ", "φ_sc(λ)");
    for (l, p) in curve.lambdas.iter().zip(&curve.phase).step_by(40) {
        println!("{l:>8.2} {p:>14.8}");
    }
    let bound = 2.0 * v.v0_integral() / (2.0 * std::f64::consts::PI * 50f64.sqrt());
    println!("decay bound at |λ| = 50: {bound:.4}");

    println!("\n{:>8} {:>12} {:>12} (V₀ = {})", "R", "Re", "Im", v.v0_integral());
    for r in [10.0, 100.0] {
        let t = trace_integrals(&v, r, &backend, 1e-6)?;
        println!("{r:>8} {:>12.6} {:>12.2e}", t.re_integral, t.im_integral);
    }
    Ok(())
}
