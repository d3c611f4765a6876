//! The trace formula `D₊'/D₊(λ) = p + Σ λ/(λₙ(λ − λₙ))` truncated at growing
//! radii, the Breit–Wigner representation of `φ'_sc`, and `Im p = π φ'_sc(0)`.
//!
//! The truncated sums converge slowly (the tail decays like `R^{-1/2}`), which
//! this example makes visible.
//!
//! Run with `cargo run --release --example trace_formula`.

use num_complex::Complex64;
use stark_resonance::fredholm::Backend;
use stark_resonance::potential::Potential;
use stark_resonance::resonance::{
    breit_wigner_phase, find_resonances, phase_derivative, trace_formula_residual, SearchConfig, PHASE_STEP,
};

fn main() -> stark_resonance::Result<()> {
    let v = Potential::canonical();
    let b = Backend::default();
    let rs = find_resonances(&v, &SearchConfig::new(25.0, b))?;
    let l = Complex64::new(2.0, 2.0);
    println!("{:>6} {:>12} {:>10}", "R", "residual", "relative");
    for r in [10.0, 15.0, 20.0, 25.0] {
        let t = trace_formula_residual(&v, &rs, l, r, &b)?;
        println!("{r:>6} {:>12.4e} {:>10.4}", t.residual, t.relative);
    }

    println!("\n{:>6} {:>12} {:>12}", "λ", "φ'_sc", "resonances");
    for x in [-2.0, -1.0, 0.5, 1.0, 2.0] {
        let bw = breit_wigner_phase(&v, &rs, x, 25.0, &b)?;
        println!("{x:>6} {:>12.6} {:>12.6}", bw.lhs, bw.rhs);
    }

    let phi = phase_derivative(&v, 0.0, PHASE_STEP, &b)?;
    println!("\nIm p / π = {:.10}, φ'_sc(0) = {phi:.10}", rs.p_const.im / std::f64::consts::PI);
    Ok(())
}
