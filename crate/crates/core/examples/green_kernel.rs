//! The free Stark resolvent kernel `R₀(x, y, λ)`: the two-solution formula
//! `u₋(x<)u₊(x>)/W` against the time-integral representation, in both half-planes.
//!
//! Run with `cargo run --example green_kernel`.

use num_complex::Complex64;
use stark_resonance::green::{r0_kernel, r0_time_integral, HalfPlane};

fn main() -> stark_resonance::Result<()> {
    println!("{:>5} {:>5} {:>10} {:>44} {:>10}", "x", "y", "λ", "R₀ (two-solution)", "|Δ| oracle");
    for (x, y, l) in [
        (0.0, 0.5, Complex64::new(1.0, 2.0)),
        (0.3, 0.3, Complex64::new(2.0, 1.0)),
        (1.0, 0.25, Complex64::new(-1.0, 0.5)),
        (0.75, 0.0, Complex64::new(0.5, 3.0)),
    ] {
        let k = r0_kernel(x, y, l, HalfPlane::Upper)?.value;
        let oracle = r0_time_integral(x, y, l)?;
        println!("{x:>5} {y:>5} {:>10} {:>44} {:>10.1e}", format!("{l}"), format!("{k:.15e}"), (k - oracle).norm());
    }

    // The lower-half-plane branch is the complex conjugate of the upper one.
    let l = Complex64::new(2.0, 1.0);
    let up = r0_kernel(0.2, 0.7, l, HalfPlane::Upper)?.value;
    let down = r0_kernel(0.2, 0.7, l.conj(), HalfPlane::Lower)?.value;
    println!("\nR₀(λ̄) − conj R₀(λ) = {:.1e}", (down - up.conj()).norm());
    Ok(())
}
