//! Complex Airy function: values in each evaluation regime, the log-scaled form
//! used deep in the growth sector, and the connection identity
//! `Ai(z) + ω Ai(ωz) + ω² Ai(ω²z) = 0`.
//!
//! Run with `cargo run --example airy_functions`.

use num_complex::Complex64;
use stark_resonance::airy::{airy_ai, airy_ai_log, airy_ai_scaled, omega};

fn main() -> stark_resonance::Result<()> {
    println!("{:>18} {:>12} {:>42}", "z", "regime", "Ai(z)");
    for z in [
        Complex64::new(0.0, 0.0),
        Complex64::new(2.0, 1.0),
        Complex64::new(30.0, 0.0),
        Complex64::new(-30.0, 0.0),
        Complex64::new(-5.0, 3.0),
    ] {
        let v = airy_ai(z)?;
        println!("{:>18} {:>12} {:>42}", format!("{z}"), format!("{:?}", v.regime), format!("{:.15e}", v.ai));
    }

    // Far in the growth sector Ai overflows a double; the scaled form does not.
    let z = Complex64::new(-2000.0, 2000.0);
    let s = airy_ai_scaled(z)?;
    let (log_ai, _) = airy_ai_log(z)?;
    println!("\nAi({z}) = e^{:.3} · {:.6}   (log Ai = {log_ai:.6})", s.log_scale, s.ai);

    let w = omega();
    let z = Complex64::new(3.0, -4.0);
    let sum = airy_ai(z)?.ai + w * airy_ai(w * z)?.ai + w * w * airy_ai(w * w * z)?.ai;
    println!("connection identity residual at {z}: {:.2e}", sum.norm());
    Ok(())
}
