//! Reconstructing `S(λ)` on the real axis from the resonances and the constant
//! `p` (the Hadamard-product representation), compared with `S` computed
//! directly; the error is dominated by the truncation of the resonance product.
//!
//! Run with `cargo run --release --example reconstruction`.

use num_complex::Complex64;
use stark_resonance::fredholm::Backend;
use stark_resonance::potential::Potential;
use stark_resonance::resonance::{find_resonances, s_from_resonances, symmetric_product, SearchConfig};
use stark_resonance::scattering::s_from_determinants;

fn main() -> stark_resonance::Result<()> {
    let v = Potential::canonical();
    let b = Backend::default();
    let rs = find_resonances(&v, &SearchConfig::new(25.0, b))?;
    println!("{:>6} {:>30} {:>30} {:>8}", "λ", "S reconstructed", "S direct", "|Δ|");
    for x in [-4.0, -2.0, -0.5, 0.0, 0.5, 2.0, 4.0] {
        let l = Complex64::new(x, 0.0);
        let rec = s_from_resonances(&rs, l, 25.0, -25.0)?;
        let s = s_from_determinants(&v, l, &b)?;
        println!("{x:>6} {:>30} {:>30} {:>8.3}", format!("{:.6}", rec.s), format!("{s:.6}"), (rec.s - s).norm());
    }
    let m = symmetric_product(&rs, Complex64::new(3.0, 0.0), 25.0).norm();
    println!("\n|finite symmetric product at λ = 3| − 1 = {:.1e}", m - 1.0);
    Ok(())
}
