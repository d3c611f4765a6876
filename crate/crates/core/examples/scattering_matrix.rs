//! The S-matrix on the real axis from the stationary representation
//! `S = 1 − 2πi(𝒜₀ − 𝒜₁)`, compared with the determinant ratio `conj D₊/D₊`,
//! together with the unitarity defect and the jump relation of the resolvent.
//!
//! Run with `cargo run --release --example scattering_matrix`.

use num_complex::Complex64;
use stark_resonance::fredholm::{build_rule, Backend};
use stark_resonance::potential::Potential;
use stark_resonance::scattering::{jump_residual, s_from_determinants, s_matrix};

fn main() -> stark_resonance::Result<()> {
    let v = Potential::canonical();
    let rule = build_rule(256, v.gamma())?;
    let jost = Backend::default();
    println!("{:>6} {:>40} {:>10} {:>12} {:>10}", "λ", "S(λ)", "||S|−1|", "vs conj D/D", "jump");
    for x in [-20.0, -5.0, -1.0, 0.0, 1.0, 2.5, 5.0, 20.0] {
        let l = Complex64::new(x, 0.0);
        let s = s_matrix(&v, l, &rule)?;
        let from_det = s_from_determinants(&v, l, &jost)?;
        println!(
            "{x:>6} {:>40} {:>10.1e} {:>12.1e} {:>10.1e}",
            format!("{:.12}", s.s),
            (s.s.norm() - 1.0).abs(),
            (s.s - from_det).norm(),
            jump_residual(&v, x, &rule)?
        );
    }
    Ok(())
}
