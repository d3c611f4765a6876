//! Zero counting: the argument principle on rectangles and half-discs, and the
//! growth of the resonance counting function `N(r) ~ C r^β` (the determinant has
//! order 3/2, so `β` is expected near 3/2).
//!
//! Run with `cargo run --release --example zero_counting`.

use stark_resonance::fredholm::Backend;
use stark_resonance::potential::Potential;
use stark_resonance::resonance::{
    count_half_disc, count_zeros_contour, counting_exponent, counting_function, find_resonances, Rect,
    SearchConfig,
};

fn main() -> stark_resonance::Result<()> {
    let v = Potential::canonical();
    let b = Backend::default();
    // Zeros of D₋ in the upper half-plane are the conjugated resonances.
    let rect = Rect::new(-3.0, 3.0, 0.01, 3.0)?;
    println!("zeros of D₋ in {rect:?}: {}", count_zeros_contour(&v, rect, &b)?);
    for r in [5.0, 10.0, 15.0] {
        println!("half-disc |λ| ≤ {r}: {}", count_half_disc(&v, r, 1e-3, &b)?);
    }

    let rs = find_resonances(&v, &SearchConfig::new(25.0, b))?;
    let radii = [5.0, 10.0, 15.0, 20.0, 25.0];
    for r in radii {
        println!("N({r}) = {}", counting_function(&rs, r)?);
    }
    println!("log–log exponent: {:.3}", counting_exponent(&rs, &radii)?);
    Ok(())
}
