//! Certified resonance search in the half-disc `|λ| ≤ R` of the lower half-plane:
//! argument-principle counting on tiles, quadtree isolation and Newton refinement,
//! with the total cross-checked against the half-disc contour count.
//!
//! Run with `cargo run --release --example resonance_search`.

use stark_resonance::fredholm::Backend;
use stark_resonance::potential::Potential;
use stark_resonance::resonance::{find_resonances, SearchConfig};

fn main() -> stark_resonance::Result<()> {
    let v = Potential::canonical();
    let rs = find_resonances(&v, &SearchConfig::new(15.0, Backend::default()))?;
    println!(
        "{} resonances in |λ| ≤ {} (contour count {}, certified: {})",
        rs.total(),
        rs.search_radius,
        rs.contour_count,
        rs.certified
    );
    println!("p = {:.10}\n", rs.p_const);
    println!("{:>24} {:>10} {:>4}", "λₙ", "residual", "m");
    for z in &rs.items {
        println!("{:>24} {:>10.1e} {:>4}", format!("{:.8}", z.lambda), z.refine_residual, z.multiplicity);
    }
    Ok(())
}
