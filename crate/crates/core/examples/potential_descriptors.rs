//! Building potentials from JSON descriptors: box, linear, polynomial and
//! sampled (cubic-spline) forms, with `V₀ = ∫V` and the Born-limit quantities.
//!
//! Run with `cargo run --example potential_descriptors`.

use stark_resonance::potential::{Potential, PotentialDescriptor};

fn main() -> stark_resonance::Result<()> {
    let descriptors = [
        r#"{"gamma": 1.0, "form": "box", "coeffs": [2.0]}"#,
        r#"{"gamma": 1.0, "form": "linear", "coeffs": [1.0, 0.5]}"#,
        r#"{"gamma": 2.0, "form": "poly", "coeffs": [0.0, 1.0, -0.5]}"#,
        r#"{"gamma": 1.0, "form": "samples", "samples": {"x": [0, 0.25, 0.5, 0.75, 1], "v": [1, 0.8, -0.2, 0.3, 0.5]}}"#,
    ];
    println!("{:<28} {:>6} {:>10} {:>10} {:>10}", "potential", "γ", "V₀", "V(0)", "V(γ/2)");
    for text in descriptors {
        let d: PotentialDescriptor = serde_json::from_str(text)?;
        let v = Potential::from_descriptor(&d)?;
        println!(
            "{:<28} {:>6.2} {:>10.6} {:>10.4} {:>10.4}",
            v.label(),
            v.gamma(),
            v.v0_integral(),
            v.v_at_zero(),
            v.eval(0.5 * v.gamma())
        );
    }

    // Malformed descriptors are rejected with a typed error (CLI exit code 2).
    let bad: PotentialDescriptor = serde_json::from_str(r#"{"gamma": -1.0, "form": "box"}"#)?;
    match Potential::from_descriptor(&bad) {
        Ok(_) => println!("unexpectedly accepted"),
        Err(e) => println!("\nrejected: {e} (exit code {})", e.exit_code()),
    }
    Ok(())
}
