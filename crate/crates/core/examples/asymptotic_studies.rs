//! Every asymptotic study: observed values from the production modules against
//! the leading-order prediction, with the fitted structural constant and its
//! pass/fail verdict. Each report serialises to JSON (as the `study` CLI
//! command writes it).
//!
//! Run with `cargo run --release --example asymptotic_studies`.

use stark_resonance::asymptotics::{run_study, ClaimId, StudyConfig};
use stark_resonance::potential::Potential;

fn main() -> stark_resonance::Result<()> {
    let v = Potential::canonical();
    println!("{:<12} {:>34} {:>34} {:>10} {:>6}", "claim", "fitted", "expected", "deviation", "pass");
    for claim in ClaimId::ALL {
        let s = run_study(&v, claim, &StudyConfig::for_claim(claim))?;
        println!(
            "{:<12} {:>34} {:>34} {:>10.2e} {:>6}",
            claim.as_str(),
            format!("{:.6}", s.fit.coefficient),
            format!("{:.6}", s.expected),
            s.deviation,
            s.pass
        );
    }

    let s = run_study(&v, ClaimId::Ray512, &StudyConfig::for_claim(ClaimId::Ray512))?;
    println!("\n{}", serde_json::to_string_pretty(&s.fit)?);
    Ok(())
}
