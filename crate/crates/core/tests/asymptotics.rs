//! Asymptotic studies through the public API.

use stark_resonance::asymptotics::{run_study, ClaimId, StudyConfig};
use stark_resonance::potential::Potential;

#[test]
fn every_claim_id_round_trips() {
    for claim in ClaimId::ALL {
        assert_eq!(claim.as_str().parse::<ClaimId>().unwrap(), claim);
        assert_eq!(serde_json::to_value(claim).unwrap(), claim.as_str());
    }
    assert!("logdet18".parse::<ClaimId>().is_err());
}

#[test]
fn default_studies_pass_on_the_canonical_potential() {
    let v = Potential::canonical();
    for claim in ClaimId::ALL {
        let s = run_study(&v, claim, &StudyConfig::for_claim(claim)).unwrap();
        assert!(s.pass, "{claim}: deviation {} > {}", s.deviation, s.tolerance);
        assert!(!s.samples.is_empty());
    }
}

#[test]
fn studies_are_deterministic() {
    let v = Potential::canonical();
    let cfg = StudyConfig::for_claim(ClaimId::Born49);
    let a = serde_json::to_string(&run_study(&v, ClaimId::Born49, &cfg).unwrap()).unwrap();
    let b = serde_json::to_string(&run_study(&v, ClaimId::Born49, &cfg).unwrap()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn free_case_study_is_trivially_zero() {
    let v = Potential::zero(1.0).unwrap();
    let s = run_study(&v, ClaimId::Logdet18, &StudyConfig::for_claim(ClaimId::Logdet18)).unwrap();
    assert!(s.samples.iter().all(|p| p.observed.norm() == 0.0 && p.predicted.norm() == 0.0));
    assert!(s.pass);
}

#[test]
fn report_has_the_documented_fields() {
    let v = Potential::canonical();
    let s = run_study(&v, ClaimId::Ray512, &StudyConfig::for_claim(ClaimId::Ray512)).unwrap();
    let j = serde_json::to_value(&s).unwrap();
    for key in ["claim_id", "samples", "fit", "pass"] {
        assert!(j.get(key).is_some(), "missing {key}");
    }
    assert_eq!(j["claim_id"], "ray_5_12");
}
