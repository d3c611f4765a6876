//! Potential descriptors: parsing, validation and the derived quantities.

use std::io::Write;

use stark_resonance::potential::{Potential, PotentialDescriptor};
use stark_resonance::StarkError;

fn parse(text: &str) -> stark_resonance::Result<Potential> {
    let d: PotentialDescriptor = serde_json::from_str(text)?;
    Potential::from_descriptor(&d)
}

#[test]
fn canonical_linear_descriptor() {
    let v = parse(r#"{"gamma": 1.0, "form": "linear", "coeffs": [1.0, 0.5]}"#).unwrap();
    assert!((v.v0_integral() - 1.25).abs() < 1e-14);
    assert!((v.v_at_zero() - 1.0).abs() < 1e-15);
    assert!((v.eval(1.0) - 1.5).abs() < 1e-15);
    assert_eq!(v.eval(1.5), 0.0);
    assert_eq!(v.eval(-0.1), 0.0);
}

#[test]
fn box_and_polynomial_forms() {
    let b = parse(r#"{"gamma": 2.0, "form": "box", "coeffs": [3.0]}"#).unwrap();
    assert!((b.v0_integral() - 6.0).abs() < 1e-13);
    let p = parse(r#"{"gamma": 1.0, "form": "poly", "coeffs": [0.0, 0.0, 3.0]}"#).unwrap();
    assert!((p.v0_integral() - 1.0).abs() < 1e-13);
}

#[test]
fn sampled_form_interpolates_the_samples() {
    let v = parse(r#"{"gamma": 1.0, "form": "samples", "samples": {"x": [0, 0.25, 0.5, 0.75, 1], "v": [1, 1.5, 2, 1, 0]}}"#).unwrap();
    for (x, y) in [(0.0, 1.0), (0.25, 1.5), (0.5, 2.0), (1.0, 0.0)] {
        assert!((v.eval(x) - y).abs() < 1e-12, "V({x}) = {}", v.eval(x));
    }
}

#[test]
fn malformed_descriptors_map_to_exit_code_two() {
    for text in [
        r#"{"gamma": -1.0, "form": "box"}"#,
        r#"{"gamma": 1.0, "form": "linear", "coeffs": [1.0]}"#,
        r#"{"gamma": 1.0, "form": "triangle"}"#,
        r#"{"gamma": 1.0, "form": "samples"}"#,
        r#"{"gamma": 1.0, "form": "samples", "samples": {"x": [0, 0.5], "v": [1, 2]}}"#,
    ] {
        let err = parse(text).expect_err(text);
        assert_eq!(err.exit_code(), 2, "{text}: {err}");
    }
    let err = parse(r#"{"gamma": 1.0, "form": "box", "extra": 1}"#).unwrap_err();
    assert!(matches!(err, StarkError::Json(_)));
}

#[test]
fn descriptor_files_are_read() {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    write!(f, r#"{{"gamma": 1.0, "form": "box", "coeffs": [0.0]}}"#).unwrap();
    let v = Potential::from_file(f.path()).unwrap();
    assert!(v.is_zero());
    assert!(Potential::from_file(std::path::Path::new("/nonexistent/v.json")).is_err());
}
