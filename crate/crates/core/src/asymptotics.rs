//! Parameterised studies of the high-energy and ray asymptotics: each study
//! samples an observed quantity from the production modules, compares it with
//! the leading term, fits the structural constant and reports pass/fail.
//!
//! Leading terms involving `Ai²` use the normalisation `Ai(z) ~ e^{−ζ}/(2√π z^{1/4})`,
//! so the Born-term predictions carry a factor `1/π`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, StarkError};
use crate::fit::least_squares;
use crate::fredholm::{rule_for, trace_y0, Backend, Side};
use crate::green::{trace_y0_oscillatory, HalfPlane};
use crate::parallel;
use crate::potential::Potential;
use crate::quadrature::integrate_panels;
use crate::scattering::born_a0_log;

/// The asymptotic claims that can be studied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
pub enum ClaimId {
    /// `log D₊(λ) = iV₀/(2√λ) + O(λ^{−τ})` along a ray.
    #[serde(rename = "logdet_1_8")]
    #[value(name = "logdet_1_8")]
    Logdet18,
    /// `φ_sc(λ) = V₀/(2π√λ) + O(λ^{−τ})` as `λ → +∞`.
    #[serde(rename = "phase_1_9")]
    #[value(name = "phase_1_9")]
    Phase19,
    /// `Tr Y₀(λ) = iV₀/(2√λ) + O(1/λ)`, matrix and oscillatory routes.
    #[serde(rename = "trace_2_43")]
    #[value(name = "trace_2_43")]
    Trace243,
    /// Born term away from the positive axis: `𝒜₀ ≈ (i/(4πζ)) e^{−i(4/3)ζ³} ∫ e^{2ixζ}V`.
    #[serde(rename = "born_4_9")]
    #[value(name = "born_4_9")]
    Born49,
    /// Sector bound `|𝒜₀| ≤ e^{(4/3)|Im ζ³|} ∫|V| / (2|ζ|)` for `|arg ζ| ≤ π/6`.
    #[serde(rename = "born_4_13")]
    #[value(name = "born_4_13")]
    Born413,
    /// `𝒜₀(t²e^{iπ/3}) ≈ e^{i2π/3 + (4/3)t³} V(0)/(8πt²)`.
    #[serde(rename = "ray_5_5")]
    #[value(name = "ray_5_5")]
    Ray55,
    /// `log|D₋(t²e^{iπ/3})| ≈ (4/3)t³ − 2 log t + const`.
    #[serde(rename = "ray_5_12")]
    #[value(name = "ray_5_12")]
    Ray512,
}

impl ClaimId {
    pub const ALL: [ClaimId; 7] = [
        ClaimId::Logdet18,
        ClaimId::Phase19,
        ClaimId::Trace243,
        ClaimId::Born49,
        ClaimId::Born413,
        ClaimId::Ray55,
        ClaimId::Ray512,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ClaimId::Logdet18 => "logdet_1_8",
            ClaimId::Phase19 => "phase_1_9",
            ClaimId::Trace243 => "trace_2_43",
            ClaimId::Born49 => "born_4_9",
            ClaimId::Born413 => "born_4_13",
            ClaimId::Ray55 => "ray_5_5",
            ClaimId::Ray512 => "ray_5_12",
        }
    }

    /// Declared tolerance of the structural-constant comparison.
    pub fn tolerance(self) -> f64 {
        match self {
            ClaimId::Logdet18 | ClaimId::Trace243 | ClaimId::Born49 => 0.02,
            ClaimId::Phase19 => 0.10,
            ClaimId::Born413 => 0.0,
            ClaimId::Ray55 => 0.20,
            ClaimId::Ray512 => 0.05,
        }
    }

    /// Default parameter grid.
    pub fn default_grid(self) -> Vec<f64> {
        let geometric = |a: f64, b: f64, n: usize| -> Vec<f64> {
            (0..n).map(|k| a * (b / a).powf(k as f64 / (n - 1) as f64)).collect()
        };
        let linear = |a: f64, b: f64, n: usize| -> Vec<f64> {
            (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect()
        };
        match self {
            ClaimId::Logdet18 | ClaimId::Trace243 | ClaimId::Phase19 => geometric(1e2, 1e4, 9),
            ClaimId::Born49 => geometric(10.0, 1e3, 7),
            ClaimId::Born413 => geometric(2.0, 10.0, 5),
            ClaimId::Ray55 => linear(2.0, 4.5, 6),
            ClaimId::Ray512 => linear(2.5, 4.0, 8),
        }
    }
}

impl std::fmt::Display for ClaimId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for ClaimId {
    type Err = StarkError;
    fn from_str(s: &str) -> Result<Self> {
        ClaimId::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| StarkError::MalformedInput(format!("unknown claim id {s:?}")))
    }
}

/// One sample of a study.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct StudySample {
    pub parameter: f64,
    pub observed: Complex64,
    pub predicted: Complex64,
}

/// Least-squares summary of a study.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct StudyFit {
    /// Decay exponent of `|observed − predicted|` in the parameter (log–log slope),
    /// or the fitted power for growth studies.
    pub exponent: f64,
    /// The fitted structural constant compared with the predicted leading-order value.
    pub coefficient: Complex64,
    /// RMS residual of the fit.
    pub residual: f64,
}

/// The outcome of [`run_study`].
#[derive(Debug, Clone, Serialize)]
pub struct AsymptoticStudy {
    pub claim_id: ClaimId,
    /// Ray angle `arg λ` where applicable.
    pub angle: Option<f64>,
    pub samples: Vec<StudySample>,
    pub fit: StudyFit,
    /// The constant the fit is compared against.
    pub expected: Complex64,
    /// Relative deviation `|coefficient − expected|/|expected|` (absolute if expected = 0).
    pub deviation: f64,
    pub tolerance: f64,
    /// Secondary fit (the matrix route of `trace_2_43`).
    pub secondary: Option<StudyFit>,
    pub pass: bool,
}

/// Study parameters.
#[derive(Debug, Clone)]
pub struct StudyConfig {
    pub grid: Vec<f64>,
    /// Ray angle for the `λ`-ray studies (`logdet_1_8`, `trace_2_43`, `born_4_9`).
    pub angle: f64,
    pub backend: Backend,
    /// Nyström size for matrix routes.
    pub n: usize,
}

impl StudyConfig {
    pub fn for_claim(claim: ClaimId) -> Self {
        let angle = match claim {
            ClaimId::Born49 => PI,
            _ => PI / 2.0,
        };
        Self { grid: claim.default_grid(), angle, backend: Backend::default(), n: 128 }
    }
}

/// `√λ` with `arg √λ ∈ (−π/2, π/2]` (so `√λ ∈ ℂ₊` off the positive axis of ℂ₊).
fn sqrt_upper(l: Complex64) -> Complex64 {
    l.sqrt()
}

/// Fits `y ≈ a·p^{−1/2} + b·p^{−1}` on a ray `λ = p e^{iθ}` in `λ`-units:
/// `y ≈ a λ^{−1/2} + b λ^{−1}`; returns `(a, rms)`.
fn fit_half_power(samples: &[StudySample], angle: f64) -> Result<(Complex64, f64)> {
    // Complex least squares as a real problem in (Re a, Im a, Re b, Im b).
    let mut rows = Vec::new();
    let mut ys = Vec::new();
    for s in samples {
        let l = Complex64::from_polar(s.parameter, angle);
        let e1 = 1.0 / sqrt_upper(l);
        let e2 = 1.0 / l;
        // Weight by √|λ| so that every sample counts on the scale of the leading term.
        let w = s.parameter.sqrt();
        rows.push(vec![w * e1.re, -w * e1.im, w * e2.re, -w * e2.im]);
        ys.push(w * s.observed.re);
        rows.push(vec![w * e1.im, w * e1.re, w * e2.im, w * e2.re]);
        ys.push(w * s.observed.im);
    }
    let (c, r) = least_squares(&rows, &ys)?;
    Ok((Complex64::new(c[0], c[1]), r))
}

/// Log–log slope of `|observed − predicted|` against the parameter.
fn remainder_slope(samples: &[StudySample]) -> f64 {
    let pts: Vec<(f64, f64)> = samples
        .iter()
        .filter(|s| (s.observed - s.predicted).norm() > 0.0)
        .map(|s| (s.parameter.ln(), (s.observed - s.predicted).norm().ln()))
        .collect();
    if pts.len() < 2 {
        return f64::NEG_INFINITY;
    }
    crate::fit::linear(&pts).0
}

fn deviation(coefficient: Complex64, expected: Complex64) -> f64 {
    let d = (coefficient - expected).norm();
    if expected.norm() > 0.0 {
        d / expected.norm()
    } else {
        d
    }
}

fn abs_l1(v: &Potential) -> Result<f64> {
    let f = |x: f64| Complex64::new(v.eval(x).abs(), 0.0);
    Ok(integrate_panels(&f, &v.breaks(), 1e-13, 30)?.value.re)
}

/// Runs one study.
pub fn run_study(v: &Potential, claim: ClaimId, cfg: &StudyConfig) -> Result<AsymptoticStudy> {
    let mut grid = cfg.grid.clone();
    if grid.iter().any(|p| !(p.is_finite() && *p > 0.0)) {
        return Err(StarkError::MalformedInput("study parameters must be positive and finite".into()));
    }
    grid.sort_by(f64::total_cmp);
    let v0 = v.v0_integral();
    let i = Complex64::i();
    let tol = claim.tolerance();
    let backend = cfg.backend;
    let angle = cfg.angle;
    let ray = |p: f64| Complex64::from_polar(p, angle);

    let mut secondary = None;
    let (samples, fit, expected) = match claim {
        ClaimId::Logdet18 => {
            let samples = parallel::map(&grid, |&p| {
                let l = ray(p);
                let observed = backend.log_d(v, l, Side::Plus)?;
                Ok(StudySample { parameter: p, observed, predicted: i * v0 / (2.0 * sqrt_upper(l)) })
            })?;
            let (a, r) = fit_half_power(&samples, angle)?;
            let fit = StudyFit { exponent: remainder_slope(&samples), coefficient: a, residual: r };
            (samples, fit, i * v0 / 2.0)
        }
        ClaimId::Trace243 => {
            let samples = parallel::map(&grid, |&p| {
                let l = ray(p);
                let observed = trace_y0_oscillatory(v, l)?;
                Ok(StudySample { parameter: p, observed, predicted: i * v0 / (2.0 * sqrt_upper(l)) })
            })?;
            let rule = rule_for(v, cfg.n)?;
            let matrix = parallel::map(&grid, |&p| {
                let l = ray(p);
                let observed = trace_y0(v, l, &rule, HalfPlane::Upper)?;
                Ok(StudySample { parameter: p, observed, predicted: i * v0 / (2.0 * sqrt_upper(l)) })
            })?;
            let (a, r) = fit_half_power(&samples, angle)?;
            let (b, rb) = fit_half_power(&matrix, angle)?;
            secondary = Some(StudyFit { exponent: remainder_slope(&matrix), coefficient: b, residual: rb });
            let fit = StudyFit { exponent: remainder_slope(&samples), coefficient: a, residual: r };
            (samples, fit, i * v0 / 2.0)
        }
        ClaimId::Phase19 => {
            let samples = parallel::map(&grid, |&p| {
                let observed = backend.log_d(v, Complex64::new(p, 0.0), Side::Plus)?.im / PI;
                Ok(StudySample {
                    parameter: p,
                    observed: Complex64::new(observed, 0.0),
                    predicted: Complex64::new(v0 / (2.0 * PI * p.sqrt()), 0.0),
                })
            })?;
            let (a, r) = fit_half_power(&samples, 0.0)?;
            let fit = StudyFit { exponent: remainder_slope(&samples), coefficient: a, residual: r };
            (samples, fit, Complex64::new(v0 / (2.0 * PI), 0.0))
        }
        ClaimId::Born49 => {
            // Observed and predicted are compared through log 𝒜₀; the coefficient is
            // the ratio observed/predicted at the largest |λ|.
            let samples = parallel::map(&grid, |&p| {
                let l = ray(p);
                let observed = born_a0_log(v, l, 1e-12)?;
                let zeta = i * (-l).sqrt();
                let g = |x: f64| (2.0 * i * x * zeta).exp() * v.eval(x);
                let integral = integrate_panels(&g, &fine_breaks(v, zeta.norm()), 1e-14, 30)?.value;
                let predicted = (i / (4.0 * PI * zeta) * integral).ln() - i * (4.0 / 3.0) * zeta * zeta * zeta;
                Ok(StudySample { parameter: p, observed, predicted })
            })?;
            ratio_fit(samples)
        }
        ClaimId::Born413 => {
            // Points ζ = r e^{iφ}, φ ∈ {−π/6, 0, π/6}; observed |𝒜₀|, predicted the bound.
            let l1 = abs_l1(v)?;
            let mut pts = Vec::new();
            for &r in &grid {
                for phi in [-PI / 6.0, 0.0, PI / 6.0] {
                    pts.push((r, phi));
                }
            }
            let samples = parallel::map(&pts, |&(r, phi)| {
                let zeta = Complex64::from_polar(r, phi);
                let l = zeta * zeta;
                let observed = born_a0_log(v, l, 1e-12)?.re;
                let bound = (4.0 / 3.0) * (zeta * zeta * zeta).im.abs() + (l1 / (2.0 * r)).ln();
                Ok(StudySample {
                    parameter: r,
                    observed: Complex64::new(observed.exp_or_zero(), 0.0),
                    predicted: Complex64::new(bound.exp_or_zero(), 0.0),
                })
            })?;
            let worst = samples
                .iter()
                .map(|s| if s.predicted.re > 0.0 { s.observed.re / s.predicted.re } else { f64::INFINITY })
                .fold(0.0, f64::max);
            let fit = StudyFit { exponent: f64::NAN, coefficient: Complex64::new(worst, 0.0), residual: 0.0 };
            let pass = v.is_zero() || worst <= 1.0;
            return Ok(AsymptoticStudy {
                claim_id: claim,
                angle: None,
                samples,
                fit,
                expected: Complex64::new(1.0, 0.0),
                deviation: (worst - 1.0).max(0.0),
                tolerance: tol,
                secondary: None,
                pass,
            });
        }
        ClaimId::Ray55 => {
            let samples = parallel::map(&grid, |&t| {
                let l = Complex64::from_polar(t * t, PI / 3.0);
                let observed = born_a0_log(v, l, 1e-12)?;
                let lead = Complex64::new(v.v_at_zero() / (8.0 * PI * t * t), 0.0);
                let predicted = lead.ln() + Complex64::new((4.0 / 3.0) * t.powi(3), 2.0 * PI / 3.0);
                Ok(StudySample { parameter: t, observed, predicted })
            })?;
            // Coefficient: the ratio at t = 3 (the reference point) if sampled,
            // else at the largest t.
            let (mut samples, mut fit, expected) = ratio_fit(samples);
            if let Some(s) = samples.iter().find(|s| (s.parameter - 3.0).abs() < 1e-12) {
                fit.coefficient = ratio(s);
            }
            samples.sort_by(|a, b| a.parameter.total_cmp(&b.parameter));
            (samples, fit, expected)
        }
        ClaimId::Ray512 => {
            let samples = parallel::map(&grid, |&t| {
                let l = Complex64::from_polar(t * t, PI / 3.0);
                let observed = backend.log_d(v, l, Side::Minus)?;
                let predicted = Complex64::new((4.0 / 3.0) * t.powi(3) - 2.0 * t.ln(), 0.0);
                Ok(StudySample { parameter: t, observed, predicted })
            })?;
            let rows: Vec<Vec<f64>> = samples.iter().map(|s| vec![s.parameter.powi(3), 1.0]).collect();
            let ys: Vec<f64> = samples.iter().map(|s| s.observed.re + 2.0 * s.parameter.ln()).collect();
            let (c, r) = least_squares(&rows, &ys)?;
            let fit = StudyFit { exponent: 1.5, coefficient: Complex64::new(c[0], 0.0), residual: r };
            (samples, fit, Complex64::new(4.0 / 3.0, 0.0))
        }
    };
    let dev = if v.is_zero() && matches!(claim, ClaimId::Logdet18 | ClaimId::Trace243 | ClaimId::Phase19) {
        fit.coefficient.norm()
    } else {
        deviation(fit.coefficient, expected)
    };
    let mut pass = dev <= tol || (v.is_zero() && dev == 0.0);
    if let Some(sec) = &secondary {
        pass &= deviation(sec.coefficient, expected) <= tol || (v.is_zero() && sec.coefficient.norm() == 0.0);
    }
    Ok(AsymptoticStudy {
        claim_id: claim,
        angle: matches!(claim, ClaimId::Logdet18 | ClaimId::Trace243 | ClaimId::Born49).then_some(angle),
        samples,
        fit,
        expected,
        deviation: dev,
        tolerance: tol,
        secondary,
        pass,
    })
}

trait ExpOrZero {
    fn exp_or_zero(self) -> f64;
}

impl ExpOrZero for f64 {
    fn exp_or_zero(self) -> f64 {
        if self < -745.0 {
            0.0
        } else {
            self.exp()
        }
    }
}

fn ratio(s: &StudySample) -> Complex64 {
    let d = s.observed - s.predicted;
    Complex64::from_polar(d.re.exp_or_zero(), d.im)
}

/// Ratio-type fit for log-valued samples: coefficient = observed/predicted at the
/// largest parameter; exponent = log–log slope of `|ratio − 1|`.
fn ratio_fit(samples: Vec<StudySample>) -> (Vec<StudySample>, StudyFit, Complex64) {
    let pts: Vec<(f64, f64)> = samples
        .iter()
        .map(|s| (s.parameter.ln(), (ratio(s) - 1.0).norm().max(1e-300).ln()))
        .collect();
    let exponent = if pts.len() >= 2 { crate::fit::linear(&pts).0 } else { f64::NAN };
    let coefficient = samples.last().map(ratio).unwrap_or(Complex64::new(f64::NAN, 0.0));
    let residual = samples.iter().map(|s| (ratio(s) - 1.0).norm()).fold(0.0, f64::max);
    (samples, StudyFit { exponent, coefficient, residual }, Complex64::new(1.0, 0.0))
}

fn fine_breaks(v: &Potential, freq: f64) -> Vec<f64> {
    let breaks = v.breaks();
    let pieces = (freq * v.gamma()).ceil().max(1.0) as usize;
    let mut out = Vec::new();
    for w in breaks.windows(2) {
        for k in 0..pieces {
            out.push(w[0] + (w[1] - w[0]) * k as f64 / pieces as f64);
        }
    }
    out.push(v.gamma());
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn claim_ids_round_trip() {
        for c in ClaimId::ALL {
            assert_eq!(c.as_str().parse::<ClaimId>().unwrap(), c);
            assert_eq!(serde_json::to_string(&c).unwrap(), format!("\"{}\"", c.as_str()));
        }
    }

    #[test]
    fn zero_potential_logdet_study_is_trivial() {
        let v = Potential::zero(1.0).unwrap();
        let mut cfg = StudyConfig::for_claim(ClaimId::Logdet18);
        cfg.grid = vec![100.0, 1000.0];
        let s = run_study(&v, ClaimId::Logdet18, &cfg).unwrap();
        assert!(s.pass && s.fit.residual == 0.0);
        assert!(s.samples.iter().all(|x| x.observed == Complex64::new(0.0, 0.0)));
    }
}
