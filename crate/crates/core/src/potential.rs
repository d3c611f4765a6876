//! Compactly supported real potentials `V` on `[0, γ]`, the sign factorisation
//! `V = |V|^{1/2}·(|V|^{1/2} sign V)`, the integral `V₀` and the Fourier transform `V̂`.

use std::fmt;
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, StarkError};
use crate::quadrature::{integrate_panels, integrate_real};

/// How the potential is represented.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PotentialKind {
    GridSamples,
    PiecewisePolynomial,
    ClosedForm,
}

type ClosedFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Shape {
    /// Polynomial pieces in the global coordinate, ascending coefficients.
    Pieces { breaks: Vec<f64>, coeffs: Vec<Vec<f64>> },
    Spline(CubicSpline),
    Closed { name: String, f: ClosedFn },
}

/// A real potential supported on `[0, γ]`; immutable after construction.
#[derive(Clone)]
pub struct Potential {
    gamma: f64,
    kind: PotentialKind,
    condition_c: bool,
    v_at_zero: f64,
    shape: Shape,
}

impl fmt::Debug for Potential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Potential")
            .field("gamma", &self.gamma)
            .field("kind", &self.kind)
            .field("condition_c", &self.condition_c)
            .field("v_at_zero", &self.v_at_zero)
            .field("label", &self.label())
            .finish()
    }
}

fn horner(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &a| acc * x + a)
}

impl Potential {
    fn build(gamma: f64, kind: PotentialKind, condition_c: bool, shape: Shape) -> Result<Self> {
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(StarkError::MalformedInput(format!("gamma must be positive, got {gamma}")));
        }
        let mut v = Self { gamma, kind, condition_c, v_at_zero: 0.0, shape };
        v.v_at_zero = v.eval_inside(0.0);
        let l2 = integrate_real(|x| v.eval_inside(x).powi(2), 0.0, gamma, 1e-10 * (1.0 + gamma))
            .map_err(|e| StarkError::MalformedInput(format!("L² check failed: {e}")))?;
        if !l2.is_finite() {
            return Err(StarkError::MalformedInput("∫V² diverges".into()));
        }
        let breaks = v.breaks();
        for x in breaks.iter().chain(&[0.25 * gamma, 0.5 * gamma]) {
            if !v.eval_inside(*x).is_finite() {
                return Err(StarkError::MalformedInput(format!("V({x}) is not finite")));
            }
        }
        Ok(v)
    }

    /// The zero potential on `[0, γ]`.
    pub fn zero(gamma: f64) -> Result<Self> {
        Self::polynomial(gamma, vec![0.0])
    }

    /// The box `V = height` on `[0, γ]`.
    pub fn box_potential(gamma: f64, height: f64) -> Result<Self> {
        Self::polynomial(gamma, vec![height])
    }

    /// `V(x) = Σ cₖ xᵏ` on `[0, γ]`.
    pub fn polynomial(gamma: f64, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() || coeffs.iter().any(|c| !c.is_finite()) {
            return Err(StarkError::MalformedInput("polynomial coefficients must be finite".into()));
        }
        Self::build(
            gamma,
            PotentialKind::PiecewisePolynomial,
            true,
            Shape::Pieces { breaks: vec![0.0, gamma], coeffs: vec![coeffs] },
        )
    }

    /// Piecewise polynomial with pieces on `[breaks[k], breaks[k+1]]`, `breaks[0] = 0`.
    ///
    /// Condition C (absolute continuity on `(0, γ)`) is detected from the
    /// continuity of the pieces at the interior breaks.
    pub fn piecewise(breaks: Vec<f64>, coeffs: Vec<Vec<f64>>) -> Result<Self> {
        if breaks.len() != coeffs.len() + 1 || breaks[0] != 0.0 {
            return Err(StarkError::MalformedInput("piecewise layout mismatch".into()));
        }
        if breaks.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(StarkError::MalformedInput("piece breaks must increase".into()));
        }
        let continuous = (1..coeffs.len()).all(|k| {
            let x = breaks[k];
            let (l, r) = (horner(&coeffs[k - 1], x), horner(&coeffs[k], x));
            (l - r).abs() <= 1e-12 * (1.0 + l.abs())
        });
        let gamma = breaks[breaks.len() - 1];
        Self::build(gamma, PotentialKind::PiecewisePolynomial, continuous, Shape::Pieces { breaks, coeffs })
    }

    /// The regression potential `V(x) = 1 + x/2` on `[0, 1]`.
    pub fn canonical() -> Self {
        Self::polynomial(1.0, vec![1.0, 0.5]).expect("canonical potential is valid")
    }

    /// Closed-form potential given by a function on `[0, γ]`.
    pub fn closed_form(
        gamma: f64,
        name: impl Into<String>,
        condition_c: bool,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        Self::build(
            gamma,
            PotentialKind::ClosedForm,
            condition_c,
            Shape::Closed { name: name.into(), f: Arc::new(f) },
        )
    }

    /// Grid samples interpolated by a cubic spline whose end slopes are taken from
    /// the interpolating quartic through the first/last five samples.
    pub fn from_samples(x: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        let spline = CubicSpline::new(x, v)?;
        let gamma = spline.x[spline.x.len() - 1];
        Self::build(gamma, PotentialKind::GridSamples, true, Shape::Spline(spline))
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn kind(&self) -> PotentialKind {
        self.kind
    }

    /// Whether `V` restricted to `(0, γ)` is absolutely continuous.
    pub fn condition_c(&self) -> bool {
        self.condition_c
    }

    /// `V(0+)`.
    pub fn v_at_zero(&self) -> f64 {
        self.v_at_zero
    }

    /// `V(γ−)`.
    pub fn v_at_gamma(&self) -> f64 {
        self.eval_inside(self.gamma)
    }

    /// Short human-readable description.
    pub fn label(&self) -> String {
        match &self.shape {
            Shape::Pieces { coeffs, .. } if coeffs.len() == 1 => format!("poly{:?}", coeffs[0]),
            Shape::Pieces { coeffs, .. } => format!("piecewise({} pieces)", coeffs.len()),
            Shape::Spline(s) => format!("samples({})", s.x.len()),
            Shape::Closed { name, .. } => name.clone(),
        }
    }

    /// True when `V ≡ 0`.
    pub fn is_zero(&self) -> bool {
        match &self.shape {
            Shape::Pieces { coeffs, .. } => coeffs.iter().flatten().all(|&c| c == 0.0),
            Shape::Spline(s) => s.y.iter().all(|&c| c == 0.0),
            Shape::Closed { .. } => false,
        }
    }

    /// `V(x)`, with `V = 0` outside `[0, γ]`.
    pub fn eval(&self, x: f64) -> f64 {
        if !(0.0..=self.gamma).contains(&x) {
            return 0.0;
        }
        self.eval_inside(x)
    }

    fn eval_inside(&self, x: f64) -> f64 {
        let x = x.clamp(0.0, self.gamma);
        match &self.shape {
            Shape::Pieces { breaks, coeffs } => {
                let k = breaks[1..breaks.len() - 1].partition_point(|&b| b <= x);
                horner(&coeffs[k], x)
            }
            Shape::Spline(s) => s.eval(x),
            Shape::Closed { f, .. } => f(x),
        }
    }

    /// Panel breaks `0 = b₀ < … < b_m = γ` delimiting smooth pieces of `V`.
    pub fn breaks(&self) -> Vec<f64> {
        match &self.shape {
            Shape::Pieces { breaks, .. } => breaks.clone(),
            _ => vec![0.0, self.gamma],
        }
    }

    /// `V₀ = ∫ V dx`.
    pub fn v0_integral(&self) -> f64 {
        match &self.shape {
            Shape::Pieces { breaks, coeffs } => breaks
                .windows(2)
                .zip(coeffs)
                .map(|(w, c)| {
                    let anti = |x: f64| {
                        c.iter().enumerate().rev().fold(0.0, |acc, (k, &a)| acc * x + a / (k + 1) as f64) * x
                    };
                    anti(w[1]) - anti(w[0])
                })
                .sum(),
            Shape::Spline(s) => s.integral(),
            Shape::Closed { f, .. } => {
                integrate_real(|x| f(x), 0.0, self.gamma, 1e-14).unwrap_or(f64::NAN)
            }
        }
    }

    /// `V̂(t) = (2π)^{-1/2} ∫ V(x) e^{-ixt} dx` for complex `t`.
    pub fn fourier_hat_complex(&self, t: Complex64) -> Result<Complex64> {
        let mut breaks = Vec::new();
        for w in self.breaks().windows(2) {
            let pieces = ((t.norm() * (w[1] - w[0]) / 8.0).ceil() as usize).max(1);
            for p in 0..pieces {
                breaks.push(w[0] + (w[1] - w[0]) * p as f64 / pieces as f64);
            }
        }
        breaks.push(self.gamma);
        let scale = (t.im.abs() * self.gamma).exp() * (1.0 + self.v_at_zero.abs());
        let out = integrate_panels(
            &|x: f64| (Complex64::new(0.0, -x) * t).exp() * self.eval_inside(x),
            &breaks,
            1e-15 * scale,
            30,
        )?;
        Ok(out.value / (2.0 * std::f64::consts::PI).sqrt())
    }

    /// `V̂(t)` for real `t`.
    pub fn fourier_hat(&self, t: f64) -> Result<Complex64> {
        self.fourier_hat_complex(Complex64::new(t, 0.0))
    }

    /// Builds a potential from a JSON descriptor.
    pub fn from_descriptor(d: &PotentialDescriptor) -> Result<Self> {
        let coeffs = d.coeffs.clone().unwrap_or_default();
        match d.form.as_str() {
            "box" => {
                let h = match coeffs.as_slice() {
                    [] => 1.0,
                    [h] => *h,
                    _ => return Err(StarkError::MalformedInput("box takes one coefficient".into())),
                };
                Self::box_potential(d.gamma, h)
            }
            "linear" => {
                if coeffs.len() != 2 {
                    return Err(StarkError::MalformedInput("linear takes coeffs [a, b]".into()));
                }
                Self::polynomial(d.gamma, coeffs)
            }
            "poly" => Self::polynomial(d.gamma, coeffs),
            "samples" => {
                let s = d
                    .samples
                    .as_ref()
                    .ok_or_else(|| StarkError::MalformedInput("samples form needs {x, v}".into()))?;
                let p = Self::from_samples(s.x.clone(), s.v.clone())?;
                if (p.gamma - d.gamma).abs() > 1e-12 * d.gamma.abs().max(1.0) || s.x[0] != 0.0 {
                    return Err(StarkError::MalformedInput(
                        "sample grid must span exactly [0, gamma]".into(),
                    ));
                }
                Ok(p)
            }
            other => Err(StarkError::MalformedInput(format!("unknown potential form {other:?}"))),
        }
    }

    /// Reads and builds a potential from a JSON descriptor file.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let d: PotentialDescriptor = serde_json::from_str(&text)
            .map_err(|e| StarkError::MalformedInput(format!("{}: {e}", path.display())))?;
        Self::from_descriptor(&d)
    }
}

/// JSON descriptor `{"gamma", "form", "coeffs", "samples": {"x", "v"}}`.
///
/// * `box`: `coeffs = [height]` (default 1);
/// * `linear`: `coeffs = [a, b]`, `V = a + b x`;
/// * `poly`: ascending coefficients;
/// * `samples`: grid `x` spanning `[0, gamma]` with values `v`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct PotentialDescriptor {
    pub gamma: f64,
    pub form: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coeffs: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<Samples>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Samples {
    pub x: Vec<f64>,
    pub v: Vec<f64>,
}

/// The factorisation `V = sqrt_abs · signed_sqrt`.
#[derive(Debug, Clone)]
pub struct SignSplit {
    potential: Potential,
}

impl SignSplit {
    /// `|V(x)|^{1/2}`.
    pub fn sqrt_abs(&self, x: f64) -> f64 {
        self.potential.eval(x).abs().sqrt()
    }

    /// `|V(x)|^{1/2} sign V(x)`.
    pub fn signed_sqrt(&self, x: f64) -> f64 {
        let v = self.potential.eval(x);
        v.abs().sqrt() * sign(v)
    }

    /// `sign V(x)`, with `sign 0 = 0`.
    pub fn sign(&self, x: f64) -> f64 {
        sign(self.potential.eval(x))
    }
}

fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Splits `V` into `|V|^{1/2}` and `|V|^{1/2} sign V`.
pub fn split_sign(v: &Potential) -> SignSplit {
    SignSplit { potential: v.clone() }
}

/// Cubic spline through samples, with end slopes from local quartic interpolation.
#[derive(Debug, Clone)]
struct CubicSpline {
    x: Vec<f64>,
    y: Vec<f64>,
    /// Second derivatives at the knots.
    m: Vec<f64>,
}

/// Derivative at `at` of the polynomial interpolating `(xs, ys)`.
fn lagrange_derivative(xs: &[f64], ys: &[f64], at: f64) -> f64 {
    let n = xs.len();
    let mut d = 0.0;
    for j in 0..n {
        let denom: f64 = (0..n).filter(|&k| k != j).map(|k| xs[j] - xs[k]).product();
        let mut num = 0.0;
        for i in (0..n).filter(|&i| i != j) {
            num += (0..n).filter(|&k| k != j && k != i).map(|k| at - xs[k]).product::<f64>();
        }
        d += ys[j] * num / denom;
    }
    d
}

impl CubicSpline {
    fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        let n = x.len();
        if n != y.len() || n < 5 {
            return Err(StarkError::MalformedInput("samples need ≥ 5 matching x/v points".into()));
        }
        if x.iter().chain(&y).any(|v| !v.is_finite()) {
            return Err(StarkError::MalformedInput("non-finite sample".into()));
        }
        if x[0] != 0.0 || x.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(StarkError::MalformedInput("sample grid must start at 0 and increase".into()));
        }
        let s0 = lagrange_derivative(&x[..5], &y[..5], x[0]);
        let s1 = lagrange_derivative(&x[n - 5..], &y[n - 5..], x[n - 1]);
        // Clamped-spline tridiagonal system for the second derivatives.
        let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
        let mut sub = vec![0.0; n];
        let mut diag = vec![0.0; n];
        let mut sup = vec![0.0; n];
        let mut rhs = vec![0.0; n];
        diag[0] = h[0] / 3.0;
        sup[0] = h[0] / 6.0;
        rhs[0] = (y[1] - y[0]) / h[0] - s0;
        for i in 1..n - 1 {
            sub[i] = h[i - 1] / 6.0;
            diag[i] = (h[i - 1] + h[i]) / 3.0;
            sup[i] = h[i] / 6.0;
            rhs[i] = (y[i + 1] - y[i]) / h[i] - (y[i] - y[i - 1]) / h[i - 1];
        }
        sub[n - 1] = h[n - 2] / 6.0;
        diag[n - 1] = h[n - 2] / 3.0;
        rhs[n - 1] = s1 - (y[n - 1] - y[n - 2]) / h[n - 2];
        // Thomas algorithm.
        for i in 1..n {
            let w = sub[i] / diag[i - 1];
            diag[i] -= w * sup[i - 1];
            rhs[i] -= w * rhs[i - 1];
        }
        let mut m = vec![0.0; n];
        m[n - 1] = rhs[n - 1] / diag[n - 1];
        for i in (0..n - 1).rev() {
            m[i] = (rhs[i] - sup[i] * m[i + 1]) / diag[i];
        }
        Ok(Self { x, y, m })
    }

    fn eval(&self, t: f64) -> f64 {
        let n = self.x.len();
        let i = self.x[1..n - 1].partition_point(|&b| b <= t);
        let h = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - t) / h;
        let b = (t - self.x[i]) / h;
        a * self.y[i]
            + b * self.y[i + 1]
            + ((a * a * a - a) * self.m[i] + (b * b * b - b) * self.m[i + 1]) * h * h / 6.0
    }

    fn integral(&self) -> f64 {
        self.x
            .windows(2)
            .enumerate()
            .map(|(i, w)| {
                let h = w[1] - w[0];
                0.5 * h * (self.y[i] + self.y[i + 1]) - h * h * h * (self.m[i] + self.m[i + 1]) / 24.0
            })
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn support_is_enforced() {
        let v = Potential::canonical();
        assert_eq!(v.eval(-1e-12), 0.0);
        assert_eq!(v.eval(1.0 + 1e-12), 0.0);
        assert_eq!(v.eval(1.0), 1.5);
        assert_eq!(v.v_at_zero(), 1.0);
        assert!((v.v0_integral() - 1.25).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(Potential::box_potential(0.0, 1.0).is_err());
        assert!(Potential::box_potential(-1.0, 1.0).is_err());
        assert!(Potential::from_samples(vec![0.0, 0.5, 0.4, 0.6, 1.0], vec![0.0; 5]).is_err());
        assert!(Potential::from_samples(vec![0.0, 0.2, 0.4, 0.6, 1.0], vec![0.0, 1.0, f64::NAN, 0.0, 0.0]).is_err());
        assert!(Potential::closed_form(1.0, "pole", false, |x| 1.0 / x).is_err());
    }

    #[test]
    fn spline_reproduces_cubics() {
        let x: Vec<f64> = (0..=20).map(|i| i as f64 / 10.0).collect();
        let f = |t: f64| 1.0 + t - 0.5 * t * t + 0.25 * t * t * t;
        let v = Potential::from_samples(x.clone(), x.iter().map(|&t| f(t)).collect()).unwrap();
        for t in [0.0, 0.013, 0.77, 1.5, 1.99, 2.0] {
            assert!((v.eval(t) - f(t)).abs() < 1e-13, "t = {t}");
        }
        let exact = 2.0 + 2.0 - 8.0 / 6.0 + 1.0;
        assert!((v.v0_integral() - exact).abs() < 1e-13);
    }

    #[test]
    fn piecewise_condition_c() {
        let jump = Potential::piecewise(vec![0.0, 0.5, 1.0], vec![vec![1.0], vec![2.0]]).unwrap();
        assert!(!jump.condition_c());
        let kink = Potential::piecewise(vec![0.0, 0.5, 1.0], vec![vec![0.0, 1.0], vec![1.0, -1.0]]).unwrap();
        assert!(kink.condition_c());
        assert_eq!(kink.breaks(), vec![0.0, 0.5, 1.0]);
        assert!((kink.v0_integral() - 0.25).abs() < 1e-15);
    }
}
