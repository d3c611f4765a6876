//! High-accuracy evaluation of `D±(λ)` as a ratio of Wronskians.
//!
//! For `V` supported on `[0, γ]` let `f` solve `f'' = (x + V(x) − λ) f` with
//! `f = u₊ = Ai(· − λ)` on `[γ, ∞)`. On `(−∞, 0]`, `f` is a combination of the free
//! solutions and
//!
//! `D(λ) = W(ũ, f) / W(ũ, u₊)`,  `W(a, b) = a b' − a' b`,
//!
//! where `ũ = Ai(ω(x − λ))` gives `D₊` and `ũ = Ai(ω̄(x − λ))` gives `D₋`.
//! Both right-hand sides are entire in `λ`, so this also evaluates the analytic
//! extensions of `D₊` into `ℂ₋` and of `D₋` into `ℂ₊` without any cancellation
//! between `S` and `D₊`. This equals the Fredholm determinant `det(I + Y₀(λ))`,
//! whose Nyström approximation in [`crate::fredholm`] converges only at second
//! order (the kernel has a derivative jump on the diagonal); here the ODE is
//! integrated backwards from `γ` to `0` with a fourth-order Magnus scheme
//! followed by one Richardson step, and the solution is carried in log scale.

use num_complex::Complex64;

use crate::airy::{airy_ai_scaled, airy_rotated_scaled};
use crate::error::{Result, StarkError};
use crate::green::HalfPlane;
use crate::potential::Potential;

/// Which determinant is meant: `D₊` (upper branch) or `D₋` (lower branch).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Plus,
    Minus,
}

impl Side {
    /// The half-plane in which this determinant is defined by the Fredholm formula.
    pub fn half_plane(self) -> HalfPlane {
        match self {
            Side::Plus => HalfPlane::Upper,
            Side::Minus => HalfPlane::Lower,
        }
    }

    pub fn conj(self) -> Self {
        match self {
            Side::Plus => Side::Minus,
            Side::Minus => Side::Plus,
        }
    }
}

/// Wronskian–Magnus evaluator for `log D±(λ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JostSolver {
    /// Minimum number of Magnus steps over `[0, γ]`.
    pub min_steps: usize,
    /// Steps per unit of `γ·√|λ|` (local wavelength resolution).
    pub steps_per_wave: f64,
}

impl Default for JostSolver {
    fn default() -> Self {
        Self { min_steps: 64, steps_per_wave: 24.0 }
    }
}

const SQRT3_6: f64 = 0.28867513459481287;
const SQRT3_12: f64 = 0.14433756729740643;

/// `(cosh μ, sinh μ / μ)` for `μ² = m2`, stable for small `μ`.
fn cosh_sinhc(m2: Complex64) -> (Complex64, Complex64) {
    if m2.norm() < 1e-3 {
        let c = 1.0 + m2 / 2.0 * (1.0 + m2 / 12.0 * (1.0 + m2 / 30.0));
        let s = 1.0 + m2 / 6.0 * (1.0 + m2 / 20.0 * (1.0 + m2 / 42.0));
        (c, s)
    } else {
        let mu = m2.sqrt();
        (mu.cosh(), mu.sinh() / mu)
    }
}

impl JostSolver {
    /// Solver whose minimum step count follows a quadrature size `n`.
    pub fn with_steps(n: usize) -> Self {
        Self { min_steps: n.max(8), ..Self::default() }
    }

    fn step_count(&self, len: f64, gamma: f64, lambda: Complex64) -> usize {
        let total = (self.min_steps as f64)
            .max(self.steps_per_wave * gamma * (lambda.norm() + gamma + 1.0).sqrt());
        ((total * len / gamma).ceil() as usize).max(2)
    }

    /// Integrates `(f, f')` from `γ` down to `0` with `mult` times the base step
    /// count; returns `(f(0), f'(0))` scaled by `e^{log}`.
    fn shoot(&self, v: &Potential, lambda: Complex64, mult: usize) -> Result<(Complex64, Complex64, f64)> {
        let gamma = v.gamma();
        let start = airy_ai_scaled(Complex64::new(gamma, 0.0) - lambda)?;
        let mut f = start.ai;
        let mut fp = start.ai_prime;
        let mut log = start.log_scale;
        let breaks = v.breaks();
        for w in breaks.windows(2).rev() {
            let (lo, hi) = (w[0], w[1]);
            let n = self.step_count(hi - lo, gamma, lambda) * mult;
            let h = -(hi - lo) / n as f64;
            // Nodes are evaluated strictly inside each panel so that one-sided
            // limits of piecewise potentials are used.
            for k in 0..n {
                let x0 = hi + h * k as f64;
                let x1 = x0 + h * (0.5 - SQRT3_6);
                let x2 = x0 + h * (0.5 + SQRT3_6);
                let q1 = Complex64::new(x1 + v.eval(x1), 0.0) - lambda;
                let q2 = Complex64::new(x2 + v.eval(x2), 0.0) - lambda;
                let alpha = Complex64::new(SQRT3_12 * h * h * (q1.re - q2.re), 0.0);
                let c = (q1 + q2) * (0.5 * h);
                let (ch, sc) = cosh_sinhc(alpha * alpha + c * h);
                // exp(Ω) with Ω = [[α, h], [c, −α]].
                let nf = ch * f + sc * (alpha * f + fp * h);
                let nfp = ch * fp + sc * (c * f - alpha * fp);
                let m = nf.norm().max(nfp.norm());
                if !(m.is_finite() && m > 0.0) {
                    return Err(StarkError::NonConvergence(format!(
                        "Magnus propagation broke down at x = {x0}, λ = {lambda}"
                    )));
                }
                f = nf / m;
                fp = nfp / m;
                log += m.ln();
            }
        }
        Ok((f, fp, log))
    }

    fn log_d_once(&self, v: &Potential, lambda: Complex64, side: Side, mult: usize) -> Result<Complex64> {
        let (f, fp, log) = self.shoot(v, lambda, mult)?;
        let z = -lambda;
        let u = airy_rotated_scaled(z, side == Side::Minus)?;
        let w = u.ai * fp - u.ai_prime * f;
        if w == Complex64::new(0.0, 0.0) {
            return Err(StarkError::Domain(format!("D vanishes to working precision at {lambda}")));
        }
        // W(ũ, u₊) = −(ũ'u₊ − ũu₊') = −C.
        let w0 = -side.half_plane().wronskian();
        Ok(w.ln() + log + u.log_scale - w0.ln())
    }

    /// `log D(λ)` (principal imaginary part) for the given side, any `λ ∈ ℂ`.
    ///
    /// Two Magnus sweeps (`n` and `2n` steps) are combined by Richardson
    /// extrapolation on the linear-scale ratio when it is representable.
    pub fn log_d(&self, v: &Potential, lambda: Complex64, side: Side) -> Result<Complex64> {
        if v.is_zero() {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let a = self.log_d_once(v, lambda, side, 1)?;
        let b = self.log_d_once(v, lambda, side, 2)?;
        // Fourth order: (16 b − a)/15, applied to D/D_b = exp(a − b) (close to 1).
        let ratio = (a - b).exp();
        let corr = (16.0 - ratio) / 15.0;
        let out = b + corr.ln();
        Ok(Complex64::new(out.re, wrap(out.im)))
    }

    /// `D(λ)` in linear scale.
    pub fn d(&self, v: &Potential, lambda: Complex64, side: Side) -> Result<Complex64> {
        let l = self.log_d(v, lambda, side)?;
        if l.re > 700.0 {
            return Err(StarkError::Overflow(format!("|D| ~ e^{:.0}", l.re)));
        }
        Ok(l.exp())
    }

    /// `D'(λ)/D(λ)` by the four-point Cauchy formula on a circle of radius `r`.
    pub fn log_derivative(&self, v: &Potential, lambda: Complex64, side: Side, r: f64) -> Result<Complex64> {
        let l0 = self.log_d(v, lambda, side)?;
        let mut acc = Complex64::new(0.0, 0.0);
        let dirs = [Complex64::new(1.0, 0.0), Complex64::i(), Complex64::new(-1.0, 0.0), -Complex64::i()];
        for d in dirs {
            let l = self.log_d(v, lambda + d * r, side)?;
            let mut dl = l - l0;
            dl.im = wrap(dl.im);
            acc += dl * d.conj();
        }
        Ok(acc / (4.0 * r))
    }
}

/// Maps an angle to `(−π, π]`.
pub fn wrap(a: f64) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut b = a % two_pi;
    if b > std::f64::consts::PI {
        b -= two_pi;
    } else if b <= -std::f64::consts::PI {
        b += two_pi;
    }
    b
}
