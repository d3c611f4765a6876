//! Free resolvent kernel `R₀(x, y, λ)` of `H₀ = −d²/dx² + x`.
//!
//! Production path: the two-solution construction
//! `R₀(x, y, λ) = u₋(x_<) u₊(x_>) / C`, with `u₊(x) = Ai(x − λ)` (recessive at
//! `+∞`), `u₋(x) = Ai(ω(x − λ))` (outgoing at `−∞` for `Im λ > 0`; the lower
//! half-plane uses `ω̄`), and the constant Wronskian
//! `C = u₋'u₊ − u₋u₊' = e^{∓iπ/6}/(2π)`.
//!
//! Oracles: the time-integral representation
//! `R₀ = e^{iπ/4}(4π)^{-1/2} ∫₀^∞ exp(i[(x−y)²/(4t) − t(x+y)/2 − t³/12 + tλ]) t^{-1/2} dt`
//! and the trace identity
//! `Tr Y₀(λ) = e^{iπ/4} 2^{-1/2} ∫₀^∞ e^{itλ − it³/12} V̂(t) t^{-1/2} dt`,
//! both integrated along deformed contours where the integrands decay.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::airy::{airy_ai_scaled, airy_rotated_scaled, ScaledAiry};
use crate::error::{Result, StarkError};
use crate::potential::Potential;
use crate::quadrature::integrate_adaptive;

/// Which boundary value / half-plane branch of the resolvent is meant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum HalfPlane {
    Upper,
    Lower,
}

impl HalfPlane {
    /// The half-plane containing `λ`, if `λ` is not real.
    pub fn of(lambda: Complex64) -> Option<Self> {
        if lambda.im > 0.0 {
            Some(HalfPlane::Upper)
        } else if lambda.im < 0.0 {
            Some(HalfPlane::Lower)
        } else {
            None
        }
    }

    /// Checks that `λ` lies in the closed half-plane.
    pub fn check(self, lambda: Complex64) -> Result<()> {
        let ok = match self {
            HalfPlane::Upper => lambda.im >= 0.0,
            HalfPlane::Lower => lambda.im <= 0.0,
        };
        if ok && lambda.re.is_finite() && lambda.im.is_finite() {
            Ok(())
        } else {
            Err(StarkError::Domain(format!("λ = {lambda} is not in the {self:?} half-plane")))
        }
    }

    /// `u₋'u₊ − u₋u₊'` for this branch.
    pub fn wronskian(self) -> Complex64 {
        let s = match self {
            HalfPlane::Upper => -1.0,
            HalfPlane::Lower => 1.0,
        };
        Complex64::from_polar(1.0 / (2.0 * PI), s * PI / 6.0)
    }

    pub fn conj(self) -> Self {
        match self {
            HalfPlane::Upper => HalfPlane::Lower,
            HalfPlane::Lower => HalfPlane::Upper,
        }
    }
}

/// How a kernel value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BranchNote {
    TwoSolution,
    TimeIntegral,
}

/// A value of `R₀(x, y, λ)`.
#[derive(Debug, Clone, Copy)]
pub struct GreenKernelEval {
    pub value: Complex64,
    pub half_plane: HalfPlane,
    pub branch_note: BranchNote,
}

/// The two free solutions at one point, in scaled form; `ai_prime` is `d/dx`.
#[derive(Debug, Clone, Copy)]
pub struct FreePair {
    /// `u₊(x) = Ai(x − λ)`.
    pub plus: ScaledAiry,
    /// `u₋(x) = Ai(ω(x − λ))` (or `ω̄` in the lower half-plane).
    pub minus: ScaledAiry,
}

/// Evaluates `u₊`, `u₋` and their `x`-derivatives at `x`. Since both depend on
/// `x − λ` only, `∂_λ u = −∂_x u`.
pub fn free_pair(x: f64, lambda: Complex64, half: HalfPlane) -> Result<FreePair> {
    let z = Complex64::new(x, 0.0) - lambda;
    Ok(FreePair {
        plus: airy_ai_scaled(z)?,
        minus: airy_rotated_scaled(z, half == HalfPlane::Lower)?,
    })
}

/// `R₀` assembled from precomputed free pairs at `x ≤ y`.
pub(crate) fn kernel_from_pairs(left: &FreePair, right: &FreePair, c: Complex64) -> Result<Complex64> {
    let s = left.minus.log_scale + right.plus.log_scale;
    if s > 700.0 {
        return Err(StarkError::Overflow(format!(
            "kernel magnitude ~ e^{s:.0}; use log-scaled assembly"
        )));
    }
    Ok(left.minus.ai * right.plus.ai * s.exp() / c)
}

/// `∂_λ R₀` assembled from precomputed free pairs at `x ≤ y`.
pub(crate) fn kernel_dlambda_from_pairs(
    left: &FreePair,
    right: &FreePair,
    c: Complex64,
) -> Result<Complex64> {
    let s = left.minus.log_scale + right.plus.log_scale;
    if s > 700.0 {
        return Err(StarkError::Overflow(format!("kernel derivative ~ e^{s:.0}")));
    }
    let v = -(left.minus.ai_prime * right.plus.ai + left.minus.ai * right.plus.ai_prime);
    Ok(v * s.exp() / c)
}

/// The free resolvent kernel by the two-solution formula.
///
/// Real `λ` is allowed and gives the boundary value `λ ± i0` of the requested branch.
pub fn r0_kernel(x: f64, y: f64, lambda: Complex64, half: HalfPlane) -> Result<GreenKernelEval> {
    half.check(lambda)?;
    let (a, b) = if x <= y { (x, y) } else { (y, x) };
    let left = free_pair(a, lambda, half)?;
    let right = free_pair(b, lambda, half)?;
    let value = kernel_from_pairs(&left, &right, half.wronskian())?;
    Ok(GreenKernelEval { value, half_plane: half, branch_note: BranchNote::TwoSolution })
}

/// Smallest `s` with `decay·s⁶ − growth·s² ≥ margin`.
fn cutoff(decay: f64, growth: f64, margin: f64) -> f64 {
    let mut s: f64 = 0.5;
    while decay * s.powi(6) - growth.max(0.0) * s * s < margin {
        s *= 1.05;
    }
    s
}

/// Oracle: the time-integral representation of `R₀` for `Im λ > 0`, integrated
/// along the ray `t = s² e^{-iπ/6}`, on which `e^{-it³/12}` decays like `e^{-s⁶/12}`.
pub fn r0_time_integral(x: f64, y: f64, lambda: Complex64) -> Result<Complex64> {
    if !(lambda.im > 0.0) {
        return Err(StarkError::NonConvergence(format!(
            "time integral diverges for Im λ = {} ≤ 0",
            lambda.im
        )));
    }
    let theta = -PI / 6.0;
    let e = Complex64::from_polar(1.0, theta);
    let d2 = (x - y) * (x - y);
    let sum = 0.5 * (x + y);
    let i = Complex64::i();
    let integrand = |s: f64| {
        if s == 0.0 {
            return if d2 == 0.0 { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) };
        }
        let t = e * (s * s);
        let phase = d2 / (4.0 * t) - t * sum - t * t * t / 12.0 + t * lambda;
        (i * phase).exp()
    };
    let growth = -(e * lambda).im + 0.5 * sum;
    let smax = cutoff(1.0 / 12.0, growth, 45.0);
    let out = integrate_adaptive(integrand, 0.0, smax, 1e-14, 40)?;
    let pref = Complex64::from_polar(1.0, PI / 4.0) / (4.0 * PI).sqrt();
    Ok(pref * Complex64::from_polar(2.0, theta / 2.0) * out.value)
}

/// One straight piece `t(u) = a + (b − a)u`, `u ∈ [0, 1]`, of an integration contour.
fn segment_integral(
    f: &impl Fn(Complex64) -> Complex64,
    a: Complex64,
    b: Complex64,
    tol: f64,
) -> Result<Complex64> {
    let d = b - a;
    Ok(integrate_adaptive(|u| f(a + d * u) * d, 0.0, 1.0, tol, 40)?.value)
}

/// Oracle for `Tr Y₀(λ) = ∫ V(x) R₀(x, x, λ) dx` through the Fourier-side identity.
///
/// The contour is chosen from `λ`: the real axis when `Im λ` is large, the ray
/// `arg t = −π/6` for moderate `λ`, and for `Re λ` large with small `Im λ` a
/// polyline `0 → ib → t* + ib → t* + ib + ρe^{−iπ/4}` through the saddle
/// `t* = 2√(Re λ)` of the phase `tλ − t³/12`.
pub fn trace_y0_oscillatory(v: &Potential, lambda: Complex64) -> Result<Complex64> {
    if lambda.im < 0.0 {
        return Err(StarkError::Domain(format!("Im λ = {} < 0", lambda.im)));
    }
    if v.is_zero() {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let i = Complex64::i();
    let vhat_err = std::cell::Cell::new(None);
    let g = |t: Complex64| -> Complex64 {
        match v.fourier_hat_complex(t) {
            Ok(h) => (i * (t * lambda - t * t * t / 12.0)).exp() * h,
            Err(e) => {
                vhat_err.set(Some(e.to_string()));
                Complex64::new(0.0, 0.0)
            }
        }
    };
    let pref = Complex64::from_polar(1.0 / 2f64.sqrt(), PI / 4.0);
    let tol = 1e-14;
    let value = if lambda.im >= 10.0 {
        // Real axis, t = s²; e^{itλ} decays like e^{-s² Im λ}.
        let smax = (60.0 / lambda.im).sqrt();
        2.0 * integrate_adaptive(|s| g(Complex64::new(s * s, 0.0)), 0.0, smax, tol, 40)?.value
    } else if lambda.re <= 4.0 {
        let theta = -PI / 6.0;
        let e = Complex64::from_polar(1.0, theta);
        let growth = -(e * lambda).im + 0.5 * v.gamma();
        let smax = cutoff(1.0 / 12.0, growth, 45.0);
        Complex64::from_polar(2.0, theta / 2.0)
            * integrate_adaptive(|s| g(e * (s * s)), 0.0, smax, tol, 40)?.value
    } else {
        let b: f64 = 1.0;
        let tstar = 2.0 * lambda.re.sqrt();
        // 0 → ib with t = i s², so dt t^{-1/2} = 2 i^{1/2} ds.
        let first = Complex64::from_polar(2.0, PI / 4.0)
            * integrate_adaptive(|s| g(i * (s * s)), 0.0, b.sqrt(), tol, 40)?.value;
        let p1 = Complex64::new(0.0, b);
        let p2 = Complex64::new(tstar, b);
        let rho = 2.0 * (60.0 / tstar.max(1.0)).sqrt() + 12.0f64.cbrt() * 4.0;
        let p3 = p2 + Complex64::from_polar(rho, -PI / 4.0);
        let h = |t: Complex64| g(t) / t.sqrt();
        let mut horizontal = Complex64::new(0.0, 0.0);
        // Split the horizontal leg so that every panel sees few oscillations.
        let pieces = (tstar * lambda.re.abs().max(1.0) / 200.0).ceil().clamp(1.0, 4000.0) as usize;
        for k in 0..pieces {
            let a = p1 + (p2 - p1) * (k as f64 / pieces as f64);
            let c = p1 + (p2 - p1) * ((k + 1) as f64 / pieces as f64);
            horizontal += segment_integral(&h, a, c, tol / pieces as f64)?;
        }
        first + horizontal + segment_integral(&h, p2, p3, tol)?
    };
    if let Some(e) = vhat_err.take() {
        return Err(StarkError::NonConvergence(format!("V̂ evaluation failed: {e}")));
    }
    Ok(pref * value)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn wronskian_constant_matches_airy_values() {
        for half in [HalfPlane::Upper, HalfPlane::Lower] {
            for (x, l) in [(0.0, c(0.0, 0.0)), (0.3, c(2.0, 1.0)), (1.0, c(-3.0, 0.5))] {
                let p = free_pair(x, l, half).unwrap();
                let s = (p.plus.log_scale + p.minus.log_scale).exp();
                let w = (p.minus.ai_prime * p.plus.ai - p.minus.ai * p.plus.ai_prime) * s;
                assert!((w - half.wronskian()).norm() < 1e-14, "{half:?} {x} {l}: {w}");
            }
        }
    }

    #[test]
    fn kernel_matches_time_integral() {
        for (x, y, l) in [(0.2, 0.8, c(1.0, 2.0)), (0.5, 0.5, c(2.0, 1.0)), (0.9, 0.1, c(-1.0, 0.5))] {
            let k = r0_kernel(x, y, l, HalfPlane::Upper).unwrap().value;
            let o = r0_time_integral(x, y, l).unwrap();
            assert!((k - o).norm() < 1e-10, "({x},{y},{l}): {k} vs {o}");
        }
    }

    #[test]
    fn half_plane_mismatch_is_rejected() {
        assert!(r0_kernel(0.1, 0.2, c(1.0, 1.0), HalfPlane::Lower).is_err());
        assert!(r0_time_integral(0.1, 0.2, c(1.0, 0.0)).is_err());
    }
}
