//! The functional `Ψ(λ)`, the Born term `𝒜₀`, the correction `𝒜₁`, the S-matrix
//! `S(λ) = 1 − 2πi(𝒜₀ − 𝒜₁)` and the scattering phase `φ_sc = (1/π) arg D₊(λ + i0)`.
//!
//! `Ψ(λ)` is represented on the quadrature nodes by
//! `ψᵢ = Ai(xᵢ − λ)|V|^{1/2}(xᵢ)√wᵢ` (no `1/√π`): with the free kernel normalised by
//! `R₀(λ+i0) − R₀(λ−i0) = 2πi Ai(x−λ)Ai(y−λ)` this is the normalisation for which the
//! jump relation `Y₀⁺ − Y₀⁻ = 2πi Ψ*Ψ V_S` and `S = D₋/D₊` hold exactly on the nodes.

use num_complex::Complex64;
use serde::Serialize;

use crate::airy::airy_ai_scaled;
use crate::error::{Result, StarkError};
use crate::fredholm::{build_y0, node_weights, y_full_apply, Backend, Side};
use crate::green::HalfPlane;
use crate::jost::wrap;
use crate::potential::{split_sign, Potential};
use crate::quadrature::{integrate_panels, QuadratureRule};

const TWO_PI_I: Complex64 = Complex64::new(0.0, 2.0 * std::f64::consts::PI);

/// `Ψ(λ)` on the nodes of a rule, in scaled form: the true components are
/// `e^{log_scale}·components`.
#[derive(Debug, Clone)]
pub struct PsiVector {
    pub lambda: Complex64,
    pub components: Vec<Complex64>,
    pub log_scale: f64,
    /// `Σ ψᵢ²` without conjugation (the analytic continuation of `‖Ψ‖²`), unscaled.
    pub norm_sq: Complex64,
}

impl PsiVector {
    /// Components with the scale applied.
    pub fn unscaled(&self) -> Result<Vec<Complex64>> {
        if self.log_scale > 700.0 {
            return Err(StarkError::Overflow(format!("|Ψ| ~ e^{:.0}", self.log_scale)));
        }
        let s = self.log_scale.exp();
        Ok(self.components.iter().map(|c| c * s).collect())
    }

    /// `Σ|ψᵢ|²`, the Hilbert-space norm squared, unscaled.
    pub fn hilbert_norm_sq(&self) -> f64 {
        self.components.iter().map(|c| c.norm_sqr()).sum::<f64>() * (2.0 * self.log_scale).exp()
    }
}

/// `Ψ(λ)` for any finite `λ`.
pub fn psi_vector(v: &Potential, lambda: Complex64, rule: &QuadratureRule) -> Result<PsiVector> {
    let (abs_w, _) = node_weights(v, rule);
    let vals = rule
        .nodes
        .iter()
        .map(|&x| airy_ai_scaled(Complex64::new(x, 0.0) - lambda))
        .collect::<Result<Vec<_>>>()?;
    let log_scale = vals.iter().map(|a| a.log_scale).fold(f64::NEG_INFINITY, f64::max);
    let components: Vec<Complex64> = vals
        .iter()
        .zip(&abs_w)
        .map(|(a, &w)| a.ai * ((a.log_scale - log_scale).exp() * w))
        .collect();
    let raw: Complex64 = components.iter().map(|c| c * c).sum();
    let norm_sq = if 2.0 * log_scale > 700.0 {
        Complex64::new(f64::INFINITY, 0.0)
    } else {
        raw * (2.0 * log_scale).exp()
    };
    Ok(PsiVector { lambda, components, log_scale, norm_sq })
}

/// `𝒜₀(λ) = ∫ Ai(x − λ)² V(x) dx` on the given rule (entire in `λ`).
pub fn born_a0(v: &Potential, lambda: Complex64, rule: &QuadratureRule) -> Result<Complex64> {
    let mut acc = Complex64::new(0.0, 0.0);
    let mut scale = f64::NEG_INFINITY;
    let mut terms = Vec::with_capacity(rule.len());
    for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
        let a = airy_ai_scaled(Complex64::new(x, 0.0) - lambda)?;
        scale = scale.max(2.0 * a.log_scale);
        terms.push((a.ai * a.ai * (w * v.eval(x)), 2.0 * a.log_scale));
    }
    for (t, s) in terms {
        acc += t * (s - scale).exp();
    }
    if scale > 700.0 {
        return Err(StarkError::Overflow(format!("|𝒜₀| ~ e^{scale:.0}")));
    }
    Ok(acc * scale.exp())
}

/// `𝒜₀(λ)` by adaptive quadrature with absolute tolerance `tol` relative to the
/// magnitude `e^{2 log|Ai(−λ)|}`; independent of any fixed rule.
pub fn born_a0_adaptive(v: &Potential, lambda: Complex64, tol: f64) -> Result<Complex64> {
    let (value, s0) = born_a0_scaled(v, lambda, tol)?;
    if s0 > 700.0 {
        return Err(StarkError::Overflow(format!("|𝒜₀| ~ e^{s0:.0}")));
    }
    Ok(value * s0.exp())
}

/// `log 𝒜₀(λ)` by adaptive quadrature; usable far beyond the range of `f64`.
pub fn born_a0_log(v: &Potential, lambda: Complex64, tol: f64) -> Result<Complex64> {
    let (value, s0) = born_a0_scaled(v, lambda, tol)?;
    if value == Complex64::new(0.0, 0.0) {
        return Err(StarkError::Domain(format!("𝒜₀({lambda}) vanishes")));
    }
    Ok(value.ln() + s0)
}

/// `(a, s)` with `𝒜₀ = a·e^{s}`.
fn born_a0_scaled(v: &Potential, lambda: Complex64, tol: f64) -> Result<(Complex64, f64)> {
    let s0 = 2.0 * airy_ai_scaled(-lambda)?.log_scale;
    let f = |x: f64| -> Complex64 {
        match airy_ai_scaled(Complex64::new(x, 0.0) - lambda) {
            Ok(a) => a.ai * a.ai * ((2.0 * a.log_scale - s0).exp() * v.eval(x)),
            Err(_) => Complex64::new(f64::NAN, 0.0),
        }
    };
    let breaks = v.breaks();
    let pieces = (lambda.norm().sqrt() * v.gamma()).ceil().max(1.0) as usize;
    let mut fine = Vec::new();
    for w in breaks.windows(2) {
        for k in 0..pieces {
            fine.push(w[0] + (w[1] - w[0]) * k as f64 / pieces as f64);
        }
    }
    fine.push(v.gamma());
    Ok((integrate_panels(&f, &fine, tol, 30)?.value, s0))
}

/// `𝒜₁(λ) = Ψ(λ) V_S Y(λ + i0) Ψ*(λ)`, for `λ` in the closed upper half-plane.
pub fn amplitude_a1(v: &Potential, lambda: Complex64, rule: &QuadratureRule) -> Result<Complex64> {
    if v.is_zero() {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let psi = psi_vector(v, lambda, rule)?;
    let y_psi = y_full_apply(v, lambda, rule, HalfPlane::Upper, &psi.components)?;
    bilinear_signed(v, rule, &psi, &y_psi)
}

/// `Σᵢ ψᵢ V_S(xᵢ) (Yψ)ᵢ`, unscaled.
fn bilinear_signed(v: &Potential, rule: &QuadratureRule, psi: &PsiVector, y_psi: &[Complex64]) -> Result<Complex64> {
    let s = split_sign(v);
    let mut acc = Complex64::new(0.0, 0.0);
    for (i, (p, yp)) in psi.components.iter().zip(y_psi).enumerate() {
        acc += p * s.sign(rule.nodes[i]) * yp;
    }
    if 2.0 * psi.log_scale > 700.0 {
        return Err(StarkError::Overflow(format!("|𝒜₁| ~ e^{:.0}", 2.0 * psi.log_scale)));
    }
    Ok(acc * (2.0 * psi.log_scale).exp())
}

/// One evaluation of the stationary representation.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ScatteringSample {
    pub lambda: Complex64,
    pub a0: Complex64,
    pub a1: Complex64,
    pub s: Complex64,
    /// `−arg S/(2π)` reduced to `(−1/2, 1/2]`; the unwrapped phase comes from
    /// [`scattering_phase`].
    pub phase: Option<f64>,
}

/// `S(λ) = 1 − 2πi(𝒜₀ − 𝒜₁)` for `λ` in the closed upper half-plane, with `𝒜₀`
/// on the same rule so that `S = D₋/D₊` holds exactly at the discrete level.
pub fn s_matrix(v: &Potential, lambda: Complex64, rule: &QuadratureRule) -> Result<ScatteringSample> {
    HalfPlane::Upper.check(lambda)?;
    let a0 = born_a0(v, lambda, rule)?;
    let a1 = amplitude_a1(v, lambda, rule)?;
    let s = 1.0 - TWO_PI_I * (a0 - a1);
    let phase = (lambda.im == 0.0).then(|| -s.arg() / (2.0 * std::f64::consts::PI));
    Ok(ScatteringSample { lambda, a0, a1, s, phase })
}

/// `S(λ) = D₋(λ)/D₊(λ)` evaluated through determinants (log-scaled, any `λ`).
pub fn s_from_determinants(v: &Potential, lambda: Complex64, backend: &Backend) -> Result<Complex64> {
    let l = log_s(v, lambda, backend)?;
    if l.re > 700.0 {
        return Err(StarkError::Overflow(format!("|S| ~ e^{:.0}", l.re)));
    }
    Ok(l.exp())
}

/// `log S(λ) = log D₋(λ) − log D₊(λ)`.
pub fn log_s(v: &Potential, lambda: Complex64, backend: &Backend) -> Result<Complex64> {
    let m = backend.log_d(v, lambda, Side::Minus)?;
    let p = backend.log_d(v, lambda, Side::Plus)?;
    let d = m - p;
    Ok(Complex64::new(d.re, wrap(d.im)))
}

/// `max |(Y₀⁺ − Y₀⁻ − 2πi Ψ*ΨV_S)ᵢⱼ|` at a real `λ`.
pub fn jump_residual(v: &Potential, lambda: f64, rule: &QuadratureRule) -> Result<f64> {
    let l = Complex64::new(lambda, 0.0);
    let up = build_y0(v, l, rule, HalfPlane::Upper)?;
    let lo = build_y0(v, l, rule, HalfPlane::Lower)?;
    let psi = psi_vector(v, l, rule)?.unscaled()?;
    let s = split_sign(v);
    let n = rule.len();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let jump = TWO_PI_I * psi[i] * psi[j] * s.sign(rule.nodes[j]);
            worst = worst.max((up.entries[(i, j)] - lo.entries[(i, j)] - jump).norm());
        }
    }
    Ok(worst)
}

/// Unwrapped scattering phase on an increasing real grid.
#[derive(Debug, Clone, Serialize)]
pub struct PhaseCurve {
    pub lambdas: Vec<f64>,
    pub phase: Vec<f64>,
}

/// `φ_sc(λ) = (1/π) arg D₊(λ + i0)` on an increasing grid, unwrapped from the right
/// end where the principal branch is pinned by the decay `φ_sc → 0`.
pub fn scattering_phase(v: &Potential, lambdas: &[f64], backend: &Backend) -> Result<PhaseCurve> {
    if lambdas.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(StarkError::MalformedInput("phase grid must be strictly increasing".into()));
    }
    let args = crate::parallel::map(lambdas, |&l| {
        backend.log_d(v, Complex64::new(l, 0.0), Side::Plus).map(|d| d.im)
    })?;
    let phase = unwrap_from_right(&args)?;
    let inv_pi = 1.0 / std::f64::consts::PI;
    Ok(PhaseCurve { lambdas: lambdas.to_vec(), phase: phase.into_iter().map(|a| a * inv_pi).collect() })
}

/// Unwraps principal arguments, keeping the last value and requiring every
/// increment to stay below `π/2`.
pub fn unwrap_from_right(args: &[f64]) -> Result<Vec<f64>> {
    let mut out = args.to_vec();
    for k in (0..out.len().saturating_sub(1)).rev() {
        let step = wrap(args[k] - args[k + 1]);
        if step.abs() >= std::f64::consts::FRAC_PI_2 {
            return Err(StarkError::BranchJump(format!(
                "phase increment {step:.3} at grid index {k}; refine the grid"
            )));
        }
        out[k] = out[k + 1] + step;
    }
    Ok(out)
}

/// The two trace integrals of `log D₊(λ + i0)/√(λ + i0)` over `[−R, R]`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TraceIntegrals {
    pub radius: f64,
    /// `(2/π)∫ Re[log D₊/√λ] dλ`; tends to `V₀`.
    pub re_integral: f64,
    /// `(2/π)` times the symmetric integral of the imaginary part; tends to 0.
    pub im_integral: f64,
    pub v0: f64,
    pub quadrature_error: f64,
}

/// Evaluates [`TraceIntegrals`] with the substitution `λ = ±s²`, which removes the
/// `λ^{−1/2}` endpoint singularity and pairs `±λ` so the `1/λ` tails of the
/// imaginary part cancel in the symmetric integral.
pub fn trace_integrals(v: &Potential, radius: f64, backend: &Backend, tol: f64) -> Result<TraceIntegrals> {
    let f = |s: f64| -> Complex64 {
        let plus = backend.log_d(v, Complex64::new(s * s, 0.0), Side::Plus);
        let minus = backend.log_d(v, Complex64::new(-s * s, 0.0), Side::Plus);
        match (plus, minus) {
            (Ok(p), Ok(m)) => 2.0 * (p - Complex64::i() * m),
            _ => Complex64::new(f64::NAN, 0.0),
        }
    };
    let top = radius.sqrt();
    let panels = (top.ceil() as usize).max(4) * 4;
    let breaks: Vec<f64> = (0..=panels).map(|k| top * k as f64 / panels as f64).collect();
    let res = integrate_panels(&f, &breaks, tol, 24)?;
    let k = 2.0 / std::f64::consts::PI;
    Ok(TraceIntegrals {
        radius,
        re_integral: k * res.value.re,
        im_integral: k * res.value.im,
        v0: v.v0_integral(),
        quadrature_error: k * res.error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fredholm::{build_rule, det_side};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn s_matches_determinant_ratio_on_the_real_axis() {
        let v = Potential::canonical();
        let r = build_rule(48, 1.0).unwrap();
        for &l in &[-3.0, 0.5, 4.0] {
            let s = s_matrix(&v, c(l, 0.0), &r).unwrap().s;
            let dp = det_side(&v, c(l, 0.0), &r, Side::Plus).unwrap().d_value;
            let dm = det_side(&v, c(l, 0.0), &r, Side::Minus).unwrap().d_value;
            assert!((s - dm / dp).norm() < 1e-12, "{s} vs {}", dm / dp);
            assert!((s.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn jump_relation_holds_on_nodes() {
        let v = Potential::canonical();
        let r = build_rule(32, 1.0).unwrap();
        assert!(jump_residual(&v, 1.3, &r).unwrap() < 1e-12);
    }

    #[test]
    fn born_rule_and_adaptive_agree() {
        let v = Potential::canonical();
        let r = build_rule(64, 1.0).unwrap();
        let l = c(3.0, 2.0);
        let a = born_a0(&v, l, &r).unwrap();
        let b = born_a0_adaptive(&v, l, 1e-13).unwrap();
        assert!((a - b).norm() < 1e-12 * b.norm().max(1.0), "{a} vs {b}");
    }
}
