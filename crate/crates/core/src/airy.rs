//! Complex Airy function `Ai` and its derivative on the whole plane.
//!
//! Three evaluation paths are stitched together:
//!
//! * `|z| ≤ ρ₀` ([`SERIES_RADIUS`]): the two Maclaurin series solving `w'' = zw`,
//!   summed in double-double arithmetic so that the cancellation between the
//!   two series (which grows like `exp(|ζ|)`, `ζ = (2/3) z^{3/2}`) does not eat
//!   the double-precision result;
//! * `|z| > ρ₀`, `|arg z| ≤ 2π/3`: the classical asymptotic expansion
//!   `Ai(z) ~ e^{-ζ} / (2√π z^{1/4}) Σ (-1)^k u_k ζ^{-k}`, truncated at its
//!   smallest term;
//! * `|z| > ρ₀`, `|arg z| > 2π/3`: the connection formula
//!   `Ai(z) = -ω Ai(ωz) - ω² Ai(ω²z)`, `ω = e^{2πi/3}`, whose two rotated
//!   arguments both lie in the sector where the expansion is accurate.
//!
//! Values are produced internally in scaled form `Ai(z) = e^{s}·a` with a real
//! exponent `s`, which keeps the growth regime representable; the plain
//! [`airy_ai`] refuses arguments whose values overflow a double.

use std::f64::consts::PI;

use num_complex::{Complex, Complex64};
use twofloat::TwoFloat;

use crate::error::{Result, StarkError};

type Cdd = Complex<TwoFloat>;

/// Series/asymptotic crossover radius ρ₀.
pub const SERIES_RADIUS: f64 = 8.0;
/// Largest supported `|z|`.
pub const MAX_ARGUMENT: f64 = 2.0e4;

/// `Ai(0)` as a double-double pair.
const AI_ZERO: (f64, f64) = (0.3550280538878172, 2.05233632436212e-17);
/// `-Ai'(0)` as a double-double pair.
const NEG_AIP_ZERO: (f64, f64) = (0.2588194037928068, -2.522243111610832e-17);
/// `1/(2√π)`.
const HALF_INV_SQRT_PI: f64 = 0.28209479177387814;
/// Largest exponent for which `e^s` stays finite.
const EXP_MAX: f64 = 709.0;

/// `ω = e^{2πi/3}`.
pub fn omega() -> Complex64 {
    Complex64::new(-0.5, 0.75f64.sqrt())
}

/// Which evaluation path produced a value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AiryRegime {
    Series,
    Asymptotic,
    Connection,
}

/// `Ai` and `Ai'` at one point, with an absolute error estimate.
#[derive(Debug, Clone, Copy)]
pub struct AiryValue {
    pub ai: Complex64,
    pub ai_prime: Complex64,
    pub regime: AiryRegime,
    pub est_abs_err: f64,
}

/// Scaled Airy pair: `Ai(z) = e^{log_scale}·ai`, `Ai'(z) = e^{log_scale}·ai_prime`.
///
/// `est_rel_err` is the error estimate relative to the scale `e^{log_scale}`.
#[derive(Debug, Clone, Copy)]
pub struct ScaledAiry {
    pub log_scale: f64,
    pub ai: Complex64,
    pub ai_prime: Complex64,
    pub regime: AiryRegime,
    pub est_rel_err: f64,
}

impl ScaledAiry {
    /// Converts to linear scale, failing when the values overflow.
    pub fn unscaled(&self) -> Result<AiryValue> {
        if self.log_scale > EXP_MAX {
            return Err(StarkError::Overflow(format!(
                "|Ai| ~ e^{:.1}; use the log-scaled variant",
                self.log_scale
            )));
        }
        let f = self.log_scale.exp();
        Ok(AiryValue {
            ai: self.ai * f,
            ai_prime: self.ai_prime * f,
            regime: self.regime,
            est_abs_err: self.est_rel_err * f,
        })
    }
}

/// Principal `(2/3) z^{3/2}`.
pub fn zeta(z: Complex64) -> Complex64 {
    z * z.sqrt() * (2.0 / 3.0)
}

/// Evaluates `Ai(z)`, `Ai'(z)` in scaled form. Valid for every `|z| ≤ MAX_ARGUMENT`.
pub fn airy_ai_scaled(z: Complex64) -> Result<ScaledAiry> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(StarkError::Domain(format!("non-finite Airy argument {z}")));
    }
    let r = z.norm();
    if r > MAX_ARGUMENT {
        return Err(StarkError::Domain(format!("|z| = {r:e} exceeds the supported range")));
    }
    let mut out = if r <= SERIES_RADIUS {
        series(z)
    } else if z.arg().abs() <= 2.0 * PI / 3.0 {
        asymptotic(z)
    } else {
        connection(z)
    };
    if z.im == 0.0 {
        out.ai.im = 0.0;
        out.ai_prime.im = 0.0;
    }
    Ok(out)
}

/// Evaluates `Ai` by one named path regardless of `z`, for cross-checking the
/// paths against each other (e.g. on the crossover circle `|z| = ρ₀`).
///
/// The asymptotic path needs `|arg z| ≤ 2π/3`, the connection path
/// `|arg z| ≥ 2π/3`, both with `|z|` not small; the series path needs moderate `|z|`.
pub fn airy_ai_via(z: Complex64, regime: AiryRegime) -> Result<ScaledAiry> {
    if !(z.re.is_finite() && z.im.is_finite()) || z.norm() > MAX_ARGUMENT {
        return Err(StarkError::Domain(format!("Airy argument {z} outside the supported range")));
    }
    match regime {
        AiryRegime::Series if z.norm() <= 2.0 * SERIES_RADIUS => Ok(series(z)),
        AiryRegime::Asymptotic if z.arg().abs() <= 2.0 * PI / 3.0 && z.norm() >= 1.0 => Ok(asymptotic(z)),
        AiryRegime::Connection if z.arg().abs() >= 2.0 * PI / 3.0 && z.norm() >= 1.0 => Ok(connection(z)),
        _ => Err(StarkError::Domain(format!("{regime:?} path not applicable at z = {z}"))),
    }
}

/// `Ai(z)` and `Ai'(z)` in linear scale.
///
/// Fails with [`StarkError::Overflow`] when `Re ζ` is so negative that the value
/// does not fit in a double; use [`airy_ai_log`] or [`airy_ai_scaled`] there.
pub fn airy_ai(z: Complex64) -> Result<AiryValue> {
    airy_ai_scaled(z)?.unscaled()
}

/// `(log Ai(z), log Ai'(z))`, each up to a multiple of `2πi` in the imaginary part.
pub fn airy_ai_log(z: Complex64) -> Result<(Complex64, Complex64)> {
    let s = airy_ai_scaled(z)?;
    if s.ai == Complex64::new(0.0, 0.0) || s.ai_prime == Complex64::new(0.0, 0.0) {
        return Err(StarkError::Domain(format!("log of a vanishing Airy value at z = {z}")));
    }
    Ok((s.ai.ln() + s.log_scale, s.ai_prime.ln() + s.log_scale))
}

/// `Ai(ωz)` together with its derivative with respect to `z`, `ω Ai'(ωz)`.
pub fn airy_rotated(z: Complex64) -> Result<AiryValue> {
    airy_rotated_scaled(z, false)?.unscaled()
}

/// Scaled `Ai(ωz)` and `d/dz Ai(ωz)`; with `conjugate = true` the rotation is `ω̄ = e^{-2πi/3}`.
pub fn airy_rotated_scaled(z: Complex64, conjugate: bool) -> Result<ScaledAiry> {
    let w = if conjugate { omega().conj() } else { omega() };
    let mut s = airy_ai_scaled(w * z)?;
    s.ai_prime *= w;
    Ok(s)
}

fn dd(c: Complex64) -> Cdd {
    Cdd::new(TwoFloat::from(c.re), TwoFloat::from(c.im))
}

fn dd_const(p: (f64, f64)) -> TwoFloat {
    TwoFloat::new_add(p.0, p.1)
}

fn to_c64(c: Cdd) -> Complex64 {
    Complex64::new(f64::from(c.re), f64::from(c.im))
}

/// Divides by a double. (`TwoFloat / TwoFloat` drops the low word when both
/// operands are plain doubles, so the divisor is kept as `f64`.)
fn div_exact(c: Cdd, d: f64) -> Cdd {
    Cdd::new(c.re / d, c.im / d)
}

fn dd_abs(c: &Cdd) -> f64 {
    c.re.hi().abs() + c.im.hi().abs()
}

/// Maclaurin series `Ai = c₁f − c₂g` summed in double-double arithmetic.
fn series(z: Complex64) -> ScaledAiry {
    let zd = dd(z);
    let z3 = zd * zd * zd;
    let one = Cdd::new(TwoFloat::from(1.0), TwoFloat::from(0.0));
    // f = Σ a_k, g = Σ b_k, f' = Σ ap_k, g' = Σ bp_k.
    let mut a = one;
    let mut b = zd;
    let mut ap = div_exact(zd * zd, 2.0);
    let mut bp = one;
    let (mut f, mut g, mut fp, mut gp) = (a, b, ap, bp);
    let mut last = 0.0;
    for k in 1..200usize {
        let kf = k as f64;
        a = div_exact(a * z3, (3.0 * kf - 1.0) * (3.0 * kf));
        b = div_exact(b * z3, (3.0 * kf) * (3.0 * kf + 1.0));
        if k >= 2 {
            ap = div_exact(ap * z3, (3.0 * kf - 3.0) * (3.0 * kf - 1.0));
            fp += ap;
        }
        bp = div_exact(bp * z3, (3.0 * kf - 2.0) * (3.0 * kf));
        f += a;
        g += b;
        gp += bp;
        let term = dd_abs(&a) + dd_abs(&b) + dd_abs(&ap) + dd_abs(&bp);
        let size = dd_abs(&f) + dd_abs(&g) + dd_abs(&fp) + dd_abs(&gp);
        last = term;
        if term <= 1e-33 * size {
            break;
        }
    }
    let c1 = dd_const(AI_ZERO);
    let c2 = dd_const(NEG_AIP_ZERO);
    let ai = to_c64(f.scale(c1) - g.scale(c2));
    let aip = to_c64(fp.scale(c1) - gp.scale(c2));
    let est = last * 0.36 + 2.0 * f64::EPSILON * (ai.norm() + aip.norm());
    ScaledAiry { log_scale: 0.0, ai, ai_prime: aip, regime: AiryRegime::Series, est_rel_err: est }
}

/// Asymptotic expansion, valid (and accurate for `|z| > ρ₀`) when `|arg z| ≤ 2π/3`.
fn asymptotic(z: Complex64) -> ScaledAiry {
    let zt = zeta(z);
    let z14 = z.sqrt().sqrt();
    let inv = 1.0 / zt;
    let one = Complex64::new(1.0, 0.0);
    let (mut su, mut sv) = (one, one);
    let mut u = 1.0f64;
    let mut pow = one;
    let mut prev = f64::INFINITY;
    let mut last = 1.0;
    for k in 1..80usize {
        let kf = k as f64;
        let u_next = u * (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0)
            / ((2.0 * kf - 1.0) * 216.0 * kf);
        let v_next = -(6.0 * kf + 1.0) / (6.0 * kf - 1.0) * u_next;
        let pow_next = -pow * inv;
        let tu = pow_next * u_next;
        let mag = tu.norm();
        if mag > prev {
            break;
        }
        u = u_next;
        pow = pow_next;
        su += tu;
        sv += pow * v_next;
        prev = mag;
        last = mag;
        if mag < 1e-17 {
            break;
        }
    }
    let phase = Complex64::new(0.0, -zt.im).exp();
    let ai = su / z14 * phase * HALF_INV_SQRT_PI;
    let aip = -sv * z14 * phase * HALF_INV_SQRT_PI;
    let est = last * HALF_INV_SQRT_PI * (1.0 / z14.norm() + z14.norm())
        + 2.0 * f64::EPSILON * (ai.norm() + aip.norm());
    ScaledAiry {
        log_scale: -zt.re,
        ai,
        ai_prime: aip,
        regime: AiryRegime::Asymptotic,
        est_rel_err: est,
    }
}

/// Connection formula for `|arg z| > 2π/3`: `Ai(z) = −ω Ai(ωz) − ω² Ai(ω²z)`.
fn connection(z: Complex64) -> ScaledAiry {
    let w = omega();
    let w2 = w * w;
    // Ai'(z) = −ω² Ai'(ωz) − ω Ai'(ω²z).
    let p = asymptotic(w * z);
    let q = asymptotic(w2 * z);
    let s = p.log_scale.max(q.log_scale);
    let fp = (p.log_scale - s).exp();
    let fq = (q.log_scale - s).exp();
    let ai = -(w * p.ai * fp + w2 * q.ai * fq);
    let aip = -(w2 * p.ai_prime * fp + w * q.ai_prime * fq);
    let est = p.est_rel_err * fp + q.est_rel_err * fq;
    ScaledAiry { log_scale: s, ai, ai_prime: aip, regime: AiryRegime::Connection, est_rel_err: est }
}
