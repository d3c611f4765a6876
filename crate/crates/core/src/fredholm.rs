//! Nyström discretisation of `Y₀(λ) = |V|^{1/2} R₀(λ) V^{1/2}` and the determinants
//! `D±(λ) = det(I + Y₀(λ))`.
//!
//! The matrix uses the symmetric weighting
//! `Y₀[i, j] = √wᵢ |V|^{1/2}(xᵢ) R₀(xᵢ, xⱼ, λ) V^{1/2}(xⱼ) √wⱼ`.
//! Because `R₀` has a derivative jump on the diagonal, the discrete determinant
//! converges like `O(N⁻²)` in the number of nodes; the discrete identities
//! (conjugation symmetry, jump relation, `S = D₋/D₊`) hold exactly at every `N`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Result, StarkError};
use crate::green::{free_pair, kernel_dlambda_from_pairs, kernel_from_pairs, FreePair, HalfPlane};
pub use crate::jost::Side;
use crate::jost::JostSolver;
use crate::potential::{split_sign, Potential};
use crate::quadrature::QuadratureRule;

pub type CMatrix = DMatrix<Complex64>;

/// Default Nyström size.
pub const DEFAULT_N: usize = 128;
/// Hard cap for refinement by doubling.
pub const MAX_N: usize = 2048;

/// Gauss–Legendre rule with `n ≥ 8` nodes on `[0, γ]`.
pub fn build_rule(n: usize, gamma: f64) -> Result<QuadratureRule> {
    if n < 8 {
        return Err(StarkError::MalformedInput(format!("rule size {n} < 8")));
    }
    QuadratureRule::gauss_legendre(n, gamma)
}

/// Composite Gauss–Legendre rule on the smooth pieces of `V`.
pub fn rule_for(v: &Potential, n: usize) -> Result<QuadratureRule> {
    if n < 8 {
        return Err(StarkError::MalformedInput(format!("rule size {n} < 8")));
    }
    QuadratureRule::composite(n, &v.breaks())
}

/// The discretised sandwiched resolvent.
#[derive(Debug, Clone)]
pub struct SandwichMatrix {
    pub entries: CMatrix,
    pub lambda: Complex64,
    pub rule: QuadratureRule,
    pub half_plane: HalfPlane,
}

/// A determinant value with its logarithm.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DeterminantSample {
    pub lambda: Complex64,
    pub d_value: Complex64,
    /// `log D`; principal for single evaluations, continuous along tracked paths.
    pub log_d: Complex64,
    pub side: Side,
    pub rule_size: usize,
}

/// Left/right node weights `√wᵢ|V|^{1/2}(xᵢ)` and `V^{1/2}(xⱼ)√wⱼ`.
pub(crate) fn node_weights(v: &Potential, rule: &QuadratureRule) -> (Vec<f64>, Vec<f64>) {
    let s = split_sign(v);
    let left = rule.nodes.iter().zip(&rule.weights).map(|(&x, &w)| w.sqrt() * s.sqrt_abs(x)).collect();
    let right = rule.nodes.iter().zip(&rule.weights).map(|(&x, &w)| w.sqrt() * s.signed_sqrt(x)).collect();
    (left, right)
}

fn pairs_at_nodes(rule: &QuadratureRule, lambda: Complex64, half: HalfPlane) -> Result<Vec<FreePair>> {
    rule.nodes.iter().map(|&x| free_pair(x, lambda, half)).collect()
}

fn assemble(
    v: &Potential,
    lambda: Complex64,
    rule: &QuadratureRule,
    half: HalfPlane,
    derivative: bool,
) -> Result<CMatrix> {
    half.check(lambda)?;
    let n = rule.len();
    if v.is_zero() {
        return Ok(CMatrix::zeros(n, n));
    }
    let pairs = pairs_at_nodes(rule, lambda, half)?;
    let (a, b) = node_weights(v, rule);
    let c = half.wronskian();
    let mut m = CMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            if a[i] == 0.0 || b[j] == 0.0 {
                continue;
            }
            let (l, r) = if i <= j { (&pairs[i], &pairs[j]) } else { (&pairs[j], &pairs[i]) };
            let k = if derivative {
                kernel_dlambda_from_pairs(l, r, c)?
            } else {
                kernel_from_pairs(l, r, c)?
            };
            m[(i, j)] = k * (a[i] * b[j]);
        }
    }
    Ok(m)
}

/// Assembles the Nyström matrix of `Y₀(λ)` on the requested branch.
pub fn build_y0(v: &Potential, lambda: Complex64, rule: &QuadratureRule, half: HalfPlane) -> Result<SandwichMatrix> {
    Ok(SandwichMatrix {
        entries: assemble(v, lambda, rule, half, false)?,
        lambda,
        rule: rule.clone(),
        half_plane: half,
    })
}

/// `Tr Y₀(λ) = Σᵢ wᵢ V(xᵢ) R₀(xᵢ, xᵢ, λ)`: the matrix trace from the diagonal only.
pub fn trace_y0(v: &Potential, lambda: Complex64, rule: &QuadratureRule, half: HalfPlane) -> Result<Complex64> {
    half.check(lambda)?;
    let c = half.wronskian();
    let mut acc = Complex64::new(0.0, 0.0);
    for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
        let vx = v.eval(x);
        if vx != 0.0 {
            let p = free_pair(x, lambda, half)?;
            acc += kernel_from_pairs(&p, &p, c)? * (w * vx);
        }
    }
    Ok(acc)
}

/// Nyström matrix of `∂_λ Y₀(λ)` from the analytic Airy derivatives.
pub fn build_dy0(v: &Potential, lambda: Complex64, rule: &QuadratureRule, half: HalfPlane) -> Result<CMatrix> {
    assemble(v, lambda, rule, half, true)
}

/// Sum of singular values (discrete trace norm).
pub fn nuclear_norm(m: &CMatrix) -> f64 {
    m.clone().singular_values().iter().sum()
}

/// `(det(I + M), log det(I + M))` by partially pivoted LU; the log is principal.
pub fn det_and_log(m: &CMatrix) -> (Complex64, Complex64) {
    let n = m.nrows();
    let a = CMatrix::identity(n, n) + m;
    let lu = a.lu();
    let u = lu.u();
    let mut log = Complex64::new(0.0, 0.0);
    for i in 0..n {
        log += u[(i, i)].ln();
    }
    if lu.p().determinant::<f64>() < 0.0 {
        log += Complex64::new(0.0, std::f64::consts::PI);
    }
    log.im = crate::jost::wrap(log.im);
    (log.exp(), log)
}

/// `D±(λ)` for `λ` in the closed half-plane of `side`.
pub fn det_side(v: &Potential, lambda: Complex64, rule: &QuadratureRule, side: Side) -> Result<DeterminantSample> {
    let y0 = build_y0(v, lambda, rule, side.half_plane())?;
    let (d, log) = det_and_log(&y0.entries);
    if !(d.norm() > 1e-12) {
        return Err(StarkError::UnderResolved(format!(
            "D{:?}({lambda}) = {d} vanishes in its closed half-plane",
            side
        )));
    }
    Ok(DeterminantSample { lambda, d_value: d, log_d: log, side, rule_size: rule.len() })
}

/// Doubles `N` from `n0` until successive determinants differ by at most `tol`.
pub fn det_refined(
    v: &Potential,
    lambda: Complex64,
    side: Side,
    n0: usize,
    tol: f64,
    cap: usize,
) -> Result<DeterminantSample> {
    let mut n = n0.max(8);
    let mut prev = det_side(v, lambda, &rule_for(v, n)?, side)?;
    loop {
        if 2 * n > cap {
            return Err(StarkError::UnderResolved(format!(
                "N = {n}: |ΔD| still above {tol:e} at the cap {cap}"
            )));
        }
        n *= 2;
        let next = det_side(v, lambda, &rule_for(v, n)?, side)?;
        if (next.d_value - prev.d_value).norm() <= tol {
            return Ok(next);
        }
        prev = next;
    }
}

/// `log det(I + M) = Σₙ (−1)ⁿ⁺¹ Tr(Mⁿ)/n`, valid when the trace norm of `M` is `< 1`.
pub fn neumann_log_det(m: &CMatrix) -> Result<Complex64> {
    let q = nuclear_norm(m);
    if q >= 0.5 {
        return Err(StarkError::Domain(format!("trace norm {q:.3} ≥ 1/2: Neumann series not anchored")));
    }
    let mut power = m.clone();
    let mut out = Complex64::new(0.0, 0.0);
    let mut bound = q;
    let mut n = 1usize;
    while bound / n as f64 > 1e-18 * (1.0 + out.norm()) {
        let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
        out += power.trace() * (sign / n as f64);
        power = &power * m;
        n += 1;
        bound *= q;
    }
    Ok(out)
}

/// Smallest `r = 2^k` such that `Y₀(r e^{iφ})` has trace norm below 1/2.
pub fn anchor_radius(v: &Potential, rule: &QuadratureRule, side: Side, phi: f64) -> Result<f64> {
    let mut r = 1.0;
    while r < 1e7 {
        let l = Complex64::from_polar(r, phi);
        let y0 = build_y0(v, l, rule, side.half_plane())?;
        if nuclear_norm(&y0.entries) < 0.5 {
            return Ok(r);
        }
        r *= 2.0;
    }
    Err(StarkError::NonConvergence("no anchor radius below 1e7".into()))
}

/// `log D±` continued along `path`, anchored by the Neumann series at `path[0]`.
pub fn log_det_tracked(
    v: &Potential,
    path: &[Complex64],
    rule: &QuadratureRule,
    side: Side,
) -> Result<Vec<DeterminantSample>> {
    let Some(&first) = path.first() else {
        return Ok(Vec::new());
    };
    let y0 = build_y0(v, first, rule, side.half_plane())?;
    let anchor = neumann_log_det(&y0.entries)?;
    let (d0, _) = det_and_log(&y0.entries);
    let mut out = vec![DeterminantSample { lambda: first, d_value: d0, log_d: anchor, side, rule_size: rule.len() }];
    for &l in &path[1..] {
        let s = det_side(v, l, rule, side)?;
        let prev = out[out.len() - 1];
        let step = (s.d_value / prev.d_value).ln();
        if step.im.abs() >= std::f64::consts::FRAC_PI_2 {
            return Err(StarkError::BranchJump(format!(
                "phase step {:.3} between {} and {l}; refine the path",
                step.im, prev.lambda
            )));
        }
        out.push(DeterminantSample { log_d: prev.log_d + step, ..s });
    }
    Ok(out)
}

/// `n + 1` equally spaced points from `a` to `b`.
pub fn straight_path(a: Complex64, b: Complex64, n: usize) -> Vec<Complex64> {
    (0..=n).map(|k| a + (b - a) * (k as f64 / n as f64)).collect()
}

fn lu_inverse(m: &CMatrix) -> Result<CMatrix> {
    let n = m.nrows();
    let a = CMatrix::identity(n, n) + m;
    a.lu()
        .try_inverse()
        .ok_or_else(|| StarkError::Singular("I + Y₀ is singular at the discrete level".into()))
}

/// `Y = Y₀(I + Y₀)⁻¹ = I − (I + Y₀)⁻¹`, so that `(I − Y)(I + Y₀) = I`.
pub fn y_full(v: &Potential, lambda: Complex64, rule: &QuadratureRule, half: HalfPlane) -> Result<SandwichMatrix> {
    let y0 = build_y0(v, lambda, rule, half)?;
    let n = rule.len();
    let inv = lu_inverse(&y0.entries)?;
    Ok(SandwichMatrix { entries: CMatrix::identity(n, n) - inv, lambda, rule: rule.clone(), half_plane: half })
}

/// `Y x = x − (I + Y₀)⁻¹x` for one vector, by an LU solve (no explicit inverse).
pub fn y_full_apply(
    v: &Potential,
    lambda: Complex64,
    rule: &QuadratureRule,
    half: HalfPlane,
    x: &[Complex64],
) -> Result<Vec<Complex64>> {
    let y0 = build_y0(v, lambda, rule, half)?;
    let n = rule.len();
    if x.len() != n {
        return Err(StarkError::Domain(format!("vector of length {} for a rule of size {n}", x.len())));
    }
    let rhs = nalgebra::DVector::from_column_slice(x);
    let sol = (CMatrix::identity(n, n) + &y0.entries)
        .lu()
        .solve(&rhs)
        .ok_or_else(|| StarkError::Singular("I + Y₀ is singular at the discrete level".into()))?;
    Ok(x.iter().zip(sol.iter()).map(|(a, b)| a - b).collect())
}

/// `D'(λ)/D(λ) = Tr[(I + Y₀)⁻¹ ∂_λY₀]`.
pub fn logdet_prime(v: &Potential, lambda: Complex64, rule: &QuadratureRule, side: Side) -> Result<Complex64> {
    if v.is_zero() {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let half = side.half_plane();
    let y0 = build_y0(v, lambda, rule, half)?;
    let dy = build_dy0(v, lambda, rule, half)?;
    let n = rule.len();
    let a = CMatrix::identity(n, n) + &y0.entries;
    let x = a
        .lu()
        .solve(&dy)
        .ok_or_else(|| StarkError::Singular("I + Y₀ is singular at the discrete level".into()))?;
    Ok(x.trace())
}

/// Which evaluator produces `log D±(λ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Backend {
    /// Nyström determinant with `n` nodes; only in the closed half-plane of the side.
    Nystrom { n: usize },
    /// Wronskian–Magnus evaluation of the entire extension (any `λ`).
    Jost(JostSolver),
}

impl Default for Backend {
    fn default() -> Self {
        Backend::Jost(JostSolver::default())
    }
}

impl Backend {
    /// Jost backend whose resolution follows the quadrature size `n`.
    pub fn jost_for(n: usize) -> Self {
        Backend::Jost(JostSolver::with_steps(n))
    }

    /// `log D(λ)` with principal imaginary part.
    pub fn log_d(&self, v: &Potential, lambda: Complex64, side: Side) -> Result<Complex64> {
        match self {
            Backend::Nystrom { n } => Ok(det_side(v, lambda, &rule_for(v, *n)?, side)?.log_d),
            Backend::Jost(j) => j.log_d(v, lambda, side),
        }
    }

    /// The determinant as a [`DeterminantSample`].
    pub fn sample(&self, v: &Potential, lambda: Complex64, side: Side) -> Result<DeterminantSample> {
        match self {
            Backend::Nystrom { n } => det_side(v, lambda, &rule_for(v, *n)?, side),
            Backend::Jost(j) => {
                let log_d = j.log_d(v, lambda, side)?;
                Ok(DeterminantSample { lambda, d_value: log_d.exp(), log_d, side, rule_size: j.min_steps })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn zero_potential_gives_unit_determinant() {
        let v = Potential::zero(1.0).unwrap();
        let r = build_rule(16, 1.0).unwrap();
        let s = det_side(&v, c(2.0, 1.0), &r, Side::Plus).unwrap();
        assert_eq!(s.d_value, c(1.0, 0.0));
        assert_eq!(logdet_prime(&v, c(2.0, 1.0), &r, Side::Plus).unwrap(), c(0.0, 0.0));
    }

    #[test]
    fn second_order_convergence_to_jost_value() {
        let v = Potential::canonical();
        let exact = c(0.22119420649405244, 0.4674367537506383).exp();
        let e64 = (det_side(&v, c(2.0, 1.0), &build_rule(64, 1.0).unwrap(), Side::Plus).unwrap().d_value - exact).norm();
        let e128 = (det_side(&v, c(2.0, 1.0), &build_rule(128, 1.0).unwrap(), Side::Plus).unwrap().d_value - exact).norm();
        assert!(e128 < 1e-4, "{e128}");
        let ratio = e64 / e128;
        assert!((3.5..4.5).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn neumann_matches_lu_at_anchor() {
        let v = Potential::canonical();
        let r = build_rule(48, 1.0).unwrap();
        let rad = anchor_radius(&v, &r, Side::Plus, std::f64::consts::FRAC_PI_2).unwrap();
        let y0 = build_y0(&v, c(0.0, rad), &r, HalfPlane::Upper).unwrap();
        let a = neumann_log_det(&y0.entries).unwrap();
        let (_, b) = det_and_log(&y0.entries);
        assert!((a - b).norm() < 1e-12, "{a} vs {b}");
    }
}
