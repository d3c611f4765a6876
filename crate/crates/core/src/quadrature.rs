//! Quadrature rules on `[0, γ]` and adaptive integration of complex integrands.

use std::sync::OnceLock;

use gauss_quad::GaussLegendre;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Result, StarkError};

/// Nodes and weights discretising the integral operators on `[0, γ]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// Polynomial exactness of each panel.
    pub order: usize,
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`, sorted increasingly.
pub fn legendre_reference(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let gl = GaussLegendre::new(n)
        .map_err(|_| StarkError::MalformedInput(format!("Gauss–Legendre degree {n} < 2")))?;
    let mut pairs: Vec<(f64, f64)> = gl.nodes().copied().zip(gl.weights().copied()).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    // Enforce the reflection symmetry exactly (the generator is accurate to a few ulp).
    for i in 0..n / 2 {
        let j = n - 1 - i;
        let x = 0.5 * (pairs[j].0 - pairs[i].0);
        let w = 0.5 * (pairs[i].1 + pairs[j].1);
        pairs[i] = (-x, w);
        pairs[j] = (x, w);
    }
    if n % 2 == 1 {
        pairs[n / 2].0 = 0.0;
    }
    Ok(pairs.into_iter().unzip())
}

impl QuadratureRule {
    /// `n`-point Gauss–Legendre rule mapped to `[0, γ]`.
    pub fn gauss_legendre(n: usize, gamma: f64) -> Result<Self> {
        Self::composite(n, &[0.0, gamma])
    }

    /// Composite Gauss–Legendre rule with `n` nodes in total distributed over the
    /// panels delimited by `breaks` (increasing), proportionally to panel length.
    pub fn composite(n: usize, breaks: &[f64]) -> Result<Self> {
        if breaks.len() < 2 || breaks.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(StarkError::MalformedInput("panel breaks must increase".into()));
        }
        let panels = breaks.len() - 1;
        if n < 2 * panels {
            return Err(StarkError::MalformedInput(format!(
                "{n} nodes cannot cover {panels} panels"
            )));
        }
        let total = breaks[panels] - breaks[0];
        let mut counts: Vec<usize> = breaks
            .windows(2)
            .map(|w| (((w[1] - w[0]) / total) * n as f64).floor().max(2.0) as usize)
            .collect();
        while counts.iter().sum::<usize>() < n {
            let i = (0..panels)
                .max_by(|&a, &b| {
                    let da = (breaks[a + 1] - breaks[a]) / counts[a] as f64;
                    let db = (breaks[b + 1] - breaks[b]) / counts[b] as f64;
                    da.total_cmp(&db)
                })
                .unwrap_or(0);
            counts[i] += 1;
        }
        while counts.iter().sum::<usize>() > n {
            let i = (0..panels).max_by_key(|&a| counts[a]).unwrap_or(0);
            counts[i] -= 1;
        }
        let mut nodes = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        for (p, &m) in counts.iter().enumerate() {
            let (x, w) = legendre_reference(m)?;
            let (a, b) = (breaks[p], breaks[p + 1]);
            let half = 0.5 * (b - a);
            for (xi, wi) in x.iter().zip(&w) {
                nodes.push(a + half * (xi + 1.0));
                weights.push(half * wi);
            }
        }
        let order = 2 * counts.iter().copied().min().unwrap_or(2) - 1;
        Ok(Self { nodes, weights, order })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `Σ wᵢ f(xᵢ)`.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

const PANEL_POINTS: usize = 20;

fn panel_rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| legendre_reference(PANEL_POINTS).expect("degree ≥ 2"))
}

fn panel(f: &impl Fn(f64) -> Complex64, a: f64, b: f64) -> Complex64 {
    let (x, w) = panel_rule();
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    x.iter().zip(w).map(|(&xi, &wi)| f(mid + half * xi) * wi).sum::<Complex64>() * half
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct Integral {
    pub value: Complex64,
    pub error: f64,
}

/// Adaptive bisection with a 20-point Gauss–Legendre panel, comparing each panel
/// against its two halves. `tol` is an absolute tolerance for the whole integral.
pub fn integrate_adaptive(
    f: impl Fn(f64) -> Complex64,
    a: f64,
    b: f64,
    tol: f64,
    max_depth: usize,
) -> Result<Integral> {
    integrate_panels(&f, &[a, b], tol, max_depth)
}

/// As [`integrate_adaptive`], but starting from the given panel breaks.
pub fn integrate_panels(
    f: &impl Fn(f64) -> Complex64,
    breaks: &[f64],
    tol: f64,
    max_depth: usize,
) -> Result<Integral> {
    let mut stack: Vec<(f64, f64, Complex64, usize)> = breaks
        .windows(2)
        .map(|w| (w[0], w[1], panel(f, w[0], w[1]), 0))
        .collect();
    let total_len = (breaks[breaks.len() - 1] - breaks[0]).abs().max(f64::MIN_POSITIVE);
    let mut value = Complex64::new(0.0, 0.0);
    let mut error = 0.0;
    let mut failed = false;
    while let Some((a, b, whole, depth)) = stack.pop() {
        let m = 0.5 * (a + b);
        let left = panel(f, a, m);
        let right = panel(f, m, b);
        let refined = left + right;
        let diff = (refined - whole).norm();
        let budget = (tol * (b - a).abs() / total_len).max(1e-15 * refined.norm());
        if diff <= budget || depth >= max_depth {
            if diff > budget {
                failed = true;
            }
            value += refined;
            error += diff;
        } else {
            stack.push((a, m, left, depth + 1));
            stack.push((m, b, right, depth + 1));
        }
    }
    if !value.re.is_finite() || !value.im.is_finite() {
        return Err(StarkError::NonConvergence("integrand produced non-finite values".into()));
    }
    if failed && error > tol {
        return Err(StarkError::NonConvergence(format!(
            "adaptive quadrature reached depth {max_depth} with error {error:e} > {tol:e}"
        )));
    }
    Ok(Integral { value, error })
}

/// Real-valued convenience wrapper around [`integrate_adaptive`].
pub fn integrate_real(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64> {
    Ok(integrate_adaptive(|x| Complex64::new(f(x), 0.0), a, b, tol, 40)?.value.re)
}
