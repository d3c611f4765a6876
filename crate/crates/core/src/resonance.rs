//! Resonances: zeros of the entire extension of `D₊` in the lower half-plane.
//!
//! They are located as conjugates of the zeros of `D₋` in the upper half-plane,
//! where every factor of `D₋ = S·D₊` is available. Zeros are counted with the
//! argument principle on rectangles (adaptive edge refinement on `log D₋`),
//! isolated by quadtree subdivision and refined by Newton's method with an
//! eight-point Cauchy derivative. The module also evaluates the Hadamard product,
//! the trace formula, the Breit–Wigner representation of `φ'_sc`, the Krein-type
//! consistency integral and the reconstruction of `S` from resonances.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, StarkError};
use crate::fredholm::{det_side, logdet_prime, rule_for, Backend, Side};
use crate::jost::wrap;
use crate::parallel;
use crate::potential::Potential;
use crate::quadrature::QuadratureRule;
use crate::scattering::s_matrix;

/// `log D₋(λ)` for `λ` in the closed upper half-plane.
///
/// With the Jost backend this evaluates the entire function directly; with the
/// Nyström backend it uses `D₋ = S·D₊` from the stationary representation.
pub fn log_d_minus_upper(v: &Potential, lambda: Complex64, backend: &Backend) -> Result<Complex64> {
    if lambda.im < 0.0 {
        return Err(StarkError::Domain(format!("λ = {lambda} is not in the closed upper half-plane")));
    }
    match backend {
        Backend::Jost(j) => j.log_d(v, lambda, Side::Minus),
        Backend::Nystrom { n } => {
            let rule = rule_for(v, *n)?;
            let s = s_matrix(v, lambda, &rule)?.s;
            let dp = det_side(v, lambda, &rule, Side::Plus)?;
            let out = s.ln() + dp.log_d;
            Ok(Complex64::new(out.re, wrap(out.im)))
        }
    }
}

/// `D₋(λ)` in linear scale for `λ` in the closed upper half-plane.
pub fn d_minus_upper(v: &Potential, lambda: Complex64, backend: &Backend) -> Result<Complex64> {
    exp_checked(log_d_minus_upper(v, lambda, backend)?)
}

/// `log D₊(λ)` for `λ` in the lower half-plane, by `D₊(λ) = conj D₋(λ̄)`.
pub fn log_d_plus_lower(v: &Potential, lambda: Complex64, backend: &Backend) -> Result<Complex64> {
    if lambda.im > 0.0 {
        return Err(StarkError::Domain(format!("λ = {lambda} is not in the closed lower half-plane")));
    }
    Ok(log_d_minus_upper(v, lambda.conj(), backend)?.conj())
}

/// `D₊(λ)` in linear scale for `λ` in the lower half-plane.
pub fn d_plus_lower(v: &Potential, lambda: Complex64, backend: &Backend) -> Result<Complex64> {
    exp_checked(log_d_plus_lower(v, lambda, backend)?)
}

fn exp_checked(l: Complex64) -> Result<Complex64> {
    if l.re > 700.0 {
        return Err(StarkError::Overflow(format!("|D| ~ e^{:.0}", l.re)));
    }
    Ok(l.exp())
}

/// Axis-aligned rectangle in `ℂ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Rect {
    pub re0: f64,
    pub re1: f64,
    pub im0: f64,
    pub im1: f64,
}

impl Rect {
    pub fn new(re0: f64, re1: f64, im0: f64, im1: f64) -> Result<Self> {
        if !(re1 > re0 && im1 > im0) || ![re0, re1, im0, im1].iter().all(|x| x.is_finite()) {
            return Err(StarkError::MalformedInput(format!("degenerate rectangle [{re0}, {re1}] × [{im0}, {im1}]")));
        }
        Ok(Self { re0, re1, im0, im1 })
    }

    fn corners(&self) -> [Complex64; 4] {
        [
            Complex64::new(self.re0, self.im0),
            Complex64::new(self.re1, self.im0),
            Complex64::new(self.re1, self.im1),
            Complex64::new(self.re0, self.im1),
        ]
    }

    pub fn center(&self) -> Complex64 {
        Complex64::new(0.5 * (self.re0 + self.re1), 0.5 * (self.im0 + self.im1))
    }

    pub fn diameter(&self) -> f64 {
        (self.re1 - self.re0).hypot(self.im1 - self.im0)
    }

    fn contains(&self, z: Complex64) -> bool {
        z.re > self.re0 && z.re < self.re1 && z.im > self.im0 && z.im < self.im1
    }

    fn quarters(&self) -> [Rect; 4] {
        let c = self.center();
        [
            Rect { re0: self.re0, re1: c.re, im0: self.im0, im1: c.im },
            Rect { re0: c.re, re1: self.re1, im0: self.im0, im1: c.im },
            Rect { re0: self.re0, re1: c.re, im0: c.im, im1: self.im1 },
            Rect { re0: c.re, re1: self.re1, im0: c.im, im1: self.im1 },
        ]
    }

    /// Splits into a grid of cells no larger than `size` per side.
    fn tiles(&self, size: f64) -> Vec<Rect> {
        let nx = ((self.re1 - self.re0) / size).ceil().max(1.0) as usize;
        let ny = ((self.im1 - self.im0) / size).ceil().max(1.0) as usize;
        let mut out = Vec::with_capacity(nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                let t = |a: f64, b: f64, k: usize, n: usize| a + (b - a) * k as f64 / n as f64;
                out.push(Rect {
                    re0: t(self.re0, self.re1, i, nx),
                    re1: t(self.re0, self.re1, i + 1, nx),
                    im0: t(self.im0, self.im1, j, ny),
                    im1: t(self.im0, self.im1, j + 1, ny),
                });
            }
        }
        out
    }
}

/// Largest accepted change of `log f` between neighbouring contour samples.
const MAX_LOG_STEP: f64 = 0.4;

/// Total change of `arg f` along the segment `a → b`, refined adaptively.
fn arg_change_segment(
    f: &(impl Fn(Complex64) -> Result<Complex64> + Sync),
    a: Complex64,
    b: Complex64,
    min_pieces: usize,
) -> Result<f64> {
    let pts: Vec<Complex64> = (0..=min_pieces).map(|k| a + (b - a) * (k as f64 / min_pieces as f64)).collect();
    let vals = pts.iter().map(|&z| f(z)).collect::<Result<Vec<_>>>()?;
    let mut total = 0.0;
    for k in 0..min_pieces {
        total += refine(f, pts[k], pts[k + 1], vals[k], vals[k + 1], 0)?;
    }
    Ok(total)
}

fn refine(
    f: &impl Fn(Complex64) -> Result<Complex64>,
    a: Complex64,
    b: Complex64,
    fa: Complex64,
    fb: Complex64,
    depth: usize,
) -> Result<f64> {
    let d_im = wrap(fb.im - fa.im);
    let step = Complex64::new(fb.re - fa.re, d_im).norm();
    if step <= MAX_LOG_STEP {
        return Ok(d_im);
    }
    if depth > 48 || (b - a).norm() < 1e-11 * (1.0 + a.norm()) {
        return Err(StarkError::ZeroOnContour(format!("log D varies by {step:.3} over |Δλ| = {:.1e} near {a}", (b - a).norm())));
    }
    let m = 0.5 * (a + b);
    let fm = f(m)?;
    Ok(refine(f, a, m, fa, fm, depth + 1)? + refine(f, m, b, fm, fb, depth + 1)?)
}

/// Winding number of `exp(f)` around a closed polygon (counter-clockwise).
pub fn winding_polygon(
    f: &(impl Fn(Complex64) -> Result<Complex64> + Sync),
    vertices: &[Complex64],
    min_pieces: usize,
) -> Result<i64> {
    let n = vertices.len();
    let mut total = 0.0;
    for k in 0..n {
        total += arg_change_segment(f, vertices[k], vertices[(k + 1) % n], min_pieces)?;
    }
    let w = total / (2.0 * PI);
    let r = w.round();
    if (w - r).abs() > 1e-3 {
        return Err(StarkError::NonConvergence(format!("winding {w:.6} is not an integer")));
    }
    Ok(r as i64)
}

fn edge_pieces(rect: &Rect) -> usize {
    (((rect.re1 - rect.re0).max(rect.im1 - rect.im0)) * 4.0).ceil().clamp(4.0, 64.0) as usize
}

fn count_rect(f: &(impl Fn(Complex64) -> Result<Complex64> + Sync), rect: &Rect) -> Result<i64> {
    winding_polygon(f, &rect.corners(), edge_pieces(rect))
}

/// Number of zeros of `D₋` in a rectangle of the upper half-plane.
///
/// If a zero sits on the contour the rectangle is enlarged by 1% and retried (at
/// most five times).
pub fn count_zeros_contour(v: &Potential, rect: Rect, backend: &Backend) -> Result<i64> {
    if rect.im0 < 0.0 {
        return Err(StarkError::Domain("counting rectangle must lie in the closed upper half-plane".into()));
    }
    let f = |z: Complex64| log_d_minus_upper(v, z, backend);
    let mut r = rect;
    let mut last = None;
    for attempt in 0..5 {
        match count_rect(&f, &r) {
            Ok(c) => return Ok(c),
            Err(StarkError::ZeroOnContour(m)) => {
                last = Some(m);
                let grow = 0.01 * (attempt + 1) as f64 * rect.diameter();
                r = Rect { re0: r.re0 - grow, re1: r.re1 + grow, im0: r.im0, im1: r.im1 + grow };
            }
            Err(e) => return Err(e),
        }
    }
    Err(StarkError::ZeroOnContour(last.unwrap_or_default()))
}

/// Number of zeros of `D₊` (evaluated directly, without conjugation) in a
/// rectangle of the lower half-plane; requires the Jost backend.
pub fn count_zeros_lower_direct(v: &Potential, rect: Rect, backend: &Backend) -> Result<i64> {
    let Backend::Jost(j) = backend else {
        return Err(StarkError::Domain("direct evaluation in ℂ₋ needs the Jost backend".into()));
    };
    let f = |z: Complex64| j.log_d(v, z, Side::Plus);
    count_rect(&f, &rect)
}

/// `(f'/f)(λ)` by the eight-point Cauchy formula on `exp(log f)` (valid whether or
/// not `f` vanishes inside the circle), together with `|f(λ)|/max_circle|f|`.
pub fn cauchy_log_derivative(
    logf: &impl Fn(Complex64) -> Result<Complex64>,
    lambda: Complex64,
    r: f64,
) -> Result<(Complex64, f64)> {
    const K: usize = 8;
    let l0 = logf(lambda)?;
    let mut ls = Vec::with_capacity(K);
    for k in 0..K {
        let d = Complex64::from_polar(1.0, 2.0 * PI * k as f64 / K as f64);
        ls.push((d, logf(lambda + d * r)?));
    }
    let m = ls.iter().map(|(_, l)| l.re).fold(l0.re, f64::max);
    let mut acc = Complex64::new(0.0, 0.0);
    for (d, l) in &ls {
        acc += (l - m).exp() * d.conj();
    }
    let deriv = acc / (K as f64 * r);
    let f0 = (l0 - m).exp();
    let local = ls.iter().map(|(_, l)| (l.re - m).exp()).fold(0.0, f64::max);
    Ok((deriv / f0, f0.norm() / local.max(f64::MIN_POSITIVE)))
}

/// One resonance `λₙ ∈ ℂ₋`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Resonance {
    pub lambda: Complex64,
    pub multiplicity: u32,
    /// `|D₊(λₙ)|` relative to `max |D₊|` on the refinement circle.
    pub refine_residual: f64,
    pub newton_converged: bool,
}

/// Certified resonances in a half-disc.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResonanceSet {
    /// Sorted by modulus, ties by argument.
    pub items: Vec<Resonance>,
    pub search_radius: f64,
    /// `p = D₊'(0)/D₊(0)`.
    pub p_const: Complex64,
    pub d_plus_at_zero: Complex64,
    /// Argument-principle count over the half-disc.
    pub contour_count: i64,
    /// `contour_count` equals the number of located zeros with multiplicity.
    pub certified: bool,
}

impl ResonanceSet {
    /// Located zeros with `|λₙ| ≤ r`, with multiplicity.
    pub fn iter_within(&self, r: f64) -> impl Iterator<Item = &Resonance> {
        self.items.iter().filter(move |z| z.lambda.norm() <= r)
    }

    pub fn total(&self) -> u32 {
        self.items.iter().map(|z| z.multiplicity).sum()
    }
}

/// Parameters of the quadtree search.
#[derive(Debug, Clone, Copy)]
pub struct SearchConfig {
    pub radius: f64,
    /// Guard strip: the search region starts at `Im λ = guard`.
    pub guard: f64,
    /// Side length of the initial tiles.
    pub tile: f64,
    /// Below this diameter a cell with count > 1 is reported as one multiple zero.
    pub min_cell: f64,
    pub backend: Backend,
}

impl SearchConfig {
    pub fn new(radius: f64, backend: Backend) -> Self {
        Self { radius, guard: 1e-3, tile: 2.5, min_cell: 1e-6, backend }
    }
}

struct Found {
    zero: Complex64,
    multiplicity: u32,
    residual: f64,
    converged: bool,
}

enum CellOutcome {
    Done(Option<Found>),
    Split(Vec<(Rect, i64)>),
}

fn newton(
    f: &impl Fn(Complex64) -> Result<Complex64>,
    start: Complex64,
    rect: &Rect,
) -> Result<Option<(Complex64, f64, bool)>> {
    let mut z = start;
    let scale = rect.diameter();
    for _ in 0..60 {
        let r = (1e-3 * scale).clamp(1e-7, 1e-3);
        let (ratio, _) = cauchy_log_derivative(f, z, r)?;
        let step = -1.0 / ratio;
        if !step.re.is_finite() || !step.im.is_finite() {
            return Ok(None);
        }
        z += step;
        if !rect.contains(z) {
            return Ok(None);
        }
        if step.norm() <= 1e-13 * (1.0 + z.norm()) {
            let (_, res) = cauchy_log_derivative(f, z, 1e-4 * (1.0 + z.norm()).min(10.0) / 10.0)?;
            return Ok(Some((z, res, true)));
        }
    }
    let (_, res) = cauchy_log_derivative(f, z, 1e-5)?;
    Ok(Some((z, res, res < 1e-8)))
}

fn process_cell(f: &(impl Fn(Complex64) -> Result<Complex64> + Sync), rect: Rect, count: i64, min_cell: f64) -> Result<CellOutcome> {
    if count <= 0 {
        return Ok(CellOutcome::Done(None));
    }
    if count == 1 {
        if let Some((z, res, conv)) = newton(f, rect.center(), &rect)? {
            if conv {
                return Ok(CellOutcome::Done(Some(Found { zero: z, multiplicity: 1, residual: res, converged: true })));
            }
        }
    }
    if rect.diameter() < min_cell {
        let z = rect.center();
        let (_, res) = cauchy_log_derivative(f, z, rect.diameter())?;
        return Ok(CellOutcome::Done(Some(Found { zero: z, multiplicity: count as u32, residual: res, converged: false })));
    }
    let mut kids = Vec::with_capacity(4);
    for q in rect.quarters() {
        kids.push((q, count_rect(f, &q)?));
    }
    let sum: i64 = kids.iter().map(|k| k.1).sum();
    if sum != count {
        return Err(StarkError::Certification(format!(
            "children of cell {rect:?} count {sum} zeros, parent {count}"
        )));
    }
    Ok(CellOutcome::Split(kids))
}

/// Zeros of `exp(logf)` inside `rect`, by tiles → quadtree → Newton.
pub fn zeros_in_rect(
    logf: &(impl Fn(Complex64) -> Result<Complex64> + Sync),
    rect: Rect,
    tile: f64,
    min_cell: f64,
) -> Result<Vec<(Complex64, u32, f64, bool)>> {
    let tiles = rect.tiles(tile);
    let mut cells: Vec<(Rect, i64)> = parallel::map(&tiles, |t| Ok((*t, count_rect(logf, t)?)))?;
    let mut found = Vec::new();
    while !cells.is_empty() {
        let outcomes = parallel::map(&cells, |(r, c)| process_cell(logf, *r, *c, min_cell))?;
        cells = Vec::new();
        for o in outcomes {
            match o {
                CellOutcome::Done(Some(fz)) => found.push((fz.zero, fz.multiplicity, fz.residual, fz.converged)),
                CellOutcome::Done(None) => {}
                CellOutcome::Split(kids) => cells.extend(kids),
            }
        }
    }
    Ok(found)
}

/// Argument-principle count of zeros of `D₋` in `{|λ| ≤ R, Im λ ≥ guard}`.
pub fn count_half_disc(v: &Potential, radius: f64, guard: f64, backend: &Backend) -> Result<i64> {
    let f = |z: Complex64| log_d_minus_upper(v, z, backend);
    let theta0 = (guard / radius).asin();
    let arc_pts = ((radius * PI) * 2.0).ceil().max(16.0) as usize;
    let mut verts = Vec::with_capacity(arc_pts + 2);
    for k in 0..=arc_pts {
        let th = theta0 + (PI - 2.0 * theta0) * k as f64 / arc_pts as f64;
        verts.push(Complex64::from_polar(radius, th));
    }
    winding_polygon(&f, &verts, 4)
}

/// `D₊'(λ)/D₊(λ)` from the backend: analytic `∂λY₀` for Nyström, Cauchy formula for Jost.
pub fn log_derivative_plus(v: &Potential, lambda: Complex64, backend: &Backend) -> Result<Complex64> {
    match backend {
        Backend::Nystrom { n } => logdet_prime(v, lambda, &rule_for(v, *n)?, Side::Plus),
        Backend::Jost(j) => {
            let f = |z: Complex64| j.log_d(v, z, Side::Plus);
            Ok(cauchy_log_derivative(&f, lambda, 1e-2)?.0)
        }
    }
}

/// All resonances with `|λₙ| ≤ radius` (guard strip excluded), with completeness
/// certified by the half-disc contour count.
pub fn find_resonances(v: &Potential, cfg: &SearchConfig) -> Result<ResonanceSet> {
    if !(cfg.radius > cfg.guard) {
        return Err(StarkError::MalformedInput(format!("search radius {} too small", cfg.radius)));
    }
    let backend = cfg.backend;
    let d0 = backend.log_d(v, Complex64::new(0.0, 0.0), Side::Plus)?;
    let p_const = log_derivative_plus(v, Complex64::new(0.0, 0.0), &backend)?;
    if v.is_zero() {
        return Ok(ResonanceSet {
            items: Vec::new(),
            search_radius: cfg.radius,
            p_const,
            d_plus_at_zero: d0.exp(),
            contour_count: 0,
            certified: true,
        });
    }
    let f = |z: Complex64| log_d_minus_upper(v, z, &backend);
    let rect = Rect::new(-cfg.radius, cfg.radius, cfg.guard, cfg.radius)?;
    let found = zeros_in_rect(&f, rect, cfg.tile, cfg.min_cell)?;
    let mut items: Vec<Resonance> = found
        .into_iter()
        .filter(|(z, ..)| z.norm() <= cfg.radius)
        .map(|(z, m, res, conv)| Resonance { lambda: z.conj(), multiplicity: m, refine_residual: res, newton_converged: conv })
        .collect();
    sort_resonances(&mut items);
    let contour_count = count_half_disc(v, cfg.radius, cfg.guard, &backend)?;
    let total: u32 = items.iter().map(|z| z.multiplicity).sum();
    Ok(ResonanceSet {
        items,
        search_radius: cfg.radius,
        p_const,
        d_plus_at_zero: d0.exp(),
        contour_count,
        certified: contour_count == total as i64,
    })
}

/// Sorts by modulus, ties broken by argument.
pub fn sort_resonances(items: &mut [Resonance]) {
    items.sort_by(|a, b| {
        a.lambda
            .norm()
            .total_cmp(&b.lambda.norm())
            .then(a.lambda.arg().total_cmp(&b.lambda.arg()))
    });
}

/// `N(r) = #{n : |λₙ| ≤ r}` with multiplicity.
pub fn counting_function(rs: &ResonanceSet, r: f64) -> Result<u32> {
    if r > rs.search_radius {
        return Err(StarkError::Domain(format!("r = {r} exceeds the certified radius {}", rs.search_radius)));
    }
    Ok(rs.iter_within(r).map(|z| z.multiplicity).sum())
}

/// Least-squares exponent of `N(r) ≈ C r^β` over the given radii (only `N > 0` used).
pub fn counting_exponent(rs: &ResonanceSet, radii: &[f64]) -> Result<f64> {
    let mut pts = Vec::new();
    for &r in radii {
        let n = counting_function(rs, r)?;
        if n > 0 {
            pts.push((r.ln(), (n as f64).ln()));
        }
    }
    if pts.len() < 2 {
        return Err(StarkError::NonConvergence("fewer than two nonzero counts for the exponent fit".into()));
    }
    Ok(crate::fit::linear(&pts).0)
}

/// Truncated genus-one product, as a logarithm:
/// `log D₊(0) + pλ + Σ_{|λₙ|≤radius} m (log(1 − λ/λₙ) + λ/λₙ)`.
pub fn hadamard_log(rs: &ResonanceSet, lambda: Complex64, radius: f64) -> Complex64 {
    let mut acc = rs.d_plus_at_zero.ln() + rs.p_const * lambda;
    for z in rs.iter_within(radius) {
        let q = lambda / z.lambda;
        acc += ((1.0 - q).ln() + q) * z.multiplicity as f64;
    }
    acc
}

/// `D₊(λ)` from the truncated Hadamard product.
pub fn hadamard_eval(rs: &ResonanceSet, lambda: Complex64, radius: f64) -> Complex64 {
    hadamard_log(rs, lambda, radius).exp()
}

/// `p + Σ_{|λₙ|≤radius} m λ/(λₙ(λ − λₙ))`.
pub fn resonance_sum(rs: &ResonanceSet, lambda: Complex64, radius: f64) -> Complex64 {
    let mut acc = rs.p_const;
    for z in rs.iter_within(radius) {
        acc += lambda / (z.lambda * (lambda - z.lambda)) * z.multiplicity as f64;
    }
    acc
}

/// Both sides of the trace formula at one point.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TraceResidual {
    pub lambda: Complex64,
    pub radius: f64,
    /// `D₊'(λ)/D₊(λ)`.
    pub lhs: Complex64,
    pub rhs: Complex64,
    pub residual: f64,
    /// `residual / |lhs|`.
    pub relative: f64,
}

/// `|D₊'/D₊(λ) − p − Σ_{|λₙ|≤radius} λ/(λₙ(λ − λₙ))|`.
pub fn trace_formula_residual(
    v: &Potential,
    rs: &ResonanceSet,
    lambda: Complex64,
    radius: f64,
    backend: &Backend,
) -> Result<TraceResidual> {
    if lambda.im <= 0.0 {
        return Err(StarkError::Domain(format!("trace formula evaluated in ℂ₊, got {lambda}")));
    }
    if let Some(z) = rs.items.iter().find(|z| (z.lambda - lambda).norm() < 1e-3) {
        return Err(StarkError::Domain(format!("λ = {lambda} within 1e-3 of the resonance {}", z.lambda)));
    }
    let lhs = log_derivative_plus(v, lambda, backend)?;
    let rhs = resonance_sum(rs, lambda, radius);
    let residual = (lhs - rhs).norm();
    let relative = if lhs.norm() > 0.0 { residual / lhs.norm() } else { residual };
    Ok(TraceResidual { lambda, radius, lhs, rhs, residual, relative })
}

/// Default step of the phase stencils.
pub const PHASE_STEP: f64 = 1e-2;

/// `φ_sc` at `λ + k h`, `k = −2..=2`, as continuous increments around `λ`.
fn phase_stencil(v: &Potential, lambda: f64, h: f64, backend: &Backend) -> Result<[f64; 5]> {
    let mut args = [0.0; 5];
    for (k, a) in args.iter_mut().enumerate() {
        *a = backend.log_d(v, Complex64::new(lambda + (k as f64 - 2.0) * h, 0.0), Side::Plus)?.im;
    }
    let c = args[2];
    let mut out = [0.0; 5];
    for k in 0..5 {
        out[k] = wrap(args[k] - c) / PI;
    }
    Ok(out)
}

/// `φ'_sc(λ)` by the five-point stencil.
pub fn phase_derivative(v: &Potential, lambda: f64, h: f64, backend: &Backend) -> Result<f64> {
    let p = phase_stencil(v, lambda, h, backend)?;
    Ok((p[0] - 8.0 * p[1] + 8.0 * p[3] - p[4]) / (12.0 * h))
}

/// `φ''_sc(λ)` by the five-point stencil.
pub fn phase_second_derivative(v: &Potential, lambda: f64, h: f64, backend: &Backend) -> Result<f64> {
    let p = phase_stencil(v, lambda, h, backend)?;
    Ok((-p[0] + 16.0 * p[1] - 30.0 * p[2] + 16.0 * p[3] - p[4]) / (12.0 * h * h))
}

/// `φ'_sc(0) + (1/π) Im Σ_{|λₙ|≤radius} λ/(λₙ(λ − λₙ))`.
pub fn breit_wigner_sum(rs: &ResonanceSet, phi0_prime: f64, lambda: f64, radius: f64) -> f64 {
    let l = Complex64::new(lambda, 0.0);
    let s = resonance_sum(rs, l, radius) - rs.p_const;
    phi0_prime + s.im / PI
}

/// Both sides of the Breit–Wigner representation of `φ'_sc` at one point.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BreitWigner {
    pub lambda: f64,
    pub lhs: f64,
    pub rhs: f64,
}

/// `lhs = φ'_sc(λ)` (stencil), `rhs` = truncated resonance sum with the stencil
/// value of `φ'_sc(0)`.
pub fn breit_wigner_phase(
    v: &Potential,
    rs: &ResonanceSet,
    lambda: f64,
    radius: f64,
    backend: &Backend,
) -> Result<BreitWigner> {
    let phi0 = phase_derivative(v, 0.0, PHASE_STEP, backend)?;
    let lhs = phase_derivative(v, lambda, PHASE_STEP, backend)?;
    Ok(BreitWigner { lambda, lhs, rhs: breit_wigner_sum(rs, phi0, lambda, radius) })
}

/// `φ^{(m)}_sc(0)` predicted from the resonances, `m ≥ 2`:
/// `−((m−1)!/π) Im Σ_{|λₙ|≤radius} λₙ^{−m}`.
pub fn phase_moment(rs: &ResonanceSet, m: u32, radius: f64) -> f64 {
    let fact: f64 = (1..m).map(|k| k as f64).product();
    let s: Complex64 = rs
        .iter_within(radius)
        .map(|z| z.lambda.powi(-(m as i32)) * z.multiplicity as f64)
        .sum();
    -fact / PI * s.im
}

/// Krein-type consistency: `−∫ f φ'_sc` computed from the phase directly and from
/// the truncated Breit–Wigner sum, with an `n`-point Gauss rule on `[a, b]`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct KreinCheck {
    pub lhs: f64,
    pub rhs: f64,
}

pub fn krein_consistency(
    v: &Potential,
    rs: &ResonanceSet,
    f: impl Fn(f64) -> f64 + Sync,
    support: (f64, f64),
    n: usize,
    radius: f64,
    backend: &Backend,
) -> Result<KreinCheck> {
    let (a, b) = support;
    let rule = QuadratureRule::gauss_legendre(n, b - a)?;
    let nodes: Vec<(f64, f64)> = rule.nodes.iter().zip(&rule.weights).map(|(&x, &w)| (a + x, w)).collect();
    let phi0 = phase_derivative(v, 0.0, PHASE_STEP, backend)?;
    let terms = parallel::map(&nodes, |&(t, w)| {
        let fv = f(t);
        if fv == 0.0 {
            return Ok((0.0, 0.0));
        }
        let direct = phase_derivative(v, t, PHASE_STEP, backend)?;
        let sum = breit_wigner_sum(rs, phi0, t, radius);
        Ok((w * fv * direct, w * fv * sum))
    })?;
    let lhs = -terms.iter().map(|t| t.0).sum::<f64>();
    let rhs = -terms.iter().map(|t| t.1).sum::<f64>();
    Ok(KreinCheck { lhs, rhs })
}

/// `S₁(λ) = e^{−2iλ Im p} Π_{|λₙ|≤radius} [(1 − λ/λ̄ₙ)/(1 − λ/λₙ) · e^{λ/λ̄ₙ − λ/λₙ}]^{mₙ}`.
///
/// This is `S(λ)/S(0)` written through the Hadamard product of `D₊` and
/// `D₋(λ) = conj D₊(λ̄)`; the poles sit at the resonances.
pub fn s1_product(rs: &ResonanceSet, lambda: Complex64, radius: f64) -> Complex64 {
    let mut log = Complex64::new(0.0, -2.0 * rs.p_const.im) * lambda;
    for z in rs.iter_within(radius) {
        let (q, qb) = (lambda / z.lambda, lambda / z.lambda.conj());
        log += ((1.0 - qb).ln() - (1.0 - q).ln() + qb - q) * z.multiplicity as f64;
    }
    log.exp()
}

/// The finite symmetric product `Π (1 − λ/λ̄ₙ)/(1 − λ/λₙ)` (unit modulus on ℝ).
pub fn symmetric_product(rs: &ResonanceSet, lambda: Complex64, radius: f64) -> Complex64 {
    let mut acc = Complex64::new(1.0, 0.0);
    for z in rs.iter_within(radius) {
        let f = (1.0 - lambda / z.lambda.conj()) / (1.0 - lambda / z.lambda);
        acc *= f.powu(z.multiplicity);
    }
    acc
}

/// `S(λ)` reconstructed from the resonances and `p`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Reconstruction {
    pub lambda: Complex64,
    pub s: Complex64,
    pub s0: Complex64,
    pub s1: Complex64,
}

/// `S(λ) = S(0) S₁(λ)` with `S(0) = conj S₁(anchor)` at a far-left real anchor.
pub fn s_from_resonances(rs: &ResonanceSet, lambda: Complex64, radius: f64, anchor: f64) -> Result<Reconstruction> {
    if !(anchor < 0.0) {
        return Err(StarkError::MalformedInput(format!("anchor {anchor} must be negative")));
    }
    let s1a = s1_product(rs, Complex64::new(anchor, 0.0), radius);
    if (s1a.norm() - 1.0).abs() > 1e-8 {
        return Err(StarkError::NonConvergence(format!("|S₁(anchor)| = {} is not 1", s1a.norm())));
    }
    let s0 = s1a.conj();
    let s1 = s1_product(rs, lambda, radius);
    Ok(Reconstruction { lambda, s: s0 * s1, s0, s1 })
}
