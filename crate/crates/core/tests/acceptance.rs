//! Acceptance suite: one `AC n: PASS|FAIL` line per criterion, with the measured
//! quantities next to the pinned thresholds.
//!
//! The canonical potential `V(x) = 1 + x/2` on `[0, 1]` (`V₀ = 5/4`) is used unless
//! a criterion says otherwise. Failing criteria are reported, not hidden; the
//! process exits nonzero on a failure only when `STARK_ACCEPTANCE_STRICT=1`, so
//! that the remaining test targets still run under a plain `cargo test`.

use std::f64::consts::PI;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use stark_resonance::airy::{airy_ai, airy_ai_via, omega, AiryRegime, SERIES_RADIUS};
use stark_resonance::asymptotics::{run_study, ClaimId, StudyConfig};
use stark_resonance::fredholm::{build_rule, det_side, Backend, Side};
use stark_resonance::green::{free_pair, r0_kernel, r0_time_integral, HalfPlane};
use stark_resonance::potential::Potential;
use stark_resonance::resonance::{
    breit_wigner_phase, count_half_disc, count_zeros_contour, counting_exponent, find_resonances,
    phase_derivative, s_from_resonances, symmetric_product, trace_formula_residual, Rect, ResonanceSet,
    SearchConfig, PHASE_STEP,
};
use stark_resonance::scattering::{jump_residual, s_from_determinants, s_matrix, scattering_phase, trace_integrals};
use stark_resonance::Result;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Result<Outcome> {
    Ok(Outcome { pass, detail })
}

/// Shared resonance search (radius 25, default backend), reused by AC 8–10.
fn canonical_set(backend: Backend) -> Result<ResonanceSet> {
    find_resonances(&Potential::canonical(), &SearchConfig::new(25.0, backend))
}

/// AC 1 — with `V ≡ 0`: `D₊ ≡ 1`, `S ≡ 1`, `φ_sc ≡ 0`, no zeros in any contour, to 1e-12.
fn ac1() -> Result<Outcome> {
    let v = Potential::zero(1.0)?;
    let rule = build_rule(64, 1.0)?;
    let nystrom = Backend::Nystrom { n: 64 };
    let jost = Backend::default();
    let mut worst: f64 = 0.0;
    for l in [c(-7.0, 0.0), c(0.0, 0.0), c(3.5, 0.0), c(2.0, 1.0), c(-4.0, 6.0), c(30.0, 0.5)] {
        for b in [&nystrom, &jost] {
            worst = worst.max((b.log_d(&v, l, Side::Plus)?.exp() - 1.0).norm());
        }
        if l.im == 0.0 {
            worst = worst.max((s_matrix(&v, l, &rule)?.s - 1.0).norm());
            worst = worst.max((s_from_determinants(&v, l, &jost)? - 1.0).norm());
        }
    }
    let grid: Vec<f64> = (0..=40).map(|k| -20.0 + k as f64).collect();
    let phase = scattering_phase(&v, &grid, &jost)?;
    worst = worst.max(phase.phase.iter().fold(0.0, |m, p| m.max(p.abs())));
    let rect = count_zeros_contour(&v, Rect::new(-10.0, 10.0, 0.01, 10.0)?, &jost)?;
    let disc = count_half_disc(&v, 20.0, 1e-3, &jost)?;
    let found = find_resonances(&v, &SearchConfig::new(20.0, jost))?;
    let pass = worst <= 1e-12 && rect == 0 && disc == 0 && found.items.is_empty();
    outcome(
        pass,
        format!(
            "max deviation {worst:.1e} (≤ 1e-12); zero counts rect {rect}, half-disc {disc}, search {}",
            found.items.len()
        ),
    )
}

/// AC 2 — two-solution `R₀` vs the time-integral oracle on a 5×5 grid × 4 λ (≤ 1e-6),
/// plus the Airy ODE away from the diagonal and the unit derivative jump on it.
fn ac2() -> Result<Outcome> {
    let xs = [0.0, 0.25, 0.5, 0.75, 1.0];
    let lambdas = [c(1.0, 2.0), c(2.0, 1.0), c(-1.0, 0.5), c(0.5, 3.0)];
    let mut kernel: f64 = 0.0;
    let mut ode: f64 = 0.0;
    let mut jump: f64 = 0.0;
    let h = 1e-3;
    for &l in &lambdas {
        for &x in &xs {
            for &y in &xs {
                let k = r0_kernel(x, y, l, HalfPlane::Upper)?.value;
                kernel = kernel.max((k - r0_time_integral(x, y, l)?).norm());
                if (x - y).abs() > 0.1 {
                    let f = |t: f64| r0_kernel(t, y, l, HalfPlane::Upper).map(|e| e.value);
                    let d2 = (f(x + h)? - 2.0 * k + f(x - h)?) / (h * h);
                    let res = -d2 + (c(x, 0.0) - l) * k;
                    ode = ode.max(res.norm() / k.norm().max(1e-300));
                }
            }
            // ∂ₓR₀(y⁺, y) − ∂ₓR₀(y⁻, y) = −1.
            let p = free_pair(x, l, HalfPlane::Upper)?;
            let s = (p.plus.log_scale + p.minus.log_scale).exp();
            let above = p.minus.ai * p.plus.ai_prime * s;
            let below = p.minus.ai_prime * p.plus.ai * s;
            jump = jump.max(((above - below) / HalfPlane::Upper.wronskian() + 1.0).norm());
        }
    }
    let pass = kernel <= 1e-6 && ode <= 1e-5 && jump <= 1e-10;
    outcome(
        pass,
        format!("kernel |Δ| {kernel:.1e} (≤ 1e-6); ODE residual {ode:.1e} (FD, ≤ 1e-5); jump {jump:.1e}"),
    )
}

/// AC 3 — conjugation symmetry at 50 random λ (≤ 1e-10), `S = conj D₊/D₊` at 20 real
/// points (≤ 1e-6), jump formula at 20 real points (≤ 1e-8).
fn ac3() -> Result<Outcome> {
    let v = Potential::canonical();
    let rule = build_rule(128, 1.0)?;
    let jost = Backend::default();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut conj: f64 = 0.0;
    for _ in 0..50 {
        let l = c(rng.gen_range(-10.0..10.0), rng.gen_range(0.05..6.0));
        let dp = det_side(&v, l, &rule, Side::Plus)?.d_value;
        let dm = det_side(&v, l.conj(), &rule, Side::Minus)?.d_value;
        conj = conj.max((dm - dp.conj()).norm() / dp.norm());
    }
    let reals: Vec<f64> = (0..20).map(|k| -9.5 + k as f64).collect();
    let mut s_err: f64 = 0.0;
    let mut s_jost: f64 = 0.0;
    let mut jump: f64 = 0.0;
    for &x in &reals {
        let l = c(x, 0.0);
        let s = s_matrix(&v, l, &rule)?.s;
        let dp = det_side(&v, l, &rule, Side::Plus)?.d_value;
        s_err = s_err.max((s - dp.conj() / dp).norm());
        s_jost = s_jost.max((s - s_from_determinants(&v, l, &jost)?).norm());
        jump = jump.max(jump_residual(&v, x, &rule)?);
    }
    let pass = conj <= 1e-10 && s_err <= 1e-6 && jump <= 1e-8;
    outcome(
        pass,
        format!(
            "conjugation {conj:.1e} (≤ 1e-10); S vs conj D₊/D₊ {s_err:.1e} (≤ 1e-6; vs Jost backend {s_jost:.1e}); \
             jump {jump:.1e} (≤ 1e-8)"
        ),
    )
}

fn unitarity_defect(v: &Potential, n: usize, grid: &[f64]) -> Result<f64> {
    let rule = build_rule(n, v.gamma())?;
    let d = stark_resonance::parallel::map(grid, |&x| Ok((s_matrix(v, c(x, 0.0), &rule)?.s.norm() - 1.0).abs()))?;
    Ok(d.into_iter().fold(0.0, f64::max))
}

/// AC 4 — `sup ||S| − 1| ≤ 1e-6` on `[−50, 50]` at N = 256, halving under doubling.
///
/// The discrete S is unitary up to rounding at every N, so "halving" is read as
/// "does not grow beyond a factor 1/2 unless already at the rounding floor (1e-13)".
fn ac4() -> Result<Outcome> {
    let v = Potential::canonical();
    let grid: Vec<f64> = (0..=200).map(|k| -50.0 + 0.5 * k as f64).collect();
    let d256 = unitarity_defect(&v, 256, &grid)?;
    let d512 = unitarity_defect(&v, 512, &grid)?;
    let floor = 1e-13;
    let halving = d512 <= 0.5 * d256 || d512 <= floor;
    outcome(
        d256 <= 1e-6 && halving,
        format!("sup||S|−1|: N=256 {d256:.1e} (≤ 1e-6), N=512 {d512:.1e} (halved or ≤ {floor:.0e})"),
    )
}

/// AC 5 — high-energy expansion of `log D₊` on three rays and of `Tr Y₀` by both routes.
fn ac5() -> Result<Outcome> {
    let v = Potential::canonical();
    let mut parts = Vec::new();
    let mut pass = true;
    for (name, angle) in [("π/6", PI / 6.0), ("π/2", PI / 2.0), ("5π/6", 5.0 * PI / 6.0)] {
        let mut cfg = StudyConfig::for_claim(ClaimId::Logdet18);
        cfg.angle = angle;
        let s = run_study(&v, ClaimId::Logdet18, &cfg)?;
        let bound = s
            .samples
            .iter()
            .map(|p| (p.observed - p.predicted).norm() * p.parameter)
            .fold(0.0, f64::max);
        let ok = s.deviation <= 0.02 && bound.is_finite() && s.fit.exponent <= -1.0;
        pass &= ok;
        parts.push(format!("log D₊ @{name}: dev {:.1e}, sup|Δ|·|λ| {bound:.2e}", s.deviation));
    }
    let cfg = StudyConfig::for_claim(ClaimId::Trace243);
    let s = run_study(&v, ClaimId::Trace243, &cfg)?;
    let second = s
        .secondary
        .map(|f| (f.coefficient - s.expected).norm() / s.expected.norm())
        .unwrap_or(f64::INFINITY);
    pass &= s.deviation <= 0.02 && second <= 0.02;
    parts.push(format!("Tr Y₀ oscillatory dev {:.1e}, matrix dev {second:.1e}", s.deviation));
    outcome(pass, format!("{} (each ≤ 2e-2)", parts.join("; ")))
}

/// AC 6 — trace integrals at R = 10³: Re part → V₀ = 5/4 within 2%, Im part → 0.
fn ac6() -> Result<Outcome> {
    let v = Potential::canonical();
    let t = trace_integrals(&v, 1e3, &Backend::default(), 1e-5)?;
    let rel = (t.re_integral - t.v0).abs() / t.v0;
    let im = t.im_integral.abs() / t.v0;
    outcome(
        rel <= 0.02 && im <= 0.02,
        format!("Re {:.6} vs V₀ {:.4} (rel {rel:.1e} ≤ 2e-2); Im {:.1e} (≤ 2e-2·V₀)", t.re_integral, t.v0, t.im_integral),
    )
}

/// AC 7 — cubic coefficient of `log|D₋(t²e^{iπ/3})|` on `t ∈ [2.5, 4]` is 4/3 within 5%.
fn ac7() -> Result<Outcome> {
    let v = Potential::canonical();
    let s = run_study(&v, ClaimId::Ray512, &StudyConfig::for_claim(ClaimId::Ray512))?;
    outcome(
        s.deviation <= 0.05,
        format!("coefficient {:.4} vs 4/3 (rel {:.1e} ≤ 5e-2)", s.fit.coefficient.re, s.deviation),
    )
}

/// AC 8 — certified nonempty search at radius 25, N-stability ≤ 1e-6 for |λ| ≤ 15,
/// counting exponent in [1.2, 1.8].
fn ac8(rs: &ResonanceSet) -> Result<Outcome> {
    let fine = canonical_set(Backend::jost_for(256))?;
    let inner: Vec<_> = rs.iter_within(15.0).collect();
    let fine_inner: Vec<_> = fine.iter_within(15.0).collect();
    let mut shift: f64 = 0.0;
    for z in &inner {
        let d = fine.items.iter().map(|w| (w.lambda - z.lambda).norm()).fold(f64::INFINITY, f64::min);
        shift = shift.max(d);
    }
    let exponent = counting_exponent(rs, &[5.0, 10.0, 15.0, 20.0, 25.0])?;
    let pass = !rs.items.is_empty()
        && rs.certified
        && inner.len() == fine_inner.len()
        && shift <= 1e-6
        && (1.2..=1.8).contains(&exponent);
    outcome(
        pass,
        format!(
            "{} resonances (contour count {}, certified {}); |λ|≤15: {} vs {} at 2N, max shift {shift:.1e} (≤ 1e-6); \
             exponent {exponent:.3} (∈ [1.2, 1.8])",
            rs.total(),
            rs.contour_count,
            rs.certified,
            inner.len(),
            fine_inner.len()
        ),
    )
}

/// AC 9 — trace formula at 2 + 2i, Breit–Wigner at 10 real points, `Im p = πφ′_sc(0)`.
fn ac9(rs: &ResonanceSet) -> Result<Outcome> {
    let v = Potential::canonical();
    let b = Backend::default();
    let l = c(2.0, 2.0);
    let mut residuals = Vec::new();
    for r in [10.0, 15.0, 20.0, 25.0] {
        residuals.push(trace_formula_residual(&v, rs, l, r, &b)?);
    }
    let monotone = residuals.windows(2).all(|w| w[1].residual < w[0].residual);
    let last = residuals.last().expect("four radii");
    let trace_ok = monotone && last.relative <= 1e-2;
    let points = [-4.0, -3.0, -2.0, -1.0, -0.5, 0.5, 1.0, 2.0, 3.0, 4.0];
    let mut bw_diff: f64 = 0.0;
    let mut bw_scale: f64 = 0.0;
    for x in points {
        let bw = breit_wigner_phase(&v, rs, x, 25.0, &b)?;
        bw_diff = bw_diff.max((bw.lhs - bw.rhs).abs());
        bw_scale = bw_scale.max(bw.lhs.abs());
    }
    let bw_ok = bw_diff <= 1e-2 * bw_scale;
    let phi = phase_derivative(&v, 0.0, PHASE_STEP, &b)?;
    let p_rel = (rs.p_const.im - PI * phi).abs() / (PI * phi).abs();
    let p_ok = p_rel <= 1e-2;
    let series: Vec<String> = residuals.iter().map(|t| format!("{:.3}", t.residual)).collect();
    outcome(
        trace_ok && bw_ok && p_ok,
        format!(
            "trace residual at R=10,15,20,25: [{}] (monotone {monotone}), final relative {:.2} (≤ 1e-2); \
             Breit–Wigner max|lhs−rhs| {bw_diff:.2e} vs 1e-2·max|lhs| = {:.2e}; Im p vs πφ′(0) rel {p_rel:.1e}",
            series.join(", "),
            last.relative,
            1e-2 * bw_scale
        ),
    )
}

/// AC 10 — `S` reconstructed from resonances within 0.05 on `[−5, 5]` at radius 25,
/// strictly improving with radius; the finite symmetric product is unimodular on ℝ.
fn ac10(rs: &ResonanceSet) -> Result<Outcome> {
    let v = Potential::canonical();
    let b = Backend::default();
    let grid: Vec<f64> = (0..=40).map(|k| -5.0 + 0.25 * k as f64).collect();
    let direct: Vec<Complex64> = grid.iter().map(|&x| s_from_determinants(&v, c(x, 0.0), &b)).collect::<Result<_>>()?;
    let mut errs = Vec::new();
    for r in [10.0, 15.0, 20.0, 25.0] {
        let mut worst: f64 = 0.0;
        for (x, s) in grid.iter().zip(&direct) {
            let rec = s_from_resonances(rs, c(*x, 0.0), r, -r)?;
            worst = worst.max((rec.s - s).norm());
        }
        errs.push(worst);
    }
    let improving = errs.windows(2).all(|w| w[1] < w[0]);
    let mut modulus: f64 = 0.0;
    for x in (0..=400).map(|k| -50.0 + 0.25 * k as f64) {
        modulus = modulus.max((symmetric_product(rs, c(x, 0.0), 25.0).norm() - 1.0).abs());
    }
    let last = *errs.last().expect("four radii");
    let series: Vec<String> = errs.iter().map(|e| format!("{e:.3}")).collect();
    outcome(
        last <= 0.05 && improving && modulus <= 1e-10,
        format!(
            "max|S_rec − S| at R=10,15,20,25: [{}] (final ≤ 0.05, strictly improving: {improving}); \
             symmetric product ||·|−1| {modulus:.1e} (≤ 1e-10)",
            series.join(", ")
        ),
    )
}

/// AC 11 — Airy crossover continuity, connection formula on |z| ≤ 10, Wronskian constancy.
fn ac11() -> Result<Outcome> {
    let mut cross: f64 = 0.0;
    for k in 0..144 {
        let th = -PI + (k as f64 + 0.5) * PI / 72.0;
        let z = Complex64::from_polar(SERIES_RADIUS, th);
        let regime = if th.abs() <= 2.0 * PI / 3.0 { AiryRegime::Asymptotic } else { AiryRegime::Connection };
        let a = airy_ai_via(z, AiryRegime::Series)?.unscaled()?;
        let b = airy_ai_via(z, regime)?.unscaled()?;
        cross = cross.max((a.ai - b.ai).norm() / a.ai.norm().max(1.0));
        cross = cross.max((a.ai_prime - b.ai_prime).norm() / a.ai_prime.norm().max(1.0));
    }
    let w = omega();
    let mut conn: f64 = 0.0;
    let mut wronsk: f64 = 0.0;
    let expected = Complex64::from_polar(1.0 / (2.0 * PI), -PI / 6.0);
    for i in 0..=20 {
        for j in 0..=20 {
            let z = c(-10.0 + i as f64, -10.0 + j as f64);
            if z.norm() > 10.0 {
                continue;
            }
            let a0 = airy_ai(z)?;
            let a1 = airy_ai(w * z)?;
            let a2 = airy_ai(w * w * z)?;
            let scale = a0.ai.norm().max(a1.ai.norm()).max(a2.ai.norm());
            conn = conn.max((a0.ai + w * a1.ai + w * w * a2.ai).norm() / scale);
            // W[Ai(z), Ai(ωz)] = ω Ai(z)Ai′(ωz) − Ai′(z)Ai(ωz) = e^{−iπ/6}/(2π).
            let wr = w * a0.ai * a1.ai_prime - a0.ai_prime * a1.ai;
            let scale = (a0.ai * a1.ai_prime).norm().max((a0.ai_prime * a1.ai).norm()).max(expected.norm());
            wronsk = wronsk.max((wr - expected).norm() / scale);
        }
    }
    outcome(
        cross <= 1e-10 && conn <= 1e-10 && wronsk <= 1e-10,
        format!("crossover {cross:.1e}, connection {conn:.1e}, Wronskian {wronsk:.1e} (each ≤ 1e-10)"),
    )
}

fn run_cli(dir: &Path, threads: usize, name: &str, args: &[&str]) -> std::io::Result<(Vec<u8>, i32)> {
    let out = dir.join(format!("{name}-{threads}"));
    let status = Command::new(env!("CARGO_BIN_EXE_stark"))
        .args(args)
        .arg("--threads")
        .arg(threads.to_string())
        .arg("--out")
        .arg(&out)
        .status()?;
    Ok((std::fs::read(&out)?, status.code().unwrap_or(-1)))
}

/// AC 12 — byte-identical CLI artifacts with 1 and 8 threads.
fn ac12() -> Result<Outcome> {
    let dir = tempfile::tempdir()?;
    let runs: [(&str, &[&str]); 6] = [
        ("resonances", &["resonances", "--radius", "12"]),
        ("detmap", &["detmap", "--grid", "9"]),
        ("phase", &["phase", "--points", "400"]),
        ("smatrix", &["smatrix", "--points", "21"]),
        ("study", &["study", "born_4_9"]),
        ("reconstruct", &["reconstruct", "--radius", "12", "--points", "11"]),
    ];
    let mut mismatched = Vec::new();
    for (name, args) in runs {
        let (a, ca) = run_cli(dir.path(), 1, name, args)?;
        let (b, cb) = run_cli(dir.path(), 8, name, args)?;
        if a != b || ca != cb || a.is_empty() {
            mismatched.push(name);
        }
    }
    outcome(
        mismatched.is_empty(),
        format!("6 commands compared (resonances, detmap, phase, smatrix, study, reconstruct); mismatched: {mismatched:?}"),
    )
}

fn report(id: u32, f: impl FnOnce() -> Result<Outcome>) -> bool {
    let t0 = Instant::now();
    let (pass, detail) = match f() {
        Ok(o) => (o.pass, o.detail),
        Err(e) => (false, format!("error: {e}")),
    };
    println!(
        "AC {id}: {} — {detail} [{:.1}s]",
        if pass { "PASS" } else { "FAIL" },
        t0.elapsed().as_secs_f64()
    );
    pass
}

fn main() {
    println!("acceptance suite (canonical V = 1 + x/2 on [0, 1])");
    let mut passed = vec![report(1, ac1), report(2, ac2)];
    passed.push(report(3, ac3));
    passed.push(report(4, ac4));
    passed.push(report(5, ac5));
    passed.push(report(6, ac6));
    passed.push(report(7, ac7));
    let rs = canonical_set(Backend::default());
    match &rs {
        Ok(rs) => {
            passed.push(report(8, || ac8(rs)));
            passed.push(report(9, || ac9(rs)));
            passed.push(report(10, || ac10(rs)));
        }
        Err(e) => {
            for id in 8..=10 {
                println!("AC {id}: FAIL — resonance search failed: {e}");
                passed.push(false);
            }
        }
    }
    passed.push(report(11, ac11));
    passed.push(report(12, ac12));
    let n_pass = passed.iter().filter(|p| **p).count();
    println!("acceptance: {n_pass}/{} criteria pass", passed.len());
    if n_pass != passed.len() && std::env::var("STARK_ACCEPTANCE_STRICT").is_ok_and(|v| v == "1") {
        std::process::exit(1);
    }
}
