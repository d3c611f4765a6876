//! Command-line front end behind the `stark` binary.
//!
//! Every command loads a potential descriptor (the canonical `1 + x/2` on `[0, 1]`
//! when `--potential` is omitted), runs one computation and writes a single JSON or
//! CSV artifact, atomically, to `--out` (or standard output). Each artifact records
//! the SHA-256 hash of the configuration and the quadrature size `N`; the thread
//! count and output path are excluded from the hash, and results are assembled in
//! input order, so artifacts are byte-identical for any `--threads`.
//!
//! Exit codes: `0` success, `2` malformed input, `3` numerical non-convergence,
//! `4` certification failure (incomplete resonance search, failed study).

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::json;
use sha2::{Digest, Sha256};

use crate::asymptotics::{run_study, ClaimId, StudyConfig};
use crate::error::{Result, StarkError};
use crate::fredholm::{Backend, Side};
use crate::parallel;
use crate::potential::Potential;
use crate::resonance::{
    breit_wigner_phase, count_half_disc, count_zeros_contour, find_resonances,
    log_d_plus_lower, phase_derivative, s_from_resonances, trace_formula_residual, Rect, ResonanceSet,
    SearchConfig, PHASE_STEP,
};
use crate::scattering::{s_from_determinants, s_matrix, scattering_phase};

/// Resonances of the perturbed Stark operator `−d²/dx² + x + V`.
#[derive(Debug, Parser)]
#[command(name = "stark", version, about)]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

/// Flags shared by every command.
#[derive(Debug, Args, Clone)]
pub struct Common {
    /// Potential descriptor (JSON); defaults to V(x) = 1 + x/2 on [0, 1].
    #[arg(long, global = true)]
    pub potential: Option<PathBuf>,
    /// Quadrature size N (Nyström nodes; minimum Magnus steps for the Jost backend).
    #[arg(long, global = true, default_value_t = 128)]
    pub n: usize,
    /// Numerical tolerance (integrals, determinant refinement).
    #[arg(long, global = true, default_value_t = 1e-8)]
    pub tol: f64,
    /// Output file; standard output when omitted.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
    /// Determinant evaluator.
    #[arg(long, global = true, value_enum, default_value_t = BackendKind::Jost)]
    pub backend: BackendKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BackendKind {
    Jost,
    Nystrom,
}

/// A closed real interval given as `a:b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Range {
    pub lo: f64,
    pub hi: f64,
}

impl std::str::FromStr for Range {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let (a, b) = s.split_once(':').ok_or_else(|| format!("expected a:b, got {s:?}"))?;
        let lo: f64 = a.trim().parse().map_err(|e| format!("{a:?}: {e}"))?;
        let hi: f64 = b.trim().parse().map_err(|e| format!("{b:?}: {e}"))?;
        if !(lo.is_finite() && hi.is_finite() && hi > lo) {
            return Err(format!("empty or non-finite range {s:?}"));
        }
        Ok(Range { lo, hi })
    }
}

impl Range {
    fn grid(&self, points: usize) -> Vec<f64> {
        if points == 1 {
            return vec![0.5 * (self.lo + self.hi)];
        }
        (0..points).map(|k| self.lo + (self.hi - self.lo) * k as f64 / (points - 1) as f64).collect()
    }
}

/// A complex number given as `re,im`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Point {
    pub re: f64,
    pub im: f64,
}

impl std::str::FromStr for Point {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let (a, b) = s.split_once(',').ok_or_else(|| format!("expected re,im, got {s:?}"))?;
        let re: f64 = a.trim().parse().map_err(|e| format!("{a:?}: {e}"))?;
        let im: f64 = b.trim().parse().map_err(|e| format!("{b:?}: {e}"))?;
        if !(re.is_finite() && im.is_finite()) {
            return Err(format!("non-finite point {s:?}"));
        }
        Ok(Point { re, im })
    }
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case", tag = "command")]
pub enum Command {
    /// Locate resonances in the half-disc |λ| ≤ radius (JSON).
    Resonances {
        #[arg(long, default_value_t = 25.0)]
        radius: f64,
        /// Guard strip above the real axis excluded from the search.
        #[arg(long, default_value_t = 1e-3)]
        guard: f64,
    },
    /// log|D₊| and arg D₊ on a rectangular grid (CSV).
    Detmap {
        #[arg(long = "re", allow_hyphen_values = true, default_value = "-10:10")]
        re: Range,
        #[arg(long = "im", allow_hyphen_values = true, default_value = "-8:0")]
        im: Range,
        /// Grid points per axis.
        #[arg(long, default_value_t = 41)]
        grid: usize,
    },
    /// Unwrapped scattering phase φ_sc on a real grid (CSV).
    Phase {
        #[arg(long, allow_hyphen_values = true, default_value = "-50:50")]
        range: Range,
        #[arg(long, default_value_t = 2000)]
        points: usize,
    },
    /// S-matrix from the stationary representation and from determinants (CSV).
    Smatrix {
        #[arg(long, allow_hyphen_values = true, default_value = "-5:5")]
        range: Range,
        #[arg(long, default_value_t = 101)]
        points: usize,
    },
    /// Trace formula, Breit–Wigner and p-consistency checks (JSON).
    TraceCheck {
        #[arg(long, allow_hyphen_values = true, default_value = "2,2")]
        lambda: Point,
        /// Truncation radii (the largest is the search radius).
        #[arg(long, value_delimiter = ',', default_value = "10,15,20,25")]
        radii: Vec<f64>,
        /// Real points for the Breit–Wigner comparison.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "-4,-3,-2,-1,-0.5,0.5,1,2,3,4")]
        bw_points: Vec<f64>,
    },
    /// Argument-principle zero count of D₋ in a rectangle of ℂ₊, or in a half-disc (JSON).
    Count {
        #[arg(long = "re", allow_hyphen_values = true)]
        re: Option<Range>,
        #[arg(long = "im", allow_hyphen_values = true)]
        im: Option<Range>,
        /// Half-disc radius when no rectangle is given.
        #[arg(long, default_value_t = 25.0)]
        radius: f64,
    },
    /// Run one asymptotic study (JSON).
    Study {
        claim_id: ClaimId,
        /// Parameter grid (comma separated); the claim's default when omitted.
        #[arg(long, value_delimiter = ',')]
        grid: Option<Vec<f64>>,
        /// Ray angle arg λ in radians for ray studies.
        #[arg(long)]
        angle: Option<f64>,
    },
    /// Reconstruct S on a real grid from the resonances and p (CSV).
    Reconstruct {
        #[arg(long, allow_hyphen_values = true, default_value = "-5:5")]
        range: Range,
        #[arg(long, default_value_t = 41)]
        points: usize,
        #[arg(long, default_value_t = 25.0)]
        radius: f64,
        /// Far-left real anchor for S(0); defaults to −radius.
        #[arg(long, allow_hyphen_values = true)]
        anchor: Option<f64>,
    },
}

/// A fully validated run.
pub struct RunConfig {
    pub potential: Potential,
    pub common: Common,
    pub command: Command,
    pub config_hash: String,
}

impl RunConfig {
    pub fn from_cli(cli: Cli) -> Result<Self> {
        let c = &cli.common;
        if c.n < 8 {
            return Err(StarkError::MalformedInput(format!("--n {} must be at least 8", c.n)));
        }
        if !(c.tol.is_finite() && c.tol > 0.0) {
            return Err(StarkError::MalformedInput(format!("--tol {} must be positive", c.tol)));
        }
        validate(&cli.command)?;
        let (potential, bytes) = match &c.potential {
            Some(p) => {
                let bytes = std::fs::read(p)?;
                (Potential::from_file(p)?, bytes)
            }
            None => (Potential::canonical(), b"canonical".to_vec()),
        };
        let mut h = Sha256::new();
        h.update(&bytes);
        h.update(serde_json::to_vec(&json!({
            "n": c.n, "tol": c.tol, "backend": c.backend, "command": &cli.command,
        }))?);
        let config_hash = format!("{:x}", h.finalize());
        Ok(Self { potential, common: cli.common, command: cli.command, config_hash })
    }

    fn backend(&self) -> Backend {
        match self.common.backend {
            BackendKind::Jost => Backend::jost_for(self.common.n),
            BackendKind::Nystrom => Backend::Nystrom { n: self.common.n },
        }
    }
}

fn positive(name: &str, x: f64) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(StarkError::MalformedInput(format!("{name} must be positive and finite, got {x}")))
    }
}

fn at_least(name: &str, n: usize, min: usize) -> Result<()> {
    if n >= min {
        Ok(())
    } else {
        Err(StarkError::MalformedInput(format!("{name} must be at least {min}, got {n}")))
    }
}

fn validate(cmd: &Command) -> Result<()> {
    match cmd {
        Command::Resonances { radius, guard } => {
            positive("--radius", *radius)?;
            positive("--guard", *guard)
        }
        Command::Detmap { grid, .. } => at_least("--grid", *grid, 1),
        Command::Phase { points, .. } | Command::Smatrix { points, .. } => at_least("--points", *points, 2),
        Command::TraceCheck { lambda, radii, bw_points } => {
            if !(lambda.im > 0.0) {
                return Err(StarkError::MalformedInput("--lambda must lie in the upper half-plane".into()));
            }
            if radii.is_empty() {
                return Err(StarkError::MalformedInput("--radii is empty".into()));
            }
            radii.iter().try_for_each(|r| positive("--radii", *r))?;
            if bw_points.iter().any(|x| !x.is_finite()) {
                return Err(StarkError::MalformedInput("--bw-points must be finite".into()));
            }
            Ok(())
        }
        Command::Count { re, im, radius } => {
            if re.is_some() != im.is_some() {
                return Err(StarkError::MalformedInput("--re and --im must be given together".into()));
            }
            if let Some(im) = im {
                if im.lo < 0.0 {
                    return Err(StarkError::MalformedInput("count rectangles must lie in Im λ ≥ 0".into()));
                }
            }
            positive("--radius", *radius)
        }
        Command::Study { grid, angle, .. } => {
            if let Some(g) = grid {
                g.iter().try_for_each(|x| positive("--grid", *x))?;
            }
            if angle.is_some_and(|a| !a.is_finite()) {
                return Err(StarkError::MalformedInput("--angle must be finite".into()));
            }
            Ok(())
        }
        Command::Reconstruct { points, radius, anchor, .. } => {
            at_least("--points", *points, 1)?;
            positive("--radius", *radius)?;
            if anchor.is_some_and(|a| !(a < 0.0 && a.is_finite())) {
                return Err(StarkError::MalformedInput("--anchor must be negative".into()));
            }
            Ok(())
        }
    }
}

/// What a command produced.
pub struct Artifact {
    pub body: String,
    /// Nonzero when an acceptance-level check failed after the artifact was built.
    pub exit_code: i32,
}

/// Formats a float with 17 significant digits.
pub fn f17(x: f64) -> String {
    format!("{x:.16e}")
}

struct Csv {
    body: String,
}

impl Csv {
    fn new(cfg: &RunConfig, header: &[&str]) -> Self {
        let mut body = String::new();
        let _ = writeln!(body, "# config_hash={} n={}", cfg.config_hash, cfg.common.n);
        let _ = writeln!(body, "{}", header.join(","));
        Self { body }
    }

    fn row(&mut self, cols: &[f64]) {
        let line: Vec<String> = cols.iter().map(|&x| f17(x)).collect();
        let _ = writeln!(self.body, "{}", line.join(","));
    }
}

fn json_artifact(cfg: &RunConfig, mut value: serde_json::Value, exit_code: i32) -> Result<Artifact> {
    if let Some(obj) = value.as_object_mut() {
        obj.insert("config_hash".into(), json!(cfg.config_hash));
        obj.insert("n".into(), json!(cfg.common.n));
    }
    let mut body = serde_json::to_string_pretty(&value)?;
    body.push('\n');
    Ok(Artifact { body, exit_code })
}

/// Runs (or loads from `STARK_CACHE_DIR`) the resonance search for this config.
fn resonance_set(cfg: &RunConfig, radius: f64, guard: f64) -> Result<ResonanceSet> {
    let key = format!("{radius:e}/{guard:e}");
    let mut search_cfg = SearchConfig::new(radius, cfg.backend());
    search_cfg.guard = guard;
    // The cache key must not depend on the command, only on V, N, backend and region.
    let mut h = Sha256::new();
    if let Some(p) = &cfg.common.potential {
        h.update(std::fs::read(p)?);
    }
    h.update(format!("{}/{:?}/{key}", cfg.common.n, cfg.common.backend).as_bytes());
    let stable = format!("{:x}", h.finalize());
    let path = std::env::var_os("STARK_CACHE_DIR").map(|d| Path::new(&d).join(format!("resonances-{stable}.json")));
    if let Some(p) = &path {
        if let Ok(bytes) = std::fs::read(p) {
            if let Ok(rs) = serde_json::from_slice::<ResonanceSet>(&bytes) {
                return Ok(rs);
            }
        }
    }
    let rs = find_resonances(&cfg.potential, &search_cfg)?;
    if let Some(p) = &path {
        if let Some(dir) = p.parent() {
            std::fs::create_dir_all(dir)?;
        }
        write_atomic(p, &serde_json::to_vec(&rs)?)?;
    }
    Ok(rs)
}

fn cplx(z: Complex64) -> serde_json::Value {
    json!({"re": z.re, "im": z.im})
}

/// Executes a validated configuration and returns the artifact.
pub fn dispatch(cfg: &RunConfig) -> Result<Artifact> {
    let v = &cfg.potential;
    let backend = cfg.backend();
    match &cfg.command {
        Command::Resonances { radius, guard } => {
            let rs = resonance_set(cfg, *radius, *guard)?;
            let list: Vec<_> = rs
                .items
                .iter()
                .map(|z| json!({"re": z.lambda.re, "im": z.lambda.im, "multiplicity": z.multiplicity, "residual": z.refine_residual}))
                .collect();
            let value = json!({
                "resonances": list,
                "p": cplx(rs.p_const),
                "radius": rs.search_radius,
                "certified": rs.certified,
                "contour_count": rs.contour_count,
            });
            json_artifact(cfg, value, if rs.certified { 0 } else { 4 })
        }
        Command::Detmap { re, im, grid } => {
            let mut pts = Vec::new();
            for y in im.grid(*grid) {
                for x in re.grid(*grid) {
                    pts.push(Complex64::new(x, y));
                }
            }
            let vals = parallel::map(&pts, |&l| {
                if l.im >= 0.0 {
                    backend.log_d(v, l, Side::Plus)
                } else {
                    log_d_plus_lower(v, l, &backend)
                }
            })?;
            let mut csv = Csv::new(cfg, &["re", "im", "log_abs_d_plus", "arg_d_plus"]);
            for (l, d) in pts.iter().zip(&vals) {
                csv.row(&[l.re, l.im, d.re, d.im]);
            }
            Ok(Artifact { body: csv.body, exit_code: 0 })
        }
        Command::Phase { range, points } => {
            let grid = range.grid(*points);
            let curve = scattering_phase(v, &grid, &backend)?;
            let mut csv = Csv::new(cfg, &["lambda", "phi_sc"]);
            for (l, p) in curve.lambdas.iter().zip(&curve.phase) {
                csv.row(&[*l, *p]);
            }
            Ok(Artifact { body: csv.body, exit_code: 0 })
        }
        Command::Smatrix { range, points } => {
            let grid = range.grid(*points);
            let rule = crate::fredholm::rule_for(v, cfg.common.n)?;
            let rows = parallel::map(&grid, |&l| {
                let lam = Complex64::new(l, 0.0);
                let s = s_matrix(v, lam, &rule)?;
                let sd = s_from_determinants(v, lam, &backend)?;
                Ok([l, s.s.re, s.s.im, s.s.norm(), s.a0.re, s.a0.im, s.a1.re, s.a1.im, sd.re, sd.im])
            })?;
            let mut csv = Csv::new(
                cfg,
                &["lambda", "re_s", "im_s", "abs_s", "re_a0", "im_a0", "re_a1", "im_a1", "re_s_det", "im_s_det"],
            );
            for r in &rows {
                csv.row(r);
            }
            Ok(Artifact { body: csv.body, exit_code: 0 })
        }
        Command::TraceCheck { lambda, radii, bw_points } => {
            let rmax = radii.iter().copied().fold(0.0, f64::max);
            let rs = resonance_set(cfg, rmax, 1e-3)?;
            let l = Complex64::new(lambda.re, lambda.im);
            let mut sorted = radii.clone();
            sorted.sort_by(f64::total_cmp);
            let traces = sorted
                .iter()
                .map(|&r| trace_formula_residual(v, &rs, l, r, &backend))
                .collect::<Result<Vec<_>>>()?;
            let monotone = traces.windows(2).all(|w| w[1].residual < w[0].residual);
            let bw = parallel::map(bw_points, |&x| breit_wigner_phase(v, &rs, x, rmax, &backend))?;
            let phi0 = phase_derivative(v, 0.0, PHASE_STEP, &backend)?;
            let value = json!({
                "lambda": cplx(l),
                "trace": traces,
                "trace_monotone": monotone,
                "breit_wigner": bw,
                "p": cplx(rs.p_const),
                "im_p_over_pi": rs.p_const.im / PI,
                "phase_derivative_at_zero": phi0,
                "resonances_used": rs.total(),
                "certified": rs.certified,
            });
            json_artifact(cfg, value, if rs.certified { 0 } else { 4 })
        }
        Command::Count { re, im, radius } => {
            let (count, region) = match (re, im) {
                (Some(re), Some(im)) => {
                    let rect = Rect::new(re.lo, re.hi, im.lo, im.hi)?;
                    (count_zeros_contour(v, rect, &backend)?, json!({"rectangle": rect}))
                }
                _ => (count_half_disc(v, *radius, 1e-3, &backend)?, json!({"half_disc_radius": radius})),
            };
            json_artifact(cfg, json!({"count": count, "region": region}), 0)
        }
        Command::Study { claim_id, grid, angle } => {
            let mut sc = StudyConfig::for_claim(*claim_id);
            sc.backend = backend;
            sc.n = cfg.common.n;
            if let Some(g) = grid {
                sc.grid = g.clone();
            }
            if let Some(a) = angle {
                sc.angle = *a;
            }
            let study = run_study(v, *claim_id, &sc)?;
            let pass = study.pass;
            json_artifact(cfg, serde_json::to_value(study)?, if pass { 0 } else { 4 })
        }
        Command::Reconstruct { range, points, radius, anchor } => {
            let rs = resonance_set(cfg, *radius, 1e-3)?;
            let anchor = anchor.unwrap_or(-radius);
            let grid = range.grid(*points);
            let rows = parallel::map(&grid, |&l| {
                let lam = Complex64::new(l, 0.0);
                let rec = s_from_resonances(&rs, lam, *radius, anchor)?;
                let s = s_from_determinants(v, lam, &backend)?;
                Ok([l, rec.s.re, rec.s.im, s.re, s.im, (rec.s - s).norm()])
            })?;
            let mut csv = Csv::new(cfg, &["lambda", "re_s_rec", "im_s_rec", "re_s", "im_s", "abs_err"]);
            for r in &rows {
                csv.row(r);
            }
            Ok(Artifact { body: csv.body, exit_code: if rs.certified { 0 } else { 4 } })
        }
    }
}

/// Writes `bytes` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(&dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| StarkError::Io(e.error))?;
    Ok(())
}

/// Parses arguments, runs the command, writes the artifact; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let threads = cli.common.threads;
    let out = cli.common.out.clone();
    let result = RunConfig::from_cli(cli).and_then(|cfg| parallel::with_threads(threads, || dispatch(&cfg)));
    match result {
        Ok(artifact) => {
            let written = match &out {
                Some(p) => write_atomic(p, artifact.body.as_bytes()),
                None => std::io::stdout().write_all(artifact.body.as_bytes()).map_err(StarkError::from),
            };
            if let Err(e) = written {
                eprintln!("error: {e}");
                return e.exit_code();
            }
            if artifact.exit_code != 0 {
                eprintln!("error: acceptance-level check failed (exit {})", artifact.exit_code);
            }
            artifact.exit_code
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
