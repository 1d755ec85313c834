//! Verification suites and report assembly behind the `overalg` binary.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use num_complex::Complex64;
use overalg::arith::c;
use overalg::hahn::{cdh_match_report, orthogonality_gram, q0_eigen_residual, HahnMatchReport};
use overalg::kernel::{
    cross_parseval, parseval_check, parseval_constant, plancherel_weight, plancherel_weight_product_form, transform, SMax,
};
use overalg::model::{AlgebraOp, Alpha, CoefMatrix};
use overalg::spectral::{kernel_identity_residual, verify_intertwine, SamplePoint, SpectralOp};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] overalg::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    Usage(String),
}

pub type Result<T> = std::result::Result<T, CliError>;

/// Upper end of the s-integration: fixed or chosen from the tail bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SMaxArg {
    Auto,
    Value(f64),
}

impl FromStr for SMaxArg {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(SMaxArg::Auto);
        }
        match s.parse::<f64>() {
            Ok(v) if v > 0.0 && v.is_finite() => Ok(SMaxArg::Value(v)),
            _ => Err(format!("expected \"auto\" or a positive number, got {s:?}")),
        }
    }
}

impl fmt::Display for SMaxArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SMaxArg::Auto => f.write_str("auto"),
            SMaxArg::Value(v) => write!(f, "{v}"),
        }
    }
}

impl Serialize for SMaxArg {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            SMaxArg::Auto => s.serialize_str("auto"),
            SMaxArg::Value(v) => s.serialize_f64(*v),
        }
    }
}

impl From<SMaxArg> for SMax {
    fn from(v: SMaxArg) -> SMax {
        match v {
            SMaxArg::Auto => SMax::Auto,
            SMaxArg::Value(x) => SMax::Fixed(x),
        }
    }
}

/// Parses a weight parameter, rejecting α ≤ 1.
pub fn parse_alpha(s: &str) -> std::result::Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("not a number: {s:?}"))?;
    Alpha::new(v).map(Alpha::value).map_err(|e| e.to_string())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub alpha: f64,
    pub degree: usize,
    pub num_points: usize,
    pub pole_margin: f64,
    pub seed: u64,
    pub tolerance: f64,
    pub s_max: SMaxArg,
    pub functions: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            alpha: 2.0,
            degree: 6,
            num_points: 100,
            pole_margin: 0.05,
            seed: 0,
            tolerance: 1e-9,
            s_max: SMaxArg::Auto,
            functions: 20,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<Alpha> {
        let alpha = Alpha::new(self.alpha).map_err(|e| CliError::Usage(e.to_string()))?;
        if !(self.tolerance > 0.0) {
            return Err(CliError::Usage(format!("tolerance must be positive, got {}", self.tolerance)));
        }
        if !(self.pole_margin > 0.0 && self.pole_margin < 0.5) {
            return Err(CliError::Usage(format!("pole margin must lie in (0, 0.5), got {}", self.pole_margin)));
        }
        if self.num_points == 0 || self.functions == 0 {
            return Err(CliError::Usage("need at least one point and one function".into()));
        }
        Ok(alpha)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Intertwine,
    KernelIdentity,
    Parseval,
    Eigen,
    Hahn,
    All,
}

/// One verified relation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Record {
    pub pair: String,
    pub alpha: f64,
    pub num_points: usize,
    pub max_residual: f64,
    pub pole_margin: f64,
    pub seed: u64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParsevalSummary {
    /// Mean of ‖J f‖² / ‖f‖² over the test functions.
    pub constant: f64,
    /// π⁵/(α−1)⁴ for comparison.
    pub closed_form: f64,
    pub ratios: Vec<f64>,
    pub spread: f64,
    pub polarized_spread: f64,
    /// Spread over modes and test functions of F_m(−s)/F_m(s); zero would mean
    /// the s ↦ −s symmetry acts as a mode multiplier. Observed, not asserted.
    pub reflection_ratio_spread: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Default)]
pub struct Details {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub parseval: Option<ParsevalSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hahn: Option<HahnMatchReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub schema: u32,
    pub suite: Suite,
    pub config: RunConfig,
    pub passed: bool,
    pub records: Vec<Record>,
    pub details: Details,
}

impl Report {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    /// Lines naming each failed record.
    pub fn failures(&self) -> Vec<String> {
        self.records
            .iter()
            .filter(|r| !r.passed)
            .map(|r| format!("{}: max residual {:e} above tolerance", r.pair, r.max_residual))
            .collect()
    }
}

struct Ctx {
    config: RunConfig,
    alpha: Alpha,
    rng: ChaCha8Rng,
}

impl Ctx {
    fn record(&self, pair: impl Into<String>, num_points: usize, max_residual: f64) -> Record {
        Record {
            pair: pair.into(),
            alpha: self.config.alpha,
            num_points,
            max_residual,
            pole_margin: self.config.pole_margin,
            seed: self.config.seed,
            passed: max_residual <= self.config.tolerance,
        }
    }

    /// `num_points` real points s ∈ [0.1, 6] and a fifth as many with |Im s| ≤ 1.
    fn sample_points(&mut self) -> Vec<SamplePoint> {
        let n = self.config.num_points;
        let margin = self.config.pole_margin;
        let mut pts = Vec::with_capacity(n + n / 5);
        while pts.len() < n {
            let phi = self.rng.random_range(0.0..std::f64::consts::TAU);
            if let Ok(p) = SamplePoint::new(phi, c(self.rng.random_range(0.1..6.0), 0.0), margin) {
                pts.push(p);
            }
        }
        while pts.len() < n + n / 5 {
            let phi = self.rng.random_range(0.0..std::f64::consts::TAU);
            let s = c(self.rng.random_range(-3.0..3.0), self.rng.random_range(-1.0..1.0));
            if let Ok(p) = SamplePoint::new(phi, s, margin) {
                pts.push(p);
            }
        }
        pts
    }

    fn disk_point(&mut self) -> Complex64 {
        let r = 0.8 * self.rng.random::<f64>().sqrt();
        Complex64::from_polar(r, self.rng.random_range(0.0..std::f64::consts::TAU))
    }

    fn functions(&mut self, input: Option<&CoefMatrix>) -> Vec<CoefMatrix> {
        match input {
            Some(f) => vec![f.clone()],
            None => (0..self.config.functions)
                .map(|_| CoefMatrix::random(self.alpha, self.config.degree, &mut self.rng))
                .collect(),
        }
    }
}

const PAIRS: [(AlgebraOp, SpectralOp); 6] = [
    (AlgebraOp::L0, SpectralOp::D0),
    (AlgebraOp::L1, SpectralOp::D1),
    (AlgebraOp::Lm1, SpectralOp::Dm1),
    (AlgebraOp::M0, SpectralOp::Q0),
    (AlgebraOp::M1, SpectralOp::Q1),
    (AlgebraOp::Mm1, SpectralOp::Qm1),
];

fn run_intertwine(ctx: &mut Ctx, input: Option<&CoefMatrix>) -> Result<Vec<Record>> {
    let fs = ctx.functions(input);
    let pts = ctx.sample_points();
    PAIRS
        .iter()
        .map(|&(m, q)| {
            let worst = fs
                .iter()
                .map(|f| verify_intertwine(f, m, q, &pts))
                .try_fold(0.0f64, |acc, r| r.map(|v| acc.max(v)))?;
            Ok(ctx.record(format!("{m}/{q}"), pts.len(), worst))
        })
        .collect()
}

fn run_kernel_identity(ctx: &mut Ctx) -> Result<Vec<Record>> {
    let n = ctx.config.num_points;
    let mut real = 0.0f64;
    for _ in 0..n {
        let (z, u) = (ctx.disk_point(), ctx.disk_point());
        let phi = ctx.rng.random_range(0.0..std::f64::consts::TAU);
        let s = c(ctx.rng.random_range(0.1..5.0), 0.0);
        real = real.max(kernel_identity_residual(z, u, phi, s, ctx.alpha)?);
    }
    let mut complex = 0.0f64;
    let mut taken = 0;
    while taken < n / 5 {
        let phi = ctx.rng.random_range(0.0..std::f64::consts::TAU);
        let s = c(ctx.rng.random_range(0.1..5.0), ctx.rng.random_range(-1.0..1.0));
        if SamplePoint::new(phi, s, ctx.config.pole_margin).is_err() {
            continue;
        }
        let (z, u) = (ctx.disk_point(), ctx.disk_point());
        complex = complex.max(kernel_identity_residual(z, u, phi, s, ctx.alpha)?);
        taken += 1;
    }
    Ok(vec![
        ctx.record("kernel identity, real s", n, real),
        ctx.record("kernel identity, complex s", n / 5, complex),
    ])
}

fn reflection_spread(fs: &[CoefMatrix]) -> f64 {
    let mut ratios: std::collections::BTreeMap<i32, Vec<Complex64>> = Default::default();
    let s = c(1.3, 0.0);
    for f in fs {
        let jf = transform(f);
        let (plus, minus) = (jf.mode_values(s), jf.mode_values(-s));
        for (m, v) in plus {
            if v.norm() > 1e-12 {
                ratios.entry(m).or_default().push(minus[&m] / v);
            }
        }
    }
    ratios
        .values()
        .flat_map(|rs| rs.iter().map(move |r| (r - rs[0]).norm() / rs[0].norm().max(1e-300)))
        .fold(0.0, f64::max)
}

fn run_parseval(ctx: &mut Ctx, input: Option<&CoefMatrix>) -> Result<(Vec<Record>, ParsevalSummary)> {
    let mut fs: Vec<CoefMatrix> = (0..10)
        .map(|_| CoefMatrix::random(ctx.alpha, ctx.config.degree, &mut ctx.rng))
        .collect();
    if let Some(f) = input {
        fs.insert(0, f.clone());
    }
    let s_max = SMax::from(ctx.config.s_max);
    let quad_tol = 1e-10;
    let ratios = fs
        .iter()
        .filter(|f| !f.is_zero())
        .map(|f| Ok(parseval_check(f, s_max, quad_tol)?.ratio.unwrap_or(f64::NAN)))
        .collect::<Result<Vec<f64>>>()?;
    let constant = ratios.iter().sum::<f64>() / ratios.len() as f64;
    let spread = ratios.iter().map(|r| (r - constant).abs()).fold(0.0, f64::max) / constant;
    let mut polarized = 0.0f64;
    for w in fs.windows(2) {
        match cross_parseval(&w[0], &w[1], s_max, quad_tol) {
            Ok(r) => polarized = polarized.max((r - constant).norm() / constant),
            Err(overalg::Error::InvalidArgument(_)) => {}
            Err(e) => return Err(e.into()),
        }
    }
    let n = ratios.len();
    let records = vec![
        ctx.record("parseval ratio spread", n, spread),
        ctx.record("polarized parseval spread", n.saturating_sub(1), polarized),
    ];
    let summary = ParsevalSummary {
        constant,
        closed_form: parseval_constant(ctx.alpha),
        ratios,
        spread,
        polarized_spread: polarized,
        reflection_ratio_spread: reflection_spread(&fs),
    };
    Ok((records, summary))
}

fn run_eigen(ctx: &mut Ctx) -> Result<Vec<Record>> {
    let n = ctx.config.num_points;
    let pts: Vec<f64> = (0..n).map(|j| 0.2 + 5.8 * j as f64 / (n.max(2) - 1) as f64).collect();
    (0..=ctx.config.degree)
        .map(|k| {
            let r = q0_eigen_residual(k, ctx.alpha, &pts)?;
            let lambda = 2.0 * k as f64 + ctx.config.alpha;
            Ok(ctx.record(format!("Q0 g_{k} = {lambda} g_{k}"), n, r))
        })
        .collect()
}

fn run_hahn(ctx: &mut Ctx) -> Result<(Vec<Record>, HahnMatchReport)> {
    let report = cdh_match_report(ctx.alpha, ctx.config.degree.min(12))?;
    let k = ctx.config.degree.min(6);
    let gram = orthogonality_gram(ctx.alpha, k, ctx.config.s_max.into(), 1e-10)?;
    let off = gram
        .iter()
        .enumerate()
        .flat_map(|(i, row)| row.iter().enumerate().filter(move |(j, _)| *j != i).map(|(_, v)| *v))
        .fold(0.0, f64::max);
    let p = report.best.params;
    let records = vec![
        ctx.record(
            format!("dual Hahn ({}, {}, {})", p.a, p.b, p.c),
            report.grid_points,
            report.best.max_residual,
        ),
        ctx.record(format!("orthogonality of (zu)^k, k <= {k}"), k + 1, off),
    ];
    Ok((records, report))
}

/// Runs one suite (or all) and assembles the report. `input` replaces the
/// random test functions of the intertwine suite and joins the Parseval set.
pub fn run_verify(config: &RunConfig, suite: Suite, input: Option<&CoefMatrix>) -> Result<Report> {
    let alpha = config.validate()?;
    if let Some(f) = input {
        if f.alpha() != alpha {
            return Err(CliError::Usage(format!(
                "input has alpha {} but the run uses {}",
                f.alpha().value(),
                config.alpha
            )));
        }
    }
    let mut ctx = Ctx {
        config: config.clone(),
        alpha,
        rng: ChaCha8Rng::seed_from_u64(config.seed),
    };
    let mut records = Vec::new();
    let mut details = Details::default();
    let wants = |s: Suite| suite == s || suite == Suite::All;
    if wants(Suite::Intertwine) {
        records.extend(run_intertwine(&mut ctx, input)?);
    }
    if wants(Suite::KernelIdentity) {
        records.extend(run_kernel_identity(&mut ctx)?);
    }
    if wants(Suite::Parseval) {
        let (r, summary) = run_parseval(&mut ctx, input)?;
        records.extend(r);
        details.parseval = Some(summary);
    }
    if wants(Suite::Eigen) {
        records.extend(run_eigen(&mut ctx)?);
    }
    if wants(Suite::Hahn) {
        let (r, report) = run_hahn(&mut ctx)?;
        records.extend(r);
        details.hahn = Some(report);
    }
    Ok(Report {
        schema: SCHEMA_VERSION,
        suite,
        config: config.clone(),
        passed: records.iter().all(|r| r.passed),
        records,
        details,
    })
}

/// Parses `start:stop:step`, a comma list, or the empty string.
pub fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let text = text.trim();
    let bad = || CliError::Usage(format!("bad s-grid {text:?}"));
    let grid: Vec<f64> = if text.is_empty() {
        Vec::new()
    } else if text.contains(':') {
        let parts: Vec<f64> = text
            .split(':')
            .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
            .collect::<Result<_>>()?;
        let [start, stop, step] = parts[..] else {
            return Err(bad());
        };
        if !(step > 0.0) || stop < start {
            return Err(bad());
        }
        let n = ((stop - start) / step + 1e-9).floor() as usize;
        (0..=n).map(|j| start + step * j as f64).collect()
    } else {
        text.split(',')
            .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
            .collect::<Result<_>>()?
    };
    if let Some(s) = grid.iter().find(|s| !(0.0..=50.0).contains(*s)) {
        return Err(CliError::Usage(format!("grid point {s} outside [0, 50]")));
    }
    Ok(grid)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DensityRow {
    pub s: f64,
    pub weight_left_form: f64,
    pub weight_right_form: f64,
    pub abs_diff: f64,
}

pub fn density_rows(alpha: Alpha, grid: &[f64]) -> Vec<DensityRow> {
    grid.iter()
        .map(|&s| {
            let (l, r) = (plancherel_weight(s, alpha), plancherel_weight_product_form(s, alpha));
            DensityRow {
                s,
                weight_left_form: l,
                weight_right_form: r,
                abs_diff: (l - r).abs(),
            }
        })
        .collect()
}

/// Writes the density table, header first even when the grid is empty.
pub fn write_density<W: Write>(out: W, rows: &[DensityRow]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(["s", "weight_left_form", "weight_right_form", "abs_diff"])?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
