//! Construction of a function whose summatory function is as large as the
//! zero-on-the-line bound allows, plus desk-scale checks of each step.
//!
//! Everything that grows doubly exponentially is handled in the coordinate
//! `v = log log x`: a target `kappa` is regularized into `kappa0` (running max)
//! and `kappa1` (with `kappa1 / sqrt(v)` nonincreasing), turned into a decaying
//! `alpha`, and `alpha` fixes the tilt `a_j` of each block `[x_j, x_j^{log x_j})`.
//! Blocks are stored as `(log x_j, log upper_j)`, so specs stay well defined
//! long after `x_j` leaves floating range.

use std::f64::consts::E;
use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dirichlet::{pow_neg, ComplexPoint};
use crate::error::{LabError, Result};
use crate::multfun::{ClassFlags, MultiplicativeFunction, PrimePowerRule, PrimeTail};
use crate::primes::{reciprocal_prefix_sums, PrimeTable};
use crate::sum::{CompensatedSum, ComplexSum};

/// `log log 3`, the left end of the domain of `kappa`.
pub fn loglog_min() -> f64 {
    3f64.ln().ln()
}

/// `log log 16`; `alpha` and the blocks live at or above this.
pub fn loglog_16() -> f64 {
    16f64.ln().ln()
}

pub const DEFAULT_LOGLOG_CAP: f64 = 40.0;
pub const DEFAULT_LOGLOG_STEP: f64 = 0.01;
pub const DEFAULT_C0: f64 = 1.0;
pub const ALPHA_FLOOR: f64 = 1e-6;
pub const DEFAULT_L2_BUDGET: f64 = 25.0;

/// Uniform grid in `v = log log x` from `log log 3` to a cap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogLogGrid {
    pub v_max: f64,
    pub step: f64,
}

impl Default for LogLogGrid {
    fn default() -> Self {
        Self {
            v_max: DEFAULT_LOGLOG_CAP,
            step: DEFAULT_LOGLOG_STEP,
        }
    }
}

impl LogLogGrid {
    pub fn points(&self) -> Result<Vec<f64>> {
        let v0 = loglog_min();
        if !(self.step > 0.0 && self.v_max > v0 && self.v_max.is_finite()) {
            return Err(LabError::MalformedParams(format!(
                "bad log-log grid: cap {} step {}",
                self.v_max, self.step
            )));
        }
        let n = ((self.v_max - v0) / self.step).floor() as usize;
        let mut pts: Vec<f64> = (0..=n).map(|i| v0 + i as f64 * self.step).collect();
        if *pts.last().unwrap() < self.v_max {
            pts.push(self.v_max);
        }
        Ok(pts)
    }
}

/// The `kappa` vocabulary, as functions of `v = log log x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "param", rename_all = "kebab-case")]
pub enum KappaSpec {
    /// `c`
    Const(f64),
    /// `v^e`, `e < 1/2`
    Power(f64),
    /// `c sqrt(v) / log v`, with the denominator floored at 1 so the
    /// function stays positive and continuous below `v = e`.
    LoglogFraction(f64),
}

impl KappaSpec {
    pub fn eval(&self, v: f64) -> f64 {
        match *self {
            KappaSpec::Const(c) => c,
            KappaSpec::Power(e) => v.powf(e),
            KappaSpec::LoglogFraction(c) => c * v.sqrt() / v.ln().max(1.0),
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            KappaSpec::Const(c) | KappaSpec::LoglogFraction(c) => c.is_finite() && c > 0.0,
            KappaSpec::Power(e) => e.is_finite() && e < 0.5,
        };
        if ok {
            Ok(())
        } else {
            Err(LabError::MalformedParams(format!(
                "kappa `{self}` is not o(sqrt(log log x)) and positive"
            )))
        }
    }
}

impl fmt::Display for KappaSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KappaSpec::Const(c) => write!(f, "const:{c}"),
            KappaSpec::Power(e) => write!(f, "power:{e}"),
            KappaSpec::LoglogFraction(c) => write!(f, "loglog-fraction:{c}"),
        }
    }
}

impl FromStr for KappaSpec {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || LabError::MalformedParams(format!("bad kappa spec `{s}`"));
        let (kind, param) = s.split_once(':').ok_or_else(bad)?;
        let x: f64 = param.parse().map_err(|_| bad())?;
        let spec = match kind {
            "const" => KappaSpec::Const(x),
            "power" => KappaSpec::Power(x),
            "loglog-fraction" => KappaSpec::LoglogFraction(x),
            _ => return Err(bad()),
        };
        spec.validate()?;
        Ok(spec)
    }
}

type RawFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A regularized `kappa`, sampled on a log-log grid.
#[derive(Clone)]
pub struct KappaFunction {
    raw: RawFn,
    grid: LogLogGrid,
    v: Vec<f64>,
    raw_samples: Vec<f64>,
    kappa0: Vec<f64>,
    kappa1: Vec<f64>,
}

impl fmt::Debug for KappaFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("KappaFunction")
            .field("grid", &self.grid)
            .field("samples", &self.v.len())
            .finish()
    }
}

/// Running max (`kappa0`) and the regularization
/// `kappa1(v) = sqrt(v) * max_{grid y in [v, cap]} kappa0(y)/sqrt(y)`.
///
/// `raw` is a function of `v = log log x` and must be positive on the grid.
pub fn regularize_kappa<F>(raw: F, grid: LogLogGrid) -> Result<KappaFunction>
where
    F: Fn(f64) -> f64 + Send + Sync + 'static,
{
    let v = grid.points()?;
    let raw_samples: Vec<f64> = v.iter().map(|&x| raw(x)).collect();
    if let Some(i) = raw_samples.iter().position(|&k| !(k > 0.0 && k.is_finite())) {
        return Err(LabError::Domain(format!(
            "kappa must be positive; got {} at log log x = {}",
            raw_samples[i], v[i]
        )));
    }
    let mut kappa0 = Vec::with_capacity(v.len());
    let mut run = f64::NEG_INFINITY;
    for &k in &raw_samples {
        run = run.max(k);
        kappa0.push(run);
    }
    let mut kappa1 = vec![0.0; v.len()];
    let mut suffix = f64::NEG_INFINITY;
    for i in (0..v.len()).rev() {
        suffix = suffix.max(kappa0[i] / v[i].sqrt());
        kappa1[i] = v[i].sqrt() * suffix;
    }
    Ok(KappaFunction {
        raw: Arc::new(raw),
        grid,
        v,
        raw_samples,
        kappa0,
        kappa1,
    })
}

impl KappaFunction {
    pub fn from_spec(spec: KappaSpec, grid: LogLogGrid) -> Result<Self> {
        spec.validate()?;
        regularize_kappa(move |v| spec.eval(v), grid)
    }

    pub fn grid(&self) -> LogLogGrid {
        self.grid
    }

    /// Grid abscissae `v = log log x`.
    pub fn loglog_points(&self) -> &[f64] {
        &self.v
    }

    pub fn raw_samples(&self) -> &[f64] {
        &self.raw_samples
    }

    pub fn kappa0_samples(&self) -> &[f64] {
        &self.kappa0
    }

    pub fn kappa1_samples(&self) -> &[f64] {
        &self.kappa1
    }

    pub fn raw(&self, v: f64) -> f64 {
        (self.raw)(v)
    }

    fn interpolate(&self, samples: &[f64], v: f64) -> f64 {
        let i = self.v.partition_point(|&x| x <= v);
        if i == 0 {
            return samples[0];
        }
        if i == self.v.len() {
            return samples[i - 1];
        }
        let (x0, x1) = (self.v[i - 1], self.v[i]);
        let w = (v - x0) / (x1 - x0);
        samples[i - 1] * (1.0 - w) + samples[i] * w
    }

    fn check_domain(&self, v: f64) -> Result<()> {
        if v.is_nan() || v < loglog_min() - 1e-12 {
            Err(LabError::Domain(format!(
                "kappa is defined for x >= 3 (log log x >= {}), got {v}",
                loglog_min()
            )))
        } else {
            Ok(())
        }
    }

    /// `kappa0` at `v = log log x`. Past the cap, `max(kappa0(cap), raw(v))`.
    pub fn kappa0(&self, v: f64) -> Result<f64> {
        self.check_domain(v)?;
        let cap = *self.v.last().unwrap();
        if v > cap {
            Ok(self.kappa0.last().unwrap().max(self.raw(v)))
        } else {
            Ok(self.interpolate(&self.kappa0, v))
        }
    }

    /// `kappa1` at `v = log log x`; the supremum is truncated at the cap, so
    /// past it `kappa1 = kappa0`.
    pub fn kappa1(&self, v: f64) -> Result<f64> {
        self.check_domain(v)?;
        let cap = *self.v.last().unwrap();
        if v > cap {
            self.kappa0(v)
        } else {
            Ok(self.interpolate(&self.kappa1, v))
        }
    }
}

/// `alpha(X)` as a function of `v = log log X`: the nonincreasing envelope of
/// `(kappa1 + log(v + 1/e) + C0) / sqrt(v)`, floored at [`ALPHA_FLOOR`].
#[derive(Debug, Clone)]
pub struct AlphaFunction {
    kappa: KappaFunction,
    c0: f64,
    /// Grid points with `v >= log log 16`.
    v: Vec<f64>,
    /// Suffix maxima of the raw formula over those points.
    envelope: Vec<f64>,
}

pub fn alpha_from_kappa(kappa: &KappaFunction, c0: f64) -> Result<AlphaFunction> {
    if !(c0.is_finite() && c0 >= 0.0) {
        return Err(LabError::MalformedParams(format!("C0 must be >= 0, got {c0}")));
    }
    let start = loglog_16();
    let v: Vec<f64> = kappa
        .loglog_points()
        .iter()
        .copied()
        .filter(|&x| x >= start)
        .collect();
    let mut alpha = AlphaFunction {
        kappa: kappa.clone(),
        c0,
        v,
        envelope: Vec::new(),
    };
    let raw: Vec<f64> = alpha
        .v
        .iter()
        .map(|&x| alpha.formula(x))
        .collect::<Result<_>>()?;
    let mut env = vec![0.0; raw.len()];
    let mut m = f64::NEG_INFINITY;
    for i in (0..raw.len()).rev() {
        m = m.max(raw[i]);
        env[i] = m;
    }
    alpha.envelope = env;
    Ok(alpha)
}

impl AlphaFunction {
    pub fn c0(&self) -> f64 {
        self.c0
    }

    pub fn kappa(&self) -> &KappaFunction {
        &self.kappa
    }

    /// The defining formula, before taking the envelope.
    pub fn formula(&self, v: f64) -> Result<f64> {
        if v.is_nan() || v < loglog_16() - 1e-12 {
            return Err(LabError::Domain(format!(
                "alpha is defined for X >= 16 (log log X >= {}), got {v}",
                loglog_16()
            )));
        }
        let k1 = self.kappa.kappa1(v)?;
        Ok(((k1 + (v + 1.0 / E).ln() + self.c0) / v.sqrt()).max(ALPHA_FLOOR))
    }

    /// `alpha` at `v = log log X`: the larger of the formula at `v` and its
    /// maximum over grid points above `v`.
    pub fn at_loglog(&self, v: f64) -> Result<f64> {
        let here = self.formula(v)?;
        let i = self.v.partition_point(|&x| x <= v);
        let above = self.envelope.get(i).copied().unwrap_or(f64::NEG_INFINITY);
        Ok(here.max(above))
    }

    pub fn at(&self, x: f64) -> Result<f64> {
        if !(x >= 16.0) {
            return Err(LabError::Domain(format!("alpha needs X >= 16, got {x}")));
        }
        self.at_loglog(x.ln().ln())
    }

    pub fn loglog_points(&self) -> &[f64] {
        &self.v
    }

    pub fn envelope_samples(&self) -> &[f64] {
        &self.envelope
    }
}

/// One block `[x_j, upper_j)` with `upper_j = x_j^{log x_j}`, in log form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Block {
    pub log_x: f64,
    pub log_upper: f64,
    pub a: f64,
}

impl Block {
    pub fn contains_log(&self, log_p: f64) -> bool {
        self.log_x <= log_p && log_p < self.log_upper
    }

    /// `log log x_j`.
    pub fn loglog_x(&self) -> f64 {
        self.log_x.ln()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KappaDesc {
    pub spec: Option<KappaSpec>,
    pub grid: LogLogGrid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaDesc {
    #[serde(rename = "C0")]
    pub c0: f64,
    pub floor: f64,
    pub formula: String,
}

/// The constructed counterexample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtremalSpec {
    pub x1: f64,
    #[serde(rename = "J")]
    pub j: usize,
    #[serde(rename = "C0")]
    pub c0: f64,
    pub blocks: Vec<Block>,
    pub l2_budget: f64,
    pub alpha_desc: AlphaDesc,
    pub kappa_desc: KappaDesc,
}

/// Blocks with `x_{j+1} = exp((log x_j)^2 + 1)` and `a_j = sqrt(alpha(upper_j))`.
pub fn choose_blocks(
    alpha: &AlphaFunction,
    j_count: usize,
    x1: f64,
    l2_budget: f64,
    kappa_spec: Option<KappaSpec>,
) -> Result<ExtremalSpec> {
    if !(x1.is_finite() && x1 >= 16.0) {
        return Err(LabError::Domain(format!("x1 must be >= 16, got {x1}")));
    }
    if j_count == 0 {
        return Err(LabError::MalformedParams("J must be at least 1".into()));
    }
    let mut blocks = Vec::with_capacity(j_count);
    let mut log_x = x1.ln();
    for j in 0..j_count {
        let log_upper = log_x * log_x;
        if !log_upper.is_finite() {
            return Err(LabError::BlockOverflow { max_blocks: j });
        }
        let a = alpha.at_loglog(log_upper.ln())?.sqrt();
        blocks.push(Block {
            log_x,
            log_upper,
            a,
        });
        log_x = log_upper + 1.0;
    }
    let spec = ExtremalSpec {
        x1,
        j: j_count,
        c0: alpha.c0(),
        blocks,
        l2_budget,
        alpha_desc: AlphaDesc {
            c0: alpha.c0(),
            floor: ALPHA_FLOOR,
            formula: "(kappa1(X) + log(log log X + 1/e) + C0) / sqrt(log log X), nonincreasing envelope"
                .into(),
        },
        kappa_desc: KappaDesc {
            spec: kappa_spec,
            grid: alpha.kappa().grid(),
        },
    };
    spec.validate()?;
    Ok(spec)
}

/// Largest `J` whose blocks stay finite in log form, starting from `x1`.
pub fn max_feasible_blocks(x1: f64) -> usize {
    let mut log_x = x1.ln();
    let mut j = 0;
    while (log_x * log_x).is_finite() {
        j += 1;
        log_x = log_x * log_x + 1.0;
    }
    j
}

impl ExtremalSpec {
    pub fn l2_sum(&self) -> f64 {
        self.blocks.iter().map(|b| b.a * b.a).sum()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(LabError::MalformedParams(msg));
        if self.blocks.len() != self.j || self.j == 0 {
            return bad(format!("J = {} but {} blocks", self.j, self.blocks.len()));
        }
        if !(self.x1 >= 16.0) || (self.blocks[0].log_x - self.x1.ln()).abs() > 1e-12 {
            return bad(format!("x1 = {} must be >= 16 and match block 1", self.x1));
        }
        for (i, b) in self.blocks.iter().enumerate() {
            if !(b.a.is_finite() && b.a >= 0.0) {
                return bad(format!("block {} has a = {}", i + 1, b.a));
            }
            let expect = b.log_x * b.log_x;
            if !expect.is_finite() || (b.log_upper - expect).abs() > 1e-12 * expect {
                return bad(format!("block {} upper is not x^(log x)", i + 1));
            }
        }
        for (i, w) in self.blocks.windows(2).enumerate() {
            if !(w[0].log_upper < w[1].log_x) {
                return bad(format!("block {} overlaps block {}", i + 1, i + 2));
            }
        }
        let sum = self.l2_sum();
        if sum > self.l2_budget {
            return Err(LabError::Budget {
                sum,
                budget: self.l2_budget,
            });
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: ExtremalSpec = serde_json::from_str(text)
            .map_err(|e| LabError::MalformedParams(format!("extremal spec: {e}")))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| LabError::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// First 12 hex digits of the SHA-256 of the canonical JSON.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(serde_json::to_vec(self).expect("spec serializes"));
        digest.iter().take(6).map(|b| format!("{b:02x}")).collect()
    }

    /// Index of the block containing `log p`, if any.
    pub fn block_of(&self, log_p: f64) -> Option<usize> {
        self.blocks.iter().position(|b| b.contains_log(log_p))
    }
}

/// `-sin(log p) = -Re(i p^{-i})`.
pub fn window_value(p: u64) -> f64 {
    -(p as f64).ln().sin()
}

/// `theta_p = a_j / sqrt(log log p)` inside block `j` when `-sin(log p) >= 1/2`,
/// and 0 otherwise.
pub fn theta_at(spec: &ExtremalSpec, p: u64) -> f64 {
    if p < 3 {
        return 0.0;
    }
    let lp = (p as f64).ln();
    match spec.block_of(lp) {
        Some(j) if -lp.sin() >= 0.5 => spec.blocks[j].a / lp.ln().sqrt(),
        _ => 0.0,
    }
}

#[derive(Debug)]
struct ExtremalRule {
    spec: Arc<ExtremalSpec>,
}

impl PrimePowerRule for ExtremalRule {
    fn eval(&self, p: u64, k: u32) -> Complex64 {
        (-Complex64::from_polar(1.0, theta_at(&self.spec, p))).powu(k)
    }

    fn prime_tail(&self) -> Option<PrimeTail> {
        let upper = self.spec.blocks.last()?.log_upper.exp();
        let from = if upper < u64::MAX as f64 {
            upper.ceil() as u64
        } else {
            u64::MAX
        };
        Some(PrimeTail {
            from,
            sign: -1,
            tau: 0.0,
        })
    }
}

/// Completely multiplicative `f` with `f(p) = -e^{i theta_p}`.
pub fn extremal_function(spec: &ExtremalSpec) -> MultiplicativeFunction {
    MultiplicativeFunction::new(
        format!("extremal:{}", spec.hash()),
        ClassFlags {
            completely_multiplicative: true,
            claims_m: true,
            claims_m2: false,
        },
        Arc::new(ExtremalRule {
            spec: Arc::new(spec.clone()),
        }),
    )
}

/// Spec for `kappa = power:0.25`, `C0 = 1` and the default grid.
pub fn reference_spec(x1: f64, j_count: usize) -> Result<ExtremalSpec> {
    let spec = KappaSpec::Power(0.25);
    let kappa = KappaFunction::from_spec(spec, LogLogGrid::default())?;
    let alpha = alpha_from_kappa(&kappa, DEFAULT_C0)?;
    choose_blocks(&alpha, j_count, x1, DEFAULT_L2_BUDGET, Some(spec))
}

pub fn reference_function(x1: f64, j_count: usize) -> Result<MultiplicativeFunction> {
    Ok(extremal_function(&reference_spec(x1, j_count)?))
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockMajorant {
    pub j: usize,
    /// `sum_{p <= min(upper_j, P)} 1/p`.
    pub mertens: f64,
    /// `a_j^2 * mertens / log log x_j`.
    pub majorant: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PsumReport {
    pub cutoff: u64,
    /// `sum_{p <= P} theta_p^2 / p`.
    pub observed: f64,
    pub blocks: Vec<BlockMajorant>,
    pub majorant: f64,
    /// `sum a_j^2` over the blocks that start at or below the cutoff.
    pub l2_sum: f64,
    /// Partial sums at the cutoff's geometric checkpoints.
    pub partial_sums: Vec<(u64, f64)>,
}

impl PsumReport {
    pub fn observed_within_majorant(&self) -> bool {
        self.observed <= self.majorant * (1.0 + 1e-12)
    }

    pub fn majorant_within_budget(&self) -> bool {
        self.majorant <= 4.0 * self.l2_sum * (1.0 + 1e-12)
    }

    pub fn passes(&self) -> bool {
        self.observed_within_majorant() && self.majorant_within_budget()
    }
}

impl fmt::Display for PsumReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "cutoff: {}", self.cutoff)?;
        writeln!(f, "theta_sq_sum: {}", self.observed)?;
        for b in &self.blocks {
            writeln!(f, "block_{}_mertens: {}", b.j, b.mertens)?;
            writeln!(f, "block_{}_majorant: {}", b.j, b.majorant)?;
        }
        writeln!(f, "majorant: {}", self.majorant)?;
        writeln!(f, "four_l2_sum: {}", 4.0 * self.l2_sum)?;
        writeln!(f, "observed_le_majorant: {}", self.observed_within_majorant())?;
        writeln!(f, "majorant_le_four_l2: {}", self.majorant_within_budget())?;
        writeln!(f, "psum: {}", if self.passes() { "pass" } else { "fail" })
    }
}

/// `sum_{p <= P} theta_p^2 / p` against the per-block Mertens majorant.
///
/// Blocks reaching past the cutoff use `sum_{p <= P} 1/p` in place of
/// `sum_{p <= upper_j} 1/p`, which still bounds the primes actually summed.
pub fn verify_psum(spec: &ExtremalSpec, cutoff: u64, table: &PrimeTable) -> Result<PsumReport> {
    table.require("psum verification", cutoff)?;
    let primes = table.up_to(cutoff);
    let prefix = reciprocal_prefix_sums(table);
    let grid = crate::multfun::CheckpointGrid::default().points(cutoff)?;
    let mut next = grid.iter().copied().peekable();
    let mut partial_sums = Vec::with_capacity(grid.len());
    let mut acc = CompensatedSum::new();
    for &p in primes {
        let p = p as u64;
        while let Some(&x) = next.peek() {
            if x < p {
                partial_sums.push((x, acc.value()));
                next.next();
            } else {
                break;
            }
        }
        let th = theta_at(spec, p);
        if th != 0.0 {
            acc.add(th * th / p as f64);
        }
    }
    for x in next {
        partial_sums.push((x, acc.value()));
    }

    let log_cutoff = (cutoff as f64).ln();
    let mut blocks = Vec::new();
    let mut l2 = 0.0;
    for (j, b) in spec.blocks.iter().enumerate() {
        if b.log_x > log_cutoff {
            break;
        }
        let upper = b.log_upper.exp().min(cutoff as f64);
        let count = primes.partition_point(|&p| (p as f64) <= upper);
        let mertens = if count == 0 { 0.0 } else { prefix[count - 1] };
        blocks.push(BlockMajorant {
            j: j + 1,
            mertens,
            majorant: b.a * b.a * mertens / b.loglog_x(),
        });
        l2 += b.a * b.a;
    }
    let majorant = blocks.iter().map(|b| b.majorant).sum();
    Ok(PsumReport {
        cutoff,
        observed: acc.value(),
        blocks,
        majorant,
        l2_sum: l2,
        partial_sums,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LowerBoundReport {
    pub j: usize,
    pub sigma: f64,
    /// Primes of block `j` with `theta_p != 0`.
    pub selected: Vec<u64>,
    /// `W_j = sum_{selected} theta_p (-sin log p) p^{-sigma}`.
    pub window_sum: f64,
    /// `sum_{selected} theta_p p^{-sigma}`.
    pub theta_sum: f64,
    /// `a_j / (2 sqrt(log log upper_j)) * sum_{selected} p^{-sigma}`.
    pub uniform_lower: f64,
    /// `Re sum_{p <= P} f(p) p^{-s}` at `s = sigma + i`.
    pub re_prime_sum: f64,
    /// `Re sum_{p <= P} (f(p) + 1) p^{-s}`: the prime sum with the `-log zeta` part removed.
    pub re_tilt_sum: f64,
    /// `a_j sqrt(log log x_j)`; reported, not asserted.
    pub target: f64,
    pub prime_cutoff: u64,
}

impl LowerBoundReport {
    /// `W_j >= (1/2) sum theta_p p^{-sigma}`.
    pub fn selection_holds(&self) -> bool {
        self.window_sum >= 0.5 * self.theta_sum - 1e-15
    }

    pub fn uniform_holds(&self) -> bool {
        self.window_sum >= self.uniform_lower - 1e-15
    }
}

impl fmt::Display for LowerBoundReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "block: {}", self.j)?;
        writeln!(f, "sigma: {}", self.sigma)?;
        writeln!(f, "t: 1")?;
        writeln!(f, "prime_cutoff: {}", self.prime_cutoff)?;
        writeln!(f, "selected_primes: {}", self.selected.len())?;
        if let (Some(a), Some(b)) = (self.selected.first(), self.selected.last()) {
            writeln!(f, "selected_range: [{a}, {b}]")?;
        }
        writeln!(f, "window_sum: {}", self.window_sum)?;
        writeln!(f, "half_theta_sum: {}", 0.5 * self.theta_sum)?;
        writeln!(f, "uniform_lower: {}", self.uniform_lower)?;
        writeln!(f, "re_prime_sum: {}", self.re_prime_sum)?;
        writeln!(f, "re_tilt_sum: {}", self.re_tilt_sum)?;
        writeln!(f, "target_a_sqrt_loglog: {}", self.target)?;
        writeln!(
            f,
            "selection: {}",
            if self.selection_holds() { "pass" } else { "fail" }
        )
    }
}

/// Checks the window selection of block `j` (1-based) at
/// `s = 1 + 1/(log x_j)^2 + i`, and reports the prime sum next to its target.
pub fn verify_logf_lower(
    spec: &ExtremalSpec,
    j: usize,
    prime_cutoff: u64,
    table: &PrimeTable,
) -> Result<LowerBoundReport> {
    let block = *spec
        .blocks
        .get(j.wrapping_sub(1))
        .ok_or_else(|| LabError::MalformedParams(format!("no block {j}")))?;
    let upper = block.log_upper.exp();
    if !(upper <= table.limit() as f64) {
        return Err(LabError::coverage(
            "log F lower bound",
            if upper < u64::MAX as f64 {
                upper.ceil() as u64
            } else {
                u64::MAX
            },
            table.limit(),
        ));
    }
    table.require("log F lower bound", prime_cutoff)?;
    let sigma = 1.0 + 1.0 / (block.log_x * block.log_x);
    let point = ComplexPoint::new(sigma, 1.0)?;

    let mut selected = Vec::new();
    let mut window = CompensatedSum::new();
    let mut theta_sum = CompensatedSum::new();
    let mut p_sum = CompensatedSum::new();
    for &p in table.up_to(upper as u64) {
        let p = p as u64;
        let lp = (p as f64).ln();
        if !block.contains_log(lp) {
            continue;
        }
        let th = theta_at(spec, p);
        if th == 0.0 {
            continue;
        }
        let ps = (-sigma * lp).exp();
        selected.push(p);
        window.add(th * window_value(p) * ps);
        theta_sum.add(th * ps);
        p_sum.add(ps);
    }

    let f = extremal_function(spec);
    let mut prime_sum = ComplexSum::new();
    let mut tilt = ComplexSum::new();
    for &p in table.up_to(prime_cutoff) {
        let p = p as u64;
        let ps = pow_neg((p as f64).ln(), point.s());
        let fp = f.at_prime(p);
        prime_sum.add(fp * ps);
        tilt.add((fp + 1.0) * ps);
    }
    let upper_loglog = block.log_upper.ln();
    Ok(LowerBoundReport {
        j,
        sigma,
        selected,
        window_sum: window.value(),
        theta_sum: theta_sum.value(),
        uniform_lower: block.a / (2.0 * upper_loglog.sqrt()) * p_sum.value(),
        re_prime_sum: prime_sum.value().re,
        re_tilt_sum: tilt.value().re,
        target: block.a * block.loglog_x().sqrt(),
        prime_cutoff,
    })
}
