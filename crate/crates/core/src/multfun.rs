//! Multiplicative functions of modulus at most one and their summatory functions.
//!
//! A function is described by its values on prime powers, supplied as a
//! [`PrimePowerRule`]. Values at small primes are memoized; everything else is
//! evaluated on demand, which lets rules depend on `p` in ways that cannot be
//! tabulated up front.

use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{LabError, Result};
use crate::primes::{sieve_primes, PrimeTable, SpfTable, DEFAULT_SIEVE_CEILING};
use crate::sum::ComplexSum;

/// Primes below this bound have `f(p)` cached at construction.
const MEMO_LIMIT: usize = 1 << 16;

/// Tolerance for the `|f(p^k)| <= 1` class condition.
pub const CLASS_M_TOL: f64 = 1e-12;

/// Tolerance for the exact test `f(2^k) = -2^{ikt}`.
pub const TWO_ADIC_TOL: f64 = 1e-9;

pub const VALID_SPECS: &str =
    "one, moebius, liouville, odd_one, twist:<t>:<base>, extremal:<path>, extremal-ref";

/// Values of a multiplicative function on prime powers.
pub trait PrimePowerRule: Send + Sync + fmt::Debug {
    /// `f(p^k)` for a prime `p` and `k >= 1`.
    fn eval(&self, p: u64, k: u32) -> Complex64;

    /// Eventual shape of `f` on primes, if the rule knows it.
    fn prime_tail(&self) -> Option<PrimeTail> {
        None
    }
}

/// `f(p) = sign * p^{-i tau}` for every prime `p >= from`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrimeTail {
    pub from: u64,
    pub sign: i8,
    pub tau: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ClassFlags {
    pub completely_multiplicative: bool,
    pub claims_m: bool,
    pub claims_m2: bool,
}

#[derive(Clone)]
pub struct MultiplicativeFunction {
    label: String,
    flags: ClassFlags,
    rule: Arc<dyn PrimePowerRule>,
    memo: Arc<[Complex64]>,
}

impl fmt::Debug for MultiplicativeFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MultiplicativeFunction")
            .field("label", &self.label)
            .field("flags", &self.flags)
            .field("rule", &self.rule)
            .finish()
    }
}

impl MultiplicativeFunction {
    pub fn new(label: impl Into<String>, flags: ClassFlags, rule: Arc<dyn PrimePowerRule>) -> Self {
        let mut memo = vec![Complex64::new(0.0, 0.0); MEMO_LIMIT];
        for p in small_primes() {
            memo[p as usize] = rule.eval(p, 1);
        }
        Self {
            label: label.into(),
            flags,
            rule,
            memo: memo.into(),
        }
    }

    /// Function given by a closure on prime powers.
    pub fn from_fn<F>(label: impl Into<String>, flags: ClassFlags, rule: F) -> Self
    where
        F: Fn(u64, u32) -> Complex64 + Send + Sync + 'static,
    {
        Self::new(label, flags, Arc::new(FnRule(rule)))
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn flags(&self) -> ClassFlags {
        self.flags
    }

    pub fn prime_tail(&self) -> Option<PrimeTail> {
        self.rule.prime_tail()
    }

    /// `f(p)` for a prime `p`.
    #[inline]
    pub fn at_prime(&self, p: u64) -> Complex64 {
        if (p as usize) < MEMO_LIMIT {
            self.memo[p as usize]
        } else {
            self.rule.eval(p, 1)
        }
    }

    /// `f(p^k)`, using `f(p)^k` when the function is completely multiplicative.
    #[inline]
    pub fn prime_power(&self, p: u64, k: u32) -> Complex64 {
        match k {
            0 => Complex64::new(1.0, 0.0),
            1 => self.at_prime(p),
            _ if self.flags.completely_multiplicative => self.at_prime(p).powu(k),
            _ => self.rule.eval(p, k),
        }
    }

    /// `f(p^k)` straight from the rule, bypassing memo and shortcuts.
    pub fn rule_value(&self, p: u64, k: u32) -> Complex64 {
        if k == 0 {
            Complex64::new(1.0, 0.0)
        } else {
            self.rule.eval(p, k)
        }
    }

    /// `n -> f(n) n^{-it}`. Preserves all class flags.
    pub fn twisted(&self, t: f64) -> Self {
        let label = format!("twist:{t}:{}", self.label);
        Self::new(
            label,
            self.flags,
            Arc::new(TwistRule {
                base: self.clone(),
                t,
            }),
        )
    }
}

fn small_primes() -> impl Iterator<Item = u64> {
    static TABLE: std::sync::OnceLock<PrimeTable> = std::sync::OnceLock::new();
    TABLE
        .get_or_init(|| sieve_primes(MEMO_LIMIT as u64 - 1).expect("static limit"))
        .iter()
}

struct FnRule<F>(F);

impl<F> fmt::Debug for FnRule<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("FnRule")
    }
}

impl<F> PrimePowerRule for FnRule<F>
where
    F: Fn(u64, u32) -> Complex64 + Send + Sync,
{
    fn eval(&self, p: u64, k: u32) -> Complex64 {
        (self.0)(p, k)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Builtin {
    One,
    Moebius,
    Liouville,
    OddOne,
}

impl PrimePowerRule for Builtin {
    fn eval(&self, p: u64, k: u32) -> Complex64 {
        let v = match self {
            Builtin::One => 1.0,
            Builtin::Moebius => {
                if k == 1 {
                    -1.0
                } else {
                    0.0
                }
            }
            Builtin::Liouville => {
                if k % 2 == 1 {
                    -1.0
                } else {
                    1.0
                }
            }
            Builtin::OddOne => {
                if p == 2 {
                    0.0
                } else {
                    1.0
                }
            }
        };
        Complex64::new(v, 0.0)
    }

    fn prime_tail(&self) -> Option<PrimeTail> {
        let (from, sign) = match self {
            Builtin::One => (2, 1),
            Builtin::Moebius | Builtin::Liouville => (2, -1),
            Builtin::OddOne => (3, 1),
        };
        Some(PrimeTail {
            from,
            sign,
            tau: 0.0,
        })
    }
}

#[derive(Debug)]
struct TwistRule {
    base: MultiplicativeFunction,
    t: f64,
}

impl PrimePowerRule for TwistRule {
    fn eval(&self, p: u64, k: u32) -> Complex64 {
        let phase = -(k as f64) * self.t * (p as f64).ln();
        self.base.rule_value(p, k) * Complex64::from_polar(1.0, phase)
    }

    fn prime_tail(&self) -> Option<PrimeTail> {
        self.base.prime_tail().map(|tail| PrimeTail {
            tau: tail.tau + self.t,
            ..tail
        })
    }
}

/// Built-in test corpus.
///
/// `twist` takes `[t]` and twists `one`, i.e. `n -> n^{-it}`; use
/// [`MultiplicativeFunction::twisted`] or the spec string `twist:<t>:<base>`
/// for other bases. `extremal-ref` takes `[]` or `[x1, J]`.
pub fn builtin(name: &str, params: &[f64]) -> Result<MultiplicativeFunction> {
    let no_params = |f: MultiplicativeFunction| {
        if params.is_empty() {
            Ok(f)
        } else {
            Err(LabError::MalformedParams(format!(
                "`{name}` takes no parameters, got {params:?}"
            )))
        }
    };
    let cm_m = ClassFlags {
        completely_multiplicative: true,
        claims_m: true,
        claims_m2: false,
    };
    match name {
        "one" => no_params(MultiplicativeFunction::new("one", cm_m, Arc::new(Builtin::One))),
        "moebius" => no_params(MultiplicativeFunction::new(
            "moebius",
            ClassFlags {
                completely_multiplicative: false,
                ..cm_m
            },
            Arc::new(Builtin::Moebius),
        )),
        "liouville" => no_params(MultiplicativeFunction::new(
            "liouville",
            cm_m,
            Arc::new(Builtin::Liouville),
        )),
        "odd_one" => no_params(MultiplicativeFunction::new(
            "odd_one",
            ClassFlags {
                claims_m2: true,
                ..cm_m
            },
            Arc::new(Builtin::OddOne),
        )),
        "twist" => match params {
            [t] if t.is_finite() => Ok(builtin("one", &[])?.twisted(*t)),
            _ => Err(LabError::MalformedParams(format!(
                "`twist` takes one finite parameter t, got {params:?}"
            ))),
        },
        "extremal-ref" => match params {
            [] => crate::extremal::reference_function(20.0, 3),
            [x1, j] if *j >= 1.0 && j.fract() == 0.0 => {
                crate::extremal::reference_function(*x1, *j as usize)
            }
            _ => Err(LabError::MalformedParams(format!(
                "`extremal-ref` takes [] or [x1, J], got {params:?}"
            ))),
        },
        _ => Err(LabError::UnknownFunction {
            name: name.to_string(),
            valid: VALID_SPECS,
        }),
    }
}

/// Parses the function mini-language used by the CLI.
pub fn parse_function_spec(spec: &str) -> Result<MultiplicativeFunction> {
    let spec = spec.trim();
    if let Some(rest) = spec.strip_prefix("twist:") {
        let (t, base) = rest.split_once(':').ok_or_else(|| {
            LabError::MalformedParams(format!("expected twist:<t>:<base>, got `{spec}`"))
        })?;
        let t: f64 = t
            .parse()
            .ok()
            .filter(|t: &f64| t.is_finite())
            .ok_or_else(|| LabError::MalformedParams(format!("bad twist parameter `{t}`")))?;
        return Ok(parse_function_spec(base)?.twisted(t));
    }
    if let Some(path) = spec.strip_prefix("extremal:") {
        let doc = crate::extremal::ExtremalSpec::load(std::path::Path::new(path))?;
        return Ok(crate::extremal::extremal_function(&doc));
    }
    builtin(spec, &[])
}

/// `f(n)` via the smallest-prime-factor table.
pub fn value_at(f: &MultiplicativeFunction, n: u64, spf: &SpfTable) -> Result<Complex64> {
    if n == 0 {
        return Err(LabError::Domain("f(0) is undefined".into()));
    }
    if n == 1 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    if n > spf.limit() {
        return Err(LabError::coverage("value_at", n, spf.limit()));
    }
    let mut m = n;
    let mut acc = Complex64::new(1.0, 0.0);
    while m > 1 {
        let p = spf.spf(m).expect("m within table");
        let mut k = 0;
        while m.is_multiple_of(p) {
            m /= p;
            k += 1;
        }
        acc *= f.prime_power(p, k);
    }
    Ok(acc)
}

/// Default segment length for streamed evaluation.
pub const DEFAULT_SEGMENT: u64 = 1 << 16;

/// Streams `f(lo..hi)` segment by segment, in ascending order.
///
/// Segments are factored in parallel batches; `visit` always sees them in
/// order. Each value is the product of its prime-power factors in ascending
/// prime order, the same order [`value_at`] uses.
pub fn for_each_segment<V>(
    f: &MultiplicativeFunction,
    limit: u64,
    segment: u64,
    mut visit: V,
) -> Result<()>
where
    V: FnMut(u64, &[Complex64]),
{
    if limit > DEFAULT_SIEVE_CEILING {
        return Err(LabError::Capacity {
            requested: limit,
            ceiling: DEFAULT_SIEVE_CEILING,
        });
    }
    if segment == 0 {
        return Err(LabError::MalformedParams("segment length must be positive".into()));
    }
    if limit == 0 {
        return Ok(());
    }
    let root = limit.isqrt().max(2);
    let base = sieve_primes(root)?;
    let n_segments = limit.div_ceil(segment);
    let batch = (rayon::current_num_threads() as u64 * 2).max(1);
    let mut i = 0;
    while i < n_segments {
        let end = (i + batch).min(n_segments);
        let chunks: Vec<Vec<Complex64>> = (i..end)
            .into_par_iter()
            .map(|j| {
                let lo = 1 + j * segment;
                let hi = (lo + segment).min(limit + 1);
                segment_values(f, lo, hi, &base)
            })
            .collect();
        for (j, chunk) in (i..end).zip(chunks) {
            visit(1 + j * segment, &chunk);
        }
        i = end;
    }
    Ok(())
}

/// `f(n)` for `n` in `[lo, hi)`; `base` must contain all primes up to `sqrt(hi - 1)`.
fn segment_values(f: &MultiplicativeFunction, lo: u64, hi: u64, base: &PrimeTable) -> Vec<Complex64> {
    let len = (hi - lo) as usize;
    let mut rem: Vec<u64> = (lo..hi).collect();
    let mut val = vec![Complex64::new(1.0, 0.0); len];
    for p in base.iter() {
        if p * p >= hi {
            break;
        }
        let mut n = lo.div_ceil(p) * p;
        while n < hi {
            let idx = (n - lo) as usize;
            let mut m = rem[idx];
            let mut k = 0;
            while m.is_multiple_of(p) {
                m /= p;
                k += 1;
            }
            rem[idx] = m;
            val[idx] *= f.prime_power(p, k);
            n += p;
        }
    }
    for (v, &r) in val.iter_mut().zip(&rem) {
        if r > 1 {
            *v *= f.at_prime(r);
        }
    }
    val
}

/// Which `x` values a [`SummatoryTrace`] records.
#[derive(Debug, Clone, PartialEq)]
pub enum CheckpointGrid {
    /// `floor(r^k)` for `k >= 0`, every power of ten, and the limit itself.
    Geometric { ratio: f64 },
    /// Every integer `1..=limit`.
    Dense,
    Explicit(Vec<u64>),
}

impl Default for CheckpointGrid {
    fn default() -> Self {
        CheckpointGrid::Geometric {
            ratio: 2f64.powf(0.25),
        }
    }
}

impl CheckpointGrid {
    /// Ascending checkpoint list for a trace up to `limit`.
    pub fn points(&self, limit: u64) -> Result<Vec<u64>> {
        let mut pts = match self {
            CheckpointGrid::Geometric { ratio } => {
                if !(ratio.is_finite() && *ratio > 1.0) {
                    return Err(LabError::MalformedParams(format!(
                        "geometric ratio must exceed 1, got {ratio}"
                    )));
                }
                geometric_points(*ratio, limit)
            }
            CheckpointGrid::Dense => (1..=limit).collect(),
            CheckpointGrid::Explicit(xs) => {
                if xs.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(LabError::MalformedParams(
                        "explicit checkpoints must be strictly ascending".into(),
                    ));
                }
                if let Some(&last) = xs.last() {
                    if last > limit {
                        return Err(LabError::coverage("checkpoint", last, limit));
                    }
                }
                xs.iter().copied().filter(|&x| x >= 1).collect()
            }
        };
        pts.dedup();
        Ok(pts)
    }
}

fn geometric_points(ratio: f64, limit: u64) -> Vec<u64> {
    let mut pts = Vec::new();
    let lr = ratio.ln();
    for k in 0.. {
        let x = ((k as f64) * lr).exp();
        let x = (x + 1e-9).floor();
        if x > limit as f64 {
            break;
        }
        pts.push(x as u64);
    }
    let mut ten = 1u64;
    while ten <= limit {
        pts.push(ten);
        match ten.checked_mul(10) {
            Some(t) => ten = t,
            None => break,
        }
    }
    if limit >= 1 {
        pts.push(limit);
    }
    pts.sort_unstable();
    pts.dedup();
    pts
}

impl FromStr for CheckpointGrid {
    type Err = LabError;

    /// `geometric`, `geometric:<r>`, `dense`, or `explicit:<x1>,<x2>,...`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || LabError::MalformedParams(format!("bad checkpoint grid `{s}`"));
        match s.split_once(':') {
            None if s == "geometric" => Ok(CheckpointGrid::default()),
            None if s == "dense" => Ok(CheckpointGrid::Dense),
            Some(("geometric", r)) => {
                let ratio: f64 = r.parse().map_err(|_| bad())?;
                if !(ratio.is_finite() && ratio > 1.0) {
                    return Err(bad());
                }
                Ok(CheckpointGrid::Geometric { ratio })
            }
            Some(("explicit", list)) => list
                .split(',')
                .map(|x| x.trim().parse::<u64>().map_err(|_| bad()))
                .collect::<Result<Vec<_>>>()
                .map(CheckpointGrid::Explicit),
            _ => Err(bad()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Checkpoint {
    pub x: u64,
    pub s: Complex64,
}

/// Partial sums `S_f(x) = sum_{n <= x} f(n)` at a list of checkpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct SummatoryTrace {
    pub function_label: String,
    pub checkpoints: Vec<Checkpoint>,
}

impl SummatoryTrace {
    pub fn get(&self, x: u64) -> Option<Complex64> {
        self.checkpoints
            .binary_search_by_key(&x, |c| c.x)
            .ok()
            .map(|i| self.checkpoints[i].s)
    }

    pub fn last(&self) -> Option<&Checkpoint> {
        self.checkpoints.last()
    }

    /// Largest `X` such that every integer in `1..=X` is a checkpoint.
    pub fn dense_prefix(&self) -> u64 {
        self.checkpoints
            .iter()
            .zip(1u64..)
            .take_while(|(c, n)| c.x == *n)
            .count() as u64
    }

    /// CSV `x,re_S,im_S,abs_S`, preceded by an optional `# ...` comment line.
    pub fn write_csv<W: Write>(&self, mut out: W, comment: Option<&str>) -> std::io::Result<()> {
        if let Some(c) = comment {
            writeln!(out, "# {c}")?;
        }
        writeln!(out, "x,re_S,im_S,abs_S")?;
        for c in &self.checkpoints {
            writeln!(out, "{},{},{},{}", c.x, c.s.re, c.s.im, c.s.norm())?;
        }
        Ok(())
    }
}

pub fn summatory_trace(
    f: &MultiplicativeFunction,
    limit: u64,
    grid: &CheckpointGrid,
) -> Result<SummatoryTrace> {
    summatory_trace_with_segment(f, limit, grid, DEFAULT_SEGMENT)
}

/// Streams `n = 1..=limit`, accumulating `S_f` with compensated summation in
/// ascending `n`. The result does not depend on `segment`.
pub fn summatory_trace_with_segment(
    f: &MultiplicativeFunction,
    limit: u64,
    grid: &CheckpointGrid,
    segment: u64,
) -> Result<SummatoryTrace> {
    if limit == 0 {
        return Err(LabError::EmptyRange("summatory trace needs limit >= 1".into()));
    }
    let points = grid.points(limit)?;
    let mut checkpoints = Vec::with_capacity(points.len());
    let mut next = points.iter().peekable();
    let mut acc = ComplexSum::new();
    for_each_segment(f, limit, segment, |lo, values| {
        for (n, &v) in (lo..).zip(values) {
            acc.add(v);
            if next.peek() == Some(&&n) {
                next.next();
                checkpoints.push(Checkpoint { x: n, s: acc.value() });
            }
        }
    })?;
    Ok(SummatoryTrace {
        function_label: f.label().to_string(),
        checkpoints,
    })
}

/// Outcome of one class-membership test.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassCheck {
    pub claimed: bool,
    pub holds: bool,
    /// First prime power `(p, k)` that violates the condition.
    pub witness: Option<(u64, u32)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassReport {
    pub label: String,
    pub sample_limit: u64,
    pub t: f64,
    pub m: ClassCheck,
    pub m2: ClassCheck,
    pub completely_multiplicative: ClassCheck,
    /// Whether `f(2^k) = -2^{ikt}` for every `k` with `2^k <= sample_limit`.
    pub two_adic_holds: bool,
    pub two_adic_first_failure: Option<u32>,
    pub two_adic_checked: u32,
}

impl ClassReport {
    /// Claimed flags are all confirmed on the sample.
    pub fn claims_consistent(&self) -> bool {
        [&self.m, &self.m2, &self.completely_multiplicative]
            .iter()
            .all(|c| !c.claimed || c.holds)
    }

    pub fn alternative(&self) -> &'static str {
        if self.two_adic_holds {
            "2-adic alternative holds"
        } else {
            "divergence alternative required"
        }
    }
}

impl fmt::Display for ClassReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let line = |f: &mut fmt::Formatter<'_>, name: &str, c: &ClassCheck| {
            let status = if c.holds { "pass" } else { "fail" };
            match c.witness {
                Some((p, k)) => writeln!(
                    f,
                    "{name}: {status} (claimed={}, witness=({p},{k}))",
                    c.claimed
                ),
                None => writeln!(f, "{name}: {status} (claimed={})", c.claimed),
            }
        };
        writeln!(f, "function: {}", self.label)?;
        writeln!(f, "sample_limit: {}", self.sample_limit)?;
        line(f, "class_M", &self.m)?;
        line(f, "class_M2", &self.m2)?;
        line(f, "completely_multiplicative", &self.completely_multiplicative)?;
        writeln!(f, "two_adic_t: {}", self.t)?;
        writeln!(f, "two_adic_k_checked: {}", self.two_adic_checked)?;
        match self.two_adic_first_failure {
            Some(k) => writeln!(f, "two_adic_first_failure_k: {k}")?,
            None => writeln!(f, "two_adic_first_failure_k: none")?,
        }
        writeln!(f, "verdict: {}", self.alternative())
    }
}

/// Checks class flags on every prime power up to `sample_limit`, plus the
/// 2-adic alternative `f(2^k) = -2^{ikt}`.
pub fn class_check(f: &MultiplicativeFunction, sample_limit: u64, t: f64) -> Result<ClassReport> {
    if sample_limit < 2 {
        return Err(LabError::EmptyRange("class_check needs sample_limit >= 2".into()));
    }
    let primes = sieve_primes(sample_limit)?;
    let flags = f.flags();
    let mut m_witness = None;
    let mut cm_witness = None;
    for p in primes.iter() {
        let fp = f.rule_value(p, 1);
        let mut pk = p;
        let mut k = 1u32;
        loop {
            let v = f.rule_value(p, k);
            if m_witness.is_none() && !(v.norm() <= 1.0 + CLASS_M_TOL) {
                m_witness = Some((p, k));
            }
            if cm_witness.is_none() && k >= 2 {
                let expect = fp.powu(k);
                if (v - expect).norm() > 1e-12 * expect.norm().max(1.0) {
                    cm_witness = Some((p, k));
                }
            }
            match pk.checked_mul(p) {
                Some(next) if next <= sample_limit => {
                    pk = next;
                    k += 1;
                }
                _ => break,
            }
        }
    }

    let mut m2_witness = None;
    let mut two_adic_first_failure = None;
    let mut checked = 0;
    let mut pk = 2u64;
    let mut k = 1u32;
    while pk <= sample_limit {
        let v = f.rule_value(2, k);
        if m2_witness.is_none() && v.norm() > CLASS_M_TOL {
            m2_witness = Some((2, k));
        }
        let target = -Complex64::from_polar(1.0, k as f64 * t * 2f64.ln());
        if two_adic_first_failure.is_none() && (v - target).norm() > TWO_ADIC_TOL {
            two_adic_first_failure = Some(k);
        }
        checked = k;
        match pk.checked_mul(2) {
            Some(n) => pk = n,
            None => break,
        }
        k += 1;
    }

    let check = |claimed: bool, witness: Option<(u64, u32)>| ClassCheck {
        claimed,
        holds: witness.is_none(),
        witness,
    };
    Ok(ClassReport {
        label: f.label().to_string(),
        sample_limit,
        t,
        m: check(flags.claims_m, m_witness),
        m2: check(flags.claims_m2, m2_witness),
        completely_multiplicative: check(flags.completely_multiplicative, cm_witness),
        two_adic_holds: two_adic_first_failure.is_none(),
        two_adic_first_failure,
        two_adic_checked: checked,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::primes::spf_table;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn builtin_definitions() {
        let mu = builtin("moebius", &[]).unwrap();
        assert_eq!(mu.prime_power(7, 1), c(-1.0));
        assert_eq!(mu.prime_power(7, 2), c(0.0));
        let lambda = builtin("liouville", &[]).unwrap();
        assert_eq!(lambda.prime_power(3, 3), c(-1.0));
        assert_eq!(lambda.prime_power(3, 4), c(1.0));
        let odd = builtin("odd_one", &[]).unwrap();
        assert_eq!(odd.prime_power(2, 1), c(0.0));
        assert_eq!(odd.prime_power(3, 5), c(1.0));
        assert!(odd.flags().claims_m2);
        assert!(lambda.flags().completely_multiplicative && lambda.flags().claims_m);
        assert!(!mu.flags().completely_multiplicative);
    }

    #[test]
    fn builtin_errors() {
        assert!(matches!(
            builtin("zeta", &[]),
            Err(LabError::UnknownFunction { .. })
        ));
        assert!(matches!(
            builtin("one", &[1.0]),
            Err(LabError::MalformedParams(_))
        ));
        assert!(matches!(
            builtin("twist", &[]),
            Err(LabError::MalformedParams(_))
        ));
        assert!(matches!(
            parse_function_spec("twist:abc:one"),
            Err(LabError::MalformedParams(_))
        ));
        assert!(matches!(
            parse_function_spec("twist:1"),
            Err(LabError::MalformedParams(_))
        ));
    }

    #[test]
    fn values_at_small_n() {
        let spf = spf_table(100).unwrap();
        let mu = builtin("moebius", &[]).unwrap();
        let lambda = builtin("liouville", &[]).unwrap();
        let odd = builtin("odd_one", &[]).unwrap();
        assert_eq!(value_at(&mu, 12, &spf).unwrap(), c(0.0));
        assert_eq!(value_at(&mu, 30, &spf).unwrap(), c(-1.0));
        assert_eq!(value_at(&lambda, 12, &spf).unwrap(), c(-1.0));
        assert_eq!(value_at(&odd, 10, &spf).unwrap(), c(0.0));
        assert_eq!(value_at(&odd, 1, &spf).unwrap(), c(1.0));
        assert!(matches!(
            value_at(&odd, 101, &spf),
            Err(LabError::Coverage { .. })
        ));
        assert!(matches!(value_at(&odd, 0, &spf), Err(LabError::Domain(_))));
    }

    #[test]
    fn nested_twist_spec() {
        let f = parse_function_spec("twist:0.5:twist:0.25:moebius").unwrap();
        let tail = f.prime_tail().unwrap();
        assert_eq!(tail.sign, -1);
        assert!((tail.tau - 0.75).abs() < 1e-15);
        let p = 101u64;
        let expect = -Complex64::from_polar(1.0, -0.75 * (p as f64).ln());
        assert!((f.at_prime(p) - expect).norm() < 1e-12);
    }

    #[test]
    fn small_traces() {
        let grid = CheckpointGrid::Explicit(vec![1, 10, 1000]);
        let mu = summatory_trace(&builtin("moebius", &[]).unwrap(), 1000, &grid).unwrap();
        assert_eq!(mu.get(10), Some(c(-1.0)));
        assert_eq!(mu.get(1), Some(c(1.0)));
        let lam = summatory_trace(&builtin("liouville", &[]).unwrap(), 1000, &grid).unwrap();
        assert_eq!(lam.get(10), Some(c(0.0)));
        let one = summatory_trace(&builtin("one", &[]).unwrap(), 1000, &grid).unwrap();
        assert_eq!(one.get(1000), Some(c(1000.0)));
    }

    #[test]
    fn geometric_grid_contains_decades_and_limit() {
        let pts = CheckpointGrid::Geometric { ratio: 2.0 }.points(1_000_000).unwrap();
        for x in [1, 2, 8, 10, 1024, 100_000, 1_000_000] {
            assert!(pts.contains(&x), "missing {x}");
        }
        assert!(pts.windows(2).all(|w| w[0] < w[1]));
        let pts = CheckpointGrid::default().points(37).unwrap();
        assert_eq!(*pts.last().unwrap(), 37);
    }

    #[test]
    fn grid_parsing() {
        assert_eq!(
            "geometric:2".parse::<CheckpointGrid>().unwrap(),
            CheckpointGrid::Geometric { ratio: 2.0 }
        );
        assert_eq!("dense".parse::<CheckpointGrid>().unwrap(), CheckpointGrid::Dense);
        assert_eq!(
            "explicit:10,100".parse::<CheckpointGrid>().unwrap(),
            CheckpointGrid::Explicit(vec![10, 100])
        );
        assert!("geometric:1".parse::<CheckpointGrid>().is_err());
        assert!("spiral".parse::<CheckpointGrid>().is_err());
        assert!(CheckpointGrid::Explicit(vec![5, 3]).points(10).is_err());
        assert!(CheckpointGrid::Explicit(vec![5, 30]).points(10).is_err());
    }

    #[test]
    fn csv_layout() {
        let trace = summatory_trace(
            &builtin("one", &[]).unwrap(),
            3,
            &CheckpointGrid::Dense,
        )
        .unwrap();
        let mut buf = Vec::new();
        trace.write_csv(&mut buf, Some("provenance")).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "# provenance\nx,re_S,im_S,abs_S\n1,1,0,1\n2,2,0,2\n3,3,0,3\n"
        );
        assert_eq!(trace.dense_prefix(), 3);
    }

    #[test]
    fn class_report_liouville() {
        let r = class_check(&builtin("liouville", &[]).unwrap(), 1000, 0.0).unwrap();
        assert!(r.m.holds && r.completely_multiplicative.holds);
        assert!(!r.m2.holds);
        assert_eq!(r.two_adic_first_failure, Some(2));
        assert_eq!(r.alternative(), "divergence alternative required");
        assert!(r.claims_consistent());
        let text = r.to_string();
        assert!(text.contains("class_M: pass"));
        assert!(text.contains("verdict: divergence alternative required"));
    }

    #[test]
    fn class_report_odd_one_and_violation() {
        let r = class_check(&builtin("odd_one", &[]).unwrap(), 1000, 0.0).unwrap();
        assert!(r.m2.holds && r.m.holds);

        let bad = MultiplicativeFunction::from_fn(
            "bad",
            ClassFlags {
                claims_m: true,
                ..Default::default()
            },
            |p, _| if p == 3 { c(1.5) } else { c(1.0) },
        );
        let r = class_check(&bad, 100, 0.0).unwrap();
        assert!(!r.m.holds);
        assert_eq!(r.m.witness, Some((3, 1)));
        assert!(!r.claims_consistent());
    }

    #[test]
    fn class_check_detects_false_complete_multiplicativity() {
        let mu_claiming_cm = MultiplicativeFunction::from_fn(
            "mu-cm",
            ClassFlags {
                completely_multiplicative: true,
                claims_m: true,
                claims_m2: false,
            },
            |_, k| if k == 1 { c(-1.0) } else { c(0.0) },
        );
        let r = class_check(&mu_claiming_cm, 100, 0.0).unwrap();
        assert_eq!(r.completely_multiplicative.witness, Some((2, 2)));
    }
}
