//! Error-bounded evaluation of `zeta(s)`, `F(s)`, `log F(s)` and local Euler
//! factors to the right of the one-line.
//!
//! Every evaluator returns an [`EvalResult`]: a value together with a bound on
//! its distance from the true value. Tail bounds compare with integrals and use
//! only `|f| <= 1`, so they are rigorous but can be large close to `sigma = 1`.

use std::fmt;
use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{LabError, Result};
use crate::multfun::{value_at, MultiplicativeFunction, PrimeTail, SummatoryTrace};
use crate::primes::{PrimeTable, SpfTable};
use crate::sum::{CompensatedSum, ComplexSum};

/// Target accuracy of [`zeta`].
pub const ZETA_TARGET: f64 = 1e-10;

/// Local factors whose modulus is below this are treated as zero.
pub const SINGULAR_FACTOR_TOL: f64 = 1e-12;

/// Geometric tail allowed when truncating a local Euler factor.
pub const LOCAL_FACTOR_TAIL: f64 = 1e-14;

/// Per-term rounding allowance, in units of the accumulated absolute sum.
const ROUNDING: f64 = 8.0 * f64::EPSILON;

/// A point `s = sigma + it` with `sigma > 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexPoint {
    sigma: f64,
    t: f64,
}

impl ComplexPoint {
    pub fn new(sigma: f64, t: f64) -> Result<Self> {
        if !(sigma.is_finite() && t.is_finite()) {
            return Err(LabError::Domain(format!("non-finite point {sigma}+{t}i")));
        }
        if sigma <= 1.0 {
            return Err(LabError::Domain(format!(
                "sigma must exceed 1, got {sigma}"
            )));
        }
        Ok(Self { sigma, t })
    }

    pub fn real(sigma: f64) -> Result<Self> {
        Self::new(sigma, 0.0)
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn s(&self) -> Complex64 {
        Complex64::new(self.sigma, self.t)
    }

    /// `s + i dt`.
    pub fn shifted(&self, dt: f64) -> Self {
        Self {
            sigma: self.sigma,
            t: self.t + dt,
        }
    }
}

impl fmt::Display for ComplexPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{:+}i", self.sigma, self.t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    TruncatedSeries,
    EulerProduct,
    PairedEulerProduct,
    PartialSummation,
    EulerMaclaurin,
    /// Derived from other results by arithmetic.
    Combined,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::TruncatedSeries => "truncated-series",
            Method::EulerProduct => "euler-product",
            Method::PairedEulerProduct => "paired-euler-product",
            Method::PartialSummation => "partial-summation",
            Method::EulerMaclaurin => "euler-maclaurin",
            Method::Combined => "combined",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A value with a bound on `|value - true value|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalResult {
    pub value: Complex64,
    pub error_bound: f64,
    pub method: Method,
}

impl EvalResult {
    pub fn new(value: Complex64, error_bound: f64, method: Method) -> Self {
        debug_assert!(error_bound >= 0.0 || error_bound.is_nan());
        Self {
            value,
            error_bound,
            method,
        }
    }

    /// Whether the two enclosures intersect.
    pub fn overlaps(&self, other: &EvalResult) -> bool {
        (self.value - other.value).norm() <= self.error_bound + other.error_bound
    }

    pub fn mul(&self, other: &EvalResult) -> EvalResult {
        let (a, b) = (self.value.norm(), other.value.norm());
        let (ea, eb) = (self.error_bound, other.error_bound);
        EvalResult::new(
            self.value * other.value,
            a * eb + b * ea + ea * eb,
            Method::Combined,
        )
    }

    /// `1/value`; the bound is infinite when the enclosure contains zero.
    pub fn recip(&self) -> EvalResult {
        let a = self.value.norm();
        let bound = if self.error_bound < a {
            self.error_bound / (a * (a - self.error_bound))
        } else {
            f64::INFINITY
        };
        EvalResult::new(self.value.inv(), bound, Method::Combined)
    }

    pub fn exp(&self) -> EvalResult {
        let v = self.value.exp();
        EvalResult::new(v, v.norm() * self.error_bound.exp_m1(), Method::Combined)
    }

    /// Principal logarithm; assumes the enclosure does not straddle the branch cut.
    pub fn ln(&self) -> EvalResult {
        let a = self.value.norm();
        let bound = if self.error_bound < a {
            -(1.0 - self.error_bound / a).ln()
        } else {
            f64::INFINITY
        };
        EvalResult::new(self.value.ln(), bound, Method::Combined)
    }

    pub fn with_method(self, method: Method) -> EvalResult {
        EvalResult { method, ..self }
    }
}

/// Cutoffs for series and prime sums.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TruncationPlan {
    pub series_cutoff: u64,
    pub prime_cutoff: u64,
    /// Primes up to here use fully expanded local factor logarithms.
    pub exact_factor_cutoff: u64,
}

impl TruncationPlan {
    pub fn new(series_cutoff: u64, prime_cutoff: u64, exact_factor_cutoff: u64) -> Result<Self> {
        if series_cutoff < 2 || prime_cutoff < 2 {
            return Err(LabError::MalformedParams(format!(
                "cutoffs must be at least 2 (N={series_cutoff}, P={prime_cutoff})"
            )));
        }
        if !(2..=prime_cutoff).contains(&exact_factor_cutoff) {
            return Err(LabError::MalformedParams(format!(
                "exact factor cutoff {exact_factor_cutoff} must lie in [2, {prime_cutoff}]"
            )));
        }
        Ok(Self {
            series_cutoff,
            prime_cutoff,
            exact_factor_cutoff,
        })
    }

    /// Same cutoff for everything.
    pub fn uniform(cutoff: u64) -> Result<Self> {
        Self::new(cutoff, cutoff, cutoff.min(1 << 16).max(2))
    }
}

impl Default for TruncationPlan {
    fn default() -> Self {
        Self {
            series_cutoff: 1_000_000,
            prime_cutoff: 1_000_000,
            exact_factor_cutoff: 1 << 16,
        }
    }
}

/// `n^{-s}` given `ln n`.
#[inline]
pub(crate) fn pow_neg(ln_n: f64, s: Complex64) -> Complex64 {
    Complex64::from_polar((-s.re * ln_n).exp(), -s.im * ln_n)
}

/// `sum_{n > x} n^{-a} <= x^{1-a}/(a-1)` for `a > 1`, `x >= 1`.
#[inline]
pub(crate) fn integral_tail(x: f64, a: f64) -> f64 {
    x.powf(1.0 - a) / (a - 1.0)
}

/// Riemann zeta by Euler-Maclaurin with the `B_2` and `B_4` corrections.
///
/// The remainder is bounded by `sup|B_5| / 5! * |s(s+1)...(s+4)| * N^{-sigma-4} / (sigma+4)`,
/// and `N` is doubled until that is at most [`ZETA_TARGET`].
pub fn zeta(point: ComplexPoint) -> EvalResult {
    // sup over [0,1] of |B_5(x)| is 0.02446...
    const SUP_B5: f64 = 0.0245;
    let s = point.s();
    let sigma = point.sigma();
    let rising5 = (0..5).map(|j| (s + j as f64).norm()).product::<f64>();
    let remainder = |n: f64| SUP_B5 / 120.0 * rising5 * n.powf(-sigma - 4.0) / (sigma + 4.0);
    let mut n = 8u64;
    while remainder(n as f64) > ZETA_TARGET && n < (1 << 40) {
        n *= 2;
    }
    let nf = n as f64;

    let mut acc = ComplexSum::new();
    let mut abs = CompensatedSum::new();
    for k in 1..n {
        let term = pow_neg((k as f64).ln(), s);
        abs.add(term.norm());
        acc.add(term);
    }
    let ln_n = nf.ln();
    let n_s = pow_neg(ln_n, s);
    let tail = n_s * nf / (s - 1.0) + n_s * 0.5 + s * n_s / (12.0 * nf)
        - s * (s + 1.0) * (s + 2.0) * n_s / (720.0 * nf.powi(3));
    acc.add(tail);
    let value = acc.value();
    let rounding = ROUNDING * (abs.value() + tail.norm());
    EvalResult::new(value, remainder(nf) + rounding, Method::EulerMaclaurin)
}

fn require_class_m(f: &MultiplicativeFunction, what: &str) -> Result<()> {
    if f.flags().claims_m {
        Ok(())
    } else {
        Err(LabError::Domain(format!(
            "{what} needs a function in class M; `{}` does not claim it",
            f.label()
        )))
    }
}

const CHUNK: u64 = 1 << 16;

/// `sum_{n <= N} f(n) n^{-s}` with the tail bound `N^{1-sigma}/(sigma-1)`.
///
/// Fixed chunk boundaries with an in-order reduction keep the result
/// independent of the thread count.
#[allow(non_snake_case)]
pub fn F_truncated(
    f: &MultiplicativeFunction,
    point: ComplexPoint,
    plan: &TruncationPlan,
    spf: &SpfTable,
) -> Result<EvalResult> {
    require_class_m(f, "F_truncated")?;
    let n_max = plan.series_cutoff;
    if n_max > spf.limit() {
        return Err(LabError::coverage("F_truncated", n_max, spf.limit()));
    }
    let s = point.s();
    let chunks: Vec<(Complex64, f64)> = (0..n_max.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let lo = 1 + c * CHUNK;
            let hi = (lo + CHUNK).min(n_max + 1);
            let mut acc = ComplexSum::new();
            let mut abs = CompensatedSum::new();
            for n in lo..hi {
                let fv = value_at(f, n, spf).expect("n within table");
                if fv.re == 0.0 && fv.im == 0.0 {
                    continue;
                }
                let term = fv * pow_neg((n as f64).ln(), s);
                abs.add(term.norm());
                acc.add(term);
            }
            (acc.value(), abs.value())
        })
        .collect();
    let mut acc = ComplexSum::new();
    let mut abs = CompensatedSum::new();
    for (v, a) in chunks {
        acc.add(v);
        abs.add(a);
    }
    let bound = integral_tail(n_max as f64, point.sigma()) + ROUNDING * abs.value();
    Ok(EvalResult::new(acc.value(), bound, Method::TruncatedSeries))
}

/// `s * integral_1^X S_f(y) y^{-s-1} dy`, integrated exactly between integer
/// steps of `S_f`, with the tail bound `|s| X^{1-sigma}/(sigma-1)` from `|S_f(y)| <= y`.
///
/// The trace must hold every integer checkpoint in `1..=floor(X)`.
#[allow(non_snake_case)]
pub fn F_partial_summation(
    trace: &SummatoryTrace,
    point: ComplexPoint,
    x: f64,
) -> Result<EvalResult> {
    if !(x.is_finite() && x >= 1.0) {
        return Err(LabError::Domain(format!("X must be at least 1, got {x}")));
    }
    let x_floor = x.floor() as u64;
    let dense = trace.dense_prefix();
    if dense < x_floor {
        return Err(LabError::coverage("partial summation trace", x_floor, dense));
    }
    let s = point.s();
    let mut acc = ComplexSum::new();
    let mut abs = CompensatedSum::new();
    let mut prev = Complex64::new(1.0, 0.0); // 1^{-s}
    for c in &trace.checkpoints[..x_floor as usize] {
        let upper = if c.x < x_floor {
            pow_neg(((c.x + 1) as f64).ln(), s)
        } else {
            pow_neg(x.ln(), s)
        };
        let piece = c.s * (prev - upper);
        abs.add(c.s.norm() * (prev.norm() + upper.norm()));
        acc.add(piece);
        prev = upper;
    }
    let tail = s.norm() * integral_tail(x, point.sigma());
    Ok(EvalResult::new(
        acc.value(),
        tail + ROUNDING * abs.value(),
        Method::PartialSummation,
    ))
}

/// Truncation order for a local factor: smallest `k` with
/// `p^{-(k+1)sigma} / (1 - p^{-sigma}) <= 1e-14`.
pub fn local_factor_order(p: u64, sigma: f64) -> u32 {
    let r = (p as f64).powf(-sigma);
    let mut k = 1u32;
    let mut tail = r * r / (1.0 - r);
    while tail > LOCAL_FACTOR_TAIL {
        k += 1;
        tail *= r;
    }
    k
}

/// Principal log of `sum_{k=0}^{kmax} f(p^k) p^{-ks}`. `kmax = None` picks
/// [`local_factor_order`].
pub fn euler_factor_log(
    f: &MultiplicativeFunction,
    p: u64,
    point: ComplexPoint,
    kmax: Option<u32>,
) -> Result<Complex64> {
    if p < 2 {
        return Err(LabError::Domain(format!("{p} is not a prime")));
    }
    let kmax = kmax.unwrap_or_else(|| local_factor_order(p, point.sigma()));
    let x = pow_neg((p as f64).ln(), point.s());
    let mut factor = Complex64::new(1.0, 0.0);
    let mut xk = Complex64::new(1.0, 0.0);
    for k in 1..=kmax {
        xk *= x;
        factor += f.prime_power(p, k) * xk;
    }
    if factor.norm() < SINGULAR_FACTOR_TOL {
        return Err(LabError::SingularFactor { p });
    }
    Ok(factor.ln())
}

/// Bound on `|log L_p(s) - f(p) p^{-s}|` from `|f| <= 1` alone.
fn local_defect_majorant(p: u64, sigma: f64) -> f64 {
    let r = (p as f64).powf(-sigma);
    let q = r / (1.0 - r);
    q * q / (2.0 * (1.0 - q)) + r * r / (1.0 - r)
}

/// Output of [`log_F_prime_sum`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrimeSumEval {
    /// `V = sum_{p <= P} f(p) p^{-s}`; its error bound covers both the prime-sum
    /// tail and the defect tail, i.e. it bounds `|V + defect - log F(s)|`.
    pub eval: EvalResult,
    /// `Delta = sum_{p <= E} [log L_p(s) - f(p) p^{-s}]`.
    pub defect: Complex64,
    /// `sum_{p <= E}` of per-prime majorants; always `>= |defect|`.
    pub defect_majorant: f64,
    /// `sum_{p > P} p^{-sigma} <= P^{1-sigma}/(sigma-1)`.
    pub prime_tail_bound: f64,
    /// Bound on the defect of primes above `E`.
    pub defect_tail_bound: f64,
    pub rounding: f64,
}

impl PrimeSumEval {
    /// Enclosure of the full prime sum `sum_p f(p) p^{-s}`.
    pub fn prime_sum(&self) -> EvalResult {
        EvalResult::new(
            self.eval.value,
            self.prime_tail_bound + self.rounding,
            Method::EulerProduct,
        )
    }

    /// Enclosure of `log F(s)` as a sum of local logarithms.
    pub fn log_f(&self) -> EvalResult {
        EvalResult::new(
            self.eval.value + self.defect,
            self.eval.error_bound,
            Method::EulerProduct,
        )
    }
}

/// Prime sum `sum_{p <= P} f(p) p^{-s}` plus the local-log defect up to
/// `plan.exact_factor_cutoff`.
///
/// `log F` here means the sum of principal local logs, not a branch continued
/// along a path. The factor at `p = 2` is always logged exactly, so class `M`
/// suffices as long as it is nonzero.
#[allow(non_snake_case)]
pub fn log_F_prime_sum(
    f: &MultiplicativeFunction,
    point: ComplexPoint,
    plan: &TruncationPlan,
    table: &PrimeTable,
) -> Result<PrimeSumEval> {
    require_class_m(f, "log_F_prime_sum")?;
    table.require("prime sum", plan.prime_cutoff)?;
    let s = point.s();
    let sigma = point.sigma();
    let mut v = ComplexSum::new();
    let mut abs = CompensatedSum::new();
    for p in table.up_to(plan.prime_cutoff) {
        let p = *p as u64;
        let term = f.at_prime(p) * pow_neg((p as f64).ln(), s);
        abs.add(term.norm());
        v.add(term);
    }
    let mut defect = ComplexSum::new();
    let mut majorant = CompensatedSum::new();
    for p in table.up_to(plan.exact_factor_cutoff) {
        let p = *p as u64;
        let local = euler_factor_log(f, p, point, None)?;
        let first = f.at_prime(p) * pow_neg((p as f64).ln(), s);
        defect.add(local - first);
        majorant.add(local_defect_majorant(p, sigma));
    }
    let prime_tail_bound = integral_tail(plan.prime_cutoff as f64, sigma);
    // p > E >= 2 means p >= 3, where each defect is at most 3.75 p^{-2 sigma}.
    let defect_tail_bound =
        3.75 * integral_tail(plan.exact_factor_cutoff as f64, 2.0 * sigma);
    let rounding = ROUNDING * (abs.value() + majorant.value());
    Ok(PrimeSumEval {
        eval: EvalResult::new(
            v.value(),
            prime_tail_bound + defect_tail_bound + rounding,
            Method::EulerProduct,
        ),
        defect: defect.value(),
        defect_majorant: majorant.value(),
        prime_tail_bound,
        defect_tail_bound,
        rounding,
    })
}

/// `F(s) = exp(V + Delta)` from [`log_F_prime_sum`].
#[allow(non_snake_case)]
pub fn F_euler_product(
    f: &MultiplicativeFunction,
    point: ComplexPoint,
    plan: &TruncationPlan,
    table: &PrimeTable,
) -> Result<EvalResult> {
    Ok(log_F_prime_sum(f, point, plan, table)?
        .log_f()
        .exp()
        .with_method(Method::EulerProduct))
}

/// Comparison of `f` on primes with `c * p^{-i tau}`, `c = +-1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pairing {
    pub sign: i8,
    pub tau: f64,
    /// The match is exact for primes `p >= exact_from`; `u64::MAX` if never.
    pub exact_from: u64,
}

impl Pairing {
    pub fn from_tail(tail: PrimeTail) -> Self {
        Self {
            sign: tail.sign,
            tau: tail.tau,
            exact_from: tail.from,
        }
    }

    /// Pairing suggested by a Halász direction: `eps0 f(p) p^{-i t0}` near `-1`
    /// means `f(p)` near `-eps0 p^{i t0}`.
    pub fn from_direction(epsilon0: i8, t0: f64) -> Self {
        Self {
            sign: -epsilon0,
            tau: -t0,
            exact_from: u64::MAX,
        }
    }

    /// Bound on `sum_{p > P} |f(p) p^{-s} - c p^{-s - i tau}|`, from `|f| <= 1`
    /// below `exact_from` and exact cancellation above it.
    pub fn first_order_tail(&self, prime_cutoff: u64, sigma: f64) -> f64 {
        let p = prime_cutoff as f64;
        let from = self.exact_from.saturating_sub(1) as f64;
        if from <= p {
            0.0
        } else {
            2.0 * (integral_tail(p, sigma) - integral_tail(from, sigma))
        }
    }
}

/// `F(s) = zeta(s + i tau)^c * G(s)` with
/// `G(s) = prod_{p <= P} L_p(s) (1 - p^{-s - i tau})^c`.
///
/// Pairing cancels the slowly convergent first-order prime sum against zeta,
/// so when `f` is eventually `c p^{-i tau}` on primes the tail of `G` is only
/// `O(P^{1 - 2 sigma})`. With `pairing = None` the function's declared prime
/// tail is used; if it has none, this falls back to [`F_euler_product`].
#[allow(non_snake_case)]
pub fn F_paired(
    f: &MultiplicativeFunction,
    point: ComplexPoint,
    prime_cutoff: u64,
    table: &PrimeTable,
    pairing: Option<Pairing>,
) -> Result<EvalResult> {
    require_class_m(f, "F_paired")?;
    table.require("paired Euler product", prime_cutoff)?;
    let pairing = match pairing.or_else(|| f.prime_tail().map(Pairing::from_tail)) {
        Some(p) => p,
        None => {
            let plan = TruncationPlan::new(2, prime_cutoff, prime_cutoff.min(1 << 16))?;
            return F_euler_product(f, point, &plan, table);
        }
    };
    let sigma = point.sigma();
    let w = point.shifted(pairing.tau);
    let c = pairing.sign as f64;
    let mut log_g = ComplexSum::new();
    let mut abs = CompensatedSum::new();
    for p in table.up_to(prime_cutoff) {
        let p = *p as u64;
        let local = euler_factor_log(f, p, point, None)?;
        let zeta_local = c * (Complex64::new(1.0, 0.0) - pow_neg((p as f64).ln(), w.s())).ln();
        abs.add(local.norm() + zeta_local.norm());
        log_g.add(local + zeta_local);
    }
    let tail = pairing.first_order_tail(prime_cutoff, sigma)
        + 4.5 * integral_tail(prime_cutoff as f64, 2.0 * sigma);
    let g = EvalResult::new(
        log_g.value(),
        tail + ROUNDING * abs.value(),
        Method::Combined,
    )
    .exp();
    let z = zeta(w);
    let zc = if pairing.sign > 0 { z } else { z.recip() };
    Ok(zc.mul(&g).with_method(Method::PairedEulerProduct))
}

/// `min |zeta(sigma + it)| * log(|t| + 2)` over a grid; a finite-range probe
/// of `1/zeta(sigma + it) << log(|t| + 2)`.
pub fn reciprocal_zeta_probe(sigmas: &[f64], t_min: f64, t_max: f64, step: f64) -> Result<f64> {
    if !(step > 0.0 && t_min <= t_max) {
        return Err(LabError::MalformedParams("bad t range".into()));
    }
    let steps = ((t_max - t_min) / step).round() as i64;
    let mut points = Vec::new();
    for &sigma in sigmas {
        for j in 0..=steps {
            points.push(ComplexPoint::new(sigma, t_min + j as f64 * step)?);
        }
    }
    Ok(points
        .par_iter()
        .map(|pt| {
            let z = zeta(*pt);
            (z.value.norm() - z.error_bound) * (pt.t().abs() + 2.0).ln()
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(f64::INFINITY, f64::min))
}

/// CSV `sigma,t,re,im,abs,err,method`.
pub fn write_eval_csv<W: Write>(
    mut out: W,
    rows: &[(ComplexPoint, EvalResult)],
    comment: Option<&str>,
) -> std::io::Result<()> {
    if let Some(c) = comment {
        writeln!(out, "# {c}")?;
    }
    writeln!(out, "sigma,t,re,im,abs,err,method")?;
    for (pt, r) in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            pt.sigma(),
            pt.t(),
            r.value.re,
            r.value.im,
            r.value.norm(),
            r.error_bound,
            r.method
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multfun::builtin;
    use crate::primes::{sieve_primes, spf_table};

    #[test]
    fn point_validation() {
        assert!(ComplexPoint::new(1.0, 0.0).is_err());
        assert!(ComplexPoint::new(0.5, 3.0).is_err());
        assert!(ComplexPoint::new(f64::NAN, 0.0).is_err());
        assert!(ComplexPoint::new(1.0 + 1e-9, -4.0).is_ok());
    }

    #[test]
    fn plan_validation() {
        assert!(TruncationPlan::new(1, 10, 2).is_err());
        assert!(TruncationPlan::new(10, 10, 11).is_err());
        assert!(TruncationPlan::new(10, 10, 1).is_err());
        assert!(TruncationPlan::new(10, 10, 10).is_ok());
    }

    #[test]
    fn zeta_large_sigma() {
        let z = zeta(ComplexPoint::real(10.0).unwrap());
        assert!(z.value.re > 1.0009 && z.value.re < 1.0010);
        assert!(z.value.im.abs() < 1e-15);
        assert!(z.error_bound <= ZETA_TARGET);
    }

    #[test]
    fn zeta_pole_residue() {
        for sigma in [1.001, 1.0001] {
            let z = zeta(ComplexPoint::real(sigma).unwrap());
            let r = (sigma - 1.0) * z.value.re;
            assert!((0.9..=1.1).contains(&r), "{sigma}: {r}");
        }
    }

    #[test]
    fn zeta_conjugate_symmetry() {
        let a = zeta(ComplexPoint::new(1.3, 7.5).unwrap()).value;
        let b = zeta(ComplexPoint::new(1.3, -7.5).unwrap()).value;
        assert!((a - b.conj()).norm() < 1e-12);
    }

    #[test]
    fn eval_arithmetic() {
        let a = EvalResult::new(Complex64::new(2.0, 0.0), 0.1, Method::Combined);
        let r = a.recip();
        assert!((r.value.re - 0.5).abs() < 1e-15);
        // 1/1.9 - 1/2
        assert!((r.error_bound - (1.0 / 1.9 - 0.5)).abs() < 1e-15);
        let zero = EvalResult::new(Complex64::new(0.01, 0.0), 0.1, Method::Combined);
        assert!(zero.recip().error_bound.is_infinite());
        let e = EvalResult::new(Complex64::new(0.0, 0.0), 0.01, Method::Combined).exp();
        assert!((e.error_bound - 0.01f64.exp_m1()).abs() < 1e-15);
    }

    #[test]
    fn truncated_one_at_two() {
        let spf = spf_table(100).unwrap();
        let plan = TruncationPlan::new(100, 100, 2).unwrap();
        let one = builtin("one", &[]).unwrap();
        let r = F_truncated(&one, ComplexPoint::real(2.0).unwrap(), &plan, &spf).unwrap();
        assert!((r.error_bound - 0.01).abs() < 1e-9);
        let zeta2 = std::f64::consts::PI.powi(2) / 6.0;
        assert!((r.value.re - zeta2).abs() <= r.error_bound);
    }

    #[test]
    fn truncated_requires_class_m_and_coverage() {
        let spf = spf_table(100).unwrap();
        let plan = TruncationPlan::new(1000, 100, 2).unwrap();
        let one = builtin("one", &[]).unwrap();
        let pt = ComplexPoint::real(2.0).unwrap();
        assert!(matches!(
            F_truncated(&one, pt, &plan, &spf),
            Err(LabError::Coverage { .. })
        ));
        let big = MultiplicativeFunction::from_fn("big", Default::default(), |_, _| {
            Complex64::new(2.0, 0.0)
        });
        let plan = TruncationPlan::new(10, 10, 2).unwrap();
        assert!(matches!(
            F_truncated(&big, pt, &plan, &spf),
            Err(LabError::Domain(_))
        ));
    }

    #[test]
    fn partial_summation_empty_integral() {
        let one = builtin("one", &[]).unwrap();
        let trace = crate::multfun::summatory_trace(
            &one,
            10,
            &crate::multfun::CheckpointGrid::Dense,
        )
        .unwrap();
        let pt = ComplexPoint::new(2.0, 1.0).unwrap();
        let r = F_partial_summation(&trace, pt, 1.0).unwrap();
        assert_eq!(r.value, Complex64::new(0.0, 0.0));
        assert!((r.error_bound - pt.s().norm() / 1.0).abs() < 1e-12);
        assert!(matches!(
            F_partial_summation(&trace, pt, 11.0),
            Err(LabError::Coverage { .. })
        ));
        assert!(F_partial_summation(&trace, pt, 0.5).is_err());
    }

    #[test]
    fn partial_summation_matches_truncation_for_one() {
        let one = builtin("one", &[]).unwrap();
        let trace = crate::multfun::summatory_trace(
            &one,
            1000,
            &crate::multfun::CheckpointGrid::Dense,
        )
        .unwrap();
        let pt = ComplexPoint::real(2.0).unwrap();
        let ps = F_partial_summation(&trace, pt, 1000.0).unwrap();
        let spf = spf_table(1000).unwrap();
        let tr = F_truncated(&one, pt, &TruncationPlan::new(1000, 1000, 2).unwrap(), &spf).unwrap();
        assert!(ps.overlaps(&tr));
        // exact identity: sum_{n<=X} n^{-s} = S(X) X^{-s} + s int_1^X S y^{-s-1}
        assert!((tr.value.re - ps.value.re - 1000.0 / 1e6).abs() < 1e-13);
    }

    #[test]
    fn euler_factor_closed_forms() {
        let lambda = builtin("liouville", &[]).unwrap();
        let pt = ComplexPoint::real(2.0).unwrap();
        let l = euler_factor_log(&lambda, 3, pt, None).unwrap();
        assert!((l.re + (10.0f64 / 9.0).ln()).abs() < 1e-12);
        let odd = builtin("odd_one", &[]).unwrap();
        assert_eq!(euler_factor_log(&odd, 2, pt, None).unwrap(), Complex64::new(0.0, 0.0));
        // completely multiplicative: log(1/(1 - f(p) p^{-s}))
        let f = builtin("one", &[]).unwrap().twisted(0.7);
        let q = ComplexPoint::new(1.2, 3.0).unwrap();
        for p in [2u64, 3, 5, 101] {
            let x = f.at_prime(p) * pow_neg((p as f64).ln(), q.s());
            let closed = -(Complex64::new(1.0, 0.0) - x).ln();
            assert!((euler_factor_log(&f, p, q, None).unwrap() - closed).norm() < 1e-12);
        }
    }

    #[test]
    fn singular_factor_at_two() {
        let pt = ComplexPoint::real(1.5).unwrap();
        let zero = MultiplicativeFunction::from_fn(
            "zero-factor",
            Default::default(),
            |_, _| Complex64::new(-2f64.powf(1.5), 0.0),
        );
        assert!(matches!(
            euler_factor_log(&zero, 2, pt, Some(1)),
            Err(LabError::SingularFactor { p: 2 })
        ));
    }

    #[test]
    fn prime_sum_liouville_and_odd_one() {
        let table = sieve_primes(1_000_000).unwrap();
        let plan = TruncationPlan::new(2, 1_000_000, 1000).unwrap();
        let pt = ComplexPoint::real(2.0).unwrap();
        // prime zeta P(2) = 0.452247420041065...
        const P2: f64 = 0.452_247_420_041_065_5;
        let lam = log_F_prime_sum(&builtin("liouville", &[]).unwrap(), pt, &plan, &table).unwrap();
        assert!((lam.eval.value.re + P2).abs() <= lam.prime_sum().error_bound);
        assert!(lam.prime_sum().error_bound < 1.1e-6);
        let odd = log_F_prime_sum(&builtin("odd_one", &[]).unwrap(), pt, &plan, &table).unwrap();
        assert!((odd.eval.value.re - (P2 - 0.25)).abs() <= odd.prime_sum().error_bound);
        assert!(lam.defect_majorant >= lam.defect.norm());
        assert!(odd.defect_majorant >= odd.defect.norm());
    }

    #[test]
    fn csv_layout() {
        let pt = ComplexPoint::new(2.0, 0.5).unwrap();
        let r = EvalResult::new(Complex64::new(1.0, -1.0), 0.25, Method::EulerMaclaurin);
        let mut buf = Vec::new();
        write_eval_csv(&mut buf, &[(pt, r)], None).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "sigma,t,re,im,abs,err,method");
        assert!(lines[1].starts_with("2,0.5,1,-1,1.414"));
        assert!(lines[1].ends_with(",0.25,euler-maclaurin"));
    }
}
