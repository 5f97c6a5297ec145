//! Diagnostics for the pole/zero criterion on the one-line: criterion sums,
//! the prime-sum defect against `log zeta`, and the ratio quantities probed on
//! finite grids.

use std::f64::consts::PI;
use std::fmt;
use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::dirichlet::{
    integral_tail, pow_neg, zeta, ComplexPoint, EvalResult, Method, Pairing, F_paired,
};
use crate::error::{LabError, Result};
use crate::multfun::{CheckpointGrid, MultiplicativeFunction, SummatoryTrace, TWO_ADIC_TOL};
use crate::primes::PrimeTable;
use crate::sum::{CompensatedSum, ComplexSum};

/// Terms of a criterion sum may dip below zero by this much from rounding.
pub const NONNEG_TOL: f64 = 1e-12;

/// A candidate pole (`epsilon0 = -1`) or zero (`epsilon0 = +1`) at `1 + i t0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalaszDirection {
    epsilon0: i8,
    t0: f64,
}

impl HalaszDirection {
    pub fn new(epsilon0: i8, t0: f64) -> Result<Self> {
        if epsilon0 != 1 && epsilon0 != -1 {
            return Err(LabError::MalformedParams(format!(
                "epsilon0 must be +1 or -1, got {epsilon0}"
            )));
        }
        if !t0.is_finite() {
            return Err(LabError::MalformedParams(format!("t0 must be finite, got {t0}")));
        }
        Ok(Self { epsilon0, t0 })
    }

    pub fn zero(t0: f64) -> Self {
        Self { epsilon0: 1, t0 }
    }

    pub fn pole(t0: f64) -> Self {
        Self { epsilon0: -1, t0 }
    }

    pub fn epsilon0(&self) -> i8 {
        self.epsilon0
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    /// `epsilon0 * f(p) * p^{-i t0}`.
    pub fn rotate(&self, fp: Complex64, p: u64) -> Complex64 {
        fp * self.epsilon0 as f64 * Complex64::from_polar(1.0, -self.t0 * (p as f64).ln())
    }
}

/// Partial sums of `sum_p (1 + epsilon0 Re(f(p) p^{-i t0})) / p`.
#[derive(Debug, Clone, PartialEq)]
pub struct PoleSum {
    pub direction: HalaszDirection,
    /// `(x, sum_{p <= x})` at geometric checkpoints.
    pub checkpoints: Vec<(u64, f64)>,
    pub total: f64,
}

impl PoleSum {
    /// Partial sum at the largest checkpoint `<= x`.
    pub fn at(&self, x: u64) -> f64 {
        let i = self.checkpoints.partition_point(|&(c, _)| c <= x);
        if i == 0 {
            0.0
        } else {
            self.checkpoints[i - 1].1
        }
    }

    /// CSV `P,partial_sum`.
    pub fn write_csv<W: Write>(&self, mut out: W, comment: Option<&str>) -> std::io::Result<()> {
        if let Some(c) = comment {
            writeln!(out, "# {c}")?;
        }
        writeln!(out, "P,partial_sum")?;
        for (x, s) in &self.checkpoints {
            writeln!(out, "{x},{s}")?;
        }
        Ok(())
    }
}

/// The criterion sum up to `cutoff`. Every term must be nonnegative (it is,
/// whenever `|f(p)| <= 1`); a negative term is reported as a class violation.
pub fn pole_sum(
    f: &MultiplicativeFunction,
    direction: HalaszDirection,
    cutoff: u64,
    table: &PrimeTable,
) -> Result<PoleSum> {
    table.require("pole sum", cutoff)?;
    let grid = CheckpointGrid::default().points(cutoff)?;
    let mut next = grid.iter().copied().peekable();
    let mut acc = CompensatedSum::new();
    let mut checkpoints = Vec::with_capacity(grid.len());
    let mut flush = |x_upto: u64, acc: &CompensatedSum, cps: &mut Vec<(u64, f64)>| {
        while let Some(&x) = next.peek() {
            if x < x_upto {
                cps.push((x, acc.value()));
                next.next();
            } else {
                break;
            }
        }
    };
    for p in table.up_to(cutoff) {
        let p = *p as u64;
        flush(p, &acc, &mut checkpoints);
        let gap = 1.0 + direction.rotate(f.at_prime(p), p).re;
        if gap < -NONNEG_TOL {
            return Err(LabError::ClassViolation {
                p,
                k: 1,
                detail: format!("criterion term 1 + eps0 Re(...) = {gap} is negative"),
            });
        }
        acc.add(gap / p as f64);
    }
    flush(u64::MAX, &acc, &mut checkpoints);
    Ok(PoleSum {
        direction,
        checkpoints,
        total: acc.value(),
    })
}

/// `epsilon0 f(p) p^{-i t0} = -|f(p)| e^{i theta}` with `theta` in `(-pi, pi]`,
/// together with the three sides of
/// `1 + eps0 Re(...) >= |f(p)| (1 - cos theta) >= |f(p)| theta^2 / (2 pi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaValue {
    pub p: u64,
    pub theta: f64,
    pub modulus: f64,
    pub gap: f64,
    pub cosine_side: f64,
    pub quadratic_side: f64,
}

impl ThetaValue {
    /// Whether the inequality chain holds up to `tol`.
    pub fn chain_holds(&self, tol: f64) -> bool {
        self.gap >= self.cosine_side - tol && self.cosine_side >= self.quadratic_side - tol
    }

    /// `-|f(p)| e^{i theta}`; equals the rotated value it was built from.
    pub fn reconstruct(&self) -> Complex64 {
        -Complex64::from_polar(self.modulus, self.theta)
    }
}

/// Angle decomposition of a given value `f(p)`. For `f(p) = 0` the angle is
/// set to 0 and the chain reads `1 >= 0 >= 0`.
pub fn theta_of_value(fp: Complex64, direction: HalaszDirection, p: u64) -> ThetaValue {
    let z = direction.rotate(fp, p);
    let modulus = z.norm();
    let theta = if modulus == 0.0 {
        0.0
    } else {
        let a = (-z).arg();
        if a <= -PI {
            PI
        } else {
            a
        }
    };
    ThetaValue {
        p,
        theta,
        modulus,
        gap: 1.0 + z.re,
        cosine_side: modulus * (1.0 - theta.cos()),
        quadratic_side: modulus * theta * theta / (2.0 * PI),
    }
}

pub fn theta_decomposition(
    f: &MultiplicativeFunction,
    direction: HalaszDirection,
    p: u64,
) -> ThetaValue {
    theta_of_value(f.at_prime(p), direction, p)
}

/// `D = eps0 sum_p f(p) p^{-s} + log zeta(s - i t0)` and its size relative to
/// `sqrt(log 1/(sigma - 1))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LemmaDefect {
    pub point: ComplexPoint,
    /// Paired evaluation `sum_{p <= P} [eps0 f(p) p^{-s} - log(1 - p^{-(s - i t0)})]`.
    pub value: EvalResult,
    /// `|D| / sqrt(log 1/(sigma - 1))`.
    pub normalized: f64,
    /// Unpaired evaluation: truncated prime sum plus the principal log of `zeta(s - i t0)`.
    pub direct: EvalResult,
}

/// Evaluates the defect at `point`.
///
/// The prime sum of `f` and the prime sum hidden in `log zeta` are summed
/// together over `p <= P`, so their common divergent part cancels before
/// truncation. The first-order tail is bounded by `2 P^{1-sigma}/(sigma-1)`,
/// or by zero above the point where `f` is known to match the direction exactly.
pub fn lemma_defect(
    f: &MultiplicativeFunction,
    direction: HalaszDirection,
    point: ComplexPoint,
    prime_cutoff: u64,
    table: &PrimeTable,
) -> Result<LemmaDefect> {
    let sigma = point.sigma();
    if sigma - 1.0 > (-1.0f64).exp() + 1e-15 {
        return Err(LabError::Domain(format!(
            "lemma defect needs sigma - 1 <= 1/e, got sigma = {sigma}"
        )));
    }
    if !f.flags().claims_m {
        return Err(LabError::Domain(format!(
            "lemma defect needs class M; `{}` does not claim it",
            f.label()
        )));
    }
    table.require("lemma defect", prime_cutoff)?;
    let eps = direction.epsilon0() as f64;
    let s = point.s();
    let w = point.shifted(-direction.t0());
    let one = Complex64::new(1.0, 0.0);

    let mut paired = ComplexSum::new();
    let mut prime_only = ComplexSum::new();
    let mut abs = CompensatedSum::new();
    for p in table.up_to(prime_cutoff) {
        let p = *p as u64;
        let lp = (p as f64).ln();
        let term = eps * f.at_prime(p) * pow_neg(lp, s);
        let zeta_local = -(one - pow_neg(lp, w.s())).ln();
        abs.add(term.norm() + zeta_local.norm());
        paired.add(term + zeta_local);
        prime_only.add(term);
    }
    let rounding = 8.0 * f64::EPSILON * abs.value();

    // f matches the direction exactly from here on, if its tail is declared.
    let exact_from = f
        .prime_tail()
        .filter(|tail| {
            tail.sign as f64 * eps == -1.0 && (tail.tau + direction.t0()).abs() < 1e-15
        })
        .map_or(u64::MAX, |tail| tail.from);
    let first_order = Pairing {
        sign: -direction.epsilon0(),
        tau: -direction.t0(),
        exact_from,
    }
    .first_order_tail(prime_cutoff, sigma);
    // |log(1 - x) + x| <= 0.75 |x|^2 for |x| <= 1/3
    let second_order = 0.75 * integral_tail(prime_cutoff as f64, 2.0 * sigma);
    let value = EvalResult::new(
        paired.value(),
        first_order + second_order + rounding,
        Method::PairedEulerProduct,
    );

    let log_zeta = zeta(w).ln();
    let direct = EvalResult::new(
        prime_only.value() + log_zeta.value,
        integral_tail(prime_cutoff as f64, sigma) + log_zeta.error_bound + rounding,
        Method::EulerProduct,
    );
    let normalized = value.value.norm() / (1.0 / (sigma - 1.0)).ln().sqrt();
    Ok(LemmaDefect {
        point,
        value,
        normalized,
        direct,
    })
}

/// One grid point of [`theorem1_ratio`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Theorem1Row {
    pub sigma: f64,
    pub f_value: EvalResult,
    /// `|F(sigma + i t0)|^{eps0} / (sigma - 1)` with its bound; `None` when
    /// `|F|` does not exceed its own error bound.
    pub ratio: Option<(f64, f64)>,
}

/// Pairing used for `F` near `1 + i t0`: the function's declared prime tail
/// when it has one, otherwise the one suggested by the direction.
pub fn pairing_for(f: &MultiplicativeFunction, direction: HalaszDirection) -> Pairing {
    f.prime_tail()
        .map(Pairing::from_tail)
        .unwrap_or_else(|| Pairing::from_direction(direction.epsilon0(), direction.t0()))
}

/// `|F(sigma + i t0)|^{eps0} / (sigma - 1)` along a grid in `(1, 3/2]`.
///
/// `F` comes from the zeta-paired Euler product, the only evaluator here whose
/// error stays bounded as `sigma` approaches 1.
pub fn theorem1_ratio(
    f: &MultiplicativeFunction,
    direction: HalaszDirection,
    sigma_grid: &[f64],
    prime_cutoff: u64,
    table: &PrimeTable,
) -> Result<Vec<Theorem1Row>> {
    if let Some(bad) = sigma_grid.iter().find(|&&s| !(s > 1.0 && s <= 1.5)) {
        return Err(LabError::Domain(format!(
            "theorem-1 grid must lie in (1, 3/2], got {bad}"
        )));
    }
    let pairing = pairing_for(f, direction);
    sigma_grid
        .par_iter()
        .map(|&sigma| {
            let point = ComplexPoint::new(sigma, direction.t0())?;
            let fv = F_paired(f, point, prime_cutoff, table, Some(pairing))?;
            let (a, e) = (fv.value.norm(), fv.error_bound);
            let ratio = if a > e {
                Some(if direction.epsilon0() > 0 {
                    (a / (sigma - 1.0), e / (sigma - 1.0))
                } else {
                    (1.0 / (a * (sigma - 1.0)), e / (a * (a - e) * (sigma - 1.0)))
                })
            } else {
                None
            };
            Ok(Theorem1Row {
                sigma,
                f_value: fv,
                ratio,
            })
        })
        .collect()
}

/// CSV `sigma,t,quantity,err`; unresolved ratios print as `indeterminate`.
pub fn write_theorem1_csv<W: Write>(
    mut out: W,
    t0: f64,
    rows: &[Theorem1Row],
    comment: Option<&str>,
) -> std::io::Result<()> {
    if let Some(c) = comment {
        writeln!(out, "# {c}")?;
    }
    writeln!(out, "sigma,t,quantity,err")?;
    for row in rows {
        match row.ratio {
            Some((r, e)) => writeln!(out, "{},{},{},{}", row.sigma, t0, r, e)?,
            None => writeln!(
                out,
                "{},{},indeterminate,{}",
                row.sigma, t0, row.f_value.error_bound
            )?,
        }
    }
    Ok(())
}

/// CSV `sigma,t,quantity,err` for defects; `quantity` is `|D|` normalized.
pub fn write_lemma_csv<W: Write>(
    mut out: W,
    rows: &[LemmaDefect],
    comment: Option<&str>,
) -> std::io::Result<()> {
    if let Some(c) = comment {
        writeln!(out, "# {c}")?;
    }
    writeln!(out, "sigma,t,quantity,err")?;
    for d in rows {
        let scale = (1.0 / (d.point.sigma() - 1.0)).ln().sqrt();
        writeln!(
            out,
            "{},{},{},{}",
            d.point.sigma(),
            d.point.t(),
            d.normalized,
            d.value.error_bound / scale
        )?;
    }
    Ok(())
}

/// `|S_f(x)| log x / (x exp(c sqrt(log log x)))` at every checkpoint with `x >= 16`.
pub fn theorem2_ratio(trace: &SummatoryTrace, c: f64) -> Vec<(u64, f64)> {
    trace
        .checkpoints
        .iter()
        .filter(|cp| cp.x >= 16)
        .map(|cp| {
            let x = cp.x as f64;
            let lx = x.ln();
            (cp.x, cp.s.norm() * lx / (x * (c * lx.ln().sqrt()).exp()))
        })
        .collect()
}

/// CSV `x,ratio`.
pub fn write_theorem2_csv<W: Write>(
    mut out: W,
    rows: &[(u64, f64)],
    comment: Option<&str>,
) -> std::io::Result<()> {
    if let Some(c) = comment {
        writeln!(out, "# {c}")?;
    }
    writeln!(out, "x,ratio")?;
    for (x, r) in rows {
        writeln!(out, "{x},{r}")?;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    SumSide,
    TwoAdicSide,
    Fails,
    Indeterminate,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::SumSide => "criterion satisfied (sum side)",
            Verdict::TwoAdicSide => "criterion satisfied (2-adic side)",
            Verdict::Fails => "criterion fails",
            Verdict::Indeterminate => "indeterminate at this cutoff",
        })
    }
}

/// Growth over the last decade at least this fraction of the `log log`
/// growth counts as divergence.
pub const DIVERGENCE_FRACTION: f64 = 0.5;
/// Growth below this fraction counts as convergence.
pub const CONVERGENCE_FRACTION: f64 = 0.1;

#[derive(Debug, Clone, PartialEq)]
pub struct CriterionReport {
    pub label: String,
    pub t: f64,
    pub cutoff: u64,
    pub sum: PoleSum,
    /// `S(P) - S(P/10)` and `log log P - log log (P/10)`.
    pub decade_growth: Option<(f64, f64)>,
    pub two_adic_k: u32,
    pub two_adic_first_failure: Option<u32>,
    pub verdict: Verdict,
}

impl fmt::Display for CriterionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "function: {}", self.label)?;
        writeln!(f, "t: {}", self.t)?;
        writeln!(f, "cutoff: {}", self.cutoff)?;
        writeln!(f, "sum_total: {}", self.sum.total)?;
        match self.decade_growth {
            Some((g, r)) => {
                writeln!(f, "last_decade_growth: {g}")?;
                writeln!(f, "last_decade_loglog_growth: {r}")?;
            }
            None => writeln!(f, "last_decade_growth: unavailable")?,
        }
        writeln!(f, "two_adic_k_checked: {}", self.two_adic_k)?;
        match self.two_adic_first_failure {
            Some(k) => writeln!(f, "two_adic_first_failure_k: {k}")?,
            None => writeln!(f, "two_adic_first_failure_k: none")?,
        }
        writeln!(f, "verdict: {}", self.verdict)
    }
}

/// Checks "`sum_p (1 - Re f(p) p^{-it})/p` diverges, or `f(2^k) = -2^{ikt}` for all k".
///
/// The 2-adic side is an exact test for `k <= max_k` and takes precedence.
/// Divergence is a heuristic on the last decade below the cutoff: growth of at
/// least half the `log log` growth means divergent, under a tenth means
/// convergent, anything between (or a cutoff below 100) is indeterminate.
pub fn criterion_report(
    f: &MultiplicativeFunction,
    t: f64,
    cutoff: u64,
    max_k: u32,
    table: &PrimeTable,
) -> Result<CriterionReport> {
    let sum = pole_sum(f, HalaszDirection::pole(t), cutoff, table)?;

    let mut first_failure = None;
    for k in 1..=max_k {
        let target = -Complex64::from_polar(1.0, k as f64 * t * 2f64.ln());
        if (f.rule_value(2, k) - target).norm() > TWO_ADIC_TOL {
            first_failure = Some(k);
            break;
        }
    }

    let decade_growth = (cutoff >= 100).then(|| {
        let lo = cutoff / 10;
        let g = partial_prime_sum(f, t, lo, cutoff, table);
        let r = (cutoff as f64).ln().ln() - (lo as f64).ln().ln();
        (g, r)
    });

    let verdict = if max_k >= 1 && first_failure.is_none() {
        Verdict::TwoAdicSide
    } else {
        match decade_growth {
            Some((g, r)) if g >= DIVERGENCE_FRACTION * r => Verdict::SumSide,
            Some((g, r)) if g < CONVERGENCE_FRACTION * r => Verdict::Fails,
            _ => Verdict::Indeterminate,
        }
    };
    Ok(CriterionReport {
        label: f.label().to_string(),
        t,
        cutoff,
        sum,
        decade_growth,
        two_adic_k: max_k,
        two_adic_first_failure: first_failure,
        verdict,
    })
}

/// `sum_{lo < p <= hi} (1 - Re f(p) p^{-it}) / p`.
fn partial_prime_sum(
    f: &MultiplicativeFunction,
    t: f64,
    lo: u64,
    hi: u64,
    table: &PrimeTable,
) -> f64 {
    let dir = HalaszDirection::pole(t);
    let primes = table.up_to(hi);
    let start = primes.partition_point(|&p| (p as u64) <= lo);
    primes[start..]
        .iter()
        .map(|&p| {
            let p = p as u64;
            (1.0 + dir.rotate(f.at_prime(p), p).re) / p as f64
        })
        .collect::<CompensatedSum>()
        .value()
}
