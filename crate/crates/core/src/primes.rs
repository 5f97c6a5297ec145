//! Prime generation, smallest-prime-factor tables and reciprocal prime sums.

use rayon::prelude::*;

use crate::error::{LabError, Result};
use crate::sum::CompensatedSum;

/// Default upper bound accepted by [`sieve_primes`].
pub const DEFAULT_SIEVE_CEILING: u64 = 1 << 32;

/// Default upper bound accepted by [`spf_table`]: 2^28 entries of `u32`, i.e. 1 GiB.
pub const DEFAULT_SPF_CEILING: u64 = 1 << 28;

/// Smallest segment handed to one sieving task.
const MIN_SEGMENT: u64 = 1 << 15;

/// All primes up to an inclusive limit, ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimeTable {
    limit: u64,
    primes: Vec<u32>,
}

impl PrimeTable {
    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn primes(&self) -> &[u32] {
        &self.primes
    }

    pub fn len(&self) -> usize {
        self.primes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.primes.is_empty()
    }

    pub fn iter(&self) -> impl DoubleEndedIterator<Item = u64> + ExactSizeIterator + '_ {
        self.primes.iter().map(|&p| p as u64)
    }

    /// Primes `p <= x`; `x` beyond the limit is clamped.
    pub fn up_to(&self, x: u64) -> &[u32] {
        let end = self.primes.partition_point(|&p| (p as u64) <= x);
        &self.primes[..end]
    }

    pub fn contains(&self, n: u64) -> bool {
        n <= u32::MAX as u64 && self.primes.binary_search(&(n as u32)).is_ok()
    }

    /// Fails unless the table reaches `x`.
    pub fn require(&self, what: &'static str, x: u64) -> Result<()> {
        if x > self.limit {
            Err(LabError::coverage(what, x, self.limit))
        } else {
            Ok(())
        }
    }
}

/// Primes up to `limit` with the default ceiling of 2^32.
pub fn sieve_primes(limit: u64) -> Result<PrimeTable> {
    sieve_primes_with_ceiling(limit, DEFAULT_SIEVE_CEILING)
}

pub fn sieve_primes_with_ceiling(limit: u64, ceiling: u64) -> Result<PrimeTable> {
    if limit < 2 {
        return Err(LabError::EmptyRange(format!(
            "no primes below {limit}; limit must be at least 2"
        )));
    }
    let ceiling = ceiling.min(DEFAULT_SIEVE_CEILING);
    if limit > ceiling {
        return Err(LabError::Capacity {
            requested: limit,
            ceiling,
        });
    }

    let root = limit.isqrt();
    let base = simple_sieve(root);
    let segment = root.max(MIN_SEGMENT);
    // segments cover the odd numbers of (root, limit]
    let start = root + 1;
    let n_segments = (limit + 1 - start).div_ceil(segment);

    let tail: Vec<Vec<u32>> = (0..n_segments)
        .into_par_iter()
        .map(|i| {
            let lo = start + i * segment;
            let hi = (lo + segment).min(limit + 1);
            sieve_segment(lo, hi, &base)
        })
        .collect();

    let mut primes = base;
    primes.reserve(tail.iter().map(Vec::len).sum());
    for chunk in tail {
        primes.extend_from_slice(&chunk);
    }
    Ok(PrimeTable { limit, primes })
}

fn simple_sieve(limit: u64) -> Vec<u32> {
    if limit < 2 {
        return Vec::new();
    }
    let n = limit as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if composite[i] {
            continue;
        }
        out.push(i as u32);
        let mut j = i * i;
        while j <= n {
            composite[j] = true;
            j += i;
        }
    }
    out
}

/// Primes in `[lo, hi)` given every prime up to `sqrt(hi - 1)`.
fn sieve_segment(lo: u64, hi: u64, base: &[u32]) -> Vec<u32> {
    let mut out = Vec::new();
    if lo <= 2 && 2 < hi {
        out.push(2);
    }
    // odd numbers only: index i <-> first_odd + 2i
    let first_odd = lo.max(3) | 1;
    if first_odd >= hi {
        return out;
    }
    let len = ((hi - first_odd).div_ceil(2)) as usize;
    let mut composite = vec![false; len];
    for &p in base.iter().skip(1) {
        let p = p as u64;
        if p * p >= hi {
            break;
        }
        let mut m = first_odd.div_ceil(p) * p;
        if m.is_multiple_of(2) {
            m += p;
        }
        let mut n = m.max(p * p);
        while n < hi {
            composite[((n - first_odd) / 2) as usize] = true;
            n += 2 * p;
        }
    }
    out.extend(
        composite
            .iter()
            .enumerate()
            .filter(|(_, &c)| !c)
            .map(|(i, _)| (first_odd + 2 * i as u64) as u32),
    );
    out
}

/// Smallest prime factor of every integer in `2..=limit`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpfTable {
    limit: u64,
    spf: Vec<u32>,
}

impl SpfTable {
    pub fn limit(&self) -> u64 {
        self.limit
    }

    /// Smallest prime factor of `n`, for `2 <= n <= limit`.
    pub fn spf(&self, n: u64) -> Option<u64> {
        if n < 2 || n > self.limit {
            None
        } else {
            Some(self.spf[n as usize] as u64)
        }
    }

    /// Factorization of `n` as ascending `(p, k)` pairs; empty for `n = 1`.
    pub fn factorize(&self, n: u64) -> Result<Vec<(u64, u32)>> {
        if n == 0 {
            return Err(LabError::Domain("cannot factor 0".into()));
        }
        if n > self.limit {
            return Err(LabError::coverage("factorization", n, self.limit));
        }
        let mut out = Vec::new();
        let mut m = n as usize;
        while m > 1 {
            let p = self.spf[m] as usize;
            let mut k = 0;
            while m.is_multiple_of(p) {
                m /= p;
                k += 1;
            }
            out.push((p as u64, k));
        }
        Ok(out)
    }
}

pub fn spf_table(limit: u64) -> Result<SpfTable> {
    spf_table_with_ceiling(limit, DEFAULT_SPF_CEILING)
}

/// Linear sieve. Memory is 4 bytes per entry, hence the separate, lower ceiling.
pub fn spf_table_with_ceiling(limit: u64, ceiling: u64) -> Result<SpfTable> {
    if limit < 2 {
        return Err(LabError::EmptyRange(format!(
            "spf table needs limit >= 2, got {limit}"
        )));
    }
    if limit > ceiling {
        return Err(LabError::Capacity {
            requested: limit,
            ceiling,
        });
    }
    let n = limit as usize;
    let mut spf = vec![0u32; n + 1];
    let mut primes: Vec<u32> = Vec::new();
    for i in 2..=n {
        if spf[i] == 0 {
            spf[i] = i as u32;
            primes.push(i as u32);
        }
        let si = spf[i];
        for &p in &primes {
            let j = i * p as usize;
            if p > si || j > n {
                break;
            }
            spf[j] = p;
        }
    }
    Ok(SpfTable { limit, spf })
}

/// `sum_{p <= x} 1/p`, accumulated in ascending order of `p`.
pub fn sum_reciprocal_primes(x: f64, table: &PrimeTable) -> Result<f64> {
    if !x.is_finite() {
        return Err(LabError::Domain(format!("x must be finite, got {x}")));
    }
    if x > table.limit as f64 {
        return Err(LabError::coverage(
            "reciprocal prime sum",
            x.ceil() as u64,
            table.limit,
        ));
    }
    if x < 2.0 {
        return Ok(0.0);
    }
    let acc: CompensatedSum = table
        .up_to(x.floor() as u64)
        .iter()
        .map(|&p| 1.0 / p as f64)
        .collect();
    Ok(acc.value())
}

/// Running `sum_{p <= x} 1/p` at each prime, for repeated lookups.
pub fn reciprocal_prefix_sums(table: &PrimeTable) -> Vec<f64> {
    let mut acc = CompensatedSum::new();
    table
        .primes
        .iter()
        .map(|&p| {
            acc.add(1.0 / p as f64);
            acc.value()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_limits() {
        assert_eq!(sieve_primes(10).unwrap().primes(), &[2, 3, 5, 7]);
        assert_eq!(sieve_primes(2).unwrap().primes(), &[2]);
        assert_eq!(sieve_primes(3).unwrap().primes(), &[2, 3]);
        assert_eq!(sieve_primes(4).unwrap().primes(), &[2, 3]);
    }

    #[test]
    fn rejects_bad_limits() {
        assert!(matches!(sieve_primes(1), Err(LabError::EmptyRange(_))));
        assert!(matches!(
            sieve_primes_with_ceiling(1000, 100),
            Err(LabError::Capacity { .. })
        ));
        assert!(matches!(
            sieve_primes((1 << 32) + 1),
            Err(LabError::Capacity { .. })
        ));
        assert!(matches!(spf_table(0), Err(LabError::EmptyRange(_))));
        assert!(matches!(
            spf_table_with_ceiling(1 << 20, 1 << 10),
            Err(LabError::Capacity { .. })
        ));
    }

    #[test]
    fn segment_boundaries_do_not_lose_primes() {
        // limits around segment and square boundaries
        for limit in [
            MIN_SEGMENT - 1,
            MIN_SEGMENT,
            MIN_SEGMENT + 1,
            2 * MIN_SEGMENT + 7,
            (MIN_SEGMENT + 3) * (MIN_SEGMENT + 3),
        ] {
            let t = sieve_primes(limit.min(3_000_000)).unwrap();
            let simple = simple_sieve(t.limit());
            assert_eq!(t.primes(), &simple[..], "limit {}", t.limit());
        }
    }

    #[test]
    fn spf_small() {
        let t = spf_table(12).unwrap();
        assert_eq!(t.spf(12), Some(2));
        assert_eq!(t.spf(9), Some(3));
        assert_eq!(t.spf(7), Some(7));
        assert_eq!(spf_table(2).unwrap().spf(2), Some(2));
        assert_eq!(t.spf(13), None);
        assert_eq!(t.factorize(12).unwrap(), vec![(2, 2), (3, 1)]);
        assert!(t.factorize(1).unwrap().is_empty());
        assert!(matches!(t.factorize(13), Err(LabError::Coverage { .. })));
    }

    #[test]
    fn reciprocal_sums() {
        let t = sieve_primes(1000).unwrap();
        let s10 = sum_reciprocal_primes(10.0, &t).unwrap();
        let exact = 1.0 / 2.0 + 1.0 / 3.0 + 1.0 / 5.0 + 1.0 / 7.0;
        assert!((s10 - exact).abs() < 1e-15);
        assert!((s10 - 1.176190).abs() < 1e-6);
        assert_eq!(sum_reciprocal_primes(2.0, &t).unwrap(), 0.5);
        assert_eq!(sum_reciprocal_primes(1.5, &t).unwrap(), 0.0);
        assert!(matches!(
            sum_reciprocal_primes(1001.0, &t),
            Err(LabError::Coverage { .. })
        ));
        let prefix = reciprocal_prefix_sums(&t);
        assert_eq!(prefix.len(), t.len());
        assert!((prefix[3] - exact).abs() < 1e-15);
    }

    #[test]
    fn lookup_helpers() {
        let t = sieve_primes(100).unwrap();
        assert_eq!(t.up_to(10), &[2, 3, 5, 7]);
        assert_eq!(t.up_to(1), &[] as &[u32]);
        assert_eq!(t.up_to(10_000).len(), 25);
        assert!(t.contains(97));
        assert!(!t.contains(91));
    }
}
