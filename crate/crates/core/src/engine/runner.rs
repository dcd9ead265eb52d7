use rayon::prelude::*;

use super::Estimate;
use crate::rng::SeedSpec;

/// Paths per work unit. Partial results are merged in block order, so this
/// constant is part of the reproducibility contract.
pub(crate) const BLOCK_PATHS: u64 = 512;

/// Runs `n` paths in parallel blocks and returns the per-block accumulators
/// in block order.
pub(crate) fn run_blocks<A, M, F>(n: usize, make: M, f: F) -> Vec<A>
where
    A: Send,
    M: Fn() -> A + Sync,
    F: Fn(u64, &mut A) + Sync,
{
    let n = n as u64;
    let blocks = n.div_ceil(BLOCK_PATHS);
    (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut acc = make();
            let lo = b * BLOCK_PATHS;
            let hi = (lo + BLOCK_PATHS).min(n);
            for i in lo..hi {
                f(i, &mut acc);
            }
            acc
        })
        .collect()
}

/// Per-component running sums of per-path values.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Moments {
    pub count: u64,
    pub sum: Vec<f64>,
    pub sumsq: Vec<f64>,
}

impl Moments {
    pub fn new(m: usize) -> Self {
        Self {
            count: 0,
            sum: vec![0.0; m],
            sumsq: vec![0.0; m],
        }
    }

    #[inline]
    pub fn push(&mut self, values: &[f64]) {
        self.count += 1;
        for ((s, q), v) in self.sum.iter_mut().zip(self.sumsq.iter_mut()).zip(values) {
            *s += v;
            *q += v * v;
        }
    }

    pub fn merge(&mut self, other: &Moments) {
        self.count += other.count;
        for (s, o) in self.sum.iter_mut().zip(&other.sum) {
            *s += o;
        }
        for (s, o) in self.sumsq.iter_mut().zip(&other.sumsq) {
            *s += o;
        }
    }

    pub fn merge_all(parts: &[Moments], m: usize) -> Moments {
        let mut total = Moments::new(m);
        for part in parts {
            total.merge(part);
        }
        total
    }

    pub fn mean(&self, i: usize) -> f64 {
        self.sum[i] / self.count as f64
    }

    /// Sample mean with `sd/√n` standard error.
    pub fn estimate(&self, i: usize, seed: SeedSpec) -> Estimate {
        let n = self.count as f64;
        let mean = self.sum[i] / n;
        let var = if self.count > 1 {
            ((self.sumsq[i] - n * mean * mean) / (n - 1.0)).max(0.0)
        } else {
            0.0
        };
        Estimate {
            value: mean,
            stderr: (var / n).sqrt(),
            n: self.count,
            seed,
            flags: Vec::new(),
        }
    }

    /// Indicator mean with the binomial standard error.
    pub fn binomial(&self, i: usize, seed: SeedSpec) -> Estimate {
        Estimate::binomial(self.sum[i], self.count, seed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn blocks_cover_all_paths_in_order() {
        let parts = run_blocks(1300, Vec::new, |i, acc: &mut Vec<u64>| acc.push(i));
        let flat: Vec<u64> = parts.into_iter().flatten().collect();
        assert_eq!(flat, (0..1300).collect::<Vec<_>>());
    }

    #[test]
    fn moments_estimate() {
        let mut m = Moments::new(1);
        for v in [1.0, 2.0, 3.0, 4.0] {
            m.push(&[v]);
        }
        let e = m.estimate(0, SeedSpec::new(0, 0));
        assert_eq!(e.value, 2.5);
        assert!((e.stderr - (5.0f64 / 3.0 / 4.0).sqrt()).abs() < 1e-15);
    }
}
