//! Reproducible Monte Carlo over independent replicas.
//!
//! Replica `r` draws from the ChaCha stream `r` of the master seed, so its
//! trajectory does not depend on scheduling. Replicas are reduced in fixed
//! blocks and the blocks are merged in index order with compensated sums,
//! which makes the result bit-identical for any number of threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};

pub type ReplicaRng = ChaCha8Rng;

const BLOCK: usize = 256;

/// The RNG of replica `replica` under `seed`.
pub fn replica_rng(seed: u64, replica: u64) -> ReplicaRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replica);
    rng
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    /// Unbiased sample standard deviation over `√replicas`.
    pub std_error: f64,
    pub replicas: usize,
}

impl McEstimate {
    /// `true` when `value` lies within `k` standard errors of the mean, up
    /// to rounding.
    pub fn agrees_with(&self, value: f64, k: f64) -> bool {
        (self.mean - value).abs() <= k * self.std_error + 1e-12 * value.abs().max(1.0)
    }

    /// Number of standard errors separating the mean from `value`.
    pub fn z_score(&self, value: f64) -> f64 {
        let diff = (self.mean - value).abs();
        if self.std_error > 0.0 {
            diff / self.std_error
        } else if diff == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    }

    /// Delta-method estimate of `mean^{1/p}`.
    pub fn root(&self, p: f64) -> McEstimate {
        let mean = self.mean.max(0.0);
        let root = mean.powf(1.0 / p);
        let slope = if mean > 0.0 { root / (p * mean) } else { 0.0 };
        McEstimate { mean: root, std_error: slope * self.std_error, replicas: self.replicas }
    }
}

/// Neumaier compensated sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

#[derive(Debug, Clone)]
struct Moments {
    count: usize,
    sum: Vec<CompensatedSum>,
    sum_sq: Vec<CompensatedSum>,
}

impl Moments {
    fn new(width: usize) -> Self {
        Self { count: 0, sum: vec![CompensatedSum::default(); width], sum_sq: vec![CompensatedSum::default(); width] }
    }

    fn push(&mut self, x: &[f64], shift: &[f64]) {
        self.count += 1;
        for (i, (v, s)) in x.iter().zip(shift).enumerate() {
            let c = v - s;
            self.sum[i].add(c);
            self.sum_sq[i].add(c * c);
        }
    }

    fn merge(&mut self, other: &Moments) {
        self.count += other.count;
        for i in 0..self.sum.len() {
            self.sum[i].add(other.sum[i].value());
            self.sum_sq[i].add(other.sum_sq[i].value());
        }
    }
}

/// Runs `replicas` independent replicas of `sample`, each returning `width`
/// observables, and returns one estimate per observable.
pub fn replicate<F>(replicas: usize, seed: u64, width: usize, sample: F) -> Result<Vec<McEstimate>>
where
    F: Fn(&mut ReplicaRng) -> Result<Vec<f64>> + Sync,
{
    if replicas < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 replicas, got {replicas}")));
    }
    let run = |r: usize| -> Result<Vec<f64>> {
        let mut rng = replica_rng(seed, r as u64);
        let out = sample(&mut rng)?;
        if out.len() != width {
            return Err(Error::LengthMismatch { expected: width, got: out.len() });
        }
        Ok(out)
    };
    // shifting by replica 0 keeps the second moment well conditioned
    let shift = run(0)?;
    let blocks = replicas.div_ceil(BLOCK);
    let partial: Vec<Moments> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut m = Moments::new(width);
            for r in b * BLOCK..((b + 1) * BLOCK).min(replicas) {
                let x = if r == 0 { shift.clone() } else { run(r)? };
                m.push(&x, &shift);
            }
            Ok(m)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut total = Moments::new(width);
    for m in &partial {
        total.merge(m);
    }
    let n = total.count as f64;
    Ok((0..width)
        .map(|i| {
            let s = total.sum[i].value();
            let ss = total.sum_sq[i].value();
            let centered_mean = s / n;
            let var = ((ss - s * centered_mean) / (n - 1.0)).max(0.0);
            McEstimate { mean: shift[i] + centered_mean, std_error: (var / n).sqrt(), replicas }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn estimates_known_moments() {
        let est = replicate(20_000, 7, 2, |rng| {
            let u: f64 = rng.random();
            Ok(vec![u, 5.0])
        })
        .unwrap();
        assert!(est[0].agrees_with(0.5, 4.0));
        let expected_se = (1.0f64 / 12.0 / 20_000.0).sqrt();
        assert!((est[0].std_error / expected_se - 1.0).abs() < 0.05);
        assert_eq!(est[1].mean, 5.0);
        assert_eq!(est[1].std_error, 0.0);
    }

    #[test]
    fn independent_of_thread_count() {
        let go = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| replicate(3000, 11, 1, |rng| Ok(vec![rng.random::<f64>().ln()])).unwrap())
        };
        let a = go(1);
        let b = go(4);
        assert_eq!(a[0].mean.to_bits(), b[0].mean.to_bits());
        assert_eq!(a[0].std_error.to_bits(), b[0].std_error.to_bits());
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut s = CompensatedSum::default();
        s.add(1e16);
        for _ in 0..1000 {
            s.add(1.0);
        }
        s.add(-1e16);
        assert_eq!(s.value(), 1000.0);
    }

    #[test]
    fn rejects_single_replica() {
        assert!(replicate(1, 0, 1, |_| Ok(vec![0.0])).is_err());
    }
}
