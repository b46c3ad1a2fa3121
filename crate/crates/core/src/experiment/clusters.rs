use rand::Rng;

use crate::error::{Error, Result};
use crate::partition::{Axis, ClusterPartition};

use super::config::GPolicy;

/// Distinct prime factors of `n` in increasing order.
pub fn prime_divisors(mut n: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            out.push(p);
            while n % p == 0 {
                n /= p;
            }
        }
        p += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Picks the cluster count for a dimension of size `n`. When `n` is prime
/// its only prime divisor would give singleton clusters, so the draw is
/// over `{1, n}` instead.
pub fn choose_clusters<R: Rng + ?Sized>(n: usize, policy: GPolicy, rng: &mut R) -> Result<usize> {
    if n == 0 {
        return Err(Error::InvalidArgument("cannot cluster an empty dimension".into()));
    }
    match policy {
        GPolicy::One => Ok(1),
        GPolicy::Fixed(g) if g == 0 || g > n => Err(Error::InvalidArgument(format!(
            "G = {g} is outside 1..={n}"
        ))),
        GPolicy::Fixed(g) => Ok(g),
        GPolicy::PrimeDivisorRandom => {
            let primes = prime_divisors(n);
            let choices = match primes.as_slice() {
                [] => vec![1],
                [p] if *p == n => vec![1, n],
                _ => primes,
            };
            Ok(choices[rng.random_range(0..choices.len())])
        }
    }
}

/// Contiguous blocks of `⌊n/G⌋`, the first `n mod G` one larger.
pub fn partition_indices(n: usize, g: usize, axis: Axis) -> Result<ClusterPartition> {
    ClusterPartition::contiguous(axis, n, g)
}
