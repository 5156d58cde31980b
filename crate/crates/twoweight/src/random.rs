//! Seeded, splittable randomness: every scan derives its own stream from the
//! run seed, a task label, and an index, so results do not depend on thread
//! scheduling or evaluation order.

use crate::interval::Interval;
use crate::rat::{Rat};
use num::BigInt;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn fnv1a(label: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.as_bytes() {
        h ^= *b as u64;
        h = h.wrapping_mul(0x1000_0000_01b3);
    }
    h
}

pub fn rng_for(seed: u64, label: &str, index: u64) -> ChaCha8Rng {
    let mixed = seed ^ fnv1a(label) ^ index.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    ChaCha8Rng::seed_from_u64(mixed)
}

/// Random rational strictly inside the interval, on a grid of `denom` steps.
pub fn rat_in_interval(rng: &mut ChaCha8Rng, iv: &Interval, denom: u64) -> Rat {
    let j = rng.random_range(1..denom);
    let frac = Rat::new(BigInt::from(j), BigInt::from(denom));
    &iv.left + iv.length() * frac
}

/// Random rational in (0, 1] on a grid of `denom` steps.
pub fn rat_in_unit(rng: &mut ChaCha8Rng, denom: u64) -> Rat {
    let j = rng.random_range(1..=denom);
    Rat::new(BigInt::from(j), BigInt::from(denom))
}

/// Random subinterval of `base` with endpoints on a grid of `denom` steps.
pub fn interval_in(rng: &mut ChaCha8Rng, base: &Interval, denom: u64) -> Interval {
    loop {
        let a = rng.random_range(0..denom);
        let b = rng.random_range(0..=denom);
        if a == b {
            continue;
        }
        let (a, b) = if a < b { (a, b) } else { (b, a) };
        let lo = &base.left + base.length() * Rat::new(BigInt::from(a), BigInt::from(denom));
        let hi = &base.left + base.length() * Rat::new(BigInt::from(b), BigInt::from(denom));
        return Interval::new(lo, hi);
    }
}

/// Random decomposition of `base` into at least two disjoint parts with
/// endpoints on a grid of `denom` steps.
pub fn decomposition_in(rng: &mut ChaCha8Rng, base: &Interval, denom: u64, max_parts: usize) -> Vec<Interval> {
    let parts = rng.random_range(2..=max_parts.max(2));
    let mut cuts: Vec<u64> = (0..parts - 1).map(|_| rng.random_range(1..denom)).collect();
    cuts.push(0);
    cuts.push(denom);
    cuts.sort_unstable();
    cuts.dedup();
    cuts.windows(2)
        .map(|w| {
            let lo = &base.left + base.length() * Rat::new(BigInt::from(w[0]), BigInt::from(denom));
            let hi = &base.left + base.length() * Rat::new(BigInt::from(w[1]), BigInt::from(denom));
            Interval::new(lo, hi)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::rat;

    #[test]
    fn streams_are_reproducible_and_split() {
        let mut a = rng_for(42, "task", 7);
        let mut b = rng_for(42, "task", 7);
        let mut c = rng_for(42, "task", 8);
        let (x, y, z): (u64, u64, u64) = (a.random(), b.random(), c.random());
        assert_eq!(x, y);
        assert_ne!(x, z);
    }

    #[test]
    fn sampled_points_stay_inside() {
        let iv = Interval::new(rat(1, 3), rat(1, 2));
        let mut rng = rng_for(1, "pts", 0);
        for _ in 0..100 {
            let p = rat_in_interval(&mut rng, &iv, 1 << 20);
            assert!(iv.contains_interior(&p));
        }
        let parts = decomposition_in(&mut rng, &Interval::unit(), 4096, 8);
        assert!(parts.len() >= 2);
        for w in parts.windows(2) {
            assert_eq!(w[0].right, w[1].left);
        }
    }
}
