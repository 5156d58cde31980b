//! The tree-restricted maximal function and its testing integral.

use super::FunctionalError;
use crate::interval::Interval;
use crate::measures::DiscreteMeasure;
use crate::rat::Rat;
use crate::tree::{self, TreeAddress};
use num::traits::Zero;

/// sup over tree intervals containing x, of levels <= depth, of the average
/// mass(mu restricted to q) / length. Exact rational.
pub fn maximal_restricted(
    q: &Interval,
    mu: &DiscreteMeasure,
    x: &Rat,
    n: u32,
    depth: u32,
) -> Rat {
    let restricted = mu.restrict(q, true);
    let mut best = Rat::zero();
    let mut addr = TreeAddress::root();
    for _ in 0..=depth {
        let iv = tree::interval_of(&addr, n);
        if !iv.contains(x) {
            break;
        }
        let avg = restricted.mass_on(&iv, true) / iv.length();
        if avg > best {
            best = avg;
        }
        let (lo, hi) = addr.children();
        if tree::interval_of(&lo, n).contains(x) {
            addr = lo;
        } else if tree::interval_of(&hi, n).contains(x) {
            addr = hi;
        } else {
            break; // x sits in the gap: no deeper tree interval contains it
        }
    }
    best
}

/// Exact testing integral of the squared maximal function:
/// integral over q of M(1_q sigma)^2 d(omega_m) divided by |q|_sigma.
///
/// The maximal function of the atomic measure is constant on each level-m
/// piece (deeper tree intervals contain no atoms), so the integral is a
/// finite exact sum over pieces, each weighted by the running maximum of the
/// ancestor averages.
pub fn maximal_testing(
    q: &Interval,
    sigma: &DiscreteMeasure,
    omega_m: &DiscreteMeasure,
    n: u32,
    m: u32,
) -> Result<Rat, FunctionalError> {
    let sigma_q = sigma.restrict(q, true);
    let normalizer = sigma_q.total_mass();
    if normalizer.is_zero() {
        return Err(FunctionalError::ZeroNormalizer(format!("{q}")));
    }
    fn descend(
        addr: &TreeAddress,
        best: &Rat,
        q: &Interval,
        sigma_q: &DiscreteMeasure,
        omega_m: &DiscreteMeasure,
        n: u32,
        m: u32,
        acc: &mut Rat,
    ) {
        let iv = tree::interval_of(addr, n);
        if iv.intersect(q).is_none() {
            return;
        }
        let avg = sigma_q.mass_on(&iv, true) / iv.length();
        let best = if avg > *best { avg } else { best.clone() };
        if addr.level() == m {
            // omega mass of this piece inside q, weighted by the square
            let mass = match iv.intersect(q) {
                Some(ov) => omega_m.mass_on(&ov, true),
                None => Rat::zero(),
            };
            *acc += mass * &best * &best;
            return;
        }
        let (lo, hi) = addr.children();
        descend(&lo, &best, q, sigma_q, omega_m, n, m, acc);
        descend(&hi, &best, q, sigma_q, omega_m, n, m, acc);
    }
    let mut acc = Rat::zero();
    descend(&TreeAddress::root(), &Rat::zero(), q, &sigma_q, omega_m, n, m, &mut acc);
    Ok(acc / normalizer)
}
