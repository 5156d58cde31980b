//! Poisson integrals of a measure at an interval, exact for atoms and
//! uniform pieces.
//!
//! Two forms are provided: the interval-distance form with kernel
//! |I| / (|I| + dist(x, I))^2 and the centered form with |x - c_I| in place of
//! the distance. They differ by bounded factors only; both are exact.

use crate::interval::Interval;
use crate::measures::DiscreteMeasure;
use crate::rat::Rat;
use num::traits::{Signed, Zero};

/// Antiderivative helper: integral over [a, b] of |I| / (|I| + (p - x))^2 dx
/// for b <= p, i.e. mass approaching the left side of a reference point p.
fn side_integral(len: &Rat, p: &Rat, a: &Rat, b: &Rat) -> Rat {
    // primitive: len / (len + p - x)
    len / (len + p - b) - len / (len + p - a)
}

/// dist(x, I) form.
pub fn poisson(i: &Interval, mu: &DiscreteMeasure) -> Rat {
    let len = i.length();
    let mut acc = Rat::zero();
    for a in &mu.atoms {
        let d = i.dist_to_point(&a.pos);
        let denom = &len + d;
        acc += &a.mass * &len / (&denom * &denom);
    }
    for p in &mu.pieces {
        let dens = p.density();
        let (pa, pb) = (&p.interval.left, &p.interval.right);
        // left of I
        if *pa < i.left {
            let b = if *pb < i.left { pb.clone() } else { i.left.clone() };
            acc += &dens * side_integral(&len, &i.left, pa, &b);
        }
        // inside I
        if let Some(ov) = p.interval.intersect(i) {
            acc += &dens * ov.length() / &len;
        }
        // right of I: mirror via the same primitive
        if *pb > i.right {
            let a0 = if *pa > i.right { pa.clone() } else { i.right.clone() };
            // integral of len/(len + (x - r))^2 over [a0, pb]
            acc += &dens * side_integral(&len, &-&i.right, &-pb.clone(), &-a0);
        }
    }
    acc
}

/// |x - c_I| form.
pub fn poisson_centered(i: &Interval, mu: &DiscreteMeasure) -> Rat {
    let len = i.length();
    let c = i.midpoint();
    let mut acc = Rat::zero();
    for a in &mu.atoms {
        let d = (&a.pos - &c).abs();
        let denom = &len + d;
        acc += &a.mass * &len / (&denom * &denom);
    }
    for p in &mu.pieces {
        let dens = p.density();
        let (pa, pb) = (&p.interval.left, &p.interval.right);
        if *pa < c {
            let b = if *pb < c { pb.clone() } else { c.clone() };
            acc += &dens * side_integral(&len, &c, pa, &b);
        }
        if *pb > c {
            let a0 = if *pa > c { pa.clone() } else { c.clone() };
            acc += &dens * side_integral(&len, &-&c, &-pb.clone(), &-a0);
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{self, Piece};
    use crate::rat::{npow, rat, rint, to_f64};
    use crate::tree::{self, TreeAddress};
    use num::traits::Signed;

    #[test]
    fn atom_examples() {
        let i = Interval::unit();
        let center = DiscreteMeasure::single_atom(rat(1, 2), rint(1));
        assert_eq!(poisson(&i, &center), rint(1));
        let far = DiscreteMeasure::single_atom(rint(2), rint(1));
        assert_eq!(poisson(&i, &far), rat(1, 4));
    }

    #[test]
    fn uniform_piece_against_quadrature_oracle() {
        // piece [2, 3] against I = [0, 1]: closed form 1/(1+d) antiderivative
        let i = Interval::unit();
        let mu = DiscreteMeasure::new(
            vec![],
            vec![Piece { interval: Interval::new(rint(2), rint(3)), mass: rint(1) }],
        );
        let exact = poisson(&i, &mu);
        // oracle: integral of 1/(1 + (x-1))^2 from 2 to 3 = 1/2 - 1/3
        assert_eq!(exact, rat(1, 6));
        // Riemann check of the same value
        let mut acc = 0.0;
        let nsteps = 100_000;
        for k in 0..nsteps {
            let x = 2.0 + (k as f64 + 0.5) / nsteps as f64;
            acc += 1.0 / (1.0 + (x - 1.0)).powi(2);
        }
        acc /= nsteps as f64;
        assert!((to_f64(&exact) - acc).abs() < 1e-9);
    }

    #[test]
    fn straddling_piece_is_exact() {
        let i = Interval::new(rat(1, 4), rat(3, 4));
        let mu = DiscreteMeasure::new(
            vec![],
            vec![Piece { interval: Interval::unit(), mass: rint(1) }],
        );
        // left tail + inside + right tail, each in closed form
        let v = poisson(&i, &mu);
        // by symmetry: inside = (1/2)/(1/2) = 1... times density 1; tails equal
        let tail = side_integral(&rat(1, 2), &rat(1, 4), &rat(0, 1), &rat(1, 4));
        assert_eq!(v, rint(1) + tail * rint(2));
    }

    #[test]
    fn tree_interval_comparability_with_mass_ratio() {
        // Poisson of the redistributed measure at a tree interval is within a
        // tight window of mass/length
        let n = 16u32;
        let om = measures::redistributed_closed_form(n, 8).unwrap();
        let mut worst = 1.0f64;
        for lvl in 0..=6u32 {
            for addr in TreeAddress::all_at_level(lvl).into_iter().step_by(3) {
                let iv = tree::interval_of(&addr, n);
                let p = poisson(&iv, &om);
                let ratio = p.clone() * iv.length() / measures::omega_hat_node_mass(&addr, n);
                let rf = to_f64(&ratio);
                assert!((1.0..1.05).contains(&rf), "ratio {rf} at {addr}");
                worst = worst.max(rf);
            }
        }
        assert!(worst > 1.0);
    }

    #[test]
    fn centered_and_distance_forms_are_comparable() {
        // ratio lies in [1, 4]: (len + dist) <= (len + |x-c|) <= 2(len + dist)
        let om = measures::redistributed_closed_form(16, 6).unwrap();
        let sd = measures::sigma_dot(16, 5).unwrap();
        let mut rng = crate::random::rng_for(5, "poisson-forms", 0);
        for _ in 0..50 {
            let iv = crate::random::interval_in(&mut rng, &Interval::unit(), 1 << 16);
            for mu in [&om, &sd] {
                let a = poisson(&iv, mu);
                let b = poisson_centered(&iv, mu);
                assert!(b <= a && a <= rint(4) * &b, "forms incomparable on {iv}");
            }
        }
    }

    #[test]
    fn pointwise_layered_sum_comparability() {
        // the Poisson kernel against a layered sum of dilated indicators
        let n = 16u32;
        let mut rng = crate::random::rng_for(9, "pointwise", 0);
        for _ in 0..200 {
            let q = crate::random::interval_in(&mut rng, &Interval::unit(), 1 << 12);
            let y = crate::random::rat_in_interval(&mut rng, &Interval::new(rint(-2), rint(3)), 1 << 20);
            let lq = q.length();
            let c = q.midpoint();
            let s = (&y - &c).abs() / &lq;
            let lhs = lq.recip() / ((rint(1) + &s) * (rint(1) + &s));
            // smallest k with y in N^k Q
            let mut k = 0i32;
            while !q.scale_about_center(&npow(n, k)).contains(&y) {
                k += 1;
            }
            let rhs: Rat = lq.recip() * npow(n, -2 * k) / (rint(1) - npow(n, -2));
            let ratio = to_f64(&(lhs / rhs));
            assert!(
                (0.2..=(4 * n * n) as f64).contains(&ratio),
                "layered comparability fails: ratio {ratio} at k {k}"
            );
        }
    }
}
