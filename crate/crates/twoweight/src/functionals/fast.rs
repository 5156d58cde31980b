//! f64 fast paths for the bulk scans.
//!
//! Exact Poisson sums over hundreds of pieces produce rationals of thousands
//! of bits (each piece contributes a fresh odd factor to the common
//! denominator), which is fine for single identity checks but not for
//! scans over thousands of intervals. The scans therefore run on f64 mirrors
//! of the measures and certify their top candidates through the exact path.
//! Relative float error here is ~1e-12, far below every scan tolerance.

use crate::measures::DiscreteMeasure;
use crate::rat::to_f64;

#[derive(Clone, Debug, Default)]
pub struct MeasureF64 {
    /// (position, mass)
    pub atoms: Vec<(f64, f64)>,
    /// (left, right, mass)
    pub pieces: Vec<(f64, f64, f64)>,
}

impl From<&DiscreteMeasure> for MeasureF64 {
    fn from(m: &DiscreteMeasure) -> Self {
        MeasureF64 {
            atoms: m.atoms.iter().map(|a| (to_f64(&a.pos), to_f64(&a.mass))).collect(),
            pieces: m
                .pieces
                .iter()
                .map(|p| (to_f64(&p.interval.left), to_f64(&p.interval.right), to_f64(&p.mass)))
                .collect(),
        }
    }
}

impl MeasureF64 {
    pub fn mass_on(&self, l: f64, r: f64) -> f64 {
        let mut acc = 0.0;
        for (x, m) in &self.atoms {
            if *x >= l && *x <= r {
                acc += m;
            }
        }
        for (a, b, m) in &self.pieces {
            let lo = a.max(l);
            let hi = b.min(r);
            if hi > lo {
                acc += m * (hi - lo) / (b - a);
            }
        }
        acc
    }

    /// Restricted moments (mass, first, second).
    pub fn moments_on(&self, l: f64, r: f64) -> (f64, f64, f64) {
        let (mut m0, mut m1, mut m2) = (0.0, 0.0, 0.0);
        for (x, m) in &self.atoms {
            if *x >= l && *x <= r {
                m0 += m;
                m1 += m * x;
                m2 += m * x * x;
            }
        }
        for (a, b, m) in &self.pieces {
            let lo = a.max(l);
            let hi = b.min(r);
            if hi > lo {
                let mass = m * (hi - lo) / (b - a);
                let mid = 0.5 * (lo + hi);
                let len = hi - lo;
                m0 += mass;
                m1 += mass * mid;
                m2 += mass * (mid * mid + len * len / 12.0);
            }
        }
        (m0, m1, m2)
    }

    /// Centered accumulation avoids the catastrophic cancellation of raw
    /// moments when the mass concentrates near one point.
    pub fn energy_squared_on(&self, l: f64, r: f64) -> Option<f64> {
        let c = 0.5 * (l + r);
        let (mut m0, mut s1, mut s2) = (0.0, 0.0, 0.0);
        for (x, m) in &self.atoms {
            if *x >= l && *x <= r {
                let d = x - c;
                m0 += m;
                s1 += m * d;
                s2 += m * d * d;
            }
        }
        for (a, b, m) in &self.pieces {
            let lo = a.max(l);
            let hi = b.min(r);
            if hi > lo {
                let mass = m * (hi - lo) / (b - a);
                let mid = 0.5 * (lo + hi) - c;
                let len = hi - lo;
                m0 += mass;
                s1 += mass * mid;
                s2 += mass * (mid * mid + len * len / 12.0);
            }
        }
        if m0 <= 0.0 {
            return None;
        }
        let len = r - l;
        let v = (m0 * s2 - s1 * s1) / (m0 * m0 * len * len);
        Some(v.max(0.0))
    }
}

// product form of len/(len+p-b) - len/(len+p-a): no cancellation for far
// small pieces
fn side_integral(len: f64, p: f64, a: f64, b: f64) -> f64 {
    len * (b - a) / ((len + p - b) * (len + p - a))
}

/// dist(x, I) Poisson integral, mirroring the exact formulas.
pub fn poisson_f64(l: f64, r: f64, mu: &MeasureF64) -> f64 {
    let len = r - l;
    let mut acc = 0.0;
    for (x, m) in &mu.atoms {
        let d = if *x < l {
            l - x
        } else if *x > r {
            x - r
        } else {
            0.0
        };
        acc += m * len / ((len + d) * (len + d));
    }
    for (pa, pb, m) in &mu.pieces {
        let dens = m / (pb - pa);
        if *pa < l {
            let b = pb.min(l);
            acc += dens * side_integral(len, l, *pa, b);
        }
        let lo = pa.max(l);
        let hi = pb.min(r);
        if hi > lo {
            acc += dens * (hi - lo) / len;
        }
        if *pb > r {
            let a0 = pa.max(r);
            acc += dens * side_integral(len, -r, -pb, -a0);
        }
    }
    acc
}

/// Energy-weighted decomposition sum on the float mirrors: parts as (l, r),
/// the Poisson measure already restricted to the base interval.
pub fn energy_sum_f64(parts: &[(f64, f64)], inner: &MeasureF64, outer_restricted: &MeasureF64) -> f64 {
    let mut total = 0.0;
    for (l, r) in parts {
        let mass = inner.mass_on(*l, *r);
        if mass <= 0.0 {
            continue;
        }
        if let Some(e2) = inner.energy_squared_on(*l, *r) {
            let p = poisson_f64(*l, *r, outer_restricted);
            total += mass * e2 * p * p;
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functionals::{energy_squared, energy_sum, poisson, Decomposition, EnergyDirection};
    use crate::interval::Interval;
    use crate::measures;
    use crate::rat::to_f64;
    use num::traits::Zero;

    #[test]
    fn fast_paths_match_exact_values() {
        let om = measures::redistributed_closed_form(16, 6).unwrap();
        let sd = measures::sigma_dot(16, 4).unwrap();
        let omf = MeasureF64::from(&om);
        let sdf = MeasureF64::from(&sd);
        let mut rng = crate::random::rng_for(3, "fast-check", 0);
        for _ in 0..20 {
            let iv = crate::random::interval_in(&mut rng, &Interval::unit(), 1 << 12);
            let (l, r) = (to_f64(&iv.left), to_f64(&iv.right));
            let exact = to_f64(&poisson(&iv, &om));
            let fast = poisson_f64(l, r, &omf);
            assert!((exact - fast).abs() <= 1e-11 * exact.abs().max(1.0), "poisson {exact} vs {fast}");
            if !om.mass_on(&iv, true).is_zero() {
                let e_exact = to_f64(&energy_squared(&iv, &om).unwrap());
                let e_fast = omf.energy_squared_on(l, r).unwrap();
                assert!((e_exact - e_fast).abs() <= 1e-9, "energy {e_exact} vs {e_fast}");
            }
        }
        // decomposition sums agree with the exact path
        let dec = Decomposition::children_at_level(16, 2);
        let exact = energy_sum(&dec, &sd, &om, EnergyDirection::Backward).unwrap().to_f64();
        let parts: Vec<(f64, f64)> =
            dec.parts.iter().map(|p| (to_f64(&p.left), to_f64(&p.right))).collect();
        let fast = energy_sum_f64(&parts, &sdf, &omf);
        assert!((exact - fast).abs() <= 1e-10 * exact.max(1e-30), "sum {exact} vs {fast}");
    }
}
