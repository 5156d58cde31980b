//! Energy of a measure on an interval and energy-weighted decomposition sums.

use super::poisson::poisson;
use super::{Decomposition, FunctionalError, FunctionalValue};
use crate::interval::Interval;
use crate::measures::DiscreteMeasure;
use crate::rat::Rat;
use crate::scalar::Scalar;
use num::traits::Zero;

/// E(I, mu)^2 computed from exact restricted moments via the variance
/// identity; lies in [0, 1]. Errors when the restricted mass vanishes.
pub fn energy_squared(i: &Interval, mu: &DiscreteMeasure) -> Result<Rat, FunctionalError> {
    let (m0, m1, m2) = mu.moments_on(i, true);
    if m0.is_zero() {
        return Err(FunctionalError::UndefinedEnergy(format!("{i}")));
    }
    let len = i.length();
    let variance_scaled = &m0 * &m2 - &m1 * &m1; // = m0^2 * variance
    Ok(variance_scaled / (&m0 * &m0 * &len * &len))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EnergyDirection {
    /// sum of |I_r|_omega E(I_r, omega)^2 P(I_r, 1_{I_0} sigma)^2, tested
    /// against |I_0|_sigma.
    Forward,
    /// sum of |I_r|_sigma E(I_r, sigma)^2 P(I_r, 1_{I_0} omega)^2, tested
    /// against |I_0|_omega.
    Backward,
}

/// Energy-weighted sum over a decomposition; exact rational. Parts with zero
/// mass in the energy measure contribute zero.
pub fn energy_sum(
    dec: &Decomposition,
    sigma: &DiscreteMeasure,
    omega: &DiscreteMeasure,
    direction: EnergyDirection,
) -> Result<FunctionalValue, FunctionalError> {
    let (inner, outer) = match direction {
        EnergyDirection::Forward => (omega, sigma),
        EnergyDirection::Backward => (sigma, omega),
    };
    let outer_restricted = outer.restrict(&dec.base, true);
    let mut total = Rat::zero();
    let mut parts = Vec::with_capacity(dec.parts.len());
    for part in &dec.parts {
        let mass = inner.mass_on(part, true);
        let term = if mass.is_zero() {
            Rat::zero()
        } else {
            let e2 = energy_squared(part, inner)?;
            let p = poisson(part, &outer_restricted);
            mass * e2 * &p * &p
        };
        parts.push((format!("{part}"), Scalar::Exact(term.clone())));
        total += term;
    }
    Ok(FunctionalValue {
        value: Scalar::Exact(total),
        depth: dec.parts.len() as u32,
        parts: Some(parts),
    })
}

/// The pointwise strengthened-Muckenhoupt ratio
/// |I|_sigma E(I, sigma)^2 P(I, omega)^2 / |I|_omega.
#[derive(Clone, Debug)]
pub struct PointwiseEnergyA2 {
    pub lhs: Rat,
    pub rhs: Rat,
    /// None when |I|_omega = 0 and the check is vacuous (lhs must be 0 too).
    pub ratio: Option<Rat>,
    pub vacuous: bool,
}

pub fn energy_a2_pointwise(
    i: &Interval,
    sigma: &DiscreteMeasure,
    omega: &DiscreteMeasure,
) -> Result<PointwiseEnergyA2, FunctionalError> {
    let sigma_mass = sigma.mass_on(i, true);
    let lhs = if sigma_mass.is_zero() {
        Rat::zero()
    } else {
        let e2 = energy_squared(i, sigma)?;
        let p = poisson(i, omega);
        sigma_mass * e2 * &p * &p
    };
    let rhs = omega.mass_on(i, true);
    if rhs.is_zero() {
        if lhs.is_zero() {
            return Ok(PointwiseEnergyA2 { lhs, rhs, ratio: None, vacuous: true });
        }
        return Err(FunctionalError::ZeroNormalizer(format!("{i}")));
    }
    let ratio = &lhs / &rhs;
    Ok(PointwiseEnergyA2 { lhs, rhs, ratio: Some(ratio), vacuous: false })
}

/// Backward-energy partial sums over the gap decomposition, one cumulative
/// value per level 0..=depth.
pub fn gap_energy_partial_sums(
    n: u32,
    depth: u32,
    sigma: &DiscreteMeasure,
    omega: &DiscreteMeasure,
) -> Result<Vec<Rat>, FunctionalError> {
    let mut sums = Vec::with_capacity(depth as usize + 1);
    let mut acc = Rat::zero();
    for level in 0..=depth {
        let dec = Decomposition {
            base: Interval::unit(),
            parts: crate::tree::TreeAddress::all_at_level(level)
                .iter()
                .map(|a| crate::tree::gap_of(a, n))
                .collect(),
            provenance: format!("gaps-at-level-{level}"),
        };
        let level_sum = energy_sum(&dec, sigma, omega, EnergyDirection::Backward)?;
        acc += level_sum.value.as_exact().expect("gap energy sums are exact");
        sums.push(acc.clone());
    }
    Ok(sums)
}

/// Least-squares slope of values against 0..len-1.
pub fn fitted_slope(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    if values.len() < 2 {
        return 0.0;
    }
    let mean_x = (n - 1.0) / 2.0;
    let mean_y = values.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (i, v) in values.iter().enumerate() {
        let dx = i as f64 - mean_x;
        num += dx * (v - mean_y);
        den += dx * dx;
    }
    num / den
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::rint;
    use crate::measures::{self, Piece};
    use crate::rat::{rat, to_f64};
    use rand::Rng;

    #[test]
    fn atom_has_zero_energy() {
        let i = Interval::unit();
        let mu = DiscreteMeasure::single_atom(rat(1, 3), rat(2, 1));
        assert_eq!(energy_squared(&i, &mu).unwrap(), Rat::zero());
    }

    #[test]
    fn uniform_energy_is_one_twelfth() {
        let i = Interval::unit();
        let mu = DiscreteMeasure::new(vec![], vec![Piece { interval: i.clone(), mass: rint(1) }]);
        let e2 = energy_squared(&i, &mu).unwrap();
        assert_eq!(e2, rat(1, 12));
        assert!((to_f64(&e2).sqrt() - 0.288_675).abs() < 1e-6);

        // Monte Carlo oracle for E^2 = (1/2) avg of (x - x')^2 over the square
        let mut rng = crate::random::rng_for(17, "mc-energy", 0);
        let mut acc = 0.0;
        let trials = 200_000;
        for _ in 0..trials {
            let x: f64 = rng.random();
            let y: f64 = rng.random();
            acc += 0.5 * (x - y) * (x - y);
        }
        acc /= trials as f64;
        assert!((acc - 1.0 / 12.0).abs() < 2e-3);
    }

    #[test]
    fn empty_restriction_is_an_error() {
        let i = Interval::new(rat(0, 1), rat(1, 4));
        let mu = DiscreteMeasure::single_atom(rat(1, 2), rint(1));
        assert!(energy_squared(&i, &mu).is_err());
    }

    #[test]
    fn energy_is_at_most_one() {
        let mut rng = crate::random::rng_for(23, "energy-bound", 0);
        let om = measures::redistributed_closed_form(16, 6).unwrap();
        let sd = measures::sigma_dot(16, 5).unwrap();
        let sh = measures::sigma_hat(16, 5).unwrap();
        for _ in 0..100 {
            let iv = crate::random::interval_in(&mut rng, &Interval::unit(), 1 << 14);
            for mu in [&om, &sd, &sh] {
                if mu.mass_on(&iv, true).is_zero() {
                    continue;
                }
                let e2 = energy_squared(&iv, mu).unwrap();
                assert!(e2 <= rint(1) && e2 >= Rat::zero());
            }
        }
    }

    #[test]
    fn single_atom_parts_contribute_zero() {
        // gaps hold exactly one atom of the atomic measure: backward sum 0
        let n = 16u32;
        let sd = measures::sigma_dot(n, 5).unwrap();
        let om = measures::redistributed_closed_form(n, 6).unwrap();
        let sums = gap_energy_partial_sums(n, 3, &sd, &om).unwrap();
        assert!(sums.iter().all(|s| s.is_zero()));
    }

    #[test]
    fn smeared_gap_sums_grow_affinely() {
        let n = 16u32;
        let sh = measures::sigma_hat(n, 6).unwrap();
        let om = measures::redistributed_closed_form(n, 8).unwrap();
        let sums = gap_energy_partial_sums(n, 5, &sh, &om).unwrap();
        let f: Vec<f64> = sums.iter().map(to_f64).collect();
        let increments: Vec<f64> = f.windows(2).map(|w| w[1] - w[0]).collect();
        let mean = increments.iter().sum::<f64>() / increments.len() as f64;
        assert!(fitted_slope(&f) > 0.0);
        for d in &increments {
            assert!(*d > mean / 3.0 && *d < mean * 3.0, "increment {d} vs mean {mean}");
        }
        // per-level energy of the smear is the constant 1/(3 (N-2)^2)
        let l0 = crate::tree::l_interval_of(&crate::tree::TreeAddress::root(), n);
        let g0 = crate::tree::gap_of(&crate::tree::TreeAddress::root(), n);
        let e2 = energy_squared(&g0, &sh).unwrap();
        assert_eq!(e2, rat(1, 3 * 14 * 14));
        assert!(g0.contains_interval(&l0));
    }

    #[test]
    fn two_atom_span_shows_generation_gap_decay() {
        // an interval spanning exactly one level-k atom and the nearest atom
        // n generations deeper has energy decaying like (2/(N^2(1-eta)))^n
        let n_param = 16u32;
        let k = 1u32;
        let base = crate::tree::TreeAddress::from_rank(k, 1);
        let om = measures::redistributed_closed_form(n_param, 8).unwrap();
        for gap in 1..=3u32 {
            // path: right child, then leftmost descent, ending at level k+gap
            let mut addr = base.child(crate::tree::Sign::Plus);
            for _ in 1..gap {
                addr = addr.child(crate::tree::Sign::Minus);
            }
            let sd = measures::sigma_dot(n_param, k + gap + 1).unwrap();
            let left = crate::tree::center_of(&base, n_param);
            let right = crate::tree::center_of(&addr, n_param);
            let iv = Interval::new(left, right);
            // exactly the two spanned atoms
            assert_eq!(sd.restrict(&iv, true).atoms.len(), 2);
            let e2 = energy_squared(&iv, &sd).unwrap();
            let hi = crate::rat::pow_i(&rat(2, 240), gap as i32);
            let lo = crate::rat::pow_i(&rat(2, 272), gap as i32) / rint(4);
            assert!(e2 <= hi && e2 >= lo, "gap {gap}: E^2 outside the decay window");
            let p = energy_a2_pointwise(&iv, &sd, &om).unwrap();
            assert!(to_f64(p.ratio.as_ref().unwrap()) < 1.0);
        }
    }

    #[test]
    fn pointwise_energy_a2_examples() {
        let n = 16u32;
        let sd = measures::sigma_dot(n, 6).unwrap();
        let om = measures::redistributed_closed_form(n, 8).unwrap();
        // single-atom interval: lhs = 0
        let g = crate::tree::gap_of(&crate::tree::TreeAddress::parse_text("L").unwrap(), n);
        let p = energy_a2_pointwise(&g, &sd, &om).unwrap();
        assert!(p.lhs.is_zero());
        // tree intervals: bounded ratio
        for lvl in 0..5u32 {
            for addr in crate::tree::TreeAddress::all_at_level(lvl).into_iter().step_by(3) {
                let iv = crate::tree::interval_of(&addr, n);
                let p = energy_a2_pointwise(&iv, &sd, &om).unwrap();
                let r = to_f64(p.ratio.as_ref().unwrap());
                assert!(r < 1.0, "pointwise ratio {r} at {addr}");
            }
        }
    }
}
