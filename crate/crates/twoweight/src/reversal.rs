//! Energy reversal and gradient ellipticity checks.
//!
//! The monotonicity chain is stated for the gradient-elliptic orientation of
//! the kernel, T mu(x) = integral of K(y - x) d mu(y); in that orientation the
//! plain 1/x kernel has positive x-derivative c = 1. The reversal inequality
//! compares squared differences, so orientation does not matter there.

use crate::functionals::energy_squared;
use crate::functionals::poisson;
use crate::interval::Interval;
use crate::kernel::{KernelSpec, Region};
use crate::measures::{self, DiscreteMeasure};
use crate::rat::{rat, rint, to_f64, Rat};
use crate::scalar::Scalar;
use crate::transform;
use crate::tree::{self, TreeAddress};
use num::traits::{Signed, Zero};
use rand::Rng;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ReversalError {
    #[error("invalid reversal instance: {0}")]
    ParameterError(String),
    #[error(transparent)]
    Transform(#[from] transform::TransformError),
    #[error(transparent)]
    Functional(#[from] crate::functionals::FunctionalError),
}

/// An energy-reversal test instance: a window J carrying omega, a source
/// measure mu supported outside the concentric dilate gamma J.
#[derive(Clone, Debug)]
pub struct ReversalInstance {
    pub j: Interval,
    pub omega: DiscreteMeasure,
    pub mu: DiscreteMeasure,
    pub gamma: Rat,
    pub kernel: KernelSpec,
}

impl ReversalInstance {
    pub fn validate(&self) -> Result<(), ReversalError> {
        if self.gamma < rint(2) {
            return Err(ReversalError::ParameterError("gamma must be at least 2".into()));
        }
        if self.omega.mass_on(&self.j, true) != self.omega.total_mass()
            || self.omega.total_mass().is_zero()
        {
            return Err(ReversalError::ParameterError("omega must live on J".into()));
        }
        let blown = self.j.scale_about_center(&self.gamma);
        if !self.mu.mass_on(&blown, true).is_zero() {
            return Err(ReversalError::ParameterError("mu must vanish on gamma J".into()));
        }
        // dist(supp mu, J) >= (gamma - 1)/2 |J|
        let margin = (&self.gamma - rint(1)) / rint(2) * self.j.length();
        let enlarged = Interval::new(&self.j.left - &margin, &self.j.right + &margin);
        let inside = self.mu.mass_on(&enlarged, false);
        if !inside.is_zero() {
            return Err(ReversalError::ParameterError(
                "mu is closer to J than (gamma-1)/2 |J|".into(),
            ));
        }
        Ok(())
    }

    /// T mu at x in the gradient-elliptic orientation.
    fn t_mu(&self, x: &Rat) -> Result<Scalar, ReversalError> {
        Ok(transform::apply(&self.kernel, &self.mu, x, None, &Rat::zero())?.neg())
    }
}

/// Outcome of the monotonicity lower-bound check on sampled pairs.
#[derive(Clone, Debug)]
pub struct MonotonicityReport {
    pub pass: bool,
    pub pairs_checked: usize,
    pub violation: Option<String>,
}

/// For sampled x > z in J checks
/// T mu(x) - T mu(z) >= (c/4)(x - z) sum of mass/(c_J - y)^2, c = 1 for the
/// plain kernel. For a flat-spot instance the check reports the violation,
/// which is the gradient-ellipticity failure witness.
pub fn gradient_monotonicity_check(
    inst: &ReversalInstance,
    sample_pairs: usize,
    seed: u64,
) -> Result<MonotonicityReport, ReversalError> {
    inst.validate()?;
    if !inst.mu.is_atomic() {
        return Err(ReversalError::ParameterError("monotonicity check expects atomic mu".into()));
    }
    let c_j = inst.j.midpoint();
    let mut bound_base = Rat::zero();
    for a in &inst.mu.atoms {
        let d = &c_j - &a.pos;
        bound_base += &a.mass / (&d * &d);
    }
    let mut rng = crate::random::rng_for(seed, "monotonicity", 0);
    let mut violation = None;
    let mut checked = 0usize;
    for _ in 0..sample_pairs {
        let x = crate::random::rat_in_interval(&mut rng, &inst.j, 1 << 20);
        let z = crate::random::rat_in_interval(&mut rng, &inst.j, 1 << 20);
        if x == z {
            continue;
        }
        let (z, x) = if x < z { (x, z) } else { (z, x) };
        checked += 1;
        let diff = inst.t_mu(&x)?.add(&inst.t_mu(&z)?.neg());
        let rhs = (&x - &z) * &bound_base / rint(4);
        let holds = match &diff {
            Scalar::Exact(d) => *d >= rhs,
            Scalar::Approx(d) => *d >= to_f64(&rhs) - 1e-12,
        };
        if !holds && violation.is_none() {
            violation = Some(format!(
                "pair x = {}, z = {}: difference {} below bound {}",
                crate::rat::format_rat(&x),
                crate::rat::format_rat(&z),
                diff.to_f64(),
                to_f64(&rhs)
            ));
        }
    }
    Ok(MonotonicityReport { pass: violation.is_none(), pairs_checked: checked, violation })
}

/// Both sides of the reversal inequality and the smallest admissible constant.
#[derive(Clone, Debug)]
pub struct ReversalCheck {
    pub lhs: Rat,
    pub rhs: Scalar,
    /// lhs / rhs when rhs > 0.
    pub c0: Option<f64>,
    /// true when rhs = 0 < lhs on an exact path: the reversal fails.
    pub reversal_failed: bool,
}

/// lhs = E(J, omega)^2 P(J, mu)^2; rhs = double omega-average over J of
/// |T mu(x) - T mu(z)|^2. Exact for atomic omega with exact transform values.
pub fn energy_reversal_check(inst: &ReversalInstance) -> Result<ReversalCheck, ReversalError> {
    inst.validate()?;
    if !inst.omega.is_atomic() {
        return Err(ReversalError::ParameterError("reversal check expects atomic omega".into()));
    }
    let e2 = energy_squared(&inst.j, &inst.omega)?;
    let p = poisson(&inst.j, &inst.mu);
    let lhs = e2 * &p * &p;

    let values: Vec<(Rat, Scalar)> = inst
        .omega
        .atoms
        .iter()
        .map(|a| Ok((a.mass.clone(), inst.t_mu(&a.pos)?)))
        .collect::<Result<_, ReversalError>>()?;
    let total: Rat = inst.omega.total_mass();
    let mut rhs = Scalar::zero();
    for (mi, ti) in &values {
        for (mj, tj) in &values {
            let d = ti.add(&tj.neg());
            rhs = rhs.add(&d.mul(&d).mul_rat(&(mi * mj)));
        }
    }
    rhs = rhs.mul_rat(&(&total * &total).recip());

    let reversal_failed = rhs.is_zero_exact() && lhs.is_positive();
    let c0 = match &rhs {
        Scalar::Exact(r) if r.is_zero() => None,
        _ => {
            let rf = rhs.to_f64();
            // refuse a float-zero denominator: only an exact zero counts
            if rf.abs() < 1e-30 && !rhs.is_exact() {
                None
            } else {
                Some(to_f64(&lhs) / rf)
            }
        }
    };
    Ok(ReversalCheck { lhs, rhs, c0, reversal_failed })
}

/// Constructs the flat-spot failure witness: J is the central interval of the
/// root, omega two atoms inside it, mu the restriction of the redistributed
/// measure to the right half, so that every difference x - y lands in the
/// band-0 flat core and T mu is exactly constant on J.
pub fn build_reversal_failure_witness(n: u32, rho: Rat) -> Result<ReversalInstance, ReversalError> {
    let kernel = KernelSpec::flattened(n, rho)
        .map_err(|e| ReversalError::ParameterError(e.to_string()))?;
    if !kernel.containment_holds() {
        return Err(ReversalError::ParameterError(format!(
            "flat-spot containment is not guaranteed for N = {n}, rho = {}",
            crate::rat::format_rat(&kernel.rho)
        )));
    }
    let root = TreeAddress::root();
    let j = tree::l_interval_of(&root, n);
    let half = rat(1, 2 * n as i64);
    let omega = DiscreteMeasure::new(
        vec![
            measures::Atom { pos: j.midpoint() - &half, mass: rat(1, 2) },
            measures::Atom { pos: j.midpoint() + &half, mass: rat(1, 2) },
        ],
        vec![],
    );
    let right_child = tree::interval_of(&root.child(crate::tree::Sign::Plus), n);
    let mu = measures::redistributed_closed_form(n, 3)
        .map_err(|e| ReversalError::ParameterError(e.to_string()))?
        .restrict(&right_child, true);
    let inst = ReversalInstance { j, omega, mu, gamma: rint(4), kernel };
    inst.validate()?;
    // certify the flat containment of the whole difference range exactly
    let d_min = inst.mu.pieces.first().map(|p| &p.interval.left - &inst.j.right).unwrap();
    let d_max = inst.mu.pieces.last().map(|p| &p.interval.right - &inst.j.left).unwrap();
    for d in [&d_min, &d_max] {
        let cls = inst.kernel.classify(d).map_err(transform::TransformError::from)?;
        if cls.region != Region::Flat || cls.band != 0 {
            return Err(ReversalError::ParameterError(format!(
                "witness distances leave the flat core: {} classified {:?}",
                crate::rat::format_rat(d),
                cls.region
            )));
        }
    }
    Ok(inst)
}

/// Seeded random atomic instances for the plain kernel: omega is 2..=4 atoms
/// in a random window, mu is 1..=3 atoms at distance between gamma and
/// 2 gamma window-lengths, gamma cycling over {2, 4, 8}.
pub fn random_hilbert_instances(count: usize, seed: u64) -> Vec<ReversalInstance> {
    let mut out = Vec::with_capacity(count);
    for idx in 0..count {
        let mut rng = crate::random::rng_for(seed, "reversal-instance", idx as u64);
        let gamma = rint([2i64, 4, 8][idx % 3]);
        let j = crate::random::interval_in(&mut rng, &Interval::unit(), 1 << 12);
        let n_omega = rng.random_range(2..=4usize);
        let mut atoms = Vec::new();
        for _ in 0..n_omega {
            atoms.push(measures::Atom {
                pos: crate::random::rat_in_interval(&mut rng, &j, 1 << 12),
                mass: crate::random::rat_in_unit(&mut rng, 1 << 10),
            });
        }
        atoms.sort_by(|a, b| a.pos.cmp(&b.pos));
        atoms.dedup_by(|a, b| a.pos == b.pos);
        if atoms.len() < 2 {
            atoms = vec![
                measures::Atom { pos: &j.left + j.length() / rint(3), mass: rint(1) },
                measures::Atom { pos: &j.left + j.length() * rat(2, 3), mass: rint(1) },
            ];
        }
        let omega = DiscreteMeasure::new(atoms, vec![]);
        let n_mu = rng.random_range(1..=3usize);
        let len = j.length();
        let mut mu_atoms = Vec::new();
        for side in 0..n_mu {
            let scale = &gamma * (rint(1) + crate::random::rat_in_unit(&mut rng, 1 << 10));
            let offset = &len * scale;
            let pos = if side % 2 == 0 { &j.right + &offset } else { &j.left - &offset };
            mu_atoms.push(measures::Atom { pos, mass: crate::random::rat_in_unit(&mut rng, 1 << 10) });
        }
        let mu = DiscreteMeasure::new(mu_atoms, vec![]);
        out.push(ReversalInstance { j, omega, mu, gamma, kernel: KernelSpec::hilbert() });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hilbert_monotonicity_examples() {
        // J = [0,1], mu = unit atom at 3, pair (3/4, 1/4)
        let inst = ReversalInstance {
            j: Interval::unit(),
            omega: DiscreteMeasure::single_atom(rat(1, 2), rint(1)),
            mu: DiscreteMeasure::single_atom(rint(3), rint(1)),
            gamma: rint(2),
            kernel: KernelSpec::hilbert(),
        };
        inst.validate().unwrap();
        let x = rat(3, 4);
        let z = rat(1, 4);
        let tx = inst.t_mu(&x).unwrap();
        let tz = inst.t_mu(&z).unwrap();
        let diff = tx.add(&tz.neg());
        assert_eq!(diff, Scalar::Exact(rat(8, 99)));
        let rhs = (&x - &z) * rint(1) / ((rat(1, 2) - rint(3)) * (rat(1, 2) - rint(3))) / rint(4);
        assert_eq!(rhs, rat(1, 50));
        assert!(rat(8, 99) >= rhs);
        let rep = gradient_monotonicity_check(&inst, 50, 3).unwrap();
        assert!(rep.pass, "violation: {:?}", rep.violation);
    }

    #[test]
    fn symmetric_far_atoms_still_monotone() {
        let inst = ReversalInstance {
            j: Interval::unit(),
            omega: DiscreteMeasure::single_atom(rat(1, 2), rint(1)),
            mu: DiscreteMeasure::new(
                vec![
                    measures::Atom { pos: rint(-5), mass: rint(1) },
                    measures::Atom { pos: rint(6), mass: rint(1) },
                ],
                vec![],
            ),
            gamma: rint(8),
            kernel: KernelSpec::hilbert(),
        };
        let rep = gradient_monotonicity_check(&inst, 50, 5).unwrap();
        assert!(rep.pass);
    }

    #[test]
    fn flat_spot_breaks_gradient_ellipticity() {
        // the failure witness: T mu constant on J while the bound is positive
        let inst = build_reversal_failure_witness(16, rat(3, 4)).unwrap();
        // atomize mu for the monotonicity check: a far atom inside the same
        // flat band works identically
        let atom_inst = ReversalInstance {
            mu: DiscreteMeasure::single_atom(rat(31, 32), inst.mu.total_mass()),
            ..inst.clone()
        };
        let rep = gradient_monotonicity_check(&atom_inst, 20, 9).unwrap();
        assert!(!rep.pass, "flat-spot instance must violate the monotonicity bound");
    }

    #[test]
    fn witness_has_exact_zero_rhs_and_positive_lhs() {
        for rho in [rat(3, 4), rat(2, 3)] {
            let inst = build_reversal_failure_witness(16, rho).unwrap();
            let chk = energy_reversal_check(&inst).unwrap();
            assert!(chk.reversal_failed);
            assert!(chk.rhs.is_zero_exact());
            assert!(chk.lhs.is_positive());
            assert!(chk.c0.is_none());
        }
    }

    #[test]
    fn witness_rejects_small_n() {
        let err = build_reversal_failure_witness(8, rat(3, 4)).unwrap_err();
        assert!(matches!(err, ReversalError::ParameterError(_)));
    }

    #[test]
    fn hilbert_instances_have_positive_exact_rhs() {
        for inst in random_hilbert_instances(20, 42) {
            inst.validate().unwrap();
            let chk = energy_reversal_check(&inst).unwrap();
            assert!(chk.rhs.is_exact());
            assert!(chk.rhs.to_f64() > 0.0, "degenerate rhs");
            assert!(chk.c0.unwrap() > 0.0);
        }
    }

    #[test]
    fn single_atom_omega_has_zero_lhs() {
        let inst = ReversalInstance {
            j: Interval::unit(),
            omega: DiscreteMeasure::single_atom(rat(1, 3), rint(2)),
            mu: DiscreteMeasure::single_atom(rint(4), rint(1)),
            gamma: rint(2),
            kernel: KernelSpec::hilbert(),
        };
        let chk = energy_reversal_check(&inst).unwrap();
        assert!(chk.lhs.is_zero());
        assert!(!chk.reversal_failed);
    }

    #[test]
    fn energy_controlled_by_testing_and_a2_for_plain_kernel() {
        // instance-level version of the chain bounding energy sums by
        // Muckenhoupt and testing quantities, for the plain kernel on the
        // canonical measure pair
        use crate::functionals::{
            a2_scan, energy_sum, testing_forward, Decomposition, EnergyDirection,
        };
        let h = KernelSpec::hilbert();
        let om = measures::redistributed_closed_form(16, 6).unwrap();
        let sd = measures::sigma_dot(16, 4).unwrap();
        let a2 = a2_scan(&sd, &om, 16, 5, 100, 3, crate::exec::ExecMode::default()).sup;
        let t_fwd = testing_forward(
            &Interval::unit(),
            &h,
            &sd,
            &om,
            1e-9,
            crate::exec::ExecMode::default(),
        )
        .unwrap()
        .ratio;
        let normalizer = crate::rat::to_f64(&sd.total_mass());
        let mut reported = 0.0f64;
        for level in 1..=4u32 {
            let dec = Decomposition::children_at_level(16, level);
            let lhs = energy_sum(&dec, &sd, &om, EnergyDirection::Forward).unwrap().to_f64();
            let constant = lhs / ((a2 + t_fwd) * normalizer);
            reported = reported.max(constant);
        }
        assert!(reported.is_finite() && reported < 1.0, "chain constant {reported}");
    }

    #[test]
    fn dilation_covariance_of_c0() {
        // dilating the whole instance rescales both sides identically
        let base = random_hilbert_instances(3, 7).pop().unwrap();
        let chk = energy_reversal_check(&base).unwrap();
        let scale = rint(16);
        let dil = crate::measures::MeasureTransform::Dilate(scale.clone());
        let scaled = ReversalInstance {
            j: Interval::new(&base.j.left * &scale, &base.j.right * &scale),
            omega: base.omega.transform(&dil).unwrap(),
            mu: base.mu.transform(&dil).unwrap(),
            gamma: base.gamma.clone(),
            kernel: KernelSpec::hilbert(),
        };
        let chk2 = energy_reversal_check(&scaled).unwrap();
        // exact ratio equality for the plain kernel
        let lhs_ratio = &chk.lhs / &chk2.lhs;
        let rhs_ratio = chk.rhs.as_exact().unwrap() / chk2.rhs.as_exact().unwrap();
        assert_eq!(lhs_ratio, rhs_ratio);
    }
}
