//! Forward/backward testing integrals and the Muckenhoupt product scan.

use super::fast::{poisson_f64, MeasureF64};
use super::poisson::poisson;
use super::FunctionalError;
use crate::exec::{self, ExecMode};
use crate::interval::Interval;
use crate::kernel::KernelSpec;
use crate::measures::DiscreteMeasure;
use crate::quad::adaptive_gl16;
use crate::rat::{to_f64, Rat};
use crate::scalar::Scalar;
use crate::transform;
use crate::tree::{self, TreeAddress};
use num::traits::Zero;

#[derive(Clone, Debug)]
pub struct ForwardTesting {
    /// integral over I of |H(1_I sigma)|^2 d omega
    pub integral: f64,
    /// |I|_sigma
    pub normalizer: Rat,
    pub ratio: f64,
    pub quadrature_error: f64,
}

/// Forward testing integral by per-piece adaptive Gauss quadrature of the
/// squared transform of the (atomic) restricted measure.
pub fn testing_forward(
    i: &Interval,
    kernel: &KernelSpec,
    sigma: &DiscreteMeasure,
    omega_m: &DiscreteMeasure,
    rel_tol: f64,
    mode: ExecMode,
) -> Result<ForwardTesting, FunctionalError> {
    let sigma_i = sigma.restrict(i, true);
    let normalizer = sigma_i.total_mass();
    if normalizer.is_zero() {
        return Err(FunctionalError::ZeroNormalizer(format!("{i}")));
    }
    let atoms: Vec<(f64, f64)> =
        sigma_i.atoms.iter().map(|a| (to_f64(&a.pos), to_f64(&a.mass))).collect();
    if !sigma_i.pieces.is_empty() {
        return Err(FunctionalError::InvalidDecomposition(
            "forward testing expects an atomic sigma".into(),
        ));
    }
    let omega_i = omega_m.restrict(i, true);
    let contributions = exec::map_collect(mode, &omega_i.pieces, |p| {
        let a = to_f64(&p.interval.left);
        let b = to_f64(&p.interval.right);
        let dens = to_f64(&p.density());
        let f = |x: f64| {
            let h = transform::apply_atoms_f64(kernel, &atoms, x);
            dens * h * h
        };
        adaptive_gl16(&f, a, b, rel_tol, 0.0, 20)
    });
    let integral = exec::pairwise_sum(&contributions.iter().map(|c| c.0).collect::<Vec<_>>());
    let err = contributions.iter().map(|c| c.1).sum::<f64>();
    Ok(ForwardTesting { integral, ratio: integral / to_f64(&normalizer), normalizer, quadrature_error: err })
}

#[derive(Clone, Debug)]
pub struct BackwardTesting {
    /// sum over atoms in I of weight * |H(1_I omega)(atom)|^2
    pub integral: Scalar,
    /// |I|_omega
    pub normalizer: Rat,
    pub ratio: f64,
    /// sup over atoms of |H(1_I omega)(atom)| / P(I, omega)
    pub pointwise_over_poisson: f64,
    pub exact: bool,
}

/// Backward testing integral; all transform evaluations ride exact flat
/// constants for the canonical measures, so the result is exact.
pub fn testing_backward(
    i: &Interval,
    kernel: &KernelSpec,
    sigma: &DiscreteMeasure,
    omega_m: &DiscreteMeasure,
) -> Result<BackwardTesting, FunctionalError> {
    let omega_i = omega_m.restrict(i, true);
    let normalizer = omega_i.total_mass();
    if normalizer.is_zero() {
        return Err(FunctionalError::ZeroNormalizer(format!("{i}")));
    }
    let p_omega = poisson_f64(
        to_f64(&i.left),
        to_f64(&i.right),
        &MeasureF64::from(omega_m),
    );
    let mut total = Scalar::zero();
    let mut psup = 0.0f64;
    for atom in sigma.atoms.iter().filter(|a| i.contains(&a.pos)) {
        let v = transform::apply(kernel, &omega_i, &atom.pos, None, &Rat::zero())?;
        psup = psup.max(v.to_f64().abs() / p_omega);
        total = total.add(&v.mul(&v).mul_rat(&atom.mass));
    }
    let ratio = total.to_f64() / to_f64(&normalizer);
    Ok(BackwardTesting {
        exact: total.is_exact(),
        integral: total,
        normalizer,
        ratio,
        pointwise_over_poisson: psup,
    })
}

#[derive(Clone, Debug)]
pub struct A2ScanResult {
    /// float sup over all scanned intervals
    pub sup: f64,
    /// exact Poisson product recomputed at the argmax
    pub sup_exact: Rat,
    pub argmax: String,
    /// running sup over tree intervals of level <= index
    pub per_level_sup: Vec<f64>,
    pub random_sup: f64,
    pub intervals_scanned: usize,
}

/// sup over tree intervals to `depth` and `random_count` random subintervals
/// of the Poisson product P(I, omega) P(I, sigma).
///
/// The scan itself runs on f64 mirrors (exact sums over hundreds of pieces
/// cost thousands of bits per interval); the winning interval is then
/// re-evaluated through the exact path, which is the certified sup.
pub fn a2_scan(
    sigma: &DiscreteMeasure,
    omega: &DiscreteMeasure,
    n: u32,
    depth: u32,
    random_count: usize,
    seed: u64,
    mode: ExecMode,
) -> A2ScanResult {
    let sf = MeasureF64::from(sigma);
    let of = MeasureF64::from(omega);
    let product = |iv: &Interval| {
        let (l, r) = (to_f64(&iv.left), to_f64(&iv.right));
        poisson_f64(l, r, &of) * poisson_f64(l, r, &sf)
    };
    let mut per_level_sup = Vec::with_capacity(depth as usize + 1);
    let mut running = 0.0f64;
    let mut best: Option<(f64, String, Interval)> = None;
    let mut scanned = 0usize;
    for level in 0..=depth {
        let addrs = TreeAddress::all_at_level(level);
        scanned += addrs.len();
        let products = exec::map_collect(mode, &addrs, |addr| {
            let iv = tree::interval_of(addr, n);
            (product(&iv), iv)
        });
        for (addr, (prod, iv)) in addrs.iter().zip(products) {
            running = running.max(prod);
            if best.as_ref().is_none_or(|(b, _, _)| prod > *b) {
                best = Some((prod, format!("tree:{}", addr.level_rank_label()), iv));
            }
        }
        per_level_sup.push(running);
    }
    let idx: Vec<u64> = (0..random_count as u64).collect();
    let randoms = exec::map_collect(mode, &idx, |j| {
        let mut rng = crate::random::rng_for(seed, "a2-random", *j);
        let iv = crate::random::interval_in(&mut rng, &Interval::unit(), 1u64 << 20);
        (product(&iv), iv)
    });
    let mut random_sup = 0.0f64;
    for (prod, iv) in randoms {
        random_sup = random_sup.max(prod);
        if best.as_ref().is_none_or(|(b, _, _)| prod > *b) {
            best = Some((prod, format!("random:{iv}"), iv.clone()));
        }
        scanned += 1;
    }
    let (sup, argmax, arg_iv) = best.expect("scan is nonempty");
    let sup_exact = poisson(&arg_iv, omega) * poisson(&arg_iv, sigma);
    debug_assert!((to_f64(&sup_exact) - sup).abs() <= 1e-9 * sup.max(1.0));
    A2ScanResult {
        sup,
        sup_exact,
        argmax,
        per_level_sup,
        random_sup,
        intervals_scanned: scanned,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures;
    use crate::rat::rat;

    fn setup(n_gens: u32, m: u32) -> (KernelSpec, DiscreteMeasure, DiscreteMeasure) {
        let k = KernelSpec::default_flattened();
        let sd = measures::sigma_dot(16, n_gens).unwrap();
        let om = measures::redistributed_closed_form(16, m).unwrap();
        (k, sd, om)
    }

    #[test]
    fn forward_testing_unit_interval_bounded() {
        let (k, sd, om) = setup(4, 6);
        let r = testing_forward(&Interval::unit(), &k, &sd, &om, 1e-10, ExecMode::default()).unwrap();
        assert!(r.ratio > 0.0 && r.ratio < 20.0, "forward ratio {}", r.ratio);
        assert!(r.quadrature_error < 1e-8);
    }

    #[test]
    fn forward_testing_scales_by_self_similarity() {
        let (k, sd, om) = setup(5, 7);
        let top = testing_forward(&Interval::unit(), &k, &sd, &om, 1e-10, ExecMode::default()).unwrap();
        // leftmost level-2 interval: ratio within a factor 2 of the top ratio
        let iv = tree::interval_of(&TreeAddress::from_rank(2, 1), 16);
        let sub = testing_forward(&iv, &k, &sd, &om, 1e-10, ExecMode::default()).unwrap();
        let rel = sub.ratio / top.ratio;
        assert!(rel > 0.5 && rel < 2.0, "self-similarity ratio {rel}");
    }

    #[test]
    fn forward_testing_on_assembled_interval() {
        // an arbitrary closed interval assembled across a maximal chain
        let (k, sd, om) = setup(5, 7);
        let top = testing_forward(&Interval::unit(), &k, &sd, &om, 1e-10, ExecMode::default()).unwrap();
        let iv = Interval::new(rat(1, 97), rat(61, 64));
        let sub = testing_forward(&iv, &k, &sd, &om, 1e-10, ExecMode::default()).unwrap();
        assert!(sub.ratio < 8.0 * top.ratio, "assembled {} vs top {}", sub.ratio, top.ratio);
    }

    #[test]
    fn backward_testing_exact_and_bounded() {
        let (k, sd, om) = setup(5, 7);
        for lvl in 1..4u32 {
            for addr in TreeAddress::all_at_level(lvl).into_iter().step_by(3) {
                let iv = tree::interval_of(&addr, 16);
                let r = testing_backward(&iv, &k, &sd, &om).unwrap();
                assert!(r.exact, "inexact backward path at {addr}");
                assert!(r.ratio < 2.0, "backward ratio {} at {addr}", r.ratio);
                assert!(r.pointwise_over_poisson < 4.0);
            }
        }
    }

    #[test]
    fn backward_testing_on_central_interval() {
        // window = the central interval L of a node: a single atom survives,
        // and the value is finite and exact
        let (k, sd, om) = setup(5, 7);
        let l = tree::l_interval_of(&TreeAddress::from_rank(1, 1), 16);
        let r = testing_backward(&l, &k, &sd, &om);
        // no omega mass inside L: normalizer is zero
        assert!(matches!(r, Err(FunctionalError::ZeroNormalizer(_))));
        // widen to the parent interval: exact and finite
        let iv = tree::interval_of(&TreeAddress::from_rank(1, 1), 16);
        let r = testing_backward(&iv, &k, &sd, &om).unwrap();
        assert!(r.exact && r.ratio.is_finite());
    }

    #[test]
    fn backward_testing_blows_up_without_redistribution() {
        // against the plain Cantor measure the far field does not cancel at
        // gap centers, and each extra atom generation adds a fixed amount
        let k = KernelSpec::default_flattened();
        let cantor = measures::cantor_measure(16, 7).unwrap();
        let mut prev = 0.0;
        let mut grew = 0;
        for gens in 2..=6u32 {
            let sd = measures::sigma_dot(16, gens).unwrap();
            let r = testing_backward(&Interval::unit(), &k, &sd, &cantor).unwrap();
            if r.ratio > prev * 1.2 {
                grew += 1;
            }
            prev = r.ratio;
        }
        assert!(grew >= 3, "expected growing backward ratio without redistribution");

        // with the redistributed measure the same full-interval integrand
        // vanishes identically
        let om = measures::redistributed_closed_form(16, 7).unwrap();
        let sd = measures::sigma_dot(16, 6).unwrap();
        let r = testing_backward(&Interval::unit(), &k, &sd, &om).unwrap();
        assert!(r.exact && r.integral.is_zero_exact());
    }

    #[test]
    fn a2_scan_is_stable_and_kappa_free() {
        let (_k, sd, om) = setup(4, 6);
        let scan = a2_scan(&sd, &om, 16, 6, 200, 11, ExecMode::default());
        assert!(scan.sup > 0.0);
        // the certified exact value agrees with the float scan
        assert!((to_f64(&scan.sup_exact) - scan.sup).abs() <= 1e-9 * scan.sup);
        // stability between depth 4 and depth 6 tree sups
        let a = scan.per_level_sup[4];
        let b = scan.per_level_sup[6];
        assert!((b - a).abs() / a < 0.10, "a2 sup drifts: {a} vs {b}");

        // kappa cancellation: extreme-imbalance nodes at one level carry
        // comparable products (exact evaluations)
        let lvl = 5u32;
        let all_left = TreeAddress::from_rank(lvl, 1);
        let zigzag = TreeAddress::parse_text("LRLRL").unwrap();
        let p1 = {
            let iv = tree::interval_of(&all_left, 16);
            poisson(&iv, &om) * poisson(&iv, &sd)
        };
        let p2 = {
            let iv = tree::interval_of(&zigzag, 16);
            poisson(&iv, &om) * poisson(&iv, &sd)
        };
        let ratio = to_f64(&(p1 / p2));
        assert!((0.25..4.0).contains(&ratio), "kappa dependence detected: {ratio}");
    }
}
