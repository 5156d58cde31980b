//! Exact-rational measures: the Cantor measure, its redistribution, the
//! atomic reweighting at gap centers, and the interval-smeared variant.
//!
//! A measure is a finite list of point atoms plus uniform-density pieces, all
//! with rational data. The redistributed measure at stage m is represented by
//! its piecewise-uniform approximation on the 2^m level-m intervals; masses on
//! tree intervals at any level <= m agree exactly with the limit measure, so
//! every certified identity is stated on those masses.

use crate::interval::Interval;
use crate::kernel::{KernelSpec, Region};
use crate::rat::{npow, rat, rint, Rat};
use crate::tree::{self, Sign, TreeAddress};
use num::traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MeasureError {
    #[error("depth {requested} exceeds the configured cap {cap} (set CE_MAX_DEPTH to raise)")]
    DepthOverflow { requested: u32, cap: u32 },
    #[error("measure is not at stage resolution: {0}")]
    InvalidStage(String),
    #[error("kernel not constant on a piece where exactness is required: {0}")]
    CertificationFailure(String),
    #[error("dilation factor must be nonzero")]
    ZeroDilation,
}

/// Depth cap for measure construction, from CE_MAX_DEPTH (default 16).
pub fn max_depth() -> u32 {
    std::env::var("CE_MAX_DEPTH").ok().and_then(|s| s.parse().ok()).unwrap_or(16)
}

fn check_depth(m: u32) -> Result<(), MeasureError> {
    let cap = max_depth();
    if m > cap {
        Err(MeasureError::DepthOverflow { requested: m, cap })
    } else {
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    #[serde(rename = "x", with = "crate::rat::rat_serde")]
    pub pos: Rat,
    #[serde(with = "crate::rat::rat_serde")]
    pub mass: Rat,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Piece {
    pub interval: Interval,
    pub mass: Rat,
}

impl Piece {
    pub fn density(&self) -> Rat {
        &self.mass / self.interval.length()
    }
}

#[derive(Serialize, Deserialize)]
struct PieceJson {
    #[serde(with = "crate::rat::rat_serde")]
    a: Rat,
    #[serde(with = "crate::rat::rat_serde")]
    b: Rat,
    #[serde(with = "crate::rat::rat_serde")]
    mass: Rat,
}

impl Serialize for Piece {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        PieceJson {
            a: self.interval.left.clone(),
            b: self.interval.right.clone(),
            mass: self.mass.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Piece {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let p = PieceJson::deserialize(d)?;
        Ok(Piece { interval: Interval::new(p.a, p.b), mass: p.mass })
    }
}

#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct DiscreteMeasure {
    pub atoms: Vec<Atom>,
    pub pieces: Vec<Piece>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum MeasureTransform {
    /// x -> gamma x, mass preserved.
    Dilate(Rat),
    /// x -> x + gamma.
    Translate(Rat),
    /// x -> -x.
    Reflect,
}

impl MeasureTransform {
    pub fn map_point(&self, x: &Rat) -> Rat {
        match self {
            MeasureTransform::Dilate(g) => g * x,
            MeasureTransform::Translate(g) => g + x,
            MeasureTransform::Reflect => -x.clone(),
        }
    }
}

impl DiscreteMeasure {
    pub fn new(mut atoms: Vec<Atom>, mut pieces: Vec<Piece>) -> Self {
        atoms.retain(|a| !a.mass.is_zero());
        pieces.retain(|p| !p.mass.is_zero());
        atoms.sort_by(|a, b| a.pos.cmp(&b.pos));
        pieces.sort_by(|a, b| a.interval.left.cmp(&b.interval.left));
        debug_assert!(
            pieces.windows(2).all(|w| w[0].interval.interior_disjoint(&w[1].interval)),
            "overlapping pieces"
        );
        debug_assert!(atoms.iter().all(|a| a.mass.is_positive()));
        debug_assert!(pieces.iter().all(|p| p.mass.is_positive()));
        DiscreteMeasure { atoms, pieces }
    }

    pub fn single_atom(pos: Rat, mass: Rat) -> Self {
        DiscreteMeasure::new(vec![Atom { pos, mass }], vec![])
    }

    pub fn total_mass(&self) -> Rat {
        let a: Rat = self.atoms.iter().map(|a| a.mass.clone()).sum();
        let p: Rat = self.pieces.iter().map(|p| p.mass.clone()).sum();
        a + p
    }

    pub fn is_atomic(&self) -> bool {
        self.pieces.is_empty()
    }

    /// Exact mass on an interval; atoms on the boundary count iff `closed`,
    /// partial pieces are pro-rated by the uniform density.
    pub fn mass_on(&self, i: &Interval, closed: bool) -> Rat {
        let mut m = Rat::zero();
        for a in &self.atoms {
            let inside = if closed { i.contains(&a.pos) } else { i.contains_interior(&a.pos) };
            if inside {
                m += &a.mass;
            }
        }
        for p in &self.pieces {
            if let Some(ov) = p.interval.intersect(i) {
                m += p.density() * ov.length();
            }
        }
        m
    }

    /// Exact mass of the singleton {x}: the atom weight there, if any.
    pub fn atom_mass_at(&self, x: &Rat) -> Rat {
        self.atoms
            .iter()
            .filter(|a| &a.pos == x)
            .map(|a| a.mass.clone())
            .sum()
    }

    /// Restriction to an interval (atoms on boundary kept iff `closed`).
    pub fn restrict(&self, i: &Interval, closed: bool) -> DiscreteMeasure {
        let atoms = self
            .atoms
            .iter()
            .filter(|a| if closed { i.contains(&a.pos) } else { i.contains_interior(&a.pos) })
            .cloned()
            .collect();
        let pieces = self
            .pieces
            .iter()
            .filter_map(|p| {
                let ov = p.interval.intersect(i)?;
                let mass = p.density() * ov.length();
                Some(Piece { interval: ov, mass })
            })
            .collect();
        DiscreteMeasure::new(atoms, pieces)
    }

    /// Mass, first and second moments of the restriction to `i`.
    pub fn moments_on(&self, i: &Interval, closed: bool) -> (Rat, Rat, Rat) {
        let mut m0 = Rat::zero();
        let mut m1 = Rat::zero();
        let mut m2 = Rat::zero();
        for a in &self.atoms {
            let inside = if closed { i.contains(&a.pos) } else { i.contains_interior(&a.pos) };
            if inside {
                m0 += &a.mass;
                m1 += &a.mass * &a.pos;
                m2 += &a.mass * &a.pos * &a.pos;
            }
        }
        for p in &self.pieces {
            if let Some(ov) = p.interval.intersect(i) {
                let mass = p.density() * ov.length();
                let mid = ov.midpoint();
                let len = ov.length();
                m0 += &mass;
                m1 += &mass * &mid;
                // uniform second moment: mid^2 + len^2 / 12
                m2 += &mass * (&mid * &mid + &len * &len / rint(12));
            }
        }
        (m0, m1, m2)
    }

    pub fn transform(&self, t: &MeasureTransform) -> Result<DiscreteMeasure, MeasureError> {
        if let MeasureTransform::Dilate(g) = t {
            if g.is_zero() {
                return Err(MeasureError::ZeroDilation);
            }
        }
        let atoms = self
            .atoms
            .iter()
            .map(|a| Atom { pos: t.map_point(&a.pos), mass: a.mass.clone() })
            .collect();
        let pieces = self
            .pieces
            .iter()
            .map(|p| {
                let x = t.map_point(&p.interval.left);
                let y = t.map_point(&p.interval.right);
                let iv = if x < y { Interval::new(x, y) } else { Interval::new(y, x) };
                Piece { interval: iv, mass: p.mass.clone() }
            })
            .collect();
        Ok(DiscreteMeasure::new(atoms, pieces))
    }

    pub fn transform_seq(&self, ts: &[MeasureTransform]) -> Result<DiscreteMeasure, MeasureError> {
        let mut m = self.clone();
        for t in ts {
            m = m.transform(t)?;
        }
        Ok(m)
    }

    pub fn scale_mass(&self, factor: &Rat) -> DiscreteMeasure {
        let atoms = self
            .atoms
            .iter()
            .map(|a| Atom { pos: a.pos.clone(), mass: &a.mass * factor })
            .collect();
        let pieces = self
            .pieces
            .iter()
            .map(|p| Piece { interval: p.interval.clone(), mass: &p.mass * factor })
            .collect();
        DiscreteMeasure::new(atoms, pieces)
    }

    pub fn add(&self, other: &DiscreteMeasure) -> DiscreteMeasure {
        let mut atoms = self.atoms.clone();
        atoms.extend(other.atoms.iter().cloned());
        let mut pieces = self.pieces.clone();
        pieces.extend(other.pieces.iter().cloned());
        DiscreteMeasure::new(atoms, pieces)
    }
}

/// Mass of the redistributed measure on a tree interval: 1 at the root, then
/// 1/2 at level one, thereafter multiplied by (1 +- 1/N)/2 per step (heads get
/// the plus sign).
pub fn omega_hat_node_mass(addr: &TreeAddress, n: u32) -> Rat {
    if addr.is_root() {
        return Rat::one();
    }
    let ht = addr.heads_tails();
    let up = rat(n as i64 + 1, 2 * n as i64);
    let dn = rat(n as i64 - 1, 2 * n as i64);
    rat(1, 2) * crate::rat::pow_i(&up, ht.heads as i32) * crate::rat::pow_i(&dn, ht.tails as i32)
}

/// Atom weight at a gap center: N^{-2 level} / (redistributed mass of the node).
pub fn s_hat(addr: &TreeAddress, n: u32) -> Rat {
    npow(n, -2 * addr.level() as i32) / omega_hat_node_mass(addr, n)
}

/// The plain Cantor measure at depth m: 2^m uniform pieces of mass 2^{-m}.
pub fn cantor_measure(n: u32, m: u32) -> Result<DiscreteMeasure, MeasureError> {
    check_depth(m)?;
    let mass = crate::rat::pow_i(&rat(1, 2), m as i32);
    let pieces = TreeAddress::all_at_level(m)
        .iter()
        .map(|a| Piece { interval: tree::interval_of(a, n), mass: mass.clone() })
        .collect();
    Ok(DiscreteMeasure::new(vec![], pieces))
}

/// The redistributed measure at depth m from the closed-form masses.
pub fn redistributed_closed_form(n: u32, m: u32) -> Result<DiscreteMeasure, MeasureError> {
    check_depth(m)?;
    let mut pieces = Vec::with_capacity(1 << m);
    // recursive descent keeps the factor replay linear in the output size
    fn descend(
        n: u32,
        level: u32,
        m: u32,
        left: Rat,
        len: Rat,
        last: Option<Sign>,
        mass: Rat,
        out: &mut Vec<Piece>,
    ) {
        if level == m {
            let right = &left + &len;
            out.push(Piece { interval: Interval::new(left, right), mass });
            return;
        }
        let child_len = &len / rint(n as i64);
        let right_left = &left + &len - &child_len;
        let (m_minus, m_plus) = match last {
            None => (&mass / rint(2), &mass / rint(2)),
            Some(s) => {
                let up = &mass * rat(n as i64 + 1, 2 * n as i64);
                let dn = &mass * rat(n as i64 - 1, 2 * n as i64);
                match s {
                    Sign::Minus => (up, dn),
                    Sign::Plus => (dn, up),
                }
            }
        };
        descend(n, level + 1, m, left, child_len.clone(), Some(Sign::Minus), m_minus, out);
        descend(n, level + 1, m, right_left, child_len, Some(Sign::Plus), m_plus, out);
    }
    if m == 0 {
        return Ok(DiscreteMeasure::new(
            vec![],
            vec![Piece { interval: Interval::unit(), mass: Rat::one() }],
        ));
    }
    descend(n, 0, m, Rat::zero(), Rat::one(), None, Rat::one(), &mut pieces);
    Ok(DiscreteMeasure::new(vec![], pieces))
}

/// The atomic reweighted measure truncated strictly below generation `gens`:
/// atoms at every gap center of level k < gens with weight `s_hat`.
pub fn sigma_dot(n: u32, gens: u32) -> Result<DiscreteMeasure, MeasureError> {
    check_depth(gens)?;
    let mut atoms = Vec::new();
    for k in 0..gens {
        for addr in TreeAddress::all_at_level(k) {
            atoms.push(Atom { pos: tree::center_of(&addr, n), mass: s_hat(&addr, n) });
        }
    }
    Ok(DiscreteMeasure::new(atoms, vec![]))
}

/// The interval-smeared variant: each atom replaced by a uniform piece on the
/// small central interval L, same mass.
pub fn sigma_hat(n: u32, gens: u32) -> Result<DiscreteMeasure, MeasureError> {
    check_depth(gens)?;
    let mut pieces = Vec::new();
    for k in 0..gens {
        for addr in TreeAddress::all_at_level(k) {
            pieces.push(Piece { interval: tree::l_interval_of(&addr, n), mass: s_hat(&addr, n) });
        }
    }
    Ok(DiscreteMeasure::new(vec![], pieces))
}

/// Splits every piece into its two Cantor children (outer 1/N-th at each end),
/// half the mass each: the stage measure one resolution level finer.
pub fn cantor_refine(mu: &DiscreteMeasure, n: u32) -> DiscreteMeasure {
    let mut pieces = Vec::with_capacity(mu.pieces.len() * 2);
    for p in &mu.pieces {
        let child_len = p.interval.length() / rint(n as i64);
        let half = &p.mass / rint(2);
        pieces.push(Piece {
            interval: Interval::new(p.interval.left.clone(), &p.interval.left + &child_len),
            mass: half.clone(),
        });
        pieces.push(Piece {
            interval: Interval::new(&p.interval.right - &child_len, p.interval.right.clone()),
            mass: half,
        });
    }
    DiscreteMeasure::new(mu.atoms.clone(), pieces)
}

/// Kernel value guaranteed constant over `t` in [t_lo, t_hi] (both nonzero,
/// same sign, same flat band); `None` when the range is not flat-constant.
fn flat_constant_over(kernel: &KernelSpec, t_lo: &Rat, t_hi: &Rat) -> Option<Rat> {
    let a = kernel.classify(t_lo).ok()?;
    let b = kernel.classify(t_hi).ok()?;
    if a.region == Region::Flat && b.region == Region::Flat && a.band == b.band && a.negative == b.negative {
        let v = kernel.flat_value(a.band);
        Some(if a.negative { -v } else { v })
    } else {
        None
    }
}

/// One literal redistribution step: splits the mass of every level-`level`
/// interval between its two children so that the flattened transform vanishes
/// at the gap centers. The input must be piecewise uniform at resolution
/// `level + 1` or finer; kernel evaluations are required to be exactly
/// flat-constant over every far piece, otherwise the step aborts.
pub fn redistribute_step(
    omega_l: &DiscreteMeasure,
    level: u32,
    kernel: &KernelSpec,
) -> Result<DiscreteMeasure, MeasureError> {
    let n = kernel.n;
    if !omega_l.atoms.is_empty() {
        return Err(MeasureError::InvalidStage("stage measure has atoms".into()));
    }
    // assign each piece to its level-(level+1) ancestor
    let child_addrs = TreeAddress::all_at_level(level + 1);
    let child_ivs: Vec<Interval> = child_addrs.iter().map(|a| tree::interval_of(a, n)).collect();
    let mut assignment = vec![usize::MAX; omega_l.pieces.len()];
    {
        let mut ci = 0usize;
        for (pi, p) in omega_l.pieces.iter().enumerate() {
            while ci < child_ivs.len() && child_ivs[ci].right < p.interval.right {
                ci += 1;
            }
            if ci >= child_ivs.len() || !child_ivs[ci].contains_interval(&p.interval) {
                return Err(MeasureError::InvalidStage(format!(
                    "piece {} not inside a level-{} interval",
                    p.interval,
                    level + 1
                )));
            }
            assignment[pi] = ci;
        }
    }
    let child_mass: Vec<Rat> = {
        let mut acc = vec![Rat::zero(); child_ivs.len()];
        for (pi, p) in omega_l.pieces.iter().enumerate() {
            acc[assignment[pi]] += &p.mass;
        }
        acc
    };

    let parents = TreeAddress::all_at_level(level);
    let mut factor = vec![Rat::one(); child_ivs.len()];
    for (r, parent) in parents.iter().enumerate() {
        let center = tree::center_of(parent, n);
        let left_child = 2 * r;
        let right_child = 2 * r + 1;
        // reference point: the kernel is constant on the left child
        let x_left = child_ivs[left_child].midpoint();
        let denom = flat_constant_over(
            kernel,
            &(&child_ivs[left_child].left - &center),
            &(&child_ivs[left_child].right - &center),
        )
        .ok_or_else(|| {
            MeasureError::CertificationFailure(format!(
                "kernel not constant on the left child of {parent}"
            ))
        })?;
        debug_assert_eq!(
            Some(denom.clone()),
            flat_constant_over(kernel, &(&x_left - &center), &(&x_left - &center))
        );

        let mut far_sum = Rat::zero();
        for (pi, p) in omega_l.pieces.iter().enumerate() {
            let ci = assignment[pi];
            if ci == left_child || ci == right_child {
                continue;
            }
            let c = flat_constant_over(
                kernel,
                &(&p.interval.left - &center),
                &(&p.interval.right - &center),
            )
            .ok_or_else(|| {
                MeasureError::CertificationFailure(format!(
                    "kernel not constant on far piece {} relative to {parent}",
                    p.interval
                ))
            })?;
            far_sum += c * &p.mass;
        }
        let ratio_sum = far_sum / &denom;
        let parent_mass = &child_mass[left_child] + &child_mass[right_child];
        let new_left = (&parent_mass - &ratio_sum) / rint(2);
        let new_right = (&parent_mass + &ratio_sum) / rint(2);
        debug_assert_eq!(&new_left + &new_right, parent_mass);
        if child_mass[left_child].is_zero() || child_mass[right_child].is_zero() {
            return Err(MeasureError::InvalidStage("empty child at redistribution".into()));
        }
        factor[left_child] = new_left / &child_mass[left_child];
        factor[right_child] = new_right / &child_mass[right_child];
    }

    let pieces = omega_l
        .pieces
        .iter()
        .enumerate()
        .map(|(pi, p)| Piece {
            interval: p.interval.clone(),
            mass: &p.mass * &factor[assignment[pi]],
        })
        .collect();
    Ok(DiscreteMeasure::new(vec![], pieces))
}

/// Runs the redistribution chain from the Cantor measure up to depth m,
/// returning the stage measures omega_1 .. omega_m (each at its own
/// resolution).
pub fn redistribute_chain(n: u32, m: u32, kernel: &KernelSpec) -> Result<Vec<DiscreteMeasure>, MeasureError> {
    check_depth(m)?;
    let mut stages = Vec::with_capacity(m as usize);
    let mut current = cantor_measure(n, 1)?;
    stages.push(current.clone());
    for level in 1..m {
        let refined = cantor_refine(&current, n);
        current = redistribute_step(&refined, level, kernel)?;
        stages.push(current.clone());
    }
    Ok(stages)
}

/// Outcome of the replication certification.
#[derive(Clone, Debug)]
pub struct ReplicationReport {
    pub pass: bool,
    pub checks: Vec<(String, bool)>,
    pub first_failure: Option<String>,
}

impl ReplicationReport {
    fn record(&mut self, name: &str, ok: bool, detail: impl Fn() -> String) {
        self.checks.push((name.to_string(), ok));
        if !ok {
            self.pass = false;
            if self.first_failure.is_none() {
                self.first_failure = Some(format!("{name}: {}", detail()));
            }
        }
    }
}

fn eta_factors(n: u32) -> (Rat, Rat) {
    (rat(n as i64 + 1, 2 * n as i64), rat(n as i64 - 1, 2 * n as i64))
}

/// Certifies the replication identities as exact equalities of measures,
/// using the stage-m and stage-(m+1) approximations of the redistributed
/// measure and truncations m, m-1 of the atomic one (generic in the supplied
/// measures so a perturbed input is detected).
pub fn replication_check_measures(
    n: u32,
    omega_m: &DiscreteMeasure,
    omega_m1: &DiscreteMeasure,
    sigma_m: &DiscreteMeasure,
    sigma_m_minus_1: &DiscreteMeasure,
    max_child_level: u32,
) -> ReplicationReport {
    use MeasureTransform::{Dilate, Reflect, Translate};
    let mut report = ReplicationReport { pass: true, checks: vec![], first_failure: None };
    let (up, dn) = eta_factors(n);
    let inv_n = rat(1, n as i64);
    let left1 = Interval::new(Rat::zero(), inv_n.clone());
    let right1 = Interval::new(rint(1) - &inv_n, rint(1));
    let quads = [
        Interval::new(Rat::zero(), npow(n, -2)),
        Interval::new(&inv_n - npow(n, -2), inv_n.clone()),
        Interval::new(rint(1) - &inv_n, rint(1) - &inv_n + npow(n, -2)),
        Interval::new(rint(1) - npow(n, -2), rint(1)),
    ];

    let om_minus = omega_m.restrict(&left1, true);
    let om_plus = omega_m.restrict(&right1, true);

    let check_eq = |report: &mut ReplicationReport, name: &str, lhs: &DiscreteMeasure, rhs: &DiscreteMeasure| {
        let ok = lhs == rhs;
        report.record(name, ok, || {
            format!(
                "lhs mass {} vs rhs mass {}",
                crate::rat::format_rat(&lhs.total_mass()),
                crate::rat::format_rat(&rhs.total_mass())
            )
        });
    };

    // grandchild formulas for the redistributed measure
    {
        let lhs = omega_m1.restrict(&quads[0], true);
        let rhs = om_minus.transform(&Dilate(inv_n.clone())).unwrap().scale_mass(&up);
        check_eq(&mut report, "omega:--", &lhs, &rhs);

        let lhs = omega_m1.restrict(&quads[1], true);
        let rhs = om_minus
            .transform_seq(&[Dilate(inv_n.clone()), Reflect, Translate(inv_n.clone())])
            .unwrap()
            .scale_mass(&dn);
        check_eq(&mut report, "omega:-+", &lhs, &rhs);

        let lhs = omega_m1.restrict(&quads[2], true);
        let rhs = om_plus
            .transform_seq(&[
                Translate(rint(-1)),
                Reflect,
                Dilate(inv_n.clone()),
                Reflect,
                Translate(inv_n.clone()),
                Reflect,
                Translate(rint(1)),
            ])
            .unwrap()
            .scale_mass(&dn);
        check_eq(&mut report, "omega:+-", &lhs, &rhs);

        let lhs = omega_m1.restrict(&quads[3], true);
        let rhs = om_plus
            .transform_seq(&[
                Translate(rint(-1)),
                Reflect,
                Dilate(inv_n.clone()),
                Reflect,
                Translate(rint(1)),
            ])
            .unwrap()
            .scale_mass(&up);
        check_eq(&mut report, "omega:++", &lhs, &rhs);

        // additivity of the two grandchild halves
        let sum = omega_m1.restrict(&quads[0], true).add(&omega_m1.restrict(&quads[1], true));
        check_eq(&mut report, "omega:rep-sum", &omega_m1.restrict(&left1, true), &sum);
    }

    // grandchild formulas for the atomic measure, including the point mass
    {
        let sd_minus_prev = sigma_m_minus_1.restrict(&left1, true);
        let sd_plus_prev = sigma_m_minus_1.restrict(&right1, true);
        let coef_up = npow(n, -2) * rint(2) / (rint(1) + &inv_n);
        let coef_dn = npow(n, -2) * rint(2) / (rint(1) - &inv_n);

        let lhs = sigma_m.restrict(&quads[0], true);
        let rhs = sd_minus_prev.transform(&Dilate(inv_n.clone())).unwrap().scale_mass(&coef_up);
        check_eq(&mut report, "sigma:--", &lhs, &rhs);

        let lhs = sigma_m.restrict(&quads[1], true);
        let rhs = sd_minus_prev
            .transform_seq(&[Dilate(inv_n.clone()), Reflect, Translate(inv_n.clone())])
            .unwrap()
            .scale_mass(&coef_dn);
        check_eq(&mut report, "sigma:-+", &lhs, &rhs);

        let lhs = sigma_m.restrict(&quads[2], true);
        let rhs = sd_plus_prev
            .transform_seq(&[
                Translate(rint(-1)),
                Reflect,
                Dilate(inv_n.clone()),
                Reflect,
                Translate(inv_n.clone()),
                Reflect,
                Translate(rint(1)),
            ])
            .unwrap()
            .scale_mass(&coef_dn);
        check_eq(&mut report, "sigma:+-", &lhs, &rhs);

        let lhs = sigma_m.restrict(&quads[3], true);
        let rhs = sd_plus_prev
            .transform_seq(&[
                Translate(rint(-1)),
                Reflect,
                Dilate(inv_n.clone()),
                Reflect,
                Translate(rint(1)),
            ])
            .unwrap()
            .scale_mass(&coef_up);
        check_eq(&mut report, "sigma:++", &lhs, &rhs);

        // inhomogeneous decomposition: the atom between the grandchild halves
        // carries exactly 2/N^2
        let left_addr = TreeAddress::parse_text("L").unwrap();
        let delta = DiscreteMeasure::single_atom(
            tree::center_of(&left_addr, n),
            s_hat(&left_addr, n),
        );
        report.record("sigma:delta-mass", s_hat(&left_addr, n) == rat(2, (n as i64) * (n as i64)), || {
            format!("s_hat(level 1) = {}", crate::rat::format_rat(&s_hat(&left_addr, n)))
        });
        let sum = sigma_m
            .restrict(&quads[0], true)
            .add(&delta)
            .add(&sigma_m.restrict(&quads[1], true));
        check_eq(&mut report, "sigma:rep-sum", &sigma_m.restrict(&left1, true), &sum);
    }

    // child formulas for the leftmost interval at each level, and mirrored
    for level in 1..=max_child_level {
        let base = TreeAddress::from_rank(level, 1);
        let iv = tree::interval_of(&base, n);
        let (lo, hi) = base.children();
        let iv_lo = tree::interval_of(&lo, n);
        let iv_hi = tree::interval_of(&hi, n);
        let shift = npow(n, -(level as i32));

        let om_base = omega_m.restrict(&iv, true);
        let lhs = omega_m1.restrict(&iv_lo, true);
        let rhs = om_base.transform(&Dilate(inv_n.clone())).unwrap().scale_mass(&up);
        check_eq(&mut report, &format!("newreps:omega-left:{level}"), &lhs, &rhs);

        let lhs = omega_m1.restrict(&iv_hi, true);
        let rhs = om_base
            .transform_seq(&[Dilate(inv_n.clone()), Reflect, Translate(shift.clone())])
            .unwrap()
            .scale_mass(&dn);
        check_eq(&mut report, &format!("newreps:omega-right:{level}"), &lhs, &rhs);

        // atomic side, with the exact central atom weight
        let coef_up = npow(n, -2) * rint(2) / (rint(1) + &inv_n);
        let coef_dn = npow(n, -2) * rint(2) / (rint(1) - &inv_n);
        let sd_base_prev = sigma_m_minus_1.restrict(&iv, true);
        let lhs = sigma_m.restrict(&iv_lo, true);
        let rhs = sd_base_prev.transform(&Dilate(inv_n.clone())).unwrap().scale_mass(&coef_up);
        check_eq(&mut report, &format!("newreps:sigma-left:{level}"), &lhs, &rhs);

        let lhs = sigma_m.restrict(&iv_hi, true);
        let rhs = sd_base_prev
            .transform_seq(&[Dilate(inv_n.clone()), Reflect, Translate(shift)])
            .unwrap()
            .scale_mass(&coef_dn);
        check_eq(&mut report, &format!("newreps:sigma-right:{level}"), &lhs, &rhs);

        let delta = DiscreteMeasure::single_atom(tree::center_of(&base, n), s_hat(&base, n));
        let sum = sigma_m.restrict(&iv_lo, true).add(&delta).add(&sigma_m.restrict(&iv_hi, true));
        check_eq(&mut report, &format!("newreps:sigma-sum:{level}"), &sigma_m.restrict(&iv, true), &sum);

        // global mirror symmetry delivers the rightmost-interval versions
        let mirror = base.reflect();
        let iv_m = tree::interval_of(&mirror, n);
        let lhs = omega_m.restrict(&iv_m, true);
        let rhs = om_base.transform_seq(&[Reflect, Translate(rint(1))]).unwrap();
        check_eq(&mut report, &format!("newreps:mirror:{level}"), &lhs, &rhs);
    }

    report
}

/// Builds the canonical measures and certifies all replication identities at
/// depth m (the atomic measure is truncated at m generations).
pub fn verify_replication(n: u32, m: u32) -> Result<ReplicationReport, MeasureError> {
    check_depth(m + 1)?;
    let omega_m = redistributed_closed_form(n, m)?;
    let omega_m1 = redistributed_closed_form(n, m + 1)?;
    let sigma_m = sigma_dot(n, m)?;
    let sigma_prev = sigma_dot(n, m - 1)?;
    Ok(replication_check_measures(n, &omega_m, &omega_m1, &sigma_m, &sigma_prev, m.saturating_sub(2)))
}
