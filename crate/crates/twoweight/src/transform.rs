//! Evaluation of the convolution transform of a measure at a point,
//! flat-spot aware: each contribution is routed through an exact region
//! whenever the kernel is provably constant or 1/x over the piece, and
//! demoted to quadrature only otherwise. The exactness of the result is
//! tracked; certifications refuse float paths.

use crate::exec::{self, ExecMode};
use crate::interval::Interval;
use crate::kernel::{KernelError, KernelSpec, Region};
use crate::measures::{DiscreteMeasure, Piece};
use crate::quad::adaptive_gl16;
use crate::rat::{format_rat, to_f64, Rat};
use crate::scalar::Scalar;
use crate::tree::{self, TreeAddress};
use num::traits::{Signed, Zero};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TransformError {
    #[error("evaluation point lies inside the support with no exclusion radius: x = {0}")]
    Singularity(String),
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

const QUAD_ABS_TOL: f64 = 1e-14;

/// Region-aware sub-range of the argument differences t = x - y over a piece.
#[derive(Clone, Copy, PartialEq, Eq)]
enum ExactRange {
    FlatConstant(i32, bool),
    OneOverX,
}

/// Decides whether the kernel is exactly representable over the whole
/// difference range [t_lo, t_hi] (which must not contain 0).
fn exact_range(kernel: &KernelSpec, t_lo: &Rat, t_hi: &Rat) -> Result<Option<ExactRange>, KernelError> {
    let a = kernel.classify(t_lo)?;
    let b = kernel.classify(t_hi)?;
    if a.negative != b.negative {
        return Ok(None);
    }
    if kernel.kind == crate::kernel::KernelKind::Hilbert {
        return Ok(Some(ExactRange::OneOverX));
    }
    if a.region == Region::Flat && b.region == Region::Flat && a.band == b.band {
        return Ok(Some(ExactRange::FlatConstant(a.band, a.negative)));
    }
    if a.region.is_one_over_x() && b.region.is_one_over_x() {
        // the 1/x set is connected across the band edge between the high
        // sub-band of band k and the low sub-band of band k-1
        let (lo_cls, hi_cls) = if t_lo.abs() <= t_hi.abs() { (&a, &b) } else { (&b, &a) };
        let same = lo_cls.band == hi_cls.band && lo_cls.region == hi_cls.region;
        let adjacent = lo_cls.region == Region::OneOverXHigh
            && hi_cls.region == Region::OneOverXLow
            && hi_cls.band == lo_cls.band - 1;
        if same || adjacent {
            return Ok(Some(ExactRange::OneOverX));
        }
    }
    Ok(None)
}

/// Integral of the kernel against one uniform piece, evaluated at x:
/// exact when the difference range is flat-constant; a closed-form log when
/// it is pure 1/x; adaptive quadrature split at region boundaries otherwise.
pub fn integrate_piece(
    kernel: &KernelSpec,
    piece: &Piece,
    x: &Rat,
    exclusion: &Rat,
) -> Result<Scalar, TransformError> {
    let iv = piece.interval.clone();
    let density = piece.density();
    if !exclusion.is_zero() {
        // drop the part of the piece within the exclusion radius of x
        let hole = Interval::new(x - exclusion, x + exclusion);
        let keep_left = if iv.left < hole.left {
            Some(Interval::new(iv.left.clone(), hole.left.clone().min(iv.right.clone())))
        } else {
            None
        };
        let keep_right = if iv.right > hole.right {
            Some(Interval::new(hole.right.clone().max(iv.left.clone()), iv.right.clone()))
        } else {
            None
        };
        return match (keep_left, keep_right) {
            (None, None) => Ok(Scalar::zero()),
            (Some(l), None) => {
                let m = &density * l.length();
                integrate_piece(kernel, &Piece { interval: l, mass: m }, x, &Rat::zero())
            }
            (None, Some(r)) => {
                let m = &density * r.length();
                integrate_piece(kernel, &Piece { interval: r, mass: m }, x, &Rat::zero())
            }
            (Some(l), Some(r)) => {
                let ml = &density * l.length();
                let mr = &density * r.length();
                let vl = integrate_piece(kernel, &Piece { interval: l, mass: ml }, x, &Rat::zero())?;
                let vr = integrate_piece(kernel, &Piece { interval: r, mass: mr }, x, &Rat::zero())?;
                Ok(vl.add(&vr))
            }
        };
    }

    if iv.contains_interior(x) {
        return Err(TransformError::Singularity(format_rat(x)));
    }
    if iv.contains(x) {
        // x on the piece boundary: principal-value style half-limit is not
        // defined on an exact path; treat as singular
        return Err(TransformError::Singularity(format_rat(x)));
    }

    // difference range: t = x - y for y in [a, b] gives [x - b, x - a]
    let t_lo = x - &iv.right;
    let t_hi = x - &iv.left;
    match exact_range(kernel, &t_lo, &t_hi)? {
        Some(ExactRange::FlatConstant(band, negative)) => {
            let v = kernel.flat_value(band);
            let signed = if negative { -v } else { v };
            Ok(Scalar::Exact(signed * &piece.mass))
        }
        Some(ExactRange::OneOverX) => {
            // integral of 1/(x - y) dy = ln|x - a| - ln|x - b|
            let num = to_f64(&t_hi).abs().ln();
            let den = to_f64(&t_lo).abs().ln();
            Ok(Scalar::Approx(to_f64(&density) * (num - den)))
        }
        None => {
            let fx = to_f64(x);
            let (a, b) = (to_f64(&iv.left), to_f64(&iv.right));
            let dens = to_f64(&density);
            let f = |y: f64| dens * kernel.eval_f64(fx - y);
            // force splits at region boundaries inside the range
            let cuts = region_cuts(kernel, fx - b, fx - a);
            let mut total = 0.0;
            let mut lo = a;
            for c in cuts.into_iter().rev() {
                // t-cut c corresponds to y = x - c; reversed c gives increasing y
                let y = fx - c;
                if y > lo && y < b {
                    total += adaptive_gl16(&f, lo, y, 1e-12, QUAD_ABS_TOL, 24).0;
                    lo = y;
                }
            }
            total += adaptive_gl16(&f, lo, b, 1e-12, QUAD_ABS_TOL, 24).0;
            Ok(Scalar::Approx(total))
        }
    }
}

/// Region boundary points (in t) between |t_lo| and |t_hi|, as f64.
fn region_cuts(kernel: &KernelSpec, t_lo: f64, t_hi: f64) -> Vec<f64> {
    let n = kernel.n as f64;
    let rho = to_f64(&kernel.rho);
    let sign = if t_lo >= 0.0 { 1.0 } else { -1.0 };
    let (alo, ahi) = (t_lo.abs().min(t_hi.abs()), t_lo.abs().max(t_hi.abs()));
    if alo == 0.0 {
        return vec![];
    }
    let mut cuts = Vec::new();
    let k_hi = (-(alo.ln()) / n.ln()).ceil() as i32 + 1;
    let k_lo = (-(ahi.ln()) / n.ln()).floor() as i32 - 1;
    for k in k_lo..=k_hi {
        let scale = n.powi(-k);
        for u in [
            1.0 / n.sqrt(),
            1.0 / (rho * n).sqrt(),
            1.0 / (rho * rho * n).sqrt(),
            (rho * rho * n).sqrt(),
            (rho * n).sqrt(),
        ] {
            let t = u * scale;
            if t > alo && t < ahi {
                cuts.push(sign * t);
            }
        }
    }
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cuts
}

/// The transform of a measure at a point: sum of atom contributions
/// mass * K(x - y) plus piece integrals, optionally windowed to an interval
/// and with a hard exclusion radius around x.
pub fn apply(
    kernel: &KernelSpec,
    mu: &DiscreteMeasure,
    x: &Rat,
    window: Option<&Interval>,
    exclusion: &Rat,
) -> Result<Scalar, TransformError> {
    let restricted;
    let mu = match window {
        Some(w) => {
            restricted = mu.restrict(w, true);
            &restricted
        }
        None => mu,
    };
    let mut acc = Scalar::zero();
    for a in &mu.atoms {
        let t = x - &a.pos;
        if !exclusion.is_zero() && t.abs() <= *exclusion {
            continue;
        }
        if t.is_zero() {
            return Err(TransformError::Singularity(format_rat(x)));
        }
        acc = acc.add(&kernel.eval(&t)?.mul_rat(&a.mass));
    }
    for p in &mu.pieces {
        acc = acc.add(&integrate_piece(kernel, p, x, exclusion)?);
    }
    Ok(acc)
}

/// f64 fast path: atoms only (the reweighted measures are atomic), no window.
pub fn apply_atoms_f64(kernel: &KernelSpec, atoms: &[(f64, f64)], x: f64) -> f64 {
    let mut acc = 0.0;
    for (pos, mass) in atoms {
        acc += mass * kernel.eval_f64(x - pos);
    }
    acc
}

// sampling grid for points inside an L interval, capped against overflow
fn sample_grid(n: u32, m: u32) -> u64 {
    (n as u64).checked_pow(m + 2).unwrap_or(1 << 60).min(1 << 60)
}

/// Outcome of the flatness certification.
#[derive(Clone, Debug)]
pub struct FlatnessReport {
    pub pass: bool,
    pub centers_checked: usize,
    pub samples_checked: usize,
    pub first_failure: Option<String>,
}

/// Certifies that the transform of the stage-m redistributed measure
/// vanishes, as an exact rational zero, at every gap center of level < m and
/// at `samples_per_l` random rational points of every central interval L of
/// level <= m-2. Any float contribution is itself a failure.
pub fn certify_flatness(
    kernel: &KernelSpec,
    omega_m: &DiscreteMeasure,
    n: u32,
    m: u32,
    samples_per_l: usize,
    seed: u64,
    mode: ExecMode,
) -> FlatnessReport {
    let mut targets: Vec<(TreeAddress, Vec<Rat>)> = Vec::new();
    for level in 0..m {
        for addr in TreeAddress::all_at_level(level) {
            let mut pts = vec![tree::center_of(&addr, n)];
            if level + 2 <= m {
                let l_iv = tree::l_interval_of(&addr, n);
                let mut rng = crate::random::rng_for(seed, "flatness", addr.rank() ^ ((level as u64) << 40));
                let grid = sample_grid(n, m);
                for _ in 0..samples_per_l {
                    pts.push(crate::random::rat_in_interval(&mut rng, &l_iv, grid));
                }
            }
            targets.push((addr, pts));
        }
    }
    let results = exec::map_collect(mode, &targets, |(addr, pts)| {
        let mut local_fail: Option<String> = None;
        let mut count = 0usize;
        for p in pts {
            count += 1;
            match apply(kernel, omega_m, p, None, &Rat::zero()) {
                Ok(Scalar::Exact(v)) if v.is_zero() => {}
                Ok(Scalar::Exact(v)) => {
                    local_fail.get_or_insert(format!(
                        "nonzero exact value {} at {} (node {})",
                        format_rat(&v),
                        format_rat(p),
                        addr.level_rank_label()
                    ));
                }
                Ok(Scalar::Approx(v)) => {
                    local_fail.get_or_insert(format!(
                        "inexact path (value {v:e}) at {} (node {})",
                        format_rat(p),
                        addr.level_rank_label()
                    ));
                }
                Err(e) => {
                    local_fail.get_or_insert(format!("error at {}: {e}", format_rat(p)));
                }
            }
        }
        (count, local_fail)
    });
    let mut report = FlatnessReport {
        pass: true,
        centers_checked: targets.len(),
        samples_checked: 0,
        first_failure: None,
    };
    for (count, fail) in results {
        report.samples_checked += count;
        if let Some(f) = fail {
            report.pass = false;
            if report.first_failure.is_none() {
                report.first_failure = Some(f);
            }
        }
    }
    report
}

/// Checks that the transform of a piecewise-reweighted stage measure is
/// constant on each central interval L (level <= m-2), sampling
/// `points_per_l` random points per interval; exact equality required.
pub fn constancy_on_l(
    kernel: &KernelSpec,
    weighted: &DiscreteMeasure,
    n: u32,
    m: u32,
    points_per_l: usize,
    seed: u64,
) -> Result<bool, TransformError> {
    for level in 0..m.saturating_sub(1) {
        for addr in TreeAddress::all_at_level(level) {
            let l_iv = tree::l_interval_of(&addr, n);
            let mut rng = crate::random::rng_for(seed, "constancy", addr.rank() ^ ((level as u64) << 40));
            let mut reference: Option<Rat> = None;
            for _ in 0..points_per_l {
                let y = crate::random::rat_in_interval(&mut rng, &l_iv, sample_grid(n, m));
                match apply(kernel, weighted, &y, None, &Rat::zero())? {
                    Scalar::Exact(v) => match &reference {
                        None => reference = Some(v),
                        Some(r) => {
                            if *r != v {
                                return Ok(false);
                            }
                        }
                    },
                    Scalar::Approx(_) => return Ok(false),
                }
            }
        }
    }
    Ok(true)
}
