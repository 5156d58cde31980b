//! The flattened Hilbert kernel and the plain 1/x kernel.
//!
//! The flattened kernel equals 1/x except on bands around the points N^{-k},
//! where it is the constant N^k. Between the 1/x branch and each flat core sit
//! two transition zones. Band and region membership of a rational point are
//! decided by exact rational comparisons of x^2 against rational thresholds,
//! so flat/1-over-x evaluations are exact. Transition values come from a
//! monotone cubic Hermite profile in log x, evaluated in double-double
//! arithmetic (~1e-30 relative), exposed as f64.
//!
//! The same normalized profile is reused in every band (scaled by N^k), which
//! makes the dilation identity K(N x) = K(x) / N hold identically, transition
//! zones included.

use crate::rat::{npow, rat, rint, to_f64, to_twofloat, Rat};
use crate::scalar::Scalar;
use num::traits::{Signed, Zero};
use thiserror::Error;
use twofloat::TwoFloat;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KernelKind {
    Flattened,
    Hilbert,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Region {
    OneOverXLow,
    TransitionLow,
    Flat,
    TransitionHigh,
    OneOverXHigh,
}

impl Region {
    pub fn is_one_over_x(self) -> bool {
        matches!(self, Region::OneOverXLow | Region::OneOverXHigh)
    }

    pub fn is_transition(self) -> bool {
        matches!(self, Region::TransitionLow | Region::TransitionHigh)
    }

    pub fn label(self) -> &'static str {
        match self {
            Region::OneOverXLow => "one-over-x-low",
            Region::TransitionLow => "transition-low",
            Region::Flat => "flat",
            Region::TransitionHigh => "transition-high",
            Region::OneOverXHigh => "one-over-x-high",
        }
    }
}

/// Band/region classification of a nonzero point. `band` is the index k of
/// the band [N^{-k-1/2}, N^{-k+1/2}) containing |x|, the one whose flat core
/// F_k contains N^{-k}; the flat value there is N^k.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BandClass {
    pub band: i32,
    pub region: Region,
    pub negative: bool,
}

#[derive(Debug, Error, PartialEq)]
pub enum KernelError {
    #[error("kernel singularity at x = 0")]
    Singularity,
    #[error("invalid kernel parameters: {0}")]
    InvalidParams(String),
}

#[derive(Clone, Debug)]
pub struct KernelSpec {
    pub n: u32,
    pub rho: Rat,
    pub kind: KernelKind,
    // squared-u region thresholds, precomputed
    t_1x_low: Rat,  // 1/(rho N)
    t_flat_lo: Rat, // 1/(rho^2 N)
    t_flat_hi: Rat, // rho^2 N
    t_1x_high: Rat, // rho N
}

impl KernelSpec {
    pub fn flattened(n: u32, rho: Rat) -> Result<Self, KernelError> {
        if n < 3 {
            return Err(KernelError::InvalidParams(format!("N = {n} < 3")));
        }
        if rho <= Rat::zero() || rho >= rint(1) {
            return Err(KernelError::InvalidParams("rho must lie in (0, 1)".into()));
        }
        let n_rat = rint(n as i64);
        let rho2 = &rho * &rho;
        let t_flat_lo = (&rho2 * &n_rat).recip();
        let t_flat_hi = &rho2 * &n_rat;
        if t_flat_lo >= t_flat_hi {
            return Err(KernelError::InvalidParams("flat core empty: rho^2 N <= 1".into()));
        }
        Ok(KernelSpec {
            t_1x_low: (&rho * &n_rat).recip(),
            t_1x_high: &rho * &n_rat,
            t_flat_lo,
            t_flat_hi,
            n,
            rho,
            kind: KernelKind::Flattened,
        })
    }

    pub fn hilbert() -> Self {
        KernelSpec {
            n: 3,
            rho: rat(3, 4),
            kind: KernelKind::Hilbert,
            t_1x_low: rat(1, 1),
            t_flat_lo: rat(1, 1),
            t_flat_hi: rat(1, 1),
            t_1x_high: rat(1, 1),
        }
    }

    pub fn default_flattened() -> Self {
        KernelSpec::flattened(16, rat(3, 4)).expect("default parameters are valid")
    }

    /// Exact check of the sufficient flat-spot containment conditions
    /// 1/(rho sqrt N) <= 1/2 - 2/N and rho sqrt N >= 1 (compared squared).
    pub fn containment_holds(&self) -> bool {
        let n = rint(self.n as i64);
        let half_minus = rat(1, 2) - rat(2, self.n as i64);
        if half_minus <= Rat::zero() {
            return false;
        }
        let lhs_sq = (&self.rho * &self.rho * &n).recip();
        lhs_sq <= &half_minus * &half_minus && &self.rho * &self.rho * &n >= rint(1)
    }

    /// Band index k with |x| in [N^{-k-1/2}, N^{-k+1/2}), by exact comparison
    /// of x^2 N^{2k} against [1/N, N).
    fn band_of(&self, x_abs: &Rat) -> i32 {
        let n = self.n;
        let xf = to_f64(x_abs);
        let mut k = if xf > 0.0 && xf.is_finite() {
            (-(xf.ln() / (n as f64).ln())).round() as i32
        } else {
            0
        };
        let x2 = x_abs * x_abs;
        let lo = rat(1, n as i64);
        let hi = rint(n as i64);
        loop {
            let s = &x2 * npow(n, 2 * k);
            if s < lo {
                k += 1;
            } else if s >= hi {
                k -= 1;
            } else {
                return k;
            }
        }
    }

    /// Exact classification of a nonzero rational point. For the plain
    /// Hilbert kernel every point is a 1/x point; the band is still reported.
    pub fn classify(&self, x: &Rat) -> Result<BandClass, KernelError> {
        if x.is_zero() {
            return Err(KernelError::Singularity);
        }
        let negative = x.is_negative();
        let x_abs = x.abs();
        let band = self.band_of(&x_abs);
        if self.kind == KernelKind::Hilbert {
            return Ok(BandClass { band, region: Region::OneOverXLow, negative });
        }
        let u2 = &x_abs * &x_abs * npow(self.n, 2 * band);
        let region = if u2 <= self.t_1x_low {
            Region::OneOverXLow
        } else if u2 < self.t_flat_lo {
            Region::TransitionLow
        } else if u2 <= self.t_flat_hi {
            Region::Flat
        } else if u2 < self.t_1x_high {
            Region::TransitionHigh
        } else {
            Region::OneOverXHigh
        };
        Ok(BandClass { band, region, negative })
    }

    /// Kernel value: exact in flat and 1/x regions, double-double rounded to
    /// f64 in transitions.
    pub fn eval(&self, x: &Rat) -> Result<Scalar, KernelError> {
        let class = self.classify(x)?;
        if self.kind == KernelKind::Hilbert {
            return Ok(Scalar::Exact(x.recip()));
        }
        Ok(match class.region {
            Region::OneOverXLow | Region::OneOverXHigh => Scalar::Exact(x.recip()),
            Region::Flat => {
                let v = npow(self.n, class.band);
                Scalar::Exact(if class.negative { -v } else { v })
            }
            Region::TransitionLow | Region::TransitionHigh => {
                let u = x.abs() * npow(self.n, class.band);
                let h = self.transition_profile(class.region).value(to_twofloat(&u).ln());
                let v = to_twofloat(&npow(self.n, class.band)) * h;
                let v: f64 = v.into();
                Scalar::Approx(if class.negative { -v } else { v })
            }
        })
    }

    /// Derivative: exact -1/x^2 in 1/x regions, exact 0 on flat cores,
    /// Hermite derivative in transitions. Always <= 0 (the kernel derivative
    /// is an even function, so no sign flip for negative x).
    pub fn eval_derivative(&self, x: &Rat) -> Result<Scalar, KernelError> {
        let class = self.classify(x)?;
        if self.kind == KernelKind::Hilbert {
            return Ok(Scalar::Exact(-(x * x).recip()));
        }
        Ok(match class.region {
            Region::OneOverXLow | Region::OneOverXHigh => Scalar::Exact(-(x * x).recip()),
            Region::Flat => Scalar::Exact(Rat::zero()),
            Region::TransitionLow | Region::TransitionHigh => {
                let u = x.abs() * npow(self.n, class.band);
                let u_tf = to_twofloat(&u);
                let dh = self.transition_profile(class.region).slope(u_tf.ln());
                // dK/dx = N^{2k} h'(t) / u
                let v = to_twofloat(&npow(self.n, 2 * class.band)) * dh / u_tf;
                Scalar::Approx(v.into())
            }
        })
    }

    fn transition_profile(&self, region: Region) -> Hermite {
        let rho_n = to_twofloat(&(rint(self.n as i64) * &self.rho));
        let rho2_n = to_twofloat(&(rint(self.n as i64) * &self.rho * &self.rho));
        match region {
            Region::TransitionLow => {
                // from the 1/u branch at u = (rho N)^{-1/2} down to 1 at (rho^2 N)^{-1/2}
                let t0 = -rho_n.ln() / 2.0;
                let t1 = -rho2_n.ln() / 2.0;
                let g0 = (-t0).exp();
                Hermite { t0, t1, g0, m0: -g0, g1: TwoFloat::from(1.0), m1: TwoFloat::from(0.0) }
            }
            Region::TransitionHigh => {
                // from 1 at u = (rho^2 N)^{1/2} down to the 1/u branch at (rho N)^{1/2}
                let t0 = rho2_n.ln() / 2.0;
                let t1 = rho_n.ln() / 2.0;
                let g1 = (-t1).exp();
                Hermite { t0, t1, g0: TwoFloat::from(1.0), m0: TwoFloat::from(0.0), g1, m1: -g1 }
            }
            _ => unreachable!("no transition profile in exact regions"),
        }
    }

    /// f64 fast path for quadrature and plotting. Agrees with `eval` to f64
    /// rounding; near region boundaries the branches agree by construction.
    pub fn eval_f64(&self, x: f64) -> f64 {
        if x == 0.0 {
            return f64::NAN;
        }
        if self.kind == KernelKind::Hilbert {
            return 1.0 / x;
        }
        let ax = x.abs();
        let n = self.n as f64;
        let mut k = (-(ax.ln() / n.ln())).round() as i32;
        let mut u = ax * n.powi(k);
        // settle fp edge cases
        while u * u < 1.0 / n {
            k += 1;
            u = ax * n.powi(k);
        }
        while u * u >= n {
            k -= 1;
            u = ax * n.powi(k);
        }
        let u2 = u * u;
        let rho = to_f64(&self.rho);
        let v = if u2 <= 1.0 / (rho * n) || u2 >= rho * n {
            1.0 / u
        } else if u2 >= 1.0 / (rho * rho * n) && u2 <= rho * rho * n {
            1.0
        } else if u2 < 1.0 {
            let h = self.transition_profile(Region::TransitionLow).value(TwoFloat::from(u.ln()));
            h.into()
        } else {
            let h = self.transition_profile(Region::TransitionHigh).value(TwoFloat::from(u.ln()));
            h.into()
        };
        let signed = if x < 0.0 { -v } else { v };
        signed * n.powi(k)
    }

    pub fn eval_derivative_f64(&self, x: f64) -> f64 {
        if x == 0.0 {
            return f64::NAN;
        }
        if self.kind == KernelKind::Hilbert {
            return -1.0 / (x * x);
        }
        match self.eval_derivative(&Rat::from_float(x).expect("finite x")) {
            Ok(s) => s.to_f64(),
            Err(_) => f64::NAN,
        }
    }

    /// Flat value on the band-k core: N^k.
    pub fn flat_value(&self, band: i32) -> Rat {
        npow(self.n, band)
    }
}

/// Cubic Hermite segment in the variable t = ln u.
struct Hermite {
    t0: TwoFloat,
    t1: TwoFloat,
    g0: TwoFloat,
    m0: TwoFloat,
    g1: TwoFloat,
    m1: TwoFloat,
}

impl Hermite {
    fn value(&self, t: TwoFloat) -> TwoFloat {
        let dt = self.t1 - self.t0;
        let s = (t - self.t0) / dt;
        let s2 = s * s;
        let s3 = s2 * s;
        (2.0 * s3 - 3.0 * s2 + 1.0) * self.g0
            + (s3 - 2.0 * s2 + s) * dt * self.m0
            + (-2.0 * s3 + 3.0 * s2) * self.g1
            + (s3 - s2) * dt * self.m1
    }

    fn slope(&self, t: TwoFloat) -> TwoFloat {
        let dt = self.t1 - self.t0;
        let s = (t - self.t0) / dt;
        let s2 = s * s;
        ((6.0 * s2 - 6.0 * s) * self.g0
            + (3.0 * s2 - 4.0 * s + 1.0) * dt * self.m0
            + (-6.0 * s2 + 6.0 * s) * self.g1
            + (3.0 * s2 - 2.0 * s) * dt * self.m1)
            / dt
    }

    /// Fritsch-Carlson style monotonicity certificate for the segment.
    fn is_monotone_nonincreasing(&self) -> bool {
        let delta = (self.g1 - self.g0) / (self.t1 - self.t0);
        if delta >= TwoFloat::from(0.0) {
            return false;
        }
        let a = self.m0 / delta;
        let b = self.m1 / delta;
        let lo = TwoFloat::from(0.0);
        let hi = TwoFloat::from(3.0);
        a >= lo && a <= hi && b >= lo && b <= hi
    }
}

/// Inf and sup of |x K(x)| over log-spaced samples across `bands` bands each
/// side of band 0, `samples_per_band` points per band.
pub fn ellipticity_constants(spec: &KernelSpec, samples_per_band: usize, bands: i32) -> (f64, f64) {
    let mut inf = f64::INFINITY;
    let mut sup = 0.0f64;
    let n = spec.n as f64;
    for k in -bands..=bands {
        for i in 0..samples_per_band {
            // u log-spaced across [N^{-1/2}, N^{1/2}]
            let t = -0.5 + (i as f64 + 0.5) / samples_per_band as f64;
            let x = n.powf(t) * n.powi(-k);
            let v = (x * spec.eval_f64(x)).abs();
            inf = inf.min(v);
            sup = sup.max(v);
        }
    }
    (inf, sup)
}

/// Calderon-Zygmund size/smoothness constants over samples, plus a sampled
/// Lipschitz (Holder exponent 1) constant for the derivative.
pub struct CzConstants {
    pub c_size: f64,
    pub c_smooth: f64,
    pub c_lipschitz: f64,
}

pub fn cz_smoothness_check(spec: &KernelSpec, samples_per_band: usize, bands: i32) -> CzConstants {
    let n = spec.n as f64;
    let mut c_size = 0.0f64;
    let mut c_smooth = 0.0f64;
    let mut c_lip = 0.0f64;
    for k in -bands..=bands {
        for i in 0..samples_per_band {
            let t = -0.5 + (i as f64 + 0.5) / samples_per_band as f64;
            let x = n.powf(t) * n.powi(-k);
            c_size = c_size.max((x * spec.eval_f64(x)).abs());
            let d = spec.eval_derivative_f64(x);
            c_smooth = c_smooth.max((x * x * d).abs());
            // |K'(x) - K'(x')| <= C |x - x'| / |x|^3 with x' = x (1 + 1e-3)
            let x2 = x * (1.0 + 1e-3);
            let d2 = spec.eval_derivative_f64(x2);
            c_lip = c_lip.max((d - d2).abs() * x.powi(3) / (x2 - x));
        }
    }
    CzConstants { c_size, c_smooth, c_lipschitz: c_lip }
}

/// Both transition segments pass the monotonicity certificate.
pub fn transitions_monotone(spec: &KernelSpec) -> bool {
    spec.transition_profile(Region::TransitionLow).is_monotone_nonincreasing()
        && spec.transition_profile(Region::TransitionHigh).is_monotone_nonincreasing()
}
