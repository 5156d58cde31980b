//! A value that is either an exact rational or a float approximation.
//!
//! Sums and products stay exact as long as every operand is exact; one
//! approximate contribution demotes the whole result.

use crate::rat::{format_rat, to_f64, Rat};
use num::traits::Zero;
use std::fmt;

#[derive(Clone, Debug, PartialEq)]
pub enum Scalar {
    Exact(Rat),
    Approx(f64),
}

impl Scalar {
    pub fn zero() -> Self {
        Scalar::Exact(Rat::zero())
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Scalar::Exact(_))
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Scalar::Exact(r) => to_f64(r),
            Scalar::Approx(v) => *v,
        }
    }

    pub fn as_exact(&self) -> Option<&Rat> {
        match self {
            Scalar::Exact(r) => Some(r),
            Scalar::Approx(_) => None,
        }
    }

    pub fn is_zero_exact(&self) -> bool {
        matches!(self, Scalar::Exact(r) if r.is_zero())
    }

    pub fn add(&self, other: &Scalar) -> Scalar {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => Scalar::Exact(a + b),
            _ => Scalar::Approx(self.to_f64() + other.to_f64()),
        }
    }

    pub fn mul(&self, other: &Scalar) -> Scalar {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => Scalar::Exact(a * b),
            _ => Scalar::Approx(self.to_f64() * other.to_f64()),
        }
    }

    pub fn mul_rat(&self, r: &Rat) -> Scalar {
        match self {
            Scalar::Exact(a) => Scalar::Exact(a * r),
            Scalar::Approx(v) => Scalar::Approx(v * to_f64(r)),
        }
    }

    pub fn neg(&self) -> Scalar {
        match self {
            Scalar::Exact(a) => Scalar::Exact(-a),
            Scalar::Approx(v) => Scalar::Approx(-v),
        }
    }

    /// Exact-order sum: exact while possible, demoting once.
    pub fn sum<I: IntoIterator<Item = Scalar>>(items: I) -> Scalar {
        let mut acc = Scalar::zero();
        for it in items {
            acc = acc.add(&it);
        }
        acc
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Exact(r) => write!(f, "{}", format_rat(r)),
            Scalar::Approx(v) => write!(f, "{v:.12e}"),
        }
    }
}
