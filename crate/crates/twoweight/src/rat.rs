//! Exact rational arithmetic helpers on top of `num::BigRational`.

use num::bigint::BigInt;
use num::traits::{One, Signed, ToPrimitive, Zero};
use twofloat::TwoFloat;

pub type Rat = num::BigRational;

pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

pub fn rint(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn zero() -> Rat {
    Rat::zero()
}

pub fn one() -> Rat {
    Rat::one()
}

/// `base^exp` for any integer exponent (base nonzero when `exp < 0`).
pub fn pow_i(base: &Rat, exp: i32) -> Rat {
    if exp >= 0 {
        num::pow::pow(base.clone(), exp as usize)
    } else {
        num::pow::pow(base.clone(), (-exp) as usize).recip()
    }
}

/// `N^k` as an exact rational, `k` of either sign.
pub fn npow(n: u32, k: i32) -> Rat {
    pow_i(&rint(n as i64), k)
}

pub fn to_f64(r: &Rat) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Double-double conversion: the leading f64 plus the f64 of the exact
/// residual, accurate to ~1e-32 relative for magnitudes in normal range.
pub fn to_twofloat(r: &Rat) -> TwoFloat {
    let hi = to_f64(r);
    if !hi.is_finite() {
        return TwoFloat::from(hi);
    }
    let residual = r - Rat::from_float(hi).unwrap_or_else(Rat::zero);
    TwoFloat::new_add(hi, to_f64(&residual))
}

pub fn format_rat(r: &Rat) -> String {
    if r.denom().is_one() {
        format!("{}", r.numer())
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn parse_rat(s: &str) -> Option<Rat> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        Some(Rat::new(n, d))
    } else if let Ok(n) = s.parse::<BigInt>() {
        Some(Rat::from_integer(n))
    } else {
        // Decimal form, e.g. "0.75".
        let (int_part, frac_part) = s.split_once('.')?;
        let neg = int_part.trim_start().starts_with('-');
        let int_part: BigInt = if int_part.is_empty() || int_part == "-" {
            BigInt::zero()
        } else {
            int_part.parse().ok()?
        };
        if frac_part.is_empty() || !frac_part.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let num: BigInt = frac_part.parse().ok()?;
        let den = num::pow::pow(BigInt::from(10), frac_part.len());
        let frac = Rat::new(num, den);
        let whole = Rat::from_integer(int_part.abs());
        let v = whole + frac;
        Some(if neg { -v } else { v })
    }
}

/// Serialize/deserialize rationals as `"p/q"` strings.
pub mod rat_serde {
    use super::{format_rat, parse_rat, Rat};
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rat, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rat(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rat, D::Error> {
        let s = String::deserialize(d)?;
        parse_rat(&s).ok_or_else(|| D::Error::custom(format!("bad rational: {s}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pow_and_parse_round_trip() {
        assert_eq!(npow(16, -2), rat(1, 256));
        assert_eq!(pow_i(&rat(3, 4), 2), rat(9, 16));
        assert_eq!(parse_rat("15/16").unwrap(), rat(15, 16));
        assert_eq!(parse_rat("0.75").unwrap(), rat(3, 4));
        assert_eq!(parse_rat("-3").unwrap(), rint(-3));
        assert_eq!(format_rat(&rat(-7, 2)), "-7/2");
        assert_eq!(format_rat(&rint(4)), "4");
    }

    #[test]
    fn twofloat_conversion_is_tight() {
        let r = rat(1, 3) + rat(1, 1 << 40);
        let tf = to_twofloat(&r);
        let back = to_f64(&(r.clone() - Rat::from_float(tf.hi()).unwrap()));
        assert!((tf.lo() - back).abs() < 1e-30);
    }
}
