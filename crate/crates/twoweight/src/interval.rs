//! Closed intervals with exact rational endpoints.

use crate::rat::{format_rat, rat_serde, Rat};
use num::traits::Zero;
use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Interval {
    #[serde(with = "rat_serde")]
    pub left: Rat,
    #[serde(with = "rat_serde")]
    pub right: Rat,
}

impl Interval {
    /// Requires `left < right`.
    pub fn new(left: Rat, right: Rat) -> Self {
        assert!(left < right, "degenerate interval");
        Interval { left, right }
    }

    pub fn unit() -> Interval {
        Interval::new(Rat::zero(), Rat::from_integer(1.into()))
    }

    pub fn length(&self) -> Rat {
        &self.right - &self.left
    }

    pub fn midpoint(&self) -> Rat {
        (&self.left + &self.right) / Rat::from_integer(2.into())
    }

    pub fn contains(&self, x: &Rat) -> bool {
        *x >= self.left && *x <= self.right
    }

    pub fn contains_interior(&self, x: &Rat) -> bool {
        *x > self.left && *x < self.right
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        self.left <= other.left && other.right <= self.right
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let l = if self.left >= other.left { self.left.clone() } else { other.left.clone() };
        let r = if self.right <= other.right { self.right.clone() } else { other.right.clone() };
        if l < r {
            Some(Interval::new(l, r))
        } else {
            None
        }
    }

    /// Interiors disjoint (shared endpoints allowed).
    pub fn interior_disjoint(&self, other: &Interval) -> bool {
        self.right <= other.left || other.right <= self.left
    }

    pub fn dist_to_point(&self, x: &Rat) -> Rat {
        if *x < self.left {
            &self.left - x
        } else if *x > self.right {
            x - &self.right
        } else {
            Rat::zero()
        }
    }

    pub fn dist_to_interval(&self, other: &Interval) -> Rat {
        if self.right < other.left {
            &other.left - &self.right
        } else if other.right < self.left {
            &self.left - &other.right
        } else {
            Rat::zero()
        }
    }

    /// Concentric dilation, e.g. `scale(3)` is the tripled interval 3I.
    pub fn scale_about_center(&self, factor: &Rat) -> Interval {
        let c = self.midpoint();
        let half = self.length() * factor / Rat::from_integer(2.into());
        Interval::new(&c - &half, &c + &half)
    }

    pub fn translate(&self, dx: &Rat) -> Interval {
        Interval::new(&self.left + dx, &self.right + dx)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", format_rat(&self.left), format_rat(&self.right))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::rat;

    #[test]
    fn basic_geometry() {
        let i = Interval::new(rat(1, 4), rat(3, 4));
        assert_eq!(i.length(), rat(1, 2));
        assert_eq!(i.midpoint(), rat(1, 2));
        assert_eq!(i.dist_to_point(&rat(7, 8)), rat(1, 8));
        assert_eq!(i.dist_to_point(&rat(1, 2)), rat(0, 1));
        let t = i.scale_about_center(&rat(3, 1));
        assert_eq!(t, Interval::new(rat(-1, 4), rat(5, 4)));
    }
}
