//! The embedded N-adic binary tree of Cantor construction intervals.
//!
//! A node is addressed by its sign string from the root (empty string = the
//! unit interval). Level-l nodes carry the interval I, its removed middle gap
//! G, the common center, and the small central interval L. The heads/tails
//! statistics drive the closed-form masses of the redistributed measure: a
//! step whose sign repeats the previous one counts as a head, a step that
//! flips counts as a tail.

use crate::interval::Interval;
use crate::rat::{npow, rat, rint, Rat};
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sign {
    Minus,
    Plus,
}

impl Sign {
    pub fn flip(self) -> Sign {
        match self {
            Sign::Minus => Sign::Plus,
            Sign::Plus => Sign::Minus,
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TreeError {
    #[error("kappa is undefined at the root")]
    KappaAtRoot,
    #[error("cannot parse tree address {0:?}")]
    BadAddress(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct TreeAddress {
    signs: Vec<Sign>,
}

/// Heads/tails exponents of a node: `heads + tails = level - 1` for level >= 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HeadsTails {
    pub heads: u32,
    pub tails: u32,
}

impl TreeAddress {
    pub fn root() -> Self {
        TreeAddress { signs: Vec::new() }
    }

    pub fn from_signs(signs: Vec<Sign>) -> Self {
        TreeAddress { signs }
    }

    /// Address at `level` with rank `r` in 1..=2^level, counted left to right.
    pub fn from_rank(level: u32, r: u64) -> Self {
        assert!(r >= 1 && r <= 1u64 << level, "rank out of range");
        let idx = r - 1;
        let signs = (0..level)
            .map(|i| {
                if (idx >> (level - 1 - i)) & 1 == 0 {
                    Sign::Minus
                } else {
                    Sign::Plus
                }
            })
            .collect();
        TreeAddress { signs }
    }

    pub fn signs(&self) -> &[Sign] {
        &self.signs
    }

    pub fn level(&self) -> u32 {
        self.signs.len() as u32
    }

    pub fn is_root(&self) -> bool {
        self.signs.is_empty()
    }

    pub fn parent(&self) -> Option<TreeAddress> {
        if self.is_root() {
            None
        } else {
            TreeAddress { signs: self.signs[..self.signs.len() - 1].to_vec() }.into()
        }
    }

    pub fn child(&self, s: Sign) -> TreeAddress {
        let mut signs = self.signs.clone();
        signs.push(s);
        TreeAddress { signs }
    }

    pub fn children(&self) -> (TreeAddress, TreeAddress) {
        (self.child(Sign::Minus), self.child(Sign::Plus))
    }

    /// The other child of the parent; `None` at the root.
    pub fn sibling(&self) -> Option<TreeAddress> {
        let mut signs = self.signs.clone();
        let last = signs.pop()?;
        signs.push(last.flip());
        Some(TreeAddress { signs })
    }

    pub fn last_sign(&self) -> Option<Sign> {
        self.signs.last().copied()
    }

    /// Left-to-right rank in 1..=2^level.
    pub fn rank(&self) -> u64 {
        let mut r = 0u64;
        for s in &self.signs {
            r = (r << 1) | matches!(s, Sign::Plus) as u64;
        }
        r + 1
    }

    /// Noncommutative addition: concatenation of sign strings. The root is a
    /// two-sided identity; `a + b` lives in the subtree under `a`.
    pub fn tree_add(&self, other: &TreeAddress) -> TreeAddress {
        let mut signs = self.signs.clone();
        signs.extend_from_slice(&other.signs);
        TreeAddress { signs }
    }

    /// Mirror image: flips every sign; an involution.
    pub fn reflect(&self) -> TreeAddress {
        TreeAddress { signs: self.signs.iter().map(|s| s.flip()).collect() }
    }

    pub fn is_ancestor_of(&self, other: &TreeAddress) -> bool {
        other.signs.len() >= self.signs.len() && other.signs[..self.signs.len()] == self.signs[..]
    }

    /// Replays the path: position i >= 2 is a head when its sign repeats the
    /// sign before it. For level <= 1 both counts are zero.
    pub fn heads_tails(&self) -> HeadsTails {
        let mut heads = 0;
        let mut tails = 0;
        for w in self.signs.windows(2) {
            if w[0] == w[1] {
                heads += 1;
            } else {
                tails += 1;
            }
        }
        HeadsTails { heads, tails }
    }

    /// Text form over {L, R}; the root is the empty string.
    pub fn to_text(&self) -> String {
        self.signs
            .iter()
            .map(|s| match s {
                Sign::Minus => 'L',
                Sign::Plus => 'R',
            })
            .collect()
    }

    pub fn parse_text(s: &str) -> Result<TreeAddress, TreeError> {
        let mut signs = Vec::with_capacity(s.len());
        for c in s.trim().chars() {
            match c {
                'L' | 'l' | '-' => signs.push(Sign::Minus),
                'R' | 'r' | '+' => signs.push(Sign::Plus),
                _ => return Err(TreeError::BadAddress(s.to_string())),
            }
        }
        Ok(TreeAddress { signs })
    }

    /// The `(level, rank)` view serialized as `"l:r"`.
    pub fn level_rank_label(&self) -> String {
        format!("{}:{}", self.level(), self.rank())
    }

    /// All addresses at one level, left to right.
    pub fn all_at_level(level: u32) -> Vec<TreeAddress> {
        (1..=1u64 << level).map(|r| TreeAddress::from_rank(level, r)).collect()
    }
}

impl std::fmt::Display for TreeAddress {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.is_root() {
            write!(f, "(root)")
        } else {
            write!(f, "{}", self.to_text())
        }
    }
}

/// The Cantor interval I of a node: the root is [0,1]; a left child keeps the
/// left endpoint, a right child the right endpoint, each with 1/N of the
/// parent length. Endpoint denominators divide N^level.
pub fn interval_of(addr: &TreeAddress, n: u32) -> Interval {
    assert!(n >= 3, "N must be at least 3");
    let mut left = Rat::from_integer(0.into());
    let mut len = rint(1);
    let inv_n = rat(1, n as i64);
    for s in addr.signs() {
        len *= &inv_n;
        if matches!(s, Sign::Plus) {
            // right child keeps the right endpoint
            left += rint(n as i64 - 1) * &len;
        }
    }
    let right = &left + &len;
    Interval::new(left, right)
}

/// The removed open middle of proportion (N-2)/N; length (N-2) * N^{-(level+1)}.
pub fn gap_of(addr: &TreeAddress, n: u32) -> Interval {
    let i = interval_of(addr, n);
    let child_len = i.length() / rint(n as i64);
    Interval::new(&i.left + &child_len, &i.right - &child_len)
}

/// Common center of the node interval and its gap.
pub fn center_of(addr: &TreeAddress, n: u32) -> Rat {
    interval_of(addr, n).midpoint()
}

/// The small closed interval of radius N^{-(level+1)} about the center.
pub fn l_interval_of(addr: &TreeAddress, n: u32) -> Interval {
    let c = center_of(addr, n);
    let radius = npow(n, -(addr.level() as i32) - 1);
    Interval::new(&c - &radius, &c + &radius)
}

/// kappa = (1 + 1/N)^H (1 - 1/N)^T; undefined at the root, 1 at level 1.
pub fn kappa(addr: &TreeAddress, n: u32) -> Result<Rat, TreeError> {
    if addr.is_root() {
        return Err(TreeError::KappaAtRoot);
    }
    let ht = addr.heads_tails();
    let up = rat(n as i64 + 1, n as i64);
    let dn = rat(n as i64 - 1, n as i64);
    Ok(crate::rat::pow_i(&up, ht.heads as i32) * crate::rat::pow_i(&dn, ht.tails as i32))
}

/// Level of the deepest tree interval containing both points, capped so the
/// search stops once the points separate (they must not be equal).
pub fn common_ancestor_level(x: &Rat, y: &Rat, n: u32, max_level: u32) -> u32 {
    let mut addr = TreeAddress::root();
    for lvl in 0..max_level {
        let (lo, hi) = addr.children();
        let ilo = interval_of(&lo, n);
        let ihi = interval_of(&hi, n);
        if ilo.contains(x) && ilo.contains(y) {
            addr = lo;
        } else if ihi.contains(x) && ihi.contains(y) {
            addr = hi;
        } else {
            return lvl;
        }
    }
    max_level
}
