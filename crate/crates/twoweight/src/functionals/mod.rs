//! Two-weight functionals: Poisson integrals, energies, Muckenhoupt products,
//! testing integrals, decomposition sums, the tree-restricted maximal
//! function, and the weak boundedness scan.

pub mod energy;
pub mod fast;
pub mod maximal;
pub mod poisson;
pub mod testing;
pub mod wbp;

pub use energy::{
    energy_a2_pointwise, energy_squared, energy_sum, fitted_slope, gap_energy_partial_sums,
    EnergyDirection, PointwiseEnergyA2,
};
pub use fast::{energy_sum_f64, poisson_f64, MeasureF64};
pub use maximal::{maximal_restricted, maximal_testing};
pub use poisson::{poisson, poisson_centered};
pub use testing::{a2_scan, testing_backward, testing_forward, A2ScanResult, BackwardTesting, ForwardTesting};
pub use wbp::{wbp_scan, WbpResult};

use crate::interval::Interval;
use crate::rat::Rat;
use crate::scalar::Scalar;
use crate::transform::TransformError;
use crate::tree::{self, TreeAddress};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FunctionalError {
    #[error("energy undefined: zero restricted mass on {0}")]
    UndefinedEnergy(String),
    #[error("invalid decomposition: {0}")]
    InvalidDecomposition(String),
    #[error("zero normalizer mass on {0}")]
    ZeroNormalizer(String),
    #[error(transparent)]
    Transform(#[from] TransformError),
}

/// Value of a functional with the depth it was computed at and an optional
/// per-part breakdown. Nonnegative for every functional in this module.
#[derive(Clone, Debug)]
pub struct FunctionalValue {
    pub value: Scalar,
    pub depth: u32,
    pub parts: Option<Vec<(String, Scalar)>>,
}

impl FunctionalValue {
    pub fn exact(&self) -> bool {
        self.value.is_exact()
    }

    pub fn to_f64(&self) -> f64 {
        self.value.to_f64()
    }
}

/// A family of pairwise-disjoint subintervals of a base interval.
#[derive(Clone, Debug)]
pub struct Decomposition {
    pub base: Interval,
    pub parts: Vec<Interval>,
    pub provenance: String,
}

impl Decomposition {
    pub fn new(base: Interval, parts: Vec<Interval>, provenance: impl Into<String>) -> Result<Self, FunctionalError> {
        let mut sorted = parts;
        sorted.sort_by(|a, b| a.left.cmp(&b.left));
        for p in &sorted {
            if !base.contains_interval(p) {
                return Err(FunctionalError::InvalidDecomposition(format!(
                    "part {p} escapes the base {base}"
                )));
            }
        }
        for w in sorted.windows(2) {
            if !w[0].interior_disjoint(&w[1]) {
                return Err(FunctionalError::InvalidDecomposition(format!(
                    "parts {} and {} overlap",
                    w[0], w[1]
                )));
            }
        }
        Ok(Decomposition { base, parts: sorted, provenance: provenance.into() })
    }

    /// All level-`level` tree intervals, a partition of the Cantor support.
    pub fn children_at_level(n: u32, level: u32) -> Self {
        let parts = TreeAddress::all_at_level(level)
            .iter()
            .map(|a| tree::interval_of(a, n))
            .collect();
        Decomposition {
            base: Interval::unit(),
            parts,
            provenance: format!("children-at-level-{level}"),
        }
    }

    /// All gaps of levels 0..=depth: pairwise disjoint by construction.
    pub fn gaps_to_depth(n: u32, depth: u32) -> Self {
        let mut parts = Vec::new();
        for level in 0..=depth {
            for a in TreeAddress::all_at_level(level) {
                parts.push(tree::gap_of(&a, n));
            }
        }
        parts.sort_by(|a, b| a.left.cmp(&b.left));
        Decomposition { base: Interval::unit(), parts, provenance: format!("gaps-to-depth-{depth}") }
    }

    pub fn random(rng: &mut rand_chacha::ChaCha8Rng, base: &Interval, denom: u64, max_parts: usize) -> Self {
        let parts = crate::random::decomposition_in(rng, base, denom, max_parts);
        Decomposition { base: base.clone(), parts, provenance: "custom".into() }
    }
}

/// Exact sup tracker for rational-valued scans.
#[derive(Clone, Debug, Default)]
pub struct SupTracker {
    pub sup: Option<Rat>,
    pub argmax: Option<String>,
}

impl SupTracker {
    pub fn offer(&mut self, value: Rat, label: impl Fn() -> String) {
        if self.sup.as_ref().is_none_or(|s| value > *s) {
            self.sup = Some(value);
            self.argmax = Some(label());
        }
    }

    pub fn sup_f64(&self) -> f64 {
        self.sup.as_ref().map(crate::rat::to_f64).unwrap_or(0.0)
    }
}
