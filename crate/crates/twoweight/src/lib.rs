//! Exact-rational construction of a two-weight pair for a flattened Hilbert
//! transform on Cantor-type measures, together with numerical certification of
//! the conditions the pair satisfies (Muckenhoupt products, testing, weak
//! boundedness, forward energy) and the one it fails (backward energy over
//! interval averages).
//!
//! Everything that can be exact is exact: interval endpoints, measure masses,
//! kernel values in flat and 1/x bands, Poisson integrals and energies of
//! piecewise-uniform measures. Floating point only enters in kernel transition
//! zones and in quadrature, and every computed value carries an exactness flag.

pub mod exec;
pub mod functionals;
pub mod interval;
pub mod kernel;
pub mod measures;
pub mod quad;
pub mod random;
pub mod rat;
pub mod report;
pub mod reversal;
pub mod scalar;
pub mod transform;
pub mod tree;

pub use exec::ExecMode;
pub use interval::Interval;
pub use kernel::{BandClass, KernelKind, KernelSpec, Region};
pub use measures::{DiscreteMeasure, MeasureTransform};
pub use rat::Rat;
pub use report::CheckReport;
pub use scalar::Scalar;
pub use tree::{HeadsTails, Sign, TreeAddress};
