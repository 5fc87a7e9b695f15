//! Exact computation of multivariate correlation measures on finite
//! product alphabets.
//!
//! The crate works with dense probability tables over products of finite
//! alphabets.  On top of the structural operations (marginals,
//! disintegrations, products, mixtures, quantizations, clumpings) it
//! provides:
//!
//! - the classical information measures: Shannon entropy, mutual
//!   information, KL divergence, total correlation (TC) and dual total
//!   correlation (DTC), together with their conditional versions and the
//!   identities relating them ([`info`]);
//! - an exact transportation-distance engine for the normalized Hamming
//!   average metric, with total variation and the
//!   transportation-entropy / robustness bounds ([`transport`]);
//! - mixture decompositions of measures with small DTC into
//!   low-mutual-information mixtures of near-product measures
//!   ([`decompose`]);
//! - named fixture measures and seeded random instance generators
//!   ([`corpus`]);
//! - batch verification suites over randomized instances ([`suites`]).
//!
//! Everything is computed in closed form on the dense tables; wherever a
//! quantity admits two independent formulas, both are evaluated and
//! cross-checked at a tolerance of `1e-9`.  All values are immutable after
//! construction and every operation is a pure function of its inputs, so
//! concurrent use is safe.
//!
//! Logarithms are natural internally; [`info::LogBase`] converts at the
//! presentation layer.  Coordinates are 0-based in this API and 1-based in
//! the CLI and reports.

#![forbid(unsafe_code)]

mod capacity;
mod coord;
mod error;
mod numeric;

pub mod corpus;
pub mod decompose;
pub mod info;
pub mod space;
pub mod suites;
pub mod transport;

pub use capacity::cell_capacity;
pub use coord::CoordSet;
pub use error::{Error, Result};
pub use numeric::neumaier_sum;
