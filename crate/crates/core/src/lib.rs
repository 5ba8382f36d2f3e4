//! Rank-distance toolkit for dense complex matrices.
//!
//! The crate provides three layers that share one identification policy
//! for numerically equal values:
//!
//! * **Matrix metrics** ([`mats`]): numeric rank, the arithmetic distance
//!   `rank(A - B)` and its normalized form, rank-1 geodesic chains, and the
//!   Möbius action on matrices.
//! * **Spectral invariants** ([`multiset`], [`weyr`]): finite complex
//!   multisets with the disk-counting metrics `dc` and `tilde dc`, Weyr and
//!   Segre characteristics with their max metric, and geodesic chains in
//!   both spaces.
//! * **Constructions** ([`interlace`], [`almost`], [`normalcheck`]):
//!   minimal-rank spectral assignment for self-adjoint, unitary and
//!   normal-on-curve matrices, nearest self-adjoint/unitary matrices under
//!   the normalized rank distance, the almost-commuting witness with its
//!   Cauchy-determinant certificate, and an executable falsification
//!   harness for the eigenvalue-counting rank bound.

pub mod almost;
pub mod interlace;
mod linalg;
pub mod mats;
pub mod multiset;
pub mod normalcheck;
pub mod weyr;

pub use linalg::ScaledComplex;
pub use mats::{ComplexMatrix, MobiusMap, RankRatio};
pub use multiset::{ComplexMultiset, Curve, Region};
pub use weyr::{SegreChar, WeyrChar};

/// Default relative threshold for numeric rank decisions.
pub const DEFAULT_TOL: f64 = 1.0e-9;

/// Default relative tolerance for identifying numerically equal spectral
/// values; scaled by the largest modulus in play.
pub const DEFAULT_MERGE_REL: f64 = 1.0e-8;
