//! Finite-scale construction of a triple-correlation counterexample.
//!
//! The crate builds a sparse set `S` of sums of two distinct prefix products
//! over a mixed-radix basis, a random sign pattern `eta` on it, and witness
//! functions `f_k`, `f~_k` whose triple correlations
//! `S_k(d) = E_n f~_k(n) f_k(n+d) f_k(n+2d)` equal `gamma_k * eta(d)`.
//! Everything that can be checked at finite scale is checked with exact
//! rationals or outward-rounded enclosures.

pub mod config;
pub mod correlation;
pub mod error;
pub mod eta;
pub mod gen_nil;
pub mod interval;
pub mod nets;
pub mod radix;
pub mod report;
pub mod rng;
pub mod sparsity;
pub mod witness;

/// Exact rational value used for correlations, partial products and bounds.
pub type ExactRatio = num_rational::BigRational;

pub use correlation::{CorrelationResult, Method};
pub use error::{Error, Result};
pub use eta::{DeviationBound, ObstructionReport};
pub use gen_nil::{IntervalCover, ThetaApprox};
pub use nets::{Family, PhaseNet};
pub use radix::{BasisRule, DigitVector, RadixBasis, SigmaElement};
pub use sparsity::SparseSet;
pub use witness::{Eta, EtaAssignment, WitnessFunctions};
