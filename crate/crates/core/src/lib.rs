//! Olson's spectral order made computable on finite-dimensional Hermitian
//! matrices and on direct sums of full matrix algebras.
//!
//! The crate is organised bottom-up:
//!
//! * [`numeric`] – Hermitian eigensolving, projections and PSD tests under an
//!   explicit [`ToleranceConfig`].
//! * [`lattice`] – the projection lattice `P(B(Cⁿ))`.
//! * [`family`] – spectral families as exact right-continuous step functions.
//! * [`order`] – the spectral order `⪯`, its meets/joins, positive and
//!   negative parts, monotone functional calculus, atom and center tests.
//! * [`direct_sum`] – block profiles and elements of `⊕ B(C^{m_j})`.
//! * [`iso`] / [`oracle`] / [`recover`] – canonical spectral order
//!   isomorphisms and the recovery of their block structure from a black-box
//!   map.
//! * [`sample`] – seeded random generators shared by tests and self-checks.

pub mod direct_sum;
pub mod error;
pub mod family;
pub mod iso;
pub mod lattice;
pub mod monotone;
pub mod numeric;
pub mod oracle;
pub mod order;
pub mod recover;
pub mod sample;
pub mod tolerance;

pub use direct_sum::{BlockProfile, DirectSumElement};
pub use error::{Error, Result};
pub use family::SpectralFamily;
pub use iso::{BlockMap, DirectSumIso, FactorCanonicalIso, JordanIso, ProjectionIsomorphism};
pub use monotone::MonotoneBijection;
pub use numeric::{EigenSystem, HermitianMatrix, Projection, C64};
pub use oracle::OrderIsoOracle;
pub use order::ConeTag;
pub use tolerance::ToleranceConfig;
