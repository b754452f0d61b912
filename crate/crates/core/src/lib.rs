//! Finite-dimensional p-form electromagnetism on static spacetimes.
//!
//! The crate assembles discrete twisted exterior calculus on simplicial
//! complexes, splits cochains into exact, harmonic and coexact parts, evolves
//! the classical gauge-fixed phase space exactly through the spectral
//! functional calculus, and evaluates coherent-state matrix elements of the
//! free boson field built on the oscillating sector: Weyl, Heisenberg and
//! Wick-power elements, the field quasioperators and Wilson surfaces.

pub mod complex;
pub mod dynamics;
pub mod error;
pub mod exact;
pub mod gap;
pub mod json;
pub mod kodaira;
pub mod operators;
pub mod quantization;
pub mod scenario;
pub mod suite;
pub mod wilson;

pub use error::{Error, Result};
