//! Van der Corput sets in `Z^d` as computational objects.
//!
//! The crate checks the van der Corput inequalities on finite families,
//! builds and certifies positive-definite witness families, evaluates
//! spectral obstructions on atomic torus measures, decides polynomial
//! divisibility up to a bound, and measures recurrence on closed-form
//! dynamical systems. Every reported quantity is a finite-window value;
//! nothing here claims a limit.

pub mod correlations;
pub mod divisibility;
pub mod dynamics;
pub mod error;
pub mod exact;
pub mod inequalities;
pub mod lattice;
pub mod measures;
pub mod numeric;
pub mod posdef;
pub mod sequences;

pub use error::{Error, Result};
pub use lattice::{FiniteSet, IndexBox, MultiIndex};
