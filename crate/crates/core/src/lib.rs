//! Leggett-Garg inequalities for a single qubit under unsharp, possibly
//! biased, two-outcome measurements.
//!
//! The crate evaluates the standard, Wigner-form and entropic inequalities
//! from exact sequential-measurement statistics, checks no-signaling-in-time
//! and arrow-of-time conditions, tests joint measurability of the measured
//! effects, and sweeps parameter grids.

pub mod error;
pub mod inequalities;
pub mod jointmeas;
pub mod linalg;
pub mod measurement;
pub mod nsit;
pub mod scan;
pub mod selftest;

pub use error::{Error, Result};
pub use inequalities::{Family, InequalityResult, Spec};
pub use linalg::{Operator, Vec3};
pub use measurement::{Outcome, Povm, QubitState, Setup, Statistics, Time, TimeSet};
