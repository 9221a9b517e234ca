//! Geometric evolution-time bounds for driven quantum systems.
//!
//! The crate computes the gauge-invariant geometry of unitary quantum
//! evolution — reference-section length, horizontal-curve length, and the
//! Fubini-Study geodesic distance — and assembles from them the two-sided
//! bounds on evolution time (speed limit and reverse speed limit), for pure
//! states, for mixed states via purification, and for the discharging power
//! of two driven two-level battery models.

pub mod battery;
pub mod bounds;
pub mod error;
pub mod purification;
pub mod geometry;
pub mod quantum;

pub use error::{Error, Result};
