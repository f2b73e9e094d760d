//! Recovering the topology of a dynamical system's state space from
//! sampled observation trajectories.
//!
//! The pipeline simulates a system ([`dynamics`]), observes each trajectory
//! through an output function ([`observation`]), measures pairwise
//! matching-substring distances at a fixed slack ([`slack`]), builds a
//! Vietoris-Rips filtration on the trajectory sample ([`filtration`]) and
//! reads Betti numbers off its persistence diagram ([`persistence`]).
//! [`pipeline`] wires these together with experiment presets and artifact
//! output.

pub mod dynamics;
pub mod error;
pub mod filtration;
pub mod observation;
pub mod persistence;
pub mod pipeline;
pub mod plot;
pub mod seed;
pub mod slack;

pub use error::{Error, Result};
