//! Simulation core for EPR experiments in a relativistic GRW-type collapse
//! theory with flash ontology.
//!
//! The crate is `no_std` (it needs `alloc`) and contains everything that is a
//! pure function of its inputs:
//!
//! * [`quantum`] - two spin-½ particles: states, Born probabilities,
//!   projective collapse, correlators and CHSH values.
//! * [`minkowski`] - 1+1 dimensional events, boosts, spacelike separation and
//!   frame-relative temporal order.
//! * [`models`] - the seeded outcome models: the relativistic flash process,
//!   a preferred-frame model and a local hidden-variable model.
//! * [`determinism`] - deterministic strategies with pre-given randomness,
//!   the local CHSH bound, the EPR anticorrelation filter, the Wigner check and
//!   the frame-ordered ("Janus") deterministic realization of the flash process.
//!
//! IO, statistics with p-values, the classifier and the command line live in
//! the `flashlab` companion crate.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod determinism;
pub mod minkowski;
pub mod models;
pub mod quantum;
pub mod seed;

pub use minkowski::{Event, Frame, Region};
pub use models::{ExperimentRun, Flash, ModelId, ModelParams, OutcomeModel};
pub use quantum::{Channel, Outcome, PureState, Setting, SettingPair, Side};
