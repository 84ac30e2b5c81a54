//! Sampling, statistical classification, certificates, file formats and the
//! command line on top of [`flashlab_core`].

pub mod classifier;
pub mod commands;
pub mod config;
pub mod output;
pub mod sampling;
pub mod stats;

pub use flashlab_core;
