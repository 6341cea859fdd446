//! File formats, synthetic data and run orchestration for the
//! sparse-representation trackers. The algorithms live in
//! `sparse-track-core`; this crate adds everything that touches the
//! filesystem plus the `sparse-track` binary.

pub mod bgio;
pub mod config;
pub mod dump;
pub mod pgm;
pub mod results;
pub mod run;
pub mod synth;
pub mod truth;
