//! Sparse-representation visual tracking.
//!
//! The crate implements two particle-filter trackers built on greedy sparse
//! recovery. Observations are cropped at each particle's box, projected to
//! a low-dimensional feature space by a seeded random Gaussian or hash
//! matrix, and coded against a dictionary of target templates by orthogonal
//! matching pursuit with a residual early stop. The reconstruction residual
//! against the target templates drives an exponential likelihood; the
//! posterior is summarized by an MSE (or MAP) estimate; and templates are
//! replaced only when the sparsity concentration of the code drops below a
//! threshold.
//!
//! The plain tracker pads the dictionary with `[I, -I]` identity blocks.
//! The background-model variant crops location-specific background
//! templates from a small set of clean frames instead, which keeps codes
//! sparser and tracking more robust on stationary cameras.
//!
//! Evaluation lives in [`eval`]: centroid tracking error, the signed
//! overlap score, the TSP sigmoid and the fluctuated-initialization
//! robustness protocol.
//!
//! The crate is `no_std` (with `alloc`); all I/O, file formats and the CLI
//! live in the companion `sparse-track` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod background;
pub mod bbox;
pub mod error;
pub mod eval;
pub mod frame;
pub mod linalg;
pub mod particle;
pub mod projection;
pub mod seed;
pub mod sparse;
pub mod tracker;

pub use bbox::BoundingBox;
pub use error::{Error, Result};
pub use frame::Frame;
pub use particle::{ParticleEnsemble, ParticleState, TransitionParams};
pub use projection::{ProjectionKind, ProjectionMatrix};
pub use sparse::{Dictionary, SelectionMode, SparseSolution};
pub use tracker::{Estimator, TrackerConfig, TrackerMode, TrackerState};
