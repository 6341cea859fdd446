use core::fmt;

use crate::particle::ParticleState;

/// Errors surfaced by the tracking library.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An input vector or matrix contained NaN or infinite entries, or a
    /// scalar parameter was outside its documented range.
    InvalidInput(&'static str),
    /// Shapes do not line up for the requested operation.
    InvalidDimension { expected: usize, got: usize },
    /// A matrix column had (numerically) zero norm and cannot be normalized.
    DegenerateColumn { index: usize },
    /// A least-squares basis column is linearly dependent on the others.
    RankDeficient { column: usize },
    /// A bounding box does not intersect the frame at all.
    ZeroOverlap,
    /// A bounding box is empty or inverted where a proper rectangle is required.
    InvalidBox { l: i32, r: i32, t: i32, b: i32 },
    /// A box lies (partly) outside the frame where containment is required.
    BoxOutsideFrame,
    /// Every likelihood was zero, so no posterior point estimate exists.
    EstimatorDegenerate,
    /// The coefficient vector has zero l1 mass; the SCI ratio is undefined.
    UndefinedSci,
    /// No clean donor frame exists to patch a foreground region.
    UnpatchableRegion { frame_index: u64 },
    /// Every particle fell completely outside the frame; the target is lost.
    /// Carries the last state that produced a valid observation.
    TrackingLost { last: ParticleState },
    /// The tracker was configured for a background model but none was given.
    MissingBackgroundModel,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidInput(what) => write!(f, "invalid input: {what}"),
            Error::InvalidDimension { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
            Error::DegenerateColumn { index } => {
                write!(f, "column {index} has zero norm")
            }
            Error::RankDeficient { column } => {
                write!(f, "basis column {column} is linearly dependent")
            }
            Error::ZeroOverlap => write!(f, "box has no overlap with the frame"),
            Error::InvalidBox { l, r, t, b } => {
                write!(f, "invalid box [l={l}, r={r}, t={t}, b={b}]")
            }
            Error::BoxOutsideFrame => write!(f, "box lies outside the frame"),
            Error::EstimatorDegenerate => write!(f, "all likelihoods are zero"),
            Error::UndefinedSci => write!(f, "coefficients have zero l1 mass"),
            Error::UnpatchableRegion { frame_index } => {
                write!(f, "no clean donor frame for foreground in frame {frame_index}")
            }
            Error::TrackingLost { .. } => write!(f, "all particles left the frame"),
            Error::MissingBackgroundModel => {
                write!(f, "rtcst-b mode requires a background model")
            }
        }
    }
}

pub type Result<T> = core::result::Result<T, Error>;
