//! Synthetic sequences with exact ground truth: a constant-intensity square
//! target moving over a uniform or static textured background, plus seeded
//! Gaussian pixel noise. A desk-scale stand-in for real surveillance
//! footage.

use anyhow::{bail, Result};
use sparse_track_core::seed::{derive, mix64};
use sparse_track_core::{BoundingBox, Frame};

use crate::pgm::FrameSequence;

pub const TARGET_INTENSITY: f64 = 0.9;
const UNIFORM_BACKGROUND: f64 = 0.35;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BackgroundKind {
    Uniform,
    Texture,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthParams {
    pub width: usize,
    pub height: usize,
    pub frames: usize,
    pub target_size: usize,
    /// Horizontal target speed in pixels per frame; the target bounces off
    /// the frame edges.
    pub speed: f64,
    /// Standard deviation of the additive pixel noise, in intensity units.
    pub noise_std: f64,
    pub background: BackgroundKind,
    pub seed: u64,
}

impl Default for SynthParams {
    fn default() -> Self {
        SynthParams {
            width: 64,
            height: 64,
            frames: 50,
            target_size: 12,
            speed: 1.0,
            noise_std: 5.0 / 255.0,
            background: BackgroundKind::Uniform,
            seed: 1,
        }
    }
}

/// Uniform value in `[0, 1)` from a hashed key; used for the static
/// texture so it never depends on generation order.
fn hash01(seed: u64, a: u64, b: u64) -> f64 {
    mix64(seed ^ mix64(a ^ mix64(b))) as f64 / (u64::MAX as f64 + 1.0)
}

/// Standard normal draw via Box-Muller on hashed uniforms; deterministic
/// per (seed, frame, pixel).
fn hash_normal(seed: u64, frame: u64, pixel: u64) -> f64 {
    let u1 = hash01(seed, frame, 2 * pixel).max(1e-300);
    let u2 = hash01(seed, frame, 2 * pixel + 1);
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Generate the sequence and its exact per-frame ground truth.
pub fn synth_sequence(params: &SynthParams) -> Result<(FrameSequence, Vec<(u64, BoundingBox)>)> {
    if params.frames == 0 {
        bail!("need at least one frame");
    }
    if params.target_size == 0
        || params.target_size >= params.width
        || params.target_size >= params.height
    {
        bail!(
            "target size {} does not fit a {}x{} frame",
            params.target_size,
            params.width,
            params.height
        );
    }

    let w = params.width;
    let h = params.height;
    let ts = params.target_size;
    let bg_seed = derive(params.seed, 0, 7);
    let noise_seed = derive(params.seed, 0, 8);

    let mut background = Frame::filled(h, w, UNIFORM_BACKGROUND);
    if params.background == BackgroundKind::Texture {
        for y in 0..h {
            for x in 0..w {
                background.set(y, x, 0.15 + 0.5 * hash01(bg_seed, x as u64, y as u64));
            }
        }
    }

    // Horizontal sweep with reflection; vertical position fixed.
    let t0 = ((h - ts) / 2) as i32;
    let span = (w - ts) as f64;
    let mut frames = Vec::with_capacity(params.frames);
    let mut truth = Vec::with_capacity(params.frames);
    for k in 0..params.frames {
        let raw = 2.0 + params.speed * k as f64;
        let l = reflect(raw, span.max(1.0)) as i32;
        let bbox = BoundingBox::new(l, l + ts as i32, t0, t0 + ts as i32);

        let mut frame = background.clone();
        for y in bbox.t..bbox.b {
            for x in bbox.l..bbox.r {
                frame.set(y as usize, x as usize, TARGET_INTENSITY);
            }
        }
        if params.noise_std > 0.0 {
            for (i, p) in frame.pixels_mut().iter_mut().enumerate() {
                *p = (*p + params.noise_std * hash_normal(noise_seed, k as u64, i as u64))
                    .clamp(0.0, 1.0);
            }
        }
        frames.push(frame);
        truth.push((k as u64, bbox));
    }
    let indices = (0..params.frames as u64).collect();
    Ok((FrameSequence { frames, indices }, truth))
}

/// Reflect `x` into `[0, span]` (triangle wave).
fn reflect(x: f64, span: f64) -> f64 {
    let period = 2.0 * span;
    let m = x.rem_euclid(period);
    if m <= span {
        m.floor()
    } else {
        (period - m).floor()
    }
}
