//! Tracking evaluation: centroid error, the signed min/max overlap score,
//! the TSP sigmoid, and the fluctuated-initialization robustness protocol.

use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Normal};

use crate::bbox::BoundingBox;
use crate::error::{Error, Result};

/// Sharpness of the TSP sigmoid. The default solves
/// `sigmoid(0.25 nu) = 0.95`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TspParams {
    pub nu: f64,
}

impl Default for TspParams {
    fn default() -> Self {
        TspParams { nu: 11.8 }
    }
}

/// Initialization jitter for the robustness protocol.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluctuationParams {
    /// Standard deviation of the translation jitter, in pixels. The scale
    /// jitter uses `omega / 25`.
    pub omega: f64,
    pub repeats: usize,
}

/// Euclidean distance between two centroids.
pub fn tracking_error(c_g: (f64, f64), c_t: (f64, f64)) -> f64 {
    libm::hypot(c_g.0 - c_t.0, c_g.1 - c_t.1)
}

/// Signed overlap score `a(R_g, R_t)` in `[-1, 1]`.
///
/// For overlapping boxes this is the ratio of the intersection area to the
/// area of the smallest rectangle covering both. Separated boxes get a
/// negative score; boxes that merely touch score exactly 0.
pub fn overlap_score(r_g: &BoundingBox, r_t: &BoundingBox) -> Result<f64> {
    for bx in [r_g, r_t] {
        if !bx.is_proper() {
            return Err(Error::InvalidBox { l: bx.l, r: bx.r, t: bx.t, b: bx.b });
        }
    }
    let h = [
        (r_t.r - r_g.l) as f64,
        (r_g.r - r_t.l) as f64,
        (r_g.r - r_g.l) as f64,
        (r_t.r - r_t.l) as f64,
    ];
    let v = [
        (r_t.b - r_g.t) as f64,
        (r_g.b - r_t.t) as f64,
        (r_g.b - r_g.t) as f64,
        (r_t.b - r_t.t) as f64,
    ];
    let min_h = h.iter().cloned().fold(f64::INFINITY, f64::min);
    let max_h = h.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min_v = v.iter().cloned().fold(f64::INFINITY, f64::min);
    let max_v = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let separate = r_t.r < r_g.l || r_g.r < r_t.l || r_t.b < r_g.t || r_g.b < r_t.t;
    let s_tg = if separate { -1.0 } else { 1.0 };
    // `+ 0.0` folds a signed zero (touching edges) into plain 0.
    Ok(s_tg * ((min_h * min_v) / (max_h * max_v)).abs() + 0.0)
}

/// Tracking success probability: `sigmoid(nu * a)`.
pub fn tsp(r_g: &BoundingBox, r_t: &BoundingBox, params: &TspParams) -> Result<f64> {
    let a = overlap_score(r_g, r_t)?;
    Ok(sigmoid(params.nu * a))
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + libm::exp(-z))
    } else {
        let e = libm::exp(z);
        e / (1.0 + e)
    }
}

/// Solve `sigmoid(nu * a0) = p0` for `nu`.
pub fn calibrate_nu(a0: f64, p0: f64) -> Result<f64> {
    if !(a0 > 0.0) || !(p0 > 0.0) || !(p0 < 1.0) {
        return Err(Error::InvalidInput("calibrate_nu needs a0 > 0 and p0 in (0, 1)"));
    }
    Ok(libm::log(p0 / (1.0 - p0)) / a0)
}

/// Jitter an initial box: translate left/top edges by `N(0, omega)` draws
/// and rescale width and height by a shared `1 + N(0, omega / 25)` factor,
/// then round and clamp into the `frame_w x frame_h` frame.
pub fn fluctuate_box(
    r: &BoundingBox,
    params: &FluctuationParams,
    frame_w: usize,
    frame_h: usize,
    rng_seed: u64,
) -> Result<BoundingBox> {
    if !(params.omega > 0.0) {
        return Err(Error::InvalidInput("omega must be strictly positive"));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(rng_seed);
    let shift = Normal::new(0.0, params.omega).map_err(|_| Error::InvalidInput("bad omega"))?;
    let scale =
        Normal::new(0.0, params.omega / 25.0).map_err(|_| Error::InvalidInput("bad omega"))?;
    let delta_l = shift.sample(&mut rng);
    let delta_t = shift.sample(&mut rng);
    let delta_s = scale.sample(&mut rng);

    let l = r.l as f64 + delta_l;
    let t = r.t as f64 + delta_t;
    let rr = (1.0 + delta_s) * (r.r - r.l) as f64 + r.l as f64 + delta_l;
    let bb = (1.0 + delta_s) * (r.b - r.t) as f64 + r.t as f64 + delta_t;

    let mut l = libm::round(l) as i32;
    let mut t = libm::round(t) as i32;
    let mut rr = libm::round(rr) as i32;
    let mut bb = libm::round(bb) as i32;
    // Clamp into the frame while keeping at least one pixel of extent.
    l = l.clamp(0, frame_w as i32 - 1);
    t = t.clamp(0, frame_h as i32 - 1);
    rr = rr.clamp(l + 1, frame_w as i32);
    bb = bb.clamp(t + 1, frame_h as i32);
    Ok(BoundingBox::new(l, rr, t, bb))
}

/// Per-frame mean and population standard deviation of TSP values over
/// repeated runs. `per_run[r][k]` is the TSP of repeat `r` at frame `k`.
pub fn tsp_band(per_run: &[Vec<f64>]) -> Result<(Vec<f64>, Vec<f64>)> {
    if per_run.len() < 2 {
        return Err(Error::InvalidInput("tsp_band needs at least two runs"));
    }
    let frames = per_run[0].len();
    if per_run.iter().any(|r| r.len() != frames) {
        return Err(Error::InvalidDimension {
            expected: frames,
            got: per_run.iter().map(|r| r.len()).find(|&l| l != frames).unwrap_or(frames),
        });
    }
    let n = per_run.len() as f64;
    let mut mean = Vec::with_capacity(frames);
    let mut std = Vec::with_capacity(frames);
    for k in 0..frames {
        let m: f64 = per_run.iter().map(|r| r[k]).sum::<f64>() / n;
        let var: f64 = per_run.iter().map(|r| (r[k] - m) * (r[k] - m)).sum::<f64>() / n;
        mean.push(m);
        std.push(libm::sqrt(var));
    }
    Ok((mean, std))
}
