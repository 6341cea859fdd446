//! Background model for stationary cameras: a small set of clean background
//! frames. Candidates have their foreground regions patched from donor
//! frames, then a k-medoids pass keeps the most representative ones.
//! Background templates are cropped from the model at a particle's box
//! through the same pipeline as tracked observations.

use alloc::vec::Vec;

use crate::bbox::BoundingBox;
use crate::error::{Error, Result};
use crate::frame::{crop_resample_vectorize, Frame};
use crate::linalg::Mat;
use crate::seed::mix64;

/// The manually located foreground rectangles of one candidate frame.
#[derive(Debug, Clone, PartialEq)]
pub struct ForegroundAnnotation {
    pub frame_index: u64,
    pub boxes: Vec<BoundingBox>,
}

/// A collection of clean background frames, all the same size.
#[derive(Debug, Clone, PartialEq)]
pub struct Csbm {
    backgrounds: Vec<Frame>,
}

impl Csbm {
    pub fn new(backgrounds: Vec<Frame>) -> Result<Self> {
        let Some(first) = backgrounds.first() else {
            return Err(Error::InvalidInput("background model needs at least one frame"));
        };
        let (h, w) = (first.height(), first.width());
        if backgrounds.iter().any(|f| f.height() != h || f.width() != w) {
            return Err(Error::InvalidInput("background frames must share dimensions"));
        }
        Ok(Csbm { backgrounds })
    }

    pub fn n_b(&self) -> usize {
        self.backgrounds.len()
    }

    pub fn frames(&self) -> &[Frame] {
        &self.backgrounds
    }

    pub fn frame_size(&self) -> (usize, usize) {
        (self.backgrounds[0].width(), self.backgrounds[0].height())
    }
}

/// Replace the pixel-inclusive region `[t..=b] x [l..=r]` of `f` with the
/// corresponding pixels of `f_prime`; everything else stays `f`, exactly.
pub fn patch_background(f: &Frame, f_prime: &Frame, region: &BoundingBox) -> Result<Frame> {
    if f.height() != f_prime.height() || f.width() != f_prime.width() {
        return Err(Error::InvalidDimension {
            expected: f.height() * f.width(),
            got: f_prime.height() * f_prime.width(),
        });
    }
    let mut out = f.clone();
    let t = region.t.max(0);
    let b = region.b.min(f.height() as i32 - 1);
    let l = region.l.max(0);
    let r = region.r.min(f.width() as i32 - 1);
    for i in t..=b {
        for j in l..=r {
            out.set(i as usize, j as usize, f_prime.get(i as usize, j as usize));
        }
    }
    Ok(out)
}

/// Per-candidate input to [`build_csbm`].
pub type Candidate = (Frame, ForegroundAnnotation);

/// Build a background model from `candidates`:
///
/// 1. every foreground box of every candidate is patched from the
///    nearest-index candidate whose own foreground does not intersect it
///    (with `allow_impure`, the nearest other frame regardless);
/// 2. k-medoids (k = `n_b`) on thumbnails of at most
///    `downsample x downsample` pixels under L2 distance;
/// 3. the medoid frames are returned at full resolution together with
///    their candidate indices.
pub fn build_csbm(
    candidates: &[Candidate],
    n_b: usize,
    downsample: usize,
    seed: u64,
    allow_impure: bool,
) -> Result<(Csbm, Vec<usize>)> {
    if n_b == 0 {
        return Err(Error::InvalidInput("n_b must be at least one"));
    }
    if candidates.len() < n_b {
        return Err(Error::InvalidInput("need at least n_b candidate frames"));
    }
    if downsample == 0 {
        return Err(Error::InvalidInput("downsample must be at least one"));
    }
    let (h, w) = (candidates[0].0.height(), candidates[0].0.width());
    if candidates.iter().any(|(f, _)| f.height() != h || f.width() != w) {
        return Err(Error::InvalidInput("candidate frames must share dimensions"));
    }

    let mut patched = Vec::with_capacity(candidates.len());
    for (idx, (frame, ann)) in candidates.iter().enumerate() {
        let mut clean = frame.clone();
        for region in &ann.boxes {
            let donor = find_donor(candidates, idx, region, allow_impure)
                .ok_or(Error::UnpatchableRegion { frame_index: ann.frame_index })?;
            clean = patch_background(&clean, &candidates[donor].0, region)?;
        }
        patched.push(clean);
    }

    // Thumbnails for the clustering distance.
    let scale = 1.0f64.min(downsample as f64 / h.max(w) as f64);
    let th = ((h as f64 * scale) as usize).max(1);
    let tw = ((w as f64 * scale) as usize).max(1);
    let thumbs: Vec<Vec<f64>> = patched
        .iter()
        .map(|f| crop_resample_vectorize(f, BoundingBox::new(0, w as i32, 0, h as i32), th, tw))
        .collect::<Result<_>>()?;

    let n = thumbs.len();
    let mut dist = alloc::vec![0.0; n * n];
    for a in 0..n {
        for b in a + 1..n {
            let d = l2(&thumbs[a], &thumbs[b]);
            dist[a * n + b] = d;
            dist[b * n + a] = d;
        }
    }

    let mut medoids = k_medoids(&dist, n, n_b, seed);
    medoids.sort_unstable();
    let frames = medoids.iter().map(|&m| patched[m].clone()).collect();
    Ok((Csbm::new(frames)?, medoids))
}

fn l2(a: &[f64], b: &[f64]) -> f64 {
    libm::sqrt(a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum())
}

/// Nearest candidate (by frame index) whose foreground does not intersect
/// `region`. Ties on index distance prefer the earlier frame.
fn find_donor(
    candidates: &[Candidate],
    target: usize,
    region: &BoundingBox,
    allow_impure: bool,
) -> Option<usize> {
    let target_index = candidates[target].1.frame_index;
    let mut best: Option<(u64, u64, usize)> = None;
    for (i, (_, ann)) in candidates.iter().enumerate() {
        if i == target {
            continue;
        }
        if !allow_impure && ann.boxes.iter().any(|b| b.intersects(region)) {
            continue;
        }
        let gap = ann.frame_index.abs_diff(target_index);
        let key = (gap, ann.frame_index, i);
        if best.map_or(true, |b| (b.0, b.1) > (key.0, key.1)) {
            best = Some(key);
        }
    }
    best.map(|(_, _, i)| i)
}

/// PAM-style k-medoids on a dense `n x n` distance matrix: seeded
/// farthest-point initialization followed by greedy swap passes. The cost
/// is the k-median objective (sum of distances to the nearest medoid).
fn k_medoids(dist: &[f64], n: usize, k: usize, seed: u64) -> Vec<usize> {
    if k >= n {
        return (0..n).collect();
    }
    let d = |a: usize, b: usize| dist[a * n + b];

    let mut medoids = Vec::with_capacity(k);
    medoids.push((mix64(seed) % n as u64) as usize);
    while medoids.len() < k {
        let mut far = None;
        for i in 0..n {
            if medoids.contains(&i) {
                continue;
            }
            let near = medoids.iter().map(|&m| d(i, m)).fold(f64::INFINITY, f64::min);
            if far.map_or(true, |(best, _)| near > best) {
                far = Some((near, i));
            }
        }
        medoids.push(far.expect("k < n leaves a non-medoid point").1);
    }

    let cost = |meds: &[usize]| -> f64 {
        (0..n).map(|i| meds.iter().map(|&m| d(i, m)).fold(f64::INFINITY, f64::min)).sum()
    };

    let mut current = cost(&medoids);
    for _pass in 0..20 {
        let mut best_swap: Option<(f64, usize, usize)> = None;
        for mi in 0..k {
            for o in 0..n {
                if medoids.contains(&o) {
                    continue;
                }
                let saved = medoids[mi];
                medoids[mi] = o;
                let c = cost(&medoids);
                medoids[mi] = saved;
                if c < current - 1e-12 && best_swap.map_or(true, |(bc, _, _)| c < bc) {
                    best_swap = Some((c, mi, o));
                }
            }
        }
        match best_swap {
            Some((c, mi, o)) => {
                medoids[mi] = o;
                current = c;
            }
            None => break,
        }
    }
    medoids
}

/// Crop `region` from a background frame and resample to the template
/// resolution. Same pipeline as observation extraction, so the two are
/// comparable bit for bit.
pub fn crop_vectorize(
    gamma: &Frame,
    region: &BoundingBox,
    resolution: (usize, usize),
) -> Result<Vec<f64>> {
    crop_resample_vectorize(gamma, *region, resolution.0, resolution.1)
}

/// `d0 x N_b` matrix whose column `i` is the crop of background `i` at
/// `region`.
pub fn background_templates(
    csbm: &Csbm,
    region: &BoundingBox,
    resolution: (usize, usize),
) -> Result<Mat> {
    let cols: Vec<Vec<f64>> = csbm
        .frames()
        .iter()
        .map(|g| crop_vectorize(g, region, resolution))
        .collect::<Result<_>>()?;
    Mat::from_columns(&cols)
}
