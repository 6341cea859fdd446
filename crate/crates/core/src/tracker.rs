//! The tracking loop: per-particle observation extraction, projection,
//! sparse coding and likelihood, posterior estimation, resampling, and the
//! concentration-gated template update.
//!
//! Two variants share the loop. `Rtcst` codes observations against the
//! projected target templates plus a `[I, -I]` pair of identity blocks in
//! the reduced space, selecting columns by signed correlation so the
//! recovered coefficients stay approximately nonnegative. `RtcstB` swaps
//! the identity blocks for background templates cropped from a background
//! model at each particle's box and selects by absolute correlation.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::background::{background_templates, Csbm};
use crate::bbox::BoundingBox;
use crate::error::{Error, Result};
use crate::frame::{crop_resample_vectorize, Frame};
use crate::linalg::{norm1, norm2, Mat};
use crate::particle::{
    estimate_map, estimate_mse, propagate, resample, ParticleEnsemble, ParticleState,
    TransitionParams,
};
use crate::projection::{
    make_hash, make_random_gaussian, normalize_columns, ProjectionKind, ProjectionMatrix,
};
use crate::seed::derive;
use crate::sparse::{omp_solve, Dictionary, SelectionMode, SparseSolution};

/// Template crops never exceed this many pixels; larger initial boxes are
/// downsampled with the aspect ratio preserved.
pub const MAX_TEMPLATE_PIXELS: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrackerMode {
    Rtcst,
    RtcstB,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Estimator {
    Mse,
    Map,
}

/// All tunables of a tracking run.
#[derive(Debug, Clone, PartialEq)]
pub struct TrackerConfig {
    pub mode: TrackerMode,
    /// Reduced feature dimension `d`.
    pub reduced_dim: usize,
    /// Number of target templates `N_t`.
    pub num_templates: usize,
    /// Number of particles `N_s`.
    pub num_particles: usize,
    /// Residual stopping threshold of the pursuit.
    pub epsilon: f64,
    /// Sparsity cap; `None` picks the mode default (`d/2` for RTCST, 15
    /// for RTCST-B).
    pub eta: Option<usize>,
    /// Likelihood sharpness in `exp(-lambda * residual)`.
    pub lambda: f64,
    /// Concentration threshold gating template replacement.
    pub tau: f64,
    pub projection: ProjectionKind,
    pub projection_seed: u64,
    /// Number of hash seeds `S` (hash projection only).
    pub num_hash_seeds: u32,
    pub transition: TransitionParams,
    pub estimator: Estimator,
    /// Master seed; every stream used by the run derives from it.
    pub seed: u64,
}

impl Default for TrackerConfig {
    fn default() -> Self {
        TrackerConfig {
            mode: TrackerMode::Rtcst,
            reduced_dim: 50,
            num_templates: 100,
            num_particles: 100,
            epsilon: 0.01,
            eta: None,
            lambda: 20.0,
            tau: 0.7,
            projection: ProjectionKind::Hash,
            projection_seed: 0,
            num_hash_seeds: 1,
            transition: TransitionParams::default(),
            estimator: Estimator::Mse,
            seed: 1,
        }
    }
}

impl TrackerConfig {
    /// Effective sparsity cap.
    pub fn eta(&self) -> usize {
        match self.eta {
            Some(e) => e,
            None => match self.mode {
                TrackerMode::Rtcst => (self.reduced_dim / 2).max(1),
                TrackerMode::RtcstB => 15,
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.reduced_dim == 0 || self.num_templates == 0 || self.num_particles == 0 {
            return Err(Error::InvalidInput("d, N_t and N_s must all be positive"));
        }
        if !(self.epsilon > 0.0) || !self.epsilon.is_finite() {
            return Err(Error::InvalidInput("epsilon must be a positive real"));
        }
        if self.eta == Some(0) {
            return Err(Error::InvalidInput("eta must be positive"));
        }
        if !(self.lambda > 0.0) || !self.tau.is_finite() {
            return Err(Error::InvalidInput("lambda must be positive and tau finite"));
        }
        self.transition.validate()
    }
}

/// Target templates in raw pixel space together with their projected,
/// column-normalized images.
#[derive(Debug, Clone, PartialEq)]
pub struct TemplateSet {
    resolution: (usize, usize),
    templates: Mat,
    projected: Mat,
    scales: Vec<f64>,
}

impl TemplateSet {
    fn new(resolution: (usize, usize), templates: Mat, phi: &ProjectionMatrix) -> Result<Self> {
        let cols: Vec<Vec<f64>> =
            (0..templates.cols()).map(|j| phi.project(templates.col(j))).collect::<Result<_>>()?;
        let (projected, scales) = normalize_columns(&Mat::from_columns(&cols)?)?;
        Ok(TemplateSet { resolution, templates, projected, scales })
    }

    /// Template resolution `(h_t, w_t)`; `h_t * w_t = d0`.
    pub fn resolution(&self) -> (usize, usize) {
        self.resolution
    }

    pub fn num_templates(&self) -> usize {
        self.templates.cols()
    }

    pub fn d0(&self) -> usize {
        self.resolution.0 * self.resolution.1
    }

    /// Raw `d0 x N_t` template matrix, intensities in `[0, 1]`.
    pub fn templates(&self) -> &Mat {
        &self.templates
    }

    /// Projected `d x N_t` matrix with unit columns.
    pub fn projected(&self) -> &Mat {
        &self.projected
    }

    /// Norms removed when the projected columns were normalized.
    pub fn scales(&self) -> &[f64] {
        &self.scales
    }
}

/// Observation likelihood `exp(-lambda * residual)`.
pub fn likelihood(residual: f64, lambda: f64) -> f64 {
    libm::exp(-lambda * residual)
}

/// Reconstruction residual against the target templates only:
/// `||phi_y - projected * x_t||_2`.
pub fn residual_target(phi_y: &[f64], projected: &Mat, x_t: &[f64]) -> Result<f64> {
    let fit = projected.mul_vec(x_t)?;
    if fit.len() != phi_y.len() {
        return Err(Error::InvalidDimension { expected: fit.len(), got: phi_y.len() });
    }
    let diff: Vec<f64> = phi_y.iter().zip(&fit).map(|(a, b)| a - b).collect();
    Ok(norm2(&diff))
}

/// Sparsity concentration of the target block: `||x_t||_1 / ||x||_1` with
/// `x_t` the first `n_t` coefficients.
pub fn sci_target(x: &[f64], n_t: usize) -> Result<f64> {
    if n_t > x.len() {
        return Err(Error::InvalidDimension { expected: x.len(), got: n_t });
    }
    let total = norm1(x);
    if total == 0.0 {
        return Err(Error::UndefinedSci);
    }
    Ok(norm1(&x[..n_t]) / total)
}

/// Two-class concentration: `max(||x_t||_1, ||x_b||_1) / ||x||_1` where the
/// coefficients partition into `n_t` target and `n_b` background entries.
/// Always at least 0.5.
pub fn sci_tb(x: &[f64], n_t: usize, n_b: usize) -> Result<f64> {
    if x.len() != n_t + n_b {
        return Err(Error::InvalidDimension { expected: n_t + n_b, got: x.len() });
    }
    let target = norm1(&x[..n_t]);
    let noise = norm1(&x[n_t..]);
    let total = target + noise;
    if total == 0.0 {
        return Err(Error::UndefinedSci);
    }
    Ok(target.max(noise) / total)
}

/// Replace the least-used target template with the current observation when
/// the concentration falls below `tau`. Returns whether a column changed.
///
/// The least-used template is the argmin of the (signed) target
/// coefficients, ties resolved to the lowest index. The replaced column is
/// re-projected and re-normalized so the set's invariant holds.
pub fn update_templates(
    ts: &mut TemplateSet,
    phi: &ProjectionMatrix,
    x_target: &[f64],
    y_raw: &[f64],
    sci_value: f64,
    tau: f64,
) -> Result<bool> {
    if sci_value >= tau {
        return Ok(false);
    }
    if x_target.len() != ts.num_templates() {
        return Err(Error::InvalidDimension { expected: ts.num_templates(), got: x_target.len() });
    }
    if y_raw.len() != ts.d0() {
        return Err(Error::InvalidDimension { expected: ts.d0(), got: y_raw.len() });
    }
    let mut j_star = 0;
    for (j, &c) in x_target.iter().enumerate() {
        if c < x_target[j_star] {
            j_star = j;
        }
    }
    let p = phi.project(y_raw)?;
    let n = norm2(&p);
    if n <= 1e-12 {
        // A observation that projects to zero cannot form a unit column;
        // keep the old template.
        return Ok(false);
    }
    ts.templates.col_mut(j_star).copy_from_slice(y_raw);
    for (dst, src) in ts.projected.col_mut(j_star).iter_mut().zip(&p) {
        *dst = src / n;
    }
    ts.scales[j_star] = n;
    Ok(true)
}

/// Per-frame diagnostics: one entry per particle plus the refit summary.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameDiagnostics {
    /// Target residual per particle; infinite for particles whose box left
    /// the frame.
    pub residuals: Vec<f64>,
    /// Pursuit steps per particle.
    pub iterations: Vec<usize>,
    /// Nonzero coefficients per particle.
    pub nonzeros: Vec<usize>,
    /// Mean residual over valid particles.
    pub mean_residual: f64,
    /// Mean pursuit steps over valid particles.
    pub mean_iterations: f64,
    /// Nonzeros of the coefficient vector refit at the estimated state.
    pub sparsity: usize,
    /// Concentration index of the refit coefficients, when defined.
    pub sci: Option<f64>,
    pub template_updated: bool,
}

/// Output of one tracked frame.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameOutput {
    pub state: ParticleState,
    pub bbox: BoundingBox,
    pub diagnostics: FrameDiagnostics,
}

/// Everything a running tracker owns.
#[derive(Debug, Clone)]
pub struct TrackerState {
    config: TrackerConfig,
    projection: ProjectionMatrix,
    templates: TemplateSet,
    ensemble: ParticleEnsemble,
    current: ParticleState,
    base_size: (i32, i32),
    frame_size: (usize, usize),
    csbm: Option<Csbm>,
    frames_tracked: u64,
}

/// Set up a tracker on the first frame. The template resolution comes from
/// `box0` (downsampled so the crop has at most [`MAX_TEMPLATE_PIXELS`]
/// pixels); the initial templates are seeded perturbations of the initial
/// box, except template 0 which is always the exact crop.
pub fn init_tracker(
    frame0: &Frame,
    box0: &BoundingBox,
    config: TrackerConfig,
    csbm: Option<Csbm>,
) -> Result<TrackerState> {
    config.validate()?;
    if !box0.is_proper() {
        return Err(Error::InvalidBox { l: box0.l, r: box0.r, t: box0.t, b: box0.b });
    }
    if !box0.contained_in(frame0.width(), frame0.height()) {
        return Err(Error::BoxOutsideFrame);
    }
    if config.mode == TrackerMode::RtcstB {
        match &csbm {
            None => return Err(Error::MissingBackgroundModel),
            Some(model) => {
                if model.frame_size() != (frame0.width(), frame0.height()) {
                    return Err(Error::InvalidInput(
                        "background frames do not match the video dimensions",
                    ));
                }
            }
        }
    }

    let w0 = box0.width();
    let h0 = box0.height();
    let resolution = template_resolution(h0 as usize, w0 as usize);
    let d0 = resolution.0 * resolution.1;

    let phi = match config.projection {
        ProjectionKind::RandomGaussian => {
            make_random_gaussian(config.reduced_dim, d0, config.projection_seed)?
        }
        ProjectionKind::Hash => {
            make_hash(config.reduced_dim, d0, config.num_hash_seeds, config.projection_seed)?
        }
    };

    let exact = crop_resample_vectorize(frame0, *box0, resolution.0, resolution.1)?;
    let (cx0, cy0) = box0.center();
    let mut rng = ChaCha12Rng::seed_from_u64(derive(config.seed, 0, 0));
    let mut columns = Vec::with_capacity(config.num_templates);
    columns.push(exact.clone());
    for _ in 1..config.num_templates {
        let dx = rng.random_range(-2i32..=2);
        let dy = rng.random_range(-2i32..=2);
        let s = rng.random_range(0.95..=1.05);
        let w = (libm::round(w0 as f64 * s) as i32).max(2);
        let h = (libm::round(h0 as f64 * s) as i32).max(2);
        let l = libm::round(cx0 + dx as f64 - w as f64 / 2.0) as i32;
        let t = libm::round(cy0 + dy as f64 - h as f64 / 2.0) as i32;
        let perturbed = BoundingBox::new(l, l + w, t, t + h);
        let crop = crop_resample_vectorize(frame0, perturbed, resolution.0, resolution.1)
            .unwrap_or_else(|_| exact.clone());
        columns.push(crop);
    }
    let templates = TemplateSet::new(resolution, Mat::from_columns(&columns)?, &phi)?;

    let start = ParticleState { cx: cx0, cy: cy0, scale: 1.0 };
    let ensemble = ParticleEnsemble::from_point(start, config.num_particles)?;

    Ok(TrackerState {
        config,
        projection: phi,
        templates,
        ensemble,
        current: start,
        base_size: (w0, h0),
        frame_size: (frame0.width(), frame0.height()),
        csbm,
        frames_tracked: 0,
    })
}

fn template_resolution(h0: usize, w0: usize) -> (usize, usize) {
    if h0 * w0 <= MAX_TEMPLATE_PIXELS {
        return (h0, w0);
    }
    let f = libm::sqrt(MAX_TEMPLATE_PIXELS as f64 / (h0 * w0) as f64);
    let h = ((h0 as f64 * f) as usize).max(1);
    let w = ((w0 as f64 * f) as usize).max(1);
    (h, w)
}

/// Outcome of coding one particle's observation.
struct ParticleEval {
    residual: f64,
    solution: SparseSolution,
}

impl TrackerState {
    pub fn config(&self) -> &TrackerConfig {
        &self.config
    }

    pub fn templates(&self) -> &TemplateSet {
        &self.templates
    }

    pub fn projection(&self) -> &ProjectionMatrix {
        &self.projection
    }

    pub fn ensemble(&self) -> &ParticleEnsemble {
        &self.ensemble
    }

    pub fn current_state(&self) -> ParticleState {
        self.current
    }

    pub fn current_box(&self) -> BoundingBox {
        self.state_to_box(&self.current)
    }

    pub fn frames_tracked(&self) -> u64 {
        self.frames_tracked
    }

    /// Box of a particle state: the base box scaled about its center, at
    /// least 2 px on each side.
    pub fn state_to_box(&self, s: &ParticleState) -> BoundingBox {
        let w = (libm::round(self.base_size.0 as f64 * s.scale) as i32).max(2);
        let h = (libm::round(self.base_size.1 as f64 * s.scale) as i32).max(2);
        let l = libm::round(s.cx - w as f64 / 2.0) as i32;
        let t = libm::round(s.cy - h as f64 / 2.0) as i32;
        BoundingBox::new(l, l + w, t, t + h)
    }

    /// Crop the particle's box and resample to the template resolution.
    pub fn extract_observation(&self, frame: &Frame, s: &ParticleState) -> Result<Vec<f64>> {
        let (h_t, w_t) = self.templates.resolution();
        crop_resample_vectorize(frame, self.state_to_box(s), h_t, w_t)
    }

    /// Advance the tracker by one frame: propagate, code every particle,
    /// estimate the state, resample, refit at the estimate and maybe swap
    /// one template.
    pub fn track_frame(&mut self, frame: &Frame) -> Result<FrameOutput> {
        if (frame.width(), frame.height()) != self.frame_size {
            return Err(Error::InvalidDimension {
                expected: self.frame_size.0 * self.frame_size.1,
                got: frame.width() * frame.height(),
            });
        }
        let step = self.frames_tracked + 1;
        let propagated =
            propagate(&self.ensemble, &self.config.transition, derive(self.config.seed, step, 1))?;

        let shared = self.shared_template_columns();
        let mut bg_cache: BgCache = BTreeMap::new();

        let n = propagated.len();
        let mut likelihoods = vec![0.0; n];
        let mut residuals = vec![f64::INFINITY; n];
        let mut iterations = vec![0usize; n];
        let mut nonzeros = vec![0usize; n];
        let mut any_valid = false;

        for (i, p) in propagated.particles().iter().enumerate() {
            match self.evaluate_particle(frame, p, &shared, &mut bg_cache)? {
                Some(eval) => {
                    likelihoods[i] = likelihood(eval.residual, self.config.lambda);
                    residuals[i] = eval.residual;
                    iterations[i] = eval.solution.iterations;
                    nonzeros[i] = eval.solution.nonzeros();
                    any_valid = true;
                }
                None => {
                    // Box left the frame entirely: zero likelihood.
                }
            }
        }
        if !any_valid {
            return Err(Error::TrackingLost { last: self.current });
        }

        let estimate = match self.config.estimator {
            Estimator::Mse => estimate_mse(&propagated, &likelihoods),
            Estimator::Map => estimate_map(&propagated, &likelihoods),
        }
        // A fully degenerate estimate falls back to the previous state.
        .unwrap_or(self.current);

        let mut weighted = propagated;
        weighted.set_weights(likelihoods.clone())?;
        let (resampled, _) = resample(&weighted, derive(self.config.seed, step, 2));
        self.ensemble = resampled;

        let (sci, template_updated, sparsity) =
            self.refit_and_update(frame, &estimate, &shared, &mut bg_cache)?;

        let valid: Vec<usize> = (0..n).filter(|&i| residuals[i].is_finite()).collect();
        let mean_residual =
            valid.iter().map(|&i| residuals[i]).sum::<f64>() / valid.len() as f64;
        let mean_iterations =
            valid.iter().map(|&i| iterations[i] as f64).sum::<f64>() / valid.len() as f64;

        self.current = estimate;
        self.frames_tracked = step;

        Ok(FrameOutput {
            state: estimate,
            bbox: self.state_to_box(&estimate),
            diagnostics: FrameDiagnostics {
                residuals,
                iterations,
                nonzeros,
                mean_residual,
                mean_iterations,
                sparsity,
                sci,
                template_updated,
            },
        })
    }

    /// Owned copies of the projected template columns, shared by every
    /// particle of the frame.
    fn shared_template_columns(&self) -> Vec<Vec<f64>> {
        let m = self.templates.projected();
        (0..m.cols()).map(|j| m.col(j).to_vec()).collect()
    }

    /// Code one particle's observation. `Ok(None)` means the particle box
    /// had no frame overlap (or an empty crop) and gets zero likelihood.
    fn evaluate_particle(
        &self,
        frame: &Frame,
        p: &ParticleState,
        shared: &[Vec<f64>],
        bg_cache: &mut BgCache,
    ) -> Result<Option<ParticleEval>> {
        let y_raw = match self.extract_observation(frame, p) {
            Ok(v) => v,
            Err(Error::ZeroOverlap) => return Ok(None),
            Err(e) => return Err(e),
        };
        let Some(phi_y) = self.project_normalized(&y_raw)? else {
            return Ok(None);
        };
        let Some(solution) = self.code_observation(&phi_y, &self.state_to_box(p), shared, bg_cache)?
        else {
            return Ok(None);
        };
        let n_t = self.templates.num_templates();
        let residual =
            residual_target(&phi_y, self.templates.projected(), &solution.coefficients[..n_t])?;
        Ok(Some(ParticleEval { residual, solution }))
    }

    fn project_normalized(&self, y_raw: &[f64]) -> Result<Option<Vec<f64>>> {
        let mut phi_y = self.projection.project(y_raw)?;
        let n = norm2(&phi_y);
        if n <= 1e-12 {
            return Ok(None);
        }
        for v in phi_y.iter_mut() {
            *v /= n;
        }
        Ok(Some(phi_y))
    }

    /// Assemble the mode's dictionary at `bbox` and run the pursuit.
    /// `Ok(None)` when a background crop degenerates to a zero column.
    fn code_observation(
        &self,
        phi_y: &[f64],
        bbox: &BoundingBox,
        shared: &[Vec<f64>],
        bg_cache: &mut BgCache,
    ) -> Result<Option<SparseSolution>> {
        let d = self.config.reduced_dim;
        let scales = self.templates.scales();
        let (dict, mode) = match self.config.mode {
            TrackerMode::Rtcst => {
                let mut cols = Vec::with_capacity(shared.len() + 2 * d);
                cols.extend_from_slice(shared);
                for sign in [1.0, -1.0] {
                    for i in 0..d {
                        let mut e = vec![0.0; d];
                        e[i] = sign;
                        cols.push(e);
                    }
                }
                let mut norms = scales.to_vec();
                norms.extend(core::iter::repeat(1.0).take(2 * d));
                (
                    Dictionary::from_normalized(Mat::from_columns(&cols)?, norms)?,
                    SelectionMode::Signed,
                )
            }
            TrackerMode::RtcstB => {
                let key = (bbox.l, bbox.r, bbox.t, bbox.b);
                if !bg_cache.contains_key(&key) {
                    bg_cache.insert(key, self.background_block(bbox)?);
                }
                let Some((bg_cols, bg_scales)) = bg_cache.get(&key).unwrap() else {
                    return Ok(None);
                };
                let mut cols = Vec::with_capacity(shared.len() + bg_cols.len());
                cols.extend_from_slice(shared);
                cols.extend_from_slice(bg_cols);
                let mut norms = scales.to_vec();
                norms.extend_from_slice(bg_scales);
                (
                    Dictionary::from_normalized(Mat::from_columns(&cols)?, norms)?,
                    SelectionMode::Absolute,
                )
            }
        };
        let solution =
            omp_solve(&dict, phi_y, self.config.epsilon, self.config.eta(), mode)?;
        Ok(Some(solution))
    }

    /// Projected, normalized background templates for one box, or `None`
    /// when some crop is constant zero.
    fn background_block(&self, bbox: &BoundingBox) -> Result<Option<(Vec<Vec<f64>>, Vec<f64>)>> {
        let csbm = self.csbm.as_ref().ok_or(Error::MissingBackgroundModel)?;
        let raw = match background_templates(csbm, bbox, self.templates.resolution()) {
            Ok(m) => m,
            Err(Error::ZeroOverlap) => return Ok(None),
            Err(e) => return Err(e),
        };
        let cols: Vec<Vec<f64>> =
            (0..raw.cols()).map(|j| self.projection.project(raw.col(j))).collect::<Result<_>>()?;
        match normalize_columns(&Mat::from_columns(&cols)?) {
            Ok((m, scales)) => {
                Ok(Some(((0..m.cols()).map(|j| m.col(j).to_vec()).collect(), scales)))
            }
            Err(Error::DegenerateColumn { .. }) => Ok(None),
            Err(e) => Err(e),
        }
    }

    /// Recompute the sparse code at the estimated state and run the gated
    /// template update. Returns `(sci, updated, sparsity)`.
    fn refit_and_update(
        &mut self,
        frame: &Frame,
        estimate: &ParticleState,
        shared: &[Vec<f64>],
        bg_cache: &mut BgCache,
    ) -> Result<(Option<f64>, bool, usize)> {
        let y_raw = match self.extract_observation(frame, estimate) {
            Ok(v) => v,
            Err(Error::ZeroOverlap) => return Ok((None, false, 0)),
            Err(e) => return Err(e),
        };
        let Some(phi_y) = self.project_normalized(&y_raw)? else {
            return Ok((None, false, 0));
        };
        let bbox = self.state_to_box(estimate);
        let Some(solution) = self.code_observation(&phi_y, &bbox, shared, bg_cache)? else {
            return Ok((None, false, 0));
        };
        let n_t = self.templates.num_templates();
        let sci = match self.config.mode {
            TrackerMode::Rtcst => sci_target(&solution.coefficients, n_t),
            TrackerMode::RtcstB => {
                let n_b = solution.coefficients.len() - n_t;
                sci_tb(&solution.coefficients, n_t, n_b)
            }
        };
        let sparsity = solution.nonzeros();
        match sci {
            Ok(value) => {
                let updated = update_templates(
                    &mut self.templates,
                    &self.projection,
                    &solution.coefficients[..n_t],
                    &y_raw,
                    value,
                    self.config.tau,
                )?;
                Ok((Some(value), updated, sparsity))
            }
            Err(Error::UndefinedSci) => Ok((None, false, sparsity)),
            Err(e) => Err(e),
        }
    }
}

type BgCache = BTreeMap<(i32, i32, i32, i32), Option<(Vec<Vec<f64>>, Vec<f64>)>>;

#[cfg(test)]
mod tests {
    use super::*;

    fn textured_frame(h: usize, w: usize) -> Frame {
        let mut f = Frame::filled(h, w, 0.0);
        for y in 0..h {
            for x in 0..w {
                let v = 0.3
                    + 0.2 * libm::sin(0.7 * x as f64)
                    + 0.2 * libm::cos(0.53 * y as f64 + 0.3 * x as f64);
                f.set(y, x, v.clamp(0.0, 1.0));
            }
        }
        f
    }

    fn small_config() -> TrackerConfig {
        TrackerConfig {
            reduced_dim: 20,
            num_templates: 5,
            num_particles: 10,
            ..TrackerConfig::default()
        }
    }

    #[test]
    fn likelihood_fixed_points() {
        assert_eq!(likelihood(0.0, 20.0), 1.0);
        assert!((likelihood(0.1, 20.0) - 0.1353).abs() < 5e-4);
        assert!(likelihood(0.2, 20.0) < likelihood(0.1, 20.0));
        for r in [0.0, 0.3, 1.5] {
            let l = likelihood(r, 20.0);
            assert!(l > 0.0 && l <= 1.0);
        }
    }

    #[test]
    fn residual_target_cases() {
        let projected =
            Mat::from_col_major(2, 2, vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        // Zero coefficients leave the unit observation untouched.
        let y = vec![0.6, 0.8];
        assert!((residual_target(&y, &projected, &[0.0, 0.0]).unwrap() - 1.0).abs() < 1e-12);
        // Exactly one template column.
        assert!(residual_target(&[1.0, 0.0], &projected, &[1.0, 0.0]).unwrap() < 1e-12);
        // Independent norm evaluation on a seeded instance.
        let m = Mat::from_col_major(3, 2, vec![0.5, 0.1, -0.3, 0.2, 0.9, 0.4]).unwrap();
        let y = vec![0.3, -0.6, 0.2];
        let x = vec![0.7, -0.2];
        let mut direct = 0.0;
        for i in 0..3 {
            let fit = m.get(i, 0) * x[0] + m.get(i, 1) * x[1];
            direct += (y[i] - fit) * (y[i] - fit);
        }
        let direct = libm::sqrt(direct);
        assert!((residual_target(&y, &m, &x).unwrap() - direct).abs() < 1e-10);
    }

    #[test]
    fn sci_target_cases() {
        assert_eq!(sci_target(&[0.4, 0.6, 0.0, 0.0], 2).unwrap(), 1.0);
        assert_eq!(sci_target(&[0.0, 0.0, 0.3, 0.2], 2).unwrap(), 0.0);
        assert!((sci_target(&[0.3, 0.0, 0.5, 0.2], 1).unwrap() - 0.3).abs() < 1e-12);
        assert_eq!(sci_target(&[0.0; 4], 2), Err(Error::UndefinedSci));
    }

    #[test]
    fn sci_tb_cases() {
        assert_eq!(sci_tb(&[0.0, 0.0, 0.4, 0.6], 2, 2).unwrap(), 1.0);
        assert_eq!(sci_tb(&[0.5, 0.0, 0.5, 0.0], 2, 2).unwrap(), 0.5);
        assert!((sci_tb(&[0.7, 0.0, 0.3, 0.0], 2, 2).unwrap() - 0.7).abs() < 1e-12);
        // Never below one half for any partition.
        for split in [[0.1, 0.9], [0.45, 0.55], [0.8, 0.2]] {
            let v = sci_tb(&[split[0], split[1]], 1, 1).unwrap();
            assert!(v >= 0.5);
        }
    }

    #[test]
    fn template_update_branches() {
        let frame = textured_frame(40, 40);
        let b = BoundingBox::new(10, 22, 8, 20);
        let state = init_tracker(&frame, &b, small_config(), None).unwrap();
        let mut ts = state.templates().clone();
        let phi = state.projection();
        let y: Vec<f64> = (0..ts.d0()).map(|i| (i % 7) as f64 / 7.0).collect();

        // Above threshold: untouched.
        let before = ts.clone();
        let x = vec![0.5, 0.0, 0.2, 0.1, 0.3];
        assert!(!update_templates(&mut ts, phi, &x, &y, 0.9, 0.7).unwrap());
        assert_eq!(ts, before);

        // Below threshold: the argmin coefficient (index 1) is replaced.
        assert!(update_templates(&mut ts, phi, &x, &y, 0.3, 0.7).unwrap());
        assert_eq!(ts.templates().col(1), &y[..]);
        assert!((norm2(ts.projected().col(1)) - 1.0).abs() < 1e-10);
        for j in [0usize, 2, 3, 4] {
            assert_eq!(ts.templates().col(j), before.templates().col(j));
        }
    }

    #[test]
    fn init_rejects_bad_boxes() {
        let frame = textured_frame(30, 30);
        let wide = BoundingBox::new(-2, 40, 5, 20);
        assert!(matches!(
            init_tracker(&frame, &wide, small_config(), None),
            Err(Error::BoxOutsideFrame)
        ));
        let inverted = BoundingBox::new(20, 10, 5, 15);
        assert!(matches!(
            init_tracker(&frame, &inverted, small_config(), None),
            Err(Error::InvalidBox { .. })
        ));
    }

    #[test]
    fn init_accepts_table_style_box() {
        // The published cubicle initialization, [l r t b] = [56 90 24 67].
        let frame = textured_frame(120, 160);
        let b = BoundingBox::new(56, 90, 24, 67);
        let state = init_tracker(&frame, &b, small_config(), None).unwrap();
        assert_eq!(state.current_box(), b);
        assert_eq!(state.templates().num_templates(), 5);
    }

    #[test]
    fn init_single_template_is_exact_crop() {
        let frame = textured_frame(40, 40);
        let b = BoundingBox::new(5, 17, 6, 18);
        let cfg = TrackerConfig { num_templates: 1, ..small_config() };
        let state = init_tracker(&frame, &b, cfg, None).unwrap();
        let crop = crop_resample_vectorize(&frame, b, 12, 12).unwrap();
        assert_eq!(state.templates().templates().col(0), &crop[..]);
    }

    #[test]
    fn init_requires_background_model_in_b_mode() {
        let frame = textured_frame(40, 40);
        let b = BoundingBox::new(5, 17, 6, 18);
        let cfg = TrackerConfig { mode: TrackerMode::RtcstB, ..small_config() };
        assert!(matches!(
            init_tracker(&frame, &b, cfg, None),
            Err(Error::MissingBackgroundModel)
        ));
    }

    #[test]
    fn large_boxes_get_downsampled_templates() {
        let (h, w) = template_resolution(100, 60);
        assert!(h * w <= MAX_TEMPLATE_PIXELS);
        // Aspect preserved within integer truncation.
        let ratio = 100.0 / 60.0;
        assert!((h as f64 / w as f64 - ratio).abs() < 0.15);
        assert_eq!(template_resolution(20, 30), (20, 30));
    }

    #[test]
    fn stationary_frame_is_a_fixed_point() {
        let frame = textured_frame(48, 48);
        let b = BoundingBox::new(14, 26, 17, 29);
        let cfg = TrackerConfig {
            transition: TransitionParams { sigma_xy: 1e-12, sigma_scale: 1e-12 },
            ..small_config()
        };
        let mut state = init_tracker(&frame, &b, cfg, None).unwrap();
        for _ in 0..3 {
            let out = state.track_frame(&frame).unwrap();
            assert_eq!(out.bbox, b);
        }
    }

    #[test]
    fn template_count_stays_constant_and_at_most_one_changes() {
        let frame0 = textured_frame(48, 48);
        let b = BoundingBox::new(10, 24, 10, 24);
        // A hostile tau forces frequent updates.
        let cfg = TrackerConfig { tau: 1.1, ..small_config() };
        let mut state = init_tracker(&frame0, &b, cfg, None).unwrap();
        let mut drift = textured_frame(48, 48);
        for y in 0..48 {
            for x in 0..48 {
                drift.set(y, x, (drift.get(y, x) + 0.1).min(1.0));
            }
        }
        for frame in [&frame0, &drift, &frame0] {
            let before = state.templates().templates().clone();
            let out = state.track_frame(frame).unwrap();
            let after = state.templates().templates();
            assert_eq!(after.cols(), before.cols());
            let changed = (0..after.cols()).filter(|&j| after.col(j) != before.col(j)).count();
            assert!(changed <= 1);
            assert_eq!(changed == 1, out.diagnostics.template_updated);
        }
    }

    #[test]
    fn scaling_lambda_keeps_map_choice() {
        let frame = textured_frame(48, 48);
        let b = BoundingBox::new(12, 26, 12, 26);
        let base = TrackerConfig {
            estimator: Estimator::Map,
            seed: 11,
            ..small_config()
        };
        let lam2 = TrackerConfig { lambda: base.lambda * 3.0, ..base.clone() };
        let mut a = init_tracker(&frame, &b, base, None).unwrap();
        let mut c = init_tracker(&frame, &b, lam2, None).unwrap();
        let moved = textured_frame(48, 48);
        let oa = a.track_frame(&moved).unwrap();
        let oc = c.track_frame(&moved).unwrap();
        assert_eq!(oa.state, oc.state);
    }

    #[test]
    fn tracking_lost_when_every_particle_leaves() {
        let frame = textured_frame(32, 32);
        let b = BoundingBox::new(10, 20, 10, 20);
        let mut state = init_tracker(&frame, &b, small_config(), None).unwrap();
        // Teleport the ensemble far outside the frame.
        let gone = ParticleState { cx: 500.0, cy: 500.0, scale: 1.0 };
        state.ensemble = ParticleEnsemble::from_point(gone, 10).unwrap();
        state.current = gone;
        assert!(matches!(state.track_frame(&frame), Err(Error::TrackingLost { .. })));
    }
}
