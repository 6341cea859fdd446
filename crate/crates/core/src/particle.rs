//! Particle filter machinery: Gaussian random-walk propagation, multinomial
//! resampling and posterior point estimates.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};

/// Dynamic state of one particle: box center and a scale multiplier on the
/// base box size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParticleState {
    pub cx: f64,
    pub cy: f64,
    pub scale: f64,
}

/// A weighted particle set approximating the posterior.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleEnsemble {
    particles: Vec<ParticleState>,
    weights: Vec<f64>,
}

impl ParticleEnsemble {
    pub fn new(particles: Vec<ParticleState>, weights: Vec<f64>) -> Result<Self> {
        if particles.is_empty() {
            return Err(Error::InvalidInput("ensemble needs at least one particle"));
        }
        if particles.len() != weights.len() {
            return Err(Error::InvalidDimension { expected: particles.len(), got: weights.len() });
        }
        if weights.iter().any(|&w| !w.is_finite() || w < 0.0) {
            return Err(Error::InvalidInput("weights must be finite and nonnegative"));
        }
        Ok(ParticleEnsemble { particles, weights })
    }

    /// All particles at the same state, uniformly weighted.
    pub fn from_point(state: ParticleState, count: usize) -> Result<Self> {
        if count == 0 {
            return Err(Error::InvalidInput("ensemble needs at least one particle"));
        }
        Ok(ParticleEnsemble {
            particles: vec![state; count],
            weights: vec![1.0 / count as f64; count],
        })
    }

    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    pub fn particles(&self) -> &[ParticleState] {
        &self.particles
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Replace the weights (they are normalized to sum to one).
    pub fn set_weights(&mut self, weights: Vec<f64>) -> Result<()> {
        if weights.len() != self.particles.len() {
            return Err(Error::InvalidDimension {
                expected: self.particles.len(),
                got: weights.len(),
            });
        }
        if weights.iter().any(|&w| !w.is_finite() || w < 0.0) {
            return Err(Error::InvalidInput("weights must be finite and nonnegative"));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::InvalidInput("weights must not all be zero"));
        }
        self.weights = weights.into_iter().map(|w| w / total).collect();
        Ok(())
    }
}

/// Standard deviations of the Gaussian random-walk transition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitionParams {
    /// Translation noise, in pixels.
    pub sigma_xy: f64,
    /// Relative scale noise.
    pub sigma_scale: f64,
}

impl Default for TransitionParams {
    fn default() -> Self {
        TransitionParams { sigma_xy: 4.0, sigma_scale: 0.02 }
    }
}

impl TransitionParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma_xy > 0.0) || !(self.sigma_scale > 0.0) {
            return Err(Error::InvalidInput("transition sigmas must be strictly positive"));
        }
        Ok(())
    }
}

/// Perturb every particle independently with Gaussian noise. The scale is
/// multiplied by `max(0.1, 1 + N(0, sigma_scale^2))` so a single draw can
/// never collapse the box. Weights are untouched.
pub fn propagate(
    ensemble: &ParticleEnsemble,
    params: &TransitionParams,
    rng_seed: u64,
) -> Result<ParticleEnsemble> {
    params.validate()?;
    let mut rng = ChaCha12Rng::seed_from_u64(rng_seed);
    let xy = Normal::new(0.0, params.sigma_xy)
        .map_err(|_| Error::InvalidInput("bad sigma_xy"))?;
    let sc = Normal::new(0.0, params.sigma_scale)
        .map_err(|_| Error::InvalidInput("bad sigma_scale"))?;
    let particles = ensemble
        .particles
        .iter()
        .map(|p| ParticleState {
            cx: p.cx + xy.sample(&mut rng),
            cy: p.cy + xy.sample(&mut rng),
            scale: p.scale * (1.0 + sc.sample(&mut rng)).max(0.1),
        })
        .collect();
    Ok(ParticleEnsemble { particles, weights: ensemble.weights.clone() })
}

/// Multinomial resampling: draw `N_s` particles i.i.d. with probability
/// proportional to the weights; the output is uniformly weighted.
///
/// All-zero weights degrade to uniform sampling; the second return value
/// flags that degeneracy.
pub fn resample(ensemble: &ParticleEnsemble, rng_seed: u64) -> (ParticleEnsemble, bool) {
    let n = ensemble.len();
    let total: f64 = ensemble.weights.iter().sum();
    let degenerate = total <= 0.0;
    let mut cumulative = Vec::with_capacity(n);
    let mut acc = 0.0;
    for &w in &ensemble.weights {
        acc += if degenerate { 1.0 } else { w };
        cumulative.push(acc);
    }
    let top = *cumulative.last().unwrap();

    let mut rng = ChaCha12Rng::seed_from_u64(rng_seed);
    let particles = (0..n)
        .map(|_| {
            let u = rng.random::<f64>() * top;
            let k = cumulative.partition_point(|&c| c <= u).min(n - 1);
            ensemble.particles[k]
        })
        .collect();
    (ParticleEnsemble { particles, weights: vec![1.0 / n as f64; n] }, degenerate)
}

/// Minimum-mean-square-error estimate: the likelihood-weighted mean of the
/// particle states.
pub fn estimate_mse(ensemble: &ParticleEnsemble, likelihoods: &[f64]) -> Result<ParticleState> {
    check_likelihoods(ensemble, likelihoods)?;
    let mut cx = 0.0;
    let mut cy = 0.0;
    let mut scale = 0.0;
    let mut total = 0.0;
    for (p, &l) in ensemble.particles.iter().zip(likelihoods) {
        cx += p.cx * l;
        cy += p.cy * l;
        scale += p.scale * l;
        total += l;
    }
    Ok(ParticleState { cx: cx / total, cy: cy / total, scale: scale / total })
}

/// Maximum-a-posteriori estimate: the particle with the largest likelihood,
/// ties broken by the lowest index.
pub fn estimate_map(ensemble: &ParticleEnsemble, likelihoods: &[f64]) -> Result<ParticleState> {
    check_likelihoods(ensemble, likelihoods)?;
    let mut best = 0;
    for (i, &l) in likelihoods.iter().enumerate() {
        if l > likelihoods[best] {
            best = i;
        }
    }
    Ok(ensemble.particles[best])
}

fn check_likelihoods(ensemble: &ParticleEnsemble, likelihoods: &[f64]) -> Result<()> {
    if likelihoods.len() != ensemble.len() {
        return Err(Error::InvalidDimension { expected: ensemble.len(), got: likelihoods.len() });
    }
    if likelihoods.iter().any(|&l| !l.is_finite() || l < 0.0) {
        return Err(Error::InvalidInput("likelihoods must be finite and nonnegative"));
    }
    if likelihoods.iter().all(|&l| l == 0.0) {
        return Err(Error::EstimatorDegenerate);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spread_ensemble() -> ParticleEnsemble {
        let particles = vec![
            ParticleState { cx: 0.0, cy: 5.0, scale: 1.0 },
            ParticleState { cx: 10.0, cy: -1.0, scale: 0.8 },
            ParticleState { cx: 20.0, cy: 2.0, scale: 1.3 },
        ];
        ParticleEnsemble::new(particles, vec![1.0 / 3.0; 3]).unwrap()
    }

    #[test]
    fn propagate_zero_noise_limit_keeps_particles() {
        let ens = spread_ensemble();
        let params = TransitionParams { sigma_xy: 1e-12, sigma_scale: 1e-12 };
        let out = propagate(&ens, &params, 9).unwrap();
        for (a, b) in ens.particles().iter().zip(out.particles()) {
            assert!((a.cx - b.cx).abs() < 1e-6);
            assert!((a.cy - b.cy).abs() < 1e-6);
            assert!((a.scale - b.scale).abs() < 1e-6);
        }
    }

    #[test]
    fn propagate_is_deterministic() {
        let ens = spread_ensemble();
        let params = TransitionParams::default();
        assert_eq!(propagate(&ens, &params, 42).unwrap(), propagate(&ens, &params, 42).unwrap());
    }

    #[test]
    fn propagate_translation_std_matches_sigma() {
        let ens = ParticleEnsemble::from_point(
            ParticleState { cx: 0.0, cy: 0.0, scale: 1.0 },
            100_000,
        )
        .unwrap();
        let params = TransitionParams { sigma_xy: 2.0, sigma_scale: 0.01 };
        let out = propagate(&ens, &params, 7).unwrap();
        let n = out.len() as f64;
        let mean: f64 = out.particles().iter().map(|p| p.cx).sum::<f64>() / n;
        let var: f64 =
            out.particles().iter().map(|p| (p.cx - mean) * (p.cx - mean)).sum::<f64>() / n;
        let std = libm::sqrt(var);
        assert!((std - 2.0).abs() < 0.05, "std {std}");
    }

    #[test]
    fn resample_point_mass_wins_everything() {
        let particles = vec![
            ParticleState { cx: 0.0, cy: 0.0, scale: 1.0 },
            ParticleState { cx: 5.0, cy: 5.0, scale: 1.0 },
            ParticleState { cx: 9.0, cy: 9.0, scale: 1.0 },
        ];
        let ens = ParticleEnsemble::new(particles.clone(), vec![0.0, 1.0, 0.0]).unwrap();
        let (out, degenerate) = resample(&ens, 3);
        assert!(!degenerate);
        assert!(out.particles().iter().all(|p| *p == particles[1]));
        assert!(out.weights().iter().all(|&w| (w - 1.0 / 3.0).abs() < 1e-12));
    }

    #[test]
    fn resample_uniform_frequencies() {
        let k = 5usize;
        let particles: Vec<ParticleState> =
            (0..k).map(|i| ParticleState { cx: i as f64, cy: 0.0, scale: 1.0 }).collect();
        let big = ParticleEnsemble::new(
            particles.iter().cycle().take(100_000).cloned().collect(),
            vec![1.0; 100_000],
        )
        .unwrap();
        let (out, _) = resample(&big, 11);
        let mut counts = vec![0usize; k];
        for p in out.particles() {
            counts[p.cx as usize] += 1;
        }
        // Each of the 5 states is expected 20_000 times; 3 sigma of a
        // binomial(100_000, 0.2) is about 380.
        for &c in &counts {
            assert!((c as i64 - 20_000).abs() < 1200, "count {c}");
        }
    }

    #[test]
    fn resample_is_deterministic_and_flags_degeneracy() {
        let ens = spread_ensemble();
        assert_eq!(resample(&ens, 4).0, resample(&ens, 4).0);
        let zeros = ParticleEnsemble::new(ens.particles().to_vec(), vec![0.0; 3]).unwrap();
        let (out, degenerate) = resample(&zeros, 4);
        assert!(degenerate);
        assert_eq!(out.len(), 3);
    }

    #[test]
    fn resample_output_states_subset_of_input() {
        let ens = spread_ensemble();
        let (out, _) = resample(&ens, 99);
        for p in out.particles() {
            assert!(ens.particles().contains(p));
        }
    }

    #[test]
    fn mse_equal_likelihoods_is_plain_mean() {
        let ens = spread_ensemble();
        let est = estimate_mse(&ens, &[1.0, 1.0, 1.0]).unwrap();
        assert_eq!(est.cx, 10.0);
        assert_eq!(est.cy, 2.0);
    }

    #[test]
    fn mse_point_mass_returns_that_particle() {
        let ens = spread_ensemble();
        let est = estimate_mse(&ens, &[0.0, 0.0, 3.0]).unwrap();
        assert_eq!(est, ens.particles()[2]);
    }

    #[test]
    fn mse_hand_weighted_mean() {
        let particles = vec![
            ParticleState { cx: 0.0, cy: 0.0, scale: 1.0 },
            ParticleState { cx: 10.0, cy: 0.0, scale: 1.0 },
            ParticleState { cx: 20.0, cy: 0.0, scale: 1.0 },
        ];
        let ens = ParticleEnsemble::new(particles, vec![1.0 / 3.0; 3]).unwrap();
        let est = estimate_mse(&ens, &[1.0, 2.0, 1.0]).unwrap();
        assert_eq!(est.cx, 10.0);
    }

    #[test]
    fn mse_inside_convex_hull() {
        let ens = spread_ensemble();
        let est = estimate_mse(&ens, &[0.2, 0.5, 0.3]).unwrap();
        assert!(est.cx >= 0.0 && est.cx <= 20.0);
        assert!(est.cy >= -1.0 && est.cy <= 5.0);
        assert!(est.scale >= 0.8 && est.scale <= 1.3);
    }

    #[test]
    fn map_picks_argmax_with_index_ties() {
        let ens = spread_ensemble();
        assert_eq!(estimate_map(&ens, &[0.1, 0.9, 0.3]).unwrap(), ens.particles()[1]);
        assert_eq!(estimate_map(&ens, &[0.5, 0.5, 0.5]).unwrap(), ens.particles()[0]);
    }

    #[test]
    fn estimators_reject_all_zero_likelihoods() {
        let ens = spread_ensemble();
        assert_eq!(estimate_mse(&ens, &[0.0; 3]), Err(Error::EstimatorDegenerate));
        assert_eq!(estimate_map(&ens, &[0.0; 3]), Err(Error::EstimatorDegenerate));
    }

    #[test]
    fn estimates_invariant_under_likelihood_scaling() {
        let ens = spread_ensemble();
        let l = [0.25, 0.5, 0.125];
        // Powers of two scale exactly in IEEE arithmetic.
        for c in [0.5, 2.0, 8.0] {
            let scaled: Vec<f64> = l.iter().map(|&x| c * x).collect();
            assert_eq!(estimate_mse(&ens, &l).unwrap(), estimate_mse(&ens, &scaled).unwrap());
            assert_eq!(estimate_map(&ens, &l).unwrap(), estimate_map(&ens, &scaled).unwrap());
        }
        // MAP is invariant under any positive scaling.
        let scaled: Vec<f64> = l.iter().map(|&x| 3.7 * x).collect();
        assert_eq!(estimate_map(&ens, &l).unwrap(), estimate_map(&ens, &scaled).unwrap());
    }
}
