//! Run configuration: plain `key = value` lines with `#` comments. Absent
//! keys fall back to documented defaults; unknown keys are rejected.
//!
//! | key             | default    |
//! |-----------------|------------|
//! | d               | 50         |
//! | n_s             | 100        |
//! | n_t             | 100        |
//! | epsilon         | 0.01       |
//! | eta             | mode default (`d/2` for rtcst, 15 for rtcst-b) |
//! | lambda          | 20         |
//! | tau             | 0.7        |
//! | s               | 1          |
//! | projection      | hash       |
//! | projection_seed | derived from the master seed |
//! | sigma_xy        | 4          |
//! | sigma_scale     | 0.02       |
//! | estimator       | mse        |

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use sparse_track_core::seed::derive;
use sparse_track_core::tracker::{Estimator, TrackerConfig, TrackerMode};
use sparse_track_core::{ProjectionKind, TransitionParams};

/// Tracker tunables as read from a config file, before mode and master
/// seed are known.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub d: usize,
    pub n_s: usize,
    pub n_t: usize,
    pub epsilon: f64,
    pub eta: Option<usize>,
    pub lambda: f64,
    pub tau: f64,
    pub s: u32,
    pub projection: ProjectionKind,
    pub projection_seed: Option<u64>,
    pub sigma_xy: f64,
    pub sigma_scale: f64,
    pub estimator: Estimator,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            d: 50,
            n_s: 100,
            n_t: 100,
            epsilon: 0.01,
            eta: None,
            lambda: 20.0,
            tau: 0.7,
            s: 1,
            projection: ProjectionKind::Hash,
            projection_seed: None,
            sigma_xy: 4.0,
            sigma_scale: 0.02,
            estimator: Estimator::Mse,
        }
    }
}

impl RunConfig {
    /// Combine with the CLI-level mode and master seed into a full tracker
    /// configuration. An unset projection seed derives from the master
    /// seed, so one seed pins the whole run.
    pub fn into_tracker(self, mode: TrackerMode, seed: u64) -> TrackerConfig {
        TrackerConfig {
            mode,
            reduced_dim: self.d,
            num_templates: self.n_t,
            num_particles: self.n_s,
            epsilon: self.epsilon,
            eta: self.eta,
            lambda: self.lambda,
            tau: self.tau,
            projection: self.projection,
            projection_seed: self.projection_seed.unwrap_or_else(|| derive(seed, 0, 100)),
            num_hash_seeds: self.s,
            transition: TransitionParams { sigma_xy: self.sigma_xy, sigma_scale: self.sigma_scale },
            estimator: self.estimator,
            seed,
        }
    }
}

pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            bail!("line {lineno}: expected `key = value`, got {raw:?}");
        };
        let key = key.trim();
        let value = value.trim();
        let ctx = || format!("line {lineno}: bad value for `{key}`");
        match key {
            "d" => cfg.d = value.parse().with_context(ctx)?,
            "n_s" => cfg.n_s = value.parse().with_context(ctx)?,
            "n_t" => cfg.n_t = value.parse().with_context(ctx)?,
            "epsilon" => cfg.epsilon = value.parse().with_context(ctx)?,
            "eta" => cfg.eta = Some(value.parse().with_context(ctx)?),
            "lambda" => cfg.lambda = value.parse().with_context(ctx)?,
            "tau" => cfg.tau = value.parse().with_context(ctx)?,
            "s" => cfg.s = value.parse().with_context(ctx)?,
            "projection" => {
                cfg.projection = match value {
                    "hash" => ProjectionKind::Hash,
                    "random" => ProjectionKind::RandomGaussian,
                    other => bail!("line {lineno}: projection must be hash or random, got {other:?}"),
                }
            }
            "projection_seed" => cfg.projection_seed = Some(value.parse().with_context(ctx)?),
            "sigma_xy" => cfg.sigma_xy = value.parse().with_context(ctx)?,
            "sigma_scale" => cfg.sigma_scale = value.parse().with_context(ctx)?,
            "estimator" => {
                cfg.estimator = match value {
                    "mse" => Estimator::Mse,
                    "map" => Estimator::Map,
                    other => bail!("line {lineno}: estimator must be mse or map, got {other:?}"),
                }
            }
            other => bail!("line {lineno}: unknown key `{other}`"),
        }
    }
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_config(&text).with_context(|| format!("parsing {}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        assert_eq!(parse_config("").unwrap(), RunConfig::default());
        assert_eq!(parse_config("# only comments\n\n").unwrap(), RunConfig::default());
    }

    #[test]
    fn eta_override_sticks() {
        let cfg = parse_config("eta = 15\n").unwrap();
        assert_eq!(cfg.eta, Some(15));
        let tracker = cfg.into_tracker(TrackerMode::Rtcst, 1);
        assert_eq!(tracker.eta(), 15);
    }

    #[test]
    fn mode_defaults_for_eta() {
        let base = RunConfig::default();
        assert_eq!(base.clone().into_tracker(TrackerMode::Rtcst, 1).eta(), 25);
        assert_eq!(base.into_tracker(TrackerMode::RtcstB, 1).eta(), 15);
    }

    #[test]
    fn type_error_names_the_key() {
        let err = parse_config("epsilon = abc\n").unwrap_err();
        assert!(format!("{err:#}").contains("epsilon"), "{err:#}");
    }

    #[test]
    fn unknown_key_is_rejected() {
        let err = parse_config("females = 3\n").unwrap_err();
        assert!(err.to_string().contains("unknown key"), "{err}");
    }

    #[test]
    fn full_file_parses() {
        let text = "\
# tracker
d = 25
n_s = 200
n_t = 50
epsilon = 0.02   # residual stop
lambda = 15
tau = 0.65
s = 3
projection = random
projection_seed = 9
sigma_xy = 2.5
sigma_scale = 0.01
estimator = map
";
        let cfg = parse_config(text).unwrap();
        assert_eq!(cfg.d, 25);
        assert_eq!(cfg.n_s, 200);
        assert_eq!(cfg.projection, ProjectionKind::RandomGaussian);
        assert_eq!(cfg.projection_seed, Some(9));
        assert_eq!(cfg.estimator, Estimator::Map);
    }
}
