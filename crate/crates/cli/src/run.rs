//! Orchestration shared by the CLI subcommands and the test suites: full
//! tracking runs over a sequence, evaluation against ground truth, and the
//! parallel fluctuated-initialization robustness protocol.

use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use rayon::prelude::*;
use sparse_track_core::background::Csbm;
use sparse_track_core::eval::{self, tracking_error, tsp, FluctuationParams, TspParams};
use sparse_track_core::seed::derive;
use sparse_track_core::tracker::{init_tracker, FrameDiagnostics, TrackerConfig};
use sparse_track_core::BoundingBox;

use crate::pgm::FrameSequence;
use crate::results::{BandRecord, FrameRecord, MetricRecord};

/// A full tracking run: one record per sequence frame (the first record is
/// the initialization box itself).
pub struct TrackOutcome {
    pub records: Vec<FrameRecord>,
    /// Per-frame diagnostics of the tracked frames (empty for frame 0).
    pub diagnostics: Vec<FrameDiagnostics>,
    /// Per-frame wall time in milliseconds, aligned with `records`.
    pub wall_ms: Vec<f64>,
}

/// Track `seq` from `init` with `config`. Frame 0 of the sequence anchors
/// the tracker; every later frame produces an estimate.
pub fn run_track(
    seq: &FrameSequence,
    init: &BoundingBox,
    config: TrackerConfig,
    csbm: Option<Csbm>,
) -> Result<TrackOutcome> {
    if seq.is_empty() {
        bail!("empty frame sequence");
    }
    let estimator = config.estimator;
    let mut state = init_tracker(&seq.frames[0], init, config, csbm)
        .map_err(|e| anyhow!("initialization failed: {e}"))?;

    let mut records = Vec::with_capacity(seq.len());
    let mut diagnostics = Vec::with_capacity(seq.len().saturating_sub(1));
    let mut wall_ms = Vec::with_capacity(seq.len());
    records.push(FrameRecord {
        frame: seq.indices[0],
        bbox: *init,
        estimator,
        mean_residual: 0.0,
        mean_iterations: 0.0,
        sparsity: 0,
        sci: Some(1.0),
        template_updated: false,
    });
    wall_ms.push(0.0);

    for (frame, &index) in seq.frames.iter().zip(&seq.indices).skip(1) {
        let started = Instant::now();
        let out = state
            .track_frame(frame)
            .map_err(|e| anyhow!("frame {index}: {e}"))?;
        let elapsed = started.elapsed().as_secs_f64() * 1e3;
        records.push(FrameRecord {
            frame: index,
            bbox: out.bbox,
            estimator,
            mean_residual: out.diagnostics.mean_residual,
            mean_iterations: out.diagnostics.mean_iterations,
            sparsity: out.diagnostics.sparsity,
            sci: out.diagnostics.sci,
            template_updated: out.diagnostics.template_updated,
        });
        diagnostics.push(out.diagnostics);
        wall_ms.push(elapsed);
    }
    Ok(TrackOutcome { records, diagnostics, wall_ms })
}

/// Join tracked boxes against ground truth by frame index and score each
/// common frame.
pub fn evaluate(
    records: &[FrameRecord],
    truth: &[(u64, BoundingBox)],
    params: &TspParams,
) -> Result<Vec<MetricRecord>> {
    let mut out = Vec::new();
    for r in records {
        let Some((_, gt)) = truth.iter().find(|(f, _)| *f == r.frame) else {
            continue;
        };
        let tsp_value = tsp(gt, &r.bbox, params).map_err(|e| anyhow!("frame {}: {e}", r.frame))?;
        let error = tracking_error(gt.center(), r.bbox.center());
        out.push(MetricRecord { frame: r.frame, bbox: r.bbox, tsp: tsp_value, error });
    }
    if out.is_empty() {
        bail!("no common frames between results and ground truth");
    }
    Ok(out)
}

/// Build the worker pool honoring `SPARSE_TRACK_THREADS` (0 or unset means
/// one worker per core).
pub fn thread_pool() -> Result<rayon::ThreadPool> {
    let threads = match std::env::var("SPARSE_TRACK_THREADS") {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .with_context(|| format!("bad SPARSE_TRACK_THREADS value {v:?}"))?,
        Err(_) => 0,
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .context("building worker pool")
}

/// The robustness protocol: repeat the tracking run with a jittered initial
/// box, score every repeat against ground truth, and reduce to a per-frame
/// TSP band. Repeats run in parallel; seeds derive from `config.seed` by
/// repeat index, so the band is independent of scheduling.
pub fn run_robustness(
    seq: &FrameSequence,
    init: &BoundingBox,
    config: &TrackerConfig,
    csbm: Option<&Csbm>,
    truth: &[(u64, BoundingBox)],
    fluctuation: &FluctuationParams,
    tsp_params: &TspParams,
) -> Result<Vec<BandRecord>> {
    if fluctuation.repeats < 2 {
        bail!("robustness needs at least two repeats");
    }
    for index in &seq.indices {
        if !truth.iter().any(|(f, _)| f == index) {
            bail!("ground truth lacks frame {index}");
        }
    }
    let (w, h) = seq.frame_size();
    let master = config.seed;

    let pool = thread_pool()?;
    let per_run: Vec<Vec<f64>> = pool.install(|| {
        (0..fluctuation.repeats)
            .into_par_iter()
            .map(|repeat| -> Result<Vec<f64>> {
                let jittered =
                    eval::fluctuate_box(init, fluctuation, w, h, derive(master, repeat as u64, 3))
                        .map_err(|e| anyhow!("repeat {repeat}: {e}"))?;
                let run_config = TrackerConfig {
                    seed: derive(master, repeat as u64, 4),
                    ..config.clone()
                };
                let outcome = run_track(seq, &jittered, run_config, csbm.cloned())
                    .with_context(|| format!("repeat {repeat}"))?;
                outcome
                    .records
                    .iter()
                    .map(|r| {
                        let (_, gt) = truth.iter().find(|(f, _)| *f == r.frame).unwrap();
                        tsp(gt, &r.bbox, tsp_params).map_err(|e| anyhow!("{e}"))
                    })
                    .collect()
            })
            .collect::<Result<_>>()
    })?;

    let (mean, std) = eval::tsp_band(&per_run).map_err(|e| anyhow!("{e}"))?;
    Ok(seq
        .indices
        .iter()
        .zip(mean.iter().zip(&std))
        .map(|(&frame, (&mean_tsp, &std_tsp))| BandRecord { frame, mean_tsp, std_tsp })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use sparse_track_core::tracker::Estimator;

    #[test]
    fn evaluate_joins_on_frame_index() {
        let records = vec![FrameRecord {
            frame: 3,
            bbox: BoundingBox::new(0, 10, 0, 10),
            estimator: Estimator::Mse,
            mean_residual: 0.0,
            mean_iterations: 0.0,
            sparsity: 0,
            sci: None,
            template_updated: false,
        }];
        let truth = vec![(3, BoundingBox::new(0, 10, 0, 10)), (4, BoundingBox::new(0, 5, 0, 5))];
        let metrics = evaluate(&records, &truth, &TspParams::default()).unwrap();
        assert_eq!(metrics.len(), 1);
        assert!(metrics[0].tsp >= 0.9999);
        assert_eq!(metrics[0].error, 0.0);
        assert!(evaluate(&records, &[(9, BoundingBox::new(0, 1, 0, 1))], &TspParams::default())
            .is_err());
    }
}
