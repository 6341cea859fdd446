use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use sparse_track_core::background::{build_csbm, Csbm};
use sparse_track_core::eval::{FluctuationParams, TspParams};
use sparse_track_core::tracker::{init_tracker, TrackerMode};
use sparse_track_core::BoundingBox;

use sparse_track::config::{load_config, RunConfig};
use sparse_track::pgm::{load_sequence, save_sequence};
use sparse_track::results::{save_band, save_metrics, save_results};
use sparse_track::run::{evaluate, run_robustness, run_track};
use sparse_track::synth::{synth_sequence, BackgroundKind, SynthParams};
use sparse_track::truth::{load_ground_truth, save_ground_truth, to_annotations};
use sparse_track::{bgio, dump};

/// Sparse-representation visual tracking: track targets in PGM sequences,
/// build background models, and evaluate runs with the TSP metric.
#[derive(Parser)]
#[command(name = "sparse-track", version, max_term_width = 100)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Track a target through a frame sequence.
    Track(TrackArgs),
    /// Build a background model from annotated frames.
    BuildBg(BuildBgArgs),
    /// Score tracking results against ground truth.
    Eval(EvalArgs),
    /// Repeat a run with jittered initial boxes and emit the TSP band.
    Robustness(RobustnessArgs),
    /// Generate a synthetic sequence with exact ground truth.
    Synth(SynthArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Rtcst,
    RtcstB,
}

impl From<ModeArg> for TrackerMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Rtcst => TrackerMode::Rtcst,
            ModeArg::RtcstB => TrackerMode::RtcstB,
        }
    }
}

#[derive(Args)]
struct TrackArgs {
    /// Directory of frame_<N>.pgm files.
    #[arg(long)]
    frames: PathBuf,
    /// Initial target box as l,t,r,b.
    #[arg(long)]
    init: String,
    /// Tracker configuration file (key = value lines).
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    mode: ModeArg,
    /// Background model directory (required for rtcst-b).
    #[arg(long)]
    background: Option<PathBuf>,
    /// Master random seed.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Output results CSV.
    #[arg(long)]
    out: PathBuf,
    /// Also dump the projection matrix to this file.
    #[arg(long)]
    dump_projection: Option<PathBuf>,
}

#[derive(Args)]
struct BuildBgArgs {
    /// Directory of candidate frame_<N>.pgm files.
    #[arg(long)]
    frames: PathBuf,
    /// Foreground annotations CSV (frame,l,t,r,b).
    #[arg(long)]
    annotations: PathBuf,
    /// Number of backgrounds to keep.
    #[arg(long)]
    num: usize,
    /// Output model directory.
    #[arg(long)]
    out: PathBuf,
    /// Thumbnail edge for the clustering distance.
    #[arg(long, default_value_t = 64)]
    downsample: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Patch from the nearest frame even when its foreground intersects.
    #[arg(long)]
    allow_impure: bool,
}

#[derive(Args)]
struct EvalArgs {
    /// Results CSV produced by `track`.
    #[arg(long)]
    results: PathBuf,
    /// Ground truth CSV (frame,l,t,r,b).
    #[arg(long)]
    truth: PathBuf,
    /// TSP sharpness parameter.
    #[arg(long, default_value_t = 11.8)]
    nu: f64,
    /// Output metrics CSV.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct RobustnessArgs {
    #[arg(long)]
    frames: PathBuf,
    /// Initial target box as l,t,r,b.
    #[arg(long)]
    init: String,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    mode: ModeArg,
    #[arg(long)]
    background: Option<PathBuf>,
    #[arg(long)]
    truth: PathBuf,
    /// Standard deviation of the initialization jitter, in pixels.
    #[arg(long)]
    omega: f64,
    #[arg(long, default_value_t = 100)]
    repeats: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 11.8)]
    nu: f64,
    /// Output band CSV.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SynthArgs {
    /// Output directory for frame_<N>.pgm files.
    #[arg(long)]
    out: PathBuf,
    /// Ground truth CSV path (default: <out>/truth.csv).
    #[arg(long)]
    truth: Option<PathBuf>,
    #[arg(long, default_value_t = 64)]
    width: usize,
    #[arg(long, default_value_t = 64)]
    height: usize,
    #[arg(long, default_value_t = 50)]
    frames: usize,
    #[arg(long, default_value_t = 12)]
    target_size: usize,
    /// Target speed in pixels per frame.
    #[arg(long, default_value_t = 1.0)]
    speed: f64,
    /// Pixel noise standard deviation in [0, 1] intensity units.
    #[arg(long, default_value_t = 5.0 / 255.0)]
    noise: f64,
    #[arg(long, value_enum, default_value_t = BackgroundArg::Uniform)]
    background: BackgroundArg,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BackgroundArg {
    Uniform,
    Texture,
}

fn parse_init(text: &str) -> Result<BoundingBox> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 4 {
        bail!("--init expects l,t,r,b");
    }
    let mut v = [0i32; 4];
    for (k, p) in parts.iter().enumerate() {
        v[k] = p.trim().parse().with_context(|| format!("bad --init coordinate {p:?}"))?;
    }
    let bbox = BoundingBox::new(v[0], v[2], v[1], v[3]);
    if !bbox.is_proper() {
        bail!("--init needs l < r and t < b");
    }
    Ok(bbox)
}

fn load_run_config(path: &Option<PathBuf>) -> Result<RunConfig> {
    match path {
        Some(p) => load_config(p),
        None => Ok(RunConfig::default()),
    }
}

fn load_background(path: &Option<PathBuf>, mode: TrackerMode) -> Result<Option<Csbm>> {
    match (mode, path) {
        (TrackerMode::RtcstB, Some(dir)) => Ok(Some(bgio::load_csbm(dir)?)),
        (TrackerMode::RtcstB, None) => bail!("--mode rtcst-b requires --background DIR"),
        (TrackerMode::Rtcst, _) => Ok(None),
    }
}

fn cmd_track(args: TrackArgs) -> Result<()> {
    let seq = load_sequence(&args.frames)?;
    let init = parse_init(&args.init)?;
    let mode = TrackerMode::from(args.mode);
    let csbm = load_background(&args.background, mode)?;
    let config = load_run_config(&args.config)?.into_tracker(mode, args.seed);

    if let Some(path) = &args.dump_projection {
        let state = init_tracker(&seq.frames[0], &init, config.clone(), csbm.clone())
            .map_err(|e| anyhow!("initialization failed: {e}"))?;
        dump::save_projection(path, state.projection())?;
    }

    let outcome = run_track(&seq, &init, config, csbm)?;
    for (record, ms) in outcome.records.iter().zip(&outcome.wall_ms).skip(1) {
        eprintln!(
            "frame {}: {:.3} ms, residual {:.4}, sparsity {}",
            record.frame, ms, record.mean_residual, record.sparsity
        );
    }
    save_results(&args.out, &outcome.records)?;
    Ok(())
}

fn cmd_build_bg(args: BuildBgArgs) -> Result<()> {
    let seq = load_sequence(&args.frames)?;
    let rows = load_ground_truth(&args.annotations)?;
    let annotations = to_annotations(&rows);
    let candidates: Vec<_> = seq
        .frames
        .into_iter()
        .zip(&seq.indices)
        .map(|(frame, &index)| {
            let ann = annotations
                .iter()
                .find(|a| a.frame_index == index)
                .cloned()
                .unwrap_or(sparse_track_core::background::ForegroundAnnotation {
                    frame_index: index,
                    boxes: Vec::new(),
                });
            (frame, ann)
        })
        .collect();
    let (csbm, medoids) =
        build_csbm(&candidates, args.num, args.downsample, args.seed, args.allow_impure)
            .map_err(|e| anyhow!("{e}"))?;
    // Manifest records original frame numbers, not candidate positions.
    let sources: Vec<usize> = medoids.iter().map(|&m| seq.indices[m] as usize).collect();
    bgio::save_csbm(&args.out, &csbm, &sources, args.seed)?;
    eprintln!("kept {} backgrounds from {} candidates", csbm.n_b(), seq.indices.len());
    Ok(())
}

fn cmd_eval(args: EvalArgs) -> Result<()> {
    let records = sparse_track::results::load_results(&args.results)?;
    let truth = load_ground_truth(&args.truth)?;
    let metrics = evaluate(&records, &truth, &TspParams { nu: args.nu })?;
    let mean: f64 = metrics.iter().map(|m| m.tsp).sum::<f64>() / metrics.len() as f64;
    eprintln!("mean TSP over {} frames: {:.4}", metrics.len(), mean);
    save_metrics(&args.out, &metrics)?;
    Ok(())
}

fn cmd_robustness(args: RobustnessArgs) -> Result<()> {
    let seq = load_sequence(&args.frames)?;
    let init = parse_init(&args.init)?;
    let mode = TrackerMode::from(args.mode);
    let csbm = load_background(&args.background, mode)?;
    let config = load_run_config(&args.config)?.into_tracker(mode, args.seed);
    let truth = load_ground_truth(&args.truth)?;
    let band = run_robustness(
        &seq,
        &init,
        &config,
        csbm.as_ref(),
        &truth,
        &FluctuationParams { omega: args.omega, repeats: args.repeats },
        &TspParams { nu: args.nu },
    )?;
    save_band(&args.out, &band)?;
    Ok(())
}

fn cmd_synth(args: SynthArgs) -> Result<()> {
    let params = SynthParams {
        width: args.width,
        height: args.height,
        frames: args.frames,
        target_size: args.target_size,
        speed: args.speed,
        noise_std: args.noise,
        background: match args.background {
            BackgroundArg::Uniform => BackgroundKind::Uniform,
            BackgroundArg::Texture => BackgroundKind::Texture,
        },
        seed: args.seed,
    };
    let (seq, truth) = synth_sequence(&params)?;
    save_sequence(&args.out, &seq)?;
    let truth_path = args.truth.unwrap_or_else(|| args.out.join("truth.csv"));
    save_ground_truth(&truth_path, &truth)?;
    Ok(())
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Track(args) => cmd_track(args),
        Command::BuildBg(args) => cmd_build_bg(args),
        Command::Eval(args) => cmd_eval(args),
        Command::Robustness(args) => cmd_robustness(args),
        Command::Synth(args) => cmd_synth(args),
    };
    if let Err(e) = result {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
