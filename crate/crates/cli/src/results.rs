//! Result, metric and band CSV formats. Every writer here has a matching
//! parser so emitted files can be fed back in.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use sparse_track_core::tracker::Estimator;
use sparse_track_core::BoundingBox;

pub const RESULTS_HEADER: &str =
    "frame,l,t,r,b,estimator,mean_residual,mean_iterations,sparsity,sci,template_updated";
pub const METRICS_HEADER: &str = "frame,l,r,t,b,tsp,error";
pub const BAND_HEADER: &str = "frame,mean_tsp,std_tsp,lo,hi";

/// One tracked frame as it appears in `results.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameRecord {
    pub frame: u64,
    pub bbox: BoundingBox,
    pub estimator: Estimator,
    pub mean_residual: f64,
    pub mean_iterations: f64,
    pub sparsity: usize,
    /// Concentration index of the refit code; `NaN` stands for "undefined"
    /// and serializes as an empty field.
    pub sci: Option<f64>,
    pub template_updated: bool,
}

pub fn format_results(records: &[FrameRecord]) -> String {
    let mut out = String::from(RESULTS_HEADER);
    out.push('\n');
    for r in records {
        let estimator = match r.estimator {
            Estimator::Mse => "mse",
            Estimator::Map => "map",
        };
        let sci = r.sci.map(|v| format!("{v:.6}")).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{},{},{:.6},{:.3},{},{},{}\n",
            r.frame,
            r.bbox.l,
            r.bbox.t,
            r.bbox.r,
            r.bbox.b,
            estimator,
            r.mean_residual,
            r.mean_iterations,
            r.sparsity,
            sci,
            u8::from(r.template_updated),
        ));
    }
    out
}

pub fn parse_results(text: &str) -> Result<Vec<FrameRecord>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == RESULTS_HEADER => {}
        other => bail!("bad results header: {:?}", other.map(|(_, h)| h)),
    }
    let mut out = Vec::new();
    for (i, line) in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let lineno = i + 1;
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 11 {
            bail!("line {lineno}: expected 11 fields, got {}", f.len());
        }
        let ctx = || format!("line {lineno}");
        out.push(FrameRecord {
            frame: f[0].parse().with_context(ctx)?,
            bbox: BoundingBox::new(
                f[1].parse().with_context(ctx)?,
                f[3].parse().with_context(ctx)?,
                f[2].parse().with_context(ctx)?,
                f[4].parse().with_context(ctx)?,
            ),
            estimator: match f[5] {
                "mse" => Estimator::Mse,
                "map" => Estimator::Map,
                other => bail!("line {lineno}: unknown estimator {other:?}"),
            },
            mean_residual: f[6].parse().with_context(ctx)?,
            mean_iterations: f[7].parse().with_context(ctx)?,
            sparsity: f[8].parse().with_context(ctx)?,
            sci: if f[9].is_empty() { None } else { Some(f[9].parse().with_context(ctx)?) },
            template_updated: f[10] == "1",
        });
    }
    Ok(out)
}

pub fn save_results(path: &Path, records: &[FrameRecord]) -> Result<()> {
    fs::write(path, format_results(records))
        .with_context(|| format!("writing {}", path.display()))
}

pub fn load_results(path: &Path) -> Result<Vec<FrameRecord>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_results(&text).with_context(|| format!("parsing {}", path.display()))
}

/// One evaluated frame: the tracked box, its TSP and centroid error.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricRecord {
    pub frame: u64,
    pub bbox: BoundingBox,
    pub tsp: f64,
    pub error: f64,
}

pub fn format_metrics(records: &[MetricRecord]) -> String {
    let mut out = String::from(METRICS_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{:.6},{:.6}\n",
            r.frame, r.bbox.l, r.bbox.r, r.bbox.t, r.bbox.b, r.tsp, r.error
        ));
    }
    out
}

pub fn parse_metrics(text: &str) -> Result<Vec<MetricRecord>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == METRICS_HEADER => {}
        other => bail!("bad metrics header: {:?}", other.map(|(_, h)| h)),
    }
    let mut out = Vec::new();
    for (i, line) in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let lineno = i + 1;
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 7 {
            bail!("line {lineno}: expected 7 fields, got {}", f.len());
        }
        let ctx = || format!("line {lineno}");
        out.push(MetricRecord {
            frame: f[0].parse().with_context(ctx)?,
            bbox: BoundingBox::new(
                f[1].parse().with_context(ctx)?,
                f[2].parse().with_context(ctx)?,
                f[3].parse().with_context(ctx)?,
                f[4].parse().with_context(ctx)?,
            ),
            tsp: f[5].parse().with_context(ctx)?,
            error: f[6].parse().with_context(ctx)?,
        });
    }
    Ok(out)
}

pub fn save_metrics(path: &Path, records: &[MetricRecord]) -> Result<()> {
    fs::write(path, format_metrics(records))
        .with_context(|| format!("writing {}", path.display()))
}

/// Per-frame TSP band row.
#[derive(Debug, Clone, PartialEq)]
pub struct BandRecord {
    pub frame: u64,
    pub mean_tsp: f64,
    pub std_tsp: f64,
}

pub fn format_band(records: &[BandRecord]) -> String {
    let mut out = String::from(BAND_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&format!(
            "{},{:.6},{:.6},{:.6},{:.6}\n",
            r.frame,
            r.mean_tsp,
            r.std_tsp,
            r.mean_tsp - r.std_tsp,
            r.mean_tsp + r.std_tsp
        ));
    }
    out
}

pub fn parse_band(text: &str) -> Result<Vec<BandRecord>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == BAND_HEADER => {}
        other => bail!("bad band header: {:?}", other.map(|(_, h)| h)),
    }
    let mut out = Vec::new();
    for (i, line) in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let lineno = i + 1;
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 5 {
            bail!("line {lineno}: expected 5 fields, got {}", f.len());
        }
        let ctx = || format!("line {lineno}");
        out.push(BandRecord {
            frame: f[0].parse().with_context(ctx)?,
            mean_tsp: f[1].parse().with_context(ctx)?,
            std_tsp: f[2].parse().with_context(ctx)?,
        });
    }
    Ok(out)
}

pub fn save_band(path: &Path, records: &[BandRecord]) -> Result<()> {
    fs::write(path, format_band(records)).with_context(|| format!("writing {}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(frame: u64) -> FrameRecord {
        FrameRecord {
            frame,
            bbox: BoundingBox::new(1, 13, 2, 14),
            estimator: Estimator::Mse,
            mean_residual: 0.125,
            mean_iterations: 3.25,
            sparsity: 4,
            sci: Some(0.875),
            template_updated: frame % 2 == 0,
        }
    }

    #[test]
    fn results_round_trip() {
        let records = vec![record(0), record(1), FrameRecord { sci: None, ..record(2) }];
        let text = format_results(&records);
        assert_eq!(parse_results(&text).unwrap(), records);
    }

    #[test]
    fn metrics_round_trip() {
        let records = vec![MetricRecord {
            frame: 7,
            bbox: BoundingBox::new(0, 4, 1, 5),
            tsp: 0.5,
            error: 1.25,
        }];
        assert_eq!(parse_metrics(&format_metrics(&records)).unwrap(), records);
    }

    #[test]
    fn band_round_trip_and_bounds() {
        let records = vec![
            BandRecord { frame: 0, mean_tsp: 0.5, std_tsp: 0.125 },
            BandRecord { frame: 1, mean_tsp: 0.75, std_tsp: 0.0 },
        ];
        let text = format_band(&records);
        assert_eq!(parse_band(&text).unwrap(), records);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[1], "0,0.500000,0.125000,0.375000,0.625000");
    }

    #[test]
    fn parsers_reject_wrong_headers() {
        assert!(parse_results("frame,l\n").is_err());
        assert!(parse_metrics("nope\n").is_err());
        assert!(parse_band("x\n").is_err());
    }
}
