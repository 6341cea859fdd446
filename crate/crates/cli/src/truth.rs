//! Ground-truth and annotation CSV: `frame,l,t,r,b` rows, one box per row.
//! The same file format doubles as the foreground annotation input of the
//! background-model builder (with possibly several rows per frame).

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use sparse_track_core::background::ForegroundAnnotation;
use sparse_track_core::BoundingBox;

pub const HEADER: &str = "frame,l,t,r,b";

/// Parse a ground-truth CSV into `(frame_index, box)` pairs.
pub fn parse_ground_truth(text: &str) -> Result<Vec<(u64, BoundingBox)>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, first)) if first.trim() == HEADER => {}
        Some((_, first)) => bail!("bad header {first:?}, expected {HEADER:?}"),
        None => bail!("empty ground-truth file"),
    }
    let mut out = Vec::new();
    for (i, line) in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let lineno = i + 1;
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 5 {
            bail!("line {lineno}: expected 5 fields, got {}", fields.len());
        }
        let frame: u64 =
            fields[0].trim().parse().with_context(|| format!("line {lineno}: bad frame"))?;
        let mut v = [0i32; 4];
        for (k, f) in fields[1..].iter().enumerate() {
            v[k] = f.trim().parse().with_context(|| format!("line {lineno}: bad coordinate"))?;
        }
        let bbox = BoundingBox::new(v[0], v[2], v[1], v[3]);
        if !bbox.is_proper() {
            bail!("line {lineno}: box needs l < r and t < b, got l={} t={} r={} b={}",
                v[0], v[1], v[2], v[3]);
        }
        out.push((frame, bbox));
    }
    Ok(out)
}

pub fn load_ground_truth(path: &Path) -> Result<Vec<(u64, BoundingBox)>> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_ground_truth(&text).with_context(|| format!("parsing {}", path.display()))
}

pub fn format_ground_truth(rows: &[(u64, BoundingBox)]) -> String {
    let mut out = String::from(HEADER);
    out.push('\n');
    for (frame, b) in rows {
        out.push_str(&format!("{frame},{},{},{},{}\n", b.l, b.t, b.r, b.b));
    }
    out
}

pub fn save_ground_truth(path: &Path, rows: &[(u64, BoundingBox)]) -> Result<()> {
    fs::write(path, format_ground_truth(rows))
        .with_context(|| format!("writing {}", path.display()))
}

/// Group per-row boxes into one annotation per frame index.
pub fn to_annotations(rows: &[(u64, BoundingBox)]) -> Vec<ForegroundAnnotation> {
    let mut out: Vec<ForegroundAnnotation> = Vec::new();
    for &(frame, bbox) in rows {
        match out.iter_mut().find(|a| a.frame_index == frame) {
            Some(a) => a.boxes.push(bbox),
            None => out.push(ForegroundAnnotation { frame_index: frame, boxes: vec![bbox] }),
        }
    }
    out
}
