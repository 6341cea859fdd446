//! Background model persistence: a directory of `bg_<i>.pgm` frames plus a
//! `manifest.txt` recording the model size, build seed and the source
//! candidate indices.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use sparse_track_core::background::Csbm;

use crate::pgm::{read_pgm, write_pgm};

pub fn save_csbm(dir: &Path, csbm: &Csbm, sources: &[usize], seed: u64) -> Result<()> {
    fs::create_dir_all(dir)?;
    for (i, frame) in csbm.frames().iter().enumerate() {
        write_pgm(&dir.join(format!("bg_{i}.pgm")), frame)?;
    }
    let sources: Vec<String> = sources.iter().map(|s| s.to_string()).collect();
    let manifest =
        format!("n_b = {}\nseed = {}\nsources = {}\n", csbm.n_b(), seed, sources.join(","));
    fs::write(dir.join("manifest.txt"), manifest)
        .with_context(|| format!("writing manifest in {}", dir.display()))
}

pub fn load_csbm(dir: &Path) -> Result<Csbm> {
    let manifest_path = dir.join("manifest.txt");
    let text = fs::read_to_string(&manifest_path)
        .with_context(|| format!("reading {}", manifest_path.display()))?;
    let mut n_b: Option<usize> = None;
    for line in text.lines() {
        let line = line.trim();
        if let Some((key, value)) = line.split_once('=') {
            if key.trim() == "n_b" {
                n_b = Some(value.trim().parse().context("bad n_b in manifest")?);
            }
        }
    }
    let Some(n_b) = n_b else {
        bail!("manifest {} lacks an n_b entry", manifest_path.display());
    };
    let mut frames = Vec::with_capacity(n_b);
    for i in 0..n_b {
        frames.push(read_pgm(&dir.join(format!("bg_{i}.pgm")))?);
    }
    Csbm::new(frames).map_err(|e| anyhow::anyhow!("{e}"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use sparse_track_core::Frame;

    #[test]
    fn round_trips_a_model() {
        let dir = tempfile::tempdir().unwrap();
        let frames: Vec<Frame> = (0..3)
            .map(|i| {
                let mut f = Frame::filled(4, 6, 0.0);
                for (k, p) in f.pixels_mut().iter_mut().enumerate() {
                    *p = ((k * (i + 2)) % 11) as f64 / 11.0;
                }
                f
            })
            .collect();
        let csbm = Csbm::new(frames).unwrap();
        save_csbm(dir.path(), &csbm, &[0, 4, 7], 99).unwrap();
        let back = load_csbm(dir.path()).unwrap();
        assert_eq!(back.n_b(), 3);
        // Quantization-stable frames survive exactly.
        for (a, b) in back.frames().iter().zip(csbm.frames()) {
            assert_eq!(crate::pgm::encode_pgm(a), crate::pgm::encode_pgm(b));
        }
        let manifest = std::fs::read_to_string(dir.path().join("manifest.txt")).unwrap();
        assert!(manifest.contains("n_b = 3"));
        assert!(manifest.contains("sources = 0,4,7"));
    }

    #[test]
    fn missing_manifest_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        assert!(load_csbm(dir.path()).is_err());
    }
}
