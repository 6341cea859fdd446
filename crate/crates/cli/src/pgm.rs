//! PGM frame I/O. Both ASCII (`P2`) and binary (`P5`) encodings are read;
//! frames are written as `P5`. Pixels are 8-bit and map to `[0, 1]` by
//! `v / 255`.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use sparse_track_core::Frame;

/// An ordered grayscale sequence plus the frame numbers parsed from the
/// file names.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameSequence {
    pub frames: Vec<Frame>,
    pub indices: Vec<u64>,
}

impl FrameSequence {
    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn frame_size(&self) -> (usize, usize) {
        (self.frames[0].width(), self.frames[0].height())
    }
}

/// Parse one PGM image.
pub fn parse_pgm(bytes: &[u8]) -> Result<Frame> {
    let mut pos = 0usize;
    let magic = next_token(bytes, &mut pos).ok_or_else(|| anyhow!("missing PGM magic"))?;
    let binary = match magic.as_str() {
        "P5" => true,
        "P2" => false,
        other => bail!("unsupported PGM magic {other:?}"),
    };
    let width: usize = parse_header_int(bytes, &mut pos, "width")?;
    let height: usize = parse_header_int(bytes, &mut pos, "height")?;
    let maxval: usize = parse_header_int(bytes, &mut pos, "maxval")?;
    if width == 0 || height == 0 {
        bail!("degenerate PGM dimensions {width}x{height}");
    }
    if maxval == 0 || maxval > 255 {
        bail!("unsupported PGM maxval {maxval}, expected 1..=255");
    }
    let count = width * height;
    let mut data = Vec::with_capacity(count);
    if binary {
        // Exactly one whitespace byte separates the header from the raster.
        pos += 1;
        if bytes.len() < pos + count {
            bail!("truncated P5 raster: need {count} bytes");
        }
        for &b in &bytes[pos..pos + count] {
            data.push(b as f64 / maxval as f64);
        }
    } else {
        for _ in 0..count {
            let v: usize = next_token(bytes, &mut pos)
                .ok_or_else(|| anyhow!("truncated P2 raster: need {count} values"))?
                .parse()
                .map_err(|_| anyhow!("malformed P2 sample"))?;
            if v > maxval {
                bail!("P2 sample {v} exceeds maxval {maxval}");
            }
            data.push(v as f64 / maxval as f64);
        }
    }
    Frame::new(height, width, data).map_err(|e| anyhow!("{e}"))
}

/// Next whitespace-separated token, skipping `#` comments.
fn next_token(bytes: &[u8], pos: &mut usize) -> Option<String> {
    loop {
        while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if *pos < bytes.len() && bytes[*pos] == b'#' {
            while *pos < bytes.len() && bytes[*pos] != b'\n' {
                *pos += 1;
            }
            continue;
        }
        break;
    }
    let start = *pos;
    while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
    if *pos > start {
        Some(String::from_utf8_lossy(&bytes[start..*pos]).into_owned())
    } else {
        None
    }
}

fn parse_header_int(bytes: &[u8], pos: &mut usize, what: &str) -> Result<usize> {
    next_token(bytes, pos)
        .ok_or_else(|| anyhow!("missing PGM {what}"))?
        .parse()
        .map_err(|_| anyhow!("malformed PGM {what}"))
}

pub fn read_pgm(path: &Path) -> Result<Frame> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    parse_pgm(&bytes).with_context(|| format!("parsing {}", path.display()))
}

/// Serialize as binary `P5` with maxval 255; intensities are quantized by
/// rounding.
pub fn encode_pgm(frame: &Frame) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", frame.width(), frame.height()).into_bytes();
    out.extend(frame.pixels().iter().map(|&v| quantize(v)));
    out
}

fn quantize(v: f64) -> u8 {
    (v * 255.0).round().clamp(0.0, 255.0) as u8
}

pub fn write_pgm(path: &Path, frame: &Frame) -> Result<()> {
    fs::write(path, encode_pgm(frame)).with_context(|| format!("writing {}", path.display()))
}

/// Load every `frame_<N>.pgm` in a directory, sorted by `N`.
pub fn load_sequence(dir: &Path) -> Result<FrameSequence> {
    let mut numbered: Vec<(u64, PathBuf)> = Vec::new();
    for entry in fs::read_dir(dir).with_context(|| format!("listing {}", dir.display()))? {
        let path = entry?.path();
        let Some(name) = path.file_name().and_then(|n| n.to_str()) else {
            continue;
        };
        if let Some(n) = name.strip_prefix("frame_").and_then(|s| s.strip_suffix(".pgm")) {
            let index: u64 =
                n.parse().with_context(|| format!("bad frame number in {name:?}"))?;
            numbered.push((index, path));
        }
    }
    if numbered.is_empty() {
        bail!("no frame_<N>.pgm files in {}", dir.display());
    }
    numbered.sort_by_key(|(n, _)| *n);
    let mut frames = Vec::with_capacity(numbered.len());
    let mut indices = Vec::with_capacity(numbered.len());
    for (n, path) in numbered {
        let frame = read_pgm(&path)?;
        if let Some(first) = frames.first() {
            let first: &Frame = first;
            if frame.width() != first.width() || frame.height() != first.height() {
                bail!(
                    "mixed frame dimensions: {} is {}x{}, expected {}x{}",
                    path.display(),
                    frame.width(),
                    frame.height(),
                    first.width(),
                    first.height()
                );
            }
        }
        frames.push(frame);
        indices.push(n);
    }
    Ok(FrameSequence { frames, indices })
}

/// Write a sequence as `frame_<N>.pgm` files.
pub fn save_sequence(dir: &Path, seq: &FrameSequence) -> Result<()> {
    fs::create_dir_all(dir)?;
    for (frame, &n) in seq.frames.iter().zip(&seq.indices) {
        write_pgm(&dir.join(format!("frame_{n}.pgm")), frame)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ascii_2x2_hand_file() {
        let text = b"P2\n# tiny\n2 2\n255\n0 255\n0 255\n";
        let f = parse_pgm(text).unwrap();
        assert_eq!(f.get(0, 0), 0.0);
        assert_eq!(f.get(0, 1), 1.0);
        assert_eq!(f.get(1, 0), 0.0);
        assert_eq!(f.get(1, 1), 1.0);
    }

    #[test]
    fn p2_and_p5_decode_identically() {
        let text = b"P2\n3 2\n255\n0 10 20\n100 200 255\n";
        let ascii = parse_pgm(text).unwrap();
        let mut binary = b"P5\n3 2\n255\n".to_vec();
        binary.extend([0u8, 10, 20, 100, 200, 255]);
        assert_eq!(ascii, parse_pgm(&binary).unwrap());
    }

    #[test]
    fn round_trip_preserves_8bit_values() {
        let mut f = Frame::filled(4, 5, 0.0);
        for (i, p) in f.pixels_mut().iter_mut().enumerate() {
            *p = (i as f64 * 13.0 % 256.0) / 255.0;
        }
        let back = parse_pgm(&encode_pgm(&f)).unwrap();
        assert_eq!(back, f);
        // And a second trip is bit-identical.
        assert_eq!(encode_pgm(&back), encode_pgm(&f));
    }

    #[test]
    fn rejects_malformed_headers() {
        assert!(parse_pgm(b"P7\n2 2\n255\n").is_err());
        assert!(parse_pgm(b"P2\n2\n255\n").is_err());
        assert!(parse_pgm(b"P2\n2 2\n70000\n0 0 0 0").is_err());
        assert!(parse_pgm(b"P5\n2 2\n255\nab").is_err());
    }

    #[test]
    fn sequence_io_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let frames: Vec<Frame> = (0..3)
            .map(|k| {
                let mut f = Frame::filled(3, 4, 0.0);
                for (i, p) in f.pixels_mut().iter_mut().enumerate() {
                    *p = ((i + k) % 7) as f64 / 7.0;
                }
                f
            })
            .collect();
        let seq = FrameSequence { frames, indices: vec![2, 5, 9] };
        save_sequence(dir.path(), &seq).unwrap();
        let back = load_sequence(dir.path()).unwrap();
        assert_eq!(back.indices, vec![2, 5, 9]);
        // Loading re-quantizes, so compare via a second save.
        for (a, b) in back.frames.iter().zip(&seq.frames) {
            assert_eq!(encode_pgm(a), encode_pgm(b));
        }
    }

    #[test]
    fn empty_directory_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        assert!(load_sequence(dir.path()).is_err());
    }

    #[test]
    fn mixed_dimensions_are_an_error() {
        let dir = tempfile::tempdir().unwrap();
        write_pgm(&dir.path().join("frame_0.pgm"), &Frame::filled(2, 2, 0.5)).unwrap();
        write_pgm(&dir.path().join("frame_1.pgm"), &Frame::filled(3, 2, 0.5)).unwrap();
        assert!(load_sequence(dir.path()).is_err());
    }
}
