//! Grayscale frames and the shared crop / resample / vectorize pipeline.
//!
//! Every observation and every background template goes through
//! [`crop_resample_vectorize`], so tracked crops and background crops are
//! comparable pixel for pixel.

use alloc::vec;
use alloc::vec::Vec;

use crate::bbox::BoundingBox;
use crate::error::{Error, Result};

/// A grayscale image, row-major, intensities in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    height: usize,
    width: usize,
    data: Vec<f64>,
}

impl Frame {
    pub fn new(height: usize, width: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != height * width {
            return Err(Error::InvalidDimension { expected: height * width, got: data.len() });
        }
        Ok(Frame { height, width, data })
    }

    pub fn filled(height: usize, width: usize, value: f64) -> Self {
        Frame { height, width, data: vec![value; height * width] }
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn get(&self, y: usize, x: usize) -> f64 {
        self.data[y * self.width + x]
    }

    pub fn set(&mut self, y: usize, x: usize, v: f64) {
        self.data[y * self.width + x] = v;
    }

    pub fn pixels(&self) -> &[f64] {
        &self.data
    }

    pub fn pixels_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    fn sample_bilinear(&self, sx: f64, sy: f64) -> f64 {
        let sx = sx.clamp(0.0, (self.width - 1) as f64);
        let sy = sy.clamp(0.0, (self.height - 1) as f64);
        let x0 = libm::floor(sx) as usize;
        let y0 = libm::floor(sy) as usize;
        let x1 = (x0 + 1).min(self.width - 1);
        let y1 = (y0 + 1).min(self.height - 1);
        let fx = sx - x0 as f64;
        let fy = sy - y0 as f64;
        let top = (1.0 - fx) * self.get(y0, x0) + fx * self.get(y0, x1);
        let bot = (1.0 - fx) * self.get(y1, x0) + fx * self.get(y1, x1);
        (1.0 - fy) * top + fy * bot
    }
}

/// Crop `region` from `frame`, bilinearly resample to `out_h x out_w` and
/// flatten row-major. The region is clamped to the frame first; a region
/// with no overlap at all is an error.
///
/// When the clamped region already has the output size the samples land
/// exactly on pixel centers and the crop is a plain copy.
pub fn crop_resample_vectorize(
    frame: &Frame,
    region: BoundingBox,
    out_h: usize,
    out_w: usize,
) -> Result<Vec<f64>> {
    let region = region.clamp_to(frame.width(), frame.height());
    if !region.is_proper() {
        return Err(Error::ZeroOverlap);
    }
    let bw = region.width() as f64;
    let bh = region.height() as f64;
    let mut out = Vec::with_capacity(out_h * out_w);
    for i in 0..out_h {
        let sy = region.t as f64 + (i as f64 + 0.5) * bh / out_h as f64 - 0.5;
        for j in 0..out_w {
            let sx = region.l as f64 + (j as f64 + 0.5) * bw / out_w as f64 - 0.5;
            out.push(frame.sample_bilinear(sx, sy));
        }
    }
    Ok(out)
}
