//! Dimension reduction: dense random Gaussian matrices and sparse hash
//! (count-sketch style) matrices mapping `d0`-dimensional observations down
//! to `d` dimensions, plus dictionary column normalization.

use alloc::vec;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::{norm2, Mat};
use crate::seed::hash_cell;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProjectionKind {
    RandomGaussian,
    Hash,
}

#[derive(Debug, Clone, PartialEq)]
enum ProjectionData {
    Dense(Mat),
    /// Per input column: `(row, sign)` entries, at most one per row.
    Sparse(Vec<Vec<(u32, i8)>>),
}

/// A `d x d0` dimension-reduction matrix. Immutable once built; the same
/// `(kind, d, d0, seed, num_seeds)` always reproduces the same entries.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionMatrix {
    kind: ProjectionKind,
    rows: usize,
    cols: usize,
    seed: u64,
    num_seeds: u32,
    data: ProjectionData,
}

/// Dense `d x d0` matrix with i.i.d. standard normal entries.
pub fn make_random_gaussian(d: usize, d0: usize, seed: u64) -> Result<ProjectionMatrix> {
    if d == 0 || d0 == 0 || d > d0 {
        return Err(Error::InvalidDimension { expected: d0, got: d });
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut data = Vec::with_capacity(d * d0);
    for _ in 0..d * d0 {
        data.push(StandardNormal.sample(&mut rng));
    }
    Ok(ProjectionMatrix {
        kind: ProjectionKind::RandomGaussian,
        rows: d,
        cols: d0,
        seed,
        num_seeds: 1,
        data: ProjectionData::Dense(Mat::from_col_major(d, d0, data)?),
    })
}

/// Sparse hash matrix: for every input column `j` and every seed
/// `s in 1..=S`, the cell `(h_s(j, d), j)` receives sign `2 h_s(j, 2) - 3`.
/// Two seeds landing on the same cell overwrite; the later seed wins.
pub fn make_hash(d: usize, d0: usize, s: u32, seed: u64) -> Result<ProjectionMatrix> {
    if d < 2 || d0 == 0 {
        return Err(Error::InvalidDimension { expected: 2, got: d });
    }
    if s < 1 {
        return Err(Error::InvalidInput("hash projection needs at least one seed"));
    }
    let mut cols = Vec::with_capacity(d0);
    for j in 0..d0 {
        let mut entries: Vec<(u32, i8)> = Vec::with_capacity(s as usize);
        for si in 1..=s {
            let row = hash_cell(seed, si, j as u64, 0, d as u64) as u32;
            let sign = if hash_cell(seed, si, j as u64, 1, 2) == 1 { 1i8 } else { -1i8 };
            match entries.iter_mut().find(|(r, _)| *r == row) {
                Some(e) => e.1 = sign,
                None => entries.push((row, sign)),
            }
        }
        cols.push(entries);
    }
    Ok(ProjectionMatrix {
        kind: ProjectionKind::Hash,
        rows: d,
        cols: d0,
        seed,
        num_seeds: s,
        data: ProjectionData::Sparse(cols),
    })
}

impl ProjectionMatrix {
    pub fn kind(&self) -> ProjectionKind {
        self.kind
    }

    /// Reduced dimension `d`.
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Original dimension `d0`.
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn num_seeds(&self) -> u32 {
        self.num_seeds
    }

    /// Apply the projection: `phi * v`. Sparse matrices cost `O(S * d0)`.
    pub fn project(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.cols {
            return Err(Error::InvalidDimension { expected: self.cols, got: v.len() });
        }
        match &self.data {
            ProjectionData::Dense(m) => m.mul_vec(v),
            ProjectionData::Sparse(cols) => {
                let mut out = vec![0.0; self.rows];
                for (j, entries) in cols.iter().enumerate() {
                    let vj = v[j];
                    if vj == 0.0 {
                        continue;
                    }
                    for &(row, sign) in entries {
                        out[row as usize] += sign as f64 * vj;
                    }
                }
                Ok(out)
            }
        }
    }

    /// Materialize as a dense matrix (diagnostics and dumps).
    pub fn to_dense(&self) -> Mat {
        match &self.data {
            ProjectionData::Dense(m) => m.clone(),
            ProjectionData::Sparse(cols) => {
                let mut m = Mat::zeros(self.rows, self.cols);
                for (j, entries) in cols.iter().enumerate() {
                    for &(row, sign) in entries {
                        m.set(row as usize, j, sign as f64);
                    }
                }
                m
            }
        }
    }

    /// Nonzero entries in dense column order, as `(row, col, value)`.
    pub fn triplets(&self) -> Vec<(usize, usize, f64)> {
        match &self.data {
            ProjectionData::Dense(m) => {
                let mut out = Vec::with_capacity(self.rows * self.cols);
                for j in 0..self.cols {
                    for i in 0..self.rows {
                        out.push((i, j, m.get(i, j)));
                    }
                }
                out
            }
            ProjectionData::Sparse(cols) => {
                let mut out = Vec::new();
                for (j, entries) in cols.iter().enumerate() {
                    let mut sorted = entries.clone();
                    sorted.sort_unstable_by_key(|(r, _)| *r);
                    for (row, sign) in sorted {
                        out.push((row as usize, j, sign as f64));
                    }
                }
                out
            }
        }
    }
}

/// Rescale every column of `m` to unit Euclidean norm. Returns the
/// normalized matrix and the original norms (the scales).
pub fn normalize_columns(m: &Mat) -> Result<(Mat, Vec<f64>)> {
    let mut out = m.clone();
    let mut scales = Vec::with_capacity(m.cols());
    for j in 0..m.cols() {
        let n = norm2(m.col(j));
        if n <= 1e-12 {
            return Err(Error::DegenerateColumn { index: j });
        }
        for v in out.col_mut(j) {
            *v /= n;
        }
        scales.push(n);
    }
    Ok((out, scales))
}
