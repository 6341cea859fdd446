//! Greedy sparse recovery: orthogonal matching pursuit with a residual
//! stopping threshold, a hard sparsity cap and a choice between signed and
//! absolute correlation when selecting columns.
//!
//! The signed mode keeps recovered coefficients approximately nonnegative,
//! which is how the tracker emulates a positivity constraint without ever
//! solving a constrained program.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{axpy, dot, norm2, Mat};

/// Threshold below which a candidate column is considered linearly
/// dependent on the current basis and skipped.
const RANK_TOL: f64 = 1e-10;

/// How the most correlated column is chosen in each pursuit step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelectionMode {
    /// `argmax_j <r, a_j>`: favors columns whose coefficient will be
    /// positive.
    Signed,
    /// `argmax_j |<r, a_j>|`: classic OMP selection.
    Absolute,
}

/// A dictionary of unit-norm columns together with the scales removed by
/// normalization.
#[derive(Debug, Clone, PartialEq)]
pub struct Dictionary {
    columns: Mat,
    column_norms: Vec<f64>,
}

impl Dictionary {
    /// Wrap an already column-normalized matrix. Every column must have
    /// unit Euclidean norm to within `1e-10`.
    pub fn from_normalized(columns: Mat, column_norms: Vec<f64>) -> Result<Self> {
        if columns.rows() == 0 || columns.cols() == 0 {
            return Err(Error::InvalidInput("dictionary must be non-empty"));
        }
        if column_norms.len() != columns.cols() {
            return Err(Error::InvalidDimension {
                expected: columns.cols(),
                got: column_norms.len(),
            });
        }
        if !columns.is_finite() {
            return Err(Error::InvalidInput("dictionary contains non-finite entries"));
        }
        for j in 0..columns.cols() {
            if (norm2(columns.col(j)) - 1.0).abs() > 1e-10 {
                return Err(Error::InvalidInput("dictionary column is not unit-norm"));
            }
        }
        Ok(Dictionary { columns, column_norms })
    }

    /// Normalize a raw matrix and wrap it.
    pub fn from_raw(columns: Mat) -> Result<Self> {
        let (normalized, scales) = crate::projection::normalize_columns(&columns)?;
        Dictionary::from_normalized(normalized, scales)
    }

    /// Ambient dimension `d`.
    pub fn dim(&self) -> usize {
        self.columns.rows()
    }

    /// Number of columns `n`.
    pub fn len(&self) -> usize {
        self.columns.cols()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.cols() == 0
    }

    pub fn column(&self, j: usize) -> &[f64] {
        self.columns.col(j)
    }

    pub fn columns(&self) -> &Mat {
        &self.columns
    }

    pub fn column_norms(&self) -> &[f64] {
        &self.column_norms
    }
}

/// Result of a pursuit: the recovered coefficient vector plus bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSolution {
    /// Full-length coefficient vector; zero outside `support`.
    pub coefficients: Vec<f64>,
    /// Selected column indices in selection order, all distinct.
    pub support: Vec<usize>,
    /// Euclidean norm of the final residual.
    pub residual_norm: f64,
    /// Number of pursuit steps taken.
    pub iterations: usize,
}

impl SparseSolution {
    fn zero(n: usize, residual_norm: f64) -> Self {
        SparseSolution {
            coefficients: vec![0.0; n],
            support: Vec::new(),
            residual_norm,
            iterations: 0,
        }
    }

    /// Number of nonzero coefficients.
    pub fn nonzeros(&self) -> usize {
        self.coefficients.iter().filter(|&&c| c != 0.0).count()
    }
}

/// Incrementally grown QR factorization of the selected columns, one column
/// per pursuit step. Modified Gram-Schmidt with a second orthogonalization
/// pass keeps the basis orthonormal to machine precision.
struct IncrementalQr {
    /// Orthonormal basis columns.
    q: Vec<Vec<f64>>,
    /// Upper-triangular factor, stored column by column (`r[k]` has k+1 rows).
    r: Vec<Vec<f64>>,
    /// Accumulated `Q^T y`.
    qty: Vec<f64>,
}

impl IncrementalQr {
    fn new() -> Self {
        IncrementalQr { q: Vec::new(), r: Vec::new(), qty: Vec::new() }
    }

    fn len(&self) -> usize {
        self.q.len()
    }

    /// Try to append a column. Returns `false` (leaving the factorization
    /// untouched) when the column is numerically inside the current span.
    fn try_push(&mut self, col: &[f64], y: &[f64]) -> bool {
        let mut v = col.to_vec();
        let mut rcol = vec![0.0; self.len() + 1];
        // Two Gram-Schmidt passes keep Q orthonormal to machine precision.
        for _pass in 0..2 {
            for (k, qk) in self.q.iter().enumerate() {
                let c = dot(qk, &v);
                rcol[k] += c;
                axpy(-c, qk, &mut v);
            }
        }
        let nrm = norm2(&v);
        if nrm < RANK_TOL {
            return false;
        }
        for vi in v.iter_mut() {
            *vi /= nrm;
        }
        rcol[self.len()] = nrm;
        self.qty.push(dot(&v, y));
        self.q.push(v);
        self.r.push(rcol);
        true
    }

    /// Back-substitute `R x = Q^T y`.
    fn solve(&self) -> Vec<f64> {
        let t = self.len();
        let mut x = vec![0.0; t];
        for k in (0..t).rev() {
            let mut s = self.qty[k];
            for j in k + 1..t {
                s -= self.r[j][k] * x[j];
            }
            x[k] = s / self.r[k][k];
        }
        x
    }

    /// `y - Q Q^T y`, the least-squares residual over the current span.
    fn residual(&self, y: &[f64]) -> Vec<f64> {
        let mut r = y.to_vec();
        for (qk, &c) in self.q.iter().zip(&self.qty) {
            axpy(-c, qk, &mut r);
        }
        r
    }
}

/// Exact least-squares fit `argmin_x ||basis x - y||_2` for a basis of
/// independent columns. A dependent column is reported by index.
pub fn least_squares(basis: &Mat, y: &[f64]) -> Result<Vec<f64>> {
    if y.len() != basis.rows() {
        return Err(Error::InvalidDimension { expected: basis.rows(), got: y.len() });
    }
    if !basis.is_finite() || y.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("least-squares input contains non-finite entries"));
    }
    let mut qr = IncrementalQr::new();
    for j in 0..basis.cols() {
        if !qr.try_push(basis.col(j), y) {
            return Err(Error::RankDeficient { column: j });
        }
    }
    Ok(qr.solve())
}

/// Orthogonal matching pursuit with early stop.
///
/// Each step picks the admissible column with the largest (signed or
/// absolute) correlation to the current residual, refits all selected
/// columns by least squares and recomputes the residual. The pursuit ends
/// as soon as the residual norm drops below `epsilon` or `eta` columns have
/// been selected. Columns already selected, and columns numerically inside
/// the span of the selection, are skipped.
///
/// If `||y|| <= epsilon` the zero solution is returned without iterating.
pub fn omp_solve(
    dict: &Dictionary,
    y: &[f64],
    epsilon: f64,
    eta: usize,
    mode: SelectionMode,
) -> Result<SparseSolution> {
    let d = dict.dim();
    let n = dict.len();
    if y.len() != d {
        return Err(Error::InvalidDimension { expected: d, got: y.len() });
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("observation contains non-finite entries"));
    }
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::InvalidInput("epsilon must be a positive real"));
    }
    if eta == 0 {
        return Err(Error::InvalidInput("eta must be positive"));
    }

    let y_norm = norm2(y);
    if y_norm <= epsilon {
        return Ok(SparseSolution::zero(n, y_norm));
    }

    let mut qr = IncrementalQr::new();
    let mut residual = y.to_vec();
    let mut residual_norm = y_norm;
    // admissible[j]: not yet selected and not known to be span-dependent.
    let mut admissible = vec![true; n];
    let mut scores = vec![0.0; n];
    let mut support = Vec::with_capacity(eta.min(d));
    let mut iterations = 0;

    'pursuit: for _ in 0..eta {
        for (j, s) in scores.iter_mut().enumerate() {
            if admissible[j] {
                let c = dot(&residual, dict.column(j));
                *s = match mode {
                    SelectionMode::Signed => c,
                    SelectionMode::Absolute => c.abs(),
                };
            }
        }
        // Keep taking the best-scoring candidate until one extends the
        // basis; dependent candidates are retired for good.
        loop {
            let mut best: Option<usize> = None;
            for j in 0..n {
                if admissible[j] && best.map_or(true, |b| scores[j] > scores[b]) {
                    best = Some(j);
                }
            }
            let Some(j) = best else { break 'pursuit };
            admissible[j] = false;
            if qr.try_push(dict.column(j), y) {
                support.push(j);
                break;
            }
        }
        iterations += 1;
        residual = qr.residual(y);
        residual_norm = norm2(&residual);
        if residual_norm < epsilon {
            break;
        }
    }

    let fitted = qr.solve();
    let mut coefficients = vec![0.0; n];
    for (&j, &c) in support.iter().zip(&fitted) {
        coefficients[j] = c;
    }
    Ok(SparseSolution { coefficients, support, residual_norm, iterations })
}
