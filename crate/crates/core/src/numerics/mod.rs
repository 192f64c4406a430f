//! Dense real linear algebra and scalar numerics shared by every module.
//!
//! Everything here operates on plain `f64` storage. Matrices are row-major
//! and small (hundreds of rows/columns), so robustness wins over speed:
//! kernel bases and least-norm solves go through a full SVD, roots through
//! Brent's method, integrals through adaptive Simpson.

mod quad;
mod roots;

pub use quad::{adaptive_quadrature, QuadError};
pub use roots::{brent_root, RootError};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default relative cutoff below which singular values count as zero.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum LinAlgError {
    #[error("system Ax = y is infeasible: residual {residual:.3e} exceeds {allowed:.3e}")]
    Infeasible { residual: f64, allowed: f64 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("non-finite entry encountered in {0}")]
    NonFinite(&'static str),
}

/// Dense real vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Vector(pub Vec<f64>);

impl Vector {
    pub fn zeros(len: usize) -> Self {
        Vector(vec![0.0; len])
    }

    pub fn from_slice(entries: &[f64]) -> Self {
        Vector(entries.to_vec())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.0.iter()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    pub fn dot(&self, other: &Vector) -> f64 {
        debug_assert_eq!(self.len(), other.len());
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    pub fn norm_l1(&self) -> f64 {
        self.0.iter().map(|v| v.abs()).sum()
    }

    pub fn norm_l2(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn norm_inf(&self) -> f64 {
        self.0.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// self + t * other
    pub fn axpy(&self, t: f64, other: &Vector) -> Vector {
        debug_assert_eq!(self.len(), other.len());
        Vector(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a + t * b)
                .collect(),
        )
    }

    pub fn sub(&self, other: &Vector) -> Vector {
        self.axpy(-1.0, other)
    }

    pub fn scale(&self, t: f64) -> Vector {
        Vector(self.0.iter().map(|a| a * t).collect())
    }
}

impl std::ops::Index<usize> for Vector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl std::ops::IndexMut<usize> for Vector {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.0[i]
    }
}

impl From<Vec<f64>> for Vector {
    fn from(v: Vec<f64>) -> Self {
        Vector(v)
    }
}

/// Dense real matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    entries: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            entries: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    /// Build from a row-major flat slice. Panics if the length is wrong.
    pub fn from_row_major(rows: usize, cols: usize, entries: &[f64]) -> Self {
        assert_eq!(entries.len(), rows * cols, "entry count mismatch");
        Matrix {
            rows,
            cols,
            entries: entries.to_vec(),
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        let mut entries = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            entries.extend_from_slice(row);
        }
        Matrix {
            rows: r,
            cols: c,
            entries,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn is_finite(&self) -> bool {
        self.entries.iter().all(|v| v.is_finite())
    }

    /// A x
    pub fn matvec(&self, x: &Vector) -> Vector {
        debug_assert_eq!(self.cols, x.len());
        let mut out = Vec::with_capacity(self.rows);
        for i in 0..self.rows {
            let row = self.row(i);
            let mut acc = 0.0;
            for (a, b) in row.iter().zip(&x.0) {
                acc += a * b;
            }
            out.push(acc);
        }
        Vector(out)
    }

    /// Aᵀ x
    pub fn tr_matvec(&self, x: &Vector) -> Vector {
        debug_assert_eq!(self.rows, x.len());
        let mut out = vec![0.0; self.cols];
        for i in 0..self.rows {
            let row = self.row(i);
            let xi = x.0[i];
            for (o, a) in out.iter_mut().zip(row) {
                *o += a * xi;
            }
        }
        Vector(out)
    }

    /// Residual y − A x.
    pub fn residual(&self, x: &Vector, y: &Vector) -> Vector {
        y.sub(&self.matvec(x))
    }

    /// Estimate of the spectral norm ‖A‖₂ by power iteration on AᵀA.
    ///
    /// Deterministic start vector; 100 iterations are plenty for the
    /// step-size heuristics this feeds.
    pub fn spectral_norm_estimate(&self) -> f64 {
        if self.rows == 0 || self.cols == 0 {
            return 0.0;
        }
        let mut v = Vector(
            (0..self.cols)
                .map(|j| 1.0 + (j as f64 + 1.0) / (self.cols as f64 + 1.0))
                .collect(),
        );
        let mut norm = v.norm_l2();
        if norm == 0.0 {
            return 0.0;
        }
        v = v.scale(1.0 / norm);
        let mut sigma = 0.0;
        for _ in 0..100 {
            let w = self.tr_matvec(&self.matvec(&v));
            norm = w.norm_l2();
            if norm == 0.0 {
                return 0.0;
            }
            let next = w.scale(1.0 / norm);
            let new_sigma = norm.sqrt();
            if (new_sigma - sigma).abs() <= 1e-13 * new_sigma {
                return new_sigma;
            }
            sigma = new_sigma;
            v = next;
        }
        sigma
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.entries[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.entries[i * self.cols + j]
    }
}

/// An orthonormal basis of a linear subspace of ℝ^ambient_dim.
#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceBasis {
    ambient_dim: usize,
    vectors: Vec<Vector>,
}

impl SubspaceBasis {
    /// Orthonormality tolerance enforced on construction.
    pub const ORTHO_TOL: f64 = 1e-10;

    pub fn empty(ambient_dim: usize) -> Self {
        SubspaceBasis {
            ambient_dim,
            vectors: Vec::new(),
        }
    }

    /// Wrap vectors that are already orthonormal to [`Self::ORTHO_TOL`].
    pub fn new(ambient_dim: usize, vectors: Vec<Vector>) -> Result<Self, LinAlgError> {
        for (i, v) in vectors.iter().enumerate() {
            if v.len() != ambient_dim {
                return Err(LinAlgError::DimensionMismatch(format!(
                    "basis vector {i} has length {} in ambient dimension {ambient_dim}",
                    v.len()
                )));
            }
            if (v.norm_l2() - 1.0).abs() > Self::ORTHO_TOL {
                return Err(LinAlgError::DimensionMismatch(format!(
                    "basis vector {i} is not unit norm"
                )));
            }
            for w in vectors.iter().take(i) {
                if v.dot(w).abs() > Self::ORTHO_TOL {
                    return Err(LinAlgError::DimensionMismatch(format!(
                        "basis vector {i} is not orthogonal to an earlier one"
                    )));
                }
            }
        }
        Ok(SubspaceBasis {
            ambient_dim,
            vectors,
        })
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    pub fn vectors(&self) -> &[Vector] {
        &self.vectors
    }

    /// Map coefficients to the ambient space: Σ cᵢ vᵢ.
    pub fn lift(&self, coeffs: &[f64]) -> Vector {
        debug_assert_eq!(coeffs.len(), self.dim());
        let mut out = Vector::zeros(self.ambient_dim);
        for (c, v) in coeffs.iter().zip(&self.vectors) {
            for (o, e) in out.0.iter_mut().zip(&v.0) {
                *o += c * e;
            }
        }
        out
    }

    /// Coefficients of the orthogonal projection of `x` onto the span.
    pub fn project_coeffs(&self, x: &Vector) -> Vec<f64> {
        self.vectors.iter().map(|v| v.dot(x)).collect()
    }
}

/// Full SVD of A, padded so the complete set of right singular vectors is
/// available even for wide matrices.
pub(crate) struct FullSvd {
    /// Singular values, descending; length = cols of A.
    pub sigma: Vec<f64>,
    /// Right singular vectors (columns of V), matching `sigma`.
    pub v: Vec<Vector>,
    /// Left singular vectors (columns of U) for the original row count.
    pub u: Vec<Vector>,
}

pub(crate) fn full_svd(a: &Matrix) -> FullSvd {
    let n = a.rows();
    let d = a.cols();
    // nalgebra computes the thin SVD; stacking zero rows keeps the singular
    // values and right singular vectors while making V square.
    let side = n.max(d);
    let mut padded = DMatrix::<f64>::zeros(side, d);
    for i in 0..n {
        for j in 0..d {
            padded[(i, j)] = a[(i, j)];
        }
    }
    let svd = padded.svd(true, true);
    let u = svd.u.expect("svd requested u");
    let v_t = svd.v_t.expect("svd requested v_t");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| {
        svd.singular_values[j]
            .partial_cmp(&svd.singular_values[i])
            .unwrap()
    });
    let mut sigma = Vec::with_capacity(d);
    let mut v = Vec::with_capacity(d);
    let mut u_cols = Vec::with_capacity(d);
    for &k in &order {
        sigma.push(svd.singular_values[k]);
        v.push(Vector((0..d).map(|j| v_t[(k, j)]).collect()));
        u_cols.push(Vector((0..n).map(|i| u[(i, k)]).collect()));
    }
    FullSvd {
        sigma,
        v,
        u: u_cols,
    }
}

/// Orthonormal basis of the numerical null space of `A`.
///
/// Singular values at or below `tol·σ_max` are treated as zero. A full-rank
/// square matrix yields an empty basis; a zero matrix yields all of ℝ^d.
pub fn kernel_basis(a: &Matrix, tol: f64) -> SubspaceBasis {
    assert!(tol > 0.0, "tol must be positive");
    let d = a.cols();
    if d == 0 {
        return SubspaceBasis::empty(0);
    }
    if a.rows() == 0 {
        let mut vs = Vec::with_capacity(d);
        for j in 0..d {
            let mut v = Vector::zeros(d);
            v[j] = 1.0;
            vs.push(v);
        }
        return SubspaceBasis {
            ambient_dim: d,
            vectors: vs,
        };
    }
    let svd = full_svd(a);
    let sigma_max = svd.sigma.first().copied().unwrap_or(0.0);
    let cutoff = tol * sigma_max;
    let vectors: Vec<Vector> = svd
        .sigma
        .iter()
        .zip(svd.v)
        .filter(|(s, _)| **s <= cutoff)
        .map(|(_, v)| v)
        .collect();
    SubspaceBasis {
        ambient_dim: d,
        vectors,
    }
}

/// Minimum-Euclidean-norm solution of `Ax = y`.
///
/// Errors with [`LinAlgError::Infeasible`] when the least-squares residual
/// exceeds `tol·(1 + ‖y‖₂)`.
pub fn least_norm_solution(a: &Matrix, y: &Vector, tol: f64) -> Result<Vector, LinAlgError> {
    assert!(tol > 0.0, "tol must be positive");
    if a.rows() != y.len() {
        return Err(LinAlgError::DimensionMismatch(format!(
            "matrix has {} rows, right-hand side has length {}",
            a.rows(),
            y.len()
        )));
    }
    if !a.is_finite() {
        return Err(LinAlgError::NonFinite("matrix"));
    }
    if !y.is_finite() {
        return Err(LinAlgError::NonFinite("right-hand side"));
    }
    let svd = full_svd(a);
    let sigma_max = svd.sigma.first().copied().unwrap_or(0.0);
    let cutoff = DEFAULT_RANK_TOL * sigma_max;
    let mut x = Vector::zeros(a.cols());
    for ((s, v), u) in svd.sigma.iter().zip(&svd.v).zip(&svd.u) {
        if *s > cutoff {
            let coeff =
                u.0.iter()
                    .zip(y.iter())
                    .map(|(ui, yi)| ui * yi)
                    .sum::<f64>()
                    / s;
            for (xi, vi) in x.0.iter_mut().zip(&v.0) {
                *xi += coeff * vi;
            }
        }
    }
    let res = a.residual(&x, y).norm_l2();
    let allowed = tol * (1.0 + y.norm_l2());
    if res > allowed {
        return Err(LinAlgError::Infeasible {
            residual: res,
            allowed,
        });
    }
    Ok(x)
}
