//! Embedded dense linear-program solver and the ℓ¹-minimization layer on
//! top of it: basis pursuit, support/sign detection, and uniqueness testing.
//!
//! The solver is a Mehrotra predictor-corrector interior-point method (see
//! [`ipm`]); problems are converted to standard form internally. Intended
//! for dense problems up to a couple thousand variables.

mod ipm;

use crate::numerics::{least_norm_solution, LinAlgError, Matrix, Vector};
use ipm::{solve_standard, IpmOutcome, StandardLp};
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default residual tolerance for [`solve_lp`].
pub const DEFAULT_LP_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Error)]
pub enum LpError {
    #[error("problem is infeasible")]
    Infeasible,
    #[error("problem is unbounded")]
    Unbounded,
    #[error("iteration limit reached; best residuals {residuals:?}")]
    MaxIterations {
        best: Box<LpSolution>,
        residuals: (f64, f64, f64),
    },
    #[error("malformed problem: {0}")]
    Shape(String),
    #[error("index {index} admits both strictly positive and strictly negative minimizers")]
    SignConflict { index: usize },
    #[error(transparent)]
    LinAlg(#[from] LinAlgError),
}

/// min cᵀx subject to eq_matrix·x = eq_rhs and lower ≤ x ≤ upper
/// (entries of the bounds may be ±∞).
#[derive(Debug, Clone)]
pub struct LpProblem {
    pub objective: Vector,
    pub eq_matrix: Matrix,
    pub eq_rhs: Vector,
    pub lower: Vector,
    pub upper: Vector,
}

impl LpProblem {
    /// Problem with x ≥ 0 and no upper bounds.
    pub fn nonnegative(objective: Vector, eq_matrix: Matrix, eq_rhs: Vector) -> Self {
        let n = objective.len();
        LpProblem {
            objective,
            eq_matrix,
            eq_rhs,
            lower: Vector::zeros(n),
            upper: Vector(vec![f64::INFINITY; n]),
        }
    }

    fn validate(&self) -> Result<(), LpError> {
        let n = self.objective.len();
        if self.eq_matrix.cols() != n && self.eq_matrix.rows() > 0 {
            return Err(LpError::Shape(format!(
                "objective has {n} entries but matrix has {} columns",
                self.eq_matrix.cols()
            )));
        }
        if self.eq_matrix.rows() != self.eq_rhs.len() {
            return Err(LpError::Shape("rhs length mismatch".into()));
        }
        if self.lower.len() != n || self.upper.len() != n {
            return Err(LpError::Shape("bound length mismatch".into()));
        }
        for j in 0..n {
            if self.lower[j] > self.upper[j] {
                return Err(LpError::Shape(format!("lower > upper at index {j}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LpSolution {
    pub x: Vector,
    pub value: f64,
    /// Scaled (primal, dual, complementarity) residuals at the solution.
    pub residuals: (f64, f64, f64),
    pub iterations: usize,
}

enum VarMap {
    /// x = lower + s
    Shifted { col: usize, lower: f64 },
    /// x = upper − s
    Negated { col: usize, upper: f64 },
    /// x = pos − neg
    Free { pos: usize, neg: usize },
    /// x pinned by lower == upper
    Fixed { value: f64 },
}

/// Solve a general bounded LP to the requested residual tolerance.
pub fn solve_lp(problem: &LpProblem, tol: f64) -> Result<LpSolution, LpError> {
    problem.validate()?;
    let n = problem.objective.len();
    let m_eq = problem.eq_matrix.rows();

    // Standard-form conversion: every variable becomes one or two
    // nonnegative columns, finite two-sided bounds add a slack row.
    let mut maps = Vec::with_capacity(n);
    let mut ncols = 0usize;
    let mut nbox = 0usize;
    for j in 0..n {
        let (l, u) = (problem.lower[j], problem.upper[j]);
        let map = if l == u {
            VarMap::Fixed { value: l }
        } else if l.is_finite() && u.is_finite() {
            nbox += 1;
            let col = ncols;
            ncols += 1;
            VarMap::Shifted { col, lower: l }
        } else if l.is_finite() {
            let col = ncols;
            ncols += 1;
            VarMap::Shifted { col, lower: l }
        } else if u.is_finite() {
            let col = ncols;
            ncols += 1;
            VarMap::Negated { col, upper: u }
        } else {
            let pos = ncols;
            ncols += 2;
            VarMap::Free { pos, neg: pos + 1 }
        };
        maps.push(map);
    }
    // Box slacks go after the structural columns.
    let total_cols = ncols + nbox;
    let total_rows = m_eq + nbox;

    let mut a = DMatrix::<f64>::zeros(total_rows, total_cols);
    let mut b = DVector::<f64>::zeros(total_rows);
    let mut c = DVector::<f64>::zeros(total_cols);
    let mut offset = 0.0;

    for i in 0..m_eq {
        b[i] = problem.eq_rhs[i];
    }
    for (j, map) in maps.iter().enumerate() {
        let cj = problem.objective[j];
        let col_entries: Vec<f64> = (0..m_eq).map(|i| problem.eq_matrix[(i, j)]).collect();
        match map {
            VarMap::Fixed { value } => {
                offset += cj * value;
                for i in 0..m_eq {
                    b[i] -= col_entries[i] * value;
                }
            }
            VarMap::Shifted { col, lower } => {
                offset += cj * lower;
                c[*col] += cj;
                for i in 0..m_eq {
                    a[(i, *col)] = col_entries[i];
                    b[i] -= col_entries[i] * lower;
                }
            }
            VarMap::Negated { col, upper } => {
                offset += cj * upper;
                c[*col] -= cj;
                for i in 0..m_eq {
                    a[(i, *col)] = -col_entries[i];
                    b[i] -= col_entries[i] * upper;
                }
            }
            VarMap::Free { pos, neg } => {
                c[*pos] += cj;
                c[*neg] -= cj;
                for i in 0..m_eq {
                    a[(i, *pos)] = col_entries[i];
                    a[(i, *neg)] = -col_entries[i];
                }
            }
        }
    }
    // Rows s + t = width for boxed variables.
    let mut box_row = m_eq;
    let mut box_slack = ncols;
    for (j, map) in maps.iter().enumerate() {
        let (l, u) = (problem.lower[j], problem.upper[j]);
        if l.is_finite() && u.is_finite() && l < u {
            if let VarMap::Shifted { col, .. } = map {
                a[(box_row, *col)] = 1.0;
                a[(box_row, box_slack)] = 1.0;
                b[box_row] = u - l;
                box_row += 1;
                box_slack += 1;
            }
        }
    }

    let std_lp = StandardLp { a, b, c };
    let outcome = solve_standard(&std_lp, tol);
    let build = |p: &ipm::IpmPoint| {
        let mut x = Vector::zeros(n);
        for (j, map) in maps.iter().enumerate() {
            x[j] = match map {
                VarMap::Fixed { value } => *value,
                VarMap::Shifted { col, lower } => lower + p.x[*col],
                VarMap::Negated { col, upper } => upper - p.x[*col],
                VarMap::Free { pos, neg } => p.x[*pos] - p.x[*neg],
            };
        }
        let value = problem.objective.dot(&x);
        let _ = offset;
        LpSolution {
            x,
            value,
            residuals: p.residuals,
            iterations: p.iterations,
        }
    };
    match outcome {
        IpmOutcome::Optimal(p) => Ok(build(&p)),
        IpmOutcome::Infeasible => Err(LpError::Infeasible),
        IpmOutcome::Unbounded => Err(LpError::Unbounded),
        IpmOutcome::MaxIterations(p) => {
            let residuals = p.residuals;
            Err(LpError::MaxIterations {
                best: Box::new(build(&p)),
                residuals,
            })
        }
    }
}

/// An ℓ¹ minimizer with its certificate data.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct L1Certificate {
    pub minimizer: Vector,
    /// Optimal ℓ¹ norm.
    pub value: f64,
    /// Support: indices where some minimizer is nonzero (0-based).
    pub support: Vec<usize>,
    /// Shared sign pattern; 0 exactly off the support.
    pub sign: Vec<i8>,
    pub unique: bool,
    /// True once `support`/`sign` describe the whole minimizer set rather
    /// than the single returned point.
    pub support_is_lmin_support: bool,
}

impl L1Certificate {
    pub fn support_complement(&self) -> Vec<usize> {
        let d = self.minimizer.len();
        let mut in_support = vec![false; d];
        for &i in &self.support {
            in_support[i] = true;
        }
        (0..d).filter(|&i| !in_support[i]).collect()
    }
}

/// min ‖x‖₁ subject to Ax = y, via the split x = p − q with p, q ≥ 0.
///
/// Feasibility is checked first through the least-norm solve; the returned
/// certificate has `unique` unset (false) and support/sign read off the
/// single minimizer. Use [`support_and_sign`] or [`l1_certificate`] for the
/// minimizer-set versions.
pub fn basis_pursuit(a: &Matrix, y: &Vector) -> Result<L1Certificate, LpError> {
    least_norm_solution(a, y, 1e-8)?;
    let (n, d) = (a.rows(), a.cols());
    let mut split = Matrix::zeros(n, 2 * d);
    for i in 0..n {
        for j in 0..d {
            split[(i, j)] = a[(i, j)];
            split[(i, d + j)] = -a[(i, j)];
        }
    }
    let problem = LpProblem::nonnegative(Vector(vec![1.0; 2 * d]), split, y.clone());
    let sol = solve_lp(&problem, DEFAULT_LP_TOL)?;
    let minimizer = Vector((0..d).map(|j| sol.x[j] - sol.x[d + j]).collect());
    let value = minimizer.norm_l1();
    let thr = 1e-7 * (1.0 + value);
    let support: Vec<usize> = (0..d).filter(|&j| minimizer[j].abs() > thr).collect();
    let sign: Vec<i8> = (0..d)
        .map(|j| {
            if minimizer[j] > thr {
                1
            } else if minimizer[j] < -thr {
                -1
            } else {
                0
            }
        })
        .collect();
    Ok(L1Certificate {
        minimizer,
        value,
        support,
        sign,
        unique: false,
        support_is_lmin_support: false,
    })
}

/// Per-index extreme values over the minimizer polytope
/// L_min = {Ax = y, ‖x‖₁ ≤ value}.
///
/// For every index both `max xᵢ` and `min xᵢ` are solved; an index is in
/// the support when either extreme moves away from zero, its sign is the
/// sign of the nonzero extreme, and the minimizer is unique when no index
/// has any slack. The 2d LPs run in parallel.
pub fn support_and_sign(
    a: &Matrix,
    y: &Vector,
    value: f64,
) -> Result<(Vec<usize>, Vec<i8>, bool), LpError> {
    let (n, d) = (a.rows(), a.cols());
    // Inflate the ball slightly so solver-level error in `value` cannot
    // make the polytope empty.
    let ball = value + 1e-9 * (1.0 + value);
    // Variables: p (d), q (d), slack t. Rows: A(p−q) = y, Σ(p+q) + t = ball.
    let mut eq = Matrix::zeros(n + 1, 2 * d + 1);
    let mut rhs = Vector::zeros(n + 1);
    for i in 0..n {
        for j in 0..d {
            eq[(i, j)] = a[(i, j)];
            eq[(i, d + j)] = -a[(i, j)];
        }
        rhs[i] = y[i];
    }
    for j in 0..2 * d {
        eq[(n, j)] = 1.0;
    }
    eq[(n, 2 * d)] = 1.0;
    rhs[n] = ball;

    // The feasible set is thin in the ball direction (its width is the
    // inflation above), which can stall the interior point just short of
    // full tolerance. A best-effort iterate two orders inside the 1e-7
    // detection threshold is still conclusive for support membership.
    let solve_tolerant = |problem: &LpProblem| -> Result<LpSolution, LpError> {
        match solve_lp(problem, DEFAULT_LP_TOL) {
            Err(LpError::MaxIterations { best, residuals })
                if residuals.0.max(residuals.1).max(residuals.2) <= 1e-7 =>
            {
                Ok(*best)
            }
            other => other,
        }
    };
    let extremes: Result<Vec<(f64, f64)>, LpError> = (0..d)
        .into_par_iter()
        .map(|j| {
            let mut c_max = Vector::zeros(2 * d + 1);
            c_max[j] = -1.0;
            c_max[d + j] = 1.0;
            let hi = solve_tolerant(&LpProblem::nonnegative(c_max, eq.clone(), rhs.clone()))?;
            let mut c_min = Vector::zeros(2 * d + 1);
            c_min[j] = 1.0;
            c_min[d + j] = -1.0;
            let lo = solve_tolerant(&LpProblem::nonnegative(c_min, eq.clone(), rhs.clone()))?;
            Ok((-hi.value, lo.value))
        })
        .collect();
    let extremes = extremes?;

    let thr = 1e-7 * (1.0 + value);
    let mut support = Vec::new();
    let mut sign = vec![0i8; d];
    let mut unique = true;
    for (j, &(max_j, min_j)) in extremes.iter().enumerate() {
        let pos = max_j > thr;
        let neg = min_j < -thr;
        if pos && neg {
            return Err(LpError::SignConflict { index: j });
        }
        if pos || neg {
            support.push(j);
            sign[j] = if pos { 1 } else { -1 };
        }
        if max_j - min_j > thr {
            unique = false;
        }
    }
    Ok((support, sign, unique))
}

/// Basis pursuit followed by support/sign/uniqueness detection, merged into
/// one certificate describing the whole minimizer set.
pub fn l1_certificate(a: &Matrix, y: &Vector) -> Result<L1Certificate, LpError> {
    let base = basis_pursuit(a, y)?;
    let (support, sign, unique) = support_and_sign(a, y, base.value)?;
    let mut minimizer = base.minimizer;
    // Entries that are numerically zero get flushed so the sign invariant
    // σᵢ·g*ᵢ ≥ 0 holds exactly.
    let flush = 1e-10 * (1.0 + base.value);
    for v in minimizer.0.iter_mut() {
        if v.abs() <= flush {
            *v = 0.0;
        }
    }
    for (j, &s) in sign.iter().enumerate() {
        if (s as f64) * minimizer[j] < 0.0 {
            return Err(LpError::SignConflict { index: j });
        }
    }
    let value = minimizer.norm_l1();
    Ok(L1Certificate {
        minimizer,
        value,
        support,
        sign,
        unique,
        support_is_lmin_support: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inf() -> f64 {
        f64::INFINITY
    }

    #[test]
    fn box_minimum() {
        let p = LpProblem {
            objective: Vector(vec![1.0]),
            eq_matrix: Matrix::zeros(0, 1),
            eq_rhs: Vector::zeros(0),
            lower: Vector(vec![0.0]),
            upper: Vector(vec![1.0]),
        };
        let sol = solve_lp(&p, 1e-9).unwrap();
        assert!(sol.x[0].abs() < 1e-8);
        assert!(sol.value.abs() < 1e-8);
    }

    #[test]
    fn forced_value_on_simplex() {
        let p = LpProblem::nonnegative(
            Vector(vec![1.0, 1.0]),
            Matrix::from_row_major(1, 2, &[1.0, 1.0]),
            Vector(vec![1.0]),
        );
        let sol = solve_lp(&p, 1e-9).unwrap();
        assert!((sol.value - 1.0).abs() < 1e-8);
    }

    #[test]
    fn upper_bounded_maximization() {
        let p = LpProblem {
            objective: Vector(vec![-1.0]),
            eq_matrix: Matrix::zeros(0, 1),
            eq_rhs: Vector::zeros(0),
            lower: Vector(vec![-inf()]),
            upper: Vector(vec![2.0]),
        };
        let sol = solve_lp(&p, 1e-9).unwrap();
        assert!((sol.x[0] - 2.0).abs() < 1e-8);
        assert!((sol.value + 2.0).abs() < 1e-8);
    }

    #[test]
    fn detects_unbounded() {
        let p = LpProblem::nonnegative(
            Vector(vec![-1.0, 0.0]),
            Matrix::from_row_major(1, 2, &[1.0, -1.0]),
            Vector(vec![0.0]),
        );
        assert!(matches!(solve_lp(&p, 1e-9), Err(LpError::Unbounded)));
    }

    #[test]
    fn detects_unbounded_without_rows() {
        let p = LpProblem::nonnegative(Vector(vec![-1.0]), Matrix::zeros(0, 1), Vector::zeros(0));
        assert!(matches!(solve_lp(&p, 1e-9), Err(LpError::Unbounded)));
    }

    #[test]
    fn detects_infeasible() {
        // x₁ = −1 with x ≥ 0.
        let p = LpProblem::nonnegative(
            Vector(vec![1.0]),
            Matrix::from_row_major(1, 1, &[1.0]),
            Vector(vec![-1.0]),
        );
        assert!(matches!(solve_lp(&p, 1e-9), Err(LpError::Infeasible)));
    }

    #[test]
    fn free_variable_equality() {
        // min x₂ s.t. x₁ + x₂ = 3, x₁ ≤ 1, x₂ free: x₁ = 1, x₂ = 2.
        let p = LpProblem {
            objective: Vector(vec![0.0, 1.0]),
            eq_matrix: Matrix::from_row_major(1, 2, &[1.0, 1.0]),
            eq_rhs: Vector(vec![3.0]),
            lower: Vector(vec![-inf(), -inf()]),
            upper: Vector(vec![1.0, inf()]),
        };
        let sol = solve_lp(&p, 1e-9).unwrap();
        assert!((sol.x[0] - 1.0).abs() < 1e-7);
        assert!((sol.x[1] - 2.0).abs() < 1e-7);
    }

    #[test]
    fn fixed_variable() {
        let p = LpProblem {
            objective: Vector(vec![1.0, 1.0]),
            eq_matrix: Matrix::from_row_major(1, 2, &[1.0, 1.0]),
            eq_rhs: Vector(vec![2.0]),
            lower: Vector(vec![0.5, 0.0]),
            upper: Vector(vec![0.5, inf()]),
        };
        let sol = solve_lp(&p, 1e-9).unwrap();
        assert_eq!(sol.x[0], 0.5);
        assert!((sol.x[1] - 1.5).abs() < 1e-8);
    }

    #[test]
    fn basis_pursuit_line() {
        let a = Matrix::from_row_major(1, 2, &[1.0, 2.0]);
        let cert = basis_pursuit(&a, &Vector(vec![2.0])).unwrap();
        assert!((cert.value - 1.0).abs() < 1e-7);
        assert!(cert.minimizer[0].abs() < 1e-7);
        assert!((cert.minimizer[1] - 1.0).abs() < 1e-7);
    }

    #[test]
    fn basis_pursuit_segment_value() {
        let a = Matrix::from_row_major(1, 2, &[1.0, 1.0]);
        let cert = basis_pursuit(&a, &Vector(vec![1.0])).unwrap();
        assert!((cert.value - 1.0).abs() < 1e-7);
        // Any convex combination of e₁ and e₂ attains the value.
        assert!(cert.minimizer[0] >= -1e-8 && cert.minimizer[1] >= -1e-8);
        assert!((cert.minimizer[0] + cert.minimizer[1] - 1.0).abs() < 1e-7);
    }

    #[test]
    fn basis_pursuit_zero_rhs() {
        let a = Matrix::from_row_major(1, 3, &[1.0, -2.0, 0.5]);
        let cert = basis_pursuit(&a, &Vector(vec![0.0])).unwrap();
        assert!(cert.value < 1e-8);
        assert!(cert.minimizer.norm_inf() < 1e-8);
    }

    #[test]
    fn basis_pursuit_infeasible() {
        let a = Matrix::from_row_major(2, 1, &[1.0, 0.0]);
        let err = basis_pursuit(&a, &Vector(vec![0.0, 1.0])).unwrap_err();
        assert!(matches!(
            err,
            LpError::LinAlg(LinAlgError::Infeasible { .. })
        ));
    }

    #[test]
    fn support_and_sign_unique_line() {
        let a = Matrix::from_row_major(1, 2, &[1.0, 2.0]);
        let (s, sigma, unique) = support_and_sign(&a, &Vector(vec![2.0]), 1.0).unwrap();
        assert_eq!(s, vec![1]);
        assert_eq!(sigma, vec![0, 1]);
        assert!(unique);
    }

    #[test]
    fn support_and_sign_segment() {
        let a = Matrix::from_row_major(1, 2, &[1.0, 1.0]);
        let (s, sigma, unique) = support_and_sign(&a, &Vector(vec![1.0]), 1.0).unwrap();
        assert_eq!(s, vec![0, 1]);
        assert_eq!(sigma, vec![1, 1]);
        assert!(!unique);
    }

    #[test]
    fn support_and_sign_negative_side() {
        let a = Matrix::from_row_major(1, 2, &[1.0, 2.0]);
        let (s, sigma, unique) = support_and_sign(&a, &Vector(vec![-2.0]), 1.0).unwrap();
        assert_eq!(s, vec![1]);
        assert_eq!(sigma, vec![0, -1]);
        assert!(unique);
    }

    #[test]
    fn optimal_value_invariant_under_scaling_and_permutation() {
        let mut state = 0.77f64;
        let mut next = || {
            state = (state * 997.0 + 0.1234).fract();
            2.0 * state - 1.0
        };
        let (n, d) = (3, 7);
        let entries: Vec<f64> = (0..n * d).map(|_| next()).collect();
        let a = Matrix::from_row_major(n, d, &entries);
        let y = Vector((0..n).map(|_| next()).collect());
        let base = basis_pursuit(&a, &y).unwrap();

        // Row scaling of (A, y).
        let scales = [3.0, 0.25, -7.0];
        let mut a2 = a.clone();
        let mut y2 = y.clone();
        for i in 0..n {
            for j in 0..d {
                a2[(i, j)] *= scales[i];
            }
            y2[i] *= scales[i];
        }
        let scaled = basis_pursuit(&a2, &y2).unwrap();
        assert!((scaled.value - base.value).abs() <= 1e-8 * (1.0 + base.value));

        // Column permutation, with the matching permutation of the minimizer.
        let perm: Vec<usize> = (0..d).map(|j| (j + 3) % d).collect();
        let mut a3 = Matrix::zeros(n, d);
        for i in 0..n {
            for j in 0..d {
                a3[(i, j)] = a[(i, perm[j])];
            }
        }
        let permuted = basis_pursuit(&a3, &y).unwrap();
        assert!((permuted.value - base.value).abs() <= 1e-8 * (1.0 + base.value));
        let unpermuted = {
            let mut x = vec![0.0; d];
            for j in 0..d {
                x[perm[j]] = permuted.minimizer[j];
            }
            Vector(x)
        };
        // Unique instance: minimizers must coincide.
        assert!(unpermuted.sub(&base.minimizer).norm_inf() < 1e-6);
    }

    #[test]
    fn certificate_merges_support_info() {
        let a = Matrix::from_row_major(1, 2, &[1.0, 2.0]);
        let cert = l1_certificate(&a, &Vector(vec![2.0])).unwrap();
        assert!(cert.unique);
        assert!(cert.support_is_lmin_support);
        assert_eq!(cert.support, vec![1]);
        assert_eq!(cert.sign, vec![0, 1]);
        for (j, &s) in cert.sign.iter().enumerate() {
            assert!((s as f64) * cert.minimizer[j] >= 0.0);
        }
        assert_eq!(cert.support_complement(), vec![0]);
    }
}
