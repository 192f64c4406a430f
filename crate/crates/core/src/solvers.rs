//! Iterative dynamics.
//!
//! [`mirror_descent`] minimizes ‖y − Ax‖₂² in the dual coordinates of a
//! Bregman potential, starting from the zero dual point so x(0) = 0; its
//! limit realizes the gradient-flow limit point x∞(α). [`factored_gd`] runs
//! plain gradient descent on the depth-D reparameterization
//! x = u^{⊙D} − v^{⊙D} as a verification instrument. [`bregman_1d_oracle`]
//! solves the first-order condition exactly on one-dimensional kernels.
//! [`frank_wolfe_select`] picks the distinguished ℓ¹ minimizer in the
//! non-unique case.

use crate::lp::{solve_lp, L1Certificate, LpError, LpProblem};
use crate::numerics::{brent_root, kernel_basis, Matrix, RootError, Vector, DEFAULT_RANK_TOL};
use crate::potentials::{potential_grad, potential_grad_inverse, Potential, PotentialKind};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum SolverError {
    #[error("backtracking reduced the step below {step_min:.3e} at iteration {iteration} without loss decrease")]
    StepCollapse { iteration: usize, step_min: f64 },
    #[error("loss diverged at iteration {iteration}")]
    Divergence { iteration: usize },
    #[error("oracle requires a one-dimensional kernel, found dimension {found}")]
    KernelDimMismatch { found: usize },
    #[error("minimizer polytope is empty")]
    EmptyPolytope,
    #[error(transparent)]
    Root(#[from] RootError),
    #[error(transparent)]
    Lp(#[from] LpError),
}

/// Step-size and termination policy for the iterative solvers.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SolveConfig {
    /// Initial step size; `None` resolves to 1/(2‖A‖₂²) via power iteration.
    pub step_init: Option<f64>,
    /// Floor below which backtracking gives up.
    pub step_min: f64,
    /// Terminate once ‖y − Ax‖₂² drops below this.
    pub loss_tol: f64,
    pub max_iters: usize,
    /// Loss-history recording stride.
    pub record_every: usize,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            step_init: None,
            step_min: 1e-20,
            loss_tol: 1e-5,
            max_iters: 500_000,
            record_every: 1000,
        }
    }
}

impl SolveConfig {
    pub fn with_loss_tol(mut self, loss_tol: f64) -> Self {
        self.loss_tol = loss_tol;
        self
    }

    pub fn with_max_iters(mut self, max_iters: usize) -> Self {
        self.max_iters = max_iters;
        self
    }

    pub fn with_step_init(mut self, step: f64) -> Self {
        self.step_init = Some(step);
        self
    }

    fn resolve_step(&self, a: &Matrix) -> f64 {
        match self.step_init {
            Some(s) => s,
            None => {
                let norm = a.spectral_norm_estimate();
                if norm > 0.0 {
                    1.0 / (2.0 * norm * norm)
                } else {
                    1.0
                }
            }
        }
    }
}

/// Result of an iterative solve.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveTrace {
    pub final_x: Vector,
    /// ‖y − A·final_x‖₂².
    pub final_loss: f64,
    pub iterations: usize,
    /// (iteration, loss) at the recording stride; nonincreasing.
    pub loss_history: Vec<(usize, f64)>,
    pub converged: bool,
}

fn loss_of(a: &Matrix, y: &Vector, x: &Vector) -> f64 {
    let r = a.residual(x, y);
    r.dot(&r)
}

/// Mirror descent for min ‖y − Ax‖₂² in the geometry of `p`.
///
/// Dual update z ← z − η∇ℒ(x), x = (∇F)^{-1}(z), starting at z = 0. The
/// step halves on any loss increase (and whenever the deep dual iterate
/// would leave (−1, 1)) and cautiously grows ×1.2 after 20 consecutive
/// accepts, never above the initial step.
pub fn mirror_descent(
    a: &Matrix,
    y: &Vector,
    p: &Potential,
    cfg: &SolveConfig,
) -> Result<SolveTrace, SolverError> {
    let step_init = cfg.resolve_step(a);
    let mut eta = step_init;
    let mut z = Vector::zeros(a.cols());
    let mut x = Vector::zeros(a.cols());
    let mut loss = loss_of(a, y, &x);
    let mut history = vec![(0usize, loss)];
    let mut accepts_in_row = 0usize;
    let mut iterations = 0usize;
    let mut converged = loss < cfg.loss_tol;

    let dual_cap = match p.kind() {
        PotentialKind::Shallow => 700.0,
        PotentialKind::Deep => 1.0 - 1e-12,
    };

    while !converged && iterations < cfg.max_iters {
        // ∇ℒ(x) = −2 Aᵀ(y − Ax)
        let grad = a.tr_matvec(&a.residual(&x, y)).scale(-2.0);
        loop {
            let z_cand = z.axpy(-eta, &grad);
            if z_cand.norm_inf() >= dual_cap {
                eta *= 0.5;
                accepts_in_row = 0;
                if eta < cfg.step_min {
                    return Err(SolverError::StepCollapse {
                        iteration: iterations,
                        step_min: cfg.step_min,
                    });
                }
                continue;
            }
            let x_cand =
                potential_grad_inverse(p, &z_cand).expect("dual iterate kept inside the domain");
            let loss_cand = loss_of(a, y, &x_cand);
            if loss_cand.is_finite() && loss_cand < loss {
                z = z_cand;
                x = x_cand;
                loss = loss_cand;
                accepts_in_row += 1;
                if accepts_in_row >= 20 {
                    eta = (eta * 1.2).min(step_init);
                    accepts_in_row = 0;
                }
                break;
            }
            eta *= 0.5;
            accepts_in_row = 0;
            if eta < cfg.step_min {
                return Err(SolverError::StepCollapse {
                    iteration: iterations,
                    step_min: cfg.step_min,
                });
            }
        }
        iterations += 1;
        if iterations.is_multiple_of(cfg.record_every) {
            history.push((iterations, loss));
        }
        converged = loss < cfg.loss_tol;
    }
    if history.last().map(|&(i, _)| i) != Some(iterations) {
        history.push((iterations, loss));
    }
    Ok(SolveTrace {
        final_loss: loss_of(a, y, &x),
        final_x: x,
        iterations,
        loss_history: history,
        converged,
    })
}

/// Exact Bregman minimizer over a one-dimensional kernel.
///
/// With ker A = span{n} and A·g0 = y, the minimizer is g0 + t·n where t is
/// the root of the strictly increasing φ(t) = ⟨∇F(g0 + t·n), n⟩. The root
/// is refined to machine precision.
pub fn bregman_1d_oracle(
    a: &Matrix,
    y: &Vector,
    p: &Potential,
    g0: &Vector,
) -> Result<Vector, SolverError> {
    let kernel = kernel_basis(a, DEFAULT_RANK_TOL);
    if kernel.dim() != 1 {
        return Err(SolverError::KernelDimMismatch {
            found: kernel.dim(),
        });
    }
    debug_assert!(a.residual(g0, y).norm_l2() <= 1e-8 * (1.0 + y.norm_l2()));
    let n = &kernel.vectors()[0];
    let phi = |t: f64| potential_grad(p, &g0.axpy(t, n)).dot(n);

    let mut t_max = 1.0 + g0.norm_inf();
    let mut expansions = 0;
    while phi(-t_max).signum() == phi(t_max).signum() && phi(t_max) != 0.0 {
        t_max *= 2.0;
        expansions += 1;
        if expansions > 200 {
            return Err(RootError::NoBracket {
                f_lo: phi(-t_max),
                f_hi: phi(t_max),
            }
            .into());
        }
    }
    let t = brent_root(phi, -t_max, t_max, 0.0)?;
    Ok(g0.axpy(t, n))
}

/// Gradient descent on the reparameterized objective
/// ‖y − A(u^{⊙D} − v^{⊙D})‖₂², initialized at u₀ = v₀ = α^{1/D}·1 so that
/// x = 0 exactly at iteration zero. A verification instrument, not a
/// production solver.
pub fn factored_gd(
    a: &Matrix,
    y: &Vector,
    depth: u32,
    alpha: f64,
    cfg: &SolveConfig,
) -> Result<SolveTrace, SolverError> {
    assert!(depth >= 2, "factored parameterization needs depth >= 2");
    assert!(alpha > 0.0);
    let d = a.cols();
    let dd = depth as i32;
    let init = alpha.powf(1.0 / depth as f64);
    let mut u = vec![init; d];
    let mut v = vec![init; d];
    let x_of = |u: &[f64], v: &[f64]| {
        Vector(
            u.iter()
                .zip(v)
                .map(|(ui, vi)| ui.powi(dd) - vi.powi(dd))
                .collect(),
        )
    };

    let step_init = cfg.resolve_step(a);
    let mut eta = step_init;
    let mut x = x_of(&u, &v);
    let mut loss = loss_of(a, y, &x);
    let initial_loss = loss;
    let mut history = vec![(0usize, loss)];
    let mut accepts_in_row = 0usize;
    let mut iterations = 0usize;
    let mut converged = loss < cfg.loss_tol;

    while !converged && iterations < cfg.max_iters {
        let w = a.tr_matvec(&a.residual(&x, y)); // Aᵀ(y − Ax)
        let two_d = 2.0 * depth as f64;
        let grad_u: Vec<f64> = (0..d).map(|j| -two_d * w[j] * u[j].powi(dd - 1)).collect();
        let grad_v: Vec<f64> = (0..d).map(|j| two_d * w[j] * v[j].powi(dd - 1)).collect();
        loop {
            let u_cand: Vec<f64> = (0..d).map(|j| u[j] - eta * grad_u[j]).collect();
            let v_cand: Vec<f64> = (0..d).map(|j| v[j] - eta * grad_v[j]).collect();
            let x_cand = x_of(&u_cand, &v_cand);
            let loss_cand = loss_of(a, y, &x_cand);
            if loss_cand.is_finite() && loss_cand < loss {
                u = u_cand;
                v = v_cand;
                x = x_cand;
                loss = loss_cand;
                accepts_in_row += 1;
                if accepts_in_row >= 20 {
                    eta = (eta * 1.2).min(step_init);
                    accepts_in_row = 0;
                }
                break;
            }
            if eta < cfg.step_min {
                if loss_cand > 1e6 * (1.0 + initial_loss) || !loss_cand.is_finite() {
                    return Err(SolverError::Divergence {
                        iteration: iterations,
                    });
                }
                return Err(SolverError::StepCollapse {
                    iteration: iterations,
                    step_min: cfg.step_min,
                });
            }
            eta *= 0.5;
            accepts_in_row = 0;
        }
        iterations += 1;
        if iterations.is_multiple_of(cfg.record_every) {
            history.push((iterations, loss));
        }
        converged = loss < cfg.loss_tol;
    }
    if history.last().map(|&(i, _)| i) != Some(iterations) {
        history.push((iterations, loss));
    }
    Ok(SolveTrace {
        final_loss: loss_of(a, y, &x),
        final_x: x,
        iterations,
        loss_history: history,
        converged,
    })
}

/// The convex surrogate minimized over L_min to select the distinguished
/// ℓ¹ minimizer: negative entropy for depth 2, minus the ℓ^{2/D} power sum
/// for depth D ≥ 3.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelectionObjective {
    ShallowEntropy,
    DeepPower(u32),
}

impl SelectionObjective {
    pub fn for_depth(depth: u32) -> Self {
        if depth == 2 {
            SelectionObjective::ShallowEntropy
        } else {
            SelectionObjective::DeepPower(depth)
        }
    }
}

/// The minimizer polytope L_min = {Ax = y, x_{Sᶜ} = 0, σ⊙x ≥ 0, ⟨σ, x⟩ = c}
/// in the reduced coordinates w = σ_S ⊙ x_S ≥ 0.
#[derive(Debug, Clone)]
pub struct LminPolytope {
    reduced: Matrix,
    rhs: Vector,
    support: Vec<usize>,
    sign: Vec<i8>,
    dim: usize,
}

impl LminPolytope {
    /// Assemble from a certificate carrying the minimizer-set support and
    /// sign data (see [`crate::lp::l1_certificate`]).
    pub fn from_certificate(a: &Matrix, y: &Vector, cert: &L1Certificate) -> Self {
        let s = &cert.support;
        let n = a.rows();
        let mut reduced = Matrix::zeros(n + 1, s.len());
        let mut rhs = Vector::zeros(n + 1);
        for (col, &j) in s.iter().enumerate() {
            let sj = cert.sign[j] as f64;
            for i in 0..n {
                reduced[(i, col)] = sj * a[(i, j)];
            }
            reduced[(n, col)] = 1.0;
        }
        for i in 0..n {
            rhs[i] = y[i];
        }
        rhs[n] = cert.value;
        LminPolytope {
            reduced,
            rhs,
            support: s.clone(),
            sign: cert.sign.clone(),
            dim: a.cols(),
        }
    }

    fn lift(&self, w: &[f64]) -> Vector {
        let mut x = Vector::zeros(self.dim);
        for (col, &j) in self.support.iter().enumerate() {
            x[j] = (self.sign[j] as f64) * w[col];
        }
        x
    }

    fn linear_minimizer(&self, grad: &[f64]) -> Result<Vec<f64>, SolverError> {
        let problem = LpProblem::nonnegative(
            Vector::from_slice(grad),
            self.reduced.clone(),
            self.rhs.clone(),
        );
        match solve_lp(&problem, 1e-9) {
            Ok(sol) => Ok(sol.x.0),
            Err(LpError::Infeasible) => Err(SolverError::EmptyPolytope),
            Err(e) => Err(e.into()),
        }
    }
}

const GRAD_CLAMP: f64 = 1e12;
const FW_MAX_ITERS: usize = 100_000;

fn selection_grad(objective: SelectionObjective, w: &[f64]) -> Vec<f64> {
    match objective {
        SelectionObjective::ShallowEntropy => w
            .iter()
            .map(|&wi| {
                if wi <= 0.0 {
                    -GRAD_CLAMP
                } else {
                    wi.ln().clamp(-GRAD_CLAMP, GRAD_CLAMP)
                }
            })
            .collect(),
        SelectionObjective::DeepPower(depth) => {
            let e = 2.0 / depth as f64;
            w.iter()
                .map(|&wi| {
                    if wi <= 0.0 {
                        -GRAD_CLAMP
                    } else {
                        (-e * wi.powf(e - 1.0)).clamp(-GRAD_CLAMP, GRAD_CLAMP)
                    }
                })
                .collect()
        }
    }
}

/// Frank–Wolfe over L_min with an LP linear-minimization oracle and exact
/// line search, stopping at duality gap ≤ `tol`.
///
/// The entropy/power objectives are nonsmooth only at the boundary, where
/// the gradient is clamped; the optimum itself has full support on S.
pub fn frank_wolfe_select(
    polytope: &LminPolytope,
    objective: SelectionObjective,
    tol: f64,
) -> Result<Vector, SolverError> {
    let k = polytope.support.len();
    if k == 0 {
        return Err(SolverError::EmptyPolytope);
    }
    // Interior starting point: the zero-objective LP lands near the
    // analytic center of the polytope.
    let mut w = polytope.linear_minimizer(&vec![0.0; k])?;
    for _ in 0..FW_MAX_ITERS {
        let grad = selection_grad(objective, &w);
        let vertex = polytope.linear_minimizer(&grad)?;
        let gap: f64 = (0..k).map(|i| grad[i] * (w[i] - vertex[i])).sum();
        if gap <= tol {
            break;
        }
        let dir: Vec<f64> = (0..k).map(|i| vertex[i] - w[i]).collect();
        // Exact line search: the directional derivative is increasing in γ.
        let dphi = |gamma: f64| {
            let point: Vec<f64> = (0..k).map(|i| w[i] + gamma * dir[i]).collect();
            let g = selection_grad(objective, &point);
            (0..k).map(|i| g[i] * dir[i]).sum::<f64>()
        };
        let gamma = if dphi(1.0) <= 0.0 {
            1.0
        } else {
            brent_root(dphi, 0.0, 1.0, 1e-12).unwrap_or(0.5)
        };
        let gamma = gamma.clamp(0.0, 1.0);
        if gamma == 0.0 {
            break;
        }
        for i in 0..k {
            w[i] += gamma * dir[i];
            w[i] = w[i].max(0.0);
        }
    }
    Ok(polytope.lift(&w))
}
