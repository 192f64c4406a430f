//! Mehrotra predictor-corrector interior-point method for LPs in standard
//! form: min cᵀx subject to Ax = b, x ≥ 0.
//!
//! Dense normal equations with a regularized Cholesky factorization and one
//! step of iterative refinement per solve. Deterministic throughout.

use nalgebra::{Cholesky, DMatrix, DVector};

#[derive(Debug, Clone)]
pub(crate) struct StandardLp {
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    pub c: DVector<f64>,
}

#[derive(Debug, Clone)]
pub(crate) struct IpmPoint {
    pub x: DVector<f64>,
    /// (primal, dual, complementarity), scaled.
    pub residuals: (f64, f64, f64),
    pub iterations: usize,
}

#[derive(Debug, Clone)]
pub(crate) enum IpmOutcome {
    Optimal(IpmPoint),
    Infeasible,
    Unbounded,
    MaxIterations(IpmPoint),
}

const MAX_ITERS: usize = 200;
const BLOWUP: f64 = 1e13;

pub(crate) fn solve_standard(lp: &StandardLp, tol: f64) -> IpmOutcome {
    let m = lp.a.nrows();
    let n = lp.a.ncols();
    debug_assert_eq!(lp.b.len(), m);
    debug_assert_eq!(lp.c.len(), n);

    if n == 0 {
        // Nothing to optimize; feasibility is b = 0.
        let point = IpmPoint {
            x: DVector::zeros(0),
            residuals: (lp.b.norm() / (1.0 + lp.b.norm()), 0.0, 0.0),
            iterations: 0,
        };
        return if lp.b.norm() <= tol * (1.0 + lp.b.norm()) {
            IpmOutcome::Optimal(point)
        } else {
            IpmOutcome::Infeasible
        };
    }
    if m == 0 {
        // Separable: min cᵀx over x ≥ 0.
        if lp.c.iter().any(|&cj| cj < 0.0) {
            return IpmOutcome::Unbounded;
        }
        return IpmOutcome::Optimal(IpmPoint {
            x: DVector::zeros(n),
            residuals: (0.0, 0.0, 0.0),
            iterations: 0,
        });
    }

    let b_scale = 1.0 + lp.b.norm();
    let c_scale = 1.0 + lp.c.norm();

    let (mut x, mut y, mut z) = starting_point(lp);

    let mut best: Option<(f64, IpmPoint)> = None;
    for iter in 0..MAX_ITERS {
        let rp = &lp.b - &lp.a * &x;
        let rd = &lp.c - lp.a.transpose() * &y - &z;
        let mu = x.dot(&z) / n as f64;
        let obj = lp.c.dot(&x);
        let dual_obj = lp.b.dot(&y);
        // Complementarity: duality gap or average pairwise product,
        // whichever is smaller. On degenerate feasible sets the gap floors
        // at the degeneracy scale while μ keeps shrinking.
        let gap = (obj - dual_obj).abs() / (1.0 + obj.abs() + dual_obj.abs());
        let comp = gap.min(mu / (1.0 + obj.abs()));

        let res = (rp.norm() / b_scale, rd.norm() / c_scale, comp);
        let score = res.0.max(res.1).max(res.2);
        if !score.is_finite() {
            return best_or_maxiter(best);
        }
        let point = IpmPoint {
            x: x.clone(),
            residuals: res,
            iterations: iter,
        };
        if best.as_ref().is_none_or(|(s, _)| score < *s) {
            best = Some((score, point.clone()));
        }
        if res.0 <= tol && res.1 <= tol && res.2 <= tol {
            return IpmOutcome::Optimal(point);
        }
        // Complementarity has underflowed; feasibility will not improve
        // from here.
        if mu < 1e-30 {
            return best_or_maxiter(best);
        }
        // Divergence classification: a primal ray means unbounded, a dual
        // ray means infeasible.
        if x.amax() > BLOWUP * b_scale && res.0 <= 1e-6 {
            return IpmOutcome::Unbounded;
        }
        if obj < -BLOWUP * c_scale * b_scale {
            return IpmOutcome::Unbounded;
        }
        if y.amax() > BLOWUP * c_scale {
            return IpmOutcome::Infeasible;
        }

        // d = x / z, elementwise, guarded against extreme ratios.
        let d: DVector<f64> = DVector::from_iterator(
            n,
            x.iter()
                .zip(z.iter())
                .map(|(&xi, &zi)| (xi / zi).clamp(1e-30, 1e30)),
        );
        let normal = normal_matrix(&lp.a, &d);
        let (chol, shift) = match factor(normal) {
            Some(pair) => pair,
            None => {
                return best_or_maxiter(best);
            }
        };
        let refine = shift == 0.0;

        // Affine scoring step.
        let rxs_aff: DVector<f64> =
            DVector::from_iterator(n, x.iter().zip(z.iter()).map(|(&xi, &zi)| -xi * zi));
        let (dx_aff, dy_aff, dz_aff) = kkt_solve(lp, &chol, refine, &d, &x, &z, &rp, &rd, &rxs_aff);
        let alpha_p_aff = max_step(&x, &dx_aff);
        let alpha_d_aff = max_step(&z, &dz_aff);
        let mu_aff = {
            let xa = &x + alpha_p_aff * &dx_aff;
            let za = &z + alpha_d_aff * &dz_aff;
            xa.dot(&za) / n as f64
        };
        let sigma = if mu > 0.0 {
            (mu_aff / mu).powi(3).clamp(1e-8, 1.0)
        } else {
            0.0
        };

        // Corrector with second-order complementarity term.
        let rxs: DVector<f64> = DVector::from_iterator(
            n,
            (0..n).map(|i| sigma * mu - x[i] * z[i] - dx_aff[i] * dz_aff[i]),
        );
        let (mut dx, mut dy, mut dz) = kkt_solve(lp, &chol, refine, &d, &x, &z, &rp, &rd, &rxs);

        let eta = 0.9995_f64.max(1.0 - mu);
        let mut alpha_p = (eta * max_step(&x, &dx)).min(1.0);
        let mut alpha_d = (eta * max_step(&z, &dz)).min(1.0);
        if alpha_p.max(alpha_d) < 1e-12 {
            // The combined direction stalled; the plain affine direction is
            // better conditioned near degenerate optima.
            dx = dx_aff;
            dy = dy_aff;
            dz = dz_aff;
            alpha_p = (eta * max_step(&x, &dx)).min(1.0);
            alpha_d = (eta * max_step(&z, &dz)).min(1.0);
            if alpha_p.max(alpha_d) < 1e-14 {
                return best_or_maxiter(best);
            }
        }
        x += alpha_p * &dx;
        y += alpha_d * &dy;
        z += alpha_d * &dz;
        for xi in x.iter_mut() {
            *xi = xi.max(1e-300);
        }
        for zi in z.iter_mut() {
            *zi = zi.max(1e-300);
        }
    }
    best_or_maxiter(best)
}

fn best_or_maxiter(best: Option<(f64, IpmPoint)>) -> IpmOutcome {
    match best {
        Some((_, p)) => IpmOutcome::MaxIterations(p),
        None => IpmOutcome::Infeasible,
    }
}

fn normal_matrix(a: &DMatrix<f64>, d: &DVector<f64>) -> DMatrix<f64> {
    let m = a.nrows();
    let n = a.ncols();
    let mut out = DMatrix::<f64>::zeros(m, m);
    // A D Aᵀ, exploiting symmetry.
    for i in 0..m {
        for j in i..m {
            let mut acc = 0.0;
            for k in 0..n {
                acc += a[(i, k)] * d[k] * a[(j, k)];
            }
            out[(i, j)] = acc;
            out[(j, i)] = acc;
        }
    }
    out
}

/// Cholesky with escalating diagonal regularization; reports the shift so
/// callers know whether refinement against the unshifted matrix is safe.
fn factor(mut normal: DMatrix<f64>) -> Option<(Cholesky<f64, nalgebra::Dyn>, f64)> {
    let m = normal.nrows();
    let scale = (0..m).map(|i| normal[(i, i)]).fold(0.0f64, f64::max);
    let mut delta = 0.0;
    for _ in 0..8 {
        let mut attempt = normal.clone();
        if delta > 0.0 {
            for i in 0..m {
                attempt[(i, i)] += delta * scale.max(1.0);
            }
        }
        if let Some(c) = Cholesky::new(attempt) {
            return Some((c, delta));
        }
        delta = if delta == 0.0 { 1e-14 } else { delta * 100.0 };
    }
    // Last resort: heavy regularization.
    for i in 0..m {
        normal[(i, i)] += 1e-6 * scale.max(1.0);
    }
    Cholesky::new(normal).map(|c| (c, 1e-6))
}

/// Solve one Newton system given the factored normal matrix.
#[allow(clippy::too_many_arguments)]
fn kkt_solve(
    lp: &StandardLp,
    chol: &Cholesky<f64, nalgebra::Dyn>,
    refine: bool,
    d: &DVector<f64>,
    x: &DVector<f64>,
    z: &DVector<f64>,
    rp: &DVector<f64>,
    rd: &DVector<f64>,
    rxs: &DVector<f64>,
) -> (DVector<f64>, DVector<f64>, DVector<f64>) {
    let n = x.len();
    // rhs = rp + A·D·(rd − rxs/x)
    let inner: DVector<f64> =
        DVector::from_iterator(n, (0..n).map(|i| d[i] * (rd[i] - rxs[i] / x[i])));
    let rhs = rp + &lp.a * &inner;
    let mut dy = chol.solve(&rhs);
    if refine {
        // Iterative refinement recovers digits lost to the ill-conditioned
        // scaling near convergence. Only valid when the factorization was
        // not regularized, otherwise refinement chases a singular system.
        let normal_mul = |v: &DVector<f64>| -> DVector<f64> {
            let t = lp.a.transpose() * v;
            let t = DVector::from_iterator(n, (0..n).map(|i| d[i] * t[i]));
            &lp.a * t
        };
        for _ in 0..2 {
            let resid = &rhs - normal_mul(&dy);
            let correction = chol.solve(&resid);
            dy += &correction;
            if correction.amax() <= 1e-16 * (1.0 + dy.amax()) {
                break;
            }
        }
    }

    let at_dy = lp.a.transpose() * &dy;
    let dx = DVector::from_iterator(n, (0..n).map(|i| d[i] * (at_dy[i] - rd[i] + rxs[i] / x[i])));
    let dz = DVector::from_iterator(n, (0..n).map(|i| (rxs[i] - z[i] * dx[i]) / x[i]));
    (dx, dy, dz)
}

/// Largest step in [0, 1] keeping v + α·dv ≥ 0.
fn max_step(v: &DVector<f64>, dv: &DVector<f64>) -> f64 {
    let mut alpha = 1.0f64;
    for (vi, dvi) in v.iter().zip(dv.iter()) {
        if *dvi < 0.0 {
            alpha = alpha.min(-vi / dvi);
        }
    }
    alpha
}

/// Mehrotra's heuristic starting point.
fn starting_point(lp: &StandardLp) -> (DVector<f64>, DVector<f64>, DVector<f64>) {
    let n = lp.a.ncols();
    let ones = DVector::from_element(n, 1.0);
    let normal = normal_matrix(&lp.a, &ones);
    let chol = factor(normal);
    let (x_tilde, y_tilde) = match &chol {
        Some((c, _)) => {
            let x = lp.a.transpose() * c.solve(&lp.b);
            let y = c.solve(&(&lp.a * &lp.c));
            (x, y)
        }
        None => (DVector::from_element(n, 1.0), DVector::zeros(lp.a.nrows())),
    };
    let z_tilde = &lp.c - lp.a.transpose() * &y_tilde;

    let dx = (-1.5 * x_tilde.min()).max(0.0);
    let dz = (-1.5 * z_tilde.min()).max(0.0);
    let mut x = x_tilde.add_scalar(dx);
    let mut z = z_tilde.add_scalar(dz);
    let xz = x.dot(&z);
    let (dx2, dz2) = if xz > 0.0 {
        (0.5 * xz / z.sum(), 0.5 * xz / x.sum())
    } else {
        (1.0, 1.0)
    };
    x = x.add_scalar(dx2.max(1e-2));
    z = z.add_scalar(dz2.max(1e-2));
    (x, y_tilde, z)
}
