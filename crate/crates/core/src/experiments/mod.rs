//! Experiment harness: synthetic sparse-recovery instances, α sweeps
//! across depths, rate fits, and deterministic CSV/SVG output.
//!
//! Instance generation follows the Gaussian setup: A has i.i.d. standard
//! normal entries, the ground truth has `s` nonzero entries uniform on
//! ±[1, 2], and noisy targets are y = y₀ + η‖y₀‖₂·n with n uniform on the
//! unit sphere. Everything is driven by the self-contained PRNG in [`rng`],
//! so a seed pins the whole experiment bit for bit.

mod output;
pub mod rng;

pub use output::{csv_string, emit_csv, emit_svg, svg_string, CSV_HEADER};

use crate::bounds::{evaluate_bound, BoundError, BoundInput};
use crate::lp::{l1_certificate, LpError};
use crate::nullspace::{
    complement_basis, compute_constants, tangent_basis, NspConstants, NullspaceError, WeightRegime,
    DEFAULT_PATTERN_CAP,
};
use crate::numerics::{kernel_basis, Matrix, Vector, DEFAULT_RANK_TOL};
use crate::potentials::Potential;
use crate::solvers::{
    bregman_1d_oracle, frank_wolfe_select, mirror_descent, LminPolytope, SelectionObjective,
    SolveConfig, SolverError,
};
use rayon::prelude::*;
use rng::Xoshiro256StarStar;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum ExperimentError {
    #[error("invalid dimensions: {0}")]
    InvalidDims(String),
    #[error("slope fit needs at least two rows with distinct alpha and positive error")]
    DegenerateFit,
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Nullspace(#[from] NullspaceError),
    #[error(transparent)]
    Bound(#[from] BoundError),
}

/// A synthetic regression instance (A, y) with optional ground truth.
#[derive(Debug, Clone)]
pub struct Instance {
    pub a: Matrix,
    pub y: Vector,
    pub x_true: Option<Vector>,
    pub noise_level: f64,
    pub seed: u64,
    pub sparsity: usize,
}

impl Instance {
    pub fn dims(&self) -> (usize, usize) {
        (self.a.rows(), self.a.cols())
    }

    pub fn from_parts(a: Matrix, y: Vector) -> Self {
        Instance {
            a,
            y,
            x_true: None,
            noise_level: 0.0,
            seed: 0,
            sparsity: 0,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct InstanceRepr {
    dims: (usize, usize),
    #[serde(rename = "A")]
    a: Vec<f64>,
    y: Vec<f64>,
    x_true: Option<Vec<f64>>,
    eta: f64,
    seed: u64,
    sparsity: usize,
}

impl Serialize for Instance {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        InstanceRepr {
            dims: self.dims(),
            a: self.a.entries().to_vec(),
            y: self.y.0.clone(),
            x_true: self.x_true.as_ref().map(|v| v.0.clone()),
            eta: self.noise_level,
            seed: self.seed,
            sparsity: self.sparsity,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Instance {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let repr = InstanceRepr::deserialize(deserializer)?;
        let (n, d) = repr.dims;
        if repr.a.len() != n * d {
            return Err(serde::de::Error::custom(format!(
                "matrix payload has {} entries for dims {}x{}",
                repr.a.len(),
                n,
                d
            )));
        }
        if repr.y.len() != n {
            return Err(serde::de::Error::custom("rhs length mismatch"));
        }
        Ok(Instance {
            a: Matrix::from_row_major(n, d, &repr.a),
            y: Vector(repr.y),
            x_true: repr.x_true.map(Vector),
            noise_level: repr.eta,
            seed: repr.seed,
            sparsity: repr.sparsity,
        })
    }
}

/// Draw a seeded Gaussian instance: A ∈ ℝ^{N×d} i.i.d. N(0,1), ground
/// truth s-sparse uniform on ±[1, 2], y = A·x_true + η‖A·x_true‖₂·noise
/// with the noise direction uniform on the sphere. η = 0 skips the noise
/// term entirely so y = A·x_true holds exactly.
pub fn generate_instance(
    n: usize,
    d: usize,
    s: usize,
    eta: f64,
    seed: u64,
) -> Result<Instance, ExperimentError> {
    if n == 0 || d == 0 || s > d {
        return Err(ExperimentError::InvalidDims(format!(
            "n = {n}, d = {d}, s = {s}"
        )));
    }
    if eta < 0.0 {
        return Err(ExperimentError::InvalidDims(format!(
            "noise level {eta} < 0"
        )));
    }
    let mut rng = Xoshiro256StarStar::seed_from_u64(seed);
    let mut a = Matrix::zeros(n, d);
    for i in 0..n {
        for j in 0..d {
            a[(i, j)] = rng.normal();
        }
    }
    let positions = rng.choose_indices(d, s);
    let mut x_true = Vector::zeros(d);
    for &j in &positions {
        let magnitude = rng.uniform_in(1.0, 2.0);
        let sign = if rng.next_u64() & 1 == 0 { 1.0 } else { -1.0 };
        x_true[j] = sign * magnitude;
    }
    let y0 = a.matvec(&x_true);
    let y = if eta == 0.0 {
        y0
    } else {
        let mut noise = Vector((0..n).map(|_| rng.normal()).collect());
        let norm = noise.norm_l2();
        noise = noise.scale(1.0 / norm);
        y0.axpy(eta * y0.norm_l2(), &noise)
    };
    Ok(Instance {
        a,
        y,
        x_true: Some(x_true),
        noise_level: eta,
        seed,
        sparsity: s,
    })
}

/// One α of a sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepRow {
    pub alpha: f64,
    pub depth: u32,
    /// ‖x∞ − g*‖₁
    pub err_l1: f64,
    /// ‖x∞_{Sᶜ} − g*_{Sᶜ}‖_∞
    pub err_linf_sc: f64,
    /// ‖x∞ − x_true‖₂ / ‖x_true‖₂ when ground truth is present.
    pub est_err_l2: Option<f64>,
    pub iterations: usize,
    pub upper_bound: Option<f64>,
    pub lower_bound: Option<f64>,
}

/// A full sweep with its fitted rate.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    /// OLS slope of log err_l1 against log α over the fit window (NaN when
    /// fewer than two usable rows exist).
    pub slope: f64,
    pub slope_window: (f64, f64),
    pub r_squared: f64,
    /// Legend label for plots.
    pub label: String,
    /// The 1-D-kernel first-order-condition oracle replaced mirror descent.
    pub used_oracle: bool,
    /// Whether the attached bounds used heuristic (inexact) constants.
    pub inexact_constants: bool,
    /// Rows that failed to solve, as (alpha, message); excluded from rows
    /// and from the fit.
    pub failures: Vec<(f64, String)>,
}

/// Ordinary least squares of log err against log α.
/// Returns (slope, intercept, r²).
pub fn fit_slope(rows: &[(f64, f64)]) -> Result<(f64, f64, f64), ExperimentError> {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|(a, e)| *a > 0.0 && *e > 0.0)
        .map(|(a, e)| (a.ln(), e.ln()))
        .collect();
    if pts.len() < 2 {
        return Err(ExperimentError::DegenerateFit);
    }
    let n = pts.len() as f64;
    let mean_x = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let var_x: f64 = pts.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    if var_x <= 1e-300 {
        return Err(ExperimentError::DegenerateFit);
    }
    let cov: f64 = pts.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    let slope = cov / var_x;
    let intercept = mean_y - slope * mean_x;
    let ss_tot: f64 = pts.iter().map(|p| (p.1 - mean_y).powi(2)).sum();
    let ss_res: f64 = pts
        .iter()
        .map(|p| (p.1 - (intercept + slope * p.0)).powi(2))
        .sum();
    let r_squared = if ss_tot <= 1e-300 {
        1.0
    } else {
        1.0 - ss_res / ss_tot
    };
    Ok((slope, intercept, r_squared))
}

/// Run mirror descent (or the 1-D-kernel oracle) for each α, compare
/// against the depth's distinguished ℓ¹ minimizer, optionally attach the
/// matching theorem bounds, and fit the rate.
///
/// The fit window defaults to the four smallest α whose error clears the
/// noise floor 10³·ε_machine·‖g*‖₁; refit any other window with
/// [`fit_slope`] on the rows.
pub fn run_sweep(
    inst: &Instance,
    depth: u32,
    alphas: &[f64],
    cfg: &SolveConfig,
    with_bounds: bool,
) -> Result<SweepResult, ExperimentError> {
    assert!(depth >= 2);
    assert!(
        alphas.windows(2).all(|w| w[0] > w[1]),
        "alphas must be strictly decreasing"
    );
    let a = &inst.a;
    let y = &inst.y;
    let cert = l1_certificate(a, y)?;
    let gstar = if cert.unique {
        cert.minimizer.clone()
    } else {
        let polytope = LminPolytope::from_certificate(a, y, &cert);
        frank_wolfe_select(&polytope, SelectionObjective::for_depth(depth), 1e-9)?
    };
    let kernel = kernel_basis(a, DEFAULT_RANK_TOL);
    let use_oracle = kernel.dim() == 1;

    let constants: Option<NspConstants> = if with_bounds {
        let search = if cert.unique {
            kernel.clone()
        } else {
            let tangent = tangent_basis(&kernel, &cert.support, &cert.sign);
            complement_basis(&kernel, &tangent, &gstar, WeightRegime::for_depth(depth))?
        };
        Some(compute_constants(
            &search,
            &cert.support,
            &cert.sign,
            &gstar,
            DEFAULT_PATTERN_CAP,
        )?)
    } else {
        None
    };

    let complement = cert.support_complement();
    let solved: Vec<Result<SweepRow, (f64, String)>> = alphas
        .par_iter()
        .map(|&alpha| {
            let p = Potential::of_depth(depth, alpha).map_err(|e| (alpha, e.to_string()))?;
            let (x, iterations) = if use_oracle {
                let x = bregman_1d_oracle(a, y, &p, &gstar).map_err(|e| (alpha, e.to_string()))?;
                (x, 0)
            } else {
                let trace = mirror_descent(a, y, &p, cfg).map_err(|e| (alpha, e.to_string()))?;
                (trace.final_x, trace.iterations)
            };
            let diff = x.sub(&gstar);
            let err_l1 = diff.norm_l1();
            let err_linf_sc = complement.iter().fold(0.0f64, |m, &i| m.max(diff[i].abs()));
            let est_err_l2 = inst
                .x_true
                .as_ref()
                .map(|xt| x.sub(xt).norm_l2() / xt.norm_l2());
            let (mut upper, mut lower) = (None, None);
            if let Some(consts) = &constants {
                if let Ok(input) = BoundInput::new(
                    consts.clone(),
                    gstar.clone(),
                    cert.support.clone(),
                    alpha,
                    depth,
                ) {
                    if let Ok(report) = evaluate_bound(&input, cert.unique) {
                        upper = Some(report.upper);
                        lower = report.lower;
                    }
                }
            }
            Ok(SweepRow {
                alpha,
                depth,
                err_l1,
                err_linf_sc,
                est_err_l2,
                iterations,
                upper_bound: upper,
                lower_bound: lower,
            })
        })
        .collect();

    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for item in solved {
        match item {
            Ok(row) => rows.push(row),
            Err(fail) => failures.push(fail),
        }
    }

    let floor = 1e3 * f64::EPSILON * gstar.norm_l1();
    let mut usable: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.err_l1 > floor)
        .map(|r| (r.alpha, r.err_l1))
        .collect();
    usable.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    usable.truncate(4);
    let (slope, r_squared, slope_window) = match fit_slope(&usable) {
        Ok((slope, _, r2)) => {
            let lo = usable.first().map(|p| p.0).unwrap_or(f64::NAN);
            let hi = usable.last().map(|p| p.0).unwrap_or(f64::NAN);
            (slope, r2, (lo, hi))
        }
        Err(_) => (f64::NAN, f64::NAN, (f64::NAN, f64::NAN)),
    };

    Ok(SweepResult {
        rows,
        slope,
        slope_window,
        r_squared,
        label: format!("D={}, eta={}", depth, inst.noise_level),
        used_oracle: use_oracle,
        inexact_constants: constants.as_ref().is_some_and(|c| !c.exact),
        failures,
    })
}
