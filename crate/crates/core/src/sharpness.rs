//! Explicit instances on which the error bounds are asymptotically tight.
//!
//! The construction fixes a (d−1)×d matrix A whose kernel is the span of
//! n = (γ₁, −γ₂, 1/(d−2), …, 1/(d−2)) and a two-sparse positive minimizer
//! g* supported on {1, 2}. Over this kernel the constants come out exactly
//! as ϱ = γ₂ − γ₁, ϱ⁻ = γ₂, ϱ̃ = γ₁ + γ₂, and the Bregman minimizer is
//! g* + t_α·n with t_α the root of a scalar fixed-point equation:
//!
//! shallow: t = 2α(d−2)·sinh(γ₂·arsinh((g₂ − tγ₂)/2α) − γ₁·arsinh((g₁ + tγ₁)/2α)),
//! deep:    t/(α(d−2)) = h_D(γ₂·h_D^{-1}((g₂ − tγ₂)/α) − γ₁·h_D^{-1}((g₁ + tγ₁)/α)).
//!
//! As α ↓ 0, t_α/(|Sᶜ|·α^{1−ϱ}·g₂^{γ₂}·g₁^{−γ₁}) → 1 in the shallow case
//! and t_α/(α(d−2)) → h_D(ϱ) in the deep case.

use crate::numerics::{brent_root, Matrix, RootError, Vector};
use crate::potentials::{arsinh, deep_h, deep_h_inverse, sinh_guarded, PotentialError};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum SharpnessError {
    #[error("invalid construction parameters: {0}")]
    InvalidParameters(String),
    #[error("fixed-point bracket expansion failed")]
    NoBracket,
    #[error("fixed-point argument left the domain of h_D")]
    DomainViolation,
    #[error(transparent)]
    Potential(#[from] PotentialError),
}

impl From<RootError> for SharpnessError {
    fn from(_: RootError) -> Self {
        SharpnessError::NoBracket
    }
}

/// Which of the two shallow minimizer layouts is used: `UpperA` makes the
/// ℓ¹ upper bound tight (g* = (1, κ*)), `LowerB` the ℓ∞ lower bound
/// (g* = (κ*, 1)).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SharpVariant {
    UpperA,
    LowerB,
}

/// A constructed instance with one-dimensional kernel span{n}.
#[derive(Debug, Clone)]
pub struct SharpInstance {
    pub a: Matrix,
    pub y: Vector,
    pub gstar: Vector,
    pub n: Vector,
    pub gamma1: f64,
    pub gamma2: f64,
    pub variant: Option<SharpVariant>,
}

impl SharpInstance {
    pub fn dim(&self) -> usize {
        self.gstar.len()
    }

    /// ϱ = |γ₂ − γ₁| over this kernel.
    pub fn rho(&self) -> f64 {
        (self.gamma2 - self.gamma1).abs()
    }

    /// ϱ̃ = γ₁ + γ₂ over this kernel.
    pub fn rho_tilde(&self) -> f64 {
        self.gamma1 + self.gamma2
    }

    /// The minimizer x∞(α) = g* + t·n for a solved t.
    pub fn point_at(&self, t: f64) -> Vector {
        self.gstar.axpy(t, &self.n)
    }
}

fn build(
    d: usize,
    gamma1: f64,
    gamma2: f64,
    g1: f64,
    g2: f64,
    variant: Option<SharpVariant>,
) -> SharpInstance {
    let mut n = vec![0.0; d];
    n[0] = gamma1;
    n[1] = -gamma2;
    for entry in n.iter_mut().skip(2) {
        *entry = 1.0 / (d as f64 - 2.0);
    }
    let n = Vector(n);
    // Rows of A: an orthonormal basis of n-perp from the Householder
    // reflector mapping n onto a multiple of e₁ (rows 2..d of H are then
    // orthogonal to n).
    let norm = n.norm_l2();
    let mut v = n.clone();
    v[0] += norm; // n₁ = γ₁ ≥ 0, so this sign choice avoids cancellation
    let beta = 2.0 / v.dot(&v);
    let mut a = Matrix::zeros(d - 1, d);
    for row in 0..d - 1 {
        let i = row + 1;
        for j in 0..d {
            let eye = if i == j { 1.0 } else { 0.0 };
            a[(row, j)] = eye - beta * v[i] * v[j];
        }
    }
    let mut g = vec![0.0; d];
    g[0] = g1;
    g[1] = g2;
    let gstar = Vector(g);
    let y = a.matvec(&gstar);
    SharpInstance {
        a,
        y,
        gstar,
        n,
        gamma1,
        gamma2,
        variant,
    }
}

/// Shallow construction with prescribed (ϱ, ϱ⁻, κ*) in the admissible
/// family ϱ⁻ ≥ ϱ, ϱ̃ = 2ϱ⁻ − ϱ. Choices γ₁ = ϱ⁻ − ϱ, γ₂ = ϱ⁻ and
/// g* = (1, κ*) for `UpperA`, g* = (κ*, 1) for `LowerB`.
pub fn build_sharp_shallow(
    d: usize,
    rho: f64,
    rho_minus: f64,
    kappa: f64,
    variant: SharpVariant,
) -> Result<SharpInstance, SharpnessError> {
    if d < 3 {
        return Err(SharpnessError::InvalidParameters(format!(
            "dimension {d} < 3"
        )));
    }
    if !(0.0..1.0).contains(&rho) {
        return Err(SharpnessError::InvalidParameters(format!(
            "rho {rho} outside [0, 1)"
        )));
    }
    if rho_minus < rho || rho_minus <= 0.0 {
        return Err(SharpnessError::InvalidParameters(format!(
            "rho_minus {rho_minus} must be positive and >= rho"
        )));
    }
    if kappa < 1.0 {
        return Err(SharpnessError::InvalidParameters(format!(
            "kappa {kappa} < 1"
        )));
    }
    let gamma1 = rho_minus - rho;
    let gamma2 = rho_minus;
    let (g1, g2) = match variant {
        SharpVariant::UpperA => (1.0, kappa),
        SharpVariant::LowerB => (kappa, 1.0),
    };
    Ok(build(d, gamma1, gamma2, g1, g2, Some(variant)))
}

/// Deep construction: γ₂ = γ₁ + ϱ and g* = (1, 1). γ₁ remains a free
/// parameter of the family; ϱ̃ = 2γ₁ + ϱ follows from it.
pub fn build_sharp_deep(d: usize, rho: f64, gamma1: f64) -> Result<SharpInstance, SharpnessError> {
    if d < 3 {
        return Err(SharpnessError::InvalidParameters(format!(
            "dimension {d} < 3"
        )));
    }
    if !(0.0..1.0).contains(&rho) {
        return Err(SharpnessError::InvalidParameters(format!(
            "rho {rho} outside [0, 1)"
        )));
    }
    if gamma1 < 0.0 {
        return Err(SharpnessError::InvalidParameters(format!(
            "gamma1 {gamma1} < 0"
        )));
    }
    Ok(build(d, gamma1, gamma1 + rho, 1.0, 1.0, None))
}

fn solve_fixed_point<F>(residual: F, cap: f64) -> Result<f64, SharpnessError>
where
    F: Fn(f64) -> Result<f64, SharpnessError>,
{
    // t_α → 0 as α ↓ 0, so the bracket starts small and doubles until the
    // residual changes sign, capped at 10‖g*‖₁ passed via `cap`.
    let mut t = cap.clamp(1e-300, 1e-12);
    let lo;
    let hi;
    loop {
        let r_neg = residual(-t)?;
        let r_pos = residual(t)?;
        if r_neg == 0.0 {
            return Ok(-t);
        }
        if r_pos == 0.0 {
            return Ok(t);
        }
        if r_neg.signum() != r_pos.signum() {
            lo = -t;
            hi = t;
            break;
        }
        t *= 2.0;
        if t > cap {
            return Err(SharpnessError::NoBracket);
        }
    }
    let mut failure = None;
    let root = brent_root(
        |t| match residual(t) {
            Ok(v) => v,
            Err(e) => {
                failure = Some(e);
                f64::NAN
            }
        },
        lo,
        hi,
        0.0,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(root?)
}

/// Solve the shallow fixed-point equation for t_α.
pub fn fixed_point_shallow(inst: &SharpInstance, alpha: f64) -> Result<f64, SharpnessError> {
    assert!(alpha > 0.0);
    let d = inst.dim() as f64;
    let (g1, g2) = (inst.gstar[0], inst.gstar[1]);
    let (gamma1, gamma2) = (inst.gamma1, inst.gamma2);
    let residual = |t: f64| -> Result<f64, SharpnessError> {
        let arg = gamma2 * arsinh((g2 - t * gamma2) / (2.0 * alpha))
            - gamma1 * arsinh((g1 + t * gamma1) / (2.0 * alpha));
        Ok(t - 2.0 * alpha * (d - 2.0) * sinh_guarded(arg)?)
    };
    solve_fixed_point(residual, 10.0 * inst.gstar.norm_l1())
}

/// Solve the deep fixed-point equation for t_α. The h_D argument is
/// clamped to (−1, 1) during bracketing; if the clamp is still active at
/// the root the construction is outside the admissible range.
pub fn fixed_point_deep(
    inst: &SharpInstance,
    depth: u32,
    alpha: f64,
) -> Result<f64, SharpnessError> {
    assert!(alpha > 0.0);
    assert!(depth >= 3);
    let d = inst.dim() as f64;
    let (g1, g2) = (inst.gstar[0], inst.gstar[1]);
    let (gamma1, gamma2) = (inst.gamma1, inst.gamma2);
    let h_arg = |t: f64| {
        gamma2 * deep_h_inverse(depth, (g2 - t * gamma2) / alpha)
            - gamma1 * deep_h_inverse(depth, (g1 + t * gamma1) / alpha)
    };
    let clamp = 1.0 - 1e-13;
    let residual = |t: f64| -> Result<f64, SharpnessError> {
        let arg = h_arg(t).clamp(-clamp, clamp);
        Ok(t / (alpha * (d - 2.0)) - deep_h(depth, arg).expect("clamped into the domain"))
    };
    let root = solve_fixed_point(residual, 10.0 * inst.gstar.norm_l1())?;
    if h_arg(root).abs() >= clamp {
        return Err(SharpnessError::DomainViolation);
    }
    Ok(root)
}

/// Ratios values/target per α plus a Richardson-style extrapolation of the
/// last three ratios, assuming the correction decays like α^power.
pub fn limit_ratio(alphas: &[f64], values: &[f64], target: f64, power: f64) -> (Vec<f64>, f64) {
    assert_eq!(alphas.len(), values.len());
    assert!(alphas.len() >= 3, "need at least three points");
    let ratios: Vec<f64> = values.iter().map(|v| v / target).collect();
    let k = ratios.len();
    // Least-squares line in x = α^power through the last three points; the
    // intercept is the extrapolated limit. Exact for r = L + c·α^power.
    let xs: Vec<f64> = alphas[k - 3..].iter().map(|a| a.powf(power)).collect();
    let rs = &ratios[k - 3..];
    let mean_x = xs.iter().sum::<f64>() / 3.0;
    let mean_r = rs.iter().sum::<f64>() / 3.0;
    let var: f64 = xs.iter().map(|x| (x - mean_x) * (x - mean_x)).sum();
    let extrapolated = if var <= 1e-300 {
        mean_r
    } else {
        let cov: f64 = xs
            .iter()
            .zip(rs)
            .map(|(x, r)| (x - mean_x) * (r - mean_r))
            .sum();
        mean_r - cov / var * mean_x
    };
    (ratios, extrapolated)
}
