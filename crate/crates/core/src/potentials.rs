//! The two Bregman geometries.
//!
//! Shallow (depth 2): the hypentropy
//! `H_α(x) = Σᵢ xᵢ·arsinh(xᵢ/(2α)) − √(xᵢ² + 4α²)` with gradient
//! `arsinh(xᵢ/(2α))` and mirror map `2α·sinh`.
//!
//! Deep (depth D ≥ 3): `Q^D_α(x) = Σᵢ α·q_D(xᵢ/α)` where `q_D` is the
//! antiderivative of the inverse of
//! `h_D(z) = (1−z)^{−D/(D−2)} − (1+z)^{−D/(D−2)}` on (−1, 1). The gradient
//! is `h_D^{-1}(xᵢ/α)`, valued in (−1, 1), and the mirror map is `α·h_D`.
//!
//! Every map here is odd; all evaluations go through the magnitude with the
//! sign reattached afterwards, so oddness holds exactly in `f64`.

use crate::numerics::{adaptive_quadrature, brent_root, Vector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum PotentialError {
    #[error("deep mirror map argument {value} lies outside (-1, 1)")]
    DomainViolation { value: f64 },
    #[error("sinh argument {value} would overflow")]
    Overflow { value: f64 },
    #[error("deep geometry requires depth >= 3, got {0}")]
    BadDepth(u32),
    #[error("scale of initialization must be positive, got {0}")]
    BadAlpha(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PotentialKind {
    Shallow,
    Deep,
}

/// A Bregman potential: the geometry kind, the scale of initialization α,
/// and the depth (2 for shallow, ≥ 3 for deep).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Potential {
    kind: PotentialKind,
    alpha: f64,
    depth: u32,
}

impl Potential {
    pub fn shallow(alpha: f64) -> Result<Self, PotentialError> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(PotentialError::BadAlpha(alpha));
        }
        Ok(Potential {
            kind: PotentialKind::Shallow,
            alpha,
            depth: 2,
        })
    }

    pub fn deep(depth: u32, alpha: f64) -> Result<Self, PotentialError> {
        if depth < 3 {
            return Err(PotentialError::BadDepth(depth));
        }
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(PotentialError::BadAlpha(alpha));
        }
        Ok(Potential {
            kind: PotentialKind::Deep,
            alpha,
            depth,
        })
    }

    /// Shallow for depth 2, deep otherwise.
    pub fn of_depth(depth: u32, alpha: f64) -> Result<Self, PotentialError> {
        if depth == 2 {
            Self::shallow(alpha)
        } else {
            Self::deep(depth, alpha)
        }
    }

    pub fn kind(&self) -> PotentialKind {
        self.kind
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    /// γ = (D−2)/D for the deep geometry.
    pub fn gamma(&self) -> f64 {
        gamma_of(self.depth)
    }
}

pub fn gamma_of(depth: u32) -> f64 {
    (depth as f64 - 2.0) / depth as f64
}

/// arsinh(t) = sign(t)·log(|t| + √(t² + 1)), exactly odd.
pub fn arsinh(t: f64) -> f64 {
    let a = t.abs().asinh();
    if t.is_sign_negative() {
        -a
    } else {
        a
    }
}

/// sinh with an overflow guard: arguments beyond ±700 error out instead of
/// silently returning infinity.
pub fn sinh_guarded(z: f64) -> Result<f64, PotentialError> {
    if z.abs() > 700.0 {
        return Err(PotentialError::Overflow { value: z });
    }
    let s = z.abs().sinh();
    Ok(if z.is_sign_negative() { -s } else { s })
}

/// h_D(z) = (1−z)^{−D/(D−2)} − (1+z)^{−D/(D−2)} on (−1, 1).
pub fn deep_h(depth: u32, z: f64) -> Result<f64, PotentialError> {
    assert!(depth >= 3, "deep_h requires depth >= 3");
    if z.abs() >= 1.0 || !z.is_finite() {
        return Err(PotentialError::DomainViolation { value: z });
    }
    Ok(deep_h_unchecked(depth, z))
}

fn deep_h_unchecked(depth: u32, z: f64) -> f64 {
    let e = depth as f64 / (depth as f64 - 2.0);
    let za = z.abs();
    let v = (1.0 - za).powf(-e) - (1.0 + za).powf(-e);
    if z.is_sign_negative() {
        -v
    } else {
        v
    }
}

/// h_D'(z), used by tests exercising the derivative bounds.
pub fn deep_h_derivative(depth: u32, z: f64) -> Result<f64, PotentialError> {
    if z.abs() >= 1.0 || !z.is_finite() {
        return Err(PotentialError::DomainViolation { value: z });
    }
    let e = depth as f64 / (depth as f64 - 2.0);
    Ok(e * ((1.0 - z).powf(-e - 1.0) + (1.0 + z).powf(-e - 1.0)))
}

/// Inverse of `h_D`, valued strictly inside (−1, 1).
///
/// For u ≥ 1 the bracket comes from the sandwich
/// `1 − u^{−γ} ≤ h_D^{-1}(u) ≤ 1 − (u+1)^{−γ}` and the solve runs in
/// log(1−z) coordinates, which keeps the residual relatively accurate even
/// when `h_D` is steep near 1.
pub fn deep_h_inverse(depth: u32, u: f64) -> f64 {
    assert!(depth >= 3, "deep_h_inverse requires depth >= 3");
    assert!(u.is_finite(), "argument must be finite");
    if u == 0.0 {
        return 0.0;
    }
    let ua = u.abs();
    let gamma = gamma_of(depth);
    let z = if ua < 1.0 {
        // Root of h(z) − u on [0, 1 − (1+u)^{−γ}]; h' is bounded here.
        let hi = 1.0 - (1.0 + ua).powf(-gamma);
        brent_root(
            |z| deep_h_unchecked(depth, z.min(1.0 - 1e-15)) - ua,
            0.0,
            hi.min(1.0 - 1e-15),
            1e-16,
        )
        .expect("sandwich brackets the root")
    } else {
        // Solve for w = 1 − z in log space on the sandwich bracket; this
        // keeps the answer relatively accurate where h_D is steep. The
        // residual is written in w directly — forming z = 1 − w first would
        // quantize w at the ulp of 1 and flatten the bracket for huge u.
        let e = depth as f64 / (depth as f64 - 2.0);
        let lo_v = -gamma * ua.ln_1p();
        let hi_v = -gamma * ua.ln();
        let residual = |v: f64| {
            let w: f64 = v.exp().clamp(1e-300, 1.0);
            w.powf(-e) - (2.0 - w).powf(-e) - ua
        };
        let v = if hi_v - lo_v <= f64::EPSILON * hi_v.abs().max(1.0) {
            // The sandwich itself already pins the root.
            0.5 * (lo_v + hi_v)
        } else {
            brent_root(residual, lo_v, hi_v, 1e-15).expect("sandwich brackets the root")
        };
        1.0 - v.exp()
    };
    let z = z.clamp(-(1.0 - 1e-16), 1.0 - 1e-16);
    if u.is_sign_negative() {
        -z
    } else {
        z
    }
}

/// q_D(u) = ∫₀ᵘ h_D^{-1}, evaluated by adaptive quadrature.
///
/// Near zero the quadrature would just measure noise, so |u| ≤ 1e-8 uses
/// the second-order series q_D(u) ≈ u²·γ/4 (the first derivative of
/// h_D^{-1} at 0 is γ/2).
pub fn deep_q(depth: u32, u: f64) -> f64 {
    assert!(depth >= 3);
    let ua = u.abs();
    if ua <= 1e-8 {
        return ua * ua * gamma_of(depth) / 4.0;
    }
    match adaptive_quadrature(|v| deep_h_inverse(depth, v), 0.0, ua, 1e-11) {
        Ok(v) => v,
        // The integrand is smooth and increasing; if subdivision bottoms out
        // the carried estimate is still the best available value.
        Err(crate::numerics::QuadError::MaxDepth { estimate }) => estimate,
    }
}

/// F(x): hypentropy for shallow, Q^D_α for deep.
pub fn potential_value(p: &Potential, x: &Vector) -> f64 {
    match p.kind {
        PotentialKind::Shallow => x
            .iter()
            .map(|&xi| {
                let a2 = 2.0 * p.alpha;
                xi * arsinh(xi / a2) - (xi * xi + a2 * a2).sqrt()
            })
            .sum(),
        PotentialKind::Deep => x
            .iter()
            .map(|&xi| p.alpha * deep_q(p.depth, xi / p.alpha))
            .sum(),
    }
}

/// ∇F(x); componentwise, odd, and zero at zero.
pub fn potential_grad(p: &Potential, x: &Vector) -> Vector {
    match p.kind {
        PotentialKind::Shallow => {
            Vector(x.iter().map(|&xi| arsinh(xi / (2.0 * p.alpha))).collect())
        }
        PotentialKind::Deep => Vector(
            x.iter()
                .map(|&xi| deep_h_inverse(p.depth, xi / p.alpha))
                .collect(),
        ),
    }
}

/// Mirror map (∇F)^{-1}: `2α·sinh` for shallow, `α·h_D` for deep.
///
/// Deep arguments must lie strictly inside (−1, 1); shallow arguments past
/// ±700 would overflow `sinh` and error instead.
pub fn potential_grad_inverse(p: &Potential, z: &Vector) -> Result<Vector, PotentialError> {
    match p.kind {
        PotentialKind::Shallow => {
            let mut out = Vec::with_capacity(z.len());
            for &zi in z.iter() {
                out.push(2.0 * p.alpha * sinh_guarded(zi)?);
            }
            Ok(Vector(out))
        }
        PotentialKind::Deep => {
            let mut out = Vec::with_capacity(z.len());
            for &zi in z.iter() {
                out.push(p.alpha * deep_h(p.depth, zi)?);
            }
            Ok(Vector(out))
        }
    }
}

/// Bregman divergence to the origin, D_F(x, 0).
///
/// Closed forms are used instead of the generic three-term expression:
/// shallow `D(x, 0) = H_α(x) + 2αd` is summed with the stable rewrite
/// `√(x²+4α²) − 2α = x²/(√(x²+4α²) + 2α)` so every summand is nonnegative,
/// and deep `D(x, 0) = Q^D_α(x)` since `Q^D_α(0) = 0` and `∇Q^D_α(0) = 0`.
pub fn bregman_to_zero(p: &Potential, x: &Vector) -> f64 {
    match p.kind {
        PotentialKind::Shallow => x
            .iter()
            .map(|&xi| {
                let a2 = 2.0 * p.alpha;
                let root = (xi * xi + a2 * a2).sqrt();
                xi * arsinh(xi / a2) - xi * xi / (root + a2)
            })
            .sum(),
        PotentialKind::Deep => potential_value(p, x),
    }
}
