//! Closed-form evaluators for the approximation-error bounds.
//!
//! Four regimes: {shallow (D = 2), deep (D ≥ 3)} × {unique, non-unique
//! ℓ¹ minimizer}.Each regime has an upper bound on ‖x∞ − g*‖₁; the unique
//! regimes also have a lower bound on ‖x∞_{Sᶜ} − g*_{Sᶜ}‖_∞ that is valid
//! under an explicit smallness assumption on α and may be vacuous
//! (non-positive) when α is large. Assumption failures are report fields,
//! never errors, so sweeps can show where each theorem starts to bite.

use crate::nullspace::NspConstants;
use crate::numerics::Vector;
use crate::potentials::{deep_h, gamma_of};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum BoundError {
    #[error("support complement is empty")]
    EmptySupportComplement,
    #[error("minimizer vanishes on its support (index {index})")]
    ZeroOnSupport { index: usize },
    #[error("null-space constant rho = {rho} must lie in [0, 1)")]
    RhoOutOfRange { rho: f64 },
    #[error("bound regime requires depth {expected}, got {got}")]
    WrongDepth { expected: &'static str, got: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundRegime {
    ShallowUnique,
    DeepUnique,
    ShallowNonUnique,
    DeepNonUnique,
}

/// Everything the bound formulas consume, with the derived norms cached.
#[derive(Debug, Clone)]
pub struct BoundInput {
    pub constants: NspConstants,
    pub gstar: Vector,
    pub support: Vec<usize>,
    pub alpha: f64,
    pub depth: u32,
    min_s: f64,
    max_s: f64,
    norm_l1: f64,
    norm_inf: f64,
    sc_count: usize,
}

impl BoundInput {
    pub fn new(
        constants: NspConstants,
        gstar: Vector,
        support: Vec<usize>,
        alpha: f64,
        depth: u32,
    ) -> Result<Self, BoundError> {
        assert!(alpha > 0.0, "alpha must be positive");
        assert!(depth >= 2, "depth must be at least 2");
        if !(0.0..1.0).contains(&constants.rho) {
            return Err(BoundError::RhoOutOfRange { rho: constants.rho });
        }
        let d = gstar.len();
        if support.len() >= d {
            return Err(BoundError::EmptySupportComplement);
        }
        let mut min_s = f64::INFINITY;
        let mut max_s = 0.0f64;
        for &i in &support {
            let g = gstar[i].abs();
            if g == 0.0 {
                return Err(BoundError::ZeroOnSupport { index: i });
            }
            min_s = min_s.min(g);
            max_s = max_s.max(g);
        }
        let norm_l1 = gstar.norm_l1();
        let norm_inf = gstar.norm_inf();
        let sc_count = d - support.len();
        Ok(BoundInput {
            constants,
            gstar,
            support,
            alpha,
            depth,
            min_s,
            max_s,
            norm_l1,
            norm_inf,
            sc_count,
        })
    }

    pub fn min_on_support(&self) -> f64 {
        self.min_s
    }

    pub fn max_on_support(&self) -> f64 {
        self.max_s
    }

    pub fn dim(&self) -> usize {
        self.gstar.len()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AssumptionCheck {
    pub name: String,
    pub satisfied: bool,
    /// The threshold the ratio α/min_S|g*| is compared against.
    pub threshold: f64,
}

/// Evaluated bounds plus the assumption breakdown.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundReport {
    pub regime: BoundRegime,
    pub assumptions_ok: bool,
    pub assumptions: Vec<AssumptionCheck>,
    /// Upper bound on ‖x∞ − g*‖₁.
    pub upper: f64,
    /// Lower bound on ‖x∞_{Sᶜ} − g*_{Sᶜ}‖_∞; unique regimes only.
    pub lower: Option<f64>,
    /// The lower bound is ≤ 0 and so carries no information.
    pub lower_vacuous: bool,
    /// Constants were heuristic lower bounds rather than exact values.
    pub inexact_constants: bool,
}

fn check(name: &str, eps: f64, threshold: f64, strict: bool) -> AssumptionCheck {
    let satisfied = if threshold.is_nan() {
        false
    } else if strict {
        eps < threshold
    } else {
        eps <= threshold
    };
    AssumptionCheck {
        name: name.to_string(),
        satisfied,
        threshold,
    }
}

/// Shallow unique-minimizer bounds.
///
/// upper: ‖x∞ − g*‖₁ ≤ α^{1−ϱ}|Sᶜ|(1+ϱ̃)·min^ϱ·κ^{ϱ⁻}·(1 + (α/min)²)^ϱ,
/// lower (under the α-threshold assumption):
/// ‖x∞_{Sᶜ} − g*_{Sᶜ}‖_∞ ≥ α^{1−ϱ}(‖g*‖_∞^ϱ/κ^{ϱ⁻})·
///   (1 − 8ϱ̃²|Sᶜ|κ^{ϱ⁻}(α/min)^{1−ϱ} − κ^{2ϱ⁻−2ϱ}(α/min)^{2ϱ}).
pub fn bound_shallow_unique(input: &BoundInput) -> Result<BoundReport, BoundError> {
    if input.depth != 2 {
        return Err(BoundError::WrongDepth {
            expected: "2",
            got: input.depth,
        });
    }
    let c = &input.constants;
    let (rho, rho_minus, rho_tilde, kappa) = (c.rho, c.rho_minus, c.rho_tilde, c.kappa_star);
    let alpha = input.alpha;
    let min = input.min_s;
    let sc = input.sc_count as f64;
    let eps = alpha / min;

    let upper = alpha.powf(1.0 - rho)
        * sc
        * (1.0 + rho_tilde)
        * min.powf(rho)
        * kappa.powf(rho_minus)
        * (1.0 + eps * eps).powf(rho);

    let threshold = (1.0 / (4.0 * rho_tilde * kappa.powf(rho_minus) * sc)).powf(1.0 / (1.0 - rho));
    let assumption = check("lower_alpha_threshold", eps, threshold, false);

    let paren = 1.0
        - 8.0 * rho_tilde * rho_tilde * sc * kappa.powf(rho_minus) * eps.powf(1.0 - rho)
        - kappa.powf(2.0 * rho_minus - 2.0 * rho) * eps.powf(2.0 * rho);
    let lower = alpha.powf(1.0 - rho) * input.norm_inf.powf(rho) / kappa.powf(rho_minus) * paren;

    Ok(BoundReport {
        regime: BoundRegime::ShallowUnique,
        assumptions_ok: assumption.satisfied,
        assumptions: vec![assumption],
        upper,
        lower: Some(lower),
        lower_vacuous: lower <= 0.0,
        inexact_constants: !c.exact,
    })
}

/// Deep unique-minimizer bounds (γ = (D−2)/D).
///
/// upper (assuming α/min < ((1−ϱ)γ/4ϱ⁻)^{1/γ}):
/// ‖x∞ − g*‖₁ ≤ α|Sᶜ|(1+ϱ̃)[h_D(ϱ) + (4ϱ⁻/(γ(1−ϱ)^{1/γ+1}))(α/min)^γ],
/// lower (under the three-way minimum assumption):
/// ‖x∞_{Sᶜ} − g*_{Sᶜ}‖_∞ ≥ α[h_D(ϱ) − (2(ϱ + 2^{2+γ}ϱ̃γκ)/(γ(1−ϱ)^{1/γ+1}))(α/min)^γ].
pub fn bound_deep_unique(input: &BoundInput) -> Result<BoundReport, BoundError> {
    if input.depth < 3 {
        return Err(BoundError::WrongDepth {
            expected: ">= 3",
            got: input.depth,
        });
    }
    let c = &input.constants;
    let (rho, rho_minus, rho_tilde, kappa) = (c.rho, c.rho_minus, c.rho_tilde, c.kappa_star);
    let gamma = gamma_of(input.depth);
    let alpha = input.alpha;
    let min = input.min_s;
    let sc = input.sc_count as f64;
    let eps = alpha / min;
    let h_rho = deep_h(input.depth, rho).expect("rho in [0,1)");
    let slope_denom = gamma * (1.0 - rho).powf(1.0 / gamma + 1.0);

    let upper_threshold = ((1.0 - rho) * gamma / (4.0 * rho_minus)).powf(1.0 / gamma);
    let upper_check = check("upper_alpha_threshold", eps, upper_threshold, true);
    let upper =
        alpha * sc * (1.0 + rho_tilde) * (h_rho + 4.0 * rho_minus / slope_denom * eps.powf(gamma));

    let lower_coeff = rho + 2.0f64.powf(2.0 + gamma) * rho_tilde * gamma * kappa;
    let t3 = if lower_coeff == 0.0 {
        f64::INFINITY
    } else {
        (rho / lower_coeff).powf(1.0 / gamma)
    };
    let lower_threshold = upper_threshold
        .min((1.0 - rho).powf(1.0 / gamma) / (4.0 * (1.0 + rho_tilde) * sc))
        .min(t3);
    let lower_check = check("lower_alpha_threshold", eps, lower_threshold, false);
    let lower = alpha * (h_rho - 2.0 * lower_coeff / slope_denom * eps.powf(gamma));

    Ok(BoundReport {
        regime: BoundRegime::DeepUnique,
        assumptions_ok: upper_check.satisfied && lower_check.satisfied,
        assumptions: vec![upper_check, lower_check],
        upper,
        lower: Some(lower),
        lower_vacuous: lower <= 0.0,
        inexact_constants: !c.exact,
    })
}

/// Shallow non-unique upper bound, with constants taken over the weighted
/// complement 𝒩. No lower bound exists in this regime.
pub fn bound_shallow_nonunique(input: &BoundInput) -> Result<BoundReport, BoundError> {
    if input.depth != 2 {
        return Err(BoundError::WrongDepth {
            expected: "2",
            got: input.depth,
        });
    }
    let c = &input.constants;
    let (rho, rho_minus, rho_tilde, kappa) = (c.rho, c.rho_minus, c.rho_tilde, c.kappa_star);
    let alpha = input.alpha;
    let min = input.min_s;
    let l1 = input.norm_l1;
    let sc = input.sc_count as f64;
    let eps = alpha / min;

    let cond1 = check(
        "eps_sq_vs_min_over_norm1",
        eps * eps,
        min / (20.0 * l1),
        false,
    );
    let cond2 = check(
        "eps_pow_one_minus_rho",
        eps.powf(1.0 - rho),
        1.0 / (4.0 * 2.0f64.powf(rho_minus) * rho_tilde * sc * kappa.powf(rho_minus)),
        false,
    );
    let cond3 = check(
        "eps_pow_one_plus_rho",
        eps.powf(1.0 + rho),
        rho_tilde * kappa.powf(rho_minus) * sc * min / (4.0 * l1),
        false,
    );

    let c1 = 32.0 * rho_tilde * rho_tilde * sc * kappa.powf(rho_minus) * l1 / min;
    let g_alpha = (1.0 + 10.0 * alpha * alpha * l1 / min.powi(3)).powf(rho_minus);
    let upper = alpha.powf(1.0 - rho)
        * ((1.0 + rho_tilde + c1 * eps.powf(1.0 - rho))
            * sc
            * min.powf(rho)
            * kappa.powf(rho_minus)
            * g_alpha
            + 2.0 * alpha * alpha * l1 / (min * min));

    let assumptions_ok = cond1.satisfied && cond2.satisfied && cond3.satisfied;
    Ok(BoundReport {
        regime: BoundRegime::ShallowNonUnique,
        assumptions_ok,
        assumptions: vec![cond1, cond2, cond3],
        upper,
        lower: None,
        lower_vacuous: false,
        inexact_constants: !c.exact,
    })
}

/// Deep non-unique upper bound, constants over 𝒩. No lower bound exists.
pub fn bound_deep_nonunique(input: &BoundInput) -> Result<BoundReport, BoundError> {
    if input.depth < 3 {
        return Err(BoundError::WrongDepth {
            expected: ">= 3",
            got: input.depth,
        });
    }
    let c = &input.constants;
    let (rho, rho_minus, rho_tilde) = (c.rho, c.rho_minus, c.rho_tilde);
    let gamma = gamma_of(input.depth);
    let alpha = input.alpha;
    let min = input.min_s;
    let sc = input.sc_count as f64;
    let eps = alpha / min;
    let ratio = input.norm_l1 / min;
    let h_rho = deep_h(input.depth, rho).expect("rho in [0,1)");
    let slope_denom = gamma * (1.0 - rho).powf(1.0 / gamma + 1.0);

    let t1 = ratio.powf(-(1.0 + gamma)) / 8.0;
    let t2 =
        0.5 * ((1.0 - rho).powf(1.0 / gamma + 1.0) * gamma / (4.0 * rho_minus)).powf(1.0 / gamma);
    let t3 = 1.0 / (8.0 * rho_tilde * sc * (h_rho + 1.0));
    let cond = check("three_way_alpha_threshold", eps, t1.min(t2).min(t3), false);

    let c_sharp = 5.0
        * rho_tilde
        * (88.0 * ratio.powf(1.0 + gamma) + 512.0 * rho_tilde * sc * (h_rho + 1.0))
        * (2.0 * input.dim() as f64 * input.norm_inf / min).powf(1.0 + gamma);
    let g_eps = c_sharp
        * eps
        * sc
        * (h_rho + 4.0 * 2.0f64.powf(gamma) * rho_minus * eps.powf(gamma) / slope_denom)
        + 10.0 * eps * ratio.powf(1.0 + gamma);
    let upper = alpha * ((1.0 + rho_tilde) * sc * h_rho + ratio.powf(1.0 + gamma) + g_eps);

    Ok(BoundReport {
        regime: BoundRegime::DeepNonUnique,
        assumptions_ok: cond.satisfied,
        assumptions: vec![cond],
        upper,
        lower: None,
        lower_vacuous: false,
        inexact_constants: !c.exact,
    })
}

/// Pick the evaluator matching the depth and uniqueness regime.
pub fn evaluate_bound(input: &BoundInput, unique: bool) -> Result<BoundReport, BoundError> {
    match (input.depth, unique) {
        (2, true) => bound_shallow_unique(input),
        (2, false) => bound_shallow_nonunique(input),
        (_, true) => bound_deep_unique(input),
        (_, false) => bound_deep_nonunique(input),
    }
}
