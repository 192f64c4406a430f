//! Implementations of the `dln` subcommands.

use crate::errors::CliError;
use dln_core::bounds::{evaluate_bound, BoundInput, BoundReport};
use dln_core::experiments::{emit_csv, emit_svg, generate_instance, run_sweep, Instance};
use dln_core::lp::{l1_certificate, L1Certificate};
use dln_core::nullspace::{
    complement_basis, compute_constants, tangent_basis, NspConstants, WeightRegime,
};
use dln_core::numerics::{kernel_basis, Vector, DEFAULT_RANK_TOL};
use dln_core::potentials::{deep_h, gamma_of, Potential};
use dln_core::sharpness::{
    build_sharp_deep, build_sharp_shallow, fixed_point_deep, fixed_point_shallow, limit_ratio,
    SharpInstance, SharpVariant,
};
use dln_core::solvers::{
    frank_wolfe_select, mirror_descent, LminPolytope, SelectionObjective, SolveConfig,
};
use serde::Serialize;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

fn write_json<T: Serialize>(value: &T, out: Option<PathBuf>) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn read_instance(path: &Path) -> Result<Instance, CliError> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

pub fn gen(
    n: usize,
    d: usize,
    s: usize,
    eta: f64,
    seed: u64,
    paper_scale: bool,
    out: Option<PathBuf>,
) -> Result<(), CliError> {
    let (n, d, s) = if paper_scale { (60, 300, 5) } else { (n, d, s) };
    let instance = generate_instance(n, d, s, eta, seed)?;
    write_json(&instance, out)
}

pub fn l1(instance: &Path, out: Option<PathBuf>) -> Result<(), CliError> {
    let inst = read_instance(instance)?;
    let cert = l1_certificate(&inst.a, &inst.y)?;
    write_json(&cert, out)
}

#[derive(Serialize)]
struct ConstantsReport {
    unique: bool,
    support: Vec<usize>,
    sign: Vec<i8>,
    /// Dimension of the search subspace the constants were taken over
    /// (ker A when unique, the weighted complement 𝒩 otherwise).
    search_dim: usize,
    constants: NspConstants,
}

/// The certificate plus the distinguished minimizer and search subspace for
/// the requested depth.
fn certificate_and_search(
    inst: &Instance,
    depth: u32,
) -> Result<(L1Certificate, Vector, dln_core::numerics::SubspaceBasis), CliError> {
    let cert = l1_certificate(&inst.a, &inst.y)?;
    let kernel = kernel_basis(&inst.a, DEFAULT_RANK_TOL);
    if cert.unique {
        let gstar = cert.minimizer.clone();
        Ok((cert, gstar, kernel))
    } else {
        let polytope = LminPolytope::from_certificate(&inst.a, &inst.y, &cert);
        let gstar = frank_wolfe_select(&polytope, SelectionObjective::for_depth(depth), 1e-9)?;
        let tangent = tangent_basis(&kernel, &cert.support, &cert.sign);
        let search = complement_basis(&kernel, &tangent, &gstar, WeightRegime::for_depth(depth))?;
        Ok((cert, gstar, search))
    }
}

pub fn constants(
    instance: &Path,
    depth: u32,
    cap: usize,
    out: Option<PathBuf>,
) -> Result<(), CliError> {
    let inst = read_instance(instance)?;
    let (cert, gstar, search) = certificate_and_search(&inst, depth)?;
    let constants = compute_constants(&search, &cert.support, &cert.sign, &gstar, cap)?;
    write_json(
        &ConstantsReport {
            unique: cert.unique,
            support: cert.support,
            sign: cert.sign,
            search_dim: search.dim(),
            constants,
        },
        out,
    )
}

#[derive(Serialize)]
struct BoundsRow {
    alpha: f64,
    report: BoundReport,
}

pub fn bounds(
    instance: &Path,
    depth: u32,
    alphas: &[f64],
    out: Option<PathBuf>,
) -> Result<(), CliError> {
    let inst = read_instance(instance)?;
    let (cert, gstar, search) = certificate_and_search(&inst, depth)?;
    let constants = compute_constants(&search, &cert.support, &cert.sign, &gstar, 16)?;
    let mut rows = Vec::with_capacity(alphas.len());
    for &alpha in alphas {
        let input = BoundInput::new(
            constants.clone(),
            gstar.clone(),
            cert.support.clone(),
            alpha,
            depth,
        )?;
        rows.push(BoundsRow {
            alpha,
            report: evaluate_bound(&input, cert.unique)?,
        });
    }
    write_json(&rows, out)
}

pub fn solve(
    instance: &Path,
    depth: u32,
    alpha: f64,
    tol: f64,
    max_iters: usize,
    out: Option<PathBuf>,
) -> Result<(), CliError> {
    let inst = read_instance(instance)?;
    let potential = Potential::of_depth(depth, alpha)?;
    let cfg = SolveConfig::default()
        .with_loss_tol(tol)
        .with_max_iters(max_iters);
    let trace = mirror_descent(&inst.a, &inst.y, &potential, &cfg)?;
    write_json(&trace, out)
}

#[derive(Serialize)]
struct SweepSummary {
    slope: f64,
    slope_window: (f64, f64),
    r_squared: f64,
    used_oracle: bool,
    inexact_constants: bool,
    failures: Vec<(f64, String)>,
}

#[allow(clippy::too_many_arguments)]
pub fn sweep(
    instance: &Path,
    depth: u32,
    alphas: &[f64],
    tol: f64,
    max_iters: usize,
    with_bounds: bool,
    out: &Path,
    svg: Option<&Path>,
) -> Result<(), CliError> {
    let inst = read_instance(instance)?;
    let cfg = SolveConfig::default()
        .with_loss_tol(tol)
        .with_max_iters(max_iters);
    let result = run_sweep(&inst, depth, alphas, &cfg, with_bounds)?;
    emit_csv(&result, out)?;
    if let Some(svg_path) = svg {
        emit_svg(std::slice::from_ref(&result), svg_path)?;
    }
    write_json(
        &SweepSummary {
            slope: result.slope,
            slope_window: result.slope_window,
            r_squared: result.r_squared,
            used_oracle: result.used_oracle,
            inexact_constants: result.inexact_constants,
            failures: result.failures.clone(),
        },
        None,
    )
}

#[derive(Serialize)]
struct SharpnessSummary {
    rho: f64,
    rho_tilde: f64,
    /// Theoretical limit of err_l1 / scaling.
    target_l1: f64,
    /// Theoretical limit of err_linf_sc / scaling.
    target_linf: f64,
    extrapolated_l1: Option<f64>,
    extrapolated_linf: Option<f64>,
}

fn fmt_f64(v: f64) -> String {
    format!("{:.16e}", v)
}

#[allow(clippy::too_many_arguments)]
pub fn sharpness(
    geometry: &str,
    d: usize,
    rho: f64,
    rho_minus: Option<f64>,
    kappa: f64,
    variant: &str,
    depth: u32,
    gamma1: f64,
    alphas: &[f64],
    out: &Path,
) -> Result<(), CliError> {
    let shallow = geometry == "shallow";
    let inst: SharpInstance = if shallow {
        let rho_minus = rho_minus.unwrap_or(rho.max(0.25));
        let variant = match variant {
            "lower-b" => SharpVariant::LowerB,
            _ => SharpVariant::UpperA,
        };
        build_sharp_shallow(d, rho, rho_minus, kappa, variant)?
    } else {
        build_sharp_deep(d, rho, gamma1)?
    };
    let sc_count = (d - 2) as f64;
    let min_s = inst.gstar[0].min(inst.gstar[1]);
    let kappa_star = inst.gstar[0].max(inst.gstar[1]) / min_s;
    let rho_minus_actual = inst.gamma2;

    // Scalings under which the ratios converge to the targets below.
    let (target_l1, target_linf, power) = if shallow {
        (
            sc_count
                * (1.0 + inst.rho_tilde())
                * min_s.powf(rho)
                * kappa_star.powf(rho_minus_actual),
            inst.gstar.norm_inf().powf(rho) / kappa_star.powf(rho_minus_actual),
            (1.0 - rho).min(2.0 * rho).max(0.1),
        )
    } else {
        let h = deep_h(depth, inst.rho()).map_err(CliError::from)?;
        (h, h, gamma_of(depth))
    };

    let mut csv = String::from("alpha,t,err_l1,err_linf_sc,ratio_l1,ratio_linf\n");
    let mut ratios_l1 = Vec::new();
    let mut ratios_linf = Vec::new();
    for &alpha in alphas {
        let t = if shallow {
            fixed_point_shallow(&inst, alpha)?
        } else {
            fixed_point_deep(&inst, depth, alpha)?
        };
        let diff = inst.point_at(t).sub(&inst.gstar);
        let err_l1 = diff.norm_l1();
        let err_linf_sc = (2..d).fold(0.0f64, |m, i| m.max(diff[i].abs()));
        let (ratio_l1, ratio_linf) = if shallow {
            let scale = alpha.powf(1.0 - rho);
            (err_l1 / scale, err_linf_sc / scale)
        } else {
            (
                err_l1 / (alpha * sc_count * (1.0 + inst.rho_tilde())),
                err_linf_sc / alpha,
            )
        };
        ratios_l1.push(ratio_l1);
        ratios_linf.push(ratio_linf);
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{}",
            fmt_f64(alpha),
            fmt_f64(t),
            fmt_f64(err_l1),
            fmt_f64(err_linf_sc),
            fmt_f64(ratio_l1),
            fmt_f64(ratio_linf),
        );
    }
    std::fs::write(out, csv)?;

    let extrapolate = |ratios: &[f64], target: f64| {
        if ratios.len() >= 3 && target != 0.0 {
            let (_, limit) = limit_ratio(alphas, ratios, target, power);
            Some(limit * target)
        } else {
            None
        }
    };
    write_json(
        &SharpnessSummary {
            rho: inst.rho(),
            rho_tilde: inst.rho_tilde(),
            target_l1,
            target_linf,
            extrapolated_l1: extrapolate(&ratios_l1, target_l1),
            extrapolated_linf: extrapolate(&ratios_linf, target_linf),
        },
        None,
    )
}
