//! Adaptive Simpson quadrature with interval halving.

use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum QuadError {
    #[error("subdivision limit reached; best estimate {estimate:.12e}")]
    MaxDepth { estimate: f64 },
}

const MAX_DEPTH: u32 = 60;

/// ∫ₐᵇ f, adaptive Simpson with Richardson correction.
///
/// The result satisfies |result − ∫f| ≲ tol·(1 + |result|) for smooth
/// integrands. [`QuadError::MaxDepth`] carries the best estimate when the
/// recursion bottoms out.
pub fn adaptive_quadrature<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    tol: f64,
) -> Result<f64, QuadError> {
    assert!(tol > 0.0, "tol must be positive");
    if a == b {
        return Ok(0.0);
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = simpson(a, b, fa, fm, fb);
    // Scale the absolute budget by the first coarse estimate so the contract
    // is relative for large integrals without going to zero for small ones.
    let budget = tol * (1.0 + whole.abs());
    let mut hit_depth = false;
    let est = recurse(
        &mut f,
        a,
        b,
        fa,
        fm,
        fb,
        whole,
        budget,
        MAX_DEPTH,
        &mut hit_depth,
    );
    if hit_depth {
        Err(QuadError::MaxDepth { estimate: est })
    } else {
        Ok(est)
    }
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn recurse<F: FnMut(f64) -> f64>(
    f: &mut F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    budget: f64,
    depth: u32,
    hit_depth: &mut bool,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * budget {
        return left + right + delta / 15.0;
    }
    if depth == 0 {
        *hit_depth = true;
        return left + right + delta / 15.0;
    }
    recurse(
        f,
        a,
        m,
        fa,
        flm,
        fm,
        left,
        0.5 * budget,
        depth - 1,
        hit_depth,
    ) + recurse(
        f,
        m,
        b,
        fm,
        frm,
        fb,
        right,
        0.5 * budget,
        depth - 1,
        hit_depth,
    )
}
