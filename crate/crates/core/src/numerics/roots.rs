//! Brent's method: bisection-safeguarded inverse quadratic interpolation.

use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum RootError {
    #[error("no sign change on the bracket: f(lo) = {f_lo:.6e}, f(hi) = {f_hi:.6e}")]
    NoBracket { f_lo: f64, f_hi: f64 },
}

const MAX_ITERS: usize = 200;

/// Root of `f` on `[lo, hi]`, where `f(lo)` and `f(hi)` may not share a
/// strict sign.
///
/// Converges until `|f| ≤ tol·(1 + max(|f(lo)|, |f(hi)|))` or the bracket
/// width falls below `tol·(1 + |root|)` plus the machine-relative floor, so
/// passing a tiny `tol` refines to full `f64` precision. Deterministic:
/// identical inputs produce bit-identical outputs.
pub fn brent_root<F: FnMut(f64) -> f64>(
    mut f: F,
    lo: f64,
    hi: f64,
    tol: f64,
) -> Result<f64, RootError> {
    assert!(tol >= 0.0, "tol must be nonnegative");
    let mut a = lo;
    let mut b = hi;
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(RootError::NoBracket { f_lo: fa, f_hi: fb });
    }
    let ftol = tol * (1.0 + fa.abs().max(fb.abs()));

    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = b - a;

    for _ in 0..MAX_ITERS {
        if fb.abs() > fc.abs() {
            // b is the best iterate; keep it that way.
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * tol * (1.0 + b.abs());
        let m = 0.5 * (c - b);
        if m.abs() <= tol1 || fb == 0.0 || fb.abs() <= ftol {
            return Ok(b);
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            // Try interpolation: secant if only two points, inverse
            // quadratic otherwise.
            let s = fb / fa;
            let (mut p, mut q) = if a == c {
                (2.0 * m * s, 1.0 - s)
            } else {
                let q0 = fa / fc;
                let r = fb / fc;
                (
                    s * (2.0 * m * q0 * (q0 - r) - (b - a) * (r - 1.0)),
                    (q0 - 1.0) * (r - 1.0) * (s - 1.0),
                )
            };
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            if 2.0 * p < (3.0 * m * q - (tol1 * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(m) };
        fb = f(b);
        if (fb > 0.0) == (fc > 0.0) {
            c = a;
            fc = fa;
            d = b - a;
            e = b - a;
        }
    }
    Ok(b)
}
