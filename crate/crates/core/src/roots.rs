//! Bracketed scalar root finding.

use crate::error::{Error, Result};

/// Brent's method on a sign-changing bracket `[a, b]`.
///
/// Stops when the bracket is narrower than `xtol` (absolute) plus a few ulps,
/// or when `|f| <= ftol`.
pub fn brent<F>(mut f: F, mut a: f64, mut b: f64, xtol: f64, ftol: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut fa = f(a)?;
    let mut fb = f(b)?;
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::InvalidArgument(format!(
            "root not bracketed: f({a}) = {fa}, f({b}) = {fb}"
        )));
    }
    let mut c = b;
    let mut fc = fb;
    let mut d = b - a;
    let mut e = d;
    for _ in 0..200 {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * xtol;
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb.abs() <= ftol {
            return Ok(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
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
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = f(b)?;
    }
    Err(Error::NoConvergence { what: "Brent root finder" })
}

/// Solves `g(u) = 0` for a strictly decreasing `g` on `(u_min, +inf)`.
///
/// Starts from `u0` and walks in steps of `step` until the root is bracketed.
/// Returns an error if `g(u_min) < 0`, i.e. the root lies below the admissible
/// range.
pub fn solve_decreasing<F>(mut g: F, u0: f64, u_min: f64, step: f64, xtol: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut lo = u0.max(u_min);
    let mut glo = g(lo)?;
    if glo == 0.0 {
        return Ok(lo);
    }
    let mut hi;
    if glo < 0.0 {
        // root is to the left
        hi = lo;
        loop {
            if hi <= u_min {
                return Err(Error::InvalidArgument(
                    "target lies outside the admissible range".into(),
                ));
            }
            lo = (hi - step).max(u_min);
            glo = g(lo)?;
            if glo >= 0.0 {
                break;
            }
            hi = lo;
        }
    } else {
        let mut k = 0;
        loop {
            hi = lo + step;
            let ghi = g(hi)?;
            if ghi <= 0.0 {
                break;
            }
            lo = hi;
            k += 1;
            if k > 400 {
                return Err(Error::NoConvergence { what: "bracket expansion" });
            }
        }
    }
    brent(g, lo, hi, xtol, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn brent_sqrt2() {
        let r = brent(|x| Ok(x * x - 2.0), 0.0, 2.0, 1e-15, 0.0).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn brent_rejects_unbracketed() {
        assert!(brent(|x| Ok(x * x + 1.0), -1.0, 1.0, 1e-12, 0.0).is_err());
    }

    #[test]
    fn decreasing_walks_both_ways() {
        let g = |u: f64| Ok(3.0 - u);
        let r = solve_decreasing(g, -10.0, -100.0, 1.0, 1e-14).unwrap();
        assert!((r - 3.0).abs() < 1e-12);
        let r = solve_decreasing(g, 40.0, -100.0, 1.0, 1e-14).unwrap();
        assert!((r - 3.0).abs() < 1e-12);
        assert!(solve_decreasing(g, 40.0, 5.0, 1.0, 1e-14).is_err());
    }
}
