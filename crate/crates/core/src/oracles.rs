//! Closed forms for the p-balls `{|x|^p + |y|^p <= 1}` and the classical
//! isoperimetric relations, computed independently of the profile machinery.
//!
//! For `1 < p < ∞` the integrals carry an endpoint singularity
//! `(1 - x^q)^{-1/p}` at `x = 1`; the substitution `x = 1 - u²` removes it
//! for `p >= 2` and weakens it otherwise.

use std::f64::consts::{LN_2, PI};

use crate::body::conjugate_exponent;
use crate::error::{Error, Result};
use crate::quad::{integrate, QuadConfig};

fn quad_cfg() -> QuadConfig {
    QuadConfig {
        rel_tol: 1e-13,
        abs_tol: 1e-300,
        max_intervals: 20_000,
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda > 1.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(Error::LambdaOutOfDomain { lambda, bound: 1.0 })
    }
}

/// Panel boundaries in `u`, graded toward `u = 0` and around the peak at
/// `u ~ sqrt(λ - 1)`.
fn u_points(lambda: f64) -> Vec<f64> {
    let mut pts = vec![0.0, 1.0];
    let peak = (lambda - 1.0).sqrt();
    for k in 1..=12 {
        pts.push(10f64.powi(-k));
    }
    for f in [0.25, 0.5, 1.0, 2.0, 4.0] {
        pts.push(f * peak);
    }
    pts.retain(|&u| (0.0..=1.0).contains(&u));
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

/// `[∫₀¹ dx / ((λ²-x²)(1-x^q)^{1/p}), ∫₀¹ x^q dx / ((λ²-x²)(1-x^q)^{1/p})]`.
fn pball_integrals(p: f64, lambda: f64) -> Result<[f64; 2]> {
    let q = conjugate_exponent(p);
    let r = integrate(
        |u| {
            if u == 0.0 {
                return [0.0, 0.0];
            }
            let u2 = u * u;
            let x = 1.0 - u2;
            let ln_x = (-u2).ln_1p();
            let xq = (q * ln_x).exp();
            let one_minus_xq = -(q * ln_x).exp_m1();
            // λ² - x² = (λ - 1 + u²)(λ + x)
            let denom = (lambda - 1.0 + u2) * (lambda + x) * (one_minus_xq.ln() / p).exp();
            let w = 2.0 * u / denom;
            [w, xq * w]
        },
        &u_points(lambda),
        quad_cfg(),
    )?;
    Ok(r.value)
}

/// `L₊(λ)` of the p-ball, `λ > 1`.
pub fn pball_l_plus(p: f64, lambda: f64) -> Result<f64> {
    check_lambda(lambda)?;
    let log_ratio = (2.0 / (lambda - 1.0)).ln_1p();
    if p == 1.0 {
        Ok(4.0 * lambda / (lambda * lambda - 1.0) + 2.0 * log_ratio)
    } else if p == f64::INFINITY {
        Ok(2.0 * log_ratio)
    } else {
        Ok(4.0 * lambda * pball_integrals(p, lambda)?[0])
    }
}

/// `F₊(λ)` of the p-ball, `λ > 1`.
pub fn pball_f_plus(p: f64, lambda: f64) -> Result<f64> {
    check_lambda(lambda)?;
    let l2m1 = (lambda - 1.0) * (lambda + 1.0);
    if p == 1.0 {
        Ok(4.0 / l2m1)
    } else if p == f64::INFINITY {
        // 2 ln(λ²/(λ²-1)) = 2 ln(1 + 1/(λ²-1))
        Ok(2.0 * (1.0 / l2m1).ln_1p())
    } else {
        Ok(4.0 * pball_integrals(p, lambda)?[1])
    }
}

/// Asymptote intercept `a₊` of the p-ball; `+∞` for `p = 1`.
pub fn pball_a_plus(p: f64) -> Result<f64> {
    if p == 1.0 {
        return Ok(f64::INFINITY);
    }
    if p == f64::INFINITY {
        return Ok(4.0 * LN_2);
    }
    let q = conjugate_exponent(p);
    // 4 ∫₀¹ (1-x^q)^{1/q} / (1-x²) dx, x = 1 - u², 1 - x² = u²(2 - u²)
    let r = integrate(
        |u| {
            if u == 0.0 {
                return [0.0];
            }
            let u2 = u * u;
            let one_minus_xq = -(q * (-u2).ln_1p()).exp_m1();
            [2.0 * (one_minus_xq.ln() / q).exp() / (u * (2.0 - u2))]
        },
        &u_points(2.0),
        quad_cfg(),
    )?;
    Ok(4.0 * r.value[0])
}

/// `L² - 4πA - A²`, zero on the disk's equality contours.
pub fn circle_hyperbola_residual(l: f64, a: f64) -> f64 {
    l * l - 4.0 * PI * a - a * a
}

/// `cosh(L/4) - e^{A/4}`, zero on the square's equality contours.
pub fn square_iso_residual(l: f64, a: f64) -> f64 {
    (l / 4.0).cosh() - (a / 4.0).exp()
}

/// `L/2 - (arcosh(s) + sqrt(s² - 1))`, `s = (A + 2)/2`, zero on the
/// diamond's equality contours.
pub fn diamond_iso_residual(l: f64, a: f64) -> f64 {
    let s = (a + 2.0) / 2.0;
    // s² - 1 = (A/2)(A/2 + 2), formed without cancellation for small A
    let root = (0.5 * a * (0.5 * a + 2.0)).sqrt();
    l / 2.0 - ((s + root).ln() + root)
}

/// Normalized circle relation `y² - x² - 1` with `x = L/a₊`, `y = (A + a₊)/a₊`.
pub fn circle_normalized_residual(l: f64, a: f64) -> f64 {
    let ap = 2.0 * PI;
    let (x, y) = (l / ap, (a + ap) / ap);
    y * y - x * x - 1.0
}

/// Normalized square relation `2^x + 2^{-x} - 2^y` with `x = L/a₊`,
/// `y = (A + a₊)/a₊`.
pub fn square_normalized_residual(l: f64, a: f64) -> f64 {
    let ap = 4.0 * LN_2;
    let (x, y) = (l / ap, (a + ap) / ap);
    x.exp2() + (-x).exp2() - y.exp2()
}
