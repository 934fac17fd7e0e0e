//! Length and area profiles `L±(λ)`, `F±(λ)` of one-revolution extremals,
//! their inverses, and the asymptote intercept `a₊`.
//!
//! With `c° = cos_Ω°(θ°)` and `c = cos_Ω(θ(θ°))`,
//!
//! ```text
//! L₊(λ) = ∫ dθ° / (λ - c°),      F₊(λ) = ∫ c dθ° / (λ - c°),      λ > M₊°
//! L₋(λ) = ∫ dθ° / (c° - λ),      F₋(λ) = ∫ c dθ° / (c° - λ),      λ < -M₋°
//! ```
//!
//! over one period of the polar. On a polygon piece `c°` is linear in `θ°`
//! and `c` is constant, so each piece integrates to a logarithm. For p-balls
//! the integrals run over the eight octant arcs of the polar in the arc
//! parameter, where the gap `λ - c°` near the extreme points can be formed
//! without cancellation.

use std::fmt;
use std::io::Write;

use rayon::prelude::*;

use crate::body::{ConvexBody, Extents};
use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::io::fmt17;
use crate::quad::{integrate, QuadConfig};
use crate::roots::solve_decreasing;
use crate::trig::{Correspondence, TrigTable};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn factor(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "+" | "plus" => Ok(Sign::Plus),
            "-" | "minus" => Ok(Sign::Minus),
            _ => Err(Error::InvalidArgument(format!("sign must be + or -, got `{s}`"))),
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

#[derive(Clone, Copy, Debug)]
pub struct IsoConfig {
    /// Minimal distance of `λ` from the end of its domain.
    pub eps_min: f64,
    /// For p-balls, `λ` closer than this fraction of the extent to the end of
    /// the domain is rejected.
    pub near_singular_rel: f64,
    pub quad: QuadConfig,
}

impl Default for IsoConfig {
    fn default() -> Self {
        Self {
            eps_min: 1e-9,
            near_singular_rel: 1e-6,
            quad: QuadConfig {
                rel_tol: 1e-12,
                abs_tol: 1e-300,
                max_intervals: 20_000,
            },
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProfilePoint {
    pub lambda: f64,
    pub sign: Sign,
    pub l: f64,
    /// Signed area: positive for `+`, negative for `-`.
    pub f: f64,
    /// `F` through the alternative form `∫ sin_Ω° sin_Ω / (λ - c°)² dθ°`.
    pub f_alt: f64,
}

impl ProfilePoint {
    pub fn f_discrepancy(&self) -> f64 {
        (self.f - self.f_alt).abs() / self.f.abs()
    }
}

/// One polar edge piece: `c°` runs linearly from `a.x` to `b.x` while the
/// corresponding point of the body stays at `v`.
#[derive(Clone, Copy, Debug)]
struct Piece {
    a: Vec2,
    b: Vec2,
    span: f64,
    v: Vec2,
}

/// A body, its polar, their trig tables and the angle correspondence.
#[derive(Clone, Debug)]
pub struct IsoContext {
    omega: ConvexBody,
    polar: ConvexBody,
    corr: Correspondence,
    extents: Extents,
    polar_area: f64,
    pieces: Option<Vec<Piece>>,
    config: IsoConfig,
}

/// `ln(1 + w) / w`.
#[inline]
fn ln1p_over(w: f64) -> f64 {
    if w.abs() < 1e-8 {
        1.0 - w * (0.5 - w / 3.0)
    } else {
        w.ln_1p() / w
    }
}

/// `∫₀¹ s / (1 - z s)² ds`.
fn g_moment(z: f64) -> f64 {
    if z.abs() < 1e-2 {
        let mut sum = 0.0;
        let mut zn = 1.0;
        for n in 0..12 {
            sum += (n + 1) as f64 / (n + 2) as f64 * zn;
            zn *= z;
        }
        sum
    } else {
        1.0 / (z * (1.0 - z)) + (-z).ln_1p() / (z * z)
    }
}

impl IsoContext {
    pub fn new(omega: ConvexBody, resolution: usize) -> Result<Self> {
        Self::with_config(omega, resolution, IsoConfig::default())
    }

    pub fn with_config(omega: ConvexBody, resolution: usize, config: IsoConfig) -> Result<Self> {
        let polar = omega.polar();
        let trig_omega = TrigTable::build(&omega, resolution)?;
        let trig_polar = TrigTable::build(&polar, resolution)?;
        let corr = Correspondence::new(trig_omega, trig_polar)?;
        let pieces = match &polar {
            ConvexBody::Polygon(_) => {
                let tp = corr.polar();
                Some(
                    (0..tp.segment_count())
                        .map(|i| {
                            let (a, b) = tp.segment_points(i).expect("polygon segments");
                            Piece {
                                a,
                                b,
                                span: a.cross(b),
                                v: omega.support_face((a + b) * 0.5).midpoint(),
                            }
                        })
                        .collect(),
                )
            }
            ConvexBody::PBall(_) => None,
        };
        Ok(Self {
            extents: polar.x_extents(),
            polar_area: polar.euclid_area(),
            omega,
            polar,
            corr,
            pieces,
            config,
        })
    }

    pub fn omega(&self) -> &ConvexBody {
        &self.omega
    }

    pub fn polar(&self) -> &ConvexBody {
        &self.polar
    }

    pub fn correspondence(&self) -> &Correspondence {
        &self.corr
    }

    pub fn trig_omega(&self) -> &TrigTable {
        self.corr.omega()
    }

    pub fn trig_polar(&self) -> &TrigTable {
        self.corr.polar()
    }

    /// `M±°` of the polar.
    pub fn extents(&self) -> Extents {
        self.extents
    }

    /// `S_Ω°`.
    pub fn polar_area(&self) -> f64 {
        self.polar_area
    }

    pub fn config(&self) -> &IsoConfig {
        &self.config
    }

    /// Closest admissible distance of `λ` from the end of its domain.
    pub fn domain_margin(&self, sign: Sign) -> f64 {
        let m = match sign {
            Sign::Plus => self.extents.m_plus,
            Sign::Minus => self.extents.m_minus,
        };
        if self.pieces.is_some() {
            self.config.eps_min
        } else {
            self.config.eps_min.max(self.config.near_singular_rel * m)
        }
    }

    /// Admissible end of the domain: `M₊° + margin` or `-M₋° - margin`.
    pub fn domain_bound(&self, sign: Sign) -> f64 {
        match sign {
            Sign::Plus => self.extents.m_plus + self.domain_margin(sign),
            Sign::Minus => -self.extents.m_minus - self.domain_margin(sign),
        }
    }

    fn check_domain(&self, lambda: f64, sign: Sign) -> Result<()> {
        let bound = self.domain_bound(sign);
        let ok = match sign {
            Sign::Plus => lambda >= bound,
            Sign::Minus => lambda <= bound,
        };
        if ok && lambda.is_finite() {
            Ok(())
        } else {
            Err(Error::LambdaOutOfDomain { lambda, bound })
        }
    }

    /// `(L, F)` at `λ` for the given family.
    pub fn profile(&self, lambda: f64, sign: Sign) -> Result<ProfilePoint> {
        self.check_domain(lambda, sign)?;
        let [l, f, f_alt] = match &self.pieces {
            Some(pieces) => polygon_integrals(pieces, lambda),
            None => self.pball_integrals(lambda, sign)?,
        };
        let s = sign.factor();
        Ok(ProfilePoint {
            lambda,
            sign,
            l: s * l,
            f: s * f,
            f_alt: s * f_alt,
        })
    }

    pub fn profile_table(&self, lambdas: &[f64], sign: Sign) -> Vec<Result<ProfilePoint>> {
        lambdas.par_iter().map(|&l| self.profile(l, sign)).collect()
    }

    /// `∫ [1, c, sin_Ω° sin_Ω / (λ - c°)] / (λ - c°) dθ°` over the polar octants.
    fn pball_integrals(&self, lambda: f64, sign: Sign) -> Result<[f64; 3]> {
        let arc = self.trig_polar().pball_arc().expect("p-ball polar");
        let rp = arc.scale();
        let p_polar = arc.p();
        let t_max = arc.t_max();
        let mut total = [0.0; 3];
        for o in 0..8 {
            // octants touching the extreme point relevant to the sign
            let near = match sign {
                Sign::Plus => o == 0 || o == 7,
                Sign::Minus => o == 3 || o == 4,
            };
            let delta = match sign {
                Sign::Plus => lambda - rp,
                Sign::Minus => -rp - lambda,
            };
            let mut points = vec![0.0];
            if near {
                let t_star = (p_polar * delta / rp).powf(1.0 / p_polar);
                for k in [0.125, 0.5, 1.0, 2.0, 8.0, 32.0] {
                    let t = k * t_star;
                    if t < 0.9 * t_max {
                        points.push(t);
                    }
                }
            }
            points.push(t_max);
            let res = integrate(
                |t| {
                    let (pt, rate, gap) = arc.point(o, t);
                    let denom = match (near, sign) {
                        (true, Sign::Plus) => delta + rp * gap,
                        (true, Sign::Minus) => -(delta + rp * gap),
                        _ => lambda - pt.x,
                    };
                    let s = self.omega.support_face(pt).midpoint();
                    let w = rate / denom;
                    [w, s.x * w, pt.y * s.y * w / denom]
                },
                &points,
                self.config.quad,
            )?;
            for i in 0..3 {
                total[i] += res.value[i];
            }
        }
        Ok(total)
    }

    /// Solves `F±(λ) = ±area` for `λ` (`area > 0`).
    pub fn solve_lambda_for_area(&self, area: f64, sign: Sign) -> Result<f64> {
        if !(area > 0.0) || !area.is_finite() {
            return Err(Error::InvalidArgument(format!("area must be positive, got {area}")));
        }
        let lam0 = (self.polar_area / area).sqrt();
        self.solve_profile(sign, lam0, area, |p| p.f.abs())
    }

    /// Solves `L±(λ) = length` for `λ` (`length > 0`).
    pub fn lambda_of_length(&self, length: f64, sign: Sign) -> Result<f64> {
        if !(length > 0.0) || !length.is_finite() {
            return Err(Error::InvalidArgument(format!("length must be positive, got {length}")));
        }
        let lam0 = 2.0 * self.polar_area / length;
        self.solve_profile(sign, lam0, length, |p| p.l)
    }

    /// Monotone solve in `u = ln|λ - end of domain|`, on which `ln` of either
    /// profile is strictly decreasing.
    fn solve_profile(&self, sign: Sign, lam0: f64, target: f64, pick: impl Fn(&ProfilePoint) -> f64) -> Result<f64> {
        let (end, m) = match sign {
            Sign::Plus => (self.extents.m_plus, self.extents.m_plus),
            Sign::Minus => (-self.extents.m_minus, self.extents.m_minus),
        };
        let s = sign.factor();
        let lambda_of = |u: f64| end + s * u.exp();
        let ln_target = target.ln();
        let g = |u: f64| -> Result<f64> {
            let p = self.profile(lambda_of(u), sign)?;
            Ok(pick(&p).ln() - ln_target)
        };
        let u_min = self.domain_margin(sign).ln();
        let u0 = (lam0 - m).max(1e-3 * m).ln();
        let u = solve_decreasing(g, u0, u_min, 1.0, 1e-14).map_err(|e| match e {
            Error::InvalidArgument(_) => Error::LambdaOutOfDomain {
                lambda: self.domain_bound(sign),
                bound: self.domain_bound(sign),
            },
            e => e,
        })?;
        Ok(lambda_of(u))
    }

    /// `𝓕±(L)`: signed area of the extremal of length `L`.
    pub fn f_of_l(&self, length: f64, sign: Sign) -> Result<f64> {
        let lam = self.lambda_of_length(length, sign)?;
        Ok(self.profile(lam, sign)?.f)
    }

    /// `𝓛₊(A)` for `sign = +`, `𝓛₋(-A)` for `sign = -`; `area > 0` is the
    /// magnitude.
    pub fn l_of_f(&self, area: f64, sign: Sign) -> Result<f64> {
        let lam = self.solve_lambda_for_area(area, sign)?;
        Ok(self.profile(lam, sign)?.l)
    }

    /// `L₊(λ)/λ - F₊(λ)`, which increases to `a₊` as `λ ↓ M₊°`.
    pub fn asymptote_partial(&self, lambda: f64) -> Result<f64> {
        let p = self.profile(lambda, Sign::Plus)?;
        Ok(p.l / lambda - p.f)
    }

    /// `a₊ = lim_{λ↓M₊°} (L₊(λ)/λ - F₊(λ))`, or `+∞` when the limit diverges.
    ///
    /// Since `L₊/λ - F₊ = ∫_λ^∞ L₊(μ)/μ² dμ`, swapping the order of
    /// integration gives the limit directly as `∫ G(c°) dθ°` with
    /// `G(c) = ln(M/(M - c))/c² - 1/(cM)`, `M = M₊°`. The integral diverges
    /// exactly when `c° = M` on a set of positive measure, i.e. when the polar
    /// has an edge on the line `x = M`.
    pub fn asymptote_a_plus(&self) -> Result<f64> {
        let m = self.extents.m_plus;
        match &self.pieces {
            Some(pieces) => {
                let mut total = 0.0;
                for pc in pieces {
                    let (ga, gb) = (m - pc.a.x, m - pc.b.x);
                    if ga <= 1e-12 * m && gb <= 1e-12 * m {
                        return Ok(f64::INFINITY);
                    }
                    let d = pc.b.x - pc.a.x;
                    total += if d.abs() < 1e-3 * m {
                        let r = integrate(
                            |s| [g_kernel(m, pc.a.x + s * d, ga - s * d)],
                            &[0.0, 1.0],
                            self.config.quad,
                        )?;
                        pc.span * r.value[0]
                    } else {
                        pc.span * (h_kernel(m, pc.b.x, gb) - h_kernel(m, pc.a.x, ga)) / d
                    };
                }
                Ok(total)
            }
            None => {
                let arc = self.trig_polar().pball_arc().expect("p-ball polar");
                let rp = arc.scale();
                let mut total = 0.0;
                for o in 0..8 {
                    let near = o == 0 || o == 7;
                    let r = integrate(
                        |t| {
                            let (pt, rate, gap) = arc.point(o, t);
                            let mc = if near { rp * gap } else { m - pt.x };
                            [rate * g_kernel(m, pt.x, mc)]
                        },
                        &[0.0, arc.t_max()],
                        self.config.quad,
                    )?;
                    total += r.value[0];
                }
                Ok(total)
            }
        }
    }
}

/// `G(c) = ln(M/(M - c))/c² - 1/(cM)`, given `mc = M - c` computed accurately.
fn g_kernel(m: f64, c: f64, mc: f64) -> f64 {
    let z = c / m;
    if z.abs() < 1e-3 {
        // 1/2 + z/3 + z²/4 + ...
        let mut sum = 0.0;
        let mut zn = 1.0;
        for n in 0..6 {
            sum += zn / (n + 2) as f64;
            zn *= z;
        }
        sum / (m * m)
    } else {
        ((m / mc).ln() / (z * z) - 1.0 / z) / (m * m)
    }
}

/// Antiderivative of [`g_kernel`] up to a constant: `(1 - z) ln(1 - z) / (Mz)`.
fn h_kernel(m: f64, c: f64, mc: f64) -> f64 {
    let z = c / m;
    let one_minus_z = mc / m;
    if one_minus_z <= 0.0 {
        return 0.0;
    }
    if z == 0.0 {
        return -1.0 / m;
    }
    if z.abs() < 0.5 {
        one_minus_z * (-z).ln_1p() / (m * z)
    } else {
        one_minus_z * one_minus_z.ln() / (m * z)
    }
}

/// Exact `[∫ 1, ∫ c, ∫ sin° sin_Ω / (λ - c°)] / (λ - c°)` over polygon pieces.
fn polygon_integrals(pieces: &[Piece], lambda: f64) -> [f64; 3] {
    let mut out = [0.0; 3];
    for pc in pieces {
        let d = pc.b.x - pc.a.x;
        let beta_a = lambda - pc.a.x;
        let beta_b = lambda - pc.b.x;
        // ∫₀¹ ds / (β_a - d s) = ln(β_a/β_b)/d
        let inv_mean = ln1p_over(d / beta_b) / beta_b;
        let l = pc.span * inv_mean;
        out[0] += l;
        out[1] += pc.v.x * l;
        let z = d / beta_a;
        let m0 = 1.0 / (beta_a * beta_b);
        let m1 = g_moment(z) / (beta_a * beta_a);
        out[2] += pc.span * pc.v.y * (pc.a.y * m0 + (pc.b.y - pc.a.y) * m1);
    }
    out
}

/// Writes `lambda,L,F,sign` rows.
pub fn write_profile_csv<W: Write>(points: &[ProfilePoint], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["lambda", "L", "F", "sign"])?;
    for p in points {
        w.write_record([fmt17(p.lambda), fmt17(p.l), fmt17(p.f), p.sign.symbol().to_string()])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn ctx(b: ConvexBody) -> IsoContext {
        IsoContext::new(b, 1024).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn kernel_series_match_direct_forms() {
        for z in [-0.009f64, -1e-4, 1e-5, 0.008] {
            let direct = 1.0 / (z * (1.0 - z)) + (-z).ln_1p() / (z * z);
            assert!((g_moment(z) - direct).abs() < 1e-9, "{z}");
        }
        let m = 1.3f64;
        for c in [1e-4f64, -2e-4] {
            let direct = (m / (m - c)).ln() / (c * c) - 1.0 / (c * m);
            assert!((g_kernel(m, c, m - c) - direct).abs() < 1e-6 * direct.abs());
        }
    }

    #[test]
    fn profile_examples() {
        let s3 = 3f64.sqrt();
        let p = ctx(ConvexBody::disk(1.0)).profile(2.0, Sign::Plus).unwrap();
        assert!(rel(p.l, 2.0 * PI / s3) < 1e-11);
        assert!(rel(p.f, 2.0 * PI * (2.0 / s3 - 1.0)) < 1e-11);
        assert!(p.f_discrepancy() < 1e-10);
        let p = ctx(ConvexBody::diamond(1.0)).profile(2.0, Sign::Plus).unwrap();
        assert!(rel(p.l, 8.0 / 3.0 + 2.0 * 3f64.ln()) < 1e-14);
        assert!(rel(p.f, 4.0 / 3.0) < 1e-14);
        assert!(rel(p.f_alt, 4.0 / 3.0) < 1e-13);
        let p = ctx(ConvexBody::square(1.0)).profile(2.0, Sign::Plus).unwrap();
        assert!(rel(p.l, 2.0 * 3f64.ln()) < 1e-14);
        assert!(rel(p.f, 2.0 * (4.0f64 / 3.0).ln()) < 1e-14);
    }

    #[test]
    fn domain_is_enforced() {
        let c = ctx(ConvexBody::square(1.0));
        assert!(matches!(c.profile(1.0, Sign::Plus), Err(Error::LambdaOutOfDomain { .. })));
        assert!(matches!(c.profile(-0.5, Sign::Minus), Err(Error::LambdaOutOfDomain { .. })));
        let m = c.profile(-2.0, Sign::Minus).unwrap();
        assert!(m.f < 0.0 && m.l > 0.0);
    }

    #[test]
    fn solver_examples() {
        let disk = ctx(ConvexBody::disk(1.0));
        let lam = disk.solve_lambda_for_area(2.0 * PI, Sign::Plus).unwrap();
        assert!((lam - 2.0 / 3f64.sqrt()).abs() < 1e-9);
        let lam = disk.lambda_of_length(2.0 * PI, Sign::Plus).unwrap();
        assert!((lam - 2f64.sqrt()).abs() < 1e-9);
        let dia = ctx(ConvexBody::diamond(1.0));
        assert!((dia.solve_lambda_for_area(4.0 / 3.0, Sign::Plus).unwrap() - 2.0).abs() < 1e-9);
        let sq = ctx(ConvexBody::square(1.0));
        assert!((sq.lambda_of_length(2.0 * 3f64.ln(), Sign::Plus).unwrap() - 2.0).abs() < 1e-9);
        let big = disk.solve_lambda_for_area(1e3, Sign::Plus).unwrap();
        assert!(big > 1.0 && big < 1.0 + 1e-4);
        let l = disk.l_of_f(1.0, Sign::Plus).unwrap();
        assert!((l - (1.0 + 4.0 * PI).sqrt()).abs() < 1e-8);
    }

    #[test]
    fn asymptote_examples() {
        let a = ctx(ConvexBody::square(1.0)).asymptote_a_plus().unwrap();
        assert!((a - 4.0 * 2f64.ln()).abs() < 1e-12, "{a}");
        assert_eq!(ctx(ConvexBody::diamond(1.0)).asymptote_a_plus().unwrap(), f64::INFINITY);
        let a = ctx(ConvexBody::disk(1.0)).asymptote_a_plus().unwrap();
        assert!((a - 2.0 * PI).abs() < 1e-9, "{a}");
    }

    #[test]
    fn table_rows_are_independent() {
        let c = ctx(ConvexBody::disk(1.0));
        assert!(c.profile_table(&[], Sign::Plus).is_empty());
        let rows = c.profile_table(&[1.1, 1.0, 2.0], Sign::Plus);
        assert!(rows[0].is_ok() && rows[1].is_err() && rows[2].is_ok());
        for row in [&rows[0], &rows[2]] {
            let p = row.as_ref().unwrap();
            let s = (p.lambda * p.lambda - 1.0).sqrt();
            assert!(rel(p.l, 2.0 * PI / s) < 1e-10);
            assert!(rel(p.f, 2.0 * PI * (p.lambda / s - 1.0)) < 1e-10);
        }
    }
}
