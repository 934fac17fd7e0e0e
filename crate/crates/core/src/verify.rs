//! Invariant suites over a set of bodies, run by the `verify` command.
//!
//! Every check has a dotted name `module.invariant`; the first failing check
//! stops the run and is reported as a JSON object.

use std::f64::consts::PI;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::body::ConvexBody;
use crate::contour::{check_isoperimetric, direct_contour, hausdorff, perturb_radially, solve_constants, synthesize_contour};
use crate::error::Result;
use crate::geom::Vec2;
use crate::oracles;
use crate::plane::{curve_length, green_area, HyperbolicPoint, Polyline};
use crate::profiles::{IsoContext, Sign};
use crate::quad::{integrate_scalar, QuadConfig};
use crate::trig::TrigTable;

pub const DEFAULT_SEED: u64 = 20_240_917;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Level {
    Fast,
    Full,
}

impl Level {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "fast" => Some(Level::Fast),
            "full" => Some(Level::Full),
            _ => None,
        }
    }
}

/// Deliberate corruption used to exercise the failure path.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Fault {
    /// Moves one trig-table sample off the boundary.
    TrigSample,
}

#[derive(Clone, Debug)]
pub struct Settings {
    pub level: Level,
    pub seed: u64,
    pub resolution: usize,
    pub fault: Option<Fault>,
}

impl Settings {
    pub fn new(level: Level) -> Self {
        Self {
            level,
            seed: DEFAULT_SEED,
            resolution: 4096,
            fault: None,
        }
    }

    fn pick(&self, fast: usize, full: usize) -> usize {
        match self.level {
            Level::Fast => fast,
            Level::Full => full,
        }
    }
}

/// A named body with its profile context.
pub struct Case {
    pub name: String,
    pub body: ConvexBody,
    pub ctx: IsoContext,
}

impl Case {
    pub fn new(name: impl Into<String>, body: ConvexBody, resolution: usize) -> Result<Self> {
        let ctx = IsoContext::new(body.clone(), resolution)?;
        Ok(Self {
            name: name.into(),
            body,
            ctx,
        })
    }

    /// p-ball exponent if the body is one of the `Ω_p` with unit scale.
    fn unit_pball_exponent(&self) -> Option<f64> {
        match &self.body {
            ConvexBody::PBall(b) if b.scale() == 1.0 => Some(b.p()),
            b if *b == ConvexBody::square(1.0) => Some(f64::INFINITY),
            b if *b == ConvexBody::diamond(1.0) => Some(1.0),
            _ => None,
        }
    }
}

/// Deterministic non-symmetric pentagon containing the origin.
pub fn random_pentagon(seed: u64) -> ConvexBody {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let mut angles: Vec<f64> = (0..5).map(|_| rng.gen_range(0.0..2.0 * PI)).collect();
        angles.sort_by(f64::total_cmp);
        let pts: Vec<Vec2> = angles
            .iter()
            .map(|&a| {
                let r = rng.gen_range(0.6..1.6);
                Vec2::new(r * a.cos() + 0.15, r * a.sin() - 0.1)
            })
            .collect();
        if let Ok(body) = ConvexBody::polygon(&pts) {
            let five = matches!(&body, ConvexBody::Polygon(p) if p.len() == 5);
            if five && !body.is_centrally_symmetric() {
                let ext = body.polar().x_extents();
                if ext.m_plus > 0.3 && ext.m_minus > 0.3 && (ext.m_plus - ext.m_minus).abs() > 0.05 {
                    return body;
                }
            }
        }
    }
}

pub const PENTAGON_SEED: u64 = 5;

/// The bodies shipped in `bodies/`.
pub fn shipped_bodies() -> Vec<(&'static str, ConvexBody)> {
    vec![
        ("square", ConvexBody::square(1.0)),
        ("diamond", ConvexBody::diamond(1.0)),
        ("disk", ConvexBody::disk(1.0)),
        ("p3", ConvexBody::pball(3.0, 1.0).expect("valid p-ball")),
        ("p1.5", ConvexBody::pball(1.5, 1.0).expect("valid p-ball")),
        ("pentagon", random_pentagon(PENTAGON_SEED)),
    ]
}

#[derive(Clone, Debug)]
pub struct CheckOutcome {
    pub check: String,
    pub body: String,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl CheckOutcome {
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "status": if self.passed { "pass" } else { "fail" },
            "check": self.check,
            "body": self.body,
            "detail": self.detail,
        })
    }
}

type CheckFn = fn(&Case, &Settings, &mut ChaCha8Rng) -> std::result::Result<String, String>;

fn checks() -> Vec<(&'static str, CheckFn)> {
    vec![
        ("convex_core.duality", check_duality),
        ("convex_core.bipolar", check_bipolar),
        ("convex_core.gauge-boundary", check_gauge_boundary),
        ("convex_core.convexity", check_convexity),
        ("convex_trig.table", check_trig_table),
        ("convex_trig.period", check_period),
        ("convex_trig.pythagorean-identity", check_identity),
        ("convex_trig.central-symmetry", check_central_symmetry),
        ("convex_trig.derivative-relation", check_derivative),
        ("convex_trig.sample-area", check_sample_area),
        ("finsler_plane.left-invariance", check_plane_invariance),
        ("finsler_plane.reversal-and-refinement", check_plane_reversal),
        ("iso_profiles.differential-identity", check_differential_identity),
        ("iso_profiles.asymptotics", check_asymptotics),
        ("iso_profiles.monotone-convex", check_monotone_convex),
        ("iso_profiles.integral-relation", check_integral_relation),
        ("iso_profiles.symmetry", check_profile_symmetry),
        ("iso_profiles.alt-form", check_alt_form),
        ("iso_profiles.inverse-shape", check_inverse_shape),
        ("iso_profiles.multi-loop", check_multi_loop),
        ("contour_synth.self-consistency", check_contours),
        ("contour_synth.family", check_family),
        ("contour_synth.left-equivariance", check_equivariance),
        ("contour_synth.inequality", check_inequality),
        ("analytic_oracles.profiles", check_oracle_profiles),
        ("analytic_oracles.asymptote", check_oracle_asymptote),
        ("analytic_oracles.relations", check_oracle_relations),
    ]
}

/// Runs every check on every case, stopping at the first failure. `log`
/// receives each outcome as it completes.
pub fn run(cases: &[Case], settings: &Settings, mut log: impl FnMut(&CheckOutcome)) -> Vec<CheckOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
    let mut out = Vec::new();
    for case in cases {
        for (name, f) in checks() {
            let start = Instant::now();
            let res = f(case, settings, &mut rng);
            let outcome = CheckOutcome {
                check: name.to_string(),
                body: case.name.clone(),
                passed: res.is_ok(),
                detail: res.unwrap_or_else(|e| e),
                seconds: start.elapsed().as_secs_f64(),
            };
            log(&outcome);
            let failed = !outcome.passed;
            out.push(outcome);
            if failed {
                return out;
            }
        }
    }
    out
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err_str(e: crate::error::Error) -> String {
    e.to_string()
}

fn random_vec(rng: &mut ChaCha8Rng, r: f64) -> Vec2 {
    Vec2::new(rng.gen_range(-r..r), rng.gen_range(-r..r))
}

fn check_duality(c: &Case, s: &Settings, rng: &mut ChaCha8Rng) -> std::result::Result<String, String> {
    let polar = c.body.polar();
    let mut worst: f64 = 0.0;
    for _ in 0..s.pick(200, 1000) {
        let v = random_vec(rng, 3.0);
        let d = (c.body.support(v) - polar.gauge(v)).abs() / (1.0 + v.norm());
        worst = worst.max(d);
    }
    ensure(worst <= 1e-10, || format!("support/polar-gauge mismatch {worst:e}"))?;
    Ok(format!("max {worst:.1e}"))
}

fn check_bipolar(c: &Case, _: &Settings, _: &mut ChaCha8Rng) -> std::result::Result<String, String> {
    let back = c.body.polar().polar();
    match (&c.body, &back) {
        (ConvexBody::Polygon(a), ConvexBody::Polygon(b)) => {
            ensure(a.len() == b.len(), || "vertex count changed".into())?;
            let worst = a
                .vertices()
                .iter()
                .map(|v| b.vertices().iter().map(|w| v.dist(*w)).fold(f64::INFINITY, f64::min))
                .fold(0.0, f64::max);
            ensure(worst <= 1e-10, || format!("vertex moved by {worst:e}"))?;
            Ok(format!("max vertex shift {worst:.1e}"))
        }
        (ConvexBody::PBall(a), ConvexBody::PBall(b)) => {
            ensure((a.p() - b.p()).abs() <= 1e-12 * a.p() && (a.scale() - b.scale()).abs() <= 1e-12 * a.scale(), || {
                format!("{} -> {}", c.body, back)
            })?;
            Ok("p and scale restored".into())
        }
        _ => Err("polar changed representation".into()),
    }
}

fn check_gauge_boundary(c: &Case, _: &Settings, rng: &mut ChaCha8Rng) -> std::result::Result<String, String> {
    let pts: Vec<Vec2> = match &c.body {
        ConvexBody::Polygon(p) => p.vertices().to_vec(),
        ConvexBody::PBall(b) => (0..200).map(|_| b.support_point(random_vec(rng, 1.0))).collect(),
    };
    let worst = pts.iter().map(|&v| (c.body.gauge(v) - 1.0).abs()).fold(0.0, f64::max);
    ensure(worst <= 1e-12, || format!("gauge deviates from 1 by {worst:e}"))?;
    ensure(c.body.gauge(Vec2::ZERO) == 0.0, || "gauge(0) != 0".into())?;
    Ok(format!("max {worst:.1e}"))
}

fn check_convexity(c: &Case, s: &Settings, rng: &mut ChaCha8Rng) -> std::result::Result<String, String> {
    for _ in 0..s.pick(200, 1000) {
        let (u, v) = (random_vec(rng, 2.0), random_vec(rng, 2.0));
        let lhs = c.body.gauge(u + v);
        let rhs = c.body.gauge(u) + c.body.gauge(v);
        ensure(lhs <= rhs + 1e-12 * (1.0 + rhs), || format!("triangle inequality fails at {u:?}, {v:?}"))?;
    }
    Ok("ok".into())
}

fn build_table(c: &Case, s: &Settings) -> std::result::Result<TrigTable, String> {
    let mut t = TrigTable::build(&c.body, s.resolution).map_err(err_str)?;
    if s.fault == Some(Fault::TrigSample) {
        t.corrupt_sample_for_testing(7, Vec2::new(1e-3, 0.0));
    }
    Ok(t)
}

fn check_trig_table(c: &Case, s: &Settings, _: &mut ChaCha8Rng) -> std::result::Result<String, String> {
    let t = build_table(c, s)?;
    t.validate()?;
    Ok(format!("{} samples", t.samples().len()))
}

fn check_period(c: &Case, s: &Settings, _: &mut ChaCha8Rng) -> std::result::Result<String, String> {
    let t = build_table(c, s)?;
    let want = 2.0 * c.body.euclid_area();
    let rel = (t.period() - want).abs() / want;
    let tol = if matches!(c.body, ConvexBody::Polygon(_)) { 1e-13 } else { 1e-10 };
    ensure(rel <= tol, || format!("period {} vs 2*area {want}: rel {rel:e}", t.period()))?;
    Ok(format!("rel {rel:.1e}"))
}

fn check_identity(c: &Case, s: &Settings, rng: &mut ChaCha8Rng) -> std::result::Result<String, String> {
    let corr = c.ctx.correspondence();
    let pp = corr.polar().period();
    let mut worst: f64 = 0.0;
    for _ in 0..s.pick(2000, 10_000) {
        worst = worst.max(corr.identity_residual(rng.gen_range(0.0..pp)));
    }
    ensure(worst <= 1e-9, || format!("identity residual {worst:e}"))?;
    Ok(format!("max {worst:.1e}"))
}

fn check_central_symmetry(c: &Case, _: &Settings, rng: &mut ChaCha8Rng) -> std::result::Result<String, String> {
    if !c.body.is_centrally_symmetric() {
        return Ok("skipped: body is not centrally symmetric".into());
    }
    let t = c.ctx.trig_omega();
    let mut worst: f64 = 0.0;
    for _ in 0..500 {
        let th = rng.gen_range(0.0..t.period());
        worst = worst.max((t.eval(th + 0.5 * t.period()) + t.eval(th)).norm());
    }
    ensure(worst <= 1e-9, || format!("antipodal mismatch {worst:e}"))?;
    Ok(format!("max {worst:.1e}"))
}

fn check_derivative(c: &Case, s: &Settings, rng: &mut ChaCha8Rng) -> std::result::Result<String, String> {
    let corr = c.ctx.correspondence();
    let pp = corr.polar().period();
    let h = 1e-5;
    let mut grid = Vec::new();
    while grid.len() < s.pick(200, 1000) {
        let th: f64 = rng.gen_range(0.0..pp);
        let clear = corr.polar().breakpoints().iter().all(|&b| {
            let d = (th - b).rem_euclid(pp);
            d.min(pp - d) >= 2.0 * h
        });
        if clear {
            grid.push(th);
        }
    }
    let worst = corr.check_derivative_relation(&grid, h).map_err(err_str)?;
    ensure(worst <= 1e-7, || format!("derivative residual {worst:e}"))?;
    Ok(format!("max {worst:.1e}"))
}

fn check_sample_area(c: &Case, s: &Settings, _: &mut ChaCha8Rng) -> std::result::Result<String, String> {
    let t = build_table(c, s)?;
    let pts = t.samples();
    let n = pts.len();
    let twice: f64 = (0..n)
        .map(|i| {
            let (a, b) = (pts[i], pts[(i + 1) % n]);
            a.cos * b.sin - a.sin * b.cos
        })
        .sum();
    let area = c.body.euclid_area();
    let rel = (0.5 * twice - area).abs() / area;
    ensure(twice > 0.0, || "negative orientation".into())?;
    let tol = if matches!(c.body, ConvexBody::Polygon(_)) { 1e-12 } else { 1e-6 };
    ensure(rel <= tol, || format!("sample polygon area off by {rel:e}"))?;
    Ok(format!("rel {rel:.1e}"))
}

fn random_star(rng: &mut ChaCha8Rng, n: usize) -> Polyline {
    let centre = Vec2::new(rng.gen_range(-1.0..1.0), rng.gen_range(2.0..3.0));
    let mut pts: Vec<Vec2> = (0..n)
        .map(|k| {
            let a = 2.0 * PI * k as f64 / n as f64;
            let r = rng.gen_range(0.5..1.5);
            centre + Vec2::new(a.cos(), a.sin()) * r
        })
        .collect();
    pts.push(pts[0]);
    Polyline::closed(pts).expect("star polygon")
}

fn random_group_element(rng: &mut ChaCha8Rng) -> HyperbolicPoint {
    HyperbolicPoint::new(rng.gen_range(-5.0..5.0), rng.gen_range(0.2..5.0)).expect("positive y")
}

fn check_plane_invariance(c: &Case, _: &Settings, rng: &mut ChaCha8Rng) -> std::result::Result<String, String> {
    for _ in 0..20 {
        let curve = random_star(rng, 40);
        let g = random_group_element(rng);
        let moved = curve.translated(g);
        let (a0, a1) = (green_area(&curve).map_err(err_str)?, green_area(&moved).map_err(err_str)?);
        let (l0, l1) = (curve_length(&c.body, &curve), curve_length(&c.body, &moved));
        ensure((a0 - a1).abs() <= 1e-10 * a0.abs(), || format!("area {a0} -> {a1}"))?;
        ensure((l0 - l1).abs() <= 1e-10 * l0, || format!("length {l0} -> {l1}"))?;
    }
    Ok("20 curves".into())
}

fn check_plane_reversal(c: &Case, _: &Settings, rng: &mut ChaCha8Rng) -> std::result::Result<String, String> {
    for _ in 0..20 {
        let curve = random_star(rng, 30);
        let a = green_area(&curve).map_err(err_str)?;
        let r = green_area(&curve.reversed()).map_err(err_str)?;
        ensure((a + r).abs() <= 1e-14 * a.abs(), || format!("area {a} reversed {r}"))?;
        let pts = curve.points();
        let mut fine = Vec::new();
        for w in pts.windows(2) {
            for k in 0..3 {
                fine.push(w[0] + (w[1] - w[0]) * (k as f64 / 3.0));
            }
        }
        fine.push(pts[0]);
        let fine = Polyline::closed(fine).map_err(err_str)?;
        let af = green_area(&fine).map_err(err_str)?;
        ensure((af - a).abs() <= 1e-12 * a.abs(), || format!("refined area {af} vs {a}"))?;
        let (l, lf) = (curve_length(&c.body, &curve), curve_length(&c.body, &fine));
        ensure((l - lf).abs() <= 1e-12 * l, || format!("refined length {lf} vs {l}"))?;
    }
    Ok("20 curves".into())
}

/// Five-point central difference.
pub fn derivative5(f: impl Fn(f64) -> Result<f64>, x: f64, h: f64) -> Result<f64> {
    Ok((f(x - 2.0 * h)? - 8.0 * f(x - h)? + 8.0 * f(x + h)? - f(x + 2.0 * h)?) / (12.0 * h))
}

/// Random `λ` a moderate distance inside the domain of `sign`.
fn random_lambda(c: &Case, sign: Sign, rng: &mut ChaCha8Rng) -> f64 {
    let e = c.ctx.extents();
    let off = (rng.gen_range((0.02f64).ln()..(20.0f64).ln())).exp();
    match sign {
        Sign::Plus => e.m_plus * (1.0 + off),
        Sign::Minus => -e.m_minus * (1.0 + off),
    }
}

fn check_differential_identity(c: &Case, s: &Settings, rng: &mut ChaCha8Rng) -> std::result::Result<String, String> {
    let mut worst: f64 = 0.0;
    for k in 0..s.pick(10, 50) {
        let sign = if k % 2 == 0 { Sign::Plus } else { Sign::Minus };
        let lam = random_lambda(c, sign, rng);
        let end = match sign {
            Sign::Plus => c.ctx.extents().m_plus,
            Sign::Minus => -c.ctx.extents().m_minus,
        };
        let h = 1e-3 * (lam - end).abs();
        let dl = derivative5(|x| Ok(c.ctx.profile(x, sign)?.l), lam, h).map_err(err_str)?;
        let df = derivative5(|x| Ok(c.ctx.profile(x, sign)?.f), lam, h).map_err(err_str)?;
        let r = (dl - lam * df).abs() / (1.0 + dl.abs());
        worst = worst.max(r);
    }
    ensure(worst <= 1e-6, || format!("|L' - λF'| residual {worst:e}"))?;
    Ok(format!("max {worst:.1e}"))
}

fn check_asymptotics(c: &Case, _: &Settings, _: &mut ChaCha8Rng) -> std::result::Result<String, String> {
    let lam = 1e4;
    let s0 = c.ctx.polar_area();
    let p = c.ctx.profile(lam, Sign::Plus).map_err(err_str)?;
    let rl = (lam * p.l / (2.0 * s0) - 1.0).abs();
    let rf = (lam * lam * p.f / s0 - 1.0).abs();
    ensure(rl <= 1e-3 && rf <= 1e-3, || format!("λL/2S° - 1 = {rl:e}, λ²F/S° - 1 = {rf:e}"))?;
    Ok(format!("{rl:.1e}, {rf:.1e}"))
}

fn check_monotone_convex(c: &Case, _: &Settings, _: &mut ChaCha8Rng) -> std::result::Result<String, String> {
    let m = c.ctx.extents().m_plus;
    let lams: Vec<f64> = (1..=40).map(|k| m + 0.05 * m * k as f64).collect();
    let rows: Vec<_> = c
        .ctx
        .profile_table(&lams, Sign::Plus)
        .into_iter()
        .collect::<Result<Vec<_>>>()
        .map_err(err_str)?;
    for w in rows.windows(2) {
        ensure(w[1].l < w[0].l && w[1].f < w[0].f, || format!("not decreasing at λ = {}", w[1].lambda))?;
    }
    for w in rows.windows(3) {
        ensure(w[0].l - 2.0 * w[1].l + w[2].l >= -1e-10 && w[0].f - 2.0 * w[1].f + w[2].f >= -1e-10, || {
            format!("not convex at λ = {}", w[1].lambda)
        })?;
    }
    Ok("40-point grid".into())
}

fn check_integral_relation(c: &Case, s: &Settings, rng: &mut ChaCha8Rng) -> std::result::Result<String, String> {
    let mut worst: f64 = 0.0;
    for _ in 0..s.pick(3, 10) {
        let lam = random_lambda(c, Sign::Plus, rng);
        let p = c.ctx.profile(lam, Sign::Plus).map_err(err_str)?;
        // ∫_λ^∞ L(μ)/μ² dμ = (1/λ) ∫₀¹ L(λ/s) ds
        let mut failure = None;
        let tail = integrate_scalar(
            |s| {
                if s == 0.0 {
                    return 0.0;
                }
                match c.ctx.profile(lam / s, Sign::Plus) {
                    Ok(q) => q.l,
                    Err(e) => {
                        failure = Some(e);
                        0.0
                    }
                }
            },
            &[0.0, 0.5, 1.0],
            QuadConfig::rel(1e-10),
        )
        .map_err(err_str)?
            / lam;
        if let Some(e) = failure {
            return Err(e.to_string());
        }
        let r = (p.f - (p.l / lam - tail)).abs() / p.f;
        worst = worst.max(r);
    }
    ensure(worst <= 1e-6, || format!("integral relation residual {worst:e}"))?;
    Ok(format!("max {worst:.1e}"))
}

fn check_profile_symmetry(c: &Case, _: &Settings, rng: &mut ChaCha8Rng) -> std::result::Result<String, String> {
    if !c.body.is_centrally_symmetric() {
        return Ok("skipped: body is not centrally symmetric".into());
    }
    for _ in 0..10 {
        let lam = random_lambda(c, Sign::Plus, rng);
        let p = c.ctx.profile(lam, Sign::Plus).map_err(err_str)?;
        let m = c.ctx.profile(-lam, Sign::Minus).map_err(err_str)?;
        ensure((p.l - m.l).abs() <= 1e-10 * p.l && (p.f + m.f).abs() <= 1e-10 * p.f, || {
            format!("L+ {} L- {} F+ {} F- {} at λ = {lam}", p.l, m.l, p.f, m.f)
        })?;
    }
    Ok("10 λ".into())
}

fn check_alt_form(c: &Case, _: &Settings, rng: &mut ChaCha8Rng) -> std::result::Result<String, String> {
    let mut worst: f64 = 0.0;
    for k in 0..20 {
        let sign = if k % 2 == 0 { Sign::Plus } else { Sign::Minus };
        let p = c.ctx.profile(random_lambda(c, sign, rng), sign).map_err(err_str)?;
        worst = worst.max(p.f_discrepancy());
    }
    ensure(worst <= 1e-8, || format!("F forms differ by {worst:e}"))?;
    Ok(format!("max {worst:.1e}"))
}

fn check_inverse_shape(c: &Case, _: &Settings, _: &mut ChaCha8Rng) -> std::result::Result<String, String> {
    let ls: Vec<f64> = (1..=20).map(|k| 0.5 * k as f64).collect();
    let fs = ls
        .iter()
        .map(|&l| c.ctx.f_of_l(l, Sign::Plus))
        .collect::<Result<Vec<_>>>()
        .map_err(err_str)?;
    for i in 1..fs.len() {
        ensure(fs[i] > fs[i - 1], || format!("𝓕₊ not increasing at L = {}", ls[i]))?;
    }
    for i in 1..fs.len() - 1 {
        let d2 = fs[i + 1] - 2.0 * fs[i] + fs[i - 1];
        ensure(d2 >= -1e-9 * fs[i], || format!("𝓕₊ not convex at L = {}", ls[i]))?;
    }
    Ok("20-point grid".into())
}

fn check_multi_loop(c: &Case, _: &Settings, _: &mut ChaCha8Rng) -> std::result::Result<String, String> {
    let mut margin = f64::INFINITY;
    for a in [0.1, 1.0, 10.0] {
        let one = c.ctx.l_of_f(a, Sign::Plus).map_err(err_str)?;
        for k in [2.0, 3.0] {
            let many = c.ctx.l_of_f(k * a, Sign::Plus).map_err(err_str)?;
            margin = margin.min(k * one - many);
            ensure(many < k * one, || format!("𝓛₊({k}A) >= {k}𝓛₊(A) at A = {a}"))?;
        }
    }
    Ok(format!("min margin {margin:.3e}"))
}

fn random_problem(rng: &mut ChaCha8Rng, period: f64) -> (HyperbolicPoint, f64, f64) {
    let g0 = HyperbolicPoint::new(rng.gen_range(-2.0..2.0), rng.gen_range(0.5..2.0)).expect("positive y");
    let a0 = rng.gen_range(0.2f64.ln()..5.0f64.ln()).exp();
    (g0, a0, rng.gen_range(0.0..period))
}

fn check_contours(c: &Case, s: &Settings, rng: &mut ChaCha8Rng) -> std::result::Result<String, String> {
    let n = s.pick(8192, 65536);
    let period = c.ctx.trig_polar().period();
    let mut worst_h: f64 = 0.0;
    for k in 0..s.pick(2, 6) {
        let sign = if k % 2 == 0 { Sign::Plus } else { Sign::Minus };
        let (g0, a0, alpha) = random_problem(rng, period);
        let kc = solve_constants(&c.ctx, g0, a0, alpha, sign).map_err(err_str)?;
        let contour = synthesize_contour(&c.ctx, &kc, n).map_err(err_str)?;
        let poly = contour.to_polyline().map_err(err_str)?;
        let area = green_area(&poly).map_err(err_str)?;
        let len = curve_length(&c.body, &poly);
        ensure((area - sign.factor() * a0).abs() <= 1e-6 * a0, || format!("area {area} vs {}{a0}", sign))?;
        ensure((len - kc.t_total).abs() <= 1e-5 * kc.t_total, || format!("length {len} vs T {}", kc.t_total))?;
        ensure(contour.closure_error.abs() <= 1e-7, || format!("θ° closure {:e}", contour.closure_error))?;
        ensure(poly.points().iter().all(|p| p.y > 0.0), || "contour leaves the half-plane".into())?;
        if s.level == Level::Full {
            let direct = direct_contour(&c.ctx, &kc, n).map_err(err_str)?;
            let h = hausdorff(&contour.points(), &direct.points()) / kc.r.abs();
            worst_h = worst_h.max(h);
            ensure(h <= 1e-6, || format!("Hausdorff distance to the direct contour {h:e} R"))?;
        }
    }
    Ok(format!("n = {n}, Hausdorff {worst_h:.1e}"))
}

fn check_family(c: &Case, s: &Settings, rng: &mut ChaCha8Rng) -> std::result::Result<String, String> {
    let n = s.pick(16384, 65536);
    let period = c.ctx.trig_polar().period();
    let (g0, a0, _) = random_problem(rng, period);
    let mut lens = Vec::new();
    for j in 0..s.pick(4, 16) {
        let alpha = period * j as f64 / s.pick(4, 16) as f64;
        let kc = solve_constants(&c.ctx, g0, a0, alpha, Sign::Plus).map_err(err_str)?;
        let poly = synthesize_contour(&c.ctx, &kc, n).and_then(|c| c.to_polyline()).map_err(err_str)?;
        lens.push(curve_length(&c.body, &poly));
    }
    let lo = lens.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = lens.iter().copied().fold(0.0, f64::max);
    let spread = (hi - lo) / lo;
    ensure(spread <= 1e-8, || format!("length spread {spread:e}"))?;
    Ok(format!("spread {spread:.1e}"))
}

fn check_equivariance(c: &Case, _: &Settings, rng: &mut ChaCha8Rng) -> std::result::Result<String, String> {
    let period = c.ctx.trig_polar().period();
    let (g0, a0, alpha) = random_problem(rng, period);
    let g = random_group_element(rng);
    let moved = HyperbolicPoint::new(g.x + g.y * g0.x, g.y * g0.y).map_err(err_str)?;
    let k0 = solve_constants(&c.ctx, g0, a0, alpha, Sign::Plus).map_err(err_str)?;
    let k1 = solve_constants(&c.ctx, moved, a0, alpha, Sign::Plus).map_err(err_str)?;
    let c0 = synthesize_contour(&c.ctx, &k0, 2048).map_err(err_str)?;
    let c1 = synthesize_contour(&c.ctx, &k1, 2048).map_err(err_str)?;
    ensure(c0.samples.len() == c1.samples.len(), || "sample counts differ".into())?;
    let scale = g.y.max(1.0);
    let worst = c0
        .samples
        .iter()
        .zip(&c1.samples)
        .map(|(a, b)| g.translate(a.pos).dist(b.pos))
        .fold(0.0, f64::max);
    ensure(worst <= 1e-9 * scale * (1.0 + k1.cy.abs()), || format!("translated contour off by {worst:e}"))?;
    Ok(format!("max {worst:.1e}"))
}

fn check_inequality(c: &Case, s: &Settings, rng: &mut ChaCha8Rng) -> std::result::Result<String, String> {
    let period = c.ctx.trig_polar().period();
    let n = s.pick(8192, 16384);
    for k in 0..s.pick(2, 4) {
        let sign = if k % 2 == 0 { Sign::Plus } else { Sign::Minus };
        let (g0, a0, alpha) = random_problem(rng, period);
        let kc = solve_constants(&c.ctx, g0, a0, alpha, sign).map_err(err_str)?;
        let poly = synthesize_contour(&c.ctx, &kc, n).and_then(|c| c.to_polyline()).map_err(err_str)?;
        let rep = check_isoperimetric(&c.ctx, &poly).map_err(err_str)?;
        let (d, l) = match sign {
            Sign::Plus => (rep.deficit_plus, rep.l_plus),
            Sign::Minus => (rep.deficit_minus, rep.l_minus),
        };
        ensure(d >= -1e-6 * l && d <= 1e-5 * l, || format!("equality deficit {d:e} for L = {l}"))?;
        // radial noise about the centroid must keep the curve in y > 0
        let pts = poly.points();
        let cy = pts.iter().map(|q| q.y).sum::<f64>() / pts.len() as f64;
        if pts.iter().any(|q| q.y - 0.011 * (q.y - cy).abs() <= 0.0) {
            continue;
        }
        for _ in 0..s.pick(5, 25) {
            let noisy = perturb_radially(&poly, 0.01, || rng.gen_range(-1.0..1.0)).map_err(err_str)?;
            let r = check_isoperimetric(&c.ctx, &noisy).map_err(err_str)?;
            ensure(r.deficit_plus > 0.0 && r.deficit_minus > 0.0, || {
                format!("perturbed deficits {:e}, {:e}", r.deficit_plus, r.deficit_minus)
            })?;
        }
    }
    Ok("ok".into())
}

fn check_oracle_profiles(c: &Case, _: &Settings, _: &mut ChaCha8Rng) -> std::result::Result<String, String> {
    let Some(p) = c.unit_pball_exponent() else {
        return Ok("skipped: no closed form".into());
    };
    let mut worst: f64 = 0.0;
    for lam in [1.05, 1.5, 2.0, 5.0, 50.0] {
        let q = c.ctx.profile(lam, Sign::Plus).map_err(err_str)?;
        let l = oracles::pball_l_plus(p, lam).map_err(err_str)?;
        let f = oracles::pball_f_plus(p, lam).map_err(err_str)?;
        let r = ((q.l - l) / l).abs().max(((q.f - f) / f).abs());
        let tol = if p == 1.5 && lam == 1.05 { 1e-6 } else { 1e-8 };
        ensure(r <= tol, || format!("λ = {lam}: profile vs closed form {r:e}"))?;
        worst = worst.max(r);
    }
    Ok(format!("max {worst:.1e}"))
}

fn check_oracle_asymptote(c: &Case, _: &Settings, _: &mut ChaCha8Rng) -> std::result::Result<String, String> {
    let Some(p) = c.unit_pball_exponent() else {
        let a = c.ctx.asymptote_a_plus().map_err(err_str)?;
        return Ok(format!("a+ = {a} (no closed form)"));
    };
    let a = c.ctx.asymptote_a_plus().map_err(err_str)?;
    let o = oracles::pball_a_plus(p).map_err(err_str)?;
    if o.is_infinite() {
        ensure(a.is_infinite(), || format!("expected +inf, got {a}"))?;
        return Ok("+inf".into());
    }
    let r = (a - o).abs() / o;
    ensure(r <= 1e-4, || format!("a+ = {a} vs {o}"))?;
    Ok(format!("a+ = {a}"))
}

fn check_oracle_relations(c: &Case, _: &Settings, _: &mut ChaCha8Rng) -> std::result::Result<String, String> {
    let residual: fn(f64, f64) -> f64 = match c.unit_pball_exponent() {
        Some(2.0) => oracles::circle_normalized_residual,
        Some(f64::INFINITY) => oracles::square_normalized_residual,
        Some(1.0) => oracles::diamond_iso_residual,
        _ => return Ok("skipped: no closed-form relation".into()),
    };
    let mut worst: f64 = 0.0;
    for lam in [1.05, 1.3, 2.0, 4.0] {
        let p = c.ctx.profile(lam, Sign::Plus).map_err(err_str)?;
        worst = worst.max(residual(p.l, p.f).abs());
    }
    ensure(worst <= 1e-6, || format!("relation residual {worst:e}"))?;
    Ok(format!("max {worst:.1e}"))
}
