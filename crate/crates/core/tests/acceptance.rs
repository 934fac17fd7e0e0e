//! End-to-end acceptance run: one PASS/FAIL line per criterion.

use std::f64::consts::{LN_2, PI};
use std::process::ExitCode;
use std::time::Instant;

use finsler_iso::contour::{hausdorff, perturb_radially};
use finsler_iso::verify::{derivative5, random_pentagon, PENTAGON_SEED};
use finsler_iso::{
    check_isoperimetric, curve_length, direct_contour, green_area, solve_constants, synthesize_contour,
    ConvexBody, HyperbolicPoint, IsoContext, Sign, Vec2,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

type Outcome = Result<String, String>;

fn ctx(body: ConvexBody) -> IsoContext {
    IsoContext::new(body, 4096).expect("context")
}

fn five_bodies() -> Vec<(&'static str, ConvexBody)> {
    vec![
        ("disk", ConvexBody::disk(1.0)),
        ("square", ConvexBody::square(1.0)),
        ("diamond", ConvexBody::diamond(1.0)),
        ("p3", ConvexBody::pball(3.0, 1.0).unwrap()),
        ("pentagon", random_pentagon(PENTAGON_SEED)),
    ]
}

fn shipped() -> Vec<(&'static str, ConvexBody)> {
    let mut v = five_bodies();
    v.push(("p1.5", ConvexBody::pball(1.5, 1.0).unwrap()));
    v
}

fn fail_if(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Err(msg())
    } else {
        Ok(())
    }
}

// Closed forms for the unit p-balls, p = 1, 2, ∞, written out here rather
// than taken from the library.
fn closed_l(p: f64, l: f64) -> f64 {
    let s = (l * l - 1.0).sqrt();
    if p == 1.0 {
        4.0 * l / (l * l - 1.0) + 2.0 * ((l + 1.0) / (l - 1.0)).ln()
    } else if p == 2.0 {
        2.0 * PI / s
    } else {
        2.0 * ((l + 1.0) / (l - 1.0)).ln()
    }
}

fn closed_f(p: f64, l: f64) -> f64 {
    if p == 1.0 {
        4.0 / (l * l - 1.0)
    } else if p == 2.0 {
        2.0 * PI * (l / (l * l - 1.0).sqrt() - 1.0)
    } else {
        2.0 * (l * l / (l * l - 1.0)).ln()
    }
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for (p, body) in [
        (1.0, ConvexBody::diamond(1.0)),
        (2.0, ConvexBody::disk(1.0)),
        (f64::INFINITY, ConvexBody::square(1.0)),
    ] {
        let c = ctx(body);
        for lam in [1.05, 1.5, 2.0, 5.0, 50.0] {
            let q = c.profile(lam, Sign::Plus).map_err(|e| e.to_string())?;
            let rl = (q.l / closed_l(p, lam) - 1.0).abs();
            let rf = (q.f / closed_f(p, lam) - 1.0).abs();
            fail_if(rl > 1e-8 || rf > 1e-8, || format!("p = {p}, λ = {lam}: rel errors {rl:e}, {rf:e}"))?;
            worst = worst.max(rl).max(rf);
        }
    }
    let secs = start.elapsed().as_secs_f64();
    fail_if(secs >= 5.0, || format!("took {secs:.2} s"))?;
    Ok(format!("max rel error {worst:.1e} in {secs:.2} s"))
}

fn measure(c: &IsoContext, g0: (f64, f64), a0: f64, alpha: f64, sign: Sign, n: usize) -> Result<(f64, f64), String> {
    let g0 = HyperbolicPoint::new(g0.0, g0.1).map_err(|e| e.to_string())?;
    let k = solve_constants(c, g0, a0, alpha, sign).map_err(|e| e.to_string())?;
    let poly = synthesize_contour(c, &k, n)
        .and_then(|s| s.to_polyline())
        .map_err(|e| e.to_string())?;
    Ok((curve_length(c.omega(), &poly), green_area(&poly).map_err(|e| e.to_string())?))
}

fn criterion_2() -> Outcome {
    let c = ctx(ConvexBody::disk(1.0));
    let mut worst: f64 = 0.0;
    let mut slowest: f64 = 0.0;
    for a0 in [0.1, 1.0, 2.0 * PI, 20.0] {
        let start = Instant::now();
        let (l, a) = measure(&c, (0.0, 1.0), a0, 0.0, Sign::Plus, 4096)?;
        slowest = slowest.max(start.elapsed().as_secs_f64());
        let r = (l * l - 4.0 * PI * a - a * a).abs() / (l * l);
        fail_if(r > 1e-5, || format!("A = {a0}: relative residual {r:e}"))?;
        worst = worst.max(r);
    }
    fail_if(slowest >= 1.0, || format!("slowest synthesis {slowest:.2} s"))?;
    Ok(format!("max residual {worst:.1e}·L², slowest {slowest:.3} s"))
}

fn criterion_3() -> Outcome {
    let sq = ctx(ConvexBody::square(1.0));
    let di = ctx(ConvexBody::diamond(1.0));
    let mut worst: f64 = 0.0;
    for (a0, g0, alpha) in [(0.1, (0.0, 1.0), 0.0), (1.0, (2.0, 0.5), 1.3), (5.0, (-1.0, 2.0), 2.9)] {
        let (l, a) = measure(&sq, g0, a0, alpha, Sign::Plus, 16384)?;
        let r = ((l / 4.0).cosh() - (a / 4.0).exp()).abs() / (a / 4.0).exp();
        fail_if(r > 1e-6, || format!("square A = {a0}: {r:e}"))?;
        worst = worst.max(r);
        let (l, a) = measure(&di, g0, a0, alpha, Sign::Plus, 16384)?;
        // L/2 = arcosh(s) + sqrt(s² - 1), s = (A + 2)/2
        let s = (a + 2.0) / 2.0;
        let want = s.acosh() + (s * s - 1.0).sqrt();
        let r = (l / 2.0 - want).abs() / want;
        fail_if(r > 1e-6, || format!("diamond A = {a0}: {r:e}"))?;
        worst = worst.max(r);
    }
    Ok(format!("max relative residual {worst:.1e}"))
}

fn criterion_4() -> Outcome {
    let sq = ctx(ConvexBody::square(1.0)).asymptote_a_plus().map_err(|e| e.to_string())?;
    let di = ctx(ConvexBody::diamond(1.0)).asymptote_a_plus().map_err(|e| e.to_string())?;
    let dk = ctx(ConvexBody::disk(1.0)).asymptote_a_plus().map_err(|e| e.to_string())?;
    fail_if((sq - 4.0 * LN_2).abs() > 1e-4, || format!("square a+ = {sq}"))?;
    fail_if(di != f64::INFINITY, || format!("diamond a+ = {di}"))?;
    fail_if((dk - 2.0 * PI).abs() > 1e-4, || format!("disk a+ = {dk}"))?;
    Ok(format!("square {sq:.12}, diamond {di}, disk {dk:.12}"))
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    for (name, body) in five_bodies() {
        let c = ctx(body);
        let m = c.extents().m_plus;
        for _ in 0..50 {
            let lam = m * (1.0 + rng.gen_range(0.01f64.ln()..100f64.ln()).exp());
            let h = 1e-3 * (lam - m);
            let dl = derivative5(|x| Ok(c.profile(x, Sign::Plus)?.l), lam, h).map_err(|e| e.to_string())?;
            let df = derivative5(|x| Ok(c.profile(x, Sign::Plus)?.f), lam, h).map_err(|e| e.to_string())?;
            let r = (dl - lam * df).abs() / dl.abs();
            fail_if(r > 1e-6, || format!("{name}, λ = {lam}: {r:e}"))?;
            worst = worst.max(r);
        }
    }
    Ok(format!("max relative residual {worst:.1e}"))
}

fn criterion_6() -> Outcome {
    let mut worst: f64 = 0.0;
    for (name, body) in five_bodies() {
        let c = ctx(body);
        let s0 = c.polar().euclid_area();
        let q = c.profile(1e4, Sign::Plus).map_err(|e| e.to_string())?;
        let rl = (1e4 * q.l / (2.0 * s0) - 1.0).abs();
        let rf = (1e8 * q.f / s0 - 1.0).abs();
        fail_if(rl > 1e-3 || rf > 1e-3, || format!("{name}: {rl:e}, {rf:e}"))?;
        worst = worst.max(rl).max(rf);
    }
    Ok(format!("max deviation {worst:.1e}"))
}

struct Problem {
    g0: (f64, f64),
    a0: f64,
    alpha: f64,
    sign: Sign,
}

fn problems(rng: &mut ChaCha8Rng, period: f64, count: usize) -> Vec<Problem> {
    (0..count)
        .map(|k| Problem {
            g0: (rng.gen_range(-3.0..3.0), rng.gen_range(0.3..3.0)),
            a0: rng.gen_range(0.05f64.ln()..20f64.ln()).exp(),
            alpha: rng.gen_range(0.0..period),
            sign: if k % 2 == 0 { Sign::Plus } else { Sign::Minus },
        })
        .collect()
}

fn criterion_7() -> Outcome {
    const N: usize = 65536;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut jobs = Vec::new();
    let contexts: Vec<(&str, IsoContext)> = five_bodies().into_iter().map(|(n, b)| (n, ctx(b))).collect();
    for (i, (_, c)) in contexts.iter().enumerate() {
        for p in problems(&mut rng, c.trig_polar().period(), 20) {
            jobs.push((i, p));
        }
    }
    let results: Vec<Result<[f64; 4], String>> = jobs
        .par_iter()
        .map(|(i, p)| {
            let (name, c) = &contexts[*i];
            let tag = |e: String| format!("{name}, A = {}: {e}", p.a0);
            let g0 = HyperbolicPoint::new(p.g0.0, p.g0.1).map_err(|e| tag(e.to_string()))?;
            let k = solve_constants(c, g0, p.a0, p.alpha, p.sign).map_err(|e| tag(e.to_string()))?;
            // keep the length step at most 1/8192: chords across the
            // C^{1,1/2} points of p-ball contours deviate like step^{3/2}
            let n = N.max(((k.t_total * 8192.0).ceil() as usize).next_power_of_two());
            let s = synthesize_contour(c, &k, n).map_err(|e| tag(e.to_string()))?;
            let poly = s.to_polyline().map_err(|e| tag(e.to_string()))?;
            let area = green_area(&poly).map_err(|e| tag(e.to_string()))?;
            let length = curve_length(c.omega(), &poly);
            let want_l = c.profile(k.lambda, p.sign).map_err(|e| tag(e.to_string()))?.l;
            let d = direct_contour(c, &k, n).map_err(|e| tag(e.to_string()))?;
            // distances in units of the contour scale: dilations (0, y) ∈ G
            // rescale Euclidean coordinates
            let h = hausdorff(&s.points(), &d.points()) / k.r.abs();
            let advance = s.samples.last().unwrap().theta0 - s.samples[0].theta0;
            let period = c.trig_polar().period();
            let ea = (area - p.sign.factor() * p.a0).abs() / p.a0;
            let el = (length - want_l).abs() / want_l;
            let et = (advance - p.sign.factor() * period).abs();
            fail_if(ea > 1e-6, || tag(format!("area error {ea:e}")))?;
            fail_if(el > 1e-5, || tag(format!("length error {el:e}")))?;
            fail_if(et > 1e-7, || tag(format!("θ° advance error {et:e}")))?;
            fail_if(h > 1e-6, || tag(format!("Hausdorff distance {h:e}")))?;
            Ok([ea, el, et, h])
        })
        .collect();
    let mut worst = [0.0f64; 4];
    for r in results {
        let r = r?;
        for (w, v) in worst.iter_mut().zip(r) {
            *w = w.max(v);
        }
    }
    Ok(format!(
        "100 contours at n ≥ {N}: area {:.1e}, length {:.1e}, θ° {:.1e}, Hausdorff {:.1e}",
        worst[0], worst[1], worst[2], worst[3]
    ))
}

fn criterion_8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut min_deficit = f64::INFINITY;
    let mut eq_range = (f64::INFINITY, f64::NEG_INFINITY);
    let mut count = 0;
    for (name, body) in five_bodies() {
        let c = ctx(body);
        let mut admitted = 0;
        while admitted < 4 {
            let mut p = problems(&mut rng, c.trig_polar().period(), 1).remove(0);
            p.sign = if admitted % 2 == 0 { Sign::Plus } else { Sign::Minus };
            let g0 = HyperbolicPoint::new(p.g0.0, p.g0.1).unwrap();
            let k = solve_constants(&c, g0, p.a0, p.alpha, p.sign).map_err(|e| e.to_string())?;
            let poly = synthesize_contour(&c, &k, 16384)
                .and_then(|s| s.to_polyline())
                .map_err(|e| e.to_string())?;
            // 1% radial noise about the centroid must keep the curve in y > 0
            let pts = poly.points();
            let cy = pts[..pts.len() - 1].iter().map(|q| q.y).sum::<f64>() / (pts.len() - 1) as f64;
            if pts.iter().any(|q| q.y - 0.011 * (q.y - cy).abs() <= 0.0) {
                continue;
            }
            admitted += 1;
            let rep = check_isoperimetric(&c, &poly).map_err(|e| e.to_string())?;
            let (d, l) = match p.sign {
                Sign::Plus => (rep.deficit_plus, rep.l_plus),
                Sign::Minus => (rep.deficit_minus, rep.l_minus),
            };
            fail_if(d < -1e-6 * l || d > 1e-5 * l, || format!("{name}: equality deficit {d:e}, L = {l}"))?;
            eq_range = (eq_range.0.min(d / l), eq_range.1.max(d / l));
            for _ in 0..10 {
                let noisy = perturb_radially(&poly, 0.01, || rng.gen_range(-1.0..=1.0)).map_err(|e| e.to_string())?;
                let r = check_isoperimetric(&c, &noisy).map_err(|e| e.to_string())?;
                fail_if(!(r.deficit_plus > 0.0 && r.deficit_minus > 0.0), || {
                    format!("{name}: perturbed deficits {:e}, {:e}", r.deficit_plus, r.deficit_minus)
                })?;
                min_deficit = min_deficit.min(r.deficit_plus).min(r.deficit_minus);
                count += 1;
            }
        }
    }
    Ok(format!(
        "{count} perturbed, min deficit {min_deficit:.2e}; equality deficits/L in [{:.1e}, {:.1e}]",
        eq_range.0, eq_range.1
    ))
}

fn criterion_9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst_spread: f64 = 0.0;
    let mut worst_eq: f64 = 0.0;
    for (name, body) in five_bodies() {
        let c = ctx(body);
        let period = c.trig_polar().period();
        let g0 = (rng.gen_range(-2.0..2.0), rng.gen_range(0.5..2.0));
        let a0 = rng.gen_range(0.2..5.0);
        let lens = (0..16)
            .into_par_iter()
            .map(|j| measure(&c, g0, a0, period * j as f64 / 16.0, Sign::Plus, 65536).map(|m| m.0))
            .collect::<Result<Vec<_>, _>>()?;
        let lo = lens.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = lens.iter().copied().fold(0.0, f64::max);
        let spread = (hi - lo) / lo;
        fail_if(spread > 1e-8, || format!("{name}: length spread {spread:e}"))?;
        worst_spread = worst_spread.max(spread);

        // left translation g·(x, y) = (g_x + g_y x, g_y y)
        let g = (rng.gen_range(-4.0..4.0), rng.gen_range(0.25..4.0));
        let alpha = rng.gen_range(0.0..period);
        let base = HyperbolicPoint::new(g0.0, g0.1).unwrap();
        let moved = HyperbolicPoint::new(g.0 + g.1 * g0.0, g.1 * g0.1).unwrap();
        let k0 = solve_constants(&c, base, a0, alpha, Sign::Plus).map_err(|e| e.to_string())?;
        let k1 = solve_constants(&c, moved, a0, alpha, Sign::Plus).map_err(|e| e.to_string())?;
        let s0 = synthesize_contour(&c, &k0, 4096).map_err(|e| e.to_string())?;
        let s1 = synthesize_contour(&c, &k1, 4096).map_err(|e| e.to_string())?;
        fail_if(s0.samples.len() != s1.samples.len(), || format!("{name}: sample counts differ"))?;
        let e = s0
            .samples
            .iter()
            .zip(&s1.samples)
            .map(|(a, b)| {
                let t = Vec2::new(g.0 + g.1 * a.pos.x, g.1 * a.pos.y);
                (t - b.pos).norm() / (1.0 + b.pos.norm())
            })
            .fold(0.0, f64::max);
        fail_if(e > 1e-9, || format!("{name}: equivariance error {e:e}"))?;
        worst_eq = worst_eq.max(e);
    }
    Ok(format!("max spread {worst_spread:.1e}, max equivariance error {worst_eq:.1e}"))
}

fn criterion_10() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let (mut wi, mut wp, mut wd) = (0.0f64, 0.0f64, 0.0f64);
    for (name, body) in shipped() {
        let polygon = matches!(body, ConvexBody::Polygon(_));
        let area = body.euclid_area();
        let c = ctx(body);
        let corr = c.correspondence();
        let pp = corr.polar().period();
        for _ in 0..10_000 {
            let r = corr.identity_residual(rng.gen_range(0.0..pp));
            fail_if(r > 1e-9, || format!("{name}: identity residual {r:e}"))?;
            wi = wi.max(r);
        }
        let period = c.trig_omega().period();
        let rel = (period - 2.0 * area).abs() / (2.0 * area);
        fail_if(if polygon { rel > 4.0 * f64::EPSILON } else { rel > 1e-10 }, || {
            format!("{name}: period {period} vs {}", 2.0 * area)
        })?;
        wp = wp.max(rel);
        let h = 1e-5;
        let grid: Vec<f64> = (0..2000)
            .map(|_| rng.gen_range(0.0..pp))
            .filter(|&t| {
                corr.polar().breakpoints().iter().all(|&b| {
                    let d = (t - b).rem_euclid(pp);
                    d.min(pp - d) >= h
                })
            })
            .collect();
        let r = corr.check_derivative_relation(&grid, h).map_err(|e| e.to_string())?;
        fail_if(r > 1e-7, || format!("{name}: derivative residual {r:e}"))?;
        wd = wd.max(r);
    }
    Ok(format!("identity {wi:.1e}, period {wp:.1e}, derivative {wd:.1e}"))
}

fn criterion_11() -> Outcome {
    let mut margin = f64::INFINITY;
    for (name, body) in shipped() {
        let c = ctx(body);
        for a in [0.1, 1.0, 10.0] {
            let one = c.l_of_f(a, Sign::Plus).map_err(|e| e.to_string())?;
            for k in [2.0, 3.0] {
                let many = c.l_of_f(k * a, Sign::Plus).map_err(|e| e.to_string())?;
                let m = k * one - many;
                fail_if(!(m > 0.0), || format!("{name}: 𝓛₊({k}·{a}) - {k}·𝓛₊({a}) = {}", -m))?;
                margin = margin.min(m);
            }
        }
    }
    Ok(format!("min margin {margin:.3e}"))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("closed-form profiles", criterion_1),
        ("circle contours", criterion_2),
        ("square and diamond contours", criterion_3),
        ("asymptote intercept", criterion_4),
        ("differential identity", criterion_5),
        ("large-λ asymptotics", criterion_6),
        ("contour self-consistency", criterion_7),
        ("inequality and deficits", criterion_8),
        ("family and equivariance", criterion_9),
        ("convex trigonometry", criterion_10),
        ("multi-loop suboptimality", criterion_11),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let res = f();
        let secs = start.elapsed().as_secs_f64();
        match res {
            Ok(detail) => println!("PASS {:>2} {name} ({secs:.1} s): {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name} ({secs:.1} s): {detail}", i + 1)
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
