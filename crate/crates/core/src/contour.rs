//! Optimal contours: the constants of an extremal through a given point
//! enclosing a given area, its natural parametrization from the angle ODE
//! `θ°' = λ - cos_Ω°(θ°)`, the direct image of the polar boundary, and the
//! isoperimetric verdict for arbitrary closed curves.

use std::io::Write;

use serde_json::Value;

use crate::error::{Error, Result};
use crate::geom::{point_segment_distance, Vec2};
use crate::io::fmt17;
use crate::plane::{curve_length, find_self_intersection, green_area, segment_length, HyperbolicPoint, Polyline};
use crate::profiles::{IsoContext, Sign};
use crate::roots::brent;
use crate::trig::TrigTable;

pub const MIN_SAMPLES: usize = 64;

/// Constants of the extremal `x = R sin°(θ°) + c_x`, `y = -R cos°(θ°) + c_y`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IsoConstants {
    pub sign: Sign,
    pub lambda: f64,
    pub r: f64,
    pub cx: f64,
    pub cy: f64,
    /// Polar angle at `t = 0`, in `[0, 2S_Ω°)`.
    pub alpha: f64,
    /// Total time, equal to the length `L±(λ)`.
    pub t_total: f64,
}

impl IsoConstants {
    /// Point of the contour at polar angle `θ°`.
    pub fn point(&self, polar: &TrigTable, theta0: f64) -> Vec2 {
        let w = polar.eval(theta0);
        Vec2::new(self.r * w.y + self.cx, -self.r * w.x + self.cy)
    }

    /// Sidecar JSON with 17-significant-digit numbers.
    pub fn to_json(&self) -> String {
        format!(
            "{{\n  \"sign\": \"{}\",\n  \"lambda\": {},\n  \"R\": {},\n  \"cx\": {},\n  \"cy\": {},\n  \"alpha\": {},\n  \"T\": {}\n}}\n",
            self.sign.symbol(),
            fmt17(self.lambda),
            fmt17(self.r),
            fmt17(self.cx),
            fmt17(self.cy),
            fmt17(self.alpha),
            fmt17(self.t_total)
        )
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let v: Value = serde_json::from_str(text)?;
        let num = |key: &str| {
            v.get(key).and_then(Value::as_f64).ok_or_else(|| Error::Spec {
                path: format!("$.{key}"),
                message: "expected a number".into(),
            })
        };
        let sign = v.get("sign").and_then(Value::as_str).ok_or_else(|| Error::Spec {
            path: "$.sign".into(),
            message: "expected \"+\" or \"-\"".into(),
        })?;
        Ok(Self {
            sign: Sign::parse(sign)?,
            lambda: num("lambda")?,
            r: num("R")?,
            cx: num("cx")?,
            cy: num("cy")?,
            alpha: num("alpha")?,
            t_total: num("T")?,
        })
    }
}

/// Solves for the extremal through `g0` with `θ°(0) = α` enclosing area `a0`
/// (counterclockwise for `+`, clockwise for `-`).
pub fn solve_constants(ctx: &IsoContext, g0: HyperbolicPoint, a0: f64, alpha: f64, sign: Sign) -> Result<IsoConstants> {
    let lambda = ctx.solve_lambda_for_area(a0, sign)?;
    let t_total = ctx.profile(lambda, sign)?.l;
    let period = ctx.trig_polar().period();
    let alpha = alpha.rem_euclid(period);
    let w = ctx.trig_polar().eval(alpha);
    let r = g0.y / (lambda - w.x);
    Ok(IsoConstants {
        sign,
        lambda,
        r,
        cx: g0.x - r * w.y,
        cy: r * lambda,
        alpha,
        t_total,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ContourSample {
    pub t: f64,
    pub theta0: f64,
    pub pos: Vec2,
}

#[derive(Clone, Debug)]
pub struct Contour {
    pub samples: Vec<ContourSample>,
    pub constants: IsoConstants,
    /// `θ°(T) - α ∓ 2S_Ω°` (zero for the direct construction).
    pub closure_error: f64,
}

impl Contour {
    pub fn points(&self) -> Vec<Vec2> {
        self.samples.iter().map(|s| s.pos).collect()
    }

    /// Closed polyline through the samples (last point snapped onto the first).
    pub fn to_polyline(&self) -> Result<Polyline> {
        Polyline::closed(self.points())
    }

    /// Writes `t,theta0,x,y` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t", "theta0", "x", "y"])?;
        for s in &self.samples {
            w.write_record([fmt17(s.t), fmt17(s.theta0), fmt17(s.pos.x), fmt17(s.pos.y)])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Piece of the polar trig table, lifted by a whole number of periods.
#[derive(Clone, Copy, Debug)]
struct Piece {
    index: usize,
    wrap: f64,
}

struct Stepper<'a> {
    tp: &'a TrigTable,
    lambda: f64,
    dir: f64,
    period: f64,
    count: usize,
}

impl Stepper<'_> {
    fn start(&self, pc: Piece) -> f64 {
        self.tp.segment_range(pc.index).0 + pc.wrap * self.period
    }

    fn end(&self, pc: Piece) -> f64 {
        self.tp.segment_range(pc.index).1 + pc.wrap * self.period
    }

    /// Boundary of the piece in the direction of motion.
    fn exit(&self, pc: Piece) -> f64 {
        if self.dir > 0.0 {
            self.end(pc)
        } else {
            self.start(pc)
        }
    }

    fn next(&self, pc: Piece) -> Piece {
        if self.dir > 0.0 {
            if pc.index + 1 == self.count {
                Piece { index: 0, wrap: pc.wrap + 1.0 }
            } else {
                Piece { index: pc.index + 1, ..pc }
            }
        } else if pc.index == 0 {
            Piece {
                index: self.count - 1,
                wrap: pc.wrap - 1.0,
            }
        } else {
            Piece { index: pc.index - 1, ..pc }
        }
    }

    /// Right side using the piece's own smooth formula.
    fn rhs(&self, pc: Piece, theta: f64) -> f64 {
        self.lambda - self.tp.eval_segment(pc.index, theta - self.start(pc)).x
    }

    fn rk4(&self, pc: Piece, theta: f64, h: f64) -> f64 {
        let k1 = self.rhs(pc, theta);
        let k2 = self.rhs(pc, theta + 0.5 * h * k1);
        let k3 = self.rhs(pc, theta + 0.5 * h * k2);
        let k4 = self.rhs(pc, theta + h * k3);
        theta + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    }
}

/// Natural parametrization by the classical fourth-order Runge–Kutta method
/// at fixed step `T/n`. Steps are split where `θ°` crosses a piece boundary
/// of the polar table, and the crossing is kept as an extra sample (for
/// polygons these are the contour's corners).
pub fn synthesize_contour(ctx: &IsoContext, k: &IsoConstants, n: usize) -> Result<Contour> {
    if n < MIN_SAMPLES {
        return Err(Error::InvalidArgument(format!("need at least {MIN_SAMPLES} samples, got {n}")));
    }
    let tp = ctx.trig_polar();
    let st = Stepper {
        tp,
        lambda: k.lambda,
        dir: k.sign.factor(),
        period: tp.period(),
        count: tp.segment_count(),
    };
    let mut pc = Piece {
        index: tp.locate(k.alpha),
        wrap: 0.0,
    };
    if st.dir < 0.0 && k.alpha <= st.start(pc) {
        pc = st.next(pc);
    }
    let h = k.t_total / n as f64;
    let target = k.alpha + st.dir * st.period;
    let mut theta = k.alpha;
    let mut raw: Vec<(f64, f64)> = Vec::with_capacity(n + 2 * st.count + 1);
    raw.push((0.0, theta));
    for j in 0..n {
        let t0 = j as f64 * h;
        let mut done = 0.0;
        loop {
            let rem = h - done;
            let trial = st.rk4(pc, theta, rem);
            let bound = st.exit(pc);
            if st.dir * (trial - bound) < 0.0 {
                theta = trial;
                break;
            }
            let hs = if trial == bound {
                rem
            } else {
                brent(|s| Ok(st.dir * (st.rk4(pc, theta, s) - bound)), 0.0, rem, 1e-16 * h, 0.0)?
            };
            theta = bound;
            pc = st.next(pc);
            if rem - hs <= 1e-12 * h {
                break;
            }
            done += hs;
            // the closing crossing duplicates the start point
            if (theta - target).abs() > 1e-12 * (1.0 + st.period) {
                raw.push((t0 + done, theta));
            }
        }
        let t = if j + 1 == n { k.t_total } else { (j + 1) as f64 * h };
        raw.push((t, theta));
    }
    let closure_error = theta - target;
    let tolerance = 1e-7 * (1.0 + st.period);
    if !(closure_error.abs() <= tolerance) {
        return Err(Error::StepTooCoarse {
            error: closure_error.abs(),
            tolerance,
        });
    }
    let mut samples: Vec<ContourSample> = Vec::with_capacity(raw.len());
    for (t, theta0) in raw {
        let pos = k.point(tp, theta0);
        if let Some(last) = samples.last_mut() {
            if last.pos == pos {
                *last = ContourSample { t, theta0, pos };
                continue;
            }
        }
        samples.push(ContourSample { t, theta0, pos });
    }
    let contour = Contour {
        samples,
        constants: *k,
        closure_error,
    };
    // the spatial gap must also be within the closed-polyline tolerance
    let poly = contour.to_polyline().map_err(|e| match e {
        Error::NotClosed(gap) => Error::StepTooCoarse {
            error: gap,
            tolerance: crate::plane::CLOSURE_TOLERANCE,
        },
        e => e,
    })?;
    if let Some((i, j)) = find_self_intersection(&poly) {
        return Err(Error::NotSimple(i, j));
    }
    Ok(contour)
}

/// The contour as the image of the polar boundary under
/// `(u, v) ↦ (R v + c_x, -R u + c_y)`, sampled on a uniform `θ°` grid plus
/// the polar breakpoints; `t` is the cumulative measured length.
pub fn direct_contour(ctx: &IsoContext, k: &IsoConstants, n: usize) -> Result<Contour> {
    if n < MIN_SAMPLES {
        return Err(Error::InvalidArgument(format!("need at least {MIN_SAMPLES} samples, got {n}")));
    }
    let tp = ctx.trig_polar();
    let period = tp.period();
    let dir = k.sign.factor();
    let mut offsets: Vec<f64> = (0..=n).map(|j| period * j as f64 / n as f64).collect();
    for &b in tp.breakpoints() {
        let off = (dir * (b - k.alpha)).rem_euclid(period);
        if off > 0.0 {
            offsets.push(off);
        }
    }
    offsets.sort_by(f64::total_cmp);
    offsets.dedup();
    let mut samples: Vec<ContourSample> = Vec::with_capacity(offsets.len());
    for off in offsets {
        let theta0 = k.alpha + dir * off;
        let pos = k.point(tp, theta0);
        let t = match samples.last() {
            Some(prev) => prev.t + segment_length(ctx.omega(), prev.pos, pos),
            None => 0.0,
        };
        if samples.last().is_some_and(|p| p.pos == pos) {
            continue;
        }
        samples.push(ContourSample { t, theta0, pos });
    }
    Ok(Contour {
        samples,
        constants: *k,
        closure_error: 0.0,
    })
}

/// Uniform-grid bucketing of polyline segments for nearest-segment queries.
struct SegmentGrid<'a> {
    pts: &'a [Vec2],
    origin: Vec2,
    cell: f64,
    nx: usize,
    ny: usize,
    cells: Vec<Vec<usize>>,
}

impl<'a> SegmentGrid<'a> {
    fn new(pts: &'a [Vec2]) -> Self {
        let (mut lo, mut hi) = (pts[0], pts[0]);
        for p in pts {
            lo = Vec2::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Vec2::new(hi.x.max(p.x), hi.y.max(p.y));
        }
        let nseg = pts.len().saturating_sub(1).max(1);
        let size = (hi - lo).norm().max(f64::MIN_POSITIVE);
        let side = ((nseg as f64).sqrt().ceil() as usize).clamp(1, 2048);
        let cell = size / side as f64;
        let nx = (((hi.x - lo.x) / cell) as usize + 1).min(4096);
        let ny = (((hi.y - lo.y) / cell) as usize + 1).min(4096);
        let mut g = Self {
            pts,
            origin: lo,
            cell,
            nx,
            ny,
            cells: vec![Vec::new(); nx * ny],
        };
        for i in 0..pts.len().saturating_sub(1) {
            let (a, b) = (pts[i], pts[i + 1]);
            let (cx0, cy0) = g.cell_of(Vec2::new(a.x.min(b.x), a.y.min(b.y)));
            let (cx1, cy1) = g.cell_of(Vec2::new(a.x.max(b.x), a.y.max(b.y)));
            for cy in cy0..=cy1 {
                for cx in cx0..=cx1 {
                    g.cells[cy * nx + cx].push(i);
                }
            }
        }
        g
    }

    fn cell_of(&self, p: Vec2) -> (usize, usize) {
        let fx = ((p.x - self.origin.x) / self.cell).floor().max(0.0) as usize;
        let fy = ((p.y - self.origin.y) / self.cell).floor().max(0.0) as usize;
        (fx.min(self.nx - 1), fy.min(self.ny - 1))
    }

    fn distance(&self, p: Vec2) -> f64 {
        if self.pts.len() == 1 {
            return p.dist(self.pts[0]);
        }
        let (cx, cy) = self.cell_of(p);
        let mut best = f64::INFINITY;
        let max_ring = self.nx.max(self.ny);
        for ring in 0..=max_ring {
            let (x0, x1) = (cx.saturating_sub(ring), (cx + ring).min(self.nx - 1));
            let (y0, y1) = (cy.saturating_sub(ring), (cy + ring).min(self.ny - 1));
            for y in y0..=y1 {
                for x in x0..=x1 {
                    if ring > 0 && x != x0 && x != x1 && y != y0 && y != y1 {
                        continue;
                    }
                    for &i in &self.cells[y * self.nx + x] {
                        best = best.min(point_segment_distance(p, self.pts[i], self.pts[i + 1]));
                    }
                }
            }
            // everything outside the searched block is at least this far
            let clearance = ring as f64 * self.cell;
            if best <= clearance {
                break;
            }
        }
        best
    }
}

/// Symmetric Hausdorff distance between two polylines.
pub fn hausdorff(a: &[Vec2], b: &[Vec2]) -> f64 {
    if a.is_empty() || b.is_empty() {
        return f64::INFINITY;
    }
    let one_way = |from: &[Vec2], to: &[Vec2]| {
        let grid = SegmentGrid::new(to);
        from.iter().map(|&p| grid.distance(p)).fold(0.0, f64::max)
    };
    one_way(a, b).max(one_way(b, a))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IsoReport {
    /// Length traversed counterclockwise.
    pub l_plus: f64,
    /// Length traversed clockwise.
    pub l_minus: f64,
    /// Enclosed area (positive).
    pub area: f64,
    /// `𝓛₊(A)`.
    pub bound_plus: f64,
    /// `𝓛₋(-A)`.
    pub bound_minus: f64,
    pub deficit_plus: f64,
    pub deficit_minus: f64,
}

/// Measures a closed simple curve and compares it with the optimal lengths
/// for its enclosed area.
pub fn check_isoperimetric(ctx: &IsoContext, curve: &Polyline) -> Result<IsoReport> {
    if !curve.is_closed() {
        let p = curve.points();
        return Err(Error::NotClosed(p[0].dist(p[p.len() - 1])));
    }
    if let Some((i, j)) = find_self_intersection(curve) {
        return Err(Error::NotSimple(i, j));
    }
    let signed = green_area(curve)?;
    let ccw = if signed < 0.0 { curve.reversed() } else { curve.clone() };
    let area = signed.abs();
    if !(area > 0.0) {
        return Err(Error::NonpositiveArea(signed));
    }
    let l_plus = curve_length(ctx.omega(), &ccw);
    let l_minus = curve_length(ctx.omega(), &ccw.reversed());
    let bound_plus = ctx.l_of_f(area, Sign::Plus)?;
    let bound_minus = ctx.l_of_f(area, Sign::Minus)?;
    Ok(IsoReport {
        l_plus,
        l_minus,
        area,
        bound_plus,
        bound_minus,
        deficit_plus: l_plus - bound_plus,
        deficit_minus: l_minus - bound_minus,
    })
}

/// Scales each point's offset from the curve's vertex centroid by
/// `1 + amplitude * noise()`, with `noise` in `[-1, 1]`. The closing point
/// follows the first.
pub fn perturb_radially(curve: &Polyline, amplitude: f64, mut noise: impl FnMut() -> f64) -> Result<Polyline> {
    let pts = curve.points();
    let m = pts.len() - 1;
    let centroid = pts[..m].iter().fold(Vec2::ZERO, |acc, &p| acc + p) / m as f64;
    let mut out: Vec<Vec2> = pts[..m]
        .iter()
        .map(|&p| centroid + (p - centroid) * (1.0 + amplitude * noise()))
        .collect();
    out.push(out[0]);
    Polyline::closed(out)
}
