//! Convex trigonometry: the parametrization `(cos_Ω(θ), sin_Ω(θ))` of a body's
//! boundary by doubled swept sector area, and the correspondence `θ°  ↦ θ`
//! between the angles of a body and of its polar.
//!
//! Polygons are handled exactly: along an edge from `a` to `b` the doubled
//! sector area grows linearly, so both functions are piecewise linear in `θ`.
//! For p-balls the boundary is split into eight octant arcs, each a mirror or
//! rotation of the arc `t ↦ r (X(t), t)`, `X(t) = (1 - t^p)^{1/p}`,
//! `0 <= t <= 2^{-1/p}`, on which `dθ/dt = r² (1 - t^p)^{1/p - 1}`. The sector
//! area is tabulated on a graded grid and evaluation inverts it by a
//! safeguarded Newton iteration.

use std::io::Write;

use crate::body::{ConvexBody, Face, PBall, Polygon};
use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::io::fmt17;
use crate::quad::{gauss_legendre10, integrate_scalar, QuadConfig};

/// Minimum resolution accepted for p-ball tables.
pub const MIN_PBALL_RESOLUTION: usize = 16;
/// Internal sector-area nodes per octant arc, at least.
const MIN_NODES_PER_OCTANT: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Exactness {
    ExactPiecewiseLinear,
    /// Evaluated by numerically inverting the tabulated sector area.
    Interpolated,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrigSample {
    pub theta: f64,
    pub cos: f64,
    pub sin: f64,
}

#[derive(Clone, Debug)]
struct PolygonNodes {
    theta: Vec<f64>,
    points: Vec<Vec2>,
    /// `is_vertex[i]` is false only for a start point interior to an edge.
    is_vertex: Vec<bool>,
}

/// Canonical arc `t ↦ (X(t), t)` of the unit p-ball, tabulated.
#[derive(Clone, Debug)]
struct OctantArc {
    p: f64,
    scale: f64,
    /// `t` at the diagonal, `2^{-1/p}`.
    t_max: f64,
    nodes_t: Vec<f64>,
    /// unit-scale sector area at each node
    nodes_area: Vec<f64>,
    nodes_density: Vec<f64>,
}

impl OctantArc {
    fn new(ball: &PBall, nodes: usize) -> Result<Self> {
        let p = ball.p();
        let t_max = 2f64.powf(-1.0 / p);
        let nodes_t: Vec<f64> = (0..=nodes)
            .map(|j| {
                let s = j as f64 / nodes as f64;
                t_max * 0.5 * s * (1.0 + s)
            })
            .collect();
        let mut nodes_area = vec![0.0; nodes + 1];
        for j in 0..nodes {
            let piece = integrate_scalar(
                |t| Self::density_unit(p, t),
                &[nodes_t[j], nodes_t[j + 1]],
                QuadConfig::rel(4e-14),
            )?;
            nodes_area[j + 1] = nodes_area[j] + piece;
        }
        let nodes_density = nodes_t.iter().map(|&t| Self::density_unit(p, t)).collect();
        Ok(Self {
            p,
            scale: ball.scale(),
            t_max,
            nodes_t,
            nodes_area,
            nodes_density,
        })
    }

    /// `(1 - t^p)^{1/p - 1}`.
    #[inline]
    fn density_unit(p: f64, t: f64) -> f64 {
        ((1.0 / p - 1.0) * (-t.powf(p)).ln_1p()).exp()
    }

    #[inline]
    fn x_of(&self, t: f64) -> f64 {
        ((-t.powf(self.p)).ln_1p() / self.p).exp()
    }

    /// `1 - X(t)` without cancellation.
    #[inline]
    fn gap_of(&self, t: f64) -> f64 {
        -((-t.powf(self.p)).ln_1p() / self.p).exp_m1()
    }

    /// Octant span (scaled by `r²`).
    fn span(&self) -> f64 {
        self.scale * self.scale * self.nodes_area[self.nodes_area.len() - 1]
    }

    fn node_index(&self, t: f64) -> usize {
        let j = self.nodes_t.partition_point(|&x| x <= t);
        j.saturating_sub(1).min(self.nodes_t.len() - 2)
    }

    /// Unit-scale sector area from the axis point to `t`.
    fn area_unit(&self, t: f64) -> f64 {
        let t = t.clamp(0.0, self.t_max);
        let j = self.node_index(t);
        let p = self.p;
        self.nodes_area[j] + gauss_legendre10(|s| Self::density_unit(p, s), self.nodes_t[j], t)
    }

    /// Inverse of [`Self::area_unit`].
    fn t_of_area_unit(&self, area: f64) -> f64 {
        let last = self.nodes_area.len() - 1;
        if area <= 0.0 {
            return 0.0;
        }
        if area >= self.nodes_area[last] {
            return self.t_max;
        }
        let j = self.nodes_area.partition_point(|&a| a <= area).saturating_sub(1).min(last - 1);
        let (t0, t1) = (self.nodes_t[j], self.nodes_t[j + 1]);
        let (a0, a1) = (self.nodes_area[j], self.nodes_area[j + 1]);
        let p = self.p;
        // cubic Hermite guess for t(a), slopes 1/density at the nodes
        let da = a1 - a0;
        let s = (area - a0) / da;
        let (m0, m1) = (da / self.nodes_density[j], da / self.nodes_density[j + 1]);
        let (s2, s3) = (s * s, s * s * s);
        let guess = (2.0 * s3 - 3.0 * s2 + 1.0) * t0
            + (s3 - 2.0 * s2 + s) * m0
            + (-2.0 * s3 + 3.0 * s2) * t1
            + (s3 - s2) * m1;
        let (mut lo, mut hi) = (t0, t1);
        let mut t = if guess > lo && guess < hi { guess } else { t0 + s * (t1 - t0) };
        for _ in 0..60 {
            let f = a0 + gauss_legendre10(|x| Self::density_unit(p, x), t0, t) - area;
            if f > 0.0 {
                hi = t;
            } else {
                lo = t;
            }
            let step = f / Self::density_unit(p, t);
            if step.abs() <= 1e-15 * (t1 - t0) || hi - lo <= 4.0 * f64::EPSILON * hi {
                return t - step;
            }
            let next = t - step;
            t = if next > lo && next < hi { next } else { 0.5 * (lo + hi) };
        }
        t
    }
}

#[derive(Clone, Debug)]
enum Repr {
    Polygon(PolygonNodes),
    PBall { arc: OctantArc, span: f64 },
}

/// Generalized trigonometric parametrization of one body's boundary.
#[derive(Clone, Debug)]
pub struct TrigTable {
    body: ConvexBody,
    period: f64,
    breakpoints: Vec<f64>,
    samples: Vec<TrigSample>,
    exactness: Exactness,
    repr: Repr,
}

fn rotate_quarters(v: Vec2, k: usize) -> Vec2 {
    match k % 4 {
        0 => v,
        1 => Vec2::new(-v.y, v.x),
        2 => Vec2::new(-v.x, -v.y),
        _ => Vec2::new(v.y, -v.x),
    }
}

impl TrigTable {
    /// Builds the table. `resolution` is the approximate number of exported
    /// samples; p-balls require at least [`MIN_PBALL_RESOLUTION`].
    pub fn build(body: &ConvexBody, resolution: usize) -> Result<Self> {
        match body {
            ConvexBody::Polygon(poly) => Ok(Self::build_polygon(body.clone(), poly, resolution)),
            ConvexBody::PBall(ball) => {
                if resolution < MIN_PBALL_RESOLUTION {
                    return Err(Error::ResolutionTooLow {
                        got: resolution,
                        min: MIN_PBALL_RESOLUTION,
                    });
                }
                let arc = OctantArc::new(ball, (resolution / 8).max(MIN_NODES_PER_OCTANT))?;
                let span = arc.span();
                let period = 8.0 * span;
                let mut table = Self {
                    body: body.clone(),
                    period,
                    breakpoints: (0..4).map(|k| 2.0 * k as f64 * span).collect(),
                    samples: Vec::new(),
                    exactness: Exactness::Interpolated,
                    repr: Repr::PBall { arc, span },
                };
                table.samples = table.pball_samples();
                Ok(table)
            }
        }
    }

    fn build_polygon(body: ConvexBody, poly: &Polygon, resolution: usize) -> Self {
        let v = poly.vertices();
        let n = v.len();
        // edge crossing the positive x-axis upward
        let mut start_edge = 0;
        let mut start = v[0];
        let mut start_is_vertex = false;
        for i in 0..n {
            let a = v[i];
            let b = v[(i + 1) % n];
            if a.y <= 0.0 && b.y > 0.0 {
                let x = a.x + (b.x - a.x) * (-a.y) / (b.y - a.y);
                if x > 0.0 {
                    start_edge = i;
                    if a.y == 0.0 {
                        start = a;
                        start_is_vertex = true;
                    } else {
                        start = Vec2::new(x, 0.0);
                    }
                    break;
                }
            }
        }
        let mut points = vec![start];
        let mut is_vertex = vec![start_is_vertex];
        for k in 1..=n {
            let idx = (start_edge + k) % n;
            if start_is_vertex && idx == start_edge {
                break;
            }
            points.push(v[idx]);
            is_vertex.push(true);
        }
        points.push(start);
        is_vertex.push(start_is_vertex);
        let mut theta = vec![0.0; points.len()];
        for i in 1..points.len() {
            theta[i] = theta[i - 1] + points[i - 1].cross(points[i]);
        }
        let period = theta[theta.len() - 1];
        let breakpoints = (0..points.len() - 1)
            .filter(|&i| is_vertex[i])
            .map(|i| theta[i])
            .collect();
        let nodes = PolygonNodes {
            theta,
            points,
            is_vertex,
        };
        let mut table = Self {
            body,
            period,
            breakpoints,
            samples: Vec::new(),
            exactness: Exactness::ExactPiecewiseLinear,
            repr: Repr::Polygon(nodes),
        };
        table.samples = table.polygon_samples(resolution.max(1));
        table
    }

    fn polygon_samples(&self, resolution: usize) -> Vec<TrigSample> {
        let Repr::Polygon(nodes) = &self.repr else { unreachable!() };
        let mut thetas: Vec<f64> = (0..resolution)
            .map(|k| self.period * k as f64 / resolution as f64)
            .chain(nodes.theta[..nodes.theta.len() - 1].iter().copied())
            .collect();
        thetas.sort_by(f64::total_cmp);
        thetas.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * self.period);
        thetas
            .into_iter()
            .map(|t| {
                let p = self.eval(t);
                TrigSample {
                    theta: t,
                    cos: p.x,
                    sin: p.y,
                }
            })
            .collect()
    }

    fn pball_samples(&self) -> Vec<TrigSample> {
        let Repr::PBall { arc, span } = &self.repr else { unreachable!() };
        let r = arc.scale;
        let m = arc.nodes_t.len() - 1;
        let mut out = Vec::with_capacity(8 * m);
        for o in 0..8 {
            for j in 0..m {
                let (local, canon) = if o % 2 == 0 {
                    let t = arc.nodes_t[j];
                    (r * r * arc.nodes_area[j], Vec2::new(arc.x_of(t), t))
                } else {
                    let t = arc.nodes_t[m - j];
                    (*span - r * r * arc.nodes_area[m - j], Vec2::new(t, arc.x_of(t)))
                };
                let pt = rotate_quarters(canon * r, o / 2);
                out.push(TrigSample {
                    theta: o as f64 * span + local,
                    cos: pt.x,
                    sin: pt.y,
                });
            }
        }
        out
    }

    pub fn body(&self) -> &ConvexBody {
        &self.body
    }

    /// Period `2 S_Ω`.
    pub fn period(&self) -> f64 {
        self.period
    }

    /// Angles in `[0, period)` where the parametrization is not smooth:
    /// polygon vertices, or the four axis points of a p-ball.
    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn samples(&self) -> &[TrigSample] {
        &self.samples
    }

    pub fn exactness(&self) -> Exactness {
        self.exactness
    }

    /// `(cos_Ω(θ), sin_Ω(θ))`, periodic in `θ`.
    pub fn eval(&self, theta: f64) -> Vec2 {
        let tm = theta.rem_euclid(self.period);
        match &self.repr {
            Repr::Polygon(nodes) => {
                let i = self.locate(tm);
                let (a, b) = (nodes.theta[i], nodes.theta[i + 1]);
                let s = (tm - a) / (b - a);
                nodes.points[i] + (nodes.points[i + 1] - nodes.points[i]) * s
            }
            Repr::PBall { arc, span } => {
                let o = ((tm / span) as usize).min(7);
                let local = tm - o as f64 * span;
                let inv_r2 = 1.0 / (arc.scale * arc.scale);
                let canon = if o % 2 == 0 {
                    let t = arc.t_of_area_unit(local * inv_r2);
                    Vec2::new(arc.x_of(t), t)
                } else {
                    let t = arc.t_of_area_unit((span - local) * inv_r2);
                    Vec2::new(t, arc.x_of(t))
                };
                rotate_quarters(canon * arc.scale, o / 2)
            }
        }
    }

    pub fn cos(&self, theta: f64) -> f64 {
        self.eval(theta).x
    }

    pub fn sin(&self, theta: f64) -> f64 {
        self.eval(theta).y
    }

    /// Angle in `[0, period)` of a boundary point (the point is projected
    /// radially if it is slightly off the boundary).
    pub fn theta_of_point(&self, v: Vec2) -> f64 {
        match &self.repr {
            Repr::Polygon(nodes) => {
                for i in 0..nodes.points.len() - 1 {
                    let a = nodes.points[i];
                    let b = nodes.points[i + 1];
                    // the ray through `v` meets segment [a, b]
                    let ca = a.cross(v);
                    let cb = v.cross(b);
                    if ca >= 0.0 && cb >= 0.0 && ca + cb > 0.0 {
                        let s = ca / (ca + cb);
                        let th = nodes.theta[i] + s * (nodes.theta[i + 1] - nodes.theta[i]);
                        return if th >= self.period { th - self.period } else { th };
                    }
                }
                0.0
            }
            Repr::PBall { arc, span } => {
                let r = arc.scale;
                let mut w = v / r;
                let mut k = 0;
                // rotate clockwise into the quadrant x > 0, y >= 0
                while !(w.x > 0.0 && w.y >= 0.0) && k < 4 {
                    w = Vec2::new(w.y, -w.x);
                    k += 1;
                }
                let k = k % 4;
                let r2 = r * r;
                let th = if w.y <= w.x {
                    (2 * k) as f64 * span + r2 * arc.area_unit(w.y)
                } else {
                    (2 * k + 2) as f64 * span - r2 * arc.area_unit(w.x)
                };
                th.rem_euclid(self.period)
            }
        }
    }

    /// Number of smooth pieces: polygon node intervals or p-ball octants.
    pub fn segment_count(&self) -> usize {
        match &self.repr {
            Repr::Polygon(nodes) => nodes.theta.len() - 1,
            Repr::PBall { .. } => 8,
        }
    }

    /// `[start, end]` of segment `i` in `[0, period]`.
    pub fn segment_range(&self, i: usize) -> (f64, f64) {
        match &self.repr {
            Repr::Polygon(nodes) => (nodes.theta[i], nodes.theta[i + 1]),
            Repr::PBall { span, .. } => (i as f64 * span, (i + 1) as f64 * span),
        }
    }

    /// Index of the segment containing `theta` (reduced modulo the period,
    /// half-open on the right).
    pub fn locate(&self, theta: f64) -> usize {
        let tm = theta.rem_euclid(self.period);
        match &self.repr {
            Repr::Polygon(nodes) => {
                let n = nodes.theta.len() - 1;
                nodes.theta.partition_point(|&x| x <= tm).saturating_sub(1).min(n - 1)
            }
            Repr::PBall { span, .. } => ((tm / span) as usize).min(7),
        }
    }

    /// Evaluates segment `i`'s smooth formula at `offset` from its start,
    /// extending it beyond the segment ends when `offset` is outside.
    pub fn eval_segment(&self, i: usize, offset: f64) -> Vec2 {
        match &self.repr {
            Repr::Polygon(nodes) => {
                let len = nodes.theta[i + 1] - nodes.theta[i];
                nodes.points[i] + (nodes.points[i + 1] - nodes.points[i]) * (offset / len)
            }
            Repr::PBall { .. } => self.eval(self.segment_range(i).0 + offset),
        }
    }

    /// Segment end points (polygons only).
    pub fn segment_points(&self, i: usize) -> Option<(Vec2, Vec2)> {
        match &self.repr {
            Repr::Polygon(nodes) => Some((nodes.points[i], nodes.points[i + 1])),
            Repr::PBall { .. } => None,
        }
    }

    /// Whether the segment boundary at node `i` is a genuine vertex (polygons).
    pub(crate) fn node_is_vertex(&self, i: usize) -> bool {
        match &self.repr {
            Repr::Polygon(nodes) => nodes.is_vertex[i],
            Repr::PBall { .. } => i % 2 == 0,
        }
    }

    /// Octant arc for p-ball tables: `(p, scale)`, with evaluation of the
    /// canonical arc and its accurate gap to the axis point.
    pub(crate) fn pball_arc(&self) -> Option<ArcView<'_>> {
        match &self.repr {
            Repr::PBall { arc, .. } => Some(ArcView { arc }),
            Repr::Polygon(_) => None,
        }
    }

    /// Checks the table invariants, naming the first one violated.
    pub fn validate(&self) -> std::result::Result<(), String> {
        let first = self.samples.first().ok_or("table has no samples")?;
        if first.theta != 0.0 || first.sin.abs() > 1e-12 || first.cos <= 0.0 {
            return Err("trig.start-on-positive-x-axis".into());
        }
        for s in &self.samples {
            let g = self.body.gauge(Vec2::new(s.cos, s.sin));
            if (g - 1.0).abs() > 1e-9 {
                return Err(format!("trig.samples-on-boundary (theta = {}, gauge = {g})", s.theta));
            }
        }
        for w in self.samples.windows(2) {
            if w[1].theta <= w[0].theta || w[0].cos * w[1].sin - w[0].sin * w[1].cos <= 0.0 {
                return Err(format!("trig.monotone-ccw (theta = {})", w[1].theta));
            }
        }
        let a = self.eval(0.0);
        let b = self.eval(self.period);
        if a.dist(b) > 1e-10 {
            return Err("trig.periodicity".into());
        }
        Ok(())
    }

    #[doc(hidden)]
    /// Fault injection for the verification harness.
    pub fn corrupt_sample_for_testing(&mut self, index: usize, delta: Vec2) {
        let n = self.samples.len();
        let s = &mut self.samples[index % n];
        s.cos += delta.x;
        s.sin += delta.y;
    }

    /// Writes `theta,cos,sin` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["theta", "cos", "sin"])?;
        for s in &self.samples {
            w.write_record([fmt17(s.theta), fmt17(s.cos), fmt17(s.sin)])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Read access to the octant arc of a p-ball table.
pub(crate) struct ArcView<'a> {
    arc: &'a OctantArc,
}

impl ArcView<'_> {
    pub fn scale(&self) -> f64 {
        self.arc.scale
    }
    pub fn t_max(&self) -> f64 {
        self.arc.t_max
    }
    pub fn p(&self) -> f64 {
        self.arc.p
    }
    /// Boundary point of octant `o` at arc parameter `t` (measured from the
    /// octant's axis end), the rate `dθ/dt`, and the gap `1 - X(t)` in unit
    /// scale.
    pub fn point(&self, o: usize, t: f64) -> (Vec2, f64, f64) {
        let r = self.arc.scale;
        let x = self.arc.x_of(t);
        let canon = if o % 2 == 0 {
            Vec2::new(x, t)
        } else {
            Vec2::new(t, x)
        };
        let rate = r * r * OctantArc::density_unit(self.arc.p, t);
        (rotate_quarters(canon * r, o / 2), rate, self.arc.gap_of(t))
    }
}

/// Angle correspondence `θ° ↦ θ` between a body and its polar.
#[derive(Clone, Debug)]
pub struct Correspondence {
    omega: TrigTable,
    polar: TrigTable,
    map: CorrMap,
    theta_at_zero: f64,
}

#[derive(Clone, Debug)]
enum CorrMap {
    /// Lifted body angle per polar segment (polygon pairs); non-decreasing,
    /// spanning less than one body period.
    Piecewise(Vec<f64>),
    Smooth,
}

/// Set-valued points of `θ(θ°)` are resolved to the midpoint of the
/// admissible interval.
pub const SET_VALUED_CONVENTION: &str = "midpoint";

impl Correspondence {
    pub fn new(omega: TrigTable, polar: TrigTable) -> Result<Self> {
        let p = omega.period();
        let (map, theta_at_zero) = match (omega.body(), polar.body()) {
            (ConvexBody::Polygon(_), ConvexBody::Polygon(_)) => {
                let mut lifted: Vec<f64> = Vec::with_capacity(polar.segment_count());
                for i in 0..polar.segment_count() {
                    let (a, b) = polar.segment_points(i).expect("polygon segments");
                    let face = omega.body().support_face((a + b) * 0.5);
                    let mut th = omega.theta_of_point(face.midpoint());
                    if let Some(&prev) = lifted.last() {
                        while th < prev - 1e-12 * p {
                            th += p;
                        }
                    }
                    lifted.push(th);
                }
                let base = if polar.node_is_vertex(0) {
                    0.5 * (lifted[lifted.len() - 1] - p + lifted[0])
                } else {
                    lifted[0]
                };
                (CorrMap::Piecewise(lifted), base)
            }
            (ConvexBody::PBall(_), ConvexBody::PBall(_)) => (CorrMap::Smooth, 0.0),
            _ => {
                return Err(Error::InvalidArgument(
                    "body and polar must be of the same kind".into(),
                ))
            }
        };
        let mut corr = Self {
            omega,
            polar,
            map,
            theta_at_zero,
        };
        if matches!(corr.map, CorrMap::Smooth) {
            corr.theta_at_zero = corr.smooth_raw(0.0);
        }
        Ok(corr)
    }

    pub fn omega(&self) -> &TrigTable {
        &self.omega
    }

    pub fn polar(&self) -> &TrigTable {
        &self.polar
    }

    /// Corresponding body angle in `[0, period)` for smooth pairs.
    fn smooth_raw(&self, theta0: f64) -> f64 {
        let w = self.polar.eval(theta0);
        let v = match self.omega.body().support_face(w) {
            Face::Point(v) => v,
            f => f.midpoint(),
        };
        self.omega.theta_of_point(v)
    }

    /// `θ(θ°)` as a monotone lift: `correspond(θ° + P°) = correspond(θ°) + P`.
    pub fn correspond(&self, theta0: f64) -> f64 {
        let pp = self.polar.period();
        let p = self.omega.period();
        let k = (theta0 / pp).floor();
        let tm = (theta0 - k * pp).clamp(0.0, pp);
        let base = self.theta_at_zero;
        let lifted = match &self.map {
            CorrMap::Piecewise(lifted) => {
                let n = lifted.len();
                let i = self.polar.locate(tm);
                let (a, b) = self.polar.segment_range(i);
                let tol = 1e-12 * pp;
                if tm - a <= tol && self.polar.node_is_vertex(i) {
                    if i == 0 {
                        base
                    } else {
                        0.5 * (lifted[i - 1] + lifted[i])
                    }
                } else if b - tm <= tol && self.polar.node_is_vertex((i + 1) % n) {
                    if i + 1 == n {
                        base + p
                    } else {
                        0.5 * (lifted[i] + lifted[i + 1])
                    }
                } else {
                    lifted[i]
                }
            }
            CorrMap::Smooth => {
                let raw = self.smooth_raw(tm);
                let tol = 1e-9 * p;
                let mut l = if raw < base - tol { raw + p } else { raw };
                if tm > 0.5 * pp && l <= base + tol {
                    l = raw + p;
                }
                l
            }
        };
        lifted + k * p
    }

    /// Body point `(cos_Ω(θ(θ°)), sin_Ω(θ(θ°)))`.
    pub fn corresponding_point(&self, theta0: f64) -> Vec2 {
        self.omega.eval(self.correspond(theta0))
    }

    /// `|cos_Ω(θ) cos_Ω°(θ°) + sin_Ω(θ) sin_Ω°(θ°) - 1|` at `θ = θ(θ°)`.
    pub fn identity_residual(&self, theta0: f64) -> f64 {
        let w = self.polar.eval(theta0);
        let v = self.corresponding_point(theta0);
        (v.dot(w) - 1.0).abs()
    }

    /// Maximum deviation of central differences of the polar functions from
    /// `(-sin_Ω(θ(θ°)), cos_Ω(θ(θ°)))` over `grid`. Grid points closer than
    /// `h` to a polar breakpoint are rejected. The step is `h`, shrunk to a
    /// thousandth of the distance to the nearest breakpoint: on p-balls the
    /// third derivative blows up at the axis points.
    pub fn check_derivative_relation(&self, grid: &[f64], h: f64) -> Result<f64> {
        let pp = self.polar.period();
        let mut worst: f64 = 0.0;
        for &t in grid {
            let tm = t.rem_euclid(pp);
            let gap = self
                .polar
                .breakpoints()
                .iter()
                .map(|&b| {
                    let d = (tm - b).rem_euclid(pp);
                    d.min(pp - d)
                })
                .fold(f64::INFINITY, f64::min);
            if gap < h {
                return Err(Error::InvalidArgument(format!(
                    "grid point {t} is within {h} of a breakpoint"
                )));
            }
            let step = h.min(1e-3 * gap);
            let fwd = self.polar.eval(t + step);
            let bwd = self.polar.eval(t - step);
            let d = (fwd - bwd) / (2.0 * step);
            let v = self.corresponding_point(t);
            worst = worst.max((d.x + v.y).abs()).max((d.y - v.x).abs());
        }
        Ok(worst)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn table(b: &ConvexBody) -> TrigTable {
        TrigTable::build(b, 256).unwrap()
    }

    #[test]
    fn disk_matches_classical_trig() {
        let t = table(&ConvexBody::disk(1.0));
        assert!((t.period() - 2.0 * PI).abs() < 1e-12);
        for k in 0..200 {
            let th = -7.0 + 0.0731 * k as f64;
            let p = t.eval(th);
            assert!((p.x - th.cos()).abs() < 1e-13, "{th}");
            assert!((p.y - th.sin()).abs() < 1e-13, "{th}");
        }
        let p = t.eval(PI / 2.0);
        assert!(p.x.abs() < 1e-14 && (p.y - 1.0).abs() < 1e-14);
    }

    #[test]
    fn square_and_diamond_angles() {
        let sq = table(&ConvexBody::square(1.0));
        assert_eq!(sq.period(), 8.0);
        assert_eq!(sq.eval(1.0), Vec2::new(1.0, 1.0));
        assert_eq!(sq.eval(4.0), Vec2::new(-1.0, 0.0));
        let di = table(&ConvexBody::diamond(1.0));
        assert_eq!(di.period(), 4.0);
        assert_eq!(di.eval(1.0), Vec2::new(0.0, 1.0));
        for t in [&sq, &di] {
            assert!(t.eval(0.0).dist(t.eval(t.period())) < 1e-10);
            assert!(t.validate().is_ok());
        }
    }

    #[test]
    fn theta_of_point_inverts_eval() {
        for b in [
            ConvexBody::pball(3.0, 0.7).unwrap(),
            ConvexBody::pball(1.5, 1.0).unwrap(),
            ConvexBody::polygon(&[
                Vec2::new(1.3, -0.2),
                Vec2::new(0.9, 0.8),
                Vec2::new(-0.4, 1.1),
                Vec2::new(-1.0, 0.1),
                Vec2::new(0.2, -0.9),
            ])
            .unwrap(),
        ] {
            let t = table(&b);
            for k in 0..97 {
                let th = t.period() * (k as f64 + 0.37) / 97.0;
                let back = t.theta_of_point(t.eval(th));
                assert!((back - th).abs() < 1e-11, "{b}: {th} -> {back}");
            }
        }
    }

    #[test]
    fn pball_resolution_floor() {
        let e = TrigTable::build(&ConvexBody::disk(1.0), 8).unwrap_err();
        assert!(matches!(e, Error::ResolutionTooLow { got: 8, min: 16 }));
    }

    #[test]
    fn correspondence_square_diamond() {
        let sq = ConvexBody::square(1.0);
        let corr = Correspondence::new(table(&sq), table(&sq.polar())).unwrap();
        // θ° in (0,1) lies on the diamond edge (1,0)->(0,1), dual to the square
        // vertex (1,1) at θ = 1
        for th0 in [0.1, 0.5, 0.9] {
            assert!((corr.correspond(th0) - 1.0).abs() < 1e-14);
        }
        // at the diamond vertex (0,1) (θ° = 1) the square edge from (1,1) to
        // (-1,1) is set-valued; midpoint is θ = 2
        assert!((corr.correspond(1.0) - 2.0).abs() < 1e-14);
        assert!((corr.correspond(0.5 + 4.0) - 9.0).abs() < 1e-12);
    }

    #[test]
    fn correspondence_disk_is_identity() {
        let d = ConvexBody::disk(1.0);
        let corr = Correspondence::new(table(&d), table(&d)).unwrap();
        assert!((corr.correspond(1.2) - 1.2).abs() < 1e-12);
        assert!((corr.correspond(1.2 + 2.0 * PI) - (1.2 + 2.0 * PI)).abs() < 1e-12);
        assert!(corr.identity_residual(2.5) < 1e-14);
    }

    #[test]
    fn derivative_relation_precondition() {
        let sq = ConvexBody::square(1.0);
        let corr = Correspondence::new(table(&sq), table(&sq.polar())).unwrap();
        assert!(corr.check_derivative_relation(&[1.0], 1e-5).is_err());
        let r = corr.check_derivative_relation(&[0.3, 1.7, 2.2, 3.9], 1e-5).unwrap();
        assert!(r <= 1e-8, "{r}");
    }

    #[test]
    fn csv_dump_header() {
        let mut buf = Vec::new();
        table(&ConvexBody::diamond(1.0)).write_csv(&mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert!(s.starts_with("theta,cos,sin\n0.0000000000000000e0,1.0000000000000000e0,"));
    }
}
