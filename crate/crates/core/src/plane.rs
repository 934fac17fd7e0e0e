//! Measurement on the Lobachevsky plane `{(x, y) : y > 0}` with the
//! left-invariant Finsler structure of a body: the norm of a velocity `ξ` at
//! `(x, y)` is `gauge(ξ) / y`, and area is the form `dx ∧ dy / y²`.
//!
//! Along a straight segment `y` is linear in the segment parameter, so both
//! the length and Green's-formula area integrals have closed forms.

use std::io::{Read, Write};

use crate::body::ConvexBody;
use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::io::fmt17;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HyperbolicPoint {
    pub x: f64,
    pub y: f64,
}

impl HyperbolicPoint {
    pub fn new(x: f64, y: f64) -> Result<Self> {
        if !(y > 0.0) || !x.is_finite() || !y.is_finite() {
            return Err(Error::NonpositiveY(y));
        }
        Ok(Self { x, y })
    }

    pub fn to_vec(self) -> Vec2 {
        Vec2::new(self.x, self.y)
    }

    /// Group product `self · p`: the left translation `(x, y) ↦ (x₀ + y₀x, y₀y)`.
    pub fn translate(self, p: Vec2) -> Vec2 {
        left_translate(self, p)
    }
}

pub fn left_translate(g: HyperbolicPoint, p: Vec2) -> Vec2 {
    Vec2::new(g.x + g.y * p.x, g.y * p.y)
}

/// Sampled curve in the upper half-plane.
#[derive(Clone, Debug, PartialEq)]
pub struct Polyline {
    points: Vec<Vec2>,
    closed: bool,
}

/// Relative gap up to which [`Polyline::closed`] snaps the last point onto
/// the first.
pub const CLOSURE_TOLERANCE: f64 = 1e-8;

impl Polyline {
    /// Open polyline. Points must have `y > 0`, consecutive points distinct.
    pub fn open(points: Vec<Vec2>) -> Result<Self> {
        Self::check(&points)?;
        Ok(Self {
            points,
            closed: false,
        })
    }

    /// Closed polyline: the last point must repeat the first up to
    /// [`CLOSURE_TOLERANCE`] relative to the curve's extent, and is replaced
    /// by an exact copy of it.
    pub fn closed(mut points: Vec<Vec2>) -> Result<Self> {
        if points.len() < 4 {
            return Err(Error::DegenerateInput(
                "a closed polyline needs at least three distinct points".into(),
            ));
        }
        let scale = extent(&points);
        let gap = points[0].dist(points[points.len() - 1]);
        if !(gap <= CLOSURE_TOLERANCE * scale.max(f64::MIN_POSITIVE)) {
            return Err(Error::NotClosed(gap));
        }
        let n = points.len();
        points[n - 1] = points[0];
        Self::check(&points)?;
        Ok(Self {
            points,
            closed: true,
        })
    }

    fn check(points: &[Vec2]) -> Result<()> {
        if points.len() < 2 {
            return Err(Error::DegenerateInput("a polyline needs two points".into()));
        }
        for p in points {
            if !p.is_finite() {
                return Err(Error::DegenerateInput(format!("non-finite point {p:?}")));
            }
            if !(p.y > 0.0) {
                return Err(Error::NonpositiveY(p.y));
            }
        }
        if let Some(i) = points.windows(2).position(|w| w[0] == w[1]) {
            return Err(Error::DegenerateInput(format!(
                "consecutive points {i} and {} coincide",
                i + 1
            )));
        }
        Ok(())
    }

    pub fn points(&self) -> &[Vec2] {
        &self.points
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn reversed(&self) -> Self {
        let mut points = self.points.clone();
        points.reverse();
        Self {
            points,
            closed: self.closed,
        }
    }

    pub fn translated(&self, g: HyperbolicPoint) -> Self {
        Self {
            points: self.points.iter().map(|&p| left_translate(g, p)).collect(),
            closed: self.closed,
        }
    }

    /// Reads `x` and `y` columns by header name (other columns, such as `t`
    /// or `theta0`, are ignored). The curve is closed when its last row
    /// repeats the first.
    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
        let headers = rdr.headers()?.clone();
        let col = |name: &str| {
            headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| Error::DegenerateInput(format!("missing column `{name}`")))
        };
        let (ix, iy) = (col("x")?, col("y")?);
        let mut points = Vec::new();
        for (row, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let get = |i: usize| -> Result<f64> {
                let field = rec.get(i).unwrap_or("");
                field.parse().map_err(|_| {
                    Error::DegenerateInput(format!("row {}: cannot parse `{field}`", row + 2))
                })
            };
            points.push(Vec2::new(get(ix)?, get(iy)?));
        }
        if points.len() >= 4 && points[0].dist(points[points.len() - 1]) <= CLOSURE_TOLERANCE * extent(&points) {
            Self::closed(points)
        } else {
            Self::open(points)
        }
    }

    /// Writes `t,x,y` with `t` the cumulative Finsler length for `body`.
    pub fn write_csv<W: Write>(&self, body: &ConvexBody, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t", "x", "y"])?;
        let mut t = 0.0;
        for (i, p) in self.points.iter().enumerate() {
            if i > 0 {
                t += segment_length(body, self.points[i - 1], *p);
            }
            w.write_record([fmt17(t), fmt17(p.x), fmt17(p.y)])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn extent(points: &[Vec2]) -> f64 {
    let (mut lo, mut hi) = (points[0], points[0]);
    for p in points {
        lo = Vec2::new(lo.x.min(p.x), lo.y.min(p.y));
        hi = Vec2::new(hi.x.max(p.x), hi.y.max(p.y));
    }
    (hi - lo).norm()
}

/// `∫₀¹ ds / y(s)` for `y` linear from `y1` to `y2`.
#[inline]
fn inverse_y_mean(y1: f64, y2: f64) -> f64 {
    let r = (y2 - y1) / y1;
    if r.abs() < 1e-8 {
        (1.0 - r * (0.5 - r / 3.0)) / y1
    } else {
        r.ln_1p() / (y2 - y1)
    }
}

/// Finsler norm of `velocity` at `at`.
pub fn finsler_speed(body: &ConvexBody, at: Vec2, velocity: Vec2) -> Result<f64> {
    if !(at.y > 0.0) {
        return Err(Error::NonpositiveY(at.y));
    }
    Ok(body.gauge(velocity) / at.y)
}

/// Length of the straight segment from `a` to `b`.
pub fn segment_length(body: &ConvexBody, a: Vec2, b: Vec2) -> f64 {
    body.gauge(b - a) * inverse_y_mean(a.y, b.y)
}

/// Finsler length; direction matters for non-symmetric bodies.
pub fn curve_length(body: &ConvexBody, curve: &Polyline) -> f64 {
    curve
        .points
        .windows(2)
        .map(|w| segment_length(body, w[0], w[1]))
        .sum()
}

/// Signed area enclosed by a closed curve, `∮ dx / y`; positive when the
/// curve runs counterclockwise.
pub fn green_area(curve: &Polyline) -> Result<f64> {
    if !curve.closed {
        let p = &curve.points;
        return Err(Error::NotClosed(p[0].dist(p[p.len() - 1])));
    }
    Ok(curve
        .points
        .windows(2)
        .map(|w| (w[1].x - w[0].x) * inverse_y_mean(w[0].y, w[1].y))
        .sum())
}

#[inline]
fn orient(a: Vec2, b: Vec2, c: Vec2) -> f64 {
    (b - a).cross(c - a)
}

fn segments_touch(a: Vec2, b: Vec2, c: Vec2, d: Vec2) -> bool {
    let tol = 1e-12 * (b - a).norm() * (d - c).norm();
    let d1 = orient(a, b, c);
    let d2 = orient(a, b, d);
    let d3 = orient(c, d, a);
    let d4 = orient(c, d, b);
    let side = |v: f64| {
        if v > tol {
            1
        } else if v < -tol {
            -1
        } else {
            0
        }
    };
    let (s1, s2, s3, s4) = (side(d1), side(d2), side(d3), side(d4));
    if s1 * s2 < 0 && s3 * s4 < 0 {
        return true;
    }
    let within = |p: Vec2, q: Vec2, r: Vec2| {
        r.x >= p.x.min(q.x) && r.x <= p.x.max(q.x) && r.y >= p.y.min(q.y) && r.y <= p.y.max(q.y)
    };
    (s1 == 0 && within(a, b, c))
        || (s2 == 0 && within(a, b, d))
        || (s3 == 0 && within(c, d, a))
        || (s4 == 0 && within(c, d, b))
}

/// First pair of non-adjacent segments that intersect or touch, if any.
///
/// Sweep over segments ordered by their low end along a skew direction,
/// keeping those whose projection still overlaps the sweep position. The
/// direction is skew so that the long axis-parallel edges common in contours
/// of polygonal bodies do not pile up in the active list.
pub fn find_self_intersection(curve: &Polyline) -> Option<(usize, usize)> {
    let p = &curve.points;
    let n = p.len() - 1;
    let adjacent = |i: usize, j: usize| {
        let (i, j) = (i.min(j), i.max(j));
        j == i + 1 || (curve.closed && i == 0 && j == n - 1)
    };
    let dir = Vec2::new(0.5f64.cos(), 0.5f64.sin());
    let (u, v): (Vec<f64>, Vec<f64>) = p.iter().map(|q| (q.dot(dir), q.cross(dir))).unzip();
    let mut order: Vec<usize> = (0..n).collect();
    let lo = |i: usize| u[i].min(u[i + 1]);
    let hi = |i: usize| u[i].max(u[i + 1]);
    order.sort_by(|&i, &j| lo(i).total_cmp(&lo(j)).then(i.cmp(&j)));
    let mut active: Vec<usize> = Vec::new();
    for &i in &order {
        let x = lo(i);
        active.retain(|&j| hi(j) >= x);
        let (vlo_i, vhi_i) = (v[i].min(v[i + 1]), v[i].max(v[i + 1]));
        for &j in &active {
            if adjacent(i, j) {
                continue;
            }
            let (vlo_j, vhi_j) = (v[j].min(v[j + 1]), v[j].max(v[j + 1]));
            if vhi_i < vlo_j || vhi_j < vlo_i {
                continue;
            }
            if segments_touch(p[i], p[i + 1], p[j], p[j + 1]) {
                return Some((i.min(j), i.max(j)));
            }
        }
        active.push(i);
    }
    None
}

pub fn is_simple(curve: &Polyline) -> bool {
    find_self_intersection(curve).is_none()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    fn v(x: f64, y: f64) -> Vec2 {
        Vec2::new(x, y)
    }

    fn rectangle() -> Polyline {
        Polyline::closed(vec![v(0.0, 1.0), v(4.0, 1.0), v(4.0, 2.0), v(0.0, 2.0), v(0.0, 1.0)]).unwrap()
    }

    #[test]
    fn speed_examples() {
        assert_eq!(finsler_speed(&ConvexBody::disk(1.0), v(0.0, 2.0), v(2.0, 0.0)).unwrap(), 1.0);
        assert_eq!(finsler_speed(&ConvexBody::square(1.0), v(5.0, 1.0), v(2.0, 1.0)).unwrap(), 2.0);
        assert_eq!(finsler_speed(&ConvexBody::disk(1.0), v(0.0, 2.0), Vec2::ZERO).unwrap(), 0.0);
        assert!(matches!(
            finsler_speed(&ConvexBody::disk(1.0), v(0.0, 0.0), v(1.0, 0.0)),
            Err(Error::NonpositiveY(_))
        ));
    }

    #[test]
    fn length_examples() {
        let disk = ConvexBody::disk(1.0);
        let seg = Polyline::open(vec![v(0.0, 1.0), v(0.0, E)]).unwrap();
        assert!((curve_length(&disk, &seg) - 1.0).abs() < 1e-15);
        assert!((curve_length(&disk, &seg.reversed()) - 1.0).abs() < 1e-15);
        let sq = ConvexBody::square(1.0);
        let seg = Polyline::open(vec![v(0.0, 1.0), v(3.0, 1.0)]).unwrap();
        assert_eq!(curve_length(&sq, &seg), 3.0);
        assert_eq!(curve_length(&sq, &seg.reversed()), 3.0);
    }

    #[test]
    fn rectangle_area() {
        let r = rectangle();
        assert!((green_area(&r).unwrap() - 2.0).abs() < 1e-15);
        assert!((green_area(&r.reversed()).unwrap() + 2.0).abs() < 1e-15);
        let back = Polyline::closed(vec![v(0.0, 1.0), v(1.0, 2.0), v(0.0, 1.0)]);
        // fewer than three distinct points
        assert!(back.is_err());
        let back = Polyline::closed(vec![v(0.0, 1.0), v(1.0, 2.0), v(2.0, 3.0), v(1.0, 2.0), v(0.0, 1.0)]).unwrap();
        assert!(green_area(&back).unwrap().abs() < 1e-15);
        assert!(green_area(&Polyline::open(vec![v(0.0, 1.0), v(1.0, 1.0)]).unwrap()).is_err());
    }

    #[test]
    fn near_horizontal_segments_use_series() {
        // y changes by 1e-10 relative; compare with the exact mean of 1/y
        let y1: f64 = 3.0;
        let y2 = 3.0 * (1.0 + 1e-10);
        let exact = (y2 / y1).ln() / (y2 - y1);
        assert!((inverse_y_mean(y1, y2) - exact).abs() < 1e-6 * exact);
        assert!((inverse_y_mean(y1, y2) - 1.0 / 3.0).abs() < 1e-10);
    }

    #[test]
    fn refinement_and_translation_invariance() {
        let body = ConvexBody::polygon(&[v(1.5, -0.3), v(0.4, 1.0), v(-1.0, 0.2), v(-0.2, -1.1)]).unwrap();
        let r = rectangle();
        let mut fine = Vec::new();
        for w in r.points().windows(2) {
            for k in 0..7 {
                fine.push(w[0] + (w[1] - w[0]) * (k as f64 / 7.0));
            }
        }
        fine.push(r.points()[0]);
        let fine = Polyline::closed(fine).unwrap();
        assert!((curve_length(&body, &fine) - curve_length(&body, &r)).abs() < 1e-12);
        assert!((green_area(&fine).unwrap() - 2.0).abs() < 1e-12);
        let g = HyperbolicPoint::new(-2.0, 3.5).unwrap();
        let t = r.translated(g);
        assert!((green_area(&t).unwrap() - 2.0).abs() < 1e-12);
        assert!((curve_length(&body, &t) - curve_length(&body, &r)).abs() < 1e-12);
    }

    #[test]
    fn simplicity() {
        assert!(is_simple(&rectangle()));
        let bow = Polyline::closed(vec![v(0.0, 1.0), v(1.0, 2.0), v(1.0, 1.0), v(0.0, 2.0), v(0.0, 1.0)]).unwrap();
        assert_eq!(find_self_intersection(&bow), Some((0, 2)));
    }

    #[test]
    fn csv_round_trip() {
        let r = rectangle();
        let mut buf = Vec::new();
        r.write_csv(&ConvexBody::disk(1.0), &mut buf).unwrap();
        let back = Polyline::read_csv(&buf[..]).unwrap();
        assert_eq!(back, r);
        let no_t = "x,y\n0,1\n1,1\n";
        let open = Polyline::read_csv(no_t.as_bytes()).unwrap();
        assert!(!open.is_closed());
    }
}
