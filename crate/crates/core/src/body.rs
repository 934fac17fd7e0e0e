//! Planar convex bodies with the origin in their interior: convex polygons
//! and `l_p` balls, together with their gauge, support function, polar dual,
//! Euclidean area and horizontal extents.
//!
//! The balls with `p = 1` and `p = ∞` are always stored as polygons (diamond
//! and square), so a [`PBall`] value has `1 < p < ∞`.

use std::f64::consts::PI;
use std::fmt;

use serde_json::Value;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::geom::Vec2;

/// Relative tolerance below which consecutive edges are treated as collinear.
const COLLINEAR_TOL: f64 = 1e-12;

/// Convex polygon in canonical form: counterclockwise, no repeated or
/// collinear vertices, starting at the lexicographically least vertex.
#[derive(Clone, Debug, PartialEq)]
pub struct Polygon {
    vertices: Vec<Vec2>,
    /// `edge_duals[i]` is the polar vertex `n / c` of the edge
    /// `vertices[i] -> vertices[i + 1]` with outward line `<n, x> = c`.
    edge_duals: Vec<Vec2>,
}

/// The ball `{ |x/r|^p + |y/r|^p <= 1 }` with `1 < p < ∞`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PBall {
    p: f64,
    scale: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ConvexBody {
    Polygon(Polygon),
    PBall(PBall),
}

/// Horizontal extents of a body: `m_plus = max x`, `m_minus = -min x`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Extents {
    pub m_plus: f64,
    pub m_minus: f64,
}

/// The face of a body exposed by a direction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Face {
    Point(Vec2),
    /// Counterclockwise edge `a -> b`.
    Edge(Vec2, Vec2),
}

impl Face {
    pub fn midpoint(&self) -> Vec2 {
        match *self {
            Face::Point(p) => p,
            Face::Edge(a, b) => (a + b) * 0.5,
        }
    }
}

impl Polygon {
    /// Validates and canonicalizes a vertex list. Either orientation is
    /// accepted.
    pub fn new(points: &[Vec2]) -> Result<Self> {
        if points.len() < 3 {
            return Err(Error::DegenerateInput(format!(
                "a polygon needs at least 3 vertices, got {}",
                points.len()
            )));
        }
        if let Some(p) = points.iter().find(|p| !p.is_finite()) {
            return Err(Error::DegenerateInput(format!("non-finite vertex {p:?}")));
        }
        let scale = points.iter().map(|p| p.norm()).fold(0.0, f64::max);
        let mut v: Vec<Vec2> = Vec::with_capacity(points.len());
        for &p in points {
            if v.last().is_none_or(|q: &Vec2| q.dist(p) > 1e-14 * scale) {
                v.push(p);
            }
        }
        while v.len() > 1 && v[0].dist(v[v.len() - 1]) <= 1e-14 * scale {
            v.pop();
        }
        if v.len() < 3 {
            return Err(Error::DegenerateInput("fewer than 3 distinct vertices".into()));
        }
        let area2 = shoelace2(&v);
        if area2.abs() <= 1e-14 * scale * scale {
            return Err(Error::DegenerateInput("polygon has zero area".into()));
        }
        if area2 < 0.0 {
            v.reverse();
        }
        // merge collinear vertices until none remain
        loop {
            let n = v.len();
            if n < 3 {
                return Err(Error::DegenerateInput("polygon collapses to a segment".into()));
            }
            let drop = (0..n).find(|&i| {
                let prev = v[(i + n - 1) % n];
                let cur = v[i];
                let next = v[(i + 1) % n];
                let e1 = cur - prev;
                let e2 = next - cur;
                e1.cross(e2).abs() <= COLLINEAR_TOL * e1.norm() * e2.norm() && e1.dot(e2) > 0.0
            });
            match drop {
                Some(i) => {
                    v.remove(i);
                }
                None => break,
            }
        }
        let n = v.len();
        let mut turning = 0.0;
        for i in 0..n {
            let e1 = v[(i + 1) % n] - v[i];
            let e2 = v[(i + 2) % n] - v[(i + 1) % n];
            let c = e1.cross(e2);
            if c <= COLLINEAR_TOL * e1.norm() * e2.norm() {
                return Err(Error::NotConvex);
            }
            turning += c.atan2(e1.dot(e2));
        }
        if (turning - 2.0 * PI).abs() > 1e-9 {
            return Err(Error::NotConvex);
        }
        for i in 0..n {
            let a = v[i];
            let b = v[(i + 1) % n];
            // distance from the origin to the edge's supporting line
            if a.cross(b) / (b - a).norm() <= 1e-12 * scale {
                return Err(Error::OriginNotInterior);
            }
        }
        let start = (0..n)
            .min_by(|&i, &j| v[i].x.total_cmp(&v[j].x).then(v[i].y.total_cmp(&v[j].y)))
            .unwrap_or(0);
        v.rotate_left(start);
        let edge_duals = (0..n)
            .map(|i| {
                let a = v[i];
                let b = v[(i + 1) % n];
                let normal = Vec2::new(b.y - a.y, a.x - b.x);
                normal / a.cross(b)
            })
            .collect();
        Ok(Self {
            vertices: v,
            edge_duals,
        })
    }

    pub fn vertices(&self) -> &[Vec2] {
        &self.vertices
    }

    /// Polar vertices indexed by edge.
    pub fn edge_duals(&self) -> &[Vec2] {
        &self.edge_duals
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn scaled(&self, s: f64) -> Result<Self> {
        let pts: Vec<Vec2> = self.vertices.iter().map(|&p| p * s).collect();
        Self::new(&pts)
    }
}

fn shoelace2(v: &[Vec2]) -> f64 {
    let n = v.len();
    (0..n).map(|i| v[i].cross(v[(i + 1) % n])).sum()
}

/// Conjugate exponent `p / (p - 1)` for `1 < p < ∞`.
pub fn conjugate_exponent(p: f64) -> f64 {
    p / (p - 1.0)
}

/// `(|x|^p + |y|^p)^(1/p)` without overflow.
pub fn lp_norm(v: Vec2, p: f64) -> f64 {
    let (a, b) = (v.x.abs(), v.y.abs());
    let m = a.max(b);
    if m == 0.0 {
        return 0.0;
    }
    let r = a.min(b) / m;
    m * (1.0 + r.powf(p)).powf(1.0 / p)
}

impl PBall {
    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        conjugate_exponent(self.p)
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Point of the boundary maximizing `<., w>`.
    pub fn support_point(&self, w: Vec2) -> Vec2 {
        let q = self.q();
        let nq = lp_norm(w, q);
        let comp = |c: f64| self.scale * c.signum() * (c.abs() / nq).powf(q - 1.0);
        Vec2::new(comp(w.x), comp(w.y))
    }
}

impl ConvexBody {
    pub fn polygon(points: &[Vec2]) -> Result<Self> {
        Polygon::new(points).map(ConvexBody::Polygon)
    }

    /// `p = 1` and `p = ∞` yield the diamond and square polygons.
    pub fn pball(p: f64, scale: f64) -> Result<Self> {
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::InvalidPBall(format!("scale must be positive, got {scale}")));
        }
        if p.is_nan() || p < 1.0 {
            return Err(Error::InvalidPBall(format!("exponent must be >= 1, got {p}")));
        }
        if p == 1.0 {
            Ok(Self::diamond(scale))
        } else if p.is_infinite() {
            Ok(Self::square(scale))
        } else {
            Ok(ConvexBody::PBall(PBall { p, scale }))
        }
    }

    pub fn square(scale: f64) -> Self {
        let s = scale;
        Self::polygon(&[
            Vec2::new(s, s),
            Vec2::new(-s, s),
            Vec2::new(-s, -s),
            Vec2::new(s, -s),
        ])
        .expect("square is a valid polygon")
    }

    pub fn diamond(scale: f64) -> Self {
        let s = scale;
        Self::polygon(&[
            Vec2::new(s, 0.0),
            Vec2::new(0.0, s),
            Vec2::new(-s, 0.0),
            Vec2::new(0.0, -s),
        ])
        .expect("diamond is a valid polygon")
    }

    pub fn disk(radius: f64) -> Self {
        Self::pball(2.0, radius).expect("valid disk")
    }

    /// Minkowski functional. For polygons: `max_w <v, w>` over polar vertices.
    pub fn gauge(&self, v: Vec2) -> f64 {
        match self {
            ConvexBody::Polygon(poly) => poly
                .edge_duals
                .iter()
                .map(|w| v.dot(*w))
                .fold(f64::NEG_INFINITY, f64::max)
                .max(0.0),
            ConvexBody::PBall(b) => lp_norm(v, b.p) / b.scale,
        }
    }

    /// Support function `h(v) = max_{x in body} <x, v>`.
    pub fn support(&self, v: Vec2) -> f64 {
        match self {
            ConvexBody::Polygon(poly) => poly
                .vertices
                .iter()
                .map(|x| v.dot(*x))
                .fold(f64::NEG_INFINITY, f64::max),
            ConvexBody::PBall(b) => b.scale * lp_norm(v, b.q()),
        }
    }

    /// Face exposed by direction `w` (nonzero).
    pub fn support_face(&self, w: Vec2) -> Face {
        match self {
            ConvexBody::Polygon(poly) => {
                let v = &poly.vertices;
                let n = v.len();
                let vals: Vec<f64> = v.iter().map(|x| x.dot(w)).collect();
                let best = (0..n).max_by(|&i, &j| vals[i].total_cmp(&vals[j])).unwrap_or(0);
                let tol = 1e-12 * w.norm() * v[best].norm().max(1.0);
                let next = (best + 1) % n;
                let prev = (best + n - 1) % n;
                if vals[best] - vals[next] <= tol {
                    Face::Edge(v[best], v[next])
                } else if vals[best] - vals[prev] <= tol {
                    Face::Edge(v[prev], v[best])
                } else {
                    Face::Point(v[best])
                }
            }
            ConvexBody::PBall(b) => Face::Point(b.support_point(w)),
        }
    }

    pub fn polar(&self) -> ConvexBody {
        match self {
            ConvexBody::Polygon(poly) => ConvexBody::Polygon(
                Polygon::new(&poly.edge_duals).expect("polar of a valid polygon is valid"),
            ),
            ConvexBody::PBall(b) => ConvexBody::PBall(PBall {
                p: b.q(),
                scale: 1.0 / b.scale,
            }),
        }
    }

    pub fn euclid_area(&self) -> f64 {
        match self {
            ConvexBody::Polygon(poly) => 0.5 * shoelace2(&poly.vertices),
            ConvexBody::PBall(b) => {
                let lg = 2.0 * ln_gamma(1.0 + 1.0 / b.p) - ln_gamma(1.0 + 2.0 / b.p);
                4.0 * b.scale * b.scale * lg.exp()
            }
        }
    }

    pub fn x_extents(&self) -> Extents {
        match self {
            ConvexBody::Polygon(poly) => {
                let max = poly.vertices.iter().map(|p| p.x).fold(f64::NEG_INFINITY, f64::max);
                let min = poly.vertices.iter().map(|p| p.x).fold(f64::INFINITY, f64::min);
                Extents {
                    m_plus: max,
                    m_minus: -min,
                }
            }
            ConvexBody::PBall(b) => Extents {
                m_plus: b.scale,
                m_minus: b.scale,
            },
        }
    }

    pub fn is_centrally_symmetric(&self) -> bool {
        match self {
            ConvexBody::PBall(_) => true,
            ConvexBody::Polygon(poly) => {
                let v = &poly.vertices;
                let n = v.len();
                if n % 2 != 0 {
                    return false;
                }
                let scale = v.iter().map(|p| p.norm()).fold(0.0, f64::max);
                (0..n / 2).all(|i| (v[i] + v[i + n / 2]).norm() <= 1e-12 * scale)
            }
        }
    }

    /// Spec JSON value describing this body.
    pub fn to_spec_json(&self) -> Value {
        match self {
            ConvexBody::Polygon(poly) => serde_json::json!({
                "type": "polygon",
                "vertices": poly.vertices.iter().map(|p| [p.x, p.y]).collect::<Vec<_>>(),
            }),
            ConvexBody::PBall(b) => serde_json::json!({
                "type": "pball",
                "p": if b.p.is_infinite() { Value::from("inf") } else { Value::from(b.p) },
                "scale": b.scale,
            }),
        }
    }

    /// Parses a body specification:
    /// `{"type":"polygon","vertices":[[x,y],...]}` or
    /// `{"type":"pball","p":number|"inf","scale":number}`.
    pub fn from_spec_str(text: &str) -> Result<Self> {
        let value: Value = serde_json::from_str(text).map_err(|e| Error::Spec {
            path: format!("line {}, column {}", e.line(), e.column()),
            message: e.to_string(),
        })?;
        Self::from_spec_value(&value)
    }

    pub fn from_spec_value(value: &Value) -> Result<Self> {
        let spec_err = |path: &str, message: &str| Error::Spec {
            path: path.to_string(),
            message: message.to_string(),
        };
        let obj = value
            .as_object()
            .ok_or_else(|| spec_err("$", "expected a JSON object"))?;
        let kind = obj
            .get("type")
            .ok_or_else(|| spec_err("$.type", "missing field"))?
            .as_str()
            .ok_or_else(|| spec_err("$.type", "expected a string"))?;
        match kind {
            "polygon" => {
                let verts = obj
                    .get("vertices")
                    .ok_or_else(|| spec_err("$.vertices", "missing field"))?
                    .as_array()
                    .ok_or_else(|| spec_err("$.vertices", "expected an array"))?;
                let mut pts = Vec::with_capacity(verts.len());
                for (i, v) in verts.iter().enumerate() {
                    let path = format!("$.vertices[{i}]");
                    let pair = v
                        .as_array()
                        .filter(|a| a.len() == 2)
                        .ok_or_else(|| spec_err(&path, "expected [x, y]"))?;
                    let x = pair[0]
                        .as_f64()
                        .ok_or_else(|| spec_err(&format!("{path}[0]"), "expected a number"))?;
                    let y = pair[1]
                        .as_f64()
                        .ok_or_else(|| spec_err(&format!("{path}[1]"), "expected a number"))?;
                    pts.push(Vec2::new(x, y));
                }
                Self::polygon(&pts).map_err(|e| spec_err("$.vertices", &e.to_string()))
            }
            "pball" => {
                let p = match obj.get("p") {
                    None => return Err(spec_err("$.p", "missing field")),
                    Some(Value::String(s)) if s.eq_ignore_ascii_case("inf") => f64::INFINITY,
                    Some(v) => v
                        .as_f64()
                        .ok_or_else(|| spec_err("$.p", "expected a number or \"inf\""))?,
                };
                let scale = match obj.get("scale") {
                    None => 1.0,
                    Some(v) => v.as_f64().ok_or_else(|| spec_err("$.scale", "expected a number"))?,
                };
                Self::pball(p, scale).map_err(|e| {
                    let path = if scale > 0.0 { "$.p" } else { "$.scale" };
                    spec_err(path, &e.to_string())
                })
            }
            other => Err(spec_err("$.type", &format!("unknown body type {other:?}"))),
        }
    }
}

impl fmt::Display for ConvexBody {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConvexBody::Polygon(poly) => {
                write!(f, "polygon[")?;
                for (i, v) in poly.vertices.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "({}, {})", v.x, v.y)?;
                }
                write!(f, "]")
            }
            ConvexBody::PBall(b) => write!(f, "pball(p = {}, scale = {})", b.p, b.scale),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: f64, y: f64) -> Vec2 {
        Vec2::new(x, y)
    }

    #[test]
    fn accepts_diamond_and_square() {
        let d = ConvexBody::polygon(&[v(1., 0.), v(0., 1.), v(-1., 0.), v(0., -1.)]).unwrap();
        assert_eq!(d, ConvexBody::diamond(1.0));
        let s = ConvexBody::polygon(&[v(1., 1.), v(-1., 1.), v(-1., -1.), v(1., -1.)]).unwrap();
        assert_eq!(s, ConvexBody::square(1.0));
        // canonical start: lexicographically least vertex
        let ConvexBody::Polygon(p) = s else { unreachable!() };
        assert_eq!(p.vertices()[0], v(-1., -1.));
    }

    #[test]
    fn rejects_origin_outside() {
        let r = ConvexBody::polygon(&[v(1., 0.), v(2., 0.), v(0., 1.)]);
        assert!(matches!(r, Err(Error::OriginNotInterior)));
    }

    #[test]
    fn rejects_nonconvex_and_degenerate() {
        let r = ConvexBody::polygon(&[v(1., 0.), v(0.1, 0.1), v(0., 1.), v(-1., 0.), v(0., -1.)]);
        assert!(matches!(r, Err(Error::NotConvex)));
        assert!(matches!(
            ConvexBody::polygon(&[v(1., 0.), v(0., 1.)]),
            Err(Error::DegenerateInput(_))
        ));
        // doubly wound pentagram: every turn is left but total turning is 4π
        let star: Vec<Vec2> = (0..5)
            .map(|k| {
                let a = 2.0 * PI * (2 * k) as f64 / 5.0;
                v(a.cos(), a.sin())
            })
            .collect();
        assert!(ConvexBody::polygon(&star).is_err());
    }

    #[test]
    fn merges_collinear_and_duplicates_and_reorients() {
        let r = ConvexBody::polygon(&[
            v(1., -1.),
            v(1., 0.),
            v(1., 1.),
            v(1., 1.),
            v(-1., 1.),
            v(-1., -1.),
        ])
        .unwrap();
        assert_eq!(r, ConvexBody::square(1.0));
        let cw = ConvexBody::polygon(&[v(1., -1.), v(-1., -1.), v(-1., 1.), v(1., 1.)]).unwrap();
        assert_eq!(cw, ConvexBody::square(1.0));
    }

    #[test]
    fn gauge_examples() {
        assert_eq!(ConvexBody::square(1.0).gauge(v(2., 1.)), 2.0);
        assert_eq!(ConvexBody::diamond(1.0).gauge(v(1., 1.)), 2.0);
        for b in [ConvexBody::square(1.0), ConvexBody::disk(1.0), ConvexBody::diamond(2.0)] {
            assert_eq!(b.gauge(Vec2::ZERO), 0.0);
        }
    }

    #[test]
    fn support_examples() {
        assert_eq!(ConvexBody::square(1.0).support(v(1., 0.)), 1.0);
        assert_eq!(ConvexBody::diamond(1.0).support(v(1., 1.)), 1.0);
        assert!((ConvexBody::disk(1.0).support(v(3., 4.)) - 5.0).abs() < 1e-15);
    }

    #[test]
    fn polar_examples() {
        assert_eq!(ConvexBody::square(1.0).polar(), ConvexBody::diamond(1.0));
        assert_eq!(ConvexBody::diamond(1.0).polar(), ConvexBody::square(1.0));
        assert_eq!(ConvexBody::disk(1.0).polar(), ConvexBody::disk(1.0));
        let b = ConvexBody::pball(3.0, 2.0).unwrap();
        let ConvexBody::PBall(pb) = b.polar() else { panic!() };
        assert!((pb.p() - 1.5).abs() < 1e-15 && (pb.scale() - 0.5).abs() < 1e-15);
        assert_eq!(b.polar().polar(), b);
    }

    #[test]
    fn area_examples() {
        assert_eq!(ConvexBody::square(1.0).euclid_area(), 4.0);
        assert_eq!(ConvexBody::diamond(1.0).euclid_area(), 2.0);
        assert!((ConvexBody::disk(1.0).euclid_area() - PI).abs() < 1e-13);
    }

    #[test]
    fn extents_examples() {
        assert_eq!(
            ConvexBody::square(1.0).x_extents(),
            Extents { m_plus: 1.0, m_minus: 1.0 }
        );
        let kite = ConvexBody::polygon(&[v(2., 0.), v(0., 1.), v(-1., 0.), v(0., -1.)]).unwrap();
        assert_eq!(kite.x_extents(), Extents { m_plus: 2.0, m_minus: 1.0 });
        assert_eq!(
            ConvexBody::disk(3.0).x_extents(),
            Extents { m_plus: 3.0, m_minus: 3.0 }
        );
    }

    #[test]
    fn support_face_detects_edges() {
        let sq = ConvexBody::square(1.0);
        assert_eq!(sq.support_face(v(1., 0.)), Face::Edge(v(1., -1.), v(1., 1.)));
        assert_eq!(sq.support_face(v(1., 0.5)), Face::Point(v(1., 1.)));
        let disk = ConvexBody::disk(1.0);
        let Face::Point(p) = disk.support_face(v(3., 4.)) else { panic!() };
        assert!((p - v(0.6, 0.8)).norm() < 1e-15);
    }

    #[test]
    fn spec_parsing() {
        let b = ConvexBody::from_spec_str(r#"{"type":"pball","p":"inf","scale":1}"#).unwrap();
        assert_eq!(b, ConvexBody::square(1.0));
        let b = ConvexBody::from_spec_str(r#"{"type":"polygon","vertices":[[1,0],[0,1],[-1,0],[0,-1]]}"#)
            .unwrap();
        assert_eq!(b, ConvexBody::diamond(1.0));
        let e = ConvexBody::from_spec_str(r#"{"type":"polygon","vertices":[[1,0],[0,"a"],[-1,0]]}"#)
            .unwrap_err();
        assert!(matches!(e, Error::Spec { ref path, .. } if path == "$.vertices[1][1]"), "{e}");
        let e = ConvexBody::from_spec_str("{\n\"type\": }").unwrap_err();
        assert!(matches!(e, Error::Spec { ref path, .. } if path.starts_with("line 2")), "{e}");
        let e = ConvexBody::from_spec_str(r#"{"type":"pball","p":0.5}"#).unwrap_err();
        assert!(matches!(e, Error::Spec { ref path, .. } if path == "$.p"));
        // round trip through the emitted spec
        let b = ConvexBody::pball(3.0, 0.5).unwrap();
        assert_eq!(ConvexBody::from_spec_value(&b.to_spec_json()).unwrap(), b);
    }
}
