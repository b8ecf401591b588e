//! Planar primitives: points, rays, boundary pieces (circular arcs and
//! segments), the tangent discs `D_beta(s)` and the predicates built on them.

use std::f64::consts::{PI, TAU};
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

/// Minimum forward advance of a ray before a hit counts.
pub const DEFAULT_T_MIN: f64 = 1e-9;
/// Hits with `|cos(incidence)|` below this are grazing.
pub const DEFAULT_GRAZING_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

/// Vectors and points share one representation.
pub type Vec2 = Point2;

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn from_angle(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Self::new(c, s)
    }

    pub fn dot(self, o: Self) -> f64 {
        self.x * o.x + self.y * o.y
    }

    /// z-component of the 3D cross product.
    pub fn cross(self, o: Self) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn dist(self, o: Self) -> f64 {
        (self - o).norm()
    }

    pub fn normalized(self) -> Self {
        let n = self.norm();
        Self::new(self.x / n, self.y / n)
    }

    /// Rotation by +90 degrees.
    pub fn perp_ccw(self) -> Self {
        Self::new(-self.y, self.x)
    }

    /// Rotation by -90 degrees.
    pub fn perp_cw(self) -> Self {
        Self::new(self.y, -self.x)
    }

    pub fn rotated(self, theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Self::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    /// Mirror image across the line through `p` with unit direction `dir`.
    pub fn reflect_across_line(self, p: Self, dir: Self) -> Self {
        let w = self - p;
        let along = dir * w.dot(dir);
        p + along * 2.0 - w
    }
}

impl Add for Point2 {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point2 {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point2 {
    type Output = Self;
    fn mul(self, k: f64) -> Self {
        Self::new(self.x * k, self.y * k)
    }
}

impl Neg for Point2 {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ray {
    pub origin: Point2,
    pub direction: Vec2,
}

impl Ray {
    /// Normalizes `direction`.
    pub fn new(origin: Point2, direction: Vec2) -> Self {
        Self {
            origin,
            direction: direction.normalized(),
        }
    }

    pub fn at(&self, t: f64) -> Point2 {
        self.origin + self.direction * t
    }
}

/// Map an angle into `[0, 2pi)`.
pub fn wrap_tau(theta: f64) -> f64 {
    let r = theta.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Circular arc `center + radius * (cos t, sin t)` for `t` running from
/// `start_angle` over the signed `sweep`.
///
/// Traversed with the table on the left, a positive sweep has the table
/// inside the circle (focusing) and a negative sweep has it outside
/// (dispersing), so the curvature sign is the sign of the sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArcPiece {
    pub center: Point2,
    pub radius: f64,
    pub start_angle: f64,
    pub sweep: f64,
}

impl ArcPiece {
    pub fn sign(&self) -> f64 {
        self.sweep.signum()
    }

    /// Signed curvature: positive focusing, negative dispersing.
    pub fn curvature(&self) -> f64 {
        self.sign() / self.radius
    }

    pub fn length(&self) -> f64 {
        self.radius * self.sweep.abs()
    }

    pub fn angle_at(&self, u: f64) -> f64 {
        self.start_angle + self.sign() * u / self.radius
    }

    pub fn start(&self) -> Point2 {
        self.point_at(0.0)
    }

    pub fn end(&self) -> Point2 {
        self.center + Point2::from_angle(self.start_angle + self.sweep) * self.radius
    }

    pub fn point_at(&self, u: f64) -> Point2 {
        self.center + Point2::from_angle(self.angle_at(u)) * self.radius
    }

    pub fn tangent_at(&self, u: f64) -> Vec2 {
        Point2::from_angle(self.angle_at(u)).perp_ccw() * self.sign()
    }

    pub fn inner_normal_at(&self, u: f64) -> Vec2 {
        -(Point2::from_angle(self.angle_at(u)) * self.sign())
    }

    /// Local arclength of the angular position of `p`, if it falls within
    /// the arc up to `ang_tol` radians.
    pub fn param_of(&self, p: Point2, ang_tol: f64) -> Option<f64> {
        let phi = (p - self.center).angle();
        let delta = if self.sweep > 0.0 {
            wrap_tau(phi - self.start_angle)
        } else {
            wrap_tau(self.start_angle - phi)
        };
        let span = self.sweep.abs();
        if delta <= span + ang_tol {
            Some(delta.min(span) * self.radius)
        } else if delta >= TAU - ang_tol {
            Some(0.0)
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SegmentPiece {
    pub a: Point2,
    pub b: Point2,
}

impl SegmentPiece {
    pub fn new(a: Point2, b: Point2) -> Self {
        Self { a, b }
    }

    pub fn length(&self) -> f64 {
        self.a.dist(self.b)
    }

    pub fn direction(&self) -> Vec2 {
        (self.b - self.a).normalized()
    }

    pub fn point_at(&self, u: f64) -> Point2 {
        let len = self.length();
        self.a + (self.b - self.a) * (u / len)
    }

    pub fn inner_normal(&self) -> Vec2 {
        self.direction().perp_ccw()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Shape {
    Arc(ArcPiece),
    Segment(SegmentPiece),
}

/// One intersection of a ray with a piece.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayHit {
    pub t: f64,
    pub point: Point2,
    /// Local arclength of the hit on the piece.
    pub u: f64,
    /// Cosine between the ray direction and the piece's inner normal.
    /// Negative when the ray arrives from the table side.
    pub cos_normal: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntersectConfig {
    pub t_min: f64,
    pub grazing_tol: f64,
}

impl Default for IntersectConfig {
    fn default() -> Self {
        Self {
            t_min: DEFAULT_T_MIN,
            grazing_tol: DEFAULT_GRAZING_TOL,
        }
    }
}

/// Intersections sorted by `t`; grazing ones are split off.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PieceHits {
    pub hits: Vec<RayHit>,
    pub grazing: Vec<RayHit>,
}

impl Shape {
    pub fn length(&self) -> f64 {
        match self {
            Shape::Arc(a) => a.length(),
            Shape::Segment(s) => s.length(),
        }
    }

    pub fn curvature(&self) -> f64 {
        match self {
            Shape::Arc(a) => a.curvature(),
            Shape::Segment(_) => 0.0,
        }
    }

    pub fn start(&self) -> Point2 {
        match self {
            Shape::Arc(a) => a.start(),
            Shape::Segment(s) => s.a,
        }
    }

    pub fn end(&self) -> Point2 {
        match self {
            Shape::Arc(a) => a.end(),
            Shape::Segment(s) => s.b,
        }
    }

    pub fn point_at(&self, u: f64) -> Point2 {
        match self {
            Shape::Arc(a) => a.point_at(u),
            Shape::Segment(s) => s.point_at(u),
        }
    }

    pub fn tangent_at(&self, u: f64) -> Vec2 {
        match self {
            Shape::Arc(a) => a.tangent_at(u),
            Shape::Segment(s) => s.direction(),
        }
    }

    pub fn inner_normal_at(&self, u: f64) -> Vec2 {
        match self {
            Shape::Arc(a) => a.inner_normal_at(u),
            Shape::Segment(s) => s.inner_normal(),
        }
    }

    /// Distance from `p` to the underlying locus (full circle or full line
    /// segment).
    pub fn locus_distance(&self, p: Point2) -> f64 {
        match self {
            Shape::Arc(a) => (p.dist(a.center) - a.radius).abs(),
            Shape::Segment(s) => {
                let d = s.b - s.a;
                let w = (p - s.a).dot(d) / d.norm_sq();
                let q = s.a + d * w.clamp(0.0, 1.0);
                p.dist(q)
            }
        }
    }

    /// Axis-aligned bounding box `(min, max)`.
    pub fn bbox(&self) -> (Point2, Point2) {
        match self {
            Shape::Segment(s) => (
                Point2::new(s.a.x.min(s.b.x), s.a.y.min(s.b.y)),
                Point2::new(s.a.x.max(s.b.x), s.a.y.max(s.b.y)),
            ),
            Shape::Arc(a) => {
                let mut pts = vec![a.start(), a.end()];
                pts.extend(arc_extremes(a));
                bbox_of(&pts)
            }
        }
    }

    pub fn intersect_ray(&self, ray: &Ray, cfg: &IntersectConfig) -> PieceHits {
        let mut raw = match self {
            Shape::Segment(s) => intersect_segment(ray, s),
            Shape::Arc(a) => intersect_arc(ray, a),
        };
        raw.retain(|h| h.t > cfg.t_min);
        raw.sort_by(|a, b| a.t.total_cmp(&b.t));
        let (grazing, hits) = raw
            .into_iter()
            .partition(|h| h.cos_normal.abs() < cfg.grazing_tol);
        PieceHits { hits, grazing }
    }
}

/// Points of the arc where the coordinate functions are extremal.
pub fn arc_extremes(a: &ArcPiece) -> Vec<Point2> {
    (0..4)
        .filter_map(|q| {
            let theta = q as f64 * PI / 2.0;
            let p = a.center + Point2::from_angle(theta) * a.radius;
            a.param_of(p, 0.0).map(|u| a.point_at(u))
        })
        .collect()
}

pub fn bbox_of(pts: &[Point2]) -> (Point2, Point2) {
    let mut lo = Point2::new(f64::INFINITY, f64::INFINITY);
    let mut hi = Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in pts {
        lo.x = lo.x.min(p.x);
        lo.y = lo.y.min(p.y);
        hi.x = hi.x.max(p.x);
        hi.y = hi.y.max(p.y);
    }
    (lo, hi)
}

fn intersect_segment(ray: &Ray, s: &SegmentPiece) -> Vec<RayHit> {
    let e = s.b - s.a;
    let denom = ray.direction.cross(e);
    if denom == 0.0 {
        return Vec::new();
    }
    let w = s.a - ray.origin;
    let t = w.cross(e) / denom;
    let v = w.cross(ray.direction) / denom;
    if !(0.0..=1.0).contains(&v) {
        return Vec::new();
    }
    let len = e.norm();
    let n = e.perp_ccw() * (1.0 / len);
    vec![RayHit {
        t,
        point: ray.at(t),
        u: v * len,
        cos_normal: ray.direction.dot(n),
    }]
}

fn intersect_arc(ray: &Ray, a: &ArcPiece) -> Vec<RayHit> {
    let w = ray.origin - a.center;
    let b = w.dot(ray.direction);
    let c = w.norm_sq() - a.radius * a.radius;
    let disc = b * b - c;
    if disc < 0.0 {
        return Vec::new();
    }
    let sq = disc.sqrt();
    // Cancellation-free pair of roots.
    let q = -b - b.signum() * sq;
    let roots = if q == 0.0 {
        [-b, -b]
    } else {
        let r1 = q;
        let r2 = c / q;
        if r1 <= r2 {
            [r1, r2]
        } else {
            [r2, r1]
        }
    };
    let count = if sq == 0.0 { 1 } else { 2 };
    let ang_tol = 1e-12;
    roots[..count]
        .iter()
        .filter_map(|&t| {
            let p = ray.at(t);
            let u = a.param_of(p, ang_tol)?;
            let n = a.inner_normal_at(u);
            Some(RayHit {
                t,
                point: p,
                u,
                cos_normal: ray.direction.dot(n),
            })
        })
        .collect()
}

/// All forward intersections of `ray` with `shape`, sorted, grazing
/// intersections removed.
pub fn ray_intersect_piece(ray: &Ray, shape: &Shape, cfg: &IntersectConfig) -> Vec<(f64, Point2)> {
    shape
        .intersect_ray(ray, cfg)
        .hits
        .into_iter()
        .map(|h| (h.t, h.point))
        .collect()
}

/// An extended real label for the tangent discs, with the two signed zeros
/// kept apart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Beta {
    Finite(f64),
    ZeroPlus,
    ZeroMinus,
}

impl Beta {
    pub fn value(self) -> f64 {
        match self {
            Beta::Finite(b) => b,
            Beta::ZeroPlus => 0.0,
            Beta::ZeroMinus => -0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum RegionKind {
    Disc { center: Point2, radius: f64 },
    /// Closed halfplane `{p : (p - base) . normal >= 0}`.
    InternalHalfplane { normal: Vec2 },
    /// Closed halfplane `{p : (p - base) . normal <= 0}`.
    ExternalHalfplane { normal: Vec2 },
}

/// `D_beta(s)`: disc of radius `1/|beta k(s)|` tangent to the boundary at
/// `base`, on the table side for positive beta; tangent halfplanes for the
/// signed zeros.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscRegion {
    pub kind: RegionKind,
    pub base: Point2,
    pub beta: Beta,
}

impl DiscRegion {
    /// Build from the boundary data at one point: position, inner normal and
    /// signed curvature.
    pub fn from_boundary(
        base: Point2,
        inner_normal: Vec2,
        curvature: f64,
        beta: Beta,
    ) -> Result<Self, crate::Error> {
        let kind = match beta {
            Beta::ZeroPlus => RegionKind::InternalHalfplane {
                normal: inner_normal,
            },
            Beta::ZeroMinus => RegionKind::ExternalHalfplane {
                normal: inner_normal,
            },
            Beta::Finite(b) if b == 0.0 => {
                return Err(crate::Error::InvalidParameter(
                    "beta = 0 must be given as ZeroPlus or ZeroMinus".into(),
                ))
            }
            Beta::Finite(b) => {
                if curvature == 0.0 {
                    return Err(crate::Error::FlatPoint);
                }
                let radius = 1.0 / (b * curvature).abs();
                let center = base + inner_normal * (radius * b.signum());
                RegionKind::Disc { center, radius }
            }
        };
        Ok(Self { kind, base, beta })
    }

    /// Signed distance-like containment margin: positive inside.
    pub fn margin(&self, p: Point2) -> f64 {
        match self.kind {
            RegionKind::Disc { center, radius } => radius - p.dist(center),
            RegionKind::InternalHalfplane { normal } => (p - self.base).dot(normal),
            RegionKind::ExternalHalfplane { normal } => -(p - self.base).dot(normal),
        }
    }

    pub fn contains(&self, p: Point2, tol: f64) -> bool {
        self.margin(p) >= -tol
    }

    pub fn contains_segment(&self, seg: &SegmentPiece, tol: f64) -> bool {
        self.contains(seg.a, tol) && self.contains(seg.b, tol)
    }
}

/// Intersection of the line through `p` with direction `e` (unit) and the
/// closed disc; `None` when disjoint.
pub fn line_disc_intersection(
    p: Point2,
    e: Vec2,
    center: Point2,
    radius: f64,
) -> Option<SegmentPiece> {
    let w = p - center;
    let b = w.dot(e);
    let disc = b * b - (w.norm_sq() - radius * radius);
    if disc < 0.0 {
        return None;
    }
    let sq = disc.sqrt();
    Some(SegmentPiece::new(p + e * (-b - sq), p + e * (-b + sq)))
}

/// Chord cut by `D_{-2}(s1)` on the line through the boundary points
/// `p1` (dispersing) and `p2`.
///
/// `p1` lies on the boundary circle of the disc, so the chord always
/// contains it: one end is `p1` itself, the other the second intersection.
pub fn dispersing_chord(disc: &DiscRegion, p1: Point2, p2: Point2) -> SegmentPiece {
    let e = (p2 - p1).normalized();
    match disc.kind {
        RegionKind::Disc { center, .. } => {
            let t2 = -2.0 * e.dot(p1 - center);
            SegmentPiece::new(p1, p1 + e * t2)
        }
        _ => SegmentPiece::new(p1, p1),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn full_circle(c: Point2, r: f64) -> Shape {
        Shape::Arc(ArcPiece {
            center: c,
            radius: r,
            start_angle: 0.0,
            sweep: TAU - 1e-15,
        })
    }

    #[test]
    fn ray_hits_circle_twice() {
        let ray = Ray::new(Point2::new(0.0, 0.0), Point2::new(1.0, 0.0));
        let hits = ray_intersect_piece(
            &ray,
            &full_circle(Point2::new(2.0, 0.0), 1.0),
            &IntersectConfig::default(),
        );
        assert_eq!(hits.len(), 2);
        assert!((hits[0].0 - 1.0).abs() < 1e-14);
        assert!((hits[1].0 - 3.0).abs() < 1e-14);
    }

    #[test]
    fn ray_hits_segment() {
        let ray = Ray::new(Point2::new(0.0, 0.0), Point2::new(1.0, 0.0));
        let seg = Shape::Segment(SegmentPiece::new(
            Point2::new(2.0, -1.0),
            Point2::new(2.0, 1.0),
        ));
        let hits = ray_intersect_piece(&ray, &seg, &IntersectConfig::default());
        assert_eq!(hits.len(), 1);
        assert!((hits[0].0 - 2.0).abs() < 1e-15);
        assert!(hits[0].1.dist(Point2::new(2.0, 0.0)) < 1e-15);
    }

    #[test]
    fn tangent_ray_is_grazing() {
        let circle = full_circle(Point2::new(0.0, 1.0), 1.0);
        let cfg = IntersectConfig::default();
        // Exactly tangent: rejected from hits, reported as grazing.
        let ray = Ray::new(Point2::new(-3.0, 0.0), Point2::new(1.0, 0.0));
        let h = circle.intersect_ray(&ray, &cfg);
        assert!(h.hits.is_empty());
        assert!(!h.grazing.is_empty());
        // Secant with incidence cosine ~1e-6: accepted.
        let depth = 5e-13; // cos = sqrt(2 depth) ~ 1e-6
        let ray = Ray::new(Point2::new(-3.0, depth), Point2::new(1.0, 0.0));
        let h = circle.intersect_ray(&ray, &cfg);
        assert_eq!(h.hits.len(), 2);
        assert!(h.grazing.is_empty());
        // Secant with cosine below the tolerance: grazing.
        let ray = Ray::new(Point2::new(-3.0, 1e-20), Point2::new(1.0, 0.0));
        let h = circle.intersect_ray(&ray, &cfg);
        assert!(h.hits.is_empty());
    }

    #[test]
    fn t_min_skips_origin() {
        let seg = Shape::Segment(SegmentPiece::new(
            Point2::new(0.0, -1.0),
            Point2::new(0.0, 1.0),
        ));
        let ray = Ray::new(Point2::new(0.0, 0.0), Point2::new(1.0, 0.3));
        assert!(ray_intersect_piece(&ray, &seg, &IntersectConfig::default()).is_empty());
    }

    #[test]
    fn arc_respects_span() {
        // Upper half of unit circle, counterclockwise.
        let arc = Shape::Arc(ArcPiece {
            center: Point2::new(0.0, 0.0),
            radius: 1.0,
            start_angle: 0.0,
            sweep: PI,
        });
        let ray = Ray::new(Point2::new(0.0, -5.0), Point2::new(0.0, 1.0));
        let hits = arc.intersect_ray(&ray, &IntersectConfig::default()).hits;
        assert_eq!(hits.len(), 1);
        assert!((hits[0].t - 6.0).abs() < 1e-14);
        assert!((hits[0].u - PI / 2.0).abs() < 1e-14);
    }

    #[test]
    fn arc_frames_are_consistent() {
        for sweep in [1.0, -1.0] {
            let a = ArcPiece {
                center: Point2::new(0.3, -0.2),
                radius: 2.0,
                start_angle: 0.4,
                sweep,
            };
            let u = 0.7;
            let t = a.tangent_at(u);
            let n = a.inner_normal_at(u);
            // Tangent is the inner normal turned clockwise.
            assert!(t.dist(n.perp_cw()) < 1e-15);
            // Finite-difference tangent.
            let fd = (a.point_at(u + 1e-7) - a.point_at(u - 1e-7)) * (1.0 / 2e-7);
            assert!(fd.dist(t) < 1e-7);
            let back = a.param_of(a.point_at(u), 1e-12).unwrap();
            assert!((back - u).abs() < 1e-12);
        }
    }

    #[test]
    fn disc_beta_two_radius() {
        let base = Point2::new(0.0, 0.0);
        let n = Point2::new(0.0, 1.0);
        let d = DiscRegion::from_boundary(base, n, 0.1, Beta::Finite(2.0)).unwrap();
        match d.kind {
            RegionKind::Disc { center, radius } => {
                assert!((radius - 5.0).abs() < 1e-14);
                assert!(center.dist(Point2::new(0.0, 5.0)) < 1e-14);
            }
            _ => panic!("expected disc"),
        }
        let e = DiscRegion::from_boundary(base, n, -1.0, Beta::Finite(-4.0)).unwrap();
        match e.kind {
            RegionKind::Disc { center, radius } => {
                assert!((radius - 0.25).abs() < 1e-15);
                assert!(center.dist(Point2::new(0.0, -0.25)) < 1e-15);
            }
            _ => panic!("expected disc"),
        }
        let hp = DiscRegion::from_boundary(base, n, 0.1, Beta::ZeroPlus).unwrap();
        assert!(hp.contains(Point2::new(7.0, 0.1), 0.0));
        assert!(!hp.contains(Point2::new(7.0, -0.1), 0.0));
        assert!(matches!(
            DiscRegion::from_boundary(base, n, 0.0, Beta::Finite(2.0)),
            Err(crate::Error::FlatPoint)
        ));
    }

    #[test]
    fn containment_tolerance() {
        let d = DiscRegion {
            kind: RegionKind::Disc {
                center: Point2::new(1.0, 1.0),
                radius: 2.0,
            },
            base: Point2::new(1.0, -1.0),
            beta: Beta::Finite(1.0),
        };
        assert!(d.contains(Point2::new(1.0, 1.0), 0.0));
        assert!(!d.contains(Point2::new(1.0 + 2.0 * (1.0 + 1e-6), 1.0), 0.0));
    }

    #[test]
    fn diameter_chord_and_disjoint_line() {
        let c = Point2::new(0.0, 0.0);
        let seg =
            line_disc_intersection(Point2::new(-3.0, 0.0), Point2::new(1.0, 0.0), c, 0.5).unwrap();
        assert!((seg.length() - 1.0).abs() < 1e-15);
        assert!(
            line_disc_intersection(Point2::new(-3.0, 2.0), Point2::new(1.0, 0.0), c, 0.5)
                .is_none()
        );
    }

    #[test]
    fn chord_through_center_is_diameter() {
        // Dispersing point at the origin, inner normal +y, k = -1:
        // D_{-2} has radius 1/2 and center (0, -1/2).
        let d = DiscRegion::from_boundary(
            Point2::new(0.0, 0.0),
            Point2::new(0.0, 1.0),
            -1.0,
            Beta::Finite(-2.0),
        )
        .unwrap();
        let chord = dispersing_chord(&d, Point2::new(0.0, 0.0), Point2::new(0.0, 3.0));
        assert!((chord.length() - 1.0).abs() < 1e-15);
    }
}
