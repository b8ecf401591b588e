//! Area, diameter and the self-intersection audit.

use std::collections::HashSet;

use crate::geometry::{ArcPiece, Point2, SegmentPiece, Shape};
use crate::{Error, Result};

use super::{BoundaryPiece, GridIndex, Table};

const CONTACT_TOL: f64 = 1e-9;

pub(crate) fn signed_area(pieces: &[BoundaryPiece]) -> f64 {
    pieces.iter().map(|p| area_term(&p.shape)).sum()
}

/// Contribution of one piece to `(1/2) * integral (x dy - y dx)`.
pub(crate) fn area_term(shape: &Shape) -> f64 {
    match shape {
        Shape::Segment(s) => 0.5 * s.a.cross(s.b),
        Shape::Arc(a) => {
            let t0 = a.start_angle;
            let t1 = a.start_angle + a.sweep;
            let r = a.radius;
            let c = a.center;
            0.5 * (r * r * a.sweep + r * c.x * (t1.sin() - t0.sin()) - r * c.y * (t1.cos() - t0.cos()))
        }
    }
}

pub fn table_area(table: &Table) -> f64 {
    table.signed_area()
}

/// Andrew's monotone chain; counterclockwise, no collinear points.
pub fn convex_hull(points: &[Point2]) -> Vec<Point2> {
    let mut pts: Vec<Point2> = points.to_vec();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let turn = |o: Point2, a: Point2, b: Point2| (a - o).cross(b - o);
    let mut lower: Vec<Point2> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && turn(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<Point2> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && turn(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// Diameter of a convex polygon by rotating calipers.
pub fn hull_diameter(hull: &[Point2]) -> (f64, Point2, Point2) {
    let n = hull.len();
    match n {
        0 => return (0.0, Point2::default(), Point2::default()),
        1 => return (0.0, hull[0], hull[0]),
        2 => return (hull[0].dist(hull[1]), hull[0], hull[1]),
        _ => {}
    }
    let area2 = |i: usize, j: usize, k: usize| (hull[j] - hull[i]).cross(hull[k] - hull[i]).abs();
    let mut best = (0.0, hull[0], hull[0]);
    let mut j = 1;
    for i in 0..n {
        let i1 = (i + 1) % n;
        while area2(i, i1, (j + 1) % n) > area2(i, i1, j) {
            j = (j + 1) % n;
        }
        for (a, b) in [(i, j), (i1, j)] {
            let d = hull[a].dist(hull[b]);
            if d > best.0 {
                best = (d, hull[a], hull[b]);
            }
        }
    }
    best
}

/// Boundary points whose hull agrees with the table's hull: piece endpoints
/// plus focusing arcs sampled finely enough that the sagitta between
/// samples is below `1e-12`.
fn hull_candidates(table: &Table) -> Vec<Point2> {
    let mut pts = Vec::new();
    for p in table.pieces() {
        pts.push(p.shape.start());
        if let Shape::Arc(a) = p.shape {
            if a.sweep > 0.0 {
                let step = (8e-12 / a.radius).sqrt();
                let n = ((a.sweep / step).ceil() as usize).clamp(1, 200_000);
                for i in 1..n {
                    pts.push(a.point_at(a.length() * i as f64 / n as f64));
                }
            }
        }
    }
    pts
}

pub fn table_diameter(table: &Table) -> (f64, Point2, Point2) {
    let hull = convex_hull(&hull_candidates(table));
    hull_diameter(&hull)
}

fn near(p: Point2, q: Point2) -> bool {
    p.dist(q) <= CONTACT_TOL
}

fn is_endpoint(shape: &Shape, p: Point2) -> bool {
    near(shape.start(), p) || near(shape.end(), p)
}

enum Contact {
    Points(Vec<Point2>),
    /// Collinear overlap of positive length; `true` if oppositely oriented.
    Overlap(bool),
    /// Same circle with overlapping spans.
    ArcOverlap,
}

fn seg_seg(s: &SegmentPiece, t: &SegmentPiece) -> Contact {
    let e = s.b - s.a;
    let f = t.b - t.a;
    let denom = e.cross(f);
    let le = e.norm();
    let lf = f.norm();
    if denom.abs() <= 1e-14 * le * lf {
        let off = (t.a - s.a).cross(e) / le;
        if off.abs() > CONTACT_TOL {
            return Contact::Points(vec![]);
        }
        let dir = e * (1.0 / le);
        let ta = (t.a - s.a).dot(dir);
        let tb = (t.b - s.a).dot(dir);
        let lo = ta.min(tb).max(0.0);
        let hi = ta.max(tb).min(le);
        if hi - lo > CONTACT_TOL {
            return Contact::Overlap(e.dot(f) < 0.0);
        }
        if hi - lo >= -CONTACT_TOL {
            return Contact::Points(vec![s.a + dir * (0.5 * (lo + hi))]);
        }
        return Contact::Points(vec![]);
    }
    let w = t.a - s.a;
    let u = w.cross(f) / denom;
    let v = w.cross(e) / denom;
    let tol_u = CONTACT_TOL / le;
    let tol_v = CONTACT_TOL / lf;
    if u >= -tol_u && u <= 1.0 + tol_u && v >= -tol_v && v <= 1.0 + tol_v {
        Contact::Points(vec![s.a + e * u])
    } else {
        Contact::Points(vec![])
    }
}

fn on_arc(a: &ArcPiece, p: Point2) -> bool {
    (p.dist(a.center) - a.radius).abs() <= CONTACT_TOL * 10.0
        && a.param_of(p, CONTACT_TOL / a.radius).is_some()
}

fn seg_arc(s: &SegmentPiece, a: &ArcPiece) -> Contact {
    let len = s.length();
    let e = (s.b - s.a) * (1.0 / len);
    let w = s.a - a.center;
    let b = w.dot(e);
    let c = w.norm_sq() - a.radius * a.radius;
    let disc = b * b - c;
    if disc < -CONTACT_TOL * a.radius {
        return Contact::Points(vec![]);
    }
    let sq = disc.max(0.0).sqrt();
    let mut pts = Vec::new();
    for t in [-b - sq, -b + sq] {
        if t >= -CONTACT_TOL && t <= len + CONTACT_TOL {
            let p = s.a + e * t;
            if on_arc(a, p) {
                pts.push(p);
            }
        }
    }
    Contact::Points(pts)
}

fn arc_arc(a: &ArcPiece, b: &ArcPiece) -> Contact {
    let d = a.center.dist(b.center);
    if d <= 1e-12 && (a.radius - b.radius).abs() <= 1e-12 {
        let mid_a = a.point_at(0.5 * a.length());
        let mid_b = b.point_at(0.5 * b.length());
        if on_arc(b, mid_a) || on_arc(a, mid_b) {
            return Contact::ArcOverlap;
        }
        let mut pts = Vec::new();
        for p in [a.start(), a.end()] {
            if on_arc(b, p) {
                pts.push(p);
            }
        }
        return Contact::Points(pts);
    }
    if d == 0.0 {
        return Contact::Points(vec![]);
    }
    let (r1, r2) = (a.radius, b.radius);
    if d > r1 + r2 + CONTACT_TOL || d < (r1 - r2).abs() - CONTACT_TOL {
        return Contact::Points(vec![]);
    }
    let x = (d * d + r1 * r1 - r2 * r2) / (2.0 * d);
    let h = (r1 * r1 - x * x).max(0.0).sqrt();
    let e = (b.center - a.center) * (1.0 / d);
    let base = a.center + e * x;
    let n = e.perp_ccw();
    let mut pts = Vec::new();
    for p in [base + n * h, base - n * h] {
        if on_arc(a, p) && on_arc(b, p) {
            pts.push(p);
        }
    }
    Contact::Points(pts)
}

fn contact(p: &Shape, q: &Shape) -> Contact {
    match (p, q) {
        (Shape::Segment(s), Shape::Segment(t)) => seg_seg(s, t),
        (Shape::Segment(s), Shape::Arc(a)) | (Shape::Arc(a), Shape::Segment(s)) => seg_arc(s, a),
        (Shape::Arc(a), Shape::Arc(b)) => arc_arc(a, b),
    }
}

/// Returns the number of shared (coincident, oppositely oriented) walls.
pub(crate) fn check_simple(pieces: &[BoundaryPiece], index: Option<&GridIndex>) -> Result<usize> {
    let n = pieces.len();
    let mut shared = 0usize;
    let mut check_pair = |i: usize, j: usize| -> Result<()> {
        let (p, q) = (&pieces[i].shape, &pieces[j].shape);
        match contact(p, q) {
            Contact::Overlap(true) => {
                shared += 1;
                Ok(())
            }
            Contact::Overlap(false) | Contact::ArcOverlap => Err(Error::Geometry(format!(
                "pieces {i} and {j} overlap with the same orientation"
            ))),
            Contact::Points(pts) => {
                for x in pts {
                    if !(is_endpoint(p, x) && is_endpoint(q, x)) {
                        return Err(Error::Geometry(format!(
                            "pieces {i} and {j} intersect at ({:.12}, {:.12})",
                            x.x, x.y
                        )));
                    }
                }
                Ok(())
            }
        }
    };
    match index {
        None => {
            for i in 0..n {
                for j in i + 1..n {
                    check_pair(i, j)?;
                }
            }
        }
        Some(grid) => {
            let mut seen = HashSet::new();
            for i in 0..n {
                let (lo, hi) = pieces[i].shape.bbox();
                let pad = Point2::new(CONTACT_TOL, CONTACT_TOL);
                seen.clear();
                let mut cands = Vec::new();
                grid.query_box(lo - pad, hi + pad, |k| {
                    let k = k as usize;
                    if k > i && seen.insert(k) {
                        cands.push(k);
                    }
                });
                cands.sort_unstable();
                for j in cands {
                    check_pair(i, j)?;
                }
            }
        }
    }
    Ok(shared)
}
