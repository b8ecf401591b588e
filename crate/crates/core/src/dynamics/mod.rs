//! Billiard map on the full boundary and the first-return map on the
//! focusing and dispersing pieces, which skips flat bounces.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::geometry::{Point2, Ray, Shape, Vec2};
use crate::table::{Label, RectCorridor, Side, Table};
use crate::tangent::{jacobian_of_legs, jacobian_step, JacobianStep, Leg, StepGeometry};

mod export;
mod strip;

pub use export::{orbit_csv, orbit_csv_header, orbit_svg, OrbitRow};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DynConfig {
    /// Intersections closer than this to the ray origin are ignored.
    pub t_min: f64,
    /// Hits with `|cos|` of the angle to the normal below this are tangential.
    pub grazing_tol: f64,
    /// Hits within this arclength of a piece end are corner hits.
    pub corner_tol: f64,
    pub flat_cap: u64,
    /// Traverse rectangular strips in closed form.
    pub strip_shortcut: bool,
    /// Keep every flat collision in the flight record.
    pub record_events: bool,
}

impl Default for DynConfig {
    fn default() -> Self {
        Self {
            t_min: 1e-9,
            grazing_tol: 1e-9,
            corner_tol: 1e-9,
            flat_cap: 10_000_000,
            strip_shortcut: true,
            record_events: false,
        }
    }
}

/// A line element: a boundary point and the outgoing angle, measured
/// clockwise from the inner normal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub piece: usize,
    /// Arclength along the piece.
    pub u: f64,
    pub alpha: f64,
}

impl PhasePoint {
    pub fn new(piece: usize, u: f64, alpha: f64) -> Self {
        Self { piece, u, alpha }
    }

    pub fn s(&self, table: &Table) -> f64 {
        table.global_s(self.piece, self.u)
    }

    pub fn point(&self, table: &Table) -> Point2 {
        table.piece(self.piece).shape.point_at(self.u)
    }

    pub fn curvature(&self, table: &Table) -> f64 {
        table.piece(self.piece).shape.curvature()
    }

    pub fn label(&self, table: &Table) -> Label {
        table.piece(self.piece).label
    }

    /// Unit outgoing direction.
    pub fn direction(&self, table: &Table) -> Vec2 {
        let n = table.piece(self.piece).shape.inner_normal_at(self.u);
        let t = n.perp_cw();
        n * self.alpha.cos() + t * self.alpha.sin()
    }
}

/// Time reversal `alpha -> -alpha`.
pub fn reverse(x: PhasePoint) -> PhasePoint {
    PhasePoint::new(x.piece, x.u, -x.alpha)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollisionEvent {
    pub point: Point2,
    pub piece: usize,
    pub u: f64,
    pub incoming: Vec2,
    pub outgoing: Vec2,
    /// Flight time from the previous collision.
    pub tau: f64,
    pub alpha: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SingularKind {
    Corner,
    Tangential,
    /// The ray left the table; only possible through a defect in the table.
    Escape,
    CapExceeded,
}

impl SingularKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SingularKind::Corner => "corner",
            SingularKind::Tangential => "tangential",
            SingularKind::Escape => "escape",
            SingularKind::CapExceeded => "cap_exceeded",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SingularEvent {
    pub kind: SingularKind,
    pub location: Point2,
    pub piece: Option<usize>,
}

impl fmt::Display for SingularEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} event at ({}, {})",
            self.kind.as_str(),
            self.location.x,
            self.location.y
        )
    }
}

impl std::error::Error for SingularEvent {}

/// A maximal run of hits in one trapezoid of a corridor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorridorVisit {
    pub side: Side,
    pub trapezoid: u32,
    /// Which entry into a corridor during the flight this visit belongs to;
    /// a hit on any other flat piece ends an entry.
    pub entry: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlightRecord {
    pub start: PhasePoint,
    pub end: PhasePoint,
    pub tau: f64,
    pub n_flat: u64,
    /// Flat collisions in order; filled only when events are recorded.
    pub flat_hits: Vec<CollisionEvent>,
    pub entered_corridor: bool,
    pub visits: Vec<CorridorVisit>,
    pub hit_end_cap: bool,
}

impl FlightRecord {
    pub fn had_flat_hit(&self) -> bool {
        self.n_flat > 0
    }

    pub fn geometry(&self, table: &Table) -> StepGeometry {
        StepGeometry {
            alpha0: self.start.alpha,
            k0: self.start.curvature(table),
            tau: self.tau,
            alpha1: self.end.alpha,
            k1: self.end.curvature(table),
            n_flat: self.n_flat,
        }
    }

    /// Per-collision legs; needs recorded events when there were flat hits.
    pub fn legs(&self, table: &Table) -> Option<Vec<Leg>> {
        if self.flat_hits.len() as u64 != self.n_flat {
            return None;
        }
        let mut legs = Vec::with_capacity(self.flat_hits.len() + 1);
        let (mut a0, mut k0) = (self.start.alpha, self.start.curvature(table));
        let mut run = 0.0;
        for e in &self.flat_hits {
            legs.push(Leg {
                alpha0: a0,
                k0,
                tau: e.tau,
                alpha1: e.alpha,
                k1: 0.0,
            });
            run += e.tau;
            a0 = e.alpha;
            k0 = 0.0;
        }
        legs.push(Leg {
            alpha0: a0,
            k0,
            tau: self.tau - run,
            alpha1: self.end.alpha,
            k1: self.end.curvature(table),
        });
        Some(legs)
    }

    pub fn jacobian(&self, table: &Table) -> crate::Result<JacobianStep> {
        jacobian_step(&self.geometry(table))
    }

    /// The differential composed leg by leg from recorded events.
    pub fn jacobian_by_legs(&self, table: &Table) -> Option<crate::Result<JacobianStep>> {
        self.legs(table).map(|l| jacobian_of_legs(&l))
    }
}

/// The nearest front-side hit of a ray.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Hit {
    pub t: f64,
    pub piece: usize,
    pub u: f64,
    pub cos_normal: f64,
}

/// Smallest root `t > t_min` at which the ray meets `shape` from the table
/// side or tangentially, as `(t, u, cos)`.
fn piece_hit(shape: &Shape, ray: &Ray, t_min: f64, grazing_tol: f64) -> Option<(f64, f64, f64)> {
    match shape {
        Shape::Segment(s) => {
            let e = s.b - s.a;
            let denom = ray.direction.cross(e);
            if denom == 0.0 {
                return None;
            }
            let w = s.a - ray.origin;
            let t = w.cross(e) / denom;
            let v = w.cross(ray.direction) / denom;
            if t <= t_min || !(0.0..=1.0).contains(&v) {
                return None;
            }
            let len = e.norm();
            let c = ray.direction.dot(e.perp_ccw()) / len;
            (c < grazing_tol).then_some((t, v * len, c))
        }
        Shape::Arc(a) => {
            let w = ray.origin - a.center;
            let b = w.dot(ray.direction);
            let c = w.norm_sq() - a.radius * a.radius;
            let disc = b * b - c;
            if disc < 0.0 {
                return None;
            }
            let sq = disc.sqrt();
            let q = -b - b.signum() * sq;
            let (r1, r2) = if q == 0.0 { (-b, -b) } else { (q, c / q) };
            let (r1, r2) = if r1 <= r2 { (r1, r2) } else { (r2, r1) };
            for t in [r1, r2] {
                if t <= t_min {
                    continue;
                }
                let p = ray.at(t);
                let Some(u) = a.param_of(p, 1e-12) else {
                    continue;
                };
                let cn = ray.direction.dot(a.inner_normal_at(u));
                if cn < grazing_tol {
                    return Some((t, u, cn));
                }
            }
            None
        }
    }
}

pub(crate) fn nearest_hit(table: &Table, ray: &Ray, cfg: &DynConfig) -> Option<Hit> {
    let mut best: Option<Hit> = None;
    table.for_each_candidate(ray, |i| {
        let (t, u, c) = piece_hit(&table.piece(i).shape, ray, cfg.t_min, cfg.grazing_tol)?;
        if best.map_or(true, |b| t < b.t) {
            best = Some(Hit {
                t,
                piece: i,
                u,
                cos_normal: c,
            });
        }
        Some(t)
    });
    best
}

/// Collision with the boundary along `ray`: the hit and the outgoing angle.
fn collide(table: &Table, ray: &Ray, cfg: &DynConfig) -> Result<(Hit, f64), SingularEvent> {
    let Some(hit) = nearest_hit(table, ray, cfg) else {
        return Err(SingularEvent {
            kind: SingularKind::Escape,
            location: ray.origin,
            piece: None,
        });
    };
    let shape = &table.piece(hit.piece).shape;
    let location = ray.at(hit.t);
    let singular = |kind| SingularEvent {
        kind,
        location,
        piece: Some(hit.piece),
    };
    if hit.cos_normal.abs() < cfg.grazing_tol {
        return Err(singular(SingularKind::Tangential));
    }
    if hit.u < cfg.corner_tol || hit.u > shape.length() - cfg.corner_tol {
        return Err(singular(SingularKind::Corner));
    }
    let n = shape.inner_normal_at(hit.u);
    let t = n.perp_cw();
    // Outgoing angle from the incoming direction: cos = -d.n, sin = d.t.
    let alpha = ray.direction.dot(t).atan2(-ray.direction.dot(n));
    Ok((hit, alpha))
}

/// One collision of the billiard map on the full boundary.
pub fn billiard_map(table: &Table, x: &PhasePoint, cfg: &DynConfig) -> Result<(PhasePoint, f64), SingularEvent> {
    let ray = Ray::new(x.point(table), x.direction(table));
    let (hit, alpha) = collide(table, &ray, cfg)?;
    Ok((PhasePoint::new(hit.piece, hit.u, alpha), hit.t))
}

fn corridor_of(table: &Table, side: Side) -> Option<&RectCorridor> {
    table.corridors().iter().find(|c| c.side == side)
}

/// Iterates the billiard map from `x` until the next focusing or
/// dispersing collision.
pub fn first_return_map(table: &Table, x: &PhasePoint, cfg: &DynConfig) -> Result<FlightRecord, SingularEvent> {
    let mut rec = FlightRecord {
        start: *x,
        end: *x,
        tau: 0.0,
        n_flat: 0,
        flat_hits: Vec::new(),
        entered_corridor: false,
        visits: Vec::new(),
        hit_end_cap: false,
    };
    let shortcut = cfg.strip_shortcut && !cfg.record_events && !table.corridors().is_empty();
    let mut origin = x.point(table);
    let mut dir = x.direction(table);
    let mut last_tau_mark = 0.0;
    let mut on_piece = Some(x.piece);
    let mut entries = 0u32;
    let mut inside = false;

    loop {
        if shortcut {
            if let Some(tag) = on_piece.and_then(|i| table.piece(i).corridor) {
                if let Some(c) = corridor_of(table, tag.side) {
                    let (a0, b0) = c.to_local(origin);
                    let out = strip::traverse(c, a0, b0, dir, cfg, rec.n_flat)?;
                    entries += 1;
                    note_strip(&mut rec, tag.side, out.hit_cap, entries - 1);
                    rec.tau += out.t;
                    rec.n_flat += out.n_flat;
                    origin = out.exit;
                    dir = out.direction;
                    on_piece = None;
                    continue;
                }
            }
        }
        let ray = Ray::new(origin, dir);
        let (hit, alpha) = collide(table, &ray, cfg)?;
        let piece = table.piece(hit.piece);

        if shortcut {
            if let Some(c) = piece.corridor.and_then(|tag| corridor_of(table, tag.side)) {
                if let Some(t_open) = strip::opening_crossing(c, &ray, hit.t) {
                    let entry = ray.at(t_open);
                    let (_, b0) = c.to_local(entry);
                    let out = strip::traverse(c, 0.0, b0, dir, cfg, rec.n_flat)?;
                    entries += 1;
                    inside = false;
                    note_strip(&mut rec, c.side, out.hit_cap, entries - 1);
                    rec.tau += t_open + out.t;
                    rec.n_flat += out.n_flat;
                    origin = out.exit;
                    dir = out.direction;
                    on_piece = None;
                    continue;
                }
            }
        }

        rec.tau += hit.t;
        let end = PhasePoint::new(hit.piece, hit.u, alpha);
        if piece.label.on_section() {
            rec.end = end;
            return Ok(rec);
        }
        rec.n_flat += 1;
        if let Some(tag) = piece.corridor {
            rec.entered_corridor = true;
            rec.hit_end_cap |= tag.end_cap;
            if !inside {
                entries += 1;
                inside = true;
            }
            let v = CorridorVisit {
                side: tag.side,
                trapezoid: tag.trapezoid,
                entry: entries - 1,
            };
            if rec.visits.last() != Some(&v) {
                rec.visits.push(v);
            }
        } else {
            inside = false;
        }
        if rec.n_flat > cfg.flat_cap {
            return Err(SingularEvent {
                kind: SingularKind::CapExceeded,
                location: ray.at(hit.t),
                piece: Some(hit.piece),
            });
        }
        origin = end.point(table);
        dir = end.direction(table);
        if cfg.record_events {
            rec.flat_hits.push(CollisionEvent {
                point: origin,
                piece: hit.piece,
                u: hit.u,
                incoming: ray.direction,
                outgoing: dir,
                tau: rec.tau - last_tau_mark,
                alpha,
            });
            last_tau_mark = rec.tau;
        }
        on_piece = Some(hit.piece);
    }
}

fn note_strip(rec: &mut FlightRecord, side: Side, hit_cap: bool, entry: u32) {
    rec.entered_corridor = true;
    rec.hit_end_cap |= hit_cap;
    let v = CorridorVisit {
        side,
        trapezoid: 1,
        entry,
    };
    if rec.visits.last() != Some(&v) {
        rec.visits.push(v);
    }
}

/// Which boundary a sample is drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Restriction {
    /// Focusing and dispersing pieces only.
    Section,
    Full,
}

/// Draw from `cos(alpha) ds d alpha`: `s` uniform, `alpha = asin(2u - 1)`.
pub fn sample_mu<R: Rng + ?Sized>(rng: &mut R, table: &Table, restriction: Restriction) -> PhasePoint {
    let (piece, u) = match restriction {
        Restriction::Section => table.locate_section(rng.gen::<f64>() * table.section_length()),
        Restriction::Full => table.locate(rng.gen::<f64>() * table.perimeter()),
    };
    let alpha = (2.0 * rng.gen::<f64>() - 1.0).asin();
    PhasePoint::new(piece, u, alpha)
}

/// Like [`sample_mu`] but redraws points within `margin` of a piece end or
/// with `cos(alpha) <= margin`, which are singular at the start.
pub fn sample_regular<R: Rng + ?Sized>(rng: &mut R, table: &Table, restriction: Restriction, margin: f64) -> PhasePoint {
    loop {
        let x = sample_mu(rng, table, restriction);
        let len = table.piece(x.piece).shape.length();
        if x.u > margin && x.u < len - margin && x.alpha.cos() > margin {
            return x;
        }
    }
}
