//! The strip table: a unit-square bulk with three dispersing walls, one
//! focusing floor, and two horizontal strips leaving through the bottom of
//! the lateral walls.

use std::f64::consts::{PI, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::geometry::{ArcPiece, Point2, SegmentPiece, Shape};
use crate::{Error, Result};

use super::c1::{check_c1, compute_h_o, C1Config, C1Report, HoSearch};
use super::measure::{table_area, table_diameter};
use super::{BoundaryPiece, CorridorTag, Label, RectCorridor, Side, Table, TableFamily};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MainTableParams {
    pub k_d: f64,
    pub k_f: f64,
    pub h: f64,
    pub l: f64,
    /// Height of the strip floor above the focusing arc's endpoints.
    #[serde(default)]
    pub opening_bottom: f64,
}

impl MainTableParams {
    pub fn new(k_d: f64, k_f: f64, h: f64, l: f64) -> Self {
        Self {
            k_d,
            k_f,
            h,
            l,
            opening_bottom: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.to_string()));
        if !(self.k_d < 0.0 && self.k_d > -SQRT_2) {
            return bad("k_d must lie in (-sqrt 2, 0)");
        }
        if !(self.k_f > 0.0 && self.k_f < 2.0) {
            return bad("k_f must lie in (0, 2)");
        }
        if !(self.h > 0.0 && self.l > 0.0) {
            return bad("h and l must be positive");
        }
        if !(self.opening_bottom >= 0.0 && self.opening_bottom + self.h < 1.0) {
            return bad("the opening must fit inside the lateral wall");
        }
        Ok(())
    }
}

/// Arc of curvature `k` (signed) from `a` to `b`, with the table on the left.
pub(crate) fn arc_through(a: Point2, b: Point2, k: f64) -> Result<ArcPiece> {
    let r = 1.0 / k.abs();
    let chord = b - a;
    let c = chord.norm();
    if c > 2.0 * r {
        return Err(Error::Geometry(format!(
            "chord {c} longer than the diameter {}",
            2.0 * r
        )));
    }
    let mid = a + chord * 0.5;
    let d = (r * r - 0.25 * c * c).sqrt();
    // Focusing: centre on the table side (left of travel); dispersing: right.
    let left = chord.perp_ccw() * (1.0 / c);
    let center = if k > 0.0 { mid + left * d } else { mid - left * d };
    let half = (0.5 * c / r).asin();
    Ok(ArcPiece {
        center,
        radius: r,
        start_angle: (a - center).angle(),
        sweep: 2.0 * half * k.signum(),
    })
}

fn seg(a: Point2, b: Point2) -> Shape {
    Shape::Segment(SegmentPiece::new(a, b))
}

pub fn build_main_table(p: &MainTableParams) -> Result<Table> {
    p.validate()?;
    let (b, h, l) = (p.opening_bottom, p.h, p.l);
    let top = b + h;
    let pt = Point2::new;
    let tag = |side, end_cap| CorridorTag {
        side,
        trapezoid: 1,
        end_cap,
    };
    let flat = |s: Shape| BoundaryPiece::new(s, Label::Flat);

    let focus = arc_through(pt(0.0, 0.0), pt(1.0, 0.0), p.k_f)?;
    if focus.sweep.abs() >= PI {
        return Err(Error::Geometry("focusing arc is not shorter than a semicircle".into()));
    }
    let mut pieces = vec![BoundaryPiece::new(Shape::Arc(focus), Label::Focusing)];
    if b > 0.0 {
        pieces.push(flat(seg(pt(1.0, 0.0), pt(1.0, b))));
    }
    pieces.push(flat(seg(pt(1.0, b), pt(1.0 + l, b))).in_corridor(tag(Side::Right, false)));
    pieces.push(flat(seg(pt(1.0 + l, b), pt(1.0 + l, top))).in_corridor(tag(Side::Right, true)));
    pieces.push(flat(seg(pt(1.0 + l, top), pt(1.0, top))).in_corridor(tag(Side::Right, false)));
    for (a, e) in [
        (pt(1.0, top), pt(1.0, 1.0)),
        (pt(1.0, 1.0), pt(0.0, 1.0)),
        (pt(0.0, 1.0), pt(0.0, top)),
    ] {
        pieces.push(BoundaryPiece::new(
            Shape::Arc(arc_through(a, e, p.k_d)?),
            Label::Dispersing,
        ));
    }
    pieces.push(flat(seg(pt(0.0, top), pt(-l, top))).in_corridor(tag(Side::Left, false)));
    pieces.push(flat(seg(pt(-l, top), pt(-l, b))).in_corridor(tag(Side::Left, true)));
    pieces.push(flat(seg(pt(-l, b), pt(0.0, b))).in_corridor(tag(Side::Left, false)));
    if b > 0.0 {
        pieces.push(flat(seg(pt(0.0, b), pt(0.0, 0.0))));
    }

    let corridors = vec![
        RectCorridor {
            side: Side::Right,
            origin: pt(1.0, b),
            axis: pt(1.0, 0.0),
            across: pt(0.0, 1.0),
            length: l,
            height: h,
        },
        RectCorridor {
            side: Side::Left,
            origin: pt(0.0, b),
            axis: pt(-1.0, 0.0),
            across: pt(0.0, 1.0),
            length: l,
            height: h,
        },
    ];
    let table = Table::new(pieces, TableFamily::Main(*p))?.with_corridors(corridors);
    table.check_simple()?;
    Ok(table)
}

/// The unit-square bulk with the focusing arc replaced by a flat bottom and
/// the strip openings closed by flat walls; dispersing top as in the main
/// table with strip height `h`.
pub fn build_dispersing_bulk(k_d: f64, h: f64) -> Result<Table> {
    if !(k_d < 0.0 && k_d > -SQRT_2) || !(h > 0.0 && h < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "need -sqrt(2) < k_d < 0 and 0 < h < 1, got k_d = {k_d}, h = {h}"
        )));
    }
    let pt = Point2::new;
    let flat = |a, b| BoundaryPiece::new(seg(a, b), Label::Flat);
    let mut pieces = vec![
        flat(pt(0.0, 0.0), pt(1.0, 0.0)),
        flat(pt(1.0, 0.0), pt(1.0, h)),
    ];
    for (a, e) in [
        (pt(1.0, h), pt(1.0, 1.0)),
        (pt(1.0, 1.0), pt(0.0, 1.0)),
        (pt(0.0, 1.0), pt(0.0, h)),
    ] {
        pieces.push(BoundaryPiece::new(Shape::Arc(arc_through(a, e, k_d)?), Label::Dispersing));
    }
    pieces.push(flat(pt(0.0, h), pt(0.0, 0.0)));
    Table::new(
        pieces,
        TableFamily::Custom {
            name: format!("dispersing_bulk(k_d={k_d}, h={h})"),
        },
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometryCertificate {
    pub c1_ok: bool,
    pub c1_margin: f64,
    /// Worst pair `(s', s'')` in global arclength.
    pub c1_witness: (f64, f64),
    pub c1_witness_points: (Point2, Point2),
    pub eps_grid: f64,
    pub c2_ok: bool,
    pub c2_margin: f64,
    pub area: f64,
    pub diameter: f64,
}

impl GeometryCertificate {
    pub fn passes(&self) -> bool {
        self.c1_ok && self.c2_ok
    }
}

pub fn certify_main_table(table: &Table, p: &MainTableParams, cfg: &C1Config) -> Result<GeometryCertificate> {
    let c1: C1Report = check_c1(table, cfg)?;
    let c2_margin = p.l - 1.0 / p.k_f;
    Ok(GeometryCertificate {
        c1_ok: c1.ok,
        c1_margin: c1.margin,
        c1_witness: c1.witness,
        c1_witness_points: c1.witness_points,
        eps_grid: c1.eps_grid,
        // (C2) with equality at l = 1/k_f, up to rounding of the reciprocal.
        c2_ok: c2_margin >= -1e-12 * p.l,
        c2_margin,
        area: table_area(table),
        diameter: table_diameter(table).0,
    })
}

#[derive(Debug, Clone)]
pub struct OptimalTable {
    pub table: Table,
    pub params: MainTableParams,
    pub search: HoSearch,
    pub certificate: GeometryCertificate,
}

/// `h = h_o(k_d, k_f)`, `l = 1/k_f`.
pub fn build_optimal_table(k_d: f64, k_f: f64, cfg: &C1Config) -> Result<OptimalTable> {
    let search = compute_h_o(k_d, k_f, cfg)?;
    let params = MainTableParams::new(k_d, k_f, search.h_o, 1.0 / k_f);
    let table = build_main_table(&params)?;
    let certificate = certify_main_table(&table, &params, cfg)?;
    Ok(OptimalTable {
        table,
        params,
        search,
        certificate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arc_through_dispersing_unit() {
        let a = arc_through(Point2::new(1.0, 1.0), Point2::new(0.0, 1.0), -1.0).unwrap();
        assert!((a.start().dist(Point2::new(1.0, 1.0))) < 1e-15);
        assert!((a.end().dist(Point2::new(0.0, 1.0))) < 1e-15);
        assert!(a.center.y > 1.0);
        assert!(a.curvature() == -1.0);
    }

    #[test]
    fn focusing_sagitta() {
        let k_f = 0.01;
        let a = arc_through(Point2::new(0.0, 0.0), Point2::new(1.0, 0.0), k_f).unwrap();
        let low = a.point_at(0.5 * a.length());
        let sag = (1.0 / k_f) * (1.0 - (1.0 - k_f * k_f / 4.0).sqrt());
        assert!((low.y + sag).abs() < 1e-14);
    }

    #[test]
    fn main_table_closes() {
        let p = MainTableParams::new(-1.0, 0.1, 0.05, 10.0);
        let t = build_main_table(&p).unwrap();
        assert_eq!(t.pieces().len(), 10);
        assert!(t.contains_point(Point2::new(0.5, 0.5)));
        assert!(t.contains_point(Point2::new(5.0, 0.02)));
        assert!(t.contains_point(Point2::new(-5.0, 0.02)));
        assert!(!t.contains_point(Point2::new(5.0, 0.2)));
    }

    #[test]
    fn opening_parameter_adds_lateral_segments() {
        let mut p = MainTableParams::new(-1.0, 0.1, 0.05, 10.0);
        p.opening_bottom = 0.1;
        let t = build_main_table(&p).unwrap();
        assert_eq!(t.pieces().len(), 12);
    }
}
