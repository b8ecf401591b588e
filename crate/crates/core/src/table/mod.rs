//! Billiard tables: an ordered closed chain of labelled boundary pieces with
//! a global arclength chart, plus builders and geometric certificates.

mod c1;
mod export;
mod index;
mod main_table;
mod measure;
mod spiral;

use serde::{Deserialize, Serialize};

pub use c1::{c1_margin, check_c1, compute_h_o, C1Config, C1Report, HoSearch};
pub use export::{label_color, piece_path, table_frame, table_svg, table_svg_body, SvgFrame, TableDocument};
pub use index::GridIndex;
pub use main_table::{build_dispersing_bulk, 
    build_main_table, build_optimal_table, certify_main_table, GeometryCertificate,
    MainTableParams, OptimalTable,
};
pub use measure::{convex_hull, hull_diameter, table_area, table_diameter};
pub use spiral::{
    build_spiral_table, build_spiral_with_h_o, certify_spiral, choose_r0, rounds_for,
    spiral_height, spiral_layout, wrap_factor, SpiralCertificate, SpiralLayout, SpiralOptions,
    SpiralParams, SpiralTable, Trapezoid, DEFAULT_R0,
};

use crate::geometry::{
    dispersing_chord, Beta, DiscRegion, IntersectConfig, Point2, Ray, SegmentPiece, Shape, Vec2,
};
use crate::{Error, Result};

/// Closure tolerance between consecutive pieces.
pub const CHAIN_TOL: f64 = 1e-10;
/// Above this piece count, ray queries go through a uniform grid.
pub const INDEX_THRESHOLD: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    Focusing,
    Dispersing,
    Flat,
}

impl Label {
    /// Pieces carrying the return section (focusing or dispersing).
    pub fn on_section(self) -> bool {
        !matches!(self, Label::Flat)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Focusing => "focusing",
            Label::Dispersing => "dispersing",
            Label::Flat => "flat",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Left,
    Right,
}

/// Membership of a flat piece in a corridor (strip or spiral arm).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorridorTag {
    pub side: Side,
    /// 1-based trapezoid index inside the corridor (strips have a single one).
    pub trapezoid: u32,
    /// The wall closing the far end of the corridor.
    pub end_cap: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryPiece {
    pub shape: Shape,
    pub label: Label,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub corridor: Option<CorridorTag>,
}

impl BoundaryPiece {
    pub fn new(shape: Shape, label: Label) -> Self {
        Self {
            shape,
            label,
            corridor: None,
        }
    }

    pub fn in_corridor(mut self, tag: CorridorTag) -> Self {
        self.corridor = Some(tag);
        self
    }
}

/// A rectangular strip `origin + a*axis + b*across`, `a in [0, length]`,
/// `b in [0, height]`, open towards the bulk along `a = 0`.
///
/// Used to traverse strips in closed form by unfolding.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RectCorridor {
    pub side: Side,
    pub origin: Point2,
    pub axis: Vec2,
    pub across: Vec2,
    pub length: f64,
    pub height: f64,
}

impl RectCorridor {
    pub fn opening(&self) -> SegmentPiece {
        SegmentPiece::new(self.origin, self.origin + self.across * self.height)
    }

    pub fn to_local(&self, p: Point2) -> (f64, f64) {
        let w = p - self.origin;
        (w.dot(self.axis), w.dot(self.across))
    }

    pub fn to_world(&self, a: f64, b: f64) -> Point2 {
        self.origin + self.axis * a + self.across * b
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum TableFamily {
    Main(MainTableParams),
    Spiral {
        k_d: f64,
        k_f: f64,
        h: f64,
        r0: f64,
        n_bar: u64,
        rounds: u64,
    },
    Custom {
        name: String,
    },
}

#[derive(Debug, Clone)]
pub struct Table {
    pieces: Vec<BoundaryPiece>,
    offsets: Vec<f64>,
    perimeter: f64,
    section_pieces: Vec<usize>,
    section_offsets: Vec<f64>,
    section_length: f64,
    vertices: Vec<Point2>,
    corridors: Vec<RectCorridor>,
    index: Option<GridIndex>,
    family: TableFamily,
}

impl Table {
    /// Assemble and validate a closed, counterclockwise chain.
    pub fn new(pieces: Vec<BoundaryPiece>, family: TableFamily) -> Result<Self> {
        if pieces.len() < 2 {
            return Err(Error::Geometry("a table needs at least two pieces".into()));
        }
        for (i, p) in pieces.iter().enumerate() {
            let len = p.shape.length();
            if !(len > 0.0) || !len.is_finite() {
                return Err(Error::Geometry(format!("piece {i} has length {len}")));
            }
            let expected = match p.label {
                Label::Flat => 0.0,
                Label::Focusing => 1.0,
                Label::Dispersing => -1.0,
            };
            let k = p.shape.curvature();
            if k.signum() * (k != 0.0) as i32 as f64 != expected {
                return Err(Error::Geometry(format!(
                    "piece {i} labelled {:?} has curvature {k}",
                    p.label
                )));
            }
            let next = &pieces[(i + 1) % pieces.len()];
            let gap = p.shape.end().dist(next.shape.start());
            if gap > CHAIN_TOL {
                return Err(Error::Geometry(format!(
                    "chain not closed between pieces {i} and {}: gap {gap:e}",
                    (i + 1) % pieces.len()
                )));
            }
        }

        let mut offsets = Vec::with_capacity(pieces.len());
        let mut acc = 0.0;
        for p in &pieces {
            offsets.push(acc);
            acc += p.shape.length();
        }
        let mut section_pieces = Vec::new();
        let mut section_offsets = Vec::new();
        let mut sacc = 0.0;
        for (i, p) in pieces.iter().enumerate() {
            if p.label.on_section() {
                section_pieces.push(i);
                section_offsets.push(sacc);
                sacc += p.shape.length();
            }
        }
        let vertices = pieces.iter().map(|p| p.shape.start()).collect();
        let index = (pieces.len() > INDEX_THRESHOLD).then(|| GridIndex::build(&pieces));
        let table = Self {
            pieces,
            offsets,
            perimeter: acc,
            section_pieces,
            section_offsets,
            section_length: sacc,
            vertices,
            corridors: Vec::new(),
            index,
            family,
        };
        if table.signed_area() <= 0.0 {
            return Err(Error::Geometry("boundary is not counterclockwise".into()));
        }
        Ok(table)
    }

    pub fn with_corridors(mut self, corridors: Vec<RectCorridor>) -> Self {
        self.corridors = corridors;
        self
    }

    pub fn pieces(&self) -> &[BoundaryPiece] {
        &self.pieces
    }

    pub fn piece(&self, i: usize) -> &BoundaryPiece {
        &self.pieces[i]
    }

    pub fn offsets(&self) -> &[f64] {
        &self.offsets
    }

    pub fn perimeter(&self) -> f64 {
        self.perimeter
    }

    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    pub fn corridors(&self) -> &[RectCorridor] {
        &self.corridors
    }

    pub fn index(&self) -> Option<&GridIndex> {
        self.index.as_ref()
    }

    pub fn family(&self) -> &TableFamily {
        &self.family
    }

    pub fn section_pieces(&self) -> &[usize] {
        &self.section_pieces
    }

    /// Total arclength of the focusing and dispersing pieces.
    pub fn section_length(&self) -> f64 {
        self.section_length
    }

    pub fn has_label(&self, label: Label) -> bool {
        self.pieces.iter().any(|p| p.label == label)
    }

    pub fn signed_area(&self) -> f64 {
        measure::signed_area(&self.pieces)
    }

    /// Global arclength of a point given by piece and local arclength.
    pub fn global_s(&self, piece: usize, u: f64) -> f64 {
        self.offsets[piece] + u
    }

    /// Piece index and local arclength of global coordinate `s`
    /// (taken modulo the perimeter).
    pub fn locate(&self, s: f64) -> (usize, f64) {
        let s = s.rem_euclid(self.perimeter);
        let i = match self.offsets.binary_search_by(|o| o.total_cmp(&s)) {
            Ok(i) => i,
            Err(i) => i - 1,
        };
        let u = (s - self.offsets[i]).min(self.pieces[i].shape.length());
        (i, u)
    }

    /// Map a coordinate in `[0, section_length)` onto the section pieces.
    pub fn locate_section(&self, sigma: f64) -> (usize, f64) {
        let sigma = sigma.clamp(0.0, self.section_length);
        let j = match self.section_offsets.binary_search_by(|o| o.total_cmp(&sigma)) {
            Ok(j) => j,
            Err(j) => j.saturating_sub(1),
        };
        let i = self.section_pieces[j];
        let u = (sigma - self.section_offsets[j]).min(self.pieces[i].shape.length());
        (i, u)
    }

    /// Inverse of [`Table::locate_section`]; `None` off the section.
    pub fn section_coord(&self, piece: usize, u: f64) -> Option<f64> {
        let j = self.section_pieces.iter().position(|&i| i == piece)?;
        Some(self.section_offsets[j] + u)
    }

    pub fn point_at(&self, s: f64) -> Point2 {
        let (i, u) = self.locate(s);
        self.pieces[i].shape.point_at(u)
    }

    pub fn curvature_at(&self, s: f64) -> f64 {
        let (i, _) = self.locate(s);
        self.pieces[i].shape.curvature()
    }

    pub fn label_at(&self, s: f64) -> Label {
        let (i, _) = self.locate(s);
        self.pieces[i].label
    }

    /// `D_beta(s)`.
    pub fn make_disc(&self, s: f64, beta: Beta) -> Result<DiscRegion> {
        let (i, u) = self.locate(s);
        let shape = &self.pieces[i].shape;
        DiscRegion::from_boundary(
            shape.point_at(u),
            shape.inner_normal_at(u),
            shape.curvature(),
            beta,
        )
    }

    /// `I(s1, s2)`: the chord that `D_{-2}(s1)` cuts on the line through a
    /// dispersing point `s1` and a focusing point `s2`.
    pub fn chord_i(&self, s1: f64, s2: f64) -> Result<SegmentPiece> {
        if self.label_at(s1) != Label::Dispersing || self.label_at(s2) != Label::Focusing {
            return Err(Error::InvalidParameter(
                "chord_i needs a dispersing and a focusing point".into(),
            ));
        }
        let disc = self.make_disc(s1, Beta::Finite(-2.0))?;
        Ok(dispersing_chord(&disc, self.point_at(s1), self.point_at(s2)))
    }

    /// Nearest front-side intersection of `ray` with the boundary over all
    /// pieces, used by the dynamics.
    pub(crate) fn for_each_candidate(
        &self,
        ray: &Ray,
        mut visit: impl FnMut(usize) -> Option<f64>,
    ) {
        match &self.index {
            None => {
                for i in 0..self.pieces.len() {
                    visit(i);
                }
            }
            Some(grid) => grid.walk(ray, |items, t_exit, best| {
                let mut b = best;
                for &i in items {
                    if let Some(t) = visit(i as usize) {
                        b = b.min(t);
                    }
                }
                (b, b <= t_exit)
            }),
        }
    }

    /// An all-flat polygon from counterclockwise vertices.
    pub fn flat_polygon(vertices: &[Point2], name: &str) -> Result<Table> {
        let n = vertices.len();
        if n < 3 {
            return Err(Error::InvalidParameter("a polygon needs three vertices".into()));
        }
        let pieces = (0..n)
            .map(|i| {
                BoundaryPiece::new(
                    Shape::Segment(SegmentPiece::new(vertices[i], vertices[(i + 1) % n])),
                    Label::Flat,
                )
            })
            .collect();
        Table::new(pieces, TableFamily::Custom { name: name.into() })
    }

    /// Crossing-number point location; boundary points are unspecified.
    pub fn contains_point(&self, p: Point2) -> bool {
        // Slightly irrational direction keeps the test ray off vertices.
        let ray = Ray::new(p, Point2::new(1.0, 0.000_123_456_789));
        let cfg = IntersectConfig {
            t_min: 0.0,
            grazing_tol: 0.0,
        };
        let mut crossings = 0usize;
        for piece in &self.pieces {
            crossings += piece.shape.intersect_ray(&ray, &cfg).hits.len();
        }
        crossings % 2 == 1
    }

    /// Pairwise intersection audit of non-adjacent pieces. Pieces may touch
    /// only at common endpoints or along coincident, oppositely oriented
    /// segments (zero-thickness walls between two corridors).
    pub fn check_simple(&self) -> Result<usize> {
        measure::check_simple(&self.pieces, self.index.as_ref())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn unit_square() -> Table {
        let p = [
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(1.0, 1.0),
            Point2::new(0.0, 1.0),
        ];
        Table::flat_polygon(&p, "unit-square").unwrap()
    }

    #[test]
    fn square_chart() {
        let t = unit_square();
        assert!((t.perimeter() - 4.0).abs() < 1e-15);
        assert_eq!(t.locate(2.5), (2, 0.5));
        assert!(t.point_at(2.5).dist(Point2::new(0.5, 1.0)) < 1e-15);
        assert!(t.contains_point(Point2::new(0.3, 0.7)));
        assert!(!t.contains_point(Point2::new(1.3, 0.7)));
        assert_eq!(t.check_simple().unwrap(), 0);
    }

    #[test]
    fn clockwise_chain_rejected() {
        let p = [
            Point2::new(0.0, 0.0),
            Point2::new(0.0, 1.0),
            Point2::new(1.0, 1.0),
        ];
        let pieces = (0..3)
            .map(|i| {
                BoundaryPiece::new(
                    Shape::Segment(SegmentPiece::new(p[i], p[(i + 1) % 3])),
                    Label::Flat,
                )
            })
            .collect();
        assert!(Table::new(pieces, TableFamily::Custom { name: "cw".into() }).is_err());
    }

    #[test]
    fn open_chain_rejected() {
        let pieces = vec![
            BoundaryPiece::new(
                Shape::Segment(SegmentPiece::new(
                    Point2::new(0.0, 0.0),
                    Point2::new(1.0, 0.0),
                )),
                Label::Flat,
            ),
            BoundaryPiece::new(
                Shape::Segment(SegmentPiece::new(
                    Point2::new(1.0, 0.0),
                    Point2::new(0.0, 1.0),
                )),
                Label::Flat,
            ),
            BoundaryPiece::new(
                Shape::Segment(SegmentPiece::new(
                    Point2::new(0.0, 1.0),
                    Point2::new(0.0, 0.1),
                )),
                Label::Flat,
            ),
        ];
        assert!(matches!(
            Table::new(pieces, TableFamily::Custom { name: "gap".into() }),
            Err(Error::Geometry(_))
        ));
    }
}
