//! JSON and SVG renderings of a table.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::geometry::{Point2, Shape};
use crate::json;

use super::{BoundaryPiece, Label, Table, TableFamily};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableDocument {
    pub family: TableFamily,
    pub perimeter: f64,
    pub pieces: Vec<BoundaryPiece>,
}

impl TableDocument {
    pub fn of(table: &Table) -> Self {
        Self {
            family: table.family().clone(),
            perimeter: table.perimeter(),
            pieces: table.pieces().to_vec(),
        }
    }
}

impl Table {
    pub fn to_json(&self) -> String {
        json::to_string(&TableDocument::of(self)).expect("table documents serialize")
    }

    /// SHA-256 of the canonical JSON, hex encoded.
    pub fn content_hash(&self) -> String {
        hex(&Sha256::digest(self.to_json().as_bytes()))
    }
}

pub(crate) fn hex(bytes: &[u8]) -> String {
    bytes.iter().fold(String::with_capacity(2 * bytes.len()), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

pub fn label_color(label: Label) -> &'static str {
    match label {
        Label::Focusing => "#d62728",
        Label::Dispersing => "#1f77b4",
        Label::Flat => "#333333",
    }
}

/// Drawing frame mapping table coordinates (y up) to SVG (y down).
#[derive(Debug, Clone, Copy)]
pub struct SvgFrame {
    pub lo: Point2,
    pub hi: Point2,
    pub scale: f64,
    pub margin: f64,
}

impl SvgFrame {
    pub fn fit(lo: Point2, hi: Point2, width_px: f64) -> Self {
        let span = (hi.x - lo.x).max(hi.y - lo.y).max(1e-12);
        Self {
            lo,
            hi,
            scale: width_px / span,
            margin: 10.0,
        }
    }

    pub fn map(&self, p: Point2) -> (f64, f64) {
        (
            self.margin + (p.x - self.lo.x) * self.scale,
            self.margin + (self.hi.y - p.y) * self.scale,
        )
    }

    pub fn size(&self) -> (f64, f64) {
        (
            2.0 * self.margin + (self.hi.x - self.lo.x) * self.scale,
            2.0 * self.margin + (self.hi.y - self.lo.y) * self.scale,
        )
    }

    pub fn header(&self) -> String {
        let (w, h) = self.size();
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w:.1}\" height=\"{h:.1}\" viewBox=\"0 0 {w:.3} {h:.3}\">\n"
        )
    }
}

pub fn table_frame(table: &Table, width_px: f64) -> SvgFrame {
    let mut lo = Point2::new(f64::INFINITY, f64::INFINITY);
    let mut hi = Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in table.pieces() {
        let (a, b) = p.shape.bbox();
        lo = Point2::new(lo.x.min(a.x), lo.y.min(a.y));
        hi = Point2::new(hi.x.max(b.x), hi.y.max(b.y));
    }
    SvgFrame::fit(lo, hi, width_px)
}

pub fn piece_path(frame: &SvgFrame, shape: &Shape) -> String {
    let (x0, y0) = frame.map(shape.start());
    let (x1, y1) = frame.map(shape.end());
    match shape {
        Shape::Segment(_) => format!("M{x0:.3},{y0:.3} L{x1:.3},{y1:.3}"),
        Shape::Arc(a) => {
            let r = a.radius * frame.scale;
            let large = (a.sweep.abs() > std::f64::consts::PI) as u8;
            // The y flip turns counterclockwise into clockwise on screen.
            let sweep_flag = (a.sweep < 0.0) as u8;
            format!("M{x0:.3},{y0:.3} A{r:.3},{r:.3} 0 {large} {sweep_flag} {x1:.3},{y1:.3}")
        }
    }
}

pub fn table_svg_body(table: &Table, frame: &SvgFrame) -> String {
    let mut out = String::new();
    let stroke = (frame.size().0 / 800.0).max(0.5);
    for p in table.pieces() {
        let _ = writeln!(
            out,
            "<path d=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"{stroke:.2}\"/>",
            piece_path(frame, &p.shape),
            label_color(p.label)
        );
    }
    out
}

pub fn table_svg(table: &Table, width_px: f64) -> String {
    let frame = table_frame(table, width_px);
    let mut out = frame.header();
    out.push_str(&table_svg_body(table, &frame));
    out.push_str("</svg>\n");
    out
}
