//! Orbit dumps: CSV rows and an SVG overlay on the table drawing.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::geometry::Point2;
use crate::table::{table_frame, table_svg_body, Table};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitRow {
    pub step: u64,
    pub s: f64,
    pub alpha: f64,
    pub tau: f64,
    pub piece_label: String,
    pub n_flat_hits: u64,
}

pub fn orbit_csv_header() -> &'static str {
    "step,s,alpha,tau,piece_label,n_flat_hits"
}

pub fn orbit_csv(rows: &[OrbitRow]) -> String {
    let mut out = String::from(orbit_csv_header());
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{:.16e},{:.16e},{:.16e},{},{}",
            r.step, r.s, r.alpha, r.tau, r.piece_label, r.n_flat_hits
        );
    }
    out
}

/// The table with the trajectory through `points` drawn on top.
pub fn orbit_svg(table: &Table, points: &[Point2], width_px: f64) -> String {
    let frame = table_frame(table, width_px);
    let mut out = frame.header();
    out.push_str(&table_svg_body(table, &frame));
    if !points.is_empty() {
        let mut d = String::new();
        for (i, p) in points.iter().enumerate() {
            let (x, y) = frame.map(*p);
            let _ = write!(d, "{}{x:.3},{y:.3} ", if i == 0 { "M" } else { "L" });
        }
        let _ = writeln!(
            out,
            "<path d=\"{}\" fill=\"none\" stroke=\"#2ca02c\" stroke-width=\"0.6\" stroke-opacity=\"0.8\"/>",
            d.trim_end()
        );
    }
    out.push_str("</svg>\n");
    out
}
