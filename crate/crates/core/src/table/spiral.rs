//! The double-spiral table: the two strips are replaced by chains of right
//! trapezoids that first turn through fixed prefix angles and then wind
//! together around the bulk as a regular double spiral.
//!
//! Layout (table units, bulk is the unit square):
//! * the right band leaves through the opening `(1,0)-(1,h)` heading east,
//!   the left band through `(0,0)-(0,h)` heading west;
//! * both prefixes turn by `pi/8` per corner; the right one needs 4 turns and
//!   the left one 12 to head north at the join point;
//! * the regular part is centred at `A = (x_join - r0, h + join_rise)` with corners
//!   `A + rho_j (cos j g, sin j g)`, `rho_j = rho_0 / cos(g)^j`, `g = 2 pi / N`.
//!   Right band: inner wall `rho_0 = r0`, outer `r0 + h^R`. Left band: inner
//!   wall is the right band's outer wall, outer wall the right band's inner
//!   wall one round later.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use serde::{Deserialize, Serialize};

use crate::geometry::{Point2, SegmentPiece, Shape};
use crate::{Error, Result};

use super::c1::{check_c1, compute_h_o, C1Config, C1Report};
use super::main_table::{arc_through, build_main_table, MainTableParams};
use super::measure::{area_term, convex_hull, hull_diameter};
use super::{BoundaryPiece, CorridorTag, Label, Side, Table, TableFamily};

/// Initial ray used when none is given (see [`choose_r0`]).
pub const DEFAULT_R0: f64 = 3.0;
/// Prefix turning angle, in units of `pi`.
const PREFIX_STEP: f64 = PI / 8.0;
const PREFIX_TURNS_R: usize = 4;
const PREFIX_TURNS_L: usize = 12;

/// `cos(2 pi / n)^(-n) - 1`, evaluated without cancellation.
pub fn wrap_factor(n_bar: u64) -> f64 {
    let n = n_bar as f64;
    let s = (PI / n).sin();
    // ln cos(2x) = ln(1 - 2 sin^2 x)
    (-n * (-2.0 * s * s).ln_1p()).exp_m1()
}

/// Strip height reached by a regular spiral with `n_bar` corners per round.
pub fn spiral_height(r0: f64, n_bar: u64, k4: f64) -> f64 {
    r0 * wrap_factor(n_bar) / k4
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpiralOptions {
    pub r0: Option<f64>,
    pub x_join: f64,
    /// Height of the join point above the top of the openings.
    pub join_rise: f64,
    /// First (westward) edge of the left prefix.
    pub left_lead: f64,
    /// Edges of the left prefix's two turning groups.
    pub left_turn_edge: f64,
    /// Southward edge of the left prefix.
    pub left_drop: f64,
    pub n_bar_min: u64,
    /// Above this many pieces only the first two rounds are materialized
    /// for the intersection audit.
    pub materialize_limit: usize,
    pub c1: C1Config,
}

impl Default for SpiralOptions {
    fn default() -> Self {
        Self {
            r0: None,
            x_join: 2.0,
            join_rise: 0.5,
            left_lead: 0.3,
            left_turn_edge: 0.15,
            left_drop: 0.3,
            n_bar_min: 17,
            materialize_limit: 400_000,
            c1: C1Config::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Trapezoid {
    /// Shorter leg.
    pub h: f64,
    /// Shorter base.
    pub l: f64,
    pub gamma: f64,
}

impl Trapezoid {
    pub fn area(&self) -> f64 {
        0.5 * (2.0 * self.l + self.h * self.gamma.tan()) * self.h
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpiralParams {
    pub r0: f64,
    pub m_r: usize,
    pub m_l: usize,
    pub gamma_prefix_r: Vec<f64>,
    pub gamma_prefix_l: Vec<f64>,
    pub n_bar: u64,
    pub rounds: u64,
    pub n_r: u64,
    pub n_l: u64,
    pub h: f64,
    pub w0: f64,
    pub k4: f64,
    pub center: Point2,
}

/// Wall geometry of one band's prefix.
#[derive(Debug, Clone, PartialEq)]
struct Prefix {
    inner: Vec<Point2>,
    outer: Vec<Point2>,
    traps: Vec<Trapezoid>,
}

/// Corner recursion: edges with directions `k_e * pi/8` and lengths `lens`,
/// the last turn into the north-heading regular part.
fn prefix(start: Point2, ks: &[i32], lens: &[f64], h: f64, k_end: i32) -> Prefix {
    let theta = |k: i32| k as f64 * PREFIX_STEP;
    let right = |t: f64| Point2::new(t.sin(), -t.cos());
    let m = ks.len();
    let mut inner = vec![start];
    let mut widths = vec![h];
    let mut traps = Vec::with_capacity(m);
    for e in 0..m {
        let next = if e + 1 < m { ks[e + 1] } else { k_end };
        let gamma = theta(next) - theta(ks[e]);
        let c = inner[e] + Point2::from_angle(theta(ks[e])) * lens[e];
        inner.push(c);
        traps.push(Trapezoid {
            h: widths[e],
            l: lens[e],
            gamma,
        });
        widths.push(widths[e] / gamma.cos());
    }
    let mut outer = Vec::with_capacity(m + 1);
    for e in 0..=m {
        let k = if e < m { ks[e] } else { k_end };
        outer.push(inner[e] + right(theta(k)) * widths[e]);
    }
    Prefix {
        inner,
        outer,
        traps,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpiralLayout {
    pub params: SpiralParams,
    pub k_d: f64,
    pub k_f: f64,
    pub h_o: f64,
    pr: Prefix,
    pl: Prefix,
    /// Width of the right band where the regular part starts.
    h_r: f64,
    cos_g: f64,
}

impl SpiralLayout {
    /// Lay out the double spiral for strip height `h`, ray `r0`, `n_bar`
    /// corners per round and `rounds` complete rounds.
    pub fn new(
        k_d: f64,
        k_f: f64,
        h_o: f64,
        r0: f64,
        n_bar: u64,
        rounds: u64,
        opts: &SpiralOptions,
    ) -> Result<Self> {
        let cp = PREFIX_STEP.cos();
        let k4 = cp.powi(-(PREFIX_TURNS_R as i32)) + cp.powi(-(PREFIX_TURNS_L as i32));
        let h = spiral_height(r0, n_bar, k4);
        let (xj, yj) = (opts.x_join, h + opts.join_rise);
        let s_sum: f64 = (1..4).map(|k| (k as f64 * PREFIX_STEP).sin()).sum();

        let t = (yj - h) / s_sum;
        let lead_r = xj - 1.0 - (yj - h);
        if !(t > 0.0 && lead_r > 0.0) {
            return Err(Error::Geometry(format!("right prefix degenerate for h = {h}")));
        }
        let pr = prefix(
            Point2::new(1.0, h),
            &[0, 1, 2, 3],
            &[lead_r, t, t, t],
            h,
            4,
        );
        let h_r = h / cp.powi(PREFIX_TURNS_R as i32);

        let (u, v, l1) = (opts.left_turn_edge, opts.left_drop, opts.left_lead);
        let u2 = (yj + 2.0 * s_sum * u + v) / s_sum;
        let w = xj + h_r + l1 - s_sum * u2;
        if !(w > 0.0 && u2 > 0.0) {
            return Err(Error::Geometry("left prefix degenerate".into()));
        }
        let pl = prefix(
            Point2::new(0.0, 0.0),
            &[8, 9, 10, 11, 12, 13, 14, 15, 16, 17, 18, 19],
            &[l1, u, u, u, v, u, u, u, w, u2, u2, u2],
            h,
            20,
        );

        let g = TAU / n_bar as f64;
        let params = SpiralParams {
            r0,
            m_r: PREFIX_TURNS_R,
            m_l: PREFIX_TURNS_L,
            gamma_prefix_r: pr.traps.iter().map(|t| t.gamma).collect(),
            gamma_prefix_l: pl.traps.iter().map(|t| t.gamma).collect(),
            n_bar,
            rounds,
            n_r: PREFIX_TURNS_R as u64 + rounds * n_bar,
            n_l: PREFIX_TURNS_L as u64 + rounds * n_bar,
            h,
            w0: r0 * wrap_factor(n_bar),
            k4,
            center: Point2::new(xj - r0, yj),
        };
        let mut layout = Self {
            params,
            k_d,
            k_f,
            h_o,
            pr,
            pl,
            h_r,
            cos_g: g.cos(),
        };
        // Snap the prefix ends onto the regular corners so shared points
        // are bitwise equal.
        let w0 = layout.wall0(0);
        let w1 = layout.wall1(0);
        let wn = layout.wall0(n_bar);
        *layout.pr.inner.last_mut().unwrap() = w0;
        *layout.pr.outer.last_mut().unwrap() = w1;
        *layout.pl.inner.last_mut().unwrap() = w1;
        *layout.pl.outer.last_mut().unwrap() = wn;
        Ok(layout)
    }

    fn ray_dir(&self, j: u64) -> Point2 {
        let n = self.params.n_bar;
        Point2::from_angle((j % n) as f64 * TAU / n as f64)
    }

    fn growth(&self, j: u64) -> f64 {
        self.cos_g.powf(-(j as f64))
    }

    /// Corner `j` of the right band's inner wall.
    pub fn wall0(&self, j: u64) -> Point2 {
        self.params.center + self.ray_dir(j) * (self.params.r0 * self.growth(j))
    }

    /// Corner `j` of the wall shared by the two bands.
    pub fn wall1(&self, j: u64) -> Point2 {
        self.params.center + self.ray_dir(j) * ((self.params.r0 + self.h_r) * self.growth(j))
    }

    fn regular_len(&self) -> u64 {
        self.params.rounds * self.params.n_bar
    }

    /// Trapezoids of one band, prefix first.
    pub fn trapezoids(&self, side: Side) -> impl Iterator<Item = Trapezoid> + '_ {
        let (pre, rho, width) = match side {
            Side::Right => (&self.pr, self.params.r0, self.h_r),
            Side::Left => (
                &self.pl,
                self.params.r0 + self.h_r,
                self.params.w0 - self.h_r,
            ),
        };
        let g = TAU / self.params.n_bar as f64;
        let tg = g.tan();
        pre.traps.iter().copied().chain((0..self.regular_len()).map(move |j| {
            let s = self.growth(j);
            Trapezoid {
                h: width * s,
                l: rho * s * tg,
                gamma: g,
            }
        }))
    }

    pub fn piece_count(&self) -> usize {
        let reg = self.regular_len() as usize;
        1 + 3 + 4 * reg + 2 * (PREFIX_TURNS_R + PREFIX_TURNS_L) + 1 + 2
    }

    /// Boundary in counterclockwise order.
    pub fn pieces(&self) -> Result<Vec<BoundaryPiece>> {
        let n = self.params.n_bar;
        let reg = self.regular_len();
        let mut out = Vec::with_capacity(self.piece_count());
        let seg = |a: Point2, b: Point2| Shape::Segment(SegmentPiece::new(a, b));
        let flat = |a: Point2, b: Point2, side, trapezoid: u64, end_cap| {
            BoundaryPiece::new(seg(a, b), Label::Flat).in_corridor(CorridorTag {
                side,
                trapezoid: trapezoid as u32,
                end_cap,
            })
        };
        let pt = Point2::new;
        let h = self.params.h;
        out.push(BoundaryPiece::new(
            Shape::Arc(arc_through(pt(0.0, 0.0), pt(1.0, 0.0), self.k_f)?),
            Label::Focusing,
        ));

        let mr = PREFIX_TURNS_R as u64;
        for e in 0..PREFIX_TURNS_R {
            out.push(flat(self.pr.outer[e], self.pr.outer[e + 1], Side::Right, e as u64 + 1, false));
        }
        for j in 0..reg {
            out.push(flat(self.wall1(j), self.wall1(j + 1), Side::Right, mr + j + 1, false));
        }
        out.push(flat(self.wall1(reg), self.wall0(reg), Side::Right, mr + reg, true));
        for j in (0..reg).rev() {
            out.push(flat(self.wall0(j + 1), self.wall0(j), Side::Right, mr + j + 1, false));
        }
        for e in (0..PREFIX_TURNS_R).rev() {
            out.push(flat(self.pr.inner[e + 1], self.pr.inner[e], Side::Right, e as u64 + 1, false));
        }

        for (a, b) in [
            (pt(1.0, h), pt(1.0, 1.0)),
            (pt(1.0, 1.0), pt(0.0, 1.0)),
            (pt(0.0, 1.0), pt(0.0, h)),
        ] {
            out.push(BoundaryPiece::new(
                Shape::Arc(arc_through(a, b, self.k_d)?),
                Label::Dispersing,
            ));
        }

        let ml = PREFIX_TURNS_L as u64;
        for e in 0..PREFIX_TURNS_L {
            out.push(flat(self.pl.outer[e], self.pl.outer[e + 1], Side::Left, e as u64 + 1, false));
        }
        for j in 0..reg {
            out.push(flat(self.wall0(n + j), self.wall0(n + j + 1), Side::Left, ml + j + 1, false));
        }
        out.push(flat(self.wall0(n + reg), self.wall1(reg), Side::Left, ml + reg, true));
        for j in (0..reg).rev() {
            out.push(flat(self.wall1(j + 1), self.wall1(j), Side::Left, ml + j + 1, false));
        }
        // The last left edge runs along the right band's last outer base;
        // split it where that base starts so the two walls share endpoints.
        let split = self.pr.outer[PREFIX_TURNS_R - 1];
        for e in (0..PREFIX_TURNS_L).rev() {
            let (a, b) = (self.pl.inner[e + 1], self.pl.inner[e]);
            if e == PREFIX_TURNS_L - 1 && on_open_segment(split, a, b) {
                out.push(flat(a, split, Side::Left, e as u64 + 1, false));
                out.push(flat(split, b, Side::Left, e as u64 + 1, false));
            } else {
                out.push(flat(a, b, Side::Left, e as u64 + 1, false));
            }
        }
        Ok(out)
    }

    pub fn family(&self) -> TableFamily {
        TableFamily::Spiral {
            k_d: self.k_d,
            k_f: self.k_f,
            h: self.params.h,
            r0: self.params.r0,
            n_bar: self.params.n_bar,
            rounds: self.params.rounds,
        }
    }

    pub fn to_table(&self) -> Result<Table> {
        Table::new(self.pieces()?, self.family())
    }

    /// Closed bulk (openings included), for area bookkeeping.
    fn bulk_area(&self) -> Result<f64> {
        let pt = Point2::new;
        let h = self.params.h;
        let shapes = [
            Shape::Arc(arc_through(pt(0.0, 0.0), pt(1.0, 0.0), self.k_f)?),
            Shape::Segment(SegmentPiece::new(pt(1.0, 0.0), pt(1.0, h))),
            Shape::Arc(arc_through(pt(1.0, h), pt(1.0, 1.0), self.k_d)?),
            Shape::Arc(arc_through(pt(1.0, 1.0), pt(0.0, 1.0), self.k_d)?),
            Shape::Arc(arc_through(pt(0.0, 1.0), pt(0.0, h), self.k_d)?),
            Shape::Segment(SegmentPiece::new(pt(0.0, h), pt(0.0, 0.0))),
        ];
        Ok(shapes.iter().map(area_term).sum())
    }

    pub fn area(&self) -> Result<f64> {
        let spirals: f64 = [Side::Right, Side::Left]
            .into_iter()
            .map(|s| self.trapezoids(s).map(|t| t.area()).sum::<f64>())
            .sum();
        Ok(self.bulk_area()? + spirals)
    }

    pub fn diameter(&self) -> (f64, Point2, Point2) {
        let n = self.params.n_bar;
        let reg = self.regular_len();
        let mut pts: Vec<Point2> = Vec::new();
        pts.extend(&self.pr.inner);
        pts.extend(&self.pr.outer);
        pts.extend(&self.pl.inner);
        pts.extend(&self.pl.outer);
        pts.extend([Point2::new(0.0, 1.0), Point2::new(1.0, 1.0)]);
        // Only the outermost round can reach the hull.
        let from = (reg + n).saturating_sub(2 * n);
        pts.extend((from..=reg + n).map(|j| self.wall0(j)));
        pts.extend((reg.saturating_sub(n)..=reg).map(|j| self.wall1(j)));
        hull_diameter(&convex_hull(&pts))
    }
}

fn on_open_segment(p: Point2, a: Point2, b: Point2) -> bool {
    let e = b - a;
    let t = (p - a).dot(e) / e.norm_sq();
    let off = (p - a).cross(e).abs() / e.norm();
    off < 1e-9 && t > 1e-9 && t < 1.0 - 1e-9
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpiralCertificate {
    pub c1: C1Report,
    pub h: f64,
    pub h_o: f64,
    pub h_in_bracket: bool,
    pub counterclockwise: bool,
    pub rational_angles: bool,
    pub no_intersections: bool,
    pub intersection_error: Option<String>,
    /// Rounds materialized for the intersection audit.
    pub audited_rounds: u64,
    pub shared_walls: usize,
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
    pub sum_l_r: f64,
    pub sum_l_l: f64,
    pub l_o: f64,
    pub length_ok: bool,
    pub area: f64,
    pub diameter: f64,
}

impl SpiralCertificate {
    pub fn passes(&self) -> bool {
        self.c1.ok
            && self.h_in_bracket
            && self.counterclockwise
            && self.rational_angles
            && self.no_intersections
            && self.length_ok
    }
}

#[derive(Debug, Clone)]
pub struct SpiralTable {
    pub layout: SpiralLayout,
    /// Present when the full boundary was materialized.
    pub table: Option<Table>,
    pub certificate: SpiralCertificate,
}

/// Largest `n_bar >= n_min` whose height still reaches `h_o`.
fn choose_n_bar(r0: f64, k4: f64, h_o: f64, n_min: u64) -> Result<u64> {
    if spiral_height(r0, n_min, k4) < h_o {
        return Err(Error::NoSolution(format!(
            "no N >= {n_min} gives h >= h_o = {h_o}"
        )));
    }
    let (mut lo, mut hi) = (n_min, n_min.max(2) * 2);
    while spiral_height(r0, hi, k4) >= h_o {
        lo = hi;
        hi *= 2;
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if spiral_height(r0, mid, k4) >= h_o {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

pub fn rounds_for(r0: f64, k_f: f64) -> u64 {
    (1.0 / (TAU * r0 * k_f)).floor() as u64 + 1
}

/// Layout for a given `h_o`, without certification.
pub fn spiral_layout(k_d: f64, k_f: f64, h_o: f64, r0: f64, opts: &SpiralOptions) -> Result<SpiralLayout> {
    let cp = PREFIX_STEP.cos();
    let k4 = cp.powi(-(PREFIX_TURNS_R as i32)) + cp.powi(-(PREFIX_TURNS_L as i32));
    let n_bar = choose_n_bar(r0, k4, h_o, opts.n_bar_min)?;
    SpiralLayout::new(k_d, k_f, h_o, r0, n_bar, rounds_for(r0, k_f), opts)
}

fn audit(layout: &SpiralLayout, opts: &SpiralOptions) -> (Option<Table>, u64, Result<usize>) {
    if layout.piece_count() <= opts.materialize_limit {
        match layout.to_table() {
            Ok(t) => {
                let r = t.check_simple();
                (Some(t), layout.params.rounds, r)
            }
            Err(e) => (None, layout.params.rounds, Err(e)),
        }
    } else {
        // Later rounds are scaled copies of the second one.
        let rounds = layout.params.rounds.min(2);
        let mut short = layout.clone();
        short.params.rounds = rounds;
        let r = short.to_table().and_then(|t| t.check_simple());
        (None, rounds, r)
    }
}

pub fn certify_spiral(layout: &SpiralLayout, c1: C1Report, opts: &SpiralOptions) -> Result<(Option<Table>, SpiralCertificate)> {
    let p = &layout.params;
    let (table, audited_rounds, simple) = audit(layout, opts);
    let l_o = 1.0 / layout.k_f;
    let mut k1: f64 = 0.0;
    let mut k3: f64 = 0.0;
    let mut sums = [0.0; 2];
    let mut ccw = true;
    for (i, side) in [Side::Right, Side::Left].into_iter().enumerate() {
        let mut last_h = 0.0;
        for t in layout.trapezoids(side) {
            sums[i] += t.l;
            k3 = k3.max(t.h * t.gamma.tan() / t.l);
            ccw &= t.gamma > 0.0 && t.gamma < FRAC_PI_2;
            last_h = t.h;
        }
        k1 = k1.max(last_h / layout.h_o);
    }
    // Prefix turns are pi/8, regular turns 2 pi / n_bar.
    let rational_angles = p
        .gamma_prefix_r
        .iter()
        .chain(&p.gamma_prefix_l)
        .all(|g| (g / PREFIX_STEP - 1.0).abs() < 1e-12);
    let (shared_walls, intersection_error) = match simple {
        Ok(n) => (n, None),
        Err(e) => (0, Some(e.to_string())),
    };
    let (diameter, _, _) = layout.diameter();
    let cert = SpiralCertificate {
        c1,
        h: p.h,
        h_o: layout.h_o,
        h_in_bracket: p.h >= layout.h_o && p.h <= 2.0 * layout.h_o,
        counterclockwise: ccw,
        rational_angles,
        no_intersections: intersection_error.is_none(),
        intersection_error,
        audited_rounds,
        shared_walls,
        k1,
        k2: sums[0].max(sums[1]) / l_o,
        k3,
        sum_l_r: sums[0],
        sum_l_l: sums[1],
        l_o,
        length_ok: sums[0] >= l_o && sums[1] >= l_o,
        area: layout.area()?,
        diameter,
    };
    Ok((table, cert))
}

pub fn build_spiral_table(k_d: f64, k_f: f64, opts: &SpiralOptions) -> Result<SpiralTable> {
    let h_o = compute_h_o(k_d, k_f, &opts.c1)?.h_o;
    build_spiral_with_h_o(k_d, k_f, h_o, opts)
}

pub fn build_spiral_with_h_o(k_d: f64, k_f: f64, h_o: f64, opts: &SpiralOptions) -> Result<SpiralTable> {
    let r0 = opts.r0.unwrap_or(DEFAULT_R0);
    let layout = spiral_layout(k_d, k_f, h_o, r0, opts)?;
    // The bulk is that of the strip table with the same opening.
    let bulk = build_main_table(&MainTableParams::new(k_d, k_f, layout.params.h, 1.0))?;
    let c1 = check_c1(&bulk, &opts.c1)?;
    let (table, certificate) = certify_spiral(&layout, c1, opts)?;
    Ok(SpiralTable {
        layout,
        table,
        certificate,
    })
}

/// Smallest integer `r0 >= 3` whose spiral passes the intersection audit.
pub fn choose_r0(k_d: f64, k_f: f64, h_o: f64, opts: &SpiralOptions) -> Result<f64> {
    for r in 3..=40 {
        let r0 = r as f64;
        let Ok(layout) = spiral_layout(k_d, k_f, h_o, r0, opts) else {
            continue;
        };
        if audit(&layout, opts).2.is_ok() {
            return Ok(r0);
        }
    }
    Err(Error::NoSolution("no r0 in 3..=40 clears the bulk".into()))
}
