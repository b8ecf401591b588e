//! Oracles shared by the integration tests. Nothing here calls the
//! library's intersection or reflection code.
#![allow(dead_code)]

use std::f64::consts::{PI, TAU};
use std::sync::OnceLock;

use flatfocus::geometry::{Point2, Shape, Vec2};
use flatfocus::table::{build_optimal_table, C1Config, OptimalTable, Table};

fn angle_between(a: Vec2, b: Vec2) -> f64 {
    a.cross(b).atan2(a.dot(b))
}

fn arc_ends(c: Point2, r: f64, t0: f64, sweep: f64) -> (Point2, Point2) {
    (
        Point2::new(c.x + r * t0.cos(), c.y + r * t0.sin()),
        Point2::new(c.x + r * (t0 + sweep).cos(), c.y + r * (t0 + sweep).sin()),
    )
}

/// Winding number test with exact arc contributions.
pub fn inside(table: &Table, p: Point2) -> bool {
    let mut total = 0.0;
    for piece in table.pieces() {
        match piece.shape {
            Shape::Segment(s) => total += angle_between(s.a - p, s.b - p),
            Shape::Arc(a) => {
                let (s, e) = arc_ends(a.center, a.radius, a.start_angle, a.sweep);
                total += angle_between(s - p, e - p);
                // Arc plus the chord back encloses the circular segment.
                let mid_t = a.start_angle + a.sweep / 2.0;
                let mid = Point2::new(a.center.x + a.radius * mid_t.cos(), a.center.y + a.radius * mid_t.sin());
                let side = |q: Point2| (e - s).cross(q - s);
                let in_disc = (p - a.center).norm() < a.radius;
                if in_disc && side(p) * side(mid) > 0.0 {
                    total += TAU * a.sweep.signum();
                }
            }
        }
    }
    (total / TAU).round() != 0.0
}

fn in_sweep(c: Point2, t0: f64, sweep: f64, p: Point2) -> bool {
    let phi = (p.y - c.y).atan2(p.x - c.x);
    let d = if sweep > 0.0 { phi - t0 } else { t0 - phi };
    d.rem_euclid(TAU) <= sweep.abs()
}

fn piece_distance(shape: &Shape, p: Point2) -> f64 {
    match *shape {
        Shape::Segment(s) => {
            let e = s.b - s.a;
            let t = ((p - s.a).dot(e) / e.dot(e)).clamp(0.0, 1.0);
            (p - (s.a + e * t)).norm()
        }
        Shape::Arc(a) => {
            if in_sweep(a.center, a.start_angle, a.sweep, p) {
                ((p - a.center).norm() - a.radius).abs()
            } else {
                let (s, e) = arc_ends(a.center, a.radius, a.start_angle, a.sweep);
                (p - s).norm().min((p - e).norm())
            }
        }
    }
}

pub fn boundary_distance(table: &Table, p: Point2) -> (f64, usize) {
    table
        .pieces()
        .iter()
        .enumerate()
        .map(|(i, pc)| (piece_distance(&pc.shape, p), i))
        .fold((f64::INFINITY, 0), |a, b| if b.0 < a.0 { b } else { a })
}

fn inner_normal(shape: &Shape, q: Point2) -> Vec2 {
    match *shape {
        Shape::Segment(s) => {
            let e = (s.b - s.a).normalized();
            Vec2::new(-e.y, e.x)
        }
        Shape::Arc(a) => (a.center - q).normalized() * a.sweep.signum(),
    }
}

/// Next collision from `p` along unit `d` by marching: steps of the
/// distance to the boundary (which cannot cross it), at least `1e-5`, and
/// bisection once outside. Returns the hit point, the piece and the
/// reflected direction.
pub fn ray_march(table: &Table, p: Point2, d: Vec2) -> Option<(Point2, usize, Vec2)> {
    let at = |t: f64| p + d * t;
    let mut t = 0.0;
    loop {
        let (dist, _) = boundary_distance(table, at(t));
        let t_new = t + dist.max(1e-5);
        if !inside(table, at(t_new)) {
            let (mut lo, mut hi) = (t, t_new);
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                if inside(table, at(mid)) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let q = at(0.5 * (lo + hi));
            let (_, i) = boundary_distance(table, q);
            let n = inner_normal(&table.piece(i).shape, q);
            return Some((q, i, d - n * (2.0 * d.dot(n))));
        }
        t = t_new;
        if t > 1e7 {
            return None;
        }
    }
}

/// Two-sample Kolmogorov-Smirnov statistic.
pub fn ks_statistic(a: &mut [f64], b: &mut [f64]) -> f64 {
    a.sort_by(|x, y| x.total_cmp(y));
    b.sort_by(|x, y| x.total_cmp(y));
    let (n, m) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    d
}

/// Critical KS value at level `alpha` for sample sizes `n`, `m`.
pub fn ks_critical(alpha: f64, n: usize, m: usize) -> f64 {
    let c = (-0.5 * (alpha / 2.0).ln()).sqrt();
    c * ((n + m) as f64 / (n as f64 * m as f64)).sqrt()
}

pub fn optimal(k_f: f64) -> &'static OptimalTable {
    static T1: OnceLock<OptimalTable> = OnceLock::new();
    static T2: OnceLock<OptimalTable> = OnceLock::new();
    static T3: OnceLock<OptimalTable> = OnceLock::new();
    let cell = match k_f {
        x if x == 0.1 => &T1,
        x if x == 0.01 => &T2,
        x if x == 0.001 => &T3,
        _ => panic!("no cached optimal table for k_f = {k_f}"),
    };
    cell.get_or_init(|| build_optimal_table(-1.0, k_f, &C1Config::default()).unwrap())
}

pub fn unit_square() -> Table {
    Table::flat_polygon(
        &[
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(1.0, 1.0),
            Point2::new(0.0, 1.0),
        ],
        "unit_square",
    )
    .unwrap()
}

pub fn half_pi() -> f64 {
    PI / 2.0
}
