mod common;

use std::f64::consts::{PI, SQRT_2};

use flatfocus::geometry::{ArcPiece, Point2, SegmentPiece, Shape};
use flatfocus::table::{
    build_main_table, build_spiral_table, check_c1, compute_h_o, table_area, table_diameter, table_svg, wrap_factor,
    BoundaryPiece, C1Config, Label, MainTableParams, Side, SpiralOptions, Table, TableDocument, TableFamily,
};

/// Arc from `a` to `b` with the given radius, bulging into the table (the
/// centre lies to the right of the direction of travel).
fn dispersing_arc(a: Point2, b: Point2, r: f64) -> BoundaryPiece {
    let d = b - a;
    let c = d.norm();
    let right = Point2::new(d.y, -d.x).normalized();
    let center = (a + b) * 0.5 + right * (r * r - c * c / 4.0).sqrt();
    BoundaryPiece::new(
        Shape::Arc(ArcPiece {
            center,
            radius: r,
            start_angle: (a - center).angle(),
            sweep: -2.0 * (c / (2.0 * r)).asin(),
        }),
        Label::Dispersing,
    )
}

#[test]
fn bulk_area_matches_circular_segments() {
    let p = Point2::new;
    let pieces = vec![
        BoundaryPiece::new(Shape::Segment(SegmentPiece::new(p(0.0, 0.0), p(1.0, 0.0))), Label::Flat),
        dispersing_arc(p(1.0, 0.0), p(1.0, 1.0), 1.0),
        dispersing_arc(p(1.0, 1.0), p(0.0, 1.0), 1.0),
        dispersing_arc(p(0.0, 1.0), p(0.0, 0.0), 1.0),
    ];
    let t = Table::new(pieces, TableFamily::Custom { name: "bulk".into() }).unwrap();
    let segment = (PI / 3.0 - (PI / 3.0).sin()) / 2.0;
    assert!((table_area(&t) - (1.0 - 3.0 * segment)).abs() < 1e-12);
    let sq = common::unit_square();
    assert!((table_area(&sq) - 1.0).abs() < 1e-15);
    assert!((table_diameter(&sq).0 - SQRT_2).abs() < 1e-15);
}

/// Points shared by two circles that lie on both arcs.
fn arc_crossings(a: &ArcPiece, b: &ArcPiece) -> Vec<Point2> {
    let d = b.center - a.center;
    let dist = d.norm();
    if dist > a.radius + b.radius || dist < (a.radius - b.radius).abs() {
        return vec![];
    }
    let x = (dist * dist + a.radius * a.radius - b.radius * b.radius) / (2.0 * dist);
    let y = (a.radius * a.radius - x * x).max(0.0).sqrt();
    let e = d * (1.0 / dist);
    let n = e.perp_ccw();
    [a.center + e * x + n * y, a.center + e * x - n * y]
        .into_iter()
        .filter(|&q| a.param_of(q, 1e-12).is_some() && b.param_of(q, 1e-12).is_some())
        .collect()
}

#[test]
fn adjacent_dispersing_arcs_meet_only_at_corners() {
    let t = build_main_table(&MainTableParams::new(-(SQRT_2 - 1e-3), 0.1, 0.05, 10.0)).unwrap();
    let arcs: Vec<ArcPiece> = t
        .pieces()
        .iter()
        .filter(|p| p.label == Label::Dispersing)
        .filter_map(|p| match p.shape {
            Shape::Arc(a) => Some(a),
            Shape::Segment(_) => None,
        })
        .collect();
    assert_eq!(arcs.len(), 3);
    for i in 0..arcs.len() {
        for j in i + 1..arcs.len() {
            for q in arc_crossings(&arcs[i], &arcs[j]) {
                let ends = [arcs[i].start(), arcs[i].end()];
                assert!(ends.iter().any(|e| e.dist(q) < 1e-9), "arcs {i},{j} cross at {q:?}");
            }
        }
    }
    assert!(t.check_simple().is_ok());
}

#[test]
fn c1_margin_changes_sign_at_h_o() {
    let opt = common::optimal(0.1);
    let cfg = C1Config::default();
    let at = |h: f64| check_c1(&build_main_table(&MainTableParams { h, ..opt.params }).unwrap(), &cfg).unwrap();
    let here = at(opt.params.h);
    assert!(here.margin >= -1e-12 && here.margin <= here.eps_grid, "{here:?}");
    assert!(at(2.0 * opt.params.h).margin > 0.0);
    let below = at(0.5 * opt.params.h);
    assert!(below.margin < 0.0 && !below.ok);
    assert!(opt.search.monotone);
    assert!(opt.certificate.passes());
    assert_eq!(opt.params.l, 1.0 / 0.1);
    assert!(opt.certificate.c2_margin >= 0.0);
}

#[test]
fn h_o_scales_linearly_in_k_f() {
    let cfg = C1Config::default();
    let ks = [1e-1, 3e-2, 1e-2, 3e-3, 1e-3];
    let ratios: Vec<f64> = ks.iter().map(|&k| compute_h_o(-1.0, k, &cfg).unwrap().h_o / k).collect();
    let (lo, hi) = ratios.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &r| (a.min(r), b.max(r)));
    assert!(hi / lo < 3.0, "{ratios:?}");
    for k in [1e-2, 1e-3] {
        let r = compute_h_o(-1.0, k / 2.0, &cfg).unwrap().h_o / compute_h_o(-1.0, k, &cfg).unwrap().h_o;
        assert!((r - 0.5).abs() < 0.05, "k_f = {k}: {r}");
    }
}

#[test]
fn optimal_family_area_bounded_diameter_not() {
    let ks = [0.1, 0.01, 0.001];
    let areas: Vec<f64> = ks.iter().map(|&k| common::optimal(k).certificate.area).collect();
    let diams: Vec<f64> = ks.iter().map(|&k| common::optimal(k).certificate.diameter).collect();
    // The strips carry area about 2 h_o / k_f, which stays of order one.
    assert!(areas.iter().all(|&a| a < 12.0), "{areas:?}");
    assert!(areas[2] < 1.05 * areas[1] && areas[1] < 1.05 * areas[0], "{areas:?}");
    for (k, d) in ks.iter().zip(&diams) {
        assert!(d * k > 1.5 && d * k < 3.5, "k_f = {k}: diameter {d}");
    }
    assert_eq!(common::optimal(0.01).params.l, 100.0);
}

#[test]
fn spiral_family_is_bounded() {
    let mut diams = vec![];
    let mut ks = vec![];
    for k_f in [0.1, 0.03, 0.01] {
        let sp = build_spiral_table(-1.0, k_f, &SpiralOptions::default()).unwrap();
        let c = &sp.certificate;
        assert!(c.passes(), "k_f = {k_f}: {c:?}");
        assert!(c.sum_l_r >= c.l_o && c.sum_l_l >= c.l_o);
        diams.push(c.diameter);
        ks.push((c.k1, c.k2, c.k3));
        let p = &sp.layout.params;
        // Consecutive regular trapezoids grow by 1/cos(2 pi / N); a full
        // round of N of them by 1 + wrap_factor(N).
        let traps: Vec<_> = sp.layout.trapezoids(Side::Right).collect();
        let m = p.m_r;
        let n = p.n_bar as usize;
        let step = 1.0 / (2.0 * PI / n as f64).cos();
        for w in traps[m..].windows(2) {
            assert!((w[1].h / w[0].h - step).abs() < 1e-12);
        }
        assert!((step.powi(n as i32) - (1.0 + wrap_factor(p.n_bar))).abs() < 1e-12);
        // Growth over the regular part stays bounded.
        let total = traps.last().unwrap().h / traps[m].h;
        assert!(total < 20.0, "k_f = {k_f}: {total}");
        // Area chain: each trapezoid is at most (2 + K_3)/2 times l h.
        for side in [Side::Right, Side::Left] {
            let (area, lh) = sp
                .layout
                .trapezoids(side)
                .fold((0.0, 0.0), |(a, b), t| (a + t.area(), b + t.l * t.h));
            assert!(area <= (2.0 + c.k3) / 2.0 * lh * (1.0 + 1e-12));
        }
        if let Some(t) = &sp.table {
            assert!(((table_area(t) - c.area) / c.area).abs() < 1e-9);
            assert!((table_diameter(t).0 - c.diameter).abs() < 1e-9 * c.diameter);
        }
    }
    let (lo, hi) = diams.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &d| (a.min(d), b.max(d)));
    assert!(hi / lo < 2.0, "{diams:?}");
    // The constants must not grow as k_f shrinks.
    for (k1, k2, k3) in &ks {
        assert!(*k1 <= 5.0 && *k2 <= 5.0 && *k3 <= 5.0, "{ks:?}");
    }
    assert!(ks[2].0 <= 1.1 * ks[0].0 && ks[2].1 <= 1.1 * ks[0].1 && ks[2].2 <= 1.1 * ks[0].2, "{ks:?}");
}

#[test]
fn wrap_factor_is_monotone() {
    let mut prev = f64::INFINITY;
    let mut n = 5u64;
    while n <= 1_000_000 {
        let w = wrap_factor(n);
        assert!(w < prev && w > 0.0);
        prev = w;
        n += 1 + n / 100;
    }
    for n in [10_000u64, 100_000, 1_000_000] {
        let v = n as f64 * wrap_factor(n) / (2.0 * PI * PI);
        assert!((0.99..=1.01).contains(&v));
    }
}

#[test]
fn exports_are_stable() {
    let t = &common::optimal(0.1).table;
    let json = t.to_json();
    let back: TableDocument = serde_json::from_str(&json).unwrap();
    assert_eq!(back, TableDocument::of(t));
    assert_eq!(t.content_hash(), t.content_hash());
    assert_eq!(t.content_hash().len(), 64);
    let svg = table_svg(t, 800.0);
    assert!(svg.starts_with("<svg") || svg.starts_with("<?xml"));
    for label in [Label::Focusing, Label::Dispersing, Label::Flat] {
        assert!(svg.contains(flatfocus::table::label_color(label)));
    }
    assert_eq!(svg, table_svg(t, 800.0));
}
