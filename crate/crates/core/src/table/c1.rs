//! The chord-in-disc condition between dispersing and focusing points and
//! the search for the smallest strip height satisfying it.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::geometry::{Point2, Shape};
use crate::{Error, Result};

use super::main_table::{build_main_table, MainTableParams};
use super::{Label, Table};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct C1Config {
    /// Grid points along each of the two arclength ranges.
    pub grid: usize,
    /// Number of smallest grid values refined by golden-section search.
    pub refine: usize,
    pub h_lo: f64,
    pub h_hi: f64,
    /// Relative bisection tolerance on `h`.
    pub h_rel_tol: f64,
}

impl Default for C1Config {
    fn default() -> Self {
        Self {
            grid: 400,
            refine: 8,
            h_lo: 1e-6,
            h_hi: 0.5,
            h_rel_tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct C1Report {
    pub ok: bool,
    pub margin: f64,
    pub witness: (f64, f64),
    pub witness_points: (Point2, Point2),
    pub eps_grid: f64,
    pub evaluations: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HoSearch {
    pub h_o: f64,
    /// `(h, margin)` for every bisection probe, in probe order.
    pub trace: Vec<(f64, f64)>,
    /// Whether the margin was nondecreasing in `h` over the probes.
    pub monotone: bool,
}

/// Margin of `R - |p - c|` computed without cancellation.
fn disc_margin(p: Point2, center: Point2, radius: f64) -> f64 {
    let d2 = (p - center).norm_sq();
    (radius * radius - d2) / (radius + d2.sqrt())
}

/// Signed margin of `I(s', s'') in D_4(s'')` for points given by piece
/// shape and local arclength: the smaller of the two chord endpoints'
/// margins.
fn margin_local(d: &Shape, ud: f64, f: &Shape, uf: f64) -> f64 {
    let p1 = d.point_at(ud);
    let kd = d.curvature();
    let r2 = 1.0 / (2.0 * kd.abs());
    let c2 = p1 - d.inner_normal_at(ud) * r2;
    let p2 = f.point_at(uf);
    let e = (p2 - p1).normalized();
    let q = p1 + e * (-2.0 * e.dot(p1 - c2));
    let kf = f.curvature();
    let r4 = 1.0 / (4.0 * kf);
    let c4 = p2 + f.inner_normal_at(uf) * r4;
    disc_margin(p1, c4, r4).min(disc_margin(q, c4, r4))
}

/// Signed margin at a pair of global arclengths.
pub fn c1_margin(table: &Table, s_d: f64, s_f: f64) -> Result<f64> {
    let (i, ud) = table.locate(s_d);
    let (j, uf) = table.locate(s_f);
    if table.piece(i).label != Label::Dispersing || table.piece(j).label != Label::Focusing {
        return Err(Error::InvalidParameter(
            "c1_margin needs a dispersing and a focusing point".into(),
        ));
    }
    Ok(margin_local(&table.piece(i).shape, ud, &table.piece(j).shape, uf))
}

/// Grid points `(piece, u)` spread over the pieces of one label, each
/// piece sampled inclusive of its endpoints.
fn sample_label(table: &Table, label: Label, n: usize) -> (Vec<(usize, f64)>, f64) {
    let ids: Vec<usize> = (0..table.pieces().len())
        .filter(|&i| table.piece(i).label == label)
        .collect();
    let total: f64 = ids.iter().map(|&i| table.piece(i).shape.length()).sum();
    let mut pts = Vec::new();
    let mut spacing: f64 = 0.0;
    for &i in &ids {
        let len = table.piece(i).shape.length();
        let m = ((n as f64 * len / total).round() as usize).max(2);
        spacing = spacing.max(len / (m - 1) as f64);
        for k in 0..m {
            pts.push((i, len * k as f64 / (m - 1) as f64));
        }
    }
    (pts, spacing)
}

const INV_PHI: f64 = 0.618_033_988_749_894_8;

fn golden_min(mut a: f64, mut b: f64, f: impl Fn(f64) -> f64, iters: usize) -> (f64, f64) {
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..iters {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        }
    }
    // The ends are candidates too: minima of this problem sit on corners.
    [(a, f(a)), (b, f(b)), (x1, f1), (x2, f2)]
        .into_iter()
        .min_by(|p, q| p.1.total_cmp(&q.1))
        .unwrap()
}

pub fn check_c1(table: &Table, cfg: &C1Config) -> Result<C1Report> {
    if !table.has_label(Label::Dispersing) || !table.has_label(Label::Focusing) {
        return Err(Error::InvalidParameter(
            "table needs dispersing and focusing pieces".into(),
        ));
    }
    let (ds, sp_d) = sample_label(table, Label::Dispersing, cfg.grid);
    let (fs, sp_f) = sample_label(table, Label::Focusing, cfg.grid);
    let shape = |i: usize| table.piece(i).shape;

    // Best grid value per dispersing row.
    let mut rows: Vec<(f64, usize, usize)> = ds
        .par_iter()
        .enumerate()
        .map(|(a, &(i, ud))| {
            let d = shape(i);
            let mut best = (f64::INFINITY, a, 0);
            for (b, &(j, uf)) in fs.iter().enumerate() {
                let m = margin_local(&d, ud, &shape(j), uf);
                if m < best.0 {
                    best = (m, a, b);
                }
            }
            best
        })
        .collect();
    rows.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut evaluations = (ds.len() * fs.len()) as u64;

    let mut best = (f64::INFINITY, (0usize, 0.0), (0usize, 0.0));
    for &(m, a, b) in rows.iter().take(cfg.refine.max(1)) {
        let (i, mut ud) = ds[a];
        let (j, mut uf) = fs[b];
        let (di, fj) = (shape(i), shape(j));
        let (ld, lf) = (di.length(), fj.length());
        let mut cur = m;
        for _ in 0..4 {
            let (x, v) = golden_min(
                (ud - sp_d).max(0.0),
                (ud + sp_d).min(ld),
                |x| margin_local(&di, x, &fj, uf),
                60,
            );
            if v < cur {
                ud = x;
                cur = v;
            }
            let (y, v) = golden_min(
                (uf - sp_f).max(0.0),
                (uf + sp_f).min(lf),
                |y| margin_local(&di, ud, &fj, y),
                60,
            );
            if v < cur {
                uf = y;
                cur = v;
            }
            evaluations += 2 * 64;
        }
        if cur < best.0 {
            best = (cur, (i, ud), (j, uf));
        }
    }
    let (margin, (i, ud), (j, uf)) = best;
    Ok(C1Report {
        ok: margin >= 0.0,
        margin,
        witness: (table.global_s(i, ud), table.global_s(j, uf)),
        witness_points: (shape(i).point_at(ud), shape(j).point_at(uf)),
        eps_grid: sp_d.max(sp_f),
        evaluations,
    })
}

/// Smallest strip height for which the condition holds, by bisection.
pub fn compute_h_o(k_d: f64, k_f: f64, cfg: &C1Config) -> Result<HoSearch> {
    let probe = |h: f64| -> Result<f64> {
        let table = build_main_table(&MainTableParams::new(k_d, k_f, h, 1.0 / k_f))?;
        Ok(check_c1(&table, cfg)?.margin)
    };
    let mut trace = Vec::new();
    let (mut lo, mut hi) = (cfg.h_lo, cfg.h_hi);
    let m_hi = probe(hi)?;
    trace.push((hi, m_hi));
    if m_hi < 0.0 {
        return Err(Error::NoSolution(format!(
            "condition fails at the upper bracket h = {hi} (margin {m_hi:e})"
        )));
    }
    let m_lo = probe(lo)?;
    trace.push((lo, m_lo));
    if m_lo >= 0.0 {
        hi = lo;
    }
    while hi - lo > cfg.h_rel_tol * hi {
        let mid = 0.5 * (lo + hi);
        let m = probe(mid)?;
        trace.push((mid, m));
        if m >= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let mut sorted = trace.clone();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let monotone = sorted.windows(2).all(|w| w[1].1 >= w[0].1 - 1e-13);
    Ok(HoSearch {
        h_o: hi,
        trace,
        monotone,
    })
}
