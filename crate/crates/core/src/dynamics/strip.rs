//! Closed-form passage through a rectangular strip by unfolding.

use crate::geometry::{Point2, Ray, Vec2};
use crate::table::RectCorridor;

use super::{DynConfig, SingularEvent, SingularKind};

pub(crate) struct StripExit {
    pub t: f64,
    pub n_flat: u64,
    pub exit: Point2,
    pub direction: Vec2,
    pub hit_cap: bool,
}

/// Parameter at which `ray` enters the strip through its opening, if that
/// happens before `t_max`.
pub(crate) fn opening_crossing(c: &RectCorridor, ray: &Ray, t_max: f64) -> Option<f64> {
    let (a0, b0) = c.to_local(ray.origin);
    let da = ray.direction.dot(c.axis);
    let db = ray.direction.dot(c.across);
    if da <= 0.0 || a0 > 0.0 {
        return None;
    }
    let t = -a0 / da;
    let b = b0 + db * t;
    let slack = 1e-12 * c.height.max(1.0);
    (t <= t_max && b >= -slack && b <= c.height + slack).then_some(t)
}

/// Walls `j h` strictly between `lo` and `hi`.
fn crossings(lo: f64, hi: f64, h: f64) -> u64 {
    let (lo, hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let n = (hi / h).ceil() - (lo / h).floor() - 1.0;
    n.max(0.0) as u64
}

fn dist_to_lattice(b: f64, h: f64) -> f64 {
    let r = b.rem_euclid(h);
    r.min(h - r)
}

/// Flight from local position `(a0, b0)` with world direction `dir` until
/// the particle leaves through the opening.
pub(crate) fn traverse(
    c: &RectCorridor,
    a0: f64,
    b0: f64,
    dir: Vec2,
    cfg: &DynConfig,
    n_flat_before: u64,
) -> Result<StripExit, SingularEvent> {
    let (l, h) = (c.length, c.height);
    let a0 = a0.clamp(0.0, l);
    let b0 = b0.clamp(0.0, h);
    let da = dir.dot(c.axis);
    let db = dir.dot(c.across);
    let fail = |kind, a: f64, b: f64| SingularEvent {
        kind,
        location: c.to_world(a, b),
        piece: None,
    };
    if da.abs() < cfg.grazing_tol {
        return Err(fail(SingularKind::Tangential, a0, b0));
    }
    let hit_cap = da > 0.0;
    let dist = if hit_cap { 2.0 * l - a0 } else { a0 };
    let t = dist / da.abs();
    let big_b = b0 + db * t;
    let walls = crossings(b0, big_b, h);
    if walls > 0 && db.abs() < cfg.grazing_tol {
        return Err(fail(SingularKind::Tangential, a0, b0));
    }
    let n_flat = walls + hit_cap as u64;
    if n_flat_before + n_flat > cfg.flat_cap {
        return Err(fail(SingularKind::CapExceeded, a0, b0));
    }
    let slope = if db == 0.0 { f64::INFINITY } else { da.abs() / db.abs() };

    if hit_cap {
        let bc = b0 + db * (l - a0) / da;
        let d = dist_to_lattice(bc, h);
        if d < cfg.corner_tol || d * slope < cfg.corner_tol {
            return Err(fail(SingularKind::Corner, l, bc.rem_euclid(h)));
        }
    }
    if walls > 0 {
        // First wall hit after the start, last one before the exit.
        let d_in = if db > 0.0 { h - b0 } else { b0 };
        let a_first = if hit_cap { a0 + d_in * slope } else { a0 - d_in * slope };
        let d_out = dist_to_lattice(big_b, h);
        if a_first < cfg.corner_tol || d_out * slope < cfg.corner_tol {
            return Err(fail(SingularKind::Corner, 0.0, b0));
        }
    }

    let r = big_b.rem_euclid(2.0 * h);
    let (b_exit, db_exit) = if r <= h { (r, db) } else { (2.0 * h - r, -db) };
    Ok(StripExit {
        t,
        n_flat,
        exit: c.to_world(0.0, b_exit),
        direction: c.axis * (-da.abs()) + c.across * db_exit,
        hit_cap,
    })
}
