//! Uniform grid over piece bounding boxes, traversed cell by cell along a ray.

use crate::geometry::{Point2, Ray, Shape};

use super::BoundaryPiece;

const MAX_CELLS_PER_AXIS: usize = 4096;

#[derive(Debug, Clone)]
pub struct GridIndex {
    origin: Point2,
    cell: f64,
    nx: usize,
    ny: usize,
    starts: Vec<u32>,
    items: Vec<u32>,
}

impl GridIndex {
    pub fn build(pieces: &[BoundaryPiece]) -> Self {
        let boxes: Vec<(Point2, Point2)> = pieces.iter().map(|p| p.shape.bbox()).collect();
        let segs: Vec<Option<(Point2, Point2)>> = pieces
            .iter()
            .map(|p| match p.shape {
                Shape::Segment(s) => Some((s.a, s.b)),
                Shape::Arc(_) => None,
            })
            .collect();
        let mut lo = Point2::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for (a, b) in &boxes {
            lo.x = lo.x.min(a.x);
            lo.y = lo.y.min(a.y);
            hi.x = hi.x.max(b.x);
            hi.y = hi.y.max(b.y);
        }
        let w = (hi.x - lo.x).max(1e-9);
        let h = (hi.y - lo.y).max(1e-9);
        let n = pieces.len().max(1) as f64;
        let mut cell = (w * h / (8.0 * n)).sqrt();
        cell = cell
            .max(w / MAX_CELLS_PER_AXIS as f64)
            .max(h / MAX_CELLS_PER_AXIS as f64);
        let pad = cell * 0.5;
        let origin = Point2::new(lo.x - pad, lo.y - pad);
        let nx = (((w + 2.0 * pad) / cell).ceil() as usize).max(1);
        let ny = (((h + 2.0 * pad) / cell).ceil() as usize).max(1);

        let mut counts = vec![0u32; nx * ny + 1];
        let range = |a: &Point2, b: &Point2| {
            let x0 = (((a.x - origin.x) / cell).floor().max(0.0) as usize).min(nx - 1);
            let x1 = (((b.x - origin.x) / cell).floor().max(0.0) as usize).min(nx - 1);
            let y0 = (((a.y - origin.y) / cell).floor().max(0.0) as usize).min(ny - 1);
            let y1 = (((b.y - origin.y) / cell).floor().max(0.0) as usize).min(ny - 1);
            (x0, x1, y0, y1)
        };
        // Segments go only into cells they cross; arcs into their bbox.
        let covers = |k: usize, ix: usize, iy: usize| match segs[k] {
            None => true,
            Some((a, b)) => {
                let lo = Point2::new(origin.x + ix as f64 * cell, origin.y + iy as f64 * cell);
                segment_meets_box(a, b, lo, cell, 1e-9 * cell.max(1.0))
            }
        };
        for (k, (a, b)) in boxes.iter().enumerate() {
            let (x0, x1, y0, y1) = range(a, b);
            for iy in y0..=y1 {
                for ix in x0..=x1 {
                    if covers(k, ix, iy) {
                        counts[iy * nx + ix + 1] += 1;
                    }
                }
            }
        }
        for i in 1..counts.len() {
            counts[i] += counts[i - 1];
        }
        let starts = counts.clone();
        let mut fill = counts;
        let mut items = vec![0u32; *starts.last().unwrap() as usize];
        for (k, (a, b)) in boxes.iter().enumerate() {
            let (x0, x1, y0, y1) = range(a, b);
            for iy in y0..=y1 {
                for ix in x0..=x1 {
                    if !covers(k, ix, iy) {
                        continue;
                    }
                    let c = iy * nx + ix;
                    items[fill[c] as usize] = k as u32;
                    fill[c] += 1;
                }
            }
        }
        Self {
            origin,
            cell,
            nx,
            ny,
            starts,
            items,
        }
    }

    pub fn cell_size(&self) -> f64 {
        self.cell
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    pub fn cell_items(&self, ix: usize, iy: usize) -> &[u32] {
        let c = iy * self.nx + ix;
        &self.items[self.starts[c] as usize..self.starts[c + 1] as usize]
    }

    /// Pieces whose bounding box meets the axis-aligned box `[lo, hi]`
    /// (with duplicates).
    pub fn query_box(&self, lo: Point2, hi: Point2, mut f: impl FnMut(u32)) {
        let cx = |x: f64| (((x - self.origin.x) / self.cell).floor().max(0.0) as usize).min(self.nx - 1);
        let cy = |y: f64| (((y - self.origin.y) / self.cell).floor().max(0.0) as usize).min(self.ny - 1);
        for iy in cy(lo.y)..=cy(hi.y) {
            for ix in cx(lo.x)..=cx(hi.x) {
                for &k in self.cell_items(ix, iy) {
                    f(k);
                }
            }
        }
    }

    /// Visit cells pierced by the ray in order. `visit(items, t_exit, best)`
    /// returns the updated best hit parameter and whether to stop.
    pub fn walk(&self, ray: &Ray, mut visit: impl FnMut(&[u32], f64, f64) -> (f64, bool)) {
        let o = ray.origin;
        let d = ray.direction;
        let fx = (o.x - self.origin.x) / self.cell;
        let fy = (o.y - self.origin.y) / self.cell;
        let mut ix = fx.floor().clamp(0.0, (self.nx - 1) as f64) as i64;
        let mut iy = fy.floor().clamp(0.0, (self.ny - 1) as f64) as i64;
        let (step_x, mut t_max_x, t_dx) = axis_setup(d.x, fx, ix, self.cell);
        let (step_y, mut t_max_y, t_dy) = axis_setup(d.y, fy, iy, self.cell);
        let mut best = f64::INFINITY;
        loop {
            let t_exit = t_max_x.min(t_max_y);
            let items = self.cell_items(ix as usize, iy as usize);
            let (b, stop) = visit(items, t_exit, best);
            best = b;
            if stop {
                return;
            }
            if t_max_x < t_max_y {
                ix += step_x;
                t_max_x += t_dx;
            } else {
                iy += step_y;
                t_max_y += t_dy;
            }
            if ix < 0 || iy < 0 || ix >= self.nx as i64 || iy >= self.ny as i64 {
                return;
            }
        }
    }
}

/// Whether segment `ab` meets the square `[lo, lo + size]^2` grown by `pad`.
fn segment_meets_box(a: Point2, b: Point2, lo: Point2, size: f64, pad: f64) -> bool {
    let (mut t0, mut t1) = (0.0f64, 1.0f64);
    let d = b - a;
    for (p, q, l) in [(a.x, d.x, lo.x), (a.y, d.y, lo.y)] {
        let (min, max) = (l - pad, l + size + pad);
        if q == 0.0 {
            if p < min || p > max {
                return false;
            }
        } else {
            let (mut u, mut v) = ((min - p) / q, (max - p) / q);
            if u > v {
                std::mem::swap(&mut u, &mut v);
            }
            t0 = t0.max(u);
            t1 = t1.min(v);
            if t0 > t1 {
                return false;
            }
        }
    }
    true
}

fn axis_setup(d: f64, f: f64, i: i64, cell: f64) -> (i64, f64, f64) {
    if d > 0.0 {
        (1, ((i + 1) as f64 - f) * cell / d, cell / d)
    } else if d < 0.0 {
        (-1, (i as f64 - f) * cell / d, -cell / d)
    } else {
        (0, f64::INFINITY, f64::INFINITY)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::SegmentPiece;
    use crate::table::Label;

    #[test]
    fn walk_reaches_far_piece() {
        // Many tiny segments along a line plus one far wall.
        let mut pieces = Vec::new();
        for i in 0..100 {
            let x = i as f64 * 0.1;
            pieces.push(BoundaryPiece::new(
                Shape::Segment(SegmentPiece::new(
                    Point2::new(x, 0.0),
                    Point2::new(x + 0.1, 0.0),
                )),
                Label::Flat,
            ));
        }
        pieces.push(BoundaryPiece::new(
            Shape::Segment(SegmentPiece::new(
                Point2::new(5.0, 5.0),
                Point2::new(5.0, 4.0),
            )),
            Label::Flat,
        ));
        let g = GridIndex::build(&pieces);
        let ray = Ray::new(Point2::new(0.05, 4.5), Point2::new(1.0, 0.0));
        let mut seen = false;
        g.walk(&ray, |items, _t, best| {
            if items.contains(&100) {
                seen = true;
            }
            (best, false)
        });
        assert!(seen);
    }
}
