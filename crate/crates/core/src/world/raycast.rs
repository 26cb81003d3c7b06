use super::{Cell, CellPos, OccupancyGrid};
use crate::geom::Point;

/// Cell traversal of a segment under half-open cell semantics.
///
/// Cell `(i, j)` covers `[i*r, (i+1)*r) x [j*r, (j+1)*r)`; a segment visits
/// every cell containing at least one of its points, in order. At an exact
/// corner crossing, axes moving in the positive direction switch cell at the
/// crossing itself and negative ones just after it, which is what the
/// half-open convention implies.
#[derive(Debug, Clone)]
pub struct SegmentWalk {
    ax: f64,
    ay: f64,
    dx: f64,
    dy: f64,
    cx: i64,
    cy: i64,
    pending: Option<(CellPos, f64)>,
    started: bool,
    done: bool,
}

impl SegmentWalk {
    pub fn new(a: Point, b: Point, resolution: f64) -> Self {
        let (ax, ay) = (a.x / resolution, a.y / resolution);
        let (bx, by) = (b.x / resolution, b.y / resolution);
        Self {
            ax,
            ay,
            dx: bx - ax,
            dy: by - ay,
            cx: libm::floor(ax) as i64,
            cy: libm::floor(ay) as i64,
            pending: None,
            started: false,
            done: false,
        }
    }

    fn crossing(start: f64, d: f64, cell: i64) -> Option<f64> {
        if d > 0.0 {
            let t = ((cell + 1) as f64 - start) / d;
            (t <= 1.0).then_some(t)
        } else if d < 0.0 {
            let t = (cell as f64 - start) / d;
            (t < 1.0).then_some(t)
        } else {
            None
        }
    }
}

impl Iterator for SegmentWalk {
    /// Cell and the segment parameter `t` in [0, 1] at which it is entered.
    type Item = (CellPos, f64);

    fn next(&mut self) -> Option<Self::Item> {
        if !self.started {
            self.started = true;
            return Some((CellPos::new(self.cx, self.cy), 0.0));
        }
        if let Some(p) = self.pending.take() {
            return Some(p);
        }
        if self.done {
            return None;
        }
        let tx = Self::crossing(self.ax, self.dx, self.cx);
        let ty = Self::crossing(self.ay, self.dy, self.cy);
        let sx = if self.dx > 0.0 { 1 } else { -1 };
        let sy = if self.dy > 0.0 { 1 } else { -1 };
        match (tx, ty) {
            (None, None) => {
                self.done = true;
                None
            }
            (Some(t), Some(u)) if t == u => {
                if (self.dx > 0.0) == (self.dy > 0.0) {
                    self.cx += sx;
                    self.cy += sy;
                    Some((CellPos::new(self.cx, self.cy), t))
                } else if self.dx > 0.0 {
                    self.cx += sx;
                    let first = CellPos::new(self.cx, self.cy);
                    self.cy += sy;
                    self.pending = Some((CellPos::new(self.cx, self.cy), t));
                    Some((first, t))
                } else {
                    self.cy += sy;
                    let first = CellPos::new(self.cx, self.cy);
                    self.cx += sx;
                    self.pending = Some((CellPos::new(self.cx, self.cy), t));
                    Some((first, t))
                }
            }
            (Some(t), u) if u.map_or(true, |u| t < u) => {
                self.cx += sx;
                Some((CellPos::new(self.cx, self.cy), t))
            }
            (_, Some(u)) => {
                self.cy += sy;
                Some((CellPos::new(self.cx, self.cy), u))
            }
            (Some(_), None) => unreachable!("handled by the guard above"),
        }
    }
}

/// Walk the cells of segment `a -> b`; `visit` returns `false` to stop early.
pub fn traverse(a: Point, b: Point, resolution: f64, mut visit: impl FnMut(CellPos, f64) -> bool) {
    for (c, t) in SegmentWalk::new(a, b, resolution) {
        if !visit(c, t) {
            return;
        }
    }
}

/// True when segment `a -> b` passes through no obstacle (or out-of-grid) cell.
pub fn line_of_sight(grid: &OccupancyGrid, a: Point, b: Point) -> bool {
    SegmentWalk::new(a, b, grid.resolution()).all(|(c, _)| grid.cell(c) == Cell::Free)
}

/// Distance along direction `(ux, uy)` to the first obstacle cell, capped at `max_range`.
pub fn cast_ray(grid: &OccupancyGrid, origin: Point, dir: (f64, f64), max_range: f64) -> f64 {
    let end = origin.offset(dir.0 * max_range, dir.1 * max_range);
    for (c, t) in SegmentWalk::new(origin, end, grid.resolution()) {
        if grid.cell(c) == Cell::Obstacle {
            return t * max_range;
        }
    }
    max_range
}
