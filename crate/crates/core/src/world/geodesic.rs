use alloc::collections::{BTreeMap, BinaryHeap};
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Reverse;

use super::{OccupancyGrid, PathCost, Raster, WorldError};
use crate::geom::Point;

/// Neighbor offsets: 4 orthogonal first, then 4 diagonal.
pub const NEIGHBORS: [(i64, i64); 8] = [(1, 0), (0, 1), (-1, 0), (0, -1), (1, 1), (-1, 1), (-1, -1), (1, -1)];

/// Visit passable 8-neighbors of `idx` with the move cost. A diagonal move is
/// allowed only when both orthogonal cells it passes between are passable.
pub(crate) fn for_each_neighbor<R: Raster + ?Sized>(r: &R, idx: usize, mut f: impl FnMut(usize, PathCost)) {
    let p = r.pos(idx);
    let mut open = [false; 4];
    for (k, (dx, dy)) in NEIGHBORS.iter().enumerate() {
        let q = super::CellPos::new(p.x + dx, p.y + dy);
        let Some(j) = r.index(q) else { continue };
        if k >= 4 {
            let (a, b) = match k {
                4 => (0, 1),
                5 => (2, 1),
                6 => (2, 3),
                _ => (0, 3),
            };
            if !open[a] || !open[b] {
                continue;
            }
        }
        let Some(w) = r.weight(j) else { continue };
        if k < 4 {
            open[k] = true;
        }
        f(j, PathCost::step(k >= 4, w));
    }
}

/// Single-source shortest path costs over any raster.
pub fn dijkstra<R: Raster + ?Sized>(r: &R, source: usize) -> Vec<Option<PathCost>> {
    let mut dist: Vec<Option<PathCost>> = vec![None; r.width() * r.height()];
    let mut heap = BinaryHeap::new();
    dist[source] = Some(PathCost::ZERO);
    heap.push(Reverse((0u64, source as u32)));
    while let Some(Reverse((key, i))) = heap.pop() {
        let i = i as usize;
        let d = dist[i].expect("queued cells have a cost");
        if key != d.key() {
            continue;
        }
        for_each_neighbor(r, i, |j, c| {
            let nd = d + c;
            if dist[j].map_or(true, |old| nd < old) {
                dist[j] = Some(nd);
                heap.push(Reverse((nd.key(), j as u32)));
            }
        });
    }
    dist
}

/// Costs of all cells within `radius` cells of `source`, sorted by cell index.
pub fn ball<R: Raster + ?Sized>(r: &R, source: usize, radius: f64) -> Vec<(usize, PathCost)> {
    let mut dist: BTreeMap<usize, PathCost> = BTreeMap::new();
    let mut heap = BinaryHeap::new();
    dist.insert(source, PathCost::ZERO);
    heap.push(Reverse((0u64, source as u32)));
    while let Some(Reverse((key, i))) = heap.pop() {
        let i = i as usize;
        let d = dist[&i];
        if key != d.key() {
            continue;
        }
        for_each_neighbor(r, i, |j, c| {
            let nd = d + c;
            if nd.cells() > radius {
                return;
            }
            if dist.get(&j).map_or(true, |old| nd < *old) {
                dist.insert(j, nd);
                heap.push(Reverse((nd.key(), j as u32)));
            }
        });
    }
    dist.into_iter().collect()
}

/// Geodesic distances from one source point to every cell.
#[derive(Debug, Clone)]
pub struct DistanceField {
    pub source: Point,
    width: usize,
    resolution: f64,
    costs: Vec<Option<PathCost>>,
}

impl DistanceField {
    pub fn cost(&self, idx: usize) -> Option<PathCost> {
        self.costs[idx]
    }

    /// Meters to cell `idx`, infinity when unreachable.
    pub fn meters(&self, idx: usize) -> f64 {
        self.costs[idx].map_or(f64::INFINITY, |c| c.meters(self.resolution))
    }

    /// Meters to the cell containing `p`, infinity when unreachable or outside.
    pub fn at(&self, p: &Point) -> f64 {
        let c = super::cell_of(p, self.resolution);
        let h = self.costs.len() / self.width;
        if c.x < 0 || c.y < 0 || c.x as usize >= self.width || c.y as usize >= h {
            return f64::INFINITY;
        }
        self.meters(c.y as usize * self.width + c.x as usize)
    }

    pub fn len(&self) -> usize {
        self.costs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.costs.is_empty()
    }
}

/// Exact 8-connected geodesic field from `source`.
pub fn geodesic_field(grid: &OccupancyGrid, source: Point) -> Result<DistanceField, WorldError> {
    let cell = grid.cell_of(&source);
    let idx = match grid.index(cell) {
        Some(i) if grid.is_free(cell) => i,
        _ => return Err(WorldError::InvalidSource(source)),
    };
    Ok(DistanceField { source, width: grid.width(), resolution: grid.resolution(), costs: dijkstra(grid, idx) })
}

/// Geodesic meters between two points; infinity when unreachable.
pub fn geodesic(grid: &OccupancyGrid, a: Point, b: Point) -> Result<f64, WorldError> {
    if !grid.point_is_free(&b) {
        return Err(WorldError::InvalidSource(b));
    }
    Ok(geodesic_field(grid, a)?.at(&b))
}

/// Optimal path from `from` to `to` as cell indices (both ends included) and its cost.
///
/// Uses the octile distance as heuristic, which never overestimates because
/// every weight is at least 1. `None` when `to` is unreachable.
pub fn astar<R: Raster + ?Sized>(r: &R, from: usize, to: usize) -> Option<(PathCost, Vec<usize>)> {
    r.weight(from)?;
    r.weight(to)?;
    let goal = r.pos(to);
    let h = |i: usize| {
        let p = r.pos(i);
        PathCost::octile(p.x.abs_diff(goal.x), p.y.abs_diff(goal.y))
    };
    let mut g: Vec<Option<(PathCost, usize)>> = vec![None; r.width() * r.height()];
    let mut heap = BinaryHeap::new();
    g[from] = Some((PathCost::ZERO, from));
    heap.push(Reverse(((PathCost::ZERO + h(from)).key(), h(from).key(), from as u32)));
    while let Some(Reverse((fk, _, i))) = heap.pop() {
        let i = i as usize;
        let d = g[i].expect("queued cells have a cost").0;
        if fk != (d + h(i)).key() {
            continue;
        }
        if i == to {
            let mut path = vec![to];
            let mut c = to;
            while c != from {
                c = g[c].expect("path cells have a parent").1;
                path.push(c);
            }
            path.reverse();
            return Some((d, path));
        }
        for_each_neighbor(r, i, |j, c| {
            let nd = d + c;
            if g[j].map_or(true, |old| nd < old.0) {
                g[j] = Some((nd, i));
                let hj = h(j);
                heap.push(Reverse(((nd + hj).key(), hj.key(), j as u32)));
            }
        });
    }
    None
}

/// Memoised single-source fields over a fixed grid, keyed by source cell.
#[derive(Debug, Clone)]
pub struct FieldCache<'a> {
    grid: &'a OccupancyGrid,
    fields: BTreeMap<usize, Vec<Option<PathCost>>>,
    capacity: usize,
}

impl<'a> FieldCache<'a> {
    pub fn new(grid: &'a OccupancyGrid) -> Self {
        Self { grid, fields: BTreeMap::new(), capacity: 64 }
    }

    pub fn grid(&self) -> &'a OccupancyGrid {
        self.grid
    }

    /// Field rooted at the cell containing `source`, `None` if that cell is not free.
    pub fn field(&mut self, source: &Point) -> Option<&[Option<PathCost>]> {
        let cell = self.grid.cell_of(source);
        let idx = self.grid.index(cell).filter(|_| self.grid.is_free(cell))?;
        if !self.fields.contains_key(&idx) {
            if self.fields.len() >= self.capacity {
                self.fields.clear();
            }
            self.fields.insert(idx, dijkstra(self.grid, idx));
        }
        self.fields.get(&idx).map(|v| v.as_slice())
    }

    /// Geodesic meters between `source` and `p`; infinity when either is blocked or unreachable.
    pub fn meters(&mut self, source: &Point, p: &Point) -> f64 {
        let res = self.grid.resolution();
        let cell = self.grid.cell_of(p);
        let Some(j) = self.grid.index(cell) else { return f64::INFINITY };
        match self.field(source) {
            Some(f) => f[j].map_or(f64::INFINITY, |c| c.meters(res)),
            None => f64::INFINITY,
        }
    }
}
