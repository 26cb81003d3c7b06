//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use std::cmp::Ordering;
use std::collections::{BTreeSet, BinaryHeap};

use longhot_core::episodes::Episode;
use longhot_core::mapping::{Belief, ExploredMap};
use longhot_core::world::{Cell, CellPos, OccupancyGrid, PathCost, Raster};
use longhot_core::Point;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `a.0 + a.1 * sqrt(2)` against `b.0 + b.1 * sqrt(2)` in integer arithmetic.
pub fn exact_cmp(a: (u32, u32), b: (u32, u32)) -> Ordering {
    let x = a.0 as i128 - b.0 as i128;
    let y = b.1 as i128 - a.1 as i128;
    // compare x against y*sqrt(2)
    match (x.signum(), y.signum()) {
        (0, 0) => Ordering::Equal,
        (sx, sy) if sx >= 0 && sy <= 0 => Ordering::Greater,
        (sx, sy) if sx <= 0 && sy >= 0 => Ordering::Less,
        (1, 1) => (x * x).cmp(&(2 * y * y)),
        _ => (2 * y * y).cmp(&(x * x)),
    }
}

#[derive(PartialEq, Eq)]
struct Entry {
    cost: (u32, u32),
    idx: usize,
}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        exact_cmp(other.cost, self.cost).then(other.idx.cmp(&self.idx))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Textbook Dijkstra on a `w` x `h` raster; `weight(x, y)` is `None` for walls.
/// Diagonal moves need both orthogonal neighbours passable.
pub fn dijkstra(w: usize, h: usize, weight: impl Fn(i64, i64) -> Option<u32>, source: (i64, i64)) -> Vec<Option<(u32, u32)>> {
    let inside = |x: i64, y: i64| x >= 0 && y >= 0 && (x as usize) < w && (y as usize) < h;
    let pass = |x: i64, y: i64| inside(x, y) && weight(x, y).is_some();
    let mut dist: Vec<Option<(u32, u32)>> = vec![None; w * h];
    let mut done = vec![false; w * h];
    let mut heap = BinaryHeap::new();
    let s = source.1 as usize * w + source.0 as usize;
    dist[s] = Some((0, 0));
    heap.push(Entry { cost: (0, 0), idx: s });
    while let Some(Entry { cost, idx }) = heap.pop() {
        if done[idx] {
            continue;
        }
        done[idx] = true;
        let (x, y) = ((idx % w) as i64, (idx / w) as i64);
        for dx in -1..=1i64 {
            for dy in -1..=1i64 {
                if (dx, dy) == (0, 0) {
                    continue;
                }
                let (nx, ny) = (x + dx, y + dy);
                if !pass(nx, ny) {
                    continue;
                }
                let diag = dx != 0 && dy != 0;
                if diag && !(pass(x + dx, y) && pass(x, y + dy)) {
                    continue;
                }
                let wgt = weight(nx, ny).unwrap();
                let next = if diag { (cost.0, cost.1 + wgt) } else { (cost.0 + wgt, cost.1) };
                let j = ny as usize * w + nx as usize;
                if dist[j].map_or(true, |d| exact_cmp(next, d) == Ordering::Less) {
                    dist[j] = Some(next);
                    heap.push(Entry { cost: next, idx: j });
                }
            }
        }
    }
    dist
}

pub fn grid_dijkstra(grid: &OccupancyGrid, source: CellPos) -> Vec<Option<(u32, u32)>> {
    dijkstra(grid.width(), grid.height(), |x, y| (grid.cell(CellPos::new(x, y)) == Cell::Free).then_some(1), (source.x, source.y))
}

pub fn meters(c: (u32, u32), resolution: f64) -> f64 {
    PathCost::new(c.0, c.1).meters(resolution)
}

/// Closed grid whose interior cells are obstacles with probability `density`.
pub fn random_grid(r: &mut ChaCha8Rng, w: usize, h: usize, density: f64) -> OccupancyGrid {
    let mut g = OccupancyGrid::new_closed(w, h, 0.25);
    for y in 1..h as i64 - 1 {
        for x in 1..w as i64 - 1 {
            if r.gen_bool(density) {
                g.set(CellPos::new(x, y), Cell::Obstacle);
            }
        }
    }
    g
}

pub fn random_free_cell(r: &mut ChaCha8Rng, g: &OccupancyGrid) -> CellPos {
    loop {
        let c = CellPos::new(r.gen_range(0..g.width() as i64), r.gen_range(0..g.height() as i64));
        if g.cell(c) == Cell::Free {
            return c;
        }
    }
}

/// Frontier cells by definition, clustered with a quadratic pairwise union-find.
pub fn frontier_oracle(map: &ExploredMap, min_cells: usize) -> BTreeSet<Vec<usize>> {
    let (w, h) = (map.width() as i64, map.height() as i64);
    let at = |x: i64, y: i64| (x >= 0 && y >= 0 && x < w && y < h).then(|| map.get((y * w + x) as usize));
    let mut cells = Vec::new();
    for y in 0..h {
        for x in 0..w {
            if at(x, y) == Some(Belief::Free) && [(1, 0), (-1, 0), (0, 1), (0, -1)].iter().any(|(dx, dy)| at(x + dx, y + dy) == Some(Belief::Unknown)) {
                cells.push((x, y));
            }
        }
    }
    let mut parent: Vec<usize> = (0..cells.len()).collect();
    fn find(p: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while p[r] != r {
            r = p[r];
        }
        p[i] = r;
        r
    }
    for i in 0..cells.len() {
        for j in i + 1..cells.len() {
            let (a, b) = (cells[i], cells[j]);
            if (a.0 - b.0).abs() <= 1 && (a.1 - b.1).abs() <= 1 {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                parent[ri] = rj;
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for (i, &(x, y)) in cells.iter().enumerate() {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push((y * w + x) as usize);
    }
    groups
        .into_values()
        .filter(|g| g.len() >= min_cells)
        .map(|mut g| {
            g.sort_unstable();
            g
        })
        .collect()
}

/// Per-cell random beliefs.
pub fn random_belief_map(r: &mut ChaCha8Rng, w: usize, h: usize) -> ExploredMap {
    let p_unknown = r.gen_range(0.1..0.7);
    let p_obstacle = r.gen_range(0.0..0.3);
    let cells = (0..w * h)
        .map(|_| {
            let u: f64 = r.gen();
            if u < p_unknown {
                Belief::Unknown
            } else if u < p_unknown + p_obstacle {
                Belief::Obstacle
            } else {
                Belief::Free
            }
        })
        .collect();
    ExploredMap::from_cells(w, h, 0.25, cells)
}

/// Rational `num / den` with `den > 0`, plus whether the bound is open.
#[derive(Clone, Copy)]
struct Bound {
    num: i128,
    den: i128,
    open: bool,
}

fn frac_cmp(a: Bound, b: Bound) -> Ordering {
    (a.num * b.den).cmp(&(b.num * a.den))
}

/// Parameter interval of `start + t*d` inside `[lo, lo+1)`, all values in 1/scale units.
fn axis_interval(start: i128, d: i128, lo: i128, scale: i128) -> Option<(Bound, Bound)> {
    let lo = lo * scale;
    let hi = lo + scale;
    if d == 0 {
        return (start >= lo && start < hi).then_some((Bound { num: 0, den: 1, open: false }, Bound { num: 1, den: 1, open: false }));
    }
    let mk = |num: i128, open: bool| if d > 0 { Bound { num, den: d, open } } else { Bound { num: -num, den: -d, open } };
    let t_lo = mk(lo - start, false);
    let t_hi = mk(hi - start, true);
    Some(if d > 0 { (t_lo, t_hi) } else { (t_hi, t_lo) })
}

/// Whether segment `a -> b` (coordinates in cell units times `scale`, integers) meets
/// the half-open cell `(cx, cy)`.
pub fn segment_meets_cell(a: (i128, i128), b: (i128, i128), cx: i128, cy: i128, scale: i128) -> bool {
    let Some((lx, hx)) = axis_interval(a.0, b.0 - a.0, cx, scale) else { return false };
    let Some((ly, hy)) = axis_interval(a.1, b.1 - a.1, cy, scale) else { return false };
    let zero = Bound { num: 0, den: 1, open: false };
    let one = Bound { num: 1, den: 1, open: false };
    let max_lo = [lx, ly, zero].into_iter().reduce(|p, q| match frac_cmp(p, q) {
        Ordering::Less => q,
        Ordering::Greater => p,
        Ordering::Equal => Bound { open: p.open || q.open, ..p },
    });
    let min_hi = [hx, hy, one].into_iter().reduce(|p, q| match frac_cmp(p, q) {
        Ordering::Less => p,
        Ordering::Greater => q,
        Ordering::Equal => Bound { open: p.open || q.open, ..p },
    });
    let (lo, hi) = (max_lo.unwrap(), min_hi.unwrap());
    match frac_cmp(lo, hi) {
        Ordering::Less => true,
        Ordering::Equal => !lo.open && !hi.open,
        Ordering::Greater => false,
    }
}

/// Every cell the segment touches, by exhaustive test over its bounding box.
pub fn segment_cells_oracle(a: (i128, i128), b: (i128, i128), scale: i128) -> BTreeSet<(i64, i64)> {
    let lo_x = a.0.min(b.0).div_euclid(scale) - 1;
    let hi_x = a.0.max(b.0).div_euclid(scale) + 1;
    let lo_y = a.1.min(b.1).div_euclid(scale) - 1;
    let hi_y = a.1.max(b.1).div_euclid(scale) + 1;
    let mut out = BTreeSet::new();
    for cx in lo_x..=hi_x {
        for cy in lo_y..=hi_y {
            if segment_meets_cell(a, b, cx, cy, scale) {
                out.insert((cx as i64, cy as i64));
            }
        }
    }
    out
}

/// Reference tour length by brute force over all visiting orders that obey the
/// nearest-next rule (ties admit every choice). Returns the set of admissible lengths.
pub fn greedy_chain_oracle(grid: &OccupancyGrid, ep: &Episode) -> Vec<f64> {
    let res = grid.resolution();
    let d = |a: &Point, b: &Point| -> f64 {
        let field = grid_dijkstra(grid, grid.cell_of(a));
        let c = grid.cell_of(b);
        field[c.y as usize * grid.width() + c.x as usize].map_or(f64::INFINITY, |c| meters(c, res))
    };
    let objs: Vec<Point> = ep.objects.iter().map(|o| o.position).collect();
    let k = objs.len();
    let start = ep.start.position();
    let lead = d(&start, &ep.container);
    let mut out = Vec::new();
    let mut perm: Vec<usize> = (0..k).collect();
    permute(&mut perm, 0, &mut |order| {
        let mut at = ep.container;
        let mut total = lead;
        let mut left: Vec<usize> = (0..k).collect();
        for &o in order {
            let best = left.iter().map(|&i| d(&at, &objs[i])).fold(f64::INFINITY, f64::min);
            let here = d(&at, &objs[o]);
            if here != best {
                return;
            }
            total += here;
            at = objs[o];
            left.retain(|&i| i != o);
        }
        out.push(total + d(&at, &ep.goal));
    });
    out
}

fn permute(v: &mut Vec<usize>, i: usize, f: &mut impl FnMut(&[usize])) {
    if i == v.len() {
        f(v);
        return;
    }
    for j in i..v.len() {
        v.swap(i, j);
        permute(v, i + 1, f);
        v.swap(i, j);
    }
}
