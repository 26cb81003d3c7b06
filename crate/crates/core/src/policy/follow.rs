use alloc::collections::BinaryHeap;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Reverse;

use crate::env::{Action, FORWARD_STEP_M};
use crate::geom::{bearing, wrap_180, Heading, Point, Pose, DIRECTIONS};
use crate::mapping::{Belief, ExploredMap};
use crate::rng::{self, streams};
use crate::world::{astar, dijkstra, CellPos, PathCost, Raster, NEIGHBORS};

const LOOKAHEAD: usize = 6;
const REPLAN_EVERY: u32 = 10;
const STUCK_AFTER: u32 = 40;

/// Optimal belief-map path between two points as cell indices.
pub fn plan(map: &ExploredMap, from: &Point, to: &Point) -> Option<(PathCost, Vec<usize>)> {
    let a = map.index(map.cell_of(from))?;
    let b = map.index(map.cell_of(to))?;
    astar(map, a, b)
}

/// Turn one step toward `target`, left on a dead-ahead or behind tie.
pub fn heading_toward(pose: &Pose, target: &Point) -> Action {
    if bearing(&pose.position(), pose.heading, target) >= 0.0 {
        Action::TurnLeft
    } else {
        Action::TurnRight
    }
}

fn turn_to(from: Heading, to: Heading) -> Action {
    if from.turns_to(to) >= 0 {
        Action::TurnLeft
    } else {
        Action::TurnRight
    }
}

/// Whether a forward move from `pose` stays clear of believed obstacles.
pub fn forward_clear(map: &ExploredMap, pose: &Pose) -> bool {
    let from = pose.position();
    let (ux, uy) = pose.heading.unit();
    let to = from.offset(ux * FORWARD_STEP_M, uy * FORWARD_STEP_M);
    map.at(map.cell_of(&to)) != Belief::Obstacle && map.clear_segment(from, to)
}

fn forward_of(pose: &Pose) -> Point {
    let (ux, uy) = pose.heading.unit();
    pose.position().offset(ux * FORWARD_STEP_M, uy * FORWARD_STEP_M)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Follow {
    Act(Action),
    Arrived,
    NoPath,
}

/// Follows belief-map A* paths with a line-of-sight lookahead.
#[derive(Debug, Clone, Default)]
pub struct Follower {
    goal: Option<usize>,
    path: Vec<usize>,
    planned_t: u32,
    best_remaining: usize,
    progress_t: u32,
}

impl Follower {
    pub fn reset(&mut self) {
        *self = Self::default();
    }

    pub fn goal(&self) -> Option<usize> {
        self.goal
    }

    fn on_path(&self, map: &ExploredMap, cell: CellPos) -> Option<usize> {
        let mut best: Option<(i64, usize)> = None;
        for (k, &c) in self.path.iter().enumerate() {
            let p = map.pos(c);
            let d = (p.x - cell.x).abs().max((p.y - cell.y).abs());
            if d <= 1 && best.map_or(true, |b| d < b.0 || (d == b.0 && k > b.1)) {
                best = Some((d, k));
            }
        }
        best.map(|b| b.1)
    }

    /// One step toward cell `goal`. `bumped` reports that the last forward move collided.
    pub fn step(&mut self, map: &ExploredMap, pose: &Pose, goal: usize, t: u32, bumped: bool) -> Follow {
        let pos = pose.position();
        let Some(here) = map.index(map.cell_of(&pos)) else { return Follow::NoPath };
        if here == goal {
            return Follow::Arrived;
        }
        if self.goal != Some(goal) {
            self.reset();
            self.goal = Some(goal);
            self.progress_t = t;
            self.best_remaining = usize::MAX;
        }
        let mut idx = self.on_path(map, map.cell_of(&pos));
        let blocked = idx.is_some_and(|i| self.path[i..].iter().take(LOOKAHEAD + 1).any(|c| map.get(*c) == Belief::Obstacle));
        if idx.is_none() || blocked || t >= self.planned_t + REPLAN_EVERY {
            match astar(map, here, goal) {
                Some((_, p)) => {
                    self.path = p;
                    self.planned_t = t;
                    idx = Some(0);
                }
                None => return Follow::NoPath,
            }
        }
        let i = idx.expect("path index after planning");
        let remaining = self.path.len() - 1 - i;
        if remaining < self.best_remaining {
            self.best_remaining = remaining;
            self.progress_t = t;
        } else if t > self.progress_t + STUCK_AFTER {
            return Follow::NoPath;
        }
        let last = self.path.len() - 1;
        let mut aim = map.center(map.pos(self.path[(i + 1).min(last)]));
        for j in ((i + 1)..=(i + LOOKAHEAD).min(last)).rev() {
            let c = map.center(map.pos(self.path[j]));
            if map.clear_segment(pos, c) {
                aim = c;
                break;
            }
        }
        Follow::Act(steer(map, pose, &aim, bumped))
    }
}

/// Turn toward, or move along, the heading closest to the bearing of `aim`
/// whose forward step is believed clear.
fn steer(map: &ExploredMap, pose: &Pose, aim: &Point, bumped: bool) -> Action {
    let desired = pose.position().angle_to(aim);
    let mut order: Vec<(f64, i32, usize)> = (0..DIRECTIONS)
        .map(|h| {
            let hd = Heading::from_index(h);
            (wrap_180(hd.degrees() as f64 - desired).abs(), pose.heading.turns_to(hd).abs(), h)
        })
        .collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    for (err, _, h) in order {
        if err > 90.0 {
            break;
        }
        let hd = Heading::from_index(h);
        let candidate = Pose { heading: hd, ..*pose };
        if hd == pose.heading && bumped {
            continue;
        }
        if forward_clear(map, &candidate) {
            return if hd == pose.heading { Action::Forward } else { turn_to(pose.heading, hd) };
        }
    }
    Action::TurnLeft
}

/// Cached belief-map distance field toward a navigation target.
#[derive(Debug, Clone)]
pub struct NavField {
    target: usize,
    version: u64,
    field: Vec<Option<PathCost>>,
}

impl NavField {
    pub fn get<'c>(cache: &'c mut Option<NavField>, map: &ExploredMap, target: usize) -> &'c NavField {
        let stale = cache.as_ref().map_or(true, |c| c.target != target || c.version != map.version());
        if stale {
            *cache = Some(NavField { target, version: map.version(), field: dijkstra(map, target) });
        }
        cache.as_ref().expect("filled above")
    }

    pub fn at(&self, idx: usize) -> Option<PathCost> {
        self.field[idx]
    }
}

/// Greedy geodesic descent on the belief map toward `target`.
///
/// Each heading is scored by the belief distance of the cell one forward step
/// along it would reach, then by its error to the steepest-descent neighbor.
/// The agent moves forward if its own heading wins and turns toward the winner
/// otherwise, so FORWARD beats turning and left beats right on ties. With
/// probability `noise_p` a uniformly random move is returned instead.
pub fn object_nav(
    map: &ExploredMap,
    pose: &Pose,
    target: &Point,
    cache: &mut Option<NavField>,
    noise: (f64, u64, u32),
    bumped: bool,
) -> Action {
    let (p, seed, t) = noise;
    if p > 0.0 {
        let s = rng::derive(seed, streams::NAV_NOISE);
        if rng::unit(s, t as u64, 0) < p {
            let k = (rng::unit(s, t as u64, 1) * 3.0) as usize;
            return Action::MOVES[k.min(2)];
        }
    }
    let pos = pose.position();
    let (Some(here), Some(goal)) = (map.index(map.cell_of(&pos)), map.index(map.cell_of(target))) else {
        return Action::TurnLeft;
    };
    if map.weight(goal).is_none() {
        return Action::TurnLeft;
    }
    let nav = NavField::get(cache, map, goal);
    let Some(d_here) = nav.at(here) else { return Action::TurnLeft };
    if here == goal {
        return heading_toward(pose, target);
    }
    let hp = map.pos(here);
    let mut descent: Option<(PathCost, usize)> = None;
    for (dx, dy) in NEIGHBORS {
        let Some(j) = map.index(CellPos::new(hp.x + dx, hp.y + dy)) else { continue };
        if let Some(c) = nav.at(j) {
            if c < d_here && descent.map_or(true, |d| c < d.0) {
                descent = Some((c, j));
            }
        }
    }
    let aim = descent.map_or(*target, |(_, j)| map.center(map.pos(j)));
    let aim_deg = pos.angle_to(&aim);

    // Every heading whose forward step is clear, ranked by the cost of the
    // cell it ends in, then heading error, then rotation (left first).
    let mut best: Option<((PathCost, f64, i32, i32), Heading)> = None;
    for h in 0..DIRECTIONS {
        let hd = Heading::from_index(h);
        let candidate = Pose { heading: hd, ..*pose };
        if (hd == pose.heading && bumped) || !forward_clear(map, &candidate) {
            continue;
        }
        let Some(c) = map.index(map.cell_of(&forward_of(&candidate))).and_then(|j| nav.at(j)) else { continue };
        let err = wrap_180(hd.degrees() as f64 - aim_deg).abs();
        if c > d_here || (c == d_here && err > 60.0) {
            continue;
        }
        let turns = pose.heading.turns_to(hd);
        let key = (c, err, turns.abs(), -turns);
        if best.map_or(true, |(b, _)| key.0.cmp(&b.0).then(key.1.total_cmp(&b.1)).then(key.2.cmp(&b.2)).then(key.3.cmp(&b.3)).is_lt()) {
            best = Some((key, hd));
        }
    }
    match best {
        Some((_, hd)) if hd == pose.heading => Action::Forward,
        Some((_, hd)) => turn_to(pose.heading, hd),
        None => Action::TurnLeft,
    }
}

/// Nearest cell (by belief-map cost) among `targets`, searching from `from`.
pub fn nearest_target(map: &ExploredMap, from: usize, targets: &[bool]) -> Option<usize> {
    let mut dist: Vec<Option<PathCost>> = vec![None; targets.len()];
    let mut heap = BinaryHeap::new();
    dist[from] = Some(PathCost::ZERO);
    heap.push(Reverse((PathCost::ZERO, from)));
    while let Some(Reverse((d, i))) = heap.pop() {
        if dist[i] != Some(d) {
            continue;
        }
        if targets[i] {
            return Some(i);
        }
        crate::world::for_each_neighbor(map, i, |j, c| {
            let nd = d + c;
            if dist[j].map_or(true, |old| nd < old) {
                dist[j] = Some(nd);
                heap.push(Reverse((nd, j)));
            }
        });
    }
    None
}
