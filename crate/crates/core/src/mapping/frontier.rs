use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{Belief, ExploredMap};
use crate::geom::{bearing, Point, Pose, DIRECTIONS};
use crate::world::{CellPos, Raster, NEIGHBORS};

/// Clusters smaller than this are ignored.
pub const MIN_FRONTIER_CELLS: usize = 2;

/// A connected group of frontier cells and the node direction it hangs off.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Frontier {
    pub id: u32,
    /// Cell indices, ascending.
    pub cells: Vec<usize>,
    pub center: Point,
    /// `(node, direction)`.
    pub parent: (usize, usize),
}

impl Frontier {
    /// The member cell closest to the centroid (lowest index on ties).
    pub fn anchor(&self, map: &ExploredMap) -> usize {
        let mut best = (f64::INFINITY, usize::MAX);
        for &c in &self.cells {
            let d = map.center(map.pos(c)).distance(&self.center);
            if d < best.0 {
                best = (d, c);
            }
        }
        best.1
    }
}

/// Explored-free cells with at least one unknown 4-neighbor, ascending.
pub fn frontier_cells(map: &ExploredMap) -> Vec<usize> {
    let mut out = Vec::new();
    for (i, b) in map.cells().iter().enumerate() {
        if *b != Belief::Free {
            continue;
        }
        let p = map.pos(i);
        let open = NEIGHBORS[..4].iter().any(|(dx, dy)| {
            let q = CellPos::new(p.x + dx, p.y + dy);
            map.index(q).is_some_and(|j| map.get(j) == Belief::Unknown)
        });
        if open {
            out.push(i);
        }
    }
    out
}

fn clusters(map: &ExploredMap, cells: &[usize]) -> Vec<Vec<usize>> {
    let mut label: BTreeMap<usize, bool> = cells.iter().map(|c| (*c, false)).collect();
    let mut out = Vec::new();
    for &start in cells {
        if label[&start] {
            continue;
        }
        label.insert(start, true);
        let mut members = vec![start];
        let mut stack = vec![start];
        while let Some(i) = stack.pop() {
            let p = map.pos(i);
            for (dx, dy) in NEIGHBORS {
                let Some(j) = map.index(CellPos::new(p.x + dx, p.y + dy)) else { continue };
                if let Some(seen) = label.get_mut(&j) {
                    if !*seen {
                        *seen = true;
                        members.push(j);
                        stack.push(j);
                    }
                }
            }
        }
        members.sort_unstable();
        out.push(members);
    }
    out
}

fn centroid(map: &ExploredMap, cells: &[usize]) -> Point {
    let (mut x, mut y) = (0.0, 0.0);
    for &c in cells {
        let p = map.center(map.pos(c));
        x += p.x;
        y += p.y;
    }
    let n = cells.len() as f64;
    Point::new(x / n, y / n)
}

/// Direction slot for a new frontier seen from `pose`.
fn parent_direction(pose: &Pose, center: &Point) -> usize {
    let theta = pose.heading.index();
    let b = bearing(&pose.position(), pose.heading, center);
    if b.abs() <= 15.0 {
        theta
    } else if b > 0.0 {
        (theta + 1) % DIRECTIONS
    } else {
        (theta + DIRECTIONS - 1) % DIRECTIONS
    }
}

/// Detect and cluster frontiers, carrying identity and parent over from `prev`.
///
/// Each cluster inherits from the previous frontier it overlaps most. When
/// several clusters inherit from the same one, the largest overlap keeps its
/// id and the others get fresh ids with the same parent. Clusters that overlap
/// nothing hang off `(node, direction of the centroid)`.
pub fn detect_frontiers(map: &ExploredMap, prev: &[Frontier], next_id: &mut u32, pose: &Pose, node: usize) -> Vec<Frontier> {
    let cells = frontier_cells(map);
    let groups: Vec<Vec<usize>> = clusters(map, &cells).into_iter().filter(|g| g.len() >= MIN_FRONTIER_CELLS).collect();

    let owner: BTreeMap<usize, usize> = prev.iter().enumerate().flat_map(|(k, f)| f.cells.iter().map(move |c| (*c, k))).collect();
    let matches: Vec<Option<(usize, usize)>> = groups
        .iter()
        .map(|g| {
            let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
            for c in g {
                if let Some(k) = owner.get(c) {
                    *counts.entry(*k).or_default() += 1;
                }
            }
            counts.into_iter().max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)))
        })
        .collect();

    let mut keeper: BTreeMap<usize, usize> = BTreeMap::new();
    for (gi, m) in matches.iter().enumerate() {
        if let Some((k, n)) = m {
            let e = keeper.entry(*k).or_insert(gi);
            if matches[*e].map_or(0, |m| m.1) < *n {
                *e = gi;
            }
        }
    }

    groups
        .into_iter()
        .enumerate()
        .map(|(gi, cells)| {
            let center = centroid(map, &cells);
            let (id, parent) = match matches[gi] {
                Some((k, _)) => {
                    let id = if keeper[&k] == gi {
                        prev[k].id
                    } else {
                        *next_id += 1;
                        *next_id - 1
                    };
                    (id, prev[k].parent)
                }
                None => {
                    *next_id += 1;
                    (*next_id - 1, (node, parent_direction(pose, &center)))
                }
            };
            Frontier { id, cells, center, parent }
        })
        .collect()
}

/// Which node directions have at least one live frontier.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FrontierMask {
    pub slots: Vec<[bool; DIRECTIONS]>,
}

impl FrontierMask {
    pub fn new(frontiers: &[Frontier], n_nodes: usize) -> Self {
        let mut slots = vec![[false; DIRECTIONS]; n_nodes];
        for f in frontiers {
            if f.parent.0 < n_nodes {
                slots[f.parent.0][f.parent.1] = true;
            }
        }
        Self { slots }
    }

    pub fn get(&self, node: usize, dir: usize) -> bool {
        self.slots.get(node).is_some_and(|s| s[dir])
    }

    pub fn any(&self) -> bool {
        self.slots.iter().any(|s| s.iter().any(|b| *b))
    }
}

/// The frontier under `(node, dir)` whose centroid is nearest the mean of all
/// centroids under that slot; ties go to the lowest id.
pub fn representative_frontier(frontiers: &[Frontier], node: usize, dir: usize) -> Option<&Frontier> {
    let members: Vec<&Frontier> = frontiers.iter().filter(|f| f.parent == (node, dir)).collect();
    if members.is_empty() {
        return None;
    }
    let n = members.len() as f64;
    let mean = Point::new(members.iter().map(|f| f.center.x).sum::<f64>() / n, members.iter().map(|f| f.center.y).sum::<f64>() / n);
    members.into_iter().min_by(|a, b| a.center.distance(&mean).total_cmp(&b.center.distance(&mean)).then(a.id.cmp(&b.id)))
}
