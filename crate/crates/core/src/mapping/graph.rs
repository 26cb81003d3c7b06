use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::geom::{Point, Pose, DIRECTIONS};

/// A new node is created once the agent is this far (meters) from every node.
pub const L_TH: f64 = 2.0;

/// Scores and visit data of one node direction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Slot {
    pub exploration: f64,
    /// One entry per object slot (targets, container, goal).
    pub closeness: Vec<f64>,
    pub feature_present: bool,
    /// Step of the latest score write.
    pub updated_t: Option<u32>,
    pub last_visit_t: Option<u32>,
}

impl Slot {
    fn new(n_objects: usize) -> Self {
        Self { exploration: 0.0, closeness: vec![0.0; n_objects], feature_present: false, updated_t: None, last_visit_t: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub id: usize,
    pub position: Point,
    pub slots: Vec<Slot>,
    pub last_visit_t: u32,
}

/// Topological graph with twelve direction slots per node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopoGraph {
    pub nodes: Vec<Node>,
    pub edges: BTreeSet<(usize, usize)>,
    pub current: Option<usize>,
    n_objects: usize,
}

impl TopoGraph {
    pub fn new(n_objects: usize) -> Self {
        Self { nodes: Vec::new(), edges: BTreeSet::new(), current: None, n_objects }
    }

    pub fn n_objects(&self) -> usize {
        self.n_objects
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nearest node and its distance.
    pub fn nearest(&self, p: &Point) -> Option<(usize, f64)> {
        self.nodes
            .iter()
            .map(|n| (n.id, n.position.distance(p)))
            .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
    }

    /// Localize the agent: nearest node within `L_TH`, otherwise a new node at the agent.
    /// Marks the heading slot as visited and links consecutive nodes.
    pub fn localize(&mut self, pose: &Pose, t: u32) -> usize {
        let p = pose.position();
        let id = match self.nearest(&p) {
            Some((id, d)) if d < L_TH => id,
            _ => {
                let id = self.nodes.len();
                self.nodes.push(Node { id, position: p, slots: vec![Slot::new(self.n_objects); DIRECTIONS], last_visit_t: t });
                id
            }
        };
        if let Some(prev) = self.current {
            if prev != id {
                self.edges.insert((prev.min(id), prev.max(id)));
            }
        }
        self.current = Some(id);
        let node = &mut self.nodes[id];
        node.last_visit_t = t;
        let slot = &mut node.slots[pose.heading.index()];
        slot.feature_present = true;
        slot.last_visit_t = Some(t);
        id
    }

    /// Overwrite exploration scores at `theta - 1, theta, theta + 1` and closeness at `theta`.
    pub fn store_scores(&mut self, node: usize, theta: usize, exploration: [f64; 3], closeness: &[f64], t: u32) {
        let slots = &mut self.nodes[node].slots;
        for (k, e) in exploration.iter().enumerate() {
            let s = &mut slots[(theta + DIRECTIONS + k - 1) % DIRECTIONS];
            s.exploration = *e;
            s.updated_t = Some(t);
        }
        slots[theta].closeness.copy_from_slice(closeness);
    }

    /// Forget everything stored about one object.
    pub fn zero_closeness(&mut self, object: usize) {
        for n in &mut self.nodes {
            for s in &mut n.slots {
                s.closeness[object] = 0.0;
            }
        }
    }

    pub fn clear_closeness(&mut self, node: usize, dir: usize, object: usize) {
        self.nodes[node].slots[dir].closeness[object] = 0.0;
    }

    /// Highest stored closeness for `object` as `(node, direction, score)`.
    /// Ties go to the lowest node, then the lowest direction.
    pub fn best_closeness(&self, object: usize) -> Option<(usize, usize, f64)> {
        let mut best: Option<(usize, usize, f64)> = None;
        for n in &self.nodes {
            for (d, s) in n.slots.iter().enumerate() {
                let v = s.closeness[object];
                if best.map_or(true, |b| v > b.2) {
                    best = Some((n.id, d, v));
                }
            }
        }
        best
    }

    pub fn max_closeness(&self, object: usize) -> f64 {
        self.best_closeness(object).map_or(0.0, |b| b.2)
    }
}
