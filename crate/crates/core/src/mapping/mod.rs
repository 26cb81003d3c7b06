//! Agent-side belief: explored occupancy, frontiers and the topological graph.

mod frontier;
mod graph;

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

pub use frontier::{detect_frontiers, frontier_cells, representative_frontier, Frontier, FrontierMask, MIN_FRONTIER_CELLS};
pub use graph::{Node, Slot, TopoGraph, L_TH};

use crate::env::{DepthScan, Observation};
use crate::geom::Point;
use crate::world::{self, CellPos, Raster, SegmentWalk};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[repr(u8)]
pub enum Belief {
    Unknown = 0,
    Free = 1,
    Obstacle = 2,
}

/// Occupancy as accumulated from depth scans.
#[derive(Debug, Clone, PartialEq)]
pub struct ExploredMap {
    resolution: f64,
    width: usize,
    height: usize,
    cells: Vec<Belief>,
    unknown: usize,
    version: u64,
}

impl ExploredMap {
    pub fn new(width: usize, height: usize, resolution: f64) -> Self {
        Self { resolution, width, height, cells: vec![Belief::Unknown; width * height], unknown: width * height, version: 0 }
    }

    /// Blank map with the same shape as `grid`.
    pub fn like(grid: &world::OccupancyGrid) -> Self {
        Self::new(grid.width(), grid.height(), grid.resolution())
    }

    pub fn from_cells(width: usize, height: usize, resolution: f64, cells: Vec<Belief>) -> Self {
        assert_eq!(cells.len(), width * height);
        let unknown = cells.iter().filter(|c| **c == Belief::Unknown).count();
        Self { resolution, width, height, cells, unknown, version: 0 }
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn cells(&self) -> &[Belief] {
        &self.cells
    }

    pub fn unknown_count(&self) -> usize {
        self.unknown
    }

    /// Incremented whenever a cell changes.
    pub fn version(&self) -> u64 {
        self.version
    }

    pub fn get(&self, idx: usize) -> Belief {
        self.cells[idx]
    }

    pub fn at(&self, pos: CellPos) -> Belief {
        self.index(pos).map_or(Belief::Obstacle, |i| self.cells[i])
    }

    pub fn cell_of(&self, p: &Point) -> CellPos {
        world::cell_of(p, self.resolution)
    }

    pub fn center(&self, pos: CellPos) -> Point {
        world::center(pos, self.resolution)
    }

    pub fn set(&mut self, idx: usize, b: Belief) {
        let old = self.cells[idx];
        if old == b {
            return;
        }
        if old == Belief::Unknown {
            self.unknown -= 1;
        } else if b == Belief::Unknown {
            self.unknown += 1;
        }
        self.cells[idx] = b;
        self.version += 1;
    }

    /// Carve the cells each ray passed through and mark the cell it stopped in.
    ///
    /// Rays are re-walked with the same geometry the sensor used, so a cell is
    /// marked free only if the ray entered it strictly before the reported range
    /// and its center lies within sensor range.
    pub fn integrate_scan(&mut self, scan: &DepthScan) {
        for (i, &range) in scan.ranges.iter().enumerate() {
            let (ux, uy) = scan.direction(i);
            let end = scan.origin.offset(ux * scan.max_range, uy * scan.max_range);
            // cells entered exactly at the reported range; more than one means a
            // corner crossing where the blocking cell is ambiguous
            let mut stop: Option<usize> = None;
            let mut ambiguous = false;
            for (c, t) in SegmentWalk::new(scan.origin, end, self.resolution) {
                let Some(idx) = self.index(c) else { break };
                let d = t * scan.max_range;
                if d < range {
                    if self.center(c).distance(&scan.origin) <= scan.max_range {
                        self.set(idx, Belief::Free);
                    }
                } else if d == range && range < scan.max_range {
                    ambiguous |= stop.is_some();
                    stop = Some(idx);
                } else {
                    break;
                }
            }
            if let Some(idx) = stop.filter(|_| !ambiguous) {
                if self.cells[idx] != Belief::Free {
                    self.set(idx, Belief::Obstacle);
                }
            }
        }
    }

    /// Whether the segment `a -> b` crosses no cell believed to be an obstacle.
    pub fn clear_segment(&self, a: Point, b: Point) -> bool {
        SegmentWalk::new(a, b, self.resolution).all(|(c, _)| self.at(c) != Belief::Obstacle)
    }
}

impl Raster for ExploredMap {
    fn width(&self) -> usize {
        self.width
    }

    fn height(&self) -> usize {
        self.height
    }

    fn weight(&self, idx: usize) -> Option<u32> {
        match self.cells[idx] {
            Belief::Free => Some(1),
            Belief::Unknown => Some(2),
            Belief::Obstacle => None,
        }
    }
}

/// Fold one observation into the map and graph. Returns the node the agent is localized to.
pub fn integrate(map: &mut ExploredMap, graph: &mut TopoGraph, obs: &Observation) -> usize {
    map.integrate_scan(&obs.depth);
    graph.localize(&obs.pose, obs.t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{depth_scan, SensorConfig};
    use crate::geom::{Heading, Pose};
    use crate::world::{Cell, OccupancyGrid};

    #[test]
    fn scan_integration_is_sound() {
        let mut g = OccupancyGrid::new_closed(40, 40, 0.25);
        for y in 5..30 {
            g.set(CellPos::new(20, y), Cell::Obstacle);
        }
        let mut m = ExploredMap::like(&g);
        for h in 0..12 {
            let pose = Pose { x: 3.125, y: 4.125, heading: Heading::from_index(h) };
            m.integrate_scan(&depth_scan(&g, &pose, &SensorConfig::default()));
        }
        let mut free = 0;
        for (i, b) in m.cells().iter().enumerate() {
            if *b == Belief::Free {
                assert_eq!(g.cells()[i], Cell::Free);
                free += 1;
            }
        }
        assert!(free > 500);
        assert_eq!(m.at(CellPos::new(20, 16)), Belief::Obstacle);
        assert_eq!(m.unknown_count(), m.cells().iter().filter(|c| **c == Belief::Unknown).count());
    }

    #[test]
    fn unknown_costs_double() {
        let mut m = ExploredMap::new(4, 4, 0.25);
        m.set(5, Belief::Free);
        m.set(6, Belief::Obstacle);
        assert_eq!(m.weight(5), Some(1));
        assert_eq!(m.weight(0), Some(2));
        assert_eq!(m.weight(6), None);
        assert_eq!(m.unknown_count(), 14);
    }
}
