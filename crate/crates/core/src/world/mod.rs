//! Ground-truth world: occupancy raster, geodesics, visibility and scene generation.

mod cost;
mod geodesic;
mod raycast;
mod scene;

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

pub use cost::PathCost;
pub use geodesic::{astar, ball, dijkstra, geodesic, geodesic_field, DistanceField, FieldCache, NEIGHBORS};
pub(crate) use geodesic::for_each_neighbor;
pub use raycast::{cast_ray, line_of_sight, traverse, SegmentWalk};
pub use scene::{generate_scene, SceneSpec};

use crate::geom::Point;

/// Cell size used throughout; equal to the forward step length.
pub const DEFAULT_RESOLUTION: f64 = 0.25;
/// Scenes whose larger side exceeds this many meters count as large.
pub const LARGE_SCENE_M: f64 = 40.0;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum WorldError {
    #[error("source point {0} is not on a free cell")]
    InvalidSource(Point),
    #[error("grid boundary is not closed")]
    NotClosed,
    #[error("cell vector length {got} does not match {width}x{height}")]
    ShapeMismatch { width: usize, height: usize, got: usize },
    #[error("invalid scene spec: {0}")]
    InvalidSpec(&'static str),
    #[error("scene generation failed after {0} attempts")]
    GenerationFailed(u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[repr(u8)]
pub enum Cell {
    Free = 0,
    Obstacle = 1,
}

/// Integer cell coordinates; may lie outside a grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CellPos {
    pub x: i64,
    pub y: i64,
}

impl CellPos {
    pub const fn new(x: i64, y: i64) -> Self {
        Self { x, y }
    }
}

/// Anything that can be searched as an 8-connected raster.
pub trait Raster {
    fn width(&self) -> usize;
    fn height(&self) -> usize;
    /// Cost multiplier for entering cell `idx`, `None` when impassable.
    fn weight(&self, idx: usize) -> Option<u32>;

    fn index(&self, pos: CellPos) -> Option<usize> {
        if pos.x < 0 || pos.y < 0 || pos.x >= self.width() as i64 || pos.y >= self.height() as i64 {
            None
        } else {
            Some(pos.y as usize * self.width() + pos.x as usize)
        }
    }

    fn pos(&self, idx: usize) -> CellPos {
        CellPos::new((idx % self.width()) as i64, (idx / self.width()) as i64)
    }
}

/// Closed 2D occupancy raster.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyGrid {
    resolution: f64,
    width: usize,
    height: usize,
    cells: Vec<Cell>,
}

impl OccupancyGrid {
    /// A `width` x `height` grid whose interior is free and whose boundary ring is obstacle.
    pub fn new_closed(width: usize, height: usize, resolution: f64) -> Self {
        assert!(width >= 3 && height >= 3, "grid must be at least 3x3");
        let mut cells = vec![Cell::Free; width * height];
        for x in 0..width {
            cells[x] = Cell::Obstacle;
            cells[(height - 1) * width + x] = Cell::Obstacle;
        }
        for y in 0..height {
            cells[y * width] = Cell::Obstacle;
            cells[y * width + width - 1] = Cell::Obstacle;
        }
        Self { resolution, width, height, cells }
    }

    pub fn from_cells(width: usize, height: usize, resolution: f64, cells: Vec<Cell>) -> Result<Self, WorldError> {
        if cells.len() != width * height {
            return Err(WorldError::ShapeMismatch { width, height, got: cells.len() });
        }
        let grid = Self { resolution, width, height, cells };
        if !grid.is_closed() {
            return Err(WorldError::NotClosed);
        }
        Ok(grid)
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn extent_m(&self) -> (f64, f64) {
        (self.width as f64 * self.resolution, self.height as f64 * self.resolution)
    }

    pub fn is_large(&self) -> bool {
        let (w, h) = self.extent_m();
        w.max(h) > LARGE_SCENE_M
    }

    pub fn is_closed(&self) -> bool {
        let (w, h) = (self.width, self.height);
        (0..w).all(|x| self.cells[x] == Cell::Obstacle && self.cells[(h - 1) * w + x] == Cell::Obstacle)
            && (0..h).all(|y| self.cells[y * w] == Cell::Obstacle && self.cells[y * w + w - 1] == Cell::Obstacle)
    }

    pub fn cell(&self, pos: CellPos) -> Cell {
        self.index(pos).map_or(Cell::Obstacle, |i| self.cells[i])
    }

    pub fn is_free(&self, pos: CellPos) -> bool {
        self.cell(pos) == Cell::Free
    }

    /// Set an interior cell. Boundary cells stay obstacle.
    pub fn set(&mut self, pos: CellPos, cell: Cell) {
        let on_boundary = pos.x <= 0 || pos.y <= 0 || pos.x >= self.width as i64 - 1 || pos.y >= self.height as i64 - 1;
        if on_boundary {
            return;
        }
        if let Some(i) = self.index(pos) {
            self.cells[i] = cell;
        }
    }

    pub fn cell_of(&self, p: &Point) -> CellPos {
        cell_of(p, self.resolution)
    }

    pub fn center(&self, pos: CellPos) -> Point {
        center(pos, self.resolution)
    }

    pub fn point_is_free(&self, p: &Point) -> bool {
        self.is_free(self.cell_of(p))
    }

    pub fn free_count(&self) -> usize {
        self.cells.iter().filter(|c| **c == Cell::Free).count()
    }

    /// Number of 8-connected free components (diagonals need both orthogonal cells free).
    pub fn free_components(&self) -> usize {
        let mut seen = vec![false; self.cells.len()];
        let mut count = 0;
        let mut stack = Vec::new();
        for start in 0..self.cells.len() {
            if seen[start] || self.cells[start] != Cell::Free {
                continue;
            }
            count += 1;
            seen[start] = true;
            stack.push(start);
            while let Some(i) = stack.pop() {
                geodesic::for_each_neighbor(self, i, |j, _| {
                    if !seen[j] {
                        seen[j] = true;
                        stack.push(j);
                    }
                });
            }
        }
        count
    }
}

impl Raster for OccupancyGrid {
    fn width(&self) -> usize {
        self.width
    }

    fn height(&self) -> usize {
        self.height
    }

    fn weight(&self, idx: usize) -> Option<u32> {
        (self.cells[idx] == Cell::Free).then_some(1)
    }
}

pub fn cell_of(p: &Point, resolution: f64) -> CellPos {
    CellPos::new(libm::floor(p.x / resolution) as i64, libm::floor(p.y / resolution) as i64)
}

pub fn center(pos: CellPos, resolution: f64) -> Point {
    Point::new((pos.x as f64 + 0.5) * resolution, (pos.y as f64 + 0.5) * resolution)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_grid_has_obstacle_ring() {
        let g = OccupancyGrid::new_closed(6, 4, 0.25);
        assert!(g.is_closed());
        assert_eq!(g.free_count(), 4 * 2);
        assert_eq!(g.free_components(), 1);
    }

    #[test]
    fn from_cells_rejects_open_boundary() {
        let cells = vec![Cell::Free; 9];
        assert_eq!(OccupancyGrid::from_cells(3, 3, 0.25, cells), Err(WorldError::NotClosed));
    }

    #[test]
    fn point_maps_to_floor_cell() {
        let g = OccupancyGrid::new_closed(10, 10, 0.25);
        assert_eq!(g.cell_of(&Point::new(0.25, 0.49)), CellPos::new(1, 1));
        assert_eq!(g.cell_of(&Point::new(0.2499, 0.5)), CellPos::new(0, 2));
        assert_eq!(g.center(CellPos::new(2, 3)), Point::new(0.625, 0.875));
    }

    #[test]
    fn large_threshold() {
        assert!(!OccupancyGrid::new_closed(160, 120, 0.25).is_large());
        assert!(OccupancyGrid::new_closed(161, 40, 0.25).is_large());
    }

    #[test]
    fn diagonal_pinch_splits_components() {
        // two free cells touching only at a corner between two obstacles
        let mut g = OccupancyGrid::new_closed(4, 4, 0.25);
        g.set(CellPos::new(2, 1), Cell::Obstacle);
        g.set(CellPos::new(1, 2), Cell::Obstacle);
        assert_eq!(g.free_components(), 2);
    }
}
