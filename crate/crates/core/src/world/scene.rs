use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Cell, CellPos, OccupancyGrid, WorldError, DEFAULT_RESOLUTION};
use crate::rng;

const MAX_ATTEMPTS: u32 = 16;
const CORRIDOR_PROBABILITY: f64 = 0.25;
const EXTRA_DOOR_PROBABILITY: f64 = 0.3;
const MIN_ROOM_M: f64 = 2.5;

/// Parameters of the procedural rooms-and-corridors layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneSpec {
    /// Side length of the square scene in meters.
    pub extent_m: f64,
    pub room_count: usize,
    /// Width of corridors and doorways.
    pub corridor_width_m: f64,
    /// Fraction of room area covered by furniture blocks.
    pub obstacle_density: f64,
    #[serde(default = "default_resolution")]
    pub resolution: f64,
}

fn default_resolution() -> f64 {
    DEFAULT_RESOLUTION
}

impl Default for SceneSpec {
    fn default() -> Self {
        Self { extent_m: 30.0, room_count: 6, corridor_width_m: 1.0, obstacle_density: 0.03, resolution: DEFAULT_RESOLUTION }
    }
}

impl SceneSpec {
    pub fn with_extent(extent_m: f64) -> Self {
        Self { extent_m, ..Self::default() }
    }

    fn validate(&self) -> Result<(), WorldError> {
        if !(self.resolution > 0.0) {
            return Err(WorldError::InvalidSpec("resolution must be positive"));
        }
        if !(self.extent_m >= 10.0) {
            return Err(WorldError::InvalidSpec("extent_m must be at least 10"));
        }
        if !(self.corridor_width_m >= 3.0 * self.resolution) {
            return Err(WorldError::InvalidSpec("corridor_width_m must be at least three cells"));
        }
        if self.room_count == 0 {
            return Err(WorldError::InvalidSpec("room_count must be at least 1"));
        }
        if !(0.0..0.5).contains(&self.obstacle_density) {
            return Err(WorldError::InvalidSpec("obstacle_density must be in [0, 0.5)"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
struct Rect {
    x0: i64,
    y0: i64,
    x1: i64,
    y1: i64,
}

impl Rect {
    fn w(&self) -> i64 {
        self.x1 - self.x0 + 1
    }
    fn h(&self) -> i64 {
        self.y1 - self.y0 + 1
    }
    fn area(&self) -> i64 {
        self.w() * self.h()
    }
}

/// A straight wall segment: `vertical` walls sit at x = `at` and span y in `lo..=hi`.
#[derive(Debug, Clone, Copy)]
struct Wall {
    vertical: bool,
    at: i64,
    lo: i64,
    hi: i64,
}

impl Wall {
    fn cell(&self, s: i64) -> CellPos {
        if self.vertical {
            CellPos::new(self.at, s)
        } else {
            CellPos::new(s, self.at)
        }
    }

    fn sides(&self, s: i64) -> (CellPos, CellPos) {
        if self.vertical {
            (CellPos::new(self.at - 1, s), CellPos::new(self.at + 1, s))
        } else {
            (CellPos::new(s, self.at - 1), CellPos::new(s, self.at + 1))
        }
    }
}

/// Generate a closed, connected rooms-and-corridors scene. Equal inputs give identical grids.
pub fn generate_scene(seed: u64, spec: &SceneSpec) -> Result<OccupancyGrid, WorldError> {
    spec.validate()?;
    for attempt in 0..MAX_ATTEMPTS {
        let mut r = rng::stream(rng::derive(seed, attempt as u64), rng::streams::SCENE);
        if let Some(g) = try_generate(&mut r, spec) {
            return Ok(g);
        }
    }
    Err(WorldError::GenerationFailed(MAX_ATTEMPTS))
}

fn try_generate<R: Rng>(r: &mut R, spec: &SceneSpec) -> Option<OccupancyGrid> {
    let n = libm::round(spec.extent_m / spec.resolution) as usize;
    let mut grid = OccupancyGrid::new_closed(n, n, spec.resolution);
    let door = libm::ceil(spec.corridor_width_m / spec.resolution - 1e-9) as i64;
    let min_room = (libm::ceil(MIN_ROOM_M / spec.resolution) as i64).max(door + 2);

    let mut rooms = alloc::vec![Rect { x0: 1, y0: 1, x1: n as i64 - 2, y1: n as i64 - 2 }];
    let mut walls: Vec<Wall> = Vec::new();

    while rooms.len() < spec.room_count {
        let splittable = |rc: &Rect| rc.w().max(rc.h()) >= 2 * min_room + 1;
        let (idx, room) = rooms
            .iter()
            .copied()
            .enumerate()
            .filter(|(_, rc)| splittable(rc))
            .max_by_key(|(i, rc)| (rc.area(), core::cmp::Reverse(*i)))?;
        rooms.swap_remove(idx);
        let vertical = if room.w() == room.h() { r.gen_bool(0.5) } else { room.w() > room.h() };
        let (lo, hi) = if vertical { (room.x0, room.x1) } else { (room.y0, room.y1) };
        let (span_lo, span_hi) = if vertical { (room.y0, room.y1) } else { (room.x0, room.x1) };
        let corridor = hi - lo + 1 >= 2 * min_room + door + 2 && r.gen_bool(CORRIDOR_PROBABILITY);
        let far = if corridor { door + 1 } else { 0 };
        let at = r.gen_range(lo + min_room..=hi - min_room - far);
        let mut new_walls = alloc::vec![Wall { vertical, at, lo: span_lo, hi: span_hi }];
        if corridor {
            new_walls.push(Wall { vertical, at: at + far, lo: span_lo, hi: span_hi });
        }
        for w in &new_walls {
            for s in w.lo..=w.hi {
                grid.set(w.cell(s), Cell::Obstacle);
            }
        }
        walls.extend(new_walls);
        let (a, b) = if vertical {
            (Rect { x1: at - 1, ..room }, Rect { x0: at + far + 1, ..room })
        } else {
            (Rect { y1: at - 1, ..room }, Rect { y0: at + far + 1, ..room })
        };
        rooms.push(a);
        rooms.push(b);
    }

    for w in &walls {
        carve_door(r, &mut grid, w, door)?;
        if r.gen_bool(EXTRA_DOOR_PROBABILITY) {
            carve_door(r, &mut grid, w, door)?;
        }
    }
    if grid.free_components() != 1 {
        return None;
    }

    for room in &rooms {
        furnish(r, &mut grid, room, spec.obstacle_density);
    }
    (grid.free_components() == 1).then_some(grid)
}

fn carve_door<R: Rng>(r: &mut R, grid: &mut OccupancyGrid, w: &Wall, door: i64) -> Option<()> {
    let candidates: Vec<i64> = (w.lo..=w.hi - door + 1)
        .filter(|&s| {
            (s..s + door).all(|k| {
                let (a, b) = w.sides(k);
                grid.is_free(a) && grid.is_free(b)
            })
        })
        .collect();
    if candidates.is_empty() {
        return None;
    }
    let s = candidates[r.gen_range(0..candidates.len())];
    for k in s..s + door {
        grid.set(w.cell(k), Cell::Free);
    }
    Some(())
}

fn furnish<R: Rng>(r: &mut R, grid: &mut OccupancyGrid, room: &Rect, density: f64) {
    let target = libm::round(density * room.area() as f64) as i64;
    let mut placed = 0;
    let mut tries = 0;
    while placed < target && tries < 200 {
        tries += 1;
        let (bw, bh) = if r.gen_bool(0.5) { (r.gen_range(1..=3), r.gen_range(1..=4)) } else { (r.gen_range(1..=4), r.gen_range(1..=3)) };
        if room.w() < bw + 4 || room.h() < bh + 4 {
            continue;
        }
        let x = r.gen_range(room.x0 + 2..=room.x1 - 1 - bw);
        let y = r.gen_range(room.y0 + 2..=room.y1 - 1 - bh);
        let cells: Vec<CellPos> =
            (x..x + bw).flat_map(|cx| (y..y + bh).map(move |cy| CellPos::new(cx, cy))).filter(|c| grid.is_free(*c)).collect();
        for c in &cells {
            grid.set(*c, Cell::Obstacle);
        }
        if grid.free_components() == 1 {
            placed += cells.len() as i64;
        } else {
            for c in &cells {
                grid.set(*c, Cell::Free);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_scene_is_closed_connected_and_sized() {
        let g = generate_scene(7, &SceneSpec::default()).unwrap();
        assert_eq!((g.width, g.height), (120, 120));
        assert!(g.is_closed());
        assert_eq!(g.free_components(), 1);
        // rooms leave most of the floor walkable
        assert!(g.free_count() > 120 * 120 / 2);
    }

    #[test]
    fn same_seed_same_grid() {
        let spec = SceneSpec::default();
        assert_eq!(generate_scene(7, &spec).unwrap().cells, generate_scene(7, &spec).unwrap().cells);
        assert_ne!(generate_scene(7, &spec).unwrap().cells, generate_scene(8, &spec).unwrap().cells);
    }

    #[test]
    fn large_extent_is_large() {
        let g = generate_scene(3, &SceneSpec::with_extent(48.0)).unwrap();
        assert!(g.is_large());
    }

    #[test]
    fn bad_specs_are_rejected() {
        assert!(matches!(generate_scene(1, &SceneSpec::with_extent(9.0)), Err(WorldError::InvalidSpec(_))));
        let narrow = SceneSpec { corridor_width_m: 0.5, ..SceneSpec::default() };
        assert!(matches!(generate_scene(1, &narrow), Err(WorldError::InvalidSpec(_))));
    }

    #[test]
    fn impossible_room_count_fails() {
        let spec = SceneSpec { extent_m: 10.0, room_count: 200, ..SceneSpec::default() };
        assert_eq!(generate_scene(1, &spec), Err(WorldError::GenerationFailed(MAX_ATTEMPTS)));
    }
}
