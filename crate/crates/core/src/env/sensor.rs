use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::ObjectId;
use crate::geom::{bearing, Point, Pose};
use crate::world::{cast_ray, line_of_sight, OccupancyGrid};

/// Field of view and range of the geometric sensor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SensorConfig {
    pub range_m: f64,
    pub fov_deg: f64,
    pub ray_step_deg: f64,
}

impl Default for SensorConfig {
    fn default() -> Self {
        Self { range_m: 5.0, fov_deg: 90.0, ray_step_deg: 1.0 }
    }
}

/// Fan of range readings, from the rightmost ray (`start_deg`) counter-clockwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DepthScan {
    pub origin: Point,
    pub start_deg: f64,
    pub step_deg: f64,
    pub max_range: f64,
    pub ranges: Vec<f64>,
}

impl DepthScan {
    pub fn ray_count(&self) -> usize {
        self.ranges.len()
    }

    /// Unit direction of ray `i`.
    pub fn direction(&self, i: usize) -> (f64, f64) {
        let a = (self.start_deg + i as f64 * self.step_deg).to_radians();
        (libm::cos(a), libm::sin(a))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VisibleObject {
    pub id: ObjectId,
    /// Euclidean distance in meters.
    pub distance: f64,
    /// Degrees, positive to the left of the heading.
    pub bearing: f64,
    pub position: Point,
}

pub fn depth_scan(grid: &OccupancyGrid, pose: &Pose, cfg: &SensorConfig) -> DepthScan {
    let half = cfg.fov_deg / 2.0;
    let n = libm::round(cfg.fov_deg / cfg.ray_step_deg) as usize + 1;
    let mut scan = DepthScan {
        origin: pose.position(),
        start_deg: pose.heading.degrees() as f64 - half,
        step_deg: cfg.ray_step_deg,
        max_range: cfg.range_m,
        ranges: Vec::with_capacity(n),
    };
    for i in 0..n {
        let r = cast_ray(grid, scan.origin, scan.direction(i), cfg.range_m);
        scan.ranges.push(r);
    }
    scan
}

/// Whether an object at `p` is inside the field of view, in range and unoccluded.
pub fn sees(grid: &OccupancyGrid, pose: &Pose, p: &Point, cfg: &SensorConfig) -> Option<(f64, f64)> {
    let origin = pose.position();
    let d = origin.distance(p);
    if d > cfg.range_m {
        return None;
    }
    let b = bearing(&origin, pose.heading, p);
    if b.abs() > cfg.fov_deg / 2.0 {
        return None;
    }
    line_of_sight(grid, origin, *p).then_some((d, b))
}

pub fn visible_objects<'a>(
    grid: &OccupancyGrid,
    pose: &Pose,
    candidates: impl Iterator<Item = (ObjectId, &'a Point)>,
    cfg: &SensorConfig,
) -> Vec<VisibleObject> {
    candidates
        .filter_map(|(id, p)| sees(grid, pose, p, cfg).map(|(distance, bearing)| VisibleObject { id, distance, bearing, position: *p }))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Heading;
    use crate::world::{Cell, CellPos};

    fn open(n: usize) -> OccupancyGrid {
        OccupancyGrid::new_closed(n, n, 0.25)
    }

    #[test]
    fn object_ahead_is_seen_at_true_distance() {
        let g = open(40);
        let pose = Pose { x: 2.125, y: 5.125, heading: Heading::EAST };
        let (d, b) = sees(&g, &pose, &Point::new(4.125, 5.125), &SensorConfig::default()).unwrap();
        assert_eq!(d, 2.0);
        assert_eq!(b, 0.0);
    }

    #[test]
    fn object_behind_is_not_seen() {
        let g = open(40);
        let pose = Pose { x: 5.125, y: 5.125, heading: Heading::EAST };
        assert!(sees(&g, &pose, &Point::new(3.125, 5.125), &SensorConfig::default()).is_none());
    }

    #[test]
    fn wall_occludes() {
        let mut g = open(40);
        for y in 1..39 {
            g.set(CellPos::new(14, y), Cell::Obstacle);
        }
        let pose = Pose { x: 2.125, y: 5.125, heading: Heading::EAST };
        assert!(sees(&g, &pose, &Point::new(4.125, 5.125), &SensorConfig::default()).is_none());
    }

    #[test]
    fn scan_has_one_ray_per_degree_and_is_clipped() {
        let g = open(80);
        let pose = Pose { x: 10.125, y: 10.125, heading: Heading::NORTH };
        let s = depth_scan(&g, &pose, &SensorConfig::default());
        assert_eq!(s.ray_count(), 91);
        assert!(s.ranges.iter().all(|r| *r > 0.0 && *r <= 5.0));
        assert_eq!(s.ranges[45], 5.0);
    }
}
