//! Task configuration sampling under geodesic placement constraints.
//!
//! Placement order is goal, objects, container, start. Each stage draws from
//! its own seeded stream, and objects are accepted one at a time against the
//! objects before them, so an episode sampled with more targets extends the
//! one sampled with fewer (same seed) whenever neither needed a goal retry.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::geom::{Heading, Point, Pose, DIRECTIONS};
use crate::rng::{self, streams};
use crate::world::{self, OccupancyGrid, PathCost, Raster};

/// Cap on placement draws per episode.
pub const MAX_ATTEMPTS: u32 = 10_000;
/// Size of the object color vocabulary.
pub const COLORS: u8 = 8;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EpisodeError {
    #[error("no feasible placement for level on scene {scene_id}")]
    InfeasibleLevel { scene_id: String },
    #[error("invalid level parameters: {0}")]
    InvalidLevel(&'static str),
    #[error("suite needs at least one scene and one episode")]
    EmptySuite,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GoalRange {
    pub min: f64,
    #[serde(with = "crate::serde_inf")]
    pub max: f64,
}

/// Difficulty knobs of a task level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelParams {
    pub name: String,
    pub goal_range: GoalRange,
    pub obj_dist_min: f64,
    #[serde(with = "crate::serde_inf")]
    pub obj_dist_max: f64,
    pub k: usize,
}

impl LevelParams {
    pub fn default_level() -> Self {
        Self {
            name: "default".to_string(),
            goal_range: GoalRange { min: 2.0, max: 15.0 },
            obj_dist_min: 2.0,
            obj_dist_max: 12.0,
            k: 4,
        }
    }

    pub fn hard() -> Self {
        Self { name: "hard".to_string(), goal_range: GoalRange { min: 2.0, max: 25.0 }, ..Self::default_level() }
    }

    pub fn harder() -> Self {
        Self { name: "harder".to_string(), goal_range: GoalRange { min: 2.0, max: 35.0 }, ..Self::default_level() }
    }

    /// Constraints that always hold on a connected grid.
    pub fn unconstrained(k: usize) -> Self {
        Self {
            name: "unconstrained".to_string(),
            goal_range: GoalRange { min: 0.0, max: f64::INFINITY },
            obj_dist_min: 0.0,
            obj_dist_max: f64::INFINITY,
            k,
        }
    }

    pub fn by_name(name: &str) -> Option<Self> {
        match name {
            "default" => Some(Self::default_level()),
            "hard" => Some(Self::hard()),
            "harder" => Some(Self::harder()),
            _ => None,
        }
    }

    pub fn with_k(mut self, k: usize) -> Self {
        self.k = k;
        self
    }

    pub fn validate(&self) -> Result<(), EpisodeError> {
        let GoalRange { min, max } = self.goal_range;
        if !(min >= 0.0 && min < max) {
            return Err(EpisodeError::InvalidLevel("goal_range must satisfy 0 <= min < max"));
        }
        if !(self.obj_dist_min >= 0.0 && self.obj_dist_min < self.obj_dist_max) {
            return Err(EpisodeError::InvalidLevel("obj_dist_min must be below obj_dist_max"));
        }
        if self.k == 0 || self.k > u8::MAX as usize {
            return Err(EpisodeError::InvalidLevel("k must be in 1..=255"));
        }
        Ok(())
    }

    fn in_band(&self, d: f64) -> bool {
        d.is_finite() && d >= self.goal_range.min && d <= self.goal_range.max
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetSpec {
    pub color: u8,
    pub position: Point,
}

/// One task instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Episode {
    pub scene_id: String,
    pub seed: u64,
    pub goal: Point,
    pub objects: Vec<TargetSpec>,
    pub container: Point,
    pub start: Pose,
    pub level: LevelParams,
}

impl Episode {
    pub fn k(&self) -> usize {
        self.objects.len()
    }
}

struct Sampler<'a> {
    grid: &'a OccupancyGrid,
    budget: u32,
}

impl Sampler<'_> {
    fn draw<R: Rng>(&mut self, r: &mut R, pool: &[usize]) -> Option<usize> {
        if self.budget == 0 || pool.is_empty() {
            return None;
        }
        self.budget -= 1;
        Some(pool[r.gen_range(0..pool.len())])
    }

    fn meters(&self, c: Option<PathCost>) -> f64 {
        c.map_or(f64::INFINITY, |c| c.meters(self.grid.resolution()))
    }
}

/// Sample one episode on `grid`. Deterministic in `seed`.
pub fn sample_episode(grid: &OccupancyGrid, scene_id: &str, level: &LevelParams, seed: u64) -> Result<Episode, EpisodeError> {
    level.validate()?;
    let infeasible = || EpisodeError::InfeasibleLevel { scene_id: scene_id.to_string() };
    let free: Vec<usize> = (0..grid.cells().len()).filter(|&i| grid.weight(i).is_some()).collect();
    let mut s = Sampler { grid, budget: MAX_ATTEMPTS };
    let mut goal_rng = rng::stream(seed, streams::GOAL);
    let mut obj_rng = rng::stream(seed, streams::OBJECTS);
    let mut container_rng = rng::stream(seed, streams::CONTAINER);
    let mut start_rng = rng::stream(seed, streams::START);

    'goal: loop {
        let goal = s.draw(&mut goal_rng, &free).ok_or_else(infeasible)?;
        let goal_field = world::dijkstra(grid, goal);
        let band: Vec<usize> = free.iter().copied().filter(|&i| i != goal && level.in_band(s.meters(goal_field[i]))).collect();
        if band.len() < level.k + 2 {
            continue;
        }

        let mut objects: Vec<usize> = Vec::with_capacity(level.k);
        let mut fields: Vec<Vec<Option<PathCost>>> = Vec::with_capacity(level.k);
        while objects.len() < level.k {
            let per_object_cap = 2_000;
            let mut accepted = None;
            for _ in 0..per_object_cap {
                let c = s.draw(&mut obj_rng, &band).ok_or_else(infeasible)?;
                if objects.contains(&c) {
                    continue;
                }
                let dists: Vec<f64> = fields.iter().map(|f| s.meters(f[c])).collect();
                let far_enough = dists.iter().all(|d| *d >= level.obj_dist_min);
                let has_neighbor = dists.is_empty() || dists.iter().any(|d| *d <= level.obj_dist_max);
                if far_enough && has_neighbor {
                    accepted = Some(c);
                    break;
                }
            }
            let Some(c) = accepted else { continue 'goal };
            fields.push(world::dijkstra(grid, c));
            objects.push(c);
        }

        // Drawn from the whole band and rejected on collision, so suites that
        // differ only in K share goal, container and start.
        let container = loop {
            let c = s.draw(&mut container_rng, &band).ok_or_else(infeasible)?;
            if !objects.contains(&c) {
                break c;
            }
        };
        let start = loop {
            let c = s.draw(&mut start_rng, &band).ok_or_else(infeasible)?;
            if c != container && !objects.contains(&c) {
                break c;
            }
        };
        let heading = Heading::from_index(start_rng.gen_range(0..DIRECTIONS));

        let at = |i: usize| grid.center(grid.pos(i));
        return Ok(Episode {
            scene_id: scene_id.to_string(),
            seed,
            goal: at(goal),
            objects: objects.iter().enumerate().map(|(j, &c)| TargetSpec { color: j as u8 % COLORS, position: at(c) }).collect(),
            container: at(container),
            start: Pose::new(at(start), heading),
            level: level.clone(),
        });
    }
}

/// Sample `count` episodes, assigned round-robin over `scenes`.
pub fn build_suite(scenes: &[(&str, &OccupancyGrid)], level: &LevelParams, count: usize, seed: u64) -> Result<Vec<Episode>, EpisodeError> {
    if scenes.is_empty() || count == 0 {
        return Err(EpisodeError::EmptySuite);
    }
    let base = rng::derive(seed, streams::SUITE);
    (0..count)
        .map(|i| {
            let (id, grid) = scenes[i % scenes.len()];
            sample_episode(grid, id, level, rng::derive(base, i as u64))
        })
        .collect()
}

/// Re-check every placement constraint with fresh geodesic fields.
pub fn check_constraints(grid: &OccupancyGrid, ep: &Episode) -> Result<(), String> {
    use alloc::format;
    let level = &ep.level;
    let goal = world::geodesic_field(grid, ep.goal).map_err(|e| e.to_string())?;
    let band = |name: &str, p: &Point| {
        let d = goal.at(p);
        if level.in_band(d) {
            Ok(())
        } else {
            Err(format!("{name} at {p} is {d} m from the goal"))
        }
    };
    if ep.objects.len() != level.k {
        return Err(format!("expected {} objects, found {}", level.k, ep.objects.len()));
    }
    for (i, o) in ep.objects.iter().enumerate() {
        band(&format!("object {i}"), &o.position)?;
    }
    band("container", &ep.container)?;
    band("start", &ep.start.position())?;
    for (i, a) in ep.objects.iter().enumerate() {
        let f = world::geodesic_field(grid, a.position).map_err(|e| e.to_string())?;
        let mut nearest = f64::INFINITY;
        for (j, b) in ep.objects.iter().enumerate() {
            if i == j {
                continue;
            }
            let d = f.at(&b.position);
            if d < level.obj_dist_min {
                return Err(format!("objects {i} and {j} are {d} m apart"));
            }
            nearest = nearest.min(d);
        }
        if ep.objects.len() >= 2 && nearest > level.obj_dist_max {
            return Err(format!("object {i} has no neighbor within {} m", level.obj_dist_max));
        }
    }
    let mut cells: Vec<_> = ep.objects.iter().map(|o| grid.cell_of(&o.position)).collect();
    cells.push(grid.cell_of(&ep.container));
    cells.push(grid.cell_of(&ep.start.position()));
    cells.push(grid.cell_of(&ep.goal));
    for (i, c) in cells.iter().enumerate() {
        if !grid.is_free(*c) {
            return Err(format!("placement {i} is not on a free cell"));
        }
        if cells[..i].contains(c) {
            return Err(format!("placement {i} shares a cell"));
        }
    }
    Ok(())
}
