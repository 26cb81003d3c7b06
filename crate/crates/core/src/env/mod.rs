//! The transport simulator: discrete stepping, carrying rules, termination and sensing.

mod rewards;
mod sensor;

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

pub use rewards::{exploration_reward, navigation_reward, RewardConfig};
pub use sensor::{depth_scan, sees, visible_objects, DepthScan, SensorConfig, VisibleObject};

use crate::episodes::Episode;
use crate::geom::{Point, Pose};
use crate::world::{ball, line_of_sight, OccupancyGrid, PathCost, Raster};

/// Length of one forward move in meters.
pub const FORWARD_STEP_M: f64 = 0.25;
/// Targets carried at once without the container.
pub const HAND_CAPACITY: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Action {
    Forward,
    TurnLeft,
    TurnRight,
    Pickup,
    Drop,
}

impl Action {
    pub const ALL: [Action; 5] = [Action::Forward, Action::TurnLeft, Action::TurnRight, Action::Pickup, Action::Drop];
    pub const MOVES: [Action; 3] = [Action::Forward, Action::TurnLeft, Action::TurnRight];
}

/// A task object. Serialized as `t<k>`, `container` or `goal`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum ObjectId {
    Target(u8),
    Container,
    Goal,
}

impl ObjectId {
    /// Dense index: targets first, then the container, then the goal.
    pub fn slot(self, k: usize) -> usize {
        match self {
            ObjectId::Target(i) => i as usize,
            ObjectId::Container => k,
            ObjectId::Goal => k + 1,
        }
    }

    pub fn from_slot(slot: usize, k: usize) -> Self {
        match slot {
            s if s < k => ObjectId::Target(s as u8),
            s if s == k => ObjectId::Container,
            _ => ObjectId::Goal,
        }
    }

    /// All ids of a `k`-target episode in slot order.
    pub fn all(k: usize) -> impl Iterator<Item = ObjectId> {
        (0..k + 2).map(move |s| ObjectId::from_slot(s, k))
    }
}

impl fmt::Display for ObjectId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ObjectId::Target(i) => write!(f, "t{i}"),
            ObjectId::Container => f.write_str("container"),
            ObjectId::Goal => f.write_str("goal"),
        }
    }
}

impl FromStr for ObjectId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "container" => Ok(ObjectId::Container),
            "goal" => Ok(ObjectId::Goal),
            _ => s
                .strip_prefix('t')
                .and_then(|n| n.parse().ok())
                .map(ObjectId::Target)
                .ok_or_else(|| format!("unknown object id {s:?}")),
        }
    }
}

impl TryFrom<String> for ObjectId {
    type Error = String;
    fn try_from(s: String) -> Result<Self, String> {
        s.parse()
    }
}

impl From<ObjectId> for String {
    fn from(id: ObjectId) -> String {
        format!("{id}")
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct HandState {
    pub holds_container: bool,
    /// Held target ids, ascending.
    pub held_targets: Vec<u8>,
}

impl HandState {
    pub fn is_empty(&self) -> bool {
        !self.holds_container && self.held_targets.is_empty()
    }

    pub fn has_capacity(&self) -> bool {
        self.holds_container || self.held_targets.len() < HAND_CAPACITY
    }

    pub fn at_capacity(&self) -> bool {
        !self.has_capacity()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoalState {
    /// Delivered target ids, ascending.
    pub delivered: Vec<u8>,
}

/// Where an object currently is.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Placement {
    InScene(Point),
    Held,
    Delivered,
}

impl Placement {
    pub fn in_scene(&self) -> Option<&Point> {
        match self {
            Placement::InScene(p) => Some(p),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum TerminationReason {
    Success,
    Timeout,
    WrongPickup,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EnvConfig {
    pub t_max: u32,
    /// Interaction radius for pickup and delivery, geodesic meters.
    pub interaction_radius: f64,
    /// A pickup with nothing in range ends the episode.
    pub strict: bool,
    pub sensor: SensorConfig,
    /// Objects seen closer than this count as found.
    pub found_dist: f64,
    pub rewards: RewardConfig,
}

impl Default for EnvConfig {
    fn default() -> Self {
        Self {
            t_max: 2500,
            interaction_radius: 1.5,
            strict: false,
            sensor: SensorConfig::default(),
            found_dist: 5.0,
            rewards: RewardConfig::default(),
        }
    }
}

impl EnvConfig {
    pub fn validate(&self) -> Result<(), EnvError> {
        if self.t_max == 0 {
            return Err(EnvError::InvalidConfig("t_max must be positive"));
        }
        if !(self.interaction_radius > 0.0) || !(self.sensor.range_m > 0.0) || !(self.found_dist >= 0.0) {
            return Err(EnvError::InvalidConfig("radii must be positive"));
        }
        if !(self.sensor.fov_deg > 0.0 && self.sensor.fov_deg < 360.0) || !(self.sensor.ray_step_deg > 0.0) {
            return Err(EnvError::InvalidConfig("sensor angles out of range"));
        }
        self.rewards.validate().map_err(EnvError::InvalidConfig)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EnvError {
    #[error("episode already finished")]
    EpisodeFinished,
    #[error("{0} is not on a free cell")]
    InvalidEpisode(&'static str),
    #[error("invalid environment config: {0}")]
    InvalidConfig(&'static str),
}

/// Live simulation state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvState {
    pub pose: Pose,
    pub hand: HandState,
    pub goal_state: GoalState,
    pub targets: Vec<Placement>,
    pub container: Placement,
    pub t: u32,
    pub collided_last: bool,
    /// Found flags for targets then the container.
    pub found: Vec<bool>,
    pub ever_picked: Vec<bool>,
    pub forward_moves: u32,
    pub done: Option<TerminationReason>,
}

impl EnvState {
    pub fn k(&self) -> usize {
        self.targets.len()
    }

    pub fn placement(&self, id: ObjectId) -> Option<Placement> {
        match id {
            ObjectId::Target(i) => self.targets.get(i as usize).copied(),
            ObjectId::Container => Some(self.container),
            ObjectId::Goal => None,
        }
    }

    /// Targets and container currently lying in the scene.
    pub fn in_scene(&self) -> impl Iterator<Item = (ObjectId, &Point)> + '_ {
        let targets = self.targets.iter().enumerate().filter_map(|(i, p)| p.in_scene().map(|p| (ObjectId::Target(i as u8), p)));
        targets.chain(self.container.in_scene().map(|p| (ObjectId::Container, p)))
    }

    pub fn delivered_count(&self) -> usize {
        self.goal_state.delivered.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub t: u32,
    pub pose: Pose,
    pub hand: HandState,
    pub goal_state: GoalState,
    /// The previous forward move was blocked.
    pub collided: bool,
    pub visible: Vec<VisibleObject>,
    pub depth: DepthScan,
}

impl Observation {
    pub fn sighting(&self, id: ObjectId) -> Option<&VisibleObject> {
        self.visible.iter().find(|v| v.id == id)
    }
}

/// What a single step did, beyond the new observation.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub observation: Observation,
    pub collided: bool,
    pub picked: Option<ObjectId>,
    pub delivered: Vec<u8>,
    pub found: Vec<ObjectId>,
    pub exploration_reward: f64,
    pub done: Option<TerminationReason>,
}

/// One episode of the transport task over a borrowed world.
#[derive(Debug, Clone)]
pub struct Env<'a> {
    grid: &'a OccupancyGrid,
    episode: &'a Episode,
    cfg: EnvConfig,
    goal_field: Vec<Option<PathCost>>,
    state: EnvState,
}

impl<'a> Env<'a> {
    pub fn new(grid: &'a OccupancyGrid, episode: &'a Episode, cfg: EnvConfig) -> Result<Self, EnvError> {
        cfg.validate()?;
        let free = |p: &Point| grid.point_is_free(p);
        if !free(&episode.goal) {
            return Err(EnvError::InvalidEpisode("goal"));
        }
        if !free(&episode.start.position()) {
            return Err(EnvError::InvalidEpisode("start"));
        }
        if !free(&episode.container) || !episode.objects.iter().all(|o| free(&o.position)) {
            return Err(EnvError::InvalidEpisode("object"));
        }
        let goal_idx = grid.index(grid.cell_of(&episode.goal)).expect("free cell is inside the grid");
        let goal_field = crate::world::dijkstra(grid, goal_idx);
        let state = initial_state(episode);
        Ok(Self { grid, episode, cfg, goal_field, state })
    }

    pub fn grid(&self) -> &'a OccupancyGrid {
        self.grid
    }

    pub fn episode(&self) -> &'a Episode {
        self.episode
    }

    pub fn config(&self) -> &EnvConfig {
        &self.cfg
    }

    pub fn state(&self) -> &EnvState {
        &self.state
    }

    /// Restart the episode and return the first observation.
    pub fn reset(&mut self) -> Observation {
        self.state = initial_state(self.episode);
        let obs = self.sense();
        self.mark_found(&obs);
        obs
    }

    pub fn sense(&self) -> Observation {
        sense(self.grid, &self.state, &self.episode.goal, &self.cfg.sensor)
    }

    /// Geodesic meters from the goal to `p`.
    pub fn goal_distance(&self, p: &Point) -> f64 {
        let c = self.grid.cell_of(p);
        self.grid
            .index(c)
            .and_then(|i| self.goal_field[i])
            .map_or(f64::INFINITY, |c| c.meters(self.grid.resolution()))
    }

    pub fn step(&mut self, action: Action) -> Result<StepOutcome, EnvError> {
        if self.state.done.is_some() {
            return Err(EnvError::EpisodeFinished);
        }
        let mut collided = false;
        let mut picked = None;
        let mut delivered = Vec::new();
        let mut wrong_pickup = false;
        match action {
            Action::TurnLeft => self.state.pose.heading = self.state.pose.heading.left(),
            Action::TurnRight => self.state.pose.heading = self.state.pose.heading.right(),
            Action::Forward => {
                let from = self.state.pose.position();
                let (ux, uy) = self.state.pose.heading.unit();
                let to = from.offset(ux * FORWARD_STEP_M, uy * FORWARD_STEP_M);
                if self.grid.point_is_free(&to) && line_of_sight(self.grid, from, to) {
                    self.state.pose.x = to.x;
                    self.state.pose.y = to.y;
                    self.state.forward_moves += 1;
                } else {
                    collided = true;
                }
            }
            Action::Pickup => match self.pickup_choice() {
                PickupChoice::Take(id) => {
                    self.take(id);
                    picked = Some(id);
                }
                PickupChoice::Blocked => {}
                PickupChoice::NothingInRange => wrong_pickup = self.cfg.strict,
            },
            Action::Drop => delivered = self.drop_all(),
        }
        self.state.collided_last = collided;
        self.state.t += 1;

        let observation = self.sense();
        let found = self.mark_found(&observation);
        let all_found = !found.is_empty() && self.state.found.iter().all(|f| *f);
        let exploration_reward = exploration_reward(found.len(), all_found, &self.cfg.rewards);

        self.state.done = if wrong_pickup {
            Some(TerminationReason::WrongPickup)
        } else if self.state.k() > 0 && self.state.delivered_count() == self.state.k() {
            Some(TerminationReason::Success)
        } else if self.state.t >= self.cfg.t_max {
            Some(TerminationReason::Timeout)
        } else {
            None
        };
        Ok(StepOutcome { observation, collided, picked, delivered, found, exploration_reward, done: self.state.done })
    }

    fn mark_found(&mut self, obs: &Observation) -> Vec<ObjectId> {
        let k = self.state.k();
        let mut out = Vec::new();
        for v in &obs.visible {
            if v.id == ObjectId::Goal || v.distance >= self.cfg.found_dist {
                continue;
            }
            let s = v.id.slot(k);
            if !self.state.found[s] {
                self.state.found[s] = true;
                out.push(v.id);
            }
        }
        out
    }

    fn pickup_choice(&self) -> PickupChoice {
        let pos = self.state.pose.position();
        let r = self.cfg.interaction_radius;
        let res = self.grid.resolution();
        let near: Vec<(ObjectId, Point)> = self.state.in_scene().filter(|(_, p)| pos.distance(p) <= r + 2.0 * res).map(|(id, p)| (id, *p)).collect();
        if near.is_empty() {
            return PickupChoice::NothingInRange;
        }
        let Some(src) = self.grid.index(self.grid.cell_of(&pos)) else { return PickupChoice::NothingInRange };
        let reach = ball(self.grid, src, r / res + 1e-9);
        let geo = |p: &Point| {
            let i = self.grid.index(self.grid.cell_of(p))?;
            let j = reach.binary_search_by_key(&i, |(c, _)| *c).ok()?;
            let m = reach[j].1.meters(res);
            (m <= r).then_some(m)
        };
        let mut in_range: Vec<(f64, ObjectId)> = near.iter().filter_map(|(id, p)| geo(p).map(|d| (d, *id))).collect();
        if in_range.is_empty() {
            return PickupChoice::NothingInRange;
        }
        in_range.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let hand = &self.state.hand;
        in_range
            .iter()
            .find(|(_, id)| match id {
                ObjectId::Container => hand.is_empty(),
                _ => hand.has_capacity(),
            })
            .map_or(PickupChoice::Blocked, |(_, id)| PickupChoice::Take(*id))
    }

    fn take(&mut self, id: ObjectId) {
        match id {
            ObjectId::Container => {
                self.state.container = Placement::Held;
                self.state.hand.holds_container = true;
            }
            ObjectId::Target(i) => {
                self.state.targets[i as usize] = Placement::Held;
                self.state.ever_picked[i as usize] = true;
                self.state.hand.held_targets.push(i);
                self.state.hand.held_targets.sort_unstable();
            }
            ObjectId::Goal => unreachable!("the goal is not pickable"),
        }
    }

    fn drop_all(&mut self) -> Vec<u8> {
        let pos = self.state.pose.position();
        let at_goal = self.goal_distance(&pos) <= self.cfg.interaction_radius;
        let held = core::mem::take(&mut self.state.hand.held_targets);
        for &i in &held {
            self.state.targets[i as usize] = if at_goal { Placement::Delivered } else { Placement::InScene(pos) };
        }
        if self.state.hand.holds_container {
            self.state.hand.holds_container = false;
            self.state.container = Placement::InScene(pos);
        }
        if !at_goal {
            return Vec::new();
        }
        self.state.goal_state.delivered.extend(held.iter().copied());
        self.state.goal_state.delivered.sort_unstable();
        held
    }
}

enum PickupChoice {
    Take(ObjectId),
    Blocked,
    NothingInRange,
}

fn initial_state(ep: &Episode) -> EnvState {
    let k = ep.k();
    EnvState {
        pose: ep.start,
        hand: HandState::default(),
        goal_state: GoalState::default(),
        targets: ep.objects.iter().map(|o| Placement::InScene(o.position)).collect(),
        container: Placement::InScene(ep.container),
        t: 0,
        collided_last: false,
        found: alloc::vec![false; k + 1],
        ever_picked: alloc::vec![false; k],
        forward_moves: 0,
        done: None,
    }
}

/// Observation of `state`: depth fan plus every in-scene object (and the goal) the sensor sees.
pub fn sense(grid: &OccupancyGrid, state: &EnvState, goal: &Point, cfg: &SensorConfig) -> Observation {
    let candidates = state.in_scene().chain(core::iter::once((ObjectId::Goal, goal)));
    Observation {
        t: state.t,
        pose: state.pose,
        hand: state.hand.clone(),
        goal_state: state.goal_state.clone(),
        collided: state.collided_last,
        visible: visible_objects(grid, &state.pose, candidates, cfg),
        depth: depth_scan(grid, &state.pose, cfg),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::episodes::{LevelParams, TargetSpec};
    use crate::geom::Heading;
    use crate::world::CellPos;
    use alloc::string::ToString;
    use alloc::vec;

    fn grid() -> OccupancyGrid {
        OccupancyGrid::new_closed(40, 40, 0.25)
    }

    fn at(g: &OccupancyGrid, x: i64, y: i64) -> Point {
        g.center(CellPos::new(x, y))
    }

    fn episode(g: &OccupancyGrid, objects: &[(i64, i64)], container: (i64, i64), goal: (i64, i64), start: (i64, i64)) -> Episode {
        Episode {
            scene_id: "fixture".to_string(),
            seed: 0,
            goal: at(g, goal.0, goal.1),
            objects: objects.iter().enumerate().map(|(i, &(x, y))| TargetSpec { color: i as u8, position: at(g, x, y) }).collect(),
            container: at(g, container.0, container.1),
            start: Pose::new(at(g, start.0, start.1), Heading::EAST),
            level: LevelParams::unconstrained(objects.len()),
        }
    }

    #[test]
    fn reset_has_everything_in_scene() {
        let g = grid();
        let ep = episode(&g, &[(5, 5), (30, 30), (5, 30), (30, 5)], (20, 20), (10, 30), (10, 10));
        let mut env = Env::new(&g, &ep, EnvConfig::default()).unwrap();
        let obs = env.reset();
        assert_eq!(obs.t, 0);
        assert!(obs.hand.is_empty());
        assert_eq!(env.state().in_scene().count(), 5);
        assert_eq!(obs.pose.heading.degrees() % 30, 0);
    }

    #[test]
    fn pickup_takes_the_closest() {
        let g = grid();
        // A is 4 cells (1.0 m) east, B is 5 cells plus 1.4 m geodesic away
        let ep = episode(&g, &[(14, 10), (10, 15)], (30, 30), (35, 35), (10, 10));
        let mut env = Env::new(&g, &ep, EnvConfig::default()).unwrap();
        env.reset();
        let out = env.step(Action::Pickup).unwrap();
        assert_eq!(out.picked, Some(ObjectId::Target(0)));
        assert_eq!(env.state().hand.held_targets, vec![0]);
    }

    #[test]
    fn full_hands_block_third_target() {
        let g = grid();
        let ep = episode(&g, &[(11, 10), (10, 11), (12, 10)], (30, 30), (35, 35), (10, 10));
        let mut env = Env::new(&g, &ep, EnvConfig::default()).unwrap();
        env.reset();
        env.step(Action::Pickup).unwrap();
        env.step(Action::Pickup).unwrap();
        let out = env.step(Action::Pickup).unwrap();
        assert_eq!(out.picked, None);
        assert_eq!(env.state().hand.held_targets.len(), 2);
        assert!(env.state().targets[2].in_scene().is_some());
    }

    #[test]
    fn container_needs_empty_hands() {
        let g = grid();
        let ep = episode(&g, &[(11, 10)], (12, 10), (35, 35), (10, 10));
        let mut env = Env::new(&g, &ep, EnvConfig::default()).unwrap();
        env.reset();
        assert_eq!(env.step(Action::Pickup).unwrap().picked, Some(ObjectId::Target(0)));
        assert_eq!(env.step(Action::Pickup).unwrap().picked, None);
        assert!(!env.state().hand.holds_container);
    }

    #[test]
    fn strict_pickup_with_nothing_near_fails() {
        let g = grid();
        let ep = episode(&g, &[(30, 30)], (30, 10), (35, 35), (10, 10));
        let cfg = EnvConfig { strict: true, ..EnvConfig::default() };
        let mut env = Env::new(&g, &ep, cfg).unwrap();
        env.reset();
        let out = env.step(Action::Pickup).unwrap();
        assert_eq!(out.done, Some(TerminationReason::WrongPickup));
        assert_eq!(env.step(Action::Forward), Err(EnvError::EpisodeFinished));
    }

    #[test]
    fn forward_and_turns() {
        let g = grid();
        let ep = episode(&g, &[(30, 30)], (30, 10), (35, 35), (1, 10));
        let mut env = Env::new(&g, &ep, EnvConfig::default()).unwrap();
        env.reset();
        let p0 = env.state().pose;
        env.step(Action::Forward).unwrap();
        assert_eq!(env.state().pose.x, p0.x + 0.25);
        env.step(Action::TurnLeft).unwrap();
        assert_eq!(env.state().pose.heading.degrees(), 30);
        env.step(Action::TurnRight).unwrap();
        env.step(Action::TurnRight).unwrap();
        assert_eq!(env.state().pose.heading.degrees(), 330);
        for _ in 0..7 {
            env.step(Action::TurnLeft).unwrap();
        }
        assert_eq!(env.state().pose.heading, Heading::WEST);
        let mut collided = false;
        for _ in 0..8 {
            collided |= env.step(Action::Forward).unwrap().collided;
        }
        assert!(collided);
        assert!(g.point_is_free(&env.state().pose.position()));
        assert_eq!(env.state().pose.x, 0.375);
    }

    #[test]
    fn observation_lists_goal_landmark() {
        let g = grid();
        let ep = episode(&g, &[(30, 30)], (30, 10), (14, 10), (10, 10));
        let mut env = Env::new(&g, &ep, EnvConfig::default()).unwrap();
        let obs = env.reset();
        let v = obs.sighting(ObjectId::Goal).unwrap();
        assert_eq!(v.distance, 1.0);
    }

    #[test]
    fn object_id_round_trips_as_string() {
        for id in ObjectId::all(3) {
            let s: String = id.into();
            assert_eq!(s.parse::<ObjectId>().unwrap(), id);
        }
        assert!("x1".parse::<ObjectId>().is_err());
    }
}
