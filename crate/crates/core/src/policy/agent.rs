use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::follow::{heading_toward, nearest_target, object_nav, Follow, Follower, NavField};
use super::{high_level, ExploreTiebreak, FsmView, HighLevelAction, HtpConfig, Variant};
use crate::env::{navigation_reward, Action, Env, EnvConfig, EnvError, EnvState, GoalState, HandState, ObjectId, Observation, TerminationReason};
use crate::episodes::Episode;
use crate::geom::{bearing, Heading, Point, Pose, DIRECTIONS};
use crate::mapping::{detect_frontiers, integrate, representative_frontier, Belief, ExploredMap, Frontier, FrontierMask, TopoGraph};
use crate::metrics::{self, EpisodeResult, MetricsError};
use crate::scores::{ScoreInputs, Scorer};
use crate::world::{FieldCache, OccupancyGrid, Raster, SegmentWalk};

/// Pick-drop ends its approach to a node this close to it.
const NODE_REACHED_M: f64 = 0.5;
/// Sighted objects count as inspected once the agent is this close by belief-map path.
const INSPECT_M: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Phase {
    Inspect,
    Frontier,
    Revisit,
    Idle,
    GotoNode,
    Orient,
    ObjectNav,
    Trigger,
    Greedy,
}

/// Which subtask produced an action. `id` changes whenever the subtask does.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubtaskTag {
    pub id: u32,
    pub action: HighLevelAction,
    pub phase: Phase,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decision {
    pub action: Action,
    pub tag: SubtaskTag,
    /// Object the subtask is steering toward, if any.
    pub nav_target: Option<Point>,
}

/// One executed step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub t: u32,
    pub action: Action,
    pub pose: Pose,
    pub hand: HandState,
    pub goal_state: GoalState,
    pub r_explore: f64,
    pub r_nav: Option<f64>,
    pub nav_target: Option<Point>,
    pub collided: bool,
    pub done: bool,
    pub reason: Option<TerminationReason>,
    pub subtask: SubtaskTag,
}

#[derive(Debug, Clone)]
struct Subtask {
    id: u32,
    action: HighLevelAction,
    phase: Phase,
    steps: u32,
}

/// Per-episode policy state.
#[derive(Debug, Clone)]
pub struct Agent<'a> {
    cfg: HtpConfig,
    k: usize,
    seed: u64,
    map: ExploredMap,
    graph: TopoGraph,
    frontiers: Vec<Frontier>,
    next_frontier: u32,
    scorer: Scorer<'a>,
    believed: Vec<Option<Point>>,
    discovered: Vec<bool>,
    current: Vec<f64>,
    suppressed_until: Vec<u32>,
    subtask: Subtask,
    follower: Follower,
    nav_field: Option<NavField>,
    blacklist: BTreeSet<usize>,
    choice: Option<(usize, usize, u32)>,
    inspected: BTreeSet<(usize, usize)>,
    prev_hand: HandState,
    last_action: Option<Action>,
    explore_only: bool,
}

impl<'a> Agent<'a> {
    /// `grid` backs the oracle providers only; the policy itself sees observations.
    pub fn new(grid: &'a OccupancyGrid, k: usize, cfg: HtpConfig, seed: u64) -> Self {
        let n = k + 2;
        let scorer = Scorer::new(FieldCache::new(grid), cfg.closeness_kind(), cfg.exploration_kind(), seed);
        Self {
            cfg,
            k,
            seed,
            map: ExploredMap::like(grid),
            graph: TopoGraph::new(n),
            frontiers: Vec::new(),
            next_frontier: 0,
            scorer,
            believed: vec![None; n],
            discovered: vec![false; n],
            current: vec![0.0; n],
            suppressed_until: vec![0; n],
            subtask: Subtask { id: 0, action: HighLevelAction::Explore, phase: Phase::Idle, steps: 0 },
            follower: Follower::default(),
            nav_field: None,
            blacklist: BTreeSet::new(),
            choice: None,
            inspected: BTreeSet::new(),
            prev_hand: HandState::default(),
            last_action: None,
            explore_only: false,
        }
    }

    pub fn map(&self) -> &ExploredMap {
        &self.map
    }

    pub fn graph(&self) -> &TopoGraph {
        &self.graph
    }

    pub fn frontiers(&self) -> &[Frontier] {
        &self.frontiers
    }

    /// Node, direction and frontier id of the current weighted exploration goal.
    pub fn frontier_choice(&self) -> Option<(usize, usize, u32)> {
        self.choice
    }

    /// Last believed position per object slot.
    pub fn beliefs(&self) -> &[Option<Point>] {
        &self.believed
    }

    pub fn fields(&mut self) -> &mut FieldCache<'a> {
        self.scorer.fields()
    }

    fn threshold(&self) -> f64 {
        self.cfg.closeness_threshold
    }

    fn uses_graph(&self) -> bool {
        self.cfg.variant != Variant::NoGraph
    }

    fn tag(&self, phase: Phase) -> SubtaskTag {
        SubtaskTag { id: self.subtask.id, action: self.subtask.action, phase }
    }

    fn decide(&self, action: Action, phase: Phase, nav_target: Option<Point>) -> Decision {
        Decision { action, tag: self.tag(phase), nav_target }
    }

    /// Sense, update the map and scores, and choose the next action.
    /// `state` and `goal` feed the oracle score providers only.
    pub fn act(&mut self, state: &EnvState, obs: &Observation, goal: Point) -> Decision {
        self.observe(state, obs, goal);
        let d = self.choose(obs);
        self.last_action = Some(d.action);
        d
    }

    fn observe(&mut self, state: &EnvState, obs: &Observation, goal: Point) {
        let k = self.k;
        for &i in &obs.hand.held_targets {
            if !self.prev_hand.held_targets.contains(&i) {
                self.graph.zero_closeness(i as usize);
            }
        }
        if obs.hand.holds_container && !self.prev_hand.holds_container {
            self.graph.zero_closeness(k);
        }
        self.prev_hand = obs.hand.clone();

        let nodes_before = self.graph.len();
        let node = integrate(&mut self.map, &mut self.graph, obs);
        if self.graph.len() != nodes_before {
            self.blacklist.clear();
        }

        if self.uses_graph() {
            for s in 0..k + 2 {
                if let Some(p) = self.believed[s] {
                    if obs.sighting(ObjectId::from_slot(s, k)).is_none() && self.should_see(&obs.pose, &p) {
                        self.believed[s] = None;
                    }
                }
            }
        } else {
            self.believed.iter_mut().for_each(|b| *b = None);
        }
        for v in &obs.visible {
            let s = v.id.slot(k);
            self.believed[s] = Some(v.position);
            self.discovered[s] = true;
        }
        for &i in obs.hand.held_targets.iter().chain(&obs.goal_state.delivered) {
            self.believed[i as usize] = None;
        }
        if obs.hand.holds_container {
            self.believed[k] = None;
        }

        self.frontiers = detect_frontiers(&self.map, &self.frontiers, &mut self.next_frontier, &obs.pose, node);
        let inputs = ScoreInputs { state, obs, goal, discovered: &self.discovered, frontiers: &self.frontiers, map: &self.map };
        self.current = self.scorer.closeness_all(&inputs);
        let fe = self.scorer.exploration(&inputs);
        self.graph.store_scores(node, obs.pose.heading.index(), fe, &self.current, obs.t);
    }

    /// Whether `p` would be in view if it were still there, judged on the belief map.
    fn should_see(&self, pose: &Pose, p: &Point) -> bool {
        let o = pose.position();
        if o.distance(p) > 4.5 || bearing(&o, pose.heading, p).abs() > 40.0 {
            return false;
        }
        SegmentWalk::new(o, *p, self.map.resolution()).all(|(c, _)| self.map.at(c) == Belief::Free)
    }

    fn unoccluded(&self, from: &Point, to: &Point) -> bool {
        SegmentWalk::new(*from, *to, self.map.resolution()).all(|(c, _)| self.map.at(c) != Belief::Obstacle)
    }

    fn suppressed(&self, slot: usize, t: u32) -> bool {
        t < self.suppressed_until[slot]
    }

    fn fsm_view(&self, obs: &Observation) -> FsmView {
        let k = self.k;
        let t = obs.t;
        let closeness = (0..k + 2)
            .map(|s| {
                if self.suppressed(s, t) {
                    0.0
                } else if self.uses_graph() {
                    self.graph.max_closeness(s)
                } else {
                    self.current[s]
                }
            })
            .collect();
        let goal = k + 1;
        let goal_discovered = !self.suppressed(goal, t) && if self.uses_graph() { self.discovered[goal] } else { self.believed[goal].is_some() };
        FsmView {
            k,
            hand: obs.hand.clone(),
            goal_state: obs.goal_state.clone(),
            container_in_scene: !obs.hand.holds_container,
            closeness,
            goal_discovered,
            target_known: (0..k).map(|i| self.believed[i].is_some() && !self.suppressed(i, t)).collect(),
        }
    }

    fn start_subtask(&mut self, action: HighLevelAction, phase: Phase) {
        self.subtask = Subtask { id: self.subtask.id + 1, action, phase, steps: 0 };
        self.follower.reset();
    }

    fn choose(&mut self, obs: &Observation) -> Decision {
        if let Some(g) = self.cfg.greedy_pickup {
            let k = self.k;
            let close = (0..=k).find(|&s| self.current[s] > g);
            if let (Some(s), false) = (close, self.last_action == Some(Action::Pickup)) {
                let tag = SubtaskTag { id: self.subtask.id, action: HighLevelAction::Pickup(ObjectId::from_slot(s, k)), phase: Phase::Greedy };
                return Decision { action: Action::Pickup, tag, nav_target: None };
            }
        }
        let hl = if self.explore_only {
            HighLevelAction::Explore
        } else {
            high_level(&self.fsm_view(obs), self.threshold(), self.cfg.container_first)
        };
        if hl != self.subtask.action {
            let phase = if hl == HighLevelAction::Explore { Phase::Idle } else { Phase::GotoNode };
            self.start_subtask(hl, phase);
        }
        self.subtask.steps += 1;
        match hl {
            HighLevelAction::Explore => self.explore(obs),
            HighLevelAction::Pickup(id) => self.pickdrop(obs, id, Action::Pickup),
            HighLevelAction::Drop => self.pickdrop(obs, ObjectId::Goal, Action::Drop),
        }
    }

    fn abort(&mut self, obs: &Observation, slot: usize) -> Decision {
        self.suppressed_until[slot] = obs.t + self.cfg.t_p;
        self.start_subtask(HighLevelAction::Explore, Phase::Idle);
        self.subtask.steps = 1;
        self.explore(obs)
    }

    fn pickdrop(&mut self, obs: &Observation, target: ObjectId, trigger: Action) -> Decision {
        let slot = target.slot(self.k);
        let believed = self.believed[slot];
        if self.current[slot] > self.threshold() {
            return self.decide(trigger, Phase::Trigger, believed);
        }
        if self.subtask.steps > self.cfg.t_p {
            return self.abort(obs, slot);
        }
        let pose = obs.pose;
        let pos = pose.position();
        loop {
            match self.subtask.phase {
                Phase::GotoNode => {
                    let best = if self.uses_graph() { self.graph.best_closeness(slot).filter(|b| b.2 > 0.0) } else { None };
                    let Some((node, dir, _)) = best else {
                        self.subtask.phase = Phase::ObjectNav;
                        continue;
                    };
                    let np = self.graph.nodes[node].position;
                    let at_start = self.subtask.steps == 1 && self.graph.current == Some(node);
                    if at_start || pos.distance(&np) <= NODE_REACHED_M {
                        self.subtask.phase = Phase::Orient;
                        continue;
                    }
                    let Some(goal) = self.map.index(self.map.cell_of(&np)) else {
                        self.subtask.phase = Phase::ObjectNav;
                        continue;
                    };
                    match self.follower.step(&self.map, &pose, goal, obs.t, obs.collided) {
                        Follow::Act(a) => return self.decide(a, Phase::GotoNode, believed),
                        Follow::Arrived => {
                            self.subtask.phase = Phase::Orient;
                            let _ = dir;
                        }
                        Follow::NoPath => self.subtask.phase = Phase::ObjectNav,
                    }
                }
                Phase::Orient => {
                    let dir = self.graph.best_closeness(slot).map(|b| b.1);
                    match dir {
                        Some(d) if self.uses_graph() && pose.heading.index() != d => {
                            let a = if pose.heading.turns_to(Heading::from_index(d)) >= 0 { Action::TurnLeft } else { Action::TurnRight };
                            return self.decide(a, Phase::Orient, believed);
                        }
                        _ => self.subtask.phase = Phase::ObjectNav,
                    }
                }
                _ => {
                    let Some(p) = believed else { return self.abort(obs, slot) };
                    let noise = (self.cfg.nav_noise_p, self.seed, obs.t);
                    let a = object_nav(&self.map, &pose, &p, &mut self.nav_field, noise, obs.collided);
                    self.subtask.phase = Phase::ObjectNav;
                    return self.decide(a, Phase::ObjectNav, Some(p));
                }
            }
        }
    }

    fn inspect_candidate(&self, obs: &Observation) -> Option<(usize, Point)> {
        let k = self.k;
        let hand = &obs.hand;
        let pos = obs.pose.position();
        let threshold = self.threshold();
        let mut best: Option<(f64, usize, Point)> = None;
        for s in 0..k + 2 {
            let Some(p) = self.believed[s] else { continue };
            if self.suppressed(s, obs.t) || self.inspected.contains(&(s, self.map.index(self.map.cell_of(&p)).unwrap_or(0))) {
                continue;
            }
            let confirmed = if self.uses_graph() { self.graph.max_closeness(s) } else { self.current[s] } > threshold;
            let wanted = match ObjectId::from_slot(s, k) {
                ObjectId::Target(i) => hand.has_capacity() && !hand.held_targets.contains(&i) && !obs.goal_state.delivered.contains(&i),
                ObjectId::Container => hand.is_empty(),
                ObjectId::Goal => !hand.held_targets.is_empty(),
            };
            if confirmed || !wanted {
                continue;
            }
            let d = pos.distance(&p);
            if best.map_or(true, |b| d < b.0) {
                best = Some((d, s, p));
            }
        }
        best.map(|b| (b.1, b.2))
    }

    fn explore(&mut self, obs: &Observation) -> Decision {
        let pose = obs.pose;
        let pos = pose.position();
        if !self.explore_only {
            let here = self.map.index(self.map.cell_of(&pos));
            while let Some((slot, p)) = self.inspect_candidate(obs) {
                let cell = self.map.index(self.map.cell_of(&p)).unwrap_or(0);
                let res = self.map.resolution();
                let reach = here.and_then(|h| NavField::get(&mut self.nav_field, &self.map, cell).at(h)).map(|c| c.meters(res));
                let failed = match reach {
                    None => true,
                    Some(d) if d <= INSPECT_M && self.unoccluded(&pos, &p) => {
                        if bearing(&pos, pose.heading, &p).abs() > 30.0 {
                            return self.decide(heading_toward(&pose, &p), Phase::Inspect, None);
                        }
                        true
                    }
                    Some(_) => match self.follower.step(&self.map, &pose, cell, obs.t, obs.collided) {
                        Follow::Act(a) => return self.decide(a, Phase::Inspect, None),
                        Follow::Arrived if bearing(&pos, pose.heading, &p).abs() > 30.0 => {
                            return self.decide(heading_toward(&pose, &p), Phase::Inspect, None)
                        }
                        Follow::Arrived | Follow::NoPath => true,
                    },
                };
                if failed {
                    self.inspected.insert((slot, cell));
                    self.believed[slot] = None;
                }
            }
        }

        for _ in 0..3 {
            let Some(goal) = self.frontier_goal(&pose) else { break };
            match self.follower.step(&self.map, &pose, goal, obs.t, obs.collided) {
                Follow::Act(a) => return self.decide(a, Phase::Frontier, None),
                Follow::Arrived => {
                    self.blacklist.insert(goal);
                    return self.decide(Action::TurnLeft, Phase::Frontier, None);
                }
                Follow::NoPath => {
                    self.blacklist.insert(goal);
                }
            }
        }

        let stale = self
            .graph
            .nodes
            .iter()
            .filter(|n| n.position.distance(&pos) > NODE_REACHED_M)
            .filter(|n| self.map.index(self.map.cell_of(&n.position)).is_some_and(|c| !self.blacklist.contains(&c)))
            .min_by(|a, b| a.last_visit_t.cmp(&b.last_visit_t).then(a.id.cmp(&b.id)))
            .map(|n| n.position);
        if let Some(np) = stale {
            let goal = self.map.index(self.map.cell_of(&np)).expect("node on the map");
            match self.follower.step(&self.map, &pose, goal, obs.t, obs.collided) {
                Follow::Act(a) => return self.decide(a, Phase::Revisit, None),
                Follow::Arrived | Follow::NoPath => {
                    self.blacklist.insert(goal);
                }
            }
        }
        self.decide(Action::TurnLeft, Phase::Idle, None)
    }

    /// Cell to head for: the nearest frontier cell, or the anchor of the
    /// representative frontier under the best scored node direction.
    /// A previous choice stands until some slot scores strictly higher.
    fn frontier_goal(&mut self, pose: &Pose) -> Option<usize> {
        let live: Vec<Frontier> = self.frontiers.iter().filter(|f| !self.blacklist.contains(&f.anchor(&self.map))).cloned().collect();
        if live.is_empty() {
            self.choice = None;
            return None;
        }
        let nearest = |this: &Self| {
            let here = this.map.index(this.map.cell_of(&pose.position()))?;
            let mut targets = vec![false; this.map.cells().len()];
            for f in &live {
                for &c in &f.cells {
                    targets[c] = !this.blacklist.contains(&c);
                }
            }
            nearest_target(&this.map, here, &targets)
        };
        if self.cfg.variant == Variant::NearestFrontier {
            return nearest(self);
        }
        let mask = FrontierMask::new(&live, self.graph.len());
        let mut best: Option<(f64, Option<u32>, usize, usize)> = None;
        for (n, node) in self.graph.nodes.iter().enumerate() {
            for d in 0..DIRECTIONS {
                if !mask.get(n, d) {
                    continue;
                }
                let s = &node.slots[d];
                let better = match best {
                    None => true,
                    Some((e, u, _, _)) => {
                        if s.exploration != e {
                            s.exploration > e
                        } else {
                            match self.cfg.explore_tiebreak {
                                ExploreTiebreak::LatestThenLowestNode => s.updated_t > u,
                                ExploreTiebreak::LowestNode => false,
                            }
                        }
                    }
                };
                if better {
                    best = Some((s.exploration, s.updated_t, n, d));
                }
            }
        }
        let (e, _, n, d) = best?;
        if e <= 0.0 {
            self.choice = None;
            return nearest(self);
        }
        if let Some((n0, d0, id)) = self.choice {
            let kept = live.iter().find(|f| f.id == id && f.parent == (n0, d0));
            if let Some(f) = kept.filter(|_| mask.get(n0, d0) && self.graph.nodes[n0].slots[d0].exploration > 0.0) {
                return Some(f.anchor(&self.map));
            }
        }
        let f = representative_frontier(&live, n, d)?;
        self.choice = Some((n, d, f.id));
        Some(f.anchor(&self.map))
    }
}

/// Output of one policy rollout.
#[derive(Debug, Clone)]
pub struct EpisodeRun {
    pub result: EpisodeResult,
    pub trace: Vec<TraceRecord>,
    pub final_state: EnvState,
    /// The agent's belief map and graph when the episode ended.
    pub map: ExploredMap,
    pub graph: TopoGraph,
}

/// Run the policy on one episode until it ends.
pub fn run_episode(grid: &OccupancyGrid, episode: &Episode, env_cfg: &EnvConfig, cfg: &HtpConfig) -> Result<EpisodeRun, MetricsError> {
    let ref_length = metrics::reference_length(grid, episode)?;
    let mut env = Env::new(grid, episode, env_cfg.clone())?;
    let mut obs = env.reset();
    let mut agent = Agent::new(grid, episode.k(), cfg.clone(), episode.seed);
    let mut trace = Vec::new();
    loop {
        let d = agent.act(env.state(), &obs, episode.goal);
        let before = env.state().pose.position();
        let out = env.step(d.action)?;
        let after = env.state().pose.position();
        let r_nav = d.nav_target.map(|p| {
            let fields = agent.fields();
            let (prev, cur) = (fields.meters(&p, &before), fields.meters(&p, &after));
            navigation_reward(prev, cur, cur <= env_cfg.rewards.d_th, out.collided, &env_cfg.rewards)
        });
        let s = env.state();
        trace.push(TraceRecord {
            t: s.t,
            action: d.action,
            pose: s.pose,
            hand: s.hand.clone(),
            goal_state: s.goal_state.clone(),
            r_explore: out.exploration_reward,
            r_nav,
            nav_target: d.nav_target,
            collided: out.collided,
            done: out.done.is_some(),
            reason: out.done,
            subtask: d.tag,
        });
        obs = out.observation;
        if out.done.is_some() {
            break;
        }
    }
    let final_state = env.state().clone();
    let result = metrics::evaluate(grid, episode, &final_state, ref_length);
    Ok(EpisodeRun { result, trace, final_state, map: agent.map, graph: agent.graph })
}

/// Explore an object-free world with the frontier loop alone.
/// Returns the fraction of reachable free cells mapped as free, and the steps taken.
pub fn explore_coverage(grid: &OccupancyGrid, start: Pose, cfg: &HtpConfig, max_steps: u32) -> Result<(f64, u32), EnvError> {
    let episode = Episode {
        scene_id: alloc::string::String::new(),
        seed: 0,
        goal: start.position(),
        objects: Vec::new(),
        container: start.position(),
        start,
        level: crate::episodes::LevelParams::unconstrained(1),
    };
    let env_cfg = EnvConfig { t_max: max_steps.max(1), ..EnvConfig::default() };
    let mut env = Env::new(grid, &episode, env_cfg)?;
    let mut obs = env.reset();
    let mut agent = Agent::new(grid, 0, cfg.clone(), 0);
    agent.explore_only = true;
    let start_idx = grid.index(grid.cell_of(&start.position())).expect("start on grid");
    let reachable: Vec<usize> = crate::world::dijkstra(grid, start_idx).iter().enumerate().filter(|(_, c)| c.is_some()).map(|(i, _)| i).collect();
    let covered = |m: &ExploredMap| reachable.iter().filter(|i| m.get(**i) == Belief::Free).count() as f64 / reachable.len() as f64;
    let mut steps = 0;
    while steps < max_steps {
        agent.observe(env.state(), &obs, episode.goal);
        if agent.frontiers.is_empty() && covered(&agent.map) >= 1.0 {
            break;
        }
        let d = agent.choose(&obs);
        agent.last_action = Some(d.action);
        let out = env.step(d.action)?;
        steps += 1;
        obs = out.observation;
        if out.done.is_some() {
            break;
        }
    }
    agent.map.integrate_scan(&obs.depth);
    Ok((covered(&agent.map), steps))
}
