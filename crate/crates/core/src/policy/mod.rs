//! Hierarchical transport policy: high-level state machine over explore,
//! pickup and drop subtasks, weighted frontier exploration, the pick-drop
//! module and the low-level planners.

mod agent;
mod follow;

use alloc::vec::Vec;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

pub use agent::{explore_coverage, run_episode, Agent, Decision, EpisodeRun, SubtaskTag, TraceRecord};
pub use follow::{heading_toward, object_nav, plan, Follow, Follower, NavField};

use crate::env::{GoalState, HandState, ObjectId};
use crate::scores::ProviderKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Variant {
    #[default]
    Full,
    NoGraph,
    RandCloseness,
    RandExplore,
    NearestFrontier,
}

impl Variant {
    pub const ALL: [Variant; 5] = [Variant::Full, Variant::NoGraph, Variant::RandCloseness, Variant::RandExplore, Variant::NearestFrontier];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Full => "FULL",
            Variant::NoGraph => "NO_GRAPH",
            Variant::RandCloseness => "RAND_CLOSENESS",
            Variant::RandExplore => "RAND_EXPLORE",
            Variant::NearestFrontier => "NEAREST_FRONTIER",
        }
    }
}

impl FromStr for Variant {
    type Err = alloc::string::String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.to_ascii_uppercase().replace('-', "_");
        Variant::ALL.into_iter().find(|v| v.name() == norm).ok_or_else(|| alloc::format!("unknown variant {s:?}"))
    }
}

/// Tie rule among equally scored exploration slots.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExploreTiebreak {
    /// Most recently updated slot, then lowest node id.
    #[default]
    LatestThenLowestNode,
    /// Lowest node id, then lowest direction.
    LowestNode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HtpConfig {
    pub variant: Variant,
    /// Closeness above which pickup and drop trigger.
    pub closeness_threshold: f64,
    /// Step budget of one pick-drop subtask.
    pub t_p: u32,
    pub explore_tiebreak: ExploreTiebreak,
    /// Probability that object navigation emits a random move.
    pub nav_noise_p: f64,
    /// Overrides the closeness provider implied by the variant.
    pub closeness_provider: Option<ProviderKind>,
    /// Overrides the exploration provider implied by the variant.
    pub exploration_provider: Option<ProviderKind>,
    pub container_first: bool,
    /// Scripted baseline: pick up whenever any in-scene object scores above this.
    pub greedy_pickup: Option<f64>,
}

impl Default for HtpConfig {
    fn default() -> Self {
        Self {
            variant: Variant::Full,
            closeness_threshold: 0.7,
            t_p: 200,
            explore_tiebreak: ExploreTiebreak::default(),
            nav_noise_p: 0.0,
            closeness_provider: None,
            exploration_provider: None,
            container_first: true,
            greedy_pickup: None,
        }
    }
}

impl HtpConfig {
    pub fn with_variant(variant: Variant) -> Self {
        Self { variant, ..Self::default() }
    }

    pub fn validate(&self) -> Result<(), &'static str> {
        if !(self.closeness_threshold > 0.0 && self.closeness_threshold < 1.0) {
            return Err("closeness_threshold must be in (0, 1)");
        }
        if !(0.0..=1.0).contains(&self.nav_noise_p) {
            return Err("nav_noise_p must be in [0, 1]");
        }
        if self.t_p == 0 {
            return Err("t_p must be positive");
        }
        if let Some(g) = self.greedy_pickup {
            if !(0.0..1.0).contains(&g) {
                return Err("greedy_pickup must be in [0, 1)");
            }
        }
        Ok(())
    }

    pub fn closeness_kind(&self) -> ProviderKind {
        self.closeness_provider.unwrap_or(match self.variant {
            Variant::RandCloseness => ProviderKind::Random,
            _ => ProviderKind::Oracle,
        })
    }

    pub fn exploration_kind(&self) -> ProviderKind {
        self.exploration_provider.unwrap_or(match self.variant {
            Variant::RandExplore => ProviderKind::Random,
            Variant::NearestFrontier => ProviderKind::Zero,
            _ => ProviderKind::Oracle,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE", tag = "kind", content = "target")]
pub enum HighLevelAction {
    Explore,
    Pickup(ObjectId),
    Drop,
}

/// Everything the high-level controller decides on.
#[derive(Debug, Clone, PartialEq)]
pub struct FsmView {
    pub k: usize,
    pub hand: HandState,
    pub goal_state: GoalState,
    pub container_in_scene: bool,
    /// Per object slot: stored (or current-view) closeness.
    pub closeness: Vec<f64>,
    pub goal_discovered: bool,
    /// Per target: sighted, still lying in the scene.
    pub target_known: Vec<bool>,
}

/// High-level decision rules, first match wins:
/// 1. empty hands and a close container: pick it up;
/// 2. at capacity: drop if the goal is close, else explore;
/// 3. capacity and a close target: pick up the highest scored (lowest id on ties);
/// 4. holding targets, goal known and no known target left to pick: drop;
/// 5. explore.
pub fn high_level(v: &FsmView, threshold: f64, container_first: bool) -> HighLevelAction {
    let k = v.k;
    let held = |i: u8| v.hand.held_targets.contains(&i);
    let delivered = |i: u8| v.goal_state.delivered.contains(&i);
    let out = (|| {
        if container_first && v.hand.is_empty() && v.container_in_scene && v.closeness[k] > threshold {
            return HighLevelAction::Pickup(ObjectId::Container);
        }
        if v.hand.at_capacity() {
            return if v.closeness[k + 1] > threshold { HighLevelAction::Drop } else { HighLevelAction::Explore };
        }
        let mut best: Option<(f64, u8)> = None;
        for i in 0..k as u8 {
            let c = v.closeness[i as usize];
            if held(i) || delivered(i) || c <= threshold {
                continue;
            }
            if best.map_or(true, |b| c > b.0) {
                best = Some((c, i));
            }
        }
        if let Some((_, i)) = best {
            return HighLevelAction::Pickup(ObjectId::Target(i));
        }
        let candidate = (0..k as u8).any(|i| !held(i) && !delivered(i) && v.target_known[i as usize]);
        if !v.hand.held_targets.is_empty() && v.goal_discovered && !candidate {
            return HighLevelAction::Drop;
        }
        if !container_first && v.hand.is_empty() && v.container_in_scene && v.closeness[k] > threshold {
            return HighLevelAction::Pickup(ObjectId::Container);
        }
        HighLevelAction::Explore
    })();
    match out {
        HighLevelAction::Pickup(ObjectId::Container) => debug_assert!(v.hand.is_empty()),
        HighLevelAction::Pickup(ObjectId::Target(i)) => debug_assert!(!delivered(i) && !held(i)),
        _ => {}
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn view(k: usize) -> FsmView {
        FsmView {
            k,
            hand: HandState::default(),
            goal_state: GoalState::default(),
            container_in_scene: true,
            closeness: vec![0.0; k + 2],
            goal_discovered: false,
            target_known: vec![false; k],
        }
    }

    #[test]
    fn full_hands_drop_when_goal_close() {
        let mut v = view(4);
        v.hand.held_targets = vec![0, 1];
        v.goal_discovered = true;
        v.closeness[5] = 0.8;
        assert_eq!(high_level(&v, 0.7, true), HighLevelAction::Drop);
        v.closeness[5] = 0.3;
        assert_eq!(high_level(&v, 0.7, true), HighLevelAction::Explore);
    }

    #[test]
    fn container_needs_empty_hands() {
        let mut v = view(4);
        v.hand.held_targets = vec![2];
        v.closeness[4] = 0.9;
        assert_ne!(high_level(&v, 0.7, true), HighLevelAction::Pickup(ObjectId::Container));
        v.hand.held_targets.clear();
        assert_eq!(high_level(&v, 0.7, true), HighLevelAction::Pickup(ObjectId::Container));
    }

    #[test]
    fn nothing_known_explores() {
        assert_eq!(high_level(&view(4), 0.7, true), HighLevelAction::Explore);
    }

    #[test]
    fn best_target_wins_and_ties_take_lowest_id() {
        let mut v = view(4);
        v.closeness[1] = 0.8;
        v.closeness[3] = 0.9;
        assert_eq!(high_level(&v, 0.7, true), HighLevelAction::Pickup(ObjectId::Target(3)));
        v.closeness[1] = 0.9;
        assert_eq!(high_level(&v, 0.7, true), HighLevelAction::Pickup(ObjectId::Target(1)));
        v.goal_state.delivered = vec![1];
        assert_eq!(high_level(&v, 0.7, true), HighLevelAction::Pickup(ObjectId::Target(3)));
    }

    #[test]
    fn holding_with_known_goal_drops_unless_more_known() {
        let mut v = view(4);
        v.hand.held_targets = vec![0];
        v.goal_discovered = true;
        assert_eq!(high_level(&v, 0.7, true), HighLevelAction::Drop);
        v.target_known[2] = true;
        assert_eq!(high_level(&v, 0.7, true), HighLevelAction::Explore);
    }

    #[test]
    fn variant_names_parse() {
        for v in Variant::ALL {
            assert_eq!(v.name().parse::<Variant>().unwrap(), v);
        }
        assert_eq!("no-graph".parse::<Variant>().unwrap(), Variant::NoGraph);
    }
}
