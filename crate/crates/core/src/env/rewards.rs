use serde::{Deserialize, Serialize};

/// Magnitudes of the exploration and object-navigation reward channels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RewardConfig {
    pub explore_success: f64,
    pub explore_found: f64,
    pub explore_slack: f64,
    pub nav_object: f64,
    pub nav_slack: f64,
    pub nav_collision: f64,
    /// Distance under which the navigation target counts as reached.
    pub d_th: f64,
}

impl Default for RewardConfig {
    fn default() -> Self {
        Self {
            explore_success: 5.0,
            explore_found: 1.0,
            explore_slack: -0.01,
            nav_object: 2.5,
            nav_slack: -0.01,
            nav_collision: -0.1,
            d_th: 1.5,
        }
    }
}

impl RewardConfig {
    pub fn validate(&self) -> Result<(), &'static str> {
        if self.explore_slack > 0.0 || self.nav_slack > 0.0 || self.nav_collision > 0.0 {
            return Err("slack and collision rewards must not be positive");
        }
        if self.explore_success < 0.0 || self.explore_found < 0.0 || self.nav_object < 0.0 {
            return Err("success, found and object rewards must not be negative");
        }
        if !(self.d_th >= 0.0) {
            return Err("d_th must be non-negative");
        }
        Ok(())
    }
}

/// Exploration reward for a step in which `found` objects were first seen
/// and `all_found` reports whether that completed the set.
pub fn exploration_reward(found: usize, all_found: bool, cfg: &RewardConfig) -> f64 {
    let mut r = cfg.explore_slack + found as f64 * cfg.explore_found;
    if all_found {
        r += cfg.explore_success;
    }
    r
}

/// Object-navigation reward from geodesic distances to the target before and after the step.
/// An infinite distance contributes no progress term.
pub fn navigation_reward(prev_d: f64, cur_d: f64, reached: bool, collided: bool, cfg: &RewardConfig) -> f64 {
    let mut r = cfg.nav_slack;
    if prev_d.is_finite() && cur_d.is_finite() {
        r += prev_d - cur_d;
    }
    if reached {
        r += cfg.nav_object;
    }
    if collided {
        r += cfg.nav_collision;
    }
    r
}
