//! Exploration and closeness score providers.
//!
//! The oracle computes the labels a learned predictor would be trained on,
//! from ground-truth geodesics. The random and zero providers back ablations.

use alloc::vec::Vec;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::env::{EnvState, ObjectId, Observation};
use crate::geom::{bearing, Point};
use crate::mapping::{ExploredMap, Frontier};
use crate::rng::{self, streams};
use crate::world::{astar, FieldCache, Raster};

/// Distance at which both labels reach zero, meters.
pub const HORIZON_M: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProviderKind {
    #[default]
    Oracle,
    Random,
    Zero,
}

impl FromStr for ProviderKind {
    type Err = alloc::string::String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "oracle" => Ok(ProviderKind::Oracle),
            "random" => Ok(ProviderKind::Random),
            "zero" => Ok(ProviderKind::Zero),
            _ => Err(alloc::format!("unknown provider {s:?}, expected oracle|random|zero")),
        }
    }
}

/// `max(1 - d/5, 0)`.
pub fn closeness_label(d: f64) -> f64 {
    if d.is_finite() {
        (1.0 - d / HORIZON_M).max(0.0)
    } else {
        0.0
    }
}

/// Uniform [0, 1) scores keyed by `(seed, t, slot)` for slots `0..n`.
pub fn random_scores(seed: u64, t: u64, n: usize) -> Vec<f64> {
    (0..n as u64).map(|s| rng::unit(seed, t, s)).collect()
}

/// Sector of a bearing: 0 right `[-45, -15)`, 1 ahead `[-15, 15]`, 2 left `(15, 45]`.
pub fn sector(bearing_deg: f64) -> Option<usize> {
    match bearing_deg {
        b if b.abs() <= 15.0 => Some(1),
        b if (-45.0..-15.0).contains(&b) => Some(0),
        b if b > 15.0 && b <= 45.0 => Some(2),
        _ => None,
    }
}

/// What a provider may look at in one step.
#[derive(Debug, Clone, Copy)]
pub struct ScoreInputs<'s> {
    pub state: &'s EnvState,
    pub obs: &'s Observation,
    pub goal: Point,
    /// Per object slot: whether the agent has ever seen it.
    pub discovered: &'s [bool],
    pub frontiers: &'s [Frontier],
    pub map: &'s ExploredMap,
}

/// Score provider pair with its geodesic caches.
#[derive(Debug, Clone)]
pub struct Scorer<'a> {
    pub closeness_kind: ProviderKind,
    pub exploration_kind: ProviderKind,
    seed: u64,
    objects: FieldCache<'a>,
}

impl<'a> Scorer<'a> {
    pub fn new(objects: FieldCache<'a>, closeness_kind: ProviderKind, exploration_kind: ProviderKind, seed: u64) -> Self {
        Self { closeness_kind, exploration_kind, seed, objects }
    }

    pub fn fields(&mut self) -> &mut FieldCache<'a> {
        &mut self.objects
    }

    /// Oracle closeness: zero unless visible now, else the label of the true geodesic distance.
    pub fn oracle_closeness(&mut self, obs: &Observation, id: ObjectId) -> f64 {
        match obs.sighting(id) {
            Some(v) => closeness_label(self.objects.meters(&v.position, &obs.pose.position())),
            None => 0.0,
        }
    }

    /// Closeness for every object slot of a `k`-target episode.
    pub fn closeness_all(&mut self, inp: &ScoreInputs<'_>) -> Vec<f64> {
        let k = inp.state.k();
        match self.closeness_kind {
            ProviderKind::Oracle => ObjectId::all(k).map(|id| self.oracle_closeness(inp.obs, id)).collect(),
            ProviderKind::Random => random_scores(rng::derive(self.seed, streams::RANDOM_CLOSENESS), inp.obs.t as u64, k + 2),
            ProviderKind::Zero => alloc::vec![0.0; k + 2],
        }
    }

    /// Exploration scores for the right, ahead and left sectors of the view.
    pub fn exploration(&mut self, inp: &ScoreInputs<'_>) -> [f64; 3] {
        match self.exploration_kind {
            ProviderKind::Oracle => self.oracle_exploration(inp),
            ProviderKind::Random => {
                let v = random_scores(rng::derive(self.seed, streams::RANDOM_EXPLORATION), inp.obs.t as u64, 3);
                [v[0], v[1], v[2]]
            }
            ProviderKind::Zero => [0.0; 3],
        }
    }

    fn oracle_exploration(&mut self, inp: &ScoreInputs<'_>) -> [f64; 3] {
        let k = inp.state.k();
        let hidden: Vec<Point> = ObjectId::all(k)
            .filter(|id| !inp.discovered[id.slot(k)])
            .filter_map(|id| match id {
                ObjectId::Goal => Some(inp.goal),
                _ => inp.state.placement(id).and_then(|p| p.in_scene().copied()),
            })
            .collect();
        let mut out = [0.0; 3];
        if hidden.is_empty() {
            return out;
        }
        let pose = inp.obs.pose;
        let agent = pose.position();
        let grid = self.objects.grid();
        let mut candidates: [Vec<Point>; 3] = Default::default();
        for f in inp.frontiers {
            if let Some(s) = sector(bearing(&agent, pose.heading, &f.center)) {
                let anchor = inp.map.center(inp.map.pos(f.anchor(inp.map)));
                candidates[s].push(anchor);
            }
        }
        let from = grid.index(grid.cell_of(&agent));
        for (s, cands) in candidates.iter().enumerate() {
            let far = match cands.len() {
                0 => continue,
                1 => cands[0],
                _ => {
                    let mut best = (f64::NEG_INFINITY, cands[0]);
                    for c in cands {
                        let d = from
                            .zip(grid.index(grid.cell_of(c)))
                            .and_then(|(a, b)| astar(grid, a, b))
                            .map_or(f64::INFINITY, |(cost, _)| cost.meters(grid.resolution()));
                        if d.is_finite() && d > best.0 {
                            best = (d, *c);
                        }
                    }
                    best.1
                }
            };
            let mut score: f64 = 0.0;
            for o in &hidden {
                let d_a = self.objects.meters(o, &agent);
                let d_f = self.objects.meters(o, &far);
                if d_a.is_finite() && d_f.is_finite() {
                    score = score.max((d_a - d_f) / HORIZON_M);
                }
            }
            out[s] = score;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closeness_label_values() {
        assert!((closeness_label(1.5) - 0.7).abs() < 1e-12);
        assert_eq!(closeness_label(5.0), 0.0);
        assert_eq!(closeness_label(7.0), 0.0);
        assert_eq!(closeness_label(f64::INFINITY), 0.0);
        assert_eq!(closeness_label(0.0), 1.0);
    }

    #[test]
    fn random_scores_are_keyed_and_uniform() {
        assert_eq!(random_scores(3, 10, 4), random_scores(3, 10, 4));
        let n = 100_000;
        let mean = (0..n).map(|t| random_scores(9, t, 1)[0]).sum::<f64>() / n as f64;
        assert!((mean - 0.5).abs() < 0.01, "{mean}");
    }

    #[test]
    fn sectors_split_the_view() {
        assert_eq!(sector(0.0), Some(1));
        assert_eq!(sector(15.0), Some(1));
        assert_eq!(sector(-30.0), Some(0));
        assert_eq!(sector(44.0), Some(2));
        assert_eq!(sector(60.0), None);
    }

    #[test]
    fn provider_names_parse() {
        assert_eq!("random".parse::<ProviderKind>().unwrap(), ProviderKind::Random);
        assert!("learned".parse::<ProviderKind>().is_err());
    }
}
