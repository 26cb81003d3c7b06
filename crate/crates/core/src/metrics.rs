//! Episode scoring and suite aggregation.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::env::{Env, EnvConfig, EnvError, EnvState, Placement, TerminationReason, FORWARD_STEP_M};
use crate::episodes::Episode;
use crate::geom::Point;
use crate::policy::TraceRecord;
use crate::world::{geodesic_field, OccupancyGrid};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MetricsError {
    #[error("reference path leg {leg} is unreachable")]
    InfeasibleEpisode { leg: usize },
    #[error("trace diverges from replay at step {step}: {field}")]
    InvalidTrace { step: usize, field: &'static str },
    #[error(transparent)]
    Env(#[from] EnvError),
}

/// Per-episode metric record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeResult {
    pub scene_id: String,
    pub seed: u64,
    pub level: String,
    pub k: usize,
    pub success: bool,
    pub progress: f64,
    pub spl: f64,
    pub ppl: f64,
    pub energy: f64,
    pub picked: f64,
    pub path_length: f64,
    pub ref_length: f64,
    pub steps: u32,
    pub reason: Option<TerminationReason>,
}

/// Path-efficiency factor `min(G_ref / G_pl, 1)`; 1 when the agent never moved.
pub fn efficiency(ref_length: f64, path_length: f64) -> f64 {
    if path_length <= 0.0 {
        1.0
    } else {
        (ref_length / path_length).min(1.0)
    }
}

pub fn spl(success: bool, ref_length: f64, path_length: f64) -> f64 {
    if success {
        efficiency(ref_length, path_length)
    } else {
        0.0
    }
}

pub fn ppl(progress: f64, ref_length: f64, path_length: f64) -> f64 {
    progress * efficiency(ref_length, path_length)
}

/// Length of the reference tour: start to container, then repeatedly the
/// nearest remaining object (lowest index on ties), then the goal.
pub fn reference_length(grid: &OccupancyGrid, ep: &Episode) -> Result<f64, MetricsError> {
    let field = |p: Point, leg: usize| geodesic_field(grid, p).map_err(|_| MetricsError::InfeasibleEpisode { leg });
    let finite = |d: f64, leg: usize| if d.is_finite() { Ok(d) } else { Err(MetricsError::InfeasibleEpisode { leg }) };

    let mut total = finite(field(ep.start.position(), 0)?.at(&ep.container), 0)?;
    let mut here = ep.container;
    let mut left: Vec<Point> = ep.objects.iter().map(|o| o.position).collect();
    let mut leg = 1;
    while !left.is_empty() {
        let f = field(here, leg)?;
        let (j, d) = left
            .iter()
            .enumerate()
            .map(|(j, p)| (j, f.at(p)))
            .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
            .expect("non-empty");
        total += finite(d, leg)?;
        here = left.remove(j);
        leg += 1;
    }
    total += finite(field(here, leg)?.at(&ep.goal), leg)?;
    Ok(total)
}

/// Score a final environment state.
pub fn evaluate(grid: &OccupancyGrid, ep: &Episode, fin: &EnvState, ref_length: f64) -> EpisodeResult {
    let k = ep.k();
    let goal = geodesic_field(grid, ep.goal).expect("episode goal is free");
    let agent = fin.pose.position();
    let (mut remaining, mut initial) = (0.0, 0.0);
    for (o, place) in ep.objects.iter().zip(&fin.targets) {
        initial += goal.at(&o.position);
        remaining += match place {
            Placement::Delivered => 0.0,
            Placement::Held => goal.at(&agent),
            Placement::InScene(p) => goal.at(p),
        };
    }
    let energy = if initial > 0.0 { remaining / initial } else { 0.0 };
    let success = fin.done == Some(TerminationReason::Success);
    let kf = k.max(1) as f64;
    let progress = fin.delivered_count() as f64 / kf;
    let picked = fin.ever_picked.iter().filter(|p| **p).count() as f64 / kf;
    let path_length = fin.forward_moves as f64 * FORWARD_STEP_M;
    EpisodeResult {
        scene_id: ep.scene_id.clone(),
        seed: ep.seed,
        level: ep.level.name.clone(),
        k,
        success,
        progress,
        spl: spl(success, ref_length, path_length),
        ppl: ppl(progress, ref_length, path_length),
        energy,
        picked,
        path_length,
        ref_length,
        steps: fin.t,
        reason: fin.done,
    }
}

/// Replay `trace` through a fresh environment, check it record by record and score the outcome.
pub fn score(trace: &[TraceRecord], ep: &Episode, grid: &OccupancyGrid, cfg: &EnvConfig) -> Result<EpisodeResult, MetricsError> {
    let fin = replay(trace, ep, grid, cfg)?;
    Ok(evaluate(grid, ep, &fin, reference_length(grid, ep)?))
}

/// Re-execute the actions of `trace`, returning the final state or the first divergence.
pub fn replay(trace: &[TraceRecord], ep: &Episode, grid: &OccupancyGrid, cfg: &EnvConfig) -> Result<EnvState, MetricsError> {
    let mut env = Env::new(grid, ep, cfg.clone())?;
    env.reset();
    for (step, rec) in trace.iter().enumerate() {
        let out = env.step(rec.action).map_err(|_| MetricsError::InvalidTrace { step, field: "done" })?;
        let s = env.state();
        let bad = |field| Err(MetricsError::InvalidTrace { step, field });
        if rec.t != s.t {
            return bad("t");
        }
        if rec.pose != s.pose {
            return bad("pose");
        }
        if rec.hand != s.hand {
            return bad("hand");
        }
        if rec.goal_state != s.goal_state {
            return bad("goal_state");
        }
        if rec.collided != out.collided {
            return bad("collided");
        }
        if rec.done != out.done.is_some() || rec.reason != out.done {
            return bad("done");
        }
        if rec.r_explore != out.exploration_reward {
            return bad("r_explore");
        }
    }
    Ok(env.state().clone())
}

/// Means over a set of episodes; percentages are means times 100.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub episodes: usize,
    pub success_pct: f64,
    pub progress_pct: f64,
    pub spl: f64,
    pub ppl: f64,
    pub energy: f64,
    pub picked_pct: f64,
    pub path_length: f64,
    pub ref_length: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub overall: Summary,
    pub by_level: BTreeMap<String, Summary>,
}

fn summarize(rs: &[&EpisodeResult]) -> Summary {
    let n = rs.len() as f64;
    let mean = |f: &dyn Fn(&EpisodeResult) -> f64| rs.iter().map(|r| f(r)).sum::<f64>() / n;
    Summary {
        episodes: rs.len(),
        success_pct: mean(&|r| if r.success { 100.0 } else { 0.0 }),
        progress_pct: mean(&|r| r.progress * 100.0),
        spl: mean(&|r| r.spl),
        ppl: mean(&|r| r.ppl),
        energy: mean(&|r| r.energy),
        picked_pct: mean(&|r| r.picked * 100.0),
        path_length: mean(&|r| r.path_length),
        ref_length: mean(&|r| r.ref_length),
    }
}

/// `None` for an empty result set.
pub fn aggregate(results: &[EpisodeResult]) -> Option<Aggregate> {
    if results.is_empty() {
        return None;
    }
    let all: Vec<&EpisodeResult> = results.iter().collect();
    let mut levels: BTreeMap<String, Vec<&EpisodeResult>> = BTreeMap::new();
    for r in results {
        levels.entry(r.level.clone()).or_default().push(r);
    }
    Some(Aggregate { overall: summarize(&all), by_level: levels.into_iter().map(|(k, v)| (k, summarize(&v))).collect() })
}
