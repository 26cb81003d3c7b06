//! Parallel episode execution with per-episode crash isolation.

use std::panic::{catch_unwind, AssertUnwindSafe};

use longhot_core::metrics::EpisodeResult;
use longhot_core::policy::{run_episode, EpisodeRun, HtpConfig};
use longhot_core::{EnvConfig, Episode};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::scene_io::SceneSet;
use crate::{ConfigError, Result};

/// Policy and environment settings for one suite run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSpec {
    pub htp: HtpConfig,
    pub env: EnvConfig,
    pub parallelism: usize,
}

impl RunSpec {
    pub fn validate(&self) -> Result<()> {
        self.htp.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        self.env.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        if self.parallelism == 0 {
            return Err(ConfigError::Invalid("parallelism must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum RowStatus {
    Ok,
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRow {
    pub index: usize,
    pub scene_id: String,
    pub episode_seed: u64,
    pub status: RowStatus,
    pub result: Option<EpisodeResult>,
    pub error: Option<String>,
}

fn panic_message(p: Box<dyn std::any::Any + Send>) -> String {
    if let Some(s) = p.downcast_ref::<&str>() {
        format!("panic: {s}")
    } else if let Some(s) = p.downcast_ref::<String>() {
        format!("panic: {s}")
    } else {
        "panic".to_string()
    }
}

/// Apply `f` to every item on a pool of `parallelism` workers.
/// Output order follows `items`; a panic in `f` becomes an `Err` for that item only.
pub fn isolated_map<T, R, F>(items: &[T], parallelism: usize, f: F) -> Vec<std::result::Result<R, String>>
where
    T: Sync,
    R: Send,
    F: Fn(usize, &T) -> std::result::Result<R, String> + Sync,
{
    let pool = rayon::ThreadPoolBuilder::new().num_threads(parallelism.max(1)).build().expect("thread pool");
    pool.install(|| {
        items
            .par_iter()
            .enumerate()
            .map(|(i, item)| catch_unwind(AssertUnwindSafe(|| f(i, item))).unwrap_or_else(|p| Err(panic_message(p))))
            .collect()
    })
}

/// Called once per finished episode, from a worker thread.
pub type RunSink<'a> = dyn Fn(usize, &Episode, &EpisodeRun) -> std::result::Result<(), String> + Sync + 'a;

/// Run every episode. Rows come back in suite order whatever the scheduling.
pub fn run_episodes(episodes: &[Episode], scenes: &SceneSet, spec: &RunSpec, sink: &RunSink<'_>) -> Vec<EpisodeRow> {
    let out = isolated_map(episodes, spec.parallelism, |i, ep| {
        let grid = scenes.get(&ep.scene_id).map_err(|e| e.to_string())?;
        let run = run_episode(grid, ep, &spec.env, &spec.htp).map_err(|e| e.to_string())?;
        sink(i, ep, &run)?;
        Ok(run.result)
    });
    out.into_iter()
        .zip(episodes)
        .enumerate()
        .map(|(index, (r, ep))| {
            let (status, result, error) = match r {
                Ok(res) => (RowStatus::Ok, Some(res), None),
                Err(e) => (RowStatus::Error, None, Some(e)),
            };
            EpisodeRow { index, scene_id: ep.scene_id.clone(), episode_seed: ep.seed, status, result, error }
        })
        .collect()
}
