//! Episode suite files.

use std::fs;
use std::path::Path;

use longhot_core::episodes::build_suite;
use longhot_core::{Episode, LevelParams};
use serde::{Deserialize, Serialize};

use crate::scene_io::SceneSet;
use crate::{ConfigError, Result};

pub const SUITE_SCHEMA: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteFile {
    pub schema: u32,
    pub seed: u64,
    pub level: LevelParams,
    pub episodes: Vec<Episode>,
}

impl SuiteFile {
    /// Sample `count` episodes over every scene of `scenes`, in id order.
    pub fn generate(scenes: &SceneSet, level: &LevelParams, count: usize, seed: u64) -> Result<Self> {
        level.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        let episodes = build_suite(&scenes.as_pairs(), level, count, seed).map_err(|e| ConfigError::Invalid(e.to_string()))?;
        Ok(Self { schema: SUITE_SCHEMA, seed, level: level.clone(), episodes })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).expect("suite serializes");
        fs::write(path, text + "\n").map_err(ConfigError::io(path))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(ConfigError::io(path))?;
        let suite: SuiteFile = serde_json::from_str(&text).map_err(|e| ConfigError::format(path, e))?;
        if suite.schema != SUITE_SCHEMA {
            return Err(ConfigError::format(path, format!("unsupported suite schema {}", suite.schema)));
        }
        if suite.episodes.is_empty() {
            return Err(ConfigError::format(path, "suite has no episodes"));
        }
        Ok(suite)
    }

    /// Fails on the first episode whose scene is missing from `scenes`.
    pub fn check_scenes(&self, scenes: &SceneSet) -> Result<()> {
        self.episodes.iter().try_for_each(|e| scenes.get(&e.scene_id).map(|_| ()))
    }
}
