//! Suite reports: a JSON document and a per-episode CSV, both carrying the config hash.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use longhot_core::metrics::{aggregate, Aggregate, EpisodeResult};
use longhot_core::policy::HtpConfig;
use longhot_core::{EnvConfig, Episode};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::runner::{EpisodeRow, RowStatus, RunSpec};
use crate::scene_io::SceneSet;
use crate::{ConfigError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub version: String,
    pub config_hash: String,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub provenance: Provenance,
    pub variant: String,
    pub strict: bool,
    pub nav_noise_p: f64,
    pub episodes: usize,
    pub errors: usize,
    /// Means over the episodes that ran to completion.
    pub summary: Option<Aggregate>,
    pub rows: Vec<EpisodeRow>,
}

#[derive(Serialize)]
struct HashInput<'a> {
    htp: &'a HtpConfig,
    env: &'a EnvConfig,
    episodes: &'a [Episode],
    scenes: BTreeMap<&'a str, &'a str>,
}

/// SHA-256 over everything that determines the rows: policy and env config, the episodes and
/// the geometry of the scenes they use. Parallelism is left out on purpose.
pub fn config_hash(spec: &RunSpec, episodes: &[Episode], scenes: &SceneSet) -> String {
    let used: BTreeMap<&str, &str> = episodes
        .iter()
        .filter_map(|e| scenes.digests.get_key_value(e.scene_id.as_str()).map(|(k, v)| (k.as_str(), v.as_str())))
        .collect();
    let input = HashInput { htp: &spec.htp, env: &spec.env, episodes, scenes: used };
    hex::encode(Sha256::digest(serde_json::to_vec(&input).expect("hash input serializes")))
}

impl SuiteReport {
    pub fn new(spec: &RunSpec, episodes: &[Episode], scenes: &SceneSet, seed: u64, rows: Vec<EpisodeRow>) -> Self {
        let ok: Vec<EpisodeResult> = rows.iter().filter_map(|r| r.result.clone()).collect();
        Self {
            provenance: Provenance { version: crate::version(), config_hash: config_hash(spec, episodes, scenes), seed },
            variant: spec.htp.variant.name().to_string(),
            strict: spec.env.strict,
            nav_noise_p: spec.htp.nav_noise_p,
            episodes: rows.len(),
            errors: rows.iter().filter(|r| r.status == RowStatus::Error).count(),
            summary: aggregate(&ok),
            rows,
        }
    }

    pub fn success_pct(&self) -> f64 {
        self.summary.as_ref().map_or(0.0, |a| a.overall.success_pct)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(CSV_COLUMNS).unwrap();
        for row in &self.rows {
            w.write_record(csv_row(&self.provenance.config_hash, &self.variant, row)).unwrap();
        }
        String::from_utf8(w.into_inner().unwrap()).unwrap()
    }

    /// Writes `report.json` and `report.csv` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(ConfigError::io(dir))?;
        let json = dir.join("report.json");
        fs::write(&json, self.to_json()).map_err(ConfigError::io(&json))?;
        let csv = dir.join("report.csv");
        fs::write(&csv, self.to_csv()).map_err(ConfigError::io(&csv))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(ConfigError::io(path))?;
        serde_json::from_str(&text).map_err(|e| ConfigError::format(path, e))
    }
}

/// Columns of the per-episode CSV, in order.
pub const CSV_COLUMNS: [&str; 19] = [
    "index",
    "scene_id",
    "episode_seed",
    "variant",
    "level",
    "k",
    "status",
    "success",
    "progress",
    "spl",
    "ppl",
    "energy",
    "picked",
    "path_length",
    "ref_length",
    "steps",
    "reason",
    "error",
    "config_hash",
];

fn csv_row(hash: &str, variant: &str, row: &EpisodeRow) -> Vec<String> {
    let status = match row.status {
        RowStatus::Ok => "OK",
        RowStatus::Error => "ERROR",
    };
    let mut v = vec![row.index.to_string(), row.scene_id.clone(), row.episode_seed.to_string(), variant.to_string()];
    match &row.result {
        Some(r) => {
            let reason = r.reason.map(|x| serde_json::to_value(x).unwrap().as_str().unwrap_or_default().to_string()).unwrap_or_default();
            v.extend([
                r.level.clone(),
                r.k.to_string(),
                status.to_string(),
                (r.success as u8).to_string(),
                r.progress.to_string(),
                r.spl.to_string(),
                r.ppl.to_string(),
                r.energy.to_string(),
                r.picked.to_string(),
                r.path_length.to_string(),
                r.ref_length.to_string(),
                r.steps.to_string(),
                reason,
            ]);
        }
        None => {
            v.extend([String::new(), String::new(), status.to_string()]);
            v.extend(std::iter::repeat(String::new()).take(10));
        }
    }
    v.push(row.error.clone().unwrap_or_default());
    v.push(hash.to_string());
    v
}

/// Columns of the long-format sweep CSV.
pub const SWEEP_COLUMNS: [&str; 13] =
    ["axis", "value", "variant", "episodes", "errors", "success_pct", "progress_pct", "spl", "ppl", "energy", "picked_pct", "path_length", "config_hash"];

pub fn sweep_row(axis: &str, value: &str, report: &SuiteReport) -> Vec<String> {
    let mut v = vec![axis.to_string(), value.to_string(), report.variant.clone(), report.episodes.to_string(), report.errors.to_string()];
    match &report.summary {
        Some(a) => {
            let s = &a.overall;
            v.extend([s.success_pct, s.progress_pct, s.spl, s.ppl, s.energy, s.picked_pct, s.path_length].map(|x| x.to_string()));
        }
        None => v.extend(std::iter::repeat(String::new()).take(7)),
    }
    v.push(report.provenance.config_hash.clone());
    v
}

pub fn sweep_csv(rows: &[Vec<String>]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(SWEEP_COLUMNS).unwrap();
    for r in rows {
        w.write_record(r).unwrap();
    }
    String::from_utf8(w.into_inner().unwrap()).unwrap()
}

/// Fixed-width summary table, one line per report.
pub fn summary_table(reports: &[(String, SuiteReport)]) -> String {
    let mut out = format!(
        "{:<28} {:<16} {:>5} {:>5} {:>8} {:>9} {:>6} {:>6} {:>7} {:>8}  {}\n",
        "report", "variant", "eps", "err", "success%", "progress%", "spl", "ppl", "energy", "picked%", "config_hash"
    );
    for (name, r) in reports {
        let s = r.summary.as_ref().map(|a| a.overall.clone());
        let f = |x: Option<f64>, p: usize| x.map_or("-".to_string(), |x| format!("{x:.p$}"));
        out += &format!(
            "{:<28} {:<16} {:>5} {:>5} {:>8} {:>9} {:>6} {:>6} {:>7} {:>8}  {}\n",
            name,
            r.variant,
            r.episodes,
            r.errors,
            f(s.as_ref().map(|s| s.success_pct), 1),
            f(s.as_ref().map(|s| s.progress_pct), 1),
            f(s.as_ref().map(|s| s.spl), 3),
            f(s.as_ref().map(|s| s.ppl), 3),
            f(s.as_ref().map(|s| s.energy), 3),
            f(s.as_ref().map(|s| s.picked_pct), 1),
            &r.provenance.config_hash[..12.min(r.provenance.config_hash.len())],
        );
    }
    out
}
