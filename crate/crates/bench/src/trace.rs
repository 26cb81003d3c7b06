//! Trace files: a header line with the episode and environment config, then one step per line.

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use longhot_core::metrics::{replay, MetricsError};
use longhot_core::policy::TraceRecord;
use longhot_core::{EnvConfig, EnvState, Episode, OccupancyGrid};
use serde::{Deserialize, Serialize};

use crate::{ConfigError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceHeader {
    pub episode: Episode,
    pub env: EnvConfig,
}

pub fn write_trace(path: &Path, header: &TraceHeader, records: &[TraceRecord]) -> Result<()> {
    let file = fs::File::create(path).map_err(ConfigError::io(path))?;
    let mut w = BufWriter::new(file);
    let mut line = |v: String| writeln!(w, "{v}").map_err(ConfigError::io(path));
    line(serde_json::to_string(header).expect("header serializes"))?;
    for r in records {
        line(serde_json::to_string(r).expect("record serializes"))?;
    }
    w.flush().map_err(ConfigError::io(path))
}

pub fn read_trace(path: &Path) -> Result<(TraceHeader, Vec<TraceRecord>)> {
    let file = fs::File::open(path).map_err(ConfigError::io(path))?;
    let mut lines = BufReader::new(file).lines();
    let head = lines.next().ok_or_else(|| ConfigError::format(path, "empty trace"))?.map_err(ConfigError::io(path))?;
    let header: TraceHeader = serde_json::from_str(&head).map_err(|e| ConfigError::format(path, format!("header: {e}")))?;
    let mut records = Vec::new();
    for (i, l) in lines.enumerate() {
        let l = l.map_err(ConfigError::io(path))?;
        if l.trim().is_empty() {
            continue;
        }
        records.push(serde_json::from_str(&l).map_err(|e| ConfigError::format(path, format!("line {}: {e}", i + 2)))?);
    }
    Ok((header, records))
}

#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    Pass { steps: usize, final_state: Box<EnvState> },
    /// Step index (0-based) and the field that first differed.
    Fail { step: usize, field: String },
}

/// Re-execute the recorded actions against `grid` and compare every step.
pub fn verify(header: &TraceHeader, records: &[TraceRecord], grid: &OccupancyGrid) -> Result<Verdict> {
    match replay(records, &header.episode, grid, &header.env) {
        Ok(s) => Ok(Verdict::Pass { steps: records.len(), final_state: Box::new(s) }),
        Err(MetricsError::InvalidTrace { step, field }) => Ok(Verdict::Fail { step, field: field.to_string() }),
        Err(e) => Err(ConfigError::Invalid(e.to_string())),
    }
}
