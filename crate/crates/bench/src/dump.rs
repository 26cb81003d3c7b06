//! Debug dumps of an agent's final belief map (binary PGM) and topological graph (JSON).

use std::fs;
use std::path::Path;

use longhot_core::mapping::{Belief, ExploredMap, TopoGraph};
use longhot_core::world::Raster;

use crate::{ConfigError, Result};

/// Gray levels: obstacle 0, unknown 128, free 255. The top image row is the largest y.
pub fn map_pgm(map: &ExploredMap) -> Vec<u8> {
    let (w, h) = (map.width(), map.height());
    let mut out = format!("P5\n{w} {h}\n255\n").into_bytes();
    for y in (0..h).rev() {
        for x in 0..w {
            out.push(match map.get(y * w + x) {
                Belief::Obstacle => 0,
                Belief::Unknown => 128,
                Belief::Free => 255,
            });
        }
    }
    out
}

pub fn write_dump(dir: &Path, stem: &str, map: &ExploredMap, graph: &TopoGraph) -> Result<()> {
    fs::create_dir_all(dir).map_err(ConfigError::io(dir))?;
    let pgm = dir.join(format!("{stem}_map.pgm"));
    fs::write(&pgm, map_pgm(map)).map_err(ConfigError::io(&pgm))?;
    let json = dir.join(format!("{stem}_graph.json"));
    let text = serde_json::to_string_pretty(graph).expect("graph serializes");
    fs::write(&json, text + "\n").map_err(ConfigError::io(&json))
}
