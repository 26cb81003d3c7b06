//! Scene files: a JSON header plus the row-major cells as a run-length string.
//!
//! Runs are written as `<count><symbol>` with `.` for free and `#` for obstacle cells,
//! e.g. `121#3.1#`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use longhot_core::world::Cell;
use longhot_core::OccupancyGrid;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::{ConfigError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneFile {
    pub id: String,
    pub resolution: f64,
    pub width: usize,
    pub height: usize,
    pub cells: String,
}

fn symbol(c: Cell) -> char {
    match c {
        Cell::Free => '.',
        Cell::Obstacle => '#',
    }
}

pub fn encode_cells(cells: &[Cell]) -> String {
    let mut out = String::new();
    let mut i = 0;
    while i < cells.len() {
        let c = cells[i];
        let run = cells[i..].iter().take_while(|&&x| x == c).count();
        write!(out, "{run}{}", symbol(c)).unwrap();
        i += run;
    }
    out
}

pub fn decode_cells(s: &str, expected: usize) -> std::result::Result<Vec<Cell>, String> {
    let mut cells = Vec::with_capacity(expected);
    let mut count: Option<usize> = None;
    for ch in s.chars() {
        match ch {
            '0'..='9' => {
                let d = ch as usize - '0' as usize;
                count = Some(count.unwrap_or(0).checked_mul(10).and_then(|c| c.checked_add(d)).ok_or("run length overflow")?);
            }
            '.' | '#' => {
                let n = count.take().ok_or_else(|| format!("symbol {ch:?} without a run length"))?;
                if n == 0 || cells.len() + n > expected {
                    return Err("run lengths do not match the grid size".into());
                }
                let c = if ch == '.' { Cell::Free } else { Cell::Obstacle };
                cells.extend(std::iter::repeat(c).take(n));
            }
            c if c.is_whitespace() => {}
            c => return Err(format!("unexpected character {c:?}")),
        }
    }
    if count.is_some() {
        return Err("trailing run length without a symbol".into());
    }
    if cells.len() != expected {
        return Err(format!("decoded {} cells, expected {expected}", cells.len()));
    }
    Ok(cells)
}

impl SceneFile {
    pub fn from_grid(id: &str, grid: &OccupancyGrid) -> Self {
        use longhot_core::world::Raster;
        Self { id: id.to_string(), resolution: grid.resolution(), width: grid.width(), height: grid.height(), cells: encode_cells(grid.cells()) }
    }

    pub fn to_grid(&self) -> std::result::Result<OccupancyGrid, String> {
        let n = self.width.checked_mul(self.height).ok_or("grid too large")?;
        let cells = decode_cells(&self.cells, n)?;
        OccupancyGrid::from_cells(self.width, self.height, self.resolution, cells).map_err(|e| e.to_string())
    }

    /// Digest of the geometry, independent of the id.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        h.update(format!("{}:{}x{}:", self.resolution, self.width, self.height));
        h.update(self.cells.as_bytes());
        hex::encode(h.finalize())
    }
}

pub fn save_scene(path: &Path, id: &str, grid: &OccupancyGrid) -> Result<()> {
    let text = serde_json::to_string(&SceneFile::from_grid(id, grid)).expect("scene serializes");
    fs::write(path, text + "\n").map_err(ConfigError::io(path))
}

pub fn load_scene_file(path: &Path) -> Result<SceneFile> {
    let text = fs::read_to_string(path).map_err(ConfigError::io(path))?;
    serde_json::from_str(&text).map_err(|e| ConfigError::format(path, e))
}

pub fn load_scene(path: &Path) -> Result<(String, OccupancyGrid)> {
    let f = load_scene_file(path)?;
    let grid = f.to_grid().map_err(|e| ConfigError::format(path, e))?;
    Ok((f.id, grid))
}

/// Every scene of a directory, keyed by id.
#[derive(Debug, Clone, Default)]
pub struct SceneSet {
    pub grids: BTreeMap<String, OccupancyGrid>,
    pub digests: BTreeMap<String, String>,
}

impl SceneSet {
    pub fn insert(&mut self, id: &str, grid: OccupancyGrid) {
        self.digests.insert(id.to_string(), SceneFile::from_grid(id, &grid).digest());
        self.grids.insert(id.to_string(), grid);
    }

    pub fn load_dir(dir: &Path) -> Result<Self> {
        let mut paths: Vec<_> = fs::read_dir(dir)
            .map_err(ConfigError::io(dir))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect();
        paths.sort();
        let mut set = SceneSet::default();
        for p in paths {
            let (id, grid) = load_scene(&p)?;
            if set.grids.contains_key(&id) {
                return Err(ConfigError::format(&p, format!("duplicate scene id {id:?}")));
            }
            set.insert(&id, grid);
        }
        if set.grids.is_empty() {
            return Err(ConfigError::Invalid(format!("no scene files in {}", dir.display())));
        }
        Ok(set)
    }

    pub fn get(&self, id: &str) -> Result<&OccupancyGrid> {
        self.grids.get(id).ok_or_else(|| ConfigError::UnknownScene(id.to_string()))
    }

    pub fn as_pairs(&self) -> Vec<(&str, &OccupancyGrid)> {
        self.grids.iter().map(|(k, v)| (k.as_str(), v)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use longhot_core::world::generate_scene;
    use longhot_core::SceneSpec;

    #[test]
    fn rle_round_trip() {
        let cells = [Cell::Obstacle, Cell::Obstacle, Cell::Free, Cell::Obstacle];
        let s = encode_cells(&cells);
        assert_eq!(s, "2#1.1#");
        assert_eq!(decode_cells(&s, 4).unwrap(), cells);
    }

    #[test]
    fn rle_rejects_garbage() {
        assert!(decode_cells("3#", 4).is_err());
        assert!(decode_cells("5#", 4).is_err());
        assert!(decode_cells("#", 1).is_err());
        assert!(decode_cells("2x", 2).is_err());
        assert!(decode_cells("2", 2).is_err());
    }

    #[test]
    fn generated_scene_round_trips() {
        let g = generate_scene(3, &SceneSpec::default()).unwrap();
        let f = SceneFile::from_grid("a", &g);
        let text = serde_json::to_string(&f).unwrap();
        let back: SceneFile = serde_json::from_str(&text).unwrap();
        assert_eq!(back.to_grid().unwrap(), g);
        assert_eq!(back.digest(), f.digest());
    }
}
