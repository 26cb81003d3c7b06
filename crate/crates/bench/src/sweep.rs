//! One-axis sweeps over suite or policy parameters.

use std::fmt;
use std::str::FromStr;

use longhot_core::policy::Variant;
use longhot_core::LevelParams;

use crate::report::SuiteReport;
use crate::runner::{run_episodes, RunSpec, RunSink};
use crate::scene_io::SceneSet;
use crate::suite::SuiteFile;
use crate::{ConfigError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    K,
    Level,
    Variant,
    NoiseP,
}

impl FromStr for Axis {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "k" => Ok(Axis::K),
            "level" => Ok(Axis::Level),
            "variant" => Ok(Axis::Variant),
            "noise_p" | "noise" => Ok(Axis::NoiseP),
            _ => Err(format!("unknown sweep axis {s:?} (expected k, level, variant or noise_p)")),
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axis::K => "k",
            Axis::Level => "level",
            Axis::Variant => "variant",
            Axis::NoiseP => "noise_p",
        })
    }
}

/// Everything held fixed while one axis varies.
#[derive(Debug, Clone)]
pub struct SweepBase {
    pub scenes: SceneSet,
    pub level: LevelParams,
    pub count: usize,
    pub seed: u64,
    pub spec: RunSpec,
    pub variants: Vec<Variant>,
}

/// One cell of a sweep.
#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub value: String,
    pub suite: SuiteFile,
    pub spec: RunSpec,
}

/// Expand `values` into suite and spec pairs, one per value and variant.
pub fn plan(base: &SweepBase, axis: Axis, values: &[String]) -> Result<Vec<SweepPoint>> {
    if values.is_empty() {
        return Err(ConfigError::Invalid("sweep needs at least one value".into()));
    }
    let bad = |v: &str| ConfigError::Invalid(format!("invalid {axis} value {v:?}"));
    let base_suite = || SuiteFile::generate(&base.scenes, &base.level, base.count, base.seed);
    let mut points = Vec::new();
    for value in values {
        let (suite, variants, noise) = match axis {
            Axis::K => {
                let k: usize = value.parse().map_err(|_| bad(value))?;
                (SuiteFile::generate(&base.scenes, &base.level.clone().with_k(k), base.count, base.seed)?, base.variants.clone(), None)
            }
            Axis::Level => {
                let level = LevelParams::by_name(value).ok_or_else(|| bad(value))?.with_k(base.level.k);
                (SuiteFile::generate(&base.scenes, &level, base.count, base.seed)?, base.variants.clone(), None)
            }
            Axis::Variant => (base_suite()?, vec![value.parse::<Variant>().map_err(|_| bad(value))?], None),
            Axis::NoiseP => {
                let p: f64 = value.parse().map_err(|_| bad(value))?;
                (base_suite()?, base.variants.clone(), Some(p))
            }
        };
        for v in variants {
            let mut spec = base.spec.clone();
            spec.htp.variant = v;
            if let Some(p) = noise {
                spec.htp.nav_noise_p = p;
            }
            spec.validate()?;
            points.push(SweepPoint { value: value.clone(), suite: suite.clone(), spec });
        }
    }
    Ok(points)
}

pub fn run_point(base: &SweepBase, point: &SweepPoint, sink: &RunSink<'_>) -> SuiteReport {
    let rows = run_episodes(&point.suite.episodes, &base.scenes, &point.spec, sink);
    SuiteReport::new(&point.spec, &point.suite.episodes, &base.scenes, point.suite.seed, rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axis_names() {
        assert_eq!("K".parse::<Axis>(), Ok(Axis::K));
        assert_eq!("noise-p".parse::<Axis>(), Ok(Axis::NoiseP));
        assert!("speed".parse::<Axis>().is_err());
        assert_eq!(Axis::NoiseP.to_string(), "noise_p");
    }
}
