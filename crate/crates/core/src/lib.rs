//! Long-horizon object transport on 2D occupancy worlds.
//!
//! The crate holds the pure, allocation-only parts of the system: the
//! ground-truth world and its geodesics, the episode sampler, the transport
//! simulator, the agent-side topological map, the score providers, the
//! hierarchical transport policy and the evaluation metrics. File formats,
//! the CLI and parallel suite execution live in `longhot-bench`.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod env;
pub mod episodes;
pub mod geom;
pub mod mapping;
pub mod metrics;
pub mod policy;
pub mod rng;
pub mod scores;
pub mod serde_inf;
pub mod world;

pub use env::{Action, Env, EnvConfig, EnvState, ObjectId, Observation, TerminationReason};
pub use episodes::{Episode, LevelParams};
pub use geom::{Heading, Point, Pose};
pub use world::{OccupancyGrid, SceneSpec};
