//! Simulator for keeping tasks networked to a base station through a swarm
//! of relay drones that fail at random.
//!
//! The crate holds the world model and its stochastic dynamics, the
//! connectivity and uptime metrics, the semi-Steiner task tree, the
//! potential-field energy and its descent planner, the asynchronous
//! knowledge model, a flocking baseline, and the episode/batch engine.

pub mod config;
pub mod connectivity;
pub mod dccrs;
pub mod engine;
pub mod error;
pub mod field;
pub mod geometry;
pub mod messaging;
pub mod planner;
pub mod rng;
pub mod steiner;
pub mod world;

pub use config::{Mode, ScenarioConfig, SizePreset, ATTRITION_GRID};
pub use engine::{aggregate, run_batch, run_episode, run_episode_with, Aggregate, BatchConfig, ControllerKind, EpisodeOptions, EpisodeResult};
pub use error::{Result, SimError};
pub use geometry::Vec2;
