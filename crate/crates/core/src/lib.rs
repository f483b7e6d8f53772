//! Bandit-driven explicit reward shaping.
//!
//! An RL agent keeps two value tables: `Q`, learned from the environment
//! reward, and `Φ`, learned from an expert's reward. At the start of every
//! episode a two-armed bandit decides which table the agent follows. The
//! bandit policies in [`policies`] use monotone learning-curve forecasts
//! ([`forecaster`]) and Hoeffding bounds so that good advice speeds up
//! learning while bad advice is dropped, and the `Q` arm is never removed.
//!
//! [`harness`] runs seeded experiments on the environments in [`envs`] and
//! writes one CSV row per episode.

pub mod agent;
pub mod bandit;
pub mod envs;
pub mod error;
pub mod forecaster;
pub mod harness;
pub mod policies;
pub mod rng;

pub use bandit::{ArmId, ArmHistory, NormalizationBounds, PullRecord, ShapingRun};
pub use error::{Error, Result};
pub use policies::{PolicyKind, PolicyParams, ShapingPolicy};
