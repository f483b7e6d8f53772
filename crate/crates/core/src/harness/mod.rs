//! Experiment orchestration: configuration, seeded runs, CSV output,
//! regret accounting and the brute-force check that a constant-arm policy
//! is optimal for rested bandits with non-decreasing means.

mod config;
mod csv_out;
mod oracle;
mod regret;
mod runner;

pub use config::{
    bundled_config, BoundsSection, EnvSpec, ExperimentConfig, ExperimentSection, PolicySection, SweepSpec,
    BUNDLED_CONFIGS,
};
pub use csv_out::{read_rows, write_rows, RunRow, CSV_HEADER};
pub use oracle::{proposition1_oracle, OracleOutcome};
pub use regret::{cumulative_regret, rising_bandit_oracle, RegretReport};
pub use runner::{
    run_experiment, run_seed, run_shaping, write_experiment, EpisodeChoice, EpisodeExecutor, GridExecutor,
    Observation, RisingBanditExecutor, RunOptions, ShapingSession,
};
