use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::agent::{AgentParams, Behavior, SarsaAgent};
use crate::bandit::{ArmId, NormalizationBounds, PullRecord, ShapingRun};
use crate::envs::{AdviceSpec, GridWorld, RisingBanditEnv};
use crate::error::{Error, Result};
use crate::forecaster::{hoeffding_lower, hoeffding_upper, refresh_jhat, TrainingConfig};
use crate::harness::config::{EnvSpec, ExperimentConfig};
use crate::harness::csv_out::{write_csv_file, RunRow};
use crate::policies::{
    classic_pies_weight, stationary_ucb_scores, upies_scores, EliminationEvent, PolicyKind, SelectionDecision,
    SelectionReason, ShapingPolicy,
};
use crate::rng::{forecaster_seed, stream_rng, RunRng, Stream};

/// What the underlying learner is asked to do for one episode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EpisodeChoice {
    Arm(ArmId),
    /// Action-level blend `Q + xi * Φ` (classic PIES).
    Blend { xi: f64 },
}

/// Anything that can play one episode under a chosen arm and report its
/// undiscounted return. The shaping policies only ever see these returns.
pub trait EpisodeExecutor {
    fn execute(&mut self, choice: EpisodeChoice) -> Result<f64>;

    /// Called once when the expert arm is eliminated.
    fn on_phi_eliminated(&mut self) {}
}

/// Arm `Q` is the rising arm (index 0), arm `Φ` the constant one (index 1).
pub struct RisingBanditExecutor {
    env: RisingBanditEnv,
    rng: RunRng,
}

impl RisingBanditExecutor {
    pub fn new(env: RisingBanditEnv, seed: u64) -> Self {
        Self { env, rng: stream_rng(seed, Stream::EnvNoise) }
    }
}

impl EpisodeExecutor for RisingBanditExecutor {
    fn execute(&mut self, choice: EpisodeChoice) -> Result<f64> {
        let arm = match choice {
            EpisodeChoice::Arm(a) => a,
            EpisodeChoice::Blend { .. } => ArmId::Q,
        };
        self.env.pull(arm.index(), &mut self.rng)
    }
}

pub struct GridExecutor {
    env: GridWorld,
    agent: SarsaAgent,
    advice: AdviceSpec,
    rng: RunRng,
}

impl GridExecutor {
    pub fn new(env: GridWorld, advice: AdviceSpec, params: AgentParams, seed: u64) -> Self {
        let agent = SarsaAgent::new(&env, params);
        Self { env, agent, advice, rng: stream_rng(seed, Stream::Agent) }
    }

    pub fn agent(&self) -> &SarsaAgent {
        &self.agent
    }
}

impl EpisodeExecutor for GridExecutor {
    fn execute(&mut self, choice: EpisodeChoice) -> Result<f64> {
        let behavior = match choice {
            EpisodeChoice::Arm(a) => Behavior::Arm(a),
            EpisodeChoice::Blend { xi } => Behavior::Blend { xi },
        };
        Ok(self.agent.run_episode(&self.env, behavior, &self.advice, &mut self.rng)?.env_return)
    }

    fn on_phi_eliminated(&mut self) {
        self.agent.freeze_phi();
    }
}

/// The bandit side of one seed: run state, policy and its coin, and the
/// forecaster settings. Callers alternate [`ShapingSession::select`] and
/// [`ShapingSession::observe`] once per episode; whatever plays the episode
/// stays outside.
#[derive(Debug, Clone)]
pub struct ShapingSession {
    run: ShapingRun,
    policy: ShapingPolicy,
    forecaster: TrainingConfig,
    rng: RunRng,
}

/// Result of [`ShapingSession::observe`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation {
    pub record: PullRecord,
    pub eliminated: Option<EliminationEvent>,
}

impl ShapingSession {
    pub fn new(
        policy: ShapingPolicy,
        horizon: u32,
        bounds: NormalizationBounds,
        forecaster: TrainingConfig,
        seed: u64,
    ) -> Result<Self> {
        forecaster.validate()?;
        Ok(Self {
            run: ShapingRun::new(horizon, bounds, seed)?,
            policy,
            forecaster,
            rng: stream_rng(seed, Stream::Policy),
        })
    }

    pub fn run(&self) -> &ShapingRun {
        &self.run
    }

    pub fn policy(&self) -> &ShapingPolicy {
        &self.policy
    }

    /// Picks the arm for the next episode.
    pub fn select(&mut self) -> Result<(SelectionDecision, EpisodeChoice)> {
        if self.run.is_complete() {
            return Err(Error::RunComplete { horizon: self.run.horizon() });
        }
        let decision = self.policy.select(&self.run, &mut self.rng);
        let choice = match decision.reason {
            SelectionReason::XiBlend => {
                EpisodeChoice::Blend { xi: classic_pies_weight(self.run.current_episode(), &self.policy.params) }
            }
            _ => EpisodeChoice::Arm(decision.arm),
        };
        Ok((decision, choice))
    }

    /// Records the episode's raw return for `arm`, refreshes that arm's
    /// forecast when the policy uses one, then applies elimination.
    pub fn observe(&mut self, arm: ArmId, raw_return: f64) -> Result<Observation> {
        let record = self.run.record_pull(arm, raw_return)?;
        let horizon = self.run.horizon();
        if let Some(constraint) = self.policy.kind.forecast() {
            let t = self.run.current_episode();
            if t < horizon {
                let seed = forecaster_seed(self.run.seed(), arm, record.pull_index);
                let cfg = self.forecaster.with_seed(seed);
                refresh_jhat(self.run.history_mut(arm), &cfg, horizon, t, constraint)?;
            }
        }
        let eliminated = self.policy.update(&mut self.run);
        Ok(Observation { record, eliminated })
    }

    /// Bounds or scores the policy bases its choice on, for the CSV
    /// columns `ucb_q, lcb_q, ucb_phi, lcb_phi`.
    pub fn diagnostics(&self) -> [Option<f64>; 4] {
        let run = &self.run;
        match self.policy.kind {
            PolicyKind::Rpies => {
                let delta = self.policy.params.delta;
                let h = |a: ArmId| run.history(a);
                [
                    hoeffding_upper(h(ArmId::Q).jhat_estimates(), delta).ok(),
                    hoeffding_lower(h(ArmId::Q).returns(), delta).ok(),
                    hoeffding_upper(h(ArmId::Phi).jhat_estimates(), delta).ok(),
                    hoeffding_lower(h(ArmId::Phi).returns(), delta).ok(),
                ]
            }
            PolicyKind::Upies | PolicyKind::NonMonotoneUpies => match upies_scores(run) {
                Some([q, phi]) => [Some(q), None, Some(phi), None],
                None => [None; 4],
            },
            PolicyKind::StationaryUcb => match stationary_ucb_scores(run) {
                Some([q, phi]) => [Some(q), None, Some(phi), None],
                None => [None; 4],
            },
            _ => [None; 4],
        }
    }

    fn row(&self, experiment: &str, rec: &PullRecord) -> RunRow {
        let [ucb_q, lcb_q, ucb_phi, lcb_phi] = self.diagnostics();
        RunRow {
            experiment: experiment.to_string(),
            seed: self.run.seed(),
            episode: rec.episode,
            arm: rec.arm as u8,
            raw_return: rec.raw_return,
            normalized_return: rec.normalized_return,
            phi_eliminated: u8::from(self.run.phi_eliminated()),
            ucb_q,
            lcb_q,
            ucb_phi,
            lcb_phi,
            jhat_q: self.run.history(ArmId::Q).last_jhat(),
            jhat_phi: self.run.history(ArmId::Phi).last_jhat(),
        }
    }
}

/// Drives one seed of the shaping-bandit protocol to completion, one CSV
/// row per episode.
pub fn run_shaping<E: EpisodeExecutor>(
    experiment: &str,
    policy: &ShapingPolicy,
    executor: &mut E,
    horizon: u32,
    bounds: NormalizationBounds,
    forecaster: &TrainingConfig,
    seed: u64,
) -> Result<Vec<RunRow>> {
    let mut session = ShapingSession::new(policy.clone(), horizon, bounds, forecaster.clone(), seed)?;
    let mut rows = Vec::with_capacity(horizon as usize);
    while !session.run().is_complete() {
        let (decision, choice) = session.select()?;
        let raw = executor.execute(choice)?;
        let obs = session.observe(decision.arm, raw)?;
        if obs.eliminated.is_some() {
            executor.on_phi_eliminated();
        }
        rows.push(session.row(experiment, &obs.record));
    }
    Ok(rows)
}

/// Runs a single seed of a (non-sweep) config.
pub fn run_seed(cfg: &ExperimentConfig, seed: u64) -> Result<Vec<RunRow>> {
    let policy = ShapingPolicy::new(cfg.policy.kind, cfg.policy.params.clone())?;
    let bounds = cfg.bounds()?;
    let name = &cfg.experiment.name;
    let horizon = cfg.experiment.horizon;
    match &cfg.env {
        EnvSpec::RisingBandit { y_max, noise } => {
            let mut env = RisingBanditEnv::new(*y_max);
            if !noise {
                env = env.without_noise();
            }
            let mut exec = RisingBanditExecutor::new(env, seed);
            run_shaping(name, &policy, &mut exec, horizon, bounds, &cfg.forecaster, seed)
        }
        EnvSpec::GridWorld { advice, max_steps } => {
            let env = GridWorld { max_steps: *max_steps, ..GridWorld::with_advice(*advice) };
            let advice = if cfg.policy.kind == PolicyKind::NoShaping {
                AdviceSpec::new(crate::envs::AdviceKind::None)
            } else {
                AdviceSpec::new(*advice)
            };
            let mut exec = GridExecutor::new(env, advice, cfg.agent.clone(), seed);
            run_shaping(name, &policy, &mut exec, horizon, bounds, &cfg.forecaster, seed)
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub seed_offset: u64,
    pub parallel: bool,
}

/// Runs every seed of `cfg` and returns the rows ordered by seed then
/// episode, independent of whether seeds ran in parallel.
pub fn run_experiment(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<Vec<RunRow>> {
    cfg.validate()?;
    let seeds: Vec<u64> = cfg.experiment.seeds.iter().map(|s| s.wrapping_add(opts.seed_offset)).collect();
    let per_seed: Vec<Vec<RunRow>> = if opts.parallel {
        seeds.par_iter().map(|&s| run_seed(cfg, s)).collect::<Result<_>>()?
    } else {
        seeds.iter().map(|&s| run_seed(cfg, s)).collect::<Result<_>>()?
    };
    Ok(per_seed.into_iter().flatten().collect())
}

/// Writes `rows` to `<dir>/<experiment name>.csv` and returns the path.
pub fn write_experiment(cfg: &ExperimentConfig, dir: &Path, rows: &[RunRow]) -> Result<PathBuf> {
    let path = dir.join(format!("{}.csv", cfg.experiment.name));
    write_csv_file(&path, rows)?;
    Ok(path)
}
