//! The two-armed shaping bandit: arms, per-arm histories and the episode
//! counter shared by every selection policy.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which behaviour the agent follows for an episode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[repr(u8)]
pub enum ArmId {
    /// Default RL behaviour, greedy on the environment-reward table.
    Q = 0,
    /// Expert behaviour, greedy on the expert-reward table.
    Phi = 1,
}

impl ArmId {
    pub const ALL: [ArmId; 2] = [ArmId::Q, ArmId::Phi];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<ArmId> {
        match i {
            0 => Some(ArmId::Q),
            1 => Some(ArmId::Phi),
            _ => None,
        }
    }

    pub fn other(self) -> ArmId {
        match self {
            ArmId::Q => ArmId::Phi,
            ArmId::Phi => ArmId::Q,
        }
    }
}

impl fmt::Display for ArmId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ArmId::Q => f.write_str("Q"),
            ArmId::Phi => f.write_str("Phi"),
        }
    }
}

/// Affine map from environment returns onto `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalizationBounds {
    r_min: f64,
    r_max: f64,
}

impl NormalizationBounds {
    pub fn new(r_min: f64, r_max: f64) -> Result<Self> {
        if !(r_min.is_finite() && r_max.is_finite()) || r_max <= r_min {
            return Err(Error::InvalidBounds { r_min, r_max });
        }
        Ok(Self { r_min, r_max })
    }

    pub const UNIT: NormalizationBounds = NormalizationBounds { r_min: 0.0, r_max: 1.0 };

    pub fn r_min(&self) -> f64 {
        self.r_min
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }
}

/// Maps a raw return into `[0, 1]`, clamping anything outside the bounds.
pub fn normalize_return(raw: f64, bounds: &NormalizationBounds) -> f64 {
    let x = (raw - bounds.r_min) / (bounds.r_max - bounds.r_min);
    x.clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PullRecord {
    pub episode: u32,
    pub arm: ArmId,
    pub pull_index: u32,
    pub raw_return: f64,
    pub normalized_return: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArmHistory {
    arm: ArmId,
    returns: Vec<f64>,
    jhat_estimates: Vec<f64>,
    eliminated: bool,
}

impl ArmHistory {
    pub fn new(arm: ArmId) -> Self {
        Self { arm, returns: Vec::new(), jhat_estimates: Vec::new(), eliminated: false }
    }

    /// Builds a history directly from normalized returns and estimates.
    /// Used by tests and by callers replaying recorded data.
    pub fn from_parts(arm: ArmId, returns: Vec<f64>, jhat_estimates: Vec<f64>) -> Result<Self> {
        if jhat_estimates.len() > returns.len() {
            return Err(Error::invalid("more jhat estimates than recorded returns"));
        }
        if returns.iter().chain(&jhat_estimates).any(|x| !(0.0..=1.0).contains(x)) {
            return Err(Error::invalid("history values must lie in [0, 1]"));
        }
        Ok(Self { arm, returns, jhat_estimates, eliminated: false })
    }

    pub fn arm(&self) -> ArmId {
        self.arm
    }

    pub fn returns(&self) -> &[f64] {
        &self.returns
    }

    pub fn jhat_estimates(&self) -> &[f64] {
        &self.jhat_estimates
    }

    pub fn pulls(&self) -> u32 {
        self.returns.len() as u32
    }

    pub fn is_eliminated(&self) -> bool {
        self.eliminated
    }

    pub fn last_jhat(&self) -> Option<f64> {
        self.jhat_estimates.last().copied()
    }

    pub(crate) fn push_jhat(&mut self, jhat: f64) {
        debug_assert!(self.jhat_estimates.len() < self.returns.len());
        self.jhat_estimates.push(jhat.clamp(0.0, 1.0));
    }

    /// Marks the arm eliminated. Only the expert arm can ever be eliminated.
    pub(crate) fn eliminate(&mut self) {
        assert_eq!(self.arm, ArmId::Phi, "the Q arm is never eliminated");
        self.eliminated = true;
    }
}

pub fn mean_return(history: &ArmHistory) -> Result<f64> {
    mean(history.returns()).ok_or(Error::EmptyHistory)
}

pub(crate) fn mean(xs: &[f64]) -> Option<f64> {
    if xs.is_empty() {
        None
    } else {
        Some(xs.iter().sum::<f64>() / xs.len() as f64)
    }
}

/// State of one shaping-bandit run over a fixed horizon of episodes.
#[derive(Debug, Clone)]
pub struct ShapingRun {
    horizon: u32,
    current_episode: u32,
    histories: [ArmHistory; 2],
    bounds: NormalizationBounds,
    seed: u64,
}

impl ShapingRun {
    pub fn new(horizon: u32, bounds: NormalizationBounds, seed: u64) -> Result<Self> {
        if horizon == 0 {
            return Err(Error::Config("horizon must be at least 1".into()));
        }
        Ok(Self {
            horizon,
            current_episode: 0,
            histories: [ArmHistory::new(ArmId::Q), ArmHistory::new(ArmId::Phi)],
            bounds,
            seed,
        })
    }

    /// Resumes a run from recorded histories; the episode counter is the
    /// total number of pulls.
    pub fn from_histories(
        horizon: u32,
        bounds: NormalizationBounds,
        seed: u64,
        q: ArmHistory,
        phi: ArmHistory,
    ) -> Result<Self> {
        if q.arm != ArmId::Q || phi.arm != ArmId::Phi {
            return Err(Error::invalid("histories must be given in (Q, Φ) order"));
        }
        let mut run = Self::new(horizon, bounds, seed)?;
        let pulls = q.pulls() + phi.pulls();
        if pulls > horizon {
            return Err(Error::invalid(format!("{pulls} recorded pulls exceed the horizon {horizon}")));
        }
        run.current_episode = pulls;
        run.histories = [q, phi];
        Ok(run)
    }

    pub fn horizon(&self) -> u32 {
        self.horizon
    }

    /// Number of episodes completed so far.
    pub fn current_episode(&self) -> u32 {
        self.current_episode
    }

    pub fn remaining(&self) -> u32 {
        self.horizon - self.current_episode
    }

    pub fn is_complete(&self) -> bool {
        self.current_episode >= self.horizon
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn bounds(&self) -> &NormalizationBounds {
        &self.bounds
    }

    pub fn history(&self, arm: ArmId) -> &ArmHistory {
        &self.histories[arm.index()]
    }

    pub(crate) fn history_mut(&mut self, arm: ArmId) -> &mut ArmHistory {
        &mut self.histories[arm.index()]
    }

    pub fn pulls(&self, arm: ArmId) -> u32 {
        self.history(arm).pulls()
    }

    pub fn phi_eliminated(&self) -> bool {
        self.history(ArmId::Phi).is_eliminated()
    }

    pub fn eliminate_phi(&mut self) {
        self.history_mut(ArmId::Phi).eliminate();
    }

    pub fn record_pull(&mut self, arm: ArmId, raw_return: f64) -> Result<PullRecord> {
        if self.history(arm).is_eliminated() {
            return Err(Error::EliminatedArm(arm));
        }
        if self.is_complete() {
            return Err(Error::RunComplete { horizon: self.horizon });
        }
        let normalized_return = normalize_return(raw_return, &self.bounds);
        self.current_episode += 1;
        let episode = self.current_episode;
        let history = self.history_mut(arm);
        history.returns.push(normalized_return);
        Ok(PullRecord {
            episode,
            arm,
            pull_index: history.pulls(),
            raw_return,
            normalized_return,
        })
    }
}
