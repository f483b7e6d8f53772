//! Evaluation environments: a two-armed bandit whose first arm improves with
//! use, and a deterministic grid-world with three styles of expert advice.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Two-armed bandit. Arm 0 ramps linearly from 0 towards `y_max` with its
/// own pull count; arm 1 pays a constant mean from the first pull.
#[derive(Debug, Clone, PartialEq)]
pub struct RisingBanditEnv {
    pub y_max: f64,
    pub rate: f64,
    pub const_mean: f64,
    pub noise_std: f64,
    pull_counts: [u32; 2],
}

impl RisingBanditEnv {
    pub fn new(y_max: f64) -> Self {
        Self { y_max, rate: 0.01, const_mean: 0.5, noise_std: 0.1f64.sqrt(), pull_counts: [0; 2] }
    }

    pub fn without_noise(mut self) -> Self {
        self.noise_std = 0.0;
        self
    }

    pub fn pull_count(&self, arm: usize) -> u32 {
        self.pull_counts[arm]
    }

    /// Expected reward of `arm` on its `k`-th pull (`k >= 1`).
    pub fn mean_at(&self, arm: usize, k: u32) -> f64 {
        match arm {
            0 => (self.rate * f64::from(k.saturating_sub(1))).min(self.y_max),
            _ => self.const_mean,
        }
    }

    pub fn pull<R: Rng + ?Sized>(&mut self, arm: usize, rng: &mut R) -> Result<f64> {
        if arm > 1 {
            return Err(Error::invalid(format!("rising bandit has arms 0 and 1, got {arm}")));
        }
        self.pull_counts[arm] += 1;
        let mean = self.mean_at(arm, self.pull_counts[arm]);
        // The noise draw is consumed even when suppressed so that switching
        // noise off does not shift later draws.
        let z: f64 = Normal::new(0.0, 1.0).unwrap().sample(rng);
        Ok(mean + self.noise_std * z)
    }

    /// Expected total reward of pulling `arm` on every one of `horizon` rounds.
    pub fn constant_arm_value(&self, arm: usize, horizon: u32) -> f64 {
        (1..=horizon).map(|k| self.mean_at(arm, k)).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum Action {
    North = 0,
    South = 1,
    East = 2,
    West = 3,
}

impl Action {
    pub const ALL: [Action; 4] = [Action::North, Action::South, Action::East, Action::West];
    pub const COUNT: usize = 4;

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Action {
        Action::ALL[i]
    }

    fn delta(self) -> (i32, i32) {
        match self {
            Action::North => (0, -1),
            Action::South => (0, 1),
            Action::East => (1, 0),
            Action::West => (-1, 0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cell {
    pub x: u32,
    pub y: u32,
}

impl Cell {
    pub const fn new(x: u32, y: u32) -> Self {
        Self { x, y }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AdviceKind {
    Good,
    Friendly,
    Adversarial,
    #[default]
    None,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdviceSpec {
    pub kind: AdviceKind,
    pub bonus: f64,
}

impl AdviceSpec {
    pub fn new(kind: AdviceKind) -> Self {
        Self { kind, bonus: 0.1 }
    }
}

/// Expert reward for taking `action` in `state`. None of the bundled
/// advice kinds look at the state.
pub fn expert_reward(spec: &AdviceSpec, _state: Cell, action: Action) -> f64 {
    use Action::*;
    let rewarded = match spec.kind {
        AdviceKind::Good => matches!(action, East | South),
        AdviceKind::Adversarial => matches!(action, West | North),
        AdviceKind::Friendly => action == East,
        AdviceKind::None => false,
    };
    if rewarded {
        spec.bonus
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Terminal {
    Goal,
    SubGoal,
    Timeout,
}

/// Deterministic grid on the coordinate lattice `{0..=size-1}^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridWorld {
    pub size: u32,
    pub start: Cell,
    pub goal: Cell,
    pub goal_reward: f64,
    pub step_reward: f64,
    pub sub_goal: Cell,
    pub sub_goal_reward: f64,
    pub sub_goal_active: bool,
    pub max_steps: u32,
}

impl Default for GridWorld {
    fn default() -> Self {
        Self {
            size: 21,
            start: Cell::new(0, 0),
            goal: Cell::new(20, 20),
            goal_reward: 100.0,
            step_reward: -0.1,
            sub_goal: Cell::new(20, 0),
            sub_goal_reward: 5.0,
            sub_goal_active: false,
            max_steps: 2000,
        }
    }
}

/// Mutable per-episode position and step counter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridEpisode {
    pub pos: Cell,
    pub steps: u32,
    pub finished: Option<Terminal>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transition {
    pub next: Cell,
    pub reward: f64,
    pub done: bool,
    /// Whether the episode ended in a terminal cell (as opposed to timing
    /// out); value bootstrapping is cut only in that case.
    pub absorbing: bool,
}

/// Reference trajectories used for regret and acceptance thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReferencePath {
    /// Shortest path from the start to the goal.
    Goal,
    /// Shortest path from the start to the sub-goal.
    SubGoal,
    /// Never reaching any terminal cell before the step limit.
    Timeout,
}

impl GridWorld {
    pub fn with_advice(kind: AdviceKind) -> Self {
        Self { sub_goal_active: kind == AdviceKind::Friendly, ..Self::default() }
    }

    pub fn n_states(&self) -> usize {
        (self.size * self.size) as usize
    }

    pub fn state_index(&self, c: Cell) -> usize {
        (c.y * self.size + c.x) as usize
    }

    pub fn cell_of(&self, index: usize) -> Cell {
        let i = index as u32;
        Cell::new(i % self.size, i / self.size)
    }

    pub fn reset(&self) -> GridEpisode {
        GridEpisode { pos: self.start, steps: 0, finished: None }
    }

    pub fn in_bounds(&self, c: Cell) -> bool {
        c.x < self.size && c.y < self.size
    }

    pub fn step(&self, ep: &mut GridEpisode, action: Action) -> Result<Transition> {
        if ep.finished.is_some() {
            return Err(Error::EpisodeFinished);
        }
        let (dx, dy) = action.delta();
        let nx = ep.pos.x as i64 + i64::from(dx);
        let ny = ep.pos.y as i64 + i64::from(dy);
        let limit = i64::from(self.size);
        let next = if (0..limit).contains(&nx) && (0..limit).contains(&ny) {
            Cell::new(nx as u32, ny as u32)
        } else {
            ep.pos
        };
        ep.pos = next;
        ep.steps += 1;

        let mut reward = self.step_reward;
        let mut terminal = None;
        if next == self.goal {
            reward += self.goal_reward;
            terminal = Some(Terminal::Goal);
        } else if self.sub_goal_active && next == self.sub_goal {
            reward += self.sub_goal_reward;
            terminal = Some(Terminal::SubGoal);
        }
        let absorbing = terminal.is_some();
        if terminal.is_none() && ep.steps >= self.max_steps {
            terminal = Some(Terminal::Timeout);
        }
        ep.finished = terminal;
        Ok(Transition { next, reward, done: terminal.is_some(), absorbing })
    }

    pub fn optimal_return(&self, path: ReferencePath) -> f64 {
        let manhattan = |c: Cell| f64::from(c.x.abs_diff(self.start.x) + c.y.abs_diff(self.start.y));
        match path {
            ReferencePath::Goal => self.goal_reward + self.step_reward * manhattan(self.goal),
            ReferencePath::SubGoal => self.sub_goal_reward + self.step_reward * manhattan(self.sub_goal),
            ReferencePath::Timeout => self.step_reward * f64::from(self.max_steps),
        }
    }
}
