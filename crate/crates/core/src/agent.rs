//! Tabular SARSA with two value tables: `Q` learns from the environment
//! reward and `Φ` learns from the expert reward. Both are updated from the
//! single trajectory the agent actually executes, whichever table drove it.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bandit::ArmId;
use crate::envs::{expert_reward, Action, AdviceKind, AdviceSpec, GridWorld, Terminal};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AgentParams {
    pub alpha: f64,
    pub beta: f64,
    pub epsilon: f64,
    pub gamma: f64,
    /// Discount of the `Φ` table. Advice bonuses are positive and
    /// state-independent, so below about 0.618 the greedy `Φ` policy walks to
    /// the advised terminal instead of cycling next to it.
    pub gamma_phi: f64,
    /// Optimistic initial value of every `Q` entry.
    pub q0: f64,
    pub phi0: f64,
    /// When false, only the table that chose the episode's actions learns.
    pub share_experience: bool,
}

impl Default for AgentParams {
    fn default() -> Self {
        Self { alpha: 0.1, beta: 0.1, epsilon: 0.1, gamma: 1.0, gamma_phi: 0.0, q0: 100.0, phi0: 0.0, share_experience: true }
    }
}

impl AgentParams {
    pub fn validate(&self) -> Result<()> {
        let unit = |x: f64| x > 0.0 && x <= 1.0;
        if !unit(self.alpha) || !unit(self.beta) {
            return Err(Error::Config("agent learning rates must lie in (0, 1]".into()));
        }
        if !unit(self.gamma) {
            return Err(Error::Config("agent gamma must lie in (0, 1]".into()));
        }
        if !(0.0..=1.0).contains(&self.gamma_phi) {
            return Err(Error::Config("agent gamma_phi must lie in [0, 1]".into()));
        }
        if !(0.0..=1.0).contains(&self.epsilon) {
            return Err(Error::Config("agent epsilon must lie in [0, 1]".into()));
        }
        Ok(())
    }
}

/// Which values drive action selection during an episode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Behavior {
    Arm(ArmId),
    /// Greedy on `Q + xi * Φ`.
    Blend { xi: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DualValueTables {
    n_states: usize,
    q: Vec<f64>,
    phi: Vec<f64>,
}

impl DualValueTables {
    pub fn new(n_states: usize, q0: f64, phi0: f64) -> Self {
        Self { n_states, q: vec![q0; n_states * Action::COUNT], phi: vec![phi0; n_states * Action::COUNT] }
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn q_row(&self, s: usize) -> &[f64] {
        &self.q[s * Action::COUNT..(s + 1) * Action::COUNT]
    }

    pub fn phi_row(&self, s: usize) -> &[f64] {
        &self.phi[s * Action::COUNT..(s + 1) * Action::COUNT]
    }

    pub fn q_row_mut(&mut self, s: usize) -> &mut [f64] {
        &mut self.q[s * Action::COUNT..(s + 1) * Action::COUNT]
    }

    pub fn phi_row_mut(&mut self, s: usize) -> &mut [f64] {
        &mut self.phi[s * Action::COUNT..(s + 1) * Action::COUNT]
    }

    pub fn q_table(&self) -> &[f64] {
        &self.q
    }

    pub fn phi_table(&self) -> &[f64] {
        &self.phi
    }

    fn score(&self, s: usize, a: usize, behavior: Behavior) -> f64 {
        let k = s * Action::COUNT + a;
        match behavior {
            Behavior::Arm(ArmId::Q) => self.q[k],
            Behavior::Arm(ArmId::Phi) => self.phi[k],
            Behavior::Blend { xi } => self.q[k] + xi * self.phi[k],
        }
    }

    /// Greedy actions per state as a text grid (`^ v > <`), for debugging.
    pub fn greedy_map(&self, env: &GridWorld, arm: ArmId) -> String {
        let glyph = ['^', 'v', '>', '<'];
        let mut out = String::new();
        for y in 0..env.size {
            for x in 0..env.size {
                let s = env.state_index(crate::envs::Cell::new(x, y));
                let row = if arm == ArmId::Q { self.q_row(s) } else { self.phi_row(s) };
                let best = (0..Action::COUNT).fold(0, |b, a| if row[a] > row[b] { a } else { b });
                out.push(glyph[best]);
            }
            out.push('\n');
        }
        out
    }
}

/// Index of a maximal entry, ties broken uniformly at random.
pub fn argmax_random_tie<R: Rng + ?Sized>(values: impl Iterator<Item = f64>, rng: &mut R) -> usize {
    let mut best = f64::NEG_INFINITY;
    let mut ties = 0u32;
    let mut chosen = 0;
    for (i, v) in values.enumerate() {
        if v > best {
            best = v;
            ties = 1;
            chosen = i;
        } else if v == best {
            // Reservoir sampling over the tied indices.
            ties += 1;
            if rng.random_range(0..ties) == 0 {
                chosen = i;
            }
        }
    }
    chosen
}

/// ε-greedy action on the behaviour's values.
pub fn select_action<R: Rng + ?Sized>(
    tables: &DualValueTables,
    state: usize,
    behavior: Behavior,
    epsilon: f64,
    rng: &mut R,
) -> Action {
    if rng.random::<f64>() < epsilon {
        return Action::from_index(rng.random_range(0..Action::COUNT));
    }
    let a = argmax_random_tie((0..Action::COUNT).map(|a| tables.score(state, a, behavior)), rng);
    Action::from_index(a)
}

pub fn classic_pies_action<R: Rng + ?Sized>(
    tables: &DualValueTables,
    state: usize,
    xi: f64,
    epsilon: f64,
    rng: &mut R,
) -> Action {
    select_action(tables, state, Behavior::Blend { xi }, epsilon, rng)
}

/// One SARSA backup; `next_value` is ignored for absorbing transitions.
pub fn sarsa_update(value: f64, reward: f64, next_value: f64, lr: f64, gamma: f64, terminal: bool) -> f64 {
    let bootstrap = if terminal { 0.0 } else { gamma * next_value };
    value + lr * (reward + bootstrap - value)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpisodeResult {
    pub env_return: f64,
    pub steps: u32,
    pub terminal: Terminal,
}

#[derive(Debug, Clone)]
pub struct SarsaAgent {
    pub params: AgentParams,
    pub tables: DualValueTables,
    phi_frozen: bool,
}

impl SarsaAgent {
    pub fn new(env: &GridWorld, params: AgentParams) -> Self {
        let tables = DualValueTables::new(env.n_states(), params.q0, params.phi0);
        Self { params, tables, phi_frozen: false }
    }

    /// Stops all further `Φ` learning (used once the expert arm is out).
    pub fn freeze_phi(&mut self) {
        self.phi_frozen = true;
    }

    pub fn phi_frozen(&self) -> bool {
        self.phi_frozen
    }

    pub fn run_episode<R: Rng + ?Sized>(
        &mut self,
        env: &GridWorld,
        behavior: Behavior,
        advice: &AdviceSpec,
        rng: &mut R,
    ) -> Result<EpisodeResult> {
        let p = self.params.clone();
        let (learn_q, learn_phi) = match behavior {
            _ if p.share_experience => (true, true),
            Behavior::Arm(ArmId::Q) => (true, false),
            Behavior::Arm(ArmId::Phi) => (false, true),
            Behavior::Blend { .. } => (true, true),
        };
        let learn_phi = learn_phi && !self.phi_frozen && advice.kind != AdviceKind::None;

        let mut ep = env.reset();
        let mut s = env.state_index(ep.pos);
        let mut a = select_action(&self.tables, s, behavior, p.epsilon, rng);
        let mut env_return = 0.0;
        loop {
            let cell = ep.pos;
            let t = env.step(&mut ep, a)?;
            env_return += t.reward;
            let s_next = env.state_index(t.next);
            let a_next =
                if t.absorbing { a } else { select_action(&self.tables, s_next, behavior, p.epsilon, rng) };
            let k = s * Action::COUNT + a.index();
            let k_next = s_next * Action::COUNT + a_next.index();
            if learn_q {
                let next = self.tables.q[k_next];
                self.tables.q[k] = sarsa_update(self.tables.q[k], t.reward, next, p.alpha, p.gamma, t.absorbing);
            }
            if learn_phi {
                // Bumping into a wall follows no advice.
                let r = if t.next == cell { 0.0 } else { expert_reward(advice, cell, a) };
                let next = self.tables.phi[k_next];
                self.tables.phi[k] = sarsa_update(self.tables.phi[k], r, next, p.beta, p.gamma_phi, t.absorbing);
            }
            if t.done {
                return Ok(EpisodeResult {
                    env_return,
                    steps: ep.steps,
                    terminal: ep.finished.expect("finished episode has a terminal"),
                });
            }
            s = s_next;
            a = a_next;
        }
    }
}
