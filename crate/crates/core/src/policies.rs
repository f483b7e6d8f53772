//! Arm selection and elimination rules for the shaping bandit.
//!
//! * LPIES: fair coin between the arms until the expert's historical mean
//!   return falls below the default arm's, then `Q` forever.
//! * RPIES: fair coin until the Hoeffding upper bound on the expert's Ĵ
//!   samples drops below the Hoeffding lower bound on the default arm's
//!   historical returns. The race is rigged: `Q` is never eliminated.
//! * UPIES: UCB on the mean of each arm's Ĵ samples with a log-count bonus.
//!   No elimination.
//! * Baselines: ε-greedy and stationary UCB on historical returns, the
//!   action-level ξ blend of classic PIES, and no shaping at all.
//!
//! Every bandit pulls each unpulled arm once (`Q` first) before its rule
//! applies, and every tie resolves to `Q`.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bandit::{mean, ArmId, ShapingRun};
use crate::error::{Error, Result};
use crate::forecaster::{hoeffding_lower, hoeffding_upper, WeightConstraint};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum PolicyKind {
    Lpies,
    Rpies,
    Upies,
    NonMonotoneUpies,
    EpsGreedy,
    StationaryUcb,
    ClassicPies,
    NoShaping,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 8] = [
        PolicyKind::Lpies,
        PolicyKind::Rpies,
        PolicyKind::Upies,
        PolicyKind::NonMonotoneUpies,
        PolicyKind::EpsGreedy,
        PolicyKind::StationaryUcb,
        PolicyKind::ClassicPies,
        PolicyKind::NoShaping,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PolicyKind::Lpies => "lpies",
            PolicyKind::Rpies => "rpies",
            PolicyKind::Upies => "upies",
            PolicyKind::NonMonotoneUpies => "non_monotone_upies",
            PolicyKind::EpsGreedy => "eps_greedy",
            PolicyKind::StationaryUcb => "stationary_ucb",
            PolicyKind::ClassicPies => "classic_pies",
            PolicyKind::NoShaping => "no_shaping",
        }
    }

    /// The forecaster variant this policy needs after every pull, if any.
    pub fn forecast(self) -> Option<WeightConstraint> {
        match self {
            PolicyKind::Rpies | PolicyKind::Upies => Some(WeightConstraint::NonNegative),
            PolicyKind::NonMonotoneUpies => Some(WeightConstraint::Unconstrained),
            _ => None,
        }
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PolicyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        PolicyKind::ALL
            .into_iter()
            .find(|k| k.name() == key)
            .ok_or_else(|| Error::Config(format!("unknown policy kind `{s}`")))
    }
}

impl TryFrom<String> for PolicyKind {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<PolicyKind> for String {
    fn from(k: PolicyKind) -> String {
        k.name().to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PolicyParams {
    pub delta: f64,
    pub epsilon_bandit: f64,
    pub warmup_pulls: u32,
    pub xi0: f64,
    pub xi_decay_episodes: u32,
}

impl Default for PolicyParams {
    fn default() -> Self {
        Self { delta: 0.05, epsilon_bandit: 0.1, warmup_pulls: 1, xi0: 1.0, xi_decay_episodes: 100 }
    }
}

impl PolicyParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::Config("policy delta must lie in (0, 1)".into()));
        }
        if !(0.0..=1.0).contains(&self.epsilon_bandit) {
            return Err(Error::Config("policy epsilon_bandit must lie in [0, 1]".into()));
        }
        if self.warmup_pulls == 0 {
            return Err(Error::Config("policy warmup_pulls must be >= 1".into()));
        }
        if !(0.0..=1.0).contains(&self.xi0) || self.xi_decay_episodes == 0 {
            return Err(Error::Config("xi0 must lie in [0, 1] and xi_decay_episodes be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelectionReason {
    InitialPull,
    ForcedElimination,
    UniformCoin,
    UcbArgmax,
    EpsExplore,
    EpsExploit,
    XiBlend,
    Fixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SelectionDecision {
    pub arm: ArmId,
    pub reason: SelectionReason,
}

impl SelectionDecision {
    fn new(arm: ArmId, reason: SelectionReason) -> Self {
        Self { arm, reason }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EliminationEvent {
    pub episode: u32,
    pub arm: ArmId,
}

fn first_unpulled(run: &ShapingRun) -> Option<SelectionDecision> {
    ArmId::ALL
        .into_iter()
        .find(|&arm| run.pulls(arm) == 0 && !run.history(arm).is_eliminated())
        .map(|arm| SelectionDecision::new(arm, SelectionReason::InitialPull))
}

fn argmax_prefer_q(score_q: f64, score_phi: f64) -> ArmId {
    if score_phi > score_q {
        ArmId::Phi
    } else {
        ArmId::Q
    }
}

fn coin_select<R: Rng + ?Sized>(run: &ShapingRun, rng: &mut R) -> SelectionDecision {
    if run.phi_eliminated() {
        return SelectionDecision::new(ArmId::Q, SelectionReason::ForcedElimination);
    }
    if let Some(d) = first_unpulled(run) {
        return d;
    }
    let arm = if rng.random_bool(0.5) { ArmId::Phi } else { ArmId::Q };
    SelectionDecision::new(arm, SelectionReason::UniformCoin)
}

pub fn lpies_select<R: Rng + ?Sized>(run: &ShapingRun, rng: &mut R) -> SelectionDecision {
    coin_select(run, rng)
}

pub fn rpies_select<R: Rng + ?Sized>(run: &ShapingRun, rng: &mut R) -> SelectionDecision {
    coin_select(run, rng)
}

fn warmed_up(run: &ShapingRun, params: &PolicyParams) -> bool {
    !run.phi_eliminated() && ArmId::ALL.iter().all(|&a| run.pulls(a) >= params.warmup_pulls)
}

fn eliminate(run: &mut ShapingRun) -> EliminationEvent {
    run.eliminate_phi();
    EliminationEvent { episode: run.current_episode(), arm: ArmId::Phi }
}

pub fn lpies_update(run: &mut ShapingRun, params: &PolicyParams) -> Option<EliminationEvent> {
    if !warmed_up(run, params) {
        return None;
    }
    let q = mean(run.history(ArmId::Q).returns())?;
    let phi = mean(run.history(ArmId::Phi).returns())?;
    (phi < q).then(|| eliminate(run))
}

/// Upper bound on the expert's Ĵ samples and lower bound on the default
/// arm's returns, when both are defined.
pub fn race_bounds(run: &ShapingRun, delta: f64) -> Option<(f64, f64)> {
    let upper_phi = hoeffding_upper(run.history(ArmId::Phi).jhat_estimates(), delta).ok()?;
    let lower_q = hoeffding_lower(run.history(ArmId::Q).returns(), delta).ok()?;
    Some((upper_phi, lower_q))
}

pub fn rpies_update(run: &mut ShapingRun, params: &PolicyParams) -> Option<EliminationEvent> {
    if !warmed_up(run, params) {
        return None;
    }
    let (upper_phi, lower_q) = race_bounds(run, params.delta)?;
    (upper_phi < lower_q).then(|| eliminate(run))
}

/// Mean Ĵ of an arm, falling back to the mean return when the arm has not
/// been forecast yet (only possible on the final episode).
fn jhat_mean(run: &ShapingRun, arm: ArmId) -> f64 {
    let h = run.history(arm);
    mean(h.jhat_estimates()).or_else(|| mean(h.returns())).unwrap_or(0.0)
}

fn log_bonus(run: &ShapingRun, arm: ArmId) -> f64 {
    let total = f64::from(run.pulls(ArmId::Q) + run.pulls(ArmId::Phi));
    (2.0 * total.ln() / f64::from(run.pulls(arm))).sqrt()
}

/// UPIES index of each arm; `None` until both arms have been pulled.
pub fn upies_scores(run: &ShapingRun) -> Option<[f64; 2]> {
    if ArmId::ALL.iter().any(|&a| run.pulls(a) == 0) {
        return None;
    }
    Some(ArmId::ALL.map(|a| jhat_mean(run, a) + log_bonus(run, a)))
}

pub fn upies_select(run: &ShapingRun) -> SelectionDecision {
    if let Some(d) = first_unpulled(run) {
        return d;
    }
    let [q, phi] = upies_scores(run).expect("both arms pulled");
    SelectionDecision::new(argmax_prefer_q(q, phi), SelectionReason::UcbArgmax)
}

pub fn stationary_ucb_scores(run: &ShapingRun) -> Option<[f64; 2]> {
    if ArmId::ALL.iter().any(|&a| run.pulls(a) == 0) {
        return None;
    }
    Some(ArmId::ALL.map(|a| mean(run.history(a).returns()).unwrap() + log_bonus(run, a)))
}

pub fn stationary_ucb_select(run: &ShapingRun) -> SelectionDecision {
    if let Some(d) = first_unpulled(run) {
        return d;
    }
    let [q, phi] = stationary_ucb_scores(run).expect("both arms pulled");
    SelectionDecision::new(argmax_prefer_q(q, phi), SelectionReason::UcbArgmax)
}

pub fn eps_greedy_select<R: Rng + ?Sized>(run: &ShapingRun, params: &PolicyParams, rng: &mut R) -> SelectionDecision {
    if let Some(d) = first_unpulled(run) {
        return d;
    }
    if rng.random::<f64>() < params.epsilon_bandit {
        let arm = if rng.random_bool(0.5) { ArmId::Phi } else { ArmId::Q };
        return SelectionDecision::new(arm, SelectionReason::EpsExplore);
    }
    let q = mean(run.history(ArmId::Q).returns()).unwrap();
    let phi = mean(run.history(ArmId::Phi).returns()).unwrap();
    SelectionDecision::new(argmax_prefer_q(q, phi), SelectionReason::EpsExploit)
}

/// Linearly decaying expert weight of classic PIES for a 0-based episode.
pub fn classic_pies_weight(episode: u32, params: &PolicyParams) -> f64 {
    let frac = f64::from(episode) / f64::from(params.xi_decay_episodes);
    (params.xi0 * (1.0 - frac)).max(0.0)
}

/// A policy kind bound to its parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapingPolicy {
    pub kind: PolicyKind,
    pub params: PolicyParams,
}

impl ShapingPolicy {
    pub fn new(kind: PolicyKind, params: PolicyParams) -> Result<Self> {
        params.validate()?;
        Ok(Self { kind, params })
    }

    pub fn select<R: Rng + ?Sized>(&self, run: &ShapingRun, rng: &mut R) -> SelectionDecision {
        match self.kind {
            PolicyKind::Lpies => lpies_select(run, rng),
            PolicyKind::Rpies => rpies_select(run, rng),
            PolicyKind::Upies | PolicyKind::NonMonotoneUpies => upies_select(run),
            PolicyKind::EpsGreedy => eps_greedy_select(run, &self.params, rng),
            PolicyKind::StationaryUcb => stationary_ucb_select(run),
            PolicyKind::ClassicPies => SelectionDecision::new(ArmId::Q, SelectionReason::XiBlend),
            PolicyKind::NoShaping => SelectionDecision::new(ArmId::Q, SelectionReason::Fixed),
        }
    }

    /// Applies the kind's elimination rule after a pull has been recorded
    /// (and, for forecasting kinds, after the pulled arm's Ĵ was refreshed).
    pub fn update(&self, run: &mut ShapingRun) -> Option<EliminationEvent> {
        match self.kind {
            PolicyKind::Lpies => lpies_update(run, &self.params),
            PolicyKind::Rpies => rpies_update(run, &self.params),
            _ => None,
        }
    }
}
