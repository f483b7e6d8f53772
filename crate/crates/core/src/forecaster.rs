//! Learning-curve forecasting for the shaping bandit.
//!
//! A small feed-forward regressor is fitted to `(pull index, normalized
//! return)` pairs of one arm and then extrapolated over the remaining
//! episodes to estimate the per-round value of committing to that arm for
//! the rest of the run (the arm's Ĵ). When every weight is kept
//! non-negative and the hidden activations are rectifiers, the fitted curve
//! is non-decreasing in the pull index, which encodes the assumption that
//! an RL agent's expected return does not get worse with experience.
//!
//! The Hoeffding helpers at the bottom turn samples in `[0, 1]` into
//! one-sided confidence bounds.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bandit::{mean, ArmHistory};
use crate::error::{Error, Result};
use crate::rng::splitmix64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BatchMode {
    /// One gradient step per data point, data shuffled each epoch.
    #[default]
    PerSample,
    /// One gradient step per epoch on the mean loss.
    FullBatch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Optimizer {
    #[default]
    Sgd,
    Adam,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightConstraint {
    /// Weights are projected onto `[0, inf)` after every update.
    NonNegative,
    Unconstrained,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainingConfig {
    pub epochs: u32,
    pub learning_rate: f64,
    pub batch_mode: BatchMode,
    pub optimizer: Optimizer,
    /// Hidden layer widths; input and output are always scalar.
    pub hidden_layers: Vec<usize>,
    pub init_seed: u64,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        Self {
            epochs: 2,
            learning_rate: 0.01,
            batch_mode: BatchMode::PerSample,
            optimizer: Optimizer::Adam,
            hidden_layers: vec![8, 4],
            init_seed: 0,
        }
    }
}

impl TrainingConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::Config("forecaster epochs must be >= 1".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config("forecaster learning_rate must be > 0".into()));
        }
        if self.hidden_layers.contains(&0) {
            return Err(Error::Config("hidden layer widths must be >= 1".into()));
        }
        Ok(())
    }

    pub fn with_seed(&self, init_seed: u64) -> Self {
        Self { init_seed, ..self.clone() }
    }
}

/// `(pull index, reward)` pairs with pull indices `1..=n`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingDataset {
    rewards: Vec<f64>,
}

impl TrainingDataset {
    pub fn from_rewards(rewards: &[f64]) -> Result<Self> {
        if rewards.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if rewards.iter().any(|r| !r.is_finite()) {
            return Err(Error::invalid("training rewards must be finite"));
        }
        Ok(Self { rewards: rewards.to_vec() })
    }

    pub fn len(&self) -> usize {
        self.rewards.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rewards.is_empty()
    }

    pub fn points(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.rewards.iter().enumerate().map(|(i, &r)| (i as u32 + 1, r))
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Dense {
    n_in: usize,
    n_out: usize,
    /// Row-major `n_out x n_in`.
    weights: Vec<f64>,
    biases: Vec<f64>,
}

impl Dense {
    fn forward(&self, input: &[f64], out: &mut Vec<f64>) {
        out.clear();
        for o in 0..self.n_out {
            let row = &self.weights[o * self.n_in..(o + 1) * self.n_in];
            let mut z = self.biases[o];
            for (w, x) in row.iter().zip(input) {
                z += w * x;
            }
            out.push(z);
        }
    }

    fn n_params(&self) -> usize {
        self.weights.len() + self.biases.len()
    }
}

/// Feed-forward regressor from a scalar pull index to an expected return.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneModel {
    layers: Vec<Dense>,
    input_scale: f64,
}

fn relu(x: f64) -> f64 {
    if x > 0.0 {
        x
    } else {
        0.0
    }
}

impl MonotoneModel {
    fn init(sizes: &[usize], input_scale: f64, rng: &mut ChaCha8Rng) -> Self {
        let layers = sizes
            .windows(2)
            .enumerate()
            .map(|(depth, pair)| {
                let (n_in, n_out) = (pair[0], pair[1]);
                let limit = 1.0 / (n_in as f64).sqrt();
                let hidden = depth + 2 < sizes.len();
                // A zero output layer starts the network flat; hidden units
                // start active over the whole [0, 1] input range.
                let (weights, biases) = if hidden {
                    (
                        (0..n_in * n_out).map(|_| rng.random_range(0.0..limit)).collect(),
                        (0..n_out).map(|_| rng.random_range(0.0..0.1)).collect(),
                    )
                } else {
                    (vec![0.0; n_in * n_out], vec![0.0; n_out])
                };
                Dense { n_in, n_out, weights, biases }
            })
            .collect();
        Self { layers, input_scale }
    }

    pub fn layer_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![self.layers[0].n_in];
        sizes.extend(self.layers.iter().map(|l| l.n_out));
        sizes
    }

    pub fn input_scale(&self) -> f64 {
        self.input_scale
    }

    pub fn all_weights_non_negative(&self) -> bool {
        self.layers.iter().flat_map(|l| &l.weights).all(|&w| w >= 0.0)
    }

    /// Network output for an already scaled input.
    pub fn predict_scaled(&self, x: f64) -> f64 {
        let mut cur = vec![x];
        let mut next = Vec::with_capacity(8);
        let last = self.layers.len() - 1;
        for (i, layer) in self.layers.iter().enumerate() {
            layer.forward(&cur, &mut next);
            if i != last {
                next.iter_mut().for_each(|z| *z = relu(*z));
            }
            std::mem::swap(&mut cur, &mut next);
        }
        cur[0]
    }

    /// Predicted return on the `pull_index`-th pull.
    pub fn predict(&self, pull_index: f64) -> f64 {
        self.predict_scaled(pull_index * self.input_scale)
    }

    pub fn mse(&self, data: &TrainingDataset) -> f64 {
        let sse: f64 = data.points().map(|(j, r)| (self.predict(f64::from(j)) - r).powi(2)).sum();
        sse / data.len() as f64
    }

    /// Forward pass keeping post-activation values of every layer
    /// (index 0 is the input) for backpropagation.
    fn forward_trace(&self, x: f64, trace: &mut Vec<Vec<f64>>) {
        trace.resize_with(self.layers.len() + 1, Vec::new);
        trace[0].clear();
        trace[0].push(x);
        let last = self.layers.len() - 1;
        for (i, layer) in self.layers.iter().enumerate() {
            let (head, tail) = trace.split_at_mut(i + 1);
            layer.forward(&head[i], &mut tail[0]);
            if i != last {
                tail[0].iter_mut().for_each(|z| *z = relu(*z));
            }
        }
    }

    /// Accumulates `scale * d(0.5 * err^2)/d(param)` into `grad`, laid out
    /// layer by layer as weights then biases.
    fn accumulate_grad(&self, x: f64, target: f64, scale: f64, trace: &mut Vec<Vec<f64>>, grad: &mut [f64]) -> f64 {
        self.forward_trace(x, trace);
        let out = trace[self.layers.len()][0];
        let err = out - target;
        let mut delta = vec![err * scale];
        let mut offset = grad.len();
        for (i, layer) in self.layers.iter().enumerate().rev() {
            offset -= layer.n_params();
            let input = &trace[i];
            let (gw, gb) = grad[offset..offset + layer.n_params()].split_at_mut(layer.weights.len());
            for o in 0..layer.n_out {
                gb[o] += delta[o];
                for k in 0..layer.n_in {
                    gw[o * layer.n_in + k] += delta[o] * input[k];
                }
            }
            if i > 0 {
                let mut prev = vec![0.0; layer.n_in];
                for (k, p) in prev.iter_mut().enumerate() {
                    if input[k] > 0.0 {
                        *p = (0..layer.n_out).map(|o| layer.weights[o * layer.n_in + k] * delta[o]).sum();
                    }
                }
                delta = prev;
            }
        }
        err * err
    }

    fn params_mut(&mut self) -> impl Iterator<Item = (&mut f64, bool)> {
        self.layers.iter_mut().flat_map(|l| {
            l.weights.iter_mut().map(|w| (w, true)).chain(l.biases.iter_mut().map(|b| (b, false)))
        })
    }

    fn n_params(&self) -> usize {
        self.layers.iter().map(Dense::n_params).sum()
    }

    /// Text dump: a line of layer sizes, a line with the input scale, then
    /// for each layer one line of row-major weights and one line of biases.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let sizes: Vec<String> = self.layer_sizes().iter().map(usize::to_string).collect();
        writeln!(s, "{}", sizes.join(" ")).unwrap();
        writeln!(s, "{}", self.input_scale).unwrap();
        for layer in &self.layers {
            let ws: Vec<String> = layer.weights.iter().map(f64::to_string).collect();
            let bs: Vec<String> = layer.biases.iter().map(f64::to_string).collect();
            writeln!(s, "{}", ws.join(" ")).unwrap();
            writeln!(s, "{}", bs.join(" ")).unwrap();
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let bad = |what: &str| Error::invalid(format!("malformed model dump: {what}"));
        let mut lines = text.lines();
        let sizes = lines
            .next()
            .ok_or_else(|| bad("missing sizes"))?
            .split_whitespace()
            .map(|t| t.parse::<usize>().map_err(|_| bad("sizes")))
            .collect::<Result<Vec<_>>>()?;
        if sizes.len() < 2 || sizes[0] != 1 || sizes[sizes.len() - 1] != 1 {
            return Err(bad("sizes must start and end with 1"));
        }
        let input_scale: f64 =
            lines.next().ok_or_else(|| bad("missing input scale"))?.trim().parse().map_err(|_| bad("input scale"))?;
        let mut parse_row = |expect: usize| -> Result<Vec<f64>> {
            let row = lines
                .next()
                .ok_or_else(|| bad("missing row"))?
                .split_whitespace()
                .map(|t| t.parse::<f64>().map_err(|_| bad("value")))
                .collect::<Result<Vec<_>>>()?;
            if row.len() != expect {
                return Err(bad("row length"));
            }
            Ok(row)
        };
        let mut layers = Vec::new();
        for pair in sizes.windows(2) {
            let (n_in, n_out) = (pair[0], pair[1]);
            let weights = parse_row(n_in * n_out)?;
            let biases = parse_row(n_out)?;
            layers.push(Dense { n_in, n_out, weights, biases });
        }
        Ok(Self { layers, input_scale })
    }
}

struct AdamState {
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

const ADAM_BETA1: f64 = 0.9;
const ADAM_BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;

fn apply_step(
    model: &mut MonotoneModel,
    grad: &[f64],
    cfg: &TrainingConfig,
    adam: &mut AdamState,
    constraint: WeightConstraint,
) {
    adam.t += 1;
    let lr = cfg.learning_rate;
    let bc1 = 1.0 - ADAM_BETA1.powi(adam.t);
    let bc2 = 1.0 - ADAM_BETA2.powi(adam.t);
    for (i, (p, is_weight)) in model.params_mut().enumerate() {
        let g = grad[i];
        match cfg.optimizer {
            Optimizer::Sgd => *p -= lr * g,
            Optimizer::Adam => {
                adam.m[i] = ADAM_BETA1 * adam.m[i] + (1.0 - ADAM_BETA1) * g;
                adam.v[i] = ADAM_BETA2 * adam.v[i] + (1.0 - ADAM_BETA2) * g * g;
                let m_hat = adam.m[i] / bc1;
                let v_hat = adam.v[i] / bc2;
                *p -= lr * m_hat / (v_hat.sqrt() + ADAM_EPS);
            }
        }
        if is_weight && constraint == WeightConstraint::NonNegative && !(*p >= 0.0) {
            *p = 0.0;
        }
    }
}

fn train_once(
    data: &TrainingDataset,
    cfg: &TrainingConfig,
    horizon: u32,
    constraint: WeightConstraint,
    seed: u64,
) -> MonotoneModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sizes = vec![1];
    sizes.extend(&cfg.hidden_layers);
    sizes.push(1);
    let input_scale = 1.0 / f64::from(horizon);
    let mut model = MonotoneModel::init(&sizes, input_scale, &mut rng);

    let xs: Vec<f64> = data.points().map(|(j, _)| f64::from(j) * input_scale).collect();
    let ys: Vec<f64> = data.rewards.clone();

    // Start the output at the mean target so a fresh network is anchored on
    // the historical average before any gradient step.
    let mean_out = xs.iter().map(|&x| model.predict_scaled(x)).sum::<f64>() / xs.len() as f64;
    let mean_target = mean(&ys).unwrap_or(0.0);
    if let Some(out) = model.layers.last_mut() {
        out.biases[0] += mean_target - mean_out;
    }

    let n_params = model.n_params();
    let mut adam = AdamState { m: vec![0.0; n_params], v: vec![0.0; n_params], t: 0 };
    let mut grad = vec![0.0; n_params];
    let mut trace = Vec::new();
    let mut order: Vec<usize> = (0..xs.len()).collect();

    for _ in 0..cfg.epochs {
        match cfg.batch_mode {
            BatchMode::PerSample => {
                order.shuffle(&mut rng);
                for &i in &order {
                    grad.iter_mut().for_each(|g| *g = 0.0);
                    model.accumulate_grad(xs[i], ys[i], 1.0, &mut trace, &mut grad);
                    apply_step(&mut model, &grad, cfg, &mut adam, constraint);
                }
            }
            BatchMode::FullBatch => {
                grad.iter_mut().for_each(|g| *g = 0.0);
                let scale = 1.0 / xs.len() as f64;
                for i in 0..xs.len() {
                    model.accumulate_grad(xs[i], ys[i], scale, &mut trace, &mut grad);
                }
                apply_step(&mut model, &grad, cfg, &mut adam, constraint);
            }
        }
    }
    model
}

/// Trains a fresh network on `data`, retrying once with a derived seed if
/// the loss goes non-finite.
pub fn fit(
    data: &TrainingDataset,
    cfg: &TrainingConfig,
    horizon: u32,
    constraint: WeightConstraint,
) -> Result<MonotoneModel> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if horizon == 0 || (data.len() as u64) > u64::from(horizon) {
        return Err(Error::invalid("horizon must cover every pull index in the dataset"));
    }
    cfg.validate()?;
    let mut seed = cfg.init_seed;
    for _ in 0..2 {
        let model = train_once(data, cfg, horizon, constraint, seed);
        if model.mse(data).is_finite() {
            return Ok(model);
        }
        seed = splitmix64(seed);
    }
    Err(Error::TrainingDiverged)
}

pub fn fit_monotone(data: &TrainingDataset, cfg: &TrainingConfig, horizon: u32) -> Result<MonotoneModel> {
    fit(data, cfg, horizon, WeightConstraint::NonNegative)
}

pub fn fit_unconstrained(data: &TrainingDataset, cfg: &TrainingConfig, horizon: u32) -> Result<MonotoneModel> {
    fit(data, cfg, horizon, WeightConstraint::Unconstrained)
}

/// Mean predicted return over pulls `n, n+1, ..., n+remaining-1`, clamped
/// into `[0, 1]`.
pub fn estimate_future_mean<F: Fn(f64) -> f64>(model: F, n: u32, remaining: u32) -> Result<f64> {
    if remaining == 0 {
        return Err(Error::invalid("remaining must be >= 1"));
    }
    let total: f64 = (0..remaining).map(|k| model(f64::from(n) + f64::from(k))).sum();
    Ok((total / f64::from(remaining)).clamp(0.0, 1.0))
}

/// Fits a fresh network to the arm's returns, appends the resulting Ĵ
/// estimate for the remaining `horizon - t` episodes and returns it.
pub fn refresh_jhat(
    history: &mut ArmHistory,
    cfg: &TrainingConfig,
    horizon: u32,
    t: u32,
    constraint: WeightConstraint,
) -> Result<f64> {
    if t >= horizon {
        return Err(Error::invalid("no episodes remain to forecast"));
    }
    let data = TrainingDataset::from_rewards(history.returns())?;
    let model = fit(&data, cfg, horizon, constraint)?;
    let jhat = estimate_future_mean(|j| model.predict(j), history.pulls() + 1, horizon - t)?;
    history.push_jhat(jhat);
    Ok(jhat)
}

pub fn hoeffding_radius(n: usize, delta: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::EmptyHistory);
    }
    // The radius is real for any delta in (0, 2); policies restrict it to (0, 1).
    if !(delta > 0.0 && delta < 2.0) {
        return Err(Error::invalid(format!("delta must lie in (0, 2), got {delta}")));
    }
    Ok(((2.0 / delta).ln() / (2.0 * n as f64)).sqrt())
}

pub fn hoeffding_upper(samples: &[f64], delta: f64) -> Result<f64> {
    let r = hoeffding_radius(samples.len(), delta)?;
    Ok(mean(samples).unwrap() + r)
}

pub fn hoeffding_lower(samples: &[f64], delta: f64) -> Result<f64> {
    let r = hoeffding_radius(samples.len(), delta)?;
    Ok(mean(samples).unwrap() - r)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfidenceBounds {
    pub upper: f64,
    pub lower: f64,
    pub delta: f64,
    pub n: usize,
}
