//! Masked DQN: epsilon-greedy action selection restricted to legal actions,
//! Huber TD updates that bootstrap only over legal next actions, and a
//! periodically synced target network.

use super::nn::{Adam, Arch, NetInput, QNetwork, Scalar};
use super::replay::{ReplayBuffer, Transition};
use super::AgentError;
use crate::environment::Observation;
use crate::geometry::Action;
use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DqnConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub replay_capacity: usize,
    pub epsilon_start: f64,
    pub epsilon_end: f64,
    /// Environment steps over which epsilon decays linearly.
    pub epsilon_decay_steps: u64,
    /// Gradient updates between target-network copies.
    pub target_sync_every: u64,
    pub gamma: f64,
    /// Environment steps collected before the first update.
    pub learning_starts: u64,
    /// Environment steps between gradient updates.
    pub train_every: u64,
    pub conv1_filters: usize,
    pub conv2_filters: usize,
    pub conv_stride: usize,
    pub hidden: usize,
}

impl Default for DqnConfig {
    fn default() -> Self {
        DqnConfig {
            learning_rate: 1e-3,
            batch_size: 32,
            replay_capacity: 10_000,
            epsilon_start: 1.0,
            epsilon_end: 0.05,
            epsilon_decay_steps: 5_000,
            target_sync_every: 500,
            gamma: 1.0,
            learning_starts: 200,
            train_every: 1,
            conv1_filters: 16,
            conv2_filters: 32,
            conv_stride: 2,
            hidden: 128,
        }
    }
}

impl DqnConfig {
    pub fn arch(&self, cols: usize, rows: usize, target_conditioned: bool) -> Arch {
        Arch {
            in_channels: 2,
            height: rows,
            width: cols,
            conv1_filters: self.conv1_filters,
            conv1_stride: self.conv_stride,
            conv2_filters: self.conv2_filters,
            conv2_stride: self.conv_stride,
            hidden: self.hidden,
            n_heading: 8,
            n_target: if target_conditioned { 3 } else { 0 },
            n_actions: Action::COUNT,
        }
    }
}

/// Target ratios are centered on the reference and stretched so a 10%
/// change moves the input by one unit.
pub const TARGET_FEATURE_SCALE: f64 = 10.0;

/// Sparse network input: channel 0 is occupancy, channel 1 the head marker.
pub fn encode<T: Scalar>(obs: &Observation) -> NetInput<T> {
    let occ = &obs.occupancy;
    let mut active = Vec::new();
    for (i, (&o, &h)) in occ.data.iter().zip(&obs.head.data).enumerate() {
        if o {
            active.push((2 * i) as u32);
        }
        if h {
            active.push((2 * i + 1) as u32);
        }
    }
    let mut extra: Vec<T> = obs
        .heading
        .iter()
        .map(|&b| if b { T::one() } else { T::zero() })
        .collect();
    if let Some(f) = obs.target_features {
        extra.extend(f.iter().map(|&v| T::from_f64((v - 1.0) * TARGET_FEATURE_SCALE).unwrap()));
    }
    NetInput { active, extra }
}

/// Highest value among legal entries, ties broken by lowest index.
pub fn masked_argmax<T: Scalar>(q: &[T], mask: &[bool; Action::COUNT]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for i in 0..Action::COUNT {
        if mask[i] && best.is_none_or(|b| q[i] > q[b]) {
            best = Some(i);
        }
    }
    best
}

fn action(i: usize) -> Action {
    Action::new(i as u8).expect("index below action count")
}

/// Epsilon-greedy choice among legal actions. The random draw deciding
/// between exploration and exploitation is always consumed.
pub fn select_action<T: Scalar, R: Rng + ?Sized>(
    q: &QNetwork<T>,
    obs: &Observation,
    mask: &[bool; Action::COUNT],
    epsilon: f64,
    rng: &mut R,
) -> Result<Action, AgentError> {
    select_action_encoded(q, &encode(obs), mask, epsilon, rng)
}

pub fn select_action_encoded<T: Scalar, R: Rng + ?Sized>(
    q: &QNetwork<T>,
    input: &NetInput<T>,
    mask: &[bool; Action::COUNT],
    epsilon: f64,
    rng: &mut R,
) -> Result<Action, AgentError> {
    let legal: Vec<usize> = (0..Action::COUNT).filter(|&i| mask[i]).collect();
    if legal.is_empty() {
        return Err(AgentError::NoLegalAction);
    }
    if rng.gen::<f64>() < epsilon {
        return Ok(action(legal[rng.gen_range(0..legal.len())]));
    }
    let values = q.forward(input);
    Ok(action(masked_argmax(&values, mask).expect("mask has a legal entry")))
}

/// Bootstrapped targets `r` (terminal) or `r + gamma * max_{legal a'} Q_target(s', a')`.
pub fn td_targets<T: Scalar>(target: &QNetwork<T>, batch: &[&Transition<T>], gamma: T) -> Vec<T> {
    let open: Vec<&Transition<T>> = batch.iter().copied().filter(|t| !t.done).collect();
    let inputs: Vec<&NetInput<T>> = open.iter().map(|t| &t.next_obs).collect();
    let mut next_q = target.forward_batch(&inputs).into_iter();
    batch
        .iter()
        .map(|t| {
            if t.done {
                return t.reward;
            }
            let q = next_q.next().expect("one activation per open transition").q;
            match masked_argmax(&q, &t.next_mask) {
                Some(a) => t.reward + gamma * q[a],
                None => t.reward,
            }
        })
        .collect()
}

fn huber<T: Scalar>(d: T) -> (T, T) {
    let one = T::one();
    let half = T::from_f64(0.5).unwrap();
    if d.abs() <= one {
        (half * d * d, d)
    } else {
        (d.abs() - half, d.signum())
    }
}

/// Mean Huber loss over the batch and its gradient with respect to `net`'s
/// parameters, for fixed targets `y`.
pub fn td_loss_and_grad<T: Scalar>(net: &QNetwork<T>, batch: &[&Transition<T>], y: &[T]) -> (T, Vec<T>) {
    let mut grad = vec![T::zero(); net.num_params()];
    let scale = T::one() / T::from_usize(batch.len()).unwrap();
    let inputs: Vec<&NetInput<T>> = batch.iter().map(|t| &t.obs).collect();
    let acts = net.forward_batch(&inputs);
    let mut loss = T::zero();
    let mut dqs = Vec::with_capacity(batch.len());
    for ((t, &yt), act) in batch.iter().zip(y).zip(&acts) {
        let (l, dl) = huber(act.q[t.action as usize] - yt);
        loss += l * scale;
        let mut dq = vec![T::zero(); act.q.len()];
        dq[t.action as usize] = dl * scale;
        dqs.push(dq);
    }
    let dq_refs: Vec<&[T]> = dqs.iter().map(|d| d.as_slice()).collect();
    net.backward_batch(&inputs, &acts, &dq_refs, &mut grad);
    (loss, grad)
}

pub fn td_loss<T: Scalar>(net: &QNetwork<T>, batch: &[&Transition<T>], y: &[T]) -> T {
    let scale = T::one() / T::from_usize(batch.len()).unwrap();
    batch
        .iter()
        .zip(y)
        .map(|(t, &yt)| huber(net.forward(&t.obs)[t.action as usize] - yt).0 * scale)
        .fold(T::zero(), |a, b| a + b)
}

/// One Adam step on the Huber TD loss; returns the pre-update loss.
pub fn td_update(
    net: &mut QNetwork<f32>,
    target: &QNetwork<f32>,
    opt: &mut Adam,
    batch: &[&Transition<f32>],
    gamma: f32,
) -> Result<f64, AgentError> {
    if batch.is_empty() {
        return Err(AgentError::EmptyBatch);
    }
    let y = td_targets(target, batch, gamma);
    let (loss, grad) = td_loss_and_grad(net, batch, &y);
    opt.step(&mut net.params, &grad);
    Ok(loss as f64)
}

pub struct DqnAgent {
    config: DqnConfig,
    online: QNetwork<f32>,
    target: QNetwork<f32>,
    opt: Adam,
    replay: ReplayBuffer<f32>,
    env_steps: u64,
    updates: u64,
    schedule_origin: u64,
    epsilon_start: f64,
}

impl DqnAgent {
    pub fn new<R: Rng + ?Sized>(config: DqnConfig, arch: Arch, rng: &mut R) -> Self {
        let online = QNetwork::new(arch, rng);
        Self::from_network(config, online)
    }

    pub fn from_network(config: DqnConfig, online: QNetwork<f32>) -> Self {
        DqnAgent {
            opt: Adam::new(online.num_params(), config.learning_rate),
            replay: ReplayBuffer::new(config.replay_capacity),
            target: online.clone(),
            online,
            env_steps: 0,
            updates: 0,
            schedule_origin: 0,
            epsilon_start: config.epsilon_start,
            config,
        }
    }

    /// Fresh optimizer, replay and schedule around an existing network.
    pub fn fine_tune(&self, config: DqnConfig) -> Self {
        Self::from_network(config, self.online.clone())
    }

    pub fn config(&self) -> &DqnConfig {
        &self.config
    }

    pub fn network(&self) -> &QNetwork<f32> {
        &self.online
    }

    pub fn target_network(&self) -> &QNetwork<f32> {
        &self.target
    }

    pub fn env_steps(&self) -> u64 {
        self.env_steps
    }

    pub fn updates(&self) -> u64 {
        self.updates
    }

    pub fn replay(&self) -> &ReplayBuffer<f32> {
        &self.replay
    }

    pub fn epsilon(&self) -> f64 {
        let c = &self.config;
        let t = self.env_steps.saturating_sub(self.schedule_origin);
        if c.epsilon_decay_steps == 0 || t >= c.epsilon_decay_steps {
            return c.epsilon_end;
        }
        let frac = t as f64 / c.epsilon_decay_steps as f64;
        self.epsilon_start + frac * (c.epsilon_end - self.epsilon_start)
    }

    pub fn act<R: Rng + ?Sized>(
        &self,
        input: &NetInput<f32>,
        mask: &[bool; Action::COUNT],
        rng: &mut R,
    ) -> Result<Action, AgentError> {
        select_action_encoded(&self.online, input, mask, self.epsilon(), rng)
    }

    pub fn greedy(&self, input: &NetInput<f32>, mask: &[bool; Action::COUNT]) -> Option<Action> {
        masked_argmax(&self.online.forward(input), mask).map(action)
    }

    /// Stores a transition and trains when due. Returns the loss of any update.
    pub fn observe<R: Rng + ?Sized>(&mut self, t: Transition<f32>, rng: &mut R) -> Option<f64> {
        self.replay.push(t);
        self.env_steps += 1;
        let c = &self.config;
        if self.env_steps < c.learning_starts
            || self.env_steps % c.train_every.max(1) != 0
            || self.replay.len() < c.batch_size
        {
            return None;
        }
        let batch = self.replay.sample(c.batch_size, rng);
        let loss = td_update(&mut self.online, &self.target, &mut self.opt, &batch, c.gamma as f32)
            .expect("batch is nonempty");
        self.updates += 1;
        if self.updates % self.config.target_sync_every.max(1) == 0 {
            self.target = self.online.clone();
        }
        Some(loss)
    }
}
