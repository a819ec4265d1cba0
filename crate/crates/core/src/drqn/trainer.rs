use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::TrainConfig;
use super::log::{EpisodeLog, RunLog};
use super::memory::{sample_batch, EpisodeRecord, ReplayMemory, Transition};
use super::optim::{soft_update, Adam};
use crate::autograd::{Tape, Tensor, Var};
use crate::cartpole::{CartPole, EnvConfig};
use crate::error::{Error, Result};
use crate::recurrent::{count_parameters, BoundModel, DressedModel, HiddenState, ModelKind, N_ACTIONS};

/// Index of the largest Q-value; ties go to the lowest index.
pub fn argmax(q: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in q.iter().enumerate().skip(1) {
        if v > q[best] {
            best = i;
        }
    }
    best
}

/// ε-greedy action. The model consumes `obs` either way so the recurrent
/// state keeps advancing on exploratory steps.
pub fn select_action<R: Rng + ?Sized>(
    model: &DressedModel,
    obs: &[f64],
    hidden: &HiddenState,
    epsilon: f64,
    rng: &mut R,
) -> Result<(usize, HiddenState)> {
    let (q, next) = model.step(obs, hidden)?;
    let action = if rng.gen::<f64>() < epsilon {
        rng.gen_range(0..N_ACTIONS)
    } else {
        argmax(&q)
    };
    Ok((action, next))
}

fn stack_step(batch: &[&[Transition]], t: usize, dim: usize, next: bool) -> Tensor {
    let mut values = Vec::with_capacity(batch.len() * dim);
    for window in batch {
        match window.get(t) {
            Some(tr) => values.extend_from_slice(if next { &tr.next_state } else { &tr.state }),
            None => values.extend(std::iter::repeat_n(0.0, dim)),
        }
    }
    Tensor::new(batch.len(), dim, values).expect("observation widths checked")
}

/// Mean squared Bellman error over every real step of every window.
///
/// Both networks start each window from a zero hidden state. Targets
/// `r + γ·max_a Q_target(s', a)` (just `r` on terminal steps) come from
/// `target` and are constants on the tape; windows shorter than the longest
/// one are zero-padded and masked out.
pub fn compute_loss(
    tape: &mut Tape,
    policy: &BoundModel,
    target: &DressedModel,
    batch: &[&[Transition]],
    gamma: f64,
) -> Result<Var> {
    let steps = batch.iter().map(|w| w.len()).max().unwrap_or(0);
    let count: usize = batch.iter().map(|w| w.len()).sum();
    if count == 0 {
        return Err(Error::Config("loss over an empty batch".into()));
    }
    let dim = target.obs_dim();
    if batch
        .iter()
        .flat_map(|w| w.iter())
        .any(|t| t.state.len() != dim || t.next_state.len() != dim)
    {
        return Err(Error::Shape {
            op: "compute_loss",
            detail: format!("transition observations must have width {dim}"),
        });
    }

    let next_max: Vec<Vec<f64>> = if gamma == 0.0 {
        vec![vec![0.0; batch.len()]; steps]
    } else {
        let mut ttape = Tape::new();
        let bound = target.bind(&mut ttape, false)?;
        let obs = (0..steps)
            .map(|t| ttape.constant(stack_step(batch, t, dim, true)))
            .collect::<Result<Vec<_>>>()?;
        let qs = bound.forward_sequence(&mut ttape, &obs)?;
        qs.iter()
            .map(|&q| {
                let v = ttape.value(q);
                (0..v.rows())
                    .map(|r| v.row_slice(r).iter().copied().fold(f64::NEG_INFINITY, f64::max))
                    .collect()
            })
            .collect()
    };

    let obs = (0..steps)
        .map(|t| tape.constant(stack_step(batch, t, dim, false)))
        .collect::<Result<Vec<_>>>()?;
    let qs = policy.forward_sequence(tape, &obs)?;

    let mut total: Option<Var> = None;
    for (t, &q) in qs.iter().enumerate() {
        let mut actions = Vec::with_capacity(batch.len());
        let mut targets = Vec::with_capacity(batch.len());
        let mut mask = Vec::with_capacity(batch.len());
        for (r, window) in batch.iter().enumerate() {
            match window.get(t) {
                Some(tr) => {
                    actions.push(tr.action);
                    let bootstrap = if tr.done { 0.0 } else { gamma * next_max[t][r] };
                    targets.push(tr.reward + bootstrap);
                    mask.push(1.0);
                }
                None => {
                    actions.push(0);
                    targets.push(0.0);
                    mask.push(0.0);
                }
            }
        }
        let picked = tape.gather(q, &actions)?;
        let y = tape.constant(Tensor::new(batch.len(), 1, targets)?)?;
        let diff = tape.sub(picked, y)?;
        let sq = tape.square(diff)?;
        let mask = tape.constant(Tensor::new(batch.len(), 1, mask)?)?;
        let masked = tape.mul(sq, mask)?;
        let s = tape.sum(masked)?;
        total = Some(match total {
            Some(acc) => tape.add(acc, s)?,
            None => s,
        });
    }
    let total = total.expect("at least one step");
    tape.scale(total, 1.0 / count as f64)
}

/// Training state for one run; [`Trainer::run_episode`] is one outer-loop
/// iteration.
pub struct Trainer {
    config: TrainConfig,
    policy: DressedModel,
    target: DressedModel,
    optimizer: Adam,
    memory: ReplayMemory,
    env: CartPole,
    rng: ChaCha8Rng,
    epsilon: f64,
    env_steps: u64,
    episodes_done: usize,
}

impl Trainer {
    pub fn new(config: TrainConfig, kind: ModelKind, env_config: EnvConfig) -> Result<Self> {
        config.validate()?;
        let env = CartPole::new(env_config)?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let policy = DressedModel::new(kind, env.config().obs_dim(), &mut rng)?;
        Self::with_model(config, policy, env, rng)
    }

    /// Starts from an explicit policy network; the target starts as a copy.
    pub fn from_model(config: TrainConfig, policy: DressedModel, env_config: EnvConfig) -> Result<Self> {
        config.validate()?;
        let env = CartPole::new(env_config)?;
        if policy.obs_dim() != env.config().obs_dim() {
            return Err(Error::Config(format!(
                "model expects {}-d observations, environment gives {}",
                policy.obs_dim(),
                env.config().obs_dim()
            )));
        }
        let rng = ChaCha8Rng::seed_from_u64(config.seed);
        Self::with_model(config, policy, env, rng)
    }

    fn with_model(config: TrainConfig, policy: DressedModel, env: CartPole, rng: ChaCha8Rng) -> Result<Self> {
        let optimizer = Adam::new(count_parameters(&policy), config.learning_rate);
        Ok(Self {
            epsilon: config.epsilon_init,
            memory: ReplayMemory::new(config.memory_capacity),
            target: policy.clone(),
            policy,
            optimizer,
            env,
            rng,
            env_steps: 0,
            episodes_done: 0,
            config,
        })
    }

    pub fn policy(&self) -> &DressedModel {
        &self.policy
    }

    pub fn target(&self) -> &DressedModel {
        &self.target
    }

    pub fn memory(&self) -> &ReplayMemory {
        &self.memory
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Number of gradient updates applied so far.
    pub fn updates(&self) -> u64 {
        self.optimizer.steps()
    }

    fn optimize(&mut self) -> Result<f64> {
        let batch = sample_batch(
            &self.memory,
            self.config.batch_size,
            self.config.lookup_steps,
            &mut self.rng,
        )?;
        let mut tape = Tape::new()
            .with_checked(self.config.checked)
            .with_grad_method(self.config.grad_method);
        let bound = self.policy.bind(&mut tape, true)?;
        let loss = compute_loss(&mut tape, &bound, &self.target, &batch, self.config.gamma)?;
        let value = tape.value(loss).values()[0];
        if !value.is_finite() {
            return Err(Error::NanLoss {
                episode: self.episodes_done + 1,
                step: self.env.steps(),
            });
        }
        tape.backward(loss)?;
        let mut grads = bound.grads(&tape);
        if let Some(clip) = self.config.grad_clip {
            let norm = grads.iter().map(|g| g * g).sum::<f64>().sqrt();
            if norm > clip {
                grads.iter_mut().for_each(|g| *g *= clip / norm);
            }
        }
        let mut flat = self.policy.flat_params();
        self.optimizer.step(&mut flat, &grads)?;
        self.policy.set_flat_params(&flat)?;
        Ok(value)
    }

    pub fn run_episode(&mut self) -> Result<EpisodeLog> {
        let mut obs = self.env.reset(&mut self.rng);
        let mut hidden = self.policy.zero_hidden();
        let mut record = EpisodeRecord::new();
        let mut losses = Vec::new();
        loop {
            let (action, next_hidden) = select_action(&self.policy, &obs, &hidden, self.epsilon, &mut self.rng)?;
            hidden = next_hidden;
            let (next_obs, step) = self.env.step(action)?;
            record.push(Transition {
                state: obs,
                action,
                reward: step.reward,
                next_state: next_obs.clone(),
                done: step.done,
            })?;
            if !self.memory.is_empty() {
                losses.push(self.optimize()?);
            }
            self.env_steps += 1;
            if self.env_steps.is_multiple_of(self.config.target_update_period as u64) {
                soft_update(&mut self.target, &self.policy, self.config.tau)?;
            }
            obs = next_obs;
            if step.done {
                break;
            }
        }
        self.episodes_done += 1;
        let log = EpisodeLog {
            episode: self.episodes_done,
            score: record.total_reward(),
            mean_loss: (!losses.is_empty()).then(|| losses.iter().sum::<f64>() / losses.len() as f64),
            epsilon: self.epsilon,
        };
        self.memory.push(record);
        self.epsilon = self.config.decay_epsilon(self.epsilon);
        Ok(log)
    }
}

pub fn train(config: &TrainConfig, kind: ModelKind, env: &EnvConfig) -> Result<RunLog> {
    train_with(config, kind, env, |_| {})
}

/// Like [`train`], calling `on_episode` after every episode.
pub fn train_with<F: FnMut(&EpisodeLog)>(
    config: &TrainConfig,
    kind: ModelKind,
    env: &EnvConfig,
    mut on_episode: F,
) -> Result<RunLog> {
    let mut trainer = Trainer::new(config.clone(), kind, env.clone())?;
    let mut log = RunLog::default();
    for _ in 0..config.episodes {
        let e = trainer.run_episode()?;
        on_episode(&e);
        log.episodes.push(e);
    }
    Ok(log)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::recurrent::{Core, Linear, LstmCell};
    use approx::assert_abs_diff_eq;

    #[test]
    fn argmax_ties_low() {
        assert_eq!(argmax(&[0.3, 0.3]), 0);
        assert_eq!(argmax(&[0.1, 0.3]), 1);
        assert_eq!(argmax(&[0.5, -0.3]), 0);
    }

    /// Model whose Q-values are exactly the post-layer bias.
    fn constant_q(obs_dim: usize, q: [f64; 2]) -> DressedModel {
        let mut post = Linear::zeros(2, 2);
        post.bias.values_mut().copy_from_slice(&q);
        DressedModel::from_parts(Linear::zeros(obs_dim, 2), Core::Lstm(LstmCell::zeros(2, 2)), post).unwrap()
    }

    fn tr(reward: f64, done: bool) -> Transition {
        Transition {
            state: vec![0.1, 0.2],
            action: 1,
            reward,
            next_state: vec![0.3, 0.4],
            done,
        }
    }

    #[test]
    fn hand_bellman_loss() {
        let policy = constant_q(2, [0.0, 0.0]);
        let target = constant_q(2, [2.0, 1.0]);
        let window = [tr(1.0, false)];
        let mut tape = Tape::checked();
        let bound = policy.bind(&mut tape, true).unwrap();
        let loss = compute_loss(&mut tape, &bound, &target, &[&window], 0.9).unwrap();
        assert_abs_diff_eq!(tape.value(loss).values()[0], 7.84, epsilon = 1e-12);
    }

    #[test]
    fn terminal_targets_are_rewards() {
        let policy = constant_q(2, [0.0, 1.5]);
        let target = constant_q(2, [9.0, 9.0]);
        let w1 = [tr(1.5, true)];
        let w2 = [tr(1.5, true)];
        let mut tape = Tape::checked();
        let bound = policy.bind(&mut tape, true).unwrap();
        let loss = compute_loss(&mut tape, &bound, &target, &[&w1, &w2], 0.99).unwrap();
        assert_eq!(tape.value(loss).values()[0], 0.0);
    }

    #[test]
    fn zero_discount_ignores_target() {
        let policy = constant_q(2, [0.0, 0.5]);
        let w = [tr(1.0, false), tr(1.0, false)];
        let losses: Vec<f64> = [[0.0, 0.0], [100.0, -3.0]]
            .iter()
            .map(|q| {
                let mut tape = Tape::checked();
                let bound = policy.bind(&mut tape, true).unwrap();
                let l = compute_loss(&mut tape, &bound, &constant_q(2, *q), &[&w], 0.0).unwrap();
                tape.value(l).values()[0]
            })
            .collect();
        assert_eq!(losses[0], losses[1]);
        assert_abs_diff_eq!(losses[0], 0.25, epsilon = 1e-15);
    }

    #[test]
    fn padding_is_masked() {
        let policy = constant_q(2, [0.0, 0.0]);
        let target = constant_q(2, [0.0, 0.0]);
        let long = [tr(1.0, false), tr(1.0, false), tr(1.0, true)];
        let short = [tr(3.0, true)];
        let mut tape = Tape::checked();
        let bound = policy.bind(&mut tape, true).unwrap();
        let loss = compute_loss(&mut tape, &bound, &target, &[&long, &short], 0.5).unwrap();
        // (1 + 1 + 1 + 9) / 4
        assert_abs_diff_eq!(tape.value(loss).values()[0], 3.0, epsilon = 1e-15);
    }

    #[test]
    fn epsilon_extremes() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let model = constant_q(2, [0.1, 0.9]);
        let h = model.zero_hidden();
        for _ in 0..100 {
            assert_eq!(select_action(&model, &[0.0, 0.0], &h, 0.0, &mut rng).unwrap().0, 1);
        }
        let n = 10_000;
        let ones: usize = (0..n)
            .map(|_| select_action(&model, &[0.0, 0.0], &h, 1.0, &mut rng).unwrap().0)
            .sum();
        let freq = ones as f64 / n as f64;
        assert!((freq - 0.5).abs() <= 0.02, "{freq}");
        let tie = constant_q(2, [0.3, 0.3]);
        assert_eq!(select_action(&tie, &[0.0, 0.0], &h, 0.0, &mut rng).unwrap().0, 0);
    }

    #[test]
    fn hidden_advances_when_exploring() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let model = DressedModel::new(ModelKind::Lstm { hidden: 8 }, 4, &mut rng).unwrap();
        let h0 = model.zero_hidden();
        let (_, h1) = select_action(&model, &[0.1, 0.2, 0.3, 0.4], &h0, 1.0, &mut rng).unwrap();
        assert_ne!(h0, h1);
    }

    #[test]
    fn zero_episodes_empty_log() {
        let cfg = TrainConfig {
            episodes: 0,
            ..TrainConfig::default()
        };
        assert!(train(&cfg, ModelKind::Lstm { hidden: 8 }, &EnvConfig::default())
            .unwrap()
            .is_empty());
    }

    #[test]
    fn first_episode_makes_no_updates() {
        let cfg = TrainConfig::default();
        let mut t = Trainer::new(cfg, ModelKind::Lstm { hidden: 8 }, EnvConfig::default()).unwrap();
        let before = t.policy().clone();
        let log = t.run_episode().unwrap();
        assert_eq!(t.updates(), 0);
        assert_eq!(log.mean_loss, None);
        assert_eq!(t.policy(), &before);
        assert_eq!(t.memory().len(), 1);
        let log2 = t.run_episode().unwrap();
        assert_eq!(t.updates() as f64, log2.score);
        assert!(log2.mean_loss.is_some());
    }

    #[test]
    fn seeded_runs_repeat() {
        let cfg = TrainConfig {
            episodes: 4,
            seed: 3,
            ..TrainConfig::default()
        };
        let a = train(&cfg, ModelKind::Lstm { hidden: 8 }, &EnvConfig::default()).unwrap();
        let b = train(&cfg, ModelKind::Lstm { hidden: 8 }, &EnvConfig::default()).unwrap();
        assert_eq!(a.to_csv(), b.to_csv());
    }
}
