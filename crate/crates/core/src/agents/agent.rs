use std::fs;
use std::path::Path;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::config::{AgentConfig, AgentKind};
use crate::expectile::{decay_step, ExpectileParams};
use crate::numkit::{Activation, AdamState, Matrix, Mlp, MlpGradient};
use crate::replay::{Batch, ReplayBuffer};
use crate::rng::derive_seed;
use crate::{Error, Result};

pub const AGENT_FORMAT: &str = "edged3.agent";
pub const AGENT_FORMAT_VERSION: u32 = 1;

/// A Q-network with its target copy and optimizer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Critic {
    pub net: Mlp,
    pub target: Mlp,
    pub opt: AdamState,
}

/// Per-step training record.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepDiagnostics {
    pub step: u64,
    /// Mean critic loss before the update (summed over twin critics).
    pub critic_loss: f64,
    /// Mean `Q_θ(s, a)` over the batch before the update.
    pub mean_q: f64,
    /// Mean `Q_θ(s, μ_φ(s))` before the actor step, on actor-update steps.
    pub actor_objective: Option<f64>,
    pub alpha: f64,
    pub beta: f64,
}

/// Actor, critic(s), their targets and optimizer states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Agent {
    kind: AgentKind,
    config: AgentConfig,
    actor: Mlp,
    actor_target: Mlp,
    actor_opt: AdamState,
    critics: Vec<Critic>,
    expectile: ExpectileParams,
    step: u64,
    episodes: u64,
    actor_updates: u64,
}

#[derive(Serialize, Deserialize)]
struct AgentCheckpoint {
    format: String,
    version: u32,
    agent: Agent,
}

impl Agent {
    pub fn new(kind: AgentKind, config: AgentConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let hidden_acts = vec![Activation::Relu; config.hidden.len()];
        let mut actor_acts = hidden_acts.clone();
        actor_acts.push(Activation::Tanh);
        let mut critic_acts = hidden_acts;
        critic_acts.push(Activation::Identity);

        let actor = Mlp::new(&config.actor_sizes(), &actor_acts, derive_seed(seed, 0))?;
        let critics = (0..kind.critic_count())
            .map(|i| {
                let net = Mlp::new(&config.critic_sizes(), &critic_acts, derive_seed(seed, 1 + i as u64))?;
                Ok(Critic {
                    target: net.clone(),
                    opt: AdamState::new(&net),
                    net,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            kind,
            expectile: config.expectile,
            actor_target: actor.clone(),
            actor_opt: AdamState::new(&actor),
            actor,
            critics,
            config,
            step: 0,
            episodes: 0,
            actor_updates: 0,
        })
    }

    pub fn kind(&self) -> AgentKind {
        self.kind
    }

    pub fn config(&self) -> &AgentConfig {
        &self.config
    }

    pub fn actor(&self) -> &Mlp {
        &self.actor
    }

    pub fn actor_mut(&mut self) -> &mut Mlp {
        &mut self.actor
    }

    pub fn actor_target(&self) -> &Mlp {
        &self.actor_target
    }

    pub fn actor_target_mut(&mut self) -> &mut Mlp {
        &mut self.actor_target
    }

    pub fn critics(&self) -> &[Critic] {
        &self.critics
    }

    pub fn critics_mut(&mut self) -> &mut [Critic] {
        &mut self.critics
    }

    /// Current `(α, β)`, after any decay.
    pub fn expectile(&self) -> ExpectileParams {
        self.expectile
    }

    pub fn steps(&self) -> u64 {
        self.step
    }

    pub fn episodes(&self) -> u64 {
        self.episodes
    }

    pub fn actor_updates(&self) -> u64 {
        self.actor_updates
    }

    pub fn network_count(&self) -> usize {
        2 + 2 * self.critics.len()
    }

    pub fn actor_bytes(&self) -> usize {
        self.actor.param_bytes()
    }

    pub fn critic_bytes(&self) -> usize {
        self.critics[0].net.param_bytes()
    }

    /// Exact parameter bytes over every network including targets.
    pub fn param_bytes(&self) -> usize {
        self.actor.param_bytes()
            + self.actor_target.param_bytes()
            + self
                .critics
                .iter()
                .map(|c| c.net.param_bytes() + c.target.param_bytes())
                .sum::<usize>()
    }

    fn behaviour_actor(&self) -> &Mlp {
        if self.config.explore_with_target {
            &self.actor_target
        } else {
            &self.actor
        }
    }

    /// Output of the behaviour actor (the target actor when
    /// `explore_with_target` is set, else the online actor), plus Gaussian
    /// noise when `explore`, clipped to `[-1, 1]`.
    pub fn select_action<R: Rng + ?Sized>(
        &self,
        state: &[f64],
        explore: bool,
        rng: &mut R,
    ) -> Result<Vec<f64>> {
        if state.len() != self.config.state_dim {
            return Err(Error::Argument(format!(
                "state has {} components, agent expects {}",
                state.len(),
                self.config.state_dim
            )));
        }
        if state.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric("non-finite state".into()));
        }
        let input = Matrix::from_vec(1, state.len(), state.to_vec())?;
        let net = self.behaviour_actor();
        let mut action = net.predict(&input)?.into_vec();
        if explore && self.config.sigma_explore > 0.0 {
            for a in &mut action {
                let z: f64 = StandardNormal.sample(rng);
                *a += self.config.sigma_explore * z;
            }
        }
        for a in &mut action {
            *a = a.clamp(-1.0, 1.0);
        }
        Ok(action)
    }

    /// Bootstrapped regression targets for `batch`; constants for the update.
    pub fn compute_target<R: Rng + ?Sized>(&self, batch: &Batch, rng: &mut R) -> Result<Vec<f64>> {
        if batch.is_empty() {
            return Err(Error::Argument("empty batch".into()));
        }
        let mut next_actions = self.actor_target.predict(&batch.next_states)?;
        let sigma = self.config.sigma_target;
        if self.kind.smooths_target() && sigma > 0.0 {
            let clip = self.config.noise_clip;
            for a in next_actions.data_mut() {
                let z: f64 = StandardNormal.sample(rng);
                let eps = (sigma * z).clamp(-clip, clip);
                *a = (*a + eps).clamp(-1.0, 1.0);
            }
        }
        let input = Matrix::hcat(&batch.next_states, &next_actions)?;
        let mut q_next = self.critics[0].target.predict(&input)?.into_vec();
        for critic in &self.critics[1..] {
            let other = critic.target.predict(&input)?;
            for (q, o) in q_next.iter_mut().zip(other.data()) {
                *q = q.min(*o);
            }
        }
        let gamma = self.config.gamma;
        Ok(batch
            .rewards
            .iter()
            .zip(&batch.dones)
            .zip(&q_next)
            .map(|((r, d), q)| r + gamma * (1.0 - d) * q)
            .collect())
    }

    /// One Adam step per critic on the loss against [`Agent::compute_target`].
    ///
    /// Returns the pre-step mean loss (summed over critics) and mean Q of the
    /// first critic.
    pub fn critic_update<R: Rng + ?Sized>(&mut self, batch: &Batch, rng: &mut R) -> Result<(f64, f64)> {
        let targets = self.compute_target(batch, rng)?;
        let input = Matrix::hcat(&batch.states, &batch.actions)?;
        let n = batch.len() as f64;
        let loss_params = if self.kind.uses_expectile() {
            self.expectile
        } else {
            ExpectileParams::symmetric()
        };
        let lr = self.config.lr_critic;
        let mut total_loss = 0.0;
        let mut mean_q = 0.0;
        for (ci, critic) in self.critics.iter_mut().enumerate() {
            let (q, cache) = critic.net.forward(&input)?;
            let mut loss = 0.0;
            let mut out_grad = Matrix::zeros(batch.len(), 1);
            for (i, (&pred, &y)) in q.data().iter().zip(&targets).enumerate() {
                let w = loss_params.weight(pred, y);
                let r = y - pred;
                loss += w * r * r;
                out_grad.data_mut()[i] = w * 2.0 * (pred - y) / n;
            }
            loss /= n;
            if !loss.is_finite() {
                return Err(Error::Numeric(format!("critic loss is {loss}")));
            }
            if ci == 0 {
                mean_q = q.data().iter().sum::<f64>() / n;
            }
            total_loss += loss;
            let (grad, _) = critic.net.backward(&cache, &out_grad)?;
            critic.opt.step(&mut critic.net, &grad, lr)?;
        }
        Ok((total_loss, mean_q))
    }

    /// Gradient of `-mean Q(s, μ_φ(s))` with respect to the actor parameters,
    /// through the first critic, and the objective itself.
    pub fn actor_gradient(&self, states: &Matrix) -> Result<(f64, MlpGradient)> {
        let critic = &self.critics[0].net;
        let sd = self.config.state_dim;
        let ad = self.config.action_dim;
        dpg_gradient(&self.actor, states, |actions| {
            let input = Matrix::hcat(states, actions)?;
            let (q, cache) = critic.forward(&input)?;
            let n = states.rows() as f64;
            let objective = q.data().iter().sum::<f64>() / n;
            let (_, input_grad) = critic.backward(&cache, &Matrix::filled(states.rows(), 1, 1.0 / n))?;
            Ok((objective, input_grad.columns(sd, sd + ad)))
        })
    }

    /// One deterministic-policy-gradient ascent step on `mean Q(s, μ(s))`
    /// through the first critic. Returns the pre-step objective.
    pub fn actor_update(&mut self, batch: &Batch) -> Result<f64> {
        let (objective, grad) = self.actor_gradient(&batch.states)?;
        self.actor_opt.step(&mut self.actor, &grad, self.config.lr_actor)?;
        Ok(objective)
    }

    fn update_targets(&mut self) -> Result<()> {
        for critic in &mut self.critics {
            critic.target.soft_update_from(&critic.net, self.config.tau1)?;
        }
        self.actor_target.soft_update_from(&self.actor, self.config.tau2)
    }

    /// Samples a batch and performs one training iteration on it.
    pub fn train_step<R: Rng + ?Sized>(&mut self, buffer: &ReplayBuffer, rng: &mut R) -> Result<StepDiagnostics> {
        if buffer.len() < self.config.batch_size {
            return Err(Error::State(format!(
                "replay holds {} transitions, batch needs {}",
                buffer.len(),
                self.config.batch_size
            )));
        }
        let batch = buffer.sample(self.config.batch_size, rng)?;
        self.train_on_batch(&batch, rng)
    }

    /// Critic update every call; actor and target updates when the step
    /// counter is a multiple of the actor period.
    pub fn train_on_batch<R: Rng + ?Sized>(&mut self, batch: &Batch, rng: &mut R) -> Result<StepDiagnostics> {
        self.step += 1;
        let (critic_loss, mean_q) = self.critic_update(batch, rng)?;
        let actor_objective = if self.step % self.config.actor_period as u64 == 0 {
            let objective = self.actor_update(batch)?;
            self.update_targets()?;
            self.actor_updates += 1;
            Some(objective)
        } else {
            None
        };
        if self.kind.uses_expectile() && !self.config.decay.per_episode {
            self.expectile = decay_step(&self.expectile, &self.config.decay, self.step);
        }
        Ok(StepDiagnostics {
            step: self.step,
            critic_loss,
            mean_q,
            actor_objective,
            alpha: self.expectile.alpha(),
            beta: self.expectile.beta(),
        })
    }

    /// Episode boundary: applies the per-episode asymmetry decay.
    pub fn end_episode(&mut self) {
        self.episodes += 1;
        if self.kind.uses_expectile() && self.config.decay.per_episode {
            self.expectile = decay_step(&self.expectile, &self.config.decay, self.episodes);
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let ckpt = AgentCheckpoint {
            format: AGENT_FORMAT.into(),
            version: AGENT_FORMAT_VERSION,
            agent: self.clone(),
        };
        fs::write(path, serde_json::to_string(&ckpt)?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let ckpt: AgentCheckpoint = serde_json::from_str(&fs::read_to_string(path)?)?;
        if ckpt.format != AGENT_FORMAT || ckpt.version != AGENT_FORMAT_VERSION {
            return Err(Error::Format(format!(
                "unsupported agent checkpoint {} v{}",
                ckpt.format, ckpt.version
            )));
        }
        let agent = ckpt.agent;
        agent.config.validate()?;
        let expected_actor = agent.config.actor_sizes();
        let expected_critic = agent.config.critic_sizes();
        let ok = agent.critics.len() == agent.kind.critic_count()
            && agent.actor.validate().is_ok()
            && agent.actor.layer_sizes() == expected_actor
            && agent.actor.same_shape(&agent.actor_target)
            && agent.critics.iter().all(|c| {
                c.net.validate().is_ok()
                    && c.net.layer_sizes() == expected_critic
                    && c.net.same_shape(&c.target)
                    && c.opt.first.congruent_with(&c.net)
            })
            && agent.actor_opt.first.congruent_with(&agent.actor);
        if !ok {
            return Err(Error::Format("agent checkpoint has inconsistent shapes".into()));
        }
        Ok(agent)
    }
}

/// Deterministic policy gradient for an arbitrary action-value.
///
/// `action_value` maps the batch of actions `μ_φ(s)` to the objective `J`
/// and `∂J/∂a` per row. Returns `J` and the gradient of `-J` with respect to
/// the actor parameters, for a descent step.
pub fn dpg_gradient<F>(actor: &Mlp, states: &Matrix, action_value: F) -> Result<(f64, MlpGradient)>
where
    F: FnOnce(&Matrix) -> Result<(f64, Matrix)>,
{
    let (actions, cache) = actor.forward(states)?;
    let (objective, mut action_grad) = action_value(&actions)?;
    if !objective.is_finite() {
        return Err(Error::Numeric(format!("actor objective is {objective}")));
    }
    if action_grad.shape() != actions.shape() {
        return Err(Error::Shape(format!(
            "action gradient is {:?}, actions are {:?}",
            action_grad.shape(),
            actions.shape()
        )));
    }
    action_grad.map_inplace(|g| -g);
    let (grad, _) = actor.backward(&cache, &action_grad)?;
    Ok((objective, grad))
}
