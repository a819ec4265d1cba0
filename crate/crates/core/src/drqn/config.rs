use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vqc::GradMethod;

/// Training hyperparameters. Defaults are the published settings; `gamma`
/// and `episodes` are not published and default to 0.99 and 1000.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub learning_rate: f64,
    /// Replay capacity in episodes.
    pub memory_capacity: usize,
    /// Maximum length of each sampled sub-trajectory.
    pub lookup_steps: usize,
    pub epsilon_init: f64,
    pub epsilon_decay: f64,
    pub epsilon_final: f64,
    /// Environment steps between soft target updates.
    pub target_update_period: usize,
    pub tau: f64,
    pub gamma: f64,
    pub episodes: usize,
    pub seed: u64,
    /// Global gradient-norm clip; off when `None`.
    pub grad_clip: Option<f64>,
    /// Screen every tape node for NaN/Inf.
    pub checked: bool,
    pub grad_method: GradMethod,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            batch_size: 8,
            learning_rate: 1e-3,
            memory_capacity: 100,
            lookup_steps: 10,
            epsilon_init: 0.1,
            epsilon_decay: 0.995,
            epsilon_final: 0.001,
            target_update_period: 4,
            tau: 1e-2,
            gamma: 0.99,
            episodes: 1000,
            seed: 0,
            grad_clip: None,
            checked: false,
            grad_method: GradMethod::Adjoint,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.batch_size == 0 || self.memory_capacity == 0 || self.lookup_steps == 0 || self.target_update_period == 0
        {
            return bad("batch_size, memory_capacity, lookup_steps and target_update_period must be positive".into());
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad(format!("learning_rate must be positive, got {}", self.learning_rate));
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return bad(format!("gamma must lie in (0, 1], got {}", self.gamma));
        }
        if !(self.tau > 0.0 && self.tau <= 1.0) {
            return bad(format!("tau must lie in (0, 1], got {}", self.tau));
        }
        if !(self.epsilon_final > 0.0 && self.epsilon_final <= self.epsilon_init && self.epsilon_init <= 1.0) {
            return bad(format!(
                "need 0 < epsilon_final <= epsilon_init <= 1, got {} and {}",
                self.epsilon_final, self.epsilon_init
            ));
        }
        if !(self.epsilon_decay > 0.0 && self.epsilon_decay <= 1.0) {
            return bad(format!("epsilon_decay must lie in (0, 1], got {}", self.epsilon_decay));
        }
        if let Some(c) = self.grad_clip {
            if c.is_nan() || c <= 0.0 {
                return bad(format!("grad_clip must be positive, got {c}"));
            }
        }
        Ok(())
    }

    pub fn decay_epsilon(&self, epsilon: f64) -> f64 {
        decay_epsilon(epsilon, self.epsilon_decay, self.epsilon_final)
    }
}

/// One multiplicative decay step with a floor.
pub fn decay_epsilon(epsilon: f64, decay: f64, floor: f64) -> f64 {
    (epsilon * decay).max(floor)
}
