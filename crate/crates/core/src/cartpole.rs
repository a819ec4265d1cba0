//! Classic cart-pole balancing task with explicit Euler integration.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CartPoleState {
    pub x: f64,
    pub x_dot: f64,
    pub theta: f64,
    pub theta_dot: f64,
}

impl CartPoleState {
    pub fn to_array(self) -> [f64; 4] {
        [self.x, self.x_dot, self.theta, self.theta_dot]
    }

    pub fn mirrored(self) -> Self {
        Self {
            x: -self.x,
            x_dot: -self.x_dot,
            theta: -self.theta,
            theta_dot: -self.theta_dot,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EnvConfig {
    pub gravity: f64,
    pub cart_mass: f64,
    pub pole_mass: f64,
    /// Half the pole length.
    pub pole_half_length: f64,
    pub force_mag: f64,
    pub dt: f64,
    /// Termination threshold on |θ|, radians.
    pub angle_limit: f64,
    pub position_limit: f64,
    pub max_steps: usize,
    /// Drop the pole angular velocity from observations.
    pub partial_observation: bool,
}

impl Default for EnvConfig {
    fn default() -> Self {
        Self {
            gravity: 9.8,
            cart_mass: 1.0,
            pole_mass: 0.1,
            pole_half_length: 0.5,
            force_mag: 10.0,
            dt: 0.02,
            angle_limit: 12f64.to_radians(),
            position_limit: 2.4,
            max_steps: 200,
            partial_observation: false,
        }
    }
}

impl EnvConfig {
    pub fn obs_dim(&self) -> usize {
        if self.partial_observation {
            3
        } else {
            4
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("gravity", self.gravity),
            ("cart_mass", self.cart_mass),
            ("pole_mass", self.pole_mass),
            ("pole_half_length", self.pole_half_length),
            ("force_mag", self.force_mag),
            ("dt", self.dt),
            ("angle_limit", self.angle_limit),
            ("position_limit", self.position_limit),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if self.max_steps == 0 {
            return Err(Error::Config("max_steps must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepResult {
    pub reward: f64,
    pub done: bool,
}

#[derive(Debug, Clone)]
pub struct CartPole {
    config: EnvConfig,
    state: CartPoleState,
    steps: usize,
    done: bool,
}

impl CartPole {
    pub fn new(config: EnvConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            config,
            state: CartPoleState::default(),
            steps: 0,
            done: true,
        })
    }

    pub fn config(&self) -> &EnvConfig {
        &self.config
    }

    pub fn state(&self) -> CartPoleState {
        self.state
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn is_done(&self) -> bool {
        self.done
    }

    /// Starts an episode with every state component uniform in `[-0.05, 0.05]`.
    pub fn reset<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Vec<f64> {
        let mut draw = || rng.gen_range(-0.05..=0.05);
        let state = CartPoleState {
            x: draw(),
            x_dot: draw(),
            theta: draw(),
            theta_dot: draw(),
        };
        self.reset_to(state)
    }

    /// Starts an episode from an explicit state.
    pub fn reset_to(&mut self, state: CartPoleState) -> Vec<f64> {
        self.state = state;
        self.steps = 0;
        self.done = false;
        self.observe()
    }

    pub fn observe(&self) -> Vec<f64> {
        let full = self.state.to_array();
        full[..self.config.obs_dim()].to_vec()
    }

    /// Advances one `dt`. Action 0 pushes left, anything else pushes right.
    pub fn step(&mut self, action: usize) -> Result<(Vec<f64>, StepResult)> {
        if self.done {
            return Err(Error::EpisodeDone);
        }
        self.state = dynamics(&self.config, self.state, action);
        self.steps += 1;
        let s = &self.state;
        self.done = s.theta.abs() > self.config.angle_limit
            || s.x.abs() > self.config.position_limit
            || self.steps >= self.config.max_steps;
        Ok((
            self.observe(),
            StepResult {
                reward: 1.0,
                done: self.done,
            },
        ))
    }
}

/// One explicit Euler step using pre-step derivatives.
pub fn dynamics(cfg: &EnvConfig, s: CartPoleState, action: usize) -> CartPoleState {
    let force = if action == 0 { -cfg.force_mag } else { cfg.force_mag };
    let total_mass = cfg.cart_mass + cfg.pole_mass;
    let pole_ml = cfg.pole_mass * cfg.pole_half_length;
    let (sin, cos) = s.theta.sin_cos();
    let temp = (force + pole_ml * s.theta_dot * s.theta_dot * sin) / total_mass;
    let theta_acc = (cfg.gravity * sin - cos * temp)
        / (cfg.pole_half_length * (4.0 / 3.0 - cfg.pole_mass * cos * cos / total_mass));
    let x_acc = temp - pole_ml * theta_acc * cos / total_mass;
    CartPoleState {
        x: s.x + cfg.dt * s.x_dot,
        x_dot: s.x_dot + cfg.dt * x_acc,
        theta: s.theta + cfg.dt * s.theta_dot,
        theta_dot: s.theta_dot + cfg.dt * theta_acc,
    }
}
