//! Deep recurrent Q-learning: episodic replay, ε-greedy acting, Bellman
//! targets from a softly tracking target network, and Adam updates.

mod config;
mod log;
mod memory;
mod optim;
mod trainer;

pub use config::{decay_epsilon, TrainConfig};
pub use log::{format_sig, EpisodeLog, RunLog};
pub use memory::{sample_batch, EpisodeRecord, ReplayMemory, Transition};
pub use optim::{soft_update, soft_update_flat, Adam};
pub use trainer::{argmax, compute_loss, select_action, train, train_with, Trainer};
