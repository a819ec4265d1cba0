use std::collections::VecDeque;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub state: Vec<f64>,
    pub action: usize,
    pub reward: f64,
    pub next_state: Vec<f64>,
    pub done: bool,
}

/// Transitions of one episode in order. Only the last may be terminal.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRecord {
    transitions: Vec<Transition>,
}

impl EpisodeRecord {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, t: Transition) -> Result<()> {
        if self.transitions.last().is_some_and(|last| last.done) {
            return Err(Error::Config(
                "episode record already ends in a terminal transition".into(),
            ));
        }
        if !t.reward.is_finite() {
            return Err(Error::NonFinite("transition reward"));
        }
        self.transitions.push(t);
        Ok(())
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn len(&self) -> usize {
        self.transitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transitions.is_empty()
    }

    pub fn total_reward(&self) -> f64 {
        self.transitions.iter().map(|t| t.reward).sum()
    }
}

/// FIFO store of whole episodes.
#[derive(Debug, Clone)]
pub struct ReplayMemory {
    capacity: usize,
    episodes: VecDeque<EpisodeRecord>,
}

impl ReplayMemory {
    pub fn new(capacity: usize) -> Self {
        Self {
            capacity,
            episodes: VecDeque::with_capacity(capacity),
        }
    }

    /// Stores an episode, evicting the oldest when full. Empty episodes are
    /// ignored.
    pub fn push(&mut self, episode: EpisodeRecord) {
        if episode.is_empty() || self.capacity == 0 {
            return;
        }
        if self.episodes.len() == self.capacity {
            self.episodes.pop_front();
        }
        self.episodes.push_back(episode);
    }

    pub fn len(&self) -> usize {
        self.episodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.episodes.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn episodes(&self) -> impl Iterator<Item = &EpisodeRecord> {
        self.episodes.iter()
    }

    pub fn get(&self, i: usize) -> Option<&EpisodeRecord> {
        self.episodes.get(i)
    }
}

/// Draws `batch_size` episodes uniformly with replacement and cuts a window of
/// `min(lookup, len)` consecutive transitions at a uniform offset from each.
pub fn sample_batch<'a, R: Rng + ?Sized>(
    memory: &'a ReplayMemory,
    batch_size: usize,
    lookup: usize,
    rng: &mut R,
) -> Result<Vec<&'a [Transition]>> {
    if memory.is_empty() {
        return Err(Error::EmptyMemory);
    }
    let mut batch = Vec::with_capacity(batch_size);
    for _ in 0..batch_size {
        let episode = &memory.episodes[rng.gen_range(0..memory.len())];
        let len = episode.len().min(lookup);
        let start = rng.gen_range(0..=episode.len() - len);
        batch.push(&episode.transitions[start..start + len]);
    }
    Ok(batch)
}
