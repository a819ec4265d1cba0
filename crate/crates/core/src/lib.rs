//! Quantum deep recurrent Q-learning on Cart-Pole.
//!
//! The agent's value network is a QLSTM whose gates are variational circuits
//! evaluated on an exact statevector simulator. Classical LSTM cores with
//! matched interfaces serve as baselines.

pub mod autograd;
pub mod cartpole;
pub mod drqn;
pub mod error;
pub mod experiment;
pub mod plot;
pub mod recurrent;
pub mod statevec;
pub mod vqc;

pub use error::{Error, Result};
