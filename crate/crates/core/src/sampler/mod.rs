//! Markov chain Monte Carlo over the joint posterior of precisions, graphs,
//! within-platform similarity (θ, γ, ν) and cross-platform similarity
//! (w, φ, ζ).

mod chain;
pub mod kernels;
mod state;

pub use chain::{run_chain, Chain, ChainControls, ChainTrace, InitialGraphs, TraceRecord};
pub use kernels::{KernelTallies, Tally};
pub use state::{ChainState, Hyperparameters};
