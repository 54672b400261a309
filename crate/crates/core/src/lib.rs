//! Joint Bayesian inference of sparse Gaussian graphical models across sample
//! groups and data platforms.
//!
//! Each (platform, group) cell gets its own precision matrix and graph. A
//! Markov random field prior links edge selection across the groups of a
//! platform, with spike-and-slab coupling strengths that are learned from the
//! data; a second MRF links the resulting group-relatedness patterns across
//! platforms. Posterior inference is by MCMC ([`sampler`]); edges are
//! selected by marginal posterior probability ([`selection`]).

pub mod data;
pub mod error;
pub mod fit;
pub mod graph;
pub mod io;
pub mod metrics;
pub mod numerics;
pub mod priors;
pub mod report;
pub mod sampler;
pub mod selection;
pub mod simulation;

pub use error::{Error, Result};
