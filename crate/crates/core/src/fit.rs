//! Multi-chain runs: independent chains with distinct random streams and
//! starting graphs, pooled into one posterior summary.

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::sampler::{run_chain, ChainControls, ChainTrace, Hyperparameters, InitialGraphs, KernelTallies};
use crate::selection::{chain_agreement, compute_mpp, PosteriorSummary, DEFAULT_MPP_THRESHOLD};

/// Absolute correlation above which the second chain starts with an edge.
pub const DEFAULT_INIT_THRESHOLD: f64 = 0.25;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitOptions {
    pub hyperparameters: Hyperparameters,
    /// Sweeps kept after burn-in.
    pub iterations: usize,
    pub burnin: usize,
    pub chains: usize,
    pub thinning: usize,
    pub seed: u64,
    /// Worker threads; 0 lets rayon decide.
    pub threads: usize,
    /// Run everything sequentially on the calling thread.
    pub strict: bool,
    pub mpp_threshold: f64,
    pub init_threshold: f64,
    pub check_pd: bool,
    pub progress_every: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            hyperparameters: Hyperparameters::default(),
            iterations: 30_000,
            burnin: 10_000,
            chains: 2,
            thinning: 1,
            seed: 1,
            threads: 0,
            strict: false,
            mpp_threshold: DEFAULT_MPP_THRESHOLD,
            init_threshold: DEFAULT_INIT_THRESHOLD,
            check_pd: true,
            progress_every: 0,
        }
    }
}

impl FitOptions {
    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::Config("iterations must be positive".into()));
        }
        if self.iterations <= self.burnin {
            return Err(Error::Config(format!(
                "iterations ({}) must exceed burn-in ({})",
                self.iterations, self.burnin
            )));
        }
        if self.chains == 0 {
            return Err(Error::Config("need at least one chain".into()));
        }
        if self.thinning == 0 {
            return Err(Error::Config("thinning must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.mpp_threshold) {
            return Err(Error::Config(format!(
                "MPP threshold must lie in [0, 1], got {}",
                self.mpp_threshold
            )));
        }
        self.hyperparameters
            .validate()
            .map_err(|e| Error::Config(e.to_string()))
    }

    /// Controls of chain `c`: stream `c`; chain 0 starts empty, every other
    /// chain from thresholded correlations.
    pub fn chain_controls(&self, c: usize) -> ChainControls {
        ChainControls {
            iterations: self.burnin + self.iterations,
            burnin: self.burnin,
            thinning: self.thinning,
            seed: self.seed,
            stream: c as u64,
            init: if c == 0 {
                InitialGraphs::Empty
            } else {
                InitialGraphs::CorrelationThreshold(self.init_threshold)
            },
            check_pd: self.check_pd,
            parallel_precision: !self.strict && self.chains == 1,
            progress_every: self.progress_every,
        }
    }
}

#[derive(Clone, Debug)]
pub struct FitResult {
    pub summary: PosteriorSummary,
    pub chain_summaries: Vec<PosteriorSummary>,
    /// Between-chain MPP correlation, comparing the first two chains.
    pub agreement: Option<f64>,
    pub traces: Vec<ChainTrace>,
    pub tallies: KernelTallies,
}

impl FitResult {
    pub fn pd_failures(&self) -> u64 {
        self.traces.iter().map(|t| t.pd_failures).sum()
    }
}

pub fn fit(data: &Dataset, options: &FitOptions) -> Result<FitResult> {
    options.validate()?;
    let hp = &options.hyperparameters;
    let run = |c: usize| run_chain(data, hp, &options.chain_controls(c));
    let traces: Vec<ChainTrace> = if options.strict || options.chains == 1 {
        (0..options.chains).map(run).collect::<Result<_>>()?
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(options.threads)
            .build()
            .map_err(|e| Error::Config(format!("cannot start thread pool: {e}")))?;
        pool.install(|| (0..options.chains).into_par_iter().map(run).collect::<Result<_>>())?
    };

    let mut summary = compute_mpp(&traces)?;
    summary.reselect(options.mpp_threshold)?;
    let chain_summaries = traces
        .iter()
        .map(|t| {
            let mut s = compute_mpp(std::slice::from_ref(t))?;
            s.reselect(options.mpp_threshold)?;
            Ok(s)
        })
        .collect::<Result<Vec<_>>>()?;
    let agreement = if chain_summaries.len() >= 2 {
        match chain_agreement(&chain_summaries[0], &chain_summaries[1]) {
            Ok(r) => Some(r),
            Err(e) => {
                warn!("chain agreement unavailable: {e}");
                None
            }
        }
    } else {
        warn!("a single chain was run; no between-chain agreement is reported");
        None
    };
    let mut tallies = KernelTallies::default();
    for t in &traces {
        tallies.merge(&t.tallies);
    }
    Ok(FitResult {
        summary,
        chain_summaries,
        agreement,
        traces,
        tallies,
    })
}
