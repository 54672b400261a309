use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::graph::{pair_count, pairs, PackedBits};
use crate::numerics::{cholesky, RngStream};
use crate::priors::MrfTable;

use super::kernels::{
    update_edge_vector, update_nu, update_phi_zeta, update_precision, update_theta_gamma,
    update_w, IndicatorConfigs, KernelTallies, PrecisionWorkspace,
};
use super::state::{ChainState, Hyperparameters};

/// How the graphs of a chain are initialized.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "threshold")]
pub enum InitialGraphs {
    Empty,
    /// Edge `(i, j)` starts present when `|corr(i, j)|` exceeds the threshold.
    CorrelationThreshold(f64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChainControls {
    /// Total sweeps, burn-in included.
    pub iterations: usize,
    pub burnin: usize,
    pub thinning: usize,
    pub seed: u64,
    /// Stream id of this chain; chains sharing a seed must differ here.
    pub stream: u64,
    pub init: InitialGraphs,
    /// Cholesky-check every precision matrix after every sweep. Always on in
    /// debug builds.
    pub check_pd: bool,
    /// Run the per-(platform, group) precision updates on the rayon pool.
    /// Results do not depend on this flag.
    pub parallel_precision: bool,
    /// Log a progress line every this many sweeps (0 disables).
    pub progress_every: usize,
}

impl Default for ChainControls {
    fn default() -> Self {
        ChainControls {
            iterations: 40_000,
            burnin: 10_000,
            thinning: 1,
            seed: 1,
            stream: 0,
            init: InitialGraphs::Empty,
            check_pd: false,
            parallel_precision: false,
            progress_every: 0,
        }
    }
}

impl ChainControls {
    pub fn validate(&self) -> Result<()> {
        if self.iterations < self.burnin {
            return Err(Error::Config(format!(
                "iterations ({}) must not be smaller than burn-in ({})",
                self.iterations, self.burnin
            )));
        }
        if self.thinning == 0 {
            return Err(Error::Config("thinning must be at least 1".into()));
        }
        if self.stream >= 1 << 40 {
            return Err(Error::Config("chain stream id is too large".into()));
        }
        Ok(())
    }

    pub fn expected_records(&self) -> usize {
        (self.iterations - self.burnin) / self.thinning
    }
}

/// One retained draw.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceRecord {
    pub iteration: usize,
    /// `graphs[s][k]`, upper triangle packed in pair order.
    pub graphs: Vec<Vec<PackedBits>>,
    /// `thetas[s]` per group pair; zero where `γ = 0`.
    pub thetas: Vec<Vec<f64>>,
    pub gammas: Vec<Vec<bool>>,
    /// Per platform pair; zero where `ζ = 0`.
    pub phis: Vec<f64>,
    pub zetas: Vec<bool>,
}

#[derive(Clone, Debug)]
pub struct ChainTrace {
    pub p: Vec<usize>,
    pub groups: usize,
    pub records: Vec<TraceRecord>,
    /// Nonzero θ draws of every post-burn-in sweep, `[s][group pair]`.
    pub theta_samples: Vec<Vec<Vec<f64>>>,
    /// Nonzero φ draws of every post-burn-in sweep, per platform pair.
    pub phi_samples: Vec<Vec<f64>>,
    pub tallies: KernelTallies,
    pub iterations: usize,
    pub burnin: usize,
    pub thinning: usize,
    pub seed: u64,
    pub stream: u64,
    pub pd_checks: u64,
    pub pd_failures: u64,
}

impl ChainTrace {
    pub fn platforms(&self) -> usize {
        self.p.len()
    }
}

/// A running chain: data, hyperparameters and the current state.
pub struct Chain<'a> {
    data: &'a Dataset,
    hp: Hyperparameters,
    state: ChainState,
    rng: RngStream,
    precision_rngs: Vec<RngStream>,
    workspaces: Vec<PrecisionWorkspace>,
    tallies: KernelTallies,
    parallel_precision: bool,
    check_pd: bool,
    pd_checks: u64,
    pd_failures: u64,
    sweeps: usize,
}

impl<'a> Chain<'a> {
    pub fn new(data: &'a Dataset, hp: &Hyperparameters, controls: &ChainControls) -> Result<Self> {
        hp.validate()?;
        controls.validate()?;
        if data.num_platforms() == 0 || data.num_groups() == 0 {
            return Err(Error::DimensionMismatch(
                "dataset needs at least one platform and one group".into(),
            ));
        }
        if data.num_groups() > crate::priors::MAX_MRF_DIM
            || data.num_platforms() > crate::priors::MAX_MRF_DIM
        {
            return Err(Error::DimensionTooLarge(
                data.num_groups().max(data.num_platforms()),
            ));
        }
        let state = match controls.init {
            InitialGraphs::Empty => ChainState::initial(&data.dims(), data.num_groups(), hp),
            InitialGraphs::CorrelationThreshold(t) => {
                ChainState::initial_from_correlations(data, hp, t)
            }
        };
        let rng = RngStream::new(controls.seed, controls.stream);
        let cells = data.num_platforms() * data.num_groups();
        let precision_rngs = (0..cells as u64).map(|c| rng.substream(1 + c)).collect();
        let workspaces = (0..data.num_platforms())
            .flat_map(|s| (0..data.num_groups()).map(move |_| s))
            .map(|s| PrecisionWorkspace::new(data.p(s)))
            .collect();
        Ok(Chain {
            data,
            hp: hp.clone(),
            state,
            rng: rng.substream(0),
            precision_rngs,
            workspaces,
            tallies: KernelTallies::default(),
            parallel_precision: controls.parallel_precision,
            check_pd: controls.check_pd || cfg!(debug_assertions),
            pd_checks: 0,
            pd_failures: 0,
            sweeps: 0,
        })
    }

    pub fn state(&self) -> &ChainState {
        &self.state
    }

    pub fn state_mut(&mut self) -> &mut ChainState {
        &mut self.state
    }

    pub fn tallies(&self) -> &KernelTallies {
        &self.tallies
    }

    pub fn sweeps(&self) -> usize {
        self.sweeps
    }

    fn update_precisions(&mut self) -> Result<()> {
        let groups = self.data.num_groups();
        let data = self.data;
        let hp = &self.hp;
        let graphs = &self.state.graphs;
        let jobs = self
            .state
            .omegas
            .iter_mut()
            .flatten()
            .zip(self.precision_rngs.iter_mut())
            .zip(self.workspaces.iter_mut())
            .enumerate();
        let run = |(cell, ((omega, rng), ws)): (usize, ((&mut _, &mut RngStream), &mut _))| {
            let (s, k) = (cell / groups, cell % groups);
            update_precision(omega, &graphs[s][k], data.cell(s, k), hp, rng, ws)
        };
        if self.parallel_precision {
            let jobs: Vec<_> = jobs.collect();
            jobs.into_par_iter().try_for_each(run)
        } else {
            jobs.map(run).collect()
        }
    }

    fn verify_precisions(&mut self) -> Result<()> {
        for omegas in &self.state.omegas {
            for omega in omegas {
                self.pd_checks += 1;
                if omega.max_asymmetry() != 0.0 || cholesky(omega).is_err() {
                    self.pd_failures += 1;
                    return Err(Error::NotPositiveDefinite {
                        pivot: 0,
                        value: f64::NAN,
                    });
                }
            }
        }
        Ok(())
    }

    /// One full sweep in the fixed order: precisions, edge vectors, θ/γ,
    /// ν, w, φ/ζ.
    pub fn sweep(&mut self) -> Result<()> {
        let hp = self.hp.clone();
        self.update_precisions()?;
        if self.check_pd {
            self.verify_precisions()?;
        }

        let platforms = self.data.num_platforms();
        let groups = self.data.num_groups();
        for s in 0..platforms {
            let p = self.data.p(s);
            let state = &mut self.state;
            for (pair, (i, j)) in pairs(p).enumerate() {
                update_edge_vector(
                    &mut state.graphs[s],
                    &state.omegas[s],
                    i,
                    j,
                    state.nus[s][pair],
                    &state.thetas[s],
                    &hp,
                    &mut self.rng,
                );
            }
        }

        let edge_configs: Vec<IndicatorConfigs> = (0..platforms)
            .map(|s| IndicatorConfigs::edges(&self.state.graphs[s]))
            .collect();
        for (s, edges) in edge_configs.iter().enumerate() {
            for (k, m) in pairs(groups) {
                update_theta_gamma(
                    &mut self.state,
                    s,
                    k,
                    m,
                    edges,
                    &hp,
                    &mut self.rng,
                    &mut self.tallies,
                )?;
            }
        }

        for (s, edges) in edge_configs.iter().enumerate() {
            let table = MrfTable::new(&self.state.thetas[s])?;
            for pair in 0..pair_count(self.data.p(s)) {
                update_nu(
                    &mut self.state,
                    s,
                    pair,
                    edges,
                    &table,
                    &hp,
                    &mut self.rng,
                    &mut self.tallies.nu,
                )?;
            }
        }

        let group_pairs = IndicatorConfigs::group_pairs(&self.state.gammas);
        let table = MrfTable::new(&self.state.phi)?;
        for (k, m) in pairs(groups) {
            update_w(
                &mut self.state,
                k,
                m,
                &group_pairs,
                &table,
                &hp,
                &mut self.rng,
                &mut self.tallies.w,
            )?;
        }

        for (s, t) in pairs(platforms) {
            update_phi_zeta(&mut self.state, s, t, &hp, &mut self.rng, &mut self.tallies)?;
        }

        if cfg!(debug_assertions) {
            self.state.check_indicator_coupling()?;
        }
        self.sweeps += 1;
        Ok(())
    }

    fn record(&self, iteration: usize) -> TraceRecord {
        let st = &self.state;
        TraceRecord {
            iteration,
            graphs: st
                .graphs
                .iter()
                .map(|gs| {
                    gs.iter()
                        .map(|g| PackedBits::pack(g.upper_bits().into_iter()))
                        .collect()
                })
                .collect(),
            thetas: st
                .thetas
                .iter()
                .map(|t| pairs(t.dim()).map(|(k, m)| t.get(k, m)).collect())
                .collect(),
            gammas: st.gammas.iter().map(|g| g.upper_bits()).collect(),
            phis: pairs(st.phi.dim()).map(|(s, t)| st.phi.get(s, t)).collect(),
            zetas: st.zetas.upper_bits(),
        }
    }
}

/// Runs one chain and collects its post-burn-in trace.
pub fn run_chain(data: &Dataset, hp: &Hyperparameters, controls: &ChainControls) -> Result<ChainTrace> {
    let mut chain = Chain::new(data, hp, controls)?;
    let platforms = data.num_platforms();
    let groups = data.num_groups();
    let mut trace = ChainTrace {
        p: data.dims(),
        groups,
        records: Vec::with_capacity(controls.expected_records()),
        theta_samples: vec![vec![Vec::new(); pair_count(groups)]; platforms],
        phi_samples: vec![Vec::new(); pair_count(platforms)],
        tallies: KernelTallies::default(),
        iterations: controls.iterations,
        burnin: controls.burnin,
        thinning: controls.thinning,
        seed: controls.seed,
        stream: controls.stream,
        pd_checks: 0,
        pd_failures: 0,
    };

    for iteration in 0..controls.iterations {
        if let Err(source) = chain.sweep() {
            return Err(Error::Sampler {
                iteration,
                source: Box::new(source),
                dump: chain.state.describe(),
            });
        }
        if iteration >= controls.burnin {
            let st = chain.state();
            for (s, theta) in st.thetas.iter().enumerate() {
                for (pair, (k, m)) in pairs(groups).enumerate() {
                    let v = theta.get(k, m);
                    if v != 0.0 {
                        trace.theta_samples[s][pair].push(v);
                    }
                }
            }
            for (pair, (s, t)) in pairs(platforms).enumerate() {
                let v = st.phi.get(s, t);
                if v != 0.0 {
                    trace.phi_samples[pair].push(v);
                }
            }
            if (iteration - controls.burnin + 1) % controls.thinning == 0 {
                trace.records.push(chain.record(iteration));
            }
        }
        if controls.progress_every > 0 && (iteration + 1) % controls.progress_every == 0 {
            let t = chain.tallies();
            let fmt = |r: Option<f64>| r.map_or("-".to_string(), |v| format!("{v:.3}"));
            log::info!(
                "chain {}: sweep {}/{} | accept theta {} / {} nu {} w {} phi {} / {}",
                controls.stream,
                iteration + 1,
                controls.iterations,
                fmt(t.theta_between.rate()),
                fmt(t.theta_within.rate()),
                fmt(t.nu.rate()),
                fmt(t.w.rate()),
                fmt(t.phi_between.rate()),
                fmt(t.phi_within.rate()),
            );
        }
    }
    trace.tallies = chain.tallies.clone();
    trace.pd_checks = chain.pd_checks;
    trace.pd_failures = chain.pd_failures;
    Ok(trace)
}
