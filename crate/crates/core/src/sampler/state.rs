use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::graph::{pair_count, pair_index, pairs, Graph};
use crate::numerics::SymMatrix;
use crate::priors::{logit, LogisticBeta, SpikeSlabGamma};

/// Fixed prior hyperparameters plus the within-model proposal scales.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Hyperparameters {
    /// Spike standard deviation of precision off-diagonals.
    pub nu0: f64,
    /// Slab standard deviation of precision off-diagonals.
    pub nu1: f64,
    /// Rate parameter of the exponential prior on precision diagonals is `lambda / 2`.
    pub lambda: f64,
    pub alpha: f64,
    pub beta: f64,
    pub a: f64,
    pub b: f64,
    pub d: f64,
    pub f: f64,
    pub eta: f64,
    pub kappa: f64,
    /// Prior inclusion probability of each cross-platform indicator.
    pub u: f64,
    /// Log-scale standard deviation of the multiplicative random walk on θ.
    pub theta_proposal_scale: f64,
    /// Log-scale standard deviation of the multiplicative random walk on φ.
    pub phi_proposal_scale: f64,
}

impl Default for Hyperparameters {
    fn default() -> Self {
        Hyperparameters {
            nu0: 0.02,
            nu1: 1.0,
            lambda: 1.0,
            alpha: 1.0,
            beta: 9.0,
            a: 1.0,
            b: 7.0,
            d: 1.0,
            f: 19.0,
            eta: 4.0,
            kappa: 5.0,
            u: 0.1,
            theta_proposal_scale: 0.5,
            phi_proposal_scale: 0.5,
        }
    }
}

impl Hyperparameters {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("nu0", self.nu0),
            ("nu1", self.nu1),
            ("lambda", self.lambda),
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("a", self.a),
            ("b", self.b),
            ("d", self.d),
            ("f", self.f),
            ("eta", self.eta),
            ("kappa", self.kappa),
            ("theta_proposal_scale", self.theta_proposal_scale),
            ("phi_proposal_scale", self.phi_proposal_scale),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "hyperparameter {name} must be positive and finite, got {v}"
                )));
            }
        }
        if self.nu0 >= self.nu1 {
            return Err(Error::InvalidParameter(format!(
                "nu0 ({}) must be smaller than nu1 ({})",
                self.nu0, self.nu1
            )));
        }
        if !(0.0..=1.0).contains(&self.u) {
            return Err(Error::InvalidParameter(format!(
                "u must lie in [0, 1], got {}",
                self.u
            )));
        }
        Ok(())
    }

    pub fn theta_slab(&self) -> SpikeSlabGamma {
        SpikeSlabGamma {
            shape: self.alpha,
            rate: self.beta,
        }
    }

    pub fn phi_slab(&self) -> SpikeSlabGamma {
        SpikeSlabGamma {
            shape: self.eta,
            rate: self.kappa,
        }
    }

    pub fn nu_prior(&self) -> LogisticBeta {
        LogisticBeta {
            a: self.a,
            b: self.b,
        }
    }

    pub fn w_prior(&self) -> LogisticBeta {
        LogisticBeta {
            a: self.d,
            b: self.f,
        }
    }
}

/// Every latent variable of one chain.
///
/// Indexing: `omegas[s][k]`, `graphs[s][k]`; `thetas[s]` and `gammas[s]` are
/// `K×K`; `nus[s]` and `ws` are stored per unordered pair in
/// [`pair_index`] order; `phi` and `zetas` are `S×S`.
#[derive(Clone, Debug)]
pub struct ChainState {
    pub omegas: Vec<Vec<SymMatrix>>,
    pub graphs: Vec<Vec<Graph>>,
    pub thetas: Vec<SymMatrix>,
    pub gammas: Vec<Graph>,
    pub nus: Vec<Vec<f64>>,
    pub ws: Vec<f64>,
    pub phi: SymMatrix,
    pub zetas: Graph,
}

impl ChainState {
    /// Cold sparse start: identity precisions, empty graphs, no similarity,
    /// sparsity parameters at the logit of their prior means.
    pub fn initial(p: &[usize], groups: usize, hp: &Hyperparameters) -> Self {
        let platforms = p.len();
        let nu0 = logit(hp.nu_prior().mean_probability());
        let w0 = logit(hp.w_prior().mean_probability());
        ChainState {
            omegas: p
                .iter()
                .map(|&ps| vec![SymMatrix::identity(ps); groups])
                .collect(),
            graphs: p.iter().map(|&ps| vec![Graph::empty(ps); groups]).collect(),
            thetas: vec![SymMatrix::zeros(groups); platforms],
            gammas: vec![Graph::empty(groups); platforms],
            nus: p.iter().map(|&ps| vec![nu0; pair_count(ps)]).collect(),
            ws: vec![w0; pair_count(groups)],
            phi: SymMatrix::zeros(platforms),
            zetas: Graph::empty(platforms),
        }
    }

    /// Same as [`ChainState::initial`] but with each graph seeded by
    /// thresholding the absolute sample correlations.
    pub fn initial_from_correlations(data: &Dataset, hp: &Hyperparameters, threshold: f64) -> Self {
        let mut state = Self::initial(&data.dims(), data.num_groups(), hp);
        for (s, platform_graphs) in state.graphs.iter_mut().enumerate() {
            for (k, g) in platform_graphs.iter_mut().enumerate() {
                if data.cell(s, k).n < 2 {
                    continue;
                }
                let r = data.correlation(s, k);
                for (i, j) in pairs(g.nodes()) {
                    g.set_edge(i, j, r.get(i, j).abs() > threshold);
                }
            }
        }
        state
    }

    pub fn num_platforms(&self) -> usize {
        self.omegas.len()
    }

    pub fn num_groups(&self) -> usize {
        self.gammas.first().map_or(0, Graph::nodes)
    }

    pub fn w(&self, k: usize, m: usize) -> f64 {
        let (lo, hi) = if k < m { (k, m) } else { (m, k) };
        self.ws[pair_index(self.num_groups(), lo, hi)]
    }

    /// Checks `θ = 0 ⟺ γ = 0`, `φ = 0 ⟺ ζ = 0` and the structural
    /// constraints on coupling matrices.
    pub fn check_indicator_coupling(&self) -> Result<()> {
        for (s, (theta, gamma)) in self.thetas.iter().zip(&self.gammas).enumerate() {
            for (k, m) in pairs(theta.dim()) {
                let v = theta.get(k, m);
                if (v != 0.0) != gamma.has_edge(k, m) || v < 0.0 {
                    return Err(Error::InconsistentState(format!(
                        "platform {s}: theta[{k}][{m}] = {v} but gamma = {}",
                        gamma.has_edge(k, m) as u8
                    )));
                }
            }
            if theta.diag().iter().any(|&d| d != 0.0) {
                return Err(Error::InconsistentState(format!(
                    "platform {s}: theta has a nonzero diagonal"
                )));
            }
        }
        for (s, t) in pairs(self.phi.dim()) {
            let v = self.phi.get(s, t);
            if (v != 0.0) != self.zetas.has_edge(s, t) || v < 0.0 {
                return Err(Error::InconsistentState(format!(
                    "phi[{s}][{t}] = {v} but zeta = {}",
                    self.zetas.has_edge(s, t) as u8
                )));
            }
        }
        Ok(())
    }

    /// Short human-readable dump used in sampler failure reports.
    pub fn describe(&self) -> String {
        let mut out = String::new();
        for (s, omegas) in self.omegas.iter().enumerate() {
            for (k, omega) in omegas.iter().enumerate() {
                let diag = omega.diag();
                let min = diag.iter().copied().fold(f64::INFINITY, f64::min);
                let max = diag.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                out.push_str(&format!(
                    "omega[{s}][{k}]: diag in [{min:.4e}, {max:.4e}], max asym {:.2e}, edges {}\n",
                    omega.max_asymmetry(),
                    self.graphs[s][k].edge_count()
                ));
            }
            out.push_str(&format!("theta[{s}] = {:?}\n", self.thetas[s]));
        }
        out.push_str(&format!("phi = {:?}\n", self.phi));
        out
    }
}
