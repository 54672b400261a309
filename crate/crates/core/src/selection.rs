//! Posterior summaries: marginal inclusion probabilities of edges and of the
//! group/platform relatedness indicators, median-model graphs and the
//! between-chain agreement diagnostic.

use crate::error::{Error, Result};
use crate::graph::{pair_count, pairs, Graph};
use crate::numerics::SymMatrix;
use crate::sampler::ChainTrace;

pub const DEFAULT_MPP_THRESHOLD: f64 = 0.5;

#[derive(Clone, Debug, PartialEq)]
pub struct PosteriorSummary {
    pub p: Vec<usize>,
    pub groups: usize,
    /// Number of pooled trace records.
    pub records: usize,
    /// `edge_mpp[s][k]`, zero diagonal.
    pub edge_mpp: Vec<Vec<SymMatrix>>,
    pub threshold: f64,
    /// `selected[s][k]`: edges with MPP strictly above `threshold`.
    pub selected: Vec<Vec<Graph>>,
    /// `K×K` per platform.
    pub gamma_mpp: Vec<SymMatrix>,
    /// `S×S`.
    pub zeta_mpp: SymMatrix,
    /// Nonzero θ draws, `[s][group pair]`.
    pub theta_samples: Vec<Vec<Vec<f64>>>,
    /// Nonzero φ draws per platform pair.
    pub phi_samples: Vec<Vec<f64>>,
}

impl PosteriorSummary {
    pub fn platforms(&self) -> usize {
        self.p.len()
    }

    /// Replaces the selection threshold and recomputes the selected graphs.
    pub fn reselect(&mut self, threshold: f64) -> Result<()> {
        self.selected = median_model(self, threshold)?;
        self.threshold = threshold;
        Ok(())
    }

    /// Upper-triangular edge MPPs of every (platform, group), concatenated
    /// in platform-major order.
    pub fn flat_edge_mpp(&self) -> Vec<f64> {
        self.edge_mpp
            .iter()
            .flatten()
            .flat_map(|m| pairs(m.dim()).map(move |(i, j)| m.get(i, j)))
            .collect()
    }
}

fn check_trace_shape(first: &ChainTrace, other: &ChainTrace) -> Result<()> {
    if first.p != other.p || first.groups != other.groups {
        return Err(Error::DimensionMismatch(format!(
            "trace dimensions differ: p {:?} with {} groups vs p {:?} with {} groups",
            first.p, first.groups, other.p, other.groups
        )));
    }
    Ok(())
}

/// Pools the records of all traces, each record weighing equally, and
/// selects the median model.
pub fn compute_mpp(traces: &[ChainTrace]) -> Result<PosteriorSummary> {
    let first = traces
        .first()
        .ok_or_else(|| Error::DimensionMismatch("no traces to summarize".into()))?;
    for t in &traces[1..] {
        check_trace_shape(first, t)?;
    }
    let p = first.p.clone();
    let groups = first.groups;
    let platforms = p.len();
    let records: usize = traces.iter().map(|t| t.records.len()).sum();
    if records == 0 {
        return Err(Error::DegenerateInput(
            "traces contain no post-burn-in records".into(),
        ));
    }

    let mut edge_counts: Vec<Vec<Vec<u64>>> = p
        .iter()
        .map(|&ps| vec![vec![0u64; pair_count(ps)]; groups])
        .collect();
    let mut gamma_counts = vec![vec![0u64; pair_count(groups)]; platforms];
    let mut zeta_counts = vec![0u64; pair_count(platforms)];
    for rec in traces.iter().flat_map(|t| &t.records) {
        for (s, cells) in rec.graphs.iter().enumerate() {
            for (k, bits) in cells.iter().enumerate() {
                let counts = &mut edge_counts[s][k];
                bits.for_each_set(|idx| counts[idx] += 1);
            }
        }
        for (s, gammas) in rec.gammas.iter().enumerate() {
            for (c, &on) in gamma_counts[s].iter_mut().zip(gammas) {
                *c += on as u64;
            }
        }
        for (c, &on) in zeta_counts.iter_mut().zip(&rec.zetas) {
            *c += on as u64;
        }
    }

    let total = records as f64;
    let to_matrix = |n: usize, counts: &[u64]| {
        let mut m = SymMatrix::zeros(n);
        for ((i, j), &c) in pairs(n).zip(counts) {
            m.set(i, j, c as f64 / total);
        }
        m
    };
    let edge_mpp: Vec<Vec<SymMatrix>> = edge_counts
        .iter()
        .zip(&p)
        .map(|(cells, &ps)| cells.iter().map(|c| to_matrix(ps, c)).collect())
        .collect();
    let gamma_mpp = gamma_counts.iter().map(|c| to_matrix(groups, c)).collect();
    let zeta_mpp = to_matrix(platforms, &zeta_counts);

    let mut theta_samples = vec![vec![Vec::new(); pair_count(groups)]; platforms];
    let mut phi_samples = vec![Vec::new(); pair_count(platforms)];
    for t in traces {
        for (acc, src) in theta_samples.iter_mut().flatten().zip(t.theta_samples.iter().flatten()) {
            acc.extend_from_slice(src);
        }
        for (acc, src) in phi_samples.iter_mut().zip(&t.phi_samples) {
            acc.extend_from_slice(src);
        }
    }

    let mut summary = PosteriorSummary {
        p,
        groups,
        records,
        edge_mpp,
        threshold: DEFAULT_MPP_THRESHOLD,
        selected: Vec::new(),
        gamma_mpp,
        zeta_mpp,
        theta_samples,
        phi_samples,
    };
    summary.selected = median_model(&summary, DEFAULT_MPP_THRESHOLD)?;
    Ok(summary)
}

/// Graphs of the edges whose MPP is strictly greater than `threshold`.
pub fn median_model(summary: &PosteriorSummary, threshold: f64) -> Result<Vec<Vec<Graph>>> {
    if !(0.0..=1.0).contains(&threshold) {
        return Err(Error::InvalidParameter(format!(
            "selection threshold must lie in [0, 1], got {threshold}"
        )));
    }
    Ok(summary
        .edge_mpp
        .iter()
        .map(|cells| {
            cells
                .iter()
                .map(|m| Graph::from_upper_bits(m.dim(), pairs(m.dim()).map(|(i, j)| m.get(i, j) > threshold)))
                .collect()
        })
        .collect())
}

/// Pearson correlation of the concatenated edge MPPs of two summaries.
pub fn chain_agreement(a: &PosteriorSummary, b: &PosteriorSummary) -> Result<f64> {
    if a.p != b.p || a.groups != b.groups {
        return Err(Error::DimensionMismatch(format!(
            "summaries differ in shape: p {:?} with {} groups vs p {:?} with {} groups",
            a.p, a.groups, b.p, b.groups
        )));
    }
    pearson(&a.flat_edge_mpp(), &b.flat_edge_mpp())
}

pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch(format!(
            "vectors of length {} and {}",
            x.len(),
            y.len()
        )));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if !(sxx > 0.0 && syy > 0.0) {
        return Err(Error::DegenerateInput(
            "correlation is undefined for a constant vector".into(),
        ));
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}
