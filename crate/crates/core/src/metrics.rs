//! Structure-recovery accuracy (TPR, FPR, MCC, AUC) and descriptive graph
//! statistics (clustering, betweenness, hubs, cross-group edge patterns).

use std::collections::{BTreeMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{pairs, Graph};
use crate::numerics::SymMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfusionMetrics {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tpr: f64,
    pub fpr: f64,
    pub mcc: f64,
}

impl ConfusionMetrics {
    /// Rates from raw counts. TPR (FPR) is 0 when there are no true
    /// positives (negatives); MCC is 0 when any factor of its denominator is 0.
    pub fn from_counts(tp: u64, fp: u64, tn: u64, fn_: u64) -> Self {
        let ratio = |a: u64, b: u64| if a + b == 0 { 0.0 } else { a as f64 / (a + b) as f64 };
        let (tpf, fpf, tnf, fnf) = (tp as f64, fp as f64, tn as f64, fn_ as f64);
        let denom = (tpf + fpf) * (tpf + fnf) * (tnf + fpf) * (tnf + fnf);
        let mcc = if denom == 0.0 {
            0.0
        } else {
            ((tpf * tnf - fpf * fnf) / denom.sqrt()).clamp(-1.0, 1.0)
        };
        ConfusionMetrics {
            tp,
            fp,
            tn,
            fn_,
            tpr: ratio(tp, fn_),
            fpr: ratio(fp, tn),
            mcc,
        }
    }

    /// Sums the counts of several comparisons.
    pub fn pooled(items: &[ConfusionMetrics]) -> Self {
        let sum = |f: fn(&ConfusionMetrics) -> u64| items.iter().map(f).sum();
        Self::from_counts(sum(|c| c.tp), sum(|c| c.fp), sum(|c| c.tn), sum(|c| c.fn_))
    }
}

fn same_nodes(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::DimensionMismatch(format!(
            "graphs have {a} and {b} nodes"
        )));
    }
    Ok(())
}

/// Compares the upper triangles of two graphs.
pub fn confusion(estimated: &Graph, truth: &Graph) -> Result<ConfusionMetrics> {
    same_nodes(estimated.nodes(), truth.nodes())?;
    let (mut tp, mut fp, mut tn, mut fn_) = (0, 0, 0, 0);
    for (i, j) in pairs(truth.nodes()) {
        match (estimated.has_edge(i, j), truth.has_edge(i, j)) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, false) => tn += 1,
            (false, true) => fn_ += 1,
        }
    }
    Ok(ConfusionMetrics::from_counts(tp, fp, tn, fn_))
}

/// Area under the ROC curve of edge scores against the true graph.
pub fn auc(mpp: &SymMatrix, truth: &Graph) -> Result<f64> {
    same_nodes(mpp.dim(), truth.nodes())?;
    let mut scores = Vec::new();
    let mut labels = Vec::new();
    for (i, j) in pairs(truth.nodes()) {
        scores.push(mpp.get(i, j));
        labels.push(truth.has_edge(i, j));
    }
    auc_scores(&scores, &labels)
}

/// Mann–Whitney form of the AUC with mid-ranks for ties.
pub fn auc_scores(scores: &[f64], labels: &[bool]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} scores for {} labels",
            scores.len(),
            labels.len()
        )));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::InvalidParameter("scores contain NaN".into()));
    }
    let pos = labels.iter().filter(|&&l| l).count();
    let neg = labels.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::DegenerateInput(
            "AUC needs both present and absent true edges".into(),
        ));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut rank_sum = 0.0;
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && scores[order[end]] == scores[order[start]] {
            end += 1;
        }
        // Ranks start..end (0-based) share their average, 1-based.
        let mid = (start + end + 1) as f64 / 2.0;
        rank_sum += mid * order[start..end].iter().filter(|&&i| labels[i]).count() as f64;
        start = end;
    }
    let (pf, nf) = (pos as f64, neg as f64);
    Ok((rank_sum - pf * (pf + 1.0) / 2.0) / (pf * nf))
}

/// Three times the triangle count over the number of connected triplets;
/// 0 when there are no triplets.
pub fn clustering_coefficient(g: &Graph) -> f64 {
    let n = g.nodes();
    let mut triangles = 0usize;
    for (i, j) in g.edges() {
        triangles += (j + 1..n).filter(|&k| g.has_edge(i, k) && g.has_edge(j, k)).count();
    }
    let triplets: usize = g.degrees().iter().map(|&d| d * d.saturating_sub(1) / 2).sum();
    if triplets == 0 {
        0.0
    } else {
        3.0 * triangles as f64 / triplets as f64
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Betweenness {
    /// Per node, divided by `(p − 1)(p − 2) / 2`.
    pub per_node: Vec<f64>,
    pub average: f64,
}

/// Exact shortest-path betweenness (Brandes), each pair's paths splitting
/// one unit of credit.
pub fn betweenness(g: &Graph) -> Betweenness {
    let n = g.nodes();
    let adj: Vec<Vec<usize>> = (0..n).map(|i| g.neighbors(i).collect()).collect();
    let mut cb = vec![0.0; n];
    let mut sigma = vec![0.0f64; n];
    let mut dist = vec![usize::MAX; n];
    let mut delta = vec![0.0; n];
    let mut stack = Vec::with_capacity(n);
    let mut queue = VecDeque::with_capacity(n);
    for src in 0..n {
        sigma.iter_mut().for_each(|v| *v = 0.0);
        dist.iter_mut().for_each(|v| *v = usize::MAX);
        delta.iter_mut().for_each(|v| *v = 0.0);
        sigma[src] = 1.0;
        dist[src] = 0;
        queue.push_back(src);
        while let Some(v) = queue.pop_front() {
            stack.push(v);
            for &w in &adj[v] {
                if dist[w] == usize::MAX {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
                if dist[w] == dist[v] + 1 {
                    sigma[w] += sigma[v];
                }
            }
        }
        while let Some(w) = stack.pop() {
            for &v in &adj[w] {
                if dist[v] != usize::MAX && dist[v] + 1 == dist[w] {
                    delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
                }
            }
            if w != src {
                cb[w] += delta[w];
            }
        }
    }
    // Every unordered pair was visited from both ends.
    let norm = if n > 2 { (n - 1) as f64 * (n - 2) as f64 / 2.0 } else { 1.0 };
    let per_node: Vec<f64> = cb.iter().map(|c| c / 2.0 / norm).collect();
    let average = if n == 0 { 0.0 } else { per_node.iter().sum::<f64>() / n as f64 };
    Betweenness { per_node, average }
}

/// Nodes with degree at least `min_degree`, by decreasing degree then index.
pub fn hub_nodes(g: &Graph, min_degree: usize) -> Result<Vec<usize>> {
    if min_degree == 0 {
        return Err(Error::InvalidParameter("hub degree threshold must be at least 1".into()));
    }
    let deg = g.degrees();
    let mut hubs: Vec<usize> = (0..g.nodes()).filter(|&i| deg[i] >= min_degree).collect();
    hubs.sort_by(|&a, &b| deg[b].cmp(&deg[a]).then(a.cmp(&b)));
    Ok(hubs)
}

/// Cross-group presence patterns of every edge found in at least one graph.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DisruptionTable {
    /// `(i, j, code)`, where `code[k]` is `'1'` when graph `k` has the edge.
    pub edges: Vec<(usize, usize, String)>,
    pub counts: BTreeMap<String, usize>,
    /// Edges present in at least one graph.
    pub total_pairs: usize,
    /// Edges that are present somewhere but not everywhere.
    pub total_disrupted: usize,
}

pub const REPORTED_CODES: [&str; 4] = ["100", "110", "011", "001"];

impl DisruptionTable {
    pub fn count(&self, code: &str) -> usize {
        self.counts.get(code).copied().unwrap_or(0)
    }
}

/// Graphs are expected in severity order (e.g. control, moderate, severe).
pub fn disruption_codes(graphs: &[Graph]) -> Result<DisruptionTable> {
    let n = graphs.first().map_or(0, Graph::nodes);
    for g in graphs {
        same_nodes(n, g.nodes())?;
    }
    let mut edges = Vec::new();
    let mut counts = BTreeMap::new();
    let mut total_disrupted = 0;
    for (i, j) in pairs(n) {
        let present: Vec<bool> = graphs.iter().map(|g| g.has_edge(i, j)).collect();
        if !present.iter().any(|&b| b) {
            continue;
        }
        let code: String = present.iter().map(|&b| if b { '1' } else { '0' }).collect();
        if !present.iter().all(|&b| b) {
            total_disrupted += 1;
        }
        *counts.entry(code.clone()).or_insert(0) += 1;
        edges.push((i, j, code));
    }
    Ok(DisruptionTable {
        total_pairs: edges.len(),
        edges,
        counts,
        total_disrupted,
    })
}

/// Mean and standard error (`sd / √r`, sample sd) over replicates. The
/// standard error is absent for a single replicate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanSe {
    pub mean: f64,
    pub se: Option<f64>,
}

pub fn mean_se(values: &[f64]) -> MeanSe {
    let r = values.len() as f64;
    let mean = values.iter().sum::<f64>() / r;
    let se = (values.len() > 1).then(|| {
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (r - 1.0);
        (var / r).sqrt()
    });
    MeanSe { mean, se }
}
