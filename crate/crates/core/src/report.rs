//! Evaluation against known graphs and descriptive graph reports, as data
//! and as plain-text tables.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{pairs, Graph};
use crate::io::Labels;
use crate::metrics::{
    auc, auc_scores, betweenness, clustering_coefficient, confusion, disruption_codes, hub_nodes,
    mean_se, ConfusionMetrics, DisruptionTable, MeanSe, REPORTED_CODES,
};
use crate::selection::PosteriorSummary;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Accuracy {
    pub confusion: ConfusionMetrics,
    /// Absent when the true graph is empty or complete.
    pub auc: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReplicateEvaluation {
    /// `cells[s][k]`.
    pub cells: Vec<Vec<Accuracy>>,
    /// Counts summed over all cells; AUC over all cells' edges jointly.
    pub pooled: Accuracy,
}

pub fn evaluate_replicate(summary: &PosteriorSummary, truth: &[Vec<Graph>]) -> Result<ReplicateEvaluation> {
    if truth.len() != summary.platforms() || truth.iter().any(|t| t.len() != summary.groups) {
        return Err(Error::DimensionMismatch(format!(
            "truth has {} platforms, summary has {} platforms x {} groups",
            truth.len(),
            summary.platforms(),
            summary.groups
        )));
    }
    let mut cells = Vec::new();
    let mut all = Vec::new();
    let mut scores = Vec::new();
    let mut labels = Vec::new();
    for (s, row) in truth.iter().enumerate() {
        let mut out = Vec::new();
        for (k, t) in row.iter().enumerate() {
            let mpp = &summary.edge_mpp[s][k];
            let c = confusion(&summary.selected[s][k], t)?;
            let a = match auc(mpp, t) {
                Ok(v) => Some(v),
                Err(Error::DegenerateInput(_)) => None,
                Err(e) => return Err(e),
            };
            for (i, j) in pairs(t.nodes()) {
                scores.push(mpp.get(i, j));
                labels.push(t.has_edge(i, j));
            }
            all.push(c);
            out.push(Accuracy { confusion: c, auc: a });
        }
        cells.push(out);
    }
    let pooled_auc = match auc_scores(&scores, &labels) {
        Ok(v) => Some(v),
        Err(Error::DegenerateInput(_)) => None,
        Err(e) => return Err(e),
    };
    Ok(ReplicateEvaluation {
        cells,
        pooled: Accuracy {
            confusion: ConfusionMetrics::pooled(&all),
            auc: pooled_auc,
        },
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AccuracySummary {
    pub tpr: MeanSe,
    pub fpr: MeanSe,
    pub mcc: MeanSe,
    pub auc: Option<MeanSe>,
}

fn summarize_accuracy<'a>(items: impl Iterator<Item = &'a Accuracy>) -> AccuracySummary {
    let items: Vec<&Accuracy> = items.collect();
    let collect = |f: fn(&Accuracy) -> f64| items.iter().map(|a| f(a)).collect::<Vec<_>>();
    let aucs: Option<Vec<f64>> = items.iter().map(|a| a.auc).collect();
    AccuracySummary {
        tpr: mean_se(&collect(|a| a.confusion.tpr)),
        fpr: mean_se(&collect(|a| a.confusion.fpr)),
        mcc: mean_se(&collect(|a| a.confusion.mcc)),
        auc: aucs.filter(|v| !v.is_empty()).map(|v| mean_se(&v)),
    }
}

/// Replicate means and standard errors, per cell and pooled.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub replicates: usize,
    pub cells: Vec<Vec<AccuracySummary>>,
    pub pooled: AccuracySummary,
    pub per_replicate: Vec<ReplicateEvaluation>,
}

pub fn aggregate_replicates(reps: Vec<ReplicateEvaluation>) -> Result<EvaluationReport> {
    let first = reps
        .first()
        .ok_or_else(|| Error::DimensionMismatch("no replicates to aggregate".into()))?;
    let shape: Vec<usize> = first.cells.iter().map(Vec::len).collect();
    if reps.iter().any(|r| r.cells.iter().map(Vec::len).collect::<Vec<_>>() != shape) {
        return Err(Error::DimensionMismatch("replicates differ in shape".into()));
    }
    let cells = shape
        .iter()
        .enumerate()
        .map(|(s, &groups)| {
            (0..groups)
                .map(|k| summarize_accuracy(reps.iter().map(|r| &r.cells[s][k])))
                .collect()
        })
        .collect();
    Ok(EvaluationReport {
        replicates: reps.len(),
        cells,
        pooled: summarize_accuracy(reps.iter().map(|r| &r.pooled)),
        per_replicate: reps,
    })
}

fn fmt_mean_se(m: &MeanSe) -> String {
    match m.se {
        Some(se) => format!("{:.3} ({:.3})", m.mean, se),
        None => format!("{:.3}", m.mean),
    }
}

/// Rows of `Method | TPR | FPR | MCC | AUC`, each as "mean (se)".
pub fn format_accuracy_table(report: &EvaluationReport, labels: &Labels) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<28} {:>16} {:>16} {:>16} {:>16}",
        "Method", "TPR", "FPR", "MCC", "AUC"
    );
    let row = |out: &mut String, name: &str, a: &AccuracySummary| {
        let _ = writeln!(
            out,
            "{:<28} {:>16} {:>16} {:>16} {:>16}",
            name,
            fmt_mean_se(&a.tpr),
            fmt_mean_se(&a.fpr),
            fmt_mean_se(&a.mcc),
            a.auc.as_ref().map_or("-".to_string(), fmt_mean_se)
        );
    };
    for (s, cells) in report.cells.iter().enumerate() {
        for (k, a) in cells.iter().enumerate() {
            row(&mut out, &format!("{} / {}", labels.platforms[s], labels.groups[k]), a);
        }
    }
    row(&mut out, "mpggm (pooled)", &report.pooled);
    let _ = writeln!(out, "replicates: {}", report.replicates);
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphStats {
    pub edges: usize,
    pub clustering: f64,
    pub betweenness: f64,
    pub hubs: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphReport {
    pub hub_degree: usize,
    /// `cells[s][k]`.
    pub cells: Vec<Vec<GraphStats>>,
    /// One table per platform, groups in their listed order.
    pub disruption: Vec<DisruptionTable>,
}

pub fn graph_report(graphs: &[Vec<Graph>], hub_degree: usize) -> Result<GraphReport> {
    let mut cells = Vec::new();
    let mut disruption = Vec::new();
    for row in graphs {
        let mut out = Vec::new();
        for g in row {
            out.push(GraphStats {
                edges: g.edge_count(),
                clustering: clustering_coefficient(g),
                betweenness: betweenness(g).average,
                hubs: hub_nodes(g, hub_degree)?,
            });
        }
        cells.push(out);
        disruption.push(disruption_codes(row)?);
    }
    Ok(GraphReport {
        hub_degree,
        cells,
        disruption,
    })
}

/// Edge counts, clustering, average betweenness and hub counts per cell,
/// then the cross-group edge pattern table of each platform.
pub fn format_graph_report(report: &GraphReport, labels: &Labels) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<16} {:<16} {:>8} {:>12} {:>12} {:>10}",
        "Platform", "Group", "Edges", "Clustering", "Betweenness", "Hubs"
    );
    for (s, cells) in report.cells.iter().enumerate() {
        for (k, c) in cells.iter().enumerate() {
            let _ = writeln!(
                out,
                "{:<16} {:<16} {:>8} {:>12.4} {:>12.4} {:>10}",
                labels.platforms[s],
                labels.groups[k],
                c.edges,
                c.clustering,
                c.betweenness,
                c.hubs.len()
            );
        }
    }
    let _ = writeln!(out, "hub degree threshold: {}", report.hub_degree);
    let _ = writeln!(out);
    let _ = writeln!(out, "Groups in order: {}", labels.groups.join(", "));
    let reported = labels.groups.len() == 3;
    let _ = write!(out, "{:<16} {:>12}", "Platform", "Total Pairs");
    if reported {
        for code in REPORTED_CODES {
            let _ = write!(out, " {code:>6}");
        }
    }
    let _ = writeln!(out, " {:>16}", "Total Disrupted");
    for (s, t) in report.disruption.iter().enumerate() {
        let _ = write!(out, "{:<16} {:>12}", labels.platforms[s], t.total_pairs);
        if reported {
            for code in REPORTED_CODES {
                let _ = write!(out, " {:>6}", t.count(code));
            }
        }
        let _ = writeln!(out, " {:>16}", t.total_disrupted);
    }
    out
}
