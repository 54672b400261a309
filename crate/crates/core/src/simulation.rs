//! Synthetic ground truth: scale-free and AR(2) networks, "similar" groups
//! obtained by partial rewiring, precision matrices with a prescribed
//! support, and Gaussian samples drawn from them.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::data::{DataMatrix, Dataset, Preprocess};
use crate::error::{Error, Result};
use crate::graph::{pairs, Graph};
use crate::numerics::{cholesky, pd_inverse, RngStream, SymMatrix};

/// Preferential attachment with one edge per arriving node. Node `v` joins
/// an existing node `u` with probability proportional to `deg(u)^alpha + 1`.
pub fn gen_scale_free(p: usize, alpha: f64, rng: &mut RngStream) -> Result<Graph> {
    if p < 2 {
        return Err(Error::InvalidParameter(format!(
            "scale-free graph needs at least 2 nodes, got {p}"
        )));
    }
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "power-law exponent must be positive, got {alpha}"
        )));
    }
    let mut g = Graph::empty(p);
    let mut deg = vec![0usize; p];
    g.set_edge(0, 1, true);
    deg[0] = 1;
    deg[1] = 1;
    let mut weights = Vec::with_capacity(p);
    for v in 2..p {
        weights.clear();
        weights.extend(deg[..v].iter().map(|&d| (d as f64).powf(alpha) + 1.0));
        let total: f64 = weights.iter().sum();
        let mut target = rng.uniform() * total;
        let mut u = v - 1;
        for (idx, w) in weights.iter().enumerate() {
            if target < *w {
                u = idx;
                break;
            }
            target -= w;
        }
        g.set_edge(u, v, true);
        deg[u] += 1;
        deg[v] += 1;
    }
    Ok(g)
}

/// Banded precision: 1 on the diagonal, 0.5 on the first and 0.4 on the
/// second off-diagonal.
pub fn gen_ar2(p: usize) -> Result<SymMatrix> {
    if p < 3 {
        return Err(Error::InvalidParameter(format!(
            "AR(2) precision needs at least 3 nodes, got {p}"
        )));
    }
    let m = SymMatrix::from_upper_fn(p, |i, j| match j - i {
        0 => 1.0,
        1 => 0.5,
        2 => 0.4,
        _ => 0.0,
    });
    cholesky(&m)?;
    Ok(m)
}

/// Number of base edges kept by [`perturb_similar`]: `⌈f·|E|⌉`.
pub fn shared_edge_count(edges: usize, share_fraction: f64) -> usize {
    // Guard against 0.9 * 40 = 36.000000000000004 style rounding.
    ((share_fraction * edges as f64 - 1e-9).ceil().max(0.0) as usize).min(edges)
}

/// Keeps `⌈f·|E|⌉` random edges of `base` and moves the others to random
/// non-edges, so the edge count is unchanged. When the graph is too dense to
/// move every dropped edge, the remainder stays where it was.
pub fn perturb_similar(base: &Graph, share_fraction: f64, rng: &mut RngStream) -> Result<Graph> {
    check_share(share_fraction)?;
    Ok(rewire(base, share_fraction, rng).0)
}

fn check_share(share_fraction: f64) -> Result<()> {
    if !(share_fraction > 0.0 && share_fraction <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "share fraction must lie in (0, 1], got {share_fraction}"
        )));
    }
    Ok(())
}

/// Returns the rewired graph and the `(dropped, added)` edge pairs.
fn rewire(
    base: &Graph,
    share_fraction: f64,
    rng: &mut RngStream,
) -> (Graph, Vec<((usize, usize), (usize, usize))>) {
    let mut edges: Vec<(usize, usize)> = base.edges().collect();
    let keep = shared_edge_count(edges.len(), share_fraction);
    if keep == edges.len() {
        return (base.clone(), Vec::new());
    }
    edges.shuffle(rng);
    let mut non_edges: Vec<(usize, usize)> = pairs(base.nodes())
        .filter(|&(i, j)| !base.has_edge(i, j))
        .collect();
    non_edges.shuffle(rng);
    let mut out = base.clone();
    let mut moves = Vec::new();
    for (&dropped, &added) in edges[keep..].iter().zip(&non_edges) {
        out.set_edge(dropped.0, dropped.1, false);
        out.set_edge(added.0, added.1, true);
        moves.push((dropped, added));
    }
    (out, moves)
}

/// Precision with support `adj`: off-diagonals start at `edge_value`, each
/// is divided by 1.5 times its row's absolute off-diagonal sum, and the
/// result is averaged with its transpose. If that matrix is not positive
/// definite, the smallest common shift of the diagonal that lifts its least
/// eigenvalue to [`MIN_EIGENVALUE`] is added. The support is unchanged.
pub fn adjacency_to_precision(adj: &Graph, edge_value: f64) -> Result<SymMatrix> {
    if !(edge_value != 0.0 && edge_value.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "edge value must be finite and nonzero, got {edge_value}"
        )));
    }
    let p = adj.nodes();
    let row_sums: Vec<f64> = (0..p)
        .map(|i| 1.5 * edge_value.abs() * adj.degree(i) as f64)
        .collect();
    let mut m = SymMatrix::identity(p);
    for (i, j) in adj.edges() {
        let v = 0.5 * (edge_value / row_sums[i] + edge_value / row_sums[j]);
        if v == 0.0 {
            return Err(Error::SupportLost(i, j));
        }
        m.set(i, j, v);
    }
    ensure_positive_definite(&mut m)?;
    Ok(m)
}

/// Least eigenvalue targeted when a generated precision must be shifted.
pub const MIN_EIGENVALUE: f64 = 0.1;

fn shifted(m: &SymMatrix, c: f64) -> SymMatrix {
    let mut out = m.clone();
    for i in 0..m.dim() {
        out.set(i, i, m.get(i, i) + c);
    }
    out
}

/// Leaves a positive definite `m` alone; otherwise adds `c·I` with `c`
/// found by bisection on Cholesky feasibility of `m + (c − MIN_EIGENVALUE)·I`.
fn ensure_positive_definite(m: &mut SymMatrix) -> Result<()> {
    if cholesky(m).is_ok() {
        return Ok(());
    }
    // Gershgorin: this shift makes every row strictly dominant.
    let mut hi = (0..m.dim())
        .map(|i| {
            let r: f64 = (0..m.dim()).filter(|&j| j != i).map(|j| m.get(i, j).abs()).sum();
            r - m.get(i, i)
        })
        .fold(0.0, f64::max)
        + 2.0 * MIN_EIGENVALUE;
    let mut lo = 0.0;
    for _ in 0..64 {
        let mid = 0.5 * (lo + hi);
        if cholesky(&shifted(m, mid - MIN_EIGENVALUE)).is_ok() {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    *m = shifted(m, hi);
    cholesky(m)?;
    Ok(())
}

/// Support of a precision matrix, exact zeros excluded.
pub fn support(omega: &SymMatrix) -> Graph {
    let mut g = Graph::empty(omega.dim());
    for (i, j) in pairs(omega.dim()) {
        g.set_edge(i, j, omega.get(i, j) != 0.0);
    }
    g
}

/// `n` draws from `N(0, Ω⁻¹)` per precision, each column centered and
/// scaled to unit sample standard deviation.
pub fn sample_dataset(precisions: &[SymMatrix], n: usize, rng: &mut RngStream) -> Result<Vec<DataMatrix>> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "need at least 2 samples per group, got {n}"
        )));
    }
    precisions
        .iter()
        .map(|omega| {
            let p = omega.dim();
            let chol = cholesky(&pd_inverse(omega)?)?;
            let mut values = Vec::with_capacity(n * p);
            let mut z = vec![0.0; p];
            for _ in 0..n {
                z.iter_mut().for_each(|v| *v = rng.standard_normal());
                values.extend((0..p).map(|i| (0..=i).map(|k| chol.get(i, k) * z[k]).sum::<f64>()));
            }
            let mut m = DataMatrix::new(n, p, values)?;
            m.standardize_columns();
            Ok(m)
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NetworkFamily {
    ScaleFree,
    Ar2,
}

/// Named similarity layouts.
///
/// `setting-one`: on the first platform all groups but the last form one
/// similar block and the last group stands alone; on every other platform
/// all groups are similar. `setting-two`: every group is its own block.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LayoutPreset {
    SettingOne,
    SettingTwo,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SimilarityLayout {
    Preset(LayoutPreset),
    /// `blocks[s]` partitions the 0-based group indices of platform `s`.
    Blocks(Vec<Vec<Vec<usize>>>),
}

fn default_n() -> usize {
    100
}
fn default_share() -> f64 {
    0.9
}
fn default_alpha() -> f64 {
    1.0
}
fn default_edge_value() -> f64 {
    0.5
}
fn default_seed() -> u64 {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationScenario {
    pub family: NetworkFamily,
    pub p: usize,
    #[serde(default = "default_n")]
    pub n: usize,
    pub platforms: usize,
    pub groups: usize,
    pub similarity_layout: SimilarityLayout,
    #[serde(default = "default_share")]
    pub share_fraction: f64,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_edge_value")]
    pub edge_value: f64,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

impl SimulationScenario {
    /// Two platforms, three groups, `p = 40`, `n = 100`.
    pub fn preset(family: NetworkFamily, layout: LayoutPreset, seed: u64) -> Self {
        SimulationScenario {
            family,
            p: 40,
            n: default_n(),
            platforms: 2,
            groups: 3,
            similarity_layout: SimilarityLayout::Preset(layout),
            share_fraction: default_share(),
            alpha: default_alpha(),
            edge_value: default_edge_value(),
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.p < 3 {
            return Err(Error::Config(format!("p must be at least 3, got {}", self.p)));
        }
        if self.platforms == 0 || self.groups == 0 {
            return Err(Error::Config("need at least one platform and one group".into()));
        }
        if self.n < 2 {
            return Err(Error::Config(format!("n must be at least 2, got {}", self.n)));
        }
        check_share(self.share_fraction).map_err(|e| Error::Config(e.to_string()))?;
        let blocks = self.blocks();
        if blocks.len() != self.platforms {
            return Err(Error::Config(format!(
                "layout describes {} platforms, scenario has {}",
                blocks.len(),
                self.platforms
            )));
        }
        for (s, platform) in blocks.iter().enumerate() {
            let mut seen = vec![false; self.groups];
            for &k in platform.iter().flatten() {
                if k >= self.groups || seen[k] {
                    return Err(Error::Config(format!(
                        "layout of platform {s} is not a partition of the {} groups",
                        self.groups
                    )));
                }
                seen[k] = true;
            }
            if seen.iter().any(|&b| !b) || platform.iter().any(Vec::is_empty) {
                return Err(Error::Config(format!(
                    "layout of platform {s} is not a partition of the {} groups",
                    self.groups
                )));
            }
        }
        Ok(())
    }

    /// Similarity blocks per platform.
    pub fn blocks(&self) -> Vec<Vec<Vec<usize>>> {
        let k = self.groups;
        match &self.similarity_layout {
            SimilarityLayout::Blocks(b) => b.clone(),
            SimilarityLayout::Preset(LayoutPreset::SettingTwo) => {
                vec![(0..k).map(|g| vec![g]).collect(); self.platforms]
            }
            SimilarityLayout::Preset(LayoutPreset::SettingOne) => (0..self.platforms)
                .map(|s| {
                    if s == 0 && k > 1 {
                        vec![(0..k - 1).collect(), vec![k - 1]]
                    } else {
                        vec![(0..k).collect()]
                    }
                })
                .collect(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct GroundTruth {
    /// `adjacency[s][k]`.
    pub adjacency: Vec<Vec<Graph>>,
    pub precision: Vec<Vec<SymMatrix>>,
    pub data: Vec<Vec<DataMatrix>>,
}

impl GroundTruth {
    /// The sampled data as a sampler input. Columns are already
    /// standardized, so no further preprocessing is applied.
    pub fn dataset(&self) -> Result<Dataset> {
        let platforms = self.data.len();
        let groups = self.data.first().map_or(0, Vec::len);
        Dataset::from_matrices(
            (1..=platforms).map(|s| format!("platform{s}")).collect(),
            (1..=groups).map(|k| format!("group{k}")).collect(),
            self.precision
                .iter()
                .map(|ps| (1..=ps[0].dim()).map(|i| format!("V{i}")).collect())
                .collect(),
            self.data.clone(),
            Preprocess {
                center: false,
                standardize: false,
            },
        )
    }
}

fn base_network(
    scenario: &SimulationScenario,
    rng: &mut RngStream,
    first: bool,
) -> Result<(Graph, SymMatrix)> {
    match scenario.family {
        NetworkFamily::ScaleFree => {
            let g = gen_scale_free(scenario.p, scenario.alpha, rng)?;
            let omega = adjacency_to_precision(&g, scenario.edge_value)?;
            Ok((g, omega))
        }
        NetworkFamily::Ar2 => {
            let band = gen_ar2(scenario.p)?;
            if first {
                return Ok((support(&band), band));
            }
            // Independent AR(2) networks are relabelings of the band.
            let mut perm: Vec<usize> = (0..scenario.p).collect();
            perm.shuffle(rng);
            let omega = SymMatrix::from_upper_fn(scenario.p, |i, j| band.get(perm[i], perm[j]));
            Ok((support(&omega), omega))
        }
    }
}

fn similar_network(
    scenario: &SimulationScenario,
    base: &Graph,
    base_omega: &SymMatrix,
    rng: &mut RngStream,
) -> Result<(Graph, SymMatrix)> {
    let (g, moves) = rewire(base, scenario.share_fraction, rng);
    let omega = match scenario.family {
        NetworkFamily::ScaleFree => adjacency_to_precision(&g, scenario.edge_value)?,
        NetworkFamily::Ar2 => {
            // Moved edges carry their value to the new position.
            let mut omega = base_omega.clone();
            for ((a, b), (c, d)) in moves {
                let v = omega.get(a, b);
                omega.set(a, b, 0.0);
                omega.set(c, d, v);
            }
            ensure_positive_definite(&mut omega)?;
            omega
        }
    };
    Ok((g, omega))
}

/// Generates every network of the scenario and samples its data.
///
/// Random streams: platform `s` draws its networks from substream `1 + s`
/// and its data from substream `1001 + s` of the scenario seed.
pub fn build_scenario(scenario: &SimulationScenario) -> Result<GroundTruth> {
    scenario.validate()?;
    let root = RngStream::new(scenario.seed, 0);
    let blocks = scenario.blocks();
    let mut adjacency = Vec::with_capacity(scenario.platforms);
    let mut precision = Vec::with_capacity(scenario.platforms);
    let mut data = Vec::with_capacity(scenario.platforms);
    for (s, platform_blocks) in blocks.iter().enumerate() {
        let mut rng = root.substream(1 + s as u64);
        let mut graphs: Vec<Option<(Graph, SymMatrix)>> = vec![None; scenario.groups];
        for (b, block) in platform_blocks.iter().enumerate() {
            let (g, omega) = base_network(scenario, &mut rng, b == 0)?;
            for &k in &block[1..] {
                graphs[k] = Some(similar_network(scenario, &g, &omega, &mut rng)?);
            }
            graphs[block[0]] = Some((g, omega));
        }
        let (gs, omegas): (Vec<_>, Vec<_>) = graphs.into_iter().map(Option::unwrap).unzip();
        let mut data_rng = root.substream(1001 + s as u64);
        data.push(sample_dataset(&omegas, scenario.n, &mut data_rng)?);
        adjacency.push(gs);
        precision.push(omegas);
    }
    Ok(GroundTruth {
        adjacency,
        precision,
        data,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn scale_free_is_a_tree() {
        let mut rng = RngStream::new(3, 0);
        let g = gen_scale_free(2, 1.0, &mut rng).unwrap();
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![(0, 1)]);
        let g = gen_scale_free(40, 1.0, &mut rng).unwrap();
        assert_eq!(g.edge_count(), 39);
        assert!(gen_scale_free(1, 1.0, &mut rng).is_err());
        assert!(gen_scale_free(5, 0.0, &mut rng).is_err());
    }

    #[test]
    fn ar2_matches_band() {
        let m = gen_ar2(3).unwrap();
        assert_eq!(
            m.to_rows(),
            vec![vec![1.0, 0.5, 0.4], vec![0.5, 1.0, 0.5], vec![0.4, 0.5, 1.0]]
        );
        let big = gen_ar2(80).unwrap();
        for (i, j) in support(&big).edges() {
            assert!(j - i <= 2);
        }
        assert_eq!(support(&big).edge_count(), 79 + 78);
    }

    #[test]
    fn precision_of_single_edge() {
        let g = Graph::from_edges(2, &[(0, 1)]);
        let m = adjacency_to_precision(&g, 0.5).unwrap();
        assert_abs_diff_eq!(m.get(0, 1), 2.0 / 3.0, epsilon = 1e-15);
        assert_eq!(m.get(0, 0), 1.0);
        assert_eq!(adjacency_to_precision(&Graph::empty(4), 0.5).unwrap(), SymMatrix::identity(4));
    }

    #[test]
    fn perturb_counts() {
        let mut rng = RngStream::new(5, 0);
        let mut base = Graph::empty(20);
        for (i, j) in pairs(20).take(40) {
            base.set_edge(i, j, true);
        }
        let out = perturb_similar(&base, 0.9, &mut rng).unwrap();
        assert_eq!(out.edge_count(), 40);
        assert_eq!(base.overlap(&out), 36);
        assert_eq!(perturb_similar(&base, 1.0, &mut rng).unwrap(), base);
        assert!(perturb_similar(&base, 0.0, &mut rng).is_err());
    }

    #[test]
    fn setting_one_layout() {
        let sc = SimulationScenario::preset(NetworkFamily::ScaleFree, LayoutPreset::SettingOne, 1);
        assert_eq!(
            sc.blocks(),
            vec![vec![vec![0, 1], vec![2]], vec![vec![0, 1, 2]]]
        );
    }

    #[test]
    fn scenario_json_accepts_presets_and_blocks() {
        let sc: SimulationScenario = serde_json::from_str(
            r#"{"family":"ar2","p":10,"platforms":1,"groups":2,"similarity_layout":"setting-two"}"#,
        )
        .unwrap();
        assert_eq!(sc.n, 100);
        assert_eq!(sc.blocks(), vec![vec![vec![0], vec![1]]]);
        let sc: SimulationScenario = serde_json::from_str(
            r#"{"family":"scale-free","p":10,"platforms":1,"groups":2,"similarity_layout":[[[0,1]]]}"#,
        )
        .unwrap();
        sc.validate().unwrap();
        let bad: std::result::Result<SimulationScenario, _> = serde_json::from_str(
            r#"{"family":"lattice","p":10,"platforms":1,"groups":2,"similarity_layout":"setting-two"}"#,
        );
        assert!(bad.is_err());
    }
}
