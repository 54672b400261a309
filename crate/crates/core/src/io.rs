//! Files on disk: dataset manifests and CSV data, posterior summaries (MPP
//! matrices, edge lists, GraphML, similarity and run metadata as JSON) and
//! simulated ground truth.
//!
//! Every JSON document carries a `schema` string; readers reject unknown
//! schemas. Matrices are CSV files whose header row holds the variable names.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::data::{DataMatrix, Dataset, Preprocess};
use crate::error::{Error, Result};
use crate::fit::{FitOptions, FitResult};
use crate::graph::{pair_count, pairs, Graph};
use crate::numerics::SymMatrix;
use crate::sampler::{Hyperparameters, KernelTallies};
use crate::selection::{median_model, PosteriorSummary};
use crate::simulation::{GroundTruth, SimulationScenario};

pub const MANIFEST_SCHEMA: &str = "mpggm-manifest/1";
pub const SUMMARY_SCHEMA: &str = "mpggm-summary/1";
pub const SIMILARITY_SCHEMA: &str = "mpggm-similarity/1";
pub const RUN_SCHEMA: &str = "mpggm-run/1";
pub const TRUTH_SCHEMA: &str = "mpggm-truth/1";

fn default_manifest_schema() -> String {
    MANIFEST_SCHEMA.into()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetManifest {
    #[serde(default = "default_manifest_schema")]
    pub schema: String,
    pub platforms: Vec<ManifestPlatform>,
    #[serde(default)]
    pub options: ManifestOptions,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestPlatform {
    pub name: String,
    pub groups: Vec<ManifestGroup>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestGroup {
    pub name: String,
    /// Relative paths are resolved against the manifest's directory.
    pub csv_path: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ManifestOptions {
    pub center: bool,
    pub standardize: bool,
}

impl Default for ManifestOptions {
    fn default() -> Self {
        ManifestOptions {
            center: true,
            standardize: false,
        }
    }
}

fn check_schema(found: &str, expected: &str, path: &Path) -> Result<()> {
    if found != expected {
        return Err(Error::Schema(format!(
            "{} has schema '{found}', expected '{expected}'",
            path.display()
        )));
    }
    Ok(())
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

fn csv_reader(path: &Path) -> Result<csv::Reader<fs::File>> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(file))
}

/// Reads a numeric CSV with a header row. Rows are reported 1-based with the
/// header as row 1; columns 1-based.
pub fn read_numeric_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut reader = csv_reader(path)?;
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let row_no = idx + 2;
        let record = record.map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            row: row_no,
            column: 0,
            message: e.to_string(),
        })?;
        if record.len() != header.len() {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                row: row_no,
                column: record.len().min(header.len()) + 1,
                message: format!("row has {} fields, header has {}", record.len(), header.len()),
            });
        }
        let values = record
            .iter()
            .enumerate()
            .map(|(c, cell)| match cell.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(Error::Parse {
                    path: path.to_path_buf(),
                    row: row_no,
                    column: c + 1,
                    message: format!("'{cell}' is not a finite number"),
                }),
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(values);
    }
    Ok((header, rows))
}

/// Writes a header row and numeric rows; values use the shortest decimal
/// form that reads back to the same double.
pub fn write_numeric_csv(path: &Path, header: &[String], rows: &[Vec<f64>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for row in rows {
        w.write_record(row.iter().map(|v| format!("{v:?}")))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn read_square_csv(path: &Path) -> Result<(Vec<String>, SymMatrix)> {
    let (header, rows) = read_numeric_csv(path)?;
    if rows.len() != header.len() {
        return Err(Error::Schema(format!(
            "{} holds {} rows for {} columns, expected a square matrix",
            path.display(),
            rows.len(),
            header.len()
        )));
    }
    let m = SymMatrix::from_rows(&rows)
        .map_err(|e| Error::Schema(format!("{}: {e}", path.display())))?;
    Ok((header, m))
}

pub fn read_manifest(path: &Path) -> Result<DatasetManifest> {
    let manifest: DatasetManifest = read_json(path)?;
    check_schema(&manifest.schema, MANIFEST_SCHEMA, path)?;
    Ok(manifest)
}

/// Loads every CSV of a manifest and reduces it to sufficient statistics.
pub fn load_dataset(manifest_path: &Path) -> Result<Dataset> {
    let manifest = read_manifest(manifest_path)?;
    let base = manifest_path.parent().unwrap_or(Path::new("."));
    if manifest.platforms.is_empty() {
        return Err(Error::Schema("manifest lists no platforms".into()));
    }
    let group_names: Vec<String> = manifest.platforms[0].groups.iter().map(|g| g.name.clone()).collect();
    if group_names.is_empty() {
        return Err(Error::Schema("manifest lists no groups".into()));
    }
    let mut platform_names = Vec::new();
    let mut variables = Vec::new();
    let mut matrices = Vec::new();
    for platform in &manifest.platforms {
        let names: Vec<&str> = platform.groups.iter().map(|g| g.name.as_str()).collect();
        if names != group_names {
            return Err(Error::Schema(format!(
                "platform '{}' has groups {names:?}, expected {group_names:?}",
                platform.name
            )));
        }
        let mut header: Option<Vec<String>> = None;
        let mut cells = Vec::new();
        for group in &platform.groups {
            let path = resolve(base, &group.csv_path);
            let (h, rows) = read_numeric_csv(&path)?;
            match &header {
                None => header = Some(h.clone()),
                Some(prev) if *prev != h => {
                    return Err(Error::Schema(format!(
                        "{} has column headers that differ from the other groups of platform '{}'",
                        path.display(),
                        platform.name
                    )))
                }
                _ => {}
            }
            if rows.len() < 2 {
                return Err(Error::EmptyGroup {
                    platform: platform.name.clone(),
                    group: group.name.clone(),
                    n: rows.len(),
                });
            }
            let m = DataMatrix::new(rows.len(), h.len(), rows.concat())?;
            log::debug!(
                "loaded {}: n = {}, p = {}",
                path.display(),
                m.rows(),
                m.cols()
            );
            cells.push(m);
        }
        platform_names.push(platform.name.clone());
        variables.push(header.unwrap_or_default());
        matrices.push(cells);
    }
    Dataset::from_matrices(
        platform_names,
        group_names,
        variables,
        matrices,
        Preprocess {
            center: manifest.options.center,
            standardize: manifest.options.standardize,
        },
    )
}

/// Platform, group and variable names attached to a summary.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Labels {
    pub platforms: Vec<String>,
    pub groups: Vec<String>,
    pub variables: Vec<Vec<String>>,
}

impl Labels {
    pub fn from_dataset(data: &Dataset) -> Self {
        Labels {
            platforms: data.platforms.iter().map(|p| p.name.clone()).collect(),
            groups: data.group_names.clone(),
            variables: data.platforms.iter().map(|p| p.variables.clone()).collect(),
        }
    }

    /// Generic names for a shape without a dataset.
    pub fn generic(p: &[usize], groups: usize) -> Self {
        Labels {
            platforms: (1..=p.len()).map(|s| format!("platform{s}")).collect(),
            groups: (1..=groups).map(|k| format!("group{k}")).collect(),
            variables: p
                .iter()
                .map(|&ps| (1..=ps).map(|i| format!("V{i}")).collect())
                .collect(),
        }
    }
}

/// Everything recorded about a run besides the posterior itself.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub schema: String,
    pub version: String,
    pub seed: u64,
    pub chains: usize,
    pub iterations: usize,
    pub burnin: usize,
    pub thinning: usize,
    pub hyperparameters: Hyperparameters,
    pub acceptance: KernelTallies,
    pub acceptance_rates: AcceptanceRates,
    /// Between-chain MPP correlation; absent for single-chain runs.
    pub chain_agreement: Option<f64>,
    pub pd_checks: u64,
    pub pd_failures: u64,
}

impl RunMetadata {
    pub fn from_fit(options: &FitOptions, result: &FitResult) -> Self {
        RunMetadata {
            schema: RUN_SCHEMA.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            seed: options.seed,
            chains: options.chains,
            iterations: options.iterations,
            burnin: options.burnin,
            thinning: options.thinning,
            hyperparameters: options.hyperparameters.clone(),
            acceptance: result.tallies.clone(),
            acceptance_rates: AcceptanceRates::from(&result.tallies),
            chain_agreement: result.agreement,
            pd_checks: result.traces.iter().map(|t| t.pd_checks).sum(),
            pd_failures: result.pd_failures(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AcceptanceRates {
    pub theta_between: Option<f64>,
    pub theta_within: Option<f64>,
    pub nu: Option<f64>,
    pub w: Option<f64>,
    pub phi_between: Option<f64>,
    pub phi_within: Option<f64>,
}

impl From<&KernelTallies> for AcceptanceRates {
    fn from(t: &KernelTallies) -> Self {
        AcceptanceRates {
            theta_between: t.theta_between.rate(),
            theta_within: t.theta_within.rate(),
            nu: t.nu.rate(),
            w: t.w.rate(),
            phi_between: t.phi_between.rate(),
            phi_within: t.phi_within.rate(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct CellFiles {
    platform: String,
    group: String,
    mpp: String,
    edges: String,
    graphml: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct SummaryIndex {
    schema: String,
    labels: Labels,
    records: usize,
    threshold: f64,
    cells: Vec<Vec<CellFiles>>,
    similarity: String,
    run: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct PairSamples {
    a: String,
    b: String,
    samples: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct PairMpp {
    a: String,
    b: String,
    mpp: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct PlatformSimilarity {
    platform: String,
    gamma_mpp: Vec<Vec<f64>>,
    theta_samples: Vec<PairSamples>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct SimilarityFile {
    schema: String,
    groups: Vec<String>,
    platforms: Vec<PlatformSimilarity>,
    /// One entry per platform pair.
    zeta_mpp: Vec<PairMpp>,
    phi_samples: Vec<PairSamples>,
}

/// File-name-safe form of a label.
fn slug(name: &str) -> String {
    let s: String = name
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect();
    if s.is_empty() {
        "_".into()
    } else {
        s
    }
}

fn xml_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(c),
        }
    }
    out
}

/// GraphML export of a selected graph with an `mpp` weight on every edge.
pub fn graphml(graph: &Graph, variables: &[String], mpp: &SymMatrix, name: &str) -> String {
    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    out.push_str("<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n");
    out.push_str("  <key id=\"label\" for=\"node\" attr.name=\"label\" attr.type=\"string\"/>\n");
    out.push_str("  <key id=\"mpp\" for=\"edge\" attr.name=\"mpp\" attr.type=\"double\"/>\n");
    out.push_str(&format!(
        "  <graph id=\"{}\" edgedefault=\"undirected\">\n",
        xml_escape(name)
    ));
    for (i, v) in variables.iter().enumerate() {
        out.push_str(&format!(
            "    <node id=\"n{i}\"><data key=\"label\">{}</data></node>\n",
            xml_escape(v)
        ));
    }
    for (i, j) in graph.edges() {
        out.push_str(&format!(
            "    <edge source=\"n{i}\" target=\"n{j}\"><data key=\"mpp\">{:?}</data></edge>\n",
            mpp.get(i, j)
        ));
    }
    out.push_str("  </graph>\n</graphml>\n");
    out
}

fn check_labels(summary: &PosteriorSummary, labels: &Labels) -> Result<()> {
    let p: Vec<usize> = labels.variables.iter().map(Vec::len).collect();
    if p != summary.p || labels.groups.len() != summary.groups || labels.platforms.len() != p.len() {
        return Err(Error::DimensionMismatch(format!(
            "labels describe p {p:?} with {} groups, summary has p {:?} with {} groups",
            labels.groups.len(),
            summary.p,
            summary.groups
        )));
    }
    Ok(())
}

fn pair_samples(names: &[String], samples: &[Vec<f64>]) -> Vec<PairSamples> {
    pairs(names.len())
        .zip(samples)
        .map(|((a, b), s)| PairSamples {
            a: names[a].clone(),
            b: names[b].clone(),
            samples: s.clone(),
        })
        .collect()
}

/// Writes the summary, similarity and run files into `out_dir` (created if
/// missing) and returns the path of the `summary.json` index.
pub fn write_results(
    summary: &PosteriorSummary,
    labels: &Labels,
    run: &RunMetadata,
    out_dir: &Path,
) -> Result<PathBuf> {
    check_labels(summary, labels)?;
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut cells = Vec::new();
    for (s, platform) in labels.platforms.iter().enumerate() {
        let vars = &labels.variables[s];
        let mut row = Vec::new();
        for (k, group) in labels.groups.iter().enumerate() {
            let stem = format!("{}_{}", slug(platform), slug(group));
            let files = CellFiles {
                platform: platform.clone(),
                group: group.clone(),
                mpp: format!("mpp_{stem}.csv"),
                edges: format!("edges_{stem}.csv"),
                graphml: format!("graph_{stem}.graphml"),
            };
            let mpp = &summary.edge_mpp[s][k];
            let graph = &summary.selected[s][k];
            write_numeric_csv(&out_dir.join(&files.mpp), vars, &mpp.to_rows())?;

            let edges_path = out_dir.join(&files.edges);
            let mut w = csv::Writer::from_path(&edges_path)?;
            w.write_record(["source", "target", "mpp"])?;
            for (i, j) in graph.edges() {
                w.write_record([vars[i].as_str(), vars[j].as_str(), &format!("{:?}", mpp.get(i, j))])?;
            }
            w.flush().map_err(|e| Error::io(&edges_path, e))?;

            let gml_path = out_dir.join(&files.graphml);
            fs::write(&gml_path, graphml(graph, vars, mpp, &stem)).map_err(|e| Error::io(&gml_path, e))?;
            row.push(files);
        }
        cells.push(row);
    }

    let similarity = SimilarityFile {
        schema: SIMILARITY_SCHEMA.into(),
        groups: labels.groups.clone(),
        platforms: labels
            .platforms
            .iter()
            .enumerate()
            .map(|(s, name)| PlatformSimilarity {
                platform: name.clone(),
                gamma_mpp: summary.gamma_mpp[s].to_rows(),
                theta_samples: pair_samples(&labels.groups, &summary.theta_samples[s]),
            })
            .collect(),
        zeta_mpp: pairs(labels.platforms.len())
            .map(|(a, b)| PairMpp {
                a: labels.platforms[a].clone(),
                b: labels.platforms[b].clone(),
                mpp: summary.zeta_mpp.get(a, b),
            })
            .collect(),
        phi_samples: pair_samples(&labels.platforms, &summary.phi_samples),
    };
    write_json(&out_dir.join("similarity.json"), &similarity)?;
    write_json(&out_dir.join("run.json"), run)?;

    let index = SummaryIndex {
        schema: SUMMARY_SCHEMA.into(),
        labels: labels.clone(),
        records: summary.records,
        threshold: summary.threshold,
        cells,
        similarity: "similarity.json".into(),
        run: "run.json".into(),
    };
    let index_path = out_dir.join("summary.json");
    write_json(&index_path, &index)?;
    Ok(index_path)
}

/// A summary read back from disk.
#[derive(Clone, Debug)]
pub struct LoadedSummary {
    pub labels: Labels,
    pub summary: PosteriorSummary,
    pub run: RunMetadata,
}

fn unpack_pairs(n: usize, items: Vec<PairSamples>, what: &str, path: &Path) -> Result<Vec<Vec<f64>>> {
    if items.len() != pair_count(n) {
        return Err(Error::Schema(format!(
            "{}: {} {what} entries, expected {}",
            path.display(),
            items.len(),
            pair_count(n)
        )));
    }
    Ok(items.into_iter().map(|p| p.samples).collect())
}

/// Reads a directory written by [`write_results`].
pub fn read_results(dir: &Path) -> Result<LoadedSummary> {
    let index_path = dir.join("summary.json");
    let index: SummaryIndex = read_json(&index_path)?;
    check_schema(&index.schema, SUMMARY_SCHEMA, &index_path)?;
    let labels = index.labels;
    let platforms = labels.platforms.len();
    let groups = labels.groups.len();
    if index.cells.len() != platforms || index.cells.iter().any(|r| r.len() != groups) {
        return Err(Error::Schema(format!(
            "{}: cell table does not match {platforms} platforms x {groups} groups",
            index_path.display()
        )));
    }
    let mut edge_mpp = Vec::new();
    for (s, row) in index.cells.iter().enumerate() {
        let mut mats = Vec::new();
        for cell in row {
            let path = dir.join(&cell.mpp);
            let (header, m) = read_square_csv(&path)?;
            if header != labels.variables[s] {
                return Err(Error::Schema(format!(
                    "{} header does not match the variables of platform '{}'",
                    path.display(),
                    labels.platforms[s]
                )));
            }
            mats.push(m);
        }
        edge_mpp.push(mats);
    }

    let sim_path = dir.join(&index.similarity);
    let sim: SimilarityFile = read_json(&sim_path)?;
    check_schema(&sim.schema, SIMILARITY_SCHEMA, &sim_path)?;
    if sim.platforms.len() != platforms || sim.zeta_mpp.len() != pair_count(platforms) {
        return Err(Error::Schema(format!(
            "{} does not match {platforms} platforms",
            sim_path.display()
        )));
    }
    let mut gamma_mpp = Vec::new();
    let mut theta_samples = Vec::new();
    for ps in sim.platforms {
        gamma_mpp.push(
            SymMatrix::from_rows(&ps.gamma_mpp)
                .map_err(|e| Error::Schema(format!("{}: {e}", sim_path.display())))?,
        );
        theta_samples.push(unpack_pairs(groups, ps.theta_samples, "theta", &sim_path)?);
    }
    let mut zeta_mpp = SymMatrix::zeros(platforms);
    for ((a, b), entry) in pairs(platforms).zip(&sim.zeta_mpp) {
        zeta_mpp.set(a, b, entry.mpp);
    }
    let phi_samples = unpack_pairs(platforms, sim.phi_samples, "phi", &sim_path)?;

    let run_path = dir.join(&index.run);
    let run: RunMetadata = read_json(&run_path)?;
    check_schema(&run.schema, RUN_SCHEMA, &run_path)?;

    let mut summary = PosteriorSummary {
        p: labels.variables.iter().map(Vec::len).collect(),
        groups,
        records: index.records,
        edge_mpp,
        threshold: index.threshold,
        selected: Vec::new(),
        gamma_mpp,
        zeta_mpp,
        theta_samples,
        phi_samples,
    };
    summary.selected = median_model(&summary, summary.threshold)?;
    Ok(LoadedSummary { labels, summary, run })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct TruthCell {
    platform: String,
    group: String,
    adjacency: String,
    precision: String,
    data: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct TruthIndex {
    schema: String,
    scenario: SimulationScenario,
    labels: Labels,
    cells: Vec<Vec<TruthCell>>,
    manifest: String,
}

/// Writes truth adjacencies, precisions and data CSVs plus a dataset
/// manifest. Returns the manifest path.
pub fn write_truth(truth: &GroundTruth, scenario: &SimulationScenario, out_dir: &Path) -> Result<PathBuf> {
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let p: Vec<usize> = truth.precision.iter().map(|ps| ps[0].dim()).collect();
    let labels = Labels::generic(&p, scenario.groups);
    let mut cells = Vec::new();
    let mut manifest_platforms = Vec::new();
    for (s, platform) in labels.platforms.iter().enumerate() {
        let vars = &labels.variables[s];
        let mut row = Vec::new();
        let mut groups = Vec::new();
        for (k, group) in labels.groups.iter().enumerate() {
            let stem = format!("{platform}_{group}");
            let cell = TruthCell {
                platform: platform.clone(),
                group: group.clone(),
                adjacency: format!("truth_adjacency_{stem}.csv"),
                precision: format!("truth_precision_{stem}.csv"),
                data: format!("data_{stem}.csv"),
            };
            let adj = &truth.adjacency[s][k];
            let adj_rows: Vec<Vec<f64>> = (0..adj.nodes())
                .map(|i| (0..adj.nodes()).map(|j| adj.has_edge(i, j) as u8 as f64).collect())
                .collect();
            write_numeric_csv(&out_dir.join(&cell.adjacency), vars, &adj_rows)?;
            write_numeric_csv(&out_dir.join(&cell.precision), vars, &truth.precision[s][k].to_rows())?;
            let m = &truth.data[s][k];
            let data_rows: Vec<Vec<f64>> = (0..m.rows()).map(|r| m.row(r).to_vec()).collect();
            write_numeric_csv(&out_dir.join(&cell.data), vars, &data_rows)?;
            groups.push(ManifestGroup {
                name: group.clone(),
                csv_path: PathBuf::from(&cell.data),
            });
            row.push(cell);
        }
        cells.push(row);
        manifest_platforms.push(ManifestPlatform {
            name: platform.clone(),
            groups,
        });
    }
    let manifest = DatasetManifest {
        schema: MANIFEST_SCHEMA.into(),
        platforms: manifest_platforms,
        options: ManifestOptions {
            center: true,
            standardize: false,
        },
    };
    let manifest_path = out_dir.join("manifest.json");
    write_json(&manifest_path, &manifest)?;
    write_json(
        &out_dir.join("truth.json"),
        &TruthIndex {
            schema: TRUTH_SCHEMA.into(),
            scenario: scenario.clone(),
            labels,
            cells,
            manifest: "manifest.json".into(),
        },
    )?;
    Ok(manifest_path)
}

/// True graphs `[s][k]` and their labels from a directory written by
/// [`write_truth`].
pub fn read_truth(dir: &Path) -> Result<(Labels, Vec<Vec<Graph>>)> {
    let index_path = dir.join("truth.json");
    let index: TruthIndex = read_json(&index_path)?;
    check_schema(&index.schema, TRUTH_SCHEMA, &index_path)?;
    let mut graphs = Vec::new();
    for row in &index.cells {
        let mut gs = Vec::new();
        for cell in row {
            let (_, m) = read_square_csv(&dir.join(&cell.adjacency))?;
            gs.push(Graph::from_upper_bits(
                m.dim(),
                pairs(m.dim()).map(|(i, j)| m.get(i, j) != 0.0),
            ));
        }
        graphs.push(gs);
    }
    Ok((index.labels, graphs))
}
