//! In-memory datasets: one `n_sk × p_s` sample matrix per (platform, group),
//! reduced to its scatter matrix `XᵀX` for the sampler.

use crate::error::{Error, Result};
use crate::numerics::SymMatrix;

/// Row-major sample matrix, one row per subject.
#[derive(Clone, Debug, PartialEq)]
pub struct DataMatrix {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl DataMatrix {
    pub fn new(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} values cannot fill a {rows}x{cols} matrix",
                values.len()
            )));
        }
        Ok(DataMatrix { rows, cols, values })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut values = Vec::with_capacity(rows.len() * cols);
        for (r, row) in rows.iter().enumerate() {
            if row.len() != cols {
                return Err(Error::DimensionMismatch(format!(
                    "row {r} has {} columns, expected {cols}",
                    row.len()
                )));
            }
            values.extend_from_slice(row);
        }
        Ok(DataMatrix {
            rows: rows.len(),
            cols,
            values,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.values[r * self.cols + c]
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.values[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column_means(&self) -> Vec<f64> {
        let mut means = vec![0.0; self.cols];
        for r in 0..self.rows {
            for (m, v) in means.iter_mut().zip(self.row(r)) {
                *m += v;
            }
        }
        let n = self.rows.max(1) as f64;
        means.iter_mut().for_each(|m| *m /= n);
        means
    }

    pub fn center_columns(&mut self) {
        let means = self.column_means();
        for r in 0..self.rows {
            for (v, m) in self.values[r * self.cols..(r + 1) * self.cols]
                .iter_mut()
                .zip(&means)
            {
                *v -= m;
            }
        }
    }

    /// Sample standard deviation of each column (denominator `n − 1`).
    pub fn column_sds(&self) -> Vec<f64> {
        let means = self.column_means();
        let mut ss = vec![0.0; self.cols];
        for r in 0..self.rows {
            for ((s, v), m) in ss.iter_mut().zip(self.row(r)).zip(&means) {
                *s += (v - m) * (v - m);
            }
        }
        let denom = (self.rows.saturating_sub(1)).max(1) as f64;
        ss.iter().map(|s| (s / denom).sqrt()).collect()
    }

    /// Centers and scales every column to unit sample standard deviation.
    /// Constant columns are centered only.
    pub fn standardize_columns(&mut self) {
        self.center_columns();
        let sds = self.column_sds();
        for r in 0..self.rows {
            for (v, sd) in self.values[r * self.cols..(r + 1) * self.cols]
                .iter_mut()
                .zip(&sds)
            {
                if *sd > 0.0 {
                    *v /= sd;
                }
            }
        }
    }

    /// `XᵀX`.
    pub fn scatter(&self) -> SymMatrix {
        let p = self.cols;
        let mut acc = vec![0.0; p * p];
        for r in 0..self.rows {
            let row = self.row(r);
            for i in 0..p {
                let xi = row[i];
                for j in i..p {
                    acc[i * p + j] += xi * row[j];
                }
            }
        }
        SymMatrix::from_upper_fn(p, |i, j| acc[i * p + j])
    }
}

/// Sufficient statistics of one (platform, group) cell.
#[derive(Clone, Debug)]
pub struct GroupData {
    pub n: usize,
    pub scatter: SymMatrix,
}

#[derive(Clone, Debug)]
pub struct Platform {
    pub name: String,
    pub variables: Vec<String>,
    pub groups: Vec<GroupData>,
}

impl Platform {
    pub fn p(&self) -> usize {
        self.variables.len()
    }
}

#[derive(Clone, Debug)]
pub struct Dataset {
    pub group_names: Vec<String>,
    pub platforms: Vec<Platform>,
}

/// Options applied to raw matrices before they are reduced.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Preprocess {
    pub center: bool,
    pub standardize: bool,
}

impl Default for Preprocess {
    fn default() -> Self {
        Preprocess {
            center: true,
            standardize: false,
        }
    }
}

impl Dataset {
    /// Builds a dataset from raw matrices indexed `[platform][group]`.
    pub fn from_matrices(
        platform_names: Vec<String>,
        group_names: Vec<String>,
        variables: Vec<Vec<String>>,
        matrices: Vec<Vec<DataMatrix>>,
        preprocess: Preprocess,
    ) -> Result<Self> {
        if platform_names.len() != matrices.len() || variables.len() != matrices.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} platform names, {} variable lists, {} matrix lists",
                platform_names.len(),
                variables.len(),
                matrices.len()
            )));
        }
        let mut platforms = Vec::with_capacity(matrices.len());
        for ((name, vars), groups) in platform_names.into_iter().zip(variables).zip(matrices) {
            if groups.len() != group_names.len() {
                return Err(Error::Schema(format!(
                    "platform '{name}' has {} groups, expected {}",
                    groups.len(),
                    group_names.len()
                )));
            }
            let mut cells = Vec::with_capacity(groups.len());
            for (k, mut m) in groups.into_iter().enumerate() {
                if m.cols() != vars.len() && m.rows() > 0 {
                    return Err(Error::DimensionMismatch(format!(
                        "platform '{name}' group '{}' has {} columns, expected {}",
                        group_names[k],
                        m.cols(),
                        vars.len()
                    )));
                }
                if preprocess.standardize {
                    m.standardize_columns();
                } else if preprocess.center {
                    m.center_columns();
                }
                let scatter = if m.rows() == 0 {
                    SymMatrix::zeros(vars.len())
                } else {
                    m.scatter()
                };
                cells.push(GroupData {
                    n: m.rows(),
                    scatter,
                });
            }
            platforms.push(Platform {
                name,
                variables: vars,
                groups: cells,
            });
        }
        Ok(Dataset {
            group_names,
            platforms,
        })
    }

    /// A dataset without observations (`n_sk = 0`), so the sampler explores
    /// the prior.
    pub fn prior_only(p: &[usize], groups: usize) -> Self {
        Dataset {
            group_names: (1..=groups).map(|k| format!("group{k}")).collect(),
            platforms: p
                .iter()
                .enumerate()
                .map(|(s, &ps)| Platform {
                    name: format!("platform{}", s + 1),
                    variables: (1..=ps).map(|i| format!("V{i}")).collect(),
                    groups: (0..groups)
                        .map(|_| GroupData {
                            n: 0,
                            scatter: SymMatrix::zeros(ps),
                        })
                        .collect(),
                })
                .collect(),
        }
    }

    pub fn num_platforms(&self) -> usize {
        self.platforms.len()
    }

    pub fn num_groups(&self) -> usize {
        self.group_names.len()
    }

    pub fn p(&self, s: usize) -> usize {
        self.platforms[s].p()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.platforms.iter().map(Platform::p).collect()
    }

    pub fn cell(&self, s: usize, k: usize) -> &GroupData {
        &self.platforms[s].groups[k]
    }

    /// Sample correlation of a cell, read from its scatter matrix.
    pub fn correlation(&self, s: usize, k: usize) -> SymMatrix {
        let sc = &self.cell(s, k).scatter;
        SymMatrix::from_upper_fn(sc.dim(), |i, j| {
            if i == j {
                return 1.0;
            }
            let d = (sc.get(i, i) * sc.get(j, j)).sqrt();
            if d > 0.0 {
                sc.get(i, j) / d
            } else {
                0.0
            }
        })
    }
}
