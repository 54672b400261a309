//! Dense symmetric linear algebra and seedable random streams.
//!
//! Every stochastic routine in the crate draws from a [`RngStream`], a
//! ChaCha8 generator keyed by `(seed, stream-id)`. Two streams with the same
//! pair produce the same sequence on every platform; distinct stream ids give
//! independent sequences, which is how chains and per-group kernels stay
//! reproducible when run in parallel.

use std::fmt;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution, Gamma, StandardNormal};

use crate::error::{Error, Result};

/// Square symmetric matrix stored densely in row-major order.
#[derive(Clone, PartialEq)]
pub struct SymMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(dim: usize) -> Self {
        SymMatrix {
            dim,
            data: vec![0.0; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = 1.0;
        }
        m
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m.data[i * diag.len() + i] = d;
        }
        m
    }

    /// Builds a matrix from `f(i, j)` evaluated on the upper triangle and
    /// mirrored below the diagonal.
    pub fn from_upper_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in i..dim {
                let v = f(i, j);
                m.data[i * dim + j] = v;
                m.data[j * dim + i] = v;
            }
        }
        m
    }

    /// Builds a matrix from explicit rows; rejects ragged or asymmetric input.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != dim {
                return Err(Error::DimensionMismatch(format!(
                    "row {i} has {} entries, expected {dim}",
                    row.len()
                )));
            }
            data.extend_from_slice(row);
        }
        let m = SymMatrix { dim, data };
        for i in 0..dim {
            for j in 0..i {
                if m.get(i, j) != m.get(j, i) {
                    return Err(Error::InvalidParameter(format!(
                        "matrix is not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(m)
    }

    /// Wraps a row-major buffer, symmetrizing it as `(A + Aᵀ)/2`.
    pub fn from_row_major_symmetrized(dim: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch(format!(
                "buffer of length {} cannot hold a {dim}x{dim} matrix",
                data.len()
            )));
        }
        let mut m = SymMatrix { dim, data };
        for i in 0..dim {
            for j in 0..i {
                let v = 0.5 * (m.data[i * dim + j] + m.data[j * dim + i]);
                m.data[i * dim + j] = v;
                m.data[j * dim + i] = v;
            }
        }
        Ok(m)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    /// Sets both `(i, j)` and `(j, i)`.
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.data[i * self.dim + j] = value;
        self.data[j * self.dim + i] = value;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub(crate) fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn diag(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.get(i, i)).collect()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs_diff(&self, other: &SymMatrix) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn max_asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.dim {
            for j in 0..i {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }

    /// Dense product `self · other` (not symmetric in general).
    pub fn matmul(&self, other: &SymMatrix) -> Vec<f64> {
        let n = self.dim;
        assert_eq!(n, other.dim);
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out[i * n + j] += a * other.data[k * n + j];
                }
            }
        }
        out
    }

    pub fn mat_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.dim)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }
}

impl fmt::Debug for SymMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.to_rows()).finish()
    }
}

/// Lower-triangular Cholesky factor `L` with `L·Lᵀ = A`.
#[derive(Clone, Debug)]
pub struct Cholesky {
    dim: usize,
    lower: Vec<f64>,
}

/// In-place Cholesky of a row-major `n×n` buffer. On success the lower
/// triangle holds `L` and the strict upper triangle is zeroed.
pub(crate) fn cholesky_in_place(a: &mut [f64], n: usize) -> Result<()> {
    for j in 0..n {
        let row_j = &mut a[j * n..(j + 1) * n];
        let d = row_j[j] - row_j[..j].iter().map(|v| v * v).sum::<f64>();
        if !(d > 0.0) || !d.is_finite() {
            return Err(Error::NotPositiveDefinite { pivot: j, value: d });
        }
        let d = d.sqrt();
        row_j[j] = d;
        for v in &mut row_j[j + 1..] {
            *v = 0.0;
        }
        let (done, rest) = a.split_at_mut((j + 1) * n);
        let row_j = &done[j * n..j * n + j];
        for row_i in rest.chunks_exact_mut(n) {
            let s: f64 = row_i[..j].iter().zip(row_j).map(|(x, y)| x * y).sum();
            row_i[j] = (row_i[j] - s) / d;
        }
    }
    Ok(())
}

/// Solves `L y = b` in place for a row-major lower-triangular `L`.
pub(crate) fn solve_lower_in_place(l: &[f64], n: usize, b: &mut [f64]) {
    for i in 0..n {
        let row = &l[i * n..i * n + i];
        let s: f64 = row.iter().zip(&b[..i]).map(|(a, y)| a * y).sum();
        b[i] = (b[i] - s) / l[i * n + i];
    }
}

/// Solves `Lᵀ x = y` in place for a row-major lower-triangular `L`.
pub(crate) fn solve_upper_in_place(l: &[f64], n: usize, y: &mut [f64]) {
    for i in (0..n).rev() {
        let xi = y[i] / l[i * n + i];
        y[i] = xi;
        let row = &l[i * n..i * n + i];
        for (yk, lik) in y[..i].iter_mut().zip(row) {
            *yk -= lik * xi;
        }
    }
}

impl Cholesky {
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.lower[i * self.dim + j]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim)
            .map(|i| self.lower[i * self.dim..(i + 1) * self.dim].to_vec())
            .collect()
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        solve_lower_in_place(&self.lower, self.dim, &mut x);
        solve_upper_in_place(&self.lower, self.dim, &mut x);
        x
    }

    pub fn log_det(&self) -> f64 {
        2.0 * (0..self.dim).map(|i| self.get(i, i).ln()).sum::<f64>()
    }

    pub fn inverse(&self) -> SymMatrix {
        let n = self.dim;
        let mut out = vec![0.0; n * n];
        let mut col = vec![0.0; n];
        for j in 0..n {
            col.iter_mut().for_each(|v| *v = 0.0);
            col[j] = 1.0;
            solve_lower_in_place(&self.lower, n, &mut col);
            solve_upper_in_place(&self.lower, n, &mut col);
            for i in 0..n {
                out[i * n + j] = col[i];
            }
        }
        SymMatrix::from_row_major_symmetrized(n, out).expect("square buffer")
    }

    /// Returns `L·Lᵀ`.
    pub fn reconstruct(&self) -> SymMatrix {
        let n = self.dim;
        SymMatrix::from_upper_fn(n, |i, j| {
            (0..=i.min(j)).map(|k| self.get(i, k) * self.get(j, k)).sum()
        })
    }
}

pub fn cholesky(m: &SymMatrix) -> Result<Cholesky> {
    let mut lower = m.data.clone();
    cholesky_in_place(&mut lower, m.dim)?;
    Ok(Cholesky { dim: m.dim, lower })
}

pub fn pd_inverse(m: &SymMatrix) -> Result<SymMatrix> {
    Ok(cholesky(m)?.inverse())
}

/// A ChaCha8 stream identified by `(seed, stream-id)`.
#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    stream: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        RngStream { seed, stream, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream
    }

    /// Derives an independent stream from this one's seed; `sub` must be
    /// below 2¹⁶ and distinct per consumer.
    pub fn substream(&self, sub: u64) -> RngStream {
        debug_assert!(sub < (1 << 16));
        RngStream::new(self.seed, (self.stream << 16) | sub)
    }

    pub fn uniform(&mut self) -> f64 {
        // 53 random mantissa bits in [0, 1).
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in the open interval (0, 1).
    pub fn uniform_open(&mut self) -> f64 {
        loop {
            let u = self.uniform();
            if u > 0.0 {
                return u;
            }
        }
    }

    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.uniform() < p
    }

    pub fn standard_normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.rng)
    }

    pub fn index(&mut self, len: usize) -> usize {
        assert!(len > 0);
        ((self.uniform() * len as f64) as usize).min(len - 1)
    }

    pub fn gamma(&mut self, shape: f64, rate: f64) -> Result<f64> {
        sample_gamma(shape, rate, self)
    }

    pub fn beta(&mut self, a: f64, b: f64) -> Result<f64> {
        let dist = Beta::new(a, b)
            .map_err(|e| Error::InvalidParameter(format!("Beta({a}, {b}): {e}")))?;
        Ok(dist.sample(&mut self.rng))
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.rng.fill_bytes(dest)
    }

    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> std::result::Result<(), rand::Error> {
        self.rng.try_fill_bytes(dest)
    }
}

/// Draws from `Gamma(shape, rate)`, mean `shape / rate`.
pub fn sample_gamma(shape: f64, rate: f64, rng: &mut RngStream) -> Result<f64> {
    if !(shape > 0.0 && shape.is_finite() && rate > 0.0 && rate.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "Gamma requires positive shape and rate, got ({shape}, {rate})"
        )));
    }
    let dist = Gamma::new(shape, 1.0 / rate)
        .map_err(|e| Error::InvalidParameter(format!("Gamma({shape}, {rate}): {e}")))?;
    Ok(dist.sample(&mut rng.rng))
}

/// Draws from `N(mean, cov)` as `mean + L z` with `cov = L Lᵀ`.
pub fn sample_mvn(mean: &[f64], cov: &SymMatrix, rng: &mut RngStream) -> Result<Vec<f64>> {
    if mean.len() != cov.dim() {
        return Err(Error::DimensionMismatch(format!(
            "mean has length {}, covariance is {}x{}",
            mean.len(),
            cov.dim(),
            cov.dim()
        )));
    }
    let chol = cholesky(cov)?;
    let n = cov.dim();
    let z: Vec<f64> = (0..n).map(|_| rng.standard_normal()).collect();
    Ok((0..n)
        .map(|i| mean[i] + (0..=i).map(|k| chol.get(i, k) * z[k]).sum::<f64>())
        .collect())
}

/// Draws from `N(A⁻¹ b, A⁻¹)` given the Cholesky factor of `A` in
/// `a_lower` (row-major). `b` is overwritten with the draw.
pub(crate) fn sample_mvn_canonical_in_place(
    a_lower: &[f64],
    n: usize,
    b: &mut [f64],
    noise: &mut [f64],
    rng: &mut RngStream,
) {
    solve_lower_in_place(a_lower, n, b);
    for (bi, zi) in b.iter_mut().zip(noise.iter_mut()) {
        *zi = rng.standard_normal();
        *bi += *zi;
    }
    // L⁻ᵀ(L⁻¹ b + z) = A⁻¹ b + L⁻ᵀ z
    solve_upper_in_place(a_lower, n, b);
}
