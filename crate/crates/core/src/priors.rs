//! Prior densities: the binary Markov random field that couples edge (or
//! group-relatedness) indicators, the Gamma spike-and-slab on coupling
//! strengths, the logistic-Beta prior on sparsity parameters, and the
//! normal mixture on precision off-diagonals.
//!
//! The MRF over `g ∈ {0,1}^B` has density
//!
//! ```text
//! p(g | ν, Θ) = exp(ν·1ᵀg + gᵀΘg) / C(ν, Θ)
//! ```
//!
//! with `Θ` symmetric, zero diagonal. The quadratic form uses the full matrix,
//! so each included pair `(k, m)` contributes `2·θ_km`. Normalizers are exact
//! sums over all `2^B` configurations.

use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::numerics::SymMatrix;

/// Largest MRF dimension for which the normalizer is enumerated.
pub const MAX_MRF_DIM: usize = 20;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

#[inline]
pub fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

#[inline]
pub fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

/// `ln(1 + eˣ)` without overflow.
#[inline]
pub fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

pub(crate) fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

#[inline]
pub fn normal_log_density(x: f64, sd: f64) -> f64 {
    let z = x / sd;
    -0.5 * z * z - sd.ln() - LN_SQRT_2PI
}

/// Sparsity and coupling of one MRF factor.
#[derive(Clone, Debug, PartialEq)]
pub struct MrfParams {
    sparsity: f64,
    coupling: SymMatrix,
}

impl MrfParams {
    pub fn new(sparsity: f64, coupling: SymMatrix) -> Result<Self> {
        validate_coupling(&coupling)?;
        if !sparsity.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "MRF sparsity must be finite, got {sparsity}"
            )));
        }
        Ok(MrfParams { sparsity, coupling })
    }

    /// Uncoupled MRF: independent `Bernoulli(logistic(sparsity))` coordinates.
    pub fn independent(sparsity: f64, dim: usize) -> Self {
        MrfParams {
            sparsity,
            coupling: SymMatrix::zeros(dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.coupling.dim()
    }

    pub fn sparsity(&self) -> f64 {
        self.sparsity
    }

    pub fn coupling(&self) -> &SymMatrix {
        &self.coupling
    }
}

pub(crate) fn validate_coupling(coupling: &SymMatrix) -> Result<()> {
    let b = coupling.dim();
    for i in 0..b {
        if coupling.get(i, i) != 0.0 {
            return Err(Error::InvalidParameter(format!(
                "coupling diagonal must be zero, entry ({i}, {i}) = {}",
                coupling.get(i, i)
            )));
        }
        for j in 0..i {
            let v = coupling.get(i, j);
            if !(v >= 0.0) || !v.is_finite() || v != coupling.get(j, i) {
                return Err(Error::InvalidParameter(format!(
                    "coupling entry ({i}, {j}) = {v} must be finite, nonnegative and symmetric"
                )));
            }
        }
    }
    Ok(())
}

/// `gᵀΘg` for a configuration encoded as a bitmask (bit `k` = coordinate `k`).
#[inline]
pub fn quadratic_form(coupling: &SymMatrix, mask: u32) -> f64 {
    let b = coupling.dim();
    let mut acc = 0.0;
    for k in 0..b {
        if mask >> k & 1 == 0 {
            continue;
        }
        for m in k + 1..b {
            if mask >> m & 1 == 1 {
                acc += coupling.get(k, m);
            }
        }
    }
    2.0 * acc
}

fn mask_of(g: &[bool]) -> u32 {
    g.iter()
        .enumerate()
        .fold(0u32, |acc, (k, &b)| acc | ((b as u32) << k))
}

fn check_dim(b: usize) -> Result<()> {
    if b > MAX_MRF_DIM {
        Err(Error::DimensionTooLarge(b))
    } else {
        Ok(())
    }
}

/// `ln C(ν, Θ)` by enumeration of all `2^B` configurations.
pub fn mrf_log_normalizer(params: &MrfParams) -> Result<f64> {
    let b = params.dim();
    check_dim(b)?;
    let terms: Vec<f64> = (0..1u32 << b)
        .map(|mask| {
            params.sparsity * mask.count_ones() as f64 + quadratic_form(&params.coupling, mask)
        })
        .collect();
    Ok(log_sum_exp(&terms))
}

/// `C(ν, Θ) = Σ_g exp(ν·1ᵀg + gᵀΘg)`.
pub fn mrf_normalizer(params: &MrfParams) -> Result<f64> {
    mrf_log_normalizer(params).map(f64::exp)
}

pub fn mrf_log_density(g: &[bool], params: &MrfParams) -> Result<f64> {
    if g.len() != params.dim() {
        return Err(Error::DimensionMismatch(format!(
            "configuration has {} coordinates, MRF has {}",
            g.len(),
            params.dim()
        )));
    }
    let mask = mask_of(g);
    let unnorm =
        params.sparsity * mask.count_ones() as f64 + quadratic_form(&params.coupling, mask);
    Ok(unnorm - mrf_log_normalizer(params)?)
}

/// Log-odds of `g_idx = 1` given the remaining coordinates, listed in index
/// order with `idx` skipped.
pub fn mrf_conditional_odds(idx: usize, g_others: &[bool], params: &MrfParams) -> Result<f64> {
    let b = params.dim();
    if idx >= b {
        return Err(Error::IndexOutOfRange { index: idx, len: b });
    }
    if g_others.len() + 1 != b {
        return Err(Error::DimensionMismatch(format!(
            "expected {} conditioning coordinates, got {}",
            b - 1,
            g_others.len()
        )));
    }
    let others = (0..b).filter(|&m| m != idx);
    let coupled: f64 = others
        .zip(g_others)
        .filter(|(_, &on)| on)
        .map(|(m, _)| params.coupling.get(idx, m))
        .sum();
    Ok(params.sparsity + 2.0 * coupled)
}

/// Normalizer table for a fixed coupling matrix, grouped by configuration
/// size: entry `h` holds `ln Σ_{|g|=h} exp(gᵀΘg)`, so that
/// `ln C(ν, Θ) = logsumexp_h (ν·h + entry_h)` costs `B + 1` terms.
#[derive(Clone, Debug)]
pub struct MrfTable {
    by_size: Vec<f64>,
}

impl MrfTable {
    pub fn new(coupling: &SymMatrix) -> Result<Self> {
        let b = coupling.dim();
        check_dim(b)?;
        let mut buckets: Vec<Vec<f64>> = vec![Vec::new(); b + 1];
        for mask in 0..1u32 << b {
            buckets[mask.count_ones() as usize].push(quadratic_form(coupling, mask));
        }
        Ok(MrfTable {
            by_size: buckets.iter().map(|t| log_sum_exp(t)).collect(),
        })
    }

    pub fn log_normalizer(&self, sparsity: f64) -> f64 {
        let mut max = f64::NEG_INFINITY;
        for (h, &w) in self.by_size.iter().enumerate() {
            max = max.max(sparsity * h as f64 + w);
        }
        let s: f64 = self
            .by_size
            .iter()
            .enumerate()
            .map(|(h, &w)| (sparsity * h as f64 + w - max).exp())
            .sum();
        max + s.ln()
    }
}

/// Gamma slab of a spike-and-slab prior (shape/rate parameterization).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpikeSlabGamma {
    pub shape: f64,
    pub rate: f64,
}

impl SpikeSlabGamma {
    pub fn new(shape: f64, rate: f64) -> Result<Self> {
        if !(shape > 0.0 && rate > 0.0 && shape.is_finite() && rate.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "Gamma slab needs positive shape and rate, got ({shape}, {rate})"
            )));
        }
        Ok(SpikeSlabGamma { shape, rate })
    }

    pub fn mean(&self) -> f64 {
        self.shape / self.rate
    }

    pub fn slab_log_density(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return f64::NEG_INFINITY;
        }
        self.shape * self.rate.ln() - ln_gamma(self.shape) + (self.shape - 1.0) * x.ln()
            - self.rate * x
    }
}

/// Log-density of `(1−γ)δ₀ + γ·Gamma(shape, rate)`; the spike contributes a
/// point mass with log-density 0 at exactly zero.
pub fn spike_slab_log_density(value: f64, indicator: bool, prior: &SpikeSlabGamma) -> Result<f64> {
    match (indicator, value) {
        (false, v) if v == 0.0 => Ok(0.0),
        (false, v) => Err(Error::InconsistentState(format!(
            "indicator is 0 but value is {v}"
        ))),
        (true, v) if v > 0.0 => Ok(prior.slab_log_density(v)),
        (true, v) => Err(Error::InconsistentState(format!(
            "indicator is 1 but value is {v}"
        ))),
    }
}

/// Prior on an MRF sparsity parameter `x` under which `logistic(x) ~ Beta(a, b)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogisticBeta {
    pub a: f64,
    pub b: f64,
}

impl LogisticBeta {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "logistic-Beta prior needs positive (a, b), got ({a}, {b})"
            )));
        }
        Ok(LogisticBeta { a, b })
    }

    /// Prior mean of `logistic(x)`.
    pub fn mean_probability(&self) -> f64 {
        self.a / (self.a + self.b)
    }

    pub fn ln_beta(&self) -> f64 {
        ln_gamma(self.a) + ln_gamma(self.b) - ln_gamma(self.a + self.b)
    }
}

pub fn logistic_beta_log_density(x: f64, prior: &LogisticBeta) -> f64 {
    prior.a * x - (prior.a + prior.b) * softplus(x) - prior.ln_beta()
}

/// Normal mixture component for a precision off-diagonal: `N(0, ν1²)` in the
/// slab, `N(0, ν0²)` in the spike.
pub fn omega_edge_log_density(omega: f64, slab: bool, nu0: f64, nu1: f64) -> Result<f64> {
    if !(nu0 > 0.0 && nu0 < nu1) {
        return Err(Error::InvalidParameter(format!(
            "need 0 < nu0 < nu1, got nu0 = {nu0}, nu1 = {nu1}"
        )));
    }
    Ok(normal_log_density(omega, if slab { nu1 } else { nu0 }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    // Oracle: brute-force weights, independent of log-sum-exp and the
    // bitmask quadratic form used above.
    fn brute_weight(g: &[bool], nu: f64, theta: &[Vec<f64>]) -> f64 {
        let b = g.len();
        let mut e = 0.0;
        for k in 0..b {
            if g[k] {
                e += nu;
            }
            for m in 0..b {
                if g[k] && g[m] {
                    e += theta[k][m];
                }
            }
        }
        e.exp()
    }

    fn all_configs(b: usize) -> Vec<Vec<bool>> {
        (0..1usize << b)
            .map(|mask| (0..b).map(|k| mask >> k & 1 == 1).collect())
            .collect()
    }

    fn brute_normalizer(nu: f64, theta: &[Vec<f64>]) -> f64 {
        all_configs(theta.len())
            .iter()
            .map(|g| brute_weight(g, nu, theta))
            .sum()
    }

    fn params_from(nu: f64, theta: &[Vec<f64>]) -> MrfParams {
        MrfParams::new(nu, SymMatrix::from_rows(theta).unwrap()).unwrap()
    }

    fn coupling_strategy(max_b: usize) -> impl Strategy<Value = (f64, Vec<Vec<f64>>)> {
        (1..=max_b).prop_flat_map(|b| {
            (
                -3.0..3.0f64,
                prop::collection::vec(0.0..1.5f64, b * (b - 1) / 2),
            )
                .prop_map(move |(nu, upper)| {
                    let mut theta = vec![vec![0.0; b]; b];
                    let mut it = upper.into_iter();
                    for k in 0..b {
                        for m in k + 1..b {
                            let v = it.next().unwrap();
                            theta[k][m] = v;
                            theta[m][k] = v;
                        }
                    }
                    (nu, theta)
                })
        })
    }

    #[test]
    fn normalizer_examples() {
        assert_abs_diff_eq!(
            mrf_normalizer(&MrfParams::independent(0.0, 1)).unwrap(),
            2.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            mrf_normalizer(&MrfParams::independent(0.0, 3)).unwrap(),
            8.0,
            epsilon = 1e-12
        );
        let ln2 = 2f64.ln();
        let p = params_from(0.0, &[vec![0.0, ln2], vec![ln2, 0.0]]);
        assert_abs_diff_eq!(mrf_normalizer(&p).unwrap(), 7.0, epsilon = 1e-12);
        assert_abs_diff_eq!(
            mrf_log_density(&[true, true], &p).unwrap(),
            (4.0f64 / 7.0).ln(),
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            mrf_log_density(&[false; 3], &MrfParams::independent(0.0, 3)).unwrap(),
            (1.0f64 / 8.0).ln(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn normalizer_rejects_large_dimension() {
        let p = MrfParams::independent(0.0, 21);
        assert!(matches!(mrf_normalizer(&p), Err(Error::DimensionTooLarge(21))));
    }

    #[test]
    fn coupling_validation() {
        let bad_diag = SymMatrix::from_diag(&[1.0, 0.0]);
        assert!(MrfParams::new(0.0, bad_diag).is_err());
        let negative = SymMatrix::from_rows(&[vec![0.0, -0.1], vec![-0.1, 0.0]]).unwrap();
        assert!(MrfParams::new(0.0, negative).is_err());
    }

    #[test]
    fn conditional_odds_examples() {
        let p = MrfParams::independent(0.0, 3);
        assert_eq!(mrf_conditional_odds(0, &[true, false], &p).unwrap(), 0.0);

        let theta = vec![
            vec![0.0, 1.0, 1.0],
            vec![1.0, 0.0, 0.0],
            vec![1.0, 0.0, 0.0],
        ];
        // Coordinate 0 is coupled to both others; both are on.
        let p = params_from(0.0, &theta);
        let lo = mrf_conditional_odds(0, &[true, true], &p).unwrap();
        assert_abs_diff_eq!(lo, 4.0, epsilon = 1e-15);
        assert_abs_diff_eq!(logistic(lo), 0.982_013_790_037_908_5, epsilon = 1e-12);

        let p = MrfParams::independent(-2.0, 3);
        for others in [[false, false], [true, false], [true, true]] {
            let lo = mrf_conditional_odds(2, &others, &p).unwrap();
            assert_abs_diff_eq!(logistic(lo), 0.119_202_922_022_117_57, epsilon = 1e-12);
        }
        assert!(matches!(
            mrf_conditional_odds(3, &[true, true], &p),
            Err(Error::IndexOutOfRange { index: 3, len: 3 })
        ));
    }

    proptest! {
        #[test]
        fn density_sums_to_one((nu, theta) in coupling_strategy(6)) {
            let p = params_from(nu, &theta);
            let total: f64 = all_configs(theta.len())
                .iter()
                .map(|g| mrf_log_density(g, &p).unwrap().exp())
                .sum();
            prop_assert!((total - 1.0).abs() < 1e-12);
        }

        #[test]
        fn normalizer_matches_brute_force((nu, theta) in coupling_strategy(6)) {
            let p = params_from(nu, &theta);
            let brute = brute_normalizer(nu, &theta);
            let ours = mrf_normalizer(&p).unwrap();
            prop_assert!(((ours - brute) / brute).abs() < 1e-12);
            let table = MrfTable::new(p.coupling()).unwrap();
            prop_assert!((table.log_normalizer(nu) - brute.ln()).abs() < 1e-12);
        }

        #[test]
        fn conditional_odds_match_enumeration((nu, theta) in coupling_strategy(6)) {
            let p = params_from(nu, &theta);
            let b = theta.len();
            for g in all_configs(b) {
                for idx in 0..b {
                    let mut on = g.clone();
                    on[idx] = true;
                    let mut off = g.clone();
                    off[idx] = false;
                    let w1 = brute_weight(&on, nu, &theta);
                    let w0 = brute_weight(&off, nu, &theta);
                    let exact = w1 / (w1 + w0);
                    let others: Vec<bool> = (0..b).filter(|&m| m != idx).map(|m| g[m]).collect();
                    let lo = mrf_conditional_odds(idx, &others, &p).unwrap();
                    prop_assert!((logistic(lo) - exact).abs() < 1e-12);
                }
            }
        }

        #[test]
        fn uncoupled_density_factorizes(nu in -4.0..4.0f64, b in 1usize..7, mask in 0u32..64) {
            let g: Vec<bool> = (0..b).map(|k| mask >> k & 1 == 1).collect();
            let p = MrfParams::independent(nu, b);
            let ones = g.iter().filter(|&&x| x).count() as f64;
            let factorized = ones * nu - b as f64 * softplus(nu);
            prop_assert!((mrf_log_density(&g, &p).unwrap() - factorized).abs() < 1e-12);
        }
    }

    #[test]
    fn spike_slab_examples() {
        let prior = SpikeSlabGamma::new(1.0, 9.0).unwrap();
        assert_eq!(spike_slab_log_density(0.0, false, &prior).unwrap(), 0.0);
        assert_abs_diff_eq!(
            spike_slab_log_density(1.0, true, &prior).unwrap(),
            9f64.ln() - 9.0,
            epsilon = 1e-12
        );
        assert!(matches!(
            spike_slab_log_density(0.5, false, &prior),
            Err(Error::InconsistentState(_))
        ));
        assert!(SpikeSlabGamma::new(0.0, 1.0).is_err());
    }

    #[test]
    fn slab_integrates_to_one() {
        // Composite Simpson on [0, 60/rate] after the slab has decayed.
        for (shape, rate) in [(1.0, 9.0), (4.0, 5.0), (2.5, 1.0), (1.0, 1.0)] {
            let prior = SpikeSlabGamma::new(shape, rate).unwrap();
            let upper = 60.0 / rate;
            let n = 200_000;
            let h = upper / n as f64;
            let f = |x: f64| if x == 0.0 {
                if shape == 1.0 { rate } else { 0.0 }
            } else {
                spike_slab_log_density(x, true, &prior).unwrap().exp()
            };
            let mut acc = f(0.0) + f(upper);
            for i in 1..n {
                let w = if i % 2 == 1 { 4.0 } else { 2.0 };
                acc += w * f(i as f64 * h);
            }
            let integral = acc * h / 3.0;
            assert!((integral - 1.0).abs() < 1e-6, "shape {shape} rate {rate}: {integral}");
        }
    }

    #[test]
    fn logistic_beta_examples() {
        let flat = LogisticBeta::new(1.0, 1.0).unwrap();
        assert_abs_diff_eq!(
            logistic_beta_log_density(0.0, &flat),
            0.25f64.ln(),
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(LogisticBeta::new(1.0, 7.0).unwrap().mean_probability(), 0.125);
        assert_abs_diff_eq!(LogisticBeta::new(1.0, 19.0).unwrap().mean_probability(), 0.05);
    }

    #[test]
    fn logistic_beta_is_beta_under_logistic_map() {
        // density of q = logistic(x) is p(x)/(q(1-q)); compare with Beta(a, b).
        let prior = LogisticBeta::new(2.0, 5.0).unwrap();
        for &x in &[-3.0, -0.5, 0.0, 1.2, 4.0] {
            let q = logistic(x);
            let from_x = logistic_beta_log_density(x, &prior) - (q * (1.0 - q)).ln();
            let beta = (prior.a - 1.0) * q.ln() + (prior.b - 1.0) * (1.0 - q).ln() - prior.ln_beta();
            assert_abs_diff_eq!(from_x, beta, epsilon = 1e-10);
        }
    }

    #[test]
    fn logistic_beta_mean_by_quadrature() {
        // E[logistic(x)] under the prior, integrated over x.
        for (a, b, target) in [(1.0, 7.0, 0.125), (1.0, 19.0, 0.05)] {
            let prior = LogisticBeta::new(a, b).unwrap();
            let (lo, hi, n) = (-60.0, 20.0, 400_000);
            let h = (hi - lo) / n as f64;
            let mut mass = 0.0;
            let mut mean = 0.0;
            for i in 0..n {
                let x = lo + (i as f64 + 0.5) * h;
                let d = logistic_beta_log_density(x, &prior).exp();
                mass += d * h;
                mean += logistic(x) * d * h;
            }
            assert!((mass - 1.0).abs() < 1e-6);
            assert!((mean - target).abs() < 1e-6);
        }
    }

    #[test]
    fn omega_edge_examples() {
        assert_abs_diff_eq!(
            omega_edge_log_density(0.0, true, 0.02, 1.0).unwrap(),
            -0.918_938_533_204_672_8,
            epsilon = 1e-12
        );
        let spike = omega_edge_log_density(0.0, false, 0.02, 1.0).unwrap();
        assert_abs_diff_eq!(spike, 2.993_084_472_223_473, epsilon = 1e-12);
        let ratio = (omega_edge_log_density(0.0, true, 0.02, 1.0).unwrap() - spike).exp();
        assert_abs_diff_eq!(ratio, 0.02, epsilon = 1e-12);
        assert!(omega_edge_log_density(0.0, true, 1.0, 1.0).is_err());
    }
}
