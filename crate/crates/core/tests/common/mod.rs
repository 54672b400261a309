//! Independent oracles shared by the statistical tests and the acceptance
//! run: one-step χ² checks of the kernels, enumeration of the edge
//! conditionals, and brute-force graph statistics.

#![allow(dead_code)]

use std::collections::VecDeque;

use mpggm::graph::{pairs, Graph};
use mpggm::numerics::{RngStream, SymMatrix};
use mpggm::priors::{logistic, normal_log_density, MrfTable};
use mpggm::sampler::kernels::{
    mrf_log_likelihood, update_edge_vector, update_nu, update_phi_zeta, update_theta_gamma,
    update_w, IndicatorConfigs, KernelTallies, Tally,
};
use mpggm::sampler::{ChainState, Hyperparameters};
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Piecewise-constant approximation of a 1-d density on `[lo, hi]`, used
/// to draw exact-enough target samples and equal-probability bins.
struct Grid {
    lo: f64,
    h: f64,
    cdf: Vec<f64>,
}

impl Grid {
    fn new(log_density: impl Fn(f64) -> f64, lo: f64, hi: f64, cells: usize) -> (Self, f64) {
        let h = (hi - lo) / cells as f64;
        let logs: Vec<f64> = (0..cells).map(|c| log_density(lo + (c as f64 + 0.5) * h)).collect();
        let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut cdf = Vec::with_capacity(cells);
        let mut acc = 0.0;
        for l in &logs {
            acc += (l - max).exp();
            cdf.push(acc);
        }
        // Log of the total mass, so callers can weigh it against an atom.
        let log_mass = max + (acc * h).ln();
        cdf.iter_mut().for_each(|c| *c /= acc);
        (Grid { lo, h, cdf }, log_mass)
    }

    fn sample(&self, rng: &mut RngStream) -> f64 {
        let u = rng.uniform();
        let c = self.cdf.partition_point(|&v| v < u).min(self.cdf.len() - 1);
        self.lo + (c as f64 + rng.uniform()) * self.h
    }

    fn quantile(&self, prob: f64) -> f64 {
        let c = self.cdf.partition_point(|&v| v < prob).min(self.cdf.len() - 1);
        let prev = if c == 0 { 0.0 } else { self.cdf[c - 1] };
        let frac = (prob - prev) / (self.cdf[c] - prev);
        self.lo + (c as f64 + frac) * self.h
    }
}

fn chi_square_p(counts: &[u64], expected: &[f64]) -> f64 {
    let stat: f64 = counts
        .iter()
        .zip(expected)
        .map(|(&o, &e)| (o as f64 - e).powi(2) / e)
        .sum();
    let dist = ChiSquared::new((counts.len() - 1) as f64).unwrap();
    1.0 - dist.cdf(stat)
}

/// Draws from a target on `{0} ∪ (0, ∞)` with atom log-weight `log_atom`,
/// applies `step`, and returns the χ² p-value over the atom plus ten
/// equal-probability bins of the continuous part.
fn spike_slab_one_step(
    log_atom: f64,
    log_cont: impl Fn(f64) -> f64,
    hi: f64,
    mut step: impl FnMut(f64, &mut RngStream) -> f64,
    reps: usize,
    seed: u64,
) -> f64 {
    let (grid, log_mass) = Grid::new(log_cont, 0.0, hi, 200_000);
    let p_atom = logistic(log_atom - log_mass);
    let bins = 10;
    let edges: Vec<f64> = (1..bins).map(|b| grid.quantile(b as f64 / bins as f64)).collect();
    let mut rng = RngStream::new(seed, 99);
    let mut counts = vec![0u64; bins + 1];
    for _ in 0..reps {
        let start = if rng.uniform() < p_atom { 0.0 } else { grid.sample(&mut rng) };
        let next = step(start, &mut rng);
        if next == 0.0 {
            counts[0] += 1;
        } else {
            counts[1 + edges.partition_point(|&e| e < next)] += 1;
        }
    }
    let n = reps as f64;
    let mut expected = vec![n * p_atom];
    expected.extend(std::iter::repeat(n * (1.0 - p_atom) / bins as f64).take(bins));
    chi_square_p(&counts, &expected)
}

/// One-step test for a continuous 1-d target.
fn continuous_one_step(
    log_density: impl Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    mut step: impl FnMut(f64, &mut RngStream) -> f64,
    reps: usize,
    seed: u64,
) -> f64 {
    let (grid, _) = Grid::new(log_density, lo, hi, 200_000);
    let bins = 10;
    let edges: Vec<f64> = (1..bins).map(|b| grid.quantile(b as f64 / bins as f64)).collect();
    let mut rng = RngStream::new(seed, 98);
    let mut counts = vec![0u64; bins];
    for _ in 0..reps {
        let start = grid.sample(&mut rng);
        let next = step(start, &mut rng);
        counts[edges.partition_point(|&e| e < next)] += 1;
    }
    let expected = vec![reps as f64 / bins as f64; bins];
    chi_square_p(&counts, &expected)
}

fn gamma_log_density(x: f64, shape: f64, rate: f64) -> f64 {
    (shape - 1.0) * x.ln() - rate * x
}

/// χ² p-value of one θ/γ step started from its exact conditional.
pub fn theta_kernel_p() -> f64 {
    let hp = Hyperparameters::default();
    let mut state = ChainState::initial(&[5], 2, &hp);
    // Two groups with mostly shared edges, so the data favor positive θ.
    for (i, j) in [(0, 1), (1, 2), (2, 3), (0, 4)] {
        state.graphs[0][0].set_edge(i, j, true);
        state.graphs[0][1].set_edge(i, j, true);
    }
    state.graphs[0][1].set_edge(3, 4, true);
    state.nus[0] = (0..10).map(|p| -2.0 + 0.2 * p as f64).collect();
    state.ws[0] = -0.5;
    let edges = IndicatorConfigs::edges(&state.graphs[0]);
    let nus = state.nus[0].clone();
    let ll = |t: f64| {
        let mut theta = SymMatrix::zeros(2);
        theta.set(0, 1, t);
        mrf_log_likelihood(&edges, &nus, &theta).unwrap()
    };
    let slab = hp.theta_slab();
    let w = state.ws[0];
    let log_atom = (1.0 - logistic(w)).ln() + ll(0.0);
    let ln_norm = slab.shape * slab.rate.ln() - statrs::function::gamma::ln_gamma(slab.shape);
    let log_cont = |t: f64| logistic(w).ln() + ln_norm + gamma_log_density(t, slab.shape, slab.rate) + ll(t);

    let mut tallies = KernelTallies::default();
    let p = spike_slab_one_step(
        log_atom,
        log_cont,
        6.0,
        |start, rng| {
            state.thetas[0].set(0, 1, start);
            state.gammas[0].set_edge(0, 1, start != 0.0);
            update_theta_gamma(&mut state, 0, 0, 1, &edges, &hp, rng, &mut tallies).unwrap();
            state.thetas[0].get(0, 1)
        },
        40_000,
        11,
    );
    assert!(tallies.theta_between.accepted > 0 && tallies.theta_within.accepted > 0);
    p
}

pub fn phi_kernel_p() -> f64 {
    let hp = Hyperparameters::default();
    let mut state = ChainState::initial(&[3, 3], 3, &hp);
    state.gammas[0].set_edge(0, 1, true);
    state.gammas[1].set_edge(0, 1, true);
    state.gammas[0].set_edge(1, 2, true);
    state.gammas[1].set_edge(1, 2, true);
    state.thetas[0].set(0, 1, 0.3);
    state.thetas[1].set(0, 1, 0.2);
    state.thetas[0].set(1, 2, 0.1);
    state.thetas[1].set(1, 2, 0.4);
    state.ws = vec![-1.0, -2.0, 0.5];
    let configs = IndicatorConfigs::group_pairs(&state.gammas);
    let ws = state.ws.clone();
    let ll = |f: f64| {
        let mut phi = SymMatrix::zeros(2);
        phi.set(0, 1, f);
        mrf_log_likelihood(&configs, &ws, &phi).unwrap()
    };
    let slab = hp.phi_slab();
    let ln_norm = slab.shape * slab.rate.ln() - statrs::function::gamma::ln_gamma(slab.shape);
    let log_atom = (1.0 - hp.u).ln() + ll(0.0);
    let log_cont = |f: f64| hp.u.ln() + ln_norm + gamma_log_density(f, slab.shape, slab.rate) + ll(f);

    let mut tallies = KernelTallies::default();
    let p = spike_slab_one_step(
        log_atom,
        log_cont,
        8.0,
        |start, rng| {
            state.phi.set(0, 1, start);
            state.zetas.set_edge(0, 1, start != 0.0);
            update_phi_zeta(&mut state, 0, 1, &hp, rng, &mut tallies).unwrap();
            state.phi.get(0, 1)
        },
        40_000,
        12,
    );
    p
}

/// Log-density of `ν = logit(q)` for `q ~ Beta(a, b)`, up to a constant.
fn logistic_beta_log(nu: f64, a: f64, b: f64) -> f64 {
    let q = logistic(nu);
    a * q.ln() + b * (1.0 - q).ln()
}

pub fn nu_kernel_p() -> f64 {
    let hp = Hyperparameters::default();
    let mut state = ChainState::initial(&[2], 3, &hp);
    state.graphs[0][0].set_edge(0, 1, true);
    state.graphs[0][2].set_edge(0, 1, true);
    state.thetas[0].set(0, 2, 0.6);
    state.thetas[0].set(1, 2, 0.3);
    state.gammas[0].set_edge(0, 2, true);
    state.gammas[0].set_edge(1, 2, true);
    let edges = IndicatorConfigs::edges(&state.graphs[0]);
    let table = MrfTable::new(&state.thetas[0]).unwrap();
    let log_density = |nu: f64| logistic_beta_log(nu, hp.a, hp.b) + 2.0 * nu - table.log_normalizer(nu);
    let mut tally = Tally::default();
    let p = continuous_one_step(
        log_density,
        -30.0,
        12.0,
        |start, rng| {
            state.nus[0][0] = start;
            update_nu(&mut state, 0, 0, &edges, &table, &hp, rng, &mut tally).unwrap();
            state.nus[0][0]
        },
        40_000,
        13,
    );
    p
}

pub fn w_kernel_p() -> f64 {
    let hp = Hyperparameters::default();
    let mut state = ChainState::initial(&[2, 2, 2], 2, &hp);
    state.gammas[0].set_edge(0, 1, true);
    state.gammas[2].set_edge(0, 1, true);
    state.phi.set(0, 2, 0.7);
    state.phi.set(0, 1, 1.1);
    state.zetas.set_edge(0, 2, true);
    state.zetas.set_edge(0, 1, true);
    let configs = IndicatorConfigs::group_pairs(&state.gammas);
    let table = MrfTable::new(&state.phi).unwrap();
    let log_density = |w: f64| logistic_beta_log(w, hp.d, hp.f) + 2.0 * w - table.log_normalizer(w);
    let mut tally = Tally::default();
    let p = continuous_one_step(
        log_density,
        -30.0,
        12.0,
        |start, rng| {
            state.ws[0] = start;
            update_w(&mut state, 0, 1, &configs, &table, &hp, rng, &mut tally).unwrap();
            state.ws[0]
        },
        40_000,
        14,
    );
    p
}

/// Largest gap between edge-configuration frequencies over 10^5 Gibbs scans
/// at frozen Ω and the enumerated conditional distribution.
pub fn edge_gibbs_max_error() -> f64 {
    let hp = Hyperparameters::default();
    let omega_values = [0.04, 0.05, 0.035];
    let omegas: Vec<SymMatrix> = omega_values
        .iter()
        .map(|&v| SymMatrix::from_rows(&[vec![1.0, v], vec![v, 1.0]]).unwrap())
        .collect();
    let theta = SymMatrix::from_rows(&[
        vec![0.0, 0.5, 0.1],
        vec![0.5, 0.0, 0.3],
        vec![0.1, 0.3, 0.0],
    ])
    .unwrap();
    let nu = -0.3;
    let mut log_target = Vec::new();
    for mask in 0u32..8 {
        let mut lp = 0.0;
        for k in 0..3 {
            let on = mask >> k & 1 == 1;
            let sd = if on { hp.nu1 } else { hp.nu0 };
            lp += normal_log_density(omega_values[k], sd) + nu * on as u8 as f64;
            for m in k + 1..3 {
                if on && mask >> m & 1 == 1 {
                    lp += 2.0 * theta.get(k, m);
                }
            }
        }
        log_target.push(lp);
    }
    let max = log_target.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let z: f64 = log_target.iter().map(|l| (l - max).exp()).sum();
    let target: Vec<f64> = log_target.iter().map(|l| (l - max).exp() / z).collect();

    let mut graphs = vec![Graph::empty(2); 3];
    let mut rng = RngStream::new(23, 0);
    let scans = 100_000;
    let mut counts = [0u64; 8];
    for _ in 0..scans {
        update_edge_vector(&mut graphs, &omegas, 0, 1, nu, &theta, &hp, &mut rng);
        let mask = (0..3).fold(0usize, |acc, k| acc | ((graphs[k].has_edge(0, 1) as usize) << k));
        counts[mask] += 1;
    }
    counts
        .iter()
        .zip(&target)
        .map(|(&c, &t)| (c as f64 / scans as f64 - t).abs())
        .fold(0.0, f64::max)
}

/// Counts ordered triplets `(a, center, b)` with `a < b` both adjacent to
/// the center, and how many of them are closed.
pub fn brute_clustering(g: &Graph) -> f64 {
    let n = g.nodes();
    let (mut connected, mut closed) = (0usize, 0usize);
    for c in 0..n {
        for (a, b) in pairs(n) {
            if a != c && b != c && g.has_edge(a, c) && g.has_edge(b, c) {
                connected += 1;
                closed += g.has_edge(a, b) as usize;
            }
        }
    }
    if connected == 0 {
        0.0
    } else {
        closed as f64 / connected as f64
    }
}

fn distances(g: &Graph, src: usize) -> Vec<Option<usize>> {
    let mut d = vec![None; g.nodes()];
    d[src] = Some(0);
    let mut q = VecDeque::from([src]);
    while let Some(v) = q.pop_front() {
        for w in g.neighbors(v) {
            if d[w].is_none() {
                d[w] = Some(d[v].unwrap() + 1);
                q.push_back(w);
            }
        }
    }
    d
}

/// Enumerates every shortest path between each pair explicitly.
pub fn brute_betweenness(g: &Graph) -> Vec<f64> {
    let n = g.nodes();
    let dist: Vec<Vec<Option<usize>>> = (0..n).map(|s| distances(g, s)).collect();
    let mut credit = vec![0.0; n];
    for (s, t) in pairs(n) {
        let Some(len) = dist[s][t] else { continue };
        let mut paths: Vec<Vec<usize>> = Vec::new();
        let mut stack = vec![vec![s]];
        while let Some(path) = stack.pop() {
            let last = *path.last().unwrap();
            if last == t {
                paths.push(path);
                continue;
            }
            for w in g.neighbors(last) {
                if dist[s][w] == Some(path.len()) && dist[w][t].is_some_and(|d| d + path.len() == len) {
                    let mut next = path.clone();
                    next.push(w);
                    stack.push(next);
                }
            }
        }
        for path in &paths {
            for &v in &path[1..path.len() - 1] {
                credit[v] += 1.0 / paths.len() as f64;
            }
        }
    }
    let norm = if n > 2 { ((n - 1) * (n - 2)) as f64 / 2.0 } else { 1.0 };
    credit.iter().map(|c| c / norm).collect()
}

/// Largest deviation of the MRF density, normalizer (relative), normalizer
/// table and conditional log-odds from naive summation over `{0,1}^B`, over
/// `draws` random parameter sets for each `B` in `1..=6`.
pub fn mrf_enumeration_max_error(draws: usize, seed: u64) -> f64 {
    use mpggm::priors::{mrf_conditional_odds, mrf_log_density, mrf_normalizer, MrfParams};
    let mut rng = RngStream::new(seed, 0);
    let mut worst = 0.0f64;
    for b in 1..=6usize {
        for _ in 0..draws {
            let nu = -3.0 + 4.0 * rng.uniform();
            let mut theta = SymMatrix::zeros(b);
            for (k, m) in pairs(b) {
                if rng.uniform() < 0.6 {
                    theta.set(k, m, rng.uniform());
                }
            }
            let params = MrfParams::new(nu, theta.clone()).unwrap();
            let configs: Vec<Vec<bool>> = (0..1usize << b)
                .map(|mask| (0..b).map(|k| mask >> k & 1 == 1).collect())
                .collect();
            let weight = |g: &[bool]| {
                let mut e = 0.0;
                for k in 0..b {
                    if g[k] {
                        e += nu;
                    }
                    for m in 0..b {
                        if g[k] && g[m] && k != m {
                            e += theta.get(k, m);
                        }
                    }
                }
                e.exp()
            };
            let z: f64 = configs.iter().map(|g| weight(g)).sum();
            worst = worst.max((mrf_normalizer(&params).unwrap() - z).abs() / z);
            let table = MrfTable::new(&theta).unwrap();
            worst = worst.max((table.log_normalizer(nu) - z.ln()).abs());
            for g in &configs {
                let lp = (weight(g) / z).ln();
                worst = worst.max((mrf_log_density(g, &params).unwrap() - lp).abs());
                for idx in 0..b {
                    let mut on = g.clone();
                    on[idx] = true;
                    let mut off = g.clone();
                    off[idx] = false;
                    let expect = (weight(&on) / weight(&off)).ln();
                    let others: Vec<bool> = (0..b).filter(|&m| m != idx).map(|m| g[m]).collect();
                    let got = mrf_conditional_odds(idx, &others, &params).unwrap();
                    worst = worst.max((got - expect).abs());
                }
            }
        }
    }
    worst
}
