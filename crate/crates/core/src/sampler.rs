//! Exact sampling of the discretized determinantal process.
//!
//! Spectral two-phase algorithm: keep eigenvector `j` with probability
//! `lambda_j`, then pick points one at a time from the projection onto the
//! kept span, eliminating one direction per pick and re-orthonormalizing.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::concentration::ConcentrationOperator;
use crate::geometry::hyp_dist;
use crate::kernels::KernelSummary;
use crate::{Disc, Point};

/// One sample of the process.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointConfiguration {
    pub points: Vec<Point>,
    /// Grid node index of each point, in selection order.
    pub indices: Vec<usize>,
    pub region: Disc,
    pub seed: u64,
    pub kernel: KernelSummary,
}

/// Generator for stream `seed`.
pub fn stream(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Draws one configuration; deterministic in `(op, seed)`.
pub fn sample(op: &ConcentrationOperator, seed: u64) -> PointConfiguration {
    let mut rng = stream(seed);
    let indices = sample_indices(op.eigenvalues(), op.eigenvectors(), &mut rng);
    let nodes = &op.grid().nodes;
    PointConfiguration {
        points: indices.iter().map(|&i| nodes[i]).collect(),
        indices,
        region: *op.region(),
        seed,
        kernel: op.spec().summary(),
    }
}

/// Spectral sampler on a finite ground set given eigenpairs of the kernel.
pub fn sample_indices<R: Rng>(eigenvalues: &[f64], vectors: &DMatrix<Complex64>, rng: &mut R) -> Vec<usize> {
    let keep: Vec<usize> = eigenvalues
        .iter()
        .enumerate()
        .filter_map(|(j, &l)| (rng.random::<f64>() < l).then_some(j))
        .collect();
    let n = vectors.nrows();
    let mut cols: Vec<Vec<Complex64>> = keep.iter().map(|&j| vectors.column(j).iter().copied().collect()).collect();
    let mut picked = Vec::with_capacity(cols.len());
    while !cols.is_empty() {
        let weights: Vec<f64> = (0..n).map(|i| cols.iter().map(|c| c[i].norm_sqr()).sum()).collect();
        let total: f64 = weights.iter().sum();
        let mut u = rng.random::<f64>() * total;
        let mut pick = n - 1;
        for (i, &w) in weights.iter().enumerate() {
            if u < w {
                pick = i;
                break;
            }
            u -= w;
        }
        picked.push(pick);
        // eliminate the column with the largest entry at the picked row
        let pivot = (0..cols.len())
            .max_by(|&a, &b| cols[a][pick].norm().total_cmp(&cols[b][pick].norm()))
            .unwrap();
        let pcol = cols.swap_remove(pivot);
        let pv = pcol[pick];
        for c in cols.iter_mut() {
            let f = c[pick] / pv;
            for (x, y) in c.iter_mut().zip(&pcol) {
                *x -= f * y;
            }
            c[pick] = Complex64::new(0.0, 0.0);
        }
        gram_schmidt(&mut cols);
    }
    picked
}

fn gram_schmidt(cols: &mut [Vec<Complex64>]) {
    for k in 0..cols.len() {
        let (done, rest) = cols.split_at_mut(k);
        let c = &mut rest[0];
        for q in done.iter() {
            let dot: Complex64 = q.iter().zip(c.iter()).map(|(a, b)| a.conj() * b).sum();
            for (x, y) in c.iter_mut().zip(q) {
                *x -= dot * y;
            }
        }
        let norm = c.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        for x in c.iter_mut() {
            *x /= norm;
        }
    }
}

/// Histogram with uniform bins on `[0, width * counts.len())`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Histogram {
    pub width: f64,
    pub counts: Vec<f64>,
}

/// Monte Carlo statistics over independent samples.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BatchStats {
    pub samples: usize,
    pub mean: f64,
    pub var: f64,
    pub mean_se: f64,
    pub var_se: f64,
    /// `counts[k]` = number of samples with `k` points.
    pub counts: Vec<u64>,
    /// Average number of point pairs per sample in each hyperbolic distance bin.
    pub pair_hist: Histogram,
    /// The same for independent points with the diagonal intensities:
    /// `sum_{i<j} M_ii M_jj` per bin.
    pub poisson_pairs: Histogram,
}

/// Default pair-distance binning.
pub const PAIR_BIN_WIDTH: f64 = 0.05;
pub const PAIR_BINS: usize = 40;

/// Runs `n_samples` samples with seeds `base_seed + k` and reduces in index order.
pub fn batch_stats(op: &ConcentrationOperator, n_samples: usize, base_seed: u64) -> BatchStats {
    let nodes = &op.grid().nodes;
    let bin = |d: f64| -> Option<usize> {
        let b = (d / PAIR_BIN_WIDTH) as usize;
        (b < PAIR_BINS).then_some(b)
    };
    let draws: Vec<(usize, Vec<f64>)> = (0..n_samples)
        .into_par_iter()
        .map(|k| {
            let cfg = sample(op, base_seed.wrapping_add(k as u64));
            let mut h = vec![0.0; PAIR_BINS];
            for a in 0..cfg.indices.len() {
                for b in a + 1..cfg.indices.len() {
                    if let Some(i) = bin(hyp_dist(nodes[cfg.indices[a]], nodes[cfg.indices[b]])) {
                        h[i] += 1.0;
                    }
                }
            }
            (cfg.indices.len(), h)
        })
        .collect();

    let nf = n_samples as f64;
    let mut counts = vec![0u64; 1];
    let mut pair = vec![0.0; PAIR_BINS];
    for (c, h) in &draws {
        if *c >= counts.len() {
            counts.resize(c + 1, 0);
        }
        counts[*c] += 1;
        for (p, v) in pair.iter_mut().zip(h) {
            *p += v / nf;
        }
    }
    let mean = draws.iter().map(|d| d.0 as f64).sum::<f64>() / nf;
    let m2 = draws.iter().map(|d| (d.0 as f64 - mean).powi(2)).sum::<f64>() / nf;
    let m4 = draws.iter().map(|d| (d.0 as f64 - mean).powi(4)).sum::<f64>() / nf;
    let var = m2 * nf / (nf - 1.0);

    let diag: Vec<f64> = (0..nodes.len()).map(|i| op.matrix()[(i, i)].re).collect();
    let poisson = (0..nodes.len())
        .into_par_iter()
        .map(|i| {
            let mut h = vec![0.0; PAIR_BINS];
            for j in i + 1..nodes.len() {
                if let Some(b) = bin(hyp_dist(nodes[i], nodes[j])) {
                    h[b] += diag[i] * diag[j];
                }
            }
            h
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(vec![0.0; PAIR_BINS], |mut acc, h| {
            for (a, v) in acc.iter_mut().zip(h) {
                *a += v;
            }
            acc
        });

    BatchStats {
        samples: n_samples,
        mean,
        var,
        mean_se: (var / nf).sqrt(),
        var_se: ((m4 - m2 * m2).max(0.0) / nf).sqrt(),
        counts,
        pair_hist: Histogram { width: PAIR_BIN_WIDTH, counts: pair },
        poisson_pairs: Histogram { width: PAIR_BIN_WIDTH, counts: poisson },
    }
}

/// Law of a sum of independent Bernoulli(`p_j`) variables.
pub fn poisson_binomial(probs: &[f64]) -> Vec<f64> {
    let mut law = vec![1.0];
    for &p in probs {
        let mut next = vec![0.0; law.len() + 1];
        for (k, &q) in law.iter().enumerate() {
            next[k] += q * (1.0 - p);
            next[k + 1] += q * p;
        }
        law = next;
    }
    law
}

/// Total variation distance between the empirical count law and `law`.
pub fn total_variation(counts: &[u64], law: &[f64]) -> f64 {
    let n: u64 = counts.iter().sum();
    let len = counts.len().max(law.len());
    0.5 * (0..len)
        .map(|k| {
            let e = counts.get(k).copied().unwrap_or(0) as f64 / n as f64;
            (e - law.get(k).copied().unwrap_or(0.0)).abs()
        })
        .sum::<f64>()
}
