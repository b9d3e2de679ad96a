//! Independent dense reference computations shared by the integration tests.
#![allow(dead_code)]

use proxlp::model::{EnergyModel, Features, GaussianKernel, KernelTerm, LabelScores, PairwiseMode};
use rand::Rng;

/// Random points with coordinates uniform in `[0, spread)`.
pub fn random_features<R: Rng>(rng: &mut R, n: usize, d: usize, spread: f64) -> Features {
    let data = (0..n * d).map(|_| rng.gen_range(0.0..spread)).collect();
    Features::new(n, d, data).unwrap()
}

/// Rows drawn uniformly at random and normalized onto the simplex.
pub fn random_scores<R: Rng>(rng: &mut R, n: usize, m: usize) -> LabelScores {
    let mut v = Vec::with_capacity(n * m);
    for _ in 0..n {
        let row: Vec<f64> = (0..m).map(|_| rng.gen_range(0.0..1.0) + 1e-3).collect();
        let s: f64 = row.iter().sum();
        v.extend(row.iter().map(|x| x / s));
    }
    LabelScores::new(n, m, v).unwrap()
}

pub fn random_labels<R: Rng>(rng: &mut R, n: usize, m: usize) -> Vec<usize> {
    (0..n).map(|_| rng.gen_range(0..m)).collect()
}

/// A small model with a single spatial-style kernel evaluated densely,
/// together with its dense weight matrix (zero diagonal).
pub struct DenseInstance {
    pub model: EnergyModel,
    pub k: Vec<f64>,
    pub n: usize,
    pub m: usize,
}

pub fn dense_instance<R: Rng>(
    rng: &mut R,
    n: usize,
    m: usize,
    mode: PairwiseMode,
) -> DenseInstance {
    let features = random_features(rng, n, 2, 3.0);
    let weight = rng.gen_range(0.1..2.0);
    let phi: Vec<f64> = (0..n * m).map(|_| rng.gen_range(0.0..2.0)).collect();
    let k = gaussian_matrix(&features, weight);
    let kernel = GaussianKernel::spatial(weight, 1.0).unwrap();
    let model = EnergyModel::new(
        LabelScores::new(n, m, phi).unwrap(),
        vec![KernelTerm { kernel, features }],
        mode,
    )
    .unwrap();
    DenseInstance { model, k, n, m }
}

/// `w exp(-|f_a - f_b|^2 / 2)` off the diagonal, zero on it.
pub fn gaussian_matrix(features: &Features, weight: f64) -> Vec<f64> {
    let n = features.n();
    let mut k = vec![0.0; n * n];
    for a in 0..n {
        for b in 0..n {
            if a != b {
                let d2: f64 = features
                    .point(a)
                    .iter()
                    .zip(features.point(b))
                    .map(|(x, y)| (x - y) * (x - y))
                    .sum();
                k[a * n + b] = weight * (-0.5 * d2).exp();
            }
        }
    }
    k
}

/// `<phi, y> + 1/2 sum_{a != b} K_ab sum_i |y_ai - y_bi|`.
pub fn dense_lp_energy(k: &[f64], phi: &[f64], y: &[f64], n: usize, m: usize) -> f64 {
    let mut e: f64 = phi.iter().zip(y).map(|(p, v)| p * v).sum();
    for a in 0..n {
        for b in 0..n {
            if a == b {
                continue;
            }
            let d: f64 = (0..m).map(|i| (y[a * m + i] - y[b * m + i]).abs()).sum();
            e += 0.5 * k[a * n + b] * d;
        }
    }
    e
}

/// `sum_a phi_{a, l_a} + sum_{a != b} K_ab [l_a != l_b]`.
pub fn dense_ip_energy(k: &[f64], phi: &[f64], labels: &[usize], m: usize) -> f64 {
    let n = labels.len();
    let mut e: f64 = labels
        .iter()
        .enumerate()
        .map(|(a, &l)| phi[a * m + l])
        .sum();
    for a in 0..n {
        for b in 0..n {
            if a != b && labels[a] != labels[b] {
                e += k[a * n + b];
            }
        }
    }
    e
}

/// Minimum of `<A s, y~>` over all vertices of the pairwise multiplier set.
///
/// For every unordered pair `{a, b}` and label `i` the vertex picks an
/// orientation `sigma = +-1`, contributing `-K_ab sigma (y~_ai - y~_bi)`.
/// Label channels are independent, so each channel's `2^pairs` orientation
/// vectors are enumerated separately and the minima added.
pub fn vertex_enumeration_min(k: &[f64], y: &[f64], n: usize, m: usize) -> f64 {
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
        .collect();
    assert!(pairs.len() <= 20, "too many pairs to enumerate");
    let mut total = 0.0;
    for i in 0..m {
        let mut best = f64::INFINITY;
        for mask in 0u32..(1 << pairs.len()) {
            let mut v = 0.0;
            for (p, &(a, b)) in pairs.iter().enumerate() {
                let sigma = if mask >> p & 1 == 1 { 1.0 } else { -1.0 };
                v -= (k[a * n + b] + k[b * n + a]) / 2.0 * sigma * (y[a * m + i] - y[b * m + i]);
            }
            best = best.min(v);
        }
        total += best;
    }
    total
}

/// Projected gradient on `1/2 g^T Q g - <g, h>`, `g >= 0`,
/// `Q = lambda (I - 1 1^T / m)`, with step `1 / lambda`.
pub fn projected_gradient_qp(lambda: f64, h: &[f64], iters: usize) -> Vec<f64> {
    let m = h.len() as f64;
    let mut g = vec![0.0; h.len()];
    for _ in 0..iters {
        let mean = g.iter().sum::<f64>() / m;
        for (gi, hi) in g.iter_mut().zip(h) {
            let grad = lambda * (*gi - mean) - hi;
            *gi = (*gi - grad / lambda).max(0.0);
        }
    }
    g
}

pub fn qp_objective(lambda: f64, h: &[f64], g: &[f64]) -> f64 {
    let m = h.len() as f64;
    let s: f64 = g.iter().sum();
    let sq: f64 = g.iter().map(|x| x * x).sum();
    0.5 * lambda * (sq - s * s / m) - h.iter().zip(g).map(|(a, b)| a * b).sum::<f64>()
}

/// `max |a - b| / max |b|`.
pub fn rel_linf(a: &[f64], b: &[f64]) -> f64 {
    let num = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    let den = b.iter().map(|y| y.abs()).fold(0.0, f64::max);
    num / den.max(1e-300)
}
