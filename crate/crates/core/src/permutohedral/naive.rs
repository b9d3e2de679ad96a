//! Exact O(n^2) reference sums used to check the lattice filters.

use rayon::prelude::*;

use super::filter::{filter, Direction};
use super::lattice::PermutohedralLattice;
use crate::error::{Error, Result};
use crate::model::Features;

/// Largest point count the dense oracles accept.
pub const NAIVE_LIMIT: usize = 10_000;

fn guard(features: &Features, values: &[f64], channels: usize) -> Result<()> {
    let n = features.n();
    if n > NAIVE_LIMIT {
        return Err(Error::GuardExceeded {
            n,
            limit: NAIVE_LIMIT,
        });
    }
    if channels == 0 || values.len() != n * channels {
        return Err(Error::Dimension(format!(
            "{} values for {n} points x {channels} channels",
            values.len()
        )));
    }
    Ok(())
}

/// `v'_a = sum_b exp(-|f_a - f_b|^2 / 2) v_b`, self term included.
pub fn naive_gaussian_filter(
    features: &Features,
    values: &[f64],
    channels: usize,
) -> Result<Vec<f64>> {
    guard(features, values, channels)?;
    Ok(dense_sum(features, values, channels, |_, _| true))
}

/// Dense ordered sum with exact score comparisons (no binning).
pub fn naive_ordered_filter(
    features: &Features,
    values: &[f64],
    channels: usize,
    scores: &[f64],
    direction: Direction,
) -> Result<Vec<f64>> {
    guard(features, values, channels)?;
    if scores.len() != features.n() {
        return Err(Error::Dimension(format!(
            "{} scores for {} points",
            scores.len(),
            features.n()
        )));
    }
    Ok(dense_sum(
        features,
        values,
        channels,
        |a, b| match direction {
            Direction::Geq => scores[a] >= scores[b],
            Direction::Leq => scores[a] <= scores[b],
        },
    ))
}

fn dense_sum(
    features: &Features,
    values: &[f64],
    channels: usize,
    keep: impl Fn(usize, usize) -> bool + Sync,
) -> Vec<f64> {
    let n = features.n();
    let mut out = vec![0.0; n * channels];
    out.par_chunks_mut(channels)
        .enumerate()
        .for_each(|(a, dst)| {
            for b in 0..n {
                if keep(a, b) {
                    let k = features.kernel(a, b);
                    for (x, &v) in dst
                        .iter_mut()
                        .zip(&values[b * channels..(b + 1) * channels])
                    {
                        *x += k * v;
                    }
                }
            }
        });
    out
}

/// The `n x n` matrix the lattice filter applies, column `b` being the
/// filtered unit vector `e_b`.
pub fn lattice_kernel_matrix(lattice: &PermutohedralLattice) -> Result<Vec<f64>> {
    let n = lattice.n();
    if n > NAIVE_LIMIT / 10 {
        return Err(Error::GuardExceeded {
            n,
            limit: NAIVE_LIMIT / 10,
        });
    }
    let mut identity = vec![0.0; n * n];
    for a in 0..n {
        identity[a * n + a] = 1.0;
    }
    // Row a of the output holds (K e_b)_a for every b.
    filter(lattice, &identity, n)
}
