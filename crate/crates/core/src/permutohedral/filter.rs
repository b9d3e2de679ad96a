use rayon::prelude::*;

use super::lattice::{PermutohedralLattice, MISSING};
use crate::error::{Error, Result};

/// Which side of the ordering constraint a filter pass keeps.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Direction {
    /// `v'_a = sum_b k_ab v_b 1[y_a >= y_b]`
    Geq,
    /// `v'_a = sum_b k_ab v_b 1[y_a <= y_b]`
    Leq,
}

/// Per-level lattice values, laid out `[lattice point][level][channel]`.
#[derive(Clone, Debug)]
pub struct LevelBank {
    levels: usize,
    points: usize,
    channels: usize,
    values: Vec<f64>,
}

impl LevelBank {
    fn zeros(levels: usize, points: usize, channels: usize) -> Self {
        Self {
            levels,
            points,
            channels,
            values: vec![0.0; levels * points * channels],
        }
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    /// Value vector of lattice point `l` at level `h`.
    pub fn value(&self, l: usize, h: usize) -> &[f64] {
        let i = (l * self.levels + h) * self.channels;
        &self.values[i..i + self.channels]
    }

    fn stride(&self) -> usize {
        self.levels * self.channels
    }

    fn splat(&mut self, lattice: &PermutohedralLattice, values: &[f64], bins: &[usize]) {
        let c = self.channels;
        for (a, v) in values.chunks_exact(c).enumerate() {
            let h = bins[a];
            for (&l, &w) in lattice.splat_ids(a).iter().zip(lattice.splat_weights(a)) {
                let base = (l as usize * self.levels + h) * c;
                for (dst, &src) in self.values[base..base + c].iter_mut().zip(v) {
                    *dst += w * src;
                }
            }
        }
    }

    /// Turns per-level splats into cumulative sums over levels `<= h`.
    fn accumulate_levels(&mut self) {
        let (levels, c) = (self.levels, self.channels);
        if levels < 2 {
            return;
        }
        self.values.par_chunks_mut(levels * c).for_each(|point| {
            for h in 1..levels {
                let (lo, hi) = point.split_at_mut(h * c);
                for (dst, &src) in hi[..c].iter_mut().zip(&lo[(h - 1) * c..]) {
                    *dst += src;
                }
            }
        });
    }

    /// `[1, 2, 1] / 4` along every lattice axis; missing neighbors are zero.
    /// Average of the axis blurs applied in forward and in reverse order.
    /// Each axis blur is symmetric, but with missing neighbors they do not
    /// commute; the average is the symmetric part of the product.
    fn blur(&mut self, lattice: &PermutohedralLattice) {
        let axes: Vec<usize> = (0..=lattice.d()).collect();
        let mut reverse = self.values.clone();
        let mut scratch = vec![0.0; self.values.len()];
        self.blur_axes(lattice, axes.iter().copied(), &mut scratch);
        std::mem::swap(&mut self.values, &mut reverse);
        self.blur_axes(lattice, axes.iter().rev().copied(), &mut scratch);
        self.values
            .par_iter_mut()
            .zip(reverse.par_iter())
            .for_each(|(v, &f)| *v = 0.5 * (*v + f));
    }

    fn blur_axes(
        &mut self,
        lattice: &PermutohedralLattice,
        axes: impl Iterator<Item = usize>,
        scratch: &mut Vec<f64>,
    ) {
        let stride = self.stride();
        for axis in axes {
            let neighbors = lattice.blur_neighbors(axis);
            let src = &self.values;
            scratch
                .par_chunks_mut(stride)
                .zip(neighbors.par_iter())
                .enumerate()
                .for_each(|(l, (dst, &[n1, n2]))| {
                    let own = &src[l * stride..(l + 1) * stride];
                    for (k, out) in dst.iter_mut().enumerate() {
                        let left = if n1 == MISSING {
                            0.0
                        } else {
                            src[n1 as usize * stride + k]
                        };
                        let right = if n2 == MISSING {
                            0.0
                        } else {
                            src[n2 as usize * stride + k]
                        };
                        *out = (left + 2.0 * own[k] + right) * 0.25;
                    }
                });
            std::mem::swap(&mut self.values, scratch);
        }
    }

    fn slice(&self, lattice: &PermutohedralLattice, bins: &[usize], out: &mut [f64]) {
        let c = self.channels;
        let scale = lattice.scale();
        out.par_chunks_mut(c).enumerate().for_each(|(a, dst)| {
            let h = bins[a];
            dst.iter_mut().for_each(|x| *x = 0.0);
            for (&l, &w) in lattice.splat_ids(a).iter().zip(lattice.splat_weights(a)) {
                for (x, &v) in dst.iter_mut().zip(self.value(l as usize, h)) {
                    *x += w * v;
                }
            }
            dst.iter_mut().for_each(|x| *x *= scale);
        });
    }
}

fn check_values(lattice: &PermutohedralLattice, values: &[f64], channels: usize) -> Result<()> {
    if channels == 0 || values.len() != lattice.n() * channels {
        return Err(Error::Dimension(format!(
            "filter input has {} values, lattice expects {} x {channels}",
            values.len(),
            lattice.n()
        )));
    }
    Ok(())
}

fn check_levels(levels: usize) -> Result<()> {
    if levels < 2 {
        return Err(Error::InvalidParameter(format!(
            "ordered filtering needs at least 2 levels, got {levels}"
        )));
    }
    Ok(())
}

/// Maps scores to levels.
///
/// Scores already inside `[0, 1]` are binned as is: level
/// `floor(y (H - 1))` for [`Direction::Geq`]. Otherwise they are first mapped
/// affinely from `[min, max]` onto `[0, 1]`, and a constant out-of-range
/// vector maps to 0. For [`Direction::Leq`] the level is `ceil(y (H - 1))`
/// mirrored to `H - 1 - ceil(y (H - 1))`, so that both directions share the
/// same "splat upwards, slice at own level" machinery.
pub fn score_bins(scores: &[f64], levels: usize, direction: Direction) -> Result<Vec<usize>> {
    check_levels(levels)?;
    if let Some(index) = scores.iter().position(|s| !s.is_finite()) {
        return Err(Error::NonFinite { index });
    }
    let (lo, hi) = scores
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &s| {
            (lo.min(s), hi.max(s))
        });
    let top = (levels - 1) as f64;
    let normalize = |s: f64| -> f64 {
        if lo >= 0.0 && hi <= 1.0 {
            s
        } else if hi > lo {
            (s - lo) / (hi - lo)
        } else {
            0.0
        }
    };
    Ok(scores
        .iter()
        .map(|&s| {
            let x = (normalize(s) * top).clamp(0.0, top);
            match direction {
                Direction::Geq => x.floor() as usize,
                Direction::Leq => levels - 1 - x.ceil() as usize,
            }
        })
        .collect())
}

/// Gaussian filtering on the lattice: splat, blur, slice.
///
/// `values` is `n x channels`, row-major; the self term is included.
pub fn filter(lattice: &PermutohedralLattice, values: &[f64], channels: usize) -> Result<Vec<f64>> {
    check_values(lattice, values, channels)?;
    let bins = vec![0; lattice.n()];
    let mut bank = LevelBank::zeros(1, lattice.num_points(), channels);
    bank.splat(lattice, values, &bins);
    bank.blur(lattice);
    let mut out = vec![0.0; values.len()];
    bank.slice(lattice, &bins, &mut out);
    Ok(out)
}

/// [`filter`] divided, per point, by the filtered all-ones vector.
pub fn filter_normalized(
    lattice: &PermutohedralLattice,
    values: &[f64],
    channels: usize,
) -> Result<Vec<f64>> {
    let mut out = filter(lattice, values, channels)?;
    let norm = filter(lattice, &vec![1.0; lattice.n()], 1)?;
    for (row, &z) in out.chunks_exact_mut(channels).zip(&norm) {
        row.iter_mut().for_each(|x| *x /= z);
    }
    Ok(out)
}

/// Lattice filtering restricted by the ordering of `scores`.
///
/// A point in level `q` is splatted into levels `q..H`, every level is
/// blurred independently, and each point is sliced from its own level. The
/// result approximates `sum_b k_ab v_b 1[h_a >= h_b]` (or `<=` for
/// [`Direction::Leq`]) on the level indices from [`score_bins`].
pub fn ordered_filter(
    lattice: &PermutohedralLattice,
    values: &[f64],
    channels: usize,
    scores: &[f64],
    levels: usize,
    direction: Direction,
) -> Result<Vec<f64>> {
    check_values(lattice, values, channels)?;
    if scores.len() != lattice.n() {
        return Err(Error::Dimension(format!(
            "{} scores for {} feature points",
            scores.len(),
            lattice.n()
        )));
    }
    let bins = score_bins(scores, levels, direction)?;
    Ok(ordered_filter_binned(
        lattice, values, channels, &bins, levels,
    ))
}

pub(crate) fn ordered_filter_binned(
    lattice: &PermutohedralLattice,
    values: &[f64],
    channels: usize,
    bins: &[usize],
    levels: usize,
) -> Vec<f64> {
    let mut bank = LevelBank::zeros(levels, lattice.num_points(), channels);
    bank.splat(lattice, values, bins);
    bank.accumulate_levels();
    bank.blur(lattice);
    let mut out = vec![0.0; values.len()];
    bank.slice(lattice, bins, &mut out);
    out
}

/// Reference for [`ordered_filter`]: one plain [`filter`] per level on the
/// inputs whose level is at most `h`, read back at the points of level `h`.
pub fn level_masked_oracle(
    lattice: &PermutohedralLattice,
    values: &[f64],
    channels: usize,
    scores: &[f64],
    levels: usize,
    direction: Direction,
) -> Result<Vec<f64>> {
    check_values(lattice, values, channels)?;
    if scores.len() != lattice.n() {
        return Err(Error::Dimension(format!(
            "{} scores for {} feature points",
            scores.len(),
            lattice.n()
        )));
    }
    let bins = score_bins(scores, levels, direction)?;
    let mut out = vec![0.0; values.len()];
    let mut masked = vec![0.0; values.len()];
    for h in 0..levels {
        if !bins.contains(&h) {
            continue;
        }
        for ((dst, src), &b) in masked
            .chunks_exact_mut(channels)
            .zip(values.chunks_exact(channels))
            .zip(&bins)
        {
            if b <= h {
                dst.copy_from_slice(src);
            } else {
                dst.iter_mut().for_each(|x| *x = 0.0);
            }
        }
        let level = filter(lattice, &masked, channels)?;
        for (a, &b) in bins.iter().enumerate() {
            if b == h {
                out[a * channels..(a + 1) * channels]
                    .copy_from_slice(&level[a * channels..(a + 1) * channels]);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Features;

    fn lattice(n: usize, d: usize, seed: u64) -> PermutohedralLattice {
        let mut s = seed
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        let data = (0..n * d)
            .map(|_| {
                s = s
                    .wrapping_mul(6364136223846793005)
                    .wrapping_add(1442695040888963407);
                ((s >> 11) as f64 / (1u64 << 53) as f64) * 4.0
            })
            .collect();
        PermutohedralLattice::build(&Features::new(n, d, data).unwrap()).unwrap()
    }

    #[test]
    fn bins_in_unit_interval() {
        let b = score_bins(&[0.0, 0.5, 0.99, 1.0], 10, Direction::Geq).unwrap();
        assert_eq!(b, vec![0, 4, 8, 9]);
        let b = score_bins(&[0.0, 0.5, 0.99, 1.0], 10, Direction::Leq).unwrap();
        // ceil: 0, 5, 9, 9 mirrored
        assert_eq!(b, vec![9, 4, 0, 0]);
    }

    #[test]
    fn bins_rescale_out_of_range() {
        let b = score_bins(&[-2.0, 0.0, 2.0], 3, Direction::Geq).unwrap();
        assert_eq!(b, vec![0, 1, 2]);
        let b = score_bins(&[3.0, 3.0], 5, Direction::Geq).unwrap();
        assert_eq!(b, vec![0, 0]);
        assert!(score_bins(&[0.1], 1, Direction::Geq).is_err());
    }

    #[test]
    fn single_point_normalized_is_identity() {
        let lat = lattice(1, 3, 1);
        let out = filter_normalized(&lat, &[3.0], 1).unwrap();
        assert!((out[0] - 3.0).abs() < 1e-3);
    }

    #[test]
    fn zeros_stay_zero() {
        let lat = lattice(50, 2, 2);
        let z = vec![0.0; 100];
        assert!(filter(&lat, &z, 2).unwrap().iter().all(|&x| x == 0.0));
        let scores: Vec<f64> = (0..50).map(|i| i as f64 / 49.0).collect();
        let o = ordered_filter(&lat, &z, 2, &scores, 10, Direction::Geq).unwrap();
        assert!(o.iter().all(|&x| x == 0.0));
        let o = level_masked_oracle(&lat, &z, 2, &scores, 10, Direction::Leq).unwrap();
        assert!(o.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn equal_scores_reproduce_plain_filter_bitwise() {
        let lat = lattice(200, 5, 3);
        let v: Vec<f64> = (0..200).map(|i| (i as f64 * 0.37).sin()).collect();
        let plain = filter(&lat, &v, 1).unwrap();
        for s in [0.0, 0.42, 1.0, 7.5] {
            for dir in [Direction::Geq, Direction::Leq] {
                let o = ordered_filter(&lat, &v, 1, &vec![s; 200], 10, dir).unwrap();
                assert_eq!(o, plain, "score {s} {dir:?}");
            }
        }
    }

    #[test]
    fn two_level_oracle_with_all_in_bottom_bin_is_plain() {
        let lat = lattice(80, 2, 4);
        let v: Vec<f64> = (0..80).map(|i| 1.0 + (i % 7) as f64).collect();
        let plain = filter(&lat, &v, 1).unwrap();
        let o = level_masked_oracle(&lat, &v, 1, &vec![0.2; 80], 2, Direction::Geq).unwrap();
        assert_eq!(o, plain);
    }

    #[test]
    fn ordered_matches_level_masked_oracle() {
        for (seed, d) in [(5u64, 2usize), (6, 5)] {
            let lat = lattice(300, d, seed);
            let v: Vec<f64> = (0..600).map(|i| ((i * 13 % 17) as f64) - 5.0).collect();
            let scores: Vec<f64> = (0..300)
                .map(|i| ((i * 7919) % 1000) as f64 / 999.0)
                .collect();
            for dir in [Direction::Geq, Direction::Leq] {
                let a = ordered_filter(&lat, &v, 2, &scores, 10, dir).unwrap();
                let b = level_masked_oracle(&lat, &v, 2, &scores, 10, dir).unwrap();
                let scale = b.iter().fold(0.0f64, |m, x| m.max(x.abs()));
                let err = a
                    .iter()
                    .zip(&b)
                    .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
                assert!(err <= 1e-9 * scale.max(1.0), "d = {d} {dir:?}: {err}");
            }
        }
    }

    #[test]
    fn dimension_errors() {
        let lat = lattice(10, 2, 7);
        assert!(filter(&lat, &[1.0; 9], 1).is_err());
        assert!(ordered_filter(&lat, &[1.0; 10], 1, &[0.0; 9], 10, Direction::Geq).is_err());
        assert!(ordered_filter(&lat, &[1.0; 10], 1, &[0.0; 10], 1, Direction::Geq).is_err());
    }
}
