use super::hash::LatticeHash;
use crate::error::{Error, Result};
use crate::model::Features;

/// Marks a blur neighbor that is not part of the lattice.
pub(crate) const MISSING: u32 = u32::MAX;

/// Permutohedral lattice over a fixed set of feature points.
///
/// Each feature point is enclosed by a simplex of `d + 1` lattice points and
/// carries one barycentric weight per vertex. The structure is immutable and
/// is shared by every filter call on the same features.
#[derive(Clone, Debug)]
pub struct PermutohedralLattice {
    d: usize,
    n: usize,
    num_points: usize,
    /// `n * (d + 1)` lattice ids.
    splat_ids: Vec<u32>,
    /// `n * (d + 1)` barycentric weights.
    splat_weights: Vec<f64>,
    /// `(d + 1) * num_points` pairs of neighbor ids along each blur axis.
    blur_neighbors: Vec<[u32; 2]>,
    scale: f64,
}

impl PermutohedralLattice {
    /// Embeds the features and enumerates the enclosing simplices.
    pub fn build(features: &Features) -> Result<Self> {
        let (n, d) = (features.n(), features.d());
        if let Some(index) = features.as_slice().iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        let d1 = d + 1;

        // Unit-variance Gaussian in feature space after the elevation.
        let inv_std_dev = (2.0f64 / 3.0).sqrt() * d1 as f64;
        let scale_factor: Vec<f64> = (0..d)
            .map(|i| inv_std_dev / (((i + 1) * (i + 2)) as f64).sqrt())
            .collect();

        // canonical[r * d1 + i]: coordinate i of the remainder-r simplex vertex
        let mut canonical = vec![0i32; d1 * d1];
        for r in 0..d1 {
            for i in 0..d1 {
                canonical[r * d1 + i] = if i <= d - r {
                    r as i32
                } else {
                    r as i32 - d1 as i32
                };
            }
        }

        let mut hash = LatticeHash::with_capacity(d, n);
        let mut splat_ids = Vec::with_capacity(n * d1);
        let mut splat_weights = Vec::with_capacity(n * d1);

        let mut elevated = vec![0.0f64; d1];
        let mut rem0 = vec![0i32; d1];
        let mut rank = vec![0i32; d1];
        let mut bary = vec![0.0f64; d1 + 1];
        let mut pending: Vec<i32> = Vec::with_capacity(CHUNK * d1 * d);
        let down = 1.0 / d1 as f64;

        for a in 0..n {
            let f = features.point(a);
            let mut sm = 0.0;
            for j in (1..=d).rev() {
                let cf = f[j - 1] * scale_factor[j - 1];
                elevated[j] = sm - j as f64 * cf;
                sm += cf;
            }
            elevated[0] = sm;

            // Nearest remainder-0 point.
            let mut sum = 0i32;
            for i in 0..d1 {
                let v = down * elevated[i];
                let up = v.ceil() * d1 as f64;
                let dn = v.floor() * d1 as f64;
                rem0[i] = if up - elevated[i] < elevated[i] - dn {
                    up as i32
                } else {
                    dn as i32
                };
                sum += rem0[i];
            }
            sum /= d1 as i32;

            rank.iter_mut().for_each(|r| *r = 0);
            for i in 0..d {
                let di = elevated[i] - rem0[i] as f64;
                for j in i + 1..d1 {
                    if di < elevated[j] - rem0[j] as f64 {
                        rank[i] += 1;
                    } else {
                        rank[j] += 1;
                    }
                }
            }

            // Bring the point back onto the zero-sum plane.
            for i in 0..d1 {
                rank[i] += sum;
                if rank[i] < 0 {
                    rank[i] += d1 as i32;
                    rem0[i] += d1 as i32;
                } else if rank[i] > d as i32 {
                    rank[i] -= d1 as i32;
                    rem0[i] -= d1 as i32;
                }
            }

            bary.iter_mut().for_each(|b| *b = 0.0);
            for i in 0..d1 {
                let v = (elevated[i] - rem0[i] as f64) * down;
                let r = rank[i] as usize;
                bary[d - r] += v;
                bary[d - r + 1] -= v;
            }
            bary[0] += 1.0 + bary[d1];

            for r in 0..d1 {
                for i in 0..d {
                    pending.push(rem0[i] + canonical[r * d1 + rank[i] as usize]);
                }
                splat_weights.push(bary[r]);
            }
            if (a + 1) % CHUNK == 0 || a + 1 == n {
                insert_pending(&mut hash, &mut pending, &mut splat_ids, d1);
            }
        }

        let num_points = hash.len();
        let mut blur_neighbors = vec![[MISSING; 2]; d1 * num_points];
        let mut probes: Vec<i32> = Vec::with_capacity(CHUNK * 2 * d1 * d);
        for start in (0..num_points).step_by(CHUNK) {
            let end = (start + CHUNK).min(num_points);
            probes.clear();
            for id in start..end {
                let k = hash.key(id);
                for axis in 0..d1 {
                    for step in [-1i32, 1] {
                        // Along axis `axis` the own coordinate moves by -/+d and
                        // all others by +/-1 (the last one is implicit).
                        for (i, &ki) in k.iter().enumerate() {
                            probes.push(if i == axis {
                                ki - step * d as i32
                            } else {
                                ki + step
                            });
                        }
                    }
                }
            }
            for key in probes.chunks_exact(d) {
                hash.prefetch(key);
            }
            for (j, pair) in probes.chunks_exact(2 * d).enumerate() {
                let (id, axis) = (start + j / d1, j % d1);
                blur_neighbors[axis * num_points + id] = [
                    hash.find(&pair[..d]).unwrap_or(MISSING),
                    hash.find(&pair[d..]).unwrap_or(MISSING),
                ];
            }
        }

        Ok(Self {
            d,
            n,
            num_points,
            splat_ids,
            splat_weights,
            blur_neighbors,
            scale: density_scale(d),
        })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Number of feature points.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of distinct lattice points.
    pub fn num_points(&self) -> usize {
        self.num_points
    }

    /// Enclosing lattice ids of feature point `a`.
    pub fn splat_ids(&self, a: usize) -> &[u32] {
        let d1 = self.d + 1;
        &self.splat_ids[a * d1..(a + 1) * d1]
    }

    /// Barycentric weights of feature point `a`, aligned with [`splat_ids`].
    ///
    /// [`splat_ids`]: Self::splat_ids
    pub fn splat_weights(&self, a: usize) -> &[f64] {
        let d1 = self.d + 1;
        &self.splat_weights[a * d1..(a + 1) * d1]
    }

    pub(crate) fn blur_neighbors(&self, axis: usize) -> &[[u32; 2]] {
        &self.blur_neighbors[axis * self.num_points..(axis + 1) * self.num_points]
    }

    /// Factor applied at slicing so that, for densely sampled features,
    /// the filter approximates `sum_b exp(-|f_a - f_b|^2 / 2) v_b`.
    pub fn scale(&self) -> f64 {
        self.scale
    }
}

/// Points whose vertex keys are hashed together, so that the table
/// accesses can be prefetched.
const CHUNK: usize = 32;

/// Inserts `pending` (`d` coordinates per vertex, `d + 1` vertices per point)
/// and appends the ids. A point's vertices are first looked up among the
/// previous point's, since neighboring points mostly share them.
fn insert_pending(hash: &mut LatticeHash, pending: &mut Vec<i32>, ids: &mut Vec<u32>, d1: usize) {
    let d = d1 - 1;
    for key in pending.chunks_exact(d) {
        hash.prefetch(key);
    }
    for (v, key) in pending.chunks_exact(d).enumerate() {
        let prev = ids.len() - v % d1;
        let cached = ids[prev.saturating_sub(d1)..prev]
            .iter()
            .copied()
            .find(|&id| hash.key(id as usize) == key);
        ids.push(cached.unwrap_or_else(|| hash.insert(key)));
    }
    pending.clear();
}

/// Unit-Gaussian mass `(2 pi)^(d/2)` divided by the feature-space volume
/// owned by one lattice point, `(3/2)^(d/2) / sqrt(d + 1)`.
fn density_scale(d: usize) -> f64 {
    let d = d as f64;
    (4.0 * std::f64::consts::PI / 3.0).powf(d / 2.0) * (d + 1.0).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn feats(n: usize, d: usize, data: Vec<f64>) -> Features {
        Features::new(n, d, data).unwrap()
    }

    #[test]
    fn single_point_is_one_simplex() {
        for d in 1..=6 {
            let data: Vec<f64> = (0..d).map(|i| 0.37 * i as f64 - 0.2).collect();
            let lat = PermutohedralLattice::build(&feats(1, d, data)).unwrap();
            assert_eq!(lat.num_points(), d + 1);
            let s: f64 = lat.splat_weights(0).iter().sum();
            assert!((s - 1.0).abs() < 1e-12, "d = {d}: sum {s}");
            assert!(lat.splat_weights(0).iter().all(|&w| w >= -1e-12));
        }
    }

    #[test]
    fn identical_points_share_simplex() {
        let lat = PermutohedralLattice::build(&feats(2, 3, vec![0.4, 1.1, -2.0, 0.4, 1.1, -2.0]))
            .unwrap();
        assert_eq!(lat.splat_ids(0), lat.splat_ids(1));
        assert_eq!(lat.splat_weights(0), lat.splat_weights(1));
    }

    #[test]
    fn rejects_non_finite() {
        // Features::new already rejects, so go through the raw constructor path.
        assert!(Features::new(1, 2, vec![0.0, f64::INFINITY]).is_err());
    }
}
