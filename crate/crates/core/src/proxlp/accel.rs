//! Label pruning and pixel restriction for the accelerated solver variants.

use super::solver::solve;
use super::trace::ProxTrace;
use crate::error::Result;
use crate::model::{EnergyModel, LabelScores, SolverConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AccelVariant {
    /// Drop labels whose score is below the prune threshold at every pixel.
    LabelsOnly,
    /// Additionally optimize only the uncertain pixels once
    /// `acc_switch_step` outer steps have run.
    LabelsAndPixels,
}

/// Labels whose score reaches `threshold` at some pixel. Never empty: when
/// no label qualifies, the label holding the largest entry is kept.
pub fn prune_labels(y: &LabelScores, threshold: f64) -> Vec<usize> {
    let m = y.m();
    let mut col_max = vec![f64::NEG_INFINITY; m];
    for row in y.rows() {
        for (c, &v) in col_max.iter_mut().zip(row) {
            *c = c.max(v);
        }
    }
    let active: Vec<usize> = (0..m).filter(|&i| col_max[i] >= threshold).collect();
    if !active.is_empty() {
        return active;
    }
    let mut best = 0;
    for i in 1..m {
        if col_max[i] > col_max[best] {
            best = i;
        }
    }
    vec![best]
}

/// Pixels whose largest score is below `threshold`, least certain first,
/// truncated to `ceil(cap_fraction * n)`.
pub fn select_uncertain(y: &LabelScores, threshold: f64, cap_fraction: f64) -> Vec<usize> {
    let maxes = y.row_max();
    let mut pixels: Vec<usize> = (0..y.n()).filter(|&a| maxes[a] < threshold).collect();
    pixels.sort_by(|&a, &b| maxes[a].total_cmp(&maxes[b]).then(a.cmp(&b)));
    let cap = (cap_fraction * y.n() as f64).ceil() as usize;
    pixels.truncate(cap);
    pixels
}

pub(crate) fn count_uncertain(y: &LabelScores, threshold: f64) -> usize {
    y.row_max().iter().filter(|&&v| v < threshold).count()
}

/// Accelerated proximal solver.
///
/// Outer steps work on the labels that survive [`prune_labels`]; optimized
/// rows put zero mass on pruned labels. With
/// [`AccelVariant::LabelsAndPixels`], once the switch step is reached only
/// the pixels from [`select_uncertain`] are optimized and all other rows are
/// kept fixed, still contributing to the pairwise sums.
pub fn prox_solve_accelerated(
    model: &EnergyModel,
    y0: &LabelScores,
    cfg: &SolverConfig,
    variant: AccelVariant,
) -> Result<(LabelScores, ProxTrace)> {
    solve(model, y0, cfg, Some(variant))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prune_uniform_keeps_all() {
        assert_eq!(
            prune_labels(&LabelScores::uniform(5, 4), 0.01),
            vec![0, 1, 2, 3]
        );
    }

    #[test]
    fn prune_drops_small_column() {
        let y = LabelScores::new(2, 3, vec![0.5, 0.495, 0.005, 0.2, 0.795, 0.005]).unwrap();
        assert_eq!(prune_labels(&y, 0.01), vec![0, 1]);
    }

    #[test]
    fn prune_integral_keeps_used() {
        let y = LabelScores::from_labels(&[2, 0, 2], 4).unwrap();
        assert_eq!(prune_labels(&y, 0.01), vec![0, 2]);
    }

    #[test]
    fn prune_fallback() {
        let y = LabelScores::new(1, 3, vec![0.2, 0.5, 0.3]).unwrap();
        assert_eq!(prune_labels(&y, 0.9), vec![1]);
    }

    #[test]
    fn uncertain_sets() {
        let y = LabelScores::from_labels(&[0, 1, 1], 2).unwrap();
        assert!(select_uncertain(&y, 0.95, 0.1).is_empty());

        let y = LabelScores::uniform(100, 4);
        assert_eq!(select_uncertain(&y, 0.95, 0.1).len(), 10);

        let mut rows = Vec::new();
        for a in 0..100 {
            let v = match a {
                7 => 0.6,
                30 => 0.9,
                81 => 0.5,
                _ => 0.97,
            };
            rows.extend([v, 1.0 - v]);
        }
        let y = LabelScores::new(100, 2, rows).unwrap();
        assert_eq!(select_uncertain(&y, 0.95, 0.1), vec![81, 7, 30]);
    }
}
