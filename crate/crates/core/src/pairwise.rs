//! Weighted kernel-mixture sums `sum_b K_ab v_b` over all pixel pairs,
//! either on permutohedral lattices or by dense summation.

use crate::error::{Error, Result};
use crate::model::{Features, KernelTerm, PairwiseMode};
use crate::permutohedral::{
    filter, naive_gaussian_filter, naive_ordered_filter, ordered_filter_binned, score_bins,
    Direction, PermutohedralLattice, NAIVE_LIMIT,
};

#[derive(Clone, Debug)]
struct Component {
    weight: f64,
    features: Features,
    lattice: Option<PermutohedralLattice>,
}

/// Evaluator for the pairwise weights `K_ab = sum_c w_c k(f_a^c, f_b^c)`.
#[derive(Clone, Debug)]
pub struct Pairwise {
    n: usize,
    mode: PairwiseMode,
    components: Vec<Component>,
}

impl Pairwise {
    pub fn new(n: usize, terms: Vec<KernelTerm>, mode: PairwiseMode) -> Result<Self> {
        match mode {
            PairwiseMode::Lattice { levels } if levels < 2 => {
                return Err(Error::InvalidParameter(format!(
                    "lattice mode needs at least 2 levels, got {levels}"
                )))
            }
            PairwiseMode::Exact if n > NAIVE_LIMIT => {
                return Err(Error::GuardExceeded {
                    n,
                    limit: NAIVE_LIMIT,
                })
            }
            _ => {}
        }
        let components = terms
            .into_iter()
            .map(|t| {
                let lattice = match mode {
                    PairwiseMode::Lattice { .. } => Some(PermutohedralLattice::build(&t.features)?),
                    PairwiseMode::Exact => None,
                };
                Ok(Component {
                    weight: t.kernel.weight,
                    features: t.features,
                    lattice,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            n,
            mode,
            components,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mode(&self) -> PairwiseMode {
        self.mode
    }

    /// True when every kernel weight is zero (or there are no kernels).
    pub fn is_zero(&self) -> bool {
        self.components.iter().all(|c| c.weight == 0.0)
    }

    /// Sum of kernel weights, i.e. the exact self weight `K_aa`.
    pub fn self_weight(&self) -> f64 {
        self.components.iter().map(|c| c.weight).sum()
    }

    /// Lattices of the kernel components, in configuration order.
    pub fn lattices(&self) -> impl Iterator<Item = &PermutohedralLattice> {
        self.components.iter().filter_map(|c| c.lattice.as_ref())
    }

    /// `sum_b K_ab v_b` for an `n x channels` input, self term included.
    pub fn filter(&self, values: &[f64], channels: usize) -> Vec<f64> {
        let mut out = vec![0.0; values.len()];
        for c in self.components.iter().filter(|c| c.weight != 0.0) {
            let part = match &c.lattice {
                Some(lat) => filter(lat, values, channels),
                None => naive_gaussian_filter(&c.features, values, channels),
            }
            .expect("pairwise input dimensions");
            axpy(&mut out, c.weight, &part);
        }
        out
    }

    /// `sum_b K_ab v_b 1[y_a >= y_b]` (or `<=`), self term included.
    ///
    /// In lattice mode the comparison is made on score levels.
    pub fn ordered(
        &self,
        values: &[f64],
        channels: usize,
        scores: &[f64],
        direction: Direction,
    ) -> Vec<f64> {
        let bins = match self.mode {
            PairwiseMode::Lattice { levels } => {
                Some(score_bins(scores, levels, direction).expect("finite scores"))
            }
            PairwiseMode::Exact => None,
        };
        let mut out = vec![0.0; values.len()];
        for c in self.components.iter().filter(|c| c.weight != 0.0) {
            let part = match (&c.lattice, &bins, self.mode) {
                (Some(lat), Some(bins), PairwiseMode::Lattice { levels }) => {
                    ordered_filter_binned(lat, values, channels, bins, levels)
                }
                _ => naive_ordered_filter(&c.features, values, channels, scores, direction)
                    .expect("pairwise input dimensions"),
            };
            axpy(&mut out, c.weight, &part);
        }
        out
    }

    /// `sum_b K_ab (1[y_a >= y_b] - 1[y_a <= y_b])` for one score channel.
    ///
    /// The self term appears in both indicator sums and cancels.
    pub fn ordered_difference(&self, scores: &[f64]) -> Vec<f64> {
        let ones = vec![1.0; self.n];
        let geq = self.ordered(&ones, 1, scores, Direction::Geq);
        let leq = self.ordered(&ones, 1, scores, Direction::Leq);
        geq.iter().zip(&leq).map(|(g, l)| g - l).collect()
    }
}

fn axpy(out: &mut [f64], w: f64, x: &[f64]) {
    for (o, &v) in out.iter_mut().zip(x) {
        *o += w * v;
    }
}
