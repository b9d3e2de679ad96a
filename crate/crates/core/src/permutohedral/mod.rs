//! Permutohedral-lattice Gaussian filtering, including the ordered variant
//! that restricts each sum to points of lower (or higher) score level.

mod filter;
mod hash;
mod lattice;
mod naive;

pub use filter::{
    filter, filter_normalized, level_masked_oracle, ordered_filter, score_bins, Direction,
    LevelBank,
};
pub use lattice::PermutohedralLattice;
pub use naive::{lattice_kernel_matrix, naive_gaussian_filter, naive_ordered_filter, NAIVE_LIMIT};

pub(crate) use filter::ordered_filter_binned;
