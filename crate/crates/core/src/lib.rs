//! LP-relaxation inference for dense CRFs with Gaussian pairwise potentials.
//!
//! The main entry point is [`prox_solve`], a proximal method whose inner
//! problems are solved in the dual by block-coordinate descent over the
//! simplex multipliers and Frank-Wolfe over the pairwise multipliers. The
//! Frank-Wolfe direction needs sums of the form
//! `sum_b k(f_a, f_b) 1[y_a >= y_b]`, which [`permutohedral::ordered_filter`]
//! evaluates in time linear in the number of pixels by keeping one set of
//! lattice values per score level.

pub mod baselines;
pub mod energy;
pub mod error;
pub mod model;
pub mod pairwise;
pub mod permutohedral;
pub mod proxlp;
pub mod synthetic;

pub use baselines::{mean_field, sg_lp, MF5_ITERS};
pub use energy::{ip_energy, lp_energy, proximal_objective};
pub use error::{Error, Result};
pub use model::{
    argmax_round, make_features, EnergyModel, FeatureField, FeatureKind, Features, GaussianKernel,
    KernelTerm, LabelScores, ModelConfig, PairwiseMode, QpMethod, SolverConfig,
};
pub use pairwise::Pairwise;
pub use permutohedral::{Direction, PermutohedralLattice};
pub use proxlp::{prox_solve, prox_solve_accelerated, AccelVariant, DualState, ProxTrace};
