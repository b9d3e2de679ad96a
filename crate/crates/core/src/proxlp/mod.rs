//! The proximal LP solver and its accelerated variants.

mod accel;
mod cgrad;
mod dual;
mod simplex;
mod solver;
mod trace;

pub use accel::{prox_solve_accelerated, prune_labels, select_uncertain, AccelVariant};
pub use cgrad::conditional_gradient;
pub use dual::{
    dual_objective, exact_pixel_qp, optimal_step, pixel_qp_gradient, pixel_qp_linear,
    pixel_qp_objective, recover_primal, solve_beta, solve_gamma, solve_pixel_qp, DualState,
    QpSettings,
};
pub use simplex::{project_row, project_simplex, simplex_threshold};
pub use solver::prox_solve;
pub use trace::{InnerRecord, OuterRecord, Phase, ProxTrace};

pub(crate) use solver::Recorder;
