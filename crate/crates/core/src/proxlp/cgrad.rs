use crate::error::{Error, Result};
use crate::model::{EnergyModel, LabelScores};

/// Frank-Wolfe vertex of the pairwise multipliers, returned as `A s`
/// (`n x m`):
///
/// ```text
/// (A s)_ai = -sum_b K_ab (1[y~_ai >= y~_bi] - 1[y~_ai <= y~_bi])
/// ```
///
/// Each label channel costs one `>=` and one `<=` ordered filter pass.
/// `y_tilde` may be infeasible.
pub fn conditional_gradient(model: &EnergyModel, y_tilde: &LabelScores) -> Result<Vec<f64>> {
    if y_tilde.n() != model.n() {
        return Err(Error::Dimension(format!(
            "scores cover {} pixels, model has {}",
            y_tilde.n(),
            model.n()
        )));
    }
    let (n, m) = (y_tilde.n(), y_tilde.m());
    let mut out = vec![0.0; n * m];
    for i in 0..m {
        let diff = model.pairwise().ordered_difference(&y_tilde.column(i));
        for (a, d) in diff.into_iter().enumerate() {
            out[a * m + i] = -d;
        }
    }
    Ok(out)
}
