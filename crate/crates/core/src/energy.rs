//! Integer energy, its LP relaxation and the proximal objective.
//!
//! Pairwise sums go through the model's [`Pairwise`](crate::Pairwise)
//! evaluator, so in lattice mode the energies share the exact approximation
//! used by the solvers.

use crate::error::{Error, Result};
use crate::model::{EnergyModel, LabelScores};
use crate::permutohedral::Direction;

/// `sum_a sum_i phi_ai y_ai`.
pub fn unary_energy(model: &EnergyModel, y: &LabelScores) -> f64 {
    model
        .unaries()
        .as_slice()
        .iter()
        .zip(y.as_slice())
        .map(|(p, v)| p * v)
        .sum()
}

/// Potts pairwise part of the integer energy,
/// `sum_{a, b != a} K_ab [l_a != l_b]`.
pub fn ip_pairwise(model: &EnergyModel, y: &LabelScores) -> f64 {
    // sum_a sum_i y_ai (K (1 - y_i))_a; the self term vanishes since
    // y_ai (1 - y_ai) = 0 for one-hot rows.
    let complement: Vec<f64> = y.as_slice().iter().map(|v| 1.0 - v).collect();
    let filtered = model.pairwise().filter(&complement, y.m());
    y.as_slice().iter().zip(&filtered).map(|(v, f)| v * f).sum()
}

/// Energy of an integral labeling.
pub fn ip_energy(model: &EnergyModel, y: &LabelScores) -> Result<f64> {
    model.check_scores(y)?;
    if !y.is_integral() {
        return Err(Error::NotIntegral("ip_energy needs one-hot rows".into()));
    }
    Ok(unary_energy(model, y) + ip_pairwise(model, y))
}

/// Pairwise part of the LP objective,
/// `sum_{a, b != a} sum_i K_ab |y_ai - y_bi| / 2`.
///
/// Per label channel, `sum_{a,b} K_ab |y_a - y_b|` equals both
/// `2 sum_a (y_a G(1)_a - G(y)_a)` with `G` the `>=`-ordered sum and
/// `2 sum_a (L(y)_a - y_a L(1)_a)` with the `<=`-ordered sum; the result
/// averages the two passes.
pub fn lp_pairwise(model: &EnergyModel, y: &LabelScores) -> f64 {
    let n = y.n();
    let pw = model.pairwise();
    let mut total = 0.0;
    for i in 0..y.m() {
        let col = y.column(i);
        let mut values = Vec::with_capacity(2 * n);
        for &v in &col {
            values.push(1.0);
            values.push(v);
        }
        let geq = pw.ordered(&values, 2, &col, Direction::Geq);
        let leq = pw.ordered(&values, 2, &col, Direction::Leq);
        let mut channel = 0.0;
        for a in 0..n {
            let ya = col[a];
            channel += ya * geq[2 * a] - geq[2 * a + 1];
            channel += leq[2 * a + 1] - ya * leq[2 * a];
        }
        total += 0.5 * channel;
    }
    total
}

/// LP relaxation objective of a feasible point.
pub fn lp_energy(model: &EnergyModel, y: &LabelScores) -> Result<f64> {
    model.check_scores(y)?;
    y.check_feasible()?;
    Ok(unary_energy(model, y) + lp_pairwise(model, y))
}

/// `lp_energy(y) + |y - y_prev|^2 / (2 lambda)`.
pub fn proximal_objective(
    model: &EnergyModel,
    y: &LabelScores,
    y_prev: &LabelScores,
    lambda: f64,
) -> Result<f64> {
    if lambda.is_nan() || lambda <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "lambda must be > 0, got {lambda}"
        )));
    }
    model.check_scores(y_prev)?;
    let dist2: f64 = y
        .as_slice()
        .iter()
        .zip(y_prev.as_slice())
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    Ok(lp_energy(model, y)? + dist2 / (2.0 * lambda))
}
