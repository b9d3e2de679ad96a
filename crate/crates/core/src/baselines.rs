//! Comparison solvers on the same model: mean-field and projected
//! subgradient descent on the LP relaxation.

use crate::error::{Error, Result};
use crate::model::{EnergyModel, LabelScores};
use crate::proxlp::{project_row, Phase, ProxTrace, Recorder};

/// Sweeps of the `MF5` preset.
pub const MF5_ITERS: usize = 5;

fn count_uncertain(y: &LabelScores) -> usize {
    y.row_max().iter().filter(|&&v| v < 0.95).count()
}

/// Plain (undamped) mean-field fixed-point iteration for Potts potentials:
/// `y_ai ∝ exp(-phi_ai + sum_{b != a} K_ab y_bi)`.
///
/// The self term is removed using the exact kernel self weight
/// `K_aa = sum_c w_c`.
pub fn mean_field(
    model: &EnergyModel,
    y0: &LabelScores,
    iters: usize,
) -> Result<(LabelScores, ProxTrace)> {
    model.check_scores(y0)?;
    y0.check_feasible()?;
    let (n, m) = (model.n(), model.m());
    let self_weight = model.pairwise().self_weight();
    let mut rec = Recorder::new(model);
    let mut y = y0.clone();
    rec.record(Phase::Init, 0, 0, &y, m, count_uncertain(&y))?;
    for it in 0..iters {
        let msg = model.pairwise().filter(y.as_slice(), m);
        let mut next = LabelScores::zeros(n, m);
        for a in 0..n {
            let phi = model.unaries().row(a);
            let ya = y.row(a);
            let row = next.row_mut(a);
            for i in 0..m {
                row[i] = -phi[i] + msg[a * m + i] - self_weight * ya[i];
            }
            let top = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let mut z = 0.0;
            for v in row.iter_mut() {
                *v = (*v - top).exp();
                z += *v;
            }
            row.iter_mut().for_each(|v| *v /= z);
        }
        y = next;
        rec.record(Phase::MeanField, it + 1, 0, &y, m, count_uncertain(&y))?;
    }
    Ok((y, rec.trace))
}

/// Projected subgradient descent on the LP relaxation with step
/// `step0 / (1 + t)`.
///
/// The subgradient is `phi_ai + sum_b K_ab (1[y_ai >= y_bi] - 1[y_ai <= y_bi])`,
/// evaluated with the same ordered filter as the proximal solver.
pub fn sg_lp(
    model: &EnergyModel,
    y0: &LabelScores,
    iters: usize,
    step0: f64,
) -> Result<(LabelScores, ProxTrace)> {
    model.check_scores(y0)?;
    y0.check_feasible()?;
    if !(step0 >= 0.0 && step0.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "step must be >= 0, got {step0}"
        )));
    }
    let (n, m) = (model.n(), model.m());
    let mut rec = Recorder::new(model);
    let mut y = y0.clone();
    rec.record(Phase::Init, 0, 0, &y, m, count_uncertain(&y))?;
    for t in 0..iters {
        let eta = step0 / (1.0 + t as f64);
        let mut grad = model.unaries().as_slice().to_vec();
        for i in 0..m {
            let diff = model.pairwise().ordered_difference(&y.column(i));
            for a in 0..n {
                grad[a * m + i] += diff[a];
            }
        }
        if eta > 0.0 {
            for (v, g) in y.as_mut_slice().iter_mut().zip(&grad) {
                *v -= eta * g;
            }
            for a in 0..n {
                project_row(y.row_mut(a));
            }
        }
        rec.record(Phase::SubgradientLp, t + 1, 0, &y, m, count_uncertain(&y))?;
    }
    Ok((y, rec.trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Features, GaussianKernel, KernelTerm, PairwiseMode};

    fn model(weight: f64, phi: Vec<f64>, n: usize, m: usize) -> EnergyModel {
        let coords: Vec<f64> = (0..n).flat_map(|a| [a as f64, 0.0]).collect();
        let features = Features::new(n, 2, coords).unwrap();
        let kernel = GaussianKernel::spatial(weight.max(1e-300), 1.0).unwrap();
        let terms = if weight > 0.0 {
            vec![KernelTerm { kernel, features }]
        } else {
            Vec::new()
        };
        EnergyModel::new(
            LabelScores::new(n, m, phi).unwrap(),
            terms,
            PairwiseMode::Exact,
        )
        .unwrap()
    }

    #[test]
    fn mean_field_zero_model_keeps_uniform() {
        let m = model(0.0, vec![0.0; 6], 3, 2);
        let (y, trace) = mean_field(&m, &LabelScores::uniform(3, 2), 3).unwrap();
        assert!(y.as_slice().iter().all(|&v| (v - 0.5).abs() < 1e-15));
        assert_eq!(trace.outer.len(), 4);
    }

    #[test]
    fn mean_field_unary_only_is_softmax() {
        let phi = vec![0.0, 1.0, 2.0, 2.0, 0.5, 0.0];
        let m = model(0.0, phi.clone(), 2, 3);
        let (y, _) = mean_field(&m, &LabelScores::uniform(2, 3), 1).unwrap();
        for a in 0..2 {
            let z: f64 = (0..3).map(|i| (-phi[a * 3 + i]).exp()).sum();
            for i in 0..3 {
                assert!((y.get(a, i) - (-phi[a * 3 + i]).exp() / z).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn mean_field_preset_rows() {
        let m = model(1.0, vec![0.0, 1.0, 1.0, 0.0, 0.3, 0.2], 3, 2);
        let (y, trace) = mean_field(&m, &LabelScores::uniform(3, 2), MF5_ITERS).unwrap();
        assert!(y.is_feasible(1e-9));
        let mf_rows = trace
            .outer
            .iter()
            .filter(|r| r.phase == Phase::MeanField)
            .count();
        assert_eq!(mf_rows, 5);
    }

    #[test]
    fn sg_zero_step_is_identity() {
        let m = model(1.0, vec![0.0, 1.0, 1.0, 0.0], 2, 2);
        let y0 = LabelScores::new(2, 2, vec![0.3, 0.7, 0.9, 0.1]).unwrap();
        let (y, _) = sg_lp(&m, &y0, 1, 0.0).unwrap();
        assert_eq!(y, y0);
    }

    #[test]
    fn sg_unary_only_reaches_argmin() {
        let phi = vec![0.5, 0.1, 0.9, 0.2, 0.0, 0.4];
        let m = model(0.0, phi, 2, 3);
        let (y, _) = sg_lp(&m, &LabelScores::uniform(2, 3), 200, 2.0).unwrap();
        assert_eq!(y.argmax_labels(), vec![1, 1]);
        assert!(y.get(0, 1) > 0.999 && y.get(1, 1) > 0.999);
    }

    #[test]
    fn baselines_reject_infeasible_start() {
        let m = model(1.0, vec![0.0; 4], 2, 2);
        let bad = LabelScores::new(2, 2, vec![0.6, 0.6, 0.5, 0.5]).unwrap();
        assert!(mean_field(&m, &bad, 1).is_err());
        assert!(sg_lp(&m, &bad, 1, 0.01).is_err());
    }
}
