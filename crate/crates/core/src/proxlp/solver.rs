use std::time::Instant;

use super::accel::{count_uncertain, prune_labels, select_uncertain, AccelVariant};
use super::dual::{
    dual_objective, optimal_step, recover_primal, solve_beta, solve_gamma, DualState, QpSettings,
};
use super::simplex::project_row;
use super::trace::{InnerRecord, OuterRecord, Phase, ProxTrace};
use crate::energy::{ip_energy, lp_energy};
use crate::error::Result;
use crate::model::{argmax_round, EnergyModel, LabelScores, SolverConfig};

/// Proximal minimization of the LP relaxation.
///
/// Every outer step restarts the duals at zero, alternates the exact
/// `(beta, gamma)` block update with `fw_steps` Frank-Wolfe steps on
/// `alpha_tilde`, re-solves the block once more and projects the resulting
/// primal point onto the feasible set.
pub fn prox_solve(
    model: &EnergyModel,
    y0: &LabelScores,
    cfg: &SolverConfig,
) -> Result<(LabelScores, ProxTrace)> {
    solve(model, y0, cfg, None)
}

pub(crate) fn solve(
    model: &EnergyModel,
    y0: &LabelScores,
    cfg: &SolverConfig,
    variant: Option<AccelVariant>,
) -> Result<(LabelScores, ProxTrace)> {
    cfg.validate()?;
    model.check_scores(y0)?;
    y0.check_feasible()?;
    let (n, m) = (model.n(), model.m());
    let qp = QpSettings {
        method: cfg.qp_method,
        max_iters: cfg.qp_max_iters,
        tol: cfg.qp_tol,
        offset: cfg.qp_offset,
    };
    let mut rec = Recorder::new(model);
    let mut y = y0.clone();
    rec.record(
        Phase::Init,
        0,
        0,
        &y,
        m,
        count_uncertain(&y, cfg.uncertain_threshold),
    )?;

    for k in 0..cfg.outer_steps {
        let labels = match variant {
            None => (0..m).collect(),
            Some(_) => prune_labels(&y, cfg.label_prune_threshold),
        };
        let pixels = match variant {
            Some(AccelVariant::LabelsAndPixels) if k >= cfg.acc_switch_step => Some(
                select_uncertain(&y, cfg.uncertain_threshold, cfg.uncertain_fraction_cap),
            ),
            _ => None,
        };
        let uncertain = match &pixels {
            Some(p) => p.len(),
            None => count_uncertain(&y, cfg.uncertain_threshold),
        };
        let rows: Vec<usize> = pixels.unwrap_or_else(|| (0..n).collect());
        if !rows.is_empty() {
            let step = Block {
                labels: &labels,
                rows: &rows,
            };
            y = proximal_step(model, &y, &step, cfg, &qp, k + 1, &mut rec.trace);
        }
        rec.record(
            Phase::Prox,
            k + 1,
            cfg.fw_steps,
            &y,
            labels.len(),
            uncertain,
        )?;
    }
    Ok((y, rec.trace))
}

/// Rows and labels optimized by one proximal step.
struct Block<'a> {
    labels: &'a [usize],
    rows: &'a [usize],
}

/// One proximal step on the sub-block `rows x labels` of `y`; entries
/// outside the block act as fixed sources in the pairwise sums.
#[allow(clippy::too_many_arguments)]
fn proximal_step(
    model: &EnergyModel,
    y: &LabelScores,
    block: &Block<'_>,
    cfg: &SolverConfig,
    qp: &QpSettings,
    k: usize,
    trace: &mut ProxTrace,
) -> LabelScores {
    let m = model.m();
    let (labels, rows) = (block.labels, block.rows);
    let (ns, ms) = (rows.len(), labels.len());
    let all_labels = ms == m;
    let lambda = cfg.lambda;

    let mut phi = Vec::with_capacity(ns * ms);
    let mut y_k = Vec::with_capacity(ns * ms);
    for &a in rows {
        let start = y_k.len();
        for &l in labels {
            phi.push(model.unaries().get(a, l));
            y_k.push(y.get(a, l));
        }
        if !all_labels {
            project_row(&mut y_k[start..]);
        }
    }

    let cgrad = |y_tilde: &[f64]| -> Vec<f64> {
        let mut out = vec![0.0; ns * ms];
        for (j, &l) in labels.iter().enumerate() {
            let mut scores = y.column(l);
            for (r, &a) in rows.iter().enumerate() {
                scores[a] = y_tilde[r * ms + j];
            }
            let diff = model.pairwise().ordered_difference(&scores);
            for (r, &a) in rows.iter().enumerate() {
                out[r * ms + j] = -diff[a];
            }
        }
        out
    };

    let mut state = DualState::zeros(ns, ms);
    let solve_block = |state: &mut DualState| {
        state.gamma = solve_gamma(&state.alpha_tilde, &phi, &y_k, ms, lambda, &state.gamma, qp);
        state.beta = solve_beta(&state.alpha_tilde, &state.gamma, &phi, ms);
    };
    for t in 0..cfg.fw_steps {
        solve_block(&mut state);
        let g = state.objective(&phi, &y_k, lambda);
        let y_tilde = recover_primal(
            &state.alpha_tilde,
            &state.beta,
            &state.gamma,
            &phi,
            &y_k,
            lambda,
        );
        let a_s = cgrad(&y_tilde);
        let delta = optimal_step(&state.alpha_tilde, &a_s, &y_tilde, lambda);
        for (al, s) in state.alpha_tilde.iter_mut().zip(&a_s) {
            *al = (1.0 - delta) * *al + delta * s;
        }
        trace.inner.push(InnerRecord {
            k,
            t,
            dual_objective: g,
            step: Some(delta),
        });
    }
    solve_block(&mut state);
    trace.inner.push(InnerRecord {
        k,
        t: cfg.fw_steps,
        dual_objective: dual_objective(
            &state.alpha_tilde,
            &state.beta,
            &state.gamma,
            &phi,
            &y_k,
            lambda,
        ),
        step: None,
    });
    let mut y_next = recover_primal(
        &state.alpha_tilde,
        &state.beta,
        &state.gamma,
        &phi,
        &y_k,
        lambda,
    );
    for row in y_next.chunks_exact_mut(ms) {
        project_row(row);
    }

    let mut out = y.clone();
    for (r, &a) in rows.iter().enumerate() {
        let dst = out.row_mut(a);
        if !all_labels {
            dst.iter_mut().for_each(|v| *v = 0.0);
        }
        for (j, &l) in labels.iter().enumerate() {
            dst[l] = y_next[r * ms + j];
        }
    }
    out
}

/// Appends outer rows with wall time since construction.
pub(crate) struct Recorder<'a> {
    model: &'a EnergyModel,
    clock: Instant,
    pub trace: ProxTrace,
}

impl<'a> Recorder<'a> {
    pub fn new(model: &'a EnergyModel) -> Self {
        Self {
            model,
            clock: Instant::now(),
            trace: ProxTrace::default(),
        }
    }

    pub fn record(
        &mut self,
        phase: Phase,
        k: usize,
        t: usize,
        y: &LabelScores,
        active_labels: usize,
        uncertain_pixels: usize,
    ) -> Result<()> {
        let lp = lp_energy(self.model, y)?;
        let ip = ip_energy(self.model, &argmax_round(y))?;
        self.trace.outer.push(OuterRecord {
            phase,
            k,
            t,
            wall_ms: self.clock.elapsed().as_secs_f64() * 1e3,
            lp_energy: lp,
            ip_energy: ip,
            active_labels,
            uncertain_pixels,
        });
        Ok(())
    }
}
