//! Dual blocks of the proximal subproblem.
//!
//! For the current proximal centre `y_k` the dual objective is
//!
//! ```text
//! g = lambda/2 |u|^2 + <u, y_k> - <1, beta>,   u = alpha_tilde + B beta + gamma - phi
//! ```
//!
//! with `alpha_tilde = A alpha` stored densely (`n x m`), `(B beta)_ai = beta_a`
//! and `gamma >= 0`. All routines here are O(nm).

use rayon::prelude::*;

use super::simplex::simplex_threshold;
use crate::model::QpMethod;

/// Dual iterate of one proximal step. `alpha` itself is never stored.
#[derive(Clone, Debug, PartialEq)]
pub struct DualState {
    m: usize,
    pub alpha_tilde: Vec<f64>,
    pub beta: Vec<f64>,
    pub gamma: Vec<f64>,
}

impl DualState {
    /// The feasible starting point `alpha = 0, beta = 0, gamma = 0`.
    pub fn zeros(n: usize, m: usize) -> Self {
        Self {
            m,
            alpha_tilde: vec![0.0; n * m],
            beta: vec![0.0; n],
            gamma: vec![0.0; n * m],
        }
    }

    pub fn n(&self) -> usize {
        self.beta.len()
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Dual objective at this state for unaries `phi` and centre `y_k`.
    pub fn objective(&self, phi: &[f64], y_k: &[f64], lambda: f64) -> f64 {
        dual_objective(&self.alpha_tilde, &self.beta, &self.gamma, phi, y_k, lambda)
    }
}

pub fn dual_objective(
    alpha_tilde: &[f64],
    beta: &[f64],
    gamma: &[f64],
    phi: &[f64],
    y_k: &[f64],
    lambda: f64,
) -> f64 {
    let m = alpha_tilde.len() / beta.len();
    let mut total = 0.0;
    for (a, &b) in beta.iter().enumerate() {
        for i in a * m..(a + 1) * m {
            let u = alpha_tilde[i] + b + gamma[i] - phi[i];
            total += 0.5 * lambda * u * u + u * y_k[i];
        }
        total -= b;
    }
    total
}

/// Closed-form minimizer over `beta` for fixed `alpha_tilde`, `gamma`:
/// `beta_a = sum_i (phi_ai - alpha_tilde_ai - gamma_ai) / m`.
///
/// This zeroes `d g / d beta_a = lambda sum_i u_ai + sum_i y_k,ai - 1`
/// whenever the rows of `y_k` sum to one.
pub fn solve_beta(alpha_tilde: &[f64], gamma: &[f64], phi: &[f64], m: usize) -> Vec<f64> {
    alpha_tilde
        .chunks_exact(m)
        .zip(gamma.chunks_exact(m))
        .zip(phi.chunks_exact(m))
        .map(|((al, ga), ph)| {
            let s: f64 = (0..m).map(|i| ph[i] - al[i] - ga[i]).sum();
            s / m as f64
        })
        .collect()
}

/// Settings of the per-pixel multiplicative QP iteration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QpSettings {
    pub method: QpMethod,
    pub max_iters: usize,
    /// Stop when the relative objective change falls below this.
    pub tol: f64,
    /// Strictly positive offset `c` in the update and in the warm start.
    pub offset: f64,
}

impl Default for QpSettings {
    fn default() -> Self {
        Self {
            method: QpMethod::Exact,
            max_iters: 100,
            tol: 1e-8,
            offset: 1e-10,
        }
    }
}

/// Objective `1/2 g^T Q g - <g, h>` with `Q = lambda (I - 1 1^T / m)`.
pub fn pixel_qp_objective(lambda: f64, h: &[f64], gamma: &[f64]) -> f64 {
    let m = h.len() as f64;
    let s: f64 = gamma.iter().sum();
    let sq: f64 = gamma.iter().map(|g| g * g).sum();
    0.5 * lambda * (sq - s * s / m) - h.iter().zip(gamma).map(|(a, b)| a * b).sum::<f64>()
}

/// Gradient `Q gamma - h`.
pub fn pixel_qp_gradient(lambda: f64, h: &[f64], gamma: &[f64]) -> Vec<f64> {
    let m = h.len() as f64;
    let mean = gamma.iter().sum::<f64>() / m;
    gamma
        .iter()
        .zip(h)
        .map(|(g, hi)| lambda * (g - mean) - hi)
        .collect()
}

/// Minimizes `1/2 g^T Q g - <g, h>` over `g >= 0` by the multiplicative
/// update
///
/// ```text
/// g_i <- g_i (2 (Q- g)_i + h+_i + c) / ((|Q| g)_i + h-_i + c)
/// ```
///
/// where `Q- = max(-Q, 0)` and `|Q|` are applied in O(m) through the
/// identity-plus-all-ones structure of `Q`. `gamma` is the starting point and
/// must be strictly positive; on return it holds the best iterate seen.
/// Returns the number of updates performed.
pub fn solve_pixel_qp(lambda: f64, h: &[f64], gamma: &mut [f64], settings: &QpSettings) -> usize {
    let m = h.len();
    let mf = m as f64;
    let c = settings.offset;
    let off = lambda / mf;
    let diag_abs = lambda * (1.0 - 2.0 / mf);
    let mut best = pixel_qp_objective(lambda, h, gamma);
    let mut best_gamma = gamma.to_vec();
    let mut prev = best;
    let mut iters = 0;
    while iters < settings.max_iters {
        iters += 1;
        let s: f64 = gamma.iter().sum();
        for (g, &hi) in gamma.iter_mut().zip(h) {
            // (Q- g)_i = lambda/m (s - g_i), (|Q| g)_i = lambda (1 - 2/m) g_i + lambda s / m
            let num = 2.0 * off * (s - *g) + hi.max(0.0) + c;
            let den = diag_abs * *g + off * s + (-hi).max(0.0) + c;
            *g *= num / den;
        }
        let obj = pixel_qp_objective(lambda, h, gamma);
        if obj < best {
            best = obj;
            best_gamma.copy_from_slice(gamma);
        }
        if (prev - obj).abs() <= settings.tol * prev.abs().max(obj.abs()).max(f64::MIN_POSITIVE) {
            break;
        }
        prev = obj;
    }
    gamma.copy_from_slice(&best_gamma);
    iters
}

/// Exact minimizer of `1/2 g^T Q g - <g, h>` over `g >= 0`.
///
/// At the optimum `Q g - h` is the projection of `-h` onto the simplex of
/// mass `r = -sum h`, and `g_i = max(theta + h_i, 0) / lambda` with `theta`
/// that projection's threshold. In the solver `r = 1`. For `r <= 0` the
/// problem is unbounded or has `g = 0` among its minimizers; zero is returned.
pub fn exact_pixel_qp(lambda: f64, h: &[f64]) -> Vec<f64> {
    let r = -h.iter().sum::<f64>();
    if r <= 0.0 {
        return vec![0.0; h.len()];
    }
    let z: Vec<f64> = h.iter().map(|v| -v / r).collect();
    let theta = r * simplex_threshold(&z);
    h.iter().map(|hi| (theta + hi).max(0.0) / lambda).collect()
}

/// Linear coefficient of the per-pixel QP in the `-<g, h>` convention:
/// `h = -Q (alpha_tilde_a - phi_a) - y_k,a`.
pub fn pixel_qp_linear(lambda: f64, alpha_tilde: &[f64], phi: &[f64], y_k: &[f64]) -> Vec<f64> {
    let m = phi.len() as f64;
    let mean: f64 = alpha_tilde.iter().zip(phi).map(|(a, p)| a - p).sum::<f64>() / m;
    alpha_tilde
        .iter()
        .zip(phi)
        .zip(y_k)
        .map(|((a, p), y)| -lambda * ((a - p) - mean) - y)
        .collect()
}

/// Minimizes the dual over `gamma >= 0` (with `beta` eliminated), one
/// independent `m`-dimensional QP per pixel. `warm` is the previous `gamma`;
/// the multiplicative update starts each QP from `warm + c`.
pub fn solve_gamma(
    alpha_tilde: &[f64],
    phi: &[f64],
    y_k: &[f64],
    m: usize,
    lambda: f64,
    warm: &[f64],
    settings: &QpSettings,
) -> Vec<f64> {
    let mut gamma: Vec<f64> = warm.iter().map(|g| g + settings.offset).collect();
    gamma
        .par_chunks_mut(m)
        .zip(alpha_tilde.par_chunks(m))
        .zip(phi.par_chunks(m))
        .zip(y_k.par_chunks(m))
        .for_each(|(((g, al), ph), yk)| {
            let h = pixel_qp_linear(lambda, al, ph, yk);
            match settings.method {
                QpMethod::Exact => g.copy_from_slice(&exact_pixel_qp(lambda, &h)),
                QpMethod::Multiplicative => {
                    solve_pixel_qp(lambda, &h, g, settings);
                }
            }
        });
    gamma
}

/// Primal point of the current duals:
/// `y = lambda (alpha_tilde + B beta + gamma - phi) + y_k` (may be infeasible).
pub fn recover_primal(
    alpha_tilde: &[f64],
    beta: &[f64],
    gamma: &[f64],
    phi: &[f64],
    y_k: &[f64],
    lambda: f64,
) -> Vec<f64> {
    let m = phi.len() / beta.len();
    (0..phi.len())
        .map(|i| lambda * (alpha_tilde[i] + beta[i / m] + gamma[i] - phi[i]) + y_k[i])
        .collect()
}

/// Exact line minimizer of `g` along `alpha_tilde -> A s`, clipped to [0, 1]:
/// `delta = <alpha_tilde - A s, y~> / (lambda |alpha_tilde - A s|^2)`.
pub fn optimal_step(alpha_tilde: &[f64], a_s: &[f64], y_tilde: &[f64], lambda: f64) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for ((&al, &s), &y) in alpha_tilde.iter().zip(a_s).zip(y_tilde) {
        let diff = al - s;
        num += diff * y;
        den += diff * diff;
    }
    let den = lambda * den;
    if den < 1e-12 {
        return 0.0;
    }
    (num / den).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn beta_closed_form() {
        // phi = (1, 3): sum(phi - 0 - 0) / 2 = 2.
        assert_eq!(
            solve_beta(&[0.0, 0.0], &[0.0, 0.0], &[1.0, 3.0], 2),
            vec![2.0]
        );
        assert_eq!(
            solve_beta(&[0.0; 4], &[0.0; 4], &[0.0; 4], 2),
            vec![0.0, 0.0]
        );
    }

    #[test]
    fn q_matrix_two_labels() {
        // Q = lambda (I - 1/m): rows (0.05, -0.05) and (-0.05, 0.05) for lambda = 0.1.
        let lambda = 0.1;
        let h = [0.0, 0.0];
        let q0 = pixel_qp_gradient(lambda, &h, &[1.0, 0.0]);
        let q1 = pixel_qp_gradient(lambda, &h, &[0.0, 1.0]);
        assert!((q0[0] - 0.05).abs() < 1e-15 && (q0[1] + 0.05).abs() < 1e-15);
        assert!((q1[0] + 0.05).abs() < 1e-15 && (q1[1] - 0.05).abs() < 1e-15);
    }

    #[test]
    fn nonpositive_h_gives_zero() {
        let h = [-0.3, -1.0, 0.0];
        let mut g = [1e-10; 3];
        solve_pixel_qp(0.1, &h, &mut g, &QpSettings::default());
        let norm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!(norm <= 1e-6, "{g:?}");
    }

    #[test]
    fn multiplicative_update_keeps_sign() {
        let h = [0.4, -0.2, 0.1, -0.9];
        let mut g = [1e-10; 4];
        solve_pixel_qp(
            0.5,
            &h,
            &mut g,
            &QpSettings {
                max_iters: 7,
                ..Default::default()
            },
        );
        assert!(g.iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn zero_duals_recover_centre() {
        let y_k = [0.2, 0.8, 0.5, 0.5];
        let y = recover_primal(&[0.0; 4], &[0.0; 2], &[0.0; 4], &[0.0; 4], &y_k, 0.1);
        assert_eq!(y, y_k);
    }

    #[test]
    fn step_clipping() {
        // <alpha - As, y> = 0.3, |alpha - As|^2 = 2, lambda = 0.1 -> 1.5 -> 1.
        let al = [1.0, 0.0];
        let a_s = [0.0, 1.0];
        let y = [0.15, -0.15];
        assert_eq!(optimal_step(&al, &a_s, &y, 0.1), 1.0);
        assert_eq!(optimal_step(&al, &a_s, &[-0.1, 0.1], 0.1), 0.0);
        assert_eq!(optimal_step(&[0.5], &[0.5], &[1.0], 0.1), 0.0);
    }

    #[test]
    fn exact_qp_satisfies_kkt() {
        let h = [0.3, -0.2, 0.05, -1.0, 0.4];
        let g = exact_pixel_qp(0.1, &h);
        let grad = pixel_qp_gradient(0.1, &h, &g);
        for (x, d) in g.iter().zip(&grad) {
            assert!(*x >= 0.0);
            assert!(x.min(*d).abs() < 1e-12, "{g:?} {grad:?}");
        }
    }

    #[test]
    fn exact_block_projects_primal() {
        // With the exact block, the recovered primal is the simplex projection
        // of y_k + lambda (alpha_tilde - phi).
        let (al, phi, yk) = ([0.4, -0.3, 1.0], [0.2, 0.9, 0.1], [0.2, 0.5, 0.3]);
        let lambda = 0.5;
        let settings = QpSettings::default();
        let gamma = solve_gamma(&al, &phi, &yk, 3, lambda, &[0.0; 3], &settings);
        let beta = solve_beta(&al, &gamma, &phi, 3);
        let y = recover_primal(&al, &beta, &gamma, &phi, &yk, lambda);
        let mut z: Vec<f64> = (0..3).map(|i| yk[i] + lambda * (al[i] - phi[i])).collect();
        crate::proxlp::project_row(&mut z);
        for (a, b) in y.iter().zip(&z) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
