//! Solver settings and the `key = value` model configuration file.
//!
//! The file is TOML. Top-level keys set solver parameters; each `[[kernel]]`
//! table adds one Gaussian component:
//!
//! ```text
//! lambda = 0.1
//! outer_steps = 10
//!
//! [[kernel]]
//! kind = "spatial"
//! weight = 2.247081
//! sigma = 3.535267
//!
//! [[kernel]]
//! kind = "bilateral"
//! weight = 1.699011
//! sigma_spatial = 31.232626
//! sigma_color = 7.949970
//! ```

use serde::Deserialize;

use super::GaussianKernel;
use crate::error::{Error, Result};

/// How the per-pixel `gamma` QPs are solved inside the proximal step.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QpMethod {
    /// Closed form through the simplex projection threshold.
    #[default]
    Exact,
    /// Multiplicative update, bounded by `qp_max_iters`.
    Multiplicative,
}

/// Parameters of the proximal solver and its accelerated variants.
#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    /// Proximal constant.
    pub lambda: f64,
    /// Number of proximal (outer) steps.
    pub outer_steps: usize,
    /// Frank-Wolfe iterations per proximal step.
    pub fw_steps: usize,
    /// Score levels of the ordered lattice filter.
    pub levels: usize,
    pub label_prune_threshold: f64,
    pub uncertain_threshold: f64,
    pub uncertain_fraction_cap: f64,
    pub qp_method: QpMethod,
    pub qp_max_iters: usize,
    pub qp_tol: f64,
    /// Offset added to warm-started QP iterates so zero entries can move.
    pub qp_offset: f64,
    /// Outer step after which the fully accelerated variant restricts the
    /// pixel set.
    pub acc_switch_step: usize,
    /// Initial subgradient step of the SG-LP baseline.
    pub sg_step0: f64,
    /// Iterations of the SG-LP baseline.
    pub sg_iters: usize,
    /// Sweeps of the plain mean-field baseline.
    pub mf_iters: usize,
    /// Mean-field sweeps used when mean-field provides the initialization.
    pub mf_init_iters: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            lambda: 0.1,
            outer_steps: 10,
            fw_steps: 5,
            levels: 10,
            label_prune_threshold: 0.01,
            uncertain_threshold: 0.95,
            uncertain_fraction_cap: 0.10,
            qp_method: QpMethod::Exact,
            qp_max_iters: 100,
            qp_tol: 1e-8,
            qp_offset: 1e-10,
            acc_switch_step: 5,
            sg_step0: 0.01,
            sg_iters: 50,
            mf_iters: 20,
            mf_init_iters: 5,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return bad(format!("lambda must be > 0, got {}", self.lambda));
        }
        if self.outer_steps == 0 || self.fw_steps == 0 {
            return bad("outer_steps and fw_steps must be positive".into());
        }
        if self.levels < 2 {
            return bad(format!("levels must be >= 2, got {}", self.levels));
        }
        // 0 disables pruning; any threshold below 1 is meaningful.
        if !(0.0..1.0).contains(&self.label_prune_threshold) {
            return bad(format!(
                "label_prune_threshold must be in [0, 1), got {}",
                self.label_prune_threshold
            ));
        }
        if !(self.uncertain_threshold > 0.0 && self.uncertain_threshold < 1.0) {
            return bad(format!(
                "uncertain_threshold must be in (0, 1), got {}",
                self.uncertain_threshold
            ));
        }
        if !(self.uncertain_fraction_cap > 0.0 && self.uncertain_fraction_cap <= 1.0) {
            return bad(format!(
                "uncertain_fraction_cap must be in (0, 1], got {}",
                self.uncertain_fraction_cap
            ));
        }
        if self.qp_max_iters == 0 || self.qp_tol.is_nan() || self.qp_tol <= 0.0 {
            return bad("qp_max_iters and qp_tol must be positive".into());
        }
        if !(self.qp_offset > 0.0 && self.qp_offset < 1.0) {
            return bad(format!(
                "qp_offset must be in (0, 1), got {}",
                self.qp_offset
            ));
        }
        if !(self.sg_step0 >= 0.0 && self.sg_step0.is_finite()) {
            return bad(format!("sg_step0 must be >= 0, got {}", self.sg_step0));
        }
        Ok(())
    }
}

/// One `[[kernel]]` table.
#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum KernelSpec {
    Spatial {
        weight: f64,
        sigma: f64,
    },
    Bilateral {
        weight: f64,
        sigma_spatial: f64,
        sigma_color: f64,
    },
}

impl KernelSpec {
    pub fn to_kernel(&self) -> Result<GaussianKernel> {
        match *self {
            KernelSpec::Spatial { weight, sigma } => GaussianKernel::spatial(weight, sigma),
            KernelSpec::Bilateral {
                weight,
                sigma_spatial,
                sigma_color,
            } => GaussianKernel::bilateral(weight, sigma_spatial, sigma_color),
        }
    }
}

#[derive(Deserialize)]
struct RawConfig {
    #[serde(default, rename = "kernel")]
    kernels: Vec<KernelSpec>,
    #[serde(flatten)]
    solver: toml::Table,
}

/// Parsed configuration file: the kernel mixture plus solver settings.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelConfig {
    pub kernels: Vec<GaussianKernel>,
    pub solver: SolverConfig,
}

impl ModelConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let solver: SolverConfig = raw
            .solver
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        solver.validate()?;
        let kernels = raw
            .kernels
            .iter()
            .map(KernelSpec::to_kernel)
            .collect::<Result<Vec<_>>>()
            .map_err(|e| Error::Config(e.to_string()))?;
        Ok(Self { kernels, solver })
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }
}
