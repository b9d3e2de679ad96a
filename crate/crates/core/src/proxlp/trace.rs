use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Phase {
    Init,
    MeanField,
    SubgradientLp,
    Prox,
}

impl Phase {
    pub fn as_str(self) -> &'static str {
        match self {
            Phase::Init => "init",
            Phase::MeanField => "mf",
            Phase::SubgradientLp => "sglp",
            Phase::Prox => "prox",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "init" => Phase::Init,
            "mf" => Phase::MeanField,
            "sglp" => Phase::SubgradientLp,
            "prox" => Phase::Prox,
            _ => return None,
        })
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Energies after one outer iteration (or of the initial point, `k = 0`).
#[derive(Clone, Debug, PartialEq)]
pub struct OuterRecord {
    pub phase: Phase,
    pub k: usize,
    pub t: usize,
    pub wall_ms: f64,
    /// LP objective of the current (feasible) scores.
    pub lp_energy: f64,
    /// Integer energy of the argmax-rounded scores.
    pub ip_energy: f64,
    pub active_labels: usize,
    pub uncertain_pixels: usize,
}

/// Dual progress inside one proximal step.
#[derive(Clone, Debug, PartialEq)]
pub struct InnerRecord {
    pub k: usize,
    pub t: usize,
    /// Dual objective right after the `(beta, gamma)` block update.
    pub dual_objective: f64,
    /// Frank-Wolfe step taken afterwards (`None` for the closing block update).
    pub step: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ProxTrace {
    pub outer: Vec<OuterRecord>,
    pub inner: Vec<InnerRecord>,
}

impl ProxTrace {
    pub fn last(&self) -> Option<&OuterRecord> {
        self.outer.last()
    }

    /// Dual objectives of outer step `k`, in inner-iteration order.
    pub fn dual_values(&self, k: usize) -> Vec<f64> {
        self.inner
            .iter()
            .filter(|r| r.k == k)
            .map(|r| r.dual_objective)
            .collect()
    }
}
