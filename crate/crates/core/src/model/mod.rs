//! Domain types: label scores, Gaussian kernels, image features and the
//! dense CRF energy model.

mod config;

pub use config::{KernelSpec, ModelConfig, QpMethod, SolverConfig};

use crate::error::{Error, Result};
use crate::pairwise::Pairwise;

/// Dense `n x m` matrix of per-pixel label scores, row-major by pixel.
///
/// The same layout is used for unary potentials. Feasible scores lie on the
/// per-pixel probability simplex; solver iterates may leave it.
#[derive(Clone, Debug, PartialEq)]
pub struct LabelScores {
    n: usize,
    m: usize,
    values: Vec<f64>,
}

/// Tolerance on row sums used by [`LabelScores::is_feasible`] callers.
pub const FEASIBILITY_TOL: f64 = 1e-9;

impl LabelScores {
    pub fn new(n: usize, m: usize, values: Vec<f64>) -> Result<Self> {
        if n == 0 || m == 0 {
            return Err(Error::Dimension(format!(
                "label scores need n >= 1 and m >= 1, got {n}x{m}"
            )));
        }
        if values.len() != n * m {
            return Err(Error::Dimension(format!(
                "expected {} values for {n}x{m}, got {}",
                n * m,
                values.len()
            )));
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self { n, m, values })
    }

    pub fn zeros(n: usize, m: usize) -> Self {
        assert!(n > 0 && m > 0, "empty label scores");
        Self {
            n,
            m,
            values: vec![0.0; n * m],
        }
    }

    /// Every pixel gets `1/m` on every label.
    pub fn uniform(n: usize, m: usize) -> Self {
        assert!(n > 0 && m > 0, "empty label scores");
        Self {
            n,
            m,
            values: vec![1.0 / m as f64; n * m],
        }
    }

    /// One-hot scores from 0-based label indices.
    pub fn from_labels(labels: &[usize], m: usize) -> Result<Self> {
        let mut y = Self::zeros(labels.len().max(1), m);
        if labels.is_empty() {
            return Err(Error::Dimension("no pixels".into()));
        }
        for (a, &l) in labels.iter().enumerate() {
            if l >= m {
                return Err(Error::Dimension(format!(
                    "label {l} out of range for m = {m}"
                )));
            }
            y.values[a * m + l] = 1.0;
        }
        Ok(y)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.values
    }

    pub fn row(&self, a: usize) -> &[f64] {
        &self.values[a * self.m..(a + 1) * self.m]
    }

    pub fn row_mut(&mut self, a: usize) -> &mut [f64] {
        &mut self.values[a * self.m..(a + 1) * self.m]
    }

    pub fn get(&self, a: usize, i: usize) -> f64 {
        self.values[a * self.m + i]
    }

    pub fn set(&mut self, a: usize, i: usize, v: f64) {
        self.values[a * self.m + i] = v;
    }

    pub fn rows(&self) -> std::slice::ChunksExact<'_, f64> {
        self.values.chunks_exact(self.m)
    }

    /// Copy of label channel `i` across all pixels.
    pub fn column(&self, i: usize) -> Vec<f64> {
        self.rows().map(|r| r[i]).collect()
    }

    /// Rows sum to one within `tol` and no entry is below `-tol`.
    pub fn is_feasible(&self, tol: f64) -> bool {
        self.rows().all(|r| {
            let s: f64 = r.iter().sum();
            (s - 1.0).abs() <= tol && r.iter().all(|&v| v >= -tol)
        })
    }

    pub fn check_feasible(&self) -> Result<()> {
        for (a, r) in self.rows().enumerate() {
            let s: f64 = r.iter().sum();
            if (s - 1.0).abs() > FEASIBILITY_TOL || r.iter().any(|&v| v < 0.0) {
                return Err(Error::Infeasible(format!(
                    "pixel {a} has row sum {s} or a negative entry"
                )));
            }
        }
        Ok(())
    }

    pub fn is_integral(&self) -> bool {
        self.rows().all(|r| {
            r.iter().all(|&v| v == 0.0 || v == 1.0) && r.iter().filter(|&&v| v == 1.0).count() == 1
        })
    }

    /// Per-pixel label of maximal score; ties go to the lowest index.
    pub fn argmax_labels(&self) -> Vec<usize> {
        self.rows()
            .map(|r| {
                let mut best = 0;
                for (i, &v) in r.iter().enumerate().skip(1) {
                    if v > r[best] {
                        best = i;
                    }
                }
                best
            })
            .collect()
    }

    /// Per-pixel maximum score.
    pub fn row_max(&self) -> Vec<f64> {
        self.rows()
            .map(|r| r.iter().copied().fold(f64::NEG_INFINITY, f64::max))
            .collect()
    }
}

/// Rounds each pixel to its highest-scoring label.
pub fn argmax_round(y: &LabelScores) -> LabelScores {
    let labels = y.argmax_labels();
    let mut out = LabelScores::zeros(y.n(), y.m());
    for (a, l) in labels.into_iter().enumerate() {
        out.set(a, l, 1.0);
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FeatureKind {
    /// Pixel position `(x, y)`.
    Spatial,
    /// Position and color `(x, y, r, g, b)`.
    Bilateral,
}

impl FeatureKind {
    pub fn dim(self) -> usize {
        match self {
            FeatureKind::Spatial => 2,
            FeatureKind::Bilateral => 5,
        }
    }
}

/// One weighted Gaussian component of the pairwise potential.
///
/// `sigmas` are standard deviations per feature dimension, so the kernel is
/// `exp(-sum_k (df_k / sigma_k)^2 / 2)`.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianKernel {
    pub weight: f64,
    pub kind: FeatureKind,
    pub sigmas: Vec<f64>,
}

impl GaussianKernel {
    pub fn new(weight: f64, kind: FeatureKind, sigmas: Vec<f64>) -> Result<Self> {
        if !(weight >= 0.0 && weight.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "kernel weight must be finite and >= 0, got {weight}"
            )));
        }
        if sigmas.len() != kind.dim() {
            return Err(Error::InvalidParameter(format!(
                "{kind:?} kernel needs {} sigmas, got {}",
                kind.dim(),
                sigmas.len()
            )));
        }
        if let Some(s) = sigmas.iter().find(|s| !(**s > 0.0 && s.is_finite())) {
            return Err(Error::InvalidParameter(format!(
                "kernel sigma must be finite and > 0, got {s}"
            )));
        }
        Ok(Self {
            weight,
            kind,
            sigmas,
        })
    }

    pub fn spatial(weight: f64, sigma: f64) -> Result<Self> {
        Self::new(weight, FeatureKind::Spatial, vec![sigma; 2])
    }

    pub fn bilateral(weight: f64, sigma_spatial: f64, sigma_color: f64) -> Result<Self> {
        Self::new(
            weight,
            FeatureKind::Bilateral,
            vec![
                sigma_spatial,
                sigma_spatial,
                sigma_color,
                sigma_color,
                sigma_color,
            ],
        )
    }

    pub fn dim(&self) -> usize {
        self.kind.dim()
    }
}

/// Per-pixel positions and 8-bit colors of a row-major image.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FeatureField {
    width: usize,
    height: usize,
    colors: Vec<[u8; 3]>,
}

impl FeatureField {
    pub fn new(width: usize, height: usize, colors: Vec<[u8; 3]>) -> Result<Self> {
        let n = width
            .checked_mul(height)
            .ok_or_else(|| Error::Dimension(format!("{width}x{height} overflows")))?;
        if n == 0 || colors.len() != n {
            return Err(Error::Dimension(format!(
                "{width}x{height} image needs {n} colors, got {}",
                colors.len()
            )));
        }
        Ok(Self {
            width,
            height,
            colors,
        })
    }

    pub fn n(&self) -> usize {
        self.colors.len()
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn colors(&self) -> &[[u8; 3]] {
        &self.colors
    }

    /// `(x, y)` of pixel `a`, measured from the top-left corner.
    pub fn position(&self, a: usize) -> (usize, usize) {
        (a % self.width, a / self.width)
    }
}

/// Row-major `n x d` matrix of kernel features.
#[derive(Clone, Debug, PartialEq)]
pub struct Features {
    n: usize,
    d: usize,
    data: Vec<f64>,
}

impl Features {
    pub fn new(n: usize, d: usize, data: Vec<f64>) -> Result<Self> {
        if n == 0 || d == 0 || data.len() != n * d {
            return Err(Error::Dimension(format!(
                "features {n}x{d} need {} values, got {}",
                n * d,
                data.len()
            )));
        }
        if let Some(index) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self { n, d, data })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn point(&self, a: usize) -> &[f64] {
        &self.data[a * self.d..(a + 1) * self.d]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Unit-bandwidth Gaussian `exp(-|f_a - f_b|^2 / 2)` between two points.
    pub fn kernel(&self, a: usize, b: usize) -> f64 {
        let d2: f64 = self
            .point(a)
            .iter()
            .zip(self.point(b))
            .map(|(x, y)| (x - y) * (x - y))
            .sum();
        (-0.5 * d2).exp()
    }
}

/// Scales raw position/color coordinates by the kernel's standard deviations.
pub fn make_features(image: &FeatureField, kernel: &GaussianKernel) -> Features {
    let d = kernel.dim();
    let inv: Vec<f64> = kernel.sigmas.iter().map(|s| 1.0 / s).collect();
    let mut data = Vec::with_capacity(image.n() * d);
    for (a, c) in image.colors().iter().enumerate() {
        let (x, y) = image.position(a);
        data.push(x as f64 * inv[0]);
        data.push(y as f64 * inv[1]);
        if kernel.kind == FeatureKind::Bilateral {
            for k in 0..3 {
                data.push(f64::from(c[k]) * inv[2 + k]);
            }
        }
    }
    Features {
        n: image.n(),
        d,
        data,
    }
}

/// A Gaussian kernel together with the features it is evaluated on.
#[derive(Clone, Debug)]
pub struct KernelTerm {
    pub kernel: GaussianKernel,
    pub features: Features,
}

/// How pairwise sums over all pixel pairs are evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PairwiseMode {
    /// Permutohedral lattice with the given number of score levels.
    Lattice { levels: usize },
    /// Dense O(n^2) summation with exact score comparisons.
    Exact,
}

/// Dense CRF energy with Potts compatibility and a mixture of Gaussian
/// kernels: `K_ab = sum_c w_c k(f_a^c, f_b^c)`.
#[derive(Debug)]
pub struct EnergyModel {
    unaries: LabelScores,
    pairwise: Pairwise,
}

impl EnergyModel {
    pub fn new(unaries: LabelScores, terms: Vec<KernelTerm>, mode: PairwiseMode) -> Result<Self> {
        if unaries.m() < 2 {
            return Err(Error::Dimension(format!(
                "energy model needs m >= 2 labels, got {}",
                unaries.m()
            )));
        }
        for t in &terms {
            if t.features.n() != unaries.n() {
                return Err(Error::Dimension(format!(
                    "kernel features cover {} pixels, unaries cover {}",
                    t.features.n(),
                    unaries.n()
                )));
            }
            if t.features.d() != t.kernel.dim() {
                return Err(Error::Dimension(format!(
                    "{:?} kernel expects d = {}, features have d = {}",
                    t.kernel.kind,
                    t.kernel.dim(),
                    t.features.d()
                )));
            }
        }
        let pairwise = Pairwise::new(unaries.n(), terms, mode)?;
        Ok(Self { unaries, pairwise })
    }

    /// Builds kernel features from an image and a lattice-backed model.
    pub fn from_image(
        unaries: LabelScores,
        image: &FeatureField,
        kernels: &[GaussianKernel],
        levels: usize,
    ) -> Result<Self> {
        if image.n() != unaries.n() {
            return Err(Error::Dimension(format!(
                "image has {} pixels, unaries have {}",
                image.n(),
                unaries.n()
            )));
        }
        let terms = kernels
            .iter()
            .map(|k| KernelTerm {
                kernel: k.clone(),
                features: make_features(image, k),
            })
            .collect();
        Self::new(unaries, terms, PairwiseMode::Lattice { levels })
    }

    pub fn n(&self) -> usize {
        self.unaries.n()
    }

    pub fn m(&self) -> usize {
        self.unaries.m()
    }

    pub fn unaries(&self) -> &LabelScores {
        &self.unaries
    }

    pub fn pairwise(&self) -> &Pairwise {
        &self.pairwise
    }

    /// Same pairwise structure, different unaries.
    pub fn with_unaries(&self, unaries: LabelScores) -> Result<Self> {
        if unaries.n() != self.n() || unaries.m() < 2 {
            return Err(Error::Dimension(format!(
                "replacement unaries are {}x{}, model has n = {}",
                unaries.n(),
                unaries.m(),
                self.n()
            )));
        }
        Ok(Self {
            unaries,
            pairwise: self.pairwise.clone(),
        })
    }

    pub fn check_scores(&self, y: &LabelScores) -> Result<()> {
        if y.n() != self.n() || y.m() != self.m() {
            return Err(Error::Dimension(format!(
                "scores are {}x{}, model is {}x{}",
                y.n(),
                y.m(),
                self.n(),
                self.m()
            )));
        }
        Ok(())
    }
}
