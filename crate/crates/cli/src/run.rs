//! Solver orchestration for `proxlp solve`.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use proxlp::model::{EnergyModel, LabelScores, ModelConfig};
use proxlp::proxlp::{prox_solve, prox_solve_accelerated, AccelVariant, OuterRecord, ProxTrace};
use proxlp::{mean_field, sg_lp, MF5_ITERS};

use crate::error::{io_err, CliError, Result};
use crate::io::{load_image, load_unaries, save_unaries, write_label_image, write_label_indices};
use crate::trace;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolverKind {
    Mf,
    Mf5,
    SgLp,
    ProxLp,
    ProxLpL,
    ProxLpAcc,
}

impl SolverKind {
    pub const ALL: [SolverKind; 6] = [
        SolverKind::Mf,
        SolverKind::Mf5,
        SolverKind::SgLp,
        SolverKind::ProxLp,
        SolverKind::ProxLpL,
        SolverKind::ProxLpAcc,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Mf => "mf",
            SolverKind::Mf5 => "mf5",
            SolverKind::SgLp => "sglp",
            SolverKind::ProxLp => "proxlp",
            SolverKind::ProxLpL => "proxlp_l",
            SolverKind::ProxLpAcc => "proxlp_acc",
        }
    }

    /// Mean-field solvers start from uniform scores, the LP solvers from a
    /// short mean-field run.
    pub fn default_init(self) -> Init {
        match self {
            SolverKind::Mf | SolverKind::Mf5 => Init::Uniform,
            _ => Init::MeanField,
        }
    }
}

impl FromStr for SolverKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Self::ALL.iter().map(|k| k.name()).collect();
                format!(
                    "unknown solver {s:?} (expected one of {})",
                    names.join(", ")
                )
            })
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Init {
    Uniform,
    /// `mf_init_iters` mean-field sweeps from uniform scores.
    MeanField,
    /// Scores saved in the unary file format.
    File(PathBuf),
}

impl FromStr for Init {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "uniform" => Ok(Init::Uniform),
            "mf" => Ok(Init::MeanField),
            _ => match s.strip_prefix("file:") {
                Some(p) if !p.is_empty() => Ok(Init::File(PathBuf::from(p))),
                _ => Err(format!(
                    "unknown init {s:?} (expected uniform, mf or file:<path>)"
                )),
            },
        }
    }
}

impl fmt::Display for Init {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Init::Uniform => f.write_str("uniform"),
            Init::MeanField => f.write_str("mf"),
            Init::File(p) => write!(f, "file:{}", p.display()),
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunSpec {
    pub image: PathBuf,
    pub unaries: PathBuf,
    /// TOML configuration; built-in defaults (and no kernels) when absent.
    pub config: Option<PathBuf>,
    pub solver: SolverKind,
    /// `None` selects [`SolverKind::default_init`].
    pub init: Option<Init>,
    pub out: PathBuf,
    pub seed: u64,
    /// Record wall-clock times in the trace; off for reproducible output.
    pub timing: bool,
}

impl RunSpec {
    pub fn init(&self) -> Init {
        self.init
            .clone()
            .unwrap_or_else(|| self.solver.default_init())
    }

    /// Checks that every input path exists.
    pub fn validate(&self) -> Result<()> {
        let mut inputs: Vec<&Path> = vec![&self.image, &self.unaries];
        if let Some(c) = &self.config {
            inputs.push(c);
        }
        let init = self.init();
        if let Init::File(p) = &init {
            inputs.push(p);
        }
        for p in inputs {
            if !p.is_file() {
                return Err(CliError::Usage(format!("{}: no such file", p.display())));
            }
        }
        Ok(())
    }
}

/// What a run produced; also written to `summary.txt`.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub scores: LabelScores,
    pub labels: Vec<usize>,
    pub trace: ProxTrace,
    pub wall_ms: f64,
}

impl Outcome {
    pub fn last(&self) -> &OuterRecord {
        self.trace.last().expect("trace has an init row")
    }
}

/// Rows of an initialization file may be off the simplex by f32 rounding;
/// such rows are renormalized. Anything further off is rejected.
fn normalize_init(mut y: LabelScores, path: &Path) -> Result<LabelScores> {
    for a in 0..y.n() {
        let row = y.row_mut(a);
        let sum: f64 = row.iter().sum();
        if row.iter().any(|&v| v.is_nan() || v < -1e-6) || (sum - 1.0).abs() > 1e-5 {
            return Err(CliError::Mismatch(format!(
                "{}: row {a} is not on the probability simplex",
                path.display()
            )));
        }
        row.iter_mut().for_each(|v| *v = v.max(0.0));
        let sum: f64 = row.iter().sum();
        row.iter_mut().for_each(|v| *v /= sum);
    }
    Ok(y)
}

pub fn run(spec: &RunSpec) -> Result<Outcome> {
    spec.validate()?;
    let clock = Instant::now();
    let image = load_image(&spec.image)?;
    let unaries = load_unaries(&spec.unaries, image.n(), None)?;
    let config = match &spec.config {
        Some(p) => ModelConfig::from_file(p)?,
        None => ModelConfig {
            kernels: Vec::new(),
            solver: Default::default(),
        },
    };
    let cfg = &config.solver;
    let m = unaries.m();
    let model = EnergyModel::from_image(unaries, &image, &config.kernels, cfg.levels)?;

    let uniform = LabelScores::uniform(image.n(), m);
    let y0 = match spec.init() {
        Init::Uniform => uniform,
        Init::MeanField => mean_field(&model, &uniform, cfg.mf_init_iters)?.0,
        Init::File(p) => normalize_init(load_unaries(&p, image.n(), Some(m))?, &p)?,
    };

    let (scores, trace) = match spec.solver {
        SolverKind::Mf => mean_field(&model, &y0, cfg.mf_iters)?,
        SolverKind::Mf5 => mean_field(&model, &y0, MF5_ITERS)?,
        SolverKind::SgLp => sg_lp(&model, &y0, cfg.sg_iters, cfg.sg_step0)?,
        SolverKind::ProxLp => prox_solve(&model, &y0, cfg)?,
        SolverKind::ProxLpL => prox_solve_accelerated(&model, &y0, cfg, AccelVariant::LabelsOnly)?,
        SolverKind::ProxLpAcc => {
            prox_solve_accelerated(&model, &y0, cfg, AccelVariant::LabelsAndPixels)?
        }
    };
    let labels = scores.argmax_labels();
    let outcome = Outcome {
        scores,
        labels,
        trace,
        wall_ms: clock.elapsed().as_secs_f64() * 1e3,
    };
    write_outputs(spec, &image, m, &outcome)?;
    Ok(outcome)
}

fn write_outputs(
    spec: &RunSpec,
    image: &proxlp::model::FeatureField,
    m: usize,
    outcome: &Outcome,
) -> Result<()> {
    let out = &spec.out;
    std::fs::create_dir_all(out).map_err(io_err(out))?;
    write_label_image(
        &out.join("labels.ppm"),
        image.width(),
        image.height(),
        &outcome.labels,
    )?;
    write_label_indices(&out.join("labels.idx"), &outcome.labels, m)?;
    save_unaries(&out.join("scores.unr"), &outcome.scores)?;
    let path = out.join("trace.csv");
    std::fs::write(&path, trace::render(&outcome.trace.outer, spec.timing))
        .map_err(io_err(&path))?;

    let last = outcome.last();
    let wall = if spec.timing { outcome.wall_ms } else { 0.0 };
    let summary = format!(
        "solver {}\ninit {}\nseed {}\npixels {}\nlabels {}\nrows {}\nlp_energy {}\nip_energy {}\nwall_ms {}\n",
        spec.solver,
        spec.init(),
        spec.seed,
        image.n(),
        m,
        outcome.trace.outer.len(),
        last.lp_energy,
        last.ip_energy,
        wall,
    );
    let path = out.join("summary.txt");
    std::fs::write(&path, summary).map_err(io_err(&path))
}
