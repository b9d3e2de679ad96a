//! Ordered-filter timing against the dense reference.

use std::fmt::Write as _;
use std::str::FromStr;
use std::time::Instant;

use proxlp::model::{make_features, GaussianKernel};
use proxlp::permutohedral::{
    filter, naive_gaussian_filter, naive_ordered_filter, ordered_filter, Direction,
    PermutohedralLattice, NAIVE_LIMIT,
};
use proxlp::synthetic::{generate, FixtureSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BenchKernel {
    /// Positions only, `d = 2`.
    Spatial { sigma: f64 },
    /// Positions and colors, `d = 5`.
    Bilateral {
        sigma_spatial: f64,
        sigma_color: f64,
    },
}

impl BenchKernel {
    pub fn kernel(self) -> GaussianKernel {
        match self {
            BenchKernel::Spatial { sigma } => GaussianKernel::spatial(1.0, sigma),
            BenchKernel::Bilateral {
                sigma_spatial,
                sigma_color,
            } => GaussianKernel::bilateral(1.0, sigma_spatial, sigma_color),
        }
        .expect("positive sigmas")
    }
}

impl FromStr for BenchKernel {
    type Err = String;

    /// `spatial`, `bilateral`, `spatial:<sigma>` or `bilateral:<sigma_s>:<sigma_c>`.
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |t: &str| -> std::result::Result<f64, String> {
            t.parse::<f64>()
                .ok()
                .filter(|v| *v > 0.0 && v.is_finite())
                .ok_or_else(|| format!("bad sigma {t:?}"))
        };
        match parts.as_slice() {
            ["spatial"] => Ok(BenchKernel::Spatial { sigma: 3.0 }),
            ["spatial", s] => Ok(BenchKernel::Spatial { sigma: num(s)? }),
            ["bilateral"] => Ok(BenchKernel::Bilateral {
                sigma_spatial: 5.0,
                sigma_color: 20.0,
            }),
            ["bilateral", a, b] => Ok(BenchKernel::Bilateral {
                sigma_spatial: num(a)?,
                sigma_color: num(b)?,
            }),
            _ => Err(format!("unknown kernel {s:?}")),
        }
    }
}

#[derive(Clone, Debug)]
pub struct BenchSpec {
    pub max_n: usize,
    pub labels: usize,
    pub levels: usize,
    pub kernel: BenchKernel,
    /// Timed samples per size; the mean is reported.
    pub reps: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchRow {
    pub n: usize,
    pub m: usize,
    pub d: usize,
    pub t_ordered_ms: f64,
    /// Dense-reference columns, absent on scaling rows.
    pub t_naive_ms: Option<f64>,
    pub speedup: Option<f64>,
    pub max_rel_err: Option<f64>,
}

/// Comparison sizes (within the dense guard) and scaling sizes
/// (`max_n`, `max_n / 2`, ... down to 10^4).
pub fn bench_sizes(max_n: usize) -> (Vec<usize>, Vec<usize>) {
    let compare: Vec<usize> = [1250, 2500, 5000, 10_000]
        .into_iter()
        .filter(|&n| n <= max_n.min(NAIVE_LIMIT))
        .collect();
    let mut scaling = Vec::new();
    let mut n = max_n;
    while n > NAIVE_LIMIT {
        scaling.push(n);
        n /= 2;
    }
    scaling.reverse();
    (compare, scaling)
}

/// Image shape with `w * h = n`, as square as the divisors of `n` allow.
pub fn image_shape(n: usize) -> (usize, usize) {
    let mut w = (n as f64).sqrt() as usize;
    while w > 1 && !n.is_multiple_of(w) {
        w -= 1;
    }
    (w.max(1), n / w.max(1))
}

struct Instance {
    features: proxlp::Features,
    scores: Vec<Vec<f64>>,
}

fn instance(spec: &BenchSpec, n: usize) -> Result<Instance> {
    let (w, h) = image_shape(n);
    let mut fixture = FixtureSpec::square(w.max(h), spec.labels.max(1));
    fixture.width = w;
    fixture.height = h;
    fixture.block = (w.min(h) / 4).max(1);
    let seed = spec.seed.wrapping_add(n as u64);
    let image = generate(&fixture, seed)?.image;
    let features = make_features(&image, &spec.kernel.kernel());
    // Scores on level boundaries, so binning is exact.
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let top = (spec.levels - 1) as f64;
    let scores = (0..spec.labels)
        .map(|_| {
            (0..n)
                .map(|_| rng.gen_range(0..spec.levels) as f64 / top)
                .collect()
        })
        .collect();
    Ok(Instance { features, scores })
}

/// Shortest timed sample; quick runs are repeated within a sample.
const MIN_SAMPLE_SECS: f64 = 0.3;

/// Lattice build plus one ordered pass per label.
fn ordered_pass(
    spec: &BenchSpec,
    inst: &Instance,
) -> Result<(PermutohedralLattice, Vec<Vec<f64>>)> {
    let ones = vec![1.0; inst.features.n()];
    let lattice = PermutohedralLattice::build(&inst.features)?;
    let outs = inst
        .scores
        .iter()
        .map(|s| ordered_filter(&lattice, &ones, 1, s, spec.levels, Direction::Geq))
        .collect::<proxlp::Result<Vec<_>>>()?;
    Ok((lattice, outs))
}

/// Mean time of [`ordered_pass`] per instance, in ms, over `reps` samples.
/// One warm-up run sizes the samples; the samples then go round-robin over
/// the instances so that a stretch of load on the machine is spread over all
/// of them instead of one.
fn time_ordered(spec: &BenchSpec, insts: &[Instance]) -> Result<Vec<f64>> {
    let mut iters = Vec::with_capacity(insts.len());
    for inst in insts {
        let clock = Instant::now();
        ordered_pass(spec, inst)?;
        let warm = clock.elapsed().as_secs_f64();
        iters.push((MIN_SAMPLE_SECS / warm.max(1e-9)).ceil().max(1.0) as usize);
    }
    let reps = spec.reps.max(1);
    let mut total = vec![0.0; insts.len()];
    for _ in 0..reps {
        for ((inst, &k), t) in insts.iter().zip(&iters).zip(&mut total) {
            let clock = Instant::now();
            for _ in 0..k {
                ordered_pass(spec, inst)?;
            }
            *t += clock.elapsed().as_secs_f64() / k as f64;
        }
    }
    Ok(total.iter().map(|t| t * 1e3 / reps as f64).collect())
}

/// Runs the benchmark. Comparison rows time the lattice (build plus one
/// ordered pass per label) against the dense ordered sum and report the
/// largest error of the normalized outputs relative to the largest
/// normalized reference value.
pub fn bench_filter(spec: &BenchSpec) -> Result<Vec<BenchRow>> {
    let (compare, scaling) = bench_sizes(spec.max_n);
    let d = spec.kernel.kernel().dim();
    let mut rows = Vec::new();
    for n in compare {
        let inst = instance(spec, n)?;
        let t_ordered = time_ordered(spec, std::slice::from_ref(&inst))?[0];
        let (lattice, approx) = ordered_pass(spec, &inst)?;
        let ones = vec![1.0; n];
        let lat_norm = filter(&lattice, &ones, 1)?;
        let clock = Instant::now();
        let exact = inst
            .scores
            .iter()
            .map(|s| naive_ordered_filter(&inst.features, &ones, 1, s, Direction::Geq))
            .collect::<proxlp::Result<Vec<_>>>()?;
        let t_naive = clock.elapsed().as_secs_f64() * 1e3;
        let exact_norm = naive_gaussian_filter(&inst.features, &ones, 1)?;
        let (mut num, mut den) = (0.0f64, 0.0f64);
        for (a_ch, e_ch) in approx.iter().zip(&exact) {
            for i in 0..n {
                let a = a_ch[i] / lat_norm[i];
                let e = e_ch[i] / exact_norm[i];
                num = num.max((a - e).abs());
                den = den.max(e.abs());
            }
        }
        rows.push(BenchRow {
            n,
            m: spec.labels,
            d,
            t_ordered_ms: t_ordered,
            t_naive_ms: Some(t_naive),
            speedup: Some(t_naive / t_ordered),
            max_rel_err: Some(num / den.max(1e-300)),
        });
    }
    let insts = scaling
        .iter()
        .map(|&n| instance(spec, n))
        .collect::<Result<Vec<_>>>()?;
    for (&n, t_ordered) in scaling.iter().zip(time_ordered(spec, &insts)?) {
        rows.push(BenchRow {
            n,
            m: spec.labels,
            d,
            t_ordered_ms: t_ordered,
            t_naive_ms: None,
            speedup: None,
            max_rel_err: None,
        });
    }
    Ok(rows)
}

pub fn render_csv(rows: &[BenchRow]) -> String {
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    let mut out = String::from("n,m,d,t_ordered_ms,t_naive_ms,speedup,max_rel_err\n");
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.n,
            r.m,
            r.d,
            r.t_ordered_ms,
            opt(r.t_naive_ms),
            opt(r.speedup),
            opt(r.max_rel_err)
        )
        .unwrap();
    }
    out
}
