//! File formats, solver orchestration and benchmarks behind the `proxlp`
//! command.

pub mod bench;
pub mod error;
pub mod io;
pub mod palette;
pub mod run;
pub mod synth;
pub mod trace;

pub use bench::{bench_filter, render_csv, BenchKernel, BenchRow, BenchSpec};
pub use error::{CliError, Result};
pub use io::{load_image, load_unaries, save_unaries};
pub use run::{run, Init, Outcome, RunSpec, SolverKind};
