use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use proxlp_cli::{
    bench_filter, render_csv, run, BenchKernel, BenchSpec, Init, RunSpec, SolverKind,
};

#[derive(Parser)]
#[command(
    name = "proxlp",
    version,
    about = "Dense CRF inference by proximal LP minimization"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a solver on an image and its unaries.
    Solve {
        #[arg(long)]
        image: PathBuf,
        #[arg(long)]
        unaries: PathBuf,
        /// TOML file with kernels and solver settings.
        #[arg(long)]
        config: Option<PathBuf>,
        /// mf, mf5, sglp, proxlp, proxlp_l or proxlp_acc.
        #[arg(long, default_value = "proxlp")]
        solver: SolverKind,
        /// uniform, mf or file:<path> (default: uniform for mf/mf5, mf otherwise).
        #[arg(long)]
        init: Option<Init>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write zero wall times so repeated runs give identical files.
        #[arg(long)]
        no_timing: bool,
    },
    /// Time the ordered filter against the dense sum and across sizes.
    Bench {
        #[arg(long, default_value_t = 1_000_000)]
        max_n: usize,
        #[arg(long, default_value_t = 4)]
        labels: usize,
        #[arg(long, default_value_t = 10)]
        levels: usize,
        /// spatial[:sigma] or bilateral[:sigma_s:sigma_c].
        #[arg(long, default_value = "bilateral")]
        kernel: BenchKernel,
        #[arg(long, default_value_t = 5)]
        reps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// CSV destination; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a synthetic image, unaries and ground truth.
    Synth {
        #[arg(long, default_value_t = 64)]
        size: usize,
        #[arg(long, default_value_t = 4)]
        labels: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Solve {
            image,
            unaries,
            config,
            solver,
            init,
            out,
            seed,
            no_timing,
        } => {
            let spec = RunSpec {
                image,
                unaries,
                config,
                solver,
                init,
                out,
                seed,
                timing: !no_timing,
            };
            let outcome = run(&spec)?;
            let last = outcome.last();
            println!(
                "{}: lp_energy {} ip_energy {} ({} rows, {:.0} ms)",
                spec.solver,
                last.lp_energy,
                last.ip_energy,
                outcome.trace.outer.len(),
                outcome.wall_ms
            );
        }
        Command::Bench {
            max_n,
            labels,
            levels,
            kernel,
            reps,
            seed,
            out,
        } => {
            if labels == 0 || levels < 2 {
                anyhow::bail!("need labels >= 1 and levels >= 2");
            }
            let spec = BenchSpec {
                max_n,
                labels,
                levels,
                kernel,
                reps,
                seed,
            };
            let csv = render_csv(&bench_filter(&spec)?);
            match out {
                Some(p) => std::fs::write(&p, csv).with_context(|| p.display().to_string())?,
                None => print!("{csv}"),
            }
        }
        Command::Synth {
            size,
            labels,
            seed,
            out,
        } => {
            if size == 0 || labels < 2 {
                anyhow::bail!("need size >= 1 and labels >= 2");
            }
            proxlp_cli::synth::write_fixture(&out, size, labels, seed)?;
        }
    }
    Ok(())
}
