use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};

use blie::cli::{
    cmd_bench, cmd_run, cmd_zoom, exit_code, parse_r_list, BenchOptions, ExperimentConfig, Suite, EXIT_CONFIG,
    EXIT_RUN, WORKERS_ENV,
};
use blie::instances::{InstanceDescriptor, ToyVariant};

#[derive(Parser)]
#[command(name = "blie", version, about = "Batched Lipschitz exploration for budget-constrained search")]
struct Cli {
    /// Worker count for evaluations and benchmark cells (default: logical cores).
    #[arg(long, global = true, env = WORKERS_ENV)]
    workers: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a JSON config.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run a benchmark suite over a budget grid.
    Bench {
        /// toy, adversary or schedules.
        #[arg(long)]
        suite: String,
        /// Comma-separated budgets, e.g. `4096,16384` or `2^12,2^14`.
        #[arg(long, value_delimiter = ',')]
        t_grid: Option<Vec<String>>,
        #[arg(long, default_value_t = 64)]
        replicates: usize,
        /// Comma-separated algorithms: blie, blie-ace, uniform, random, sh, hyperband.
        #[arg(long, value_delimiter = ',')]
        algos: Option<Vec<String>>,
        #[arg(long, default_value = "bench-out")]
        out: PathBuf,
        /// Dimension of the benchmark objective.
        #[arg(long)]
        d: Option<usize>,
        /// Toy objective: mu1 (sup-norm) or mu2 (sup-norm^1.5).
        #[arg(long, default_value = "mu1")]
        variant: String,
        #[arg(long, default_value_t = 0.1)]
        sigma: f64,
        /// Also write one trace file per run.
        #[arg(long)]
        traces: bool,
        /// Full-size toy protocol (d = 8, T up to 2^28, 256 replicates).
        #[arg(long)]
        full_scale: bool,
    },
    /// Zooming numbers and fitted zooming dimension of an instance.
    Zoom {
        /// Instance descriptor as JSON, e.g. '{"kind":"linear","d":1}'.
        #[arg(long)]
        instance: String,
        /// Dyadic scales: `2^-4,2^-5`, `0.0625` or a range `2^-4..2^-10`.
        #[arg(long)]
        r: String,
    },
}

fn parse_budget(s: &str) -> anyhow::Result<u64> {
    let s = s.trim();
    if let Some(e) = s.strip_prefix("2^") {
        let e: u32 = e.parse().with_context(|| format!("bad budget {s}"))?;
        return 1u64.checked_shl(e).filter(|_| e < 64).context("budget exceeds 2^63");
    }
    s.parse().with_context(|| format!("bad budget {s}"))
}

fn workers(flag: Option<usize>) -> usize {
    flag.filter(|&w| w > 0).unwrap_or_else(blie::executor::default_parallelism)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config } => {
            let cfg = match ExperimentConfig::load(&config) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(EXIT_CONFIG);
                }
            };
            let parallelism = cli.workers.or(cfg.parallelism).unwrap_or_else(blie::executor::default_parallelism);
            match cmd_run(&cfg, parallelism) {
                Ok(rows) => {
                    let mut out = io::stdout().lock();
                    for row in rows {
                        // A closed pipe (e.g. `| head`) is not an error for the run.
                        if writeln!(out, "{}", serde_json::to_string(&row).expect("row serializes")).is_err() {
                            break;
                        }
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(exit_code(&e))
                }
            }
        }
        Command::Bench {
            suite,
            t_grid,
            replicates,
            algos,
            out,
            d,
            variant,
            sigma,
            traces,
            full_scale,
        } => {
            let prepared = (|| -> anyhow::Result<BenchOptions> {
                let suite: Suite = suite.parse()?;
                let mut opts = BenchOptions::new(suite, out);
                opts.t_grid = t_grid.map(|g| g.iter().map(|s| parse_budget(s)).collect()).transpose()?;
                opts.replicates = if full_scale && replicates == 64 { 256 } else { replicates };
                opts.algorithms = algos;
                opts.dim = d;
                opts.variant = match variant.as_str() {
                    "mu1" => ToyVariant::Mu1,
                    "mu2" => ToyVariant::Mu2,
                    other => anyhow::bail!("unknown variant {other}"),
                };
                opts.sigma = sigma;
                opts.parallelism = workers(cli.workers);
                opts.traces = traces;
                opts.full_scale = full_scale;
                Ok(opts)
            })();
            let opts = match prepared {
                Ok(o) => o,
                Err(e) => {
                    eprintln!("error: {e:#}");
                    return ExitCode::from(EXIT_CONFIG);
                }
            };
            match cmd_bench(&opts) {
                Ok(report) => {
                    for cell in &report.summary.cells {
                        println!(
                            "{:<10} {:<28} T=2^{:<5.1} runs={:<4} mean_regret={:<12} mean_batches={:.2}",
                            cell.algorithm,
                            cell.group,
                            (cell.total_budget as f64).log2(),
                            cell.runs,
                            cell.mean_regret.map_or("-".into(), |m| format!("{m:.6}")),
                            cell.mean_batches
                        );
                    }
                    for s in &report.summary.slopes {
                        println!("slope {:<10} {:<28} {:.4}", s.algorithm, s.group, s.slope);
                    }
                    println!("results in {}", opts.out.display());
                    if report.summary.failed_runs > 0 {
                        eprintln!("{} runs failed", report.summary.failed_runs);
                        ExitCode::from(EXIT_RUN)
                    } else {
                        ExitCode::SUCCESS
                    }
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(exit_code(&e))
                }
            }
        }
        Command::Zoom { instance, r } => {
            let parsed = InstanceDescriptor::parse(&instance).and_then(|d| Ok((d, parse_r_list(&r)?)));
            let (descriptor, levels) = match parsed {
                Ok(p) => p,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(EXIT_CONFIG);
                }
            };
            match cmd_zoom(&descriptor, &levels) {
                Ok(report) => {
                    print!("{}", report.table());
                    println!("{}", serde_json::to_string(&report).expect("report serializes"));
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(exit_code(&e))
                }
            }
        }
    }
}
