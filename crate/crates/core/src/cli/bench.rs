use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use super::output::{run_id, write_json, write_results, write_trace, ResultRow};
use crate::error::{Error, Result};
use crate::geometry::EdgeLengthSchedule;
use crate::instances::{adversary_scale, InstanceDescriptor, ToyVariant};
use crate::runner::{run_algorithm, AlgorithmConfig};
use crate::stats::{least_squares, mean, std_dev};
use crate::trace::RunTrace;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    /// Toy objective, simple regret against T.
    Toy,
    /// Uniform-search lower-bound instances, coarse and fine grids.
    Adversary,
    /// Batch counts of the doubling and ACE schedules.
    Schedules,
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "toy" => Ok(Suite::Toy),
            "adversary" => Ok(Suite::Adversary),
            "schedules" => Ok(Suite::Schedules),
            other => Err(Error::Config(format!("unknown suite `{other}` (toy, adversary, schedules)"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct BenchOptions {
    pub suite: Suite,
    pub t_grid: Option<Vec<u64>>,
    pub replicates: usize,
    pub algorithms: Option<Vec<String>>,
    pub out: PathBuf,
    /// Dimension of the toy objective (suites toy and schedules) or the
    /// adversarial instance.
    pub dim: Option<usize>,
    pub variant: ToyVariant,
    pub sigma: f64,
    pub parallelism: usize,
    /// Write one trace file per run.
    pub traces: bool,
    /// Use the full-size toy protocol (d = 8, T up to 2^28, 256 replicates)
    /// wherever the options leave a choice.
    pub full_scale: bool,
}

impl BenchOptions {
    pub fn new(suite: Suite, out: PathBuf) -> Self {
        Self {
            suite,
            t_grid: None,
            replicates: 64,
            algorithms: None,
            out,
            dim: None,
            variant: ToyVariant::Mu1,
            sigma: 0.1,
            parallelism: crate::executor::default_parallelism(),
            traces: false,
            full_scale: false,
        }
    }
}

/// One benchmark cell: an algorithm on an instance at a budget, for one replicate.
#[derive(Debug, Clone)]
struct Cell {
    algorithm: AlgorithmConfig,
    descriptor: InstanceDescriptor,
    total_budget: u64,
    replicate: u64,
    seed: u64,
    /// Grouping key for the summary (e.g. the adversary regime).
    group: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct CellSummary {
    pub algorithm: String,
    pub group: String,
    pub instance: String,
    #[serde(rename = "T")]
    pub total_budget: u64,
    pub runs: usize,
    pub failures: usize,
    pub mean_regret: Option<f64>,
    pub std_regret: Option<f64>,
    pub mean_batches: f64,
    pub max_batches: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct SlopeFit {
    pub algorithm: String,
    pub group: String,
    /// Least-squares slope of `log2(mean regret)` against `log2 T`.
    pub slope: f64,
    pub intercept: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AdversaryCheck {
    #[serde(rename = "T")]
    pub total_budget: u64,
    pub regime: String,
    pub level: u32,
    /// `T^(-1/(d+beta))`.
    pub scale: f64,
    pub uniform_mean_gap: Option<f64>,
    pub uniform_min_gap: Option<f64>,
    pub blie_mean_gap: Option<f64>,
    /// Uniform-search mean gap is at least half the scale.
    pub lower_bound_holds: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScheduleLength {
    pub log2_t: u32,
    pub doubling_levels_to_target: usize,
    pub ace_levels: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchSummary {
    pub suite: Suite,
    pub replicates: usize,
    pub t_grid: Vec<u64>,
    pub cells: Vec<CellSummary>,
    pub slopes: Vec<SlopeFit>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub adversary_checks: Vec<AdversaryCheck>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub schedule_lengths: Vec<ScheduleLength>,
    pub failed_runs: usize,
}

pub struct BenchReport {
    pub rows: Vec<ResultRow>,
    pub traces: Vec<Option<RunTrace>>,
    pub summary: BenchSummary,
}

/// Seed shared by every algorithm at a given `(T, replicate)`, so paired
/// runs see the same objective noise.
pub fn common_seed(total_budget: u64, replicate: u64) -> u64 {
    crate::instances::mix_seed(total_budget, replicate)
}

fn default_grid(suite: Suite, full_scale: bool) -> Vec<u64> {
    let exps: Vec<u32> = match (suite, full_scale) {
        (Suite::Toy, false) => (12..=22).step_by(2).collect(),
        (Suite::Toy, true) => (12..=28).step_by(2).collect(),
        (Suite::Adversary, _) => vec![12, 16, 20],
        (Suite::Schedules, _) => (10..=22).step_by(2).collect(),
    };
    exps.into_iter().map(|e| 1u64 << e).collect()
}

fn default_algorithms(suite: Suite) -> Vec<&'static str> {
    match suite {
        Suite::Toy => vec!["blie", "hyperband", "uniform", "random"],
        Suite::Adversary => vec!["uniform", "blie"],
        Suite::Schedules => vec!["blie", "blie-ace"],
    }
}

/// Grid level of the coarse (`r >= tau`) and fine (`r < tau`) adversary
/// instances at budget `T`.
pub fn adversary_levels(dim: usize, beta: f64, total_budget: u64) -> (u32, u32) {
    let tau = adversary_scale(dim, beta, total_budget);
    let coarse = (-tau.log2()).floor().max(0.0) as u32;
    (coarse, coarse + 2)
}

fn build_cells(opts: &BenchOptions, grid: &[u64], algos: &[AlgorithmConfig]) -> Vec<Cell> {
    let mut cells = Vec::new();
    let dim = opts.dim.unwrap_or(match (opts.suite, opts.full_scale) {
        (Suite::Adversary, _) => 1,
        (_, true) => 8,
        _ => 2,
    });
    for &t in grid {
        for rep in 0..opts.replicates as u64 {
            let seed = common_seed(t, rep);
            match opts.suite {
                Suite::Toy | Suite::Schedules => {
                    let descriptor = InstanceDescriptor::Toy {
                        variant: opts.variant,
                        d: dim,
                        sigma: opts.sigma,
                    };
                    for algo in algos {
                        cells.push(Cell {
                            algorithm: algo.clone(),
                            descriptor: descriptor.clone(),
                            total_budget: t,
                            replicate: rep,
                            seed,
                            group: descriptor.label(),
                        });
                    }
                }
                Suite::Adversary => {
                    let (coarse, fine) = adversary_levels(dim, 2.0, t);
                    for (regime, level) in [("coarse", coarse), ("fine", fine)] {
                        let descriptor = InstanceDescriptor::Adversary {
                            d: dim,
                            beta: 2.0,
                            budget: t,
                            level,
                        };
                        for algo in algos {
                            // Uniform search plays exactly the grid the instance was built against.
                            let algorithm = match algo {
                                AlgorithmConfig::Uniform { .. } => AlgorithmConfig::Uniform { level: Some(level) },
                                other => other.clone(),
                            };
                            cells.push(Cell {
                                algorithm,
                                descriptor: descriptor.clone(),
                                total_budget: t,
                                replicate: rep,
                                seed,
                                group: regime.to_string(),
                            });
                        }
                    }
                }
            }
        }
    }
    cells
}

/// Runs a benchmark suite: every algorithm x budget x replicate, with common
/// random numbers per `(T, replicate)`. Failed cells are recorded as failed
/// rows and do not stop the suite.
pub fn cmd_bench(opts: &BenchOptions) -> Result<BenchReport> {
    if opts.replicates == 0 {
        return Err(Error::Config("replicates must be at least 1".into()));
    }
    let grid = opts.t_grid.clone().unwrap_or_else(|| default_grid(opts.suite, opts.full_scale));
    if grid.is_empty() || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config("T grid must be non-empty and strictly increasing".into()));
    }
    let algos: Vec<AlgorithmConfig> = match &opts.algorithms {
        Some(names) => names.iter().map(|n| AlgorithmConfig::from_name(n)).collect::<Result<_>>()?,
        None => default_algorithms(opts.suite)
            .into_iter()
            .map(AlgorithmConfig::from_name)
            .collect::<Result<_>>()?,
    };
    fs::create_dir_all(&opts.out)?;
    let cells = build_cells(opts, &grid, &algos);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.parallelism.max(1))
        .build()
        .map_err(|e| Error::invalid(format!("thread pool: {e}")))?;
    let outcomes: Vec<(ResultRow, Option<RunTrace>)> = pool.install(|| {
        cells
            .par_iter()
            .map(|cell| {
                let label = cell.descriptor.label();
                let algo = cell.algorithm.label();
                let id = run_id(&algo, &label, cell.total_budget, cell.replicate);
                let start = Instant::now();
                let result = cell
                    .descriptor
                    .build(cell.seed)
                    .and_then(|inst| run_algorithm(&cell.algorithm, &inst, cell.total_budget, cell.seed, 1));
                match result {
                    Ok(trace) => {
                        let row = ResultRow::from_trace(id, &label, &trace, start.elapsed().as_millis() as u64);
                        (ResultRow { seed: cell.seed, ..row }, Some(trace))
                    }
                    Err(e) => {
                        log::warn!("{id} failed: {e}");
                        (ResultRow::failed(id, &algo, &label, cell.total_budget, cell.seed), None)
                    }
                }
            })
            .collect()
    });

    let (rows, traces): (Vec<ResultRow>, Vec<Option<RunTrace>>) = outcomes.into_iter().unzip();
    if opts.traces {
        for (row, trace) in rows.iter().zip(&traces) {
            if let Some(t) = trace {
                write_trace(&opts.out, &row.run_id, t)?;
            }
        }
    }
    write_results(&opts.out.join("results.csv"), &rows)?;
    let summary = summarize(opts, &grid, &cells, &rows);
    write_json(&opts.out.join("summary.json"), &summary)?;
    Ok(BenchReport { rows, traces, summary })
}

fn summarize(opts: &BenchOptions, grid: &[u64], cells: &[Cell], rows: &[ResultRow]) -> BenchSummary {
    // (algorithm, group, T) -> row indices, in deterministic order.
    let mut groups: BTreeMap<(String, String, u64), Vec<usize>> = BTreeMap::new();
    for (i, (cell, row)) in cells.iter().zip(rows).enumerate() {
        groups
            .entry((row.algorithm.clone(), cell.group.clone(), cell.total_budget))
            .or_default()
            .push(i);
    }
    let mut summaries = Vec::new();
    for ((algorithm, group, t), idx) in &groups {
        let ok: Vec<&ResultRow> = idx.iter().map(|&i| &rows[i]).filter(|r| !r.best_loss.is_nan()).collect();
        let regrets: Vec<f64> = ok.iter().filter_map(|r| r.simple_regret).collect();
        let batches: Vec<f64> = ok.iter().map(|r| r.batches as f64).collect();
        summaries.push(CellSummary {
            algorithm: algorithm.clone(),
            group: group.clone(),
            instance: rows[idx[0]].instance.clone(),
            total_budget: *t,
            runs: idx.len(),
            failures: idx.len() - ok.len(),
            mean_regret: (!regrets.is_empty()).then(|| mean(&regrets)),
            std_regret: (!regrets.is_empty()).then(|| std_dev(&regrets)),
            mean_batches: if batches.is_empty() { 0.0 } else { mean(&batches) },
            max_batches: ok.iter().map(|r| r.batches).max().unwrap_or(0),
        });
    }

    let mut slopes = Vec::new();
    let mut by_series: BTreeMap<(String, String), Vec<(f64, f64)>> = BTreeMap::new();
    for s in &summaries {
        if let Some(m) = s.mean_regret.filter(|m| *m > 0.0) {
            by_series
                .entry((s.algorithm.clone(), s.group.clone()))
                .or_default()
                .push(((s.total_budget as f64).log2(), m.log2()));
        }
    }
    for ((algorithm, group), pts) in by_series {
        let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
        let ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
        if let Some((slope, intercept)) = least_squares(&xs, &ys) {
            slopes.push(SlopeFit {
                algorithm,
                group,
                slope,
                intercept,
            });
        }
    }

    let mut adversary_checks = Vec::new();
    if opts.suite == Suite::Adversary {
        let dim = opts.dim.unwrap_or(1);
        for &t in grid {
            let (coarse, fine) = adversary_levels(dim, 2.0, t);
            let scale = adversary_scale(dim, 2.0, t);
            for (regime, level) in [("coarse", coarse), ("fine", fine)] {
                let find = |algo: &str| summaries.iter().find(|s| s.algorithm == algo && s.group == regime && s.total_budget == t);
                let uniform = find("uniform");
                let uniform_min_gap = groups.get(&("uniform".to_string(), regime.to_string(), t)).and_then(|idx| {
                    idx.iter()
                        .filter_map(|&i| rows[i].simple_regret)
                        .min_by(f64::total_cmp)
                });
                let uniform_mean_gap = uniform.and_then(|s| s.mean_regret);
                adversary_checks.push(AdversaryCheck {
                    total_budget: t,
                    regime: regime.into(),
                    level,
                    scale,
                    uniform_mean_gap,
                    uniform_min_gap,
                    blie_mean_gap: find("blie").and_then(|s| s.mean_regret),
                    lower_bound_holds: uniform_mean_gap.is_some_and(|g| g >= 0.5 * scale),
                });
            }
        }
    }

    let mut schedule_lengths = Vec::new();
    if opts.suite == Suite::Schedules {
        let dim = opts.dim.unwrap_or(if opts.full_scale { 8 } else { 2 });
        let dz = match opts.variant {
            ToyVariant::Mu1 => 0.0,
            ToyVariant::Mu2 => dim as f64 / 3.0,
        };
        for log2_t in [10u32, 20, 30, 40, 50, 60] {
            if let Ok(ace) = EdgeLengthSchedule::ace(dim, dz, 2.0, 1u64 << log2_t) {
                let ace_levels = ace.levels().count();
                let target = ace.levels().last().unwrap_or(0) as usize;
                schedule_lengths.push(ScheduleLength {
                    log2_t,
                    doubling_levels_to_target: target,
                    ace_levels,
                });
            }
        }
    }

    BenchSummary {
        suite: opts.suite,
        replicates: opts.replicates,
        t_grid: grid.to_vec(),
        failed_runs: summaries.iter().map(|s| s.failures).sum(),
        cells: summaries,
        slopes,
        adversary_checks,
        schedule_lengths,
    }
}
