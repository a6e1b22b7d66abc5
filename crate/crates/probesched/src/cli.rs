//! Command-line entry points: generate instances, solve for memoryless
//! frequencies, construct deterministic schedules, evaluate, export
//! reverse CDFs, and build the full comparison grid.
//!
//! Exit codes: 0 success, 1 invalid input (arguments or instance
//! validation), 2 solver non-convergence, 3 I/O or parse failure.
//! All randomness sits behind `--seed` (default 0); identical seeds give
//! identical output files.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::compare::{build_compare, CompareConfig};
use crate::cover::set_cover_schedule;
use crate::error::{Error, Result};
use crate::evaluator::{
    evaluate, evaluate_probabilistic, export_cdf_to_path, simulate_memoryless, CyclicSchedule,
    Objective,
};
use crate::instance::{gen_clos, gen_lowerbound, gen_random, gen_singletons, Instance, WeightMode};
use crate::kt::kt_schedule;
use crate::memoryless::{
    expand_frequencies, memoryless_report, solve_max, solve_sum, Frequencies, SolveConfig,
};
use crate::tree::{r_tree, FillPolicy};

#[derive(Parser)]
#[command(
    name = "probesched",
    version,
    about = "Probe schedule construction and evaluation for silent-failure detection"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a structured instance file.
    Gen {
        #[command(subcommand)]
        kind: GenKind,
    },
    /// Compute optimal memoryless probing frequencies.
    Solve {
        #[command(subcommand)]
        family: SolveFamily,
    },
    /// Construct a deterministic cyclic schedule.
    Schedule {
        #[command(subcommand)]
        kind: ScheduleKind,
    },
    /// Evaluate a schedule or frequencies on an instance.
    Eval(EvalArgs),
    /// Export a reverse CDF of per-element detection statistics.
    Cdf(CdfArgs),
    /// Evaluate every scheduler on all six objectives.
    Compare(CompareArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Sum,
    Max,
}

impl From<ModeArg> for WeightMode {
    fn from(m: ModeArg) -> WeightMode {
        match m {
            ModeArg::Sum => WeightMode::Sum,
            ModeArg::Max => WeightMode::Max,
        }
    }
}

#[derive(Subcommand)]
enum GenKind {
    /// One test per element.
    Singletons {
        #[arg(long)]
        n: usize,
        /// "uniform" or a comma-separated weight list of length n.
        #[arg(long, default_value = "uniform")]
        weights: String,
        #[arg(long, value_enum, default_value = "sum")]
        mode: ModeArg,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Folded-Clos fabric: links as elements, leaf-to-leaf up/down paths
    /// as tests.
    Clos {
        #[arg(long)]
        levels: usize,
        #[arg(long)]
        radix: usize,
        #[arg(long, value_enum, default_value = "sum")]
        mode: ModeArg,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Combinatorial family: one element per ell-subset of the m tests.
    Lowerbound {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        ell: usize,
        #[arg(long, default_value_t = 100_000)]
        cap: usize,
        #[arg(long, value_enum, default_value = "sum")]
        mode: ModeArg,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Random subsets with guaranteed coverage.
    Random {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "sum")]
        mode: ModeArg,
        #[arg(short, long)]
        output: PathBuf,
    },
}

#[derive(Subcommand)]
enum SolveFamily {
    /// Minimize the weighted average expected detection time.
    Sum(SolveArgs),
    /// Minimize the weighted worst-case expected detection time.
    Max(SolveArgs),
}

#[derive(Args)]
struct SolveArgs {
    #[arg(short, long)]
    instance: PathBuf,
    /// Convergence tolerance.
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    /// Restrict the solve to a test subset file `{"tests": [ids]}`;
    /// excluded tests get zero frequency.
    #[arg(long)]
    subset: Option<PathBuf>,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Subcommand)]
enum ScheduleKind {
    /// Best-of-K randomized tree schedule from probing frequencies.
    Rtree {
        #[arg(short, long)]
        instance: PathBuf,
        #[arg(long)]
        freqs: PathBuf,
        #[arg(long, default_value = "eeet")]
        objective: String,
        #[arg(long, default_value_t = 32)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Idle-slot policy: ktstep fills greedily, noop keeps idles.
        #[arg(long, value_enum, default_value = "ktstep")]
        fill: FillArg,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Kuhn-Tucker greedy schedule with cycle extraction.
    Kt {
        #[arg(short, long)]
        instance: PathBuf,
        #[arg(long, default_value_t = 100_000)]
        max_steps: usize,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Greedy set-cover cycle.
    Setcover {
        #[arg(short, long)]
        instance: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum FillArg {
    Ktstep,
    Noop,
}

impl From<FillArg> for FillPolicy {
    fn from(f: FillArg) -> FillPolicy {
        match f {
            FillArg::Ktstep => FillPolicy::KtStep,
            FillArg::Noop => FillPolicy::Noop,
        }
    }
}

#[derive(Args)]
struct EvalArgs {
    #[arg(short, long)]
    instance: PathBuf,
    #[arg(long)]
    sched: Option<PathBuf>,
    #[arg(long)]
    freqs: Option<PathBuf>,
    /// Monte-Carlo sample count; adds empirical per-element means to the
    /// report (frequencies input only).
    #[arg(long)]
    mc: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum StatArg {
    Mean,
    Max,
    P99,
}

#[derive(Args)]
struct CdfArgs {
    #[arg(short, long)]
    instance: PathBuf,
    #[arg(long)]
    sched: Option<PathBuf>,
    #[arg(long)]
    freqs: Option<PathBuf>,
    #[arg(long, value_enum)]
    stat: StatArg,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args)]
struct CompareArgs {
    #[arg(short, long)]
    instance: PathBuf,
    /// Run the full scheduler roster (the only supported selection).
    #[arg(long, default_value_t = true)]
    all: bool,
    #[arg(long, default_value_t = 32)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SubsetFile {
    tests: Vec<String>,
}

/// Parses argv and runs the command, returning a process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn load_instance(path: &Path) -> Result<Instance> {
    let instance = Instance::read(path)?;
    instance.validate().into_result()?;
    Ok(instance)
}

fn parse_weights(spec: &str, n: usize) -> Result<Vec<f64>> {
    if spec == "uniform" {
        return Ok(vec![1.0; n]);
    }
    let weights: std::result::Result<Vec<f64>, _> =
        spec.split(',').map(|w| w.trim().parse::<f64>()).collect();
    let weights = weights.map_err(|e| Error::Parse(format!("weights: {e}")))?;
    if weights.len() != n {
        return Err(Error::Parse(format!(
            "expected {n} weights, got {}",
            weights.len()
        )));
    }
    Ok(weights)
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Gen { kind } => {
            let (instance, mode, output) = match kind {
                GenKind::Singletons {
                    n,
                    weights,
                    mode,
                    output,
                } => (gen_singletons(&parse_weights(&weights, n)?)?, mode, output),
                GenKind::Clos {
                    levels,
                    radix,
                    mode,
                    output,
                } => (gen_clos(levels, radix)?, mode, output),
                GenKind::Lowerbound {
                    m,
                    ell,
                    cap,
                    mode,
                    output,
                } => (gen_lowerbound(m, ell, cap)?, mode, output),
                GenKind::Random {
                    n,
                    m,
                    seed,
                    mode,
                    output,
                } => (gen_random(n, m, seed)?, mode, output),
            };
            let instance = instance.normalize(mode.into())?;
            instance.validate().into_result()?;
            instance.write(&output)
        }
        Command::Solve { family } => {
            let (args, is_sum) = match family {
                SolveFamily::Sum(args) => (args, true),
                SolveFamily::Max(args) => (args, false),
            };
            let instance = load_instance(&args.instance)?;
            let config = SolveConfig {
                tolerance: args.tol,
                ..SolveConfig::default()
            };
            let solve_on = |inst: &Instance| -> Result<Frequencies> {
                if is_sum {
                    solve_sum(inst, &config)
                } else {
                    solve_max(inst, &config)
                }
            };
            let freqs = match &args.subset {
                None => solve_on(&instance)?,
                Some(path) => {
                    let subset: SubsetFile = serde_json::from_str(&std::fs::read_to_string(path)?)
                        .map_err(|e| Error::Parse(format!("subset: {e}")))?;
                    let mut keep = Vec::with_capacity(subset.tests.len());
                    for id in &subset.tests {
                        let Some(t) = instance.test_index(id) else {
                            return Err(Error::Parse(format!("subset: unknown test {id:?}")));
                        };
                        keep.push(t);
                    }
                    let restricted = instance.restrict_tests(&keep)?;
                    let solved = solve_on(&restricted)?;
                    expand_frequencies(&instance, &restricted, &solved)?
                }
            };
            freqs.write(&args.output, &instance)
        }
        Command::Schedule { kind } => match kind {
            ScheduleKind::Rtree {
                instance,
                freqs,
                objective,
                trials,
                seed,
                fill,
                output,
            } => {
                let inst = load_instance(&instance)?;
                let freqs = Frequencies::read(&freqs, &inst)?;
                freqs.validate(&inst)?;
                let objective: Objective = objective.parse()?;
                let normalized = match objective.family() {
                    crate::evaluator::ObjectiveFamily::Sum => inst.normalize(WeightMode::Sum)?,
                    crate::evaluator::ObjectiveFamily::Max => inst.normalize(WeightMode::Max)?,
                };
                let sched = r_tree(&normalized, &freqs.q, objective, trials, seed, fill.into())?;
                sched.write(&output, &inst)
            }
            ScheduleKind::Kt {
                instance,
                max_steps,
                output,
            } => {
                let inst = load_instance(&instance)?;
                let sched = kt_schedule(&inst, max_steps)?;
                if sched.approximate() {
                    eprintln!(
                        "warning: no state repeat within {max_steps} steps; cycle is approximate"
                    );
                }
                sched.write(&output, &inst)
            }
            ScheduleKind::Setcover { instance, output } => {
                let inst = load_instance(&instance)?;
                set_cover_schedule(&inst)?.write(&output, &inst)
            }
        },
        Command::Eval(args) => {
            let instance = load_instance(&args.instance)?;
            let mut csv = match (&args.sched, &args.freqs) {
                (Some(sched), None) => {
                    let sched = CyclicSchedule::read(sched, &instance)?;
                    let report = if instance.is_probabilistic() {
                        evaluate_probabilistic(&instance, &sched)
                    } else {
                        evaluate(&instance, &sched)
                    };
                    report.to_csv(&instance)
                }
                (None, Some(freqs)) => {
                    let freqs = Frequencies::read(freqs, &instance)?;
                    freqs.validate(&instance)?;
                    let mut csv = memoryless_report(&instance, &freqs.q).to_csv(&instance);
                    if let Some(samples) = args.mc {
                        let stats = simulate_memoryless(&instance, &freqs.q, samples, args.seed)?;
                        for e in 0..instance.num_elements() {
                            csv.push_str(&format!(
                                "mc_mean,{},{},,\n",
                                instance.element_id(e),
                                stats.mean(e)
                            ));
                        }
                    }
                    csv
                }
                _ => {
                    return Err(Error::Parse(
                        "eval needs exactly one of --sched or --freqs".into(),
                    ))
                }
            };
            if !csv.ends_with('\n') {
                csv.push('\n');
            }
            std::fs::write(&args.output, csv)?;
            Ok(())
        }
        Command::Cdf(args) => {
            let instance = load_instance(&args.instance)?;
            let values: Vec<f64> = match (&args.sched, &args.freqs) {
                (Some(sched), None) => {
                    let sched = CyclicSchedule::read(sched, &instance)?;
                    let report = if instance.is_probabilistic() {
                        evaluate_probabilistic(&instance, &sched)
                    } else {
                        evaluate(&instance, &sched)
                    };
                    if !report.uncovered.is_empty() {
                        return Err(Error::Uncovered(
                            instance.element_id(report.uncovered[0]).to_string(),
                        ));
                    }
                    match args.stat {
                        StatArg::Mean => report.et,
                        StatArg::Max => report.mt,
                        StatArg::P99 => percentile_per_element(&instance, &sched, 0.99),
                    }
                }
                (None, Some(freqs)) => {
                    let freqs = Frequencies::read(freqs, &instance)?;
                    freqs.validate(&instance)?;
                    let rates = crate::memoryless::coverage_rates(&instance, &freqs.q);
                    match args.stat {
                        StatArg::Mean => rates.iter().map(|&r| 1.0 / r).collect(),
                        StatArg::P99 => rates
                            .iter()
                            .map(|&r| {
                                if r >= 1.0 {
                                    1.0
                                } else {
                                    (0.01f64.ln() / (1.0 - r).ln()).ceil()
                                }
                            })
                            .collect(),
                        StatArg::Max => {
                            return Err(Error::Parse(
                                "memoryless detection has no finite maximum; use p99".into(),
                            ))
                        }
                    }
                }
                _ => {
                    return Err(Error::Parse(
                        "cdf needs exactly one of --sched or --freqs".into(),
                    ))
                }
            };
            export_cdf_to_path(&values, &args.output)
        }
        Command::Compare(args) => {
            if !args.all {
                return Err(Error::Parse("compare currently requires --all".into()));
            }
            let instance = load_instance(&args.instance)?;
            let config = CompareConfig {
                trials: args.trials,
                seed: args.seed,
                ..CompareConfig::default()
            };
            let table = build_compare(&instance, &config)?;
            std::fs::write(&args.output, table.to_csv())?;
            Ok(())
        }
    }
}

/// Per-element 99th percentile over failure epochs of the deterministic
/// detection time. Within each cyclic gap of length g the detection
/// times are exactly 1..=g, so the distribution falls out of the gaps.
fn percentile_per_element(instance: &Instance, sched: &CyclicSchedule, p: f64) -> Vec<f64> {
    let n = sched.len();
    let occ = sched.occurrences(instance);
    occ.iter()
        .map(|occ_e| {
            let mut gaps: Vec<usize> = Vec::with_capacity(occ_e.len());
            for w in occ_e.windows(2) {
                gaps.push(w[1] - w[0]);
            }
            gaps.push(n - occ_e[occ_e.len() - 1] + occ_e[0]);
            let mut count_at_most = vec![0usize; n + 1];
            for &g in &gaps {
                // Gap g contributes one epoch each of detection 1..=g.
                count_at_most[g] += 1;
            }
            let target = (p * n as f64).ceil() as usize;
            let mut covered_epochs = 0;
            let mut gaps_open = gaps.len();
            let mut value = 0usize;
            // Sweep detection values upward; at value v every gap of
            // length >= v contributes one epoch.
            for (v, &ending_here) in count_at_most.iter().enumerate().skip(1) {
                covered_epochs += gaps_open;
                gaps_open -= ending_here;
                value = v;
                if covered_epochs >= target {
                    break;
                }
            }
            value as f64
        })
        .collect()
}
