use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use regseed::experiment::{run_experiment, ExperimentConfig};
use regseed::generate::{generate, GeneratorSpec};
use regseed::graph::random_partitionwise_map;
use regseed::io::{graph_to_json, read_graph, signature_sidecar, write_graph};
use regseed::oracle::{run_suite, Lemma};
use regseed::regularize::regularize_with_palettes;
use regseed::schedule::{format_significant, parse_decimal, PracticalSchedule, TheoreticalSchedule, DEFAULT_DIGIT_CAP};
use regseed::stats::{default_probes, regularity_report, SampleBudget, SamplingMode, SamplingPlan};
use regseed::{rng, ColoredGraph, Error};

#[derive(Parser)]
#[command(name = "regseed", version, about = "One-shot randomized regularization of edge-colored r-partite graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Exhaustive,
    Mc,
}

#[derive(clap::Args)]
struct PlanArgs {
    /// How expectations over random maps are evaluated.
    #[arg(long, value_enum, default_value = "mc")]
    mode: Mode,
    /// Monte Carlo draws per counting probe.
    #[arg(long, default_value_t = 20_000)]
    samples: u64,
    /// Monte Carlo draws for the outer expectation of eta.
    #[arg(long, default_value_t = 200)]
    eta_samples: u64,
    /// Largest enumeration allowed in exhaustive mode.
    #[arg(long, default_value_t = SamplingPlan::DEFAULT_WORK_CAP)]
    work_cap: u64,
}

impl PlanArgs {
    fn plans(&self, seed: u64) -> (SamplingPlan, SamplingPlan) {
        let mode = match self.mode {
            Mode::Exhaustive => SamplingMode::Exhaustive,
            Mode::Mc => SamplingMode::MonteCarlo,
        };
        let plan = SamplingPlan { mode, samples: self.samples, work_cap: self.work_cap, seed };
        let eta_plan = plan.with_samples(self.eta_samples).stream(u64::MAX);
        (plan, eta_plan)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate a graph: half:N, mono:S1,S2,..., uniform:B1,B2:S1,..., planted:K,NOISE:S1,...
    Gen {
        #[arg(long)]
        graph: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output file (standard output if omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Regularize a graph with m random samples per part.
    Regularize {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the signature of every new vertex color here.
        #[arg(long)]
        sidecar: Option<PathBuf>,
    },
    /// Compute the regularity report of a graph.
    Measure {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 2)]
        h: usize,
        #[arg(long, default_value_t = 0.25)]
        eps: f64,
        #[command(flatten)]
        plan: PlanArgs,
        /// Random fully visible probes besides the single-edge ones.
        #[arg(long, default_value_t = 8)]
        probes: usize,
        /// Sample budget M inside eta; ignored with --theoretical-m.
        #[arg(long, default_value_t = 1)]
        big_m: u64,
        /// Use the theoretical M for a graph regularized with this many
        /// samples per part, from the original bounds --b1, --b2.
        #[arg(long, requires_all = ["b1", "b2"])]
        theoretical_m: Option<usize>,
        #[arg(long)]
        b1: Option<usize>,
        #[arg(long)]
        b2: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the exact constants and sample-size schedule.
    Schedule {
        #[arg(long)]
        r: usize,
        #[arg(long)]
        h: usize,
        #[arg(long)]
        b1: usize,
        #[arg(long)]
        b2: usize,
        /// Decimal, parsed exactly.
        #[arg(long)]
        eps: String,
        #[arg(long, default_value_t = DEFAULT_DIGIT_CAP)]
        digit_cap: u64,
        /// Materialize m(n) for n up to this index at most.
        #[arg(long, default_value_t = 64)]
        max_n: usize,
    },
    /// Run the exact lemma suites on random tiny instances.
    Verify {
        /// counting, meansquare, cauchy, energy or all.
        #[arg(long, default_value = "all")]
        lemma: String,
        #[arg(long, default_value_t = 100)]
        instances: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = SamplingPlan::DEFAULT_WORK_CAP)]
        work_cap: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Regularize and measure over a practical schedule.
    Experiment {
        /// Generator spec (as in `gen`) or path to a graph file.
        #[arg(long)]
        graph: String,
        /// Comma-separated sample counts, starting at 0.
        #[arg(long, default_value = "0,1,2,4,8")]
        schedule: String,
        #[arg(long, default_value_t = 2)]
        h: usize,
        #[arg(long, default_value_t = 0.25)]
        eps: f64,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[command(flatten)]
        plan: PlanArgs,
        #[arg(long, default_value_t = 4)]
        probes: usize,
        #[arg(long, default_value_t = 1)]
        big_m: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Draw one schedule index per trial instead of sweeping all of them.
        #[arg(long)]
        faithful: bool,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write a per-trial CSV table here.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

/// At least one checked inequality failed.
#[derive(Debug)]
struct VerificationFailure(usize);

impl fmt::Display for VerificationFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} check(s) violated", self.0)
    }
}

impl std::error::Error for VerificationFailure {}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn pretty(v: &impl serde::Serialize) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s)
}

fn load_graph(source: &str, seed: u64) -> Result<ColoredGraph> {
    let path = Path::new(source);
    if path.exists() || source.ends_with(".json") {
        return read_graph(path).with_context(|| format!("reading {source}"));
    }
    Ok(generate(&GeneratorSpec::parse(source, seed)?)?)
}

fn exponent_text(x: f64) -> String {
    if x < 1e15 {
        format!("{}", x.floor())
    } else {
        format!("({x:.6e})")
    }
}

fn schedule_doc(r: usize, h: usize, b: (usize, usize), eps: &str, digit_cap: u64, max_n: usize) -> Result<Value> {
    let eps_q = parse_decimal(eps)?;
    let mut sched = TheoreticalSchedule::new(r, h, b, eps_q, digit_cap)?;
    let overflow = sched.materialize(max_n);
    let overflow = match overflow {
        None => Value::Null,
        Some(Error::DigitCapExceeded { what, digits_estimate, log2_lower_bound, digit_cap }) => json!({
            "value": what,
            "digits_estimate": digits_estimate,
            "log2_lower_bound": log2_lower_bound,
            "digit_cap": digit_cap,
            "message": format!("{what} exceeds 2^{} and is not materialized", exponent_text(log2_lower_bound)),
        }),
        Some(other) => return Err(other.into()),
    };
    Ok(json!({
        "r": r,
        "h": h,
        "b": [b.0, b.1],
        "eps": eps,
        "eps1": sched.eps1.to_string(),
        "eps1_decimal": format_significant(&sched.eps1, 12),
        "c": sched.c.significant(12),
        "c_squared": sched.c.squared.to_string(),
        "c_interval": [format_significant(&sched.c.lower, 15), format_significant(&sched.c.upper, 15)],
        "n_tilde": sched.n_tilde.to_string(),
        "recursion": "equality (minimal schedule)",
        "m": sched.materialized().iter().map(ToString::to_string).collect::<Vec<_>>(),
        "big_m": sched.materialized_big_m().iter().map(ToString::to_string).collect::<Vec<_>>(),
        "overflow": overflow,
    }))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Gen { graph, seed, out } => {
            let g = generate(&GeneratorSpec::parse(&graph, seed)?)?;
            emit(out.as_deref(), &graph_to_json(&g))
        }
        Command::Regularize { input, m, seed, out, sidecar } => {
            let g = read_graph(&input).with_context(|| format!("reading {}", input.display()))?;
            let phi = random_partitionwise_map(g.part_sizes(), &vec![m; g.r()], &mut rng::master(seed))?;
            let (gstar, palettes) = regularize_with_palettes(&g, &phi)?;
            if let Some(path) = sidecar {
                std::fs::write(&path, signature_sidecar(&palettes)).with_context(|| format!("writing {}", path.display()))?;
            }
            match out {
                Some(path) => {
                    write_graph(&path, &gstar)?;
                    eprintln!("vertex palettes {:?} -> {:?}", g.vertex_palettes(), gstar.vertex_palettes());
                    Ok(())
                }
                None => emit(None, &graph_to_json(&gstar)),
            }
        }
        Command::Measure { input, h, eps, plan, probes, big_m, theoretical_m, b1, b2, seed, out } => {
            let g = read_graph(&input).with_context(|| format!("reading {}", input.display()))?;
            let (plan, eta_plan) = plan.plans(seed);
            let budget = match (theoretical_m, b1, b2) {
                (Some(m), Some(b1), Some(b2)) => SampleBudget::Theoretical { b: (b1, b2), m, digit_cap: DEFAULT_DIGIT_CAP },
                _ => SampleBudget::Fixed(big_m),
            };
            let probes = default_probes(&g, h, probes, &mut rng::master(seed));
            let report = regularity_report(&g, h, eps, budget, &probes, &plan, &eta_plan)?;
            emit(out.as_deref(), &pretty(&report)?)
        }
        Command::Schedule { r, h, b1, b2, eps, digit_cap, max_n } => {
            let doc = schedule_doc(r, h, (b1, b2), &eps, digit_cap, max_n)?;
            emit(None, &pretty(&doc)?)
        }
        Command::Verify { lemma, instances, seed, work_cap, out } => {
            let mut suites = Vec::new();
            for l in Lemma::parse(&lemma)? {
                let rep = run_suite(l, instances, seed, work_cap)?;
                eprintln!("{:?}: {} instances, {} checks, {} violations", l, rep.instances, rep.checks, rep.violations);
                suites.push(rep);
            }
            let violations: usize = suites.iter().map(|s| s.violations).sum();
            let checks: usize = suites.iter().map(|s| s.checks).sum();
            let doc = json!({ "seed": seed, "checks": checks, "violations": violations, "suites": suites });
            emit(out.as_deref(), &pretty(&doc)?)?;
            if violations > 0 {
                return Err(VerificationFailure(violations).into());
            }
            Ok(())
        }
        Command::Experiment {
            graph,
            schedule,
            h,
            eps,
            trials,
            plan,
            probes,
            big_m,
            seed,
            faithful,
            out,
            csv,
        } => {
            let g = load_graph(&graph, seed)?;
            let (plan, eta_plan) = plan.plans(seed);
            let cfg = ExperimentConfig {
                graph,
                schedule: PracticalSchedule::parse(&schedule)?,
                h,
                eps,
                probes,
                trials,
                plan,
                eta_plan,
                big_m,
                seed,
                faithful,
            };
            let res = run_experiment(&g, &cfg)?;
            for grp in &res.groups {
                eprintln!(
                    "m = {:>3}: score {:.6} +- {:.6} over {} trials",
                    grp.m, grp.score.mean, grp.score.stderr, grp.score.count
                );
            }
            if !res.markov.holds {
                eprintln!(
                    "warning: fraction of scores above {:.4} is {:.4}, above the Markov bound",
                    res.markov.threshold, res.markov.fraction
                );
            }
            if let Some(path) = csv {
                std::fs::write(&path, res.to_csv()).with_context(|| format!("writing {}", path.display()))?;
            }
            emit(out.as_deref(), &pretty(&res)?)
        }
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<VerificationFailure>().is_some() {
        return 3;
    }
    match err.downcast_ref::<Error>() {
        Some(e) if e.is_budget() => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
