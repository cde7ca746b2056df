//! Regularize-and-measure sweeps over a practical schedule.
//!
//! In sweep mode every schedule entry `n` gets `trials` independent maps
//! `phi` in `Phi(m(n))`. In faithful mode each trial draws `n` uniformly
//! first, as in the main theorem. Every trial uses its own derived seed and
//! results are collected by trial index, so the output does not depend on
//! the number of worker threads.

use rand::SeedableRng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{random_partitionwise_map, ColoredGraph};
use crate::regularize::regularize;
use crate::rng;
use crate::schedule::{choose_n_and_sample, PracticalSchedule};
use crate::stats::{default_probes, delta_table, report_from_table, ErrorBudget, SampleBudget, SamplingPlan};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    /// Free-form description of the input graph, echoed in the output.
    pub graph: String,
    pub schedule: PracticalSchedule,
    pub h: usize,
    pub eps: f64,
    /// Random fully visible probes per trial (single-edge probes are always
    /// added).
    pub probes: usize,
    pub trials: usize,
    /// Plan for the counting probes.
    pub plan: SamplingPlan,
    /// Plan for the outer expectation of `eta`.
    pub eta_plan: SamplingPlan,
    /// `M` used inside `eta`.
    pub big_m: u64,
    pub seed: u64,
    pub faithful: bool,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::validation("trials must be at least 1"));
        }
        if self.h == 0 {
            return Err(Error::validation("h must be at least 1"));
        }
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return Err(Error::validation(format!("eps must be positive, got {}", self.eps)));
        }
        if self.big_m == 0 {
            return Err(Error::validation("M must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRecord {
    pub n: usize,
    pub m: usize,
    pub trial: usize,
    pub vertex_palettes: Vec<usize>,
    pub score: f64,
    pub mean_delta: Vec<f64>,
    pub probes: usize,
    pub violations: usize,
    pub margins: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub count: usize,
    pub mean: f64,
    pub stderr: f64,
}

impl Summary {
    pub fn of(xs: &[f64]) -> Self {
        let n = xs.len();
        if n == 0 {
            return Summary { count: 0, mean: 0.0, stderr: 0.0 };
        }
        let mean = xs.iter().sum::<f64>() / n as f64;
        let stderr = if n < 2 {
            0.0
        } else {
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            (var / n as f64).sqrt()
        };
        Summary { count: n, mean, stderr }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupSummary {
    pub n: usize,
    pub m: usize,
    pub score: Summary,
    pub max_vertex_palette: Summary,
    pub markov: MarkovCheck,
}

/// `fraction(score > sqrt(mean)) <= sqrt(mean) + 3 stderr`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MarkovCheck {
    pub threshold: f64,
    pub fraction: f64,
    pub stderr: f64,
    pub holds: bool,
}

impl MarkovCheck {
    pub fn of(scores: &[f64]) -> Self {
        let mean = Summary::of(scores).mean;
        let threshold = mean.max(0.0).sqrt();
        let n = scores.len().max(1) as f64;
        let fraction = scores.iter().filter(|&&s| s > threshold).count() as f64 / n;
        let stderr = (fraction * (1.0 - fraction) / n).sqrt();
        MarkovCheck { threshold, fraction, stderr, holds: fraction <= threshold + 3.0 * stderr }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub groups: Vec<GroupSummary>,
    pub overall: Summary,
    pub markov: MarkovCheck,
    pub trials: Vec<TrialRecord>,
}

impl ExperimentResult {
    pub fn group_for_m(&self, m: usize) -> Option<&GroupSummary> {
        self.groups.iter().find(|g| g.m == m)
    }

    /// Flat per-trial table.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,m,trial,score,max_vertex_palette,probes,violations,max_margin\n");
        for t in &self.trials {
            let max_margin = t.margins.iter().copied().fold(0.0, f64::max);
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                t.n,
                t.m,
                t.trial,
                t.score,
                t.vertex_palettes.iter().max().copied().unwrap_or(0),
                t.probes,
                t.violations,
                max_margin
            ));
        }
        out
    }
}

/// Regularizes `g` with `m` fresh samples per part and scores the result.
fn run_trial(g: &ColoredGraph, cfg: &ExperimentConfig, n: usize, m: usize, trial: usize, mut r: rng::Rng) -> Result<TrialRecord> {
    let phi = random_partitionwise_map(g.part_sizes(), &vec![m; g.r()], &mut r)?;
    measure(g, cfg, n, m, trial, &phi, r)
}

fn measure(
    g: &ColoredGraph,
    cfg: &ExperimentConfig,
    n: usize,
    m: usize,
    trial: usize,
    phi: &crate::graph::PartitionwiseMap,
    mut r: rng::Rng,
) -> Result<TrialRecord> {
    let gstar = regularize(g, phi)?;
    let probes = default_probes(&gstar, cfg.h, cfg.probes, &mut r);
    let stream = (n as u64) << 32 | trial as u64;
    let table = delta_table(&gstar, cfg.h, cfg.eps, SampleBudget::Fixed(cfg.big_m), &cfg.eta_plan.stream(stream))?;
    let report = report_from_table(&gstar, &table, &probes, &cfg.plan.stream(stream), ErrorBudget::Linear)?;
    Ok(TrialRecord {
        n,
        m,
        trial,
        vertex_palettes: gstar.vertex_palettes().to_vec(),
        score: report.score,
        mean_delta: report.pairs.iter().map(|p| p.mean_delta).collect(),
        probes: report.probes.len(),
        violations: report.coverage.violations,
        margins: report.probes.iter().map(|p| p.margin).collect(),
    })
}

pub fn run_experiment(g: &ColoredGraph, cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    let sched = &cfg.schedule;
    let jobs: Vec<(usize, usize)> = if cfg.faithful {
        (0..cfg.trials).map(|t| (usize::MAX, t)).collect()
    } else {
        (0..sched.n_tilde()).flat_map(|n| (0..cfg.trials).map(move |t| (n, t))).collect()
    };
    let trials = jobs
        .par_iter()
        .map(|&(n, t)| {
            if cfg.faithful {
                let mut r = rng::derived(cfg.seed, t as u64);
                let (n, phi) = choose_n_and_sample(sched, g.part_sizes(), &mut r)?;
                let inner = rng::Rng::from_rng(&mut r).expect("infallible");
                measure(g, cfg, n, sched.m_of(n), t, &phi, inner)
            } else {
                run_trial(g, cfg, n, sched.m_of(n), t, rng::derived2(cfg.seed, n as u64, t as u64))
            }
        })
        .collect::<Result<Vec<_>>>()?;

    let mut groups = Vec::new();
    for n in 0..sched.n_tilde() {
        let members: Vec<&TrialRecord> = trials.iter().filter(|t| t.n == n).collect();
        if members.is_empty() {
            continue;
        }
        let scores: Vec<f64> = members.iter().map(|t| t.score).collect();
        let palettes: Vec<f64> =
            members.iter().map(|t| t.vertex_palettes.iter().max().copied().unwrap_or(0) as f64).collect();
        groups.push(GroupSummary {
            n,
            m: sched.m_of(n),
            score: Summary::of(&scores),
            max_vertex_palette: Summary::of(&palettes),
            markov: MarkovCheck::of(&scores),
        });
    }
    let all: Vec<f64> = trials.iter().map(|t| t.score).collect();
    Ok(ExperimentResult {
        config: cfg.clone(),
        groups,
        overall: Summary::of(&all),
        markov: MarkovCheck::of(&all),
        trials,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{generate, GeneratorSpec};
    use crate::stats::regularity_report;

    fn config(schedule: &[usize], trials: usize) -> ExperimentConfig {
        ExperimentConfig {
            graph: "test".into(),
            schedule: PracticalSchedule::new(schedule.to_vec()).unwrap(),
            h: 2,
            eps: 0.25,
            probes: 4,
            trials,
            plan: SamplingPlan::monte_carlo(2000, 0),
            eta_plan: SamplingPlan::monte_carlo(40, 0),
            big_m: 1,
            seed: 3,
            faithful: false,
        }
    }

    #[test]
    fn monochromatic_scores_are_zero() {
        let g = generate(&GeneratorSpec::monochromatic(&[6, 5])).unwrap();
        let res = run_experiment(&g, &config(&[0, 1, 2], 3)).unwrap();
        assert!(res.trials.iter().all(|t| t.score == 0.0 && t.margins.iter().all(|&m| m == 0.0)));
        assert!(res.markov.holds);
    }

    #[test]
    fn zero_schedule_measures_the_graph_itself() {
        let g = generate(&GeneratorSpec::uniform_random(1, 2, &[8, 8], 2)).unwrap();
        let cfg = config(&[0], 1);
        let res = run_experiment(&g, &cfg).unwrap();
        let stream = 0u64;
        let direct = regularity_report(
            &g,
            cfg.h,
            cfg.eps,
            SampleBudget::Fixed(1),
            &[],
            &cfg.plan,
            &cfg.eta_plan.stream(stream),
        )
        .unwrap();
        assert_eq!(res.trials[0].score, direct.score);
    }

    #[test]
    fn output_is_independent_of_thread_count() {
        let g = generate(&GeneratorSpec::half_graph(10)).unwrap();
        let cfg = config(&[0, 1, 2], 3);
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let many = rayon::ThreadPoolBuilder::new().num_threads(6).build().unwrap();
        let a = one.install(|| serde_json::to_string(&run_experiment(&g, &cfg).unwrap()).unwrap());
        let b = many.install(|| serde_json::to_string(&run_experiment(&g, &cfg).unwrap()).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn faithful_mode_draws_from_schedule() {
        let g = generate(&GeneratorSpec::half_graph(8)).unwrap();
        let mut cfg = config(&[0, 1, 4], 12);
        cfg.faithful = true;
        let res = run_experiment(&g, &cfg).unwrap();
        assert_eq!(res.trials.len(), 12);
        assert!(res.trials.iter().all(|t| t.m == cfg.schedule.m_of(t.n)));
        assert!(res.groups.iter().map(|g| g.score.count).sum::<usize>() == 12);
    }

    #[test]
    fn markov_check_on_empirical_scores() {
        assert!(MarkovCheck::of(&[0.0, 0.0, 4.0]).holds);
        assert!(MarkovCheck::of(&[0.0; 5]).holds);
        let m = MarkovCheck::of(&[1.0, 0.0, 0.0, 0.0]);
        assert_eq!(m.threshold, 0.5);
        assert_eq!(m.fraction, 0.25);
    }

    #[test]
    fn csv_has_one_row_per_trial() {
        let g = generate(&GeneratorSpec::half_graph(6)).unwrap();
        let res = run_experiment(&g, &config(&[0, 2], 2)).unwrap();
        assert_eq!(res.to_csv().lines().count(), 1 + 4);
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let g = generate(&GeneratorSpec::half_graph(4)).unwrap();
        let mut cfg = config(&[0], 1);
        cfg.trials = 0;
        assert!(run_experiment(&g, &cfg).is_err());
    }
}
