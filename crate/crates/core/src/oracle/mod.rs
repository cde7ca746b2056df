//! Brute-force reference computations on instances small enough to
//! enumerate, in exact rational arithmetic.
//!
//! [`run_suite`] draws reproducible random instances and checks the
//! counting lemma, the mean-square lemma, the refinement form of
//! Cauchy-Schwarz and the behaviour of the energy. Every check produces a
//! [`LemmaCheckResult`] with `holds = (rhs - lhs >= 0)`, tolerance 0.

mod energy;
mod lemmas;

pub use energy::{check_energy, energy, EnergyKey};
pub use lemmas::{check_cauchy_refinement, check_counting_lemma, check_mean_square_lemma, EdgeFunctions};

use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};
use rand::Rng;
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::experiment::{run_experiment, ExperimentConfig, MarkovCheck, Summary};
use crate::generate::{generate, GeneratorSpec};
use crate::graph::{enumerate_maps, ColorId, ColoredGraph, Complex, Slot};
use crate::io::graph_to_json;
use crate::rng;
use crate::schedule::PracticalSchedule;
use crate::stats::SamplingPlan;

pub(crate) fn q(n: u64, d: u64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

/// Exact fraction of part `part` colored `color`.
pub(crate) fn exact_density(g: &ColoredGraph, part: usize, color: ColorId) -> BigRational {
    let hits = g.vertex_colors(part).iter().filter(|&&c| c == color).count();
    q(hits as u64, g.part_size(part) as u64)
}

fn ser_rational<S: Serializer>(x: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&x.to_string())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LemmaCheckResult {
    pub lemma: String,
    pub instance: serde_json::Value,
    #[serde(serialize_with = "ser_rational")]
    pub lhs: BigRational,
    #[serde(serialize_with = "ser_rational")]
    pub rhs: BigRational,
    #[serde(serialize_with = "ser_rational")]
    pub slack: BigRational,
    pub lhs_approx: f64,
    pub rhs_approx: f64,
    pub holds: bool,
}

impl LemmaCheckResult {
    pub fn new(lemma: &str, instance: serde_json::Value, lhs: BigRational, rhs: BigRational) -> Self {
        let slack = &rhs - &lhs;
        LemmaCheckResult {
            lemma: lemma.to_string(),
            instance,
            lhs_approx: lhs.to_f64().unwrap_or(f64::NAN),
            rhs_approx: rhs.to_f64().unwrap_or(f64::NAN),
            holds: !slack.is_negative(),
            lhs,
            rhs,
            slack,
        }
    }

    fn with_instance(mut self, extra: serde_json::Value) -> Self {
        self.instance = match (self.instance, extra) {
            (serde_json::Value::Object(mut a), serde_json::Value::Object(b)) => {
                a.extend(b);
                serde_json::Value::Object(a)
            }
            (serde_json::Value::Null, b) => b,
            (a, _) => a,
        };
        self
    }
}

/// Exact embedding probability of `s` over all of `Phi(h)`, by naive
/// enumeration of every slot (visible or not).
pub fn exhaustive_embed(g: &ColoredGraph, s: &Complex, work_cap: u64) -> Result<BigRational> {
    crate::graph::validate_complex(s, g)?;
    let maps = enumerate_maps(g.part_sizes(), &vec![s.h(); g.r()], work_cap)?;
    let total = maps.remaining();
    let vertices = s.visible_vertices();
    let edges = s.visible_edges();
    let mut hits = 0u64;
    for phi in maps {
        let ok = vertices.iter().all(|(v, c)| g.vertex_color(v.part, phi.get(*v)) == *c)
            && edges.iter().all(|e| g.edge_color(e.a.part, phi.get(e.a), e.b.part, phi.get(e.b)) == e.color);
        if ok {
            hits += 1;
        }
    }
    Ok(q(hits, total))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Lemma {
    Counting,
    MeanSquare,
    Cauchy,
    Energy,
}

impl Lemma {
    pub fn parse(text: &str) -> Result<Vec<Lemma>> {
        Ok(match text {
            "counting" => vec![Lemma::Counting],
            "meansquare" => vec![Lemma::MeanSquare],
            "cauchy" => vec![Lemma::Cauchy],
            "energy" => vec![Lemma::Energy],
            "all" => vec![Lemma::Counting, Lemma::MeanSquare, Lemma::Cauchy, Lemma::Energy],
            other => return Err(Error::validation(format!("unknown lemma `{other}`"))),
        })
    }

    /// Number of random instances drawn when `instances` is requested:
    /// the mean-square suite uses half as many, the energy suite a fifth.
    pub fn instance_count(self, instances: usize) -> usize {
        match self {
            Lemma::Counting | Lemma::Cauchy => instances,
            Lemma::MeanSquare => instances.div_ceil(2),
            Lemma::Energy => instances.div_ceil(5),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub lemma: Lemma,
    pub instances: usize,
    pub seed: u64,
    pub checks: usize,
    pub violations: usize,
    pub results: Vec<LemmaCheckResult>,
}

/// A random graph with `r = 2`, part sizes in `sizes`, `b1 in {1, 2}` and
/// two edge colors.
fn random_instance_graph<R: Rng>(r: &mut R, sizes: std::ops::RangeInclusive<usize>) -> Result<(ColoredGraph, GeneratorSpec)> {
    let parts = [r.gen_range(sizes.clone()), r.gen_range(sizes)];
    let spec = GeneratorSpec::uniform_random(r.gen_range(1..=2), 2, &parts, r.gen());
    Ok((generate(&spec)?, spec))
}

/// A random complex whose visible vertex colors all occur in `g`.
fn random_complex<R: Rng>(r: &mut R, g: &ColoredGraph, h: usize, p_visible: f64) -> Complex {
    let mut s = Complex::invisible(g.r(), h);
    for part in 0..g.r() {
        for slot in 0..h {
            if r.gen_bool(p_visible) {
                let v = r.gen_range(0..g.part_size(part));
                s.set_vertex(Slot::new(part, slot), Some(g.vertex_color(part, v)));
            }
        }
    }
    for (i, j) in crate::graph::pairs_of(g.r()) {
        for a in 0..h {
            for b in 0..h {
                let (sa, sb) = (Slot::new(i, a), Slot::new(j, b));
                if s.vertex(sa).is_some() && s.vertex(sb).is_some() && r.gen_bool(p_visible) {
                    let c = ColorId(r.gen_range(0..g.edge_palette(i, j)) as u32);
                    s.set_edge(sa, sb, Some(c));
                }
            }
        }
    }
    s
}

fn describe(spec: &GeneratorSpec, g: &ColoredGraph, s: Option<&Complex>) -> serde_json::Value {
    let graph: serde_json::Value = serde_json::from_str(&graph_to_json(g)).expect("own output");
    serde_json::json!({ "generator": spec, "graph": graph, "complex": s })
}

fn random_function<R: Rng>(r: &mut R, palette: usize) -> Vec<BigRational> {
    (0..palette).map(|_| BigRational::new(r.gen_range(-4i64..=4).into(), 4.into())).collect()
}

fn instance(lemma: Lemma, k: usize, seed: u64, work_cap: u64) -> Result<Vec<LemmaCheckResult>> {
    let mut r = rng::derived2(seed, lemma as u64, k as u64);
    let tag = serde_json::json!({ "index": k, "seed": seed });
    let tagged = |v: Vec<LemmaCheckResult>| v.into_iter().map(|x| x.with_instance(tag.clone())).collect();
    match lemma {
        Lemma::Counting => {
            let (g, spec) = random_instance_graph(&mut r, 2..=3)?;
            let s = random_complex(&mut r, &g, 2, 0.8);
            let res = check_counting_lemma(&g, &s, work_cap)?.with_instance(describe(&spec, &g, Some(&s)));
            Ok(tagged(vec![res]))
        }
        Lemma::MeanSquare => {
            let (g, spec) = random_instance_graph(&mut r, 1..=3)?;
            let m = r.gen_range(1..=2);
            let s = random_complex(&mut r, &g, 1, 1.0);
            let f: EdgeFunctions = s.visible_edges().iter().map(|e| random_function(&mut r, g.edge_palette(e.a.part, e.b.part))).collect();
            let desc = describe(&spec, &g, Some(&s));
            let res = check_mean_square_lemma(&g, &s, m, &f, work_cap)?;
            Ok(tagged(res.into_iter().map(|x| x.with_instance(desc.clone())).collect()))
        }
        Lemma::Cauchy => {
            let n = r.gen_range(1..=8);
            let x: Vec<BigRational> = (0..n).map(|_| q(r.gen_range(0..=8), 8)).collect();
            let fine: Vec<usize> = (0..n).map(|_| r.gen_range(0..n)).collect();
            // merge fine classes into coarse ones through a random map
            let merge: Vec<usize> = (0..n).map(|_| r.gen_range(0..n.div_ceil(2))).collect();
            let coarse: Vec<usize> = fine.iter().map(|&f| merge[f]).collect();
            let desc = serde_json::json!({
                "x": x.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
                "coarse": coarse,
                "fine": fine,
            });
            Ok(tagged(vec![check_cauchy_refinement(n, &x, &coarse, &fine)?.with_instance(desc)]))
        }
        Lemma::Energy => {
            let (g, spec) = random_instance_graph(&mut r, 2..=4)?;
            let desc = describe(&spec, &g, None);
            let res = check_energy(&g, &[0, 1, 2], work_cap)?;
            Ok(tagged(res.into_iter().map(|x| x.with_instance(desc.clone())).collect()))
        }
    }
}

/// Runs `lemma` on reproducible random instances in parallel; results are
/// ordered by instance index.
pub fn run_suite(lemma: Lemma, instances: usize, seed: u64, work_cap: u64) -> Result<SuiteReport> {
    let count = lemma.instance_count(instances);
    let per_instance = (0..count)
        .into_par_iter()
        .map(|k| instance(lemma, k, seed, work_cap))
        .collect::<Result<Vec<_>>>()?;
    let results: Vec<LemmaCheckResult> = per_instance.into_iter().flatten().collect();
    Ok(SuiteReport {
        lemma,
        instances: count,
        seed,
        checks: results.len(),
        violations: results.iter().filter(|r| !r.holds).count(),
        results,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MainEstimate {
    pub score: Summary,
    pub markov: MarkovCheck,
}

/// Mean regularity score over `trials` independent draws of `n` uniform in
/// the schedule and `phi` in `Phi(m(n))`.
#[allow(clippy::too_many_arguments)]
pub fn main_theorem_estimate(
    g: &ColoredGraph,
    schedule: &PracticalSchedule,
    h: usize,
    eps: f64,
    probes: usize,
    trials: usize,
    plan: SamplingPlan,
    eta_plan: SamplingPlan,
    seed: u64,
) -> Result<MainEstimate> {
    let cfg = ExperimentConfig {
        graph: String::new(),
        schedule: schedule.clone(),
        h,
        eps,
        probes,
        trials,
        plan,
        eta_plan,
        big_m: 1,
        seed,
        faithful: true,
    };
    let res = run_experiment(g, &cfg)?;
    Ok(MainEstimate { score: res.overall, markov: res.markov })
}
