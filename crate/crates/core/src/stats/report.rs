//! Counting probes and the regularity score.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

use crate::error::Result;
use crate::graph::{pairs_of, ColoredGraph, Complex, Slot, TotalColor};

use super::density::{density_table, DensityTable};
use super::embed::embed_probability;
use super::error_table::{delta_table, ErrorTable, SampleBudget};
use super::plan::{SamplingMode, SamplingPlan};

/// How the per-pair mean error is turned into a score.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum ErrorBudget {
    /// `eps_I = |C_I| * mean_delta_I`.
    #[default]
    Linear,
    /// `eps_I = (|C_I| * mean_delta_I)^(1 / exponent)`, for budgets of the
    /// form `E[delta] <= eps^exponent / |C_I|`.
    Power { exponent: f64 },
}

impl ErrorBudget {
    fn apply(self, palette: usize, mean_delta: f64) -> f64 {
        let linear = palette as f64 * mean_delta;
        match self {
            ErrorBudget::Linear => linear,
            ErrorBudget::Power { exponent } => linear.powf(1.0 / exponent),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeRecord {
    pub label: String,
    pub visible_vertices: usize,
    pub visible_edges: usize,
    pub probability: f64,
    pub stderr: f64,
    /// Bounds of the product interval the probability must lie in.
    pub lower: f64,
    pub upper: f64,
    /// Distance from the probability to the interval (0 inside).
    pub margin: f64,
    /// `max(0, margin - 3 stderr)`; equals `margin` for exact values.
    pub margin_adjusted: f64,
    pub touches_bad: bool,
}

impl ProbeRecord {
    pub fn satisfied(&self) -> bool {
        self.margin_adjusted == 0.0
    }
}

/// Compares the embedding probability of `s` with
/// `prod_{V1} d * prod_{V2} [max(0, d - delta), min(1, d + delta)]`.
pub fn counting_check(
    g: &ColoredGraph,
    s: &Complex,
    densities: &DensityTable,
    table: &ErrorTable,
    plan: &SamplingPlan,
    label: impl Into<String>,
) -> Result<ProbeRecord> {
    let est = embed_probability(g, s, plan)?;
    let vertices = s.visible_vertices();
    let edges = s.visible_edges();
    let mut base = 1.0;
    for &(v, color) in &vertices {
        base *= densities.density_or_zero(&TotalColor::Vertex { part: v.part, color });
    }
    let (mut lower, mut upper) = (base, base);
    let mut touches_bad = false;
    for e in &edges {
        let frame = (s.vertex(e.a).expect("closed"), s.vertex(e.b).expect("closed"));
        let tc = TotalColor::Pair { i: e.a.part, j: e.b.part, color: e.color, frame };
        let d = densities.density_or_zero(&tc);
        let delta = table.delta_of(&tc);
        touches_bad |= table.get(&tc).is_none_or(|x| x.is_bad);
        lower *= (d - delta).max(0.0);
        upper *= (d + delta).min(1.0);
    }
    let p = est.value;
    let margin = if p < lower {
        lower - p
    } else if p > upper {
        p - upper
    } else {
        0.0
    };
    let margin_adjusted = (margin - 3.0 * est.stderr).max(0.0);
    Ok(ProbeRecord {
        label: label.into(),
        visible_vertices: vertices.len(),
        visible_edges: edges.len(),
        probability: p,
        stderr: est.stderr,
        lower,
        upper,
        margin,
        margin_adjusted,
        touches_bad,
    })
}

/// Every single-edge complex over an occurring pair total color, plus `k`
/// fully visible complexes copied from random embeddings into `g`.
pub fn default_probes<R: Rng + ?Sized>(g: &ColoredGraph, h: usize, k: usize, rng: &mut R) -> Vec<(String, Complex)> {
    let r = g.r();
    let mut out = Vec::new();
    for (tc, _) in density_table(g).pair_total_colors() {
        if let TotalColor::Pair { i, j, color, frame } = tc {
            let (a, b) = (Slot::new(i, 0), Slot::new(j, 0));
            let s = Complex::invisible(r, h).with_vertex(a, frame.0).with_vertex(b, frame.1).with_edge(a, b, color);
            out.push((format!("edge {tc}"), s));
        }
    }
    if g.part_sizes().contains(&0) {
        return out;
    }
    for n in 0..k {
        let picks: Vec<Vec<usize>> =
            (0..r).map(|p| (0..h).map(|_| rng.gen_range(0..g.part_size(p))).collect()).collect();
        let mut s = Complex::invisible(r, h);
        // keep a random subset of parts visible so that products of
        // various lengths are exercised
        let mut parts: Vec<usize> = (0..r).collect();
        parts.shuffle(rng);
        let keep = rng.gen_range(2..=r.max(2)).min(r);
        let visible = &parts[..keep];
        for &p in visible {
            for (slot, &v) in picks[p].iter().enumerate() {
                s.set_vertex(Slot::new(p, slot), Some(g.vertex_color(p, v)));
            }
        }
        for (i, j) in pairs_of(r) {
            if !(visible.contains(&i) && visible.contains(&j)) {
                continue;
            }
            for a in 0..h {
                for b in 0..h {
                    let c = g.edge_color(i, picks[i][a], j, picks[j][b]);
                    s.set_edge(Slot::new(i, a), Slot::new(j, b), Some(c));
                }
            }
        }
        out.push((format!("random {n}"), s));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairReport {
    pub i: usize,
    pub j: usize,
    pub palette: usize,
    /// `E_{e in Omega_I} delta(G*<e>)`, exact over all edges.
    pub mean_delta: f64,
    /// Fraction of edges whose total color is BAD.
    pub bad_fraction: f64,
    pub eps: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Coverage {
    pub probes: usize,
    pub single_edge_probes: usize,
    pub violations: usize,
    pub max_margin: f64,
    pub statement: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegularityReport {
    /// `max_I eps_I`, an upper bound on the least admissible epsilon for
    /// the constructed delta.
    pub score: f64,
    pub pairs: Vec<PairReport>,
    pub vertex_palettes: Vec<usize>,
    pub probes: Vec<ProbeRecord>,
    pub coverage: Coverage,
    pub plan: SamplingPlan,
    pub h: usize,
    pub eps: f64,
    pub eps1: f64,
    pub c: f64,
    pub big_m: u64,
    pub budget: ErrorBudget,
}

/// Scores `gstar` with an already computed error table and runs the probes.
pub fn report_from_table(
    gstar: &ColoredGraph,
    table: &ErrorTable,
    probes: &[(String, Complex)],
    plan: &SamplingPlan,
    budget: ErrorBudget,
) -> Result<RegularityReport> {
    let dens = density_table(gstar);
    let pairs: Vec<PairReport> = dens
        .pairs()
        .iter()
        .map(|pd| {
            let mut weighted = 0.0;
            let mut bad = 0u64;
            for (tc, n) in pd.total_colors() {
                weighted += n as f64 * table.delta_of(&tc);
                if table.get(&tc).is_none_or(|e| e.is_bad) {
                    bad += n;
                }
            }
            let total = pd.total.max(1) as f64;
            let mean_delta = weighted / total;
            PairReport {
                i: pd.i,
                j: pd.j,
                palette: pd.palette,
                mean_delta,
                bad_fraction: bad as f64 / total,
                eps: budget.apply(pd.palette, mean_delta),
            }
        })
        .collect();
    let score = pairs.iter().map(|p| p.eps).fold(0.0, f64::max);
    let records = probes
        .iter()
        .enumerate()
        .map(|(k, (label, s))| counting_check(gstar, s, &dens, table, &plan.stream(k as u64), label.clone()))
        .collect::<Result<Vec<_>>>()?;
    let violations = records.iter().filter(|p| !p.satisfied()).count();
    let single = records.iter().filter(|p| p.visible_edges == 1 && p.visible_vertices == 2).count();
    let tolerance = match plan.mode {
        SamplingMode::Exhaustive => "exact",
        SamplingMode::MonteCarlo => "3 standard errors",
    };
    let statement = format!(
        "{} of the admissible complexes probed ({single} single-edge, {} random); \
         {violations} outside their interval at tolerance {tolerance}; \
         unprobed complexes are not verified",
        records.len(),
        records.len() - single,
    );
    Ok(RegularityReport {
        score,
        pairs,
        vertex_palettes: gstar.vertex_palettes().to_vec(),
        coverage: Coverage {
            probes: records.len(),
            single_edge_probes: single,
            violations,
            max_margin: records.iter().map(|p| p.margin).fold(0.0, f64::max),
            statement,
        },
        probes: records,
        plan: *plan,
        h: table.h,
        eps: table.eps,
        eps1: table.eps1,
        c: table.c,
        big_m: table.big_m,
        budget,
    })
}

/// Computes the error table of `gstar` and scores it.
pub fn regularity_report(
    gstar: &ColoredGraph,
    h: usize,
    eps: f64,
    sample_budget: SampleBudget,
    probes: &[(String, Complex)],
    plan: &SamplingPlan,
    eta_plan: &SamplingPlan,
) -> Result<RegularityReport> {
    let table = delta_table(gstar, h, eps, sample_budget, eta_plan)?;
    report_from_table(gstar, &table, probes, plan, ErrorBudget::Linear)
}
