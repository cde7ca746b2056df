//! The mean-square deviation `eta`, BAD colors and the error function `delta`.
//!
//! For a pair total color `tc = (c; a, b)` of `G*`,
//!
//! ```text
//! eta(tc) = E_{phi'} E_{e* : frame(e*) = (a, b)} (P[G*(e) = c | e ~ e*] - d(tc))^2
//! ```
//!
//! where `e ~ e*` means both edges have the same frame under the further
//! regularization `G*/phi'` with `M h` samples per part. The inner
//! probability is exact: all edges of the pair are bucketed by their
//! `G*/phi'` frame, and the average over `e*` becomes a weighted sum over
//! buckets. Only the outer expectation over `phi'` is enumerated or sampled.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{
    check_work, map_at_index, map_space_size, random_partitionwise_map, ColorId, ColoredGraph,
    PartitionwiseMap, TotalColor,
};
use crate::regularize::part_classes;
use crate::rng;
use crate::schedule;

use super::density::{density_table, DensityTable};
use super::plan::{SamplingMode, SamplingPlan};

/// How many samples per part (divided by `h`) the further regularization
/// inside `eta` uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleBudget {
    /// Use this `M` directly.
    Fixed(u64),
    /// `M = ceil((b1 b2^((r-1) m) / sqrt(eps1))^(r h))` for the original
    /// graph's bounds `b` and the number `m` of samples that produced `G*`.
    Theoretical { b: (usize, usize), m: usize, digit_cap: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorEntry {
    pub eta: f64,
    pub eta_stderr: f64,
    pub delta: f64,
    pub is_bad: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorTable {
    pub h: usize,
    pub eps: f64,
    pub eps1: f64,
    /// `C` rounded up to `f64` (may be infinite for extreme parameters).
    pub c: f64,
    pub big_m: u64,
    pub plan: SamplingPlan,
    #[serde(serialize_with = "entries_as_list")]
    entries: BTreeMap<TotalColor, ErrorEntry>,
}

fn entries_as_list<S: serde::Serializer>(
    entries: &BTreeMap<TotalColor, ErrorEntry>,
    ser: S,
) -> std::result::Result<S::Ok, S::Error> {
    #[derive(Serialize)]
    struct Row<'a> {
        total_color: &'a TotalColor,
        #[serde(flatten)]
        entry: &'a ErrorEntry,
    }
    ser.collect_seq(entries.iter().map(|(tc, entry)| Row { total_color: tc, entry }))
}

impl ErrorTable {
    /// A table assigning `delta` to every occurring pair total color of `g`
    /// (no `eta` is computed).
    pub fn constant(g: &ColoredGraph, delta: f64) -> Self {
        let entries = density_table(g)
            .pair_total_colors()
            .into_iter()
            .map(|(tc, _)| (tc, ErrorEntry { eta: 0.0, eta_stderr: 0.0, delta, is_bad: false }))
            .collect();
        ErrorTable {
            h: 0,
            eps: f64::NAN,
            eps1: f64::NAN,
            c: f64::NAN,
            big_m: 0,
            plan: SamplingPlan::exhaustive(0),
            entries,
        }
    }

    /// `delta(tc)`: 0 for vertex colors, the table entry for pair colors, 1
    /// for pair colors that do not occur.
    pub fn delta_of(&self, tc: &TotalColor) -> f64 {
        if tc.is_vertex() {
            return 0.0;
        }
        self.entries.get(tc).map_or(1.0, |e| e.delta)
    }

    pub fn get(&self, tc: &TotalColor) -> Option<&ErrorEntry> {
        self.entries.get(tc)
    }

    pub fn entries(&self) -> impl Iterator<Item = (&TotalColor, &ErrorEntry)> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// `(slot in output, color, density)` of one total color in a frame.
type ColorSlot = (usize, usize, f64);

/// One pair's total colors grouped by frame.
struct PairLayout {
    i: usize,
    j: usize,
    palette: usize,
    frame_ids: HashMap<(ColorId, ColorId), usize>,
    /// per frame: support and its colors
    frames: Vec<(u64, Vec<ColorSlot>)>,
}

struct EtaLayout {
    pairs: Vec<PairLayout>,
    colors: Vec<TotalColor>,
}

fn layout(g: &ColoredGraph, dens: &DensityTable) -> EtaLayout {
    let mut colors = Vec::new();
    let mut pairs = Vec::new();
    for pd in dens.pairs() {
        let mut frame_keys: Vec<_> = pd.frames.keys().copied().collect();
        frame_keys.sort();
        let mut frame_ids = HashMap::new();
        let mut frames = Vec::new();
        for f in frame_keys {
            let st = &pd.frames[&f];
            let mut list = Vec::new();
            for (c, &n) in st.counts.iter().enumerate() {
                if n > 0 {
                    list.push((colors.len(), c, n as f64 / st.support as f64));
                    colors.push(TotalColor::Pair { i: pd.i, j: pd.j, color: ColorId(c as u32), frame: f });
                }
            }
            frame_ids.insert(f, frames.len());
            frames.push((st.support, list));
        }
        pairs.push(PairLayout { i: pd.i, j: pd.j, palette: g.edge_palette(pd.i, pd.j), frame_ids, frames });
    }
    EtaLayout { pairs, colors }
}

/// Dense bucket tables above this many cells switch to a hash map.
const DENSE_LIMIT: usize = 1 << 22;

/// Per-color contribution of one further regularization `phi'`.
fn eta_one(g: &ColoredGraph, lay: &EtaLayout, phi: &PartitionwiseMap, out: &mut [f64]) {
    let classes: Vec<(Vec<u32>, usize)> = (0..g.r()).map(|p| part_classes(g, p, phi)).collect();
    // G* color of every class, from any member
    let origin: Vec<Vec<ColorId>> = classes
        .iter()
        .enumerate()
        .map(|(p, (cls, n))| {
            let mut o = vec![ColorId(0); *n];
            for (v, &c) in cls.iter().enumerate() {
                o[c as usize] = g.vertex_color(p, v);
            }
            o
        })
        .collect();
    for pl in &lay.pairs {
        let (ci, ni) = &classes[pl.i];
        let (cj, nj) = &classes[pl.j];
        let matrix = &g.pair(pl.i, pl.j).matrix;
        let width = g.part_size(pl.j);
        let mut visit = |cu: usize, cv: usize, counts: &[u32]| {
            let total: u32 = counts.iter().sum();
            if total == 0 {
                return;
            }
            let frame = (origin[pl.i][cu], origin[pl.j][cv]);
            let (support, list) = &pl.frames[pl.frame_ids[&frame]];
            let t = total as f64;
            for &(slot, c, d) in list {
                let dev = counts[c] as f64 / t - d;
                out[slot] += t * dev * dev / *support as f64;
            }
        };
        if ni * nj * pl.palette <= DENSE_LIMIT {
            let mut buckets = vec![0u32; ni * nj * pl.palette];
            for (pos, c) in matrix.iter().enumerate() {
                let key = ci[pos / width] as usize * nj + cj[pos % width] as usize;
                buckets[key * pl.palette + c.index()] += 1;
            }
            for key in 0..ni * nj {
                visit(key / nj, key % nj, &buckets[key * pl.palette..(key + 1) * pl.palette]);
            }
        } else {
            let mut buckets: HashMap<(u32, u32), Vec<u32>> = HashMap::new();
            for (pos, c) in matrix.iter().enumerate() {
                let key = (ci[pos / width], cj[pos % width]);
                buckets.entry(key).or_insert_with(|| vec![0; pl.palette])[c.index()] += 1;
            }
            let mut keys: Vec<_> = buckets.keys().copied().collect();
            keys.sort_unstable();
            for (cu, cv) in keys {
                visit(cu as usize, cv as usize, &buckets[&(cu, cv)]);
            }
        }
    }
}

const CHUNK: u64 = 64;

/// Mean and standard error of `eta` for every occurring pair total color.
/// Summation is chunked by sample index, so the result does not depend on
/// the number of worker threads.
fn eta_all(g: &ColoredGraph, lay: &EtaLayout, per_part: usize, plan: &SamplingPlan) -> Result<Vec<(f64, f64)>> {
    let sizes = g.part_sizes().to_vec();
    let counts = vec![per_part; g.r()];
    let (total, exact) = match plan.mode {
        SamplingMode::Exhaustive => (check_work(map_space_size(&sizes, &counts), plan.work_cap)?, true),
        SamplingMode::MonteCarlo => {
            if plan.samples == 0 {
                return Err(Error::validation("Monte Carlo plan needs at least one sample"));
            }
            if sizes.contains(&0) && per_part > 0 {
                return Err(Error::validation("cannot sample from an empty part"));
            }
            (plan.samples, false)
        }
    };
    let width = lay.colors.len();
    let chunks = total.div_ceil(CHUNK);
    let partial: Vec<(Vec<f64>, Vec<f64>)> = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut sum = vec![0.0; width];
            let mut sq = vec![0.0; width];
            let mut one = vec![0.0; width];
            for k in chunk * CHUNK..((chunk + 1) * CHUNK).min(total) {
                let phi = if exact {
                    map_at_index(&sizes, &counts, k)
                } else {
                    let mut r = rng::derived(plan.seed, k);
                    random_partitionwise_map(&sizes, &counts, &mut r).expect("sizes checked")
                };
                one.iter_mut().for_each(|x| *x = 0.0);
                eta_one(g, lay, &phi, &mut one);
                for t in 0..width {
                    sum[t] += one[t];
                    sq[t] += one[t] * one[t];
                }
            }
            (sum, sq)
        })
        .collect();
    let mut sum = vec![0.0; width];
    let mut sq = vec![0.0; width];
    for (s, q) in &partial {
        for t in 0..width {
            sum[t] += s[t];
            sq[t] += q[t];
        }
    }
    let n = total as f64;
    Ok((0..width)
        .map(|t| {
            let mean = sum[t] / n;
            let stderr = if exact || total < 2 {
                0.0
            } else {
                let var = ((sq[t] - n * mean * mean) / (n - 1.0)).max(0.0);
                (var / n).sqrt()
            };
            (mean.max(0.0), stderr)
        })
        .collect())
}

fn samples_per_part(big_m: u64, h: usize) -> Result<usize> {
    big_m
        .checked_mul(h as u64)
        .and_then(|x| usize::try_from(x).ok())
        .filter(|&x| x <= 1 << 24)
        .ok_or_else(|| Error::WorkCapExceeded { needed: format!("{big_m} * {h} samples per part"), cap: 1 << 24 })
}

/// `eta(tc)` with `M h` samples per part in the further regularization.
/// Returns `(mean, stderr)`; the stderr is 0 in exhaustive mode.
pub fn eta(gstar: &ColoredGraph, tc: &TotalColor, big_m: u64, h: usize, plan: &SamplingPlan) -> Result<(f64, f64)> {
    let TotalColor::Pair { i, j, frame, .. } = *tc else {
        return Err(Error::validation("eta is defined for pair total colors only"));
    };
    if i >= j || j >= gstar.r() {
        return Err(Error::validation(format!("invalid pair ({i}, {j})")));
    }
    let dens = density_table(gstar);
    if dens.frame(i, j, frame).is_none() {
        return Err(Error::ZeroSupport(tc.to_string()));
    }
    let lay = layout(gstar, &dens);
    let all = eta_all(gstar, &lay, samples_per_part(big_m, h)?, plan)?;
    // a color absent from its frame has d = 0 and conditional probability 0
    Ok(lay.colors.iter().position(|c| c == tc).map_or((0.0, 0.0), |k| all[k]))
}

/// Occurring total colors with some sub-density at most
/// `sqrt(eps1) / |palette|`.
pub fn bad_colors(gstar: &ColoredGraph, eps1: f64) -> Result<BTreeSet<TotalColor>> {
    if !(eps1 > 0.0 && eps1 <= 1.0) {
        return Err(Error::validation(format!("eps1 must lie in (0, 1], got {eps1}")));
    }
    Ok(bad_from_table(gstar, &density_table(gstar), eps1))
}

fn bad_from_table(g: &ColoredGraph, dens: &DensityTable, eps1: f64) -> BTreeSet<TotalColor> {
    let root = eps1.sqrt();
    let vertex_bad = |part: usize, color: ColorId| {
        let tc = TotalColor::Vertex { part, color };
        dens.density_or_zero(&tc) <= root / g.vertex_palette(part) as f64
    };
    let mut out = BTreeSet::new();
    for (tc, _) in dens.vertex_total_colors() {
        if let TotalColor::Vertex { part, color } = tc {
            if vertex_bad(part, color) {
                out.insert(tc);
            }
        }
    }
    for (tc, _) in dens.pair_total_colors() {
        if let TotalColor::Pair { i, j, frame, .. } = tc {
            let own = dens.density_or_zero(&tc) <= root / g.edge_palette(i, j) as f64;
            if own || vertex_bad(i, frame.0) || vertex_bad(j, frame.1) {
                out.insert(tc);
            }
        }
    }
    out
}

/// Resolved constants of a `delta` computation.
struct Constants {
    eps1: f64,
    c: f64,
    big_m: u64,
}

fn constants(gstar: &ColoredGraph, h: usize, eps: f64, budget: SampleBudget) -> Result<Constants> {
    let r = gstar.r();
    let b2 = gstar.bounds().1;
    let eps_q = schedule::decimal_to_rational(eps)?;
    let eps1 = schedule::epsilon1(r, b2, &eps_q)?;
    let c = schedule::constant_c(r, h, b2, &eps1)?;
    let big_m = match budget {
        SampleBudget::Fixed(m) => m,
        SampleBudget::Theoretical { b, m, digit_cap } => {
            let value: BigUint = schedule::sample_budget(r, h, b, &eps_q, m, digit_cap)?;
            value.to_u64().ok_or_else(|| Error::WorkCapExceeded { needed: format!("M = {value}"), cap: u64::MAX })?
        }
    };
    Ok(Constants { eps1: eps1.to_f64().unwrap_or(0.0), c: c.to_f64(), big_m })
}

/// `delta(tc) = 1` for BAD colors, `min(1, C sqrt(eta))` otherwise.
pub fn delta_table(
    gstar: &ColoredGraph,
    h: usize,
    eps: f64,
    budget: SampleBudget,
    plan: &SamplingPlan,
) -> Result<ErrorTable> {
    if h == 0 {
        return Err(Error::validation("h must be at least 1"));
    }
    let k = constants(gstar, h, eps, budget)?;
    let dens = density_table(gstar);
    let bad = bad_from_table(gstar, &dens, k.eps1);
    let lay = layout(gstar, &dens);
    let per_part = samples_per_part(k.big_m, h)?;
    let needs_eta = lay.colors.iter().any(|tc| !bad.contains(tc));
    let etas = if needs_eta { eta_all(gstar, &lay, per_part, plan)? } else { vec![(0.0, 0.0); lay.colors.len()] };
    let entries = lay
        .colors
        .iter()
        .zip(etas)
        .map(|(tc, (eta, eta_stderr))| {
            let is_bad = bad.contains(tc);
            let delta = if is_bad {
                1.0
            } else if eta == 0.0 {
                0.0
            } else {
                (k.c * eta.sqrt()).min(1.0)
            };
            (*tc, ErrorEntry { eta, eta_stderr, delta, is_bad })
        })
        .collect();
    Ok(ErrorTable { h, eps, eps1: k.eps1, c: k.c, big_m: k.big_m, plan: *plan, entries })
}
