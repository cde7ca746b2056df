//! Embedding probabilities of complexes.
//!
//! Only visible template vertices constrain a map, so both modes work on
//! the visible vertices alone: the invisible ones integrate out to 1.
//! Exhaustive mode backtracks over color-compatible vertices and prunes on
//! the first mismatching edge.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{check_work, validate_complex, ColorId, ColoredGraph, Complex};
use crate::rng;

use super::plan::{SamplingMode, SamplingPlan};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    /// Normal-approximation standard error; zero for exact values.
    pub stderr: f64,
    /// Number of Monte Carlo draws, zero for exact values.
    pub samples: u64,
    /// `(matches, total)` in exhaustive mode.
    pub exact: Option<(u64, u64)>,
}

impl Estimate {
    pub fn exact(num: u64, den: u64) -> Self {
        Estimate { value: num as f64 / den as f64, stderr: 0.0, samples: 0, exact: Some((num, den)) }
    }

    pub fn from_hits(hits: u64, n: u64) -> Self {
        let p = hits as f64 / n as f64;
        Estimate { value: p, stderr: (p * (1.0 - p) / n as f64).sqrt(), samples: n, exact: None }
    }
}

/// Visible part of a complex flattened for fast matching.
pub(crate) struct Pattern {
    /// `(part, required color)` per visible vertex.
    pub vertices: Vec<(usize, ColorId)>,
    /// For visible vertex `k`: edges `(earlier vertex, color)` to check once
    /// `k` is placed.
    pub back_edges: Vec<Vec<(usize, ColorId)>>,
}

impl Pattern {
    pub fn new(s: &Complex) -> Self {
        let visible = s.visible_vertices();
        let index_of = |slot| visible.iter().position(|(v, _)| *v == slot).expect("closure checked");
        let mut back_edges = vec![Vec::new(); visible.len()];
        for e in s.visible_edges() {
            let (a, b) = (index_of(e.a), index_of(e.b));
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            back_edges[hi].push((lo, e.color));
        }
        Pattern { vertices: visible.iter().map(|(v, c)| (v.part, *c)).collect(), back_edges }
    }

    fn candidates(&self, g: &ColoredGraph) -> Vec<Vec<usize>> {
        self.vertices
            .iter()
            .map(|&(part, c)| (0..g.part_size(part)).filter(|&v| g.vertex_color(part, v) == c).collect())
            .collect()
    }

    #[inline]
    fn edges_match(&self, g: &ColoredGraph, k: usize, placed: &[usize]) -> bool {
        let (pk, _) = self.vertices[k];
        self.back_edges[k].iter().all(|&(l, c)| {
            let (pl, _) = self.vertices[l];
            g.edge_color(pk, placed[k], pl, placed[l]) == c
        })
    }

    #[inline]
    fn all_match(&self, g: &ColoredGraph, placed: &[usize]) -> bool {
        self.vertices.iter().enumerate().all(|(k, &(part, c))| g.vertex_color(part, placed[k]) == c)
            && (0..placed.len()).all(|k| self.edges_match(g, k, placed))
    }

    /// Number of color-compatible placements satisfying every edge.
    fn count(&self, g: &ColoredGraph, candidates: &[Vec<usize>]) -> u64 {
        fn rec(p: &Pattern, g: &ColoredGraph, cand: &[Vec<usize>], placed: &mut Vec<usize>) -> u64 {
            let k = placed.len();
            if k == cand.len() {
                return 1;
            }
            let mut total = 0;
            for &v in &cand[k] {
                placed.push(v);
                if p.edges_match(g, k, placed) {
                    total += rec(p, g, cand, placed);
                }
                placed.pop();
            }
            total
        }
        rec(self, g, candidates, &mut Vec::with_capacity(candidates.len()))
    }
}

fn product(mut sizes: impl Iterator<Item = usize>) -> Option<u128> {
    sizes.try_fold(1u128, |acc, n| acc.checked_mul(n as u128))
}

/// `P_phi[G(phi(e)) = S(e) for every visible e]` over `phi` in `Phi(h)`.
pub fn embed_probability(g: &ColoredGraph, s: &Complex, plan: &SamplingPlan) -> Result<Estimate> {
    validate_complex(s, g)?;
    let pat = Pattern::new(s);
    match plan.mode {
        SamplingMode::Exhaustive => {
            let total = product(pat.vertices.iter().map(|&(p, _)| g.part_size(p)));
            let total = check_work(total, plan.work_cap)?;
            let cand = pat.candidates(g);
            Ok(Estimate::exact(pat.count(g, &cand), total))
        }
        SamplingMode::MonteCarlo => {
            let n = positive_samples(plan)?;
            let mut rng = rng::master(plan.seed);
            let mut placed = vec![0usize; pat.vertices.len()];
            let mut hits = 0u64;
            for _ in 0..n {
                for (slot, &(part, _)) in placed.iter_mut().zip(&pat.vertices) {
                    *slot = rng.gen_range(0..g.part_size(part));
                }
                if pat.all_match(g, &placed) {
                    hits += 1;
                }
            }
            Ok(Estimate::from_hits(hits, n))
        }
    }
}

/// `P[all visible pair edges match | all visible vertices match]`.
pub fn conditional_embed_probability(g: &ColoredGraph, s: &Complex, plan: &SamplingPlan) -> Result<Estimate> {
    validate_complex(s, g)?;
    let pat = Pattern::new(s);
    let cand = pat.candidates(g);
    if let Some(k) = cand.iter().position(Vec::is_empty) {
        let (part, c) = pat.vertices[k];
        return Err(Error::ZeroProbability(format!("no vertex of color {c} in part {part}")));
    }
    match plan.mode {
        SamplingMode::Exhaustive => {
            let total = check_work(product(cand.iter().map(Vec::len)), plan.work_cap)?;
            Ok(Estimate::exact(pat.count(g, &cand), total))
        }
        SamplingMode::MonteCarlo => {
            let n = positive_samples(plan)?;
            let mut rng = rng::master(plan.seed);
            let mut placed = vec![0usize; cand.len()];
            let mut hits = 0u64;
            for _ in 0..n {
                for (slot, c) in placed.iter_mut().zip(&cand) {
                    *slot = c[rng.gen_range(0..c.len())];
                }
                if (0..placed.len()).all(|k| pat.edges_match(g, k, &placed)) {
                    hits += 1;
                }
            }
            Ok(Estimate::from_hits(hits, n))
        }
    }
}

fn positive_samples(plan: &SamplingPlan) -> Result<u64> {
    if plan.samples == 0 {
        return Err(Error::validation("Monte Carlo plan needs a positive sample count"));
    }
    Ok(plan.samples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{generate, GeneratorSpec};
    use crate::graph::fixtures::*;
    use crate::graph::Slot;
    use crate::stats::density::density_table;
    use crate::graph::TotalColor;

    fn single_edge(color: ColorId) -> Complex {
        Complex::invisible(2, 1)
            .with_vertex(Slot::new(0, 0), ColorId(0))
            .with_vertex(Slot::new(1, 0), ColorId(0))
            .with_edge(Slot::new(0, 0), Slot::new(1, 0), color)
    }

    #[test]
    fn single_black_edge_on_four_vertex_graph() {
        let g = four_vertex();
        let p = embed_probability(&g, &single_edge(BLACK), &SamplingPlan::exhaustive(100)).unwrap();
        assert_eq!(p.exact, Some((3, 4)));
        let c = conditional_embed_probability(&g, &single_edge(BLACK), &SamplingPlan::exhaustive(100)).unwrap();
        assert_eq!(c.value, 0.75);
    }

    #[test]
    fn all_invisible_is_certain() {
        let g = four_vertex();
        for plan in [SamplingPlan::exhaustive(10), SamplingPlan::monte_carlo(50, 1)] {
            assert_eq!(embed_probability(&g, &Complex::invisible(2, 2), &plan).unwrap().value, 1.0);
            assert_eq!(conditional_embed_probability(&g, &Complex::invisible(2, 2), &plan).unwrap().value, 1.0);
        }
    }

    #[test]
    fn absent_color_has_probability_zero() {
        let g = generate(&GeneratorSpec::uniform_random(2, 3, &[3, 3], 1)).unwrap();
        // vertex color 1 might or might not occur; force an absent edge color instead
        let mono = generate(&GeneratorSpec::uniform_random(1, 2, &[2, 2], 0)).unwrap();
        let absent = if mono.pairs()[0].matrix.contains(&ColorId(1)) { None } else { Some(ColorId(1)) };
        if let Some(c) = absent {
            let p = embed_probability(&mono, &single_edge(c), &SamplingPlan::exhaustive(100)).unwrap();
            assert_eq!(p.value, 0.0);
        }
        let s = Complex::invisible(2, 1).with_vertex(Slot::new(0, 0), ColorId(1));
        let counts = density_table(&g).vertex_count(0, ColorId(1));
        let p = embed_probability(&g, &s, &SamplingPlan::exhaustive(100)).unwrap();
        assert_eq!(p.exact, Some((counts, 3)));
    }

    #[test]
    fn zero_probability_condition_is_an_error() {
        let g = four_vertex();
        let mut raw = g.to_raw();
        raw.bounds.0 = 2;
        raw.vertex_palettes[0] = 2;
        let g = ColoredGraph::new(raw).unwrap();
        let s = Complex::invisible(2, 1).with_vertex(Slot::new(0, 0), ColorId(1));
        assert!(matches!(
            conditional_embed_probability(&g, &s, &SamplingPlan::exhaustive(10)),
            Err(Error::ZeroProbability(_))
        ));
    }

    #[test]
    fn work_cap_is_enforced() {
        let g = generate(&GeneratorSpec::half_graph(8)).unwrap();
        let mut s = Complex::invisible(2, 2);
        for part in 0..2 {
            for slot in 0..2 {
                s.set_vertex(Slot::new(part, slot), Some(ColorId(0)));
            }
        }
        assert!(embed_probability(&g, &s, &SamplingPlan::exhaustive(8 * 8 * 8 * 8)).is_ok());
        assert!(matches!(
            embed_probability(&g, &s, &SamplingPlan::exhaustive(4095)),
            Err(Error::WorkCapExceeded { .. })
        ));
    }

    #[test]
    fn monte_carlo_tracks_exact_value() {
        let g = generate(&GeneratorSpec::half_graph(6)).unwrap();
        let s = Complex::invisible(2, 2)
            .with_vertex(Slot::new(0, 0), ColorId(0))
            .with_vertex(Slot::new(1, 0), ColorId(0))
            .with_vertex(Slot::new(1, 1), ColorId(0))
            .with_edge(Slot::new(0, 0), Slot::new(1, 0), BLACK)
            .with_edge(Slot::new(0, 0), Slot::new(1, 1), WHITE);
        let exact = embed_probability(&g, &s, &SamplingPlan::exhaustive(1000)).unwrap();
        let mc = embed_probability(&g, &s, &SamplingPlan::monte_carlo(20_000, 3)).unwrap();
        assert!((mc.value - exact.value).abs() <= 4.0 * mc.stderr, "{mc:?} vs {exact:?}");
        let again = embed_probability(&g, &s, &SamplingPlan::monte_carlo(20_000, 3)).unwrap();
        assert_eq!(mc, again);
    }

    #[test]
    fn product_structure_matches_density_product() {
        // every edge color independent of endpoints: conditional probability of
        // a few edges should factor into the densities
        let g = generate(&GeneratorSpec::uniform_random(2, 2, &[200, 200], 17)).unwrap();
        let t = density_table(&g);
        let s = Complex::invisible(2, 2)
            .with_vertex(Slot::new(0, 0), ColorId(0))
            .with_vertex(Slot::new(0, 1), ColorId(1))
            .with_vertex(Slot::new(1, 0), ColorId(1))
            .with_edge(Slot::new(0, 0), Slot::new(1, 0), BLACK)
            .with_edge(Slot::new(0, 1), Slot::new(1, 0), WHITE);
        let est = conditional_embed_probability(&g, &s, &SamplingPlan::monte_carlo(40_000, 5)).unwrap();
        let d = |c, a| t.density(&TotalColor::Pair { i: 0, j: 1, color: c, frame: (a, ColorId(1)) }).unwrap();
        let expected = d(BLACK, ColorId(0)) * d(WHITE, ColorId(1));
        assert!((est.value - expected).abs() <= 3.0 * est.stderr, "{} vs {expected}", est.value);
    }
}
