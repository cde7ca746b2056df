//! Test-corpus generators.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{pairs_of, ColorId, ColoredGraph, PairColoring, RawGraph};
use crate::rng;

pub const BLACK: ColorId = ColorId(0);
pub const WHITE: ColorId = ColorId(1);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GeneratorKind {
    /// One vertex color and one edge color everywhere.
    Monochromatic,
    /// Independent uniform vertex colors from `b1` and edge colors from `b2`.
    UniformRandom { b1: usize, b2: usize },
    /// Two parts of size `n`; edge `(i, j)` is black iff `i <= j`.
    HalfGraph { n: usize },
    /// `k` contiguous hidden classes per part; the edge color is a random
    /// function of the class pair, flipped independently with rate `noise`.
    PlantedBlocks { k: usize, noise: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    #[serde(flatten)]
    pub kind: GeneratorKind,
    pub part_sizes: Vec<usize>,
    pub seed: u64,
}

impl GeneratorSpec {
    pub fn half_graph(n: usize) -> Self {
        GeneratorSpec { kind: GeneratorKind::HalfGraph { n }, part_sizes: vec![n, n], seed: 0 }
    }

    pub fn monochromatic(part_sizes: &[usize]) -> Self {
        GeneratorSpec { kind: GeneratorKind::Monochromatic, part_sizes: part_sizes.to_vec(), seed: 0 }
    }

    pub fn uniform_random(b1: usize, b2: usize, part_sizes: &[usize], seed: u64) -> Self {
        GeneratorSpec { kind: GeneratorKind::UniformRandom { b1, b2 }, part_sizes: part_sizes.to_vec(), seed }
    }

    pub fn planted_blocks(k: usize, noise: f64, part_sizes: &[usize], seed: u64) -> Self {
        GeneratorSpec { kind: GeneratorKind::PlantedBlocks { k, noise }, part_sizes: part_sizes.to_vec(), seed }
    }

    /// Parses the command-line form:
    ///
    /// * `half:N`
    /// * `mono:S1,S2,...`
    /// * `uniform:B1,B2:S1,S2,...`
    /// * `planted:K,NOISE:S1,S2,...`
    pub fn parse(text: &str, seed: u64) -> Result<Self> {
        let bad = || Error::validation(format!("cannot parse generator `{text}`"));
        let fields: Vec<&str> = text.split(':').collect();
        let sizes = |s: &str| -> Result<Vec<usize>> {
            s.split(',').map(|x| x.trim().parse::<usize>().map_err(|_| bad())).collect()
        };
        let spec = match fields.as_slice() {
            ["half", n] => {
                let n = n.parse().map_err(|_| bad())?;
                GeneratorSpec::half_graph(n)
            }
            ["mono", s] => GeneratorSpec::monochromatic(&sizes(s)?),
            ["uniform", b, s] => {
                let b = sizes(b)?;
                let [b1, b2] = b.as_slice() else { return Err(bad()) };
                GeneratorSpec::uniform_random(*b1, *b2, &sizes(s)?, seed)
            }
            ["planted", p, s] => {
                let (k, noise) = p.split_once(',').ok_or_else(bad)?;
                let k = k.parse().map_err(|_| bad())?;
                let noise = noise.parse().map_err(|_| bad())?;
                GeneratorSpec::planted_blocks(k, noise, &sizes(s)?, seed)
            }
            _ => return Err(bad()),
        };
        Ok(GeneratorSpec { seed, ..spec })
    }
}

pub fn generate(spec: &GeneratorSpec) -> Result<ColoredGraph> {
    let sizes = &spec.part_sizes;
    if sizes.len() < 2 || sizes.contains(&0) {
        return Err(Error::validation(format!("generator needs >= 2 non-empty parts, got {sizes:?}")));
    }
    let mut rng = rng::master(spec.seed);
    let r = sizes.len();
    let raw = match spec.kind {
        GeneratorKind::Monochromatic => uniform(sizes, 1, 1, &mut rng),
        GeneratorKind::UniformRandom { b1, b2 } => {
            if b1 == 0 || b2 == 0 {
                return Err(Error::validation("palette bounds must be positive"));
            }
            uniform(sizes, b1, b2, &mut rng)
        }
        GeneratorKind::HalfGraph { n } => {
            if sizes != &[n, n] || n == 0 {
                return Err(Error::validation(format!("half graph needs parts [{n}, {n}]")));
            }
            RawGraph {
                part_sizes: vec![n, n],
                bounds: (1, 2),
                vertex_colors: vec![vec![ColorId(0); n]; 2],
                vertex_palettes: vec![1, 1],
                pairs: vec![PairColoring {
                    i: 0,
                    j: 1,
                    palette: 2,
                    matrix: (0..n)
                        .flat_map(|i| (0..n).map(move |j| if i <= j { BLACK } else { WHITE }))
                        .collect(),
                }],
            }
        }
        GeneratorKind::PlantedBlocks { k, noise } => {
            if k == 0 || sizes.iter().any(|&n| n < k) {
                return Err(Error::validation(format!("planted blocks need 1 <= k <= part size, got k = {k}")));
            }
            if !(0.0..=1.0).contains(&noise) {
                return Err(Error::validation(format!("noise rate {noise} outside [0, 1]")));
            }
            let class = |n: usize, v: usize| v * k / n;
            let pairs = pairs_of(r)
                .map(|(i, j)| {
                    let block: Vec<bool> = (0..k * k).map(|_| rng.gen()).collect();
                    let matrix = (0..sizes[i] * sizes[j])
                        .map(|pos| {
                            let (u, v) = (pos / sizes[j], pos % sizes[j]);
                            let base = block[class(sizes[i], u) * k + class(sizes[j], v)];
                            let flip = noise > 0.0 && rng.gen_bool(noise);
                            ColorId((base ^ flip) as u32)
                        })
                        .collect();
                    PairColoring { i, j, palette: 2, matrix }
                })
                .collect();
            RawGraph {
                part_sizes: sizes.clone(),
                bounds: (1, 2),
                vertex_colors: sizes.iter().map(|&n| vec![ColorId(0); n]).collect(),
                vertex_palettes: vec![1; r],
                pairs,
            }
        }
    };
    ColoredGraph::new(raw)
}

fn uniform<R: Rng>(sizes: &[usize], b1: usize, b2: usize, rng: &mut R) -> RawGraph {
    let r = sizes.len();
    let vertex_colors = sizes
        .iter()
        .map(|&n| (0..n).map(|_| ColorId(rng.gen_range(0..b1) as u32)).collect())
        .collect();
    let pairs = pairs_of(r)
        .map(|(i, j)| PairColoring {
            i,
            j,
            palette: b2,
            matrix: (0..sizes[i] * sizes[j]).map(|_| ColorId(rng.gen_range(0..b2) as u32)).collect(),
        })
        .collect();
    RawGraph { part_sizes: sizes.to_vec(), bounds: (b1, b2), vertex_colors, vertex_palettes: vec![b1; r], pairs }
}

/// Class of vertex `v` in a planted-blocks part of size `n` with `k` classes.
pub fn planted_class(n: usize, k: usize, v: usize) -> usize {
    v * k / n
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_graph_two() {
        let g = generate(&GeneratorSpec::half_graph(2)).unwrap();
        assert_eq!(g.pairs()[0].matrix, vec![BLACK, BLACK, WHITE, BLACK]);
        assert_eq!(g.bounds(), (1, 2));
    }

    #[test]
    fn monochromatic_is_single_colored() {
        let g = generate(&GeneratorSpec::monochromatic(&[3, 3])).unwrap();
        assert_eq!(g.bounds(), (1, 1));
        assert!(g.pairs()[0].matrix.iter().all(|&c| c == ColorId(0)));
    }

    #[test]
    fn uniform_random_is_deterministic() {
        let s = GeneratorSpec::uniform_random(2, 3, &[4, 5, 6], 11);
        assert_eq!(generate(&s).unwrap(), generate(&s).unwrap());
        let other = GeneratorSpec { seed: 12, ..s.clone() };
        assert_ne!(generate(&s).unwrap(), generate(&other).unwrap());
    }

    #[test]
    fn planted_blocks_without_noise_are_block_constant() {
        let g = generate(&GeneratorSpec::planted_blocks(3, 0.0, &[9, 6], 5)).unwrap();
        for u in 0..9 {
            for v in 0..6 {
                let w = (u / 3) * 3;
                let x = (v / 2) * 2;
                assert_eq!(g.edge_color(0, u, 1, v), g.edge_color(0, w, 1, x));
            }
        }
    }

    #[test]
    fn parse_forms() {
        assert_eq!(GeneratorSpec::parse("half:32", 0).unwrap(), GeneratorSpec::half_graph(32));
        assert_eq!(GeneratorSpec::parse("mono:3,4", 0).unwrap(), GeneratorSpec::monochromatic(&[3, 4]));
        assert_eq!(
            GeneratorSpec::parse("uniform:2,3:5,5", 9).unwrap(),
            GeneratorSpec::uniform_random(2, 3, &[5, 5], 9)
        );
        assert_eq!(
            GeneratorSpec::parse("planted:3,0.1:12,12", 4).unwrap(),
            GeneratorSpec::planted_blocks(3, 0.1, &[12, 12], 4)
        );
        assert!(GeneratorSpec::parse("ring:3", 0).is_err());
    }

    #[test]
    fn generated_graphs_validate() {
        for seed in 0..20 {
            for spec in [
                GeneratorSpec::uniform_random(1 + seed as usize % 3, 2, &[3, 4], seed),
                GeneratorSpec::planted_blocks(2, 0.2, &[4, 5, 6], seed),
                GeneratorSpec::half_graph(1 + seed as usize),
                GeneratorSpec::monochromatic(&[2, 3, 1]),
            ] {
                let g = generate(&spec).unwrap();
                assert!(crate::graph::validate_graph(&g.to_raw()).is_ok());
            }
        }
    }
}
