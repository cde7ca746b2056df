//! Recoloring of vertices by adjacency signatures.
//!
//! The new color of a vertex `v` in part `i` is the tuple made of its
//! original color followed by the colors of the edges from `v` to every
//! sampled vertex of every other part (parts ascending, slots ascending).
//! Distinct tuples are interned into fresh color ids in first-occurrence
//! order, scanning each part from vertex 0 upwards. Edge colors are left
//! untouched.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{ColorId, ColoredGraph, PartitionwiseMap, RawGraph};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Signature {
    pub original: ColorId,
    pub adjacency: Vec<ColorId>,
}

/// Signature of vertex `v` of part `part` against the samples in `phi`.
pub fn signature(g: &ColoredGraph, part: usize, v: usize, phi: &PartitionwiseMap) -> Result<Signature> {
    phi.check_against(g.part_sizes())?;
    if part >= g.r() || v >= g.part_size(part) {
        return Err(Error::validation(format!("invalid vertex locator ({part}, {v})")));
    }
    let mut adjacency = Vec::new();
    push_adjacency(g, part, v, phi, &mut adjacency);
    Ok(Signature { original: g.vertex_color(part, v), adjacency })
}

#[inline]
fn push_adjacency(g: &ColoredGraph, part: usize, v: usize, phi: &PartitionwiseMap, out: &mut Vec<ColorId>) {
    for (j, sampled) in phi.parts().iter().enumerate() {
        if j == part {
            continue;
        }
        out.extend(sampled.iter().map(|&u| g.edge_color(part, v, j, u)));
    }
}

/// Class ids of the vertices of one part after regularization, together
/// with the distinct signatures in id order.
#[derive(Debug, Clone)]
pub struct SignaturePalette {
    pub classes: Vec<u32>,
    pub signatures: Vec<Signature>,
}

impl SignaturePalette {
    pub fn len(&self) -> usize {
        self.signatures.len()
    }

    pub fn is_empty(&self) -> bool {
        self.signatures.is_empty()
    }
}

/// Interns the signatures of one part. Only the class ids are computed;
/// callers that do not need the signatures themselves avoid the clones.
pub(crate) fn part_classes(g: &ColoredGraph, part: usize, phi: &PartitionwiseMap) -> (Vec<u32>, usize) {
    let n = g.part_size(part);
    let width = 1 + phi.parts().iter().enumerate().filter(|(j, _)| *j != part).map(|(_, s)| s.len()).sum::<usize>();
    if width == 1 {
        let classes = intern_small(g.vertex_colors(part));
        let count = classes.iter().map(|&c| c as usize + 1).max().unwrap_or(0);
        return (classes, count);
    }
    let mut keys: HashMap<Vec<ColorId>, u32> = HashMap::with_capacity(n);
    let mut classes = Vec::with_capacity(n);
    let mut buf = Vec::with_capacity(width);
    for v in 0..n {
        buf.clear();
        buf.push(g.vertex_color(part, v));
        push_adjacency(g, part, v, phi, &mut buf);
        let next = keys.len() as u32;
        let id = *keys.entry(buf.clone()).or_insert(next);
        classes.push(id);
    }
    (classes, keys.len())
}

fn intern_small(colors: &[ColorId]) -> Vec<u32> {
    let mut map: HashMap<ColorId, u32> = HashMap::new();
    colors
        .iter()
        .map(|c| {
            let next = map.len() as u32;
            *map.entry(*c).or_insert(next)
        })
        .collect()
}

fn palette_of_part(g: &ColoredGraph, part: usize, phi: &PartitionwiseMap) -> SignaturePalette {
    let n = g.part_size(part);
    let mut keys: HashMap<Signature, u32> = HashMap::with_capacity(n);
    let mut signatures = Vec::new();
    let mut classes = Vec::with_capacity(n);
    for v in 0..n {
        let mut adjacency = Vec::new();
        push_adjacency(g, part, v, phi, &mut adjacency);
        let sig = Signature { original: g.vertex_color(part, v), adjacency };
        let id = match keys.get(&sig) {
            Some(&id) => id,
            None => {
                let id = signatures.len() as u32;
                keys.insert(sig.clone(), id);
                signatures.push(sig);
                id
            }
        };
        classes.push(id);
    }
    SignaturePalette { classes, signatures }
}

fn check_phi(g: &ColoredGraph, phi: &PartitionwiseMap) -> Result<usize> {
    phi.check_against(g.part_sizes())?;
    phi.uniform_count().ok_or_else(|| {
        Error::validation(format!("unequal per-part sample counts {:?}", phi.counts()))
    })
}

/// Regularization of `g` by `phi`; also returns the signature palettes.
pub fn regularize_with_palettes(
    g: &ColoredGraph,
    phi: &PartitionwiseMap,
) -> Result<(ColoredGraph, Vec<SignaturePalette>)> {
    check_phi(g, phi)?;
    let palettes: Vec<SignaturePalette> =
        (0..g.r()).into_par_iter().map(|part| palette_of_part(g, part, phi)).collect();
    let raw = RawGraph {
        part_sizes: g.part_sizes().to_vec(),
        bounds: (palettes.iter().map(SignaturePalette::len).max().unwrap_or(1), g.bounds().1),
        vertex_colors: palettes
            .iter()
            .map(|p| p.classes.iter().map(|&c| ColorId(c)).collect())
            .collect(),
        vertex_palettes: palettes.iter().map(SignaturePalette::len).collect(),
        pairs: g.pairs().to_vec(),
    };
    Ok((ColoredGraph::new(raw)?, palettes))
}

/// Regularization of `g` by `phi`: vertex colors become interned signatures,
/// edge colors and palettes are copied unchanged.
pub fn regularize(g: &ColoredGraph, phi: &PartitionwiseMap) -> Result<ColoredGraph> {
    check_phi(g, phi)?;
    let classes: Vec<(Vec<u32>, usize)> =
        (0..g.r()).into_par_iter().map(|part| part_classes(g, part, phi)).collect();
    let raw = RawGraph {
        part_sizes: g.part_sizes().to_vec(),
        bounds: (classes.iter().map(|c| c.1).max().unwrap_or(1), g.bounds().1),
        vertex_colors: classes
            .iter()
            .map(|(c, _)| c.iter().map(|&id| ColorId(id)).collect())
            .collect(),
        vertex_palettes: classes.iter().map(|c| c.1).collect(),
        pairs: g.pairs().to_vec(),
    };
    ColoredGraph::new(raw)
}

/// `b1 * b2^((r-1) m)`, the largest possible vertex palette after
/// regularizing a `(b1, b2)`-colored graph with `m` samples per part.
/// `None` when it does not fit in 128 bits.
pub fn vertex_palette_bound(b: (usize, usize), r: usize, m: usize) -> Option<u128> {
    let exp = u32::try_from((r - 1).checked_mul(m)?).ok()?;
    (b.1 as u128).checked_pow(exp)?.checked_mul(b.0 as u128)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::fixtures::*;
    use crate::graph::{enumerate_maps, random_partitionwise_map, PairColoring};
    use crate::rng;
    use proptest::prelude::*;

    fn sig(original: u32, adj: &[ColorId]) -> Signature {
        Signature { original: ColorId(original), adjacency: adj.to_vec() }
    }

    #[test]
    fn empty_sample_keeps_only_original_color() {
        let g = four_vertex();
        let phi = PartitionwiseMap::empty(2);
        assert_eq!(signature(&g, 0, 1, &phi).unwrap(), sig(0, &[]));
        let gs = regularize(&g, &phi).unwrap();
        assert_eq!(gs, g);
    }

    #[test]
    fn four_vertex_signatures() {
        let g = four_vertex();
        // phi samples x (part 1 vertex 0); part 0 sample is irrelevant for part 0 vertices
        let phi_x = PartitionwiseMap::new(vec![vec![0], vec![0]]);
        assert_eq!(signature(&g, 0, 0, &phi_x).unwrap(), sig(0, &[BLACK]));
        assert_eq!(signature(&g, 0, 1, &phi_x).unwrap(), sig(0, &[BLACK]));
        let phi_y = PartitionwiseMap::new(vec![vec![0], vec![1]]);
        assert_eq!(signature(&g, 0, 0, &phi_y).unwrap(), sig(0, &[BLACK]));
        assert_eq!(signature(&g, 0, 1, &phi_y).unwrap(), sig(0, &[WHITE]));

        let gx = regularize(&g, &phi_x).unwrap();
        assert_eq!(gx.vertex_palette(0), 1);
        let gy = regularize(&g, &phi_y).unwrap();
        assert_eq!(gy.vertex_palette(0), 2);
        assert_eq!(gy.vertex_colors(0), &[ColorId(0), ColorId(1)]);
    }

    #[test]
    fn unequal_counts_are_rejected() {
        let g = four_vertex();
        let phi = PartitionwiseMap::new(vec![vec![0], vec![]]);
        assert!(regularize(&g, &phi).is_err());
    }

    #[test]
    fn palette_bound_example() {
        assert_eq!(vertex_palette_bound((1, 2), 2, 3), Some(8));
        assert_eq!(vertex_palette_bound((3, 2), 3, 2), Some(48));
        assert_eq!(vertex_palette_bound((2, 2), 2, 200), None);
    }

    #[test]
    fn palette_bound_is_reached_on_a_rich_graph() {
        // part 0 has 8 vertices whose rows against part 1 are all 3-bit patterns
        let rows: Vec<ColorId> = (0..8u32)
            .flat_map(|v| (0..3).map(move |k| ColorId((v >> k) & 1)))
            .collect();
        let g = ColoredGraph::new(RawGraph {
            part_sizes: vec![8, 3],
            bounds: (1, 2),
            vertex_colors: vec![vec![ColorId(0); 8], vec![ColorId(0); 3]],
            vertex_palettes: vec![1, 1],
            pairs: vec![PairColoring { i: 0, j: 1, palette: 2, matrix: rows }],
        })
        .unwrap();
        let phi = PartitionwiseMap::new(vec![vec![0, 1, 2], vec![0, 1, 2]]);
        let (gs, pal) = regularize_with_palettes(&g, &phi).unwrap();
        assert_eq!(gs.vertex_palette(0), 8);
        assert_eq!(pal[0].signatures[0], sig(0, &[BLACK, BLACK, BLACK]));
    }

    #[test]
    fn composition_refines_each_operand_on_four_vertex_graph() {
        let g = four_vertex();
        let maps: Vec<_> = enumerate_maps(&[2, 2], &[1, 1], 100).unwrap().collect();
        for phi in &maps {
            for psi in &maps {
                let both = regularize(&g, &phi.compose(psi).unwrap()).unwrap();
                for operand in [phi, psi] {
                    let coarse = regularize(&g, operand).unwrap();
                    assert!(refines(&both, &coarse));
                }
            }
        }
    }

    fn refines(fine: &ColoredGraph, coarse: &ColoredGraph) -> bool {
        (0..fine.r()).all(|p| {
            let mut map = HashMap::new();
            fine.vertex_colors(p)
                .iter()
                .zip(coarse.vertex_colors(p))
                .all(|(f, c)| *map.entry(*f).or_insert(*c) == *c)
        })
    }

    fn random_graph(seed: u64, r: usize, n: usize, b: (usize, usize)) -> ColoredGraph {
        crate::generate::generate(&crate::generate::GeneratorSpec {
            kind: crate::generate::GeneratorKind::UniformRandom { b1: b.0, b2: b.1 },
            part_sizes: vec![n; r],
            seed,
        })
        .unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn regularization_invariants(seed in 0u64..10_000, r in 2usize..4, n in 1usize..7,
                                     m in 0usize..4, b1 in 1usize..3, b2 in 1usize..4) {
            let g = random_graph(seed, r, n, (b1, b2));
            let mut rng = rng::master(seed ^ 0xabc);
            let phi = random_partitionwise_map(g.part_sizes(), &vec![m; r], &mut rng).unwrap();
            let gs = regularize(&g, &phi).unwrap();
            prop_assert_eq!(gs.pairs(), g.pairs());
            let bound = vertex_palette_bound((b1, b2), r, m).unwrap();
            for p in 0..r {
                prop_assert!(gs.vertex_palette(p) as u128 <= bound);
            }
            prop_assert_eq!(&regularize(&g, &phi).unwrap(), &gs);
            // equal colors iff equal signatures
            for p in 0..r {
                for u in 0..n {
                    for v in 0..n {
                        let same_sig = signature(&g, p, u, &phi).unwrap() == signature(&g, p, v, &phi).unwrap();
                        prop_assert_eq!(same_sig, gs.vertex_color(p, u) == gs.vertex_color(p, v));
                    }
                }
            }
            let (gp, _) = regularize_with_palettes(&g, &phi).unwrap();
            prop_assert_eq!(gp, gs);
        }

        #[test]
        fn composition_refines(seed in 0u64..10_000, n in 1usize..6, m1 in 0usize..3, m2 in 0usize..3) {
            let g = random_graph(seed, 2, n, (2, 2));
            let mut rng = rng::master(seed);
            let phi = random_partitionwise_map(g.part_sizes(), &[m1, m1], &mut rng).unwrap();
            let psi = random_partitionwise_map(g.part_sizes(), &[m2, m2], &mut rng).unwrap();
            let both = regularize(&g, &phi.compose(&psi).unwrap()).unwrap();
            prop_assert!(refines(&both, &regularize(&g, &phi).unwrap()));
            prop_assert!(refines(&both, &regularize(&g, &psi).unwrap()));
            prop_assert!(refines(&both, &g));
        }
    }
}
