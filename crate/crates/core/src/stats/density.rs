//! Relative densities `d_G`.
//!
//! For a vertex color the density is the fraction of the part carrying it.
//! For a pair total color `(c; a, b)` it is the fraction of edges with frame
//! `(a, b)` that have color `c`. All counts are exact integers.

use std::collections::HashMap;

use rayon::prelude::*;

use crate::graph::{pairs_of, ColorId, ColoredGraph, TotalColor};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameStats {
    /// Number of edges with this frame.
    pub support: u64,
    /// Edge counts indexed by edge color.
    pub counts: Vec<u64>,
}

#[derive(Debug, Clone)]
pub struct PairDensities {
    pub i: usize,
    pub j: usize,
    pub palette: usize,
    pub total: u64,
    pub frames: HashMap<(ColorId, ColorId), FrameStats>,
}

impl PairDensities {
    /// Occurring total colors `TC_I`, sorted, with their edge counts.
    pub fn total_colors(&self) -> Vec<(TotalColor, u64)> {
        let mut out: Vec<_> = self
            .frames
            .iter()
            .flat_map(|(&frame, st)| {
                st.counts.iter().enumerate().filter(|(_, &n)| n > 0).map(move |(c, &n)| {
                    (TotalColor::Pair { i: self.i, j: self.j, color: ColorId(c as u32), frame }, n)
                })
            })
            .collect();
        out.sort();
        out
    }
}

#[derive(Debug, Clone)]
pub struct DensityTable {
    part_sizes: Vec<usize>,
    /// `[part][color]` vertex counts.
    vertex: Vec<Vec<u64>>,
    /// Indexed like the graph's pairs.
    pairs: Vec<PairDensities>,
}

/// Exact densities by enumerating every vertex and every edge.
pub fn density_table(g: &ColoredGraph) -> DensityTable {
    let vertex = (0..g.r())
        .map(|p| {
            let mut counts = vec![0u64; g.vertex_palette(p)];
            for c in g.vertex_colors(p) {
                counts[c.index()] += 1;
            }
            counts
        })
        .collect();
    let pairs = g
        .pairs()
        .par_iter()
        .map(|pc| {
            let (i, j) = (pc.i, pc.j);
            let nj = g.part_size(j);
            let mut frames: HashMap<(ColorId, ColorId), FrameStats> = HashMap::new();
            for (pos, &c) in pc.matrix.iter().enumerate() {
                let frame = (g.vertex_color(i, pos / nj), g.vertex_color(j, pos % nj));
                let st = frames
                    .entry(frame)
                    .or_insert_with(|| FrameStats { support: 0, counts: vec![0; pc.palette] });
                st.support += 1;
                st.counts[c.index()] += 1;
            }
            PairDensities { i, j, palette: pc.palette, total: pc.matrix.len() as u64, frames }
        })
        .collect();
    DensityTable { part_sizes: g.part_sizes().to_vec(), vertex, pairs }
}

impl DensityTable {
    pub fn r(&self) -> usize {
        self.part_sizes.len()
    }

    pub fn pairs(&self) -> &[PairDensities] {
        &self.pairs
    }

    pub fn pair(&self, i: usize, j: usize) -> &PairDensities {
        let (lo, hi) = if i < j { (i, j) } else { (j, i) };
        &self.pairs[crate::graph::pair_index(self.r(), lo, hi)]
    }

    pub fn vertex_count(&self, part: usize, color: ColorId) -> u64 {
        self.vertex[part].get(color.index()).copied().unwrap_or(0)
    }

    pub fn frame(&self, i: usize, j: usize, frame: (ColorId, ColorId)) -> Option<&FrameStats> {
        self.pair(i, j).frames.get(&frame)
    }

    /// Density as an exact ratio `(numerator, denominator)`; `None` when the
    /// conditioning frame has zero support.
    pub fn density_ratio(&self, tc: &TotalColor) -> Option<(u64, u64)> {
        match *tc {
            TotalColor::Vertex { part, color } => {
                Some((self.vertex_count(part, color), self.part_sizes[part] as u64))
            }
            TotalColor::Pair { i, j, color, frame } => {
                let st = self.frame(i, j, frame)?;
                Some((st.counts.get(color.index()).copied().unwrap_or(0), st.support))
            }
        }
    }

    /// `d_G(tc)`; `None` when the frame has zero support.
    pub fn density(&self, tc: &TotalColor) -> Option<f64> {
        self.density_ratio(tc).map(|(n, d)| n as f64 / d as f64)
    }

    /// `d_G(tc)`, with zero for colors whose frame never occurs.
    pub fn density_or_zero(&self, tc: &TotalColor) -> f64 {
        self.density(tc).unwrap_or(0.0)
    }

    /// Occurring vertex total colors with their counts.
    pub fn vertex_total_colors(&self) -> Vec<(TotalColor, u64)> {
        self.vertex
            .iter()
            .enumerate()
            .flat_map(|(part, counts)| {
                counts.iter().enumerate().filter(|(_, &n)| n > 0).map(move |(c, &n)| {
                    (TotalColor::Vertex { part, color: ColorId(c as u32) }, n)
                })
            })
            .collect()
    }

    /// Every occurring pair total color with its edge count.
    pub fn pair_total_colors(&self) -> Vec<(TotalColor, u64)> {
        self.pairs.iter().flat_map(PairDensities::total_colors).collect()
    }

    pub fn pair_indices(&self) -> impl Iterator<Item = (usize, usize)> {
        pairs_of(self.r())
    }

    /// Largest deviation from 1 among all conditional distributions.
    pub fn max_normalization_error(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (part, counts) in self.vertex.iter().enumerate() {
            let s: f64 = counts.iter().map(|&n| n as f64 / self.part_sizes[part] as f64).sum();
            worst = worst.max((s - 1.0).abs());
        }
        for p in &self.pairs {
            for st in p.frames.values() {
                let s: f64 = st.counts.iter().map(|&n| n as f64 / st.support as f64).sum();
                worst = worst.max((s - 1.0).abs());
            }
        }
        worst
    }
}
