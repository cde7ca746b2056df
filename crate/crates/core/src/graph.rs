//! Colored r-partite graphs, complexes and partitionwise maps.
//!
//! Vertices are dense indices `0..|part|` inside each part. Colors are
//! interned ids into a per-part (vertex) or per-pair (edge) palette. The edge
//! colors between parts `i < j` are stored as one row-major matrix whose rows
//! are indexed by the vertices of part `i`.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ColorId(pub u32);

impl ColorId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for ColorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Number of unordered part pairs, `r choose 2`.
#[inline]
pub fn pair_count(r: usize) -> usize {
    r * r.saturating_sub(1) / 2
}

/// Position of the pair `{i, j}` (`i < j`) in lexicographic order.
#[inline]
pub fn pair_index(r: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < r);
    i * (2 * r - i - 1) / 2 + (j - i - 1)
}

/// All pairs `(i, j)` with `i < j < r`, in lexicographic order.
pub fn pairs_of(r: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..r).flat_map(move |i| (i + 1..r).map(move |j| (i, j)))
}

/// Edge coloring between parts `i < j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairColoring {
    pub i: usize,
    pub j: usize,
    pub palette: usize,
    /// Row-major `|part i| x |part j|` matrix.
    pub matrix: Vec<ColorId>,
}

/// Unvalidated components of a colored graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawGraph {
    pub part_sizes: Vec<usize>,
    pub bounds: (usize, usize),
    pub vertex_colors: Vec<Vec<ColorId>>,
    pub vertex_palettes: Vec<usize>,
    pub pairs: Vec<PairColoring>,
}

/// Checks every structural invariant of a colored graph and reports the
/// first violation with its location.
pub fn validate_graph(raw: &RawGraph) -> Result<()> {
    let r = raw.part_sizes.len();
    let (b1, b2) = raw.bounds;
    if r < 2 {
        return Err(Error::validation(format!("need at least 2 parts, got {r}")));
    }
    if let Some(i) = raw.part_sizes.iter().position(|&n| n == 0) {
        return Err(Error::validation(format!("part {i} is empty")));
    }
    if raw.vertex_colors.len() != r {
        return Err(Error::validation(format!(
            "vertex_colors has {} parts, expected {r}",
            raw.vertex_colors.len()
        )));
    }
    if raw.vertex_palettes.len() != r {
        return Err(Error::validation(format!(
            "vertex palette list has {} entries, expected {r}",
            raw.vertex_palettes.len()
        )));
    }
    for (i, (colors, &palette)) in raw.vertex_colors.iter().zip(&raw.vertex_palettes).enumerate() {
        if palette == 0 || palette > b1 {
            return Err(Error::validation(format!(
                "part {i}: vertex palette size {palette} outside 1..={b1} (palette overflow)"
            )));
        }
        if colors.len() != raw.part_sizes[i] {
            return Err(Error::validation(format!(
                "part {i}: {} vertex colors for {} vertices",
                colors.len(),
                raw.part_sizes[i]
            )));
        }
        if let Some((v, c)) = colors.iter().enumerate().find(|(_, c)| c.index() >= palette) {
            return Err(Error::validation(format!(
                "part {i} vertex {v}: color {c} outside palette of size {palette} (palette overflow)"
            )));
        }
    }
    let mut seen = vec![false; pair_count(r)];
    for p in &raw.pairs {
        if p.i >= p.j || p.j >= r {
            return Err(Error::validation(format!(
                "pair ({}, {}) is not an ordered pair of parts below {r}",
                p.i, p.j
            )));
        }
        let k = pair_index(r, p.i, p.j);
        if seen[k] {
            return Err(Error::validation(format!("pair ({}, {}) listed twice", p.i, p.j)));
        }
        seen[k] = true;
        if p.palette == 0 || p.palette > b2 {
            return Err(Error::validation(format!(
                "pair ({}, {}): palette size {} outside 1..={b2} (palette overflow)",
                p.i, p.j, p.palette
            )));
        }
        let expected = raw.part_sizes[p.i] * raw.part_sizes[p.j];
        if p.matrix.len() != expected {
            return Err(Error::validation(format!(
                "pair ({}, {}): matrix has {} entries, expected {expected}",
                p.i,
                p.j,
                p.matrix.len()
            )));
        }
        if let Some((pos, c)) = p.matrix.iter().enumerate().find(|(_, c)| c.index() >= p.palette) {
            let nj = raw.part_sizes[p.j];
            return Err(Error::validation(format!(
                "pair ({}, {}) entry ({}, {}): color {c} outside palette of size {} (palette overflow)",
                p.i,
                p.j,
                pos / nj,
                pos % nj,
                p.palette
            )));
        }
    }
    if let Some(k) = seen.iter().position(|s| !s) {
        let (i, j) = pairs_of(r).nth(k).expect("pair index in range");
        return Err(Error::validation(format!("missing pair ({i}, {j})")));
    }
    Ok(())
}

/// A `(b1, b2)`-colored r-partite graph. Immutable once built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColoredGraph {
    part_sizes: Vec<usize>,
    bounds: (usize, usize),
    vertex_colors: Vec<Vec<ColorId>>,
    vertex_palettes: Vec<usize>,
    /// Indexed by [`pair_index`].
    pairs: Vec<PairColoring>,
}

impl TryFrom<RawGraph> for ColoredGraph {
    type Error = Error;

    fn try_from(mut raw: RawGraph) -> Result<Self> {
        validate_graph(&raw)?;
        let r = raw.part_sizes.len();
        raw.pairs.sort_by_key(|p| pair_index(r, p.i, p.j));
        Ok(ColoredGraph {
            part_sizes: raw.part_sizes,
            bounds: raw.bounds,
            vertex_colors: raw.vertex_colors,
            vertex_palettes: raw.vertex_palettes,
            pairs: raw.pairs,
        })
    }
}

impl ColoredGraph {
    pub fn new(raw: RawGraph) -> Result<Self> {
        Self::try_from(raw)
    }

    pub fn to_raw(&self) -> RawGraph {
        RawGraph {
            part_sizes: self.part_sizes.clone(),
            bounds: self.bounds,
            vertex_colors: self.vertex_colors.clone(),
            vertex_palettes: self.vertex_palettes.clone(),
            pairs: self.pairs.clone(),
        }
    }

    #[inline]
    pub fn r(&self) -> usize {
        self.part_sizes.len()
    }

    #[inline]
    pub fn part_sizes(&self) -> &[usize] {
        &self.part_sizes
    }

    #[inline]
    pub fn part_size(&self, part: usize) -> usize {
        self.part_sizes[part]
    }

    /// The declared `(b1, b2)` palette bounds.
    pub fn bounds(&self) -> (usize, usize) {
        self.bounds
    }

    #[inline]
    pub fn vertex_color(&self, part: usize, v: usize) -> ColorId {
        self.vertex_colors[part][v]
    }

    pub fn vertex_colors(&self, part: usize) -> &[ColorId] {
        &self.vertex_colors[part]
    }

    /// `|C_i|` for the part `part`.
    pub fn vertex_palette(&self, part: usize) -> usize {
        self.vertex_palettes[part]
    }

    pub fn vertex_palettes(&self) -> &[usize] {
        &self.vertex_palettes
    }

    /// `|C_I|` for `I = {i, j}` (either order).
    pub fn edge_palette(&self, i: usize, j: usize) -> usize {
        self.pair(i, j).palette
    }

    pub fn pair(&self, i: usize, j: usize) -> &PairColoring {
        let (lo, hi) = if i < j { (i, j) } else { (j, i) };
        &self.pairs[pair_index(self.r(), lo, hi)]
    }

    pub fn pairs(&self) -> &[PairColoring] {
        &self.pairs
    }

    /// Color of the edge between vertex `vi` of part `i` and vertex `vj` of
    /// part `j`; the parts may be given in either order.
    #[inline]
    pub fn edge_color(&self, i: usize, vi: usize, j: usize, vj: usize) -> ColorId {
        if i < j {
            let p = &self.pairs[pair_index(self.r(), i, j)];
            p.matrix[vi * self.part_sizes[j] + vj]
        } else {
            let p = &self.pairs[pair_index(self.r(), j, i)];
            p.matrix[vj * self.part_sizes[i] + vi]
        }
    }

    /// Total color of a vertex or an edge.
    pub fn total_color(&self, loc: Locator) -> Result<TotalColor> {
        match loc {
            Locator::Vertex { part, index } => {
                self.check_vertex(part, index)?;
                Ok(TotalColor::Vertex { part, color: self.vertex_color(part, index) })
            }
            Locator::Edge { a, b } => {
                self.check_vertex(a.0, a.1)?;
                self.check_vertex(b.0, b.1)?;
                if a.0 == b.0 {
                    return Err(Error::validation(format!(
                        "edge endpoints both lie in part {}",
                        a.0
                    )));
                }
                let ((i, vi), (j, vj)) = if a.0 < b.0 { (a, b) } else { (b, a) };
                Ok(TotalColor::Pair {
                    i,
                    j,
                    color: self.edge_color(i, vi, j, vj),
                    frame: (self.vertex_color(i, vi), self.vertex_color(j, vj)),
                })
            }
        }
    }

    fn check_vertex(&self, part: usize, index: usize) -> Result<()> {
        if part >= self.r() || index >= self.part_sizes[part] {
            return Err(Error::validation(format!("invalid vertex locator ({part}, {index})")));
        }
        Ok(())
    }

    /// Total number of edges `|Omega_i| * |Omega_j|` between two parts.
    pub fn edge_count(&self, i: usize, j: usize) -> usize {
        self.part_sizes[i] * self.part_sizes[j]
    }
}

/// Addresses a vertex, or an edge by its two endpoints `(part, index)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Locator {
    Vertex { part: usize, index: usize },
    Edge { a: (usize, usize), b: (usize, usize) },
}

/// Total color of a vertex (its color) or of an edge (edge color plus the
/// endpoint colors ordered by ascending part index).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TotalColor {
    Vertex { part: usize, color: ColorId },
    Pair { i: usize, j: usize, color: ColorId, frame: (ColorId, ColorId) },
}

impl TotalColor {
    pub fn is_vertex(&self) -> bool {
        matches!(self, TotalColor::Vertex { .. })
    }
}

impl fmt::Display for TotalColor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TotalColor::Vertex { part, color } => write!(f, "v{part}:{color}"),
            TotalColor::Pair { i, j, color, frame } => {
                write!(f, "e{i}{j}:({color};{},{})", frame.0, frame.1)
            }
        }
    }
}

/// A vertex `(part, slot)` of a template.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Slot {
    pub part: usize,
    pub slot: usize,
}

impl Slot {
    pub fn new(part: usize, slot: usize) -> Self {
        Slot { part, slot }
    }
}

/// A visible template edge between `a` (lower part) and `b` (higher part).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TemplateEdge {
    pub a: Slot,
    pub b: Slot,
    pub color: ColorId,
}

/// A template with `h` vertices per part; `None` marks the invisible color.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Complex {
    r: usize,
    h: usize,
    /// `[part][slot]`
    vertices: Vec<Vec<Option<ColorId>>>,
    /// `[pair_index][slot_i * h + slot_j]`
    edges: Vec<Vec<Option<ColorId>>>,
}

impl Complex {
    /// The complex with every vertex and edge invisible.
    pub fn invisible(r: usize, h: usize) -> Self {
        Complex {
            r,
            h,
            vertices: vec![vec![None; h]; r],
            edges: vec![vec![None; h * h]; pair_count(r)],
        }
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn h(&self) -> usize {
        self.h
    }

    pub fn set_vertex(&mut self, v: Slot, color: Option<ColorId>) -> &mut Self {
        self.vertices[v.part][v.slot] = color;
        self
    }

    /// Sets the color of the edge between two slots of different parts.
    pub fn set_edge(&mut self, a: Slot, b: Slot, color: Option<ColorId>) -> &mut Self {
        assert_ne!(a.part, b.part, "template edge inside one part");
        let (lo, hi) = if a.part < b.part { (a, b) } else { (b, a) };
        let k = pair_index(self.r, lo.part, hi.part);
        self.edges[k][lo.slot * self.h + hi.slot] = color;
        self
    }

    pub fn with_vertex(mut self, v: Slot, color: ColorId) -> Self {
        self.set_vertex(v, Some(color));
        self
    }

    pub fn with_edge(mut self, a: Slot, b: Slot, color: ColorId) -> Self {
        self.set_edge(a, b, Some(color));
        self
    }

    pub fn vertex(&self, v: Slot) -> Option<ColorId> {
        self.vertices[v.part][v.slot]
    }

    pub fn edge(&self, a: Slot, b: Slot) -> Option<ColorId> {
        let (lo, hi) = if a.part < b.part { (a, b) } else { (b, a) };
        self.edges[pair_index(self.r, lo.part, hi.part)][lo.slot * self.h + hi.slot]
    }

    /// Visible vertices with their colors, `V_1(S)`.
    pub fn visible_vertices(&self) -> Vec<(Slot, ColorId)> {
        let mut out = Vec::new();
        for (part, slots) in self.vertices.iter().enumerate() {
            for (slot, c) in slots.iter().enumerate() {
                if let Some(c) = c {
                    out.push((Slot::new(part, slot), *c));
                }
            }
        }
        out
    }

    /// Visible pair edges, `V_2(S)`, in (pair, slot_i, slot_j) order.
    pub fn visible_edges(&self) -> Vec<TemplateEdge> {
        let mut out = Vec::new();
        for (k, (i, j)) in pairs_of(self.r).enumerate() {
            for (pos, c) in self.edges[k].iter().enumerate() {
                if let Some(c) = c {
                    out.push(TemplateEdge {
                        a: Slot::new(i, pos / self.h),
                        b: Slot::new(j, pos % self.h),
                        color: *c,
                    });
                }
            }
        }
        out
    }

    /// Copy of `self` with only the listed pair edges kept visible.
    pub fn restrict_edges(&self, keep: &[TemplateEdge]) -> Complex {
        let mut out = self.clone();
        for e in out.edges.iter_mut() {
            e.iter_mut().for_each(|c| *c = None);
        }
        for e in keep {
            out.set_edge(e.a, e.b, Some(e.color));
        }
        out
    }
}

/// Checks the downward closure of invisibility and that every visible color
/// names a palette color of `g`.
pub fn validate_complex(s: &Complex, g: &ColoredGraph) -> Result<()> {
    if s.r != g.r() {
        return Err(Error::validation(format!(
            "complex has {} parts, graph has {}",
            s.r,
            g.r()
        )));
    }
    if s.h == 0 {
        return Err(Error::validation("complex needs h >= 1"));
    }
    for (v, c) in s.visible_vertices() {
        if c.index() >= g.vertex_palette(v.part) {
            return Err(Error::validation(format!(
                "complex vertex ({}, {}): unknown color {c} (palette size {})",
                v.part,
                v.slot,
                g.vertex_palette(v.part)
            )));
        }
    }
    for e in s.visible_edges() {
        for end in [e.a, e.b] {
            if s.vertex(end).is_none() {
                return Err(Error::validation(format!(
                    "closure violation: edge ({},{})-({},{}) is visible but vertex ({}, {}) is invisible",
                    e.a.part, e.a.slot, e.b.part, e.b.slot, end.part, end.slot
                )));
            }
        }
        let palette = g.edge_palette(e.a.part, e.b.part);
        if e.color.index() >= palette {
            return Err(Error::validation(format!(
                "complex edge ({},{})-({},{}): unknown color {} (palette size {palette})",
                e.a.part, e.a.slot, e.b.part, e.b.slot, e.color
            )));
        }
    }
    Ok(())
}

/// Index-preserving assignment of template slots to graph vertices:
/// `targets[part][slot]` is a vertex of that part.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct PartitionwiseMap {
    targets: Vec<Vec<usize>>,
}

impl PartitionwiseMap {
    pub fn new(targets: Vec<Vec<usize>>) -> Self {
        PartitionwiseMap { targets }
    }

    /// The map with no slots on `r` parts.
    pub fn empty(r: usize) -> Self {
        PartitionwiseMap { targets: vec![Vec::new(); r] }
    }

    pub fn parts(&self) -> &[Vec<usize>] {
        &self.targets
    }

    pub fn part(&self, part: usize) -> &[usize] {
        &self.targets[part]
    }

    #[inline]
    pub fn get(&self, v: Slot) -> usize {
        self.targets[v.part][v.slot]
    }

    pub fn counts(&self) -> Vec<usize> {
        self.targets.iter().map(Vec::len).collect()
    }

    /// The common per-part count, if every part has the same number of slots.
    pub fn uniform_count(&self) -> Option<usize> {
        let first = self.targets.first().map_or(0, Vec::len);
        self.targets.iter().all(|t| t.len() == first).then_some(first)
    }

    pub fn is_empty(&self) -> bool {
        self.targets.iter().all(Vec::is_empty)
    }

    /// Checks that the map fits the given part sizes.
    pub fn check_against(&self, part_sizes: &[usize]) -> Result<()> {
        if self.targets.len() != part_sizes.len() {
            return Err(Error::validation(format!(
                "map covers {} parts, graph has {}",
                self.targets.len(),
                part_sizes.len()
            )));
        }
        for (i, (t, &n)) in self.targets.iter().zip(part_sizes).enumerate() {
            if let Some(&bad) = t.iter().find(|&&v| v >= n) {
                return Err(Error::validation(format!(
                    "map sends a slot of part {i} to vertex {bad}, part has {n} vertices"
                )));
            }
        }
        Ok(())
    }

    /// Concatenates the slot lists part by part (`self` first).
    pub fn compose(&self, other: &PartitionwiseMap) -> Result<PartitionwiseMap> {
        if self.targets.is_empty() {
            return Ok(other.clone());
        }
        if other.targets.is_empty() {
            return Ok(self.clone());
        }
        if self.targets.len() != other.targets.len() {
            return Err(Error::validation(format!(
                "cannot compose maps over {} and {} parts",
                self.targets.len(),
                other.targets.len()
            )));
        }
        Ok(PartitionwiseMap {
            targets: self
                .targets
                .iter()
                .zip(&other.targets)
                .map(|(a, b)| a.iter().chain(b).copied().collect())
                .collect(),
        })
    }
}

/// Draws every slot independently and uniformly from its part.
pub fn random_partitionwise_map<R: Rng + ?Sized>(
    part_sizes: &[usize],
    counts: &[usize],
    rng: &mut R,
) -> Result<PartitionwiseMap> {
    if part_sizes.len() != counts.len() {
        return Err(Error::validation("part_sizes and counts differ in length"));
    }
    let mut targets = Vec::with_capacity(counts.len());
    for (i, (&n, &c)) in part_sizes.iter().zip(counts).enumerate() {
        if n == 0 && c > 0 {
            return Err(Error::validation(format!("cannot sample {c} vertices from empty part {i}")));
        }
        targets.push((0..c).map(|_| rng.gen_range(0..n)).collect());
    }
    Ok(PartitionwiseMap { targets })
}

/// `prod_i |Omega_i|^counts_i` as u128, `None` on overflow.
pub fn map_space_size(part_sizes: &[usize], counts: &[usize]) -> Option<u128> {
    let mut total: u128 = 1;
    for (&n, &c) in part_sizes.iter().zip(counts) {
        for _ in 0..c {
            total = total.checked_mul(n as u128)?;
        }
    }
    Some(total)
}

pub(crate) fn check_work(needed: Option<u128>, cap: u64) -> Result<u64> {
    match needed {
        Some(n) if n <= cap as u128 => Ok(n as u64),
        Some(n) => Err(Error::WorkCapExceeded { needed: n.to_string(), cap }),
        None => Err(Error::WorkCapExceeded { needed: "> 2^128".into(), cap }),
    }
}

/// Every partitionwise map with the given slot counts, each exactly once.
pub fn enumerate_maps(part_sizes: &[usize], counts: &[usize], cap: u64) -> Result<MapEnumerator> {
    if part_sizes.len() != counts.len() {
        return Err(Error::validation("part_sizes and counts differ in length"));
    }
    let total = check_work(map_space_size(part_sizes, counts), cap)?;
    let bases: Vec<usize> = part_sizes
        .iter()
        .zip(counts)
        .flat_map(|(&n, &c)| std::iter::repeat_n(n, c))
        .collect();
    Ok(MapEnumerator {
        counts: counts.to_vec(),
        digits: vec![0; bases.len()],
        bases,
        remaining: total,
    })
}

/// The `index`-th map in the order of [`enumerate_maps`] (last slot of the
/// last part varies fastest).
pub(crate) fn map_at_index(part_sizes: &[usize], counts: &[usize], mut index: u64) -> PartitionwiseMap {
    let mut targets: Vec<Vec<usize>> = counts.iter().map(|&c| vec![0; c]).collect();
    for (part, slots) in targets.iter_mut().enumerate().rev() {
        let n = part_sizes[part] as u64;
        for t in slots.iter_mut().rev() {
            *t = (index % n) as usize;
            index /= n;
        }
    }
    PartitionwiseMap { targets }
}

/// Odometer over all partitionwise maps; see [`enumerate_maps`].
#[derive(Debug, Clone)]
pub struct MapEnumerator {
    counts: Vec<usize>,
    bases: Vec<usize>,
    digits: Vec<usize>,
    remaining: u64,
}

impl MapEnumerator {
    /// Number of maps not yet yielded.
    pub fn remaining(&self) -> u64 {
        self.remaining
    }

    fn current(&self) -> PartitionwiseMap {
        let mut it = self.digits.iter().copied();
        PartitionwiseMap {
            targets: self.counts.iter().map(|&c| it.by_ref().take(c).collect()).collect(),
        }
    }

    fn advance(&mut self) {
        for (d, &b) in self.digits.iter_mut().zip(&self.bases).rev() {
            *d += 1;
            if *d < b {
                return;
            }
            *d = 0;
        }
    }
}

impl Iterator for MapEnumerator {
    type Item = PartitionwiseMap;

    fn next(&mut self) -> Option<PartitionwiseMap> {
        if self.remaining == 0 {
            return None;
        }
        let out = self.current();
        self.remaining -= 1;
        self.advance();
        Some(out)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = usize::try_from(self.remaining).unwrap_or(usize::MAX);
        (n, Some(n))
    }
}
