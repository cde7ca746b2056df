//! JSON graph documents.
//!
//! A document looks like
//!
//! ```json
//! {"r":2,"parts":[2,2],"b":[1,2],"vertex_colors":[[0,0],[0,0]],
//!  "pairs":[{"i":0,"j":1,"palette":2,"matrix":[0,0,0,1]}]}
//! ```
//!
//! Matrices are row-major with rows indexed by part `i`. Readers reject
//! unknown fields and pairs that are not listed in strictly increasing
//! `(i, j)` order with `i < j`. Writers produce compact output with a
//! trailing newline, so re-serializing a canonical document reproduces it
//! byte for byte. The vertex palette of a part is taken to be one more than
//! the largest color id used in it.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{ColorId, ColoredGraph, PairColoring, RawGraph};
use crate::regularize::SignaturePalette;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphDoc {
    r: usize,
    parts: Vec<usize>,
    b: [usize; 2],
    vertex_colors: Vec<Vec<u32>>,
    pairs: Vec<PairDoc>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PairDoc {
    i: usize,
    j: usize,
    palette: usize,
    matrix: Vec<u32>,
}

fn to_doc(g: &ColoredGraph) -> GraphDoc {
    let (b1, b2) = g.bounds();
    GraphDoc {
        r: g.r(),
        parts: g.part_sizes().to_vec(),
        b: [b1, b2],
        vertex_colors: (0..g.r()).map(|p| g.vertex_colors(p).iter().map(|c| c.0).collect()).collect(),
        pairs: g
            .pairs()
            .iter()
            .map(|pc| PairDoc { i: pc.i, j: pc.j, palette: pc.palette, matrix: pc.matrix.iter().map(|c| c.0).collect() })
            .collect(),
    }
}

fn from_doc(doc: GraphDoc) -> Result<ColoredGraph> {
    if doc.r != doc.parts.len() {
        return Err(Error::validation(format!("r = {} but {} part sizes given", doc.r, doc.parts.len())));
    }
    let mut last: Option<(usize, usize)> = None;
    for p in &doc.pairs {
        if p.i >= p.j {
            return Err(Error::validation(format!("pair ({}, {}) is not in canonical order i < j", p.i, p.j)));
        }
        if last.is_some_and(|l| l >= (p.i, p.j)) {
            return Err(Error::validation(format!("pair ({}, {}) is out of order or repeated", p.i, p.j)));
        }
        last = Some((p.i, p.j));
    }
    let vertex_palettes = doc
        .vertex_colors
        .iter()
        .map(|cs| cs.iter().max().map_or(1, |&m| m as usize + 1))
        .collect();
    let raw = RawGraph {
        part_sizes: doc.parts,
        bounds: (doc.b[0], doc.b[1]),
        vertex_colors: doc.vertex_colors.into_iter().map(|cs| cs.into_iter().map(ColorId).collect()).collect(),
        vertex_palettes,
        pairs: doc
            .pairs
            .into_iter()
            .map(|p| PairColoring { i: p.i, j: p.j, palette: p.palette, matrix: p.matrix.into_iter().map(ColorId).collect() })
            .collect(),
    };
    ColoredGraph::new(raw)
}

/// Canonical JSON text of `g`.
pub fn graph_to_json(g: &ColoredGraph) -> String {
    let mut s = serde_json::to_string(&to_doc(g)).expect("plain data serializes");
    s.push('\n');
    s
}

pub fn graph_from_json(text: &str) -> Result<ColoredGraph> {
    from_doc(serde_json::from_str(text)?)
}

pub fn read_graph(path: impl AsRef<Path>) -> Result<ColoredGraph> {
    graph_from_json(&fs::read_to_string(path)?)
}

pub fn write_graph(path: impl AsRef<Path>, g: &ColoredGraph) -> Result<()> {
    fs::write(path, graph_to_json(g))?;
    Ok(())
}

#[derive(Debug, Serialize)]
struct SidecarEntry {
    color: u32,
    original: u32,
    adjacency: Vec<u32>,
}

/// Audit document mapping every new vertex color of every part to the
/// signature it stands for: `{"parts": [[{"color", "original", "adjacency"}]]}`.
pub fn signature_sidecar(palettes: &[SignaturePalette]) -> String {
    #[derive(Serialize)]
    struct Sidecar {
        parts: Vec<Vec<SidecarEntry>>,
    }
    let doc = Sidecar {
        parts: palettes
            .iter()
            .map(|p| {
                p.signatures
                    .iter()
                    .enumerate()
                    .map(|(k, s)| SidecarEntry {
                        color: k as u32,
                        original: s.original.0,
                        adjacency: s.adjacency.iter().map(|c| c.0).collect(),
                    })
                    .collect()
            })
            .collect(),
    };
    let mut s = serde_json::to_string(&doc).expect("plain data serializes");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{generate, GeneratorSpec};
    use crate::graph::fixtures::*;
    use crate::graph::PartitionwiseMap;
    use crate::regularize::regularize_with_palettes;

    const FOUR: &str =
        "{\"r\":2,\"parts\":[2,2],\"b\":[1,2],\"vertex_colors\":[[0,0],[0,0]],\"pairs\":[{\"i\":0,\"j\":1,\"palette\":2,\"matrix\":[0,0,0,1]}]}\n";

    #[test]
    fn four_vertex_round_trips_byte_identically() {
        assert_eq!(graph_to_json(&four_vertex()), FOUR);
        let g = graph_from_json(FOUR).unwrap();
        assert_eq!(g, four_vertex());
        assert_eq!(graph_to_json(&g), FOUR);
    }

    #[test]
    fn generated_graphs_round_trip() {
        for spec in [
            GeneratorSpec::uniform_random(3, 4, &[5, 6, 7], 1),
            GeneratorSpec::half_graph(6),
            GeneratorSpec::planted_blocks(2, 0.2, &[4, 4, 4, 4], 9),
        ] {
            let g = generate(&spec).unwrap();
            let text = graph_to_json(&g);
            let back = graph_from_json(&text).unwrap();
            assert_eq!(graph_to_json(&back), text);
        }
    }

    #[test]
    fn unknown_field_is_named() {
        let text = FOUR.replace("\"r\":2,", "\"r\":2,\"weight\":1,");
        let err = graph_from_json(&text).unwrap_err().to_string();
        assert!(err.contains("weight"), "{err}");
        let text = FOUR.replace("\"palette\":2,", "\"palette\":2,\"label\":\"x\",");
        assert!(graph_from_json(&text).unwrap_err().to_string().contains("label"));
    }

    #[test]
    fn non_canonical_pairs_are_rejected() {
        let swapped = FOUR.replace("\"i\":0,\"j\":1", "\"i\":1,\"j\":0");
        assert!(graph_from_json(&swapped).unwrap_err().to_string().contains("canonical order"));

        let g = generate(&GeneratorSpec::uniform_random(1, 2, &[2, 2, 2], 3)).unwrap();
        let text = graph_to_json(&g);
        let mut doc: serde_json::Value = serde_json::from_str(&text).unwrap();
        doc["pairs"].as_array_mut().unwrap().swap(0, 1);
        let err = graph_from_json(&doc.to_string()).unwrap_err().to_string();
        assert!(err.contains("out of order"), "{err}");
    }

    #[test]
    fn structural_errors_surface() {
        let text = FOUR.replace("\"r\":2", "\"r\":3");
        assert!(graph_from_json(&text).is_err());
        let text = FOUR.replace("[0,0,0,1]", "[0,0,0]");
        assert!(graph_from_json(&text).is_err());
        assert!(graph_from_json("{").is_err());
    }

    #[test]
    fn sidecar_lists_signatures() {
        let phi = PartitionwiseMap::new(vec![vec![1], vec![1]]);
        let (_, palettes) = regularize_with_palettes(&four_vertex(), &phi).unwrap();
        let v: serde_json::Value = serde_json::from_str(&signature_sidecar(&palettes)).unwrap();
        assert_eq!(v["parts"][0].as_array().unwrap().len(), 2);
        assert_eq!(v["parts"][0][1]["adjacency"], serde_json::json!([1]));
        assert_eq!(v["parts"][0][0]["adjacency"], serde_json::json!([0]));
    }
}
