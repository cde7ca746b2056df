//! One-shot randomized regularization of edge-colored r-partite graphs.
//!
//! Vertices of every part are recolored by their adjacency pattern towards a
//! random sample of vertices drawn from the other parts ([`regularize`]).
//! The quality of the resulting partition is measured through relative
//! densities, the mean-square deviation `eta`, the derived error function
//! `delta`, and induced-subcomplex counting probes ([`stats`]).
//!
//! The [`schedule`] module holds the exact constant ledger (sample sizes,
//! `epsilon_1`, `C`, `n_tilde`) in arbitrary precision, and [`oracle`]
//! contains brute-force checkers for the counting lemma, the mean-square
//! lemma, the refinement form of Cauchy-Schwarz and the energy increment
//! argument on instances small enough to enumerate exactly.
//!
//! ```
//! use regseed::generate::{generate, GeneratorSpec};
//! use regseed::graph::PartitionwiseMap;
//! use regseed::regularize::regularize;
//!
//! let g = generate(&GeneratorSpec::half_graph(8)).unwrap();
//! let phi = PartitionwiseMap::new(vec![vec![2], vec![5]]);
//! let gstar = regularize(&g, &phi).unwrap();
//! assert_eq!(gstar.part_sizes(), g.part_sizes());
//! assert_eq!(gstar.vertex_palette(0), 2);
//! ```

pub mod error;
pub mod experiment;
pub mod generate;
pub mod graph;
pub mod io;
pub mod oracle;
pub mod regularize;
pub mod rng;
pub mod schedule;
pub mod stats;

pub use error::{Error, Result};
pub use graph::{ColorId, ColoredGraph, Complex, PartitionwiseMap, TotalColor};
