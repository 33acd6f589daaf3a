//! Multi-order graphical models for paths in networks.
//!
//! Given a collection of variable-length paths — click streams, itineraries,
//! time-respecting journeys through a temporal network — this crate answers a
//! deceptively simple question: *how many steps of memory do the paths
//! actually carry?* A first-order network model assumes each step depends
//! only on the current vertex; real systems often remember more. Assuming
//! too little memory misses structure, assuming too much overfits noise.
//!
//! The centerpiece is the multi-order model: a stack of Markov layers of
//! increasing order, composed so that a path's first steps are scored by the
//! lower layers and the rest by the top layer. Because the layers are
//! nested, consecutive model pairs can be compared with likelihood-ratio
//! tests whose degrees of freedom respect the underlying graph — paths can
//! only follow edges that exist, which shrinks the parameter space far below
//! the unconstrained count and makes the tests dramatically sharper. The
//! optimal number of layers is then the largest order whose gain over the
//! previous one is still statistically significant.
//!
//! # A three-minute tour
//!
//! ```
//! use multiorder::{select_order_derived, MultiOrderModel, PathCollection, SelectionOptions};
//!
//! // Two habits that a first-order model cannot tell apart: travelers from
//! // A continue to C, travelers from D turn back to A.
//! let paths = PathCollection::parse(concat!(
//!     "A,B,C\t40\n",
//!     "D,B,A\t40\n",
//! ))?;
//!
//! let selection = select_order_derived(&paths, &SelectionOptions::default())?;
//! assert_eq!(selection.k_opt, 2);
//!
//! // The fitted model scores whole paths, memory included.
//! let model = MultiOrderModel::fit(&paths, selection.k_opt)?;
//! let a = paths.index().id("A").unwrap();
//! let b = paths.index().id("B").unwrap();
//! let c = paths.index().id("C").unwrap();
//! let familiar = model.path_log_prob(&[a, b, c])?;
//! let never_seen = model.path_log_prob(&[a, b, a])?;
//! assert!(familiar > never_seen);
//! assert_eq!(never_seen, f64::NEG_INFINITY);
//! # Ok::<(), multiorder::Error>(())
//! ```
//!
//! # Modules
//!
//! - [`path`] — path collections, parsing, and the shared vertex index.
//! - [`graph`] — the directed graph of allowed transitions and exact walk
//!   counts (the basis for graph-constrained degrees of freedom).
//! - [`layer`] — single maximum-likelihood Markov layers and their
//!   higher-order state graphs.
//! - [`model`] — the multi-order model, likelihood-ratio order selection,
//!   and conventional AIC/BIC baselines on concatenated sequences.
//! - [`temporal`] — timestamped edge streams and time-respecting path
//!   extraction with a timestamp-shuffling null model.
//! - [`ranking`] — higher-order PageRank, projection to vertex scores,
//!   visitation probabilities, and rank-comparison metrics.
//! - [`synth`] — seeded generation of random graphs and paths with a known,
//!   detectable correlation order.
//! - [`stats`] — the chi-squared survival function backing the tests.
//!
//! Everything is deterministic: fixed inputs (and seeds, where randomness is
//! involved) reproduce results byte for byte, independent of the order the
//! input listed its lines in.

pub mod error;
pub mod graph;
pub mod layer;
pub mod model;
pub mod path;
pub mod ranking;
pub mod stats;
pub mod synth;
pub mod temporal;

pub use error::{Error, Result};
pub use graph::{DirectedGraph, WalkCounts};
pub use layer::{LayerModel, StateGraph, Transition};
pub use model::{
    baseline_order_aic_bic, likelihood_ratio_test, select_order, select_order_derived,
    BaselineOrder, BaselineSelection, MultiOrderModel, OrderSelection, OrderTest,
    SelectionOptions, TestStatistic, DEFAULT_EPSILON, DEFAULT_MAX_ORDER,
};
pub use path::{PathCollection, VertexIndex, VertexIndexBuilder};
pub use ranking::{
    auc_top_fraction, higher_order_pagerank, higher_order_pagerank_weighted, kendall_tau,
    pagerank_pipeline, project_pagerank, visitation_probabilities, PageRankOptions,
    RankingOptions, VertexScores,
};
pub use stats::chi_squared_sf;
pub use synth::{
    generate_paths, generate_paths_with, random_chain, random_graph, GeneratorSpec, MarkovChain,
    PathLength, SyntheticData,
};
pub use temporal::{
    extract_time_respecting_paths, ExtractionMode, TemporalEdge, TemporalNetwork,
};
