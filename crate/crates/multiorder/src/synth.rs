//! Synthetic data with a known, detectable correlation order.
//!
//! The pipeline has three seeded stages: a random directed graph in which
//! every vertex can continue a walk, an order-`k` transition table over
//! that graph whose rows are drawn from a Dirichlet-like sampler and
//! redrawn until histories are actually distinguishable, and a collection
//! of random walks driven by that table. Because the table provably
//! depends on more than the current vertex, the emitted paths carry
//! order-`k` structure that detection should recover — which makes the
//! generator the workhorse for validating order selection end to end.
//!
//! All stages consume independent streams of one [`ChaCha8Rng`] seed, so
//! a [`GeneratorSpec`] pins its output byte for byte, and each path has
//! its own stream, so generation could be parallelized across paths
//! without changing the result.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};

use crate::error::{Error, Result};
use crate::graph::DirectedGraph;
use crate::path::{PathCollection, VertexIndex, VertexIndexBuilder};

/// RNG stream carrying graph construction.
const GRAPH_STREAM: u64 = 1;
/// RNG stream carrying transition-table draws.
const CHAIN_STREAM: u64 = 2;
/// RNG stream of path `i` is `PATH_STREAM_BASE + i`.
const PATH_STREAM_BASE: u64 = 16;

/// Minimum total-variation distance some pair of same-vertex conditionals
/// must exceed for a vertex's rows to count as genuinely order-`k`.
const DISTINGUISHABILITY_THRESHOLD: f64 = 0.2;
/// Redraw budget per vertex before giving up.
const MAX_REDRAWS: usize = 200;
/// Refuse to materialize transition tables beyond this many histories.
const MAX_HISTORIES: u128 = 4_000_000;

/// A random directed graph: `n` vertices, `m` distinct edges, no
/// self-loops, every vertex with out-degree at least 1.
///
/// The first `n` edges give each vertex one uniformly chosen out-edge;
/// the remaining `m - n` are drawn uniformly without replacement from the
/// unused ordered pairs. Vertices are labeled `v0`, `v1`, … zero-padded
/// to a common width so label order equals id order.
///
/// # Errors
///
/// [`Error::InvalidParameter`] unless `2 ≤ n` and `n ≤ m ≤ n(n-1)`.
pub fn random_graph(n: usize, m: usize, seed: u64) -> Result<DirectedGraph> {
    if n < 2 {
        return Err(Error::InvalidParameter {
            parameter: "vertices",
            message: format!("need at least 2 vertices without self-loops, got {n}"),
        });
    }
    let max_edges = n * (n - 1);
    if m < n || m > max_edges {
        return Err(Error::InvalidParameter {
            parameter: "edges",
            message: format!(
                "edge count must lie in [{n}, {max_edges}] for {n} vertices, got {m}"
            ),
        });
    }
    let width = (n - 1).to_string().len();
    let mut builder = VertexIndexBuilder::new();
    for v in 0..n {
        builder
            .intern(&format!("v{v:0width$}"))
            .expect("generated labels are valid");
    }
    let index = builder.finish();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(GRAPH_STREAM);
    let mut used = vec![false; n * n];
    let mut edges: Vec<(u32, u32)> = Vec::with_capacity(m);
    for source in 0..n {
        // Uniform over the n-1 non-self targets.
        let mut target = rng.gen_range(0..n - 1);
        if target >= source {
            target += 1;
        }
        used[source * n + target] = true;
        edges.push((source as u32, target as u32));
    }
    let mut unused: Vec<(u32, u32)> = Vec::with_capacity(max_edges - n);
    for source in 0..n {
        for target in 0..n {
            if source != target && !used[source * n + target] {
                unused.push((source as u32, target as u32));
            }
        }
    }
    // Partial Fisher–Yates: draw m - n pairs without replacement.
    for slot in 0..m - n {
        let pick = rng.gen_range(slot..unused.len());
        unused.swap(slot, pick);
        edges.push(unused[slot]);
    }
    DirectedGraph::from_edges(index, edges)
}

/// One conditional distribution of a [`MarkovChain`]: successors (sorted
/// by id) and their probabilities, summing to 1.
#[derive(Debug, Clone)]
pub struct ChainRow {
    successors: Vec<u32>,
    probabilities: Vec<f64>,
}

impl ChainRow {
    pub fn successors(&self) -> &[u32] {
        &self.successors
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }
}

/// An order-`k` transition table over the feasible length-`k` histories
/// of a graph: for each history, a distribution over the out-neighbors of
/// its final vertex.
#[derive(Debug, Clone)]
pub struct MarkovChain {
    order: usize,
    index: Arc<VertexIndex>,
    rows: BTreeMap<Box<[u32]>, ChainRow>,
}

impl MarkovChain {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn index(&self) -> &Arc<VertexIndex> {
        &self.index
    }

    pub fn history_count(&self) -> usize {
        self.rows.len()
    }

    /// The conditional distribution for one feasible history, or `None`
    /// for histories the graph does not admit.
    pub fn row(&self, history: &[u32]) -> Option<&ChainRow> {
        self.rows.get(history)
    }

    /// Histories and rows in id-lexicographic order.
    pub fn iter(&self) -> impl Iterator<Item = (&[u32], &ChainRow)> {
        self.rows.iter().map(|(history, row)| (&**history, row))
    }

    fn sample_next(&self, history: &[u32], rng: &mut ChaCha8Rng) -> u32 {
        let row = self
            .rows
            .get(history)
            .expect("walks only visit feasible histories");
        let draw: f64 = rng.gen();
        let mut cumulative = 0.0;
        for (&successor, &probability) in row.successors.iter().zip(&row.probabilities) {
            cumulative += probability;
            if draw < cumulative {
                return successor;
            }
        }
        // Rounding can leave the cumulative sum a hair under 1.
        *row.successors.last().expect("rows are non-empty")
    }
}

/// Draw an order-`k` transition table for `graph`.
///
/// Every feasible history of `k` vertices gets a distribution over the
/// out-neighbors of its final vertex, drawn from a symmetric
/// Dirichlet-style sampler (normalized Gamma(`concentration`, 1) draws).
/// Low concentration produces near-deterministic, history-specific
/// preferences. To guarantee the table is genuinely order `k`, each
/// vertex with at least two out-neighbors and at least two histories must
/// show a pair of conditionals with total-variation distance above 0.2;
/// otherwise that vertex's rows are redrawn.
///
/// # Errors
///
/// [`Error::InvalidParameter`] when `k = 0`, `concentration` is not a
/// positive finite number, some vertex has no out-edge, every vertex has
/// out-degree 1 (no order is detectable — use a denser graph), or the
/// history table would exceed a sanity bound;
/// [`Error::RejectionExhausted`] when a vertex fails the
/// distinguishability check [`MAX_REDRAWS`] times.
pub fn random_chain(
    graph: &DirectedGraph,
    k: usize,
    concentration: f64,
    seed: u64,
) -> Result<MarkovChain> {
    if k == 0 {
        return Err(Error::InvalidParameter {
            parameter: "order",
            message: "a transition table conditions on at least one vertex".into(),
        });
    }
    if !(concentration > 0.0 && concentration.is_finite()) {
        return Err(Error::InvalidParameter {
            parameter: "concentration",
            message: format!("concentration must be a positive real, got {concentration}"),
        });
    }
    let n = graph.vertex_count();
    if let Some(sink) = (0..n as u32).find(|&v| graph.out_neighbors(v).is_empty()) {
        return Err(Error::InvalidParameter {
            parameter: "graph",
            message: format!(
                "vertex {} has no out-edge; walks cannot continue from it",
                graph.index().label(sink)
            ),
        });
    }
    if (0..n as u32).all(|v| graph.out_neighbors(v).len() == 1) {
        return Err(Error::InvalidParameter {
            parameter: "graph",
            message: "every vertex has out-degree 1, so transitions are forced and \
                      no order is detectable; use a denser graph"
                .into(),
        });
    }
    if k >= 2 {
        let histories = graph.walk_counts(k - 1)?.walks;
        if histories > MAX_HISTORIES {
            return Err(Error::InvalidParameter {
                parameter: "order",
                message: format!(
                    "order {k} needs {histories} history rows on this graph \
                     (limit {MAX_HISTORIES})"
                ),
            });
        }
    }

    // Feasible histories, grouped by final vertex. Extension follows
    // sorted neighbor lists, so the enumeration is deterministic.
    let mut histories: Vec<Vec<u32>> = (0..n as u32).map(|v| vec![v]).collect();
    for _ in 1..k {
        let mut longer = Vec::with_capacity(histories.len());
        for history in &histories {
            let last = *history.last().expect("histories are non-empty");
            for &target in graph.out_neighbors(last) {
                let mut extended = history.clone();
                extended.push(target);
                longer.push(extended);
            }
        }
        histories = longer;
    }
    let mut by_final: Vec<Vec<&[u32]>> = vec![Vec::new(); n];
    for history in &histories {
        by_final[*history.last().expect("histories are non-empty") as usize]
            .push(history.as_slice());
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(CHAIN_STREAM);
    let gamma = Gamma::new(concentration, 1.0).expect("concentration was validated");
    let mut rows: BTreeMap<Box<[u32]>, ChainRow> = BTreeMap::new();
    for vertex in 0..n as u32 {
        let successors = graph.out_neighbors(vertex);
        let vertex_histories = &by_final[vertex as usize];
        if successors.len() == 1 {
            for &history in vertex_histories {
                rows.insert(
                    history.into(),
                    ChainRow {
                        successors: successors.to_vec(),
                        probabilities: vec![1.0],
                    },
                );
            }
            continue;
        }
        let needs_check = vertex_histories.len() >= 2;
        let mut attempts = 0;
        let drawn = loop {
            attempts += 1;
            let drawn: Vec<Vec<f64>> = vertex_histories
                .iter()
                .map(|_| draw_simplex(&gamma, successors.len(), &mut rng))
                .collect();
            if !needs_check || distinguishable(&drawn) {
                break drawn;
            }
            if attempts >= MAX_REDRAWS {
                return Err(Error::RejectionExhausted {
                    vertex: graph.index().label(vertex).to_owned(),
                    attempts,
                });
            }
        };
        for (&history, probabilities) in vertex_histories.iter().zip(drawn) {
            rows.insert(
                history.into(),
                ChainRow {
                    successors: successors.to_vec(),
                    probabilities,
                },
            );
        }
    }
    Ok(MarkovChain {
        order: k,
        index: Arc::clone(graph.index()),
        rows,
    })
}

/// One normalized vector of Gamma draws — a symmetric Dirichlet sample.
fn draw_simplex(gamma: &Gamma<f64>, len: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    loop {
        let mut draws: Vec<f64> = (0..len).map(|_| gamma.sample(rng)).collect();
        let total: f64 = draws.iter().sum();
        // At very low concentration a whole vector can underflow to zero.
        if total > 0.0 {
            draws.iter_mut().for_each(|p| *p /= total);
            return draws;
        }
    }
}

/// Does some pair of rows differ by more than the distinguishability
/// threshold in total variation?
fn distinguishable(rows: &[Vec<f64>]) -> bool {
    rows.iter().enumerate().any(|(i, a)| {
        rows[i + 1..]
            .iter()
            .any(|b| total_variation(a, b) > DISTINGUISHABILITY_THRESHOLD)
    })
}

fn total_variation(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .sum::<f64>()
}

/// How path lengths (edge counts) are chosen per path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PathLength {
    /// Every path has exactly this many edges.
    Fixed(usize),
    /// `min` edges, then further edges with probability
    /// `continue_probability` each, geometrically.
    Geometric {
        min: usize,
        continue_probability: f64,
    },
}

impl PathLength {
    fn minimum(&self) -> usize {
        match *self {
            PathLength::Fixed(length) => length,
            PathLength::Geometric { min, .. } => min,
        }
    }

    fn validate(&self) -> Result<()> {
        if let PathLength::Geometric {
            continue_probability,
            ..
        } = *self
        {
            if !(0.0..1.0).contains(&continue_probability) {
                return Err(Error::InvalidParameter {
                    parameter: "continue_probability",
                    message: format!(
                        "continuation probability must lie in [0,1), got {continue_probability}"
                    ),
                });
            }
        }
        Ok(())
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> usize {
        match *self {
            PathLength::Fixed(length) => length,
            PathLength::Geometric {
                min,
                continue_probability,
            } => {
                let mut length = min;
                while rng.gen::<f64>() < continue_probability {
                    length += 1;
                }
                length
            }
        }
    }
}

/// Generate `n_paths` independent walks of `length` edges each: start
/// vertex uniform, positions `1..k-1` by uniform out-neighbor choice
/// (warm-up), every later step by the chain's conditional on the last `k`
/// vertices. Identical walks aggregate by frequency.
///
/// # Errors
///
/// [`Error::InvalidParameter`] when `length` is shorter than the chain's
/// order or the chain was drawn for a different graph.
pub fn generate_paths(
    chain: &MarkovChain,
    graph: &DirectedGraph,
    n_paths: u64,
    length: usize,
    seed: u64,
) -> Result<PathCollection> {
    generate_paths_with(chain, graph, n_paths, PathLength::Fixed(length), seed)
}

/// [`generate_paths`] with a per-path length distribution.
pub fn generate_paths_with(
    chain: &MarkovChain,
    graph: &DirectedGraph,
    n_paths: u64,
    length: PathLength,
    seed: u64,
) -> Result<PathCollection> {
    length.validate()?;
    let k = chain.order();
    if length.minimum() < k {
        return Err(Error::InvalidParameter {
            parameter: "length",
            message: format!(
                "paths of length {} cannot exercise an order-{k} chain",
                length.minimum()
            ),
        });
    }
    let same_graph = Arc::ptr_eq(chain.index(), graph.index())
        || chain.index().labels().eq(graph.index().labels());
    if !same_graph {
        return Err(Error::InvalidParameter {
            parameter: "chain",
            message: "transition table was drawn for a different graph".into(),
        });
    }
    let n = graph.vertex_count();
    let mut paths: Vec<(Vec<u32>, u64)> = Vec::with_capacity(n_paths as usize);
    for i in 0..n_paths {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(PATH_STREAM_BASE + i);
        let edges = length.sample(&mut rng);
        let mut sequence = Vec::with_capacity(edges + 1);
        sequence.push(rng.gen_range(0..n) as u32);
        while sequence.len() < k.min(edges + 1) {
            let last = *sequence.last().expect("sequence is non-empty");
            let neighbors = graph.out_neighbors(last);
            sequence.push(neighbors[rng.gen_range(0..neighbors.len())]);
        }
        while sequence.len() < edges + 1 {
            let history = &sequence[sequence.len() - k..];
            let next = chain.sample_next(history, &mut rng);
            sequence.push(next);
        }
        paths.push((sequence, 1));
    }
    PathCollection::from_indexed(Arc::clone(graph.index()), paths)
}

/// Everything needed to generate one synthetic data set.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorSpec {
    pub n_vertices: usize,
    pub n_edges: usize,
    /// True order of the generating chain.
    pub order: usize,
    pub n_paths: u64,
    pub path_length: PathLength,
    /// Dirichlet concentration; lower means stronger, more detectable
    /// correlations.
    pub concentration: f64,
    pub seed: u64,
}

/// The three stages of one generated data set.
#[derive(Debug, Clone)]
pub struct SyntheticData {
    pub graph: DirectedGraph,
    pub chain: MarkovChain,
    pub paths: PathCollection,
}

impl GeneratorSpec {
    /// Run all three stages. Identical specs produce byte-identical
    /// serialized collections.
    ///
    /// # Errors
    ///
    /// As [`random_graph`], [`random_chain`], and [`generate_paths`].
    pub fn generate(&self) -> Result<SyntheticData> {
        let graph = random_graph(self.n_vertices, self.n_edges, self.seed)?;
        let chain = random_chain(&graph, self.order, self.concentration, self.seed)?;
        let paths =
            generate_paths_with(&chain, &graph, self.n_paths, self.path_length, self.seed)?;
        Ok(SyntheticData {
            graph,
            chain,
            paths,
        })
    }
}
