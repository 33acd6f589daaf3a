//! Directed graphs underlying path collections, and exact counts of the
//! walks they admit.
//!
//! The graph constrains which transitions a model of any order may use: a
//! history of `k` vertices is feasible exactly when it is a walk of length
//! `k - 1`. Counting feasible walks is therefore the basis for the
//! graph-aware degrees of freedom used in model comparison, and those counts
//! are computed exactly in 128-bit integers rather than floating point.

use std::collections::HashSet;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::path::{PathCollection, VertexIndex, VertexIndexBuilder};

/// A simple directed graph over dense vertex ids.
///
/// Out-neighbor lists are sorted and de-duplicated; parallel edges collapse.
#[derive(Debug, Clone)]
pub struct DirectedGraph {
    index: Arc<VertexIndex>,
    out: Vec<Vec<u32>>,
    edge_count: usize,
}

impl DirectedGraph {
    /// Build the graph of all edges traversed by a collection's paths.
    ///
    /// Every consecutive vertex pair of every distinct path becomes an edge.
    /// Vertices that only appear in length-zero paths are kept as isolated
    /// vertices, so the vertex set always equals the collection's.
    pub fn from_paths(paths: &PathCollection) -> Self {
        let index = Arc::clone(paths.index());
        let mut out: Vec<HashSet<u32>> = vec![HashSet::new(); index.len()];
        for (sequence, _) in paths.iter() {
            for pair in sequence.windows(2) {
                out[pair[0] as usize].insert(pair[1]);
            }
        }
        Self::from_neighbor_sets(index, out)
    }

    /// Parse a tab-separated edge list (`source<TAB>target`, one edge per
    /// line, `#` comments and blank lines ignored).
    ///
    /// When `base` is given, its label-to-id assignment is kept and new
    /// labels extend it, so a collection indexed against `base` can be used
    /// directly with the parsed graph.
    ///
    /// # Errors
    ///
    /// Returns [`Error::Parse`] with the line number for lines that do not
    /// have exactly two fields, self-loops, or invalid labels.
    pub fn parse_edge_list(text: &str, base: Option<&VertexIndex>) -> Result<Self> {
        let mut builder = match base {
            Some(base) => VertexIndexBuilder::extending(base),
            None => VertexIndexBuilder::new(),
        };
        let mut edges = Vec::new();
        for (number, line) in text.lines().enumerate() {
            let number = number + 1;
            let line = line.trim_end();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut fields = line.split('\t');
            let (source, target) = match (fields.next(), fields.next(), fields.next()) {
                (Some(s), Some(t), None) => (s.trim(), t.trim()),
                _ => {
                    return Err(Error::Parse {
                        line: number,
                        message: "expected exactly two tab-separated fields".into(),
                    })
                }
            };
            let source = builder.intern(source).map_err(|err| Error::Parse {
                line: number,
                message: err.to_string(),
            })?;
            let target = builder.intern(target).map_err(|err| Error::Parse {
                line: number,
                message: err.to_string(),
            })?;
            edges.push((source, target));
        }
        let index = builder.finish();
        let mut out: Vec<HashSet<u32>> = vec![HashSet::new(); index.len()];
        for (source, target) in edges {
            out[source as usize].insert(target);
        }
        Ok(Self::from_neighbor_sets(index, out))
    }

    /// Build a graph from explicit edges over an existing index.
    ///
    /// # Errors
    ///
    /// Rejects edge endpoints outside the index.
    pub fn from_edges(
        index: Arc<VertexIndex>,
        edges: impl IntoIterator<Item = (u32, u32)>,
    ) -> Result<Self> {
        let mut out: Vec<HashSet<u32>> = vec![HashSet::new(); index.len()];
        let limit = index.len() as u32;
        for (source, target) in edges {
            if source >= limit || target >= limit {
                return Err(Error::InvalidParameter {
                    parameter: "edge",
                    message: format!("endpoint of {source} -> {target} is not in the index"),
                });
            }
            out[source as usize].insert(target);
        }
        Ok(Self::from_neighbor_sets(index, out))
    }

    fn from_neighbor_sets(index: Arc<VertexIndex>, sets: Vec<HashSet<u32>>) -> Self {
        let mut edge_count = 0;
        let out: Vec<Vec<u32>> = sets
            .into_iter()
            .map(|set| {
                let mut neighbors: Vec<u32> = set.into_iter().collect();
                neighbors.sort_unstable();
                edge_count += neighbors.len();
                neighbors
            })
            .collect();
        Self {
            index,
            out,
            edge_count,
        }
    }

    pub fn index(&self) -> &Arc<VertexIndex> {
        &self.index
    }

    /// Number of vertices, including isolated ones.
    pub fn vertex_count(&self) -> usize {
        self.out.len()
    }

    /// Number of distinct directed edges.
    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    /// Sorted out-neighbors of a vertex.
    pub fn out_neighbors(&self, vertex: u32) -> &[u32] {
        &self.out[vertex as usize]
    }

    pub fn out_degree(&self, vertex: u32) -> usize {
        self.out[vertex as usize].len()
    }

    pub fn has_edge(&self, source: u32, target: u32) -> bool {
        self.out[source as usize].binary_search(&target).is_ok()
    }

    /// All edges in (source, target) order.
    pub fn edges(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.out
            .iter()
            .enumerate()
            .flat_map(|(source, targets)| targets.iter().map(move |&t| (source as u32, t)))
    }

    /// Verify that every edge traversed by `paths` is present in this graph.
    ///
    /// Degrees-of-freedom computations assume the graph is a superset of the
    /// transitions the data uses; this check makes that precondition
    /// enforceable at the boundary.
    ///
    /// # Errors
    ///
    /// Returns [`Error::MissingEdge`] naming the first offending edge. Also
    /// fails if the collection was indexed against a different vertex index
    /// than this graph extends.
    pub fn covers(&self, paths: &PathCollection) -> Result<()> {
        for (label, id) in paths.index().labels().zip(0u32..) {
            if self.index.id(label) != Some(id) {
                return Err(Error::InvalidParameter {
                    parameter: "graph",
                    message: format!(
                        "graph index does not extend the collection's (vertex {label:?})"
                    ),
                });
            }
        }
        for (sequence, _) in paths.iter() {
            for pair in sequence.windows(2) {
                if !self.has_edge(pair[0], pair[1]) {
                    return Err(Error::MissingEdge {
                        from: self.index.label(pair[0]).to_owned(),
                        to: self.index.label(pair[1]).to_owned(),
                    });
                }
            }
        }
        Ok(())
    }

    /// Exact number of walks of length `k` (sequences of `k + 1` vertices
    /// joined by edges), together with the number of those walks' length
    /// `k - 1` prefixes that can be extended at all — walks of length
    /// `k - 1` ending in a vertex with at least one out-edge.
    ///
    /// Computed by propagating exact 128-bit walk counts along edges, which
    /// keeps the cost at `O(k (|V| + |E|))` instead of materializing matrix
    /// powers.
    ///
    /// # Errors
    ///
    /// [`Error::CountOverflow`] when a count exceeds `u128`, and
    /// [`Error::InvalidParameter`] for `k = 0`.
    pub fn walk_counts(&self, k: usize) -> Result<WalkCounts> {
        Ok(*self
            .walk_count_table(k)?
            .last()
            .expect("table for k >= 1 is non-empty"))
    }

    /// [`walk_counts`](Self::walk_counts) for every length `1..=k_max` in a
    /// single pass.
    pub fn walk_count_table(&self, k_max: usize) -> Result<Vec<WalkCounts>> {
        if k_max == 0 {
            return Err(Error::InvalidParameter {
                parameter: "k",
                message: "walk length must be at least 1".into(),
            });
        }
        let mut table = Vec::with_capacity(k_max);
        // ending[v] holds the exact number of length-j walks ending at v.
        let mut ending: Vec<u128> = vec![1; self.vertex_count()];
        let mut next: Vec<u128> = vec![0; self.vertex_count()];
        for j in 1..=k_max {
            let mut extendable: u128 = 0;
            for (vertex, targets) in self.out.iter().enumerate() {
                if targets.is_empty() {
                    continue;
                }
                let count = ending[vertex];
                extendable = extendable
                    .checked_add(count)
                    .ok_or(Error::CountOverflow { order: j })?;
                for &target in targets {
                    let slot = &mut next[target as usize];
                    *slot = slot
                        .checked_add(count)
                        .ok_or(Error::CountOverflow { order: j })?;
                }
            }
            let mut walks: u128 = 0;
            for &count in &next {
                walks = walks
                    .checked_add(count)
                    .ok_or(Error::CountOverflow { order: j })?;
            }
            table.push(WalkCounts {
                walks,
                extendable_prefixes: extendable,
            });
            std::mem::swap(&mut ending, &mut next);
            next.iter_mut().for_each(|slot| *slot = 0);
        }
        Ok(table)
    }
}

/// Exact walk statistics for one length, produced by
/// [`DirectedGraph::walk_counts`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WalkCounts {
    /// Number of walks of length `k`.
    pub walks: u128,
    /// Number of walks of length `k - 1` whose final vertex has at least one
    /// out-edge.
    pub extendable_prefixes: u128,
}
