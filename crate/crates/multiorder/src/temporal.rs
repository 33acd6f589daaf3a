//! Temporal networks and time-respecting path extraction.
//!
//! A temporal network is a multiset of directed edges stamped with integer
//! times. Two consecutive edges belong to the same time-respecting path
//! when the second leaves the vertex the first arrived at and follows it
//! by at least one and at most `delta` time units. Extracting these paths
//! turns a temporal edge stream into a [`PathCollection`] that the model
//! machinery can fit directly, and shuffling the timestamps provides a
//! null model that keeps the topology but destroys the ordering.

use std::collections::HashMap;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::DirectedGraph;
use crate::path::{PathCollection, VertexIndex, VertexIndexBuilder};

/// One directed contact at a point in time.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TemporalEdge {
    pub source: u32,
    pub target: u32,
    pub time: i64,
}

/// A multiset of timestamped directed edges over a shared vertex index.
///
/// Edges are kept in a canonical order — by time, then source label, then
/// target label — so everything derived from the network is independent
/// of the order the input listed them in.
#[derive(Debug, Clone)]
pub struct TemporalNetwork {
    index: Arc<VertexIndex>,
    edges: Vec<TemporalEdge>,
}

impl TemporalNetwork {
    /// Parse `source<TAB>target<TAB>timestamp` lines. Blank lines and
    /// lines starting with `#` are skipped; timestamps are integers and
    /// may be negative. Self-loops are rejected: a contact from a vertex
    /// to itself cannot occur in a temporal sequence of distinct hops.
    ///
    /// # Errors
    ///
    /// [`Error::Parse`] with the 1-based line number for malformed lines.
    pub fn parse(text: &str) -> Result<Self> {
        let mut builder = VertexIndexBuilder::new();
        let mut edges = Vec::new();
        for (number, raw) in text.lines().enumerate() {
            let line = number + 1;
            let trimmed = raw.trim_end_matches(['\r', ' ']);
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = trimmed.split('\t').collect();
            if fields.len() != 3 {
                return Err(Error::Parse {
                    line,
                    message: format!(
                        "expected source<TAB>target<TAB>timestamp, found {} fields",
                        fields.len()
                    ),
                });
            }
            let source_label = fields[0].trim();
            let target_label = fields[1].trim();
            let source = builder
                .intern(source_label)
                .map_err(|error| Error::Parse {
                    line,
                    message: error.to_string(),
                })?;
            let target = builder
                .intern(target_label)
                .map_err(|error| Error::Parse {
                    line,
                    message: error.to_string(),
                })?;
            if source == target {
                return Err(Error::Parse {
                    line,
                    message: format!("self-loop on vertex '{source_label}' is not allowed"),
                });
            }
            let time: i64 = fields[2].trim().parse().map_err(|_| Error::Parse {
                line,
                message: format!("invalid timestamp '{}'", fields[2].trim()),
            })?;
            edges.push(TemporalEdge {
                source,
                target,
                time,
            });
        }
        Ok(Self::assemble(builder.finish(), edges))
    }

    /// Build a network from labeled contacts; mainly useful in tests.
    ///
    /// # Errors
    ///
    /// [`Error::InvalidParameter`] for self-loops or unusable labels.
    pub fn from_labeled(contacts: &[(&str, &str, i64)]) -> Result<Self> {
        let mut builder = VertexIndexBuilder::new();
        let mut edges = Vec::new();
        for &(source_label, target_label, time) in contacts {
            let source = builder.intern(source_label)?;
            let target = builder.intern(target_label)?;
            if source == target {
                return Err(Error::InvalidParameter {
                    parameter: "contacts",
                    message: format!("self-loop on vertex '{source_label}' is not allowed"),
                });
            }
            edges.push(TemporalEdge {
                source,
                target,
                time,
            });
        }
        Ok(Self::assemble(builder.finish(), edges))
    }

    fn assemble(index: Arc<VertexIndex>, mut edges: Vec<TemporalEdge>) -> Self {
        edges.sort_by(|a, b| {
            a.time
                .cmp(&b.time)
                .then_with(|| index.label(a.source).cmp(index.label(b.source)))
                .then_with(|| index.label(a.target).cmp(index.label(b.target)))
        });
        Self { index, edges }
    }

    pub fn index(&self) -> &Arc<VertexIndex> {
        &self.index
    }

    pub fn vertex_count(&self) -> usize {
        self.index.len()
    }

    /// Edges in canonical order: time, then source label, then target
    /// label.
    pub fn edges(&self) -> &[TemporalEdge] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Earliest and latest timestamp, if any edges exist.
    pub fn time_span(&self) -> Option<(i64, i64)> {
        match (self.edges.first(), self.edges.last()) {
            (Some(first), Some(last)) => Some((first.time, last.time)),
            _ => None,
        }
    }

    /// The static graph obtained by forgetting timestamps: one edge per
    /// distinct (source, target) pair.
    pub fn aggregate_graph(&self) -> DirectedGraph {
        DirectedGraph::from_edges(
            Arc::clone(&self.index),
            self.edges.iter().map(|edge| (edge.source, edge.target)),
        )
        .expect("temporal edges use ids from the shared index")
    }

    /// A copy of the network with the multiset of timestamps randomly
    /// permuted across edges (a Fisher–Yates shuffle seeded by `seed`).
    /// Topology and timestamp multiset are preserved exactly; which edge
    /// carries which time is randomized, which destroys time-respecting
    /// order beyond what the dynamics enforce.
    pub fn shuffled_timestamps(&self, seed: u64) -> Self {
        let mut times: Vec<i64> = self.edges.iter().map(|edge| edge.time).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        times.shuffle(&mut rng);
        let edges = self
            .edges
            .iter()
            .zip(times)
            .map(|(edge, time)| TemporalEdge { time, ..*edge })
            .collect();
        Self::assemble(Arc::clone(&self.index), edges)
    }
}

/// Which time-respecting paths [`extract_time_respecting_paths`] emits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExtractionMode {
    /// Only maximal paths: those that no other time-respecting path
    /// contains as a contiguous sub-path.
    #[default]
    Maximal,
    /// Every time-respecting path, including every prefix of every longer
    /// one. The count of paths can grow combinatorially in dense bursts.
    All,
}

/// Extract time-respecting paths: edge sequences where each hop leaves
/// the vertex the previous hop reached, between 1 and `delta` time units
/// later. Paths are counted per realization — two parallel contacts that
/// both continue into the same extension yield the same vertex sequence
/// twice — and returned as a frequency-aggregated [`PathCollection`] in
/// label order.
///
/// An isolated contact with no qualifying continuation in either
/// direction becomes a single-edge path, so every contact contributes to
/// the output.
///
/// # Errors
///
/// [`Error::InvalidParameter`] when `delta < 1`;
/// [`Error::EmptyCollection`] when the network has no edges.
pub fn extract_time_respecting_paths(
    network: &TemporalNetwork,
    delta: i64,
    mode: ExtractionMode,
) -> Result<PathCollection> {
    if delta < 1 {
        return Err(Error::InvalidParameter {
            parameter: "delta",
            message: format!("maximum waiting time must be at least 1, got {delta}"),
        });
    }
    if network.edges.is_empty() {
        return Err(Error::EmptyCollection);
    }

    struct Head {
        sequence: Vec<u32>,
        last_time: i64,
        extended: bool,
    }

    let mut heads: Vec<Vec<Head>> = (0..network.vertex_count()).map(|_| Vec::new()).collect();
    let mut counts: HashMap<Box<[u32]>, u64> = HashMap::new();

    for edge in &network.edges {
        let (u, v, t) = (edge.source as usize, edge.target, edge.time);
        // Heads whose window closed before this edge can never grow
        // again; in maximal mode the unextended ones are finished paths.
        let expired_before = t.saturating_sub(delta);
        heads[u].retain(|head| {
            if head.last_time < expired_before {
                if mode == ExtractionMode::Maximal && !head.extended {
                    *counts.entry(head.sequence.as_slice().into()).or_insert(0) += 1;
                }
                false
            } else {
                true
            }
        });

        let mut created: Vec<Head> = Vec::new();
        let mut qualified = false;
        for head in heads[u].iter_mut() {
            if head.last_time < t && t - head.last_time <= delta {
                qualified = true;
                head.extended = true;
                let mut sequence = head.sequence.clone();
                sequence.push(v);
                if mode == ExtractionMode::All {
                    *counts.entry(sequence.as_slice().into()).or_insert(0) += 1;
                }
                created.push(Head {
                    sequence,
                    last_time: t,
                    extended: false,
                });
            }
        }
        // The contact on its own: in maximal mode it only stands alone
        // when nothing continues into it, otherwise it is a sub-path of
        // every extension made above.
        if mode == ExtractionMode::All || !qualified {
            let sequence = vec![edge.source, v];
            if mode == ExtractionMode::All {
                *counts.entry(sequence.as_slice().into()).or_insert(0) += 1;
            }
            created.push(Head {
                sequence,
                last_time: t,
                extended: false,
            });
        }
        heads[v as usize].extend(created);
    }

    if mode == ExtractionMode::Maximal {
        for per_vertex in &heads {
            for head in per_vertex {
                if !head.extended {
                    *counts.entry(head.sequence.as_slice().into()).or_insert(0) += 1;
                }
            }
        }
    }

    // Emit in label order so the result is independent of both input
    // line order and sweep bookkeeping.
    let index = &network.index;
    let mut ordered: Vec<(Box<[u32]>, u64)> = counts.into_iter().collect();
    ordered.sort_by(|(a, _), (b, _)| {
        let left = a.iter().map(|&v| index.label(v));
        let right = b.iter().map(|&v| index.label(v));
        left.cmp(right)
    });
    PathCollection::from_indexed(
        Arc::clone(index),
        ordered
            .into_iter()
            .map(|(sequence, frequency)| (sequence.into_vec(), frequency)),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn extract(
        contacts: &[(&str, &str, i64)],
        delta: i64,
        mode: ExtractionMode,
    ) -> Vec<(Vec<String>, u64)> {
        let network = TemporalNetwork::from_labeled(contacts).unwrap();
        let paths = extract_time_respecting_paths(&network, delta, mode).unwrap();
        paths
            .iter()
            .map(|(sequence, frequency)| {
                let labels = sequence
                    .iter()
                    .map(|&v| paths.index().label(v).to_string())
                    .collect();
                (labels, frequency)
            })
            .collect()
    }

    fn path(labels: &[&str], frequency: u64) -> (Vec<String>, u64) {
        (labels.iter().map(|s| s.to_string()).collect(), frequency)
    }

    #[test]
    fn consecutive_contacts_within_delta_chain() {
        let out = extract(&[("A", "B", 1), ("B", "C", 2)], 1, ExtractionMode::Maximal);
        assert_eq!(out, vec![path(&["A", "B", "C"], 1)]);
    }

    #[test]
    fn reversed_times_do_not_chain() {
        let out = extract(&[("A", "B", 2), ("B", "C", 1)], 5, ExtractionMode::Maximal);
        assert_eq!(out, vec![path(&["A", "B"], 1), path(&["B", "C"], 1)]);
    }

    #[test]
    fn gap_beyond_delta_breaks_the_chain() {
        let out = extract(&[("A", "B", 1), ("B", "C", 5)], 2, ExtractionMode::Maximal);
        assert_eq!(out, vec![path(&["A", "B"], 1), path(&["B", "C"], 1)]);
    }

    #[test]
    fn simultaneous_contacts_do_not_chain() {
        let out = extract(&[("A", "B", 3), ("B", "C", 3)], 2, ExtractionMode::Maximal);
        assert_eq!(out, vec![path(&["A", "B"], 1), path(&["B", "C"], 1)]);
    }

    #[test]
    fn branching_extends_every_continuation() {
        let out = extract(
            &[("A", "B", 1), ("B", "C", 2), ("B", "D", 2)],
            1,
            ExtractionMode::Maximal,
        );
        assert_eq!(
            out,
            vec![path(&["A", "B", "C"], 1), path(&["A", "B", "D"], 1)]
        );
    }

    #[test]
    fn merging_counts_each_realization() {
        let out = extract(
            &[("A", "B", 1), ("C", "B", 1), ("B", "D", 2)],
            1,
            ExtractionMode::Maximal,
        );
        assert_eq!(
            out,
            vec![path(&["A", "B", "D"], 1), path(&["C", "B", "D"], 1)]
        );
    }

    #[test]
    fn parallel_contacts_aggregate_frequency() {
        let out = extract(
            &[("A", "B", 1), ("A", "B", 1), ("B", "C", 2)],
            1,
            ExtractionMode::Maximal,
        );
        assert_eq!(out, vec![path(&["A", "B", "C"], 2)]);
    }

    #[test]
    fn longer_chains_span_multiple_hops() {
        let out = extract(
            &[("A", "B", 1), ("B", "C", 3), ("C", "A", 4)],
            2,
            ExtractionMode::Maximal,
        );
        assert_eq!(out, vec![path(&["A", "B", "C", "A"], 1)]);
    }

    #[test]
    fn all_mode_reports_every_sub_path() {
        let out = extract(&[("A", "B", 1), ("B", "C", 2)], 1, ExtractionMode::All);
        assert_eq!(
            out,
            vec![
                path(&["A", "B"], 1),
                path(&["A", "B", "C"], 1),
                path(&["B", "C"], 1),
            ]
        );
    }

    #[test]
    fn all_mode_counts_grow_with_burst_density() {
        // Two contacts into B, two out of B, all chained: 4 two-hop
        // paths plus the 4 single contacts.
        let out = extract(
            &[
                ("A", "B", 1),
                ("C", "B", 1),
                ("B", "D", 2),
                ("B", "E", 2),
            ],
            1,
            ExtractionMode::All,
        );
        let total: u64 = out.iter().map(|(_, f)| f).sum();
        assert_eq!(total, 8);
    }

    #[test]
    fn extraction_is_independent_of_input_order() {
        let forward = extract(
            &[("A", "B", 1), ("B", "C", 2), ("B", "D", 2)],
            1,
            ExtractionMode::Maximal,
        );
        let backward = extract(
            &[("B", "D", 2), ("B", "C", 2), ("A", "B", 1)],
            1,
            ExtractionMode::Maximal,
        );
        assert_eq!(forward, backward);
    }

    #[test]
    fn negative_timestamps_are_ordinary() {
        let out = extract(&[("A", "B", -5), ("B", "C", -4)], 1, ExtractionMode::Maximal);
        assert_eq!(out, vec![path(&["A", "B", "C"], 1)]);
    }

    #[test]
    fn parse_reads_tab_separated_contacts() {
        let network = TemporalNetwork::parse("# comment\nA\tB\t3\n\nB\tC\t5\n").unwrap();
        assert_eq!(network.edge_count(), 2);
        assert_eq!(network.vertex_count(), 3);
        assert_eq!(network.time_span(), Some((3, 5)));
        // Canonical order is by time first.
        assert_eq!(network.edges()[0].time, 3);
    }

    #[test]
    fn parse_rejects_malformed_lines() {
        let missing = TemporalNetwork::parse("A\tB\n").unwrap_err();
        assert!(matches!(missing, Error::Parse { line: 1, .. }));
        let bad_time = TemporalNetwork::parse("A\tB\tsoon\n").unwrap_err();
        assert!(matches!(bad_time, Error::Parse { line: 1, .. }));
        let self_loop = TemporalNetwork::parse("A\tB\t1\nC\tC\t2\n").unwrap_err();
        assert!(matches!(self_loop, Error::Parse { line: 2, .. }));
        let empty_label = TemporalNetwork::parse("A\t\t1\n").unwrap_err();
        assert!(matches!(empty_label, Error::Parse { line: 1, .. }));
    }

    #[test]
    fn extraction_validates_inputs() {
        let network = TemporalNetwork::from_labeled(&[("A", "B", 1)]).unwrap();
        assert!(matches!(
            extract_time_respecting_paths(&network, 0, ExtractionMode::Maximal),
            Err(Error::InvalidParameter {
                parameter: "delta",
                ..
            })
        ));
        let empty = TemporalNetwork::parse("").unwrap();
        assert!(matches!(
            extract_time_respecting_paths(&empty, 1, ExtractionMode::Maximal),
            Err(Error::EmptyCollection)
        ));
    }

    #[test]
    fn aggregate_graph_forgets_time_and_multiplicity() {
        let network = TemporalNetwork::from_labeled(&[
            ("A", "B", 1),
            ("A", "B", 7),
            ("B", "C", 2),
        ])
        .unwrap();
        let graph = network.aggregate_graph();
        assert_eq!(graph.edge_count(), 2);
        let a = network.index().id("A").unwrap();
        let b = network.index().id("B").unwrap();
        assert!(graph.has_edge(a, b));
    }

    #[test]
    fn shuffle_preserves_topology_and_time_multiset() {
        let network = TemporalNetwork::from_labeled(&[
            ("A", "B", 1),
            ("B", "C", 2),
            ("C", "A", 9),
        ])
        .unwrap();
        let shuffled = network.shuffled_timestamps(42);
        let mut original_times: Vec<i64> = network.edges().iter().map(|e| e.time).collect();
        let mut shuffled_times: Vec<i64> = shuffled.edges().iter().map(|e| e.time).collect();
        original_times.sort_unstable();
        shuffled_times.sort_unstable();
        assert_eq!(original_times, shuffled_times);
        let pairs = |n: &TemporalNetwork| {
            let mut p: Vec<(u32, u32)> = n.edges().iter().map(|e| (e.source, e.target)).collect();
            p.sort_unstable();
            p
        };
        assert_eq!(pairs(&network), pairs(&shuffled));
    }

    #[test]
    fn shuffle_is_deterministic_per_seed() {
        let network = TemporalNetwork::from_labeled(&[
            ("A", "B", 1),
            ("B", "C", 2),
            ("C", "A", 9),
            ("A", "C", 4),
        ])
        .unwrap();
        let one = network.shuffled_timestamps(7);
        let two = network.shuffled_timestamps(7);
        assert_eq!(one.edges(), two.edges());
        let other = network.shuffled_timestamps(8);
        // Different seeds permute differently for this input.
        assert_ne!(one.edges(), other.edges());
    }
}
