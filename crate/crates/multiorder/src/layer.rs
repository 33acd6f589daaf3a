//! Single-order Markov layers estimated from path data.
//!
//! A layer of order `k` conditions the next vertex on the preceding `k`
//! vertices. Its maximum-likelihood estimate is pure counting: the
//! probability of `v` after history `h` is the frequency-weighted number of
//! `(h, v)` windows divided by the number of windows starting with `h`.
//! Unobserved transitions have probability zero — no smoothing is applied,
//! so likelihoods are exactly the in-sample quantities model comparison
//! needs.
//!
//! Every layer also has a graph view ([`StateGraph`]): states are the
//! observed histories of `k - 1` vertices and edges connect histories that
//! overlap in `k - 2` vertices, exactly like a De Bruijn graph. Walks in
//! that graph correspond one-to-one to walks of the original graph, which is
//! what lets first-order algorithms run on higher-order topologies.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::path::{PathCollection, VertexIndex};

/// One estimated transition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transition {
    /// The successor vertex.
    pub vertex: u32,
    /// Frequency-weighted number of windows realizing the transition.
    pub count: u64,
    /// Maximum-likelihood probability of the transition given its history.
    pub probability: f64,
}

#[derive(Debug, Clone)]
struct SuccessorTable {
    total: u64,
    transitions: Vec<Transition>,
}

/// A maximum-likelihood Markov layer of fixed order.
///
/// # Examples
///
/// ```
/// use multiorder::{LayerModel, PathCollection};
///
/// let paths = PathCollection::parse("A,B,C\t2\nA,B,A\n")?;
/// let layer = LayerModel::fit(&paths, 1)?;
/// assert_eq!(layer.probability_by_labels(&["B"], "C"), Some(2.0 / 3.0));
/// assert_eq!(layer.probability_by_labels(&["B"], "B"), None);
/// # Ok::<(), multiorder::Error>(())
/// ```
#[derive(Debug, Clone)]
pub struct LayerModel {
    order: usize,
    index: Arc<VertexIndex>,
    histories: HashMap<Box<[u32]>, SuccessorTable>,
    window_total: u64,
}

impl LayerModel {
    /// Estimate the order-`k` layer from a collection's windows of `k + 1`
    /// vertices.
    ///
    /// # Errors
    ///
    /// [`Error::EmptyLayer`] when no path is long enough to contain a single
    /// window, which also covers the empty collection.
    pub fn fit(paths: &PathCollection, order: usize) -> Result<Self> {
        let mut histories: HashMap<Box<[u32]>, SuccessorTable> = HashMap::new();
        let mut window_total = 0u64;
        for (sequence, frequency) in paths.iter() {
            for window in sequence.windows(order + 1) {
                let (history, last) = window.split_at(order);
                let successor = last[0];
                window_total += frequency;
                if !histories.contains_key(history) {
                    histories.insert(
                        history.into(),
                        SuccessorTable {
                            total: 0,
                            transitions: Vec::new(),
                        },
                    );
                }
                let table = histories.get_mut(history).expect("inserted above");
                table.total += frequency;
                match table
                    .transitions
                    .binary_search_by_key(&successor, |t| t.vertex)
                {
                    Ok(found) => table.transitions[found].count += frequency,
                    Err(at) => table.transitions.insert(
                        at,
                        Transition {
                            vertex: successor,
                            count: frequency,
                            probability: 0.0,
                        },
                    ),
                }
            }
        }
        if histories.is_empty() {
            return Err(Error::EmptyLayer {
                order,
                max_order: paths.max_length().unwrap_or(0),
            });
        }
        for table in histories.values_mut() {
            for transition in &mut table.transitions {
                transition.probability = transition.count as f64 / table.total as f64;
            }
        }
        Ok(Self {
            order,
            index: Arc::clone(paths.index()),
            histories,
            window_total,
        })
    }

    /// The order `k` this layer was estimated at.
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn index(&self) -> &Arc<VertexIndex> {
        &self.index
    }

    /// Number of distinct observed histories.
    pub fn history_count(&self) -> usize {
        self.histories.len()
    }

    /// Total frequency-weighted number of windows the layer was estimated
    /// from.
    pub fn window_total(&self) -> u64 {
        self.window_total
    }

    /// Natural log of the transition probability, or negative infinity for
    /// transitions never observed after `history`.
    ///
    /// # Errors
    ///
    /// [`Error::HistoryLength`] when `history` does not have exactly
    /// [`order`](Self::order) vertices.
    pub fn transition_log_prob(&self, history: &[u32], vertex: u32) -> Result<f64> {
        Ok(match self.transition(history, vertex)? {
            Some(transition) => transition.probability.ln(),
            None => f64::NEG_INFINITY,
        })
    }

    /// The estimated transition after `history`, or `None` if that exact
    /// transition was never observed.
    ///
    /// # Errors
    ///
    /// [`Error::HistoryLength`] when the history length does not match the
    /// layer order.
    pub fn transition(&self, history: &[u32], vertex: u32) -> Result<Option<Transition>> {
        if history.len() != self.order {
            return Err(Error::HistoryLength {
                expected: self.order,
                actual: history.len(),
            });
        }
        Ok(self.histories.get(history).and_then(|table| {
            table
                .transitions
                .binary_search_by_key(&vertex, |t| t.vertex)
                .ok()
                .map(|found| table.transitions[found])
        }))
    }

    /// Transition probability looked up by labels; `None` when the history
    /// or transition was never observed or a label is unknown.
    pub fn probability_by_labels(&self, history: &[&str], vertex: &str) -> Option<f64> {
        let ids: Option<Vec<u32>> = history.iter().map(|l| self.index.id(l)).collect();
        let ids = ids?;
        if ids.len() != self.order {
            return None;
        }
        let vertex = self.index.id(vertex)?;
        self.transition(&ids, vertex)
            .ok()
            .flatten()
            .map(|t| t.probability)
    }

    /// Observed histories with their successor transitions, sorted by
    /// history.
    pub fn iter(&self) -> impl Iterator<Item = (&[u32], &[Transition])> {
        let mut keys: Vec<&[u32]> = self.histories.keys().map(|k| k.as_ref()).collect();
        keys.sort_unstable();
        keys.into_iter()
            .map(move |key| (key, self.histories[key].transitions.as_slice()))
    }

    /// Render the layer as tab-separated `history<TAB>vertex<TAB>count<TAB>
    /// probability` rows, histories joined by the path separator and sorted
    /// lexicographically.
    pub fn write_tsv(&self) -> String {
        let mut out = String::new();
        for (history, transitions) in self.iter() {
            for transition in transitions {
                let mut first = true;
                for &v in history {
                    if !first {
                        out.push(',');
                    }
                    out.push_str(self.index.label(v));
                    first = false;
                }
                if history.is_empty() {
                    // The order-0 layer conditions on nothing.
                    out.push('*');
                }
                writeln!(
                    out,
                    "\t{}\t{}\t{}",
                    self.index.label(transition.vertex),
                    transition.count,
                    transition.probability,
                )
                .expect("writing to a string cannot fail");
            }
        }
        out
    }

    /// The layer's state graph: states are the distinct histories of
    /// `order - 1` vertices observed anywhere in the data, and each observed
    /// window of `order` vertices induces the edge from its prefix state to
    /// its suffix state.
    ///
    /// For order 1 this is exactly the observed first-order graph.
    ///
    /// # Errors
    ///
    /// [`Error::InvalidParameter`] for order 0, which has no graph view.
    pub fn state_graph(&self, paths: &PathCollection) -> Result<StateGraph> {
        StateGraph::from_paths(paths, self.order)
    }
}

/// Graph over the order-`k` states (histories of `k - 1` vertices) of a path
/// collection.
#[derive(Debug)]
pub struct StateGraph {
    order: usize,
    index: Arc<VertexIndex>,
    states: Vec<Box<[u32]>>,
    out: Vec<Vec<u32>>,
    edge_count: usize,
}

impl StateGraph {
    /// Build the order-`k` state graph of a collection.
    ///
    /// States are the observed windows of `k` vertices (so for `k = 1`, the
    /// vertices themselves) and edges come from the observed windows of
    /// `k + 1` vertices, connecting each window's length-`k` prefix to its
    /// length-`k` suffix — consecutive states overlap in `k - 1` vertices.
    /// States are sorted lexicographically, making the construction
    /// independent of input order.
    ///
    /// # Errors
    ///
    /// [`Error::InvalidParameter`] for `k = 0`; [`Error::EmptyLayer`] when
    /// the collection has no window of `k - 1` vertices.
    pub fn from_paths(paths: &PathCollection, order: usize) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidParameter {
                parameter: "order",
                message: "the order-0 layer has no state graph".into(),
            });
        }
        let mut states: Vec<Box<[u32]>> = paths
            .sub_path_counts(order - 1)
            .into_keys()
            .collect();
        if states.is_empty() {
            return Err(Error::EmptyLayer {
                order,
                max_order: paths.max_length().unwrap_or(0),
            });
        }
        states.sort_unstable();
        let positions: HashMap<&[u32], u32> = states
            .iter()
            .enumerate()
            .map(|(i, s)| (s.as_ref(), i as u32))
            .collect();
        let mut out: Vec<Vec<u32>> = vec![Vec::new(); states.len()];
        let mut edge_count = 0;
        for window in paths.sub_path_counts(order).into_keys() {
            let source = positions[&window[..order]];
            let target = positions[&window[1..]];
            let targets = &mut out[source as usize];
            if let Err(at) = targets.binary_search(&target) {
                targets.insert(at, target);
                edge_count += 1;
            }
        }
        Ok(Self {
            order,
            index: Arc::clone(paths.index()),
            states,
            out,
            edge_count,
        })
    }

    /// The order `k` of the layer this graph belongs to.
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn index(&self) -> &Arc<VertexIndex> {
        &self.index
    }

    pub fn state_count(&self) -> usize {
        self.states.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    /// The `order` vertices of a state.
    pub fn state(&self, state: u32) -> &[u32] {
        &self.states[state as usize]
    }

    /// Sorted out-neighbor states.
    pub fn out_neighbors(&self, state: u32) -> &[u32] {
        &self.out[state as usize]
    }

    /// Position of a state, if present.
    pub fn position(&self, state: &[u32]) -> Option<u32> {
        self.states
            .binary_search_by(|s| s.as_ref().cmp(state))
            .ok()
            .map(|i| i as u32)
    }
}
