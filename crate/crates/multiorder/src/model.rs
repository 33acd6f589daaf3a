//! Multi-order models, graph-aware model comparison, and order selection.
//!
//! A multi-order model of maximum order `K` stacks the layers of orders
//! `0..=K`: a path's probability starts with the order-0 layer for its first
//! vertex, conditions each following vertex on the full history through
//! layers of increasing order, and from position `K` onwards uses the
//! order-`K` layer alone. Paths shorter than `K` simply stop climbing early,
//! so one model assigns a proper probability to paths of every observed
//! length.
//!
//! Models of increasing maximum order are nested, which makes consecutive
//! pairs comparable by a likelihood-ratio test. The crucial ingredient is
//! the number of free parameters: transitions that the underlying graph
//! forbids are not parameters at all, so the degrees of freedom count
//! feasible histories via exact walk counts rather than the dense
//! `|V|^k (|V|-1)` formula, which is recovered exactly on complete graphs
//! with self-loops.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::DirectedGraph;
use crate::layer::LayerModel;
use crate::path::PathCollection;
use crate::stats::{chi_squared_sf, KahanSum};

/// Default cap on the maximum order considered by [`select_order`].
pub const DEFAULT_MAX_ORDER: usize = 10;
/// Default significance threshold for [`select_order`].
pub const DEFAULT_EPSILON: f64 = 0.001;
/// Label reserved by [`baseline_order_aic_bic`] to separate concatenated
/// paths.
pub const STOP_LABEL: &str = "<stop>";

/// A stack of Markov layers of orders `0..=max_order` over one graph.
///
/// # Examples
///
/// ```
/// use multiorder::{MultiOrderModel, PathCollection};
///
/// let paths = PathCollection::parse("A,B,C\t2\nA,B,A\n")?;
/// let model = MultiOrderModel::fit(&paths, 2)?;
/// let index = paths.index();
/// let abc: Vec<u32> = ["A", "B", "C"].iter().map(|l| index.id(l).unwrap()).collect();
/// let expected = (8.0f64 / 27.0).ln();
/// assert!((model.path_log_prob(&abc)? - expected).abs() < 1e-12);
/// # Ok::<(), multiorder::Error>(())
/// ```
#[derive(Debug, Clone)]
pub struct MultiOrderModel {
    layers: Vec<Arc<LayerModel>>,
    graph: Arc<DirectedGraph>,
    max_order: usize,
}

impl MultiOrderModel {
    /// Fit a model of maximum order `max_order`, deriving the constraining
    /// graph from the collection's own transitions.
    ///
    /// # Errors
    ///
    /// [`Error::EmptyLayer`] when `max_order` exceeds the longest path.
    pub fn fit(paths: &PathCollection, max_order: usize) -> Result<Self> {
        let graph = Arc::new(DirectedGraph::from_paths(paths));
        Self::fit_with_graph(paths, max_order, graph)
    }

    /// Fit a model whose degrees of freedom are computed against an
    /// explicitly supplied graph, which must contain every transition the
    /// paths use (it may contain more).
    ///
    /// # Errors
    ///
    /// [`Error::MissingEdge`] when the graph is not a superset of the
    /// observed transitions; [`Error::EmptyLayer`] when `max_order` exceeds
    /// the longest path.
    pub fn fit_with_graph(
        paths: &PathCollection,
        max_order: usize,
        graph: Arc<DirectedGraph>,
    ) -> Result<Self> {
        graph.covers(paths)?;
        let layers = (0..=max_order)
            .map(|order| LayerModel::fit(paths, order).map(Arc::new))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            layers,
            graph,
            max_order,
        })
    }

    fn from_parts(layers: Vec<Arc<LayerModel>>, graph: Arc<DirectedGraph>) -> Self {
        let max_order = layers.len() - 1;
        Self {
            layers,
            graph,
            max_order,
        }
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    pub fn graph(&self) -> &Arc<DirectedGraph> {
        &self.graph
    }

    /// The fitted layer of a given order.
    ///
    /// # Panics
    ///
    /// Panics if `order > max_order`.
    pub fn layer(&self, order: usize) -> &LayerModel {
        &self.layers[order]
    }

    /// Natural log of the probability the model assigns to a vertex
    /// sequence.
    ///
    /// For a sequence `v_0..v_l`, positions `1..min(max_order, l)` are
    /// scored by the layer matching their history length, and every later
    /// position by the order-`max_order` layer; position 0 is scored by the
    /// order-0 layer. Sequences using transitions never observed at the
    /// responsible order get negative infinity.
    ///
    /// # Errors
    ///
    /// [`Error::InvalidParameter`] for an empty sequence.
    pub fn path_log_prob(&self, sequence: &[u32]) -> Result<f64> {
        if sequence.is_empty() {
            return Err(Error::InvalidParameter {
                parameter: "sequence",
                message: "a path must contain at least one vertex".into(),
            });
        }
        let length = sequence.len() - 1;
        let mut total = 0.0;
        for k in 0..self.max_order.min(length + 1) {
            total += self.layers[k].transition_log_prob(&sequence[..k], sequence[k])?;
            if total == f64::NEG_INFINITY {
                return Ok(total);
            }
        }
        for i in self.max_order..=length {
            let history = &sequence[i - self.max_order..i];
            total += self.layers[self.max_order].transition_log_prob(history, sequence[i])?;
            if total == f64::NEG_INFINITY {
                return Ok(total);
            }
        }
        Ok(total)
    }

    /// Frequency-weighted log-likelihood of a collection under this model.
    ///
    /// # Errors
    ///
    /// [`Error::NonFiniteLikelihood`] if any path has probability zero,
    /// which cannot happen for the collection the model was fitted on;
    /// [`Error::EmptyCollection`] for an empty collection.
    pub fn log_likelihood(&self, paths: &PathCollection) -> Result<f64> {
        if paths.distinct_count() == 0 {
            return Err(Error::EmptyCollection);
        }
        let mut total = KahanSum::default();
        for (sequence, frequency) in paths.iter() {
            let log_prob = self.path_log_prob(sequence)?;
            if !log_prob.is_finite() {
                return Err(Error::NonFiniteLikelihood {
                    order: self.max_order,
                });
            }
            total.add(frequency as f64 * log_prob);
        }
        Ok(total.value())
    }

    /// Degrees of freedom of this model under its graph; see
    /// [`degrees_of_freedom`].
    pub fn degrees_of_freedom(&self) -> Result<u128> {
        degrees_of_freedom(&self.graph, self.max_order)
    }
}

/// Number of free parameters of a multi-order model of maximum order
/// `max_order` constrained by `graph`.
///
/// The order-0 layer contributes `|V| - 1`. Each layer `k >= 1` contributes
/// one parameter per feasible transition minus one per feasible history that
/// can continue at all: the number of walks of length `k` minus the number
/// of walks of length `k - 1` ending in a vertex with successors. On a
/// complete graph with self-loops this reduces to the familiar
/// `|V|^k (|V| - 1)` per layer.
///
/// # Errors
///
/// [`Error::CountOverflow`] if a walk count exceeds `u128`;
/// [`Error::InvalidParameter`] for a graph with no vertices.
pub fn degrees_of_freedom(graph: &DirectedGraph, max_order: usize) -> Result<u128> {
    if graph.vertex_count() == 0 {
        return Err(Error::InvalidParameter {
            parameter: "graph",
            message: "degrees of freedom need at least one vertex".into(),
        });
    }
    let mut dof = graph.vertex_count() as u128 - 1;
    if max_order == 0 {
        return Ok(dof);
    }
    for (k, counts) in graph.walk_count_table(max_order)?.iter().enumerate() {
        debug_assert!(
            counts.walks >= counts.extendable_prefixes,
            "every extendable prefix starts at least one walk"
        );
        dof = dof
            .checked_add(counts.walks - counts.extendable_prefixes)
            .ok_or(Error::CountOverflow { order: k + 1 })?;
    }
    Ok(dof)
}

/// Which statistic a likelihood-ratio test feeds into the chi-squared
/// survival function.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum TestStatistic {
    /// `2 * (logL_alt - logL_null)`, the form required by the asymptotic
    /// chi-squared distribution of the likelihood ratio.
    #[default]
    Wilks,
    /// `logL_alt - logL_null` without the factor 2, kept for comparison
    /// studies.
    LogRatio,
}

/// Outcome of one likelihood-ratio test between nested models.
#[derive(Debug, Clone, Serialize)]
pub struct OrderTest {
    pub null_order: usize,
    pub alt_order: usize,
    pub log_likelihood_null: f64,
    pub log_likelihood_alt: f64,
    pub dof_null: u128,
    pub dof_alt: u128,
    pub statistic: f64,
    pub p_value: f64,
}

/// Test whether the higher-order model explains `paths` significantly
/// better than the nested lower-order model.
///
/// Both models must be fitted on `paths` against the same graph. The
/// statistic (see [`TestStatistic`]) is referred to a chi-squared
/// distribution whose degrees of freedom are the difference of the two
/// models' graph-constrained parameter counts.
///
/// # Errors
///
/// [`Error::DegenerateTest`] when the parameter counts coincide (for
/// example on a graph of pure out-degree-1 chains, where nothing is free to
/// vary); [`Error::InvalidParameter`] when the models are not nested or use
/// different graphs.
pub fn likelihood_ratio_test(
    paths: &PathCollection,
    null: &MultiOrderModel,
    alt: &MultiOrderModel,
    statistic: TestStatistic,
) -> Result<OrderTest> {
    if alt.max_order() <= null.max_order() {
        return Err(Error::InvalidParameter {
            parameter: "models",
            message: format!(
                "alternative order {} must exceed null order {}",
                alt.max_order(),
                null.max_order()
            ),
        });
    }
    let same_graph = Arc::ptr_eq(&null.graph, &alt.graph)
        || (null.graph.vertex_count() == alt.graph.vertex_count()
            && null.graph.edge_count() == alt.graph.edge_count()
            && null.graph.edges().eq(alt.graph.edges()));
    if !same_graph {
        return Err(Error::InvalidParameter {
            parameter: "models",
            message: "both models must be constrained by the same graph".into(),
        });
    }
    let log_likelihood_null = null.log_likelihood(paths)?;
    let log_likelihood_alt = alt.log_likelihood(paths)?;
    let dof_null = null.degrees_of_freedom()?;
    let dof_alt = alt.degrees_of_freedom()?;
    if dof_alt <= dof_null {
        return Err(Error::DegenerateTest {
            null_order: null.max_order(),
            alt_order: alt.max_order(),
        });
    }
    let extra_dof = u64::try_from(dof_alt - dof_null).map_err(|_| Error::InvalidParameter {
        parameter: "models",
        message: "degrees-of-freedom difference exceeds u64 range".into(),
    })?;
    // The alternative contains the null, so its maximized likelihood cannot
    // be smaller; tiny negative differences are floating-point noise.
    let improvement = (log_likelihood_alt - log_likelihood_null).max(0.0);
    let value = match statistic {
        TestStatistic::Wilks => 2.0 * improvement,
        TestStatistic::LogRatio => improvement,
    };
    Ok(OrderTest {
        null_order: null.max_order(),
        alt_order: alt.max_order(),
        log_likelihood_null,
        log_likelihood_alt,
        dof_null,
        dof_alt,
        statistic: value,
        p_value: chi_squared_sf(value, extra_dof)?,
    })
}

/// Options for [`select_order`].
#[derive(Debug, Clone)]
pub struct SelectionOptions {
    /// Largest maximum order considered; additionally capped by the longest
    /// observed path.
    pub max_order: usize,
    /// Significance threshold: a test rejects the simpler model when its
    /// p-value is strictly below this.
    pub epsilon: f64,
    pub statistic: TestStatistic,
}

impl Default for SelectionOptions {
    fn default() -> Self {
        Self {
            max_order: DEFAULT_MAX_ORDER,
            epsilon: DEFAULT_EPSILON,
            statistic: TestStatistic::default(),
        }
    }
}

/// Result of [`select_order`]: the detected maximum order and every test
/// that was run.
#[derive(Debug, Clone, Serialize)]
pub struct OrderSelection {
    /// Detected maximum order: the largest order reachable from 1 through
    /// an unbroken chain of rejections, and 1 when the first test already
    /// fails to reject.
    pub k_opt: usize,
    /// The significance threshold the selection used.
    pub epsilon: f64,
    pub tests: Vec<OrderTest>,
}

/// Select the maximum order supported by the data via nested
/// likelihood-ratio tests of consecutive orders.
///
/// Orders are tested pairwise — 1 against 2, 2 against 3, and so on up to
/// `options.max_order` (capped by the longest path). Testing stops at the
/// first non-rejection, at a degenerate test, or at the cap; `k_opt` is the
/// alternative order of the last rejecting test, or 1 when no test rejects.
/// Ties at `epsilon` count as non-rejection.
///
/// # Errors
///
/// [`Error::EmptyCollection`] for an empty collection,
/// [`Error::MissingEdge`] when `graph` does not cover the paths, and
/// [`Error::InvalidParameter`] for out-of-domain options.
///
/// # Examples
///
/// ```
/// use multiorder::{select_order_derived, PathCollection, SelectionOptions};
///
/// let paths = PathCollection::parse("A,B,C\t30\nD,B,A\t30\n")?;
/// let selection = select_order_derived(&paths, &SelectionOptions::default())?;
/// assert_eq!(selection.k_opt, 2);
/// # Ok::<(), multiorder::Error>(())
/// ```
pub fn select_order(
    paths: &PathCollection,
    graph: Arc<DirectedGraph>,
    options: &SelectionOptions,
) -> Result<OrderSelection> {
    if options.max_order == 0 {
        return Err(Error::InvalidParameter {
            parameter: "max_order",
            message: "at least order 1 must be considered".into(),
        });
    }
    if !(options.epsilon > 0.0 && options.epsilon < 1.0) {
        return Err(Error::InvalidParameter {
            parameter: "epsilon",
            message: format!("significance threshold must lie in (0,1), got {}", options.epsilon),
        });
    }
    let longest = paths.max_length().ok_or(Error::EmptyCollection)?;
    graph.covers(paths)?;
    let cap = options.max_order.min(longest);
    let mut k_opt = 1;
    let mut tests = Vec::new();
    if cap >= 2 {
        let mut layers: Vec<Arc<LayerModel>> = Vec::with_capacity(cap + 1);
        for order in 0..=1 {
            layers.push(Arc::new(LayerModel::fit(paths, order)?));
        }
        for null_order in 1..cap {
            let alt_order = null_order + 1;
            layers.push(Arc::new(LayerModel::fit(paths, alt_order)?));
            let null_model =
                MultiOrderModel::from_parts(layers[..=null_order].to_vec(), Arc::clone(&graph));
            let alt_model =
                MultiOrderModel::from_parts(layers[..=alt_order].to_vec(), Arc::clone(&graph));
            match likelihood_ratio_test(paths, &null_model, &alt_model, options.statistic) {
                Ok(test) => {
                    let rejected = test.p_value < options.epsilon;
                    tests.push(test);
                    if rejected {
                        k_opt = alt_order;
                    } else {
                        break;
                    }
                }
                // Zero extra parameters: the larger model cannot improve,
                // which counts as a non-rejection.
                Err(Error::DegenerateTest { .. }) => break,
                Err(other) => return Err(other),
            }
        }
    }
    Ok(OrderSelection {
        k_opt,
        epsilon: options.epsilon,
        tests,
    })
}

/// [`select_order`] against the graph derived from the collection itself.
pub fn select_order_derived(
    paths: &PathCollection,
    options: &SelectionOptions,
) -> Result<OrderSelection> {
    let graph = Arc::new(DirectedGraph::from_paths(paths));
    select_order(paths, graph, options)
}

/// AIC and BIC of one standard Markov chain order fitted to the
/// concatenated path corpus.
#[derive(Debug, Clone, Serialize)]
pub struct BaselineOrder {
    pub order: usize,
    pub log_likelihood: f64,
    /// Dense parameter count `|A|^k (|A| - 1)` over the stop-extended
    /// alphabet, as a float because it grows geometrically.
    pub parameters: f64,
    /// Number of scored transitions (sequence length minus the order).
    pub scored_transitions: u64,
    pub aic: f64,
    pub bic: f64,
}

/// Result of [`baseline_order_aic_bic`].
#[derive(Debug, Clone, Serialize)]
pub struct BaselineSelection {
    /// Order minimizing AIC (smallest order on ties).
    pub aic_order: usize,
    /// Order minimizing BIC (smallest order on ties).
    pub bic_order: usize,
    pub orders: Vec<BaselineOrder>,
}

/// Classical single-order Markov chain selection by AIC and BIC, for
/// comparison against the nested-test procedure.
///
/// All path instances, expanded by frequency and sorted by label sequence
/// so the result is independent of input order, are joined into one long
/// sequence with the reserved [`STOP_LABEL`] token between instances.
/// Standard order-`k` chains over the stop-extended alphabet are fitted for
/// `k = 0..=max_order` (capped so at least one transition is scored), with
/// the dense parameter count `|A|^k (|A| - 1)`. Runtime is proportional to
/// the frequency-expanded corpus length.
///
/// # Errors
///
/// [`Error::ReservedLabel`] when a vertex is literally labeled `<stop>`;
/// [`Error::EmptyCollection`] for an empty collection.
pub fn baseline_order_aic_bic(
    paths: &PathCollection,
    max_order: usize,
) -> Result<BaselineSelection> {
    if paths.distinct_count() == 0 {
        return Err(Error::EmptyCollection);
    }
    if paths.index().id(STOP_LABEL).is_some() {
        return Err(Error::ReservedLabel {
            label: STOP_LABEL.to_owned(),
        });
    }
    let index = paths.index();
    let stop = index.len() as u32;
    let alphabet = index.len() as f64 + 1.0;

    // Deterministic instance order: sort distinct sequences by their label
    // sequences so differently ordered input files concatenate identically.
    let mut ordered: Vec<(&[u32], u64)> = paths.iter().collect();
    ordered.sort_by(|(a, _), (b, _)| {
        let a = a.iter().map(|&v| index.label(v));
        let b = b.iter().map(|&v| index.label(v));
        a.cmp(b)
    });

    let mut total_symbols: u64 = 0;
    for (sequence, frequency) in &ordered {
        total_symbols = total_symbols
            .checked_add(frequency.checked_mul(sequence.len() as u64).ok_or(
                Error::InvalidParameter {
                    parameter: "frequency",
                    message: "expanded corpus length exceeds u64 range".into(),
                },
            )?)
            .and_then(|t| t.checked_add(*frequency))
            .ok_or(Error::InvalidParameter {
                parameter: "frequency",
                message: "expanded corpus length exceeds u64 range".into(),
            })?;
    }
    // One separator between consecutive instances: N - 1 stops.
    total_symbols -= 1;

    let highest = max_order.min(usize::try_from(total_symbols - 1).unwrap_or(usize::MAX));
    let mut orders = Vec::with_capacity(highest + 1);
    for k in 0..=highest {
        let (log_likelihood, scored) = ngram_log_likelihood(&ordered, stop, k);
        let parameters = alphabet.powi(k as i32) * (alphabet - 1.0);
        let aic = -2.0 * log_likelihood + 2.0 * parameters;
        let bic = -2.0 * log_likelihood + parameters * (scored as f64).ln();
        orders.push(BaselineOrder {
            order: k,
            log_likelihood,
            parameters,
            scored_transitions: scored,
            aic,
            bic,
        });
    }
    let pick = |key: fn(&BaselineOrder) -> f64| -> usize {
        let mut best = 0usize;
        for (i, candidate) in orders.iter().enumerate() {
            if key(candidate) < key(&orders[best]) {
                best = i;
            }
        }
        orders[best].order
    };
    Ok(BaselineSelection {
        aic_order: pick(|o| o.aic),
        bic_order: pick(|o| o.bic),
        orders,
    })
}

/// In-sample log-likelihood of the maximum-likelihood order-`k` chain on
/// the stop-joined corpus, plus the number of scored transitions.
///
/// Two passes over the symbol stream: one to count windows and contexts,
/// one to accumulate each position's log-probability in stream order, so
/// the floating-point result never depends on hash iteration order.
fn ngram_log_likelihood(ordered: &[(&[u32], u64)], stop: u32, k: usize) -> (f64, u64) {
    use std::collections::HashMap;

    let mut window_counts: HashMap<Box<[u32]>, u64> = HashMap::new();
    let mut context_counts: HashMap<Box<[u32]>, u64> = HashMap::new();
    let mut scored: u64 = 0;
    {
        let mut count = |window: &[u32]| {
            scored += 1;
            bump(&mut window_counts, window);
            bump(&mut context_counts, &window[..k]);
        };
        each_window(ordered, stop, k, &mut count);
    }

    let mut total = KahanSum::default();
    {
        let mut score = |window: &[u32]| {
            let c = window_counts[window] as f64;
            let context = context_counts[&window[..k]] as f64;
            total.add(c.ln() - context.ln());
        };
        each_window(ordered, stop, k, &mut score);
    }
    (total.value(), scored)
}

/// Run `visit` over every window of `k + 1` symbols of the stop-joined
/// frequency-expanded stream, in stream order.
fn each_window(ordered: &[(&[u32], u64)], stop: u32, k: usize, visit: &mut impl FnMut(&[u32])) {
    let mut buffer: Vec<u32> = Vec::with_capacity(k + 2);
    let push = |symbol: u32, buffer: &mut Vec<u32>| {
        if buffer.len() == k + 1 {
            buffer.remove(0);
        }
        buffer.push(symbol);
    };
    let mut first = true;
    for (sequence, frequency) in ordered {
        for _ in 0..*frequency {
            if !first {
                push(stop, &mut buffer);
                if buffer.len() == k + 1 {
                    visit(&buffer);
                }
            }
            first = false;
            for &symbol in *sequence {
                push(symbol, &mut buffer);
                if buffer.len() == k + 1 {
                    visit(&buffer);
                }
            }
        }
    }
}

fn bump(counts: &mut std::collections::HashMap<Box<[u32]>, u64>, key: &[u32]) {
    match counts.get_mut(key) {
        Some(slot) => *slot += 1,
        None => {
            counts.insert(key.into(), 1);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> PathCollection {
        PathCollection::parse("A,B,C\t2\nA,B,A\n").unwrap()
    }

    fn ids(paths: &PathCollection, labels: &[&str]) -> Vec<u32> {
        labels
            .iter()
            .map(|l| paths.index().id(l).unwrap())
            .collect()
    }

    #[test]
    fn toy_degrees_of_freedom() {
        let paths = toy();
        let graph = DirectedGraph::from_paths(&paths);
        // Order 0 has |V| - 1 = 2 free probabilities. Layer 1 adds its 3
        // feasible transitions minus 2 extendable histories; layer 2 adds
        // 3 feasible length-2 walks minus 2 extendable length-1 walks.
        assert_eq!(degrees_of_freedom(&graph, 0).unwrap(), 2);
        assert_eq!(degrees_of_freedom(&graph, 1).unwrap(), 3);
        assert_eq!(degrees_of_freedom(&graph, 2).unwrap(), 4);
    }

    #[test]
    fn complete_graph_dof_matches_dense_formula() {
        for n in 2..=5u32 {
            let mut builder = crate::path::VertexIndexBuilder::new();
            for i in 0..n {
                builder.intern(&format!("v{i}")).unwrap();
            }
            let mut edges = Vec::new();
            for s in 0..n {
                for t in 0..n {
                    edges.push((s, t));
                }
            }
            let graph = DirectedGraph::from_edges(builder.finish(), edges).unwrap();
            for max_order in 0..=4usize {
                let dense: u128 = (1..=max_order)
                    .map(|k| (n as u128).pow(k as u32) * (n as u128 - 1))
                    .sum::<u128>()
                    + (n as u128 - 1);
                assert_eq!(degrees_of_freedom(&graph, max_order).unwrap(), dense);
            }
        }
    }

    #[test]
    fn toy_path_log_prob_matches_hand_derivation() {
        let paths = toy();
        let model = MultiOrderModel::fit(&paths, 2).unwrap();
        // P(A) * P(B|A) * P(C|A,B) = 4/9 * 1 * 2/3 = 8/27.
        let abc = ids(&paths, &["A", "B", "C"]);
        let got = model.path_log_prob(&abc).unwrap();
        assert!((got - (8.0f64 / 27.0).ln()).abs() < 1e-12);
        // The unobserved continuation C -> A is impossible at this order.
        let abca = ids(&paths, &["A", "B", "C", "A"]);
        assert_eq!(model.path_log_prob(&abca).unwrap(), f64::NEG_INFINITY);
    }

    #[test]
    fn short_paths_use_only_prefix_layers() {
        let paths = toy();
        let model = MultiOrderModel::fit(&paths, 2).unwrap();
        // A path shorter than the maximum order climbs only as far as its
        // own length: P(A) * P(B|A).
        let ab = ids(&paths, &["A", "B"]);
        let got = model.path_log_prob(&ab).unwrap();
        assert!((got - (4.0f64 / 9.0).ln()).abs() < 1e-12);
        let a = ids(&paths, &["A"]);
        assert!((model.path_log_prob(&a).unwrap() - (4.0f64 / 9.0).ln()).abs() < 1e-12);
    }

    #[test]
    fn toy_log_likelihood_sums_over_frequencies() {
        let paths = toy();
        let model = MultiOrderModel::fit(&paths, 2).unwrap();
        let expected = 2.0 * (8.0f64 / 27.0).ln() + (4.0f64 / 27.0).ln();
        assert!((model.log_likelihood(&paths).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn likelihoods_are_nested() {
        let text = "A,B,C,D\t5\nB,C,A\t2\nD,A,B,C\nC,D\t7\nA,B,A\t3\n";
        let paths = PathCollection::parse(text).unwrap();
        let mut previous = f64::NEG_INFINITY;
        for max_order in 0..=3 {
            let model = MultiOrderModel::fit(&paths, max_order).unwrap();
            let ll = model.log_likelihood(&paths).unwrap();
            assert!(
                ll >= previous - 1e-9,
                "order {max_order}: {ll} < {previous}"
            );
            previous = ll;
        }
    }

    #[test]
    fn per_length_probability_mass_never_exceeds_one() {
        // Brute force over every sequence of each length. Mass may be lost
        // at histories without observed continuations (here: C), never
        // gained. For the toy data at order 1 and length 3 the surviving
        // sequences are A,B,A,B / B,A,B,C / B,A,B,A with total mass 7/27.
        let paths = toy();
        for max_order in 0..=2usize {
            let model = MultiOrderModel::fit(&paths, max_order).unwrap();
            for length in 1..=4usize {
                let n = paths.index().len() as u32;
                let mut total = 0.0;
                let mut sequence = vec![0u32; length + 1];
                loop {
                    total += model.path_log_prob(&sequence).unwrap().exp();
                    // Odometer over all n^(length+1) sequences.
                    let mut position = 0;
                    loop {
                        if position == sequence.len() {
                            break;
                        }
                        sequence[position] += 1;
                        if sequence[position] < n {
                            break;
                        }
                        sequence[position] = 0;
                        position += 1;
                    }
                    if position == sequence.len() {
                        break;
                    }
                }
                assert!(
                    total <= 1.0 + 1e-12,
                    "order {max_order} length {length}: mass {total}"
                );
                if max_order == 1 && length == 3 {
                    assert!((total - 7.0 / 27.0).abs() < 1e-12, "mass {total}");
                }
            }
        }
    }

    #[test]
    fn identical_likelihoods_give_p_one() {
        // On the toy data the order-2 layer coincides with order 1 (the
        // only length-2 history is A,B), so the test finds nothing.
        let paths = toy();
        let null = MultiOrderModel::fit(&paths, 1).unwrap();
        let alt = MultiOrderModel::fit(&paths, 2).unwrap();
        let test =
            likelihood_ratio_test(&paths, &null, &alt, TestStatistic::default()).unwrap();
        assert_eq!(test.statistic, 0.0);
        assert_eq!(test.p_value, 1.0);
        assert_eq!(test.dof_alt - test.dof_null, 1);
    }

    #[test]
    fn select_order_stops_at_first_non_rejection() {
        let paths = toy();
        let selection = select_order_derived(&paths, &SelectionOptions::default()).unwrap();
        assert_eq!(selection.k_opt, 1);
        assert_eq!(selection.tests.len(), 1);
        assert!(selection.tests[0].p_value >= selection.epsilon);
    }

    #[test]
    fn select_order_detects_second_order_data() {
        // Two path families that disagree at order 2: after A,B the next
        // vertex is always C, after D,B always A, while order 1 sees B
        // going to C or A evenly. Hand computation: logL gain is 60 ln 2,
        // the statistic 120 ln 2, against 2 extra degrees of freedom.
        let paths = PathCollection::parse("A,B,C\t30\nD,B,A\t30\n").unwrap();
        let selection = select_order_derived(&paths, &SelectionOptions::default()).unwrap();
        assert_eq!(selection.k_opt, 2);
        assert_eq!(selection.tests.len(), 1);
        let test = &selection.tests[0];
        assert!((test.statistic - 120.0 * 2.0f64.ln()).abs() < 1e-9);
        assert_eq!(test.dof_null, 4);
        assert_eq!(test.dof_alt, 6);
        assert!(test.p_value < 1e-12);
    }

    #[test]
    fn no_factor_two_statistic_is_halved() {
        let paths = PathCollection::parse("A,B,C\t30\nD,B,A\t30\n").unwrap();
        let options = SelectionOptions {
            statistic: TestStatistic::LogRatio,
            ..SelectionOptions::default()
        };
        let selection = select_order_derived(&paths, &options).unwrap();
        let test = &selection.tests[0];
        assert!((test.statistic - 60.0 * 2.0f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn degenerate_tests_count_as_non_rejection() {
        // On a pure cycle every vertex has out-degree 1: no layer adds
        // parameters, so the chain of tests never starts.
        let paths = PathCollection::parse("A,B,C,A,B\t4\n").unwrap();
        let selection = select_order_derived(&paths, &SelectionOptions::default()).unwrap();
        assert_eq!(selection.k_opt, 1);
        assert!(selection.tests.is_empty());
    }

    #[test]
    fn max_order_one_runs_zero_tests() {
        let paths = toy();
        let options = SelectionOptions {
            max_order: 1,
            ..SelectionOptions::default()
        };
        let selection = select_order_derived(&paths, &options).unwrap();
        assert_eq!(selection.k_opt, 1);
        assert!(selection.tests.is_empty());
    }

    #[test]
    fn selection_rejects_bad_options() {
        let paths = toy();
        for epsilon in [0.0, 1.0, -0.5, f64::NAN] {
            let options = SelectionOptions {
                epsilon,
                ..SelectionOptions::default()
            };
            assert!(select_order_derived(&paths, &options).is_err());
        }
        let options = SelectionOptions {
            max_order: 0,
            ..SelectionOptions::default()
        };
        assert!(select_order_derived(&paths, &options).is_err());
    }

    #[test]
    fn baseline_toy_values_match_hand_computation() {
        // Instances sorted by label sequence: A,B,A once, then A,B,C
        // twice, joined by stops: A B A . A B C . A B C (11 symbols).
        let paths = toy();
        let baseline = baseline_order_aic_bic(&paths, 1).unwrap();
        assert_eq!(baseline.orders.len(), 2);

        let order0 = &baseline.orders[0];
        let expected_ll0 = 4.0 * (4.0f64 / 11.0).ln()
            + 3.0 * (3.0f64 / 11.0).ln()
            + 2.0 * (2.0f64 / 11.0).ln()
            + 2.0 * (2.0f64 / 11.0).ln();
        assert!((order0.log_likelihood - expected_ll0).abs() < 1e-12);
        assert_eq!(order0.scored_transitions, 11);
        assert_eq!(order0.parameters, 3.0);
        assert!((order0.aic - (-2.0 * expected_ll0 + 6.0)).abs() < 1e-12);
        assert!((order0.bic - (-2.0 * expected_ll0 + 3.0 * 11.0f64.ln())).abs() < 1e-12);

        let order1 = &baseline.orders[1];
        let expected_ll1 = 3.0 * (3.0f64 / 4.0).ln()
            + (1.0f64 / 3.0).ln()
            + (1.0f64 / 4.0).ln()
            + 2.0 * (2.0f64 / 3.0).ln();
        assert!((order1.log_likelihood - expected_ll1).abs() < 1e-12);
        assert_eq!(order1.scored_transitions, 10);
        assert_eq!(order1.parameters, 12.0);
    }

    #[test]
    fn baseline_prefers_order_one_on_deterministic_repetition() {
        let paths = PathCollection::parse("A,B,C\t1000\n").unwrap();
        let baseline = baseline_order_aic_bic(&paths, 3).unwrap();
        assert!(baseline.aic_order >= 1, "aic: {}", baseline.aic_order);
        assert!(baseline.bic_order >= 1, "bic: {}", baseline.bic_order);
    }

    #[test]
    fn baseline_rejects_reserved_label() {
        let paths = PathCollection::from_labeled(&[(&["A", "<stop>"], 1)]).unwrap();
        let err = baseline_order_aic_bic(&paths, 1).unwrap_err();
        assert!(matches!(err, Error::ReservedLabel { .. }), "{err}");
    }

    #[test]
    fn baseline_is_input_order_invariant() {
        let a = PathCollection::parse("A,B,C\t2\nD,B,A\t5\nB,B\n").unwrap();
        let b = PathCollection::parse("B,B\nD,B,A\t5\nA,B,C\t2\n").unwrap();
        let left = baseline_order_aic_bic(&a, 2).unwrap();
        let right = baseline_order_aic_bic(&b, 2).unwrap();
        for (l, r) in left.orders.iter().zip(right.orders.iter()) {
            assert_eq!(l.log_likelihood.to_bits(), r.log_likelihood.to_bits());
        }
    }

    #[test]
    fn empty_collection_is_rejected_everywhere() {
        let paths = PathCollection::parse("# nothing\n").unwrap();
        assert!(matches!(
            select_order_derived(&paths, &SelectionOptions::default()),
            Err(Error::EmptyCollection)
        ));
        assert!(matches!(
            baseline_order_aic_bic(&paths, 2),
            Err(Error::EmptyCollection)
        ));
    }

    #[test]
    fn detection_report_serializes_with_stable_keys() {
        let paths = PathCollection::parse("A,B,C\t30\nD,B,A\t30\n").unwrap();
        let selection = select_order_derived(&paths, &SelectionOptions::default()).unwrap();
        let json = serde_json::to_string(&selection).unwrap();
        let k_opt = json.find("\"k_opt\"").unwrap();
        let epsilon = json.find("\"epsilon\"").unwrap();
        let tests = json.find("\"tests\"").unwrap();
        assert!(k_opt < epsilon && epsilon < tests, "{json}");
    }
}
