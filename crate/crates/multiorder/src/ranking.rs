//! Vertex rankings: ground-truth visitation probabilities, PageRank on
//! higher-order state graphs with projection back to vertices, and rank
//! comparison metrics.
//!
//! Running PageRank on the order-`k` state graph instead of the plain graph
//! lets the ranking absorb correlations that only multi-step paths reveal;
//! projecting each state's score evenly onto its `k` vertices brings the
//! result back to an ordinary vertex ranking that can be compared against
//! the empirical visitation frequencies.

use std::fmt::Write as _;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::layer::{LayerModel, StateGraph};
use crate::path::{PathCollection, VertexIndex};

/// Damping factor used when none is specified.
pub const DEFAULT_ALPHA: f64 = 0.85;
/// L1 convergence tolerance used when none is specified.
pub const DEFAULT_TOLERANCE: f64 = 1e-12;
/// Iteration cap used when none is specified.
pub const DEFAULT_MAX_ITERATIONS: usize = 1000;

/// A real-valued score per vertex of one index.
#[derive(Debug, Clone)]
pub struct VertexScores {
    index: Arc<VertexIndex>,
    values: Vec<f64>,
}

impl VertexScores {
    pub(crate) fn new(index: Arc<VertexIndex>, values: Vec<f64>) -> Self {
        debug_assert_eq!(index.len(), values.len());
        Self { index, values }
    }

    /// Wrap externally supplied scores — one finite value per vertex of
    /// `index`, in id order — so they can be compared against computed
    /// rankings with [`kendall_tau`] or [`auc_top_fraction`].
    ///
    /// # Errors
    ///
    /// [`Error::InvalidParameter`] when the number of values does not match
    /// the index or any value is not finite.
    pub fn from_values(index: Arc<VertexIndex>, values: Vec<f64>) -> Result<Self> {
        if values.len() != index.len() {
            return Err(Error::InvalidParameter {
                parameter: "values",
                message: format!(
                    "got {} scores for {} vertices",
                    values.len(),
                    index.len()
                ),
            });
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter {
                parameter: "values",
                message: format!("scores must be finite, got {bad}"),
            });
        }
        Ok(Self::new(index, values))
    }

    pub fn index(&self) -> &Arc<VertexIndex> {
        &self.index
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Score of a vertex by dense id.
    ///
    /// # Panics
    ///
    /// Panics if `id` is not in the index.
    pub fn get(&self, id: u32) -> f64 {
        self.values[id as usize]
    }

    pub fn get_by_label(&self, label: &str) -> Option<f64> {
        self.index.id(label).map(|id| self.get(id))
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Labels and scores in id order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.values
            .iter()
            .enumerate()
            .map(|(id, &score)| (self.index.label(id as u32), score))
    }

    /// Labels and scores, highest score first; equal scores ordered by
    /// label so the output is deterministic.
    pub fn sorted_descending(&self) -> Vec<(&str, f64)> {
        let mut rows: Vec<(&str, f64)> = self.iter().collect();
        rows.sort_by(|(la, sa), (lb, sb)| {
            sb.partial_cmp(sa)
                .expect("scores are finite")
                .then_with(|| la.cmp(lb))
        });
        rows
    }

    /// Render as `vertex<TAB>score` lines, highest score first.
    pub fn write_tsv(&self) -> String {
        let mut out = String::new();
        for (label, score) in self.sorted_descending() {
            writeln!(out, "{label}\t{score}").expect("writing to a string cannot fail");
        }
        out
    }
}

/// Empirical probability that a uniformly chosen vertex traversal lands on
/// each vertex: position counts over all paths, frequency-weighted,
/// normalized by the total number of traversed positions.
///
/// # Errors
///
/// [`Error::EmptyCollection`] when there are no paths.
pub fn visitation_probabilities(paths: &PathCollection) -> Result<VertexScores> {
    if paths.distinct_count() == 0 {
        return Err(Error::EmptyCollection);
    }
    let mut counts = vec![0u64; paths.index().len()];
    let mut total = 0u64;
    for (sequence, frequency) in paths.iter() {
        for &vertex in sequence {
            counts[vertex as usize] += frequency;
        }
        total += frequency * sequence.len() as u64;
    }
    let values = counts.iter().map(|&c| c as f64 / total as f64).collect();
    Ok(VertexScores::new(Arc::clone(paths.index()), values))
}

/// Options for [`higher_order_pagerank`] and [`pagerank_pipeline`].
#[derive(Debug, Clone)]
pub struct PageRankOptions {
    /// Damping factor in (0, 1).
    pub alpha: f64,
    /// L1 change below which iteration stops.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for PageRankOptions {
    fn default() -> Self {
        Self {
            alpha: DEFAULT_ALPHA,
            tolerance: DEFAULT_TOLERANCE,
            max_iterations: DEFAULT_MAX_ITERATIONS,
        }
    }
}

impl PageRankOptions {
    fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidParameter {
                parameter: "alpha",
                message: format!("damping factor must lie in (0,1), got {}", self.alpha),
            });
        }
        if self.tolerance.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
            return Err(Error::InvalidParameter {
                parameter: "tolerance",
                message: "tolerance must be positive".into(),
            });
        }
        Ok(())
    }
}

/// PageRank over the states of an order-`k` state graph using its binary
/// adjacency: every out-edge of a state carries weight `1/out-degree`, and
/// states without out-edges spread their mass uniformly.
///
/// Returns one score per state, in the graph's state order, summing to 1.
///
/// # Errors
///
/// [`Error::NonConvergence`] (carrying the last iterate and residual) if
/// the L1 change does not drop below `tolerance` within `max_iterations`;
/// [`Error::InvalidParameter`] for out-of-range options.
pub fn higher_order_pagerank(graph: &StateGraph, options: &PageRankOptions) -> Result<Vec<f64>> {
    let rows: Vec<Vec<(u32, f64)>> = (0..graph.state_count() as u32)
        .map(|state| {
            let targets = graph.out_neighbors(state);
            let weight = 1.0 / targets.len() as f64;
            targets.iter().map(|&t| (t, weight)).collect()
        })
        .collect();
    power_iteration(&rows, options)
}

/// PageRank over the states of a layer's state graph where each edge
/// carries the layer's estimated transition probability instead of a
/// uniform split.
///
/// # Errors
///
/// As [`higher_order_pagerank`], plus [`Error::InvalidParameter`] when the
/// layer's order does not match the graph's.
pub fn higher_order_pagerank_weighted(
    graph: &StateGraph,
    layer: &LayerModel,
    options: &PageRankOptions,
) -> Result<Vec<f64>> {
    if layer.order() != graph.order() {
        return Err(Error::InvalidParameter {
            parameter: "layer",
            message: format!(
                "layer order {} does not match state graph order {}",
                layer.order(),
                graph.order()
            ),
        });
    }
    let mut rows: Vec<Vec<(u32, f64)>> = vec![Vec::new(); graph.state_count()];
    for (history, transitions) in layer.iter() {
        let source = graph
            .position(history)
            .expect("layer histories are state-graph states");
        let mut shifted: Vec<u32> = history[1..].to_vec();
        for transition in transitions {
            shifted.push(transition.vertex);
            let target = graph
                .position(&shifted)
                .expect("window suffixes are state-graph states");
            rows[source as usize].push((target, transition.probability));
            shifted.pop();
        }
    }
    power_iteration(&rows, options)
}

/// Shared damped power iteration. `rows[i]` holds `(target, weight)` pairs
/// with weights summing to 1; empty rows are dangling and treated as
/// uniform.
fn power_iteration(rows: &[Vec<(u32, f64)>], options: &PageRankOptions) -> Result<Vec<f64>> {
    options.validate()?;
    let n = rows.len();
    if n == 0 {
        return Err(Error::InvalidParameter {
            parameter: "graph",
            message: "PageRank needs at least one state".into(),
        });
    }
    let alpha = options.alpha;
    let uniform = 1.0 / n as f64;
    let mut current = vec![uniform; n];
    let mut next = vec![0.0; n];
    for _ in 0..options.max_iterations {
        let mut dangling = 0.0;
        for (state, row) in rows.iter().enumerate() {
            if row.is_empty() {
                dangling += current[state];
            }
        }
        let base = alpha * dangling * uniform + (1.0 - alpha) * uniform;
        next.iter_mut().for_each(|slot| *slot = base);
        for (state, row) in rows.iter().enumerate() {
            let mass = alpha * current[state];
            for &(target, weight) in row {
                next[target as usize] += mass * weight;
            }
        }
        let residual: f64 = current
            .iter()
            .zip(next.iter())
            .map(|(a, b)| (a - b).abs())
            .sum();
        std::mem::swap(&mut current, &mut next);
        if residual < options.tolerance {
            return Ok(current);
        }
    }
    let residual: f64 = current
        .iter()
        .zip(next.iter())
        .map(|(a, b)| (a - b).abs())
        .sum();
    Err(Error::NonConvergence {
        iterations: options.max_iterations,
        residual,
        last_iterate: current,
    })
}

/// Project state scores onto vertices: each order-`k` state donates
/// `score / k` to every position it contains (a vertex appearing twice in
/// the state is counted twice). Preserves the total mass.
///
/// # Errors
///
/// [`Error::InvalidParameter`] when `state_scores` does not have one entry
/// per state of `graph`.
pub fn project_pagerank(graph: &StateGraph, state_scores: &[f64]) -> Result<VertexScores> {
    if state_scores.len() != graph.state_count() {
        return Err(Error::InvalidParameter {
            parameter: "state_scores",
            message: format!(
                "expected {} state scores, got {}",
                graph.state_count(),
                state_scores.len()
            ),
        });
    }
    let k = graph.order() as f64;
    let mut values = vec![0.0f64; graph.index().len()];
    for (state, &score) in state_scores.iter().enumerate() {
        let share = score / k;
        for &vertex in graph.state(state as u32) {
            values[vertex as usize] += share;
        }
    }
    Ok(VertexScores::new(Arc::clone(graph.index()), values))
}

/// Options for [`pagerank_pipeline`].
#[derive(Debug, Clone, Default)]
pub struct RankingOptions {
    pub pagerank: PageRankOptions,
    /// Weight edges by layer transition probabilities instead of the
    /// default binary adjacency.
    pub weighted: bool,
}

/// Fit the order-`k` layer, run PageRank on its state graph, and project
/// the result to vertex scores over the collection's full vertex set.
///
/// # Errors
///
/// [`Error::EmptyLayer`] when order `k` is not fittable (its message names
/// the largest fittable order); otherwise as [`higher_order_pagerank`].
pub fn pagerank_pipeline(
    paths: &PathCollection,
    order: usize,
    options: &RankingOptions,
) -> Result<VertexScores> {
    if order == 0 {
        return Err(Error::InvalidParameter {
            parameter: "order",
            message: "ranking starts at order 1".into(),
        });
    }
    let layer = LayerModel::fit(paths, order)?;
    let graph = StateGraph::from_paths(paths, order)?;
    let state_scores = if options.weighted {
        higher_order_pagerank_weighted(&graph, &layer, &options.pagerank)?
    } else {
        higher_order_pagerank(&graph, &options.pagerank)?
    };
    project_pagerank(&graph, &state_scores)
}

/// Kendall's tau-b rank correlation between two score vectors over the
/// same vertex set, with the standard correction for ties on either side.
///
/// Computed by direct pair enumeration — quadratic in the number of
/// vertices, intended for evaluation-sized vertex sets.
///
/// # Errors
///
/// [`Error::InvalidParameter`] when the vectors cover different vertex
/// sets, have fewer than two vertices, or either side is entirely tied
/// (the correlation is undefined).
pub fn kendall_tau(a: &VertexScores, b: &VertexScores) -> Result<f64> {
    check_same_vertices(a, b)?;
    let n = a.len();
    if n < 2 {
        return Err(Error::InvalidParameter {
            parameter: "scores",
            message: "rank correlation needs at least two vertices".into(),
        });
    }
    let mut concordant = 0u64;
    let mut discordant = 0u64;
    let mut ties_a_only = 0u64;
    let mut ties_b_only = 0u64;
    for i in 0..n {
        for j in i + 1..n {
            let da = a.values[i].partial_cmp(&a.values[j]).expect("finite scores");
            let db = b.values[i].partial_cmp(&b.values[j]).expect("finite scores");
            match (da, db) {
                // Pairs tied on both sides drop out of every term.
                (std::cmp::Ordering::Equal, std::cmp::Ordering::Equal) => {}
                (std::cmp::Ordering::Equal, _) => ties_a_only += 1,
                (_, std::cmp::Ordering::Equal) => ties_b_only += 1,
                (x, y) if x == y => concordant += 1,
                _ => discordant += 1,
            }
        }
    }
    let tied_pairs = concordant + discordant;
    let denominator = ((tied_pairs + ties_a_only) as f64) * ((tied_pairs + ties_b_only) as f64);
    if denominator == 0.0 {
        return Err(Error::InvalidParameter {
            parameter: "scores",
            message: "rank correlation is undefined when one side is entirely tied".into(),
        });
    }
    Ok((concordant as f64 - discordant as f64) / denominator.sqrt())
}

/// Area under the ROC curve of `scores` as a predictor of the top
/// `fraction` of vertices by `truth`.
///
/// The `ceil(fraction * n)` vertices with the highest truth scores are the
/// positive class; ties at the boundary are broken by label order so the
/// class is deterministic. The AUC uses midranks, so tied scores
/// contribute half credit.
///
/// # Errors
///
/// [`Error::InvalidParameter`] when the vectors cover different vertex
/// sets, `fraction` is outside (0, 1), or the positive class would be
/// empty or everything.
pub fn auc_top_fraction(
    scores: &VertexScores,
    truth: &VertexScores,
    fraction: f64,
) -> Result<f64> {
    check_same_vertices(scores, truth)?;
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::InvalidParameter {
            parameter: "fraction",
            message: format!("top fraction must lie in (0,1), got {fraction}"),
        });
    }
    let n = truth.len();
    let positive_count = (fraction * n as f64).ceil() as usize;
    if positive_count == 0 || positive_count >= n {
        return Err(Error::InvalidParameter {
            parameter: "fraction",
            message: format!(
                "top fraction {fraction} labels {positive_count} of {n} vertices positive"
            ),
        });
    }
    let mut by_truth: Vec<u32> = (0..n as u32).collect();
    by_truth.sort_by(|&i, &j| {
        truth.values[j as usize]
            .partial_cmp(&truth.values[i as usize])
            .expect("finite scores")
            .then_with(|| truth.index.label(i).cmp(truth.index.label(j)))
    });
    let mut positive = vec![false; n];
    for &vertex in &by_truth[..positive_count] {
        positive[vertex as usize] = true;
    }

    // Midranks of `scores` ascending, then the rank-sum form of the AUC.
    let mut by_score: Vec<u32> = (0..n as u32).collect();
    by_score.sort_by(|&i, &j| {
        scores.values[i as usize]
            .partial_cmp(&scores.values[j as usize])
            .expect("finite scores")
    });
    let mut ranks = vec![0.0f64; n];
    let mut start = 0;
    while start < n {
        let mut end = start;
        while end < n
            && scores.values[by_score[end] as usize] == scores.values[by_score[start] as usize]
        {
            end += 1;
        }
        // Positions start..end (0-based) share the midrank of 1-based
        // ranks start+1 ..= end.
        let midrank = (start + 1 + end) as f64 / 2.0;
        for &vertex in &by_score[start..end] {
            ranks[vertex as usize] = midrank;
        }
        start = end;
    }
    let positive_rank_sum: f64 = (0..n).filter(|&i| positive[i]).map(|i| ranks[i]).sum();
    let m = positive_count as f64;
    let negatives = (n - positive_count) as f64;
    Ok((positive_rank_sum - m * (m + 1.0) / 2.0) / (m * negatives))
}

fn check_same_vertices(a: &VertexScores, b: &VertexScores) -> Result<()> {
    let same = Arc::ptr_eq(&a.index, &b.index)
        || (a.index.len() == b.index.len() && a.index.labels().eq(b.index.labels()));
    if !same {
        return Err(Error::InvalidParameter {
            parameter: "scores",
            message: "score vectors cover different vertex sets".into(),
        });
    }
    Ok(())
}
