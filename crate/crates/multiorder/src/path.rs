//! Path collections: ordered sequences of vertices with observation
//! frequencies.
//!
//! A *path* of length `l` is a sequence of `l + 1` vertex labels; its length
//! counts traversed edges, so a single vertex is a path of length zero.
//! Collections store each distinct sequence once together with the number of
//! times it was observed, and expose the frequency-weighted sub-path counts
//! that maximum-likelihood estimation is built on.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Default field separator for path files.
pub const DEFAULT_SEPARATOR: char = ',';

/// Bidirectional mapping between vertex labels and dense numeric ids.
///
/// Ids are assigned in order of first appearance and are stable for the
/// lifetime of the index. Everything downstream of parsing works on ids;
/// labels reappear only at output boundaries.
#[derive(Debug, Default)]
pub struct VertexIndex {
    labels: Vec<String>,
    ids: HashMap<String, u32>,
}

impl VertexIndex {
    /// Number of distinct vertices.
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    /// True when no vertex has been interned.
    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Label for a dense id.
    ///
    /// # Panics
    ///
    /// Panics if `id` was not produced by this index.
    pub fn label(&self, id: u32) -> &str {
        &self.labels[id as usize]
    }

    /// Dense id for a label, if the label is known.
    pub fn id(&self, label: &str) -> Option<u32> {
        self.ids.get(label).copied()
    }

    /// Labels in id order.
    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.labels.iter().map(String::as_str)
    }
}

/// Builder that interns labels into a [`VertexIndex`].
#[derive(Debug, Default)]
pub struct VertexIndexBuilder {
    index: VertexIndex,
}

impl VertexIndexBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Start from the contents of an existing index. Ids already assigned by
    /// `base` keep their values, so data indexed against `base` remains valid
    /// against the extended index.
    pub fn extending(base: &VertexIndex) -> Self {
        Self {
            index: VertexIndex {
                labels: base.labels.clone(),
                ids: base.ids.clone(),
            },
        }
    }

    /// Intern a label, returning its dense id.
    ///
    /// # Errors
    ///
    /// Rejects empty labels and labels containing tab, newline, or comma
    /// characters; those characters are structural in every file format this
    /// crate reads and writes.
    pub fn intern(&mut self, label: &str) -> Result<u32> {
        if let Some(id) = self.index.ids.get(label) {
            return Ok(*id);
        }
        if label.is_empty() {
            return Err(Error::InvalidParameter {
                parameter: "vertex label",
                message: "label is empty".into(),
            });
        }
        if let Some(bad) = label.chars().find(|c| matches!(c, '\t' | '\n' | '\r' | ',')) {
            return Err(Error::InvalidParameter {
                parameter: "vertex label",
                message: format!("label {label:?} contains forbidden character {bad:?}"),
            });
        }
        let id = u32::try_from(self.index.labels.len()).map_err(|_| Error::InvalidParameter {
            parameter: "vertex label",
            message: "vertex count exceeds u32 range".into(),
        })?;
        self.index.labels.push(label.to_owned());
        self.index.ids.insert(label.to_owned(), id);
        Ok(id)
    }

    pub fn finish(self) -> Arc<VertexIndex> {
        Arc::new(self.index)
    }
}

/// A collection of observed paths with frequencies.
///
/// Identical vertex sequences are merged and their frequencies accumulated,
/// so the collection holds each distinct path once. Iteration follows first
/// appearance order, which makes round-trips through [`write_paths`] and
/// [`parse`] deterministic.
///
/// [`write_paths`]: PathCollection::write_paths
/// [`parse`]: PathCollection::parse
///
/// # Examples
///
/// ```
/// use multiorder::PathCollection;
///
/// let paths = PathCollection::parse("# toy data\nA,B,C\t2\nA,B,A\n")?;
/// assert_eq!(paths.observation_count(), 3);
/// assert_eq!(paths.distinct_count(), 2);
/// assert_eq!(paths.max_length(), Some(2));
/// # Ok::<(), multiorder::Error>(())
/// ```
#[derive(Debug, Clone)]
pub struct PathCollection {
    index: Arc<VertexIndex>,
    sequences: Vec<Box<[u32]>>,
    frequencies: Vec<u64>,
    slots: HashMap<Box<[u32]>, usize>,
    observation_count: u64,
}

impl PathCollection {
    /// Parse a path file using the default comma separator.
    ///
    /// Each non-empty line holds one observed path: vertex labels joined by
    /// the separator, optionally followed by a tab and a positive integer
    /// frequency (default 1). Lines whose first character is `#` are
    /// comments; trailing whitespace is ignored.
    ///
    /// # Errors
    ///
    /// Returns a [`Error::Parse`] naming the offending line for malformed
    /// frequencies, empty labels, or labels containing structural characters.
    pub fn parse(text: &str) -> Result<Self> {
        Self::parse_with_separator(text, DEFAULT_SEPARATOR)
    }

    /// Parse a path file with an explicit vertex separator.
    ///
    /// # Errors
    ///
    /// In addition to the conditions documented on [`parse`](Self::parse),
    /// rejects separators that collide with the format's structural
    /// characters (tab, newline, `#`).
    pub fn parse_with_separator(text: &str, separator: char) -> Result<Self> {
        check_separator(separator)?;
        let mut builder = VertexIndexBuilder::new();
        let mut raw = Vec::new();
        for (number, line) in text.lines().enumerate() {
            let number = number + 1;
            let line = line.trim_end();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut fields = line.split('\t');
            let sequence_field = fields.next().expect("split yields at least one field");
            let frequency = match fields.next() {
                None => 1,
                Some(raw_freq) => parse_frequency(raw_freq, number)?,
            };
            if fields.next().is_some() {
                return Err(Error::Parse {
                    line: number,
                    message: "expected at most one tab-separated frequency field".into(),
                });
            }
            let mut sequence = Vec::new();
            for token in sequence_field.split(separator) {
                let token = token.trim();
                let id = builder.intern(token).map_err(|err| Error::Parse {
                    line: number,
                    message: err.to_string(),
                })?;
                sequence.push(id);
            }
            raw.push((sequence, frequency));
        }
        Self::from_indexed(builder.finish(), raw)
    }

    /// Build a collection from labeled sequences, interning labels in order
    /// of appearance. Intended for small literal datasets in tests and
    /// documentation.
    ///
    /// # Errors
    ///
    /// Rejects empty sequences, zero frequencies, and invalid labels.
    pub fn from_labeled(paths: &[(&[&str], u64)]) -> Result<Self> {
        let mut builder = VertexIndexBuilder::new();
        let mut raw = Vec::new();
        for (labels, frequency) in paths {
            let mut sequence = Vec::with_capacity(labels.len());
            for label in *labels {
                sequence.push(builder.intern(label)?);
            }
            raw.push((sequence, *frequency));
        }
        Self::from_indexed(builder.finish(), raw)
    }

    /// Build a collection from already-indexed sequences.
    ///
    /// # Errors
    ///
    /// Rejects empty sequences, zero frequencies, and ids outside `index`.
    pub fn from_indexed(
        index: Arc<VertexIndex>,
        paths: impl IntoIterator<Item = (Vec<u32>, u64)>,
    ) -> Result<Self> {
        let mut collection = Self {
            index,
            sequences: Vec::new(),
            frequencies: Vec::new(),
            slots: HashMap::new(),
            observation_count: 0,
        };
        for (sequence, frequency) in paths {
            collection.add(sequence, frequency)?;
        }
        Ok(collection)
    }

    fn add(&mut self, sequence: Vec<u32>, frequency: u64) -> Result<()> {
        if sequence.is_empty() {
            return Err(Error::InvalidParameter {
                parameter: "path",
                message: "a path must contain at least one vertex".into(),
            });
        }
        if frequency == 0 {
            return Err(Error::InvalidParameter {
                parameter: "frequency",
                message: "frequency must be positive".into(),
            });
        }
        let limit = self.index.len() as u32;
        if let Some(bad) = sequence.iter().find(|&&v| v >= limit) {
            return Err(Error::InvalidParameter {
                parameter: "path",
                message: format!("vertex id {bad} is not in the index"),
            });
        }
        self.observation_count = self.observation_count.checked_add(frequency).ok_or(
            Error::InvalidParameter {
                parameter: "frequency",
                message: "total observation count exceeds u64 range".into(),
            },
        )?;
        let sequence: Box<[u32]> = sequence.into();
        match self.slots.get(&sequence) {
            Some(&slot) => self.frequencies[slot] += frequency,
            None => {
                self.slots.insert(sequence.clone(), self.sequences.len());
                self.sequences.push(sequence);
                self.frequencies.push(frequency);
            }
        }
        Ok(())
    }

    /// The vertex index shared by every path in the collection.
    pub fn index(&self) -> &Arc<VertexIndex> {
        &self.index
    }

    /// Total number of observed paths, counting frequency.
    pub fn observation_count(&self) -> u64 {
        self.observation_count
    }

    /// Number of distinct vertex sequences.
    pub fn distinct_count(&self) -> usize {
        self.sequences.len()
    }

    /// Length (edge count) of the longest path, or `None` when empty.
    pub fn max_length(&self) -> Option<usize> {
        self.sequences.iter().map(|s| s.len() - 1).max()
    }

    /// Length (edge count) of the shortest path, or `None` when empty.
    pub fn min_length(&self) -> Option<usize> {
        self.sequences.iter().map(|s| s.len() - 1).min()
    }

    /// Distinct sequences with their accumulated frequencies, in first
    /// appearance order.
    pub fn iter(&self) -> impl Iterator<Item = (&[u32], u64)> {
        self.sequences
            .iter()
            .map(|s| s.as_ref())
            .zip(self.frequencies.iter().copied())
    }

    /// Frequency-weighted counts of all windows of `k + 1` consecutive
    /// vertices across the collection.
    ///
    /// A path of length `l` contributes `l - k + 1` windows when `l >= k` and
    /// none otherwise; each window counts with the path's frequency. For
    /// `k = 0` the result is the number of times each vertex is visited at
    /// any position.
    ///
    /// # Examples
    ///
    /// ```
    /// use multiorder::PathCollection;
    ///
    /// let paths = PathCollection::parse("A,B,C\t2\nA,B,A\n")?;
    /// let pairs = paths.sub_path_counts(1);
    /// let index = paths.index();
    /// let ab = [index.id("A").unwrap(), index.id("B").unwrap()];
    /// assert_eq!(pairs[&ab[..]], 3);
    /// # Ok::<(), multiorder::Error>(())
    /// ```
    pub fn sub_path_counts(&self, k: usize) -> HashMap<Box<[u32]>, u64> {
        let mut counts: HashMap<Box<[u32]>, u64> = HashMap::new();
        for (sequence, frequency) in self.iter() {
            for window in sequence.windows(k + 1) {
                match counts.get_mut(window) {
                    Some(count) => *count += frequency,
                    None => {
                        counts.insert(window.into(), frequency);
                    }
                }
            }
        }
        counts
    }

    /// Render the collection in the path file format accepted by
    /// [`parse`](Self::parse): one line per distinct sequence, frequencies
    /// above 1 written as a tab-separated suffix.
    pub fn write_paths(&self, separator: char) -> Result<String> {
        check_separator(separator)?;
        let mut out = String::new();
        for (sequence, frequency) in self.iter() {
            let mut first = true;
            for &v in sequence {
                if !first {
                    out.push(separator);
                }
                out.push_str(self.index.label(v));
                first = false;
            }
            if frequency > 1 {
                write!(out, "\t{frequency}").expect("writing to a string cannot fail");
            }
            out.push('\n');
        }
        Ok(out)
    }
}

fn check_separator(separator: char) -> Result<()> {
    if matches!(separator, '\t' | '\n' | '\r' | '#') {
        return Err(Error::InvalidParameter {
            parameter: "separator",
            message: format!("{separator:?} is structural in the path file format"),
        });
    }
    Ok(())
}

fn parse_frequency(raw: &str, line: usize) -> Result<u64> {
    let value: u64 = raw.trim().parse().map_err(|_| Error::Parse {
        line,
        message: format!("frequency {raw:?} is not an unsigned integer"),
    })?;
    if value == 0 {
        return Err(Error::Parse {
            line,
            message: "frequency must be positive".into(),
        });
    }
    Ok(value)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Three observations of two distinct paths on vertices A, B, C. Used
    /// throughout the crate's tests; every expected value below is derived
    /// by hand from the definition of window counts.
    pub(crate) fn toy() -> PathCollection {
        PathCollection::parse("A,B,C\t2\nA,B,A\n").unwrap()
    }

    fn ids(paths: &PathCollection, labels: &[&str]) -> Box<[u32]> {
        labels
            .iter()
            .map(|l| paths.index().id(l).unwrap())
            .collect()
    }

    #[test]
    fn parses_frequencies_comments_and_blank_lines() {
        let text = "# comment\n\nA,B,C\t2\nA,B,A\n";
        let paths = PathCollection::parse(text).unwrap();
        assert_eq!(paths.observation_count(), 3);
        assert_eq!(paths.distinct_count(), 2);
        assert_eq!(paths.min_length(), Some(2));
        assert_eq!(paths.max_length(), Some(2));
        assert_eq!(paths.index().len(), 3);
    }

    #[test]
    fn accumulates_repeated_lines() {
        let paths = PathCollection::parse("A,B\nA,B\t3\nA,B\n").unwrap();
        assert_eq!(paths.distinct_count(), 1);
        assert_eq!(paths.observation_count(), 5);
    }

    #[test]
    fn single_vertex_lines_are_length_zero_paths() {
        let paths = PathCollection::parse("A\nB\t2\n").unwrap();
        assert_eq!(paths.max_length(), Some(0));
        assert_eq!(paths.observation_count(), 3);
    }

    #[test]
    fn respects_custom_separator() {
        let paths = PathCollection::parse_with_separator("x;y;x\t4\n", ';').unwrap();
        assert_eq!(paths.observation_count(), 4);
        assert_eq!(paths.index().len(), 2);
    }

    #[test]
    fn rejects_structural_separators() {
        for sep in ['\t', '\n', '#'] {
            assert!(PathCollection::parse_with_separator("A", sep).is_err());
        }
    }

    #[test]
    fn parse_errors_name_the_line() {
        let err = PathCollection::parse("A,B\nA,B\t0\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        let err = PathCollection::parse("A,B\nA,B\tmany\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        let err = PathCollection::parse("A,,B\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }), "{err}");
        let err = PathCollection::parse("ok\nA,B\tx\ty\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
    }

    #[test]
    fn vertex_counts_by_position_match_hand_tally() {
        // Windows of one vertex: A appears 2+1 times as first vertex plus
        // once as the final vertex of A,B,A; B three times; C twice.
        let paths = toy();
        let counts = paths.sub_path_counts(0);
        assert_eq!(counts[&ids(&paths, &["A"])], 4);
        assert_eq!(counts[&ids(&paths, &["B"])], 3);
        assert_eq!(counts[&ids(&paths, &["C"])], 2);
        assert_eq!(counts.values().sum::<u64>(), 9);
    }

    #[test]
    fn pair_and_triple_counts_match_hand_tally() {
        let paths = toy();
        let pairs = paths.sub_path_counts(1);
        assert_eq!(pairs[&ids(&paths, &["A", "B"])], 3);
        assert_eq!(pairs[&ids(&paths, &["B", "C"])], 2);
        assert_eq!(pairs[&ids(&paths, &["B", "A"])], 1);
        assert_eq!(pairs.len(), 3);

        let triples = paths.sub_path_counts(2);
        assert_eq!(triples[&ids(&paths, &["A", "B", "C"])], 2);
        assert_eq!(triples[&ids(&paths, &["A", "B", "A"])], 1);
        assert_eq!(triples.len(), 2);
    }

    #[test]
    fn windows_longer_than_every_path_are_absent() {
        let paths = toy();
        assert!(paths.sub_path_counts(3).is_empty());
    }

    #[test]
    fn window_totals_conserve_traversals() {
        // A path of length l yields l - k + 1 windows of k + 1 vertices.
        let paths = PathCollection::parse("A,B,C,D\t3\nB,C\nD\t2\n").unwrap();
        for k in 0..=3 {
            let expected: u64 = paths
                .iter()
                .map(|(s, f)| f * (s.len().saturating_sub(k)) as u64)
                .sum();
            let total: u64 = paths.sub_path_counts(k).values().sum();
            assert_eq!(total, expected, "k = {k}");
        }
    }

    #[test]
    fn round_trips_through_the_file_format() {
        let paths = toy();
        let text = paths.write_paths(',').unwrap();
        assert_eq!(text, "A,B,C\t2\nA,B,A\n");
        let reparsed = PathCollection::parse(&text).unwrap();
        assert_eq!(reparsed.observation_count(), paths.observation_count());
        assert_eq!(reparsed.distinct_count(), paths.distinct_count());
    }

    #[test]
    fn from_labeled_matches_parse() {
        let a = PathCollection::from_labeled(&[(&["A", "B", "C"], 2), (&["A", "B", "A"], 1)])
            .unwrap();
        let b = toy();
        assert_eq!(a.sub_path_counts(1), b.sub_path_counts(1));
    }

    #[test]
    fn labels_with_structural_characters_are_rejected() {
        assert!(PathCollection::from_labeled(&[(&["a,b"], 1)]).is_err());
        assert!(PathCollection::from_labeled(&[(&[""], 1)]).is_err());
        assert!(PathCollection::from_labeled(&[(&["a\tb"], 1)]).is_err());
    }
}
