//! Edge-stream parsing and the canonical edge/stream types.
//!
//! A graph stream is a text file with one edge per line (`u v` or `u v ts`,
//! whitespace separated; `#`/`%` lines are comments). Line order defines
//! arrival order: the i-th accepted edge gets arrival index `t = i`, starting
//! at 1. A trailing timestamp column is ignored for ordering.

use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

/// Identifier of a node. In `Tokens` mode ids are dense (assigned in order of
/// first appearance); in `Integers` mode they are the raw numeric ids from the
/// input. Either way the raw-token-to-id mapping is injective and stable
/// within one run.
#[derive(Copy, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl std::fmt::Display for NodeId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}

/// An undirected edge stored in canonical form: `u() < v()`, never a self-loop.
#[derive(Copy, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Edge {
    u: NodeId,
    v: NodeId,
}

impl Edge {
    /// Builds the canonical edge for an unordered node pair.
    ///
    /// Panics if `a == b`; self-loops must be filtered before this point.
    pub fn new(a: NodeId, b: NodeId) -> Edge {
        assert_ne!(a, b, "self-loop edge ({a}, {b})");
        if a < b {
            Edge { u: a, v: b }
        } else {
            Edge { u: b, v: a }
        }
    }

    pub fn endpoints(&self) -> (NodeId, NodeId) {
        (self.u, self.v)
    }

    pub fn u(&self) -> NodeId {
        self.u
    }

    pub fn v(&self) -> NodeId {
        self.v
    }
}

impl std::fmt::Display for Edge {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {})", self.u, self.v)
    }
}

/// An edge together with its arrival index `t` (1-based, contiguous).
#[derive(Copy, Clone, PartialEq, Eq, Debug)]
pub struct TimedEdge {
    pub edge: Edge,
    pub t: u64,
}

/// How raw node tokens are turned into [`NodeId`]s.
#[derive(Copy, Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RawIdMode {
    /// Tokens must parse as unsigned integers and are used as-is.
    Integers,
    /// Arbitrary tokens, remapped to dense ids in order of first appearance.
    Tokens,
}

/// Ingestion options for edge-list files.
#[derive(Copy, Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct StreamOptions {
    /// Drop repeats of an already-accepted canonical edge (default `true`).
    pub dedupe: bool,
    /// Skip self-loop lines instead of rejecting the file (default `true`).
    pub skip_self_loops: bool,
    pub raw_id_mode: RawIdMode,
}

impl Default for StreamOptions {
    fn default() -> Self {
        StreamOptions {
            dedupe: true,
            skip_self_loops: true,
            raw_id_mode: RawIdMode::Integers,
        }
    }
}

/// Errors raised while opening or parsing a stream.
#[derive(Debug, thiserror::Error)]
pub enum StreamError {
    #[error("i/o error reading {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("line {line}: cannot parse node id {token:?}{hint}")]
    BadNodeId {
        line: usize,
        token: String,
        hint: &'static str,
    },
    #[error("line {line}: expected at least two node tokens, found {found}")]
    MissingTokens { line: usize, found: usize },
    #[error("line {line}: self-loop ({token}) and skip_self_loops is disabled")]
    SelfLoop { line: usize, token: String },
}

/// Maps raw node tokens to ids according to a [`RawIdMode`].
#[derive(Debug, Default)]
pub struct NodeInterner {
    dense: HashMap<String, NodeId>,
}

impl NodeInterner {
    pub fn new() -> Self {
        Self::default()
    }

    fn resolve(&mut self, token: &str, mode: RawIdMode, line: usize) -> Result<NodeId, StreamError> {
        match mode {
            RawIdMode::Integers => token.parse::<u32>().map(NodeId).map_err(|_| {
                StreamError::BadNodeId {
                    line,
                    token: token.to_string(),
                    hint: " (not a u32; use RawIdMode::Tokens for non-numeric ids)",
                }
            }),
            RawIdMode::Tokens => {
                if let Some(&id) = self.dense.get(token) {
                    return Ok(id);
                }
                let id = NodeId(u32::try_from(self.dense.len()).map_err(|_| {
                    StreamError::BadNodeId {
                        line,
                        token: token.to_string(),
                        hint: " (node id space exhausted)",
                    }
                })?);
                self.dense.insert(token.to_string(), id);
                Ok(id)
            }
        }
    }
}

/// Outcome of parsing one line of an edge-list file.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum ParsedLine {
    Edge(Edge),
    Skip(SkipReason),
}

#[derive(Copy, Clone, PartialEq, Eq, Debug)]
pub enum SkipReason {
    BlankOrComment,
    SelfLoop,
}

/// Parses one record of an edge-list file into a canonical edge candidate.
///
/// The first two whitespace-separated tokens are the node ids; a third token
/// (dataset timestamp) is ignored for ordering. Blank lines and lines starting
/// with `#` or `%` yield a skip marker.
pub fn parse_edge_line(
    line: &str,
    line_no: usize,
    options: &StreamOptions,
    ids: &mut NodeInterner,
) -> Result<ParsedLine, StreamError> {
    let trimmed = line.trim();
    if trimmed.is_empty() || trimmed.starts_with('#') || trimmed.starts_with('%') {
        return Ok(ParsedLine::Skip(SkipReason::BlankOrComment));
    }
    let mut tokens = trimmed.split_whitespace();
    let a = tokens.next();
    let b = tokens.next();
    let (a, b) = match (a, b) {
        (Some(a), Some(b)) => (a, b),
        (Some(_), None) => return Err(StreamError::MissingTokens { line: line_no, found: 1 }),
        _ => return Err(StreamError::MissingTokens { line: line_no, found: 0 }),
    };
    let u = ids.resolve(a, options.raw_id_mode, line_no)?;
    let v = ids.resolve(b, options.raw_id_mode, line_no)?;
    if u == v {
        if options.skip_self_loops {
            return Ok(ParsedLine::Skip(SkipReason::SelfLoop));
        }
        return Err(StreamError::SelfLoop {
            line: line_no,
            token: a.to_string(),
        });
    }
    Ok(ParsedLine::Edge(Edge::new(u, v)))
}

/// Counts of records dropped during ingestion.
#[derive(Copy, Clone, Default, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct SkipStats {
    pub comments_and_blanks: u64,
    pub self_loops: u64,
    pub duplicates: u64,
}

/// Iterator over the accepted edges of an edge-list source, assigning arrival
/// indices 1, 2, 3, … in acceptance order.
pub struct EdgeListReader<R> {
    source: R,
    path: PathBuf,
    options: StreamOptions,
    ids: NodeInterner,
    seen: HashSet<Edge>,
    buf: String,
    line_no: usize,
    next_t: u64,
    skipped: SkipStats,
    done: bool,
}

impl<R: BufRead> EdgeListReader<R> {
    pub fn new(source: R, options: StreamOptions) -> Self {
        EdgeListReader {
            source,
            path: PathBuf::from("<reader>"),
            options,
            ids: NodeInterner::new(),
            seen: HashSet::new(),
            buf: String::new(),
            line_no: 0,
            next_t: 1,
            skipped: SkipStats::default(),
            done: false,
        }
    }

    fn with_path(mut self, path: &Path) -> Self {
        self.path = path.to_path_buf();
        self
    }

    /// Records dropped so far (fully populated once the iterator is drained).
    pub fn skipped(&self) -> SkipStats {
        self.skipped
    }
}

impl<R: BufRead> Iterator for EdgeListReader<R> {
    type Item = Result<TimedEdge, StreamError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        loop {
            self.buf.clear();
            match self.source.read_line(&mut self.buf) {
                Ok(0) => {
                    self.done = true;
                    return None;
                }
                Ok(_) => {}
                Err(source) => {
                    self.done = true;
                    return Some(Err(StreamError::Io {
                        path: self.path.clone(),
                        source,
                    }));
                }
            }
            self.line_no += 1;
            let line = std::mem::take(&mut self.buf);
            let parsed = parse_edge_line(&line, self.line_no, &self.options, &mut self.ids);
            self.buf = line;
            match parsed {
                Err(e) => {
                    self.done = true;
                    return Some(Err(e));
                }
                Ok(ParsedLine::Skip(SkipReason::BlankOrComment)) => {
                    self.skipped.comments_and_blanks += 1;
                }
                Ok(ParsedLine::Skip(SkipReason::SelfLoop)) => {
                    self.skipped.self_loops += 1;
                }
                Ok(ParsedLine::Edge(edge)) => {
                    if self.options.dedupe && !self.seen.insert(edge) {
                        self.skipped.duplicates += 1;
                        continue;
                    }
                    let t = self.next_t;
                    self.next_t += 1;
                    return Some(Ok(TimedEdge { edge, t }));
                }
            }
        }
    }
}

/// Opens an edge-list file as an ordered sequence of [`TimedEdge`]s.
pub fn open_stream(
    path: &Path,
    options: StreamOptions,
) -> Result<EdgeListReader<BufReader<File>>, StreamError> {
    let file = File::open(path).map_err(|source| StreamError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(EdgeListReader::new(BufReader::new(file), options).with_path(path))
}

/// A fully materialized stream plus the bookkeeping the harness needs.
#[derive(Clone, Debug)]
pub struct LoadedStream {
    pub edges: Vec<TimedEdge>,
    /// Every node appearing in an accepted edge, ascending.
    pub nodes: Vec<NodeId>,
    pub skipped: SkipStats,
}

impl LoadedStream {
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// The bare edges in arrival order, without indices.
    pub fn bare_edges(&self) -> Vec<Edge> {
        self.edges.iter().map(|te| te.edge).collect()
    }
}

/// Reads a whole edge-list source into memory.
pub fn collect_stream<R: BufRead>(
    mut reader: EdgeListReader<R>,
) -> Result<LoadedStream, StreamError> {
    let mut edges = Vec::new();
    let mut nodes = HashSet::new();
    for item in reader.by_ref() {
        let te = item?;
        nodes.insert(te.edge.u());
        nodes.insert(te.edge.v());
        edges.push(te);
    }
    let mut nodes: Vec<NodeId> = nodes.into_iter().collect();
    nodes.sort_unstable();
    Ok(LoadedStream {
        edges,
        nodes,
        skipped: reader.skipped(),
    })
}

/// Reads a whole edge-list file into memory.
pub fn read_edges(path: &Path, options: StreamOptions) -> Result<LoadedStream, StreamError> {
    collect_stream(open_stream(path, options)?)
}

/// Returns a uniform random permutation of `edges` (Fisher–Yates),
/// deterministic for a fixed seed. Arrival indices are the caller's to
/// reassign (1-based, in the new order).
pub fn shuffle_stream(edges: &[Edge], seed: u64) -> Vec<Edge> {
    let mut shuffled = edges.to_vec();
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    shuffled.shuffle(&mut rng);
    shuffled
}

/// Attaches arrival indices 1..=n to edges in slice order.
pub fn retime(edges: &[Edge]) -> Vec<TimedEdge> {
    edges
        .iter()
        .enumerate()
        .map(|(i, &edge)| TimedEdge {
            edge,
            t: i as u64 + 1,
        })
        .collect()
}

/// Writes edges as an edge-list file, one `u v` line per edge.
pub fn write_edge_list(path: &Path, edges: &[Edge]) -> io::Result<()> {
    let mut out = io::BufWriter::new(File::create(path)?);
    for e in edges {
        writeln!(out, "{} {}", e.u(), e.v())?;
    }
    out.flush()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::io::Cursor;

    fn n(id: u32) -> NodeId {
        NodeId(id)
    }

    fn parse_one(line: &str, options: &StreamOptions) -> Result<ParsedLine, StreamError> {
        parse_edge_line(line, 1, options, &mut NodeInterner::new())
    }

    fn load(text: &str, options: StreamOptions) -> LoadedStream {
        collect_stream(EdgeListReader::new(Cursor::new(text), options)).unwrap()
    }

    #[test]
    fn parses_basic_line() {
        let opts = StreamOptions::default();
        assert_eq!(
            parse_one("3 7", &opts).unwrap(),
            ParsedLine::Edge(Edge::new(n(3), n(7)))
        );
    }

    #[test]
    fn third_token_ignored_and_order_canonicalized() {
        let opts = StreamOptions::default();
        assert_eq!(
            parse_one("7 3 1094900000", &opts).unwrap(),
            ParsedLine::Edge(Edge::new(n(3), n(7)))
        );
    }

    #[test]
    fn comments_and_blanks_skip() {
        let opts = StreamOptions::default();
        for line in ["# comment", "% comment", "", "   "] {
            assert_eq!(
                parse_one(line, &opts).unwrap(),
                ParsedLine::Skip(SkipReason::BlankOrComment)
            );
        }
    }

    #[test]
    fn malformed_token_reports_line_number() {
        let opts = StreamOptions::default();
        let err = parse_edge_line("a b", 17, &opts, &mut NodeInterner::new()).unwrap_err();
        match err {
            StreamError::BadNodeId { line, token, .. } => {
                assert_eq!(line, 17);
                assert_eq!(token, "a");
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn token_mode_assigns_dense_ids() {
        let opts = StreamOptions {
            raw_id_mode: RawIdMode::Tokens,
            ..StreamOptions::default()
        };
        let mut ids = NodeInterner::new();
        let first = parse_edge_line("alice bob", 1, &opts, &mut ids).unwrap();
        let second = parse_edge_line("bob carol", 2, &opts, &mut ids).unwrap();
        assert_eq!(first, ParsedLine::Edge(Edge::new(n(0), n(1))));
        assert_eq!(second, ParsedLine::Edge(Edge::new(n(1), n(2))));
    }

    #[test]
    fn stream_skips_self_loops_and_keeps_arrival_indices_contiguous() {
        let loaded = load("1 2\n2 2\n2 3\n", StreamOptions::default());
        assert_eq!(
            loaded.edges,
            vec![
                TimedEdge { edge: Edge::new(n(1), n(2)), t: 1 },
                TimedEdge { edge: Edge::new(n(2), n(3)), t: 2 },
            ]
        );
        assert_eq!(loaded.skipped.self_loops, 1);
    }

    #[test]
    fn self_loop_is_an_error_when_skipping_disabled() {
        let opts = StreamOptions {
            skip_self_loops: false,
            ..StreamOptions::default()
        };
        let err = collect_stream(EdgeListReader::new(Cursor::new("2 2\n"), opts)).unwrap_err();
        assert!(matches!(err, StreamError::SelfLoop { line: 1, .. }));
    }

    #[test]
    fn dedupe_drops_reversed_duplicate() {
        let loaded = load("1 2\n2 1\n", StreamOptions::default());
        assert_eq!(loaded.edges.len(), 1);
        assert_eq!(loaded.edges[0].t, 1);
        assert_eq!(loaded.skipped.duplicates, 1);
    }

    #[test]
    fn dedupe_disabled_keeps_both_occurrences() {
        let opts = StreamOptions {
            dedupe: false,
            ..StreamOptions::default()
        };
        let loaded = load("1 2\n2 1\n", opts);
        let e = Edge::new(n(1), n(2));
        assert_eq!(
            loaded.edges,
            vec![TimedEdge { edge: e, t: 1 }, TimedEdge { edge: e, t: 2 }]
        );
    }

    #[test]
    fn empty_stream_is_valid() {
        let loaded = load("# only comments\n\n", StreamOptions::default());
        assert!(loaded.edges.is_empty());
        assert!(loaded.nodes.is_empty());
    }

    #[test]
    fn shuffle_of_empty_and_singleton_is_identity() {
        assert_eq!(shuffle_stream(&[], 7), Vec::new());
        let single = vec![Edge::new(n(1), n(2))];
        assert_eq!(shuffle_stream(&single, 7), single);
    }

    #[test]
    fn shuffle_is_deterministic_per_seed() {
        let edges: Vec<Edge> = (0..50).map(|i| Edge::new(n(i), n(i + 100))).collect();
        assert_eq!(shuffle_stream(&edges, 3), shuffle_stream(&edges, 3));
        assert_ne!(shuffle_stream(&edges, 3), shuffle_stream(&edges, 4));
    }

    #[test]
    fn shuffle_permutations_are_uniform() {
        // Each of the 3! = 6 orderings of a 3-edge list should appear with
        // frequency 1/6; allow 3 binomial standard deviations over 60k seeds.
        let edges = vec![
            Edge::new(n(0), n(1)),
            Edge::new(n(2), n(3)),
            Edge::new(n(4), n(5)),
        ];
        let trials = 60_000u64;
        let mut counts: HashMap<Vec<Edge>, u64> = HashMap::new();
        for seed in 0..trials {
            *counts.entry(shuffle_stream(&edges, seed)).or_insert(0) += 1;
        }
        assert_eq!(counts.len(), 6);
        let p = 1.0 / 6.0;
        let sigma = (trials as f64 * p * (1.0 - p)).sqrt();
        let expected = trials as f64 * p;
        for (&ref perm, &count) in &counts {
            let dev = (count as f64 - expected).abs();
            assert!(
                dev <= 3.0 * sigma,
                "permutation {perm:?} occurred {count} times, expected {expected:.0} +/- {:.0}",
                3.0 * sigma
            );
        }
    }

    #[test]
    fn write_then_read_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("edges.txt");
        let edges = vec![Edge::new(n(1), n(2)), Edge::new(n(2), n(3))];
        write_edge_list(&path, &edges).unwrap();
        let loaded = read_edges(&path, StreamOptions::default()).unwrap();
        assert_eq!(loaded.bare_edges(), edges);
    }

    #[test]
    fn open_stream_missing_file_is_io_error() {
        let err = open_stream(Path::new("/nonexistent/stream.txt"), StreamOptions::default());
        assert!(matches!(err, Err(StreamError::Io { .. })));
    }

    proptest! {
        #[test]
        fn canonicalization_is_idempotent(a in 0u32..500, b in 0u32..500) {
            prop_assume!(a != b);
            let once = Edge::new(n(a), n(b));
            let twice = Edge::new(once.u(), once.v());
            prop_assert_eq!(once, twice);
            prop_assert!(once.u() < once.v());
        }

        #[test]
        fn arrival_indices_are_contiguous_and_deduped(pairs in proptest::collection::vec((0u32..30, 0u32..30), 0..120)) {
            let text: String = pairs
                .iter()
                .map(|(a, b)| format!("{a} {b}\n"))
                .collect();
            let loaded = load(&text, StreamOptions::default());
            for (i, te) in loaded.edges.iter().enumerate() {
                prop_assert_eq!(te.t, i as u64 + 1);
            }
            let unique: HashSet<Edge> = loaded.edges.iter().map(|te| te.edge).collect();
            prop_assert_eq!(unique.len(), loaded.edges.len());
        }

        #[test]
        fn shuffle_is_a_permutation(len in 0usize..40, seed in 0u64..1000) {
            let edges: Vec<Edge> = (0..len as u32).map(|i| Edge::new(n(2 * i), n(2 * i + 1))).collect();
            let mut shuffled = shuffle_stream(&edges, seed);
            shuffled.sort_unstable();
            let mut sorted = edges.clone();
            sorted.sort_unstable();
            prop_assert_eq!(shuffled, sorted);
        }
    }
}
