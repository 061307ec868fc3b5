//! Exact incremental triangle counting (the ground truth for error metrics)
//! and interval statistics over when each triangle's edges arrived.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::estimate::{EstimateSnapshot, EstimatorError, TriangleEstimator};
use crate::stream::{Edge, NodeId, TimedEdge};

/// An exact triangle together with the arrival indices of its three edges.
#[derive(Copy, Clone, PartialEq, Eq, Debug)]
pub struct TriangleRecord {
    nodes: [NodeId; 3],
    t1: u64,
    t2: u64,
    t3: u64,
}

impl TriangleRecord {
    /// Builds a record from an unordered node triple and the three edge
    /// arrival indices. Panics if the times are not pairwise distinct (a
    /// deduplicated stream guarantees distinct arrival indices).
    pub fn new(nodes: [NodeId; 3], times: [u64; 3]) -> TriangleRecord {
        let mut nodes = nodes;
        nodes.sort_unstable();
        let mut times = times;
        times.sort_unstable();
        assert!(
            times[0] < times[1] && times[1] < times[2],
            "triangle edge times must be distinct, got {times:?}"
        );
        TriangleRecord {
            nodes,
            t1: times[0],
            t2: times[1],
            t3: times[2],
        }
    }

    /// Corner nodes, ascending.
    pub fn nodes(&self) -> [NodeId; 3] {
        self.nodes
    }

    /// Arrival indices of the first, second, and last edge.
    pub fn times(&self) -> (u64, u64, u64) {
        (self.t1, self.t2, self.t3)
    }

    /// Time between the arrivals of the second edge and the last edge.
    pub fn closing_interval(&self) -> u64 {
        self.t3 - self.t2
    }

    /// Time between the arrivals of the first edge and the last edge.
    pub fn total_interval(&self) -> u64 {
        self.t3 - self.t1
    }
}

/// Incrementally maintained exact graph and triangle counts.
///
/// Stores the whole graph seen so far; it is the reference the sampled
/// estimators are measured against and is exempt from any memory budget.
#[derive(Clone, Debug, Default)]
pub struct ExactCounter {
    adj: HashMap<NodeId, HashSet<NodeId>>,
    edge_time: HashMap<Edge, u64>,
    global: u64,
    local: HashMap<NodeId, u64>,
    t: u64,
}

impl ExactCounter {
    pub fn new() -> Self {
        Self::default()
    }

    /// Arrival index of the last inserted edge.
    pub fn t(&self) -> u64 {
        self.t
    }

    pub fn global_count(&self) -> u64 {
        self.global
    }

    pub fn local_counts(&self) -> &HashMap<NodeId, u64> {
        &self.local
    }

    pub fn local_count(&self, node: NodeId) -> u64 {
        self.local.get(&node).copied().unwrap_or(0)
    }

    /// Snapshot copy of the exact counters.
    pub fn counts(&self) -> (u64, HashMap<NodeId, u64>) {
        (self.global, self.local.clone())
    }

    pub fn node_count(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_time.len()
    }

    pub fn degree(&self, node: NodeId) -> usize {
        self.adj.get(&node).map_or(0, HashSet::len)
    }

    /// Inserts the next edge of the stream and returns the triangles it
    /// closes (one per common neighbor of its endpoints), with the new edge
    /// as the last arrival.
    ///
    /// The stream must be in order (`e.t == self.t() + 1`) and deduplicated.
    pub fn insert_edge(&mut self, e: TimedEdge) -> Result<Vec<TriangleRecord>, EstimatorError> {
        if e.t != self.t + 1 {
            return Err(EstimatorError::OutOfOrder {
                expected: self.t + 1,
                got: e.t,
            });
        }
        if self.edge_time.contains_key(&e.edge) {
            return Err(EstimatorError::DuplicateEdge { edge: e.edge });
        }
        let (u, v) = e.edge.endpoints();

        // Closures against the graph before this edge is added.
        let mut closed = Vec::new();
        if let (Some(nu), Some(nv)) = (self.adj.get(&u), self.adj.get(&v)) {
            let (small, large) = if nu.len() <= nv.len() { (nu, nv) } else { (nv, nu) };
            let mut common: Vec<NodeId> =
                small.iter().copied().filter(|w| large.contains(w)).collect();
            common.sort_unstable();
            for w in common {
                let t_uw = self.edge_time[&Edge::new(u, w)];
                let t_vw = self.edge_time[&Edge::new(v, w)];
                closed.push(TriangleRecord::new([u, v, w], [t_uw, t_vw, e.t]));
            }
        }

        self.t = e.t;
        self.edge_time.insert(e.edge, e.t);
        self.adj.entry(u).or_default().insert(v);
        self.adj.entry(v).or_default().insert(u);

        self.global += closed.len() as u64;
        for record in &closed {
            for node in record.nodes() {
                *self.local.entry(node).or_insert(0) += 1;
            }
        }
        Ok(closed)
    }
}

impl TriangleEstimator for ExactCounter {
    fn feed(&mut self, edge: TimedEdge) -> Result<(), EstimatorError> {
        self.insert_edge(edge).map(drop)
    }

    fn snapshot(&self) -> EstimateSnapshot {
        EstimateSnapshot {
            t: self.t,
            global_estimate: self.global as f64,
            local_estimates: self
                .local
                .iter()
                .map(|(&node, &count)| (node, count as f64))
                .collect(),
            discovered: self.global,
        }
    }
}

/// Which arrival interval of a triangle to analyze.
#[derive(Copy, Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntervalKind {
    Closing,
    Total,
}

/// Logarithmic binning: integer bin boundaries at round(base^i), starting at 1.
#[derive(Copy, Clone, Debug)]
pub struct LogBinning {
    pub base: f64,
}

impl Default for LogBinning {
    fn default() -> Self {
        LogBinning { base: 2.0 }
    }
}

impl LogBinning {
    pub fn decades() -> Self {
        LogBinning { base: 10.0 }
    }

    /// Strictly increasing boundaries 1 = b_0 < b_1 < … covering `max`.
    fn boundaries(&self, max: u64) -> Vec<u64> {
        assert!(self.base > 1.0, "log binning base must exceed 1");
        let mut bounds = vec![1u64];
        let mut power = self.base;
        while *bounds.last().unwrap() <= max {
            let next = power.round() as u64;
            if next > *bounds.last().unwrap() {
                bounds.push(next);
            }
            power *= self.base;
        }
        bounds
    }
}

/// One histogram row: inclusive interval range, count, and the complementary
/// CDF evaluated at the lower bound (`P[X >= bin_low]`).
#[derive(Copy, Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct IntervalBin {
    pub bin_low: u64,
    pub bin_high: u64,
    pub count: u64,
    pub ccdf: f64,
}

/// Plot-ready histogram plus CCDF of one interval kind.
#[derive(Clone, PartialEq, Debug, Default, Serialize, Deserialize)]
pub struct IntervalTable {
    pub rows: Vec<IntervalBin>,
    pub samples: u64,
    pub mean: f64,
}

/// Bins the chosen interval of each record. An empty record list yields an
/// empty table. The CCDF column is computed from the exact values, not from
/// the binned counts, so it is binning-independent at the boundaries.
pub fn interval_distribution(
    records: &[TriangleRecord],
    kind: IntervalKind,
    binning: LogBinning,
) -> IntervalTable {
    let mut values: Vec<u64> = records
        .iter()
        .map(|r| match kind {
            IntervalKind::Closing => r.closing_interval(),
            IntervalKind::Total => r.total_interval(),
        })
        .collect();
    if values.is_empty() {
        return IntervalTable::default();
    }
    values.sort_unstable();
    let n = values.len() as u64;
    let total: u128 = values.iter().map(|&v| v as u128).sum();
    let max = *values.last().unwrap();

    let bounds = binning.boundaries(max);
    let mut rows = Vec::new();
    for window in bounds.windows(2) {
        let (low, next) = (window[0], window[1]);
        // values is sorted: index arithmetic gives both count and tail mass
        let begin = values.partition_point(|&v| v < low);
        let end = values.partition_point(|&v| v < next);
        let at_or_above = (values.len() - begin) as u64;
        rows.push(IntervalBin {
            bin_low: low,
            bin_high: next - 1,
            count: (end - begin) as u64,
            ccdf: at_or_above as f64 / n as f64,
        });
    }
    while rows.last().is_some_and(|r| r.count == 0) {
        rows.pop();
    }
    IntervalTable {
        rows,
        samples: n,
        mean: total as f64 / n as f64,
    }
}
