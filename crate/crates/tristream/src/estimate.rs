//! Shared plumbing for the streaming estimators: the bounded sampled graph,
//! the real-valued triangle counters, and the uniform process/snapshot
//! interface the harness drives.

use std::collections::HashMap;

use crate::stream::{Edge, NodeId, TimedEdge};

/// Where a stored edge currently lives inside an estimator's memory.
#[derive(Copy, Clone, PartialEq, Eq, Debug)]
pub enum StorageLocation {
    WaitingRoom,
    Reservoir,
}

/// Adjacency view over the currently stored edges. Each neighbor entry is
/// tagged with the storage location of the corresponding edge.
#[derive(Clone, Debug, Default)]
pub struct SampledGraph {
    adj: HashMap<NodeId, HashMap<NodeId, StorageLocation>>,
    edges: usize,
}

impl SampledGraph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Number of stored edges.
    pub fn edge_count(&self) -> usize {
        self.edges
    }

    pub fn contains(&self, edge: &Edge) -> bool {
        self.adj
            .get(&edge.u())
            .is_some_and(|nbrs| nbrs.contains_key(&edge.v()))
    }

    pub fn location(&self, edge: &Edge) -> Option<StorageLocation> {
        self.adj.get(&edge.u())?.get(&edge.v()).copied()
    }

    /// Inserts or retags an edge. Re-inserting an existing edge only updates
    /// its location (duplicates can reach an estimator when stream dedup is
    /// disabled; bookkeeping stays best-effort in that case).
    pub fn insert(&mut self, edge: Edge, loc: StorageLocation) {
        let fresh = self
            .adj
            .entry(edge.u())
            .or_default()
            .insert(edge.v(), loc)
            .is_none();
        self.adj.entry(edge.v()).or_default().insert(edge.u(), loc);
        if fresh {
            self.edges += 1;
        }
    }

    /// Removes an edge if present.
    pub fn remove(&mut self, edge: &Edge) {
        let mut removed = false;
        if let Some(nbrs) = self.adj.get_mut(&edge.u()) {
            removed = nbrs.remove(&edge.v()).is_some();
            if nbrs.is_empty() {
                self.adj.remove(&edge.u());
            }
        }
        if let Some(nbrs) = self.adj.get_mut(&edge.v()) {
            nbrs.remove(&edge.u());
            if nbrs.is_empty() {
                self.adj.remove(&edge.v());
            }
        }
        if removed {
            self.edges -= 1;
        }
    }

    pub fn degree(&self, node: NodeId) -> usize {
        self.adj.get(&node).map_or(0, HashMap::len)
    }

    /// Common neighbors of `u` and `v` with the locations of both stored
    /// edges, sorted by node id. Iterates the smaller adjacency set and
    /// probes the larger; sorting keeps downstream float accumulation
    /// order-independent of hash layout.
    pub fn common_neighbors(
        &self,
        u: NodeId,
        v: NodeId,
    ) -> Vec<(NodeId, StorageLocation, StorageLocation)> {
        let (Some(nu), Some(nv)) = (self.adj.get(&u), self.adj.get(&v)) else {
            return Vec::new();
        };
        let (small, large, swapped) = if nu.len() <= nv.len() {
            (nu, nv, false)
        } else {
            (nv, nu, true)
        };
        let mut found: Vec<(NodeId, StorageLocation, StorageLocation)> = small
            .iter()
            .filter_map(|(&w, &loc_small)| {
                large.get(&w).map(|&loc_large| {
                    if swapped {
                        (w, loc_large, loc_small)
                    } else {
                        (w, loc_small, loc_large)
                    }
                })
            })
            .collect();
        found.sort_unstable_by_key(|&(w, _, _)| w);
        found
    }
}

/// Real-valued global and per-node triangle counters.
///
/// Every discovery adds the same increment to the global counter and to the
/// three node counters, so `sum(local) == 3 * global` holds exactly (up to
/// float summation) at all times, and counters never decrease.
#[derive(Clone, Debug, Default)]
pub struct Counters {
    global: f64,
    local: HashMap<NodeId, f64>,
}

impl Counters {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn global(&self) -> f64 {
        self.global
    }

    pub fn local(&self) -> &HashMap<NodeId, f64> {
        &self.local
    }

    /// Estimate for one node; nodes never seen in a discovery report 0.
    pub fn local_estimate(&self, node: NodeId) -> f64 {
        self.local.get(&node).copied().unwrap_or(0.0)
    }

    /// Credits one discovered triangle to the global counter and to each of
    /// its three corners.
    pub fn add_triangle(&mut self, nodes: [NodeId; 3], increment: f64) {
        self.global += increment;
        for node in nodes {
            *self.local.entry(node).or_insert(0.0) += increment;
        }
    }
}

/// A point-in-time copy of an estimator's counters.
#[derive(Clone, Debug, PartialEq)]
pub struct EstimateSnapshot {
    /// Arrival index of the last processed edge (0 for a fresh estimator).
    pub t: u64,
    pub global_estimate: f64,
    /// Sparse per-node estimates; absent nodes estimate 0.
    pub local_estimates: HashMap<NodeId, f64>,
    /// Number of triangle discoveries so far.
    pub discovered: u64,
}

impl EstimateSnapshot {
    pub fn local_estimate(&self, node: NodeId) -> f64 {
        self.local_estimates.get(&node).copied().unwrap_or(0.0)
    }
}

/// Contract violations raised by the streaming counters.
#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum EstimatorError {
    #[error("edge arrived out of order: expected t = {expected}, got t = {got}")]
    OutOfOrder { expected: u64, got: u64 },
    #[error("duplicate edge {edge} inserted into a deduplicated stream")]
    DuplicateEdge { edge: Edge },
}

/// Uniform interface over the streaming triangle counters (exact and
/// sampled). Implementations also expose richer per-edge results through
/// inherent methods; `feed` is the lowest common denominator the harness and
/// the experiment runner use.
pub trait TriangleEstimator {
    /// Processes the next edge of the stream.
    fn feed(&mut self, edge: TimedEdge) -> Result<(), EstimatorError>;

    /// Copies out the current estimates.
    fn snapshot(&self) -> EstimateSnapshot;

    /// Live view of the counters.
    fn counters(&self) -> &Counters;
}
