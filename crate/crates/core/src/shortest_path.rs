//! Dijkstra over [`LaneGraph`] edges with caller-supplied costs.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::graph::{Adjacency, LaneGraph};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy)]
pub(crate) struct HeapItem<T> {
    pub key: T,
    pub node: usize,
}

impl<T: Scalar> PartialEq for HeapItem<T> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<T: Scalar> Eq for HeapItem<T> {}

// Min-heap on key, ties broken towards the lower node id.
impl<T: Scalar> Ord for HeapItem<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .key
            .partial_cmp(&self.key)
            .unwrap_or(Ordering::Equal)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl<T: Scalar> PartialOrd for HeapItem<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Single-source shortest path tree.
#[derive(Debug, Clone)]
pub struct ShortestPaths<T> {
    pub source: usize,
    pub dist: Vec<Option<T>>,
    pub parent_edge: Vec<Option<usize>>,
}

impl<T: Scalar> ShortestPaths<T> {
    /// Edge ids from the source to `target`, `None` if unreachable.
    pub fn edge_path<U: Scalar>(&self, g: &LaneGraph<U>, target: usize) -> Option<Vec<usize>> {
        self.dist[target]?;
        let mut edges = Vec::new();
        let mut cur = target;
        while cur != self.source {
            let e = self.parent_edge[cur]?;
            edges.push(e);
            cur = g.edges()[e].src;
        }
        edges.reverse();
        Some(edges)
    }

    /// Node ids from the source to `target`, `None` if unreachable.
    pub fn node_path<U: Scalar>(&self, g: &LaneGraph<U>, target: usize) -> Option<Vec<usize>> {
        let edges = self.edge_path(g, target)?;
        let mut nodes = vec![self.source];
        nodes.extend(edges.iter().map(|&e| g.edges()[e].dst));
        Some(nodes)
    }
}

/// Runs Dijkstra from `source`. `cost(edge)` returns `None` for unusable
/// edges; costs must be nonnegative. Nodes farther than `limit` are not
/// settled.
pub fn dijkstra<T: Scalar, U: Scalar>(
    g: &LaneGraph<U>,
    adj: &Adjacency,
    source: usize,
    limit: Option<T>,
    cost: impl Fn(usize) -> Option<T>,
) -> ShortestPaths<T> {
    let n = g.node_count();
    let mut dist: Vec<Option<T>> = vec![None; n];
    let mut parent_edge = vec![None; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    dist[source] = Some(T::zero());
    heap.push(HeapItem {
        key: T::zero(),
        node: source,
    });
    while let Some(HeapItem { key, node }) = heap.pop() {
        if done[node] {
            continue;
        }
        done[node] = true;
        for &e in &adj.out[node] {
            let Some(c) = cost(e) else { continue };
            let v = g.edges()[e].dst;
            let nd = key + c;
            if limit.is_some_and(|l| nd > l) {
                continue;
            }
            if dist[v].is_none_or(|d| nd < d) {
                dist[v] = Some(nd);
                parent_edge[v] = Some(e);
                heap.push(HeapItem { key: nd, node: v });
            }
        }
    }
    ShortestPaths {
        source,
        dist,
        parent_edge,
    }
}

/// Dijkstra with Euclidean edge lengths as costs.
pub fn euclidean_dijkstra<T: Scalar>(
    g: &LaneGraph<T>,
    adj: &Adjacency,
    source: usize,
    limit: Option<T>,
) -> ShortestPaths<T> {
    dijkstra(g, adj, source, limit, |e| Some(g.edge_length(e)))
}
