//! Directed spatial lane graphs.
//!
//! A [`LaneGraph`] stores node positions (pixels), nonnegative node weights and
//! scored directed edges. Node and edge ids are dense indices; every structural
//! operation re-assigns them, so callers that need correspondence across
//! operations carry an explicit map (see [`LaneGraph::retain`]).

mod ops;

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

pub use ops::{
    crop_graph, interpolate_uniform, laplacian_smooth, predecessor_tree, successor_tree,
    successor_tree_weight, to_crop, to_world, TreeStats,
};

use crate::error::{Error, Result};
use crate::geometry::{circular_mean, Aabb, Point2};
use crate::scalar::Scalar;

/// Pixel size of the aerial imagery, in meters.
pub const DEFAULT_RESOLUTION_M_PER_PX: f64 = 0.15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FrameKind {
    #[serde(rename = "crop-local")]
    CropLocal,
    #[serde(rename = "world")]
    World,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoordinateFrame<T = f64> {
    pub kind: FrameKind,
    pub resolution_m_per_px: T,
    pub origin: Point2<T>,
    pub rotation: T,
}

impl<T: Scalar> CoordinateFrame<T> {
    pub fn world() -> Self {
        Self {
            kind: FrameKind::World,
            resolution_m_per_px: T::lit(DEFAULT_RESOLUTION_M_PER_PX),
            origin: Point2::zero(),
            rotation: T::zero(),
        }
    }

    /// A crop-local frame whose pixel origin sits at `origin` with the given
    /// rotation in world coordinates.
    pub fn crop_local(origin: Point2<T>, rotation: T) -> Self {
        Self {
            kind: FrameKind::CropLocal,
            resolution_m_per_px: T::lit(DEFAULT_RESOLUTION_M_PER_PX),
            origin,
            rotation: crate::geometry::wrap_angle(rotation),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.resolution_m_per_px > T::zero()) || !self.origin.is_finite() {
            return Err(Error::InvalidGraph(
                "frame resolution must be positive".into(),
            ));
        }
        let pi = T::lit(std::f64::consts::PI);
        if !(self.rotation >= -pi && self.rotation < pi) {
            return Err(Error::InvalidGraph(
                "frame rotation outside [-pi, pi)".into(),
            ));
        }
        Ok(())
    }

    pub fn cast<U: Scalar>(&self) -> CoordinateFrame<U> {
        CoordinateFrame {
            kind: self.kind,
            resolution_m_per_px: self.resolution_m_per_px.cast(),
            origin: self.origin.cast(),
            rotation: self.rotation.cast(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Node<T = f64> {
    pub pos: Point2<T>,
    pub weight: T,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge<T = f64> {
    pub src: usize,
    pub dst: usize,
    pub score: T,
}

/// Per-node incident edge ids.
#[derive(Debug, Clone, Default)]
pub struct Adjacency {
    pub out: Vec<Vec<usize>>,
    pub inc: Vec<Vec<usize>>,
}

impl Adjacency {
    #[inline]
    pub fn out_degree(&self, n: usize) -> usize {
        self.out[n].len()
    }

    #[inline]
    pub fn in_degree(&self, n: usize) -> usize {
        self.inc[n].len()
    }
}

#[derive(Debug, Clone)]
pub struct LaneGraph<T = f64> {
    frame: CoordinateFrame<T>,
    nodes: Vec<Node<T>>,
    edges: Vec<Edge<T>>,
    edge_set: HashSet<(usize, usize)>,
}

impl<T: Scalar> PartialEq for LaneGraph<T> {
    fn eq(&self, other: &Self) -> bool {
        self.frame == other.frame && self.nodes == other.nodes && self.edges == other.edges
    }
}

impl<T: Scalar> LaneGraph<T> {
    pub fn new(frame: CoordinateFrame<T>) -> Self {
        Self {
            frame,
            nodes: Vec::new(),
            edges: Vec::new(),
            edge_set: HashSet::new(),
        }
    }

    /// Builds a graph from raw parts, checking every invariant.
    pub fn from_parts(
        frame: CoordinateFrame<T>,
        nodes: Vec<Node<T>>,
        edges: Vec<Edge<T>>,
    ) -> Result<Self> {
        frame.validate()?;
        let mut g = Self::new(frame);
        for n in nodes {
            if !n.pos.is_finite() {
                return Err(Error::InvalidGraph("non-finite node position".into()));
            }
            if !(n.weight >= T::zero()) || !n.weight.is_finite() {
                return Err(Error::InvalidGraph(
                    "node weight must be nonnegative".into(),
                ));
            }
            g.nodes.push(n);
        }
        for e in edges {
            if !(e.score >= T::zero() && e.score <= T::one()) {
                return Err(Error::InvalidGraph(format!(
                    "edge score {} outside [0, 1]",
                    e.score
                )));
            }
            if g.add_edge(e.src, e.dst, e.score)?.is_none() {
                return Err(Error::InvalidGraph(format!(
                    "duplicate edge {} -> {}",
                    e.src, e.dst
                )));
            }
        }
        Ok(g)
    }

    #[inline]
    pub fn frame(&self) -> &CoordinateFrame<T> {
        &self.frame
    }

    pub fn with_frame(mut self, frame: CoordinateFrame<T>) -> Self {
        self.frame = frame;
        self
    }

    #[inline]
    pub fn nodes(&self) -> &[Node<T>] {
        &self.nodes
    }

    #[inline]
    pub fn edges(&self) -> &[Edge<T>] {
        &self.edges
    }

    #[inline]
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    #[inline]
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    #[inline]
    pub fn pos(&self, n: usize) -> Point2<T> {
        self.nodes[n].pos
    }

    pub fn positions(&self) -> Vec<Point2<T>> {
        self.nodes.iter().map(|n| n.pos).collect()
    }

    pub fn add_node(&mut self, pos: Point2<T>, weight: T) -> usize {
        debug_assert!(pos.is_finite());
        self.nodes.push(Node { pos, weight });
        self.nodes.len() - 1
    }

    /// Adds a directed edge. Returns `Ok(None)` if the edge already exists.
    pub fn add_edge(&mut self, src: usize, dst: usize, score: T) -> Result<Option<usize>> {
        if src >= self.nodes.len() {
            return Err(Error::UnknownNode(src));
        }
        if dst >= self.nodes.len() {
            return Err(Error::UnknownNode(dst));
        }
        if src == dst {
            return Err(Error::InvalidGraph(format!("self-loop at node {src}")));
        }
        if !self.edge_set.insert((src, dst)) {
            return Ok(None);
        }
        self.edges.push(Edge { src, dst, score });
        Ok(Some(self.edges.len() - 1))
    }

    #[inline]
    pub fn has_edge(&self, src: usize, dst: usize) -> bool {
        self.edge_set.contains(&(src, dst))
    }

    pub fn find_edge(&self, src: usize, dst: usize) -> Option<usize> {
        if !self.has_edge(src, dst) {
            return None;
        }
        self.edges.iter().position(|e| e.src == src && e.dst == dst)
    }

    pub fn set_weight(&mut self, n: usize, w: T) {
        self.nodes[n].weight = w;
    }

    pub fn set_pos(&mut self, n: usize, p: Point2<T>) {
        self.nodes[n].pos = p;
    }

    pub fn set_score(&mut self, e: usize, s: T) {
        self.edges[e].score = s;
    }

    pub fn adjacency(&self) -> Adjacency {
        let mut adj = Adjacency {
            out: vec![Vec::new(); self.nodes.len()],
            inc: vec![Vec::new(); self.nodes.len()],
        };
        for (i, e) in self.edges.iter().enumerate() {
            adj.out[e.src].push(i);
            adj.inc[e.dst].push(i);
        }
        adj
    }

    /// Undirected neighbor sets; a bidirectional pair counts once.
    pub fn undirected_neighbors(&self) -> Vec<Vec<usize>> {
        let mut nb = vec![Vec::new(); self.nodes.len()];
        for e in &self.edges {
            if !nb[e.src].contains(&e.dst) {
                nb[e.src].push(e.dst);
            }
            if !nb[e.dst].contains(&e.src) {
                nb[e.dst].push(e.src);
            }
        }
        nb
    }

    pub fn edge_vector(&self, e: usize) -> Point2<T> {
        let e = &self.edges[e];
        self.nodes[e.dst].pos - self.nodes[e.src].pos
    }

    pub fn edge_length(&self, e: usize) -> T {
        self.edge_vector(e).norm()
    }

    pub fn total_length(&self) -> T {
        (0..self.edges.len()).map(|e| self.edge_length(e)).sum()
    }

    pub fn total_weight(&self) -> T {
        self.nodes.iter().map(|n| n.weight).sum()
    }

    pub fn bounds(&self) -> Option<Aabb<T>> {
        Aabb::around(self.nodes.iter().map(|n| n.pos))
    }

    /// Circular mean of the directions of all incident edges, each taken in
    /// its direction of travel. `None` for isolated nodes.
    pub fn mean_node_angles(&self) -> Vec<Option<T>> {
        let adj = self.adjacency();
        (0..self.nodes.len())
            .map(|n| {
                circular_mean(
                    adj.out[n]
                        .iter()
                        .chain(adj.inc[n].iter())
                        .map(|&e| self.edge_vector(e).angle()),
                )
            })
            .collect()
    }

    /// Keeps the selected nodes and edges, dropping edges whose endpoints are
    /// removed. Returns the new graph and the old-to-new node id map.
    pub fn retain(&self, keep_node: &[bool], keep_edge: &[bool]) -> (Self, Vec<Option<usize>>) {
        let mut map = vec![None; self.nodes.len()];
        let mut g = Self::new(self.frame);
        for (i, n) in self.nodes.iter().enumerate() {
            if keep_node[i] {
                map[i] = Some(g.add_node(n.pos, n.weight));
            }
        }
        for (i, e) in self.edges.iter().enumerate() {
            if !keep_edge[i] {
                continue;
            }
            if let (Some(s), Some(d)) = (map[e.src], map[e.dst]) {
                g.add_edge(s, d, e.score).expect("valid retained edge");
            }
        }
        (g, map)
    }

    /// Removes the given edges and every node left without incident edges
    /// by the removal (nodes that were already isolated are kept).
    pub fn remove_edges_and_orphans(&self, drop_edge: &[bool]) -> (Self, Vec<Option<usize>>) {
        let adj = self.adjacency();
        let keep_edge: Vec<bool> = drop_edge.iter().map(|d| !d).collect();
        let keep_node: Vec<bool> = (0..self.nodes.len())
            .map(|n| {
                let had = adj.out_degree(n) + adj.in_degree(n) > 0;
                let has = adj.out[n]
                    .iter()
                    .chain(adj.inc[n].iter())
                    .any(|&e| keep_edge[e]);
                !had || has
            })
            .collect();
        self.retain(&keep_node, &keep_edge)
    }

    /// The same graph with every edge direction flipped.
    pub fn reversed(&self) -> Self {
        let mut g = Self::new(self.frame);
        for n in &self.nodes {
            g.add_node(n.pos, n.weight);
        }
        for e in &self.edges {
            g.add_edge(e.dst, e.src, e.score)
                .expect("valid reversed edge");
        }
        g
    }

    /// Copy with node positions replaced.
    pub fn with_positions(&self, positions: &[Point2<T>]) -> Self {
        assert_eq!(positions.len(), self.nodes.len());
        let mut g = self.clone();
        for (n, p) in g.nodes.iter_mut().zip(positions) {
            n.pos = *p;
        }
        g
    }

    /// Number of weakly connected components.
    pub fn weak_component_count(&self) -> usize {
        let nb = self.undirected_neighbors();
        let mut seen = vec![false; self.nodes.len()];
        let mut count = 0;
        for s in 0..self.nodes.len() {
            if seen[s] {
                continue;
            }
            count += 1;
            seen[s] = true;
            let mut stack = vec![s];
            while let Some(u) = stack.pop() {
                for &v in &nb[u] {
                    if !seen[v] {
                        seen[v] = true;
                        stack.push(v);
                    }
                }
            }
        }
        count
    }

    pub fn validate(&self) -> Result<()> {
        self.frame.validate()?;
        for n in &self.nodes {
            if !n.pos.is_finite() || !(n.weight >= T::zero()) {
                return Err(Error::InvalidGraph("bad node".into()));
            }
        }
        for e in &self.edges {
            if e.src >= self.nodes.len() || e.dst >= self.nodes.len() || e.src == e.dst {
                return Err(Error::InvalidGraph("bad edge".into()));
            }
        }
        Ok(())
    }

    pub fn cast<U: Scalar>(&self) -> LaneGraph<U> {
        LaneGraph {
            frame: self.frame.cast(),
            nodes: self
                .nodes
                .iter()
                .map(|n| Node {
                    pos: n.pos.cast(),
                    weight: n.weight.cast(),
                })
                .collect(),
            edges: self
                .edges
                .iter()
                .map(|e| Edge {
                    src: e.src,
                    dst: e.dst,
                    score: e.score.cast(),
                })
                .collect(),
            edge_set: self.edge_set.clone(),
        }
    }
}


#[cfg(test)]
mod tests {
    use super::testutil::*;
    use super::*;

    #[test]
    fn rejects_self_loops_and_unknown_nodes() {
        let mut g = chain(&[(0.0, 0.0), (1.0, 0.0)]);
        assert!(g.add_edge(0, 0, 1.0).is_err());
        assert!(matches!(g.add_edge(0, 7, 1.0), Err(Error::UnknownNode(7))));
        assert_eq!(g.add_edge(0, 1, 1.0).unwrap(), None);
        assert!(g.add_edge(1, 0, 1.0).unwrap().is_some());
    }

    #[test]
    fn from_parts_validates() {
        let nodes = vec![
            Node {
                pos: Point2::new(0.0, 0.0),
                weight: 1.0,
            },
            Node {
                pos: Point2::new(f64::NAN, 0.0),
                weight: 1.0,
            },
        ];
        assert!(LaneGraph::from_parts(CoordinateFrame::world(), nodes, vec![]).is_err());
        let nodes = vec![
            Node {
                pos: Point2::new(0.0, 0.0),
                weight: 1.0,
            },
            Node {
                pos: Point2::new(1.0, 0.0),
                weight: 1.0,
            },
        ];
        let edges = vec![Edge {
            src: 0,
            dst: 1,
            score: 1.5,
        }];
        assert!(LaneGraph::from_parts(CoordinateFrame::world(), nodes, edges).is_err());
    }

    #[test]
    fn remove_edges_drops_new_orphans_only() {
        let mut g = graph(
            &[(0.0, 0.0), (1.0, 0.0), (2.0, 0.0), (9.0, 9.0)],
            &[(0, 1), (1, 2)],
        );
        g.set_weight(3, 4.0);
        let (h, map) = g.remove_edges_and_orphans(&[false, true]);
        assert_eq!(h.node_count(), 3);
        assert_eq!(h.edge_count(), 1);
        assert_eq!(map[2], None);
        assert_eq!(h.nodes()[map[3].unwrap()].weight, 4.0);
    }

    #[test]
    fn mean_angle_of_chain_interior_node() {
        let g = chain(&[(0.0, 0.0), (1.0, 0.0), (2.0, 1.0)]);
        let a = g.mean_node_angles();
        assert!(a[0].unwrap().abs() < 1e-12);
        let expected = std::f64::consts::FRAC_PI_8;
        assert!((a[1].unwrap() - expected).abs() < 1e-12);
    }
}
