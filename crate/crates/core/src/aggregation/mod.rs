//! Lateral aggregation of predicted lane graphs into a running world-frame
//! graph, cleanup of unconfirmed splits, merges and parallel branches, and
//! the drive loop that feeds it.

mod drive;

use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};

pub use drive::{
    drive, merge_drives, DriveAction, DriveEvent, DriveOutput, DriveState, FrontierEntry,
};

use crate::error::{invalid, Error, Result};
use crate::geometry::{angle_diff, point_segment_distance, Point2};
use crate::graph::{predecessor_tree, successor_tree, Adjacency, FrameKind, LaneGraph};
use crate::pipeline::SuccessorConfig;
use crate::scalar::Scalar;

/// Running aggregate in world pixels; node weights count observed merges.
pub type AggregatedGraph<T = f64> = LaneGraph<T>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AggregationScheme {
    /// Lateral weighting with split/merge validation.
    #[default]
    Full,
    /// Proximity merge onto the nearest node, no validation or weighting.
    Naive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AggregationConfig {
    pub scheme: AggregationScheme,
    /// Lateral distance below which a predicted node merges.
    pub a_thresh: f64,
    pub local_radius: f64,
    pub angle_gate: f64,
    /// Merge radius of the naive scheme.
    pub naive_radius: f64,
    /// Hops a split or merge branch must span to count as validated.
    pub validation_depth: usize,
    pub min_branch_weight: f64,
    pub max_parallel_edges: usize,
    /// Hop limit of the connectivity check before linking two merged nodes.
    pub link_hops: usize,
    pub max_steps: usize,
    pub max_branches: usize,
    pub max_branch_age: usize,
    pub frontier_tree_depth: usize,
    pub step_px: f64,
    pub revisit_px: f64,
    pub revisit_yaw: f64,
    pub smooth_gamma: f64,
    pub smooth_iters: usize,
    /// Per-crop prediction settings; filled from the top-level sampling and
    /// pruning sections of a pipeline config.
    #[serde(skip)]
    pub successor: SuccessorConfig,
}

impl Default for AggregationConfig {
    fn default() -> Self {
        Self {
            scheme: AggregationScheme::Full,
            a_thresh: 20.0,
            local_radius: 80.0,
            angle_gate: 0.5,
            naive_radius: 20.0,
            validation_depth: 3,
            min_branch_weight: 3.0,
            max_parallel_edges: 6,
            link_hops: 4,
            max_steps: 36,
            max_branches: 4,
            max_branch_age: 12,
            frontier_tree_depth: 10,
            step_px: 20.0,
            revisit_px: 15.0,
            revisit_yaw: 0.3,
            smooth_gamma: 0.05,
            smooth_iters: 2,
            successor: SuccessorConfig::default(),
        }
    }
}

impl AggregationConfig {
    pub fn validate(&self) -> Result<()> {
        let pos = [
            self.a_thresh,
            self.local_radius,
            self.angle_gate,
            self.naive_radius,
            self.step_px,
            self.revisit_px,
            self.revisit_yaw,
        ];
        if pos.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return invalid("aggregation distances and angles must be positive");
        }
        if self.validation_depth == 0
            || self.max_parallel_edges == 0
            || self.frontier_tree_depth == 0
        {
            return invalid("aggregation depths must be positive");
        }
        if !(self.min_branch_weight >= 0.0) {
            return invalid("min_branch_weight must be nonnegative");
        }
        if !(self.smooth_gamma > 0.0 && self.smooth_gamma < 1.0) {
            return invalid("smooth_gamma must lie in (0, 1)");
        }
        self.successor.sampling.validate()?;
        self.successor.pruning.validate()
    }
}

/// Predicted node to aggregated node correspondence of one merge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MergeMap {
    pub pairs: Vec<Option<usize>>,
}

impl MergeMap {
    pub fn unmapped(&self) -> Vec<usize> {
        (0..self.pairs.len())
            .filter(|&i| self.pairs[i].is_none())
            .collect()
    }

    pub fn mapped_count(&self) -> usize {
        self.pairs.iter().flatten().count()
    }
}

/// `A` moved along the edge direction onto the longitudinal coordinates of
/// `I` and `II`, with the lateral offset `a` and the distances `c1`, `c2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LateralProjection<T> {
    pub a_i: Point2<T>,
    pub a_ii: Point2<T>,
    pub a: T,
    pub b1: T,
    pub b2: T,
    pub c1: T,
    pub c2: T,
}

pub fn lateral_project<T: Scalar>(
    a: Point2<T>,
    i: Point2<T>,
    ii: Point2<T>,
) -> Result<LateralProjection<T>> {
    let u = (ii - i)
        .normalized()
        .ok_or_else(|| Error::Degenerate("merge edge has zero length".into()))?;
    let s1 = (i - a).dot(u);
    let s2 = (ii - a).dot(u);
    Ok(LateralProjection {
        a_i: a + u * s1,
        a_ii: a + u * s2,
        a: (a - i).cross(u).abs(),
        b1: s1.abs(),
        b2: s2.abs(),
        c1: a.dist(i),
        c2: a.dist(ii),
    })
}

/// Weighted lateral update of the edge `(I, II)` towards `A`. Returns the
/// new positions of `I` and `II`.
pub fn merge_node<T: Scalar>(
    a: Point2<T>,
    i: Point2<T>,
    w_i: T,
    ii: Point2<T>,
    w_ii: T,
) -> Result<(Point2<T>, Point2<T>)> {
    let p = lateral_project(a, i, ii)?;
    let c = p.c1 + p.c2;
    let w_ai = T::one() - p.c1 / c;
    let w_aii = T::one() - p.c2 / c;
    let blend = |x: Point2<T>, wx: T, y: Point2<T>, wy: T| {
        if wx + wy > T::zero() {
            (x * wx + y * wy) * (T::one() / (wx + wy))
        } else {
            x
        }
    };
    Ok((blend(i, w_i, p.a_i, w_ai), blend(ii, w_ii, p.a_ii, w_aii)))
}

fn check_frames<T: Scalar>(pred: &LaneGraph<T>, agg: &LaneGraph<T>) -> Result<()> {
    if pred.frame().kind != FrameKind::World || agg.frame().kind != FrameKind::World {
        return Err(Error::FrameMismatch(
            "aggregation expects world-frame graphs".into(),
        ));
    }
    Ok(())
}

/// Merges `pred` into `agg` with the configured scheme.
pub fn aggregate<T: Scalar>(
    pred: &LaneGraph<T>,
    agg: &AggregatedGraph<T>,
    cfg: &AggregationConfig,
) -> Result<(AggregatedGraph<T>, MergeMap)> {
    check_frames(pred, agg)?;
    match cfg.scheme {
        AggregationScheme::Full => aggregate_lateral(pred, agg, cfg),
        AggregationScheme::Naive => aggregate_naive(pred, agg, cfg),
    }
}

fn aggregate_lateral<T: Scalar>(
    pred: &LaneGraph<T>,
    agg: &AggregatedGraph<T>,
    cfg: &AggregationConfig,
) -> Result<(AggregatedGraph<T>, MergeMap)> {
    let mut out = remove_unvalidated_splits_merges(agg, cfg);
    let adj = out.adjacency();
    let pred_angle = pred.mean_node_angles();
    let agg_angle = out.mean_node_angles();
    let (lambda, psi, thresh) = (
        T::lit(cfg.local_radius),
        T::lit(cfg.angle_gate),
        T::lit(cfg.a_thresh),
    );
    let base_nodes = out.node_count();
    let mut pairs = vec![None; pred.node_count()];
    for (m, node) in pred.nodes().iter().enumerate() {
        let a = node.pos;
        let mut best_edge: Option<(T, usize)> = None;
        let mut best_node: Option<(T, usize)> = None;
        for k in 0..base_nodes {
            let d = out.pos(k).dist(a);
            if d >= lambda {
                continue;
            }
            if let (Some(x), Some(y)) = (pred_angle[m], agg_angle[k]) {
                if angle_diff(x, y) >= psi {
                    continue;
                }
            }
            if adj.out[k].is_empty() && adj.inc[k].is_empty() {
                if best_node.is_none_or(|(bd, bk)| d < bd || (d == bd && k < bk)) {
                    best_node = Some((d, k));
                }
                continue;
            }
            for &e in adj.out[k].iter().chain(&adj.inc[k]) {
                let ed = &out.edges()[e];
                let d = point_segment_distance(a, out.pos(ed.src), out.pos(ed.dst));
                if best_edge.is_none_or(|(bd, be)| d < bd || (d == bd && e < be)) {
                    best_edge = Some((d, e));
                }
            }
        }
        match (best_edge, best_node) {
            (Some((d, e)), n) if d < thresh && n.is_none_or(|(dn, _)| d <= dn) => {
                let ed = out.edges()[e];
                let (i, ii) = if a.dist(out.pos(ed.src)) <= a.dist(out.pos(ed.dst)) {
                    (ed.src, ed.dst)
                } else {
                    (ed.dst, ed.src)
                };
                let w_i = out.nodes()[i].weight;
                let (pi, pii) =
                    merge_node(a, out.pos(i), w_i, out.pos(ii), out.nodes()[ii].weight)?;
                out.set_pos(i, pi);
                out.set_pos(ii, pii);
                out.set_weight(i, w_i + T::one());
                pairs[m] = Some(i);
            }
            (_, Some((d, k))) if d < thresh => {
                // Isolated nodes carry no direction, so only the weight changes.
                out.set_weight(k, out.nodes()[k].weight + T::one());
                pairs[m] = Some(k);
            }
            _ => {}
        }
    }
    let map = MergeMap { pairs };
    insert_unmapped(pred, &mut out, &map, cfg.link_hops)?;
    Ok((out, map))
}

fn aggregate_naive<T: Scalar>(
    pred: &LaneGraph<T>,
    agg: &AggregatedGraph<T>,
    cfg: &AggregationConfig,
) -> Result<(AggregatedGraph<T>, MergeMap)> {
    let mut out = agg.clone();
    let radius = T::lit(cfg.naive_radius);
    let mut pairs = vec![None; pred.node_count()];
    for (m, node) in pred.nodes().iter().enumerate() {
        let mut best: Option<(T, usize)> = None;
        for k in 0..agg.node_count() {
            let d = agg.pos(k).dist(node.pos);
            if d < radius && best.is_none_or(|(bd, _)| d < bd) {
                best = Some((d, k));
            }
        }
        if let Some((_, k)) = best {
            out.set_weight(k, out.nodes()[k].weight + T::one());
            pairs[m] = Some(k);
        }
    }
    let map = MergeMap { pairs };
    insert_unmapped(pred, &mut out, &map, cfg.link_hops)?;
    Ok((out, map))
}

/// Adds unmapped predicted nodes with unit weight, then the predicted edges
/// routed through the mapped counterparts. An edge between two mapped nodes
/// is only added when they are not already connected within `link_hops`.
fn insert_unmapped<T: Scalar>(
    pred: &LaneGraph<T>,
    out: &mut LaneGraph<T>,
    map: &MergeMap,
    link_hops: usize,
) -> Result<()> {
    let mut target = vec![0usize; pred.node_count()];
    for (m, node) in pred.nodes().iter().enumerate() {
        target[m] = match map.pairs[m] {
            Some(k) => k,
            None => out.add_node(node.pos, T::one()),
        };
    }
    for e in pred.edges() {
        let (s, d) = (target[e.src], target[e.dst]);
        if s == d || out.has_edge(s, d) {
            continue;
        }
        if map.pairs[e.src].is_some() && map.pairs[e.dst].is_some() {
            let adj = out.adjacency();
            if within_hops(out, &adj, s, d, link_hops) || within_hops(out, &adj, d, s, link_hops) {
                continue;
            }
        }
        out.add_edge(s, d, e.score)?;
    }
    Ok(())
}

fn within_hops<T: Scalar>(
    g: &LaneGraph<T>,
    adj: &Adjacency,
    from: usize,
    to: usize,
    hops: usize,
) -> bool {
    let mut depth = HashMap::from([(from, 0usize)]);
    let mut queue = VecDeque::from([from]);
    while let Some(u) = queue.pop_front() {
        if u == to {
            return true;
        }
        let du = depth[&u];
        if du == hops {
            continue;
        }
        for &e in &adj.out[u] {
            let v = g.edges()[e].dst;
            if let std::collections::hash_map::Entry::Vacant(s) = depth.entry(v) {
                s.insert(du + 1);
                queue.push_back(v);
            }
        }
    }
    false
}

/// Edges of the branch that starts with `e`, continued while the chain has
/// no further junction. `forward` follows successors, otherwise
/// predecessors.
fn branch_edges<T: Scalar>(
    g: &LaneGraph<T>,
    adj: &Adjacency,
    e: usize,
    forward: bool,
) -> Vec<usize> {
    let mut out = vec![e];
    let mut cur = if forward {
        g.edges()[e].dst
    } else {
        g.edges()[e].src
    };
    while adj.in_degree(cur) == 1 && adj.out_degree(cur) == 1 && out.len() <= g.edge_count() {
        let next = if forward {
            adj.out[cur][0]
        } else {
            adj.inc[cur][0]
        };
        if next == e {
            break;
        }
        out.push(next);
        cur = if forward {
            g.edges()[next].dst
        } else {
            g.edges()[next].src
        };
    }
    out
}

/// Drops split branches (and merge branches, against edge direction) whose
/// tree over `validation_depth` hops has fewer edges than that depth or less
/// node weight than `min_branch_weight`.
pub fn remove_unvalidated_splits_merges<T: Scalar>(
    g: &LaneGraph<T>,
    cfg: &AggregationConfig,
) -> LaneGraph<T> {
    let adj = g.adjacency();
    let depth = cfg.validation_depth;
    let min_w = T::lit(cfg.min_branch_weight);
    let mut drop = vec![false; g.edge_count()];
    for n in 0..g.node_count() {
        for forward in [true, false] {
            let branches = if forward { &adj.out[n] } else { &adj.inc[n] };
            if branches.len() < 2 {
                continue;
            }
            for &e in branches {
                let root = if forward {
                    g.edges()[e].dst
                } else {
                    g.edges()[e].src
                };
                let tree = if forward {
                    successor_tree(g, &adj, root, depth - 1)
                } else {
                    predecessor_tree(g, &adj, root, depth - 1)
                };
                if tree.edges + 1 < depth || tree.weight < min_w {
                    for b in branch_edges(g, &adj, e, forward) {
                        drop[b] = true;
                    }
                }
            }
        }
    }
    if !drop.iter().any(|&d| d) {
        return g.clone();
    }
    g.remove_edges_and_orphans(&drop).0
}

/// Among junction-free paths that leave the same node and reach the same
/// node in fewer than `max_parallel_edges` edges, keeps only the one with the
/// largest interior node weight (ties: fewer edges, then lower edge ids).
pub fn remove_parallel_branches<T: Scalar>(
    g: &LaneGraph<T>,
    max_parallel_edges: usize,
) -> LaneGraph<T> {
    let adj = g.adjacency();
    let mut drop = vec![false; g.edge_count()];
    for s in 0..g.node_count() {
        if adj.out_degree(s) < 2 {
            continue;
        }
        let mut groups: HashMap<usize, Vec<(T, Vec<usize>)>> = HashMap::new();
        for &e in &adj.out[s] {
            let path = branch_edges(g, &adj, e, true);
            let end = g.edges()[*path.last().expect("non-empty")].dst;
            let interior = adj.in_degree(end) == 1 && adj.out_degree(end) == 1;
            if end == s || interior || path.len() >= max_parallel_edges {
                continue;
            }
            let weight = path[..path.len() - 1]
                .iter()
                .map(|&p| g.nodes()[g.edges()[p].dst].weight)
                .fold(T::zero(), |a, b| a + b);
            groups.entry(end).or_default().push((weight, path));
        }
        for (_, mut paths) in groups {
            if paths.len() < 2 {
                continue;
            }
            paths.sort_by(|a, b| {
                b.0.partial_cmp(&a.0)
                    .unwrap_or(std::cmp::Ordering::Equal)
                    .then(a.1.len().cmp(&b.1.len()))
                    .then(a.1.cmp(&b.1))
            });
            for (_, p) in &paths[1..] {
                for &e in p {
                    drop[e] = true;
                }
            }
        }
    }
    if !drop.iter().any(|&d| d) {
        return g.clone();
    }
    g.remove_edges_and_orphans(&drop).0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::testutil::{chain, graph};

    fn p(x: f64, y: f64) -> Point2<f64> {
        Point2::new(x, y)
    }

    #[test]
    fn lateral_projection_right_triangle() {
        let r = lateral_project(p(1.0, 1.0), p(0.0, 0.0), p(3.0, 0.0)).unwrap();
        assert!(
            (r.a - 1.0).abs() < 1e-12 && (r.b1 - 1.0).abs() < 1e-12 && (r.b2 - 2.0).abs() < 1e-12
        );
        assert!(r.a_i.dist(p(0.0, 1.0)) < 1e-12 && r.a_ii.dist(p(3.0, 1.0)) < 1e-12);
        // b_k = c_k sin(arccos(a / c_k))
        let b1 = r.c1 * (r.a / r.c1).acos().sin();
        assert!((b1 - r.b1).abs() < 1e-12);
        let above = lateral_project(p(0.0, 4.0), p(0.0, 0.0), p(3.0, 0.0)).unwrap();
        assert_eq!(above.a_i, p(0.0, 4.0));
        assert_eq!(above.b1, 0.0);
        assert!(lateral_project(p(1.0, 1.0), p(2.0, 2.0), p(2.0, 2.0)).is_err());
    }

    #[test]
    fn merge_node_weighted_update() {
        let (i, ii) = merge_node(p(1.0, 1.0), p(0.0, 0.0), 2.0, p(3.0, 0.0), 1.0).unwrap();
        let (c1, c2) = (2f64.sqrt(), 5f64.sqrt());
        let w = 1.0 - c1 / (c1 + c2);
        assert!((w - 0.6126).abs() < 1e-4);
        assert!(i.x.abs() < 1e-12 && (i.y - w / (2.0 + w)).abs() < 1e-12);
        assert!((i.y - 0.2345).abs() < 1e-4);
        let w2 = 1.0 - c2 / (c1 + c2);
        assert!((ii.x - 3.0).abs() < 1e-12 && (ii.y - w2 / (1.0 + w2)).abs() < 1e-12);
        let (same, _) = merge_node(p(0.0, 0.0), p(0.0, 0.0), 1.0, p(3.0, 0.0), 1.0).unwrap();
        assert_eq!(same, p(0.0, 0.0));
        let (heavy, _) = merge_node(p(1.0, 1.0), p(0.0, 0.0), 1e12, p(3.0, 0.0), 1.0).unwrap();
        assert!(heavy.norm() < 1e-9);
    }

    fn cfg() -> AggregationConfig {
        AggregationConfig::default()
    }

    #[test]
    fn aggregate_into_empty_adds_everything() {
        let pred = chain(&[(0.0, 0.0), (20.0, 0.0), (40.0, 0.0)]);
        let empty = LaneGraph::new(pred.frame().clone());
        let (out, map) = aggregate(&pred, &empty, &cfg()).unwrap();
        assert_eq!(map.mapped_count(), 0);
        assert_eq!(out.node_count(), 3);
        assert_eq!(out.edge_count(), 2);
        assert!(out.nodes().iter().all(|n| n.weight == 1.0));
    }

    #[test]
    fn self_aggregation_only_raises_weights() {
        let g = chain(&[(0.0, 0.0), (20.0, 0.0), (40.0, 0.0), (60.0, 5.0)]);
        let (out, map) = aggregate(&g, &g, &cfg()).unwrap();
        assert_eq!(map.mapped_count(), 4);
        assert_eq!((out.node_count(), out.edge_count()), (4, 3));
        assert!(out.nodes().iter().all(|n| n.weight == 2.0));
        assert_eq!(out.positions(), g.positions());
    }

    #[test]
    fn lateral_offset_merges_between() {
        let agg = chain(&[(0.0, 0.0), (20.0, 0.0), (40.0, 0.0), (60.0, 0.0)]);
        let pred = chain(&[(0.0, 5.0), (20.0, 5.0), (40.0, 5.0), (60.0, 5.0)]);
        let (out, _) = aggregate(&pred, &agg, &cfg()).unwrap();
        assert_eq!(out.node_count(), 4);
        for n in out.nodes() {
            assert!(n.pos.y > 0.0 && n.pos.y < 5.0, "{:?}", n.pos);
        }
    }

    #[test]
    fn longitudinal_shift_is_ignored() {
        let agg = chain(&[(0.0, 0.0), (20.0, 0.0), (40.0, 0.0), (60.0, 0.0)]);
        let a = chain(&[(0.0, 4.0), (20.0, 4.0), (40.0, 4.0), (60.0, 4.0)]);
        let b = chain(&[(2.5, 4.0), (22.5, 4.0), (42.5, 4.0), (62.0, 4.0)]);
        let (oa, _) = aggregate(&a, &agg, &cfg()).unwrap();
        let (ob, _) = aggregate(&b, &agg, &cfg()).unwrap();
        for (x, y) in oa.positions().iter().zip(ob.positions()) {
            assert!(x.dist(y) < 1.0, "{x:?} vs {y:?}");
        }
    }

    #[test]
    fn extension_beyond_the_end_is_added() {
        let agg = chain(&[(0.0, 0.0), (20.0, 0.0), (40.0, 0.0)]);
        let pred = chain(&[(20.0, 0.0), (40.0, 0.0), (60.0, 0.0), (80.0, 0.0)]);
        let (out, map) = aggregate(&pred, &agg, &cfg()).unwrap();
        assert_eq!(map.pairs[..2], [Some(1), Some(2)]);
        assert_eq!(out.node_count(), 5);
        assert!(out.has_edge(2, 3) && out.has_edge(3, 4));
    }

    #[test]
    fn opposite_direction_is_not_merged() {
        let agg = chain(&[(0.0, 0.0), (20.0, 0.0), (40.0, 0.0)]);
        let pred = chain(&[(40.0, 3.0), (20.0, 3.0), (0.0, 3.0)]);
        let (out, map) = aggregate(&pred, &agg, &cfg()).unwrap();
        assert_eq!(map.mapped_count(), 0);
        assert_eq!(out.node_count(), 6);
    }

    #[test]
    fn naive_scheme_keeps_positions() {
        let agg = chain(&[(0.0, 0.0), (20.0, 0.0), (40.0, 0.0)]);
        let pred = chain(&[(0.0, 5.0), (20.0, 5.0), (40.0, 5.0)]);
        let c = AggregationConfig {
            scheme: AggregationScheme::Naive,
            ..cfg()
        };
        let (out, map) = aggregate(&pred, &agg, &c).unwrap();
        assert_eq!(map.mapped_count(), 3);
        assert_eq!(out.positions(), agg.positions());
        assert!(out.nodes().iter().all(|n| n.weight == 2.0));
    }

    #[test]
    fn frame_mismatch_is_rejected() {
        let g = chain(&[(0.0, 0.0), (1.0, 0.0)]);
        let crop = g
            .clone()
            .with_frame(crate::graph::CoordinateFrame::crop_local(p(0.0, 0.0), 0.0));
        assert!(matches!(
            aggregate(&crop, &g, &cfg()),
            Err(Error::FrameMismatch(_))
        ));
    }

    #[test]
    fn stub_branch_is_removed() {
        // 0-1-2-3-4 with a one-edge stub 1 -> 5
        let g = graph(
            &[
                (0.0, 0.0),
                (20.0, 0.0),
                (40.0, 0.0),
                (60.0, 0.0),
                (80.0, 0.0),
                (40.0, 20.0),
            ],
            &[(0, 1), (1, 2), (2, 3), (3, 4), (1, 5)],
        );
        let out = remove_unvalidated_splits_merges(&g, &cfg());
        assert_eq!((out.node_count(), out.edge_count()), (5, 4));
        let long = graph(
            &[
                (0.0, 0.0),
                (20.0, 0.0),
                (40.0, 0.0),
                (60.0, 0.0),
                (80.0, 0.0),
                (40.0, 20.0),
                (60.0, 40.0),
                (80.0, 60.0),
            ],
            &[(0, 1), (1, 2), (2, 3), (3, 4), (1, 5), (5, 6), (6, 7)],
        );
        assert_eq!(remove_unvalidated_splits_merges(&long, &cfg()), long);
    }

    #[test]
    fn light_merge_branch_is_removed() {
        // Two 3-edge incoming branches meet at node 6; one has weight 1 in
        // total, the other 6.
        let mut g = graph(
            &[
                (0.0, 0.0),
                (20.0, 0.0),
                (40.0, 0.0),
                (0.0, 40.0),
                (20.0, 40.0),
                (40.0, 40.0),
                (60.0, 20.0),
                (80.0, 20.0),
            ],
            &[(0, 1), (1, 2), (2, 6), (3, 4), (4, 5), (5, 6), (6, 7)],
        );
        for n in 0..3 {
            g.set_weight(n, 1.0 / 3.0);
        }
        for n in 3..6 {
            g.set_weight(n, 2.0);
        }
        let out = remove_unvalidated_splits_merges(&g, &cfg());
        assert_eq!((out.node_count(), out.edge_count()), (5, 4));
        assert!(out.nodes().iter().all(|n| n.pos.y != 0.0));
    }

    #[test]
    fn parallel_branches() {
        // two 3-edge paths 0 -> 7, the upper one heavier
        let mut g = graph(
            &[
                (0.0, 0.0),
                (20.0, 10.0),
                (40.0, 10.0),
                (20.0, -10.0),
                (40.0, -10.0),
                (80.0, 0.0),
                (100.0, 0.0),
                (60.0, 0.0),
            ],
            &[
                (0, 1),
                (1, 2),
                (2, 7),
                (0, 3),
                (3, 4),
                (4, 7),
                (7, 5),
                (5, 6),
            ],
        );
        g.set_weight(1, 3.0);
        g.set_weight(2, 2.0);
        let out = remove_parallel_branches(&g, 6);
        assert_eq!((out.node_count(), out.edge_count()), (6, 5));
        assert!(out.nodes().iter().all(|n| n.pos.y >= 0.0));

        let mut long = LaneGraph::new(g.frame().clone());
        long.add_node(p(0.0, 0.0), 1.0);
        let t = long.add_node(p(200.0, 0.0), 1.0);
        for side in [1.0, -1.0] {
            let mut prev = 0;
            for k in 1..7 {
                let n = long.add_node(p(k as f64 * 200.0 / 7.0, side * 20.0), 1.0);
                long.add_edge(prev, n, 1.0).unwrap();
                prev = n;
            }
            long.add_edge(prev, t, 1.0).unwrap();
        }
        assert_eq!(remove_parallel_branches(&long, 6), long);
        let single = chain(&[(0.0, 0.0), (10.0, 0.0), (20.0, 0.0)]);
        assert_eq!(remove_parallel_branches(&single, 6), single);
    }
}
