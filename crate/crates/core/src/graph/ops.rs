use std::collections::{HashMap, VecDeque};

use super::{Adjacency, CoordinateFrame, FrameKind, LaneGraph};
use crate::error::{invalid, Error, Result};
use crate::geometry::{Aabb, Point2, Pose};
use crate::scalar::Scalar;

/// Laplacian smoothing `X <- (I - gamma L) X` with `L = D - A` of the
/// undirected representation, applied `iterations` times. Topology, weights
/// and scores are left untouched.
pub fn laplacian_smooth<T: Scalar>(
    g: &LaneGraph<T>,
    gamma: T,
    iterations: usize,
) -> Result<LaneGraph<T>> {
    if !(gamma > T::zero() && gamma < T::one()) {
        return invalid(format!("smoothing gamma {gamma} outside (0, 1)"));
    }
    let nb = g.undirected_neighbors();
    let mut x = g.positions();
    let mut next = x.clone();
    for _ in 0..iterations {
        for (i, n) in nb.iter().enumerate() {
            let mut lap = x[i] * T::lit(n.len() as f64);
            for &j in n {
                lap = lap - x[j];
            }
            next[i] = x[i] - lap * gamma;
        }
        std::mem::swap(&mut x, &mut next);
    }
    Ok(g.with_positions(&x))
}

/// Maps a crop-local graph into world coordinates given the crop frame pose.
pub fn to_world<T: Scalar>(g: &LaneGraph<T>, crop_pose: &Pose<T>) -> Result<LaneGraph<T>> {
    if g.frame().kind != FrameKind::CropLocal {
        return Err(Error::FrameMismatch(
            "to_world expects a crop-local graph".into(),
        ));
    }
    let moved: Vec<_> = g.nodes().iter().map(|n| crop_pose.apply(n.pos)).collect();
    let mut frame = CoordinateFrame::world();
    frame.resolution_m_per_px = g.frame().resolution_m_per_px;
    Ok(g.with_positions(&moved).with_frame(frame))
}

/// Inverse of [`to_world`].
pub fn to_crop<T: Scalar>(g: &LaneGraph<T>, crop_pose: &Pose<T>) -> Result<LaneGraph<T>> {
    if g.frame().kind != FrameKind::World {
        return Err(Error::FrameMismatch("to_crop expects a world graph".into()));
    }
    let moved: Vec<_> = g
        .nodes()
        .iter()
        .map(|n| crop_pose.apply_inverse(n.pos))
        .collect();
    let mut frame = CoordinateFrame::crop_local(crop_pose.position(), crop_pose.yaw);
    frame.resolution_m_per_px = g.frame().resolution_m_per_px;
    Ok(g.with_positions(&moved).with_frame(frame))
}

/// Restricts a graph to a closed window. Edges crossing the border are cut at
/// the border, where a new node is inserted.
pub fn crop_graph<T: Scalar>(g: &LaneGraph<T>, window: &Aabb<T>) -> LaneGraph<T> {
    let mut out = LaneGraph::new(*g.frame());
    let map: Vec<Option<usize>> = g
        .nodes()
        .iter()
        .map(|n| {
            window
                .contains(n.pos)
                .then(|| out.add_node(n.pos, n.weight))
        })
        .collect();
    let eps = T::lit(1e-6);
    let mut border: Vec<usize> = Vec::new();
    let mut border_node = |out: &mut LaneGraph<T>, p: Point2<T>, w: T| -> usize {
        let p = Point2::new(
            p.x.max(window.min.x).min(window.max.x),
            p.y.max(window.min.y).min(window.max.y),
        );
        if let Some(&id) = border.iter().find(|&&id| out.pos(id).dist(p) < eps) {
            return id;
        }
        let id = out.add_node(p, w);
        border.push(id);
        id
    };
    for e in g.edges() {
        let a = g.nodes()[e.src];
        let b = g.nodes()[e.dst];
        if let (Some(s), Some(d)) = (map[e.src], map[e.dst]) {
            out.add_edge(s, d, e.score).expect("valid cropped edge");
            continue;
        }
        let Some((t0, t1)) = window.clip_segment(a.pos, b.pos) else {
            continue;
        };
        if t1 - t0 <= T::lit(1e-9) {
            continue;
        }
        let s = match map[e.src] {
            Some(s) => s,
            None => border_node(
                &mut out,
                a.pos.lerp(b.pos, t0),
                a.weight + (b.weight - a.weight) * t0,
            ),
        };
        let d = match map[e.dst] {
            Some(d) => d,
            None => border_node(
                &mut out,
                a.pos.lerp(b.pos, t1),
                a.weight + (b.weight - a.weight) * t1,
            ),
        };
        if s != d {
            out.add_edge(s, d, e.score).expect("valid clipped edge");
        }
    }
    out
}

/// Subdivides every edge longer than `spacing` into `ceil(len / spacing)`
/// equal pieces. Opposite edges between the same two nodes share the inserted
/// nodes.
pub fn interpolate_uniform<T: Scalar>(g: &LaneGraph<T>, spacing: T) -> Result<LaneGraph<T>> {
    if !(spacing > T::zero()) {
        return invalid(format!("interpolation spacing {spacing} must be positive"));
    }
    let mut out = LaneGraph::new(*g.frame());
    for n in g.nodes() {
        out.add_node(n.pos, n.weight);
    }
    // Inserted nodes per unordered pair, ordered from the lower id to the higher.
    let mut inserted: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
    for e in g.edges() {
        let a = g.nodes()[e.src];
        let b = g.nodes()[e.dst];
        let len = a.pos.dist(b.pos);
        if len <= spacing {
            out.add_edge(e.src, e.dst, e.score)?;
            continue;
        }
        let key = (e.src.min(e.dst), e.src.max(e.dst));
        let mids = inserted
            .entry(key)
            .or_insert_with(|| {
                let (lo, hi) = (g.nodes()[key.0], g.nodes()[key.1]);
                let k = (len / spacing).ceil().to_usize().unwrap_or(1).max(1);
                (1..k)
                    .map(|m| {
                        let t = T::lit(m as f64) / T::lit(k as f64);
                        out.add_node(
                            lo.pos.lerp(hi.pos, t),
                            lo.weight + (hi.weight - lo.weight) * t,
                        )
                    })
                    .collect()
            })
            .clone();
        let chain: Vec<usize> = if e.src == key.0 {
            std::iter::once(e.src)
                .chain(mids.iter().copied())
                .chain(std::iter::once(e.dst))
                .collect()
        } else {
            std::iter::once(e.src)
                .chain(mids.iter().rev().copied())
                .chain(std::iter::once(e.dst))
                .collect()
        };
        for w in chain.windows(2) {
            out.add_edge(w[0], w[1], e.score)?;
        }
    }
    Ok(out)
}

/// Summary of a depth-limited breadth-first tree.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TreeStats<T> {
    /// Distinct nodes reached, root included.
    pub nodes: usize,
    /// Tree edges, one per discovered node.
    pub edges: usize,
    /// Sum of node weights over the reached nodes.
    pub weight: T,
}

fn bfs_tree<T: Scalar>(
    g: &LaneGraph<T>,
    adj: &Adjacency,
    root: usize,
    depth: usize,
    forward: bool,
) -> TreeStats<T> {
    let mut seen = HashMap::new();
    seen.insert(root, 0usize);
    let mut queue = VecDeque::from([root]);
    let mut stats = TreeStats {
        nodes: 1,
        edges: 0,
        weight: g.nodes()[root].weight,
    };
    while let Some(u) = queue.pop_front() {
        let d = seen[&u];
        if d >= depth {
            continue;
        }
        let next = if forward { &adj.out[u] } else { &adj.inc[u] };
        for &e in next {
            let v = if forward {
                g.edges()[e].dst
            } else {
                g.edges()[e].src
            };
            if seen.contains_key(&v) {
                continue;
            }
            seen.insert(v, d + 1);
            stats.nodes += 1;
            stats.edges += 1;
            stats.weight += g.nodes()[v].weight;
            queue.push_back(v);
        }
    }
    stats
}

/// Breadth-first tree following edge directions from `root`, `depth` hops deep.
pub fn successor_tree<T: Scalar>(
    g: &LaneGraph<T>,
    adj: &Adjacency,
    root: usize,
    depth: usize,
) -> TreeStats<T> {
    bfs_tree(g, adj, root, depth, true)
}

/// Breadth-first tree against edge directions from `root`.
pub fn predecessor_tree<T: Scalar>(
    g: &LaneGraph<T>,
    adj: &Adjacency,
    root: usize,
    depth: usize,
) -> TreeStats<T> {
    bfs_tree(g, adj, root, depth, false)
}

/// Sum of node weights over the successor tree rooted at the head of `edge`,
/// truncated at `depth` hops. Nodes reachable along several paths count once.
pub fn successor_tree_weight<T: Scalar>(g: &LaneGraph<T>, edge: usize, depth: usize) -> Result<T> {
    let e = g.edges().get(edge).ok_or(Error::UnknownEdge(edge))?;
    Ok(successor_tree(g, &g.adjacency(), e.dst, depth).weight)
}
