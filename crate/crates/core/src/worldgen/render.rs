//! Distance-field rendering of lane graphs into rasters.

use std::collections::VecDeque;

use crate::error::{invalid, Result};
use crate::geometry::{angle_diff, point_segment_distance, Point2, Pose};
use crate::graph::LaneGraph;
use crate::raster::Raster;
use crate::scalar::Scalar;

pub const DEFAULT_FALLOFF_PX: f64 = 8.0;
pub const EGO_START_RADIUS_PX: f64 = 30.0;
pub const EGO_START_ANGLE_RAD: f64 = 0.6;

/// Axis-aligned pixel lattice. Pixel `(u, v)` is centered on
/// `origin + (u, v)` in the graph's coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PixelGrid {
    pub origin: Point2<f64>,
    pub width: usize,
    pub height: usize,
}

impl PixelGrid {
    pub fn new(origin: Point2<f64>, width: usize, height: usize) -> Self {
        Self {
            origin,
            width,
            height,
        }
    }

    /// Lattice of a crop-local raster of the given side.
    pub fn crop(side: usize) -> Self {
        Self::new(Point2::zero(), side, side)
    }
}

/// Distance from each pixel center to the nearest edge of `g`, saturating at
/// `cap`. Row-major, one value per pixel.
pub fn distance_field<T: Scalar>(g: &LaneGraph<T>, grid: &PixelGrid, cap: f64) -> Vec<f64> {
    let (w, h) = (grid.width, grid.height);
    let mut field = vec![cap; w * h];
    for e in g.edges() {
        let a = g.pos(e.src).cast::<f64>() - grid.origin;
        let b = g.pos(e.dst).cast::<f64>() - grid.origin;
        let u0 = (a.x.min(b.x) - cap).floor().max(0.0);
        let v0 = (a.y.min(b.y) - cap).floor().max(0.0);
        let u1 = (a.x.max(b.x) + cap).ceil().min(w as f64 - 1.0);
        let v1 = (a.y.max(b.y) + cap).ceil().min(h as f64 - 1.0);
        if u0 > u1 || v0 > v1 {
            continue;
        }
        for v in v0 as usize..=v1 as usize {
            for u in u0 as usize..=u1 as usize {
                let d = point_segment_distance(Point2::new(u as f64, v as f64), a, b);
                let slot = &mut field[v * w + u];
                if d < *slot {
                    *slot = d;
                }
            }
        }
    }
    field
}

/// Inverse distance raster: `max(0, 1 - d / falloff)` with `d` the distance to
/// the nearest edge.
pub fn render_isdf<T: Scalar>(g: &LaneGraph<T>, grid: &PixelGrid, falloff: f64) -> Result<Raster> {
    if !(falloff > 0.0 && falloff.is_finite()) {
        return invalid(format!("falloff must be positive, got {falloff}"));
    }
    let field = distance_field(g, grid, falloff);
    let data = field
        .into_iter()
        .map(|d| (1.0 - d / falloff).max(0.0) as f32)
        .collect();
    Ok(Raster::from_data(grid.width, grid.height, 1, data))
}

/// Graph node closest to `pose` within `radius` whose incident travel
/// direction agrees with the pose heading to within `max_angle`. Outgoing
/// edges are consulted first; nodes without them fall back to incoming ones.
pub fn ego_start_node<T: Scalar>(
    g: &LaneGraph<T>,
    pose: &Pose<T>,
    radius: T,
    max_angle: T,
) -> Option<usize> {
    let adj = g.adjacency();
    let mut cands: Vec<(T, usize)> = (0..g.node_count())
        .filter_map(|n| {
            let d = g.pos(n).dist(pose.position());
            (d <= radius).then_some((d, n))
        })
        .collect();
    cands.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
    cands.into_iter().map(|(_, n)| n).find(|&n| {
        let dirs = if adj.out[n].is_empty() {
            &adj.inc[n]
        } else {
            &adj.out[n]
        };
        dirs.iter()
            .any(|&e| angle_diff(g.edge_vector(e).angle(), pose.yaw) <= max_angle)
    })
}

/// Subgraph reachable along edge directions from `start`: reached nodes and
/// every edge leaving them.
pub fn reachable_subgraph<T: Scalar>(g: &LaneGraph<T>, start: usize) -> LaneGraph<T> {
    let adj = g.adjacency();
    let mut seen = vec![false; g.node_count()];
    seen[start] = true;
    let mut queue = VecDeque::from([start]);
    while let Some(u) = queue.pop_front() {
        for &e in &adj.out[u] {
            let v = g.edges()[e].dst;
            if !seen[v] {
                seen[v] = true;
                queue.push_back(v);
            }
        }
    }
    let keep_edge: Vec<bool> = g.edges().iter().map(|e| seen[e.src]).collect();
    g.retain(&seen, &keep_edge).0
}

/// Part of `g` reachable from the pose under the default start gating, or an
/// empty graph when no node qualifies.
pub fn ego_subgraph<T: Scalar>(g: &LaneGraph<T>, pose: &Pose<T>) -> LaneGraph<T> {
    match ego_start_node(
        g,
        pose,
        T::lit(EGO_START_RADIUS_PX),
        T::lit(EGO_START_ANGLE_RAD),
    ) {
        Some(s) => reachable_subgraph(g, s),
        None => LaneGraph::new(*g.frame()),
    }
}

/// ISDF of the lanes reachable from `pose`; zero when no start node matches.
pub fn render_ego_isdf<T: Scalar>(g: &LaneGraph<T>, pose: &Pose<T>, grid: &PixelGrid) -> Raster {
    render_isdf(&ego_subgraph(g, pose), grid, DEFAULT_FALLOFF_PX).expect("positive falloff")
}
