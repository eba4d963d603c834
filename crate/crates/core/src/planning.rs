//! Route planning on lane graphs and the MMD / MED / SR evaluation of a
//! predicted graph against ground-truth routes.

use std::collections::BinaryHeap;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::{point_segment_distance, Point2};
use crate::graph::{LaneGraph, DEFAULT_RESOLUTION_M_PER_PX};
use crate::scalar::Scalar;
use crate::shortest_path::{euclidean_dijkstra, HeapItem};
use crate::spatial::GridIndex;

/// Route length cap of generated tasks: 200 m at 0.15 m/px.
pub const DEFAULT_MAX_ROUTE_PX: f64 = 1333.0;

/// A* with Euclidean edge lengths and the straight-line heuristic.
/// Returns the node sequence, or `None` if `goal` is unreachable.
pub fn astar<T: Scalar>(g: &LaneGraph<T>, start: usize, goal: usize) -> Result<Option<Vec<usize>>> {
    let n = g.node_count();
    for id in [start, goal] {
        if id >= n {
            return Err(Error::UnknownNode(id));
        }
    }
    let adj = g.adjacency();
    let h = |v: usize| g.pos(v).dist(g.pos(goal));
    let mut cost: Vec<Option<T>> = vec![None; n];
    let mut parent = vec![usize::MAX; n];
    let mut closed = vec![false; n];
    let mut heap = BinaryHeap::new();
    cost[start] = Some(T::zero());
    heap.push(HeapItem {
        key: h(start),
        node: start,
    });
    while let Some(HeapItem { node, .. }) = heap.pop() {
        if closed[node] {
            continue;
        }
        if node == goal {
            let mut path = vec![goal];
            let mut cur = goal;
            while cur != start {
                cur = parent[cur];
                path.push(cur);
            }
            path.reverse();
            return Ok(Some(path));
        }
        closed[node] = true;
        let base = cost[node].expect("settled nodes have a cost");
        for &e in &adj.out[node] {
            let v = g.edges()[e].dst;
            if closed[v] {
                continue;
            }
            let c = base + g.edge_length(e);
            if cost[v].is_none_or(|old| c < old) {
                cost[v] = Some(c);
                parent[v] = node;
                heap.push(HeapItem {
                    key: c + h(v),
                    node: v,
                });
            }
        }
    }
    Ok(None)
}

/// Polyline length of a node path.
pub fn path_length<T: Scalar>(g: &LaneGraph<T>, path: &[usize]) -> T {
    path.windows(2).map(|w| g.pos(w[0]).dist(g.pos(w[1]))).sum()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanTask {
    pub start: usize,
    pub goal: usize,
    pub gt_path: Vec<usize>,
}

/// Samples `n` (start, goal) pairs uniformly, with replacement, from all
/// distinct connected pairs of `gt` whose shortest route is at most
/// `max_len` pixels.
pub fn make_tasks<T: Scalar>(
    gt: &LaneGraph<T>,
    n: usize,
    max_len: f64,
    seed: u64,
) -> Result<Vec<PlanTask>> {
    if n == 0 {
        return invalid("task count must be positive");
    }
    if !(max_len > 0.0) {
        return invalid("max route length must be positive");
    }
    let adj = gt.adjacency();
    let trees: Vec<_> = (0..gt.node_count())
        .into_par_iter()
        .map(|s| euclidean_dijkstra(gt, &adj, s, Some(T::lit(max_len))))
        .collect();
    let pairs: Vec<(usize, usize)> = trees
        .iter()
        .enumerate()
        .flat_map(|(s, t)| {
            t.dist
                .iter()
                .enumerate()
                .filter(move |(v, d)| *v != s && d.is_some())
                .map(move |(v, _)| (s, v))
        })
        .collect();
    if pairs.is_empty() {
        return invalid("graph has no connected node pair within the route length");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..n)
        .map(|_| {
            let (s, v) = pairs[rng.gen_range(0..pairs.len())];
            PlanTask {
                start: s,
                goal: v,
                gt_path: trees[s].node_path(gt, v).expect("reachable pair"),
            }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PlanConfig {
    /// Task endpoints bind to the nearest predicted node within this radius.
    pub projection_px: f64,
    pub resolution_m_per_px: f64,
    /// Spacing of the points along the predicted route used for MMD.
    pub sample_spacing_m: f64,
}

impl Default for PlanConfig {
    fn default() -> Self {
        Self {
            projection_px: 40.0,
            resolution_m_per_px: DEFAULT_RESOLUTION_M_PER_PX,
            sample_spacing_m: 0.5,
        }
    }
}

impl PlanConfig {
    pub fn validate(&self) -> Result<()> {
        if [
            self.projection_px,
            self.resolution_m_per_px,
            self.sample_spacing_m,
        ]
        .iter()
        .any(|v| !(*v > 0.0 && v.is_finite()))
        {
            return invalid("planning distances must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlanStatus {
    Success,
    ProjectionFailed,
    NoRoute,
}

/// Per-task result. `mmd_m`/`med_m` are set for successful tasks. The
/// best-effort values also cover `NoRoute` tasks, using the route to the
/// reachable predicted node closest to the goal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskOutcome {
    pub status: PlanStatus,
    pub gt_length_m: f64,
    pub mmd_m: Option<f64>,
    pub med_m: Option<f64>,
    pub best_effort_mmd_m: Option<f64>,
    pub best_effort_med_m: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanReport {
    /// Mean over successful tasks; absent when none succeeded.
    pub mmd: Option<f64>,
    pub med: Option<f64>,
    pub sr: f64,
    pub n_tasks: usize,
    /// Means over every task with a best-effort route.
    pub best_effort_mmd: Option<f64>,
    pub best_effort_med: Option<f64>,
}

fn densify_path(points: &[Point2<f64>], spacing: f64) -> Vec<Point2<f64>> {
    let mut out = vec![points[0]];
    for w in points.windows(2) {
        let k = (w[0].dist(w[1]) / spacing).ceil().max(1.0) as usize;
        out.extend((1..=k).map(|j| w[0].lerp(w[1], j as f64 / k as f64)));
    }
    out
}

fn polyline_distance(p: Point2<f64>, line: &[Point2<f64>]) -> f64 {
    if line.len() == 1 {
        return p.dist(line[0]);
    }
    line.windows(2)
        .map(|w| point_segment_distance(p, w[0], w[1]))
        .fold(f64::INFINITY, f64::min)
}

fn route_errors(
    route: &[Point2<f64>],
    gt: &[Point2<f64>],
    goal: Point2<f64>,
    cfg: &PlanConfig,
) -> (f64, f64) {
    let pts = densify_path(route, cfg.sample_spacing_m / cfg.resolution_m_per_px);
    let mmd = pts.iter().map(|&p| polyline_distance(p, gt)).sum::<f64>() / pts.len() as f64;
    let med = route.last().expect("non-empty route").dist(goal);
    (mmd * cfg.resolution_m_per_px, med * cfg.resolution_m_per_px)
}

/// Plans every task on `pred` and compares the routes with the GT routes.
pub fn evaluate_plans<T: Scalar, U: Scalar>(
    pred: &LaneGraph<T>,
    gt: &LaneGraph<U>,
    tasks: &[PlanTask],
    cfg: &PlanConfig,
) -> Result<(PlanReport, Vec<TaskOutcome>)> {
    cfg.validate()?;
    if tasks.is_empty() {
        return invalid("no planning tasks");
    }
    for t in tasks {
        if t.gt_path.is_empty() || t.gt_path.iter().any(|&v| v >= gt.node_count()) {
            return invalid("task path does not fit the GT graph");
        }
    }
    let pred64: LaneGraph<f64> = pred.cast();
    let gt64: LaneGraph<f64> = gt.cast();
    let index = GridIndex::new(&pred64.positions(), cfg.projection_px);
    let adj = pred64.adjacency();
    let outcomes: Result<Vec<TaskOutcome>> = tasks
        .par_iter()
        .map(|t| {
            let gt_pts: Vec<_> = t.gt_path.iter().map(|&v| gt64.pos(v)).collect();
            let goal = gt64.pos(t.goal);
            let mut out = TaskOutcome {
                status: PlanStatus::ProjectionFailed,
                gt_length_m: path_length(&gt64, &t.gt_path) * cfg.resolution_m_per_px,
                mmd_m: None,
                med_m: None,
                best_effort_mmd_m: None,
                best_effort_med_m: None,
            };
            let (Some((s, _)), Some((g, _))) = (
                index.nearest_within(gt64.pos(t.start), cfg.projection_px),
                index.nearest_within(goal, cfg.projection_px),
            ) else {
                return Ok(out);
            };
            let route = match astar(&pred64, s, g)? {
                Some(route) => {
                    out.status = PlanStatus::Success;
                    route
                }
                None => {
                    out.status = PlanStatus::NoRoute;
                    let tree = euclidean_dijkstra(&pred64, &adj, s, None);
                    let best = (0..pred64.node_count())
                        .filter(|&v| tree.dist[v].is_some())
                        .min_by(|&a, &b| {
                            pred64
                                .pos(a)
                                .dist(goal)
                                .total_cmp(&pred64.pos(b).dist(goal))
                        })
                        .expect("the start reaches itself");
                    tree.node_path(&pred64, best).expect("reachable")
                }
            };
            let pts: Vec<_> = route.iter().map(|&v| pred64.pos(v)).collect();
            let (mmd, med) = route_errors(&pts, &gt_pts, goal, cfg);
            if out.status == PlanStatus::Success {
                out.mmd_m = Some(mmd);
                out.med_m = Some(med);
            }
            out.best_effort_mmd_m = Some(mmd);
            out.best_effort_med_m = Some(med);
            Ok(out)
        })
        .collect();
    let outcomes = outcomes?;
    let mean = |f: &dyn Fn(&TaskOutcome) -> Option<f64>| {
        let v: Vec<f64> = outcomes.iter().filter_map(f).collect();
        (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
    };
    let report = PlanReport {
        mmd: mean(&|o| o.mmd_m),
        med: mean(&|o| o.med_m),
        sr: outcomes
            .iter()
            .filter(|o| o.status == PlanStatus::Success)
            .count() as f64
            / tasks.len() as f64,
        n_tasks: tasks.len(),
        best_effort_mmd: mean(&|o| o.best_effort_mmd_m),
        best_effort_med: mean(&|o| o.best_effort_med_m),
    };
    Ok((report, outcomes))
}

/// Per-task CSV with both accountings of failed tasks.
pub fn write_task_csv<W: Write>(
    mut w: W,
    tasks: &[PlanTask],
    outcomes: &[TaskOutcome],
) -> Result<()> {
    writeln!(
        w,
        "task,start,goal,status,gt_length_m,mmd_m,med_m,best_effort_mmd_m,best_effort_med_m"
    )?;
    let opt = |v: Option<f64>| v.map(|x| format!("{x:.6}")).unwrap_or_default();
    for (k, (t, o)) in tasks.iter().zip(outcomes).enumerate() {
        let status = serde_json::to_value(o.status)?;
        writeln!(
            w,
            "{k},{},{},{},{:.6},{},{},{},{}",
            t.start,
            t.goal,
            status.as_str().unwrap_or_default(),
            o.gt_length_m,
            opt(o.mmd_m),
            opt(o.med_m),
            opt(o.best_effort_mmd_m),
            opt(o.best_effort_med_m)
        )?;
    }
    Ok(())
}
