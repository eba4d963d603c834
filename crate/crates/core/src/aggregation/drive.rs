//! Depth-first exploration of a world with a virtual agent: predict the
//! successor graph at the current pose, aggregate it, step along the graph,
//! and fall back to queued split branches when a branch ends.

use log::{debug, warn};
use serde::{Deserialize, Serialize};

use super::{
    aggregate, remove_parallel_branches, AggregatedGraph, AggregationConfig, AggregationScheme,
};
use crate::error::Result;
use crate::geometry::{angle_diff, project_on_segment, Point2, Pose};
use crate::graph::{
    laplacian_smooth, successor_tree, to_world, Adjacency, CoordinateFrame, LaneGraph,
};
use crate::pipeline::predict_successor;
use crate::sampling::WorldAccessor;
use crate::scalar::Scalar;
use crate::scorer::Scorer;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DriveAction {
    Step,
    PopFrontier,
    Terminate,
}

/// One line of the drive trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriveEvent {
    pub step: usize,
    pub pose: Pose<f64>,
    pub action: DriveAction,
    pub node_count: usize,
    pub edge_count: usize,
}

/// Untraversed split branch: the pose one step into it and its
/// successor-tree weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrontierEntry {
    pub pose: Pose<f64>,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DriveState {
    pub pose: Pose<f64>,
    pub step_counter: usize,
    pub branch_counter: usize,
    pub branch_age: usize,
    pub branch_alive: bool,
    pub frontier: Vec<FrontierEntry>,
    pub visited_poses: Vec<Pose<f64>>,
}

#[derive(Debug, Clone)]
pub struct DriveOutput<T = f64> {
    pub graph: AggregatedGraph<T>,
    pub state: DriveState,
    pub trace: Vec<DriveEvent>,
}

fn observe<T: Scalar, W: WorldAccessor + ?Sized, S: Scorer<T> + ?Sized>(
    pose: &Pose<f64>,
    world: &W,
    scorer: &S,
    cfg: &AggregationConfig,
) -> Result<LaneGraph<T>> {
    let sample = world.crop(pose)?;
    let pred = predict_successor::<T, S>(&sample, scorer, &cfg.successor)?;
    let g = to_world(&pred.graph, &sample.crop_pose().cast::<T>())?;
    laplacian_smooth(&g, T::lit(cfg.smooth_gamma), cfg.smooth_iters)
}

fn revisited(visited: &[Pose<f64>], p: &Pose<f64>, cfg: &AggregationConfig) -> bool {
    visited.iter().any(|v| {
        v.position().dist(p.position()) < cfg.revisit_px
            && angle_diff(v.yaw, p.yaw) < cfg.revisit_yaw
    })
}

fn tree_weight<T: Scalar>(g: &LaneGraph<T>, adj: &Adjacency, e: usize, depth: usize) -> f64 {
    successor_tree(g, adj, g.edges()[e].dst, depth)
        .weight
        .to_f64c()
}

enum Walk {
    Reached(Pose<f64>),
    /// Ran out of successors; the last node reached, if any was.
    DeadEnd(Option<Pose<f64>>),
}

/// Walks `dist` pixels from `from` along edge `e` and onward. At splits the
/// heaviest forward edge is taken; the others go to `frontier` if given.
fn walk<T: Scalar>(
    g: &LaneGraph<T>,
    adj: &Adjacency,
    mut e: usize,
    mut from: Point2<f64>,
    dist: f64,
    cfg: &AggregationConfig,
    mut frontier: Option<&mut Vec<FrontierEntry>>,
) -> Walk {
    let pos = |n: usize| g.pos(n).cast::<f64>();
    let mut remaining = dist;
    let mut last = None;
    for _ in 0..=g.edge_count() {
        let ed = g.edges()[e];
        let dir = (pos(ed.dst) - pos(ed.src)).angle();
        let left = from.dist(pos(ed.dst));
        if remaining <= left && left > 0.0 {
            let p = from.lerp(pos(ed.dst), remaining / left);
            return Walk::Reached(Pose::new(p.x, p.y, dir));
        }
        remaining -= left;
        let v = ed.dst;
        last = Some(Pose::new(pos(v).x, pos(v).y, dir));
        let mut forward: Vec<(f64, usize)> = adj.out[v]
            .iter()
            .filter(|&&o| {
                angle_diff((pos(g.edges()[o].dst) - pos(v)).angle(), dir)
                    < std::f64::consts::FRAC_PI_2
            })
            .map(|&o| (tree_weight(g, adj, o, cfg.frontier_tree_depth), o))
            .collect();
        if forward.is_empty() {
            return Walk::DeadEnd(last);
        }
        forward.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        if let Some(f) = frontier.as_deref_mut() {
            for &(w, o) in &forward[1..] {
                let entry = match walk(g, adj, o, pos(v), cfg.step_px, cfg, None) {
                    Walk::Reached(p) => Some(p),
                    Walk::DeadEnd(p) => p,
                };
                if let Some(pose) = entry {
                    f.push(FrontierEntry { pose, weight: w });
                }
            }
        }
        e = forward[0].1;
        from = pos(v);
    }
    Walk::DeadEnd(last)
}

/// Next pose one step ahead of `pose` on the aggregated graph, queueing the
/// branches passed on the way. `None` when the branch ends.
fn step_forward<T: Scalar>(
    g: &LaneGraph<T>,
    pose: &Pose<f64>,
    cfg: &AggregationConfig,
    frontier: &mut Vec<FrontierEntry>,
) -> Option<Pose<f64>> {
    let q = pose.position();
    let mut best: Option<(f64, usize, Point2<f64>)> = None;
    for (e, ed) in g.edges().iter().enumerate() {
        let (a, b) = (g.pos(ed.src).cast::<f64>(), g.pos(ed.dst).cast::<f64>());
        if angle_diff((b - a).angle(), pose.yaw) >= std::f64::consts::FRAC_PI_2 {
            continue;
        }
        let (foot, _) = project_on_segment(q, a, b);
        let d = foot.dist(q);
        if d < cfg.a_thresh && best.is_none_or(|(bd, _, _)| d < bd) {
            best = Some((d, e, foot));
        }
    }
    let (_, e, foot) = best?;
    match walk(g, &g.adjacency(), e, foot, cfg.step_px, cfg, Some(frontier)) {
        Walk::Reached(p) => Some(p),
        Walk::DeadEnd(_) => None,
    }
}

fn pop_frontier(st: &mut DriveState, cfg: &AggregationConfig) -> Option<FrontierEntry> {
    loop {
        let (k, _) = st
            .frontier
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.weight.total_cmp(&b.1.weight).then(b.0.cmp(&a.0)))?;
        let entry = st.frontier.remove(k);
        if entry.weight >= cfg.min_branch_weight && !revisited(&st.visited_poses, &entry.pose, cfg)
        {
            return Some(entry);
        }
    }
}

/// Explores from `p_init` until the step or branch budget is spent or no
/// frontier branch is left. A failed prediction ends the current branch.
pub fn drive<T: Scalar, W: WorldAccessor + ?Sized, S: Scorer<T> + ?Sized>(
    p_init: Pose<f64>,
    world: &W,
    scorer: &S,
    cfg: &AggregationConfig,
) -> Result<DriveOutput<T>> {
    cfg.validate()?;
    let mut agg: AggregatedGraph<T> = LaneGraph::new(CoordinateFrame::world());
    let mut st = DriveState {
        pose: p_init,
        step_counter: 0,
        branch_counter: 1,
        branch_age: 0,
        branch_alive: true,
        frontier: Vec::new(),
        visited_poses: Vec::new(),
    };
    let mut trace = Vec::new();
    let event = |st: &DriveState, g: &LaneGraph<T>, action| DriveEvent {
        step: st.step_counter,
        pose: st.pose,
        action,
        node_count: g.node_count(),
        edge_count: g.edge_count(),
    };
    while st.step_counter < cfg.max_steps {
        if !st.branch_alive {
            if st.branch_counter >= cfg.max_branches {
                break;
            }
            let Some(entry) = pop_frontier(&mut st, cfg) else {
                break;
            };
            st.branch_counter += 1;
            st.branch_age = 0;
            st.branch_alive = true;
            st.pose = entry.pose;
            trace.push(event(&st, &agg, DriveAction::PopFrontier));
        }
        st.branch_age += 1;
        st.step_counter += 1;
        st.visited_poses.push(st.pose);
        match observe::<T, W, S>(&st.pose, world, scorer, cfg) {
            Ok(pred) => agg = aggregate(&pred, &agg, cfg)?.0,
            Err(err) => {
                warn!("prediction at {:?} failed, ending branch: {err}", st.pose);
                st.branch_alive = false;
                continue;
            }
        }
        trace.push(event(&st, &agg, DriveAction::Step));
        let next = step_forward(&agg, &st.pose, cfg, &mut st.frontier);
        match next {
            Some(p)
                if st.branch_age < cfg.max_branch_age && !revisited(&st.visited_poses, &p, cfg) =>
            {
                st.pose = p
            }
            _ => {
                debug!(
                    "branch {} ends after {} steps",
                    st.branch_counter, st.branch_age
                );
                st.branch_alive = false;
            }
        }
    }
    trace.push(event(&st, &agg, DriveAction::Terminate));
    Ok(DriveOutput {
        graph: agg,
        state: st,
        trace,
    })
}

/// Folds the drive outputs into one graph in the given order. The full
/// scheme finishes by removing short parallel branches.
pub fn merge_drives<T: Scalar>(
    outputs: &[AggregatedGraph<T>],
    cfg: &AggregationConfig,
) -> Result<AggregatedGraph<T>> {
    let mut acc: AggregatedGraph<T> = match outputs.first() {
        Some(g) => g.clone(),
        None => return Ok(LaneGraph::new(CoordinateFrame::world())),
    };
    for g in &outputs[1..] {
        acc = aggregate(g, &acc, cfg)?.0;
    }
    if cfg.scheme == AggregationScheme::Full {
        acc = remove_parallel_branches(&acc, cfg.max_parallel_edges);
    }
    Ok(acc)
}
