//! Oriented crops, proposal graphs and their ground-truth targets.
//!
//! A crop is a 256x256 raster in which the virtual agent sits at pixel
//! (128, 255) facing up. Proposal nodes are Halton points kept where the ego
//! mask is confident; proposal edges join node pairs within a distance band.

use log::debug;
use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::{angle_diff, point_segment_distance, Aabb, Point2, Pose};
use crate::graph::{crop_graph, to_crop, CoordinateFrame, LaneGraph};
use crate::halton::halton_points;
use crate::raster::Raster;
use crate::scalar::Scalar;
use crate::shortest_path::dijkstra;
use crate::worldgen::{ego_subgraph, render_isdf, PixelGrid, World, DEFAULT_FALLOFF_PX};

pub const CROP_SIZE: usize = 256;
pub const PATCH_SIDE: usize = 32;
pub const PATCH_CHANNELS: usize = 4;
/// Flattened length of one oriented aerial patch.
pub const BEV_DIM: usize = PATCH_CHANNELS * PATCH_SIDE * PATCH_SIDE;
pub const GEO_DIM: usize = 4;
pub const NODE_DIM: usize = 2;
/// Score floor used when edge scores become traversal costs.
pub const SCORE_EPS: f64 = 1e-6;

/// Agent position in crop pixels.
pub fn anchor<T: Scalar>() -> Point2<T> {
    Point2::new(T::lit(128.0), T::lit(255.0))
}

/// Agent pose in crop coordinates: at the anchor, facing up the image.
pub fn anchor_pose<T: Scalar>() -> Pose<T> {
    Pose::new(
        T::lit(128.0),
        T::lit(255.0),
        T::lit(-std::f64::consts::FRAC_PI_2),
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SamplingConfig {
    pub n_raw: usize,
    pub halton_bases: [u64; 2],
    pub ego_threshold: f64,
    pub d_min: f64,
    pub d_max: f64,
    /// Interior points tested against the ego mask along each edge.
    pub corridor_samples: usize,
    /// Distance at which node and edge target scores saturate to zero.
    pub saturation_px: f64,
    pub score_exponent: i32,
    pub patch_min_px: f64,
    pub patch_max_px: f64,
    pub pose_sigma_px: f64,
    pub pose_sigma_yaw: f64,
    /// Gate nodes and edge corridors with the ego mask. When off, the lane
    /// mask of the whole crop is used instead (ablation).
    pub use_ego_mask: bool,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        Self {
            n_raw: 400,
            halton_bases: [2, 3],
            ego_threshold: 0.15,
            d_min: 10.0,
            d_max: 40.0,
            corridor_samples: 8,
            saturation_px: 32.0,
            score_exponent: 8,
            patch_min_px: 16.0,
            patch_max_px: 64.0,
            pose_sigma_px: 5.0,
            pose_sigma_yaw: 0.3,
            use_ego_mask: true,
        }
    }
}

impl SamplingConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_raw == 0 {
            return invalid("n_raw must be positive");
        }
        if !(self.ego_threshold > 0.0 && self.ego_threshold < 1.0) {
            return invalid("ego_threshold must lie in (0, 1)");
        }
        if !(self.d_min > 0.0 && self.d_min < self.d_max) {
            return invalid("need 0 < d_min < d_max");
        }
        if !(self.saturation_px > 0.0) || self.score_exponent < 1 {
            return invalid("target scoring parameters must be positive");
        }
        if !(self.patch_min_px > 0.0 && self.patch_min_px <= self.patch_max_px) {
            return invalid("need 0 < patch_min_px <= patch_max_px");
        }
        if !(self.pose_sigma_px >= 0.0 && self.pose_sigma_yaw >= 0.0) {
            return invalid("pose noise must be nonnegative");
        }
        Ok(())
    }
}

/// Pose of the crop frame (pixel (0, 0), x along columns) for an agent pose.
pub fn crop_frame_pose<T: Scalar>(agent: &Pose<T>) -> Pose<T> {
    let theta = agent.yaw + T::lit(std::f64::consts::FRAC_PI_2);
    let offset = anchor::<T>().rotate(theta);
    Pose::new(agent.x - offset.x, agent.y - offset.y, theta)
}

/// Inverse of [`crop_frame_pose`].
pub fn agent_pose_from_crop<T: Scalar>(crop: &Pose<T>) -> Pose<T> {
    let p = crop.apply(anchor());
    Pose::new(p.x, p.y, crop.yaw - T::lit(std::f64::consts::FRAC_PI_2))
}

/// One oriented crop with its oracle masks and ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct CropSample {
    pub image: Raster,
    pub lane_mask: Raster,
    pub ego_mask: Raster,
    /// World pose of the agent.
    pub pose: Pose<f64>,
    /// Lanes reachable from the agent, in crop pixels.
    pub gt_successor: LaneGraph<f64>,
}

impl CropSample {
    pub fn crop_pose(&self) -> Pose<f64> {
        crop_frame_pose(&self.pose)
    }

    pub fn validate(&self) -> Result<()> {
        for (r, ch, name) in [
            (&self.image, 3, "image"),
            (&self.lane_mask, 1, "lane mask"),
            (&self.ego_mask, 1, "ego mask"),
        ] {
            if r.width() != CROP_SIZE || r.height() != CROP_SIZE || r.channels() != ch {
                return Err(Error::DimensionMismatch(format!(
                    "{name} must be {CROP_SIZE}x{CROP_SIZE}x{ch}"
                )));
            }
        }
        self.gt_successor.validate()
    }
}

/// Source of oriented crops at arbitrary agent poses.
pub trait WorldAccessor: Sync {
    fn crop(&self, agent: &Pose<f64>) -> Result<CropSample>;
}

impl WorldAccessor for World {
    fn crop(&self, agent: &Pose<f64>) -> Result<CropSample> {
        extract_crop(self, agent)
    }
}

fn resample_crop(src: &Raster, crop_pose: &Pose<f64>) -> Raster {
    let ch = src.channels();
    let mut out = Raster::new(CROP_SIZE, CROP_SIZE, ch);
    for v in 0..CROP_SIZE {
        for u in 0..CROP_SIZE {
            let p = crop_pose.apply(Point2::new(u as f64, v as f64));
            for c in 0..ch {
                out.set(u, v, c, src.bilinear_reflect(p.x, p.y, c));
            }
        }
    }
    out
}

/// Cuts the crop for `agent` out of the world. Rasters are mirrored at the
/// world border; the ego mask is the ISDF of the GT lanes reachable from the
/// agent.
pub fn extract_crop(world: &World, agent: &Pose<f64>) -> Result<CropSample> {
    if !(agent.x.is_finite() && agent.y.is_finite() && agent.yaw.is_finite()) {
        return invalid("agent pose must be finite");
    }
    let crop_pose = crop_frame_pose(agent);
    let window = Aabb::new(
        Point2::zero(),
        Point2::new(CROP_SIZE as f64 - 1.0, CROP_SIZE as f64 - 1.0),
    );
    let local = crop_graph(&to_crop(&world.gt, &crop_pose)?, &window);
    let gt_successor = ego_subgraph(&local, &anchor_pose());
    let ego_mask = render_isdf(
        &gt_successor,
        &PixelGrid::crop(CROP_SIZE),
        DEFAULT_FALLOFF_PX,
    )?;
    Ok(CropSample {
        image: resample_crop(&world.aerial, &crop_pose),
        lane_mask: resample_crop(&world.lane_isdf, &crop_pose),
        ego_mask,
        pose: *agent,
        gt_successor,
    })
}

/// Perturbs a pose with zero-mean Gaussian noise, deterministically per seed.
pub fn noisy_crop_pose(gt_pose: &Pose<f64>, seed: u64, sigma_px: f64, sigma_yaw: f64) -> Pose<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = |s: f64| {
        if s > 0.0 {
            Normal::new(0.0, s).expect("valid sigma").sample(&mut rng)
        } else {
            0.0
        }
    };
    let (dx, dy, dyaw) = (draw(sigma_px), draw(sigma_px), draw(sigma_yaw));
    Pose::new(gt_pose.x + dx, gt_pose.y + dy, gt_pose.yaw + dyaw)
}

/// Agent poses on GT nodes with an outgoing edge, heading along that edge.
/// Nodes are drawn without replacement while possible.
pub fn sample_agent_poses(world: &World, n: usize, seed: u64) -> Result<Vec<Pose<f64>>> {
    let adj = world.gt.adjacency();
    let mut nodes: Vec<usize> = (0..world.gt.node_count())
        .filter(|&v| adj.out_degree(v) > 0)
        .collect();
    if nodes.is_empty() {
        return invalid("world graph has no drivable node");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    nodes.shuffle(&mut rng);
    Ok((0..n)
        .map(|i| {
            world
                .pose_at_node(nodes[i % nodes.len()])
                .expect("drivable node")
        })
        .collect())
}

/// Halton points scaled to the crop, kept where the ego mask reaches
/// `ego_threshold`.
pub fn build_proposal_nodes<T: Scalar>(
    ego_mask: &Raster,
    n_raw: usize,
    ego_threshold: f64,
    bases: (u64, u64),
) -> Result<Vec<Point2<T>>> {
    let side = T::lit(CROP_SIZE as f64);
    Ok(halton_points::<T>(n_raw, bases)?
        .into_iter()
        .map(|p| p * side)
        .filter(|p| {
            ego_mask.nearest_clamped(p.x.to_f64c(), p.y.to_f64c(), 0) as f64 >= ego_threshold
        })
        .collect())
}

/// Directed edges in both directions between node pairs whose distance lies
/// in `[d_min, d_max]` and whose interior samples all stay on the ego mask.
pub fn build_proposal_edges<T: Scalar>(
    nodes: &[Point2<T>],
    d_min: T,
    d_max: T,
    ego_mask: &Raster,
    ego_threshold: f64,
    samples: usize,
) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    let on_mask = |a: Point2<T>, b: Point2<T>| {
        (1..=samples).all(|k| {
            let p = a.lerp(b, T::lit(k as f64 / (samples + 1) as f64));
            ego_mask.nearest_clamped(p.x.to_f64c(), p.y.to_f64c(), 0) as f64 >= ego_threshold
        })
    };
    for i in 0..nodes.len() {
        for j in i + 1..nodes.len() {
            let d = nodes[i].dist(nodes[j]);
            if d >= d_min && d <= d_max && on_mask(nodes[i], nodes[j]) {
                edges.push((i, j));
                edges.push((j, i));
            }
        }
    }
    edges
}

/// Node positions normalized by the crop size.
pub fn node_features<T: Scalar>(nodes: &[Point2<T>]) -> Array2<T> {
    let s = T::lit(CROP_SIZE as f64);
    let mut x = Array2::zeros((nodes.len(), NODE_DIM));
    for (i, p) in nodes.iter().enumerate() {
        x[[i, 0]] = p.x / s;
        x[[i, 1]] = p.y / s;
    }
    x
}

/// Per edge: direction angle (full-quadrant), length over the crop diagonal,
/// and the midpoint over the crop size.
pub fn geometric_edge_features<T: Scalar>(
    nodes: &[Point2<T>],
    edges: &[(usize, usize)],
) -> Array2<T> {
    let s = T::lit(CROP_SIZE as f64);
    let diag = s * T::lit(std::f64::consts::SQRT_2);
    let mut x = Array2::zeros((edges.len(), GEO_DIM));
    for (k, &(i, j)) in edges.iter().enumerate() {
        let (a, b) = (nodes[i], nodes[j]);
        let d = b - a;
        let mid = a.lerp(b, T::lit(0.5));
        x[[k, 0]] = d.angle();
        x[[k, 1]] = d.norm() / diag;
        x[[k, 2]] = mid.x / s;
        x[[k, 3]] = mid.y / s;
    }
    x
}

/// Oriented 32x32 patches of RGB and lane mask around each edge, flattened
/// row-major with channels innermost. The patch x axis follows the edge.
pub fn aerial_edge_features<T: Scalar>(
    sample: &CropSample,
    nodes: &[Point2<T>],
    edges: &[(usize, usize)],
    cfg: &SamplingConfig,
) -> Array2<T> {
    let mut x = Array2::zeros((edges.len(), BEV_DIM));
    let n = PATCH_SIDE as f64;
    for (k, &(i, j)) in edges.iter().enumerate() {
        let (a, b) = (nodes[i].cast::<f64>(), nodes[j].cast::<f64>());
        let len = a.dist(b);
        let dir = (b - a).normalized().unwrap_or(Point2::new(1.0, 0.0));
        let across = dir.perp();
        let mid = a.lerp(b, 0.5);
        let side = len.clamp(cfg.patch_min_px, cfg.patch_max_px);
        let mut row = x.row_mut(k);
        for r in 0..PATCH_SIDE {
            let t = ((r as f64 + 0.5) / n - 0.5) * side;
            for c in 0..PATCH_SIDE {
                let s = ((c as f64 + 0.5) / n - 0.5) * side;
                let p = mid + dir * s + across * t;
                let base = (r * PATCH_SIDE + c) * PATCH_CHANNELS;
                for ch in 0..3 {
                    row[base + ch] = T::lit(sample.image.bilinear(p.x, p.y, ch) as f64);
                }
                row[base + 3] = T::lit(sample.lane_mask.bilinear(p.x, p.y, 0) as f64);
            }
        }
    }
    x
}

/// Attributed proposal graph of one crop.
#[derive(Debug, Clone)]
pub struct ProposalGraph<T = f64> {
    /// Topology in crop pixels; scores are unset (zero).
    pub base: LaneGraph<T>,
    pub node_features: Array2<T>,
    pub geo_edge_features: Array2<T>,
    pub bev_edge_features: Array2<T>,
    /// Node at the agent anchor.
    pub start: usize,
}

impl<T: Scalar> PartialEq for ProposalGraph<T> {
    fn eq(&self, o: &Self) -> bool {
        self.base == o.base
            && self.start == o.start
            && self.node_features == o.node_features
            && self.geo_edge_features == o.geo_edge_features
            && self.bev_edge_features == o.bev_edge_features
    }
}

impl<T: Scalar> ProposalGraph<T> {
    /// Samples nodes and edges for a crop and computes all features. The
    /// agent anchor is always node 0 so every proposal graph has a start.
    pub fn build(sample: &CropSample, cfg: &SamplingConfig) -> Result<Self> {
        cfg.validate()?;
        let mask = if cfg.use_ego_mask {
            &sample.ego_mask
        } else {
            &sample.lane_mask
        };
        let mut nodes = vec![anchor::<T>()];
        nodes.extend(build_proposal_nodes::<T>(
            mask,
            cfg.n_raw,
            cfg.ego_threshold,
            (cfg.halton_bases[0], cfg.halton_bases[1]),
        )?);
        let edges = build_proposal_edges(
            &nodes,
            T::lit(cfg.d_min),
            T::lit(cfg.d_max),
            mask,
            cfg.ego_threshold,
            cfg.corridor_samples,
        );
        Self::from_topology(sample, nodes, &edges, 0, cfg)
    }

    /// Computes features for a given node and edge list.
    pub fn from_topology(
        sample: &CropSample,
        nodes: Vec<Point2<T>>,
        edges: &[(usize, usize)],
        start: usize,
        cfg: &SamplingConfig,
    ) -> Result<Self> {
        if start >= nodes.len() {
            return Err(Error::UnknownNode(start));
        }
        let crop = sample.crop_pose().cast::<T>();
        let mut base = LaneGraph::new(CoordinateFrame::crop_local(crop.position(), crop.yaw));
        for &p in &nodes {
            base.add_node(p, T::one());
        }
        for &(i, j) in edges {
            if base.add_edge(i, j, T::zero())?.is_none() {
                return Err(Error::InvalidGraph(format!(
                    "duplicate proposal edge {i} -> {j}"
                )));
            }
        }
        Ok(Self {
            node_features: node_features(&nodes),
            geo_edge_features: geometric_edge_features(&nodes, edges),
            bev_edge_features: aerial_edge_features(sample, &nodes, edges, cfg),
            base,
            start,
        })
    }

    pub fn node_count(&self) -> usize {
        self.base.node_count()
    }

    pub fn edge_count(&self) -> usize {
        self.base.edge_count()
    }

    pub fn edge_list(&self) -> Vec<(usize, usize)> {
        self.base.edges().iter().map(|e| (e.src, e.dst)).collect()
    }

    pub fn validate(&self) -> Result<()> {
        let (v, e) = (self.node_count(), self.edge_count());
        let ok = self.node_features.dim() == (v, NODE_DIM)
            && self.geo_edge_features.dim() == (e, GEO_DIM)
            && self.bev_edge_features.dim() == (e, BEV_DIM);
        if !ok {
            return Err(Error::DimensionMismatch(format!(
                "feature tables do not match |V|={v}, |E|={e}"
            )));
        }
        Ok(())
    }

    pub fn cast<U: Scalar>(&self) -> ProposalGraph<U> {
        ProposalGraph {
            base: self.base.cast(),
            node_features: self.node_features.mapv(|x| x.cast()),
            geo_edge_features: self.geo_edge_features.mapv(|x| x.cast()),
            bev_edge_features: self.bev_edge_features.mapv(|x| x.cast()),
            start: self.start,
        }
    }
}

/// Ground-truth targets for a proposal graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetLabels<T = f64> {
    pub node_scores: Vec<T>,
    pub endpoint_flags: Vec<bool>,
    pub edge_labels: Vec<bool>,
}

impl<T: Scalar> TargetLabels<T> {
    pub fn check_aligned<U: Scalar>(&self, g: &ProposalGraph<U>) -> Result<()> {
        let (v, e) = (g.node_count(), g.edge_count());
        if self.node_scores.len() != v
            || self.endpoint_flags.len() != v
            || self.edge_labels.len() != e
        {
            return Err(Error::DimensionMismatch(format!(
                "labels sized for |V|={}, |E|={} but graph has {v}, {e}",
                self.node_scores.len(),
                self.edge_labels.len()
            )));
        }
        Ok(())
    }

    pub fn cast<U: Scalar>(&self) -> TargetLabels<U> {
        TargetLabels {
            node_scores: self.node_scores.iter().map(|x| x.cast()).collect(),
            endpoint_flags: self.endpoint_flags.clone(),
            edge_labels: self.edge_labels.clone(),
        }
    }
}

/// Distance from `p` to the nearest GT edge (or node, for edgeless graphs).
fn distance_to_graph<T: Scalar>(p: Point2<T>, gt: &LaneGraph<f64>) -> Option<f64> {
    let p = p.cast::<f64>();
    if gt.edge_count() == 0 {
        return gt.nodes().iter().map(|n| n.pos.dist(p)).reduce(f64::min);
    }
    gt.edges()
        .iter()
        .map(|e| point_segment_distance(p, gt.pos(e.src), gt.pos(e.dst)))
        .reduce(f64::min)
}

/// GT nodes where lanes end inside the crop. Graphs whose every node has a
/// successor (a loop) use the node farthest from the anchor instead.
pub fn gt_endpoints(gt: &LaneGraph<f64>) -> Vec<usize> {
    let adj = gt.adjacency();
    let ends: Vec<usize> = (0..gt.node_count())
        .filter(|&n| adj.out_degree(n) == 0)
        .collect();
    if !ends.is_empty() || gt.is_empty() {
        return ends;
    }
    let a = anchor::<f64>();
    let far = (0..gt.node_count())
        .max_by(|&x, &y| {
            gt.pos(x)
                .dist(a)
                .partial_cmp(&gt.pos(y).dist(a))
                .unwrap()
                .then(y.cmp(&x))
        })
        .expect("non-empty graph");
    vec![far]
}

/// Node target scores `(1 - d)^k` with `d` the saturated distance to the GT,
/// plus one endpoint flag on the nearest node to each GT endpoint.
pub fn score_target_nodes<T: Scalar>(
    nodes: &[Point2<T>],
    gt: &LaneGraph<f64>,
    cfg: &SamplingConfig,
) -> (Vec<T>, Vec<bool>) {
    let scores = nodes
        .iter()
        .map(|&p| match distance_to_graph(p, gt) {
            Some(d) => T::lit((1.0 - (d / cfg.saturation_px).min(1.0)).powi(cfg.score_exponent)),
            None => T::zero(),
        })
        .collect();
    let mut flags = vec![false; nodes.len()];
    if nodes.is_empty() {
        return (scores, flags);
    }
    for end in gt_endpoints(gt) {
        let q = gt.pos(end);
        let (best, d) = nodes
            .iter()
            .enumerate()
            .map(|(i, p)| (i, p.cast::<f64>().dist(q)))
            .fold(
                (0, f64::INFINITY),
                |acc, x| if x.1 < acc.1 { x } else { acc },
            );
        debug!("gt endpoint {end} flagged on proposal node {best} at {d:.2} px");
        flags[best] = true;
    }
    (scores, flags)
}

/// Continuous edge target `(1 - d_angle * d_l2)^k`. `d_angle` is the wrapped
/// direction difference to the GT edge nearest the edge midpoint, over pi;
/// `d_l2` is the largest saturated GT distance among both endpoints and the
/// midpoint.
pub fn edge_target_scores<T: Scalar>(
    g: &LaneGraph<T>,
    gt: &LaneGraph<f64>,
    cfg: &SamplingConfig,
) -> Vec<T> {
    (0..g.edge_count())
        .map(|k| {
            if gt.edge_count() == 0 {
                return T::zero();
            }
            let e = &g.edges()[k];
            let (a, b) = (g.pos(e.src).cast::<f64>(), g.pos(e.dst).cast::<f64>());
            let mid = a.lerp(b, 0.5);
            let nearest = (0..gt.edge_count())
                .map(|ge| {
                    let ge_ = &gt.edges()[ge];
                    (
                        ge,
                        point_segment_distance(mid, gt.pos(ge_.src), gt.pos(ge_.dst)),
                    )
                })
                .fold(
                    (0, f64::INFINITY),
                    |acc, x| if x.1 < acc.1 { x } else { acc },
                )
                .0;
            let d_angle =
                angle_diff((b - a).angle(), gt.edge_vector(nearest).angle()) / std::f64::consts::PI;
            let d_l2 = [a, mid, b]
                .iter()
                .map(|&p| distance_to_graph(p, gt).unwrap_or(f64::INFINITY))
                .fold(0.0, f64::max);
            let d_l2 = (d_l2 / cfg.saturation_px).min(1.0);
            T::lit((1.0 - d_angle * d_l2).powi(cfg.score_exponent))
        })
        .collect()
}

/// Binary edge labels: edges on a minimum-cost path (cost = 1 / score) from
/// `start` to some flagged endpoint.
pub fn score_target_edges<T: Scalar>(
    g: &LaneGraph<T>,
    gt: &LaneGraph<f64>,
    start: usize,
    endpoint_flags: &[bool],
    cfg: &SamplingConfig,
) -> Vec<bool> {
    let scores = edge_target_scores(g, gt, cfg);
    let mut labels = vec![false; g.edge_count()];
    if !endpoint_flags.iter().any(|&f| f) {
        return labels;
    }
    let adj = g.adjacency();
    let eps = T::lit(SCORE_EPS);
    let sp = dijkstra(g, &adj, start, None, |e| {
        Some(T::one() / scores[e].max(eps))
    });
    for (n, _) in endpoint_flags.iter().enumerate().filter(|(_, &f)| f) {
        match sp.edge_path(g, n) {
            Some(path) => path.into_iter().for_each(|e| labels[e] = true),
            None => debug!("endpoint node {n} unreachable from start {start}"),
        }
    }
    labels
}

/// All targets for a proposal graph of `sample`.
pub fn make_labels<T: Scalar>(
    g: &ProposalGraph<T>,
    sample: &CropSample,
    cfg: &SamplingConfig,
) -> TargetLabels<T> {
    let nodes = g.base.positions();
    let (node_scores, endpoint_flags) = score_target_nodes(&nodes, &sample.gt_successor, cfg);
    let edge_labels =
        score_target_edges(&g.base, &sample.gt_successor, g.start, &endpoint_flags, cfg);
    TargetLabels {
        node_scores,
        endpoint_flags,
        edge_labels,
    }
}
