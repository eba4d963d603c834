//! Procedural synthetic worlds: a ground-truth lane graph on a jittered
//! junction grid plus the rasters an aerial survey would provide.

mod align;
mod render;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

pub use align::{kabsch_umeyama, Similarity};
pub use render::{
    distance_field, ego_start_node, ego_subgraph, reachable_subgraph, render_ego_isdf, render_isdf,
    PixelGrid, DEFAULT_FALLOFF_PX, EGO_START_ANGLE_RAD, EGO_START_RADIUS_PX,
};

use crate::error::{invalid, Error, Result};
use crate::geometry::{Aabb, Point2, Pose};
use crate::graph::{CoordinateFrame, LaneGraph};
use crate::raster::Raster;

/// Clear border around the lane graph, in pixels.
pub const MARGIN_PX: f64 = 256.0;
pub const JUNCTION_SPACING_PX: f64 = 320.0;
/// Distance of each lane centerline from its road's centerline.
pub const LANE_OFFSET_PX: f64 = 12.0;
/// Target spacing of ground-truth nodes along lanes and connectors.
pub const NODE_SPACING_PX: f64 = 15.0;
/// Half width of the paved corridor around a lane centerline.
pub const CORRIDOR_HALF_WIDTH_PX: f64 = 12.0;

const JUNCTION_JITTER: f64 = 0.15;
const JUNCTION_CLEARANCE_PX: f64 = 36.0;
const ROAD_SAMPLES: usize = 240;
const CONNECTOR_SAMPLES: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WorldSpec {
    /// Junctions per side of the square junction grid.
    pub grid_size: usize,
    /// Maximum lateral bow of a road relative to its length, in [0, 1].
    pub curvature: f64,
    /// Junctions of degree three or more.
    pub n_splits: usize,
    /// Fraction of corridor pixels hidden under occluders.
    pub occlusion_rate: f64,
    /// Standard deviation of per-pixel texture noise.
    pub noise: f64,
    pub seed: u64,
}

impl Default for WorldSpec {
    fn default() -> Self {
        Self {
            grid_size: 3,
            curvature: 0.3,
            n_splits: 4,
            occlusion_rate: 0.1,
            noise: 0.05,
            seed: 0,
        }
    }
}

impl WorldSpec {
    pub fn validate(&self) -> Result<()> {
        if self.grid_size < 2 {
            return invalid("grid_size must be at least 2");
        }
        if self.grid_size > 64 {
            return invalid("grid_size above 64 is not supported");
        }
        if !(0.0..=1.0).contains(&self.curvature) {
            return invalid("curvature must lie in [0, 1]");
        }
        if !(0.0..0.9).contains(&self.occlusion_rate) {
            return invalid("occlusion_rate must lie in [0, 0.9)");
        }
        if !(0.0..=1.0).contains(&self.noise) {
            return invalid("noise must lie in [0, 1]");
        }
        if self.n_splits >= 4 && self.grid_size < 3 {
            return invalid("a four-way junction needs grid_size >= 3");
        }
        Ok(())
    }
}

/// A generated world. Coordinates are world pixels with the origin at the
/// top-left corner of the rasters.
#[derive(Debug, Clone, PartialEq)]
pub struct World {
    pub spec: WorldSpec,
    pub gt: LaneGraph<f64>,
    /// RGB aerial texture.
    pub aerial: Raster,
    /// Lane centerline ISDF over the whole extent.
    pub lane_isdf: Raster,
}

impl World {
    /// Assembles a world from stored layers, checking their consistency.
    pub fn from_parts(
        spec: WorldSpec,
        gt: LaneGraph<f64>,
        aerial: Raster,
        lane_isdf: Raster,
    ) -> Result<Self> {
        if aerial.channels() != 3 || lane_isdf.channels() != 1 {
            return Err(Error::DimensionMismatch(
                "aerial needs 3 channels, lane mask 1".into(),
            ));
        }
        if aerial.width() != lane_isdf.width() || aerial.height() != lane_isdf.height() {
            return Err(Error::DimensionMismatch("raster sizes differ".into()));
        }
        gt.validate()?;
        Ok(Self {
            spec,
            gt,
            aerial,
            lane_isdf,
        })
    }

    pub fn width(&self) -> usize {
        self.aerial.width()
    }

    pub fn height(&self) -> usize {
        self.aerial.height()
    }

    pub fn extent(&self) -> Aabb<f64> {
        Aabb::new(
            Point2::zero(),
            Point2::new(self.width() as f64 - 1.0, self.height() as f64 - 1.0),
        )
    }

    pub fn grid(&self) -> PixelGrid {
        PixelGrid::new(Point2::zero(), self.width(), self.height())
    }

    /// Agent pose on GT node `n`, facing along its first outgoing edge.
    pub fn pose_at_node(&self, n: usize) -> Option<Pose<f64>> {
        let adj = self.gt.adjacency();
        let e = *adj.out.get(n)?.first()?;
        let p = self.gt.pos(n);
        Some(Pose::new(p.x, p.y, self.gt.edge_vector(e).angle()))
    }
}

/// Pixel masks used to audit a generated world.
#[derive(Debug, Clone)]
pub struct WorldAudit {
    pub corridor: Vec<bool>,
    pub occluded: Vec<bool>,
}

impl WorldAudit {
    /// Share of corridor pixels covered by occluders.
    pub fn occluded_fraction(&self) -> f64 {
        let total = self.corridor.iter().filter(|&&c| c).count();
        if total == 0 {
            return 0.0;
        }
        let hit = self
            .corridor
            .iter()
            .zip(&self.occluded)
            .filter(|(&c, &o)| c && o)
            .count();
        hit as f64 / total as f64
    }
}

pub fn generate_world(spec: &WorldSpec) -> Result<World> {
    Ok(generate_world_audited(spec)?.0)
}

pub fn generate_world_audited(spec: &WorldSpec) -> Result<(World, WorldAudit)> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let junctions = junction_layout(spec.grid_size, &mut rng);
    let roads = road_network(spec, &mut rng)?;
    let mut gt = lane_graph(&junctions, &roads, spec.curvature, &mut rng)?;

    let b = gt
        .bounds()
        .ok_or_else(|| Error::Degenerate("empty lane graph".into()))?;
    let shift = Point2::new(MARGIN_PX - b.min.x.floor(), MARGIN_PX - b.min.y.floor());
    for n in 0..gt.node_count() {
        gt.set_pos(n, gt.pos(n) + shift);
    }
    let width = (b.max.x + shift.x + MARGIN_PX).ceil() as usize + 1;
    let height = (b.max.y + shift.y + MARGIN_PX).ceil() as usize + 1;
    let grid = PixelGrid::new(Point2::zero(), width, height);

    let lane_isdf = render_isdf(&gt, &grid, DEFAULT_FALLOFF_PX)?;
    let (aerial, audit) = paint_aerial(&gt, &grid, spec, &mut rng);
    let world = World {
        spec: spec.clone(),
        gt,
        aerial,
        lane_isdf,
    };
    Ok((world, audit))
}

fn junction_layout(n: usize, rng: &mut ChaCha8Rng) -> Vec<Point2<f64>> {
    let j = JUNCTION_JITTER * JUNCTION_SPACING_PX;
    let mut out = Vec::with_capacity(n * n);
    for r in 0..n {
        for c in 0..n {
            out.push(Point2::new(
                c as f64 * JUNCTION_SPACING_PX + rng.gen_range(-j..=j),
                r as f64 * JUNCTION_SPACING_PX + rng.gen_range(-j..=j),
            ));
        }
    }
    out
}

fn degree_counts(n_junctions: usize, roads: &[(usize, usize)]) -> Vec<usize> {
    let mut deg = vec![0; n_junctions];
    for &(a, b) in roads {
        deg[a] += 1;
        deg[b] += 1;
    }
    deg
}

fn branching(roads: &[(usize, usize)], n_junctions: usize) -> usize {
    degree_counts(n_junctions, roads)
        .iter()
        .filter(|&&d| d >= 3)
        .count()
}

/// Junction pairs joined by a road. A boustrophedon path through the grid
/// keeps the network connected without branching; extra grid-adjacent roads
/// then raise junction degrees until `n_splits` junctions branch.
fn road_network(spec: &WorldSpec, rng: &mut ChaCha8Rng) -> Result<Vec<(usize, usize)>> {
    let n = spec.grid_size;
    let id = |r: usize, c: usize| r * n + c;
    let mut order = Vec::with_capacity(n * n);
    for r in 0..n {
        for k in 0..n {
            order.push(id(r, if r % 2 == 0 { k } else { n - 1 - k }));
        }
    }
    let mut roads: Vec<(usize, usize)> = order.windows(2).map(|w| (w[0], w[1])).collect();
    let has = |roads: &[(usize, usize)], a: usize, b: usize| {
        roads
            .iter()
            .any(|&(x, y)| (x, y) == (a, b) || (x, y) == (b, a))
    };
    let mut candidates = Vec::new();
    for r in 0..n {
        for c in 0..n {
            if c + 1 < n && !has(&roads, id(r, c), id(r, c + 1)) {
                candidates.push((id(r, c), id(r, c + 1)));
            }
            if r + 1 < n && !has(&roads, id(r, c), id(r + 1, c)) {
                candidates.push((id(r, c), id(r + 1, c)));
            }
        }
    }
    if spec.n_splits >= 4 {
        let (r, c) = (n / 2, n / 2);
        let center = id(r, c);
        for other in [
            (r > 0).then(|| id(r - 1, c)),
            (r + 1 < n).then(|| id(r + 1, c)),
            (c > 0).then(|| id(r, c - 1)),
            (c + 1 < n).then(|| id(r, c + 1)),
        ]
        .into_iter()
        .flatten()
        {
            if !has(&roads, center, other) {
                roads.push((center.min(other), center.max(other)));
            }
        }
        candidates.retain(|&(a, b)| !has(&roads, a, b));
    }
    candidates.shuffle(rng);
    let total = n * n;
    for cand in candidates {
        let now = branching(&roads, total);
        if now >= spec.n_splits {
            break;
        }
        roads.push(cand);
        let gain = branching(&roads, total) - now;
        if gain == 0 || now + gain > spec.n_splits {
            roads.pop();
        }
    }
    let got = branching(&roads, total);
    if got < spec.n_splits {
        return invalid(format!(
            "n_splits={} is not attainable on a {n}x{n} grid (reached {got})",
            spec.n_splits
        ));
    }
    Ok(roads)
}

fn quadratic(p0: Point2<f64>, p1: Point2<f64>, p2: Point2<f64>, t: f64) -> Point2<f64> {
    let s = 1.0 - t;
    p0 * (s * s) + p1 * (2.0 * s * t) + p2 * (t * t)
}

fn cubic(p: [Point2<f64>; 4], t: f64) -> Point2<f64> {
    let s = 1.0 - t;
    p[0] * (s * s * s) + p[1] * (3.0 * s * s * t) + p[2] * (3.0 * s * t * t) + p[3] * (t * t * t)
}

fn arc_lengths(pts: &[Point2<f64>]) -> Vec<f64> {
    let mut acc = vec![0.0; pts.len()];
    for i in 1..pts.len() {
        acc[i] = acc[i - 1] + pts[i].dist(pts[i - 1]);
    }
    acc
}

/// Point at arc length `s` along a polyline.
fn point_at(pts: &[Point2<f64>], acc: &[f64], s: f64) -> Point2<f64> {
    let i = acc.partition_point(|&a| a < s).clamp(1, pts.len() - 1);
    let seg = acc[i] - acc[i - 1];
    let t = if seg > 0.0 {
        ((s - acc[i - 1]) / seg).clamp(0.0, 1.0)
    } else {
        0.0
    };
    pts[i - 1].lerp(pts[i], t)
}

/// Polyline restricted to the arc-length interval `[s0, s1]`.
fn trim(pts: &[Point2<f64>], s0: f64, s1: f64) -> Vec<Point2<f64>> {
    let acc = arc_lengths(pts);
    let mut out = vec![point_at(pts, &acc, s0)];
    out.extend(
        pts.iter()
            .zip(&acc)
            .filter(|(_, &a)| a > s0 && a < s1)
            .map(|(&p, _)| p),
    );
    out.push(point_at(pts, &acc, s1));
    out
}

/// Equally spaced points along a polyline, endpoints included, at most
/// `spacing` apart.
fn resample(pts: &[Point2<f64>], spacing: f64) -> Vec<Point2<f64>> {
    let acc = arc_lengths(pts);
    let len = *acc.last().unwrap();
    let k = ((len / spacing).ceil() as usize).max(1);
    (0..=k)
        .map(|i| point_at(pts, &acc, len * i as f64 / k as f64))
        .collect()
}

/// Shifts a polyline sideways by `offset` along its right-hand normal.
fn offset_polyline(pts: &[Point2<f64>], offset: f64) -> Vec<Point2<f64>> {
    let n = pts.len();
    (0..n)
        .map(|i| {
            let d = pts[(i + 1).min(n - 1)] - pts[i.saturating_sub(1)];
            let normal = d.normalized().unwrap_or(Point2::new(1.0, 0.0)).perp();
            pts[i] + normal * offset
        })
        .collect()
}

struct Lane {
    road: usize,
    nodes: Vec<usize>,
    start_dir: Point2<f64>,
    end_dir: Point2<f64>,
}

fn lane_graph(
    junctions: &[Point2<f64>],
    roads: &[(usize, usize)],
    curvature: f64,
    rng: &mut ChaCha8Rng,
) -> Result<LaneGraph<f64>> {
    let mut g = LaneGraph::new(CoordinateFrame::world());
    // (lanes starting at, lanes ending at) per junction
    let mut at: Vec<(Vec<usize>, Vec<usize>)> = vec![(Vec::new(), Vec::new()); junctions.len()];
    let mut lanes: Vec<Lane> = Vec::new();
    for (ri, &(a, b)) in roads.iter().enumerate() {
        let (pa, pb) = (junctions[a], junctions[b]);
        let len = pa.dist(pb);
        let bow = curvature * len * rng.gen_range(-0.5..=0.5);
        let ctrl = pa.lerp(pb, 0.5) + (pb - pa).normalized().unwrap().perp() * bow;
        let center: Vec<_> = (0..=ROAD_SAMPLES)
            .map(|i| quadratic(pa, ctrl, pb, i as f64 / ROAD_SAMPLES as f64))
            .collect();
        let total = *arc_lengths(&center).last().unwrap();
        if total <= 2.0 * JUNCTION_CLEARANCE_PX + NODE_SPACING_PX {
            return Err(Error::Degenerate(
                "road shorter than junction clearance".into(),
            ));
        }
        let center = trim(
            &center,
            JUNCTION_CLEARANCE_PX,
            total - JUNCTION_CLEARANCE_PX,
        );
        for (offset, from, to) in [(LANE_OFFSET_PX, a, b), (-LANE_OFFSET_PX, b, a)] {
            let mut pts = offset_polyline(&center, offset);
            if offset < 0.0 {
                pts.reverse();
            }
            let pts = resample(&pts, NODE_SPACING_PX);
            let nodes: Vec<usize> = pts.iter().map(|&p| g.add_node(p, 1.0)).collect();
            for w in nodes.windows(2) {
                g.add_edge(w[0], w[1], 1.0)?;
            }
            let m = pts.len();
            let lane = Lane {
                road: ri,
                nodes,
                start_dir: (pts[1] - pts[0]).normalized().unwrap(),
                end_dir: (pts[m - 1] - pts[m - 2]).normalized().unwrap(),
            };
            at[from].0.push(lanes.len());
            at[to].1.push(lanes.len());
            lanes.push(lane);
        }
    }
    for (starting, ending) in &at {
        let degree = starting.len();
        for &li in ending {
            for &lo in starting {
                let (lin, lout) = (&lanes[li], &lanes[lo]);
                let u_turn = lin.road == lout.road;
                if u_turn != (degree == 1) {
                    continue;
                }
                let p0 = g.pos(*lin.nodes.last().unwrap());
                let p3 = g.pos(lout.nodes[0]);
                let chord = p0.dist(p3);
                let k = if u_turn { 1.2 * chord } else { 0.45 * chord };
                let ctrl = [p0, p0 + lin.end_dir * k, p3 - lout.start_dir * k, p3];
                let curve: Vec<_> = (0..=CONNECTOR_SAMPLES)
                    .map(|i| cubic(ctrl, i as f64 / CONNECTOR_SAMPLES as f64))
                    .collect();
                let pts = resample(&curve, NODE_SPACING_PX);
                let mut prev = *lin.nodes.last().unwrap();
                for &p in &pts[1..pts.len() - 1] {
                    let n = g.add_node(p, 1.0);
                    g.add_edge(prev, n, 1.0)?;
                    prev = n;
                }
                g.add_edge(prev, lout.nodes[0], 1.0)?;
            }
        }
    }
    Ok(g)
}

fn smoothstep(t: f64) -> f64 {
    t * t * (3.0 - 2.0 * t)
}

/// Smooth lattice noise in [-1, 1] with features of roughly `cell` pixels.
fn value_noise(w: usize, h: usize, cell: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let lw = (w as f64 / cell).ceil() as usize + 2;
    let lh = (h as f64 / cell).ceil() as usize + 2;
    let lattice: Vec<f64> = (0..lw * lh).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut out = vec![0.0; w * h];
    for v in 0..h {
        let fy = v as f64 / cell;
        let (y0, ty) = (fy.floor() as usize, smoothstep(fy.fract()));
        for u in 0..w {
            let fx = u as f64 / cell;
            let (x0, tx) = (fx.floor() as usize, smoothstep(fx.fract()));
            let l = |x: usize, y: usize| lattice[y * lw + x];
            let top = l(x0, y0) * (1.0 - tx) + l(x0 + 1, y0) * tx;
            let bot = l(x0, y0 + 1) * (1.0 - tx) + l(x0 + 1, y0 + 1) * tx;
            out[v * w + u] = top * (1.0 - ty) + bot * ty;
        }
    }
    out
}

const GRASS: [f64; 3] = [0.30, 0.42, 0.24];
const ASPHALT: [f64; 3] = [0.40, 0.40, 0.42];
const LANE_LINE: [f64; 3] = [0.56, 0.56, 0.56];
const FOLIAGE: [f64; 3] = [0.10, 0.22, 0.09];

fn paint_aerial(
    gt: &LaneGraph<f64>,
    grid: &PixelGrid,
    spec: &WorldSpec,
    rng: &mut ChaCha8Rng,
) -> (Raster, WorldAudit) {
    let (w, h) = (grid.width, grid.height);
    let dist = distance_field(gt, grid, 3.0 * CORRIDOR_HALF_WIDTH_PX);
    let corridor: Vec<bool> = dist.iter().map(|&d| d <= CORRIDOR_HALF_WIDTH_PX).collect();
    let low = value_noise(w, h, 48.0, rng);
    let mut rgb = vec![0.0f64; w * h * 3];
    for i in 0..w * h {
        let d = dist[i];
        let road = (CORRIDOR_HALF_WIDTH_PX + 0.5 - d).clamp(0.0, 1.0);
        let line = (3.0 - d).clamp(0.0, 1.0);
        for c in 0..3 {
            let ground = GRASS[c] + 0.08 * low[i];
            let paved = ASPHALT[c] * (1.0 - line) + LANE_LINE[c] * line + 0.03 * low[i];
            rgb[i * 3 + c] = ground * (1.0 - road) + paved * road;
        }
    }

    let bands = rng.gen_range(2..=4);
    for _ in 0..bands {
        let p = Point2::new(rng.gen_range(0.0..w as f64), rng.gen_range(0.0..h as f64));
        let normal = Point2::from_angle(rng.gen_range(0.0..std::f64::consts::PI));
        let half = rng.gen_range(8.0..20.0);
        for v in 0..h {
            for u in 0..w {
                if (Point2::new(u as f64, v as f64) - p).dot(normal).abs() < half {
                    for c in 0..3 {
                        rgb[(v * w + u) * 3 + c] *= 0.62;
                    }
                }
            }
        }
    }

    let mut occluded = vec![false; w * h];
    let corridor_px: Vec<usize> = (0..w * h).filter(|&i| corridor[i]).collect();
    let target = (spec.occlusion_rate * corridor_px.len() as f64).ceil() as usize;
    let mut covered = 0usize;
    while covered < target {
        let center = corridor_px[rng.gen_range(0..corridor_px.len())];
        let (cu, cv) = ((center % w) as i64, (center / w) as i64);
        let (hw, hh) = (rng.gen_range(4..=14i64), rng.gen_range(4..=14i64));
        let shade = rng.gen_range(-0.04..0.04);
        for v in (cv - hh).max(0)..=(cv + hh).min(h as i64 - 1) {
            for u in (cu - hw).max(0)..=(cu + hw).min(w as i64 - 1) {
                let i = v as usize * w + u as usize;
                if !occluded[i] {
                    occluded[i] = true;
                    covered += corridor[i] as usize;
                }
                for c in 0..3 {
                    rgb[i * 3 + c] = FOLIAGE[c] + shade;
                }
            }
        }
    }

    if spec.noise > 0.0 {
        let normal = Normal::new(0.0, spec.noise).expect("valid noise level");
        for x in rgb.iter_mut() {
            *x += normal.sample(rng);
        }
    }
    let data = rgb.into_iter().map(|x| x.clamp(0.0, 1.0) as f32).collect();
    (
        Raster::from_data(w, h, 3, data),
        WorldAudit { corridor, occluded },
    )
}
