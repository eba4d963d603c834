//! Graph comparison metrics: Graph IoU, APLS, GEO and TOPO precision/recall,
//! and split detection accuracy.
//!
//! Metrics that are undefined for the given inputs are `None`, never zero.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::geometry::{Aabb, Point2};
use crate::graph::{Adjacency, LaneGraph};
use crate::scalar::Scalar;
use crate::shortest_path::{euclidean_dijkstra, ShortestPaths};
use crate::spatial::GridIndex;
use crate::worldgen::{distance_field, PixelGrid};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MetricConfig {
    pub iou_dilate_px: f64,
    pub apls_match_px: f64,
    pub apls_pairs: usize,
    /// Graphs with at most this many GT nodes use all node pairs for APLS.
    pub apls_all_pairs_max: usize,
    pub geo_spacing_px: f64,
    pub match_radius_px: f64,
    pub topo_walk_px: f64,
    pub seed: u64,
}

impl Default for MetricConfig {
    fn default() -> Self {
        Self {
            iou_dilate_px: 5.0,
            apls_match_px: 10.0,
            apls_pairs: 500,
            apls_all_pairs_max: 60,
            geo_spacing_px: 3.3,
            match_radius_px: 8.0,
            topo_walk_px: 333.0,
            seed: 0,
        }
    }
}

impl MetricConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            self.iou_dilate_px,
            self.apls_match_px,
            self.geo_spacing_px,
            self.match_radius_px,
            self.topo_walk_px,
        ];
        if positive.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return invalid("metric distances must be positive");
        }
        if self.apls_pairs == 0 {
            return invalid("apls_pairs must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub graph_iou: Option<f64>,
    pub apls: Option<f64>,
    pub geo_precision: Option<f64>,
    pub geo_recall: Option<f64>,
    pub topo_precision: Option<f64>,
    pub topo_recall: Option<f64>,
    pub sda_20: Option<f64>,
    pub sda_50: Option<f64>,
    pub geo_spacing_px: f64,
    pub match_radius_px: f64,
    pub topo_walk_px: f64,
}

impl MetricReport {
    /// Aligned two-line table: TOPO, GEO, APLS, SDA and IoU columns.
    pub fn table(&self) -> String {
        let cols = [
            ("TOPO-P", self.topo_precision),
            ("TOPO-R", self.topo_recall),
            ("GEO-P", self.geo_precision),
            ("GEO-R", self.geo_recall),
            ("APLS", self.apls),
            ("SDA20", self.sda_20),
            ("SDA50", self.sda_50),
            ("IoU", self.graph_iou),
        ];
        let head: Vec<String> = cols.iter().map(|(n, _)| format!("{n:>8}")).collect();
        let vals: Vec<String> = cols
            .iter()
            .map(|(_, v)| match v {
                Some(x) => format!("{x:>8.3}"),
                None => format!("{:>8}", "-"),
            })
            .collect();
        format!("{}\n{}\n", head.join(""), vals.join(""))
    }
}

fn to64<T: Scalar>(g: &LaneGraph<T>) -> LaneGraph<f64> {
    g.cast()
}

/// Intersection over union of the pixels within `dilate` of each graph's
/// edges, on the pixel lattice of `canvas`. `None` when both are empty.
pub fn graph_iou<T: Scalar>(
    pred: &LaneGraph<T>,
    gt: &LaneGraph<T>,
    dilate: f64,
    canvas: &Aabb<f64>,
) -> Option<f64> {
    let x0 = canvas.min.x.floor();
    let y0 = canvas.min.y.floor();
    let w = (canvas.max.x.ceil() - x0) as usize + 1;
    let h = (canvas.max.y.ceil() - y0) as usize + 1;
    let grid = PixelGrid::new(Point2::new(x0, y0), w, h);
    let cap = dilate + 1.0;
    let a = distance_field(pred, &grid, cap);
    let b = distance_field(gt, &grid, cap);
    let (mut inter, mut union) = (0usize, 0usize);
    for (da, db) in a.iter().zip(&b) {
        let (ia, ib) = (*da <= dilate, *db <= dilate);
        inter += (ia && ib) as usize;
        union += (ia || ib) as usize;
    }
    (union > 0).then(|| inter as f64 / union as f64)
}

/// Canvas covering both graphs with room for the dilation.
pub fn joint_canvas<T: Scalar>(
    a: &LaneGraph<T>,
    b: &LaneGraph<T>,
    margin: f64,
) -> Option<Aabb<f64>> {
    let pts = a
        .nodes()
        .iter()
        .chain(b.nodes())
        .map(|n| n.pos.cast::<f64>());
    Aabb::around(pts).map(|bx| bx.inflate(margin))
}

/// Average path length similarity from the GT side. GT nodes are matched to
/// their nearest predicted node within `cfg.apls_match_px`; each sampled GT
/// pair contributes `min(1, |d - d'| / d)`, or 1 when unmatched or
/// disconnected in the prediction. `None` when the GT has no path.
pub fn apls<T: Scalar>(pred: &LaneGraph<T>, gt: &LaneGraph<T>, cfg: &MetricConfig) -> Option<f64> {
    let (pred, gt) = (to64(pred), to64(gt));
    let gadj = gt.adjacency();
    let padj = pred.adjacency();
    let index = GridIndex::new(&pred.positions(), cfg.apls_match_px.max(1.0));
    let matched: Vec<Option<usize>> = gt
        .positions()
        .into_iter()
        .map(|p| index.nearest_within(p, cfg.apls_match_px).map(|(i, _)| i))
        .collect();

    let mut gt_sp: HashMap<usize, ShortestPaths<f64>> = HashMap::new();
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    let n = gt.node_count();
    if n <= cfg.apls_all_pairs_max {
        for s in 0..n {
            let sp = euclidean_dijkstra(&gt, &gadj, s, None);
            for t in 0..n {
                if t != s && sp.dist[t].is_some() {
                    pairs.push((s, t));
                }
            }
            gt_sp.insert(s, sp);
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut attempts = 0;
        while pairs.len() < cfg.apls_pairs && attempts < 20 * cfg.apls_pairs {
            attempts += 1;
            let s = rng.gen_range(0..n);
            let sp = gt_sp
                .entry(s)
                .or_insert_with(|| euclidean_dijkstra(&gt, &gadj, s, None));
            let reach: Vec<usize> = (0..n).filter(|&t| t != s && sp.dist[t].is_some()).collect();
            if !reach.is_empty() {
                pairs.push((s, reach[rng.gen_range(0..reach.len())]));
            }
        }
    }
    if pairs.is_empty() {
        return None;
    }
    let mut pred_sp: HashMap<usize, ShortestPaths<f64>> = HashMap::new();
    let mut total = 0.0;
    for &(s, t) in &pairs {
        let d = gt_sp[&s].dist[t].unwrap();
        let penalty = match (matched[s], matched[t]) {
            (Some(ps), Some(pt)) => {
                let sp = pred_sp
                    .entry(ps)
                    .or_insert_with(|| euclidean_dijkstra(&pred, &padj, ps, None));
                match sp.dist[pt] {
                    Some(dp) if d > 0.0 => ((d - dp).abs() / d).min(1.0),
                    _ => 1.0,
                }
            }
            _ => 1.0,
        };
        total += penalty;
    }
    Some(1.0 - total / pairs.len() as f64)
}

/// Greedy one-to-one matching of point sets by ascending distance within
/// `radius`. Returns pairs `(i, j)` into `a` and `b`.
pub fn greedy_match(a: &[Point2<f64>], b: &[Point2<f64>], radius: f64) -> Vec<(usize, usize)> {
    let index = GridIndex::new(b, radius);
    let mut cand: Vec<(f64, usize, usize)> = Vec::new();
    for (i, &p) in a.iter().enumerate() {
        index.for_each_within(p, radius, |j, d| cand.push((d, i, j)));
    }
    cand.sort_by(|x, y| x.partial_cmp(y).unwrap_or(Ordering::Equal));
    let mut used_a = vec![false; a.len()];
    let mut used_b = vec![false; b.len()];
    let mut out = Vec::new();
    for (_, i, j) in cand {
        if !used_a[i] && !used_b[j] {
            used_a[i] = true;
            used_b[j] = true;
            out.push((i, j));
        }
    }
    out
}

fn ratio(num: f64, den: usize) -> Option<f64> {
    (den > 0).then(|| num / den as f64)
}

/// Precision/recall with the empty-side rules: an empty side makes its own
/// ratio undefined and the other side's ratio zero.
fn pr(matched_p: f64, matched_r: f64, n_pred: usize, n_gt: usize) -> (Option<f64>, Option<f64>) {
    (ratio(matched_p, n_pred), ratio(matched_r, n_gt))
}

/// Uniform resampling for vertex matching. Every maximal chain of nodes
/// with one incoming and one outgoing edge is treated as a single polyline
/// and split into `ceil(len / spacing)` equal arc-length pieces, so the
/// vertex density does not depend on where the input placed its nodes.
pub fn densify(g: &LaneGraph<f64>, spacing: f64) -> Result<LaneGraph<f64>> {
    if !(spacing > 0.0) {
        return invalid(format!("interpolation spacing {spacing} must be positive"));
    }
    let adj = g.adjacency();
    let interior = |n: usize| adj.in_degree(n) == 1 && adj.out_degree(n) == 1;
    let mut out = LaneGraph::new(*g.frame());
    let mut map: Vec<Option<usize>> = vec![None; g.node_count()];
    for n in (0..g.node_count()).filter(|&n| !interior(n)) {
        map[n] = Some(out.add_node(g.pos(n), 1.0));
    }
    let mut visited = vec![false; g.edge_count()];
    let starts: Vec<usize> = (0..g.edge_count())
        .filter(|&e| !interior(g.edges()[e].src))
        .chain(0..g.edge_count())
        .collect();
    for first in starts {
        if visited[first] {
            continue;
        }
        let head = g.edges()[first].src;
        let s = *map[head].get_or_insert_with(|| out.add_node(g.pos(head), 1.0));
        let mut pts = vec![g.pos(head)];
        let mut e = first;
        let tail = loop {
            visited[e] = true;
            let v = g.edges()[e].dst;
            pts.push(g.pos(v));
            if !interior(v) || v == head || visited[adj.out[v][0]] {
                break v;
            }
            e = adj.out[v][0];
        };
        let t = *map[tail].get_or_insert_with(|| out.add_node(g.pos(tail), 1.0));
        let mut cum = vec![0.0];
        for w in pts.windows(2) {
            cum.push(cum.last().unwrap() + w[0].dist(w[1]));
        }
        let total = *cum.last().unwrap();
        let k = ((total / spacing).ceil() as usize).max(1);
        let mut ids = vec![s];
        let mut seg = 0;
        for i in 1..k {
            let at = total * i as f64 / k as f64;
            while cum[seg + 1] < at {
                seg += 1;
            }
            let len = cum[seg + 1] - cum[seg];
            let f = if len > 0.0 {
                (at - cum[seg]) / len
            } else {
                0.0
            };
            ids.push(out.add_node(pts[seg].lerp(pts[seg + 1], f), 1.0));
        }
        ids.push(t);
        for w in ids.windows(2) {
            if w[0] != w[1] {
                out.add_edge(w[0], w[1], 1.0)?;
            }
        }
    }
    Ok(out)
}

/// GEO precision and recall after uniform interpolation of both graphs.
pub fn geo_pr<T: Scalar>(
    pred: &LaneGraph<T>,
    gt: &LaneGraph<T>,
    spacing: f64,
    match_radius: f64,
) -> Result<(Option<f64>, Option<f64>)> {
    let p = densify(&to64(pred), spacing)?.positions();
    let g = densify(&to64(gt), spacing)?.positions();
    let m = greedy_match(&p, &g, match_radius).len() as f64;
    Ok(pr(m, m, p.len(), g.len()))
}

#[derive(Clone, Copy, PartialEq)]
struct Item(f64, usize);

impl Eq for Item {}

impl Ord for Item {
    fn cmp(&self, o: &Self) -> Ordering {
        o.0.partial_cmp(&self.0)
            .unwrap_or(Ordering::Equal)
            .then(o.1.cmp(&self.1))
    }
}

impl PartialOrd for Item {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

/// Vertices within directed path distance `limit` of `src`, walking along
/// edge directions (`forward`) or against them. Includes `src`.
fn local_walk(
    g: &LaneGraph<f64>,
    adj: &Adjacency,
    src: usize,
    limit: f64,
    forward: bool,
) -> Vec<usize> {
    let mut dist: HashMap<usize, f64> = HashMap::from([(src, 0.0)]);
    let mut heap = BinaryHeap::from([Item(0.0, src)]);
    while let Some(Item(d, u)) = heap.pop() {
        if d > dist[&u] {
            continue;
        }
        let next = if forward { &adj.out[u] } else { &adj.inc[u] };
        for &e in next {
            let edge = &g.edges()[e];
            let v = if forward { edge.dst } else { edge.src };
            let nd = d + g.edge_length(e);
            if nd <= limit && dist.get(&v).is_none_or(|&old| nd < old) {
                dist.insert(v, nd);
                heap.push(Item(nd, v));
            }
        }
    }
    let mut reached: Vec<usize> = dist.into_keys().collect();
    reached.sort_unstable();
    reached
}

/// TOPO precision and recall. For every GEO-matched vertex pair, the
/// vertices reachable within `walk` downstream on each graph are GEO-matched
/// against each other, and likewise upstream. The pair's local precision and
/// recall are the matched share of its pred and GT neighborhoods; the totals
/// average those over all pred and GT vertices, unmatched vertices
/// contributing zero.
pub fn topo_pr<T: Scalar>(
    pred: &LaneGraph<T>,
    gt: &LaneGraph<T>,
    walk: f64,
    spacing: f64,
    match_radius: f64,
) -> Result<(Option<f64>, Option<f64>)> {
    let p = densify(&to64(pred), spacing)?;
    let g = densify(&to64(gt), spacing)?;
    let (pp, gp) = (p.positions(), g.positions());
    let matches = greedy_match(&pp, &gp, match_radius);
    let (padj, gadj) = (p.adjacency(), g.adjacency());
    let local: Vec<(f64, f64)> = matches
        .par_iter()
        .map(|&(i, j)| {
            let (mut m, mut np, mut ng) = (0usize, 0usize, 0usize);
            for forward in [true, false] {
                let sp: Vec<Point2<f64>> = local_walk(&p, &padj, i, walk, forward)
                    .into_iter()
                    .map(|v| pp[v])
                    .collect();
                let sg: Vec<Point2<f64>> = local_walk(&g, &gadj, j, walk, forward)
                    .into_iter()
                    .map(|v| gp[v])
                    .collect();
                m += greedy_match(&sp, &sg, match_radius).len();
                np += sp.len();
                ng += sg.len();
            }
            (m as f64 / np as f64, m as f64 / ng as f64)
        })
        .collect();
    let sum_p: f64 = local.iter().map(|x| x.0).sum();
    let sum_r: f64 = local.iter().map(|x| x.1).sum();
    Ok(pr(sum_p, sum_r, pp.len(), gp.len()))
}

fn splits(g: &LaneGraph<f64>) -> Vec<Point2<f64>> {
    let adj = g.adjacency();
    (0..g.node_count())
        .filter(|&n| adj.out_degree(n) >= 2)
        .map(|n| g.pos(n))
        .collect()
}

/// Share of GT splits with a predicted split within `radius`. `None` when
/// the GT has no split.
pub fn sda<T: Scalar>(pred: &LaneGraph<T>, gt: &LaneGraph<T>, radius: f64) -> Option<f64> {
    let gs = splits(&to64(gt));
    if gs.is_empty() {
        return None;
    }
    let ps = splits(&to64(pred));
    let hit = gs
        .iter()
        .filter(|g| ps.iter().any(|p| p.dist(**g) <= radius))
        .count();
    Some(hit as f64 / gs.len() as f64)
}

/// Every metric for one graph pair.
pub fn compute_all<T: Scalar>(
    pred: &LaneGraph<T>,
    gt: &LaneGraph<T>,
    cfg: &MetricConfig,
) -> Result<MetricReport> {
    cfg.validate()?;
    let graph_iou = joint_canvas(pred, gt, cfg.iou_dilate_px + 1.0)
        .and_then(|c| graph_iou(pred, gt, cfg.iou_dilate_px, &c));
    let (geo_precision, geo_recall) = geo_pr(pred, gt, cfg.geo_spacing_px, cfg.match_radius_px)?;
    let (topo_precision, topo_recall) = topo_pr(
        pred,
        gt,
        cfg.topo_walk_px,
        cfg.geo_spacing_px,
        cfg.match_radius_px,
    )?;
    Ok(MetricReport {
        graph_iou,
        apls: apls(pred, gt, cfg),
        geo_precision,
        geo_recall,
        topo_precision,
        topo_recall,
        sda_20: sda(pred, gt, 20.0),
        sda_50: sda(pred, gt, 50.0),
        geo_spacing_px: cfg.geo_spacing_px,
        match_radius_px: cfg.match_radius_px,
        topo_walk_px: cfg.topo_walk_px,
    })
}

/// Mean of each metric over the reports where it is present. Distance
/// settings are taken from the first report.
pub fn mean_report(reports: &[MetricReport]) -> Option<MetricReport> {
    let first = reports.first()?;
    let mean = |f: fn(&MetricReport) -> Option<f64>| {
        let v: Vec<f64> = reports.iter().filter_map(f).collect();
        (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
    };
    Some(MetricReport {
        graph_iou: mean(|r| r.graph_iou),
        apls: mean(|r| r.apls),
        geo_precision: mean(|r| r.geo_precision),
        geo_recall: mean(|r| r.geo_recall),
        topo_precision: mean(|r| r.topo_precision),
        topo_recall: mean(|r| r.topo_recall),
        sda_20: mean(|r| r.sda_20),
        sda_50: mean(|r| r.sda_50),
        ..first.clone()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::testutil::{chain, graph};
    use crate::graph::CoordinateFrame;

    fn canvas() -> Aabb<f64> {
        Aabb::new(Point2::new(-20.0, -20.0), Point2::new(140.0, 40.0))
    }

    fn empty() -> LaneGraph<f64> {
        LaneGraph::new(CoordinateFrame::world())
    }

    #[test]
    fn iou_cases() {
        let a = chain(&[(0.0, 0.0), (100.0, 0.0)]);
        assert_eq!(graph_iou(&a, &a, 5.0, &canvas()), Some(1.0));
        let far = chain(&[(0.0, 30.0), (100.0, 30.0)]);
        assert_eq!(graph_iou(&a, &far, 5.0, &canvas()), Some(0.0));
        assert_eq!(graph_iou(&empty(), &empty(), 5.0, &canvas()), None);
        // interior columns: rows -5..=5 against 0..=10, so 6 shared of 16
        let b = chain(&[(0.0, 5.0), (100.0, 5.0)]);
        let iou = graph_iou(&a, &b, 5.0, &canvas()).unwrap();
        assert!((iou - 6.0 / 16.0).abs() < 0.02, "iou {iou}");
    }

    #[test]
    fn apls_cases() {
        let cfg = MetricConfig::default();
        let gt = chain(&[(0.0, 0.0), (10.0, 0.0)]);
        assert_eq!(apls(&gt, &gt, &cfg), Some(1.0));
        let pred = chain(&[(1.0, 0.0), (9.0, 0.0)]);
        assert!((apls(&pred, &gt, &cfg).unwrap() - 0.8).abs() < 1e-12);
        assert_eq!(apls(&empty(), &gt, &cfg), Some(0.0));
        let lonely = graph(&[(0.0, 0.0), (50.0, 0.0)], &[]);
        assert_eq!(apls(&gt, &lonely, &cfg), None);
    }

    #[test]
    fn geo_cases() {
        let gt = chain(&[(0.0, 0.0), (99.0, 0.0)]);
        assert_eq!(geo_pr(&gt, &gt, 3.3, 8.0).unwrap(), (Some(1.0), Some(1.0)));
        let half = chain(&[(0.0, 0.0), (49.5, 0.0)]);
        let (p, r) = geo_pr(&half, &gt, 3.3, 8.0).unwrap();
        assert_eq!(p, Some(1.0));
        assert!((r.unwrap() - 0.5).abs() < 0.05);
        let mut extra = gt.clone();
        let a = extra.add_node(Point2::new(0.0, 200.0), 1.0);
        let b = extra.add_node(Point2::new(99.0, 200.0), 1.0);
        extra.add_edge(a, b, 1.0).unwrap();
        let (p, r) = geo_pr(&extra, &gt, 3.3, 8.0).unwrap();
        assert!((p.unwrap() - 0.5).abs() < 0.02);
        assert_eq!(r, Some(1.0));
        assert_eq!(geo_pr(&empty(), &gt, 3.3, 8.0).unwrap(), (None, Some(0.0)));
        assert_eq!(geo_pr(&gt, &empty(), 3.3, 8.0).unwrap(), (Some(0.0), None));
    }

    #[test]
    fn topo_cases() {
        let y = graph(
            &[(0.0, 0.0), (60.0, 0.0), (120.0, 40.0), (120.0, -40.0)],
            &[(0, 1), (1, 2), (1, 3)],
        );
        assert_eq!(
            topo_pr(&y, &y, 333.0, 3.3, 8.0).unwrap(),
            (Some(1.0), Some(1.0))
        );
        let missing = graph(&[(0.0, 0.0), (60.0, 0.0), (120.0, 40.0)], &[(0, 1), (1, 2)]);
        let (_, geo_r) = geo_pr(&missing, &y, 3.3, 8.0).unwrap();
        let (_, topo_r) = topo_pr(&missing, &y, 333.0, 3.3, 8.0).unwrap();
        assert!(topo_r.unwrap() < geo_r.unwrap());

        let gt = chain(&[(0.0, 0.0), (30.0, 0.0), (60.0, 0.0), (90.0, 0.0)]);
        let flipped = graph(
            &[(0.0, 0.0), (30.0, 0.0), (60.0, 0.0), (90.0, 0.0)],
            &[(0, 1), (2, 1), (2, 3)],
        );
        let (gp, gr) = geo_pr(&flipped, &gt, 3.3, 8.0).unwrap();
        let (tp, tr) = topo_pr(&flipped, &gt, 333.0, 3.3, 8.0).unwrap();
        assert!(
            tp.unwrap() < gp.unwrap() && tr.unwrap() < gr.unwrap(),
            "{tp:?} {gp:?} {tr:?} {gr:?}"
        );
    }

    #[test]
    fn densify_ignores_input_node_placement() {
        let coarse = chain(&[(0.0, 0.0), (33.0, 0.0), (66.0, 0.0)]);
        let fine: Vec<(f64, f64)> = (0..=22).map(|i| (3.0 * i as f64, 0.0)).collect();
        let a = densify(&coarse, 3.3).unwrap();
        let b = densify(&chain(&fine), 3.3).unwrap();
        assert_eq!(a.node_count(), 21);
        assert_eq!(a.node_count(), b.node_count());
        for (p, q) in a.positions().iter().zip(b.positions()) {
            assert!(p.dist(q) < 1e-9);
        }
        // junctions survive, loops close on themselves
        let y = graph(
            &[(0.0, 0.0), (10.0, 0.0), (20.0, 5.0), (20.0, -5.0)],
            &[(0, 1), (1, 2), (1, 3)],
        );
        let d = densify(&y, 3.3).unwrap();
        assert_eq!(d.adjacency().out_degree(1), 2);
        let ring = graph(
            &[(0.0, 0.0), (10.0, 0.0), (10.0, 10.0)],
            &[(0, 1), (1, 2), (2, 0)],
        );
        let r = densify(&ring, 3.3).unwrap();
        assert_eq!(r.node_count(), r.edge_count());
        assert!(
            r.total_length() <= ring.total_length() && r.total_length() > ring.total_length() - 3.0
        );
    }

    #[test]
    fn sda_cases() {
        let gt = graph(
            &[(100.0, 100.0), (120.0, 90.0), (120.0, 110.0)],
            &[(0, 1), (0, 2)],
        );
        assert_eq!(sda(&gt, &gt, 20.0), Some(1.0));
        let pred = graph(
            &[(110.0, 105.0), (130.0, 95.0), (130.0, 115.0)],
            &[(0, 1), (0, 2)],
        );
        assert_eq!(sda(&pred, &gt, 20.0), Some(1.0));
        assert_eq!(sda(&pred, &gt, 10.0), Some(0.0));
        assert_eq!(sda(&chain(&[(0.0, 0.0), (1.0, 0.0)]), &gt, 50.0), Some(0.0));
        assert_eq!(sda(&gt, &chain(&[(0.0, 0.0), (1.0, 0.0)]), 50.0), None);
    }

    #[test]
    fn report_on_identical_graphs() {
        let g = graph(
            &[(0.0, 0.0), (60.0, 0.0), (120.0, 40.0), (120.0, -40.0)],
            &[(0, 1), (1, 2), (1, 3)],
        );
        let r = compute_all(&g, &g, &MetricConfig::default()).unwrap();
        for v in [
            r.graph_iou,
            r.apls,
            r.geo_precision,
            r.geo_recall,
            r.topo_precision,
            r.topo_recall,
            r.sda_20,
            r.sda_50,
        ] {
            assert_eq!(v, Some(1.0));
        }
        let json =
            serde_json::to_string(&compute_all(&empty(), &g, &MetricConfig::default()).unwrap())
                .unwrap();
        assert!(json.contains("\"geo_precision\":null"));
    }

    #[test]
    fn mean_report_skips_absent() {
        let a = chain(&[(0.0, 0.0), (100.0, 0.0)]);
        let full = compute_all(&a, &a, &MetricConfig::default()).unwrap();
        let none = compute_all(&empty(), &a, &MetricConfig::default()).unwrap();
        let m = mean_report(&[full.clone(), none.clone()]).unwrap();
        assert_eq!(m.geo_recall, Some(0.5));
        assert_eq!(m.geo_precision, full.geo_precision);
        assert_eq!(m.sda_20, None);
        assert!(mean_report(&[]).is_none());
    }
}
