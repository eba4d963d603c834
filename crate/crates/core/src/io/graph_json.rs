use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point2;
use crate::graph::{CoordinateFrame, Edge, FrameKind, LaneGraph, Node};
use crate::scalar::Scalar;

/// Rounds to 9 significant digits. Values that are already rounded map to
/// themselves, and every `f32` survives the trip unchanged.
pub fn round_sig(v: f64) -> f64 {
    if v == 0.0 || !v.is_finite() {
        return v;
    }
    format!("{v:.8e}").parse().expect("formatted float parses")
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FrameJson {
    kind: FrameKind,
    resolution_m_per_px: f64,
    origin: [f64; 2],
    rotation: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NodeJson {
    id: u64,
    x: f64,
    y: f64,
    weight: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeJson {
    src: u64,
    dst: u64,
    score: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphJson {
    frame: FrameJson,
    nodes: Vec<NodeJson>,
    edges: Vec<EdgeJson>,
}

pub fn graph_to_json<T: Scalar>(g: &LaneGraph<T>) -> String {
    let r = |v: T| round_sig(v.to_f64c());
    let f = g.frame();
    let doc = GraphJson {
        frame: FrameJson {
            kind: f.kind,
            resolution_m_per_px: r(f.resolution_m_per_px),
            origin: [r(f.origin.x), r(f.origin.y)],
            rotation: r(f.rotation),
        },
        nodes: g
            .nodes()
            .iter()
            .enumerate()
            .map(|(i, n)| NodeJson {
                id: i as u64,
                x: r(n.pos.x),
                y: r(n.pos.y),
                weight: r(n.weight),
            })
            .collect(),
        edges: g
            .edges()
            .iter()
            .map(|e| EdgeJson {
                src: e.src as u64,
                dst: e.dst as u64,
                score: r(e.score),
            })
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("graph JSON serializes");
    s.push('\n');
    s
}

/// Parses graph JSON. Node ids may be any unique integers; nodes are
/// renumbered in file order.
pub fn graph_from_json<T: Scalar>(s: &str) -> Result<LaneGraph<T>> {
    let doc: GraphJson = serde_json::from_str(s)?;
    let l = T::lit;
    let frame = CoordinateFrame {
        kind: doc.frame.kind,
        resolution_m_per_px: l(doc.frame.resolution_m_per_px),
        origin: Point2::new(l(doc.frame.origin[0]), l(doc.frame.origin[1])),
        rotation: l(doc.frame.rotation),
    };
    let mut index = HashMap::with_capacity(doc.nodes.len());
    for (k, n) in doc.nodes.iter().enumerate() {
        if index.insert(n.id, k).is_some() {
            return Err(Error::InvalidGraph(format!("duplicate node id {}", n.id)));
        }
    }
    let lookup = |id: u64| {
        index
            .get(&id)
            .copied()
            .ok_or_else(|| Error::InvalidGraph(format!("edge references unknown node id {id}")))
    };
    let nodes = doc
        .nodes
        .iter()
        .map(|n| Node {
            pos: Point2::new(l(n.x), l(n.y)),
            weight: l(n.weight),
        })
        .collect();
    let edges = doc
        .edges
        .iter()
        .map(|e| {
            Ok(Edge {
                src: lookup(e.src)?,
                dst: lookup(e.dst)?,
                score: l(e.score),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    LaneGraph::from_parts(frame, nodes, edges)
}

pub fn write_graph<T: Scalar>(path: &Path, g: &LaneGraph<T>) -> Result<()> {
    super::write_atomic(path, graph_to_json(g).as_bytes())
}

pub fn read_graph<T: Scalar>(path: &Path) -> Result<LaneGraph<T>> {
    graph_from_json(&std::fs::read_to_string(path)?)
}
