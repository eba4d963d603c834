//! Sparse successor graphs from scored proposal graphs.
//!
//! Terminals are visited from the most to the least confident. Each one is
//! connected to the start by a cheapest path where edges already used by an
//! earlier path cost nothing, so later branches reuse the shared stem.

use log::debug;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::graph::LaneGraph;
use crate::sampling::SCORE_EPS;
use crate::scalar::Scalar;
use crate::shortest_path::dijkstra;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PruningConfig {
    pub edge_threshold: f64,
    pub terminal_threshold: f64,
}

impl Default for PruningConfig {
    fn default() -> Self {
        Self {
            edge_threshold: 0.5,
            terminal_threshold: 0.5,
        }
    }
}

impl PruningConfig {
    pub fn validate(&self) -> Result<()> {
        for (v, name) in [
            (self.edge_threshold, "edge_threshold"),
            (self.terminal_threshold, "terminal_threshold"),
        ] {
            if !(v > 0.0 && v < 1.0) {
                return invalid(format!("{name} must lie in (0, 1)"));
            }
        }
        Ok(())
    }
}

/// Proposal topology with predicted scores.
#[derive(Debug, Clone)]
pub struct ScoredGraph<T = f64> {
    pub base: LaneGraph<T>,
    pub edge_scores: Vec<T>,
    pub node_scores: Vec<T>,
    pub terminal_scores: Vec<T>,
    pub start: usize,
}

impl<T: Scalar> ScoredGraph<T> {
    pub fn new(
        base: LaneGraph<T>,
        edge_scores: Vec<T>,
        node_scores: Vec<T>,
        terminal_scores: Vec<T>,
        start: usize,
    ) -> Result<Self> {
        let (v, e) = (base.node_count(), base.edge_count());
        if edge_scores.len() != e || node_scores.len() != v || terminal_scores.len() != v {
            return Err(Error::DimensionMismatch(format!(
                "scores do not match |V|={v}, |E|={e}"
            )));
        }
        if start >= v {
            return Err(Error::UnknownNode(start));
        }
        Ok(Self {
            base,
            edge_scores,
            node_scores,
            terminal_scores,
            start,
        })
    }
}

/// Nodes with terminal score at least `threshold`, most confident first,
/// ties broken by lower id.
pub fn select_terminals<T: Scalar>(sg: &ScoredGraph<T>, threshold: T) -> Vec<usize> {
    let mut t: Vec<usize> = (0..sg.terminal_scores.len())
        .filter(|&n| sg.terminal_scores[n] >= threshold)
        .collect();
    t.sort_by(|&a, &b| {
        sg.terminal_scores[b]
            .partial_cmp(&sg.terminal_scores[a])
            .unwrap()
            .then(a.cmp(&b))
    });
    t
}

/// Union of cheapest start-to-terminal paths. Edges scoring below
/// `edge_threshold` are dropped first. The start becomes node 0 of the
/// output, which keeps the remaining nodes in input order with unit weights;
/// output edge scores are the predicted ones. Empty when no terminal is
/// reachable.
pub fn prune<T: Scalar>(sg: &ScoredGraph<T>, cfg: &PruningConfig) -> LaneGraph<T> {
    let g = &sg.base;
    let adj = g.adjacency();
    let thr = T::lit(cfg.edge_threshold);
    let eps = T::lit(SCORE_EPS);
    let mut consumed = vec![false; g.edge_count()];
    for t in select_terminals(sg, T::lit(cfg.terminal_threshold)) {
        if t == sg.start {
            continue;
        }
        let sp = dijkstra(g, &adj, sg.start, None, |e| {
            if consumed[e] {
                Some(T::zero())
            } else if sg.edge_scores[e] >= thr {
                Some(T::one() / sg.edge_scores[e].max(eps))
            } else {
                None
            }
        });
        match sp.edge_path(g, t) {
            Some(path) => path.into_iter().for_each(|e| consumed[e] = true),
            None => debug!("terminal {t} unreachable from start {}", sg.start),
        }
    }
    let mut out = LaneGraph::new(*g.frame());
    if !consumed.iter().any(|&c| c) {
        return out;
    }
    let mut used = vec![false; g.node_count()];
    for (e, _) in consumed.iter().enumerate().filter(|(_, &c)| c) {
        used[g.edges()[e].src] = true;
        used[g.edges()[e].dst] = true;
    }
    let mut map = vec![None; g.node_count()];
    let order = std::iter::once(sg.start).chain((0..g.node_count()).filter(|&n| n != sg.start));
    for n in order.filter(|&n| used[n]) {
        map[n] = Some(out.add_node(g.pos(n), T::one()));
    }
    for (e, _) in consumed.iter().enumerate().filter(|(_, &c)| c) {
        let edge = &g.edges()[e];
        let score = sg.edge_scores[e].max(T::zero()).min(T::one());
        out.add_edge(map[edge.src].unwrap(), map[edge.dst].unwrap(), score)
            .expect("pruned edge is valid");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::testutil::graph;

    fn scored(g: LaneGraph<f64>, e: Vec<f64>, t: Vec<f64>) -> ScoredGraph<f64> {
        let n = g.node_count();
        ScoredGraph::new(g, e, vec![0.5; n], t, 0).unwrap()
    }

    fn edge_set(g: &LaneGraph<f64>) -> Vec<((i64, i64), (i64, i64))> {
        let mut v: Vec<_> = g
            .edges()
            .iter()
            .map(|e| {
                let (a, b) = (g.pos(e.src), g.pos(e.dst));
                ((a.x as i64, a.y as i64), (b.x as i64, b.y as i64))
            })
            .collect();
        v.sort();
        v
    }

    #[test]
    fn terminal_selection_order() {
        let g = graph(&[(0.0, 0.0), (1.0, 0.0), (2.0, 0.0)], &[]);
        assert!(select_terminals(&scored(g.clone(), vec![], vec![0.1; 3]), 0.5).is_empty());
        assert_eq!(
            select_terminals(&scored(g.clone(), vec![], vec![0.9, 0.6, 0.4]), 0.5),
            vec![0, 1]
        );
        assert_eq!(
            select_terminals(&scored(g, vec![], vec![0.2, 0.7, 0.7]), 0.5),
            vec![1, 2]
        );
    }

    #[test]
    fn chain_is_kept() {
        let g = graph(&[(0.0, 0.0), (10.0, 0.0), (20.0, 0.0)], &[(0, 1), (1, 2)]);
        let out = prune(
            &scored(g.clone(), vec![0.9; 2], vec![0.0, 0.0, 0.9]),
            &PruningConfig::default(),
        );
        assert_eq!(edge_set(&out), edge_set(&g));
    }

    #[test]
    fn y_graph_shares_stem() {
        // stem 0-1-2, branches 2-3-4 and 2-5; a parallel shortcut 1-5 competes
        let g = graph(
            &[
                (0.0, 0.0),
                (10.0, 0.0),
                (20.0, 0.0),
                (30.0, 10.0),
                (40.0, 20.0),
                (30.0, -10.0),
            ],
            &[(0, 1), (1, 2), (2, 3), (3, 4), (2, 5), (1, 5)],
        );
        let e = vec![0.9, 0.9, 0.9, 0.9, 0.9, 0.6];
        let t = vec![0.0, 0.0, 0.0, 0.0, 0.9, 0.8];
        let out = prune(&scored(g, e, t), &PruningConfig::default());
        assert_eq!(out.edge_count(), 5);
        assert_eq!(out.node_count(), 6);
        let adj = out.adjacency();
        assert!((0..out.node_count()).all(|n| adj.in_degree(n) <= 1));
    }

    #[test]
    fn weaker_parallel_corridor_is_dropped() {
        let g = graph(
            &[(0.0, 0.0), (10.0, 5.0), (20.0, 0.0), (10.0, -5.0)],
            &[(0, 1), (1, 2), (0, 3), (3, 2)],
        );
        let out = prune(
            &scored(g, vec![0.9, 0.9, 0.7, 0.7], vec![0.0, 0.0, 0.9, 0.0]),
            &PruningConfig::default(),
        );
        assert_eq!(edge_set(&out), vec![((0, 0), (10, 5)), ((10, 5), (20, 0))]);
    }

    #[test]
    fn no_terminals_gives_empty_graph() {
        let g = graph(&[(0.0, 0.0), (10.0, 0.0)], &[(0, 1)]);
        assert!(prune(
            &scored(g, vec![0.9], vec![0.1, 0.1]),
            &PruningConfig::default()
        )
        .is_empty());
    }
}
