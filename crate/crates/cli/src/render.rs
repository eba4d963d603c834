//! Graph overlays: magenta edges, yellow markers where lanes start.

use lanegraph::{LaneGraph, Point2, Raster};

const EDGE: [f32; 3] = [1.0, 0.0, 1.0];
const START: [f32; 3] = [1.0, 1.0, 0.0];
const MARKER_RADIUS: i64 = 3;

fn put(r: &mut Raster, x: i64, y: i64, color: [f32; 3]) {
    if x >= 0 && y >= 0 && (x as usize) < r.width() && (y as usize) < r.height() {
        for (c, v) in color.into_iter().enumerate() {
            r.set(x as usize, y as usize, c, v);
        }
    }
}

fn line(r: &mut Raster, a: Point2<f64>, b: Point2<f64>) {
    let n = (a.dist(b) * 2.0).ceil().max(1.0) as usize;
    for k in 0..=n {
        let p = a.lerp(b, k as f64 / n as f64);
        put(r, p.x.round() as i64, p.y.round() as i64, EDGE);
    }
}

/// Draws every graph over `base` (gray backgrounds become RGB).
pub fn overlay(base: &Raster, graphs: &[LaneGraph<f64>]) -> Raster {
    let mut out = Raster::new(base.width(), base.height(), 3);
    for y in 0..base.height() {
        for x in 0..base.width() {
            for c in 0..3 {
                out.set(x, y, c, base.get(x, y, c.min(base.channels() - 1)));
            }
        }
    }
    for g in graphs {
        for e in g.edges() {
            line(&mut out, g.pos(e.src), g.pos(e.dst));
        }
        let adj = g.adjacency();
        for v in 0..g.node_count() {
            if adj.in_degree(v) == 0 && adj.out_degree(v) > 0 {
                let p = g.pos(v);
                let (cx, cy) = (p.x.round() as i64, p.y.round() as i64);
                for dy in -MARKER_RADIUS..=MARKER_RADIUS {
                    for dx in -MARKER_RADIUS..=MARKER_RADIUS {
                        if dx * dx + dy * dy <= MARKER_RADIUS * MARKER_RADIUS {
                            put(&mut out, cx + dx, cy + dy, START);
                        }
                    }
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use lanegraph::CoordinateFrame;

    #[test]
    fn draws_edges_and_start_markers() {
        let mut g = LaneGraph::new(CoordinateFrame::world());
        let a = g.add_node(Point2::new(2.0, 10.0), 1.0);
        let b = g.add_node(Point2::new(18.0, 10.0), 1.0);
        g.add_edge(a, b, 1.0).unwrap();
        let out = overlay(&Raster::filled(20, 20, 1, 0.5), &[g]);
        assert_eq!(out.channels(), 3);
        assert_eq!(
            [out.get(10, 10, 0), out.get(10, 10, 1), out.get(10, 10, 2)],
            EDGE
        );
        assert_eq!(
            [out.get(2, 12, 0), out.get(2, 12, 1), out.get(2, 12, 2)],
            START
        );
        assert_eq!(out.get(10, 0, 1), 0.5);
    }
}
