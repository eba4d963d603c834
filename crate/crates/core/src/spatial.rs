//! Uniform-grid point index for radius and nearest-neighbor queries.

use std::collections::HashMap;

use crate::geometry::Point2;
use crate::scalar::Scalar;

#[derive(Debug, Clone)]
pub struct GridIndex<T> {
    cell: T,
    points: Vec<Point2<T>>,
    cells: HashMap<(i64, i64), Vec<usize>>,
}

impl<T: Scalar> GridIndex<T> {
    pub fn new(points: &[Point2<T>], cell: T) -> Self {
        assert!(cell > T::zero());
        let mut cells: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
        for (i, &p) in points.iter().enumerate() {
            cells.entry(Self::key_of(p, cell)).or_default().push(i);
        }
        Self {
            cell,
            points: points.to_vec(),
            cells,
        }
    }

    #[inline]
    fn key_of(p: Point2<T>, cell: T) -> (i64, i64) {
        (
            (p.x / cell).floor().to_i64().unwrap_or(i64::MIN),
            (p.y / cell).floor().to_i64().unwrap_or(i64::MIN),
        )
    }

    #[inline]
    pub fn points(&self) -> &[Point2<T>] {
        &self.points
    }

    /// Indices of points within `radius` of `q` (inclusive), ascending.
    pub fn within(&self, q: Point2<T>, radius: T) -> Vec<usize> {
        let mut out = Vec::new();
        self.for_each_within(q, radius, |i, _| out.push(i));
        out.sort_unstable();
        out
    }

    /// Calls `f(index, distance)` for each point within `radius` of `q`.
    pub fn for_each_within(&self, q: Point2<T>, radius: T, mut f: impl FnMut(usize, T)) {
        let span = (radius / self.cell).ceil().to_i64().unwrap_or(0);
        let (cx, cy) = Self::key_of(q, self.cell);
        for dx in -span..=span {
            for dy in -span..=span {
                if let Some(ids) = self.cells.get(&(cx + dx, cy + dy)) {
                    for &i in ids {
                        let d = self.points[i].dist(q);
                        if d <= radius {
                            f(i, d);
                        }
                    }
                }
            }
        }
    }

    /// Nearest point within `radius`, ties broken by lower index.
    pub fn nearest_within(&self, q: Point2<T>, radius: T) -> Option<(usize, T)> {
        let mut best: Option<(usize, T)> = None;
        self.for_each_within(q, radius, |i, d| {
            if best.is_none_or(|(bi, bd)| d < bd || (d == bd && i < bi)) {
                best = Some((i, d));
            }
        });
        best
    }
}

/// Brute-force nearest point, ties broken by lower index.
pub fn nearest<T: Scalar>(points: &[Point2<T>], q: Point2<T>) -> Option<(usize, T)> {
    let mut best: Option<(usize, T)> = None;
    for (i, &p) in points.iter().enumerate() {
        let d = p.dist(q);
        if best.is_none_or(|(_, bd)| d < bd) {
            best = Some((i, d));
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn radius_query_matches_brute_force() {
        let pts: Vec<Point2<f64>> = (0..200)
            .map(|i| {
                let t = i as f64 * 0.37;
                Point2::new((t * 13.0) % 97.0, (t * 7.0) % 53.0)
            })
            .collect();
        let idx = GridIndex::new(&pts, 5.0);
        let q = Point2::new(40.0, 20.0);
        let got = idx.within(q, 12.0);
        let want: Vec<usize> = (0..pts.len()).filter(|&i| pts[i].dist(q) <= 12.0).collect();
        assert_eq!(got, want);
        let (ni, _) = idx.nearest_within(q, 100.0).unwrap();
        assert_eq!(ni, nearest(&pts, q).unwrap().0);
    }
}
