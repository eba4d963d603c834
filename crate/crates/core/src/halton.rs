//! Halton low-discrepancy point sets.

use crate::error::{invalid, Result};
use crate::geometry::Point2;
use crate::scalar::Scalar;

/// Van der Corput radical inverse of `index` in the given base.
pub fn radical_inverse<T: Scalar>(mut index: u64, base: u64) -> T {
    let inv_base = T::one() / T::lit(base as f64);
    let mut scale = inv_base;
    let mut out = T::zero();
    while index > 0 {
        out += T::lit((index % base) as f64) * scale;
        index /= base;
        scale *= inv_base;
    }
    out
}

fn is_prime(n: u64) -> bool {
    n >= 2
        && (2..)
            .take_while(|d| d * d <= n)
            .all(|d| !n.is_multiple_of(d))
}

/// First `n` points of the 2D Halton sequence. Point `i` uses index `i + 1`,
/// so the origin is never produced.
pub fn halton_points<T: Scalar>(n: usize, bases: (u64, u64)) -> Result<Vec<Point2<T>>> {
    let (b1, b2) = bases;
    if !is_prime(b1) || !is_prime(b2) || b1 == b2 {
        return invalid(format!(
            "halton bases must be distinct primes, got ({b1}, {b2})"
        ));
    }
    Ok((1..=n as u64)
        .map(|i| Point2::new(radical_inverse(i, b1), radical_inverse(i, b2)))
        .collect())
}
