//! Least-squares similarity alignment of 2D point sets.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point2;
use crate::scalar::Scalar;

/// `p -> scale * R(rotation) * p + translation`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Similarity<T = f64> {
    pub scale: T,
    pub rotation: T,
    pub translation: Point2<T>,
}

impl<T: Scalar> Similarity<T> {
    pub fn identity() -> Self {
        Self {
            scale: T::one(),
            rotation: T::zero(),
            translation: Point2::zero(),
        }
    }

    #[inline]
    pub fn apply(&self, p: Point2<T>) -> Point2<T> {
        p.rotate(self.rotation) * self.scale + self.translation
    }
}

/// Closed-form Kabsch-Umeyama estimate of the similarity mapping `src` onto
/// `dst` with minimal summed squared error. Reflections are excluded.
pub fn kabsch_umeyama<T: Scalar>(src: &[Point2<T>], dst: &[Point2<T>]) -> Result<Similarity<T>> {
    if src.len() != dst.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} source vs {} target points",
            src.len(),
            dst.len()
        )));
    }
    if src.len() < 2 {
        return Err(Error::InvalidArgument(
            "need at least two correspondences".into(),
        ));
    }
    let n = T::lit(src.len() as f64);
    let mean = |pts: &[Point2<T>]| {
        let mut s = Point2::zero();
        for &p in pts {
            s += p;
        }
        s * (T::one() / n)
    };
    let (ms, md) = (mean(src), mean(dst));
    let (mut var, mut sdot, mut scross) = (T::zero(), T::zero(), T::zero());
    for (&s, &d) in src.iter().zip(dst) {
        let (a, b) = (s - ms, d - md);
        var += a.norm_sq();
        sdot += a.dot(b);
        scross += a.cross(b);
    }
    let spread = src.iter().map(|p| p.dist(ms)).fold(T::zero(), T::max);
    if spread <= T::lit(1e-12) * (T::one() + ms.norm()) {
        return Err(Error::Degenerate("source points coincide".into()));
    }
    let rotation = scross.atan2(sdot);
    let scale = sdot.hypot(scross) / var;
    let translation = md - ms.rotate(rotation) * scale;
    Ok(Similarity {
        scale,
        rotation,
        translation,
    })
}
