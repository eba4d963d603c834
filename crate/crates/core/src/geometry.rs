//! Planar primitives: points, poses, boxes and segment helpers.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2<T = f64> {
    pub x: T,
    pub y: T,
}

impl<T: Scalar> Point2<T> {
    #[inline]
    pub fn new(x: T, y: T) -> Self {
        Self { x, y }
    }

    #[inline]
    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero())
    }

    /// Unit vector pointing along `angle` radians.
    #[inline]
    pub fn from_angle(angle: T) -> Self {
        Self::new(angle.cos(), angle.sin())
    }

    #[inline]
    pub fn dot(self, o: Self) -> T {
        self.x * o.x + self.y * o.y
    }

    /// z-component of the 3D cross product.
    #[inline]
    pub fn cross(self, o: Self) -> T {
        self.x * o.y - self.y * o.x
    }

    #[inline]
    pub fn norm(self) -> T {
        self.x.hypot(self.y)
    }

    #[inline]
    pub fn norm_sq(self) -> T {
        self.dot(self)
    }

    #[inline]
    pub fn dist(self, o: Self) -> T {
        (self - o).norm()
    }

    #[inline]
    pub fn angle(self) -> T {
        self.y.atan2(self.x)
    }

    /// Counter-clockwise rotation by `theta` radians (in a y-up frame).
    #[inline]
    pub fn rotate(self, theta: T) -> Self {
        let (s, c) = theta.sin_cos();
        Self::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    /// The vector rotated by +90 degrees.
    #[inline]
    pub fn perp(self) -> Self {
        Self::new(-self.y, self.x)
    }

    pub fn normalized(self) -> Option<Self> {
        let n = self.norm();
        (n > T::zero() && n.is_finite()).then(|| self * (T::one() / n))
    }

    #[inline]
    pub fn lerp(self, o: Self, t: T) -> Self {
        self + (o - self) * t
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn cast<U: Scalar>(self) -> Point2<U> {
        Point2::new(self.x.cast(), self.y.cast())
    }
}

impl<T: Scalar> Add for Point2<T> {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y)
    }
}

impl<T: Scalar> AddAssign for Point2<T> {
    #[inline]
    fn add_assign(&mut self, o: Self) {
        self.x += o.x;
        self.y += o.y;
    }
}

impl<T: Scalar> Sub for Point2<T> {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y)
    }
}

impl<T: Scalar> Mul<T> for Point2<T> {
    type Output = Self;
    #[inline]
    fn mul(self, s: T) -> Self {
        Self::new(self.x * s, self.y * s)
    }
}

impl<T: Scalar> Neg for Point2<T> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y)
    }
}

/// Wraps an angle into `[-pi, pi)`.
pub fn wrap_angle<T: Scalar>(a: T) -> T {
    let pi = T::lit(std::f64::consts::PI);
    let two_pi = pi + pi;
    let mut w = (a + pi) % two_pi;
    if w < T::zero() {
        w += two_pi;
    }
    let out = w - pi;
    // `%` can land exactly on +pi through rounding.
    if out >= pi {
        -pi
    } else {
        out
    }
}

/// Absolute wrapped difference between two angles, in `[0, pi]`.
pub fn angle_diff<T: Scalar>(a: T, b: T) -> T {
    wrap_angle(a - b).abs()
}

/// Circular mean of a set of angles; `None` when the resultant vanishes.
pub fn circular_mean<T: Scalar>(angles: impl IntoIterator<Item = T>) -> Option<T> {
    let mut s = Point2::<T>::zero();
    let mut n = 0usize;
    for a in angles {
        s += Point2::from_angle(a);
        n += 1;
    }
    (n > 0 && s.norm() > T::lit(1e-9)).then(|| s.angle())
}

/// Position and heading of a virtual agent or a crop frame.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Pose<T = f64> {
    pub x: T,
    pub y: T,
    pub yaw: T,
}

impl<T: Scalar> Pose<T> {
    /// Builds a pose, normalizing the yaw into `[-pi, pi)`.
    pub fn new(x: T, y: T, yaw: T) -> Self {
        Self {
            x,
            y,
            yaw: wrap_angle(yaw),
        }
    }

    #[inline]
    pub fn position(&self) -> Point2<T> {
        Point2::new(self.x, self.y)
    }

    #[inline]
    pub fn heading(&self) -> Point2<T> {
        Point2::from_angle(self.yaw)
    }

    /// Maps a point expressed in this pose's frame into the parent frame.
    #[inline]
    pub fn apply(&self, p: Point2<T>) -> Point2<T> {
        p.rotate(self.yaw) + self.position()
    }

    /// Inverse of [`Pose::apply`].
    #[inline]
    pub fn apply_inverse(&self, p: Point2<T>) -> Point2<T> {
        (p - self.position()).rotate(-self.yaw)
    }

    pub fn cast<U: Scalar>(self) -> Pose<U> {
        Pose::new(self.x.cast(), self.y.cast(), self.yaw.cast())
    }
}

/// Axis-aligned box with inclusive bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aabb<T = f64> {
    pub min: Point2<T>,
    pub max: Point2<T>,
}

impl<T: Scalar> Aabb<T> {
    pub fn new(min: Point2<T>, max: Point2<T>) -> Self {
        Self { min, max }
    }

    pub fn is_degenerate(&self) -> bool {
        !(self.max.x > self.min.x && self.max.y > self.min.y)
    }

    #[inline]
    pub fn contains(&self, p: Point2<T>) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }

    pub fn inflate(&self, by: T) -> Self {
        Self::new(
            Point2::new(self.min.x - by, self.min.y - by),
            Point2::new(self.max.x + by, self.max.y + by),
        )
    }

    /// Smallest box containing every point, `None` for an empty iterator.
    pub fn around(points: impl IntoIterator<Item = Point2<T>>) -> Option<Self> {
        let mut it = points.into_iter();
        let first = it.next()?;
        let mut b = Self::new(first, first);
        for p in it {
            b.min.x = b.min.x.min(p.x);
            b.min.y = b.min.y.min(p.y);
            b.max.x = b.max.x.max(p.x);
            b.max.y = b.max.y.max(p.y);
        }
        Some(b)
    }

    /// Parameter interval of segment `a -> b` inside the box (Liang-Barsky).
    pub fn clip_segment(&self, a: Point2<T>, b: Point2<T>) -> Option<(T, T)> {
        let d = b - a;
        let mut t0 = T::zero();
        let mut t1 = T::one();
        for (p, q) in [
            (-d.x, a.x - self.min.x),
            (d.x, self.max.x - a.x),
            (-d.y, a.y - self.min.y),
            (d.y, self.max.y - a.y),
        ] {
            if p == T::zero() {
                if q < T::zero() {
                    return None;
                }
            } else {
                let r = q / p;
                if p < T::zero() {
                    t0 = t0.max(r);
                } else {
                    t1 = t1.min(r);
                }
                if t0 > t1 {
                    return None;
                }
            }
        }
        Some((t0, t1))
    }
}

/// Closest point on segment `a -> b` to `p`, with its parameter in `[0, 1]`.
pub fn project_on_segment<T: Scalar>(p: Point2<T>, a: Point2<T>, b: Point2<T>) -> (Point2<T>, T) {
    let d = b - a;
    let len2 = d.norm_sq();
    if len2 <= T::zero() {
        return (a, T::zero());
    }
    let t = ((p - a).dot(d) / len2).max(T::zero()).min(T::one());
    (a + d * t, t)
}

#[inline]
pub fn point_segment_distance<T: Scalar>(p: Point2<T>, a: Point2<T>, b: Point2<T>) -> T {
    project_on_segment(p, a, b).0.dist(p)
}
