//! Dense layers, ReLU MLPs and im2col convolutions with hand-written
//! reverse passes. Row-major batches: one sample per row.

use ndarray::linalg::general_mat_mul;
use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::Rng;
use rand_distr::{Distribution, Uniform};

use crate::scalar::Scalar;

/// Affine map `y = x·w + b` with `w` stored as `in × out`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense<T> {
    pub w: Array2<T>,
    pub b: Array1<T>,
}

impl<T: Scalar> Dense<T> {
    pub fn zeros(fan_in: usize, fan_out: usize) -> Self {
        Self {
            w: Array2::zeros((fan_in, fan_out)),
            b: Array1::zeros(fan_out),
        }
    }

    /// Weights and biases drawn from `U(-1/sqrt(fan_in), 1/sqrt(fan_in))`.
    pub fn uniform<R: Rng>(fan_in: usize, fan_out: usize, rng: &mut R) -> Self {
        let k = (1.0 / fan_in as f64).sqrt();
        let dist = Uniform::new_inclusive(-k, k);
        Self {
            w: Array2::from_shape_simple_fn((fan_in, fan_out), || T::lit(dist.sample(rng))),
            b: Array1::from_shape_simple_fn(fan_out, || T::lit(dist.sample(rng))),
        }
    }

    #[inline]
    pub fn fan_in(&self) -> usize {
        self.w.nrows()
    }

    #[inline]
    pub fn fan_out(&self) -> usize {
        self.w.ncols()
    }

    pub fn forward(&self, x: ArrayView2<T>) -> Array2<T> {
        let mut y = x.dot(&self.w);
        y += &self.b;
        y
    }

    /// Adds this layer's parameter gradients to `g`.
    pub fn accumulate(&self, x: ArrayView2<T>, dy: ArrayView2<T>, g: &mut Dense<T>) {
        general_mat_mul(T::one(), &x.t(), &dy, T::one(), &mut g.w);
        g.b += &dy.sum_axis(Axis(0));
    }

    /// Accumulates parameter gradients and returns the input gradient.
    pub fn backward(&self, x: ArrayView2<T>, dy: ArrayView2<T>, g: &mut Dense<T>) -> Array2<T> {
        self.accumulate(x, dy, g);
        dy.dot(&self.w.t())
    }
}

pub fn relu_inplace<T: Scalar>(x: &mut Array2<T>) {
    x.mapv_inplace(|v| if v > T::zero() { v } else { T::zero() });
}

/// Zeroes gradient entries whose ReLU output was not positive.
pub fn relu_mask<T: Scalar>(dy: &mut Array2<T>, post: &Array2<T>) {
    ndarray::Zip::from(dy).and(post).for_each(|d, &p| {
        if p <= T::zero() {
            *d = T::zero();
        }
    });
}

/// Stack of dense layers with ReLU between them; `relu_last` also applies
/// it after the final layer.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp<T> {
    pub layers: Vec<Dense<T>>,
}

#[derive(Debug, Clone)]
pub struct MlpTape<T> {
    /// Input of every layer, then the final output.
    acts: Vec<Array2<T>>,
}

impl<T> MlpTape<T> {
    pub fn output(&self) -> &Array2<T> {
        self.acts.last().expect("tape holds the input")
    }

    pub fn into_output(mut self) -> Array2<T> {
        self.acts.pop().expect("tape holds the input")
    }
}

impl<T: Scalar> Mlp<T> {
    pub fn zeros(dims: &[usize]) -> Self {
        Self {
            layers: dims.windows(2).map(|d| Dense::zeros(d[0], d[1])).collect(),
        }
    }

    pub fn uniform<R: Rng>(dims: &[usize], rng: &mut R) -> Self {
        Self {
            layers: dims
                .windows(2)
                .map(|d| Dense::uniform(d[0], d[1], rng))
                .collect(),
        }
    }

    pub fn dims(&self) -> Vec<usize> {
        let mut d = vec![self.layers[0].fan_in()];
        d.extend(self.layers.iter().map(|l| l.fan_out()));
        d
    }

    pub fn forward(&self, x: Array2<T>, relu_last: bool) -> MlpTape<T> {
        let n = self.layers.len();
        let mut acts = Vec::with_capacity(n + 1);
        acts.push(x);
        for (k, layer) in self.layers.iter().enumerate() {
            let mut y = layer.forward(acts[k].view());
            if k + 1 < n || relu_last {
                relu_inplace(&mut y);
            }
            acts.push(y);
        }
        MlpTape { acts }
    }

    /// Accumulates gradients into `g`; returns the gradient of the input.
    pub fn backward(
        &self,
        tape: &MlpTape<T>,
        dy: Array2<T>,
        relu_last: bool,
        g: &mut Mlp<T>,
    ) -> Array2<T> {
        let n = self.layers.len();
        let mut d = dy;
        for k in (0..n).rev() {
            if k + 1 < n || relu_last {
                relu_mask(&mut d, &tape.acts[k + 1]);
            }
            d = self.layers[k].backward(tape.acts[k].view(), d.view(), &mut g.layers[k]);
        }
        d
    }
}

/// Square-image convolution lowered to a matrix product. Images are HWC
/// with one image per contiguous block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConvGeom {
    pub side_in: usize,
    pub channels_in: usize,
    pub kernel: usize,
    pub stride: usize,
    pub pad: usize,
}

impl ConvGeom {
    pub fn side_out(&self) -> usize {
        (self.side_in + 2 * self.pad - self.kernel) / self.stride + 1
    }

    /// Width of one unrolled receptive field.
    pub fn patch_len(&self) -> usize {
        self.kernel * self.kernel * self.channels_in
    }

    fn taps(&self, oy: usize, ox: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        let (k, s, p, si) = (
            self.kernel,
            self.stride,
            self.pad as isize,
            self.side_in as isize,
        );
        (0..k * k).filter_map(move |t| {
            let iy = (oy * s + t / k) as isize - p;
            let ix = (ox * s + t % k) as isize - p;
            (iy >= 0 && ix >= 0 && iy < si && ix < si).then(|| (t, (iy * si + ix) as usize))
        })
    }

    /// `n` images (`n·side_in²·channels_in` values) to an
    /// `(n·side_out²) × patch_len` matrix; padding reads zero.
    pub fn im2col<T: Scalar>(&self, x: &[T], n: usize) -> Array2<T> {
        let (so, c, pl) = (self.side_out(), self.channels_in, self.patch_len());
        let img = self.side_in * self.side_in * c;
        assert_eq!(x.len(), n * img);
        let mut out = Array2::zeros((n * so * so, pl));
        let o = out.as_slice_mut().expect("standard layout");
        for b in 0..n {
            let src = &x[b * img..(b + 1) * img];
            for oy in 0..so {
                for ox in 0..so {
                    let row = ((b * so + oy) * so + ox) * pl;
                    for (t, pix) in self.taps(oy, ox) {
                        o[row + t * c..row + (t + 1) * c]
                            .copy_from_slice(&src[pix * c..(pix + 1) * c]);
                    }
                }
            }
        }
        out
    }

    /// Adjoint of `im2col`: scatters patch gradients back onto the images.
    pub fn col2im<T: Scalar>(&self, d: &Array2<T>, n: usize) -> Vec<T> {
        let (so, c, pl) = (self.side_out(), self.channels_in, self.patch_len());
        let img = self.side_in * self.side_in * c;
        let mut out = vec![T::zero(); n * img];
        let d = d.as_standard_layout();
        let dv = d.as_slice().expect("standard layout");
        for b in 0..n {
            let dst = &mut out[b * img..(b + 1) * img];
            for oy in 0..so {
                for ox in 0..so {
                    let row = ((b * so + oy) * so + ox) * pl;
                    for (t, pix) in self.taps(oy, ox) {
                        for ch in 0..c {
                            dst[pix * c + ch] += dv[row + t * c + ch];
                        }
                    }
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn uniform_init_respects_fan_in_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let d = Dense::<f64>::uniform(16, 8, &mut rng);
        let k = 0.25;
        assert!(d.w.iter().chain(d.b.iter()).all(|v| v.abs() <= k));
        assert!(d.w.iter().any(|v| v.abs() > 0.2));
    }

    #[test]
    fn conv_geometry_sizes() {
        let g = ConvGeom {
            side_in: 32,
            channels_in: 4,
            kernel: 3,
            stride: 2,
            pad: 1,
        };
        assert_eq!(g.side_out(), 16);
        assert_eq!(g.patch_len(), 36);
    }

    #[test]
    fn im2col_matches_direct_convolution() {
        let g = ConvGeom {
            side_in: 5,
            channels_in: 2,
            kernel: 3,
            stride: 2,
            pad: 1,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x: Vec<f64> = (0..2 * 25 * 2).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let w = Dense::<f64>::uniform(g.patch_len(), 3, &mut rng);
        let y = w.forward(g.im2col(&x, 2).view());
        let so = g.side_out();
        for b in 0..2 {
            for oy in 0..so {
                for ox in 0..so {
                    for co in 0..3 {
                        let mut acc = w.b[co];
                        for ky in 0..3 {
                            for kx in 0..3 {
                                let iy = (oy * 2 + ky) as isize - 1;
                                let ix = (ox * 2 + kx) as isize - 1;
                                if iy < 0 || ix < 0 || iy >= 5 || ix >= 5 {
                                    continue;
                                }
                                for ci in 0..2 {
                                    let xv = x[b * 50 + (iy as usize * 5 + ix as usize) * 2 + ci];
                                    acc += xv * w.w[[(ky * 3 + kx) * 2 + ci, co]];
                                }
                            }
                        }
                        assert!((y[[(b * so + oy) * so + ox, co]] - acc).abs() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn col2im_is_adjoint_of_im2col() {
        // <im2col(x), d> == <x, col2im(d)>
        let g = ConvGeom {
            side_in: 6,
            channels_in: 3,
            kernel: 3,
            stride: 2,
            pad: 1,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let x: Vec<f64> = (0..2 * 36 * 3).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let cols = g.im2col(&x, 2);
        let d = Array2::from_shape_simple_fn(cols.dim(), || rng.gen_range(-1.0..1.0));
        let lhs: f64 = (&cols * &d).sum();
        let rhs: f64 = x.iter().zip(g.col2im(&d, 2)).map(|(a, b)| a * b).sum();
        assert!((lhs - rhs).abs() < 1e-10);
    }
}
