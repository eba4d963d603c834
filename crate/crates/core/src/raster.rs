//! Dense multi-channel float rasters (aerial tiles, masks, patches).
//!
//! Pixel `(u, v)` has its center at continuous coordinate `(u, v)`; `u` runs
//! along columns (x) and `v` along rows (y).

#[derive(Debug, Clone, PartialEq)]
pub struct Raster {
    width: usize,
    height: usize,
    channels: usize,
    data: Vec<f32>,
}

impl Raster {
    pub fn new(width: usize, height: usize, channels: usize) -> Self {
        Self {
            width,
            height,
            channels,
            data: vec![0.0; width * height * channels],
        }
    }

    pub fn filled(width: usize, height: usize, channels: usize, value: f32) -> Self {
        Self {
            width,
            height,
            channels,
            data: vec![value; width * height * channels],
        }
    }

    pub fn from_data(width: usize, height: usize, channels: usize, data: Vec<f32>) -> Self {
        assert_eq!(data.len(), width * height * channels);
        Self {
            width,
            height,
            channels,
            data,
        }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn channels(&self) -> usize {
        self.channels
    }

    #[inline]
    pub fn data(&self) -> &[f32] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [f32] {
        &mut self.data
    }

    #[inline]
    fn index(&self, x: usize, y: usize, c: usize) -> usize {
        (y * self.width + x) * self.channels + c
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, c: usize) -> f32 {
        self.data[self.index(x, y, c)]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, c: usize, v: f32) {
        let i = self.index(x, y, c);
        self.data[i] = v;
    }

    /// Value of the pixel containing the continuous point, 0 outside.
    pub fn at_point(&self, x: f64, y: f64, c: usize) -> f32 {
        let (u, v) = (x.round(), y.round());
        if u < 0.0 || v < 0.0 || u >= self.width as f64 || v >= self.height as f64 {
            return 0.0;
        }
        self.get(u as usize, v as usize, c)
    }

    /// Value of the pixel nearest to the point, clamping to the border.
    pub fn nearest_clamped(&self, x: f64, y: f64, c: usize) -> f32 {
        let u = x.round().clamp(0.0, self.width as f64 - 1.0);
        let v = y.round().clamp(0.0, self.height as f64 - 1.0);
        self.get(u as usize, v as usize, c)
    }

    #[inline]
    fn get_or_zero(&self, x: i64, y: i64, c: usize) -> f32 {
        if x < 0 || y < 0 || x >= self.width as i64 || y >= self.height as i64 {
            0.0
        } else {
            self.get(x as usize, y as usize, c)
        }
    }

    #[inline]
    fn get_reflect(&self, x: i64, y: i64, c: usize) -> f32 {
        self.get(reflect(x, self.width), reflect(y, self.height), c)
    }

    /// Bilinear sample; reads outside the raster are 0.
    pub fn bilinear(&self, x: f64, y: f64, c: usize) -> f32 {
        self.bilinear_with(x, y, c, Self::get_or_zero)
    }

    /// Bilinear sample with symmetric (mirror) padding outside the raster.
    pub fn bilinear_reflect(&self, x: f64, y: f64, c: usize) -> f32 {
        self.bilinear_with(x, y, c, Self::get_reflect)
    }

    #[inline]
    fn bilinear_with(
        &self,
        x: f64,
        y: f64,
        c: usize,
        fetch: impl Fn(&Self, i64, i64, usize) -> f32,
    ) -> f32 {
        let x0 = x.floor();
        let y0 = y.floor();
        let fx = (x - x0) as f32;
        let fy = (y - y0) as f32;
        let (x0, y0) = (x0 as i64, y0 as i64);
        let a = fetch(self, x0, y0, c);
        let b = fetch(self, x0 + 1, y0, c);
        let d = fetch(self, x0, y0 + 1, c);
        let e = fetch(self, x0 + 1, y0 + 1, c);
        (a * (1.0 - fx) + b * fx) * (1.0 - fy) + (d * (1.0 - fx) + e * fx) * fy
    }

    /// Single channel copy.
    pub fn channel(&self, c: usize) -> Raster {
        let mut out = Raster::new(self.width, self.height, 1);
        for (o, px) in out.data.iter_mut().zip(self.data.chunks(self.channels)) {
            *o = px[c];
        }
        out
    }

    /// Rounds every value to the nearest multiple of 1/255, as an 8-bit
    /// round trip through an image file would.
    pub fn quantize_u8(&mut self) {
        for v in &mut self.data {
            *v = (v.clamp(0.0, 1.0) * 255.0).round() / 255.0;
        }
    }
}

fn reflect(i: i64, n: usize) -> usize {
    let n = n as i64;
    if n == 1 {
        return 0;
    }
    let period = 2 * n;
    let mut m = i.rem_euclid(period);
    if m >= n {
        m = period - 1 - m;
    }
    m as usize
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bilinear_interpolates_and_zero_pads() {
        let mut r = Raster::new(2, 1, 1);
        r.set(0, 0, 0, 0.0);
        r.set(1, 0, 0, 1.0);
        assert!((r.bilinear(0.25, 0.0, 0) - 0.25).abs() < 1e-6);
        assert_eq!(r.bilinear(-5.0, 0.0, 0), 0.0);
        assert!((r.bilinear(1.0, 0.5, 0) - 0.5).abs() < 1e-6);
    }

    #[test]
    fn reflect_mirrors_edges() {
        assert_eq!(reflect(-1, 4), 0);
        assert_eq!(reflect(-2, 4), 1);
        assert_eq!(reflect(4, 4), 3);
        assert_eq!(reflect(9, 4), 1);
    }
}
