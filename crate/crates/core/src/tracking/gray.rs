use crate::error::{Error, Result};
use crate::geometry::Pixel;
use crate::imaging::RasterImage;
use crate::par;

/// Floating-point luminance image used by the tracker.
#[derive(Clone, PartialEq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    data: Vec<f32>,
}

impl std::fmt::Debug for GrayImage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "GrayImage({}x{})", self.width, self.height)
    }
}

impl GrayImage {
    pub fn new(width: usize, height: usize, data: Vec<f32>) -> Result<Self> {
        if width == 0 || height == 0 || data.len() != width * height {
            return Err(Error::InvalidInput(format!("gray image {width}x{height} with {} samples", data.len())));
        }
        Ok(Self { width, height, data })
    }

    pub fn from_raster(img: &RasterImage) -> Self {
        Self { width: img.width(), height: img.height(), data: img.to_f32_gray() }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn get(&self, x: usize, y: usize) -> f32 {
        self.data[y * self.width + x]
    }

    /// Clamped integer access.
    fn at(&self, x: isize, y: isize) -> f32 {
        let x = x.clamp(0, self.width as isize - 1) as usize;
        let y = y.clamp(0, self.height as isize - 1) as usize;
        self.data[y * self.width + x]
    }

    /// Bilinear sample with replicated borders.
    pub fn sample(&self, x: f64, y: f64) -> f32 {
        let (x0, y0) = (x.floor(), y.floor());
        let (fx, fy) = ((x - x0) as f32, (y - y0) as f32);
        let (xi, yi) = (x0 as isize, y0 as isize);
        let top = self.at(xi, yi) * (1.0 - fx) + self.at(xi + 1, yi) * fx;
        let bottom = self.at(xi, yi + 1) * (1.0 - fx) + self.at(xi + 1, yi + 1) * fx;
        top * (1.0 - fy) + bottom * fy
    }

    pub fn contains(&self, p: Pixel) -> bool {
        p.u >= 0.0 && p.v >= 0.0 && p.u <= (self.width - 1) as f64 && p.v <= (self.height - 1) as f64
    }

    /// Half-resolution image after a separable `[1 4 6 4 1]/16` blur.
    pub fn pyr_down(&self) -> GrayImage {
        const K: [f32; 5] = [1.0 / 16.0, 4.0 / 16.0, 6.0 / 16.0, 4.0 / 16.0, 1.0 / 16.0];
        let (w, h) = (self.width, self.height);
        let mut tmp = vec![0.0f32; w * h];
        par::rows_mut(&mut tmp, w, |y, row| {
            for (x, out) in row.iter_mut().enumerate() {
                *out = (0..5).map(|i| K[i] * self.at(x as isize + i as isize - 2, y as isize)).sum();
            }
        });
        let blurred = GrayImage { width: w, height: h, data: tmp };
        let (nw, nh) = (w.div_ceil(2).max(1), h.div_ceil(2).max(1));
        let mut out = vec![0.0f32; nw * nh];
        par::rows_mut(&mut out, nw, |y, row| {
            for (x, o) in row.iter_mut().enumerate() {
                *o = (0..5).map(|i| K[i] * blurred.at(2 * x as isize, 2 * y as isize + i as isize - 2)).sum();
            }
        });
        GrayImage { width: nw, height: nh, data: out }
    }

    /// Central-difference gradients with replicated borders.
    pub fn gradients(&self) -> (GrayImage, GrayImage) {
        let (w, h) = (self.width, self.height);
        let mut gx = vec![0.0f32; w * h];
        let mut gy = vec![0.0f32; w * h];
        par::rows_mut(&mut gx, w, |y, row| {
            for (x, g) in row.iter_mut().enumerate() {
                let (x, y) = (x as isize, y as isize);
                *g = (self.at(x + 1, y) - self.at(x - 1, y)) * 0.5;
            }
        });
        par::rows_mut(&mut gy, w, |y, row| {
            for (x, g) in row.iter_mut().enumerate() {
                let (x, y) = (x as isize, y as isize);
                *g = (self.at(x, y + 1) - self.at(x, y - 1)) * 0.5;
            }
        });
        (GrayImage { width: w, height: h, data: gx }, GrayImage { width: w, height: h, data: gy })
    }
}
