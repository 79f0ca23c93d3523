//! Raster primitives. Format-free: file I/O lives in the pipeline module.

mod canny;
mod histogram;
mod hough;
mod warp;

pub use canny::{canny, canny_with, gaussian_blur, sobel, CannyParams};
pub use histogram::{color_histogram, histogram_l1};
pub use hough::{hough_segments, HoughParams, LineSegment2};
pub use warp::warp_composite;

use crate::error::{Error, Result};

/// 8-bit raster, row-major, 1 (gray) or 3 (RGB) interleaved channels.
#[derive(Clone, PartialEq, Eq)]
pub struct RasterImage {
    width: usize,
    height: usize,
    channels: usize,
    data: Vec<u8>,
}

impl std::fmt::Debug for RasterImage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "RasterImage({}x{}x{})", self.width, self.height, self.channels)
    }
}

impl RasterImage {
    pub fn new(width: usize, height: usize, channels: usize) -> Result<Self> {
        Self::from_raw(width, height, channels, vec![0; width * height * channels])
    }

    pub fn from_raw(width: usize, height: usize, channels: usize, data: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidInput("image dimensions must be positive".into()));
        }
        if channels != 1 && channels != 3 {
            return Err(Error::InvalidInput(format!("unsupported channel count {channels}")));
        }
        if data.len() != width * height * channels {
            return Err(Error::InvalidInput(format!(
                "sample count {} does not match {width}x{height}x{channels}",
                data.len()
            )));
        }
        Ok(Self { width, height, channels, data })
    }

    pub fn filled(width: usize, height: usize, color: &[u8]) -> Result<Self> {
        let data = color.iter().copied().cycle().take(width * height * color.len()).collect();
        Self::from_raw(width, height, color.len(), data)
    }

    pub fn from_fn_rgb(width: usize, height: usize, f: impl Fn(usize, usize) -> [u8; 3]) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height * 3);
        for y in 0..height {
            for x in 0..width {
                data.extend_from_slice(&f(x, y));
            }
        }
        Self::from_raw(width, height, 3, data)
    }

    pub fn from_fn_gray(width: usize, height: usize, f: impl Fn(usize, usize) -> u8) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self::from_raw(width, height, 1, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [u8] {
        &mut self.data
    }

    pub fn into_raw(self) -> Vec<u8> {
        self.data
    }

    pub fn same_size(&self, other: &RasterImage) -> bool {
        self.width == other.width && self.height == other.height
    }

    pub fn pixel(&self, x: usize, y: usize) -> &[u8] {
        let i = (y * self.width + x) * self.channels;
        &self.data[i..i + self.channels]
    }

    pub fn pixel_mut(&mut self, x: usize, y: usize) -> &mut [u8] {
        let i = (y * self.width + x) * self.channels;
        &mut self.data[i..i + self.channels]
    }

    /// Gray value at `(x, y)`; only meaningful for 1-channel images.
    pub fn gray(&self, x: usize, y: usize) -> u8 {
        self.data[y * self.width + x]
    }

    /// Gray samples as `f32`, converting RGB on the fly.
    pub fn to_f32_gray(&self) -> Vec<f32> {
        match self.channels {
            1 => self.data.iter().map(|&v| v as f32).collect(),
            _ => to_grayscale(self)
                .expect("3-channel image")
                .data
                .iter()
                .map(|&v| v as f32)
                .collect(),
        }
    }

    /// Converts to 3 channels, replicating gray.
    pub fn to_rgb(&self) -> RasterImage {
        if self.channels == 3 {
            return self.clone();
        }
        let data = self.data.iter().flat_map(|&v| [v, v, v]).collect();
        RasterImage { width: self.width, height: self.height, channels: 3, data }
    }
}

/// ITU-R BT.601 luma, rounded.
pub fn to_grayscale(img: &RasterImage) -> Result<RasterImage> {
    if img.channels != 3 {
        return Err(Error::InvalidInput(format!(
            "grayscale conversion needs 3 channels, got {}",
            img.channels
        )));
    }
    let data = img
        .data
        .chunks_exact(3)
        .map(|p| {
            let y = 0.299 * p[0] as f64 + 0.587 * p[1] as f64 + 0.114 * p[2] as f64;
            y.round().clamp(0.0, 255.0) as u8
        })
        .collect();
    RasterImage::from_raw(img.width, img.height, 1, data)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn white_stays_white() {
        let img = RasterImage::filled(4, 3, &[255, 255, 255]).unwrap();
        let g = to_grayscale(&img).unwrap();
        assert!(g.data().iter().all(|&v| v == 255));
    }

    #[test]
    fn pure_red_luma() {
        // 0.299 * 255 = 76.245
        let img = RasterImage::filled(5, 5, &[255, 0, 0]).unwrap();
        assert!(to_grayscale(&img).unwrap().data().iter().all(|&v| v == 76));
    }

    #[test]
    fn gray_input_rejected() {
        let img = RasterImage::new(3, 3, 1).unwrap();
        assert!(matches!(to_grayscale(&img), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn construction_checks_sample_count() {
        assert!(RasterImage::from_raw(2, 2, 3, vec![0; 11]).is_err());
        assert!(RasterImage::from_raw(0, 2, 1, vec![]).is_err());
        assert!(RasterImage::from_raw(2, 2, 2, vec![0; 8]).is_err());
    }
}
