use crate::error::{Error, Result};
use crate::geometry::{back_project, CameraIntrinsics, Pixel, Vec3};
use crate::mask::BinaryMask;
use crate::par;

/// Dense relative depth, one non-negative value per pixel.
#[derive(Clone, PartialEq)]
pub struct DepthMap {
    width: usize,
    height: usize,
    values: Vec<f32>,
}

impl std::fmt::Debug for DepthMap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "DepthMap({}x{})", self.width, self.height)
    }
}

impl DepthMap {
    pub fn new(width: usize, height: usize, values: Vec<f32>) -> Result<Self> {
        if width == 0 || height == 0 || values.len() != width * height {
            return Err(Error::InvalidInput(format!(
                "depth map of {width}x{height} needs {} values, got {}",
                width * height,
                values.len()
            )));
        }
        if let Some(bad) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::InvalidInput(format!("depth value {bad} is not finite and non-negative")));
        }
        Ok(Self { width, height, values })
    }

    pub fn constant(width: usize, height: usize, value: f32) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.values[y * self.width + x] as f64
    }
}

/// Back-projected points, each paired with the pixel it came from.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PointCloud {
    pub points: Vec<Vec3>,
    pub pixels: Vec<Pixel>,
}

impl PointCloud {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn from_points(points: Vec<Vec3>) -> Self {
        let pixels = vec![Pixel::default(); points.len()];
        Self { points, pixels }
    }
}

/// Lifts every `stride`-th masked pixel (on both axes) with non-zero depth.
pub fn depth_to_cloud(d: &DepthMap, k: &CameraIntrinsics, m: &BinaryMask, stride: usize) -> Result<PointCloud> {
    if d.width != m.width() || d.height != m.height() {
        return Err(Error::InvalidInput(format!(
            "depth map {}x{} does not match mask {}x{}",
            d.width,
            d.height,
            m.width(),
            m.height()
        )));
    }
    if stride == 0 {
        return Err(Error::InvalidInput("stride must be at least 1".into()));
    }
    k.validate()?;
    let rows: Vec<usize> = (0..d.height).step_by(stride).collect();
    let per_row: Vec<Vec<(Vec3, Pixel)>> = par::map(&rows, |&y| {
        (0..d.width)
            .step_by(stride)
            .filter(|&x| m.get(x, y))
            .filter_map(|x| {
                let md = d.get(x, y);
                if md <= 0.0 {
                    return None;
                }
                let p = Pixel::new(x as f64, y as f64);
                back_project(p, md, k).ok().map(|pt| (pt, p))
            })
            .collect()
    });
    let (points, pixels) = per_row.into_iter().flatten().unzip();
    Ok(PointCloud { points, pixels })
}
