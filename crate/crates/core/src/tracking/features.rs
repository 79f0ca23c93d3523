use crate::geometry::Pixel;
use crate::tracking::GrayImage;

/// Side of the square descriptor patch.
pub const PATCH: usize = 11;
const HALF: isize = (PATCH / 2) as isize;
const BLOCK_HALF: isize = 2;

/// A tracked keypoint belonging to one corner group.
#[derive(Debug, Clone, PartialEq)]
pub struct Feature {
    pub position: Pixel,
    /// Zero-mean, unit-norm patch; `None` for a flat patch.
    pub descriptor: Option<Vec<f32>>,
    pub group: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorParams {
    pub max_features: usize,
    pub min_distance: f64,
    /// Minimum eigenvalue of the block-averaged structure tensor.
    pub min_eigenvalue: f64,
    /// Also reject responses below this fraction of the strongest one.
    pub quality: f64,
}

impl Default for DetectorParams {
    fn default() -> Self {
        Self { max_features: 25, min_distance: 5.0, min_eigenvalue: 1.0, quality: 0.01 }
    }
}

/// Shi–Tomasi corners inside the disk of radius `r` around `center`,
/// strongest first (ties by row, then column).
pub fn shi_tomasi(img: &GrayImage, center: Pixel, r: f64, params: &DetectorParams) -> Vec<Pixel> {
    let (w, h) = (img.width() as isize, img.height() as isize);
    let margin = HALF + 1;
    let x0 = ((center.u - r).floor() as isize).max(margin);
    let x1 = ((center.u + r).ceil() as isize).min(w - 1 - margin);
    let y0 = ((center.v - r).floor() as isize).max(margin);
    let y1 = ((center.v + r).ceil() as isize).min(h - 1 - margin);
    if x1 < x0 || y1 < y0 {
        return Vec::new();
    }
    let (bw, bh) = ((x1 - x0 + 1) as usize, (y1 - y0 + 1) as usize);
    let px = |x: isize, y: isize| img.get(x as usize, y as usize) as f64;
    let grad = |x: isize, y: isize| ((px(x + 1, y) - px(x - 1, y)) * 0.5, (px(x, y + 1) - px(x, y - 1)) * 0.5);

    let mut response = vec![0.0f64; bw * bh];
    for y in y0..=y1 {
        for x in x0..=x1 {
            let (mut a, mut b, mut c) = (0.0, 0.0, 0.0);
            for dy in -BLOCK_HALF..=BLOCK_HALF {
                for dx in -BLOCK_HALF..=BLOCK_HALF {
                    let (gx, gy) = grad(x + dx, y + dy);
                    a += gx * gx;
                    b += gx * gy;
                    c += gy * gy;
                }
            }
            let n = ((2 * BLOCK_HALF + 1) * (2 * BLOCK_HALF + 1)) as f64;
            let (a, b, c) = (a / n, b / n, c / n);
            let lambda = (a + c) / 2.0 - (((a - c) / 2.0).powi(2) + b * b).sqrt();
            response[(y - y0) as usize * bw + (x - x0) as usize] = lambda;
        }
    }
    let top = response.iter().copied().fold(0.0, f64::max);
    let threshold = params.min_eigenvalue.max(params.quality * top);

    let r2 = r * r;
    let mut candidates = Vec::new();
    for yy in 0..bh {
        for xx in 0..bw {
            let l = response[yy * bw + xx];
            if l < threshold {
                continue;
            }
            let (x, y) = (x0 + xx as isize, y0 + yy as isize);
            if (x as f64 - center.u).powi(2) + (y as f64 - center.v).powi(2) > r2 {
                continue;
            }
            let is_max = (-1isize..=1).all(|dy| {
                (-1isize..=1).all(|dx| {
                    let (nx, ny) = (xx as isize + dx, yy as isize + dy);
                    if (dx == 0 && dy == 0) || nx < 0 || ny < 0 || nx >= bw as isize || ny >= bh as isize {
                        return true;
                    }
                    response[ny as usize * bw + nx as usize] <= l
                })
            });
            if is_max {
                candidates.push((l, y, x));
            }
        }
    }
    candidates.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

    let min_d2 = params.min_distance * params.min_distance;
    let mut out: Vec<Pixel> = Vec::new();
    for (_, y, x) in candidates {
        if out.len() >= params.max_features {
            break;
        }
        let p = Pixel::new(x as f64, y as f64);
        if out.iter().all(|q| (q.u - p.u).powi(2) + (q.v - p.v).powi(2) >= min_d2) {
            out.push(p);
        }
    }
    out
}

/// Zero-mean, unit-norm `PATCH×PATCH` patch sampled around `p`.
pub fn descriptor(img: &GrayImage, p: Pixel) -> Option<Vec<f32>> {
    let mut patch: Vec<f32> = Vec::with_capacity(PATCH * PATCH);
    for dy in -HALF..=HALF {
        for dx in -HALF..=HALF {
            patch.push(img.sample(p.u + dx as f64, p.v + dy as f64));
        }
    }
    let mean = patch.iter().sum::<f32>() / patch.len() as f32;
    patch.iter_mut().for_each(|v| *v -= mean);
    let norm = patch.iter().map(|v| v * v).sum::<f32>().sqrt();
    if norm < 1e-3 {
        return None;
    }
    patch.iter_mut().for_each(|v| *v /= norm);
    Some(patch)
}

/// Zero-mean normalised cross-correlation of two descriptors.
pub fn zncc(a: &[f32], b: &[f32]) -> f32 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn checkerboard(w: usize, h: usize, cell: usize) -> GrayImage {
        let data = (0..w * h)
            .map(|i| if ((i % w) / cell + (i / w) / cell) % 2 == 0 { 40.0 } else { 210.0 })
            .collect();
        GrayImage::new(w, h, data).unwrap()
    }

    #[test]
    fn checkerboard_is_corner_rich() {
        let img = checkerboard(320, 240, 12);
        let pts = shi_tomasi(&img, Pixel::new(160.0, 120.0), 50.0, &DetectorParams::default());
        assert!(pts.len() >= 20, "{}", pts.len());
        assert!(pts.iter().all(|p| p.distance(Pixel::new(160.0, 120.0)) <= 50.0));
    }

    #[test]
    fn flat_image_has_no_corners() {
        let img = GrayImage::new(100, 100, vec![128.0; 10_000]).unwrap();
        assert!(shi_tomasi(&img, Pixel::new(50.0, 50.0), 50.0, &DetectorParams::default()).is_empty());
        assert!(descriptor(&img, Pixel::new(50.0, 50.0)).is_none());
    }

    #[test]
    fn descriptor_is_normalised_and_self_correlates() {
        let img = checkerboard(64, 64, 5);
        let d = descriptor(&img, Pixel::new(30.0, 30.0)).unwrap();
        assert!((zncc(&d, &d) - 1.0).abs() < 1e-5);
        assert!(d.iter().sum::<f32>().abs() < 1e-4);
    }
}
