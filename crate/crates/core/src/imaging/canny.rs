use crate::error::{Error, Result};
use crate::imaging::RasterImage;
use crate::mask::BinaryMask;
use crate::par;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CannyParams {
    pub low: f64,
    pub high: f64,
    pub sigma: f64,
}

impl Default for CannyParams {
    fn default() -> Self {
        Self { low: 50.0, high: 150.0, sigma: 1.4 }
    }
}

fn gaussian_kernel5(sigma: f64) -> [f32; 5] {
    let mut k = [0.0f64; 5];
    for (i, w) in k.iter_mut().enumerate() {
        let x = i as f64 - 2.0;
        *w = (-x * x / (2.0 * sigma * sigma)).exp();
    }
    let sum: f64 = k.iter().sum();
    k.map(|w| (w / sum) as f32)
}

/// Separable 5×5 Gaussian with replicated borders.
pub fn gaussian_blur(src: &[f32], width: usize, height: usize, sigma: f64) -> Vec<f32> {
    let k = gaussian_kernel5(sigma);
    let mut tmp = vec![0.0f32; src.len()];
    par::rows_mut(&mut tmp, width, |y, row| {
        let line = &src[y * width..(y + 1) * width];
        for (x, out) in row.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (i, w) in k.iter().enumerate() {
                let xx = (x as isize + i as isize - 2).clamp(0, width as isize - 1) as usize;
                acc += w * line[xx];
            }
            *out = acc;
        }
    });
    let mut out = vec![0.0f32; src.len()];
    par::rows_mut(&mut out, width, |y, row| {
        for (x, o) in row.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (i, w) in k.iter().enumerate() {
                let yy = (y as isize + i as isize - 2).clamp(0, height as isize - 1) as usize;
                acc += w * tmp[yy * width + x];
            }
            *o = acc;
        }
    });
    out
}

/// 3×3 Sobel derivatives with replicated borders.
pub fn sobel(src: &[f32], width: usize, height: usize) -> (Vec<f32>, Vec<f32>) {
    let at = |x: isize, y: isize| {
        let xx = x.clamp(0, width as isize - 1) as usize;
        let yy = y.clamp(0, height as isize - 1) as usize;
        src[yy * width + xx]
    };
    let rows: Vec<(Vec<f32>, Vec<f32>)> = par::map_range(height, |y| {
        let y = y as isize;
        (0..width as isize)
            .map(|x| {
                let gx = (at(x + 1, y - 1) + 2.0 * at(x + 1, y) + at(x + 1, y + 1))
                    - (at(x - 1, y - 1) + 2.0 * at(x - 1, y) + at(x - 1, y + 1));
                let gy = (at(x - 1, y + 1) + 2.0 * at(x, y + 1) + at(x + 1, y + 1))
                    - (at(x - 1, y - 1) + 2.0 * at(x, y - 1) + at(x + 1, y - 1));
                (gx, gy)
            })
            .unzip()
    });
    let mut gx = Vec::with_capacity(width * height);
    let mut gy = Vec::with_capacity(width * height);
    for (a, b) in rows {
        gx.extend(a);
        gy.extend(b);
    }
    (gx, gy)
}

pub fn canny(img: &RasterImage, low: f64, high: f64) -> Result<BinaryMask> {
    canny_with(img, &CannyParams { low, high, ..CannyParams::default() })
}

/// Canny edge detector on a gray image: Gaussian smoothing, Sobel gradients,
/// non-maximum suppression and double-threshold hysteresis.
pub fn canny_with(img: &RasterImage, params: &CannyParams) -> Result<BinaryMask> {
    if img.channels() != 1 {
        return Err(Error::InvalidInput("canny expects a gray image".into()));
    }
    if !(params.low >= 0.0 && params.low <= params.high) {
        return Err(Error::InvalidInput(format!(
            "canny thresholds must satisfy 0 <= low <= high (got {}, {})",
            params.low, params.high
        )));
    }
    let (w, h) = (img.width(), img.height());
    let src: Vec<f32> = img.data().iter().map(|&v| v as f32).collect();
    let smooth = gaussian_blur(&src, w, h, params.sigma);
    let (gx, gy) = sobel(&smooth, w, h);
    let mag: Vec<f32> = gx.iter().zip(&gy).map(|(a, b)| a.hypot(*b)).collect();

    // 0 = none, 1 = weak, 2 = strong
    let tan22 = (std::f32::consts::PI / 8.0).tan();
    let tan67 = (3.0 * std::f32::consts::PI / 8.0).tan();
    let (low, high) = (params.low as f32, params.high as f32);
    let mut class = vec![0u8; w * h];
    par::rows_mut(&mut class, w, |y, row| {
        if y == 0 || y + 1 >= h {
            return;
        }
        for x in 1..w.saturating_sub(1) {
            let i = y * w + x;
            let m = mag[i];
            if m < low || m == 0.0 {
                continue;
            }
            let (ax, ay) = (gx[i].abs(), gy[i].abs());
            // (before, after) neighbours along the gradient direction.
            let (before, after) = if ay <= ax * tan22 {
                (i - 1, i + 1)
            } else if ay >= ax * tan67 {
                (i - w, i + w)
            } else if (gx[i] > 0.0) == (gy[i] > 0.0) {
                (i - w - 1, i + w + 1)
            } else {
                (i - w + 1, i + w - 1)
            };
            if m > mag[before] && m >= mag[after] {
                row[x] = if m >= high { 2 } else { 1 };
            }
        }
    });

    let mut out = BinaryMask::new(w, h);
    let mut stack: Vec<usize> = (0..w * h).filter(|&i| class[i] == 2).collect();
    for &i in &stack {
        out.set_index(i, true);
    }
    while let Some(i) = stack.pop() {
        let (x, y) = ((i % w) as isize, (i / w) as isize);
        for dy in -1..=1 {
            for dx in -1..=1 {
                let (nx, ny) = (x + dx, y + dy);
                if nx < 0 || ny < 0 || nx >= w as isize || ny >= h as isize {
                    continue;
                }
                let j = ny as usize * w + nx as usize;
                if class[j] == 1 && !out.get_index(j) {
                    out.set_index(j, true);
                    stack.push(j);
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_image_has_no_edges() {
        let img = RasterImage::filled(40, 30, &[128]).unwrap();
        assert_eq!(canny(&img, 50.0, 150.0).unwrap().count(), 0);
    }

    #[test]
    fn vertical_step_gives_single_column() {
        let img = RasterImage::from_fn_gray(100, 60, |x, _| if x < 50 { 0 } else { 255 }).unwrap();
        let edges = canny(&img, 50.0, 150.0).unwrap();
        let mut cols = std::collections::BTreeSet::new();
        for y in 0..60 {
            for x in 0..100 {
                if edges.get(x, y) {
                    cols.insert(x);
                }
            }
        }
        assert_eq!(cols.len(), 1, "{cols:?}");
        let c = *cols.iter().next().unwrap();
        assert!((49..=50).contains(&c));
        // Interior rows are all marked.
        assert!((1..59).all(|y| edges.get(c, y)));
    }

    #[test]
    fn square_boundary_is_traced() {
        let img = RasterImage::from_fn_gray(80, 80, |x, y| {
            if (20..60).contains(&x) && (20..60).contains(&y) { 255 } else { 0 }
        })
        .unwrap();
        let edges = canny(&img, 50.0, 150.0).unwrap();
        // Every edge pixel lies within one pixel of the square outline.
        for y in 0..80 {
            for x in 0..80 {
                if edges.get(x, y) {
                    let near_v = (x as i32 - 19).abs() <= 1 || (x as i32 - 60).abs() <= 1;
                    let near_h = (y as i32 - 19).abs() <= 1 || (y as i32 - 60).abs() <= 1;
                    assert!(near_v || near_h, "stray edge at {x},{y}");
                }
            }
        }
        // Four straight runs: each side has an edge pixel at its midpoint row/column.
        let hit_row = |y: usize| (18..=22).any(|x| edges.get(x, y));
        assert!((25..55).all(hit_row));
        assert!((25..55).all(|y| (58..=61).any(|x| edges.get(x, y))));
        assert!((25..55).all(|x| (18..=22).any(|y| edges.get(x, y))));
        assert!((25..55).all(|x| (58..=61).any(|y| edges.get(x, y))));
        // Closed contour: one 8-connected component.
        assert_eq!(crate::mask::connected_components(&edges).len(), 1);
    }

    #[test]
    fn threshold_order_checked() {
        let img = RasterImage::new(8, 8, 1).unwrap();
        assert!(canny(&img, 200.0, 100.0).is_err());
        assert!(canny(&RasterImage::new(8, 8, 3).unwrap(), 1.0, 2.0).is_err());
    }
}
