use crate::geometry::{Pixel, Vec2};
use crate::par;
use crate::tracking::GrayImage;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LkParams {
    pub levels: usize,
    /// Odd window side in pixels.
    pub window: usize,
    pub max_iterations: usize,
    pub epsilon: f64,
    /// Windows whose smallest mean gradient-tensor eigenvalue is below this
    /// are considered flat.
    pub min_eigenvalue: f64,
    /// Mean absolute intensity residual above which a match is rejected.
    pub max_residual: f64,
}

impl Default for LkParams {
    fn default() -> Self {
        Self { levels: 3, window: 21, max_iterations: 30, epsilon: 0.01, min_eigenvalue: 0.05, max_residual: 12.0 }
    }
}

struct Level {
    img: GrayImage,
    gx: GrayImage,
    gy: GrayImage,
}

/// Image pyramid with precomputed gradients, finest level first.
pub struct Pyramid {
    levels: Vec<Level>,
}

impl Pyramid {
    pub fn new(img: &GrayImage, levels: usize) -> Self {
        let mut out = Vec::with_capacity(levels);
        let mut cur = img.clone();
        for l in 0..levels.max(1) {
            if l > 0 {
                cur = out.last().map(|lv: &Level| lv.img.pyr_down()).expect("previous level");
            }
            let (gx, gy) = cur.gradients();
            out.push(Level { img: cur.clone(), gx, gy });
        }
        Self { levels: out }
    }

    pub fn base(&self) -> &GrayImage {
        &self.levels[0].img
    }
}

/// Outcome of tracking one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Flow {
    pub position: Pixel,
    pub ok: bool,
}

/// Pyramidal Lucas–Kanade.
pub fn lk_flow(prev: &GrayImage, next: &GrayImage, pts: &[Pixel], params: &LkParams) -> Vec<Flow> {
    if prev.width() != next.width() || prev.height() != next.height() {
        return pts.iter().map(|&p| Flow { position: p, ok: false }).collect();
    }
    let a = Pyramid::new(prev, params.levels);
    let b = Pyramid::new(next, params.levels);
    lk_flow_pyramids(&a, &b, pts, params)
}

pub fn lk_flow_pyramids(a: &Pyramid, b: &Pyramid, pts: &[Pixel], params: &LkParams) -> Vec<Flow> {
    par::map(pts, |&p| track_point(a, b, p, params))
}

fn track_point(a: &Pyramid, b: &Pyramid, p: Pixel, params: &LkParams) -> Flow {
    let fail = Flow { position: p, ok: false };
    if !p.is_finite() || !a.base().contains(p) {
        return fail;
    }
    let half = (params.window / 2) as isize;
    let n_px = ((2 * half + 1) * (2 * half + 1)) as f64;
    let top = a.levels.len().min(b.levels.len()) - 1;
    let mut g = Vec2::zeros();
    let mut residual = 0.0;
    for l in (0..=top).rev() {
        let scale = (1u32 << l) as f64;
        let (la, lb) = (&a.levels[l], &b.levels[l]);
        let c = Vec2::new(p.u / scale, p.v / scale);

        let mut ix = Vec::with_capacity(n_px as usize);
        let mut iy = Vec::with_capacity(n_px as usize);
        let mut iv = Vec::with_capacity(n_px as usize);
        let (mut gxx, mut gxy, mut gyy) = (0.0f64, 0.0f64, 0.0f64);
        for dy in -half..=half {
            for dx in -half..=half {
                let (x, y) = (c.x + dx as f64, c.y + dy as f64);
                let (gxv, gyv) = (la.gx.sample(x, y) as f64, la.gy.sample(x, y) as f64);
                gxx += gxv * gxv;
                gxy += gxv * gyv;
                gyy += gyv * gyv;
                ix.push(gxv);
                iy.push(gyv);
                iv.push(la.img.sample(x, y) as f64);
            }
        }
        let det = gxx * gyy - gxy * gxy;
        let min_eig = ((gxx + gyy) / 2.0 - (((gxx - gyy) / 2.0).powi(2) + gxy * gxy).sqrt()) / n_px;
        if l == 0 && min_eig < params.min_eigenvalue {
            return fail;
        }
        let mut nu = Vec2::zeros();
        if det.abs() > 1e-9 && min_eig >= 1e-6 {
            for _ in 0..params.max_iterations {
                let (mut bx, mut by) = (0.0f64, 0.0f64);
                let off = c + g + nu;
                let mut k = 0;
                for dy in -half..=half {
                    for dx in -half..=half {
                        let j = lb.img.sample(off.x + dx as f64, off.y + dy as f64) as f64;
                        let d = iv[k] - j;
                        bx += d * ix[k];
                        by += d * iy[k];
                        k += 1;
                    }
                }
                let eta = Vec2::new((gyy * bx - gxy * by) / det, (gxx * by - gxy * bx) / det);
                nu += eta;
                if !nu.iter().all(|v| v.is_finite()) || nu.norm() > 4.0 * params.window as f64 {
                    return fail;
                }
                if eta.norm() < params.epsilon {
                    break;
                }
            }
        }
        if l == 0 {
            let off = c + g + nu;
            let mut k = 0;
            let mut sum = 0.0;
            for dy in -half..=half {
                for dx in -half..=half {
                    sum += (iv[k] - lb.img.sample(off.x + dx as f64, off.y + dy as f64) as f64).abs();
                    k += 1;
                }
            }
            residual = sum / n_px;
            g += nu;
        } else {
            g = (g + nu) * 2.0;
        }
    }
    let q = p + g;
    if !q.is_finite() || !b.base().contains(q) || residual > params.max_residual {
        return fail;
    }
    Flow { position: q, ok: true }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn texture(w: usize, h: usize, dx: f64, dy: f64) -> GrayImage {
        let f = |x: f64, y: f64| {
            128.0 + 50.0 * (x * 0.061).sin() * (y * 0.047).cos()
                + 35.0 * ((x + 2.0 * y) * 0.033).sin()
                + 20.0 * (0.13 * x + 0.11 * y).sin()
        };
        let data = (0..w * h).map(|i| f((i % w) as f64 - dx, (i / w) as f64 - dy) as f32).collect();
        GrayImage::new(w, h, data).unwrap()
    }

    #[test]
    fn identical_frames_do_not_move() {
        let img = texture(160, 120, 0.0, 0.0);
        let pts = [Pixel::new(40.0, 40.0), Pixel::new(80.5, 60.25), Pixel::new(120.0, 90.0)];
        for f in lk_flow(&img, &img, &pts, &LkParams::default()).iter().zip(&pts) {
            assert!(f.0.ok);
            assert!(f.0.position.distance(*f.1) < 1e-6);
        }
    }

    #[test]
    fn integer_shift_recovered() {
        let a = texture(160, 120, 0.0, 0.0);
        let b = texture(160, 120, 3.0, 0.0);
        let pts = [Pixel::new(50.0, 50.0), Pixel::new(100.0, 70.0)];
        for (f, p) in lk_flow(&a, &b, &pts, &LkParams::default()).iter().zip(&pts) {
            assert!(f.ok);
            assert!((f.position - *p - Vec2::new(3.0, 0.0)).norm() < 0.3, "{:?}", f.position);
        }
    }

    #[test]
    fn large_shift_uses_pyramid() {
        let a = texture(200, 160, 0.0, 0.0);
        let b = texture(200, 160, 14.0, -9.0);
        let f = lk_flow(&a, &b, &[Pixel::new(100.0, 80.0)], &LkParams::default())[0];
        assert!(f.ok);
        assert!((f.position - Pixel::new(114.0, 71.0)).norm() < 0.3, "{:?}", f.position);
    }

    #[test]
    fn leaving_the_frame_fails() {
        let a = texture(160, 120, 0.0, 0.0);
        let b = texture(160, 120, 6.0, 0.0);
        let f = lk_flow(&a, &b, &[Pixel::new(157.0, 60.0)], &LkParams::default())[0];
        assert!(!f.ok);
    }

    #[test]
    fn flat_window_fails() {
        let flat = GrayImage::new(64, 64, vec![90.0; 64 * 64]).unwrap();
        assert!(!lk_flow(&flat, &flat, &[Pixel::new(32.0, 32.0)], &LkParams::default())[0].ok);
    }
}
