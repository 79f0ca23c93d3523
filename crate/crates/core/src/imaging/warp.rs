use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::geometry::{Homography, Pixel};
use crate::imaging::RasterImage;
use crate::par;

/// Pastes `asset` into a copy of `target` through `h` (asset → target).
///
/// Each target pixel is mapped back into asset coordinates; if it falls in
/// `[0, w) × [0, h)` it is replaced by the bilinear asset sample, otherwise
/// left untouched. No blending at the asset border.
pub fn warp_composite(asset: &RasterImage, h: &Homography, target: &RasterImage) -> Result<RasterImage> {
    if asset.channels() != target.channels() {
        return Err(Error::InvalidInput(format!(
            "asset has {} channels, target {}",
            asset.channels(),
            target.channels()
        )));
    }
    let inv = h.inverse()?;
    let (aw, ah) = (asset.width(), asset.height());
    let center = h.matrix() * Vector3::new(aw as f64 / 2.0, ah as f64 / 2.0, 1.0);
    if center.z == 0.0 {
        return Err(Error::DegenerateHomography);
    }
    let front = center.z.signum();
    let m = *inv.matrix();
    let ch = target.channels();
    let tw = target.width();
    let (x_range, y_range) = target_bounds(h, aw, ah, tw, target.height());

    let mut out = target.clone();
    par::rows_mut(out.data_mut(), tw * ch, |y, row| {
        if !y_range.contains(&y) {
            return;
        }
        for x in x_range.clone() {
            let q = m * Vector3::new(x as f64, y as f64, 1.0);
            if q.z.signum() != front || q.z == 0.0 {
                continue;
            }
            let (ax, ay) = (q.x / q.z, q.y / q.z);
            const EPS: f64 = 1e-9;
            if !(ax >= -EPS && ay >= -EPS && ax < aw as f64 - EPS && ay < ah as f64 - EPS) {
                continue;
            }
            sample_bilinear(asset, ax.max(0.0), ay.max(0.0), &mut row[x * ch..(x + 1) * ch]);
        }
    });
    Ok(out)
}

/// Target pixel ranges that can receive asset samples.
fn target_bounds(
    h: &Homography,
    aw: usize,
    ah: usize,
    tw: usize,
    th: usize,
) -> (std::ops::Range<usize>, std::ops::Range<usize>) {
    let corners = [(0.0, 0.0), (aw as f64, 0.0), (aw as f64, ah as f64), (0.0, ah as f64)];
    let mut mapped = Vec::with_capacity(4);
    for (x, y) in corners {
        let q = h.matrix() * Vector3::new(x, y, 1.0);
        // A corner behind the camera makes the image unbounded.
        if q.z <= 0.0 {
            return (0..tw, 0..th);
        }
        mapped.push(Pixel::new(q.x / q.z, q.y / q.z));
    }
    let clamp = |v: f64, hi: usize| v.clamp(0.0, hi as f64) as usize;
    let min_u = mapped.iter().map(|p| p.u).fold(f64::INFINITY, f64::min).floor() - 1.0;
    let max_u = mapped.iter().map(|p| p.u).fold(f64::NEG_INFINITY, f64::max).ceil() + 2.0;
    let min_v = mapped.iter().map(|p| p.v).fold(f64::INFINITY, f64::min).floor() - 1.0;
    let max_v = mapped.iter().map(|p| p.v).fold(f64::NEG_INFINITY, f64::max).ceil() + 2.0;
    (clamp(min_u, tw)..clamp(max_u, tw), clamp(min_v, th)..clamp(max_v, th))
}

fn sample_bilinear(img: &RasterImage, x: f64, y: f64, out: &mut [u8]) {
    let (w, h) = (img.width(), img.height());
    let x0 = (x.floor() as usize).min(w - 1);
    let y0 = (y.floor() as usize).min(h - 1);
    let x1 = (x0 + 1).min(w - 1);
    let y1 = (y0 + 1).min(h - 1);
    let fx = (x - x0 as f64).clamp(0.0, 1.0);
    let fy = (y - y0 as f64).clamp(0.0, 1.0);
    let (p00, p10, p01, p11) = (img.pixel(x0, y0), img.pixel(x1, y0), img.pixel(x0, y1), img.pixel(x1, y1));
    for c in 0..out.len() {
        let top = p00[c] as f64 * (1.0 - fx) + p10[c] as f64 * fx;
        let bottom = p01[c] as f64 * (1.0 - fx) + p11[c] as f64 * fx;
        out[c] = (top * (1.0 - fy) + bottom * fy).round().clamp(0.0, 255.0) as u8;
    }
}
