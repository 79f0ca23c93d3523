use crate::error::{Error, Result};
use crate::imaging::RasterImage;

/// Joint RGB histogram with `bins³` cells, L1-normalised.
///
/// Gray images are treated as RGB with equal channels.
pub fn color_histogram(img: &RasterImage, bins_per_channel: usize) -> Result<Vec<f64>> {
    if bins_per_channel < 2 {
        return Err(Error::InvalidInput(format!("need at least 2 bins per channel, got {bins_per_channel}")));
    }
    let b = bins_per_channel;
    let bin = |v: u8| v as usize * b / 256;
    let mut counts = vec![0u64; b * b * b];
    match img.channels() {
        3 => {
            for p in img.data().chunks_exact(3) {
                counts[(bin(p[0]) * b + bin(p[1])) * b + bin(p[2])] += 1;
            }
        }
        _ => {
            for &v in img.data() {
                let i = bin(v);
                counts[(i * b + i) * b + i] += 1;
            }
        }
    }
    let total = (img.width() * img.height()) as f64;
    Ok(counts.into_iter().map(|c| c as f64 / total).collect())
}

/// L1 distance between two histograms of equal length; in `[0, 2]` for
/// normalised inputs.
pub fn histogram_l1(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_color_fills_one_bin() {
        let img = RasterImage::filled(7, 5, &[10, 200, 90]).unwrap();
        let h = color_histogram(&img, 8).unwrap();
        assert_eq!(h.iter().filter(|&&v| v > 0.0).count(), 1);
        assert!(h.iter().any(|&v| (v - 1.0).abs() < 1e-15));
    }

    #[test]
    fn half_red_half_blue() {
        let img = RasterImage::from_fn_rgb(10, 6, |x, _| if x < 5 { [255, 0, 0] } else { [0, 0, 255] }).unwrap();
        let h = color_histogram(&img, 8).unwrap();
        // red -> (7,0,0), blue -> (0,0,7)
        assert!((h[7 * 64] - 0.5).abs() < 1e-12);
        assert!((h[7] - 0.5).abs() < 1e-12);
        assert_eq!(h.iter().filter(|&&v| v > 0.0).count(), 2);
    }

    #[test]
    fn sums_to_one_and_ignores_pixel_order() {
        let img = RasterImage::from_fn_rgb(13, 11, |x, y| [(x * 19) as u8, (y * 23) as u8, (x * y) as u8]).unwrap();
        let h = color_histogram(&img, 8).unwrap();
        assert!((h.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        let mut px: Vec<[u8; 3]> = img.data().chunks_exact(3).map(|p| [p[0], p[1], p[2]]).collect();
        px.reverse();
        px.swap(3, 40);
        let shuffled = RasterImage::from_raw(13, 11, 3, px.concat()).unwrap();
        assert_eq!(color_histogram(&shuffled, 8).unwrap(), h);
    }

    #[test]
    fn too_few_bins() {
        let img = RasterImage::new(2, 2, 3).unwrap();
        assert!(color_histogram(&img, 1).is_err());
    }
}
