use nalgebra::{DMatrix, Matrix3, Vector3};

use super::Pixel;
use crate::error::{Error, Result};

/// Projective map between two image planes, stored row-major.
///
/// Always kept normalised: bottom-right entry 1 when it is not vanishingly
/// small, otherwise unit Frobenius norm with a positive largest entry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Homography(Matrix3<f64>);

impl Homography {
    pub fn identity() -> Self {
        Self(Matrix3::identity())
    }

    pub fn from_matrix(m: Matrix3<f64>) -> Result<Self> {
        if m.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("non-finite homography entry".into()));
        }
        let h = Self(normalize(m));
        if h.is_singular() {
            return Err(Error::DegenerateHomography);
        }
        Ok(h)
    }

    pub fn from_rows(rows: [[f64; 3]; 3]) -> Result<Self> {
        Self::from_matrix(Matrix3::from_fn(|r, c| rows[r][c]))
    }

    pub fn translation(dx: f64, dy: f64) -> Self {
        Self(Matrix3::new(1.0, 0.0, dx, 0.0, 1.0, dy, 0.0, 0.0, 1.0))
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.0
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.0[(row, col)]
    }

    pub fn normalized(&self) -> Self {
        Self(normalize(self.0))
    }

    fn is_singular(&self) -> bool {
        let scale = self.0.norm().powi(3);
        !(self.0.determinant().abs() > 1e-14 * scale)
    }

    pub fn inverse(&self) -> Result<Self> {
        if self.is_singular() {
            return Err(Error::DegenerateHomography);
        }
        let inv = self.0.try_inverse().ok_or(Error::DegenerateHomography)?;
        Ok(Self(normalize(inv)))
    }

    /// `self ∘ other`: applies `other` first.
    pub fn compose(&self, other: &Homography) -> Self {
        Self(normalize(self.0 * other.0))
    }

    /// Maps a point; `None` when it lands on the line at infinity.
    pub fn apply(&self, p: Pixel) -> Option<Pixel> {
        let q = self.0 * Vector3::new(p.u, p.v, 1.0);
        if q.z.abs() < 1e-300 {
            return None;
        }
        let out = Pixel::new(q.x / q.z, q.y / q.z);
        out.is_finite().then_some(out)
    }
}

impl Default for Homography {
    fn default() -> Self {
        Self::identity()
    }
}

fn normalize(m: Matrix3<f64>) -> Matrix3<f64> {
    let h33 = m[(2, 2)];
    if h33.abs() > 1e-12 {
        return m / h33;
    }
    let norm = m.norm();
    if norm == 0.0 {
        return m;
    }
    let mut out = m / norm;
    let largest = out.iter().copied().fold(0.0f64, |acc, x| if x.abs() > acc.abs() { x } else { acc });
    if largest < 0.0 {
        out = -out;
    }
    out
}

/// Similarity that moves the centroid to the origin and the mean distance
/// to sqrt(2).
fn hartley_transform(points: &[Pixel]) -> Result<Matrix3<f64>> {
    let n = points.len() as f64;
    let (mu, mv) = points.iter().fold((0.0, 0.0), |(a, b), p| (a + p.u, b + p.v));
    let (mu, mv) = (mu / n, mv / n);
    let mean_dist = points.iter().map(|p| (p.u - mu).hypot(p.v - mv)).sum::<f64>() / n;
    if !(mean_dist > 1e-300) || !mean_dist.is_finite() {
        return Err(Error::Degenerate("all points coincide".into()));
    }
    let s = std::f64::consts::SQRT_2 / mean_dist;
    Ok(Matrix3::new(s, 0.0, -s * mu, 0.0, s, -s * mv, 0.0, 0.0, 1.0))
}

fn transform(t: &Matrix3<f64>, p: Pixel) -> (f64, f64) {
    let q = t * Vector3::new(p.u, p.v, 1.0);
    (q.x / q.z, q.y / q.z)
}

/// Normalised direct linear transform from `(source, target)` pairs.
pub fn homography_dlt(pairs: &[(Pixel, Pixel)]) -> Result<Homography> {
    if pairs.len() < 4 {
        return Err(Error::Degenerate(format!("need at least 4 correspondences, got {}", pairs.len())));
    }
    if pairs.iter().any(|(a, b)| !(a.is_finite() && b.is_finite())) {
        return Err(Error::InvalidInput("non-finite correspondence".into()));
    }
    let src: Vec<Pixel> = pairs.iter().map(|p| p.0).collect();
    let dst: Vec<Pixel> = pairs.iter().map(|p| p.1).collect();
    let t_src = hartley_transform(&src)?;
    let t_dst = hartley_transform(&dst)?;

    // Pad to at least 9 rows so the SVD exposes the full right null space.
    let rows = (2 * pairs.len()).max(9);
    let mut a = DMatrix::<f64>::zeros(rows, 9);
    for (i, (s, d)) in src.iter().zip(&dst).enumerate() {
        let (x, y) = transform(&t_src, *s);
        let (xp, yp) = transform(&t_dst, *d);
        let r = 2 * i;
        a.row_mut(r).copy_from_slice(&[-x, -y, -1.0, 0.0, 0.0, 0.0, xp * x, xp * y, xp]);
        a.row_mut(r + 1).copy_from_slice(&[0.0, 0.0, 0.0, -x, -y, -1.0, yp * x, yp * y, yp]);
    }

    let svd = a.svd(false, true);
    let v_t = svd.v_t.ok_or_else(|| Error::Degenerate("SVD failed".into()))?;
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[i].total_cmp(&svd.singular_values[j]));
    let smallest = order[0];
    let second = svd.singular_values[order[1]];
    let largest = svd.singular_values[order[order.len() - 1]];
    if !(second > 1e-9 * largest) {
        return Err(Error::Degenerate("correspondences do not determine a unique homography".into()));
    }
    let h = v_t.row(smallest);
    let hn = Matrix3::new(h[0], h[1], h[2], h[3], h[4], h[5], h[6], h[7], h[8]);
    let t_dst_inv = t_dst.try_inverse().ok_or_else(|| Error::Degenerate("normalisation".into()))?;
    let full = t_dst_inv * hn * t_src;
    Homography::from_matrix(full).map_err(|e| match e {
        Error::DegenerateHomography => Error::Degenerate("estimated homography is singular".into()),
        other => other,
    })
}

#[cfg(test)]
/// Maximum reprojection error of `h` over `pairs`.
pub(crate) fn max_transfer_error(h: &Homography, pairs: &[(Pixel, Pixel)]) -> f64 {
    pairs
        .iter()
        .map(|(s, d)| h.apply(*s).map_or(f64::INFINITY, |p| p.distance(*d)))
        .fold(0.0, f64::max)
}
