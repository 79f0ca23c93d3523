use nalgebra::{Matrix3, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::{PlaneEq, Vec3};
use crate::par;
use crate::reconstruction::PointCloud;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RansacParams {
    /// Maximum point-to-plane distance of an inlier, in world units.
    pub tolerance: f64,
    pub iterations: usize,
    pub seed: u64,
}

impl Default for RansacParams {
    fn default() -> Self {
        Self { tolerance: 10_000.0, iterations: 500, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlaneFit {
    /// Normal oriented with positive `z` (ties: `y`, then `x`).
    pub plane: PlaneEq,
    /// Ascending point indices into the cloud.
    pub inliers: Vec<usize>,
    pub inlier_ratio: f64,
    pub tolerance: f64,
    pub rms: f64,
}

fn orient(plane: PlaneEq) -> PlaneEq {
    let n = plane.n;
    let flip = if n.z.abs() > 1e-12 {
        n.z < 0.0
    } else if n.y.abs() > 1e-12 {
        n.y < 0.0
    } else {
        n.x < 0.0
    };
    if flip {
        PlaneEq { n: -n, d: -plane.d }
    } else {
        plane
    }
}

fn centroid_and_scatter(points: &[Vec3], idx: impl Iterator<Item = usize> + Clone) -> (Vec3, Matrix3<f64>) {
    let mut n = 0usize;
    let mut c = Vec3::zeros();
    for i in idx.clone() {
        c += points[i];
        n += 1;
    }
    c /= n.max(1) as f64;
    let mut s = Matrix3::zeros();
    for i in idx {
        let d = points[i] - c;
        s += d * d.transpose();
    }
    (c, s)
}

/// Total-least-squares plane through the selected points.
pub(crate) fn fit_plane_lsq(points: &[Vec3], idx: &[usize]) -> Result<PlaneEq> {
    let (c, s) = centroid_and_scatter(points, idx.iter().copied());
    let eig = SymmetricEigen::new(s);
    let (min_i, _) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("3 eigenvalues");
    PlaneEq::from_point_normal(&c, eig.eigenvectors.column(min_i).into_owned()).map(orient)
}

fn score(points: &[Vec3], plane: &PlaneEq, tol: f64) -> (usize, f64) {
    let mut count = 0usize;
    let mut ss = 0.0;
    for p in points {
        let r = plane.signed_distance(p);
        if r.abs() <= tol {
            count += 1;
            ss += r * r;
        }
    }
    (count, if count > 0 { (ss / count as f64).sqrt() } else { f64::INFINITY })
}

fn inliers_of(points: &[Vec3], plane: &PlaneEq, tol: f64) -> Vec<usize> {
    points
        .iter()
        .enumerate()
        .filter(|(_, p)| plane.signed_distance(p).abs() <= tol)
        .map(|(i, _)| i)
        .collect()
}

/// Dominant plane by 3-point RANSAC followed by a least-squares refit.
///
/// Hypotheses are drawn up front from a seeded generator and scored
/// independently, so the winner (most inliers, then smallest RMS residual,
/// then earliest draw) does not depend on evaluation order.
pub fn ransac_plane(c: &PointCloud, params: &RansacParams) -> Result<PlaneFit> {
    let pts = &c.points;
    let n = pts.len();
    if n < 3 {
        return Err(Error::Degenerate(format!("RANSAC needs 3 points, got {n}")));
    }
    if !(params.tolerance > 0.0) || params.iterations == 0 {
        return Err(Error::InvalidInput("tolerance and iterations must be positive".into()));
    }
    let (_, scatter) = centroid_and_scatter(pts, 0..n);
    let mut ev: Vec<f64> = SymmetricEigen::new(scatter).eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    if !(ev[1] > 1e-12 * ev[0]) {
        return Err(Error::Degenerate("points are collinear or coincident".into()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let samples: Vec<[usize; 3]> = (0..params.iterations)
        .map(|_| {
            let s = rand::seq::index::sample(&mut rng, n, 3);
            [s.index(0), s.index(1), s.index(2)]
        })
        .collect();

    let scored: Vec<Option<(PlaneEq, usize, f64)>> = par::map(&samples, |s| {
        let plane = PlaneEq::from_points(&pts[s[0]], &pts[s[1]], &pts[s[2]]).ok()?;
        let (count, rms) = score(pts, &plane, params.tolerance);
        Some((orient(plane), count, rms))
    });
    let best = scored
        .into_iter()
        .flatten()
        .reduce(|a, b| if b.1 > a.1 || (b.1 == a.1 && b.2 < a.2) { b } else { a })
        .ok_or_else(|| Error::Degenerate("every RANSAC sample was collinear".into()))?;

    let (hyp_plane, hyp_count, hyp_rms) = best;
    let hyp_inliers = inliers_of(pts, &hyp_plane, params.tolerance);
    let mut fit = PlaneFit {
        plane: hyp_plane,
        inlier_ratio: hyp_count as f64 / n as f64,
        inliers: hyp_inliers,
        tolerance: params.tolerance,
        rms: hyp_rms,
    };
    if hyp_count >= 3 {
        if let Ok(refit) = fit_plane_lsq(pts, &fit.inliers) {
            let (count, rms) = score(pts, &refit, params.tolerance);
            if count >= hyp_count {
                fit = PlaneFit {
                    plane: refit,
                    inliers: inliers_of(pts, &refit, params.tolerance),
                    inlier_ratio: count as f64 / n as f64,
                    tolerance: params.tolerance,
                    rms,
                };
            }
        }
    }
    Ok(fit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn params(tol: f64, seed: u64) -> RansacParams {
        RansacParams { tolerance: tol, iterations: 300, seed }
    }

    #[test]
    fn exact_plane() {
        let pts: Vec<Vec3> = (0..500).map(|i| Vec3::new((i % 25) as f64, (i / 25) as f64 * 1.3, 5.0)).collect();
        let fit = ransac_plane(&PointCloud::from_points(pts), &params(1e-6, 1)).unwrap();
        assert!((fit.plane.n - Vec3::z()).norm() < 1e-12);
        assert!((fit.plane.d + 5.0).abs() < 1e-9);
        assert_eq!(fit.inlier_ratio, 1.0);
    }

    #[test]
    fn too_few_or_collinear() {
        let two = PointCloud::from_points(vec![Vec3::zeros(), Vec3::x()]);
        assert!(matches!(ransac_plane(&two, &params(1.0, 0)), Err(Error::Degenerate(_))));
        let line = PointCloud::from_points((0..20).map(|i| Vec3::new(i as f64, 2.0 * i as f64, 1.0)).collect());
        assert!(matches!(ransac_plane(&line, &params(1.0, 0)), Err(Error::Degenerate(_))));
    }

    #[test]
    fn inliers_respect_tolerance_and_ratio_is_monotone() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let pts: Vec<Vec3> = (0..400)
            .map(|i| {
                if i % 3 == 0 {
                    Vec3::new(rng.random_range(-10.0..10.0), rng.random_range(-10.0..10.0), rng.random_range(0.0..20.0))
                } else {
                    let (x, y) = (rng.random_range(-10.0..10.0), rng.random_range(-10.0..10.0));
                    Vec3::new(x, y, 10.0 + 0.2 * x + rng.random_range(-0.05..0.05))
                }
            })
            .collect();
        let cloud = PointCloud::from_points(pts);
        let mut last = 0.0;
        for tol in [0.05, 0.1, 0.2, 0.5, 1.0] {
            let fit = ransac_plane(&cloud, &params(tol, 9)).unwrap();
            for &i in &fit.inliers {
                assert!(fit.plane.signed_distance(&cloud.points[i]).abs() <= tol);
            }
            assert!(fit.inlier_ratio >= last);
            last = fit.inlier_ratio;
        }
    }
}
