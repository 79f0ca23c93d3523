use crate::error::{Error, Result};
use crate::geometry::{convex_hull, point_in_convex_polygon, polygon_area, PlaneEq, Vec2, Vec3};
use crate::reconstruction::{PlaneFit, PointCloud};

/// Convex hull of plane inliers, expressed in an orthonormal in-plane basis.
#[derive(Debug, Clone, PartialEq)]
pub struct PlaneHull {
    pub plane: PlaneEq,
    pub origin: Vec3,
    pub basis: [Vec3; 2],
    /// Counter-clockwise in `(basis[0], basis[1])` coordinates.
    pub hull2d: Vec<Vec2>,
}

impl PlaneHull {
    pub fn to_2d(&self, p: &Vec3) -> Vec2 {
        let d = p - self.origin;
        Vec2::new(d.dot(&self.basis[0]), d.dot(&self.basis[1]))
    }

    pub fn to_3d(&self, q: Vec2) -> Vec3 {
        self.origin + self.basis[0] * q.x + self.basis[1] * q.y
    }

    pub fn area(&self) -> f64 {
        polygon_area(&self.hull2d)
    }

    pub fn contains(&self, q: Vec2) -> bool {
        point_in_convex_polygon(q, &self.hull2d).unwrap_or(false)
    }
}

/// Right-handed in-plane basis with `b0 × b1 = n`.
pub(crate) fn plane_basis(n: &Vec3) -> [Vec3; 2] {
    let helper = if n.x.abs() <= n.y.abs() && n.x.abs() <= n.z.abs() {
        Vec3::x()
    } else if n.y.abs() <= n.z.abs() {
        Vec3::y()
    } else {
        Vec3::z()
    };
    let b0 = helper.cross(n).normalize();
    let b1 = n.cross(&b0);
    [b0, b1]
}

pub fn hull_on_plane(fit: &PlaneFit, c: &PointCloud) -> Result<PlaneHull> {
    if fit.inliers.len() < 3 {
        return Err(Error::Degenerate(format!("hull needs 3 inliers, got {}", fit.inliers.len())));
    }
    let plane = fit.plane;
    let mean = fit.inliers.iter().map(|&i| c.points[i]).sum::<Vec3>() / fit.inliers.len() as f64;
    let origin = plane.project_point(&mean);
    let basis = plane_basis(&plane.n);
    let mut hull = PlaneHull { plane, origin, basis, hull2d: Vec::new() };
    let projected: Vec<Vec2> = fit.inliers.iter().map(|&i| hull.to_2d(&c.points[i])).collect();
    hull.hull2d = convex_hull(&projected);
    if hull.hull2d.len() < 3 {
        return Err(Error::Degenerate("plane inliers are collinear".into()));
    }
    Ok(hull)
}
