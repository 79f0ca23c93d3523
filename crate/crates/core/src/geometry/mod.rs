//! Projective primitives: pinhole back-projection, plane algebra,
//! homographies and convex-polygon containment.
//!
//! World coordinates follow the depth-map convention used throughout the
//! crate: a pixel `(u, v)` with depth `z` lifts to
//! `(c_x + (u - c_x) z / f, c_y + (v - c_y) z / f, z)`. The camera centre is
//! therefore the point `(c_x, c_y, 0)` rather than the origin.

mod homography;
mod polygon;

pub use homography::{homography_dlt, Homography};
pub use polygon::{convex_hull, point_in_convex_polygon, polygon_area, polygon_centroid};

use crate::error::{Error, Result};

pub type Vec3 = nalgebra::Vector3<f64>;
pub type Vec2 = nalgebra::Vector2<f64>;

/// Image coordinates in pixels; origin top-left, `u` right, `v` down.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Pixel {
    pub u: f64,
    pub v: f64,
}

impl Pixel {
    pub const fn new(u: f64, v: f64) -> Self {
        Self { u, v }
    }

    pub fn to_vec(self) -> Vec2 {
        Vec2::new(self.u, self.v)
    }

    pub fn from_vec(v: Vec2) -> Self {
        Self::new(v.x, v.y)
    }

    pub fn distance(self, other: Pixel) -> f64 {
        (self.u - other.u).hypot(self.v - other.v)
    }

    pub fn is_finite(self) -> bool {
        self.u.is_finite() && self.v.is_finite()
    }
}

impl std::ops::Add<Vec2> for Pixel {
    type Output = Pixel;
    fn add(self, d: Vec2) -> Pixel {
        Pixel::new(self.u + d.x, self.v + d.y)
    }
}

impl std::ops::Sub for Pixel {
    type Output = Vec2;
    fn sub(self, o: Pixel) -> Vec2 {
        Vec2::new(self.u - o.u, self.v - o.v)
    }
}

/// Ideal pinhole camera with square pixels plus the relative-depth scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraIntrinsics {
    /// Focal length in pixels.
    pub f: f64,
    pub cx: f64,
    pub cy: f64,
    /// Multiplier from relative depth to world `z`.
    pub s: f64,
}

impl CameraIntrinsics {
    pub fn new(f: f64, cx: f64, cy: f64, s: f64) -> Result<Self> {
        let k = Self { f, cx, cy, s };
        k.validate()?;
        Ok(k)
    }

    /// Principal point at the image centre.
    pub fn centered(f: f64, width: usize, height: usize, s: f64) -> Result<Self> {
        Self::new(f, width as f64 / 2.0, height as f64 / 2.0, s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.f.is_finite() && self.f > 0.0) {
            return Err(Error::InvalidInput(format!("focal length {} must be > 0", self.f)));
        }
        if !(self.s.is_finite() && self.s > 0.0) {
            return Err(Error::InvalidInput(format!("depth scale {} must be > 0", self.s)));
        }
        if !(self.cx.is_finite() && self.cy.is_finite()) {
            return Err(Error::InvalidInput("principal point must be finite".into()));
        }
        Ok(())
    }

    /// Camera centre in world coordinates.
    pub fn center(&self) -> Vec3 {
        Vec3::new(self.cx, self.cy, 0.0)
    }

    /// Direction of the viewing ray through `p`, with unit `z` component.
    pub fn ray(&self, p: Pixel) -> Vec3 {
        Vec3::new((p.u - self.cx) / self.f, (p.v - self.cy) / self.f, 1.0)
    }

    pub fn back_project(&self, p: Pixel, md: f64) -> Result<Vec3> {
        back_project(p, md, self)
    }

    pub fn project(&self, p: &Vec3) -> Result<Pixel> {
        project(p, self)
    }
}

/// Lifts a pixel with relative depth `md` into the world frame.
pub fn back_project(p: Pixel, md: f64, k: &CameraIntrinsics) -> Result<Vec3> {
    if !(p.is_finite() && md.is_finite()) {
        return Err(Error::InvalidInput("non-finite pixel or depth".into()));
    }
    if md < 0.0 {
        return Err(Error::InvalidInput(format!("negative relative depth {md}")));
    }
    let z = k.s * md;
    Ok(Vec3::new(
        k.cx + (p.u - k.cx) * z / k.f,
        k.cy + (p.v - k.cy) * z / k.f,
        z,
    ))
}

/// Exact inverse of [`back_project`].
pub fn project(p: &Vec3, k: &CameraIntrinsics) -> Result<Pixel> {
    if !(p.z > 0.0) {
        return Err(Error::BehindCamera(p.z));
    }
    Ok(Pixel::new(
        k.cx + (p.x - k.cx) * k.f / p.z,
        k.cy + (p.y - k.cy) * k.f / p.z,
    ))
}

/// Plane `n·p + d = 0` with unit normal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneEq {
    pub n: Vec3,
    pub d: f64,
}

impl PlaneEq {
    /// Normalises `n` (and scales `d` to match).
    pub fn new(n: Vec3, d: f64) -> Result<Self> {
        let len = n.norm();
        if !(len.is_finite() && len > 1e-300) || !d.is_finite() {
            return Err(Error::Degenerate("plane normal must be non-zero and finite".into()));
        }
        Ok(Self { n: n / len, d: d / len })
    }

    pub fn from_point_normal(point: &Vec3, n: Vec3) -> Result<Self> {
        let plane = Self::new(n, 0.0)?;
        Ok(Self { n: plane.n, d: -plane.n.dot(point) })
    }

    /// Plane through three points; fails when they are collinear.
    pub fn from_points(a: &Vec3, b: &Vec3, c: &Vec3) -> Result<Self> {
        let n = (b - a).cross(&(c - a));
        let scale = (b - a).norm() * (c - a).norm();
        if !(n.norm() > 1e-12 * scale) {
            return Err(Error::Degenerate("collinear points".into()));
        }
        Self::from_point_normal(a, n)
    }

    pub fn signed_distance(&self, p: &Vec3) -> f64 {
        self.n.dot(p) + self.d
    }

    pub fn project_point(&self, p: &Vec3) -> Vec3 {
        p - self.n * self.signed_distance(p)
    }

    /// Intersection of the ray `origin + t·dir` (t > 0) with the plane.
    pub fn intersect_ray(&self, origin: &Vec3, dir: &Vec3) -> Option<(f64, Vec3)> {
        let denom = self.n.dot(dir);
        if denom.abs() < 1e-15 {
            return None;
        }
        let t = -self.signed_distance(origin) / denom;
        (t > 0.0).then(|| (t, origin + dir * t))
    }
}

/// Unit direction of the line where two planes meet.
///
/// Sign convention: positive `x` component, ties broken by positive `y`,
/// then positive `z`.
pub fn plane_intersection_direction(a: &PlaneEq, b: &PlaneEq) -> Result<Vec3> {
    let dir = a.n.cross(&b.n);
    let len = dir.norm();
    if !(len > 1e-9) {
        return Err(Error::NoIntersection);
    }
    Ok(canonical_direction(dir / len))
}

pub(crate) fn canonical_direction(v: Vec3) -> Vec3 {
    const EPS: f64 = 1e-12;
    let flip = if v.x.abs() > EPS {
        v.x < 0.0
    } else if v.y.abs() > EPS {
        v.y < 0.0
    } else {
        v.z < 0.0
    };
    if flip {
        -v
    } else {
        v
    }
}
