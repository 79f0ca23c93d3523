//! Orienting and sizing the asset on the crowd plane.
//!
//! The longest straight edge of the crowd mask (normally the crowd/field
//! boundary) defines a plane through the camera centre; its intersection
//! with the crowd plane gives the alignment vector along which the bottom
//! edge of the asset is laid. The largest rectangle of the asset's aspect
//! ratio that fits inside the crowd hull is then projected back into the
//! frame.

mod rect;

use crate::error::{Error, Result};
use crate::geometry::{
    convex_hull, homography_dlt, plane_intersection_direction, polygon_area, CameraIntrinsics, Homography,
    Pixel, PlaneEq, Vec2, Vec3,
};
use crate::imaging::{canny_with, hough_segments, CannyParams, HoughParams, LineSegment2, RasterImage};
use crate::mask::BinaryMask;
use crate::reconstruction::{PlaneFit, PlaneHull};

pub use rect::max_rectangle_height;

/// The dominant straight boundary of the crowd region, in image space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlignmentLine {
    pub segment: LineSegment2,
    /// `(a, b)` of `v = a·u + b`; `None` for a vertical line.
    pub coefficients: Option<(f64, f64)>,
}

impl AlignmentLine {
    pub fn from_segment(segment: LineSegment2) -> Self {
        Self { segment, coefficients: segment.slope_intercept() }
    }

    pub fn is_vertical(&self) -> bool {
        self.coefficients.is_none()
    }

    pub fn angle_deg(&self) -> f64 {
        self.segment.angle_deg()
    }
}

/// Canny on the binary mask followed by probabilistic Hough; the longest
/// segment wins.
pub fn alignment_line(mask: &BinaryMask, canny: &CannyParams, hough: &HoughParams) -> Result<AlignmentLine> {
    if mask.is_empty() {
        return Err(Error::EmptyMask);
    }
    let img = RasterImage::from_fn_gray(mask.width(), mask.height(), |x, y| if mask.get(x, y) { 255 } else { 0 })?;
    let edges = canny_with(&img, canny)?;
    let segments = hough_segments(&edges, hough);
    segments.first().copied().map(AlignmentLine::from_segment).ok_or(Error::NoAlignment)
}

/// Plane through the camera centre containing every point that projects
/// onto the alignment line.
pub fn alignment_plane(line: &AlignmentLine, k: &CameraIntrinsics) -> Result<PlaneEq> {
    k.validate()?;
    let (p0, p1) = (line.segment.p0, line.segment.p1);
    if !(p0.is_finite() && p1.is_finite()) || p0.distance(p1) < 1e-9 {
        return Err(Error::InvalidInput("alignment line has coincident endpoints".into()));
    }
    let n = k.ray(p0).cross(&k.ray(p1));
    PlaneEq::from_point_normal(&k.center(), n).map_err(|_| Error::InvalidInput("degenerate alignment line".into()))
}

pub fn alignment_vector(align: &PlaneEq, crowd: &PlaneEq) -> Result<Vec3> {
    plane_intersection_direction(align, crowd)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlacementParams {
    /// Width over height of the asset.
    pub aspect: f64,
    /// The hull is shrunk about its centroid by this fraction first.
    pub margin: f64,
    /// Smallest acceptable rectangle, as a fraction of the hull area.
    pub min_area_fraction: f64,
}

impl Default for PlacementParams {
    fn default() -> Self {
        Self { aspect: 4.0, margin: 0.02, min_area_fraction: 0.01 }
    }
}

/// A rectangle lying on the crowd plane.
#[derive(Debug, Clone, PartialEq)]
pub struct Placement {
    /// Bottom-left, bottom-right, top-right, top-left as seen in the frame.
    pub corners3d: [Vec3; 4],
    pub corners2d: [Pixel; 4],
    /// Unit vector along the bottom edge (left to right in the frame).
    pub v_align: Vec3,
    /// Unit in-plane vector from the bottom edge toward the top edge.
    pub up: Vec3,
    pub width: f64,
    pub height: f64,
}

impl Placement {
    pub fn area(&self) -> f64 {
        self.width * self.height
    }
}

/// Fits the largest `aspect`-preserving rectangle with its bottom edge along
/// `v_align` inside the (margin-shrunk) crowd hull, and projects it.
pub fn place_asset(
    crowd: &PlaneFit,
    hull: &PlaneHull,
    v_align: Vec3,
    params: &PlacementParams,
    k: &CameraIntrinsics,
) -> Result<Placement> {
    if !(params.aspect.is_finite() && params.aspect > 0.0) {
        return Err(Error::InvalidInput(format!("aspect {} must be > 0", params.aspect)));
    }
    if !(0.0..1.0).contains(&params.margin) {
        return Err(Error::InvalidInput(format!("margin {} must be in [0, 1)", params.margin)));
    }
    let n = crowd.plane.n;
    let v = v_align.try_normalize(1e-300).ok_or_else(|| Error::InvalidInput("zero alignment vector".into()))?;
    if v.dot(&n).abs() > 1e-6 {
        return Err(Error::InvalidInput("alignment vector is not parallel to the crowd plane".into()));
    }
    let e_x = (v - n * v.dot(&n)).normalize();
    let mut e_y = n.cross(&e_x);

    let area_hull = hull.area();
    let hull_pts = convex_hull(&hull.hull2d);
    let perimeter: f64 = (0..hull_pts.len()).map(|i| (hull_pts[(i + 1) % hull_pts.len()] - hull_pts[i]).norm()).sum();
    if hull_pts.len() < 3 || !(area_hull > 1e-6 * perimeter * perimeter) {
        return Err(Error::PlacementFailed("crowd hull is degenerate".into()));
    }

    // Which in-plane perpendicular is "up": the one moving toward smaller v.
    let centre3d = hull.to_3d(crate::geometry::polygon_centroid(&hull_pts));
    let probe = area_hull.sqrt() * 1e-3;
    let project = |p: &Vec3| k.project(p).map_err(|e| Error::PlacementFailed(format!("projection failed: {e}")));
    let c2 = project(&centre3d)?;
    if project(&(centre3d + e_y * probe))?.v > c2.v {
        e_y = -e_y;
    }
    let mut e_x = e_x;
    if project(&(centre3d + e_x * probe))?.u < c2.u {
        e_x = -e_x;
    }

    // Hull in (along, up) coordinates.
    let to_basis = |w: &Vec3| Vec2::new(w.dot(&hull.basis[0]), w.dot(&hull.basis[1]));
    let (a, b) = (to_basis(&e_x), to_basis(&e_y));
    let local: Vec<Vec2> = hull_pts.iter().map(|q| Vec2::new(q.dot(&a), q.dot(&b))).collect();
    let local = convex_hull(&local);
    let centroid = crate::geometry::polygon_centroid(&local);
    let shrunk: Vec<Vec2> = local.iter().map(|q| centroid + (q - centroid) * (1.0 - params.margin)).collect();

    let (center, h) = rect::search(&shrunk, params.aspect, centroid)
        .ok_or_else(|| Error::PlacementFailed("no rectangle fits inside the hull".into()))?;
    let w = params.aspect * h;
    if !(w * h >= params.min_area_fraction * area_hull) {
        return Err(Error::PlacementFailed(format!(
            "largest rectangle covers {:.4}% of the hull, below the {:.2}% minimum",
            100.0 * w * h / area_hull,
            100.0 * params.min_area_fraction
        )));
    }

    let centre = hull.to_3d(a * center.x + b * center.y);
    let corner = |sx: f64, sy: f64| centre + e_x * (sx * w / 2.0) + e_y * (sy * h / 2.0);
    let corners3d = [corner(-1.0, -1.0), corner(1.0, -1.0), corner(1.0, 1.0), corner(-1.0, 1.0)];
    let mut corners2d = [Pixel::default(); 4];
    for (dst, c) in corners2d.iter_mut().zip(&corners3d) {
        *dst = project(c)?;
    }
    Ok(Placement { corners3d, corners2d, v_align: e_x, up: e_y, width: w, height: h })
}

/// Maps asset pixel coordinates onto the frame: the asset's top-left corner
/// lands on the placement's top-left, and its bottom edge on the edge laid
/// along the alignment vector.
pub fn placement_homography(p: &Placement, asset_w: usize, asset_h: usize) -> Result<Homography> {
    corners_homography(&p.corners2d, asset_w, asset_h)
}

/// Homography from the asset rectangle to a quadrilateral given as
/// bottom-left, bottom-right, top-right, top-left.
pub fn corners_homography(corners: &[Pixel; 4], asset_w: usize, asset_h: usize) -> Result<Homography> {
    if asset_w == 0 || asset_h == 0 {
        return Err(Error::InvalidInput("asset has zero size".into()));
    }
    let (w, h) = (asset_w as f64, asset_h as f64);
    let [bl, br, tr, tl] = *corners;
    homography_dlt(&[
        (Pixel::new(0.0, 0.0), tl),
        (Pixel::new(w, 0.0), tr),
        (Pixel::new(w, h), br),
        (Pixel::new(0.0, h), bl),
    ])
}

/// Sanity check shared by tests and diagnostics: the signed area of the
/// projected quadrilateral (positive when it keeps the asset's winding).
pub fn quad_area(corners: &[Pixel; 4]) -> f64 {
    let [bl, br, tr, tl] = corners.map(Pixel::to_vec);
    // Asset order (tl, tr, br, bl) is clockwise on screen, i.e. positive
    // in the v-down frame.
    polygon_area(&[tl, tr, br, bl])
}
