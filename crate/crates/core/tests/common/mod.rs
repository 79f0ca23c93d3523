//! Helpers shared by the integration tests.
#![allow(dead_code)]

use adpipe::geometry::{point_in_convex_polygon, polygon_centroid, Pixel, Vec2};
use adpipe::mask::largest_component;
use adpipe::pipeline::{VideoInput, SeedPlacement};
use adpipe::placement::Placement;
use adpipe::reconstruction::{PlaneFit, PlaneHull, PointCloud};
use adpipe::synth::{FrameBundle, Sequence};
use adpipe::{CameraIntrinsics, RasterImage};

pub fn banner() -> RasterImage {
    RasterImage::from_fn_rgb(400, 100, |x, y| if (x / 25 + y / 25) % 2 == 0 { [230, 20, 30] } else { [250, 250, 250] })
        .unwrap()
}

/// A rendered sequence as pipeline input; every frame has a mask and depth.
pub fn video_input(seq: &Sequence) -> VideoInput<'static> {
    let data: Vec<_> = seq.frames.iter().map(|f| (f.mask.clone(), f.depth.clone())).collect();
    VideoInput {
        frames: seq.frames.iter().map(|f| f.frame.clone()).collect(),
        names: (0..seq.frames.len()).map(|i| format!("{i:06}")).collect(),
        assets: vec![banner()],
        seed_data: Box::new(move |i| Ok(Some(data[i].clone()))),
    }
}

/// Distance from `p` to a convex polygon (0 inside).
pub fn distance_to_polygon(p: Vec2, poly: &[Vec2]) -> f64 {
    if point_in_convex_polygon(p, poly).unwrap_or(false) {
        return 0.0;
    }
    (0..poly.len())
        .map(|i| {
            let (a, b) = (poly[i], poly[(i + 1) % poly.len()]);
            let ab = b - a;
            let t = ((p - a).dot(&ab) / ab.norm_squared()).clamp(0.0, 1.0);
            (a + ab * t - p).norm()
        })
        .fold(f64::INFINITY, f64::min)
}

/// The crowd hull projected into the image.
pub fn projected_hull(hull: &PlaneHull, k: &CameraIntrinsics) -> Vec<Vec2> {
    let pts: Vec<Vec2> = hull.hull2d.iter().map(|q| k.project(&hull.to_3d(*q)).unwrap().to_vec()).collect();
    adpipe::geometry::convex_hull(&pts)
}

/// Unsigned angle between two undirected image lines, degrees.
pub fn line_angle_diff(a_deg: f64, b_deg: f64) -> f64 {
    let d = (a_deg - b_deg).rem_euclid(180.0);
    d.min(180.0 - d)
}

pub fn bottom_edge_angle(p: &Placement) -> f64 {
    let [bl, br, _, _] = p.corners2d;
    (br.v - bl.v).atan2(br.u - bl.u).to_degrees().rem_euclid(180.0)
}

/// Hull in the placement's (along, up) frame, shrunk by `margin` about its
/// area centroid.
pub fn local_hull(p: &Placement, hull: &PlaneHull, margin: f64) -> Vec<Vec2> {
    let local: Vec<Vec2> = hull
        .hull2d
        .iter()
        .map(|q| {
            let w = hull.to_3d(*q) - hull.origin;
            Vec2::new(w.dot(&p.v_align), w.dot(&p.up))
        })
        .collect();
    let local = adpipe::geometry::convex_hull(&local);
    let c = polygon_centroid(&local);
    local.iter().map(|q| c + (q - c) * (1.0 - margin)).collect()
}

fn fits(poly: &[Vec2], c: Vec2, w: f64, h: f64) -> bool {
    [(-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)]
        .iter()
        .all(|(sx, sy)| point_in_convex_polygon(c + Vec2::new(sx * w / 2.0, sy * h / 2.0), poly).unwrap_or(false))
}

/// Largest `aspect` rectangle (axis-aligned) in `poly` by dense search over
/// centres with a bisection on the height at each centre.
pub fn brute_force_rectangle_area(poly: &[Vec2], aspect: f64, grid: usize) -> f64 {
    let (mut lo, mut hi) = (Vec2::repeat(f64::INFINITY), Vec2::repeat(f64::NEG_INFINITY));
    for q in poly {
        lo = lo.inf(q);
        hi = hi.sup(q);
    }
    let mut best: f64 = 0.0;
    for i in 0..grid {
        for j in 0..grid {
            let c = Vec2::new(
                lo.x + (hi.x - lo.x) * (i as f64 + 0.5) / grid as f64,
                lo.y + (hi.y - lo.y) * (j as f64 + 0.5) / grid as f64,
            );
            if !point_in_convex_polygon(c, poly).unwrap_or(false) {
                continue;
            }
            let (mut a, mut b) = (0.0, hi.y - lo.y);
            if aspect * b * b <= best {
                continue;
            }
            for _ in 0..40 {
                let m = 0.5 * (a + b);
                if fits(poly, c, aspect * m, m) {
                    a = m;
                } else {
                    b = m;
                }
            }
            best = best.max(aspect * a * a);
        }
    }
    best
}

/// Exact cloud of the rendered crowd: the same pixels the pipeline samples,
/// lifted by intersecting their rays with the true plane.
pub fn exact_cloud(b: &FrameBundle, k: &CameraIntrinsics, stride: usize) -> PointCloud {
    let crowd = largest_component(&b.mask).unwrap();
    let plane = b.truth.plane_world;
    let mut points = Vec::new();
    for y in (0..crowd.height()).step_by(stride) {
        for x in (0..crowd.width()).step_by(stride) {
            if crowd.get(x, y) {
                let ray = k.ray(Pixel::new(x as f64, y as f64));
                points.push(plane.intersect_ray(&k.center(), &ray).unwrap().1);
            }
        }
    }
    PointCloud::from_points(points)
}

/// A plane fit that takes every point as an inlier of `plane`.
pub fn exact_fit(cloud: &PointCloud, plane: adpipe::PlaneEq) -> PlaneFit {
    let plane = if plane.n.z < 0.0 { adpipe::PlaneEq { n: -plane.n, d: -plane.d } } else { plane };
    PlaneFit { plane, inliers: (0..cloud.len()).collect(), inlier_ratio: 1.0, tolerance: 0.0, rms: 0.0 }
}

pub fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len().max(1) as f64
}

pub fn max(v: &[f64]) -> f64 {
    v.iter().copied().fold(0.0, f64::max)
}

pub fn seed_corners(s: &SeedPlacement) -> [Pixel; 4] {
    s.placement.corners2d
}

/// Image angle of the true boundary direction `along` drawn through the
/// placement's bottom-left corner: the line the bottom edge should follow
/// once perspective convergence is accounted for.
pub fn boundary_angle_at_bottom(p: &Placement, along: adpipe::geometry::Vec3, k: &CameraIntrinsics) -> f64 {
    let a = k.project(&p.corners3d[0]).unwrap();
    let b = k.project(&(p.corners3d[0] + along.normalize() * p.width)).unwrap();
    (b.v - a.v).atan2(b.u - a.u).to_degrees().rem_euclid(180.0)
}
