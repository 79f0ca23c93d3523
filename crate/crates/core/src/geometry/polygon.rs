use crate::error::{Error, Result};
use crate::geometry::Vec2;

fn cross(o: Vec2, a: Vec2, b: Vec2) -> f64 {
    (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
}

/// Boundary-inclusive containment test for a counter-clockwise convex polygon.
pub fn point_in_convex_polygon(p: Vec2, hull: &[Vec2]) -> Result<bool> {
    if hull.len() < 3 {
        return Err(Error::InvalidHull(format!("{} vertices", hull.len())));
    }
    let n = hull.len();
    Ok((0..n).all(|i| {
        let a = hull[i];
        let b = hull[(i + 1) % n];
        // Scale-aware tolerance on the edge cross product.
        let len = (b - a).norm().max(1e-300);
        cross(a, b, p) / len >= -1e-9
    }))
}

/// Andrew's monotone chain; counter-clockwise, no repeated or collinear
/// vertices. Returns fewer than 3 points for degenerate input.
pub fn convex_hull(points: &[Vec2]) -> Vec<Vec2> {
    let mut pts: Vec<Vec2> = points.to_vec();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut lower: Vec<Vec2> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<Vec2> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// Signed shoelace area; positive for counter-clockwise order.
pub fn polygon_area(poly: &[Vec2]) -> f64 {
    let n = poly.len();
    (0..n)
        .map(|i| {
            let a = poly[i];
            let b = poly[(i + 1) % n];
            a.x * b.y - b.x * a.y
        })
        .sum::<f64>()
        / 2.0
}

/// Area centroid; falls back to the vertex mean for zero-area polygons.
pub fn polygon_centroid(poly: &[Vec2]) -> Vec2 {
    let area = polygon_area(poly);
    let n = poly.len();
    if area.abs() < 1e-300 {
        return poly.iter().sum::<Vec2>() / n.max(1) as f64;
    }
    let mut c = Vec2::zeros();
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        let w = a.x * b.y - b.x * a.y;
        c += (a + b) * w;
    }
    c / (6.0 * area)
}
