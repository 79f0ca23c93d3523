use crate::geometry::Vec2;
use crate::par;

const GRID: usize = 21;

/// Tallest axis-aligned rectangle of width `aspect·h` centred at `c` that
/// fits inside the counter-clockwise convex polygon; negative when `c` lies
/// outside.
pub fn max_rectangle_height(poly: &[Vec2], aspect: f64, c: Vec2) -> f64 {
    let n = poly.len();
    let mut best = f64::INFINITY;
    for i in 0..n {
        let (p, q) = (poly[i], poly[(i + 1) % n]);
        let e = q - p;
        let len = e.norm();
        if len <= 0.0 {
            continue;
        }
        // Inward unit normal of a CCW edge.
        let nrm = Vec2::new(-e.y, e.x) / len;
        let slack = nrm.dot(&(c - p));
        let reach = nrm.x.abs() * aspect / 2.0 + nrm.y.abs() / 2.0;
        best = best.min(if slack < 0.0 { slack } else { slack / reach });
    }
    best
}

fn grid_best(poly: &[Vec2], aspect: f64, lo: Vec2, hi: Vec2, centroid: Vec2) -> Option<(Vec2, f64)> {
    let step = (hi - lo) / (GRID - 1) as f64;
    let cells = par::map_range(GRID * GRID, |i| {
        let c = lo + Vec2::new(step.x * (i % GRID) as f64, step.y * (i / GRID) as f64);
        (c, max_rectangle_height(poly, aspect, c))
    });
    let top = cells.iter().map(|c| c.1).fold(f64::NEG_INFINITY, f64::max);
    if !(top > 0.0) {
        return None;
    }
    let tol = top * 1e-12;
    cells
        .into_iter()
        .filter(|c| c.1 >= top - tol)
        .min_by(|a, b| (a.0 - centroid).norm().total_cmp(&(b.0 - centroid).norm()))
}

/// Coarse grid over the polygon's bounding box, then one finer grid around
/// the best cell. Returns the centre and height of the best rectangle.
pub(super) fn search(poly: &[Vec2], aspect: f64, centroid: Vec2) -> Option<(Vec2, f64)> {
    let lo = poly.iter().fold(Vec2::repeat(f64::INFINITY), |m, p| m.inf(p));
    let hi = poly.iter().fold(Vec2::repeat(f64::NEG_INFINITY), |m, p| m.sup(p));
    let (c0, h0) = grid_best(poly, aspect, lo, hi, centroid)?;
    let cell = (hi - lo) / (GRID - 1) as f64;
    let (c1, h1) = grid_best(poly, aspect, c0 - cell, c0 + cell, centroid).unwrap_or((c0, h0));
    let (c, h) = if h1 >= h0 { (c1, h1) } else { (c0, h0) };
    // Keep corners strictly on the inside despite rounding.
    Some((c, h * (1.0 - 1e-9)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_fits_centred_wide_rectangle() {
        let sq = [Vec2::new(0.0, 0.0), Vec2::new(10.0, 0.0), Vec2::new(10.0, 10.0), Vec2::new(0.0, 10.0)];
        assert!((max_rectangle_height(&sq, 2.0, Vec2::new(5.0, 5.0)) - 5.0).abs() < 1e-12);
        let (c, h) = search(&sq, 2.0, Vec2::new(5.0, 5.0)).unwrap();
        assert!((h - 5.0).abs() < 1e-6);
        assert!((c - Vec2::new(5.0, 5.0)).norm() < 1e-9);
    }

    #[test]
    fn outside_centre_is_negative() {
        let tri = [Vec2::new(0.0, 0.0), Vec2::new(4.0, 0.0), Vec2::new(0.0, 4.0)];
        assert!(max_rectangle_height(&tri, 1.0, Vec2::new(5.0, 5.0)) < 0.0);
    }
}
