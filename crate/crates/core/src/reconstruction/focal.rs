use nalgebra::{Matrix3, SymmetricEigen};

use crate::error::{Error, Result};
use crate::geometry::{Pixel, Vec2, Vec3};
use crate::imaging::LineSegment2;
use crate::par;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VpParams {
    /// A segment supports a vanishing point when the line from its midpoint
    /// to the point deviates from the segment by less than this angle.
    pub consistency_deg: f64,
    /// Vanishing points closer than this angle (seen from the segment
    /// centroid) are merged.
    pub merge_deg: f64,
    /// Only the longest segments take part in hypothesis generation.
    pub max_segments: usize,
    pub max_points: usize,
    pub min_support: usize,
}

impl Default for VpParams {
    fn default() -> Self {
        Self { consistency_deg: 2.0, merge_deg: 10.0, max_segments: 200, max_points: 3, min_support: 2 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VanishingPoint {
    /// Unit homogeneous image point; `w ≈ 0` for directions parallel to the
    /// image plane.
    pub homogeneous: Vec3,
    /// Indices of supporting segments in the caller's slice.
    pub segments: Vec<usize>,
    /// Total length of supporting segments.
    pub weight: f64,
}

impl VanishingPoint {
    pub fn pixel(&self) -> Option<Pixel> {
        let h = self.homogeneous;
        (h.z.abs() > 1e-10 * h.xy().norm().max(1.0))
            .then(|| Pixel::new(h.x / h.z, h.y / h.z))
            .filter(|p| p.is_finite())
    }

    pub fn is_finite(&self) -> bool {
        self.pixel().is_some()
    }
}

/// Segments in a centred, isotropically scaled frame.
struct Normalized {
    center: Vec2,
    scale: f64,
    mids: Vec<Vec2>,
    dirs: Vec<Vec2>,
    lines: Vec<Vec3>,
    lengths: Vec<f64>,
}

impl Normalized {
    fn new(segs: &[LineSegment2]) -> Self {
        let n = segs.len() as f64;
        let center = segs.iter().map(|s| s.midpoint().to_vec()).sum::<Vec2>() / n;
        let spread = segs
            .iter()
            .flat_map(|s| [s.p0.to_vec(), s.p1.to_vec()])
            .map(|p| (p - center).norm())
            .sum::<f64>()
            / (2.0 * n);
        let scale = if spread > 1e-12 { spread } else { 1.0 };
        let to_n = |p: Pixel| (p.to_vec() - center) / scale;
        let mut out = Normalized { center, scale, mids: vec![], dirs: vec![], lines: vec![], lengths: vec![] };
        for s in segs {
            let (a, b) = (to_n(s.p0), to_n(s.p1));
            let l = Vec3::new(a.x, a.y, 1.0).cross(&Vec3::new(b.x, b.y, 1.0));
            out.mids.push((a + b) / 2.0);
            out.dirs.push((b - a).normalize());
            out.lines.push(l / l.xy().norm());
            out.lengths.push(s.length());
        }
        out
    }

    /// Direction from the segment midpoint toward `h`.
    fn toward(&self, i: usize, h: &Vec3) -> Option<Vec2> {
        let e = if h.z.abs() <= 1e-12 * h.xy().norm() { h.xy() } else { h.xy() / h.z - self.mids[i] };
        let len = e.norm();
        (len > 1e-12).then(|| e / len)
    }

    fn consistent(&self, i: usize, h: &Vec3, cos_tol: f64) -> bool {
        self.toward(i, h).is_some_and(|e| e.dot(&self.dirs[i]).abs() >= cos_tol)
    }

    fn refit(&self, members: &[usize]) -> Option<Vec3> {
        let mut m = Matrix3::zeros();
        for &i in members {
            m += self.lines[i] * self.lines[i].transpose() * self.lengths[i];
        }
        let eig = SymmetricEigen::new(m);
        let (k, _) = eig.eigenvalues.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1))?;
        let h: Vec3 = eig.eigenvectors.column(k).into_owned();
        (h.norm() > 0.0).then(|| h.normalize())
    }

    /// Bearing of a hypothesis as seen from the centroid; `None` means the
    /// bearing is only defined modulo 180°.
    fn bearing(h: &Vec3) -> (Vec2, bool) {
        if h.z.abs() <= 1e-9 * h.xy().norm() {
            (h.xy().normalize(), false)
        } else {
            let p = h.xy() / h.z;
            let len = p.norm();
            if len < 1e-12 {
                (Vec2::x(), true)
            } else {
                (p / len, true)
            }
        }
    }

    fn to_pixel_frame(&self, h: &Vec3) -> Vec3 {
        let p = Vec3::new(self.scale * h.x + self.center.x * h.z, self.scale * h.y + self.center.y * h.z, h.z);
        let p = p.normalize();
        if p.z < 0.0 || (p.z == 0.0 && (p.x < 0.0 || (p.x == 0.0 && p.y < 0.0))) {
            -p
        } else {
            p
        }
    }
}

fn close_bearings(a: &Vec3, b: &Vec3, merge_cos: f64) -> bool {
    let (da, fa) = Normalized::bearing(a);
    let (db, fb) = Normalized::bearing(b);
    let c = da.dot(&db);
    if fa && fb {
        c >= merge_cos
    } else {
        c.abs() >= merge_cos
    }
}

/// Greedy vanishing-point extraction.
///
/// Every pair of remaining segments proposes the intersection of their
/// lines; the proposal with the greatest supporting length wins, is refined
/// by weighted least squares over its supporters, and those supporters are
/// removed before the next round. A new point within the merge angle of an
/// earlier one is folded into it.
pub fn vanishing_points(segments: &[LineSegment2], params: &VpParams) -> Result<Vec<VanishingPoint>> {
    let mut order: Vec<usize> = (0..segments.len()).filter(|&i| segments[i].length() > 0.0).collect();
    order.sort_by(|&a, &b| segments[b].length().total_cmp(&segments[a].length()).then(a.cmp(&b)));
    order.truncate(params.max_segments.max(2));
    if order.len() < 4 {
        return Err(Error::InsufficientStructure(format!("{} segments, need at least 4", order.len())));
    }
    let segs: Vec<LineSegment2> = order.iter().map(|&i| segments[i]).collect();
    let norm = Normalized::new(&segs);
    let cos_tol = params.consistency_deg.to_radians().cos();
    let merge_cos = params.merge_deg.to_radians().cos();

    let mut remaining: Vec<usize> = (0..segs.len()).collect();
    let mut found: Vec<(Vec3, Vec<usize>)> = Vec::new();
    let mut rounds = 0;
    while found.len() < params.max_points && remaining.len() >= params.min_support.max(2) && rounds < 4 * params.max_points {
        rounds += 1;
        let rem = &remaining;
        let per_i: Vec<Option<(f64, usize, usize)>> = par::map_range(rem.len(), |a| {
            let i = rem[a];
            let mut best: Option<(f64, usize, usize)> = None;
            for &j in &rem[a + 1..] {
                let h = norm.lines[i].cross(&norm.lines[j]);
                if h.norm() < 1e-12 {
                    continue;
                }
                let support: f64 = rem.iter().filter(|&&k| norm.consistent(k, &h, cos_tol)).map(|&k| norm.lengths[k]).sum();
                if best.is_none_or(|b| support > b.0) {
                    best = Some((support, i, j));
                }
            }
            best
        });
        let Some((_, i, j)) = per_i.into_iter().flatten().reduce(|a, b| if b.0 > a.0 { b } else { a }) else {
            break;
        };
        let h0 = norm.lines[i].cross(&norm.lines[j]);
        let members: Vec<usize> = remaining.iter().copied().filter(|&k| norm.consistent(k, &h0, cos_tol)).collect();
        if members.len() < params.min_support {
            break;
        }
        let h = norm.refit(&members).unwrap_or_else(|| h0.normalize());
        remaining.retain(|k| !members.contains(k));
        if let Some(prev) = found.iter_mut().find(|(p, _)| close_bearings(p, &h, merge_cos)) {
            prev.1.extend(members);
            prev.1.sort_unstable();
            prev.0 = norm.refit(&prev.1).unwrap_or(prev.0);
        } else {
            found.push((h, members));
        }
    }

    let mut out: Vec<VanishingPoint> = found
        .into_iter()
        .filter(|(_, m)| m.len() >= params.min_support)
        .map(|(h, m)| VanishingPoint {
            homogeneous: norm.to_pixel_frame(&h),
            weight: m.iter().map(|&k| norm.lengths[k]).sum(),
            segments: m.iter().map(|&k| order[k]).collect(),
        })
        .collect();
    out.sort_by(|a, b| b.weight.total_cmp(&a.weight));
    if out.len() < 2 {
        return Err(Error::InsufficientStructure(format!(
            "found {} vanishing point(s), need at least 2",
            out.len()
        )));
    }
    Ok(out)
}

/// Focal length from vanishing points of mutually orthogonal directions.
///
/// Each pair gives `f² = -(v_i - p)·(v_j - p)`; pairs with a non-negative
/// product are inconsistent with orthogonality and skipped. With three
/// points the median of the valid pairwise estimates is returned.
pub fn estimate_focal(vps: &[Pixel], principal: Pixel) -> Result<f64> {
    if vps.len() < 2 {
        return Err(Error::InvalidInput(format!("need 2 vanishing points, got {}", vps.len())));
    }
    if vps.iter().any(|v| !v.is_finite()) || !principal.is_finite() {
        return Err(Error::InvalidInput("vanishing points must be finite".into()));
    }
    let vps = &vps[..vps.len().min(3)];
    let mut estimates = Vec::new();
    for i in 0..vps.len() {
        for j in i + 1..vps.len() {
            let dot = (vps[i] - principal).dot(&(vps[j] - principal));
            if dot < 0.0 {
                estimates.push((-dot).sqrt());
            }
        }
    }
    if estimates.is_empty() {
        return Err(Error::InconsistentGeometry(
            "no pair of vanishing points lies on opposite sides of the principal point".into(),
        ));
    }
    estimates.sort_by(f64::total_cmp);
    let m = estimates.len();
    Ok(if m % 2 == 1 { estimates[m / 2] } else { (estimates[m / 2 - 1] + estimates[m / 2]) / 2.0 })
}
