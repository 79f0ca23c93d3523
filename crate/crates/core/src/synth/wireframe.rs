use nalgebra::Rotation3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::{Pixel, Vec3};
use crate::imaging::{LineSegment2, RasterImage};

/// A subdivided unit cube seen by a rotated pinhole camera: three families
/// of mutually orthogonal lines for vanishing-point tests.
#[derive(Debug, Clone, PartialEq)]
pub struct WireframeSpec {
    pub width: usize,
    pub height: usize,
    pub f: f64,
    pub yaw_deg: f64,
    pub pitch_deg: f64,
    pub roll_deg: f64,
    /// Lattice cells per cube edge.
    pub divisions: usize,
    /// Apparent cube size in pixels; the camera distance follows from `f`.
    pub apparent_size: f64,
    /// Uniform endpoint noise amplitude, pixels.
    pub jitter_px: f64,
    pub min_length: f64,
    pub seed: u64,
}

impl WireframeSpec {
    /// Seeded orientation (yaw 25–60° either way, pitch 15–35°, small roll).
    pub fn new(f: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let yaw = rng.random_range(25.0..60.0) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        let pitch = rng.random_range(15.0..35.0);
        let roll = rng.random_range(-5.0..5.0);
        Self {
            width: 1920,
            height: 1080,
            f,
            yaw_deg: yaw,
            pitch_deg: pitch,
            roll_deg: roll,
            divisions: 4,
            apparent_size: 300.0,
            jitter_px: 0.5,
            min_length: 40.0,
            seed,
        }
    }

    pub fn principal(&self) -> Pixel {
        Pixel::new(self.width as f64 / 2.0, self.height as f64 / 2.0)
    }

    fn rotation(&self) -> Rotation3<f64> {
        Rotation3::from_euler_angles(
            self.pitch_deg.to_radians(),
            self.yaw_deg.to_radians(),
            self.roll_deg.to_radians(),
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Wireframe {
    pub segments: Vec<LineSegment2>,
    /// True vanishing points of the three cube axes (`None` at infinity).
    pub vanishing_points: [Option<Pixel>; 3],
}

fn clip(a: Pixel, b: Pixel, w: f64, h: f64) -> Option<(Pixel, Pixel)> {
    // Liang–Barsky against [0, w-1] × [0, h-1].
    let (dx, dy) = (b.u - a.u, b.v - a.v);
    let (mut t0, mut t1) = (0.0f64, 1.0f64);
    for (p, q) in [(-dx, a.u), (dx, w - 1.0 - a.u), (-dy, a.v), (dy, h - 1.0 - a.v)] {
        if p == 0.0 {
            if q < 0.0 {
                return None;
            }
        } else {
            let r = q / p;
            if p < 0.0 {
                t0 = t0.max(r);
            } else {
                t1 = t1.min(r);
            }
        }
    }
    (t0 < t1).then(|| (Pixel::new(a.u + t0 * dx, a.v + t0 * dy), Pixel::new(a.u + t1 * dx, a.v + t1 * dy)))
}

pub fn wireframe_segments(spec: &WireframeSpec) -> Result<Wireframe> {
    if !(spec.f > 0.0 && spec.apparent_size > 0.0) || spec.divisions == 0 || spec.width == 0 || spec.height == 0 {
        return Err(Error::InvalidSpec("wireframe needs positive f, size and divisions".into()));
    }
    let r = spec.rotation();
    let distance = spec.f / spec.apparent_size;
    if distance <= 3f64.sqrt() / 2.0 + 0.05 {
        return Err(Error::InvalidSpec("camera would sit inside the cube".into()));
    }
    let p0 = spec.principal();
    let project = |x: &Vec3| {
        let c = r * x + Vec3::new(0.0, 0.0, distance);
        Pixel::new(p0.u + spec.f * c.x / c.z, p0.v + spec.f * c.y / c.z)
    };
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed ^ 0x5EED);
    let n = spec.divisions;
    let coord = |i: usize| -0.5 + i as f64 / n as f64;
    let mut segments = Vec::new();
    for axis in 0..3 {
        for j in 0..=n {
            for k in 0..=n {
                let mut a = Vec3::zeros();
                let (o1, o2) = ((axis + 1) % 3, (axis + 2) % 3);
                a[o1] = coord(j);
                a[o2] = coord(k);
                let mut b = a;
                a[axis] = -0.5;
                b[axis] = 0.5;
                let Some((pa, pb)) = clip(project(&a), project(&b), spec.width as f64, spec.height as f64) else {
                    continue;
                };
                let mut jit = |p: Pixel| {
                    Pixel::new(
                        p.u + rng.random_range(-1.0..=1.0) * spec.jitter_px,
                        p.v + rng.random_range(-1.0..=1.0) * spec.jitter_px,
                    )
                };
                let (pa, pb) = (jit(pa), jit(pb));
                if pa.distance(pb) >= spec.min_length {
                    segments.extend(LineSegment2::new(pa, pb));
                }
            }
        }
    }
    let vanishing_points = [0, 1, 2].map(|axis| {
        let d = r.matrix().column(axis).into_owned();
        (d.z.abs() > 1e-12).then(|| Pixel::new(p0.u + spec.f * d.x / d.z, p0.v + spec.f * d.y / d.z))
    });
    Ok(Wireframe { segments, vanishing_points })
}

/// Dark one-pixel lines on a light background.
pub fn render_wireframe(spec: &WireframeSpec) -> Result<RasterImage> {
    let wf = wireframe_segments(&WireframeSpec { jitter_px: 0.0, ..spec.clone() })?;
    let mut img = RasterImage::filled(spec.width, spec.height, &[235])?;
    for s in &wf.segments {
        let steps = (s.length() * 4.0).ceil() as usize;
        for i in 0..=steps {
            let t = i as f64 / steps as f64;
            let (u, v) = (s.p0.u + (s.p1.u - s.p0.u) * t, s.p0.v + (s.p1.v - s.p0.v) * t);
            let (x, y) = (u.round() as usize, v.round() as usize);
            if x < spec.width && y < spec.height {
                img.pixel_mut(x, y)[0] = 20;
            }
        }
    }
    Ok(img)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reconstruction::estimate_focal;

    #[test]
    fn true_vanishing_points_give_the_focal_length() {
        for (f, seed) in [(400.0, 0), (800.0, 1), (1600.0, 2)] {
            let spec = WireframeSpec::new(f, seed);
            let wf = wireframe_segments(&spec).unwrap();
            let vps: Vec<Pixel> = wf.vanishing_points.iter().flatten().copied().collect();
            assert_eq!(vps.len(), 3);
            let est = estimate_focal(&vps, spec.principal()).unwrap();
            assert!((est - f).abs() < 1e-6 * f, "{est} vs {f}");
        }
    }

    #[test]
    fn noise_free_segments_pass_through_their_vanishing_point() {
        let spec = WireframeSpec { jitter_px: 0.0, ..WireframeSpec::new(800.0, 5) };
        let wf = wireframe_segments(&spec).unwrap();
        assert!(wf.segments.len() >= 20);
        for s in &wf.segments {
            let l = s.homogeneous();
            let best = wf
                .vanishing_points
                .iter()
                .flatten()
                .map(|v| (l.x * v.u + l.y * v.v + l.z).abs() / v.to_vec().norm().max(1.0))
                .fold(f64::INFINITY, f64::min);
            assert!(best < 1e-9, "{best}");
        }
    }

    #[test]
    fn camera_inside_the_cube_is_rejected() {
        let spec = WireframeSpec { apparent_size: 5000.0, ..WireframeSpec::new(400.0, 0) };
        assert!(matches!(wireframe_segments(&spec), Err(Error::InvalidSpec(_))));
    }

    #[test]
    fn render_draws_dark_lines() {
        let spec = WireframeSpec { width: 640, height: 360, apparent_size: 120.0, ..WireframeSpec::new(400.0, 0) };
        let img = render_wireframe(&spec).unwrap();
        let dark = img.data().iter().filter(|&&v| v == 20).count();
        assert!(dark > 500);
    }
}
