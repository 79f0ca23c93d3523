use std::ops::Range;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::texture::{fbm, hashed_normal, lattice, value_noise, value_noise3};
use crate::error::{Error, Result};
use crate::geometry::{CameraIntrinsics, Homography, Pixel, PlaneEq, Vec2, Vec3};
use crate::imaging::RasterImage;
use crate::mask::BinaryMask;
use crate::par;
use crate::reconstruction::DepthMap;

/// Rectangular crowd surface in camera coordinates (`x` right, `y` down,
/// `z` forward): `origin + a·along + b·up` for `|a| ≤ half_width`,
/// `0 ≤ b ≤ height`. The `b = 0` edge is the boundary with the field.
///
/// With a positive `tier_width` the top edge is split into sections of that
/// width whose tops are lowered by 0, 12 or 24% of `height`, as the tiers of
/// real stands are; the field boundary stays the one long straight edge.
#[derive(Debug, Clone, PartialEq)]
pub struct CrowdQuad {
    pub origin: Vec3,
    pub along: Vec3,
    pub up: Vec3,
    pub half_width: f64,
    pub height: f64,
    pub tier_width: f64,
}

impl CrowdQuad {
    pub fn normal(&self) -> Vec3 {
        self.along.cross(&self.up).normalize()
    }

    pub fn plane(&self) -> Result<PlaneEq> {
        PlaneEq::from_point_normal(&self.origin, self.normal())
    }

    /// Height of the stands at along-coordinate `a`.
    pub fn top_at(&self, a: f64, seed: u64) -> f64 {
        if self.tier_width > 0.0 {
            let section = (a / self.tier_width).floor() as i64;
            let drop = (lattice(seed ^ 0x7131, section, 0) * 3.0).floor().min(2.0);
            self.height * (1.0 - 0.12 * drop)
        } else {
            self.height
        }
    }

    /// Bottom-left, bottom-right, top-right, top-left of the full-height
    /// quad.
    pub fn corners(&self) -> [Vec3; 4] {
        let (a, b) = (self.along * self.half_width, self.up * self.height);
        [self.origin - a, self.origin + a, self.origin + a + b, self.origin - a + b]
    }
}

/// Per-frame camera motion, expressed as an image-plane offset of the
/// principal point (a pan that induces a pure translation of every plane).
#[derive(Debug, Clone, PartialEq)]
pub enum Motion {
    Static,
    /// Constant offset per frame.
    Pan(Vec2),
    /// Explicit offset for every frame.
    Offsets(Vec<Vec2>),
}

impl Motion {
    pub fn offset(&self, frame: usize) -> Result<Vec2> {
        match self {
            Motion::Static => Ok(Vec2::zeros()),
            Motion::Pan(v) => Ok(v * frame as f64),
            Motion::Offsets(o) => o
                .get(frame)
                .copied()
                .ok_or_else(|| Error::InvalidSpec(format!("motion script has no entry for frame {frame}"))),
        }
    }
}

/// Flat colours and value-noise ranges used by the renderer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Palette {
    pub crowd_lo: [u8; 3],
    pub crowd_hi: [u8; 3],
    pub grid: [u8; 3],
    pub ground_a: [u8; 3],
    pub ground_b: [u8; 3],
    pub sky: [u8; 3],
}

impl Palette {
    pub const STADIUM: Palette = Palette {
        crowd_lo: [30, 25, 35],
        crowd_hi: [235, 210, 190],
        grid: [15, 15, 20],
        ground_a: [40, 125, 45],
        ground_b: [55, 150, 60],
        sky: [150, 175, 205],
    };

    /// A visibly different venue, used for the far side of a cut.
    pub const ARENA: Palette = Palette {
        crowd_lo: [10, 20, 90],
        crowd_hi: [60, 90, 200],
        grid: [240, 240, 250],
        ground_a: [190, 140, 80],
        ground_b: [205, 155, 95],
        sky: [20, 20, 25],
    };
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneSpec {
    pub width: usize,
    pub height: usize,
    /// True focal length in pixels; the principal point is the image centre.
    pub f: f64,
    /// Relative depth written to depth maps is camera `z` divided by this.
    pub scale: f64,
    pub crowd: CrowdQuad,
    /// Ground plane `y = ground_y` (below the camera when positive).
    pub ground_y: Option<f64>,
    pub texture_seed: u64,
    /// Noise cell and grid spacing on the crowd, in world units.
    pub texture_cell: f64,
    pub grid_spacing: f64,
    pub palette: Palette,
    pub motion: Motion,
    /// Frames rendered from `alternate` instead of this spec.
    pub cuts: Vec<Range<usize>>,
    pub alternate: Option<Box<SceneSpec>>,
    /// Relative standard deviation of multiplicative depth noise.
    pub depth_noise: f64,
    /// Probability of clearing a crowd pixel in the mask.
    pub mask_dropout: f64,
    /// Colour samples per pixel along each axis.
    pub supersample: usize,
}

impl Default for SceneSpec {
    fn default() -> Self {
        Self::stadium(4.0, 35.0, 2.0e6, 0.4e6, 0)
    }
}

impl SceneSpec {
    /// Crowd stands rising at `rise_deg` from a field boundary `distance`
    /// ahead and `camera_height` below the camera, turned by `yaw_deg`.
    ///
    /// The stands are as wide as they are distant, so the field boundary
    /// spans the whole frame, and their top edge sits near a quarter of the
    /// focal length above the principal point (for a level, unshifted view).
    pub fn stadium(yaw_deg: f64, rise_deg: f64, distance: f64, camera_height: f64, seed: u64) -> Self {
        let (yaw, rise) = (yaw_deg.to_radians(), rise_deg.to_radians());
        let along = Vec3::new(yaw.cos(), 0.0, yaw.sin());
        let away = Vec3::new(-yaw.sin(), 0.0, yaw.cos());
        let up = away * rise.cos() - Vec3::y() * rise.sin();
        Self {
            width: 640,
            height: 360,
            f: 500.0,
            scale: 1.0e6,
            crowd: CrowdQuad {
                origin: Vec3::new(0.0, camera_height, distance),
                along,
                up,
                half_width: distance,
                height: (camera_height + 0.25 * distance) / (rise.sin() - 0.25 * rise.cos()),
                tier_width: 0.15 * distance,
            },
            ground_y: Some(camera_height),
            texture_seed: seed,
            texture_cell: 0.02 * distance,
            grid_spacing: 0.075 * distance,
            palette: Palette::STADIUM,
            motion: Motion::Static,
            cuts: Vec::new(),
            alternate: None,
            depth_noise: 0.0,
            mask_dropout: 0.0,
            supersample: 2,
        }
    }

    /// Seeded variation of the default stadium (yaw within ±8°, rise
    /// 30–45°, boundary 15–27% of the distance below the camera).
    pub fn random_stadium(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let yaw = rng.random_range(-8.0..8.0);
        let rise = rng.random_range(30.0..45.0);
        let distance = rng.random_range(1.6e6..2.6e6);
        let height = distance * rng.random_range(0.15..0.27);
        Self::stadium(yaw, rise, distance, height, seed)
    }

    /// A crowd plane facing the camera at depth `z`, filling the frame.
    pub fn fronto_parallel(z: f64) -> Self {
        let mut s = Self::stadium(0.0, 90.0, z, z, 0);
        s.crowd = CrowdQuad {
            origin: Vec3::new(0.0, 2.0 * z, z),
            along: Vec3::x(),
            up: -Vec3::y(),
            half_width: 4.0 * z,
            height: 4.0 * z,
            tier_width: 0.0,
        };
        s.ground_y = None;
        s
    }

    /// The same venue geometry seen through a different camera and décor;
    /// suitable as the far side of a cut.
    pub fn alternate_view(&self) -> SceneSpec {
        let mut alt = SceneSpec::stadium(-12.0, 40.0, 1.3 * self.crowd.origin.z, 0.8 * self.crowd.origin.y, self.texture_seed + 1000);
        alt.width = self.width;
        alt.height = self.height;
        alt.f = self.f;
        alt.scale = self.scale;
        alt.palette = Palette::ARENA;
        alt
    }

    /// Intrinsics the pipeline would use for this spec.
    pub fn intrinsics(&self) -> CameraIntrinsics {
        CameraIntrinsics { f: self.f, cx: self.width as f64 / 2.0, cy: self.height as f64 / 2.0, s: self.scale }
    }

    fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::InvalidSpec("image size must be positive".into()));
        }
        if !(self.f > 0.0 && self.scale > 0.0 && self.texture_cell > 0.0 && self.grid_spacing > 0.0) {
            return Err(Error::InvalidSpec("focal length, scale and texture sizes must be positive".into()));
        }
        if self.supersample == 0 {
            return Err(Error::InvalidSpec("supersample must be at least 1".into()));
        }
        let c = &self.crowd;
        if c.along.cross(&c.up).norm() < 1e-12 || !(c.half_width > 0.0 && c.height > 0.0) {
            return Err(Error::InvalidSpec("crowd quad is degenerate".into()));
        }
        let plane = c.plane()?;
        if plane.d.abs() <= 1e-9 * c.origin.norm().max(1.0) {
            return Err(Error::InvalidSpec("camera lies in the crowd plane".into()));
        }
        if let Some(g) = self.ground_y {
            if g.abs() <= 1e-9 * c.origin.norm().max(1.0) {
                return Err(Error::InvalidSpec("camera lies in the ground plane".into()));
            }
        }
        if !(0.0..=1.0).contains(&self.mask_dropout) || !(self.depth_noise >= 0.0) {
            return Err(Error::InvalidSpec("noise knobs out of range".into()));
        }
        if !self.cuts.is_empty() && self.alternate.is_none() {
            return Err(Error::InvalidSpec("cut script without an alternate spec".into()));
        }
        Ok(())
    }

    fn is_cut(&self, frame: usize) -> bool {
        self.cuts.iter().any(|r| r.contains(&frame))
    }
}

enum Hit {
    Crowd { z: f64, a: f64, b: f64 },
    Ground { z: f64, x: f64 },
    Sky,
}

struct Renderer<'a> {
    spec: &'a SceneSpec,
    normal: Vec3,
    plane_d: f64,
    offset: Vec2,
}

impl<'a> Renderer<'a> {
    fn new(spec: &'a SceneSpec, offset: Vec2) -> Result<Self> {
        let plane = spec.crowd.plane()?;
        Ok(Self { spec, normal: plane.n, plane_d: plane.d, offset })
    }

    fn ray(&self, u: f64, v: f64) -> Vec3 {
        let s = self.spec;
        let cx = s.width as f64 / 2.0 + self.offset.x;
        let cy = s.height as f64 / 2.0 + self.offset.y;
        Vec3::new((u - cx) / s.f, (v - cy) / s.f, 1.0)
    }

    fn hit(&self, r: &Vec3) -> Hit {
        let c = &self.spec.crowd;
        let mut best = Hit::Sky;
        let mut best_t = f64::INFINITY;
        let denom = self.normal.dot(r);
        if denom.abs() > 1e-15 {
            let t = -self.plane_d / denom;
            if t > 0.0 {
                let rel = r * t - c.origin;
                let (a, b) = (rel.dot(&c.along), rel.dot(&c.up));
                if a.abs() <= c.half_width && b >= 0.0 && b <= c.top_at(a, self.spec.texture_seed) {
                    best = Hit::Crowd { z: t, a, b };
                    best_t = t;
                }
            }
        }
        if let Some(g) = self.spec.ground_y {
            if r.y * g > 0.0 {
                let t = g / r.y;
                if t < best_t {
                    best = Hit::Ground { z: t, x: r.x * t };
                }
            }
        }
        best
    }

    fn shade(&self, hit: &Hit) -> [f64; 3] {
        let s = self.spec;
        let p = &s.palette;
        let mix = |lo: [u8; 3], hi: [u8; 3], t: [f64; 3]| {
            [0, 1, 2].map(|i| lo[i] as f64 + (hi[i] as f64 - lo[i] as f64) * t[i])
        };
        match *hit {
            Hit::Crowd { a, b, .. } => {
                let (x, y) = (a / s.texture_cell, b / s.texture_cell);
                let line_w = 0.08;
                let (ga, gb) = ((a / s.grid_spacing).rem_euclid(1.0), (b / s.grid_spacing).rem_euclid(1.0));
                if ga < line_w || gb < line_w {
                    return p.grid.map(|c| c as f64);
                }
                let seed = s.texture_seed.wrapping_mul(31);
                let t = value_noise3(seed, x, y);
                let lum = value_noise(seed + 30, x * 0.5, y * 0.5);
                mix(p.crowd_lo, p.crowd_hi, t.map(|v| (0.35 * v + 0.65 * lum).clamp(0.0, 1.0)))
            }
            Hit::Ground { z, x } => {
                let stripe = ((z / (0.15 * s.crowd.origin.z.abs().max(1.0))).floor() as i64).rem_euclid(2);
                let base = if stripe == 0 { p.ground_a } else { p.ground_b };
                let n = fbm(s.texture_seed.wrapping_mul(31) + 40, x / s.texture_cell, z / s.texture_cell) - 0.5;
                base.map(|c| c as f64 + 30.0 * n)
            }
            Hit::Sky => p.sky.map(|c| c as f64),
        }
    }
}

/// Everything rendered for one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameBundle {
    pub frame: RasterImage,
    pub mask: BinaryMask,
    pub depth: DepthMap,
    pub truth: FrameTruth,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameTruth {
    /// 0 for the main spec, 1 for the alternate side of a cut.
    pub shot: usize,
    pub offset: Vec2,
    pub plane_camera: PlaneEq,
    /// Crowd plane in the back-projection frame of [`SceneSpec::intrinsics`]
    /// (exact when `offset` is zero).
    pub plane_world: PlaneEq,
    /// Two image points on the projected field boundary.
    pub boundary: Option<[Pixel; 2]>,
    /// Projected crowd quad corners that land inside the frame.
    pub quad_corners: [Option<Pixel>; 4],
}

impl FrameTruth {
    pub fn boundary_angle_deg(&self) -> Option<f64> {
        self.boundary.map(|[a, b]| (b.v - a.v).atan2(b.u - a.u).to_degrees().rem_euclid(180.0))
    }
}

fn project_cam(spec: &SceneSpec, offset: Vec2, p: &Vec3) -> Option<Pixel> {
    (p.z > 0.0).then(|| {
        Pixel::new(
            spec.width as f64 / 2.0 + offset.x + spec.f * p.x / p.z,
            spec.height as f64 / 2.0 + offset.y + spec.f * p.y / p.z,
        )
    })
}

fn truth_for(spec: &SceneSpec, shot: usize, offset: Vec2) -> Result<FrameTruth> {
    let plane_camera = spec.crowd.plane()?;
    let k = spec.intrinsics();
    let plane_world = PlaneEq { n: plane_camera.n, d: plane_camera.d - plane_camera.n.dot(&k.center()) };
    let c = &spec.crowd;
    let boundary = spec.ground_y.and_then(|_| {
        let reach = 0.25 * c.origin.z.abs();
        let a = project_cam(spec, offset, &(c.origin - c.along * reach))?;
        let b = project_cam(spec, offset, &(c.origin + c.along * reach))?;
        Some([a, b])
    });
    let (w, h) = (spec.width as f64, spec.height as f64);
    let quad_corners = c.corners().map(|q| {
        project_cam(spec, offset, &q).filter(|p| p.u >= 0.0 && p.v >= 0.0 && p.u < w && p.v < h)
    });
    Ok(FrameTruth { shot, offset, plane_camera, plane_world, boundary, quad_corners })
}

/// Analytic ray casting of one frame.
pub fn render_scene(spec: &SceneSpec, frame_index: usize) -> Result<FrameBundle> {
    spec.validate()?;
    let (active, shot) = if spec.is_cut(frame_index) {
        (spec.alternate.as_deref().expect("validated"), 1)
    } else {
        (spec, 0)
    };
    if shot == 1 {
        active.validate()?;
        if active.width != spec.width || active.height != spec.height {
            return Err(Error::InvalidSpec("alternate spec must share the image size".into()));
        }
    }
    let offset = active.motion.offset(frame_index)?;
    let r = Renderer::new(active, offset)?;
    let (w, h) = (active.width, active.height);
    let ss = active.supersample;

    let mut rgb = vec![0u8; w * h * 3];
    par::rows_mut(&mut rgb, w * 3, |y, row| {
        for x in 0..w {
            let mut acc = [0.0f64; 3];
            for sy in 0..ss {
                for sx in 0..ss {
                    let u = x as f64 + (sx as f64 + 0.5) / ss as f64 - 0.5;
                    let v = y as f64 + (sy as f64 + 0.5) / ss as f64 - 0.5;
                    let c = r.shade(&r.hit(&r.ray(u, v)));
                    for i in 0..3 {
                        acc[i] += c[i];
                    }
                }
            }
            for i in 0..3 {
                row[x * 3 + i] = (acc[i] / (ss * ss) as f64).round().clamp(0.0, 255.0) as u8;
            }
        }
    });

    let seed = active.texture_seed ^ 0xD1B5_4A32_D192_ED03;
    let mut cells = vec![(false, 0.0f32); w * h];
    par::rows_mut(&mut cells, w, |y, row| {
        for (x, cell) in row.iter_mut().enumerate() {
            let (crowd, z) = match r.hit(&r.ray(x as f64, y as f64)) {
                Hit::Crowd { z, .. } => (true, z),
                Hit::Ground { z, .. } => (false, z),
                Hit::Sky => (false, 0.0),
            };
            let key_y = (y + frame_index * h) as i64;
            let mut md = z / active.scale;
            if active.depth_noise > 0.0 && md > 0.0 {
                md *= (1.0 + active.depth_noise * hashed_normal(seed, x as i64, key_y)).max(0.0);
            }
            let dropped = crowd && active.mask_dropout > 0.0 && lattice(seed + 1, x as i64, key_y) < active.mask_dropout;
            *cell = (crowd && !dropped, md as f32);
        }
    });
    let mask = BinaryMask::from_bits(w, h, cells.iter().map(|c| c.0).collect()).expect("sized");
    let depth = DepthMap::new(w, h, cells.iter().map(|c| c.1).collect())?;
    let frame = RasterImage::from_raw(w, h, 3, rgb)?;
    Ok(FrameBundle { frame, mask, depth, truth: truth_for(active, shot, offset)? })
}

/// Ground truth for a rendered sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceTruth {
    pub offsets: Vec<Vec2>,
    pub shots: Vec<usize>,
}

impl SequenceTruth {
    /// Crowd-plane homography from frame `k` to `k + 1`; `None` across a
    /// cut.
    pub fn homography(&self, k: usize) -> Option<Homography> {
        let next = k + 1;
        (next < self.offsets.len() && self.shots[k] == self.shots[next]).then(|| {
            let d = self.offsets[next] - self.offsets[k];
            Homography::translation(d.x, d.y)
        })
    }

    /// Where a crowd point seen at `p` in frame `from` appears in frame
    /// `to`; `None` when the two frames belong to different shots.
    pub fn transfer(&self, p: Pixel, from: usize, to: usize) -> Option<Pixel> {
        (self.shots.get(from)? == self.shots.get(to)?).then(|| p + (self.offsets[to] - self.offsets[from]))
    }

    pub fn trajectory(&self, p: Pixel, from: usize) -> Vec<Option<Pixel>> {
        (0..self.offsets.len()).map(|to| self.transfer(p, from, to)).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sequence {
    pub frames: Vec<FrameBundle>,
    pub truth: SequenceTruth,
}

pub fn render_sequence(spec: &SceneSpec, n_frames: usize) -> Result<Sequence> {
    if let Motion::Offsets(o) = &spec.motion {
        if o.len() < n_frames {
            return Err(Error::InvalidSpec(format!("motion script covers {} of {n_frames} frames", o.len())));
        }
    }
    let frames = par::map_range(n_frames, |k| render_scene(spec, k)).into_iter().collect::<Result<Vec<_>>>()?;
    let truth = SequenceTruth {
        offsets: frames.iter().map(|f| f.truth.offset).collect(),
        shots: frames.iter().map(|f| f.truth.shot).collect(),
    };
    Ok(Sequence { frames, truth })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imaging::{CannyParams, HoughParams};
    use crate::mask::largest_component;
    use crate::placement::alignment_line;
    use crate::reconstruction::{depth_to_cloud, ransac_plane, RansacParams};

    fn small(mut s: SceneSpec) -> SceneSpec {
        s.supersample = 1;
        s
    }

    #[test]
    fn fronto_parallel_depth_is_constant() {
        let mut spec = small(SceneSpec::fronto_parallel(10.0));
        spec.scale = 1.0;
        let b = render_scene(&spec, 0).unwrap();
        assert_eq!(b.mask.count(), spec.width * spec.height);
        assert!(b.depth.values().iter().all(|&d| d == 10.0));
        let n = b.truth.plane_camera.n;
        assert!((n.z.abs() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tilted_plane_cloud_is_planar() {
        let spec = small(SceneSpec::default());
        let b = render_scene(&spec, 0).unwrap();
        let cloud = depth_to_cloud(&b.depth, &spec.intrinsics(), &b.mask, 4).unwrap();
        // Depths are stored as f32: about 1e-7 relative, i.e. a fraction of a
        // world unit at this scale.
        let fit = ransac_plane(&cloud, &RansacParams { tolerance: 5.0, ..RansacParams::default() }).unwrap();
        assert_eq!(fit.inlier_ratio, 1.0);
        let truth = b.truth.plane_world;
        assert!(fit.plane.n.dot(&truth.n).abs() > 1.0 - 1e-9);
        for p in cloud.points.iter().step_by(97) {
            assert!(truth.signed_distance(p).abs() < 2.0, "{}", truth.signed_distance(p));
        }
    }

    #[test]
    fn boundary_matches_detected_alignment_line() {
        for seed in [0, 3, 7] {
            let spec = small(SceneSpec::random_stadium(seed));
            let b = render_scene(&spec, 0).unwrap();
            let line = alignment_line(
                &largest_component(&b.mask).unwrap(),
                &CannyParams::default(),
                &HoughParams::default(),
            )
            .unwrap();
            let truth = b.truth.boundary_angle_deg().unwrap();
            let d = (line.angle_deg() - truth).rem_euclid(180.0);
            assert!(d.min(180.0 - d) < 1.0, "seed {seed}: {} vs {truth}", line.angle_deg());
        }
    }

    #[test]
    fn static_motion_repeats_frames() {
        let spec = small(SceneSpec::default());
        let a = render_scene(&spec, 0).unwrap();
        let b = render_scene(&spec, 7).unwrap();
        assert_eq!(a.frame, b.frame);
        assert_eq!(a.mask, b.mask);
        assert_eq!(a.depth, b.depth);
    }

    #[test]
    fn pan_is_an_image_translation() {
        let mut spec = small(SceneSpec::default());
        spec.motion = Motion::Pan(Vec2::new(2.0, 1.0));
        let seq = render_sequence(&spec, 3).unwrap();
        let h = seq.truth.homography(1).unwrap();
        let p = h.apply(Pixel::new(10.0, 20.0)).unwrap();
        assert!((p.u - 12.0).abs() < 1e-12 && (p.v - 21.0).abs() < 1e-12);
        let (f0, f1) = (&seq.frames[0], &seq.frames[1]);
        let (w, hgt) = (spec.width, spec.height);
        let mut same = 0;
        let mut total = 0;
        for y in 0..hgt - 1 {
            for x in 0..w - 2 {
                total += 1;
                same += usize::from(f0.mask.get(x, y) == f1.mask.get(x + 2, y + 1));
            }
        }
        assert!(same as f64 >= 0.999 * total as f64);
        assert_eq!(seq.truth.transfer(Pixel::new(0.0, 0.0), 0, 2), Some(Pixel::new(4.0, 2.0)));
    }

    #[test]
    fn cut_frames_render_the_alternate_view() {
        let mut spec = small(SceneSpec::default());
        let alt = small(spec.alternate_view());
        spec.alternate = Some(Box::new(alt.clone()));
        spec.cuts = vec![2..4];
        let seq = render_sequence(&spec, 5).unwrap();
        assert_eq!(seq.truth.shots, vec![0, 0, 1, 1, 0]);
        assert_eq!(seq.frames[2].frame, render_scene(&alt, 2).unwrap().frame);
        assert_ne!(seq.frames[1].frame, seq.frames[2].frame);
        assert!(seq.truth.homography(1).is_none());
        assert!(seq.truth.transfer(Pixel::new(1.0, 1.0), 1, 2).is_none());
    }

    #[test]
    fn invalid_specs_are_rejected() {
        let mut spec = SceneSpec::default();
        spec.crowd.origin = Vec3::zeros();
        assert!(matches!(render_scene(&spec, 0), Err(Error::InvalidSpec(_))));
        let mut spec = SceneSpec::default();
        spec.cuts = vec![0..1];
        assert!(matches!(render_scene(&spec, 0), Err(Error::InvalidSpec(_))));
        let mut spec = SceneSpec::default();
        spec.motion = Motion::Offsets(vec![Vec2::zeros()]);
        assert!(matches!(render_sequence(&spec, 2), Err(Error::InvalidSpec(_))));
    }

    #[test]
    fn rendering_is_deterministic() {
        let mut spec = small(SceneSpec::random_stadium(11));
        spec.depth_noise = 0.01;
        spec.mask_dropout = 0.05;
        assert_eq!(render_scene(&spec, 3).unwrap(), render_scene(&spec, 3).unwrap());
    }
}
