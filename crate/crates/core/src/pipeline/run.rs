use std::path::Path;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::geometry::{CameraIntrinsics, Pixel};
use crate::imaging::{canny_with, hough_segments, to_grayscale, warp_composite, CannyParams, HoughParams, RasterImage};
use crate::mask::{largest_component, select_seed_frame, BinaryMask};
use crate::par;
use crate::placement::{
    alignment_line, alignment_plane, alignment_vector, corners_homography, place_asset, placement_homography,
    Placement, PlacementParams,
};
use crate::reconstruction::{
    depth_to_cloud, estimate_focal, hull_on_plane, ransac_plane, vanishing_points, DepthMap, PlaneFit, PlaneHull, RansacParams,
    VpParams,
};
use crate::tracking::{init_track, track_step, GrayImage, TrackEvent, TrackMode, TrackParams, TrackState};

use super::config::{FocalMode, PipelineConfig};
use super::diagnostics::{fmt_corners, Diagnostics};
use super::io;

/// Pipeline stage named in failures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Input,
    Seed,
    Mask,
    Alignment,
    Focal,
    Reconstruction,
    Placement,
    Tracking,
    Compositing,
    Output,
}

impl Stage {
    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Input => "input",
            Stage::Seed => "seed",
            Stage::Mask => "mask",
            Stage::Alignment => "alignment",
            Stage::Focal => "focal",
            Stage::Reconstruction => "reconstruction",
            Stage::Placement => "placement",
            Stage::Tracking => "tracking",
            Stage::Compositing => "compositing",
            Stage::Output => "output",
        }
    }
}

impl std::fmt::Display for Stage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A failed run: the stage, the cause, and everything recorded so far.
#[derive(Debug)]
pub struct StageError {
    pub stage: Stage,
    pub error: Error,
    pub diagnostics: Diagnostics,
}

impl std::fmt::Display for StageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} stage failed: {}", self.stage, self.error)
    }
}

impl std::error::Error for StageError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.error)
    }
}

type StageResult<T> = std::result::Result<T, (Stage, Error)>;

fn at(stage: Stage) -> impl FnOnce(Error) -> (Stage, Error) {
    move |e| (stage, e)
}

fn timed<T>(diag: &mut Diagnostics, stage: Stage, f: impl FnOnce() -> T) -> T {
    let t = Instant::now();
    let out = f();
    diag.time(stage.as_str(), t.elapsed());
    out
}

/// Focal length and how it was obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FocalEstimate {
    pub f: f64,
    pub method: &'static str,
}

pub fn fallback_focal(width: usize, height: usize) -> f64 {
    1.2 * width.max(height) as f64
}

/// Focal length from the vanishing points of all straight lines in the
/// frame; `None` when the structure is insufficient or inconsistent.
pub fn estimate_focal_from_frame(frame: &RasterImage) -> Option<f64> {
    let gray = to_grayscale(frame).ok()?;
    let edges = canny_with(&gray, &CannyParams::default()).ok()?;
    let hough = HoughParams { min_len: 30.0, ..HoughParams::default() };
    let segments = hough_segments(&edges, &hough);
    let vps = vanishing_points(&segments, &VpParams::default()).ok()?;
    let finite: Vec<Pixel> = vps.iter().filter_map(|v| v.pixel()).collect();
    let principal = Pixel::new(frame.width() as f64 / 2.0, frame.height() as f64 / 2.0);
    let f = estimate_focal(&finite, principal).ok()?;
    // Reject values no real lens produces for this frame size.
    let size = frame.width().max(frame.height()) as f64;
    (f >= 0.2 * size && f <= 20.0 * size).then_some(f)
}

fn focal_for(cfg: &PipelineConfig, frame: &RasterImage) -> FocalEstimate {
    let fallback = || FocalEstimate { f: fallback_focal(frame.width(), frame.height()), method: "fallback" };
    match cfg.focal {
        FocalMode::Fixed(f) => FocalEstimate { f, method: "fixed" },
        FocalMode::Fallback => fallback(),
        FocalMode::Estimate => estimate_focal_from_frame(frame)
            .map(|f| FocalEstimate { f, method: "estimated" })
            .unwrap_or_else(fallback),
    }
}

/// Everything derived from a single seed frame.
#[derive(Debug, Clone)]
pub struct SeedPlacement {
    pub placement: Placement,
    pub focal: FocalEstimate,
    pub fit: PlaneFit,
    pub hull: PlaneHull,
    pub intrinsics: CameraIntrinsics,
}

/// Mask → alignment → focal → reconstruction → placement on one frame.
fn place_on_frame(
    cfg: &PipelineConfig,
    frame: &RasterImage,
    mask: &BinaryMask,
    depth: &DepthMap,
    aspect: f64,
    diag: &mut Diagnostics,
) -> StageResult<SeedPlacement> {
    if mask.width() != frame.width()
        || mask.height() != frame.height()
        || depth.width() != frame.width()
        || depth.height() != frame.height()
    {
        return Err((
            Stage::Input,
            Error::InvalidInput(format!(
                "frame {}x{}, mask {}x{}, depth {}x{} differ",
                frame.width(),
                frame.height(),
                mask.width(),
                mask.height(),
                depth.width(),
                depth.height()
            )),
        ));
    }
    let crowd = timed(diag, Stage::Mask, || largest_component(mask)).ok_or((Stage::Mask, Error::EmptyMask))?;
    diag.record("mask", &[("crowd_px", mask.count().to_string()), ("largest_px", crowd.count().to_string())]);

    let line = timed(diag, Stage::Alignment, || {
        alignment_line(&crowd, &CannyParams::default(), &HoughParams::default())
    })
    .map_err(at(Stage::Alignment))?;
    let s = line.segment;
    diag.record(
        "alignment",
        &[
            ("p0", format!("{},{}", s.p0.u, s.p0.v)),
            ("p1", format!("{},{}", s.p1.u, s.p1.v)),
            ("angle_deg", line.angle_deg().to_string()),
        ],
    );

    let focal = timed(diag, Stage::Focal, || focal_for(cfg, frame));
    diag.record("focal", &[("f", focal.f.to_string()), ("method", focal.method.to_string())]);
    let k = CameraIntrinsics::centered(focal.f, frame.width(), frame.height(), cfg.scale)
        .map_err(at(Stage::Focal))?;

    let (fit, hull) = timed(diag, Stage::Reconstruction, || -> Result<_> {
        let cloud = depth_to_cloud(depth, &k, &crowd, cfg.stride)?;
        let params = RansacParams { tolerance: cfg.ransac_tolerance, iterations: cfg.ransac_iterations, seed: cfg.seed };
        let fit = ransac_plane(&cloud, &params)?;
        let hull = hull_on_plane(&fit, &cloud)?;
        Ok((fit, hull))
    })
    .map_err(at(Stage::Reconstruction))?;
    let n = fit.plane.n;
    diag.record(
        "plane",
        &[
            ("normal", format!("{},{},{}", n.x, n.y, n.z)),
            ("d", fit.plane.d.to_string()),
            ("inliers", fit.inliers.len().to_string()),
            ("ratio", fit.inlier_ratio.to_string()),
            ("rms", fit.rms.to_string()),
            ("hull_vertices", hull.hull2d.len().to_string()),
            ("hull_area", hull.area().to_string()),
        ],
    );

    let placement = timed(diag, Stage::Placement, || -> Result<_> {
        let align = alignment_plane(&line, &k)?;
        let v = alignment_vector(&align, &fit.plane)?;
        let params = PlacementParams { aspect, margin: cfg.margin, ..PlacementParams::default() };
        place_asset(&fit, &hull, v, &params, &k)
    })
    .map_err(at(Stage::Placement))?;
    diag.record(
        "placement",
        &[
            ("corners", fmt_corners(&placement.corners2d)),
            ("width", placement.width.to_string()),
            ("height", placement.height.to_string()),
        ],
    );
    Ok(SeedPlacement { placement, focal, fit, hull, intrinsics: k })
}

fn echo_config(cfg: &PipelineConfig, diag: &mut Diagnostics) {
    let fields: Vec<(&str, String)> =
        super::config::KEYS.iter().map(|(_, k)| (*k, cfg.get(k).unwrap_or_default())).collect();
    diag.record("config", &fields);
}

/// Brings the asset to the frame's channel count.
fn match_channels(asset: &RasterImage, channels: usize) -> Result<RasterImage> {
    match (asset.channels(), channels) {
        (a, b) if a == b => Ok(asset.clone()),
        (_, 1) => to_grayscale(asset),
        (_, 3) => Ok(asset.to_rgb()),
        (a, b) => Err(Error::InvalidInput(format!("cannot convert a {a}-channel asset to {b} channels"))),
    }
}

fn aspect_of(asset: &RasterImage) -> f64 {
    asset.width() as f64 / asset.height() as f64
}

#[derive(Debug, Clone)]
pub struct ImageOutput {
    pub frame: RasterImage,
    pub seed: SeedPlacement,
    pub diagnostics: Diagnostics,
}

/// Places `asset` on the crowd of a single frame.
pub fn run_image(
    cfg: &PipelineConfig,
    frame: &RasterImage,
    mask: &BinaryMask,
    depth: &DepthMap,
    asset: &RasterImage,
) -> std::result::Result<ImageOutput, StageError> {
    let mut diag = Diagnostics::new();
    echo_config(cfg, &mut diag);
    let fail = |stage: Stage, error: Error, mut diagnostics: Diagnostics| {
        diagnostics.record("error", &[("stage", stage.to_string()), ("message", error.to_string())]);
        StageError { stage, error, diagnostics }
    };
    let seed = match place_on_frame(cfg, frame, mask, depth, aspect_of(asset), &mut diag) {
        Ok(s) => s,
        Err((stage, e)) => return Err(fail(stage, e, diag)),
    };
    let out = timed(&mut diag, Stage::Compositing, || -> Result<_> {
        let asset = match_channels(asset, frame.channels())?;
        let h = placement_homography(&seed.placement, asset.width(), asset.height())?;
        warp_composite(&asset, &h, frame)
    });
    match out {
        Ok(frame) => Ok(ImageOutput { frame, seed, diagnostics: diag }),
        Err(e) => Err(fail(Stage::Compositing, e, diag)),
    }
}

/// Crowd mask and depth of a frame, if available.
pub type SeedData = Option<(BinaryMask, DepthMap)>;

/// A clip held in memory, with masks and depths loaded on demand.
pub struct VideoInput<'a> {
    pub frames: Vec<RasterImage>,
    /// Display names for the frame records (file stems when read from disk).
    pub names: Vec<String>,
    /// Cycled by frame index.
    pub assets: Vec<RasterImage>,
    pub seed_data: Box<dyn Fn(usize) -> Result<SeedData> + Sync + 'a>,
}

/// Outcome for one frame of a clip.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameRecord {
    pub index: usize,
    pub event: &'static str,
    /// Quadrilateral composited into the frame, if any.
    pub corners: Option<[Pixel; 4]>,
    /// Seed frame of the tracking segment that produced this record.
    pub seed: Option<usize>,
}

impl FrameRecord {
    pub fn augmented(&self) -> bool {
        self.corners.is_some()
    }
}

#[derive(Debug, Clone)]
pub struct VideoOutput {
    pub frames: Vec<RasterImage>,
    pub records: Vec<FrameRecord>,
    pub diagnostics: Diagnostics,
}

struct VideoRun<'c, 'a> {
    cfg: &'c PipelineConfig,
    input: &'c VideoInput<'a>,
    track: TrackParams,
    aspect: f64,
    records: Vec<Option<FrameRecord>>,
    diag: Diagnostics,
    seeded: bool,
}

impl VideoRun<'_, '_> {
    fn set(&mut self, index: usize, event: &'static str, corners: Option<[Pixel; 4]>, seed: Option<usize>) {
        self.records[index] = Some(FrameRecord { index, event, corners, seed });
    }

    fn corners_if_tracking(state: &TrackState) -> Option<[Pixel; 4]> {
        (state.mode == TrackMode::Tracking).then(|| state.corner_positions())
    }

    /// Seeds, places and tracks over frames `lo..hi`, restarting after the
    /// frame where tracking is lost.
    fn cover(&mut self, lo: usize, hi: usize) -> StageResult<()> {
        if lo >= hi {
            return Ok(());
        }
        let mut rejected: Vec<usize> = Vec::new();
        loop {
            let indices: Vec<usize> =
                (lo..hi).step_by(self.cfg.sample_stride).filter(|i| !rejected.contains(i)).collect();
            let t = Instant::now();
            let input = self.input;
            let loaded: Vec<Result<SeedData>> = par::map(&indices, |&i| (input.seed_data)(i));
            let mut data = Vec::new();
            for (i, d) in indices.iter().zip(loaded) {
                if let Some(d) = d.map_err(at(Stage::Input))? {
                    data.push((*i, d));
                }
            }
            let masks: Vec<(usize, &BinaryMask)> = data.iter().map(|(i, (m, _))| (*i, m)).collect();
            let selection = select_seed_frame(&masks);
            self.diag.time(Stage::Seed.as_str(), t.elapsed());
            let (seed, _, reports) = match selection {
                Ok(s) => s,
                Err(_) => {
                    self.diag.record("seed", &[("range", format!("{lo}..{hi}")), ("selected", "none".into())]);
                    for i in lo..hi {
                        if self.records[i].is_none() {
                            self.set(i, "unseeded", None, None);
                        }
                    }
                    return Ok(());
                }
            };
            for (i, r) in &reports {
                self.diag.record(
                    "sqs",
                    &[
                        ("frame", i.to_string()),
                        ("area", r.a.to_string()),
                        ("s_cp", r.s_cp.to_string()),
                        ("s_cl", r.s_cl.to_string()),
                        ("s_sp", r.s_sp.to_string()),
                        ("sqs", r.sqs.to_string()),
                    ],
                );
            }
            self.diag.record("seed", &[("range", format!("{lo}..{hi}")), ("selected", seed.to_string())]);

            let (mask, depth) = &data.iter().find(|(i, _)| *i == seed).expect("selected seed was scored").1;
            let frame = &self.input.frames[seed];
            let placed = match place_on_frame(self.cfg, frame, mask, depth, self.aspect, &mut self.diag) {
                Ok(p) => p,
                Err((stage, e)) if stage != Stage::Input => {
                    self.diag.record(
                        "rejected",
                        &[("frame", seed.to_string()), ("stage", stage.to_string()), ("message", e.to_string())],
                    );
                    rejected.push(seed);
                    continue;
                }
                Err(err) => return Err(err),
            };
            let corners = placed.placement.corners2d;
            let initial = match init_track(&GrayImage::from_raster(frame), corners, &self.track) {
                Ok(s) => s,
                Err(e) => {
                    self.diag.record(
                        "rejected",
                        &[("frame", seed.to_string()), ("stage", "tracking".into()), ("message", e.to_string())],
                    );
                    rejected.push(seed);
                    continue;
                }
            };
            self.seeded = true;
            self.set(seed, "seed", Some(corners), Some(seed));
            let t = Instant::now();
            let forward = self.follow(initial.clone(), seed, (seed + 1..hi).collect());
            let backward = self.follow(initial, seed, (lo..seed).rev().collect());
            self.diag.time(Stage::Tracking.as_str(), t.elapsed());
            // Restarts run after both passes so that diagnostics stay in
            // segment order.
            if let Some(j) = forward? {
                self.cover(j + 1, hi)?;
            }
            if let Some(j) = backward? {
                self.cover(lo, j)?;
            }
            return Ok(());
        }
    }

    /// Tracks from `seed` through `order`; returns the frame where tracking
    /// was lost, if it was.
    fn follow(&mut self, mut state: TrackState, seed: usize, order: Vec<usize>) -> StageResult<Option<usize>> {
        let mut prev = seed;
        for j in order {
            let frames = &self.input.frames;
            let (next_state, event) =
                track_step(state, &frames[prev], &frames[j], &self.track).map_err(at(Stage::Tracking))?;
            state = next_state;
            if event == TrackEvent::Lost {
                self.set(j, event.as_str(), None, Some(seed));
                return Ok(Some(j));
            }
            self.set(j, event.as_str(), Self::corners_if_tracking(&state), Some(seed));
            prev = j;
        }
        Ok(None)
    }
}

/// Seeds, tracks and composites a whole clip.
pub fn run_video_on(cfg: &PipelineConfig, input: &VideoInput<'_>) -> std::result::Result<VideoOutput, StageError> {
    let mut diag = Diagnostics::new();
    echo_config(cfg, &mut diag);
    let fail = |stage: Stage, error: Error, mut diagnostics: Diagnostics| {
        diagnostics.record("error", &[("stage", stage.to_string()), ("message", error.to_string())]);
        StageError { stage, error, diagnostics }
    };
    let n = input.frames.len();
    if n == 0 {
        return Err(fail(Stage::Input, Error::InvalidInput("no frames".into()), diag));
    }
    if input.assets.is_empty() {
        return Err(fail(Stage::Input, Error::InvalidInput("no asset".into()), diag));
    }
    if let Some(i) = input.frames.iter().position(|f| !f.same_size(&input.frames[0])) {
        return Err(fail(Stage::Input, Error::InvalidInput(format!("frame {i} differs in size from frame 0")), diag));
    }
    let track = cfg.track_params();
    if let Err(e) = track.validate() {
        return Err(fail(Stage::Input, e, diag));
    }
    let channels = input.frames[0].channels();
    let assets: Vec<RasterImage> = match input.assets.iter().map(|a| match_channels(a, channels)).collect() {
        Ok(a) => a,
        Err(e) => return Err(fail(Stage::Input, e, diag)),
    };

    let mut run = VideoRun {
        cfg,
        input,
        track,
        aspect: aspect_of(&assets[0]),
        records: vec![None; n],
        diag,
        seeded: false,
    };
    if let Err((stage, e)) = run.cover(0, n) {
        return Err(fail(stage, e, run.diag));
    }
    let mut diag = run.diag;
    if !run.seeded {
        return Err(fail(Stage::Seed, Error::NoCandidate, diag));
    }
    let mut records: Vec<FrameRecord> = run.records.into_iter().map(|r| r.expect("every frame is covered")).collect();

    // Compositing: per-frame homographies first (sequential, so failures are
    // recorded in order), then the warps in parallel.
    let t = Instant::now();
    let mut homographies = Vec::with_capacity(n);
    for r in records.iter_mut() {
        let asset = &assets[r.index % assets.len()];
        let h = r.corners.and_then(|c| corners_homography(&c, asset.width(), asset.height()).ok());
        if r.corners.is_some() && h.is_none() {
            r.event = "degenerate";
            r.corners = None;
        }
        homographies.push(h);
    }
    let warped: Vec<Result<RasterImage>> = par::map_range(n, |i| match &homographies[i] {
        Some(h) => warp_composite(&assets[i % assets.len()], h, &input.frames[i]),
        None => Ok(input.frames[i].clone()),
    });
    let frames = match warped.into_iter().collect::<Result<Vec<_>>>() {
        Ok(f) => f,
        Err(e) => return Err(fail(Stage::Compositing, e, diag)),
    };
    diag.time(Stage::Compositing.as_str(), t.elapsed());

    for r in &records {
        diag.record(
            "frame",
            &[
                ("index", r.index.to_string()),
                ("name", input.names.get(r.index).cloned().unwrap_or_else(|| r.index.to_string())),
                ("event", r.event.to_string()),
                ("seed", r.seed.map_or("-".into(), |s| s.to_string())),
                ("augmented", u8::from(r.augmented()).to_string()),
                ("corners", r.corners.map_or("-".into(), |c| fmt_corners(&c))),
            ],
        );
    }
    let augmented = records.iter().filter(|r| r.augmented()).count();
    diag.record("summary", &[("frames", n.to_string()), ("augmented", augmented.to_string())]);
    Ok(VideoOutput { frames, records, diagnostics: diag })
}

fn required<'p>(p: &'p Option<std::path::PathBuf>, key: &str) -> std::result::Result<&'p Path, StageError> {
    p.as_deref().ok_or_else(|| StageError {
        stage: Stage::Input,
        error: Error::Config { line: 0, message: format!("'{key}' path is required") },
        diagnostics: Diagnostics::new(),
    })
}

fn input_error(e: Error) -> StageError {
    StageError { stage: Stage::Input, error: e, diagnostics: Diagnostics::new() }
}

/// Reads the asset file, or every PNG of an asset directory.
pub fn load_assets(path: &Path) -> Result<Vec<RasterImage>> {
    if path.is_dir() {
        let files = io::list_sequence(path, "png")?;
        if files.is_empty() {
            return Err(Error::InvalidInput(format!("no PNG assets in {}", path.display())));
        }
        files.iter().map(|f| io::read_image(f)).collect()
    } else {
        Ok(vec![io::read_image(path)?])
    }
}

/// [`run_video_on`] over the directories named in `cfg`, writing augmented
/// frames, `diagnostics.txt` and `timings.txt` to the output directory.
pub fn run_video(cfg: &PipelineConfig) -> std::result::Result<VideoOutput, StageError> {
    let frames_dir = required(&cfg.frames, "frames")?;
    let masks_dir = required(&cfg.masks, "masks")?;
    let depths_dir = required(&cfg.depths, "depths")?;
    let asset_path = required(&cfg.asset, "asset")?;
    let output = required(&cfg.output, "output")?;

    let files = io::list_sequence(frames_dir, "png").map_err(input_error)?;
    if files.is_empty() {
        return Err(input_error(Error::InvalidInput(format!("no PNG frames in {}", frames_dir.display()))));
    }
    let frames: Vec<RasterImage> =
        par::map(&files, |f| io::read_image(f)).into_iter().collect::<Result<_>>().map_err(input_error)?;
    let names: Vec<String> = files.iter().map(|f| io::stem(f)).collect();
    let assets = load_assets(asset_path).map_err(input_error)?;
    let labels = cfg.crowd_labels.clone();
    let seed_names = names.clone();
    let input = VideoInput {
        frames,
        names,
        assets,
        seed_data: Box::new(move |i| {
            let m = masks_dir.join(format!("{}.png", seed_names[i]));
            let d = depths_dir.join(format!("{}.dmap", seed_names[i]));
            if !(m.is_file() && d.is_file()) {
                return Ok(None);
            }
            Ok(Some((io::read_mask(&m, &labels)?, io::read_dmap(&d)?)))
        }),
    };
    let out = run_video_on(cfg, &input)?;
    let write = || -> Result<()> {
        std::fs::create_dir_all(output)?;
        let written: Vec<Result<()>> =
            par::map_range(out.frames.len(), |i| io::write_image(&output.join(format!("{}.png", input.names[i])), &out.frames[i]));
        written.into_iter().collect::<Result<()>>()?;
        out.diagnostics.write(&output.join("diagnostics.txt"), Some(&output.join("timings.txt")))
    };
    match write() {
        Ok(()) => Ok(out),
        Err(error) => Err(StageError { stage: Stage::Output, error, diagnostics: out.diagnostics }),
    }
}
