//! Propagating the placed quadrilateral through a clip.
//!
//! Each corner owns a group of Shi–Tomasi features followed with pyramidal
//! Lucas–Kanade flow. A corner whose group survives is moved by the group's
//! homography; a corner that has left the frame is carried by a
//! constant-velocity Kalman filter fed with the blended group velocity.
//! Histogram jumps suspend tracking until the saved features can be matched
//! again.

mod features;
mod gray;
mod kalman;
mod lk;
mod reacquire;

pub use features::{descriptor, shi_tomasi, zncc, DetectorParams, Feature, PATCH};
pub use gray::GrayImage;
pub use kalman::{corner_velocity, kalman_step, CornerState, KalmanParams};
pub use lk::{lk_flow, lk_flow_pyramids, Flow, LkParams, Pyramid};
pub use reacquire::{reacquire, ReacquireParams, SavedFeatures};

use crate::error::{Error, Result};
use crate::geometry::{homography_dlt, Pixel, Vec2};
use crate::imaging::{color_histogram, histogram_l1, RasterImage};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackParams {
    /// Weight of a group's own velocity in the corner velocity blend.
    pub alpha: f64,
    /// Radius of the feature disk around each corner, in pixels.
    pub radius: f64,
    pub min_features: usize,
    /// Groups with fewer surviving features are topped up.
    pub redetect_below: usize,
    pub max_suspended: usize,
    pub shot_threshold: f64,
    pub histogram_bins: usize,
    /// A group homography whose corner prediction strays further than this
    /// from the group's mean translation is replaced by that translation.
    pub homography_guard_px: f64,
    pub detector: DetectorParams,
    pub lk: LkParams,
    pub kalman: KalmanParams,
    pub reacquire: ReacquireParams,
}

impl Default for TrackParams {
    fn default() -> Self {
        Self {
            alpha: 0.8,
            radius: 50.0,
            min_features: 3,
            redetect_below: 6,
            max_suspended: 90,
            shot_threshold: 0.55,
            histogram_bins: 8,
            homography_guard_px: 5.0,
            detector: DetectorParams::default(),
            lk: LkParams::default(),
            kalman: KalmanParams::default(),
            reacquire: ReacquireParams::default(),
        }
    }
}

impl TrackParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::InvalidInput(format!("alpha {} must be in (0, 1]", self.alpha)));
        }
        if !(self.radius > 0.0) || !(self.shot_threshold > 0.0) {
            return Err(Error::InvalidInput("radius and shot threshold must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TrackMode {
    Tracking,
    Suspended,
    Lost,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TrackEvent {
    Tracked,
    ShotChange,
    Suspended,
    Reacquired,
    Lost,
}

impl TrackEvent {
    pub fn as_str(self) -> &'static str {
        match self {
            TrackEvent::Tracked => "tracked",
            TrackEvent::ShotChange => "shot-change",
            TrackEvent::Suspended => "suspended",
            TrackEvent::Reacquired => "reacquired",
            TrackEvent::Lost => "lost",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrackState {
    pub corners: [CornerState; 4],
    pub groups: [Vec<Feature>; 4],
    pub mode: TrackMode,
    pub saved: Option<SavedFeatures>,
    pub frames_since_suspend: usize,
    winding: f64,
}

impl TrackState {
    pub fn corner_positions(&self) -> [Pixel; 4] {
        [0, 1, 2, 3].map(|i| self.corners[i].position)
    }

    pub fn visible(&self) -> [bool; 4] {
        [0, 1, 2, 3].map(|i| self.corners[i].visible)
    }
}

fn signed_area(c: &[Pixel; 4]) -> f64 {
    (0..4).map(|i| c[i].u * c[(i + 1) % 4].v - c[(i + 1) % 4].u * c[i].v).sum::<f64>() / 2.0
}

fn in_frame(p: Pixel, w: usize, h: usize) -> bool {
    p.is_finite() && p.u >= 0.0 && p.v >= 0.0 && p.u <= (w - 1) as f64 && p.v <= (h - 1) as f64
}

fn detect_groups(frame: &GrayImage, corners: &[Pixel; 4], params: &TrackParams) -> Result<[Vec<Feature>; 4]> {
    let mut groups: [Vec<Feature>; 4] = Default::default();
    for (g, c) in corners.iter().enumerate() {
        let pts = shi_tomasi(frame, *c, params.radius, &params.detector);
        if pts.len() < params.min_features {
            return Err(Error::InsufficientTexture { group: g, found: pts.len() });
        }
        groups[g] = pts.into_iter().map(|position| Feature { position, descriptor: None, group: g }).collect();
    }
    Ok(groups)
}

/// Detects feature groups around the four corners and starts the filters.
pub fn init_track(frame: &GrayImage, corners: [Pixel; 4], params: &TrackParams) -> Result<TrackState> {
    params.validate()?;
    let winding = signed_area(&corners);
    if !(winding.abs() > 1e-9) || corners.iter().any(|c| !c.is_finite()) {
        return Err(Error::InvalidInput("corners do not form a quadrilateral".into()));
    }
    let groups = detect_groups(frame, &corners, params)?;
    Ok(TrackState {
        corners: corners.map(|c| CornerState::new(c, &params.kalman)),
        groups,
        mode: TrackMode::Tracking,
        saved: None,
        frames_since_suspend: 0,
        winding: winding.signum(),
    })
}

/// True when the colour histograms of the two frames are further apart
/// (L1) than `threshold`.
pub fn detect_shot_change(prev: &RasterImage, next: &RasterImage, threshold: f64) -> Result<bool> {
    histogram_distance(prev, next, 8).map(|d| d > threshold)
}

pub fn histogram_distance(a: &RasterImage, b: &RasterImage, bins: usize) -> Result<f64> {
    if !a.same_size(b) {
        return Err(Error::InvalidInput("frames differ in size".into()));
    }
    Ok(histogram_l1(&color_histogram(a, bins)?, &color_histogram(b, bins)?))
}

/// Where the group's flow carries its corner: the homography fitted to
/// surviving features, unless it disagrees with the plain translation.
fn group_estimate(pairs: &[(Pixel, Pixel)], corner: Pixel, velocity: Vec2, guard: f64) -> Pixel {
    let translated = corner + velocity;
    let fitted = homography_dlt(pairs).ok().and_then(|h| {
        let errs: Vec<f64> = pairs.iter().map(|(a, b)| h.apply(*a).map_or(f64::INFINITY, |p| p.distance(*b))).collect();
        let keep: Vec<(Pixel, Pixel)> =
            pairs.iter().zip(&errs).filter(|(_, e)| **e <= 3.0).map(|(p, _)| *p).collect();
        let h = if keep.len() >= 4 && keep.len() < pairs.len() { homography_dlt(&keep).ok()? } else { h };
        h.apply(corner)
    });
    match fitted {
        Some(p) if p.is_finite() && p.distance(translated) <= guard => p,
        _ => translated,
    }
}

fn save_features(state: &TrackState, prev: &GrayImage) -> SavedFeatures {
    let features = state
        .groups
        .iter()
        .flatten()
        .map(|f| Feature { descriptor: descriptor(prev, f.position), ..f.clone() })
        .collect();
    SavedFeatures { features, corners: state.corner_positions() }
}

/// Advances the tracker by one frame.
pub fn track_step(
    mut state: TrackState,
    prev: &RasterImage,
    next: &RasterImage,
    params: &TrackParams,
) -> Result<(TrackState, TrackEvent)> {
    if !prev.same_size(next) {
        return Err(Error::InvalidInput("frames differ in size".into()));
    }
    let (w, h) = (next.width(), next.height());
    match state.mode {
        TrackMode::Lost => Ok((state, TrackEvent::Lost)),
        TrackMode::Suspended => {
            state.frames_since_suspend += 1;
            let gn = GrayImage::from_raster(next);
            let saved = state.saved.as_ref().expect("suspended state keeps its features");
            if let Some(corners) = reacquire(saved, &gn, params.radius, &params.detector, &params.reacquire) {
                if let Ok(fresh) = init_track(&gn, corners, params) {
                    if fresh.winding == state.winding {
                        return Ok((fresh, TrackEvent::Reacquired));
                    }
                }
            }
            if state.frames_since_suspend > params.max_suspended {
                state.mode = TrackMode::Lost;
                return Ok((state, TrackEvent::Lost));
            }
            Ok((state, TrackEvent::Suspended))
        }
        TrackMode::Tracking => {
            if histogram_distance(prev, next, params.histogram_bins)? > params.shot_threshold {
                state.saved = Some(save_features(&state, &GrayImage::from_raster(prev)));
                state.mode = TrackMode::Suspended;
                state.frames_since_suspend = 0;
                return Ok((state, TrackEvent::ShotChange));
            }
            let gp = GrayImage::from_raster(prev);
            let gn = GrayImage::from_raster(next);
            let pa = Pyramid::new(&gp, params.lk.levels);
            let pb = Pyramid::new(&gn, params.lk.levels);

            let mut pairs: [Vec<(Pixel, Pixel)>; 4] = Default::default();
            for (g, feats) in state.groups.iter().enumerate() {
                let pts: Vec<Pixel> = feats.iter().map(|f| f.position).collect();
                let flow = lk_flow_pyramids(&pa, &pb, &pts, &params.lk);
                pairs[g] = pts.iter().zip(&flow).filter(|(_, f)| f.ok).map(|(p, f)| (*p, f.position)).collect();
            }
            let velocities: Vec<Option<Vec2>> = pairs
                .iter()
                .map(|p| {
                    (!p.is_empty()).then(|| p.iter().map(|(a, b)| *b - *a).sum::<Vec2>() / p.len() as f64)
                })
                .collect();
            let known: Vec<Vec2> = velocities.iter().flatten().copied().collect();
            if known.is_empty() {
                state.mode = TrackMode::Lost;
                return Ok((state, TrackEvent::Lost));
            }
            let fallback = known.iter().sum::<Vec2>() / known.len() as f64;
            let group_v: [Vec2; 4] = [0, 1, 2, 3].map(|g| velocities[g].unwrap_or(fallback));
            let blended = corner_velocity(&group_v, params.alpha);

            let mut corners = state.corners.clone();
            for g in 0..4 {
                let c = &state.corners[g];
                if pairs[g].len() >= 4 && in_frame(c.position, w, h) {
                    let m = group_estimate(&pairs[g], c.position, group_v[g], params.homography_guard_px);
                    let mut next_c = kalman_step(c, Some(m), None, &params.kalman);
                    next_c.position = m;
                    next_c.visible = true;
                    corners[g] = next_c;
                } else {
                    let mut next_c = kalman_step(c, None, Some(blended[g]), &params.kalman);
                    next_c.visible = false;
                    corners[g] = next_c;
                }
            }
            let positions = [0, 1, 2, 3].map(|i| corners[i].position);
            let area = signed_area(&positions);
            if !(area.abs() > 1.0) || area.signum() != state.winding {
                state.mode = TrackMode::Lost;
                return Ok((state, TrackEvent::Lost));
            }
            state.corners = corners;

            let min_d2 = params.detector.min_distance.powi(2);
            for g in 0..4 {
                let mut feats: Vec<Feature> =
                    pairs[g].iter().map(|(_, b)| Feature { position: *b, descriptor: None, group: g }).collect();
                let corner = state.corners[g].position;
                if feats.len() < params.redetect_below && in_frame(corner, w, h) {
                    for p in shi_tomasi(&gn, corner, params.radius, &params.detector) {
                        if feats.len() >= params.detector.max_features {
                            break;
                        }
                        if feats.iter().all(|f| (f.position - p).norm_squared() >= min_d2) {
                            feats.push(Feature { position: p, descriptor: None, group: g });
                        }
                    }
                }
                state.groups[g] = feats;
            }
            Ok((state, TrackEvent::Tracked))
        }
    }
}
