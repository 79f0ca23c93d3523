use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::geometry::{homography_dlt, Homography, Pixel};
use crate::tracking::{descriptor, shi_tomasi, zncc, DetectorParams, Feature, GrayImage};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReacquireParams {
    pub min_zncc: f32,
    pub min_matches: usize,
    pub min_groups: usize,
    pub inlier_px: f64,
    /// Detection disks around the saved corners have this many tracking
    /// radii.
    pub search_factor: f64,
    pub max_candidates: usize,
    pub ransac_iterations: usize,
    pub seed: u64,
}

impl Default for ReacquireParams {
    fn default() -> Self {
        Self {
            min_zncc: 0.85,
            min_matches: 8,
            min_groups: 3,
            inlier_px: 3.0,
            search_factor: 2.0,
            max_candidates: 120,
            ransac_iterations: 200,
            seed: 0,
        }
    }
}

/// Features and corners remembered when tracking was suspended.
#[derive(Debug, Clone, PartialEq)]
pub struct SavedFeatures {
    pub features: Vec<Feature>,
    pub corners: [Pixel; 4],
}

fn transfer_error(h: &Homography, a: Pixel, b: Pixel) -> f64 {
    h.apply(a).map_or(f64::INFINITY, |p| p.distance(b))
}

fn inliers(h: &Homography, pairs: &[(Pixel, Pixel)], tol: f64) -> Vec<usize> {
    (0..pairs.len()).filter(|&i| transfer_error(h, pairs[i].0, pairs[i].1) <= tol).collect()
}

/// Matches saved descriptors against fresh detections and, when enough
/// consistent matches exist, maps the saved corners into `frame`.
pub fn reacquire(
    saved: &SavedFeatures,
    frame: &GrayImage,
    radius: f64,
    detector: &DetectorParams,
    params: &ReacquireParams,
) -> Option<[Pixel; 4]> {
    let saved_desc: Vec<(&Feature, &Vec<f32>)> =
        saved.features.iter().filter_map(|f| f.descriptor.as_ref().map(|d| (f, d))).collect();
    if saved_desc.len() < params.min_matches {
        return None;
    }
    let det = DetectorParams { max_features: params.max_candidates, ..*detector };
    let mut fresh: Vec<Pixel> = Vec::new();
    for c in &saved.corners {
        for p in shi_tomasi(frame, *c, radius * params.search_factor, &det) {
            if !fresh.contains(&p) {
                fresh.push(p);
            }
        }
    }
    let fresh: Vec<(Pixel, Vec<f32>)> = fresh.into_iter().filter_map(|p| descriptor(frame, p).map(|d| (p, d))).collect();
    if fresh.is_empty() {
        return None;
    }

    let scores: Vec<Vec<f32>> = saved_desc.iter().map(|(_, d)| fresh.iter().map(|(_, e)| zncc(d, e)).collect()).collect();
    let argmax = |it: &mut dyn Iterator<Item = (usize, f32)>| {
        it.fold(None, |best: Option<(usize, f32)>, (i, s)| match best {
            Some((_, bs)) if bs >= s => best,
            _ => Some((i, s)),
        })
    };
    let mut pairs = Vec::new();
    let mut groups = [false; 4];
    for (i, row) in scores.iter().enumerate() {
        let Some((j, s)) = argmax(&mut row.iter().copied().enumerate()) else { continue };
        if s <= params.min_zncc {
            continue;
        }
        let back = argmax(&mut scores.iter().map(|r| r[j]).enumerate());
        if back.map(|b| b.0) == Some(i) {
            pairs.push((saved_desc[i].0.position, fresh[j].0));
            groups[saved_desc[i].0.group.min(3)] = true;
        }
    }
    if pairs.len() < params.min_matches || groups.iter().filter(|&&g| g).count() < params.min_groups {
        return None;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut best: Vec<usize> = Vec::new();
    for _ in 0..params.ransac_iterations {
        let s = rand::seq::index::sample(&mut rng, pairs.len(), 4);
        let sample: Vec<(Pixel, Pixel)> = s.iter().map(|i| pairs[i]).collect();
        if let Ok(h) = homography_dlt(&sample) {
            let inl = inliers(&h, &pairs, params.inlier_px);
            if inl.len() > best.len() {
                best = inl;
            }
        }
    }
    if best.len() < params.min_matches {
        return None;
    }
    let h = homography_dlt(&best.iter().map(|&i| pairs[i]).collect::<Vec<_>>()).ok()?;
    let refined = inliers(&h, &pairs, params.inlier_px);
    if refined.len() < params.min_matches {
        return None;
    }
    let mut out = [Pixel::default(); 4];
    for (o, c) in out.iter_mut().zip(&saved.corners) {
        *o = h.apply(*c).filter(|p| p.is_finite())?;
    }
    Some(out)
}
