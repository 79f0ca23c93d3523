mod common;

use adpipe::mask::{largest_component, BinaryMask};
use adpipe::pipeline::{run_image, run_video_on, FocalMode, PipelineConfig, Stage, VideoInput};
use adpipe::placement::{alignment_line, alignment_plane, alignment_vector, place_asset, PlacementParams};
use adpipe::reconstruction::hull_on_plane;
use adpipe::synth::{render_scene, render_sequence, Motion, SceneSpec};
use adpipe::imaging::{CannyParams, HoughParams};
use adpipe::geometry::Vec2;
use adpipe::Error;

use common::*;

fn fixed(spec: &SceneSpec) -> PipelineConfig {
    PipelineConfig { focal: FocalMode::Fixed(spec.f), ..PipelineConfig::default() }
}

#[test]
fn image_run_places_the_asset_inside_the_crowd_along_the_boundary() {
    let spec = SceneSpec::default();
    let b = render_scene(&spec, 0).unwrap();
    let out = run_image(&fixed(&spec), &b.frame, &b.mask, &b.depth, &banner()).unwrap();
    let p = &out.seed.placement;
    let hull = projected_hull(&out.seed.hull, &out.seed.intrinsics);
    for c in p.corners2d {
        assert!(distance_to_polygon(c.to_vec(), &hull) <= 1.0, "{c:?} outside the hull");
    }
    let drawn = boundary_angle_at_bottom(p, spec.crowd.along, &out.seed.intrinsics);
    assert!(line_angle_diff(bottom_edge_angle(p), drawn) < 2.0);
    assert_ne!(out.frame, b.frame, "nothing was composited");
    assert_eq!(out.diagnostics.of_kind("placement").count(), 1);
}

#[test]
fn image_run_matches_placement_on_the_exact_plane() {
    let spec = SceneSpec::default();
    let b = render_scene(&spec, 0).unwrap();
    let cfg = fixed(&spec);
    let out = run_image(&cfg, &b.frame, &b.mask, &b.depth, &banner()).unwrap();
    let k = out.seed.intrinsics;

    let cloud = exact_cloud(&b, &k, cfg.stride);
    let fit = exact_fit(&cloud, b.truth.plane_world);
    let hull = hull_on_plane(&fit, &cloud).unwrap();
    let crowd = largest_component(&b.mask).unwrap();
    let line = alignment_line(&crowd, &CannyParams::default(), &HoughParams::default()).unwrap();
    let v = alignment_vector(&alignment_plane(&line, &k).unwrap(), &fit.plane).unwrap();
    let params = PlacementParams { aspect: 4.0, margin: cfg.margin, ..PlacementParams::default() };
    let oracle = place_asset(&fit, &hull, v, &params, &k).unwrap();
    for (a, o) in out.seed.placement.corners2d.iter().zip(&oracle.corners2d) {
        assert!(a.distance(*o) < 1.0, "{a:?} vs exact-plane {o:?}");
    }
}

#[test]
fn empty_mask_fails_at_the_mask_stage() {
    let spec = SceneSpec::default();
    let b = render_scene(&spec, 0).unwrap();
    let empty = BinaryMask::new(b.mask.width(), b.mask.height());
    let err = run_image(&fixed(&spec), &b.frame, &empty, &b.depth, &banner()).unwrap_err();
    assert_eq!(err.stage, Stage::Mask);
    assert!(matches!(err.error, Error::EmptyMask));
    assert!(err.to_string().starts_with("mask stage failed"));
}

#[test]
fn video_run_follows_a_pan() {
    let mut spec = SceneSpec::default();
    spec.motion = Motion::Pan(Vec2::new(2.0, 0.0));
    let seq = render_sequence(&spec, 100).unwrap();
    let out = run_video_on(&fixed(&spec), &video_input(&seq)).unwrap();
    assert_eq!(out.frames.len(), 100);
    assert!(out.records.iter().all(|r| r.augmented()), "every frame of a pan is augmented");

    let seed = out.records[0].seed.unwrap();
    let seed_corners = out.records[seed].corners.unwrap();
    let mut errors = Vec::new();
    for r in &out.records {
        let corners = r.corners.unwrap();
        for (c, s) in corners.iter().zip(&seed_corners) {
            errors.push(c.distance(seq.truth.transfer(*s, seed, r.index).unwrap()));
        }
    }
    assert!(mean(&errors) < 2.0, "mean corner error {}", mean(&errors));
    assert_eq!(out.diagnostics.of_kind("frame").count(), 100);
}

#[test]
fn video_run_suspends_across_a_cut_and_resumes() {
    let mut spec = SceneSpec::default();
    spec.alternate = Some(Box::new(spec.alternate_view()));
    spec.cuts = vec![30..50];
    spec.motion = Motion::Pan(Vec2::new(1.0, 0.0));
    let seq = render_sequence(&spec, 60).unwrap();
    let out = run_video_on(&fixed(&spec), &video_input(&seq)).unwrap();
    for r in &out.records[30..50] {
        assert!(!r.augmented(), "frame {} inside the cut was augmented", r.index);
        assert_eq!(out.frames[r.index], seq.frames[r.index].frame, "unaugmented frames pass through");
    }
    let resumed = (50..60).find(|&k| out.records[k].augmented()).expect("never resumed");
    assert!(resumed <= 52, "resumed at {resumed}");
    assert!(out.records[..30].iter().all(|r| r.augmented()));
}

#[test]
fn frame_records_cover_every_frame_in_order() {
    let seq = render_sequence(&SceneSpec::default(), 12).unwrap();
    let out = run_video_on(&fixed(&SceneSpec::default()), &video_input(&seq)).unwrap();
    let indices: Vec<usize> = out.records.iter().map(|r| r.index).collect();
    assert_eq!(indices, (0..12).collect::<Vec<_>>());
}

#[test]
fn video_without_any_crowd_has_no_candidate() {
    let seq = render_sequence(&SceneSpec::default(), 8).unwrap();
    let empty = BinaryMask::new(seq.frames[0].mask.width(), seq.frames[0].mask.height());
    let depth = seq.frames[0].depth.clone();
    let input = VideoInput {
        frames: seq.frames.iter().map(|f| f.frame.clone()).collect(),
        names: (0..8).map(|i| i.to_string()).collect(),
        assets: vec![banner()],
        seed_data: Box::new(move |_| Ok(Some((empty.clone(), depth.clone())))),
    };
    let mut cfg = PipelineConfig::default();
    cfg.sample_stride = 2;
    let err = run_video_on(&cfg, &input).unwrap_err();
    assert!(matches!(err.error, Error::NoCandidate), "{err}");
}
