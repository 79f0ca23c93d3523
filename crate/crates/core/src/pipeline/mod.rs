//! Orchestration: configuration, file formats, and the single-image and
//! video runs that chain seed selection, reconstruction, placement,
//! tracking and compositing.

mod config;
mod diagnostics;
pub mod io;
mod run;

pub use config::{parse_config, FocalMode, PipelineConfig, KEYS};
pub use diagnostics::{field, parse_corners, Diagnostics};
pub use run::{
    estimate_focal_from_frame, fallback_focal, load_assets, run_image, run_video, run_video_on, FocalEstimate,
    FrameRecord, ImageOutput, SeedData, SeedPlacement, Stage, StageError, VideoInput, VideoOutput,
};
