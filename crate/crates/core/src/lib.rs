//! Markerless planar advertisement insertion for sports video.
//!
//! The engine picks the best-segmented frame of a clip, reconstructs the
//! crowd region in 3D from a relative depth map, places a rectangular asset
//! flush with the dominant crowd plane and aligned with the crowd/ground
//! boundary, then tracks the placement through camera motion and shot cuts.
//!
//! Stages, bottom-up:
//!
//! 1. [`geometry`] – pinhole back-projection, plane algebra, homographies.
//! 2. [`imaging`] – grayscale, Canny, probabilistic Hough, histograms, warping.
//! 3. [`mask`] – connected components, hole filling, segmentation quality score.
//! 4. [`reconstruction`] – point clouds, RANSAC plane, hull, vanishing points.
//! 5. [`placement`] – alignment line/plane/vector and the inscribed asset rectangle.
//! 6. [`tracking`] – corner feature groups, pyramidal LK, Kalman recovery, shot cuts.
//! 7. [`synth`] – ground-truthed synthetic stadium scenes.
//! 8. [`pipeline`] – configuration, file formats, single-image and video runs.
//!
//! Data-parallel inner loops run on rayon when the `parallel` feature is
//! enabled (the default) and sequentially otherwise. Both paths produce
//! bit-identical results.

pub mod error;
pub mod geometry;
pub mod imaging;
pub mod mask;
pub mod placement;
pub mod pipeline;
pub mod reconstruction;
pub mod synth;
pub mod tracking;

mod par;

pub use error::{Error, Result};
pub use geometry::{CameraIntrinsics, Homography, Pixel, PlaneEq, Vec2, Vec3};
pub use imaging::RasterImage;
pub use mask::BinaryMask;
