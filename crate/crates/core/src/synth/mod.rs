//! Fully ground-truthed synthetic scenes: a textured crowd plane above a
//! field, rendered analytically with matching masks and depth maps, plus
//! wireframe scenes for vanishing-point tests.

mod scene;
mod texture;
mod wireframe;

pub use scene::{
    render_scene, render_sequence, CrowdQuad, FrameBundle, FrameTruth, Motion, Palette, SceneSpec, Sequence,
    SequenceTruth,
};
pub use wireframe::{render_wireframe, wireframe_segments, Wireframe, WireframeSpec};
