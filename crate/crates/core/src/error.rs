use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("point is behind the camera (z = {0})")]
    BehindCamera(f64),
    #[error("planes are parallel; no intersection line")]
    NoIntersection,
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("invalid hull: {0}")]
    InvalidHull(String),
    #[error("singular homography")]
    DegenerateHomography,
    #[error("mask contains no crowd pixels")]
    EmptyMask,
    #[error("no candidate frame with crowd pixels")]
    NoCandidate,
    #[error("insufficient line structure: {0}")]
    InsufficientStructure(String),
    #[error("inconsistent vanishing-point geometry: {0}")]
    InconsistentGeometry(String),
    #[error("no alignment line found on the crowd boundary")]
    NoAlignment,
    #[error("placement failed: {0}")]
    PlacementFailed(String),
    #[error("insufficient texture around corner {group}: {found} features")]
    InsufficientTexture { group: usize, found: usize },
    #[error("invalid scene spec: {0}")]
    InvalidSpec(String),
    #[error("{}", config_message(*line, message))]
    /// `line` is 1-based; 0 when the setting came from the environment or a flag.
    Config { line: usize, message: String },
    #[error("file format: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Image(#[from] image::ImageError),
}

fn config_message(line: usize, message: &str) -> String {
    if line == 0 {
        format!("config: {message}")
    } else {
        format!("config line {line}: {message}")
    }
}
