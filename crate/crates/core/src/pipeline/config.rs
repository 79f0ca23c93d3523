use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::tracking::TrackParams;

/// Where the focal length comes from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FocalMode {
    Fixed(f64),
    /// Vanishing points of all image lines, falling back to the heuristic.
    Estimate,
    /// `1.2 · max(width, height)`.
    Fallback,
}

impl FocalMode {
    fn parse(s: &str) -> std::result::Result<Self, String> {
        match s {
            "estimate" => Ok(FocalMode::Estimate),
            "fallback" => Ok(FocalMode::Fallback),
            other => {
                let f: f64 = other.parse().map_err(|_| format!("focal must be 'estimate', 'fallback' or a number, got '{other}'"))?;
                if f.is_finite() && f > 0.0 {
                    Ok(FocalMode::Fixed(f))
                } else {
                    Err(format!("focal must be positive, got {other}"))
                }
            }
        }
    }
}

impl std::fmt::Display for FocalMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FocalMode::Fixed(v) => write!(f, "{v}"),
            FocalMode::Estimate => f.write_str("estimate"),
            FocalMode::Fallback => f.write_str("fallback"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub frames: Option<PathBuf>,
    pub masks: Option<PathBuf>,
    pub depths: Option<PathBuf>,
    pub asset: Option<PathBuf>,
    pub output: Option<PathBuf>,
    /// Relative depth to world `z`.
    pub scale: f64,
    pub ransac_tolerance: f64,
    pub ransac_iterations: usize,
    /// Pixel stride of the point cloud.
    pub stride: usize,
    pub focal: FocalMode,
    /// Frames between seed candidates.
    pub sample_stride: usize,
    /// Label ids forming the crowd in label-map masks; empty means any
    /// non-zero value.
    pub crowd_labels: Vec<u8>,
    pub margin: f64,
    pub alpha: f64,
    pub radius: f64,
    pub max_suspended: usize,
    pub shot_threshold: f64,
    pub seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            frames: None,
            masks: None,
            depths: None,
            asset: None,
            output: None,
            scale: 1_000_000.0,
            ransac_tolerance: 10_000.0,
            ransac_iterations: 500,
            stride: 4,
            focal: FocalMode::Estimate,
            sample_stride: 30,
            crowd_labels: Vec::new(),
            margin: 0.02,
            alpha: 0.8,
            radius: 50.0,
            max_suspended: 90,
            shot_threshold: 0.55,
            seed: 0,
        }
    }
}

/// `(section, key)` for every setting; keys are unique across sections.
pub const KEYS: &[(&str, &str)] = &[
    ("paths", "frames"),
    ("paths", "masks"),
    ("paths", "depths"),
    ("paths", "asset"),
    ("paths", "output"),
    ("reconstruction", "scale"),
    ("reconstruction", "ransac_tolerance"),
    ("reconstruction", "ransac_iterations"),
    ("reconstruction", "stride"),
    ("reconstruction", "focal"),
    ("seed", "sample_stride"),
    ("seed", "crowd_labels"),
    ("placement", "margin"),
    ("tracking", "alpha"),
    ("tracking", "radius"),
    ("tracking", "max_suspended"),
    ("tracking", "shot_threshold"),
    ("general", "seed"),
];

fn positive_f64(v: &str) -> std::result::Result<f64, String> {
    let x: f64 = v.parse().map_err(|_| format!("expected a number, got '{v}'"))?;
    if x.is_finite() && x > 0.0 {
        Ok(x)
    } else {
        Err(format!("value must be positive, got {v}"))
    }
}

fn positive_usize(v: &str) -> std::result::Result<usize, String> {
    match v.parse::<usize>() {
        Ok(0) => Err("value must be positive, got 0".into()),
        Ok(x) => Ok(x),
        Err(_) => Err(format!("expected a positive integer, got '{v}'")),
    }
}

impl PipelineConfig {
    /// Sets one key from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        let v = value.trim();
        let path = |v: &str| (!v.is_empty()).then(|| PathBuf::from(v));
        match key {
            "frames" => self.frames = path(v),
            "masks" => self.masks = path(v),
            "depths" => self.depths = path(v),
            "asset" => self.asset = path(v),
            "output" => self.output = path(v),
            "scale" => self.scale = positive_f64(v)?,
            "ransac_tolerance" => self.ransac_tolerance = positive_f64(v)?,
            "ransac_iterations" => self.ransac_iterations = positive_usize(v)?,
            "stride" => self.stride = positive_usize(v)?,
            "focal" => self.focal = FocalMode::parse(v)?,
            "sample_stride" => self.sample_stride = positive_usize(v)?,
            "crowd_labels" => {
                self.crowd_labels = v
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(|s| s.parse::<u8>().map_err(|_| format!("label ids are 0-255, got '{s}'")))
                    .collect::<std::result::Result<_, _>>()?
            }
            "margin" => {
                let m: f64 = v.parse().map_err(|_| format!("expected a number, got '{v}'"))?;
                if !(0.0..0.5).contains(&m) {
                    return Err(format!("margin must be in [0, 0.5), got {v}"));
                }
                self.margin = m;
            }
            "alpha" => {
                let a = positive_f64(v)?;
                if a > 1.0 {
                    return Err(format!("alpha must be in (0, 1], got {v}"));
                }
                self.alpha = a;
            }
            "radius" => self.radius = positive_f64(v)?,
            "max_suspended" => self.max_suspended = positive_usize(v)?,
            "shot_threshold" => self.shot_threshold = positive_f64(v)?,
            "seed" => self.seed = v.parse().map_err(|_| format!("expected an unsigned integer, got '{v}'"))?,
            other => return Err(format!("unknown key '{other}'")),
        }
        Ok(())
    }

    /// Textual value of a key, in the form [`set`](Self::set) accepts.
    pub fn get(&self, key: &str) -> Option<String> {
        let path = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string()).unwrap_or_default();
        Some(match key {
            "frames" => path(&self.frames),
            "masks" => path(&self.masks),
            "depths" => path(&self.depths),
            "asset" => path(&self.asset),
            "output" => path(&self.output),
            "scale" => self.scale.to_string(),
            "ransac_tolerance" => self.ransac_tolerance.to_string(),
            "ransac_iterations" => self.ransac_iterations.to_string(),
            "stride" => self.stride.to_string(),
            "focal" => self.focal.to_string(),
            "sample_stride" => self.sample_stride.to_string(),
            "crowd_labels" => self.crowd_labels.iter().map(u8::to_string).collect::<Vec<_>>().join(","),
            "margin" => self.margin.to_string(),
            "alpha" => self.alpha.to_string(),
            "radius" => self.radius.to_string(),
            "max_suspended" => self.max_suspended.to_string(),
            "shot_threshold" => self.shot_threshold.to_string(),
            "seed" => self.seed.to_string(),
            _ => return None,
        })
    }

    /// Applies `ADPIPE_<KEY>` variables from `lookup`.
    pub fn apply_env(&mut self, lookup: impl Fn(&str) -> Option<String>) -> Result<()> {
        for (_, key) in KEYS {
            let var = format!("ADPIPE_{}", key.to_ascii_uppercase());
            if let Some(v) = lookup(&var) {
                self.set(key, &v).map_err(|m| Error::Config { line: 0, message: format!("{var}: {m}") })?;
            }
        }
        Ok(())
    }

    /// INI text that [`parse_config`] reads back to an equal config.
    pub fn to_ini(&self) -> String {
        let mut out = String::new();
        let mut section = "";
        for (s, k) in KEYS {
            if *s != section {
                if !section.is_empty() {
                    out.push('\n');
                }
                let _ = writeln!(out, "[{s}]");
                section = s;
            }
            let _ = writeln!(out, "{k} = {}", self.get(k).unwrap_or_default());
        }
        out
    }

    pub fn track_params(&self) -> TrackParams {
        let mut p = TrackParams {
            alpha: self.alpha,
            radius: self.radius,
            max_suspended: self.max_suspended,
            shot_threshold: self.shot_threshold,
            ..TrackParams::default()
        };
        p.reacquire.seed = self.seed;
        p
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config { line: 0, message: format!("cannot read {}: {e}", path.display()) })?;
        parse_config(&text)
    }
}

/// Strict INI reader: optional `[section]` headers, `key = value` lines,
/// `#`/`;` comments. Absent keys keep their defaults.
pub fn parse_config(text: &str) -> Result<PipelineConfig> {
    let mut cfg = PipelineConfig::default();
    let mut section: Option<String> = None;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let err = |message: String| Error::Config { line: line_no, message };
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
            continue;
        }
        if let Some(rest) = line.strip_prefix('[') {
            let name = rest.strip_suffix(']').ok_or_else(|| err(format!("malformed section header '{line}'")))?.trim();
            if !KEYS.iter().any(|(s, _)| *s == name) {
                return Err(err(format!("unknown section '{name}'")));
            }
            section = Some(name.to_string());
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| err(format!("expected key = value, got '{line}'")))?;
        let key = key.trim();
        let Some((home, _)) = KEYS.iter().find(|(_, k)| *k == key) else {
            return Err(err(format!("unknown key '{key}'")));
        };
        if let Some(s) = &section {
            if s != home {
                return Err(err(format!("key '{key}' belongs in section [{home}], not [{s}]")));
            }
        }
        cfg.set(key, value).map_err(err)?;
    }
    Ok(cfg)
}
