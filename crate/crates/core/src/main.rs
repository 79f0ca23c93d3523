use std::ops::Range;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use adpipe::geometry::Vec2;
use adpipe::mask::{select_seed_frame, BinaryMask};
use adpipe::pipeline::{io, load_assets, run_image, run_video, PipelineConfig, Stage, StageError, KEYS};
use adpipe::synth::{render_scene, Motion, SceneSpec};
use adpipe::{Error, RasterImage};

const EXIT_CONFIG: u8 = 2;
const EXIT_STAGE: u8 = 3;
const EXIT_NO_CANDIDATE: u8 = 4;

#[derive(Parser)]
#[command(name = "adpipe", version, about = "Place and track a planar advertisement on the crowd of a sports clip")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Augment a single frame.
    Image(ImageArgs),
    /// Augment a numbered frame sequence.
    Video(VideoArgs),
    /// Render a synthetic stadium clip with masks, depths and an asset.
    Synth(SynthArgs),
    /// Score masks and report the seed frame.
    Score(ScoreArgs),
}

/// Settings shared by every command; each flag overrides the config file
/// and the `ADPIPE_<KEY>` environment.
#[derive(Args, Default)]
struct ConfigArgs {
    /// INI configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Multiplier turning relative depth into scene depth.
    #[arg(long, allow_hyphen_values = true)]
    scale: Option<String>,
    /// RANSAC inlier distance, in scene units.
    #[arg(long, allow_hyphen_values = true)]
    ransac_tolerance: Option<String>,
    /// RANSAC hypotheses to draw.
    #[arg(long, allow_hyphen_values = true)]
    ransac_iterations: Option<String>,
    /// Pixel stride of the point cloud.
    #[arg(long, allow_hyphen_values = true)]
    stride: Option<String>,
    /// 'estimate', 'fallback' or a focal length in pixels.
    #[arg(long, allow_hyphen_values = true)]
    focal: Option<String>,
    /// Frames between seed candidates.
    #[arg(long, allow_hyphen_values = true)]
    sample_stride: Option<String>,
    /// Comma-separated label ids forming the crowd; empty for binary masks.
    #[arg(long)]
    crowd_labels: Option<String>,
    /// Fraction by which the crowd hull is shrunk before placement.
    #[arg(long, allow_hyphen_values = true)]
    margin: Option<String>,
    /// Weight of a corner's own group velocity against the group mean.
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<String>,
    /// Radius in pixels of each corner's feature group.
    #[arg(long, allow_hyphen_values = true)]
    radius: Option<String>,
    /// Frames to wait for re-acquisition after a cut.
    #[arg(long, allow_hyphen_values = true)]
    max_suspended: Option<String>,
    /// Colour-histogram L1 distance that signals a cut.
    #[arg(long, allow_hyphen_values = true)]
    shot_threshold: Option<String>,
    /// Random seed for RANSAC and re-acquisition.
    #[arg(long, allow_hyphen_values = true)]
    seed: Option<String>,
}

impl ConfigArgs {
    fn flag(&self, key: &str) -> Option<&String> {
        match key {
            "scale" => self.scale.as_ref(),
            "ransac_tolerance" => self.ransac_tolerance.as_ref(),
            "ransac_iterations" => self.ransac_iterations.as_ref(),
            "stride" => self.stride.as_ref(),
            "focal" => self.focal.as_ref(),
            "sample_stride" => self.sample_stride.as_ref(),
            "crowd_labels" => self.crowd_labels.as_ref(),
            "margin" => self.margin.as_ref(),
            "alpha" => self.alpha.as_ref(),
            "radius" => self.radius.as_ref(),
            "max_suspended" => self.max_suspended.as_ref(),
            "shot_threshold" => self.shot_threshold.as_ref(),
            "seed" => self.seed.as_ref(),
            _ => None,
        }
    }

    /// Defaults, then the file, then the environment, then flags.
    fn resolve(&self, paths: &[(&str, &Option<PathBuf>)]) -> Result<PipelineConfig, Error> {
        let mut cfg = match &self.config {
            Some(p) => PipelineConfig::from_file(p)?,
            None => PipelineConfig::default(),
        };
        cfg.apply_env(|k| std::env::var(k).ok())?;
        let flag_error = |key: &str, m: String| Error::Config { line: 0, message: format!("--{}: {m}", key.replace('_', "-")) };
        for (_, key) in KEYS {
            if let Some(v) = self.flag(key) {
                cfg.set(key, v).map_err(|m| flag_error(key, m))?;
            }
        }
        for (key, p) in paths {
            if let Some(p) = p {
                cfg.set(key, &p.display().to_string()).map_err(|m| flag_error(key, m))?;
            }
        }
        Ok(cfg)
    }
}

#[derive(Args)]
struct ImageArgs {
    #[arg(long)]
    frame: PathBuf,
    #[arg(long)]
    mask: PathBuf,
    /// Relative depth map in DMAP format.
    #[arg(long)]
    depth: PathBuf,
    #[arg(long)]
    asset: Option<PathBuf>,
    /// Augmented PNG to write.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Diagnostics file; defaults to the output path with `.diagnostics.txt`.
    #[arg(long)]
    diagnostics: Option<PathBuf>,
    #[command(flatten)]
    config: ConfigArgs,
}

#[derive(Args)]
struct VideoArgs {
    /// Directory of numbered PNG frames.
    #[arg(long)]
    frames: Option<PathBuf>,
    /// Directory of masks named like the frames.
    #[arg(long)]
    masks: Option<PathBuf>,
    /// Directory of `.dmap` depth maps named like the frames.
    #[arg(long)]
    depths: Option<PathBuf>,
    /// Asset PNG, or a directory of PNGs cycled by frame index.
    #[arg(long)]
    asset: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    output: Option<PathBuf>,
    #[command(flatten)]
    config: ConfigArgs,
}

#[derive(Args)]
struct SynthArgs {
    /// Output directory; receives frames/, masks/, depths/, asset.png and truth.txt.
    #[arg(long)]
    output: PathBuf,
    #[arg(long, default_value_t = 100)]
    frames: usize,
    /// Per-frame image translation in pixels (0,0 for a static camera).
    #[arg(long, default_value_t = 2.0)]
    pan_x: f64,
    #[arg(long, default_value_t = 0.0)]
    pan_y: f64,
    /// Frame range rendered from a different view, e.g. `30..50`; repeatable.
    #[arg(long, value_parser = parse_range)]
    cut: Vec<Range<usize>>,
    /// Texture seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Samples per pixel along each axis.
    #[arg(long, default_value_t = 2)]
    supersample: usize,
}

#[derive(Args)]
struct ScoreArgs {
    /// Directory of masks.
    #[arg(long)]
    masks: PathBuf,
    /// Comma-separated label ids forming the crowd; empty for binary masks.
    #[arg(long, default_value = "")]
    crowd_labels: String,
}

fn parse_range(s: &str) -> Result<Range<usize>, String> {
    let (a, b) = s.split_once("..").ok_or_else(|| format!("expected START..END, got '{s}'"))?;
    let a: usize = a.trim().parse().map_err(|_| format!("bad range start in '{s}'"))?;
    let b: usize = b.trim().parse().map_err(|_| format!("bad range end in '{s}'"))?;
    (a < b).then_some(a..b).ok_or_else(|| format!("empty range '{s}'"))
}

enum Failure {
    Config(Error),
    Stage(StageError),
    Other(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config { .. } => Failure::Config(e),
            other => Failure::Other(other),
        }
    }
}

impl From<StageError> for Failure {
    fn from(e: StageError) -> Self {
        if matches!(e.error, Error::Config { .. }) {
            Failure::Config(e.error)
        } else {
            Failure::Stage(e)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Image(a) => image(a),
        Command::Video(a) => video(a),
        Command::Synth(a) => synth(a),
        Command::Score(a) => score(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(Failure::Stage(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(if matches!(e.error, Error::NoCandidate) { EXIT_NO_CANDIDATE } else { EXIT_STAGE })
        }
        Err(Failure::Other(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(if matches!(e, Error::NoCandidate) { EXIT_NO_CANDIDATE } else { EXIT_STAGE })
        }
    }
}

fn stage_error(stage: Stage, error: Error) -> StageError {
    StageError { stage, error, diagnostics: Default::default() }
}

fn image(a: ImageArgs) -> Result<(), Failure> {
    let cfg = a.config.resolve(&[("asset", &a.asset), ("output", &a.output)])?;
    let asset_path = cfg.asset.clone().ok_or_else(|| Error::Config { line: 0, message: "'asset' path is required".into() })?;
    let output = cfg.output.clone().ok_or_else(|| Error::Config { line: 0, message: "'output' path is required".into() })?;
    let load = || -> Result<_, Error> {
        let frame = io::read_image(&a.frame)?;
        let mask = io::read_mask(&a.mask, &cfg.crowd_labels)?;
        let depth = io::read_dmap(&a.depth)?;
        let asset = load_assets(&asset_path)?.swap_remove(0);
        Ok((frame, mask, depth, asset))
    };
    let (frame, mask, depth, asset) = load().map_err(|e| stage_error(Stage::Input, e))?;
    let timings_path = a.diagnostics.as_ref().unwrap_or(&output).with_extension("timings.txt");
    let diag_path = a.diagnostics.unwrap_or_else(|| output.with_extension("diagnostics.txt"));
    match run_image(&cfg, &frame, &mask, &depth, &asset) {
        Ok(out) => {
            io::write_image(&output, &out.frame).map_err(|e| stage_error(Stage::Output, e))?;
            out.diagnostics.write(&diag_path, Some(&timings_path)).map_err(|e| stage_error(Stage::Output, e))?;
            Ok(())
        }
        Err(e) => {
            let _ = e.diagnostics.write(&diag_path, Some(&timings_path));
            Err(e.into())
        }
    }
}

fn video(a: VideoArgs) -> Result<(), Failure> {
    let cfg = a.config.resolve(&[
        ("frames", &a.frames),
        ("masks", &a.masks),
        ("depths", &a.depths),
        ("asset", &a.asset),
        ("output", &a.output),
    ])?;
    match run_video(&cfg) {
        Ok(out) => {
            let augmented = out.records.iter().filter(|r| r.augmented()).count();
            println!("{augmented}/{} frames augmented", out.records.len());
            Ok(())
        }
        Err(e) => {
            if let Some(dir) = &cfg.output {
                if std::fs::create_dir_all(dir).is_ok() {
                    let _ = e.diagnostics.write(&dir.join("diagnostics.txt"), Some(&dir.join("timings.txt")));
                }
            }
            Err(e.into())
        }
    }
}

fn banner(width: usize, height: usize) -> RasterImage {
    RasterImage::from_fn_rgb(width, height, |x, y| {
        let border = x < 6 || y < 6 || x + 6 >= width || y + 6 >= height;
        if border {
            [255, 255, 255]
        } else if (x / 40 + y / 40) % 2 == 0 {
            [220, 30, 40]
        } else {
            [250, 200, 20]
        }
    })
    .expect("banner size is non-zero")
}

fn synth(a: SynthArgs) -> Result<(), Failure> {
    let mut spec = SceneSpec::default();
    spec.texture_seed = a.seed;
    spec.supersample = a.supersample;
    spec.motion = if a.pan_x == 0.0 && a.pan_y == 0.0 { Motion::Static } else { Motion::Pan(Vec2::new(a.pan_x, a.pan_y)) };
    if !a.cut.is_empty() {
        spec.alternate = Some(Box::new(spec.alternate_view()));
        spec.cuts = a.cut.clone();
    }
    let dirs = ["frames", "masks", "depths"].map(|d| a.output.join(d));
    for d in &dirs {
        std::fs::create_dir_all(d).map_err(Error::from)?;
    }
    let mut truth = String::from("# frame shot offset_u offset_v\n");
    for k in 0..a.frames {
        let b = render_scene(&spec, k)?;
        let name = format!("{k:06}");
        io::write_image(&dirs[0].join(format!("{name}.png")), &b.frame)?;
        io::write_mask(&dirs[1].join(format!("{name}.png")), &b.mask)?;
        io::write_dmap(&dirs[2].join(format!("{name}.dmap")), &b.depth)?;
        truth.push_str(&format!("{k} {} {} {}\n", b.truth.shot, b.truth.offset.x, b.truth.offset.y));
    }
    io::write_image(&a.output.join("asset.png"), &banner(400, 100))?;
    std::fs::write(a.output.join("truth.txt"), truth).map_err(Error::from)?;
    println!("focal {}", spec.f);
    Ok(())
}

fn score(a: ScoreArgs) -> Result<(), Failure> {
    let mut cfg = PipelineConfig::default();
    cfg.set("crowd_labels", &a.crowd_labels).map_err(|m| Error::Config { line: 0, message: format!("--crowd-labels: {m}") })?;
    let files = io::list_sequence(&a.masks, "png")?;
    let masks: Vec<BinaryMask> = files.iter().map(|f| io::read_mask(f, &cfg.crowd_labels)).collect::<Result<_, _>>()?;
    let indexed: Vec<(usize, &BinaryMask)> = masks.iter().enumerate().collect();
    let (seed, _, reports) = select_seed_frame(&indexed)?;
    for (i, r) in reports {
        println!(
            "sqs file={} area={} s_cp={} s_cl={} s_sp={} sqs={}",
            name(&files[i]),
            r.a,
            r.s_cp,
            r.s_cl,
            r.s_sp,
            r.sqs
        );
    }
    println!("seed file={}", name(&files[seed]));
    Ok(())
}

fn name(p: &Path) -> String {
    p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default()
}
