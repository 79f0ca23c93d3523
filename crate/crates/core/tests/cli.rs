use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use adpipe::pipeline::io::write_mask;
use adpipe::BinaryMask;

fn adpipe(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_adpipe"));
    cmd.args(args);
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn s(p: &Path) -> String {
    p.display().to_string()
}

/// A short synthetic sequence in a fresh directory.
fn synth(frames: usize) -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    let n = frames.to_string();
    let o = adpipe(&["synth", "--output", &s(dir.path()), "--frames", &n, "--supersample", "1"], &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(String::from_utf8_lossy(&o.stdout).trim(), "focal 500");
    dir
}

fn image_args(root: &Path, output: &Path) -> Vec<String> {
    [
        "image",
        "--frame",
        &s(&root.join("frames/000000.png")),
        "--mask",
        &s(&root.join("masks/000000.png")),
        "--depth",
        &s(&root.join("depths/000000.dmap")),
        "--asset",
        &s(&root.join("asset.png")),
        "--output",
        &s(output),
    ]
    .map(String::from)
    .to_vec()
}

fn run_image(root: &Path, output: &Path, extra: &[&str], env: &[(&str, &str)]) -> Output {
    let mut args = image_args(root, output);
    args.extend(extra.iter().map(|a| a.to_string()));
    let refs: Vec<&str> = args.iter().map(String::as_str).collect();
    adpipe(&refs, env)
}

fn diagnostics(output: &Path) -> String {
    std::fs::read_to_string(output.with_extension("diagnostics.txt")).unwrap()
}

#[test]
fn image_writes_the_frame_and_diagnostics() {
    let dir = synth(1);
    let out = dir.path().join("augmented.png");
    let o = run_image(dir.path(), &out, &["--focal", "500"], &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let img = image::open(&out).unwrap();
    assert_eq!((img.width(), img.height()), (640, 360));
    let diag = diagnostics(&out);
    assert!(diag.lines().any(|l| l.starts_with("placement corners=")), "{diag}");
    assert!(diag.lines().any(|l| l == "focal f=500 method=fixed"), "{diag}");
    assert!(out.with_extension("timings.txt").exists());
}

#[test]
fn environment_overrides_the_file_and_flags_override_the_environment() {
    let dir = synth(1);
    let cfg = dir.path().join("run.ini");
    std::fs::write(&cfg, "[reconstruction]\nfocal = 700\n").unwrap();
    let out = dir.path().join("a.png");
    let c = s(&cfg);

    let o = run_image(dir.path(), &out, &["--config", &c], &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(diagnostics(&out).contains("focal f=700 method=fixed"));

    let o = run_image(dir.path(), &out, &["--config", &c], &[("ADPIPE_FOCAL", "500")]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(diagnostics(&out).contains("focal f=500 method=fixed"));

    let o = run_image(dir.path(), &out, &["--config", &c, "--focal", "fallback"], &[("ADPIPE_FOCAL", "500")]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(diagnostics(&out).contains("method=fallback"));
}

#[test]
fn config_errors_exit_2_with_a_line_number() {
    let dir = synth(1);
    let out = dir.path().join("a.png");
    let cfg = dir.path().join("bad.ini");
    std::fs::write(&cfg, "# run\n[tracking]\nalpha = 0.5\nmargin = 0.1\n").unwrap();
    let o = run_image(dir.path(), &out, &["--config", &s(&cfg)], &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 4"), "{}", stderr(&o));

    let o = run_image(dir.path(), &out, &["--scale", "-1"], &[]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));

    let o = run_image(dir.path(), &out, &[], &[("ADPIPE_ALPHA", "2")]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("ADPIPE_ALPHA"), "{}", stderr(&o));

    let o = run_image(dir.path(), &out, &["--config", &s(&dir.path().join("missing.ini"))], &[]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn stage_failures_exit_3_and_no_candidate_exits_4() {
    let dir = synth(3);
    let empty = BinaryMask::new(640, 360);
    for k in 0..3 {
        write_mask(&dir.path().join(format!("masks/{k:06}.png")), &empty).unwrap();
    }
    let out = dir.path().join("a.png");
    let o = run_image(dir.path(), &out, &[], &[]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("mask stage failed"), "{}", stderr(&o));

    let p = |d: &str| -> PathBuf { dir.path().join(d) };
    let o = adpipe(
        &[
            "video",
            "--frames",
            &s(&p("frames")),
            "--masks",
            &s(&p("masks")),
            "--depths",
            &s(&p("depths")),
            "--asset",
            &s(&p("asset.png")),
            "--output",
            &s(&p("out")),
            "--sample-stride",
            "1",
        ],
        &[],
    );
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
}

#[test]
fn score_reports_every_mask_and_the_seed() {
    let dir = synth(3);
    let o = adpipe(&["score", "--masks", &s(&dir.path().join("masks"))], &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = String::from_utf8_lossy(&o.stdout);
    assert_eq!(text.lines().filter(|l| l.starts_with("sqs file=")).count(), 3, "{text}");
    assert!(text.lines().last().unwrap().starts_with("seed file=0000"), "{text}");
}
