//! Data-parallel stages on the default rayon pool versus a single thread.
//! Build with `--no-default-features` to measure the plain sequential path.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use adpipe::imaging::{canny_with, to_grayscale, CannyParams};
use adpipe::mask::sqs;
use adpipe::reconstruction::{depth_to_cloud, ransac_plane, RansacParams};
use adpipe::synth::{render_scene, SceneSpec};

fn pools() -> Vec<(String, rayon::ThreadPool)> {
    let mut out = vec![("1-thread".to_string(), rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap())];
    let default = rayon::ThreadPoolBuilder::new().build().unwrap();
    out.push((format!("{}-threads", default.current_num_threads()), default));
    out
}

fn stages(c: &mut Criterion) {
    let spec = SceneSpec::default();
    let bundle = render_scene(&spec, 0).unwrap();
    let k = spec.intrinsics();
    let cloud = depth_to_cloud(&bundle.depth, &k, &bundle.mask, 4).unwrap();
    let gray = to_grayscale(&bundle.frame).unwrap();
    let mut small = spec.clone();
    small.width = 320;
    small.height = 180;
    small.supersample = 1;

    let mut group = c.benchmark_group("stages");
    group.sample_size(10);
    for (name, pool) in pools() {
        group.bench_with_input(BenchmarkId::new("ransac_plane", &name), &pool, |b, pool| {
            b.iter(|| pool.install(|| ransac_plane(black_box(&cloud), &RansacParams::default()).unwrap()))
        });
        group.bench_with_input(BenchmarkId::new("sqs", &name), &pool, |b, pool| {
            b.iter(|| pool.install(|| sqs(black_box(&bundle.mask)).unwrap()))
        });
        group.bench_with_input(BenchmarkId::new("canny", &name), &pool, |b, pool| {
            b.iter(|| pool.install(|| canny_with(black_box(&gray), &CannyParams::default()).unwrap()))
        });
        group.bench_with_input(BenchmarkId::new("render_scene", &name), &pool, |b, pool| {
            b.iter(|| pool.install(|| render_scene(black_box(&small), 0).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, stages);
criterion_main!(benches);
