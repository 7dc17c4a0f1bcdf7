use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use vecfilt::noise::{corrupt, NoiseConfig, NoiseModel};
use vecfilt::registry::{build, FilterSpec};
use vecfilt::{filter_image, filter_image_sequential, AcosMode, Image};

fn test_image(side: usize) -> Image {
    let clean = Image::from_fn(side, side, |x, y| {
        [(x * 255 / side) as u8, (y * 255 / side) as u8, ((x + y) * 127 / side) as u8]
    })
    .unwrap();
    corrupt(&clean, &NoiseConfig::new(NoiseModel::Correlated, 0.1, 42)).unwrap()
}

fn parallel_vs_sequential(c: &mut Criterion) {
    let img = test_image(128);
    let mut group = c.benchmark_group("filter_image");
    group.sample_size(20);
    for name in ["vmf", "fpgf", "acwddf"] {
        let f = build(&FilterSpec::new(name), &img, 3).unwrap();
        group.bench_with_input(BenchmarkId::new("sequential", name), &img, |b, img| {
            b.iter(|| filter_image_sequential(black_box(img), f.as_ref(), 3).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("parallel", name), &img, |b, img| {
            b.iter(|| filter_image(black_box(img), f.as_ref(), 3).unwrap())
        });
    }
    group.finish();
}

fn acos_modes(c: &mut Criterion) {
    let img = test_image(256);
    let mut group = c.benchmark_group("bvdf_acos");
    group.sample_size(10);
    for (label, mode) in [("approx", AcosMode::Approximate), ("ref", AcosMode::Reference)] {
        let f = build(&FilterSpec::new("bvdf").with_acos(mode), &img, 3).unwrap();
        group.bench_function(label, |b| {
            b.iter(|| filter_image_sequential(black_box(&img), f.as_ref(), 3).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, parallel_vs_sequential, acos_modes);
criterion_main!(benches);
