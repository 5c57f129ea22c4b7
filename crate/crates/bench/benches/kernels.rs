use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use ecgnet::kernel::{conv1d, conv1d_backward, maxpool1d};
use ecgnet::Signal;
use ecgnet_bench::conv_case;
use std::hint::black_box;

/// Conv shapes as they occur in the residual blocks at input length 187.
const SHAPES: [(usize, usize, usize); 6] = [
    (16, 16, 187),
    (16, 32, 93),
    (32, 64, 46),
    (64, 128, 23),
    (128, 256, 11),
    (256, 256, 5),
];

fn forward(c: &mut Criterion) {
    let mut group = c.benchmark_group("conv1d");
    for (in_ch, out_ch, len) in SHAPES {
        let (x, w, b) = conv_case(in_ch, out_ch, 3, len);
        group.bench_with_input(BenchmarkId::from_parameter(format!("{in_ch}x{out_ch}@{len}")), &x, |bench, x| {
            bench.iter(|| conv1d(black_box(x), &w, &b).unwrap())
        });
    }
    group.finish();
}

fn backward(c: &mut Criterion) {
    let mut group = c.benchmark_group("conv1d_backward");
    for (in_ch, out_ch, len) in SHAPES {
        let (x, mut w, mut b) = conv_case(in_ch, out_ch, 3, len);
        let g = Signal::new(out_ch, len, vec![0.01; out_ch * len]).unwrap();
        group.bench_function(BenchmarkId::from_parameter(format!("{in_ch}x{out_ch}@{len}")), |bench| {
            bench.iter(|| conv1d_backward(black_box(&x), &mut w, &mut b, &g).unwrap())
        });
    }
    group.finish();
}

fn pool(c: &mut Criterion) {
    let (x, _, _) = conv_case(64, 1, 1, 46);
    c.bench_function("maxpool1d 64x46", |bench| bench.iter(|| maxpool1d(black_box(&x), 2, 2).unwrap()));
}

criterion_group!(benches, forward, backward, pool);
criterion_main!(benches);
