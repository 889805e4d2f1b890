use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use gcmerge::corpus;
use gcmerge::gen::{gen_choreography, gen_env, GenConfig};
use gcmerge::typing::{Delta, Gamma};
use gcmerge::*;

fn parsing(c: &mut Criterion) {
    c.bench_function("parse/chor1", |b| {
        b.iter(|| parse_choreography(black_box(corpus::CHOR1)).unwrap())
    });
    c.bench_function("parse/protocols", |b| {
        b.iter(|| parse_protocols(black_box(corpus::PROTOCOLS_AB)).unwrap())
    });
}

fn running(c: &mut Criterion) {
    let chor1 = corpus::chor1();
    let merged = merge(&chor1, &SessChan::new("k"), &PublicChan::new("c")).unwrap();
    let env = corpus::env(&[false, false, false, true]);
    let mut g = c.benchmark_group("run");
    for fuel in [8, 32] {
        g.bench_with_input(BenchmarkId::new("chor1", fuel), &fuel, |b, &f| {
            b.iter(|| run(&chor1, &env, f))
        });
        g.bench_with_input(BenchmarkId::new("merged", fuel), &fuel, |b, &f| {
            b.iter(|| run(&merged, &env, f))
        });
    }
    g.finish();
}

fn transforming(c: &mut Criterion) {
    let chor1 = corpus::chor1();
    let (k, a) = (SessChan::new("k"), PublicChan::new("c"));
    c.bench_function("merge/chor1", |b| {
        b.iter(|| merge(black_box(&chor1), &k, &a).unwrap())
    });
    let big = gen_choreography(7, GenConfig::default());
    c.bench_function("merge/generated", |b| {
        b.iter(|| merge(black_box(&big), &SessChan::new("m"), &a))
    });
}

fn typing(c: &mut Criterion) {
    let chor1 = corpus::chor1();
    let gamma: Gamma = [
        (PublicChan::new("a"), corpus::g_a()),
        (PublicChan::new("b"), corpus::g_b()),
    ]
    .into();
    let sorts = corpus::sorts();
    c.bench_function("typecheck/chor1", |b| {
        b.iter(|| typecheck(&gamma, black_box(&chor1), &Delta::new(), &sorts))
    });
    let merged = merge(&chor1, &SessChan::new("k"), &PublicChan::new("c")).unwrap();
    c.bench_function("extract/merged", |b| {
        b.iter(|| extract_type(black_box(&merged), &sorts).unwrap())
    });
}

fn meshing(c: &mut Criterion) {
    let originals = [corpus::g_a(), corpus::g_b()];
    let g = corpus::g_merged();
    let mut group = c.benchmark_group("mesh");
    for depth in [4, 8, 12] {
        let bounds = MeshBounds {
            depth,
            base_len: 5,
            components: 2,
        };
        group.bench_with_input(BenchmarkId::from_parameter(depth), &bounds, |b, &bd| {
            b.iter(|| mesh_member(&g, &originals, bd))
        });
    }
    group.finish();
}

fn verifying(c: &mut Criterion) {
    let chor1 = corpus::chor1();
    let k = SessChan::new("k");
    let env = corpus::env(&[false, true]);
    c.bench_function("verify/chor1", |b| {
        b.iter(|| {
            (
                soundness_check(&chor1, &k, &env, 12),
                completeness_check(&chor1, &k, &env, 12),
            )
        })
    });
    let gen = gen_choreography(3, GenConfig::default());
    let genv = gen_env();
    c.bench_function("verify/generated", |b| {
        b.iter(|| {
            (
                soundness_check(&gen, &SessChan::new("m"), &genv, 12),
                completeness_check(&gen, &SessChan::new("m"), &genv, 12),
            )
        })
    });
}

criterion_group!(
    benches,
    parsing,
    running,
    transforming,
    typing,
    meshing,
    verifying
);
criterion_main!(benches);
