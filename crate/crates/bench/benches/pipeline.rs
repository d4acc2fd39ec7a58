use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use macc_core::analysis::{comparison_table, default_grid};
use macc_core::coding::{compressed_decode_all, compressed_deliver, lambda_profile, user_decoders};
use macc_core::construct::{mn_pda, partition_pda, MnParams, PartitionParams};
use macc_core::field::FieldSpec;
use macc_core::sim::{decode_all, deliver, populate_caches, DemandVector, PacketLibrary};
use macc_core::transform::{build_scheme, MultiaccessParams};

fn construction(c: &mut Criterion) {
    let mut g = c.benchmark_group("construct");
    for (k, t) in [(8, 3), (12, 4)] {
        g.bench_with_input(
            BenchmarkId::new("mn", format!("{k}_{t}")),
            &(k, t),
            |b, &(k, t)| b.iter(|| mn_pda(MnParams::new(k, t).unwrap()).unwrap()),
        );
    }
    g.bench_function("partition_3_3", |b| {
        b.iter(|| partition_pda(PartitionParams::new(3, 3).unwrap()).unwrap())
    });
    g.finish();
}

fn transform(c: &mut Criterion) {
    let mut g = c.benchmark_group("transform");
    for (k, l, t) in [(8, 3, 2), (14, 3, 3)] {
        let p = mn_pda(MnParams::new(k - t * (l - 1), t).unwrap()).unwrap();
        let params = MultiaccessParams::new(k, l, t, k).unwrap();
        g.bench_function(format!("build_scheme_{k}_{l}_{t}"), |b| {
            b.iter(|| build_scheme(black_box(&p), &params).unwrap())
        });
    }
    g.finish();
}

fn delivery(c: &mut Criterion) {
    let (k, l, t) = (10, 2, 2);
    let p = mn_pda(MnParams::new(k - t * (l - 1), t).unwrap()).unwrap();
    let s = build_scheme(&p, &MultiaccessParams::new(k, l, t, k).unwrap()).unwrap();
    let lib = PacketLibrary::for_scheme(&s, k, 64, 0).unwrap();
    let caches = populate_caches(&lib, &s).unwrap();
    let d = DemandVector::reversed(k);
    let log = deliver(&lib, &s, &d).unwrap();

    let mut g = c.benchmark_group("simulate");
    g.bench_function("deliver_10_2_2", |b| {
        b.iter(|| deliver(&lib, &s, black_box(&d)).unwrap())
    });
    g.bench_function("decode_all_10_2_2", |b| {
        b.iter(|| decode_all(&lib, &caches, &s, black_box(&d), &log))
    });
    g.finish();
}

fn compression(c: &mut Criterion) {
    let (k, l, t) = (8, 3, 2);
    let p = mn_pda(MnParams::new(k - t * (l - 1), t).unwrap()).unwrap();
    let s = build_scheme(&p, &MultiaccessParams::new(k, l, t, k).unwrap()).unwrap();
    let lp = lambda_profile(&p, l).unwrap();
    let lib = PacketLibrary::for_scheme(&s, k, 64, 0).unwrap();
    let caches = populate_caches(&lib, &s).unwrap();
    let d = DemandVector::identity(k);

    let mut g = c.benchmark_group("compress");
    for spec in [FieldSpec::Gf256, FieldSpec::Gf65536] {
        let batch = compressed_deliver(&lib, &s, &lp, &d, spec).unwrap();
        let decoders = user_decoders(&s, &batch.matrix).unwrap();
        g.bench_function(format!("deliver_{}", spec.bits()), |b| {
            b.iter(|| compressed_deliver(&lib, &s, &lp, black_box(&d), spec).unwrap())
        });
        g.bench_function(format!("decode_all_{}", spec.bits()), |b| {
            b.iter(|| compressed_decode_all(&decoders, &lib, &caches, &s, &d, black_box(&batch)))
        });
    }
    g.finish();
}

fn analysis(c: &mut Criterion) {
    c.bench_function("comparison_table_20_3", |b| {
        b.iter(|| comparison_table(black_box(20), 3, &default_grid(3)).unwrap())
    });
}

criterion_group!(
    benches,
    construction,
    transform,
    delivery,
    compression,
    analysis
);
criterion_main!(benches);
