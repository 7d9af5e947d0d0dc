use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use hadswitch::invariants::{binary_code_summary, hadamard_smith_form};
use hadswitch::structure::{find_closed_quadruples, find_hall_sets};
use hadswitch::{canonical_key, double, paley, sylvester, Axis, DoublingShape, PaleyKind};

fn canonical(c: &mut Criterion) {
    let p12 = paley(11, PaleyKind::One).unwrap();
    let cases = [
        ("sylvester16", sylvester(4)),
        ("paley20", paley(19, PaleyKind::One).unwrap()),
        ("doubled24", double(&p12, &p12, &(0..12).collect::<Vec<_>>(), DoublingShape::Stacked).unwrap()),
        ("paley28", paley(27, PaleyKind::One).unwrap()),
        ("sylvester32", sylvester(5)),
    ];
    let mut g = c.benchmark_group("canonical_key");
    for (name, m) in &cases {
        g.bench_function(*name, |b| b.iter(|| canonical_key(black_box(m))));
    }
    g.finish();
}

fn quadruples(c: &mut Criterion) {
    let s32 = sylvester(5);
    let p28 = paley(13, PaleyKind::Two).unwrap();
    c.bench_function("find_closed_quadruples/sylvester32", |b| b.iter(|| find_closed_quadruples(black_box(&s32), Axis::Rows)));
    c.bench_function("find_hall_sets/paley2_28", |b| b.iter(|| find_hall_sets(black_box(&p28), Axis::Rows)));
}

fn invariants(c: &mut Criterion) {
    let p36 = paley(17, PaleyKind::Two).unwrap();
    let p24 = paley(23, PaleyKind::One).unwrap();
    c.bench_function("smith_form/paley2_36", |b| b.iter(|| hadamard_smith_form(black_box(&p36))));
    c.bench_function("code_summary/paley24", |b| b.iter(|| binary_code_summary(black_box(&p24), Axis::Columns)));
}

criterion_group!(benches, canonical, quadruples, invariants);
criterion_main!(benches);
