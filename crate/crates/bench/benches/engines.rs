use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use packlab_core::latin::count_latin_squares;
use packlab_core::search::chi::{chi_exact, ChiKind};
use packlab_core::search::decide_correspondence_packing;
use packlab_core::search::greedy::greedy_unpackable_cover;
use packlab_core::thresholds::forbidden_count_fixed_first_row;
use packlab_core::{CorrespondenceCover, PackingMatrix, Permutation, SearchBudget};

fn hall_check(c: &mut Criterion) {
    let rows = |lines: &[&[usize]]| {
        PackingMatrix::new(lines.iter().map(|l| Permutation::from_one_line(l).unwrap()).collect()).unwrap()
    };
    let packable = rows(&[&[1, 2, 3, 4, 5, 6], &[2, 3, 4, 5, 6, 1], &[3, 4, 5, 6, 1, 2]]);
    let forbidden = rows(&[&[1, 2, 3, 4, 5], &[2, 3, 1, 5, 4], &[3, 1, 2, 4, 5]]);
    c.bench_function("hall/packable 3x6", |b| b.iter(|| black_box(&packable).is_forbidden()));
    c.bench_function("hall/forbidden 3x5", |b| b.iter(|| black_box(&forbidden).is_forbidden()));
}

fn brute_counts(c: &mut Criterion) {
    let mut g = c.benchmark_group("forbidden count");
    g.sample_size(10);
    for (d, k) in [(3, 4), (3, 5)] {
        g.bench_with_input(BenchmarkId::from_parameter(format!("{d}x{k}")), &(d, k), |b, &(d, k)| {
            b.iter(|| forbidden_count_fixed_first_row(d, k, u64::MAX).unwrap())
        });
    }
    g.finish();
}

fn decider(c: &mut Criterion) {
    let budget = SearchBudget::default();
    let cover = CorrespondenceCover::two_by_two_unpackable();
    let greedy = greedy_unpackable_cover(3, 4).unwrap().cover;
    c.bench_function("decide/two by two", |b| b.iter(|| decide_correspondence_packing(&cover, &budget).unwrap()));
    c.bench_function("decide/greedy 3x18", |b| b.iter(|| decide_correspondence_packing(&greedy, &budget).unwrap()));
}

fn constructions(c: &mut Criterion) {
    let mut g = c.benchmark_group("search");
    g.sample_size(10);
    g.bench_function("greedy d=3 k=4", |b| b.iter(|| greedy_unpackable_cover(3, 4).unwrap()));
    let budget = SearchBudget::default();
    for (kind, a, b) in [(ChiKind::Colouring, 3, 6), (ChiKind::ListPacking, 3, 9)] {
        g.bench_function(format!("chi {kind} {a}x{b}"), |bench| bench.iter(|| chi_exact(kind, a, b, &budget).unwrap()));
    }
    g.finish();
}

fn latin(c: &mut Criterion) {
    c.bench_function("latin/order 5", |b| b.iter(|| count_latin_squares(black_box(5)).unwrap()));
}

criterion_group!(benches, hall_check, brute_counts, decider, constructions, latin);
criterion_main!(benches);
