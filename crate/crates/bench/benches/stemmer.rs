use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use gacrf_core::stemmer::AffixLexicon;

fn stemming(c: &mut Criterion) {
    let lex = AffixLexicon::load(
        include_str!("../../../data/prefixes_list.txt").as_bytes(),
        include_str!("../../../data/suffixes_list.txt").as_bytes(),
    )
    .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let words: Vec<String> = (0..1000)
        .map(|_| {
            let mut w = String::new();
            if rng.random_bool(0.3) {
                w.push_str(&lex.prefixes()[rng.random_range(0..lex.prefixes().len())]);
            }
            w.push_str("পুলৈ");
            for _ in 0..rng.random_range(0..6) {
                w.push_str(&lex.suffixes()[rng.random_range(0..lex.suffixes().len())]);
            }
            w
        })
        .collect();
    c.bench_function("stem 1000 words", |b| {
        b.iter(|| {
            for w in &words {
                black_box(lex.stem(w, 1));
            }
        })
    });
}

criterion_group!(benches, stemming);
criterion_main!(benches);
