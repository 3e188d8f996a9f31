use std::hint::black_box;
use std::rc::Rc;

use criterion::{criterion_group, criterion_main, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use tracegen_bench::{chain_hierarchy, corpus_dir, type_corpus};
use tracegen_core::driver::{run, RunConfig};
use tracegen_core::host::{Builtins, Interp, Loader, TypeMap};
use tracegen_core::inference::{draw_choice, SelectionWeights};

fn consistency(c: &mut Criterion) {
    let h = chain_hierarchy(30);
    let types = type_corpus(&h, 64);
    c.bench_function("is_consistent 64x64", |b| {
        b.iter(|| {
            let mut n = 0usize;
            for s in &types {
                for t in &types {
                    n += h.is_consistent(black_box(s), black_box(t)) as usize;
                }
            }
            n
        })
    });
    c.bench_function("unify 64", |b| {
        b.iter(|| types.iter().map(|t| h.unify(black_box(t))).collect::<Vec<_>>())
    });
}

fn selection(c: &mut Criterion) {
    let w = SelectionWeights::default();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    c.bench_function("draw_choice", |b| b.iter(|| draw_choice(true, true, black_box(&w), &mut rng)));
}

fn host(c: &mut Criterion) {
    let loader = Rc::new(Loader::new(corpus_dir(), true));
    let builtins = Rc::new(Builtins::new());
    let types = Rc::new(TypeMap::default());
    c.bench_function("import pyast", |b| {
        b.iter(|| {
            let mut it = Interp::new(builtins.clone(), loader.clone(), types.clone());
            it.import_module("pyast").is_ok()
        })
    });
}

fn search(c: &mut Criterion) {
    let mut group = c.benchmark_group("search");
    group.sample_size(10);
    for p in [0.0, 0.05, 1.0] {
        group.bench_function(format!("visit_classdef 10 generations p={p}"), |b| {
            b.iter(|| {
                let mut cfg = RunConfig::new("visit_classdef", corpus_dir());
                cfg.use_annotations = false;
                cfg.proxy_probability = p;
                cfg.max_generations = Some(10);
                run(&cfg).expect("corpus module runs").final_coverage
            })
        });
    }
    group.finish();
}

criterion_group!(benches, consistency, selection, host, search);
criterion_main!(benches);
