use criterion::{black_box, criterion_group, criterion_main, Criterion};

use neoplastic_bench::chain_corpus;
use neoplastic_core::diff::build_occurrence_tables;
use neoplastic_core::invariants::mine_invariants;
use neoplastic_core::pipeline::analyze_corpus;
use neoplastic_core::rules::induce_rule;
use neoplastic_core::scene::corpus_feature_stats;
use neoplastic_core::PipelineConfig;

fn bench_occurrence_tables(c: &mut Criterion) {
    let cfg = PipelineConfig::default();
    let corpus = chain_corpus(1, 30);
    let stats = corpus_feature_stats(&corpus);
    c.bench_function("build_occurrence_tables/30", |b| {
        b.iter(|| {
            build_occurrence_tables(black_box(&corpus), &stats, cfg.epsilon, cfg.palette_tol)
                .unwrap()
        })
    });
}

fn bench_rule_induction(c: &mut Criterion) {
    let cfg = PipelineConfig::default();
    let corpus = chain_corpus(2, 2);
    let stats = corpus_feature_stats(&corpus);
    c.bench_function("induce_rule/pair", |b| {
        b.iter(|| {
            induce_rule(
                black_box(&corpus[0]),
                black_box(&corpus[1]),
                &stats,
                cfg.epsilon,
                cfg.palette_tol,
                cfg.iou_min,
                cfg.scope_tau,
            )
            .unwrap()
        })
    });
}

fn bench_mining(c: &mut Criterion) {
    let cfg = PipelineConfig::default();
    let corpus = chain_corpus(3, 30);
    let stats = corpus_feature_stats(&corpus);
    let rules: Vec<_> = corpus
        .windows(2)
        .map(|pair| {
            induce_rule(
                &pair[0],
                &pair[1],
                &stats,
                cfg.epsilon,
                cfg.palette_tol,
                cfg.iou_min,
                cfg.scope_tau,
            )
            .unwrap()
        })
        .collect();
    c.bench_function("mine_invariants/30", |b| {
        b.iter(|| {
            mine_invariants(
                black_box(&corpus),
                black_box(&rules),
                cfg.support_theta,
                cfg.flexibility_k,
                &stats,
                cfg.epsilon,
                cfg.palette_tol,
            )
            .unwrap()
        })
    });
}

fn bench_full_analysis(c: &mut Criterion) {
    let cfg = PipelineConfig::default();
    let corpus = chain_corpus(4, 20);
    c.bench_function("analyze_corpus/20", |b| {
        b.iter(|| analyze_corpus(black_box(&corpus), &cfg).unwrap())
    });
}

criterion_group!(
    benches,
    bench_occurrence_tables,
    bench_rule_induction,
    bench_mining,
    bench_full_analysis
);
criterion_main!(benches);
