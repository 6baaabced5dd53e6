//! Benchmark helpers: seeded corpora shared by the criterion targets.

use neoplastic_core::scene::{corpus_feature_stats, Composition};
use neoplastic_core::synth::{gen_neoplastic, perturb, sample_ops, GenParams};
use neoplastic_core::PipelineConfig;

/// A deterministic perturbation chain of `len` compositions.
pub fn chain_corpus(seed: u64, len: usize) -> Vec<Composition> {
    let cfg = PipelineConfig::default();
    let mut out = vec![gen_neoplastic(&GenParams::new(seed)).expect("valid params")];
    for step in 1..len {
        let prev = out.last().expect("non-empty");
        let stats = corpus_feature_stats(std::slice::from_ref(prev));
        let ops = sample_ops(prev, 2, seed.wrapping_mul(131).wrapping_add(step as u64));
        let (next, _) =
            perturb(prev, &ops, &stats, cfg.epsilon, cfg.palette_tol).expect("sampled ops apply");
        out.push(next);
    }
    for (i, c) in out.iter_mut().enumerate() {
        c.ordinal = i as u32;
        c.id = format!("bench-{seed}-{i}");
    }
    out
}
