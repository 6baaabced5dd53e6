//! Full-pipeline orchestration: validate, feature stats, cues, prefix-based
//! diffing, rule induction, invariant mining, and optional candidate scoring,
//! assembled into a single canonical report value.
//!
//! Step 1 uses chronological prefix semantics: painting t is diffed against
//! paintings 0..t only. Reports are deterministic: identical inputs produce
//! byte-identical documents.

use std::path::Path;

use serde_json::{json, Map, Value};

use crate::attribution::{
    evaluate_labeled_corpus, score_candidate, AttributionReport, EvalSummary,
};
use crate::canon::real;
use crate::config::PipelineConfig;
use crate::corpus::load_corpus;
use crate::cues::{compute_cues, rank_cues, CueProfile};
use crate::diff::{diff_report, signature_set, DiffReport, OccurrenceTables};
use crate::error::Error;
use crate::invariants::{mine_invariants, InvariantProfile};
use crate::rules::{induce_rule, rules_value, ChangeRule};
use crate::scene::{
    corpus_feature_stats, validate_composition, Composition, CorpusFeatureStats, Label, Violation,
};

/// Everything the analysis computes for one corpus.
#[derive(Clone, Debug)]
pub struct CorpusAnalysis {
    pub stats: CorpusFeatureStats,
    pub validations: Vec<Vec<Violation>>,
    pub cues: Vec<CueProfile>,
    pub step1: Vec<DiffReport>,
    pub rules: Vec<ChangeRule>,
    pub profile: InvariantProfile,
    pub tables: OccurrenceTables,
}

/// Run steps 1-3 over an ordinal-ordered corpus.
pub fn analyze_corpus(
    corpus: &[Composition],
    cfg: &PipelineConfig,
) -> Result<CorpusAnalysis, Error> {
    let stats = corpus_feature_stats(corpus);

    let validations: Vec<Vec<Violation>> = corpus
        .iter()
        .map(|c| validate_composition(c, true, cfg.palette_tol))
        .collect();

    let in_context = |e: Error, c: &Composition| e.in_file(c.id.clone());

    let mut cues = Vec::with_capacity(corpus.len());
    for c in corpus {
        cues.push(
            compute_cues(c, &stats, cfg.epsilon, cfg.palette_tol).map_err(|e| in_context(e, c))?,
        );
    }

    let mut tables = OccurrenceTables::new();
    let mut step1 = Vec::with_capacity(corpus.len());
    for (t, c) in corpus.iter().enumerate() {
        let report = diff_report(
            c,
            &tables,
            &corpus[..t],
            &stats,
            cfg.epsilon,
            cfg.palette_tol,
            cfg.drop_threshold,
        )
        .map_err(|e| in_context(e, c))?;
        step1.push(report);
        let set =
            signature_set(c, &stats, cfg.epsilon, cfg.palette_tol).map_err(|e| in_context(e, c))?;
        tables.add_painting(&set);
    }

    let mut rules = Vec::new();
    for pair in corpus.windows(2) {
        rules.push(induce_rule(
            &pair[0],
            &pair[1],
            &stats,
            cfg.epsilon,
            cfg.palette_tol,
            cfg.iou_min,
            cfg.scope_tau,
        )?);
    }

    let profile = mine_invariants(
        corpus,
        &rules,
        cfg.support_theta,
        cfg.flexibility_k,
        &stats,
        cfg.epsilon,
        cfg.palette_tol,
    )?;

    Ok(CorpusAnalysis {
        stats,
        validations,
        cues,
        step1,
        rules,
        profile,
        tables,
    })
}

/// Candidate scoring results: per-candidate reports (lone mode), plus an
/// evaluation summary when every candidate carries an in/off label.
#[derive(Clone, Debug)]
pub struct ScoredCandidates {
    pub reports: Vec<AttributionReport>,
    pub summary: Option<EvalSummary>,
}

pub fn score_candidate_set(
    candidates: &[Composition],
    corpus: &[Composition],
    analysis: &CorpusAnalysis,
    cfg: &PipelineConfig,
) -> Result<ScoredCandidates, Error> {
    let all_labeled = !candidates.is_empty()
        && candidates
            .iter()
            .all(|c| matches!(c.label, Some(Label::InStyle) | Some(Label::OffStyle)));
    if all_labeled {
        let summary = evaluate_labeled_corpus(
            candidates,
            &analysis.profile,
            &analysis.tables,
            corpus,
            &analysis.stats,
            cfg,
        )?;
        Ok(ScoredCandidates {
            reports: summary.reports.clone(),
            summary: Some(summary),
        })
    } else {
        let mut reports = Vec::with_capacity(candidates.len());
        for c in candidates {
            reports.push(score_candidate(
                c,
                None,
                &analysis.profile,
                &analysis.tables,
                corpus,
                &analysis.stats,
                cfg,
            )?);
        }
        Ok(ScoredCandidates {
            reports,
            summary: None,
        })
    }
}

fn violation_value(v: &Violation) -> Value {
    json!({
        "element": v.element.map(|i| json!(i)).unwrap_or(Value::Null),
        "kind": v.kind.as_str(),
    })
}

pub fn stats_value(stats: &CorpusFeatureStats) -> Value {
    json!({
        "area_terciles": [real(stats.area_terciles.0), real(stats.area_terciles.1)],
        "fallback": stats.fallback,
    })
}

/// Assemble the single-run report document.
pub fn report_value(
    artist: &str,
    corpus: &[Composition],
    analysis: &CorpusAnalysis,
    scored: Option<&ScoredCandidates>,
    cfg: &PipelineConfig,
) -> Value {
    let mut root = Map::new();
    root.insert("artist".into(), json!(artist));
    root.insert("config".into(), cfg.to_value());
    root.insert("feature_stats".into(), stats_value(&analysis.stats));

    root.insert(
        "validation".into(),
        Value::Array(
            corpus
                .iter()
                .zip(&analysis.validations)
                .map(|(c, violations)| {
                    json!({
                        "id": c.id,
                        "ordinal": c.ordinal,
                        "violations": violations.iter().map(violation_value).collect::<Vec<_>>(),
                    })
                })
                .collect(),
        ),
    );

    root.insert(
        "cues".into(),
        Value::Array(
            corpus
                .iter()
                .zip(&analysis.cues)
                .map(|(c, profile)| {
                    json!({
                        "id": c.id,
                        "ordinal": c.ordinal,
                        "cues": profile.to_value(),
                        "ranked": rank_cues(profile, &cfg.cue_norms),
                    })
                })
                .collect(),
        ),
    );

    root.insert(
        "step1".into(),
        Value::Array(
            corpus
                .iter()
                .zip(&analysis.step1)
                .map(|(c, report)| {
                    json!({
                        "id": c.id,
                        "ordinal": c.ordinal,
                        "report": report.to_value(),
                    })
                })
                .collect(),
        ),
    );

    root.insert("step2".into(), rules_value(&analysis.rules));
    root.insert("step3".into(), analysis.profile.to_value());

    if let Some(scored) = scored {
        root.insert(
            "attribution".into(),
            json!({
                "reports": scored
                    .reports
                    .iter()
                    .map(AttributionReport::to_value)
                    .collect::<Vec<_>>(),
                "summary": scored
                    .summary
                    .as_ref()
                    .map(EvalSummary::to_value)
                    .unwrap_or(Value::Null),
            }),
        );
    }

    Value::Object(root)
}

/// Load a corpus (and optional candidate manifest), run the full pipeline,
/// and return the report value.
pub fn run_pipeline(
    manifest_path: &Path,
    candidates_path: Option<&Path>,
    cfg: &PipelineConfig,
) -> Result<Value, Error> {
    let corpus = load_corpus(manifest_path)?;
    let analysis = analyze_corpus(&corpus.compositions, cfg)?;
    let scored = match candidates_path {
        Some(path) => {
            let candidates = load_corpus(path)?;
            Some(score_candidate_set(
                &candidates.compositions,
                &corpus.compositions,
                &analysis,
                cfg,
            )?)
        }
        None => None,
    };
    Ok(report_value(
        &corpus.artist,
        &corpus.compositions,
        &analysis,
        scored.as_ref(),
        cfg,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canon::to_canonical_json;
    use crate::synth::{gen_neoplastic, perturb, sample_ops, GenParams};

    fn chain(seed: u64, len: usize) -> Vec<Composition> {
        let cfg = PipelineConfig::default();
        let mut out = vec![gen_neoplastic(&GenParams::new(seed)).unwrap()];
        for step in 1..len {
            let prev = out.last().unwrap();
            let stats = corpus_feature_stats(std::slice::from_ref(prev));
            let ops = sample_ops(prev, 2, seed.wrapping_add(step as u64));
            let (mut next, _) = perturb(prev, &ops, &stats, cfg.epsilon, cfg.palette_tol).unwrap();
            next.id = format!("chain-{seed}-{step}");
            out.push(next);
        }
        for (i, c) in out.iter_mut().enumerate() {
            c.ordinal = i as u32;
        }
        out
    }

    #[test]
    fn two_painting_corpus_has_one_rule() {
        let corpus = chain(5, 2);
        let analysis = analyze_corpus(&corpus, &PipelineConfig::default()).unwrap();
        assert_eq!(analysis.rules.len(), 1);
        assert_eq!(analysis.step1.len(), 2);
        assert!(analysis.step1[0].empty_corpus);
        assert!(!analysis.step1[1].empty_corpus);
    }

    #[test]
    fn report_is_deterministic() {
        let corpus = chain(9, 4);
        let cfg = PipelineConfig::default();
        let a = analyze_corpus(&corpus, &cfg).unwrap();
        let b = analyze_corpus(&corpus, &cfg).unwrap();
        let ra = to_canonical_json(&report_value("m", &corpus, &a, None, &cfg));
        let rb = to_canonical_json(&report_value("m", &corpus, &b, None, &cfg));
        assert_eq!(ra, rb);
    }
}
