//! Score candidate compositions against a mined invariant profile.
//!
//! The score is the fraction of applicable invariants the candidate
//! satisfies; the verdict thresholds it. Rule and co-occurrence invariants
//! only apply in sequence mode (candidate supplied with a declared
//! predecessor); a lone candidate reports them as not applicable rather than
//! silently passing them.

use std::collections::BTreeSet;

use serde_json::{json, Value};

use crate::canon::real;
use crate::config::PipelineConfig;
use crate::diff::{diff_report, OccurrenceTables};
use crate::error::Error;
use crate::invariants::{rule_components, InvariantProfile, RuleItem, StyleFacts};
use crate::rules::induce_rule;
use crate::scene::{Composition, CorpusFeatureStats, Label};

/// Default score threshold for an in-style verdict.
pub const DEFAULT_VERDICT_THRESHOLD: f64 = 0.8;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    InStyle,
    OffStyle,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::InStyle => "in_style",
            Verdict::OffStyle => "off_style",
        }
    }
}

/// Novelty scalars carried over from the candidate's diff report.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoveltySummary {
    pub nearest_similarity: f64,
    pub new_concept_count: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AttributionReport {
    pub candidate_id: String,
    pub satisfied: Vec<String>,
    pub violated: Vec<String>,
    pub not_applicable: Vec<String>,
    pub score: f64,
    pub verdict: Verdict,
    pub novelty: NoveltySummary,
}

impl AttributionReport {
    pub fn to_value(&self) -> Value {
        json!({
            "candidate_id": self.candidate_id,
            "satisfied": self.satisfied,
            "violated": self.violated,
            "not_applicable": self.not_applicable,
            "score": real(self.score),
            "verdict": self.verdict.as_str(),
            "novelty": {
                "nearest_similarity": real(self.novelty.nearest_similarity),
                "new_concepts": self.novelty.new_concept_count,
            },
        })
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{:.6},{},{},{},{:.6},{}\n",
            self.candidate_id,
            self.score,
            self.verdict.as_str(),
            self.satisfied.len(),
            self.violated.len(),
            self.novelty.nearest_similarity,
            self.novelty.new_concept_count
        )
    }
}

fn rule_item_descriptor(item: &RuleItem) -> String {
    format!("{}: {}", item.component().as_str(), item.token())
}

/// Score one candidate against the profile.
///
/// `predecessor` switches on sequence mode: the candidate's change rule
/// against its declared predecessor is induced and the rule/co-occurrence
/// invariants are checked on it. `prefix` is the corpus behind `tables`,
/// needed for the novelty scalars.
pub fn score_candidate(
    c: &Composition,
    predecessor: Option<&Composition>,
    profile: &InvariantProfile,
    tables: &OccurrenceTables,
    prefix: &[Composition],
    stats: &CorpusFeatureStats,
    cfg: &PipelineConfig,
) -> Result<AttributionReport, Error> {
    if profile.style_invariants.is_empty() {
        return Err(Error::EmptyProfile);
    }
    let facts = StyleFacts::of(c, stats, cfg)?;

    let mut satisfied = Vec::new();
    let mut violated = Vec::new();
    let mut not_applicable = Vec::new();

    for (predicate, _) in &profile.style_invariants {
        if predicate.holds(&facts) {
            satisfied.push(predicate.descriptor());
        } else {
            violated.push(predicate.descriptor());
        }
    }

    match predecessor {
        Some(prev) => {
            // Re-anchor ordinals so the pair is consecutive regardless of the
            // candidate's own ordinal.
            let mut p = prev.clone();
            let mut q = c.clone();
            p.ordinal = 0;
            q.ordinal = 1;
            let rule = induce_rule(
                &p,
                &q,
                stats,
                cfg.epsilon,
                cfg.palette_tol,
                cfg.iou_min,
                cfg.scope_tau,
            )?;
            let components = rule_components(&rule);
            let items: BTreeSet<RuleItem> = {
                let mut set = BTreeSet::new();
                for (role, sig) in &components.what {
                    set.insert(RuleItem::What(*role, *sig));
                }
                for ctx in &components.when {
                    set.insert(RuleItem::When(*ctx));
                }
                for tok in &components.how {
                    set.insert(RuleItem::How(tok.clone()));
                }
                set
            };
            for (item, _) in &profile.rule_invariants {
                if items.contains(item) {
                    satisfied.push(rule_item_descriptor(item));
                } else {
                    violated.push(rule_item_descriptor(item));
                }
            }
            for (a, b, _) in &profile.cooccurrence_invariants {
                let descriptor =
                    format!("{} & {}", rule_item_descriptor(a), rule_item_descriptor(b));
                if items.contains(a) && items.contains(b) {
                    satisfied.push(descriptor);
                } else {
                    violated.push(descriptor);
                }
            }
        }
        None => {
            for (item, _) in &profile.rule_invariants {
                not_applicable.push(rule_item_descriptor(item));
            }
            for (a, b, _) in &profile.cooccurrence_invariants {
                not_applicable.push(format!(
                    "{} & {}",
                    rule_item_descriptor(a),
                    rule_item_descriptor(b)
                ));
            }
        }
    }

    let score = satisfied.len() as f64 / (satisfied.len() + violated.len()) as f64;
    let verdict = if score >= cfg.verdict_threshold {
        Verdict::InStyle
    } else {
        Verdict::OffStyle
    };

    let diff = diff_report(
        c,
        tables,
        prefix,
        stats,
        cfg.epsilon,
        cfg.palette_tol,
        cfg.drop_threshold,
    )?;

    Ok(AttributionReport {
        candidate_id: c.id.clone(),
        satisfied,
        violated,
        not_applicable,
        score,
        verdict,
        novelty: NoveltySummary {
            nearest_similarity: diff.nearest_similarity,
            new_concept_count: diff.new_concepts.len(),
        },
    })
}

/// Evaluation of a labeled candidate set: confusion counts, accuracy, and the
/// separation margin (min in-style score minus max off-style score).
#[derive(Clone, Debug, PartialEq)]
pub struct EvalSummary {
    pub accuracy: Option<f64>,
    pub true_pos: u32,
    pub false_pos: u32,
    pub true_neg: u32,
    pub false_neg: u32,
    pub margin: Option<f64>,
    pub reports: Vec<AttributionReport>,
}

impl EvalSummary {
    pub fn to_value(&self) -> Value {
        json!({
            "accuracy": self.accuracy.map(real).unwrap_or(Value::Null),
            "confusion": {
                "tp": self.true_pos,
                "fp": self.false_pos,
                "tn": self.true_neg,
                "fn": self.false_neg,
            },
            "margin": self.margin.map(real).unwrap_or(Value::Null),
            "reports": self.reports.iter().map(AttributionReport::to_value).collect::<Vec<_>>(),
        })
    }
}

/// Score every labeled candidate (lone mode) and summarize. Candidates must
/// be labeled `in_style` or `off_style`.
pub fn evaluate_labeled_corpus(
    candidates: &[Composition],
    profile: &InvariantProfile,
    tables: &OccurrenceTables,
    prefix: &[Composition],
    stats: &CorpusFeatureStats,
    cfg: &PipelineConfig,
) -> Result<EvalSummary, Error> {
    let mut reports = Vec::with_capacity(candidates.len());
    let (mut tp, mut fp, mut tn, mut fn_) = (0u32, 0u32, 0u32, 0u32);
    let mut min_in: Option<f64> = None;
    let mut max_off: Option<f64> = None;

    for c in candidates {
        let label = match c.label {
            Some(Label::InStyle) => Label::InStyle,
            Some(Label::OffStyle) => Label::OffStyle,
            _ => {
                return Err(Error::UnlabeledCandidate { id: c.id.clone() });
            }
        };
        let report = score_candidate(c, None, profile, tables, prefix, stats, cfg)?;
        match (label, report.verdict) {
            (Label::InStyle, Verdict::InStyle) => tp += 1,
            (Label::InStyle, Verdict::OffStyle) => fn_ += 1,
            (Label::OffStyle, Verdict::OffStyle) => tn += 1,
            (Label::OffStyle, Verdict::InStyle) => fp += 1,
            _ => unreachable!("label restricted above"),
        }
        match label {
            Label::InStyle => {
                min_in = Some(min_in.map_or(report.score, |m: f64| m.min(report.score)));
            }
            Label::OffStyle => {
                max_off = Some(max_off.map_or(report.score, |m: f64| m.max(report.score)));
            }
            Label::Unknown => unreachable!(),
        }
        reports.push(report);
    }

    let total = candidates.len() as u32;
    Ok(EvalSummary {
        accuracy: (total > 0).then(|| (tp + tn) as f64 / total as f64),
        true_pos: tp,
        false_pos: fp,
        true_neg: tn,
        false_neg: fn_,
        margin: match (min_in, max_off) {
            (Some(a), Some(b)) => Some(a - b),
            _ => None,
        },
        reports,
    })
}

impl StyleFacts {
    fn of(
        c: &Composition,
        stats: &CorpusFeatureStats,
        cfg: &PipelineConfig,
    ) -> Result<StyleFacts, Error> {
        crate::invariants::style_facts(c, stats, cfg.epsilon, cfg.palette_tol)
    }
}
