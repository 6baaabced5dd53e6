//! Change-rule induction between consecutive compositions.
//!
//! Elements of the two paintings are matched greedily by geometric IoU
//! (same-kind pairs only, lines via their thickness-expanded rects). Matched
//! pairs with equal signatures form the rule's kept context, matched pairs
//! with different signatures become modify atoms, and the unmatched leftovers
//! become eliminate/add atoms. Atom lists are kept in a canonical order so a
//! rule serializes identically regardless of input element order.

use std::collections::{BTreeMap, BTreeSet};

use serde_json::{json, Value};

use crate::diff::multiset_jaccard;
use crate::error::Error;
use crate::scene::{
    signature_multiset, Composition, ConceptSignature, CorpusFeatureStats, RelKind,
};

/// Default minimum IoU for two elements to be considered the same element.
pub const DEFAULT_IOU_MIN: f64 = 0.5;

/// Default fraction of canvas area a rule must touch to count as global.
pub const DEFAULT_SCOPE_TAU: f64 = 0.30;

// ---------------------------------------------------------------------------
// Atomic changes
// ---------------------------------------------------------------------------

/// One signature-level change between consecutive paintings. `locus` is the
/// 3x3 position cell of the affected element (the pre-change element for
/// eliminations and modifications).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AtomicChange {
    Eliminate {
        sig_before: ConceptSignature,
        locus: u8,
    },
    Modify {
        sig_before: ConceptSignature,
        sig_after: ConceptSignature,
        locus: u8,
    },
    Add {
        sig_after: ConceptSignature,
        locus: u8,
    },
}

impl AtomicChange {
    pub fn op_str(&self) -> &'static str {
        match self {
            AtomicChange::Eliminate { .. } => "eliminate",
            AtomicChange::Modify { .. } => "modify",
            AtomicChange::Add { .. } => "add",
        }
    }

    pub fn locus(&self) -> u8 {
        match self {
            AtomicChange::Eliminate { locus, .. }
            | AtomicChange::Modify { locus, .. }
            | AtomicChange::Add { locus, .. } => *locus,
        }
    }

    /// The signature the ordering keys on (pre-change where one exists).
    fn key_sig(&self) -> &ConceptSignature {
        match self {
            AtomicChange::Eliminate { sig_before, .. } => sig_before,
            AtomicChange::Modify { sig_before, .. } => sig_before,
            AtomicChange::Add { sig_after, .. } => sig_after,
        }
    }

    fn class_rank(&self) -> u8 {
        match self {
            AtomicChange::Eliminate { .. } => 0,
            AtomicChange::Modify { .. } => 1,
            AtomicChange::Add { .. } => 2,
        }
    }

    /// Canonical token, e.g. `add:line|H|large|4|black|both_ends` or
    /// `modify:region|-|small|2|red|interior->region|-|small|2|blue|interior`.
    pub fn token(&self) -> String {
        match self {
            AtomicChange::Eliminate { sig_before, .. } => format!("eliminate:{sig_before}"),
            AtomicChange::Modify {
                sig_before,
                sig_after,
                ..
            } => format!("modify:{sig_before}->{sig_after}"),
            AtomicChange::Add { sig_after, .. } => format!("add:{sig_after}"),
        }
    }

    pub fn to_value(&self) -> Value {
        let mut map = serde_json::Map::new();
        map.insert("op".into(), json!(self.op_str()));
        map.insert("locus".into(), json!(self.locus()));
        match self {
            AtomicChange::Eliminate { sig_before, .. } => {
                map.insert("sig_before".into(), json!(sig_before.token()));
            }
            AtomicChange::Modify {
                sig_before,
                sig_after,
                ..
            } => {
                map.insert("sig_before".into(), json!(sig_before.token()));
                map.insert("sig_after".into(), json!(sig_after.token()));
            }
            AtomicChange::Add { sig_after, .. } => {
                map.insert("sig_after".into(), json!(sig_after.token()));
            }
        }
        Value::Object(map)
    }
}

/// Canonical atom order: eliminations, then modifications, then additions;
/// within a class by (locus row, locus col, kind, color class), with the full
/// token as the final tie-break so the order is total.
pub fn sort_changes_canonical(changes: &mut [AtomicChange]) {
    changes.sort_by_key(|a| {
        let s = a.key_sig();
        (
            a.class_rank(),
            a.locus() / 3,
            a.locus() % 3,
            s.kind,
            s.color_class,
            a.token(),
        )
    });
}

// ---------------------------------------------------------------------------
// Change rules
// ---------------------------------------------------------------------------

/// An item kept across both paintings of a rule: a signature present on both
/// sides, or a relation kind observed in both.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ContextItem {
    Signature(ConceptSignature),
    Relation(RelKind),
}

impl ContextItem {
    pub fn token(&self) -> String {
        match self {
            ContextItem::Signature(s) => format!("sig:{s}"),
            ContextItem::Relation(k) => format!("rel:{}", k.as_str()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scope {
    Global,
    Local,
}

impl Scope {
    pub fn as_str(&self) -> &'static str {
        match self {
            Scope::Global => "global",
            Scope::Local => "local",
        }
    }
}

/// The induced rule between Painting(t-1) and Painting(t).
///
/// `stochastic` is reserved (always false): nothing in a single pair of
/// paintings estimates it, but the field keeps the serialized form stable for
/// future estimators.
#[derive(Clone, Debug, PartialEq)]
pub struct ChangeRule {
    pub t_prev: u32,
    pub t_curr: u32,
    pub changes: Vec<AtomicChange>,
    pub when_context: BTreeSet<ContextItem>,
    pub scope: Scope,
    pub stochastic: bool,
}

impl ChangeRule {
    pub fn is_empty(&self) -> bool {
        self.changes.is_empty()
    }

    pub fn to_value(&self) -> Value {
        json!({
            "t_prev": self.t_prev,
            "t_curr": self.t_curr,
            "changes": self.changes.iter().map(AtomicChange::to_value).collect::<Vec<_>>(),
            "when_context": self.when_context.iter().map(ContextItem::token).collect::<Vec<_>>(),
            "scope": self.scope.as_str(),
            "stochastic": self.stochastic,
        })
    }
}

// ---------------------------------------------------------------------------
// Element matching
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatchResult {
    /// Matched (prev index, curr index) pairs, in greedy pick order.
    pub matches: Vec<(usize, usize)>,
    pub unmatched_prev: Vec<usize>,
    pub unmatched_curr: Vec<usize>,
}

/// Greedy same-kind matching by descending footprint IoU.
///
/// Pairs below `iou_min` never match; ties break on (prev index, curr index).
/// Greedy is deterministic and cheap; an exhaustive max-first oracle agrees
/// with it on small instances (see tests).
pub fn match_elements(prev: &Composition, curr: &Composition, iou_min: f64) -> MatchResult {
    let mut candidates: Vec<(f64, usize, usize)> = Vec::new();
    for (i, a) in prev.elements.iter().enumerate() {
        for (j, b) in curr.elements.iter().enumerate() {
            if a.kind() != b.kind() {
                continue;
            }
            let iou = a.footprint().iou(&b.footprint());
            if iou >= iou_min {
                candidates.push((iou, i, j));
            }
        }
    }
    candidates.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut prev_taken = vec![false; prev.elements.len()];
    let mut curr_taken = vec![false; curr.elements.len()];
    let mut matches = Vec::new();
    for (_, i, j) in candidates {
        if !prev_taken[i] && !curr_taken[j] {
            prev_taken[i] = true;
            curr_taken[j] = true;
            matches.push((i, j));
        }
    }
    let unmatched = |taken: &[bool]| {
        taken
            .iter()
            .enumerate()
            .filter(|(_, t)| !**t)
            .map(|(i, _)| i)
            .collect::<Vec<_>>()
    };
    MatchResult {
        matches,
        unmatched_prev: unmatched(&prev_taken),
        unmatched_curr: unmatched(&curr_taken),
    }
}

// ---------------------------------------------------------------------------
// Rule induction
// ---------------------------------------------------------------------------

/// Induce the change rule from `prev` to `curr` (consecutive ordinals).
pub fn induce_rule(
    prev: &Composition,
    curr: &Composition,
    stats: &CorpusFeatureStats,
    eps: f64,
    palette_tol: u8,
    iou_min: f64,
    scope_tau: f64,
) -> Result<ChangeRule, Error> {
    if curr.ordinal != prev.ordinal + 1 {
        return Err(Error::OrdinalGap {
            t_prev: prev.ordinal,
            t_curr: curr.ordinal,
        });
    }
    let sig_prev = signature_multiset(prev, stats, eps, palette_tol)?;
    let sig_curr = signature_multiset(curr, stats, eps, palette_tol)?;
    let mr = match_elements(prev, curr, iou_min);

    let mut changes = Vec::new();
    let mut kept: BTreeSet<ConceptSignature> = BTreeSet::new();
    let mut affected_area = 0.0;

    for &(i, j) in &mr.matches {
        if sig_prev[i] == sig_curr[j] {
            kept.insert(sig_prev[i]);
        } else {
            changes.push(AtomicChange::Modify {
                sig_before: sig_prev[i],
                sig_after: sig_curr[j],
                locus: sig_prev[i].position_cell,
            });
            affected_area += prev.elements[i].area().max(curr.elements[j].area());
        }
    }
    for &i in &mr.unmatched_prev {
        changes.push(AtomicChange::Eliminate {
            sig_before: sig_prev[i],
            locus: sig_prev[i].position_cell,
        });
        affected_area += prev.elements[i].area();
    }
    for &j in &mr.unmatched_curr {
        changes.push(AtomicChange::Add {
            sig_after: sig_curr[j],
            locus: sig_curr[j].position_cell,
        });
        affected_area += curr.elements[j].area();
    }
    sort_changes_canonical(&mut changes);

    // Kept context must not overlap eliminated signatures.
    for atom in &changes {
        if let AtomicChange::Eliminate { sig_before, .. } = atom {
            kept.remove(sig_before);
        }
    }
    let mut when_context: BTreeSet<ContextItem> =
        kept.into_iter().map(ContextItem::Signature).collect();
    let rel_prev: BTreeSet<RelKind> = crate::scene::extract_relations(prev, eps, palette_tol)
        .into_iter()
        .map(|r| r.relkind)
        .collect();
    let rel_curr: BTreeSet<RelKind> = crate::scene::extract_relations(curr, eps, palette_tol)
        .into_iter()
        .map(|r| r.relkind)
        .collect();
    for kind in rel_prev.intersection(&rel_curr) {
        when_context.insert(ContextItem::Relation(*kind));
    }

    let scope = if affected_area / curr.canvas.area() >= scope_tau {
        Scope::Global
    } else {
        Scope::Local
    };

    Ok(ChangeRule {
        t_prev: prev.ordinal,
        t_curr: curr.ordinal,
        changes,
        when_context,
        scope,
        stochastic: false,
    })
}

/// Apply a rule's atoms to a signature multiset.
///
/// Returns `None` if an elimination or modification refers to a signature the
/// multiset does not contain. For a rule induced from `(prev, curr)` the
/// result over prev's multiset is exactly curr's multiset.
pub fn apply_to_multiset(
    multiset: &BTreeMap<ConceptSignature, u32>,
    changes: &[AtomicChange],
) -> Option<BTreeMap<ConceptSignature, u32>> {
    let mut out = multiset.clone();
    let take = |sig: &ConceptSignature, out: &mut BTreeMap<ConceptSignature, u32>| match out
        .get_mut(sig)
    {
        Some(n) if *n > 1 => {
            *n -= 1;
            true
        }
        Some(_) => {
            out.remove(sig);
            true
        }
        None => false,
    };
    for atom in changes {
        match atom {
            AtomicChange::Eliminate { sig_before, .. } => {
                if !take(sig_before, &mut out) {
                    return None;
                }
            }
            AtomicChange::Modify {
                sig_before,
                sig_after,
                ..
            } => {
                if !take(sig_before, &mut out) {
                    return None;
                }
                *out.entry(*sig_after).or_insert(0) += 1;
            }
            AtomicChange::Add { sig_after, .. } => {
                *out.entry(*sig_after).or_insert(0) += 1;
            }
        }
    }
    Some(out)
}

// ---------------------------------------------------------------------------
// Rule relatedness and usage timeline
// ---------------------------------------------------------------------------

fn added_multiset(r: &ChangeRule) -> BTreeMap<ConceptSignature, u32> {
    let mut m = BTreeMap::new();
    for atom in &r.changes {
        match atom {
            AtomicChange::Add { sig_after, .. } | AtomicChange::Modify { sig_after, .. } => {
                *m.entry(*sig_after).or_insert(0) += 1;
            }
            AtomicChange::Eliminate { .. } => {}
        }
    }
    m
}

fn eliminated_multiset(r: &ChangeRule) -> BTreeMap<ConceptSignature, u32> {
    let mut m = BTreeMap::new();
    for atom in &r.changes {
        match atom {
            AtomicChange::Eliminate { sig_before, .. }
            | AtomicChange::Modify { sig_before, .. } => {
                *m.entry(*sig_before).or_insert(0) += 1;
            }
            AtomicChange::Add { .. } => {}
        }
    }
    m
}

/// Mean multiset Jaccard over (added signatures, eliminated signatures, kept
/// context). Empty-vs-empty components contribute 1.
pub fn rule_relatedness(a: &ChangeRule, b: &ChangeRule) -> f64 {
    let ctx = |r: &ChangeRule| -> BTreeMap<ContextItem, u32> {
        r.when_context.iter().map(|item| (*item, 1)).collect()
    };
    let j_add = multiset_jaccard(&added_multiset(a), &added_multiset(b));
    let j_del = multiset_jaccard(&eliminated_multiset(a), &eliminated_multiset(b));
    let j_ctx = multiset_jaccard(&ctx(a), &ctx(b));
    (j_add + j_del + j_ctx) / 3.0
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TimelineKey {
    AddSignature,
    EliminateSignature,
}

/// For each signature, the ordinals (t_curr) of the rules that add or
/// eliminate it. Rules are expected in ordinal order, so the lists are
/// strictly increasing.
pub fn rule_usage_timeline(
    rules: &[ChangeRule],
    key: TimelineKey,
) -> BTreeMap<ConceptSignature, Vec<u32>> {
    let mut out: BTreeMap<ConceptSignature, Vec<u32>> = BTreeMap::new();
    for rule in rules {
        let sigs = match key {
            TimelineKey::AddSignature => added_multiset(rule),
            TimelineKey::EliminateSignature => eliminated_multiset(rule),
        };
        for sig in sigs.keys() {
            let entry = out.entry(*sig).or_default();
            if entry.last() != Some(&rule.t_curr) {
                entry.push(rule.t_curr);
            }
        }
    }
    out
}

/// JSON value for step2 reports.
pub fn rules_value(rules: &[ChangeRule]) -> Value {
    json!({ "rules": rules.iter().map(ChangeRule::to_value).collect::<Vec<_>>() })
}
