//! Rule components (what / when / how / flexibility) and invariant mining
//! across a rule trace.
//!
//! Style invariants come from a fixed, enumerable predicate vocabulary
//! evaluated per painting; rule invariants are (component, item) pairs whose
//! support over non-empty rules clears the threshold; co-occurrence
//! invariants are pairs of kept items from different components. "Tends to
//! remain constant" is operationalized as support >= theta.

use std::collections::{BTreeMap, BTreeSet};

use serde_json::{json, Value};

use crate::canon::real;
use crate::error::Error;
use crate::rules::{AtomicChange, ChangeRule, ContextItem};
use crate::scene::{
    extract_relations, signature_multiset, ColorClass, Composition, ConceptSignature,
    CorpusFeatureStats, ElementKind, OrientationClass, PaletteClass, RelKind,
};

/// Default support threshold for keeping an invariant.
pub const DEFAULT_SUPPORT_THETA: f64 = 0.9;

/// Default neighbourhood size for flexibility scoring.
pub const DEFAULT_FLEXIBILITY_K: usize = 3;

// ---------------------------------------------------------------------------
// Rule components
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Role {
    Added,
    Eliminated,
}

impl Role {
    pub fn as_str(&self) -> &'static str {
        match self {
            Role::Added => "added",
            Role::Eliminated => "eliminated",
        }
    }
}

/// The four components of a rule. Flexibility is scored separately against
/// prior rules and is `None` until then.
#[derive(Clone, Debug, PartialEq)]
pub struct RuleComponents {
    pub what: BTreeSet<(Role, ConceptSignature)>,
    pub when: BTreeSet<ContextItem>,
    /// Canonical token sequence of the rule's atomic changes.
    pub how: Vec<String>,
    pub flexibility: Option<f64>,
}

/// Split a rule into its components. Modify atoms contribute to `what` under
/// both roles (the old signature was eliminated, the new one added).
pub fn rule_components(r: &ChangeRule) -> RuleComponents {
    let mut what = BTreeSet::new();
    for atom in &r.changes {
        match atom {
            AtomicChange::Add { sig_after, .. } => {
                what.insert((Role::Added, *sig_after));
            }
            AtomicChange::Eliminate { sig_before, .. } => {
                what.insert((Role::Eliminated, *sig_before));
            }
            AtomicChange::Modify {
                sig_before,
                sig_after,
                ..
            } => {
                what.insert((Role::Eliminated, *sig_before));
                what.insert((Role::Added, *sig_after));
            }
        }
    }
    RuleComponents {
        what,
        when: r.when_context.clone(),
        how: r.changes.iter().map(AtomicChange::token).collect(),
        flexibility: None,
    }
}

/// Token-level Levenshtein distance between two change sequences.
pub fn levenshtein(a: &[String], b: &[String]) -> usize {
    if a.is_empty() {
        return b.len();
    }
    if b.is_empty() {
        return a.len();
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut curr = vec![0usize; b.len() + 1];
    for (i, ta) in a.iter().enumerate() {
        curr[0] = i + 1;
        for (j, tb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(ta != tb);
            curr[j + 1] = sub.min(prev[j + 1] + 1).min(curr[j] + 1);
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    prev[b.len()]
}

/// Normalized similarity of two how-sequences; two empty sequences are
/// identical (1).
pub fn how_similarity(a: &[String], b: &[String]) -> f64 {
    let max_len = a.len().max(b.len());
    if max_len == 0 {
        return 1.0;
    }
    1.0 - levenshtein(a, b) as f64 / max_len as f64
}

/// Flexibility of a rule against its `k` most similar prior rules: 1 minus
/// the mean similarity over that selection. Ties prefer earlier rules; an
/// empty prior yields 0 by convention.
pub fn flexibility(r: &RuleComponents, prior: &[RuleComponents], k: usize) -> f64 {
    if prior.is_empty() || k == 0 {
        return 0.0;
    }
    let mut sims: Vec<(f64, usize)> = prior
        .iter()
        .enumerate()
        .map(|(i, p)| (how_similarity(&r.how, &p.how), i))
        .collect();
    sims.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let take = k.min(sims.len());
    let mean: f64 = sims[..take].iter().map(|(s, _)| s).sum::<f64>() / take as f64;
    (1.0 - mean).clamp(0.0, 1.0)
}

// ---------------------------------------------------------------------------
// Style predicates
// ---------------------------------------------------------------------------

/// Per-painting facts the style predicates are evaluated on.
#[derive(Clone, Debug, PartialEq)]
pub struct StyleFacts {
    pub orientation_classes: BTreeSet<OrientationClass>,
    pub color_classes: BTreeSet<ColorClass>,
    pub kinds: BTreeSet<ElementKind>,
    pub opposition_count: u32,
    pub unfinished_line_count: u32,
    pub granularity: u32,
}

pub fn style_facts(
    c: &Composition,
    stats: &CorpusFeatureStats,
    eps: f64,
    palette_tol: u8,
) -> Result<StyleFacts, Error> {
    let sigs = signature_multiset(c, stats, eps, palette_tol)?;
    let opposition_count = extract_relations(c, eps, palette_tol)
        .iter()
        .filter(|r| r.relkind == RelKind::ColorOpposition)
        .count() as u32;
    Ok(StyleFacts {
        orientation_classes: sigs.iter().filter_map(|s| s.orientation_class).collect(),
        color_classes: sigs.iter().map(|s| s.color_class).collect(),
        kinds: sigs.iter().map(|s| s.kind).collect(),
        opposition_count,
        unfinished_line_count: sigs
            .iter()
            .filter(|s| {
                s.kind == ElementKind::Line
                    && s.boundary_contact != crate::scene::BoundaryContact::BothEnds
            })
            .count() as u32,
        granularity: c.elements.len() as u32,
    })
}

/// The closed style-predicate vocabulary.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum StylePredicate {
    /// The painting's line orientation classes are a subset of `S`.
    OrientationSubset(BTreeSet<OrientationClass>),
    /// The painting's color classes are a subset of `S` (off-palette colors
    /// satisfy no color predicate).
    ColorSubset(BTreeSet<PaletteClass>),
    HasOpposition,
    NoUnfinishedLines,
    /// Element count within the band observed on the mining corpus.
    GranularityInBand {
        min: u32,
        max: u32,
    },
    /// The painting's element kinds are a subset of `S`.
    KindSubset(BTreeSet<ElementKind>),
}

fn set_tokens<T, F: Fn(&T) -> &'static str>(set: &BTreeSet<T>, f: F) -> String {
    let names: Vec<&str> = set.iter().map(f).collect();
    format!("{{{}}}", names.join(","))
}

impl StylePredicate {
    pub fn descriptor(&self) -> String {
        match self {
            StylePredicate::OrientationSubset(s) => format!(
                "orientation_classes subset_of {}",
                set_tokens(s, |o| o.as_str())
            ),
            StylePredicate::ColorSubset(s) => {
                format!("color_classes subset_of {}", set_tokens(s, |c| c.as_str()))
            }
            StylePredicate::HasOpposition => "opposition_count >= 1".to_string(),
            StylePredicate::NoUnfinishedLines => "unfinished_line_count = 0".to_string(),
            StylePredicate::GranularityInBand { min, max } => {
                format!("granularity in [{min},{max}]")
            }
            StylePredicate::KindSubset(s) => {
                format!("element_kinds subset_of {}", set_tokens(s, |k| k.as_str()))
            }
        }
    }

    pub fn holds(&self, facts: &StyleFacts) -> bool {
        match self {
            StylePredicate::OrientationSubset(s) => {
                facts.orientation_classes.iter().all(|o| s.contains(o))
            }
            StylePredicate::ColorSubset(s) => facts.color_classes.iter().all(|c| match c {
                ColorClass::Other => false,
                other => other.palette().map(|p| s.contains(&p)).unwrap_or(false),
            }),
            StylePredicate::HasOpposition => facts.opposition_count >= 1,
            StylePredicate::NoUnfinishedLines => facts.unfinished_line_count == 0,
            StylePredicate::GranularityInBand { min, max } => {
                (*min..=*max).contains(&facts.granularity)
            }
            StylePredicate::KindSubset(s) => facts.kinds.iter().all(|k| s.contains(k)),
        }
    }
}

fn subsets<T: Ord + Copy>(universe: &[T]) -> Vec<BTreeSet<T>> {
    let mut out = Vec::with_capacity(1 << universe.len());
    for mask in 0..(1u32 << universe.len()) {
        let mut set = BTreeSet::new();
        for (i, item) in universe.iter().enumerate() {
            if mask & (1 << i) != 0 {
                set.insert(*item);
            }
        }
        out.push(set);
    }
    out
}

/// Enumerate the whole vocabulary for a given granularity band.
pub fn style_vocabulary(granularity_band: (u32, u32)) -> Vec<StylePredicate> {
    let mut vocab = Vec::new();
    for s in subsets(&OrientationClass::ALL) {
        vocab.push(StylePredicate::OrientationSubset(s));
    }
    for s in subsets(&PaletteClass::ALL) {
        vocab.push(StylePredicate::ColorSubset(s));
    }
    vocab.push(StylePredicate::HasOpposition);
    vocab.push(StylePredicate::NoUnfinishedLines);
    vocab.push(StylePredicate::GranularityInBand {
        min: granularity_band.0,
        max: granularity_band.1,
    });
    for s in subsets(&ElementKind::ALL) {
        vocab.push(StylePredicate::KindSubset(s));
    }
    vocab
}

// ---------------------------------------------------------------------------
// Rule items and the mined profile
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Component {
    What,
    When,
    How,
}

impl Component {
    pub fn as_str(&self) -> &'static str {
        match self {
            Component::What => "what",
            Component::When => "when",
            Component::How => "how",
        }
    }
}

/// One countable item of a rule component.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RuleItem {
    What(Role, ConceptSignature),
    When(ContextItem),
    How(String),
}

impl RuleItem {
    pub fn component(&self) -> Component {
        match self {
            RuleItem::What(..) => Component::What,
            RuleItem::When(_) => Component::When,
            RuleItem::How(_) => Component::How,
        }
    }

    pub fn token(&self) -> String {
        match self {
            RuleItem::What(role, sig) => format!("{}:{sig}", role.as_str()),
            RuleItem::When(item) => item.token(),
            RuleItem::How(tok) => tok.clone(),
        }
    }
}

fn rule_items(components: &RuleComponents) -> BTreeSet<RuleItem> {
    let mut items = BTreeSet::new();
    for (role, sig) in &components.what {
        items.insert(RuleItem::What(*role, *sig));
    }
    for ctx in &components.when {
        items.insert(RuleItem::When(*ctx));
    }
    for tok in &components.how {
        items.insert(RuleItem::How(tok.clone()));
    }
    items
}

/// Mined invariants: style predicates over the corpus, rule items over the
/// non-empty rules, co-occurring kept items across components, and per-rule
/// flexibility. Every stored support is >= theta.
#[derive(Clone, Debug, PartialEq)]
pub struct InvariantProfile {
    pub style_invariants: Vec<(StylePredicate, f64)>,
    pub rule_invariants: Vec<(RuleItem, f64)>,
    pub cooccurrence_invariants: Vec<(RuleItem, RuleItem, f64)>,
    /// (t_curr, flexibility) per rule, in rule order.
    pub rule_flexibility: Vec<(u32, f64)>,
    pub theta: f64,
    /// Set when the corpus had fewer than 2 paintings: the profile carries
    /// style invariants only. Flagged, not fatal.
    pub insufficient_data: bool,
}

impl InvariantProfile {
    pub fn to_value(&self) -> Value {
        json!({
            "style_invariants": self
                .style_invariants
                .iter()
                .map(|(p, s)| json!({"predicate": p.descriptor(), "support": real(*s)}))
                .collect::<Vec<_>>(),
            "rule_invariants": self
                .rule_invariants
                .iter()
                .map(|(item, s)| json!({
                    "component": item.component().as_str(),
                    "item": item.token(),
                    "support": real(*s),
                }))
                .collect::<Vec<_>>(),
            "cooccurrence_invariants": self
                .cooccurrence_invariants
                .iter()
                .map(|(a, b, s)| json!({
                    "a": {"component": a.component().as_str(), "item": a.token()},
                    "b": {"component": b.component().as_str(), "item": b.token()},
                    "support": real(*s),
                }))
                .collect::<Vec<_>>(),
            "rule_flexibility": self
                .rule_flexibility
                .iter()
                .map(|(t, f)| json!({"t_curr": t, "flexibility": real(*f)}))
                .collect::<Vec<_>>(),
            "theta": real(self.theta),
            "insufficient_data": self.insufficient_data,
        })
    }

    /// Human-readable summary, one line per invariant.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "invariant profile (theta {:.3}{})\n",
            self.theta,
            if self.insufficient_data {
                ", insufficient data"
            } else {
                ""
            }
        ));
        out.push_str(&format!(
            "style invariants: {}\n",
            self.style_invariants.len()
        ));
        for (p, s) in &self.style_invariants {
            out.push_str(&format!("  [{s:.3}] {}\n", p.descriptor()));
        }
        out.push_str(&format!(
            "rule invariants: {}\n",
            self.rule_invariants.len()
        ));
        for (item, s) in &self.rule_invariants {
            out.push_str(&format!(
                "  [{s:.3}] {}: {}\n",
                item.component().as_str(),
                item.token()
            ));
        }
        out.push_str(&format!(
            "co-occurrence invariants: {}\n",
            self.cooccurrence_invariants.len()
        ));
        for (a, b, s) in &self.cooccurrence_invariants {
            out.push_str(&format!(
                "  [{s:.3}] {}: {} & {}: {}\n",
                a.component().as_str(),
                a.token(),
                b.component().as_str(),
                b.token()
            ));
        }
        out
    }
}

/// Mine the invariant profile of a corpus and its rule trace.
///
/// `rules` must be the rules induced between consecutive corpus paintings in
/// order. Corpora with fewer than 2 paintings yield a style-only profile with
/// the `insufficient_data` flag set.
pub fn mine_invariants(
    corpus: &[Composition],
    rules: &[ChangeRule],
    theta: f64,
    k: usize,
    stats: &CorpusFeatureStats,
    eps: f64,
    palette_tol: u8,
) -> Result<InvariantProfile, Error> {
    let facts: Vec<StyleFacts> = corpus
        .iter()
        .map(|c| style_facts(c, stats, eps, palette_tol))
        .collect::<Result<_, _>>()?;

    let mut style_invariants = Vec::new();
    if !facts.is_empty() {
        let band = (
            facts.iter().map(|f| f.granularity).min().unwrap_or(0),
            facts.iter().map(|f| f.granularity).max().unwrap_or(0),
        );
        let n = facts.len() as f64;
        for predicate in style_vocabulary(band) {
            let count = facts.iter().filter(|f| predicate.holds(f)).count();
            let support = count as f64 / n;
            if support >= theta {
                style_invariants.push((predicate, support));
            }
        }
        style_invariants.sort_by_key(|(p, _)| p.descriptor());
    }

    let insufficient_data = corpus.len() < 2;

    // Flexibility over the full trace (empty rules included: their empty how
    // sequences are legitimate sequences).
    let components: Vec<RuleComponents> = rules.iter().map(rule_components).collect();
    let rule_flexibility: Vec<(u32, f64)> = rules
        .iter()
        .enumerate()
        .map(|(i, r)| (r.t_curr, flexibility(&components[i], &components[..i], k)))
        .collect();

    let mut rule_invariants = Vec::new();
    let mut cooccurrence_invariants = Vec::new();
    if !insufficient_data {
        let item_sets: Vec<BTreeSet<RuleItem>> = rules
            .iter()
            .zip(&components)
            .filter(|(r, _)| !r.is_empty())
            .map(|(_, c)| rule_items(c))
            .collect();
        let m = item_sets.len();
        if m > 0 {
            let mut counts: BTreeMap<&RuleItem, usize> = BTreeMap::new();
            for set in &item_sets {
                for item in set {
                    *counts.entry(item).or_insert(0) += 1;
                }
            }
            let kept: Vec<(RuleItem, f64)> = counts
                .iter()
                .filter_map(|(item, count)| {
                    let support = *count as f64 / m as f64;
                    (support >= theta).then(|| ((*item).clone(), support))
                })
                .collect();
            for i in 0..kept.len() {
                for j in (i + 1)..kept.len() {
                    let (a, b) = (&kept[i].0, &kept[j].0);
                    if a.component() == b.component() {
                        continue;
                    }
                    let joint = item_sets
                        .iter()
                        .filter(|set| set.contains(a) && set.contains(b))
                        .count();
                    let support = joint as f64 / m as f64;
                    if support >= theta {
                        cooccurrence_invariants.push((a.clone(), b.clone(), support));
                    }
                }
            }
            rule_invariants = kept;
        }
    }

    Ok(InvariantProfile {
        style_invariants,
        rule_invariants,
        cooccurrence_invariants,
        rule_flexibility,
        theta,
        insufficient_data,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rules::Scope;
    use crate::scene::{
        Canvas, Color, Element, Rect, Region, DEFAULT_EPSILON, DEFAULT_PALETTE_TOL,
    };
    use crate::synth::{gen_neoplastic, GenParams};

    fn sig_for(color: PaletteClass) -> ConceptSignature {
        let c = Composition {
            id: "s".into(),
            ordinal: 0,
            canvas: Canvas { height_ratio: 1.0 },
            elements: vec![Element::Region(Region {
                rect: Rect::new(0.1, 0.1, 0.4, 0.4),
                color: Color::Palette(color),
            })],
            label: None,
        };
        signature_multiset(
            &c,
            &CorpusFeatureStats::fallback(),
            DEFAULT_EPSILON,
            DEFAULT_PALETTE_TOL,
        )
        .unwrap()[0]
    }

    fn rule_with(changes: Vec<AtomicChange>, t: u32) -> ChangeRule {
        ChangeRule {
            t_prev: t - 1,
            t_curr: t,
            changes,
            when_context: BTreeSet::new(),
            scope: Scope::Local,
            stochastic: false,
        }
    }

    #[test]
    fn empty_rule_has_empty_components() {
        let rc = rule_components(&rule_with(vec![], 1));
        assert!(rc.what.is_empty());
        assert!(rc.how.is_empty());
    }

    #[test]
    fn modify_contributes_both_roles() {
        let before = sig_for(PaletteClass::Red);
        let after = sig_for(PaletteClass::Blue);
        let rc = rule_components(&rule_with(
            vec![AtomicChange::Modify {
                sig_before: before,
                sig_after: after,
                locus: before.position_cell,
            }],
            1,
        ));
        assert!(rc.what.contains(&(Role::Eliminated, before)));
        assert!(rc.what.contains(&(Role::Added, after)));
        assert_eq!(rc.how.len(), 1);
    }

    #[test]
    fn single_add_has_one_token() {
        let sig = sig_for(PaletteClass::Red);
        let rc = rule_components(&rule_with(
            vec![AtomicChange::Add {
                sig_after: sig,
                locus: sig.position_cell,
            }],
            1,
        ));
        assert_eq!(rc.what.len(), 1);
        assert_eq!(rc.how, vec![format!("add:{sig}")]);
    }

    #[test]
    fn levenshtein_token_level() {
        let a = vec!["add:A".to_string(), "add:B".to_string()];
        let b = vec!["add:A".to_string(), "add:C".to_string()];
        assert_eq!(levenshtein(&a, &b), 1);
        assert_eq!(levenshtein(&a, &[]), 2);
        assert_eq!(levenshtein(&[], &[]), 0);
    }

    #[test]
    fn flexibility_conventions() {
        let mk = |tokens: &[&str]| RuleComponents {
            what: BTreeSet::new(),
            when: BTreeSet::new(),
            how: tokens.iter().map(|t| t.to_string()).collect(),
            flexibility: None,
        };
        // Empty prior -> 0.
        assert_eq!(flexibility(&mk(&["add:A"]), &[], 3), 0.0);
        // Identical prior -> 0.
        assert_eq!(flexibility(&mk(&["add:A"]), &[mk(&["add:A"])], 1), 0.0);
        // Fully different single-token prior -> 1.
        assert_eq!(flexibility(&mk(&["add:A"]), &[mk(&["add:B"])], 1), 1.0);
    }

    #[test]
    fn mined_style_invariants_on_generated_corpus() {
        let corpus: Vec<Composition> = (0..12)
            .map(|seed| {
                let mut c = gen_neoplastic(&GenParams::new(seed)).unwrap();
                c.ordinal = seed as u32;
                c
            })
            .collect();
        let stats = crate::scene::corpus_feature_stats(&corpus);
        let profile = mine_invariants(
            &corpus,
            &[],
            0.9,
            DEFAULT_FLEXIBILITY_K,
            &stats,
            DEFAULT_EPSILON,
            DEFAULT_PALETTE_TOL,
        )
        .unwrap();
        let descriptors: Vec<String> = profile
            .style_invariants
            .iter()
            .map(|(p, _)| p.descriptor())
            .collect();
        assert!(descriptors.contains(&"orientation_classes subset_of {H,V}".to_string()));
        assert!(descriptors
            .contains(&"color_classes subset_of {black,white,gray,red,blue,yellow}".to_string()));
        let hv = profile
            .style_invariants
            .iter()
            .find(|(p, _)| p.descriptor() == "orientation_classes subset_of {H,V}")
            .unwrap();
        assert_eq!(hv.1, 1.0);
    }

    #[test]
    fn raising_theta_never_adds_invariants() {
        let corpus: Vec<Composition> = (0..8)
            .map(|seed| {
                let mut c = gen_neoplastic(&GenParams::new(seed + 100)).unwrap();
                c.ordinal = seed as u32;
                c
            })
            .collect();
        let stats = crate::scene::corpus_feature_stats(&corpus);
        let mine = |theta: f64| {
            mine_invariants(
                &corpus,
                &[],
                theta,
                DEFAULT_FLEXIBILITY_K,
                &stats,
                DEFAULT_EPSILON,
                DEFAULT_PALETTE_TOL,
            )
            .unwrap()
        };
        let low = mine(0.5);
        let high = mine(0.95);
        let low_set: BTreeSet<String> = low
            .style_invariants
            .iter()
            .map(|(p, _)| p.descriptor())
            .collect();
        for (p, _) in &high.style_invariants {
            assert!(low_set.contains(&p.descriptor()));
        }
    }

    #[test]
    fn insufficient_corpus_is_flagged() {
        let c = gen_neoplastic(&GenParams::new(1)).unwrap();
        let stats = crate::scene::corpus_feature_stats(std::slice::from_ref(&c));
        let profile = mine_invariants(
            &[c],
            &[],
            0.9,
            DEFAULT_FLEXIBILITY_K,
            &stats,
            DEFAULT_EPSILON,
            DEFAULT_PALETTE_TOL,
        )
        .unwrap();
        assert!(profile.insufficient_data);
        assert!(!profile.style_invariants.is_empty());
        assert!(profile.rule_invariants.is_empty());
    }

    #[test]
    fn untouched_line_becomes_a_kept_context_invariant() {
        use crate::rules::induce_rule;
        use crate::synth::{perturb, PerturbOp};

        // A chain whose ops only recolor regions: every line survives every
        // step, so each line's signature sits in every rule's kept context
        // with support 1.
        let base = gen_neoplastic(&GenParams {
            n_vlines: (2, 2),
            n_hlines: (2, 2),
            fill_probability: 0.0,
            ..GenParams::new(17)
        })
        .unwrap();
        let stats = crate::scene::corpus_feature_stats(std::slice::from_ref(&base));
        let palette = [
            PaletteClass::Red,
            PaletteClass::Blue,
            PaletteClass::Yellow,
            PaletteClass::White,
        ];
        let first_region = base
            .elements
            .iter()
            .position(|e| e.as_region().is_some())
            .unwrap();
        let mut chain = vec![base];
        for step in 0..5usize {
            let prev = chain.last().unwrap();
            let ops = vec![PerturbOp::RecolorRegion {
                index: first_region + step,
                color: Color::Palette(palette[step % palette.len()]),
            }];
            let (next, _) =
                perturb(prev, &ops, &stats, DEFAULT_EPSILON, DEFAULT_PALETTE_TOL).unwrap();
            chain.push(next);
        }
        for (i, c) in chain.iter_mut().enumerate() {
            c.ordinal = i as u32;
        }
        let rules: Vec<ChangeRule> = chain
            .windows(2)
            .map(|pair| {
                induce_rule(
                    &pair[0],
                    &pair[1],
                    &stats,
                    DEFAULT_EPSILON,
                    DEFAULT_PALETTE_TOL,
                    crate::rules::DEFAULT_IOU_MIN,
                    crate::rules::DEFAULT_SCOPE_TAU,
                )
                .unwrap()
            })
            .collect();
        let profile = mine_invariants(
            &chain,
            &rules,
            0.9,
            DEFAULT_FLEXIBILITY_K,
            &stats,
            DEFAULT_EPSILON,
            DEFAULT_PALETTE_TOL,
        )
        .unwrap();

        let line_sig = signature_multiset(&chain[0], &stats, DEFAULT_EPSILON, DEFAULT_PALETTE_TOL)
            .unwrap()
            .into_iter()
            .find(|s| s.kind == crate::scene::ElementKind::Line)
            .unwrap();
        let kept = profile.rule_invariants.iter().any(|(item, support)| {
            matches!(item, RuleItem::When(ContextItem::Signature(s)) if *s == line_sig)
                && *support == 1.0
        });
        assert!(kept, "expected (when, {line_sig}) at support 1.0");
    }

    #[test]
    fn style_supports_match_a_naive_recount() {
        let corpus: Vec<Composition> = (0..9)
            .map(|seed| {
                let mut c = gen_neoplastic(&GenParams::new(seed + 400)).unwrap();
                c.ordinal = seed as u32;
                c
            })
            .collect();
        let stats = crate::scene::corpus_feature_stats(&corpus);
        let profile = mine_invariants(
            &corpus,
            &[],
            0.5,
            DEFAULT_FLEXIBILITY_K,
            &stats,
            DEFAULT_EPSILON,
            DEFAULT_PALETTE_TOL,
        )
        .unwrap();
        for (predicate, support) in &profile.style_invariants {
            let count = corpus
                .iter()
                .filter(|c| {
                    let facts =
                        style_facts(c, &stats, DEFAULT_EPSILON, DEFAULT_PALETTE_TOL).unwrap();
                    predicate.holds(&facts)
                })
                .count();
            assert_eq!(
                *support,
                count as f64 / corpus.len() as f64,
                "{}",
                predicate.descriptor()
            );
        }
    }
}
