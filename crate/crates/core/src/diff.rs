//! Occurrence statistics over a corpus prefix and difference metrics for a
//! new composition.
//!
//! Frequencies are document frequencies: a signature (or unordered signature
//! pair) counts once per painting that contains it, and corpus frequency is
//! that count divided by the number of paintings. Table building is a
//! commutative merge of per-painting partial tables, so build order never
//! matters.

use std::collections::{BTreeMap, BTreeSet};

use serde_json::{json, Map, Value};

use crate::canon::real;
use crate::error::Error;
use crate::scene::{
    signature_multiset, BoundaryContact, ColorClass, Composition, ConceptSignature,
    CorpusFeatureStats, ElementKind, OrientationClass, SizeClass,
};

/// Default corpus frequency above which a co-occurrence counts as
/// "previously frequent" and its absence as dropped.
pub const DEFAULT_DROP_THRESHOLD: f64 = 0.5;

/// Unordered signature pair, stored with the smaller signature first.
pub type SigPair = (ConceptSignature, ConceptSignature);

fn ordered_pair(a: ConceptSignature, b: ConceptSignature) -> SigPair {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

pub fn pair_token(p: &SigPair) -> String {
    format!("{} & {}", p.0.token(), p.1.token())
}

// ---------------------------------------------------------------------------
// Attribute values
// ---------------------------------------------------------------------------

/// One observed (attribute, value) of a signature, for new-feature detection.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Feature {
    Kind(ElementKind),
    Orientation(Option<OrientationClass>),
    Size(SizeClass),
    Cell(u8),
    Color(ColorClass),
    Contact(BoundaryContact),
}

impl Feature {
    pub fn attribute(&self) -> &'static str {
        match self {
            Feature::Kind(_) => "kind",
            Feature::Orientation(_) => "orientation_class",
            Feature::Size(_) => "size_class",
            Feature::Cell(_) => "position_cell",
            Feature::Color(_) => "color_class",
            Feature::Contact(_) => "boundary_contact",
        }
    }

    pub fn value(&self) -> String {
        match self {
            Feature::Kind(k) => k.as_str().to_string(),
            Feature::Orientation(o) => o.map_or("-", |o| o.as_str()).to_string(),
            Feature::Size(s) => s.as_str().to_string(),
            Feature::Cell(c) => c.to_string(),
            Feature::Color(c) => c.as_str().to_string(),
            Feature::Contact(c) => c.as_str().to_string(),
        }
    }

    fn of_signature(sig: &ConceptSignature) -> [Feature; 6] {
        [
            Feature::Kind(sig.kind),
            Feature::Orientation(sig.orientation_class),
            Feature::Size(sig.size_class),
            Feature::Cell(sig.position_cell),
            Feature::Color(sig.color_class),
            Feature::Contact(sig.boundary_contact),
        ]
    }
}

// ---------------------------------------------------------------------------
// Occurrence tables
// ---------------------------------------------------------------------------

/// Signature and signature-pair document frequencies over a corpus prefix.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct OccurrenceTables {
    pub n_paintings: u32,
    /// Number of prior paintings containing the signature (deduplicated per
    /// painting).
    pub sig_freq: BTreeMap<ConceptSignature, u32>,
    /// Number of prior paintings containing both signatures of the pair.
    pub pair_freq: BTreeMap<SigPair, u32>,
    /// Every attribute value observed so far.
    pub attr_values_seen: BTreeSet<Feature>,
}

impl OccurrenceTables {
    pub fn new() -> OccurrenceTables {
        OccurrenceTables::default()
    }

    /// Fold one painting's signature set into the tables.
    pub fn add_painting(&mut self, sig_set: &BTreeSet<ConceptSignature>) {
        self.n_paintings += 1;
        let sigs: Vec<&ConceptSignature> = sig_set.iter().collect();
        for sig in &sigs {
            *self.sig_freq.entry(**sig).or_insert(0) += 1;
            for f in Feature::of_signature(sig) {
                self.attr_values_seen.insert(f);
            }
        }
        for i in 0..sigs.len() {
            for j in (i + 1)..sigs.len() {
                *self
                    .pair_freq
                    .entry(ordered_pair(*sigs[i], *sigs[j]))
                    .or_insert(0) += 1;
            }
        }
    }

    /// Commutative merge of two partial tables.
    pub fn merge(&mut self, other: &OccurrenceTables) {
        self.n_paintings += other.n_paintings;
        for (sig, n) in &other.sig_freq {
            *self.sig_freq.entry(*sig).or_insert(0) += n;
        }
        for (pair, n) in &other.pair_freq {
            *self.pair_freq.entry(*pair).or_insert(0) += n;
        }
        self.attr_values_seen
            .extend(other.attr_values_seen.iter().copied());
    }
}

/// Signature set of one painting (deduplicated).
pub fn signature_set(
    c: &Composition,
    stats: &CorpusFeatureStats,
    eps: f64,
    palette_tol: u8,
) -> Result<BTreeSet<ConceptSignature>, Error> {
    Ok(signature_multiset(c, stats, eps, palette_tol)?
        .into_iter()
        .collect())
}

/// Build tables over an ordinal-ordered corpus prefix.
pub fn build_occurrence_tables(
    prefix: &[Composition],
    stats: &CorpusFeatureStats,
    eps: f64,
    palette_tol: u8,
) -> Result<OccurrenceTables, Error> {
    let mut tables = OccurrenceTables::new();
    for c in prefix {
        let set = signature_set(c, stats, eps, palette_tol)?;
        tables.add_painting(&set);
    }
    Ok(tables)
}

// ---------------------------------------------------------------------------
// Multiset Jaccard
// ---------------------------------------------------------------------------

/// Multiset Jaccard similarity: sum of per-key count minima over the sum of
/// maxima. Two empty multisets are identical, hence 1.
pub fn multiset_jaccard<T: Ord>(a: &BTreeMap<T, u32>, b: &BTreeMap<T, u32>) -> f64 {
    let mut num: u64 = 0;
    let mut den: u64 = 0;
    for (key, ca) in a {
        let cb = b.get(key).copied().unwrap_or(0);
        num += (*ca).min(cb) as u64;
        den += (*ca).max(cb) as u64;
    }
    for (key, cb) in b {
        if !a.contains_key(key) {
            den += *cb as u64;
        }
    }
    if den == 0 {
        1.0
    } else {
        num as f64 / den as f64
    }
}

/// Collect an iterator of items into a count multiset.
pub fn multiset_of<T: Ord, I: IntoIterator<Item = T>>(items: I) -> BTreeMap<T, u32> {
    let mut m = BTreeMap::new();
    for item in items {
        *m.entry(item).or_insert(0) += 1;
    }
    m
}

// ---------------------------------------------------------------------------
// Diff report
// ---------------------------------------------------------------------------

/// The difference metrics of one composition against a corpus prefix.
#[derive(Clone, Debug, PartialEq)]
pub struct DiffReport {
    pub nearest_similarity: f64,
    pub pool_similarity: f64,
    pub new_features: BTreeSet<Feature>,
    pub new_concepts: BTreeSet<ConceptSignature>,
    pub occurrence_freqs: BTreeMap<ConceptSignature, f64>,
    pub cooccurrence_freqs: BTreeMap<SigPair, f64>,
    pub new_cooccurrences: BTreeSet<SigPair>,
    pub dropped_cooccurrences: BTreeSet<SigPair>,
    /// Set when the prefix was empty: similarities are 0 and everything is
    /// new. Flagged, not fatal.
    pub empty_corpus: bool,
}

/// Compute the diff metrics for `c` against tables built from `prefix`.
///
/// `drop_threshold` is the corpus frequency at and above which a pair counts
/// as previously frequent; such pairs absent from `c` are reported dropped.
pub fn diff_report(
    c: &Composition,
    tables: &OccurrenceTables,
    prefix: &[Composition],
    stats: &CorpusFeatureStats,
    eps: f64,
    palette_tol: u8,
    drop_threshold: f64,
) -> Result<DiffReport, Error> {
    let sigs = signature_multiset(c, stats, eps, palette_tol)?;
    let multiset = multiset_of(sigs.iter().copied());
    let sig_set: BTreeSet<ConceptSignature> = sigs.iter().copied().collect();
    let pairs: BTreeSet<SigPair> = {
        let v: Vec<&ConceptSignature> = sig_set.iter().collect();
        let mut out = BTreeSet::new();
        for i in 0..v.len() {
            for j in (i + 1)..v.len() {
                out.insert(ordered_pair(*v[i], *v[j]));
            }
        }
        out
    };

    let empty_corpus = tables.n_paintings == 0;
    let n = tables.n_paintings as f64;

    let nearest_similarity = if empty_corpus {
        0.0
    } else {
        let mut best = 0.0f64;
        for p in prefix {
            let pm = multiset_of(signature_multiset(p, stats, eps, palette_tol)?);
            best = best.max(multiset_jaccard(&multiset, &pm));
        }
        best
    };

    let pool_similarity = if empty_corpus {
        0.0
    } else {
        let pool: BTreeMap<ConceptSignature, u32> =
            tables.sig_freq.keys().map(|s| (*s, 1)).collect();
        let own: BTreeMap<ConceptSignature, u32> = sig_set.iter().map(|s| (*s, 1)).collect();
        multiset_jaccard(&own, &pool)
    };

    let mut new_features = BTreeSet::new();
    for sig in &sig_set {
        for f in Feature::of_signature(sig) {
            if !tables.attr_values_seen.contains(&f) {
                new_features.insert(f);
            }
        }
    }

    let new_concepts: BTreeSet<ConceptSignature> = sig_set
        .iter()
        .filter(|s| tables.sig_freq.get(s).copied().unwrap_or(0) == 0)
        .copied()
        .collect();

    let occurrence_freqs: BTreeMap<ConceptSignature, f64> = sig_set
        .iter()
        .map(|s| {
            let count = tables.sig_freq.get(s).copied().unwrap_or(0);
            let freq = if empty_corpus { 0.0 } else { count as f64 / n };
            (*s, freq)
        })
        .collect();

    let cooccurrence_freqs: BTreeMap<SigPair, f64> = pairs
        .iter()
        .map(|p| {
            let count = tables.pair_freq.get(p).copied().unwrap_or(0);
            let freq = if empty_corpus { 0.0 } else { count as f64 / n };
            (*p, freq)
        })
        .collect();

    let new_cooccurrences: BTreeSet<SigPair> = pairs
        .iter()
        .filter(|p| tables.pair_freq.get(p).copied().unwrap_or(0) == 0)
        .copied()
        .collect();

    let dropped_cooccurrences: BTreeSet<SigPair> = if empty_corpus {
        BTreeSet::new()
    } else {
        tables
            .pair_freq
            .iter()
            .filter(|(pair, count)| **count as f64 / n >= drop_threshold && !pairs.contains(pair))
            .map(|(pair, _)| *pair)
            .collect()
    };

    Ok(DiffReport {
        nearest_similarity,
        pool_similarity,
        new_features,
        new_concepts,
        occurrence_freqs,
        cooccurrence_freqs,
        new_cooccurrences,
        dropped_cooccurrences,
        empty_corpus,
    })
}

impl DiffReport {
    pub fn to_value(&self) -> Value {
        let sig_map = |m: &BTreeMap<ConceptSignature, f64>| {
            let mut out = Map::new();
            for (s, f) in m {
                out.insert(s.token(), real(*f));
            }
            Value::Object(out)
        };
        let pair_map = |m: &BTreeMap<SigPair, f64>| {
            let mut out = Map::new();
            for (p, f) in m {
                out.insert(pair_token(p), real(*f));
            }
            Value::Object(out)
        };
        json!({
            "nearest_similarity": real(self.nearest_similarity),
            "pool_similarity": real(self.pool_similarity),
            "new_features": self
                .new_features
                .iter()
                .map(|f| json!([f.attribute(), f.value()]))
                .collect::<Vec<_>>(),
            "new_concepts": self.new_concepts.iter().map(|s| s.token()).collect::<Vec<_>>(),
            "occurrence_freqs": sig_map(&self.occurrence_freqs),
            "cooccurrence_freqs": pair_map(&self.cooccurrence_freqs),
            "new_cooccurrences": self.new_cooccurrences.iter().map(pair_token).collect::<Vec<_>>(),
            "dropped_cooccurrences": self
                .dropped_cooccurrences
                .iter()
                .map(pair_token)
                .collect::<Vec<_>>(),
            "empty_corpus": self.empty_corpus,
        })
    }

    /// CSV rows of occurrence frequencies: `signature,frequency`.
    pub fn occurrence_csv(&self) -> String {
        let mut out = String::from("signature,frequency\n");
        for (sig, freq) in &self.occurrence_freqs {
            out.push_str(&format!("{},{freq:.6}\n", sig.token()));
        }
        out
    }
}
