//! Attention-cue descriptors per composition.
//!
//! These summarize what draws the eye — central mass, large elements, color
//! contrast, granularity vs. crowding, unfinished lines — as plain statistics
//! over the scene model rather than any scanning simulation.

use std::collections::BTreeMap;

use serde_json::{json, Map, Value};

use crate::canon::real;
use crate::error::Error;
use crate::scene::{
    discretize, extract_relations, BoundaryContact, ColorClass, Composition, CorpusFeatureStats,
    ElementKind, RelKind,
};

/// Per-composition cue profile. All fields are finite; histogram counts sum
/// to the element count.
#[derive(Clone, Debug, PartialEq)]
pub struct CueProfile {
    /// Area-weighted mean centrality in [0, 1] (1 = all mass at the center).
    pub centrality: f64,
    pub max_element_area: f64,
    pub color_histogram: BTreeMap<ColorClass, u32>,
    pub opposition_count: u32,
    /// Element count.
    pub granularity: u32,
    /// Shannon entropy (natural log) of normalized region areas.
    pub area_entropy: f64,
    /// Elements per unit canvas area.
    pub crowdedness: f64,
    pub unfinished_line_count: u32,
}

impl CueProfile {
    pub fn zero() -> CueProfile {
        CueProfile {
            centrality: 0.0,
            max_element_area: 0.0,
            color_histogram: BTreeMap::new(),
            opposition_count: 0,
            granularity: 0,
            area_entropy: 0.0,
            crowdedness: 0.0,
            unfinished_line_count: 0,
        }
    }

    pub fn to_value(&self) -> Value {
        let mut hist = Map::new();
        for (class, count) in &self.color_histogram {
            hist.insert(class.as_str().to_string(), json!(count));
        }
        json!({
            "centrality": real(self.centrality),
            "max_element_area": real(self.max_element_area),
            "color_histogram": Value::Object(hist),
            "opposition_count": self.opposition_count,
            "granularity": self.granularity,
            "area_entropy": real(self.area_entropy),
            "crowdedness": real(self.crowdedness),
            "unfinished_line_count": self.unfinished_line_count,
        })
    }
}

/// Compute the cue profile of a composition. Empty compositions yield the
/// all-zero profile.
pub fn compute_cues(
    c: &Composition,
    stats: &CorpusFeatureStats,
    eps: f64,
    palette_tol: u8,
) -> Result<CueProfile, Error> {
    if c.elements.is_empty() {
        return Ok(CueProfile::zero());
    }
    let center = c.canvas.center();
    let diagonal = c.canvas.diagonal();

    let mut weighted = 0.0;
    let mut total_area = 0.0;
    let mut max_area = 0.0f64;
    let mut histogram: BTreeMap<ColorClass, u32> = BTreeMap::new();
    let mut unfinished = 0u32;
    let mut region_areas = Vec::new();

    for e in &c.elements {
        let area = e.area();
        let (cx, cy) = e.centroid();
        let dist = ((cx - center.0).powi(2) + (cy - center.1).powi(2)).sqrt();
        weighted += area * (1.0 - 2.0 * dist / diagonal);
        total_area += area;
        max_area = max_area.max(area);
        let sig = discretize(e, &c.canvas, stats, eps, palette_tol)?;
        *histogram.entry(sig.color_class).or_insert(0) += 1;
        if sig.kind == ElementKind::Line && sig.boundary_contact != BoundaryContact::BothEnds {
            unfinished += 1;
        }
        if sig.kind == ElementKind::Region {
            region_areas.push(area);
        }
    }

    let centrality = if total_area > 0.0 {
        (weighted / total_area).clamp(0.0, 1.0)
    } else {
        0.0
    };

    let region_total: f64 = region_areas.iter().sum();
    let area_entropy = if region_total > 0.0 {
        -region_areas
            .iter()
            .map(|a| {
                let p = a / region_total;
                if p > 0.0 {
                    p * p.ln()
                } else {
                    0.0
                }
            })
            .sum::<f64>()
    } else {
        0.0
    };

    let opposition_count = extract_relations(c, eps, palette_tol)
        .iter()
        .filter(|r| r.relkind == RelKind::ColorOpposition)
        .count() as u32;

    Ok(CueProfile {
        centrality,
        max_element_area: max_area,
        color_histogram: histogram,
        opposition_count,
        granularity: c.elements.len() as u32,
        area_entropy,
        crowdedness: c.elements.len() as f64 / c.canvas.area(),
        unfinished_line_count: unfinished,
    })
}

/// Normalization constants for cue ranking; each cue magnitude is divided by
/// its constant and clamped to [0, 1] before comparison.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CueNorms {
    pub area_entropy: f64,
    pub centrality: f64,
    pub crowdedness: f64,
    pub granularity: f64,
    pub max_element_area: f64,
    pub opposition_count: f64,
    pub unfinished_line_count: f64,
}

impl Default for CueNorms {
    fn default() -> CueNorms {
        CueNorms {
            area_entropy: 4.0,
            centrality: 1.0,
            crowdedness: 50.0,
            granularity: 50.0,
            max_element_area: 1.0,
            opposition_count: 20.0,
            unfinished_line_count: 10.0,
        }
    }
}

/// Scalar cue names in tie-break (lexicographic) order.
pub const CUE_NAMES: [&str; 7] = [
    "area_entropy",
    "centrality",
    "crowdedness",
    "granularity",
    "max_element_area",
    "opposition_count",
    "unfinished_line_count",
];

/// Rank the scalar cues by normalized magnitude, descending; ties break by
/// cue name so the order is deterministic.
pub fn rank_cues(p: &CueProfile, norms: &CueNorms) -> Vec<&'static str> {
    let normalized = |value: f64, norm: f64| (value / norm).clamp(0.0, 1.0);
    let mut scored: Vec<(f64, &'static str)> = vec![
        (
            normalized(p.area_entropy, norms.area_entropy),
            "area_entropy",
        ),
        (normalized(p.centrality, norms.centrality), "centrality"),
        (normalized(p.crowdedness, norms.crowdedness), "crowdedness"),
        (
            normalized(p.granularity as f64, norms.granularity),
            "granularity",
        ),
        (
            normalized(p.max_element_area, norms.max_element_area),
            "max_element_area",
        ),
        (
            normalized(p.opposition_count as f64, norms.opposition_count),
            "opposition_count",
        ),
        (
            normalized(p.unfinished_line_count as f64, norms.unfinished_line_count),
            "unfinished_line_count",
        ),
    ];
    scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(b.1)));
    scored.into_iter().map(|(_, name)| name).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::{
        Canvas, Color, Element, PaletteClass, Rect, Region, DEFAULT_EPSILON, DEFAULT_PALETTE_TOL,
    };

    fn comp(elements: Vec<Element>) -> Composition {
        Composition {
            id: "t".into(),
            ordinal: 0,
            canvas: Canvas { height_ratio: 1.0 },
            elements,
            label: None,
        }
    }

    fn region(x0: f64, y0: f64, x1: f64, y1: f64, color: PaletteClass) -> Element {
        Element::Region(Region {
            rect: Rect::new(x0, y0, x1, y1),
            color: Color::Palette(color),
        })
    }

    fn cues(c: &Composition) -> CueProfile {
        compute_cues(
            c,
            &CorpusFeatureStats::fallback(),
            DEFAULT_EPSILON,
            DEFAULT_PALETTE_TOL,
        )
        .unwrap()
    }

    #[test]
    fn empty_composition_is_all_zero() {
        let p = cues(&comp(vec![]));
        assert_eq!(p, CueProfile::zero());
    }

    #[test]
    fn full_canvas_region_is_fully_central() {
        let p = cues(&comp(vec![region(0.0, 0.0, 1.0, 1.0, PaletteClass::White)]));
        assert_eq!(p.centrality, 1.0);
        assert_eq!(p.area_entropy, 0.0);
        assert_eq!(p.granularity, 1);
        assert_eq!(p.max_element_area, 1.0);
    }

    #[test]
    fn two_equal_regions_have_ln2_entropy() {
        let p = cues(&comp(vec![
            region(0.0, 0.0, 0.5, 1.0, PaletteClass::White),
            region(0.5, 0.0, 1.0, 1.0, PaletteClass::White),
        ]));
        assert!((p.area_entropy - std::f64::consts::LN_2).abs() < 1e-12);
    }

    #[test]
    fn histogram_counts_sum_to_element_count() {
        let c = comp(vec![
            region(0.0, 0.0, 0.5, 1.0, PaletteClass::White),
            region(0.5, 0.0, 1.0, 0.5, PaletteClass::Red),
            region(0.5, 0.5, 1.0, 1.0, PaletteClass::Blue),
        ]);
        let p = cues(&c);
        let total: u32 = p.color_histogram.values().sum();
        assert_eq!(total, c.elements.len() as u32);
        assert_eq!(p.opposition_count, 1); // red vs blue
    }

    #[test]
    fn mirroring_preserves_symmetric_cues() {
        let c = comp(vec![
            region(0.1, 0.1, 0.4, 0.6, PaletteClass::Red),
            region(0.5, 0.2, 0.9, 0.8, PaletteClass::Blue),
        ]);
        let mirrored = comp(
            c.elements
                .iter()
                .map(|e| match e {
                    Element::Region(r) => Element::Region(Region {
                        rect: Rect::new(1.0 - r.rect.x1, r.rect.y0, 1.0 - r.rect.x0, r.rect.y1),
                        color: r.color,
                    }),
                    Element::Line(_) => unreachable!(),
                })
                .collect(),
        );
        let a = cues(&c);
        let b = cues(&mirrored);
        assert!((a.centrality - b.centrality).abs() < 1e-12);
        assert_eq!(a.granularity, b.granularity);
        assert!((a.area_entropy - b.area_entropy).abs() < 1e-12);
        assert!((a.crowdedness - b.crowdedness).abs() < 1e-12);
        assert_eq!(a.color_histogram, b.color_histogram);
        assert_eq!(a.opposition_count, b.opposition_count);
    }

    #[test]
    fn centrality_dominates_ranking_when_alone() {
        let mut p = CueProfile::zero();
        p.centrality = 1.0;
        let ranked = rank_cues(&p, &CueNorms::default());
        assert_eq!(ranked[0], "centrality");
    }

    #[test]
    fn all_zero_profile_ranks_lexicographically() {
        let ranked = rank_cues(&CueProfile::zero(), &CueNorms::default());
        assert_eq!(ranked, CUE_NAMES.to_vec());
    }
}
