//! Seeded generators for in-style and off-style compositions, plus a
//! perturbation operator that produces chronological sequences with exact
//! ground-truth change lists.
//!
//! The PRNG is pinned: Xoshiro256++ seeded from the 64-bit seed via SplitMix64
//! (`seed_from_u64`), one sequential stream per composition. All sampled reals
//! are quantized to the canonical 6-decimal precision, so identical seeds give
//! byte-identical serializations.

use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

use crate::canon::quantize6;
use crate::error::Error;
use crate::rules::{sort_changes_canonical, AtomicChange};
use crate::scene::{
    discretize, validate_composition, Canvas, Color, Composition, CorpusFeatureStats, Element,
    Label, Line, PaletteClass, Rect, Region, DEFAULT_PALETTE_TOL, PALETTE_ANCHORS,
};

/// Generator parameters. Line-count ranges are inclusive; color weights are
/// normalized over their positive entries.
#[derive(Clone, Debug, PartialEq)]
pub struct GenParams {
    pub seed: u64,
    pub n_vlines: (u32, u32),
    pub n_hlines: (u32, u32),
    pub thickness_range: (f64, f64),
    pub color_weights: Vec<(PaletteClass, f64)>,
    pub fill_probability: f64,
}

impl GenParams {
    pub fn new(seed: u64) -> GenParams {
        GenParams {
            seed,
            n_vlines: (2, 3),
            n_hlines: (2, 3),
            thickness_range: (0.01, 0.03),
            color_weights: vec![
                (PaletteClass::Red, 1.0),
                (PaletteClass::Blue, 1.0),
                (PaletteClass::Yellow, 1.0),
            ],
            fill_probability: 0.5,
        }
    }

    fn validate(&self) -> Result<(), Error> {
        if self.n_vlines.0 > self.n_vlines.1 || self.n_hlines.0 > self.n_hlines.1 {
            return Err(Error::InvalidParams("empty line-count range".into()));
        }
        if self.n_vlines.1 > 5 || self.n_hlines.1 > 5 {
            return Err(Error::InvalidParams(
                "at most 5 lines per direction are supported".into(),
            ));
        }
        if !(self.thickness_range.0 > 0.0
            && self.thickness_range.0 <= self.thickness_range.1
            && self.thickness_range.1 <= 0.05)
        {
            return Err(Error::InvalidParams(
                "thickness range must satisfy 0 < min <= max <= 0.05".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.fill_probability) {
            return Err(Error::InvalidParams(
                "fill probability must be in [0,1]".into(),
            ));
        }
        if self
            .color_weights
            .iter()
            .any(|(_, w)| *w < 0.0 || !w.is_finite())
        {
            return Err(Error::InvalidParams(
                "color weights must be finite and >= 0".into(),
            ));
        }
        if self.color_weights.iter().map(|(_, w)| w).sum::<f64>() <= 0.0 {
            return Err(Error::InvalidParams("color weights must sum to > 0".into()));
        }
        Ok(())
    }

    fn normalized_weights(&self) -> Vec<(PaletteClass, f64)> {
        let total: f64 = self.color_weights.iter().map(|(_, w)| w).sum();
        self.color_weights
            .iter()
            .map(|(c, w)| (*c, w / total))
            .collect()
    }
}

/// The defect an off-style composition carries.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Defect {
    DiagonalLine,
    OffpaletteColor,
    Both,
}

fn uniform(rng: &mut Xoshiro256PlusPlus, lo: f64, hi: f64) -> f64 {
    lo + rng.gen::<f64>() * (hi - lo)
}

/// Jittered 1/(k+1) grid positions in (0, 1), increasing, with guaranteed
/// separation from each other and the borders.
fn line_positions(rng: &mut Xoshiro256PlusPlus, k: u32) -> Vec<f64> {
    let k = k as usize;
    let step = 1.0 / (k as f64 + 1.0);
    (0..k)
        .map(|i| {
            let base = (i as f64 + 1.0) * step;
            quantize6(base + uniform(rng, -0.25, 0.25) * step)
        })
        .collect()
}

fn weighted_color(rng: &mut Xoshiro256PlusPlus, weights: &[(PaletteClass, f64)]) -> PaletteClass {
    let roll = rng.gen::<f64>();
    let mut acc = 0.0;
    for (class, w) in weights {
        acc += w;
        if roll < acc {
            return *class;
        }
    }
    weights
        .last()
        .map(|(c, _)| *c)
        .unwrap_or(PaletteClass::White)
}

fn gen_base(p: &GenParams) -> Result<(Composition, Xoshiro256PlusPlus), Error> {
    p.validate()?;
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(p.seed);
    let weights = p.normalized_weights();
    let canvas = Canvas { height_ratio: 1.0 };

    let k_v = rng.gen_range(p.n_vlines.0..=p.n_vlines.1);
    let k_h = rng.gen_range(p.n_hlines.0..=p.n_hlines.1);

    let mut elements = Vec::new();
    let mut v_edges = vec![0.0f64];
    for pos in line_positions(&mut rng, k_v) {
        let th = quantize6(uniform(&mut rng, p.thickness_range.0, p.thickness_range.1));
        elements.push(Element::Line(Line {
            orientation_deg: 90.0,
            axis_position: pos,
            span: (0.0, canvas.height_ratio),
            thickness: th,
            color: Color::Palette(PaletteClass::Black),
        }));
        v_edges.push(quantize6(pos - th / 2.0));
        v_edges.push(quantize6(pos + th / 2.0));
    }
    v_edges.push(1.0);

    let mut h_edges = vec![0.0f64];
    for pos in line_positions(&mut rng, k_h) {
        let th = quantize6(uniform(&mut rng, p.thickness_range.0, p.thickness_range.1));
        elements.push(Element::Line(Line {
            orientation_deg: 0.0,
            axis_position: pos,
            span: (0.0, 1.0),
            thickness: th,
            color: Color::Palette(PaletteClass::Black),
        }));
        h_edges.push(quantize6(pos - th / 2.0));
        h_edges.push(quantize6(pos + th / 2.0));
    }
    h_edges.push(canvas.height_ratio);

    // Cells run between line edges, row-major.
    for row in 0..h_edges.len() / 2 {
        let (y0, y1) = (h_edges[row * 2], h_edges[row * 2 + 1]);
        for col in 0..v_edges.len() / 2 {
            let (x0, x1) = (v_edges[col * 2], v_edges[col * 2 + 1]);
            let filled = rng.gen::<f64>() < p.fill_probability;
            let class = if filled {
                weighted_color(&mut rng, &weights)
            } else {
                PaletteClass::White
            };
            elements.push(Element::Region(Region {
                rect: Rect::new(x0, y0, x1, y1),
                color: Color::Palette(class),
            }));
        }
    }

    let composition = Composition {
        id: format!("neo-{:016x}", p.seed),
        ordinal: 0,
        canvas,
        elements,
        label: Some(Label::InStyle),
    };
    debug_assert!(validate_composition(&composition, true, DEFAULT_PALETTE_TOL).is_empty());
    Ok((composition, rng))
}

/// Generate an in-style composition: full-span black vertical and horizontal
/// lines partition the canvas, each cell filled with a weighted palette color
/// with `fill_probability`, else white. Output always passes strict
/// validation; identical seeds give identical compositions.
pub fn gen_neoplastic(p: &GenParams) -> Result<Composition, Error> {
    gen_base(p).map(|(c, _)| c)
}

fn inject_diagonal(rng: &mut Xoshiro256PlusPlus, composition: &mut Composition) {
    let deg = if rng.gen_bool(0.5) {
        quantize6(uniform(rng, 10.0, 80.0))
    } else {
        quantize6(uniform(rng, 100.0, 170.0))
    };
    let center = (uniform(rng, 0.3, 0.7), uniform(rng, 0.3, 0.7));
    let half_len = uniform(rng, 0.1, 0.2);
    let thickness = quantize6(uniform(rng, 0.008, 0.02));
    let line = Line::through(
        center,
        deg,
        half_len,
        thickness,
        Color::Palette(PaletteClass::Black),
    );
    composition.elements.push(Element::Line(Line {
        axis_position: quantize6(line.axis_position),
        span: (quantize6(line.span.0), quantize6(line.span.1)),
        ..line
    }));
}

/// An RGB color beyond Chebyshev distance `tol` from every palette anchor.
fn offpalette_rgb(rng: &mut Xoshiro256PlusPlus, tol: u8) -> (u8, u8, u8) {
    let far = |rgb: (u8, u8, u8)| {
        PALETTE_ANCHORS.iter().all(|(_, a)| {
            let d = (rgb.0 as i16 - a.0 as i16)
                .abs()
                .max((rgb.1 as i16 - a.1 as i16).abs())
                .max((rgb.2 as i16 - a.2 as i16).abs());
            d > tol as i16
        })
    };
    for _ in 0..64 {
        let rgb = (rng.gen::<u8>(), rng.gen::<u8>(), rng.gen::<u8>());
        if far(rgb) {
            return rgb;
        }
    }
    (90, 60, 180)
}

fn inject_offpalette(rng: &mut Xoshiro256PlusPlus, composition: &mut Composition) {
    let regions: Vec<usize> = composition
        .elements
        .iter()
        .enumerate()
        .filter(|(_, e)| e.as_region().is_some())
        .map(|(i, _)| i)
        .collect();
    let target = regions[rng.gen_range(0..regions.len())];
    let rgb = offpalette_rgb(rng, DEFAULT_PALETTE_TOL);
    if let Element::Region(r) = &mut composition.elements[target] {
        r.color = Color::Rgb(rgb.0, rgb.1, rgb.2);
    }
}

/// Generate an off-style composition: the in-style base for the seed plus at
/// least one diagonal line (orientation in 10-80 or 100-170 degrees) and/or
/// one region recolored beyond the palette tolerance.
pub fn gen_offstyle(p: &GenParams, defect: Defect) -> Result<Composition, Error> {
    let (mut composition, mut rng) = gen_base(p)?;
    match defect {
        Defect::DiagonalLine => inject_diagonal(&mut rng, &mut composition),
        Defect::OffpaletteColor => inject_offpalette(&mut rng, &mut composition),
        Defect::Both => {
            inject_diagonal(&mut rng, &mut composition);
            inject_offpalette(&mut rng, &mut composition);
        }
    }
    composition.id = format!("off-{:016x}", p.seed);
    composition.label = Some(Label::OffStyle);
    Ok(composition)
}

// ---------------------------------------------------------------------------
// Perturbation
// ---------------------------------------------------------------------------

/// One concrete edit applied to a composition. Indices refer to the element
/// list as it stands when the op is applied (earlier removals shift them).
#[derive(Clone, Debug, PartialEq)]
pub enum PerturbOp {
    AddLine(Line),
    RemoveLine {
        index: usize,
    },
    RecolorRegion {
        index: usize,
        color: Color,
    },
    MoveLine {
        index: usize,
        axis_position: f64,
        span: (f64, f64),
    },
    AddRegion(Region),
    RemoveRegion {
        index: usize,
    },
}

/// Apply ops in order and return the perturbed composition together with the
/// exact net atomic-change list (canonically ordered).
///
/// Ground truth is tracked per element: an element edited and later removed
/// collapses to a single elimination, an added-then-removed element to
/// nothing. Signatures are materialized with the supplied `stats`, so the
/// list is directly comparable with an induced rule under the same stats.
pub fn perturb(
    c: &Composition,
    ops: &[PerturbOp],
    stats: &CorpusFeatureStats,
    eps: f64,
    palette_tol: u8,
) -> Result<(Composition, Vec<AtomicChange>), Error> {
    // (element, origin index in c) — origin None marks added elements.
    let mut tracked: Vec<(Element, Option<usize>)> = c
        .elements
        .iter()
        .enumerate()
        .map(|(i, e)| (*e, Some(i)))
        .collect();

    for (op_index, op) in ops.iter().enumerate() {
        let fail = || Error::InapplicableOp { op_index };
        match op {
            PerturbOp::AddLine(line) => tracked.push((Element::Line(*line), None)),
            PerturbOp::AddRegion(region) => tracked.push((Element::Region(*region), None)),
            PerturbOp::RemoveLine { index } => {
                if *index >= tracked.len() || tracked[*index].0.as_line().is_none() {
                    return Err(fail());
                }
                tracked.remove(*index);
            }
            PerturbOp::RemoveRegion { index } => {
                if *index >= tracked.len() || tracked[*index].0.as_region().is_none() {
                    return Err(fail());
                }
                tracked.remove(*index);
            }
            PerturbOp::RecolorRegion { index, color } => match tracked.get_mut(*index) {
                Some((Element::Region(r), _)) => r.color = *color,
                _ => return Err(fail()),
            },
            PerturbOp::MoveLine {
                index,
                axis_position,
                span,
            } => match tracked.get_mut(*index) {
                Some((Element::Line(l), _)) => {
                    l.axis_position = *axis_position;
                    l.span = *span;
                }
                _ => return Err(fail()),
            },
        }
    }

    let curr = Composition {
        id: c.id.clone(),
        ordinal: c.ordinal + 1,
        canvas: c.canvas,
        elements: tracked.iter().map(|(e, _)| *e).collect(),
        label: c.label,
    };
    if !validate_composition(&curr, false, palette_tol).is_empty() {
        return Err(Error::PerturbInvalid);
    }

    let sig = |e: &Element| discretize(e, &c.canvas, stats, eps, palette_tol);
    let mut changes = Vec::new();
    for (i, prev_el) in c.elements.iter().enumerate() {
        let survivor = tracked.iter().find(|(_, origin)| *origin == Some(i));
        let before = sig(prev_el)?;
        match survivor {
            None => changes.push(AtomicChange::Eliminate {
                sig_before: before,
                locus: before.position_cell,
            }),
            Some((el, _)) => {
                let after = sig(el)?;
                if after != before {
                    changes.push(AtomicChange::Modify {
                        sig_before: before,
                        sig_after: after,
                        locus: before.position_cell,
                    });
                }
            }
        }
    }
    for (el, origin) in &tracked {
        if origin.is_none() {
            let after = sig(el)?;
            changes.push(AtomicChange::Add {
                sig_after: after,
                locus: after.position_cell,
            });
        }
    }
    sort_changes_canonical(&mut changes);
    Ok((curr, changes))
}

/// Sample a list of applicable ops for `c`, seeded and deterministic.
///
/// Placement is constraint-aware so that an induced rule sees the same story
/// the ground truth tells: additions and moved lines keep their footprints
/// clear (IoU < 0.35) of every live element and of every vacated footprint,
/// and moves are small enough (axis shift <= thickness/4, span shrink to 60%)
/// that the element still matches itself at IoU >= 0.5.
pub fn sample_ops(c: &Composition, n_ops: usize, seed: u64) -> Vec<PerturbOp> {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
    let mut working: Vec<(Element, bool)> = c.elements.iter().map(|e| (*e, false)).collect();
    let mut vacated: Vec<Rect> = Vec::new();
    let mut ops = Vec::new();

    let clear = |fp: &Rect, working: &[(Element, bool)], vacated: &[Rect]| {
        working.iter().all(|(e, _)| e.footprint().iou(fp) < 0.35)
            && vacated.iter().all(|v| v.iou(fp) < 0.35)
    };
    let inside = |fp: &Rect, canvas: &Canvas| {
        fp.x0 >= 0.0 && fp.y0 >= 0.0 && fp.x1 <= 1.0 && fp.y1 <= canvas.height_ratio
    };

    for _ in 0..n_ops {
        let first_kind = rng.gen_range(0..6u8);
        let mut placed = false;
        for offset in 0..6u8 {
            let kind = (first_kind + offset) % 6;
            match kind {
                // Add a line away from everything.
                0 => {
                    for _ in 0..24 {
                        let vertical = rng.gen_bool(0.5);
                        let axis = quantize6(uniform(&mut rng, 0.1, 0.9));
                        let full = rng.gen_bool(0.5);
                        let span = if full {
                            (0.0, 1.0)
                        } else {
                            let len = uniform(&mut rng, 0.2, 0.5);
                            let start = quantize6(uniform(&mut rng, 0.05, 0.95 - len));
                            (start, quantize6(start + len))
                        };
                        let line = Line {
                            orientation_deg: if vertical { 90.0 } else { 0.0 },
                            axis_position: axis,
                            span,
                            thickness: quantize6(uniform(&mut rng, 0.008, 0.03)),
                            color: Color::Palette(PaletteClass::Black),
                        };
                        let fp = line.footprint();
                        if inside(&fp, &c.canvas) && clear(&fp, &working, &vacated) {
                            working.push((Element::Line(line), true));
                            ops.push(PerturbOp::AddLine(line));
                            placed = true;
                            break;
                        }
                    }
                }
                // Add a region away from everything.
                1 => {
                    for _ in 0..24 {
                        let w = uniform(&mut rng, 0.08, 0.3);
                        let h = uniform(&mut rng, 0.08, 0.3);
                        let x0 = quantize6(uniform(&mut rng, 0.0, 1.0 - w));
                        let y0 = quantize6(uniform(&mut rng, 0.0, c.canvas.height_ratio - h));
                        let rect = Rect::new(x0, y0, quantize6(x0 + w), quantize6(y0 + h));
                        let palette = [
                            PaletteClass::White,
                            PaletteClass::Red,
                            PaletteClass::Blue,
                            PaletteClass::Yellow,
                        ];
                        let region = Region {
                            rect,
                            color: Color::Palette(palette[rng.gen_range(0..palette.len())]),
                        };
                        if inside(&rect, &c.canvas) && clear(&rect, &working, &vacated) {
                            working.push((Element::Region(region), true));
                            ops.push(PerturbOp::AddRegion(region));
                            placed = true;
                            break;
                        }
                    }
                }
                // Remove an untouched line.
                2 => {
                    let lines: Vec<usize> = working
                        .iter()
                        .enumerate()
                        .filter(|(_, (e, touched))| e.as_line().is_some() && !touched)
                        .map(|(i, _)| i)
                        .collect();
                    if let Some(&index) = pick(&mut rng, &lines) {
                        vacated.push(working[index].0.footprint());
                        working.remove(index);
                        ops.push(PerturbOp::RemoveLine { index });
                        placed = true;
                    }
                }
                // Remove an untouched region.
                3 => {
                    let regions: Vec<usize> = working
                        .iter()
                        .enumerate()
                        .filter(|(_, (e, touched))| e.as_region().is_some() && !touched)
                        .map(|(i, _)| i)
                        .collect();
                    if let Some(&index) = pick(&mut rng, &regions) {
                        vacated.push(working[index].0.footprint());
                        working.remove(index);
                        ops.push(PerturbOp::RemoveRegion { index });
                        placed = true;
                    }
                }
                // Recolor an untouched region to a different palette class.
                4 => {
                    let regions: Vec<usize> = working
                        .iter()
                        .enumerate()
                        .filter(|(_, (e, touched))| e.as_region().is_some() && !touched)
                        .map(|(i, _)| i)
                        .collect();
                    if let Some(&index) = pick(&mut rng, &regions) {
                        let current = working[index].0.color();
                        let choices: Vec<PaletteClass> = [
                            PaletteClass::White,
                            PaletteClass::Red,
                            PaletteClass::Blue,
                            PaletteClass::Yellow,
                        ]
                        .into_iter()
                        .filter(|p| current != Color::Palette(*p))
                        .collect();
                        let color = Color::Palette(choices[rng.gen_range(0..choices.len())]);
                        if let (Element::Region(r), touched) = &mut working[index] {
                            r.color = color;
                            *touched = true;
                        }
                        ops.push(PerturbOp::RecolorRegion { index, color });
                        placed = true;
                    }
                }
                // Move or shorten an untouched line, keeping self-IoU >= 0.5.
                _ => {
                    let lines: Vec<usize> = working
                        .iter()
                        .enumerate()
                        .filter(|(_, (e, touched))| e.as_line().is_some() && !touched)
                        .map(|(i, _)| i)
                        .collect();
                    if let Some(&index) = pick(&mut rng, &lines) {
                        let line = *working[index].0.as_line().expect("filtered to lines");
                        let candidate = if rng.gen_bool(0.5) {
                            let shift = uniform(&mut rng, -1.0, 1.0) * line.thickness / 4.0;
                            Line {
                                axis_position: quantize6(line.axis_position + shift),
                                ..line
                            }
                        } else {
                            let len = line.span.1 - line.span.0;
                            Line {
                                span: (
                                    quantize6(line.span.0 + 0.2 * len),
                                    quantize6(line.span.1 - 0.2 * len),
                                ),
                                ..line
                            }
                        };
                        let fp = candidate.footprint();
                        let others_clear = working
                            .iter()
                            .enumerate()
                            .filter(|(i, _)| *i != index)
                            .all(|(_, (e, _))| e.footprint().iou(&fp) < 0.35)
                            && vacated.iter().all(|v| v.iou(&fp) < 0.35);
                        if inside(&fp, &c.canvas) && others_clear {
                            vacated.push(line.footprint());
                            working[index] = (Element::Line(candidate), true);
                            ops.push(PerturbOp::MoveLine {
                                index,
                                axis_position: candidate.axis_position,
                                span: candidate.span,
                            });
                            placed = true;
                        }
                    }
                }
            }
            if placed {
                break;
            }
        }
    }
    ops
}

fn pick<'a, T>(rng: &mut Xoshiro256PlusPlus, items: &'a [T]) -> Option<&'a T> {
    if items.is_empty() {
        None
    } else {
        Some(&items[rng.gen_range(0..items.len())])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::serialize_composition;
    use crate::scene::{
        corpus_feature_stats, signature_multiset, ColorClass, OrientationClass, ViolationKind,
        DEFAULT_EPSILON,
    };

    fn fixed_params(seed: u64) -> GenParams {
        GenParams {
            n_vlines: (2, 2),
            n_hlines: (2, 2),
            fill_probability: 0.0,
            ..GenParams::new(seed)
        }
    }

    #[test]
    fn zero_fill_gives_four_lines_and_white_cells() {
        let c = gen_neoplastic(&fixed_params(1)).unwrap();
        let lines = c.elements.iter().filter(|e| e.as_line().is_some()).count();
        assert_eq!(lines, 4);
        assert!(c
            .elements
            .iter()
            .filter_map(|e| e.as_region())
            .all(|r| r.color == Color::Palette(PaletteClass::White)));
        assert_eq!(c.elements.len(), 4 + 9);
    }

    #[test]
    fn same_seed_serializes_identically() {
        let a = gen_neoplastic(&GenParams::new(7)).unwrap();
        let b = gen_neoplastic(&GenParams::new(7)).unwrap();
        assert_eq!(serialize_composition(&a), serialize_composition(&b));
    }

    #[test]
    fn generated_compositions_pass_strict_validation() {
        for seed in 0..50 {
            let c = gen_neoplastic(&GenParams::new(seed)).unwrap();
            assert!(
                validate_composition(&c, true, DEFAULT_PALETTE_TOL).is_empty(),
                "seed {seed}"
            );
        }
    }

    #[test]
    fn diagonal_defect_fails_strict_orientation() {
        let c = gen_offstyle(&GenParams::new(3), Defect::DiagonalLine).unwrap();
        let violations = validate_composition(&c, true, DEFAULT_PALETTE_TOL);
        assert!(violations
            .iter()
            .any(|v| v.kind == ViolationKind::OrientationViolation));
        // The injected line is diagonal and does not reach the borders.
        let stats = corpus_feature_stats(std::slice::from_ref(&c));
        let sigs = signature_multiset(&c, &stats, DEFAULT_EPSILON, DEFAULT_PALETTE_TOL).unwrap();
        assert!(sigs
            .iter()
            .any(|s| s.orientation_class == Some(OrientationClass::D)));
    }

    #[test]
    fn offpalette_defect_produces_other_color_class() {
        let c = gen_offstyle(&GenParams::new(5), Defect::OffpaletteColor).unwrap();
        let stats = corpus_feature_stats(std::slice::from_ref(&c));
        let sigs = signature_multiset(&c, &stats, DEFAULT_EPSILON, DEFAULT_PALETTE_TOL).unwrap();
        assert!(sigs.iter().any(|s| s.color_class == ColorClass::Other));
        let violations = validate_composition(&c, true, DEFAULT_PALETTE_TOL);
        assert!(violations
            .iter()
            .any(|v| v.kind == ViolationKind::OffPaletteColor));
    }

    #[test]
    fn both_defects_are_present_together() {
        let c = gen_offstyle(&GenParams::new(11), Defect::Both).unwrap();
        let violations = validate_composition(&c, true, DEFAULT_PALETTE_TOL);
        assert!(violations
            .iter()
            .any(|v| v.kind == ViolationKind::OrientationViolation));
        assert!(violations
            .iter()
            .any(|v| v.kind == ViolationKind::OffPaletteColor));
    }

    #[test]
    fn empty_ops_change_nothing() {
        let c = gen_neoplastic(&GenParams::new(2)).unwrap();
        let stats = corpus_feature_stats(std::slice::from_ref(&c));
        let (next, truth) = perturb(&c, &[], &stats, DEFAULT_EPSILON, DEFAULT_PALETTE_TOL).unwrap();
        assert_eq!(next.elements, c.elements);
        assert_eq!(next.ordinal, c.ordinal + 1);
        assert!(truth.is_empty());
    }

    #[test]
    fn recolor_produces_single_color_modify_atom() {
        let c = gen_neoplastic(&GenParams::new(2)).unwrap();
        let stats = corpus_feature_stats(std::slice::from_ref(&c));
        let target = c
            .elements
            .iter()
            .position(|e| e.as_region().is_some())
            .unwrap();
        let new_color = if c.elements[target].color() == Color::Palette(PaletteClass::Blue) {
            Color::Palette(PaletteClass::Red)
        } else {
            Color::Palette(PaletteClass::Blue)
        };
        let ops = vec![PerturbOp::RecolorRegion {
            index: target,
            color: new_color,
        }];
        let (_, truth) = perturb(&c, &ops, &stats, DEFAULT_EPSILON, DEFAULT_PALETTE_TOL).unwrap();
        assert_eq!(truth.len(), 1);
        match &truth[0] {
            AtomicChange::Modify {
                sig_before,
                sig_after,
                ..
            } => {
                assert_ne!(sig_before.color_class, sig_after.color_class);
                assert_eq!(sig_before.position_cell, sig_after.position_cell);
                assert_eq!(sig_before.size_class, sig_after.size_class);
            }
            other => panic!("expected modify, got {other:?}"),
        }
    }

    #[test]
    fn remove_then_add_yields_one_eliminate_and_one_add() {
        let c = gen_neoplastic(&fixed_params(9)).unwrap();
        let stats = corpus_feature_stats(std::slice::from_ref(&c));
        let ops = vec![
            PerturbOp::RemoveLine { index: 0 },
            PerturbOp::AddLine(Line {
                orientation_deg: 0.0,
                axis_position: 0.05,
                span: (0.2, 0.6),
                thickness: 0.01,
                color: Color::Palette(PaletteClass::Black),
            }),
        ];
        let (_, truth) = perturb(&c, &ops, &stats, DEFAULT_EPSILON, DEFAULT_PALETTE_TOL).unwrap();
        let kinds: Vec<&str> = truth.iter().map(|a| a.op_str()).collect();
        assert_eq!(kinds, vec!["eliminate", "add"]);
    }

    #[test]
    fn out_of_range_op_is_inapplicable() {
        let c = gen_neoplastic(&fixed_params(4)).unwrap();
        let stats = corpus_feature_stats(std::slice::from_ref(&c));
        let err = perturb(
            &c,
            &[PerturbOp::RemoveLine { index: 999 }],
            &stats,
            DEFAULT_EPSILON,
            DEFAULT_PALETTE_TOL,
        );
        assert!(matches!(err, Err(Error::InapplicableOp { op_index: 0 })));
    }

    #[test]
    fn sampled_ops_apply_cleanly() {
        for seed in 0..20 {
            let c = gen_neoplastic(&GenParams::new(seed)).unwrap();
            let stats = corpus_feature_stats(std::slice::from_ref(&c));
            let ops = sample_ops(&c, 3, seed ^ 0xABCD);
            let (next, _) =
                perturb(&c, &ops, &stats, DEFAULT_EPSILON, DEFAULT_PALETTE_TOL).unwrap();
            assert!(validate_composition(&next, false, DEFAULT_PALETTE_TOL).is_empty());
        }
    }
}
