//! Typed scene model for compositions: lines, regions, palette classification,
//! discretization into concept signatures, and pairwise relation extraction.
//!
//! Geometry lives on a unit-width canvas: `[0, 1] x [0, height_ratio]`, y
//! growing downwards. All analysis is driven by [`ConceptSignature`] values, a
//! discretized per-element descriptor that is cheap to count, compare and
//! serialize.

use std::collections::BTreeSet;

use crate::error::Error;

/// Orientation tolerance (degrees) for the H/V classes. Inputs within this
/// band of 0/180 or 90 still classify as axis-aligned.
pub const ORIENTATION_TOL_DEG: f64 = 5.0;

/// Default Chebyshev tolerance for snapping an RGB color to a palette anchor.
pub const DEFAULT_PALETTE_TOL: u8 = 32;

/// Default border-contact / adjacency-gap tolerance (one canvas percent).
pub const DEFAULT_EPSILON: f64 = 0.01;

/// Fallback area terciles used when a corpus has fewer than 3 elements.
pub const FALLBACK_TERCILES: (f64, f64) = (0.02, 0.15);

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Label {
    InStyle,
    OffStyle,
    Unknown,
}

impl Label {
    pub fn as_str(&self) -> &'static str {
        match self {
            Label::InStyle => "in_style",
            Label::OffStyle => "off_style",
            Label::Unknown => "unknown",
        }
    }

    pub fn parse(s: &str) -> Option<Label> {
        match s {
            "in_style" => Some(Label::InStyle),
            "off_style" => Some(Label::OffStyle),
            "unknown" => Some(Label::Unknown),
            _ => None,
        }
    }
}

/// Unit-width canvas; only the aspect ratio varies.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Canvas {
    pub height_ratio: f64,
}

impl Canvas {
    pub fn width(&self) -> f64 {
        1.0
    }

    pub fn area(&self) -> f64 {
        self.height_ratio
    }

    pub fn center(&self) -> (f64, f64) {
        (0.5, self.height_ratio / 2.0)
    }

    pub fn diagonal(&self) -> f64 {
        (1.0 + self.height_ratio * self.height_ratio).sqrt()
    }

    /// Distance from a point to the nearest canvas border (negative outside).
    pub fn border_distance(&self, p: (f64, f64)) -> f64 {
        let (x, y) = p;
        x.min(1.0 - x).min(y).min(self.height_ratio - y)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PaletteClass {
    Black,
    White,
    Gray,
    Red,
    Blue,
    Yellow,
}

/// Canonical RGB anchor for each palette class.
pub const PALETTE_ANCHORS: [(PaletteClass, (u8, u8, u8)); 6] = [
    (PaletteClass::Black, (0, 0, 0)),
    (PaletteClass::White, (255, 255, 255)),
    (PaletteClass::Gray, (128, 128, 128)),
    (PaletteClass::Red, (230, 0, 0)),
    (PaletteClass::Blue, (0, 0, 200)),
    (PaletteClass::Yellow, (255, 220, 0)),
];

impl PaletteClass {
    pub const ALL: [PaletteClass; 6] = [
        PaletteClass::Black,
        PaletteClass::White,
        PaletteClass::Gray,
        PaletteClass::Red,
        PaletteClass::Blue,
        PaletteClass::Yellow,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            PaletteClass::Black => "black",
            PaletteClass::White => "white",
            PaletteClass::Gray => "gray",
            PaletteClass::Red => "red",
            PaletteClass::Blue => "blue",
            PaletteClass::Yellow => "yellow",
        }
    }

    pub fn parse(s: &str) -> Option<PaletteClass> {
        match s {
            "black" => Some(PaletteClass::Black),
            "white" => Some(PaletteClass::White),
            "gray" => Some(PaletteClass::Gray),
            "red" => Some(PaletteClass::Red),
            "blue" => Some(PaletteClass::Blue),
            "yellow" => Some(PaletteClass::Yellow),
            _ => None,
        }
    }

    pub fn anchor_rgb(&self) -> (u8, u8, u8) {
        PALETTE_ANCHORS
            .iter()
            .find(|(c, _)| c == self)
            .map(|(_, rgb)| *rgb)
            .expect("every class has an anchor")
    }
}

/// A color is either a declared palette class or a raw RGB triple.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Color {
    Palette(PaletteClass),
    Rgb(u8, u8, u8),
}

/// Discretized color attribute: the palette classes plus a catch-all.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ColorClass {
    Black,
    White,
    Gray,
    Red,
    Blue,
    Yellow,
    Other,
}

impl ColorClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            ColorClass::Black => "black",
            ColorClass::White => "white",
            ColorClass::Gray => "gray",
            ColorClass::Red => "red",
            ColorClass::Blue => "blue",
            ColorClass::Yellow => "yellow",
            ColorClass::Other => "other",
        }
    }

    pub fn palette(&self) -> Option<PaletteClass> {
        match self {
            ColorClass::Black => Some(PaletteClass::Black),
            ColorClass::White => Some(PaletteClass::White),
            ColorClass::Gray => Some(PaletteClass::Gray),
            ColorClass::Red => Some(PaletteClass::Red),
            ColorClass::Blue => Some(PaletteClass::Blue),
            ColorClass::Yellow => Some(PaletteClass::Yellow),
            ColorClass::Other => None,
        }
    }
}

impl From<PaletteClass> for ColorClass {
    fn from(p: PaletteClass) -> ColorClass {
        match p {
            PaletteClass::Black => ColorClass::Black,
            PaletteClass::White => ColorClass::White,
            PaletteClass::Gray => ColorClass::Gray,
            PaletteClass::Red => ColorClass::Red,
            PaletteClass::Blue => ColorClass::Blue,
            PaletteClass::Yellow => ColorClass::Yellow,
        }
    }
}

/// Axis-aligned rectangle, `x0 < x1`, `y0 < y1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rect {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl Rect {
    pub fn new(x0: f64, y0: f64, x1: f64, y1: f64) -> Rect {
        Rect { x0, y0, x1, y1 }
    }

    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> f64 {
        self.y1 - self.y0
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn centroid(&self) -> (f64, f64) {
        ((self.x0 + self.x1) / 2.0, (self.y0 + self.y1) / 2.0)
    }

    pub fn intersection_area(&self, other: &Rect) -> f64 {
        let w = self.x1.min(other.x1) - self.x0.max(other.x0);
        let h = self.y1.min(other.y1) - self.y0.max(other.y0);
        if w > 0.0 && h > 0.0 {
            w * h
        } else {
            0.0
        }
    }

    /// Intersection over union; 0 when both rects are degenerate.
    pub fn iou(&self, other: &Rect) -> f64 {
        let inter = self.intersection_area(other);
        let union = self.area() + other.area() - inter;
        if union > 0.0 {
            inter / union
        } else {
            0.0
        }
    }

    pub fn strictly_contains(&self, other: &Rect) -> bool {
        self.x0 < other.x0 && self.y0 < other.y0 && self.x1 > other.x1 && self.y1 > other.y1
    }
}

/// Straight line segment, parameterized by orientation (degrees in `[0, 180)`),
/// offset along the unit normal (`axis_position`), span along the direction,
/// and stroke thickness. `orientation_deg` 0 is horizontal, 90 vertical.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Line {
    pub orientation_deg: f64,
    pub axis_position: f64,
    pub span: (f64, f64),
    pub thickness: f64,
    pub color: Color,
}

impl Line {
    /// Unit direction and sign-normalized unit normal for an orientation.
    /// The normal's dominant component is kept positive so the offset side
    /// is well defined for every angle.
    pub fn frame(orientation_deg: f64) -> ((f64, f64), (f64, f64)) {
        let rad = orientation_deg.to_radians();
        let dir = (rad.cos(), rad.sin());
        let mut normal = (-dir.1, dir.0);
        let flip = if normal.1.abs() >= normal.0.abs() {
            normal.1 < 0.0
        } else {
            normal.0 < 0.0
        };
        if flip {
            normal = (-normal.0, -normal.1);
        }
        (dir, normal)
    }

    /// Build a line of the given orientation running through `center`,
    /// extending `half_len` to each side.
    pub fn through(
        center: (f64, f64),
        orientation_deg: f64,
        half_len: f64,
        thickness: f64,
        color: Color,
    ) -> Line {
        let (dir, normal) = Line::frame(orientation_deg);
        let t = center.0 * dir.0 + center.1 * dir.1;
        Line {
            orientation_deg,
            axis_position: center.0 * normal.0 + center.1 * normal.1,
            span: (t - half_len, t + half_len),
            thickness,
            color,
        }
    }

    /// Segment endpoints on the canvas.
    ///
    /// Horizontal and vertical orientations are special-cased so that axis
    /// positions map exactly (no trig noise): a 0-degree line runs
    /// `(span.0, axis) -> (span.1, axis)`, a 90-degree line
    /// `(axis, span.0) -> (axis, span.1)`.
    pub fn endpoints(&self) -> ((f64, f64), (f64, f64)) {
        if self.orientation_deg == 0.0 {
            return (
                (self.span.0, self.axis_position),
                (self.span.1, self.axis_position),
            );
        }
        if self.orientation_deg == 90.0 {
            return (
                (self.axis_position, self.span.0),
                (self.axis_position, self.span.1),
            );
        }
        let (dir, normal) = Line::frame(self.orientation_deg);
        let at = |t: f64| {
            (
                self.axis_position * normal.0 + t * dir.0,
                self.axis_position * normal.1 + t * dir.1,
            )
        };
        (at(self.span.0), at(self.span.1))
    }

    pub fn length(&self) -> f64 {
        self.span.1 - self.span.0
    }

    pub fn area(&self) -> f64 {
        self.length() * self.thickness
    }

    pub fn centroid(&self) -> (f64, f64) {
        let (a, b) = self.endpoints();
        ((a.0 + b.0) / 2.0, (a.1 + b.1) / 2.0)
    }

    /// Axis-aligned bounding box of the thickness-expanded stroke.
    pub fn footprint(&self) -> Rect {
        let (a, b) = self.endpoints();
        if self.orientation_deg == 0.0 {
            return Rect::new(
                a.0,
                self.axis_position - self.thickness / 2.0,
                b.0,
                self.axis_position + self.thickness / 2.0,
            );
        }
        if self.orientation_deg == 90.0 {
            return Rect::new(
                self.axis_position - self.thickness / 2.0,
                a.1,
                self.axis_position + self.thickness / 2.0,
                b.1,
            );
        }
        let rad = self.orientation_deg.to_radians();
        let (nx, ny) = (-rad.sin(), rad.cos());
        let half = self.thickness / 2.0;
        let xs = [
            a.0 + nx * half,
            a.0 - nx * half,
            b.0 + nx * half,
            b.0 - nx * half,
        ];
        let ys = [
            a.1 + ny * half,
            a.1 - ny * half,
            b.1 + ny * half,
            b.1 - ny * half,
        ];
        let min = |v: &[f64]| v.iter().fold(f64::INFINITY, |m, &x| m.min(x));
        let max = |v: &[f64]| v.iter().fold(f64::NEG_INFINITY, |m, &x| m.max(x));
        Rect::new(min(&xs), min(&ys), max(&xs), max(&ys))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Region {
    pub rect: Rect,
    pub color: Color,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Element {
    Line(Line),
    Region(Region),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ElementKind {
    Line,
    Region,
}

impl ElementKind {
    pub const ALL: [ElementKind; 2] = [ElementKind::Line, ElementKind::Region];

    pub fn as_str(&self) -> &'static str {
        match self {
            ElementKind::Line => "line",
            ElementKind::Region => "region",
        }
    }
}

impl Element {
    pub fn kind(&self) -> ElementKind {
        match self {
            Element::Line(_) => ElementKind::Line,
            Element::Region(_) => ElementKind::Region,
        }
    }

    pub fn color(&self) -> Color {
        match self {
            Element::Line(l) => l.color,
            Element::Region(r) => r.color,
        }
    }

    pub fn area(&self) -> f64 {
        match self {
            Element::Line(l) => l.area(),
            Element::Region(r) => r.rect.area(),
        }
    }

    pub fn centroid(&self) -> (f64, f64) {
        match self {
            Element::Line(l) => l.centroid(),
            Element::Region(r) => r.rect.centroid(),
        }
    }

    /// Geometric footprint used for bounds checks and IoU matching.
    pub fn footprint(&self) -> Rect {
        match self {
            Element::Line(l) => l.footprint(),
            Element::Region(r) => r.rect,
        }
    }

    pub fn as_line(&self) -> Option<&Line> {
        match self {
            Element::Line(l) => Some(l),
            Element::Region(_) => None,
        }
    }

    pub fn as_region(&self) -> Option<&Region> {
        match self {
            Element::Region(r) => Some(r),
            Element::Line(_) => None,
        }
    }
}

/// One painting: an ordered list of elements on a canvas, with a position in
/// the chronological corpus and an optional style label.
#[derive(Clone, Debug, PartialEq)]
pub struct Composition {
    pub id: String,
    pub ordinal: u32,
    pub canvas: Canvas,
    pub elements: Vec<Element>,
    pub label: Option<Label>,
}

// ---------------------------------------------------------------------------
// Concept signatures
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum OrientationClass {
    H,
    V,
    D,
}

impl OrientationClass {
    pub const ALL: [OrientationClass; 3] = [
        OrientationClass::H,
        OrientationClass::V,
        OrientationClass::D,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            OrientationClass::H => "H",
            OrientationClass::V => "V",
            OrientationClass::D => "D",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SizeClass {
    Small,
    Medium,
    Large,
}

impl SizeClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            SizeClass::Small => "small",
            SizeClass::Medium => "medium",
            SizeClass::Large => "large",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BoundaryContact {
    BothEnds,
    OneEnd,
    Interior,
}

impl BoundaryContact {
    pub fn as_str(&self) -> &'static str {
        match self {
            BoundaryContact::BothEnds => "both_ends",
            BoundaryContact::OneEnd => "one_end",
            BoundaryContact::Interior => "interior",
        }
    }
}

/// Discretized element descriptor. Signatures are value-comparable and
/// hashable; every counting structure in the crate is keyed by them.
/// `orientation_class` is `None` for regions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ConceptSignature {
    pub kind: ElementKind,
    pub orientation_class: Option<OrientationClass>,
    pub size_class: SizeClass,
    pub position_cell: u8,
    pub color_class: ColorClass,
    pub boundary_contact: BoundaryContact,
}

impl ConceptSignature {
    /// Stable token form, e.g. `line|H|large|4|black|both_ends`.
    pub fn token(&self) -> String {
        format!(
            "{}|{}|{}|{}|{}|{}",
            self.kind.as_str(),
            self.orientation_class.map_or("-", |o| o.as_str()),
            self.size_class.as_str(),
            self.position_cell,
            self.color_class.as_str(),
            self.boundary_contact.as_str()
        )
    }

    pub fn cell_row(&self) -> u8 {
        self.position_cell / 3
    }

    pub fn cell_col(&self) -> u8 {
        self.position_cell % 3
    }
}

impl std::fmt::Display for ConceptSignature {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.token())
    }
}

// ---------------------------------------------------------------------------
// Relations
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RelKind {
    Adjacent,
    SeparatedByLine,
    ColorOpposition,
    Aligned,
    Contains,
}

impl RelKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            RelKind::Adjacent => "adjacent",
            RelKind::SeparatedByLine => "separated_by_line",
            RelKind::ColorOpposition => "color_opposition",
            RelKind::Aligned => "aligned",
            RelKind::Contains => "contains",
        }
    }
}

/// A relation between two elements, with canonically ordered indices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RelationInstance {
    pub pair: (usize, usize),
    pub relkind: RelKind,
}

impl RelationInstance {
    pub fn new(a: usize, b: usize, relkind: RelKind) -> RelationInstance {
        assert_ne!(a, b, "relation endpoints must be distinct");
        let pair = if a < b { (a, b) } else { (b, a) };
        RelationInstance { pair, relkind }
    }
}

// ---------------------------------------------------------------------------
// Corpus feature statistics
// ---------------------------------------------------------------------------

/// Area tercile thresholds over a corpus, backing the size classes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CorpusFeatureStats {
    pub area_terciles: (f64, f64),
    pub fallback: bool,
}

impl CorpusFeatureStats {
    pub fn fallback() -> CorpusFeatureStats {
        CorpusFeatureStats {
            area_terciles: FALLBACK_TERCILES,
            fallback: true,
        }
    }

    pub fn size_class(&self, area: f64) -> SizeClass {
        let (t1, t2) = self.area_terciles;
        if area >= t2 {
            SizeClass::Large
        } else if area >= t1 {
            SizeClass::Medium
        } else {
            SizeClass::Small
        }
    }
}

/// Tercile thresholds over all element areas in the corpus. Thresholds sit on
/// the first member of the middle and top terciles (`sorted[floor(n/3)]`,
/// `sorted[floor(2n/3)]`); fewer than 3 elements yields the fixed fallback.
pub fn corpus_feature_stats(corpus: &[Composition]) -> CorpusFeatureStats {
    let mut areas: Vec<f64> = corpus
        .iter()
        .flat_map(|c| c.elements.iter().map(Element::area))
        .collect();
    if areas.len() < 3 {
        return CorpusFeatureStats::fallback();
    }
    areas.sort_by(f64::total_cmp);
    let n = areas.len();
    CorpusFeatureStats {
        area_terciles: (areas[n / 3], areas[2 * n / 3]),
        fallback: false,
    }
}

// ---------------------------------------------------------------------------
// Palette classification
// ---------------------------------------------------------------------------

fn chebyshev(a: (u8, u8, u8), b: (u8, u8, u8)) -> u8 {
    let d = |x: u8, y: u8| (x as i16 - y as i16).unsigned_abs() as u8;
    d(a.0, b.0).max(d(a.1, b.1)).max(d(a.2, b.2))
}

/// Snap a color to the nearest palette anchor within Chebyshev distance `tol`,
/// else `Other`. Declared palette colors pass through unchanged. Distance ties
/// resolve to the first anchor in declaration order.
pub fn palette_class(color: Color, tol: u8) -> ColorClass {
    match color {
        Color::Palette(p) => p.into(),
        Color::Rgb(r, g, b) => {
            let mut best: Option<(u8, PaletteClass)> = None;
            for (class, anchor) in PALETTE_ANCHORS {
                let d = chebyshev((r, g, b), anchor);
                if best.is_none_or(|(bd, _)| d < bd) {
                    best = Some((d, class));
                }
            }
            let (d, class) = best.expect("anchors non-empty");
            if d <= tol {
                class.into()
            } else {
                ColorClass::Other
            }
        }
    }
}

/// Opposing color pairs: black/white, and any two distinct primaries.
pub fn opposing(a: ColorClass, b: ColorClass) -> bool {
    use ColorClass::*;
    matches!((a, b), (Black, White) | (White, Black))
        || (a != b && matches!(a, Red | Blue | Yellow) && matches!(b, Red | Blue | Yellow))
}

// ---------------------------------------------------------------------------
// Discretization
// ---------------------------------------------------------------------------

/// 3x3 grid cell of a point, row-major from the top-left corner.
pub fn position_cell(p: (f64, f64), canvas: &Canvas) -> u8 {
    let clamp = |v: f64| (v.floor() as i64).clamp(0, 2) as u8;
    let col = clamp(p.0 * 3.0);
    let row = clamp(p.1 / canvas.height_ratio * 3.0);
    row * 3 + col
}

/// Classify an orientation angle; distances are taken mod 180 so 178 degrees
/// is horizontal.
pub fn orientation_class(deg: f64) -> OrientationClass {
    let d0 = deg.min(180.0 - deg);
    if d0 <= ORIENTATION_TOL_DEG {
        OrientationClass::H
    } else if (deg - 90.0).abs() <= ORIENTATION_TOL_DEG {
        OrientationClass::V
    } else {
        OrientationClass::D
    }
}

/// Discretize one element into its concept signature.
///
/// Rejects elements whose footprint leaves the canvas; everything else is a
/// pure function of `(element, canvas, stats, eps, palette_tol)`.
pub fn discretize(
    element: &Element,
    canvas: &Canvas,
    stats: &CorpusFeatureStats,
    eps: f64,
    palette_tol: u8,
) -> Result<ConceptSignature, Error> {
    let fp = element.footprint();
    let slack = 1e-9;
    if fp.x0 < -slack
        || fp.y0 < -slack
        || fp.x1 > 1.0 + slack
        || fp.y1 > canvas.height_ratio + slack
    {
        return Err(Error::GeometryOutsideCanvas);
    }
    let boundary_contact = match element {
        Element::Line(l) => {
            let (a, b) = l.endpoints();
            let on_border = |p| canvas.border_distance(p) <= eps;
            match (on_border(a), on_border(b)) {
                (true, true) => BoundaryContact::BothEnds,
                (false, false) => BoundaryContact::Interior,
                _ => BoundaryContact::OneEnd,
            }
        }
        Element::Region(_) => BoundaryContact::Interior,
    };
    Ok(ConceptSignature {
        kind: element.kind(),
        orientation_class: element
            .as_line()
            .map(|l| orientation_class(l.orientation_deg)),
        size_class: stats.size_class(element.area()),
        position_cell: position_cell(element.centroid(), canvas),
        color_class: palette_class(element.color(), palette_tol),
        boundary_contact,
    })
}

/// Signatures of all elements, in element order (a multiset).
pub fn signature_multiset(
    c: &Composition,
    stats: &CorpusFeatureStats,
    eps: f64,
    palette_tol: u8,
) -> Result<Vec<ConceptSignature>, Error> {
    c.elements
        .iter()
        .map(|e| discretize(e, &c.canvas, stats, eps, palette_tol))
        .collect()
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ViolationKind {
    InvalidCanvas,
    NonFinite,
    DegenerateGeometry,
    InvalidOrientation,
    OutsideCanvas,
    OrientationViolation,
    OffPaletteColor,
}

impl ViolationKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ViolationKind::InvalidCanvas => "invalid_canvas",
            ViolationKind::NonFinite => "non_finite",
            ViolationKind::DegenerateGeometry => "degenerate_geometry",
            ViolationKind::InvalidOrientation => "invalid_orientation",
            ViolationKind::OutsideCanvas => "outside_canvas",
            ViolationKind::OrientationViolation => "orientation_violation",
            ViolationKind::OffPaletteColor => "off_palette_color",
        }
    }
}

/// One violated invariant. `element` is `None` for composition-level checks.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Violation {
    pub element: Option<usize>,
    pub kind: ViolationKind,
}

fn element_finite(e: &Element) -> bool {
    match e {
        Element::Line(l) => {
            l.orientation_deg.is_finite()
                && l.axis_position.is_finite()
                && l.span.0.is_finite()
                && l.span.1.is_finite()
                && l.thickness.is_finite()
        }
        Element::Region(r) => {
            r.rect.x0.is_finite()
                && r.rect.y0.is_finite()
                && r.rect.x1.is_finite()
                && r.rect.y1.is_finite()
        }
    }
}

/// Check structural invariants, plus the strict style constraints (only
/// axis-aligned lines, only palette colors) when `strict_style` is set.
/// Violations are data, not failures: the list is empty iff the composition
/// is valid.
pub fn validate_composition(
    c: &Composition,
    strict_style: bool,
    palette_tol: u8,
) -> Vec<Violation> {
    let mut out = Vec::new();
    if !(c.canvas.height_ratio.is_finite() && c.canvas.height_ratio > 0.0) {
        out.push(Violation {
            element: None,
            kind: ViolationKind::InvalidCanvas,
        });
        return out;
    }
    let slack = 1e-9;
    for (i, e) in c.elements.iter().enumerate() {
        let at = |kind| Violation {
            element: Some(i),
            kind,
        };
        if !element_finite(e) {
            out.push(at(ViolationKind::NonFinite));
            continue;
        }
        let degenerate = match e {
            Element::Line(l) => l.thickness <= 0.0 || l.span.0 >= l.span.1,
            Element::Region(r) => r.rect.x0 >= r.rect.x1 || r.rect.y0 >= r.rect.y1,
        };
        if degenerate {
            out.push(at(ViolationKind::DegenerateGeometry));
            continue;
        }
        if let Element::Line(l) = e {
            if !(0.0..180.0).contains(&l.orientation_deg) {
                out.push(at(ViolationKind::InvalidOrientation));
                continue;
            }
        }
        let fp = e.footprint();
        if fp.x0 < -slack
            || fp.y0 < -slack
            || fp.x1 > 1.0 + slack
            || fp.y1 > c.canvas.height_ratio + slack
        {
            out.push(at(ViolationKind::OutsideCanvas));
        }
        if strict_style {
            if let Element::Line(l) = e {
                if orientation_class(l.orientation_deg) == OrientationClass::D {
                    out.push(at(ViolationKind::OrientationViolation));
                }
            }
            if palette_class(e.color(), palette_tol) == ColorClass::Other {
                out.push(at(ViolationKind::OffPaletteColor));
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Relation extraction
// ---------------------------------------------------------------------------

/// Extract the relation set of a composition.
///
/// Region pairs can be `adjacent` (shared boundary overlap > eps with a gap
/// <= eps, or a gap bridged exactly by a line), `separated_by_line` (the
/// bridging case), `color_opposition`, and `contains` (strict rect
/// containment). Any element pair sharing a 3x3 grid row or column is
/// `aligned`. The result is a set of canonically ordered instances.
pub fn extract_relations(c: &Composition, eps: f64, palette_tol: u8) -> BTreeSet<RelationInstance> {
    let mut out = BTreeSet::new();
    let n = c.elements.len();
    let cells: Vec<u8> = c
        .elements
        .iter()
        .map(|e| position_cell(e.centroid(), &c.canvas))
        .collect();
    let line_footprints: Vec<Rect> = c
        .elements
        .iter()
        .filter_map(|e| e.as_line().map(Line::footprint))
        .collect();

    for i in 0..n {
        for j in (i + 1)..n {
            if cells[i] / 3 == cells[j] / 3 || cells[i] % 3 == cells[j] % 3 {
                out.insert(RelationInstance::new(i, j, RelKind::Aligned));
            }
            let (Some(a), Some(b)) = (c.elements[i].as_region(), c.elements[j].as_region()) else {
                continue;
            };
            if opposing(
                palette_class(a.color, palette_tol),
                palette_class(b.color, palette_tol),
            ) {
                out.insert(RelationInstance::new(i, j, RelKind::ColorOpposition));
            }
            if a.rect.strictly_contains(&b.rect) || b.rect.strictly_contains(&a.rect) {
                out.insert(RelationInstance::new(i, j, RelKind::Contains));
                continue;
            }
            match region_adjacency(&a.rect, &b.rect, &line_footprints, eps) {
                Adjacency::Touching => {
                    out.insert(RelationInstance::new(i, j, RelKind::Adjacent));
                }
                Adjacency::LineSeparated => {
                    out.insert(RelationInstance::new(i, j, RelKind::Adjacent));
                    out.insert(RelationInstance::new(i, j, RelKind::SeparatedByLine));
                }
                Adjacency::None => {}
            }
        }
    }
    out
}

enum Adjacency {
    None,
    Touching,
    LineSeparated,
}

fn region_adjacency(a: &Rect, b: &Rect, lines: &[Rect], eps: f64) -> Adjacency {
    // Horizontal neighbours (gap along x), then vertical neighbours.
    let y_overlap = a.y1.min(b.y1) - a.y0.max(b.y0);
    let x_overlap = a.x1.min(b.x1) - a.x0.max(b.x0);
    if y_overlap > eps {
        let (left, right) = if a.x1 <= b.x1 { (a, b) } else { (b, a) };
        let gap = right.x0 - left.x1;
        if gap.abs() <= eps && x_overlap <= eps {
            return Adjacency::Touching;
        }
        if gap > eps {
            let strip = Rect::new(left.x1, a.y0.max(b.y0), right.x0, a.y1.min(b.y1));
            if lines.iter().any(|l| covers(l, &strip, eps)) {
                return Adjacency::LineSeparated;
            }
        }
    }
    if x_overlap > eps {
        let (top, bottom) = if a.y1 <= b.y1 { (a, b) } else { (b, a) };
        let gap = bottom.y0 - top.y1;
        if gap.abs() <= eps && y_overlap <= eps {
            return Adjacency::Touching;
        }
        if gap > eps {
            let strip = Rect::new(a.x0.max(b.x0), top.y1, a.x1.min(b.x1), bottom.y0);
            if lines.iter().any(|l| covers(l, &strip, eps)) {
                return Adjacency::LineSeparated;
            }
        }
    }
    Adjacency::None
}

fn covers(outer: &Rect, inner: &Rect, eps: f64) -> bool {
    outer.x0 <= inner.x0 + eps
        && outer.y0 <= inner.y0 + eps
        && outer.x1 >= inner.x1 - eps
        && outer.y1 >= inner.y1 - eps
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_canvas() -> Canvas {
        Canvas { height_ratio: 1.0 }
    }

    fn black() -> Color {
        Color::Palette(PaletteClass::Black)
    }

    fn region(x0: f64, y0: f64, x1: f64, y1: f64, color: Color) -> Element {
        Element::Region(Region {
            rect: Rect::new(x0, y0, x1, y1),
            color,
        })
    }

    fn h_line(axis: f64, s: f64, e: f64, th: f64) -> Element {
        Element::Line(Line {
            orientation_deg: 0.0,
            axis_position: axis,
            span: (s, e),
            thickness: th,
            color: black(),
        })
    }

    fn comp(elements: Vec<Element>) -> Composition {
        Composition {
            id: "t".into(),
            ordinal: 0,
            canvas: unit_canvas(),
            elements,
            label: None,
        }
    }

    // Independent nearest-anchor brute force for palette checks.
    fn oracle_palette(r: u8, g: u8, b: u8, tol: u8) -> ColorClass {
        let mut best_d = u16::MAX;
        let mut best = ColorClass::Other;
        for (class, (ar, ag, ab)) in PALETTE_ANCHORS {
            let d = (r as i16 - ar as i16)
                .abs()
                .max((g as i16 - ag as i16).abs())
                .max((b as i16 - ab as i16).abs()) as u16;
            if d < best_d {
                best_d = d;
                best = class.into();
            }
        }
        if best_d <= tol as u16 {
            best
        } else {
            ColorClass::Other
        }
    }

    #[test]
    fn palette_exact_anchor() {
        assert_eq!(
            palette_class(Color::Rgb(0, 0, 0), DEFAULT_PALETTE_TOL),
            ColorClass::Black
        );
    }

    #[test]
    fn palette_near_anchor_within_tol() {
        // Chebyshev distance 10 to black, within the default 32.
        assert_eq!(
            palette_class(Color::Rgb(10, 10, 10), DEFAULT_PALETTE_TOL),
            ColorClass::Black
        );
        assert_eq!(
            oracle_palette(10, 10, 10, DEFAULT_PALETTE_TOL),
            ColorClass::Black
        );
    }

    #[test]
    fn palette_far_from_all_anchors() {
        // Nearest anchor is gray at Chebyshev 88 > 32.
        assert_eq!(
            palette_class(Color::Rgb(128, 200, 40), DEFAULT_PALETTE_TOL),
            ColorClass::Other
        );
        assert_eq!(
            oracle_palette(128, 200, 40, DEFAULT_PALETTE_TOL),
            ColorClass::Other
        );
    }

    #[test]
    fn palette_matches_brute_force_on_lattice() {
        // 17^3 lattice over the RGB cube.
        for r in (0..=256u16).step_by(16) {
            for g in (0..=256u16).step_by(16) {
                for b in (0..=256u16).step_by(16) {
                    let (r, g, b) = (r.min(255) as u8, g.min(255) as u8, b.min(255) as u8);
                    assert_eq!(
                        palette_class(Color::Rgb(r, g, b), DEFAULT_PALETTE_TOL),
                        oracle_palette(r, g, b, DEFAULT_PALETTE_TOL),
                        "rgb({r},{g},{b})"
                    );
                }
            }
        }
    }

    #[test]
    fn orientation_classes_wrap_mod_180() {
        assert_eq!(orientation_class(0.0), OrientationClass::H);
        assert_eq!(orientation_class(3.0), OrientationClass::H);
        assert_eq!(orientation_class(178.0), OrientationClass::H);
        assert_eq!(orientation_class(87.0), OrientationClass::V);
        assert_eq!(orientation_class(90.0), OrientationClass::V);
        assert_eq!(orientation_class(45.0), OrientationClass::D);
        assert_eq!(orientation_class(10.0), OrientationClass::D);
    }

    #[test]
    fn discretize_full_width_line() {
        // Area 1.0 * 0.02 = 0.02; thresholds put that in the top tercile.
        // Centroid (0.5, 0.5) -> cell 4; endpoints on the left/right borders.
        let stats = CorpusFeatureStats {
            area_terciles: (0.005, 0.015),
            fallback: false,
        };
        let sig = discretize(
            &h_line(0.5, 0.0, 1.0, 0.02),
            &unit_canvas(),
            &stats,
            DEFAULT_EPSILON,
            DEFAULT_PALETTE_TOL,
        )
        .unwrap();
        assert_eq!(
            sig,
            ConceptSignature {
                kind: ElementKind::Line,
                orientation_class: Some(OrientationClass::H),
                size_class: SizeClass::Large,
                position_cell: 4,
                color_class: ColorClass::Black,
                boundary_contact: BoundaryContact::BothEnds,
            }
        );
    }

    #[test]
    fn discretize_small_centered_region() {
        // Area 0.01 < 0.02 -> small under the fallback thresholds.
        let stats = CorpusFeatureStats {
            area_terciles: FALLBACK_TERCILES,
            fallback: true,
        };
        let sig = discretize(
            &region(0.45, 0.45, 0.55, 0.55, Color::Palette(PaletteClass::Red)),
            &unit_canvas(),
            &stats,
            DEFAULT_EPSILON,
            DEFAULT_PALETTE_TOL,
        )
        .unwrap();
        assert_eq!(sig.kind, ElementKind::Region);
        assert_eq!(sig.orientation_class, None);
        assert_eq!(sig.size_class, SizeClass::Small);
        assert_eq!(sig.position_cell, 4);
        assert_eq!(sig.color_class, ColorClass::Red);
        assert_eq!(sig.boundary_contact, BoundaryContact::Interior);
    }

    #[test]
    fn discretize_interior_line() {
        let stats = CorpusFeatureStats::fallback();
        let sig = discretize(
            &h_line(0.2, 0.3, 0.7, 0.02),
            &unit_canvas(),
            &stats,
            DEFAULT_EPSILON,
            DEFAULT_PALETTE_TOL,
        )
        .unwrap();
        assert_eq!(sig.boundary_contact, BoundaryContact::Interior);
    }

    #[test]
    fn discretize_rejects_out_of_canvas() {
        let stats = CorpusFeatureStats::fallback();
        let err = discretize(
            &region(0.5, 0.5, 1.2, 0.9, black()),
            &unit_canvas(),
            &stats,
            DEFAULT_EPSILON,
            DEFAULT_PALETTE_TOL,
        );
        assert!(matches!(err, Err(Error::GeometryOutsideCanvas)));
    }

    #[test]
    fn terciles_split_even_thirds() {
        // 6 areas each of 0.01, 0.1, 0.5: thresholds land on the first member
        // of the middle and top thirds.
        let mut elements = Vec::new();
        for _ in 0..6 {
            elements.push(region(0.0, 0.0, 0.1, 0.1, black())); // 0.01
            elements.push(region(0.0, 0.0, 0.5, 0.2, black())); // 0.1
            elements.push(region(0.0, 0.0, 1.0, 0.5, black())); // 0.5
        }
        let stats = corpus_feature_stats(&[comp(elements)]);
        assert!(!stats.fallback);
        assert!((stats.area_terciles.0 - 0.1).abs() < 1e-12);
        assert!((stats.area_terciles.1 - 0.5).abs() < 1e-12);
        assert_eq!(stats.size_class(0.01), SizeClass::Small);
        assert_eq!(stats.size_class(0.1), SizeClass::Medium);
        assert_eq!(stats.size_class(0.5), SizeClass::Large);
    }

    #[test]
    fn terciles_fall_back_below_three_elements() {
        assert!(corpus_feature_stats(&[]).fallback);
        let two = comp(vec![
            region(0.0, 0.0, 0.5, 0.5, black()),
            region(0.5, 0.5, 1.0, 1.0, black()),
        ]);
        let stats = corpus_feature_stats(&[two]);
        assert!(stats.fallback);
        assert_eq!(stats.area_terciles, FALLBACK_TERCILES);
    }

    #[test]
    fn shared_edge_regions_are_adjacent() {
        let c = comp(vec![
            region(0.0, 0.0, 0.5, 1.0, Color::Palette(PaletteClass::White)),
            region(0.5, 0.0, 1.0, 1.0, Color::Palette(PaletteClass::White)),
        ]);
        let rels = extract_relations(&c, DEFAULT_EPSILON, DEFAULT_PALETTE_TOL);
        assert!(rels.contains(&RelationInstance::new(0, 1, RelKind::Adjacent)));
        assert!(!rels.contains(&RelationInstance::new(0, 1, RelKind::SeparatedByLine)));
    }

    #[test]
    fn red_and_blue_regions_oppose_anywhere() {
        let c = comp(vec![
            region(0.0, 0.0, 0.2, 0.2, Color::Palette(PaletteClass::Red)),
            region(0.7, 0.7, 0.9, 0.9, Color::Palette(PaletteClass::Blue)),
        ]);
        let rels = extract_relations(&c, DEFAULT_EPSILON, DEFAULT_PALETTE_TOL);
        assert!(rels.contains(&RelationInstance::new(0, 1, RelKind::ColorOpposition)));
    }

    #[test]
    fn strict_containment_excludes_adjacency() {
        let c = comp(vec![
            region(0.1, 0.1, 0.9, 0.9, Color::Palette(PaletteClass::White)),
            region(0.3, 0.3, 0.6, 0.6, Color::Palette(PaletteClass::Red)),
        ]);
        let rels = extract_relations(&c, DEFAULT_EPSILON, DEFAULT_PALETTE_TOL);
        assert!(rels.contains(&RelationInstance::new(0, 1, RelKind::Contains)));
        assert!(!rels.contains(&RelationInstance::new(0, 1, RelKind::Adjacent)));
    }

    #[test]
    fn line_separated_regions_are_adjacent() {
        // Two regions with a 0.02 gap bridged by a vertical line of thickness 0.02.
        let c = comp(vec![
            Element::Line(Line {
                orientation_deg: 90.0,
                axis_position: 0.5,
                span: (0.0, 1.0),
                thickness: 0.02,
                color: black(),
            }),
            region(0.0, 0.0, 0.49, 1.0, Color::Palette(PaletteClass::White)),
            region(0.51, 0.0, 1.0, 1.0, Color::Palette(PaletteClass::Red)),
        ]);
        let rels = extract_relations(&c, DEFAULT_EPSILON, DEFAULT_PALETTE_TOL);
        assert!(rels.contains(&RelationInstance::new(1, 2, RelKind::Adjacent)));
        assert!(rels.contains(&RelationInstance::new(1, 2, RelKind::SeparatedByLine)));
    }

    #[test]
    fn validate_accepts_simple_strict_composition() {
        let c = comp(vec![
            h_line(0.5, 0.0, 1.0, 0.02),
            region(0.1, 0.1, 0.4, 0.4, Color::Palette(PaletteClass::Red)),
        ]);
        assert!(validate_composition(&c, true, DEFAULT_PALETTE_TOL).is_empty());
    }

    #[test]
    fn validate_flags_diagonal_under_strict() {
        let c = comp(vec![Element::Line(Line {
            orientation_deg: 45.0,
            axis_position: 0.0,
            span: (0.1, 0.5),
            thickness: 0.02,
            color: black(),
        })]);
        assert!(validate_composition(&c, false, DEFAULT_PALETTE_TOL).is_empty());
        let violations = validate_composition(&c, true, DEFAULT_PALETTE_TOL);
        assert_eq!(
            violations,
            vec![Violation {
                element: Some(0),
                kind: ViolationKind::OrientationViolation
            }]
        );
    }

    #[test]
    fn validate_flags_degenerate_rect() {
        let c = comp(vec![region(0.5, 0.1, 0.5, 0.9, black())]);
        let violations = validate_composition(&c, false, DEFAULT_PALETTE_TOL);
        assert_eq!(
            violations,
            vec![Violation {
                element: Some(0),
                kind: ViolationKind::DegenerateGeometry
            }]
        );
    }

    #[test]
    fn vertical_line_endpoints_are_exact() {
        let l = Line {
            orientation_deg: 90.0,
            axis_position: 0.3,
            span: (0.1, 0.9),
            thickness: 0.02,
            color: black(),
        };
        assert_eq!(l.endpoints(), ((0.3, 0.1), (0.3, 0.9)));
        let fp = l.footprint();
        assert!((fp.x0 - 0.29).abs() < 1e-12 && (fp.x1 - 0.31).abs() < 1e-12);
    }

    #[test]
    fn oblique_line_stays_on_positive_offset_side() {
        // Near-vertical: the normal's dominant component must stay positive,
        // anchoring the line around x = axis_position.
        let l = Line {
            orientation_deg: 89.0,
            axis_position: 0.4,
            span: (0.2, 0.8),
            thickness: 0.02,
            color: black(),
        };
        let (a, b) = l.endpoints();
        assert!(a.0 > 0.3 && b.0 > 0.3, "endpoints {a:?} {b:?}");
    }
}
