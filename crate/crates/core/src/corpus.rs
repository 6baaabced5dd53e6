//! Composition file format, corpus manifests, and SVG rendering.
//!
//! Documents are strict: unknown fields are rejected and every violation is
//! reported with a JSON-pointer path. Serialization is canonical (sorted keys,
//! 6-decimal reals, LF), so `serialize . parse` is idempotent on documents and
//! `parse . serialize` is the identity on the data model.

use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value};

use crate::canon::{self, real};
use crate::error::Error;
use crate::scene::{Canvas, Color, Composition, Element, Label, Line, PaletteClass, Rect, Region};

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

fn schema_err(path: &str, reason: impl Into<String>) -> Error {
    Error::Schema {
        path: path.to_string(),
        reason: reason.into(),
    }
}

fn as_object<'a>(v: &'a Value, path: &str) -> Result<&'a Map<String, Value>, Error> {
    v.as_object()
        .ok_or_else(|| schema_err(path, "expected object"))
}

fn as_array<'a>(v: &'a Value, path: &str) -> Result<&'a Vec<Value>, Error> {
    v.as_array()
        .ok_or_else(|| schema_err(path, "expected array"))
}

fn as_string<'a>(v: &'a Value, path: &str) -> Result<&'a str, Error> {
    v.as_str()
        .ok_or_else(|| schema_err(path, "expected string"))
}

/// Reals accept any JSON number; integer fields are checked separately.
fn as_real(v: &Value, path: &str) -> Result<f64, Error> {
    v.as_f64()
        .ok_or_else(|| schema_err(path, "expected number"))
}

fn as_uint(v: &Value, path: &str) -> Result<u64, Error> {
    match v.as_u64() {
        Some(u) => Ok(u),
        None => Err(schema_err(path, "expected non-negative integer")),
    }
}

fn require<'a>(map: &'a Map<String, Value>, key: &str, path: &str) -> Result<&'a Value, Error> {
    map.get(key)
        .ok_or_else(|| schema_err(path, format!("missing required field \"{key}\"")))
}

fn reject_unknown(map: &Map<String, Value>, allowed: &[&str], path: &str) -> Result<(), Error> {
    for key in map.keys() {
        if !allowed.contains(&key.as_str()) {
            return Err(schema_err(&format!("{path}/{key}"), "unknown field"));
        }
    }
    Ok(())
}

fn parse_color(v: &Value, path: &str) -> Result<Color, Error> {
    let map = as_object(v, path)?;
    reject_unknown(map, &["palette", "rgb"], path)?;
    match (map.get("palette"), map.get("rgb")) {
        (Some(p), None) => {
            let s = as_string(p, &format!("{path}/palette"))?;
            PaletteClass::parse(s)
                .map(Color::Palette)
                .ok_or_else(|| schema_err(&format!("{path}/palette"), "unknown palette class"))
        }
        (None, Some(rgb)) => {
            let arr = as_array(rgb, &format!("{path}/rgb"))?;
            if arr.len() != 3 {
                return Err(schema_err(&format!("{path}/rgb"), "expected 3 components"));
            }
            let mut ch = [0u8; 3];
            for (i, c) in arr.iter().enumerate() {
                let p = format!("{path}/rgb/{i}");
                let u = as_uint(c, &p)?;
                if u > 255 {
                    return Err(schema_err(&p, "out of range"));
                }
                ch[i] = u as u8;
            }
            Ok(Color::Rgb(ch[0], ch[1], ch[2]))
        }
        _ => Err(schema_err(
            path,
            "expected exactly one of \"palette\" or \"rgb\"",
        )),
    }
}

fn parse_element(v: &Value, path: &str) -> Result<Element, Error> {
    let map = as_object(v, path)?;
    let kind = as_string(require(map, "kind", path)?, &format!("{path}/kind"))?;
    match kind {
        "line" => {
            reject_unknown(
                map,
                &[
                    "kind",
                    "orientation_deg",
                    "axis_position",
                    "span",
                    "thickness",
                    "color",
                ],
                path,
            )?;
            let orientation_deg = as_real(
                require(map, "orientation_deg", path)?,
                &format!("{path}/orientation_deg"),
            )?;
            if !(0.0..180.0).contains(&orientation_deg) {
                return Err(schema_err(
                    &format!("{path}/orientation_deg"),
                    "out of range",
                ));
            }
            let axis_position = as_real(
                require(map, "axis_position", path)?,
                &format!("{path}/axis_position"),
            )?;
            let span_v = as_array(require(map, "span", path)?, &format!("{path}/span"))?;
            if span_v.len() != 2 {
                return Err(schema_err(&format!("{path}/span"), "expected 2 components"));
            }
            let start = as_real(&span_v[0], &format!("{path}/span/0"))?;
            let end = as_real(&span_v[1], &format!("{path}/span/1"))?;
            if start >= end {
                return Err(schema_err(&format!("{path}/span"), "start must be < end"));
            }
            let thickness = as_real(
                require(map, "thickness", path)?,
                &format!("{path}/thickness"),
            )?;
            if thickness <= 0.0 {
                return Err(schema_err(&format!("{path}/thickness"), "must be > 0"));
            }
            let color = parse_color(require(map, "color", path)?, &format!("{path}/color"))?;
            Ok(Element::Line(Line {
                orientation_deg,
                axis_position,
                span: (start, end),
                thickness,
                color,
            }))
        }
        "region" => {
            reject_unknown(map, &["kind", "rect", "color"], path)?;
            let rect_v = as_array(require(map, "rect", path)?, &format!("{path}/rect"))?;
            if rect_v.len() != 4 {
                return Err(schema_err(&format!("{path}/rect"), "expected 4 components"));
            }
            let mut r = [0.0f64; 4];
            for (i, c) in rect_v.iter().enumerate() {
                r[i] = as_real(c, &format!("{path}/rect/{i}"))?;
            }
            if r[0] >= r[2] || r[1] >= r[3] {
                return Err(schema_err(
                    &format!("{path}/rect"),
                    "expected x0 < x1 and y0 < y1",
                ));
            }
            let color = parse_color(require(map, "color", path)?, &format!("{path}/color"))?;
            Ok(Element::Region(Region {
                rect: Rect::new(r[0], r[1], r[2], r[3]),
                color,
            }))
        }
        _ => Err(schema_err(
            &format!("{path}/kind"),
            "expected \"line\" or \"region\"",
        )),
    }
}

/// Parse a composition document. Never returns partial results: the first
/// schema violation aborts with its path.
pub fn parse_composition(text: &str) -> Result<Composition, Error> {
    let v: Value =
        serde_json::from_str(text).map_err(|e| schema_err("/", format!("invalid JSON: {e}")))?;
    let map = as_object(&v, "/")?;
    reject_unknown(map, &["id", "ordinal", "canvas", "elements", "label"], "")?;

    let id = as_string(require(map, "id", "/")?, "/id")?.to_string();
    let ordinal = as_uint(require(map, "ordinal", "/")?, "/ordinal")?;
    if ordinal > u32::MAX as u64 {
        return Err(schema_err("/ordinal", "out of range"));
    }

    let canvas_v = require(map, "canvas", "/")?;
    let canvas_map = as_object(canvas_v, "/canvas")?;
    reject_unknown(canvas_map, &["height_ratio"], "/canvas")?;
    let height_ratio = as_real(
        require(canvas_map, "height_ratio", "/canvas")?,
        "/canvas/height_ratio",
    )?;
    if !(height_ratio.is_finite() && height_ratio > 0.0) {
        return Err(schema_err("/canvas/height_ratio", "must be > 0"));
    }

    let label = match map.get("label") {
        None => None,
        Some(l) => {
            let s = as_string(l, "/label")?;
            Some(Label::parse(s).ok_or_else(|| schema_err("/label", "unknown label"))?)
        }
    };

    let elements_v = as_array(require(map, "elements", "/")?, "/elements")?;
    let mut elements = Vec::with_capacity(elements_v.len());
    for (i, e) in elements_v.iter().enumerate() {
        elements.push(parse_element(e, &format!("/elements/{i}"))?);
    }

    Ok(Composition {
        id,
        ordinal: ordinal as u32,
        canvas: Canvas { height_ratio },
        elements,
        label,
    })
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

fn color_value(c: Color) -> Value {
    match c {
        Color::Palette(p) => json!({ "palette": p.as_str() }),
        Color::Rgb(r, g, b) => json!({ "rgb": [r, g, b] }),
    }
}

fn element_value(e: &Element) -> Value {
    match e {
        Element::Line(l) => json!({
            "kind": "line",
            "orientation_deg": real(l.orientation_deg),
            "axis_position": real(l.axis_position),
            "span": [real(l.span.0), real(l.span.1)],
            "thickness": real(l.thickness),
            "color": color_value(l.color),
        }),
        Element::Region(r) => json!({
            "kind": "region",
            "rect": [
                real(r.rect.x0),
                real(r.rect.y0),
                real(r.rect.x1),
                real(r.rect.y1)
            ],
            "color": color_value(r.color),
        }),
    }
}

/// Composition as a JSON value (canonical printing happens at write time).
pub fn composition_value(c: &Composition) -> Value {
    let mut map = Map::new();
    map.insert("id".into(), Value::String(c.id.clone()));
    map.insert("ordinal".into(), json!(c.ordinal));
    map.insert(
        "canvas".into(),
        json!({ "height_ratio": real(c.canvas.height_ratio) }),
    );
    if let Some(label) = c.label {
        map.insert("label".into(), Value::String(label.as_str().into()));
    }
    map.insert(
        "elements".into(),
        Value::Array(c.elements.iter().map(element_value).collect()),
    );
    Value::Object(map)
}

/// Canonical document bytes for a composition.
pub fn serialize_composition(c: &Composition) -> String {
    canon::to_canonical_json(&composition_value(c))
}

// ---------------------------------------------------------------------------
// Manifests and corpus loading
// ---------------------------------------------------------------------------

/// Ordered list of composition files; list order defines ordinals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CorpusManifest {
    pub artist: String,
    pub compositions: Vec<String>,
}

pub fn parse_manifest(text: &str) -> Result<CorpusManifest, Error> {
    let v: Value =
        serde_json::from_str(text).map_err(|e| schema_err("/", format!("invalid JSON: {e}")))?;
    let map = as_object(&v, "/")?;
    reject_unknown(map, &["artist", "compositions"], "")?;
    let artist = as_string(require(map, "artist", "/")?, "/artist")?.to_string();
    let list = as_array(require(map, "compositions", "/")?, "/compositions")?;
    let mut compositions = Vec::with_capacity(list.len());
    for (i, p) in list.iter().enumerate() {
        let path = as_string(p, &format!("/compositions/{i}"))?;
        if compositions.iter().any(|existing| existing == path) {
            return Err(schema_err(&format!("/compositions/{i}"), "duplicate path"));
        }
        compositions.push(path.to_string());
    }
    Ok(CorpusManifest {
        artist,
        compositions,
    })
}

pub fn manifest_value(m: &CorpusManifest) -> Value {
    json!({
        "artist": m.artist,
        "compositions": m.compositions,
    })
}

pub fn serialize_manifest(m: &CorpusManifest) -> String {
    canon::to_canonical_json(&manifest_value(m))
}

#[derive(Clone, Debug)]
pub struct LoadedCorpus {
    pub artist: String,
    pub compositions: Vec<Composition>,
}

fn read_file(path: &Path) -> Result<String, Error> {
    fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })
}

/// Load a manifest and every composition it names. Paths are resolved
/// relative to the manifest's directory; ordinals are assigned from list
/// position regardless of what the files declare.
pub fn load_corpus(manifest_path: &Path) -> Result<LoadedCorpus, Error> {
    let text = read_file(manifest_path)?;
    let manifest =
        parse_manifest(&text).map_err(|e| e.in_file(manifest_path.display().to_string()))?;
    let base = manifest_path.parent().unwrap_or(Path::new("."));
    let mut compositions = Vec::with_capacity(manifest.compositions.len());
    for (i, rel) in manifest.compositions.iter().enumerate() {
        let path: PathBuf = base.join(rel);
        let text = read_file(&path)?;
        let mut c = parse_composition(&text).map_err(|e| e.in_file(path.display().to_string()))?;
        c.ordinal = i as u32;
        compositions.push(c);
    }
    Ok(LoadedCorpus {
        artist: manifest.artist,
        compositions,
    })
}

// ---------------------------------------------------------------------------
// SVG rendering
// ---------------------------------------------------------------------------

fn css_color(c: Color) -> String {
    let (r, g, b) = match c {
        Color::Palette(p) => p.anchor_rgb(),
        Color::Rgb(r, g, b) => (r, g, b),
    };
    format!("#{r:02x}{g:02x}{b:02x}")
}

/// Render a composition to SVG for human inspection: one `rect` per element
/// plus a white background rect, painted in element order.
pub fn render_svg(c: &Composition) -> String {
    let h = c.canvas.height_ratio;
    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 1 {h:.6}\" width=\"512\" height=\"{:.0}\">\n",
        512.0 * h
    ));
    out.push_str(&format!(
        "  <rect x=\"0\" y=\"0\" width=\"1\" height=\"{h:.6}\" fill=\"#ffffff\"/>\n"
    ));
    for e in &c.elements {
        match e {
            Element::Region(r) => {
                out.push_str(&format!(
                    "  <rect x=\"{:.6}\" y=\"{:.6}\" width=\"{:.6}\" height=\"{:.6}\" fill=\"{}\"/>\n",
                    r.rect.x0,
                    r.rect.y0,
                    r.rect.width(),
                    r.rect.height(),
                    css_color(r.color)
                ));
            }
            Element::Line(l) => {
                let fill = css_color(l.color);
                let deg = l.orientation_deg;
                if deg == 0.0 || deg == 90.0 {
                    let fp = l.footprint();
                    out.push_str(&format!(
                        "  <rect x=\"{:.6}\" y=\"{:.6}\" width=\"{:.6}\" height=\"{:.6}\" fill=\"{fill}\"/>\n",
                        fp.x0,
                        fp.y0,
                        fp.width(),
                        fp.height()
                    ));
                } else {
                    let (cx, cy) = l.centroid();
                    let len = l.length();
                    out.push_str(&format!(
                        "  <rect x=\"{:.6}\" y=\"{:.6}\" width=\"{len:.6}\" height=\"{:.6}\" fill=\"{fill}\" transform=\"rotate({deg:.6} {cx:.6} {cy:.6})\"/>\n",
                        cx - len / 2.0,
                        cy - l.thickness / 2.0,
                        l.thickness
                    ));
                }
            }
        }
    }
    out.push_str("</svg>\n");
    out
}
