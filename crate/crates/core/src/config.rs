//! Pipeline configuration: every tolerance and threshold in one place, with
//! the documented defaults. A serialized copy is embedded in every report for
//! provenance.

use serde_json::{json, Map, Value};

use crate::canon::real;
use crate::cues::CueNorms;
use crate::error::Error;

#[derive(Clone, Debug, PartialEq)]
pub struct PipelineConfig {
    /// Chebyshev tolerance for palette snapping (0-255).
    pub palette_tol: u8,
    /// Border-contact and adjacency-gap tolerance in canvas units.
    pub epsilon: f64,
    /// Corpus frequency at which a missing co-occurrence counts as dropped.
    pub drop_threshold: f64,
    /// Minimum IoU for element matching.
    pub iou_min: f64,
    /// Affected-area fraction at which a rule is global.
    pub scope_tau: f64,
    /// Neighbourhood size for flexibility scoring.
    pub flexibility_k: usize,
    /// Support threshold for keeping an invariant.
    pub support_theta: f64,
    /// Score threshold for an in-style verdict.
    pub verdict_threshold: f64,
    /// Generator seed (the NEO_SEED env var overrides it in the CLI).
    pub seed: u64,
    pub cue_norms: CueNorms,
}

impl Default for PipelineConfig {
    fn default() -> PipelineConfig {
        PipelineConfig {
            palette_tol: crate::scene::DEFAULT_PALETTE_TOL,
            epsilon: crate::scene::DEFAULT_EPSILON,
            drop_threshold: crate::diff::DEFAULT_DROP_THRESHOLD,
            iou_min: crate::rules::DEFAULT_IOU_MIN,
            scope_tau: crate::rules::DEFAULT_SCOPE_TAU,
            flexibility_k: crate::invariants::DEFAULT_FLEXIBILITY_K,
            support_theta: crate::invariants::DEFAULT_SUPPORT_THETA,
            verdict_threshold: crate::attribution::DEFAULT_VERDICT_THRESHOLD,
            seed: 42,
            cue_norms: CueNorms::default(),
        }
    }
}

fn schema_err(path: &str, reason: impl Into<String>) -> Error {
    Error::Schema {
        path: path.to_string(),
        reason: reason.into(),
    }
}

fn get_real(
    map: &Map<String, Value>,
    key: &str,
    range: (f64, f64),
    default: f64,
) -> Result<f64, Error> {
    match map.get(key) {
        None => Ok(default),
        Some(v) => {
            let path = format!("/{key}");
            let x = v
                .as_f64()
                .ok_or_else(|| schema_err(&path, "expected number"))?;
            if !(x.is_finite() && x >= range.0 && x <= range.1) {
                return Err(schema_err(
                    &path,
                    format!("expected a value in [{}, {}]", range.0, range.1),
                ));
            }
            Ok(x)
        }
    }
}

fn get_uint(map: &Map<String, Value>, key: &str, max: u64, default: u64) -> Result<u64, Error> {
    match map.get(key) {
        None => Ok(default),
        Some(v) => {
            let path = format!("/{key}");
            let u = v
                .as_u64()
                .ok_or_else(|| schema_err(&path, "expected non-negative integer"))?;
            if u > max {
                return Err(schema_err(&path, "out of range"));
            }
            Ok(u)
        }
    }
}

impl PipelineConfig {
    /// Parse a config document; absent keys keep their defaults, unknown keys
    /// are rejected.
    pub fn from_value(v: &Value) -> Result<PipelineConfig, Error> {
        let map = v
            .as_object()
            .ok_or_else(|| schema_err("/", "expected object"))?;
        let allowed = [
            "palette_tol",
            "epsilon",
            "drop_threshold",
            "iou_min",
            "scope_tau",
            "flexibility_k",
            "support_theta",
            "verdict_threshold",
            "seed",
            "cue_norms",
        ];
        for key in map.keys() {
            if !allowed.contains(&key.as_str()) {
                return Err(schema_err(&format!("/{key}"), "unknown field"));
            }
        }
        let defaults = PipelineConfig::default();
        let cue_norms = match map.get("cue_norms") {
            None => defaults.cue_norms,
            Some(v) => {
                let norms = v
                    .as_object()
                    .ok_or_else(|| schema_err("/cue_norms", "expected object"))?;
                let allowed = crate::cues::CUE_NAMES;
                for key in norms.keys() {
                    if !allowed.contains(&key.as_str()) {
                        return Err(schema_err(&format!("/cue_norms/{key}"), "unknown field"));
                    }
                }
                let norm = |key: &str, default: f64| -> Result<f64, Error> {
                    match norms.get(key) {
                        None => Ok(default),
                        Some(v) => {
                            let path = format!("/cue_norms/{key}");
                            let x = v
                                .as_f64()
                                .ok_or_else(|| schema_err(&path, "expected number"))?;
                            if !(x.is_finite() && x > 0.0) {
                                return Err(schema_err(&path, "must be > 0"));
                            }
                            Ok(x)
                        }
                    }
                };
                let d = defaults.cue_norms;
                CueNorms {
                    area_entropy: norm("area_entropy", d.area_entropy)?,
                    centrality: norm("centrality", d.centrality)?,
                    crowdedness: norm("crowdedness", d.crowdedness)?,
                    granularity: norm("granularity", d.granularity)?,
                    max_element_area: norm("max_element_area", d.max_element_area)?,
                    opposition_count: norm("opposition_count", d.opposition_count)?,
                    unfinished_line_count: norm("unfinished_line_count", d.unfinished_line_count)?,
                }
            }
        };
        Ok(PipelineConfig {
            palette_tol: get_uint(map, "palette_tol", 255, defaults.palette_tol as u64)? as u8,
            epsilon: get_real(map, "epsilon", (1e-9, 0.5), defaults.epsilon)?,
            drop_threshold: get_real(map, "drop_threshold", (0.0, 1.0), defaults.drop_threshold)?,
            iou_min: get_real(map, "iou_min", (0.0, 1.0), defaults.iou_min)?,
            scope_tau: get_real(map, "scope_tau", (0.0, 1.0), defaults.scope_tau)?,
            flexibility_k: get_uint(map, "flexibility_k", 1 << 20, defaults.flexibility_k as u64)?
                .max(1) as usize,
            support_theta: get_real(map, "support_theta", (0.0, 1.0), defaults.support_theta)?,
            verdict_threshold: get_real(
                map,
                "verdict_threshold",
                (0.0, 1.0),
                defaults.verdict_threshold,
            )?,
            seed: get_uint(map, "seed", u64::MAX, defaults.seed)?,
            cue_norms,
        })
    }

    pub fn from_json(text: &str) -> Result<PipelineConfig, Error> {
        let v: Value = serde_json::from_str(text)
            .map_err(|e| schema_err("/", format!("invalid JSON: {e}")))?;
        PipelineConfig::from_value(&v)
    }

    pub fn to_value(&self) -> Value {
        json!({
            "palette_tol": self.palette_tol,
            "epsilon": real(self.epsilon),
            "drop_threshold": real(self.drop_threshold),
            "iou_min": real(self.iou_min),
            "scope_tau": real(self.scope_tau),
            "flexibility_k": self.flexibility_k,
            "support_theta": real(self.support_theta),
            "verdict_threshold": real(self.verdict_threshold),
            "seed": self.seed,
            "cue_norms": {
                "area_entropy": real(self.cue_norms.area_entropy),
                "centrality": real(self.cue_norms.centrality),
                "crowdedness": real(self.cue_norms.crowdedness),
                "granularity": real(self.cue_norms.granularity),
                "max_element_area": real(self.cue_norms.max_element_area),
                "opposition_count": real(self.cue_norms.opposition_count),
                "unfinished_line_count": real(self.cue_norms.unfinished_line_count),
            },
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let cfg = PipelineConfig::default();
        let parsed = PipelineConfig::from_value(&cfg.to_value()).unwrap();
        assert_eq!(cfg, parsed);
    }

    #[test]
    fn empty_object_yields_defaults() {
        let cfg = PipelineConfig::from_json("{}").unwrap();
        assert_eq!(cfg, PipelineConfig::default());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = PipelineConfig::from_json(r#"{"palete_tol": 32}"#).unwrap_err();
        assert!(matches!(err, Error::Schema { ref path, .. } if path == "/palete_tol"));
    }

    #[test]
    fn out_of_range_threshold_is_rejected() {
        let err = PipelineConfig::from_json(r#"{"support_theta": 1.5}"#).unwrap_err();
        assert!(matches!(err, Error::Schema { ref path, .. } if path == "/support_theta"));
    }
}
