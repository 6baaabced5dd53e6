//! Symbolic analysis of neo-plastic (grid-and-primary-color) compositions.
//!
//! The crate models a painting as a typed scene graph of lines and regions,
//! discretizes every element into a [`scene::ConceptSignature`], and builds a
//! three-step analysis on top of a chronological corpus:
//!
//! 1. **diff** — occurrence / co-occurrence statistics over the corpus prefix
//!    and difference metrics for each new composition,
//! 2. **rules** — change-rule induction between consecutive compositions via
//!    geometric element matching,
//! 3. **invariants** — mining of style and rule invariants across the rule
//!    trace, with per-rule flexibility scores.
//!
//! A mined [`invariants::InvariantProfile`] feeds the [`attribution`] scorer,
//! which separates in-style candidates from off-style ones. [`synth`] provides
//! seeded generators and a perturbation operator with exact ground truth, and
//! [`corpus`] defines the canonical on-disk formats.

pub mod attribution;
pub mod canon;
pub mod config;
pub mod corpus;
pub mod cues;
pub mod diff;
pub mod error;
pub mod invariants;
pub mod pipeline;
pub mod rules;
pub mod scene;
pub mod synth;

pub use config::PipelineConfig;
pub use error::Error;
pub use scene::{
    Color, ColorClass, Composition, ConceptSignature, CorpusFeatureStats, Element, ElementKind,
    Label, OrientationClass, PaletteClass, RelationInstance,
};
