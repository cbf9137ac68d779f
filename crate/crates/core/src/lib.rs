//! Personal context modeling and recognition.
//!
//! A context is a five-aspect tuple (TIME, WE, WA, WO, WI), each aspect
//! described at an objective, a machine and a subjective level. This crate
//! covers the whole path from schema to results:
//!
//! - [`ontology`]: vocabularies, day partition, geofences and lifting rules
//! - [`graph`]: entity/relation scenes of objective context
//! - [`ingest`]: sensor logs and annotations to fixed-width feature records
//! - [`synth`]: synthetic datasets with tunable inter-aspect correlation
//! - [`forest`]: Gini decision trees and bagged random forests
//! - [`experiment`]: label augmentation, k-fold evaluation and F1 reports

pub mod error;
pub mod experiment;
pub mod graph;
pub mod forest;
pub mod ingest;
pub mod metrics;
pub mod ontology;
pub mod seed;
pub mod synth;

pub use error::{Error, Result};
pub use ontology::{AspectId, Ontology};
