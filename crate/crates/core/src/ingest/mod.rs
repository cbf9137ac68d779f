//! Sensor logs and time-diary annotations to fixed-width feature records.
//!
//! The pipeline is `parse_sensor_log` + `parse_annotations` →
//! [`window_records`] → [`CompiledRecipe::build_dataset`] → imputation.
//! File formats are documented in `docs/formats.md` at the repository root.

mod annotation;
mod catalog;
mod features;
mod impute;
mod log;
mod record;
mod window;

pub use annotation::{parse_annotations, AnnotationEvent};
pub use catalog::{Cadence, SensorCatalog, SensorSpec, ValueDomain, DEFAULT_CATALOG};
pub use features::{Aggregate, ChannelRecipe, CompiledRecipe, FeatureRecipe, DEFAULT_RECIPE};
pub use impute::{impute, ImputePolicy, MedianImputer};
pub use log::{parse_sensor_log, parse_sensor_log_str, ParsedLog, SensorReading, SensorValue};
pub use record::{sha256_hex, Dataset, Labels, Record, MISSING_SUFFIX};
pub use window::{window_records, Window, Windowing, DEFAULT_WINDOW_MS};
