use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::catalog::{SensorCatalog, ValueDomain};
use super::log::SensorValue;
use super::record::{Dataset, Record};
use super::window::Window;
use crate::error::{Error, Location, Result};

pub const DEFAULT_RECIPE: &str = include_str!("../../data/default_recipe.toml");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Aggregate {
    Mean,
    /// Population standard deviation.
    Std,
    Min,
    Max,
    /// Number of readings in the window.
    Count,
    /// Share of readings carrying the most frequent symbol.
    ModeFrequency,
    /// Number of distinct symbols.
    Distinct,
}

impl Aggregate {
    fn name(self) -> &'static str {
        match self {
            Aggregate::Mean => "mean",
            Aggregate::Std => "std",
            Aggregate::Min => "min",
            Aggregate::Max => "max",
            Aggregate::Count => "count",
            Aggregate::ModeFrequency => "mode_frequency",
            Aggregate::Distinct => "distinct",
        }
    }

    fn numeric_only(self) -> bool {
        matches!(self, Aggregate::Mean | Aggregate::Std | Aggregate::Min | Aggregate::Max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelRecipe {
    pub sensor: String,
    /// Axis of a multi-valued sensor; all axes when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub component: Option<usize>,
    pub aggregates: Vec<Aggregate>,
}

/// Declarative list of per-channel aggregates. The declared `width` must match
/// the number of columns the channels expand to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeatureRecipe {
    pub width: usize,
    pub channels: Vec<ChannelRecipe>,
}

#[derive(Debug, Clone, PartialEq)]
struct Column {
    name: String,
    sensor: String,
    axis: usize,
    aggregate: Aggregate,
}

/// A recipe checked against a catalog, expanded to concrete columns.
#[derive(Debug, Clone, PartialEq)]
pub struct CompiledRecipe {
    columns: Vec<Column>,
}

impl FeatureRecipe {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse {
            what: "feature recipe",
            location: Location::Line(
                e.span().map_or(0, |s| text[..s.start.min(text.len())].matches('\n').count() + 1),
            ),
            message: e.message().to_string(),
        })
    }

    pub fn default_recipe() -> Self {
        Self::from_toml(DEFAULT_RECIPE).expect("bundled recipe parses")
    }

    pub fn compile(&self, catalog: &SensorCatalog) -> Result<CompiledRecipe> {
        let mut columns = Vec::new();
        for ch in &self.channels {
            let spec = catalog
                .get(&ch.sensor)
                .ok_or_else(|| Error::Ingest(format!("recipe names unknown sensor `{}`", ch.sensor)))?;
            for &agg in &ch.aggregates {
                if agg.numeric_only() && spec.domain == ValueDomain::Symbolic {
                    return Err(Error::Ingest(format!(
                        "aggregate `{}` needs numbers but `{}` is symbolic",
                        agg.name(),
                        spec.id
                    )));
                }
            }
            let axes: Vec<usize> = match ch.component {
                Some(c) if c >= spec.arity => {
                    return Err(Error::Ingest(format!(
                        "sensor `{}` has {} components, recipe asks for #{c}",
                        spec.id, spec.arity
                    )))
                }
                Some(c) => vec![c],
                None => (0..spec.arity).collect(),
            };
            for &axis in &axes {
                for &agg in &ch.aggregates {
                    let name = if spec.arity > 1 {
                        format!("{}_{}_{}", spec.id, axis, agg.name())
                    } else {
                        format!("{}_{}", spec.id, agg.name())
                    };
                    columns.push(Column {
                        name,
                        sensor: spec.id.clone(),
                        axis,
                        aggregate: agg,
                    });
                }
            }
        }
        if columns.len() != self.width {
            return Err(Error::Ingest(format!(
                "recipe declares width {} but its channels expand to {} columns",
                self.width,
                columns.len()
            )));
        }
        let mut seen = HashMap::new();
        for (i, c) in columns.iter().enumerate() {
            if let Some(prev) = seen.insert(c.name.clone(), i) {
                return Err(Error::Ingest(format!("column `{}` declared twice (#{prev} and #{i})", c.name)));
            }
        }
        Ok(CompiledRecipe { columns })
    }
}

impl CompiledRecipe {
    pub fn width(&self) -> usize {
        self.columns.len()
    }

    pub fn column_names(&self) -> Vec<String> {
        self.columns.iter().map(|c| c.name.clone()).collect()
    }

    /// Feature vector and missing mask for one window. Sensors without any
    /// reading in the window yield masked (NaN) entries for all their columns.
    pub fn extract(&self, window: &Window) -> (Vec<f64>, Vec<bool>) {
        let mut by_sensor: HashMap<&str, Vec<&SensorValue>> = HashMap::new();
        for r in &window.readings {
            by_sensor.entry(r.sensor.as_str()).or_default().push(&r.value);
        }
        let mut features = Vec::with_capacity(self.columns.len());
        let mut mask = Vec::with_capacity(self.columns.len());
        for col in &self.columns {
            match by_sensor.get(col.sensor.as_str()) {
                Some(values) if !values.is_empty() => {
                    features.push(aggregate(values, col.axis, col.aggregate));
                    mask.push(false);
                }
                _ => {
                    features.push(f64::NAN);
                    mask.push(true);
                }
            }
        }
        (features, mask)
    }

    /// Extracts every window into a dataset whose columns follow the recipe.
    pub fn build_dataset(&self, windows: &[Window]) -> Dataset {
        let mut ds = Dataset::new(self.column_names());
        for w in windows {
            let (features, mask) = self.extract(w);
            ds.records.push(Record {
                user: w.user.clone(),
                window_start: w.start,
                features,
                mask,
                labels: w.labels.clone(),
            });
        }
        ds
    }

    /// Checks that an existing dataset has this recipe's layout.
    pub fn check_dataset(&self, dataset: &Dataset) -> Result<()> {
        if dataset.width() != self.width() {
            return Err(Error::Ingest(format!(
                "recipe width {} does not match dataset width {}",
                self.width(),
                dataset.width()
            )));
        }
        Ok(())
    }
}

/// Order-free aggregates are computed over sorted values so the result does
/// not depend on reading order.
fn aggregate(values: &[&SensorValue], axis: usize, agg: Aggregate) -> f64 {
    match agg {
        Aggregate::Count => values.len() as f64,
        Aggregate::ModeFrequency | Aggregate::Distinct => {
            let mut counts: HashMap<String, usize> = HashMap::new();
            for v in values {
                let key = match v {
                    SensorValue::Symbolic(s) => s.clone(),
                    SensorValue::Numeric(xs) => xs.get(axis).copied().unwrap_or(f64::NAN).to_bits().to_string(),
                };
                *counts.entry(key).or_default() += 1;
            }
            if agg == Aggregate::Distinct {
                counts.len() as f64
            } else {
                let top = counts.values().copied().max().unwrap_or(0);
                top as f64 / values.len() as f64
            }
        }
        _ => {
            let mut xs: Vec<f64> = values
                .iter()
                .filter_map(|v| match v {
                    SensorValue::Numeric(xs) => xs.get(axis).copied(),
                    SensorValue::Symbolic(_) => None,
                })
                .collect();
            xs.sort_by(f64::total_cmp);
            let n = xs.len() as f64;
            let mean = xs.iter().sum::<f64>() / n;
            match agg {
                Aggregate::Mean => mean,
                Aggregate::Std => (xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n).sqrt(),
                Aggregate::Min => xs[0],
                Aggregate::Max => xs[xs.len() - 1],
                _ => unreachable!(),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::log::SensorReading;
    use crate::ingest::record::Labels;

    fn window(readings: Vec<(&str, SensorValue)>) -> Window {
        Window {
            user: "u".into(),
            start: 0,
            end: 1_800_000,
            labels: Labels {
                we: "classroom".into(),
                wa: "lesson".into(),
                wo: "friend".into(),
            },
            readings: readings
                .into_iter()
                .enumerate()
                .map(|(i, (sensor, value))| SensorReading {
                    user: "u".into(),
                    sensor: sensor.into(),
                    ts_ms: i as i64,
                    value,
                })
                .collect(),
        }
    }

    fn col(recipe: &CompiledRecipe, name: &str) -> usize {
        recipe.column_names().iter().position(|n| n == name).unwrap()
    }

    #[test]
    fn default_recipe_has_122_columns() {
        let r = FeatureRecipe::default_recipe();
        assert_eq!(r.width, 122);
        let compiled = r.compile(&SensorCatalog::default_catalog()).unwrap();
        assert_eq!(compiled.width(), 122);
    }

    #[test]
    fn still_phone_has_zero_spread() {
        let recipe = FeatureRecipe::default_recipe().compile(&SensorCatalog::default_catalog()).unwrap();
        let w = window(vec![("acceleration", SensorValue::Numeric(vec![0.0, 0.0, 0.0])); 50]);
        let (f, m) = recipe.extract(&w);
        for axis in 0..3 {
            let j = col(&recipe, &format!("acceleration_{axis}_std"));
            assert_eq!(f[j], 0.0);
            assert!(!m[j]);
        }
    }

    #[test]
    fn mean_of_one_two_three() {
        let recipe = FeatureRecipe::default_recipe().compile(&SensorCatalog::default_catalog()).unwrap();
        let w = window(
            [1.0, 2.0, 3.0]
                .iter()
                .map(|&x| ("battery_level", SensorValue::Numeric(vec![x])))
                .collect(),
        );
        let (f, _) = recipe.extract(&w);
        assert_eq!(f[col(&recipe, "battery_level_mean")], 2.0);
        assert_eq!(f[col(&recipe, "battery_level_min")], 1.0);
        assert_eq!(f[col(&recipe, "battery_level_max")], 3.0);
    }

    #[test]
    fn empty_window_is_fully_masked() {
        let recipe = FeatureRecipe::default_recipe().compile(&SensorCatalog::default_catalog()).unwrap();
        let (f, m) = recipe.extract(&window(vec![]));
        assert!(m.iter().all(|&b| b));
        assert!(f.iter().all(|x| x.is_nan()));
    }

    #[test]
    fn symbolic_aggregates() {
        let recipe = FeatureRecipe::default_recipe().compile(&SensorCatalog::default_catalog()).unwrap();
        let apps = ["mail", "chat", "mail", "mail"];
        let w = window(
            apps.iter()
                .map(|a| ("running_application", SensorValue::Symbolic(a.to_string())))
                .collect(),
        );
        let (f, _) = recipe.extract(&w);
        assert_eq!(f[col(&recipe, "running_application_mode_frequency")], 0.75);
        assert_eq!(f[col(&recipe, "running_application_distinct")], 2.0);
    }

    #[test]
    fn width_mismatch_and_bad_channels() {
        let catalog = SensorCatalog::default_catalog();
        let mut r = FeatureRecipe::default_recipe();
        r.width = 121;
        assert!(r.compile(&catalog).unwrap_err().to_string().contains("width 121"));
        let bad = FeatureRecipe {
            width: 1,
            channels: vec![ChannelRecipe {
                sensor: "cellular".into(),
                component: None,
                aggregates: vec![Aggregate::Mean],
            }],
        };
        assert!(bad.compile(&catalog).is_err());
        let compiled = FeatureRecipe::default_recipe().compile(&catalog).unwrap();
        assert!(compiled.check_dataset(&Dataset::new(vec!["x".into()])).is_err());
    }
}
