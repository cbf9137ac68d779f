use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Location, Result};

pub const DEFAULT_CATALOG: &str = include_str!("../../data/sensor_catalog.toml");

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Cadence {
    /// Samples per second.
    FixedRate(f64),
    OnChange,
    EverySeconds(u32),
}

/// What values a channel may carry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValueDomain {
    Numeric,
    /// 0/1 flags.
    Binary,
    /// A single string per reading (network name, app package, ...).
    Symbolic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensorSpec {
    pub id: String,
    pub arity: usize,
    pub unit: String,
    pub domain: ValueDomain,
    pub cadence: Cadence,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensorCatalog {
    pub sensors: Vec<SensorSpec>,
    #[serde(skip)]
    index: HashMap<String, usize>,
}

impl SensorCatalog {
    pub fn new(sensors: Vec<SensorSpec>) -> Result<Self> {
        let mut index = HashMap::with_capacity(sensors.len());
        for (i, spec) in sensors.iter().enumerate() {
            if index.insert(spec.id.clone(), i).is_some() {
                return Err(Error::Ingest(format!("duplicate sensor id `{}`", spec.id)));
            }
            if spec.arity == 0 {
                return Err(Error::Ingest(format!("sensor `{}` has arity 0", spec.id)));
            }
            if spec.domain == ValueDomain::Symbolic && spec.arity != 1 {
                return Err(Error::Ingest(format!("symbolic sensor `{}` must have arity 1", spec.id)));
            }
            match spec.cadence {
                Cadence::FixedRate(hz) if !(hz > 0.0 && hz.is_finite()) => {
                    return Err(Error::Ingest(format!("sensor `{}` has non-positive rate {hz}", spec.id)))
                }
                Cadence::EverySeconds(0) => {
                    return Err(Error::Ingest(format!("sensor `{}` has a zero-second period", spec.id)))
                }
                _ => {}
            }
        }
        Ok(Self { sensors, index })
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let raw: SensorCatalog = toml::from_str(text).map_err(|e| Error::Parse {
            what: "sensor catalog",
            location: Location::Field(e.span().map_or_else(String::new, |s| format!("byte {}", s.start))),
            message: e.message().to_string(),
        })?;
        Self::new(raw.sensors)
    }

    /// The smartphone channel list the bundled recipe is written against.
    pub fn default_catalog() -> Self {
        Self::from_toml(DEFAULT_CATALOG).expect("bundled catalog is valid")
    }

    pub fn get(&self, id: &str) -> Option<&SensorSpec> {
        self.index.get(id).map(|&i| &self.sensors[i])
    }

    pub fn len(&self) -> usize {
        self.sensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sensors.is_empty()
    }
}
