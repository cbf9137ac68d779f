//! The five-aspect context model: label vocabularies, time-of-day rules and
//! geofences, plus the rules that lift machine-level values to subjective
//! labels.

mod context;
mod geo;

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Location, Result};

pub use context::{lift_context, local_hour, AspectDescriptor, ContextTuple, MachineValue};
pub use geo::{polygon_area, polygon_contains, GeoPoint};

/// The ontology shipped with the toolkit: time-diary questionnaire answer
/// sets plus a demo campus geofence.
pub const DEFAULT_ONTOLOGY: &str = include_str!("../../data/default_ontology.toml");

/// One of the five context dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum AspectId {
    /// Temporal context: when?
    #[serde(rename = "TIME")]
    Time,
    /// Endurant context: where?
    #[serde(rename = "WE")]
    We,
    /// Perdurant context: what are you doing?
    #[serde(rename = "WA")]
    Wa,
    /// Social context: who are you with?
    #[serde(rename = "WO")]
    Wo,
    /// Object context: what are you with?
    #[serde(rename = "WI")]
    Wi,
}

impl AspectId {
    pub const ALL: [AspectId; 5] = [
        AspectId::Time,
        AspectId::We,
        AspectId::Wa,
        AspectId::Wo,
        AspectId::Wi,
    ];

    /// The annotated aspects that classifiers are trained on, in the fixed
    /// order used for feature augmentation.
    pub const RECOGNIZED: [AspectId; 3] = [AspectId::We, AspectId::Wa, AspectId::Wo];

    pub fn as_str(self) -> &'static str {
        match self {
            AspectId::Time => "TIME",
            AspectId::We => "WE",
            AspectId::Wa => "WA",
            AspectId::Wo => "WO",
            AspectId::Wi => "WI",
        }
    }
}

impl fmt::Display for AspectId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AspectId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "TIME" => Ok(AspectId::Time),
            "WE" => Ok(AspectId::We),
            "WA" => Ok(AspectId::Wa),
            "WO" => Ok(AspectId::Wo),
            "WI" => Ok(AspectId::Wi),
            other => Err(Error::invalid(format!("unknown aspect `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Label {
    pub id: String,
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parent: Option<String>,
}

/// Hours `[start, end)` of the day mapped to a TIME label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeRule {
    pub start: u8,
    pub end: u8,
    pub label: String,
}

/// A named place on the earth's surface. Vertices are `[lat, lon]` in
/// degrees; the ring is implicitly closed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Geofence {
    pub label: String,
    pub polygon: Vec<[f64; 2]>,
}

impl Geofence {
    pub fn area(&self) -> f64 {
        polygon_area(&self.polygon)
    }

    pub fn contains(&self, point: GeoPoint) -> bool {
        polygon_contains(&self.polygon, point)
    }
}

/// Validated context schema. Immutable once loaded.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Ontology {
    pub version: String,
    pub aspects: BTreeMap<AspectId, Vec<Label>>,
    pub time_rules: Vec<TimeRule>,
    pub geofences: Vec<Geofence>,
}

/// On-disk shape. `time_rules` and the TIME vocabulary fall back to the
/// default day partition when omitted.
#[derive(Debug, Deserialize)]
struct OntologyDoc {
    version: String,
    #[serde(default)]
    aspects: BTreeMap<AspectId, Vec<Label>>,
    time_rules: Option<Vec<TimeRule>>,
    #[serde(default)]
    geofences: Vec<Geofence>,
}

pub fn default_time_rules() -> Vec<TimeRule> {
    [
        (0, 6, "night"),
        (6, 12, "morning"),
        (12, 18, "afternoon"),
        (18, 22, "evening"),
        (22, 24, "night"),
    ]
    .into_iter()
    .map(|(start, end, label)| TimeRule {
        start,
        end,
        label: label.to_string(),
    })
    .collect()
}

fn default_time_vocabulary() -> Vec<Label> {
    ["night", "morning", "afternoon", "evening"]
        .into_iter()
        .map(|id| {
            let mut name = id.to_string();
            name[..1].make_ascii_uppercase();
            Label {
                id: id.to_string(),
                name,
                parent: None,
            }
        })
        .collect()
}

/// Parses and validates an ontology document (TOML).
///
/// With `strict` set, keys the schema does not know about are rejected;
/// otherwise they are ignored with a warning.
pub fn load_ontology(document: &str, strict: bool) -> Result<Ontology> {
    let deserializer = toml::Deserializer::parse(document).map_err(|e| toml_error(document, e))?;
    let mut ignored = Vec::new();
    let doc: OntologyDoc = serde_ignored::deserialize(deserializer, |path| ignored.push(path.to_string()))
        .map_err(|e| toml_error(document, e))?;
    if let Some(path) = ignored.first() {
        if strict {
            return Err(Error::Parse {
                what: "ontology",
                location: Location::Field(path.clone()),
                message: "unknown key".into(),
            });
        }
        for path in &ignored {
            log::warn!("ontology: ignoring unknown key `{path}`");
        }
    }

    let mut aspects = doc.aspects;
    if doc.time_rules.is_none() && !aspects.contains_key(&AspectId::Time) {
        aspects.insert(AspectId::Time, default_time_vocabulary());
    }
    let ontology = Ontology {
        version: doc.version,
        aspects,
        time_rules: doc.time_rules.unwrap_or_else(default_time_rules),
        geofences: doc.geofences,
    };
    ontology.validate()?;
    Ok(ontology)
}

pub fn load_default_ontology() -> Ontology {
    load_ontology(DEFAULT_ONTOLOGY, true).expect("bundled ontology is valid")
}

fn toml_error(document: &str, e: toml::de::Error) -> Error {
    let line = e
        .span()
        .map(|span| document[..span.start.min(document.len())].matches('\n').count() + 1);
    let mut message = e.message().to_string();
    if message.is_empty() {
        message = e.to_string();
    }
    Error::Parse {
        what: "ontology",
        location: match line {
            Some(line) => Location::Line(line),
            None => Location::Field("<document>".into()),
        },
        message,
    }
}

impl Ontology {
    /// Renders the canonical TOML form; `load_ontology` of the output yields
    /// an equal ontology.
    pub fn serialize(&self) -> String {
        toml::to_string(self).expect("ontology is always representable as TOML")
    }

    pub fn vocabulary(&self, aspect: AspectId) -> &[Label] {
        self.aspects.get(&aspect).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn label_count(&self) -> usize {
        self.aspects.values().map(Vec::len).sum()
    }

    /// Labels that no other label names as parent. Classifiers train on these.
    pub fn leaf_labels(&self, aspect: AspectId) -> Vec<&str> {
        let vocab = self.vocabulary(aspect);
        let parents: HashSet<&str> = vocab.iter().filter_map(|l| l.parent.as_deref()).collect();
        vocab
            .iter()
            .map(|l| l.id.as_str())
            .filter(|id| !parents.contains(id))
            .collect()
    }

    /// True iff `label` is anywhere in the aspect's vocabulary.
    pub fn validate_label(&self, aspect: AspectId, label: &str) -> bool {
        self.vocabulary(aspect).iter().any(|l| l.id == label)
    }

    pub fn subjective_time(&self, hour_of_day: u8) -> &str {
        subjective_time(hour_of_day, &self.time_rules)
    }

    /// Label of the geofence containing `point`. When fences overlap the
    /// smallest one wins; equal areas fall back to declaration order.
    pub fn resolve_place(&self, point: GeoPoint) -> Result<Option<&str>> {
        point.check()?;
        let mut best: Option<(&Geofence, f64)> = None;
        for fence in &self.geofences {
            if !fence.contains(point) {
                continue;
            }
            let area = fence.area();
            if best.map_or(true, |(_, a)| area < a) {
                best = Some((fence, area));
            }
        }
        Ok(best.map(|(fence, _)| fence.label.as_str()))
    }

    fn validate(&self) -> Result<()> {
        for (aspect, vocab) in &self.aspects {
            validate_vocabulary(*aspect, vocab)?;
        }
        self.validate_time_rules()?;
        for (i, fence) in self.geofences.iter().enumerate() {
            if fence.polygon.len() < 3 {
                return Err(Error::Ontology(format!(
                    "geofence #{i} `{}` has {} vertices, need at least 3",
                    fence.label,
                    fence.polygon.len()
                )));
            }
            for &[lat, lon] in &fence.polygon {
                GeoPoint::new(lat, lon).check().map_err(|_| {
                    Error::Ontology(format!(
                        "geofence `{}` has vertex ({lat}, {lon}) out of range",
                        fence.label
                    ))
                })?;
            }
            if fence.area() <= 0.0 {
                return Err(Error::Ontology(format!("geofence `{}` has zero area", fence.label)));
            }
            if !self.validate_label(AspectId::We, &fence.label) {
                return Err(Error::Ontology(format!(
                    "geofence label `{}` is not in the WE vocabulary",
                    fence.label
                )));
            }
        }
        Ok(())
    }

    fn validate_time_rules(&self) -> Result<()> {
        let mut rules: Vec<&TimeRule> = self.time_rules.iter().collect();
        for rule in &rules {
            if rule.start >= rule.end || rule.end > 24 {
                return Err(Error::Ontology(format!(
                    "time rule [{}, {}) `{}` is empty or exceeds 24h",
                    rule.start, rule.end, rule.label
                )));
            }
            if !self.validate_label(AspectId::Time, &rule.label) {
                return Err(Error::Ontology(format!(
                    "time rule label `{}` is not in the TIME vocabulary",
                    rule.label
                )));
            }
        }
        rules.sort_by_key(|r| r.start);
        let mut covered = 0u8;
        for rule in rules {
            if rule.start != covered {
                return Err(Error::Ontology(format!(
                    "time rules do not partition [0,24): {} at hour {covered} (rule `{}` starts at {})",
                    if rule.start > covered { "gap" } else { "overlap" },
                    rule.label,
                    rule.start
                )));
            }
            covered = rule.end;
        }
        if covered != 24 {
            return Err(Error::Ontology(format!(
                "time rules do not partition [0,24): gap from hour {covered} to 24"
            )));
        }
        Ok(())
    }
}

fn validate_vocabulary(aspect: AspectId, vocab: &[Label]) -> Result<()> {
    let mut by_id: HashMap<&str, &Label> = HashMap::with_capacity(vocab.len());
    for label in vocab {
        if label.id.is_empty() {
            return Err(Error::Ontology(format!("empty label id in aspect {aspect}")));
        }
        if by_id.insert(label.id.as_str(), label).is_some() {
            return Err(Error::Ontology(format!("duplicate label `{}` in aspect {aspect}", label.id)));
        }
    }
    for label in vocab {
        if let Some(parent) = &label.parent {
            if !by_id.contains_key(parent.as_str()) {
                return Err(Error::Ontology(format!(
                    "label `{}` in aspect {aspect} has unknown parent `{parent}`",
                    label.id
                )));
            }
        }
        // Walk up; more steps than labels means a cycle.
        let mut cursor = label;
        for _ in 0..=vocab.len() {
            match cursor.parent.as_deref() {
                None => break,
                Some(p) if p == label.id => {
                    return Err(Error::Ontology(format!(
                        "parent cycle through label `{}` in aspect {aspect}",
                        label.id
                    )))
                }
                Some(p) => cursor = by_id[p],
            }
        }
        if cursor.parent.is_some() {
            return Err(Error::Ontology(format!(
                "parent cycle above label `{}` in aspect {aspect}",
                label.id
            )));
        }
    }
    Ok(())
}

/// Label of the unique rule containing `hour_of_day`. Rules must partition
/// `[0, 24)`; panics otherwise.
pub fn subjective_time(hour_of_day: u8, rules: &[TimeRule]) -> &str {
    rules
        .iter()
        .find(|r| r.start <= hour_of_day && hour_of_day < r.end)
        .map(|r| r.label.as_str())
        .unwrap_or_else(|| panic!("no time rule covers hour {hour_of_day}"))
}
