use serde::{Deserialize, Serialize};

use super::{AspectId, GeoPoint, Ontology};
use crate::error::{Error, Result};

/// Machine-level description of one aspect.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MachineValue {
    /// Epoch milliseconds.
    Timestamp { ms: i64 },
    Coordinate(GeoPoint),
    /// A summary of sensor values, e.g. `acceleration = [0, 0, 0]`.
    SensorSummary { sensor: String, values: Vec<f64> },
    /// Whether a person appears in the device's contact list.
    ContactListed { contact: String, listed: bool },
    Text { value: String },
}

/// The objective / machine / subjective descriptions of one aspect. Any level
/// may be absent.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AspectDescriptor {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub objective: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub machine: Option<MachineValue>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subjective: Option<String>,
}

impl AspectDescriptor {
    pub fn machine(value: MachineValue) -> Self {
        Self {
            machine: Some(value),
            ..Self::default()
        }
    }
}

/// One person's context at one instant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContextTuple {
    pub owner: String,
    pub at: i64,
    pub time: AspectDescriptor,
    pub we: AspectDescriptor,
    pub wa: AspectDescriptor,
    pub wo: AspectDescriptor,
    pub wi: AspectDescriptor,
}

impl ContextTuple {
    /// A tuple whose TIME machine level is the instant itself.
    pub fn at(owner: impl Into<String>, at_ms: i64) -> Self {
        Self {
            owner: owner.into(),
            at: at_ms,
            time: AspectDescriptor::machine(MachineValue::Timestamp { ms: at_ms }),
            we: AspectDescriptor::default(),
            wa: AspectDescriptor::default(),
            wo: AspectDescriptor::default(),
            wi: AspectDescriptor::default(),
        }
    }

    pub fn aspect(&self, aspect: AspectId) -> &AspectDescriptor {
        match aspect {
            AspectId::Time => &self.time,
            AspectId::We => &self.we,
            AspectId::Wa => &self.wa,
            AspectId::Wo => &self.wo,
            AspectId::Wi => &self.wi,
        }
    }

    pub fn aspect_mut(&mut self, aspect: AspectId) -> &mut AspectDescriptor {
        match aspect {
            AspectId::Time => &mut self.time,
            AspectId::We => &mut self.we,
            AspectId::Wa => &mut self.wa,
            AspectId::Wo => &mut self.wo,
            AspectId::Wi => &mut self.wi,
        }
    }

    /// Checks subjective labels against the ontology and that `at` agrees
    /// with the TIME machine timestamp.
    pub fn validate(&self, ontology: &Ontology) -> Result<()> {
        for aspect in AspectId::ALL {
            if let Some(label) = &self.aspect(aspect).subjective {
                if !ontology.validate_label(aspect, label) {
                    return Err(Error::Ontology(format!(
                        "label `{label}` is not in the {aspect} vocabulary"
                    )));
                }
            }
        }
        if let Some(MachineValue::Timestamp { ms }) = self.time.machine {
            if ms != self.at {
                return Err(Error::invalid(format!(
                    "context instant {} disagrees with TIME timestamp {ms}",
                    self.at
                )));
            }
        }
        Ok(())
    }
}

const MS_PER_HOUR: i64 = 3_600_000;

/// Hour of day (0..=23) of an epoch-millisecond instant at a fixed UTC offset.
pub fn local_hour(epoch_ms: i64, utc_offset_minutes: i32) -> u8 {
    let local = epoch_ms + i64::from(utc_offset_minutes) * 60_000;
    local.div_euclid(MS_PER_HOUR).rem_euclid(24) as u8
}

/// Fills TIME and WE subjective levels from the machine levels. WA, WO and
/// WI come from annotation or prediction and are left untouched.
pub fn lift_context(
    machine: &ContextTuple,
    ontology: &Ontology,
    utc_offset_minutes: i32,
) -> Result<ContextTuple> {
    let Some(MachineValue::Timestamp { ms }) = machine.time.machine else {
        return Err(Error::invalid("TIME machine level must be an epoch-milliseconds timestamp"));
    };
    let mut lifted = machine.clone();
    let hour = local_hour(ms, utc_offset_minutes);
    lifted.time.subjective = Some(ontology.subjective_time(hour).to_string());
    lifted.we.subjective = match machine.we.machine {
        Some(MachineValue::Coordinate(point)) => ontology.resolve_place(point)?.map(str::to_string),
        _ => None,
    };
    Ok(lifted)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ontology::load_default_ontology;
    use chrono::{DateTime, FixedOffset, Timelike};

    const TABLE_ONE_MS: i64 = 1_581_938_718_026;

    fn chrono_hour(ms: i64, offset_minutes: i32) -> u8 {
        let offset = FixedOffset::east_opt(offset_minutes * 60).unwrap();
        DateTime::from_timestamp_millis(ms)
            .unwrap()
            .with_timezone(&offset)
            .hour() as u8
    }

    #[test]
    fn local_hour_agrees_with_calendar() {
        assert_eq!(chrono_hour(TABLE_ONE_MS, 0), 11);
        for &offset in &[0, 60, -300, 330, 825, -720] {
            for k in 0..200i64 {
                let ms = TABLE_ONE_MS - 50 * MS_PER_HOUR + k * 1_234_567_891 % (90 * MS_PER_HOUR);
                assert_eq!(local_hour(ms, offset), chrono_hour(ms, offset), "{ms} {offset}");
            }
        }
        assert_eq!(local_hour(-1, 0), 23);
    }

    #[test]
    fn lifts_the_lesson_scene() {
        let ontology = load_default_ontology();
        let mut tuple = ContextTuple::at("shen", TABLE_ONE_MS);
        tuple.we.machine = Some(MachineValue::Coordinate(GeoPoint::new(46.067194, 11.150667)));
        tuple.wa.machine = Some(MachineValue::SensorSummary {
            sensor: "acceleration".into(),
            values: vec![0.0, 0.0, 0.0],
        });
        let lifted = lift_context(&tuple, &ontology, 0).unwrap();
        assert_eq!(lifted.time.subjective.as_deref(), Some("morning"));
        assert_eq!(lifted.we.subjective.as_deref(), Some("classroom"));
        assert_eq!(lifted.wa.subjective, None);
        assert_eq!(lifted.wa.machine, tuple.wa.machine);
        lifted.validate(&ontology).unwrap();
    }

    #[test]
    fn absent_location_stays_absent() {
        let ontology = load_default_ontology();
        let lifted = lift_context(&ContextTuple::at("u", TABLE_ONE_MS), &ontology, 0).unwrap();
        assert_eq!(lifted.we.subjective, None);
    }

    #[test]
    fn bad_coordinates_propagate() {
        let ontology = load_default_ontology();
        let mut tuple = ContextTuple::at("u", TABLE_ONE_MS);
        tuple.we.machine = Some(MachineValue::Coordinate(GeoPoint::new(120.0, 0.0)));
        assert!(lift_context(&tuple, &ontology, 0).is_err());
    }

    #[test]
    fn missing_timestamp_is_an_error() {
        let ontology = load_default_ontology();
        let mut tuple = ContextTuple::at("u", 0);
        tuple.time.machine = None;
        assert!(lift_context(&tuple, &ontology, 0).is_err());
    }

    #[test]
    fn validate_catches_unknown_labels_and_drift() {
        let ontology = load_default_ontology();
        let mut tuple = ContextTuple::at("u", 10);
        tuple.wa.subjective = Some("swimming".into());
        assert!(tuple.validate(&ontology).is_err());
        tuple.wa.subjective = Some("study".into());
        tuple.validate(&ontology).unwrap();
        tuple.at = 11;
        assert!(tuple.validate(&ontology).is_err());
    }
}
