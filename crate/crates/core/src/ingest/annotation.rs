use std::collections::HashMap;
use std::io::Read;

use serde::{Deserialize, Serialize};

use super::record::Labels;
use crate::error::{Error, Result};
use crate::ontology::{AspectId, Ontology};

/// One questionnaire answer: where, doing what, with whom.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotationEvent {
    pub user: String,
    pub ts_ms: i64,
    pub we: String,
    pub wa: String,
    pub wo: String,
}

impl AnnotationEvent {
    pub fn labels(&self) -> Labels {
        Labels {
            we: self.we.clone(),
            wa: self.wa.clone(),
            wo: self.wo.clone(),
        }
    }
}

/// Reads a `user,ts_ms,we,wa,wo` table with a header row. Labels must be in
/// the ontology and timestamps strictly increasing per user (in file order).
pub fn parse_annotations<R: Read>(input: R, ontology: &Ontology) -> Result<Vec<AnnotationEvent>> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let headers = reader
        .headers()
        .map_err(|e| Error::parse_at_line("annotations", 1, e.to_string()))?
        .clone();
    let expected = ["user", "ts_ms", "we", "wa", "wo"];
    if headers.iter().ne(expected) {
        return Err(Error::parse_at_line(
            "annotations",
            1,
            format!("header must be `{}`", expected.join(",")),
        ));
    }
    let mut events = Vec::new();
    let mut last_ts: HashMap<String, i64> = HashMap::new();
    for (idx, row) in reader.deserialize::<AnnotationEvent>().enumerate() {
        let line_no = idx + 2;
        let event = row.map_err(|e| Error::parse_at_line("annotations", line_no, e.to_string()))?;
        for (aspect, label) in [(AspectId::We, &event.we), (AspectId::Wa, &event.wa), (AspectId::Wo, &event.wo)] {
            if !ontology.validate_label(aspect, label) {
                return Err(Error::parse_at_line(
                    "annotations",
                    line_no,
                    format!("label `{label}` is not in the {aspect} vocabulary"),
                ));
            }
        }
        if let Some(&prev) = last_ts.get(&event.user) {
            if event.ts_ms <= prev {
                return Err(Error::parse_at_line(
                    "annotations",
                    line_no,
                    format!("timestamp {} for user `{}` does not increase (previous {prev})", event.ts_ms, event.user),
                ));
            }
        }
        last_ts.insert(event.user.clone(), event.ts_ms);
        events.push(event);
    }
    events.sort_by(|a, b| a.user.cmp(&b.user).then(a.ts_ms.cmp(&b.ts_ms)));
    Ok(events)
}
