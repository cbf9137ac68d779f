use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::ontology::AspectId;

/// Annotated WE / WA / WO labels of a record.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Labels {
    pub we: String,
    pub wa: String,
    pub wo: String,
}

impl Labels {
    pub fn get(&self, aspect: AspectId) -> Option<&str> {
        match aspect {
            AspectId::We => Some(&self.we),
            AspectId::Wa => Some(&self.wa),
            AspectId::Wo => Some(&self.wo),
            AspectId::Time | AspectId::Wi => None,
        }
    }
}

/// One window's feature vector. `mask[j]` is set iff feature `j` had to be
/// imputed; until imputation runs such entries hold NaN.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub user: String,
    pub window_start: i64,
    pub features: Vec<f64>,
    pub mask: Vec<bool>,
    pub labels: Labels,
}

impl Record {
    pub fn dense(user: impl Into<String>, window_start: i64, features: Vec<f64>, labels: Labels) -> Self {
        let mask = vec![false; features.len()];
        Self {
            user: user.into(),
            window_start,
            features,
            mask,
            labels,
        }
    }

    pub fn has_pending(&self) -> bool {
        self.features.iter().any(|x| x.is_nan())
    }
}

/// A table of records sharing one feature layout.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Dataset {
    pub feature_names: Vec<String>,
    pub records: Vec<Record>,
}

const FIXED_COLUMNS: [&str; 5] = ["user", "window_start", "WE", "WA", "WO"];
pub const MISSING_SUFFIX: &str = "_missing";

impl Dataset {
    pub fn new(feature_names: Vec<String>) -> Self {
        Self {
            feature_names,
            records: Vec::new(),
        }
    }

    pub fn width(&self) -> usize {
        self.feature_names.len()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn push(&mut self, record: Record) -> Result<()> {
        if record.features.len() != self.width() || record.mask.len() != self.width() {
            return Err(Error::Ingest(format!(
                "record width {} does not match dataset width {}",
                record.features.len(),
                self.width()
            )));
        }
        self.records.push(record);
        Ok(())
    }

    /// Sorted distinct users.
    pub fn users(&self) -> Vec<&str> {
        let set: BTreeSet<&str> = self.records.iter().map(|r| r.user.as_str()).collect();
        set.into_iter().collect()
    }

    /// Sorted distinct labels of one aspect.
    pub fn observed_labels(&self, aspect: AspectId) -> Vec<String> {
        let set: BTreeSet<&str> = self.records.iter().filter_map(|r| r.labels.get(aspect)).collect();
        set.into_iter().map(str::to_string).collect()
    }

    /// Canonical table: header, then one row per record. Masked values that
    /// were never imputed are written as empty cells; every feature column has
    /// a `_missing` 0/1 companion after all feature columns.
    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        let mut header: Vec<String> = FIXED_COLUMNS.iter().map(|s| s.to_string()).collect();
        header.extend(self.feature_names.iter().cloned());
        header.extend(self.feature_names.iter().map(|n| format!("{n}{MISSING_SUFFIX}")));
        w.write_record(&header).expect("in-memory write");
        let mut row: Vec<String> = Vec::with_capacity(header.len());
        for r in &self.records {
            row.clear();
            row.push(r.user.clone());
            row.push(r.window_start.to_string());
            row.push(r.labels.we.clone());
            row.push(r.labels.wa.clone());
            row.push(r.labels.wo.clone());
            for x in &r.features {
                row.push(if x.is_nan() { String::new() } else { x.to_string() });
            }
            for &m in &r.mask {
                row.push(if m { "1" } else { "0" }.to_string());
            }
            w.write_record(&row).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush to memory")).expect("csv output is utf-8")
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new().from_reader(text.as_bytes());
        let header = reader
            .headers()
            .map_err(|e| Error::parse_at_line("records", 1, e.to_string()))?
            .clone();
        let cols: Vec<&str> = header.iter().collect();
        if cols.len() < FIXED_COLUMNS.len() || cols[..FIXED_COLUMNS.len()] != FIXED_COLUMNS {
            return Err(Error::parse_at_line(
                "records",
                1,
                format!("header must start with `{}`", FIXED_COLUMNS.join(",")),
            ));
        }
        let rest = &cols[FIXED_COLUMNS.len()..];
        if rest.len() % 2 != 0 {
            return Err(Error::parse_at_line("records", 1, "feature and mask columns are unbalanced"));
        }
        let width = rest.len() / 2;
        let names: Vec<String> = rest[..width].iter().map(|s| s.to_string()).collect();
        for (name, mask_name) in names.iter().zip(&rest[width..]) {
            if *mask_name != format!("{name}{MISSING_SUFFIX}") {
                return Err(Error::parse_at_line(
                    "records",
                    1,
                    format!("expected mask column `{name}{MISSING_SUFFIX}`, found `{mask_name}`"),
                ));
            }
        }
        let mut ds = Dataset::new(names);
        for (idx, row) in reader.records().enumerate() {
            let line = idx + 2;
            let row = row.map_err(|e| Error::parse_at_line("records", line, e.to_string()))?;
            let field = |i: usize| row.get(i).unwrap_or("");
            let window_start: i64 = field(1)
                .parse()
                .map_err(|_| Error::parse_at_line("records", line, format!("bad window_start `{}`", field(1))))?;
            let mut features = Vec::with_capacity(width);
            let mut mask = Vec::with_capacity(width);
            for j in 0..width {
                let m = match field(5 + width + j) {
                    "0" => false,
                    "1" => true,
                    other => {
                        return Err(Error::parse_at_line("records", line, format!("bad mask value `{other}`")))
                    }
                };
                let cell = field(5 + j);
                let x = if cell.is_empty() {
                    if !m {
                        return Err(Error::parse_at_line(
                            "records",
                            line,
                            format!("empty value for unmasked feature `{}`", ds.feature_names[j]),
                        ));
                    }
                    f64::NAN
                } else {
                    cell.parse::<f64>()
                        .map_err(|_| Error::parse_at_line("records", line, format!("bad number `{cell}`")))?
                };
                features.push(x);
                mask.push(m);
            }
            ds.records.push(Record {
                user: field(0).to_string(),
                window_start,
                features,
                mask,
                labels: Labels {
                    we: field(2).to_string(),
                    wa: field(3).to_string(),
                    wo: field(4).to_string(),
                },
            });
        }
        Ok(ds)
    }

    /// SHA-256 of the canonical table, hex encoded.
    pub fn digest(&self) -> String {
        sha256_hex(self.to_csv().as_bytes())
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels() -> Labels {
        Labels {
            we: "home".into(),
            wa: "rest".into(),
            wo: "alone".into(),
        }
    }

    #[test]
    fn csv_layout() {
        let mut ds = Dataset::new(vec!["a".into(), "b".into()]);
        ds.push(Record {
            user: "u1".into(),
            window_start: 0,
            features: vec![1.5, f64::NAN],
            mask: vec![false, true],
            labels: labels(),
        })
        .unwrap();
        let text = ds.to_csv();
        assert_eq!(
            text,
            "user,window_start,WE,WA,WO,a,b,a_missing,b_missing\nu1,0,home,rest,alone,1.5,,0,1\n"
        );
        let back = Dataset::from_csv(&text).unwrap();
        assert_eq!(back.to_csv(), text);
        assert!(back.records[0].features[1].is_nan());
    }

    #[test]
    fn width_is_enforced() {
        let mut ds = Dataset::new(vec!["a".into()]);
        assert!(ds.push(Record::dense("u", 0, vec![1.0, 2.0], labels())).is_err());
    }

    #[test]
    fn rejects_inconsistent_tables() {
        assert!(Dataset::from_csv("user,window_start,WE,WA,WO,a,b\n").is_err());
        assert!(Dataset::from_csv("user,window_start,WE,WA,WO,a,a_missing\nu,0,x,y,z,,0\n").is_err());
    }

    #[test]
    fn digest_tracks_content() {
        let mut ds = Dataset::new(vec!["a".into()]);
        ds.push(Record::dense("u", 0, vec![1.0], labels())).unwrap();
        let d1 = ds.digest();
        ds.records[0].features[0] = 2.0;
        assert_ne!(d1, ds.digest());
        assert_eq!(d1.len(), 64);
    }
}
