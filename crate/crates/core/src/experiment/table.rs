use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::encode::canonical_order;
use super::{ExperimentReport, Protocol};
use crate::error::{Error, Result};
use crate::ontology::AspectId;

/// Column order of the improvement table.
pub const TABLE_COLUMNS: [AspectId; 3] = [AspectId::Wa, AspectId::We, AspectId::Wo];

/// Row order: each single added aspect, then all other aspects together.
/// `None` means "all aspects other than the column's target".
pub const TABLE_ROWS: [Option<AspectId>; 4] = [Some(AspectId::Wa), Some(AspectId::We), Some(AspectId::Wo), None];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Cell {
    /// The added aspect is the target itself.
    Diagonal,
    /// No report for this arm (or for its baseline).
    Missing,
    /// Gain over the sensors-only arm, in percentage points.
    Delta(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub inputs: String,
    pub cells: Vec<Cell>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImprovementTable {
    pub digest: String,
    pub protocol: Protocol,
    pub columns: Vec<AspectId>,
    pub rows: Vec<TableRow>,
}

fn row_name(row: Option<AspectId>) -> String {
    match row {
        Some(a) => format!("Sensors + {a}"),
        None => "Sensors + Other Aspects".to_string(),
    }
}

fn others(target: AspectId) -> Vec<AspectId> {
    AspectId::RECOGNIZED.into_iter().filter(|&a| a != target).collect()
}

const FIRST_WIDTH: usize = 25;
const CELL_WIDTH: usize = 10;

fn format_delta(v: f64) -> String {
    let s = format!("{v:+.2}%");
    if s == "-0.00%" {
        "+0.00%".to_string()
    } else {
        s
    }
}

impl ImprovementTable {
    /// Builds the table from sensors-only and augmented reports. Every report
    /// must come from the same dataset digest and protocol.
    pub fn from_reports(reports: &[ExperimentReport]) -> Result<Self> {
        let first = reports
            .first()
            .ok_or_else(|| Error::Experiment("no reports to tabulate".into()))?;
        for r in reports {
            if r.digest != first.digest {
                return Err(Error::Experiment(format!(
                    "reports come from different datasets ({} vs {})",
                    first.digest, r.digest
                )));
            }
            if r.spec.protocol != first.spec.protocol {
                return Err(Error::Experiment(format!(
                    "reports use different protocols ({} vs {})",
                    first.spec.protocol, r.spec.protocol
                )));
            }
        }
        let find = |target: AspectId, inputs: &[AspectId]| -> Result<Option<f64>> {
            let inputs = canonical_order(inputs);
            let mut hits = reports
                .iter()
                .filter(|r| r.spec.target == target && canonical_order(&r.spec.inputs) == inputs);
            let hit = hits.next();
            if hits.next().is_some() {
                return Err(Error::Experiment(format!(
                    "more than one report for arm {}",
                    hit.expect("first hit").spec.arm_name()
                )));
            }
            Ok(hit.map(ExperimentReport::score))
        };
        let mut rows = Vec::with_capacity(TABLE_ROWS.len());
        for row in TABLE_ROWS {
            let mut cells = Vec::with_capacity(TABLE_COLUMNS.len());
            for target in TABLE_COLUMNS {
                if row == Some(target) {
                    cells.push(Cell::Diagonal);
                    continue;
                }
                let inputs = match row {
                    Some(a) => vec![a],
                    None => others(target),
                };
                cells.push(match (find(target, &[])?, find(target, &inputs)?) {
                    (Some(base), Some(aug)) => Cell::Delta(100.0 * (aug - base)),
                    _ => Cell::Missing,
                });
            }
            rows.push(TableRow {
                inputs: row_name(row),
                cells,
            });
        }
        Ok(Self {
            digest: first.digest.clone(),
            protocol: first.spec.protocol,
            columns: TABLE_COLUMNS.to_vec(),
            rows,
        })
    }

    pub fn cell(&self, added: Option<AspectId>, target: AspectId) -> Option<Cell> {
        let r = TABLE_ROWS.iter().position(|&x| x == added)?;
        let c = self.columns.iter().position(|&x| x == target)?;
        Some(self.rows[r].cells[c])
    }

    /// Fixed-width text grid, one line per row between horizontal rules.
    pub fn render(&self) -> String {
        let total = FIRST_WIDTH + CELL_WIDTH * self.columns.len();
        let rule = "-".repeat(total);
        let mut out = String::new();
        let mut line = format!("{:<FIRST_WIDTH$}", "Inputs");
        for c in &self.columns {
            let _ = write!(line, "{:<CELL_WIDTH$}", c.as_str());
        }
        let _ = writeln!(out, "{rule}");
        let _ = writeln!(out, "{}", line.trim_end());
        let _ = writeln!(out, "{rule}");
        for row in &self.rows {
            let mut line = format!("{:<FIRST_WIDTH$}", row.inputs);
            for cell in &row.cells {
                let text = match cell {
                    Cell::Diagonal => "--".to_string(),
                    Cell::Missing => "n/a".to_string(),
                    Cell::Delta(v) => format_delta(*v),
                };
                let _ = write!(line, "{text:<CELL_WIDTH$}");
            }
            let _ = writeln!(out, "{}", line.trim_end());
        }
        let _ = writeln!(out, "{rule}");
        out
    }

    /// Comma-separated export. Diagonal and missing cells are empty; deltas
    /// are percentage points with four decimals.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("inputs");
        for c in &self.columns {
            out.push(',');
            out.push_str(c.as_str());
        }
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.inputs);
            for cell in &row.cells {
                out.push(',');
                if let Cell::Delta(v) = cell {
                    let _ = write!(out, "{v:.4}");
                }
            }
            out.push('\n');
        }
        out
    }
}

/// See [`ImprovementTable::from_reports`].
pub fn improvement_table(reports: &[ExperimentReport]) -> Result<ImprovementTable> {
    ImprovementTable::from_reports(reports)
}
