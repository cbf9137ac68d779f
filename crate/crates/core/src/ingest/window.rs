use std::collections::BTreeMap;

use super::annotation::AnnotationEvent;
use super::log::SensorReading;
use super::record::Labels;

/// Questionnaire cadence.
pub const DEFAULT_WINDOW_MS: i64 = 30 * 60 * 1000;

/// The readings claimed by one annotation: `[start, end)` for one user.
#[derive(Debug, Clone, PartialEq)]
pub struct Window {
    pub user: String,
    pub start: i64,
    pub end: i64,
    pub labels: Labels,
    pub readings: Vec<SensorReading>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Windowing {
    pub windows: Vec<Window>,
    /// Readings no annotation claimed.
    pub dropped: usize,
    /// Windows cut short by the next annotation of the same user.
    pub truncated: usize,
}

/// Assigns each reading to the annotation window of the same user that
/// contains it. An annotation at `t` claims `[t, t + window_ms)`, cut at the
/// next annotation of that user if it comes sooner. Windows are returned in
/// `(user, start)` order, empty ones included.
pub fn window_records(readings: &[SensorReading], annotations: &[AnnotationEvent], window_ms: i64) -> Windowing {
    let mut by_user: BTreeMap<&str, Vec<&AnnotationEvent>> = BTreeMap::new();
    for a in annotations {
        by_user.entry(a.user.as_str()).or_default().push(a);
    }
    let mut out = Windowing::default();
    let mut slots: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
    for (user, events) in by_user.iter_mut() {
        events.sort_by_key(|a| a.ts_ms);
        let first = out.windows.len();
        for (i, a) in events.iter().enumerate() {
            let mut end = a.ts_ms + window_ms;
            if let Some(next) = events.get(i + 1) {
                if next.ts_ms < end {
                    end = next.ts_ms;
                    out.truncated += 1;
                }
            }
            out.windows.push(Window {
                user: a.user.clone(),
                start: a.ts_ms,
                end,
                labels: a.labels(),
                readings: Vec::new(),
            });
        }
        slots.insert(user, (first, out.windows.len()));
    }
    if out.truncated > 0 {
        log::warn!("{} annotation windows truncated by a following annotation", out.truncated);
    }

    for r in readings {
        let Some(&(lo, hi)) = slots.get(r.user.as_str()) else {
            out.dropped += 1;
            continue;
        };
        let user_windows = &mut out.windows[lo..hi];
        // Last window starting at or before the reading.
        let idx = user_windows.partition_point(|w| w.start <= r.ts_ms);
        match idx.checked_sub(1).map(|i| &mut user_windows[i]) {
            Some(w) if r.ts_ms < w.end => w.readings.push(r.clone()),
            _ => out.dropped += 1,
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::log::SensorValue;

    const MIN: i64 = 60_000;

    fn reading(user: &str, ts: i64) -> SensorReading {
        SensorReading {
            user: user.into(),
            sensor: "battery_level".into(),
            ts_ms: ts,
            value: SensorValue::Numeric(vec![50.0]),
        }
    }

    fn note(user: &str, ts: i64) -> AnnotationEvent {
        AnnotationEvent {
            user: user.into(),
            ts_ms: ts,
            we: "home".into(),
            wa: "rest".into(),
            wo: "alone".into(),
        }
    }

    #[test]
    fn one_annotation_claims_its_half_hour() {
        let t = 1_000 * MIN;
        let readings: Vec<_> = (0..10).map(|k| reading("u", t + k * MIN)).collect();
        let w = window_records(&readings, &[note("u", t)], DEFAULT_WINDOW_MS);
        assert_eq!(w.windows.len(), 1);
        assert_eq!(w.windows[0].readings.len(), 10);
        assert_eq!(w.dropped, 0);
    }

    #[test]
    fn readings_outside_windows_are_dropped() {
        let t = 1_000 * MIN;
        let readings = [reading("u", t + 31 * MIN), reading("u", t - 1), reading("v", t)];
        let w = window_records(&readings, &[note("u", t)], DEFAULT_WINDOW_MS);
        assert_eq!(w.windows[0].readings.len(), 0);
        assert_eq!(w.dropped, 3);
    }

    #[test]
    fn right_edge_belongs_to_next_window() {
        let t = 0;
        let readings = [reading("u", DEFAULT_WINDOW_MS)];
        let w = window_records(&readings, &[note("u", t), note("u", DEFAULT_WINDOW_MS)], DEFAULT_WINDOW_MS);
        assert_eq!(w.windows[0].readings.len(), 0);
        assert_eq!(w.windows[1].readings.len(), 1);
    }

    #[test]
    fn close_annotations_truncate() {
        let readings: Vec<_> = (0..40).map(|k| reading("u", k * MIN)).collect();
        let w = window_records(&readings, &[note("u", 0), note("u", 10 * MIN)], DEFAULT_WINDOW_MS);
        assert_eq!(w.truncated, 1);
        assert_eq!(w.windows[0].readings.len(), 10);
        assert_eq!(w.windows[1].readings.len(), 30);
        assert_eq!(w.dropped, 0);
    }

    #[test]
    fn two_annotations_split_an_hour() {
        // Oracle: reading at minute m belongs to window floor(m / 30) when m < 60.
        let readings: Vec<_> = (0..120).map(|k| reading("u", k * 30_000)).collect();
        let w = window_records(&readings, &[note("u", 0), note("u", 30 * MIN)], DEFAULT_WINDOW_MS);
        let mut expected = [0usize; 2];
        for r in &readings {
            expected[(r.ts_ms / (30 * MIN)) as usize] += 1;
        }
        assert_eq!(w.windows[0].readings.len(), expected[0]);
        assert_eq!(w.windows[1].readings.len(), expected[1]);
        assert_eq!(expected, [60, 60]);
    }
}
