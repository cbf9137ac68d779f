//! Fixtures shared by the benchmarks.

use contextrec::forest::LabeledMatrix;
use contextrec::ingest::Dataset;
use contextrec::synth::{sample_dataset, GeneratorParams};
use contextrec::AspectId;

/// Synthetic records with the default generator settings, scaled down.
pub fn synth_dataset(users: usize, records_per_user: usize) -> Dataset {
    let params = GeneratorParams {
        users,
        records_per_user,
        ..GeneratorParams::default()
    };
    sample_dataset(&params).expect("default generator parameters are valid")
}

/// Sensor features of `ds` with `target` labels as class indices.
pub fn target_matrix(ds: &Dataset, target: AspectId) -> (LabeledMatrix, Vec<String>) {
    let names = ds.observed_labels(target);
    let rows: Vec<Vec<f64>> = ds.records.iter().map(|r| r.features.clone()).collect();
    let labels = ds
        .records
        .iter()
        .map(|r| {
            let label = r.labels.get(target).unwrap_or_default();
            names.iter().position(|n| n == label).expect("observed label")
        })
        .collect();
    let matrix = LabeledMatrix::from_rows(&rows, labels, names.len()).expect("rectangular rows");
    (matrix, names)
}

/// A JSON Lines sensor log: one user, `minutes` minutes of 20 Hz
/// accelerometer plus a minutely battery reading, and a matching time diary
/// with one annotation every half hour.
pub fn sensor_log(minutes: i64) -> (String, String) {
    let t0: i64 = 1_581_897_600_000;
    let mut log = String::new();
    for k in 0..minutes * 60 * 20 {
        let ts = t0 + k * 50;
        let z = 9.81 + ((k % 37) as f64) * 0.01;
        log.push_str(&format!(
            "{{\"user\":\"u1\",\"sensor\":\"acceleration\",\"ts_ms\":{ts},\"values\":[0.1,-0.2,{z}]}}\n"
        ));
        if k % 1200 == 0 {
            log.push_str(&format!(
                "{{\"user\":\"u1\",\"sensor\":\"battery_level\",\"ts_ms\":{ts},\"values\":[{}]}}\n",
                100 - k / 1200
            ));
        }
    }
    let mut diary = String::from("user,ts_ms,we,wa,wo\n");
    for h in 0..(minutes + 29) / 30 {
        diary.push_str(&format!("u1,{},classroom,lesson,classmate\n", t0 + h * 1_800_000));
    }
    (log, diary)
}
