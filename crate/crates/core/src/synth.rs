//! Synthetic annotated datasets with a tunable inter-aspect correlation.
//!
//! WE is uniform. WA follows a fixed map of WE with probability `rho` and is
//! uniform otherwise; WO likewise follows a fixed map of (WE, WA). Features
//! are split into three contiguous blocks, one per aspect, and each block is
//! that aspect's label prototype plus Gaussian noise. Because a block only
//! carries its own aspect's signal, at `rho = 0` the other labels hold no
//! information about the target beyond the sensors.

use std::collections::HashMap;
use std::hash::Hash;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{Dataset, Labels, Record};
use crate::seed::{derive_seed, rng_from};

const STREAM_MAPS: u64 = 1;
const STREAM_PROTOTYPES: u64 = 2;
const STREAM_USERS: u64 = 1 << 32;
const WINDOW_MS: i64 = 30 * 60 * 1000;
/// 2020-02-17T00:00:00Z.
const EPOCH_START_MS: i64 = 1_581_897_600_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorParams {
    pub users: usize,
    pub records_per_user: usize,
    pub we_labels: usize,
    pub wa_labels: usize,
    pub wo_labels: usize,
    /// 0 = independent aspects, 1 = WA and WO fully determined by WE.
    pub rho: f64,
    pub width: usize,
    /// Standard deviation of prototype coordinates.
    pub prototype_scale: f64,
    /// Standard deviation of per-record noise.
    pub noise_scale: f64,
    pub seed: u64,
}

impl Default for GeneratorParams {
    fn default() -> Self {
        Self {
            users: 20,
            records_per_user: 250,
            we_labels: 8,
            wa_labels: 10,
            wo_labels: 5,
            rho: 0.8,
            width: 30,
            prototype_scale: 1.0,
            noise_scale: 1.5,
            seed: 7,
        }
    }
}

impl GeneratorParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.rho) {
            return Err(Error::invalid(format!("rho out of [0,1]: {}", self.rho)));
        }
        if self.users == 0 || self.records_per_user == 0 {
            return Err(Error::invalid("users and records per user must be positive"));
        }
        if self.we_labels < 2 || self.wa_labels < 2 || self.wo_labels < 2 {
            return Err(Error::invalid("every vocabulary needs at least 2 labels"));
        }
        if self.width < 3 {
            return Err(Error::invalid("feature width must be at least 3 (one block per aspect)"));
        }
        for (name, v) in [("prototype scale", self.prototype_scale), ("noise scale", self.noise_scale)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::invalid(format!("{name} must be finite and non-negative")));
            }
        }
        Ok(())
    }

    pub fn we_vocabulary(&self) -> Vec<String> {
        label_names("we", self.we_labels)
    }

    pub fn wa_vocabulary(&self) -> Vec<String> {
        label_names("wa", self.wa_labels)
    }

    pub fn wo_vocabulary(&self) -> Vec<String> {
        label_names("wo", self.wo_labels)
    }

    /// `[start, end)` of the WE, WA and WO feature blocks.
    pub fn blocks(&self) -> [(usize, usize); 3] {
        let base = self.width / 3;
        let extra = self.width % 3;
        let sizes = [base + usize::from(extra > 0), base + usize::from(extra > 1), base];
        let mut start = 0;
        sizes.map(|s| {
            let b = (start, start + s);
            start += s;
            b
        })
    }
}

fn label_names(prefix: &str, n: usize) -> Vec<String> {
    let digits = n.saturating_sub(1).to_string().len().max(2);
    (0..n).map(|i| format!("{prefix}{i:0digits$}")).collect()
}

/// The seed-derived parts of the generator: coupling maps and prototypes.
#[derive(Debug, Clone, PartialEq)]
pub struct Generator {
    params: GeneratorParams,
    wa_of_we: Vec<usize>,
    wo_of_we_wa: Vec<usize>,
    /// `prototypes[aspect][label]` covers that aspect's feature block.
    prototypes: [Vec<Vec<f64>>; 3],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LabelTriple {
    pub we: usize,
    pub wa: usize,
    pub wo: usize,
}

impl Generator {
    pub fn new(params: GeneratorParams) -> Result<Self> {
        params.validate()?;
        let mut rng = rng_from(derive_seed(params.seed, STREAM_MAPS));
        let mut wa_perm: Vec<usize> = (0..params.wa_labels).collect();
        wa_perm.shuffle(&mut rng);
        let wa_of_we = (0..params.we_labels).map(|we| wa_perm[we % params.wa_labels]).collect();

        let combos = params.we_labels * params.wa_labels;
        let mut order: Vec<usize> = (0..combos).collect();
        order.shuffle(&mut rng);
        let mut wo_of_we_wa = vec![0; combos];
        for (j, &c) in order.iter().enumerate() {
            wo_of_we_wa[c] = j % params.wo_labels;
        }

        let mut rng = rng_from(derive_seed(params.seed, STREAM_PROTOTYPES));
        let normal = Normal::new(0.0, params.prototype_scale).expect("scale validated");
        let blocks = params.blocks();
        let sizes = [params.we_labels, params.wa_labels, params.wo_labels];
        let prototypes = [0, 1, 2].map(|a| {
            let (lo, hi) = blocks[a];
            (0..sizes[a])
                .map(|_| (lo..hi).map(|_| normal.sample(&mut rng)).collect())
                .collect()
        });
        Ok(Self {
            params,
            wa_of_we,
            wo_of_we_wa,
            prototypes,
        })
    }

    pub fn params(&self) -> &GeneratorParams {
        &self.params
    }

    pub fn coupled_wa(&self, we: usize) -> usize {
        self.wa_of_we[we]
    }

    pub fn coupled_wo(&self, we: usize, wa: usize) -> usize {
        self.wo_of_we_wa[we * self.params.wa_labels + wa]
    }

    /// Noise-free feature vector of a label triple.
    pub fn prototype(&self, labels: LabelTriple) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.params.width);
        out.extend_from_slice(&self.prototypes[0][labels.we]);
        out.extend_from_slice(&self.prototypes[1][labels.wa]);
        out.extend_from_slice(&self.prototypes[2][labels.wo]);
        out
    }

    pub fn sample_labels<R: Rng>(&self, rng: &mut R) -> LabelTriple {
        let p = &self.params;
        let we = rng.random_range(0..p.we_labels);
        let wa = if rng.random::<f64>() < p.rho {
            self.coupled_wa(we)
        } else {
            rng.random_range(0..p.wa_labels)
        };
        let wo = if rng.random::<f64>() < p.rho {
            self.coupled_wo(we, wa)
        } else {
            rng.random_range(0..p.wo_labels)
        };
        LabelTriple { we, wa, wo }
    }

    fn sample_user(&self, user: usize) -> Vec<Record> {
        let p = &self.params;
        let mut rng = rng_from(derive_seed(p.seed, STREAM_USERS + user as u64));
        let noise = Normal::new(0.0, p.noise_scale).expect("scale validated");
        let (we_names, wa_names, wo_names) = (p.we_vocabulary(), p.wa_vocabulary(), p.wo_vocabulary());
        let user_id = format!("u{user:03}");
        (0..p.records_per_user)
            .map(|k| {
                let labels = self.sample_labels(&mut rng);
                let mut features = self.prototype(labels);
                if p.noise_scale > 0.0 {
                    for x in features.iter_mut() {
                        *x += noise.sample(&mut rng);
                    }
                }
                Record::dense(
                    user_id.clone(),
                    EPOCH_START_MS + k as i64 * WINDOW_MS,
                    features,
                    Labels {
                        we: we_names[labels.we].clone(),
                        wa: wa_names[labels.wa].clone(),
                        wo: wo_names[labels.wo].clone(),
                    },
                )
            })
            .collect()
    }

    /// Users are generated in parallel from their own substreams and
    /// concatenated in user order.
    pub fn sample(&self) -> Dataset {
        let per_user: Vec<Vec<Record>> = (0..self.params.users)
            .into_par_iter()
            .map(|u| self.sample_user(u))
            .collect();
        let mut ds = Dataset::new(feature_names(&self.params));
        ds.records = per_user.into_iter().flatten().collect();
        ds
    }
}

fn feature_names(p: &GeneratorParams) -> Vec<String> {
    let blocks = p.blocks();
    let tags = ["we", "wa", "wo"];
    let mut names = Vec::with_capacity(p.width);
    for (tag, (lo, hi)) in tags.iter().zip(blocks) {
        for j in lo..hi {
            names.push(format!("x{j:02}_{tag}"));
        }
    }
    names
}

pub fn sample_dataset(params: &GeneratorParams) -> Result<Dataset> {
    Ok(Generator::new(params.clone())?.sample())
}

/// Sidecar written next to generated record tables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthManifest {
    pub generator: String,
    pub params: GeneratorParams,
    pub vocabularies: SynthVocabularies,
    pub records: usize,
    pub digest: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthVocabularies {
    #[serde(rename = "WE")]
    pub we: Vec<String>,
    #[serde(rename = "WA")]
    pub wa: Vec<String>,
    #[serde(rename = "WO")]
    pub wo: Vec<String>,
}

impl SynthManifest {
    pub fn new(params: &GeneratorParams, dataset: &Dataset) -> Self {
        Self {
            generator: "contextrec-synth/1".into(),
            params: params.clone(),
            vocabularies: SynthVocabularies {
                we: params.we_vocabulary(),
                wa: params.wa_vocabulary(),
                wo: params.wo_vocabulary(),
            },
            records: dataset.len(),
            digest: dataset.digest(),
        }
    }
}

/// Plug-in mutual information (nats) of the empirical joint distribution.
pub fn mutual_information<A, B>(a: &[A], b: &[B]) -> Result<f64>
where
    A: Eq + Hash,
    B: Eq + Hash,
{
    if a.len() != b.len() {
        return Err(Error::invalid(format!("sequences of length {} and {}", a.len(), b.len())));
    }
    if a.is_empty() {
        return Err(Error::invalid("mutual information of empty sequences"));
    }
    let n = a.len() as f64;
    let mut joint: HashMap<(&A, &B), usize> = HashMap::new();
    let mut ma: HashMap<&A, usize> = HashMap::new();
    let mut mb: HashMap<&B, usize> = HashMap::new();
    for (x, y) in a.iter().zip(b) {
        *joint.entry((x, y)).or_default() += 1;
        *ma.entry(x).or_default() += 1;
        *mb.entry(y).or_default() += 1;
    }
    let mut terms: Vec<f64> = joint
        .iter()
        .map(|(&(x, y), &c)| {
            let pxy = c as f64 / n;
            let px = ma[x] as f64 / n;
            let py = mb[y] as f64 / n;
            pxy * (pxy / (px * py)).ln()
        })
        .collect();
    // Sum in a fixed order; HashMap iteration order is not.
    terms.sort_by(f64::total_cmp);
    Ok(terms.iter().sum::<f64>().max(0.0))
}

/// Plug-in entropy (nats).
pub fn entropy<A: Eq + Hash>(a: &[A]) -> f64 {
    let n = a.len() as f64;
    let mut counts: HashMap<&A, usize> = HashMap::new();
    for x in a {
        *counts.entry(x).or_default() += 1;
    }
    let mut terms: Vec<f64> = counts
        .values()
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .collect();
    terms.sort_by(f64::total_cmp);
    terms.iter().sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(rho: f64) -> GeneratorParams {
        GeneratorParams {
            users: 4,
            records_per_user: 50,
            rho,
            ..GeneratorParams::default()
        }
    }

    fn column(ds: &Dataset, f: impl Fn(&Labels) -> &str) -> Vec<String> {
        ds.records.iter().map(|r| f(&r.labels).to_string()).collect()
    }

    #[test]
    fn invalid_params() {
        assert!(sample_dataset(&small(1.2)).unwrap_err().to_string().contains("rho out of [0,1]"));
        assert!(sample_dataset(&GeneratorParams { we_labels: 1, ..small(0.5) }).is_err());
        assert!(sample_dataset(&GeneratorParams { users: 0, ..small(0.5) }).is_err());
    }

    #[test]
    fn full_coupling_is_deterministic() {
        let p = small(1.0);
        let ds = sample_dataset(&p).unwrap();
        let mut map: HashMap<String, String> = HashMap::new();
        for r in &ds.records {
            let prev = map.entry(r.labels.we.clone()).or_insert_with(|| r.labels.wa.clone());
            assert_eq!(prev, &r.labels.wa);
        }
    }

    #[test]
    fn same_params_same_bytes() {
        let p = small(0.3);
        assert_eq!(sample_dataset(&p).unwrap().to_csv(), sample_dataset(&p).unwrap().to_csv());
        let other = GeneratorParams { seed: 8, ..p };
        assert_ne!(sample_dataset(&other).unwrap().digest(), sample_dataset(&small(0.3)).unwrap().digest());
    }

    #[test]
    fn shape_and_blocks() {
        let p = GeneratorParams { width: 31, ..small(0.5) };
        assert_eq!(p.blocks(), [(0, 11), (11, 21), (21, 31)]);
        let ds = sample_dataset(&p).unwrap();
        assert_eq!(ds.len(), 200);
        assert_eq!(ds.width(), 31);
        assert_eq!(ds.users().len(), 4);
        assert_eq!(ds.feature_names[0], "x00_we");
        assert_eq!(ds.feature_names[30], "x30_wo");
    }

    #[test]
    fn mutual_information_fixtures() {
        let coin: Vec<u8> = (0..1000).map(|i| (i % 2) as u8).collect();
        assert!((mutual_information(&coin, &coin).unwrap() - std::f64::consts::LN_2).abs() < 1e-12);
        let constant = vec![0u8; 1000];
        assert_eq!(mutual_information(&constant, &coin).unwrap(), 0.0);
        assert!(mutual_information::<u8, u8>(&[], &[]).is_err());
        assert!(mutual_information(&[1u8], &[1u8, 2]).is_err());
    }

    #[test]
    fn mi_bounded_by_entropies() {
        let ds = sample_dataset(&small(0.6)).unwrap();
        let we = column(&ds, |l| &l.we);
        let wa = column(&ds, |l| &l.wa);
        let mi = mutual_information(&we, &wa).unwrap();
        assert!(mi >= 0.0);
        assert!(mi <= entropy(&we).min(entropy(&wa)) + 1e-12);
    }
}
