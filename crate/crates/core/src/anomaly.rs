//! Novel-class detection: a point is suspicious when its neighbors sit much
//! farther away than points of its predicted class sit from each other.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::dataset::{sq_dist, train_test_split, VectorDataset};
use crate::error::{Error, Result};
use crate::metrics::f1;
use crate::rng::{derive_seed, rng_from};
use crate::splitrules::BuildConfig;
use crate::tree::{build, knn, vote, BuildInput, HCTree};

/// Pairs sampled per class once a class has more unordered pairs than this.
pub const PAIR_CAP: usize = 2000;
const STREAM_TABLE: u64 = 0x7461_626c;
const STREAM_SPLIT: u64 = 0x7370_6c74;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassEntry {
    /// Mean pairwise distance; `None` for singleton classes.
    pub mean_distance: Option<f64>,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnomalyTable {
    pub entries: BTreeMap<usize, ClassEntry>,
}

fn mean_pair_distance(rows: &[&[f64]], seed: u64) -> Option<f64> {
    let m = rows.len();
    if m < 2 {
        return None;
    }
    let dist = |a: usize, b: usize| sq_dist(rows[a], rows[b]).sqrt();
    let pairs = m * (m - 1) / 2;
    let total: f64 = if pairs <= PAIR_CAP {
        (0..m)
            .flat_map(|a| (a + 1..m).map(move |b| (a, b)))
            .map(|(a, b)| dist(a, b))
            .sum()
    } else {
        let mut rng = rng_from(seed);
        (0..PAIR_CAP)
            .map(|_| {
                let a = rng.random_range(0..m);
                let mut b = rng.random_range(0..m - 1);
                if b >= a {
                    b += 1;
                }
                dist(a, b)
            })
            .sum()
    };
    Some(total / pairs.min(PAIR_CAP) as f64)
}

/// Per-class mean pairwise Euclidean distance over the labeled `data`.
/// Members are ordered by their coordinates before sampling, so entries do
/// not depend on point order.
pub fn build_table(data: &VectorDataset, seed: u64) -> Result<AnomalyTable> {
    let labels = data.labels().ok_or(Error::MissingLabels)?;
    let mut members: BTreeMap<usize, Vec<&[f64]>> = BTreeMap::new();
    for (i, &l) in labels.iter().enumerate() {
        members.entry(l).or_default().push(data.row(i));
    }
    let entries = members
        .into_par_iter()
        .map(|(class, mut rows)| {
            rows.sort_by(|a, b| {
                a.iter()
                    .zip(b.iter())
                    .map(|(x, y)| x.total_cmp(y))
                    .find(|o| o.is_ne())
                    .unwrap_or(std::cmp::Ordering::Equal)
            });
            let entry = ClassEntry {
                mean_distance: mean_pair_distance(&rows, derive_seed(seed, class as u64)),
                size: rows.len(),
            };
            (class, entry)
        })
        .collect();
    Ok(AnomalyTable { entries })
}

impl AnomalyTable {
    /// Reference distance for `class`. Singleton classes borrow the mean of
    /// the classes that have pairs.
    pub fn reference(&self, class: usize) -> Result<f64> {
        let entry = self.entries.get(&class).ok_or(Error::MissingClass(class))?;
        Ok(entry.mean_distance.unwrap_or_else(|| {
            let known: Vec<f64> = self.entries.values().filter_map(|e| e.mean_distance).collect();
            if known.is_empty() {
                0.0
            } else {
                known.iter().sum::<f64>() / known.len() as f64
            }
        }))
    }
}

/// `d1 > d2 (1 + τ)`.
pub fn is_flagged(d1: f64, d2: f64, tau: f64) -> bool {
    d1 > d2 * (1.0 + tau)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnomalyDecision {
    pub point: usize,
    pub predicted: usize,
    pub d1: f64,
    pub d2: f64,
    pub flagged: bool,
    pub ratio: f64,
}

/// Threshold-free part of a decision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Assessment {
    pub predicted: usize,
    pub d1: f64,
    pub d2: f64,
}

impl Assessment {
    pub fn decide(&self, point: usize, tau: f64) -> AnomalyDecision {
        AnomalyDecision {
            point,
            predicted: self.predicted,
            d1: self.d1,
            d2: self.d2,
            flagged: is_flagged(self.d1, self.d2, tau),
            ratio: self.d1 / self.d2,
        }
    }
}

/// Tree, training data and table bundled for scoring.
pub struct Detector<'a> {
    pub tree: &'a HCTree,
    pub train: &'a VectorDataset,
    pub table: &'a AnomalyTable,
    pub k: usize,
    pub bucket: usize,
}

impl Detector<'_> {
    pub fn assess(&self, x: &[f64]) -> Result<Assessment> {
        let labels = self.train.labels().ok_or(Error::MissingLabels)?;
        let (neighbors, _) = knn(self.tree, self.train, x, self.k, self.bucket)?;
        let predicted = vote(&neighbors, labels).expect("at least one neighbor");
        let d1 = neighbors.iter().map(|n| n.distance).sum::<f64>() / neighbors.len() as f64;
        Ok(Assessment {
            predicted,
            d1,
            d2: self.table.reference(predicted)?,
        })
    }

    pub fn score(&self, point: usize, x: &[f64], tau: f64) -> Result<AnomalyDecision> {
        Ok(self.assess(x)?.decide(point, tau))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HoldoutSpec {
    pub held_out: Vec<usize>,
    /// Class to superclass, covering every class when present.
    pub superclass: Option<BTreeMap<usize, usize>>,
    pub thresholds: Vec<f64>,
    pub test_fraction: f64,
}

/// `0, 0.1, …, 1` followed by `∞`.
pub fn default_thresholds() -> Vec<f64> {
    (0..=10).map(|i| i as f64 / 10.0).chain([f64::INFINITY]).collect()
}

impl HoldoutSpec {
    pub fn validate(&self, classes: &BTreeSet<usize>) -> Result<()> {
        let bad = |msg: String| Err(Error::DegenerateSpec(msg));
        if self.held_out.is_empty() {
            return bad("no held-out classes".into());
        }
        if let Some(c) = self.held_out.iter().find(|c| !classes.contains(c)) {
            return bad(format!("held-out class {c} does not occur in the data"));
        }
        let held: BTreeSet<usize> = self.held_out.iter().copied().collect();
        if classes.len() - held.len() < 2 {
            return bad(format!("only {} training classes remain", classes.len() - held.len()));
        }
        if let Some(map) = &self.superclass {
            if let Some(c) = classes.iter().find(|c| !map.contains_key(c)) {
                return bad(format!("superclass map has no entry for class {c}"));
            }
        }
        if self.thresholds.is_empty() || self.thresholds.iter().any(|t| t.is_nan() || *t < 0.0) {
            return bad("thresholds must be a nonempty list of values >= 0".into());
        }
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return bad(format!("test fraction {} must lie in (0, 1)", self.test_fraction));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub tau: f64,
    pub pct_flagged: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub f1_superclass: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HoldoutReport {
    pub held_out: Vec<usize>,
    pub n_train: usize,
    pub n_test: usize,
    pub n_held_out_test: usize,
    pub rows: Vec<SweepRow>,
}

fn prf(tp: usize, predicted: usize, actual: usize) -> (f64, f64, f64) {
    let p = if predicted == 0 {
        0.0
    } else {
        tp as f64 / predicted as f64
    };
    let r = if actual == 0 { 0.0 } else { tp as f64 / actual as f64 };
    (p, r, f1(p, r))
}

/// Trains without the held-out classes, scores every test point, and sweeps
/// the threshold. Positives are test points of held-out classes. In the
/// superclass variant an unflagged held-out point whose predicted class has
/// the right superclass also counts as detected.
pub fn simulate_holdout(
    data: &VectorDataset,
    spec: &HoldoutSpec,
    config: &BuildConfig,
    k: usize,
    bucket: usize,
) -> Result<HoldoutReport> {
    let labels = data.labels().ok_or(Error::MissingLabels)?;
    spec.validate(&data.classes().into_iter().collect())?;
    let held: BTreeSet<usize> = spec.held_out.iter().copied().collect();
    let (train_idx, test_idx) = train_test_split(data.n(), spec.test_fraction, derive_seed(config.seed, STREAM_SPLIT));
    let train_idx: Vec<usize> = train_idx.into_iter().filter(|&i| !held.contains(&labels[i])).collect();
    if test_idx.is_empty() {
        return Err(Error::DegenerateSpec("test split is empty".into()));
    }
    let train = data.subset(&train_idx);
    let tree = build(BuildInput::Vectors(&train), config)?;
    let table = build_table(&train, derive_seed(config.seed, STREAM_TABLE))?;
    let detector = Detector {
        tree: &tree,
        train: &train,
        table: &table,
        k,
        bucket,
    };
    let assessed = test_idx
        .par_iter()
        .map(|&i| detector.assess(data.row(i)))
        .collect::<Result<Vec<_>>>()?;

    let positive: Vec<bool> = test_idx.iter().map(|&i| held.contains(&labels[i])).collect();
    let actual = positive.iter().filter(|&&p| p).count();
    let credited: Vec<bool> = match &spec.superclass {
        Some(map) => test_idx
            .iter()
            .zip(&assessed)
            .map(|(&i, a)| held.contains(&labels[i]) && map.get(&a.predicted) == map.get(&labels[i]))
            .collect(),
        None => vec![false; test_idx.len()],
    };

    let rows = spec
        .thresholds
        .iter()
        .map(|&tau| {
            let mut flagged = 0;
            let mut tp = 0;
            let mut credit = 0;
            for ((a, &pos), &cred) in assessed.iter().zip(&positive).zip(&credited) {
                if is_flagged(a.d1, a.d2, tau) {
                    flagged += 1;
                    tp += usize::from(pos);
                } else if cred {
                    credit += 1;
                }
            }
            let (precision, recall, f) = prf(tp, flagged, actual);
            let f1_superclass = spec
                .superclass
                .as_ref()
                .map(|_| prf(tp + credit, flagged + credit, actual).2);
            SweepRow {
                tau,
                pct_flagged: 100.0 * flagged as f64 / test_idx.len() as f64,
                precision,
                recall,
                f1: f,
                f1_superclass,
            }
        })
        .collect();
    Ok(HoldoutReport {
        held_out: held.into_iter().collect(),
        n_train: train_idx.len(),
        n_test: test_idx.len(),
        n_held_out_test: actual,
        rows,
    })
}

/// Sweep rows as CSV with a header.
pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(|e| Error::io("<sweep csv>", e))?;
    Ok(())
}
