//! Bucketed descent and kNN classification on a built tree.

use std::collections::BTreeMap;

use crate::dataset::{sq_dist, VectorDataset};
use crate::error::{Error, Result};

use super::{HCTree, Node};

#[derive(Debug, Clone, PartialEq)]
pub struct QueryResult<'t> {
    /// Node where the descent stopped.
    pub node: usize,
    pub candidates: &'t [usize],
    /// Nodes touched on the way down, including the stopping node.
    pub visited: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub id: usize,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub class: usize,
    pub neighbors: Vec<Neighbor>,
    pub candidates: usize,
}

impl HCTree {
    /// Descends by `direction · x ≤ threshold` until the current node holds
    /// fewer than `bucket` points or is a leaf.
    pub fn query(&self, x: &[f64], bucket: usize) -> Result<QueryResult<'_>> {
        let dim = self.meta.dim.ok_or(Error::NotQueryable)?;
        if x.len() != dim {
            return Err(Error::Dimension {
                expected: dim,
                found: x.len(),
            });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { row: 0 });
        }
        if bucket == 0 {
            return Err(Error::InvalidParams("bucket size must be at least 1".into()));
        }
        let mut at = 0;
        let mut visited = 1;
        loop {
            match &self.nodes[at] {
                Node::Internal {
                    split: Some(h),
                    leaf_count,
                    left,
                    right,
                } if *leaf_count >= bucket => {
                    at = if h.goes_left(x) { *left } else { *right };
                    visited += 1;
                }
                Node::Internal { split: None, .. } => return Err(Error::NotQueryable),
                _ => break,
            }
        }
        Ok(QueryResult {
            node: at,
            candidates: self.ids_under(at),
            visited,
        })
    }
}

/// The `k` nearest of `candidates` to `x`, ordered by (distance, id).
pub fn nearest_among(train: &VectorDataset, candidates: &[usize], x: &[f64], k: usize) -> Vec<Neighbor> {
    let mut all: Vec<Neighbor> = candidates
        .iter()
        .map(|&id| Neighbor {
            id,
            distance: sq_dist(train.row(id), x).sqrt(),
        })
        .collect();
    all.sort_by(|a, b| a.distance.total_cmp(&b.distance).then(a.id.cmp(&b.id)));
    all.truncate(k);
    all
}

/// Majority label; ties go to the smaller summed distance, then the smaller
/// class id.
pub fn vote(neighbors: &[Neighbor], labels: &[usize]) -> Option<usize> {
    let mut tally: BTreeMap<usize, (usize, f64)> = BTreeMap::new();
    for nb in neighbors {
        let e = tally.entry(labels[nb.id]).or_insert((0, 0.0));
        e.0 += 1;
        e.1 += nb.distance;
    }
    tally
        .into_iter()
        .min_by(|(ca, (na, da)), (cb, (nb, db))| nb.cmp(na).then(da.total_cmp(db)).then(ca.cmp(cb)))
        .map(|(c, _)| c)
}

fn check_k(k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::InvalidParams("k must be at least 1".into()));
    }
    Ok(())
}

/// kNN inside the query's candidate set.
pub fn knn(tree: &HCTree, train: &VectorDataset, x: &[f64], k: usize, bucket: usize) -> Result<(Vec<Neighbor>, usize)> {
    check_k(k)?;
    if train.n() != tree.n() {
        return Err(Error::LengthMismatch {
            left: train.n(),
            right: tree.n(),
        });
    }
    let q = tree.query(x, bucket)?;
    assert!(!q.candidates.is_empty(), "query returned no candidates");
    Ok((nearest_among(train, q.candidates, x, k), q.candidates.len()))
}

/// Majority vote over the `k` nearest candidates of the query bucket.
pub fn classify(tree: &HCTree, train: &VectorDataset, x: &[f64], k: usize, bucket: usize) -> Result<Prediction> {
    let labels = train.labels().ok_or(Error::MissingLabels)?;
    let (neighbors, candidates) = knn(tree, train, x, k, bucket)?;
    let class = vote(&neighbors, labels).expect("at least one neighbor");
    Ok(Prediction {
        class,
        neighbors,
        candidates,
    })
}

/// Exact kNN over every training point.
pub fn brute_force_knn(train: &VectorDataset, x: &[f64], k: usize) -> Vec<Neighbor> {
    let all: Vec<usize> = (0..train.n()).collect();
    nearest_among(train, &all, x, k)
}

/// Exact kNN majority vote, the ceiling for bucketed classification.
pub fn exact_classify(train: &VectorDataset, x: &[f64], k: usize) -> Result<Prediction> {
    check_k(k)?;
    let labels = train.labels().ok_or(Error::MissingLabels)?;
    let neighbors = brute_force_knn(train, x, k);
    let class = vote(&neighbors, labels).ok_or(Error::InvalidParams("empty training set".into()))?;
    Ok(Prediction {
        class,
        neighbors,
        candidates: train.n(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{train_test_split, GmmParams};
    use crate::metrics::classification_report;
    use crate::splitrules::{BuildConfig, Rule};
    use crate::tree::{build, BuildInput};

    fn data(n: usize, k: usize, sep: f64, seed: u64) -> VectorDataset {
        GmmParams::new(n, k, 10, sep, seed).generate().unwrap().dataset
    }

    #[test]
    fn bucket_above_n_returns_everything() {
        let d = data(50, 2, 6.0, 1);
        let t = build(BuildInput::Vectors(&d), &BuildConfig::new(Rule::Eigenvector, 1)).unwrap();
        let q = t.query(d.row(0), 51).unwrap();
        assert_eq!(q.node, 0);
        assert_eq!(q.candidates.len(), 50);
        assert_eq!(q.visited, 1);
    }

    #[test]
    fn bucket_one_reaches_a_leaf() {
        let d = data(50, 2, 6.0, 1);
        let cfg = BuildConfig {
            leaf_max: 3,
            ..BuildConfig::new(Rule::RandomProjection, 2)
        };
        let t = build(BuildInput::Vectors(&d), &cfg).unwrap();
        let q = t.query(d.row(7), 1).unwrap();
        assert!(t.nodes()[q.node].is_leaf());
        assert!(q.candidates.contains(&7));
    }

    #[test]
    fn balanced_bucket_sizes() {
        let d = data(1000, 4, 6.0, 3);
        let t = build(BuildInput::Vectors(&d), &BuildConfig::new(Rule::TwoMeans, 3)).unwrap();
        let probe = data(200, 4, 6.0, 99);
        for x in probe.rows() {
            let size = t.query(x, 50).unwrap().candidates.len();
            assert!((17..=49).contains(&size), "bucket size {size}");
        }
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let d = data(20, 2, 6.0, 1);
        let t = build(BuildInput::Vectors(&d), &BuildConfig::new(Rule::RandomProjection, 1)).unwrap();
        assert!(matches!(t.query(&[1.0], 4), Err(Error::Dimension { .. })));
    }

    #[test]
    fn vote_tie_breaks() {
        let labels = [0, 1, 1, 0];
        let nb = |id, distance| Neighbor { id, distance };
        assert_eq!(vote(&[nb(0, 1.0), nb(1, 0.5)], &labels), Some(1));
        assert_eq!(vote(&[nb(0, 1.0), nb(1, 1.0)], &labels), Some(0));
        assert_eq!(vote(&[nb(1, 0.1), nb(2, 0.1), nb(0, 0.0)], &labels), Some(1));
    }

    #[test]
    fn training_point_is_its_own_neighbor() {
        let d = data(200, 4, 6.0, 4);
        let t = build(BuildInput::Vectors(&d), &BuildConfig::new(Rule::ApproxEigenvector, 4)).unwrap();
        for i in [0, 17, 133] {
            let p = classify(&t, &d, d.row(i), 1, 8).unwrap();
            assert_eq!(p.class, d.label(i).unwrap());
        }
    }

    #[test]
    fn full_bucket_is_exact_knn() {
        let d = data(300, 4, 4.0, 5);
        let t = build(BuildInput::Vectors(&d), &BuildConfig::new(Rule::Eigenvector, 5)).unwrap();
        let probe = data(100, 4, 4.0, 6);
        for x in probe.rows() {
            assert_eq!(
                classify(&t, &d, x, 5, 10_000).unwrap(),
                exact_classify(&d, x, 5).unwrap()
            );
        }
    }

    #[test]
    fn gmm_macro_f1_near_ceiling() {
        let d = GmmParams::new(2000, 4, 10, 12.0, 8).generate().unwrap().dataset;
        let (train, test) = train_test_split(d.n(), 0.2, 8);
        let tr = d.subset(&train);
        let t = build(BuildInput::Vectors(&tr), &BuildConfig::new(Rule::ApproxEigenvector, 8)).unwrap();
        let truth: Vec<usize> = test.iter().map(|&i| d.label(i).unwrap()).collect();
        let tree_pred: Vec<usize> = test
            .iter()
            .map(|&i| classify(&t, &tr, d.row(i), 5, 64).unwrap().class)
            .collect();
        let exact_pred: Vec<usize> = test
            .iter()
            .map(|&i| exact_classify(&tr, d.row(i), 5).unwrap().class)
            .collect();
        let f_tree = classification_report(&tree_pred, &truth).unwrap().macro_f1;
        let f_exact = classification_report(&exact_pred, &truth).unwrap().macro_f1;
        assert!(
            f_tree >= 0.95 && f_tree >= f_exact - 0.02,
            "tree {f_tree} exact {f_exact}"
        );
    }
}
