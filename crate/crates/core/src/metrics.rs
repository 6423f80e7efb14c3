//! Hierarchy cost, purity and classification scores.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::dataset::dot;
use crate::error::{Error, Result};
use crate::similarity::SimilarityView;
use crate::tree::{HCTree, Node};

/// Largest tree the pairwise cost evaluation accepts.
pub const BRUTE_FORCE_LIMIT: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CostMode {
    Implicit,
    Explicit,
}

/// Contribution of one node: `leaf_count × child_cut`. For a leaf holding
/// several points, `child_cut` is the similarity among its own points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NodeCost {
    pub node: usize,
    pub leaf_count: usize,
    pub child_cut: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CostReport {
    pub total_cost: f64,
    pub per_node: Vec<NodeCost>,
    pub mode: CostMode,
    pub clamped_pair_warning_count: usize,
}

fn check_coverage(tree: &HCTree, view: &SimilarityView<'_>) -> Result<()> {
    let n = tree.n();
    let mut seen = vec![false; n];
    for &i in view.active() {
        if i >= n || std::mem::replace(&mut seen[i], true) {
            return Err(Error::CoverageMismatch(format!("view point {i} is not a tree point")));
        }
    }
    if view.len() != n {
        return Err(Error::CoverageMismatch(format!(
            "view has {} points, tree has {n}",
            view.len()
        )));
    }
    Ok(())
}

fn add_into(acc: &mut [f64], x: &[f64]) {
    acc.iter_mut().zip(x).for_each(|(a, b)| *a += b);
}

/// Sum over internal nodes of `leaf_count × cut(left, right)`, plus the
/// within-bucket pairs of multi-point leaves. Each unordered pair of
/// distinct points is counted once.
pub fn cost(tree: &HCTree, view: &SimilarityView<'_>) -> Result<CostReport> {
    check_coverage(tree, view)?;
    let nodes = tree.nodes();
    let mut clamps = 0;
    let mut clamp = |v: f64| {
        if v < 0.0 {
            clamps += 1;
            0.0
        } else {
            v
        }
    };
    let mut per_node = Vec::new();
    let mode = if let Some(data) = view.dataset() {
        let d = data.dim();
        let mut sums: Vec<Option<Vec<f64>>> = vec![None; nodes.len()];
        for i in (0..nodes.len()).rev() {
            let sum = match &nodes[i] {
                Node::Leaf { ids } => {
                    let mut s = vec![0.0; d];
                    let mut self_sq = 0.0;
                    for &id in ids {
                        add_into(&mut s, data.row(id));
                        self_sq += dot(data.row(id), data.row(id));
                    }
                    if ids.len() >= 2 {
                        let within = clamp(0.5 * (dot(&s, &s) - self_sq));
                        per_node.push(NodeCost {
                            node: i,
                            leaf_count: ids.len(),
                            child_cut: within,
                        });
                    }
                    s
                }
                Node::Internal {
                    left,
                    right,
                    leaf_count,
                    ..
                } => {
                    let l = sums[*left].take().expect("child visited first");
                    let mut r = sums[*right].take().expect("child visited first");
                    per_node.push(NodeCost {
                        node: i,
                        leaf_count: *leaf_count,
                        child_cut: clamp(dot(&l, &r)),
                    });
                    add_into(&mut r, &l);
                    r
                }
            };
            sums[i] = Some(sum);
        }
        CostMode::Implicit
    } else {
        let g = view.graph().expect("explicit view");
        for (i, node) in nodes.iter().enumerate() {
            match node {
                Node::Internal {
                    left,
                    right,
                    leaf_count,
                    ..
                } => {
                    let mut cut = 0.0;
                    for &a in tree.ids_under(*left) {
                        let row = g.row(a);
                        cut += tree.ids_under(*right).iter().map(|&b| row[b]).sum::<f64>();
                    }
                    per_node.push(NodeCost {
                        node: i,
                        leaf_count: *leaf_count,
                        child_cut: clamp(cut),
                    });
                }
                Node::Leaf { ids } if ids.len() >= 2 => {
                    let mut within = 0.0;
                    for (x, &a) in ids.iter().enumerate() {
                        within += ids[x + 1..].iter().map(|&b| g.weight(a, b)).sum::<f64>();
                    }
                    per_node.push(NodeCost {
                        node: i,
                        leaf_count: ids.len(),
                        child_cut: clamp(within),
                    });
                }
                Node::Leaf { .. } => {}
            }
        }
        CostMode::Explicit
    };
    per_node.sort_by_key(|c| c.node);
    let total_cost = per_node.iter().map(|c| c.leaf_count as f64 * c.child_cut).sum();
    if clamps > 0 {
        log::warn!("{clamps} negative node cuts clamped to 0 in cost evaluation");
    }
    Ok(CostReport {
        total_cost,
        per_node,
        mode,
        clamped_pair_warning_count: clamps,
    })
}

/// Evaluates the cost pair by pair: for every unordered pair of distinct
/// points, similarity times the size of their lowest common ancestor.
pub fn brute_force_cost(tree: &HCTree, similarity: impl Fn(usize, usize) -> f64) -> Result<f64> {
    let n = tree.n();
    if n > BRUTE_FORCE_LIMIT {
        return Err(Error::GuardExceeded {
            n,
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    let nodes = tree.nodes();
    let mut parent = vec![usize::MAX; nodes.len()];
    let mut depth = vec![0usize; nodes.len()];
    let mut leaf_of = vec![0usize; n];
    for (i, node) in nodes.iter().enumerate() {
        match node {
            Node::Internal { left, right, .. } => {
                for &c in [left, right] {
                    parent[c] = i;
                    depth[c] = depth[i] + 1;
                }
            }
            Node::Leaf { ids } => ids.iter().for_each(|&id| leaf_of[id] = i),
        }
    }
    let lca = |mut a: usize, mut b: usize| {
        while depth[a] > depth[b] {
            a = parent[a];
        }
        while depth[b] > depth[a] {
            b = parent[b];
        }
        while a != b {
            a = parent[a];
            b = parent[b];
        }
        a
    };
    let mut total = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            let w = similarity(i, j);
            if w != 0.0 {
                total += w * nodes[lca(leaf_of[i], leaf_of[j])].leaf_count() as f64;
            }
        }
    }
    Ok(total)
}

/// Pairwise similarity of a view, indexed by global point id.
pub fn pair_similarity<'v>(view: &'v SimilarityView<'_>) -> impl Fn(usize, usize) -> f64 + 'v {
    move |i, j| match (view.dataset(), view.graph()) {
        (Some(d), _) => dot(d.row(i), d.row(j)),
        (_, Some(g)) => g.weight(i, j),
        _ => unreachable!("view has a source"),
    }
}

/// Mean over clusters of the plurality label's share.
pub fn purity(assignment: &[usize], labels: &[usize]) -> Result<f64> {
    if assignment.len() != labels.len() {
        return Err(Error::LengthMismatch {
            left: assignment.len(),
            right: labels.len(),
        });
    }
    let mut clusters: BTreeMap<usize, BTreeMap<usize, usize>> = BTreeMap::new();
    for (&c, &l) in assignment.iter().zip(labels) {
        *clusters.entry(c).or_default().entry(l).or_default() += 1;
    }
    if clusters.is_empty() {
        return Err(Error::InvalidParams("purity of an empty clustering".into()));
    }
    let sum: f64 = clusters
        .values()
        .map(|counts| {
            let size: usize = counts.values().sum();
            *counts.values().max().unwrap() as f64 / size as f64
        })
        .sum();
    Ok(sum / clusters.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassScore {
    pub class: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassReport {
    pub per_class: Vec<ClassScore>,
    pub macro_p: f64,
    pub macro_r: f64,
    pub macro_f1: f64,
    /// Row and column labels of `confusion`: every class seen in either
    /// input, ascending.
    pub labels: Vec<usize>,
    /// `confusion[t][p]` counts truth `labels[t]` predicted as `labels[p]`.
    pub confusion: Vec<Vec<usize>>,
}

pub fn f1(precision: f64, recall: f64) -> f64 {
    if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// One-vs-rest scores; macro averages run over the classes present in
/// `truth`.
pub fn classification_report(predicted: &[usize], truth: &[usize]) -> Result<ClassReport> {
    if predicted.len() != truth.len() {
        return Err(Error::LengthMismatch {
            left: predicted.len(),
            right: truth.len(),
        });
    }
    let truth_classes: BTreeSet<usize> = truth.iter().copied().collect();
    if truth_classes.is_empty() {
        return Err(Error::InvalidParams("no ground-truth classes".into()));
    }
    let labels: Vec<usize> = truth_classes
        .iter()
        .chain(predicted)
        .copied()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let index: BTreeMap<usize, usize> = labels.iter().enumerate().map(|(i, &c)| (c, i)).collect();
    let mut confusion = vec![vec![0usize; labels.len()]; labels.len()];
    for (p, t) in predicted.iter().zip(truth) {
        confusion[index[t]][index[p]] += 1;
    }
    let per_class: Vec<ClassScore> = truth_classes
        .iter()
        .map(|&c| {
            let k = index[&c];
            let tp = confusion[k][k];
            let support: usize = confusion[k].iter().sum();
            let predicted_c: usize = confusion.iter().map(|row| row[k]).sum();
            let precision = ratio(tp, predicted_c);
            let recall = ratio(tp, support);
            ClassScore {
                class: c,
                precision,
                recall,
                f1: f1(precision, recall),
                support,
            }
        })
        .collect();
    let mean = |f: fn(&ClassScore) -> f64| per_class.iter().map(f).sum::<f64>() / per_class.len() as f64;
    Ok(ClassReport {
        macro_p: mean(|s| s.precision),
        macro_r: mean(|s| s.recall),
        macro_f1: mean(|s| s.f1),
        per_class,
        labels,
        confusion,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{gen_clique, ExplicitGraph, VectorDataset};
    use crate::splitrules::{BuildConfig, Rule};
    use crate::tree::{build, BuildInput, TreeMeta};
    use proptest::prelude::*;

    fn meta(n: usize) -> TreeMeta {
        let config = BuildConfig::new(Rule::ApproxEigenvector, 0);
        TreeMeta {
            rule: config.rule,
            dim: None,
            n,
            seed: 0,
            config,
        }
    }

    fn leaf(id: usize) -> Node {
        Node::Leaf { ids: vec![id] }
    }

    fn internal(leaf_count: usize, left: usize, right: usize) -> Node {
        Node::Internal {
            split: None,
            leaf_count,
            left,
            right,
        }
    }

    /// ((a, b), c) in preorder.
    fn three_leaf_tree(a: usize, b: usize, c: usize) -> HCTree {
        HCTree::from_parts(
            meta(3),
            vec![internal(3, 1, 4), internal(2, 2, 3), leaf(a), leaf(b), leaf(c)],
        )
        .unwrap()
    }

    #[test]
    fn clique_of_four_costs_twenty() {
        let g = gen_clique(4).unwrap();
        let t = build(BuildInput::Graph(&g), &BuildConfig::new(Rule::ApproxEigenvector, 1)).unwrap();
        let v = SimilarityView::explicit_all(&g);
        assert_eq!(cost(&t, &v).unwrap().total_cost, 20.0);
    }

    #[test]
    fn three_point_trees() {
        let c = |i: usize, j: usize| if i.min(j) == 0 && i.max(j) == 1 { 1.0 } else { 0.0 };
        assert_eq!(brute_force_cost(&three_leaf_tree(0, 1, 2), c).unwrap(), 2.0);
        assert_eq!(brute_force_cost(&three_leaf_tree(0, 2, 1), c).unwrap(), 3.0);
        // The graph oracle rejects isolated nodes, so give point 2 a
        // negligible tie to both others.
        let g = ExplicitGraph::from_edges(3, &[(0, 1, 1.0), (0, 2, 1e-9), (1, 2, 1e-9)]).unwrap();
        let v = SimilarityView::explicit_all(&g);
        assert!((cost(&three_leaf_tree(0, 1, 2), &v).unwrap().total_cost - 2.0).abs() < 1e-8);
        assert!((cost(&three_leaf_tree(0, 2, 1), &v).unwrap().total_cost - 3.0).abs() < 1e-8);
    }

    #[test]
    fn single_leaf_costs_nothing() {
        let d = VectorDataset::from_rows(&[vec![1.0]], None, true).unwrap();
        let t = build(BuildInput::Vectors(&d), &BuildConfig::new(Rule::RandomProjection, 0)).unwrap();
        let v = SimilarityView::implicit_all(&d);
        assert_eq!(cost(&t, &v).unwrap().total_cost, 0.0);
    }

    #[test]
    fn brute_force_examples() {
        let g = gen_clique(5).unwrap();
        let t = build(BuildInput::Graph(&g), &BuildConfig::new(Rule::ApproxEigenvector, 1)).unwrap();
        let v = SimilarityView::explicit_all(&g);
        assert_eq!(brute_force_cost(&t, pair_similarity(&v)).unwrap(), 40.0);
        assert_eq!(brute_force_cost(&t, |_, _| 0.0).unwrap(), 0.0);
    }

    #[test]
    fn brute_force_guard() {
        let d = VectorDataset::from_rows(&vec![vec![1.0]; 2001], None, true).unwrap();
        let cfg = BuildConfig {
            leaf_max: 5000,
            ..BuildConfig::new(Rule::RandomProjection, 0)
        };
        let t = build(BuildInput::Vectors(&d), &cfg).unwrap();
        assert!(matches!(
            brute_force_cost(&t, |_, _| 1.0),
            Err(Error::GuardExceeded { .. })
        ));
    }

    #[test]
    fn leaf_buckets_count_inner_pairs() {
        let d = VectorDataset::from_rows(&vec![vec![1.0, 0.0]; 6], None, true).unwrap();
        let cfg = BuildConfig {
            leaf_max: 2,
            ..BuildConfig::new(Rule::TwoMeans, 0)
        };
        let t = build(BuildInput::Vectors(&d), &cfg).unwrap();
        let v = SimilarityView::implicit_all(&d);
        let r = cost(&t, &v).unwrap();
        assert!((r.total_cost - (216.0 - 6.0) / 3.0).abs() < 1e-9);
        let sum: f64 = r.per_node.iter().map(|c| c.leaf_count as f64 * c.child_cut).sum();
        assert_eq!(sum, r.total_cost);
    }

    #[test]
    fn purity_examples() {
        assert!((purity(&[0, 0, 0, 1, 1], &[0, 0, 1, 1, 1]).unwrap() - 5.0 / 6.0).abs() < 1e-12);
        assert_eq!(purity(&[0, 1, 2], &[4, 4, 5]).unwrap(), 1.0);
        assert!((purity(&[0; 6], &[0, 1, 2, 0, 1, 2]).unwrap() - 1.0 / 3.0).abs() < 1e-12);
        assert!(purity(&[], &[]).is_err());
    }

    #[test]
    fn report_examples() {
        let r = classification_report(&[0, 1, 1, 0], &[0, 1, 1, 0]).unwrap();
        assert_eq!((r.macro_p, r.macro_r, r.macro_f1), (1.0, 1.0, 1.0));
        let r = classification_report(&[0, 0, 0, 0], &[0, 0, 1, 1]).unwrap();
        assert_eq!(r.macro_r, 0.5);
        assert_eq!(r.per_class[1].f1, 0.0);
        assert_eq!(r.confusion, vec![vec![2, 0], vec![2, 0]]);
        assert!(classification_report(&[0], &[0, 1]).is_err());
    }

    #[test]
    fn report_ignores_predicted_only_classes_in_macro() {
        let r = classification_report(&[2, 0], &[0, 0]).unwrap();
        assert_eq!(r.per_class.len(), 1);
        assert_eq!(r.labels, vec![0, 2]);
        assert_eq!(r.macro_r, 0.5);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn fast_cost_matches_pairwise(n in 2usize..13, seed in any::<u64>(), weights in prop::collection::vec(0.0f64..1.0, 144), leaf_max in 1usize..3) {
            let mut w = vec![0.0; n * n];
            for i in 0..n {
                for j in i + 1..n {
                    let x = weights[i * 12 + j].max(1e-3);
                    w[i * n + j] = x;
                    w[j * n + i] = x;
                }
            }
            let g = ExplicitGraph::from_dense(n, w).unwrap();
            let cfg = BuildConfig { leaf_max, ..BuildConfig::new(Rule::ApproxEigenvector, seed) };
            let t = build(BuildInput::Graph(&g), &cfg).unwrap();
            let v = SimilarityView::explicit_all(&g);
            let fast = cost(&t, &v).unwrap().total_cost;
            let slow = brute_force_cost(&t, pair_similarity(&v)).unwrap();
            prop_assert!((fast - slow).abs() <= 1e-9 * slow.max(1.0));
        }
    }
}
