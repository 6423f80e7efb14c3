//! Recursive tree construction, stored as a preorder node arena.

mod io;
mod query;

pub use io::{read_tree, write_tree, FORMAT_VERSION};
pub use query::{brute_force_knn, classify, exact_classify, knn, vote, Neighbor, Prediction, QueryResult};

use rayon::join;

use crate::dataset::{ExplicitGraph, VectorDataset};
use crate::error::{Error, Result};
use crate::rng::{child_seed, derive_seed};
use crate::similarity::SimilarityView;
use crate::splitrules::{split, BuildConfig, Hyperplane, Rule};

/// Subsets at least this large split their two children in parallel.
const PARALLEL_CUTOFF: usize = 512;
const STREAM_ROOT: u64 = 0x7472_6565;

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Internal {
        /// Absent for trees built on explicit graphs.
        split: Option<Hyperplane>,
        leaf_count: usize,
        left: usize,
        right: usize,
    },
    Leaf {
        ids: Vec<usize>,
    },
}

impl Node {
    pub fn leaf_count(&self) -> usize {
        match self {
            Node::Internal { leaf_count, .. } => *leaf_count,
            Node::Leaf { ids } => ids.len(),
        }
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self, Node::Leaf { .. })
    }
}

#[derive(Debug, Clone, Copy)]
pub enum BuildInput<'a> {
    Vectors(&'a VectorDataset),
    Graph(&'a ExplicitGraph),
}

impl BuildInput<'_> {
    pub fn n(&self) -> usize {
        match self {
            BuildInput::Vectors(d) => d.n(),
            BuildInput::Graph(g) => g.n(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TreeMeta {
    pub rule: Rule,
    /// Feature dimension; `None` for graph trees.
    pub dim: Option<usize>,
    pub n: usize,
    pub seed: u64,
    pub config: BuildConfig,
}

/// Immutable binary cluster tree. Node 0 is the root; nodes are in
/// preorder, so every subtree occupies a contiguous index range and its
/// point ids a contiguous span of [`HCTree::ordered_ids`].
#[derive(Debug, Clone, PartialEq)]
pub struct HCTree {
    meta: TreeMeta,
    nodes: Vec<Node>,
    ordered_ids: Vec<usize>,
    spans: Vec<(usize, usize)>,
}

enum Built {
    Leaf(Vec<usize>),
    Internal(Option<Hyperplane>, Box<Built>, Box<Built>),
}

fn build_node(input: BuildInput<'_>, mut active: Vec<usize>, config: &BuildConfig, seed: u64) -> Result<Built> {
    if active.len() <= config.leaf_max {
        active.sort_unstable();
        return Ok(Built::Leaf(active));
    }
    let node_config = BuildConfig { seed, ..*config };
    let plan = {
        let view = match input {
            BuildInput::Vectors(d) => SimilarityView::implicit(d, active)?,
            BuildInput::Graph(g) => SimilarityView::explicit(g, active)?,
        };
        split(&view, &node_config)?
    };
    let size = plan.left_ids.len() + plan.right_ids.len();
    let (ls, rs) = (child_seed(seed, 0), child_seed(seed, 1));
    let (left, right) = if size >= PARALLEL_CUTOFF {
        join(
            || build_node(input, plan.left_ids, config, ls),
            || build_node(input, plan.right_ids, config, rs),
        )
    } else {
        (
            build_node(input, plan.left_ids, config, ls),
            build_node(input, plan.right_ids, config, rs),
        )
    };
    Ok(Built::Internal(plan.hyperplane, Box::new(left?), Box::new(right?)))
}

fn flatten(built: Built, nodes: &mut Vec<Node>) -> usize {
    let at = nodes.len();
    match built {
        Built::Leaf(ids) => nodes.push(Node::Leaf { ids }),
        Built::Internal(split, l, r) => {
            nodes.push(Node::Internal {
                split,
                leaf_count: 0,
                left: 0,
                right: 0,
            });
            let left = flatten(*l, nodes);
            let right = flatten(*r, nodes);
            let count = nodes[left].leaf_count() + nodes[right].leaf_count();
            if let Node::Internal {
                leaf_count,
                left: lref,
                right: rref,
                ..
            } = &mut nodes[at]
            {
                *leaf_count = count;
                *lref = left;
                *rref = right;
            }
        }
    }
    at
}

/// Builds a tree over every point of `input`.
pub fn build(input: BuildInput<'_>, config: &BuildConfig) -> Result<HCTree> {
    config.validate()?;
    let n = input.n();
    if n == 0 {
        return Err(Error::InvalidParams("cannot build a tree over zero points".into()));
    }
    let dim = match input {
        BuildInput::Vectors(d) => Some(d.dim()),
        BuildInput::Graph(_) => {
            if config.rule != Rule::ApproxEigenvector {
                return Err(Error::IncompatibleRule {
                    rule: config.rule.name(),
                    mode: "explicit",
                });
            }
            None
        }
    };
    let root = build_node(input, (0..n).collect(), config, derive_seed(config.seed, STREAM_ROOT))?;
    let mut nodes = Vec::with_capacity(2 * n);
    flatten(root, &mut nodes);
    let meta = TreeMeta {
        rule: config.rule,
        dim,
        n,
        seed: config.seed,
        config: *config,
    };
    HCTree::from_parts(meta, nodes)
}

impl HCTree {
    /// Assembles and validates a tree from a preorder node list.
    pub fn from_parts(meta: TreeMeta, nodes: Vec<Node>) -> Result<Self> {
        let corrupt = |msg: String| Error::CorruptTree(msg);
        if nodes.is_empty() {
            return Err(corrupt("no nodes".into()));
        }
        let mut spans = vec![(0, 0); nodes.len()];
        let mut ordered_ids = Vec::with_capacity(meta.n);
        // Popping children in stack order visits nodes in preorder; any
        // other child layout shows up as an out-of-sequence index.
        let mut stack = vec![0usize];
        let mut next = 0usize;
        while let Some(i) = stack.pop() {
            if i != next {
                return Err(corrupt(format!("node {i} is not at its preorder position {next}")));
            }
            next += 1;
            match &nodes[i] {
                Node::Leaf { ids } => {
                    if ids.is_empty() {
                        return Err(corrupt(format!("leaf {i} is empty")));
                    }
                    spans[i] = (ordered_ids.len(), ordered_ids.len() + ids.len());
                    ordered_ids.extend_from_slice(ids);
                }
                Node::Internal { left, right, split, .. } => {
                    if *left >= nodes.len() || *right >= nodes.len() {
                        return Err(corrupt(format!(
                            "internal node {i} has invalid children ({left}, {right})"
                        )));
                    }
                    if let (Some(h), Some(d)) = (split, meta.dim) {
                        let ok =
                            h.direction.len() == d && h.normalization.as_ref().is_none_or(|n| n.row_sum.len() == d);
                        if !ok {
                            return Err(corrupt(format!("node {i} hyperplane dimension differs from {d}")));
                        }
                    }
                    spans[i].0 = ordered_ids.len();
                    stack.push(*right);
                    stack.push(*left);
                }
            }
        }
        if next != nodes.len() {
            return Err(corrupt(format!(
                "{} nodes unreachable from the root",
                nodes.len() - next
            )));
        }
        // Span ends and leaf counts, children before parents.
        for i in (0..nodes.len()).rev() {
            if let Node::Internal {
                left,
                right,
                leaf_count,
                ..
            } = &nodes[i]
            {
                let end = spans[*right].1;
                spans[i].1 = end;
                let count = nodes[*left].leaf_count() + nodes[*right].leaf_count();
                if count != *leaf_count || end - spans[i].0 != count {
                    return Err(corrupt(format!(
                        "leaf count of node {i} is {leaf_count}, children hold {count}"
                    )));
                }
            }
        }
        let mut seen = vec![false; meta.n];
        for &id in &ordered_ids {
            if id >= meta.n || std::mem::replace(&mut seen[id], true) {
                return Err(Error::CoverageMismatch(format!(
                    "point id {id} is out of range or repeated"
                )));
            }
        }
        if ordered_ids.len() != meta.n {
            return Err(Error::CoverageMismatch(format!(
                "leaves hold {} ids, expected {}",
                ordered_ids.len(),
                meta.n
            )));
        }
        Ok(HCTree {
            meta,
            nodes,
            ordered_ids,
            spans,
        })
    }

    pub fn meta(&self) -> &TreeMeta {
        &self.meta
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn root(&self) -> &Node {
        &self.nodes[0]
    }

    pub fn n(&self) -> usize {
        self.meta.n
    }

    /// True when every internal node carries a hyperplane.
    pub fn is_queryable(&self) -> bool {
        self.meta.dim.is_some()
            && self
                .nodes
                .iter()
                .all(|n| !matches!(n, Node::Internal { split: None, .. }))
    }

    /// Point ids under node `i`.
    pub fn ids_under(&self, i: usize) -> &[usize] {
        let (a, b) = self.spans[i];
        &self.ordered_ids[a..b]
    }

    /// All point ids in leaf (preorder) order.
    pub fn ordered_ids(&self) -> &[usize] {
        &self.ordered_ids
    }

    pub fn num_internal(&self) -> usize {
        self.nodes.iter().filter(|n| !n.is_leaf()).count()
    }

    pub fn num_leaves(&self) -> usize {
        self.nodes.len() - self.num_internal()
    }

    /// Longest root-to-leaf path, in edges.
    pub fn depth(&self) -> usize {
        let mut depth = vec![0usize; self.nodes.len()];
        let mut max = 0;
        for (i, node) in self.nodes.iter().enumerate() {
            if let Node::Internal { left, right, .. } = node {
                depth[*left] = depth[i] + 1;
                depth[*right] = depth[i] + 1;
                max = max.max(depth[i] + 1);
            }
        }
        max
    }

    /// Leaf ordinal (in preorder) of every point.
    pub fn leaf_assignment(&self) -> Vec<usize> {
        let mut out = vec![0; self.meta.n];
        let leaves = self.nodes.iter().filter_map(|n| match n {
            Node::Leaf { ids } => Some(ids),
            Node::Internal { .. } => None,
        });
        for (k, ids) in leaves.enumerate() {
            for &id in ids {
                out[id] = k;
            }
        }
        out
    }
}
