//! Tree files: a JSON object with a header and one preorder node per line.
//! Floats are written with 17 significant digits so they parse back to the
//! same bits.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Deserialize;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::similarity::DegreeNormalization;
use crate::splitrules::{BuildConfig, Hyperplane, Rule};

use super::{HCTree, Node, TreeMeta};

pub const FORMAT_VERSION: u64 = 1;

fn float(out: &mut String, x: f64) {
    write!(out, "{x:.16e}").unwrap();
}

fn floats(out: &mut String, xs: &[f64]) {
    out.push('[');
    for (i, &x) in xs.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        float(out, x);
    }
    out.push(']');
}

#[derive(Deserialize)]
struct Header {
    rule: Rule,
    dim: Option<usize>,
    n: usize,
    seed: u64,
    config: BuildConfig,
    nodes: Vec<NodeRecord>,
}

#[derive(Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
enum NodeRecord {
    Internal {
        leaf_count: usize,
        left: usize,
        right: usize,
        direction: Option<Vec<f64>>,
        threshold: Option<f64>,
        row_sum: Option<Vec<f64>>,
        floor: Option<f64>,
    },
    Leaf {
        ids: Vec<usize>,
    },
}

impl NodeRecord {
    fn into_node(self, index: usize) -> Result<Node> {
        Ok(match self {
            NodeRecord::Leaf { ids } => Node::Leaf { ids },
            NodeRecord::Internal {
                leaf_count,
                left,
                right,
                direction,
                threshold,
                row_sum,
                floor,
            } => {
                let split = match (direction, threshold) {
                    (Some(direction), Some(threshold)) => {
                        let normalization = match (row_sum, floor) {
                            (Some(row_sum), Some(floor)) => Some(DegreeNormalization { row_sum, floor }),
                            (None, None) => None,
                            _ => {
                                return Err(Error::CorruptTree(format!(
                                    "node {index}: row_sum and floor must appear together"
                                )))
                            }
                        };
                        Some(Hyperplane {
                            direction,
                            threshold,
                            normalization,
                        })
                    }
                    (None, None) => None,
                    _ => {
                        return Err(Error::CorruptTree(format!(
                            "node {index}: direction and threshold must appear together"
                        )))
                    }
                };
                Node::Internal {
                    split,
                    leaf_count,
                    left,
                    right,
                }
            }
        })
    }
}

impl HCTree {
    pub fn to_text(&self) -> String {
        let m = &self.meta;
        let mut out = String::new();
        write!(
            out,
            "{{\"format_version\":{FORMAT_VERSION},\"rule\":\"{}\",\"dim\":{},\"n\":{},\"seed\":{},\"config\":{},\n\"nodes\":[\n",
            m.rule.name(),
            m.dim.map_or("null".to_string(), |d| d.to_string()),
            m.n,
            m.seed,
            serde_json::to_string(&m.config).expect("config serializes"),
        )
        .unwrap();
        for (i, node) in self.nodes.iter().enumerate() {
            match node {
                Node::Leaf { ids } => {
                    out.push_str("{\"type\":\"leaf\",\"ids\":");
                    out.push_str(&serde_json::to_string(ids).unwrap());
                }
                Node::Internal {
                    split,
                    leaf_count,
                    left,
                    right,
                } => {
                    write!(
                        out,
                        "{{\"type\":\"internal\",\"leaf_count\":{leaf_count},\"left\":{left},\"right\":{right}"
                    )
                    .unwrap();
                    if let Some(h) = split {
                        out.push_str(",\"threshold\":");
                        float(&mut out, h.threshold);
                        out.push_str(",\"direction\":");
                        floats(&mut out, &h.direction);
                        if let Some(norm) = &h.normalization {
                            out.push_str(",\"floor\":");
                            float(&mut out, norm.floor);
                            out.push_str(",\"row_sum\":");
                            floats(&mut out, &norm.row_sum);
                        }
                    }
                }
            }
            out.push('}');
            if i + 1 < self.nodes.len() {
                out.push(',');
            }
            out.push('\n');
        }
        out.push_str("]}\n");
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let value: Value = serde_json::from_str(text).map_err(|e| Error::CorruptTree(e.to_string()))?;
        let version = value
            .get("format_version")
            .and_then(Value::as_u64)
            .ok_or_else(|| Error::CorruptTree("missing format_version".into()))?;
        if version != FORMAT_VERSION {
            return Err(Error::VersionMismatch {
                found: version,
                expected: FORMAT_VERSION,
            });
        }
        let header: Header = serde_json::from_value(value).map_err(|e| Error::CorruptTree(e.to_string()))?;
        if header.config.rule != header.rule || header.config.seed != header.seed {
            return Err(Error::CorruptTree("header rule/seed disagree with config".into()));
        }
        let nodes = header
            .nodes
            .into_iter()
            .enumerate()
            .map(|(i, r)| r.into_node(i))
            .collect::<Result<Vec<_>>>()?;
        let meta = TreeMeta {
            rule: header.rule,
            dim: header.dim,
            n: header.n,
            seed: header.seed,
            config: header.config,
        };
        HCTree::from_parts(meta, nodes)
    }
}

pub fn write_tree(tree: &HCTree, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, tree.to_text()).map_err(|e| Error::io(path, e))
}

pub fn read_tree(path: impl AsRef<Path>) -> Result<HCTree> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    HCTree::from_text(&text)
}
