//! Loading vector (CSV) and graph (`.edges`) inputs.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;
use serde::Serialize;

use hcpart::dataset::{load_csv, load_edge_list, read_labels};
use hcpart::{BuildInput, ExplicitGraph, VectorDataset};

use crate::manifest::RunManifest;

#[derive(Args, Debug, Clone, Serialize)]
pub struct InputArgs {
    /// CSV of vectors, or an `i j w` edge list when the name ends in `.edges`.
    #[arg(long)]
    pub input: PathBuf,
    /// One integer class label per line, aligned with the input rows or nodes.
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// Column of the CSV holding integer labels (0-based).
    #[arg(long, conflicts_with = "labels")]
    pub label_column: Option<usize>,
}

pub enum Data {
    Vectors(VectorDataset),
    Graph(ExplicitGraph),
}

pub struct Loaded {
    pub data: Data,
    pub labels: Option<Vec<usize>>,
}

pub fn is_graph_path(path: &Path) -> bool {
    path.extension().is_some_and(|e| e == "edges")
}

impl InputArgs {
    pub fn load(&self, manifest: &mut RunManifest) -> Result<Loaded> {
        manifest.input(&self.input)?;
        let file_labels = match &self.labels {
            Some(p) => {
                manifest.input(p)?;
                Some(read_labels(p).with_context(|| format!("reading labels {}", p.display()))?)
            }
            None => None,
        };
        if is_graph_path(&self.input) {
            if self.label_column.is_some() {
                bail!("--label-column applies to CSV input only");
            }
            let g = load_edge_list(&self.input).with_context(|| format!("loading graph {}", self.input.display()))?;
            if let Some(l) = &file_labels {
                if l.len() != g.n() {
                    bail!("{} labels for {} graph nodes", l.len(), g.n());
                }
            }
            return Ok(Loaded {
                data: Data::Graph(g),
                labels: file_labels,
            });
        }
        let mut ds = load_csv(&self.input, self.label_column, true)
            .with_context(|| format!("loading vectors {}", self.input.display()))?;
        if let Some(l) = file_labels {
            ds = ds.with_labels(l).context("attaching labels")?;
        }
        let labels = ds.labels().map(<[usize]>::to_vec);
        Ok(Loaded {
            data: Data::Vectors(ds),
            labels,
        })
    }
}

impl Loaded {
    pub fn n(&self) -> usize {
        match &self.data {
            Data::Vectors(d) => d.n(),
            Data::Graph(g) => g.n(),
        }
    }

    pub fn build_input(&self) -> BuildInput<'_> {
        match &self.data {
            Data::Vectors(d) => BuildInput::Vectors(d),
            Data::Graph(g) => BuildInput::Graph(g),
        }
    }

    pub fn vectors(&self) -> Result<&VectorDataset> {
        match &self.data {
            Data::Vectors(d) => Ok(d),
            Data::Graph(_) => bail!("this command needs vector input, not a graph"),
        }
    }

    pub fn labels(&self) -> Result<&[usize]> {
        self.labels
            .as_deref()
            .context("labels are required: pass --labels or --label-column")
    }
}
