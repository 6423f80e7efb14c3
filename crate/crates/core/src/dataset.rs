//! Vector datasets, explicit similarity graphs, and the synthetic generators
//! used by the experiments.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::rng::{derive_seed, rng_from};

/// Tolerance on the Euclidean norm of rows flagged as unit-normalized.
pub const UNIT_NORM_TOL: f64 = 1e-9;

/// Row-major `n × d` matrix of feature vectors with optional class labels.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorDataset {
    dim: usize,
    points: Vec<f64>,
    labels: Option<Vec<usize>>,
    ids: Vec<usize>,
    unit_normalized: bool,
}

impl VectorDataset {
    /// Builds a dataset from a flat row-major buffer. With `normalize` every
    /// row is scaled to unit length; zero rows are rejected.
    pub fn new(dim: usize, mut points: Vec<f64>, labels: Option<Vec<usize>>, normalize: bool) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParams("dimension must be at least 1".into()));
        }
        if !points.len().is_multiple_of(dim) {
            return Err(Error::LengthMismatch {
                left: points.len(),
                right: dim,
            });
        }
        let n = points.len() / dim;
        if let Some(l) = &labels {
            if l.len() != n {
                return Err(Error::LengthMismatch {
                    left: l.len(),
                    right: n,
                });
            }
        }
        for (row, chunk) in points.chunks_mut(dim).enumerate() {
            if chunk.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite { row });
            }
            if normalize {
                let norm = dot(chunk, chunk).sqrt();
                if norm == 0.0 {
                    return Err(Error::ZeroNorm { row });
                }
                chunk.iter_mut().for_each(|v| *v /= norm);
            }
        }
        let mut ds = VectorDataset {
            dim,
            points,
            labels,
            ids: (0..n).collect(),
            unit_normalized: false,
        };
        ds.unit_normalized = normalize || ds.rows_are_unit();
        Ok(ds)
    }

    pub fn from_rows(rows: &[Vec<f64>], labels: Option<Vec<usize>>, normalize: bool) -> Result<Self> {
        let dim = rows.first().map(Vec::len).unwrap_or(0);
        let mut flat = Vec::with_capacity(rows.len() * dim);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != dim {
                return Err(Error::Ragged {
                    line: i + 1,
                    expected: dim,
                    found: r.len(),
                });
            }
            flat.extend_from_slice(r);
        }
        Self::new(dim, flat, labels, normalize)
    }

    fn rows_are_unit(&self) -> bool {
        self.n() > 0
            && (0..self.n()).all(|i| {
                let r = self.row(i);
                (dot(r, r).sqrt() - 1.0).abs() <= UNIT_NORM_TOL
            })
    }

    pub fn n(&self) -> usize {
        self.ids.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.points.chunks(self.dim)
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn labels(&self) -> Option<&[usize]> {
        self.labels.as_deref()
    }

    pub fn label(&self, i: usize) -> Option<usize> {
        self.labels.as_ref().map(|l| l[i])
    }

    pub fn ids(&self) -> &[usize] {
        &self.ids
    }

    pub fn is_unit_normalized(&self) -> bool {
        self.unit_normalized
    }

    pub fn with_labels(mut self, labels: Vec<usize>) -> Result<Self> {
        if labels.len() != self.n() {
            return Err(Error::LengthMismatch {
                left: labels.len(),
                right: self.n(),
            });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    /// Rows `indices` (in that order). Point ids of the source are kept.
    pub fn subset(&self, indices: &[usize]) -> VectorDataset {
        let mut points = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            points.extend_from_slice(self.row(i));
        }
        VectorDataset {
            dim: self.dim,
            points,
            labels: self.labels.as_ref().map(|l| indices.iter().map(|&i| l[i]).collect()),
            ids: indices.iter().map(|&i| self.ids[i]).collect(),
            unit_normalized: self.unit_normalized,
        }
    }

    /// Distinct class ids in ascending order.
    pub fn classes(&self) -> Vec<usize> {
        let mut c: Vec<usize> = self.labels.clone().unwrap_or_default();
        c.sort_unstable();
        c.dedup();
        c
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Reads a comma-separated file. Lines starting with `#` are comments; the
/// optional `label_column` holds non-negative integer class ids.
pub fn load_csv(path: impl AsRef<Path>, label_column: Option<usize>, normalize: bool) -> Result<VectorDataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_csv(file, label_column, normalize)
}

pub fn parse_csv<R: std::io::Read>(reader: R, label_column: Option<usize>, normalize: bool) -> Result<VectorDataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut width: Option<usize> = None;
    let mut points = Vec::new();
    let mut labels = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map(|p| p.line() as usize).unwrap_or(0);
        if rec.len() == 1 && rec[0].is_empty() {
            continue;
        }
        match width {
            None => width = Some(rec.len()),
            Some(w) if w != rec.len() => {
                return Err(Error::Ragged {
                    line,
                    expected: w,
                    found: rec.len(),
                })
            }
            _ => {}
        }
        for (column, field) in rec.iter().enumerate() {
            if Some(column) == label_column {
                let label = field.parse::<usize>().map_err(|e| Error::Parse {
                    line,
                    column,
                    message: format!("label {field:?}: {e}"),
                })?;
                labels.push(label);
            } else {
                let v = field.parse::<f64>().map_err(|e| Error::Parse {
                    line,
                    column,
                    message: format!("{field:?}: {e}"),
                })?;
                if !v.is_finite() {
                    return Err(Error::Parse {
                        line,
                        column,
                        message: format!("non-finite value {field:?}"),
                    });
                }
                points.push(v);
            }
        }
    }
    let width = width.ok_or_else(|| Error::InvalidParams("csv contains no rows".into()))?;
    if let Some(c) = label_column {
        if c >= width {
            return Err(Error::InvalidParams(format!(
                "label column {c} out of range for {width} columns"
            )));
        }
    }
    let dim = width - usize::from(label_column.is_some());
    let labels = label_column.map(|_| labels);
    VectorDataset::new(dim, points, labels, normalize)
}

/// Writes the dataset as CSV; labels, when present, become the last column.
/// Values use the shortest representation that parses back to the same bits.
pub fn write_csv(ds: &VectorDataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    write_csv_to(ds, &mut w).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_csv_to<W: Write>(ds: &VectorDataset, w: &mut W) -> std::io::Result<()> {
    for i in 0..ds.n() {
        let mut line = ds.row(i).iter().map(|v| format!("{v:?}")).collect::<Vec<_>>().join(",");
        if let Some(l) = ds.label(i) {
            line.push(',');
            line.push_str(&l.to_string());
        }
        writeln!(w, "{line}")?;
    }
    Ok(())
}

/// One integer label per line.
pub fn read_labels(path: impl AsRef<Path>) -> Result<Vec<usize>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        out.push(t.parse::<usize>().map_err(|e| Error::Parse {
            line: i + 1,
            column: 0,
            message: format!("label {t:?}: {e}"),
        })?);
    }
    Ok(out)
}

pub fn write_labels(labels: &[usize], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut body = String::with_capacity(labels.len() * 3);
    for l in labels {
        body.push_str(&l.to_string());
        body.push('\n');
    }
    std::fs::write(path, body).map_err(|e| Error::io(path, e))
}

/// Dense symmetric similarity graph with weights in `[0, 1]` and no self loops.
#[derive(Debug, Clone, PartialEq)]
pub struct ExplicitGraph {
    n: usize,
    weights: Vec<f64>,
    degree: Vec<f64>,
}

impl ExplicitGraph {
    /// Validates symmetry, range, zero diagonal and positive degrees.
    pub fn from_dense(n: usize, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != n * n {
            return Err(Error::LengthMismatch {
                left: weights.len(),
                right: n * n,
            });
        }
        if n == 0 {
            return Err(Error::InvalidParams("graph needs at least one node".into()));
        }
        for i in 0..n {
            for j in 0..n {
                let w = weights[i * n + j];
                if !(0.0..=1.0).contains(&w) {
                    return Err(Error::InvalidWeight {
                        i,
                        j,
                        weight: w,
                        reason: "outside [0, 1]",
                    });
                }
                if i == j && w != 0.0 {
                    return Err(Error::InvalidWeight {
                        i,
                        j,
                        weight: w,
                        reason: "self loops are not allowed",
                    });
                }
                if w != weights[j * n + i] {
                    return Err(Error::InvalidWeight {
                        i,
                        j,
                        weight: w,
                        reason: "matrix is not symmetric",
                    });
                }
            }
        }
        let degree: Vec<f64> = weights.chunks(n).map(|r| r.iter().sum()).collect();
        if let Some(node) = degree.iter().position(|&d| d <= 0.0) {
            return Err(Error::IsolatedNode { node });
        }
        Ok(ExplicitGraph { n, weights, degree })
    }

    /// Undirected edges `(i, j, w)`, each listed once.
    pub fn from_edges(n: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        let mut w = vec![0.0; n * n];
        for &(i, j, x) in edges {
            if i >= n || j >= n {
                return Err(Error::InvalidParams(format!(
                    "edge ({i}, {j}) out of range for n = {n}"
                )));
            }
            w[i * n + j] = x;
            w[j * n + i] = x;
        }
        Self::from_dense(n, w)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.weights[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.weights[i * self.n..(i + 1) * self.n]
    }

    pub fn degrees(&self) -> &[f64] {
        &self.degree
    }

    /// Edges with positive weight, `i < j`, in row-major order.
    pub fn edges(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for i in 0..self.n {
            for j in i + 1..self.n {
                let w = self.weight(i, j);
                if w > 0.0 {
                    out.push((i, j, w));
                }
            }
        }
        out
    }
}

/// Reads an `i j w` edge list (0-indexed, each undirected edge once).
/// The node count is one more than the largest index.
pub fn load_edge_list(path: impl AsRef<Path>) -> Result<ExplicitGraph> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut edges = Vec::new();
    let mut n = 0;
    for (lineno, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = t.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(Error::Ragged {
                line: lineno + 1,
                expected: 3,
                found: fields.len(),
            });
        }
        let parse_idx = |column: usize| {
            fields[column].parse::<usize>().map_err(|e| Error::Parse {
                line: lineno + 1,
                column,
                message: e.to_string(),
            })
        };
        let i = parse_idx(0)?;
        let j = parse_idx(1)?;
        let w = fields[2].parse::<f64>().map_err(|e| Error::Parse {
            line: lineno + 1,
            column: 2,
            message: e.to_string(),
        })?;
        n = n.max(i + 1).max(j + 1);
        edges.push((i, j, w));
    }
    ExplicitGraph::from_edges(n, &edges)
}

pub fn write_edge_list(g: &ExplicitGraph, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut body = String::new();
    for (i, j, w) in g.edges() {
        body.push_str(&format!("{i} {j} {w:?}\n"));
    }
    std::fs::write(path, body).map_err(|e| Error::io(path, e))
}

/// Two-block planted partition model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlantedParams {
    pub n: usize,
    pub p: f64,
    pub q: f64,
    pub seed: u64,
}

impl PlantedParams {
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 || !self.n.is_multiple_of(2) {
            return Err(Error::InvalidParams(format!(
                "n must be even and >= 2 (got {})",
                self.n
            )));
        }
        if !(self.p > 0.0 && self.p <= 1.0) {
            return Err(Error::InvalidParams(format!("p must lie in (0, 1] (got {})", self.p)));
        }
        if !(0.0..=1.0).contains(&self.q) {
            return Err(Error::InvalidParams(format!("q must lie in [0, 1] (got {})", self.q)));
        }
        if self.q > self.p {
            return Err(Error::InvalidParams(format!(
                "q ({}) must not exceed p ({})",
                self.q, self.p
            )));
        }
        Ok(())
    }

    /// Block of node `i`: 0 for the first half, 1 for the second.
    pub fn block(&self, i: usize) -> usize {
        usize::from(i >= self.n / 2)
    }

    pub fn blocks(&self) -> Vec<usize> {
        (0..self.n).map(|i| self.block(i)).collect()
    }
}

/// Samples every unordered pair once, with probability `p` inside a block
/// and `q` across blocks.
///
/// `q = p = 1` is accepted (complete graph); otherwise `q < p` is the
/// interesting regime.
pub fn gen_planted(params: PlantedParams) -> Result<ExplicitGraph> {
    params.validate()?;
    let n = params.n;
    let mut rng = rng_from(derive_seed(params.seed, 0x91a7));
    let mut w = vec![0.0; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let prob = if params.block(i) == params.block(j) {
                params.p
            } else {
                params.q
            };
            if rng.random::<f64>() < prob {
                w[i * n + j] = 1.0;
                w[j * n + i] = 1.0;
            }
        }
    }
    ExplicitGraph::from_dense(n, w)
}

/// Unweighted clique on `n` nodes.
pub fn gen_clique(n: usize) -> Result<ExplicitGraph> {
    let mut w = vec![1.0; n * n];
    for i in 0..n {
        w[i * n + i] = 0.0;
    }
    ExplicitGraph::from_dense(n, w)
}

/// Isotropic Gaussian mixture with unit-variance components.
///
/// Cluster means sit at pairwise distance at least `separation` and share a
/// common offset vector of length `offset`; the offset keeps dot-product
/// similarities of the normalized rows mostly non-negative, like averaged
/// embeddings or image features. Point `i` belongs to cluster `i % k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GmmParams {
    pub n: usize,
    pub k: usize,
    pub dim: usize,
    pub separation: f64,
    pub offset: f64,
    pub seed: u64,
}

impl GmmParams {
    pub fn new(n: usize, k: usize, dim: usize, separation: f64, seed: u64) -> Self {
        GmmParams {
            n,
            k,
            dim,
            separation,
            offset: separation,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || self.n < self.k {
            return Err(Error::InvalidParams(format!(
                "need n >= k >= 1 (n = {}, k = {})",
                self.n, self.k
            )));
        }
        if self.dim == 0 {
            return Err(Error::InvalidParams("dim must be at least 1".into()));
        }
        if !(self.separation > 0.0) || !self.separation.is_finite() {
            return Err(Error::InvalidParams("separation must be positive".into()));
        }
        if !(self.offset >= 0.0) || !self.offset.is_finite() {
            return Err(Error::InvalidParams("offset must be non-negative".into()));
        }
        Ok(())
    }

    /// Generates the sample together with the (un-normalized) cluster means.
    pub fn generate(&self) -> Result<GmmSample> {
        self.validate()?;
        let means = self.place_means();
        let mut rng = rng_from(derive_seed(self.seed, 0x6a11));
        let mut points = Vec::with_capacity(self.n * self.dim);
        let mut labels = Vec::with_capacity(self.n);
        let mut buf = vec![0.0; self.dim];
        for i in 0..self.n {
            let c = i % self.k;
            loop {
                for (b, m) in buf.iter_mut().zip(&means[c]) {
                    *b = m + rng.sample::<f64, _>(StandardNormal);
                }
                if dot(&buf, &buf) > 0.0 {
                    break;
                }
            }
            points.extend_from_slice(&buf);
            labels.push(c);
        }
        let dataset = VectorDataset::new(self.dim, points, Some(labels), true)?;
        Ok(GmmSample { dataset, means })
    }

    fn place_means(&self) -> Vec<Vec<f64>> {
        let mut rng = rng_from(derive_seed(self.seed, 0x3ea5));
        let offset_dir = random_orthonormal(&mut rng, self.dim, 1).remove(0);
        if self.k == 1 {
            return vec![offset_dir.iter().map(|o| self.offset * o).collect()];
        }
        // Random Gaussian spread, rescaled so the closest pair sits exactly at
        // `separation`.
        loop {
            let mut spread: Vec<Vec<f64>> = (0..self.k)
                .map(|_| {
                    let mut v: Vec<f64> = (0..self.dim).map(|_| rng.sample(StandardNormal)).collect();
                    if self.dim > 1 {
                        let p = dot(&v, &offset_dir);
                        v.iter_mut().zip(&offset_dir).for_each(|(x, o)| *x -= p * o);
                    }
                    v
                })
                .collect();
            let mut closest = f64::INFINITY;
            for i in 0..self.k {
                for j in i + 1..self.k {
                    closest = closest.min(sq_dist(&spread[i], &spread[j]).sqrt());
                }
            }
            if !(closest > 1e-9) {
                continue;
            }
            let scale = self.separation / closest * (1.0 + 1e-12);
            for m in &mut spread {
                m.iter_mut()
                    .zip(&offset_dir)
                    .for_each(|(x, o)| *x = self.offset * o + scale * *x);
            }
            return spread;
        }
    }
}

pub struct GmmSample {
    pub dataset: VectorDataset,
    pub means: Vec<Vec<f64>>,
}

pub fn gen_gmm(n: usize, k: usize, dim: usize, separation: f64, seed: u64) -> Result<VectorDataset> {
    GmmParams::new(n, k, dim, separation, seed)
        .generate()
        .map(|s| s.dataset)
}

fn random_orthonormal<R: Rng>(rng: &mut R, dim: usize, count: usize) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(count);
    while basis.len() < count {
        let mut v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        for b in &basis {
            let p = dot(&v, b);
            v.iter_mut().zip(b).for_each(|(x, y)| *x -= p * y);
        }
        let norm = dot(&v, &v).sqrt();
        if norm > 1e-8 {
            v.iter_mut().for_each(|x| *x /= norm);
            basis.push(v);
        }
    }
    basis
}

/// Seeded shuffle of `0..n` split into `(train, test)`; each part is sorted.
pub fn train_test_split(n: usize, test_fraction: f64, seed: u64) -> (Vec<usize>, Vec<usize>) {
    use rand::seq::SliceRandom;
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut rng_from(derive_seed(seed, 0x7e57)));
    let n_test = ((n as f64) * test_fraction).round() as usize;
    let mut test = idx[..n_test.min(n)].to_vec();
    let mut train = idx[n_test.min(n)..].to_vec();
    test.sort_unstable();
    train.sort_unstable();
    (train, test)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str, label: Option<usize>, normalize: bool) -> Result<VectorDataset> {
        parse_csv(s.as_bytes(), label, normalize)
    }

    #[test]
    fn csv_unit_rows_stay_unit() {
        let d = parse("1,0\n0,1\n", None, true).unwrap();
        assert_eq!(d.n(), 2);
        assert_eq!(d.dim(), 2);
        assert!(d.is_unit_normalized());
        assert_eq!(d.ids(), &[0, 1]);
    }

    #[test]
    fn csv_normalizes_three_four_five() {
        let d = parse("3,4\n", None, true).unwrap();
        assert!((d.row(0)[0] - 0.6).abs() < 1e-15);
        assert!((d.row(0)[1] - 0.8).abs() < 1e-15);
    }

    #[test]
    fn csv_zero_row_rejected() {
        assert!(matches!(parse("0,0\n", None, true), Err(Error::ZeroNorm { row: 0 })));
    }

    #[test]
    fn csv_ragged_and_bad_fields() {
        assert!(matches!(
            parse("1,2\n1\n", None, false),
            Err(Error::Ragged { line: 2, .. })
        ));
        match parse("1,2\n1,x\n", None, false) {
            Err(Error::Parse { line, column, .. }) => assert_eq!((line, column), (2, 1)),
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse("1,nan\n", None, false).is_err());
    }

    #[test]
    fn csv_header_comment_and_label_column() {
        let d = parse("# x,y,label\n1,0,3\n0,2,1\n", Some(2), true).unwrap();
        assert_eq!(d.labels(), Some(&[3, 1][..]));
        assert_eq!(d.dim(), 2);
        assert_eq!(d.row(1), &[0.0, 1.0]);
    }

    #[test]
    fn planted_degenerate_probabilities() {
        let g = gen_planted(PlantedParams {
            n: 4,
            p: 1.0,
            q: 0.0,
            seed: 1,
        })
        .unwrap();
        assert_eq!(g.edges(), vec![(0, 1, 1.0), (2, 3, 1.0)]);
        let g = gen_planted(PlantedParams {
            n: 4,
            p: 1.0,
            q: 1.0,
            seed: 1,
        })
        .unwrap();
        assert_eq!(g.edges().len(), 6);
    }

    #[test]
    fn planted_rejects_bad_params() {
        for (n, p, q) in [(3, 0.9, 0.1), (4, 0.1, 0.9), (4, 0.0, 0.0), (4, 1.2, 0.1)] {
            assert!(gen_planted(PlantedParams { n, p, q, seed: 0 }).is_err(), "{n} {p} {q}");
        }
    }

    #[test]
    fn planted_intra_block_count_near_binomial_mean() {
        // Pairs inside a block: 2 * C(100, 2) = 9900, each present w.p. 0.9.
        let g = gen_planted(PlantedParams {
            n: 200,
            p: 0.9,
            q: 0.1,
            seed: 3,
        })
        .unwrap();
        let intra = g.edges().iter().filter(|(i, j, _)| (*i < 100) == (*j < 100)).count() as f64;
        let trials = 9900.0;
        let mean = trials * 0.9;
        let sd = (trials * 0.9 * 0.1f64).sqrt();
        assert_eq!(mean, 8910.0);
        assert!((intra - mean).abs() < 5.0 * sd, "intra = {intra}");
    }

    #[test]
    fn planted_is_seed_deterministic() {
        let p = PlantedParams {
            n: 50,
            p: 0.5,
            q: 0.2,
            seed: 9,
        };
        assert_eq!(gen_planted(p).unwrap(), gen_planted(p).unwrap());
    }

    #[test]
    fn clique_degrees() {
        let g = gen_clique(3).unwrap();
        assert_eq!(g.degrees(), &[2.0, 2.0, 2.0]);
        assert_eq!(gen_clique(4).unwrap().edges().len(), 6);
        assert!(matches!(gen_clique(1), Err(Error::IsolatedNode { node: 0 })));
    }

    #[test]
    fn gmm_one_point_per_cluster() {
        let d = gen_gmm(5, 5, 3, 10.0, 1).unwrap();
        assert_eq!(d.labels(), Some(&[0, 1, 2, 3, 4][..]));
        let d = gen_gmm(10, 1, 4, 3.0, 1).unwrap();
        assert!(d.labels().unwrap().iter().all(|&l| l == 0));
    }

    #[test]
    fn gmm_means_are_separated() {
        for (k, dim) in [(4, 10), (6, 3), (3, 1)] {
            let s = GmmParams::new(60, k, dim, 5.0, 2).generate().unwrap();
            for a in 0..k {
                for b in a + 1..k {
                    assert!(sq_dist(&s.means[a], &s.means[b]).sqrt() >= 5.0 - 1e-9);
                }
            }
        }
    }

    #[test]
    fn gmm_nearest_centroid_oracle() {
        let d = gen_gmm(1000, 4, 10, 12.0, 5).unwrap();
        let labels = d.labels().unwrap();
        let mut centroids = vec![vec![0.0; 10]; 4];
        let mut counts = [0usize; 4];
        for i in 0..d.n() {
            counts[labels[i]] += 1;
            centroids[labels[i]].iter_mut().zip(d.row(i)).for_each(|(c, x)| *c += x);
        }
        for (c, &m) in centroids.iter_mut().zip(&counts) {
            c.iter_mut().for_each(|v| *v /= m as f64);
        }
        let correct = (0..d.n())
            .filter(|&i| {
                let best = (0..4)
                    .min_by(|&a, &b| sq_dist(d.row(i), &centroids[a]).total_cmp(&sq_dist(d.row(i), &centroids[b])))
                    .unwrap();
                best == labels[i]
            })
            .count();
        assert!(correct as f64 / 1000.0 >= 0.99);
    }

    #[test]
    fn edge_list_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.edges");
        let g = gen_planted(PlantedParams {
            n: 20,
            p: 0.8,
            q: 0.2,
            seed: 4,
        })
        .unwrap();
        write_edge_list(&g, &path).unwrap();
        assert_eq!(load_edge_list(&path).unwrap(), g);
    }

    #[test]
    fn graph_validation() {
        assert!(ExplicitGraph::from_dense(2, vec![0.0, 0.5, 0.4, 0.0]).is_err());
        assert!(ExplicitGraph::from_dense(2, vec![0.0, 1.5, 1.5, 0.0]).is_err());
        assert!(ExplicitGraph::from_dense(2, vec![1.0, 1.0, 1.0, 0.0]).is_err());
        assert!(ExplicitGraph::from_dense(2, vec![0.0, 0.5, 0.5, 0.0]).is_ok());
    }

    #[test]
    fn split_is_partition() {
        let (tr, te) = train_test_split(100, 0.2, 3);
        assert_eq!(te.len(), 20);
        let mut all: Vec<usize> = tr.iter().chain(&te).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..100).collect::<Vec<_>>());
    }
}
