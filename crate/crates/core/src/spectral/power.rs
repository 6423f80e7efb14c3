//! Seeded power iteration on the normalized similarity operator, with
//! deflation for the second eigenvector.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::dataset::dot;
use crate::error::{Error, Result};
use crate::rng::{derive_seed, rng_from};
use crate::similarity::SimilarityView;

pub const DEFAULT_EPSILON: f64 = 0.1;
/// Constant `c` in the default iteration count `⌈c · ln(n) / ε⌉`.
pub const ITERATION_CONSTANT: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerConfig {
    pub epsilon: f64,
    /// Fixed iteration count; `None` derives it from the subset size.
    pub iterations: Option<usize>,
    pub seed: u64,
}

impl Default for PowerConfig {
    fn default() -> Self {
        PowerConfig {
            epsilon: DEFAULT_EPSILON,
            iterations: None,
            seed: 0,
        }
    }
}

impl PowerConfig {
    pub fn with_seed(seed: u64) -> Self {
        PowerConfig {
            seed,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0) {
            return Err(Error::InvalidParams(format!(
                "epsilon must be positive (got {})",
                self.epsilon
            )));
        }
        if self.iterations == Some(0) {
            return Err(Error::InvalidParams("iteration count must be at least 1".into()));
        }
        Ok(())
    }

    /// Iterations for a subset of `n` points.
    pub fn iteration_count(&self, n: usize) -> usize {
        self.iterations.unwrap_or_else(|| {
            let n = n.max(2) as f64;
            ((ITERATION_CONSTANT * n.ln() / self.epsilon).ceil() as usize).max(1)
        })
    }
}

/// Symmetric positive semi-definite operator the iteration runs on.
pub trait PsdOperator {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[f64], out: &mut [f64]);

    /// Dense row-major copy, for oracles and small problems.
    fn to_dense(&self) -> Vec<f64> {
        let n = self.dim();
        let mut m = vec![0.0; n * n];
        let mut e = vec![0.0; n];
        let mut col = vec![0.0; n];
        for j in 0..n {
            e.iter_mut().for_each(|x| *x = 0.0);
            e[j] = 1.0;
            self.apply(&e, &mut col);
            for i in 0..n {
                m[i * n + j] = col[i];
            }
        }
        m
    }
}

/// `Ãᵀ Ã` with `Ã = D^{-1/2} A`, acting on the `d`-dimensional feature side.
pub struct ImplicitOperator<'v, 'a> {
    view: &'v SimilarityView<'a>,
    inv_degree: Vec<f64>,
    dim: usize,
}

impl<'v, 'a> ImplicitOperator<'v, 'a> {
    pub fn new(view: &'v SimilarityView<'a>) -> Self {
        let inv_degree = view.scaling_degrees().iter().map(|d| 1.0 / d).collect();
        ImplicitOperator {
            view,
            inv_degree,
            dim: view.dataset().expect("implicit view").dim(),
        }
    }
}

impl PsdOperator for ImplicitOperator<'_, '_> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, x: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        for (p, w) in self.inv_degree.iter().enumerate() {
            let row = self.view.point(p);
            let c = dot(row, x) * w;
            out.iter_mut().zip(row).for_each(|(o, r)| *o += c * r);
        }
    }
}

/// Lazy normalized adjacency `(I + D^{-1/2} C D^{-1/2}) / 2` of an explicit
/// subgraph. Same eigenvectors as the normalized adjacency, spectrum shifted
/// into `[0, 1]` so the iteration cannot stall on eigenvalue `-1`.
pub struct ExplicitOperator<'v, 'a> {
    view: &'v SimilarityView<'a>,
    inv_sqrt: Vec<f64>,
}

impl<'v, 'a> ExplicitOperator<'v, 'a> {
    pub fn new(view: &'v SimilarityView<'a>) -> Self {
        let inv_sqrt = view
            .degrees()
            .iter()
            .map(|&d| if d > 0.0 { 1.0 / d.sqrt() } else { 0.0 })
            .collect();
        ExplicitOperator { view, inv_sqrt }
    }
}

impl PsdOperator for ExplicitOperator<'_, '_> {
    fn dim(&self) -> usize {
        self.inv_sqrt.len()
    }

    fn apply(&self, x: &[f64], out: &mut [f64]) {
        let m = self.dim();
        let scaled: Vec<f64> = x.iter().zip(&self.inv_sqrt).map(|(a, b)| a * b).collect();
        for a in 0..m {
            let mut s = 0.0;
            for (b, sb) in scaled.iter().enumerate() {
                s += self.view.weight_local(a, b) * sb;
            }
            out[a] = 0.5 * (x[a] + self.inv_sqrt[a] * s);
        }
    }
}

/// Operator matching the view's mode.
pub fn operator<'v, 'a>(view: &'v SimilarityView<'a>) -> Box<dyn PsdOperator + 'v> {
    if view.is_implicit() {
        Box::new(ImplicitOperator::new(view))
    } else {
        Box::new(ExplicitOperator::new(view))
    }
}

pub fn rayleigh_quotient(op: &dyn PsdOperator, x: &[f64]) -> f64 {
    let mut y = vec![0.0; op.dim()];
    op.apply(x, &mut y);
    dot(x, &y) / dot(x, x)
}

fn gaussian_vector(dim: usize, seed: u64) -> Vec<f64> {
    let mut rng = rng_from(seed);
    (0..dim).map(|_| rng.sample(StandardNormal)).collect()
}

fn normalize(x: &mut [f64]) -> Result<()> {
    let norm = dot(x, x).sqrt();
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(Error::Degenerate("iterate collapsed to zero"));
    }
    x.iter_mut().for_each(|v| *v /= norm);
    Ok(())
}

fn iterate(op: &dyn PsdOperator, start: Vec<f64>, deflate: Option<&[f64]>, steps: usize) -> Result<Vec<f64>> {
    let project = |x: &mut [f64]| {
        if let Some(v) = deflate {
            let c = dot(x, v);
            x.iter_mut().zip(v).for_each(|(a, b)| *a -= c * b);
        }
    };
    let mut x = start;
    project(&mut x);
    normalize(&mut x)?;
    let mut y = vec![0.0; x.len()];
    for _ in 0..steps {
        op.apply(&x, &mut y);
        project(&mut y);
        normalize(&mut y)?;
        std::mem::swap(&mut x, &mut y);
    }
    Ok(x)
}

/// Leading eigenvector of the view's operator: `d`-dimensional in implicit
/// mode, one entry per active point in explicit mode.
pub fn top_eigenvector(view: &SimilarityView<'_>, config: &PowerConfig) -> Result<Vec<f64>> {
    config.validate()?;
    let op = operator(view);
    top_eigenvector_of(op.as_ref(), config, view.len())
}

pub fn top_eigenvector_of(op: &dyn PsdOperator, config: &PowerConfig, n_points: usize) -> Result<Vec<f64>> {
    if op.dim() < 1 {
        return Err(Error::Degenerate("dimension must be at least 1"));
    }
    let start = gaussian_vector(op.dim(), derive_seed(config.seed, 1));
    iterate(op, start, None, config.iteration_count(n_points))
}

/// Power iteration with the projector `I - v vᵀ` applied every step.
pub fn second_eigenvector_deflated(view: &SimilarityView<'_>, first: &[f64], config: &PowerConfig) -> Result<Vec<f64>> {
    config.validate()?;
    let op = operator(view);
    second_eigenvector_of(op.as_ref(), first, config, view.len())
}

pub fn second_eigenvector_of(
    op: &dyn PsdOperator,
    first: &[f64],
    config: &PowerConfig,
    n_points: usize,
) -> Result<Vec<f64>> {
    if first.len() != op.dim() {
        return Err(Error::Dimension {
            expected: op.dim(),
            found: first.len(),
        });
    }
    if (dot(first, first) - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidParams("deflation vector must be unit norm".into()));
    }
    let start = gaussian_vector(op.dim(), derive_seed(config.seed, 2));
    iterate(op, start, Some(first), config.iteration_count(n_points))
}
