//! Cheeger sandwich `λ/2 ≤ γ(G) ≤ √(2λ)` on an explicit graph, with `λ` the
//! second-smallest eigenvalue of the normalized Laplacian.

use serde::Serialize;

use crate::dataset::ExplicitGraph;
use crate::error::Result;
use crate::similarity::SimilarityView;

use super::dense::symmetric_eigen;
use super::sweep::{sweep_cut, BalanceBand};

/// Largest graph whose conductance is found by enumerating every cut.
pub const EXHAUSTIVE_LIMIT: usize = 14;

const SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ConductanceMethod {
    Exhaustive,
    Sweep,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheegerReport {
    pub n: usize,
    /// Second-largest eigenvalue of `D^{-1/2} W D^{-1/2}`.
    pub adjacency_lambda2: f64,
    /// `1 - adjacency_lambda2`.
    pub laplacian_lambda2: f64,
    pub conductance: f64,
    pub method: ConductanceMethod,
    pub lower: f64,
    pub upper: f64,
    pub holds: bool,
}

/// Row-major `D^{-1/2} W D^{-1/2}`.
pub fn normalized_adjacency(graph: &ExplicitGraph) -> Vec<f64> {
    let n = graph.n();
    let d = graph.degrees();
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            m[i * n + j] = graph.weight(i, j) / (d[i] * d[j]).sqrt();
        }
    }
    m
}

/// Minimum conductance over all `2^{n-1} - 1` cuts.
pub fn exhaustive_conductance(view: &SimilarityView<'_>) -> Result<f64> {
    let m = view.len();
    let ids = view.active();
    let mut best = f64::INFINITY;
    // Point 0 stays on the left, so every cut is seen once.
    for mask in (1u64..(1u64 << m) - 1).filter(|mask| mask & 1 == 1) {
        let left: Vec<usize> = (0..m).filter(|i| mask >> i & 1 == 1).map(|i| ids[i]).collect();
        best = best.min(view.conductance(&left)?);
    }
    Ok(best)
}

pub fn cheeger_check(graph: &ExplicitGraph) -> Result<CheegerReport> {
    let n = graph.n();
    let eig = symmetric_eigen(&normalized_adjacency(graph), n)?;
    let mu2 = if n >= 2 { eig.values[1] } else { 1.0 };
    let gap = (1.0 - mu2).max(0.0);
    let view = SimilarityView::explicit_all(graph);
    let (conductance, method) = if n <= EXHAUSTIVE_LIMIT {
        (exhaustive_conductance(&view)?, ConductanceMethod::Exhaustive)
    } else {
        let d = graph.degrees();
        let coords: Vec<f64> = (0..n).map(|i| eig.vectors[1][i] / d[i].sqrt()).collect();
        let sweep = sweep_cut(&view, &coords, BalanceBand::FULL)?;
        (sweep.best_conductance, ConductanceMethod::Sweep)
    };
    let (lower, upper) = (gap / 2.0, (2.0 * gap).sqrt());
    Ok(CheegerReport {
        n,
        adjacency_lambda2: mu2,
        laplacian_lambda2: gap,
        conductance,
        method,
        lower,
        upper,
        holds: lower <= conductance + SLACK && conductance <= upper + SLACK,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{gen_clique, gen_planted, PlantedParams};

    #[test]
    fn four_clique() {
        let r = cheeger_check(&gen_clique(4).unwrap()).unwrap();
        assert!((r.adjacency_lambda2 + 1.0 / 3.0).abs() < 1e-9);
        assert!((r.conductance - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(r.method, ConductanceMethod::Exhaustive);
        assert!(r.holds);
    }

    #[test]
    fn large_graph_uses_sweep() {
        let g = gen_planted(PlantedParams {
            n: 60,
            p: 0.7,
            q: 0.05,
            seed: 4,
        })
        .unwrap();
        let r = cheeger_check(&g).unwrap();
        assert_eq!(r.method, ConductanceMethod::Sweep);
        assert!(r.holds, "{r:?}");
    }
}
