//! One oracle over two kinds of similarity: the implicit dot-product matrix
//! `C = X Xᵀ` of a unit-normalized dataset (never materialized; every
//! aggregate goes through row sums) and an explicit dense graph.

use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};

use crate::dataset::{dot, ExplicitGraph, VectorDataset};
use crate::error::{Error, Result};

/// Degrees used for `D^{-1/2}` scaling are floored at this fraction of the
/// mean degree. Dot products of arbitrary embeddings can be negative, which
/// would otherwise leave `D^{-1/2}` undefined.
pub const DEGREE_FLOOR_FRACTION: f64 = 1e-3;

#[derive(Debug, Clone, Copy)]
enum Source<'a> {
    Implicit(&'a VectorDataset),
    Explicit(&'a ExplicitGraph),
}

/// Similarity restricted to an active subset of points.
#[derive(Debug)]
pub struct SimilarityView<'a> {
    source: Source<'a>,
    active: Vec<usize>,
    degrees: Vec<f64>,
    row_sum: Option<Vec<f64>>,
    clamp_warnings: AtomicUsize,
}

/// Node-local degree scaling frozen at build time.
///
/// A point's degree against the node is `x · row_sum` (including its own
/// term when it was a member), floored at `floor`; projections divide the
/// raw dot product by the square root of that degree.
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeNormalization {
    pub row_sum: Vec<f64>,
    pub floor: f64,
}

impl DegreeNormalization {
    #[inline]
    pub fn degree_of(&self, x: &[f64]) -> f64 {
        dot(x, &self.row_sum).max(self.floor)
    }

    #[inline]
    pub fn project(&self, x: &[f64], direction: &[f64]) -> f64 {
        dot(x, direction) / self.degree_of(x).sqrt()
    }
}

impl<'a> SimilarityView<'a> {
    pub fn implicit(data: &'a VectorDataset, active: Vec<usize>) -> Result<Self> {
        validate_active(&active, data.n())?;
        let mut row_sum = vec![0.0; data.dim()];
        for &i in &active {
            row_sum.iter_mut().zip(data.row(i)).for_each(|(s, x)| *s += x);
        }
        let degrees = active.iter().map(|&i| dot(data.row(i), &row_sum)).collect();
        Ok(SimilarityView {
            source: Source::Implicit(data),
            active,
            degrees,
            row_sum: Some(row_sum),
            clamp_warnings: AtomicUsize::new(0),
        })
    }

    pub fn implicit_all(data: &'a VectorDataset) -> Self {
        Self::implicit(data, (0..data.n()).collect()).expect("full index range is valid")
    }

    /// Degrees are those of the subgraph induced by `active`.
    pub fn explicit(graph: &'a ExplicitGraph, active: Vec<usize>) -> Result<Self> {
        validate_active(&active, graph.n())?;
        let degrees = if active.len() == graph.n() {
            active.iter().map(|&i| graph.degrees()[i]).collect()
        } else {
            active
                .iter()
                .map(|&i| active.iter().map(|&j| graph.weight(i, j)).sum())
                .collect()
        };
        Ok(SimilarityView {
            source: Source::Explicit(graph),
            active,
            degrees,
            row_sum: None,
            clamp_warnings: AtomicUsize::new(0),
        })
    }

    pub fn explicit_all(graph: &'a ExplicitGraph) -> Self {
        Self::explicit(graph, (0..graph.n()).collect()).expect("full index range is valid")
    }

    pub fn len(&self) -> usize {
        self.active.len()
    }

    pub fn is_empty(&self) -> bool {
        self.active.is_empty()
    }

    pub fn is_implicit(&self) -> bool {
        matches!(self.source, Source::Implicit(_))
    }

    pub fn active(&self) -> &[usize] {
        &self.active
    }

    pub fn dataset(&self) -> Option<&'a VectorDataset> {
        match self.source {
            Source::Implicit(d) => Some(d),
            Source::Explicit(_) => None,
        }
    }

    pub fn graph(&self) -> Option<&'a ExplicitGraph> {
        match self.source {
            Source::Explicit(g) => Some(g),
            Source::Implicit(_) => None,
        }
    }

    /// Degrees of the active points, aligned with [`active`](Self::active).
    /// Implicit mode includes the self term `x_i · x_i`.
    pub fn degrees(&self) -> &[f64] {
        &self.degrees
    }

    /// Sum of the active rows (implicit mode only).
    pub fn row_sum(&self) -> Option<&[f64]> {
        self.row_sum.as_deref()
    }

    /// Row vector of active position `pos` (implicit mode only).
    #[inline]
    pub(crate) fn point(&self, pos: usize) -> &'a [f64] {
        match self.source {
            Source::Implicit(d) => d.row(self.active[pos]),
            Source::Explicit(_) => unreachable!("explicit views have no feature vectors"),
        }
    }

    #[inline]
    pub(crate) fn weight_local(&self, a: usize, b: usize) -> f64 {
        match self.source {
            Source::Explicit(g) => g.weight(self.active[a], self.active[b]),
            Source::Implicit(d) => dot(d.row(self.active[a]), d.row(self.active[b])),
        }
    }

    /// Frozen scaling for the implicit mode.
    pub fn normalization(&self) -> Option<DegreeNormalization> {
        let row_sum = self.row_sum.as_ref()?;
        let mean = dot(row_sum, row_sum) / self.len().max(1) as f64;
        let floor = (DEGREE_FLOOR_FRACTION * mean).max(f64::MIN_POSITIVE);
        Some(DegreeNormalization {
            row_sum: row_sum.clone(),
            floor,
        })
    }

    /// Degrees used inside `D^{-1/2}`: floored in implicit mode, raw in
    /// explicit mode (where zero entries get a zero inverse).
    pub fn scaling_degrees(&self) -> Vec<f64> {
        match self.normalization() {
            Some(norm) => self.degrees.iter().map(|d| d.max(norm.floor)).collect(),
            None => self.degrees.clone(),
        }
    }

    /// Number of times a negative aggregate was clamped to zero.
    pub fn clamp_warnings(&self) -> usize {
        self.clamp_warnings.load(Ordering::Relaxed)
    }

    pub(crate) fn clamp(&self, value: f64) -> f64 {
        if value < 0.0 {
            let seen = self.clamp_warnings.fetch_add(1, Ordering::Relaxed);
            if seen == 0 {
                log::warn!("negative similarity aggregate {value:e} clamped to 0");
            }
            0.0
        } else {
            value
        }
    }

    /// Marks the positions of `left` (global ids) inside the active set.
    pub(crate) fn mask(&self, left: &[usize]) -> Result<Vec<bool>> {
        let pos: HashMap<usize, usize> = self.active.iter().enumerate().map(|(p, &i)| (i, p)).collect();
        let mut mask = vec![false; self.len()];
        let mut count = 0;
        for &i in left {
            let p = *pos.get(&i).ok_or(Error::InactiveIndex(i))?;
            if !mask[p] {
                mask[p] = true;
                count += 1;
            }
        }
        if count == 0 || count == self.len() {
            return Err(Error::EmptyOrFullSubset);
        }
        Ok(mask)
    }

    /// Raw cut weight between marked and unmarked positions.
    pub(crate) fn cut_mask(&self, mask: &[bool]) -> f64 {
        match self.source {
            Source::Implicit(d) => {
                let row_sum = self.row_sum.as_ref().unwrap();
                let mut left = vec![0.0; d.dim()];
                for (p, _) in mask.iter().enumerate().filter(|(_, &m)| m) {
                    left.iter_mut().zip(self.point(p)).for_each(|(s, x)| *s += x);
                }
                let right: Vec<f64> = row_sum.iter().zip(&left).map(|(t, l)| t - l).collect();
                dot(&left, &right)
            }
            Source::Explicit(g) => {
                let mut cut = 0.0;
                for (a, &ma) in mask.iter().enumerate() {
                    if !ma {
                        continue;
                    }
                    let row = g.row(self.active[a]);
                    for (b, &mb) in mask.iter().enumerate() {
                        if !mb {
                            cut += row[self.active[b]];
                        }
                    }
                }
                cut
            }
        }
    }

    fn volumes(&self, mask: &[bool]) -> (f64, f64) {
        let mut l = 0.0;
        let mut r = 0.0;
        for (d, &m) in self.degrees.iter().zip(mask) {
            if m {
                l += d;
            } else {
                r += d;
            }
        }
        (l, r)
    }

    /// `C(left, rest)`; implicit mode evaluates `(Σ_left x) · (Σ_rest x)`.
    pub fn cut_value(&self, left: &[usize]) -> Result<f64> {
        Ok(self.cut_mask(&self.mask(left)?))
    }

    /// `C(left, rest) / min(d(left), d(rest))`, with the cut clamped at zero.
    pub fn conductance(&self, left: &[usize]) -> Result<f64> {
        let mask = self.mask(left)?;
        self.conductance_mask(&mask)
    }

    pub(crate) fn conductance_mask(&self, mask: &[bool]) -> Result<f64> {
        let (l, r) = self.volumes(mask);
        let denom = l.min(r);
        if !(denom > 0.0) {
            return Err(Error::ZeroDenominator);
        }
        Ok(self.clamp(self.cut_mask(mask)) / denom)
    }

    /// `C(left, rest) / min(|left|, |rest|)`.
    pub fn expansion(&self, left: &[usize]) -> Result<f64> {
        let mask = self.mask(left)?;
        let l = mask.iter().filter(|&&m| m).count();
        let denom = l.min(self.len() - l) as f64;
        Ok(self.clamp(self.cut_mask(&mask)) / denom)
    }

    /// `d(S)` for a set of global ids.
    pub fn volume(&self, set: &[usize]) -> Result<f64> {
        let pos: HashMap<usize, usize> = self.active.iter().enumerate().map(|(p, &i)| (i, p)).collect();
        set.iter()
            .map(|i| pos.get(i).map(|&p| self.degrees[p]).ok_or(Error::InactiveIndex(*i)))
            .sum()
    }
}

fn validate_active(active: &[usize], n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    for &i in active {
        if i >= n {
            return Err(Error::InactiveIndex(i));
        }
        if seen[i] {
            return Err(Error::InvalidParams(format!("index {i} repeated in active subset")));
        }
        seen[i] = true;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{gen_clique, ExplicitGraph};
    use proptest::prelude::*;

    fn ds(rows: &[Vec<f64>]) -> VectorDataset {
        VectorDataset::from_rows(rows, None, true).unwrap()
    }

    fn two_triangles_with_bridge() -> ExplicitGraph {
        let e = [(0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5), (2, 3)];
        let edges: Vec<_> = e.iter().map(|&(i, j)| (i, j, 1.0)).collect();
        ExplicitGraph::from_edges(6, &edges).unwrap()
    }

    #[test]
    fn implicit_degrees_include_self_term() {
        let d = ds(&[vec![1.0, 0.0], vec![1.0, 0.0]]);
        assert_eq!(SimilarityView::implicit_all(&d).degrees(), &[2.0, 2.0]);
        let d = ds(&[vec![1.0, 0.0], vec![0.0, 1.0]]);
        assert_eq!(SimilarityView::implicit_all(&d).degrees(), &[1.0, 1.0]);
    }

    #[test]
    fn explicit_degrees_and_cuts() {
        let g = gen_clique(3).unwrap();
        assert_eq!(SimilarityView::explicit_all(&g).degrees(), &[2.0, 2.0, 2.0]);
        let g4 = gen_clique(4).unwrap();
        let v = SimilarityView::explicit_all(&g4);
        assert_eq!(v.cut_value(&[1, 3]).unwrap(), 4.0);
        assert!((v.conductance(&[0, 2]).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(v.expansion(&[0, 1]).unwrap(), 2.0);
    }

    #[test]
    fn implicit_cut_matches_pair_sum() {
        let d = ds(&[vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 0.0]]);
        let v = SimilarityView::implicit_all(&d);
        // cross pairs (0,1) and (0,2): 0 + 1
        assert_eq!(v.cut_value(&[0]).unwrap(), 1.0);
        let o = ds(&[vec![1.0, 0.0], vec![0.0, 1.0]]);
        assert_eq!(SimilarityView::implicit_all(&o).cut_value(&[0]).unwrap(), 0.0);
    }

    #[test]
    fn conductance_examples() {
        let mut w = vec![0.0; 16];
        for (i, j) in [(0, 1), (2, 3)] {
            w[i * 4 + j] = 1.0;
            w[j * 4 + i] = 1.0;
        }
        let g = ExplicitGraph::from_dense(4, w).unwrap();
        let v = SimilarityView::explicit_all(&g);
        assert_eq!(v.conductance(&[0, 1]).unwrap(), 0.0);
        assert_eq!(v.expansion(&[0, 1]).unwrap(), 0.0);

        let g = two_triangles_with_bridge();
        let v = SimilarityView::explicit_all(&g);
        assert!((v.conductance(&[0, 1, 2]).unwrap() - 1.0 / 7.0).abs() < 1e-15);

        let g = ExplicitGraph::from_edges(2, &[(0, 1, 0.3)]).unwrap();
        assert_eq!(SimilarityView::explicit_all(&g).expansion(&[0]).unwrap(), 0.3);
    }

    #[test]
    fn subset_errors() {
        let g = gen_clique(4).unwrap();
        let v = SimilarityView::explicit_all(&g);
        assert!(matches!(v.cut_value(&[]), Err(Error::EmptyOrFullSubset)));
        assert!(matches!(v.cut_value(&[0, 1, 2, 3]), Err(Error::EmptyOrFullSubset)));
        assert!(matches!(v.cut_value(&[9]), Err(Error::InactiveIndex(9))));
        let sub = SimilarityView::explicit(&g, vec![0, 1]).unwrap();
        assert_eq!(sub.degrees(), &[1.0, 1.0]);
        assert!(SimilarityView::explicit(&g, vec![0, 0]).is_err());
    }

    #[test]
    fn orthogonal_pair_has_zero_conductance_denominator_free() {
        let d = ds(&[vec![1.0, 0.0], vec![0.0, 1.0]]);
        let v = SimilarityView::implicit_all(&d);
        assert_eq!(v.conductance(&[0]).unwrap(), 0.0);
    }

    fn brute_degree(d: &VectorDataset, active: &[usize], i: usize) -> f64 {
        active.iter().map(|&j| dot(d.row(i), d.row(j))).sum()
    }

    fn brute_cut(d: &VectorDataset, left: &[usize], right: &[usize]) -> f64 {
        let mut s = 0.0;
        for &i in left {
            for &j in right {
                s += dot(d.row(i), d.row(j));
            }
        }
        s
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn implicit_aggregates_match_brute_force(
            rows in prop::collection::vec(prop::collection::vec(-1.0f64..1.0, 4), 2..50),
            picks in prop::collection::vec(any::<bool>(), 50),
        ) {
            prop_assume!(rows.iter().all(|r| r.iter().map(|x| x * x).sum::<f64>() > 1e-6));
            let d = ds(&rows);
            let active: Vec<usize> = (0..d.n()).filter(|&i| i % 5 != 4 || d.n() < 5).collect();
            prop_assume!(active.len() >= 2);
            let v = SimilarityView::implicit(&d, active.clone()).unwrap();
            for (p, &i) in active.iter().enumerate() {
                prop_assert!((v.degrees()[p] - brute_degree(&d, &active, i)).abs() < 1e-8);
            }
            let mut left: Vec<usize> = active.iter().copied().filter(|&i| picks[i]).collect();
            if left.is_empty() { left.push(active[0]); }
            if left.len() == active.len() { left.pop(); }
            let right: Vec<usize> = active.iter().copied().filter(|i| !left.contains(i)).collect();
            let cut = v.cut_value(&left).unwrap();
            prop_assert!((cut - brute_cut(&d, &left, &right)).abs() < 1e-8);
            prop_assert!((cut - v.cut_value(&right).unwrap()).abs() < 1e-8);
        }
    }
}
