//! The four splitting rules. Each maps the active subset of a view to a
//! bipartition, plus (for vector data) the hyperplane that reproduces it.

mod kmeans;

pub use kmeans::{flat_kmeans, KMeansResult, LLOYD_MAX_ROUNDS, LLOYD_TOLERANCE};

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::dataset::dot;
use crate::error::{Error, Result};
use crate::rng::{derive_seed, rng_from};
use crate::similarity::{DegreeNormalization, SimilarityView};
use crate::spectral::{
    exact_second_right_singular, second_eigenvector_deflated, sweep_cut, top_eigenvector, BalanceBand, PowerConfig,
};

const STREAM_RP: u64 = 0x7270;
const STREAM_POWER: u64 = 0x0061_6576;
const STREAM_KMEANS: u64 = 0x326d;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Rule {
    #[serde(rename = "rp")]
    RandomProjection,
    #[serde(rename = "ev")]
    Eigenvector,
    #[serde(rename = "aev")]
    ApproxEigenvector,
    #[serde(rename = "2means")]
    TwoMeans,
}

impl Rule {
    pub const ALL: [Rule; 4] = [
        Rule::RandomProjection,
        Rule::Eigenvector,
        Rule::ApproxEigenvector,
        Rule::TwoMeans,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Rule::RandomProjection => "rp",
            Rule::Eigenvector => "ev",
            Rule::ApproxEigenvector => "aev",
            Rule::TwoMeans => "2means",
        }
    }

    pub fn needs_vectors(self) -> bool {
        self != Rule::ApproxEigenvector
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Rule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Rule::ALL
            .into_iter()
            .find(|r| r.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidParams(format!("unknown rule '{s}' (expected rp, ev, aev or 2means)")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RuleTag {
    RP,
    EV,
    AEV,
    TwoMeans,
    GraphSweep,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BuildConfig {
    pub rule: Rule,
    pub balance_enforced: bool,
    pub leaf_max: usize,
    /// Accuracy and iteration count for the approximate rule; its seed is
    /// replaced by a stream of the node seed.
    pub power: PowerConfig,
    pub seed: u64,
    pub knn_bucket: usize,
    /// Random projection splits at 0 instead of the median.
    pub rp_zero_threshold: bool,
}

impl BuildConfig {
    pub fn new(rule: Rule, seed: u64) -> Self {
        BuildConfig {
            rule,
            balance_enforced: true,
            leaf_max: 1,
            power: PowerConfig::default(),
            seed,
            knn_bucket: 64,
            rp_zero_threshold: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.leaf_max < 1 {
            return Err(Error::InvalidParams("leaf_max must be at least 1".into()));
        }
        if self.knn_bucket < 1 {
            return Err(Error::InvalidParams("bucket size must be at least 1".into()));
        }
        self.power.validate()
    }

    pub fn band(&self) -> BalanceBand {
        BalanceBand::for_balance(self.balance_enforced)
    }

    fn power_for_node(&self) -> PowerConfig {
        PowerConfig {
            seed: derive_seed(self.seed, STREAM_POWER),
            ..self.power
        }
    }
}

/// Direction and threshold of an internal node. EV/AEV hyperplanes carry
/// the node's frozen degree normalization.
#[derive(Debug, Clone, PartialEq)]
pub struct Hyperplane {
    pub direction: Vec<f64>,
    pub threshold: f64,
    pub normalization: Option<DegreeNormalization>,
}

impl Hyperplane {
    #[inline]
    pub fn project(&self, x: &[f64]) -> f64 {
        match &self.normalization {
            Some(norm) => norm.project(x, &self.direction),
            None => dot(x, &self.direction),
        }
    }

    #[inline]
    pub fn goes_left(&self, x: &[f64]) -> bool {
        self.project(x) <= self.threshold
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitPlan {
    pub hyperplane: Option<Hyperplane>,
    /// Global ids, in the order the rule placed them.
    pub left_ids: Vec<usize>,
    pub right_ids: Vec<usize>,
    pub rule_tag: RuleTag,
}

impl SplitPlan {
    pub fn direction(&self) -> Option<&[f64]> {
        self.hyperplane.as_ref().map(|h| h.direction.as_slice())
    }

    pub fn threshold(&self) -> Option<f64> {
        self.hyperplane.as_ref().map(|h| h.threshold)
    }
}

fn require_split_size(view: &SimilarityView<'_>) -> Result<()> {
    if view.len() < 2 {
        return Err(Error::InvalidParams(format!(
            "a split needs at least two points (got {})",
            view.len()
        )));
    }
    Ok(())
}

fn require_vectors(view: &SimilarityView<'_>, rule: &'static str) -> Result<()> {
    if view.is_implicit() {
        Ok(())
    } else {
        Err(Error::IncompatibleRule { rule, mode: "explicit" })
    }
}

fn stable_order(coords: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..coords.len()).collect();
    order.sort_by(|&a, &b| coords[a].total_cmp(&coords[b]));
    order
}

/// Plan from a sorted order and prefix length; the threshold is the
/// boundary point's coordinate.
fn plan_from_order(
    view: &SimilarityView<'_>,
    coords: &[f64],
    order: &[usize],
    j: usize,
    direction: Option<(Vec<f64>, Option<DegreeNormalization>)>,
    rule_tag: RuleTag,
) -> SplitPlan {
    let active = view.active();
    let hyperplane = direction.map(|(direction, normalization)| Hyperplane {
        direction,
        threshold: coords[order[j - 1]],
        normalization,
    });
    SplitPlan {
        hyperplane,
        left_ids: order[..j].iter().map(|&p| active[p]).collect(),
        right_ids: order[j..].iter().map(|&p| active[p]).collect(),
        rule_tag,
    }
}

/// Random hyperplane through the median projection.
pub fn split_rp(view: &SimilarityView<'_>, config: &BuildConfig) -> Result<SplitPlan> {
    require_split_size(view)?;
    require_vectors(view, "RP")?;
    let m = view.len();
    let d = view.dataset().expect("implicit view").dim();
    let mut rng = rng_from(derive_seed(config.seed, STREAM_RP));
    let mut direction: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
    let norm = dot(&direction, &direction).sqrt();
    direction.iter_mut().for_each(|x| *x /= norm);

    let coords: Vec<f64> = (0..m).map(|p| dot(view.point(p), &direction)).collect();
    let order = stable_order(&coords);
    if config.rp_zero_threshold {
        let j = coords.iter().filter(|&&c| c <= 0.0).count();
        let j = if config.balance_enforced {
            config.band().clamp(m, j)
        } else {
            j
        };
        if j > 0 && j < m {
            let mut plan = plan_from_order(view, &coords, &order, j, Some((direction, None)), RuleTag::RP);
            if coords[order[j - 1]] <= 0.0 && coords[order[j]] > 0.0 {
                plan.hyperplane.as_mut().unwrap().threshold = 0.0;
            }
            return Ok(plan);
        }
    }
    let j = config.band().clamp(m, m.div_ceil(2));
    Ok(plan_from_order(
        view,
        &coords,
        &order,
        j,
        Some((direction, None)),
        RuleTag::RP,
    ))
}

/// Sweep over degree-normalized projections onto `h`, falling back to the
/// band-clamped median when no prefix has a positive denominator.
fn spectral_plan(
    view: &SimilarityView<'_>,
    config: &BuildConfig,
    coords: Vec<f64>,
    direction: Option<(Vec<f64>, Option<DegreeNormalization>)>,
    rule_tag: RuleTag,
) -> Result<SplitPlan> {
    let m = view.len();
    let band = config.band();
    match sweep_cut(view, &coords, band) {
        Ok(sweep) => Ok(plan_from_order(
            view,
            &coords,
            &sweep.order,
            sweep.best_index,
            direction,
            rule_tag,
        )),
        Err(Error::NoValidPrefix) => {
            log::debug!("sweep found no valid prefix over {m} points; using median split");
            let order = stable_order(&coords);
            Ok(plan_from_order(
                view,
                &coords,
                &order,
                band.clamp(m, m / 2),
                direction,
                rule_tag,
            ))
        }
        Err(e) => Err(e),
    }
}

fn projected(view: &SimilarityView<'_>, h: Vec<f64>, rule_tag: RuleTag, config: &BuildConfig) -> Result<SplitPlan> {
    let norm = view.normalization().expect("implicit view");
    let coords: Vec<f64> = (0..view.len()).map(|p| norm.project(view.point(p), &h)).collect();
    spectral_plan(view, config, coords, Some((h, Some(norm))), rule_tag)
}

/// Second eigenvector of `F = Aᵀ D⁻¹ A` via the dense solver, then a sweep.
pub fn split_ev(view: &SimilarityView<'_>, config: &BuildConfig) -> Result<SplitPlan> {
    require_split_size(view)?;
    require_vectors(view, "EV")?;
    let d = view.dataset().expect("implicit view").dim();
    let h = if d == 1 {
        vec![1.0]
    } else {
        exact_second_right_singular(view)?
    };
    projected(view, h, RuleTag::EV, config)
}

/// Power iteration with deflation, then a sweep. On explicit graphs the
/// iterate lives on the nodes and is swept directly.
pub fn split_aev(view: &SimilarityView<'_>, config: &BuildConfig) -> Result<SplitPlan> {
    require_split_size(view)?;
    let power = config.power_for_node();
    power.validate()?;
    if view.is_implicit() && view.dataset().expect("implicit view").dim() == 1 {
        return projected(view, vec![1.0], RuleTag::AEV, config);
    }
    let second = top_eigenvector(view, &power).and_then(|top| second_eigenvector_deflated(view, &top, &power));
    let second = match second {
        Ok(v) => v,
        Err(Error::Degenerate(why)) => {
            let m = view.len();
            // Tiny subsets routinely have a zero second eigenvalue.
            let level = if m <= 3 { log::Level::Debug } else { log::Level::Warn };
            log::log!(
                level,
                "power iteration degenerate over {m} points ({why}); using median split"
            );
            let order: Vec<usize> = (0..m).collect();
            let coords = vec![0.0; m];
            let direction = view.is_implicit().then(|| {
                let d = view.dataset().unwrap().dim();
                (vec![0.0; d], view.normalization())
            });
            let tag = if view.is_implicit() {
                RuleTag::AEV
            } else {
                RuleTag::GraphSweep
            };
            return Ok(plan_from_order(
                view,
                &coords,
                &order,
                config.band().clamp(m, m / 2),
                direction,
                tag,
            ));
        }
        Err(e) => return Err(e),
    };
    if view.is_implicit() {
        projected(view, second, RuleTag::AEV, config)
    } else {
        spectral_plan(view, config, second, None, RuleTag::GraphSweep)
    }
}

/// k-means++ with two seeds, Lloyd to convergence, then the bisecting
/// hyperplane `2(c₁ − c₂) · x ≤ ‖c₁‖² − ‖c₂‖²`.
pub fn split_2means(view: &SimilarityView<'_>, config: &BuildConfig) -> Result<SplitPlan> {
    require_split_size(view)?;
    require_vectors(view, "2-means")?;
    let m = view.len();
    let d = view.dataset().expect("implicit view").dim();
    let points: Vec<&[f64]> = (0..m).map(|p| view.point(p)).collect();
    let band = config.band();

    let first = points[0];
    if points.iter().all(|p| *p == first) {
        log::warn!("2-means split over {m} identical points; splitting by index");
        let order: Vec<usize> = (0..m).collect();
        let coords = vec![0.0; m];
        return Ok(plan_from_order(
            view,
            &coords,
            &order,
            band.clamp(m, m / 2),
            Some((vec![0.0; d], None)),
            RuleTag::TwoMeans,
        ));
    }

    let mut rng = rng_from(derive_seed(config.seed, STREAM_KMEANS));
    let seeds = kmeans::kmeanspp_seeds(&points, 2, &mut rng);
    let centers = vec![points[seeds[0]].to_vec(), points[seeds[1]].to_vec()];
    // Cluster 1 (nearer c₂, ties included) is the left side.
    let fit = kmeans::lloyd(&points, centers, |x, c| {
        usize::from(crate::dataset::sq_dist(x, &c[1]) <= crate::dataset::sq_dist(x, &c[0]))
    });
    let (c1, c2) = (&fit.centers[0], &fit.centers[1]);
    let direction: Vec<f64> = c1.iter().zip(c2).map(|(a, b)| 2.0 * (a - b)).collect();
    let threshold = dot(c1, c1) - dot(c2, c2);

    let coords: Vec<f64> = points.iter().map(|p| dot(p, &direction)).collect();
    let order = stable_order(&coords);
    let left = coords.iter().filter(|&&c| c <= threshold).count();
    let j = if config.balance_enforced {
        band.clamp(m, left)
    } else {
        left
    };
    if j == left && j > 0 && j < m {
        let active = view.active();
        let (left_ids, right_ids) = (0..m).partition::<Vec<usize>, _>(|&p| coords[p] <= threshold);
        return Ok(SplitPlan {
            hyperplane: Some(Hyperplane {
                direction,
                threshold,
                normalization: None,
            }),
            left_ids: left_ids.into_iter().map(|p| active[p]).collect(),
            right_ids: right_ids.into_iter().map(|p| active[p]).collect(),
            rule_tag: RuleTag::TwoMeans,
        });
    }
    let j = band.clamp(m, if j == 0 || j == m { m / 2 } else { j });
    Ok(plan_from_order(
        view,
        &coords,
        &order,
        j,
        Some((direction, None)),
        RuleTag::TwoMeans,
    ))
}

/// Dispatches on the configured rule.
pub fn split(view: &SimilarityView<'_>, config: &BuildConfig) -> Result<SplitPlan> {
    match config.rule {
        Rule::RandomProjection => split_rp(view, config),
        Rule::Eigenvector => split_ev(view, config),
        Rule::ApproxEigenvector => split_aev(view, config),
        Rule::TwoMeans => split_2means(view, config),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{gen_planted, sq_dist, ExplicitGraph, GmmParams, PlantedParams, VectorDataset};
    use proptest::prelude::*;

    fn assert_partition(plan: &SplitPlan, view: &SimilarityView<'_>) {
        assert!(!plan.left_ids.is_empty() && !plan.right_ids.is_empty());
        let mut all: Vec<usize> = plan.left_ids.iter().chain(&plan.right_ids).copied().collect();
        all.sort();
        let mut expected = view.active().to_vec();
        expected.sort();
        assert_eq!(all, expected);
    }

    /// Points strictly off the threshold must land on the side the
    /// hyperplane says; points on it may go either way.
    fn assert_consistent(plan: &SplitPlan, data: &VectorDataset) {
        let h = plan.hyperplane.as_ref().unwrap();
        for &i in &plan.left_ids {
            assert!(h.project(data.row(i)) <= h.threshold, "left point {i} above threshold");
        }
        for &i in &plan.right_ids {
            assert!(h.project(data.row(i)) >= h.threshold, "right point {i} below threshold");
        }
    }

    fn blobs(n: usize, sep: f64, seed: u64) -> VectorDataset {
        GmmParams::new(n, 2, 8, sep, seed).generate().unwrap().dataset
    }

    fn misclustered(plan: &SplitPlan, truth: &[usize]) -> usize {
        let wrong_left = plan.left_ids.iter().filter(|&&i| truth[i] == 1).count();
        let wrong_right = plan.right_ids.iter().filter(|&&i| truth[i] == 0).count();
        let errors = wrong_left + wrong_right;
        errors.min(truth.len() - errors)
    }

    #[test]
    fn rule_names_round_trip() {
        for r in Rule::ALL {
            assert_eq!(r.name().parse::<Rule>().unwrap(), r);
        }
        assert!("kd".parse::<Rule>().is_err());
    }

    #[test]
    fn rp_median_of_three() {
        let d = VectorDataset::from_rows(&[vec![1.0, 0.0], vec![0.6, 0.8], vec![0.0, 1.0]], None, true).unwrap();
        let v = SimilarityView::implicit_all(&d);
        let plan = split_rp(&v, &BuildConfig::new(Rule::RandomProjection, 4)).unwrap();
        assert_eq!(plan.left_ids.len(), 2);
        assert_consistent(&plan, &d);
        let h = plan.hyperplane.unwrap();
        let mut proj: Vec<f64> = d.rows().map(|x| dot(x, &h.direction)).collect();
        proj.sort_by(f64::total_cmp);
        assert_eq!(h.threshold, proj[1]);
        assert!((dot(&h.direction, &h.direction) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rp_identical_points_split_by_index() {
        let d = VectorDataset::from_rows(&[vec![1.0, 0.0], vec![1.0, 0.0]], None, true).unwrap();
        let v = SimilarityView::implicit_all(&d);
        let plan = split_rp(&v, &BuildConfig::new(Rule::RandomProjection, 0)).unwrap();
        assert_eq!(plan.left_ids, vec![0]);
        assert_eq!(plan.right_ids, vec![1]);
    }

    #[test]
    fn rp_even_split_of_thousand() {
        let d = blobs(1000, 4.0, 2);
        let v = SimilarityView::implicit_all(&d);
        let plan = split_rp(&v, &BuildConfig::new(Rule::RandomProjection, 11)).unwrap();
        assert_eq!((plan.left_ids.len(), plan.right_ids.len()), (500, 500));
    }

    #[test]
    fn rp_zero_threshold_switch() {
        let d = blobs(200, 4.0, 2);
        let v = SimilarityView::implicit_all(&d);
        let cfg = BuildConfig {
            rp_zero_threshold: true,
            balance_enforced: false,
            ..BuildConfig::new(Rule::RandomProjection, 3)
        };
        let plan = split_rp(&v, &cfg).unwrap();
        assert_partition(&plan, &v);
        assert_consistent(&plan, &d);
    }

    #[test]
    fn ev_recovers_separated_blobs() {
        let d = blobs(200, 12.0, 5);
        let v = SimilarityView::implicit_all(&d);
        let plan = split_ev(&v, &BuildConfig::new(Rule::Eigenvector, 1)).unwrap();
        assert_eq!(misclustered(&plan, d.labels().unwrap()), 0);
        assert_consistent(&plan, &d);
        // Brute-force oracle over all prefixes of the same coordinates.
        let h = plan.hyperplane.as_ref().unwrap();
        let coords: Vec<f64> = d.rows().map(|x| h.project(x)).collect();
        let chosen = v.conductance(&plan.left_ids).unwrap();
        let mut order: Vec<usize> = (0..200).collect();
        order.sort_by(|&a, &b| coords[a].total_cmp(&coords[b]));
        for j in 67..=133 {
            let left: Vec<usize> = order[..j].to_vec();
            assert!(chosen <= v.conductance(&left).unwrap() + 1e-12);
        }
    }

    #[test]
    fn ev_orthogonal_groups() {
        let mut rows = vec![vec![1.0, 0.0]; 3];
        rows.extend(vec![vec![0.0, 1.0]; 3]);
        let d = VectorDataset::from_rows(&rows, None, true).unwrap();
        let v = SimilarityView::implicit_all(&d);
        let plan = split_ev(&v, &BuildConfig::new(Rule::Eigenvector, 1)).unwrap();
        assert_eq!(v.conductance(&plan.left_ids).unwrap(), 0.0);
        let mut l = plan.left_ids.clone();
        l.sort();
        assert!(l == vec![0, 1, 2] || l == vec![3, 4, 5]);
    }

    #[test]
    fn ev_identical_rows_fall_back_to_median() {
        let d = VectorDataset::from_rows(&vec![vec![0.6, 0.8]; 4], None, true).unwrap();
        let v = SimilarityView::implicit_all(&d);
        let plan = split_ev(&v, &BuildConfig::new(Rule::Eigenvector, 1)).unwrap();
        assert_eq!((plan.left_ids.len(), plan.right_ids.len()), (2, 2));
    }

    #[test]
    fn aev_planted_partition() {
        let params = PlantedParams {
            n: 200,
            p: 0.9,
            q: 0.1,
            seed: 17,
        };
        let g = gen_planted(params).unwrap();
        let v = SimilarityView::explicit_all(&g);
        let plan = split_aev(&v, &BuildConfig::new(Rule::ApproxEigenvector, 2)).unwrap();
        assert_eq!(plan.rule_tag, RuleTag::GraphSweep);
        assert!(plan.hyperplane.is_none());
        assert!(misclustered(&plan, &params.blocks()) <= 50);
    }

    #[test]
    fn aev_matches_ev_on_separated_blobs() {
        let d = blobs(200, 12.0, 5);
        let v = SimilarityView::implicit_all(&d);
        let ev = split_ev(&v, &BuildConfig::new(Rule::Eigenvector, 1)).unwrap();
        let aev = split_aev(&v, &BuildConfig::new(Rule::ApproxEigenvector, 1)).unwrap();
        let mut a = ev.left_ids.clone();
        let mut b = aev.left_ids.clone();
        a.sort();
        b.sort();
        let mut br = aev.right_ids.clone();
        br.sort();
        assert!(a == b || a == br);
        assert_consistent(&aev, &d);
    }

    #[test]
    fn aev_disjoint_pairs_explicit() {
        let g = ExplicitGraph::from_edges(4, &[(0, 1, 1.0), (2, 3, 1.0)]).unwrap();
        let v = SimilarityView::explicit_all(&g);
        let plan = split_aev(&v, &BuildConfig::new(Rule::ApproxEigenvector, 8)).unwrap();
        assert_eq!(v.conductance(&plan.left_ids).unwrap(), 0.0);
    }

    #[test]
    fn vector_rules_reject_graphs() {
        let g = ExplicitGraph::from_edges(2, &[(0, 1, 1.0)]).unwrap();
        let v = SimilarityView::explicit_all(&g);
        for rule in [Rule::RandomProjection, Rule::Eigenvector, Rule::TwoMeans] {
            assert!(matches!(
                split(&v, &BuildConfig::new(rule, 0)),
                Err(Error::IncompatibleRule { .. })
            ));
        }
    }

    #[test]
    fn two_means_symmetric_centers() {
        let c1 = [1.0, 0.0];
        let c2 = [-1.0, 0.0];
        let h: Vec<f64> = c1.iter().zip(&c2).map(|(a, b)| 2.0 * (a - b)).collect();
        let s = dot(&c1, &c1) - dot(&c2, &c2);
        assert_eq!(h, vec![4.0, 0.0]);
        assert_eq!(s, 0.0);
        assert!(dot(&h, &[0.5, 0.0]) > s);
    }

    #[test]
    fn two_means_hyperplane_is_nearest_center_rule() {
        let d = blobs(300, 6.0, 9);
        let v = SimilarityView::implicit_all(&d);
        let cfg = BuildConfig {
            balance_enforced: false,
            ..BuildConfig::new(Rule::TwoMeans, 4)
        };
        let plan = split_2means(&v, &cfg).unwrap();
        let h = plan.hyperplane.as_ref().unwrap();
        // Recover the centers from the sides and compare memberships.
        let mean = |ids: &[usize]| {
            let mut c = vec![0.0; d.dim()];
            for &i in ids {
                c.iter_mut().zip(d.row(i)).for_each(|(a, b)| *a += b / ids.len() as f64);
            }
            c
        };
        let c2 = mean(&plan.left_ids);
        let c1 = mean(&plan.right_ids);
        for x in d.rows() {
            let by_plane = h.goes_left(x);
            let by_dist = sq_dist(x, &c2) <= sq_dist(x, &c1);
            assert_eq!(by_plane, by_dist);
        }
        assert_eq!(misclustered(&plan, d.labels().unwrap()), 0);
    }

    #[test]
    fn two_means_identical_points_fall_back() {
        let d = VectorDataset::from_rows(&vec![vec![1.0, 0.0]; 5], None, true).unwrap();
        let v = SimilarityView::implicit_all(&d);
        let plan = split_2means(&v, &BuildConfig::new(Rule::TwoMeans, 0)).unwrap();
        assert_eq!(plan.left_ids, vec![0, 1]);
        assert_eq!(plan.threshold(), Some(0.0));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn every_rule_partitions_within_band(
            rows in prop::collection::vec(prop::collection::vec(-1.0f64..1.0, 4), 2..60),
            seed in any::<u64>(),
            rule_ix in 0usize..4,
        ) {
            prop_assume!(rows.iter().all(|r| r.iter().map(|x| x * x).sum::<f64>() > 1e-6));
            let d = VectorDataset::from_rows(&rows, None, true).unwrap();
            let v = SimilarityView::implicit_all(&d);
            let plan = split(&v, &BuildConfig::new(Rule::ALL[rule_ix], seed)).unwrap();
            assert_partition(&plan, &v);
            assert_consistent(&plan, &d);
            let m = d.n();
            prop_assert!(plan.left_ids.len().min(plan.right_ids.len()) >= m.div_ceil(3));
        }
    }
}
