//! Sweep cut: sort a coordinate vector and keep the prefix of smallest
//! conductance inside a balance band.

use crate::dataset::dot;
use crate::error::{Error, Result};
use crate::similarity::SimilarityView;

/// Relative tolerance under which two conductances count as tied.
const TIE_TOLERANCE: f64 = 1e-12;

/// Allowed prefix sizes as fractions of the subset size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BalanceBand {
    pub lo: f64,
    pub hi: f64,
}

impl BalanceBand {
    pub const FULL: BalanceBand = BalanceBand { lo: 0.0, hi: 1.0 };
    pub const THIRDS: BalanceBand = BalanceBand {
        lo: 1.0 / 3.0,
        hi: 2.0 / 3.0,
    };

    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(0.0 <= lo && lo < hi && hi <= 1.0) {
            return Err(Error::InvalidParams(format!(
                "balance band ({lo}, {hi}) must satisfy 0 <= lo < hi <= 1"
            )));
        }
        Ok(BalanceBand { lo, hi })
    }

    pub fn for_balance(enforced: bool) -> Self {
        if enforced {
            Self::THIRDS
        } else {
            Self::FULL
        }
    }

    /// Inclusive range of prefix sizes `j` for `m` points, clamped to
    /// `[1, m-1]`. `None` when the band holds no proper prefix.
    pub fn range(&self, m: usize) -> Option<(usize, usize)> {
        let lo = ((self.lo * m as f64) - 1e-9).ceil().max(1.0) as usize;
        let hi = ((self.hi * m as f64) + 1e-9).floor() as usize;
        let hi = hi.min(m.saturating_sub(1));
        (lo <= hi).then_some((lo, hi))
    }

    /// Moves `j` into the band.
    pub fn clamp(&self, m: usize, j: usize) -> usize {
        match self.range(m) {
            Some((lo, hi)) => j.clamp(lo, hi),
            None => j.clamp(1, m.saturating_sub(1).max(1)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub coordinates: Vec<f64>,
    /// Active positions sorted by ascending coordinate (stable).
    pub order: Vec<usize>,
    pub best_index: usize,
    pub best_conductance: f64,
    /// Global ids of the chosen prefix.
    pub left_ids: Vec<usize>,
    /// True when every coordinate was equal and the median fallback was used.
    pub degenerate: bool,
}

impl SweepResult {
    /// Active positions of the chosen prefix.
    pub fn left_positions(&self) -> &[usize] {
        &self.order[..self.best_index]
    }

    pub fn right_positions(&self) -> &[usize] {
        &self.order[self.best_index..]
    }
}

fn better(candidate: (f64, usize), best: (f64, usize), m: usize) -> bool {
    let (g, j) = candidate;
    let (bg, bj) = best;
    let scale = g.abs().max(bg.abs());
    if (g - bg).abs() <= TIE_TOLERANCE * scale {
        let imbalance = |j: usize| (2 * j).abs_diff(m);
        (imbalance(j), j) < (imbalance(bj), bj)
    } else {
        g < bg
    }
}

pub fn sweep_cut(view: &SimilarityView<'_>, coordinates: &[f64], band: BalanceBand) -> Result<SweepResult> {
    let m = view.len();
    if coordinates.len() != m {
        return Err(Error::Dimension {
            expected: m,
            found: coordinates.len(),
        });
    }
    if m < 2 {
        return Err(Error::InvalidParams("sweep needs at least two points".into()));
    }
    let (lo, hi) = band.range(m).ok_or(Error::NoValidPrefix)?;
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| coordinates[a].total_cmp(&coordinates[b]));

    let all_equal = coordinates.iter().all(|c| c.total_cmp(&coordinates[0]).is_eq());
    let degrees = view.degrees();
    let total: f64 = degrees.iter().sum();

    let (best_index, degenerate) = if all_equal {
        (band.clamp(m, m / 2), true)
    } else {
        let mut best: Option<(f64, usize)> = None;
        let mut consider = |j: usize, cut: f64, vol_left: f64| {
            let denom = vol_left.min(total - vol_left);
            if !(denom > 0.0) {
                return;
            }
            let g = cut.max(0.0) / denom;
            if best.is_none_or(|b| better((g, j), b, m)) {
                best = Some((g, j));
            }
        };
        let mut vol_left = 0.0;
        if view.is_implicit() {
            let row_sum = view.row_sum().expect("implicit view");
            let mut left_sum = vec![0.0; row_sum.len()];
            for (step, &p) in order[..hi].iter().enumerate() {
                left_sum.iter_mut().zip(view.point(p)).for_each(|(s, x)| *s += x);
                vol_left += degrees[p];
                let j = step + 1;
                if j >= lo {
                    let cut = dot(&left_sum, row_sum) - dot(&left_sum, &left_sum);
                    consider(j, cut, vol_left);
                }
            }
        } else {
            let mut to_left = vec![0.0; m];
            let mut cut = 0.0;
            for (step, &p) in order[..hi].iter().enumerate() {
                cut += degrees[p] - 2.0 * to_left[p];
                vol_left += degrees[p];
                for (u, t) in to_left.iter_mut().enumerate() {
                    *t += view.weight_local(u, p);
                }
                let j = step + 1;
                if j >= lo {
                    consider(j, cut, vol_left);
                }
            }
        }
        (best.ok_or(Error::NoValidPrefix)?.1, false)
    };

    let mut mask = vec![false; m];
    for &p in &order[..best_index] {
        mask[p] = true;
    }
    let best_conductance = match view.conductance_mask(&mask) {
        Ok(g) => g,
        Err(Error::ZeroDenominator) => f64::INFINITY,
        Err(e) => return Err(e),
    };
    let active = view.active();
    let left_ids = order[..best_index].iter().map(|&p| active[p]).collect();
    Ok(SweepResult {
        coordinates: coordinates.to_vec(),
        order,
        best_index,
        best_conductance,
        left_ids,
        degenerate,
    })
}
