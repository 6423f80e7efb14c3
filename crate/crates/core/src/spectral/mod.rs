//! Eigenvector machinery: a dense solver for the exact rule, seeded power
//! iteration for the approximate one, and the sweep cut both feed.

pub mod cheeger;
pub mod dense;
pub mod power;
pub mod sweep;

pub use cheeger::{cheeger_check, exhaustive_conductance, normalized_adjacency, CheegerReport, ConductanceMethod};
pub use dense::{canonical_sign, symmetric_eigen, SymmetricEigen};
pub use power::{
    rayleigh_quotient, second_eigenvector_deflated, top_eigenvector, ExplicitOperator, ImplicitOperator, PowerConfig,
    PsdOperator,
};
pub use sweep::{sweep_cut, BalanceBand, SweepResult};

use crate::error::{Error, Result};
use crate::similarity::SimilarityView;

/// `F = Aᵀ D⁻¹ A` of an implicit view, row-major `d × d`.
pub fn normalized_gram(view: &SimilarityView<'_>) -> Result<Vec<f64>> {
    if !view.is_implicit() {
        return Err(Error::IncompatibleRule {
            rule: "EV",
            mode: "explicit",
        });
    }
    let d = view.dataset().expect("implicit view").dim();
    let mut f = vec![0.0; d * d];
    for (p, deg) in view.scaling_degrees().iter().enumerate() {
        let x = view.point(p);
        for a in 0..d {
            let xa = x[a] / deg;
            if xa == 0.0 {
                continue;
            }
            for b in 0..d {
                f[a * d + b] += xa * x[b];
            }
        }
    }
    for a in 0..d {
        for b in a + 1..d {
            let s = 0.5 * (f[a * d + b] + f[b * d + a]);
            f[a * d + b] = s;
            f[b * d + a] = s;
        }
    }
    Ok(f)
}

/// Eigenvector of the second-largest eigenvalue of `F = Aᵀ D⁻¹ A`.
pub fn exact_second_right_singular(view: &SimilarityView<'_>) -> Result<Vec<f64>> {
    let d = view.dataset().map(|ds| ds.dim()).unwrap_or(0);
    if view.len() < 2 || d < 2 {
        return Err(Error::InvalidParams(format!(
            "exact eigenvector needs m >= 2 and d >= 2 (got m = {}, d = {d})",
            view.len()
        )));
    }
    let f = normalized_gram(view)?;
    let mut eig = symmetric_eigen(&f, d)?;
    Ok(eig.vectors.swap_remove(1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{dot, VectorDataset};
    use rand::Rng;

    #[test]
    fn axis_rows_give_diagonal_gram() {
        let d = VectorDataset::from_rows(
            &[vec![1.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0], vec![0.0, 1.0]],
            None,
            true,
        )
        .unwrap();
        let v = SimilarityView::implicit_all(&d);
        let f = normalized_gram(&v).unwrap();
        assert_eq!(f, vec![1.0, 0.0, 0.0, 1.0]);
        let h = exact_second_right_singular(&v).unwrap();
        assert_eq!(h, vec![0.0, 1.0]);
    }

    #[test]
    fn orthogonal_pair_second_vector_is_orthogonal_to_first() {
        let d = VectorDataset::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]], None, true).unwrap();
        let v = SimilarityView::implicit_all(&d);
        let f = normalized_gram(&v).unwrap();
        let e = symmetric_eigen(&f, 2).unwrap();
        assert!((e.values[0] - 1.0).abs() < 1e-12 && (e.values[1] - 1.0).abs() < 1e-12);
        assert!(dot(&e.vectors[0], &e.vectors[1]).abs() < 1e-12);
    }

    #[test]
    fn exact_and_power_agree_on_random_data() {
        let mut rng = crate::rng::rng_from(21);
        let rows: Vec<Vec<f64>> = (0..20)
            .map(|i| {
                let mut r: Vec<f64> = (0..5).map(|_| rng.random_range(0.0..0.3)).collect();
                r[i % 2] += 1.0;
                r
            })
            .collect();
        let d = VectorDataset::from_rows(&rows, None, true).unwrap();
        let v = SimilarityView::implicit_all(&d);
        let exact = exact_second_right_singular(&v).unwrap();
        let cfg = PowerConfig {
            iterations: Some(2000),
            ..PowerConfig::with_seed(3)
        };
        let top = top_eigenvector(&v, &cfg).unwrap();
        let approx = second_eigenvector_deflated(&v, &top, &cfg).unwrap();
        assert!(dot(&exact, &approx).abs() >= 0.999);
    }
}
