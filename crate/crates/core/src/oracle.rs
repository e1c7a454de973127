//! Pick-freeze reference estimator for independent inputs.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::benchmarks::ModelId;
use crate::error::{Error, Result};
use crate::sampling::{random_points, sobol_points, transform_marginals, Sampler, MAX_SOBOL_DIM};
use crate::stats::{mean, pairwise_sum_by, variance};
use crate::types::{InputSpec, Matrix};

pub const MIN_BASE_ROWS: usize = 128;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub names: Vec<String>,
    pub first_order: Vec<f64>,
    /// Closed second-order fractions `V_ij^c / V`, symmetric, zero diagonal.
    pub second_order_closed: Vec<Vec<f64>>,
    /// Closed fractions minus both first-order indices.
    pub second_order: Vec<Vec<f64>>,
    pub variance: f64,
    pub base_rows: usize,
    pub evaluations: usize,
}

/// Base matrices and their column-swapped hybrids.
#[derive(Debug, Clone)]
pub struct PickFreezeDesign {
    pub a: Matrix,
    pub b: Matrix,
    /// `a_b[i]`: `a` with column `i` taken from `b`.
    pub a_b: Vec<Matrix>,
    /// `b_a[i]`: `b` with column `i` taken from `a`.
    pub b_a: Vec<Matrix>,
}

impl PickFreezeDesign {
    pub fn new(a: Matrix, b: Matrix) -> Result<Self> {
        if a.rows() != b.rows() || a.cols() != b.cols() {
            return Err(Error::InvalidArgument(
                "base matrices differ in shape".into(),
            ));
        }
        let hybrid = |dst: &Matrix, src: &Matrix, i: usize| {
            let mut m = dst.clone();
            m.set_column(i, &src.column(i));
            m
        };
        let k = a.cols();
        let a_b = (0..k).map(|i| hybrid(&a, &b, i)).collect();
        let b_a = (0..k).map(|i| hybrid(&b, &a, i)).collect();
        Ok(PickFreezeDesign { a, b, a_b, b_a })
    }

    pub fn evaluations(&self) -> usize {
        self.a.rows() * (2 * self.a.cols() + 2)
    }
}

/// Jansen first-order and closed second-order indices of `model` under
/// independent `specs`, from `n` base rows (`n(2k + 2)` evaluations).
pub fn estimate_sobol(
    model: &ModelId,
    specs: &[InputSpec],
    n: usize,
    seed: u64,
    sampler: Sampler,
) -> Result<OracleReport> {
    let k = specs.len();
    if n < MIN_BASE_ROWS {
        return Err(Error::InvalidArgument(format!(
            "pick-freeze needs at least {MIN_BASE_ROWS} base rows, got {n}"
        )));
    }
    if k < 2 {
        return Err(Error::InvalidArgument(
            "pick-freeze needs at least 2 inputs".into(),
        ));
    }
    if k != model.arity() {
        return Err(Error::ArityMismatch {
            model: model.to_string(),
            expected: model.arity(),
            got: k,
        });
    }
    let unit = match sampler {
        Sampler::Qmc => {
            if 2 * k > MAX_SOBOL_DIM {
                return Err(Error::DimensionOutOfRange {
                    dim: 2 * k,
                    max: MAX_SOBOL_DIM,
                });
            }
            sobol_points(2 * k, n, true, seed)?
        }
        Sampler::Mc => random_points(2 * k, n, seed)?,
        Sampler::Ffd => {
            return Err(Error::InvalidArgument(
                "pick-freeze supports mc and qmc sampling only".into(),
            ))
        }
    };
    let first: Vec<usize> = (0..k).collect();
    let second: Vec<usize> = (k..2 * k).collect();
    let a = transform_marginals(&unit.select_columns(&first), specs)?;
    let b = transform_marginals(&unit.select_columns(&second), specs)?;
    let design = PickFreezeDesign::new(a, b)?;
    let report = estimate_from_design(model, &design)?;
    Ok(OracleReport {
        names: specs.iter().map(|s| s.name.clone()).collect(),
        ..report
    })
}

pub fn estimate_from_design(model: &ModelId, design: &PickFreezeDesign) -> Result<OracleReport> {
    let n = design.a.rows();
    let k = design.a.cols();
    let f_a = model.evaluate(&design.a)?;
    let f_b = model.evaluate(&design.b)?;
    let f_ab: Vec<Vec<f64>> = design
        .a_b
        .par_iter()
        .map(|m| model.evaluate(m))
        .collect::<Result<_>>()?;
    let f_ba: Vec<Vec<f64>> = design
        .b_a
        .par_iter()
        .map(|m| model.evaluate(m))
        .collect::<Result<_>>()?;

    let both: Vec<f64> = f_a.iter().chain(&f_b).copied().collect();
    let f0 = mean(&both);
    let v = variance(&both);
    if !(v > 0.0 && v.is_finite()) {
        return Err(Error::InsufficientSample);
    }

    let first_order: Vec<f64> = (0..k)
        .map(|i| {
            let half_sq = pairwise_sum_by(n, &|r| {
                let d = f_b[r] - f_ab[i][r];
                d * d
            }) / (2.0 * n as f64);
            (v - half_sq) / v
        })
        .collect();

    let mut closed = vec![vec![0.0; k]; k];
    let mut second = vec![vec![0.0; k]; k];
    for i in 0..k {
        for j in i + 1..k {
            // centred products; same limit as the raw cross moment minus f0^2
            let cross = pairwise_sum_by(n, &|r| (f_ba[i][r] - f0) * (f_ab[j][r] - f0)) / n as f64;
            let c = cross / v;
            let s = c - first_order[i] - first_order[j];
            closed[i][j] = c;
            closed[j][i] = c;
            second[i][j] = s;
            second[j][i] = s;
        }
    }

    Ok(OracleReport {
        names: (1..=k).map(|i| format!("x{i}")).collect(),
        first_order,
        second_order_closed: closed,
        second_order: second,
        variance: v,
        base_rows: n,
        evaluations: design.evaluations(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchmarks::{ishigami_analytic_indices, toy_default_specs, ToyLaw};

    #[test]
    fn design_shape() {
        let a = Matrix::from_row_major(2, 3, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        let b = Matrix::from_row_major(2, 3, vec![-1.0, -2.0, -3.0, -4.0, -5.0, -6.0]).unwrap();
        let d = PickFreezeDesign::new(a, b).unwrap();
        assert_eq!(d.a_b[1].row(0), &[1.0, -2.0, 3.0]);
        assert_eq!(d.b_a[2].row(1), &[-4.0, -5.0, 6.0]);
        assert_eq!(d.evaluations(), 2 * 8);
        // 1500 base rows on six inputs is a 21000-run budget
        assert_eq!(1500 * (2 * 6 + 2), 21000);
    }

    #[test]
    fn toy_small_budget() {
        let specs = toy_default_specs(ToyLaw::Normal);
        let r = estimate_sobol(&ModelId::ToyPortfolio, &specs, 128, 3, Sampler::Qmc).unwrap();
        assert_eq!(r.evaluations, 1792);
        assert!(
            (r.first_order[0] - 0.36).abs() <= 0.05,
            "{:?}",
            r.first_order
        );
    }

    #[test]
    fn ishigami_first_order() {
        let model = ModelId::ishigami_default();
        let r = estimate_sobol(&model, &model.default_specs(), 1 << 13, 1, Sampler::Qmc).unwrap();
        let exact = ishigami_analytic_indices(7.0, 0.1).unwrap();
        assert!(
            (r.first_order[0] - exact.s1).abs() <= 0.01,
            "{:?}",
            r.first_order
        );
        assert!((r.first_order[1] - exact.s2).abs() <= 0.02);
        assert!(r.first_order[2].abs() <= 0.02);
        assert!((r.second_order[0][2] - exact.s13).abs() <= 0.05);
    }

    #[test]
    fn additive_has_no_interaction() {
        let model = ModelId::TwoFactorAdditive;
        for (sampler, n) in [(Sampler::Qmc, 4096), (Sampler::Mc, 1 << 16)] {
            let r = estimate_sobol(&model, &model.default_specs(), n, 7, sampler).unwrap();
            assert!(
                r.second_order[0][1].abs() <= 0.02,
                "{sampler}: {:?}",
                r.second_order
            );
        }
    }

    #[test]
    fn independent_inputs_stay_in_range() {
        for model in [
            ModelId::ToyPortfolio,
            ModelId::ishigami_default(),
            ModelId::TwoFactorAdditive,
            ModelId::TwoFactorMultiplicative,
            ModelId::NestedInteraction,
        ] {
            let r = estimate_sobol(&model, &model.default_specs(), 2048, 5, Sampler::Qmc).unwrap();
            assert!(
                r.first_order.iter().all(|s| (-0.05..=1.05).contains(s)),
                "{model}"
            );
            assert!(r.first_order.iter().sum::<f64>() <= 1.05, "{model}");
        }
    }

    #[test]
    fn nested_pairs_all_interact() {
        let model = ModelId::NestedInteraction;
        let r = estimate_sobol(&model, &model.default_specs(), 1 << 14, 2, Sampler::Qmc).unwrap();
        for i in 0..3 {
            for j in i + 1..3 {
                assert!(r.second_order[i][j] >= 0.05, "{:?}", r.second_order);
            }
        }
    }

    #[test]
    fn rejections() {
        let toy = ModelId::ToyPortfolio;
        let specs = toy.default_specs();
        assert!(estimate_sobol(&toy, &specs, 64, 0, Sampler::Qmc).is_err());
        assert!(estimate_sobol(&toy, &specs[..3], 256, 0, Sampler::Qmc).is_err());
        assert!(estimate_sobol(&toy, &specs, 256, 0, Sampler::Ffd).is_err());
    }
}
