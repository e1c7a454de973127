//! Input designs: simple random, scrambled Sobol', full factorial; marginal
//! transforms; pairwise dependence injection.

mod directions;
mod sobol;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::normal::{inverse_normal_cdf, normal_cdf};
use crate::types::{InputSpec, MarginalDistribution, Matrix};

pub use sobol::{sobol_points, SobolSequence, MAX_SOBOL_DIM};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sampler {
    Mc,
    Qmc,
    Ffd,
}

impl std::str::FromStr for Sampler {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mc" => Ok(Sampler::Mc),
            "qmc" => Ok(Sampler::Qmc),
            "ffd" => Ok(Sampler::Ffd),
            other => Err(Error::InvalidArgument(format!(
                "unknown sampler `{other}` (expected mc, qmc or ffd)"
            ))),
        }
    }
}

impl std::fmt::Display for Sampler {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Sampler::Mc => "mc",
            Sampler::Qmc => "qmc",
            Sampler::Ffd => "ffd",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplingPlan {
    pub method: Sampler,
    pub n: usize,
    pub seed: u64,
    #[serde(default = "default_scramble")]
    pub scramble: bool,
}

fn default_scramble() -> bool {
    true
}

impl SamplingPlan {
    pub fn new(method: Sampler, n: usize, seed: u64) -> Self {
        SamplingPlan {
            method,
            n,
            seed,
            scramble: true,
        }
    }

    /// Unit-hypercube design with `dim` columns. FFD yields `L^dim <= n`
    /// rows.
    pub fn unit_points(&self, dim: usize) -> Result<Matrix> {
        if self.n < 2 {
            return Err(Error::InvalidArgument(format!(
                "sample size must be >= 2, got {}",
                self.n
            )));
        }
        match self.method {
            Sampler::Mc => random_points(dim, self.n, self.seed),
            Sampler::Qmc => sobol_points(dim, self.n, self.scramble, self.seed),
            Sampler::Ffd => full_factorial(dim, self.n),
        }
    }
}

/// I.i.d. uniforms on [0, 1) from a seeded ChaCha8 stream, row-major.
pub fn random_points(dim: usize, n: usize, seed: u64) -> Result<Matrix> {
    if n == 0 || dim == 0 {
        return Err(Error::InvalidArgument(
            "random_points: n and dim must be >= 1".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data: Vec<f64> = (0..n * dim).map(|_| rng.random::<f64>()).collect();
    Matrix::from_row_major(n, dim, data)
}

/// Largest `L` with `L^dims <= budget`.
fn integer_root(budget: usize, dims: u32) -> usize {
    let mut l = (budget as f64).powf(1.0 / dims as f64).floor() as usize;
    let fits = |l: usize| {
        (l as u128)
            .checked_pow(dims)
            .is_some_and(|p| p <= budget as u128)
    };
    while l > 0 && !fits(l) {
        l -= 1;
    }
    while fits(l + 1) {
        l += 1;
    }
    l
}

/// Full factorial grid at cell centres `(2i+1)/(2L)`, lexicographic order
/// (first column slowest).
pub fn full_factorial(dims: usize, n_budget: usize) -> Result<Matrix> {
    if dims == 0 {
        return Err(Error::InvalidArgument(
            "full_factorial: dims must be >= 1".into(),
        ));
    }
    let levels = integer_root(n_budget, dims as u32);
    if levels < 2 {
        return Err(Error::FfdTooSmall {
            dims,
            budget: n_budget,
        });
    }
    let n = levels.pow(dims as u32);
    let centres: Vec<f64> = (0..levels)
        .map(|i| (2 * i + 1) as f64 / (2 * levels) as f64)
        .collect();
    let mut m = Matrix::zeros(n, dims);
    for r in 0..n {
        let mut rem = r;
        for c in (0..dims).rev() {
            m.set(r, c, centres[rem % levels]);
            rem /= levels;
        }
    }
    Ok(m)
}

/// Inverse-CDF transform of one unit value through a marginal.
pub fn transform_value(u: f64, dist: &MarginalDistribution) -> f64 {
    match dist {
        MarginalDistribution::Uniform { lo, hi } => lo + u * (hi - lo),
        MarginalDistribution::Normal { mean, sd } => mean + sd * inverse_normal_cdf(u),
        MarginalDistribution::Categorical { probabilities, .. } => {
            let mut acc = 0.0;
            for (i, p) in probabilities.iter().enumerate() {
                acc += p;
                if u < acc {
                    return i as f64;
                }
            }
            (probabilities.len() - 1) as f64
        }
    }
}

/// Maps a unit-hypercube design through each column's marginal.
pub fn transform_marginals(points: &Matrix, specs: &[InputSpec]) -> Result<Matrix> {
    if points.cols() != specs.len() {
        return Err(Error::InvalidArgument(format!(
            "{} design columns for {} inputs",
            points.cols(),
            specs.len()
        )));
    }
    let mut out = points.clone();
    for r in 0..points.rows() {
        for (c, spec) in specs.iter().enumerate() {
            out.set(r, c, transform_value(points.get(r, c), &spec.distribution));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CouplingSign {
    Positive,
    Negative,
}

/// Dependence imposed between two input columns.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DependencePlan {
    /// Gaussian copula with correlation parameter `rho`.
    Copula { a: usize, b: usize, rho: f64 },
    /// On a random fraction of rows, B copies A (or its reflection).
    EqualPortion {
        a: usize,
        b: usize,
        fraction: f64,
        sign: CouplingSign,
    },
}

impl DependencePlan {
    pub fn pair(&self) -> (usize, usize) {
        match *self {
            DependencePlan::Copula { a, b, .. } | DependencePlan::EqualPortion { a, b, .. } => {
                (a, b)
            }
        }
    }

    pub fn validate(&self, k: usize) -> Result<()> {
        let (a, b) = self.pair();
        if a == b || a >= k || b >= k {
            return Err(Error::InvalidArgument(format!(
                "dependence pair ({a}, {b}) invalid for {k} inputs"
            )));
        }
        match *self {
            DependencePlan::Copula { rho, .. } if !(-1.0..=1.0).contains(&rho) => Err(
                Error::InvalidArgument(format!("copula rho {rho} outside [-1, 1]")),
            ),
            DependencePlan::EqualPortion { fraction, .. } if !(0.0..=1.0).contains(&fraction) => {
                Err(Error::InvalidArgument(format!(
                    "equal-portion fraction {fraction} outside [0, 1]"
                )))
            }
            _ => Ok(()),
        }
    }
}

fn uniform_bounds(spec: &InputSpec) -> Result<(f64, f64)> {
    match spec.distribution {
        MarginalDistribution::Uniform { lo, hi } => Ok((lo, hi)),
        _ => Err(Error::NonUniformDependence),
    }
}

/// Rewrites column `b` of an input matrix so that it depends on column `a`.
/// Column `a` is never modified.
pub fn apply_dependence(
    matrix: &Matrix,
    specs: &[InputSpec],
    plan: &DependencePlan,
    seed: u64,
) -> Result<Matrix> {
    if matrix.cols() != specs.len() {
        return Err(Error::InvalidArgument(format!(
            "{} matrix columns for {} inputs",
            matrix.cols(),
            specs.len()
        )));
    }
    plan.validate(specs.len())?;
    let (a, b) = plan.pair();
    let (lo_a, hi_a) = uniform_bounds(&specs[a])?;
    let (lo_b, hi_b) = uniform_bounds(&specs[b])?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = matrix.clone();
    let n = matrix.rows();
    match *plan {
        DependencePlan::Copula { rho, .. } => {
            let tail = (1.0 - rho * rho).max(0.0).sqrt();
            for r in 0..n {
                let u_a = (matrix.get(r, a) - lo_a) / (hi_a - lo_a);
                let z_a = inverse_normal_cdf(u_a);
                let eps: f64 = rng.sample(StandardNormal);
                let u_b = normal_cdf(rho * z_a + tail * eps);
                out.set(r, b, lo_b + u_b * (hi_b - lo_b));
            }
        }
        DependencePlan::EqualPortion { fraction, sign, .. } => {
            let count = (fraction * n as f64).round() as usize;
            let same_range = lo_a == lo_b && hi_a == hi_b;
            for r in index::sample(&mut rng, n, count.min(n)).into_iter() {
                let x = matrix.get(r, a);
                let v = match (sign, same_range) {
                    (CouplingSign::Positive, true) => x,
                    (CouplingSign::Negative, true) => (lo_b + hi_b) - x,
                    (CouplingSign::Positive, false) => {
                        lo_b + (x - lo_a) / (hi_a - lo_a) * (hi_b - lo_b)
                    }
                    (CouplingSign::Negative, false) => {
                        lo_b + (hi_a - x) / (hi_a - lo_a) * (hi_b - lo_b)
                    }
                };
                out.set(r, b, v);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::{mean, pearson};

    #[test]
    fn random_points_deterministic_and_uniform() {
        let a = random_points(3, 1000, 42).unwrap();
        assert_eq!(a, random_points(3, 1000, 42).unwrap());
        assert_ne!(a, random_points(3, 1000, 43).unwrap());
        let big = random_points(1, 100_000, 5).unwrap();
        assert!((mean(big.as_slice()) - 0.5).abs() < 0.005);
        let two = random_points(2, 100_000, 6).unwrap();
        assert!(pearson(&two.column(0), &two.column(1)).unwrap().abs() < 0.01);
    }

    #[test]
    fn ffd_cell_centres() {
        let m = full_factorial(1, 3).unwrap();
        assert_eq!(m.column(0), vec![1.0 / 6.0, 3.0 / 6.0, 5.0 / 6.0]);
        let m = full_factorial(2, 9).unwrap();
        assert_eq!(m.rows(), 9);
        assert_eq!(m.row(0), &[1.0 / 6.0, 1.0 / 6.0]);
        assert_eq!(m.row(1), &[1.0 / 6.0, 0.5]);
        assert_eq!(m.row(3), &[0.5, 1.0 / 6.0]);
        for c in 0..2 {
            let mut vals = m.column(c);
            vals.sort_by(f64::total_cmp);
            vals.dedup();
            assert_eq!(vals, vec![1.0 / 6.0, 0.5, 5.0 / 6.0]);
        }
        assert_eq!(full_factorial(6, 10_000).unwrap().rows(), 4096);
        assert!(matches!(
            full_factorial(6, 63),
            Err(Error::FfdTooSmall { .. })
        ));
        assert_eq!(full_factorial(3, 64).unwrap().rows(), 64);
    }

    #[test]
    fn marginal_transforms() {
        assert_eq!(
            transform_value(
                0.5,
                &MarginalDistribution::Normal {
                    mean: 250.0,
                    sd: 200.0
                }
            ),
            250.0
        );
        assert_eq!(
            transform_value(0.5, &MarginalDistribution::Uniform { lo: 3.0, hi: 5.0 }),
            4.0
        );
        let z = transform_value(0.975, &MarginalDistribution::Normal { mean: 0.0, sd: 1.0 });
        assert!((z - 1.959964).abs() < 1e-6);
        let cat = MarginalDistribution::Categorical {
            levels: vec!["a".into(), "b".into(), "c".into()],
            probabilities: vec![0.2, 0.5, 0.3],
        };
        assert_eq!(transform_value(0.0, &cat), 0.0);
        assert_eq!(transform_value(0.19, &cat), 0.0);
        assert_eq!(transform_value(0.2, &cat), 1.0);
        assert_eq!(transform_value(0.71, &cat), 2.0);
        assert_eq!(transform_value(0.999_999, &cat), 2.0);
    }

    #[test]
    fn normal_endpoints_clamped() {
        let d = MarginalDistribution::Normal {
            mean: 10.0,
            sd: 2.0,
        };
        assert_eq!(transform_value(0.0, &d), 10.0 - 2.0 * 8.2);
        assert_eq!(transform_value(1.0, &d), 10.0 + 2.0 * 8.2);
    }

    fn two_uniform() -> Vec<InputSpec> {
        vec![
            InputSpec::uniform("A", 0.0, 5.0),
            InputSpec::uniform("B", 0.0, 5.0),
        ]
    }

    fn base(n: usize, seed: u64) -> Matrix {
        transform_marginals(&random_points(2, n, seed).unwrap(), &two_uniform()).unwrap()
    }

    #[test]
    fn copula_zero_is_independent() {
        let m = base(100_000, 1);
        let d = apply_dependence(
            &m,
            &two_uniform(),
            &DependencePlan::Copula {
                a: 0,
                b: 1,
                rho: 0.0,
            },
            2,
        )
        .unwrap();
        assert!(pearson(&d.column(0), &d.column(1)).unwrap().abs() < 0.01);
        assert_eq!(d.column(0), m.column(0));
    }

    #[test]
    fn equal_portion_full_coupling() {
        let m = base(1000, 3);
        let plan = DependencePlan::EqualPortion {
            a: 0,
            b: 1,
            fraction: 1.0,
            sign: CouplingSign::Positive,
        };
        let d = apply_dependence(&m, &two_uniform(), &plan, 4).unwrap();
        assert_eq!(d.column(0), d.column(1));
        assert_eq!(pearson(&d.column(0), &d.column(1)).unwrap(), 1.0);
        let neg = DependencePlan::EqualPortion {
            a: 0,
            b: 1,
            fraction: 1.0,
            sign: CouplingSign::Negative,
        };
        let d = apply_dependence(&m, &two_uniform(), &neg, 4).unwrap();
        for r in 0..d.rows() {
            assert!((d.get(r, 0) + d.get(r, 1) - 5.0).abs() < 1e-12);
        }
    }

    #[test]
    fn equal_portion_fraction_controls_share() {
        let m = base(10_000, 8);
        let plan = DependencePlan::EqualPortion {
            a: 0,
            b: 1,
            fraction: 0.3,
            sign: CouplingSign::Positive,
        };
        let d = apply_dependence(&m, &two_uniform(), &plan, 9).unwrap();
        let same = (0..d.rows())
            .filter(|&r| d.get(r, 0) == d.get(r, 1))
            .count();
        assert_eq!(same, 3000);
    }

    #[test]
    fn dependence_rejects_non_uniform_and_bad_plans() {
        let specs = vec![
            InputSpec::normal("A", 0.0, 1.0),
            InputSpec::uniform("B", 0.0, 1.0),
        ];
        let m = Matrix::zeros(4, 2);
        let plan = DependencePlan::Copula {
            a: 0,
            b: 1,
            rho: 0.5,
        };
        assert!(matches!(
            apply_dependence(&m, &specs, &plan, 0),
            Err(Error::NonUniformDependence)
        ));
        let same = DependencePlan::Copula {
            a: 1,
            b: 1,
            rho: 0.5,
        };
        assert!(apply_dependence(&m, &two_uniform(), &same, 0).is_err());
        let wild = DependencePlan::Copula {
            a: 0,
            b: 1,
            rho: 1.5,
        };
        assert!(apply_dependence(&m, &two_uniform(), &wild, 0).is_err());
    }
}
