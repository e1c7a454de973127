//! End-to-end workflows: dataset generation, estimator comparison and
//! dependence sweeps.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::benchmarks::{ishigami_analytic_indices, ModelId};
use crate::binning::{analyze, conservation_check, BinningConfig};
use crate::error::{Error, Result};
use crate::oracle::{estimate_sobol, OracleReport};
use crate::sampling::{
    apply_dependence, transform_marginals, CouplingSign, DependencePlan, Sampler, SamplingPlan,
};
use crate::stats::{is_effectively_constant, pearson, spearman};
use crate::types::{Dataset, InputSpec, Matrix, SensitivityReport};

/// Seed of the `i`-th dependence injection for a run seeded with `seed`.
fn dependence_seed(seed: u64, i: usize) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(i as u64 + 1)
}

/// Inputs drawn by `plan`, mapped through `specs`, then coupled by each
/// `dependence` plan in order.
pub fn generate_inputs(
    specs: &[InputSpec],
    plan: &SamplingPlan,
    dependence: &[DependencePlan],
) -> Result<Matrix> {
    let unit = plan.unit_points(specs.len())?;
    let mut x = transform_marginals(&unit, specs)?;
    for (i, d) in dependence.iter().enumerate() {
        x = apply_dependence(&x, specs, d, dependence_seed(plan.seed, i))?;
    }
    Ok(x)
}

pub fn generate_dataset(
    model: &ModelId,
    specs: &[InputSpec],
    plan: &SamplingPlan,
    dependence: &[DependencePlan],
) -> Result<Dataset> {
    let x = generate_inputs(specs, plan, dependence)?;
    let y = model.evaluate(&x)?;
    Dataset::new(x, y, specs.to_vec())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexDelta {
    pub name: String,
    pub binning: f64,
    pub reference: f64,
    /// `binning - reference`.
    pub delta: f64,
}

impl IndexDelta {
    fn new(name: String, binning: f64, reference: f64) -> Self {
        IndexDelta {
            name,
            binning,
            reference,
            delta: binning - reference,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareSettings {
    pub binning_plan: SamplingPlan,
    pub binning: BinningConfig,
    pub oracle_base_rows: usize,
    pub oracle_sampler: Sampler,
    pub oracle_seed: u64,
}

impl CompareSettings {
    /// Binning on 1000 QMC rows against a 1500-row pick-freeze design.
    pub fn new(seed: u64) -> Self {
        CompareSettings {
            binning_plan: SamplingPlan::new(Sampler::Qmc, 1000, seed),
            binning: BinningConfig::default(),
            oracle_base_rows: 1500,
            oracle_sampler: Sampler::Qmc,
            oracle_seed: seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub model: ModelId,
    pub binning: SensitivityReport,
    pub oracle: OracleReport,
    pub first_order: Vec<IndexDelta>,
    pub second_order: Vec<IndexDelta>,
    /// Deltas against closed-form values, where the model has them.
    pub analytic: Option<Vec<IndexDelta>>,
    pub binning_evaluations: usize,
    pub oracle_evaluations: usize,
}

/// Runs both estimators on `model` and reports per-index differences.
pub fn compare(
    model: &ModelId,
    specs: &[InputSpec],
    dependence: &[DependencePlan],
    settings: &CompareSettings,
) -> Result<Comparison> {
    if !dependence.is_empty() {
        return Err(Error::InvalidArgument(
            "oracle requires independent inputs".into(),
        ));
    }
    let ds = generate_dataset(model, specs, &settings.binning_plan, &[])?;
    let binning = analyze(&ds, &settings.binning)?;
    let oracle = estimate_sobol(
        model,
        specs,
        settings.oracle_base_rows,
        settings.oracle_seed,
        settings.oracle_sampler,
    )?;
    let names = &binning.names;
    let first_order = (0..names.len())
        .map(|i| {
            IndexDelta::new(
                names[i].clone(),
                binning.first_order[i],
                oracle.first_order[i],
            )
        })
        .collect();
    let second_order = binning
        .upper_pairs()
        .into_iter()
        .map(|(i, j, v)| {
            IndexDelta::new(
                format!("{}:{}", names[i], names[j]),
                v,
                oracle.second_order[i][j],
            )
        })
        .collect();
    let analytic = match *model {
        ModelId::Ishigami { a, b } if specs == model.default_specs().as_slice() => {
            let exact = ishigami_analytic_indices(a, b)?;
            let s = &binning.first_order;
            Some(vec![
                IndexDelta::new(names[0].clone(), s[0], exact.s1),
                IndexDelta::new(names[1].clone(), s[1], exact.s2),
                IndexDelta::new(names[2].clone(), s[2], exact.s3),
                IndexDelta::new(
                    format!("{}:{}", names[0], names[2]),
                    binning.second_order[0][2],
                    exact.s13,
                ),
            ])
        }
        _ => None,
    };
    Ok(Comparison {
        model: *model,
        binning_evaluations: ds.n_rows(),
        oracle_evaluations: oracle.evaluations,
        binning,
        oracle,
        first_order,
        second_order,
        analytic,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DependenceKind {
    Copula,
    EqualPortion,
}

impl DependenceKind {
    /// Plan for a signed grid value: the copula parameter, or the coupled
    /// fraction with its sign.
    pub fn plan(&self, a: usize, b: usize, value: f64) -> DependencePlan {
        match self {
            DependenceKind::Copula => DependencePlan::Copula { a, b, rho: value },
            DependenceKind::EqualPortion => DependencePlan::EqualPortion {
                a,
                b,
                fraction: value.abs(),
                sign: if value < 0.0 {
                    CouplingSign::Negative
                } else {
                    CouplingSign::Positive
                },
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepConfig {
    pub models: Vec<ModelId>,
    pub kinds: Vec<DependenceKind>,
    pub grid: Vec<f64>,
    pub n: usize,
    pub seed: u64,
    pub sampler: Sampler,
    pub binning: BinningConfig,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            models: vec![ModelId::TwoFactorAdditive, ModelId::TwoFactorMultiplicative],
            kinds: vec![DependenceKind::Copula, DependenceKind::EqualPortion],
            grid: vec![-1.0, -0.75, -0.5, -0.25, 0.0, 0.25, 0.5, 0.75, 1.0],
            n: 100_000,
            seed: 1,
            sampler: Sampler::Qmc,
            binning: BinningConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepStatus {
    Ok,
    /// The output collapsed to a constant.
    Degenerate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub model: ModelId,
    pub kind: DependenceKind,
    pub nominal: f64,
    pub pearson: f64,
    pub spearman: f64,
    pub s_a: Option<f64>,
    pub s_b: Option<f64>,
    pub s_ab: Option<f64>,
    pub sum: Option<f64>,
    pub status: SweepStatus,
}

fn sweep_point(
    cfg: &SweepConfig,
    model: &ModelId,
    kind: DependenceKind,
    value: f64,
) -> Result<SweepRow> {
    if model.arity() != 2 {
        return Err(Error::InvalidArgument(format!(
            "dependence sweeps need a two-input model, `{model}` has {}",
            model.arity()
        )));
    }
    let specs = model.default_specs();
    let plan = SamplingPlan::new(cfg.sampler, cfg.n, cfg.seed);
    let x = generate_inputs(&specs, &plan, &[kind.plan(0, 1, value)])?;
    let (a, b) = (x.column(0), x.column(1));
    let pearson_ab = pearson(&a, &b)?;
    let spearman_ab = spearman(&a, &b)?;
    let y = model.evaluate(&x)?;
    let mut row = SweepRow {
        model: *model,
        kind,
        nominal: value,
        pearson: pearson_ab,
        spearman: spearman_ab,
        s_a: None,
        s_b: None,
        s_ab: None,
        sum: None,
        status: SweepStatus::Degenerate,
    };
    if is_effectively_constant(&y) {
        return Ok(row);
    }
    let ds = Dataset::new(x, y, specs)?;
    let report = match analyze(&ds, &cfg.binning) {
        Ok(r) => r,
        Err(Error::ConstantOutput) => return Ok(row),
        Err(e) => return Err(e),
    };
    row.s_a = Some(report.first_order[0]);
    row.s_b = Some(report.first_order[1]);
    row.s_ab = Some(report.second_order[0][1]);
    row.sum = Some(conservation_check(&report));
    row.status = SweepStatus::Ok;
    Ok(row)
}

/// One row per (model, dependence kind, grid value), all on the same base
/// sample.
pub fn sweep_dependence(cfg: &SweepConfig) -> Result<Vec<SweepRow>> {
    if cfg.grid.is_empty() || cfg.models.is_empty() || cfg.kinds.is_empty() {
        return Err(Error::InvalidArgument("empty sweep".into()));
    }
    let points: Vec<(ModelId, DependenceKind, f64)> = cfg
        .models
        .iter()
        .flat_map(|m| {
            cfg.kinds
                .iter()
                .flat_map(move |k| cfg.grid.iter().map(move |v| (*m, *k, *v)))
        })
        .collect();
    points
        .par_iter()
        .map(|(m, k, v)| sweep_point(cfg, m, *k, *v))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_sweep(kind: DependenceKind) -> Vec<SweepRow> {
        let cfg = SweepConfig {
            kinds: vec![kind],
            n: 20_000,
            ..Default::default()
        };
        sweep_dependence(&cfg).unwrap()
    }

    #[test]
    fn equal_portion_full_negative_additive_is_degenerate() {
        let rows = small_sweep(DependenceKind::EqualPortion);
        assert_eq!(rows.len(), 18);
        let add_neg = &rows[0];
        assert_eq!(add_neg.model, ModelId::TwoFactorAdditive);
        assert_eq!(add_neg.nominal, -1.0);
        assert_eq!(add_neg.status, SweepStatus::Degenerate);
        assert!((add_neg.pearson + 1.0).abs() < 1e-12);
        assert!(add_neg.s_ab.is_none());
        let mult_neg = &rows[9];
        assert_eq!(mult_neg.status, SweepStatus::Ok);
        for r in rows.iter().filter(|r| r.status == SweepStatus::Ok) {
            // the coupled share drives the achieved correlation
            assert!((r.pearson - r.nominal).abs() < 0.03, "{r:?}");
        }
    }

    #[test]
    fn copula_additive_interaction_tracks_correlation() {
        let rows = small_sweep(DependenceKind::Copula);
        for r in rows
            .iter()
            .filter(|r| r.model == ModelId::TwoFactorAdditive && r.nominal.abs() < 0.9)
        {
            let s_ab = r.s_ab.unwrap();
            assert!((s_ab + r.pearson).abs() < 0.06, "{r:?}");
        }
        let at_zero = rows
            .iter()
            .find(|r| r.model == ModelId::TwoFactorAdditive && r.nominal == 0.0)
            .unwrap();
        assert!(at_zero.pearson.abs() < 0.02);
        assert!(at_zero.spearman.abs() < 0.02);
    }

    #[test]
    fn sweep_rejects_wrong_arity() {
        let cfg = SweepConfig {
            models: vec![ModelId::NestedInteraction],
            n: 1000,
            ..Default::default()
        };
        assert!(sweep_dependence(&cfg).is_err());
    }

    #[test]
    fn compare_refuses_dependent_inputs() {
        let m = ModelId::TwoFactorAdditive;
        let dep = [DependencePlan::Copula {
            a: 0,
            b: 1,
            rho: 0.5,
        }];
        let err = compare(&m, &m.default_specs(), &dep, &CompareSettings::new(1)).unwrap_err();
        assert!(err.to_string().contains("independent"));
    }

    #[test]
    fn compare_ishigami_has_analytic_rows() {
        let m = ModelId::ishigami_default();
        let mut settings = CompareSettings::new(3);
        settings.binning_plan.n = 10_000;
        let c = compare(&m, &m.default_specs(), &[], &settings).unwrap();
        let analytic = c.analytic.unwrap();
        assert_eq!(analytic.len(), 4);
        assert!((analytic[0].delta).abs() < 0.03);
        let s13 = &analytic[3];
        assert!(s13.delta <= 0.0 && s13.delta >= -0.15, "{s13:?}");
        assert_eq!(c.oracle_evaluations, 1500 * 8);
    }

    #[test]
    fn generation_is_seeded() {
        let m = ModelId::ToyPortfolio;
        let plan = SamplingPlan::new(Sampler::Qmc, 1000, 7);
        let a = generate_dataset(&m, &m.default_specs(), &plan, &[]).unwrap();
        let b = generate_dataset(&m, &m.default_specs(), &plan, &[]).unwrap();
        assert_eq!(a, b);
        let c = generate_dataset(
            &m,
            &m.default_specs(),
            &SamplingPlan::new(Sampler::Qmc, 1000, 8),
            &[],
        )
        .unwrap();
        assert_ne!(a, c);
    }
}
