//! JSON study configuration and state-definition files.

use std::fs::File;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::benchmarks::ModelId;
use crate::binning::BinningConfig;
use crate::error::{Error, Result};
use crate::sampling::{DependencePlan, Sampler, SamplingPlan};
use crate::simdec::{SimdecConfig, StateDefinition};
use crate::study::{CompareSettings, DependenceKind, SweepConfig};
use crate::types::{validate_specs, InputSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplingSection {
    pub method: Sampler,
    pub n: usize,
    pub scramble: bool,
}

impl Default for SamplingSection {
    fn default() -> Self {
        SamplingSection {
            method: Sampler::Qmc,
            n: 1000,
            scramble: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CompareSection {
    pub oracle_base_rows: usize,
    pub oracle_sampler: Sampler,
}

impl Default for CompareSection {
    fn default() -> Self {
        CompareSection {
            oracle_base_rows: 1500,
            oracle_sampler: Sampler::Qmc,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    /// Model names; both two-factor models when empty.
    pub models: Vec<String>,
    pub kinds: Vec<DependenceKind>,
    pub grid: Vec<f64>,
    pub n: usize,
}

impl Default for SweepSection {
    fn default() -> Self {
        let d = SweepConfig::default();
        SweepSection {
            models: Vec::new(),
            kinds: d.kinds,
            grid: d.grid,
            n: d.n,
        }
    }
}

/// A run description. Command-line flags override the matching fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StudyConfig {
    /// Built-in model name, e.g. `toy_portfolio` or `ishigami:7,0.1`.
    pub model: Option<String>,
    /// CSV dataset; the last column is the output.
    pub dataset: Option<PathBuf>,
    /// Input laws; defaults to the model's reference inputs.
    pub inputs: Option<Vec<InputSpec>>,
    pub sampling: SamplingSection,
    pub seed: u64,
    pub dependence: Vec<DependencePlan>,
    pub binning: BinningConfig,
    pub simdec: SimdecConfig,
    pub states: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub compare: CompareSection,
    pub sweep: SweepSection,
}

impl Default for StudyConfig {
    fn default() -> Self {
        StudyConfig {
            model: None,
            dataset: None,
            inputs: None,
            sampling: SamplingSection::default(),
            seed: 1,
            dependence: Vec::new(),
            binning: BinningConfig::default(),
            simdec: SimdecConfig::default(),
            states: None,
            out: None,
            compare: CompareSection::default(),
            sweep: SweepSection::default(),
        }
    }
}

impl StudyConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| {
            Error::InvalidArgument(format!("cannot open config {}: {e}", path.display()))
        })?;
        Ok(serde_json::from_reader(file)?)
    }

    pub fn model_id(&self) -> Result<Option<ModelId>> {
        self.model.as_deref().map(str::parse).transpose()
    }

    /// Checks that exactly one data source is named and that the inputs and
    /// dependence plans fit it.
    pub fn validate(&self) -> Result<()> {
        match (&self.model, &self.dataset) {
            (Some(_), Some(_)) => {
                return Err(Error::InvalidArgument(
                    "give either a model or a dataset, not both".into(),
                ))
            }
            (None, None) => return Err(Error::InvalidArgument("no model or dataset given".into())),
            _ => {}
        }
        if let Some(model) = self.model_id()? {
            let specs = self.specs_for(&model)?;
            for d in &self.dependence {
                d.validate(specs.len())?;
            }
        } else if !self.dependence.is_empty() {
            return Err(Error::InvalidArgument(
                "dependence plans need a model to sample from".into(),
            ));
        }
        if let Some(specs) = &self.inputs {
            validate_specs(specs)?;
        }
        if self.simdec.n_output_bins == 0 || self.simdec.max_inputs == 0 {
            return Err(Error::InvalidArgument(
                "simdec needs at least one output bin and one input".into(),
            ));
        }
        Ok(())
    }

    pub fn specs_for(&self, model: &ModelId) -> Result<Vec<InputSpec>> {
        let specs = match &self.inputs {
            Some(s) => s.clone(),
            None => model.default_specs(),
        };
        if specs.len() != model.arity() {
            return Err(Error::ArityMismatch {
                model: model.to_string(),
                expected: model.arity(),
                got: specs.len(),
            });
        }
        validate_specs(&specs)?;
        Ok(specs)
    }

    pub fn sampling_plan(&self) -> SamplingPlan {
        SamplingPlan {
            method: self.sampling.method,
            n: self.sampling.n,
            seed: self.seed,
            scramble: self.sampling.scramble,
        }
    }

    pub fn compare_settings(&self) -> CompareSettings {
        CompareSettings {
            binning_plan: self.sampling_plan(),
            binning: self.binning,
            oracle_base_rows: self.compare.oracle_base_rows,
            oracle_sampler: self.compare.oracle_sampler,
            oracle_seed: self.seed,
        }
    }

    pub fn sweep_config(&self) -> Result<SweepConfig> {
        let mut models: Vec<ModelId> = self
            .sweep
            .models
            .iter()
            .map(|m| m.parse())
            .collect::<Result<_>>()?;
        if models.is_empty() {
            if let Some(m) = self.model_id()? {
                models.push(m);
            } else {
                models = SweepConfig::default().models;
            }
        }
        Ok(SweepConfig {
            models,
            kinds: self.sweep.kinds.clone(),
            grid: self.sweep.grid.clone(),
            n: self.sweep.n,
            seed: self.seed,
            sampler: self.sampling.method,
            binning: self.binning,
        })
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum StatesFile {
    List(Vec<StateDefinition>),
    Wrapped { states: Vec<StateDefinition> },
}

/// State definitions from JSON: either a list or `{"states": [...]}`.
pub fn read_states(path: &Path) -> Result<Vec<StateDefinition>> {
    let file = File::open(path)
        .map_err(|e| Error::InvalidStates(format!("cannot open {}: {e}", path.display())))?;
    let parsed: StatesFile = serde_json::from_reader(file)
        .map_err(|e| Error::InvalidStates(format!("{}: {e}", path.display())))?;
    Ok(match parsed {
        StatesFile::List(v) | StatesFile::Wrapped { states: v } => v,
    })
}
