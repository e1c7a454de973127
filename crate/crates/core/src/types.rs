//! Domain types shared across the toolkit.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Marginal law of one model input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MarginalDistribution {
    Uniform {
        lo: f64,
        hi: f64,
    },
    /// `sd` is a standard deviation, not a variance.
    Normal {
        mean: f64,
        sd: f64,
    },
    Categorical {
        levels: Vec<String>,
        probabilities: Vec<f64>,
    },
}

impl MarginalDistribution {
    pub fn validate(&self) -> Result<()> {
        match self {
            MarginalDistribution::Uniform { lo, hi } => {
                if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                    return Err(Error::InvalidArgument(format!(
                        "uniform marginal needs finite lo < hi, got [{lo}, {hi}]"
                    )));
                }
            }
            MarginalDistribution::Normal { mean, sd } => {
                if !(mean.is_finite() && sd.is_finite() && *sd > 0.0) {
                    return Err(Error::InvalidArgument(format!(
                        "normal marginal needs finite mean and sd > 0, got N({mean}, {sd})"
                    )));
                }
            }
            MarginalDistribution::Categorical {
                levels,
                probabilities,
            } => {
                if levels.is_empty() || levels.len() != probabilities.len() {
                    return Err(Error::InvalidArgument(
                        "categorical marginal needs one probability per level".into(),
                    ));
                }
                if probabilities.iter().any(|p| !(*p > 0.0 && *p <= 1.0)) {
                    return Err(Error::InvalidArgument(
                        "categorical probabilities must lie in (0, 1]".into(),
                    ));
                }
                let total: f64 = probabilities.iter().sum();
                if (total - 1.0).abs() > 1e-12 {
                    return Err(Error::InvalidArgument(format!(
                        "categorical probabilities sum to {total}, not 1"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn is_categorical(&self) -> bool {
        matches!(self, MarginalDistribution::Categorical { .. })
    }

    /// Number of levels for categorical marginals.
    pub fn level_count(&self) -> Option<usize> {
        match self {
            MarginalDistribution::Categorical { levels, .. } => Some(levels.len()),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputSpec {
    pub name: String,
    pub distribution: MarginalDistribution,
    #[serde(default)]
    pub unit: String,
}

impl InputSpec {
    pub fn new(name: impl Into<String>, distribution: MarginalDistribution) -> Self {
        InputSpec {
            name: name.into(),
            distribution,
            unit: String::new(),
        }
    }

    pub fn uniform(name: impl Into<String>, lo: f64, hi: f64) -> Self {
        Self::new(name, MarginalDistribution::Uniform { lo, hi })
    }

    pub fn normal(name: impl Into<String>, mean: f64, sd: f64) -> Self {
        Self::new(name, MarginalDistribution::Normal { mean, sd })
    }

    pub fn with_unit(mut self, unit: impl Into<String>) -> Self {
        self.unit = unit.into();
        self
    }
}

/// Checks a study's input list: valid marginals and unique names.
pub fn validate_specs(specs: &[InputSpec]) -> Result<()> {
    let mut seen = HashSet::new();
    for spec in specs {
        spec.distribution.validate()?;
        if !seen.insert(spec.name.as_str()) {
            return Err(Error::InvalidArgument(format!(
                "duplicate input name `{}`",
                spec.name
            )));
        }
    }
    Ok(())
}

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::InvalidArgument(format!(
                "matrix data has {} entries, expected {rows}x{cols}",
                data.len()
            )));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn from_columns(columns: &[Vec<f64>]) -> Result<Self> {
        let cols = columns.len();
        let rows = columns.first().map_or(0, Vec::len);
        if columns.iter().any(|c| c.len() != rows) {
            return Err(Error::InvalidArgument("ragged columns".into()));
        }
        let mut m = Matrix::zeros(rows, cols);
        for (j, col) in columns.iter().enumerate() {
            for (i, &v) in col.iter().enumerate() {
                m.set(i, j, v);
            }
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<f64> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn set_column(&mut self, c: usize, values: &[f64]) {
        for (r, &v) in values.iter().enumerate() {
            self.set(r, c, v);
        }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Keeps the listed columns, in the given order.
    pub fn select_columns(&self, cols: &[usize]) -> Matrix {
        let mut out = Matrix::zeros(self.rows, cols.len());
        for r in 0..self.rows {
            for (k, &c) in cols.iter().enumerate() {
                out.set(r, k, self.get(r, c));
            }
        }
        out
    }
}

/// One input/output sample: N rows of K inputs plus the model output.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    inputs: Matrix,
    output: Vec<f64>,
    specs: Vec<InputSpec>,
}

impl Dataset {
    pub fn new(inputs: Matrix, output: Vec<f64>, specs: Vec<InputSpec>) -> Result<Self> {
        if inputs.rows() != output.len() {
            return Err(Error::InvalidDataset(format!(
                "{} input rows but {} outputs",
                inputs.rows(),
                output.len()
            )));
        }
        if inputs.cols() != specs.len() {
            return Err(Error::InvalidDataset(format!(
                "{} input columns but {} specs",
                inputs.cols(),
                specs.len()
            )));
        }
        if output.len() < 2 {
            return Err(Error::InvalidDataset("need at least 2 rows".into()));
        }
        if let Some(pos) = inputs.as_slice().iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidDataset(format!(
                "non-finite input at row {}, column {}",
                pos / inputs.cols() + 1,
                specs[pos % inputs.cols()].name
            )));
        }
        if let Some(pos) = output.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidDataset(format!(
                "non-finite output at row {}",
                pos + 1
            )));
        }
        validate_specs(&specs)?;
        for (c, spec) in specs.iter().enumerate() {
            if let Some(levels) = spec.distribution.level_count() {
                for r in 0..inputs.rows() {
                    let v = inputs.get(r, c);
                    if v.fract() != 0.0 || v < 0.0 || v >= levels as f64 {
                        return Err(Error::InvalidDataset(format!(
                            "categorical column `{}` holds {v} at row {}, expected a level index below {levels}",
                            spec.name,
                            r + 1
                        )));
                    }
                }
            }
        }
        Ok(Dataset {
            inputs,
            output,
            specs,
        })
    }

    pub fn inputs(&self) -> &Matrix {
        &self.inputs
    }

    pub fn output(&self) -> &[f64] {
        &self.output
    }

    pub fn specs(&self) -> &[InputSpec] {
        &self.specs
    }

    pub fn n_rows(&self) -> usize {
        self.output.len()
    }

    pub fn n_inputs(&self) -> usize {
        self.specs.len()
    }

    pub fn column(&self, c: usize) -> Vec<f64> {
        self.inputs.column(c)
    }

    pub fn names(&self) -> Vec<String> {
        self.specs.iter().map(|s| s.name.clone()).collect()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.specs.iter().position(|s| s.name == name)
    }

    /// Returns a copy with rows reordered: row `i` of the result is row
    /// `order[i]` of `self`.
    pub fn permuted(&self, order: &[usize]) -> Dataset {
        let mut inputs = Matrix::zeros(self.n_rows(), self.n_inputs());
        for (i, &src) in order.iter().enumerate() {
            inputs.row_mut(i).copy_from_slice(self.inputs.row(src));
        }
        Dataset {
            inputs,
            output: order.iter().map(|&i| self.output[i]).collect(),
            specs: self.specs.clone(),
        }
    }

    /// Same inputs with a replaced output vector.
    pub fn with_output(&self, output: Vec<f64>) -> Result<Dataset> {
        Dataset::new(self.inputs.clone(), output, self.specs.clone())
    }
}

/// First-, second-order and combined indices for one dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityReport {
    pub names: Vec<String>,
    pub first_order: Vec<f64>,
    /// Symmetric, zero diagonal.
    pub second_order: Vec<Vec<f64>>,
    pub combined: Vec<f64>,
    pub var_y: f64,
    pub n_bins_first: usize,
    pub n_bins_second_per_dim: usize,
    #[serde(default)]
    pub warnings: Vec<String>,
}

impl SensitivityReport {
    pub fn n_inputs(&self) -> usize {
        self.first_order.len()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Second-order entries above the diagonal as `(i, j, value)`.
    pub fn upper_pairs(&self) -> Vec<(usize, usize, f64)> {
        let k = self.n_inputs();
        let mut out = Vec::with_capacity(k * k.saturating_sub(1) / 2);
        for i in 0..k {
            for j in i + 1..k {
                out.push((i, j, self.second_order[i][j]));
            }
        }
        out
    }

    /// All reported indices: first-order, upper-triangle second-order and
    /// combined.
    pub fn all_indices(&self) -> impl Iterator<Item = f64> + '_ {
        self.first_order
            .iter()
            .copied()
            .chain(self.upper_pairs().into_iter().map(|p| p.2))
            .chain(self.combined.iter().copied())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn marginal_invariants() {
        assert!(MarginalDistribution::Uniform { lo: 1.0, hi: 1.0 }
            .validate()
            .is_err());
        assert!(MarginalDistribution::Normal { mean: 0.0, sd: 0.0 }
            .validate()
            .is_err());
        let cat = MarginalDistribution::Categorical {
            levels: vec!["a".into(), "b".into()],
            probabilities: vec![0.3, 0.6],
        };
        assert!(cat.validate().is_err());
        let cat = MarginalDistribution::Categorical {
            levels: vec!["a".into(), "b".into()],
            probabilities: vec![0.3, 0.7],
        };
        assert!(cat.validate().is_ok());
    }

    #[test]
    fn dataset_rejects_bad_shapes_and_values() {
        let specs = vec![InputSpec::uniform("a", 0.0, 1.0)];
        let m = Matrix::from_columns(&[vec![0.1, 0.2, 0.3]]).unwrap();
        assert!(Dataset::new(m.clone(), vec![1.0, 2.0], specs.clone()).is_err());
        assert!(Dataset::new(m.clone(), vec![1.0, f64::NAN, 2.0], specs.clone()).is_err());
        let two = vec![specs[0].clone(), specs[0].clone()];
        let m2 = Matrix::from_columns(&[vec![0.1, 0.2, 0.3], vec![0.1, 0.2, 0.3]]).unwrap();
        assert!(Dataset::new(m2, vec![1.0, 2.0, 3.0], two).is_err());
        assert!(Dataset::new(m, vec![1.0, 2.0, 3.0], specs).is_ok());
    }

    #[test]
    fn categorical_columns_hold_level_indices() {
        let spec = InputSpec::new(
            "c",
            MarginalDistribution::Categorical {
                levels: vec!["x".into(), "y".into()],
                probabilities: vec![0.5, 0.5],
            },
        );
        let ok = Matrix::from_columns(&[vec![0.0, 1.0, 1.0]]).unwrap();
        assert!(Dataset::new(ok, vec![1.0, 2.0, 3.0], vec![spec.clone()]).is_ok());
        let bad = Matrix::from_columns(&[vec![0.0, 2.0, 1.0]]).unwrap();
        assert!(Dataset::new(bad, vec![1.0, 2.0, 3.0], vec![spec]).is_err());
    }
}
