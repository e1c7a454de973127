//! Analytic test models and their reference inputs.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{InputSpec, Matrix};

/// Split point of the nested-interaction model on its unit-range `B` input.
pub const NESTED_THRESHOLD: f64 = 0.5;
/// Slope of `B` above the split in the nested-interaction model.
pub const NESTED_SLOPE: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum ModelId {
    /// `Y = Cs*Ps + Ct*Pt + Cj*Pj`, inputs ordered `Ps, Cs, Pt, Ct, Pj, Cj`.
    ToyPortfolio,
    Ishigami {
        a: f64,
        b: f64,
    },
    TwoFactorAdditive,
    TwoFactorMultiplicative,
    /// Piecewise model whose `A` slope and `C` role switch at
    /// `B = NESTED_THRESHOLD`:
    /// `Y = A(1 - C)` below, `Y = (c(B - b0) - A) C` above.
    NestedInteraction,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ToyLaw {
    Normal,
    /// Uniform over mean +/- two standard deviations of the normal law.
    Uniform,
}

impl ModelId {
    pub fn ishigami_default() -> Self {
        ModelId::Ishigami { a: 7.0, b: 0.1 }
    }

    pub fn arity(&self) -> usize {
        match self {
            ModelId::ToyPortfolio => 6,
            ModelId::Ishigami { .. } | ModelId::NestedInteraction => 3,
            ModelId::TwoFactorAdditive | ModelId::TwoFactorMultiplicative => 2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let ModelId::Ishigami { a, b } = self {
            if !(a.is_finite() && b.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "ishigami parameters must be finite, got a={a}, b={b}"
                )));
            }
        }
        Ok(())
    }

    /// Single-row evaluation; `x.len()` must equal the arity.
    pub fn eval_row(&self, x: &[f64]) -> f64 {
        match *self {
            ModelId::ToyPortfolio => x[1] * x[0] + x[3] * x[2] + x[5] * x[4],
            ModelId::Ishigami { a, b } => {
                let s2 = x[1].sin();
                x[0].sin() + a * s2 * s2 + b * x[2].powi(4) * x[0].sin()
            }
            ModelId::TwoFactorAdditive => x[0] + x[1],
            ModelId::TwoFactorMultiplicative => x[0] * x[1],
            ModelId::NestedInteraction => {
                let (a, b, c) = (x[0], x[1], x[2]);
                if b < NESTED_THRESHOLD {
                    a * (1.0 - c)
                } else {
                    (NESTED_SLOPE * (b - NESTED_THRESHOLD) - a) * c
                }
            }
        }
    }

    pub fn evaluate(&self, inputs: &Matrix) -> Result<Vec<f64>> {
        self.validate()?;
        if inputs.cols() != self.arity() {
            return Err(Error::ArityMismatch {
                model: self.to_string(),
                expected: self.arity(),
                got: inputs.cols(),
            });
        }
        Ok((0..inputs.rows())
            .map(|r| self.eval_row(inputs.row(r)))
            .collect())
    }

    /// Reference input laws for each model.
    pub fn default_specs(&self) -> Vec<InputSpec> {
        match self {
            ModelId::ToyPortfolio => toy_default_specs(ToyLaw::Normal),
            ModelId::Ishigami { .. } => (1..=3)
                .map(|i| InputSpec::uniform(format!("x{i}"), -PI, PI))
                .collect(),
            ModelId::TwoFactorAdditive | ModelId::TwoFactorMultiplicative => vec![
                InputSpec::uniform("A", 0.0, 5.0),
                InputSpec::uniform("B", 0.0, 5.0),
            ],
            ModelId::NestedInteraction => vec![
                InputSpec::uniform("A", 0.0, 1.0),
                InputSpec::uniform("B", 0.0, 1.0),
                InputSpec::uniform("C", 0.0, 1.0),
            ],
        }
    }
}

impl fmt::Display for ModelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelId::ToyPortfolio => f.write_str("toy_portfolio"),
            ModelId::Ishigami { a, b } => write!(f, "ishigami:{a},{b}"),
            ModelId::TwoFactorAdditive => f.write_str("two_factor_additive"),
            ModelId::TwoFactorMultiplicative => f.write_str("two_factor_multiplicative"),
            ModelId::NestedInteraction => f.write_str("nested_interaction"),
        }
    }
}

impl FromStr for ModelId {
    type Err = Error;

    /// Accepts the snake_case names; Ishigami takes optional parameters as
    /// `ishigami:a,b`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, params) = match s.split_once(':') {
            Some((n, p)) => (n, Some(p)),
            None => (s, None),
        };
        let model = match (name, params) {
            ("toy_portfolio" | "toy", None) => ModelId::ToyPortfolio,
            ("two_factor_additive" | "additive", None) => ModelId::TwoFactorAdditive,
            ("two_factor_multiplicative" | "multiplicative", None) => {
                ModelId::TwoFactorMultiplicative
            }
            ("nested_interaction" | "nested", None) => ModelId::NestedInteraction,
            ("ishigami", None) => ModelId::ishigami_default(),
            ("ishigami", Some(p)) => {
                let parts: Vec<&str> = p.split(',').map(str::trim).collect();
                let parse = |v: &str| {
                    v.parse::<f64>().map_err(|_| {
                        Error::InvalidArgument(format!("bad ishigami parameter `{v}`"))
                    })
                };
                match parts.as_slice() {
                    [a, b] => ModelId::Ishigami {
                        a: parse(a)?,
                        b: parse(b)?,
                    },
                    _ => {
                        return Err(Error::InvalidArgument(format!(
                            "expected `ishigami:a,b`, got `{s}`"
                        )))
                    }
                }
            }
            _ => return Err(Error::InvalidArgument(format!("unknown model `{s}`"))),
        };
        model.validate()?;
        Ok(model)
    }
}

/// Inputs of the portfolio model: `Ps~N(0,4)`, `Cs~N(250,200)`,
/// `Pt~N(0,2)`, `Ct~N(400,300)`, `Pj~N(0,1)`, `Cj~N(500,400)` with the
/// second parameter a standard deviation.
pub fn toy_default_specs(law: ToyLaw) -> Vec<InputSpec> {
    const LAWS: [(&str, f64, f64); 6] = [
        ("P_s", 0.0, 4.0),
        ("C_s", 250.0, 200.0),
        ("P_t", 0.0, 2.0),
        ("C_t", 400.0, 300.0),
        ("P_j", 0.0, 1.0),
        ("C_j", 500.0, 400.0),
    ];
    LAWS.iter()
        .map(|&(name, mean, sd)| match law {
            ToyLaw::Normal => InputSpec::normal(name, mean, sd),
            ToyLaw::Uniform => InputSpec::uniform(name, mean - 2.0 * sd, mean + 2.0 * sd),
        })
        .collect()
}

/// Closed-form indices of the Ishigami function on `U(-pi, pi)^3`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IshigamiIndices {
    pub s1: f64,
    pub s2: f64,
    pub s3: f64,
    pub s13: f64,
    pub variance: f64,
}

pub fn ishigami_analytic_indices(a: f64, b: f64) -> Result<IshigamiIndices> {
    let pi4 = PI.powi(4);
    let v1 = 0.5 * (1.0 + b * pi4 / 5.0).powi(2);
    let v2 = a * a / 8.0;
    let v13 = 8.0 * b * b * PI.powi(8) / 225.0;
    let v = v1 + v2 + v13;
    if !(v.is_finite() && v > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "ishigami({a}, {b}) has no positive finite variance"
        )));
    }
    Ok(IshigamiIndices {
        s1: v1 / v,
        s2: v2 / v,
        s3: 0.0,
        s13: v13 / v,
        variance: v,
    })
}
