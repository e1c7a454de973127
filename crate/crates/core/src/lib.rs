//! Variance-based sensitivity analysis from a single given dataset using a
//! binning estimator, with samplers, benchmark models, a pick-freeze
//! reference estimator and simulation decomposition.

pub mod benchmarks;
pub mod binning;
pub mod error;
pub mod io;
pub mod normal;
pub mod oracle;
pub mod sampling;
pub mod simdec;
pub mod stats;
pub mod study;
pub mod types;

pub use benchmarks::{ModelId, ToyLaw};
pub use binning::{analyze, conservation_check, BinningConfig, SecondOrderMarginals};
pub use error::{Error, Result};
pub use sampling::{DependencePlan, Sampler, SamplingPlan};
pub use types::{Dataset, InputSpec, MarginalDistribution, Matrix, SensitivityReport};
