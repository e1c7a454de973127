//! File formats: dataset CSV, configuration and states JSON, report JSON
//! and CSV tables, SVG charts.

pub mod config;
pub mod dataset;
pub mod report;
pub mod svg;

pub use config::{read_states, StudyConfig};
pub use dataset::{read_dataset, read_dataset_file, write_dataset, write_dataset_file};
pub use report::{ReportBundle, RunMetadata};
