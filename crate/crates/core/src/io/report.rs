//! Report bundles (JSON) and tabular exports (CSV).

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::binning::conservation_check;
use crate::error::Result;
use crate::io::dataset::format_number;
use crate::oracle::OracleReport;
use crate::simdec::Decomposition;
use crate::study::{Comparison, SweepRow};
use crate::types::SensitivityReport;

pub const SCHEMA_VERSION: u32 = 1;
pub const TOOL_NAME: &str = "binsa";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

fn writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w)
}

/// Everything needed to repeat a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub tool: String,
    pub version: String,
    pub seed: Option<u64>,
    pub n_rows: usize,
    pub model: Option<String>,
    pub sampler: Option<String>,
    pub dataset: Option<String>,
    /// The effective configuration as given to the run.
    pub config: Option<serde_json::Value>,
}

impl RunMetadata {
    pub fn new(n_rows: usize) -> Self {
        RunMetadata {
            tool: TOOL_NAME.to_string(),
            version: TOOL_VERSION.to_string(),
            seed: None,
            n_rows,
            model: None,
            sampler: None,
            dataset: None,
            config: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairEntry {
    pub a: String,
    pub b: String,
    pub value: f64,
}

/// Name-keyed view of a [`SensitivityReport`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndicesJson {
    pub inputs: Vec<String>,
    pub first_order: BTreeMap<String, f64>,
    pub second_order: Vec<PairEntry>,
    pub combined: BTreeMap<String, f64>,
    pub conservation_sum: f64,
    pub output_variance: f64,
    pub n_bins_first: usize,
    pub n_bins_second_per_dim: usize,
    pub warnings: Vec<String>,
}

impl From<&SensitivityReport> for IndicesJson {
    fn from(r: &SensitivityReport) -> Self {
        let by_name = |v: &[f64]| r.names.iter().cloned().zip(v.iter().copied()).collect();
        IndicesJson {
            inputs: r.names.clone(),
            first_order: by_name(&r.first_order),
            second_order: r
                .upper_pairs()
                .into_iter()
                .map(|(i, j, value)| PairEntry {
                    a: r.names[i].clone(),
                    b: r.names[j].clone(),
                    value,
                })
                .collect(),
            combined: by_name(&r.combined),
            conservation_sum: conservation_check(r),
            output_variance: r.var_y,
            n_bins_first: r.n_bins_first,
            n_bins_second_per_dim: r.n_bins_second_per_dim,
            warnings: r.warnings.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportBundle {
    pub schema_version: u32,
    pub metadata: RunMetadata,
    pub indices: IndicesJson,
    pub oracle: Option<OracleReport>,
    pub decomposition: Option<Decomposition>,
}

impl ReportBundle {
    pub fn new(metadata: RunMetadata, report: &SensitivityReport) -> Self {
        ReportBundle {
            schema_version: SCHEMA_VERSION,
            metadata,
            indices: report.into(),
            oracle: None,
            decomposition: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonBundle {
    pub schema_version: u32,
    pub metadata: RunMetadata,
    pub comparison: Comparison,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepBundle {
    pub schema_version: u32,
    pub metadata: RunMetadata,
    pub rows: Vec<SweepRow>,
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize, W: Write>(value: &T, mut w: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    Ok(())
}

/// `input,first_order,combined` table.
pub fn write_first_order_csv<W: Write>(r: &SensitivityReport, w: W) -> Result<()> {
    let mut out = writer(w);
    out.write_record(["input", "first_order", "combined"])?;
    for (i, name) in r.names.iter().enumerate() {
        out.write_record([
            name.clone(),
            format_number(r.first_order[i]),
            format_number(r.combined[i]),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// Square table of second-order indices with only the upper triangle
/// filled.
pub fn write_second_order_csv<W: Write>(r: &SensitivityReport, w: W) -> Result<()> {
    let mut out = writer(w);
    let mut header = vec![String::new()];
    header.extend(r.names.iter().cloned());
    out.write_record(&header)?;
    let k = r.n_inputs();
    for i in 0..k {
        let mut row = vec![r.names[i].clone()];
        row.extend((0..k).map(|j| {
            if j > i {
                format_number(r.second_order[i][j])
            } else {
                String::new()
            }
        }));
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}

fn opt(v: Option<f64>) -> String {
    v.map(format_number).unwrap_or_default()
}

/// `color,scenario,<inputs...>,min,mean,max,probability`; empty scenarios
/// leave the statistics blank.
pub fn write_scenarios_csv<W: Write>(d: &Decomposition, w: W) -> Result<()> {
    let mut out = writer(w);
    let mut header = vec!["color".to_string(), "scenario".to_string()];
    header.extend(d.inputs.iter().cloned());
    header.extend(["min", "mean", "max", "probability"].map(String::from));
    out.write_record(&header)?;
    for s in &d.scenarios {
        let mut row = vec![s.color.clone(), format!("sc{}", s.id)];
        row.extend(s.state_labels.iter().cloned());
        row.extend([
            opt(s.min),
            opt(s.mean),
            opt(s.max),
            format_number(s.probability),
        ]);
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}

/// `bin_lo,bin_hi,<scenario...>,total` counts.
pub fn write_histogram_csv<W: Write>(d: &Decomposition, w: W) -> Result<()> {
    let mut out = writer(w);
    let h = &d.histogram;
    let mut header = vec!["bin_lo".to_string(), "bin_hi".to_string()];
    header.extend(d.scenarios.iter().map(|s| format!("sc{}", s.id)));
    header.push("total".into());
    out.write_record(&header)?;
    let totals = h.totals();
    for b in 0..h.n_bins() {
        let mut row = vec![format_number(h.edges[b]), format_number(h.edges[b + 1])];
        row.extend(h.counts.iter().map(|c| c[b].to_string()));
        row.push(totals[b].to_string());
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}

/// One row per sweep point.
pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], w: W) -> Result<()> {
    let mut out = writer(w);
    out.write_record([
        "model",
        "dependence",
        "nominal",
        "pearson",
        "spearman",
        "s_a",
        "s_b",
        "s_ab",
        "sum",
        "status",
    ])?;
    for r in rows {
        let kind = serde_json::to_value(r.kind)?;
        let status = serde_json::to_value(r.status)?;
        out.write_record([
            r.model.to_string(),
            kind.as_str().unwrap_or_default().to_string(),
            format_number(r.nominal),
            format_number(r.pearson),
            format_number(r.spearman),
            opt(r.s_a),
            opt(r.s_b),
            opt(r.s_ab),
            opt(r.sum),
            status.as_str().unwrap_or_default().to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}
