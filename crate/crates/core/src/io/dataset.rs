//! Dataset CSV files: one header row of input names followed by the output
//! column, comma separated, LF line endings.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::stats::min_max;
use crate::types::{Dataset, InputSpec, Matrix};

pub const OUTPUT_COLUMN: &str = "output";

fn writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w)
}

/// Shortest decimal text that parses back to the same value.
pub fn format_number(v: f64) -> String {
    format!("{v}")
}

pub fn write_dataset<W: Write>(ds: &Dataset, w: W) -> Result<()> {
    let mut out = writer(w);
    let mut header = ds.names();
    header.push(OUTPUT_COLUMN.to_string());
    out.write_record(&header)?;
    let x = ds.inputs();
    for (r, y) in ds.output().iter().enumerate() {
        let row: Vec<String> = x
            .row(r)
            .iter()
            .chain(std::iter::once(y))
            .map(|v| format_number(*v))
            .collect();
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_dataset_file(ds: &Dataset, path: &Path) -> Result<()> {
    write_dataset(ds, File::create(path)?)
}

/// Uniform law over the observed range of each column; a constant column
/// is widened by one half on each side so the law stays valid.
pub fn infer_specs(names: &[String], inputs: &Matrix) -> Vec<InputSpec> {
    names
        .iter()
        .enumerate()
        .map(|(c, name)| {
            let (lo, hi) = min_max(&inputs.column(c));
            if lo < hi {
                InputSpec::uniform(name.clone(), lo, hi)
            } else {
                InputSpec::uniform(name.clone(), lo - 0.5, lo + 0.5)
            }
        })
        .collect()
}

/// Reads a dataset whose last column is the output. Without `specs`,
/// inputs get [`infer_specs`] laws. Row numbers in errors count data rows
/// from 1, excluding the header.
pub fn read_dataset<R: Read>(r: R, specs: Option<&[InputSpec]>) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(r);
    let header: Vec<String> = rdr
        .headers()?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    if header.len() < 2 {
        return Err(Error::InvalidDataset(
            "need at least one input column and one output column".into(),
        ));
    }
    let k = header.len() - 1;
    let mut data = Vec::new();
    let mut output = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let row = i + 1;
        if rec.len() != header.len() {
            return Err(Error::InvalidDataset(format!(
                "row {row} has {} fields, expected {}",
                rec.len(),
                header.len()
            )));
        }
        for (c, cell) in rec.iter().enumerate() {
            let v: f64 = cell.trim().parse().map_err(|_| Error::MalformedCell {
                row,
                column: header[c].clone(),
                value: cell.to_string(),
            })?;
            if !v.is_finite() {
                return Err(Error::MalformedCell {
                    row,
                    column: header[c].clone(),
                    value: cell.to_string(),
                });
            }
            if c < k {
                data.push(v);
            } else {
                output.push(v);
            }
        }
    }
    let inputs = Matrix::from_row_major(output.len(), k, data)?;
    let names = &header[..k];
    let specs = match specs {
        Some(s) => {
            let given: Vec<&str> = s.iter().map(|x| x.name.as_str()).collect();
            if given != names {
                return Err(Error::InvalidDataset(format!(
                    "columns {names:?} do not match the configured inputs {given:?}"
                )));
            }
            s.to_vec()
        }
        None => infer_specs(names, &inputs),
    };
    Dataset::new(inputs, output, specs)
}

pub fn read_dataset_file(path: &Path, specs: Option<&[InputSpec]>) -> Result<Dataset> {
    read_dataset(File::open(path)?, specs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchmarks::ModelId;
    use crate::sampling::{Sampler, SamplingPlan};
    use crate::study::generate_dataset;

    fn bytes(ds: &Dataset) -> Vec<u8> {
        let mut buf = Vec::new();
        write_dataset(ds, &mut buf).unwrap();
        buf
    }

    #[test]
    fn header_and_shape() {
        let m = ModelId::ishigami_default();
        let ds = generate_dataset(
            &m,
            &m.default_specs(),
            &SamplingPlan::new(Sampler::Mc, 5, 1),
            &[],
        )
        .unwrap();
        let text = String::from_utf8(bytes(&ds)).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "x1,x2,x3,output");
        assert_eq!(lines.len(), 6);
        assert!(lines[1..].iter().all(|l| l.split(',').count() == 4));
        assert!(!text.contains('\r'));
    }

    #[test]
    fn round_trip_is_exact_and_byte_stable() {
        let m = ModelId::ToyPortfolio;
        let specs = m.default_specs();
        let ds =
            generate_dataset(&m, &specs, &SamplingPlan::new(Sampler::Qmc, 300, 7), &[]).unwrap();
        let first = bytes(&ds);
        let back = read_dataset(first.as_slice(), Some(&specs)).unwrap();
        assert_eq!(back, ds);
        assert_eq!(bytes(&back), first);
        let inferred = read_dataset(first.as_slice(), None).unwrap();
        assert_eq!(inferred.inputs(), ds.inputs());
        assert_eq!(bytes(&inferred), first);
    }

    #[test]
    fn extreme_values_round_trip() {
        let vals = [
            1e-300,
            -2.5e300,
            0.1 + 0.2,
            std::f64::consts::PI,
            -0.0,
            5e-324,
        ];
        let x = Matrix::from_columns(&[vals.to_vec()]).unwrap();
        let ds = Dataset::new(
            x,
            vals.iter().map(|v| v * 2.0).collect(),
            vec![InputSpec::uniform("a", -3e300, 1.0)],
        )
        .unwrap();
        let back = read_dataset(bytes(&ds).as_slice(), None).unwrap();
        for (a, b) in back.column(0).iter().zip(vals) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn malformed_cell_names_row_and_column() {
        let mut text = String::from("a,b,output\n");
        for i in 1..=20 {
            if i == 17 {
                text.push_str("0.5,abc,1\n");
            } else {
                text.push_str(&format!("{i},0.5,{}\n", i * 2));
            }
        }
        let err = read_dataset(text.as_bytes(), None).unwrap_err();
        assert!(matches!(err, Error::MalformedCell { row: 17, .. }));
        let msg = err.to_string();
        assert!(msg.contains("row 17") && msg.contains("`b`"), "{msg}");
        assert!(err.is_user_error());
    }

    #[test]
    fn ragged_and_mismatched_inputs_rejected() {
        assert!(read_dataset("a,output\n1,2\n3\n".as_bytes(), None).is_err());
        assert!(read_dataset("output\n1\n2\n".as_bytes(), None).is_err());
        let specs = [InputSpec::uniform("z", 0.0, 1.0)];
        assert!(read_dataset("a,output\n0.1,2\n0.3,4\n".as_bytes(), Some(&specs)).is_err());
    }
}
