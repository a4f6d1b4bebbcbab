//! CSV ingestion and export for datasets.

use std::io::Write;
use std::path::Path;

use super::{DataError, Dataset};

/// Parsing options for [`load_csv`].
#[derive(Debug, Clone)]
pub struct CsvOptions {
    pub delimiter: u8,
    pub has_header: bool,
    /// Weight column, by header name or zero-based index. Absent → unit weights.
    pub weight_column: Option<String>,
    /// Label column, by header name or zero-based index.
    pub label_column: Option<String>,
}

impl Default for CsvOptions {
    fn default() -> Self {
        CsvOptions {
            delimiter: b',',
            has_header: true,
            weight_column: None,
            label_column: None,
        }
    }
}

fn resolve_column(
    spec: &str,
    headers: Option<&[String]>,
    width: usize,
) -> Result<usize, DataError> {
    if let Some(headers) = headers {
        if let Some(idx) = headers.iter().position(|h| h == spec) {
            return Ok(idx);
        }
    }
    let idx: usize = spec.parse().map_err(|_| {
        DataError::BadColumn(
            spec.to_string(),
            "not found in header and not a valid index".into(),
        )
    })?;
    if idx >= width {
        return Err(DataError::BadColumn(
            spec.to_string(),
            format!("index out of range for {width} columns"),
        ));
    }
    Ok(idx)
}

/// Loads a dataset from a delimited text file. Every column except the
/// optional weight and label columns must be numeric; rows must have equal
/// width. Missing weight column yields unit weights.
pub fn load_csv(path: &Path, options: &CsvOptions) -> Result<Dataset, DataError> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(options.delimiter)
        .has_headers(options.has_header)
        .flexible(true)
        .from_path(path)
        .map_err(|e| DataError::Parse {
            row: 0,
            message: e.to_string(),
        })?;

    let headers: Option<Vec<String>> = if options.has_header {
        Some(
            reader
                .headers()
                .map_err(|e| DataError::Parse {
                    row: 0,
                    message: e.to_string(),
                })?
                .iter()
                .map(|s| s.to_string())
                .collect(),
        )
    } else {
        None
    };

    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut weights: Vec<f64> = Vec::new();
    let mut labels: Vec<String> = Vec::new();
    let mut width: Option<usize> = headers.as_ref().map(|h| h.len());
    let mut weight_idx: Option<usize> = None;
    let mut label_idx: Option<usize> = None;

    for (i, record) in reader.records().enumerate() {
        // 1-based data row number for diagnostics, after any header.
        let row_no = i + 1 + usize::from(options.has_header);
        let record = record.map_err(|e| DataError::Parse {
            row: row_no,
            message: e.to_string(),
        })?;
        let w = *width.get_or_insert(record.len());
        if record.len() != w {
            return Err(DataError::Parse {
                row: row_no,
                message: format!("ragged row: {} fields, expected {}", record.len(), w),
            });
        }
        if weight_idx.is_none() {
            if let Some(spec) = &options.weight_column {
                weight_idx = Some(resolve_column(spec, headers.as_deref(), w)?);
            }
        }
        if label_idx.is_none() {
            if let Some(spec) = &options.label_column {
                label_idx = Some(resolve_column(spec, headers.as_deref(), w)?);
            }
        }
        let mut coords = Vec::with_capacity(w);
        for (col, field) in record.iter().enumerate() {
            if Some(col) == weight_idx {
                let value: f64 = field.trim().parse().map_err(|_| DataError::Parse {
                    row: row_no,
                    message: format!("non-numeric weight {field:?} in column {col}"),
                })?;
                weights.push(value);
            } else if Some(col) == label_idx {
                labels.push(field.to_string());
            } else {
                let value: f64 = field.trim().parse().map_err(|_| DataError::Parse {
                    row: row_no,
                    message: format!("non-numeric cell {field:?} in column {col}"),
                })?;
                coords.push(value);
            }
        }
        rows.push(coords);
    }

    if rows.is_empty() {
        return Err(DataError::EmptyFile);
    }
    let n = rows.len();
    let weights = if options.weight_column.is_some() {
        weights
    } else {
        vec![1.0; n]
    };
    let labels = if options.label_column.is_some() {
        Some(labels)
    } else {
        None
    };
    Dataset::new(rows, weights, labels)
}

/// Writes a dataset as CSV with header `x0..x{m-1}[,weight][,label]`.
/// Weights are omitted when they are all exactly 1.
pub fn write_csv<W: Write>(dataset: &Dataset, mut out: W) -> Result<(), DataError> {
    let unit_weights = dataset.weights().iter().all(|&w| w == 1.0);
    let mut header: Vec<String> = (0..dataset.dim()).map(|j| format!("x{j}")).collect();
    if !unit_weights {
        header.push("weight".into());
    }
    if dataset.labels().is_some() {
        header.push("label".into());
    }
    writeln!(out, "{}", header.join(","))?;
    for i in 0..dataset.n_points() {
        let mut fields: Vec<String> = dataset.point(i).iter().map(|v| format!("{v}")).collect();
        if !unit_weights {
            fields.push(format!("{}", dataset.weight(i)));
        }
        if let Some(labels) = dataset.labels() {
            fields.push(labels[i].clone());
        }
        writeln!(out, "{}", fields.join(","))?;
    }
    Ok(())
}
