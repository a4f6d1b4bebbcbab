//! Genotype status-code encoding into numeric {-1, 0, +1} features.

use std::collections::BTreeSet;
use std::io::BufRead;

use super::{DataError, Dataset};

/// A genotype table: one row per sample, one column per marker, entries are
/// raw status codes (e.g. `AA`, `AG`, `GA`).
#[derive(Debug, Clone)]
pub struct SnpTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub labels: Option<Vec<String>>,
}

impl SnpTable {
    /// Reads a tab-separated table with a header row of marker names. A
    /// column literally named `label` is treated as the sample class label.
    pub fn from_tsv<R: BufRead>(reader: R) -> Result<Self, DataError> {
        let mut lines = reader.lines();
        let header = match lines.next() {
            Some(line) => line?,
            None => return Err(DataError::EmptyFile),
        };
        let columns: Vec<String> = header.split('\t').map(|s| s.trim().to_string()).collect();
        let label_idx = columns.iter().position(|c| c == "label");
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for (i, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let mut fields: Vec<String> = line.split('\t').map(|s| s.trim().to_string()).collect();
            if fields.len() != columns.len() {
                return Err(DataError::Parse {
                    row: i + 2,
                    message: format!(
                        "ragged row: {} fields, expected {}",
                        fields.len(),
                        columns.len()
                    ),
                });
            }
            if let Some(idx) = label_idx {
                labels.push(fields.remove(idx));
            }
            rows.push(fields);
        }
        if rows.is_empty() {
            return Err(DataError::EmptyFile);
        }
        let mut columns = columns;
        if let Some(idx) = label_idx {
            columns.remove(idx);
        }
        Ok(SnpTable {
            columns,
            rows,
            labels: label_idx.map(|_| labels),
        })
    }
}

fn is_homozygous(code: &str) -> bool {
    let mut chars = code.chars();
    match chars.next() {
        Some(first) => chars.all(|c| c == first),
        None => false,
    }
}

/// Encodes a genotype table numerically: per column, the homozygous status
/// (a code of identical characters) maps to 0 and the two remaining statuses
/// map to -1 and +1 in lexicographic code order. Columns containing any of
/// the `missing_codes` are dropped entirely. Returns the dataset together
/// with the names of the kept columns.
pub fn snp_encode(
    table: &SnpTable,
    missing_codes: &[&str],
) -> Result<(Dataset, Vec<String>), DataError> {
    let n = table.rows.len();
    let mut kept_columns = Vec::new();
    let mut encoded: Vec<Vec<f64>> = vec![Vec::new(); n];

    'columns: for (col, name) in table.columns.iter().enumerate() {
        let mut statuses = BTreeSet::new();
        for row in &table.rows {
            let code = row[col].as_str();
            if missing_codes.contains(&code) {
                continue 'columns; // unreliable column, drop it
            }
            statuses.insert(code.to_string());
        }
        if statuses.len() > 3 {
            return Err(DataError::BadColumn(
                name.clone(),
                format!("{} distinct statuses, at most 3 supported", statuses.len()),
            ));
        }
        let homozygous: Vec<&String> = statuses.iter().filter(|c| is_homozygous(c)).collect();
        if homozygous.len() > 1 {
            return Err(DataError::BadColumn(
                name.clone(),
                format!("{} homozygous statuses, expected at most 1", homozygous.len()),
            ));
        }
        let homozygous = homozygous.first().map(|s| s.to_string());
        let heterozygous: Vec<String> = statuses
            .iter()
            .filter(|c| Some(c.as_str()) != homozygous.as_deref())
            .cloned()
            .collect();
        if heterozygous.len() > 2 {
            return Err(DataError::BadColumn(
                name.clone(),
                format!(
                    "{} heterozygous statuses, at most 2 supported",
                    heterozygous.len()
                ),
            ));
        }
        // BTreeSet iteration gives lexicographic order: first → -1, second → +1.
        let value_of = |code: &str| -> f64 {
            if Some(code) == homozygous.as_deref() {
                0.0
            } else if heterozygous.first().map(|s| s.as_str()) == Some(code) {
                -1.0
            } else {
                1.0
            }
        };
        for (i, row) in table.rows.iter().enumerate() {
            encoded[i].push(value_of(row[col].as_str()));
        }
        kept_columns.push(name.clone());
    }

    if kept_columns.is_empty() {
        return Err(DataError::BadColumn(
            "<all>".into(),
            "every column was dropped as unreliable".into(),
        ));
    }
    let dataset = Dataset::new(encoded, vec![1.0; n], table.labels.clone())?;
    Ok((dataset, kept_columns))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(columns: &[&str], rows: &[&[&str]]) -> SnpTable {
        SnpTable {
            columns: columns.iter().map(|s| s.to_string()).collect(),
            rows: rows
                .iter()
                .map(|r| r.iter().map(|s| s.to_string()).collect())
                .collect(),
            labels: None,
        }
    }

    #[test]
    fn all_homozygous_column_encodes_to_zeros() {
        let t = table(&["s1"], &[&["AA"], &["AA"], &["AA"]]);
        let (ds, kept) = snp_encode(&t, &["NN"]).unwrap();
        assert_eq!(kept, vec!["s1"]);
        assert!(ds.rows().all(|r| r == [0.0]));
    }

    #[test]
    fn heterozygous_codes_get_signs_in_lexicographic_order() {
        let t = table(&["s1"], &[&["AA"], &["AG"], &["GA"]]);
        let (ds, _) = snp_encode(&t, &["NN"]).unwrap();
        assert_eq!(ds.point(0), &[0.0]);
        assert_eq!(ds.point(1), &[-1.0]); // AG < GA
        assert_eq!(ds.point(2), &[1.0]);
    }

    #[test]
    fn column_with_missing_code_is_dropped() {
        let t = table(
            &["s1", "s2"],
            &[&["AA", "AA"], &["NN", "AG"], &["AA", "GA"]],
        );
        let (ds, kept) = snp_encode(&t, &["NN"]).unwrap();
        assert_eq!(kept, vec!["s2"]);
        assert_eq!(ds.dim(), 1);
    }

    #[test]
    fn too_many_statuses_errors_naming_the_column() {
        let t = table(&["s1"], &[&["AA"], &["AG"], &["GA"], &["CT"]]);
        let err = snp_encode(&t, &["NN"]).unwrap_err();
        match err {
            DataError::BadColumn(name, _) => assert_eq!(name, "s1"),
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn values_are_exactly_signed_units() {
        let t = table(
            &["a", "b"],
            &[&["AA", "CT"], &["AG", "TC"], &["GA", "CT"]],
        );
        let (ds, _) = snp_encode(&t, &[]).unwrap();
        for row in ds.rows() {
            for &v in row {
                assert!(v == -1.0 || v == 0.0 || v == 1.0);
            }
        }
    }

    #[test]
    fn tsv_parsing_extracts_labels() {
        let text = "label\ts1\ts2\npopA\tAA\tAG\npopB\tAA\tGA\n";
        let t = SnpTable::from_tsv(text.as_bytes()).unwrap();
        assert_eq!(t.labels.as_deref().unwrap(), &["popA", "popB"]);
        assert_eq!(t.columns, vec!["s1", "s2"]);
        let (ds, _) = snp_encode(&t, &["NN"]).unwrap();
        assert_eq!(ds.labels().unwrap(), &["popA", "popB"]);
    }
}
