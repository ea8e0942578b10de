//! Labeled datasets and their CSV form.
//!
//! A dataset is an ordered list of rows, each a feature payload (opaque to
//! this crate) plus one real label. CSV files carry the payload as every
//! non-label column; the reader records the header layout so the writer can
//! reproduce the file with only the label column changed. Field contents are
//! preserved exactly; quoting is normalized to RFC 4180 on output.

use std::fs::File;
use std::io::{self, BufReader, BufWriter};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledRow {
    /// Non-label CSV fields in file order (empty for synthetic data).
    pub payload: Vec<String>,
    pub label: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct LabeledDataset {
    pub rows: Vec<LabeledRow>,
    /// Public knowledge of the label range, when there is any; used to
    /// calibrate noise sensitivity.
    pub label_bounds: Option<(f64, f64)>,
}

/// Header layout of the CSV a dataset came from; needed to write it back.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvLayout {
    /// Full header row, label column included.
    pub header: Vec<String>,
    pub label_index: usize,
}

impl LabeledDataset {
    pub fn from_labels<I: IntoIterator<Item = f64>>(labels: I) -> Self {
        Self {
            rows: labels
                .into_iter()
                .map(|label| LabeledRow {
                    payload: Vec::new(),
                    label,
                })
                .collect(),
            label_bounds: None,
        }
    }

    pub fn with_label_bounds(mut self, lo: f64, hi: f64) -> Result<Self> {
        if !lo.is_finite() || !hi.is_finite() {
            return Err(Error::NonFiniteValue {
                what: "label bound",
            });
        }
        if !(lo < hi) {
            return Err(Error::ReversedBounds { lo, hi });
        }
        self.label_bounds = Some((lo, hi));
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn labels(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.label).collect()
    }

    /// All labels finite, or the first offender as [`Error::BadLabel`].
    pub fn check_labels(&self) -> Result<()> {
        for (row, r) in self.rows.iter().enumerate() {
            if !r.label.is_finite() {
                return Err(Error::BadLabel {
                    row,
                    value: r.label.to_string(),
                });
            }
        }
        Ok(())
    }
}

/// Parses a labeled dataset from CSV with a header row.
///
/// Row indices in errors are 0-based data rows (header excluded).
pub fn from_csv_reader<R: io::Read>(reader: R, label_col: &str) -> Result<(LabeledDataset, CsvLayout)> {
    let mut rdr = csv::Reader::from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
    let label_index = header
        .iter()
        .position(|name| name == label_col)
        .ok_or_else(|| Error::MissingLabelColumn {
            name: label_col.to_owned(),
        })?;
    let mut rows = Vec::new();
    for (row, record) in rdr.records().enumerate() {
        let record = record?;
        let raw = &record[label_index];
        let label: f64 = raw.parse().map_err(|_| Error::BadLabel {
            row,
            value: raw.to_owned(),
        })?;
        if !label.is_finite() {
            return Err(Error::BadLabel {
                row,
                value: raw.to_owned(),
            });
        }
        let payload = record
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != label_index)
            .map(|(_, f)| f.to_owned())
            .collect();
        rows.push(LabeledRow { payload, label });
    }
    Ok((
        LabeledDataset {
            rows,
            label_bounds: None,
        },
        CsvLayout {
            header,
            label_index,
        },
    ))
}

pub fn read_labeled_csv(path: &Path, label_col: &str) -> Result<(LabeledDataset, CsvLayout)> {
    from_csv_reader(BufReader::new(File::open(path)?), label_col)
}

/// Writes a dataset back out under the given layout.
///
/// With `original` set, its labels are appended as an extra
/// `<label>_original` column. That column reveals the sensitive values next
/// to the randomized ones: it exists for testing and debugging, never for
/// release.
pub fn to_csv_writer<W: io::Write>(
    writer: W,
    layout: &CsvLayout,
    data: &LabeledDataset,
    original: Option<&LabeledDataset>,
) -> Result<()> {
    if let Some(orig) = original {
        if orig.len() != data.len() {
            return Err(Error::LengthMismatch {
                left: data.len(),
                right: orig.len(),
            });
        }
    }
    let mut wtr = csv::Writer::from_writer(writer);
    let mut header = layout.header.clone();
    if original.is_some() {
        header.push(format!("{}_original", layout.header[layout.label_index]));
    }
    wtr.write_record(&header)?;
    for (i, row) in data.rows.iter().enumerate() {
        if row.payload.len() + 1 != layout.header.len() {
            return Err(Error::LengthMismatch {
                left: row.payload.len() + 1,
                right: layout.header.len(),
            });
        }
        let mut fields: Vec<String> = Vec::with_capacity(header.len());
        fields.extend_from_slice(&row.payload[..layout.label_index]);
        fields.push(row.label.to_string());
        fields.extend_from_slice(&row.payload[layout.label_index..]);
        if let Some(orig) = original {
            fields.push(orig.rows[i].label.to_string());
        }
        wtr.write_record(&fields)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn write_labeled_csv(
    path: &Path,
    layout: &CsvLayout,
    data: &LabeledDataset,
    original: Option<&LabeledDataset>,
) -> Result<()> {
    to_csv_writer(BufWriter::new(File::create(path)?), layout, data, original)
}
