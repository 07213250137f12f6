//! CSV dataset I/O: one sample per row, `label,f1,...,fd`, UTF-8 with `.`
//! decimal separator.

use std::path::Path;

use crate::data::{Dataset, Sample};
use crate::error::{Error, Result};

/// Reads a CSV dataset. `has_header` skips the first row.
pub fn load_csv(path: &Path, has_header: bool) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(has_header)
        .flexible(true)
        .from_path(path)
        .map_err(|e| Error::format(path, format!("cannot open: {e}")))?;

    let mut samples = Vec::new();
    let mut feature_dim: Option<usize> = None;
    for (i, record) in reader.records().enumerate() {
        // 1-based data row number, accounting for a skipped header.
        let row = i + 1 + usize::from(has_header);
        let record = record.map_err(|e| Error::format(path, format!("row {row}: {e}")))?;
        if record.len() < 2 {
            return Err(Error::format(
                path,
                format!("row {row}: need a label and at least one feature"),
            ));
        }
        let dim = record.len() - 1;
        match feature_dim {
            None => feature_dim = Some(dim),
            Some(d) if d != dim => {
                return Err(Error::format(
                    path,
                    format!("row {row}: {dim} features, expected {d}"),
                ));
            }
            _ => {}
        }
        let label: usize = record[0]
            .trim()
            .parse()
            .map_err(|_| Error::format(path, format!("row {row}: bad label {:?}", &record[0])))?;
        let features = record
            .iter()
            .skip(1)
            .enumerate()
            .map(|(j, cell)| {
                cell.trim().parse::<f64>().map_err(|_| {
                    Error::format(path, format!("row {row}: bad value {cell:?} in column {}", j + 2))
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        samples.push(Sample {
            features,
            label,
            index: samples.len(),
        });
    }
    if samples.is_empty() {
        return Err(Error::format(path, "no data rows"));
    }
    let num_classes = samples.iter().map(|s| s.label).max().unwrap() + 1;
    Dataset::new(samples, num_classes)
}

/// Writes a dataset back out in the same row format (no header).
pub fn write_csv(dataset: &Dataset, path: &Path) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    for s in dataset.samples() {
        let mut row = vec![s.label.to_string()];
        row.extend(s.features.iter().map(|v| v.to_string()));
        writer.write_record(&row)?;
    }
    writer.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::synth_blobs;
    use std::io::Write;

    #[test]
    fn loads_small_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("d.csv");
        std::fs::File::create(&p)
            .unwrap()
            .write_all(b"0,1.5,2.5\n1,0.25,-1.0\n0,3.0,4.0\n")
            .unwrap();
        let d = load_csv(&p, false).unwrap();
        assert_eq!(d.len(), 3);
        assert_eq!(d.feature_dim(), 2);
        assert_eq!(d.num_classes(), 2);
        assert_eq!(d.sample(1).features, vec![0.25, -1.0]);
    }

    #[test]
    fn header_flag_skips_first_row() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("d.csv");
        std::fs::File::create(&p)
            .unwrap()
            .write_all(b"label,x,y\n0,1.0,2.0\n")
            .unwrap();
        let d = load_csv(&p, true).unwrap();
        assert_eq!(d.len(), 1);
    }

    #[test]
    fn empty_file_is_format_error() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("d.csv");
        std::fs::File::create(&p).unwrap();
        let err = load_csv(&p, false).unwrap_err();
        assert!(matches!(err, Error::Format { .. }));
    }

    #[test]
    fn ragged_row_names_row_number() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("d.csv");
        std::fs::File::create(&p)
            .unwrap()
            .write_all(b"0,1.0,2.0\n1,3.0\n")
            .unwrap();
        let err = load_csv(&p, false).unwrap_err();
        assert!(err.to_string().contains("row 2"), "{err}");
    }

    #[test]
    fn non_numeric_cell_names_row() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("d.csv");
        std::fs::File::create(&p)
            .unwrap()
            .write_all(b"0,1.0\n0,oops\n")
            .unwrap();
        let err = load_csv(&p, false).unwrap_err();
        assert!(err.to_string().contains("row 2"), "{err}");
    }

    #[test]
    fn round_trips_synthetic_dataset() {
        let d = synth_blobs(3, 5, 4, 0.3, 11).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("blobs.csv");
        write_csv(&d, &p).unwrap();
        let back = load_csv(&p, false).unwrap();
        assert_eq!(d, back);
    }
}
