//! CSV ingestion and seeded train/test splits.

use std::io::Read;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::evaluation::PointSet;
use crate::pipeline::LabeledDataset;

/// A labeled dataset read from CSV with its feature column names.
#[derive(Clone, Debug, PartialEq)]
pub struct CsvDataset {
    pub feature_names: Vec<String>,
    pub data: LabeledDataset<f64>,
}

/// Reads a CSV file with a header row. `label_col` is a column name or,
/// failing that, a zero-based column index. All other columns must be
/// numeric. Labels are numbered by first occurrence.
pub fn load_csv(path: impl AsRef<Path>, label_col: &str) -> Result<CsvDataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::Data(format!("cannot open {}: {e}", path.display())))?;
    read_csv(file, label_col)
}

pub fn read_csv(reader: impl Read, label_col: &str) -> Result<CsvDataset> {
    let (headers, records) = read_table(reader)?;
    let label_idx = headers
        .iter()
        .position(|h| h == label_col)
        .or_else(|| label_col.parse::<usize>().ok().filter(|&i| i < headers.len()))
        .ok_or_else(|| Error::Data(format!("label column '{label_col}' not found")))?;
    let feature_idx: Vec<usize> = (0..headers.len()).filter(|&i| i != label_idx).collect();
    if feature_idx.is_empty() {
        return Err(Error::Data("no feature columns besides the label".into()));
    }
    let rows = parse_rows(&headers, &records, &feature_idx)?;
    let mut class_names: Vec<String> = Vec::new();
    let labels = records
        .iter()
        .map(|r| {
            let name = r[label_idx].trim();
            match class_names.iter().position(|c| c == name) {
                Some(i) => i,
                None => {
                    class_names.push(name.to_string());
                    class_names.len() - 1
                }
            }
        })
        .collect();
    Ok(CsvDataset {
        feature_names: feature_idx.iter().map(|&i| headers[i].clone()).collect(),
        data: LabeledDataset::new(PointSet::from_rows(&rows)?, labels, class_names)?,
    })
}

/// Reads the numeric columns `columns` (by name) of a CSV file, ignoring
/// all others.
pub fn load_features(path: impl AsRef<Path>, columns: &[String]) -> Result<PointSet<f64>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::Data(format!("cannot open {}: {e}", path.display())))?;
    let (headers, records) = read_table(file)?;
    let idx = columns
        .iter()
        .map(|c| {
            headers
                .iter()
                .position(|h| h == c)
                .ok_or_else(|| Error::Data(format!("column '{c}' not found")))
        })
        .collect::<Result<Vec<_>>>()?;
    PointSet::from_rows(&parse_rows(&headers, &records, &idx)?)
}

/// Labels of `column` mapped onto the given class names.
pub fn load_labels(path: impl AsRef<Path>, column: &str, classes: &[String]) -> Result<Vec<usize>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::Data(format!("cannot open {}: {e}", path.display())))?;
    let (headers, records) = read_table(file)?;
    let idx = headers
        .iter()
        .position(|h| h == column)
        .ok_or_else(|| Error::Data(format!("label column '{column}' not found")))?;
    records
        .iter()
        .enumerate()
        .map(|(row, r)| {
            let name = r[idx].trim();
            classes
                .iter()
                .position(|c| c == name)
                .ok_or_else(|| Error::Data(format!("row {}: unknown class '{name}'", row + 2)))
        })
        .collect()
}

fn read_table(reader: impl Read) -> Result<(Vec<String>, Vec<csv::StringRecord>)> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers: Vec<String> = rdr
        .headers()
        .map_err(|e| Error::Data(format!("cannot read CSV header: {e}")))?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    if headers.is_empty() || headers.iter().all(String::is_empty) {
        return Err(Error::Data("empty CSV file".into()));
    }
    let records = rdr
        .records()
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| Error::Data(format!("malformed CSV: {e}")))?;
    if records.is_empty() {
        return Err(Error::Data("CSV file has no data rows".into()));
    }
    Ok((headers, records))
}

fn parse_rows(headers: &[String], records: &[csv::StringRecord], columns: &[usize]) -> Result<Vec<Vec<f64>>> {
    records
        .iter()
        .enumerate()
        .map(|(row, r)| {
            columns
                .iter()
                .map(|&j| {
                    let cell = r.get(j).unwrap_or("").trim();
                    cell.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| {
                        Error::Data(format!(
                            "row {}, column '{}': '{cell}' is not a finite number",
                            row + 2,
                            headers[j]
                        ))
                    })
                })
                .collect()
        })
        .collect()
}

/// Seeded shuffle followed by a cut after `round(m * fraction)` points. Not
/// stratified.
pub fn split(
    data: &LabeledDataset<f64>,
    fraction: f64,
    seed: u64,
) -> Result<(LabeledDataset<f64>, LabeledDataset<f64>)> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::Config(format!(
            "train fraction must lie in (0, 1), got {fraction}"
        )));
    }
    let m = data.len();
    let cut = (m as f64 * fraction).round() as usize;
    if cut == 0 || cut == m {
        return Err(Error::Config(format!(
            "a train fraction of {fraction} leaves one side of the split empty for {m} points"
        )));
    }
    let order = permutation(m, seed);
    Ok((data.select(&order[..cut])?, data.select(&order[cut..])?))
}

pub(crate) fn permutation(m: usize, seed: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..m).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    order
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOY: &str = "a,b,label\n1,2,x\n3,4,y\n5,6,x\n";

    #[test]
    fn reads_and_remaps_labels() {
        let d = read_csv(TOY.as_bytes(), "label").unwrap();
        assert_eq!(d.feature_names, vec!["a", "b"]);
        assert_eq!(d.data.labels(), &[0, 1, 0]);
        assert_eq!(d.data.class_names(), &["x", "y"]);
        assert_eq!(d.data.points().row(1), vec![3.0, 4.0]);
        let by_index = read_csv(TOY.as_bytes(), "2").unwrap();
        assert_eq!(by_index, d);
    }

    #[test]
    fn single_row() {
        let d = read_csv("a,label\n0.5,k\n".as_bytes(), "label").unwrap();
        assert_eq!(d.data.len(), 1);
    }

    #[test]
    fn load_errors() {
        let err = read_csv("a,label\n1,x\nfoo,y\n".as_bytes(), "label").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("row 3") && msg.contains("'a'"), "{msg}");
        assert_eq!(err.exit_code(), 3);
        assert!(read_csv("".as_bytes(), "label").is_err());
        assert!(read_csv("a,label\n".as_bytes(), "label").is_err());
        assert!(read_csv(TOY.as_bytes(), "missing").is_err());
        assert!(read_csv("label\nx\n".as_bytes(), "label").is_err());
    }

    #[test]
    fn split_sizes_and_reproducibility() {
        let rows: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64]).collect();
        let data = LabeledDataset::new(PointSet::from_rows(&rows).unwrap(), vec![0; 10], vec!["c".into()]).unwrap();
        let (a, b) = split(&data, 0.6, 42).unwrap();
        assert_eq!((a.len(), b.len()), (6, 4));
        let (a2, b2) = split(&data, 0.6, 42).unwrap();
        assert_eq!((a.ids(), b.ids()), (a2.ids(), b2.ids()));
        let mut all: Vec<usize> = a.ids().iter().chain(b.ids()).copied().collect();
        all.sort();
        assert_eq!(all, (0..10).collect::<Vec<_>>());
        let (c, _) = split(&data, 0.6, 43).unwrap();
        assert_ne!(a.ids(), c.ids());
        assert!(split(&data, 1.0, 1).is_err());
        assert!(split(&data, 0.01, 1).is_err());
    }
}
