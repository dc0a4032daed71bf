//! CSV interchange: one headerless CSV per view (rows = features, columns =
//! instances), an optional availability sidecar per view (one ascending sample
//! id per line) and an optional single-column label file.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::MultiViewDataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetFiles {
    pub views: Vec<PathBuf>,
    /// Per-view sidecar; a missing entry means the view is complete.
    #[serde(default)]
    pub availability: Vec<Option<PathBuf>>,
    #[serde(default)]
    pub labels: Option<PathBuf>,
}

pub fn read_matrix_csv(path: &Path) -> Result<Array2<f64>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)?;
    let mut values = Vec::new();
    let mut cols = None;
    let mut rows = 0;
    for (r, record) in reader.records().enumerate() {
        let record = record?;
        match cols {
            None => cols = Some(record.len()),
            Some(c) if c != record.len() => {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    row: r + 1,
                    col: record.len().min(c) + 1,
                    msg: format!("expected {c} columns, found {}", record.len()),
                })
            }
            _ => {}
        }
        for (c, cell) in record.iter().enumerate() {
            let value: f64 = cell.parse().map_err(|_| Error::Parse {
                path: path.to_path_buf(),
                row: r + 1,
                col: c + 1,
                msg: format!("not a number: {cell:?}"),
            })?;
            if !value.is_finite() {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    row: r + 1,
                    col: c + 1,
                    msg: format!("non-finite value {cell:?}"),
                });
            }
            values.push(value);
        }
        rows += 1;
    }
    let cols = cols.unwrap_or(0);
    Array2::from_shape_vec((rows, cols), values).map_err(|e| Error::Dimension(e.to_string()))
}

pub fn write_matrix_csv(path: &Path, m: &Array2<f64>) -> Result<()> {
    let mut out = String::new();
    for row in m.rows() {
        let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(out.as_bytes()).map_err(|e| Error::io(path, e))
}

fn read_integer_lines(path: &Path) -> Result<Vec<i64>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (r, line) in text.lines().enumerate() {
        let cell = line.trim();
        if cell.is_empty() {
            continue;
        }
        let value = cell.parse().map_err(|_| Error::Parse {
            path: path.to_path_buf(),
            row: r + 1,
            col: 1,
            msg: format!("not an integer: {cell:?}"),
        })?;
        out.push(value);
    }
    Ok(out)
}

pub fn read_availability(path: &Path) -> Result<Vec<usize>> {
    let ids = read_integer_lines(path)?;
    let mut out = Vec::with_capacity(ids.len());
    for (r, id) in ids.into_iter().enumerate() {
        if id < 0 {
            return Err(Error::InvalidAvailability(format!(
                "{}: negative sample id on line {}",
                path.display(),
                r + 1
            )));
        }
        out.push(id as usize);
    }
    if !out.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::InvalidAvailability(format!(
            "{}: sample ids must be strictly ascending",
            path.display()
        )));
    }
    Ok(out)
}

pub fn read_labels(path: &Path) -> Result<Vec<i64>> {
    read_integer_lines(path)
}

pub fn load_dataset(files: &DatasetFiles) -> Result<MultiViewDataset> {
    if files.views.is_empty() {
        return Err(Error::Dimension("no view files given".into()));
    }
    if files.availability.len() > files.views.len() {
        return Err(Error::Dimension(format!(
            "{} availability sidecars for {} views",
            files.availability.len(),
            files.views.len()
        )));
    }
    let views = files
        .views
        .iter()
        .map(|p| read_matrix_csv(p))
        .collect::<Result<Vec<_>>>()?;
    let sidecars = (0..views.len())
        .map(|v| match files.availability.get(v) {
            Some(Some(p)) => read_availability(p).map(Some),
            _ => Ok(None),
        })
        .collect::<Result<Vec<_>>>()?;
    let labels = files.labels.as_deref().map(read_labels).transpose()?;

    // n comes from the labels, else from complete views, else from the largest id.
    let complete_widths: Vec<usize> = views
        .iter()
        .zip(&sidecars)
        .filter(|(_, s)| s.is_none())
        .map(|(x, _)| x.ncols())
        .collect();
    if complete_widths.windows(2).any(|w| w[0] != w[1]) {
        return Err(Error::Dimension(format!(
            "views without availability sidecars have differing instance counts {complete_widths:?}"
        )));
    }
    let n = if let Some(l) = &labels {
        l.len()
    } else if let Some(&w) = complete_widths.first() {
        w
    } else {
        sidecars
            .iter()
            .flatten()
            .flat_map(|a| a.last().copied())
            .max()
            .map(|m| m + 1)
            .unwrap_or(0)
    };
    let availability = views
        .iter()
        .zip(sidecars)
        .enumerate()
        .map(|(v, (x, s))| match s {
            Some(a) => Ok(a),
            None if x.ncols() == n => Ok((0..n).collect()),
            None => Err(Error::Dimension(format!(
                "view {v} has {} instances but the dataset has {n} samples",
                x.ncols()
            ))),
        })
        .collect::<Result<Vec<_>>>()?;
    MultiViewDataset::new(views, availability, n, labels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::fs;

    fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
        let p = dir.join(name);
        fs::write(&p, body).unwrap();
        p
    }

    fn csv_of(rows: usize, cols: usize) -> String {
        (0..rows)
            .map(|r| {
                (0..cols)
                    .map(|c| format!("{}.5", r * cols + c))
                    .collect::<Vec<_>>()
                    .join(",")
            })
            .collect::<Vec<_>>()
            .join("\n")
    }

    #[test]
    fn loads_two_views_with_labels() {
        let dir = tempfile::tempdir().unwrap();
        let a = write(dir.path(), "a.csv", &csv_of(4, 10));
        let b = write(dir.path(), "b.csv", &csv_of(6, 10));
        let labels = (0..10)
            .map(|i| (i % 3).to_string())
            .collect::<Vec<_>>()
            .join("\n");
        let l = write(dir.path(), "labels.csv", &labels);
        let ds = load_dataset(&DatasetFiles {
            views: vec![a, b],
            availability: vec![],
            labels: Some(l),
        })
        .unwrap();
        assert_eq!(ds.n_views(), 2);
        assert_eq!(ds.n_samples(), 10);
        assert_eq!(ds.view(0).dim(), 4);
        assert_eq!(ds.view(1).dim(), 6);
        assert_eq!(ds.view(0).data()[[1, 2]], 12.5);
        assert_eq!(ds.n_classes(), Some(3));
    }

    #[test]
    fn nan_cell_names_position() {
        let dir = tempfile::tempdir().unwrap();
        let a = write(dir.path(), "a.csv", "1,2,3\n4,NaN,6\n");
        match read_matrix_csv(&a) {
            Err(Error::Parse { row, col, .. }) => assert_eq!((row, col), (2, 2)),
            other => panic!("expected parse error, got {other:?}"),
        }
        let b = write(dir.path(), "b.csv", "1,x\n");
        assert!(matches!(
            read_matrix_csv(&b),
            Err(Error::Parse { row: 1, col: 2, .. })
        ));
    }

    #[test]
    fn width_mismatch_without_sidecar() {
        let dir = tempfile::tempdir().unwrap();
        let a = write(dir.path(), "a.csv", &csv_of(2, 10));
        let b = write(dir.path(), "b.csv", &csv_of(2, 9));
        let err = load_dataset(&DatasetFiles {
            views: vec![a, b],
            availability: vec![],
            labels: None,
        });
        assert!(matches!(err, Err(Error::Dimension(_))));
    }

    #[test]
    fn sidecar_makes_partial_view_valid() {
        let dir = tempfile::tempdir().unwrap();
        let a = write(dir.path(), "a.csv", &csv_of(2, 5));
        let b = write(dir.path(), "b.csv", &csv_of(3, 3));
        let s = write(dir.path(), "b.ids", "0\n2\n4\n");
        let ds = load_dataset(&DatasetFiles {
            views: vec![a, b],
            availability: vec![None, Some(s)],
            labels: None,
        })
        .unwrap();
        assert_eq!(ds.n_samples(), 5);
        assert_eq!(ds.availability()[1], vec![0, 2, 4]);
    }

    #[test]
    fn missing_label_file_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let a = write(dir.path(), "a.csv", &csv_of(2, 5));
        let err = load_dataset(&DatasetFiles {
            views: vec![a],
            availability: vec![],
            labels: Some(dir.path().join("nope.csv")),
        });
        assert!(matches!(err, Err(Error::Io { .. })));
    }

    #[test]
    fn matrix_csv_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let m = Array2::from_shape_fn((3, 4), |(i, j)| (i as f64 + 0.1) / (j as f64 + 0.7));
        let p = dir.path().join("m.csv");
        write_matrix_csv(&p, &m).unwrap();
        assert_eq!(read_matrix_csv(&p).unwrap(), m);
    }
}
