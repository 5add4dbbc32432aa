//! Dense datasets from LIBSVM files or seeded synthetic generators.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use sgdsamp_core::linalg::Matrix;
use thiserror::Error;

use crate::csvio::format_float;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: malformed entry `{entry}`")]
    Malformed {
        path: PathBuf,
        line: usize,
        entry: String,
    },
    #[error("{path}:{line}: feature indices must be ascending and 1-based")]
    NonAscendingIndex { path: PathBuf, line: usize },
    #[error("{path}: file contains no samples")]
    Empty { path: PathBuf },
    #[error("{path}:{line}: non-finite value")]
    NonFinite { path: PathBuf, line: usize },
    #[error("labels take {found} distinct values; binary tasks need exactly 2")]
    NotBinary { found: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Provenance {
    Libsvm {
        path: PathBuf,
    },
    Synthetic {
        task: SyntheticTask,
        n: usize,
        d: usize,
        seed: u64,
    },
}

/// Dense design matrix plus targets. NaN/Inf are rejected at parse time,
/// never later.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub a: Matrix,
    pub y: Vec<f64>,
    pub provenance: Provenance,
}

impl Dataset {
    pub fn n(&self) -> usize {
        self.a.rows()
    }

    pub fn d(&self) -> usize {
        self.a.cols()
    }

    /// Maps the two distinct raw labels to {−1, +1} by sorted order.
    pub fn binarized_labels(&self) -> Result<Vec<f64>, DatasetError> {
        let mut distinct: Vec<f64> = Vec::new();
        for &v in &self.y {
            if !distinct.contains(&v) {
                distinct.push(v);
            }
        }
        distinct.sort_by(|a, b| a.partial_cmp(b).expect("labels are finite"));
        if distinct.len() != 2 {
            return Err(DatasetError::NotBinary {
                found: distinct.len(),
            });
        }
        Ok(self
            .y
            .iter()
            .map(|&v| if v == distinct[0] { -1.0 } else { 1.0 })
            .collect())
    }
}

/// Parses the LIBSVM sparse text format: one `label idx:val idx:val …`
/// line per sample, indices 1-based and ascending. The dense width is the
/// largest index seen.
pub fn parse_libsvm(path: &Path) -> Result<Dataset, DatasetError> {
    let text = fs::read_to_string(path).map_err(|source| DatasetError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut rows: Vec<(f64, Vec<(usize, f64)>)> = Vec::new();
    let mut width = 0usize;
    for (line_no, line) in text.lines().enumerate() {
        let line_no = line_no + 1;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split_whitespace();
        let label_txt = parts.next().expect("non-empty line has a first token");
        let label: f64 = label_txt.parse().map_err(|_| DatasetError::Malformed {
            path: path.to_path_buf(),
            line: line_no,
            entry: label_txt.to_string(),
        })?;
        if !label.is_finite() {
            return Err(DatasetError::NonFinite {
                path: path.to_path_buf(),
                line: line_no,
            });
        }
        let mut entries = Vec::new();
        let mut prev_index = 0usize;
        for token in parts {
            let (idx_txt, val_txt) =
                token
                    .split_once(':')
                    .ok_or_else(|| DatasetError::Malformed {
                        path: path.to_path_buf(),
                        line: line_no,
                        entry: token.to_string(),
                    })?;
            let index: usize = idx_txt.parse().map_err(|_| DatasetError::Malformed {
                path: path.to_path_buf(),
                line: line_no,
                entry: token.to_string(),
            })?;
            let value: f64 = val_txt.parse().map_err(|_| DatasetError::Malformed {
                path: path.to_path_buf(),
                line: line_no,
                entry: token.to_string(),
            })?;
            if index == 0 || index <= prev_index {
                return Err(DatasetError::NonAscendingIndex {
                    path: path.to_path_buf(),
                    line: line_no,
                });
            }
            if !value.is_finite() {
                return Err(DatasetError::NonFinite {
                    path: path.to_path_buf(),
                    line: line_no,
                });
            }
            prev_index = index;
            width = width.max(index);
            entries.push((index - 1, value));
        }
        rows.push((label, entries));
    }
    if rows.is_empty() || width == 0 {
        return Err(DatasetError::Empty {
            path: path.to_path_buf(),
        });
    }
    let n = rows.len();
    let mut data = vec![0.0; n * width];
    let mut y = Vec::with_capacity(n);
    for (i, (label, entries)) in rows.into_iter().enumerate() {
        y.push(label);
        for (j, value) in entries {
            data[i * width + j] = value;
        }
    }
    Ok(Dataset {
        a: Matrix::from_vec(n, width, data).expect("dimensions agree by construction"),
        y,
        provenance: Provenance::Libsvm {
            path: path.to_path_buf(),
        },
    })
}

/// Writes a dataset in LIBSVM format; zero entries are omitted and floats
/// carry 17 significant digits so a parse round-trip is exact.
pub fn write_libsvm(dataset: &Dataset, path: &Path) -> Result<(), DatasetError> {
    let mut out = String::new();
    for i in 0..dataset.n() {
        out.push_str(&format_float(dataset.y[i]));
        for (j, &v) in dataset.a.row(i).iter().enumerate() {
            if v != 0.0 {
                let _ = write!(out, " {}:{}", j + 1, format_float(v));
            }
        }
        out.push('\n');
    }
    fs::write(path, out).map_err(|source| DatasetError::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SyntheticTask {
    Ridge,
    Logistic,
    Nonconvex,
}

impl SyntheticTask {
    pub fn label(&self) -> &'static str {
        match self {
            SyntheticTask::Ridge => "ridge",
            SyntheticTask::Logistic => "logistic",
            SyntheticTask::Nonconvex => "nonconvex",
        }
    }
}

/// Seeded synthetic data. Ridge and logistic use standard Gaussian rows;
/// ridge targets are Gaussian and logistic labels are ±1 with equal
/// probability. The non-convex quadratic task draws rows from U(0, 10);
/// its targets are unused and set to zero.
pub fn gen_synthetic(task: SyntheticTask, n: usize, d: usize, seed: u64) -> Dataset {
    assert!(n >= 1 && d >= 1, "need n, d >= 1");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = match task {
        SyntheticTask::Ridge | SyntheticTask::Logistic => {
            let data: Vec<f64> = (0..n * d)
                .map(|_| StandardNormal.sample(&mut rng))
                .collect();
            Matrix::from_vec(n, d, data).expect("sized buffer")
        }
        SyntheticTask::Nonconvex => {
            let data: Vec<f64> = (0..n * d).map(|_| rng.gen_range(0.0..10.0)).collect();
            Matrix::from_vec(n, d, data).expect("sized buffer")
        }
    };
    let y: Vec<f64> = match task {
        SyntheticTask::Ridge => (0..n).map(|_| StandardNormal.sample(&mut rng)).collect(),
        SyntheticTask::Logistic => (0..n)
            .map(|_| if rng.gen_bool(0.5) { 1.0 } else { -1.0 })
            .collect(),
        SyntheticTask::Nonconvex => vec![0.0; n],
    };
    Dataset {
        a,
        y,
        provenance: Provenance::Synthetic { task, n, d, seed },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_temp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn parses_basic_lines() {
        let f = write_temp("+1 1:0.5 3:2\n-1 2:1.5\n");
        let ds = parse_libsvm(f.path()).unwrap();
        assert_eq!(ds.n(), 2);
        assert_eq!(ds.d(), 3);
        assert_eq!(ds.a.row(0), &[0.5, 0.0, 2.0]);
        assert_eq!(ds.a.row(1), &[0.0, 1.5, 0.0]);
        assert_eq!(ds.y, vec![1.0, -1.0]);
    }

    #[test]
    fn rejects_malformed_and_empty() {
        let f = write_temp("+1 1:0.5 oops\n");
        assert!(matches!(
            parse_libsvm(f.path()),
            Err(DatasetError::Malformed { line: 1, .. })
        ));
        let f = write_temp("+1 2:1.0 1:2.0\n");
        assert!(matches!(
            parse_libsvm(f.path()),
            Err(DatasetError::NonAscendingIndex { line: 1, .. })
        ));
        let f = write_temp("");
        assert!(matches!(
            parse_libsvm(f.path()),
            Err(DatasetError::Empty { .. })
        ));
        let f = write_temp("+1 1:inf\n");
        assert!(matches!(
            parse_libsvm(f.path()),
            Err(DatasetError::NonFinite { line: 1, .. })
        ));
    }

    #[test]
    fn zero_one_labels_map_to_plus_minus_one() {
        let f = write_temp("0 1:1\n1 1:2\n0 1:3\n");
        let ds = parse_libsvm(f.path()).unwrap();
        assert_eq!(ds.binarized_labels().unwrap(), vec![-1.0, 1.0, -1.0]);
    }

    #[test]
    fn binarize_rejects_more_than_two_classes() {
        let f = write_temp("0 1:1\n1 1:2\n2 1:3\n");
        let ds = parse_libsvm(f.path()).unwrap();
        assert!(matches!(
            ds.binarized_labels(),
            Err(DatasetError::NotBinary { found: 3 })
        ));
    }

    #[test]
    fn synthetic_is_deterministic_under_seed() {
        let a = gen_synthetic(SyntheticTask::Ridge, 20, 4, 9);
        let b = gen_synthetic(SyntheticTask::Ridge, 20, 4, 9);
        assert_eq!(a.a.data(), b.a.data());
        assert_eq!(a.y, b.y);
    }

    #[test]
    fn logistic_labels_are_balanced_and_nonconvex_rows_positive() {
        let ds = gen_synthetic(SyntheticTask::Logistic, 10_000, 2, 3);
        let mean: f64 = ds.y.iter().sum::<f64>() / ds.y.len() as f64;
        assert!(mean.abs() <= 0.1, "label mean {mean}");
        let ds = gen_synthetic(SyntheticTask::Nonconvex, 50, 3, 4);
        assert!(ds.a.data().iter().all(|&v| (0.0..10.0).contains(&v)));
    }

    #[test]
    fn ridge_targets_have_unit_variance() {
        let ds = gen_synthetic(SyntheticTask::Ridge, 10_000, 2, 5);
        let mean: f64 = ds.y.iter().sum::<f64>() / ds.y.len() as f64;
        let var: f64 =
            ds.y.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (ds.y.len() - 1) as f64;
        assert!((var - 1.0).abs() <= 0.2, "sample variance {var}");
    }

    #[test]
    fn libsvm_round_trip_is_exact() {
        let ds = gen_synthetic(SyntheticTask::Ridge, 30, 5, 11);
        let f = tempfile::NamedTempFile::new().unwrap();
        write_libsvm(&ds, f.path()).unwrap();
        let back = parse_libsvm(f.path()).unwrap();
        assert_eq!(back.a.data(), ds.a.data());
        assert_eq!(back.y, ds.y);
    }
}
