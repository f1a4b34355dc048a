//! Datasets: libsvm text files and seeded synthetic instances.

use crate::linalg::{Matrix, Vector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::fmt::Write as _;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("line {line}: feature index {index} exceeds n_features = {n_features}")]
    IndexOutOfRange {
        line: usize,
        index: usize,
        n_features: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum DataSource {
    Libsvm(String),
    Synthetic { seed: u64 },
    Inline,
}

/// Design matrix `A` (one row per term) and offsets/labels `b`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub a: Matrix,
    pub b: Vector,
    pub source: DataSource,
}

impl Dataset {
    pub fn new(a: Matrix, b: Vector) -> Self {
        assert_eq!(a.nrows(), b.len(), "A and b must have the same number of rows");
        Self {
            a,
            b,
            source: DataSource::Inline,
        }
    }

    pub fn rows(&self) -> usize {
        self.a.nrows()
    }

    pub fn cols(&self) -> usize {
        self.a.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.rows() == 0
    }
}

/// Entries of `A` then `b`, row-major, i.i.d. uniform on `[−1, 1]`.
pub fn synthetic_dataset(d: usize, n: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut entries = Vec::with_capacity(d * n);
    for _ in 0..d * n {
        entries.push(rng.random_range(-1.0..=1.0));
    }
    let a = Matrix::from_row_slice(d, n, &entries);
    let b = Vector::from_fn(d, |_, _| rng.random_range(-1.0..=1.0));
    Dataset {
        a,
        b,
        source: DataSource::Synthetic { seed },
    }
}

/// Parses libsvm text. Labels stay as written unless every label lies in
/// `{0, 1}`, in which case they are mapped to `{−1, +1}`.
pub fn parse_libsvm(text: &str, n_features: Option<usize>) -> Result<Dataset, DataError> {
    let mut labels = Vec::new();
    let mut rows: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut max_index = 0usize;
    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut tokens = content.split_whitespace();
        let label_tok = tokens.next().expect("non-empty line has a token");
        let label: f64 = label_tok.parse().map_err(|_| DataError::Parse {
            line,
            msg: format!("invalid label '{label_tok}'"),
        })?;
        let mut row = Vec::new();
        for tok in tokens {
            let (idx, val) = tok.split_once(':').ok_or_else(|| DataError::Parse {
                line,
                msg: format!("expected index:value, got '{tok}'"),
            })?;
            let index: usize = idx.parse().map_err(|_| DataError::Parse {
                line,
                msg: format!("invalid feature index '{idx}'"),
            })?;
            if index == 0 {
                return Err(DataError::Parse {
                    line,
                    msg: "feature indices are 1-based".into(),
                });
            }
            let value: f64 = val.parse().map_err(|_| DataError::Parse {
                line,
                msg: format!("invalid feature value '{val}'"),
            })?;
            if let Some(limit) = n_features {
                if index > limit {
                    return Err(DataError::IndexOutOfRange {
                        line,
                        index,
                        n_features: limit,
                    });
                }
            }
            max_index = max_index.max(index);
            row.push((index - 1, value));
        }
        labels.push(label);
        rows.push(row);
    }

    let cols = n_features.unwrap_or(max_index);
    let mut a = Matrix::zeros(rows.len(), cols);
    for (i, row) in rows.iter().enumerate() {
        for &(j, v) in row {
            a[(i, j)] = v;
        }
    }
    let binary01 = !labels.is_empty() && labels.iter().all(|&l| l == 0.0 || l == 1.0);
    let b = Vector::from_iterator(
        labels.len(),
        labels
            .iter()
            .map(|&l| if binary01 { 2.0 * l - 1.0 } else { l }),
    );
    Ok(Dataset {
        a,
        b,
        source: DataSource::Inline,
    })
}

pub fn load_libsvm(path: &Path, n_features: Option<usize>) -> Result<Dataset, DataError> {
    let text = std::fs::read_to_string(path).map_err(|source| DataError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut data = parse_libsvm(&text, n_features)?;
    data.source = DataSource::Libsvm(path.display().to_string());
    Ok(data)
}

/// Serializes nonzero entries in libsvm format.
pub fn to_libsvm_string(data: &Dataset) -> String {
    let mut out = String::new();
    for i in 0..data.rows() {
        write!(out, "{}", data.b[i]).unwrap();
        for j in 0..data.cols() {
            let v = data.a[(i, j)];
            if v != 0.0 {
                write!(out, " {}:{}", j + 1, v).unwrap();
            }
        }
        out.push('\n');
    }
    out
}

pub fn write_libsvm(data: &Dataset, path: &Path) -> Result<(), DataError> {
    std::fs::write(path, to_libsvm_string(data)).map_err(|source| DataError::Io {
        path: path.display().to_string(),
        source,
    })
}
