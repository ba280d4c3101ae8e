//! Dataset descriptors, matrix file formats and preprocessing.
//!
//! Raw data is stored samples-by-features (`m x d`). Preparation scales every
//! feature column to unit norm, centers it, and returns the transpose
//! `D in R^{d x m}` consumed by the sparse PCA loss.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

/// Where a data matrix comes from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DatasetDescriptor {
    /// CSV (`.csv`) or MatrixMarket (`.mtx`) file.
    File(PathBuf),
    /// i.i.d. standard normal `samples x features` matrix.
    Randn { samples: usize, features: usize, seed: u64 },
}

impl DatasetDescriptor {
    pub fn randn(samples: usize, features: usize, seed: u64) -> Self {
        Self::Randn { samples, features, seed }
    }

    /// Parses `randn-<m>-<d>` (seed supplied separately) as well as the full grammar.
    pub fn parse_with_seed(s: &str, seed: u64) -> Result<Self> {
        if s.starts_with("randn-") && !s.contains(':') {
            return format!("{s}:seed={seed}").parse();
        }
        s.parse()
    }
}

impl FromStr for DatasetDescriptor {
    type Err = Error;

    /// `file:<path>` | `randn-<m>-<d>:seed=<u64>`.
    fn from_str(s: &str) -> Result<Self> {
        if let Some(path) = s.strip_prefix("file:") {
            if path.is_empty() {
                return Err(Error::Parse("empty file path in dataset descriptor".into()));
            }
            return Ok(Self::File(PathBuf::from(path)));
        }
        let bad = || Error::Parse(format!("unrecognized dataset descriptor {s:?}"));
        let rest = s.strip_prefix("randn-").ok_or_else(bad)?;
        let (dims, seed) = rest.split_once(":seed=").ok_or_else(bad)?;
        let (m, d) = dims.split_once('-').ok_or_else(bad)?;
        let samples: usize = m.parse().map_err(|_| bad())?;
        let features: usize = d.parse().map_err(|_| bad())?;
        let seed: u64 = seed.parse().map_err(|_| bad())?;
        if samples == 0 || features == 0 {
            return Err(Error::EmptyData);
        }
        Ok(Self::Randn { samples, features, seed })
    }
}

impl fmt::Display for DatasetDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::File(p) => write!(f, "file:{}", p.display()),
            Self::Randn { samples, features, seed } => write!(f, "randn-{samples}-{features}:seed={seed}"),
        }
    }
}

/// Column centering rule applied after normalization.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Centering {
    /// Subtract each column's mean.
    #[default]
    Mean,
    /// `D <- D - 1 1^T D`, i.e. subtract each column's sum.
    ColumnSum,
    None,
}

/// Seeded i.i.d. standard normal `samples x features` matrix, drawn in
/// row-major order.
pub fn synthesize_randn(samples: usize, features: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = DMatrix::zeros(samples, features);
    for i in 0..samples {
        for j in 0..features {
            out[(i, j)] = StandardNormal.sample(&mut rng);
        }
    }
    out
}

/// Scales columns to unit norm, then centers them.
pub fn prepare_columns(raw: &DMatrix<f64>, centering: Centering) -> Result<DMatrix<f64>> {
    if raw.is_empty() {
        return Err(Error::EmptyData);
    }
    let mut out = raw.clone();
    let rows = out.nrows() as f64;
    for (j, mut col) in out.column_iter_mut().enumerate() {
        let norm = col.norm();
        if norm == 0.0 {
            return Err(Error::DegenerateColumn(j));
        }
        col /= norm;
        let shift = match centering {
            Centering::Mean => col.sum() / rows,
            Centering::ColumnSum => col.sum(),
            Centering::None => 0.0,
        };
        col.add_scalar_mut(-shift);
    }
    Ok(out)
}

/// Reads the raw samples-by-features matrix a descriptor points at.
pub fn load_raw(desc: &DatasetDescriptor) -> Result<DMatrix<f64>> {
    match desc {
        DatasetDescriptor::Randn { samples, features, seed } => Ok(synthesize_randn(*samples, *features, *seed)),
        DatasetDescriptor::File(path) => {
            let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
            if ext.eq_ignore_ascii_case("mtx") {
                read_matrix_market(path)
            } else {
                read_csv(path)
            }
        }
    }
}

/// Loads (or synthesizes) raw data, prepares its columns and returns the
/// features-by-samples matrix `D`.
pub fn load_or_synthesize_data(desc: &DatasetDescriptor, centering: Centering) -> Result<DMatrix<f64>> {
    let raw = load_raw(desc)?;
    Ok(prepare_columns(&raw, centering)?.transpose())
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::FileNotFound(path.display().to_string()),
        _ => Error::Io(format!("{}: {e}", path.display())),
    })
}

/// Dense CSV: a `rows,cols` header followed by `rows` lines of `cols` values.
pub fn read_csv(path: &Path) -> Result<DMatrix<f64>> {
    parse_csv(&read_text(path)?)
}

pub fn parse_csv(text: &str) -> Result<DMatrix<f64>> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
    let header = lines.next().ok_or_else(|| Error::Parse("missing `rows,cols` header".into()))?;
    let (rows, cols) = header
        .split_once(',')
        .and_then(|(a, b)| Some((a.trim().parse::<usize>().ok()?, b.trim().parse::<usize>().ok()?)))
        .ok_or_else(|| Error::Parse(format!("bad header {header:?}")))?;
    if rows == 0 || cols == 0 {
        return Err(Error::EmptyData);
    }
    let mut out = DMatrix::zeros(rows, cols);
    let mut seen = 0;
    for (i, line) in lines.enumerate() {
        if i >= rows {
            return Err(Error::Parse(format!("more than {rows} data rows")));
        }
        let vals: Vec<&str> = line.split(',').collect();
        if vals.len() != cols {
            return Err(Error::Parse(format!("row {} has {} values, expected {cols}", i + 1, vals.len())));
        }
        for (j, v) in vals.iter().enumerate() {
            out[(i, j)] = v
                .trim()
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("row {} column {}: {v:?}", i + 1, j + 1)))?;
        }
        seen += 1;
    }
    if seen != rows {
        return Err(Error::Parse(format!("expected {rows} data rows, found {seen}")));
    }
    Ok(out)
}

/// Writes the CSV layout read by [`read_csv`]; values use shortest
/// round-trip formatting.
pub fn write_csv(path: &Path, m: &DMatrix<f64>) -> Result<()> {
    let mut out = String::new();
    out.push_str(&format!("{},{}\n", m.nrows(), m.ncols()));
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| format!("{:?}", m[(i, j)])).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    let mut file = fs::File::create(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    file.write_all(out.as_bytes()).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// `%%MatrixMarket matrix coordinate real general`, 1-based entries.
pub fn read_matrix_market(path: &Path) -> Result<DMatrix<f64>> {
    parse_matrix_market(&read_text(path)?)
}

pub fn parse_matrix_market(text: &str) -> Result<DMatrix<f64>> {
    let mut lines = text.lines();
    let banner = lines.next().unwrap_or("").to_ascii_lowercase();
    let fields: Vec<&str> = banner.split_whitespace().collect();
    if fields.len() < 5
        || fields[0] != "%%matrixmarket"
        || fields[1] != "matrix"
        || fields[2] != "coordinate"
        || fields[3] != "real"
        || fields[4] != "general"
    {
        return Err(Error::Parse(format!("unsupported MatrixMarket banner {banner:?}")));
    }
    let mut body = lines.map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('%'));
    let size = body.next().ok_or_else(|| Error::Parse("missing size line".into()))?;
    let dims: Vec<usize> = size
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| Error::Parse(format!("bad size line {size:?}"))))
        .collect::<Result<_>>()?;
    let [rows, cols, nnz] = dims[..] else {
        return Err(Error::Parse(format!("bad size line {size:?}")));
    };
    if rows == 0 || cols == 0 {
        return Err(Error::EmptyData);
    }
    let mut out = DMatrix::zeros(rows, cols);
    let mut count = 0;
    for line in body {
        let toks: Vec<&str> = line.split_whitespace().collect();
        let entry = (|| {
            if toks.len() != 3 {
                return None;
            }
            let i: usize = toks[0].parse().ok()?;
            let j: usize = toks[1].parse().ok()?;
            let v: f64 = toks[2].parse().ok()?;
            (i >= 1 && i <= rows && j >= 1 && j <= cols).then_some((i - 1, j - 1, v))
        })();
        let (i, j, v) = entry.ok_or_else(|| Error::Parse(format!("bad entry {line:?}")))?;
        out[(i, j)] += v;
        count += 1;
    }
    if count != nnz {
        return Err(Error::Parse(format!("expected {nnz} entries, found {count}")));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn descriptor_grammar() {
        let d: DatasetDescriptor = "randn-4-3:seed=42".parse().unwrap();
        assert_eq!(d, DatasetDescriptor::randn(4, 3, 42));
        assert_eq!(d.to_string(), "randn-4-3:seed=42");
        assert_eq!(
            "file:/tmp/a.csv".parse::<DatasetDescriptor>().unwrap(),
            DatasetDescriptor::File("/tmp/a.csv".into())
        );
        assert_eq!(DatasetDescriptor::parse_with_seed("randn-4-3", 9).unwrap(), DatasetDescriptor::randn(4, 3, 9));
        for bad in ["randn-4:seed=1", "randn-a-3:seed=1", "mnist-1-2", "file:", "randn-4-3"] {
            assert!(bad.parse::<DatasetDescriptor>().is_err(), "{bad}");
        }
    }

    #[test]
    fn synthetic_data_is_reproducible() {
        let a = load_or_synthesize_data(&DatasetDescriptor::randn(4, 3, 42), Centering::Mean).unwrap();
        let b = load_or_synthesize_data(&DatasetDescriptor::randn(4, 3, 42), Centering::Mean).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.shape(), (3, 4));
        let c = load_or_synthesize_data(&DatasetDescriptor::randn(4, 3, 43), Centering::Mean).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn normalize_then_center() {
        let raw = DMatrix::from_column_slice(2, 1, &[3.0, 4.0]);
        let out = prepare_columns(&raw, Centering::Mean).unwrap();
        assert_abs_diff_eq!(out[(0, 0)], -0.1, epsilon = 1e-15);
        assert_abs_diff_eq!(out[(1, 0)], 0.1, epsilon = 1e-15);
        let literal = prepare_columns(&raw, Centering::ColumnSum).unwrap();
        assert_abs_diff_eq!(literal[(0, 0)], 0.6 - 1.4, epsilon = 1e-15);
    }

    #[test]
    fn zero_column_is_degenerate() {
        let raw = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 2.0, 0.0]);
        assert_eq!(prepare_columns(&raw, Centering::Mean), Err(Error::DegenerateColumn(1)));
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        let m = synthesize_randn(5, 3, 1);
        write_csv(&path, &m).unwrap();
        assert_eq!(read_csv(&path).unwrap(), m);
        let desc = DatasetDescriptor::File(path);
        assert_eq!(load_raw(&desc).unwrap(), m);
    }

    #[test]
    fn csv_errors() {
        assert!(matches!(
            read_csv(Path::new("/definitely/not/here.csv")),
            Err(Error::FileNotFound(_))
        ));
        assert!(matches!(parse_csv("2,2\n1,2\n3\n"), Err(Error::Parse(_))));
        assert!(matches!(parse_csv("2,2\n1,2\n"), Err(Error::Parse(_))));
        assert!(matches!(parse_csv("x\n"), Err(Error::Parse(_))));
        assert!(matches!(parse_csv("1,1\nabc\n"), Err(Error::Parse(_))));
    }

    #[test]
    fn matrix_market_coordinate() {
        let text = "%%MatrixMarket matrix coordinate real general\n% comment\n3 2 3\n1 1 1.5\n3 2 -2\n2 1 4e-1\n";
        let m = parse_matrix_market(text).unwrap();
        assert_eq!(m, DMatrix::from_row_slice(3, 2, &[1.5, 0.0, 0.4, 0.0, 0.0, -2.0]));
        assert!(parse_matrix_market("%%MatrixMarket matrix array real general\n1 1\n1\n").is_err());
        assert!(parse_matrix_market("%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1\n").is_err());
        assert!(parse_matrix_market("%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1\n").is_err());
    }
}
