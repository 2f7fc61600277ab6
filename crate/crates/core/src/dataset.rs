//! Data ingestion, normalization and per-point tags.

use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DataError {
    #[error("io error: {0}")]
    Io(String),
    #[error("csv error: {0}")]
    Csv(String),
    #[error("line {line}, column `{column}`: cannot parse `{value}` as a number")]
    Parse { line: u64, column: String, value: String },
    #[error("need at least 3 numeric attributes, got {0}")]
    TooFewDims(usize),
    #[error("need at least 3 complete rows, got {0}")]
    TooFewRows(usize),
    #[error("row {row}, column {column}: value is not finite")]
    NonFinite { row: usize, column: usize },
    #[error("row {row} has {got} values, expected {expected}")]
    RaggedRow { row: usize, got: usize, expected: usize },
    #[error("class column `{0}` not found in header")]
    MissingClassColumn(String),
    #[error("point id {id} out of range for {n} points")]
    BadId { id: usize, n: usize },
}

/// Per-attribute parameters: `normalized = (raw - min) / (max - min) - mean`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Normalization {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
    pub mean: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub name: String,
    pub attributes: Vec<String>,
    pub raw: Vec<Vec<f64>>,
    pub normalized: Vec<Vec<f64>>,
    pub class_column: Option<Vec<usize>>,
    pub class_names: Vec<String>,
    pub normalization: Normalization,
    /// Non-fatal ingestion notes (dropped rows, constant columns).
    pub warnings: Vec<String>,
}

impl Dataset {
    pub fn from_raw(
        name: impl Into<String>,
        attributes: Vec<String>,
        raw: Vec<Vec<f64>>,
        classes: Option<(Vec<usize>, Vec<String>)>,
    ) -> Result<Self, DataError> {
        let n_attr = attributes.len();
        if n_attr < 3 {
            return Err(DataError::TooFewDims(n_attr));
        }
        if raw.len() < 3 {
            return Err(DataError::TooFewRows(raw.len()));
        }
        for (r, row) in raw.iter().enumerate() {
            if row.len() != n_attr {
                return Err(DataError::RaggedRow { row: r, got: row.len(), expected: n_attr });
            }
            if let Some(c) = row.iter().position(|v| !v.is_finite()) {
                return Err(DataError::NonFinite { row: r, column: c });
            }
        }
        let mut warnings = Vec::new();
        let (normalized, normalization) = normalize(&raw, &attributes, &mut warnings);
        let (class_column, class_names) = match classes {
            Some((ids, names)) => (Some(ids), names),
            None => (None, Vec::new()),
        };
        Ok(Self { name: name.into(), attributes, raw, normalized, class_column, class_names, normalization, warnings })
    }

    pub fn n_points(&self) -> usize {
        self.raw.len()
    }

    pub fn n_dims(&self) -> usize {
        self.attributes.len()
    }

    pub fn labels(&self) -> Option<&[usize]> {
        self.class_column.as_deref()
    }
}

fn normalize(raw: &[Vec<f64>], attributes: &[String], warnings: &mut Vec<String>) -> (Vec<Vec<f64>>, Normalization) {
    let d = attributes.len();
    let n = raw.len() as f64;
    let mut min = vec![f64::INFINITY; d];
    let mut max = vec![f64::NEG_INFINITY; d];
    for row in raw {
        for j in 0..d {
            min[j] = min[j].min(row[j]);
            max[j] = max[j].max(row[j]);
        }
    }
    for j in 0..d {
        if max[j] == min[j] {
            warnings.push(format!("column `{}` is constant; normalized to zero", attributes[j]));
        }
    }
    let scaled = |v: f64, j: usize| if max[j] > min[j] { (v - min[j]) / (max[j] - min[j]) } else { 0.0 };
    let mut mean = vec![0.0; d];
    for row in raw {
        for j in 0..d {
            mean[j] += scaled(row[j], j);
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let normalized = raw.iter().map(|row| (0..d).map(|j| scaled(row[j], j) - mean[j]).collect()).collect();
    (normalized, Normalization { min, max, mean })
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LoadOptions {
    pub class_column: Option<String>,
}

pub fn load_csv(path: &Path, opts: &LoadOptions) -> Result<Dataset, DataError> {
    let file = std::fs::File::open(path).map_err(|e| DataError::Io(format!("{}: {e}", path.display())))?;
    let name = path.file_stem().map_or_else(|| "data".to_string(), |s| s.to_string_lossy().into_owned());
    parse_csv(file, &name, opts)
}

/// Parses comma-separated text with a header row. Rows with an empty cell are
/// dropped and reported in the dataset warnings.
pub fn parse_csv<R: Read>(input: R, name: &str, opts: &LoadOptions) -> Result<Dataset, DataError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(input);
    let header: Vec<String> = rdr.headers().map_err(|e| DataError::Csv(e.to_string()))?.iter().map(str::to_string).collect();
    let class_idx = match &opts.class_column {
        Some(c) => Some(header.iter().position(|h| h == c).ok_or_else(|| DataError::MissingClassColumn(c.clone()))?),
        None => None,
    };
    let attributes: Vec<String> =
        header.iter().enumerate().filter(|(i, _)| Some(*i) != class_idx).map(|(_, h)| h.clone()).collect();
    if attributes.len() < 3 {
        return Err(DataError::TooFewDims(attributes.len()));
    }

    let mut raw = Vec::new();
    let mut class_ids = Vec::new();
    let mut class_names: Vec<String> = Vec::new();
    let mut dropped = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| DataError::Csv(e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != header.len() {
            return Err(DataError::RaggedRow { row: line as usize, got: rec.len(), expected: header.len() });
        }
        if rec.iter().any(str::is_empty) {
            dropped.push(line);
            continue;
        }
        let mut row = Vec::with_capacity(attributes.len());
        for (i, cell) in rec.iter().enumerate() {
            if Some(i) == class_idx {
                let id = match class_names.iter().position(|c| c == cell) {
                    Some(id) => id,
                    None => {
                        class_names.push(cell.to_string());
                        class_names.len() - 1
                    }
                };
                class_ids.push(id);
                continue;
            }
            let v: f64 = cell.parse().map_err(|_| DataError::Parse {
                line,
                column: header[i].clone(),
                value: cell.to_string(),
            })?;
            if !v.is_finite() {
                return Err(DataError::Parse { line, column: header[i].clone(), value: cell.to_string() });
            }
            row.push(v);
        }
        raw.push(row);
    }
    let classes = class_idx.map(|_| (class_ids, class_names));
    let mut ds = Dataset::from_raw(name, attributes, raw, classes)?;
    if !dropped.is_empty() {
        let lines: Vec<String> = dropped.iter().map(u64::to_string).collect();
        ds.warnings.insert(0, format!("dropped {} rows with missing values (lines {})", dropped.len(), lines.join(", ")));
    }
    Ok(ds)
}

/// Colour tag and active flag per point. Colour 0 is neutral.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PointTags {
    pub color: Vec<u8>,
    pub active: Vec<bool>,
}

impl PointTags {
    pub fn new(n: usize) -> Self {
        Self { color: vec![0; n], active: vec![true; n] }
    }

    pub fn len(&self) -> usize {
        self.color.len()
    }

    pub fn is_empty(&self) -> bool {
        self.color.is_empty()
    }

    pub fn active_ids(&self) -> Vec<usize> {
        (0..self.active.len()).filter(|&i| self.active[i]).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "action", rename_all = "snake_case")]
pub enum BrushAction {
    Color { color: u8 },
    Deactivate,
    Reactivate,
}

pub fn brush(tags: &PointTags, ids: &[usize], action: BrushAction) -> Result<PointTags, DataError> {
    let n = tags.len();
    if let Some(&id) = ids.iter().find(|&&i| i >= n) {
        return Err(DataError::BadId { id, n });
    }
    let mut out = tags.clone();
    for &i in ids {
        match action {
            BrushAction::Color { color } => out.color[i] = color,
            BrushAction::Deactivate => out.active[i] = false,
            BrushAction::Reactivate => out.active[i] = true,
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ten_rows_three_columns() {
        let mut text = String::from("a,b,c\n");
        for i in 0..10 {
            text.push_str(&format!("{i},{},{}\n", i * i, 10 - i));
        }
        let ds = parse_csv(text.as_bytes(), "t", &LoadOptions::default()).unwrap();
        assert_eq!((ds.n_dims(), ds.n_points()), (3, 10));
        for j in 0..3 {
            let mean: f64 = ds.normalized.iter().map(|r| r[j]).sum::<f64>() / 10.0;
            assert!(mean.abs() < 1e-15);
            let lo = ds.normalized.iter().map(|r| r[j]).fold(f64::INFINITY, f64::min);
            let hi = ds.normalized.iter().map(|r| r[j]).fold(f64::NEG_INFINITY, f64::max);
            assert!((hi - lo - 1.0).abs() < 1e-15);
        }
        assert!(ds.warnings.is_empty());
    }

    #[test]
    fn constant_column_warns() {
        let ds = parse_csv("a,b,c\n1,5,2\n2,5,3\n3,5,1\n".as_bytes(), "t", &LoadOptions::default()).unwrap();
        assert!(ds.normalized.iter().all(|r| r[1] == 0.0));
        assert_eq!(ds.warnings.len(), 1);
        assert!(ds.warnings[0].contains("`b`"));
    }

    #[test]
    fn bad_cell_names_location() {
        let err = parse_csv("a,b,c\n1,2,3\n4,x5,6\n7,8,9\n".as_bytes(), "t", &LoadOptions::default()).unwrap_err();
        assert_eq!(err, DataError::Parse { line: 3, column: "b".into(), value: "x5".into() });
    }

    #[test]
    fn missing_rows_dropped_and_class_column() {
        let text = "a,b,kind,c\n1,2,x,3\n4,,y,6\n7,8,y,9\n1,1,x,1\n";
        let opts = LoadOptions { class_column: Some("kind".into()) };
        let ds = parse_csv(text.as_bytes(), "t", &opts).unwrap();
        assert_eq!(ds.n_points(), 3);
        assert_eq!(ds.attributes, vec!["a", "b", "c"]);
        assert_eq!(ds.class_column, Some(vec![0, 1, 0]));
        assert_eq!(ds.class_names, vec!["x", "y"]);
        assert!(ds.warnings[0].contains("lines 3"));
    }

    #[test]
    fn too_few_dims() {
        let err = parse_csv("a,b\n1,2\n".as_bytes(), "t", &LoadOptions::default()).unwrap_err();
        assert_eq!(err, DataError::TooFewDims(2));
        let opts = LoadOptions { class_column: Some("zz".into()) };
        assert!(matches!(parse_csv("a,b,c\n1,2,3\n".as_bytes(), "t", &opts), Err(DataError::MissingClassColumn(_))));
    }

    #[test]
    fn brush_round_trips() {
        let tags = PointTags::new(6);
        let all: Vec<usize> = (0..6).collect();
        let off = brush(&tags, &all, BrushAction::Deactivate).unwrap();
        assert!(off.active_ids().is_empty());
        assert_eq!(brush(&off, &all, BrushAction::Reactivate).unwrap(), tags);
        let painted = brush(&tags, &[1, 2, 3], BrushAction::Color { color: 5 }).unwrap();
        assert_eq!(painted.color, vec![0, 5, 5, 5, 0, 0]);
        assert_eq!(painted.active, tags.active);
        assert_eq!(brush(&tags, &[9], BrushAction::Deactivate), Err(DataError::BadId { id: 9, n: 6 }));
    }
}
