//! File formats: versioned model and tessellation JSON, dataset, point and
//! feature-matrix CSV, result tables, and atomic writes.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use stit_core::{Dataset, FeatureMatrix, ForestModel, TessellationTree};

use crate::error::{LabError, LabResult};

/// Current version of the model and tessellation JSON documents.
pub const SCHEMA_VERSION: u64 = 1;

/// Bytes destined for `path`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Artifact {
    pub path: PathBuf,
    pub bytes: Vec<u8>,
}

impl Artifact {
    pub fn new(path: impl Into<PathBuf>, bytes: Vec<u8>) -> Self {
        Artifact {
            path: path.into(),
            bytes,
        }
    }
}

/// Writes through a temporary file in the target directory and renames it
/// into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> LabResult<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    fs::create_dir_all(&dir).map_err(|e| LabError::io(&dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(|e| LabError::io(&dir, e))?;
    tmp.write_all(bytes).map_err(|e| LabError::io(path, e))?;
    tmp.as_file()
        .sync_all()
        .map_err(|e| LabError::io(path, e))?;
    tmp.persist(path).map_err(|e| LabError::io(path, e.error))?;
    Ok(())
}

pub fn write_artifacts(artifacts: &[Artifact]) -> LabResult<()> {
    artifacts
        .iter()
        .try_for_each(|a| write_atomic(&a.path, &a.bytes))
}

fn read(path: &Path) -> LabResult<Vec<u8>> {
    fs::read(path).map_err(|e| LabError::io(path, e))
}

#[derive(Serialize)]
struct Envelope<'a, T> {
    schema_version: u64,
    #[serde(flatten)]
    body: &'a T,
}

fn to_versioned_json<T: Serialize>(body: &T) -> LabResult<Vec<u8>> {
    let mut out = serde_json::to_vec_pretty(&Envelope {
        schema_version: SCHEMA_VERSION,
        body,
    })
    .map_err(|e| LabError::Config(e.to_string()))?;
    out.push(b'\n');
    Ok(out)
}

/// Parses a versioned document; the version is checked before the body.
fn from_versioned_json<T: DeserializeOwned>(
    path: &Path,
    bytes: &[u8],
    field: &str,
) -> LabResult<T> {
    let mut v: serde_json::Value =
        serde_json::from_slice(bytes).map_err(|e| LabError::parse(path, e))?;
    let found = v.get("schema_version").and_then(|x| x.as_u64());
    if found != Some(SCHEMA_VERSION) {
        return Err(LabError::SchemaVersionMismatch {
            found,
            expected: SCHEMA_VERSION,
        });
    }
    let body = v
        .get_mut(field)
        .map(serde_json::Value::take)
        .ok_or_else(|| LabError::parse(path, format!("missing field `{field}`")))?;
    serde_json::from_value(body).map_err(|e| LabError::parse(path, e))
}

#[derive(Serialize, Deserialize)]
struct ModelBody<T> {
    model: T,
}

#[derive(Serialize, Deserialize)]
struct TessellationBody<T> {
    tessellation: T,
}

pub fn model_to_json(model: &ForestModel) -> LabResult<Vec<u8>> {
    to_versioned_json(&ModelBody { model })
}

pub fn model_from_json(path: &Path, bytes: &[u8]) -> LabResult<ForestModel> {
    from_versioned_json(path, bytes, "model")
}

pub fn save_model(model: &ForestModel, path: &Path) -> LabResult<()> {
    write_atomic(path, &model_to_json(model)?)
}

pub fn load_model(path: &Path) -> LabResult<ForestModel> {
    model_from_json(path, &read(path)?)
}

pub fn tessellation_to_json(tree: &TessellationTree) -> LabResult<Vec<u8>> {
    to_versioned_json(&TessellationBody { tessellation: tree })
}

pub fn tessellation_from_json(path: &Path, bytes: &[u8]) -> LabResult<TessellationTree> {
    from_versioned_json(path, bytes, "tessellation")
}

pub fn load_tessellation(path: &Path) -> LabResult<TessellationTree> {
    tessellation_from_json(path, &read(path)?)
}

/// A CSV result table with a header row.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: ToString>(header: &[S]) -> Self {
        Table {
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Vec<u8> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory write");
        for r in &self.rows {
            w.write_record(r).expect("in-memory write");
        }
        w.into_inner().expect("in-memory flush")
    }
}

/// Shortest round-trip decimal form.
pub fn num(x: f64) -> String {
    format!("{x}")
}

fn parse_rows(path: &Path, bytes: &[u8], header: bool) -> LabResult<Vec<Vec<f64>>> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(header)
        .trim(csv::Trim::All)
        .from_reader(bytes);
    let mut rows = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| LabError::parse(path, e))?;
        let row = rec
            .iter()
            .map(|f| f.parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| LabError::parse(path, format!("record {}: {e}", i + 1)))?;
        rows.push(row);
    }
    Ok(rows)
}

/// Dataset CSV: a header row, `d` covariate columns, then the label.
pub fn dataset_from_csv(path: &Path, bytes: &[u8]) -> LabResult<Dataset> {
    let rows = parse_rows(path, bytes, true)?;
    if rows.is_empty() || rows[0].len() < 2 {
        return Err(LabError::parse(
            path,
            "need at least one row with a covariate and a label",
        ));
    }
    let mut x = Vec::with_capacity(rows.len());
    let mut y = Vec::with_capacity(rows.len());
    for mut r in rows {
        y.push(r.pop().unwrap_or(f64::NAN));
        x.push(r);
    }
    Ok(Dataset::new(x, y)?)
}

pub fn load_dataset(path: &Path) -> LabResult<Dataset> {
    dataset_from_csv(path, &read(path)?)
}

pub fn dataset_to_csv(data: &Dataset) -> Vec<u8> {
    let mut header: Vec<String> = (1..=data.dim()).map(|i| format!("x{i}")).collect();
    header.push("y".into());
    let mut t = Table {
        header,
        rows: Vec::with_capacity(data.len()),
    };
    for (x, y) in data.x().iter().zip(data.y()) {
        let mut r: Vec<String> = x.iter().map(|v| num(*v)).collect();
        r.push(num(*y));
        t.rows.push(r);
    }
    t.to_csv()
}

/// Query points: a header row and `d` columns.
pub fn load_points(path: &Path) -> LabResult<Vec<Vec<f64>>> {
    parse_rows(path, &read(path)?, true)
}

/// Feature matrix CSV: one row per coordinate, one column per feature; a
/// leading row that does not parse as numbers is a header.
pub fn feature_matrix_from_csv(path: &Path, bytes: &[u8]) -> LabResult<FeatureMatrix> {
    let text = std::str::from_utf8(bytes).map_err(|e| LabError::parse(path, e))?;
    let first = text.lines().find(|l| !l.trim().is_empty()).unwrap_or("");
    let header = first.split(',').any(|f| f.trim().parse::<f64>().is_err());
    let rows = parse_rows(path, bytes, header)?;
    Ok(FeatureMatrix::from_rows(&rows)?)
}

pub fn load_feature_matrix(path: &Path) -> LabResult<FeatureMatrix> {
    feature_matrix_from_csv(path, &read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn feature_matrix_header_is_optional() {
        let p = Path::new("a.csv");
        let a = feature_matrix_from_csv(p, b"1,0,0.5\n0,1,0.5\n").unwrap();
        let b = feature_matrix_from_csv(p, b"f1,f2,f3\n1,0,0.5\n0,1,0.5\n").unwrap();
        assert_eq!(a, b);
        assert_eq!(a.dim(), 2);
        assert_eq!(a.features(), 3);
    }

    #[test]
    fn dataset_csv_round_trip() {
        let d = Dataset::new(
            vec![vec![0.1, 0.2], vec![1.0 / 3.0, 0.7]],
            vec![1.5, -2.0 / 7.0],
        )
        .unwrap();
        let back = dataset_from_csv(Path::new("d.csv"), &dataset_to_csv(&d)).unwrap();
        assert_eq!(back.x(), d.x());
        assert_eq!(back.y(), d.y());
    }

    #[test]
    fn version_is_checked_first() {
        let p = Path::new("m.json");
        let e = model_from_json(p, br#"{"schema_version": 7, "model": 3}"#).unwrap_err();
        assert!(matches!(
            e,
            LabError::SchemaVersionMismatch { found: Some(7), .. }
        ));
        let e = model_from_json(p, br#"{"model": 3}"#).unwrap_err();
        assert!(matches!(
            e,
            LabError::SchemaVersionMismatch { found: None, .. }
        ));
        assert!(matches!(
            model_from_json(p, br#"{"schema_ver"#).unwrap_err(),
            LabError::Parse { .. }
        ));
    }
}
