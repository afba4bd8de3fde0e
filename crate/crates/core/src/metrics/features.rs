//! TFV1 feature files: `b"TFV1"`, u32 LE rows, u32 LE cols, then row-major
//! f32 LE values. Each file may carry a JSON sidecar at `<file>.json`.

use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::MetricsError;

pub const MAGIC: &[u8; 4] = b"TFV1";

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f32>,
}

impl FeatureMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f32>) -> Result<Self, MetricsError> {
        if rows.checked_mul(cols) != Some(data.len()) {
            return Err(MetricsError::Format(format!(
                "{rows}x{cols} matrix needs {} values, got {}",
                rows.saturating_mul(cols),
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, MetricsError> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(MetricsError::Dimension("ragged rows".into()));
        }
        let data = rows.iter().flatten().map(|&v| v as f32).collect();
        Self::new(rows.len(), cols, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_f64(&self, i: usize) -> Vec<f64> {
        self.row(i).iter().map(|&v| f64::from(v)).collect()
    }

    pub fn to_rows_f64(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row_f64(i)).collect()
    }

    pub fn to_dmatrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_iterator(self.rows, self.cols, self.data.iter().map(|&v| f64::from(v)))
    }

    pub fn write_to<W: Write>(&self, mut sink: W) -> io::Result<()> {
        let dims = |n: usize| {
            u32::try_from(n).map_err(|_| io::Error::new(io::ErrorKind::InvalidInput, "dimension exceeds u32"))
        };
        sink.write_all(MAGIC)?;
        sink.write_all(&dims(self.rows)?.to_le_bytes())?;
        sink.write_all(&dims(self.cols)?.to_le_bytes())?;
        let mut buf = Vec::with_capacity(self.data.len() * 4);
        for v in &self.data {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        sink.write_all(&buf)?;
        sink.flush()
    }

    pub fn read_from<R: Read>(mut source: R) -> Result<Self, MetricsError> {
        let mut header = [0u8; 12];
        source
            .read_exact(&mut header)
            .map_err(|_| MetricsError::Format("file shorter than the 12-byte header".into()))?;
        if &header[..4] != MAGIC {
            return Err(MetricsError::Format(format!("bad magic {:?}", &header[..4])));
        }
        let rows = u32::from_le_bytes(header[4..8].try_into().expect("4 bytes")) as usize;
        let cols = u32::from_le_bytes(header[8..12].try_into().expect("4 bytes")) as usize;
        let expected = rows
            .checked_mul(cols)
            .and_then(|n| n.checked_mul(4))
            .ok_or_else(|| MetricsError::Format("dimensions overflow".into()))?;
        let mut payload = Vec::with_capacity(expected);
        source.read_to_end(&mut payload).map_err(|e| MetricsError::Format(e.to_string()))?;
        if payload.len() != expected {
            return Err(MetricsError::Format(format!(
                "{rows}x{cols} payload needs {expected} bytes, found {}",
                payload.len()
            )));
        }
        let data = payload.chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes"))).collect();
        Self::new(rows, cols, data)
    }

    pub fn load(path: &Path) -> Result<Self, MetricsError> {
        let file = fs::File::open(path).map_err(|e| MetricsError::Io(format!("{}: {e}", path.display())))?;
        Self::read_from(io::BufReader::new(file))
    }

    pub fn save(&self, path: &Path) -> Result<(), MetricsError> {
        let file = fs::File::create(path).map_err(|e| MetricsError::Io(format!("{}: {e}", path.display())))?;
        self.write_to(io::BufWriter::new(file)).map_err(|e| MetricsError::Io(format!("{}: {e}", path.display())))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureKind {
    LabelDist,
    PoolFeatures,
    ClipImg,
    ClipTxt,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub kind: FeatureKind,
    pub source: String,
    pub model: String,
    pub created: String,
    #[serde(flatten)]
    pub extra: serde_json::Map<String, serde_json::Value>,
}

pub fn sidecar_path(feature_file: &Path) -> PathBuf {
    let mut name = feature_file.as_os_str().to_owned();
    name.push(".json");
    PathBuf::from(name)
}

/// Reads the sidecar next to `feature_file`, if present.
pub fn read_sidecar(feature_file: &Path) -> Result<Option<Sidecar>, MetricsError> {
    let path = sidecar_path(feature_file);
    if !path.exists() {
        return Ok(None);
    }
    let text = fs::read_to_string(&path).map_err(|e| MetricsError::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map(Some).map_err(|e| MetricsError::Format(format!("{}: {e}", path.display())))
}

/// Loads a feature file and, when a sidecar exists, checks its kind.
pub fn load_features(path: &Path, expected: FeatureKind) -> Result<FeatureMatrix, MetricsError> {
    if let Some(sidecar) = read_sidecar(path)? {
        if sidecar.kind != expected {
            return Err(MetricsError::Format(format!(
                "{} holds {:?} features, expected {:?}",
                path.display(),
                sidecar.kind,
                expected
            )));
        }
    }
    FeatureMatrix::load(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_layout() {
        let m = FeatureMatrix::new(2, 1, vec![1.0, -2.5]).unwrap();
        let mut buf = Vec::new();
        m.write_to(&mut buf).unwrap();
        let mut want = b"TFV1".to_vec();
        want.extend_from_slice(&2u32.to_le_bytes());
        want.extend_from_slice(&1u32.to_le_bytes());
        want.extend_from_slice(&1.0f32.to_le_bytes());
        want.extend_from_slice(&(-2.5f32).to_le_bytes());
        assert_eq!(buf, want);
        assert_eq!(FeatureMatrix::read_from(buf.as_slice()).unwrap(), m);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(FeatureMatrix::read_from(&b"TFV"[..]).is_err());
        assert!(FeatureMatrix::read_from(&b"XXXX\x01\0\0\0\x01\0\0\0\0\0\0\0"[..]).is_err());
        // One value short.
        assert!(FeatureMatrix::read_from(&b"TFV1\x01\0\0\0\x02\0\0\0\0\0\0\0"[..]).is_err());
        assert!(FeatureMatrix::new(2, 2, vec![0.0; 3]).is_err());
    }

    #[test]
    fn empty_matrix() {
        let m = FeatureMatrix::new(0, 3, vec![]).unwrap();
        let mut buf = Vec::new();
        m.write_to(&mut buf).unwrap();
        assert_eq!(buf.len(), 12);
        assert_eq!(FeatureMatrix::read_from(buf.as_slice()).unwrap().cols(), 3);
    }

    #[test]
    fn sidecar_kind_checked() {
        let dir = std::env::temp_dir().join(format!("tfv1-sidecar-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("f.tfv");
        FeatureMatrix::new(1, 2, vec![0.5, 0.5]).unwrap().save(&path).unwrap();
        fs::write(
            sidecar_path(&path),
            r#"{"kind":"label_dist","source":"imgs/","model":"inception-v3","created":"2025-01-01T00:00:00Z","batch_size":8}"#,
        )
        .unwrap();
        assert!(load_features(&path, FeatureKind::LabelDist).is_ok());
        assert!(load_features(&path, FeatureKind::ClipImg).is_err());
        let side = read_sidecar(&path).unwrap().unwrap();
        assert_eq!(side.extra["batch_size"], 8);
        fs::remove_dir_all(dir).unwrap();
    }
}
