//! Raw record dumps: little-endian `f64`, channels interleaved per sample,
//! with a JSON sidecar describing the layout.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::TimeSeries;
use crate::error::{Error, Result};
use crate::model::SystemParams;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordMeta {
    pub dt: f64,
    pub t0: f64,
    pub samples: usize,
    pub channels: Vec<String>,
    pub seed: u64,
    pub run: u64,
    pub params: Option<SystemParams>,
}

fn sidecar(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

fn io(e: std::io::Error) -> Error {
    Error::InvalidInput(format!("record i/o: {e}"))
}

/// Writes `path` and `path.json`.
pub fn dump_records(
    ts: &TimeSeries,
    seed: u64,
    run: u64,
    params: Option<&SystemParams>,
    path: &Path,
) -> Result<RecordMeta> {
    let meta = RecordMeta {
        dt: ts.dt,
        t0: ts.t0,
        samples: ts.len(),
        channels: ts.names.clone(),
        seed,
        run,
        params: params.copied(),
    };
    let mut w = BufWriter::new(File::create(path).map_err(io)?);
    for k in 0..ts.len() {
        for ch in &ts.channels {
            w.write_all(&ch[k].to_le_bytes()).map_err(io)?;
        }
    }
    w.flush().map_err(io)?;
    let json =
        serde_json::to_string_pretty(&meta).map_err(|e| Error::InvalidInput(e.to_string()))?;
    std::fs::write(sidecar(path), json).map_err(io)?;
    Ok(meta)
}

pub fn read_records(path: &Path) -> Result<(TimeSeries, RecordMeta)> {
    let text = std::fs::read_to_string(sidecar(path)).map_err(io)?;
    let meta: RecordMeta =
        serde_json::from_str(&text).map_err(|e| Error::InvalidInput(e.to_string()))?;
    let n_ch = meta.channels.len();
    let mut bytes = Vec::new();
    BufReader::new(File::open(path).map_err(io)?)
        .read_to_end(&mut bytes)
        .map_err(io)?;
    if bytes.len() != meta.samples * n_ch * 8 {
        return Err(Error::InvalidInput(format!(
            "record holds {} bytes, sidecar implies {}",
            bytes.len(),
            meta.samples * n_ch * 8
        )));
    }
    let mut channels = vec![Vec::with_capacity(meta.samples); n_ch];
    for (i, chunk) in bytes.chunks_exact(8).enumerate() {
        channels[i % n_ch].push(f64::from_le_bytes(chunk.try_into().expect("8-byte chunk")));
    }
    let ts = TimeSeries {
        dt: meta.dt,
        t0: meta.t0,
        names: meta.channels.clone(),
        channels,
    };
    Ok((ts, meta))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rec.bin");
        let ts = TimeSeries {
            dt: 0.125,
            t0: 0.0625,
            names: vec!["a".into(), "b".into()],
            channels: vec![vec![1.0, -2.5, 3.25], vec![0.1, f64::MIN_POSITIVE, -0.0]],
        };
        let meta = dump_records(&ts, 9, 2, None, &path).unwrap();
        assert_eq!(std::fs::metadata(&path).unwrap().len(), 48);
        let (back, meta_back) = read_records(&path).unwrap();
        assert_eq!(back, ts);
        assert_eq!(meta_back, meta);
        let raw = std::fs::read(&path).unwrap();
        assert_eq!(f64::from_le_bytes(raw[8..16].try_into().unwrap()), 0.1);
    }

    #[test]
    fn truncated_record_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rec.bin");
        let ts = TimeSeries {
            dt: 1.0,
            t0: 0.0,
            names: vec!["a".into()],
            channels: vec![vec![1.0, 2.0]],
        };
        dump_records(&ts, 0, 0, None, &path).unwrap();
        std::fs::write(&path, [0u8; 12]).unwrap();
        assert!(read_records(&path).is_err());
    }
}
