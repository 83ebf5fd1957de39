//! File formats and the operations behind the command-line tool.

pub mod generate;
pub mod oracle;
pub mod payload;
pub mod report;
pub mod sealed;
pub mod stream;
pub mod verify;

pub use generate::{generate, GenConfig, Magnitude, ModeChoice};
pub use oracle::{run_oracle, OracleConfig, OracleReport, PatternMode};
pub use payload::{
    decode_only, encode_payload, parse_payload, replacement_stream, seal_stream, unseal_stream, ParsedAux,
    ParsedPayload, SealOutput,
};
pub use report::{metrics_report, write_csv, MetricsRow};
pub use sealed::{SealedHeader, SealedStream, FLAG_REPLACED, HEADER_BYTES};
pub use stream::{AuxElement, CoefficientStream, StreamHeader};
pub use verify::{verify, Check, VerifyReport};

use std::path::Path;

use thiserror::Error;

use crate::coeffmodel::{CoeffError, CodingTables, TableError};
use crate::crypto::CryptoError;
use crate::metrics::MetricError;

#[derive(Debug, Error)]
pub enum StreamError {
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("line {line}: {message}")]
    Json { line: usize, message: String },
    #[error("bad container: {0}")]
    Format(String),
    #[error("table digest mismatch: stream has {stream}, tables have {tables}")]
    DigestMismatch { stream: String, tables: String },
    #[error(transparent)]
    Tables(#[from] TableError),
    #[error(transparent)]
    Coeff(#[from] CoeffError),
    #[error(transparent)]
    Crypto(#[from] CryptoError),
    #[error(transparent)]
    Metric(#[from] MetricError),
}

pub(crate) fn io_err(path: &Path, e: impl std::fmt::Display) -> StreamError {
    StreamError::Io { path: path.display().to_string(), message: e.to_string() }
}

/// Loads a table file; the derived intervals are validated on the way in.
pub fn load_tables(path: &Path) -> Result<CodingTables, StreamError> {
    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    Ok(CodingTables::from_json(&text)?)
}

/// The tables at `path`, or the built-in defaults.
pub fn tables_or_default(path: Option<&Path>) -> Result<CodingTables, StreamError> {
    path.map_or_else(|| Ok(CodingTables::vtm_default()), load_tables)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn default_table_file_loads() {
        let t = CodingTables::vtm_default();
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(t.to_json().as_bytes()).unwrap();
        let back = load_tables(f.path()).unwrap();
        assert_eq!(back.digest(), t.digest());
        assert!(back.rice_arr().windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn toy_table_with_two_rice_levels() {
        let d = CodingTables::vtm_default();
        let rice: [u8; 32] = std::array::from_fn(|i| u8::from(i >= 16));
        let toy = CodingTables::new("toy", rice, *d.v_arr(), [[0, 2], [2, 0], [1, 3], [3, 1]], [0, 0, 1, 2]).unwrap();
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(toy.to_json().as_bytes()).unwrap();
        let t = load_tables(f.path()).unwrap();
        assert_eq!(t.rice_levels(), 2);
        assert_eq!(t.rice_interval(0).map(|i| (i.lo, i.hi)), Some((0, 15)));
        assert_eq!(t.rice_interval(1).map(|i| (i.lo, i.hi)), Some((16, 31)));
        assert!(t.rice_interval(2).is_none());
    }

    #[test]
    fn corrupted_digest_is_rejected() {
        let json = CodingTables::vtm_default().to_json();
        let mut v: serde_json::Value = serde_json::from_str(&json).unwrap();
        v["digest"] = serde_json::Value::String("00".repeat(32));
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(v.to_string().as_bytes()).unwrap();
        assert!(matches!(load_tables(f.path()), Err(StreamError::Tables(TableError::Digest { .. }))));
        assert!(load_tables(Path::new("/nonexistent/tables.json")).is_err());
    }
}
