//! Line-delimited JSON coefficient streams: one header object, then one
//! record per sub-block, then one record per auxiliary element.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{io_err, StreamError};
use crate::coeffmodel::{CodingMode, CodingTables, SubBlock};
use crate::crypto::{AuxCode, AuxKind};

pub const STREAM_FORMAT: &str = "vvcse-coeffs";
pub const STREAM_VERSION: u32 = 1;
pub const DEFAULT_LOG2_TR_RANGE: u32 = 15;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StreamHeader {
    pub format: String,
    pub version: u32,
    pub log2_tr_range: u32,
    pub tables_digest: String,
}

impl StreamHeader {
    pub fn new(log2_tr_range: u32, tables: &CodingTables) -> Self {
        Self {
            format: STREAM_FORMAT.into(),
            version: STREAM_VERSION,
            log2_tr_range,
            tables_digest: tables.digest_hex(),
        }
    }
}

/// A stand-alone bypass syntax element.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AuxElement {
    pub kind: AuxKind,
    pub value: u64,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
enum Record {
    Block {
        width: usize,
        height: usize,
        mode: CodingMode,
        coeffs: Vec<i32>,
    },
    Aux {
        kind: AuxKind,
        value: u64,
        code: AuxCode,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoefficientStream {
    pub header: StreamHeader,
    pub blocks: Vec<SubBlock>,
    pub aux: Vec<AuxElement>,
}

impl CoefficientStream {
    pub fn new(log2_tr_range: u32, tables: &CodingTables) -> Self {
        Self { header: StreamHeader::new(log2_tr_range, tables), blocks: Vec::new(), aux: Vec::new() }
    }

    /// Canonical text form: blocks first, then auxiliary elements, one
    /// object per line with a fixed field order.
    pub fn to_jsonl(&self) -> String {
        let mut out = serde_json::to_string(&self.header).expect("header serializes");
        out.push('\n');
        let blocks = self.blocks.iter().map(|b| Record::Block {
            width: b.width(),
            height: b.height(),
            mode: b.mode(),
            coeffs: b.coeffs().to_vec(),
        });
        let aux = self.aux.iter().map(|a| Record::Aux { kind: a.kind, value: a.value, code: a.kind.code() });
        for r in blocks.chain(aux) {
            out.push_str(&serde_json::to_string(&r).expect("record serializes"));
            out.push('\n');
        }
        out
    }

    pub fn from_jsonl(text: &str) -> Result<Self, StreamError> {
        let json_err = |line: usize, e: serde_json::Error| StreamError::Json { line, message: e.to_string() };
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, first) = lines.next().ok_or_else(|| StreamError::Format("empty stream".into()))?;
        let header: StreamHeader = serde_json::from_str(first).map_err(|e| json_err(1, e))?;
        if header.format != STREAM_FORMAT || header.version != STREAM_VERSION {
            return Err(StreamError::Format(format!("unsupported stream {} v{}", header.format, header.version)));
        }
        if !(1..=31).contains(&header.log2_tr_range) {
            return Err(StreamError::Format(format!("log2_tr_range {} out of bounds", header.log2_tr_range)));
        }
        let mut stream = Self { header, blocks: Vec::new(), aux: Vec::new() };
        for (i, line) in lines {
            let record: Record = serde_json::from_str(line).map_err(|e| json_err(i + 1, e))?;
            let at_line = |e: StreamError| StreamError::Json { line: i + 1, message: e.to_string() };
            match record {
                Record::Block { width, height, mode, coeffs } => {
                    let b = SubBlock::new(width, height, mode, coeffs).map_err(|e| at_line(e.into()))?;
                    b.check_range(stream.header.log2_tr_range).map_err(|e| at_line(e.into()))?;
                    stream.blocks.push(b);
                }
                Record::Aux { kind, value, code } => {
                    if code != kind.code() {
                        return Err(at_line(StreamError::Format(format!("{kind:?} has binarization {code:?}"))));
                    }
                    code.encode(value).map_err(|e| at_line(e.into()))?;
                    stream.aux.push(AuxElement { kind, value });
                }
            }
        }
        Ok(stream)
    }

    pub fn read_file(path: &Path) -> Result<Self, StreamError> {
        let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
        Self::from_jsonl(&text)
    }

    pub fn write_file(&self, path: &Path) -> Result<(), StreamError> {
        std::fs::write(path, self.to_jsonl()).map_err(|e| io_err(path, e))
    }

    pub fn check_tables(&self, tables: &CodingTables) -> Result<(), StreamError> {
        let digest = tables.digest_hex();
        if !self.header.tables_digest.eq_ignore_ascii_case(&digest) {
            return Err(StreamError::DigestMismatch { stream: self.header.tables_digest.clone(), tables: digest });
        }
        Ok(())
    }
}
