//! Binarization codes and the bin container they write into.

mod binstring;
pub mod codes;
pub mod remainder;

pub use binstring::{pack_bits, unpack_bits, BinCursor, BinKind, BinString, Region};
pub use codes::{encode_egk, encode_fl, encode_tb, encode_trp, encode_tu, encode_unary, fl_len};
pub use remainder::{
    encode_limited_egk, encode_remainder, remainder_len, RemainderLayout, RemainderParams, BIN_REDUC,
};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodeError {
    #[error("value {value} exceeds cMax {c_max}")]
    ValueAboveMax { value: u64, c_max: u64 },
    #[error("quotient {quotient} exceeds prefix cMax {c_max}")]
    QuotientAboveMax { quotient: u64, c_max: u64 },
    #[error("remainder {rem} is below the exp-Golomb threshold {threshold}")]
    BelowThreshold { rem: u64, threshold: u64 },
    #[error("value {value} does not fit a {log2_tr_range}-bit dynamic range")]
    OutOfRange { value: u64, log2_tr_range: u32 },
    #[error("invalid code parameters: {0}")]
    InvalidParams(&'static str),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecodeError {
    #[error("bin string truncated at offset {offset}")]
    Truncated { offset: usize },
    #[error("malformed codeword at offset {offset}: {what}")]
    Malformed { offset: usize, what: &'static str },
}

impl DecodeError {
    pub fn offset(&self) -> usize {
        match self {
            DecodeError::Truncated { offset } | DecodeError::Malformed { offset, .. } => *offset,
        }
    }
}

/// A binarization together with its parameters.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Code {
    Unary,
    TruncatedUnary { c_max: u64 },
    FixedLength { c_max: u64 },
    TruncatedBinary { c_max: u64 },
    TruncatedRice { p: u32, prefix_c_max: u64 },
    ExpGolomb { k: u32 },
    LimitedExpGolomb(RemainderParams),
    Remainder(RemainderParams),
}

impl Code {
    pub fn encode(&self, value: u64) -> Result<BinString, CodeError> {
        match *self {
            Code::Unary => Ok(encode_unary(value)),
            Code::TruncatedUnary { c_max } => encode_tu(value, c_max),
            Code::FixedLength { c_max } => encode_fl(value, c_max),
            Code::TruncatedBinary { c_max } => encode_tb(value, c_max),
            Code::TruncatedRice { p, prefix_c_max } => encode_trp(value, p, prefix_c_max),
            Code::ExpGolomb { k } => Ok(encode_egk(value, k)),
            Code::LimitedExpGolomb(params) => encode_limited_egk(value, params),
            Code::Remainder(params) => encode_remainder(value, params),
        }
    }

    /// Decodes one codeword from the front of `bits`, returning the value and
    /// the number of bins consumed.
    pub fn decode(&self, bits: &[bool]) -> Result<(u64, usize), DecodeError> {
        let mut c = BinCursor::new(bits);
        let v = self.read(&mut c)?;
        Ok((v, c.position()))
    }

    pub fn read(&self, c: &mut BinCursor<'_>) -> Result<u64, DecodeError> {
        match *self {
            Code::Unary => codes::read_unary(c, codes::MAX_UNARY_RUN),
            Code::TruncatedUnary { c_max } => codes::read_tu(c, c_max),
            Code::FixedLength { c_max } => codes::read_fl(c, c_max),
            Code::TruncatedBinary { c_max } => codes::read_tb(c, c_max),
            Code::TruncatedRice { p, prefix_c_max } => codes::read_trp(c, p, prefix_c_max),
            Code::ExpGolomb { k } => codes::read_egk(c, k),
            Code::LimitedExpGolomb(params) => remainder::read_limited_egk(c, params).map(|(v, _)| v),
            Code::Remainder(params) => remainder::read_remainder(c, params).map(|(v, _)| v),
        }
    }
}

/// Decodes one codeword of `code` from the front of `bits`.
pub fn decode_code(bits: &BinString, code: Code) -> Result<(u64, usize), DecodeError> {
    code.decode(bits.bits())
}
