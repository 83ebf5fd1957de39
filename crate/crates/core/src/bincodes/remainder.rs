//! Binarization of coefficient remainders: truncated Rice below the
//! threshold `β = BinReduc · 2^cRiceParam`, limited exp-Golomb above it.

use super::codes::write_tu;
use super::{BinCursor, BinKind, BinString, CodeError, DecodeError};

/// `BinReduc`, the quotient at which the remainder switches to limited EGk.
pub const BIN_REDUC: u32 = 5;

/// Longest codeword the limited exp-Golomb escape may produce.
pub const MAX_CODEWORD_LEN: u32 = 32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RemainderParams {
    rice: u32,
    log2_tr_range: u32,
}

impl RemainderParams {
    pub fn new(rice: u32, log2_tr_range: u32) -> Result<Self, CodeError> {
        if rice > 3 {
            return Err(CodeError::InvalidParams("cRiceParam must be in 0..=3"));
        }
        if !(1..=MAX_CODEWORD_LEN - BIN_REDUC).contains(&log2_tr_range) {
            return Err(CodeError::InvalidParams("log2TrRange must be in 1..=27"));
        }
        Ok(Self { rice, log2_tr_range })
    }

    pub fn rice(&self) -> u32 {
        self.rice
    }

    pub fn log2_tr_range(&self) -> u32 {
        self.log2_tr_range
    }

    pub fn bin_reduc(&self) -> u32 {
        BIN_REDUC
    }

    /// `β = BinReduc · 2^cRiceParam`.
    pub fn threshold(&self) -> u64 {
        u64::from(BIN_REDUC) << self.rice
    }

    pub fn max_prefix_len(&self) -> u32 {
        MAX_CODEWORD_LEN - BIN_REDUC - self.log2_tr_range
    }
}

/// Positions of the pieces of one remainder codeword, relative to its start.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RemainderLayout {
    /// Bins before the fixed-length suffix (unary part and terminator).
    pub prefix_len: usize,
    pub suffix_len: usize,
    /// `true` on the truncated Rice path.
    pub truncated_rice: bool,
}

impl RemainderLayout {
    pub fn len(&self) -> usize {
        self.prefix_len + self.suffix_len
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Limited exp-Golomb escape for `rem ≥ β`.
///
/// The codeword is `prefixLen + BinReduc` one-bins followed by the suffix in
/// `suffixLen` bins. When the prefix is not saturated the suffix MSB is always
/// zero and acts as the separator; a saturated prefix carries a
/// `log2TrRange`-bin suffix with no separator. The suffix value is
/// `(codeValue − (2^prefixLen − 1)) · 2^cRiceParam + rem mod 2^cRiceParam`.
pub fn encode_limited_egk(rem: u64, params: RemainderParams) -> Result<BinString, CodeError> {
    let mut out = BinString::new();
    write_limited_egk(&mut out, rem, params, BinKind::BypassClear)?;
    Ok(out)
}

fn limited_egk_parts(rem: u64, params: RemainderParams) -> Result<(u32, u32, u64), CodeError> {
    let beta = params.threshold();
    if rem < beta {
        return Err(CodeError::BelowThreshold { rem, threshold: beta });
    }
    let rice = params.rice;
    let max_prefix = params.max_prefix_len();
    let code_value = (rem >> rice) - u64::from(BIN_REDUC);
    let mut prefix_len = 0u32;
    while prefix_len < max_prefix && code_value > (2u64 << prefix_len) - 2 {
        prefix_len += 1;
    }
    let suffix_len = if prefix_len == max_prefix {
        params.log2_tr_range
    } else {
        prefix_len + rice + 1
    };
    let suffix = ((code_value - ((1u64 << prefix_len) - 1)) << rice) + (rem & ((1u64 << rice) - 1));
    if suffix >> suffix_len != 0 {
        return Err(CodeError::OutOfRange { value: rem, log2_tr_range: params.log2_tr_range });
    }
    Ok((prefix_len + BIN_REDUC, suffix_len, suffix))
}

fn write_limited_egk(
    out: &mut BinString,
    rem: u64,
    params: RemainderParams,
    kind: BinKind,
) -> Result<RemainderLayout, CodeError> {
    let (total_prefix, suffix_len, suffix) = limited_egk_parts(rem, params)?;
    for _ in 0..total_prefix {
        out.push(true, kind);
    }
    out.push_value(suffix, suffix_len, kind);
    Ok(RemainderLayout {
        prefix_len: total_prefix as usize,
        suffix_len: suffix_len as usize,
        truncated_rice: false,
    })
}

/// Remainder binarization: truncated Rice with `p = cRiceParam` and prefix
/// `cMax = BinReduc` below `β`, limited exp-Golomb otherwise.
pub fn encode_remainder(rem: u64, params: RemainderParams) -> Result<BinString, CodeError> {
    let mut out = BinString::new();
    write_remainder(&mut out, rem, params, BinKind::BypassClear)?;
    Ok(out)
}

pub(crate) fn write_remainder(
    out: &mut BinString,
    rem: u64,
    params: RemainderParams,
    kind: BinKind,
) -> Result<RemainderLayout, CodeError> {
    if rem < params.threshold() {
        let q = rem >> params.rice;
        write_tu(out, q, u64::from(BIN_REDUC), kind);
        out.push_value(rem & ((1u64 << params.rice) - 1), params.rice, kind);
        Ok(RemainderLayout {
            prefix_len: q as usize + 1,
            suffix_len: params.rice as usize,
            truncated_rice: true,
        })
    } else {
        write_limited_egk(out, rem, params, kind)
    }
}

/// Length of the remainder codeword without building it.
pub fn remainder_len(rem: u64, params: RemainderParams) -> Result<usize, CodeError> {
    if rem < params.threshold() {
        Ok((rem >> params.rice) as usize + 1 + params.rice as usize)
    } else {
        let (p, s, _) = limited_egk_parts(rem, params)?;
        Ok((p + s) as usize)
    }
}

pub(crate) fn read_limited_egk_after_prefix(
    c: &mut BinCursor<'_>,
    ones: u32,
    params: RemainderParams,
) -> Result<(u64, RemainderLayout), DecodeError> {
    let rice = params.rice;
    let prefix_len = ones - BIN_REDUC;
    let max_prefix = params.max_prefix_len();
    let suffix_len = if prefix_len == max_prefix {
        params.log2_tr_range
    } else {
        prefix_len + rice + 1
    };
    let suffix = c.read_value(suffix_len)?;
    let code_value = (suffix >> rice) + ((1u64 << prefix_len) - 1);
    let rem = ((code_value + u64::from(BIN_REDUC)) << rice) | (suffix & ((1u64 << rice) - 1));
    Ok((
        rem,
        RemainderLayout {
            prefix_len: ones as usize,
            suffix_len: suffix_len as usize,
            truncated_rice: false,
        },
    ))
}

/// Counts leading one-bins up to `limit` without consuming the stopping zero.
fn count_ones(c: &mut BinCursor<'_>, limit: u32) -> Result<u32, DecodeError> {
    let mut n = 0;
    while n < limit {
        match c.peek() {
            Some(true) => {
                c.read_bit()?;
                n += 1;
            }
            Some(false) => break,
            None => return Err(DecodeError::Truncated { offset: c.position() }),
        }
    }
    Ok(n)
}

pub(crate) fn read_remainder(
    c: &mut BinCursor<'_>,
    params: RemainderParams,
) -> Result<(u64, RemainderLayout), DecodeError> {
    let ones = count_ones(c, BIN_REDUC + params.max_prefix_len())?;
    if ones < BIN_REDUC {
        c.read_bit()?; // terminator
        let r = c.read_value(params.rice)?;
        let rem = (u64::from(ones) << params.rice) | r;
        return Ok((
            rem,
            RemainderLayout {
                prefix_len: ones as usize + 1,
                suffix_len: params.rice as usize,
                truncated_rice: true,
            },
        ));
    }
    read_limited_egk_after_prefix(c, ones, params)
}

pub(crate) fn read_limited_egk(
    c: &mut BinCursor<'_>,
    params: RemainderParams,
) -> Result<(u64, RemainderLayout), DecodeError> {
    let start = c.position();
    let ones = count_ones(c, BIN_REDUC + params.max_prefix_len())?;
    if ones < BIN_REDUC {
        return Err(DecodeError::Malformed { offset: start, what: "limited exp-Golomb prefix shorter than BinReduc" });
    }
    read_limited_egk_after_prefix(c, ones, params)
}
