//! The six elementary binarizations: unary, truncated unary, fixed length,
//! truncated binary, truncated Rice and k-th order exp-Golomb.
//!
//! Every encoder emits bypass-clear bins; callers relabel as needed.

use super::{BinCursor, BinKind, BinString, CodeError, DecodeError};

const K: BinKind = BinKind::BypassClear;

/// Upper bound on unary runs accepted by the decoders.
pub(crate) const MAX_UNARY_RUN: u64 = 64;

/// Number of bins of the fixed-length code for `c_max`, `⌈log2(c_max + 1)⌉`.
pub fn fl_len(c_max: u64) -> u32 {
    64 - c_max.leading_zeros()
}

pub(crate) fn write_unary(out: &mut BinString, value: u64, kind: BinKind) {
    for _ in 0..value {
        out.push(true, kind);
    }
    out.push(false, kind);
}

pub(crate) fn write_tu(out: &mut BinString, value: u64, c_max: u64, kind: BinKind) {
    for _ in 0..value {
        out.push(true, kind);
    }
    if value < c_max {
        out.push(false, kind);
    }
}

fn check_max(value: u64, c_max: u64) -> Result<(), CodeError> {
    if value > c_max {
        Err(CodeError::ValueAboveMax { value, c_max })
    } else {
        Ok(())
    }
}

pub fn encode_unary(value: u64) -> BinString {
    let mut out = BinString::new();
    write_unary(&mut out, value, K);
    out
}

pub fn encode_tu(value: u64, c_max: u64) -> Result<BinString, CodeError> {
    check_max(value, c_max)?;
    let mut out = BinString::new();
    write_tu(&mut out, value, c_max, K);
    Ok(out)
}

pub fn encode_fl(value: u64, c_max: u64) -> Result<BinString, CodeError> {
    check_max(value, c_max)?;
    let mut out = BinString::new();
    out.push_value(value, fl_len(c_max), K);
    Ok(out)
}

/// `(k, u)` for the truncated binary code of `c_max`: `k = ⌊log2(c_max+1)⌋`,
/// and the first `u` symbols take `k` bins.
fn tb_params(c_max: u64) -> (u32, u64) {
    let n = c_max + 1;
    let k = 63 - n.leading_zeros();
    let u = (1u64 << (k + 1)) - n;
    (k, u)
}

/// Truncated binary, using `u = 2^(k+1) − (cMax + 1)`.
pub fn encode_tb(value: u64, c_max: u64) -> Result<BinString, CodeError> {
    check_max(value, c_max)?;
    let (k, u) = tb_params(c_max);
    let mut out = BinString::new();
    if value < u {
        out.push_value(value, k, K);
    } else {
        out.push_value(value + u, k + 1, K);
    }
    Ok(out)
}

/// Truncated Rice: TU prefix of `value >> p` (bounded by `prefix_c_max`)
/// followed by the `p` low bits of `value`.
pub fn encode_trp(value: u64, p: u32, prefix_c_max: u64) -> Result<BinString, CodeError> {
    let q = value >> p;
    if q > prefix_c_max {
        return Err(CodeError::QuotientAboveMax { quotient: q, c_max: prefix_c_max });
    }
    let mut out = BinString::new();
    write_tu(&mut out, q, prefix_c_max, K);
    out.push_value(value & ((1u64 << p) - 1), p, K);
    Ok(out)
}

/// Prefix length `l(B) = ⌊log2(B / 2^k + 1)⌋`, i.e. the largest `l` with
/// `2^k (2^l − 1) ≤ B`.
pub fn egk_prefix_len(value: u64, k: u32) -> u32 {
    let mut l = 0u32;
    while l < 63 - k && (1u64 << k) * ((1u64 << (l + 1)) - 1) <= value {
        l += 1;
    }
    l
}

/// k-th order exp-Golomb: unary `l(B)` followed by `B + 2^k (1 − 2^l)` in
/// `k + l` bins.
pub fn encode_egk(value: u64, k: u32) -> BinString {
    let l = egk_prefix_len(value, k);
    let mut out = BinString::new();
    write_unary(&mut out, u64::from(l), K);
    let suffix = value - (1u64 << k) * ((1u64 << l) - 1);
    out.push_value(suffix, k + l, K);
    out
}

pub(crate) fn read_unary(c: &mut BinCursor<'_>, limit: u64) -> Result<u64, DecodeError> {
    let start = c.position();
    let mut n = 0u64;
    while c.read_bit()? {
        n += 1;
        if n > limit {
            return Err(DecodeError::Malformed { offset: start, what: "unary run too long" });
        }
    }
    Ok(n)
}

pub(crate) fn read_tu(c: &mut BinCursor<'_>, c_max: u64) -> Result<u64, DecodeError> {
    let mut n = 0u64;
    while n < c_max {
        if !c.read_bit()? {
            break;
        }
        n += 1;
    }
    Ok(n)
}

pub(crate) fn read_fl(c: &mut BinCursor<'_>, c_max: u64) -> Result<u64, DecodeError> {
    let start = c.position();
    let v = c.read_value(fl_len(c_max))?;
    if v > c_max {
        return Err(DecodeError::Malformed { offset: start, what: "fixed-length value above cMax" });
    }
    Ok(v)
}

pub(crate) fn read_tb(c: &mut BinCursor<'_>, c_max: u64) -> Result<u64, DecodeError> {
    let start = c.position();
    let (k, u) = tb_params(c_max);
    let v = c.read_value(k)?;
    if v < u {
        return Ok(v);
    }
    let v = (v << 1) | u64::from(c.read_bit()?);
    let value = v - u;
    if value > c_max {
        return Err(DecodeError::Malformed { offset: start, what: "truncated-binary value above cMax" });
    }
    Ok(value)
}

pub(crate) fn read_trp(c: &mut BinCursor<'_>, p: u32, prefix_c_max: u64) -> Result<u64, DecodeError> {
    let q = read_tu(c, prefix_c_max)?;
    let r = c.read_value(p)?;
    Ok((q << p) | r)
}

pub(crate) fn read_egk(c: &mut BinCursor<'_>, k: u32) -> Result<u64, DecodeError> {
    let start = c.position();
    let l = read_unary(c, (62 - u64::from(k)).min(MAX_UNARY_RUN))?;
    let l = u32::try_from(l).map_err(|_| DecodeError::Malformed { offset: start, what: "exp-Golomb prefix" })?;
    let suffix = c.read_value(k + l)?;
    Ok(suffix + (1u64 << k) * ((1u64 << l) - 1))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(b: &BinString) -> String {
        b.to_string()
    }

    #[test]
    fn unary_examples() {
        assert_eq!(s(&encode_unary(0)), "0");
        assert_eq!(s(&encode_unary(2)), "110");
        assert_eq!(s(&encode_unary(5)), "111110");
        assert_eq!(encode_unary(6).len(), 7);
    }

    #[test]
    fn tu_examples() {
        assert_eq!(s(&encode_tu(0, 3).unwrap()), "0");
        assert_eq!(s(&encode_tu(2, 5).unwrap()), "110");
        assert_eq!(s(&encode_tu(3, 3).unwrap()), "111");
        assert!(encode_tu(4, 3).is_err());
    }

    #[test]
    fn fl_examples() {
        assert_eq!(s(&encode_fl(5, 7).unwrap()), "101");
        assert_eq!(s(&encode_fl(0, 1).unwrap()), "0");
        assert_eq!(s(&encode_fl(0, 0).unwrap()), "");
        assert!(encode_fl(8, 7).is_err());
    }

    #[test]
    fn tb_examples() {
        assert_eq!(s(&encode_tb(0, 5).unwrap()), "00");
        assert_eq!(s(&encode_tb(1, 5).unwrap()), "01");
        assert_eq!(s(&encode_tb(5, 5).unwrap()), "111");
        // cMax + 1 a power of two degenerates to FL.
        assert_eq!(s(&encode_tb(9, 15).unwrap()), s(&encode_fl(9, 15).unwrap()));
    }

    #[test]
    fn trp_examples() {
        assert_eq!(s(&encode_trp(0, 2, 5).unwrap()), "000");
        assert_eq!(s(&encode_trp(7, 2, 5).unwrap()), "1011");
        assert_eq!(s(&encode_trp(19, 2, 5).unwrap()), "1111011");
        // q = 5 hits cMax: no terminator.
        assert_eq!(s(&encode_trp(20, 2, 5).unwrap()), "1111100");
        assert!(encode_trp(24, 2, 5).is_err());
    }

    #[test]
    fn egk_examples() {
        assert_eq!(s(&encode_egk(0, 0)), "0");
        assert_eq!(s(&encode_egk(2, 0)), "101");
        assert_eq!(s(&encode_egk(1, 1)), "01");
    }

    #[test]
    fn egk_prefix_len_matches_real_formula() {
        for k in 0..4u32 {
            for b in 0..2000u64 {
                let exact = ((b as f64) / f64::from(1u32 << k) + 1.0).log2().floor() as u32;
                assert_eq!(egk_prefix_len(b, k), exact, "b={b} k={k}");
            }
        }
    }

    #[test]
    fn tb_decode_rejects_out_of_range_long_codeword() {
        // cMax = 4: k = 2, u = 3, so "111" is the long codeword of 4.
        let bits = [true, true, true];
        let mut c = BinCursor::new(&bits);
        assert_eq!(read_tb(&mut c, 4).unwrap(), 4);
    }
}
