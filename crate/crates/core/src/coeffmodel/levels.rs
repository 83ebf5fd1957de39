//! Level-to-syntax-element mappings.

/// Level at which TC remainders start (`baseLvl` of the remainder pass).
pub const TC_REMAINDER_BASE: u32 = 4;
/// Level at which TS remainders start.
pub const TS_REMAINDER_BASE: u32 = 10;

/// `dec_abs_level` for a coefficient coded wholly in bypass.
///
/// The zero level is swapped with `V`: `0 → V`, `1..=V → |C| − 1`,
/// larger levels are sent unchanged. This is a bijection on the naturals.
pub fn map_dec_abs_level(c: i32, v: u32) -> u32 {
    let a = c.unsigned_abs();
    if a == 0 {
        v
    } else if a <= v {
        a - 1
    } else {
        a
    }
}

/// Inverse of [`map_dec_abs_level`], returning `|C|`.
pub fn unmap_dec_abs_level(rem: u32, v: u32) -> u32 {
    if rem == v {
        0
    } else if rem < v {
        rem + 1
    } else {
        rem
    }
}

/// `⌊(|C| − 4) / 2⌋`, or `None` when the level is carried by the flags.
pub fn abs_remainder(c: i32) -> Option<u32> {
    c.unsigned_abs().checked_sub(TC_REMAINDER_BASE).map(|d| d / 2)
}

/// `⌊(|C| − 10) / 2⌋`, or `None` below 10.
pub fn abs_remainder_ts(c: i32) -> Option<u32> {
    c.unsigned_abs().checked_sub(TS_REMAINDER_BASE).map(|d| d / 2)
}

/// Level rebuilt from a remainder and the parity flag.
pub fn level_from_remainder(base: u32, parity: u32, rem: u64) -> u64 {
    u64::from(base) + u64::from(parity) + 2 * rem
}
