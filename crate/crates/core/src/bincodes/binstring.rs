use std::fmt;

use super::DecodeError;

/// Classification of a run of bins.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinKind {
    /// Context-modeled bin. Never touched by encryption.
    Context,
    /// Bypass bin left in the clear.
    BypassClear,
    /// Bypass bin carrying ciphertext.
    BypassEncryptable,
}

impl BinKind {
    pub fn is_bypass(self) -> bool {
        !matches!(self, BinKind::Context)
    }
}

/// A run of bins sharing one [`BinKind`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Region {
    pub start: usize,
    pub len: usize,
    pub kind: BinKind,
}

impl Region {
    pub fn end(&self) -> usize {
        self.start + self.len
    }
}

/// Ordered sequence of bins together with a region map.
///
/// The region map always covers `[0, len)` with contiguous, non-overlapping
/// runs; adjacent runs of the same kind are merged.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct BinString {
    bits: Vec<bool>,
    regions: Vec<Region>,
}

impl BinString {
    pub fn new() -> Self {
        Self::default()
    }

    /// Parses a string of `0`/`1` characters as bypass-clear bins.
    /// Any other character is ignored, so `"110 01"` is accepted.
    pub fn from_bit_str(s: &str) -> Self {
        let mut out = Self::new();
        for c in s.chars() {
            match c {
                '0' => out.push(false, BinKind::BypassClear),
                '1' => out.push(true, BinKind::BypassClear),
                _ => {}
            }
        }
        out
    }

    /// Wraps a raw bit vector as a single region of `kind`.
    pub fn from_bits(bits: Vec<bool>, kind: BinKind) -> Self {
        let regions = if bits.is_empty() {
            Vec::new()
        } else {
            vec![Region {
                start: 0,
                len: bits.len(),
                kind,
            }]
        };
        Self { bits, regions }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn regions(&self) -> &[Region] {
        &self.regions
    }

    pub fn push(&mut self, bit: bool, kind: BinKind) {
        self.bits.push(bit);
        match self.regions.last_mut() {
            Some(last) if last.kind == kind => last.len += 1,
            _ => self.regions.push(Region {
                start: self.bits.len() - 1,
                len: 1,
                kind,
            }),
        }
    }

    /// Appends the `len` low bits of `value`, most significant first.
    pub fn push_value(&mut self, value: u64, len: u32, kind: BinKind) {
        debug_assert!(len <= 64);
        for i in (0..len).rev() {
            self.push((value >> i) & 1 == 1, kind);
        }
    }

    pub fn append(&mut self, other: &BinString) {
        for r in &other.regions {
            for &b in &other.bits[r.start..r.end()] {
                self.push(b, r.kind);
            }
        }
    }

    pub fn kind_at(&self, index: usize) -> Option<BinKind> {
        let i = self
            .regions
            .partition_point(|r| r.end() <= index);
        self.regions.get(i).filter(|r| r.start <= index).map(|r| r.kind)
    }

    /// Number of bins of the given kind.
    pub fn count_kind(&self, kind: BinKind) -> usize {
        self.regions
            .iter()
            .filter(|r| r.kind == kind)
            .map(|r| r.len)
            .sum()
    }

    /// The region map with both bypass kinds collapsed into one, i.e. the
    /// context/bypass boundaries a decoder observes without the key.
    pub fn bypass_layout(&self) -> Vec<(usize, usize, bool)> {
        let mut out: Vec<(usize, usize, bool)> = Vec::new();
        for r in &self.regions {
            let bypass = r.kind.is_bypass();
            match out.last_mut() {
                Some(last) if last.2 == bypass => last.1 += r.len,
                _ => out.push((r.start, r.len, bypass)),
            }
        }
        out
    }

    /// Indices of every bin currently labelled [`BinKind::BypassEncryptable`].
    pub fn encryptable_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.regions
            .iter()
            .filter(|r| r.kind == BinKind::BypassEncryptable)
            .flat_map(|r| r.start..r.end())
    }

    pub(crate) fn xor_bit(&mut self, index: usize, bit: bool) {
        self.bits[index] ^= bit;
    }

    /// Overwrites bit values without touching the region map.
    pub(crate) fn set_bit(&mut self, index: usize, bit: bool) {
        self.bits[index] = bit;
    }

    /// Relabels `[start, start + len)`. Every bin in the range must already be
    /// a bypass bin.
    pub(crate) fn mark_encryptable(&mut self, start: usize, len: usize) {
        self.mark_encryptable_ranges(&[(start, len)]);
    }

    /// Relabels several `(start, len)` ranges with a single region rebuild.
    pub(crate) fn mark_encryptable_ranges(&mut self, ranges: &[(usize, usize)]) {
        if ranges.iter().all(|&(_, len)| len == 0) {
            return;
        }
        let mut kinds: Vec<BinKind> = Vec::with_capacity(self.bits.len());
        for r in &self.regions {
            kinds.extend(std::iter::repeat_n(r.kind, r.len));
        }
        for &(start, len) in ranges {
            for k in &mut kinds[start..start + len] {
                debug_assert!(k.is_bypass(), "only bypass bins can be encrypted");
                *k = BinKind::BypassEncryptable;
            }
        }
        self.rebuild_regions(&kinds);
    }

    fn rebuild_regions(&mut self, kinds: &[BinKind]) {
        self.regions.clear();
        for (i, &kind) in kinds.iter().enumerate() {
            match self.regions.last_mut() {
                Some(last) if last.kind == kind => last.len += 1,
                _ => self.regions.push(Region { start: i, len: 1, kind }),
            }
        }
    }

    /// Packs the bins big-endian into bytes, zero-padding the final byte.
    pub fn to_bytes(&self) -> Vec<u8> {
        pack_bits(&self.bits)
    }

    pub fn cursor(&self) -> BinCursor<'_> {
        BinCursor::new(&self.bits)
    }
}

impl fmt::Display for BinString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BinString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BinString(\"{self}\", {:?})", self.regions)
    }
}

pub fn pack_bits(bits: &[bool]) -> Vec<u8> {
    let mut out = vec![0u8; bits.len().div_ceil(8)];
    for (i, &b) in bits.iter().enumerate() {
        if b {
            out[i / 8] |= 0x80 >> (i % 8);
        }
    }
    out
}

pub fn unpack_bits(bytes: &[u8], count: usize) -> Vec<bool> {
    (0..count)
        .map(|i| bytes[i / 8] & (0x80 >> (i % 8)) != 0)
        .collect()
}

/// Sequential reader over a bin slice.
#[derive(Clone, Debug)]
pub struct BinCursor<'a> {
    bits: &'a [bool],
    pos: usize,
}

impl<'a> BinCursor<'a> {
    pub fn new(bits: &'a [bool]) -> Self {
        Self { bits, pos: 0 }
    }

    pub fn at(bits: &'a [bool], pos: usize) -> Self {
        Self { bits, pos }
    }

    pub fn position(&self) -> usize {
        self.pos
    }

    pub fn remaining(&self) -> usize {
        self.bits.len().saturating_sub(self.pos)
    }

    pub fn peek(&self) -> Option<bool> {
        self.bits.get(self.pos).copied()
    }

    pub fn read_bit(&mut self) -> Result<bool, DecodeError> {
        let b = self
            .bits
            .get(self.pos)
            .copied()
            .ok_or(DecodeError::Truncated { offset: self.pos })?;
        self.pos += 1;
        Ok(b)
    }

    pub fn read_value(&mut self, len: u32) -> Result<u64, DecodeError> {
        debug_assert!(len <= 64);
        if self.remaining() < len as usize {
            return Err(DecodeError::Truncated { offset: self.bits.len() });
        }
        let mut v = 0u64;
        for _ in 0..len {
            v = (v << 1) | u64::from(self.read_bit()?);
        }
        Ok(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn push_merges_regions() {
        let mut s = BinString::new();
        s.push(true, BinKind::Context);
        s.push(false, BinKind::Context);
        s.push(true, BinKind::BypassClear);
        assert_eq!(s.regions().len(), 2);
        assert_eq!(s.regions()[1], Region { start: 2, len: 1, kind: BinKind::BypassClear });
        assert_eq!(s.to_string(), "101");
    }

    #[test]
    fn mark_encryptable_splits() {
        let mut s = BinString::from_bit_str("0000 0000");
        s.mark_encryptable(2, 3);
        let kinds: Vec<_> = s.regions().iter().map(|r| (r.start, r.len, r.kind)).collect();
        assert_eq!(
            kinds,
            vec![
                (0, 2, BinKind::BypassClear),
                (2, 3, BinKind::BypassEncryptable),
                (5, 3, BinKind::BypassClear)
            ]
        );
        assert_eq!(s.bypass_layout(), vec![(0, 8, true)]);
        assert_eq!(s.encryptable_indices().collect::<Vec<_>>(), vec![2, 3, 4]);
    }

    #[test]
    fn pack_is_msb_first() {
        let s = BinString::from_bit_str("1000000011");
        assert_eq!(s.to_bytes(), vec![0x80, 0xC0]);
        assert_eq!(unpack_bits(&[0x80, 0xC0], 10), s.bits());
    }

    #[test]
    fn cursor_reports_truncation_offset() {
        let bits = [true, false];
        let mut c = BinCursor::new(&bits);
        assert_eq!(c.read_value(2).unwrap(), 0b10);
        assert_eq!(c.read_bit(), Err(DecodeError::Truncated { offset: 2 }));
    }
}
