//! Sub-block encryption.
//!
//! Keystream use per block: one sample of `cRiceParam` bits for every
//! significant coefficient in scan order, used or not, then one 1-bit
//! sample per sign in scan order. Of a magnitude sample only the leading
//! `n` bits are used, `n` being the encryptable width of that coefficient.
//!
//! Magnitudes are encrypted one at a time in scan order, each decision taken
//! on the block as already modified by the earlier ones. Decryption parses
//! the block without the key, draws the same samples, and undoes the
//! magnitudes in reverse scan order, so that every decision is replayed on
//! exactly the neighbourhood the encoder saw.

use serde::Serialize;

use super::encryptable::{decide, target_mask, CheckContext, RemainderKind, RuleParams};
use super::keystream::{BlockSource, KeystreamState};
use super::CryptoError;
use crate::bincodes::BinString;
use crate::coeffmodel::{
    annotate, encode_subblock, read_subblock, CodingMode, CodingTables, DecodedSubBlock, EncodedSubBlock,
    PassAnnotation, SubBlock,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum RegionSource {
    TcSuffix,
    TsSuffix,
    Sign,
    FlElement,
    EgkSuffixMvd,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct EncryptionRegion {
    pub offset: usize,
    pub len: usize,
    pub source: RegionSource,
}

/// Encrypted spans of a bin string, sorted and disjoint.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct EncryptionRegionMap {
    regions: Vec<EncryptionRegion>,
}

impl EncryptionRegionMap {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a region that starts at or after the end of the last one.
    pub fn push(&mut self, offset: usize, len: usize, source: RegionSource) {
        if len == 0 {
            return;
        }
        if let Some(last) = self.regions.last() {
            assert!(last.offset + last.len <= offset, "encryption regions must be ordered and disjoint");
        }
        self.regions.push(EncryptionRegion { offset, len, source });
    }

    /// Appends `other` with every offset moved by `shift`.
    pub fn extend_shifted(&mut self, other: &EncryptionRegionMap, shift: usize) {
        for r in &other.regions {
            self.push(r.offset + shift, r.len, r.source);
        }
    }

    pub fn regions(&self) -> &[EncryptionRegion] {
        &self.regions
    }

    pub fn total_bits(&self) -> usize {
        self.regions.iter().map(|r| r.len).sum()
    }

    pub fn bits_of(&self, source: RegionSource) -> usize {
        self.regions.iter().filter(|r| r.source == source).map(|r| r.len).sum()
    }

    fn ranges(&self) -> Vec<(usize, usize)> {
        self.regions.iter().map(|r| (r.offset, r.len)).collect()
    }
}

/// Result of encrypting one block.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SealedBlock {
    /// Encrypted bins, encrypted spans labelled `BypassEncryptable`.
    pub bins: BinString,
    /// The coefficients a keyless decoder recovers.
    pub cipher_block: SubBlock,
    pub annotation: PassAnnotation,
    /// Encrypted magnitude bits per scan position.
    pub widths: Vec<u32>,
    /// Offsets relative to `bins`.
    pub regions: EncryptionRegionMap,
}

struct Samples {
    /// `(sample, width)` per scan position, for significant ones.
    magnitude: Vec<Option<(u64, u32)>>,
    sign: Vec<bool>,
}

fn draw_samples<S: BlockSource>(block: &SubBlock, ann: &PassAnnotation, ks: &mut KeystreamState<S>) -> Result<Samples, CryptoError> {
    let mut magnitude = vec![None; ann.positions.len()];
    let significant: Vec<bool> = ann.positions.iter().map(|p| block.get(p.x, p.y) != 0).collect();
    for (i, p) in ann.positions.iter().enumerate() {
        if significant[i] {
            magnitude[i] = Some((ks.sample_value(p.rice)?, p.rice));
        }
    }
    let mut sign = vec![false; ann.positions.len()];
    for (i, s) in sign.iter_mut().enumerate() {
        if significant[i] {
            *s = ks.sample_value(1)? == 1;
        }
    }
    Ok(Samples { magnitude, sign })
}

/// Visiting order of the magnitude pass.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Order {
    Forward,
    Reverse,
}

/// Runs the sequential magnitude pass. `pattern(i, n, rice, current)`
/// returns the `n`-bit mask to XOR into the targeted bits of position `i`,
/// `current` being those bits as they stand.
fn magnitude_pass(
    block: &mut SubBlock,
    ann: &PassAnnotation,
    tables: &CodingTables,
    log2_tr_range: u32,
    rules: RuleParams,
    order: Order,
    mut pattern: impl FnMut(usize, u32, u32, u32) -> u32,
) -> Vec<u32> {
    let n = ann.positions.len();
    let mut widths = vec![0; n];
    let visit: Box<dyn Iterator<Item = usize>> = match order {
        Order::Forward => Box::new(0..n),
        Order::Reverse => Box::new((0..n).rev()),
    };
    for i in visit {
        let info = &ann.positions[i];
        let d = decide(&CheckContext::new(block, tables, log2_tr_range).with_rules(rules), info);
        if d.bits == 0 {
            continue;
        }
        let kind = RemainderKind::of(info).expect("only remainder positions are encryptable");
        let value = block.get(info.x, info.y);
        let abs = value.unsigned_abs();
        let rem = kind.remainder(abs);
        let shift = info.rice - d.bits;
        let current = (rem & target_mask(d.bits, info.rice)) >> shift;
        let new_rem = rem ^ (pattern(i, d.bits, info.rice, current) << shift);
        let new_abs = kind.level(new_rem, abs & 1) as i32;
        block.set(info.x, info.y, if value < 0 { -new_abs } else { new_abs });
        widths[i] = d.bits;
    }
    widths
}

fn apply_signs(block: &mut SubBlock, ann: &PassAnnotation, flips: &[bool]) {
    for (p, &flip) in ann.positions.iter().zip(flips) {
        if flip {
            block.set(p.x, p.y, -block.get(p.x, p.y));
        }
    }
}

/// Region map of an encoded cipher block.
fn region_map(enc: &EncodedSubBlock, widths: &[u32], mode: CodingMode) -> EncryptionRegionMap {
    let source = match mode {
        CodingMode::Transform => RegionSource::TcSuffix,
        CodingMode::TransformSkip => RegionSource::TsSuffix,
    };
    let mut pieces: Vec<EncryptionRegion> = Vec::new();
    for (l, &w) in enc.layout.iter().zip(widths) {
        if w > 0 {
            let span = l.remainder.expect("encrypted positions carry a remainder");
            pieces.push(EncryptionRegion { offset: span.suffix_start(), len: w as usize, source });
        }
        if let Some(s) = l.sign {
            pieces.push(EncryptionRegion { offset: s, len: 1, source: RegionSource::Sign });
        }
    }
    pieces.sort_by_key(|r| r.offset);
    let mut map = EncryptionRegionMap::new();
    for r in pieces {
        map.push(r.offset, r.len, r.source);
    }
    map
}

fn seal(cipher_block: SubBlock, widths: Vec<u32>, tables: &CodingTables, log2_tr_range: u32) -> Result<SealedBlock, CryptoError> {
    let mut enc = encode_subblock(&cipher_block, tables, log2_tr_range)?;
    let regions = region_map(&enc, &widths, cipher_block.mode());
    enc.bins.mark_encryptable_ranges(&regions.ranges());
    Ok(SealedBlock {
        bins: enc.bins,
        cipher_block,
        annotation: enc.annotation,
        widths,
        regions,
    })
}

/// Encrypts `block` with the keystream positioned at this block.
pub fn encrypt_subblock<S: BlockSource>(
    block: &SubBlock,
    tables: &CodingTables,
    log2_tr_range: u32,
    ks: &mut KeystreamState<S>,
) -> Result<SealedBlock, CryptoError> {
    encrypt_subblock_with(block, tables, log2_tr_range, ks, RuleParams::default())
}

pub fn encrypt_subblock_with<S: BlockSource>(
    block: &SubBlock,
    tables: &CodingTables,
    log2_tr_range: u32,
    ks: &mut KeystreamState<S>,
    rules: RuleParams,
) -> Result<SealedBlock, CryptoError> {
    block.check_range(log2_tr_range)?;
    let ann = annotate(block, tables);
    let samples = draw_samples(block, &ann, ks)?;
    let mut work = block.clone();
    let widths = magnitude_pass(&mut work, &ann, tables, log2_tr_range, rules, Order::Forward, |i, n, rice, _| {
        let (sample, width) = samples.magnitude[i].expect("significant");
        debug_assert_eq!(width, rice);
        (sample >> (rice - n)) as u32
    });
    apply_signs(&mut work, &ann, &samples.sign);
    seal(work, widths, tables, log2_tr_range)
}

/// Removes the encryption of an already parsed block.
pub fn decrypt_decoded<S: BlockSource>(
    decoded: &DecodedSubBlock,
    tables: &CodingTables,
    log2_tr_range: u32,
    ks: &mut KeystreamState<S>,
) -> Result<(SubBlock, Vec<u32>), CryptoError> {
    let ann = &decoded.annotation;
    let mut work = decoded.block.clone();
    let samples = draw_samples(&work, ann, ks)?;
    apply_signs(&mut work, ann, &samples.sign);
    let widths = magnitude_pass(&mut work, ann, tables, log2_tr_range, RuleParams::default(), Order::Reverse, |i, n, rice, _| {
        let (sample, _) = samples.magnitude[i].expect("significant");
        (sample >> (rice - n)) as u32
    });
    Ok((work, widths))
}

/// Parses and decrypts one block from the front of `bits`.
pub fn decrypt_subblock<S: BlockSource>(
    bits: &BinString,
    width: usize,
    height: usize,
    mode: CodingMode,
    tables: &CodingTables,
    log2_tr_range: u32,
    ks: &mut KeystreamState<S>,
) -> Result<SubBlock, CryptoError> {
    let decoded = read_subblock(&mut bits.cursor(), width, height, mode, tables, log2_tr_range)?;
    Ok(decrypt_decoded(&decoded, tables, log2_tr_range, ks)?.0)
}

/// Replacement attack: every bin that would be encrypted is forced to 0
/// (signs become positive), with the same sequential decisions.
pub fn replace_encryptable_with_zero(block: &SubBlock, tables: &CodingTables, log2_tr_range: u32) -> Result<SealedBlock, CryptoError> {
    block.check_range(log2_tr_range)?;
    let ann = annotate(block, tables);
    let mut work = block.clone();
    let widths = magnitude_pass(&mut work, &ann, tables, log2_tr_range, RuleParams::default(), Order::Forward, |_, _, _, current| current);
    for p in &ann.positions {
        work.set(p.x, p.y, work.get(p.x, p.y).abs());
    }
    seal(work, widths, tables, log2_tr_range)
}
