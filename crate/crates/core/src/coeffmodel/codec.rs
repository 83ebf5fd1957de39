//! Sub-block ↔ bin string mapping.
//!
//! TC layout (reverse diagonal scan):
//! 1. pass 1, context bins per coefficient while at least 4 budget units
//!    remain: `sig`, then `gt1` if significant, then `par` and `gt3` if
//!    `|C| > 1`;
//! 2. pass 2-1, `abs_remainder = (|C| − 4)/2` for every pass-1 coefficient
//!    with `gt3` set, rice from the local sum with `baseLvl = 4`;
//! 3. pass 2-2, `dec_abs_level` for every coefficient past the pass-1
//!    cutoff, rice and `V` from the local sum with `baseLvl = 0`;
//! 4. pass 3, one bypass sign per nonzero coefficient.
//!
//! TS layout (forward diagonal scan):
//! 1. pass 1 while at least 7 budget units remain: `sig`, bypass `sign`,
//!    `gt1`, `par`; a coefficient with `gt1` set reserves 4 further units
//!    for its greater-than flags;
//! 2. `gt3`, `gt5`, `gt7`, `gt9` context flags for each `gt1` coefficient,
//!    stopping at the first zero flag;
//! 3. `abs_remainderTS = (|C| − 10)/2` for levels of at least 10;
//! 4. past the cutoff, `|C|` through the remainder code then a bypass sign.
//!
//! The sums feeding rice and `V` only ever read positions earlier in scan
//! order, so the decoder always has them at hand.

use serde::{Deserialize, Serialize};

use super::levels::{
    level_from_remainder, map_dec_abs_level, unmap_dec_abs_level, TC_REMAINDER_BASE, TS_REMAINDER_BASE,
};
use super::neighbors::{local_abs_sum, local_abs_sum_ts, pass1_bin_budget, scan_positions};
use super::{CodingMode, CodingTables, CoeffError, SubBlock};
use crate::bincodes::remainder::{read_remainder, write_remainder};
use crate::bincodes::{BinCursor, BinKind, BinString, DecodeError, RemainderLayout, RemainderParams};

/// Budget units a TC coefficient needs to enter pass 1.
pub const TC_PASS1_GROUP: usize = 4;
/// Budget units a TS coefficient needs to enter pass 1.
pub const TS_PASS1_GROUP: usize = 7;
const TS_GTX_FLAGS: u32 = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pass {
    /// Flags only.
    P1,
    /// TC remainder after the flags.
    P2_1,
    /// Coded wholly in bypass past the pass-1 cutoff.
    P2_2,
    /// TS remainder after the greater-than flags.
    P3,
}

/// Derived parameters of one scan position.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PositionInfo {
    pub x: usize,
    pub y: usize,
    pub pass: Pass,
    /// Rice parameter of the remainder pass that serves this position:
    /// `baseLvl = 4` for pass-1 TC positions, `baseLvl = 0` past the cutoff.
    pub rice: u32,
    /// Dependent-quantization state on entry (always 0 in TS mode).
    pub state: u8,
    /// Zero-swap level, present only for bypass-coded positions.
    pub v: Option<u32>,
    pub parity: u8,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PassAnnotation {
    /// One entry per position, in scan order.
    pub positions: Vec<PositionInfo>,
    /// Index in scan order of the first position past pass 1.
    pub cutoff: usize,
    pub context_bins: usize,
}

/// Where a remainder codeword sits in the host bin string.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RemainderSpan {
    pub start: usize,
    pub layout: RemainderLayout,
    pub value: u64,
}

impl RemainderSpan {
    pub fn suffix_start(&self) -> usize {
        self.start + self.layout.prefix_len
    }
}

/// Bin offsets of the bypass pieces of one position.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct PositionLayout {
    pub remainder: Option<RemainderSpan>,
    pub sign: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EncodedSubBlock {
    pub bins: BinString,
    pub annotation: PassAnnotation,
    /// Indexed like `annotation.positions`; offsets are relative to `bins`.
    pub layout: Vec<PositionLayout>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecodedSubBlock {
    pub block: SubBlock,
    pub annotation: PassAnnotation,
    /// Offsets are absolute positions in the decoded bit slice.
    pub layout: Vec<PositionLayout>,
    pub end: usize,
}

fn params(rice: u32, log2_tr_range: u32) -> Result<RemainderParams, CoeffError> {
    Ok(RemainderParams::new(rice, log2_tr_range)?)
}

/// Rice parameter and zero-swap level for every position of `block`, in
/// scan order, given the pass-1 cutoff.
fn derive(block: &SubBlock, tables: &CodingTables, scan: &[(usize, usize)], cutoff: usize) -> Vec<(u32, u8, Option<u32>)> {
    let mut state = 0u8;
    let mut out = Vec::with_capacity(scan.len());
    for (i, &(x, y)) in scan.iter().enumerate() {
        let parity = (block.get(x, y).unsigned_abs() & 1) as u8;
        let entry = match block.mode() {
            CodingMode::Transform if i < cutoff => (tables.rice(local_abs_sum(block, x, y, TC_REMAINDER_BASE)), state, None),
            CodingMode::Transform => {
                let sum = local_abs_sum(block, x, y, 0);
                (tables.rice(sum), state, Some(tables.v(state, sum)))
            }
            CodingMode::TransformSkip => {
                let rice = tables.rice(local_abs_sum_ts(block, x, y));
                (rice, 0, (i >= cutoff).then_some(0))
            }
        };
        out.push(entry);
        if block.mode() == CodingMode::Transform {
            state = tables.next_state(state, parity);
        }
    }
    out
}

fn pass_of(mode: CodingMode, i: usize, cutoff: usize, abs: u32) -> Pass {
    match mode {
        _ if i >= cutoff => Pass::P2_2,
        CodingMode::Transform if abs >= TC_REMAINDER_BASE => Pass::P2_1,
        CodingMode::TransformSkip if abs >= TS_REMAINDER_BASE => Pass::P3,
        _ => Pass::P1,
    }
}

fn build_annotation(block: &SubBlock, tables: &CodingTables, scan: &[(usize, usize)], cutoff: usize, context_bins: usize) -> PassAnnotation {
    let derived = derive(block, tables, scan, cutoff);
    let positions = scan
        .iter()
        .zip(derived)
        .enumerate()
        .map(|(i, (&(x, y), (rice, state, v)))| {
            let abs = block.get(x, y).unsigned_abs();
            PositionInfo {
                x,
                y,
                pass: pass_of(block.mode(), i, cutoff, abs),
                rice,
                state,
                v,
                parity: (abs & 1) as u8,
            }
        })
        .collect();
    PassAnnotation { positions, cutoff, context_bins }
}

/// Annotation of `block` computed directly from its values, without
/// producing bins.
pub fn annotate(block: &SubBlock, tables: &CodingTables) -> PassAnnotation {
    let scan = scan_positions(block.width(), block.height(), block.mode());
    let (cutoff, context_bins) = pass1_extent(block, &scan);
    build_annotation(block, tables, &scan, cutoff, context_bins)
}

/// Pass-1 cutoff and context-bin count implied by the values of `block`.
fn pass1_extent(block: &SubBlock, scan: &[(usize, usize)]) -> (usize, usize) {
    let budget = pass1_bin_budget(block.width(), block.height());
    let mut remaining = budget;
    let mut bins = 0;
    for (i, &(x, y)) in scan.iter().enumerate() {
        let a = block.get(x, y).unsigned_abs();
        match block.mode() {
            CodingMode::Transform => {
                if remaining < TC_PASS1_GROUP {
                    return (i, bins);
                }
                let used = match a {
                    0 => 1,
                    1 => 2,
                    _ => 4,
                };
                remaining -= used;
                bins += used;
            }
            CodingMode::TransformSkip => {
                if remaining < TS_PASS1_GROUP {
                    return (i, bins);
                }
                let (used, reserved) = match a {
                    0 => (1, 1),
                    1 => (2, 2),
                    _ => (3 + ts_gtx_count(a) as usize, 3 + TS_GTX_FLAGS as usize),
                };
                remaining -= reserved;
                bins += used;
            }
        }
    }
    (scan.len(), bins)
}

/// Number of greater-than flags a TS level with `gt1` set carries.
fn ts_gtx_count(abs: u32) -> u32 {
    let t = (abs - 2) / 2;
    (t + 1).min(TS_GTX_FLAGS)
}

/// Encodes `block` into a fresh bin string.
pub fn encode_subblock(block: &SubBlock, tables: &CodingTables, log2_tr_range: u32) -> Result<EncodedSubBlock, CoeffError> {
    let mut bins = BinString::new();
    let (annotation, layout) = write_subblock(&mut bins, block, tables, log2_tr_range)?;
    Ok(EncodedSubBlock { bins, annotation, layout })
}

/// Appends the bins of `block` to `out`. Layout offsets are absolute
/// positions in `out`.
pub fn write_subblock(
    out: &mut BinString,
    block: &SubBlock,
    tables: &CodingTables,
    log2_tr_range: u32,
) -> Result<(PassAnnotation, Vec<PositionLayout>), CoeffError> {
    block.check_range(log2_tr_range)?;
    let scan = scan_positions(block.width(), block.height(), block.mode());
    let (cutoff, context_bins) = pass1_extent(block, &scan);
    let annotation = build_annotation(block, tables, &scan, cutoff, context_bins);
    let mut layout = vec![PositionLayout::default(); scan.len()];
    let start = out.len();
    let abs: Vec<u32> = scan.iter().map(|&(x, y)| block.get(x, y).unsigned_abs()).collect();
    let negative: Vec<bool> = scan.iter().map(|&(x, y)| block.get(x, y) < 0).collect();
    let ctx = BinKind::Context;
    let byp = BinKind::BypassClear;

    let put_remainder = |out: &mut BinString, layout: &mut [PositionLayout], i: usize, value: u64, rice: u32| -> Result<(), CoeffError> {
        let at = out.len();
        let l = write_remainder(out, value, params(rice, log2_tr_range)?, byp)?;
        layout[i].remainder = Some(RemainderSpan { start: at, layout: l, value });
        Ok(())
    };

    match block.mode() {
        CodingMode::Transform => {
            for &a in &abs[..cutoff] {
                out.push(a > 0, ctx);
                if a > 0 {
                    out.push(a > 1, ctx);
                    if a > 1 {
                        out.push(a & 1 == 1, ctx);
                        out.push(a >= TC_REMAINDER_BASE, ctx);
                    }
                }
            }
            for i in 0..cutoff {
                if abs[i] >= TC_REMAINDER_BASE {
                    let rem = u64::from((abs[i] - TC_REMAINDER_BASE) / 2);
                    put_remainder(out, &mut layout, i, rem, annotation.positions[i].rice)?;
                }
            }
            for i in cutoff..scan.len() {
                let info = annotation.positions[i];
                let rem = map_dec_abs_level(abs[i] as i32, info.v.unwrap_or(0));
                put_remainder(out, &mut layout, i, u64::from(rem), info.rice)?;
            }
            for i in 0..scan.len() {
                if abs[i] > 0 {
                    layout[i].sign = Some(out.len());
                    out.push(negative[i], byp);
                }
            }
        }
        CodingMode::TransformSkip => {
            for i in 0..cutoff {
                let a = abs[i];
                out.push(a > 0, ctx);
                if a > 0 {
                    layout[i].sign = Some(out.len());
                    out.push(negative[i], byp);
                    out.push(a > 1, ctx);
                    if a > 1 {
                        out.push(a & 1 == 1, ctx);
                    }
                }
            }
            for &a in &abs[..cutoff] {
                if a > 1 {
                    let t = (a - 2) / 2;
                    for j in 0..ts_gtx_count(a) {
                        out.push(t > j, ctx);
                    }
                }
            }
            for i in 0..cutoff {
                if abs[i] >= TS_REMAINDER_BASE {
                    let rem = u64::from((abs[i] - TS_REMAINDER_BASE) / 2);
                    put_remainder(out, &mut layout, i, rem, annotation.positions[i].rice)?;
                }
            }
            for i in cutoff..scan.len() {
                put_remainder(out, &mut layout, i, u64::from(abs[i]), annotation.positions[i].rice)?;
                if abs[i] > 0 {
                    layout[i].sign = Some(out.len());
                    out.push(negative[i], byp);
                }
            }
        }
    }
    debug_assert_eq!(
        out.regions().iter().filter(|r| r.end() > start && r.kind == ctx).map(|r| r.end() - r.start.max(start)).sum::<usize>(),
        context_bins
    );
    Ok((annotation, layout))
}

/// Decodes one sub-block from the front of `bits`.
pub fn decode_subblock(
    bits: &BinString,
    width: usize,
    height: usize,
    mode: CodingMode,
    tables: &CodingTables,
    log2_tr_range: u32,
) -> Result<DecodedSubBlock, CoeffError> {
    let mut c = bits.cursor();
    read_subblock(&mut c, width, height, mode, tables, log2_tr_range)
}

/// Partial knowledge of one level during parsing.
#[derive(Clone, Copy, Default)]
struct Partial {
    abs: u64,
    /// A remainder follows in a later pass.
    more: bool,
    negative: bool,
}

fn malformed(offset: usize, what: &'static str) -> CoeffError {
    CoeffError::Decode(DecodeError::Malformed { offset, what })
}

struct Reader<'c, 'a> {
    c: &'c mut BinCursor<'a>,
    log2_tr_range: u32,
    remaining: usize,
    context_bins: usize,
    layout: Vec<PositionLayout>,
}

impl Reader<'_, '_> {
    fn ctx(&mut self) -> Result<bool, CoeffError> {
        self.remaining -= 1;
        self.context_bins += 1;
        Ok(self.c.read_bit()?)
    }

    fn sign(&mut self, i: usize) -> Result<bool, CoeffError> {
        self.layout[i].sign = Some(self.c.position());
        Ok(self.c.read_bit()?)
    }

    fn remainder(&mut self, i: usize, rice: u32) -> Result<u64, CoeffError> {
        let start = self.c.position();
        let (value, layout) = read_remainder(self.c, params(rice, self.log2_tr_range)?)?;
        self.layout[i].remainder = Some(RemainderSpan { start, layout, value });
        Ok(value)
    }

    fn store(&self, block: &mut SubBlock, (x, y): (usize, usize), abs: u64, offset: usize) -> Result<(), CoeffError> {
        if abs >> self.log2_tr_range != 0 {
            return Err(malformed(offset, "level outside the dynamic range"));
        }
        block.set(x, y, abs as i32);
        Ok(())
    }
}

/// Parses one sub-block at the cursor. Neighbour sums are taken on the
/// partially rebuilt block, which holds final magnitudes at every position
/// the sums can reach.
pub fn read_subblock(
    c: &mut BinCursor<'_>,
    width: usize,
    height: usize,
    mode: CodingMode,
    tables: &CodingTables,
    log2_tr_range: u32,
) -> Result<DecodedSubBlock, CoeffError> {
    let mut block = SubBlock::zeros(width, height, mode)?;
    let scan = scan_positions(width, height, mode);
    let n = scan.len();
    let mut r = Reader {
        c,
        log2_tr_range,
        remaining: pass1_bin_budget(width, height),
        context_bins: 0,
        layout: vec![PositionLayout::default(); n],
    };
    let mut cutoff = n;
    let mut partial = vec![Partial::default(); n];

    match mode {
        CodingMode::Transform => {
            for (i, p) in partial.iter_mut().enumerate() {
                if r.remaining < TC_PASS1_GROUP {
                    cutoff = i;
                    break;
                }
                if r.ctx()? {
                    p.abs = 1;
                    if r.ctx()? {
                        let par = r.ctx()?;
                        let gt3 = r.ctx()?;
                        p.abs = 2 + u64::from(par) + 2 * u64::from(gt3);
                        p.more = gt3;
                    }
                }
            }
            for (i, &pos) in scan.iter().enumerate() {
                r.store(&mut block, pos, partial[i].abs, r.c.position())?;
            }
            for (i, &(x, y)) in scan.iter().enumerate().take(cutoff) {
                if partial[i].more {
                    let at = r.c.position();
                    let rem = r.remainder(i, tables.rice(local_abs_sum(&block, x, y, TC_REMAINDER_BASE)))?;
                    let abs = level_from_remainder(TC_REMAINDER_BASE, (partial[i].abs & 1) as u32, rem);
                    r.store(&mut block, (x, y), abs, at)?;
                }
            }
            let mut state = 0u8;
            for (i, &(x, y)) in scan.iter().enumerate() {
                if i >= cutoff {
                    let sum = local_abs_sum(&block, x, y, 0);
                    let at = r.c.position();
                    let rem = r.remainder(i, tables.rice(sum))?;
                    let rem = u32::try_from(rem).map_err(|_| malformed(at, "level outside the dynamic range"))?;
                    let abs = unmap_dec_abs_level(rem, tables.v(state, sum));
                    r.store(&mut block, (x, y), u64::from(abs), at)?;
                }
                state = tables.next_state(state, (block.get(x, y) & 1) as u8);
            }
            for (i, &(x, y)) in scan.iter().enumerate() {
                if block.get(x, y) != 0 {
                    partial[i].negative = r.sign(i)?;
                }
            }
        }
        CodingMode::TransformSkip => {
            for (i, p) in partial.iter_mut().enumerate() {
                if r.remaining < TS_PASS1_GROUP {
                    cutoff = i;
                    break;
                }
                if r.ctx()? {
                    p.abs = 1;
                    p.negative = r.sign(i)?;
                    if r.ctx()? {
                        p.abs = 2 + u64::from(r.ctx()?);
                        p.more = true;
                        r.remaining -= TS_GTX_FLAGS as usize;
                    }
                }
            }
            for p in partial.iter_mut().take(cutoff) {
                if p.more {
                    for _ in 0..TS_GTX_FLAGS {
                        r.context_bins += 1;
                        if !r.c.read_bit()? {
                            break;
                        }
                        p.abs += 2;
                    }
                    // Levels 10 and up carry all four flags and a remainder.
                    p.more = p.abs >= u64::from(TS_REMAINDER_BASE);
                }
            }
            for (i, &pos) in scan.iter().enumerate() {
                r.store(&mut block, pos, partial[i].abs, r.c.position())?;
            }
            for (i, &(x, y)) in scan.iter().enumerate().take(cutoff) {
                if partial[i].more {
                    let at = r.c.position();
                    let rem = r.remainder(i, tables.rice(local_abs_sum_ts(&block, x, y)))?;
                    let abs = level_from_remainder(TS_REMAINDER_BASE, (partial[i].abs & 1) as u32, rem);
                    r.store(&mut block, (x, y), abs, at)?;
                }
            }
            for (i, &(x, y)) in scan.iter().enumerate().skip(cutoff) {
                let at = r.c.position();
                let abs = r.remainder(i, tables.rice(local_abs_sum_ts(&block, x, y)))?;
                r.store(&mut block, (x, y), abs, at)?;
                if abs > 0 {
                    partial[i].negative = r.sign(i)?;
                }
            }
        }
    }
    for (i, &(x, y)) in scan.iter().enumerate() {
        if partial[i].negative {
            block.set(x, y, -block.get(x, y));
        }
    }
    let annotation = build_annotation(&block, tables, &scan, cutoff, r.context_bins);
    Ok(DecodedSubBlock { block, annotation, layout: r.layout, end: r.c.position() })
}
