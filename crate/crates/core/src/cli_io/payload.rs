//! Payload syntax shared by plain and sealed streams.
//!
//! ```text
//! ue(num_blocks)
//! per block:  log2_width u(3)  log2_height u(3)  mode u(1)  residual bins
//! ue(num_aux)
//! per element: kind u(4)  element bins
//! ```
//!
//! `ue` is 0th-order exp-Golomb. Everything outside the residual and element
//! bins is bypass side information that is never encrypted.

use super::sealed::{SealedHeader, SealedStream, FLAG_REPLACED, SEALED_VERSION};
use super::stream::{AuxElement, CoefficientStream, StreamHeader, STREAM_FORMAT, STREAM_VERSION};
use super::StreamError;
use crate::bincodes::codes::read_egk;
use crate::bincodes::{encode_egk, BinCursor, BinKind, BinString, DecodeError};
use crate::coeffmodel::{
    read_subblock, write_subblock, CodingMode, CodingTables, CoeffError, DecodedSubBlock, SubBlock,
};
use crate::crypto::{
    decrypt_decoded, encrypt_fl_element, encrypt_subblock, replace_encryptable_with_zero, zero_fl_element, AuxKind,
    BlockSource, EncryptionRegionMap, Key, KeystreamState, Nonce,
};

const SIDE: BinKind = BinKind::BypassClear;

fn write_block_header(out: &mut BinString, b: &SubBlock) {
    out.push_value(u64::from(b.width().trailing_zeros()), 3, SIDE);
    out.push_value(u64::from(b.height().trailing_zeros()), 3, SIDE);
    out.push_value(u64::from(b.mode() == CodingMode::TransformSkip), 1, SIDE);
}

fn write_aux_tag(out: &mut BinString, kind: AuxKind) {
    out.push_value(u64::from(kind.tag()), 4, SIDE);
}

/// Plain bins of a stream.
pub fn encode_payload(stream: &CoefficientStream, tables: &CodingTables) -> Result<BinString, StreamError> {
    let log2 = stream.header.log2_tr_range;
    let mut out = encode_egk(stream.blocks.len() as u64, 0);
    for b in &stream.blocks {
        write_block_header(&mut out, b);
        write_subblock(&mut out, b, tables, log2)?;
    }
    out.append(&encode_egk(stream.aux.len() as u64, 0));
    for a in &stream.aux {
        write_aux_tag(&mut out, a.kind);
        out.append(&a.kind.code().encode(a.value)?);
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParsedAux {
    pub kind: AuxKind,
    pub value: u64,
    /// Offset of the element bins.
    pub start: usize,
    pub len: usize,
}

/// What a decoder without the key recovers from a payload.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParsedPayload {
    pub blocks: Vec<DecodedSubBlock>,
    pub aux: Vec<ParsedAux>,
}

impl ParsedPayload {
    pub fn to_stream(&self, header: StreamHeader) -> CoefficientStream {
        CoefficientStream {
            header,
            blocks: self.blocks.iter().map(|d| d.block.clone()).collect(),
            aux: self.aux.iter().map(|a| AuxElement { kind: a.kind, value: a.value }).collect(),
        }
    }
}

fn malformed(offset: usize, what: &'static str) -> StreamError {
    StreamError::Coeff(CoeffError::Decode(DecodeError::Malformed { offset, what }))
}

fn read_count(c: &mut BinCursor<'_>) -> Result<usize, StreamError> {
    let at = c.position();
    let n = read_egk(c, 0).map_err(CoeffError::from)?;
    // Every entry takes at least one bin.
    if n > c.remaining() as u64 {
        return Err(malformed(at, "entry count exceeds payload"));
    }
    Ok(n as usize)
}

/// Parses a whole payload; trailing bins are an error.
pub fn parse_payload(bits: &[bool], tables: &CodingTables, log2_tr_range: u32) -> Result<ParsedPayload, StreamError> {
    let mut c = BinCursor::new(bits);
    let num_blocks = read_count(&mut c)?;
    let mut blocks = Vec::with_capacity(num_blocks);
    for _ in 0..num_blocks {
        let at = c.position();
        let lw = c.read_value(3).map_err(CoeffError::from)?;
        let lh = c.read_value(3).map_err(CoeffError::from)?;
        let mode = if c.read_bit().map_err(CoeffError::from)? { CodingMode::TransformSkip } else { CodingMode::Transform };
        if lw > 6 || lh > 6 {
            return Err(malformed(at, "block side above 64"));
        }
        blocks.push(read_subblock(&mut c, 1 << lw, 1 << lh, mode, tables, log2_tr_range)?);
    }
    let num_aux = read_count(&mut c)?;
    let mut aux = Vec::with_capacity(num_aux);
    for _ in 0..num_aux {
        let at = c.position();
        let tag = c.read_value(4).map_err(CoeffError::from)? as u8;
        let kind = AuxKind::from_tag(tag).ok_or_else(|| malformed(at, "unknown element kind"))?;
        let start = c.position();
        let value = kind.code().read(&mut c).map_err(CoeffError::from)?;
        aux.push(ParsedAux { kind, value, start, len: c.position() - start });
    }
    if c.remaining() != 0 {
        return Err(malformed(c.position(), "trailing bins after payload"));
    }
    Ok(ParsedPayload { blocks, aux })
}

/// Encrypted or attacked bins with their encrypted spans.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SealOutput {
    pub bins: BinString,
    pub regions: EncryptionRegionMap,
}

/// Builds a payload, letting the callbacks produce the residual and element
/// bins with offsets relative to their own start.
fn build(
    stream: &CoefficientStream,
    mut block: impl FnMut(&SubBlock) -> Result<(BinString, EncryptionRegionMap), StreamError>,
    mut element: impl FnMut(&AuxElement, BinString) -> Result<BinString, StreamError>,
) -> Result<SealOutput, StreamError> {
    let mut bins = encode_egk(stream.blocks.len() as u64, 0);
    let mut regions = EncryptionRegionMap::new();
    for b in &stream.blocks {
        write_block_header(&mut bins, b);
        let (sealed, r) = block(b)?;
        regions.extend_shifted(&r, bins.len());
        bins.append(&sealed);
    }
    bins.append(&encode_egk(stream.aux.len() as u64, 0));
    for a in &stream.aux {
        write_aux_tag(&mut bins, a.kind);
        let sealed = element(a, a.kind.code().encode(a.value)?)?;
        let (start, len) = a.kind.code().encryptable_span(&sealed);
        regions.push(bins.len() + start, len, a.kind.source());
        bins.append(&sealed);
    }
    Ok(SealOutput { bins, regions })
}

fn seal_with<S: BlockSource>(stream: &CoefficientStream, tables: &CodingTables, ks: &mut KeystreamState<S>) -> Result<SealOutput, StreamError> {
    let log2 = stream.header.log2_tr_range;
    // Both callbacks draw from the same keystream, blocks strictly first.
    let ks = std::cell::RefCell::new(ks);
    build(
        stream,
        |b| {
            let s = encrypt_subblock(b, tables, log2, &mut **ks.borrow_mut())?;
            Ok((s.bins, s.regions))
        },
        |a, bins| Ok(encrypt_fl_element(&bins, a.kind.code(), &mut **ks.borrow_mut())?),
    )
}

fn sealed_header(stream: &CoefficientStream, tables: &CodingTables, nonce: Nonce, flags: u8, bit_count: usize) -> SealedHeader {
    SealedHeader {
        version: SEALED_VERSION,
        log2_tr_range: stream.header.log2_tr_range as u8,
        flags,
        nonce,
        bit_count: bit_count as u64,
        tables_digest: tables.digest(),
    }
}

/// Encrypts a stream under `key` and `nonce`.
pub fn seal_stream(
    stream: &CoefficientStream,
    tables: &CodingTables,
    key: &Key,
    nonce: &Nonce,
) -> Result<(SealedStream, SealOutput), StreamError> {
    stream.check_tables(tables)?;
    let out = seal_with(stream, tables, &mut KeystreamState::new(key, nonce))?;
    let header = sealed_header(stream, tables, *nonce, 0, out.bins.len());
    Ok((SealedStream { header, bits: out.bins.bits().to_vec() }, out))
}

/// The replacement attack: every encryptable bin of the stream set to 0.
pub fn replacement_stream(stream: &CoefficientStream, tables: &CodingTables) -> Result<(SealedStream, SealOutput), StreamError> {
    stream.check_tables(tables)?;
    let log2 = stream.header.log2_tr_range;
    let out = build(
        stream,
        |b| {
            let s = replace_encryptable_with_zero(b, tables, log2)?;
            Ok((s.bins, s.regions))
        },
        |a, bins| Ok(zero_fl_element(&bins, a.kind.code())?),
    )?;
    let header = sealed_header(stream, tables, Nonce([0; 16]), FLAG_REPLACED, out.bins.len());
    Ok((SealedStream { header, bits: out.bins.bits().to_vec() }, out))
}

fn check_sealed(sealed: &SealedStream, tables: &CodingTables) -> Result<StreamHeader, StreamError> {
    let stream_digest = hex::encode(sealed.header.tables_digest);
    let digest = tables.digest_hex();
    if stream_digest != digest {
        return Err(StreamError::DigestMismatch { stream: stream_digest, tables: digest });
    }
    Ok(StreamHeader {
        format: STREAM_FORMAT.into(),
        version: STREAM_VERSION,
        log2_tr_range: u32::from(sealed.header.log2_tr_range),
        tables_digest: digest,
    })
}

/// Keyless decode: the stream a standard decoder would see.
pub fn decode_only(sealed: &SealedStream, tables: &CodingTables) -> Result<CoefficientStream, StreamError> {
    let header = check_sealed(sealed, tables)?;
    Ok(parse_payload(&sealed.bits, tables, header.log2_tr_range)?.to_stream(header))
}

pub fn unseal_stream(sealed: &SealedStream, tables: &CodingTables, key: &Key) -> Result<CoefficientStream, StreamError> {
    if sealed.header.flags & FLAG_REPLACED != 0 {
        return Err(StreamError::Format("stream was not produced with a key".into()));
    }
    let header = check_sealed(sealed, tables)?;
    let log2 = header.log2_tr_range;
    let parsed = parse_payload(&sealed.bits, tables, log2)?;
    let mut ks = KeystreamState::new(key, &sealed.header.nonce);
    let mut blocks = Vec::with_capacity(parsed.blocks.len());
    for d in &parsed.blocks {
        blocks.push(decrypt_decoded(d, tables, log2, &mut ks)?.0);
    }
    let mut aux = Vec::with_capacity(parsed.aux.len());
    for a in &parsed.aux {
        let code = a.kind.code();
        let bins = BinString::from_bits(sealed.bits[a.start..a.start + a.len].to_vec(), BinKind::BypassClear);
        let plain = encrypt_fl_element(&bins, code, &mut ks)?;
        let value = code.read(&mut plain.cursor()).map_err(CoeffError::from)?;
        aux.push(AuxElement { kind: a.kind, value });
    }
    Ok(CoefficientStream { header, blocks, aux })
}
