//! Binary container for an encrypted payload.
//!
//! Header, 64 bytes, integers big-endian:
//!
//! | bytes  | field                      |
//! |--------|----------------------------|
//! | 0..4   | magic `VVSE`               |
//! | 4..6   | container version          |
//! | 6      | log2 transform range       |
//! | 7      | flags                      |
//! | 8..24  | nonce (initial counter)    |
//! | 24..32 | payload length in bits     |
//! | 32..64 | SHA-256 table digest       |
//!
//! The payload follows, eight bins per byte, first bin in the most
//! significant bit, the final byte zero-padded. The key is never stored.

use super::StreamError;
use crate::bincodes::{pack_bits, unpack_bits};
use crate::crypto::Nonce;

pub const MAGIC: [u8; 4] = *b"VVSE";
pub const SEALED_VERSION: u16 = 1;
pub const HEADER_BYTES: usize = 64;
/// The payload was produced by the replacement attack, not by a key.
pub const FLAG_REPLACED: u8 = 0x01;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SealedHeader {
    pub version: u16,
    pub log2_tr_range: u8,
    pub flags: u8,
    pub nonce: Nonce,
    pub bit_count: u64,
    pub tables_digest: [u8; 32],
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SealedStream {
    pub header: SealedHeader,
    pub bits: Vec<bool>,
}

fn format_err(msg: impl Into<String>) -> StreamError {
    StreamError::Format(msg.into())
}

impl SealedStream {
    pub fn to_bytes(&self) -> Vec<u8> {
        debug_assert_eq!(self.header.bit_count, self.bits.len() as u64);
        let h = &self.header;
        let mut out = Vec::with_capacity(HEADER_BYTES + self.bits.len().div_ceil(8));
        out.extend_from_slice(&MAGIC);
        out.extend_from_slice(&h.version.to_be_bytes());
        out.push(h.log2_tr_range);
        out.push(h.flags);
        out.extend_from_slice(&h.nonce.0);
        out.extend_from_slice(&h.bit_count.to_be_bytes());
        out.extend_from_slice(&h.tables_digest);
        debug_assert_eq!(out.len(), HEADER_BYTES);
        out.extend(pack_bits(&self.bits));
        out
    }

    pub fn from_bytes(data: &[u8]) -> Result<Self, StreamError> {
        if data.len() < HEADER_BYTES {
            return Err(format_err(format!("{} bytes is shorter than the header", data.len())));
        }
        if data[0..4] != MAGIC {
            return Err(format_err("bad magic"));
        }
        let version = u16::from_be_bytes([data[4], data[5]]);
        if version != SEALED_VERSION {
            return Err(format_err(format!("unsupported container version {version}")));
        }
        let flags = data[7];
        if flags & !FLAG_REPLACED != 0 {
            return Err(format_err(format!("unknown flags {flags:#04x}")));
        }
        let bit_count = u64::from_be_bytes(data[24..32].try_into().expect("8 bytes"));
        let payload = &data[HEADER_BYTES..];
        let expected = usize::try_from(bit_count.div_ceil(8)).map_err(|_| format_err("bit count overflows"))?;
        if payload.len() != expected {
            return Err(format_err(format!(
                "payload is {} bytes, header announces {bit_count} bits ({expected} bytes)",
                payload.len()
            )));
        }
        let bit_count_usize = bit_count as usize;
        if bit_count_usize % 8 != 0 {
            let pad = 8 - bit_count_usize % 8;
            if payload[expected - 1] & ((1u8 << pad) - 1) != 0 {
                return Err(format_err("nonzero padding bits"));
            }
        }
        Ok(Self {
            header: SealedHeader {
                version,
                log2_tr_range: data[6],
                flags,
                nonce: Nonce(data[8..24].try_into().expect("16 bytes")),
                bit_count,
                tables_digest: data[32..64].try_into().expect("32 bytes"),
            },
            bits: unpack_bits(payload, bit_count_usize),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(bits: Vec<bool>) -> SealedStream {
        SealedStream {
            header: SealedHeader {
                version: SEALED_VERSION,
                log2_tr_range: 15,
                flags: 0,
                nonce: "000102030405060708090a0b0c0d0e0f".parse().unwrap(),
                bit_count: bits.len() as u64,
                tables_digest: [7; 32],
            },
            bits,
        }
    }

    #[test]
    fn byte_layout() {
        let s = sample(vec![true, false, true, true, false, false, false, false, true, true]);
        let b = s.to_bytes();
        assert_eq!(&b[..4], b"VVSE");
        assert_eq!(&b[4..8], &[0, 1, 15, 0]);
        assert_eq!(&b[24..32], &10u64.to_be_bytes());
        assert_eq!(&b[64..], &[0b1011_0000, 0b1100_0000]);
        assert_eq!(SealedStream::from_bytes(&b).unwrap(), s);
    }

    #[test]
    fn round_trip_lengths() {
        for n in [0usize, 1, 7, 8, 9, 100] {
            let s = sample((0..n).map(|i| i % 3 == 0).collect());
            assert_eq!(SealedStream::from_bytes(&s.to_bytes()).unwrap(), s);
        }
    }

    #[test]
    fn damaged_containers_are_rejected() {
        let good = sample(vec![true; 13]).to_bytes();
        assert!(SealedStream::from_bytes(&good[..good.len() - 1]).is_err());
        assert!(SealedStream::from_bytes(&good[..40]).is_err());
        let mut extra = good.clone();
        extra.push(0);
        assert!(SealedStream::from_bytes(&extra).is_err());
        let mut magic = good.clone();
        magic[0] = b'X';
        assert!(SealedStream::from_bytes(&magic).is_err());
        let mut pad = good.clone();
        *pad.last_mut().unwrap() |= 1;
        assert!(SealedStream::from_bytes(&pad).is_err());
        let mut flags = good;
        flags[7] = 0x80;
        assert!(SealedStream::from_bytes(&flags).is_err());
    }
}
