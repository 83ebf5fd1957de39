//! Counter-mode keystream with per-sample accounting.

use std::fmt;
use std::str::FromStr;

use aes::cipher::{BlockEncrypt, KeyInit};
use aes::Aes128;

use super::CryptoError;

/// Size in bytes of keys, nonces and cipher blocks.
pub const BLOCK_BYTES: usize = 16;

fn parse_hex16(s: &str, what: &'static str) -> Result<[u8; BLOCK_BYTES], CryptoError> {
    let s = s.trim();
    if s.len() != 2 * BLOCK_BYTES {
        return Err(CryptoError::HexLength { what, found: s.len() });
    }
    let mut out = [0u8; BLOCK_BYTES];
    hex::decode_to_slice(s, &mut out).map_err(|_| CryptoError::HexDigits { what })?;
    Ok(out)
}

/// 128-bit secret key.
#[derive(Clone, Copy, PartialEq, Eq)]
pub struct Key(pub [u8; BLOCK_BYTES]);

/// Initial 128-bit counter block.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Nonce(pub [u8; BLOCK_BYTES]);

impl fmt::Debug for Key {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Key(..)")
    }
}

impl FromStr for Key {
    type Err = CryptoError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_hex16(s, "key").map(Key)
    }
}

impl FromStr for Nonce {
    type Err = CryptoError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_hex16(s, "nonce").map(Nonce)
    }
}

impl fmt::Display for Nonce {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&hex::encode(self.0))
    }
}

/// Anything able to emit 16-byte keystream blocks in sequence.
pub trait BlockSource {
    fn next_block(&mut self) -> Result<[u8; BLOCK_BYTES], CryptoError>;
}

/// AES-128 in counter mode. The nonce is the first counter block; its low
/// 64 bits are incremented (mod 2^64) per block and the generator refuses
/// to run past 2^64 blocks rather than reuse a counter value.
pub struct Aes128Ctr {
    cipher: Aes128,
    counter: [u8; BLOCK_BYTES],
    produced: u128,
}

impl Aes128Ctr {
    pub const MAX_BLOCKS: u128 = 1 << 64;

    pub fn new(key: &Key, nonce: &Nonce) -> Self {
        Self {
            cipher: Aes128::new(&key.0.into()),
            counter: nonce.0,
            produced: 0,
        }
    }

    pub fn blocks_produced(&self) -> u128 {
        self.produced
    }

    #[cfg(test)]
    pub(crate) fn set_produced(&mut self, n: u128) {
        self.produced = n;
    }
}

impl BlockSource for Aes128Ctr {
    fn next_block(&mut self) -> Result<[u8; BLOCK_BYTES], CryptoError> {
        if self.produced >= Self::MAX_BLOCKS {
            return Err(CryptoError::CounterExhausted);
        }
        let mut block = self.counter.into();
        self.cipher.encrypt_block(&mut block);
        let low = u64::from_be_bytes(self.counter[8..].try_into().expect("8 bytes"));
        self.counter[8..].copy_from_slice(&low.wrapping_add(1).to_be_bytes());
        self.produced += 1;
        Ok(block.into())
    }
}

/// Keystream bit pool over a [`BlockSource`]. Bits leave the pool in
/// generation order, most significant bit of each byte first.
pub struct KeystreamState<S: BlockSource = Aes128Ctr> {
    source: S,
    block: [u8; BLOCK_BYTES],
    /// Next unread bit of `block`; `BLOCK_BYTES * 8` when empty.
    bit: usize,
    consumed_samples: u64,
    consumed_bits: u64,
}

impl KeystreamState<Aes128Ctr> {
    pub fn new(key: &Key, nonce: &Nonce) -> Self {
        Self::with_source(Aes128Ctr::new(key, nonce))
    }
}

impl<S: BlockSource> KeystreamState<S> {
    pub fn with_source(source: S) -> Self {
        Self {
            source,
            block: [0; BLOCK_BYTES],
            bit: BLOCK_BYTES * 8,
            consumed_samples: 0,
            consumed_bits: 0,
        }
    }

    pub fn source(&self) -> &S {
        &self.source
    }

    pub fn consumed_samples(&self) -> u64 {
        self.consumed_samples
    }

    pub fn consumed_bits(&self) -> u64 {
        self.consumed_bits
    }

    fn next_bit(&mut self) -> Result<bool, CryptoError> {
        if self.bit == BLOCK_BYTES * 8 {
            self.block = self.source.next_block()?;
            self.bit = 0;
        }
        let b = self.block[self.bit / 8] >> (7 - self.bit % 8) & 1 == 1;
        self.bit += 1;
        Ok(b)
    }

    /// Draws one sample of `nbits` bits. A zero-width sample draws nothing
    /// but still counts as a sample.
    pub fn sample(&mut self, nbits: u32) -> Result<Vec<bool>, CryptoError> {
        let bits = (0..nbits).map(|_| self.next_bit()).collect::<Result<Vec<_>, _>>()?;
        self.consumed_samples += 1;
        self.consumed_bits += u64::from(nbits);
        Ok(bits)
    }

    /// Same as [`Self::sample`], packed MSB-first into an integer.
    pub fn sample_value(&mut self, nbits: u32) -> Result<u64, CryptoError> {
        debug_assert!(nbits <= 64);
        Ok(self.sample(nbits)?.into_iter().fold(0, |acc, b| acc << 1 | u64::from(b)))
    }
}

/// Free-function form of [`KeystreamState::sample`].
pub fn keystream_sample<S: BlockSource>(state: &mut KeystreamState<S>, nbits: u32) -> Result<Vec<bool>, CryptoError> {
    state.sample(nbits)
}
