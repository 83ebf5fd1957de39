//! Encryptable-bin detection, keystream, and the block cipher layer.

pub mod cipher;
pub mod elements;
pub mod encryptable;
pub mod keystream;

pub use cipher::{
    decrypt_decoded, decrypt_subblock, encrypt_subblock, encrypt_subblock_with, replace_encryptable_with_zero,
    EncryptionRegion, EncryptionRegionMap, RegionSource, SealedBlock,
};
pub use elements::{encrypt_fl_element, zero_fl_element, AuxCode, AuxKind, WidthPolicy};
pub use encryptable::{
    check_sum_change, compute_min_max, decide, is_encryptable, is_encryptable_ts, Blocked, CheckContext, Decision,
    MinMax, RemainderKind, RuleParams,
};
pub use keystream::{keystream_sample, Aes128Ctr, BlockSource, Key, KeystreamState, Nonce};

use thiserror::Error;

use crate::bincodes::CodeError;
use crate::coeffmodel::CoeffError;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CryptoError {
    #[error("{what} must be 32 hex digits, got {found} characters")]
    HexLength { what: &'static str, found: usize },
    #[error("{what} contains a non-hex character")]
    HexDigits { what: &'static str },
    #[error("keystream counter exhausted")]
    CounterExhausted,
    #[error("fixed-length code with cMax {c_max} is not closed under bit flips")]
    NotClosed { c_max: u64 },
    #[error("context-coded bins cannot be encrypted")]
    ContextBins,
    #[error(transparent)]
    Codec(#[from] CoeffError),
}

impl From<CodeError> for CryptoError {
    fn from(e: CodeError) -> Self {
        CryptoError::Codec(CoeffError::Code(e))
    }
}
