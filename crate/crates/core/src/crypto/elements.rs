//! Stand-alone bypass syntax elements outside the residual path.

use serde::{Deserialize, Serialize};

use super::cipher::RegionSource;
use super::keystream::{BlockSource, KeystreamState};
use super::CryptoError;
use crate::bincodes::codes::{read_egk, read_fl};
use crate::bincodes::{encode_egk, encode_fl, fl_len, BinCursor, BinKind, BinString, DecodeError};

/// Encryptable element kinds and their binarizations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AuxKind {
    MvdSignFlag,
    /// EG1; only the suffix is encrypted.
    AbsMvdMinus2,
    /// TB with cMax 15, which is a 4-bin fixed-length code.
    AlfLumaFixedFilterIdx,
    MmvdDirectionIdx,
    MergeTriangleSplitDir,
    SaoOffsetSign,
    SaoBandPosition,
    SaoEoClass,
    IntraChromaPredCand,
}

/// What part of a codeword is encrypted.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WidthPolicy {
    /// The whole fixed-length codeword.
    Full,
    /// The exp-Golomb suffix only.
    EgkSuffix,
}

/// Binarization of an element.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "binarization", rename_all = "snake_case")]
pub enum AuxCode {
    Fl { c_max: u64 },
    Egk { k: u32 },
}

impl AuxKind {
    pub const ALL: [AuxKind; 9] = [
        AuxKind::MvdSignFlag,
        AuxKind::AbsMvdMinus2,
        AuxKind::AlfLumaFixedFilterIdx,
        AuxKind::MmvdDirectionIdx,
        AuxKind::MergeTriangleSplitDir,
        AuxKind::SaoOffsetSign,
        AuxKind::SaoBandPosition,
        AuxKind::SaoEoClass,
        AuxKind::IntraChromaPredCand,
    ];

    pub fn code(self) -> AuxCode {
        match self {
            AuxKind::AbsMvdMinus2 => AuxCode::Egk { k: 1 },
            AuxKind::MvdSignFlag | AuxKind::MergeTriangleSplitDir | AuxKind::SaoOffsetSign => AuxCode::Fl { c_max: 1 },
            AuxKind::AlfLumaFixedFilterIdx => AuxCode::Fl { c_max: 15 },
            AuxKind::SaoBandPosition => AuxCode::Fl { c_max: 31 },
            AuxKind::MmvdDirectionIdx | AuxKind::SaoEoClass | AuxKind::IntraChromaPredCand => AuxCode::Fl { c_max: 3 },
        }
    }

    pub fn policy(self) -> WidthPolicy {
        match self.code() {
            AuxCode::Fl { .. } => WidthPolicy::Full,
            AuxCode::Egk { .. } => WidthPolicy::EgkSuffix,
        }
    }

    pub fn source(self) -> RegionSource {
        match self.policy() {
            WidthPolicy::Full => RegionSource::FlElement,
            WidthPolicy::EgkSuffix => RegionSource::EgkSuffixMvd,
        }
    }

    /// Four-bit tag used in the payload syntax.
    pub fn tag(self) -> u8 {
        Self::ALL.iter().position(|&k| k == self).expect("listed") as u8
    }

    pub fn from_tag(tag: u8) -> Option<Self> {
        Self::ALL.get(usize::from(tag)).copied()
    }
}

impl AuxCode {
    /// Bypass codeword of `value`. Fixed-length codes only qualify when
    /// `cMax + 1` is a power of two, so every bit pattern is a legal value.
    pub fn encode(self, value: u64) -> Result<BinString, CryptoError> {
        let bins = match self {
            AuxCode::Fl { c_max } => {
                if !(c_max + 1).is_power_of_two() {
                    return Err(CryptoError::NotClosed { c_max });
                }
                encode_fl(value, c_max)?
            }
            AuxCode::Egk { k } => encode_egk(value, k),
        };
        Ok(bins)
    }

    pub fn read(self, c: &mut BinCursor<'_>) -> Result<u64, DecodeError> {
        match self {
            AuxCode::Fl { c_max } => read_fl(c, c_max),
            AuxCode::Egk { k } => read_egk(c, k),
        }
    }

    /// `(offset, len)` of the encryptable part of `bins`.
    pub fn encryptable_span(self, bins: &BinString) -> (usize, usize) {
        match self {
            AuxCode::Fl { c_max } => (0, fl_len(c_max) as usize),
            AuxCode::Egk { k } => {
                let l = bins.bits().iter().take_while(|&&b| b).count();
                (l + 1, k as usize + l)
            }
        }
    }
}

/// XORs the encryptable part of an element codeword with one keystream
/// sample of equal width and labels it encryptable. `bits` must be a
/// codeword of `code` made only of bypass bins.
pub fn encrypt_fl_element<S: BlockSource>(bits: &BinString, code: AuxCode, ks: &mut KeystreamState<S>) -> Result<BinString, CryptoError> {
    if bits.count_kind(BinKind::Context) != 0 {
        return Err(CryptoError::ContextBins);
    }
    let (start, len) = code.encryptable_span(bits);
    if start + len > bits.len() {
        return Err(CryptoError::Codec(crate::coeffmodel::CoeffError::Decode(DecodeError::Truncated { offset: bits.len() })));
    }
    let sample = ks.sample(len as u32)?;
    let mut out = bits.clone();
    for (i, b) in sample.into_iter().enumerate() {
        out.xor_bit(start + i, b);
    }
    out.mark_encryptable(start, len);
    Ok(out)
}

/// Replacement attack on one element: the encryptable part is set to zero.
pub fn zero_fl_element(bits: &BinString, code: AuxCode) -> Result<BinString, CryptoError> {
    if bits.count_kind(BinKind::Context) != 0 {
        return Err(CryptoError::ContextBins);
    }
    let (start, len) = code.encryptable_span(bits);
    let mut out = bits.clone();
    for i in start..start + len {
        out.set_bit(i, false);
    }
    out.mark_encryptable(start, len);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crypto::keystream::{Key, Nonce};

    struct Zero;
    impl BlockSource for Zero {
        fn next_block(&mut self) -> Result<[u8; 16], CryptoError> {
            Ok([0; 16])
        }
    }
    struct Ones;
    impl BlockSource for Ones {
        fn next_block(&mut self) -> Result<[u8; 16], CryptoError> {
            Ok([0xff; 16])
        }
    }

    #[test]
    fn sign_flag_flips() {
        let code = AuxKind::MvdSignFlag.code();
        let out = encrypt_fl_element(&code.encode(0).unwrap(), code, &mut KeystreamState::with_source(Ones)).unwrap();
        assert_eq!(out.to_string(), "1");
        assert_eq!(out.kind_at(0), Some(BinKind::BypassEncryptable));
    }

    #[test]
    fn zero_keystream_is_identity() {
        for kind in AuxKind::ALL {
            let code = kind.code();
            let v = match code {
                AuxCode::Fl { c_max } => c_max.min(3),
                AuxCode::Egk { .. } => 3,
            };
            let bins = code.encode(v).unwrap();
            let out = encrypt_fl_element(&bins, code, &mut KeystreamState::with_source(Zero)).unwrap();
            assert_eq!(out.bits(), bins.bits());
        }
    }

    #[test]
    fn mmvd_direction_outputs_are_all_legal() {
        let code = AuxKind::MmvdDirectionIdx.code();
        let key: Key = "2b7e151628aed2a6abf7158809cf4f3c".parse().unwrap();
        let nonce: Nonce = "00000000000000000000000000000000".parse().unwrap();
        let mut ks = KeystreamState::new(&key, &nonce);
        let mut seen = [false; 4];
        for _ in 0..64 {
            for v in 0..4 {
                let out = encrypt_fl_element(&code.encode(v).unwrap(), code, &mut ks).unwrap();
                assert_eq!(out.len(), 2);
                let d = code.read(&mut out.cursor()).unwrap();
                seen[d as usize] = true;
            }
        }
        assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn mvd_magnitude_keeps_its_prefix() {
        let code = AuxKind::AbsMvdMinus2.code();
        for v in [0u64, 1, 2, 5, 17, 300] {
            let bins = code.encode(v).unwrap();
            let out = encrypt_fl_element(&bins, code, &mut KeystreamState::with_source(Ones)).unwrap();
            assert_eq!(out.len(), bins.len());
            let (start, len) = code.encryptable_span(&bins);
            assert_eq!(&out.bits()[..start], &bins.bits()[..start]);
            assert_eq!(out.count_kind(BinKind::BypassEncryptable), len);
            let d = code.read(&mut out.cursor()).unwrap();
            assert_eq!(code.encode(d).unwrap().len(), bins.len());
        }
    }

    #[test]
    fn non_closed_fl_and_context_bins_are_refused() {
        assert!(matches!(AuxCode::Fl { c_max: 4 }.encode(1), Err(CryptoError::NotClosed { c_max: 4 })));
        let ctx = BinString::from_bits(vec![true], BinKind::Context);
        let r = encrypt_fl_element(&ctx, AuxKind::SaoOffsetSign.code(), &mut KeystreamState::with_source(Zero));
        assert!(matches!(r, Err(CryptoError::ContextBins)));
    }

    #[test]
    fn zeroed_elements_still_parse() {
        for kind in AuxKind::ALL {
            let code = kind.code();
            let bins = code.encode(1).unwrap();
            let z = zero_fl_element(&bins, code).unwrap();
            assert_eq!(z.len(), bins.len());
            assert!(z.encryptable_indices().all(|i| !z.bits()[i]));
            assert!(code.read(&mut z.cursor()).is_ok());
        }
    }

    #[test]
    fn tags_round_trip() {
        for k in AuxKind::ALL {
            assert_eq!(AuxKind::from_tag(k.tag()), Some(k));
        }
        assert_eq!(AuxKind::from_tag(15), None);
    }
}
