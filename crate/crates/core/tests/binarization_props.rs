use proptest::prelude::*;
use vvcse::bincodes::remainder::MAX_CODEWORD_LEN;
use vvcse::bincodes::{remainder_len, BinKind, BinString, Code, RemainderParams};

fn code_and_value() -> impl Strategy<Value = (Code, u64)> {
    prop_oneof![
        // The decoder refuses unary runs longer than 64.
        (0u64..=64).prop_map(|v| (Code::Unary, v)),
        (0u64..60).prop_flat_map(|c| (Just(Code::TruncatedUnary { c_max: c }), 0..=c)),
        (0u64..5000).prop_flat_map(|c| (Just(Code::FixedLength { c_max: c }), 0..=c)),
        (0u64..5000).prop_flat_map(|c| (Just(Code::TruncatedBinary { c_max: c }), 0..=c)),
        (0u32..4, 0u64..8).prop_flat_map(|(p, c)| (Just(Code::TruncatedRice { p, prefix_c_max: c }), 0..((c + 1) << p))),
        (0u32..5, 0u64..1_000_000).prop_map(|(k, v)| (Code::ExpGolomb { k }, v)),
        (0u32..4, 0u64..(1 << 15)).prop_map(|(r, v)| (Code::Remainder(RemainderParams::new(r, 15).unwrap()), v)),
    ]
}

proptest! {
    #[test]
    fn decode_inverts_encode((code, v) in code_and_value()) {
        let bins = code.encode(v).unwrap();
        prop_assert_eq!(code.decode(bins.bits()), Ok((v, bins.len())));
        prop_assert_eq!(bins.count_kind(BinKind::Context), 0);
    }

    // Decoding stops exactly at the codeword end whatever follows it.
    #[test]
    fn codewords_are_prefix_free((code, v) in code_and_value(), tail in prop::collection::vec(any::<bool>(), 0..40)) {
        let mut bits = code.encode(v).unwrap().bits().to_vec();
        let n = bits.len();
        bits.extend(tail);
        prop_assert_eq!(code.decode(&bits), Ok((v, n)));
    }

    #[test]
    fn lengths_never_shrink_with_value(rice in 0u32..4, v in 0u64..(1 << 15) - 1, k in 0u32..4) {
        let p = RemainderParams::new(rice, 15).unwrap();
        prop_assert!(remainder_len(v, p).unwrap() <= remainder_len(v + 1, p).unwrap());
        let eg = Code::ExpGolomb { k };
        prop_assert!(eg.encode(v).unwrap().len() <= eg.encode(v + 1).unwrap().len());
        prop_assert!(Code::Unary.encode(v % 300).unwrap().len() < Code::Unary.encode(v % 300 + 1).unwrap().len());
    }

    // Below the threshold the codeword is truncated Rice; at and above it the
    // escape starts with BinReduc ones.
    #[test]
    fn threshold_selects_the_path(rice in 0u32..4, v in 0u64..2000) {
        let p = RemainderParams::new(rice, 15).unwrap();
        let bins = Code::Remainder(p).encode(v).unwrap();
        let ones = bins.bits().iter().take_while(|&&b| b).count();
        if v < p.threshold() {
            let trp = Code::TruncatedRice { p: rice, prefix_c_max: 5 }.encode(v).unwrap();
            prop_assert_eq!(bins.bits(), trp.bits());
            prop_assert!(ones < 5);
        } else {
            prop_assert!(ones >= 5);
        }
    }

    #[test]
    fn remainder_codewords_fit_32_bins(rice in 0u32..4, log2 in 6u32..=20, frac in 0.0f64..1.0) {
        let p = RemainderParams::new(rice, log2).unwrap();
        let rem = ((1u64 << log2) as f64 * frac) as u64;
        let bins = Code::Remainder(p).encode(rem).unwrap();
        prop_assert!(bins.len() <= MAX_CODEWORD_LEN as usize);
        prop_assert_eq!(bins.len(), remainder_len(rem, p).unwrap());
    }

    #[test]
    fn packing_round_trips(bits in prop::collection::vec(any::<bool>(), 0..200)) {
        let s = BinString::from_bits(bits.clone(), BinKind::BypassClear);
        prop_assert_eq!(vvcse::bincodes::unpack_bits(&s.to_bytes(), bits.len()), bits);
    }
}

#[test]
fn saturated_escape_is_exactly_32_bins() {
    for rice in 0..4 {
        let p = RemainderParams::new(rice, 15).unwrap();
        let top = (1u64 << 15) - 1;
        assert!(remainder_len(top, p).unwrap() <= 32);
    }
}
