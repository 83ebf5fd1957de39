//! Acceptance run: prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails.

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use vvcse::bincodes::BinKind;
use vvcse::cli_io::{
    decode_only, encode_payload, generate, replacement_stream, run_oracle, seal_stream, unseal_stream, GenConfig,
    Magnitude, ModeChoice, OracleConfig,
};
use vvcse::coeffmodel::{decode_subblock, encode_subblock, pass1_bin_budget, CodingMode, CodingTables, SubBlock};
use vvcse::crypto::{
    decrypt_subblock, encrypt_subblock, replace_encryptable_with_zero, Aes128Ctr, BlockSource, Key, KeystreamState,
    Nonce, RuleParams, SealedBlock,
};
use vvcse::metrics::{edr, eq_max, npcr, uaci, FrameBuffer, DEFAULT_TAU};

const LOG2: u32 = 15;
const BLOCKS_PER_MODE: usize = 10_000;
const MAX_ABS: u32 = 1 << 10;
const ROUND_TRIP_LIMIT: Duration = Duration::from_secs(60);
const ORACLE_LIMIT: Duration = Duration::from_secs(600);
const ORACLE_BLOCKS: usize = 10_000;
const UACI_TOL: f64 = 0.001;
const KEY_SENS_TOL: f64 = 0.05;
const KEY_SENS_MIN_BITS: usize = 100_000;

const KEY: &str = "000102030405060708090a0b0c0d0e0f";
const NONCE: &str = "f0f1f2f3f4f5f6f7f8f9fafbfcfdfeff";

struct Outcome {
    results: Vec<(u32, bool)>,
}

impl Outcome {
    fn report(&mut self, id: u32, name: &str, pass: bool, detail: String) {
        println!("{} {id} {name}: {detail}", if pass { "PASS" } else { "FAIL" });
        self.results.push((id, pass));
    }
}

/// `BLOCKS_PER_MODE` blocks of one mode cycling 4x4, 2x8, 8x2: half with
/// uniform magnitudes up to 2^10, half concentrated on small levels.
fn corpus(mode: ModeChoice, seed: u64, tables: &CodingTables) -> Vec<SubBlock> {
    let mut out = Vec::with_capacity(BLOCKS_PER_MODE);
    for (i, magnitude) in [Magnitude::Uniform { max_abs: MAX_ABS }, Magnitude::Geometric { mean: 6.0, max_abs: MAX_ABS }]
        .into_iter()
        .enumerate()
    {
        let cfg = GenConfig {
            seed: seed + i as u64,
            count: BLOCKS_PER_MODE / 2,
            sizes: vec![(4, 4), (2, 8), (8, 2)],
            mode,
            magnitude,
            zero_prob: 0.3,
            aux_count: 0,
            log2_tr_range: LOG2,
        };
        out.extend(generate(&cfg, tables).expect("corpus generation").blocks);
    }
    out
}

fn keystream(key: &Key) -> KeystreamState {
    KeystreamState::new(key, &NONCE.parse().unwrap())
}

fn decrypt_mismatches<S: BlockSource>(tables: &CodingTables, blocks: &[SubBlock], sealed: &[SealedBlock], ks: &mut KeystreamState<S>) -> usize {
    blocks
        .iter()
        .zip(sealed)
        .filter(|(b, s)| {
            decrypt_subblock(&s.bins, b.width(), b.height(), b.mode(), tables, LOG2, ks).map_or(true, |d| d != **b)
        })
        .count()
}

fn main() -> ExitCode {
    let tables = CodingTables::vtm_default();
    let key: Key = KEY.parse().unwrap();
    let mut out = Outcome { results: Vec::new() };

    let mut blocks = corpus(ModeChoice::Tc, 100, &tables);
    blocks.extend(corpus(ModeChoice::Ts, 200, &tables));

    // 1. Round trip.
    let t0 = Instant::now();
    let mut codec_mismatch = 0;
    let mut plain = Vec::with_capacity(blocks.len());
    for b in &blocks {
        let enc = encode_subblock(b, &tables, LOG2).expect("in range");
        match decode_subblock(&enc.bins, b.width(), b.height(), b.mode(), &tables, LOG2) {
            Ok(d) if d.block == *b && d.end == enc.bins.len() => {}
            _ => codec_mismatch += 1,
        }
        plain.push(enc);
    }
    let mut enc_ks = keystream(&key);
    let sealed: Vec<SealedBlock> = blocks.iter().map(|b| encrypt_subblock(b, &tables, LOG2, &mut enc_ks).expect("encrypts")).collect();
    let crypt_mismatch = decrypt_mismatches(&tables, &blocks, &sealed, &mut keystream(&key));
    let stream = {
        let mut s = vvcse::cli_io::CoefficientStream::new(LOG2, &tables);
        s.blocks = blocks.clone();
        s
    };
    let nonce: Nonce = NONCE.parse().unwrap();
    let (sealed_stream, _) = seal_stream(&stream, &tables, &key, &nonce).expect("stream seals");
    let stream_ok = unseal_stream(&sealed_stream, &tables, &key).is_ok_and(|s| s == stream);
    let elapsed = t0.elapsed();
    out.report(
        1,
        "round trip",
        codec_mismatch == 0 && crypt_mismatch == 0 && stream_ok && elapsed < ROUND_TRIP_LIMIT,
        format!(
            "{} blocks (TC {BLOCKS_PER_MODE}, TS {BLOCKS_PER_MODE}), codec mismatches {codec_mismatch}, \
             decrypt mismatches {crypt_mismatch}, stream round trip {stream_ok}, {:.2?} (limit {:?})",
            blocks.len(),
            elapsed,
            ROUND_TRIP_LIMIT
        ),
    );

    // 2. Constant bitrate.
    let length_mismatch = plain.iter().zip(&sealed).filter(|(p, s)| p.bins.len() != s.bins.len()).count();
    let stream_len_ok = sealed_stream.bits.len() == encode_payload(&stream, &tables).unwrap().len();
    let encrypted_bits: usize = sealed.iter().map(|s| s.bins.count_kind(BinKind::BypassEncryptable)).sum();
    let total_bits: usize = plain.iter().map(|p| p.bins.len()).sum();
    out.report(
        2,
        "constant bitrate",
        length_mismatch == 0 && stream_len_ok,
        format!(
            "{length_mismatch} of {} blocks change length, stream length equal {stream_len_ok}, \
             {encrypted_bits} of {total_bits} bits encrypted ({:.2}%)",
            blocks.len(),
            100.0 * encrypted_bits as f64 / total_bits as f64
        ),
    );

    // 3. Format compliance.
    let mut decode_fail = 0;
    let mut reencode_fail = 0;
    let mut annotation_fail = 0;
    for ((b, s), p) in blocks.iter().zip(&sealed).zip(&plain) {
        match decode_subblock(&s.bins, b.width(), b.height(), b.mode(), &tables, LOG2) {
            Ok(d) if d.block.check_range(LOG2).is_ok() && d.end == s.bins.len() => {
                if encode_subblock(&d.block, &tables, LOG2).map_or(true, |e| e.bins.bits() != s.bins.bits()) {
                    reencode_fail += 1;
                }
                if d.annotation != p.annotation || s.bins.bypass_layout() != p.bins.bypass_layout() {
                    annotation_fail += 1;
                }
            }
            _ => decode_fail += 1,
        }
    }
    let stream_keyless = decode_only(&sealed_stream, &tables)
        .is_ok_and(|k| encode_payload(&k, &tables).is_ok_and(|e| e.bits() == &sealed_stream.bits[..]));
    out.report(
        3,
        "format compliance",
        decode_fail == 0 && reencode_fail == 0 && annotation_fail == 0 && stream_keyless,
        format!(
            "keyless decode failures {decode_fail}, re-encode mismatches {reencode_fail}, \
             layout/annotation changes {annotation_fail}, stream-level keyless re-encode {stream_keyless}"
        ),
    );

    // 4. Brute-force oracle and its mutation check.
    let t0 = Instant::now();
    let tables_ref = &tables;
    let oracle = |mode: CodingMode, offset: i64| {
        let cfg = OracleConfig {
            blocks: ORACLE_BLOCKS,
            mode: Some(mode),
            rules: RuleParams { pass2_1_offset: offset },
            ..OracleConfig::default()
        };
        run_oracle(&cfg, tables_ref)
    };
    let tc = oracle(CodingMode::Transform, 20);
    let ts = oracle(CodingMode::TransformSkip, 20);
    let mutant = oracle(CodingMode::Transform, 19);
    let elapsed = t0.elapsed();
    let clean = tc.violations + ts.violations + tc.decision_drift + ts.decision_drift;
    out.report(
        4,
        "brute-force oracle",
        clean == 0 && mutant.violations >= 1 && elapsed < ORACLE_LIMIT,
        format!(
            "4x4 |C|<=32, {ORACLE_BLOCKS} TC + {ORACLE_BLOCKS} TS blocks, {} substitutions over {} encryptable bits, \
             violations {} (decision drift {}); offset-19 mutant: {} violations; {:.2?} (limit {:?})",
            tc.substitutions + ts.substitutions,
            tc.encryptable_bits + ts.encryptable_bits,
            tc.violations + ts.violations,
            tc.decision_drift + ts.decision_drift,
            mutant.violations,
            elapsed,
            ORACLE_LIMIT
        ),
    );

    // 5. Keystream vectors and synchronization.
    let vectors = [
        ("6bc1bee22e409f96e93d7e117393172a", "874d6191b620e3261bef6864990db6ce"),
        ("ae2d8a571e03ac9c9eb76fac45af8e51", "9806f66b7970fdff8617187bb9fffdff"),
        ("30c81c46a35ce411e5fbc1191a0a52ef", "5ae4df3edbd5d35e5b4f09020db03eab"),
        ("f69f2445df4f9b17ad2b417be66c3710", "1e031dda2fbe03d1792170a0f3009cee"),
    ];
    let nist_key: Key = "2b7e151628aed2a6abf7158809cf4f3c".parse().unwrap();
    let nist_ctr: Nonce = "f0f1f2f3f4f5f6f7f8f9fafbfcfdfeff".parse().unwrap();
    let mut ctr = Aes128Ctr::new(&nist_key, &nist_ctr);
    let mut pool = KeystreamState::new(&nist_key, &nist_ctr);
    let mut vector_ok = 0;
    for (p, c) in vectors {
        let block = ctr.next_block().unwrap();
        let bits = pool.sample(128).unwrap();
        let packed: Vec<u8> = bits.chunks(8).map(|b| b.iter().fold(0u8, |a, &x| a << 1 | u8::from(x))).collect();
        let ct: Vec<u8> = hex::decode(p).unwrap().iter().zip(block).map(|(a, b)| a ^ b).collect();
        if hex::encode(&ct) == c && packed == block {
            vector_ok += 1;
        }
    }
    let mut skipped = keystream(&key);
    skipped.sample(1).unwrap();
    let desync = decrypt_mismatches(&tables, &blocks, &sealed, &mut skipped);
    out.report(
        5,
        "keystream",
        vector_ok == 4 && desync > 0,
        format!("{vector_ok}/4 CTR-AES128 vectors bit-exact; one skipped sample breaks {desync} of {} round trips", blocks.len()),
    );

    // 6. Metric formulas.
    let z = FrameBuffer::filled(64, 64, 8, 0).unwrap();
    let w = FrameBuffer::filled(64, 64, 8, 255).unwrap();
    let u = uaci(&z, &w).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut edr_ok = true;
    for _ in 0..50 {
        let d = if rng.gen_bool(0.5) { 8 } else { 10 };
        let a = FrameBuffer::new(32, 32, d, (0..1024).map(|_| rng.gen_range(0..1u16 << d)).collect()).unwrap();
        let b = FrameBuffer::new(32, 32, d, (0..1024).map(|_| rng.gen_range(0..1u16 << d)).collect()).unwrap();
        let e = edr(&a, &b, DEFAULT_TAU).unwrap();
        edr_ok &= (0.0..=1.0).contains(&e) && edr(&a, &a, DEFAULT_TAU).unwrap() == 0.0;
    }
    let mut dot_a = z.clone();
    dot_a.set(5, 5, 255);
    let mut dot_b = z.clone();
    dot_b.set(50, 50, 255);
    edr_ok &= edr(&z, &z, DEFAULT_TAU).unwrap() == 0.0 && edr(&dot_a, &dot_b, DEFAULT_TAU).unwrap() == 1.0;
    let checks = [
        eq_max(3840, 2160, 10) == 16200.0,
        eq_max(1920, 1080, 10) == 4050.0,
        npcr(&z, &z).unwrap() == 0.0,
        npcr(&z, &w).unwrap() == 100.0,
        (u - 25500.0 / 256.0).abs() <= UACI_TOL,
        edr_ok,
    ];
    out.report(
        6,
        "metric formulas",
        checks.iter().all(|&c| c),
        format!(
            "eq_max 4K10 = {} , 1080p10 = {}, NPCR same/different = {}/{}, UACI 0 vs 255 = {u:.6} (target {:.6} +- {UACI_TOL}), EDR bounds ok {edr_ok}",
            eq_max(3840, 2160, 10),
            eq_max(1920, 1080, 10),
            npcr(&z, &z).unwrap(),
            npcr(&z, &w).unwrap(),
            25500.0 / 256.0
        ),
    );

    // 7. Replacement attack.
    let mut repl_fail = 0;
    let mut zeroed_bits = 0;
    for (b, p) in blocks.iter().zip(&plain) {
        let ok = replace_encryptable_with_zero(b, &tables, LOG2).is_ok_and(|r| {
            zeroed_bits += r.bins.count_kind(BinKind::BypassEncryptable);
            r.bins.len() == p.bins.len()
                && r.bins.encryptable_indices().all(|i| !r.bins.bits()[i])
                && decode_subblock(&r.bins, b.width(), b.height(), b.mode(), &tables, LOG2).is_ok_and(|d| {
                    d.block.check_range(LOG2).is_ok()
                        && encode_subblock(&d.block, &tables, LOG2).is_ok_and(|e| e.bins.bits() == r.bins.bits())
                })
        });
        if !ok {
            repl_fail += 1;
        }
    }
    let mut with_aux = stream.clone();
    with_aux.aux = generate(&GenConfig { count: 0, aux_count: 2000, ..GenConfig::default() }, &tables).unwrap().aux;
    let stream_repl = replacement_stream(&with_aux, &tables).is_ok_and(|(s, _)| {
        s.bits.len() == encode_payload(&with_aux, &tables).unwrap().len()
            && decode_only(&s, &tables).is_ok_and(|k| encode_payload(&k, &tables).is_ok_and(|e| e.bits() == &s.bits[..]))
    });
    out.report(
        7,
        "replacement attack",
        repl_fail == 0 && stream_repl,
        format!(
            "{zeroed_bits} bins zeroed over {} blocks, failures {repl_fail}; stream with 2000 elements decodes at constant length {stream_repl}",
            blocks.len()
        ),
    );

    // 8. Key sensitivity.
    let mut flipped = key;
    flipped.0[15] ^= 1;
    let mut ks_b = keystream(&flipped);
    let mut union = 0usize;
    let mut differing = 0usize;
    let mut outside = 0usize;
    for (b, sa) in blocks.iter().zip(&sealed) {
        let sb = encrypt_subblock(b, &tables, LOG2, &mut ks_b).unwrap();
        let regions: BTreeSet<usize> = sa.bins.encryptable_indices().chain(sb.bins.encryptable_indices()).collect();
        union += regions.len();
        for (i, (x, y)) in sa.bins.bits().iter().zip(sb.bins.bits()).enumerate() {
            if x != y {
                if regions.contains(&i) {
                    differing += 1;
                } else {
                    outside += 1;
                }
            }
        }
    }
    let frac = differing as f64 / union.max(1) as f64;
    out.report(
        8,
        "key sensitivity",
        outside == 0 && union >= KEY_SENS_MIN_BITS && (frac - 0.5).abs() <= KEY_SENS_TOL,
        format!(
            "one key bit flipped: {differing} of {union} encryptable bits differ ({:.2}%, target 50 +- {}), {outside} differences outside encryptable regions",
            100.0 * frac,
            100.0 * KEY_SENS_TOL
        ),
    );

    // 9. Pass-1 budget.
    let formula = 16 * 7 / 4;
    let over_plain = plain
        .iter()
        .zip(&blocks)
        .filter(|(p, b)| p.annotation.context_bins > pass1_bin_budget(b.width(), b.height()))
        .count();
    let over_sealed = sealed
        .iter()
        .zip(&blocks)
        .filter(|(s, b)| s.bins.count_kind(BinKind::Context) > pass1_bin_budget(b.width(), b.height()))
        .count();
    let max_4x4 = plain
        .iter()
        .zip(&blocks)
        .filter(|(_, b)| (b.width(), b.height()) == (4, 4))
        .map(|(p, _)| p.annotation.context_bins)
        .max()
        .unwrap_or(0);
    out.report(
        9,
        "pass-1 budget",
        pass1_bin_budget(4, 4) == formula && formula == 28 && over_plain == 0 && over_sealed == 0,
        format!(
            "budget(4x4) = {} = floor(16*7/4) = {formula}; largest 4x4 context-bin count {max_4x4}; \
             blocks over budget: plain {over_plain}, encrypted {over_sealed}",
            pass1_bin_budget(4, 4)
        ),
    );

    let failed: Vec<u32> = out.results.iter().filter(|(_, p)| !p).map(|(i, _)| *i).collect();
    if failed.is_empty() {
        println!("acceptance: all {} criteria PASS", out.results.len());
        ExitCode::SUCCESS
    } else {
        println!("acceptance: FAIL {failed:?}");
        ExitCode::FAILURE
    }
}
