//! Brute-force check of the encryptable-bin detector.
//!
//! For every position the detector accepts, every admissible pattern is
//! substituted into its targeted suffix bits, the whole block is re-encoded
//! and compared against the original: bit length, the context/bypass
//! layout, and the full pass annotation (rice, V, state, parity per
//! position, cutoff and context-bin count) must all be unchanged. Sign bins
//! are flipped the same way. Positions the detector refuses are tallied by
//! the first condition that blocked them.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::coeffmodel::{annotate, decode_subblock, encode_subblock, CodingMode, CodingTables, EncodedSubBlock, SubBlock};
use crate::crypto::encryptable::target_mask;
use crate::crypto::{decide, replace_encryptable_with_zero, Blocked, CheckContext, RemainderKind, RuleParams};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PatternMode {
    /// All `2^n - 1` nonzero patterns.
    Exhaustive,
    /// Up to this many random nonzero patterns.
    Sampled(u32),
}

#[derive(Clone, Debug, PartialEq)]
pub struct OracleConfig {
    pub blocks: usize,
    pub seed: u64,
    pub width: usize,
    pub height: usize,
    /// `None` alternates TC and TS.
    pub mode: Option<CodingMode>,
    pub max_abs: i32,
    pub zero_prob: f64,
    pub log2_tr_range: u32,
    pub rules: RuleParams,
    pub patterns: PatternMode,
    pub replacement: bool,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            blocks: 10_000,
            seed: 1,
            width: 4,
            height: 4,
            mode: None,
            max_abs: 32,
            zero_prob: 0.3,
            log2_tr_range: 15,
            rules: RuleParams::default(),
            patterns: PatternMode::Exhaustive,
            replacement: false,
        }
    }
}

/// One detected violation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub block: usize,
    pub x: usize,
    pub y: usize,
    pub original: i32,
    pub substituted: i32,
    pub bits: u32,
    pub what: &'static str,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct OracleReport {
    pub blocks: usize,
    pub significant_positions: u64,
    pub encryptable_positions: u64,
    pub encryptable_bits: u64,
    pub substitutions: u64,
    pub violations: u64,
    /// The detector's own answer changed under substitution.
    pub decision_drift: u64,
    pub first_violations: Vec<Violation>,
    pub blocked_by: BTreeMap<String, u64>,
    pub replacement_checked: u64,
    pub replacement_failures: u64,
}

impl OracleReport {
    pub fn passed(&self) -> bool {
        self.violations == 0 && self.decision_drift == 0 && self.replacement_failures == 0
    }
}

const KEEP_VIOLATIONS: usize = 10;

fn random_block(rng: &mut ChaCha8Rng, cfg: &OracleConfig, mode: CodingMode) -> SubBlock {
    let coeffs = (0..cfg.width * cfg.height)
        .map(|_| {
            if rng.gen_bool(cfg.zero_prob) {
                0
            } else {
                let m = rng.gen_range(1..=cfg.max_abs);
                if rng.gen_bool(0.5) {
                    -m
                } else {
                    m
                }
            }
        })
        .collect();
    SubBlock::new(cfg.width, cfg.height, mode, coeffs).expect("valid oracle dimensions")
}

fn mismatch(reference: &EncodedSubBlock, candidate: &SubBlock, tables: &CodingTables, log2: u32) -> Option<&'static str> {
    let enc = match encode_subblock(candidate, tables, log2) {
        Ok(e) => e,
        Err(_) => return Some("re-encode failed"),
    };
    if enc.bins.len() != reference.bins.len() {
        return Some("bit length");
    }
    if enc.annotation.cutoff != reference.annotation.cutoff || enc.annotation.context_bins != reference.annotation.context_bins {
        return Some("pass-1 extent");
    }
    for (a, b) in enc.annotation.positions.iter().zip(&reference.annotation.positions) {
        if a.rice != b.rice {
            return Some("rice");
        }
        if a.v != b.v {
            return Some("V");
        }
        if a.state != b.state {
            return Some("state");
        }
        if a.parity != b.parity {
            return Some("parity");
        }
        if a.pass != b.pass {
            return Some("pass");
        }
    }
    if enc.bins.bypass_layout() != reference.bins.bypass_layout() {
        return Some("bin layout");
    }
    None
}

fn blocked_name(b: Blocked) -> String {
    serde_json::to_value(b).ok().and_then(|v| v.as_str().map(str::to_owned)).unwrap_or_else(|| format!("{b:?}"))
}

fn check_block(index: usize, block: &SubBlock, cfg: &OracleConfig, tables: &CodingTables, rng: &mut ChaCha8Rng, report: &mut OracleReport) {
    let log2 = cfg.log2_tr_range;
    let reference = encode_subblock(block, tables, log2).expect("oracle blocks are in range");
    let ann = annotate(block, tables);
    let ctx = CheckContext::new(block, tables, log2).with_rules(cfg.rules);
    let record = |report: &mut OracleReport, v: Violation| {
        report.violations += 1;
        if report.first_violations.len() < KEEP_VIOLATIONS {
            report.first_violations.push(v);
        }
    };
    for info in &ann.positions {
        let value = block.get(info.x, info.y);
        if value == 0 {
            continue;
        }
        report.significant_positions += 1;

        let mut flipped = block.clone();
        flipped.set(info.x, info.y, -value);
        if let Some(what) = mismatch(&reference, &flipped, tables, log2) {
            record(report, Violation { block: index, x: info.x, y: info.y, original: value, substituted: -value, bits: 0, what });
        }

        let d = decide(&ctx, info);
        if d.bits == 0 {
            let reason = d.blocked.map_or_else(|| "unknown".to_owned(), blocked_name);
            *report.blocked_by.entry(reason).or_default() += 1;
            continue;
        }
        report.encryptable_positions += 1;
        report.encryptable_bits += u64::from(d.bits);
        let kind = RemainderKind::of(info).expect("encryptable positions carry a remainder");
        let abs = value.unsigned_abs();
        let rem = kind.remainder(abs);
        let shift = info.rice - d.bits;
        let full = (1u32 << d.bits) - 1;
        let patterns: Vec<u32> = match cfg.patterns {
            PatternMode::Exhaustive => (1..=full).collect(),
            PatternMode::Sampled(n) => (0..n.min(full)).map(|_| rng.gen_range(1..=full)).collect(),
        };
        debug_assert_eq!(target_mask(d.bits, info.rice), full << shift);
        for p in patterns {
            report.substitutions += 1;
            let new_abs = kind.level(rem ^ (p << shift), abs & 1) as i32;
            let substituted = if value < 0 { -new_abs } else { new_abs };
            let mut candidate = block.clone();
            candidate.set(info.x, info.y, substituted);
            if let Some(what) = mismatch(&reference, &candidate, tables, log2) {
                record(report, Violation { block: index, x: info.x, y: info.y, original: value, substituted, bits: d.bits, what });
                continue;
            }
            let again = decide(&CheckContext::new(&candidate, tables, log2).with_rules(cfg.rules), info);
            if again.bits != d.bits {
                report.decision_drift += 1;
            }
        }
    }

    if cfg.replacement {
        report.replacement_checked += 1;
        let ok = replace_encryptable_with_zero(block, tables, log2).is_ok_and(|z| {
            z.bins.len() == reference.bins.len()
                && z.bins.encryptable_indices().all(|i| !z.bins.bits()[i])
                && decode_subblock(&z.bins, block.width(), block.height(), block.mode(), tables, log2)
                    .is_ok_and(|d| d.block == z.cipher_block && d.annotation == reference.annotation)
        });
        if !ok {
            report.replacement_failures += 1;
        }
    }
}

pub fn run_oracle(cfg: &OracleConfig, tables: &CodingTables) -> OracleReport {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut pattern_rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut report = OracleReport { blocks: cfg.blocks, ..OracleReport::default() };
    for i in 0..cfg.blocks {
        let mode = cfg.mode.unwrap_or(if i % 2 == 0 { CodingMode::Transform } else { CodingMode::TransformSkip });
        let block = random_block(&mut rng, cfg, mode);
        check_block(i, &block, cfg, tables, &mut pattern_rng, &mut report);
    }
    report
}
