//! Checks that a sealed stream is a drop-in replacement for its plain
//! counterpart: same length, same bin layout, same parsing state, and
//! decodable without the key.

use std::fmt;

use super::payload::{encode_payload, parse_payload, ParsedPayload};
use super::sealed::SealedStream;
use super::stream::CoefficientStream;
use crate::coeffmodel::{annotate, CodingTables};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.passed)
    }

    fn push(&mut self, name: &'static str, passed: bool, detail: impl Into<String>) -> bool {
        self.checks.push(Check { name, passed, detail: detail.into() });
        passed
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail)?;
        }
        write!(f, "{}", if self.passed() { "verify: PASS" } else { "verify: FAIL" })
    }
}

fn first_block_difference(plain: &CoefficientStream, tables: &CodingTables, parsed: &ParsedPayload) -> Option<String> {
    for (i, (p, d)) in plain.blocks.iter().zip(&parsed.blocks).enumerate() {
        if (p.width(), p.height(), p.mode()) != (d.block.width(), d.block.height(), d.block.mode()) {
            return Some(format!("block {i}: shape or mode differs"));
        }
        if annotate(p, tables) != d.annotation {
            return Some(format!("block {i}: pass annotation differs"));
        }
    }
    None
}

/// Runs every check; stops early only when later checks cannot be evaluated.
pub fn verify(plain: &CoefficientStream, sealed_bytes: &[u8], tables: &CodingTables) -> VerifyReport {
    let mut r = VerifyReport::default();
    let digest = tables.digest_hex();
    if !r.push("plain tables", plain.check_tables(tables).is_ok(), format!("tables digest {digest}")) {
        return r;
    }
    let sealed = match SealedStream::from_bytes(sealed_bytes) {
        Ok(s) => {
            r.push("container", true, format!("{} payload bits", s.header.bit_count));
            s
        }
        Err(e) => {
            r.push("container", false, e.to_string());
            return r;
        }
    };
    let header_ok = hex::encode(sealed.header.tables_digest) == digest
        && u32::from(sealed.header.log2_tr_range) == plain.header.log2_tr_range;
    if !r.push("header", header_ok, "table digest and dynamic range match the plain stream") {
        return r;
    }
    let plain_bins = match encode_payload(plain, tables) {
        Ok(b) => b,
        Err(e) => {
            r.push("plain encode", false, e.to_string());
            return r;
        }
    };
    r.push(
        "bit length",
        plain_bins.len() == sealed.bits.len(),
        format!("plain {} bits, sealed {} bits", plain_bins.len(), sealed.bits.len()),
    );
    let log2 = plain.header.log2_tr_range;
    let parsed = match parse_payload(&sealed.bits, tables, log2) {
        Ok(p) => {
            r.push("keyless decode", true, format!("{} blocks, {} elements, all levels in range", p.blocks.len(), p.aux.len()));
            p
        }
        Err(e) => {
            r.push("keyless decode", false, e.to_string());
            return r;
        }
    };
    let keyless = parsed.to_stream(plain.header.clone());
    let re = encode_payload(&keyless, tables).expect("decoded values re-encode");
    r.push("re-encode", re.bits() == &sealed.bits[..], "keyless values reproduce the sealed bins");
    let same_structure = parsed.blocks.len() == plain.blocks.len()
        && parsed.aux.len() == plain.aux.len()
        && parsed.aux.iter().zip(&plain.aux).all(|(a, b)| a.kind == b.kind);
    if !r.push("structure", same_structure, "block and element counts and kinds match") {
        return r;
    }
    r.push(
        "region boundaries",
        re.bypass_layout() == plain_bins.bypass_layout(),
        "context/bypass boundaries identical",
    );
    match first_block_difference(plain, tables, &parsed) {
        None => r.push("annotation invariance", true, "rice, V, state, parity, cutoff and context bins identical"),
        Some(why) => r.push("annotation invariance", false, why),
    };
    r
}
