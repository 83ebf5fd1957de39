//! Per-frame metric table. Each frame is a list of planes; the histogram,
//! edge and pixel-change metrics use the first plane, PSNR combines planes
//! according to the weighting.

use std::io::Write;

use super::StreamError;
use crate::metrics::{edr, encryption_quality, eq_max, npcr, uaci, weighted_psnr, FrameBuffer, PsnrWeights};

#[derive(Clone, Debug, PartialEq)]
pub struct MetricsRow {
    pub frame: String,
    pub width: usize,
    pub height: usize,
    pub bit_depth: u32,
    pub eq: f64,
    pub eq_max: f64,
    pub edr: f64,
    pub npcr: f64,
    pub uaci: f64,
    pub psnr: f64,
}

pub fn metrics_report(
    reference: &[Vec<FrameBuffer>],
    test: &[Vec<FrameBuffer>],
    tau: f64,
    weights: PsnrWeights,
) -> Result<Vec<MetricsRow>, StreamError> {
    if reference.len() != test.len() || reference.is_empty() {
        return Err(StreamError::Format(format!("{} reference frames vs {} test frames", reference.len(), test.len())));
    }
    let mut rows = Vec::with_capacity(reference.len() + 1);
    for (i, (r, t)) in reference.iter().zip(test).enumerate() {
        if r.is_empty() || r.len() != t.len() {
            return Err(StreamError::Format(format!("frame {i}: plane counts {} vs {}", r.len(), t.len())));
        }
        let (p, c) = (&r[0], &t[0]);
        let planes: Vec<(FrameBuffer, FrameBuffer)> = r.iter().cloned().zip(t.iter().cloned()).collect();
        rows.push(MetricsRow {
            frame: i.to_string(),
            width: p.width(),
            height: p.height(),
            bit_depth: p.bit_depth(),
            eq: encryption_quality(p, c)?,
            eq_max: eq_max(p.width(), p.height(), p.bit_depth()),
            edr: edr(p, c, tau)?,
            npcr: npcr(p, c)?,
            uaci: uaci(p, c)?,
            psnr: weighted_psnr(&planes, weights)?,
        });
    }
    let n = rows.len() as f64;
    let mean = |f: fn(&MetricsRow) -> f64| rows.iter().map(f).sum::<f64>() / n;
    let avg = MetricsRow {
        frame: "average".into(),
        width: rows[0].width,
        height: rows[0].height,
        bit_depth: rows[0].bit_depth,
        eq: mean(|r| r.eq),
        eq_max: mean(|r| r.eq_max),
        edr: mean(|r| r.edr),
        npcr: mean(|r| r.npcr),
        uaci: mean(|r| r.uaci),
        psnr: mean(|r| r.psnr),
    };
    rows.push(avg);
    Ok(rows)
}

fn num(v: f64) -> String {
    if v.is_infinite() {
        "inf".into()
    } else {
        format!("{v:.6}")
    }
}

/// CSV with the edge threshold and PSNR weighting repeated on every row.
pub fn write_csv(rows: &[MetricsRow], tau: f64, weights: PsnrWeights, out: impl Write) -> Result<(), StreamError> {
    let fail = |e: csv::Error| StreamError::Io { path: "csv".into(), message: e.to_string() };
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["frame", "width", "height", "bit_depth", "eq", "eq_max", "edr", "npcr", "uaci", "psnr", "tau", "psnr_weights"])
        .map_err(fail)?;
    for r in rows {
        w.write_record([
            r.frame.clone(),
            r.width.to_string(),
            r.height.to_string(),
            r.bit_depth.to_string(),
            num(r.eq),
            num(r.eq_max),
            num(r.edr),
            num(r.npcr),
            num(r.uaci),
            num(r.psnr),
            tau.to_string(),
            weights.name().to_string(),
        ])
        .map_err(fail)?;
    }
    w.flush().map_err(|e| StreamError::Io { path: "csv".into(), message: e.to_string() })
}
