//! Frame-pair security metrics: histogram deviation (EQ), edge differential
//! ratio, NPCR, UACI and PSNR.

mod frame;
pub mod pgm;

pub use frame::FrameBuffer;
pub use pgm::{parse_pgm, read_pgm_file, write_pgm, write_pgm_file};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricError {
    #[error("frame must have positive dimensions")]
    EmptyFrame,
    #[error("unsupported bit depth {0}")]
    BitDepth(u32),
    #[error("expected {expected} pixels, found {found}")]
    PixelCount { expected: usize, found: usize },
    #[error("pixel {index} = {value} exceeds {bit_depth}-bit range")]
    PixelRange { index: usize, value: u16, bit_depth: u32 },
    #[error("frame sizes differ: {left:?} vs {right:?}")]
    Dimensions { left: (usize, usize), right: (usize, usize) },
    #[error("bit depths differ: {left} vs {right}")]
    DepthMismatch { left: u32, right: u32 },
    #[error("plane count {planes} does not match {weights} weights")]
    PlaneCount { planes: usize, weights: usize },
    #[error("pgm: {0}")]
    Pgm(String),
}

/// Default edge threshold as a fraction of the peak sample value.
pub const DEFAULT_TAU: f64 = 0.1;

pub fn histogram(f: &FrameBuffer) -> Vec<u64> {
    let mut counts = vec![0u64; 1 << f.bit_depth()];
    for &p in f.pixels() {
        counts[usize::from(p)] += 1;
    }
    counts
}

/// Sum of absolute histogram differences divided by the number of levels.
pub fn encryption_quality(p: &FrameBuffer, c: &FrameBuffer) -> Result<f64, MetricError> {
    p.check_same_shape(c)?;
    let diff: u64 = histogram(p).iter().zip(histogram(c)).map(|(&a, b)| a.abs_diff(b)).sum();
    Ok(diff as f64 / f64::from(1u32 << p.bit_depth()))
}

pub fn eq_max(width: usize, height: usize, bit_depth: u32) -> f64 {
    2.0 * (width * height) as f64 / f64::from(1u32 << bit_depth)
}

/// Binary 4-neighbour Laplacian edge map with edge replication; a pixel is
/// an edge when the response magnitude exceeds `tau * (2^d - 1)`.
pub fn edge_map(f: &FrameBuffer, tau: f64) -> Vec<u8> {
    let threshold = tau * f64::from(f.max_value());
    let mut out = Vec::with_capacity(f.pixels().len());
    for y in 0..f.height() as isize {
        for x in 0..f.width() as isize {
            let at = |dx, dy| i64::from(f.get_clamped(x + dx, y + dy));
            let resp = at(-1, 0) + at(1, 0) + at(0, -1) + at(0, 1) - 4 * at(0, 0);
            out.push(u8::from(resp.abs() as f64 > threshold));
        }
    }
    out
}

/// Edge differential ratio; two empty edge maps give 0.
pub fn edr(p: &FrameBuffer, c: &FrameBuffer, tau: f64) -> Result<f64, MetricError> {
    p.check_same_shape(c)?;
    let (pe, ce) = (edge_map(p, tau), edge_map(c, tau));
    let num: u64 = pe.iter().zip(&ce).map(|(&a, &b)| u64::from(a.abs_diff(b))).sum();
    let den: u64 = pe.iter().zip(&ce).map(|(&a, &b)| u64::from(a) + u64::from(b)).sum();
    Ok(if den == 0 { 0.0 } else { num as f64 / den as f64 })
}

/// Percentage of positions whose samples differ.
pub fn npcr(c1: &FrameBuffer, c2: &FrameBuffer) -> Result<f64, MetricError> {
    c1.check_same_shape(c2)?;
    let diff = c1.pixels().iter().zip(c2.pixels()).filter(|(a, b)| a != b).count();
    Ok(100.0 * diff as f64 / c1.pixels().len() as f64)
}

/// Mean absolute sample difference over `2^d`, as a percentage.
pub fn uaci(c1: &FrameBuffer, c2: &FrameBuffer) -> Result<f64, MetricError> {
    c1.check_same_shape(c2)?;
    let sum: u64 = c1.pixels().iter().zip(c2.pixels()).map(|(&a, &b)| u64::from(a.abs_diff(b))).sum();
    Ok(100.0 * sum as f64 / (c1.pixels().len() as f64 * f64::from(1u32 << c1.bit_depth())))
}

pub fn mse(p: &FrameBuffer, c: &FrameBuffer) -> Result<f64, MetricError> {
    p.check_same_shape(c)?;
    let sum: u64 = p.pixels().iter().zip(c.pixels()).map(|(&a, &b)| u64::from(a.abs_diff(b)).pow(2)).sum();
    Ok(sum as f64 / p.pixels().len() as f64)
}

/// PSNR in dB; identical frames give `f64::INFINITY`.
pub fn psnr(p: &FrameBuffer, c: &FrameBuffer) -> Result<f64, MetricError> {
    let m = mse(p, c)?;
    let peak = f64::from(p.max_value());
    Ok(if m == 0.0 { f64::INFINITY } else { 10.0 * (peak * peak / m).log10() })
}

/// Per-plane weights for combining PSNR.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PsnrWeights {
    LumaOnly,
    /// Y:Cb:Cr = 6:1:1.
    Yuv611,
}

impl PsnrWeights {
    pub fn weights(self) -> &'static [f64] {
        match self {
            PsnrWeights::LumaOnly => &[1.0],
            PsnrWeights::Yuv611 => &[0.75, 0.125, 0.125],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            PsnrWeights::LumaOnly => "luma",
            PsnrWeights::Yuv611 => "611",
        }
    }
}

/// Weighted sum of per-plane PSNR. `planes` lists `(reference, test)` per
/// plane; luma-only weighting uses the first plane and ignores the rest.
pub fn weighted_psnr(planes: &[(FrameBuffer, FrameBuffer)], weights: PsnrWeights) -> Result<f64, MetricError> {
    let w = weights.weights();
    if planes.len() < w.len() {
        return Err(MetricError::PlaneCount { planes: planes.len(), weights: w.len() });
    }
    let mut total = 0.0;
    for ((p, c), &wi) in planes.iter().zip(w) {
        total += wi * psnr(p, c)?;
    }
    Ok(total)
}
