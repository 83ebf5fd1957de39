use serde::{Deserialize, Serialize};

use super::CoeffError;

/// Residual coding mode of a sub-block.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CodingMode {
    /// Regular transform coefficients.
    #[serde(rename = "TC")]
    Transform,
    /// Transform skip.
    #[serde(rename = "TS")]
    TransformSkip,
}

/// A `width × height` grid of signed coefficients, stored row-major
/// (`coeffs[y * width + x]`).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SubBlock {
    width: usize,
    height: usize,
    mode: CodingMode,
    coeffs: Vec<i32>,
}

/// Largest supported sub-block side.
pub const MAX_SIDE: usize = 64;

pub fn check_dims(width: usize, height: usize) -> Result<(), CoeffError> {
    let ok = |d: usize| d.is_power_of_two() && d <= MAX_SIDE;
    if ok(width) && ok(height) {
        Ok(())
    } else {
        Err(CoeffError::Dimensions { width, height })
    }
}

impl SubBlock {
    pub fn new(width: usize, height: usize, mode: CodingMode, coeffs: Vec<i32>) -> Result<Self, CoeffError> {
        check_dims(width, height)?;
        if coeffs.len() != width * height {
            return Err(CoeffError::CoeffCount {
                expected: width * height,
                found: coeffs.len(),
            });
        }
        Ok(Self { width, height, mode, coeffs })
    }

    pub fn zeros(width: usize, height: usize, mode: CodingMode) -> Result<Self, CoeffError> {
        Self::new(width, height, mode, vec![0; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn mode(&self) -> CodingMode {
        self.mode
    }

    pub fn coeffs(&self) -> &[i32] {
        &self.coeffs
    }

    pub fn contains(&self, x: isize, y: isize) -> bool {
        x >= 0 && y >= 0 && (x as usize) < self.width && (y as usize) < self.height
    }

    pub fn get(&self, x: usize, y: usize) -> i32 {
        self.coeffs[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, value: i32) {
        self.coeffs[y * self.width + x] = value;
    }

    /// `|C|` at `(x, y)`, zero outside the block.
    pub fn abs_at(&self, x: isize, y: isize) -> u32 {
        if self.contains(x, y) {
            self.get(x as usize, y as usize).unsigned_abs()
        } else {
            0
        }
    }

    /// Rejects any `|C| ≥ 2^log2_tr_range`.
    pub fn check_range(&self, log2_tr_range: u32) -> Result<(), CoeffError> {
        let limit = 1u64 << log2_tr_range;
        for (i, &c) in self.coeffs.iter().enumerate() {
            if u64::from(c.unsigned_abs()) >= limit {
                return Err(CoeffError::OutOfRange {
                    x: i % self.width,
                    y: i / self.width,
                    value: c,
                    log2_tr_range,
                });
            }
        }
        Ok(())
    }
}
