use super::MetricError;

/// One plane of samples at 8- or 10-bit depth.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrameBuffer {
    width: usize,
    height: usize,
    bit_depth: u32,
    pixels: Vec<u16>,
}

impl FrameBuffer {
    pub const DEPTHS: [u32; 2] = [8, 10];

    pub fn new(width: usize, height: usize, bit_depth: u32, pixels: Vec<u16>) -> Result<Self, MetricError> {
        if width == 0 || height == 0 {
            return Err(MetricError::EmptyFrame);
        }
        if !Self::DEPTHS.contains(&bit_depth) {
            return Err(MetricError::BitDepth(bit_depth));
        }
        if pixels.len() != width * height {
            return Err(MetricError::PixelCount { expected: width * height, found: pixels.len() });
        }
        if let Some(i) = pixels.iter().position(|&p| u32::from(p) >> bit_depth != 0) {
            return Err(MetricError::PixelRange { index: i, value: pixels[i], bit_depth });
        }
        Ok(Self { width, height, bit_depth, pixels })
    }

    pub fn filled(width: usize, height: usize, bit_depth: u32, value: u16) -> Result<Self, MetricError> {
        Self::new(width, height, bit_depth, vec![value; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn bit_depth(&self) -> u32 {
        self.bit_depth
    }

    pub fn pixels(&self) -> &[u16] {
        &self.pixels
    }

    pub fn max_value(&self) -> u32 {
        (1 << self.bit_depth) - 1
    }

    pub fn get(&self, x: usize, y: usize) -> u16 {
        self.pixels[y * self.width + x]
    }

    /// Sample at `(x, y)` with coordinates clamped to the frame.
    pub(crate) fn get_clamped(&self, x: isize, y: isize) -> u16 {
        let x = x.clamp(0, self.width as isize - 1) as usize;
        let y = y.clamp(0, self.height as isize - 1) as usize;
        self.get(x, y)
    }

    pub fn set(&mut self, x: usize, y: usize, value: u16) {
        assert!(u32::from(value) <= self.max_value());
        self.pixels[y * self.width + x] = value;
    }

    /// `max - p` for every sample.
    pub fn inverted(&self) -> Self {
        let m = self.max_value() as u16;
        Self { pixels: self.pixels.iter().map(|&p| m - p).collect(), ..self.clone() }
    }

    pub(crate) fn check_same_shape(&self, other: &Self) -> Result<(), MetricError> {
        if (self.width, self.height) != (other.width, other.height) {
            return Err(MetricError::Dimensions {
                left: (self.width, self.height),
                right: (other.width, other.height),
            });
        }
        if self.bit_depth != other.bit_depth {
            return Err(MetricError::DepthMismatch { left: self.bit_depth, right: other.bit_depth });
        }
        Ok(())
    }
}
