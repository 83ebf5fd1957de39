//! Binary PGM (P5) frames. A maxval up to 255 gives one byte per sample and
//! depth 8; up to 1023 gives big-endian two-byte samples and depth 10.

use std::io::{Read, Write};
use std::path::Path;

use super::{FrameBuffer, MetricError};

fn pgm_err(what: impl Into<String>) -> MetricError {
    MetricError::Pgm(what.into())
}

/// Reads the next header token, skipping whitespace and `#` comments.
fn token(data: &[u8], pos: &mut usize) -> Result<String, MetricError> {
    loop {
        match data.get(*pos) {
            Some(b) if b.is_ascii_whitespace() => *pos += 1,
            Some(b'#') => {
                while data.get(*pos).is_some_and(|&b| b != b'\n') {
                    *pos += 1;
                }
            }
            Some(_) => break,
            None => return Err(pgm_err("header truncated")),
        }
    }
    let start = *pos;
    while data.get(*pos).is_some_and(|b| !b.is_ascii_whitespace()) {
        *pos += 1;
    }
    Ok(String::from_utf8_lossy(&data[start..*pos]).into_owned())
}

fn number(data: &[u8], pos: &mut usize, what: &str) -> Result<usize, MetricError> {
    let t = token(data, pos)?;
    t.parse().map_err(|_| pgm_err(format!("bad {what} {t:?}")))
}

pub fn parse_pgm(data: &[u8]) -> Result<FrameBuffer, MetricError> {
    let mut pos = 0;
    if token(data, &mut pos)? != "P5" {
        return Err(pgm_err("not a binary PGM (P5) file"));
    }
    let width = number(data, &mut pos, "width")?;
    let height = number(data, &mut pos, "height")?;
    let maxval = number(data, &mut pos, "maxval")?;
    // Exactly one whitespace byte separates the header from the raster.
    if !data.get(pos).is_some_and(u8::is_ascii_whitespace) {
        return Err(pgm_err("header truncated"));
    }
    pos += 1;
    let (bit_depth, bytes_per_sample) = match maxval {
        1..=255 => (8, 1),
        256..=1023 => (10, 2),
        _ => return Err(pgm_err(format!("unsupported maxval {maxval}"))),
    };
    let count = width.checked_mul(height).ok_or_else(|| pgm_err("dimensions overflow"))?;
    let raster = &data[pos..];
    if raster.len() < count * bytes_per_sample {
        return Err(pgm_err(format!("raster truncated: need {} bytes, have {}", count * bytes_per_sample, raster.len())));
    }
    let pixels: Vec<u16> = if bytes_per_sample == 1 {
        raster[..count].iter().map(|&b| u16::from(b)).collect()
    } else {
        raster[..2 * count].chunks_exact(2).map(|c| u16::from_be_bytes([c[0], c[1]])).collect()
    };
    if let Some(&p) = pixels.iter().find(|&&p| usize::from(p) > maxval) {
        return Err(pgm_err(format!("sample {p} exceeds maxval {maxval}")));
    }
    FrameBuffer::new(width, height, bit_depth, pixels)
}

/// Serializes with maxval `2^d - 1`.
pub fn write_pgm(frame: &FrameBuffer, out: &mut impl Write) -> std::io::Result<()> {
    write!(out, "P5\n{} {}\n{}\n", frame.width(), frame.height(), frame.max_value())?;
    if frame.bit_depth() == 8 {
        let bytes: Vec<u8> = frame.pixels().iter().map(|&p| p as u8).collect();
        out.write_all(&bytes)
    } else {
        let bytes: Vec<u8> = frame.pixels().iter().flat_map(|p| p.to_be_bytes()).collect();
        out.write_all(&bytes)
    }
}

pub fn read_pgm_file(path: &Path) -> Result<FrameBuffer, MetricError> {
    let mut data = Vec::new();
    std::fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut data))
        .map_err(|e| pgm_err(format!("{}: {e}", path.display())))?;
    parse_pgm(&data)
}

pub fn write_pgm_file(frame: &FrameBuffer, path: &Path) -> std::io::Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_pgm(frame, &mut f)?;
    f.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eight_bit_with_comment() {
        let mut data = b"P5\n# made by hand\n2 1\n255\n".to_vec();
        data.extend([0u8, 255]);
        let f = parse_pgm(&data).unwrap();
        assert_eq!((f.width(), f.height(), f.bit_depth()), (2, 1, 8));
        assert_eq!(f.pixels(), &[0, 255]);
    }

    #[test]
    fn ten_bit_big_endian_round_trip() {
        let f = FrameBuffer::new(3, 2, 10, vec![0, 1, 256, 511, 1000, 1023]).unwrap();
        let mut buf = Vec::new();
        write_pgm(&f, &mut buf).unwrap();
        assert!(buf.ends_with(&[0x03, 0xe8, 0x03, 0xff]));
        assert_eq!(parse_pgm(&buf).unwrap(), f);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(parse_pgm(b"P2\n1 1\n255\n0").is_err());
        assert!(parse_pgm(b"P5\n2 2\n255\n\x00").is_err());
        assert!(parse_pgm(b"P5\n1 1\n65535\n\x00\x00").is_err());
        assert!(parse_pgm(b"P5\n1 1\n1000\n\x03\xe9").is_err());
        assert!(parse_pgm(b"P5\n1 1").is_err());
    }
}
